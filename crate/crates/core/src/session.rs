//! Analysis sessions: a parsed KB with its repairs, distance matrix and
//! embedding computed eagerly, plus the documents served to clients and the
//! on-disk session format.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::{Arc, Mutex, RwLock};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::clustering::{default_sigma, spectral_eigenvalues, ClusteringMethod, Partition};
use crate::error::{Error, Result};
use crate::geometry::{mds_embed, Embedding, MdsOptions};
use crate::inference::{entails_scoped, ics_core, Scope, Semantics};
use crate::kb::{parse_kb, parse_query, KnowledgeBase, DEFAULT_MAX_ROUNDS};
use crate::metric::{distance_matrix, DistanceMatrix, WeightScheme};
use crate::repairs::{compute_repairs, RepairSet};

pub const SESSION_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SessionConfig {
    pub weights: WeightScheme,
    /// Used when a request names no clustering; `k` is capped at the repair count.
    pub clustering: ClusteringMethod,
    pub mds: MdsOptions,
    pub max_rounds: usize,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            weights: WeightScheme::default(),
            clustering: ClusteringMethod::Spectral {
                k: 3,
                sigma: None,
                seed: 0,
            },
            mds: MdsOptions::default(),
            max_rounds: DEFAULT_MAX_ROUNDS,
        }
    }
}

impl SessionConfig {
    pub fn validate(&self) -> Result<()> {
        self.weights.validate()?;
        if self.max_rounds == 0 {
            return Err(Error::InvalidParameter(
                "max_rounds must be positive".into(),
            ));
        }
        if self.mds.tol.is_nan() || self.mds.tol < 0.0 {
            return Err(Error::InvalidParameter(
                "mds tolerance must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

/// Serializes a document the way every front end emits it.
pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("documents always serialize")
}

/// Flat clustering parameters as they arrive from a query string or flags.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ClusteringParams {
    pub method: Option<String>,
    pub k: Option<usize>,
    pub sigma: Option<f64>,
    pub seed: Option<u64>,
    pub tau: Option<f64>,
}

impl ClusteringParams {
    /// `None` when no parameter is given (the session default applies).
    pub fn to_method(&self) -> Result<Option<ClusteringMethod>> {
        let spectral_only = self.k.is_some() || self.sigma.is_some() || self.seed.is_some();
        let method = match self.method.as_deref() {
            None if spectral_only || self.tau.is_some() => {
                return Err(Error::InvalidParameter(
                    "clustering parameters given without a method".into(),
                ))
            }
            None => return Ok(None),
            Some(m) => m.to_ascii_lowercase(),
        };
        match method.as_str() {
            "spectral" => {
                if self.tau.is_some() {
                    return Err(Error::InvalidParameter(
                        "tau applies to the threshold method".into(),
                    ));
                }
                let k = self
                    .k
                    .ok_or_else(|| Error::InvalidParameter("spectral clustering needs k".into()))?;
                Ok(Some(ClusteringMethod::Spectral {
                    k,
                    sigma: self.sigma,
                    seed: self.seed.unwrap_or(0),
                }))
            }
            "threshold" => {
                if spectral_only {
                    return Err(Error::InvalidParameter(
                        "k, sigma and seed apply to the spectral method".into(),
                    ));
                }
                let tau = self.tau.ok_or_else(|| {
                    Error::InvalidParameter("threshold clustering needs tau".into())
                })?;
                Ok(Some(ClusteringMethod::Threshold { tau }))
            }
            other => Err(Error::InvalidParameter(format!(
                "unknown clustering method `{other}` (expected spectral or threshold)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub id: String,
    pub repair_count: usize,
    pub labels: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepairDocument {
    pub label: String,
    pub fact_indices: Vec<usize>,
    pub atoms: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepairsDocument {
    pub repair_count: usize,
    pub repairs: Vec<RepairDocument>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusteringDocument {
    /// The method with every default resolved (spectral σ is always present).
    pub clustering: ClusteringMethod,
    pub partition: Vec<Vec<String>>,
    /// Normalized-affinity spectrum, descending; empty when undefined.
    pub eigenvalues: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisDocument {
    pub labels: Vec<String>,
    pub repairs: Vec<RepairDocument>,
    pub matrix: DistanceMatrix,
    pub embedding: Embedding,
    #[serde(flatten)]
    pub clustering: ClusteringDocument,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NamedScope {
    All,
    Partition,
}

/// Which repairs a query runs against.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScopeSpec {
    Named(NamedScope),
    Cluster { cluster: usize },
    Repairs { repairs: Vec<String> },
}

impl FromStr for ScopeSpec {
    type Err = Error;

    /// `all`, `partition`, `cluster:<i>` or `repairs:<label>,<label>…`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "all" => return Ok(ScopeSpec::Named(NamedScope::All)),
            "partition" => return Ok(ScopeSpec::Named(NamedScope::Partition)),
            _ => {}
        }
        if let Some(i) = s.strip_prefix("cluster:") {
            let cluster = i
                .trim()
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad cluster index `{i}`")))?;
            return Ok(ScopeSpec::Cluster { cluster });
        }
        if let Some(list) = s.strip_prefix("repairs:") {
            let repairs = list
                .split(',')
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(str::to_owned)
                .collect();
            return Ok(ScopeSpec::Repairs { repairs });
        }
        Err(Error::InvalidParameter(format!(
            "scope must be all, partition, cluster:<i> or repairs:<labels>, got `{s}`"
        )))
    }
}

impl fmt::Display for ScopeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScopeSpec::Named(NamedScope::All) => f.write_str("all"),
            ScopeSpec::Named(NamedScope::Partition) => f.write_str("partition"),
            ScopeSpec::Cluster { cluster } => write!(f, "cluster:{cluster}"),
            ScopeSpec::Repairs { repairs } => write!(f, "repairs:{}", repairs.join(",")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryRequest {
    pub query: String,
    pub semantics: Semantics,
    pub scope: ScopeSpec,
    /// Partition used by cluster and partition scopes; session default if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clustering: Option<ClusteringMethod>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryAnswer {
    pub query: String,
    pub semantics: Semantics,
    pub scope: ScopeSpec,
    /// Single answer for `all`, cluster and explicit scopes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub answer: Option<bool>,
    pub blocks: Vec<Vec<String>>,
    pub answers: Vec<bool>,
    /// Size of the consensus (intersection of closures) of each block.
    pub consensus_atoms: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl QueryAnswer {
    /// `True`, or `True, True, False` for partition scopes.
    pub fn render(&self) -> String {
        let word = |b: &bool| if *b { "True" } else { "False" };
        match self.answer {
            Some(a) => word(&a).to_owned(),
            None => self.answers.iter().map(word).collect::<Vec<_>>().join(", "),
        }
    }
}

/// On-disk session format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionDocument {
    pub version: u32,
    pub id: String,
    pub created_at: DateTime<Utc>,
    pub kb_text: String,
    pub config: SessionConfig,
    pub repairs: Vec<Vec<usize>>,
    pub matrix: DistanceMatrix,
    pub embedding: Embedding,
}

/// A knowledge base with every clustering-independent artefact computed.
#[derive(Debug)]
pub struct Session {
    id: String,
    created_at: DateTime<Utc>,
    kb_text: String,
    config: SessionConfig,
    kb: KnowledgeBase,
    repairs: RepairSet,
    matrix: DistanceMatrix,
    embedding: Embedding,
    partitions: Mutex<HashMap<String, Partition>>,
}

impl Session {
    pub fn create(kb_text: &str, config: SessionConfig) -> Result<Self> {
        Self::with_id(
            uuid::Uuid::new_v4().simple().to_string(),
            Utc::now(),
            kb_text,
            config,
        )
    }

    fn with_id(
        id: String,
        created_at: DateTime<Utc>,
        kb_text: &str,
        config: SessionConfig,
    ) -> Result<Self> {
        config.validate()?;
        let kb = parse_kb(kb_text)?.with_max_rounds(config.max_rounds);
        let repairs = compute_repairs(&kb)?;
        // Closures are needed by every query; computing them here also
        // surfaces a non-terminating chase at creation time.
        for r in repairs.iter() {
            r.ground_closure(&kb)?;
        }
        let matrix = distance_matrix(&kb, &repairs, &config.weights);
        let embedding = mds_embed(&matrix, &config.mds)?;
        Ok(Session {
            id,
            created_at,
            kb_text: kb_text.to_owned(),
            config,
            kb,
            repairs,
            matrix,
            embedding,
            partitions: Mutex::new(HashMap::new()),
        })
    }

    /// A fresh session with the same id and KB under a new configuration.
    pub fn reconfigure(&self, config: SessionConfig) -> Result<Self> {
        Self::with_id(self.id.clone(), self.created_at, &self.kb_text, config)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn kb(&self) -> &KnowledgeBase {
        &self.kb
    }

    pub fn kb_text(&self) -> &str {
        &self.kb_text
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn repairs(&self) -> &RepairSet {
        &self.repairs
    }

    pub fn matrix(&self) -> &DistanceMatrix {
        &self.matrix
    }

    pub fn embedding(&self) -> &Embedding {
        &self.embedding
    }

    pub fn summary(&self) -> SessionSummary {
        SessionSummary {
            id: self.id.clone(),
            repair_count: self.repairs.len(),
            labels: self.repairs.labels(),
        }
    }

    pub fn repairs_document(&self) -> RepairsDocument {
        let repairs = self
            .repairs
            .iter()
            .enumerate()
            .map(|(i, r)| RepairDocument {
                label: RepairSet::label(i),
                fact_indices: r.fact_indices().iter().copied().collect(),
                atoms: r.atoms(&self.kb).iter().map(ToString::to_string).collect(),
            })
            .collect();
        RepairsDocument {
            repair_count: self.repairs.len(),
            repairs,
        }
    }

    /// Fills in defaults: the session's method when `None`, σ from the matrix,
    /// and the default `k` capped at the repair count.
    pub fn resolve_method(&self, method: Option<&ClusteringMethod>) -> ClusteringMethod {
        let explicit = method.is_some();
        match method.unwrap_or(&self.config.clustering).clone() {
            ClusteringMethod::Spectral { k, sigma, seed } => ClusteringMethod::Spectral {
                k: if explicit {
                    k
                } else {
                    k.min(self.repairs.len()).max(1)
                },
                sigma: Some(sigma.unwrap_or_else(|| default_sigma(&self.matrix))),
                seed,
            },
            other => other,
        }
    }

    /// The partition for `method`, cached per resolved parameters.
    pub fn partition(&self, method: Option<&ClusteringMethod>) -> Result<Partition> {
        let resolved = self.resolve_method(method);
        let key = resolved.cache_key();
        if let Some(p) = self.partitions.lock().expect("cache lock").get(&key) {
            return Ok(p.clone());
        }
        let p = resolved.apply(&self.matrix)?;
        self.partitions
            .lock()
            .expect("cache lock")
            .insert(key, p.clone());
        Ok(p)
    }

    pub fn clustering_document(
        &self,
        method: Option<&ClusteringMethod>,
    ) -> Result<ClusteringDocument> {
        let resolved = self.resolve_method(method);
        let partition = self.partition(Some(&resolved))?;
        let sigma = match resolved {
            ClusteringMethod::Spectral { sigma: Some(s), .. } => s,
            _ => default_sigma(&self.matrix),
        };
        let eigenvalues = spectral_eigenvalues(&self.matrix, sigma).unwrap_or_default();
        Ok(ClusteringDocument {
            clustering: resolved,
            partition: partition.labelled(self.matrix.labels()),
            eigenvalues,
        })
    }

    pub fn analysis(&self, method: Option<&ClusteringMethod>) -> Result<AnalysisDocument> {
        Ok(AnalysisDocument {
            labels: self.repairs.labels(),
            repairs: self.repairs_document().repairs,
            matrix: self.matrix.clone(),
            embedding: self.embedding.clone(),
            clustering: self.clustering_document(method)?,
        })
    }

    pub fn answer_query(&self, req: &QueryRequest) -> Result<QueryAnswer> {
        let query = parse_query(&req.query)?;
        let warnings = query
            .unknown_predicates(&self.kb)
            .into_iter()
            .map(|p| format!("unknown predicate {p}"))
            .collect();
        let labels = self.matrix.labels();
        let scopes: Vec<Scope> = match &req.scope {
            ScopeSpec::Named(NamedScope::All) => vec![Scope::all(&self.repairs)?],
            ScopeSpec::Named(NamedScope::Partition) => self
                .partition(req.clustering.as_ref())?
                .blocks()
                .iter()
                .map(|b| Scope::new(b.iter().copied(), &self.repairs))
                .collect::<Result<_>>()?,
            ScopeSpec::Cluster { cluster } => {
                let p = self.partition(req.clustering.as_ref())?;
                let block = p.blocks().get(*cluster).ok_or_else(|| {
                    Error::InvalidParameter(format!(
                        "cluster {cluster} out of range (partition has {} blocks)",
                        p.len()
                    ))
                })?;
                vec![Scope::new(block.iter().copied(), &self.repairs)?]
            }
            ScopeSpec::Repairs { repairs } => vec![Scope::from_labels(repairs, &self.repairs)?],
        };
        let mut blocks = Vec::with_capacity(scopes.len());
        let mut answers = Vec::with_capacity(scopes.len());
        let mut consensus_atoms = Vec::with_capacity(scopes.len());
        for scope in &scopes {
            blocks.push(scope.indices().iter().map(|&i| labels[i].clone()).collect());
            answers.push(entails_scoped(
                &self.kb,
                &self.repairs,
                scope,
                req.semantics,
                &query,
            )?);
            consensus_atoms.push(ics_core(&self.kb, &self.repairs, scope)?.len());
        }
        let single = !matches!(req.scope, ScopeSpec::Named(NamedScope::Partition));
        Ok(QueryAnswer {
            query: query.to_string(),
            semantics: req.semantics,
            scope: req.scope.clone(),
            answer: single.then(|| answers[0]),
            blocks,
            answers,
            consensus_atoms,
            warnings,
        })
    }

    pub fn to_document(&self) -> SessionDocument {
        SessionDocument {
            version: SESSION_FORMAT_VERSION,
            id: self.id.clone(),
            created_at: self.created_at,
            kb_text: self.kb_text.clone(),
            config: self.config.clone(),
            repairs: self
                .repairs
                .index_sets()
                .into_iter()
                .map(|s| s.into_iter().collect())
                .collect(),
            matrix: self.matrix.clone(),
            embedding: self.embedding.clone(),
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = to_json(&self.to_document());
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Rebuilds a session from its saved form without recomputing artefacts.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        let version = raw
            .get("version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| Error::Format("missing version field".into()))?;
        if version != u64::from(SESSION_FORMAT_VERSION) {
            return Err(Error::VersionMismatch {
                found: u32::try_from(version).unwrap_or(u32::MAX),
                supported: SESSION_FORMAT_VERSION,
            });
        }
        let doc: SessionDocument =
            serde_json::from_value(raw).map_err(|e| Error::Format(e.to_string()))?;
        Self::from_document(doc)
    }

    pub fn from_document(doc: SessionDocument) -> Result<Self> {
        doc.config.validate()?;
        let kb = parse_kb(&doc.kb_text)?.with_max_rounds(doc.config.max_rounds);
        let n_facts = kb.facts().len();
        if doc.repairs.iter().flatten().any(|&i| i >= n_facts) {
            return Err(Error::Format("repair refers to a missing fact".into()));
        }
        let sets: Vec<BTreeSet<usize>> = doc
            .repairs
            .iter()
            .map(|r| r.iter().copied().collect())
            .collect();
        let repairs = RepairSet::from_index_sets(sets.clone());
        if repairs.index_sets() != sets {
            return Err(Error::Format("repairs are not in canonical order".into()));
        }
        let n = repairs.len();
        if doc.matrix.len() != n || doc.embedding.points.len() != n {
            return Err(Error::Format(
                "matrix and embedding must have one entry per repair".into(),
            ));
        }
        doc.matrix.validate_symmetric()?;
        Ok(Session {
            id: doc.id,
            created_at: doc.created_at,
            kb_text: doc.kb_text,
            config: doc.config,
            kb,
            repairs,
            matrix: doc.matrix,
            embedding: doc.embedding,
            partitions: Mutex::new(HashMap::new()),
        })
    }
}

/// In-memory sessions keyed by id. Replacing a session swaps the whole
/// value, so readers see either the old or the new state.
#[derive(Debug, Default)]
pub struct SessionStore {
    sessions: RwLock<HashMap<String, Arc<Session>>>,
}

impl SessionStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&self, session: Session) -> Arc<Session> {
        let session = Arc::new(session);
        self.sessions
            .write()
            .expect("session store lock")
            .insert(session.id().to_owned(), Arc::clone(&session));
        session
    }

    pub fn get(&self, id: &str) -> Option<Arc<Session>> {
        self.sessions
            .read()
            .expect("session store lock")
            .get(id)
            .cloned()
    }

    pub fn len(&self) -> usize {
        self.sessions.read().expect("session store lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
