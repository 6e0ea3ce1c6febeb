//! Repair enumeration: minimal conflicts from chase provenance, then the
//! complements of their minimal hitting sets.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kb::{combine_supports, insert_minimal, Atom, KnowledgeBase, Support};

/// Upper bound on the fact count accepted by [`brute_force_repairs`].
pub const BRUTE_FORCE_LIMIT: usize = 20;

/// A minimal inconsistent subset of the facts, as fact indices.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Conflict(pub BTreeSet<usize>);

/// A maximal consistent subset of the facts.
#[derive(Debug, Serialize)]
pub struct Repair {
    fact_indices: BTreeSet<usize>,
    #[serde(skip)]
    closure: OnceLock<BTreeSet<Atom>>,
}

impl Repair {
    pub fn new(fact_indices: BTreeSet<usize>) -> Self {
        Repair {
            fact_indices,
            closure: OnceLock::new(),
        }
    }

    pub fn fact_indices(&self) -> &BTreeSet<usize> {
        &self.fact_indices
    }

    pub fn len(&self) -> usize {
        self.fact_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fact_indices.is_empty()
    }

    pub fn atoms(&self, kb: &KnowledgeBase) -> Vec<Atom> {
        kb.subset(&self.fact_indices)
    }

    /// Ground closure of the repair, computed on first use.
    ///
    /// The cache assumes the repair is always queried against the KB it was
    /// computed from.
    pub fn ground_closure(&self, kb: &KnowledgeBase) -> Result<&BTreeSet<Atom>> {
        if let Some(closure) = self.closure.get() {
            return Ok(closure);
        }
        let closure = kb.saturate_subset(&self.fact_indices)?.ground_atoms();
        Ok(self.closure.get_or_init(|| closure))
    }
}

impl Clone for Repair {
    fn clone(&self) -> Self {
        Repair {
            fact_indices: self.fact_indices.clone(),
            closure: self.closure.clone(),
        }
    }
}

impl PartialEq for Repair {
    fn eq(&self, other: &Self) -> bool {
        self.fact_indices == other.fact_indices
    }
}

impl Eq for Repair {}

/// Repairs in canonical order: sorted by their ascending index sequences.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RepairSet {
    repairs: Vec<Repair>,
}

impl RepairSet {
    pub fn from_index_sets(sets: impl IntoIterator<Item = BTreeSet<usize>>) -> Self {
        let mut sets: Vec<BTreeSet<usize>> = sets.into_iter().collect();
        sets.sort();
        sets.dedup();
        RepairSet {
            repairs: sets.into_iter().map(Repair::new).collect(),
        }
    }

    pub fn repairs(&self) -> &[Repair] {
        &self.repairs
    }

    pub fn len(&self) -> usize {
        self.repairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.repairs.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<&Repair> {
        self.repairs.get(i)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Repair> {
        self.repairs.iter()
    }

    pub fn label(i: usize) -> String {
        format!("r{i}")
    }

    pub fn labels(&self) -> Vec<String> {
        (0..self.len()).map(Self::label).collect()
    }

    /// Position of the repair labelled `label`.
    pub fn position(&self, label: &str) -> Result<usize> {
        label
            .strip_prefix('r')
            .and_then(|n| n.parse::<usize>().ok())
            .filter(|&i| i < self.len() && Self::label(i) == label)
            .ok_or_else(|| Error::UnknownRepair(label.to_owned()))
    }

    pub fn index_sets(&self) -> Vec<BTreeSet<usize>> {
        self.repairs
            .iter()
            .map(|r| r.fact_indices.clone())
            .collect()
    }
}

impl fmt::Display for Conflict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// All minimal inconsistent subsets of the KB facts.
///
/// Every constraint-body match in the saturation of all facts contributes the
/// unions of one minimal support per matched atom; the family is then reduced
/// to its inclusion-minimal members.
pub fn compute_conflicts(kb: &KnowledgeBase) -> Result<Vec<Conflict>> {
    if kb.constraints().is_empty() {
        return Ok(Vec::new());
    }
    let all: Vec<usize> = (0..kb.facts().len()).collect();
    let sat = kb.saturate_subset(&all)?;
    let index = sat.index();
    let mut family: Vec<Support> = Vec::new();
    for nc in kb.constraints() {
        for (_, matched) in index.matches(&nc.body) {
            let supports: Vec<&[Support]> = matched
                .iter()
                .map(|&i| sat.supports(&index.atoms()[i]))
                .collect();
            for s in combine_supports(&supports) {
                insert_minimal(&mut family, s);
            }
        }
    }
    Ok(family.into_iter().map(Conflict).collect())
}

/// All inclusion-minimal subsets of `universe` meeting every conflict.
///
/// Depth-first: pick the first conflict the partial set misses and branch on
/// each of its elements. Branches extending an already found hitting set are
/// cut, and the result is filtered to minimal sets.
pub fn minimal_hitting_sets(
    conflicts: &[Conflict],
    universe: &BTreeSet<usize>,
) -> Vec<BTreeSet<usize>> {
    let restricted: Vec<BTreeSet<usize>> = conflicts
        .iter()
        .map(|c| c.0.intersection(universe).copied().collect())
        .collect();
    if restricted.iter().any(BTreeSet::is_empty) {
        return Vec::new();
    }
    let mut found: Vec<BTreeSet<usize>> = Vec::new();
    branch(&restricted, &mut BTreeSet::new(), &mut found);

    let mut minimal: Vec<BTreeSet<usize>> = Vec::new();
    for h in found {
        insert_minimal(&mut minimal, h);
    }
    minimal
}

fn branch(
    conflicts: &[BTreeSet<usize>],
    partial: &mut BTreeSet<usize>,
    found: &mut Vec<BTreeSet<usize>>,
) {
    if found.iter().any(|h| h.is_subset(partial)) {
        return;
    }
    let Some(unhit) = conflicts.iter().find(|c| c.is_disjoint(partial)) else {
        found.push(partial.clone());
        return;
    };
    for &e in unhit {
        partial.insert(e);
        branch(conflicts, partial, found);
        partial.remove(&e);
    }
}

/// All repairs of the KB: complements of the minimal hitting sets of its conflicts.
pub fn compute_repairs(kb: &KnowledgeBase) -> Result<RepairSet> {
    let conflicts = compute_conflicts(kb)?;
    let universe: BTreeSet<usize> = (0..kb.facts().len()).collect();
    let hitting = minimal_hitting_sets(&conflicts, &universe);
    Ok(RepairSet::from_index_sets(
        hitting
            .into_iter()
            .map(|h| universe.difference(&h).copied().collect()),
    ))
}

/// Exhaustive enumeration of maximal consistent subsets, for cross-checking.
///
/// Subsets are visited by increasing size; a subset with an inconsistent
/// immediate subset is inconsistent without running the chase.
pub fn brute_force_repairs(kb: &KnowledgeBase) -> Result<RepairSet> {
    let n = kb.facts().len();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::TooManyFacts {
            limit: BRUTE_FORCE_LIMIT,
            found: n,
        });
    }
    let total = 1usize << n;
    let mut masks: Vec<usize> = (0..total).collect();
    masks.sort_by_key(|m| m.count_ones());
    let mut consistent = vec![false; total];
    for mask in masks {
        let downward_ok = (0..n)
            .filter(|b| mask & (1 << b) != 0)
            .all(|b| consistent[mask & !(1 << b)]);
        if downward_ok {
            let indices = mask_to_set(mask, n);
            consistent[mask] = kb.is_consistent_subset(&indices)?;
        }
    }
    let maximal = (0..total).filter(|&mask| {
        consistent[mask] && (0..n).all(|b| mask & (1 << b) != 0 || !consistent[mask | (1 << b)])
    });
    Ok(RepairSet::from_index_sets(
        maximal.map(|mask| mask_to_set(mask, n)),
    ))
}

fn mask_to_set(mask: usize, n: usize) -> BTreeSet<usize> {
    (0..n).filter(|b| mask & (1 << b) != 0).collect()
}
