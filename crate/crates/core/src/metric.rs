//! Syntactic distance between repairs.
//!
//! Atoms get a weighted size; two atoms are compared through their least
//! general generalisation (anti-unifier), and two atom sets through the
//! cheapest partial matching of their atoms, with a flat penalty for every
//! atom left unmatched.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::assignment;
use crate::error::{Error, Result};
use crate::kb::{Atom, KnowledgeBase, Term};
use crate::repairs::RepairSet;

/// Weights for atom sizes and the unmatched-atom penalty.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightScheme {
    pub predicate: f64,
    /// Per constant (or skolem term) occurrence.
    pub constant: f64,
    /// Per variable occurrence.
    pub variable: f64,
    /// Cost of leaving one atom unmatched.
    pub unmatched: f64,
}

impl Default for WeightScheme {
    fn default() -> Self {
        WeightScheme {
            predicate: 1.0,
            constant: 1.0,
            variable: 0.0,
            unmatched: 5.0,
        }
    }
}

impl WeightScheme {
    pub fn new(predicate: f64, constant: f64, variable: f64, unmatched: f64) -> Result<Self> {
        let w = WeightScheme {
            predicate,
            constant,
            variable,
            unmatched,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.predicate, self.constant, self.variable, self.unmatched];
        if all.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::InvalidParameter(
                "weights must be finite and nonnegative".into(),
            ));
        }
        if self.constant <= self.variable {
            return Err(Error::InvalidParameter(
                "constant weight must exceed variable weight".into(),
            ));
        }
        if self.unmatched <= 0.0 {
            return Err(Error::InvalidParameter(
                "unmatched-atom penalty must be positive".into(),
            ));
        }
        Ok(())
    }
}

impl std::str::FromStr for WeightScheme {
    type Err = Error;

    /// Parses `p,c,v,λ`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::InvalidParameter(format!("weights: {e}")))?;
        match parts.as_slice() {
            &[p, c, v, l] => WeightScheme::new(p, c, v, l),
            _ => Err(Error::InvalidParameter(
                "weights must be four comma-separated numbers p,c,v,λ".into(),
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Generalisation {
    Atom(Atom),
    /// No common generalisation (different predicates or arities).
    Top,
}

impl Generalisation {
    pub fn size(&self, w: &WeightScheme) -> f64 {
        match self {
            Generalisation::Atom(a) => atom_size(a, w),
            Generalisation::Top => 0.0,
        }
    }
}

impl fmt::Display for Generalisation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generalisation::Atom(a) => write!(f, "{a}"),
            Generalisation::Top => f.write_str("⊤"),
        }
    }
}

pub fn atom_size(a: &Atom, w: &WeightScheme) -> f64 {
    w.predicate
        + a.args
            .iter()
            .map(|t| match t {
                Term::Variable(_) => w.variable,
                Term::Constant(_) | Term::Skolem { .. } => w.constant,
            })
            .sum::<f64>()
}

/// Plotkin anti-unification. Each distinct pair of disagreeing terms becomes
/// one variable, `X0`, `X1`, … in order of first occurrence.
pub fn lgg(a: &Atom, b: &Atom) -> Generalisation {
    if a.predicate != b.predicate || a.arity() != b.arity() {
        return Generalisation::Top;
    }
    let mut pairs: HashMap<(Term, Term), Term> = HashMap::new();
    let args = a
        .args
        .iter()
        .zip(&b.args)
        .map(|(s, t)| anti_unify(s, t, &mut pairs))
        .collect();
    Generalisation::Atom(Atom::new(a.predicate.clone(), args))
}

fn anti_unify(s: &Term, t: &Term, pairs: &mut HashMap<(Term, Term), Term>) -> Term {
    if s == t {
        return s.clone();
    }
    if let (
        Term::Skolem {
            functor: f,
            args: sa,
        },
        Term::Skolem {
            functor: g,
            args: ta,
        },
    ) = (s, t)
    {
        if f == g && sa.len() == ta.len() {
            return Term::Skolem {
                functor: f.clone(),
                args: sa
                    .iter()
                    .zip(ta)
                    .map(|(x, y)| anti_unify(x, y, pairs))
                    .collect(),
            };
        }
    }
    let next = pairs.len();
    pairs
        .entry((s.clone(), t.clone()))
        .or_insert_with(|| Term::var(format!("X{next}")))
        .clone()
}

/// Size of each atom minus the size of their generalisation, summed.
pub fn atom_distance(a: &Atom, b: &Atom, w: &WeightScheme) -> f64 {
    let g = lgg(a, b).size(w);
    (atom_size(a, w) - g) + (atom_size(b, w) - g)
}

/// Cheapest partial matching between two atom sets.
///
/// Solved as a square assignment of size |A|+|B|: pairing costs in the
/// top-left block, the unmatched penalty on the diagonals of the two
/// off-diagonal blocks (forbidden elsewhere), zeros in the dummy block.
pub fn repair_distance(a: &[Atom], b: &[Atom], w: &WeightScheme) -> f64 {
    let (n, m) = (a.len(), b.len());
    let size = n + m;
    if size == 0 {
        return 0.0;
    }
    let forbidden = f64::INFINITY;
    let mut cost = vec![vec![0.0; size]; size];
    for i in 0..n {
        for j in 0..m {
            cost[i][j] = atom_distance(&a[i], &b[j], w);
        }
        for j in 0..n {
            cost[i][m + j] = if i == j { w.unmatched } else { forbidden };
        }
    }
    for i in 0..m {
        for j in 0..m {
            cost[n + i][j] = if i == j { w.unmatched } else { forbidden };
        }
    }
    assignment::solve(&cost).0
}

/// A labelled square matrix of pairwise distances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrix {
    labels: Vec<String>,
    values: Vec<Vec<f64>>,
}

impl DistanceMatrix {
    pub fn new(labels: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self> {
        let n = labels.len();
        if values.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: values.len(),
            });
        }
        if let Some(row) = values.iter().find(|row| row.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: row.len(),
            });
        }
        if values.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidMatrix("entries must be finite".into()));
        }
        Ok(DistanceMatrix { labels, values })
    }

    /// Labels `r0`, `r1`, … for an unlabelled matrix.
    pub fn from_values(values: Vec<Vec<f64>>) -> Result<Self> {
        let labels = (0..values.len()).map(RepairSet::label).collect();
        Self::new(labels, values)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }

    /// Off-diagonal entries with i < j.
    pub fn upper_triangle(&self) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| self.values[i][j])
            .collect()
    }

    /// Checks symmetry and a zero diagonal, as required by the embedding
    /// and clustering steps.
    pub fn validate_symmetric(&self) -> Result<()> {
        let n = self.len();
        for i in 0..n {
            if self.values[i][i].abs() > AXIOM_TOLERANCE {
                return Err(Error::InvalidMatrix(format!(
                    "nonzero diagonal at {}",
                    self.labels[i]
                )));
            }
            for j in 0..i {
                if (self.values[i][j] - self.values[j][i]).abs() > AXIOM_TOLERANCE {
                    return Err(Error::InvalidMatrix(format!(
                        "asymmetric entry ({}, {})",
                        self.labels[i], self.labels[j]
                    )));
                }
                if self.values[i][j] < 0.0 {
                    return Err(Error::InvalidMatrix("negative entry".into()));
                }
            }
        }
        Ok(())
    }

    /// Same matrix with rows and columns reordered: entry (i, j) of the
    /// result is entry (perm[i], perm[j]) of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        DistanceMatrix {
            labels: perm.iter().map(|&p| self.labels[p].clone()).collect(),
            values: perm
                .iter()
                .map(|&p| perm.iter().map(|&q| self.values[p][q]).collect())
                .collect(),
        }
    }

    /// CSV with the labels as header row and first column.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for label in &self.labels {
            out.push(',');
            out.push_str(label);
        }
        out.push('\n');
        for (label, row) in self.labels.iter().zip(&self.values) {
            out.push_str(label);
            for x in row {
                out.push(',');
                out.push_str(&x.to_string());
            }
            out.push('\n');
        }
        out
    }
}

/// Pairwise repair distances, each unordered pair computed once.
pub fn distance_matrix(kb: &KnowledgeBase, rs: &RepairSet, w: &WeightScheme) -> DistanceMatrix {
    let atoms: Vec<Vec<Atom>> = rs.iter().map(|r| r.atoms(kb)).collect();
    let n = atoms.len();
    let mut values = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = repair_distance(&atoms[i], &atoms[j], w);
            values[i][j] = d;
            values[j][i] = d;
        }
    }
    DistanceMatrix {
        labels: rs.labels(),
        values,
    }
}

pub const AXIOM_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricViolation {
    NonzeroDiagonal {
        i: usize,
        value: f64,
    },
    /// Off-diagonal entry that is zero or negative.
    NotPositive {
        i: usize,
        j: usize,
        value: f64,
    },
    Asymmetric {
        i: usize,
        j: usize,
    },
    /// d(i, k) > d(i, j) + d(j, k).
    Triangle {
        i: usize,
        j: usize,
        k: usize,
        excess: f64,
    },
}

/// Lists every violated metric axiom; empty means the matrix is a metric.
pub fn check_metric_axioms(m: &DistanceMatrix) -> Vec<MetricViolation> {
    let n = m.len();
    let d = m.values();
    let mut out = Vec::new();
    for i in 0..n {
        if d[i][i].abs() > AXIOM_TOLERANCE {
            out.push(MetricViolation::NonzeroDiagonal { i, value: d[i][i] });
        }
        for j in 0..n {
            if i == j {
                continue;
            }
            if d[i][j] <= AXIOM_TOLERANCE {
                out.push(MetricViolation::NotPositive {
                    i,
                    j,
                    value: d[i][j],
                });
            }
            if i < j && (d[i][j] - d[j][i]).abs() > AXIOM_TOLERANCE {
                out.push(MetricViolation::Asymmetric { i, j });
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let excess = d[i][k] - (d[i][j] + d[j][k]);
                if excess > AXIOM_TOLERANCE {
                    out.push(MetricViolation::Triangle { i, j, k, excess });
                }
            }
        }
    }
    out
}
