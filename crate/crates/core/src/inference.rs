//! Inconsistency-tolerant query answering restricted to a set of repairs.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::clustering::Partition;
use crate::error::{Error, Result};
use crate::kb::{entails, Atom, KnowledgeBase, Query};
use crate::repairs::RepairSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Semantics {
    /// The query holds in the closure of every repair.
    AR,
    /// The query holds in the closure of the intersection of the repairs.
    IAR,
    /// The query holds in the intersection of the repairs' closures.
    ICR,
}

impl Semantics {
    pub const ALL: [Semantics; 3] = [Semantics::AR, Semantics::IAR, Semantics::ICR];
}

impl fmt::Display for Semantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Semantics::AR => "AR",
            Semantics::IAR => "IAR",
            Semantics::ICR => "ICR",
        })
    }
}

impl FromStr for Semantics {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "AR" => Ok(Semantics::AR),
            "IAR" => Ok(Semantics::IAR),
            "ICR" => Ok(Semantics::ICR),
            other => Err(Error::InvalidParameter(format!(
                "unknown semantics `{other}` (expected AR, IAR or ICR)"
            ))),
        }
    }
}

/// A nonempty set of repair positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scope(BTreeSet<usize>);

impl Scope {
    pub fn new(indices: impl IntoIterator<Item = usize>, rs: &RepairSet) -> Result<Self> {
        let set: BTreeSet<usize> = indices.into_iter().collect();
        if set.is_empty() {
            return Err(Error::EmptyScope);
        }
        if let Some(&bad) = set.iter().find(|&&i| i >= rs.len()) {
            return Err(Error::UnknownRepair(RepairSet::label(bad)));
        }
        Ok(Scope(set))
    }

    pub fn all(rs: &RepairSet) -> Result<Self> {
        Self::new(0..rs.len(), rs)
    }

    pub fn from_labels<S: AsRef<str>>(labels: &[S], rs: &RepairSet) -> Result<Self> {
        let indices = labels
            .iter()
            .map(|l| rs.position(l.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(indices, rs)
    }

    pub fn indices(&self) -> &BTreeSet<usize> {
        &self.0
    }
}

fn closures<'a>(
    kb: &KnowledgeBase,
    rs: &'a RepairSet,
    scope: &Scope,
) -> Result<Vec<&'a BTreeSet<Atom>>> {
    scope
        .0
        .iter()
        .map(|&i| rs.repairs()[i].ground_closure(kb))
        .collect()
}

/// Intersection of the ground closures of the scoped repairs.
pub fn ics_core(kb: &KnowledgeBase, rs: &RepairSet, scope: &Scope) -> Result<BTreeSet<Atom>> {
    let closures = closures(kb, rs, scope)?;
    let (first, rest) = closures.split_first().ok_or(Error::EmptyScope)?;
    Ok(first
        .iter()
        .filter(|a| rest.iter().all(|c| c.contains(*a)))
        .cloned()
        .collect())
}

/// Ground closure of the facts shared by every scoped repair.
fn iar_base(kb: &KnowledgeBase, rs: &RepairSet, scope: &Scope) -> Result<BTreeSet<Atom>> {
    let mut iter = scope.0.iter().map(|&i| rs.repairs()[i].fact_indices());
    let first = iter.next().ok_or(Error::EmptyScope)?.clone();
    let common: BTreeSet<usize> = iter.fold(first, |acc, s| acc.intersection(s).copied().collect());
    Ok(kb.saturate_subset(&common)?.ground_atoms())
}

pub fn entails_scoped(
    kb: &KnowledgeBase,
    rs: &RepairSet,
    scope: &Scope,
    sem: Semantics,
    q: &Query,
) -> Result<bool> {
    match sem {
        Semantics::AR => {
            for c in closures(kb, rs, scope)? {
                if !entails(c, q) {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Semantics::IAR => Ok(entails(&iar_base(kb, rs, scope)?, q)),
        Semantics::ICR => Ok(entails(&ics_core(kb, rs, scope)?, q)),
    }
}

/// Answers of one query on every block of a partition.
#[derive(Clone, Debug, PartialEq)]
pub struct DifResult {
    pub partition: Partition,
    pub answers: Vec<bool>,
    pub semantics: Semantics,
    pub query: Query,
}

pub fn dif_answer(
    kb: &KnowledgeBase,
    rs: &RepairSet,
    partition: &Partition,
    sem: Semantics,
    q: &Query,
) -> Result<DifResult> {
    if partition.element_count() != rs.len() {
        return Err(Error::DimensionMismatch {
            expected: rs.len(),
            found: partition.element_count(),
        });
    }
    let answers = partition
        .blocks()
        .iter()
        .map(|block| entails_scoped(kb, rs, &Scope::new(block.iter().copied(), rs)?, sem, q))
        .collect::<Result<Vec<_>>>()?;
    Ok(DifResult {
        partition: partition.clone(),
        answers,
        semantics: sem,
        query: q.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::{parse_kb, parse_query};
    use crate::repairs::compute_repairs;

    fn setup() -> (KnowledgeBase, RepairSet) {
        let kb = parse_kb(include_str!("../../../data/babies.kb")).unwrap();
        let rs = compute_repairs(&kb).unwrap();
        (kb, rs)
    }

    fn q(text: &str) -> Query {
        parse_query(text).unwrap()
    }

    fn atom(text: &str) -> Atom {
        q(text).atoms.remove(0)
    }

    #[test]
    fn full_scope_answers() {
        let (kb, rs) = setup();
        let all = Scope::all(&rs).unwrap();
        assert!(entails_scoped(&kb, &rs, &all, Semantics::AR, &q("baby(X)")).unwrap());
        assert!(!entails_scoped(&kb, &rs, &all, Semantics::AR, &q("baby(X), get_ill(X)")).unwrap());
        assert!(entails_scoped(&kb, &rs, &all, Semantics::ICR, &q("baby(m)")).unwrap());
        assert!(!entails_scoped(&kb, &rs, &all, Semantics::ICR, &q("get_ill(X)")).unwrap());
    }

    #[test]
    fn empty_scope_is_rejected() {
        let (_, rs) = setup();
        assert_eq!(Scope::new([], &rs).unwrap_err(), Error::EmptyScope);
        assert_eq!(
            Scope::new([9], &rs).unwrap_err(),
            Error::UnknownRepair("r9".into())
        );
    }

    #[test]
    fn consensus_of_all_repairs() {
        let (kb, rs) = setup();
        let core = ics_core(&kb, &rs, &Scope::all(&rs).unwrap()).unwrap();
        assert!(core.contains(&atom("baby(m)")) && core.contains(&atom("baby(j)")));
        assert!(!core.iter().any(|a| a.predicate == "get_ill"));
    }

    #[test]
    fn consensus_of_the_sibling_destination_pair() {
        let (kb, rs) = setup();
        // canonical r0 = both at day care, r2 = Milo with the nanny, both with siblings(m, j)
        let scope = Scope::new([0, 2], &rs).unwrap();
        let core = ics_core(&kb, &rs, &scope).unwrap();
        assert!(core.contains(&atom("siblings(j, m)")));
        assert!(core.contains(&atom("siblings(m, j)")));
        assert!(!core.iter().any(|a| a.predicate == "happy"));
        let r0 = rs.repairs()[0].ground_closure(&kb).unwrap();
        assert!(r0.contains(&atom("happy(j)")));
    }

    #[test]
    fn singleton_scope_is_the_closure() {
        let (kb, rs) = setup();
        for i in 0..rs.len() {
            let scope = Scope::new([i], &rs).unwrap();
            assert_eq!(
                &ics_core(&kb, &rs, &scope).unwrap(),
                rs.repairs()[i].ground_closure(&kb).unwrap()
            );
        }
    }

    #[test]
    fn dif_vector_over_three_clusters() {
        let (kb, rs) = setup();
        let p = Partition::new(vec![vec![0, 2], vec![1, 3, 4], vec![5]]).unwrap();
        let res = dif_answer(&kb, &rs, &p, Semantics::AR, &q("baby(X), get_ill(X)")).unwrap();
        assert_eq!(res.answers, vec![true, true, false]);
        // ICR on the three-repair block has no common get_ill atom
        let icr = dif_answer(&kb, &rs, &p, Semantics::ICR, &q("baby(X), get_ill(X)")).unwrap();
        assert_eq!(icr.answers, vec![true, false, false]);
    }

    #[test]
    fn fact_in_every_repair_is_entailed_everywhere() {
        let (kb, rs) = setup();
        for p in [
            Partition::single_block(6),
            Partition::singletons(6),
            Partition::new(vec![vec![0, 2], vec![1, 3, 4], vec![5]]).unwrap(),
        ] {
            for sem in Semantics::ALL {
                let res = dif_answer(&kb, &rs, &p, sem, &q("baby(m)")).unwrap();
                assert!(res.answers.iter().all(|&a| a));
            }
        }
    }

    #[test]
    fn single_block_equals_plain_answer() {
        let (kb, rs) = setup();
        let query = q("baby(X), get_ill(X)");
        let res = dif_answer(&kb, &rs, &Partition::single_block(6), Semantics::AR, &query).unwrap();
        let plain =
            entails_scoped(&kb, &rs, &Scope::all(&rs).unwrap(), Semantics::AR, &query).unwrap();
        assert_eq!(res.answers, vec![plain]);
    }

    #[test]
    fn semantics_parse() {
        assert_eq!("ar".parse::<Semantics>().unwrap(), Semantics::AR);
        assert_eq!("ICR".parse::<Semantics>().unwrap(), Semantics::ICR);
        assert!("brave".parse::<Semantics>().is_err());
    }
}
