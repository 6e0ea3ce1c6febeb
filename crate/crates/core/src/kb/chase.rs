//! Homomorphism search and the skolem chase with minimal-support provenance.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{Atom, NegativeConstraint, Query, Rule, Substitution, Term};
use crate::error::{Error, Result};

pub const DEFAULT_MAX_ROUNDS: usize = 64;

/// A set of fact indices from which an atom is derivable.
pub type Support = BTreeSet<usize>;

/// Ground atoms in a fixed order, indexed by predicate.
#[derive(Clone, Debug, Default)]
pub struct AtomIndex {
    atoms: Vec<Atom>,
    by_predicate: HashMap<(String, usize), Vec<usize>>,
}

impl AtomIndex {
    pub fn new(atoms: Vec<Atom>) -> Self {
        let mut by_predicate: HashMap<(String, usize), Vec<usize>> = HashMap::new();
        for (i, atom) in atoms.iter().enumerate() {
            by_predicate
                .entry((atom.predicate.clone(), atom.arity()))
                .or_default()
                .push(i);
        }
        AtomIndex {
            atoms,
            by_predicate,
        }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Every homomorphism from `pattern` into the indexed atoms, together with
    /// the positions of the atoms each pattern atom was mapped to.
    ///
    /// Results are ordered lexicographically by those positions.
    pub fn matches(&self, pattern: &[Atom]) -> Vec<(Substitution, Vec<usize>)> {
        let mut out = Vec::new();
        let mut chosen = Vec::with_capacity(pattern.len());
        self.search(pattern, Substitution::new(), &mut chosen, &mut out);
        out
    }

    pub fn homomorphisms(&self, pattern: &[Atom]) -> Vec<Substitution> {
        self.matches(pattern).into_iter().map(|(s, _)| s).collect()
    }

    pub fn has_match(&self, pattern: &[Atom]) -> bool {
        let mut chosen = Vec::with_capacity(pattern.len());
        self.exists(pattern, Substitution::new(), &mut chosen)
    }

    fn candidates(&self, atom: &Atom) -> &[usize] {
        self.by_predicate
            .get(&(atom.predicate.clone(), atom.arity()))
            .map_or(&[], Vec::as_slice)
    }

    fn search(
        &self,
        pattern: &[Atom],
        subst: Substitution,
        chosen: &mut Vec<usize>,
        out: &mut Vec<(Substitution, Vec<usize>)>,
    ) {
        let Some((first, rest)) = pattern.split_first() else {
            out.push((subst, chosen.clone()));
            return;
        };
        for &i in self.candidates(first) {
            let mut next = subst.clone();
            if match_atom(first, &self.atoms[i], &mut next) {
                chosen.push(i);
                self.search(rest, next, chosen, out);
                chosen.pop();
            }
        }
    }

    fn exists(&self, pattern: &[Atom], subst: Substitution, chosen: &mut Vec<usize>) -> bool {
        let Some((first, rest)) = pattern.split_first() else {
            return true;
        };
        for &i in self.candidates(first) {
            let mut next = subst.clone();
            if match_atom(first, &self.atoms[i], &mut next) {
                chosen.push(i);
                let found = self.exists(rest, next, chosen);
                chosen.pop();
                if found {
                    return true;
                }
            }
        }
        false
    }
}

impl<'a> FromIterator<&'a Atom> for AtomIndex {
    fn from_iter<I: IntoIterator<Item = &'a Atom>>(iter: I) -> Self {
        AtomIndex::new(iter.into_iter().cloned().collect())
    }
}

fn match_atom(pattern: &Atom, target: &Atom, subst: &mut Substitution) -> bool {
    pattern.predicate == target.predicate
        && pattern.args.len() == target.args.len()
        && pattern
            .args
            .iter()
            .zip(&target.args)
            .all(|(p, t)| match_term(p, t, subst))
}

fn match_term(pattern: &Term, target: &Term, subst: &mut Substitution) -> bool {
    match pattern {
        Term::Variable(v) => match subst.get(v) {
            Some(bound) => bound == target,
            None => {
                subst.insert(v.clone(), target.clone());
                true
            }
        },
        Term::Constant(_) => pattern == target,
        Term::Skolem { functor, args } => match target {
            Term::Skolem {
                functor: tf,
                args: targs,
            } if tf == functor && targs.len() == args.len() => {
                args.iter().zip(targs).all(|(p, t)| match_term(p, t, subst))
            }
            _ => false,
        },
    }
}

/// All substitutions mapping `pattern` into `target`, in lexicographic order
/// of the matched target positions.
pub fn find_homomorphisms(pattern: &[Atom], target: &[Atom]) -> Vec<Substitution> {
    AtomIndex::new(target.to_vec()).homomorphisms(pattern)
}

/// Replaces each existential head variable by a skolem term over the frontier.
///
/// The functor `sk_<rule id>_<variable>` is unique per rule and variable.
pub fn skolemize_rule(rule: &Rule) -> Rule {
    if rule.existential_vars.is_empty() {
        return rule.clone();
    }
    let frontier: Vec<Term> = rule.frontier().into_iter().map(Term::var).collect();
    let subst: Substitution = rule
        .existential_vars
        .iter()
        .map(|z| {
            (
                z.clone(),
                Term::Skolem {
                    functor: format!("sk_{}_{}", rule.id, z),
                    args: frontier.clone(),
                },
            )
        })
        .collect();
    Rule {
        id: rule.id.clone(),
        body: rule.body.clone(),
        head: rule.head.iter().map(|a| subst.apply(a)).collect(),
        existential_vars: BTreeSet::new(),
    }
}

/// The result of saturating a fact set: derived atoms and, for each, its
/// inclusion-minimal supports.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SaturatedSet {
    provenance: BTreeMap<Atom, Vec<Support>>,
}

impl SaturatedSet {
    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        self.provenance.keys()
    }

    pub fn atom_set(&self) -> BTreeSet<Atom> {
        self.provenance.keys().cloned().collect()
    }

    pub fn contains(&self, atom: &Atom) -> bool {
        self.provenance.contains_key(atom)
    }

    pub fn len(&self) -> usize {
        self.provenance.len()
    }

    pub fn is_empty(&self) -> bool {
        self.provenance.is_empty()
    }

    /// Minimal supports of `atom`; empty if the atom was not derived.
    pub fn supports(&self, atom: &Atom) -> &[Support] {
        self.provenance.get(atom).map_or(&[], Vec::as_slice)
    }

    pub fn provenance(&self) -> &BTreeMap<Atom, Vec<Support>> {
        &self.provenance
    }

    /// Atoms without skolem terms.
    pub fn ground_atoms(&self) -> BTreeSet<Atom> {
        self.provenance
            .keys()
            .filter(|a| !a.contains_skolem())
            .cloned()
            .collect()
    }

    pub fn index(&self) -> AtomIndex {
        self.atoms().collect()
    }
}

/// Adds `support` to an antichain of supports. Returns false if an existing
/// support is already a subset of it.
pub(crate) fn insert_minimal(family: &mut Vec<Support>, support: Support) -> bool {
    if family.iter().any(|s| s.is_subset(&support)) {
        return false;
    }
    family.retain(|s| !support.is_subset(s));
    family.push(support);
    family.sort();
    true
}

/// Unions one support per input family in every combination, keeping only
/// the minimal results.
pub(crate) fn combine_supports(families: &[&[Support]]) -> Vec<Support> {
    let mut acc: Vec<Support> = vec![Support::new()];
    for family in families {
        let mut next = Vec::new();
        for partial in &acc {
            for s in *family {
                insert_minimal(&mut next, partial.union(s).copied().collect());
            }
        }
        acc = next;
    }
    acc
}

/// Saturates facts identified by their position in `facts`.
pub fn saturate(facts: &[Atom], rules: &[Rule], max_rounds: usize) -> Result<SaturatedSet> {
    saturate_indexed(facts.iter().enumerate(), rules, max_rounds)
}

/// Saturates facts carrying caller-chosen identifiers (typically KB fact indices).
///
/// Rules must already be skolemized. Each round applies every rule to the
/// atoms present at the start of the round; the chase stops once a round adds
/// no atom and no new minimal support.
pub fn saturate_indexed<'a>(
    facts: impl IntoIterator<Item = (usize, &'a Atom)>,
    rules: &[Rule],
    max_rounds: usize,
) -> Result<SaturatedSet> {
    if max_rounds == 0 {
        return Err(Error::InvalidParameter(
            "max_rounds must be positive".into(),
        ));
    }
    let mut provenance: BTreeMap<Atom, Vec<Support>> = BTreeMap::new();
    for (i, fact) in facts {
        insert_minimal(
            provenance.entry(fact.clone()).or_default(),
            Support::from([i]),
        );
    }
    if rules.is_empty() {
        return Ok(SaturatedSet { provenance });
    }

    for _ in 0..max_rounds {
        let index = AtomIndex::new(provenance.keys().cloned().collect());
        let mut additions: Vec<(Atom, Vec<Support>)> = Vec::new();
        for rule in rules {
            for (subst, matched) in index.matches(&rule.body) {
                let families: Vec<&[Support]> = matched
                    .iter()
                    .map(|&i| provenance[&index.atoms()[i]].as_slice())
                    .collect();
                let supports = combine_supports(&families);
                for head in &rule.head {
                    additions.push((subst.apply(head), supports.clone()));
                }
            }
        }
        let mut changed = false;
        for (atom, supports) in additions {
            let family = provenance.entry(atom).or_default();
            for s in supports {
                changed |= insert_minimal(family, s);
            }
        }
        if !changed {
            return Ok(SaturatedSet { provenance });
        }
    }
    Err(Error::RoundCapExceeded { max_rounds })
}

/// The saturation restricted to atoms that contain no skolem term.
pub fn ground_closure(facts: &[Atom], rules: &[Rule], max_rounds: usize) -> Result<BTreeSet<Atom>> {
    Ok(saturate(facts, rules, max_rounds)?.ground_atoms())
}

/// True iff no constraint body maps into the saturation of `facts`.
pub fn is_consistent(
    facts: &[Atom],
    rules: &[Rule],
    constraints: &[NegativeConstraint],
    max_rounds: usize,
) -> Result<bool> {
    if constraints.is_empty() {
        return Ok(true);
    }
    let index = saturate(facts, rules, max_rounds)?.index();
    Ok(!constraints.iter().any(|nc| index.has_match(&nc.body)))
}

/// True iff the query maps homomorphically into `atoms`.
pub fn entails<'a>(atoms: impl IntoIterator<Item = &'a Atom>, query: &Query) -> bool {
    atoms
        .into_iter()
        .collect::<AtomIndex>()
        .has_match(&query.atoms)
}
