//! Existential-rule knowledge bases: terms, atoms, rules, negative
//! constraints, the text format, and forward-chaining reasoning.

mod chase;
mod parser;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub(crate) use chase::{combine_supports, insert_minimal};
pub use chase::{
    entails, find_homomorphisms, ground_closure, is_consistent, saturate, saturate_indexed,
    skolemize_rule, AtomIndex, SaturatedSet, Support, DEFAULT_MAX_ROUNDS,
};
pub use parser::{parse_kb, parse_query};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Term {
    Constant(String),
    Variable(String),
    /// Function term introduced by skolemizing an existential variable.
    Skolem {
        functor: String,
        args: Vec<Term>,
    },
}

impl Term {
    pub fn constant(name: impl Into<String>) -> Self {
        Term::Constant(name.into())
    }

    pub fn var(name: impl Into<String>) -> Self {
        Term::Variable(name.into())
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Constant(_) => true,
            Term::Variable(_) => false,
            Term::Skolem { args, .. } => args.iter().all(Term::is_ground),
        }
    }

    pub fn contains_skolem(&self) -> bool {
        matches!(self, Term::Skolem { .. })
    }

    fn collect_vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Term::Variable(v) => {
                if !out.contains(&v.as_str()) {
                    out.push(v);
                }
            }
            Term::Constant(_) => {}
            Term::Skolem { args, .. } => args.iter().for_each(|t| t.collect_vars(out)),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Constant(name) | Term::Variable(name) => f.write_str(name),
            Term::Skolem { functor, args } => {
                write!(f, "{functor}(")?;
                write_list(f, args)?;
                f.write_str(")")
            }
        }
    }
}

fn write_list<T: fmt::Display>(f: &mut fmt::Formatter<'_>, items: &[T]) -> fmt::Result {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{item}")?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, args: Vec<Term>) -> Self {
        Atom {
            predicate: predicate.into(),
            args,
        }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    pub fn contains_skolem(&self) -> bool {
        self.args.iter().any(Term::contains_skolem)
    }

    /// Variables in order of first occurrence.
    pub fn variables(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.args.iter().for_each(|t| t.collect_vars(&mut out));
        out
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.predicate)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            write_list(f, &self.args)?;
            f.write_str(")")?;
        }
        Ok(())
    }
}

fn variables_of(atoms: &[Atom]) -> Vec<&str> {
    let mut out = Vec::new();
    for atom in atoms {
        atom.args.iter().for_each(|t| t.collect_vars(&mut out));
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rule {
    pub id: String,
    pub body: Vec<Atom>,
    pub head: Vec<Atom>,
    /// Head variables that do not occur in the body.
    pub existential_vars: BTreeSet<String>,
}

impl Rule {
    pub fn new(id: impl Into<String>, body: Vec<Atom>, head: Vec<Atom>) -> Self {
        let body_vars: BTreeSet<&str> = variables_of(&body).into_iter().collect();
        let existential_vars = variables_of(&head)
            .into_iter()
            .filter(|v| !body_vars.contains(v))
            .map(str::to_owned)
            .collect();
        Rule {
            id: id.into(),
            body,
            head,
            existential_vars,
        }
    }

    /// Body variables that also occur in the head, in body order.
    pub fn frontier(&self) -> Vec<&str> {
        let head_vars: BTreeSet<&str> = variables_of(&self.head).into_iter().collect();
        variables_of(&self.body)
            .into_iter()
            .filter(|v| head_vars.contains(v))
            .collect()
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_list(f, &self.head)?;
        f.write_str(" :- ")?;
        write_list(f, &self.body)?;
        f.write_str(".")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NegativeConstraint {
    pub id: String,
    pub body: Vec<Atom>,
}

impl fmt::Display for NegativeConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("! :- ")?;
        write_list(f, &self.body)?;
        f.write_str(".")
    }
}

/// A fact base with its rules and negative constraints.
///
/// Fact positions are the identifiers used by every downstream module.
#[derive(Clone, Debug, PartialEq)]
pub struct KnowledgeBase {
    facts: Vec<Atom>,
    rules: Vec<Rule>,
    constraints: Vec<NegativeConstraint>,
    skolemized: Vec<Rule>,
    max_rounds: usize,
}

impl KnowledgeBase {
    /// Validates groundness and arities. Duplicate facts keep their first position.
    pub fn new(
        facts: Vec<Atom>,
        rules: Vec<Rule>,
        constraints: Vec<NegativeConstraint>,
    ) -> Result<Self> {
        let mut arities = ArityTable::default();
        let mut seen = BTreeSet::new();
        let mut unique = Vec::with_capacity(facts.len());
        for fact in facts {
            if !fact.is_ground() {
                return Err(Error::NonGroundFact {
                    fact: fact.to_string(),
                    line: 0,
                });
            }
            arities.check(&fact, 0)?;
            if seen.insert(fact.clone()) {
                unique.push(fact);
            }
        }
        for rule in &rules {
            for atom in rule.body.iter().chain(&rule.head) {
                arities.check(atom, 0)?;
            }
        }
        for nc in &constraints {
            for atom in &nc.body {
                arities.check(atom, 0)?;
            }
        }
        let skolemized = rules.iter().map(skolemize_rule).collect();
        Ok(KnowledgeBase {
            facts: unique,
            rules,
            constraints,
            skolemized,
            max_rounds: DEFAULT_MAX_ROUNDS,
        })
    }

    /// Sets the chase round cap used whenever this KB is saturated.
    pub fn with_max_rounds(mut self, max_rounds: usize) -> Self {
        self.max_rounds = max_rounds;
        self
    }

    pub fn max_rounds(&self) -> usize {
        self.max_rounds
    }

    /// Saturates the facts at `indices` with supports over KB fact indices.
    pub fn saturate_subset<'a>(
        &'a self,
        indices: impl IntoIterator<Item = &'a usize>,
    ) -> Result<SaturatedSet> {
        saturate_indexed(
            indices.into_iter().map(|&i| (i, &self.facts[i])),
            &self.skolemized,
            self.max_rounds,
        )
    }

    /// Whether the facts at `indices` are consistent with the rules and constraints.
    pub fn is_consistent_subset<'a>(
        &'a self,
        indices: impl IntoIterator<Item = &'a usize>,
    ) -> Result<bool> {
        if self.constraints.is_empty() {
            return Ok(true);
        }
        let index = self.saturate_subset(indices)?.index();
        Ok(!self.constraints.iter().any(|nc| index.has_match(&nc.body)))
    }

    pub fn facts(&self) -> &[Atom] {
        &self.facts
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    /// The rules with every existential variable replaced by a skolem term.
    pub fn skolemized_rules(&self) -> &[Rule] {
        &self.skolemized
    }

    pub fn constraints(&self) -> &[NegativeConstraint] {
        &self.constraints
    }

    /// Predicate arities used anywhere in the KB.
    pub fn signature(&self) -> BTreeMap<&str, usize> {
        let mut out = BTreeMap::new();
        let atoms = self
            .facts
            .iter()
            .chain(self.rules.iter().flat_map(|r| r.body.iter().chain(&r.head)))
            .chain(self.constraints.iter().flat_map(|c| &c.body));
        for atom in atoms {
            out.entry(atom.predicate.as_str()).or_insert(atom.arity());
        }
        out
    }

    /// The atoms at the given fact positions.
    pub fn subset<'a>(&'a self, indices: impl IntoIterator<Item = &'a usize>) -> Vec<Atom> {
        indices
            .into_iter()
            .map(|&i| self.facts[i].clone())
            .collect()
    }
}

impl fmt::Display for KnowledgeBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "@facts")?;
        for fact in &self.facts {
            writeln!(f, "{fact}.")?;
        }
        if !self.rules.is_empty() {
            writeln!(f, "\n@rules")?;
            for rule in &self.rules {
                writeln!(f, "{rule}")?;
            }
        }
        if !self.constraints.is_empty() {
            writeln!(f, "\n@constraints")?;
            for nc in &self.constraints {
                writeln!(f, "{nc}")?;
            }
        }
        Ok(())
    }
}

#[derive(Default)]
pub(crate) struct ArityTable(HashMap<String, usize>);

impl ArityTable {
    pub(crate) fn check(&mut self, atom: &Atom, line: usize) -> Result<()> {
        match self.0.get(&atom.predicate) {
            Some(&expected) if expected != atom.arity() => Err(Error::ArityMismatch {
                predicate: atom.predicate.clone(),
                expected,
                found: atom.arity(),
                line,
            }),
            Some(_) => Ok(()),
            None => {
                self.0.insert(atom.predicate.clone(), atom.arity());
                Ok(())
            }
        }
    }
}

/// A Boolean conjunctive query; every variable is existentially quantified.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    pub atoms: Vec<Atom>,
}

impl Query {
    /// Predicates the KB never mentions, or mentions with another arity.
    pub fn unknown_predicates(&self, kb: &KnowledgeBase) -> Vec<String> {
        let sig = kb.signature();
        self.atoms
            .iter()
            .filter(|a| sig.get(a.predicate.as_str()) != Some(&a.arity()))
            .map(|a| format!("{}/{}", a.predicate, a.arity()))
            .collect()
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_list(f, &self.atoms)
    }
}

/// Variable bindings. Constants are implicitly mapped to themselves.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Substitution(BTreeMap<String, Term>);

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, var: &str) -> Option<&Term> {
        self.0.get(var)
    }

    pub fn insert(&mut self, var: impl Into<String>, term: Term) -> Option<Term> {
        self.0.insert(var.into(), term)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Term)> {
        self.0.iter()
    }

    pub fn apply_term(&self, term: &Term) -> Term {
        match term {
            Term::Variable(v) => self.0.get(v).cloned().unwrap_or_else(|| term.clone()),
            Term::Constant(_) => term.clone(),
            Term::Skolem { functor, args } => Term::Skolem {
                functor: functor.clone(),
                args: args.iter().map(|t| self.apply_term(t)).collect(),
            },
        }
    }

    pub fn apply(&self, atom: &Atom) -> Atom {
        Atom {
            predicate: atom.predicate.clone(),
            args: atom.args.iter().map(|t| self.apply_term(t)).collect(),
        }
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (var, term)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{var}↦{term}")?;
        }
        f.write_str("}")
    }
}

impl FromIterator<(String, Term)> for Substitution {
    fn from_iter<I: IntoIterator<Item = (String, Term)>>(iter: I) -> Self {
        Substitution(iter.into_iter().collect())
    }
}
