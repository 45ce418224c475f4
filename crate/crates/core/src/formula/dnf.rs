//! Canonical mutually exclusive DNF.
//!
//! A formula is first brought into a plain DNF whose atoms are keys
//! `(intervention set, variable) = value`, negative literals expanded over
//! the remaining domain values. The DNF is then made mutually exclusive by
//! completion: term `i` is expanded over every assignment of the keys it does
//! not mention, and completions already covered by an earlier term are
//! dropped. For `(A & B) | (C & D)` over binary variables this gives the four
//! completions of `A & B` followed by the three completions of `C & D` that
//! falsify `A & B`.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use crate::bound::{bind, Assignment, Expr};
use crate::model::{Cbn, InterventionSet, VarId};

use super::{Event, Formula, FormulaError};

/// Default bound on the number of literals the canonical DNF may contain.
pub const DEFAULT_LITERAL_CAP: u64 = 1 << 22;

/// `[set](events)`, the events read as a conjunction.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct InterventionPart {
    pub set: InterventionSet,
    pub events: Vec<Event>,
}

/// A conjunction of a simple part and intervention parts over pairwise
/// distinct intervention sets.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Disjunct {
    pub simple: Vec<Event>,
    pub parts: Vec<InterventionPart>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CanonicalDnf {
    pub disjuncts: Vec<Disjunct>,
}

impl Disjunct {
    pub fn literal_count(&self) -> usize {
        self.simple.len() + self.parts.iter().map(|p| p.events.len()).sum::<usize>()
    }

    /// Conjunction of the simple events and one `Do` per part. The empty
    /// disjunct becomes the empty conjunction, which is true.
    pub fn to_formula(&self) -> Formula {
        let mut conj: Vec<Formula> = self.simple.iter().cloned().map(Formula::Event).collect();
        for part in &self.parts {
            let body = conjunction(part.events.iter().cloned().map(Formula::Event).collect());
            conj.push(Formula::intervene(part.set.clone(), body));
        }
        conjunction(conj)
    }

    fn keyed(&self) -> BTreeMap<(InterventionSet, &str), &str> {
        let mut out = BTreeMap::new();
        for e in &self.simple {
            out.insert((InterventionSet::empty(), e.var.as_str()), e.value.as_str());
        }
        for p in &self.parts {
            for e in &p.events {
                out.insert((p.set.clone(), e.var.as_str()), e.value.as_str());
            }
        }
        out
    }

    /// Literal scan: true when some `(set, variable)` key is assigned
    /// different values in the two disjuncts, which makes them inconsistent.
    pub fn conflicts_with(&self, other: &Disjunct) -> bool {
        let mine = self.keyed();
        other
            .keyed()
            .iter()
            .any(|(k, v)| mine.get(k).is_some_and(|w| w != v))
    }
}

fn conjunction(mut fs: Vec<Formula>) -> Formula {
    if fs.len() == 1 {
        fs.pop().unwrap()
    } else {
        Formula::And(fs)
    }
}

impl fmt::Display for Disjunct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.literal_count() == 0 && self.parts.is_empty() {
            return f.write_str("true");
        }
        write!(f, "{}", self.to_formula())
    }
}

impl CanonicalDnf {
    pub fn len(&self) -> usize {
        self.disjuncts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.disjuncts.is_empty()
    }

    /// The disjunction of all disjuncts; the empty DNF is the empty
    /// disjunction, which is false.
    pub fn to_formula(&self) -> Formula {
        let mut fs: Vec<Formula> = self.disjuncts.iter().map(Disjunct::to_formula).collect();
        if fs.len() == 1 {
            fs.pop().unwrap()
        } else {
            Formula::Or(fs)
        }
    }

    /// Literal scan over every pair of disjuncts.
    pub fn pairwise_exclusive(&self) -> bool {
        let keyed: Vec<_> = self.disjuncts.iter().map(Disjunct::keyed).collect();
        keyed.iter().enumerate().all(|(i, a)| {
            keyed[i + 1..]
                .iter()
                .all(|b| b.iter().any(|(k, v)| a.get(k).is_some_and(|w| w != v)))
        })
    }
}

impl fmt::Display for CanonicalDnf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.disjuncts.is_empty() {
            return f.write_str("false");
        }
        for (i, d) in self.disjuncts.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

/// Index-based disjunct: the simple part, plus one body per non-empty
/// intervention assignment.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub(crate) struct IndexedDisjunct {
    pub simple: BTreeMap<VarId, usize>,
    pub parts: BTreeMap<Assignment, BTreeMap<VarId, usize>>,
}

type Key = (usize, VarId);
type Term = BTreeMap<Key, usize>;

struct Budget {
    cap: u64,
    used: u64,
}

impl Budget {
    fn spend(&mut self, literals: usize) -> Result<(), FormulaError> {
        self.used += literals.max(1) as u64;
        if self.used > self.cap {
            Err(FormulaError::CapExceeded { cap: self.cap })
        } else {
            Ok(())
        }
    }
}

fn dnf(expr: &Expr, negate: bool, cbn: &Cbn, budget: &mut Budget) -> Result<Vec<Term>, FormulaError> {
    match expr {
        Expr::Lit { world, var, value } => {
            let key = (*world, *var);
            if negate {
                Ok((0..cbn.domain_size(*var))
                    .filter(|v| v != value)
                    .map(|v| Term::from([(key, v)]))
                    .collect())
            } else {
                Ok(vec![Term::from([(key, *value)])])
            }
        }
        Expr::Not(e) => dnf(e, !negate, cbn, budget),
        Expr::And(es) | Expr::Or(es) => {
            let conjunctive = matches!(expr, Expr::And(_)) != negate;
            if conjunctive {
                let mut acc = vec![Term::new()];
                for e in es {
                    let rhs = dnf(e, negate, cbn, budget)?;
                    let mut next = Unique::default();
                    for l in &acc {
                        for r in &rhs {
                            let merged = merge_terms(l, r);
                            budget.spend(merged.as_ref().map_or(1, Term::len))?;
                            if let Some(t) = merged {
                                next.push(t);
                            }
                        }
                    }
                    acc = next.terms;
                }
                Ok(acc)
            } else {
                let mut acc = Unique::default();
                for e in es {
                    for t in dnf(e, negate, cbn, budget)? {
                        acc.push(t);
                    }
                }
                Ok(acc.terms)
            }
        }
    }
}

/// Terms in first-seen order, duplicates dropped.
#[derive(Default)]
struct Unique {
    terms: Vec<Term>,
    seen: HashSet<Term>,
}

impl Unique {
    fn push(&mut self, t: Term) {
        if self.seen.insert(t.clone()) {
            self.terms.push(t);
        }
    }
}

fn merge_terms(a: &Term, b: &Term) -> Option<Term> {
    let mut out = a.clone();
    for (k, v) in b {
        match out.insert(*k, *v) {
            Some(old) if old != *v => return None,
            _ => {}
        }
    }
    Some(out)
}

fn covers(term: &Term, completion: &Term) -> bool {
    term.iter().all(|(k, v)| completion.get(k) == Some(v))
}

fn exclusivize(terms: &[Term], cbn: &Cbn, budget: &mut Budget) -> Result<Vec<Term>, FormulaError> {
    let keys: BTreeSet<Key> = terms.iter().flat_map(|t| t.keys().copied()).collect();
    let mut out = Vec::new();
    for (i, term) in terms.iter().enumerate() {
        let free: Vec<Key> = keys.iter().filter(|k| !term.contains_key(k)).copied().collect();
        let radices: Vec<usize> = free.iter().map(|&(_, v)| cbn.domain_size(v)).collect();
        let mut digits = vec![0usize; free.len()];
        'completions: loop {
            let mut completion = term.clone();
            completion.extend(free.iter().copied().zip(digits.iter().copied()));
            budget.spend(completion.len())?;
            if !terms[..i].iter().any(|earlier| covers(earlier, &completion)) {
                out.push(completion);
            }
            // odometer, last key fastest
            let mut pos = digits.len();
            loop {
                if pos == 0 {
                    break 'completions;
                }
                pos -= 1;
                digits[pos] += 1;
                if digits[pos] < radices[pos] {
                    break;
                }
                digits[pos] = 0;
            }
        }
    }
    Ok(out)
}

/// Canonical DNF over indices. Disjuncts are not simplified.
pub(crate) fn canonical_indexed(
    f: &Formula,
    cbn: &Cbn,
    literal_cap: u64,
) -> Result<Vec<IndexedDisjunct>, FormulaError> {
    let bound = bind(f, cbn)?;
    let mut budget = Budget {
        cap: literal_cap,
        used: 0,
    };
    let terms = dnf(&bound.expr, false, cbn, &mut budget)?;
    let exclusive = exclusivize(&terms, cbn, &mut budget)?;
    Ok(exclusive
        .into_iter()
        .map(|t| {
            let mut d = IndexedDisjunct::default();
            for ((world, var), value) in t {
                if world == 0 {
                    d.simple.insert(var, value);
                } else {
                    d.parts
                        .entry(bound.worlds[world].clone())
                        .or_default()
                        .insert(var, value);
                }
            }
            d
        })
        .collect())
}

/// Converts `f` into an equivalent disjunction of pairwise inconsistent
/// disjuncts. Fails with [`FormulaError::CapExceeded`] when the expansion
/// needs more than `literal_cap` literals.
pub fn to_canonical_dnf(f: &Formula, cbn: &Cbn, literal_cap: u64) -> Result<CanonicalDnf, FormulaError> {
    let indexed = canonical_indexed(f, cbn, literal_cap)?;
    Ok(CanonicalDnf {
        disjuncts: indexed.iter().map(|d| d.to_named(cbn)).collect(),
    })
}

/// Removes redundant interventions and pulls non-descendant events out of
/// intervention parts; `None` when the disjunct turns out to be
/// contradictory.
pub fn simplify_disjunct(d: &Disjunct, cbn: &Cbn) -> Result<Option<Disjunct>, FormulaError> {
    Ok(IndexedDisjunct::from_named(d, cbn)?
        .and_then(|indexed| indexed.simplify(cbn))
        .map(|s| s.to_named(cbn)))
}

impl IndexedDisjunct {
    /// Binds a named disjunct; `None` when it assigns one key two values.
    pub(crate) fn from_named(d: &Disjunct, cbn: &Cbn) -> Result<Option<Self>, FormulaError> {
        fn add(cbn: &Cbn, events: &[Event], into: &mut BTreeMap<VarId, usize>) -> Result<bool, FormulaError> {
            for e in events {
                let var = cbn.require(&e.var)?;
                let value = cbn.value_index(var, &e.value)?;
                if into.insert(var, value).is_some_and(|old| old != value) {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        let mut out = IndexedDisjunct::default();
        if !add(cbn, &d.simple, &mut out.simple)? {
            return Ok(None);
        }
        for p in &d.parts {
            let set = cbn.bind_interventions(&p.set)?;
            let into = if set.is_empty() {
                &mut out.simple
            } else {
                out.parts.entry(set).or_default()
            };
            if !add(cbn, &p.events, into)? {
                return Ok(None);
            }
        }
        Ok(Some(out))
    }

    pub(crate) fn to_named(&self, cbn: &Cbn) -> Disjunct {
        let events = |m: &BTreeMap<VarId, usize>| -> Vec<Event> {
            m.iter()
                .map(|(&v, &x)| Event::new(cbn.name(v), cbn.label(v, x)))
                .collect()
        };
        let mut parts: Vec<InterventionPart> = self
            .parts
            .iter()
            .map(|(set, body)| InterventionPart {
                set: InterventionSet::new(set.iter().map(|&(v, x)| (cbn.name(v), cbn.label(v, x))))
                    .expect("bound sets have distinct variables"),
                events: events(body),
            })
            .collect();
        parts.sort_by(|a, b| a.set.cmp(&b.set));
        Disjunct {
            simple: events(&self.simple),
            parts,
        }
    }

    /// Applies the simplification rules until nothing changes.
    pub(crate) fn simplify(&self, cbn: &Cbn) -> Option<IndexedDisjunct> {
        let mut simple = self.simple.clone();
        let mut parts: Vec<(Assignment, BTreeMap<VarId, usize>)> =
            self.parts.iter().map(|(s, b)| (s.clone(), b.clone())).collect();
        loop {
            let mut changed = false;
            let mut next: Vec<(Assignment, BTreeMap<VarId, usize>)> = Vec::with_capacity(parts.len());
            for (mut set, mut body) in parts {
                // Redundant interventions: X<-x with X=x in the simple part,
                // unless X could be changed by the other interventions.
                if let Some(i) = (0..set.len()).find(|&i| {
                    let (x, val) = set[i];
                    simple.get(&x) == Some(&val)
                        && !set.iter().any(|&(z, _)| z != x && cbn.is_descendant(x, z))
                }) {
                    set.remove(i);
                    changed = true;
                }
                // Events on intervened variables are decided by the set.
                let mut keep = BTreeMap::new();
                for (v, x) in body {
                    if let Some(&(_, forced)) = set.iter().find(|&&(z, _)| z == v) {
                        if forced != x {
                            return None;
                        }
                        changed = true;
                        continue;
                    }
                    let affected = set.iter().any(|&(z, _)| cbn.is_descendant(v, z));
                    if !affected {
                        if simple.insert(v, x).is_some_and(|old| old != x) {
                            return None;
                        }
                        changed = true;
                        continue;
                    }
                    keep.insert(v, x);
                }
                body = keep;
                if set.is_empty() {
                    for (v, x) in body {
                        if simple.insert(v, x).is_some_and(|old| old != x) {
                            return None;
                        }
                    }
                    changed = true;
                    continue;
                }
                if body.is_empty() {
                    changed = true;
                    continue;
                }
                match next.iter_mut().find(|(s, _)| *s == set) {
                    Some((_, other)) => {
                        for (v, x) in body {
                            if other.insert(v, x).is_some_and(|old| old != x) {
                                return None;
                            }
                        }
                        changed = true;
                    }
                    None => next.push((set, body)),
                }
            }
            parts = next;
            if !changed {
                break;
            }
        }
        Some(IndexedDisjunct {
            simple,
            parts: parts.into_iter().collect(),
        })
    }
}
