//! Probabilities of formulas under the independence reading of a CBN.
//!
//! Every cpt row is a *slot*; a selection picks one outcome per slot, and the
//! conditional events of different slots are treated as mutually independent.
//! A complete selection (a ccce) decides every formula, so the probability of
//! a formula is the total probability of the selections that entail it.
//!
//! Two evaluation paths are provided:
//!
//! * the reference path enumerates fccces (or ccces, when the formula
//!   intervenes on an exogenous variable) and checks each one;
//! * the pruned path explores a decision tree that branches only on slots the
//!   formula actually reads. Unread slots are summed out analytically, since
//!   the outcomes of a slot have total probability one.
//!
//! Both give the same exact value; the pruned path is the default.

mod enumerate;
mod slots;

use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::bound::{bind, Bound};
use crate::formula::{merge_same_interventions, push_negations, Formula, FormulaError, Language};
use crate::model::Cbn;
use crate::prob::Probability;
use crate::DEFAULT_CAP;

pub use enumerate::{ccce_count, enumerate_ccces, enumerate_fccces, fccce_count, Ccce, CcceIter, Fccce, FccceIter, Selection};
pub use slots::{ConditionalEvent, Conjunct, SlotKind};

pub(crate) use enumerate::WorldSolver;
pub(crate) use slots::Slots;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error("enumeration cap of {cap} exceeded{}", needed.map(|n| format!(" ({n} needed)")).unwrap_or_default())]
    CapExceeded { cap: u64, needed: Option<u128> },
    #[error("conditioning event `{given}` has probability zero")]
    UndefinedConditional { given: String },
    #[error("the formula reads the mechanism of `{variable}` outside the fixed context")]
    OutsideContext { variable: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalOptions {
    /// Upper bound on enumerated selections (reference path) or decision
    /// tree nodes (pruned path).
    pub cap: u64,
    pub prune: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            cap: DEFAULT_CAP,
            prune: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Fccces,
    Ccces,
    Pruned,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Evaluation {
    pub probability: Probability,
    pub method: Method,
    /// Selections enumerated, or decision tree nodes visited.
    pub visited: u64,
    /// Entailing positive-probability selections (reference path) or
    /// entailing decision tree leaves (pruned path).
    pub entailing: u64,
}

/// Whether the selection entails `f`. An [`Fccce`] cannot decide formulas
/// that read a mechanism outside its context, which happens when `f`
/// intervenes on an exogenous variable.
pub fn entails(selection: &impl Selection, f: &Formula, cbn: &Cbn) -> Result<bool, SemanticsError> {
    f.check(cbn, Language::LPlus)?;
    let bound = bind(f, cbn)?;
    let slots = Slots::new(cbn);
    entails_bound(selection, &bound, cbn, &slots)
}

fn entails_bound(selection: &impl Selection, bound: &Bound, cbn: &Cbn, slots: &Slots) -> Result<bool, SemanticsError> {
    let mut solver = WorldSolver::new(cbn, slots, &bound.worlds);
    let mut choose = |s: usize| {
        selection.choice(s).ok_or_else(|| SemanticsError::OutsideContext {
            variable: match slots.kinds[s] {
                SlotKind::Cpt { var, .. } => cbn.name(var).to_string(),
                SlotKind::Context => "context".to_string(),
            },
        })
    };
    bound.expr.eval(&mut |w, v| solver.value(w, v, &mut choose))
}

pub fn probability(cbn: &Cbn, f: &Formula) -> Result<Probability, SemanticsError> {
    probability_with(cbn, f, &EvalOptions::default())
}

pub fn probability_with(cbn: &Cbn, f: &Formula, options: &EvalOptions) -> Result<Probability, SemanticsError> {
    evaluate(cbn, f, options).map(|e| e.probability)
}

pub fn evaluate(cbn: &Cbn, f: &Formula, options: &EvalOptions) -> Result<Evaluation, SemanticsError> {
    f.check(cbn, Language::LPlus)?;
    let bound = bind(f, cbn)?;
    if options.prune {
        return Pruned::run(cbn, &bound, options.cap);
    }
    let slots = Slots::new(cbn);
    let fixed_context = !bound.intervenes_on_exogenous(cbn);
    let needed = enumerate::positive_count(cbn, fixed_context);
    if needed > options.cap as u128 {
        return Err(SemanticsError::CapExceeded {
            cap: options.cap,
            needed: Some(needed),
        });
    }
    let mut total = BigRational::zero();
    let (mut visited, mut entailing) = (0u64, 0u64);
    let mut tally = |ok: bool, p: Probability| {
        visited += 1;
        if ok {
            entailing += 1;
            total += p.value();
        }
    };
    if fixed_context {
        for (sel, p) in FccceIter::new(cbn, true) {
            tally(entails_bound(&sel, &bound, cbn, &slots)?, p);
        }
    } else {
        for (sel, p) in CcceIter::new(cbn, true) {
            tally(entails_bound(&sel, &bound, cbn, &slots)?, p);
        }
    }
    Ok(Evaluation {
        probability: Probability::exact(total),
        method: if fixed_context { Method::Fccces } else { Method::Ccces },
        visited,
        entailing,
    })
}

/// The positive-probability selections entailing `f`, with their
/// probabilities, for diagnostics. Uses fccces unless `f` intervenes on an
/// exogenous variable.
pub fn entailing_selections(
    cbn: &Cbn,
    f: &Formula,
    cap: u64,
) -> Result<Vec<(Vec<Conjunct>, Probability)>, SemanticsError> {
    f.check(cbn, Language::LPlus)?;
    let bound = bind(f, cbn)?;
    let slots = Slots::new(cbn);
    let fixed_context = !bound.intervenes_on_exogenous(cbn);
    let needed = enumerate::positive_count(cbn, fixed_context);
    if needed > cap as u128 {
        return Err(SemanticsError::CapExceeded { cap, needed: Some(needed) });
    }
    let mut out = Vec::new();
    if fixed_context {
        for (sel, p) in FccceIter::new(cbn, true) {
            if entails_bound(&sel, &bound, cbn, &slots)? {
                out.push((sel.conjuncts(cbn), p));
            }
        }
    } else {
        for (sel, p) in CcceIter::new(cbn, true) {
            if entails_bound(&sel, &bound, cbn, &slots)? {
                out.push((sel.conjuncts(cbn), p));
            }
        }
    }
    Ok(out)
}

/// Decision tree over slots, branching only where the formula reads an
/// undecided slot.
struct Pruned<'a> {
    cbn: &'a Cbn,
    bound: &'a Bound,
    slots: Slots,
    assigned: Vec<Option<usize>>,
    cap: u64,
    visited: u64,
    entailing: u64,
    total: BigRational,
}

struct Need(usize);

impl<'a> Pruned<'a> {
    fn run(cbn: &'a Cbn, bound: &'a Bound, cap: u64) -> Result<Evaluation, SemanticsError> {
        let slots = Slots::new(cbn);
        let mut tree = Pruned {
            cbn,
            bound,
            assigned: vec![None; slots.len()],
            slots,
            cap,
            visited: 0,
            entailing: 0,
            total: BigRational::zero(),
        };
        tree.descend(BigRational::one())?;
        Ok(Evaluation {
            probability: Probability::exact(tree.total),
            method: Method::Pruned,
            visited: tree.visited,
            entailing: tree.entailing,
        })
    }

    fn descend(&mut self, weight: BigRational) -> Result<(), SemanticsError> {
        self.visited += 1;
        if self.visited > self.cap {
            return Err(SemanticsError::CapExceeded {
                cap: self.cap,
                needed: None,
            });
        }
        let outcome = {
            let assigned = &self.assigned;
            let mut solver = WorldSolver::new(self.cbn, &self.slots, &self.bound.worlds);
            let mut choose = |s: usize| assigned[s].ok_or(Need(s));
            self.bound.expr.eval(&mut |w, v| solver.value(w, v, &mut choose))
        };
        match outcome {
            Ok(true) => {
                self.entailing += 1;
                self.total += weight;
            }
            Ok(false) => {}
            Err(Need(slot)) => {
                for option in 0..self.slots.options(self.cbn, slot) {
                    let p = self.slots.weight(self.cbn, slot, option);
                    if p.is_zero() {
                        continue;
                    }
                    let next = &weight * p;
                    self.assigned[slot] = Some(option);
                    let r = self.descend(next);
                    self.assigned[slot] = None;
                    r?;
                }
            }
        }
        Ok(())
    }
}

pub fn conditional_probability(cbn: &Cbn, f: &Formula, given: &Formula) -> Result<Probability, SemanticsError> {
    conditional_probability_with(cbn, f, given, &EvalOptions::default())
}

/// `Pr(f & given) / Pr(given)`, the conjunction normalised with
/// [`push_negations`] and [`merge_same_interventions`] first.
pub fn conditional_probability_with(
    cbn: &Cbn,
    f: &Formula,
    given: &Formula,
    options: &EvalOptions,
) -> Result<Probability, SemanticsError> {
    given.check(cbn, Language::LPlus)?;
    let denominator = probability_with(cbn, given, options)?;
    if denominator.is_zero() {
        return Err(SemanticsError::UndefinedConditional {
            given: given.to_string(),
        });
    }
    let joint = merge_same_interventions(&push_negations(&Formula::and([f.clone(), given.clone()])));
    let numerator = probability_with(cbn, &joint, options)?;
    Ok(Probability::exact(numerator.value() / denominator.value()))
}

/// Sums selection probabilities grouped by their exogenous context, used to
/// cross-check the context marginal in tests.
#[cfg(test)]
pub(crate) fn fccce_mass_by_context(cbn: &Cbn) -> std::collections::BTreeMap<Vec<usize>, BigRational> {
    let slots = Slots::new(cbn);
    let exo = slots.exogenous_slots(cbn);
    let mut out = std::collections::BTreeMap::<Vec<usize>, BigRational>::new();
    for (sel, p) in FccceIter::new(cbn, false) {
        let key: Vec<usize> = exo.iter().map(|&s| sel.choice(s).unwrap()).collect();
        *out.entry(key).or_insert_with(BigRational::zero) += p.value();
    }
    out
}

#[cfg(test)]
mod tests;
