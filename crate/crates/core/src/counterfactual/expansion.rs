use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_rational::BigRational;
use num_traits::Zero;

use crate::formula::{canonical_indexed, Formula, DEFAULT_LITERAL_CAP};
use crate::model::{Cbn, VarId};
use crate::prob::Probability;
use crate::DEFAULT_CAP;

use super::closed_form::closed_form;
use super::factors::{conditional, describe_conditional, joint, ExactFactors, FactorSource};
use super::{CounterfactualError, Target};

/// The value of an observational expansion together with its bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct Expansion {
    pub value: BigRational,
    /// Products that contributed to the sum.
    pub n_terms: u64,
    /// Setting combinations rejected because an intervened world would
    /// have read the same cpt row as another world with a different result.
    pub skipped_terms: u64,
    /// Factors the source could not supply; the terms needing them are
    /// left out of `value`.
    pub insufficient: Vec<String>,
}

impl Expansion {
    pub(crate) fn empty() -> Self {
        Self {
            value: BigRational::zero(),
            n_terms: 0,
            skipped_terms: 0,
            insufficient: Vec::new(),
        }
    }

    pub(crate) fn absorb(&mut self, other: Expansion) {
        self.n_terms += other.n_terms;
        self.skipped_terms += other.skipped_terms;
        for d in other.insufficient {
            if !self.insufficient.contains(&d) {
                self.insufficient.push(d);
            }
        }
    }

    pub fn is_complete(&self) -> bool {
        self.insufficient.is_empty()
    }
}

/// `Pr(f)` from observational quantities of `cbn` alone. Agrees exactly with
/// [`crate::semantics::probability`].
pub fn evaluate_observational(cbn: &Cbn, f: &Formula) -> Result<Probability, CounterfactualError> {
    let e = evaluate_observational_with(cbn, f, DEFAULT_CAP)?;
    Ok(Probability::exact(e.value))
}

pub fn evaluate_observational_with(cbn: &Cbn, f: &Formula, cap: u64) -> Result<Expansion, CounterfactualError> {
    expand(cbn, &mut ExactFactors::new(cbn, cap), f, cap)
}

/// Evaluates any [`Target`] against a factor source.
pub fn evaluate_target<S: FactorSource + ?Sized>(
    cbn: &Cbn,
    source: &mut S,
    target: &Target,
    cap: u64,
) -> Result<Expansion, CounterfactualError> {
    match target {
        Target::Formula(f) => expand(cbn, source, f, cap),
        Target::Conditional { target, given } => {
            let den = expand(cbn, source, given, cap)?;
            if den.value.is_zero() {
                return Err(CounterfactualError::UndefinedConditional {
                    given: given.to_string(),
                });
            }
            let mut num = expand(cbn, source, &Formula::and([target.clone(), given.clone()]), cap)?;
            num.value /= &den.value;
            num.absorb(den);
            Ok(num)
        }
        Target::Query(q) => closed_form(cbn, source, q, cap),
    }
}

/// Sums the expansion of every simplified disjunct of the canonical DNF.
pub(crate) fn expand<S: FactorSource + ?Sized>(
    cbn: &Cbn,
    source: &mut S,
    f: &Formula,
    cap: u64,
) -> Result<Expansion, CounterfactualError> {
    let mut total = Expansion::empty();
    for d in canonical_indexed(f, cbn, DEFAULT_LITERAL_CAP)? {
        let Some(d) = d.simplify(cbn) else { continue };
        let plan = Plan::new(cbn, d.simple, d.parts.into_iter().collect());
        let e = plan.run(source, cap)?;
        total.value += &e.value;
        total.absorb(e);
    }
    Ok(total)
}

/// An intervention set and the body events read in its world.
type PartSpec = (Vec<(VarId, usize)>, BTreeMap<VarId, usize>);

struct Part {
    set: Vec<(VarId, usize)>,
    body: BTreeMap<VarId, usize>,
    /// Descendants of the intervened variables that can influence the body,
    /// in topological order. Their values differ between worlds.
    moved: Vec<VarId>,
}

/// The expansion of one disjunct `simple & [S1](B1) & ... & [Sr](Br)`.
///
/// The actual world is summarized by the values of `frozen`: the simple
/// part, every moved variable and its parents, and body variables that no
/// intervention reaches. Each setting of `frozen` contributes its joint
/// probability times one cpt conditional for every cpt row that only an
/// intervened world reads.
struct Plan<'a> {
    cbn: &'a Cbn,
    simple: BTreeMap<VarId, usize>,
    parts: Vec<Part>,
    frozen: Vec<VarId>,
}

#[derive(Default)]
struct Run {
    value: BigRational,
    n_terms: u64,
    skipped_terms: u64,
    insufficient: BTreeSet<String>,
}

impl<'a> Plan<'a> {
    fn new(cbn: &'a Cbn, simple: BTreeMap<VarId, usize>, parts: Vec<PartSpec>) -> Self {
        let mut frozen: BTreeSet<VarId> = simple.keys().copied().collect();
        let parts: Vec<Part> = parts
            .into_iter()
            .map(|(set, body)| {
                let moved: Vec<VarId> = cbn
                    .topological_order()
                    .iter()
                    .copied()
                    .filter(|&v| {
                        set.iter().all(|&(z, _)| z != v)
                            && set.iter().any(|&(z, _)| cbn.is_descendant(v, z))
                            && body.keys().any(|&b| b == v || cbn.is_descendant(b, v))
                    })
                    .collect();
                for &v in &moved {
                    frozen.insert(v);
                    frozen.extend(cbn.parents(v).iter().copied());
                }
                for &b in body.keys() {
                    if !moved.contains(&b) && set.iter().all(|&(z, _)| z != b) {
                        frozen.insert(b);
                    }
                }
                Part { set, body, moved }
            })
            .collect();
        Self {
            cbn,
            simple,
            parts,
            frozen: frozen.into_iter().collect(),
        }
    }

    fn run<S: FactorSource + ?Sized>(&self, source: &mut S, cap: u64) -> Result<Expansion, CounterfactualError> {
        let cbn = self.cbn;
        let free: Vec<VarId> = self.frozen.iter().copied().filter(|v| !self.simple.contains_key(v)).collect();
        let needed: u128 = free.iter().map(|&v| cbn.domain_size(v) as u128).product();
        if needed > cap as u128 {
            return Err(CounterfactualError::CapExceeded { cap, needed });
        }
        let mut actual: Vec<Option<usize>> = vec![None; cbn.len()];
        for (&v, &x) in &self.simple {
            actual[v.0] = Some(x);
        }
        let mut run = Run::default();
        let mut digits = vec![0usize; free.len()];
        loop {
            for (&v, &x) in free.iter().zip(&digits) {
                actual[v.0] = Some(x);
            }
            self.actual_term(source, &actual, &mut run)?;
            // odometer over the free frozen variables
            let mut i = 0;
            while i < free.len() {
                digits[i] += 1;
                if digits[i] < cbn.domain_size(free[i]) {
                    break;
                }
                digits[i] = 0;
                i += 1;
            }
            if i == free.len() {
                break;
            }
        }
        Ok(Expansion {
            value: run.value,
            n_terms: run.n_terms,
            skipped_terms: run.skipped_terms,
            insufficient: run.insufficient.into_iter().collect(),
        })
    }

    fn actual_term<S: FactorSource + ?Sized>(
        &self,
        source: &mut S,
        actual: &[Option<usize>],
        run: &mut Run,
    ) -> Result<(), CounterfactualError> {
        let event: Vec<(VarId, usize)> = self
            .frozen
            .iter()
            .map(|&v| (v, actual[v.0].expect("frozen variables are assigned")))
            .collect();
        let weight = joint(source, &event)?;
        if weight.is_zero() {
            return Ok(());
        }
        // cpt rows the actual world reads, as far as the moved variables go
        let mut rows: HashMap<(VarId, usize), usize> = HashMap::new();
        for part in &self.parts {
            for &v in &part.moved {
                rows.insert((v, self.setting(v, |p| actual[p.0])), actual[v.0].expect("frozen"));
            }
        }
        let mut world = vec![None; self.cbn.len()];
        self.descend(source, 0, 0, actual, &mut world, &mut rows, weight, run)
    }

    fn setting(&self, v: VarId, value_of: impl Fn(VarId) -> Option<usize>) -> usize {
        let pvals: Vec<usize> = self
            .cbn
            .parents(v)
            .iter()
            .map(|&p| value_of(p).expect("parent value known"))
            .collect();
        self.cbn.cpt(v).expect("moved variables have cpts").setting_index(&pvals)
    }

    /// Value of `v` in the world of `part`, for variables that are not moved.
    fn fixed_value(&self, part: &Part, v: VarId, actual: &[Option<usize>]) -> Option<usize> {
        part.set
            .iter()
            .find(|&&(z, _)| z == v)
            .map(|&(_, x)| x)
            .or(actual[v.0])
    }

    #[allow(clippy::too_many_arguments)]
    fn descend<S: FactorSource + ?Sized>(
        &self,
        source: &mut S,
        part_index: usize,
        k: usize,
        actual: &[Option<usize>],
        world: &mut Vec<Option<usize>>,
        rows: &mut HashMap<(VarId, usize), usize>,
        acc: BigRational,
        run: &mut Run,
    ) -> Result<(), CounterfactualError> {
        let Some(part) = self.parts.get(part_index) else {
            run.value += acc;
            run.n_terms += 1;
            return Ok(());
        };
        let Some(&v) = part.moved.get(k) else {
            let body_holds = part
                .body
                .iter()
                .filter(|(b, _)| !part.moved.contains(b))
                .all(|(&b, &y)| self.fixed_value(part, b, actual) == Some(y));
            if !body_holds {
                return Ok(());
            }
            let mut next = vec![None; self.cbn.len()];
            return self.descend(source, part_index + 1, 0, actual, &mut next, rows, acc, run);
        };
        let pvals: Vec<usize> = self
            .cbn
            .parents(v)
            .iter()
            .map(|&p| world[p.0].or_else(|| self.fixed_value(part, p, actual)).expect("parent value known"))
            .collect();
        let setting = self.cbn.cpt(v).expect("moved variables have cpts").setting_index(&pvals);
        let required = part.body.get(&v).copied();
        for x in 0..self.cbn.domain_size(v) {
            if required.is_some_and(|y| y != x) {
                continue;
            }
            world[v.0] = Some(x);
            match rows.get(&(v, setting)) {
                Some(&y) if y != x => run.skipped_terms += 1,
                Some(_) => self.descend(source, part_index, k + 1, actual, world, rows, acc.clone(), run)?,
                None => match conditional(source, self.cbn, v, x, &pvals)? {
                    None => {
                        run.insufficient.insert(describe_conditional(self.cbn, v, x, &pvals));
                    }
                    Some(p) if p.is_zero() => {}
                    Some(p) => {
                        rows.insert((v, setting), x);
                        self.descend(source, part_index, k + 1, actual, world, rows, &acc * p, run)?;
                        rows.remove(&(v, setting));
                    }
                },
            }
        }
        world[v.0] = None;
        Ok(())
    }
}
