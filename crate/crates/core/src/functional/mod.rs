//! Functional causal models obtained from a CBN by response functions.
//!
//! Every endogenous variable `Y` with parents `X1..Xn` gets a response
//! variable whose values are the total functions from parent settings to
//! `R(Y)`. A function is encoded as a mixed-radix integer whose digits are
//! its outputs, setting 0 most significant, so for a binary `Y` with one
//! binary parent the codes 0..4 are the functions `f00, f01, f10, f11`
//! (`f_ij` maps parent value 0 to `i` and 1 to `j`).
//!
//! The measure on extended contexts is the product of the exogenous
//! distribution and, for each response variable, `Pr_Y(f) = prod_s P(Y=f(s) | s)`.
//! Only functions of positive measure are kept.

mod audit;
mod export;
mod sample;

use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::bound::{bind, Bound};
use crate::formula::{Formula, FormulaError, Language};
use crate::model::{Cbn, VarId};
use crate::prob::Probability;

pub use audit::{audit_compatibility, audit_independence, audit_oracle_equivalence, AuditReport};
pub use export::{export_fcm, FCM_FORMAT};
pub use sample::{perfect_dataset, sample};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FunctionalError {
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error("enumeration cap of {cap} exceeded ({needed} needed)")]
    CapExceeded { cap: u64, needed: u128 },
    #[error("conditioning event `{given}` has probability zero")]
    UndefinedConditional { given: String },
}

/// A response function of positive measure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResponseFunction {
    pub code: u64,
    /// Output per parent setting, in mixed-radix setting order.
    pub outputs: Vec<usize>,
    pub probability: BigRational,
}

/// The positive-measure support of one response variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResponseTable {
    pub var: VarId,
    pub settings: usize,
    pub radix: usize,
    pub support: Vec<ResponseFunction>,
}

impl ResponseTable {
    fn build(cbn: &Cbn, var: VarId) -> Self {
        let cpt = cbn.cpt(var).expect("endogenous variables have cpts");
        let radix = cbn.domain_size(var);
        let settings = cpt.num_settings();
        let options: Vec<Vec<usize>> = (0..settings)
            .map(|s| (0..radix).filter(|&y| !cpt.entry(s, y).is_zero()).collect())
            .collect();
        let mut support = Vec::new();
        let mut digits = vec![0usize; settings];
        'outer: loop {
            let outputs: Vec<usize> = digits.iter().enumerate().map(|(s, &d)| options[s][d]).collect();
            let code = outputs.iter().fold(0u64, |acc, &y| acc * radix as u64 + y as u64);
            let probability = outputs
                .iter()
                .enumerate()
                .fold(BigRational::one(), |acc, (s, &y)| acc * cpt.entry(s, y));
            support.push(ResponseFunction {
                code,
                outputs,
                probability,
            });
            for i in (0..settings).rev() {
                digits[i] += 1;
                if digits[i] < options[i].len() {
                    continue 'outer;
                }
                digits[i] = 0;
            }
            break;
        }
        Self {
            var,
            settings,
            radix,
            support,
        }
    }

    /// Output of the function with the given code at a parent setting.
    pub fn output(&self, code: u64, setting: usize) -> usize {
        let shift = (self.radix as u64).pow((self.settings - 1 - setting) as u32);
        ((code / shift) % self.radix as u64) as usize
    }

    /// Size of the full function space `|R(Y)|^settings`.
    pub fn space(&self) -> u128 {
        (self.radix as u128).saturating_pow(self.settings as u32)
    }

    /// `f` followed by the output labels, e.g. `f01`; labels are separated
    /// by commas when any of them is longer than one character.
    pub fn label(&self, cbn: &Cbn, outputs: &[usize]) -> String {
        let labels: Vec<&str> = outputs.iter().map(|&y| cbn.label(self.var, y)).collect();
        if labels.iter().all(|l| l.chars().count() == 1) {
            format!("f{}", labels.concat())
        } else {
            format!("f({})", labels.join(","))
        }
    }
}

/// An assignment to the original exogenous variables together with one
/// response function per endogenous variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExtendedContext {
    /// Values of the exogenous variables, in [`FunctionalModel::exogenous`] order.
    pub exogenous: Vec<usize>,
    /// Function codes, in [`FunctionalModel::endogenous`] order.
    pub functions: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionalModel {
    source: Cbn,
    exogenous: Vec<VarId>,
    endogenous: Vec<VarId>,
    contexts: Vec<(Vec<usize>, BigRational)>,
    tables: Vec<ResponseTable>,
    position: Vec<usize>,
}

/// Builds the response-function model of `cbn`. Fails when the product of
/// the function-space sizes exceeds `cap`.
pub fn compile(cbn: &Cbn, cap: u64) -> Result<FunctionalModel, FunctionalError> {
    FunctionalModel::compile(cbn, cap)
}

impl FunctionalModel {
    pub fn compile(cbn: &Cbn, cap: u64) -> Result<Self, FunctionalError> {
        let exogenous: Vec<VarId> = cbn.exogenous().collect();
        let endogenous: Vec<VarId> = cbn.endogenous().collect();
        let space = endogenous.iter().fold(1u128, |acc, &v| {
            let settings = cbn.cpt(v).expect("endogenous cpt").num_settings() as u32;
            acc.saturating_mul((cbn.domain_size(v) as u128).saturating_pow(settings))
        });
        if space > cap as u128 {
            return Err(FunctionalError::CapExceeded { cap, needed: space });
        }
        let mut position = vec![0; cbn.len()];
        for (i, &v) in exogenous.iter().enumerate() {
            position[v.0] = i;
        }
        for (i, &v) in endogenous.iter().enumerate() {
            position[v.0] = i;
        }
        let tables = endogenous.iter().map(|&v| ResponseTable::build(cbn, v)).collect();
        Ok(Self {
            contexts: exogenous_distribution(cbn, &exogenous, &position),
            source: cbn.clone(),
            exogenous,
            endogenous,
            tables,
            position,
        })
    }

    pub fn source(&self) -> &Cbn {
        &self.source
    }

    pub fn exogenous(&self) -> &[VarId] {
        &self.exogenous
    }

    pub fn endogenous(&self) -> &[VarId] {
        &self.endogenous
    }

    /// Positive-probability assignments to the exogenous variables.
    pub fn contexts(&self) -> &[(Vec<usize>, BigRational)] {
        &self.contexts
    }

    pub fn tables(&self) -> &[ResponseTable] {
        &self.tables
    }

    pub fn table(&self, var: VarId) -> Option<&ResponseTable> {
        (!self.source.is_exogenous(var)).then(|| &self.tables[self.position[var.0]])
    }

    /// Number of extended contexts of positive measure.
    pub fn context_count(&self) -> u128 {
        self.tables
            .iter()
            .fold(self.contexts.len() as u128, |acc, t| acc.saturating_mul(t.support.len() as u128))
    }

    /// `Pr'(ctx)`, computed from the source cpts and exogenous distribution.
    pub fn measure(&self, ctx: &ExtendedContext) -> BigRational {
        let base = self
            .contexts
            .iter()
            .find(|(u, _)| *u == ctx.exogenous)
            .map_or_else(BigRational::zero, |(_, p)| p.clone());
        self.tables.iter().zip(&ctx.functions).fold(base, |acc, (t, &code)| {
            let cpt = self.source.cpt(t.var).expect("endogenous cpt");
            (0..t.settings).fold(acc, |acc, s| acc * cpt.entry(s, t.output(code, s)))
        })
    }

    /// Every positive-measure extended context with its measure.
    pub fn extended_contexts(&self, cap: u64) -> Result<ExtendedContexts<'_>, FunctionalError> {
        let needed = self.context_count();
        if needed > cap as u128 {
            return Err(FunctionalError::CapExceeded { cap, needed });
        }
        let all: Vec<usize> = (0..self.tables.len()).collect();
        Ok(ExtendedContexts::new(self, all))
    }

    /// Values of every variable in the world where `world` is imposed on
    /// `ctx`. Only variables flagged in `wanted` (an ancestrally closed set)
    /// are computed; the others are left at 0.
    fn solve(&self, ctx: &ExtendedContext, world: &[(VarId, usize)], wanted: &[bool]) -> Vec<usize> {
        let cbn = &self.source;
        let mut values = vec![0; cbn.len()];
        for &v in cbn.topological_order() {
            if !wanted[v.0] {
                continue;
            }
            values[v.0] = if let Some(&(_, x)) = world.iter().find(|(w, _)| *w == v) {
                x
            } else if cbn.is_exogenous(v) {
                ctx.exogenous[self.position[v.0]]
            } else {
                let parent_values: Vec<usize> = cbn.parents(v).iter().map(|p| values[p.0]).collect();
                let setting = cbn.cpt(v).expect("endogenous cpt").setting_index(&parent_values);
                self.tables[self.position[v.0]].output(ctx.functions[self.position[v.0]], setting)
            };
        }
        values
    }

    fn holds(&self, ctx: &ExtendedContext, bound: &Bound, wanted: &[bool]) -> bool {
        let worlds: Vec<Vec<usize>> = bound.worlds.iter().map(|w| self.solve(ctx, w, wanted)).collect();
        bound
            .expr
            .eval(&mut |w, v| Ok::<_, std::convert::Infallible>(worlds[w][v.0]))
            .unwrap_or_else(|never| match never {})
    }

    /// Row of values of the unintervened world, in declaration order.
    pub fn solve_actual(&self, ctx: &ExtendedContext) -> Vec<usize> {
        self.solve(ctx, &[], &vec![true; self.source.len()])
    }
}

fn exogenous_distribution(cbn: &Cbn, exogenous: &[VarId], position: &[usize]) -> Vec<(Vec<usize>, BigRational)> {
    let mut acc: Vec<(Vec<usize>, BigRational)> = vec![(vec![0; exogenous.len()], BigRational::one())];
    if let Some(table) = cbn.context_table() {
        let mut next = Vec::new();
        for (values, p) in &acc {
            for (row, q) in table.rows() {
                if q.is_zero() {
                    continue;
                }
                let mut values = values.clone();
                for (&u, &x) in table.vars().iter().zip(row) {
                    values[position[u.0]] = x;
                }
                next.push((values, p * q));
            }
        }
        acc = next;
    }
    for &u in exogenous {
        let Some(cpt) = cbn.cpt(u) else { continue };
        let mut next = Vec::new();
        for (values, p) in &acc {
            for (x, q) in cpt.row(0).iter().enumerate() {
                if q.is_zero() {
                    continue;
                }
                let mut values = values.clone();
                values[position[u.0]] = x;
                next.push((values, p * q));
            }
        }
        acc = next;
    }
    acc
}

/// Odometer over contexts and the supports of selected response tables.
pub struct ExtendedContexts<'a> {
    fm: &'a FunctionalModel,
    tables: Vec<usize>,
    context: usize,
    digits: Vec<usize>,
    done: bool,
}

impl<'a> ExtendedContexts<'a> {
    fn new(fm: &'a FunctionalModel, tables: Vec<usize>) -> Self {
        Self {
            done: fm.contexts.is_empty(),
            digits: vec![0; tables.len()],
            fm,
            tables,
            context: 0,
        }
    }
}

impl Iterator for ExtendedContexts<'_> {
    type Item = (ExtendedContext, Probability);

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let (u, pu) = &self.fm.contexts[self.context];
        let mut functions = vec![0u64; self.fm.tables.len()];
        let mut p = pu.clone();
        for (&t, &d) in self.tables.iter().zip(&self.digits) {
            let f = &self.fm.tables[t].support[d];
            functions[t] = f.code;
            p *= &f.probability;
        }
        let item = (
            ExtendedContext {
                exogenous: u.clone(),
                functions,
            },
            Probability::exact(p),
        );
        let mut advanced = false;
        for i in (0..self.digits.len()).rev() {
            self.digits[i] += 1;
            if self.digits[i] < self.fm.tables[self.tables[i]].support.len() {
                advanced = true;
                break;
            }
            self.digits[i] = 0;
        }
        if !advanced {
            self.context += 1;
            self.done = self.context == self.fm.contexts.len();
        }
        Some(item)
    }
}

/// Whether `ctx` satisfies `f` (language `L+`): every intervention set is
/// solved from `ctx`, interventions on exogenous variables overriding the
/// context.
pub fn satisfies(fm: &FunctionalModel, ctx: &ExtendedContext, f: &Formula) -> Result<bool, FunctionalError> {
    f.check(&fm.source, Language::LPlus)?;
    let bound = bind(f, &fm.source)?;
    Ok(fm.holds(ctx, &bound, &vec![true; fm.source.len()]))
}

/// `Pr'({ctx : ctx satisfies f})` by exhaustive enumeration. Response
/// variables of non-ancestors of the formula's variables are summed out,
/// since their measures total one and they cannot affect the truth of `f`.
pub fn oracle_probability(fm: &FunctionalModel, f: &Formula, cap: u64) -> Result<Probability, FunctionalError> {
    f.check(&fm.source, Language::LPlus)?;
    let bound = bind(f, &fm.source)?;
    let cbn = &fm.source;
    let mentioned = bound
        .mentioned()
        .into_iter()
        .flatten()
        .chain(bound.worlds.iter().flatten().map(|&(v, _)| v));
    let closure = cbn.ancestral_closure(mentioned);
    let mut wanted = vec![false; cbn.len()];
    for v in &closure {
        wanted[v.0] = true;
    }
    let tables: Vec<usize> = (0..fm.tables.len())
        .filter(|&t| wanted[fm.tables[t].var.0])
        .collect();
    let needed = tables
        .iter()
        .fold(fm.contexts.len() as u128, |acc, &t| acc.saturating_mul(fm.tables[t].support.len() as u128));
    if needed > cap as u128 {
        return Err(FunctionalError::CapExceeded { cap, needed });
    }
    let mut total = BigRational::zero();
    for (ctx, p) in ExtendedContexts::new(fm, tables) {
        if fm.holds(&ctx, &bound, &wanted) {
            total += p.value();
        }
    }
    Ok(Probability::exact(total))
}

/// Ratio of two oracle sums.
pub fn oracle_conditional(
    fm: &FunctionalModel,
    f: &Formula,
    given: &Formula,
    cap: u64,
) -> Result<Probability, FunctionalError> {
    let denominator = oracle_probability(fm, given, cap)?;
    if denominator.is_zero() {
        return Err(FunctionalError::UndefinedConditional {
            given: given.to_string(),
        });
    }
    let numerator = oracle_probability(fm, &Formula::and([f.clone(), given.clone()]), cap)?;
    Ok(Probability::exact(numerator.value() / denominator.value()))
}
