use std::collections::{BTreeMap, HashMap};

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::dataset::Dataset;
use crate::formula::Formula;
use crate::model::{Cbn, VarId};

use super::CounterfactualError;

/// An intervention-free quantity consumed by the observational evaluators.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Factor {
    /// `Pr(V1=v1 & ... & Vk=vk)`.
    Joint(Vec<(VarId, usize)>),
    /// `Pr(V=v | Pa(V)=s)` with `parents` listing the full parent setting.
    Conditional {
        var: VarId,
        value: usize,
        parents: Vec<(VarId, usize)>,
    },
}

impl Factor {
    /// The factor as a formula and an optional conditioning formula. Both
    /// are always simple.
    pub fn to_formulas(&self, cbn: &Cbn) -> (Formula, Option<Formula>) {
        let conj = |a: &[(VarId, usize)]| {
            Formula::and(a.iter().map(|&(v, x)| Formula::event(cbn.name(v), cbn.label(v, x))))
        };
        match self {
            Factor::Joint(a) => (conj(a), None),
            Factor::Conditional { var, value, parents } => (
                Formula::event(cbn.name(*var), cbn.label(*var, *value)),
                (!parents.is_empty()).then(|| conj(parents)),
            ),
        }
    }
}

/// Supplies factor values. `Ok(None)` means the source cannot say anything
/// about that factor, for example because no sample falls into the
/// conditioning cell.
pub trait FactorSource {
    fn value(&mut self, factor: &Factor) -> Result<Option<BigRational>, CounterfactualError>;
}

/// The joint probability of `event`, treating "unknown" as zero mass.
pub(crate) fn joint<S: FactorSource + ?Sized>(
    source: &mut S,
    event: &[(VarId, usize)],
) -> Result<BigRational, CounterfactualError> {
    Ok(source.value(&Factor::Joint(event.to_vec()))?.unwrap_or_else(BigRational::zero))
}

/// `Pr(var=value | parents=parent_values)`.
pub(crate) fn conditional<S: FactorSource + ?Sized>(
    source: &mut S,
    cbn: &Cbn,
    var: VarId,
    value: usize,
    parent_values: &[usize],
) -> Result<Option<BigRational>, CounterfactualError> {
    let parents = cbn.parents(var).iter().copied().zip(parent_values.iter().copied()).collect();
    source.value(&Factor::Conditional { var, value, parents })
}

fn normalized(event: &[(VarId, usize)]) -> Vec<(VarId, usize)> {
    let mut key = event.to_vec();
    key.sort_unstable();
    key.dedup();
    key
}

/// Exact factors computed from the network by chain-rule summation over
/// the ancestral closure of the event.
pub struct ExactFactors<'a> {
    cbn: &'a Cbn,
    cap: u64,
    cache: HashMap<Vec<(VarId, usize)>, BigRational>,
}

impl<'a> ExactFactors<'a> {
    pub fn new(cbn: &'a Cbn, cap: u64) -> Self {
        Self {
            cbn,
            cap,
            cache: HashMap::new(),
        }
    }

    fn compute(&self, event: &[(VarId, usize)]) -> Result<BigRational, CounterfactualError> {
        let cbn = self.cbn;
        let mut fixed: Vec<Option<usize>> = vec![None; cbn.len()];
        for &(v, x) in event {
            if fixed[v.0].is_some_and(|y| y != x) {
                return Ok(BigRational::zero());
            }
            fixed[v.0] = Some(x);
        }
        let closure = cbn.ancestral_closure(event.iter().map(|&(v, _)| v));
        let order: Vec<VarId> = cbn
            .topological_order()
            .iter()
            .copied()
            .filter(|v| closure.contains(v) && !cbn.in_context_table(*v))
            .collect();
        let needed: u128 = order
            .iter()
            .filter(|v| fixed[v.0].is_none())
            .map(|&v| cbn.domain_size(v) as u128)
            .product();
        if needed > self.cap as u128 {
            return Err(CounterfactualError::CapExceeded { cap: self.cap, needed });
        }
        let mut values = vec![0usize; cbn.len()];
        let Some(table) = cbn
            .context_table()
            .filter(|t| t.vars().iter().any(|u| closure.contains(u)))
        else {
            return Ok(self.chain(&order, &fixed, &mut values));
        };
        let mut total = BigRational::zero();
        for (row, p) in table.rows() {
            let consistent = table
                .vars()
                .iter()
                .zip(row)
                .all(|(u, &x)| fixed[u.0].is_none_or(|y| y == x));
            if !consistent || p.is_zero() {
                continue;
            }
            for (u, &x) in table.vars().iter().zip(row) {
                values[u.0] = x;
            }
            total += p * self.chain(&order, &fixed, &mut values);
        }
        Ok(total)
    }

    fn chain(&self, order: &[VarId], fixed: &[Option<usize>], values: &mut [usize]) -> BigRational {
        let Some((&v, rest)) = order.split_first() else {
            return BigRational::one();
        };
        let cpt = self.cbn.cpt(v).expect("variables outside the context table have cpts");
        let pvals: Vec<usize> = self.cbn.parents(v).iter().map(|p| values[p.0]).collect();
        let row = cpt.row(cpt.setting_index(&pvals));
        let mut total = BigRational::zero();
        for (x, p) in row.iter().enumerate() {
            if p.is_zero() || fixed[v.0].is_some_and(|y| y != x) {
                continue;
            }
            values[v.0] = x;
            total += p * self.chain(rest, fixed, values);
        }
        total
    }
}

impl ExactFactors<'_> {
    fn joint(&mut self, event: &[(VarId, usize)]) -> Result<BigRational, CounterfactualError> {
        let key = normalized(event);
        if let Some(p) = self.cache.get(&key) {
            return Ok(p.clone());
        }
        let p = self.compute(&key)?;
        self.cache.insert(key, p.clone());
        Ok(p)
    }
}

impl FactorSource for ExactFactors<'_> {
    /// Conditionals are ratios of two joints. When the parent setting itself
    /// has probability zero the ratio is undefined and the cpt entry, which
    /// is the network's own value for that conditional, is returned instead.
    fn value(&mut self, factor: &Factor) -> Result<Option<BigRational>, CounterfactualError> {
        match factor {
            Factor::Joint(event) => self.joint(event).map(Some),
            Factor::Conditional { var, value, parents } => {
                let den = self.joint(parents)?;
                if den.is_zero() {
                    let pvals: Vec<usize> = parents.iter().map(|&(_, x)| x).collect();
                    return Ok(self.cbn.entry(*var, &pvals, *value).cloned());
                }
                let mut event = parents.clone();
                event.push((*var, *value));
                Ok(Some(self.joint(&event)? / den))
            }
        }
    }
}

/// Relative frequencies in a dataset. Identical rows are merged once, so
/// queries scale with the number of distinct rows.
#[derive(Debug, Clone)]
pub struct EmpiricalFactors<'a> {
    cbn: &'a Cbn,
    columns: Vec<Option<usize>>,
    patterns: Vec<Vec<usize>>,
    weights: Vec<BigRational>,
    total: BigRational,
}

impl<'a> EmpiricalFactors<'a> {
    pub fn new(data: &Dataset, cbn: &'a Cbn) -> Self {
        let mut merged: BTreeMap<&[usize], BigRational> = BTreeMap::new();
        for (i, row) in data.rows().iter().enumerate() {
            *merged.entry(row).or_insert_with(BigRational::zero) += data.weight(i);
        }
        let (patterns, weights): (Vec<Vec<usize>>, Vec<BigRational>) =
            merged.into_iter().map(|(r, w)| (r.to_vec(), w)).unzip();
        Self::from_parts(data, cbn, patterns, weights)
    }

    pub(crate) fn from_parts(data: &Dataset, cbn: &'a Cbn, patterns: Vec<Vec<usize>>, weights: Vec<BigRational>) -> Self {
        let columns = cbn.ids().map(|v| data.column(cbn.name(v))).collect();
        let total = weights.iter().sum();
        Self {
            cbn,
            columns,
            patterns,
            weights,
            total,
        }
    }

    pub(crate) fn patterns(&self) -> &[Vec<usize>] {
        &self.patterns
    }

    pub(crate) fn with_weights(&self, weights: Vec<BigRational>) -> Self {
        let total = weights.iter().sum();
        Self {
            cbn: self.cbn,
            columns: self.columns.clone(),
            patterns: self.patterns.clone(),
            weights,
            total,
        }
    }

    fn resolve(&self, event: &[(VarId, usize)]) -> Result<Vec<(usize, usize)>, CounterfactualError> {
        event
            .iter()
            .map(|&(v, x)| {
                self.columns[v.0]
                    .map(|c| (c, x))
                    .ok_or_else(|| CounterfactualError::MissingColumn {
                        column: self.cbn.name(v).to_string(),
                    })
            })
            .collect()
    }

    fn mass(&self, cells: &[(usize, usize)]) -> BigRational {
        self.patterns
            .iter()
            .zip(&self.weights)
            .filter(|(row, _)| cells.iter().all(|&(c, x)| row[c] == x))
            .map(|(_, w)| w)
            .sum()
    }
}

impl FactorSource for EmpiricalFactors<'_> {
    fn value(&mut self, factor: &Factor) -> Result<Option<BigRational>, CounterfactualError> {
        match factor {
            Factor::Joint(event) => {
                let cells = self.resolve(event)?;
                if self.total.is_zero() {
                    return Ok(Some(BigRational::zero()));
                }
                Ok(Some(self.mass(&cells) / &self.total))
            }
            Factor::Conditional { var, value, parents } => {
                let mut cells = self.resolve(parents)?;
                let den = self.mass(&cells);
                if den.is_zero() {
                    return Ok(None);
                }
                cells.extend(self.resolve(&[(*var, *value)])?);
                Ok(Some(self.mass(&cells) / den))
            }
        }
    }
}

/// Human-readable `Pr(V=v | parents)` used in insufficient-data diagnostics.
pub(crate) fn describe_conditional(cbn: &Cbn, var: VarId, value: usize, parent_values: &[usize]) -> String {
    let given: Vec<String> = cbn
        .parents(var)
        .iter()
        .zip(parent_values)
        .map(|(&p, &x)| format!("{}={}", cbn.name(p), cbn.label(p, x)))
        .collect();
    format!("Pr({}={} | {})", cbn.name(var), cbn.label(var, value), given.join(", "))
}
