//! Random networks and formulas for property tests, benchmarks and the
//! `check` command.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::seq::IndexedRandom;
use rand::Rng;

use crate::formula::Formula;
use crate::model::{Cbn, CbnSpec, ContextRow, InterventionSet, VarId, VarKind, Variable};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkShape {
    pub min_vars: usize,
    pub max_vars: usize,
    pub max_exogenous: usize,
    pub max_in_degree: usize,
    pub domain_size: usize,
    /// Chance that a cpt row puts all of its mass on one value.
    pub deterministic_rate: f64,
    /// Chance that the exogenous variables share one joint context table
    /// instead of having independent cpts.
    pub context_table_rate: f64,
}

impl Default for NetworkShape {
    fn default() -> Self {
        Self {
            min_vars: 2,
            max_vars: 5,
            max_exogenous: 2,
            max_in_degree: 2,
            domain_size: 2,
            deterministic_rate: 0.1,
            context_table_rate: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FormulaShape {
    pub max_depth: usize,
    pub max_interventions: usize,
    pub max_set_size: usize,
}

impl Default for FormulaShape {
    fn default() -> Self {
        Self {
            max_depth: 3,
            max_interventions: 2,
            max_set_size: 2,
        }
    }
}

fn distribution(rng: &mut impl Rng, size: usize, deterministic_rate: f64) -> Vec<BigRational> {
    let mut weights: Vec<i64> = if rng.random_bool(deterministic_rate) {
        let mut w = vec![0; size];
        w[rng.random_range(0..size)] = 1;
        w
    } else {
        (0..size).map(|_| rng.random_range(1..=6)).collect()
    };
    if weights.iter().all(|&w| w == 0) {
        weights[0] = 1;
    }
    let total: i64 = weights.iter().sum();
    weights
        .into_iter()
        .map(|w| BigRational::new(BigInt::from(w), BigInt::from(total)))
        .collect()
}

/// A random valid network. Exogenous variables `U1, U2, ...` come first and
/// are roots; endogenous `V1, V2, ...` pick up to `max_in_degree` parents
/// among the earlier variables.
pub fn random_cbn(rng: &mut impl Rng, shape: &NetworkShape) -> Cbn {
    let n = rng.random_range(shape.min_vars.max(2)..=shape.max_vars.max(2));
    let exogenous = rng.random_range(1..=shape.max_exogenous.clamp(1, n - 1));
    let labels: Vec<String> = (0..shape.domain_size).map(|i| i.to_string()).collect();
    let label_refs: Vec<&str> = labels.iter().map(String::as_str).collect();
    let names: Vec<String> = (0..n)
        .map(|i| {
            if i < exogenous {
                format!("U{}", i + 1)
            } else {
                format!("V{}", i - exogenous + 1)
            }
        })
        .collect();

    let mut spec = CbnSpec::new();
    for (i, name) in names.iter().enumerate() {
        let kind = if i < exogenous {
            VarKind::Exogenous
        } else {
            VarKind::Endogenous
        };
        spec.add_variable(Variable::new(name, kind, &label_refs));
    }
    let joint = exogenous > 1 && rng.random_bool(shape.context_table_rate);
    if joint {
        let settings = shape.domain_size.pow(exogenous as u32);
        let dist = distribution(rng, settings, shape.deterministic_rate);
        let rows = dist
            .into_iter()
            .enumerate()
            .map(|(mut index, p)| {
                let mut values = BTreeMap::new();
                for name in names[..exogenous].iter().rev() {
                    values.insert(name.clone(), labels[index % shape.domain_size].clone());
                    index /= shape.domain_size;
                }
                ContextRow { values, p }
            })
            .collect();
        spec.set_contexts(rows);
    }
    for (i, name) in names.iter().enumerate() {
        if i < exogenous && joint {
            continue;
        }
        let mut parents: Vec<&str> = Vec::new();
        if i >= exogenous {
            let k = rng.random_range(0..=shape.max_in_degree.min(i));
            let mut pool: Vec<usize> = (0..i).collect();
            for _ in 0..k {
                let j = rng.random_range(0..pool.len());
                parents.push(&names[pool.swap_remove(j)]);
            }
            parents.sort_unstable();
        }
        let settings = shape.domain_size.pow(parents.len() as u32);
        let rows = (0..settings)
            .map(|_| distribution(rng, shape.domain_size, shape.deterministic_rate))
            .collect();
        spec.add_table(name, &parents, rows);
    }
    spec.build().expect("generated networks are valid")
}

/// A random formula of `L` over the endogenous variables of `cbn`, with at
/// most `max_depth` nested connectives and `max_interventions` intervention
/// nodes, none of them nested.
pub fn random_formula(rng: &mut impl Rng, cbn: &Cbn, shape: &FormulaShape) -> Formula {
    let endogenous: Vec<_> = cbn.endogenous().collect();
    assert!(!endogenous.is_empty(), "formulas of L need an endogenous variable");
    let mut budget = shape.max_interventions;
    grow(rng, cbn, &endogenous, shape, shape.max_depth, &mut budget, false)
}

fn grow<R: Rng>(
    rng: &mut R,
    cbn: &Cbn,
    vars: &[VarId],
    shape: &FormulaShape,
    depth: usize,
    budget: &mut usize,
    under_do: bool,
) -> Formula {
    let event = |rng: &mut R| {
        let &v = vars.choose(rng).expect("non-empty");
        Formula::event(cbn.name(v), cbn.label(v, rng.random_range(0..cbn.domain_size(v))))
    };
    if depth == 0 || rng.random_bool(0.25) {
        return event(rng);
    }
    let can_intervene = !under_do && *budget > 0;
    let roll = rng.random_range(0..if can_intervene { 4 } else { 3 });
    match roll {
        0 => Formula::not(grow(rng, cbn, vars, shape, depth - 1, budget, under_do)),
        1 | 2 => {
            let k = rng.random_range(2..=3);
            let children: Vec<Formula> = (0..k)
                .map(|_| grow(rng, cbn, vars, shape, depth - 1, budget, under_do))
                .collect();
            if roll == 1 {
                Formula::and(children)
            } else {
                Formula::or(children)
            }
        }
        _ => {
            *budget -= 1;
            let size = rng.random_range(1..=shape.max_set_size.min(vars.len()).max(1));
            let chosen: Vec<_> = vars.choose_multiple(rng, size).copied().collect();
            let set = InterventionSet::new(
                chosen
                    .iter()
                    .map(|&v| (cbn.name(v), cbn.label(v, rng.random_range(0..cbn.domain_size(v))))),
            )
            .expect("distinct variables");
            let body = grow(rng, cbn, vars, shape, depth - 1, budget, true);
            Formula::intervene(set, body)
        }
    }
}
