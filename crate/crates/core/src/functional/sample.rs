use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::prob::rational_to_f64;

use super::{ExtendedContext, FunctionalError, FunctionalModel};

/// Cumulative distribution over indices, for inverse-transform draws.
struct Categorical {
    cumulative: Vec<f64>,
}

impl Categorical {
    fn new<'a>(weights: impl IntoIterator<Item = &'a BigRational>) -> Self {
        let mut acc = 0.0;
        let cumulative = weights
            .into_iter()
            .map(|w| {
                acc += rational_to_f64(w);
                acc
            })
            .collect();
        Self { cumulative }
    }

    fn draw(&self, rng: &mut impl Rng) -> usize {
        let total = *self.cumulative.last().expect("non-empty distribution");
        let u = rng.random::<f64>() * total;
        self.cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.cumulative.len() - 1)
    }
}

struct Sampler<'a> {
    fm: &'a FunctionalModel,
    contexts: Categorical,
    /// Per endogenous variable, one distribution per parent setting.
    rows: Vec<Vec<Categorical>>,
}

impl<'a> Sampler<'a> {
    fn new(fm: &'a FunctionalModel) -> Self {
        let rows = fm
            .tables
            .iter()
            .map(|t| {
                let cpt = fm.source.cpt(t.var).expect("endogenous cpt");
                cpt.rows().iter().map(Categorical::new).collect()
            })
            .collect();
        Self {
            fm,
            contexts: Categorical::new(fm.contexts.iter().map(|(_, p)| p)),
            rows,
        }
    }

    /// Row `index` of the stream for `seed`. Each row has its own ChaCha
    /// stream, so rows can be drawn in any order or in parallel.
    fn row(&self, seed: u64, index: u64) -> Vec<usize> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        let u = self.contexts.draw(&mut rng);
        let functions = self
            .fm
            .tables
            .iter()
            .zip(&self.rows)
            .map(|(t, dists)| {
                // a full response function: one independent output per setting
                dists
                    .iter()
                    .fold(0u64, |code, d| code * t.radix as u64 + d.draw(&mut rng) as u64)
            })
            .collect();
        let ctx = ExtendedContext {
            exogenous: self.fm.contexts[u].0.clone(),
            functions,
        };
        self.fm.solve_actual(&ctx)
    }
}

/// Draws `n` i.i.d. rows from `Pr'` and records every variable of the
/// unintervened solution. Deterministic in `seed`.
pub fn sample(fm: &FunctionalModel, n: usize, seed: u64) -> Dataset {
    let sampler = Sampler::new(fm);
    let rows: Vec<Vec<usize>> = (0..n as u64)
        .into_par_iter()
        .map(|i| sampler.row(seed, i))
        .collect();
    let mut data = Dataset::for_model(&fm.source);
    for row in rows {
        data.push(row);
    }
    data
}

/// Every positive-measure extended context, solved and weighted by its
/// measure; identical rows are merged.
pub fn perfect_dataset(fm: &FunctionalModel, cap: u64) -> Result<Dataset, FunctionalError> {
    let mut merged: BTreeMap<Vec<usize>, BigRational> = BTreeMap::new();
    for (ctx, p) in fm.extended_contexts(cap)? {
        *merged.entry(fm.solve_actual(&ctx)).or_insert_with(BigRational::zero) += p.value();
    }
    let mut data = Dataset::for_model(&fm.source);
    for (row, w) in merged {
        data.push_weighted(row, w);
    }
    Ok(data)
}
