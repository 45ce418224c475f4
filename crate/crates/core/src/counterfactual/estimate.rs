use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dataset::{Dataset, DatasetError};
use crate::model::Cbn;
use crate::prob::rational_to_f64;
use crate::DEFAULT_CAP;

use super::expansion::evaluate_target;
use super::factors::EmpiricalFactors;
use super::{CounterfactualError, Target};

pub const DEFAULT_REPLICATES: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EstimateOptions {
    /// Bootstrap replicates; zero disables the standard error.
    pub replicates: usize,
    pub seed: u64,
    pub cap: u64,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self {
            replicates: DEFAULT_REPLICATES,
            seed: 0,
            cap: DEFAULT_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    /// Plug-in value, exact in the observed frequencies.
    pub value: BigRational,
    /// Standard deviation of the bootstrap replicates. `Some(0.0)` for a
    /// weighted dataset, which is treated as a whole population. `None`
    /// when fewer than two replicates produced a value.
    pub stderr: Option<f64>,
    /// Replicates that produced a value.
    pub replicates: usize,
    pub n_terms: u64,
    pub skipped_terms: u64,
    pub insufficient: Vec<String>,
}

impl Estimate {
    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.value)
    }
}

/// Estimates `target` by replacing every factor of its observational
/// expansion with a relative frequency in `data`. Only the graph and the
/// domains of `cbn` are used, never its probabilities.
///
/// The standard error comes from a nonparametric bootstrap: each replicate
/// resamples `data.len()` rows with replacement and recomputes the plug-in
/// value. A replicate whose conditioning event ends up empty is dropped.
pub fn estimate_observational(
    data: &Dataset,
    cbn: &Cbn,
    target: &Target,
    options: &EstimateOptions,
) -> Result<Estimate, CounterfactualError> {
    if data.is_empty() {
        return Err(DatasetError::Empty.into());
    }
    let base = EmpiricalFactors::new(data, cbn);
    let point = evaluate_target(cbn, &mut base.clone(), target, options.cap)?;
    let mut estimate = Estimate {
        value: point.value,
        stderr: None,
        replicates: 0,
        n_terms: point.n_terms,
        skipped_terms: point.skipped_terms,
        insufficient: point.insufficient,
    };
    if data.is_weighted() {
        estimate.stderr = Some(0.0);
        return Ok(estimate);
    }
    if options.replicates == 0 {
        return Ok(estimate);
    }

    let pattern_of: Vec<usize> = data
        .rows()
        .iter()
        .map(|row| {
            base.patterns()
                .binary_search(row)
                .expect("every row is one of the merged patterns")
        })
        .collect();
    let n = data.len();
    let values: Vec<f64> = (0..options.replicates as u64)
        .into_par_iter()
        .filter_map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
            rng.set_stream(r);
            let mut counts = vec![0u64; base.patterns().len()];
            for _ in 0..n {
                counts[pattern_of[rng.random_range(0..n)]] += 1;
            }
            let weights = counts.into_iter().map(|c| BigRational::from(BigInt::from(c))).collect();
            let mut replicate = base.with_weights(weights);
            evaluate_target(cbn, &mut replicate, target, options.cap)
                .ok()
                .map(|e| rational_to_f64(&e.value))
        })
        .collect();
    estimate.replicates = values.len();
    if values.len() >= 2 {
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (values.len() - 1) as f64;
        estimate.stderr = Some(var.sqrt());
    }
    Ok(estimate)
}
