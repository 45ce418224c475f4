//! Exact probabilities for interventional and counterfactual formulas over
//! causal Bayesian networks, under the assumption that the conditional events
//! of every cpt are mutually independent.
//!
//! The crate is organised around five modules:
//!
//! * [`model`]: networks, validation, topological order and interventions.
//! * [`formula`]: the formula language, its parser, and the canonical
//!   mutually exclusive DNF used by the observational evaluator.
//! * [`semantics`]: conditional events, ccces/fccces, entailment, and the
//!   probability of a formula.
//! * [`functional`]: compilation to a functional causal model with response
//!   function variables, an exhaustive oracle, audits and a sampler.
//! * [`counterfactual`]: closed forms for PN/PS/PNS, evaluation of arbitrary
//!   formulas from observational quantities, and estimation from data.

pub mod counterfactual;
pub mod dataset;
pub mod fixtures;
pub mod formula;
pub mod functional;
pub mod generate;
pub mod model;
pub mod prob;
pub mod semantics;

mod bound;

pub use counterfactual::{CounterfactualError, CounterfactualQuery, QueryKind, Target};
pub use dataset::Dataset;
pub use formula::{parse, Formula, Language};
pub use functional::FunctionalModel;
pub use model::{Cbn, CbnSpec, InterventionSet, ModelError, VarId, VarKind, Variable};
pub use prob::Probability;
pub use semantics::{probability, EvalOptions, SemanticsError};

/// Default bound on the number of selections, contexts or disjuncts any
/// exhaustive enumeration may visit.
pub const DEFAULT_CAP: u64 = 1 << 24;
