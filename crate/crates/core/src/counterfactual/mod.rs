//! Counterfactual quantities computed from observational probabilities only.
//!
//! Every value produced here is a sum of products of two kinds of
//! intervention-free factors (see [`Factor`]): joint probabilities of
//! assignments and conditional probabilities of a variable given all of its
//! parents. A [`FactorSource`] supplies them, either exactly from a network
//! ([`ExactFactors`]) or as frequencies from a dataset ([`EmpiricalFactors`]).
//!
//! * [`pn_exact`], [`ps_exact`] and [`pns_exact`] are the closed forms for a
//!   cause `X` and a child effect `Y`, summing over the settings of the other
//!   parents of `Y`.
//! * [`evaluate_observational`] handles any formula of `L⁺`: it builds the
//!   canonical exclusive DNF, simplifies each disjunct, and expands every
//!   intervention part over the post-intervention values of the descendants
//!   of the intervened variables.
//! * [`estimate_observational`] plugs empirical frequencies into the same
//!   expansions and attaches a bootstrap standard error.

mod closed_form;
mod estimate;
mod expansion;
mod factors;

#[cfg(test)]
mod tests;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::dataset::DatasetError;
use crate::formula::{Formula, FormulaError};
use crate::model::{Cbn, InterventionSet, ModelError, VarId};

pub use closed_form::{
    closed_form, parent_setting_sum, pn_exact, pns_exact, ps_exact, ParentSettingSum, SettingTerm, TermFactor,
};
pub use estimate::{estimate_observational, Estimate, EstimateOptions, DEFAULT_REPLICATES};
pub use expansion::{evaluate_observational, evaluate_observational_with, evaluate_target, Expansion};
pub use factors::{EmpiricalFactors, ExactFactors, Factor, FactorSource};

#[derive(Debug, Error)]
pub enum CounterfactualError {
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("`{variable}` must be binary")]
    NotBinary { variable: String },
    #[error("`{effect}` is not a child of `{cause}`")]
    NotChild { cause: String, effect: String },
    #[error("`{mediator}` is a parent of `{effect}` and a descendant of `{cause}`")]
    MediatedParent {
        cause: String,
        effect: String,
        mediator: String,
    },
    #[error("conditioning event `{given}` has probability zero")]
    UndefinedConditional { given: String },
    #[error("enumeration cap of {cap} exceeded ({needed} needed)")]
    CapExceeded { cap: u64, needed: u128 },
    #[error("the dataset has no column `{column}`, which the expansion needs")]
    MissingColumn { column: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QueryKind {
    /// Probability of necessity, `Pr([X<-0](Y=0) | X=1 & Y=1)`.
    Pn,
    /// Probability of sufficiency, `Pr([X<-1](Y=1) | X=0 & Y=0)`.
    Ps,
    /// Probability of necessity and sufficiency,
    /// `Pr([X<-1](Y=1) & [X<-0](Y=0))`.
    Pns,
}

impl fmt::Display for QueryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QueryKind::Pn => "PN",
            QueryKind::Ps => "PS",
            QueryKind::Pns => "PNS",
        })
    }
}

impl FromStr for QueryKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "pn" => Ok(QueryKind::Pn),
            "ps" => Ok(QueryKind::Ps),
            "pns" => Ok(QueryKind::Pns),
            other => Err(format!("unknown query kind `{other}` (expected pn, ps or pns)")),
        }
    }
}

/// A PN, PS or PNS query for binary `cause` and `effect`. Value index 1 of
/// each domain plays the role of "true".
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CounterfactualQuery {
    pub kind: QueryKind,
    pub cause: VarId,
    pub effect: VarId,
}

impl CounterfactualQuery {
    /// Resolves the names and checks that both variables are binary. The
    /// structural requirements of the closed forms are checked separately by
    /// [`CounterfactualQuery::check_closed_form`], so that a query whose
    /// effect is not a child of its cause can still be answered through its
    /// defining formulas.
    pub fn new(cbn: &Cbn, kind: QueryKind, cause: &str, effect: &str) -> Result<Self, CounterfactualError> {
        let cause = cbn.require(cause)?;
        let effect = cbn.require(effect)?;
        for v in [cause, effect] {
            if cbn.domain_size(v) != 2 {
                return Err(CounterfactualError::NotBinary {
                    variable: cbn.name(v).to_string(),
                });
            }
        }
        Ok(Self { kind, cause, effect })
    }

    /// The effect must be a child of the cause, and no other parent of the
    /// effect may be a descendant of the cause.
    pub fn check_closed_form(&self, cbn: &Cbn) -> Result<(), CounterfactualError> {
        let (x, y) = (self.cause, self.effect);
        if !cbn.parents(y).contains(&x) {
            return Err(CounterfactualError::NotChild {
                cause: cbn.name(x).to_string(),
                effect: cbn.name(y).to_string(),
            });
        }
        if let Some(&w) = cbn.parents(y).iter().find(|&&w| w != x && cbn.is_descendant(w, x)) {
            // the intervened world would read a changed value of `w`, which
            // the sum over actual parent settings cannot represent
            return Err(CounterfactualError::MediatedParent {
                cause: cbn.name(x).to_string(),
                effect: cbn.name(y).to_string(),
                mediator: cbn.name(w).to_string(),
            });
        }
        Ok(())
    }

    fn event(cbn: &Cbn, v: VarId, value: usize) -> Formula {
        Formula::event(cbn.name(v), cbn.label(v, value))
    }

    fn counterfactual(&self, cbn: &Cbn, x: usize, y: usize) -> Formula {
        let set = InterventionSet::new([(cbn.name(self.cause), cbn.label(self.cause, x))])
            .expect("single assignment");
        Formula::intervene(set, Self::event(cbn, self.effect, y))
    }

    fn factual(&self, cbn: &Cbn, x: usize, y: usize) -> Formula {
        Formula::and([Self::event(cbn, self.cause, x), Self::event(cbn, self.effect, y)])
    }

    /// The formula whose (conditional) probability defines the query.
    pub fn target(&self, cbn: &Cbn) -> Formula {
        match self.kind {
            QueryKind::Pn => self.counterfactual(cbn, 0, 0),
            QueryKind::Ps => self.counterfactual(cbn, 1, 1),
            QueryKind::Pns => Formula::and([self.counterfactual(cbn, 1, 1), self.counterfactual(cbn, 0, 0)]),
        }
    }

    /// The conditioning event of the definition, if any.
    pub fn condition(&self, cbn: &Cbn) -> Option<Formula> {
        match self.kind {
            QueryKind::Pn => Some(self.factual(cbn, 1, 1)),
            QueryKind::Ps => Some(self.factual(cbn, 0, 0)),
            QueryKind::Pns => None,
        }
    }

    pub fn describe(&self, cbn: &Cbn) -> String {
        format!("{}({} -> {})", self.kind, cbn.name(self.cause), cbn.name(self.effect))
    }
}

/// What to evaluate or estimate.
#[derive(Debug, Clone)]
pub enum Target {
    Formula(Formula),
    Conditional { target: Formula, given: Formula },
    /// A query answered by its closed form.
    Query(CounterfactualQuery),
}
