use num_rational::BigRational;
use num_traits::Zero;

use crate::model::{Cbn, VarId};
use crate::prob::Probability;
use crate::DEFAULT_CAP;

use super::expansion::Expansion;
use super::factors::{conditional, describe_conditional, joint, ExactFactors, FactorSource};
use super::{CounterfactualError, CounterfactualQuery, QueryKind};

/// How one parent setting's conditional factor came out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TermFactor {
    /// The setting has weight zero, so the factor was not needed.
    Unneeded,
    Value(BigRational),
    /// The source could not supply the factor; the term is left out.
    Missing(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SettingTerm {
    /// Values of `ParentSettingSum::parents`, in that order.
    pub setting: Vec<usize>,
    /// `Pr(parents = setting | observed cause and effect)`.
    pub weight: BigRational,
    /// `Pr(effect = target | cause = intervened value, parents = setting)`.
    pub factor: TermFactor,
}

/// The sum over every setting of the parents of the effect other than the
/// cause.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParentSettingSum {
    pub parents: Vec<VarId>,
    pub terms: Vec<SettingTerm>,
}

impl ParentSettingSum {
    pub fn total(&self) -> BigRational {
        self.terms
            .iter()
            .filter_map(|t| match &t.factor {
                TermFactor::Value(f) => Some(&t.weight * f),
                _ => None,
            })
            .sum()
    }

    fn into_expansion(self) -> Expansion {
        let mut e = Expansion::empty();
        e.value = self.total();
        for t in self.terms {
            match t.factor {
                TermFactor::Value(_) => e.n_terms += 1,
                TermFactor::Unneeded => e.skipped_terms += 1,
                TermFactor::Missing(d) => e.insufficient.push(d),
            }
        }
        e
    }
}

/// PN or PS as a [`ParentSettingSum`]. For PS the weights condition on
/// `X=0 & Y=0` and the factors are `Pr(Y=1 | X=1, others)`; PN mirrors it
/// with the values flipped. Fails for PNS, which is not a single sum.
pub fn parent_setting_sum<S: FactorSource + ?Sized>(
    cbn: &Cbn,
    source: &mut S,
    query: &CounterfactualQuery,
    cap: u64,
) -> Result<ParentSettingSum, CounterfactualError> {
    query.check_closed_form(cbn)?;
    let (observed, intervened) = match query.kind {
        QueryKind::Ps => (0, 1),
        QueryKind::Pn => (1, 0),
        QueryKind::Pns => panic!("PNS combines two parent-setting sums"),
    };
    let (x, y) = (query.cause, query.effect);
    let condition = [(x, observed), (y, observed)];
    let den = joint(source, &condition)?;
    if den.is_zero() {
        return Err(CounterfactualError::UndefinedConditional {
            given: format!(
                "{}={} & {}={}",
                cbn.name(x),
                cbn.label(x, observed),
                cbn.name(y),
                cbn.label(y, observed)
            ),
        });
    }
    let parents: Vec<VarId> = cbn.parents(y).iter().copied().filter(|&p| p != x).collect();
    let needed: u128 = parents.iter().map(|&p| cbn.domain_size(p) as u128).product();
    if needed > cap as u128 {
        return Err(CounterfactualError::CapExceeded { cap, needed });
    }
    let mut terms = Vec::with_capacity(needed as usize);
    let mut setting = vec![0usize; parents.len()];
    loop {
        let mut event = condition.to_vec();
        event.extend(parents.iter().copied().zip(setting.iter().copied()));
        let weight = joint(source, &event)? / &den;
        let factor = if weight.is_zero() {
            TermFactor::Unneeded
        } else {
            let pvals: Vec<usize> = cbn
                .parents(y)
                .iter()
                .map(|&p| {
                    if p == x {
                        intervened
                    } else {
                        setting[parents.iter().position(|&q| q == p).expect("other parent")]
                    }
                })
                .collect();
            match conditional(source, cbn, y, intervened, &pvals)? {
                Some(f) => TermFactor::Value(f),
                None => TermFactor::Missing(describe_conditional(cbn, y, intervened, &pvals)),
            }
        };
        terms.push(SettingTerm {
            setting: setting.clone(),
            weight,
            factor,
        });
        let mut i = parents.len();
        loop {
            if i == 0 {
                return Ok(ParentSettingSum { parents, terms });
            }
            i -= 1;
            setting[i] += 1;
            if setting[i] < cbn.domain_size(parents[i]) {
                break;
            }
            setting[i] = 0;
        }
    }
}

/// PN, PS or PNS through the closed forms. PNS is
/// `PS * Pr(X=0 & Y=0) + PN * Pr(X=1 & Y=1)`, where a sum whose
/// conditioning event has probability zero contributes nothing.
pub fn closed_form<S: FactorSource + ?Sized>(
    cbn: &Cbn,
    source: &mut S,
    query: &CounterfactualQuery,
    cap: u64,
) -> Result<Expansion, CounterfactualError> {
    match query.kind {
        QueryKind::Pn | QueryKind::Ps => Ok(parent_setting_sum(cbn, source, query, cap)?.into_expansion()),
        QueryKind::Pns => {
            query.check_closed_form(cbn)?;
            let mut total = Expansion::empty();
            for (kind, v) in [(QueryKind::Ps, 0), (QueryKind::Pn, 1)] {
                let weight = joint(source, &[(query.cause, v), (query.effect, v)])?;
                if weight.is_zero() {
                    continue;
                }
                let part = CounterfactualQuery { kind, ..*query };
                let e = parent_setting_sum(cbn, source, &part, cap)?.into_expansion();
                total.value += &e.value * weight;
                total.absorb(e);
            }
            Ok(total)
        }
    }
}

fn exact(cbn: &Cbn, kind: QueryKind, cause: VarId, effect: VarId) -> Result<Probability, CounterfactualError> {
    let query = CounterfactualQuery::new(cbn, kind, cbn.name(cause), cbn.name(effect))?;
    let e = closed_form(cbn, &mut ExactFactors::new(cbn, DEFAULT_CAP), &query, DEFAULT_CAP)?;
    Ok(Probability::exact(e.value))
}

/// `Pr([X<-0](Y=0) | X=1 & Y=1)` for a child `Y` of `X`.
pub fn pn_exact(cbn: &Cbn, cause: VarId, effect: VarId) -> Result<Probability, CounterfactualError> {
    exact(cbn, QueryKind::Pn, cause, effect)
}

/// `Pr([X<-1](Y=1) | X=0 & Y=0)` for a child `Y` of `X`.
pub fn ps_exact(cbn: &Cbn, cause: VarId, effect: VarId) -> Result<Probability, CounterfactualError> {
    exact(cbn, QueryKind::Ps, cause, effect)
}

/// `Pr([X<-1](Y=1) & [X<-0](Y=0))` for a child `Y` of `X`.
pub fn pns_exact(cbn: &Cbn, cause: VarId, effect: VarId) -> Result<Probability, CounterfactualError> {
    exact(cbn, QueryKind::Pns, cause, effect)
}
