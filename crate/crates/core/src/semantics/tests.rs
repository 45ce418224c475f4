use num_rational::BigRational;
use num_traits::{One, Zero};

use super::*;
use crate::fixtures::{abduction_chain, diamond, m_dagger, m_star, m_star_converted, rat};
use crate::formula::parse;
use crate::model::{CbnSpec, ContextRow, VarKind, Variable};

fn p(cbn: &Cbn, text: &str) -> BigRational {
    probability(cbn, &parse(text).unwrap()).unwrap().into_inner()
}

fn p_ref(cbn: &Cbn, text: &str) -> BigRational {
    let opts = EvalOptions {
        prune: false,
        ..EvalOptions::default()
    };
    probability_with(cbn, &parse(text).unwrap(), &opts).unwrap().into_inner()
}

fn sample_m_star() -> Cbn {
    m_star(rat(1, 3), rat(1, 4), rat(2, 5), rat(3, 7), rat(5, 9))
}

fn sample_m_dagger() -> Cbn {
    m_dagger(&[rat(1, 3), rat(1, 4), rat(2, 5), rat(3, 7), rat(5, 9), rat(1, 6), rat(7, 8)])
}

#[test]
fn counts_for_reference_models() {
    assert_eq!(ccce_count(&sample_m_star()), 32);
    assert_eq!(fccce_count(&sample_m_star()), 16);
    assert_eq!(ccce_count(&sample_m_dagger()), 128);
    assert_eq!(fccce_count(&sample_m_dagger()), 16);
    assert_eq!(enumerate_ccces(&sample_m_star(), DEFAULT_CAP).unwrap().count(), 32);
    assert_eq!(enumerate_fccces(&sample_m_dagger(), DEFAULT_CAP).unwrap().count(), 16);
}

#[test]
fn single_root_has_two_fccces() {
    let mut spec = CbnSpec::new();
    spec.add_variable(Variable::new("U", VarKind::Exogenous, &["0", "1"]))
        .add_table("U", &[], vec![vec![rat(3, 10), rat(7, 10)]]);
    let m = spec.build().unwrap();
    let probs: Vec<BigRational> = enumerate_fccces(&m, DEFAULT_CAP)
        .unwrap()
        .map(|(_, p)| p.into_inner())
        .collect();
    assert_eq!(probs, vec![rat(3, 10), rat(7, 10)]);
}

#[test]
fn enumeration_cap_is_reported() {
    assert!(matches!(
        enumerate_ccces(&sample_m_dagger(), 100),
        Err(SemanticsError::CapExceeded { cap: 100, needed: Some(128) })
    ));
}

#[test]
fn selections_partition_probability_one() {
    for m in [sample_m_star(), sample_m_dagger(), diamond()] {
        let total: BigRational = enumerate_ccces(&m, DEFAULT_CAP).unwrap().map(|(_, p)| p.into_inner()).sum();
        assert!(total.is_one());
        let total: BigRational = enumerate_fccces(&m, DEFAULT_CAP).unwrap().map(|(_, p)| p.into_inner()).sum();
        assert!(total.is_one());
    }
}

#[test]
fn fccce_is_the_disjunction_of_its_extensions() {
    let m = sample_m_dagger();
    let ccces: Vec<(Ccce, Probability)> = enumerate_ccces(&m, DEFAULT_CAP).unwrap().collect();
    for (fccce, p) in enumerate_fccces(&m, DEFAULT_CAP).unwrap() {
        let sum: BigRational = ccces
            .iter()
            .filter(|(c, _)| fccce.is_extended_by(c))
            .map(|(_, q)| q.value().clone())
            .sum();
        assert_eq!(&sum, p.value());
    }
}

#[test]
fn context_marginal_matches_exogenous_cpt() {
    let m = sample_m_star();
    let by_context = fccce_mass_by_context(&m);
    assert_eq!(by_context[&vec![0]], rat(1, 3));
    assert_eq!(by_context[&vec![1]], rat(2, 3));
}

fn find_fccce(m: &Cbn, wanted: &[&str]) -> Fccce {
    let mut wanted: Vec<String> = wanted.iter().map(|s| s.to_string()).collect();
    wanted.sort();
    enumerate_fccces(m, DEFAULT_CAP)
        .unwrap()
        .map(|(f, _)| f)
        .find(|f| {
            let mut have: Vec<String> = f.conjuncts(m).iter().map(|c| c.to_string()).collect();
            have.sort();
            have == wanted
        })
        .expect("fccce exists")
}

#[test]
fn fccce_a_entails_ps_numerator() {
    let m = sample_m_star();
    let a = find_fccce(&m, &["U=0", "X=0 | U=0", "Y=0 | X=0", "Y=1 | X=1"]);
    assert!(entails(&a, &parse("X=0 & Y=0 & [X<-1](Y=1)").unwrap(), &m).unwrap());
    assert!(!entails(&a, &parse("[X<-1](Y=0)").unwrap(), &m).unwrap());
    for (f, _) in enumerate_fccces(&m, DEFAULT_CAP).unwrap() {
        assert!(entails(&f, &parse("[X<-1](X=1)").unwrap(), &m).unwrap());
    }
}

#[test]
fn fccce_cannot_decide_exogenous_interventions() {
    let m = sample_m_star();
    let a = find_fccce(&m, &["U=0", "X=0 | U=0", "Y=0 | X=0", "Y=1 | X=1"]);
    assert!(matches!(
        entails(&a, &parse("[U<-1](X=0)").unwrap(), &m),
        Err(SemanticsError::OutsideContext { .. })
    ));
}

#[test]
fn mstar_and_mdagger_symbolic_values() {
    let (a, b, c, d, e) = (rat(1, 3), rat(1, 4), rat(2, 5), rat(3, 7), rat(5, 9));
    let one = BigRational::one();
    let m = m_star(a.clone(), b.clone(), c.clone(), d.clone(), e.clone());
    let expected = &a * &b * &d * (&one - &e) + (&one - &a) * &c * &d * (&one - &e);
    assert_eq!(p(&m, "X=0 & Y=0 & [X<-1](Y=1)"), expected);
    assert_eq!(p_ref(&m, "X=0 & Y=0 & [X<-1](Y=1)"), expected);

    let params = [rat(1, 3), rat(1, 4), rat(2, 5), rat(3, 7), rat(5, 9), rat(1, 6), rat(7, 8)];
    let m = m_dagger(&params);
    let [a, b, c, f1, f2, f3, f4] = params;
    let expected = &a * &b * &f1 * (&one - &f2) + (&one - &a) * &c * &f3 * (&one - &f4);
    assert_eq!(p(&m, "X=0 & Y=0 & [X<-1](Y=1)"), expected);
    assert_eq!(p_ref(&m, "X=0 & Y=0 & [X<-1](Y=1)"), expected);
}

#[test]
fn conditioning_on_the_event_itself_gives_one() {
    let m = abduction_chain();
    let f = parse("X=1").unwrap();
    assert!(conditional_probability(&m, &f, &f).unwrap().value().is_one());
}

#[test]
fn converted_example_conditional() {
    let m = m_star_converted();
    let got = conditional_probability(&m, &parse("[X<-1](Y=0)").unwrap(), &parse("Y=1").unwrap()).unwrap();
    assert_eq!(got.into_inner(), rat(1, 4));
    assert_eq!(p(&m, "Y=1"), rat(1, 2));
}

#[test]
fn conditioning_on_a_tautology_changes_nothing() {
    let m = sample_m_dagger();
    let f = parse("[X<-1](Y=1) | Y=0").unwrap();
    let t = Formula::tautology(&m);
    assert_eq!(
        conditional_probability(&m, &f, &t).unwrap(),
        probability(&m, &f).unwrap()
    );
}

#[test]
fn zero_probability_condition_is_undefined() {
    let m = abduction_chain();
    let err = conditional_probability(&m, &parse("X=1").unwrap(), &parse("Y=0").unwrap()).unwrap_err();
    assert!(matches!(err, SemanticsError::UndefinedConditional { .. }));
}

/// Forward inference by the chain rule over every full assignment.
fn chain_rule(m: &Cbn, holds: impl Fn(&[usize]) -> bool) -> BigRational {
    let n = m.len();
    let radices: Vec<usize> = m.ids().map(|v| m.domain_size(v)).collect();
    let mut values = vec![0; n];
    let mut total = BigRational::zero();
    loop {
        let mut w = BigRational::one();
        for v in m.ids() {
            let pv: Vec<usize> = m.parents(v).iter().map(|p| values[p.0]).collect();
            w *= m.entry(v, &pv, values[v.0]).unwrap();
        }
        if holds(&values) {
            total += w;
        }
        let mut i = n;
        loop {
            if i == 0 {
                return total;
            }
            i -= 1;
            values[i] += 1;
            if values[i] < radices[i] {
                break;
            }
            values[i] = 0;
        }
    }
}

#[test]
fn simple_formulas_match_forward_inference() {
    let m = diamond();
    type Case = (&'static str, fn(&[usize]) -> bool);
    let cases: [Case; 3] = [
        ("Y=1", |v| v[3] == 1),
        ("X1=0 & !(Y=1)", |v| v[0] == 0 && v[3] != 1),
        ("X2=1 | X3=0 & Y=1", |v| v[1] == 1 || (v[2] == 0 && v[3] == 1)),
    ];
    for (text, holds) in cases {
        assert_eq!(p(&m, text), chain_rule(&m, holds), "{text}");
        assert_eq!(p_ref(&m, text), chain_rule(&m, holds), "{text}");
    }
}

#[test]
fn pruned_and_reference_agree() {
    let formulas = [
        "X=0 & Y=0 & [X<-1](Y=1)",
        "[X<-1](Y=1) & [X<-0](Y=0)",
        "!([X<-0](Y=1) | Y=0)",
        "[Y<-1](X=0) | [X<-0](Y=1 & X=0)",
        "U=1 & [X<-0](Y=0)",
        "[U<-0](Y=1) & Y=0",
        "[U<-1, X<-0](Y=1) | X=1",
    ];
    for m in [sample_m_star(), sample_m_dagger()] {
        for text in formulas {
            assert_eq!(p(&m, text), p_ref(&m, text), "{text}");
        }
    }
}

#[test]
fn dichotomy_holds_for_every_ccce() {
    let m = sample_m_dagger();
    let f = parse("Y=1 & [X<-1](Y=0) | [U<-0](X=1)").unwrap();
    let not_f = Formula::not(f.clone());
    for (c, _) in enumerate_ccces(&m, DEFAULT_CAP).unwrap() {
        assert_ne!(entails(&c, &f, &m).unwrap(), entails(&c, &not_f, &m).unwrap());
    }
}

#[test]
fn joint_context_table_is_a_single_slot() {
    let mut spec = CbnSpec::new();
    spec.add_variable(Variable::new("U1", VarKind::Exogenous, &["0", "1"]))
        .add_variable(Variable::new("U2", VarKind::Exogenous, &["0", "1"]))
        .add_variable(Variable::new("Y", VarKind::Endogenous, &["0", "1"]))
        .add_table(
            "Y",
            &["U1", "U2"],
            vec![
                vec![rat(1, 1), rat(0, 1)],
                vec![rat(1, 2), rat(1, 2)],
                vec![rat(1, 4), rat(3, 4)],
                vec![rat(0, 1), rat(1, 1)],
            ],
        )
        .set_contexts(vec![
            ContextRow {
                values: [("U1".to_string(), "0".to_string()), ("U2".to_string(), "0".to_string())].into(),
                p: rat(1, 2),
            },
            ContextRow {
                values: [("U1".to_string(), "1".to_string()), ("U2".to_string(), "1".to_string())].into(),
                p: rat(1, 2),
            },
        ]);
    let m = spec.build().unwrap();
    // one context slot with two rows, four Y slots with two outcomes each
    assert_eq!(ccce_count(&m), 2 * 16);
    assert_eq!(fccce_count(&m), 2 * 2);
    assert_eq!(p(&m, "Y=1"), rat(1, 2));
    assert_eq!(p_ref(&m, "Y=1"), rat(1, 2));
    assert_eq!(p(&m, "U1=0 & U2=1"), rat(0, 1));
    assert_eq!(p(&m, "[U2<-1](Y=1)"), rat(1, 2) * rat(1, 2) + rat(1, 2));
    assert_eq!(p_ref(&m, "[U2<-1](Y=1)"), rat(1, 2) * rat(1, 2) + rat(1, 2));
}
