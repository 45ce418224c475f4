use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::dataset::Dataset;
use crate::fixtures::{abduction_chain, diamond, m_dagger, m_star, rat};
use crate::formula::parse;
use crate::functional::{compile, oracle_probability, perfect_dataset, sample};
use crate::generate::{random_cbn, random_formula, FormulaShape, NetworkShape};
use crate::prob::Probability;
use crate::semantics::{conditional_probability, probability};
use crate::DEFAULT_CAP;

fn f(text: &str) -> Formula {
    parse(text).unwrap()
}

fn half() -> BigRational {
    rat(1, 2)
}

fn m_star_halves() -> Cbn {
    m_star(half(), half(), half(), half(), half())
}

fn query(cbn: &Cbn, kind: QueryKind) -> CounterfactualQuery {
    CounterfactualQuery::new(cbn, kind, "X", "Y").unwrap()
}

fn x_y(cbn: &Cbn) -> (VarId, VarId) {
    (cbn.id("X").unwrap(), cbn.id("Y").unwrap())
}

/// Records every factor requested from the wrapped source.
struct Recording<S> {
    inner: S,
    seen: Vec<Factor>,
}

impl<S: FactorSource> FactorSource for Recording<S> {
    fn value(&mut self, factor: &Factor) -> Result<Option<BigRational>, CounterfactualError> {
        self.seen.push(factor.clone());
        self.inner.value(factor)
    }
}

#[test]
fn mstar_numerator_from_observations() {
    let (a, b, c, d, e) = (rat(1, 3), rat(2, 7), rat(3, 5), rat(4, 9), rat(1, 8));
    let m = m_star(a.clone(), b.clone(), c.clone(), d.clone(), e.clone());
    let one = BigRational::one();
    let want = &a * &b * &d * (&one - &e) + (&one - &a) * &c * &d * (&one - &e);
    let got = evaluate_observational(&m, &f("X=0 & Y=0 & [X<-1](Y=1)")).unwrap();
    assert_eq!(*got.value(), want);
}

#[test]
fn intervention_free_formula_is_a_joint() {
    let m = diamond();
    let e = evaluate_observational_with(&m, &f("X2=1 & Y=0"), DEFAULT_CAP).unwrap();
    assert_eq!(e.value, probability(&m, &f("X2=1 & Y=0")).unwrap().into_inner());
    assert_eq!(e.n_terms, 1);
}

#[test]
fn closed_forms_on_halves() {
    let m = m_star_halves();
    let (x, y) = x_y(&m);
    assert_eq!(*ps_exact(&m, x, y).unwrap().value(), half());
    assert_eq!(*pn_exact(&m, x, y).unwrap().value(), half());
    assert_eq!(*pns_exact(&m, x, y).unwrap().value(), rat(1, 4));
    let fm = compile(&m, DEFAULT_CAP).unwrap();
    let both = f("[X<-1](Y=1) & [X<-0](Y=0)");
    assert_eq!(*oracle_probability(&fm, &both, DEFAULT_CAP).unwrap().value(), rat(1, 4));
}

#[test]
fn degenerate_closed_forms() {
    // e = 1: setting X to 1 never yields Y = 1
    let m = m_star(half(), half(), half(), half(), rat(1, 1));
    let (x, y) = x_y(&m);
    assert!(ps_exact(&m, x, y).unwrap().is_zero());
    // d = 0: Y is always 1 under X = 0
    let m = m_star(half(), half(), half(), rat(0, 1), half());
    assert!(pn_exact(&m, x, y).unwrap().is_zero());
    // Y copies X
    let m = m_star(half(), rat(1, 3), rat(3, 4), rat(1, 1), rat(0, 1));
    assert!(pns_exact(&m, x, y).unwrap().value().is_one());
}

#[test]
fn closed_forms_match_defining_conditionals() {
    let m = m_dagger(&[rat(1, 3), rat(1, 4), rat(2, 5), rat(3, 7), rat(5, 9), rat(1, 6), rat(7, 8)]);
    for kind in [QueryKind::Pn, QueryKind::Ps] {
        let q = query(&m, kind);
        let got = closed_form(&m, &mut ExactFactors::new(&m, DEFAULT_CAP), &q, DEFAULT_CAP).unwrap();
        let want = conditional_probability(&m, &q.target(&m), &q.condition(&m).unwrap()).unwrap();
        assert_eq!(got.value, want.into_inner(), "{kind}");
    }
    let q = query(&m, QueryKind::Pns);
    let got = closed_form(&m, &mut ExactFactors::new(&m, DEFAULT_CAP), &q, DEFAULT_CAP).unwrap();
    assert_eq!(got.value, probability(&m, &q.target(&m)).unwrap().into_inner());
}

#[test]
fn parent_setting_sum_covers_other_parents() {
    let m = m_dagger(&[rat(1, 3), rat(1, 4), rat(2, 5), rat(3, 7), rat(5, 9), rat(1, 6), rat(7, 8)]);
    let q = query(&m, QueryKind::Ps);
    let sum = parent_setting_sum(&m, &mut ExactFactors::new(&m, DEFAULT_CAP), &q, DEFAULT_CAP).unwrap();
    assert_eq!(sum.parents, vec![m.id("U").unwrap()]);
    assert_eq!(sum.terms.len(), 2);
    let weights: BigRational = sum.terms.iter().map(|t| t.weight.clone()).sum();
    assert!(weights.is_one());
    // Pr(Y=1 | U=u, X=1) is 1 - f2 and 1 - f4
    assert_eq!(sum.terms[0].factor, TermFactor::Value(rat(4, 9)));
    assert_eq!(sum.terms[1].factor, TermFactor::Value(rat(1, 8)));
}

#[test]
fn closed_form_preconditions() {
    let m = diamond();
    let err = CounterfactualQuery::new(&m, QueryKind::Ps, "X1", "Y").unwrap().check_closed_form(&m);
    assert!(matches!(err, Err(CounterfactualError::NotChild { .. })));

    // X -> W -> Y and X -> Y: W is a mediated parent of Y
    let mut spec = crate::CbnSpec::new();
    for name in ["X", "W", "Y"] {
        spec.add_variable(crate::Variable::new(name, crate::VarKind::Endogenous, &["0", "1"]));
    }
    let b = |p: BigRational| vec![p.clone(), BigRational::one() - p];
    spec.add_table("X", &[], vec![b(rat(1, 3))])
        .add_table("W", &["X"], vec![b(rat(1, 4)), b(rat(2, 3))])
        .add_table("Y", &["X", "W"], vec![b(rat(1, 5)), b(rat(2, 5)), b(rat(3, 5)), b(rat(4, 5))]);
    let m = spec.build().unwrap();
    let (x, y) = x_y(&m);
    assert!(matches!(ps_exact(&m, x, y), Err(CounterfactualError::MediatedParent { ref mediator, .. }) if mediator == "W"));
    // the general evaluator still answers the defining formula exactly
    let q = query(&m, QueryKind::Ps);
    let target = Target::Conditional {
        target: q.target(&m),
        given: q.condition(&m).unwrap(),
    };
    let e = evaluate_target(&m, &mut ExactFactors::new(&m, DEFAULT_CAP), &target, DEFAULT_CAP).unwrap();
    let want = conditional_probability(&m, &q.target(&m), &q.condition(&m).unwrap()).unwrap();
    assert_eq!(e.value, want.into_inner());

    let mut spec = crate::CbnSpec::new();
    spec.add_variable(crate::Variable::new("X", crate::VarKind::Endogenous, &["a", "b", "c"]))
        .add_variable(crate::Variable::new("Y", crate::VarKind::Endogenous, &["0", "1"]))
        .add_table("X", &[], vec![vec![rat(1, 3), rat(1, 3), rat(1, 3)]])
        .add_table("Y", &["X"], vec![b(rat(1, 2)), b(rat(1, 2)), b(rat(1, 2))]);
    let m = spec.build().unwrap();
    assert!(matches!(
        CounterfactualQuery::new(&m, QueryKind::Pn, "X", "Y"),
        Err(CounterfactualError::NotBinary { .. })
    ));
}

#[test]
fn zero_probability_condition_is_an_error() {
    // X is always 1, so X=0 & Y=0 never happens
    let m = m_star(half(), rat(0, 1), rat(0, 1), half(), half());
    let (x, y) = x_y(&m);
    assert!(matches!(ps_exact(&m, x, y), Err(CounterfactualError::UndefinedConditional { .. })));
    // PNS still exists: the undefined sum carries zero weight
    assert_eq!(
        pns_exact(&m, x, y).unwrap(),
        probability(&m, &f("[X<-1](Y=1) & [X<-0](Y=0)")).unwrap()
    );
}

#[test]
fn diamond_expansion_uses_post_intervention_conditionals() {
    let m = diamond();
    let target = f("[X1<-1, X3<-1](Y=1)");
    let mut source = Recording {
        inner: ExactFactors::new(&m, DEFAULT_CAP),
        seen: Vec::new(),
    };
    let e = expansion::expand(&m, &mut source, &target, DEFAULT_CAP).unwrap();
    assert_eq!(e.value, probability(&m, &target).unwrap().into_inner());
    let fm = compile(&m, DEFAULT_CAP).unwrap();
    assert_eq!(e.value, oracle_probability(&fm, &target, DEFAULT_CAP).unwrap().into_inner());

    let id = |n: &str| m.id(n).unwrap();
    assert!(source.seen.contains(&Factor::Conditional {
        var: id("X2"),
        value: 0,
        parents: vec![(id("X1"), 1)],
    }));
    assert!(source.seen.contains(&Factor::Conditional {
        var: id("Y"),
        value: 1,
        parents: vec![(id("X2"), 0), (id("X3"), 1)],
    }));
}

#[test]
fn factors_are_intervention_free_and_exact() {
    let m = m_dagger(&[rat(1, 3), rat(1, 4), rat(2, 5), rat(3, 7), rat(5, 9), rat(1, 6), rat(7, 8)]);
    let mut source = Recording {
        inner: ExactFactors::new(&m, DEFAULT_CAP),
        seen: Vec::new(),
    };
    for text in ["X=0 & Y=0 & [X<-1](Y=1)", "[X<-1](Y=1) | [X<-0](Y=0)", "!([U<-0, X<-1](Y=1)) & Y=1"] {
        expansion::expand(&m, &mut source, &f(text), DEFAULT_CAP).unwrap();
    }
    let q = query(&m, QueryKind::Pns);
    closed_form(&m, &mut source, &q, DEFAULT_CAP).unwrap();
    assert!(!source.seen.is_empty());
    for factor in source.seen.clone() {
        let (event, given) = factor.to_formulas(&m);
        assert!(event.is_simple() && given.as_ref().is_none_or(Formula::is_simple));
        let value = source.inner.value(&factor).unwrap().unwrap();
        let want = match given {
            None => probability(&m, &event).unwrap(),
            Some(g) => conditional_probability(&m, &event, &g).unwrap(),
        };
        assert_eq!(value, want.into_inner(), "{factor:?}");
    }
}

#[test]
fn abduction_chain_conditional_is_one() {
    let m = abduction_chain();
    let target = Target::Conditional {
        target: f("X=1"),
        given: f("X=1"),
    };
    let e = evaluate_target(&m, &mut ExactFactors::new(&m, DEFAULT_CAP), &target, DEFAULT_CAP).unwrap();
    assert!(e.value.is_one());
    let e = evaluate_observational_with(&m, &f("[Y<-1](X=1) & X=1"), DEFAULT_CAP).unwrap();
    assert_eq!(e.value, probability(&m, &f("[Y<-1](X=1) & X=1")).unwrap().into_inner());
}

#[test]
fn redundant_intervention_shares_rows_with_the_actual_world() {
    let m = m_star(rat(1, 3), rat(2, 7), rat(3, 5), rat(4, 9), rat(1, 8));
    // [X<-0](Y=1) with X=0 reads the same cpt row as the actual world
    let e = evaluate_observational_with(&m, &f("X=0 & Y=0 & [X<-0](Y=1)"), DEFAULT_CAP).unwrap();
    assert!(e.value.is_zero());
    let e = evaluate_observational_with(&m, &f("[X<-0](Y=1) & [X<-0, U<-1](Y=0)"), DEFAULT_CAP).unwrap();
    assert_eq!(e.value, probability(&m, &f("[X<-0](Y=1) & [X<-0, U<-1](Y=0)")).unwrap().into_inner());
}

#[test]
fn estimate_from_perfect_dataset_is_exact() {
    let m = m_dagger(&[rat(1, 3), rat(1, 4), rat(2, 5), rat(3, 7), rat(5, 9), rat(1, 6), rat(7, 8)]);
    let data = perfect_dataset(&compile(&m, DEFAULT_CAP).unwrap(), DEFAULT_CAP).unwrap();
    let opts = EstimateOptions::default();
    for kind in [QueryKind::Pn, QueryKind::Ps, QueryKind::Pns] {
        let q = query(&m, kind);
        let est = estimate_observational(&data, &m, &Target::Query(q), &opts).unwrap();
        let exact = closed_form(&m, &mut ExactFactors::new(&m, DEFAULT_CAP), &q, DEFAULT_CAP).unwrap();
        assert_eq!(est.value, exact.value, "{kind}");
        assert_eq!(est.stderr, Some(0.0));
    }
    let target = Target::Formula(f("X=0 & Y=0 & [X<-1](Y=1)"));
    let est = estimate_observational(&data, &m, &target, &opts).unwrap();
    assert_eq!(est.value, probability(&m, &f("X=0 & Y=0 & [X<-1](Y=1)")).unwrap().into_inner());
}

#[test]
fn missing_exogenous_column_is_named() {
    let m = m_dagger(&[rat(1, 3), rat(1, 4), rat(2, 5), rat(3, 7), rat(5, 9), rat(1, 6), rat(7, 8)]);
    let mut data = Dataset::new(vec!["X".into(), "Y".into()], vec![vec!["0".into(), "1".into()]; 2]);
    data.push(vec![0, 0]);
    data.push(vec![1, 1]);
    let err = estimate_observational(&data, &m, &Target::Query(query(&m, QueryKind::Ps)), &EstimateOptions::default())
        .unwrap_err();
    assert!(matches!(err, CounterfactualError::MissingColumn { ref column } if column == "U"), "{err}");
    // M* does not need U: Y has no parent besides X
    let m = m_star_halves();
    assert!(estimate_observational(&data, &m, &Target::Query(query(&m, QueryKind::Ps)), &EstimateOptions::default()).is_ok());
}

#[test]
fn empty_cells_are_reported_not_zeroed() {
    let m = m_star_halves();
    let mut data = Dataset::for_model(&m);
    for row in [[0, 0, 0], [0, 0, 1], [1, 0, 0]] {
        data.push(row.to_vec());
    }
    // no row has X = 1, so Pr(Y=1 | X=1) is unknown
    let est = estimate_observational(&data, &m, &Target::Query(query(&m, QueryKind::Ps)), &EstimateOptions::default())
        .unwrap();
    assert_eq!(est.insufficient, vec!["Pr(Y=1 | X=1)".to_string()]);
    assert!(est.value.is_zero() && est.n_terms == 0);
}

#[test]
fn sampled_estimates_converge() {
    let m = m_star_halves();
    let fm = compile(&m, DEFAULT_CAP).unwrap();
    let q = Target::Query(query(&m, QueryKind::Ps));
    let opts = EstimateOptions::default();
    let small = estimate_observational(&sample(&fm, 1_000, 11), &m, &q, &opts).unwrap();
    let large = estimate_observational(&sample(&fm, 100_000, 11), &m, &q, &opts).unwrap();
    assert!((small.to_f64() - 0.5).abs() < 0.08, "{}", small.to_f64());
    assert!((large.to_f64() - 0.5).abs() < 0.01, "{}", large.to_f64());
    assert!(large.stderr.unwrap() < small.stderr.unwrap());
    assert_eq!(large.replicates, DEFAULT_REPLICATES);
}

#[test]
fn bootstrap_is_seeded() {
    let m = m_star_halves();
    let data = sample(&compile(&m, DEFAULT_CAP).unwrap(), 2_000, 5);
    let q = Target::Query(query(&m, QueryKind::Pns));
    let opts = EstimateOptions {
        replicates: 50,
        ..Default::default()
    };
    let a = estimate_observational(&data, &m, &q, &opts).unwrap();
    let b = estimate_observational(&data, &m, &q, &opts).unwrap();
    assert_eq!(a, b);
}

fn event(m: &Cbn, v: VarId, x: usize) -> Formula {
    Formula::event(m.name(v), m.label(v, x))
}

fn closed_form_pairs(m: &Cbn) -> Vec<CounterfactualQuery> {
    let mut out = Vec::new();
    for y in m.endogenous() {
        for &x in m.parents(y) {
            if let Ok(q) = CounterfactualQuery::new(m, QueryKind::Ps, m.name(x), m.name(y)) {
                if q.check_closed_form(m).is_ok() {
                    out.push(q);
                }
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn observational_matches_semantics(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shape = NetworkShape { context_table_rate: 0.4, ..Default::default() };
        let m = random_cbn(&mut rng, &shape);
        for _ in 0..4 {
            let g = random_formula(&mut rng, &m, &FormulaShape::default());
            let want = probability(&m, &g).unwrap();
            prop_assert_eq!(evaluate_observational(&m, &g).unwrap(), want, "{}", g);
        }
    }

    #[test]
    fn observational_matches_semantics_on_ternary_domains(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shape = NetworkShape { max_vars: 4, domain_size: 3, ..Default::default() };
        let m = random_cbn(&mut rng, &shape);
        let g = random_formula(&mut rng, &m, &FormulaShape { max_depth: 2, ..Default::default() });
        prop_assert_eq!(evaluate_observational(&m, &g).unwrap(), probability(&m, &g).unwrap(), "{}", g);
    }

    #[test]
    fn closed_form_identity(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_cbn(&mut rng, &NetworkShape::default());
        for q in closed_form_pairs(&m) {
            let p00 = probability(&m, &Formula::and([event(&m, q.cause, 0), event(&m, q.effect, 0)])).unwrap();
            let p11 = probability(&m, &Formula::and([event(&m, q.cause, 1), event(&m, q.effect, 1)])).unwrap();
            let ps = ps_exact(&m, q.cause, q.effect).ok().map(Probability::into_inner).unwrap_or_else(BigRational::zero);
            let pn = pn_exact(&m, q.cause, q.effect).ok().map(Probability::into_inner).unwrap_or_else(BigRational::zero);
            let pns = pns_exact(&m, q.cause, q.effect).unwrap();
            prop_assert_eq!(pns.value().clone(), ps * p00.value() + pn * p11.value());
            prop_assert_eq!(pns, probability(&m, &CounterfactualQuery { kind: QueryKind::Pns, ..q }.target(&m)).unwrap());
        }
    }
}
