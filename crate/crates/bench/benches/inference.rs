use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cbnsem::counterfactual::{evaluate_observational, ps_exact};
use cbnsem::fixtures::{diamond, m_dagger, m_star, rat};
use cbnsem::functional::{compile, oracle_probability, sample};
use cbnsem::generate::{random_cbn, random_formula, FormulaShape, NetworkShape};
use cbnsem::semantics::{probability_with, EvalOptions, Method};
use cbnsem::{parse, Cbn, Formula, DEFAULT_CAP};

fn fixtures() -> Vec<(&'static str, Cbn, Formula)> {
    let params = [rat(1, 3), rat(1, 4), rat(2, 5), rat(3, 7), rat(5, 9), rat(1, 6), rat(7, 8)];
    vec![
        (
            "mstar",
            m_star(rat(1, 3), rat(2, 7), rat(3, 5), rat(4, 9), rat(1, 8)),
            parse("X=0 & Y=0 & [X<-1](Y=1)").unwrap(),
        ),
        ("mdagger", m_dagger(&params), parse("X=0 & Y=0 & [X<-1](Y=1)").unwrap()),
        (
            "diamond",
            diamond(),
            parse("[X1<-1, X3<-1](Y=1) | (X2=0 & [X1<-0](Y=0))").unwrap(),
        ),
    ]
}

fn semantics(c: &mut Criterion) {
    let mut group = c.benchmark_group("probability");
    for (name, m, f) in fixtures() {
        for prune in [false, true] {
            let options = EvalOptions { cap: DEFAULT_CAP, prune };
            let label = if prune { "pruned" } else { "enumerate" };
            group.bench_with_input(BenchmarkId::new(label, name), &(), |b, _| {
                b.iter(|| probability_with(&m, &f, &options).unwrap())
            });
        }
        group.bench_with_input(BenchmarkId::new("observational", name), &(), |b, _| {
            b.iter(|| evaluate_observational(&m, &f).unwrap())
        });
        let fm = compile(&m, DEFAULT_CAP).unwrap();
        group.bench_with_input(BenchmarkId::new("oracle", name), &(), |b, _| {
            b.iter(|| oracle_probability(&fm, &f, DEFAULT_CAP).unwrap())
        });
    }
    group.finish();
}

fn random_corpus(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let corpus: Vec<(Cbn, Formula)> = (0..20)
        .map(|_| {
            let m = random_cbn(&mut rng, &NetworkShape::default());
            let f = random_formula(&mut rng, &m, &FormulaShape::default());
            (m, f)
        })
        .collect();
    let mut group = c.benchmark_group("random corpus");
    for (label, prune) in [("enumerate", false), ("pruned", true)] {
        let options = EvalOptions { cap: DEFAULT_CAP, prune };
        group.bench_function(label, |b| {
            b.iter(|| {
                for (m, f) in &corpus {
                    let e = cbnsem::semantics::evaluate(m, f, &options).unwrap();
                    assert!(prune || e.method != Method::Pruned);
                }
            })
        });
    }
    group.bench_function("observational", |b| {
        b.iter(|| {
            for (m, f) in &corpus {
                evaluate_observational(m, f).unwrap();
            }
        })
    });
    group.finish();
}

fn closed_form_and_sampling(c: &mut Criterion) {
    let h = || rat(1, 2);
    let m = m_star(h(), h(), h(), h(), h());
    let (x, y) = (m.id("X").unwrap(), m.id("Y").unwrap());
    c.bench_function("ps_exact mstar", |b| b.iter(|| ps_exact(&m, x, y).unwrap()));
    let fm = compile(&m, DEFAULT_CAP).unwrap();
    c.bench_function("sample 10k rows", |b| b.iter(|| sample(&fm, 10_000, 1)));
}

criterion_group!(benches, semantics, random_corpus, closed_form_and_sampling);
criterion_main!(benches);
