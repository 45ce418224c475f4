//! The shipped model files load, round-trip, and agree with the in-code
//! fixtures.

use std::fs::File;
use std::path::PathBuf;

use cbnsem::counterfactual::evaluate_observational;
use cbnsem::fixtures::{m_star, m_star_converted, rat};
use cbnsem::functional::{compile, oracle_probability};
use cbnsem::model::{read_cbn, write_cbn};
use cbnsem::{parse, probability, Cbn, CbnSpec, DEFAULT_CAP};

const FILES: [&str; 6] = [
    "mstar.json",
    "mstar_halves.json",
    "mstar_converted.json",
    "mdagger.json",
    "abduction_chain.json",
    "diamond.json",
];

fn spec(name: &str) -> CbnSpec {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models").join(name);
    read_cbn(File::open(&path).unwrap()).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn load(name: &str) -> Cbn {
    spec(name).build().unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn every_file_builds_and_round_trips() {
    for name in FILES {
        let original = spec(name);
        let mut bytes = Vec::new();
        write_cbn(&original, &mut bytes).unwrap();
        let again = read_cbn(bytes.as_slice()).unwrap();
        assert_eq!(original, again, "{name}");
        assert_eq!(original.build().unwrap(), again.build().unwrap());
    }
}

#[test]
fn files_match_fixtures() {
    let mstar = m_star(rat(3, 5), rat(1, 4), rat(2, 3), rat(2, 5), rat(1, 3));
    assert_eq!(load("mstar.json"), mstar);
    let h = || rat(1, 2);
    assert_eq!(load("mstar_halves.json"), m_star(h(), h(), h(), h(), h()));
    assert_eq!(load("mstar_converted.json"), m_star_converted());
}

#[test]
fn three_evaluators_agree_on_the_files() {
    let formulas = [
        "X=0 & Y=0 & [X<-1](Y=1)",
        "[X<-1](Y=1) & [X<-0](Y=0)",
        "Y=1 | [X<-0](Y=1)",
    ];
    for name in ["mstar.json", "mstar_halves.json", "mstar_converted.json", "mdagger.json"] {
        let m = load(name);
        let fm = compile(&m, DEFAULT_CAP).unwrap();
        for text in formulas {
            let f = parse(text).unwrap();
            let semantic = probability(&m, &f).unwrap();
            assert_eq!(oracle_probability(&fm, &f, DEFAULT_CAP).unwrap(), semantic, "{name}: {text}");
            assert_eq!(evaluate_observational(&m, &f).unwrap(), semantic, "{name}: {text}");
        }
    }
    let p = probability(&load("mstar.json"), &parse("X=0 & Y=0 & [X<-1](Y=1)").unwrap()).unwrap();
    assert_eq!(p.to_string(), "1/9");
}
