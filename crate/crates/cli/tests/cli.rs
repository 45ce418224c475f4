use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn model(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../models")
        .join(name)
        .display()
        .to_string()
}

fn cbnsem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cbnsem"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn records(o: &Output) -> Vec<serde_json::Value> {
    stdout(o)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap_or_else(|e| panic!("{l}: {e}")))
        .collect()
}

#[test]
fn eval_prints_the_symbolic_value_for_the_file_numbers() {
    // a=3/5, b=1/4, c=2/3, d=2/5, e=1/3: abd(1-e) + (1-a)cd(1-e) = 1/25 + 16/225 = 1/9
    let m = model("mstar.json");
    let o = cbnsem(&["eval", "--model", &m, "--formula", "X=0 & Y=0 & [X<-1](Y=1)"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("= 1/9"), "{out}");
    assert!(out.contains("0.111111"));
    assert!(out.contains("entailing"));
}

#[test]
fn eval_conditional_on_converted_model() {
    let m = model("mstar_converted.json");
    let o = cbnsem(&[
        "eval", "--model", &m, "--formula", "[X<-1](Y=0)", "--given", "Y=1", "--output", "records",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let recs = records(&o);
    assert_eq!(recs.len(), 1);
    assert_eq!(recs[0]["exact"], "1/4");
    assert!(recs[0].get("n_terms").is_some() && recs[0].get("skipped_terms").is_some());
}

#[test]
fn malformed_formula_exits_2_with_caret() {
    let m = model("mstar.json");
    let o = cbnsem(&["eval", "--model", &m, "--formula", "X=0 & & Y=1"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    let lines: Vec<&str> = err.lines().collect();
    let source = lines.iter().position(|l| l.trim() == "X=0 & & Y=1").expect("source echoed");
    let caret = lines[source + 1];
    assert_eq!(caret.trim(), "^");
    assert_eq!(caret.find('^'), Some(lines[source].find("& Y").unwrap()));
}

#[test]
fn ps_on_halves_is_one_half() {
    let m = model("mstar_halves.json");
    let o = cbnsem(&["counterfactual", "--model", &m, "--query", "ps", "--cause", "X", "--effect", "Y"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("exact     1/2"), "{}", stdout(&o));
}

#[test]
fn pns_report_shows_the_identity() {
    let m = model("mstar_halves.json");
    let o = cbnsem(&["counterfactual", "--model", &m, "--query", "pns", "--cause", "X", "--effect", "Y"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(
        out.contains("PS * Pr(X=0 & Y=0) + PN * Pr(X=1 & Y=1) = 1/2 * 1/4 + 1/2 * 1/4 = 1/4"),
        "{out}"
    );
    assert!(!out.contains("MISMATCH"));
}

#[test]
fn non_child_effect_suggests_eval() {
    let m = model("diamond.json");
    let o = cbnsem(&["counterfactual", "--model", &m, "--query", "ps", "--cause", "X1", "--effect", "Y"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("not a child"), "{err}");
    assert!(err.contains("cbnsem eval"), "{err}");
    assert!(err.contains("--formula \"[X1<-1](Y=1)\" --given \"X1=0 & Y=0\""), "{err}");
}

#[test]
fn compile_reports_sixteen_contexts_and_writes_fcm() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fcm.json");
    let m = model("mstar_converted.json");
    let o = cbnsem(&["compile", "--model", &m, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("16 positive-measure contexts"), "{}", stdout(&o));
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["format"], "fcm/1");
}

#[test]
fn sample_is_byte_identical_for_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let m = model("mdagger.json");
    let paths: Vec<PathBuf> = (0..2).map(|i| dir.path().join(format!("s{i}.csv"))).collect();
    for p in &paths {
        let o = cbnsem(&["sample", "--model", &m, "--n", "2000", "--seed", "11", "--out", p.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let a = fs::read(&paths[0]).unwrap();
    assert_eq!(a, fs::read(&paths[1]).unwrap());
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 2001);

    let other = cbnsem(&["sample", "--model", &m, "--n", "2000", "--seed", "12"]);
    assert_ne!(other.stdout, fs::read(&paths[0]).unwrap());
}

#[test]
fn check_passes_on_every_model() {
    for name in ["mstar.json", "mstar_converted.json", "mdagger.json", "abduction_chain.json", "diamond.json"] {
        let o = cbnsem(&["check", "--model", &model(name), "--output", "records"]);
        assert!(o.status.success(), "{name}: {}{}", stdout(&o), stderr(&o));
        let recs = records(&o);
        let audits: Vec<&str> = recs.iter().map(|r| r["audit"].as_str().unwrap()).collect();
        assert_eq!(audits, ["compatibility", "independence", "oracle-equivalence"]);
        assert!(recs.iter().all(|r| r["passed"] == true));
    }
}

#[test]
fn estimate_sits_next_to_exact_value() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    let m = model("mstar_halves.json");
    let o = cbnsem(&["sample", "--model", &m, "--n", "20000", "--seed", "5", "--out", data.to_str().unwrap()]);
    assert!(o.status.success());
    let o = cbnsem(&[
        "counterfactual", "--model", &m, "--query", "ps", "--cause", "X", "--effect", "Y", "--data",
        data.to_str().unwrap(), "--replicates", "50", "--output", "records",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rec = &records(&o)[0];
    assert_eq!(rec["exact"], "1/2");
    let estimate = rec["estimate"].as_f64().unwrap();
    let se = rec["stderr"].as_f64().unwrap();
    assert!((estimate - 0.5).abs() < 0.03, "{estimate}");
    assert!(se > 0.0 && se < 0.02, "{se}");
}

#[test]
fn records_are_identical_across_runs() {
    let m = model("mdagger.json");
    let args = ["eval", "--model", &m, "--formula", "X=0 & Y=0 & [X<-1](Y=1)", "--output", "records"];
    let a = cbnsem(&args);
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, cbnsem(&args).stdout);
    assert!(!stdout(&a).contains("time"));
}

#[test]
fn canon_lists_disjuncts_and_simplifications() {
    let m = model("mstar.json");
    let o = cbnsem(&["canon", "--model", &m, "--formula", "[X<-1](Y=1) | X=0", "--output", "records"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let recs = records(&o);
    assert_eq!(recs.len(), 3);
    assert!(recs.iter().any(|r| r["disjunct"] == "X=1 & [X<-1](Y=1)" && r["simplified"] == "X=1 & Y=1"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    let text = fs::read_to_string(model("mstar_halves.json")).unwrap().replacen("\"1/2\"", "\"3/4\"", 1);
    fs::write(&bad, text).unwrap();
    let o = cbnsem(&["eval", "--model", bad.to_str().unwrap(), "--formula", "X=0"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));

    let missing = dir.path().join("missing.json");
    let o = cbnsem(&["eval", "--model", missing.to_str().unwrap(), "--formula", "X=0"]);
    assert_eq!(o.status.code(), Some(6));

    let m = model("mstar_halves.json");
    let o = cbnsem(&["eval", "--model", &m, "--formula", "X=1", "--given", "X=0 & X=1"]);
    assert_eq!(o.status.code(), Some(5));

    let o = cbnsem(&["eval", "--model", &m, "--formula", "X=0 & [X<-1](Y=1)", "--cap", "1"]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}
