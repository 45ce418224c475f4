use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use cbnsem::counterfactual::{
    closed_form, estimate_observational, Estimate, EstimateOptions, ExactFactors, Expansion,
};
use cbnsem::formula::{
    merge_same_interventions, parse_for, push_negations, simplify_disjunct, to_canonical_dnf,
};
use cbnsem::functional::{
    audit_compatibility, audit_independence, audit_oracle_equivalence, compile, export_fcm, sample,
    FunctionalModel,
};
use cbnsem::generate::{random_formula, FormulaShape};
use cbnsem::model::read_cbn;
use cbnsem::prob::format_rational;
use cbnsem::semantics::{evaluate, Evaluation, Method};
use cbnsem::{
    Cbn, CounterfactualError, CounterfactualQuery, Dataset, EvalOptions, Formula, Language, Probability,
    QueryKind, SemanticsError, Target,
};

use crate::error::{CliError, Exit};
use crate::output::{decimal, Output};
use crate::{BootstrapArgs, Cli, Command, CounterfactualArgs, EstimateArgs, FormulaArgs, QueryArgs};

type Result<T> = std::result::Result<T, CliError>;

pub fn run(cli: &Cli) -> Result<ExitCode> {
    let path = cli
        .model
        .as_deref()
        .ok_or_else(|| CliError::new(Exit::Parse, "missing --model PATH"))?;
    let cbn = load_model(path)?;
    let ctx = Context {
        cbn: &cbn,
        model_path: path,
        cap: cli.cap,
        out: Output::new(cli.output),
    };
    match &cli.command {
        Command::Eval(args) => ctx.eval(args),
        Command::Counterfactual(args) => ctx.counterfactual(args),
        Command::Compile { out } => ctx.compile(out.as_deref()),
        Command::Sample { n, seed, out } => ctx.sample(*n, *seed, out.as_deref()),
        Command::Estimate(args) => ctx.estimate(args),
        Command::Check { formulas, seed } => ctx.check(*formulas, *seed),
        Command::Canon { formula } => ctx.canon(formula),
    }
}

fn load_model(path: &Path) -> Result<Cbn> {
    let shown = path.display().to_string();
    let file = File::open(path).map_err(|e| CliError::io(&shown, e))?;
    let spec = read_cbn(BufReader::new(file)).map_err(|e| CliError::model_format(e, &shown))?;
    spec.build().map_err(|e| CliError::model(e, &shown))
}

fn load_data(path: &Path, cbn: &Cbn) -> Result<Dataset> {
    let shown = path.display().to_string();
    let file = File::open(path).map_err(|e| CliError::io(&shown, e))?;
    Dataset::read_csv(BufReader::new(file), cbn).map_err(|e| CliError::dataset(e, &shown))
}

/// Opens `path` for writing, or stdout when no path is given.
fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|e| CliError::io(&p.display().to_string(), e))?;
            Ok(Box::new(BufWriter::new(file)))
        }
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

fn exact(value: num_rational::BigRational) -> Probability {
    Probability::new(value).expect("a ratio of probabilities with a larger denominator")
}

fn rational_field(p: &Probability) -> Value {
    json!(p.to_string())
}

struct Context<'a> {
    cbn: &'a Cbn,
    model_path: &'a Path,
    cap: u64,
    out: Output,
}

impl Context<'_> {
    fn parse(&self, text: &str, language: Language) -> Result<Formula> {
        parse_for(text, self.cbn, language).map_err(|e| CliError::formula(e, text))
    }

    /// The reference enumeration when it fits under the cap, otherwise the
    /// pruned decision tree.
    fn evaluate(&self, f: &Formula, source: &str) -> Result<Evaluation> {
        let reference = EvalOptions { cap: self.cap, prune: false };
        match evaluate(self.cbn, f, &reference) {
            Err(SemanticsError::CapExceeded { .. }) => {
                evaluate(self.cbn, f, &EvalOptions { cap: self.cap, prune: true })
            }
            other => other,
        }
        .map_err(|e| CliError::semantics(e, source))
    }

    fn eval(&self, args: &FormulaArgs) -> Result<ExitCode> {
        let start = Instant::now();
        let f = self.parse(&args.formula, Language::LPlus)?;
        let given = match &args.given {
            Some(text) => Some((self.parse(text, Language::LPlus)?, text.as_str())),
            None => None,
        };

        let (probability, numerator, denominator) = match &given {
            None => {
                let e = self.evaluate(&f, &args.formula)?;
                (e.probability.clone(), e, None)
            }
            Some((g, text)) => {
                let den = self.evaluate(g, text)?;
                if den.probability.is_zero() {
                    return Err(CliError::new(
                        Exit::UndefinedConditional,
                        format!("conditioning event `{g}` has probability zero"),
                    ));
                }
                let joint = merge_same_interventions(&push_negations(&Formula::and([f.clone(), g.clone()])));
                let num = self.evaluate(&joint, &args.formula)?;
                let p = exact(num.probability.value() / den.probability.value());
                (p, num, Some(den))
            }
        };
        let query = match &given {
            Some((g, _)) => format!("Pr({f} | {g})"),
            None => format!("Pr({f})"),
        };

        self.out.line(format!("{query} = {probability}"));
        self.out.line(format!("  decimal   {}", decimal(probability.to_f64())));
        self.out.line(format!(
            "  entailing {} {}",
            numerator.entailing,
            method_label(numerator.method)
        ));
        if let Some(den) = &denominator {
            self.out.line(format!(
                "  given     {} with {} entailing",
                den.probability, den.entailing
            ));
        }
        self.out.line(format!("  time      {:.3} ms", start.elapsed().as_secs_f64() * 1e3));

        let mut record = Map::new();
        record.insert("query".into(), json!(query));
        record.insert("exact".into(), rational_field(&probability));
        record.insert("exact_decimal".into(), json!(probability.to_f64()));
        record.insert("entailing".into(), json!(numerator.entailing));
        record.insert("method".into(), json!(method_label(numerator.method)));
        record.insert("n_terms".into(), json!(numerator.entailing));
        record.insert("skipped_terms".into(), json!(0));
        self.out.record(Value::Object(record));
        Ok(ExitCode::SUCCESS)
    }

    fn query(&self, args: &QueryArgs) -> Result<CounterfactualQuery> {
        CounterfactualQuery::new(self.cbn, args.query, &args.cause, &args.effect)
            .map_err(|e| CliError::counterfactual(e, ""))
    }

    /// Rejects queries outside the closed forms with a pointer to the
    /// general evaluator.
    fn require_closed_form(&self, q: &CounterfactualQuery) -> Result<()> {
        match q.check_closed_form(self.cbn) {
            Ok(()) => Ok(()),
            Err(e @ (CounterfactualError::NotChild { .. } | CounterfactualError::MediatedParent { .. })) => {
                let target = q.target(self.cbn);
                let mut hint = format!(
                    "hint: evaluate the defining formula instead:\n  cbnsem eval --model {} --formula \"{target}\"",
                    self.model_path.display()
                );
                if let Some(given) = q.condition(self.cbn) {
                    hint.push_str(&format!(" --given \"{given}\""));
                }
                Err(CliError::counterfactual(e, "").with_detail(hint))
            }
            Err(e) => Err(CliError::counterfactual(e, "")),
        }
    }

    fn exact_expansion(&self, q: &CounterfactualQuery) -> Result<Expansion> {
        closed_form(self.cbn, &mut ExactFactors::new(self.cbn, self.cap), q, self.cap)
            .map_err(|e| CliError::counterfactual(e, ""))
    }

    fn estimate_target(&self, data: &Path, target: &Target, bootstrap: &BootstrapArgs) -> Result<Estimate> {
        let data = load_data(data, self.cbn)?;
        let options = EstimateOptions {
            replicates: bootstrap.replicates,
            seed: bootstrap.seed,
            cap: self.cap,
        };
        estimate_observational(&data, self.cbn, target, &options).map_err(|e| CliError::counterfactual(e, ""))
    }

    fn counterfactual(&self, args: &CounterfactualArgs) -> Result<ExitCode> {
        let q = self.query(&args.query)?;
        self.require_closed_form(&q)?;
        let exact = self.exact_expansion(&q)?;
        let value = self::exact(exact.value.clone());
        let label = q.describe(self.cbn);

        self.out.line(&label);
        self.out.line(format!("  exact     {value} ({})", decimal(value.to_f64())));
        self.out.line(format!(
            "  terms     {} used, {} skipped",
            exact.n_terms, exact.skipped_terms
        ));

        let mut record = Map::new();
        record.insert("query".into(), json!(label));
        record.insert("exact".into(), rational_field(&value));
        record.insert("exact_decimal".into(), json!(value.to_f64()));

        if q.kind == QueryKind::Pns {
            let identity = self.pns_identity(&q, &value)?;
            self.out.line(format!("  identity  {}", identity.0));
            record.insert("identity_holds".into(), json!(identity.1));
        }

        if let Some(path) = &args.data {
            let est = self.estimate_target(path, &Target::Query(q), &args.bootstrap)?;
            self.print_estimate(&est);
            insert_estimate(&mut record, &est);
        }
        record.insert("n_terms".into(), json!(exact.n_terms));
        record.insert("skipped_terms".into(), json!(exact.skipped_terms));
        self.out.record(Value::Object(record));
        Ok(ExitCode::SUCCESS)
    }

    /// `PS * Pr(X=0 & Y=0) + PN * Pr(X=1 & Y=1)` written out with the
    /// model's numbers, and whether it matches `pns`.
    fn pns_identity(&self, q: &CounterfactualQuery, pns: &Probability) -> Result<(String, bool)> {
        let (x, y) = (self.cbn.name(q.cause), self.cbn.name(q.effect));
        let mut total = Probability::zero().into_inner();
        let mut shown = Vec::new();
        for (kind, v) in [(QueryKind::Ps, 0), (QueryKind::Pn, 1)] {
            let (lx, ly) = (self.cbn.label(q.cause, v), self.cbn.label(q.effect, v));
            let event = Formula::and([Formula::event(x, lx), Formula::event(y, ly)]);
            let weight = self.evaluate(&event, "")?.probability;
            let part = CounterfactualQuery { kind, ..*q };
            if weight.is_zero() {
                shown.push(format!("{kind} * 0"));
                continue;
            }
            let value = self.exact_expansion(&part)?.value;
            total += &value * weight.value();
            shown.push(format!("{} * {weight}", format_rational(&value)));
        }
        let holds = &total == pns.value();
        let text = format!(
            "PS * Pr({x}={} & {y}={}) + PN * Pr({x}={} & {y}={}) = {} = {}{}",
            self.cbn.label(q.cause, 0),
            self.cbn.label(q.effect, 0),
            self.cbn.label(q.cause, 1),
            self.cbn.label(q.effect, 1),
            shown.join(" + "),
            format_rational(&total),
            if holds { "" } else { " (MISMATCH)" }
        );
        Ok((text, holds))
    }

    fn print_estimate(&self, est: &Estimate) {
        let stderr = est.stderr.map_or_else(|| "n/a".to_string(), decimal);
        self.out.line(format!(
            "  estimate  {} (stderr {stderr}, {} replicates)",
            decimal(est.to_f64()),
            est.replicates
        ));
        for missing in &est.insufficient {
            self.out.line(format!("  no data   {missing}"));
        }
    }

    fn estimate(&self, args: &EstimateArgs) -> Result<ExitCode> {
        let (label, target) = match (&args.formula, args.query) {
            (Some(text), _) => {
                let f = self.parse(text, Language::L)?;
                match &args.given {
                    Some(g) => {
                        let given = self.parse(g, Language::L)?;
                        (format!("Pr({f} | {given})"), Target::Conditional { target: f, given })
                    }
                    None => (format!("Pr({f})"), Target::Formula(f)),
                }
            }
            (None, Some(kind)) => {
                let q = self.query(&QueryArgs {
                    query: kind,
                    cause: args.cause.clone().unwrap_or_default(),
                    effect: args.effect.clone().unwrap_or_default(),
                })?;
                self.require_closed_form(&q)?;
                (q.describe(self.cbn), Target::Query(q))
            }
            (None, None) => unreachable!("clap requires --formula or --query"),
        };
        let est = self.estimate_target(&args.data, &target, &args.bootstrap)?;
        self.out.line(&label);
        self.print_estimate(&est);
        self.out.line(format!(
            "  terms     {} used, {} skipped",
            est.n_terms, est.skipped_terms
        ));

        let mut record = Map::new();
        record.insert("query".into(), json!(label));
        insert_estimate(&mut record, &est);
        record.insert("n_terms".into(), json!(est.n_terms));
        record.insert("skipped_terms".into(), json!(est.skipped_terms));
        self.out.record(Value::Object(record));
        Ok(ExitCode::SUCCESS)
    }

    fn compiled(&self) -> Result<FunctionalModel> {
        compile(self.cbn, self.cap).map_err(|e| CliError::functional(e, ""))
    }

    fn compile(&self, out: Option<&Path>) -> Result<ExitCode> {
        let fm = self.compiled()?;
        let shown = out.map_or_else(|| "stdout".to_string(), |p| p.display().to_string());
        let mut w = sink(out)?;
        export_fcm(&fm, &mut w).map_err(|e| CliError::io(&shown, e))?;
        w.flush().map_err(|e| CliError::io(&shown, e))?;
        if out.is_none() {
            return Ok(ExitCode::SUCCESS);
        }
        let functions: Vec<Value> = fm
            .tables()
            .iter()
            .map(|t| json!({ "variable": self.cbn.name(t.var), "functions": t.space().to_string() }))
            .collect();
        self.out.line(format!(
            "wrote {shown}: {} positive-measure contexts",
            fm.context_count()
        ));
        for t in fm.tables() {
            self.out.line(format!("  {}: {} response functions", self.cbn.name(t.var), t.space()));
        }
        self.out.record(json!({
            "command": "compile",
            "out": shown,
            "positive_contexts": fm.context_count().to_string(),
            "tables": functions,
        }));
        Ok(ExitCode::SUCCESS)
    }

    fn sample(&self, n: usize, seed: u64, out: Option<&Path>) -> Result<ExitCode> {
        let fm = self.compiled()?;
        let data = sample(&fm, n, seed);
        let shown = out.map_or_else(|| "stdout".to_string(), |p| p.display().to_string());
        let mut w = sink(out)?;
        data.write_csv(&mut w).map_err(|e| CliError::dataset(e, &shown))?;
        w.flush().map_err(|e| CliError::io(&shown, e))?;
        if out.is_some() {
            self.out.line(format!("wrote {n} rows to {shown} (seed {seed})"));
            self.out.record(json!({ "command": "sample", "out": shown, "rows": n, "seed": seed }));
        }
        Ok(ExitCode::SUCCESS)
    }

    fn check(&self, count: usize, seed: u64) -> Result<ExitCode> {
        let fm = self.compiled()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let formulas: Vec<Formula> = if self.cbn.endogenous().next().is_some() {
            (0..count)
                .map(|_| random_formula(&mut rng, self.cbn, &FormulaShape::default()))
                .collect()
        } else {
            Vec::new()
        };
        let reports = [
            audit_compatibility(&fm, self.cap),
            audit_independence(&fm, self.cap),
            audit_oracle_equivalence(&fm, &formulas, self.cap),
        ];
        let mut passed = true;
        for report in reports {
            let report = report.map_err(|e| CliError::functional(e, ""))?;
            passed &= report.passed();
            self.out.line(report.to_string());
            self.out.record(json!({
                "audit": report.name,
                "checks": report.checks,
                "failures": report.failures,
                "passed": report.passed(),
            }));
        }
        Ok(if passed { ExitCode::SUCCESS } else { Exit::Failure.into() })
    }

    fn canon(&self, text: &str) -> Result<ExitCode> {
        let f = self.parse(text, Language::L)?;
        let dnf = to_canonical_dnf(&f, self.cbn, self.cap).map_err(|e| CliError::formula(e, text))?;
        self.out.line(format!("{f}"));
        self.out.line(format!("{} disjuncts", dnf.disjuncts.len()));
        for (i, d) in dnf.disjuncts.iter().enumerate() {
            let simplified = simplify_disjunct(d, self.cbn).map_err(|e| CliError::formula(e, text))?;
            let shown = simplified.as_ref().map_or_else(|| "false".to_string(), ToString::to_string);
            self.out.line(format!("  [{}] {d}", i + 1));
            self.out.line(format!("      => {shown}"));
            self.out.record(json!({
                "disjunct": d.to_string(),
                "simplified": simplified.map(|s| s.to_string()),
            }));
        }
        Ok(ExitCode::SUCCESS)
    }
}

fn method_label(method: Method) -> &'static str {
    match method {
        Method::Fccces => "fccces",
        Method::Ccces => "ccces",
        Method::Pruned => "pruned",
    }
}

fn insert_estimate(record: &mut Map<String, Value>, est: &Estimate) {
    record.insert("estimate".into(), json!(est.to_f64()));
    record.insert("estimate_exact".into(), json!(format_rational(&est.value)));
    if let Some(s) = est.stderr {
        record.insert("stderr".into(), json!(s));
    }
    record.insert("replicates".into(), json!(est.replicates));
    if !est.insufficient.is_empty() {
        record.insert("insufficient".into(), json!(est.insufficient));
    }
}
