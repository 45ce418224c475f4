use std::fmt;

use crate::formula::Formula;
use crate::model::{Cbn, InterventionSet, VarId};
use crate::prob::format_rational;
use crate::semantics::{self, EvalOptions};

use super::{oracle_probability, FunctionalError, FunctionalModel};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditReport {
    pub name: &'static str,
    pub checks: usize,
    pub failures: Vec<String>,
}

impl AuditReport {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            checks: 0,
            failures: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for AuditReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "pass" } else { "FAIL" };
        write!(
            f,
            "{verdict} {}: {}/{} checks",
            self.name,
            self.checks - self.failures.len(),
            self.checks
        )?;
        for failure in &self.failures {
            write!(f, "\n  {failure}")?;
        }
        Ok(())
    }
}

/// One cpt entry as a formula: `[parents<-setting](V=value)`, or `V=value`
/// for a root.
struct Entry {
    var: VarId,
    setting: usize,
    value: usize,
}

impl Entry {
    fn formula(&self, cbn: &Cbn) -> Formula {
        let event = Formula::event(cbn.name(self.var), cbn.label(self.var, self.value));
        let parents = cbn.parents(self.var);
        if parents.is_empty() {
            return event;
        }
        let values = cbn.cpt(self.var).expect("cpt").setting_values(self.setting);
        let set = InterventionSet::new(
            parents
                .iter()
                .zip(values)
                .map(|(&p, x)| (cbn.name(p), cbn.label(p, x))),
        )
        .expect("parents are distinct");
        Formula::intervene(set, event)
    }

    fn value(&self, cbn: &Cbn) -> num_rational::BigRational {
        cbn.cpt(self.var).expect("cpt").entry(self.setting, self.value).clone()
    }
}

fn slots(cbn: &Cbn) -> Vec<(VarId, usize)> {
    cbn.topological_order()
        .iter()
        .filter_map(|&v| cbn.cpt(v).map(|cpt| (v, cpt.num_settings())))
        .flat_map(|(v, n)| (0..n).map(move |s| (v, s)))
        .collect()
}

/// Every cpt entry of the source network is reproduced by the oracle.
pub fn audit_compatibility(fm: &FunctionalModel, cap: u64) -> Result<AuditReport, FunctionalError> {
    let cbn = fm.source();
    let mut report = AuditReport::new("compatibility");
    for (var, setting) in slots(cbn) {
        for value in 0..cbn.domain_size(var) {
            let entry = Entry { var, setting, value };
            let f = entry.formula(cbn);
            let got = oracle_probability(fm, &f, cap)?;
            report.checks += 1;
            if *got.value() != entry.value(cbn) {
                report.failures.push(format!(
                    "Pr({f}) = {got}, cpt entry is {}",
                    format_rational(&entry.value(cbn))
                ));
            }
        }
    }
    Ok(report)
}

/// Entry formulas of distinct cpt rows are independent: the probability of
/// their conjunction is the product. Values up to the second-to-last of each
/// domain are checked; together with compatibility that fixes every pair.
pub fn audit_independence(fm: &FunctionalModel, cap: u64) -> Result<AuditReport, FunctionalError> {
    let cbn = fm.source();
    let mut report = AuditReport::new("independence");
    let all = slots(cbn);
    for (i, &(va, sa)) in all.iter().enumerate() {
        for &(vb, sb) in &all[i + 1..] {
            for a in 0..cbn.domain_size(va).saturating_sub(1) {
                for b in 0..cbn.domain_size(vb).saturating_sub(1) {
                    let ea = Entry { var: va, setting: sa, value: a };
                    let eb = Entry { var: vb, setting: sb, value: b };
                    let f = Formula::and([ea.formula(cbn), eb.formula(cbn)]);
                    let got = oracle_probability(fm, &f, cap)?;
                    let want = ea.value(cbn) * eb.value(cbn);
                    report.checks += 1;
                    if *got.value() != want {
                        report
                            .failures
                            .push(format!("Pr({f}) = {got}, product is {}", format_rational(&want)));
                    }
                }
            }
        }
    }
    Ok(report)
}

/// The oracle and the selection semantics agree on each formula.
pub fn audit_oracle_equivalence(
    fm: &FunctionalModel,
    formulas: &[Formula],
    cap: u64,
) -> Result<AuditReport, FunctionalError> {
    let cbn = fm.source();
    let mut report = AuditReport::new("oracle-equivalence");
    let options = EvalOptions { cap, prune: true };
    for f in formulas {
        let oracle = oracle_probability(fm, f, cap)?;
        report.checks += 1;
        match semantics::probability_with(cbn, f, &options) {
            Ok(p) if p == oracle => {}
            Ok(p) => report.failures.push(format!("{f}: semantics {p}, oracle {oracle}")),
            Err(e) => report.failures.push(format!("{f}: semantics failed: {e}")),
        }
    }
    Ok(report)
}
