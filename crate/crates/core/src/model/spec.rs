use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{topological_sort, Cbn, ContextTable, Cpt, ModelError, VarId, VarKind, Variable};
use crate::prob::format_rational;

/// One row of a declared cpt: a parent setting and a distribution over the
/// child's values. Values missing from `dist` have probability zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CptRow {
    pub given: BTreeMap<String, String>,
    pub dist: BTreeMap<String, BigRational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CptSpec {
    pub child: String,
    pub parents: Vec<String>,
    pub rows: Vec<CptRow>,
}

/// One row of a joint context table: a full exogenous assignment and its
/// probability.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextRow {
    pub values: BTreeMap<String, String>,
    pub p: BigRational,
}

/// A network as declared, before validation.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CbnSpec {
    pub variables: Vec<Variable>,
    pub cpts: Vec<CptSpec>,
    pub contexts: Option<Vec<ContextRow>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    DuplicateVariable(String),
    EmptyDomain(String),
    DuplicateValue { variable: String, value: String },
    MissingCpt(String),
    DuplicateCpt(String),
    CptForUnknownVariable(String),
    UnknownParent { child: String, parent: String },
    DuplicateParent { child: String, parent: String },
    ExogenousWithParents(String),
    Cycle(Vec<String>),
    MissingRow { child: String, setting: String },
    DuplicateRow { child: String, setting: String },
    MalformedRow { child: String, detail: String },
    UnknownValue { variable: String, value: String },
    NegativeEntry { child: String, setting: String },
    RowSum { child: String, setting: String, sum: BigRational },
    ContextOnEndogenous(String),
    ContextWithCpt(String),
    ContextMalformedRow(String),
    ContextDuplicateRow(String),
    ContextSum(BigRational),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            DuplicateVariable(v) => write!(f, "variable `{v}` declared twice"),
            EmptyDomain(v) => write!(f, "variable `{v}` has an empty domain"),
            DuplicateValue { variable, value } => {
                write!(f, "value `{value}` repeated in the domain of `{variable}`")
            }
            MissingCpt(v) => write!(f, "no cpt for `{v}`"),
            DuplicateCpt(v) => write!(f, "two cpts for `{v}`"),
            CptForUnknownVariable(v) => write!(f, "cpt for undeclared variable `{v}`"),
            UnknownParent { child, parent } => write!(f, "`{child}` has unknown parent `{parent}`"),
            DuplicateParent { child, parent } => write!(f, "`{child}` lists parent `{parent}` twice"),
            ExogenousWithParents(v) => write!(f, "exogenous variable `{v}` has parents"),
            Cycle(vs) => write!(f, "cycle through {}", vs.join(", ")),
            MissingRow { child, setting } => write!(f, "cpt of `{child}` has no row for {setting}"),
            DuplicateRow { child, setting } => write!(f, "cpt of `{child}` repeats the row for {setting}"),
            MalformedRow { child, detail } => write!(f, "cpt of `{child}`: {detail}"),
            UnknownValue { variable, value } => {
                write!(f, "value `{value}` is not in the domain of `{variable}`")
            }
            NegativeEntry { child, setting } => {
                write!(f, "cpt of `{child}` has a negative entry at {setting}")
            }
            RowSum { child, setting, sum } => write!(
                f,
                "row sum ≠ 1 in cpt of `{child}` at {setting} (sum {})",
                format_rational(sum)
            ),
            ContextOnEndogenous(v) => write!(f, "context table mentions endogenous `{v}`"),
            ContextWithCpt(v) => write!(f, "exogenous `{v}` has both a cpt and a context-table column"),
            ContextMalformedRow(d) => write!(f, "context table row {d}"),
            ContextDuplicateRow(d) => write!(f, "context table repeats {d}"),
            ContextSum(sum) => write!(f, "context table sums to {} ≠ 1", format_rational(sum)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

fn describe_setting(names: &[String], labels: &[&str]) -> String {
    if names.is_empty() {
        return "(no parents)".to_string();
    }
    let parts: Vec<String> = names
        .iter()
        .zip(labels)
        .map(|(n, l)| format!("{n}={l}"))
        .collect();
    format!("({})", parts.join(", "))
}

impl CbnSpec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_variable(&mut self, variable: Variable) -> &mut Self {
        self.variables.push(variable);
        self
    }

    /// Adds a cpt whose rows are listed in mixed-radix order of the parent
    /// settings (first parent most significant), each row in domain order.
    /// Parents and child must already be declared.
    pub fn add_table(&mut self, child: &str, parents: &[&str], rows: Vec<Vec<BigRational>>) -> &mut Self {
        let lookup = |name: &str| -> &Variable {
            self.variables
                .iter()
                .find(|v| v.name == name)
                .unwrap_or_else(|| panic!("add_table: `{name}` is not declared"))
        };
        let child_domain = lookup(child).domain.clone();
        let parent_domains: Vec<Vec<String>> = parents.iter().map(|p| lookup(p).domain.clone()).collect();
        let radices: Vec<usize> = parent_domains.iter().map(Vec::len).collect();
        let mut spec_rows = Vec::with_capacity(rows.len());
        for (index, row) in rows.into_iter().enumerate() {
            let values = super::setting_values(&radices, index);
            let given = parents
                .iter()
                .zip(&values)
                .zip(&parent_domains)
                .map(|((p, &v), d)| (p.to_string(), d[v].clone()))
                .collect();
            let dist = child_domain.iter().cloned().zip(row).collect();
            spec_rows.push(CptRow { given, dist });
        }
        self.cpts.push(CptSpec {
            child: child.to_string(),
            parents: parents.iter().map(|p| p.to_string()).collect(),
            rows: spec_rows,
        });
        self
    }

    pub fn set_contexts(&mut self, rows: Vec<ContextRow>) -> &mut Self {
        self.contexts = Some(rows);
        self
    }

    /// Variables in topological order (ties by declaration order), computed
    /// from the declared parent lists.
    pub fn topological_order(&self) -> Result<Vec<String>, ModelError> {
        let index: HashMap<&str, usize> = self
            .variables
            .iter()
            .enumerate()
            .map(|(i, v)| (v.name.as_str(), i))
            .collect();
        let mut parents = vec![Vec::new(); self.variables.len()];
        for cpt in &self.cpts {
            let Some(&c) = index.get(cpt.child.as_str()) else { continue };
            for p in &cpt.parents {
                let &p = index
                    .get(p.as_str())
                    .ok_or_else(|| ModelError::UnknownVariable(p.clone()))?;
                parents[c].push(VarId(p));
            }
        }
        topological_sort(&parents)
            .map(|order| order.iter().map(|v| self.variables[v.0].name.clone()).collect())
            .map_err(|stuck| ModelError::Cycle(stuck.iter().map(|v| self.variables[v.0].name.clone()).collect()))
    }

    pub fn validate(&self) -> ValidationReport {
        match self.check() {
            Ok(_) => ValidationReport::default(),
            Err(violations) => ValidationReport { violations },
        }
    }

    pub fn build(&self) -> Result<Cbn, ModelError> {
        self.check()
            .map_err(|violations| ModelError::Invalid(ValidationReport { violations }))
    }

    fn check(&self) -> Result<Cbn, Vec<Violation>> {
        let mut out = Vec::new();
        let mut index: HashMap<&str, VarId> = HashMap::new();
        for (i, v) in self.variables.iter().enumerate() {
            if index.insert(v.name.as_str(), VarId(i)).is_some() {
                out.push(Violation::DuplicateVariable(v.name.clone()));
            }
            if v.domain.is_empty() {
                out.push(Violation::EmptyDomain(v.name.clone()));
            }
            let mut seen = HashSet::new();
            for value in &v.domain {
                if !seen.insert(value) {
                    out.push(Violation::DuplicateValue {
                        variable: v.name.clone(),
                        value: value.clone(),
                    });
                }
            }
        }
        if !out.is_empty() {
            return Err(out);
        }

        let n = self.variables.len();
        let context_vars: Vec<VarId> = match &self.contexts {
            None => Vec::new(),
            Some(rows) => {
                let mut names: Vec<&str> = rows
                    .iter()
                    .flat_map(|r| r.values.keys().map(String::as_str))
                    .collect();
                names.sort();
                names.dedup();
                let mut ids = Vec::new();
                for name in names {
                    match index.get(name) {
                        None => out.push(Violation::ContextMalformedRow(format!("names unknown variable `{name}`"))),
                        Some(&id) if self.variables[id.0].kind == VarKind::Endogenous => {
                            out.push(Violation::ContextOnEndogenous(name.to_string()))
                        }
                        Some(&id) => ids.push(id),
                    }
                }
                ids.sort();
                ids
            }
        };

        let mut parents: Vec<Vec<VarId>> = vec![Vec::new(); n];
        let mut cpt_of: Vec<Option<&CptSpec>> = vec![None; n];
        for cpt in &self.cpts {
            let Some(&child) = index.get(cpt.child.as_str()) else {
                out.push(Violation::CptForUnknownVariable(cpt.child.clone()));
                continue;
            };
            if cpt_of[child.0].is_some() {
                out.push(Violation::DuplicateCpt(cpt.child.clone()));
                continue;
            }
            cpt_of[child.0] = Some(cpt);
            for p in &cpt.parents {
                match index.get(p.as_str()) {
                    None => out.push(Violation::UnknownParent {
                        child: cpt.child.clone(),
                        parent: p.clone(),
                    }),
                    Some(&pid) if parents[child.0].contains(&pid) => out.push(Violation::DuplicateParent {
                        child: cpt.child.clone(),
                        parent: p.clone(),
                    }),
                    Some(&pid) => parents[child.0].push(pid),
                }
            }
            if self.variables[child.0].is_exogenous() && !cpt.parents.is_empty() {
                out.push(Violation::ExogenousWithParents(cpt.child.clone()));
            }
        }
        for (i, v) in self.variables.iter().enumerate() {
            let in_context = context_vars.contains(&VarId(i));
            match (cpt_of[i].is_some(), in_context) {
                (false, false) => out.push(Violation::MissingCpt(v.name.clone())),
                (true, true) => out.push(Violation::ContextWithCpt(v.name.clone())),
                _ => {}
            }
        }
        if let Err(stuck) = topological_sort(&parents) {
            out.push(Violation::Cycle(
                stuck.iter().map(|v| self.variables[v.0].name.clone()).collect(),
            ));
        }

        let mut cpts: Vec<Option<Cpt>> = vec![None; n];
        for (i, spec) in cpt_of.iter().enumerate() {
            if let Some(spec) = spec {
                if let Some(cpt) = self.check_rows(VarId(i), spec, &parents[i], &mut out) {
                    cpts[i] = Some(cpt);
                }
            }
        }
        let context = self
            .contexts
            .as_ref()
            .and_then(|rows| self.check_context(rows, &context_vars, &mut out));

        if !out.is_empty() {
            return Err(out);
        }
        Cbn::assemble(self.variables.clone(), parents, cpts, context).map_err(|e| match e {
            ModelError::Cycle(vs) => vec![Violation::Cycle(vs)],
            other => vec![Violation::MalformedRow {
                child: String::new(),
                detail: other.to_string(),
            }],
        })
    }

    fn check_rows(&self, child: VarId, spec: &CptSpec, parents: &[VarId], out: &mut Vec<Violation>) -> Option<Cpt> {
        if parents.len() != spec.parents.len() {
            return None;
        }
        let child_var = &self.variables[child.0];
        let radices: Vec<usize> = parents.iter().map(|p| self.variables[p.0].domain.len()).collect();
        let total: usize = radices.iter().product();
        let mut rows: Vec<Option<Vec<BigRational>>> = vec![None; total];
        let before = out.len();
        for row in &spec.rows {
            let mut values = Vec::with_capacity(parents.len());
            let mut ok = true;
            if row.given.len() != parents.len() {
                out.push(Violation::MalformedRow {
                    child: spec.child.clone(),
                    detail: format!("row conditions on {} variables, expected {}", row.given.len(), parents.len()),
                });
                continue;
            }
            for &p in parents {
                let pv = &self.variables[p.0];
                match row.given.get(&pv.name) {
                    None => {
                        out.push(Violation::MalformedRow {
                            child: spec.child.clone(),
                            detail: format!("row does not give a value for parent `{}`", pv.name),
                        });
                        ok = false;
                    }
                    Some(label) => match pv.value_index(label) {
                        Some(i) => values.push(i),
                        None => {
                            out.push(Violation::UnknownValue {
                                variable: pv.name.clone(),
                                value: label.clone(),
                            });
                            ok = false;
                        }
                    },
                }
            }
            if !ok {
                continue;
            }
            let labels: Vec<&str> = parents
                .iter()
                .zip(&values)
                .map(|(p, &v)| self.variables[p.0].domain[v].as_str())
                .collect();
            let setting = describe_setting(&spec.parents, &labels);
            let mut dist = vec![BigRational::zero(); child_var.domain.len()];
            for (label, p) in &row.dist {
                match child_var.value_index(label) {
                    Some(i) => dist[i] = p.clone(),
                    None => {
                        out.push(Violation::UnknownValue {
                            variable: child_var.name.clone(),
                            value: label.clone(),
                        });
                        ok = false;
                    }
                }
            }
            if !ok {
                continue;
            }
            if dist.iter().any(|p| p.is_negative()) {
                out.push(Violation::NegativeEntry {
                    child: spec.child.clone(),
                    setting: setting.clone(),
                });
            }
            let sum: BigRational = dist.iter().sum();
            if !sum.is_one() {
                out.push(Violation::RowSum {
                    child: spec.child.clone(),
                    setting: setting.clone(),
                    sum,
                });
            }
            let idx = super::setting_index(&radices, &values);
            if rows[idx].is_some() {
                out.push(Violation::DuplicateRow {
                    child: spec.child.clone(),
                    setting,
                });
            } else {
                rows[idx] = Some(dist);
            }
        }
        for (idx, row) in rows.iter().enumerate() {
            if row.is_none() {
                let values = super::setting_values(&radices, idx);
                let labels: Vec<&str> = parents
                    .iter()
                    .zip(&values)
                    .map(|(p, &v)| self.variables[p.0].domain[v].as_str())
                    .collect();
                out.push(Violation::MissingRow {
                    child: spec.child.clone(),
                    setting: describe_setting(&spec.parents, &labels),
                });
            }
        }
        if out.len() != before {
            return None;
        }
        Some(Cpt::new(
            parents.to_vec(),
            radices,
            rows.into_iter().map(Option::unwrap).collect(),
        ))
    }

    fn check_context(&self, rows: &[ContextRow], vars: &[VarId], out: &mut Vec<Violation>) -> Option<ContextTable> {
        let before = out.len();
        let mut table: Vec<(Vec<usize>, BigRational)> = Vec::new();
        for row in rows {
            if row.values.len() != vars.len() {
                out.push(Violation::ContextMalformedRow(format!(
                    "assigns {} variables, expected {}",
                    row.values.len(),
                    vars.len()
                )));
                continue;
            }
            let mut values = Vec::with_capacity(vars.len());
            for &v in vars {
                let var = &self.variables[v.0];
                match row.values.get(&var.name).and_then(|l| var.value_index(l)) {
                    Some(i) => values.push(i),
                    None => out.push(Violation::ContextMalformedRow(format!(
                        "has no valid value for `{}`",
                        var.name
                    ))),
                }
            }
            if values.len() != vars.len() {
                continue;
            }
            if row.p.is_negative() {
                out.push(Violation::ContextMalformedRow("has a negative probability".into()));
            }
            if table.iter().any(|(k, _)| *k == values) {
                out.push(Violation::ContextDuplicateRow(format!("{:?}", row.values)));
                continue;
            }
            table.push((values, row.p.clone()));
        }
        let sum: BigRational = table.iter().map(|(_, p)| p).sum();
        if !sum.is_one() {
            out.push(Violation::ContextSum(sum));
        }
        (out.len() == before).then(|| ContextTable {
            vars: vars.to_vec(),
            rows: table,
        })
    }
}

pub(super) fn spec_from_cbn(cbn: &Cbn) -> CbnSpec {
    let mut spec = CbnSpec {
        variables: cbn.variables().to_vec(),
        cpts: Vec::new(),
        contexts: None,
    };
    for v in cbn.ids() {
        let Some(cpt) = cbn.cpt(v) else { continue };
        let parent_names: Vec<String> = cpt.parents().iter().map(|&p| cbn.name(p).to_string()).collect();
        let rows = (0..cpt.num_settings())
            .map(|s| {
                let values = cpt.setting_values(s);
                CptRow {
                    given: cpt
                        .parents()
                        .iter()
                        .zip(&values)
                        .map(|(&p, &x)| (cbn.name(p).to_string(), cbn.label(p, x).to_string()))
                        .collect(),
                    dist: cbn
                        .variable(v)
                        .domain
                        .iter()
                        .cloned()
                        .zip(cpt.row(s).iter().cloned())
                        .collect(),
                }
            })
            .collect();
        spec.cpts.push(CptSpec {
            child: cbn.name(v).to_string(),
            parents: parent_names,
            rows,
        });
    }
    if let Some(table) = cbn.context_table() {
        spec.contexts = Some(
            table
                .rows()
                .iter()
                .map(|(values, p)| ContextRow {
                    values: table
                        .vars()
                        .iter()
                        .zip(values)
                        .map(|(&v, &x)| (cbn.name(v).to_string(), cbn.label(v, x).to_string()))
                        .collect(),
                    p: p.clone(),
                })
                .collect(),
        );
    }
    spec
}
