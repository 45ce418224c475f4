//! Recursive causal Bayesian networks.
//!
//! A network is declared as a [`CbnSpec`] (names, domains, cpts as written in
//! a model file) and becomes a [`Cbn`] once it passes validation. The
//! validated form is index based: variables are addressed by [`VarId`] in
//! declaration order, and every cpt row is addressed by a mixed-radix parent
//! setting index with the first parent most significant.

mod intervention;
mod json;
mod spec;

use std::collections::{BTreeSet, HashMap};

use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

pub use intervention::InterventionSet;
pub use json::{read_cbn, write_cbn, FormatError, CBN_FORMAT};
pub use spec::{ContextRow, CptRow, CptSpec, CbnSpec, ValidationReport, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarKind {
    Exogenous,
    Endogenous,
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub domain: Vec<String>,
}

impl Variable {
    pub fn new(name: impl Into<String>, kind: VarKind, domain: &[&str]) -> Self {
        Self {
            name: name.into(),
            kind,
            domain: domain.iter().map(|v| v.to_string()).collect(),
        }
    }

    pub fn is_exogenous(&self) -> bool {
        self.kind == VarKind::Exogenous
    }

    pub fn value_index(&self, label: &str) -> Option<usize> {
        self.domain.iter().position(|v| v == label)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("invalid model: {0}")]
    Invalid(ValidationReport),
    #[error("cycle among variables {0:?}")]
    Cycle(Vec<String>),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("value `{value}` is not in the domain of `{variable}`")]
    UnknownValue { variable: String, value: String },
    #[error("variable `{0}` is assigned twice in one intervention")]
    DuplicateIntervention(String),
}

/// A conditional probability table: one distribution over the child's domain
/// per parent setting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cpt {
    parents: Vec<VarId>,
    radices: Vec<usize>,
    rows: Vec<Vec<BigRational>>,
}

impl Cpt {
    pub(crate) fn new(parents: Vec<VarId>, radices: Vec<usize>, rows: Vec<Vec<BigRational>>) -> Self {
        debug_assert_eq!(rows.len(), radices.iter().product::<usize>());
        Self { parents, radices, rows }
    }

    fn point_mass(domain_size: usize, value: usize) -> Self {
        let mut row = vec![BigRational::zero(); domain_size];
        row[value] = BigRational::one();
        Self::new(Vec::new(), Vec::new(), vec![row])
    }

    pub fn parents(&self) -> &[VarId] {
        &self.parents
    }

    pub fn num_settings(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<BigRational>] {
        &self.rows
    }

    pub fn row(&self, setting: usize) -> &[BigRational] {
        &self.rows[setting]
    }

    pub fn entry(&self, setting: usize, value: usize) -> &BigRational {
        &self.rows[setting][value]
    }

    /// Mixed-radix index of a parent setting given in parent order.
    pub fn setting_index(&self, parent_values: &[usize]) -> usize {
        setting_index(&self.radices, parent_values)
    }

    pub fn setting_values(&self, index: usize) -> Vec<usize> {
        setting_values(&self.radices, index)
    }
}

pub(crate) fn setting_index(radices: &[usize], values: &[usize]) -> usize {
    values
        .iter()
        .zip(radices)
        .fold(0, |acc, (&v, &r)| acc * r + v)
}

pub(crate) fn setting_values(radices: &[usize], mut index: usize) -> Vec<usize> {
    let mut out = vec![0; radices.len()];
    for (slot, &r) in out.iter_mut().zip(radices).rev() {
        *slot = index % r;
        index /= r;
    }
    out
}

/// A single joint distribution over full assignments of the exogenous
/// variables, used in place of independent exogenous cpts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextTable {
    vars: Vec<VarId>,
    rows: Vec<(Vec<usize>, BigRational)>,
}

impl ContextTable {
    pub fn vars(&self) -> &[VarId] {
        &self.vars
    }

    pub fn rows(&self) -> &[(Vec<usize>, BigRational)] {
        &self.rows
    }

    fn marginalize_out(&self, drop: VarId) -> Option<ContextTable> {
        let keep: Vec<usize> = (0..self.vars.len()).filter(|&i| self.vars[i] != drop).collect();
        if keep.is_empty() {
            return None;
        }
        let mut merged: Vec<(Vec<usize>, BigRational)> = Vec::new();
        for (values, p) in &self.rows {
            let key: Vec<usize> = keep.iter().map(|&i| values[i]).collect();
            match merged.iter_mut().find(|(k, _)| *k == key) {
                Some((_, q)) => *q += p,
                None => merged.push((key, p.clone())),
            }
        }
        Some(ContextTable {
            vars: keep.iter().map(|&i| self.vars[i]).collect(),
            rows: merged,
        })
    }
}

/// A validated causal Bayesian network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cbn {
    variables: Vec<Variable>,
    index: HashMap<String, VarId>,
    parents: Vec<Vec<VarId>>,
    cpts: Vec<Option<Cpt>>,
    context: Option<ContextTable>,
    topo: Vec<VarId>,
    children: Vec<Vec<VarId>>,
    descendants: Vec<Vec<bool>>,
}

impl Cbn {
    pub(crate) fn assemble(
        variables: Vec<Variable>,
        parents: Vec<Vec<VarId>>,
        cpts: Vec<Option<Cpt>>,
        context: Option<ContextTable>,
    ) -> Result<Self, ModelError> {
        let index = variables
            .iter()
            .enumerate()
            .map(|(i, v)| (v.name.clone(), VarId(i)))
            .collect();
        let topo = topological_sort(&parents).map_err(|stuck| {
            ModelError::Cycle(stuck.iter().map(|v| variables[v.0].name.clone()).collect())
        })?;
        let n = variables.len();
        let mut children = vec![Vec::new(); n];
        for (child, ps) in parents.iter().enumerate() {
            for p in ps {
                children[p.0].push(VarId(child));
            }
        }
        let mut descendants = vec![vec![false; n]; n];
        for &v in topo.iter().rev() {
            let mut row = vec![false; n];
            for &c in &children[v.0] {
                row[c.0] = true;
                for (i, &d) in descendants[c.0].iter().enumerate() {
                    row[i] |= d;
                }
            }
            descendants[v.0] = row;
        }
        Ok(Self {
            variables,
            index,
            parents,
            cpts,
            context,
            topo,
            children,
            descendants,
        })
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn ids(&self) -> impl Iterator<Item = VarId> + '_ {
        (0..self.variables.len()).map(VarId)
    }

    pub fn variable(&self, id: VarId) -> &Variable {
        &self.variables[id.0]
    }

    pub fn name(&self, id: VarId) -> &str {
        &self.variables[id.0].name
    }

    pub fn id(&self, name: &str) -> Option<VarId> {
        self.index.get(name).copied()
    }

    pub fn require(&self, name: &str) -> Result<VarId, ModelError> {
        self.id(name)
            .ok_or_else(|| ModelError::UnknownVariable(name.to_string()))
    }

    pub fn domain_size(&self, id: VarId) -> usize {
        self.variables[id.0].domain.len()
    }

    pub fn label(&self, id: VarId, value: usize) -> &str {
        &self.variables[id.0].domain[value]
    }

    pub fn value_index(&self, id: VarId, label: &str) -> Result<usize, ModelError> {
        self.variables[id.0]
            .value_index(label)
            .ok_or_else(|| ModelError::UnknownValue {
                variable: self.variables[id.0].name.clone(),
                value: label.to_string(),
            })
    }

    pub fn is_exogenous(&self, id: VarId) -> bool {
        self.variables[id.0].is_exogenous()
    }

    pub fn exogenous(&self) -> impl Iterator<Item = VarId> + '_ {
        self.ids().filter(|&v| self.is_exogenous(v))
    }

    pub fn endogenous(&self) -> impl Iterator<Item = VarId> + '_ {
        self.ids().filter(|&v| !self.is_exogenous(v))
    }

    pub fn parents(&self, id: VarId) -> &[VarId] {
        &self.parents[id.0]
    }

    pub fn children(&self, id: VarId) -> &[VarId] {
        &self.children[id.0]
    }

    /// The cpt of `id`, or `None` when the variable is covered by the joint
    /// context table.
    pub fn cpt(&self, id: VarId) -> Option<&Cpt> {
        self.cpts[id.0].as_ref()
    }

    pub fn context_table(&self) -> Option<&ContextTable> {
        self.context.as_ref()
    }

    pub fn in_context_table(&self, id: VarId) -> bool {
        self.cpts[id.0].is_none()
    }

    /// Variables in topological order, ties broken by declaration order.
    pub fn topological_order(&self) -> &[VarId] {
        &self.topo
    }

    /// Whether `candidate` is a strict descendant of `ancestor`.
    pub fn is_descendant(&self, candidate: VarId, ancestor: VarId) -> bool {
        self.descendants[ancestor.0][candidate.0]
    }

    pub fn descendants(&self, id: VarId) -> impl Iterator<Item = VarId> + '_ {
        self.descendants[id.0]
            .iter()
            .enumerate()
            .filter(|(_, &d)| d)
            .map(|(i, _)| VarId(i))
    }

    /// Ancestors of `targets`, including the targets themselves.
    pub fn ancestral_closure(&self, targets: impl IntoIterator<Item = VarId>) -> BTreeSet<VarId> {
        let mut out = BTreeSet::new();
        let mut stack: Vec<VarId> = targets.into_iter().collect();
        while let Some(v) = stack.pop() {
            if out.insert(v) {
                stack.extend(self.parents(v).iter().copied());
            }
        }
        out
    }

    /// Probability that `var` takes `value` given the full parent setting
    /// `parent_values` (in parent order). Variables in the joint context
    /// table have no cpt and yield `None`.
    pub fn entry(&self, var: VarId, parent_values: &[usize], value: usize) -> Option<&BigRational> {
        let cpt = self.cpt(var)?;
        Some(cpt.entry(cpt.setting_index(parent_values), value))
    }

    /// Resolves an intervention set against this network.
    pub fn bind_interventions(&self, set: &InterventionSet) -> Result<Vec<(VarId, usize)>, ModelError> {
        let mut out = Vec::with_capacity(set.len());
        for (name, label) in set.iter() {
            let id = self.require(name)?;
            out.push((id, self.value_index(id, label)?));
        }
        out.sort();
        Ok(out)
    }

    /// The do-transformation: each intervened variable loses its parents and
    /// gets a point-mass cpt on its assigned value. Exogenous variables may be
    /// intervened on as well.
    pub fn intervene(&self, set: &InterventionSet) -> Result<Cbn, ModelError> {
        let assignments = self.bind_interventions(set)?;
        let mut parents = self.parents.clone();
        let mut cpts = self.cpts.clone();
        let mut context = self.context.clone();
        for (var, value) in assignments {
            parents[var.0].clear();
            cpts[var.0] = Some(Cpt::point_mass(self.domain_size(var), value));
            if let Some(table) = &context {
                if table.vars.contains(&var) {
                    context = table.marginalize_out(var);
                }
            }
        }
        Cbn::assemble(self.variables.clone(), parents, cpts, context)
    }

    /// Number of full assignments to all variables.
    pub fn world_count(&self) -> u128 {
        self.variables
            .iter()
            .fold(1u128, |acc, v| acc.saturating_mul(v.domain.len() as u128))
    }

    pub fn to_spec(&self) -> CbnSpec {
        spec::spec_from_cbn(self)
    }
}

/// Kahn's algorithm, always emitting the lowest-indexed ready variable.
/// On a cycle, returns the variables that could not be placed.
pub(crate) fn topological_sort(parents: &[Vec<VarId>]) -> Result<Vec<VarId>, Vec<VarId>> {
    let n = parents.len();
    let mut placed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let next = (0..n).find(|&v| !placed[v] && parents[v].iter().all(|p| placed[p.0]));
        match next {
            Some(v) => {
                placed[v] = true;
                order.push(VarId(v));
            }
            None => return Err((0..n).filter(|&v| !placed[v]).map(VarId).collect()),
        }
    }
    Ok(order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{m_dagger, m_star as chain, rat};

    #[test]
    fn chain_order() {
        let m = chain(rat(1, 2), rat(1, 2), rat(1, 2), rat(1, 2), rat(1, 2));
        let names: Vec<&str> = m.topological_order().iter().map(|&v| m.name(v)).collect();
        assert_eq!(names, ["U", "X", "Y"]);
    }

    #[test]
    fn m_dagger_order() {
        let m = m_dagger(&std::array::from_fn(|_| rat(1, 2)));
        let names: Vec<&str> = m.topological_order().iter().map(|&v| m.name(v)).collect();
        assert_eq!(names, ["U", "X", "Y"]);
    }

    #[test]
    fn independent_roots_keep_declaration_order() {
        let mut spec = CbnSpec::new();
        spec.add_variable(Variable::new("B", VarKind::Endogenous, &["0", "1"]));
        spec.add_variable(Variable::new("A", VarKind::Endogenous, &["0", "1"]));
        spec.add_table("B", &[], vec![vec![rat(1, 2), rat(1, 2)]]);
        spec.add_table("A", &[], vec![vec![rat(1, 2), rat(1, 2)]]);
        assert_eq!(spec.topological_order().unwrap(), ["B", "A"]);

        let mut spec = CbnSpec::new();
        spec.add_variable(Variable::new("A", VarKind::Endogenous, &["0", "1"]));
        spec.add_variable(Variable::new("B", VarKind::Endogenous, &["0", "1"]));
        spec.add_table("A", &[], vec![vec![rat(1, 2), rat(1, 2)]]);
        spec.add_table("B", &[], vec![vec![rat(1, 2), rat(1, 2)]]);
        assert_eq!(spec.topological_order().unwrap(), ["A", "B"]);
    }

    #[test]
    fn setting_index_is_first_parent_major() {
        let radices = [2, 3];
        assert_eq!(setting_index(&radices, &[1, 2]), 5);
        assert_eq!(setting_values(&radices, 4), vec![1, 1]);
        for i in 0..6 {
            assert_eq!(setting_index(&radices, &setting_values(&radices, i)), i);
        }
    }

    #[test]
    fn intervene_replaces_mechanism_only() {
        let m = chain(rat(1, 3), rat(1, 4), rat(1, 5), rat(1, 6), rat(1, 7));
        let x = m.id("X").unwrap();
        let y = m.id("Y").unwrap();
        let iv = InterventionSet::new([("X", "1")]).unwrap();
        let done = m.intervene(&iv).unwrap();
        assert!(done.parents(x).is_empty());
        assert_eq!(done.cpt(x).unwrap().rows(), &[vec![rat(0, 1), rat(1, 1)]]);
        assert_eq!(done.cpt(y), m.cpt(y));
        // the source network is untouched
        assert_eq!(m.parents(x).len(), 1);
    }

    #[test]
    fn intervene_on_exogenous_gives_point_mass() {
        let m = m_dagger(&[rat(1, 3), rat(1, 2), rat(1, 2), rat(1, 2), rat(1, 2), rat(1, 2), rat(1, 2)]);
        let u = m.id("U").unwrap();
        let done = m.intervene(&InterventionSet::new([("U", "0")]).unwrap()).unwrap();
        assert_eq!(done.cpt(u).unwrap().rows(), &[vec![rat(1, 1), rat(0, 1)]]);
    }

    #[test]
    fn intervene_rejects_bad_targets() {
        let m = chain(rat(1, 2), rat(1, 2), rat(1, 2), rat(1, 2), rat(1, 2));
        assert!(matches!(
            m.intervene(&InterventionSet::new([("Q", "1")]).unwrap()),
            Err(ModelError::UnknownVariable(_))
        ));
        assert!(matches!(
            m.intervene(&InterventionSet::new([("X", "7")]).unwrap()),
            Err(ModelError::UnknownValue { .. })
        ));
    }

    #[test]
    fn descendants_are_strict() {
        let m = m_dagger(&std::array::from_fn(|_| rat(1, 2)));
        let (u, x, y) = (m.id("U").unwrap(), m.id("X").unwrap(), m.id("Y").unwrap());
        assert!(m.is_descendant(y, u));
        assert!(m.is_descendant(x, u));
        assert!(m.is_descendant(y, x));
        assert!(!m.is_descendant(x, x));
        assert!(!m.is_descendant(u, y));
    }
}
