use std::fmt;

use num_rational::BigRational;

use crate::model::{Cbn, VarId};

/// One place where a selection chooses an outcome: a cpt row (a variable
/// together with one setting of its parents), or the joint context table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SlotKind {
    Cpt { var: VarId, setting: usize },
    Context,
}

/// Slot layout of a network. The context slot, when present, comes first;
/// cpt slots follow in topological order of their variable, settings in
/// mixed-radix order.
#[derive(Debug, Clone)]
pub(crate) struct Slots {
    pub kinds: Vec<SlotKind>,
    base: Vec<Option<usize>>,
    pub context: Option<usize>,
}

impl Slots {
    pub fn new(cbn: &Cbn) -> Self {
        let mut kinds = Vec::new();
        let mut base = vec![None; cbn.len()];
        let mut context = None;
        if cbn.context_table().is_some() {
            context = Some(0);
            kinds.push(SlotKind::Context);
        }
        for &var in cbn.topological_order() {
            if let Some(cpt) = cbn.cpt(var) {
                base[var.0] = Some(kinds.len());
                kinds.extend((0..cpt.num_settings()).map(|setting| SlotKind::Cpt { var, setting }));
            }
        }
        Self { kinds, base, context }
    }

    pub fn len(&self) -> usize {
        self.kinds.len()
    }

    pub fn slot_of(&self, var: VarId, setting: usize) -> usize {
        self.base[var.0].expect("variable has a cpt") + setting
    }

    pub fn options(&self, cbn: &Cbn, slot: usize) -> usize {
        match self.kinds[slot] {
            SlotKind::Cpt { var, .. } => cbn.domain_size(var),
            SlotKind::Context => cbn.context_table().map_or(0, |t| t.rows().len()),
        }
    }

    pub fn weight<'a>(&self, cbn: &'a Cbn, slot: usize, option: usize) -> &'a BigRational {
        match self.kinds[slot] {
            SlotKind::Cpt { var, setting } => cbn.cpt(var).expect("cpt slot").entry(setting, option),
            SlotKind::Context => &cbn.context_table().expect("context slot").rows()[option].1,
        }
    }

    /// Slots that fix exogenous values: the context slot, or the single slot
    /// of every parentless exogenous variable.
    pub fn exogenous_slots(&self, cbn: &Cbn) -> Vec<usize> {
        (0..self.len())
            .filter(|&s| match self.kinds[s] {
                SlotKind::Context => true,
                SlotKind::Cpt { var, .. } => cbn.is_exogenous(var),
            })
            .collect()
    }

    /// Value of exogenous `var` implied by the exogenous slot choices.
    pub fn exogenous_value(&self, cbn: &Cbn, choice: &[Option<usize>], var: VarId) -> Option<usize> {
        if cbn.in_context_table(var) {
            let table = cbn.context_table()?;
            let row = choice[self.context?]?;
            let pos = table.vars().iter().position(|&u| u == var)?;
            Some(table.rows()[row].0[pos])
        } else {
            choice[self.slot_of(var, 0)]
        }
    }

    pub fn describe(&self, cbn: &Cbn, slot: usize, option: usize) -> Conjunct {
        match self.kinds[slot] {
            SlotKind::Cpt { var, setting } => {
                let cpt = cbn.cpt(var).expect("cpt slot");
                let given = cbn
                    .parents(var)
                    .iter()
                    .zip(cpt.setting_values(setting))
                    .map(|(&p, v)| (cbn.name(p).to_string(), cbn.label(p, v).to_string()))
                    .collect();
                Conjunct::Event(ConditionalEvent {
                    child: cbn.name(var).to_string(),
                    value: cbn.label(var, option).to_string(),
                    given,
                })
            }
            SlotKind::Context => {
                let table = cbn.context_table().expect("context slot");
                let row = &table.rows()[option].0;
                Conjunct::Context(
                    table
                        .vars()
                        .iter()
                        .zip(row)
                        .map(|(&u, &v)| (cbn.name(u).to_string(), cbn.label(u, v).to_string()))
                        .collect(),
                )
            }
        }
    }
}

/// `child=value` given a full setting of the child's parents.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConditionalEvent {
    pub child: String,
    pub value: String,
    pub given: Vec<(String, String)>,
}

impl fmt::Display for ConditionalEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.child, self.value)?;
        for (i, (p, v)) in self.given.iter().enumerate() {
            f.write_str(if i == 0 { " | " } else { ", " })?;
            write!(f, "{p}={v}")?;
        }
        Ok(())
    }
}

/// One conjunct of a ccce: a conditional event, or a full context drawn from
/// the joint context table.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Conjunct {
    Event(ConditionalEvent),
    Context(Vec<(String, String)>),
}

impl fmt::Display for Conjunct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Conjunct::Event(e) => write!(f, "{e}"),
            Conjunct::Context(values) => {
                f.write_str("context(")?;
                for (i, (u, v)) in values.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{u}={v}")?;
                }
                f.write_str(")")
            }
        }
    }
}
