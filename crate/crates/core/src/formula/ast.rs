use std::fmt;

use crate::model::{Cbn, InterventionSet};

use super::FormulaError;

/// A primitive event `X=x`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Event {
    pub var: String,
    pub value: String,
}

impl Event {
    pub fn new(var: impl Into<String>, value: impl Into<String>) -> Self {
        Self {
            var: var.into(),
            value: value.into(),
        }
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.var, self.value)
    }
}

/// A causal formula: Boolean combinations of primitive events and
/// intervention modalities `[V<-v, ...](φ)` whose body contains no further
/// modality.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Event(Event),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Do(InterventionSet, Box<Formula>),
}

/// Which variables a formula may mention. `L` restricts events and
/// interventions to endogenous variables; `LPlus` also allows exogenous ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Language {
    L,
    LPlus,
}

impl Formula {
    pub fn event(var: impl Into<String>, value: impl Into<String>) -> Self {
        Formula::Event(Event::new(var, value))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(fs: impl IntoIterator<Item = Formula>) -> Self {
        Formula::And(fs.into_iter().collect())
    }

    pub fn or(fs: impl IntoIterator<Item = Formula>) -> Self {
        Formula::Or(fs.into_iter().collect())
    }

    pub fn intervene(set: InterventionSet, body: Formula) -> Self {
        Formula::Do(set, Box::new(body))
    }

    /// `X=x | !(X=x)` for the first value of the first endogenous variable
    /// (or the first variable when none is endogenous).
    pub fn tautology(cbn: &Cbn) -> Self {
        let v = cbn.endogenous().next().unwrap_or(crate::model::VarId(0));
        let e = Formula::event(cbn.name(v), cbn.label(v, 0));
        Formula::or([e.clone(), Formula::not(e)])
    }

    pub fn is_simple(&self) -> bool {
        match self {
            Formula::Event(_) => true,
            Formula::Not(f) => f.is_simple(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().all(Formula::is_simple),
            Formula::Do(..) => false,
        }
    }

    /// Every intervention set appearing in the formula, in order of first
    /// appearance.
    pub fn intervention_sets(&self) -> Vec<&InterventionSet> {
        let mut out = Vec::new();
        self.collect_sets(&mut out);
        out
    }

    fn collect_sets<'a>(&'a self, out: &mut Vec<&'a InterventionSet>) {
        match self {
            Formula::Event(_) => {}
            Formula::Not(f) => f.collect_sets(out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.collect_sets(out)),
            Formula::Do(set, body) => {
                if !out.contains(&set) {
                    out.push(set);
                }
                body.collect_sets(out);
            }
        }
    }

    pub fn events(&self) -> Vec<&Event> {
        let mut out = Vec::new();
        self.collect_events(&mut out);
        out
    }

    fn collect_events<'a>(&'a self, out: &mut Vec<&'a Event>) {
        match self {
            Formula::Event(e) => out.push(e),
            Formula::Not(f) | Formula::Do(_, f) => f.collect_events(out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.collect_events(out)),
        }
    }

    /// Checks names and values against `cbn` and enforces the language
    /// restriction and the no-nesting rule.
    pub fn check(&self, cbn: &Cbn, language: Language) -> Result<(), FormulaError> {
        self.check_inner(cbn, language, false)
    }

    fn check_inner(&self, cbn: &Cbn, language: Language, under_do: bool) -> Result<(), FormulaError> {
        match self {
            Formula::Event(e) => check_assignment(cbn, language, &e.var, &e.value),
            Formula::Not(f) => f.check_inner(cbn, language, under_do),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().try_for_each(|f| f.check_inner(cbn, language, under_do)),
            Formula::Do(set, body) => {
                if under_do {
                    return Err(FormulaError::NestedIntervention { position: None });
                }
                for (var, value) in set.iter() {
                    check_assignment(cbn, language, var, value)?;
                }
                body.check_inner(cbn, language, true)
            }
        }
    }

    /// Number of primitive-event occurrences.
    pub fn size(&self) -> usize {
        self.events().len()
    }
}

fn check_assignment(cbn: &Cbn, language: Language, var: &str, value: &str) -> Result<(), FormulaError> {
    let id = cbn
        .id(var)
        .ok_or_else(|| FormulaError::UnknownVariable(var.to_string()))?;
    if cbn.variable(id).value_index(value).is_none() {
        return Err(FormulaError::UnknownValue {
            variable: var.to_string(),
            value: value.to_string(),
        });
    }
    if language == Language::L && cbn.is_exogenous(id) {
        return Err(FormulaError::ExogenousInL(var.to_string()));
    }
    Ok(())
}

const PREC_OR: u8 = 1;
const PREC_AND: u8 = 2;
const PREC_UNARY: u8 = 3;

impl Formula {
    fn precedence(&self) -> u8 {
        match self {
            Formula::Or(_) => PREC_OR,
            Formula::And(_) => PREC_AND,
            _ => PREC_UNARY,
        }
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, context: u8) -> fmt::Result {
        // Operands of the same connective are parenthesised too, so nested
        // conjunctions survive a print/parse round trip unflattened.
        let own = self.precedence();
        let wrap = match self {
            Formula::And(_) | Formula::Or(_) => own <= context,
            _ => false,
        };
        if wrap {
            f.write_str("(")?;
        }
        match self {
            Formula::Event(e) => write!(f, "{e}")?,
            Formula::Not(inner) => {
                f.write_str("!")?;
                inner.write(f, PREC_UNARY)?;
            }
            Formula::And(fs) => write_joined(f, fs, " & ", PREC_AND)?,
            Formula::Or(fs) => write_joined(f, fs, " | ", PREC_OR)?,
            Formula::Do(set, body) => {
                write!(f, "[{set}](")?;
                body.write(f, 0)?;
                f.write_str(")")?;
            }
        }
        if wrap {
            f.write_str(")")?;
        }
        Ok(())
    }
}

fn write_joined(f: &mut fmt::Formatter<'_>, fs: &[Formula], sep: &str, prec: u8) -> fmt::Result {
    for (i, child) in fs.iter().enumerate() {
        if i > 0 {
            f.write_str(sep)?;
        }
        child.write(f, prec)?;
    }
    Ok(())
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, 0)
    }
}
