//! The causal formula languages `L` and `L+`.
//!
//! Concrete syntax:
//!
//! ```text
//! formula := or
//! or      := and ('|' and)*
//! and     := unary ('&' unary)*
//! unary   := '!' unary | atom
//! atom    := event | do | '(' formula ')'
//! do      := '[' assign (',' assign)* ']' '(' formula ')'
//! assign  := IDENT '<-' VALUE
//! event   := IDENT '=' VALUE
//! ```
//!
//! [`parse`] checks syntax only. [`Formula::check`] (or [`parse_for`]) binds
//! names against a network and enforces the language restriction.

mod ast;
mod dnf;
mod normal;
mod parser;

use thiserror::Error;

use crate::model::{Cbn, ModelError};

pub use ast::{Event, Formula, Language};
pub use dnf::{
    simplify_disjunct, to_canonical_dnf, CanonicalDnf, Disjunct, InterventionPart, DEFAULT_LITERAL_CAP,
};
pub(crate) use dnf::canonical_indexed;
pub use normal::{merge_same_interventions, push_negations};
pub use parser::parse;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("syntax error at {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("{}", nested_message(*.position))]
    NestedIntervention { position: Option<usize> },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("value `{value}` is not in the domain of `{variable}`")]
    UnknownValue { variable: String, value: String },
    #[error("exogenous variable `{0}` is not allowed in language L")]
    ExogenousInL(String),
    #[error("variable `{0}` is assigned twice in one intervention")]
    DuplicateIntervention(String),
    #[error("canonical DNF needs more than {cap} literals")]
    CapExceeded { cap: u64 },
}

fn nested_message(position: Option<usize>) -> String {
    match position {
        Some(p) => format!("nested intervention at {p}: an intervention body must be intervention-free"),
        None => "nested intervention: an intervention body must be intervention-free".to_string(),
    }
}

impl FormulaError {
    /// Byte offset into the source text, for syntax-level errors.
    pub fn position(&self) -> Option<usize> {
        match self {
            FormulaError::Syntax { position, .. } => Some(*position),
            FormulaError::NestedIntervention { position } => *position,
            _ => None,
        }
    }

    /// The source line with a caret under the error position, if the error
    /// carries one.
    pub fn caret(&self, source: &str) -> Option<String> {
        let pos = self.position()?;
        let column = source[..pos.min(source.len())].chars().count();
        Some(format!("{source}\n{}^", " ".repeat(column)))
    }
}

impl From<ModelError> for FormulaError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::UnknownVariable(v) => FormulaError::UnknownVariable(v),
            ModelError::UnknownValue { variable, value } => FormulaError::UnknownValue { variable, value },
            ModelError::DuplicateIntervention(v) => FormulaError::DuplicateIntervention(v),
            other => FormulaError::Syntax {
                position: 0,
                message: other.to_string(),
            },
        }
    }
}

/// Parses `text` and checks it against `cbn` under `language`.
pub fn parse_for(text: &str, cbn: &Cbn, language: Language) -> Result<Formula, FormulaError> {
    let f = parse(text)?;
    f.check(cbn, language)?;
    Ok(f)
}
