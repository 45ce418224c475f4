use std::fmt;
use std::process::ExitCode;

use cbnsem::counterfactual::CounterfactualError;
use cbnsem::dataset::DatasetError;
use cbnsem::formula::FormulaError;
use cbnsem::functional::FunctionalError;
use cbnsem::model::FormatError;
use cbnsem::{ModelError, SemanticsError};

/// Stable process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    /// A check failed or a query's preconditions do not hold.
    Failure = 1,
    Parse = 2,
    InvalidModel = 3,
    CapExceeded = 4,
    UndefinedConditional = 5,
    Io = 6,
}

impl From<Exit> for ExitCode {
    fn from(e: Exit) -> Self {
        ExitCode::from(e as u8)
    }
}

#[derive(Debug)]
pub struct CliError {
    pub exit: Exit,
    pub message: String,
    /// Extra lines printed after the message, such as a caret or a hint.
    pub detail: Vec<String>,
}

impl CliError {
    pub fn new(exit: Exit, message: impl Into<String>) -> Self {
        Self {
            exit,
            message: message.into(),
            detail: Vec::new(),
        }
    }

    pub fn with_detail(mut self, line: impl Into<String>) -> Self {
        self.detail.push(line.into());
        self
    }

    pub fn io(path: &str, err: impl fmt::Display) -> Self {
        Self::new(Exit::Io, format!("{path}: {err}"))
    }

    /// A formula error, with a caret under `source` when the position is
    /// known.
    pub fn formula(err: FormulaError, source: &str) -> Self {
        let exit = match err {
            FormulaError::CapExceeded { .. } => Exit::CapExceeded,
            _ => Exit::Parse,
        };
        let mut out = Self::new(exit, err.to_string());
        if let Some(caret) = err.caret(source) {
            out.detail.extend(caret.lines().map(|l| format!("  {l}")));
        }
        out
    }

    pub fn semantics(err: SemanticsError, source: &str) -> Self {
        match err {
            SemanticsError::Formula(e) => Self::formula(e, source),
            SemanticsError::CapExceeded { .. } => Self::new(Exit::CapExceeded, err.to_string()),
            SemanticsError::UndefinedConditional { .. } => Self::new(Exit::UndefinedConditional, err.to_string()),
            SemanticsError::OutsideContext { .. } => Self::new(Exit::Failure, err.to_string()),
        }
    }

    pub fn functional(err: FunctionalError, source: &str) -> Self {
        match err {
            FunctionalError::Formula(e) => Self::formula(e, source),
            FunctionalError::CapExceeded { .. } => Self::new(Exit::CapExceeded, err.to_string()),
            FunctionalError::UndefinedConditional { .. } => Self::new(Exit::UndefinedConditional, err.to_string()),
        }
    }

    pub fn counterfactual(err: CounterfactualError, source: &str) -> Self {
        match err {
            CounterfactualError::Formula(e) => Self::formula(e, source),
            CounterfactualError::Model(e) => Self::new(Exit::Parse, e.to_string()),
            CounterfactualError::Dataset(e) => Self::dataset(e, "dataset"),
            CounterfactualError::CapExceeded { .. } => Self::new(Exit::CapExceeded, err.to_string()),
            CounterfactualError::UndefinedConditional { .. } => Self::new(Exit::UndefinedConditional, err.to_string()),
            CounterfactualError::NotBinary { .. }
            | CounterfactualError::NotChild { .. }
            | CounterfactualError::MediatedParent { .. }
            | CounterfactualError::MissingColumn { .. } => Self::new(Exit::Failure, err.to_string()),
        }
    }

    pub fn dataset(err: DatasetError, path: &str) -> Self {
        Self::new(Exit::Io, format!("{path}: {err}"))
    }

    pub fn model_format(err: FormatError, path: &str) -> Self {
        Self::new(Exit::InvalidModel, format!("{path}: {err}"))
    }

    pub fn model(err: ModelError, path: &str) -> Self {
        Self::new(Exit::InvalidModel, format!("{path}: {err}"))
    }
}
