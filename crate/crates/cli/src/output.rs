use serde_json::Value;

use crate::OutputMode;

/// Chooses between human text on stdout and one JSON record per line.
#[derive(Debug, Clone, Copy)]
pub struct Output {
    mode: OutputMode,
}

impl Output {
    pub fn new(mode: OutputMode) -> Self {
        Self { mode }
    }

    pub fn human(&self) -> bool {
        self.mode == OutputMode::Human
    }

    pub fn line(&self, text: impl AsRef<str>) {
        if self.human() {
            println!("{}", text.as_ref());
        }
    }

    pub fn record(&self, record: Value) {
        if !self.human() {
            println!("{record}");
        }
    }
}

/// Six significant decimals are enough to read a probability at a glance;
/// the rational next to it is the exact value.
pub fn decimal(x: f64) -> String {
    format!("{x:.6}")
}
