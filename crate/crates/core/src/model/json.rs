//! The `cbn/1` JSON model format.
//!
//! ```json
//! {
//!   "format": "cbn/1",
//!   "variables": [{"name": "U", "kind": "exogenous", "domain": ["0", "1"]}],
//!   "cpts": [{"child": "U", "parents": [],
//!             "rows": [{"given": {}, "dist": {"0": "1/2", "1": "0.5"}}]}],
//!   "contexts": [{"values": {"U": "0"}, "p": "1/2"}]
//! }
//! ```
//!
//! `contexts` is optional and replaces the cpts of the exogenous variables it
//! mentions. Probabilities may be rational strings, decimal strings or JSON
//! numbers; all are read exactly.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use num_rational::BigRational;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use super::{ContextRow, CptRow, CptSpec, CbnSpec, Variable};
use crate::prob::{format_rational, parse_rational};

pub const CBN_FORMAT: &str = "cbn/1";

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed model file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported model format `{0}` (expected `cbn/1`)")]
    Version(String),
}

#[derive(Serialize, Deserialize)]
struct Document {
    format: String,
    variables: Vec<Variable>,
    cpts: Vec<CptDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    contexts: Option<Vec<ContextDoc>>,
}

#[derive(Serialize, Deserialize)]
struct CptDoc {
    child: String,
    #[serde(default)]
    parents: Vec<String>,
    rows: Vec<RowDoc>,
}

#[derive(Serialize, Deserialize)]
struct RowDoc {
    #[serde(default)]
    given: BTreeMap<String, String>,
    dist: BTreeMap<String, Rational>,
}

#[derive(Serialize, Deserialize)]
struct ContextDoc {
    values: BTreeMap<String, String>,
    p: Rational,
}

struct Rational(BigRational);

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(&self.0))
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Text {
            S(String),
            N(serde_json::Number),
        }
        let text = match Text::deserialize(d)? {
            Text::S(s) => s,
            Text::N(n) => n.to_string(),
        };
        parse_rational(&text).map(Rational).map_err(serde::de::Error::custom)
    }
}

/// Reads a `cbn/1` document. The result is not validated; call
/// [`CbnSpec::build`] or [`CbnSpec::validate`] on it.
pub fn read_cbn<R: Read>(reader: R) -> Result<CbnSpec, FormatError> {
    let doc: Document = serde_json::from_reader(reader)?;
    if doc.format != CBN_FORMAT {
        return Err(FormatError::Version(doc.format));
    }
    Ok(CbnSpec {
        variables: doc.variables,
        cpts: doc
            .cpts
            .into_iter()
            .map(|c| CptSpec {
                child: c.child,
                parents: c.parents,
                rows: c
                    .rows
                    .into_iter()
                    .map(|r| CptRow {
                        given: r.given,
                        dist: r.dist.into_iter().map(|(k, v)| (k, v.0)).collect(),
                    })
                    .collect(),
            })
            .collect(),
        contexts: doc.contexts.map(|rows| {
            rows.into_iter()
                .map(|r| ContextRow {
                    values: r.values,
                    p: r.p.0,
                })
                .collect()
        }),
    })
}

pub fn write_cbn<W: Write>(spec: &CbnSpec, writer: W) -> Result<(), FormatError> {
    let doc = Document {
        format: CBN_FORMAT.to_string(),
        variables: spec.variables.clone(),
        cpts: spec
            .cpts
            .iter()
            .map(|c| CptDoc {
                child: c.child.clone(),
                parents: c.parents.clone(),
                rows: c
                    .rows
                    .iter()
                    .map(|r| RowDoc {
                        given: r.given.clone(),
                        dist: r.dist.iter().map(|(k, v)| (k.clone(), Rational(v.clone()))).collect(),
                    })
                    .collect(),
            })
            .collect(),
        contexts: spec.contexts.as_ref().map(|rows| {
            rows.iter()
                .map(|r| ContextDoc {
                    values: r.values.clone(),
                    p: Rational(r.p.clone()),
                })
                .collect()
        }),
    };
    serde_json::to_writer_pretty(writer, &doc)?;
    Ok(())
}
