//! Tabular observational data.
//!
//! Values are stored as domain indices. A dataset may carry exact rational
//! row weights; the exhaustive "perfect" dataset built from a functional
//! model uses them so that plug-in estimates are exact.

use std::io::{Read, Write};

use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::model::Cbn;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("column `{0}` is not a variable of the model")]
    UnknownColumn(String),
    #[error("column `{0}` appears twice")]
    DuplicateColumn(String),
    #[error("line {line}: value `{value}` is not in the domain of `{column}`")]
    UnknownValue { line: u64, column: String, value: String },
    #[error("the dataset has no rows")]
    Empty,
    #[error("the dataset has no column `{0}`")]
    MissingColumn(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    columns: Vec<String>,
    domains: Vec<Vec<String>>,
    rows: Vec<Vec<usize>>,
    weights: Option<Vec<BigRational>>,
}

impl Dataset {
    pub fn new(columns: Vec<String>, domains: Vec<Vec<String>>) -> Self {
        assert_eq!(columns.len(), domains.len());
        Self {
            columns,
            domains,
            rows: Vec::new(),
            weights: None,
        }
    }

    /// An empty dataset with one column per variable of `cbn`, in
    /// declaration order.
    pub fn for_model(cbn: &Cbn) -> Self {
        Self::new(
            cbn.variables().iter().map(|v| v.name.clone()).collect(),
            cbn.variables().iter().map(|v| v.domain.clone()).collect(),
        )
    }

    pub fn push(&mut self, row: Vec<usize>) {
        debug_assert_eq!(row.len(), self.columns.len());
        if let Some(w) = &mut self.weights {
            w.push(BigRational::one());
        }
        self.rows.push(row);
    }

    pub fn push_weighted(&mut self, row: Vec<usize>, weight: BigRational) {
        debug_assert_eq!(row.len(), self.columns.len());
        let n = self.rows.len();
        self.weights
            .get_or_insert_with(|| vec![BigRational::one(); n])
            .push(weight);
        self.rows.push(row);
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn domain(&self, column: usize) -> &[String] {
        &self.domains[column]
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn require_column(&self, name: &str) -> Result<usize, DatasetError> {
        self.column(name)
            .ok_or_else(|| DatasetError::MissingColumn(name.to_string()))
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn is_weighted(&self) -> bool {
        self.weights.is_some()
    }

    pub fn weight(&self, row: usize) -> BigRational {
        self.weights
            .as_ref()
            .map_or_else(BigRational::one, |w| w[row].clone())
    }

    pub fn total_weight(&self) -> BigRational {
        match &self.weights {
            Some(w) => w.iter().fold(BigRational::zero(), |acc, x| acc + x),
            None => BigRational::from_integer(self.rows.len().into()),
        }
    }

    /// Reads CSV with a header row naming variables of `cbn`. Values must be
    /// labels from the declared domains.
    pub fn read_csv<R: Read>(reader: R, cbn: &Cbn) -> Result<Self, DatasetError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let mut ids = Vec::with_capacity(header.len());
        for (i, name) in header.iter().enumerate() {
            if header[..i].contains(name) {
                return Err(DatasetError::DuplicateColumn(name.clone()));
            }
            ids.push(cbn.id(name).ok_or_else(|| DatasetError::UnknownColumn(name.clone()))?);
        }
        let domains = ids.iter().map(|&v| cbn.variable(v).domain.clone()).collect();
        let mut data = Dataset::new(header, domains);
        for record in rdr.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line());
            let mut row = Vec::with_capacity(ids.len());
            for (i, field) in record.iter().enumerate() {
                let value = cbn
                    .variable(ids[i])
                    .value_index(field)
                    .ok_or_else(|| DatasetError::UnknownValue {
                        line,
                        column: data.columns[i].clone(),
                        value: field.to_string(),
                    })?;
                row.push(value);
            }
            data.rows.push(row);
        }
        if data.rows.is_empty() {
            return Err(DatasetError::Empty);
        }
        Ok(data)
    }

    /// Writes CSV with a header row; row weights are not written.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), DatasetError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().enumerate().map(|(i, &v)| self.domains[i][v].as_str()))?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}
