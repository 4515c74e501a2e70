//! Column-major numeric design matrix with a response vector.

use crate::error::{Error, Result};

/// A dataset: p named predictor columns of equal length plus a response.
/// The response is continuous for linear models and 0/1 for binary ones.
#[derive(Debug, Clone)]
pub struct Dataset {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
    response: Vec<f64>,
}

impl Dataset {
    pub fn new(names: Vec<String>, columns: Vec<Vec<f64>>, response: Vec<f64>) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(Error::domain(format!(
                "{} names for {} columns",
                names.len(),
                columns.len()
            )));
        }
        let n = response.len();
        if columns.iter().any(|c| c.len() != n) {
            return Err(Error::domain("all columns must match the response length"));
        }
        Ok(Dataset { names, columns, response })
    }

    /// Builds a dataset with generated names x1..xp.
    pub fn unnamed(columns: Vec<Vec<f64>>, response: Vec<f64>) -> Result<Self> {
        let names = (1..=columns.len()).map(|k| format!("x{k}")).collect();
        Dataset::new(names, columns, response)
    }

    pub fn n_rows(&self) -> usize {
        self.response.len()
    }

    pub fn n_vars(&self) -> usize {
        self.columns.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, k: usize) -> &[f64] {
        &self.columns[k]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn response(&self) -> &[f64] {
        &self.response
    }

    /// Copies out the rows in `rows` (columns plus response), preserving
    /// their order.
    pub fn restrict(&self, rows: &[usize]) -> (Vec<Vec<f64>>, Vec<f64>) {
        let cols = self
            .columns
            .iter()
            .map(|c| rows.iter().map(|&i| c[i]).collect())
            .collect();
        let y = rows.iter().map(|&i| self.response[i]).collect();
        (cols, y)
    }
}
