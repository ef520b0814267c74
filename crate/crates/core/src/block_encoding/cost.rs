use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Symbolic query-cost record attached to a composed encoding.
///
/// `factor` multiplies the cost of the input encoding(s); `queries` is the
/// resulting count in units of `oracle` calls. Logarithms are floored at 1 so
/// that every recorded factor stays positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostEstimate {
    pub formula_id: String,
    pub expression: String,
    pub oracle: String,
    pub factor: f64,
    pub queries: f64,
    pub factors: BTreeMap<String, f64>,
}

impl CostEstimate {
    pub fn new(formula_id: &str, expression: &str, oracle: &str, factor: f64, queries: f64) -> Self {
        Self {
            formula_id: formula_id.into(),
            expression: expression.into(),
            oracle: oracle.into(),
            factor,
            queries,
            factors: BTreeMap::new(),
        }
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.factors.insert(name.into(), value);
        self
    }

    /// Checks that `factor` and `queries` are positive and finite and every
    /// named factor is finite and nonnegative.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("factor", self.factor), ("queries", self.queries)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Numerical(format!(
                    "cost `{}` has non-positive or non-finite {name} = {v}",
                    self.formula_id
                )));
            }
        }
        for (name, &v) in &self.factors {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Numerical(format!(
                    "cost `{}` has negative or non-finite factor {name} = {v}",
                    self.formula_id
                )));
            }
        }
        Ok(())
    }
}

/// `max(1, ln x)`.
pub fn log_factor(x: f64) -> f64 {
    x.ln().max(1.0)
}
