//! Tabular reports of evaluated inequalities.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Outcome of one assertion made while building a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Both sides of an inequality over a grid of inputs, with optional extra
/// columns, provenance and the assertions made on them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub grid_columns: Vec<String>,
    pub grid: Vec<Vec<f64>>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    /// `max lhs / rhs` over rows with `rhs > 0`.
    pub ratio_sup: f64,
    pub pinned_constant: Option<f64>,
    pub seed: Option<u64>,
    pub replicates: Option<usize>,
    pub tolerances: BTreeMap<String, f64>,
    pub extra_columns: Vec<String>,
    /// Row-major values for `extra_columns`.
    pub extra: Vec<Vec<f64>>,
    pub metadata: BTreeMap<String, String>,
    pub checks: Vec<Check>,
}

impl BoundReport {
    pub fn new(name: &str, grid_columns: &[&str], extra_columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            grid_columns: grid_columns.iter().map(|s| s.to_string()).collect(),
            grid: Vec::new(),
            lhs: Vec::new(),
            rhs: Vec::new(),
            ratio_sup: 0.0,
            pinned_constant: None,
            seed: None,
            replicates: None,
            tolerances: BTreeMap::new(),
            extra_columns: extra_columns.iter().map(|s| s.to_string()).collect(),
            extra: Vec::new(),
            metadata: BTreeMap::new(),
            checks: Vec::new(),
        }
    }

    /// Appends a row; all values must be finite.
    pub fn push(&mut self, grid: Vec<f64>, lhs: f64, rhs: f64, extra: Vec<f64>) -> Result<()> {
        if grid.len() != self.grid_columns.len() || extra.len() != self.extra_columns.len() {
            return Err(Error::InvalidInput(format!("row shape does not match report {}", self.name)));
        }
        if let Some(bad) = grid.iter().chain([&lhs, &rhs]).chain(&extra).find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite value {bad} in report {}", self.name)));
        }
        if rhs > 0.0 {
            self.ratio_sup = self.ratio_sup.max(lhs / rhs);
        }
        self.grid.push(grid);
        self.lhs.push(lhs);
        self.rhs.push(rhs);
        self.extra.push(extra);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.lhs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lhs.is_empty()
    }

    /// Row ratio, `0` when both sides vanish and `+inf` when only `rhs` does.
    pub fn ratio(&self, row: usize) -> f64 {
        let (l, r) = (self.lhs[row], self.rhs[row]);
        if r > 0.0 {
            l / r
        } else if l <= 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }

    /// Values of an extra column.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.extra_columns.iter().position(|c| c == name)?;
        Some(self.extra.iter().map(|row| row[i]).collect())
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.to_string(), passed, detail: detail.into() });
    }

    /// Checks that every row satisfies `lhs <= rhs * (1 + rel) + abs`.
    pub fn check_dominance(&mut self, name: &str, rel: f64, abs: f64) {
        let worst = (0..self.len())
            .filter(|&i| self.lhs[i] > self.rhs[i] * (1.0 + rel) + abs)
            .collect::<Vec<_>>();
        let detail = match worst.first() {
            None => format!("{} rows, ratio_sup {}", self.len(), format_number(self.ratio_sup)),
            Some(&i) => format!(
                "{} of {} rows violate; first at row {i}: lhs {} > rhs {}",
                worst.len(),
                self.len(),
                format_number(self.lhs[i]),
                format_number(self.rhs[i])
            ),
        };
        self.check(name, worst.is_empty(), detail);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// CSV with a `# key: value` provenance header. Column order is the grid
    /// columns, then `lhs`, `rhs`, `ratio`, then the extra columns.
    pub fn to_csv(&self) -> Result<String> {
        let mut out = String::new();
        let mut header = |k: &str, v: &str| out.push_str(&format!("# {k}: {v}\n"));
        header("report", &self.name);
        header("ratio_sup", &format_number(self.ratio_sup));
        if let Some(c) = self.pinned_constant {
            header("pinned_constant", &format_number(c));
        }
        if let Some(s) = self.seed {
            header("seed", &s.to_string());
        }
        if let Some(r) = self.replicates {
            header("replicates", &r.to_string());
        }
        for (k, v) in &self.tolerances {
            header(&format!("tolerance.{k}"), &format_number(*v));
        }
        for (k, v) in &self.metadata {
            header(k, v);
        }
        for c in &self.checks {
            header(&format!("check.{}", c.name), &format!("{} ({})", if c.passed { "PASS" } else { "FAIL" }, c.detail));
        }
        let mut writer = csv::Writer::from_writer(Vec::new());
        let columns: Vec<&str> = self
            .grid_columns
            .iter()
            .map(String::as_str)
            .chain(["lhs", "rhs", "ratio"])
            .chain(self.extra_columns.iter().map(String::as_str))
            .collect();
        writer.write_record(&columns).map_err(csv_error)?;
        for i in 0..self.len() {
            let record: Vec<String> = self.grid[i]
                .iter()
                .copied()
                .chain([self.lhs[i], self.rhs[i], self.ratio(i)])
                .chain(self.extra[i].iter().copied())
                .map(format_number)
                .collect();
            writer.write_record(&record).map_err(csv_error)?;
        }
        let body = writer.into_inner().map_err(|e| Error::InvalidInput(e.to_string()))?;
        out.push_str(&String::from_utf8(body).map_err(|e| Error::InvalidInput(e.to_string()))?);
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::InvalidInput(e.to_string()))
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::InvalidInput(e.to_string())
}

/// Shortest round-trip form; integers are written without an exponent.
pub fn format_number(x: f64) -> String {
    if x.is_finite() && x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x:e}")
    }
}
