use std::fmt::Write as _;
use std::time::Duration;

use super::RangeEstimate;

/// One pass of the segmentation loop.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// `|Lambda^(i)|` entering the iteration.
    pub candidates: usize,
    /// Pixels of `Lambda^(i+1)` that were not in `Lambda^(i)`.
    pub recruited: usize,
    pub range: RangeEstimate,
    pub elapsed: Duration,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationStats {
    omega: usize,
    ndim: usize,
    records: Vec<IterationRecord>,
}

impl IterationStats {
    pub fn new(omega: usize, ndim: usize) -> Self {
        Self {
            omega,
            ndim,
            records: Vec::new(),
        }
    }

    pub(crate) fn push(&mut self, record: IterationRecord) {
        self.records.push(record);
    }

    /// `|Omega|`.
    pub fn omega(&self) -> usize {
        self.omega
    }

    pub fn ndim(&self) -> usize {
        self.ndim
    }

    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn records(&self) -> &[IterationRecord] {
        &self.records
    }

    /// `|Lambda^(i)|` for every iteration followed by the final 0.
    pub fn cardinalities(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self.records.iter().map(|r| r.candidates).collect();
        out.push(0);
        out
    }

    pub fn total_time(&self) -> Duration {
        self.records.iter().map(|r| r.elapsed).sum()
    }

    /// Cardinality table: a header with `|Omega|`, then one `i = k` row per
    /// iteration, ending with the empty set.
    ///
    /// ```text
    /// |Omega| = 65536
    /// i      |Lambda(i)|
    /// i = 0  2791
    /// i = 1  904
    /// i = 2  0
    /// ```
    pub fn to_table(&self) -> String {
        let rows: Vec<(String, usize)> = self
            .cardinalities()
            .into_iter()
            .enumerate()
            .map(|(i, n)| (format!("i = {i}"), n))
            .collect();
        let width = rows.iter().map(|r| r.0.len()).max().unwrap_or(0).max(1);
        let mut s = String::new();
        let _ = writeln!(s, "|Omega| = {}", self.omega);
        let _ = writeln!(s, "{:<width$}  |Lambda(i)|", "i");
        for (label, n) in rows {
            let _ = writeln!(s, "{label:<width$}  {n}");
        }
        s
    }

    /// `key = value` lines. Wall times are left out so the output only
    /// depends on the input.
    pub fn to_key_value(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "omega = {}", self.omega);
        let _ = writeln!(s, "ndim = {}", self.ndim);
        let _ = writeln!(s, "iterations = {}", self.records.len());
        for r in &self.records {
            let k = r.iteration;
            let g = &r.range;
            let _ = writeln!(s, "iter.{k}.candidates = {}", r.candidates);
            let _ = writeln!(s, "iter.{k}.recruited = {}", r.recruited);
            let _ = writeln!(s, "iter.{k}.mu = {}", g.mu);
            let _ = writeln!(s, "iter.{k}.mu_minus = {}", g.mu_minus);
            let _ = writeln!(s, "iter.{k}.mu_plus = {}", g.mu_plus);
            let _ = writeln!(s, "iter.{k}.alpha = {}", g.alpha);
            let _ = writeln!(s, "iter.{k}.beta = {}", g.beta);
            if let (Some(m), Some(big_m)) = (g.min_in_range, g.max_in_range) {
                let _ = writeln!(s, "iter.{k}.m = {m}");
                let _ = writeln!(s, "iter.{k}.M = {big_m}");
            }
        }
        let _ = writeln!(s, "final.candidates = 0");
        s
    }
}
