use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::space::{doubling_radii, fit_doubling, MetricMeasureSpace};
use crate::weights::{ap_constant, conjugate, rh_constant, Weight};

pub const SCHEMA_VERSION: &str = "v1";

/// Default threshold separating "moderate" from "large" weight constants.
pub const DEFAULT_TAU: f64 = 1e3;

/// One CSV row: a measured constant at one parameter point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub scenario: String,
    pub n_pts: usize,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub s: Option<f64>,
    pub beta: Option<f64>,
    pub constant: Option<f64>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub pass: bool,
    pub hypothesis: String,
}

impl ReportRow {
    pub fn new(scenario: &str, n_pts: usize) -> Self {
        Self {
            scenario: scenario.to_string(),
            n_pts,
            p: None,
            q: None,
            s: None,
            beta: None,
            constant: None,
            lower: None,
            upper: None,
            pass: true,
            hypothesis: "n/a".to_string(),
        }
    }
}

/// A named pass/fail judgment against a declared threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `value <= threshold`.
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            pass: value <= threshold,
        }
    }

    /// Passes when `value >= threshold`.
    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            pass: value >= threshold,
        }
    }

    pub fn flag(name: impl Into<String>, pass: bool) -> Self {
        let v = if pass { 1.0 } else { 0.0 };
        Self {
            name: name.into(),
            value: v,
            threshold: 1.0,
            pass,
        }
    }
}

/// Multiplier-theorem hypotheses evaluated for a concrete space and weight:
/// `s > n/2`, `r_0 = max(1, 2(n+D)/(2s+D))`, `p > r_0` and
/// `A_{p/r_0}` constant below `tau`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hypothesis {
    pub n: f64,
    pub d_growth: f64,
    pub s: f64,
    pub p: f64,
    pub r0: f64,
    pub weight_constant: f64,
    pub tau: f64,
    pub s_ok: bool,
    pub p_ok: bool,
    pub weight_ok: bool,
}

impl Hypothesis {
    pub fn holds(&self) -> bool {
        self.s_ok && self.p_ok && self.weight_ok
    }

    /// For power weights `|x|^β` the class is decided by the exponent:
    /// marks the weight as outside unless `lo < β < hi`.
    pub fn with_power_range(mut self, beta: f64, lo: f64, hi: f64) -> Self {
        self.weight_ok &= lo < beta && beta < hi;
        self
    }

    /// `in`, or `out:` followed by the failed conditions.
    pub fn flag(&self) -> String {
        if self.holds() {
            return "in".to_string();
        }
        let mut failed = Vec::new();
        if !self.s_ok {
            failed.push("s<=n/2");
        }
        if !self.p_ok {
            failed.push("p<=r0");
        }
        if !self.weight_ok {
            failed.push("w-not-in-A_{p/r0}");
        }
        format!("out:{}", failed.join("+"))
    }
}

/// `r_0 = max(1, 2(n+D)/(2s+D))`.
pub fn r0(n: f64, d_growth: f64, s: f64) -> f64 {
    (2.0 * (n + d_growth) / (2.0 * s + d_growth)).max(1.0)
}

/// Checks the hypotheses of the weighted multiplier theorem for `(s, p, w)`
/// with `(n, D)` fitted from `space`.
pub fn check_hypothesis(
    space: &MetricMeasureSpace,
    s: f64,
    p: f64,
    w: &Weight,
    tau: f64,
) -> Result<Hypothesis> {
    let fit = fit_doubling(space, &doubling_radii(space))?;
    hypothesis_with(space, fit.exponent_n, fit.exponent_d, s, p, w, tau)
}

/// [`check_hypothesis`] with given `(n, D)`.
pub fn hypothesis_with(
    space: &MetricMeasureSpace,
    n: f64,
    d_growth: f64,
    s: f64,
    p: f64,
    w: &Weight,
    tau: f64,
) -> Result<Hypothesis> {
    let r = r0(n, d_growth, s);
    let weight_constant = if p >= r {
        ap_constant(space, w, p / r)?
    } else {
        f64::INFINITY
    };
    Ok(Hypothesis {
        n,
        d_growth,
        s,
        p,
        r0: r,
        weight_constant,
        tau,
        s_ok: s > n / 2.0,
        p_ok: p > r,
        weight_ok: weight_constant <= tau,
    })
}

/// Hypotheses of the dual range: `1 < p < r_0'` and
/// `w ∈ A_p ∩ RH_{(r_0'/p)'}`.
pub fn dual_range_hypothesis(
    space: &MetricMeasureSpace,
    n: f64,
    d_growth: f64,
    s: f64,
    p: f64,
    w: &Weight,
    tau: f64,
) -> Result<Hypothesis> {
    let r = r0(n, d_growth, s);
    let r_conj = conjugate(r);
    let p_ok = p > 1.0 && p < r_conj;
    let weight_constant = if p_ok {
        let ap = ap_constant(space, w, p)?;
        let rh = rh_constant(space, w, conjugate(r_conj / p))?;
        ap.max(rh)
    } else {
        f64::INFINITY
    };
    Ok(Hypothesis {
        n,
        d_growth,
        s,
        p,
        r0: r,
        weight_constant,
        tau,
        s_ok: s > n / 2.0,
        p_ok,
        weight_ok: weight_constant <= tau,
    })
}

/// Scenario output: parameters, measured rows, threshold checks and the
/// grids every sup was taken over.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub schema: &'static str,
    pub scenario: String,
    pub seed: u64,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub grids: BTreeMap<String, Vec<f64>>,
    pub hypotheses: Vec<Hypothesis>,
    pub rows: Vec<ReportRow>,
    pub checks: Vec<Check>,
    pub witnesses: BTreeMap<String, serde_json::Value>,
    pub pass: bool,
}

impl VerificationReport {
    pub fn new(scenario: &str, seed: u64) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            scenario: scenario.to_string(),
            seed,
            parameters: BTreeMap::new(),
            grids: BTreeMap::new(),
            hypotheses: Vec::new(),
            rows: Vec::new(),
            checks: Vec::new(),
            witnesses: BTreeMap::new(),
            pass: true,
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) {
        self.parameters.insert(
            key.to_string(),
            serde_json::to_value(value).expect("parameter serializes"),
        );
    }

    pub fn witness(&mut self, key: &str, value: impl Serialize) {
        self.witnesses.insert(
            key.to_string(),
            serde_json::to_value(value).expect("witness serializes"),
        );
    }

    pub fn grid(&mut self, key: &str, values: Vec<f64>) {
        self.grids.insert(key.to_string(), values);
    }

    pub fn push_row(&mut self, row: ReportRow) {
        self.rows.push(row);
    }

    pub fn push_check(&mut self, check: Check) {
        self.checks.push(check);
    }

    /// Recomputes `pass` from the rows and checks.
    pub fn finish(mut self) -> Self {
        self.pass = self.rows.iter().all(|r| r.pass) && self.checks.iter().all(|c| c.pass);
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        if self.rows.is_empty() {
            w.write_record(CSV_HEADER)?;
        }
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
    }

    /// Writes `<stem>.csv` and `<stem>.json` into `dir`.
    pub fn write_files(
        &self,
        dir: &Path,
        stem: &str,
    ) -> Result<(std::path::PathBuf, std::path::PathBuf)> {
        std::fs::create_dir_all(dir)?;
        let csv_path = dir.join(format!("{stem}.csv"));
        let json_path = dir.join(format!("{stem}.json"));
        self.write_csv(std::fs::File::create(&csv_path)?)?;
        std::fs::write(&json_path, self.to_json())?;
        Ok((csv_path, json_path))
    }
}

pub const CSV_HEADER: [&str; 11] = [
    "scenario",
    "n_pts",
    "p",
    "q",
    "s",
    "beta",
    "constant",
    "lower",
    "upper",
    "pass",
    "hypothesis",
];
