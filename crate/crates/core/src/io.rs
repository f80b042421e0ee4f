//! CSV ingestion and JSON/text reports.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypothesis::TestReport;
use crate::inference::{asd, recommended_kind, sigma_hat, universal_variance, AsdReport, InfoKind};
use crate::lyapunov::{EstimatorKind, Regime};
use crate::mle::FitResult;
use crate::model::{ReturnSeries, ScaleHint, PARAM_NAMES};
use crate::montecarlo::ExperimentResult;

/// Read a return series from a CSV file with a header row.
///
/// The value column is the one named `return` (any case), or the only
/// numeric column. A comment line `# unit: percent` marks percent returns.
/// Values are used as given; no log or percent transform is applied.
pub fn ingest_csv(path: impl AsRef<Path>) -> Result<ReturnSeries> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_csv(&text, &path.display().to_string())
}

/// [`ingest_csv`] on in-memory text; `source` labels error messages.
pub fn parse_csv(text: &str, source: &str) -> Result<ReturnSeries> {
    let mut hint = ScaleHint::Raw;
    for line in text.lines() {
        if let Some(rest) = line.trim_start().strip_prefix('#') {
            if let Some((k, v)) = rest.split_once(':') {
                if k.trim().eq_ignore_ascii_case("unit") && v.trim().eq_ignore_ascii_case("percent") {
                    hint = ScaleHint::Percent;
                }
            }
        }
    }
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let headers = rdr
        .headers()
        .map_err(|e| Error::data(format!("{source}: {e}")))?
        .clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(Error::data(format!("{source}: empty file")));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::data(format!("{source}: {e}")))?;
        let line = rec.position().map_or(0, |p| p.line());
        rows.push((line, rec));
    }
    if rows.is_empty() {
        return Err(Error::data(format!("{source}: no data rows")));
    }

    let col = match headers.iter().position(|h| h.eq_ignore_ascii_case("return")) {
        Some(c) => c,
        None if headers.len() == 1 => 0,
        None => {
            let first = &rows[0].1;
            let numeric: Vec<usize> = (0..headers.len())
                .filter(|&c| first.get(c).is_some_and(|v| v.parse::<f64>().is_ok()))
                .collect();
            match numeric.as_slice() {
                [c] => *c,
                [] => return Err(Error::data(format!("{source}: no numeric column"))),
                _ => {
                    return Err(Error::data(format!(
                        "{source}: {} numeric columns and none named \"return\"; the value column is ambiguous",
                        numeric.len()
                    )))
                }
            }
        }
    };

    let mut values = Vec::with_capacity(rows.len());
    for (line, rec) in &rows {
        let raw = rec
            .get(col)
            .ok_or_else(|| Error::data(format!("{source}:{line}: missing column \"{}\"", &headers[col])))?;
        let v: f64 = raw
            .parse()
            .map_err(|_| Error::data(format!("{source}:{line}: not a number: \"{raw}\"")))?;
        if !v.is_finite() {
            return Err(Error::data(format!("{source}:{line}: non-finite value \"{raw}\"")));
        }
        values.push(v);
    }
    ReturnSeries::with_hint(values, hint).map_err(|e| Error::data(format!("{source}: {e}")))
}

/// One-column CSV with header `return`.
pub fn write_csv(path: impl AsRef<Path>, y: &ReturnSeries) -> Result<()> {
    let mut out = String::from("return\n");
    if y.scale_hint == ScaleHint::Percent {
        out.insert_str(0, "# unit: percent\n");
    }
    for v in y.values() {
        writeln!(out, "{v}").expect("string write");
    }
    std::fs::write(path, out)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterEntry {
    pub name: String,
    pub estimate: f64,
    pub asd: Option<f64>,
    pub asd_source: Option<InfoKind>,
    /// `"non-inferential"` for omega when the fitted exponent is positive.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flag: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeEntry {
    pub gamma_hat: f64,
    pub sigma_u_hat: f64,
    pub estimator: EstimatorKind,
    pub regime: Regime,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestEntry {
    pub name: String,
    pub statistic: f64,
    pub p_value: Option<f64>,
    pub critical_value: Option<f64>,
    pub level: f64,
    pub reject: bool,
    pub null_hypothesis: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_star: Option<f64>,
}

impl From<&TestReport> for TestEntry {
    fn from(r: &TestReport) -> Self {
        let name = serde_json::to_value(r.test)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default();
        TestEntry {
            name,
            statistic: r.statistic,
            p_value: r.p_value,
            critical_value: r.critical_value,
            level: r.level,
            reject: r.reject,
            null_hypothesis: r.null_hypothesis.clone(),
            alpha_star: r.alpha_star,
        }
    }
}

/// Fit and test summary in the layout written by the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub n: usize,
    pub scale_hint: ScaleHint,
    pub parameters: Vec<ParameterEntry>,
    pub loglik: f64,
    pub aic: f64,
    pub converged: bool,
    pub regime: RegimeEntry,
    pub tests: Vec<TestEntry>,
    /// Problems met while computing standard deviations.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Report {
    /// Estimates with ASDs. Stationary fits use the information matrix of the
    /// recommended kind; when omega is non-inferential, or that matrix is
    /// singular, the non-intercept ASDs come from the universal estimator.
    pub fn from_fit(fit: &FitResult, y: &ReturnSeries) -> Report {
        let est = fit.theta_hat.to_array();
        let mut notes = Vec::new();
        let n = y.n();
        let full: Option<AsdReport> = if fit.omega_inferential && fit.fixed_alpha.is_none() {
            match sigma_hat(recommended_kind(fit.theta_hat.alpha()), fit, y).and_then(|s| asd(&s, n)) {
                Ok(a) => Some(a),
                Err(e) => {
                    notes.push(format!("information matrix: {e}"));
                    None
                }
            }
        } else {
            None
        };
        let universal = if full.is_none() && fit.fixed_alpha.is_none() {
            match universal_variance(fit, y).and_then(|s| asd(&s, n)) {
                Ok(a) => Some(a),
                Err(e) => {
                    notes.push(format!("universal estimator: {e}"));
                    None
                }
            }
        } else {
            None
        };
        if fit.fixed_alpha.is_some() {
            notes.push("alpha held fixed; no standard deviations reported".into());
        }
        let parameters = PARAM_NAMES
            .iter()
            .enumerate()
            .map(|(i, name)| {
                let (a, src) = match (&full, &universal) {
                    (Some(r), _) => (Some(r.values[i]), Some(r.source)),
                    (None, Some(r)) if i > 0 => (Some(r.values[i - 1]), Some(r.source)),
                    _ => (None, None),
                };
                ParameterEntry {
                    name: name.to_string(),
                    estimate: est[i],
                    asd: a,
                    asd_source: src,
                    flag: (i == 0 && !fit.omega_inferential).then(|| "non-inferential".to_string()),
                }
            })
            .collect();
        let g = &fit.regime_estimate;
        Report {
            n,
            scale_hint: y.scale_hint,
            parameters,
            loglik: fit.loglik,
            aic: fit.aic,
            converged: fit.converged,
            regime: RegimeEntry {
                gamma_hat: g.gamma_hat,
                sigma_u_hat: g.sigma_u_hat,
                estimator: g.kind,
                regime: g.regime,
            },
            tests: Vec::new(),
            notes,
        }
    }

    pub fn with_test(mut self, t: &TestReport) -> Self {
        self.tests.push(t.into());
        self
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// Aligned text table: estimates with parenthesized ASDs, then
    /// log-likelihood, AIC and tests.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let w = 12;
        write!(s, "{:<w$}", "").unwrap();
        for p in &self.parameters {
            let label = if p.name == "phi_plus" {
                "phi+"
            } else if p.name == "phi_minus" {
                "phi-"
            } else {
                &p.name
            };
            write!(s, "{label:>w$}").unwrap();
        }
        s.push('\n');
        write!(s, "{:<w$}", "estimate").unwrap();
        for p in &self.parameters {
            let mark = if p.flag.is_some() { "*" } else { "" };
            write!(s, "{:>w$}", format!("{:.4}{mark}", p.estimate)).unwrap();
        }
        s.push('\n');
        write!(s, "{:<w$}", "").unwrap();
        for p in &self.parameters {
            let cell = p.asd.map_or_else(|| "(-)".to_string(), |a| format!("({a:.4})"));
            write!(s, "{cell:>w$}").unwrap();
        }
        s.push('\n');
        writeln!(s, "{:<w$}{:>w$.2}", "log-lik", self.loglik).unwrap();
        writeln!(s, "{:<w$}{:>w$.2}", "AIC", self.aic).unwrap();
        writeln!(
            s,
            "{:<w$}{:>w$.4}  {}",
            "gamma_hat",
            self.regime.gamma_hat,
            serde_json::to_value(self.regime.regime)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_default()
        )
        .unwrap();
        for t in &self.tests {
            let p = t.p_value.map_or_else(|| "-".to_string(), |p| format!("{p:.4}"));
            let decision = if t.reject { "reject" } else { "do not reject" };
            writeln!(s, "{:<w$}{:>w$.4}  p-value {p}  {decision} at {}", t.name, t.statistic, t.level).unwrap();
        }
        if self.parameters.iter().any(|p| p.flag.is_some()) {
            writeln!(s, "* omega is not identified in the explosive regime").unwrap();
        }
        for note in &self.notes {
            writeln!(s, "note: {note}").unwrap();
        }
        s
    }
}

/// Write `report` as JSON to `path`.
pub fn emit_report(report: &Report, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, report.to_json()?)?;
    Ok(())
}

/// Bias / ESD / ASD rows per sample size, in the layout of a simulation
/// table.
pub fn experiment_table(r: &ExperimentResult) -> String {
    let mut s = String::new();
    let w = 11;
    for cell in &r.mle {
        writeln!(s, "{}  n = {}  replications = {}  failures = {}", r.design_id, cell.n, cell.replications, cell.failures).unwrap();
        write!(s, "{:<9}", "").unwrap();
        for p in &cell.parameters {
            write!(s, "{:>w$}", p.name).unwrap();
        }
        s.push('\n');
        let rows: [(&str, fn(&crate::montecarlo::ParameterSummary) -> Option<f64>); 7] = [
            ("Truth", |p| Some(p.truth)),
            ("Bias", |p| Some(p.bias)),
            ("ESD", |p| Some(p.esd)),
            ("ASD", |p| p.asd),
            ("ASD^int", |p| p.asd_int),
            ("ASD^res", |p| p.asd_res),
            ("ASD^univ", |p| p.asd_universal),
        ];
        for (label, f) in rows {
            write!(s, "{label:<9}").unwrap();
            for p in &cell.parameters {
                let c = f(p).map_or_else(|| "-".to_string(), |v| format!("{v:.4}"));
                write!(s, "{c:>w$}").unwrap();
            }
            s.push('\n');
        }
    }
    for p in &r.rejections {
        writeln!(s, "{:<16} n = {:<6} rejection frequency {:.3} ({} / {}, {} failed)", p.label, p.n, p.frequency, p.rejections, p.replications - p.failures, p.failures).unwrap();
    }
    s
}

/// Per-replication estimates as CSV.
pub fn replications_csv(r: &ExperimentResult) -> String {
    let mut s = String::from("n,replication,omega,phi_plus,phi_minus,psi,alpha,error\n");
    for rec in &r.replication_records {
        write!(s, "{},{}", rec.n, rec.replication).unwrap();
        match rec.theta_hat {
            Some(t) => t.iter().for_each(|v| write!(s, ",{v}").unwrap()),
            None => s.push_str(",,,,,"),
        }
        let err = rec.error.as_deref().unwrap_or("").replace(['"', ','], " ");
        writeln!(s, ",{err}").unwrap();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn return_column() {
        let y = parse_csv("date,Return\n2020-01-01,0.1\n2020-01-02,-0.2\n", "t").unwrap();
        assert_eq!(y.values(), &[0.1, -0.2]);
        assert_eq!(y.scale_hint, ScaleHint::Raw);
    }

    #[test]
    fn single_numeric_column_and_unit() {
        let y = parse_csv("# unit: percent\ndate,r\na,1.5\nb,-0.5\n", "t").unwrap();
        assert_eq!(y.values(), &[1.5, -0.5]);
        assert_eq!(y.scale_hint, ScaleHint::Percent);
    }

    #[test]
    fn ambiguity_and_bad_rows() {
        let e = parse_csv("a,b\n1,2\n3,4\n", "t").unwrap_err();
        assert!(e.to_string().contains("ambiguous"));
        let e = parse_csv("return\n0.1\nabc\n0.2\n", "t").unwrap_err();
        assert!(e.to_string().contains("t:3"), "{e}");
        assert_eq!(e.exit_code(), 2);
        assert!(parse_csv("return\n0.1\ninf\n", "t").is_err());
        assert!(parse_csv("", "t").is_err());
        assert!(parse_csv("return\n", "t").is_err());
    }
}
