//! Stationarity, symmetry and goodness-of-fit tests.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::inference::{self, sigma_at, symmetric_inverse, universal_at, EtaFactors};
use crate::lyapunov::{self, EstimatorKind, LyapunovEstimate};
use crate::mle::{self, FitConfig, FitResult};
use crate::model::{filter_log, ParamVector, ReturnSeries};
use crate::stable::{Functional, StableDist};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestKind {
    Stationarity,
    Explosivity,
    Symmetry,
    Diagnostic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub test: TestKind,
    pub statistic: f64,
    pub level: f64,
    pub p_value: Option<f64>,
    pub critical_value: Option<f64>,
    pub reject: bool,
    pub null_hypothesis: String,
    pub alpha_star: Option<f64>,
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

fn check_level(level: f64) -> Result<()> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::invalid(format!("significance level must lie in (0, 1), got {level}")));
    }
    Ok(())
}

/// Both one-sided tests built on `T_n = sqrt(n) gamma_hat / sigma_u_hat`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationarityReport {
    pub gamma: LyapunovEstimate,
    /// H0: gamma < 0, rejected for large `T_n`.
    pub stationarity: TestReport,
    /// H0: gamma > 0, rejected for small `T_n`.
    pub explosivity: TestReport,
}

/// `T_n` from a residual Lyapunov estimate.
pub fn stationarity_from_estimate(gamma: &LyapunovEstimate, level: f64) -> Result<StationarityReport> {
    check_level(level)?;
    if !(gamma.sigma_u_hat > 0.0) {
        return Err(Error::domain("sigma_u_hat is zero; log a(eta) is constant"));
    }
    let t = (gamma.n as f64).sqrt() * gamma.gamma_hat / gamma.sigma_u_hat;
    let z = std_normal();
    let upper = z.inverse_cdf(1.0 - level);
    let lower = z.inverse_cdf(level);
    Ok(StationarityReport {
        gamma: *gamma,
        stationarity: TestReport {
            test: TestKind::Stationarity,
            statistic: t,
            level,
            p_value: Some(1.0 - z.cdf(t)),
            critical_value: Some(upper),
            reject: t > upper,
            null_hypothesis: "gamma < 0 (strictly stationary)".into(),
            alpha_star: None,
        },
        explosivity: TestReport {
            test: TestKind::Explosivity,
            statistic: t,
            level,
            p_value: Some(z.cdf(t)),
            critical_value: Some(lower),
            reject: t < lower,
            null_hypothesis: "gamma > 0 (explosive)".into(),
            alpha_star: None,
        },
    })
}

pub fn stationarity_test_at(theta: &ParamVector, y: &ReturnSeries, level: f64) -> Result<StationarityReport> {
    let resid = filter_log(theta, y, 0.0).residuals;
    let gamma = lyapunov::gamma_res(&theta.coefficient()?, &resid)?;
    stationarity_from_estimate(&gamma, level)
}

pub fn stationarity_test(fit: &FitResult, y: &ReturnSeries, level: f64) -> Result<StationarityReport> {
    stationarity_test_at(&fit.theta_hat, y, level)
}

/// `T^S = sqrt(n)(phi_plus - phi_minus) / sqrt(e' U^{-1} e)` with `U` the
/// universal information estimate.
pub fn symmetry_test_at(theta: &ParamVector, y: &ReturnSeries, level: f64) -> Result<TestReport> {
    check_level(level)?;
    let u = universal_at(EstimatorKind::Res, theta, y)?;
    let inv = symmetric_inverse(&u.matrix())?.inverse;
    let var = inv[(0, 0)] + inv[(1, 1)] - 2.0 * inv[(0, 1)];
    if !(var > 0.0) {
        return Err(Error::Singular("e' U^{-1} e is not positive".into()));
    }
    let diff = theta.phi_plus - theta.phi_minus;
    let t = (y.n() as f64).sqrt() * diff / var.sqrt();
    let z = std_normal();
    let crit = z.inverse_cdf(1.0 - level / 2.0);
    Ok(TestReport {
        test: TestKind::Symmetry,
        statistic: t,
        level,
        p_value: Some((2.0 * (1.0 - z.cdf(t.abs()))).min(1.0)),
        critical_value: Some(crit),
        reject: t.abs() > crit,
        null_hypothesis: "phi_plus = phi_minus".into(),
        alpha_star: None,
    })
}

pub fn symmetry_test(fit: &FitResult, y: &ReturnSeries, level: f64) -> Result<TestReport> {
    symmetry_test_at(&fit.theta_hat, y, level)
}

/// Critical values of `sup |B(r)|` at 10%, 5% and 1%.
pub const SUP_BROWNIAN_CRITICAL: [(f64, f64); 3] = [(0.10, 1.9600), (0.05, 2.2414), (0.01, 2.8070)];

/// Quantiles of `sup_{0<=r<=1} |B(r)|` from `n_paths` random walks with
/// `grid` steps each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileTable {
    pub probs: Vec<f64>,
    pub quantiles: Vec<f64>,
}

impl QuantileTable {
    pub fn quantile(&self, p: f64) -> f64 {
        interpolate(&self.probs, &self.quantiles, p)
    }

    /// `P(sup|B| <= x)` by linear interpolation, clamped to the table range.
    pub fn cdf(&self, x: f64) -> f64 {
        interpolate(&self.quantiles, &self.probs, x)
    }
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[xs.len() - 1] {
        return ys[ys.len() - 1];
    }
    let i = xs.partition_point(|&v| v <= x) - 1;
    let w = (x - xs[i]) / (xs[i + 1] - xs[i]);
    ys[i] + w * (ys[i + 1] - ys[i])
}

/// Monte Carlo quantiles of `sup |B|`; path `k` uses ChaCha stream `k` of
/// `seed`.
pub fn sup_brownian_critical_values(n_paths: usize, grid: usize, seed: u64, probs: &[f64]) -> Result<QuantileTable> {
    if n_paths < 100 || grid < 10 {
        return Err(Error::invalid("need at least 100 paths and 10 grid steps"));
    }
    if probs.iter().any(|p| !(*p > 0.0 && *p < 1.0)) {
        return Err(Error::invalid("probabilities must lie in (0, 1)"));
    }
    let sd = (1.0 / grid as f64).sqrt();
    let mut sups: Vec<f64> = (0..n_paths)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let mut b = 0.0f64;
            let mut m = 0.0f64;
            for _ in 0..grid {
                let z: f64 = StandardNormal.sample(&mut rng);
                b += sd * z;
                m = m.max(b.abs());
            }
            m
        })
        .collect();
    sups.sort_by(|a, b| a.total_cmp(b));
    let quantiles = probs
        .iter()
        .map(|&p| {
            // Type-7 sample quantile.
            let h = (n_paths - 1) as f64 * p;
            let lo = h.floor() as usize;
            let hi = (lo + 1).min(n_paths - 1);
            sups[lo] + (h - lo as f64) * (sups[hi] - sups[lo])
        })
        .collect();
    Ok(QuantileTable {
        probs: probs.to_vec(),
        quantiles,
    })
}

/// Embedded table from `sup_brownian_critical_values(100_000, 10_000, 20_240_611, ..)`
/// at probabilities 0.01, 0.02, ..., 0.99, 0.995, 0.999.
pub fn sup_brownian_table() -> QuantileTable {
    let mut probs: Vec<f64> = (1..=99).map(|i| i as f64 / 100.0).collect();
    probs.push(0.995);
    probs.push(0.999);
    QuantileTable {
        probs,
        quantiles: SUP_BROWNIAN_QUANTILES.to_vec(),
    }
}

include!("sup_brownian_table.rs");

/// `sqrt(n) sup_r |F_n(r) - r|` for points in `[0, 1]`.
pub fn kolmogorov_statistic(u: &[f64]) -> f64 {
    let mut v = u.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len() as f64;
    let d = v
        .iter()
        .enumerate()
        .map(|(i, &x)| ((i as f64 + 1.0) / n - x).max(x - i as f64 / n))
        .fold(0.0, f64::max);
    n.sqrt() * d
}

/// Result of the transformed Kolmogorov diagnostic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticReport {
    pub report: TestReport,
    pub restricted_fit: FitResult,
    /// Largest index `j` entering the maximum.
    pub max_index: usize,
}

/// `g_2(r) = f(F^{-1}(r)) F^{-1}(r)`.
pub fn g2(dist: &StableDist, r: f64) -> Result<f64> {
    let x = dist.quantile(r)?;
    Ok(dist.pdf(x)? * x)
}

/// `gdot(r) = (1, 1 + lx(x) x)` at `x = F^{-1}(r)`, the derivative of
/// `(r, g_2(r))`.
pub fn g_dot(dist: &StableDist, r: f64) -> Result<[f64; 2]> {
    let x = dist.quantile(r)?;
    Ok([1.0, 1.0 + dist.dlogf_dx(x)? * x])
}

/// Transformed statistic from residuals of a restricted fit at `alpha_star`.
///
/// Sorting `U_t = F(eta_t)` gives `v_1 <= ... <= v_n`; with
/// `gdot(v) = (1, 1 + eta lx(eta))` evaluated at the residual mapped to `v`,
/// `D_k = sum_{i>=k} gdot(v_i)` and
/// `C_k = sum_{i>=k} gdot(v_i) gdot(v_i)' (v_{i+1} - v_i)`, the statistic is
/// `max_j sqrt(n) |j/n - (1/n) sum_{k<=j} gdot(v_k)' C_k^{-1} D_k (v_k - v_{k-1})|`
/// over `j <= n - ceil(n^{1/4})`.
pub fn transformed_statistic(alpha_star: f64, residuals: &[f64]) -> Result<(f64, usize)> {
    let n = residuals.len();
    let dist = StableDist::new(alpha_star)?;
    let mut pts: Vec<(f64, f64)> = residuals
        .iter()
        .map(|&e| {
            let u = dist.cdf(e)?;
            let g2 = 1.0 + e * dist.dlogf_dx(e)?;
            Ok((u, g2))
        })
        .collect::<Result<_>>()?;
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let v: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let g2: Vec<f64> = pts.iter().map(|p| p.1).collect();

    // Suffix sums.
    let mut d1 = vec![0.0; n + 1];
    let mut d2 = vec![0.0; n + 1];
    let mut c11 = vec![0.0; n + 1];
    let mut c12 = vec![0.0; n + 1];
    let mut c22 = vec![0.0; n + 1];
    for k in (0..n).rev() {
        let next = if k + 1 < n { v[k + 1] } else { 1.0 };
        let w = next - v[k];
        d1[k] = d1[k + 1] + 1.0;
        d2[k] = d2[k + 1] + g2[k];
        c11[k] = c11[k + 1] + w;
        c12[k] = c12[k + 1] + g2[k] * w;
        c22[k] = c22[k + 1] + g2[k] * g2[k] * w;
    }
    let cut = (n as f64).powf(0.25).ceil() as usize;
    let jmax = n.saturating_sub(cut);
    if jmax == 0 {
        return Err(Error::invalid("sample too small for the transformed statistic"));
    }
    let nf = n as f64;
    let mut acc = 0.0;
    let mut best = 0.0f64;
    let mut last = 0;
    for k in 0..jmax {
        let det = c11[k] * c22[k] - c12[k] * c12[k];
        if !(det > 1e-300) {
            break;
        }
        // C^{-1} D
        let x1 = (c22[k] * d1[k] - c12[k] * d2[k]) / det;
        let x2 = (-c12[k] * d1[k] + c11[k] * d2[k]) / det;
        let prev = if k == 0 { 0.0 } else { v[k - 1] };
        acc += (x1 + g2[k] * x2) * (v[k] - prev);
        let stat = nf.sqrt() * (((k + 1) as f64) / nf - acc / nf).abs();
        best = best.max(stat);
        last = k + 1;
    }
    Ok((best, last))
}

/// Smallest sample accepted by [`diagnostic_test`].
pub const DIAGNOSTIC_MIN_OBSERVATIONS: usize = 50;

/// Diagnostic test of `H0: eta ~ S(alpha_star)`.
pub fn diagnostic_test(y: &ReturnSeries, alpha_star: f64, level: f64, cfg: &FitConfig) -> Result<DiagnosticReport> {
    check_level(level)?;
    if !(alpha_star > 0.0 && alpha_star < 2.0) {
        return Err(Error::invalid(format!("alpha_star must lie in (0, 2), got {alpha_star}")));
    }
    if y.n() < DIAGNOSTIC_MIN_OBSERVATIONS {
        return Err(Error::data(format!(
            "the diagnostic test needs at least {DIAGNOSTIC_MIN_OBSERVATIONS} observations, got {}",
            y.n()
        )));
    }
    let restricted_cfg = FitConfig {
        fixed_alpha: Some(alpha_star),
        ..cfg.clone()
    };
    let fit = mle::fit(y, &restricted_cfg)?;
    let resid = filter_log(&fit.theta_hat, y, 0.0).residuals;
    let (stat, max_index) = transformed_statistic(alpha_star, &resid)?;
    let report = diagnostic_report(stat, level, alpha_star);
    Ok(DiagnosticReport {
        report,
        restricted_fit: fit,
        max_index,
    })
}

fn diagnostic_report(stat: f64, level: f64, alpha_star: f64) -> TestReport {
    let table = sup_brownian_table();
    let crit = SUP_BROWNIAN_CRITICAL
        .iter()
        .find(|(l, _)| (l - level).abs() < 1e-12)
        .map(|(_, c)| *c)
        .unwrap_or_else(|| table.quantile(1.0 - level));
    TestReport {
        test: TestKind::Diagnostic,
        statistic: stat,
        level,
        p_value: Some((1.0 - table.cdf(stat)).max(0.001)),
        critical_value: Some(crit),
        reject: stat > crit,
        null_hypothesis: format!("innovations are S({alpha_star}, 0, 1, 0)"),
        alpha_star: Some(alpha_star),
    }
}

/// `alpha_hat` rounded to two decimals.
pub fn default_alpha_star(fit: &FitResult) -> f64 {
    (fit.theta_hat.alpha() * 100.0).round() / 100.0
}

/// Full asymptotic variance of `sqrt(n)(gamma_hat - gamma)` in the
/// stationary regime, `sigma_u^2 + a1' Sigma^{-1} a2 - 4 (1 - nu1)^2 / c1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaVariance {
    pub sigma_u2: f64,
    pub correction: f64,
    pub sigma_gamma2: f64,
}

pub fn gamma_variance(kind: EstimatorKind, theta: &ParamVector, y: &ReturnSeries) -> Result<GammaVariance> {
    let coef = theta.coefficient()?;
    let alpha = theta.alpha();
    let resid = filter_log(theta, y, 0.0).residuals;
    let sigma = sigma_at(kind, theta, y)?;
    let eta = EtaFactors::estimate(kind, alpha, &resid)?;
    let (nu1, nu_p, nu_m, c_star, c_tilde, sigma_u2) = match kind {
        EstimatorKind::Int => {
            let e = StableDist::new(alpha)?.expect_many(&[
                Functional::Moment(crate::stable::CoefficientMoment::nu(coef, 1)),
                Functional::Moment(crate::stable::CoefficientMoment {
                    coef,
                    psi_power: 0,
                    plus: 1,
                    minus: 0,
                    a_power: 1,
                }),
                Functional::Moment(crate::stable::CoefficientMoment {
                    coef,
                    psi_power: 0,
                    plus: 0,
                    minus: 1,
                    a_power: 1,
                }),
                Functional::LogCoefficientScaleScore(coef),
                Functional::LogCoefficientAlphaScore(coef),
            ])?;
            let g = lyapunov::gamma_int(&coef, alpha, y.n())?;
            (e[0].value, e[1].value, e[2].value, e[3].value, e[4].value, g.sigma_u_hat.powi(2))
        }
        EstimatorKind::Res => {
            let k = crate::stable::LogDensityKernel::global();
            let g = lyapunov::gamma_res(&coef, &resid)?;
            let n = resid.len() as f64;
            let (mut s1, mut sp, mut sm, mut cs, mut ct) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for &e in &resid {
                let a = coef.eval(e);
                let v = k.eval(alpha, e)?;
                let u = a.ln() - g.gamma_hat;
                s1 += coef.psi / a;
                if e >= 0.0 {
                    sp += e * e / a;
                } else {
                    sm += e * e / a;
                }
                cs += u * (1.0 + e * v.d_x);
                ct += u * v.d_alpha;
            }
            (s1 / n, sp / n, sm / n, cs / n, ct / n, g.sigma_u_hat.powi(2))
        }
    };
    let (c1, c2) = (eta.c1, eta.c2);
    let a1 = [0.0, -nu_p, -nu_m, -nu1 / theta.psi, 2.0 * c2 * (1.0 - nu1 + c_star) / c1 - 2.0 * c_tilde];
    let a2 = [0.0, -nu_p, -nu_m, -nu1 / theta.psi, 2.0 * c2 * (1.0 - nu1) / c1];
    let inv = symmetric_inverse(&sigma.matrix())?.inverse;
    let mut quad = 0.0;
    for i in 0..5 {
        for j in 0..5 {
            quad += a1[i] * inv[(i, j)] * a2[j];
        }
    }
    let correction = quad - 4.0 * (1.0 - nu1).powi(2) / c1;
    Ok(GammaVariance {
        sigma_u2,
        correction,
        sigma_gamma2: sigma_u2 + correction,
    })
}

/// Keeps the information estimators reachable from this module's docs.
pub use inference::recommended_kind;

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// `P(sup_{[0,1]} |B| <= x)`.
    fn sup_abs_cdf(x: f64) -> f64 {
        (0..200)
            .map(|k| {
                let m = (2 * k + 1) as f64;
                let s = if k % 2 == 0 { 1.0 } else { -1.0 };
                s / m * (-(m * m) * PI * PI / (8.0 * x * x)).exp()
            })
            .sum::<f64>()
            * 4.0
            / PI
    }

    #[test]
    fn embedded_table_matches_series() {
        let t = sup_brownian_table();
        // A 10^4-step walk undershoots the continuous maximum by about
        // 0.5826 / sqrt(10^4).
        for (p, q) in t.probs.iter().zip(&t.quantiles) {
            assert!((sup_abs_cdf(q + 0.005826) - p).abs() < 0.005, "p {p} q {q}");
        }
        for (level, c) in SUP_BROWNIAN_CRITICAL {
            assert!((sup_abs_cdf(c) - (1.0 - level)).abs() < 2e-3);
        }
    }

    #[test]
    fn zero_gamma_rejects_nothing() {
        let g = LyapunovEstimate {
            gamma_hat: 0.0,
            kind: EstimatorKind::Res,
            sigma_u_hat: 1.0,
            regime: lyapunov::Regime::NearCritical,
            n: 500,
        };
        let r = stationarity_from_estimate(&g, 0.4).unwrap();
        assert_eq!(r.stationarity.statistic, 0.0);
        assert!(!r.stationarity.reject && !r.explosivity.reject);
    }

    #[test]
    fn kolmogorov_of_uniform_grid_is_small() {
        let u: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
        assert!((kolmogorov_statistic(&u) - 0.05).abs() < 1e-12);
    }
}
