//! The sAGARCH(1,1) process
//! `y_t = sigma_t eta_t`,
//! `sigma_t^2 = omega + phi_plus (y_{t-1}+)^2 + phi_minus (y_{t-1}-)^2 + psi sigma_{t-1}^2`,
//! its simulation and the volatility filter.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stable::{sample_standard_stable, Coefficient, StableExponent};

/// `theta = (omega, phi_plus, phi_minus, psi, alpha)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamVector {
    pub omega: f64,
    pub phi_plus: f64,
    pub phi_minus: f64,
    pub psi: f64,
    pub alpha: StableExponent,
}

pub const PARAM_NAMES: [&str; 5] = ["omega", "phi_plus", "phi_minus", "psi", "alpha"];

impl ParamVector {
    pub fn new(omega: f64, phi_plus: f64, phi_minus: f64, psi: f64, alpha: f64) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::invalid(format!("omega must be positive, got {omega}")));
        }
        for (name, v) in [("phi_plus", phi_plus), ("phi_minus", phi_minus), ("psi", psi)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(format!("{name} must be finite and nonnegative, got {v}")));
            }
        }
        Ok(ParamVector {
            omega,
            phi_plus,
            phi_minus,
            psi,
            alpha: StableExponent::non_gaussian(alpha)?,
        })
    }

    pub fn from_array(v: [f64; 5]) -> Result<Self> {
        Self::new(v[0], v[1], v[2], v[3], v[4])
    }

    pub fn to_array(&self) -> [f64; 5] {
        [self.omega, self.phi_plus, self.phi_minus, self.psi, self.alpha.value()]
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.value()
    }

    /// `(omega, phi_plus, phi_minus, psi)`.
    pub fn theta_tilde(&self) -> [f64; 4] {
        [self.omega, self.phi_plus, self.phi_minus, self.psi]
    }

    /// `(phi_plus, phi_minus, psi, alpha)`.
    pub fn vartheta(&self) -> [f64; 4] {
        [self.phi_plus, self.phi_minus, self.psi, self.alpha()]
    }

    /// `(phi_plus, phi_minus, psi)`.
    pub fn vartheta_tilde(&self) -> [f64; 3] {
        [self.phi_plus, self.phi_minus, self.psi]
    }

    pub fn coefficient(&self) -> Result<Coefficient> {
        Coefficient::new(self.phi_plus, self.phi_minus, self.psi)
    }

    /// Same model for `-y`.
    pub fn swapped(&self) -> Self {
        ParamVector {
            phi_plus: self.phi_minus,
            phi_minus: self.phi_plus,
            ..*self
        }
    }
}

/// Whether values are plain returns or percentage returns. Informational only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ScaleHint {
    #[default]
    Raw,
    Percent,
}

/// Observations `y_0, ..., y_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnSeries {
    values: Vec<f64>,
    pub scale_hint: ScaleHint,
}

impl ReturnSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        Self::with_hint(values, ScaleHint::Raw)
    }

    pub fn with_hint(values: Vec<f64>, scale_hint: ScaleHint) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::data(format!(
                "a return series needs at least 2 values (y_0 and y_1), got {}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::data(format!("value {i} is not finite: {}", values[i])));
        }
        Ok(ReturnSeries { values, scale_hint })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of likelihood terms, `n`.
    pub fn n(&self) -> usize {
        self.values.len() - 1
    }

    pub fn negated(&self) -> Self {
        ReturnSeries {
            values: self.values.iter().map(|v| -v).collect(),
            scale_hint: self.scale_hint,
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        ReturnSeries {
            values: self.values.iter().map(|v| v * c).collect(),
            scale_hint: self.scale_hint,
        }
    }
}

/// Filter output for `t = 1..n` on the natural scale.
///
/// For long explosive paths `sigma2` can overflow to infinity; the
/// likelihood code works with [`LogFilter`] instead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterOutput {
    pub sigma2: Vec<f64>,
    /// `d sigma2 / d (omega, phi_plus, phi_minus, psi)`.
    pub dsigma2: Vec<[f64; 4]>,
    pub residuals: Vec<f64>,
}

/// Filter output carried as `log sigma2` and derivatives divided by sigma2.
#[derive(Debug, Clone, PartialEq)]
pub struct LogFilter {
    pub log_sigma2: Vec<f64>,
    /// `(d sigma2 / d theta_tilde) / sigma2`.
    pub dlog_sigma2: Vec<[f64; 4]>,
    pub residuals: Vec<f64>,
}

#[inline]
fn log_sq(y: f64) -> f64 {
    if y == 0.0 {
        f64::NEG_INFINITY
    } else {
        2.0 * y.abs().ln()
    }
}

#[inline]
fn ln_or_neg_inf(v: f64) -> f64 {
    if v > 0.0 {
        v.ln()
    } else {
        f64::NEG_INFINITY
    }
}

#[inline]
fn log_sum_exp(terms: &[f64]) -> f64 {
    let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

/// Log-domain volatility filter started from `(y_0, sigma2_0)`.
///
/// `initial_sigma2 = 0` gives the standard zero start.
pub fn filter_log(theta: &ParamVector, y: &ReturnSeries, initial_sigma2: f64) -> LogFilter {
    let v = y.values();
    let n = y.n();
    let ln_omega = theta.omega.ln();
    let ln_pp = ln_or_neg_inf(theta.phi_plus);
    let ln_pm = ln_or_neg_inf(theta.phi_minus);
    let ln_psi = ln_or_neg_inf(theta.psi);
    let psi = theta.psi;

    let mut log_sigma2 = Vec::with_capacity(n);
    let mut dlog = Vec::with_capacity(n);
    let mut residuals = Vec::with_capacity(n);

    let mut prev_l = ln_or_neg_inf(initial_sigma2);
    let mut prev_d = [0.0; 4];
    for t in 1..=n {
        let y_prev = v[t - 1];
        let ly2 = log_sq(y_prev);
        let (lp, lm) = if y_prev >= 0.0 {
            (ly2, f64::NEG_INFINITY)
        } else {
            (f64::NEG_INFINITY, ly2)
        };
        let l = log_sum_exp(&[ln_omega, ln_pp + lp, ln_pm + lm, ln_psi + prev_l]);
        let r = (prev_l - l).exp();
        let d = [
            (-l).exp() + psi * r * prev_d[0],
            (lp - l).exp() + psi * r * prev_d[1],
            (lm - l).exp() + psi * r * prev_d[2],
            r + psi * r * prev_d[3],
        ];
        let yt = v[t];
        residuals.push(if yt == 0.0 { 0.0 } else { yt.signum() * (yt.abs().ln() - 0.5 * l).exp() });
        log_sigma2.push(l);
        dlog.push(d);
        prev_l = l;
        prev_d = d;
    }
    LogFilter {
        log_sigma2,
        dlog_sigma2: dlog,
        residuals,
    }
}

/// Volatility filter with zero initial values.
pub fn filter(theta: &ParamVector, y: &ReturnSeries) -> FilterOutput {
    filter_with_initial(theta, y, 0.0)
}

pub fn filter_with_initial(theta: &ParamVector, y: &ReturnSeries, initial_sigma2: f64) -> FilterOutput {
    let lf = filter_log(theta, y, initial_sigma2);
    let sigma2: Vec<f64> = lf.log_sigma2.iter().map(|l| l.exp()).collect();
    let dsigma2 = lf
        .dlog_sigma2
        .iter()
        .zip(&sigma2)
        .map(|(d, s)| d.map(|v| v * s))
        .collect();
    FilterOutput {
        sigma2,
        dsigma2,
        residuals: lf.residuals,
    }
}

/// `eta_hat_t = y_t / sigma_tilde_t(theta)`, `t = 1..n`.
pub fn residuals(theta: &ParamVector, y: &ReturnSeries) -> Vec<f64> {
    filter_log(theta, y, 0.0).residuals
}

/// A simulated path.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedPath {
    /// `y_0, ..., y_n` after burn-in (shorter if truncated).
    pub series: ReturnSeries,
    /// `eta_1, ..., eta_n` that generated `y_1, ..., y_n`.
    pub innovations: Vec<f64>,
    /// `sigma_0^2` of the returned segment, so that a filter started from it
    /// reproduces the innovations.
    pub initial_sigma2: f64,
    /// `log sigma_t^2`, `t = 1..n`.
    pub log_sigma2: Vec<f64>,
    /// Set when the path was cut because `y_t` left the f64 range.
    pub truncated: bool,
}

/// Simulate `n` observations after `burn_in` discarded steps, with stable
/// innovations and a ChaCha stream seeded by `seed`.
pub fn simulate(theta: &ParamVector, n: usize, seed: u64, burn_in: usize) -> Result<SimulatedPath> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alpha = theta.alpha();
    simulate_with(theta, n, burn_in, &mut rng, |r| sample_standard_stable(alpha, r))
}

/// Simulation with an injected innovation sampler. Starts from
/// `sigma_0^2 = omega`, `y_0 = 0`.
pub fn simulate_with<R, F>(theta: &ParamVector, n: usize, burn_in: usize, rng: &mut R, mut draw: F) -> Result<SimulatedPath>
where
    R: Rng + ?Sized,
    F: FnMut(&mut R) -> f64,
{
    if n == 0 {
        return Err(Error::invalid("simulation length must be at least 1"));
    }
    let ln_omega = theta.omega.ln();
    let ln_pp = ln_or_neg_inf(theta.phi_plus);
    let ln_pm = ln_or_neg_inf(theta.phi_minus);
    let ln_psi = ln_or_neg_inf(theta.psi);
    let ln_max = f64::MAX.ln();

    let mut l = ln_omega;
    let mut y_prev = 0.0f64;
    let mut values = Vec::with_capacity(n + 1);
    let mut innovations = Vec::with_capacity(n);
    let mut log_sigma2 = Vec::with_capacity(n);
    let mut initial = theta.omega;
    let mut truncated = false;
    if burn_in == 0 {
        values.push(0.0);
    }
    for step in 1..=(burn_in + n) {
        let ly2 = log_sq(y_prev);
        let (lp, lm) = if y_prev >= 0.0 {
            (ly2, f64::NEG_INFINITY)
        } else {
            (f64::NEG_INFINITY, ly2)
        };
        let l_new = log_sum_exp(&[ln_omega, ln_pp + lp, ln_pm + lm, ln_psi + l]);
        let eta = draw(rng);
        let log_abs_y = 0.5 * l_new + eta.abs().ln();
        if !(log_abs_y < ln_max) || !l_new.is_finite() {
            truncated = true;
            break;
        }
        let y = eta.signum() * log_abs_y.exp();
        if step == burn_in {
            values.push(y);
            initial = l_new.exp();
        } else if step > burn_in {
            values.push(y);
            innovations.push(eta);
            log_sigma2.push(l_new);
        }
        l = l_new;
        y_prev = y;
    }
    if values.len() < 2 {
        return Err(Error::domain("simulated path overflowed before producing any observation"));
    }
    Ok(SimulatedPath {
        series: ReturnSeries::new(values)?,
        innovations,
        initial_sigma2: initial,
        log_sigma2,
        truncated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn theta(o: f64, p: f64, m: f64, s: f64) -> ParamVector {
        ParamVector::new(o, p, m, s, 1.5).unwrap()
    }

    #[test]
    fn hand_recursion() {
        let y = ReturnSeries::new(vec![0.0, 0.3, -0.2, 0.1]).unwrap();
        let f = filter(&theta(1.0, 0.0, 0.0, 0.5), &y);
        assert!((f.sigma2[0] - 1.0).abs() < 1e-15);
        assert!((f.sigma2[1] - 1.5).abs() < 1e-15);
        assert!((f.sigma2[2] - 1.75).abs() < 1e-15);
    }

    #[test]
    fn asymmetric_branches() {
        let th = theta(1.0, 0.1, 0.2, 0.0);
        let down = filter(&th, &ReturnSeries::new(vec![0.0, -2.0, 0.5]).unwrap());
        let up = filter(&th, &ReturnSeries::new(vec![0.0, 2.0, 0.5]).unwrap());
        assert!((down.sigma2[1] - 1.8).abs() < 1e-14);
        assert!((up.sigma2[1] - 1.4).abs() < 1e-14);
    }

    #[test]
    fn degenerate_recursion_returns_innovations() {
        let th = ParamVector::new(1.0, 0.0, 0.0, 0.0, 1.3).unwrap();
        let p = simulate(&th, 50, 9, 0).unwrap();
        for (y, e) in p.series.values()[1..].iter().zip(&p.innovations) {
            assert!((y - e).abs() <= 1e-15 * e.abs());
        }
        assert_eq!(residuals(&th, &p.series)[..], p.series.values()[1..]);
    }

    #[test]
    fn matched_start_reproduces_innovations() {
        let th = theta(0.2, 0.1, 0.2, 0.5);
        let p = simulate(&th, 300, 4, 100).unwrap();
        let f = filter_log(&th, &p.series, p.initial_sigma2);
        for (r, e) in f.residuals.iter().zip(&p.innovations) {
            assert!((r - e).abs() < 1e-10 * (1.0 + e.abs()));
        }
    }

    #[test]
    fn seeded_simulation_is_reproducible() {
        let th = theta(0.2, 0.1, 0.2, 0.5);
        let a = simulate(&th, 200, 77, 50).unwrap();
        let b = simulate(&th, 200, 77, 50).unwrap();
        assert_eq!(a.series.values(), b.series.values());
    }

    #[test]
    fn explosive_path_stays_finite_in_log_domain() {
        let th = ParamVector::new(0.1, 0.1, 0.2, 0.5, 1.0).unwrap();
        let p = simulate(&th, 5000, 3, 0).unwrap();
        let lf = filter_log(&th, &p.series, 0.0);
        assert!(lf.log_sigma2.iter().all(|l| l.is_finite()));
        assert!(lf.residuals.iter().all(|r| r.is_finite()));
        assert!(*lf.log_sigma2.last().unwrap() > 100.0);
    }

    #[test]
    fn validation() {
        assert!(ParamVector::new(0.0, 0.1, 0.1, 0.5, 1.5).is_err());
        assert!(ParamVector::new(1.0, -0.1, 0.1, 0.5, 1.5).is_err());
        assert!(ParamVector::new(1.0, 0.1, 0.1, 0.5, 2.0).is_err());
        assert!(ReturnSeries::new(vec![1.0]).is_err());
        assert!(ReturnSeries::new(vec![1.0, f64::NAN]).is_err());
    }
}
