//! Conditional maximum likelihood for the sAGARCH(1,1) model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lyapunov::{self, LyapunovEstimate, Regime};
use crate::model::{filter_log, LogFilter, ParamVector, ReturnSeries};
use crate::optimize::{self, Settings};
use crate::stable::LogDensityKernel;

/// Smallest sample accepted by [`fit`].
pub const MIN_OBSERVATIONS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum FitMode {
    /// `psi < 1`.
    #[default]
    Stationary,
    /// `psi` up to 10, for explosive data.
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Bounds {
    pub omega: (f64, f64),
    pub phi_plus: (f64, f64),
    pub phi_minus: (f64, f64),
    /// `None` picks the mode default.
    pub psi: Option<(f64, f64)>,
    pub alpha: (f64, f64),
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            omega: (1e-6, 1e6),
            phi_plus: (0.0, 10.0),
            phi_minus: (0.0, 10.0),
            psi: None,
            alpha: (0.05, 1.95),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    pub bounds: Bounds,
    /// Projected-gradient tolerance on the mean negative log-likelihood.
    pub tol: f64,
    pub max_iter: usize,
    /// Number of grid starts used, 1 to 6.
    pub multistart: usize,
    pub mode: FitMode,
    /// Restricted fit with alpha held fixed.
    pub fixed_alpha: Option<f64>,
    /// Extra starting point tried before the grid.
    pub initial: Option<ParamVector>,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            bounds: Bounds::default(),
            tol: 1e-6,
            max_iter: 500,
            multistart: 6,
            mode: FitMode::Stationary,
            fixed_alpha: None,
            initial: None,
        }
    }
}

impl FitConfig {
    pub fn psi_bounds(&self) -> (f64, f64) {
        self.bounds.psi.unwrap_or(match self.mode {
            FitMode::Stationary => (1e-8, 1.0 - 1e-6),
            FitMode::Free => (1e-8, 10.0),
        })
    }

    pub fn validate(&self) -> Result<()> {
        let b = &self.bounds;
        let pairs = [
            ("omega", b.omega),
            ("phi_plus", b.phi_plus),
            ("phi_minus", b.phi_minus),
            ("psi", self.psi_bounds()),
            ("alpha", b.alpha),
        ];
        for (name, (lo, hi)) in pairs {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::invalid(format!("bounds for {name} must satisfy lower < upper")));
            }
        }
        if b.omega.0 <= 0.0 || b.phi_plus.0 < 0.0 || b.phi_minus.0 < 0.0 || self.psi_bounds().0 < 0.0 {
            return Err(Error::invalid("parameter bounds leave the admissible region"));
        }
        if b.alpha.0 <= 0.0 || b.alpha.1 >= 2.0 {
            return Err(Error::invalid("alpha bounds must lie inside (0, 2)"));
        }
        if self.mode == FitMode::Stationary && self.psi_bounds().1 >= 1.0 {
            return Err(Error::invalid("stationary mode needs psi < 1"));
        }
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return Err(Error::invalid("optimizer tolerance and iteration limit must be positive"));
        }
        if !(1..=6).contains(&self.multistart) {
            return Err(Error::invalid("multistart must be between 1 and 6"));
        }
        if let Some(a) = self.fixed_alpha {
            if !(a > 0.0 && a < 2.0) {
                return Err(Error::invalid("fixed alpha must lie in (0, 2)"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartReport {
    pub start: [f64; 5],
    pub loglik: Option<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub theta_hat: ParamVector,
    pub loglik: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Projected gradient of the mean negative log-likelihood in the
    /// optimizer's internal coordinates.
    pub gradient_norm: f64,
    pub regime_estimate: LyapunovEstimate,
    pub aic: f64,
    pub n: usize,
    pub mode: FitMode,
    pub fixed_alpha: Option<f64>,
    /// False when the fitted exponent is positive: omega is then not
    /// identified and its estimate carries no inferential meaning.
    pub omega_inferential: bool,
    pub starts: Vec<StartReport>,
}

impl FitResult {
    pub fn free_parameters(&self) -> usize {
        if self.fixed_alpha.is_some() {
            4
        } else {
            5
        }
    }
}

fn at_obs(t: usize) -> impl FnOnce(Error) -> Error {
    move |e| Error::AtObservation {
        t,
        source: Box::new(e),
    }
}

/// `sum_t [-log sigma_t + log f_alpha(y_t / sigma_t)]` with zero initial values.
pub fn loglik(theta: &ParamVector, y: &ReturnSeries) -> Result<f64> {
    let lf = filter_log(theta, y, 0.0);
    let k = LogDensityKernel::global();
    let alpha = theta.alpha();
    let mut total = 0.0;
    for (t, (&l, &eta)) in lf.log_sigma2.iter().zip(&lf.residuals).enumerate() {
        let e = k.eval(alpha, eta).map_err(at_obs(t + 1))?;
        total += -0.5 * l + e.value;
    }
    Ok(total)
}

/// Log-likelihood and its gradient in `(omega, phi_plus, phi_minus, psi, alpha)`.
pub fn loglik_and_score(theta: &ParamVector, y: &ReturnSeries) -> Result<(f64, [f64; 5])> {
    let lf = filter_log(theta, y, 0.0);
    accumulate(theta.alpha(), &lf)
}

pub fn score(theta: &ParamVector, y: &ReturnSeries) -> Result<[f64; 5]> {
    Ok(loglik_and_score(theta, y)?.1)
}

fn accumulate(alpha: f64, lf: &LogFilter) -> Result<(f64, [f64; 5])> {
    let k = LogDensityKernel::global();
    let mut total = 0.0;
    let mut g = [0.0; 5];
    for (t, ((&l, &eta), d)) in lf.log_sigma2.iter().zip(&lf.residuals).zip(&lf.dlog_sigma2).enumerate() {
        let e = k.eval(alpha, eta).map_err(at_obs(t + 1))?;
        total += -0.5 * l + e.value;
        let w = -0.5 * (1.0 + e.d_x * eta);
        for i in 0..4 {
            g[i] += w * d[i];
        }
        g[4] += e.d_alpha;
    }
    Ok((total, g))
}

/// Maps between model parameters and the optimizer's box coordinates:
/// `log omega`, raw `phi`, logit-scaled or raw `psi`, raw `alpha`.
struct Transform {
    omega: (f64, f64),
    phi_plus: (f64, f64),
    phi_minus: (f64, f64),
    psi: (f64, f64),
    alpha: (f64, f64),
    logit_psi: bool,
    fixed_alpha: Option<f64>,
}

const LOGIT_RANGE: f64 = 40.0;

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl Transform {
    fn new(cfg: &FitConfig) -> Self {
        Transform {
            omega: cfg.bounds.omega,
            phi_plus: cfg.bounds.phi_plus,
            phi_minus: cfg.bounds.phi_minus,
            psi: cfg.psi_bounds(),
            alpha: cfg.bounds.alpha,
            logit_psi: cfg.mode == FitMode::Stationary,
            fixed_alpha: cfg.fixed_alpha,
        }
    }

    fn dim(&self) -> usize {
        if self.fixed_alpha.is_some() {
            4
        } else {
            5
        }
    }

    fn box_bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let psi = if self.logit_psi { (-LOGIT_RANGE, LOGIT_RANGE) } else { self.psi };
        let mut lo = vec![self.omega.0.ln(), self.phi_plus.0, self.phi_minus.0, psi.0];
        let mut hi = vec![self.omega.1.ln(), self.phi_plus.1, self.phi_minus.1, psi.1];
        if self.fixed_alpha.is_none() {
            lo.push(self.alpha.0);
            hi.push(self.alpha.1);
        }
        (lo, hi)
    }

    /// Parameters and `d param / d z` for the first four coordinates.
    fn to_params(&self, z: &[f64]) -> ([f64; 5], [f64; 4]) {
        let omega = z[0].exp();
        let (psi, dpsi) = if self.logit_psi {
            let s = sigmoid(z[3]);
            let w = self.psi.1 - self.psi.0;
            (self.psi.0 + w * s, w * s * (1.0 - s))
        } else {
            (z[3], 1.0)
        };
        let alpha = self.fixed_alpha.unwrap_or_else(|| z[4]);
        ([omega, z[1], z[2], psi, alpha], [omega, 1.0, 1.0, dpsi])
    }

    fn to_internal(&self, p: &[f64; 5]) -> Vec<f64> {
        let omega = p[0].clamp(self.omega.0, self.omega.1);
        let psi = p[3].clamp(self.psi.0, self.psi.1);
        let zpsi = if self.logit_psi {
            let s = ((psi - self.psi.0) / (self.psi.1 - self.psi.0)).clamp(1e-16, 1.0 - 1e-16);
            (s / (1.0 - s)).ln().clamp(-LOGIT_RANGE, LOGIT_RANGE)
        } else {
            psi
        };
        let mut z = vec![
            omega.ln(),
            p[1].clamp(self.phi_plus.0, self.phi_plus.1),
            p[2].clamp(self.phi_minus.0, self.phi_minus.1),
            zpsi,
        ];
        if self.fixed_alpha.is_none() {
            z.push(p[4].clamp(self.alpha.0, self.alpha.1));
        }
        z
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

fn start_grid(y: &ReturnSeries, cfg: &FitConfig) -> Vec<[f64; 5]> {
    let sq: Vec<f64> = y.values()[1..].iter().map(|v| v * v).filter(|v| *v > 0.0).collect();
    let m2 = if sq.is_empty() { 1.0 } else { median(sq) };
    let alphas: Vec<f64> = match cfg.fixed_alpha {
        Some(a) => vec![a],
        None => vec![0.8, 1.2, 1.6],
    };
    let mut grid = Vec::new();
    if let Some(p) = cfg.initial {
        grid.push(p.to_array());
    }
    for &a in &alphas {
        for &psi in &[0.3, 0.7] {
            grid.push([m2 * (1.0 - psi), 0.1, 0.1, psi, a]);
        }
    }
    let keep = if cfg.fixed_alpha.is_some() { cfg.multistart.min(2) } else { cfg.multistart };
    grid.truncate(keep + usize::from(cfg.initial.is_some()));
    grid
}

/// Box-constrained maximum likelihood with a deterministic multistart.
pub fn fit(y: &ReturnSeries, cfg: &FitConfig) -> Result<FitResult> {
    cfg.validate()?;
    let n = y.n();
    if n < MIN_OBSERVATIONS {
        return Err(Error::data(format!(
            "maximum likelihood needs at least {MIN_OBSERVATIONS} observations, got {n}"
        )));
    }
    if y.values().iter().all(|&v| v == 0.0) {
        return Err(Error::data("every observation is zero; the likelihood has no maximum"));
    }
    let tr = Transform::new(cfg);
    let (lo, hi) = tr.box_bounds();
    let nf = n as f64;
    let dim = tr.dim();
    let mut objective = |z: &[f64]| -> Result<(f64, Vec<f64>)> {
        let (p, jac) = tr.to_params(z);
        let theta = ParamVector::from_array(p)?;
        let (ll, s) = loglik_and_score(&theta, y)?;
        let mut g: Vec<f64> = (0..4).map(|i| -s[i] * jac[i] / nf).collect();
        if dim == 5 {
            g.push(-s[4] / nf);
        }
        Ok((-ll / nf, g))
    };
    let settings = Settings {
        gtol: cfg.tol,
        ftol: 1e-13,
        max_iter: cfg.max_iter,
    };

    let mut reports = Vec::new();
    let mut best: Option<optimize::Minimum> = None;
    let mut total_iter = 0;
    for start in start_grid(y, cfg) {
        let z0 = tr.to_internal(&start);
        let mut m = optimize::bfgs(&mut objective, &z0, &lo, &hi, settings);
        if let Some(ref r) = m {
            if !r.converged {
                // Simplex restart, then polish with BFGS.
                if let Some(nm) = optimize::nelder_mead(&mut objective, &r.x, &lo, &hi, 400 * dim) {
                    if let Some(p) = optimize::bfgs(&mut objective, &nm.x, &lo, &hi, settings) {
                        let better = p.f <= r.f;
                        let iters = r.iterations + nm.iterations + p.iterations;
                        if better {
                            m = Some(optimize::Minimum { iterations: iters, ..p });
                        }
                    }
                }
            }
        }
        match m {
            Some(r) => {
                total_iter += r.iterations;
                reports.push(StartReport {
                    start,
                    loglik: Some(-r.f * nf),
                    converged: r.converged,
                    iterations: r.iterations,
                    message: r.message.clone(),
                });
                let replace = match &best {
                    None => true,
                    Some(b) => (r.converged && !b.converged && r.f <= b.f + 1e-9) || r.f < b.f - 1e-12,
                };
                if replace {
                    best = Some(r);
                }
            }
            None => reports.push(StartReport {
                start,
                loglik: None,
                converged: false,
                iterations: 0,
                message: "start point could not be evaluated".into(),
            }),
        }
    }
    let Some(best) = best else {
        return Err(Error::Optimization {
            message: "every starting point failed".into(),
            diagnostics: reports.iter().map(|r| format!("start {:?}: {}", r.start, r.message)).collect(),
        });
    };
    let (p, _) = tr.to_params(&best.x);
    let theta_hat = ParamVector::from_array(p)?;
    let ll = loglik(&theta_hat, y)?;
    let resid = filter_log(&theta_hat, y, 0.0).residuals;
    let regime = lyapunov::gamma_res(&theta_hat.coefficient()?, &resid)?;
    let k = if cfg.fixed_alpha.is_some() { 4.0 } else { 5.0 };
    Ok(FitResult {
        theta_hat,
        loglik: ll,
        converged: best.converged,
        iterations: total_iter,
        gradient_norm: best.projected_gradient,
        omega_inferential: !(regime.gamma_hat > 0.0 && regime.regime != Regime::NearCritical),
        regime_estimate: regime,
        aic: -2.0 * ll + 2.0 * k,
        n,
        mode: cfg.mode,
        fixed_alpha: cfg.fixed_alpha,
        starts: reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::simulate;
    use crate::stable;

    #[test]
    fn single_term_likelihood() {
        let th = ParamVector::new(0.7, 0.1, 0.2, 0.4, 1.3).unwrap();
        let y = ReturnSeries::new(vec![0.0, 0.9]).unwrap();
        let want = -0.5 * 0.7f64.ln() + stable::log_pdf(1.3, 0.9 / 0.7f64.sqrt()).unwrap();
        assert!((loglik(&th, &y).unwrap() - want).abs() < 1e-8);
        let c = ParamVector::new(1.0, 0.0, 0.0, 0.0, 1.0).unwrap();
        let y = ReturnSeries::new(vec![0.0, 1.0]).unwrap();
        assert!((loglik(&c, &y).unwrap() + (2.0 * std::f64::consts::PI).ln()).abs() < 1e-9);
    }

    #[test]
    fn negation_swaps_phis() {
        let th = ParamVector::new(0.2, 0.1, 0.25, 0.5, 1.5).unwrap();
        let p = simulate(&th, 200, 1, 100).unwrap();
        let a = loglik(&th, &p.series).unwrap();
        let b = loglik(&th.swapped(), &p.series.negated()).unwrap();
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn fit_recovers_design() {
        let th = ParamVector::new(0.2, 0.1, 0.2, 0.5, 1.5).unwrap();
        let p = simulate(&th, 1000, 2024, 500).unwrap();
        let f = fit(&p.series, &FitConfig::default()).unwrap();
        assert!(f.converged, "{:?}", f.starts);
        assert!(f.loglik >= loglik(&th, &p.series).unwrap());
        let est = f.theta_hat.to_array();
        let tol = [0.2, 0.08, 0.1, 0.15, 0.15];
        for i in 0..5 {
            assert!((est[i] - th.to_array()[i]).abs() < tol[i], "{i}: {est:?}");
        }
        assert!(f.gradient_norm < 1e-4);
    }

    #[test]
    fn short_series_rejected() {
        let y = ReturnSeries::new(vec![0.1; 15]).unwrap();
        assert!(matches!(fit(&y, &FitConfig::default()), Err(Error::Data(_))));
    }
}
