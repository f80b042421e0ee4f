//! Top Lyapunov exponent `gamma = E log a(eta)` of the volatility recursion.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stable::{Coefficient, Functional, StableDist};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorKind {
    /// Quadrature against the fitted stable density.
    Int,
    /// Sample average over residuals.
    Res,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Stationary,
    Explosive,
    NearCritical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovEstimate {
    pub gamma_hat: f64,
    pub kind: EstimatorKind,
    /// Standard deviation of `log a(eta)`.
    pub sigma_u_hat: f64,
    pub regime: Regime,
    /// Sample size used for the near-critical band.
    pub n: usize,
}

impl LyapunovEstimate {
    fn classify(gamma_hat: f64, kind: EstimatorKind, sigma_u_hat: f64, n: usize) -> Self {
        let band = 2.0 * sigma_u_hat / (n as f64).sqrt();
        let regime = if gamma_hat.abs() < band {
            Regime::NearCritical
        } else if gamma_hat < 0.0 {
            Regime::Stationary
        } else {
            Regime::Explosive
        };
        LyapunovEstimate {
            gamma_hat,
            kind,
            sigma_u_hat,
            regime,
            n,
        }
    }
}

/// `log[(sqrt(phi_plus) + sqrt(psi)) (sqrt(phi_minus) + sqrt(psi))]`, exact for
/// Cauchy innovations.
pub fn gamma_closed_form_cauchy(phi_plus: f64, phi_minus: f64, psi: f64) -> Result<f64> {
    Coefficient::new(phi_plus, phi_minus, psi)?;
    Ok(((phi_plus.sqrt() + psi.sqrt()) * (phi_minus.sqrt() + psi.sqrt())).ln())
}

/// Residual estimator: mean and standard deviation of `log a(eta_hat_t)`.
pub fn gamma_res(coef: &Coefficient, residuals: &[f64]) -> Result<LyapunovEstimate> {
    if residuals.is_empty() {
        return Err(Error::invalid("no residuals"));
    }
    let n = residuals.len() as f64;
    let (mut s1, mut s2) = (0.0, 0.0);
    for &e in residuals {
        let la = coef.eval(e).ln();
        if !la.is_finite() {
            return Err(Error::domain("log a(eta) is not finite; psi = 0 with a zero residual"));
        }
        s1 += la;
        s2 += la * la;
    }
    let mean = s1 / n;
    let var = (s2 / n - mean * mean).max(0.0);
    Ok(LyapunovEstimate::classify(mean, EstimatorKind::Res, var.sqrt(), residuals.len()))
}

/// Integral estimator at exponent `alpha`; `n` only sets the near-critical band.
pub fn gamma_int(coef: &Coefficient, alpha: f64, n: usize) -> Result<LyapunovEstimate> {
    let dist = StableDist::new(alpha)?;
    let e = dist.expect_many(&[Functional::LogCoefficient(*coef), Functional::LogCoefficientSquared(*coef)])?;
    let gamma = e[0].value;
    let var = (e[1].value - gamma * gamma).max(0.0);
    Ok(LyapunovEstimate::classify(gamma, EstimatorKind::Int, var.sqrt(), n.max(1)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_coefficient() {
        let c = Coefficient::new(0.0, 0.0, 0.5).unwrap();
        let r = gamma_res(&c, &[0.3, -1.0, 7.0]).unwrap();
        assert!((r.gamma_hat - 0.5f64.ln()).abs() < 1e-15);
        assert_eq!(r.sigma_u_hat, 0.0);
        let i = gamma_int(&c, 1.4, 100).unwrap();
        assert!((i.gamma_hat - 0.5f64.ln()).abs() < 1e-10);
        assert_eq!(i.regime, Regime::Stationary);
    }

    #[test]
    fn cauchy_closed_form_matches_quadrature() {
        let c = Coefficient::new(0.1, 0.2, 0.5).unwrap();
        let exact = gamma_closed_form_cauchy(0.1, 0.2, 0.5).unwrap();
        let q = gamma_int(&c, 1.0, 1000).unwrap();
        assert!((q.gamma_hat - exact).abs() < 1e-8, "{} vs {exact}", q.gamma_hat);
        assert_eq!(gamma_closed_form_cauchy(0.0, 0.0, 0.3).unwrap(), 0.3f64.ln());
        assert_eq!(gamma_closed_form_cauchy(0.1, 0.2, 0.5).unwrap(), gamma_closed_form_cauchy(0.2, 0.1, 0.5).unwrap());
        assert!(gamma_closed_form_cauchy(0.0, 0.0, 0.0).is_err());
    }
}
