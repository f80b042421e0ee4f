//! The standardized symmetric stable law S(alpha, 0, 1, 0) with characteristic
//! function `exp(-|s|^alpha)`.
//!
//! [`StableDist`] evaluates everything directly (closed forms, tail series or
//! oscillatory quadrature). The likelihood code instead goes through
//! [`LogDensityKernel`], a cached interpolation table built from the same
//! direct evaluations.

mod density;
mod expect;
mod kernel;
mod sample;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use density::LogTerms;
pub use expect::{Coefficient, CoefficientMoment, Expectation, Functional};
pub use kernel::{LogDensityEval, LogDensityKernel};
pub use sample::sample_standard_stable;

use crate::error::{Error, Result};

/// A validated stability exponent, `0 < alpha <= 2`.
///
/// `alpha = 2` (Gaussian N(0, 2)) is accepted as an evaluation point; the
/// innovation law of the model requires `alpha < 2`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct StableExponent(f64);

impl StableExponent {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha.is_finite() && alpha > 0.0 && alpha <= 2.0 {
            Ok(StableExponent(alpha))
        } else {
            Err(Error::invalid(format!("stability exponent must lie in (0, 2], got {alpha}")))
        }
    }

    /// Exponent for the innovation law: `0 < alpha < 2`.
    pub fn non_gaussian(alpha: f64) -> Result<Self> {
        let a = Self::new(alpha)?;
        if alpha >= 2.0 {
            return Err(Error::invalid("innovation law requires alpha < 2"));
        }
        Ok(a)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for StableExponent {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        StableExponent::new(v)
    }
}

impl From<StableExponent> for f64 {
    fn from(a: StableExponent) -> f64 {
        a.0
    }
}

/// How the Fourier integrals are partitioned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum OscillationSplit {
    /// One panel per half period of the kernel, Wynn-accelerated.
    #[default]
    HalfPeriod,
}

/// Tolerances and branch thresholds for the direct evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub oscillation_split: OscillationSplit,
    /// `|x|` beyond which the tail series replaces quadrature. `None` means
    /// `15 * max(1, alpha)`.
    pub tail_crossover: Option<f64>,
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            oscillation_split: OscillationSplit::HalfPeriod,
            tail_crossover: None,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::invalid("quadrature tolerances must be positive"));
        }
        if let Some(c) = self.tail_crossover {
            if !(c > 0.0) {
                return Err(Error::invalid("tail crossover must be positive"));
            }
        }
        if self.max_subdivisions == 0 {
            return Err(Error::invalid("max_subdivisions must be at least 1"));
        }
        Ok(())
    }

    pub fn crossover(&self, alpha: f64) -> f64 {
        self.tail_crossover.unwrap_or(15.0 * alpha.max(1.0))
    }
}

/// Standardized symmetric stable distribution with a fixed exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableDist {
    alpha: StableExponent,
    config: QuadratureConfig,
}

impl StableDist {
    pub fn new(alpha: f64) -> Result<Self> {
        Self::with_config(alpha, QuadratureConfig::default())
    }

    pub fn with_config(alpha: f64, config: QuadratureConfig) -> Result<Self> {
        config.validate()?;
        Ok(StableDist {
            alpha: StableExponent::new(alpha)?,
            config,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.value()
    }

    pub fn config(&self) -> &QuadratureConfig {
        &self.config
    }

    /// `log f`, `d log f/dx`, `d log f/d alpha` and the mixed derivative at `x`.
    pub fn log_terms(&self, x: f64) -> Result<LogTerms> {
        density::log_terms(self.alpha(), x, &self.config)
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        Ok(self.log_pdf(x)?.exp())
    }

    pub fn log_pdf(&self, x: f64) -> Result<f64> {
        Ok(self.log_terms(x)?.log_f)
    }

    pub fn dlogf_dx(&self, x: f64) -> Result<f64> {
        Ok(self.log_terms(x)?.dx)
    }

    /// `d log f / d alpha`, by differentiating the inversion integral under
    /// the integral sign. Requires `alpha < 2`.
    pub fn dlogf_dalpha(&self, x: f64) -> Result<f64> {
        if self.alpha() >= 2.0 {
            return Err(Error::domain("d log f / d alpha is defined only for alpha < 2"));
        }
        Ok(self.log_terms(x)?.dalpha)
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        if x.is_nan() {
            return Err(Error::domain("cdf argument is NaN"));
        }
        if x == f64::INFINITY {
            return Ok(1.0);
        }
        if x == f64::NEG_INFINITY {
            return Ok(0.0);
        }
        let sf = density::survival(self.alpha(), x.abs(), &self.config)?;
        Ok(if x >= 0.0 { 1.0 - sf } else { sf })
    }

    /// P(X > x).
    pub fn sf(&self, x: f64) -> Result<f64> {
        Ok(self.cdf(-x)?)
    }

    /// Inverse of [`cdf`](Self::cdf) by safeguarded Newton iteration,
    /// converged to `1e-12` in probability.
    pub fn quantile(&self, r: f64) -> Result<f64> {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::domain(format!("quantile level must lie in (0, 1), got {r}")));
        }
        if r == 0.5 {
            return Ok(0.0);
        }
        // Solve on the upper half: P(X > x) = tail.
        let tail = r.min(1.0 - r);
        let upper = self.upper_quantile(tail)?;
        Ok(if r > 0.5 { upper } else { -upper })
    }

    fn upper_quantile(&self, tail: f64) -> Result<f64> {
        const TOL: f64 = 1e-12;
        let alpha = self.alpha();
        let sf = |x: f64| density::survival(alpha, x, &self.config);
        let mut lo = 0.0;
        let mut hi = 1.0;
        while sf(hi)? > tail {
            lo = hi;
            hi *= 2.0;
            if hi > 1e300 {
                return Err(Error::domain("quantile is beyond the representable range"));
            }
        }
        let mut x = 0.5 * (lo + hi);
        for _ in 0..200 {
            let g = sf(x)? - tail;
            if g.abs() <= TOL.min(1e-9 * tail) {
                return Ok(x);
            }
            if g > 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let dens = self.pdf(x)?;
            let newton = x + g / dens;
            x = if dens > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if hi - lo <= 1e-15 * hi {
                return Ok(x);
            }
        }
        Ok(x)
    }

    /// `n` i.i.d. draws via Chambers–Mallows–Stuck, deterministic in `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| self.draw(&mut rng)).collect()
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        sample_standard_stable(self.alpha(), rng)
    }

    /// `E g(eta)` by quadrature against the density.
    pub fn expect(&self, g: &Functional) -> Result<Expectation> {
        Ok(self.expect_many(std::slice::from_ref(g))?.remove(0))
    }

    /// Several expectations sharing density evaluations.
    pub fn expect_many(&self, gs: &[Functional]) -> Result<Vec<Expectation>> {
        expect::expect_many(self.alpha(), &self.config, gs)
    }
}

/// Density of S(alpha, 0, 1, 0) at `x`.
pub fn pdf(alpha: f64, x: f64) -> Result<f64> {
    StableDist::new(alpha)?.pdf(x)
}

pub fn log_pdf(alpha: f64, x: f64) -> Result<f64> {
    StableDist::new(alpha)?.log_pdf(x)
}

pub fn cdf(alpha: f64, x: f64) -> Result<f64> {
    StableDist::new(alpha)?.cdf(x)
}

pub fn quantile(alpha: f64, r: f64) -> Result<f64> {
    StableDist::new(alpha)?.quantile(r)
}

pub fn dlogf_dx(alpha: f64, x: f64) -> Result<f64> {
    StableDist::new(alpha)?.dlogf_dx(x)
}

pub fn dlogf_dalpha(alpha: f64, x: f64) -> Result<f64> {
    StableDist::new(alpha)?.dlogf_dalpha(x)
}

pub fn sample(alpha: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::invalid("sample size must be at least 1"));
    }
    Ok(StableDist::new(alpha)?.sample(n, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::gamma::{digamma, gamma};
    use std::f64::consts::PI;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn pdf_special_points() {
        close(pdf(1.0, 0.0).unwrap(), 1.0 / PI, 1e-15);
        close(pdf(2.0, 0.0).unwrap(), 1.0 / (2.0 * PI.sqrt()), 1e-15);
        close(pdf(1.5, 0.0).unwrap(), gamma(1.0 + 1.0 / 1.5) / PI, 1e-14);
    }

    #[test]
    fn log_pdf_examples() {
        close(log_pdf(1.0, 1.0).unwrap(), (1.0 / (2.0 * PI)).ln(), 1e-14);
        close(log_pdf(2.0, 0.0).unwrap(), -(2.0 * PI.sqrt()).ln(), 1e-14);
        // tail branch at x = 30 for alpha = 1.5 is finite and below the mode
        let v = log_pdf(1.5, 30.0).unwrap();
        assert!(v.is_finite() && v < log_pdf(1.5, 0.0).unwrap());
    }

    #[test]
    fn cdf_examples() {
        close(cdf(1.3, 0.0).unwrap(), 0.5, 1e-15);
        close(cdf(1.0, 1.0).unwrap(), 0.75, 1e-15);
        close(cdf(2.0, 2.0).unwrap(), 0.921_350_396_474_857_1, 1e-12);
        let d = StableDist::new(1.4).unwrap();
        for &x in &[0.3, 1.0, 4.0, 25.0] {
            close(d.cdf(x).unwrap() + d.cdf(-x).unwrap(), 1.0, 1e-12);
        }
    }

    #[test]
    fn quantile_examples() {
        close(quantile(1.7, 0.5).unwrap(), 0.0, 0.0);
        close(quantile(1.0, 0.75).unwrap(), 1.0, 1e-10);
        let q = quantile(1.5, 0.9).unwrap();
        close(cdf(1.5, q).unwrap(), 0.9, 1e-10);
        close(quantile(1.5, 0.1).unwrap(), -q, 1e-12);
        assert!(quantile(1.5, 1.0).is_err());
        assert!(quantile(1.5, 0.0).is_err());
    }

    #[test]
    fn dlogf_dx_examples() {
        close(dlogf_dx(1.0, 1.0).unwrap(), -1.0, 1e-14);
        close(dlogf_dx(2.0, 2.0).unwrap(), -1.0, 1e-14);
        let h = 1e-5;
        let fd = (log_pdf(1.5, 0.7 + h).unwrap() - log_pdf(1.5, 0.7 - h).unwrap()) / (2.0 * h);
        let an = dlogf_dx(1.5, 0.7).unwrap();
        assert!(((fd - an) / an).abs() < 1e-6);
    }

    #[test]
    fn dlogf_dalpha_examples() {
        let a = 1.5;
        close(dlogf_dalpha(a, 0.0).unwrap(), -digamma(1.0 + 1.0 / a) / (a * a), 1e-12);
        let h = 1e-5;
        let fd = (log_pdf(1.2 + h, 1.3).unwrap() - log_pdf(1.2 - h, 1.3).unwrap()) / (2.0 * h);
        let an = dlogf_dalpha(1.2, 1.3).unwrap();
        assert!(((fd - an) / an).abs() < 1e-5, "{fd} {an}");
        close(dlogf_dalpha(1.5, 0.9).unwrap(), dlogf_dalpha(1.5, -0.9).unwrap(), 0.0);
        assert!(dlogf_dalpha(2.0, 0.1).is_err());
    }

    #[test]
    fn exponent_validation() {
        assert!(StableExponent::new(0.0).is_err());
        assert!(StableExponent::new(2.1).is_err());
        assert!(StableExponent::new(f64::NAN).is_err());
        assert!(StableExponent::non_gaussian(2.0).is_err());
        assert!(StableExponent::new(2.0).is_ok());
        assert!(pdf(1.5, f64::INFINITY).is_err());
        assert!(sample(1.5, 0, 1).is_err());
    }

    #[test]
    fn config_validation() {
        let bad = QuadratureConfig {
            abs_tol: 0.0,
            ..QuadratureConfig::default()
        };
        assert!(StableDist::with_config(1.5, bad).is_err());
        let bad = QuadratureConfig {
            tail_crossover: Some(-1.0),
            ..QuadratureConfig::default()
        };
        assert!(StableDist::with_config(1.5, bad).is_err());
    }
}
