//! Direct evaluation of the standardized symmetric stable density, its
//! log-derivatives and the distribution function.
//!
//! Three routes, chosen per point:
//! * exact closed forms at alpha = 1 (Cauchy) and alpha = 2 (N(0, 2));
//! * the power series in `x^{-alpha}` when it is accurate (asymptotic for
//!   alpha >= 1 beyond the tail crossover, convergent for alpha < 1 whenever it
//!   is well conditioned);
//! * otherwise the Fourier inversion integral, summed over half periods.

use std::f64::consts::{FRAC_1_PI, PI};

use num_complex::Complex64;
use libm::erfc;
use statrs::function::gamma::{digamma, ln_gamma};

use super::QuadratureConfig;
use crate::error::{Error, Result};
use crate::quad;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `log f` and its partial derivatives at a point, as log-derivatives so that
/// far-tail values never underflow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogTerms {
    /// log f(x)
    pub log_f: f64,
    /// d log f / dx
    pub dx: f64,
    /// d log f / d alpha
    pub dalpha: f64,
    /// d^2 log f / dx d alpha
    pub dx_dalpha: f64,
}

impl LogTerms {
    fn from_raw(f: f64, f_x: f64, f_a: f64, f_xa: f64) -> Self {
        let dx = f_x / f;
        let dalpha = f_a / f;
        LogTerms {
            log_f: f.ln(),
            dx,
            dalpha,
            dx_dalpha: f_xa / f - dx * dalpha,
        }
    }

    /// Reflect terms computed at |x| to x < 0.
    pub(crate) fn reflect(self) -> Self {
        LogTerms {
            log_f: self.log_f,
            dx: -self.dx,
            dalpha: self.dalpha,
            dx_dalpha: -self.dx_dalpha,
        }
    }
}

/// Log-density terms at `x` (any sign).
pub(crate) fn log_terms(alpha: f64, x: f64, cfg: &QuadratureConfig) -> Result<LogTerms> {
    if !x.is_finite() {
        return Err(Error::domain(format!("density argument must be finite, got {x}")));
    }
    let ax = x.abs();
    let t = log_terms_nonneg(alpha, ax, cfg)?;
    Ok(if x < 0.0 { t.reflect() } else { t })
}

fn log_terms_nonneg(alpha: f64, x: f64, cfg: &QuadratureConfig) -> Result<LogTerms> {
    if alpha == 2.0 {
        return Ok(gaussian_terms(x));
    }
    if alpha == 1.0 {
        return Ok(cauchy_terms(x));
    }
    if x == 0.0 {
        let g = 1.0 + 1.0 / alpha;
        return Ok(LogTerms {
            log_f: ln_gamma(g) - PI.ln(),
            dx: 0.0,
            dalpha: -digamma(g) / (alpha * alpha),
            dx_dalpha: 0.0,
        });
    }
    if alpha < 1.0 || x >= cfg.crossover(alpha) {
        if let Some(series) = tail_series(alpha, x) {
            if series.accurate {
                return Ok(series.terms);
            }
        }
    }
    fourier_terms(alpha, x, cfg)
}

fn gaussian_terms(x: f64) -> LogTerms {
    LogTerms {
        log_f: -x * x / 4.0 - (2.0 * PI.sqrt()).ln(),
        dx: -x / 2.0,
        dalpha: f64::NAN,
        dx_dalpha: f64::NAN,
    }
}

/// Cauchy closed forms; the alpha-derivative uses
/// `int_0^inf s log(s) e^{-s} e^{isx} ds = (psi(2) - log z) / z^2`, `z = 1 - ix`.
fn cauchy_terms(x: f64) -> LogTerms {
    let q = 1.0 + x * x;
    let z = Complex64::new(1.0, -x);
    let psi2 = 1.0 - EULER_GAMMA;
    let z2 = z * z;
    let z3 = z2 * z;
    let core = (psi2 - z.ln()) / z2;
    // d/dx core = -i * d/dz core, d/dz core = -(1 + 2 (psi2 - log z)) / z^3
    let dcore_dz = -(1.0 + 2.0 * (psi2 - z.ln())) / z3;
    let dcore_dx = Complex64::new(0.0, -1.0) * dcore_dz;
    let f = FRAC_1_PI / q;
    let f_x = -2.0 * x * FRAC_1_PI / (q * q);
    let f_a = -FRAC_1_PI * core.re;
    let f_xa = -FRAC_1_PI * dcore_dx.re;
    LogTerms::from_raw(f, f_x, f_a, f_xa)
}

/// Largest `s` worth integrating: beyond it `s^(alpha+1) |log s| exp(-s^alpha)`
/// is below ~1e-18.
fn envelope_cutoff(alpha: f64) -> f64 {
    let mut s: f64 = 41.5f64.powf(1.0 / alpha);
    for _ in 0..4 {
        let l = 41.5 + (alpha + 1.5) * s.ln().max(0.0);
        s = l.powf(1.0 / alpha);
    }
    s
}

fn fourier_terms(alpha: f64, x: f64, cfg: &QuadratureConfig) -> Result<LogTerms> {
    let integrand = |s: f64| -> [f64; 4] {
        if s <= 0.0 {
            return [1.0, 0.0, 0.0, 0.0];
        }
        let ls = s.ln();
        let sa = (alpha * ls).exp();
        let e = (-sa).exp();
        let (sn, c) = (s * x).sin_cos();
        let w = sa * ls * e;
        [e * c, -s * e * sn, -w * c, w * s * sn]
    };
    let cutoff = envelope_cutoff(alpha);
    let abs_tol = cfg.abs_tol * PI;
    let out = quad::half_period_sum(
        &integrand,
        PI / x,
        cutoff,
        abs_tol,
        cfg.rel_tol,
        cfg.max_subdivisions,
    );
    let est = out.into_result("stable density quadrature", cfg.abs_tol)?;
    let [f, f_x, f_a, f_xa] = est.value.map(|v| v * FRAC_1_PI);
    if f <= 0.0 {
        return Err(Error::NumericFailure {
            context: format!("stable density quadrature at alpha={alpha}, x={x} returned non-positive value {f:e}"),
            requested: cfg.abs_tol,
            achieved: est.max_error() * FRAC_1_PI,
        });
    }
    Ok(LogTerms::from_raw(f, f_x, f_a, f_xa))
}

pub(crate) struct SeriesTerms {
    pub terms: LogTerms,
    /// log of the survival function P(X > x).
    pub log_sf: f64,
    pub accurate: bool,
}

/// Tail expansion `f(x) = (1/pi) sum_k (-1)^{k+1} Gamma(k alpha + 1) sin(k pi alpha / 2) x^{-k alpha - 1} / k!`,
/// differentiated term by term in x and alpha, together with the matching
/// survival-function series.
pub(crate) fn tail_series(alpha: f64, x: f64) -> Option<SeriesTerms> {
    if x <= 0.0 || alpha <= 0.0 || alpha >= 2.0 {
        return None;
    }
    let lx = x.ln();
    let convergent = alpha < 1.0;
    let max_terms = if convergent { 4000 } else { 400 };
    let log_b1 = ln_gamma(alpha + 1.0) - alpha * lx;

    let (mut s0, mut s_x, mut s_a, mut s_xa, mut s_sf) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let mut max_mag: f64 = 0.0;
    let mut prev_mag = f64::INFINITY;
    let mut last_mag = 0.0;
    let mut small_run = 0;
    for k in 1..=max_terms {
        let kf = k as f64;
        let ka1 = kf * alpha + 1.0;
        let log_b = ln_gamma(ka1) - ln_gamma(kf + 1.0) - kf * alpha * lx;
        let b = (log_b - log_b1).exp();
        let mag = b * (2.0 + kf * (1.0 + lx.abs()) + digamma(ka1).abs()) * (ka1 + 1.0);
        if !convergent && k > 1 && mag > prev_mag {
            last_mag = prev_mag;
            break;
        }
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        let (sin_k, cos_k) = (kf * PI * alpha / 2.0).sin_cos();
        let sigma = sign * sin_k;
        let tau = sign * cos_k * kf * PI / 2.0;
        let dlog = kf * digamma(ka1) - kf * lx;
        let a_part = sigma * dlog + tau;
        s0 += sigma * b;
        s_x += sigma * b * (-ka1);
        s_a += b * a_part;
        s_xa += b * (a_part * (-ka1) - kf * sigma);
        s_sf += sigma * b / (kf * alpha);
        max_mag = max_mag.max(mag);
        prev_mag = mag;
        last_mag = mag;
        if convergent {
            if mag < 1e-17 * s0.abs() {
                small_run += 1;
                if small_run >= 3 {
                    break;
                }
            } else {
                small_run = 0;
            }
        }
    }
    if s0 <= 0.0 || s_sf <= 0.0 {
        return None;
    }
    let scale = s0.abs();
    let accurate = if convergent {
        small_run >= 3 && max_mag / scale < 1e5
    } else {
        last_mag < 1e-13 * scale
    };
    let terms = LogTerms {
        log_f: log_b1 + s0.ln() - (PI * x).ln(),
        dx: s_x / (s0 * x),
        dalpha: s_a / s0,
        dx_dalpha: s_xa / (s0 * x) - (s_x / (s0 * x)) * (s_a / s0),
    };
    Some(SeriesTerms {
        terms,
        log_sf: log_b1 + s_sf.ln() - PI.ln(),
        accurate,
    })
}

/// Survival function P(X > x) for x >= 0, returned as (sf, error estimate).
pub(crate) fn survival(alpha: f64, x: f64, cfg: &QuadratureConfig) -> Result<f64> {
    debug_assert!(x >= 0.0);
    if x == 0.0 {
        return Ok(0.5);
    }
    if alpha == 2.0 {
        return Ok(0.5 * erfc(x / 2.0));
    }
    if alpha == 1.0 {
        // atan(1/x)/pi is accurate in the far tail
        return Ok((1.0 / x).atan() * FRAC_1_PI);
    }
    if alpha < 1.0 || x >= cfg.crossover(alpha) {
        if let Some(series) = tail_series(alpha, x) {
            if series.accurate {
                return Ok(series.log_sf.exp());
            }
        }
    }
    let integrand = |s: f64| -> [f64; 1] {
        if s <= 0.0 {
            return [x];
        }
        let e = (-s.powf(alpha)).exp();
        [e * (s * x).sin() / s]
    };
    let cutoff = envelope_cutoff(alpha);
    let out = quad::half_period_sum(
        &integrand,
        PI / x,
        cutoff,
        cfg.abs_tol * PI,
        cfg.rel_tol,
        cfg.max_subdivisions,
    );
    let est = out.into_result("stable distribution function quadrature", cfg.abs_tol)?;
    Ok((0.5 - est.value[0] * FRAC_1_PI).max(0.0))
}
