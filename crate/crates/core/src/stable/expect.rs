//! Expectations `E g(eta)` of registered functionals of a standardized stable
//! variable, by adaptive quadrature against the density.

use std::cell::RefCell;

use serde::{Deserialize, Serialize};

use super::density::{self, LogTerms};
use super::QuadratureConfig;
use crate::error::{Error, Result};
use crate::quad;

/// Coefficient function `a(x) = phi_plus (x+)^2 + phi_minus (x-)^2 + psi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub phi_plus: f64,
    pub phi_minus: f64,
    pub psi: f64,
}

impl Coefficient {
    pub fn new(phi_plus: f64, phi_minus: f64, psi: f64) -> Result<Self> {
        for (name, v) in [("phi_plus", phi_plus), ("phi_minus", phi_minus), ("psi", psi)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(format!("{name} must be finite and nonnegative, got {v}")));
            }
        }
        if phi_plus == 0.0 && phi_minus == 0.0 && psi == 0.0 {
            return Err(Error::domain("coefficient a(x) is identically zero"));
        }
        Ok(Coefficient { phi_plus, phi_minus, psi })
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        let x2 = x * x;
        if x >= 0.0 {
            self.phi_plus * x2 + self.psi
        } else {
            self.phi_minus * x2 + self.psi
        }
    }

    pub fn swapped(&self) -> Self {
        Coefficient {
            phi_plus: self.phi_minus,
            phi_minus: self.phi_plus,
            psi: self.psi,
        }
    }
}

/// `psi^r (x+)^(2 p) (x-)^(2 q) / a(x)^m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientMoment {
    pub coef: Coefficient,
    pub psi_power: u32,
    pub plus: u32,
    pub minus: u32,
    pub a_power: u32,
}

impl CoefficientMoment {
    /// `nu_i = E (psi / a)^i`.
    pub fn nu(coef: Coefficient, i: u32) -> Self {
        CoefficientMoment {
            coef,
            psi_power: i,
            plus: 0,
            minus: 0,
            a_power: i,
        }
    }

    #[inline]
    fn eval(&self, x: f64) -> f64 {
        let a = self.coef.eval(x);
        let mut v = self.coef.psi.powi(self.psi_power as i32) / a.powi(self.a_power as i32);
        let (xp, xm) = if x >= 0.0 { (x, 0.0) } else { (0.0, -x) };
        if self.plus > 0 {
            v *= (xp * xp).powi(self.plus as i32);
        }
        if self.minus > 0 {
            v *= (xm * xm).powi(self.minus as i32);
        }
        v
    }

    fn check(&self) -> Result<()> {
        if self.a_power > 0 && self.coef.psi <= 0.0 {
            return Err(Error::domain("moment with 1/a(x) needs psi > 0"));
        }
        let unbounded = (self.plus > 0 && self.coef.phi_plus == 0.0) || (self.minus > 0 && self.coef.phi_minus == 0.0);
        if unbounded || self.plus.max(self.minus) > self.a_power {
            return Err(Error::domain("moment grows polynomially and is not integrable under a stable law"));
        }
        Ok(())
    }
}

/// Functionals with a known integrability class under the stable law.
/// `lx` and `la` below denote `d log f/dx` and `d log f/d alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Functional {
    /// 1
    One,
    /// lx
    Score,
    /// lx^2
    LocationInformation,
    /// 1 + x lx
    ScaleScore,
    /// (1 + x lx)^2
    ScaleInformation,
    /// la
    AlphaScore,
    /// la^2
    AlphaInformation,
    /// lx la x
    CrossInformation,
    /// log a(x)
    LogCoefficient(Coefficient),
    /// (log a(x))^2
    LogCoefficientSquared(Coefficient),
    /// log a(x) (1 + x lx)
    LogCoefficientScaleScore(Coefficient),
    /// log a(x) la
    LogCoefficientAlphaScore(Coefficient),
    Moment(CoefficientMoment),
}

impl Functional {
    fn needs_alpha(&self) -> bool {
        matches!(
            self,
            Functional::AlphaScore
                | Functional::AlphaInformation
                | Functional::CrossInformation
                | Functional::LogCoefficientAlphaScore(_)
        )
    }

    fn coefficient(&self) -> Option<&Coefficient> {
        match self {
            Functional::LogCoefficient(c)
            | Functional::LogCoefficientSquared(c)
            | Functional::LogCoefficientScaleScore(c)
            | Functional::LogCoefficientAlphaScore(c) => Some(c),
            Functional::Moment(m) => Some(&m.coef),
            _ => None,
        }
    }

    fn check(&self) -> Result<()> {
        if let Some(c) = self.coefficient() {
            Coefficient::new(c.phi_plus, c.phi_minus, c.psi)?;
        }
        if let Functional::Moment(m) = self {
            m.check()?;
        }
        Ok(())
    }

    /// Even in x (with x < 0 evaluated from reflected terms).
    fn is_even(&self) -> bool {
        match self.coefficient() {
            Some(c) => {
                if let Functional::Moment(m) = self {
                    m.plus == m.minus && c.phi_plus == c.phi_minus
                } else {
                    c.phi_plus == c.phi_minus
                }
            }
            None => !matches!(self, Functional::Score),
        }
    }

    fn eval(&self, x: f64, t: &LogTerms) -> f64 {
        let scale = 1.0 + x * t.dx;
        match self {
            Functional::One => 1.0,
            Functional::Score => t.dx,
            Functional::LocationInformation => t.dx * t.dx,
            Functional::ScaleScore => scale,
            Functional::ScaleInformation => scale * scale,
            Functional::AlphaScore => t.dalpha,
            Functional::AlphaInformation => t.dalpha * t.dalpha,
            Functional::CrossInformation => t.dx * t.dalpha * x,
            Functional::LogCoefficient(c) => c.eval(x).ln(),
            Functional::LogCoefficientSquared(c) => c.eval(x).ln().powi(2),
            Functional::LogCoefficientScaleScore(c) => c.eval(x).ln() * scale,
            Functional::LogCoefficientAlphaScore(c) => c.eval(x).ln() * t.dalpha,
            Functional::Moment(m) => m.eval(x),
        }
    }
}

/// Quadrature value with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Expectation {
    pub value: f64,
    pub error: f64,
}

const CHUNK: usize = 8;

pub(crate) fn expect_many(alpha: f64, cfg: &QuadratureConfig, gs: &[Functional]) -> Result<Vec<Expectation>> {
    for g in gs {
        g.check()?;
        if alpha >= 2.0 && g.needs_alpha() {
            return Err(Error::domain("alpha-score functionals need alpha < 2"));
        }
    }
    let mut out = Vec::with_capacity(gs.len());
    for chunk in gs.chunks(CHUNK) {
        out.extend(expect_chunk(alpha, cfg, chunk)?);
    }
    Ok(out)
}

fn expect_chunk(alpha: f64, cfg: &QuadratureConfig, gs: &[Functional]) -> Result<Vec<Expectation>> {
    let all_even = gs.iter().all(|g| g.is_even());
    let mut total = [0.0; CHUNK];
    let mut err = [0.0; CHUNK];
    let signs: &[f64] = if all_even { &[1.0] } else { &[1.0, -1.0] };
    for &sign in signs {
        let half = half_line(alpha, cfg, gs, sign)?;
        for i in 0..gs.len() {
            let w = if all_even { 2.0 } else { 1.0 };
            total[i] += w * half.value[i];
            err[i] += w * half.error[i];
        }
    }
    Ok((0..gs.len())
        .map(|i| {
            let value = if matches!(gs[i], Functional::Score) { 0.0 } else { total[i] };
            Expectation { value, error: err[i] }
        })
        .collect())
}

/// `int_0^inf g(sign * u) f(u) du` for each functional in the chunk.
fn half_line(alpha: f64, cfg: &QuadratureConfig, gs: &[Functional], sign: f64) -> Result<quad::Estimate<CHUNK>> {
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let eval = |x: f64| -> Option<(LogTerms, f64)> {
        if failure.borrow().is_some() {
            return None;
        }
        match density::log_terms(alpha, sign * x, cfg) {
            Ok(t) => Some((t, t.log_f.exp())),
            Err(e) => {
                *failure.borrow_mut() = Some(e);
                None
            }
        }
    };
    let fill = |x: f64, weight: f64| -> [f64; CHUNK] {
        let mut v = [0.0; CHUNK];
        if let Some((t, f)) = eval(x) {
            let w = f * weight;
            if w == 0.0 {
                return v;
            }
            let sx = sign * x;
            for (i, g) in gs.iter().enumerate() {
                v[i] = g.eval(sx, &t) * w;
            }
        }
        v
    };
    let tol = cfg.abs_tol.max(1e-13);
    let rel = cfg.rel_tol;
    let max_panels = cfg.max_subdivisions;

    let (body, tail) = if alpha >= 2.0 {
        // N(0, 2) is negligible beyond 40.
        let body = quad::adaptive(&|x| fill(x, 1.0), 0.0, 40.0, tol, rel, max_panels);
        (body, None)
    } else {
        let xc = cfg.crossover(alpha);
        // Inner split at 1 separates the mode region from the shoulder.
        let inner = quad::adaptive(&|x| fill(x, 1.0), 0.0, 1.0, tol, rel, max_panels);
        let outer = quad::adaptive(&|x| fill(x, 1.0), 1.0, xc, tol, rel, max_panels);
        let mut body = inner;
        body.estimate.value.iter_mut().zip(outer.estimate.value).for_each(|(a, b)| *a += b);
        body.estimate.error.iter_mut().zip(outer.estimate.error).for_each(|(a, b)| *a += b);
        body.converged &= outer.converged;
        // x = xc z^(-1/alpha) maps [xc, inf) to (0, 1] with f dx bounded.
        let tail = quad::adaptive(
            &|z: f64| {
                if z <= 0.0 {
                    return [0.0; CHUNK];
                }
                let x = xc * z.powf(-1.0 / alpha);
                let jac = x / (alpha * z);
                fill(x, jac)
            },
            0.0,
            1.0,
            tol,
            rel,
            max_panels,
        );
        (body, Some(tail))
    };
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let mut est = body.into_result("stable expectation quadrature", tol)?;
    if let Some(t) = tail {
        let t = t.into_result("stable expectation tail quadrature", tol)?;
        for i in 0..CHUNK {
            est.value[i] += t.value[i];
            est.error[i] += t.error[i];
        }
    }
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const C: f64 = 0.577_215_664_901_532_9;

    fn run(alpha: f64, gs: &[Functional]) -> Vec<f64> {
        expect_many(alpha, &QuadratureConfig::default(), gs)
            .unwrap()
            .into_iter()
            .map(|e| e.value)
            .collect()
    }

    #[test]
    fn cauchy_fisher_constants() {
        let v = run(
            1.0,
            &[
                Functional::LocationInformation,
                Functional::ScaleInformation,
                Functional::CrossInformation,
                Functional::AlphaInformation,
            ],
        );
        let k = C - 1.0 + 2f64.ln();
        assert!((v[0] - 0.5).abs() < 1e-8, "{}", v[0]);
        assert!((v[1] - 0.5).abs() < 1e-8, "{}", v[1]);
        assert!((v[2] - k / 2.0).abs() < 1e-8, "{}", v[2]);
        assert!((v[3] - (k * k / 2.0 + PI * PI / 12.0)).abs() < 1e-8, "{}", v[3]);
    }

    #[test]
    fn normalization_and_score_identities() {
        for &a in &[0.8, 1.5, 1.9] {
            let v = run(a, &[Functional::One, Functional::ScaleScore, Functional::AlphaScore]);
            assert!((v[0] - 1.0).abs() < 1e-8, "alpha {a}: {}", v[0]);
            assert!(v[1].abs() < 1e-6, "alpha {a}: {}", v[1]);
            assert!(v[2].abs() < 1e-6, "alpha {a}: {}", v[2]);
        }
    }

    #[test]
    fn constant_coefficient_moments() {
        let c = Coefficient::new(0.0, 0.0, 0.5).unwrap();
        let v = run(1.3, &[Functional::Moment(CoefficientMoment::nu(c, 2)), Functional::LogCoefficient(c)]);
        assert!((v[0] - 1.0).abs() < 1e-9);
        assert!((v[1] - 0.5f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn rejects_unbounded_moments() {
        let c = Coefficient::new(0.1, 0.1, 0.5).unwrap();
        let m = CoefficientMoment {
            coef: c,
            psi_power: 0,
            plus: 2,
            minus: 0,
            a_power: 1,
        };
        assert!(expect_many(1.5, &QuadratureConfig::default(), &[Functional::Moment(m)]).is_err());
        assert!(expect_many(2.0, &QuadratureConfig::default(), &[Functional::AlphaInformation]).is_err());
    }
}
