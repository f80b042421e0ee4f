//! Cached log-density for likelihood work.
//!
//! `log f`, `d log f/du`, `d log f/d alpha` and the mixed derivative are
//! tabulated on a grid in `(u, alpha)` with `x = c sinh(u)`, and evaluated by
//! bicubic Hermite interpolation. The interpolant is C1, so the x- and
//! alpha-derivatives handed back are the exact derivatives of the returned
//! log-density. Columns (fixed alpha) are built on first use.

use std::sync::OnceLock;

use super::density::{self, LogTerms};
use super::QuadratureConfig;
use crate::error::Result;

const SINH_SCALE: f64 = 0.5;
const DU: f64 = 0.005;
const X_MAX: f64 = 30.0;
const ALPHA_MIN: f64 = 0.05;
const ALPHA_STEP: f64 = 0.0025;
const ALPHA_NODES: usize = 761;

/// Log-density and its two first partials at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDensityEval {
    pub value: f64,
    pub d_x: f64,
    pub d_alpha: f64,
}

impl From<LogTerms> for LogDensityEval {
    fn from(t: LogTerms) -> Self {
        LogDensityEval {
            value: t.log_f,
            d_x: t.dx,
            d_alpha: t.dalpha,
        }
    }
}

/// `[log f, d/du, d/d alpha, d2/du d alpha]` per u node.
type Column = Vec<[f64; 4]>;

pub struct LogDensityKernel {
    config: QuadratureConfig,
    u_nodes: usize,
    columns: Vec<OnceLock<Result<Column>>>,
}

impl LogDensityKernel {
    /// Process-wide kernel with default quadrature settings.
    pub fn global() -> &'static LogDensityKernel {
        static KERNEL: OnceLock<LogDensityKernel> = OnceLock::new();
        KERNEL.get_or_init(|| LogDensityKernel::new(QuadratureConfig::default()))
    }

    pub fn new(config: QuadratureConfig) -> Self {
        let u_max = (X_MAX / SINH_SCALE).asinh();
        let u_nodes = (u_max / DU).ceil() as usize + 1;
        LogDensityKernel {
            config,
            u_nodes,
            columns: (0..ALPHA_NODES).map(|_| OnceLock::new()).collect(),
        }
    }

    /// Alpha range covered by the table; outside it evaluation is direct.
    pub fn alpha_range() -> (f64, f64) {
        (ALPHA_MIN, ALPHA_MIN + ALPHA_STEP * (ALPHA_NODES - 1) as f64)
    }

    fn column(&self, j: usize) -> Result<&Column> {
        let cell = self.columns[j].get_or_init(|| self.build_column(j));
        match cell {
            Ok(c) => Ok(c),
            Err(e) => Err(clone_error(e)),
        }
    }

    fn build_column(&self, j: usize) -> Result<Column> {
        let alpha = node_alpha(j);
        (0..self.u_nodes)
            .map(|i| {
                let u = i as f64 * DU;
                let x = SINH_SCALE * u.sinh();
                let jac = SINH_SCALE * u.cosh();
                let t = density::log_terms(alpha, x, &self.config)?;
                Ok([t.log_f, t.dx * jac, t.dalpha, t.dx_dalpha * jac])
            })
            .collect()
    }

    /// Log-density at `x` for exponent `alpha`.
    pub fn eval(&self, alpha: f64, x: f64) -> Result<LogDensityEval> {
        let ax = x.abs();
        let (lo, hi) = Self::alpha_range();
        if !x.is_finite() || !(alpha >= lo && alpha <= hi) || ax > X_MAX {
            return self.direct(alpha, x);
        }
        let u = (ax / SINH_SCALE).asinh();
        let i = ((u / DU) as usize).min(self.u_nodes - 2);
        let j = (((alpha - ALPHA_MIN) / ALPHA_STEP) as usize).min(ALPHA_NODES - 2);
        let t = (u - i as f64 * DU) / DU;
        let s = (alpha - node_alpha(j)) / ALPHA_STEP;
        let c0 = self.column(j)?;
        let c1 = self.column(j + 1)?;
        let corners = [[c0[i], c0[i + 1]], [c1[i], c1[i + 1]]];
        let (value, d_u, d_alpha) = bicubic(&corners, t, s);
        let d_x = d_u / (SINH_SCALE * SINH_SCALE + ax * ax).sqrt();
        Ok(LogDensityEval {
            value,
            d_x: if x < 0.0 { -d_x } else { d_x },
            d_alpha,
        })
    }

    fn direct(&self, alpha: f64, x: f64) -> Result<LogDensityEval> {
        Ok(density::log_terms(alpha, x, &self.config)?.into())
    }
}

fn node_alpha(j: usize) -> f64 {
    ALPHA_MIN + ALPHA_STEP * j as f64
}

/// Cubic Hermite basis (value weights, slope weights) and their derivatives.
#[inline]
fn hermite(t: f64) -> ([f64; 2], [f64; 2], [f64; 2], [f64; 2]) {
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h10 = t3 - 2.0 * t2 + t;
    let h11 = t3 - t2;
    let d00 = 6.0 * t2 - 6.0 * t;
    let d01 = -d00;
    let d10 = 3.0 * t2 - 4.0 * t + 1.0;
    let d11 = 3.0 * t2 - 2.0 * t;
    ([h00, h01], [h10, h11], [d00, d01], [d10, d11])
}

/// `corners[b][a]` holds the node at (u_a, alpha_b).
#[inline]
fn bicubic(corners: &[[[f64; 4]; 2]; 2], t: f64, s: f64) -> (f64, f64, f64) {
    let (pu, mu, dpu, dmu) = hermite(t);
    let (pa, ma, dpa, dma) = hermite(s);
    let (mut v, mut vu, mut va) = (0.0, 0.0, 0.0);
    for b in 0..2 {
        for a in 0..2 {
            let [f, fu, fa, fua] = corners[b][a];
            let fu = fu * DU;
            let fa = fa * ALPHA_STEP;
            let fua = fua * DU * ALPHA_STEP;
            v += pu[a] * pa[b] * f + mu[a] * pa[b] * fu + pu[a] * ma[b] * fa + mu[a] * ma[b] * fua;
            vu += dpu[a] * pa[b] * f + dmu[a] * pa[b] * fu + dpu[a] * ma[b] * fa + dmu[a] * ma[b] * fua;
            va += pu[a] * dpa[b] * f + mu[a] * dpa[b] * fu + pu[a] * dma[b] * fa + mu[a] * dma[b] * fua;
        }
    }
    (v, vu / DU, va / ALPHA_STEP)
}

fn clone_error(e: &crate::error::Error) -> crate::error::Error {
    use crate::error::Error;
    match e {
        Error::NumericFailure {
            context,
            requested,
            achieved,
        } => Error::NumericFailure {
            context: context.clone(),
            requested: *requested,
            achieved: *achieved,
        },
        other => Error::Domain(format!("log-density table column failed: {other}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_direct_evaluation_between_nodes() {
        let k = LogDensityKernel::global();
        let cfg = QuadratureConfig::default();
        for &alpha in &[1.234, 1.5, 1.777] {
            for &x in &[0.0, 0.013, 0.7, -2.3, 9.1, 29.9, 45.0] {
                let e = k.eval(alpha, x).unwrap();
                let d = density::log_terms(alpha, x, &cfg).unwrap();
                assert!((e.value - d.log_f).abs() < 1e-8, "alpha {alpha} x {x}: {} vs {}", e.value, d.log_f);
                assert!((e.d_x - d.dx).abs() < 1e-6 * (1.0 + d.dx.abs()), "dx at {alpha},{x}");
                assert!((e.d_alpha - d.dalpha).abs() < 1e-5 * (1.0 + d.dalpha.abs()), "da at {alpha},{x}");
            }
        }
    }

    #[test]
    fn derivatives_are_those_of_the_interpolant() {
        let k = LogDensityKernel::global();
        let (alpha, x) = (1.4567, 1.2345);
        let h = 1e-6;
        let e = k.eval(alpha, x).unwrap();
        let fx = (k.eval(alpha, x + h).unwrap().value - k.eval(alpha, x - h).unwrap().value) / (2.0 * h);
        let fa = (k.eval(alpha + h, x).unwrap().value - k.eval(alpha - h, x).unwrap().value) / (2.0 * h);
        assert!((fx - e.d_x).abs() < 1e-7);
        assert!((fa - e.d_alpha).abs() < 1e-7);
    }
}
