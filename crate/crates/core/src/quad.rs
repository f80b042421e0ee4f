//! Adaptive Gauss–Kronrod quadrature for vector-valued integrands, plus the
//! half-period summation with Wynn epsilon acceleration used for Fourier-type
//! integrals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Value and error estimate of a vector integral.
#[derive(Debug, Clone, Copy)]
pub struct Estimate<const N: usize> {
    pub value: [f64; N],
    pub error: [f64; N],
}

impl<const N: usize> Estimate<N> {
    fn zero() -> Self {
        Estimate {
            value: [0.0; N],
            error: [0.0; N],
        }
    }

    fn add(&mut self, other: &Estimate<N>) {
        for i in 0..N {
            self.value[i] += other.value[i];
            self.error[i] += other.error[i];
        }
    }

    pub fn max_error(&self) -> f64 {
        self.error.iter().cloned().fold(0.0, f64::max)
    }

    fn within(&self, abs_tol: f64, rel_tol: f64) -> bool {
        (0..N).all(|i| self.error[i] <= abs_tol.max(rel_tol * self.value[i].abs()))
    }
}

/// One 15-point Kronrod panel with the QUADPACK error heuristic.
pub fn gk15<const N: usize, F>(f: &F, a: f64, b: f64) -> Estimate<N>
where
    F: Fn(f64) -> [f64; N],
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = [0.0; N];
    let mut res_g = [0.0; N];
    let mut res_abs = [0.0; N];
    let mut samples = [[0.0; N]; 15];
    samples[7] = fc;
    for i in 0..N {
        res_k[i] = fc[i] * WGK[7];
        res_g[i] = fc[i] * WG[3];
        res_abs[i] = fc[i].abs() * WGK[7];
    }
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        samples[j] = f1;
        samples[14 - j] = f2;
        for i in 0..N {
            res_k[i] += WGK[j] * (f1[i] + f2[i]);
            res_abs[i] += WGK[j] * (f1[i].abs() + f2[i].abs());
            if j % 2 == 1 {
                res_g[i] += WG[j / 2] * (f1[i] + f2[i]);
            }
        }
    }
    let mut out = Estimate::zero();
    for i in 0..N {
        let mean = res_k[i] * 0.5;
        let mut res_asc = WGK[7] * (fc[i] - mean).abs();
        for j in 0..7 {
            res_asc += WGK[j] * ((samples[j][i] - mean).abs() + (samples[14 - j][i] - mean).abs());
        }
        let value = res_k[i] * half;
        let res_abs_i = res_abs[i] * half.abs();
        res_asc *= half.abs();
        let mut err = ((res_k[i] - res_g[i]) * half).abs();
        if res_asc != 0.0 && err != 0.0 {
            err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
        }
        if res_abs_i > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
            err = err.max(50.0 * f64::EPSILON * res_abs_i);
        }
        out.value[i] = value;
        out.error[i] = err;
    }
    out
}

struct Panel<const N: usize> {
    a: f64,
    b: f64,
    est: Estimate<N>,
    depth: u32,
}

impl<const N: usize> PartialEq for Panel<N> {
    fn eq(&self, other: &Self) -> bool {
        self.est.max_error() == other.est.max_error()
    }
}
impl<const N: usize> Eq for Panel<N> {}
impl<const N: usize> PartialOrd for Panel<N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const N: usize> Ord for Panel<N> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.est
            .max_error()
            .partial_cmp(&other.est.max_error())
            .unwrap_or(Ordering::Equal)
    }
}

/// Globally adaptive bisection on `[a, b]`.
///
/// Returns the best estimate even when the tolerance is missed; callers decide
/// whether that is fatal via [`Outcome::converged`].
pub fn adaptive<const N: usize, F>(
    f: &F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> Outcome<N>
where
    F: Fn(f64) -> [f64; N],
{
    let first = gk15(f, a, b);
    if first.within(abs_tol, rel_tol) || a == b {
        return Outcome {
            estimate: first,
            converged: true,
        };
    }
    let mut heap = BinaryHeap::new();
    heap.push(Panel {
        a,
        b,
        est: first,
        depth: 0,
    });
    let mut total = first;
    let mut panels = 1;
    while panels < max_panels {
        let worst = match heap.pop() {
            Some(p) => p,
            None => break,
        };
        if worst.depth > 60 {
            heap.push(worst);
            break;
        }
        let mid = 0.5 * (worst.a + worst.b);
        let left = gk15(f, worst.a, mid);
        let right = gk15(f, mid, worst.b);
        for i in 0..N {
            total.value[i] += left.value[i] + right.value[i] - worst.est.value[i];
            total.error[i] += left.error[i] + right.error[i] - worst.est.error[i];
        }
        panels += 1;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            est: left,
            depth: worst.depth + 1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            est: right,
            depth: worst.depth + 1,
        });
        if total.within(abs_tol, rel_tol) {
            break;
        }
    }
    // Re-sum to shed accumulated cancellation in the running totals.
    let mut resummed = Estimate::zero();
    for p in heap.iter() {
        resummed.add(&p.est);
    }
    let converged = resummed.within(abs_tol, rel_tol);
    Outcome {
        estimate: resummed,
        converged,
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Outcome<const N: usize> {
    pub estimate: Estimate<N>,
    pub converged: bool,
}

impl<const N: usize> Outcome<N> {
    pub fn into_result(self, context: &str, abs_tol: f64) -> Result<Estimate<N>> {
        if self.converged {
            Ok(self.estimate)
        } else {
            Err(Error::NumericFailure {
                context: context.to_string(),
                requested: abs_tol,
                achieved: self.estimate.max_error(),
            })
        }
    }
}

const WYNN_COLUMNS: usize = 40;

/// Wynn's epsilon algorithm applied incrementally to a sequence of partial sums.
#[derive(Debug, Clone, Default)]
pub struct Wynn {
    // Most recent anti-diagonal of the epsilon table.
    row: Vec<f64>,
    best: Option<f64>,
    previous_best: Option<f64>,
}

impl Wynn {
    pub fn new() -> Self {
        Self::default()
    }

    /// Append the next partial sum; returns the current accelerated estimate.
    pub fn push(&mut self, s: f64) -> f64 {
        let mut next = Vec::with_capacity(self.row.len() + 1);
        next.push(s);
        let mut aux = 0.0; // epsilon_{-1} column is zero
        for (k, &old) in self.row.iter().enumerate().take(WYNN_COLUMNS) {
            let diff = next[k] - old;
            let val = if diff == 0.0 || !diff.is_finite() {
                // Converged column: propagate the value itself.
                next[k]
            } else {
                aux + 1.0 / diff
            };
            aux = old;
            next.push(val);
        }
        self.row = next;
        // Even columns carry the extrapolants.
        let m = self.row.len() - 1;
        let even = m - (m % 2);
        let estimate = self.row[even];
        let estimate = if estimate.is_finite() { estimate } else { s };
        self.previous_best = self.best;
        self.best = Some(estimate);
        estimate
    }

    /// Difference between the two most recent extrapolants.
    pub fn change(&self) -> f64 {
        match (self.best, self.previous_best) {
            (Some(a), Some(b)) => (a - b).abs(),
            _ => f64::INFINITY,
        }
    }
}

/// Integral over `[0, cutoff]` of an integrand whose oscillation has half
/// period `half_period`, summed one half period at a time.
///
/// When the cutoff spans many half periods the partial sums are accelerated
/// with Wynn's epsilon algorithm (per component) and the summation stops once
/// the extrapolants settle.
pub fn half_period_sum<const N: usize, F>(
    f: &F,
    half_period: f64,
    cutoff: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> Outcome<N>
where
    F: Fn(f64) -> [f64; N],
{
    let panel_tol = abs_tol * 0.1;
    let mut total = Estimate::<N>::zero();
    let mut converged = true;

    // First half period, split geometrically when it is long so the envelope
    // near zero is resolved.
    let first_end = half_period.min(cutoff);
    let mut start = 0.0;
    let mut edge = first_end.min(1.0);
    loop {
        let out = adaptive(f, start, edge, panel_tol, rel_tol * 0.1, max_panels);
        converged &= out.converged;
        total.add(&out.estimate);
        if edge >= first_end {
            break;
        }
        start = edge;
        edge = (edge * 2.0).min(first_end);
    }
    if first_end >= cutoff {
        return Outcome {
            estimate: total,
            converged,
        };
    }

    let n_half = (cutoff / half_period).ceil() as usize;
    const DIRECT_LIMIT: usize = 24;
    if n_half <= DIRECT_LIMIT {
        for k in 1..n_half {
            let a = k as f64 * half_period;
            let b = ((k + 1) as f64 * half_period).min(cutoff);
            let out = adaptive(f, a, b, panel_tol, rel_tol * 0.1, max_panels);
            converged &= out.converged;
            total.add(&out.estimate);
        }
        return Outcome {
            estimate: total,
            converged,
        };
    }

    let mut wynn: Vec<Wynn> = (0..N).map(|_| Wynn::new()).collect();
    let mut extrapolated = total.value;
    let mut settled = 0;
    let mut panel_error = total.error;
    for (i, w) in wynn.iter_mut().enumerate() {
        w.push(total.value[i]);
    }
    for k in 1..n_half.min(max_panels) {
        let a = k as f64 * half_period;
        let b = ((k + 1) as f64 * half_period).min(cutoff);
        let out = adaptive(f, a, b, panel_tol, rel_tol * 0.1, max_panels);
        converged &= out.converged;
        total.add(&out.estimate);
        for i in 0..N {
            panel_error[i] = total.error[i];
            extrapolated[i] = wynn[i].push(total.value[i]);
        }
        if k >= 8 {
            let ok = (0..N).all(|i| {
                wynn[i].change() <= 0.1 * abs_tol.max(rel_tol * extrapolated[i].abs())
            });
            if ok {
                settled += 1;
            } else {
                settled = 0;
            }
            if settled >= 3 {
                let mut est = Estimate::zero();
                for i in 0..N {
                    est.value[i] = extrapolated[i];
                    est.error[i] = panel_error[i] + wynn[i].change();
                }
                return Outcome {
                    estimate: est,
                    converged,
                };
            }
        }
    }
    // Reached the cutoff: the direct sum is complete up to a negligible tail.
    Outcome {
        estimate: total,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gk15_is_exact_for_low_degree_polynomials() {
        let est = gk15(&|x: f64| [x.powi(7), 1.0], 0.0, 2.0);
        assert!((est.value[0] - 32.0).abs() < 1e-12);
        assert!((est.value[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        // integral of ln(x) on (0,1] is -1
        let out = adaptive(&|x: f64| [x.ln()], 0.0, 1.0, 1e-12, 1e-12, 2000);
        assert!(out.converged);
        assert!((out.estimate.value[0] + 1.0).abs() < 1e-11);
    }

    #[test]
    fn wynn_accelerates_alternating_harmonic_series() {
        let mut w = Wynn::new();
        let mut s = 0.0;
        let mut est = 0.0;
        for k in 1..=20 {
            s += if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
            est = w.push(s);
        }
        assert!((est - std::f64::consts::LN_2).abs() < 1e-10, "{est}");
    }

    #[test]
    fn half_period_sum_matches_closed_form_fourier_integral() {
        // integral_0^inf exp(-s) cos(s x) ds = 1 / (1 + x^2)
        let x = 7.3;
        let f = |s: f64| [(-s).exp() * (s * x).cos()];
        let out = half_period_sum(&f, std::f64::consts::PI / x, 45.0, 1e-13, 1e-12, 4000);
        assert!(out.converged);
        assert!((out.estimate.value[0] - 1.0 / (1.0 + x * x)).abs() < 1e-12);
    }
}
