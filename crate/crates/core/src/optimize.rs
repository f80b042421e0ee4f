//! Box-constrained minimization: projected BFGS with Armijo backtracking and
//! a projected Nelder–Mead simplex used as fallback.

use crate::error::Result;

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub grad: Vec<f64>,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    /// `max_i |P(x - g) - x|_i`.
    pub projected_gradient: f64,
    pub message: String,
}

#[derive(Debug, Clone, Copy)]
pub struct Settings {
    pub gtol: f64,
    pub ftol: f64,
    pub max_iter: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            gtol: 1e-6,
            ftol: 1e-13,
            max_iter: 500,
        }
    }
}

fn project(x: &mut [f64], lo: &[f64], hi: &[f64]) {
    for i in 0..x.len() {
        x[i] = x[i].clamp(lo[i], hi[i]);
    }
}

pub fn projected_gradient(x: &[f64], g: &[f64], lo: &[f64], hi: &[f64]) -> f64 {
    (0..x.len())
        .map(|i| ((x[i] - g[i]).clamp(lo[i], hi[i]) - x[i]).abs())
        .fold(0.0, f64::max)
}

/// Objective value and gradient; `Err` and non-finite values count as
/// infeasible points.
pub trait Objective {
    fn eval(&mut self, x: &[f64]) -> Result<(f64, Vec<f64>)>;
}

impl<F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>> Objective for F {
    fn eval(&mut self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        self(x)
    }
}

fn try_eval<O: Objective>(obj: &mut O, x: &[f64], count: &mut usize) -> Option<(f64, Vec<f64>)> {
    *count += 1;
    match obj.eval(x) {
        Ok((f, g)) if f.is_finite() && g.iter().all(|v| v.is_finite()) => Some((f, g)),
        _ => None,
    }
}

/// Projected BFGS. Returns `None` if the start point cannot be evaluated.
pub fn bfgs<O: Objective>(obj: &mut O, x0: &[f64], lo: &[f64], hi: &[f64], s: Settings) -> Option<Minimum> {
    let n = x0.len();
    let mut evals = 0;
    let mut x = x0.to_vec();
    project(&mut x, lo, hi);
    let (mut f, mut g) = try_eval(obj, &x, &mut evals)?;
    let mut h = identity(n);
    let mut small_steps = 0;
    let mut message = String::from("iteration limit");
    let mut converged = false;
    let mut iter = 0;
    while iter < s.max_iter {
        let pg = projected_gradient(&x, &g, lo, hi);
        if pg < s.gtol {
            converged = true;
            message = "projected gradient below tolerance".into();
            break;
        }
        iter += 1;
        let free: Vec<bool> = (0..n)
            .map(|i| !((x[i] <= lo[i] && g[i] > 0.0) || (x[i] >= hi[i] && g[i] < 0.0)))
            .collect();
        let mut d = direction(&h, &g, &free);
        let mut slope: f64 = (0..n).map(|i| d[i] * g[i]).sum();
        if !(slope < 0.0) {
            h = identity(n);
            d = direction(&h, &g, &free);
            slope = (0..n).map(|i| d[i] * g[i]).sum();
            if !(slope < 0.0) {
                message = "no descent direction".into();
                break;
            }
        }
        // Cap the first trial step at one unit in internal coordinates.
        let dmax = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut lambda = if dmax > 1.0 { 1.0 / dmax } else { 1.0 };
        let mut accepted = None;
        for _ in 0..50 {
            let mut xt: Vec<f64> = (0..n).map(|i| x[i] + lambda * d[i]).collect();
            project(&mut xt, lo, hi);
            let decrease: f64 = (0..n).map(|i| g[i] * (xt[i] - x[i])).sum();
            if let Some((ft, gt)) = try_eval(obj, &xt, &mut evals) {
                if ft <= f + 1e-4 * decrease.min(0.0) {
                    accepted = Some((xt, ft, gt));
                    break;
                }
            }
            lambda *= 0.5;
        }
        let Some((xn, fn_, gn)) = accepted else {
            if pg < 100.0 * s.gtol {
                converged = true;
                message = "line search stalled at a near-stationary point".into();
            } else {
                message = "line search failed".into();
            }
            break;
        };
        let sv: Vec<f64> = (0..n).map(|i| xn[i] - x[i]).collect();
        let yv: Vec<f64> = (0..n).map(|i| gn[i] - g[i]).collect();
        let sy: f64 = sv.iter().zip(&yv).map(|(a, b)| a * b).sum();
        let ss: f64 = sv.iter().map(|a| a * a).sum::<f64>().sqrt();
        let yy: f64 = yv.iter().map(|a| a * a).sum::<f64>().sqrt();
        if sy > 1e-12 * ss * yy && sy > 0.0 {
            if iter == 1 {
                let scale = sy / (yy * yy);
                h = identity(n).into_iter().map(|r| r.into_iter().map(|v| v * scale).collect()).collect();
            }
            bfgs_update(&mut h, &sv, &yv, sy);
        }
        let df = f - fn_;
        x = xn;
        f = fn_;
        g = gn;
        if df.abs() <= s.ftol * (1.0 + f.abs()) {
            small_steps += 1;
            if small_steps >= 3 {
                let pg = projected_gradient(&x, &g, lo, hi);
                converged = pg < 100.0 * s.gtol;
                message = "objective stopped changing".into();
                break;
            }
        } else {
            small_steps = 0;
        }
    }
    let pg = projected_gradient(&x, &g, lo, hi);
    Some(Minimum {
        x,
        f,
        grad: g,
        iterations: iter,
        evaluations: evals,
        converged: converged || pg < s.gtol,
        projected_gradient: pg,
        message,
    })
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

fn direction(h: &[Vec<f64>], g: &[f64], free: &[bool]) -> Vec<f64> {
    let n = g.len();
    (0..n)
        .map(|i| {
            if !free[i] {
                return 0.0;
            }
            -(0..n).filter(|&j| free[j]).map(|j| h[i][j] * g[j]).sum::<f64>()
        })
        .collect()
}

/// Inverse-Hessian BFGS update.
fn bfgs_update(h: &mut [Vec<f64>], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let hy: Vec<f64> = (0..n).map(|i| (0..n).map(|j| h[i][j] * y[j]).sum()).collect();
    let yhy: f64 = (0..n).map(|i| y[i] * hy[i]).sum();
    let rho = 1.0 / sy;
    for i in 0..n {
        for j in 0..n {
            h[i][j] += rho * ((1.0 + rho * yhy) * s[i] * s[j] - hy[i] * s[j] - s[i] * hy[j]);
        }
    }
}

/// Projected Nelder–Mead on the objective value only.
pub fn nelder_mead<O: Objective>(obj: &mut O, x0: &[f64], lo: &[f64], hi: &[f64], max_evals: usize) -> Option<Minimum> {
    let n = x0.len();
    let mut evals = 0;
    let mut value = |x: &[f64], evals: &mut usize| -> f64 {
        try_eval(obj, x, evals).map(|(f, _)| f).unwrap_or(f64::INFINITY)
    };
    let mut start = x0.to_vec();
    project(&mut start, lo, hi);
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let f0 = value(&start, &mut evals);
    if !f0.is_finite() {
        return None;
    }
    simplex.push((start.clone(), f0));
    for i in 0..n {
        let mut p = start.clone();
        let step = 0.1 * (hi[i] - lo[i]).min(1.0).max(1e-3);
        p[i] = if p[i] + step <= hi[i] { p[i] + step } else { p[i] - step };
        let fp = value(&p, &mut evals);
        simplex.push((p, fp));
    }
    let mut iterations = 0;
    while evals < max_evals {
        iterations += 1;
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[n].1 - simplex[0].1;
        let size = simplex[1..]
            .iter()
            .flat_map(|(p, _)| p.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if spread.abs() <= 1e-12 * (1.0 + simplex[0].1.abs()) && size < 1e-8 {
            break;
        }
        let centroid: Vec<f64> = (0..n).map(|j| simplex[..n].iter().map(|(p, _)| p[j]).sum::<f64>() / n as f64).collect();
        let along = |t: f64| -> Vec<f64> {
            let mut p: Vec<f64> = (0..n).map(|j| centroid[j] + t * (simplex[n].0[j] - centroid[j])).collect();
            project(&mut p, lo, hi);
            p
        };
        let xr = along(-1.0);
        let fr = value(&xr, &mut evals);
        if fr < simplex[0].1 {
            let xe = along(-2.0);
            let fe = value(&xe, &mut evals);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < simplex[n].1 {
                let xc = along(-0.5);
                let fc = value(&xc, &mut evals);
                (xc, fc)
            } else {
                let xc = along(0.5);
                let fc = value(&xc, &mut evals);
                (xc, fc)
            };
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for k in 1..=n {
                    let p: Vec<f64> = (0..n).map(|j| best[j] + 0.5 * (simplex[k].0[j] - best[j])).collect();
                    let fp = value(&p, &mut evals);
                    simplex[k] = (p, fp);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, _) = simplex.swap_remove(0);
    let (f, grad) = try_eval(obj, &x, &mut evals)?;
    let pg = projected_gradient(&x, &grad, lo, hi);
    Some(Minimum {
        x,
        f,
        grad,
        iterations,
        evaluations: evals,
        converged: false,
        projected_gradient: pg,
        message: "simplex".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosen(x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let (a, b) = (x[0], x[1]);
        let f = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
        let g = vec![-2.0 * (1.0 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)];
        Ok((f, g))
    }

    #[test]
    fn bfgs_solves_rosenbrock() {
        let m = bfgs(&mut rosen, &[-1.2, 1.0], &[-5.0, -5.0], &[5.0, 5.0], Settings::default()).unwrap();
        assert!(m.converged, "{}", m.message);
        assert!((m.x[0] - 1.0).abs() < 1e-5 && (m.x[1] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn bfgs_respects_active_bounds() {
        let m = bfgs(&mut rosen, &[0.1, 0.1], &[-5.0, -5.0], &[0.5, 5.0], Settings::default()).unwrap();
        assert!(m.converged);
        assert_eq!(m.x[0], 0.5);
        assert!((m.x[1] - 0.25).abs() < 1e-6);
    }

    #[test]
    fn bfgs_never_increases_the_objective() {
        let mut trace = Vec::new();
        let mut obj = |x: &[f64]| {
            let r = rosen(x);
            if let Ok((f, _)) = &r {
                trace.push(*f);
            }
            r
        };
        let m = bfgs(&mut obj, &[-1.2, 1.0], &[-5.0, -5.0], &[5.0, 5.0], Settings::default()).unwrap();
        assert!(m.f <= trace[0]);
    }

    #[test]
    fn simplex_finds_quadratic_minimum() {
        let mut q = |x: &[f64]| -> Result<(f64, Vec<f64>)> {
            Ok(((x[0] - 0.3).powi(2) + 2.0 * (x[1] + 0.2).powi(2), vec![2.0 * (x[0] - 0.3), 4.0 * (x[1] + 0.2)]))
        };
        let m = nelder_mead(&mut q, &[1.0, 1.0], &[-2.0, -2.0], &[2.0, 2.0], 2000).unwrap();
        assert!((m.x[0] - 0.3).abs() < 1e-5 && (m.x[1] + 0.2).abs() < 1e-5);
    }
}
