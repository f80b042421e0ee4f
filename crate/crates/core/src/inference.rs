//! Fisher information estimators and asymptotic standard deviations.
//!
//! Every information matrix factors into a volatility part (sample averages
//! of filter derivatives, or moments of `a(eta)` in the explosive case) and
//! innovation factors
//! `c1 = E(1 + eta lx)^2`, `c2 = E(lx la eta)`, `c3 = E la^2`
//! with `lx`, `la` the x- and alpha-derivatives of `log f`. The `Int` kind
//! evaluates the innovation factors by quadrature at the fitted alpha, the
//! `Res` kind averages over residuals.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lyapunov::EstimatorKind;
use crate::mle::{FitResult, MIN_OBSERVATIONS};
use crate::model::{filter_log, ParamVector, ReturnSeries, PARAM_NAMES};
use crate::stable::{Coefficient, CoefficientMoment, Functional, LogDensityKernel, StableDist};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InfoKind {
    SigmaInt,
    SigmaRes,
    UpsilonInt,
    UpsilonRes,
    Universal,
}

/// A symmetric information matrix with parameter labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfoMatrix {
    pub kind: InfoKind,
    pub names: Vec<String>,
    pub entries: Vec<Vec<f64>>,
}

impl InfoMatrix {
    fn from_dmatrix(kind: InfoKind, names: &[&str], m: &DMatrix<f64>) -> Self {
        let sym = (m + m.transpose()) * 0.5;
        InfoMatrix {
            kind,
            names: names.iter().map(|s| s.to_string()).collect(),
            entries: (0..sym.nrows()).map(|i| (0..sym.ncols()).map(|j| sym[(i, j)]).collect()).collect(),
        }
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let k = self.entries.len();
        DMatrix::from_fn(k, k, |i, j| self.entries[i][j])
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i][j]
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        SymmetricEigen::new(self.matrix()).eigenvalues.iter().cloned().collect()
    }

    /// Smallest eigenvalue is at least `-1e-8 * trace`.
    pub fn is_psd(&self) -> bool {
        let tr: f64 = (0..self.dim()).map(|i| self.entries[i][i]).sum();
        self.eigenvalues().iter().all(|&l| l >= -1e-8 * tr.abs())
    }
}

/// Innovation factors `c1`, `c2`, `c3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaFactors {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl EtaFactors {
    pub fn from_residuals(alpha: f64, residuals: &[f64]) -> Result<Self> {
        let k = LogDensityKernel::global();
        let n = residuals.len() as f64;
        let (mut c1, mut c2, mut c3) = (0.0, 0.0, 0.0);
        for &e in residuals {
            let v = k.eval(alpha, e)?;
            let s = 1.0 + e * v.d_x;
            c1 += s * s;
            c2 += v.d_x * v.d_alpha * e;
            c3 += v.d_alpha * v.d_alpha;
        }
        Ok(EtaFactors {
            c1: c1 / n,
            c2: c2 / n,
            c3: c3 / n,
        })
    }

    pub fn by_quadrature(alpha: f64) -> Result<Self> {
        let e = StableDist::new(alpha)?.expect_many(&[
            Functional::ScaleInformation,
            Functional::CrossInformation,
            Functional::AlphaInformation,
        ])?;
        Ok(EtaFactors {
            c1: e[0].value,
            c2: e[1].value,
            c3: e[2].value,
        })
    }

    pub fn estimate(kind: EstimatorKind, alpha: f64, residuals: &[f64]) -> Result<Self> {
        match kind {
            EstimatorKind::Int => Self::by_quadrature(alpha),
            EstimatorKind::Res => Self::from_residuals(alpha, residuals),
        }
    }
}

/// Estimator kind suggested for a fitted exponent: quadrature for
/// `alpha <= 1`, residual averages above.
pub fn recommended_kind(alpha_hat: f64) -> EstimatorKind {
    if alpha_hat <= 1.0 {
        EstimatorKind::Int
    } else {
        EstimatorKind::Res
    }
}

fn check_n(y: &ReturnSeries) -> Result<()> {
    if y.n() < MIN_OBSERVATIONS {
        return Err(Error::data(format!(
            "information estimates need at least {MIN_OBSERVATIONS} observations, got {}",
            y.n()
        )));
    }
    Ok(())
}

/// Volatility moments `mean(D D')` and `mean(D)` with `D = (d sigma2/d theta_tilde)/sigma2`.
fn volatility_moments(theta: &ParamVector, y: &ReturnSeries) -> (DMatrix<f64>, DVector<f64>, Vec<f64>) {
    let lf = filter_log(theta, y, 0.0);
    let n = lf.dlog_sigma2.len() as f64;
    let mut s = DMatrix::zeros(4, 4);
    let mut m = DVector::zeros(4);
    for d in &lf.dlog_sigma2 {
        for i in 0..4 {
            m[i] += d[i];
            for j in 0..4 {
                s[(i, j)] += d[i] * d[j];
            }
        }
    }
    (s / n, m / n, lf.residuals)
}

fn assemble(vol_outer: &DMatrix<f64>, vol_mean: &DVector<f64>, eta: &EtaFactors) -> DMatrix<f64> {
    let k = vol_mean.len();
    let mut out = DMatrix::zeros(k + 1, k + 1);
    for i in 0..k {
        for j in 0..k {
            out[(i, j)] = 0.25 * vol_outer[(i, j)] * eta.c1;
        }
        out[(i, k)] = -0.5 * vol_mean[i] * eta.c2;
        out[(k, i)] = out[(i, k)];
    }
    out[(k, k)] = eta.c3;
    out
}

fn sigma_raw(kind: EstimatorKind, theta: &ParamVector, y: &ReturnSeries) -> Result<DMatrix<f64>> {
    check_n(y)?;
    let (s, m, resid) = volatility_moments(theta, y);
    let eta = EtaFactors::estimate(kind, theta.alpha(), &resid)?;
    let out = assemble(&s, &m, &eta);
    if !(out[(4, 4)] > 0.0) {
        return Err(Error::Singular("alpha-alpha block is not positive".into()));
    }
    Ok(out)
}

fn sigma_kind(kind: EstimatorKind) -> InfoKind {
    match kind {
        EstimatorKind::Int => InfoKind::SigmaInt,
        EstimatorKind::Res => InfoKind::SigmaRes,
    }
}

fn check_rank(m: &DMatrix<f64>, start: usize, what: &str) -> Result<()> {
    let block = m.view((start, start), (4 - start, 4 - start)).clone_owned();
    let scale = block.diagonal().amax();
    let ev = SymmetricEigen::new(block).eigenvalues;
    if !(ev.min() > 1e-15 * scale) {
        return Err(Error::Singular(format!("volatility block ({what}) is rank deficient")));
    }
    Ok(())
}

/// `Sigma_hat` over `(omega, phi_plus, phi_minus, psi, alpha)` at `theta`.
pub fn sigma_at(kind: EstimatorKind, theta: &ParamVector, y: &ReturnSeries) -> Result<InfoMatrix> {
    let out = sigma_raw(kind, theta, y)?;
    check_rank(&out, 0, "omega, phi_plus, phi_minus, psi")?;
    Ok(InfoMatrix::from_dmatrix(sigma_kind(kind), &PARAM_NAMES, &out))
}

pub fn sigma_hat(kind: EstimatorKind, fit: &FitResult, y: &ReturnSeries) -> Result<InfoMatrix> {
    sigma_at(kind, &fit.theta_hat, y)
}

/// Moments of `a(eta)` used by the explosive-regime information.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NuMoments {
    /// `E (psi/a)`, `E (psi/a)^2`.
    pub nu1: f64,
    pub nu2: f64,
    /// `E h` with `h = ((x+)^2/a, (x-)^2/a, 1/a)`.
    pub h: [f64; 3],
    /// `E h h'`.
    pub hh: [[f64; 3]; 3],
    /// `E (psi/a) h`.
    pub bh: [f64; 3],
}

impl NuMoments {
    fn moment_list(c: Coefficient) -> [CoefficientMoment; 10] {
        let m = |psi_power, plus, minus, a_power| CoefficientMoment {
            coef: c,
            psi_power,
            plus,
            minus,
            a_power,
        };
        [
            m(1, 0, 0, 1),
            m(2, 0, 0, 2),
            m(0, 1, 0, 1),
            m(0, 0, 1, 1),
            m(0, 0, 0, 1),
            m(0, 2, 0, 2),
            m(0, 0, 2, 2),
            m(0, 1, 0, 2),
            m(0, 0, 1, 2),
            m(0, 0, 0, 2),
        ]
    }

    fn from_values(psi: f64, v: &[f64]) -> Self {
        // E(b h+) = psi E((x+)^2/a^2), E(b h-) likewise, E(b h_psi) = nu2 / psi.
        let bh = [psi * v[7], psi * v[8], v[1] / psi];
        NuMoments {
            nu1: v[0],
            nu2: v[1],
            h: [v[2], v[3], v[4]],
            hh: [[v[5], 0.0, v[7]], [0.0, v[6], v[8]], [v[7], v[8], v[9]]],
            bh,
        }
    }

    pub fn by_quadrature(coef: Coefficient, alpha: f64) -> Result<Self> {
        if !(coef.psi > 0.0) {
            return Err(Error::domain("nu moments need psi > 0"));
        }
        let gs: Vec<Functional> = Self::moment_list(coef).into_iter().map(Functional::Moment).collect();
        let e = StableDist::new(alpha)?.expect_many(&gs)?;
        let v: Vec<f64> = e.iter().map(|x| x.value).collect();
        Ok(Self::from_values(coef.psi, &v))
    }

    pub fn from_residuals(coef: Coefficient, residuals: &[f64]) -> Result<Self> {
        if !(coef.psi > 0.0) {
            return Err(Error::domain("nu moments need psi > 0"));
        }
        let mut v = [0.0; 10];
        for &e in residuals {
            let a = coef.eval(e);
            let (xp2, xm2) = if e >= 0.0 { (e * e, 0.0) } else { (0.0, e * e) };
            let b = coef.psi / a;
            let vals = [b, b * b, xp2 / a, xm2 / a, 1.0 / a, (xp2 / a).powi(2), (xm2 / a).powi(2), xp2 / (a * a), xm2 / (a * a), 1.0 / (a * a)];
            for (acc, x) in v.iter_mut().zip(vals) {
                *acc += x;
            }
        }
        let n = residuals.len() as f64;
        for x in v.iter_mut() {
            *x /= n;
        }
        Ok(Self::from_values(coef.psi, &v))
    }

    pub fn estimate(kind: EstimatorKind, coef: Coefficient, alpha: f64, residuals: &[f64]) -> Result<Self> {
        match kind {
            EstimatorKind::Int => Self::by_quadrature(coef, alpha),
            EstimatorKind::Res => Self::from_residuals(coef, residuals),
        }
    }

    /// `E d` and `E d d'` for the stationary solution of
    /// `d_t = h(eta_{t-1}) + (psi/a(eta_{t-1})) d_{t-1}`.
    pub fn d_moments(&self) -> Result<([f64; 3], [[f64; 3]; 3])> {
        if !(self.nu1 < 1.0 && self.nu2 < 1.0) {
            return Err(Error::Singular("nu_1 or nu_2 equals 1: the derivative process does not settle".into()));
        }
        let ed = self.h.map(|v| v / (1.0 - self.nu1));
        let mut edd = [[0.0; 3]; 3];
        for k in 0..3 {
            for l in 0..3 {
                edd[k][l] = (self.hh[k][l] + self.bh[k] * ed[l] + ed[k] * self.bh[l]) / (1.0 - self.nu2);
            }
        }
        Ok((ed, edd))
    }
}

/// `(nu_1, nu_2)` alone; defined whenever `psi > 0`.
pub fn nu_hat(kind: EstimatorKind, coef: Coefficient, alpha: f64, residuals: &[f64]) -> Result<(f64, f64)> {
    if !(coef.psi > 0.0) {
        return Err(Error::domain("nu moments need psi > 0"));
    }
    match kind {
        EstimatorKind::Int => {
            let e = StableDist::new(alpha)?.expect_many(&[
                Functional::Moment(CoefficientMoment::nu(coef, 1)),
                Functional::Moment(CoefficientMoment::nu(coef, 2)),
            ])?;
            Ok((e[0].value, e[1].value))
        }
        EstimatorKind::Res => {
            let n = residuals.len() as f64;
            let (mut s1, mut s2) = (0.0, 0.0);
            for &e in residuals {
                let b = coef.psi / coef.eval(e);
                s1 += b;
                s2 += b * b;
            }
            Ok((s1 / n, s2 / n))
        }
    }
}

/// `Upsilon` over `(phi_plus, phi_minus, psi, alpha)` from nu moments and
/// innovation factors of the given kind.
pub fn upsilon_at(kind: EstimatorKind, theta: &ParamVector, y: &ReturnSeries) -> Result<InfoMatrix> {
    check_n(y)?;
    let coef = theta.coefficient()?;
    let resid = filter_log(theta, y, 0.0).residuals;
    let nu = NuMoments::estimate(kind, coef, theta.alpha(), &resid)?;
    let eta = EtaFactors::estimate(kind, theta.alpha(), &resid)?;
    let info_kind = match kind {
        EstimatorKind::Int => InfoKind::UpsilonInt,
        EstimatorKind::Res => InfoKind::UpsilonRes,
    };
    upsilon_from_parts(info_kind, &nu, &eta)
}

pub fn upsilon_from_parts(kind: InfoKind, nu: &NuMoments, eta: &EtaFactors) -> Result<InfoMatrix> {
    let (ed, edd) = nu.d_moments()?;
    let outer = DMatrix::from_fn(3, 3, |i, j| edd[i][j]);
    let mean = DVector::from_column_slice(&ed);
    let out = assemble(&outer, &mean, eta);
    Ok(InfoMatrix::from_dmatrix(kind, &PARAM_NAMES[1..], &out))
}

/// Explosive-regime information at the true parameter, by quadrature.
pub fn upsilon_theoretical(theta: &ParamVector) -> Result<InfoMatrix> {
    let nu = NuMoments::by_quadrature(theta.coefficient()?, theta.alpha())?;
    let eta = EtaFactors::by_quadrature(theta.alpha())?;
    upsilon_from_parts(InfoKind::UpsilonInt, &nu, &eta)
}

pub fn upsilon_hat(kind: EstimatorKind, fit: &FitResult, y: &ReturnSeries) -> Result<InfoMatrix> {
    upsilon_at(kind, &fit.theta_hat, y)
}

/// `Sigma_{vv} - Sigma_{v omega} Sigma_{omega omega}^{-1} Sigma_{v omega}'`
/// with `v = (phi_plus, phi_minus, psi, alpha)`.
pub fn schur_complement(sigma: &InfoMatrix) -> Result<InfoMatrix> {
    let m = sigma.matrix();
    let soo = m[(0, 0)];
    if !(soo > 0.0) {
        return Err(Error::Singular(format!("Sigma_omega_omega = {soo} is not positive; scale is degenerate")));
    }
    let vv = m.view((1, 1), (4, 4)).clone_owned();
    let vo = m.view((1, 0), (4, 1)).clone_owned();
    let out = vv - &vo * vo.transpose() / soo;
    Ok(InfoMatrix::from_dmatrix(InfoKind::Universal, &PARAM_NAMES[1..], &out))
}

/// Universal estimator valid in both regimes, built from `Sigma_hat` of the
/// given kind (residual kind by default in reports).
///
/// On explosive paths the omega row of `Sigma_hat` fades out as `sigma_t^2`
/// grows, so only the `(phi_plus, phi_minus, psi)` block must have full rank.
pub fn universal_at(kind: EstimatorKind, theta: &ParamVector, y: &ReturnSeries) -> Result<InfoMatrix> {
    let out = sigma_raw(kind, theta, y)?;
    check_rank(&out, 1, "phi_plus, phi_minus, psi")?;
    schur_complement(&InfoMatrix::from_dmatrix(sigma_kind(kind), &PARAM_NAMES, &out))
}

pub fn universal_variance(fit: &FitResult, y: &ReturnSeries) -> Result<InfoMatrix> {
    universal_at(EstimatorKind::Res, &fit.theta_hat, y)
}

/// Inverse of a symmetric matrix by eigendecomposition; falls back to the
/// pseudo-inverse when the condition number exceeds `1e12`.
#[derive(Debug, Clone)]
pub struct SymmetricInverse {
    pub inverse: DMatrix<f64>,
    pub condition_number: f64,
    pub pseudo: bool,
}

pub fn symmetric_inverse(m: &DMatrix<f64>) -> Result<SymmetricInverse> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular("matrix has non-finite entries".into()));
    }
    let eig = SymmetricEigen::new(m.clone());
    let max = eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if max == 0.0 {
        return Err(Error::Singular("zero matrix".into()));
    }
    let min = eig.eigenvalues.iter().fold(f64::INFINITY, |a, &v| a.min(v));
    let cond = if min > 0.0 { max / min } else { f64::INFINITY };
    let pseudo = !(cond <= 1e12);
    let cut = if pseudo { max * 1e-12 } else { 0.0 };
    let inv_vals = eig.eigenvalues.map(|v| if v > cut { 1.0 / v } else { 0.0 });
    let q = &eig.eigenvectors;
    let inverse = q * DMatrix::from_diagonal(&inv_vals) * q.transpose();
    Ok(SymmetricInverse {
        inverse,
        condition_number: cond,
        pseudo,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsdReport {
    pub names: Vec<String>,
    pub values: Vec<f64>,
    pub source: InfoKind,
    pub condition_number: f64,
    /// The pseudo-inverse was used.
    pub pseudo_inverse: bool,
}

impl AsdReport {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.values[i])
    }
}

/// `sqrt(diag(M^{-1}) / n)`.
pub fn asd(matrix: &InfoMatrix, n: usize) -> Result<AsdReport> {
    if n == 0 {
        return Err(Error::invalid("n must be positive"));
    }
    let inv = symmetric_inverse(&matrix.matrix())?;
    let values = (0..matrix.dim()).map(|i| (inv.inverse[(i, i)].max(0.0) / n as f64).sqrt()).collect();
    Ok(AsdReport {
        names: matrix.names.clone(),
        values,
        source: matrix.kind,
        condition_number: inv.condition_number,
        pseudo_inverse: inv.pseudo,
    })
}

/// Long-path approximation of `Sigma` at the true parameter: volatility
/// moments from a simulated path of length `n_path`, innovation factors by
/// quadrature.
pub fn sigma_theoretical(theta: &ParamVector, n_path: usize, seed: u64) -> Result<InfoMatrix> {
    let path = crate::model::simulate(theta, n_path, seed, 1000)?;
    sigma_at(EstimatorKind::Int, theta, &path.series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::simulate;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_and_scaling() {
        let id = InfoMatrix::from_dmatrix(InfoKind::SigmaRes, &PARAM_NAMES, &DMatrix::identity(5, 5));
        let r = asd(&id, 100).unwrap();
        assert!(r.values.iter().all(|v| (v - 0.1).abs() < 1e-15));
        let four = InfoMatrix::from_dmatrix(InfoKind::SigmaRes, &PARAM_NAMES, &(DMatrix::identity(5, 5) * 4.0));
        let r4 = asd(&four, 100).unwrap();
        assert!(r4.values.iter().all(|v| (v - 0.05).abs() < 1e-15));
    }

    #[test]
    fn schur_of_block_diagonal_is_the_block() {
        let mut m = DMatrix::from_fn(5, 5, |i, j| if i == j { 2.0 + i as f64 } else { 0.1 });
        for k in 1..5 {
            m[(0, k)] = 0.0;
            m[(k, 0)] = 0.0;
        }
        let s = schur_complement(&InfoMatrix::from_dmatrix(InfoKind::SigmaRes, &PARAM_NAMES, &m)).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(s.get(i, j), m[(i + 1, j + 1)]);
            }
        }
    }

    #[test]
    fn constant_coefficient_nu_is_one() {
        let c = Coefficient::new(0.0, 0.0, 0.4).unwrap();
        let r = nu_hat(EstimatorKind::Res, c, 1.3, &[0.5, -2.0, 3.0]).unwrap();
        assert_eq!(r, (1.0, 1.0));
        let q = nu_hat(EstimatorKind::Int, c, 1.3, &[]).unwrap();
        assert!((q.0 - 1.0).abs() < 1e-10 && (q.1 - 1.0).abs() < 1e-10);
        assert!(NuMoments::from_residuals(c, &[0.5, -2.0]).unwrap().d_moments().is_err());
        assert!(NuMoments::by_quadrature(c, 1.3).is_err());
    }

    #[test]
    fn psi_moment_matches_closed_pattern() {
        let c = Coefficient::new(0.3, 0.5, 0.5).unwrap();
        let nu = NuMoments::by_quadrature(c, 1.0).unwrap();
        let (_, edd) = nu.d_moments().unwrap();
        let want = nu.nu2 * (1.0 + nu.nu1) / (0.25 * (1.0 - nu.nu2) * (1.0 - nu.nu1));
        assert!((edd[2][2] - want).abs() < 1e-10 * want);
    }

    #[test]
    fn d_moments_match_simulated_recursion() {
        let c = Coefficient::new(0.3, 0.5, 0.5).unwrap();
        let alpha = 1.2;
        let nu = NuMoments::by_quadrature(c, alpha).unwrap();
        let (ed, edd) = nu.d_moments().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut d = [0.0; 3];
        let (mut m1, mut m2) = ([0.0; 3], [[0.0; 3]; 3]);
        let n = 400_000;
        for t in 0..(n + 1000) {
            let e = crate::stable::sample_standard_stable(alpha, &mut rng);
            let a = c.eval(e);
            let h = if e >= 0.0 { [e * e / a, 0.0, 1.0 / a] } else { [0.0, e * e / a, 1.0 / a] };
            let b = c.psi / a;
            d = [h[0] + b * d[0], h[1] + b * d[1], h[2] + b * d[2]];
            if t >= 1000 {
                for k in 0..3 {
                    m1[k] += d[k] / n as f64;
                    for l in 0..3 {
                        m2[k][l] += d[k] * d[l] / n as f64;
                    }
                }
            }
        }
        for k in 0..3 {
            assert!((m1[k] - ed[k]).abs() < 0.02 * ed[k], "E d[{k}] {} vs {}", m1[k], ed[k]);
            for l in 0..3 {
                assert!((m2[k][l] - edd[k][l]).abs() < 0.04 * edd[k][l].abs() + 1e-3, "E dd[{k}][{l}] {} vs {}", m2[k][l], edd[k][l]);
            }
        }
    }

    #[test]
    fn sigma_is_symmetric_psd() {
        let th = ParamVector::new(0.2, 0.1, 0.2, 0.5, 1.5).unwrap();
        let p = simulate(&th, 2000, 5, 500).unwrap();
        for kind in [EstimatorKind::Int, EstimatorKind::Res] {
            let s = sigma_at(kind, &th, &p.series).unwrap();
            assert!(s.is_psd());
            for i in 0..5 {
                for j in 0..5 {
                    assert_eq!(s.get(i, j), s.get(j, i));
                }
            }
        }
    }
}
