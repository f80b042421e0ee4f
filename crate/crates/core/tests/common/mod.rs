//! Finite-difference property suites shared by the derivative tests and the
//! acceptance run.

#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

use sagarch::hypothesis::{g2, g_dot};
use sagarch::lyapunov::gamma_int;
use sagarch::mle::{loglik, score};
use sagarch::model::{filter, simulate, ParamVector};
use sagarch::stable::{log_pdf, StableDist};

fn runner(cases: u32) -> TestRunner {
    let cfg = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(cfg, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), TestCaseError> {
    if ok {
        Ok(())
    } else {
        Err(TestCaseError::fail(msg()))
    }
}

fn theta_strategy(alpha: (f64, f64)) -> impl Strategy<Value = (f64, f64, f64, f64, f64)> {
    (0.05f64..1.0, 0.01f64..0.3, 0.01f64..0.3, 0.1f64..0.8, alpha.0..alpha.1)
}

fn with_coord(theta: &ParamVector, k: usize, v: f64) -> ParamVector {
    let mut a = theta.to_array();
    a[k] = v;
    ParamVector::from_array(a).unwrap()
}

/// `d sigma2_t / d (omega, phi_plus, phi_minus, psi)` against central
/// differences, relative tolerance 1e-6, on stationary parameters.
pub fn filter_derivatives(cases: u32) -> Result<(), String> {
    runner(cases)
        .run(&(theta_strategy((0.8, 1.9)), any::<u64>()), |((w, pp, pm, psi, a), seed)| {
            let th = ParamVector::new(w, pp, pm, psi, a).unwrap();
            let g = gamma_int(&th.coefficient().unwrap(), a, 1).unwrap();
            prop_assume!(g.gamma_hat < 0.0);
            let y = simulate(&th, 150, seed, 100).unwrap().series;
            let base = filter(&th, &y);
            let p = th.to_array();
            for k in 0..4 {
                let h = 1e-4 * p[k];
                let up = filter(&with_coord(&th, k, p[k] + h), &y).sigma2;
                let dn = filter(&with_coord(&th, k, p[k] - h), &y).sigma2;
                for t in 0..base.sigma2.len() {
                    let fd = (up[t] - dn[t]) / (2.0 * h);
                    let an = base.dsigma2[t][k];
                    // The second term bounds the rounding error of the difference quotient.
                    check((fd - an).abs() <= 1e-6 * an.abs() + 1e-14 * base.sigma2[t] / h, || {
                        format!("theta {p:?} coord {k} t {t}: analytic {an} fd {fd}")
                    })?;
                }
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// Score vector against central differences of the log-likelihood,
/// relative tolerance 1e-4.
pub fn score_vector(cases: u32) -> Result<(), String> {
    runner(cases)
        .run(&(theta_strategy((0.6, 1.9)), any::<u64>()), |((w, pp, pm, psi, a), seed)| {
            let th = ParamVector::new(w, pp, pm, psi, a).unwrap();
            let path = simulate(&th, 200, seed, 100).unwrap();
            prop_assume!(!path.truncated);
            let y = path.series;
            let s = score(&th, &y).unwrap();
            let p = th.to_array();
            for k in 0..5 {
                let h = 1e-6 * p[k].abs().max(0.1);
                let fd = (loglik(&with_coord(&th, k, p[k] + h), &y).unwrap() - loglik(&with_coord(&th, k, p[k] - h), &y).unwrap()) / (2.0 * h);
                check((fd - s[k]).abs() <= 1e-4 * fd.abs().max(1.0), || {
                    format!("theta {p:?} coord {k}: analytic {} fd {fd}", s[k])
                })?;
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn rel_ok(an: f64, fd: f64, tol: f64) -> bool {
    (an - fd).abs() <= tol * an.abs().max(1e-3)
}

/// `dlogf_dx` against central differences of `log_pdf` in x, 1e-5 relative.
pub fn dlogf_dx(cases: u32) -> Result<(), String> {
    runner(cases)
        .run(&(0.5f64..1.95, -25.0f64..25.0), |(a, x)| {
            let d = StableDist::new(a).unwrap();
            let h = 1e-4 * x.abs().max(1.0);
            let fd = (log_pdf(a, x + h).unwrap() - log_pdf(a, x - h).unwrap()) / (2.0 * h);
            let an = d.dlogf_dx(x).unwrap();
            check(rel_ok(an, fd, 1e-5), || format!("alpha {a} x {x}: analytic {an} fd {fd}"))
        })
        .map_err(|e| e.to_string())
}

/// `dlogf_dalpha` against central differences of `log_pdf` in alpha,
/// 1e-5 relative.
pub fn dlogf_dalpha(cases: u32) -> Result<(), String> {
    runner(cases)
        .run(&(0.5f64..1.9, -25.0f64..25.0), |(a, x)| {
            let d = StableDist::new(a).unwrap();
            let h = 1e-4;
            let fd = (log_pdf(a + h, x).unwrap() - log_pdf(a - h, x).unwrap()) / (2.0 * h);
            let an = d.dlogf_dalpha(x).unwrap();
            check(rel_ok(an, fd, 1e-5), || format!("alpha {a} x {x}: analytic {an} fd {fd}"))
        })
        .map_err(|e| e.to_string())
}

/// Second component of `gdot(r)` against central differences of
/// `g_2(r) = f(F^{-1}(r)) F^{-1}(r)`, 1e-5 relative.
pub fn g_dot_2(cases: u32) -> Result<(), String> {
    runner(cases)
        .run(&(0.6f64..1.9, 0.02f64..0.98), |(a, r)| {
            let d = StableDist::new(a).unwrap();
            let h = 1e-5;
            let fd = (g2(&d, r + h).unwrap() - g2(&d, r - h).unwrap()) / (2.0 * h);
            let an = g_dot(&d, r).unwrap()[1];
            check(rel_ok(an, fd, 1e-5), || format!("alpha {a} r {r}: analytic {an} fd {fd}"))
        })
        .map_err(|e| e.to_string())
}
