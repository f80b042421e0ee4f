//! Monte Carlo experiments: MLE bias/ESD/ASD tables and test rejection
//! frequencies.
//!
//! Replication `r` of cell `c` draws from a ChaCha8 generator keyed by
//! `(master_seed, c)` on stream `r`, so results do not depend on the number of
//! worker threads or on completion order.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StudentT};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypothesis::{diagnostic_test, stationarity_test, symmetry_test, DIAGNOSTIC_MIN_OBSERVATIONS};
use crate::inference::{asd, sigma_hat, sigma_theoretical, universal_variance, AsdReport};
use crate::lyapunov::{self, EstimatorKind};
use crate::mle::{self, FitConfig, MIN_OBSERVATIONS};
use crate::model::{simulate_with, ParamVector, ReturnSeries, PARAM_NAMES};
use crate::stable::{sample_standard_stable, Coefficient};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Innovation {
    /// `S(alpha, 0, 1, 0)` with the design's alpha.
    Stable,
    /// Student's t with `nu` degrees of freedom, unscaled.
    StudentT { nu: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "test", rename_all = "lowercase")]
pub enum TestSelection {
    Stationarity,
    Symmetry,
    Diagnostic { alpha_star: f64 },
}

/// One point of an alternative grid. Unset fields inherit from the spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alternative {
    pub label: String,
    #[serde(default)]
    pub theta: Option<ParamVector>,
    #[serde(default)]
    pub innovation: Option<Innovation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ExperimentKind {
    Mle {
        /// Also compute the quadrature-based ASD, the slowest step.
        #[serde(default = "yes")]
        asd_int: bool,
        /// Path length for the ASD at the true parameter; 0 skips it.
        #[serde(default = "default_theory_path")]
        theory_path: usize,
    },
    Test {
        test: TestSelection,
        alternatives: Vec<Alternative>,
        #[serde(default = "default_level")]
        level: f64,
    },
}

fn yes() -> bool {
    true
}

fn default_theory_path() -> usize {
    100_000
}

fn default_level() -> f64 {
    0.05
}

fn default_burn_in() -> usize {
    500
}

fn default_fit() -> FitConfig {
    FitConfig {
        multistart: 2,
        ..FitConfig::default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub design_id: String,
    pub theta: ParamVector,
    pub sample_sizes: Vec<usize>,
    pub replications: usize,
    #[serde(default = "default_innovation")]
    pub innovation: Innovation,
    pub master_seed: u64,
    /// Worker threads; `None` uses the global pool.
    #[serde(default)]
    pub parallelism: Option<usize>,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
    #[serde(default = "default_fit")]
    pub fit: FitConfig,
    pub experiment: ExperimentKind,
    /// Keep per-replication estimates in the result.
    #[serde(default)]
    pub keep_replications: bool,
}

fn default_innovation() -> Innovation {
    Innovation::Stable
}

impl ExperimentSpec {
    /// MLE experiment with default settings.
    pub fn mle(design_id: impl Into<String>, theta: ParamVector, sample_sizes: Vec<usize>, replications: usize, master_seed: u64) -> Self {
        ExperimentSpec {
            design_id: design_id.into(),
            theta,
            sample_sizes,
            replications,
            innovation: Innovation::Stable,
            master_seed,
            parallelism: None,
            burn_in: default_burn_in(),
            fit: default_fit(),
            experiment: ExperimentKind::Mle {
                asd_int: true,
                theory_path: default_theory_path(),
            },
            keep_replications: false,
        }
    }

    /// Test experiment over `alternatives` with default settings.
    pub fn test(
        design_id: impl Into<String>,
        theta: ParamVector,
        n: usize,
        replications: usize,
        master_seed: u64,
        test: TestSelection,
        alternatives: Vec<Alternative>,
    ) -> Self {
        ExperimentSpec {
            experiment: ExperimentKind::Test {
                test,
                alternatives,
                level: default_level(),
            },
            ..Self::mle(design_id, theta, vec![n], replications, master_seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::invalid("replication count must be at least 1"));
        }
        if self.sample_sizes.is_empty() {
            return Err(Error::invalid("at least one sample size is required"));
        }
        if let Some(&n) = self.sample_sizes.iter().find(|&&n| n < MIN_OBSERVATIONS) {
            return Err(Error::invalid(format!("sample size {n} is below {MIN_OBSERVATIONS}")));
        }
        if self.parallelism == Some(0) {
            return Err(Error::invalid("parallelism width must be at least 1"));
        }
        ParamVector::from_array(self.theta.to_array())?;
        self.fit.validate()?;
        let mut innovations = vec![self.innovation];
        match &self.experiment {
            ExperimentKind::Mle { .. } => {
                if self.innovation != Innovation::Stable {
                    return Err(Error::invalid("Student-t innovations are only allowed in test experiments"));
                }
            }
            ExperimentKind::Test { alternatives, level, test } => {
                if alternatives.is_empty() {
                    return Err(Error::invalid("a test experiment needs at least one alternative"));
                }
                if !(*level > 0.0 && *level < 1.0) {
                    return Err(Error::invalid("level must lie in (0, 1)"));
                }
                if let TestSelection::Diagnostic { alpha_star } = test {
                    if !(*alpha_star > 0.0 && *alpha_star < 2.0) {
                        return Err(Error::invalid("alpha_star must lie in (0, 2)"));
                    }
                    if let Some(&n) = self.sample_sizes.iter().find(|&&n| n < DIAGNOSTIC_MIN_OBSERVATIONS) {
                        return Err(Error::invalid(format!(
                            "sample size {n} is below {DIAGNOSTIC_MIN_OBSERVATIONS} for the diagnostic test"
                        )));
                    }
                }
                for a in alternatives {
                    if let Some(t) = a.theta {
                        ParamVector::from_array(t.to_array())?;
                    }
                    innovations.extend(a.innovation);
                }
            }
        }
        for i in innovations {
            if let Innovation::StudentT { nu } = i {
                if !(nu > 0.0 && nu.is_finite()) {
                    return Err(Error::invalid(format!("Student-t degrees of freedom must be positive, got {nu}")));
                }
            }
        }
        Ok(())
    }
}

/// Summary of one parameter over the successful replications of a cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSummary {
    pub name: String,
    pub truth: f64,
    pub mean: f64,
    pub bias: f64,
    pub esd: f64,
    /// At the true parameter.
    pub asd: Option<f64>,
    pub asd_int: Option<f64>,
    pub asd_res: Option<f64>,
    /// From the universal estimator; absent for omega.
    pub asd_universal: Option<f64>,
}

impl ParameterSummary {
    /// `|ESD - ASD| / ASD`, with the true-parameter ASD when available.
    pub fn coherence(&self) -> Option<f64> {
        let a = self.asd.or(self.asd_res)?;
        Some((self.esd - a).abs() / a)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub n: usize,
    pub replication: usize,
    pub theta_hat: Option<[f64; 5]>,
    pub asd_int: Option<Vec<f64>>,
    pub asd_res: Option<Vec<f64>>,
    pub asd_universal: Option<Vec<f64>>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MleCell {
    pub n: usize,
    pub replications: usize,
    pub failures: usize,
    pub gamma: f64,
    pub parameters: Vec<ParameterSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectionPoint {
    pub label: String,
    pub n: usize,
    pub replications: usize,
    pub failures: usize,
    pub rejections: usize,
    /// Rejections over successful replications.
    pub frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub design_id: String,
    pub master_seed: u64,
    pub mle: Vec<MleCell>,
    pub rejections: Vec<RejectionPoint>,
    /// First few failure messages.
    pub failure_messages: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub replication_records: Vec<ReplicationRecord>,
    /// Wall-clock time; left out of serialized output when unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_seconds: Option<f64>,
}

impl ExperimentResult {
    /// Copy without the wall-clock field, for comparisons.
    pub fn without_timing(&self) -> Self {
        ExperimentResult {
            elapsed_seconds: None,
            ..self.clone()
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Generator for replication `r` of cell `cell`.
pub fn replication_rng(master_seed: u64, cell: u64, r: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(master_seed ^ splitmix64(cell)));
    rng.set_stream(r as u64);
    rng
}

/// Simulated series for one replication; a truncated path is an error.
pub fn simulate_replication(theta: &ParamVector, innovation: Innovation, n: usize, burn_in: usize, rng: &mut ChaCha8Rng) -> Result<ReturnSeries> {
    let path = match innovation {
        Innovation::Stable => {
            let alpha = theta.alpha();
            simulate_with(theta, n, burn_in, rng, |r| sample_standard_stable(alpha, r))?
        }
        Innovation::StudentT { nu } => {
            let t = StudentT::new(nu).map_err(|e| Error::invalid(e.to_string()))?;
            simulate_with(theta, n, burn_in, rng, |r| t.sample(r))?
        }
    };
    if path.truncated {
        return Err(Error::NumericFailure {
            context: "simulated path left the f64 range".into(),
            requested: n as f64,
            achieved: path.series.n() as f64,
        });
    }
    Ok(path.series)
}

fn in_pool<T: Send>(width: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match width {
        None => Ok(f()),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn check_failures(failures: usize, total: usize, what: &str, messages: &[String]) -> Result<()> {
    if failures * 20 > total {
        let first = messages.first().cloned().unwrap_or_default();
        return Err(Error::NumericFailure {
            context: format!("{failures} of {total} replications failed in {what}; first: {first}"),
            requested: total as f64,
            achieved: (total - failures) as f64,
        });
    }
    Ok(())
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn mean_opt(v: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let xs: Vec<f64> = v.flatten().filter(|x| x.is_finite()).collect();
    (!xs.is_empty()).then(|| mean(&xs))
}

fn asd_values(r: Result<AsdReport>) -> Option<Vec<f64>> {
    r.ok().map(|a| a.values)
}

fn mle_replication(spec: &ExperimentSpec, n: usize, cell: u64, r: usize, asd_int: bool) -> ReplicationRecord {
    let mut record = ReplicationRecord {
        n,
        replication: r,
        theta_hat: None,
        asd_int: None,
        asd_res: None,
        asd_universal: None,
        error: None,
    };
    let mut rng = replication_rng(spec.master_seed, cell, r);
    let out = simulate_replication(&spec.theta, spec.innovation, n, spec.burn_in, &mut rng).and_then(|y| {
        let f = mle::fit(&y, &spec.fit)?;
        Ok((y, f))
    });
    match out {
        Err(e) => record.error = Some(e.to_string()),
        Ok((y, f)) => {
            record.theta_hat = Some(f.theta_hat.to_array());
            if asd_int {
                record.asd_int = asd_values(sigma_hat(EstimatorKind::Int, &f, &y).and_then(|s| asd(&s, n)));
            }
            record.asd_res = asd_values(sigma_hat(EstimatorKind::Res, &f, &y).and_then(|s| asd(&s, n)));
            record.asd_universal = asd_values(universal_variance(&f, &y).and_then(|s| asd(&s, n)));
        }
    }
    record
}

/// Bias, ESD and the ASD variants for each sample size.
pub fn run_mle_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    spec.validate()?;
    let (asd_int, theory_path) = match spec.experiment {
        ExperimentKind::Mle { asd_int, theory_path } => (asd_int, theory_path),
        ExperimentKind::Test { .. } => return Err(Error::invalid("spec describes a test experiment")),
    };
    let start = Instant::now();
    let truth = spec.theta.to_array();
    let coef: Coefficient = spec.theta.coefficient()?;
    let gamma = lyapunov::gamma_int(&coef, spec.theta.alpha(), 1)?.gamma_hat;
    let theory = if theory_path > 0 && gamma < 0.0 {
        asd_values(sigma_theoretical(&spec.theta, theory_path, splitmix64(spec.master_seed)).and_then(|s| asd(&s, 1)))
    } else {
        None
    };

    let mut cells = Vec::new();
    let mut records = Vec::new();
    let mut messages = Vec::new();
    for (ci, &n) in spec.sample_sizes.iter().enumerate() {
        let recs: Vec<ReplicationRecord> = in_pool(spec.parallelism, || {
            (0..spec.replications)
                .into_par_iter()
                .map(|r| mle_replication(spec, n, ci as u64, r, asd_int))
                .collect()
        })?;
        let failures = recs.iter().filter(|r| r.theta_hat.is_none()).count();
        messages.extend(recs.iter().filter_map(|r| r.error.clone()).take(5));
        check_failures(failures, spec.replications, &format!("cell n = {n}"), &messages)?;
        let ok: Vec<&ReplicationRecord> = recs.iter().filter(|r| r.theta_hat.is_some()).collect();
        let parameters = (0..5)
            .map(|i| {
                let est: Vec<f64> = ok.iter().map(|r| r.theta_hat.unwrap()[i]).collect();
                let m = mean(&est);
                let var = if est.len() > 1 {
                    est.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (est.len() - 1) as f64
                } else {
                    0.0
                };
                let universal = if i == 0 {
                    None
                } else {
                    mean_opt(ok.iter().map(|r| r.asd_universal.as_ref().map(|v| v[i - 1])))
                };
                ParameterSummary {
                    name: PARAM_NAMES[i].to_string(),
                    truth: truth[i],
                    mean: m,
                    bias: m - truth[i],
                    esd: var.sqrt(),
                    asd: theory.as_ref().map(|t| t[i] / (n as f64).sqrt()),
                    asd_int: mean_opt(ok.iter().map(|r| r.asd_int.as_ref().map(|v| v[i]))),
                    asd_res: mean_opt(ok.iter().map(|r| r.asd_res.as_ref().map(|v| v[i]))),
                    asd_universal: universal,
                }
            })
            .collect();
        cells.push(MleCell {
            n,
            replications: spec.replications,
            failures,
            gamma,
            parameters,
        });
        if spec.keep_replications {
            records.extend(recs);
        }
    }
    messages.truncate(5);
    Ok(ExperimentResult {
        design_id: spec.design_id.clone(),
        master_seed: spec.master_seed,
        mle: cells,
        rejections: Vec::new(),
        failure_messages: messages,
        replication_records: records,
        elapsed_seconds: Some(start.elapsed().as_secs_f64()),
    })
}

fn test_replication(
    spec: &ExperimentSpec,
    theta: &ParamVector,
    innovation: Innovation,
    test: TestSelection,
    level: f64,
    n: usize,
    cell: u64,
    r: usize,
) -> Result<bool> {
    let mut rng = replication_rng(spec.master_seed, cell, r);
    let y = simulate_replication(theta, innovation, n, spec.burn_in, &mut rng)?;
    match test {
        TestSelection::Diagnostic { alpha_star } => Ok(diagnostic_test(&y, alpha_star, level, &spec.fit)?.report.reject),
        TestSelection::Stationarity => {
            let f = mle::fit(&y, &spec.fit)?;
            Ok(stationarity_test(&f, &y, level)?.stationarity.reject)
        }
        TestSelection::Symmetry => {
            let f = mle::fit(&y, &spec.fit)?;
            Ok(symmetry_test(&f, &y, level)?.reject)
        }
    }
}

/// Rejection frequency of `test` at every alternative and sample size.
pub fn run_test_experiment(spec: &ExperimentSpec, test: TestSelection, alternatives: &[Alternative]) -> Result<ExperimentResult> {
    spec.validate()?;
    let level = match &spec.experiment {
        ExperimentKind::Test { level, .. } => *level,
        ExperimentKind::Mle { .. } => default_level(),
    };
    if alternatives.is_empty() {
        return Err(Error::invalid("a test experiment needs at least one alternative"));
    }
    let start = Instant::now();
    let mut points = Vec::new();
    let mut messages = Vec::new();
    for (ni, &n) in spec.sample_sizes.iter().enumerate() {
        for (ai, alt) in alternatives.iter().enumerate() {
            let theta = alt.theta.unwrap_or(spec.theta);
            let innovation = alt.innovation.unwrap_or(spec.innovation);
            let cell = ((ni as u64) << 32) | ai as u64;
            let outcomes: Vec<Result<bool>> = in_pool(spec.parallelism, || {
                (0..spec.replications)
                    .into_par_iter()
                    .map(|r| test_replication(spec, &theta, innovation, test, level, n, cell, r))
                    .collect()
            })?;
            let failures = outcomes.iter().filter(|o| o.is_err()).count();
            messages.extend(outcomes.iter().filter_map(|o| o.as_ref().err().map(|e| e.to_string())).take(5));
            check_failures(failures, spec.replications, &format!("alternative {}", alt.label), &messages)?;
            let rejections = outcomes.iter().filter(|o| matches!(o, Ok(true))).count();
            let done = spec.replications - failures;
            points.push(RejectionPoint {
                label: alt.label.clone(),
                n,
                replications: spec.replications,
                failures,
                rejections,
                frequency: rejections as f64 / done as f64,
            });
        }
    }
    messages.truncate(5);
    Ok(ExperimentResult {
        design_id: spec.design_id.clone(),
        master_seed: spec.master_seed,
        mle: Vec::new(),
        rejections: points,
        failure_messages: messages,
        replication_records: Vec::new(),
        elapsed_seconds: Some(start.elapsed().as_secs_f64()),
    })
}

/// Dispatch on the experiment kind.
pub fn run(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    match &spec.experiment {
        ExperimentKind::Mle { .. } => run_mle_experiment(spec),
        ExperimentKind::Test { test, alternatives, .. } => run_test_experiment(spec, *test, alternatives),
    }
}

/// The `alpha_0 = 1.5` design `(0.2, 0.1, 0.2, 0.5, 1.5)`.
pub fn table1_design() -> ParamVector {
    ParamVector::new(0.2, 0.1, 0.2, 0.5, 1.5).expect("valid design")
}

/// Explosive design `(0.1, 0.1, 0.2, 0.5, 1.0)`, `gamma` about 0.166.
pub fn explosive_design() -> ParamVector {
    ParamVector::new(0.1, 0.1, 0.2, 0.5, 1.0).expect("valid design")
}
