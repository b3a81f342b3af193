//! Test orchestration: estimate the calibration matrix, factorize it, draw
//! Monte Carlo critical values, and decide.
//!
//! Eight variants are covered: one- and two-sample, studentized or not, each
//! with or without the screening step. Within one run the screened and
//! unscreened critical values come from a single factorization and a single
//! draw set, so the nested-mask relation cv(S) <= cv(full) holds exactly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{
    correlation_from_covariance, pooled_covariance, psd_factorize, sample_covariance,
    sample_variances, DataMatrix, PsdFactor, SymmetricMatrix,
};
use crate::mc::{draw_max_norms, draw_max_norms_multi, MIN_DRAWS};
use crate::rng::RngSpec;
use crate::screening::screen;
use crate::stats::{max_statistic, one_sample_stats, two_sample_stats, MarginalStats};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestFamily {
    OneSample,
    TwoSample,
}

/// Externally supplied covariance estimates, honored in place of the sample
/// covariance. The diagonal is rebuilt from the sample variances so the
/// studentized calibration stays consistent with the observed scales.
#[derive(Debug, Clone)]
pub struct CovarianceOverride {
    pub first: SymmetricMatrix,
    /// Second-group estimate; required for two-sample runs with an override.
    pub second: Option<SymmetricMatrix>,
}

/// Configuration of a single test run.
#[derive(Debug, Clone)]
pub struct TestSpec {
    pub family: TestFamily,
    pub studentized: bool,
    pub screened: bool,
    pub alpha: f64,
    pub num_draws: usize,
    pub rng: RngSpec,
    /// One-sample null mean; defaults to the zero vector.
    pub mu0: Option<Vec<f64>>,
    /// Screening level; defaults to `alpha`. Exposing it separately is an
    /// extension beyond the shared-level rule the threshold was derived with.
    pub screening_alpha: Option<f64>,
    pub covariance_override: Option<CovarianceOverride>,
}

impl TestSpec {
    pub fn new(family: TestFamily, studentized: bool, screened: bool, rng: RngSpec) -> Self {
        Self {
            family,
            studentized,
            screened,
            alpha: 0.05,
            num_draws: crate::mc::DEFAULT_DRAWS,
            rng,
            mu0: None,
            screening_alpha: None,
            covariance_override: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid(format!("alpha must be in (0,1), got {}", self.alpha)));
        }
        if self.num_draws < MIN_DRAWS {
            return Err(Error::invalid(format!(
                "need at least {MIN_DRAWS} Monte Carlo draws, got {}",
                self.num_draws
            )));
        }
        Ok(())
    }

    fn screening_level(&self) -> f64 {
        self.screening_alpha.unwrap_or(self.alpha)
    }
}

/// Outcome of one test run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    /// None only under forced acceptance (every coordinate screened out).
    pub critical_value: Option<f64>,
    pub p_value: f64,
    pub reject: bool,
    pub screened_out: Option<usize>,
    pub retained: Option<Vec<usize>>,
    pub num_draws: usize,
    pub notes: Vec<String>,
}

impl TestResult {
    fn forced_acceptance(num_draws: usize, excluded: usize) -> Self {
        TestResult {
            statistic: 0.0,
            critical_value: None,
            p_value: 1.0,
            reject: false,
            screened_out: Some(excluded),
            retained: Some(Vec::new()),
            num_draws,
            notes: vec!["screening retained zero coordinates".into()],
        }
    }
}

// Substream tags: draws for the covariance-calibrated (non-studentized) path
// and the correlation-calibrated (studentized) path are independent.
const STREAM_NS_DRAWS: u64 = 0;
const STREAM_S_DRAWS: u64 = 1;

fn draw_stream(rng: RngSpec, studentized: bool) -> RngSpec {
    rng.substream(if studentized { STREAM_S_DRAWS } else { STREAM_NS_DRAWS })
}

fn apply_override(
    base: Result<SymmetricMatrix>,
    override_mat: Option<&SymmetricMatrix>,
    variances: &[f64],
) -> Result<SymmetricMatrix> {
    match override_mat {
        None => base,
        Some(mat) => {
            if mat.dim() != variances.len() {
                return Err(Error::DimensionMismatch(format!(
                    "covariance override dim {} vs {} features",
                    mat.dim(),
                    variances.len()
                )));
            }
            mat.with_diagonal(variances)
        }
    }
}

fn decide(
    stats: &MarginalStats,
    calibration: &SymmetricMatrix,
    spec: &TestSpec,
) -> Result<TestResult> {
    let mask: Option<Vec<usize>> = if spec.screened {
        let sr = screen(stats, spec.screening_level())?;
        if sr.all_excluded() {
            return Ok(TestResult::forced_acceptance(spec.num_draws, sr.excluded().len()));
        }
        Some(sr.retained().to_vec())
    } else {
        None
    };

    let statistic = max_statistic(stats, spec.studentized, mask.as_deref())?;
    let factor = psd_factorize(calibration, 0.0)?;
    let est = draw_max_norms(
        &factor,
        spec.num_draws,
        mask.as_deref(),
        draw_stream(spec.rng, spec.studentized),
    )?;
    let critical_value = est.quantile(spec.alpha)?;
    let p_value = est.empirical_pvalue(statistic);
    let mut notes = Vec::new();
    if factor.clipped_count() > 0 {
        notes.push(format!("{} eigenvalues clamped to enforce PSD", factor.clipped_count()));
    }
    Ok(TestResult {
        statistic,
        critical_value: Some(critical_value),
        p_value,
        reject: statistic > critical_value,
        screened_out: mask.as_ref().map(|m| stats.dim() - m.len()),
        retained: mask,
        num_draws: spec.num_draws,
        notes,
    })
}

/// One-sample test of H0: mu = mu0.
pub fn run_one_sample(data: &DataMatrix, spec: &TestSpec) -> Result<TestResult> {
    if spec.family != TestFamily::OneSample {
        return Err(Error::invalid("spec family is not one_sample"));
    }
    spec.validate()?;
    let shifted = match &spec.mu0 {
        Some(mu0) => data.shifted(mu0)?,
        None => data.clone(),
    };
    let stats = one_sample_stats(&shifted, None)?;
    let variances = sample_variances(&shifted);
    let cov = apply_override(
        sample_covariance(&shifted),
        spec.covariance_override.as_ref().map(|o| &o.first),
        &variances,
    )?;
    let calibration = if spec.studentized { correlation_from_covariance(&cov)? } else { cov };
    decide(&stats, &calibration, spec)
}

/// Two-sample test of H0: mu1 = mu2.
pub fn run_two_sample(
    data_x: &DataMatrix,
    data_y: &DataMatrix,
    spec: &TestSpec,
) -> Result<TestResult> {
    if spec.family != TestFamily::TwoSample {
        return Err(Error::invalid("spec family is not two_sample"));
    }
    spec.validate()?;
    let stats = two_sample_stats(data_x, data_y)?;
    let cov_x = apply_override(
        sample_covariance(data_x),
        spec.covariance_override.as_ref().map(|o| &o.first),
        &sample_variances(data_x),
    )?;
    let cov_y = match spec.covariance_override.as_ref() {
        Some(o) => {
            let second = o.second.as_ref().ok_or_else(|| {
                Error::invalid("two-sample covariance override needs both group matrices")
            })?;
            apply_override(sample_covariance(data_y), Some(second), &sample_variances(data_y))?
        }
        None => sample_covariance(data_y)?,
    };
    let pooled = pooled_covariance(&cov_x, &cov_y, data_x.n_obs(), data_y.n_obs())?;
    let calibration =
        if spec.studentized { correlation_from_covariance(&pooled)? } else { pooled };
    decide(&stats, &calibration, spec)
}

/// Critical value for a masked max-norm: the (1 - alpha)-quantile of the
/// masked draws from the given factor.
pub fn critical_value_for_mask(
    factor: &PsdFactor,
    mask: &[usize],
    alpha: f64,
    num_draws: usize,
    rng: RngSpec,
) -> Result<f64> {
    let est = draw_max_norms(factor, num_draws, Some(mask), rng)?;
    est.quantile(alpha)
}

/// Results of all four variants on one dataset, sharing per-variant draw
/// sets between the screened and unscreened versions.
#[derive(Debug, Clone)]
pub struct VariantResults {
    pub non_studentized: TestResult,
    pub studentized: TestResult,
    pub non_studentized_screened: TestResult,
    pub studentized_screened: TestResult,
}

impl VariantResults {
    pub fn get(&self, studentized: bool, screened: bool) -> &TestResult {
        match (studentized, screened) {
            (false, false) => &self.non_studentized,
            (true, false) => &self.studentized,
            (false, true) => &self.non_studentized_screened,
            (true, true) => &self.studentized_screened,
        }
    }
}

struct VariantInputs<'a> {
    stats: &'a MarginalStats,
    covariance: &'a SymmetricMatrix,
    alpha: f64,
    screening_alpha: f64,
    num_draws: usize,
    rng: RngSpec,
}

/// Run the four (studentized x screened) variants over shared estimates.
/// Equivalent to four independent `run_*` calls with the same spec fields,
/// but each calibration matrix is factored and sampled once.
fn run_variants(inp: VariantInputs<'_>) -> Result<VariantResults> {
    let screen_result = screen(inp.stats, inp.screening_alpha)?;
    let retained = screen_result.retained().to_vec();
    let excluded = screen_result.excluded().len();

    let mut out: Vec<TestResult> = Vec::with_capacity(4);
    for studentized in [false, true] {
        let calibration = if studentized {
            correlation_from_covariance(inp.covariance)?
        } else {
            inp.covariance.clone()
        };
        let factor = psd_factorize(&calibration, 0.0)?;
        let masks: Vec<Option<&[usize]>> = if retained.is_empty() {
            vec![None]
        } else {
            vec![None, Some(retained.as_slice())]
        };
        let ests =
            draw_max_norms_multi(&factor, inp.num_draws, &masks, draw_stream(inp.rng, studentized))?;

        let statistic = max_statistic(inp.stats, studentized, None)?;
        let cv = ests[0].quantile(inp.alpha)?;
        out.push(TestResult {
            statistic,
            critical_value: Some(cv),
            p_value: ests[0].empirical_pvalue(statistic),
            reject: statistic > cv,
            screened_out: None,
            retained: None,
            num_draws: inp.num_draws,
            notes: Vec::new(),
        });

        if retained.is_empty() {
            out.push(TestResult::forced_acceptance(inp.num_draws, excluded));
        } else {
            let stat_f = max_statistic(inp.stats, studentized, Some(&retained))?;
            let cv_f = ests[1].quantile(inp.alpha)?;
            out.push(TestResult {
                statistic: stat_f,
                critical_value: Some(cv_f),
                p_value: ests[1].empirical_pvalue(stat_f),
                reject: stat_f > cv_f,
                screened_out: Some(excluded),
                retained: Some(retained.clone()),
                num_draws: inp.num_draws,
                notes: Vec::new(),
            });
        }
    }
    let mut it = out.into_iter();
    Ok(VariantResults {
        non_studentized: it.next().unwrap(),
        non_studentized_screened: it.next().unwrap(),
        studentized: it.next().unwrap(),
        studentized_screened: it.next().unwrap(),
    })
}

/// All four one-sample variants on one dataset (the simulation harness path).
/// `screening_alpha` is the level inside the screening cutoff; `1.0` gives
/// the limiting level-free threshold.
pub fn run_one_sample_variants(
    data: &DataMatrix,
    alpha: f64,
    screening_alpha: f64,
    num_draws: usize,
    rng: RngSpec,
) -> Result<VariantResults> {
    let stats = one_sample_stats(data, None)?;
    let cov = sample_covariance(data)?;
    run_variants(VariantInputs {
        stats: &stats,
        covariance: &cov,
        alpha,
        screening_alpha,
        num_draws,
        rng,
    })
}

/// All four two-sample variants on one dataset pair.
pub fn run_two_sample_variants(
    data_x: &DataMatrix,
    data_y: &DataMatrix,
    alpha: f64,
    screening_alpha: f64,
    num_draws: usize,
    rng: RngSpec,
) -> Result<VariantResults> {
    let stats = two_sample_stats(data_x, data_y)?;
    let pooled = pooled_covariance(
        &sample_covariance(data_x)?,
        &sample_covariance(data_y)?,
        data_x.n_obs(),
        data_y.n_obs(),
    )?;
    run_variants(VariantInputs {
        stats: &stats,
        covariance: &pooled,
        alpha,
        screening_alpha,
        num_draws,
        rng,
    })
}
