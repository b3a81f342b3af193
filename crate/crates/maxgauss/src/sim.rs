//! Simulation harness: generate data under the ten benchmark covariance /
//! innovation models, inject sparse or dense mean signals, run all four test
//! variants over replicates, and tabulate empirical size and power.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Beta, ChiSquared, Distribution, Gamma, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{run_one_sample_variants, run_two_sample_variants, VariantResults};
use crate::error::{Error, Result};
use crate::matrix::{psd_factorize, DataMatrix, PsdFactor, SymmetricMatrix};
use crate::rng::RngSpec;

/// Innovation law for the moving-average models, centered at zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnovationLaw {
    /// Beta(2,1) minus its mean 2/3 (variance 1/18).
    Beta21,
    /// Gamma with shape 1, scale 4, minus its mean 4 (variance 16).
    Gamma14,
    /// Gamma with shape 4, scale 1, minus its mean 4 (variance 4).
    Gamma41,
}

impl InnovationLaw {
    pub fn variance(self) -> f64 {
        match self {
            InnovationLaw::Beta21 => 1.0 / 18.0,
            InnovationLaw::Gamma14 => 16.0,
            InnovationLaw::Gamma41 => 4.0,
        }
    }

    fn sample(self, rng: &mut ChaCha12Rng) -> f64 {
        match self {
            InnovationLaw::Beta21 => Beta::new(2.0, 1.0).unwrap().sample(rng) - 2.0 / 3.0,
            InnovationLaw::Gamma14 => Gamma::new(1.0, 4.0).unwrap().sample(rng) - 4.0,
            InnovationLaw::Gamma41 => Gamma::new(4.0, 1.0).unwrap().sample(rng) - 4.0,
        }
    }
}

/// Data-generating model for one sample group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CovModel {
    /// Gaussian, sigma_{kl} = rho^{|k-l|}.
    BandableAr { rho: f64 },
    /// Gaussian, Unif(1,2) diagonal, off-diagonal `value` inside consecutive
    /// blocks of `block_size`.
    BlockDiag { block_size: usize, value: f64 },
    /// Gaussian, Unif(1,2) diagonal, fractional-Gaussian-noise lag structure
    /// with the given Hurst exponent.
    LongRange { hurst: f64 },
    /// Location-shifted multivariate t with `df` degrees of freedom and
    /// scale matrix rho^{|k-l|}.
    ArTInnov { rho: f64, df: f64 },
    /// Moving average over a length-p coefficient vector drawn once per
    /// scenario from uniform_weight * Unif(-1,1) + (1 - uniform_weight) * delta_0,
    /// with iid centered innovations.
    MovingAverage { uniform_weight: f64, law: InnovationLaw },
    /// Theta^{1/2} (F + U U') Theta^{1/2} with tri-diagonal F (unit diagonal,
    /// 0.5 off), U uniform on the Stiefel manifold with `rank` columns, and
    /// Unif(1,6) diagonal Theta.
    NonsparseStiefel { rank: usize },
    /// Unit-diagonal block covariance where a random ~p/20 of the size-10
    /// blocks are perfectly correlated (off-diagonal 1) and the rest have
    /// off-diagonal `corr`; rows are factor transforms of iid standardized
    /// centered Gamma(4,1) innovations. Rank deficient by construction.
    PerfectCorrBlocks { corr: f64 },
}

enum RowLaw {
    Normal,
    TScaled { df: f64 },
    /// Centered Gamma(4,1) scaled to unit variance.
    StdGamma41,
}

enum Sampler {
    Factor { factor: PsdFactor, law: RowLaw },
    MovingAverage { coeffs: Vec<f64>, law: InnovationLaw },
}

/// A model instantiated at dimension p, with its scenario-level randomness
/// (diagonals, factor loadings, MA coefficients) already drawn.
pub struct PreparedModel {
    covariance: SymmetricMatrix,
    sampler: Sampler,
    clipped: usize,
}

impl PreparedModel {
    /// The model's population covariance (for the t models, the scale
    /// matrix, whose diagonal the signal magnitudes are defined with).
    pub fn covariance(&self) -> &SymmetricMatrix {
        &self.covariance
    }

    pub fn sigma_diag(&self) -> Vec<f64> {
        self.covariance.diagonal()
    }

    /// Eigenvalues clamped when factorizing the model covariance.
    pub fn clipped_count(&self) -> usize {
        self.clipped
    }
}

fn unif_diag(p: usize, lo: f64, hi: f64, rng: &mut ChaCha12Rng) -> Vec<f64> {
    (0..p).map(|_| rng.gen_range(lo..hi)).collect()
}

fn fgn_autocovariance(lag: usize, hurst: f64) -> f64 {
    let e = lag as f64;
    let h2 = 2.0 * hurst;
    0.5 * ((e + 1.0).powf(h2) + (e - 1.0).powf(h2) - 2.0 * e.powf(h2))
}

fn stiefel_uniform(p: usize, rank: usize, rng: &mut ChaCha12Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(p, rank, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    // sign-fix the R diagonal so the distribution is Haar
    for j in 0..rank {
        if r[(j, j)] < 0.0 {
            for i in 0..p {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    q
}

fn draw_coeffs(p: usize, uniform_weight: f64, rng: &mut ChaCha12Rng) -> Vec<f64> {
    (0..p)
        .map(|_| {
            if rng.gen::<f64>() < uniform_weight {
                rng.gen_range(-1.0..1.0)
            } else {
                0.0
            }
        })
        .collect()
}

fn ma_covariance(coeffs: &[f64], law: InnovationLaw) -> SymmetricMatrix {
    // stationary: cov(X_k, X_{k+e}) = Var(Z) * sum_l coeffs[l] coeffs[l-e]
    let p = coeffs.len();
    let var = law.variance();
    let by_lag: Vec<f64> = (0..p)
        .map(|e| var * (e..p).map(|l| coeffs[l] * coeffs[l - e]).sum::<f64>())
        .collect();
    SymmetricMatrix::from_fn(p, |k, l| by_lag[k.abs_diff(l)])
}

fn block_matrix(p: usize, block_size: usize, diag: &[f64], off: impl Fn(usize) -> f64) -> SymmetricMatrix {
    // off-diagonal value per block index t (0-based); coordinates beyond the
    // last full block stay uncorrelated
    let blocks = p / block_size;
    SymmetricMatrix::from_fn(p, |k, l| {
        if k == l {
            diag[k]
        } else if k / block_size == l / block_size && k / block_size < blocks {
            off(k / block_size)
        } else {
            0.0
        }
    })
}

/// Instantiate a model at dimension p. The `rng` streams drawn here are the
/// once-per-scenario quantities (diagonals, loadings, coefficients).
pub fn build_model(model: &CovModel, p: usize, rng: RngSpec) -> Result<PreparedModel> {
    if p < 2 {
        return Err(Error::invalid("model dimension must be >= 2"));
    }
    let mut gen = rng.rng();
    match model {
        CovModel::BandableAr { rho } => {
            let cov =
                SymmetricMatrix::from_fn(p, |k, l| rho.powi(k.abs_diff(l) as i32));
            finish_gaussian(cov, RowLaw::Normal)
        }
        CovModel::BlockDiag { block_size, value } => {
            let diag = unif_diag(p, 1.0, 2.0, &mut gen);
            let cov = block_matrix(p, *block_size, &diag, |_| *value);
            finish_gaussian(cov, RowLaw::Normal)
        }
        CovModel::LongRange { hurst } => {
            let diag = unif_diag(p, 1.0, 2.0, &mut gen);
            let h = *hurst;
            let cov = SymmetricMatrix::from_fn(p, |k, l| {
                if k == l {
                    diag[k]
                } else {
                    fgn_autocovariance(k.abs_diff(l), h)
                }
            });
            finish_gaussian(cov, RowLaw::Normal)
        }
        CovModel::ArTInnov { rho, df } => {
            let cov =
                SymmetricMatrix::from_fn(p, |k, l| rho.powi(k.abs_diff(l) as i32));
            finish_gaussian(cov, RowLaw::TScaled { df: *df })
        }
        CovModel::MovingAverage { uniform_weight, law } => {
            let coeffs = draw_coeffs(p, *uniform_weight, &mut gen);
            let covariance = ma_covariance(&coeffs, *law);
            Ok(PreparedModel {
                covariance,
                sampler: Sampler::MovingAverage { coeffs, law: *law },
                clipped: 0,
            })
        }
        CovModel::NonsparseStiefel { rank } => {
            let theta = unif_diag(p, 1.0, 6.0, &mut gen);
            let u = stiefel_uniform(p, *rank, &mut gen);
            let uut = &u * u.transpose();
            let cov = SymmetricMatrix::from_fn(p, |k, l| {
                let f = if k == l {
                    1.0
                } else if k.abs_diff(l) == 1 {
                    0.5
                } else {
                    0.0
                };
                (theta[k] * theta[l]).sqrt() * (f + uut[(k, l)])
            });
            finish_gaussian(cov, RowLaw::Normal)
        }
        CovModel::PerfectCorrBlocks { corr } => {
            let block = 10usize;
            let blocks = p / block;
            let mut idx: Vec<usize> = (0..blocks).collect();
            idx.shuffle(&mut gen);
            let perfect: std::collections::HashSet<usize> =
                idx.into_iter().take(p / 20).collect();
            let diag = vec![1.0; p];
            let c = *corr;
            let cov = block_matrix(p, block, &diag, |t| if perfect.contains(&t) { 1.0 } else { c });
            finish_gaussian(cov, RowLaw::StdGamma41)
        }
    }
}

fn finish_gaussian(cov: SymmetricMatrix, law: RowLaw) -> Result<PreparedModel> {
    let factor = psd_factorize(&cov, 0.0)?;
    let clipped = factor.clipped_count();
    Ok(PreparedModel { covariance: cov, sampler: Sampler::Factor { factor, law }, clipped })
}

/// Draw n iid rows from the prepared model, shifted by `mu`. Row i uses the
/// generator at counter i, so samples are reproducible per row and invariant
/// to threading.
pub fn generate_sample(
    model: &PreparedModel,
    mu: &[f64],
    n: usize,
    rng: RngSpec,
) -> Result<DataMatrix> {
    let p = model.covariance.dim();
    if n < 2 {
        return Err(Error::invalid("need n >= 2 observations"));
    }
    if mu.len() != p {
        return Err(Error::DimensionMismatch(format!(
            "mean vector length {} vs model dimension {p}",
            mu.len()
        )));
    }
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut gen = rng.rng_at(i as u64);
            match &model.sampler {
                Sampler::Factor { factor, law } => {
                    let z = nalgebra::DVector::from_fn(p, |_, _| {
                        match law {
                            RowLaw::Normal | RowLaw::TScaled { .. } => {
                                gen.sample::<f64, _>(StandardNormal)
                            }
                            RowLaw::StdGamma41 => InnovationLaw::Gamma41.sample(&mut gen) / 2.0,
                        }
                    });
                    let mut w = factor.transform(&z);
                    if let RowLaw::TScaled { df } = law {
                        let chi = ChiSquared::new(*df).unwrap().sample(&mut gen);
                        w *= (df / chi).sqrt();
                    }
                    (0..p).map(|k| w[k] + mu[k]).collect()
                }
                Sampler::MovingAverage { coeffs, law } => {
                    // each row consumes a fresh buffer of 2p-1 innovations
                    let z: Vec<f64> = (0..2 * p - 1).map(|_| law.sample(&mut gen)).collect();
                    (0..p)
                        .map(|k| {
                            let s: f64 =
                                coeffs.iter().enumerate().map(|(l, c)| c * z[k + l]).sum();
                            s + mu[k]
                        })
                        .collect()
                }
            }
        })
        .collect();
    DataMatrix::from_rows(&rows, None)
}

/// Alternative-signal description: floor(kappa * p^r) non-zero coordinates
/// of magnitude sqrt(2 beta sigma_ll log(p) / n) (one-sample) or
/// sqrt(2 beta sigma_ll log(p) (1/n + 1/m)) (two-sample).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalSpec {
    pub r: f64,
    pub kappa: usize,
    pub beta: f64,
    /// Explicit support; drawn uniformly without replacement when absent.
    pub support: Option<Vec<usize>>,
}

impl SignalSpec {
    pub fn sparse(beta: f64) -> Self {
        Self { r: 0.0, kappa: 8, beta, support: None }
    }

    pub fn support_size(&self, p: usize) -> usize {
        (self.kappa as f64 * (p as f64).powf(self.r)).floor() as usize
    }
}

/// Build the alternative mean vector by writing signal magnitudes onto the
/// (drawn or given) support.
pub fn inject_signal(
    mu_base: &[f64],
    signal: &SignalSpec,
    sigma_diag: &[f64],
    n: usize,
    m: Option<usize>,
    rng: RngSpec,
) -> Result<Vec<f64>> {
    let p = mu_base.len();
    if sigma_diag.len() != p {
        return Err(Error::DimensionMismatch("sigma_diag length mismatch".into()));
    }
    let size = signal.support_size(p);
    if size > p {
        return Err(Error::invalid(format!("signal support size {size} exceeds p = {p}")));
    }
    let support: Vec<usize> = match &signal.support {
        Some(s) => {
            if s.len() != size {
                return Err(Error::invalid(format!(
                    "explicit support has {} coordinates, spec implies {size}",
                    s.len()
                )));
            }
            s.clone()
        }
        None => {
            let mut idx: Vec<usize> = (0..p).collect();
            let mut gen = rng.rng();
            idx.shuffle(&mut gen);
            idx.truncate(size);
            idx
        }
    };
    let rate = match m {
        None => 1.0 / n as f64,
        Some(m) => 1.0 / n as f64 + 1.0 / m as f64,
    };
    let logp = (p as f64).ln();
    let mut mu = mu_base.to_vec();
    for &l in &support {
        if l >= p {
            return Err(Error::invalid(format!("support coordinate {l} out of range")));
        }
        mu[l] = (2.0 * signal.beta * sigma_diag[l] * logp * rate).sqrt();
    }
    Ok(mu)
}

/// One simulation scenario: a generator, an optional signal, and a replicate
/// budget. `model_y` (with `m`) switches to the two-sample problem.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimScenario {
    pub id: String,
    pub model: CovModel,
    #[serde(default)]
    pub model_y: Option<CovModel>,
    pub p: usize,
    pub n: usize,
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default)]
    pub signal: Option<SignalSpec>,
    pub alpha: f64,
    /// Level inside the screening cutoff for the _f variants. Defaults to 1,
    /// the level-free limiting threshold `(1 + 1/(2 log p)) sqrt(2 log p)`,
    /// which is the cutoff the benchmark size/power tables are consistent
    /// with.
    #[serde(default = "default_screening_alpha")]
    pub screening_alpha: f64,
    pub num_draws: usize,
    pub replicates: usize,
    pub seed: u64,
    /// Redraw the signal support each replicate (the default) or fix it once.
    #[serde(default)]
    pub fixed_support: bool,
}

fn default_screening_alpha() -> f64 {
    1.0
}

/// Per-variant rejection tally.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VariantRate {
    pub test: String,
    pub rejections: usize,
    pub replicates: usize,
    pub rate: f64,
    pub mc_se: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimReport {
    pub scenario_id: String,
    pub replicates: usize,
    pub rates: Vec<VariantRate>,
    pub notes: Vec<String>,
}

impl SimReport {
    pub fn rate(&self, test: &str) -> Option<f64> {
        self.rates.iter().find(|r| r.test == test).map(|r| r.rate)
    }
}

const VARIANT_NAMES: [&str; 4] = ["psi_ns", "psi_s", "psi_ns_f", "psi_s_f"];

fn variant_flags(i: usize) -> (bool, bool) {
    // (studentized, screened), in VARIANT_NAMES order
    [(false, false), (true, false), (false, true), (true, true)][i]
}

// scenario-level substream tags
const PREP_X: u64 = 0;
const PREP_Y: u64 = 1;
const FIXED_SUPPORT: u64 = 2;
const REPLICATE_BASE: u64 = 16;

// per-replicate substream tags
const REP_DATA_X: u64 = 0;
const REP_DATA_Y: u64 = 1;
const REP_SUPPORT: u64 = 2;
const REP_ENGINE: u64 = 3;

/// Run a scenario. Replicates are distributed across `threads` workers (the
/// global pool when None); the result is identical for any worker count.
pub fn run_scenario(scenario: &SimScenario, threads: Option<usize>) -> Result<SimReport> {
    match threads {
        None => run_scenario_inner(scenario),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
            pool.install(|| run_scenario_inner(scenario))
        }
    }
}

fn run_scenario_inner(scenario: &SimScenario) -> Result<SimReport> {
    if scenario.replicates == 0 {
        return Err(Error::invalid("need at least 1 replicate"));
    }
    let root = RngSpec::new(scenario.seed).substream_labeled(&scenario.id);
    let two_sample = scenario.m.is_some();
    if scenario.model_y.is_some() != two_sample {
        return Err(Error::invalid("model_y and m must be supplied together"));
    }

    let model_x = build_model(&scenario.model, scenario.p, root.substream(PREP_X))?;
    let model_y = scenario
        .model_y
        .as_ref()
        .map(|m| prepare_second_group(m, &scenario.model, scenario.p, &root))
        .transpose()?;

    // signal magnitudes use diag(Sigma_1) one-sample, diag of the pooled
    // population covariance two-sample
    let sigma_diag: Vec<f64> = match &model_y {
        None => model_x.sigma_diag(),
        Some(my) => {
            let (n, m) = (scenario.n as f64, scenario.m.unwrap() as f64);
            let total = n + m;
            model_x
                .sigma_diag()
                .iter()
                .zip(my.sigma_diag())
                .map(|(a, b)| (m / total) * a + (n / total) * b)
                .collect()
        }
    };

    let fixed_mu: Option<Vec<f64>> = match (&scenario.signal, scenario.fixed_support) {
        (Some(sig), true) => Some(inject_signal(
            &vec![0.0; scenario.p],
            sig,
            &sigma_diag,
            scenario.n,
            scenario.m,
            root.substream(FIXED_SUPPORT),
        )?),
        _ => None,
    };

    let per_rep: Vec<Result<[bool; 4]>> = (0..scenario.replicates)
        .into_par_iter()
        .map(|rep| {
            let rep_rng = root.substream(REPLICATE_BASE + rep as u64);
            let mu: Vec<f64> = match (&scenario.signal, &fixed_mu) {
                (None, _) => vec![0.0; scenario.p],
                (_, Some(mu)) => mu.clone(),
                (Some(sig), None) => inject_signal(
                    &vec![0.0; scenario.p],
                    sig,
                    &sigma_diag,
                    scenario.n,
                    scenario.m,
                    rep_rng.substream(REP_SUPPORT),
                )?,
            };
            let data_x =
                generate_sample(&model_x, &mu, scenario.n, rep_rng.substream(REP_DATA_X))?;
            let results: VariantResults = match &model_y {
                None => run_one_sample_variants(
                    &data_x,
                    scenario.alpha,
                    scenario.screening_alpha,
                    scenario.num_draws,
                    rep_rng.substream(REP_ENGINE),
                )?,
                Some(my) => {
                    let zero = vec![0.0; scenario.p];
                    let data_y = generate_sample(
                        my,
                        &zero,
                        scenario.m.unwrap(),
                        rep_rng.substream(REP_DATA_Y),
                    )?;
                    run_two_sample_variants(
                        &data_x,
                        &data_y,
                        scenario.alpha,
                        scenario.screening_alpha,
                        scenario.num_draws,
                        rep_rng.substream(REP_ENGINE),
                    )?
                }
            };
            let mut flags = [false; 4];
            for (i, f) in flags.iter_mut().enumerate() {
                let (studentized, screened) = variant_flags(i);
                *f = results.get(studentized, screened).reject;
            }
            Ok(flags)
        })
        .collect();

    let mut counts = [0usize; 4];
    for rep in per_rep {
        let flags = rep?;
        for (c, f) in counts.iter_mut().zip(flags) {
            *c += usize::from(f);
        }
    }

    let r = scenario.replicates;
    let rates = VARIANT_NAMES
        .iter()
        .zip(counts)
        .map(|(name, c)| {
            let rate = c as f64 / r as f64;
            VariantRate {
                test: (*name).to_string(),
                rejections: c,
                replicates: r,
                rate,
                mc_se: (rate * (1.0 - rate) / r as f64).sqrt(),
            }
        })
        .collect();

    let mut notes = Vec::new();
    if model_x.clipped_count() > 0 {
        notes.push(format!(
            "group 1 model covariance: {} eigenvalues clamped",
            model_x.clipped_count()
        ));
    }
    if let Some(my) = &model_y {
        if my.clipped_count() > 0 {
            notes.push(format!(
                "group 2 model covariance: {} eigenvalues clamped",
                my.clipped_count()
            ));
        }
    }
    Ok(SimReport { scenario_id: scenario.id.clone(), replicates: r, rates, notes })
}

/// Prepare the second group's model. Structures the benchmark designs share
/// between groups (the Stiefel scale diagonal, the perfectly-correlated
/// block set) reuse the first group's stream; everything else is drawn
/// independently.
fn prepare_second_group(
    model_y: &CovModel,
    model_x: &CovModel,
    p: usize,
    root: &RngSpec,
) -> Result<PreparedModel> {
    let shares_structure = matches!(
        (model_x, model_y),
        (CovModel::PerfectCorrBlocks { .. }, CovModel::PerfectCorrBlocks { .. })
    );
    if shares_structure {
        // same block set, possibly different correlation value
        build_model(model_y, p, root.substream(PREP_X))
    } else if let (
        CovModel::NonsparseStiefel { .. },
        CovModel::NonsparseStiefel { rank },
    ) = (model_x, model_y)
    {
        build_stiefel_shared_theta(p, *rank, root)
    } else {
        build_model(model_y, p, root.substream(PREP_Y))
    }
}

fn build_stiefel_shared_theta(p: usize, rank: usize, root: &RngSpec) -> Result<PreparedModel> {
    // group 2 reuses group 1's Theta diagonal but draws its own U
    let mut gen_x = root.substream(PREP_X).rng();
    let theta = unif_diag(p, 1.0, 6.0, &mut gen_x);
    let mut gen_y = root.substream(PREP_Y).rng();
    let u = stiefel_uniform(p, rank, &mut gen_y);
    let uut = &u * u.transpose();
    let cov = SymmetricMatrix::from_fn(p, |k, l| {
        let f = if k == l {
            1.0
        } else if k.abs_diff(l) == 1 {
            0.5
        } else {
            0.0
        };
        (theta[k] * theta[l]).sqrt() * (f + uut[(k, l)])
    });
    finish_gaussian(cov, RowLaw::Normal)
}
