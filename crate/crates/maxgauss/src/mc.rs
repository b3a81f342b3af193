//! Monte Carlo calibration engine: simulate max-norms of Gaussian vectors
//! drawn from a factored covariance, then read off order-statistic quantiles
//! and empirical p-values.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::PsdFactor;
use crate::rng::RngSpec;

/// Number of simulated draws below which results are considered too noisy.
pub const MIN_DRAWS: usize = 100;

/// Default number of Monte Carlo draws for single tests.
pub const DEFAULT_DRAWS: usize = 1500;

/// Default number of draws in batch (gene-set) mode, where p-values feed a
/// multiplicity correction and need finer resolution.
pub const DEFAULT_BATCH_DRAWS: usize = 50_000;

/// Sorted simulated max-norm draws plus the empirical quantile/CDF readers.
#[derive(Debug, Clone)]
pub struct MonteCarloQuantileEstimate {
    draws: Vec<f64>,
    mask_size: usize,
}

impl MonteCarloQuantileEstimate {
    fn from_unsorted(mut draws: Vec<f64>, mask_size: usize) -> Result<Self> {
        if draws.len() < MIN_DRAWS {
            return Err(Error::invalid(format!(
                "need at least {MIN_DRAWS} Monte Carlo draws, got {}",
                draws.len()
            )));
        }
        draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(Self { draws, mask_size })
    }

    /// Build from already-computed max-norm values (test seam).
    pub fn from_draws(draws: Vec<f64>, mask_size: usize) -> Result<Self> {
        Self::from_unsorted(draws, mask_size)
    }

    pub fn num_draws(&self) -> usize {
        self.draws.len()
    }

    pub fn mask_size(&self) -> usize {
        self.mask_size
    }

    /// Sorted draws, ascending.
    pub fn draws(&self) -> &[f64] {
        &self.draws
    }

    /// Empirical (1 - alpha)-quantile: the ceil(M * (1 - alpha))-th order
    /// statistic (1-indexed), i.e. inf{t : F_M(t) >= 1 - alpha} for the step
    /// CDF.
    pub fn quantile(&self, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::invalid(format!("alpha must be in (0,1), got {alpha}")));
        }
        let m = self.draws.len();
        let rank = (m as f64 * (1.0 - alpha)).ceil() as usize;
        let rank = rank.clamp(1, m);
        Ok(self.draws[rank - 1])
    }

    /// Fraction of draws strictly greater than the observed statistic.
    pub fn empirical_pvalue(&self, t_obs: f64) -> f64 {
        // draws are sorted, so count by binary search on the upper bound
        let idx = self.draws.partition_point(|&d| d <= t_obs);
        (self.draws.len() - idx) as f64 / self.draws.len() as f64
    }
}

fn max_over(w: &DVector<f64>, mask: Option<&[usize]>) -> f64 {
    match mask {
        None => w.iter().fold(0.0f64, |acc, v| acc.max(v.abs())),
        Some(idx) => idx.iter().fold(0.0f64, |acc, &k| acc.max(w[k].abs())),
    }
}

/// Draw M max-norms |L z|_inf over the included coordinates.
///
/// Draw ell uses the generator at counter ell of `rng`, so the result is
/// bitwise identical regardless of how draws are split across threads.
pub fn draw_max_norms(
    factor: &PsdFactor,
    num_draws: usize,
    mask: Option<&[usize]>,
    rng: RngSpec,
) -> Result<MonteCarloQuantileEstimate> {
    let sets = draw_max_norms_multi(factor, num_draws, &[mask], rng)?;
    Ok(sets.into_iter().next().unwrap())
}

/// Like `draw_max_norms`, but evaluates several coordinate masks over one
/// shared set of Gaussian draws. This is what makes screened and unscreened
/// critical values exactly comparable within a run.
pub fn draw_max_norms_multi(
    factor: &PsdFactor,
    num_draws: usize,
    masks: &[Option<&[usize]>],
    rng: RngSpec,
) -> Result<Vec<MonteCarloQuantileEstimate>> {
    let p = factor.dim();
    if num_draws < 1 {
        return Err(Error::invalid("number of draws must be >= 1"));
    }
    for mask in masks {
        if let Some(idx) = mask {
            if idx.is_empty() {
                return Err(Error::invalid("empty coordinate mask"));
            }
            if let Some(&bad) = idx.iter().find(|&&k| k >= p) {
                return Err(Error::invalid(format!("mask coordinate {bad} out of range")));
            }
        }
    }

    let per_draw: Vec<Vec<f64>> = (0..num_draws)
        .into_par_iter()
        .map(|ell| {
            let mut gen = rng.rng_at(ell as u64);
            let z = DVector::from_fn(p, |_, _| gen.sample::<f64, _>(StandardNormal));
            let w = factor.transform(&z);
            masks.iter().map(|mask| max_over(&w, *mask)).collect()
        })
        .collect();

    masks
        .iter()
        .enumerate()
        .map(|(mi, mask)| {
            let draws: Vec<f64> = per_draw.iter().map(|row| row[mi]).collect();
            let size = mask.map_or(p, |m| m.len());
            MonteCarloQuantileEstimate::from_unsorted(draws, size)
        })
        .collect()
}
