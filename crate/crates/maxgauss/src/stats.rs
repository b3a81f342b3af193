//! Observed max-type statistics and the marginal t-statistics feeding the
//! screening step.

use crate::error::{Error, Result};
use crate::matrix::{sample_mean, sample_variances, DataMatrix};

/// Per-coordinate summaries of one run: mean differences, scale estimates,
/// and studentized t-statistics.
///
/// The non-studentized coordinate statistic is `ns_factor * means[k]`; the
/// studentized one is `ns_factor * means[k] / sds[k]`. Studentized reads fail
/// when any coordinate has a degenerate (zero) scale; non-studentized
/// consumers may still use the means.
#[derive(Debug, Clone)]
pub struct MarginalStats {
    means: Vec<f64>,
    sds: Vec<f64>,
    ns_factor: f64,
    degenerate: Option<usize>,
}

impl MarginalStats {
    pub fn dim(&self) -> usize {
        self.means.len()
    }

    /// Mean differences (X-bar - mu0, or X-bar - Y-bar).
    pub fn means(&self) -> &[f64] {
        &self.means
    }

    /// Per-coordinate scale estimates (sigma-hat for one sample, the pooled
    /// scale for two samples).
    pub fn sds(&self) -> &[f64] {
        &self.sds
    }

    /// The common scaling of the non-studentized statistic: sqrt(n) for one
    /// sample, sqrt(nm/N) for two samples.
    pub fn ns_factor(&self) -> f64 {
        self.ns_factor
    }

    /// Non-studentized coordinate statistics.
    pub fn scaled_means(&self) -> Vec<f64> {
        self.means.iter().map(|m| self.ns_factor * m).collect()
    }

    /// Studentized coordinate statistics; errors if any scale is zero.
    pub fn t_stats(&self) -> Result<Vec<f64>> {
        if let Some(index) = self.degenerate {
            return Err(Error::DegenerateVariance {
                index,
                message: "zero sample variance on the studentized path".into(),
            });
        }
        Ok(self
            .means
            .iter()
            .zip(&self.sds)
            .map(|(m, s)| self.ns_factor * m / s)
            .collect())
    }
}

/// One-sample marginal statistics for H0: mu = mu0.
///
/// The shift by mu0 is applied to the means; downstream covariance estimation
/// is shift-invariant, so this matches shifting the data itself.
pub fn one_sample_stats(data: &DataMatrix, mu0: Option<&[f64]>) -> Result<MarginalStats> {
    let n = data.n_obs();
    if n < 2 {
        return Err(Error::invalid("one-sample statistics need n >= 2"));
    }
    let p = data.n_features();
    if let Some(m) = mu0 {
        if m.len() != p {
            return Err(Error::DimensionMismatch(format!(
                "mu0 has length {}, data has {p} columns",
                m.len()
            )));
        }
    }
    let mut means = sample_mean(data);
    if let Some(m) = mu0 {
        for (v, m0) in means.iter_mut().zip(m) {
            *v -= m0;
        }
    }
    let sds: Vec<f64> = sample_variances(data).into_iter().map(f64::sqrt).collect();
    let degenerate = sds.iter().position(|&s| s <= 0.0);
    Ok(MarginalStats { means, sds, ns_factor: (n as f64).sqrt(), degenerate })
}

/// Two-sample marginal statistics for H0: mu1 = mu2.
///
/// The studentized denominator per coordinate is arranged so that
/// `t_stats[k] = sqrt(nm / (m s1k^2 + n s2k^2)) * (X-bar_k - Y-bar_k)`.
pub fn two_sample_stats(data_x: &DataMatrix, data_y: &DataMatrix) -> Result<MarginalStats> {
    let (n, m) = (data_x.n_obs(), data_y.n_obs());
    if n < 2 || m < 2 {
        return Err(Error::invalid("two-sample statistics need n >= 2 and m >= 2"));
    }
    if data_x.n_features() != data_y.n_features() {
        return Err(Error::DimensionMismatch(format!(
            "column counts differ: {} vs {}",
            data_x.n_features(),
            data_y.n_features()
        )));
    }
    let total = (n + m) as f64;
    let (nf, mf) = (n as f64, m as f64);
    let ns_factor = (nf * mf / total).sqrt();
    let means: Vec<f64> = sample_mean(data_x)
        .into_iter()
        .zip(sample_mean(data_y))
        .map(|(x, y)| x - y)
        .collect();
    // sds[k] = sqrt((m s1k^2 + n s2k^2) / N), so ns_factor * mean / sd
    // recovers sqrt(nm) * mean / sqrt(m s1k^2 + n s2k^2)
    let sds: Vec<f64> = sample_variances(data_x)
        .into_iter()
        .zip(sample_variances(data_y))
        .map(|(v1, v2)| ((mf * v1 + nf * v2) / total).sqrt())
        .collect();
    let degenerate = sds.iter().position(|&s| s <= 0.0);
    Ok(MarginalStats { means, sds, ns_factor, degenerate })
}

/// Max over included coordinates of the absolute (possibly studentized)
/// coordinate statistic. The caller handles the fully-screened case; an
/// empty mask is an error here.
pub fn max_statistic(
    stats: &MarginalStats,
    studentized: bool,
    mask: Option<&[usize]>,
) -> Result<f64> {
    let values = if studentized { stats.t_stats()? } else { stats.scaled_means() };
    let max_abs = |idx: &mut dyn Iterator<Item = usize>| -> Result<f64> {
        idx.map(|k| {
            values
                .get(k)
                .copied()
                .ok_or_else(|| Error::invalid(format!("mask coordinate {k} out of range")))
        })
        .try_fold(0.0f64, |acc, v| Ok(acc.max(v?.abs())))
    };
    match mask {
        None => max_abs(&mut (0..values.len())),
        Some(idx) if idx.is_empty() => Err(Error::invalid("empty coordinate mask")),
        Some(idx) => max_abs(&mut idx.iter().copied()),
    }
}
