//! Marginal t-statistic screening: build the excluded-coordinate set from the
//! explicit closed-form threshold, plus the theoretical signal-scale
//! diagnostic.
//!
//! All logarithms are natural.

use crate::error::{Error, Result};
use crate::stats::MarginalStats;

/// Outcome of the screening pass. Coordinates with |t| at or below the
/// threshold are excluded; the boundary case is excluded.
#[derive(Debug, Clone)]
pub struct ScreenResult {
    excluded: Vec<usize>,
    retained: Vec<usize>,
    threshold: f64,
}

impl ScreenResult {
    /// Excluded coordinates, sorted ascending.
    pub fn excluded(&self) -> &[usize] {
        &self.excluded
    }

    /// Retained coordinates (the test mask), sorted ascending.
    pub fn retained(&self) -> &[usize] {
        &self.retained
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn retained_count(&self) -> usize {
        self.retained.len()
    }

    /// True when every coordinate was screened out; the two-step test then
    /// accepts by definition.
    pub fn all_excluded(&self) -> bool {
        self.retained.is_empty()
    }
}

fn check_args(p: usize, alpha: f64) -> Result<()> {
    if p < 2 {
        return Err(Error::invalid(format!("screening threshold needs p >= 2, got {p}")));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::invalid(format!("alpha must be in (0,1], got {alpha}")));
    }
    Ok(())
}

/// The screening cutoff
/// `[sqrt(2) + sqrt(2)/(2 log p) + sqrt(2 log(1/alpha) / log p)] * sqrt(log p)`.
///
/// `alpha = 1` is accepted and gives the limiting threshold
/// `(1 + 1/(2 log p)) sqrt(2 log p)` with the level term dropped. Empirical
/// size and power of the two-step tests in simulation studies are consistent
/// with this limiting cutoff; the level-dependent one is so large that the
/// screening step would retain nothing under sparse alternatives of the
/// usual `sqrt(2 beta log(p) / n)` magnitude.
pub fn screening_threshold(p: usize, alpha: f64) -> Result<f64> {
    check_args(p, alpha)?;
    let lp = (p as f64).ln();
    let bracket = 2.0f64.sqrt() + 2.0f64.sqrt() / (2.0 * lp) + (2.0 * (1.0 / alpha).ln() / lp).sqrt();
    Ok(bracket * lp.sqrt())
}

/// Theoretical detectable signal-to-noise scale
/// `lambda(p, alpha) = sqrt(2 log p) + sqrt(2 log(1/alpha))`.
pub fn lambda_threshold(p: usize, alpha: f64) -> Result<f64> {
    check_args(p, alpha)?;
    let lp = (p as f64).ln();
    Ok((2.0 * lp).sqrt() + (2.0 * (1.0 / alpha).ln()).sqrt())
}

/// Partition coordinates by |t| against `screening_threshold(p, alpha)`.
pub fn screen(stats: &MarginalStats, alpha: f64) -> Result<ScreenResult> {
    let p = stats.dim();
    let threshold = screening_threshold(p, alpha)?;
    let t = stats.t_stats()?;
    let mut excluded = Vec::new();
    let mut retained = Vec::new();
    for (k, &tk) in t.iter().enumerate() {
        if tk.abs() <= threshold {
            excluded.push(k);
        } else {
            retained.push(k);
        }
    }
    Ok(ScreenResult { excluded, retained, threshold })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::DataMatrix;
    use crate::stats::one_sample_stats;
    use approx::assert_abs_diff_eq;

    #[test]
    fn threshold_p100_alpha005() {
        let got = screening_threshold(100, 0.05).unwrap();
        assert_abs_diff_eq!(got, 5.81211, epsilon = 1e-4);
    }

    #[test]
    fn threshold_alpha_to_one_limit() {
        let p = 50;
        let lp = (p as f64).ln();
        let limit = (1.0 + 1.0 / (2.0 * lp)) * (2.0 * lp).sqrt();
        let got = screening_threshold(p, 1.0 - 1e-9).unwrap();
        assert_abs_diff_eq!(got, limit, epsilon = 1e-4);
        // alpha = 1 hits the limit exactly
        assert_abs_diff_eq!(screening_threshold(p, 1.0).unwrap(), limit, epsilon = 1e-14);
    }

    #[test]
    fn threshold_two_forms_agree() {
        // bracketed form vs (1 + 1/(2 log p)) sqrt(2 log p) + sqrt(2 log(1/a))
        for p in [2usize, 5, 30, 100, 1000, 5000] {
            for alpha in [0.01f64, 0.05, 0.2, 0.5, 0.9] {
                let lp = (p as f64).ln();
                let alt = (1.0 + 1.0 / (2.0 * lp)) * (2.0 * lp).sqrt()
                    + (2.0 * (1.0 / alpha).ln()).sqrt();
                let got = screening_threshold(p, alpha).unwrap();
                assert_abs_diff_eq!(got, alt, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn threshold_rejects_small_p() {
        assert!(screening_threshold(1, 0.05).is_err());
    }

    #[test]
    fn lambda_p100_alpha005() {
        let got = lambda_threshold(100, 0.05).unwrap();
        let expect = (2.0 * 100.0f64.ln()).sqrt() + (2.0 * 20.0f64.ln()).sqrt();
        assert_abs_diff_eq!(got, expect, epsilon = 1e-12);
        assert_abs_diff_eq!(got, 5.48260, epsilon = 1e-4);
    }

    #[test]
    fn lambda_exact_logs() {
        // alpha = 1/e, p = e^2 (not an integer, so check the formula directly
        // at the nearest representable configuration via raw logs)
        let lp = 2.0f64;
        let got = (2.0 * lp).sqrt() + (2.0f64).sqrt();
        assert_abs_diff_eq!(got, 2.0 + 2.0f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn lambda_monotone_grid() {
        let ps = [2usize, 10, 100, 1000];
        let alphas = [0.01, 0.05, 0.1, 0.5];
        for w in ps.windows(2) {
            for &a in &alphas {
                assert!(lambda_threshold(w[1], a).unwrap() > lambda_threshold(w[0], a).unwrap());
            }
        }
        for &p in &ps {
            for w in alphas.windows(2) {
                assert!(lambda_threshold(p, w[0]).unwrap() > lambda_threshold(p, w[1]).unwrap());
            }
        }
    }

    #[test]
    fn screening_dominates_lambda() {
        for p in [2usize, 10, 100, 1000, 5000] {
            for alpha in [0.001, 0.05, 0.5, 0.99] {
                assert!(
                    screening_threshold(p, alpha).unwrap() > lambda_threshold(p, alpha).unwrap()
                );
            }
        }
    }

    fn stats_from_values(values: &[f64]) -> MarginalStats {
        // two rows +v/-v give mean 0... instead build rows so that the
        // t-statistic equals the requested value: use n = 4 rows with
        // mean v and sd 1 scaled appropriately.
        // t = sqrt(n) * mean / sd; choose mean = v/2, sd = 1 via
        // rows {m-1, m+1, m-1, m+1}.
        let rows: Vec<Vec<f64>> = (0..4)
            .map(|i| {
                values
                    .iter()
                    .map(|&v| v / 2.0 + if i % 2 == 0 { -1.0 } else { 1.0 })
                    .collect()
            })
            .collect();
        one_sample_stats(&DataMatrix::from_rows(&rows, None).unwrap(), None).unwrap()
    }

    #[test]
    fn all_zero_t_excludes_everything() {
        let s = stats_from_values(&[0.0; 6]);
        let res = screen(&s, 0.05).unwrap();
        assert!(res.all_excluded());
        assert_eq!(res.excluded().len(), 6);
    }

    #[test]
    fn single_survivor() {
        let p = 5;
        let thr = screening_threshold(p, 0.05).unwrap();
        let mut vals = vec![0.0; p];
        vals[2] = thr + 1.0;
        let s = stats_from_values(&vals);
        let res = screen(&s, 0.05).unwrap();
        assert_eq!(res.retained(), &[2]);
        assert_eq!(res.retained_count(), 1);
    }

    #[test]
    fn matches_brute_force_filter() {
        use rand::prelude::*;
        use rand_chacha::ChaCha12Rng;
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        for _ in 0..50 {
            let p = rng.gen_range(2..20);
            let vals: Vec<f64> = (0..p).map(|_| rng.gen::<f64>() * 16.0 - 8.0).collect();
            let s = stats_from_values(&vals);
            let res = screen(&s, 0.05).unwrap();
            let thr = res.threshold();
            let t = s.t_stats().unwrap();
            let expect: Vec<usize> =
                (0..p).filter(|&k| t[k].abs() <= thr).collect();
            assert_eq!(res.excluded(), expect.as_slice());
        }
    }

    #[test]
    fn monotone_in_alpha() {
        let s = stats_from_values(&[1.0, 3.0, 5.0, 7.0, 9.0]);
        let tight = screen(&s, 0.01).unwrap();
        let loose = screen(&s, 0.2).unwrap();
        assert!(tight.threshold() >= loose.threshold());
        for k in loose.excluded() {
            assert!(tight.excluded().contains(k));
        }
    }
}
