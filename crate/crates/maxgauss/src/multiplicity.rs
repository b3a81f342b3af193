//! Multiple-testing adjustment for batch runs: Benjamini-Hochberg step-up
//! FDR control and the Bonferroni family-wise bound.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Benjamini-Hochberg outcome over a vector of p-values.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BatchDecision {
    pub p_values: Vec<f64>,
    pub q: f64,
    pub rejected: Vec<bool>,
    /// k* in the step-up rule, 0 when nothing is rejected.
    pub bh_cutoff_index: usize,
}

fn check_pvalues(p_values: &[f64]) -> Result<()> {
    if p_values.is_empty() {
        return Err(Error::invalid("empty p-value vector"));
    }
    if let Some(bad) = p_values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::invalid(format!("p-value {bad} outside [0,1]")));
    }
    Ok(())
}

/// Step-up BH: reject every hypothesis with p <= p_(k*) where
/// k* = max{i : p_(i) <= i q / G}. Ties at the cutoff are all rejected.
pub fn benjamini_hochberg(p_values: &[f64], q: f64) -> Result<BatchDecision> {
    check_pvalues(p_values)?;
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::invalid(format!("FDR level must be in (0,1), got {q}")));
    }
    let g = p_values.len();
    let mut sorted: Vec<f64> = p_values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut cutoff_index = 0usize;
    for (i, &p) in sorted.iter().enumerate() {
        let rank = i + 1;
        if p <= rank as f64 * q / g as f64 {
            cutoff_index = rank;
        }
    }
    let rejected = if cutoff_index == 0 {
        vec![false; g]
    } else {
        let threshold = sorted[cutoff_index - 1];
        p_values.iter().map(|&p| p <= threshold).collect()
    };
    Ok(BatchDecision { p_values: p_values.to_vec(), q, rejected, bh_cutoff_index: cutoff_index })
}

/// Bonferroni: reject where p <= alpha / G.
pub fn bonferroni(p_values: &[f64], alpha: f64) -> Result<Vec<bool>> {
    check_pvalues(p_values)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("alpha must be in (0,1), got {alpha}")));
    }
    let cutoff = alpha / p_values.len() as f64;
    Ok(p_values.iter().map(|&p| p <= cutoff).collect())
}
