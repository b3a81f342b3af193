//! Two-sample test of H0: mu1 = mu2 with unequal group sizes and unequal
//! per-group covariances.

use maxgauss::{run_two_sample, DataMatrix, RngSpec, TestFamily, TestSpec};
use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

fn gaussian(n: usize, p: usize, scale: f64, shift: f64, seed: u64) -> maxgauss::Result<DataMatrix> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            (0..p)
                .map(|j| {
                    let z: f64 = rng.sample(StandardNormal);
                    z * scale + if j < 3 { shift } else { 0.0 }
                })
                .collect()
        })
        .collect();
    DataMatrix::from_rows(&rows, None)
}

fn main() -> maxgauss::Result<()> {
    let p = 50;
    let x = gaussian(45, p, 1.0, 0.0, 1)?;
    let y = gaussian(70, p, 1.4, 0.8, 2)?; // shifted on the first 3 coordinates

    let mut spec = TestSpec::new(TestFamily::TwoSample, true, false, RngSpec::new(5));
    spec.num_draws = 4000;
    let result = run_two_sample(&x, &y, &spec)?;
    println!(
        "statistic {:.4}, critical value {:.4}, p = {:.4}, reject = {}",
        result.statistic,
        result.critical_value.unwrap(),
        result.p_value,
        result.reject
    );
    Ok(())
}
