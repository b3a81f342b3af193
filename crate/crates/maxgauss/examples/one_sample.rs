//! One-sample test of H0: mu = mu0 on synthetic Gaussian data with a small
//! mean shift on the first coordinate.

use maxgauss::{run_one_sample, DataMatrix, RngSpec, TestFamily, TestSpec};
use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

fn main() -> maxgauss::Result<()> {
    let (n, p) = (60, 40);
    let mut rng = ChaCha12Rng::seed_from_u64(11);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            (0..p)
                .map(|j| {
                    let noise: f64 = rng.sample(StandardNormal);
                    if j == 0 {
                        noise + 0.6
                    } else {
                        noise
                    }
                })
                .collect()
        })
        .collect();
    let data = DataMatrix::from_rows(&rows, None)?;

    for studentized in [false, true] {
        let spec = TestSpec::new(TestFamily::OneSample, studentized, false, RngSpec::new(7));
        let result = run_one_sample(&data, &spec)?;
        println!(
            "studentized={studentized}: statistic {:.4}, critical value {:.4}, p = {:.4}, reject = {}",
            result.statistic,
            result.critical_value.unwrap(),
            result.p_value,
            result.reject
        );
    }
    Ok(())
}
