//! Batch mode: test many (possibly overlapping) feature sets at once and
//! control the false discovery rate across them with Benjamini-Hochberg.

use maxgauss::engine::{TestFamily, TestSpec};
use maxgauss::io::{emit_batch, run_batch, GeneSetDef, OutputFormat};
use maxgauss::{DataMatrix, RngSpec};
use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

fn main() -> maxgauss::Result<()> {
    let p = 120;
    let names: Vec<String> = (0..p).map(|j| format!("g{j}")).collect();
    let mut rng = ChaCha12Rng::seed_from_u64(21);
    let mut draw = |n: usize, shift_lo: usize, shift_hi: usize, delta: f64| {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                (0..p)
                    .map(|j| {
                        let z: f64 = rng.sample(StandardNormal);
                        z + if (shift_lo..shift_hi).contains(&j) { delta } else { 0.0 }
                    })
                    .collect()
            })
            .collect();
        DataMatrix::from_rows(&rows, Some(names.clone()))
    };
    let x = draw(50, 0, 0, 0.0)?;
    // the second group is shifted on features 0..25 only
    let y = draw(50, 0, 25, 0.7)?;

    let set = |id: &str, range: std::ops::Range<usize>| GeneSetDef {
        set_id: id.into(),
        feature_names: range.map(|j| format!("g{j}")).collect(),
    };
    let sets = vec![
        set("shifted", 0..25),
        set("mixed", 15..60),
        set("null", 60..110),
        set("too-small", 0..5),
    ];

    let mut spec = TestSpec::new(TestFamily::TwoSample, true, false, RngSpec::new(33));
    spec.num_draws = 5000;
    let report = run_batch(&x, &y, &sets, &spec, 0.015, 19)?;
    emit_batch(&report, OutputFormat::Csv, &mut std::io::stdout().lock())
}
