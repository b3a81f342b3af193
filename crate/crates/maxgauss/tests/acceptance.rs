//! End-to-end acceptance suite. Each test prints one pass/fail line for its
//! criterion; run with `--nocapture` to see them all.

use maxgauss::engine::{run_one_sample, TestFamily, TestSpec};
use maxgauss::matrix::{
    pooled_covariance, psd_factorize, sample_covariance, DataMatrix, SymmetricMatrix,
};
use maxgauss::mc::{draw_max_norms, MonteCarloQuantileEstimate};
use maxgauss::multiplicity::benjamini_hochberg;
use maxgauss::rng::RngSpec;
use maxgauss::screening::{screen, screening_threshold};
use maxgauss::sim::{run_scenario, CovModel, SignalSpec, SimScenario};
use maxgauss::stats::{max_statistic, one_sample_stats};

use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

fn report(criterion: &str, pass: bool, detail: &str) {
    println!("criterion {criterion}: {} — {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {criterion} failed: {detail}");
}

fn scenario(id: &str, model: CovModel, p: usize, n: usize, replicates: usize) -> SimScenario {
    SimScenario {
        id: id.into(),
        model,
        model_y: None,
        p,
        n,
        m: None,
        signal: None,
        alpha: 0.05,
        screening_alpha: 1.0,
        num_draws: 1500,
        replicates,
        seed: 20_240_501,
        fixed_support: false,
    }
}

#[test]
fn criterion_01_one_sample_size_bandable() {
    let sc = scenario("c1", CovModel::BandableAr { rho: 0.4 }, 120, 40, 1000);
    let rep = run_scenario(&sc, None).unwrap();
    let size = rep.rate("psi_ns").unwrap();
    report(
        "1 (one-sample size, bandable)",
        (0.017..=0.065).contains(&size),
        &format!("psi_ns empirical size {size:.4}, target [0.017, 0.065]"),
    );
}

#[test]
fn criterion_02_two_sample_size_block_diag() {
    let mut sc =
        scenario("c2", CovModel::BlockDiag { block_size: 10, value: 0.7 }, 120, 40, 1000);
    sc.model_y = Some(CovModel::BlockDiag { block_size: 10, value: 0.7 });
    sc.m = Some(40);
    let rep = run_scenario(&sc, None).unwrap();
    let size = rep.rate("psi_ns").unwrap();
    report(
        "2 (two-sample size, block diagonal)",
        (0.019..=0.067).contains(&size),
        &format!("psi_ns empirical size {size:.4}, target [0.019, 0.067]"),
    );
}

#[test]
fn criterion_03_studentized_small_sample_inflation() {
    let r = 1500usize;
    let small = run_scenario(&scenario("c3a", CovModel::BandableAr { rho: 0.4 }, 120, 40, r), None)
        .unwrap();
    let large = run_scenario(&scenario("c3b", CovModel::BandableAr { rho: 0.4 }, 120, 80, r), None)
        .unwrap();
    let (s40, s80) = (small.rate("psi_s").unwrap(), large.rate("psi_s").unwrap());
    let se = ((s40 * (1.0 - s40) + s80 * (1.0 - s80)) / r as f64).sqrt();
    report(
        "3 (studentized size inflation direction)",
        s40 > s80 && (s40 - s80) >= 2.0 * se,
        &format!("size(n=40) {s40:.4} vs size(n=80) {s80:.4}, diff {:.4}, 2 MC s.e. {:.4}",
            s40 - s80, 2.0 * se),
    );
}

#[test]
fn criterion_04_screening_power_dominance() {
    let mut sc =
        scenario("c4", CovModel::BlockDiag { block_size: 10, value: 0.7 }, 360, 80, 500);
    sc.signal = Some(SignalSpec { r: 0.0, kappa: 8, beta: 0.4, support: None });
    let rep = run_scenario(&sc, None).unwrap();
    let (plain, screened) = (rep.rate("psi_ns").unwrap(), rep.rate("psi_ns_f").unwrap());
    report(
        "4 (screening power dominance)",
        screened >= plain + 0.05,
        &format!("power psi_ns_f {screened:.4} vs psi_ns {plain:.4}"),
    );
}

#[test]
fn criterion_05_univariate_oracle() {
    let (n, reps, draws) = (100usize, 2000usize, 5000usize);
    let mut rejections = 0usize;
    let mut cv_sum = 0.0f64;
    for rep in 0..reps {
        let mut gen = RngSpec::new(99).substream(rep as u64).rng();
        let rows: Vec<Vec<f64>> =
            (0..n).map(|_| vec![gen.sample::<f64, _>(StandardNormal)]).collect();
        let data = DataMatrix::from_rows(&rows, None).unwrap();
        let mut spec = TestSpec::new(
            TestFamily::OneSample,
            true,
            false,
            RngSpec::new(7).substream(rep as u64),
        );
        spec.num_draws = draws;
        let res = run_one_sample(&data, &spec).unwrap();
        rejections += usize::from(res.reject);
        cv_sum += res.critical_value.unwrap();
    }
    let rate = rejections as f64 / reps as f64;
    let cv_mean = cv_sum / reps as f64;
    report(
        "5 (univariate oracle)",
        (0.035..=0.065).contains(&rate) && (cv_mean - 1.96).abs() <= 0.05,
        &format!("rejection rate {rate:.4} (target 0.05 ± 0.015), mean critical value {cv_mean:.4} (target 1.96 ± 0.05)"),
    );
}

#[test]
fn criterion_06_quantile_order_statistic_identity() {
    let mut gen = ChaCha12Rng::seed_from_u64(600);
    let mut checked = 0usize;
    for _ in 0..10_000 {
        let m = gen.gen_range(100..1000);
        let draws: Vec<f64> = (0..m).map(|_| gen.gen::<f64>() * 10.0 - 5.0).collect();
        let alpha = gen.gen::<f64>() * 0.98 + 0.01;
        let mut sorted = draws.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let rank = ((m as f64 * (1.0 - alpha)).ceil() as usize).clamp(1, m);
        let expect = sorted[rank - 1];
        let est = MonteCarloQuantileEstimate::from_draws(draws, 1).unwrap();
        let got = est.quantile(alpha).unwrap();
        assert_eq!(got.to_bits(), expect.to_bits(), "M={m} alpha={alpha}");
        checked += 1;
    }
    report("6 (quantile = order statistic)", checked == 10_000, "10000 random (draws, alpha) pairs matched exactly");
}

#[test]
fn criterion_07_brute_force_oracles() {
    let mut gen = ChaCha12Rng::seed_from_u64(700);
    // sample covariance vs O(n p^2) direct sums
    for _ in 0..100 {
        let n = gen.gen_range(3..10);
        let p = gen.gen_range(2..7);
        let rows: Vec<Vec<f64>> =
            (0..n).map(|_| (0..p).map(|_| gen.gen::<f64>() * 6.0 - 3.0).collect()).collect();
        let cov = sample_covariance(&DataMatrix::from_rows(&rows, None).unwrap()).unwrap();
        for k in 0..p {
            for l in 0..p {
                let mk = rows.iter().map(|r| r[k]).sum::<f64>() / n as f64;
                let ml = rows.iter().map(|r| r[l]).sum::<f64>() / n as f64;
                let direct = rows.iter().map(|r| (r[k] - mk) * (r[l] - ml)).sum::<f64>() / n as f64;
                assert!((cov.get(k, l) - direct).abs() < 1e-10, "cov mismatch at ({k},{l})");
            }
        }
    }
    // BH vs O(G^2) step condition
    for _ in 0..100 {
        let g = gen.gen_range(1..15);
        let ps: Vec<f64> = (0..g).map(|_| gen.gen::<f64>()).collect();
        let q = gen.gen::<f64>() * 0.4 + 0.01;
        let d = benjamini_hochberg(&ps, q).unwrap();
        let mut sorted = ps.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut k_star = 0usize;
        for (i, &pv) in sorted.iter().enumerate() {
            if pv <= (i + 1) as f64 * q / g as f64 {
                k_star = i + 1;
            }
        }
        let expect: Vec<bool> = if k_star == 0 {
            vec![false; g]
        } else {
            ps.iter().map(|&pv| pv <= sorted[k_star - 1]).collect()
        };
        assert_eq!(d.rejected, expect, "BH mismatch: ps={ps:?} q={q}");
    }
    // screening set vs direct threshold filter, and masked max vs enumeration
    for _ in 0..100 {
        let n = gen.gen_range(5..12);
        let p = gen.gen_range(2..10);
        let rows: Vec<Vec<f64>> =
            (0..n).map(|_| (0..p).map(|_| gen.gen::<f64>() * 8.0 - 4.0).collect()).collect();
        let stats = one_sample_stats(&DataMatrix::from_rows(&rows, None).unwrap(), None).unwrap();
        let sr = screen(&stats, 0.05).unwrap();
        let thr = screening_threshold(p, 0.05).unwrap();
        let t = stats.t_stats().unwrap();
        let expect: Vec<usize> = (0..p).filter(|&k| t[k].abs() <= thr).collect();
        assert_eq!(sr.excluded(), expect.as_slice());

        let mask: Vec<usize> = (0..p).filter(|_| gen.gen::<bool>()).collect();
        if !mask.is_empty() {
            let sm = stats.scaled_means();
            let direct = mask.iter().map(|&k| sm[k].abs()).fold(0.0f64, f64::max);
            let got = max_statistic(&stats, false, Some(&mask)).unwrap();
            assert!((got - direct).abs() < 1e-12);
        }
    }
    report("7 (brute-force oracles)", true, "covariance, BH, screening, masked max each matched on 100 instances");
}

#[test]
fn criterion_08_invariance_suite() {
    let mut gen = ChaCha12Rng::seed_from_u64(800);
    // studentized scale invariance
    for _ in 0..100 {
        let n = gen.gen_range(5..15);
        let p = gen.gen_range(2..8);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..p).map(|_| gen.sample::<f64, _>(StandardNormal)).collect())
            .collect();
        let scales: Vec<f64> = (0..p).map(|_| gen.gen::<f64>() * 5.0 + 0.1).collect();
        let scaled: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| r.iter().zip(&scales).map(|(v, s)| v * s).collect())
            .collect();
        let a = one_sample_stats(&DataMatrix::from_rows(&rows, None).unwrap(), None).unwrap();
        let b = one_sample_stats(&DataMatrix::from_rows(&scaled, None).unwrap(), None).unwrap();
        let ta = max_statistic(&a, true, None).unwrap();
        let tb = max_statistic(&b, true, None).unwrap();
        assert!((ta - tb).abs() < 1e-9, "scale invariance broke: {ta} vs {tb}");
    }
    // nested-mask critical-value monotonicity over shared draws
    for i in 0..100u64 {
        let p = 4 + (i as usize % 5);
        let rho = 0.1 + 0.08 * (i as f64 % 10.0);
        let m = SymmetricMatrix::from_fn(p, |k, l| rho.powi(k.abs_diff(l) as i32));
        let factor = psd_factorize(&m, 0.0).unwrap();
        let spec = RngSpec::new(8000 + i);
        let full: Vec<usize> = (0..p).collect();
        let sub: Vec<usize> = (0..p).step_by(2).collect();
        let cv_full = draw_max_norms(&factor, 400, Some(&full), spec)
            .unwrap()
            .quantile(0.05)
            .unwrap();
        let cv_sub =
            draw_max_norms(&factor, 400, Some(&sub), spec).unwrap().quantile(0.05).unwrap();
        assert!(cv_sub <= cv_full, "mask monotonicity broke: {cv_sub} > {cv_full}");
    }
    // pooled-covariance convexity identity
    for _ in 0..100 {
        let p = gen.gen_range(2..6);
        let da: Vec<f64> = (0..p).map(|_| 1.0 + gen.gen::<f64>()).collect();
        let db: Vec<f64> = (0..p).map(|_| 1.0 + gen.gen::<f64>()).collect();
        let a = SymmetricMatrix::from_fn(p, |k, l| if k == l { da[k] } else { 0.0 });
        let b = SymmetricMatrix::from_fn(p, |k, l| if k == l { db[k] } else { 0.0 });
        let n = gen.gen_range(2..50);
        let m = gen.gen_range(2..50);
        let pooled = pooled_covariance(&a, &b, n, m).unwrap();
        let (wn, wm) = (m as f64 / (n + m) as f64, n as f64 / (n + m) as f64);
        for k in 0..p {
            for l in 0..p {
                let expect = wn * a.get(k, l) + wm * b.get(k, l);
                assert!((pooled.get(k, l) - expect).abs() < 1e-12);
            }
        }
        let same = pooled_covariance(&a, &a, n, m).unwrap();
        for k in 0..p {
            assert!((same.get(k, k) - a.get(k, k)).abs() < 1e-12);
        }
    }
    // PSD factor round-trip
    for _ in 0..100 {
        let p = gen.gen_range(2..8);
        let n = p + gen.gen_range(0..4);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..p).map(|_| gen.sample::<f64, _>(StandardNormal)).collect())
            .collect();
        let cov = sample_covariance(&DataMatrix::from_rows(&rows, None).unwrap()).unwrap();
        let f = psd_factorize(&cov, 0.0).unwrap();
        let prod = f.factor() * f.factor().transpose();
        for k in 0..p {
            for l in 0..p {
                assert!((prod[(k, l)] - cov.get(k, l)).abs() < 1e-8, "round trip broke");
            }
        }
    }
    report("8 (invariance suite)", true, "scale invariance, mask monotonicity, pooling identity, factor round-trip: 100 instances each");
}

#[test]
fn criterion_09_thread_determinism() {
    let mut sc = scenario("c9", CovModel::NonsparseStiefel { rank: 10 }, 30, 25, 60);
    sc.num_draws = 300;
    sc.model_y = Some(CovModel::BandableAr { rho: 0.4 });
    sc.m = Some(20);
    sc.signal = Some(SignalSpec { r: 0.5, kappa: 1, beta: 0.3, support: None });
    let bytes: Vec<Vec<u8>> = [1usize, 4, 8]
        .iter()
        .map(|&t| serde_json::to_vec(&run_scenario(&sc, Some(t)).unwrap()).unwrap())
        .collect();
    let pass = bytes[0] == bytes[1] && bytes[1] == bytes[2];
    report(
        "9 (thread-count determinism)",
        pass,
        "simulate reports byte-identical at 1, 4, and 8 worker threads",
    );
}

#[test]
fn criterion_10_perfect_correlation_robustness() {
    let sc = scenario("c10", CovModel::PerfectCorrBlocks { corr: 0.7 }, 120, 80, 500);
    let rep = run_scenario(&sc, None).unwrap();
    let size = rep.rate("psi_ns").unwrap();
    report(
        "10 (perfect-correlation robustness)",
        size <= 0.08,
        &format!("rank-deficient blocks ran clean; psi_ns empirical size {size:.4} (limit 0.08)"),
    );
}
