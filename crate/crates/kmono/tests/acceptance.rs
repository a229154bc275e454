//! Acceptance gate: one test per criterion, each printing a single
//! pass/fail line. Run with `cargo test --test acceptance -- --nocapture`
//! to see the lines for passing criteria too.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kmono::chains::{
    chain_lower_bound, exact_distance_to_k_monotone, greedy_disjoint_chains, is_k_monotone,
    longest_alternating_chain,
};
use kmono::downsample::{
    downsample_learn, build_block_map, grid_table_to_cube, DownsampleLearnOptions, CoordinateMeasure,
    InnerLearner, ProductMeasure,
};
use kmono::fourier::{parity, wht, wht_of_table};
use kmono::function::hamming_distance;
use kmono::learners::{
    coupon_learn, coupon_sample_size, low_degree_learn, threshold_compose_learn, Hypothesis,
};
use kmono::oracle::{prf, OracleConfig, Source};
use kmono::talagrand::{
    birthday_distinguisher, distinguishing_experiment, sample_terms, verify_yes_k_monotone,
    TalagrandInstance, TalagrandParams,
};
use kmono::testers::{
    brute_force_projector, comparable_pair_probability, one_sided_test, test_by_learning,
};
use kmono::{DomainKind, FunctionTable};

fn report(n: u32, name: &str, pass: bool) {
    println!(
        "criterion {n} ({name}): {}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {n} ({name}) failed");
}

/// Independent oracle for the longest alternating chain: depth-first walk
/// over every value-alternating chain of the hypercube, no DP state shared
/// with the library implementation.
fn brute_longest_alternating(d: usize, vals: &[u8]) -> u32 {
    fn go(n: usize, vals: &[u8], x: usize, len: u32, next_decreases: bool, best: &mut u32) {
        *best = (*best).max(len);
        for y in 0..n {
            if y != x && (x & y) == x {
                let step_ok = if next_decreases {
                    vals[y] < vals[x]
                } else {
                    vals[y] > vals[x]
                };
                if step_ok {
                    go(n, vals, y, len + 1, !next_decreases, best);
                }
            }
        }
    }
    let n = 1usize << d;
    let mut best = 1;
    for x in 0..n {
        go(n, vals, x, 1, true, &mut best);
    }
    best
}

fn cube_table(d: usize, vals: Vec<u8>) -> FunctionTable {
    FunctionTable::new_hypercube(d, 2, vals).expect("valid table")
}

#[test]
fn criterion_1_exactness() {
    // All Boolean tables for d <= 3 against the all-chains brute force.
    for d in 0..=3usize {
        let n = 1usize << d;
        for bits in 0u32..1 << n {
            let vals: Vec<u8> = (0..n).map(|i| ((bits >> i) & 1) as u8).collect();
            let f = cube_table(d, vals.clone());
            let brute = brute_longest_alternating(d, &vals);
            for k in 1..=3u32 {
                assert_eq!(
                    is_k_monotone(&f, k).unwrap(),
                    brute <= k,
                    "d={d} bits={bits} k={k}"
                );
            }
            // chain_lower_bound <= exact_distance, k = 1.
            let exact = exact_distance_to_k_monotone(&f, 1, None).unwrap();
            let family = greedy_disjoint_chains(&f, 4).unwrap();
            if !family.is_empty() {
                let lb = chain_lower_bound(&f, &family, 1).unwrap();
                assert!(lb <= exact, "lower bound {lb} > exact {exact} (d={d} bits={bits})");
            }
        }
    }
    // 10^4 random tables at d = 4.
    let mut rng = ChaCha8Rng::seed_from_u64(0x1001);
    for trial in 0..10_000 {
        let vals: Vec<u8> = (0..16).map(|_| rng.gen_range(0..2u8)).collect();
        let f = cube_table(4, vals.clone());
        let brute = brute_longest_alternating(4, &vals);
        assert_eq!(
            longest_alternating_chain(&f).unwrap(),
            brute,
            "trial {trial}"
        );
    }
    report(1, "exactness", true);
}

#[test]
fn criterion_2_fourier() {
    // Parseval within 1e-9 on random +-1 tables up to d = 16.
    let mut rng = ChaCha8Rng::seed_from_u64(0x2002);
    for d in [2usize, 5, 8, 12, 16] {
        for _ in 0..3 {
            let vals: Vec<f64> = (0..1usize << d)
                .map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 })
                .collect();
            let spec = wht(d, &vals).unwrap();
            let energy: f64 = spec.coeffs().iter().map(|c| c * c).sum();
            assert!((energy - 1.0).abs() < 1e-9, "Parseval off at d={d}: {energy}");
        }
    }
    // Spectral tail bound for every monotone function on d = 4: the squared
    // mass above degree k*sqrt(d)/eps is at most eps, here with k = 1.
    let d = 4usize;
    let mut monotone = 0u32;
    for bits in 0u32..1 << 16 {
        let vals: Vec<u8> = (0..16).map(|i| ((bits >> i) & 1) as u8).collect();
        let f = cube_table(d, vals);
        if !is_k_monotone(&f, 1).unwrap() {
            continue;
        }
        monotone += 1;
        let spec = wht_of_table(&f).unwrap();
        for e in 1..=9u32 {
            let eps = e as f64 / 10.0;
            let cutoff = ((d as f64).sqrt() / eps).floor() as u32;
            let tail = spec.spectral_tail(cutoff);
            assert!(
                tail <= eps + 1e-12,
                "tail {tail} > eps {eps} for monotone table"
            );
        }
    }
    assert_eq!(monotone, 168, "Dedekind count of monotone functions on d=4");
    report(2, "fourier", true);
}

#[test]
fn criterion_3_noise_corrected_estimation() {
    // Z_S = mean(y chi_S(x)) / (1 - 2 eta) should match the transform
    // coefficient within 3 empirical standard errors, 10^4 examples.
    let d = 3usize;
    let dictator = cube_table(d, (0..8).map(|x| (x & 1) as u8).collect());
    let maj3 = cube_table(
        d,
        (0..8u32).map(|x| u8::from(x.count_ones() >= 2)).collect(),
    );
    let n = 10_000u64;
    for (fi, f) in [dictator, maj3].into_iter().enumerate() {
        let truth = wht_of_table(&f).unwrap();
        for (ei, eta) in [0.0, 0.25].into_iter().enumerate() {
            let seed = prf(0x3003, fi as u64, ei as u64);
            let cfg = OracleConfig::for_table(Arc::new(f.clone()), seed).with_eta(eta);
            let sample = cfg.draw(n).unwrap();
            for s in 0u32..8 {
                let terms: Vec<f64> = sample
                    .iter()
                    .map(|e| {
                        let x = match &e.point {
                            kmono::Point::Cube(x) => *x,
                            _ => unreachable!(),
                        };
                        e.label_pm1() * parity(s, x) / (1.0 - 2.0 * eta)
                    })
                    .collect();
                let mean = terms.iter().sum::<f64>() / n as f64;
                let var = terms.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
                let sigma = (var / n as f64).sqrt().max(1e-12);
                let diff = (mean - truth.coeff(s)).abs();
                assert!(
                    diff <= 3.0 * sigma,
                    "fn {fi} eta {eta} S {s}: |{mean} - {}| > 3*{sigma}",
                    truth.coeff(s)
                );
            }
        }
    }
    report(3, "noise-corrected estimation", true);
}

#[test]
fn criterion_4_learning() {
    // Low-degree learner on dictators: d=8, tau=1, eta=0.25, s=2*10^4,
    // error <= 0.05 in at least 18 of 20 seeded trials.
    let d = 8usize;
    let mut good = 0;
    for t in 0..20u64 {
        let coord = (t % 8) as u32;
        let dict = cube_table(d, (0..1u32 << d).map(|x| ((x >> coord) & 1) as u8).collect());
        let target = Arc::new(dict);
        let cfg = OracleConfig::for_table(target.clone(), prf(0x4004, 0, t)).with_eta(0.25);
        let h = low_degree_learn(&cfg, 1, 20_000).unwrap();
        let ht = Hypothesis::LowDegree(h)
            .materialize(DomainKind::Hypercube { d }, 2)
            .unwrap();
        let err = hamming_distance(&target, &ht).unwrap();
        if *err.numer() as f64 / *err.denom() as f64 <= 0.05 {
            good += 1;
        }
    }
    assert!(good >= 18, "low-degree: only {good}/20 trials at error <= 0.05");

    // Coupon learner exactly recovers random N=4, d=2 tables at eta = 0.1
    // using its formula sample size, in at least 9 of 10 trials.
    let s = coupon_sample_size(0.1, 0.1, 0.1, 4, 2, None).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0x4104);
    let mut exact = 0;
    for t in 0..10u64 {
        let vals: Vec<u8> = (0..16).map(|_| rng.gen_range(0..2u8)).collect();
        let f = Arc::new(FunctionTable::new_hypergrid(2, 4, 2, vals).unwrap());
        let cfg = OracleConfig::for_table(f.clone(), prf(0x4204, 0, t)).with_eta(0.1);
        let h = coupon_learn(&cfg, s).unwrap();
        if h.to_table().unwrap().values() == f.values() {
            exact += 1;
        }
    }
    assert!(exact >= 9, "coupon: only {exact}/10 exact recoveries at s = {s}");

    // Threshold composition with exact base learners recovers a 3-valued
    // monotone target on d = 3 exactly.
    let f3 = FunctionTable::new_hypercube(
        3,
        3,
        (0..8u32)
            .map(|x| u8::from(x.count_ones() >= 1) + u8::from(x.count_ones() >= 3))
            .collect(),
    )
    .unwrap();
    let cfg = OracleConfig::for_table(Arc::new(f3.clone()), 7);
    let exact_base = |c: &OracleConfig, _eps: f64, _delta: f64| match &c.source {
        Source::Table(t) => Ok((Hypothesis::Table((**t).clone()), 0u64)),
        _ => unreachable!(),
    };
    let (h, _) = threshold_compose_learn(&cfg, &exact_base, 0.1, 0.1).unwrap();
    let ht = h.materialize(f3.domain(), 3).unwrap();
    assert_eq!(ht.values(), f3.values(), "threshold composition not exact");
    report(4, "learning", true);
}

#[test]
fn criterion_5_testing_by_learning() {
    // d=4, k=1, eps=0.3, 100 trials: accept rate >= 2/3 on a monotone
    // target, reject rate >= 2/3 on a target of exact distance >= 0.3.
    let d = 4usize;
    let eps = 0.3;
    let monotone = Arc::new(cube_table(
        d,
        (0..16u32).map(|x| u8::from(x.count_ones() >= 2)).collect(),
    ));
    let parity_t = Arc::new(cube_table(
        d,
        (0..16u32).map(|x| (x.count_ones() % 2) as u8).collect(),
    ));
    let dist = exact_distance_to_k_monotone(&parity_t, 1, None).unwrap();
    assert!(
        *dist.numer() as f64 / *dist.denom() as f64 >= eps,
        "far target is only at distance {dist}"
    );
    let learner = |c: &OracleConfig, e: f64, _delta: f64| {
        Ok((
            Hypothesis::LowDegree(kmono::learners::kmono_learn_hypercube(c, 1, e, 4000)?),
            4000u64,
        ))
    };
    let run = |f: &Arc<FunctionTable>, stream: u64| -> u32 {
        (0..100u64)
            .filter(|&t| {
                let cfg = OracleConfig::for_table(f.clone(), prf(0x5005, stream, t));
                test_by_learning(&cfg, 1, eps, &learner, &brute_force_projector)
                    .unwrap()
                    .accepted()
            })
            .count() as u32
    };
    let accepts_mono = run(&monotone, 0);
    let accepts_far = run(&parity_t, 1);
    assert!(accepts_mono >= 67, "monotone accepted only {accepts_mono}/100");
    assert!(accepts_far <= 33, "far target accepted {accepts_far}/100");
    report(5, "testing by learning", true);
}

#[test]
fn criterion_6_one_sided() {
    // Zero false rejections on every monotone table, d <= 3, with the
    // exhaustive sample (all points, true labels).
    for d in 0..=3usize {
        let n = 1usize << d;
        for bits in 0u32..1 << n {
            let vals: Vec<u8> = (0..n).map(|i| ((bits >> i) & 1) as u8).collect();
            let f = cube_table(d, vals);
            if !is_k_monotone(&f, 1).unwrap() {
                continue;
            }
            let sample: Vec<_> = (0..n)
                .map(|i| kmono::oracle::LabeledExample {
                    point: f.point_at(i),
                    label: f.values()[i],
                })
                .collect();
            let v = one_sided_test(&sample, 1, 0).unwrap();
            assert!(v.accepted(), "false rejection on monotone table (d={d}, {bits})");
        }
    }
    // Frequency of x <= y over ordered uniform pairs matches (3/4)^d
    // within 3 sigma, 10^6 pairs per dimension.
    let mut rng = ChaCha8Rng::seed_from_u64(0x6006);
    let n = 1_000_000u64;
    for d in 4..=10usize {
        let mask = (1u32 << d) - 1;
        let hits = (0..n)
            .filter(|_| {
                let x = rng.gen::<u32>() & mask;
                let y = rng.gen::<u32>() & mask;
                (x & y) == x
            })
            .count() as f64;
        let p_rat = comparable_pair_probability(d).unwrap();
        let p = *p_rat.numer() as f64 / *p_rat.denom() as f64;
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        let freq = hits / n as f64;
        assert!(
            (freq - p).abs() <= 3.0 * sigma,
            "d={d}: |{freq} - {p}| > 3*{sigma}"
        );
    }
    report(6, "one-sided tester", true);
}

#[test]
fn criterion_7_hard_instances() {
    // 100 seeded yes-instances at d = 12 for each parameter set are all
    // exactly k-monotone.
    for (r, k) in [(2u32, 1u32), (2, 2), (3, 1)] {
        let params = TalagrandParams::new(12, r, k, 0.9).unwrap();
        for t in 0..100u64 {
            let inst = TalagrandInstance::sample_yes(&params, prf(0x7007, (r * 8 + k) as u64, t));
            assert!(
                verify_yes_k_monotone(&inst).unwrap(),
                "yes-instance not {k}-monotone at r={r}, trial {t}"
            );
        }
    }
    // Yes/no variants built on the same terms differ only on points with a
    // unique satisfier.
    let params = TalagrandParams::new(12, 2, 1, 0.9).unwrap();
    let terms = sample_terms(&params, 0x7107);
    let yes = TalagrandInstance::yes_with_terms(&params, terms.clone(), 0x7207);
    let no = TalagrandInstance::no_with_terms(&params, terms, 0x7307);
    let fy = yes.materialize().unwrap();
    let fn_ = no.materialize().unwrap();
    for x in 0..1u32 << 12 {
        if fy.values()[x as usize] != fn_.values()[x as usize] {
            assert!(
                yes.unique_satisfier(x).is_some(),
                "variants differ off the unique-satisfier set at x={x}"
            );
        }
    }
    // Single-sample label marginals of the yes and no streams agree within
    // 3 sigma (two-proportion comparison, 2*10^4 draws per stream).
    let n = 20_000u64;
    let one_rate = |yes_stream: bool| -> f64 {
        (0..n)
            .filter(|&t| {
                let seed = prf(0x7407, u64::from(yes_stream), t);
                let inst = if yes_stream {
                    TalagrandInstance::sample_yes(&params, seed)
                } else {
                    TalagrandInstance::sample_no(&params, seed)
                };
                inst.draw(prf(seed, 99, 0), 1)[0].label == 1
            })
            .count() as f64
            / n as f64
    };
    let (py, pn) = (one_rate(true), one_rate(false));
    let sigma = (py * (1.0 - py) / n as f64 + pn * (1.0 - pn) / n as f64).sqrt();
    assert!(
        (py - pn).abs() <= 3.0 * sigma,
        "single-sample marginals differ: {py} vs {pn} (3 sigma = {})",
        3.0 * sigma
    );
    // Birthday distinguisher: no advantage at s = 1, strictly increasing
    // advantage over an s-sweep at d = 14.
    let params14 = TalagrandParams::new(14, 2, 1, 0.9).unwrap();
    let rows: Vec<_> = [1u64, 8, 64]
        .iter()
        .map(|&s| {
            distinguishing_experiment(&params14, &birthday_distinguisher, s, 400, 0x7507).unwrap()
        })
        .collect();
    assert!(
        rows[0].advantage.abs() <= 3.0 * rows[0].stderr.max(1e-9),
        "advantage at s=1 is {} (stderr {})",
        rows[0].advantage,
        rows[0].stderr
    );
    assert!(
        rows[0].advantage < rows[1].advantage && rows[1].advantage < rows[2].advantage,
        "advantage not strictly increasing: {:?}",
        rows.iter().map(|r| r.advantage).collect::<Vec<_>>()
    );
    report(7, "hard instances", true);
}

#[test]
fn criterion_8_downsampling() {
    // block(blockpoint(b)) = b on every cell of a non-uniform product map.
    let mu = ProductMeasure {
        coords: vec![
            CoordinateMeasure::Exponential { rate: 1.0 },
            CoordinateMeasure::Gaussian { mean: 0.0, std: 1.0 },
        ],
    };
    let bm = build_block_map(&mu, 8, 4000, 0x8008).unwrap();
    bm.verify().unwrap();
    // k-monotonicity preservation under the cube embedding, exhaustive over
    // every Boolean table on the 4x4 grid: the embedded table's longest
    // alternating chain never exceeds the grid table's.
    for bits in 0u32..1 << 16 {
        let vals: Vec<u8> = (0..16).map(|i| ((bits >> i) & 1) as u8).collect();
        let g = FunctionTable::new_hypergrid(2, 4, 2, vals).unwrap();
        let c = grid_table_to_cube(&g).unwrap();
        let lg = longest_alternating_chain(&g).unwrap();
        let lc = longest_alternating_chain(&c).unwrap();
        assert!(lc <= lg, "embedding created alternations: {lc} > {lg} ({bits})");
    }
    // End-to-end learning of a monotone halfspace under the measure above:
    // error <= 3 eps in at least 2/3 of trials (d = 2, eps = 0.3).
    let eps = 0.3;
    let truth = |x: &[f64]| u8::from(x[0] + x[1] >= 1.0);
    let opts = DownsampleLearnOptions {
        q_override: Some(200_000),
        force: Some(InnerLearner::Coupon),
        ..Default::default()
    };
    let mut good = 0;
    let trials = 9;
    for t in 0..trials {
        let rep = downsample_learn(&mu, &truth, 1, eps, 0.2, &opts, prf(0x8108, 0, t)).unwrap();
        let h = &rep.hypothesis;
        let mut rng = ChaCha8Rng::seed_from_u64(prf(0x8208, 1, t));
        let m = 10_000;
        let errs = (0..m)
            .filter(|_| {
                let x = mu.sample(&mut rng);
                h.predict(&x).unwrap() != truth(&x)
            })
            .count() as f64;
        if errs / m as f64 <= 3.0 * eps {
            good += 1;
        }
    }
    assert!(good * 3 >= trials * 2, "only {good}/{trials} trials at error <= 3 eps");
    report(8, "downsampling", true);
}
