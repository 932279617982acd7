//! Randomized and grid-based checks of the library's mathematical
//! guarantees: enumeration identities, bound inequalities on dense grids,
//! estimator agreement and the behavior of the empirical rules as histories
//! and committees grow.

use committee::bounds::{
    committee_potential, kearns_saul_gap, lower_bound_opt, upper_bound_opt,
    variance_potential_ratio,
};
use committee::exact::{exact_error, exact_error_optimal};
use committee::rules::{np_weights, AdaptiveFallback};
use committee::sim::rng::stream_rng;
use committee::sim::{
    adaptive_joint_error, run, sweep, CompetenceSource, Estimator, SimConfig, SweepConfig,
};
use committee::{BetaPriorSet, Committee, WeightVector};
use rand::Rng;
use rand_distr::{Binomial, Distribution};

/// A committee whose optimal score is bounded away from zero on every
/// correctness pattern, so the tie-as-error and the antipodal-pair readings
/// of its optimal error coincide.
fn random_tie_free_committee(rng: &mut impl Rng, max_n: usize) -> Committee {
    loop {
        let n = rng.gen_range(1..=max_n);
        let p: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..=0.95)).collect();
        let w: Vec<f64> = p.iter().map(|&pi| (pi / (1.0 - pi)).ln()).collect();
        let tie_free = (0..(1u64 << n)).all(|mask| {
            let score: f64 = w
                .iter()
                .enumerate()
                .map(|(i, &wi)| if mask & (1 << i) != 0 { wi } else { -wi })
                .sum();
            score.abs() > 1e-9
        });
        if tie_free {
            return Committee::new(p).unwrap();
        }
    }
}

#[test]
fn optimal_weighted_error_equals_pair_enumeration() {
    let mut rng = stream_rng(0xA1, 0);
    for _ in 0..2000 {
        let c = random_tie_free_committee(&mut rng, 12);
        let weighted = exact_error(&c, &np_weights(&c)).unwrap().value();
        let paired = exact_error_optimal(&c).unwrap().value();
        assert!(
            (weighted - paired).abs() <= 1e-12,
            "mismatch on {:?}: {weighted} vs {paired}",
            c.competences()
        );
    }
}

#[test]
fn optimal_error_sits_between_its_bounds() {
    let mut rng = stream_rng(0xA2, 0);
    for _ in 0..10_000 {
        let n = rng.gen_range(1..=12);
        let p: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..=0.95)).collect();
        let c = Committee::new(p).unwrap();
        let phi = committee_potential(&c);
        let error = exact_error_optimal(&c).unwrap().value();
        let upper = upper_bound_opt(phi).unwrap();
        let lower = lower_bound_opt(phi).unwrap();
        assert!(
            lower <= error + 1e-12 && error <= upper + 1e-12,
            "bounds violated on {:?}: {lower} <= {error} <= {upper}",
            c.competences()
        );
    }
}

#[test]
fn log_odds_weights_beat_random_rivals() {
    let mut rng = stream_rng(0xA3, 0);
    for _ in 0..1000 {
        let n = rng.gen_range(1..=8);
        let p: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..=0.95)).collect();
        let c = Committee::new(p).unwrap();
        let optimal = exact_error(&c, &np_weights(&c)).unwrap().value();
        for _ in 0..100 {
            let rival: Vec<f64> = (0..n).map(|_| rng.gen_range(-4.0..=4.0)).collect();
            let rival = WeightVector::new(rival).unwrap();
            let rival_error = exact_error(&c, &rival).unwrap().value();
            assert!(
                optimal <= rival_error + 1e-12,
                "rival {:?} beat the log-odds weights on {:?}",
                rival.as_slice(),
                c.competences()
            );
        }
    }
}

#[test]
fn bernoulli_mgf_bound_holds_on_a_dense_grid() {
    // Exact equality of both sides at t = 0; elsewhere the bound, with one
    // ulp of slack for the additions inside the left side.
    for i in 1..=99u32 {
        let p = f64::from(i) / 100.0;
        for j in -500..=500i32 {
            let t = f64::from(j) / 10.0;
            let (lhs, rhs) = kearns_saul_gap(p, t).unwrap();
            if j == 0 {
                assert!((lhs - rhs).abs() <= 1e-12, "p={p}: {lhs} vs {rhs} at t=0");
            }
            assert!(
                lhs <= rhs + 1e-12 * rhs.max(1.0),
                "p={p}, t={t}: {lhs} > {rhs}"
            );
        }
    }
}

#[test]
fn variance_potential_ratio_peaks_at_one_half() {
    let mut best = f64::NEG_INFINITY;
    let mut arg_best = 0.0;
    for i in 1..10_000u32 {
        let x = f64::from(i) / 10_000.0;
        let f = variance_potential_ratio(x).unwrap();
        assert!(f <= 0.5 + 1e-12, "F({x}) = {f} exceeds 1/2");
        if f > best {
            best = f;
            arg_best = x;
        }
    }
    assert!((arg_best - 0.5).abs() <= 1e-6, "max attained at {arg_best}");
    assert_eq!(variance_potential_ratio(0.5).unwrap(), 0.5);
}

#[test]
fn variance_term_is_dominated_by_the_potential_term() {
    // Per-expert consequence of the ratio bound for the log-odds weights.
    for i in 5001..10_000u32 {
        let p = f64::from(i) / 10_000.0;
        let q = 1.0 - p;
        let w = (p / q).ln();
        assert!(
            p * q * w * w <= 0.5 * (p - q) * w + 1e-12,
            "dominance fails at p = {p}"
        );
    }
}

#[test]
fn componentwise_minimum_keeps_a_ratio_share_of_the_total() {
    // If every component pair is within a factor R of each other, the
    // smaller components retain at least a 1/(1+R) share of the total sum.
    let mut rng = stream_rng(0xA4, 0);
    for _ in 0..10_000 {
        let n = rng.gen_range(1..=16);
        let ratio_cap = rng.gen_range(1.0..=10.0);
        let mut total = 0.0;
        let mut min_sum = 0.0;
        for _ in 0..n {
            let s: f64 = rng.gen_range(1e-6..=1.0);
            let ratio = rng.gen_range(1.0 / ratio_cap..=ratio_cap);
            let s_paired = s * ratio;
            total += s + s_paired;
            min_sum += s.min(s_paired);
        }
        assert!(
            min_sum >= total / (1.0 + ratio_cap) - 1e-12,
            "share {min_sum} below {total} / (1 + {ratio_cap})"
        );
    }
}

#[test]
fn empirical_frequency_deviation_is_within_the_universal_bound() {
    // Mean absolute deviation of k/m around p never exceeds 1/(2 sqrt m).
    let mut rng = stream_rng(0xA5, 0);
    let trials = 100_000u64;
    for p in [0.1, 0.5, 0.9] {
        for m in [1u64, 10, 100] {
            let dist = Binomial::new(m, p).unwrap();
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for _ in 0..trials {
                let k = dist.sample(&mut rng);
                let dev = (k as f64 / m as f64 - p).abs();
                sum += dev;
                sum_sq += dev * dev;
            }
            let mean = sum / trials as f64;
            let var = (sum_sq - trials as f64 * mean * mean) / (trials as f64 - 1.0);
            let stderr = (var / trials as f64).sqrt();
            let bound = 0.5 / (m as f64).sqrt();
            assert!(
                mean <= bound + 3.0 * stderr,
                "p={p}, m={m}: {mean} above {bound}"
            );
        }
    }
}

#[test]
fn joint_gate_and_error_probability_stays_under_its_budget() {
    let mut rng = stream_rng(0xA6, 0);
    for m in [4u64, 16, 64] {
        let p: Vec<f64> = (0..5).map(|_| rng.gen_range(0.1..=0.9)).collect();
        let c = Committee::new(p).unwrap();
        let report = adaptive_joint_error(&c, &[m; 5], 20_000, 0xB000 + m, None).unwrap();
        let slack = 3.0 * report.estimate.stderr().unwrap();
        assert!(
            report.estimate.value() <= report.delta + slack,
            "m={m}, p={:?}: joint {} above budget {}",
            c.competences(),
            report.estimate.value(),
            report.delta
        );
    }
}

fn consistency_config(source: CompetenceSource, rules: &[&str], m: u64) -> SimConfig {
    let n = source.experts();
    SimConfig {
        source,
        queries: vec![m; n],
        trials: 0,
        seed: 0,
        rules: rules.iter().map(|r| r.to_string()).collect(),
        priors: Some(BetaPriorSet::uniform(n).unwrap()),
        fallback: AdaptiveFallback::Decline,
        estimator: Estimator::MonteCarlo,
        threads: None,
    }
}

#[test]
fn both_estimators_agree_on_shared_configurations() {
    let configs = [
        consistency_config(
            CompetenceSource::Fixed(Committee::new(vec![0.8, 0.7, 0.6]).unwrap()),
            &["opt", "maj", "lc", "hc", "adapt", "bayes"],
            10,
        ),
        consistency_config(
            CompetenceSource::Fixed(
                Committee::new(vec![0.9, 0.55, 0.65, 0.75, 0.6]).unwrap(),
            ),
            &["lc", "hc", "bayes"],
            25,
        ),
        consistency_config(
            CompetenceSource::BetaDraw(BetaPriorSet::uniform(4).unwrap()),
            &["maj", "lc", "hc", "bayes"],
            5,
        ),
        {
            let mut c = consistency_config(
                CompetenceSource::Fixed(Committee::new(vec![0.7, 0.7, 0.7]).unwrap()),
                &["adapt"],
                50,
            );
            c.fallback = AdaptiveFallback::LowConfidence;
            c
        },
    ];
    for (index, base) in configs.into_iter().enumerate() {
        let mut mc = base.clone();
        mc.trials = 50_000;
        mc.seed = 0xC0 + index as u64;
        mc.estimator = Estimator::MonteCarlo;
        let mut rb = base;
        rb.trials = 10_000;
        rb.seed = 0xD0 + index as u64;
        rb.estimator = Estimator::RaoBlackwell;
        for (sampled, conditional) in run(&mc).unwrap().iter().zip(run(&rb).unwrap()) {
            let gap = (sampled.estimate.value() - conditional.estimate.value()).abs();
            let se_mc = sampled.estimate.stderr().unwrap();
            let se_rb = conditional.estimate.stderr().unwrap();
            let combined = (se_mc * se_mc + se_rb * se_rb).sqrt();
            assert!(
                gap <= 3.0 * combined,
                "config {index}, rule {}: |{} - {}| > 3 * {combined}",
                sampled.rule,
                sampled.estimate.value(),
                conditional.estimate.value()
            );
        }
    }
}

#[test]
fn sampled_optimal_error_matches_enumeration() {
    let mut rng = stream_rng(0xA7, 0);
    for round in 0..20 {
        let c = random_tie_free_committee(&mut rng, 8);
        let exact = exact_error_optimal(&c).unwrap().value();
        let config = SimConfig {
            source: CompetenceSource::Fixed(c.clone()),
            queries: vec![1; c.len()],
            trials: 20_000,
            seed: 0xE00 + round,
            rules: vec!["opt".to_string()],
            priors: None,
            fallback: AdaptiveFallback::Decline,
            estimator: Estimator::MonteCarlo,
            threads: None,
        };
        let out = run(&config).unwrap();
        let gap = (out[0].estimate.value() - exact).abs();
        let slack = 3.0 * out[0].estimate.stderr().unwrap();
        assert!(
            gap <= slack,
            "round {round}, p={:?}: sampled {} vs exact {exact}",
            c.competences(),
            out[0].estimate.value()
        );
    }
}

#[test]
fn centered_rule_improves_with_committee_size() {
    // Identical experts at p = 0.75 observed once each: every added block of
    // experts strictly lowers the centered rule's error, so the measured
    // errors must decrease across n = 5, 9, 13 beyond sampling noise.
    let mut previous: Option<(f64, f64)> = None;
    for (index, n) in [5usize, 9, 13].into_iter().enumerate() {
        let config = SimConfig {
            source: CompetenceSource::Fixed(Committee::new(vec![0.75; n]).unwrap()),
            queries: vec![1; n],
            trials: 40_000,
            seed: 0xF0 + index as u64,
            rules: vec!["lc".to_string()],
            priors: None,
            fallback: AdaptiveFallback::Decline,
            estimator: Estimator::MonteCarlo,
            threads: None,
        };
        let out = run(&config).unwrap();
        let error = out[0].estimate.value();
        let se = out[0].estimate.stderr().unwrap();
        if let Some((last_error, last_se)) = previous {
            let combined = (se * se + last_se * last_se).sqrt();
            assert!(
                error <= last_error - 3.0 * combined,
                "error did not drop from n = {} ({last_error}) to n = {n} ({error})",
                n - 4
            );
        }
        previous = Some((error, se));
    }
}

#[test]
fn sweeps_are_bit_identical_across_thread_counts() {
    let config = SweepConfig {
        source: CompetenceSource::BetaDraw(BetaPriorSet::uniform(4).unwrap()),
        m_grid: vec![1, 8, 27],
        trials: 2_000,
        seed: 0xAB,
        rules: ["maj", "lc", "hc", "bayes"].map(String::from).to_vec(),
        priors: None,
        fallback: AdaptiveFallback::Decline,
        estimator: Estimator::RaoBlackwell,
        threads: Some(1),
    };
    let single = sweep(&config).unwrap();
    let mut wide = config.clone();
    wide.threads = Some(4);
    assert_eq!(single, sweep(&wide).unwrap());
    let rerun = sweep(&config).unwrap();
    assert_eq!(single, rerun);
}
