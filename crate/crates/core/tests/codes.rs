use std::collections::HashMap;
use std::sync::Arc;

use finikey_core::bounds::{exact_converse, BoundQuery};
use finikey_core::ldpc::{adapt_rate, bp_syndrome_decode, node_degrees, peg_construct, RateAdaptedCode};
use finikey_core::sim::{calibrate_to_fer, estimate_fer, sweep_q, trial_rng};
use finikey_core::{DegreeDistribution, ParityCheckMatrix, TrialConfig};
use rand::Rng;

/// Pairs of variables sharing two or more checks, keyed by the larger
/// variable degree of the pair.
fn four_cycles(h: &ParityCheckMatrix) -> HashMap<usize, usize> {
    let deg = h.variable_degrees();
    let mut shared: HashMap<(usize, usize), usize> = HashMap::new();
    for row in h.check_adjacency() {
        for (i, &a) in row.iter().enumerate() {
            for &b in &row[i + 1..] {
                *shared.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
    }
    let mut out = HashMap::new();
    for ((a, b), c) in shared {
        if c > 1 {
            *out.entry(deg[a].max(deg[b])).or_default() += c * (c - 1) / 2;
        }
    }
    out
}

fn code(name: &str, rate: f64, n: usize, seed: u64) -> Arc<ParityCheckMatrix> {
    Arc::new(peg_construct(n, rate, &DegreeDistribution::by_name(name).unwrap(), seed).unwrap())
}

#[test]
fn girth_at_design_rates() {
    assert!(four_cycles(&code("lambda1", 0.6, 1000, 1)).is_empty());
    // λ2 at rate 0.7 and λ3 at 0.8 are too dense around their degree-15
    // nodes for PEG to avoid every 4-cycle at n = 1000; those that remain
    // involve only the heaviest columns.
    let c2 = four_cycles(&code("lambda2", 0.7, 1000, 1));
    assert!(c2.keys().all(|&d| d == 15), "{c2:?}");
    let c3 = four_cycles(&code("lambda3", 0.8, 1000, 1));
    assert!(c3.keys().all(|&d| d >= 11), "{c3:?}");
    // and they thin out as the graph gets sparser
    assert!(four_cycles(&code("lambda2", 0.7, 3000, 1)).values().sum::<usize>() < c2.values().sum::<usize>());
}

#[test]
fn histograms_and_determinism() {
    for (name, rate) in [("lambda1", 0.6), ("lambda2", 0.7), ("lambda3", 0.8)] {
        let lambda = DegreeDistribution::by_name(name).unwrap();
        let h = code(name, rate, 1000, 3);
        assert_eq!(*h, *code(name, rate, 1000, 3));
        let target = node_degrees(&lambda, 1000, h.n_chk()).unwrap();
        let mut got = h.variable_degrees();
        got.sort_unstable();
        assert_eq!(got, target.var_degrees);
        let fractions = lambda.node_fractions();
        for (d, frac) in fractions {
            let count = got.iter().filter(|&&x| x == d).count() as f64;
            assert!((count - 1000.0 * frac).abs() <= 1.0, "{name} degree {d}");
        }
        let alist = h.to_alist();
        assert_eq!(ParityCheckMatrix::from_alist(&alist).unwrap().to_alist(), alist);
    }
}

#[test]
fn noiseless_decoding_for_every_code() {
    for (name, rate) in [("lambda1", 0.6), ("lambda2", 0.7), ("lambda3", 0.8)] {
        let h = code(name, rate, 600, 5);
        for (s, p) in [(0, 0), (40, 0), (0, 40), (30, 20)] {
            let c = adapt_rate(h.clone(), s, p, 11).unwrap();
            assert_eq!(c.leak_bits() + c.punctured().len(), h.n_chk());
            let mut rng = trial_rng(2, s as u64);
            let mut x: Vec<u8> = (0..600).map(|_| rng.gen_range(0..2)).collect();
            for &v in c.shortened() {
                x[v] = 0;
            }
            // punctured bits are unknown to Bob, so only the unmodulated
            // code is guaranteed to stop before the first round
            let y: Vec<u8> = c.payload_positions().iter().map(|&v| x[v]).collect();
            let syn = h.syndrome(&x).unwrap();
            let out = bp_syndrome_decode(&c, &y, &syn, 1e-6, 50).unwrap();
            assert!(out.converged);
            assert_eq!(out.x_hat, x);
            if p == 0 {
                assert_eq!(out.iterations, 0);
            }
        }
    }
}

#[test]
fn rate_seven_tenths_at_two_percent() {
    let c = RateAdaptedCode::unmodulated(code("lambda2", 0.7, 1000, 1));
    let cfg = TrialConfig { stop_errors: 1000, max_trials: 1000, ..TrialConfig::new(0.02, 17) };
    let est = estimate_fer(&c, &cfg).unwrap();
    assert_eq!(est.trials, 1000);
    assert!(est.fer < 0.1, "{est:?}");
}

#[test]
fn fer_grows_with_crossover() {
    let c = RateAdaptedCode::unmodulated(code("lambda2", 0.7, 1000, 1));
    let cfg = TrialConfig { stop_errors: 20, max_trials: 2000, ..TrialConfig::new(0.01, 4) };
    let quiet = estimate_fer(&c, &cfg.with_q(1e-6)).unwrap();
    assert_eq!((quiet.errors, quiet.trials), (0, 2000));
    let sweep = sweep_q(&c, &[0.01, 0.05], &cfg);
    let (lo, hi) = (sweep[0].1.as_ref().unwrap(), sweep[1].1.as_ref().unwrap());
    assert!(lo.ci_high < hi.ci_low, "{lo:?} {hi:?}");
    assert!(sweep_q(&c, &[], &cfg).is_empty());
}

#[test]
fn parallel_workers_agree() {
    let c = RateAdaptedCode::unmodulated(code("lambda3", 0.8, 500, 2));
    let cfg = TrialConfig { stop_errors: 15, max_trials: 3000, ..TrialConfig::new(0.02, 8) };
    let run = |t| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .unwrap()
            .install(|| estimate_fer(&c, &cfg).unwrap())
    };
    assert_eq!(run(1), run(8));
}

#[test]
fn calibration_direction_and_bracketing() {
    let cfg = TrialConfig { stop_errors: 50, max_trials: 100_000, ..TrialConfig::new(0.03, 1) };

    let strong = code("lambda1", 0.6, 500, 1);
    let (c, p) = calibrate_to_fer(&strong, 0.002, 0.5, &cfg).unwrap();
    assert!(c.shortened().is_empty() && c.punctured().len() > 50, "{p:?}");

    let base = code("lambda2", 0.7, 1000, 1);
    let (_, p) = calibrate_to_fer(&base, 0.03, 1e-2, &cfg).unwrap();
    assert!(p.f >= 1.0 && p.f <= 2.0, "{p:?}");
    assert!(p.estimate.ci_high >= 0.5e-2 && p.estimate.ci_low <= 2e-2, "{p:?}");
    let bound = exact_converse(&BoundQuery::new(p.n_pay as u64, p.estimate.ci_high, 0.03).unwrap()).unwrap();
    assert!(p.leak_bits as f64 >= bound - 1e-6);

    let tiny = code("lambda2", 0.7, 200, 1);
    assert!(calibrate_to_fer(&tiny, 0.3, 1e-3, &cfg).is_err());
}
