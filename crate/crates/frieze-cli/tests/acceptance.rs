//! Acceptance suite.
//!
//! One test per criterion; each prints a `criterion N ...: PASS` line
//! (visible with `cargo test --test acceptance -- --nocapture`). Every
//! tolerance is pinned in code; all comparisons on the certification
//! path are exact.

use std::time::Instant;

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::Signed;

use frieze_core::certificate::{
    build_certificate, choose_delta, choose_eps_bar, window_floor_from, ScalePattern,
};
use frieze_core::density::{
    closed_form_beta, cumulative_counts, default_oscillation_threshold, default_zero_threshold,
    estimate_beta, Verdict,
};
use frieze_core::experiment::{compare_report, exact_copy_exists, minimal_empirical_n};
use frieze_core::rat;
use frieze_core::scale_search::{find_scale, SearchMode, SearchOutcome};
use frieze_core::{Int, OnsetBasis, Rat, SetSpec};

fn r(num: i64, den: i64) -> Rat {
    Ratio::new(BigInt::from(num), BigInt::from(den))
}

fn pat(values: &[i64]) -> ScalePattern {
    ScalePattern::new(values.to_vec()).unwrap()
}

fn evens() -> SetSpec {
    SetSpec::residues(2, vec![0]).unwrap()
}

/// Stateless deterministic test RNG.
struct TestRng(u64);

impl TestRng {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    fn below(&mut self, bound: u64) -> u64 {
        self.next() % bound
    }

    fn range(&mut self, lo: u64, hi: u64) -> u64 {
        lo + self.below(hi - lo + 1)
    }
}

/// Criterion 1: the running indicator average times n equals the member
/// count below n, as exact integers, for five set families and every
/// n up to 10^5, in under ten seconds.
#[test]
fn criterion_1_running_average_identity() {
    let start = Instant::now();
    let specs = vec![
        evens(),
        SetSpec::residues(3, vec![0, 2]).unwrap(),
        SetSpec::explicit(vec![0, 5, 7]).unwrap(),
        SetSpec::bernoulli(Ratio::new(3, 10), 42).unwrap(),
        SetSpec::Primes,
    ];
    let n_hi = 100_000u64;
    for spec in &specs {
        // Implementation route: observer window prefix sums.
        let counts = cumulative_counts(spec, n_hi).unwrap();
        // Oracle route: direct membership counting.
        let mut oracle = 0u64;
        for n in 1..=n_hi {
            if spec.contains((n - 1) as i64) {
                oracle += 1;
            }
            assert_eq!(counts[n as usize], oracle, "{spec} at {n}");
        }
        // Bind the public operation at sampled n (it is the same sum).
        for s in 0..40u64 {
            let n = 1 + (s * 2_579) % n_hi;
            let avg: Rat = frieze_core::density::birkhoff_average(spec, n).unwrap();
            assert_eq!(
                avg * r(n as i64, 1),
                r(counts[n as usize] as i64, 1),
                "{spec} at {n}"
            );
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    println!(
        "criterion 1 (running-average identity, 5 specs x 10^5 prefixes): PASS in {elapsed:?}"
    );
}

/// Criterion 2: worked closed forms and the primes verdict.
#[test]
fn criterion_2_worked_values() {
    // Observer of the evens begins 1,0,1,0,...
    let w = evens().window(5).unwrap();
    let prefix: Vec<u8> = (0..6).map(|i| w.indicator(i)).collect();
    assert_eq!(prefix, vec![1, 0, 1, 0, 1, 0]);

    // Exact density values.
    let full_line = SetSpec::residues(1, vec![0]).unwrap();
    assert_eq!(closed_form_beta::<Int>(&full_line), Some(r(1, 1)));
    assert_eq!(
        closed_form_beta::<Int>(&SetSpec::explicit(vec![3, 17]).unwrap()),
        Some(r(0, 1))
    );
    assert_eq!(closed_form_beta::<Int>(&evens()), Some(r(1, 2)));

    // Primes: density estimates collapse across growing horizons.
    let zt = default_zero_threshold::<Int>();
    let ot = default_oscillation_threshold::<Int>();
    let horizons = [100_000u64, 1_000_000, 10_000_000];
    let mut betas = Vec::new();
    for &h in &horizons {
        let est = estimate_beta::<Int>(&SetSpec::Primes, h, &zt, &ot).unwrap();
        betas.push(est.beta.clone());
        if h == 10_000_000 {
            assert_eq!(est.verdict, Verdict::LikelyZero);
            assert!(est.beta <= r(8, 100), "density at 10^7 is {}", est.beta);
            // Sieve oracle: exactly 664579 primes below 10^7.
            assert_eq!(est.beta, r(664_579, 10_000_000));
        }
    }
    assert!(betas[0] > betas[1] && betas[1] > betas[2]);
    println!(
        "criterion 2 (worked values; primes collapse {} > {} > {}): PASS",
        betas[0], betas[1], betas[2]
    );
}

/// Criterion 3: 1000 randomized constant chains satisfy every chain
/// inequality by exact rational comparison.
#[test]
fn criterion_3_certificate_algebra() {
    let mut rng = TestRng(0xC0FFEE);
    let two = r(2, 1);
    for case in 0..1_000 {
        let q = rng.range(1, 1_000_000);
        let p = rng.range(1, q);
        let beta = r(p as i64, q as i64);
        let eps = r(rng.range(1, 2_000) as i64, rng.range(1, 1_000) as i64);
        let k = rng.range(1, 8);
        let mut values = vec![rng.range(0, 200) as i64 - 100];
        for _ in 1..k {
            let last = *values.last().unwrap();
            values.push(last + rng.range(1, 50) as i64);
        }
        let pattern = ScalePattern::new(values).unwrap();
        let n0 = rng.range(1, 1_000_000);

        let eps_bar = choose_eps_bar::<Int>(&eps, &pattern).unwrap();
        let delta = choose_delta::<Int>(&beta, &eps_bar).unwrap();
        let floor = window_floor_from::<Int>(n0, &eps_bar, &beta, &delta);

        // Chain inequality on delta.
        assert!(delta > r(0, 1) && delta < beta, "case {case}");
        let lhs = (&beta + &delta) / (&beta - &delta);
        assert!(lhs < r(1, 1) + &eps_bar / &two, "case {case}");
        // Strict floor bound.
        let first = r(2 * n0 as i64, 1) / (&eps_bar * (&beta - &delta));
        let second = r(4, 1) / &eps_bar;
        let floor_rat = r(floor as i64, 1);
        assert!(floor_rat > first && floor_rat > second, "case {case}");
        assert!(floor > n0, "case {case}");
        assert!(eps_bar < two, "case {case}");
        if let Some(span) = pattern.span() {
            assert!(eps_bar < eps, "case {case}");
            assert!(eps_bar < r(1, 2 * span as i64), "case {case}");
        }
    }
    println!("criterion 3 (certificate algebra, 1000 randomized chains): PASS");
}

fn desk_corpus() -> Vec<(SetSpec, ScalePattern, Rat)> {
    let specs = vec![
        evens(),
        SetSpec::residues(3, vec![0]).unwrap(),
        SetSpec::residues(5, vec![0, 2]).unwrap(),
        SetSpec::residues(12, vec![0, 1, 5]).unwrap(),
    ];
    let patterns = vec![pat(&[0, 1]), pat(&[0, 1, 2]), pat(&[1, 4, 9])];
    let accuracies = vec![r(3, 10), r(1, 10)];
    let mut corpus = Vec::new();
    for spec in &specs {
        for pattern in &patterns {
            for eps in &accuracies {
                corpus.push((spec.clone(), pattern.clone(), eps.clone()));
            }
        }
    }
    corpus
}

/// Criterion 4: certified searches succeed for every n in [N, N+2000]
/// across the whole desk corpus, and every witness re-verifies.
#[test]
fn criterion_4_certified_totality() {
    let start = Instant::now();
    let mut searches = 0u64;
    for (spec, pattern, eps) in desk_corpus() {
        let cert = build_certificate(&spec, &pattern, &eps, 10_000).unwrap();
        assert_eq!(cert.n0_basis, OnsetBasis::ClosedForm, "{spec} {pattern}");
        let n_lo = cert.scale_floor;
        for n in n_lo..=n_lo + 2_000 {
            let outcome = find_scale(
                &spec,
                &pattern,
                &eps,
                n,
                SearchMode::Certified {
                    eps_bar: cert.eps_bar.clone(),
                },
            )
            .unwrap();
            match outcome {
                SearchOutcome::Found(result) => {
                    assert!(result.verified, "{spec} {pattern} n={n}");
                    searches += 1;
                }
                SearchOutcome::NotFound { target_index } => {
                    panic!("{spec} {pattern}: failed at n={n}, target {target_index}")
                }
            }
        }
    }
    let elapsed = start.elapsed();
    println!(
        "criterion 4 (certified totality, {searches} searches over 24 configs): PASS in {elapsed:?}"
    );
}

/// Criterion 5: the window-count claim. For each certificate and
/// n in {N0, N0+1, 2*N0}, the number of integers in
/// {0..n} ∩ (n(t-eps_bar), n(t+eps_bar)) strictly exceeds n*eps_bar/2 at
/// interior, half-clipped, and fully clipped positions of t.
#[test]
fn criterion_5_window_count_claim() {
    for (spec, pattern, eps) in desk_corpus() {
        let cert = build_certificate(&spec, &pattern, &eps, 10_000).unwrap();
        let e = &cert.eps_bar;
        let positions = [
            r(0, 1),
            e / r(2, 1),
            r(1, 2),
            r(1, 1) - e / r(2, 1),
            r(1, 1),
        ];
        for n in [cert.window_floor, cert.window_floor + 1, 2 * cert.window_floor] {
            let n_rat = r(n as i64, 1);
            for t in &positions {
                // Independent count of the open window's integers.
                let lo = &n_rat * (t - e);
                let hi = &n_rat * (t + e);
                let r_min = (lo.floor() + r(1, 1)).max(r(0, 1));
                let hi_strict = if hi.is_integer() { &hi - r(1, 1) } else { hi.floor() };
                let r_max = hi_strict.min(n_rat.clone());
                let count = if r_max >= r_min {
                    &r_max - &r_min + r(1, 1)
                } else {
                    r(0, 1)
                };
                assert!(
                    &count * r(2, 1) > &n_rat * e,
                    "{spec} {pattern} n={n} t={t}: count {count}"
                );
            }
        }
    }
    println!("criterion 5 (window-count claim at N0, N0+1, 2N0): PASS");
}

/// Criterion 6: the certificate dominates the empirical minimum on every
/// desk configuration; slack is recorded in the comparison report.
#[test]
fn criterion_6_certified_dominates_empirical() {
    let mut slacks: Vec<i64> = Vec::new();
    for (spec, pattern, eps) in desk_corpus() {
        let report = compare_report(&spec, &pattern, &eps, 10_000, 1_000).unwrap();
        let cert = report.certificate.as_ref().expect("corpus certifies");
        let emp = report.empirical_n.expect("scales appear early");
        assert!(
            emp <= cert.scale_floor,
            "{spec} {pattern}: empirical {emp} exceeds certified {}",
            cert.scale_floor
        );
        assert!(report.failures.is_empty(), "{spec} {pattern}");
        let slack = report.slack.expect("slack recorded");
        assert_eq!(slack, cert.scale_floor as i64 - emp as i64);
        assert!(slack >= 0);
        slacks.push(slack);
    }
    let min = slacks.iter().min().unwrap();
    let max = slacks.iter().max().unwrap();
    println!(
        "criterion 6 (certified >= empirical on 24 configs, slack {min}..{max}): PASS"
    );
}

/// Independent exhaustive oracle over distinct member tuples.
fn oracle_scale_exists(spec: &SetSpec, pattern: &ScalePattern, eps: &Rat, n: u64) -> bool {
    let targets = frieze_core::TargetVector::<Int>::for_pattern(pattern);
    let members: Vec<u64> = (0..=n).filter(|&i| spec.contains(i as i64)).collect();
    let lists: Vec<Vec<u64>> = targets
        .values()
        .iter()
        .map(|t| {
            members
                .iter()
                .copied()
                .filter(|&m| (rat::of_u64s::<Int>(m, n) - t).abs() < *eps)
                .collect()
        })
        .collect();
    fn rec(lists: &[Vec<u64>], level: usize, chosen: &mut Vec<u64>) -> bool {
        if level == lists.len() {
            return true;
        }
        for &m in &lists[level] {
            if !chosen.contains(&m) {
                chosen.push(m);
                if rec(lists, level + 1, chosen) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    rec(&lists, 0, &mut Vec::new())
}

/// Criterion 7: loose mode agrees with brute force on success/failure
/// across 200 randomized configurations (n <= 200, k <= 3).
#[test]
fn criterion_7_brute_force_equivalence() {
    let mut rng = TestRng(0xBEEF);
    let accuracies = [r(1, 20), r(1, 10), r(1, 6), r(1, 4), r(3, 10)];
    let mut agreements = 0u32;
    for case in 0..200 {
        let spec = match rng.below(4) {
            0 => {
                let m = rng.range(2, 12);
                let residues: Vec<u64> = (0..m).filter(|_| rng.below(3) == 0).collect();
                let residues = if residues.is_empty() { vec![0] } else { residues };
                SetSpec::residues(m, residues).unwrap()
            }
            1 => {
                let len = rng.range(1, 12);
                let mut elements: Vec<i64> =
                    (0..len).map(|_| rng.below(200) as i64).collect();
                elements.sort_unstable();
                elements.dedup();
                SetSpec::explicit(elements).unwrap()
            }
            2 => SetSpec::bernoulli(Ratio::new(rng.range(1, 4), 8), rng.next()).unwrap(),
            _ => SetSpec::union(
                SetSpec::residues(rng.range(3, 9), vec![0]).unwrap(),
                SetSpec::explicit(vec![rng.below(50) as i64 + 1]).unwrap(),
            ),
        };
        let k = rng.range(1, 3);
        let mut values = vec![rng.below(10) as i64];
        for _ in 1..k {
            let last = *values.last().unwrap();
            values.push(last + rng.range(1, 10) as i64);
        }
        let pattern = ScalePattern::new(values).unwrap();
        let eps = accuracies[rng.below(5) as usize].clone();
        let n = rng.range(k, 200);

        let got = find_scale(&spec, &pattern, &eps, n, SearchMode::Loose).unwrap();
        let want = oracle_scale_exists(&spec, &pattern, &eps, n);
        assert_eq!(
            got.is_found(),
            want,
            "case {case}: {spec} {pattern} eps={eps} n={n}"
        );
        if let SearchOutcome::Found(result) = got {
            assert!(result.verified, "case {case}");
        }
        agreements += 1;
    }
    assert_eq!(agreements, 200);
    println!("criterion 7 (brute-force equivalence, 200 randomized configs): PASS");
}

/// Criterion 8: the evens contain no exact copy of {0, 1} anywhere in
/// [0, 10^4], yet approximate scales of it exist from a small threshold
/// on — the content of the guarantee.
#[test]
fn criterion_8_counterexample_reproduction() {
    let pattern = pat(&[0, 1]);
    assert_eq!(exact_copy_exists(&evens(), &pattern, 0, 10_000), None);

    let emp = minimal_empirical_n::<Int>(&evens(), &pattern, &r(1, 10), 100, 10_000)
        .unwrap()
        .expect("approximate scales exist");
    assert_eq!(emp, 10);

    // Brute-force cross-check of the boundary: 9 fails, [10, 110] succeed.
    for n in 2..=110u64 {
        let want = oracle_scale_exists(&evens(), &pattern, &r(1, 10), n);
        if n == 9 {
            assert!(!want);
        }
        if (10..=110).contains(&n) {
            assert!(want, "n = {n}");
        }
    }
    println!("criterion 8 (no exact copy, empirical threshold 10): PASS");
}

/// Criterion 9: the compare subcommand is byte-deterministic.
#[test]
fn criterion_9_compare_determinism() {
    let exe = env!("CARGO_BIN_EXE_frieze");
    let run = || {
        std::process::Command::new(exe)
            .args([
                "compare",
                "--set",
                "bernoulli(0.3;42)",
                "--pattern",
                "0,1,2",
                "--epsilon",
                "0.1",
                "--window",
                "200",
                "--horizon",
                "100000",
            ])
            .output()
            .expect("spawning the binary")
    };
    let a = run();
    let b = run();
    assert!(a.status.success());
    assert!(b.status.success());
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.starts_with("# set bernoulli(3/10;42)\n"));
    assert!(text.contains("n,success,r_list,max_residual_num,max_residual_den"));
    println!(
        "criterion 9 (byte-identical compare CSV, {} bytes): PASS",
        b.stdout.len()
    );
}
