//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! (run with `cargo test --test acceptance -- --nocapture` to see them all).

use dioph_core::bilinear::{hb_decompose, recombine, HbContext};
use dioph_core::dd::Dd;
use dioph_core::exppairs::{
    apply_word, gk_balance, process_a, process_b, weyl_shift_check, BalanceProblem, ExponentPair,
};
use dioph_core::expsum::{check_s_minus_i, eval_u_lambda, SumKind};
use dioph_core::moments::{count_near_solutions, moment, moment_oracle};
use dioph_core::solver::{
    b1_weighted, main_term, scan_exceptional, search_six, search_three, weighted_count, McConfig,
};
use dioph_core::{
    build_table, derive_params, EpsPreset, Mode, PhiBand, ProblemParams, SmoothingKernel,
};
use num::complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(id: u32, name: &str, pass: bool) {
    println!(
        "ACCEPTANCE {:02} {:<42} {}",
        id,
        name,
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {id} ({name}) failed");
}

fn ternary_at_scale(c: f64, x_scale: f64) -> ProblemParams {
    let n = 1.5 * Dd::pow_f64(x_scale, c).to_f64();
    derive_params(c, 0.01, n, Mode::Ternary, EpsPreset::LogX2Inv, false).unwrap()
}

#[test]
fn criterion_01_exponent_pair_reproduction() {
    let a3 = apply_word("A3", &ExponentPair::from_ints(1, 2, 1, 2).unwrap()).unwrap();
    let chain = apply_word("ABABA2B", &ExponentPair::trivial()).unwrap();
    let pass = a3 == ExponentPair::from_ints(1, 30, 26, 30).unwrap()
        && chain == ExponentPair::from_ints(1, 11, 3, 4).unwrap();
    report(1, "exponent pair word reproduction", pass);
}

#[test]
fn criterion_02_involution_and_validity() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut pass = true;
    for _ in 0..1000 {
        let kd: i64 = rng.gen_range(1..=60);
        let kn: i64 = rng.gen_range(0..=kd);
        let ld: i64 = rng.gen_range(1..=60);
        let ln: i64 = rng.gen_range(0..=ld);
        let p = ExponentPair::from_ints(kn, 2 * kd, ld + ln, 2 * ld).unwrap();
        // A total and valid (constructor enforces invariants)
        let _ = process_a(&p);
        // B valid and an involution
        let q = match process_b(&p) {
            Ok(q) => q,
            Err(_) => {
                pass = false;
                break;
            }
        };
        if process_b(&q).unwrap() != p {
            pass = false;
            break;
        }
    }
    report(2, "A/B validity and B involution (1000 pairs)", pass);
}

#[test]
fn criterion_03_kernel_bound() {
    let params = ternary_at_scale(1.5, 1e4);
    let kernel = SmoothingKernel::for_params(&params).unwrap();
    let grid: Vec<f64> = (0..1000)
        .map(|i| 1e-3 * 10f64.powf(9.0 * i as f64 / 999.0))
        .collect();
    let rep = kernel.verify_bound(&grid).unwrap();
    let pass = rep.pass && kernel.phi_hat(0.0) == 2.0 * kernel.a;
    report(3, "kernel Fourier envelope on log grid", pass);
}

#[test]
fn criterion_04_heath_brown_identity() {
    let mut pass = true;
    for &x_scale in &[500.0, 1000.0, 2000.0] {
        let comps = hb_decompose(x_scale).unwrap();
        let ctx = HbContext::new(x_scale).unwrap();
        for &c in &[1.5, 1.8, 2.05] {
            let params = ternary_at_scale(c, x_scale);
            let freqs = [0.0, 1e-4, 1e-3, 0.5 * params.tau, params.tau];
            for &x in &freqs {
                let got = recombine(&comps, &ctx, x, c);
                let want = eval_u_lambda(&params, x).unwrap();
                let rel = (got - want).norm() / want.norm().max(1.0);
                if rel > 1e-6 {
                    eprintln!("X={x_scale}, c={c}, x={x}: rel dev {rel}");
                    pass = false;
                }
            }
        }
    }
    report(4, "von Mangoldt decomposition recombines", pass);
}

#[test]
fn criterion_05_counting_oracle_equivalence() {
    fn brute(m: u64, c: f64, gamma: f64) -> u64 {
        let powers: Vec<f64> = (m + 1..=2 * m)
            .map(|n| Dd::pow_u64(n, c).to_f64())
            .collect();
        let mut count = 0;
        for &a in &powers {
            for &b in &powers {
                for &d in &powers {
                    for &e in &powers {
                        if ((a + b) - (d + e)).abs() < gamma {
                            count += 1;
                        }
                    }
                }
            }
        }
        count
    }
    let mut pass = count_near_solutions(2, 2.0, 0.5).unwrap() == 6;
    for &m in &[2u64, 4, 8, 16] {
        for &c in &[1.3, 1.5, 1.9, 2.05] {
            for &gamma in &[0.1, 1.0, 10.0] {
                if count_near_solutions(m, c, gamma).unwrap() != brute(m, c, gamma) {
                    eprintln!("mismatch at M={m}, c={c}, gamma={gamma}");
                    pass = false;
                }
            }
        }
    }
    report(5, "near-equality count equals brute force", pass);
}

#[test]
fn criterion_06_moment_oracle() {
    // L^2 moment at X = 500, c = 1.5
    let params = ternary_at_scale(1.5, 500.0);
    let table = build_table(params.x / 2.0, params.x, params.c).unwrap();
    let rep2 = moment(&params, &table, SumKind::S, 2, params.tau).unwrap();
    let oracle2 = moment_oracle(&table, 2, params.tau).unwrap();
    let dev2 = (rep2.estimate - oracle2).abs() / oracle2;
    // L^4 moment on a 100-prime table
    let all = dioph_core::primes::primes_in(300.0, 2000.0);
    let hi = all[99] as f64;
    let table100 = build_table(300.0, hi, 1.5).unwrap();
    assert_eq!(table100.len(), 100);
    let params4 = ternary_at_scale(1.5, 1000.0);
    let rep4 = moment(&params4, &table100, SumKind::S, 4, params4.tau).unwrap();
    let oracle4 = moment_oracle(&table100, 4, params4.tau).unwrap();
    let dev4 = (rep4.estimate - oracle4).abs() / oracle4;
    let pass = dev2 <= 0.01 && dev4 <= 0.02;
    if !pass {
        eprintln!("L2 dev {dev2}, L4 dev {dev4}");
    }
    report(6, "moment quadrature matches sinc oracle", pass);
}

#[test]
fn criterion_07_s_minus_i_trend() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut norms = Vec::new();
    for &x_scale in &[1e3, 1e4, 1e5] {
        let params = ternary_at_scale(1.5, x_scale);
        let table = build_table(params.x / 2.0, params.x, params.c).unwrap();
        let xs: Vec<f64> = (0..50)
            .map(|_| params.tau * rng.gen_range(-1.0..1.0))
            .collect();
        let rep = check_s_minus_i(&params, &table, &xs).unwrap();
        norms.push(rep.normalized_by_x);
    }
    let pass = norms[0] >= norms[1] && norms[1] >= norms[2];
    if !pass {
        eprintln!("normalized deviations: {norms:?}");
    }
    report(7, "S-I deviation non-increasing in X", pass);
}

#[test]
fn criterion_08_weyl_inequality() {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let mut pass = true;
    'outer: for _ in 0..1000 {
        let n = rng.gen_range(1..=64usize);
        let z: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        for q in 1..=n as u64 {
            let (lhs, rhs) = weyl_shift_check(&z, q).unwrap();
            if lhs > rhs + 1e-9 * lhs.abs().max(1.0) {
                eprintln!("violation: n={n}, q={q}, lhs={lhs}, rhs={rhs}");
                pass = false;
                break 'outer;
            }
        }
    }
    report(8, "shift inequality holds (1000 sequences)", pass);
}

#[test]
fn criterion_09_term_balancing() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let mut pass = true;
    for _ in 0..100 {
        let m = rng.gen_range(1..=3usize);
        let n = rng.gen_range(1..=3usize);
        let mut terms = |k: usize| {
            (0..k)
                .map(|_| {
                    (
                        10f64.powf(rng.gen_range(-3.0f64..3.0)),
                        rng.gen_range(0.1..3.0),
                    )
                })
                .collect::<Vec<_>>()
        };
        let rising = terms(m);
        let falling = terms(n);
        let h1 = 10f64.powf(rng.gen_range(-2.0f64..2.0));
        let prob = BalanceProblem {
            rising,
            falling,
            h1,
            h2: h1 * 10f64.powf(rng.gen_range(0.0f64..4.0)),
        };
        let res = gk_balance(&prob).unwrap();
        if res.value > (m + n) as f64 * res.rhs * (1.0 + 1e-9) {
            eprintln!("balance failure: {prob:?} -> {res:?}");
            pass = false;
        }
    }
    report(9, "balancing minimum within (m+n) * rhs", pass);
}

#[test]
fn criterion_10_solver_correctness() {
    let mut pass = true;
    // the named triple
    let table11 = build_table(1.0, 11.0, 1.5).unwrap();
    let reps = search_three(&table11, 29.0, 0.5);
    pass &= reps.iter().any(|r| r.primes == vec![3, 3, 7]);

    // randomized small instances vs exhaustive search
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let t50 = build_table(1.0, 230.0, 1.7).unwrap();
    assert!(t50.len() <= 50);
    let pc_max = t50.entries.last().unwrap().pc;
    for _ in 0..25 {
        let r = rng.gen::<f64>() * 3.2 * pc_max;
        let eps = 10f64.powf(rng.gen_range(-3.0f64..0.5));
        let fast: Vec<Vec<u64>> = search_three(&t50, r, eps)
            .iter()
            .map(|x| x.primes.clone())
            .collect();
        let mut brute = Vec::new();
        let n = t50.len();
        for i in 0..n {
            for j in i..n {
                for k in j..n {
                    let s = Dd::pow_u64(t50.entries[i].p, 1.7)
                        + Dd::pow_u64(t50.entries[j].p, 1.7)
                        + Dd::pow_u64(t50.entries[k].p, 1.7);
                    if (s - Dd::from_f64(r)).to_f64().abs() < eps {
                        brute.push(vec![t50.entries[i].p, t50.entries[j].p, t50.entries[k].p]);
                    }
                }
            }
        }
        if fast != brute {
            eprintln!("triple mismatch at r={r}, eps={eps}");
            pass = false;
        }
    }
    let t12 = build_table(1.0, 37.0, 2.05).unwrap();
    assert!(t12.len() <= 12);
    let pc_max12 = t12.entries.last().unwrap().pc;
    for _ in 0..6 {
        let target = rng.gen::<f64>() * 6.2 * pc_max12;
        let eps = 10f64.powf(rng.gen_range(-2.0f64..1.0));
        let mut fast: Vec<Vec<u64>> = search_six(&t12, target, eps, true)
            .unwrap()
            .iter()
            .map(|x| x.primes.clone())
            .collect();
        fast.sort();
        let mut brute = Vec::new();
        let n = t12.len();
        for a in 0..n {
            for b in a..n {
                for c in b..n {
                    for d in c..n {
                        for e in d..n {
                            for f in e..n {
                                let mut s = Dd::ZERO;
                                for &i in &[a, b, c, d, e, f] {
                                    s = s + Dd::pow_u64(t12.entries[i].p, 2.05);
                                }
                                if (s - Dd::from_f64(target)).to_f64().abs() < eps {
                                    brute.push(
                                        [a, b, c, d, e, f]
                                            .iter()
                                            .map(|&i| t12.entries[i].p)
                                            .collect::<Vec<u64>>(),
                                    );
                                }
                            }
                        }
                    }
                }
            }
        }
        brute.sort();
        if fast != brute {
            eprintln!("six mismatch at target={target}, eps={eps}");
            pass = false;
        }
    }
    report(10, "searches match exhaustive oracles", pass);
}

#[test]
fn criterion_11_ternary_scan_desk_scale() {
    let mut fractions = Vec::new();
    for &n in &[1e5, 1e6, 1e7] {
        let params = derive_params(1.5, 0.01, n, Mode::Ternary, EpsPreset::LogNInv, false).unwrap();
        let rep = scan_exceptional(&params, 200, 2024).unwrap();
        fractions.push(rep.exceptional_fraction);
    }
    println!("  exceptional fractions at N = 1e5/1e6/1e7: {fractions:?}");
    if fractions[2] > 0.1 {
        // Known structural shortfall at this scale: the window's maximum
        // attainable sum is exactly 2N, so targets in the top quintile of
        // (N, 2N] are starved of in-window triples; the fraction first
        // drops below 0.1 around N ~ 1e8. The searches themselves are
        // cross-validated against exhaustive enumeration in criterion 10.
        println!("  note: misses concentrate in the top deciles of (N, 2N]");
    }
    let pass = fractions[2] <= 0.1 && fractions[0] >= fractions[1] && fractions[1] >= fractions[2];
    report(11, "three-prime solvability scan", pass);
}

#[test]
fn criterion_12_senary_search_desk_scale() {
    let mut pass = true;
    for i in 0..10u32 {
        let n = 9.6e7 + 1e6 * i as f64;
        let params = derive_params(2.05, 0.01, n, Mode::Senary, EpsPreset::LogNInv, false).unwrap();
        let table = build_table(params.x / 2.0, params.x, params.c).unwrap();
        let found = search_six(&table, n, params.eps, false).unwrap();
        if found.is_empty() {
            eprintln!("no six-prime representation at N = {n}");
            pass = false;
        }
    }
    report(12, "six-prime representation near 1e8", pass);
}

#[test]
fn criterion_13_main_term_shape() {
    let mut ratios = Vec::new();
    let mut pass = true;
    for &x_scale in &[500.0, 1000.0, 2000.0] {
        let n = 5.0 * Dd::pow_f64(x_scale, 1.8).to_f64();
        let params = derive_params(1.8, 0.01, n, Mode::Senary, EpsPreset::LogX2Inv, false).unwrap();
        let kernel = SmoothingKernel::for_params(&params).unwrap();
        let band = PhiBand::build(&kernel, 1024);
        let est = main_term(&params, &band, n, 6, &McConfig::default()).unwrap();
        if !(est.estimate > 0.0 && est.std_error <= 0.02 * est.estimate) {
            eprintln!(
                "X={x_scale}: estimate {} se {}",
                est.estimate, est.std_error
            );
            pass = false;
        }
        let shape = params.eps * Dd::pow_f64(params.x, 6.0 - params.c).to_f64();
        ratios.push(est.estimate / shape);
    }
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().cloned().fold(0.0f64, f64::max);
    pass &= lo > 0.0 && hi / lo <= 2.0;
    println!("  main-term shape ratios: {ratios:?}");
    report(13, "smoothed main-term shape stable", pass);
}

#[test]
fn criterion_14_sandwich_property() {
    let params = ternary_at_scale(1.5, 1e4);
    let kernel = SmoothingKernel::for_params(&params).unwrap();
    let band = PhiBand::build(&kernel, 2048);
    let table = build_table(params.x / 2.0, params.x, params.c).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(314);
    let mut pass = true;
    let mut nonzero = 0;
    for _ in 0..50 {
        let r = params.n_target * (1.0 + rng.gen::<f64>());
        let lo = weighted_count(&table, r, kernel.plateau(), 3).unwrap();
        let mid = b1_weighted(&table, &band, r);
        let hi = weighted_count(&table, r, kernel.support(), 3).unwrap();
        if !(lo <= mid + 1e-9 && mid <= hi + 1e-9) {
            eprintln!("sandwich violated at R={r}: {lo} / {mid} / {hi}");
            pass = false;
        }
        if hi > 0.0 {
            nonzero += 1;
        }
    }
    pass &= nonzero > 0;
    report(14, "smoothed count sandwiched by sharp counts", pass);
}
