//! Acceptance criteria, one test per criterion.
//!
//! Every test prints a single `criterion N: PASS|FAIL ...` line before
//! asserting, so `cargo test --test acceptance -- --nocapture` gives a
//! compact verdict table.

use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use robust_diff::high_gain::{self, ultimate_bound, PeakingOptions};
use robust_diff::linalg::{expm_scaling_squaring, Eigenstructure, Mat2};
use robust_diff::scenario::{self, builtin_scenario, sweep_eps_gain};
use robust_diff::sliding_mode::{st_field, StDiffState, StGains};
use robust_diff::{
    build_error_system, check_hurwitz, compute_peaking_constants, hg_step, optimal_eps_gain,
    HgDiffState, HgParams, Method, Scenario, StepInput,
};

fn verdict(id: u32, pass: bool, detail: impl AsRef<str>) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("criterion {id}: {tag} {}", detail.as_ref());
    assert!(pass, "criterion {id} failed: {}", detail.as_ref());
}

fn cli(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_robust-diff"))
        .args(args)
        .output()
        .expect("spawn cli");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
    )
}

fn field(stdout: &str, key: &str) -> f64 {
    stdout
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key}: ")))
        .unwrap_or_else(|| panic!("`{key}` missing from output:\n{stdout}"))
        .trim()
        .parse()
        .unwrap()
}

fn scenario_named(name: &str) -> Scenario {
    builtin_scenario(name).unwrap_or_else(|| panic!("no bundled scenario {name}"))
}

fn steady_sup(s: &Scenario) -> f64 {
    let trace = scenario::run(s).unwrap();
    scenario::evaluate(&trace, s).unwrap().steady_sup_error
}

#[test]
fn criterion_1_tune_st_l2() {
    let (code, out) = cli(&["tune", "st", "--L", "2"]);
    let (l1, l2) = (field(&out, "lambda1"), field(&out, "lambda2"));
    let pass = code == 0 && (l1 - 2.1213).abs() <= 5e-4 && (l2 - 2.2).abs() <= 1e-9;
    verdict(
        1,
        pass,
        format!("lambda1={l1} (2.1213 +- 5e-4) lambda2={l2} (2.2 +- 1e-9)"),
    );
}

#[test]
fn criterion_2_optimal_eps() {
    let sys = build_error_system(2.0, 1.0).unwrap();
    let c = compute_peaking_constants(&sys, 1e-8).unwrap();
    let eps = optimal_eps_gain(c.p_const, c.q_const, 1.0, 0.04).unwrap();

    // closed form for the double pole at -1
    let (p_exact, q_exact) = (2.0, 2.0 / std::f64::consts::E);
    let eps_exact = (q_exact * 0.04 / p_exact).sqrt();

    let (code, out) = cli(&[
        "tune",
        "hg",
        "--alpha1",
        "2",
        "--alpha2",
        "1",
        "--M",
        "1",
        "--noise-bound",
        "0.04",
    ]);
    let eps_cli = field(&out, "eps_star");

    let pass = (eps - 0.1213).abs() <= 1e-3
        && (c.p_const - p_exact).abs() <= 1e-8
        && (c.q_const - q_exact).abs() <= 1e-8
        && (eps - eps_exact).abs() <= 1e-8
        && code == 0
        && (eps_cli - 0.1213).abs() <= 1e-3;
    verdict(
        2,
        pass,
        format!(
            "eps*={eps:.6} cli={eps_cli} P={:.10} Q={:.10} (closed form 2, 2/e)",
            c.p_const, c.q_const
        ),
    );
}

#[test]
fn criterion_3_slm2_noisy_bound() {
    let s = scenario_named("SLM-2");
    assert_eq!(s.dt, 1e-4);
    assert_eq!(s.horizon, 20.0);
    let trace = scenario::run(&s).unwrap();
    let r = scenario::evaluate(&trace, &s).unwrap();
    let bound = 1.8 * 2f64.sqrt() * 0.04f64.sqrt();
    verdict(
        3,
        r.steady_sup_error <= 0.5091,
        format!(
            "SLM-2 steady sup error {:.6} vs 0.5091 (computed bound {bound:.6})",
            r.steady_sup_error
        ),
    );
}

#[test]
fn criterion_4_hg2_noisy_bound() {
    let s = scenario_named("HG-2");
    assert_eq!(s.dt, 1e-4);
    assert_eq!(s.horizon, 20.0);
    let trace = scenario::run(&s).unwrap();
    let r = scenario::evaluate(&trace, &s).unwrap();
    verdict(
        4,
        r.steady_sup_error <= 0.4852,
        format!("HG-2 steady sup error {:.6} vs 0.4852", r.steady_sup_error),
    );
}

#[test]
fn criterion_5_slm1_noise_free() {
    let s = scenario_named("SLM-1");
    let e = steady_sup(&s);
    let e_half = steady_sup(&s.clone().with_dt(s.dt / 2.0).unwrap());
    verdict(
        5,
        e <= 0.05 && e_half <= e + 1e-6,
        format!("SLM-1 sup error {e:.6} at dt=1e-4 (<= 0.05), {e_half:.6} at dt/2"),
    );
}

#[test]
fn criterion_6_hg1_non_asymptotic() {
    let s = scenario_named("HG-1");
    let e = steady_sup(&s);
    let grid = [0.2, 0.12, 0.08, 0.04];
    let errs: Vec<f64> = grid
        .iter()
        .map(|&eps| steady_sup(&s.clone().with_eps_gain(eps).unwrap()))
        .collect();
    let decreasing = errs.windows(2).all(|w| w[1] < w[0]);
    verdict(
        6,
        e > 1e-6 && e < 0.2 && decreasing,
        format!("HG-1 sup error {e:.6} in (1e-6, 0.2); eps {grid:?} -> {errs:.4?}"),
    );
}

#[test]
fn criterion_7_balance_threshold() {
    let s = scenario_named("HG-2");
    let star = s.high_gain_params().unwrap().eps_gain;
    let grid = [star / 4.0, star / 2.0, star, 2.0 * star, 4.0 * star];
    let rows = sweep_eps_gain(&s, &grid).unwrap();
    assert_eq!(rows.len(), 5);
    let at_star = rows[2];
    let eta_min = rows.iter().all(|r| at_star.eta_bound <= r.eta_bound);
    let small_side = rows[0].steady_sup_error >= at_star.steady_sup_error;
    verdict(
        7,
        eta_min && small_side,
        format!(
            "eta {:.4?} min at eps*={star:.6}; error at eps*/4 {:.4} >= at eps* {:.4}",
            rows.iter().map(|r| r.eta_bound).collect::<Vec<_>>(),
            rows[0].steady_sup_error,
            at_star.steady_sup_error
        ),
    );
}

// ----- criterion 8 ------------------------------------------------------------

fn hurwitz_by_roots(a1: f64, a2: f64) -> bool {
    let disc = a1 * a1 - 4.0 * a2;
    let max_re = if disc >= 0.0 {
        (-a1 + disc.sqrt()) / 2.0
    } else {
        -a1 / 2.0
    };
    max_re < 0.0
}

fn hurwitz_mismatches(rng: &mut ChaCha8Rng) -> usize {
    (0..10_000)
        .filter(|_| {
            let (a1, a2) = (rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
            check_hurwitz(a1, a2) != hurwitz_by_roots(a1, a2)
        })
        .count()
}

fn convexity_violations(rng: &mut ChaCha8Rng) -> usize {
    let mut violations = 0;
    for _ in 0..1_000 {
        let p = rng.gen_range(0.01..10.0);
        let q = rng.gen_range(0.01..10.0);
        let m = rng.gen_range(0.01..10.0);
        let noise = rng.gen_range(1e-4..1.0);
        let c1 = rng.gen_range(0.0..1.0);
        let star = optimal_eps_gain(p, q, m, noise).unwrap();
        let eta_star = ultimate_bound(c1, star, p, q, m, noise).unwrap();
        for _ in 0..100 {
            let eps = star * 10f64.powf(rng.gen_range(-3.0..3.0));
            let eta = ultimate_bound(c1, eps, p, q, m, noise).unwrap();
            if eta_star > eta * (1.0 + 1e-12) {
                violations += 1;
            }
        }
    }
    violations
}

fn st_symmetry_violations(rng: &mut ChaCha8Rng) -> usize {
    let mut violations = 0;
    for _ in 0..1_000 {
        let gains =
            StGains::explicit(rng.gen_range(0.1..20.0), rng.gen_range(0.1..20.0), 0.0).unwrap();
        let y = rng.gen_range(-10.0..10.0);
        let s0 = rng.gen_range(-10.0..10.0);
        let z1 = rng.gen_range(-10.0..10.0);
        let state = |s0: f64, z1: f64| StDiffState {
            z0_hat: y + s0,
            z1_hat: z1,
            v_last: 0.0,
        };
        let f = st_field(&state(s0, z1), &gains, y);
        let g = st_field(
            &StDiffState {
                z0_hat: -(y + s0),
                z1_hat: -z1,
                v_last: 0.0,
            },
            &gains,
            -y,
        );
        if (f.dz0 + g.dz0).abs() > 1e-12 || f.dz1 != -g.dz1 || (f.v + g.v).abs() > 1e-12 {
            violations += 1;
        }
        let eq = st_field(&state(0.0, 0.0), &gains, y);
        if (eq.dz0, eq.dz1, eq.v) != (0.0, 0.0, 0.0) {
            violations += 1;
        }
        // away from equilibrium the field is nonzero
        let off = st_field(&state(s0, z1), &gains, y);
        if s0 != 0.0 && off.dz1 == 0.0 {
            violations += 1;
        }
    }
    violations
}

/// Global error of RK4 on the observer driven by `sin t`, against a fine
/// reference, at `dt` and `dt / 2`.
fn rk4_order_ratio() -> f64 {
    let params = HgParams::new(2.0, 1.0, 0.5).unwrap();
    let horizon = 2.0;
    let solve = |n: usize| {
        let dt = horizon / n as f64;
        let mut x = HgDiffState::initial(0.3);
        for k in 0..n {
            let input = StepInput::sample(f64::sin, k as f64 * dt, dt);
            x = hg_step(&x, &params, input, dt, Method::Rk4).unwrap().state;
        }
        x
    };
    let reference = solve(20_000);
    let err = |n: usize| {
        let x = solve(n);
        (x.x1_hat - reference.x1_hat)
            .abs()
            .max((x.x2_hat - reference.x2_hat).abs())
    };
    err(40) / err(80)
}

/// Trapezoid rule at `h = 1e-5` over `[0, 30]` with `exp(A h)` from
/// scaling and squaring, propagated step by step.
fn brute_force_constants(alpha1: f64, alpha2: f64) -> [f64; 4] {
    let a = Mat2::new(-alpha1, 1.0, -alpha2, 0.0);
    let h = 1e-5;
    let n = 3_000_000;
    let step = expm_scaling_squaring(a.scale(h));
    let integrand = |e: &Mat2| {
        // columns: e B = second column; e B_bar = e [-a1, -a2]
        let eb = [e.0[0][1], e.0[1][1]];
        let ebb = [
            -alpha1 * e.0[0][0] - alpha2 * e.0[0][1],
            -alpha1 * e.0[1][0] - alpha2 * e.0[1][1],
        ];
        [eb[0].abs(), ebb[0].abs(), eb[1].abs(), ebb[1].abs()]
    };
    let mut e = Mat2::IDENTITY;
    let mut prev = integrand(&e);
    let mut acc = [0.0; 4];
    for _ in 0..n {
        e = e * step;
        let cur = integrand(&e);
        for k in 0..4 {
            acc[k] += 0.5 * h * (prev[k] + cur[k]);
        }
        prev = cur;
    }
    acc
}

/// 20 Hurwitz pairs with spectral abscissa <= -1: 7 real-distinct,
/// 7 complex, 6 repeated.
fn oracle_pairs(rng: &mut ChaCha8Rng) -> Vec<(f64, f64)> {
    let mut pairs = Vec::new();
    for _ in 0..7 {
        let l1: f64 = rng.gen_range(-8.0..-1.0);
        let l2: f64 = rng.gen_range(-8.0..-1.0);
        let l2 = if (l1 - l2).abs() < 0.1 { l2 - 0.5 } else { l2 };
        pairs.push((-(l1 + l2), l1 * l2));
    }
    for _ in 0..7 {
        let sigma: f64 = rng.gen_range(-4.0..-1.0);
        let omega: f64 = rng.gen_range(0.3..6.0);
        pairs.push((-2.0 * sigma, sigma * sigma + omega * omega));
    }
    for _ in 0..6 {
        let sigma: f64 = rng.gen_range(-5.0..-1.0);
        pairs.push((-2.0 * sigma, sigma * sigma));
    }
    pairs
}

fn quadrature_oracle_gap(rng: &mut ChaCha8Rng) -> (f64, [usize; 3]) {
    let pairs = oracle_pairs(rng);
    let mut branches = [0; 3];
    let mut worst = 0.0f64;
    for (a1, a2) in pairs {
        let sys = build_error_system(a1, a2).unwrap();
        match sys.eigenstructure() {
            Eigenstructure::RealDistinct { .. } => branches[0] += 1,
            Eigenstructure::ComplexPair { .. } => branches[1] += 1,
            Eigenstructure::Repeated { .. } => branches[2] += 1,
        }
        let c = high_gain::compute_peaking_constants_with(
            &sys,
            PeakingOptions {
                tolerance: 1e-9,
                ..PeakingOptions::default()
            },
        )
        .unwrap();
        let oracle = brute_force_constants(a1, a2);
        let got = [c.upsilon, c.phi, c.p_const, c.q_const];
        for k in 0..4 {
            worst = worst.max((got[k] - oracle[k]).abs());
        }
    }
    (worst, branches)
}

#[test]
fn criterion_8_property_suites() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0008);
    let hurwitz = hurwitz_mismatches(&mut rng);
    let convexity = convexity_violations(&mut rng);
    let symmetry = st_symmetry_violations(&mut rng);
    let ratio = rk4_order_ratio();
    let (gap, branches) = quadrature_oracle_gap(&mut rng);

    let pass = hurwitz == 0
        && convexity == 0
        && symmetry == 0
        && (12.0..=20.0).contains(&ratio)
        && gap <= 1e-6
        && branches.iter().all(|&b| b > 0);
    verdict(
        8,
        pass,
        format!(
            "hurwitz mismatches {hurwitz}/10000, convexity violations {convexity}/100000, \
             st field violations {symmetry}/1000, rk4 ratio {ratio:.3}, \
             quadrature vs oracle max gap {gap:.2e} over branches {branches:?}"
        ),
    );
}
