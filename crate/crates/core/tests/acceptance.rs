//! Acceptance suite. Runs without the libtest harness so every criterion prints one
//! `PASS`/`FAIL` line even when nothing fails; the process exits nonzero if any criterion fails.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use silab_core::estimator::{estimate, matrix_pair, matrix_single, Direction};
use silab_core::exec::Execution;
use silab_core::kernels::make_default_kernel;
use silab_core::lower_bound::{check_family, QUAD_TOL};
use silab_core::noise_field::{derive_seed, simulate, simulate_deterministic, DiscretizedField, Field, GridSpec};
use silab_core::oracle::{level, oracle_bandwidth, BiasProfile, ProfileOptions};
use silab_core::risk::{
    bias_inequalities, global_risk, log_log_fit, lp_bias_scaling, noise_scale, oracle_ratio_study, rate_fit,
    Procedure, Quadrature, Regime, RiskConfig,
};
use silab_core::selector::{select_estimate, SelectorConfig};
use silab_core::signals::{
    hypothesis_family, make_hoelder, make_inhomogeneous, single_index_field, verify_nikolskii, HoelderSpec,
    NikolskiiSpec, Shape,
};
use silab_core::ProductKernel;

struct Outcome {
    passed: bool,
    detail: String,
}

fn exec() -> Execution {
    Execution::Parallel
}

fn c1_matrices() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst_single: f64 = 0.0;
    let mut pair_ok = true;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for _ in 0..10_000 {
        let theta = Direction::from_angle(rng.random_range(0.0..std::f64::consts::TAU));
        let nu = Direction::from_angle(rng.random_range(0.0..std::f64::consts::TAU));
        let h = 2f64.powf(-rng.random_range(0.0..12.0));
        let d = matrix_single(&theta, h).det();
        worst_single = worst_single.max((d * h - 1.0).abs());
        let dp = matrix_pair(&theta, &nu, h).det() * h;
        lo = lo.min(dp);
        hi = hi.max(dp);
        pair_ok &= (0.25..=0.5).contains(&dp);
    }
    Outcome {
        passed: worst_single <= 1e-12 && pair_ok,
        detail: format!("max |h·det E_θ,h − 1| = {worst_single:.2e}; h·det E_pair in [{lo:.6}, {hi:.6}]"),
    }
}

fn c2_variance() -> Outcome {
    let grid = GridSpec::with_n(256).unwrap();
    let kernel = ProductKernel::default();
    let eps = 0.1;
    let hs = [1.0, 0.5, 0.25];
    let theta = Direction::new(1.0, 0.0).unwrap();
    let zero = Field::zero();
    let reps = 10_000;
    let draws = exec().map_range(reps, |i| {
        let obs = simulate(&zero, eps, grid, derive_seed(2, i as u64)).unwrap();
        hs.map(|h| estimate(&obs, &kernel, &theta, h, [0.0, 0.0]))
    });
    let l2sq = make_default_kernel().l2_norm().powi(2);
    let mut passed = true;
    let mut parts = Vec::new();
    for (k, &h) in hs.iter().enumerate() {
        let mean = draws.iter().map(|d| d[k]).sum::<f64>() / reps as f64;
        let var = draws.iter().map(|d| (d[k] - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
        let target = l2sq * l2sq * eps * eps / h;
        let rel = var / target - 1.0;
        passed &= rel.abs() <= 0.05;
        parts.push(format!("h={h}: var/target−1 = {rel:+.4}"));
    }
    Outcome { passed, detail: parts.join("; ") }
}

fn c3_deterministic() -> Outcome {
    let grid = GridSpec::with_n(256).unwrap();
    let c = 0.7;
    let obs = simulate_deterministic(&Field::constant(c), grid);
    let config = SelectorConfig::new(ProductKernel::default(), 0.05).with_execution(exec());
    let (est, trace) = select_estimate(&obs, [0.1, -0.2], &config);
    let max_r = trace.r_values.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
    Outcome {
        passed: trace.h_hat == 1.0 && (est - c).abs() <= 1e-8 && max_r < 0.0,
        detail: format!("ĥ = {}, |estimate − c| = {:.2e}, max R = {max_r:.3e}", trace.h_hat, (est - c).abs()),
    }
}

fn c4_hoelder_bias() -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for beta in [0.5, 1.0] {
        let link = make_hoelder(&HoelderSpec::cusp(beta, 1.0)).unwrap();
        let profile = BiasProfile::new(make_default_kernel(), link);
        let sup = make_default_kernel().sup_norm();
        let mut worst: f64 = 0.0;
        for j in 0..60 {
            let h = level(j);
            for i in 0..=40 {
                let y = -1.0 + i as f64 * 0.05;
                worst = worst.max(profile.delta_star(h, y) / (sup * h.powf(beta)));
            }
        }
        let mut h_ratio = f64::INFINITY;
        for eps in [2f64.powi(-4), 2f64.powi(-6), 2f64.powi(-8)] {
            let lower = noise_scale(eps).powf(2.0 / (2.0 * beta + 1.0));
            for i in 0..=20 {
                let y = -1.0 + i as f64 * 0.1;
                h_ratio = h_ratio.min(oracle_bandwidth(&profile, eps, y).unwrap() / lower);
            }
        }
        passed &= worst <= 1.0 && h_ratio >= 1.0;
        parts.push(format!("β={beta}: max Δ*/(‖K‖∞Lh^β) = {worst:.4}, min h*/bound = {h_ratio:.3}"));
    }
    Outcome { passed, detail: parts.join("; ") }
}

/// Criteria 5 and 6 share one sweep.
fn c5_c6_pointwise() -> (Outcome, Outcome) {
    let link = make_hoelder(&HoelderSpec::cusp(1.0, 4.0)).unwrap();
    let theta0 = Direction::from_degrees(30.0);
    let grid = GridSpec::with_n(512).unwrap();
    let selector = SelectorConfig::new(ProductKernel::default(), 0.1)
        .with_directions(24)
        .with_min_bandwidth(Some(grid.resolution_floor()));
    let config = RiskConfig {
        r: 2.0,
        points: vec![[0.0, 0.0]],
        replicates: 200,
        epsilons: (4..=9).map(|k| 2f64.powi(-k)).collect(),
        master_seed: 20240,
        threshold_scale: None,
        grid,
        execution: exec(),
        calibration_replicates: 200,
    };
    let (scale, _) = config.resolve_scale(&selector).unwrap();
    let rows = oracle_ratio_study(&link, theta0, &selector, &config, scale).unwrap();
    let eps: Vec<f64> = rows.iter().map(|r| r.epsilon).collect();
    let risks: Vec<f64> = rows.iter().map(|r| r.adaptive.risk).collect();
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    let fit = rate_fit(&eps, &risks, 1.0, Regime::Pointwise).unwrap();
    let (ratio_slope, _, _) = log_log_fit(&eps, &ratios).unwrap();
    let all_hold = rows.iter().all(|r| r.inequality_holds);
    let tightest = rows.iter().map(|r| r.adaptive.risk / r.inequality_bound).fold(0.0, f64::max);
    (
        Outcome {
            passed: (fit.slope - 2.0 / 3.0).abs() <= 0.12,
            detail: format!(
                "calibrated scale {scale:.5}; slope {:.4} (target 2/3 ± 0.12), rms residual {:.4}",
                fit.slope, fit.residual
            ),
        },
        Outcome {
            passed: ratio_slope.abs() <= 0.15 && all_hold,
            detail: format!(
                "ratio slope vs log ε {ratio_slope:+.4}; oracle inequality holds at all ε: {all_hold} \
                 (max risk/bound {tightest:.4}, C_r1 {:.2}, C_r2 {:.2})",
                rows[0].c_r1, rows[0].c_r2
            ),
        },
    )
}

fn c7_lower_bound() -> Outcome {
    let fam = hypothesis_family(1.0, 1.0, 2f64.powi(-6), 0.5, &[0.0, 0.0], 2).unwrap();
    let rep = check_family(&fam, 1.0, 1.0 / 3.0).unwrap();
    let display_ok = rep.cross_display_ratio <= 1.0 + QUAD_TOL;
    Outcome {
        passed: rep.lambda_deviation <= 1e-10 && rep.norm_passed && display_ok,
        detail: format!(
            "N = {}, λ deviation {:.1e}, max ‖F_i‖² = {:.4e} vs ρε²lnN = {:.4e}, cross/display {:.3}, smallest c = {:.4}",
            rep.n,
            rep.lambda_deviation,
            rep.max_sq_norm,
            rep.rho_used * fam.epsilon.powi(2) * (fam.n as f64).ln(),
            rep.cross_display_ratio,
            rep.c_min
        ),
    }
}

fn c8_bias_inequalities() -> Outcome {
    let link = make_hoelder(&HoelderSpec::cusp(1.0, 4.0)).unwrap();
    let grid = GridSpec::with_n(512).unwrap();
    let mut passed = true;
    let mut parts = Vec::new();
    for eps in [2f64.powi(-5), 2f64.powi(-7)] {
        let rep = bias_inequalities(
            &link,
            Direction::from_degrees(30.0),
            &ProductKernel::default(),
            &grid,
            eps,
            [0.0, 0.0],
            grid.resolution_floor(),
            100,
            5,
        )
        .unwrap();
        passed &= rep.passed.iter().all(|p| *p);
        parts.push(format!("ε={eps}: h* {:.4}, passed {:?}", rep.h_star, rep.passed));
    }
    Outcome { passed, detail: parts.join("; ") }
}

fn c9_nikolskii() -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for (beta, p) in [(0.25, 2.0), (0.5, 3.0)] {
        let link = make_hoelder(&HoelderSpec::cusp(beta, 1.0)).unwrap();
        let s = beta + 1.0 / p;
        let cert = verify_nikolskii(&link, &NikolskiiSpec::new(s, 1.0, p).unwrap(), -2.0, 2.0).unwrap();
        let opts = ProfileOptions {
            z_half: 3.0,
            quad_step: 1.0 / 8192.0,
            min_delta: 1.0 / 512.0,
            execution: exec(),
        };
        let profile = BiasProfile::with_options(make_default_kernel(), link, opts);
        let hs: Vec<f64> = (2..=6).map(|k| 2f64.powi(-k)).collect();
        let (slope, _) = lp_bias_scaling(&profile, p, &hs).unwrap();
        passed &= cert.passed && (slope - s).abs() <= 0.1;
        parts.push(format!("cusp β={beta}, p={p}: certified {}, slope {slope:.4} vs s = {s:.4}", cert.passed));
    }
    Outcome { passed, detail: parts.join("; ") }
}

/// Least-favorable spikes: a tent of height 2 and width `w = 41.6·(ε√ln(1/ε))²`, which stays in
/// the Nikol'skii ball of smoothness 1 in `L_1` with constant 4 for every `w`.
fn c10_global() -> Outcome {
    let (beta, p, r) = (1.0, 1.0, 4.0);
    let amplitude = 2.0;
    let theta0 = Direction::new(1.0, 0.0).unwrap();
    let grid = GridSpec::with_n(512).unwrap();
    let selector = SelectorConfig::new(ProductKernel::default(), 0.1)
        .with_directions(16)
        .with_r(r)
        .with_min_bandwidth(Some(grid.resolution_floor()));
    let epsilons: Vec<f64> = (0..6).map(|k| 2f64.powf(-4.0 - 0.5 * k as f64)).collect();
    let config = RiskConfig {
        r,
        points: vec![[0.3, 0.0]],
        replicates: 30,
        epsilons: epsilons.clone(),
        master_seed: 99,
        threshold_scale: None,
        grid,
        execution: exec(),
        calibration_replicates: 200,
    };
    let (scale, _) = config.resolve_scale(&selector).unwrap();
    let risks: Vec<f64> = epsilons
        .iter()
        .enumerate()
        .map(|(i, &eps)| {
            let w = 41.6 * noise_scale(eps).powi(2);
            let spec = HoelderSpec { beta, l: 2.0 * amplitude / w, shape: Shape::Cusp { center: 0.0 } };
            let link = make_inhomogeneous(0.0, &spec, w).unwrap();
            let field = single_index_field(&link, theta0);
            let disc = DiscretizedField::new(&field, grid);
            let (lo, hi) = ((-1.5 * w).max(-0.5), (1.5 * w).min(0.5));
            let mut pieces = Vec::new();
            if lo > -0.5 {
                pieces.push((-0.5, lo, 4));
            }
            pieces.push((lo, hi, 16));
            if hi < 0.5 {
                pieces.push((hi, 0.5, 4));
            }
            let quad = Quadrature::along_first_axis(&pieces).unwrap();
            let mut cfg = selector.clone().with_scale(scale);
            cfg.epsilon = eps;
            global_risk(&Procedure::Adaptive(cfg), &disc, &field, eps, r, &quad, 30, derive_seed(99, i as u64), exec())
                .unwrap()
                .risk
        })
        .collect();
    let regime = Regime::Global { p, r };
    let fit = rate_fit(&epsilons, &risks, beta, regime).unwrap();
    let middle = Regime::Global { p, r: (2.0 * beta + 1.0) * p };
    Outcome {
        passed: (fit.slope - fit.theoretical_exponent).abs() <= 0.15,
        detail: format!(
            "regime (2β+1)p < r: slope {:.4} vs {:.3} ± 0.15, rms residual {:.4}; \
             middle regime r = {} (exponent {:.3}, boundary {}) reported only, not asserted",
            fit.slope,
            fit.theoretical_exponent,
            fit.residual,
            (2.0 * beta + 1.0) * p,
            middle.exponent(beta),
            middle.is_boundary(beta)
        ),
    }
}

fn report(id: &str, limit: Duration, start: Instant, outcome: Outcome, failures: &mut usize) {
    let elapsed = start.elapsed();
    let passed = outcome.passed && elapsed <= limit;
    if !passed {
        *failures += 1;
    }
    println!(
        "criterion {id}: {} [{:.1}s / limit {}s] {}",
        if passed { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        limit.as_secs(),
        outcome.detail
    );
}

fn main() {
    let mut failures = 0;
    let secs = Duration::from_secs;
    let t = Instant::now();
    report("1", secs(1), t, c1_matrices(), &mut failures);
    let t = Instant::now();
    report("2", secs(120), t, c2_variance(), &mut failures);
    let t = Instant::now();
    report("3", secs(10), t, c3_deterministic(), &mut failures);
    let t = Instant::now();
    report("4", secs(60), t, c4_hoelder_bias(), &mut failures);
    let t = Instant::now();
    let (c5, c6) = c5_c6_pointwise();
    report("5", secs(900), t, c5, &mut failures);
    report("6", secs(900), t, c6, &mut failures);
    let t = Instant::now();
    report("7", secs(60), t, c7_lower_bound(), &mut failures);
    let t = Instant::now();
    report("8", secs(60), t, c8_bias_inequalities(), &mut failures);
    let t = Instant::now();
    report("9", secs(60), t, c9_nikolskii(), &mut failures);
    let t = Instant::now();
    report("10", secs(1200), t, c10_global(), &mut failures);
    println!("acceptance: {} of 10 criteria passed", 10 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
