//! Command execution and report writing.

use std::fs;
use std::path::PathBuf;

use silab_core::estimator::{matrix_pair, matrix_single, Direction};
use silab_core::exec::{with_jobs, Execution};
use silab_core::kernels::{certify, make_order_kernel, CERT_GRID};
use silab_core::lower_bound::{check_family_with, DEFAULT_QUAD_N};
use silab_core::noise_field::{derive_seed, simulate, simulate_deterministic};
use silab_core::oracle::{c_r_constant, oracle, BiasProfile};
use silab_core::report::{parse_simple, write_atomic, CsvTable};
use silab_core::risk::{
    calibrate_threshold, log_log_fit, oracle_ratio_study, rate_fit, Procedure, RateFit, Regime, RiskConfig,
};
use silab_core::signals::{hypothesis_family, make_hoelder, HoelderSpec};
use silab_core::{select_estimate, Field, GridSpec, LabError, Observation, ProductKernel, SelectorConfig};

use crate::config::{Command, RunConfig};
use crate::error::CliError;

/// Slack allowed between a fitted and a predicted exponent by `rate-fit`.
pub const RATE_TOLERANCE: f64 = 0.15;

/// What a run produced.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunSummary {
    pub command: String,
    /// `(name, passed)` for every check the command performs.
    pub checks: Vec<(String, bool)>,
    pub files: Vec<PathBuf>,
    /// Human-readable findings, printed before the summary line.
    pub lines: Vec<String>,
}

impl RunSummary {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|(_, ok)| *ok)
    }

    /// `SUMMARY key=value ...`, the last line a run prints.
    pub fn summary_line(&self) -> String {
        let ok = self.checks.iter().filter(|(_, p)| *p).count();
        let failed: Vec<&str> = self.checks.iter().filter(|(_, p)| !*p).map(|(n, _)| n.as_str()).collect();
        format!(
            "SUMMARY command={} status={} checks_passed={} checks_total={} failed={} files={}",
            self.command,
            if self.passed() { "PASS" } else { "FAIL" },
            ok,
            self.checks.len(),
            if failed.is_empty() { "none".into() } else { failed.join(";") },
            self.files.len()
        )
    }

    fn check(&mut self, name: &str, ok: bool) {
        self.checks.push((name.into(), ok));
    }
}

/// Tracks written files so a failed run can remove them.
struct Outputs {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Outputs {
    fn table(&mut self, name: &str, table: &CsvTable) -> Result<(), CliError> {
        let path = self.dir.join(name);
        table.write(&path)?;
        self.written.push(path);
        Ok(())
    }

    fn bytes(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        write_atomic(&path, bytes)?;
        self.written.push(path);
        Ok(())
    }

    fn remove_all(&self) {
        for p in &self.written {
            let _ = fs::remove_file(p);
        }
    }
}

/// Runs one command inside a pool of `config.jobs` workers. On error every file written by this
/// run is removed, and so is the output directory if the run created it.
pub fn run(config: &RunConfig) -> Result<RunSummary, CliError> {
    let created = !config.out_dir.exists();
    fs::create_dir_all(&config.out_dir).map_err(|e| CliError::Io {
        path: config.out_dir.clone(),
        source: e,
    })?;
    let mut out = Outputs {
        dir: config.out_dir.clone(),
        written: Vec::new(),
    };
    let result = with_jobs(config.jobs, || dispatch(config, &mut out));
    match result {
        Ok(mut s) => {
            s.files = out.written;
            Ok(s)
        }
        Err(e) => {
            out.remove_all();
            if created {
                let _ = fs::remove_dir(&config.out_dir);
            }
            Err(e)
        }
    }
}

fn dispatch(c: &RunConfig, out: &mut Outputs) -> Result<RunSummary, CliError> {
    let mut s = RunSummary {
        command: c.command.to_string(),
        ..RunSummary::default()
    };
    match c.command {
        Command::Simulate => cmd_simulate(c, out, &mut s)?,
        Command::Estimate => cmd_estimate(c, out, &mut s)?,
        Command::Oracle => cmd_oracle(c, out, &mut s)?,
        Command::RiskSweep => cmd_risk_sweep(c, out, &mut s)?,
        Command::RateFit => cmd_rate_fit(c, out, &mut s)?,
        Command::LbCheck => cmd_lb_check(c, out, &mut s)?,
        Command::Calibrate => cmd_calibrate(c, out, &mut s)?,
        Command::Selftest => cmd_selftest(c, out, &mut s)?,
    }
    Ok(s)
}

fn header(c: &RunConfig) -> Vec<String> {
    let mut h = vec![format!("silab {}", env!("CARGO_PKG_VERSION"))];
    h.extend(c.header_lines());
    h
}

fn execution(c: &RunConfig) -> Execution {
    if c.jobs == 1 {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

fn grid(c: &RunConfig) -> Result<GridSpec, CliError> {
    Ok(GridSpec::with_n(c.n_grid)?)
}

fn selector(c: &RunConfig, grid: &GridSpec) -> Result<SelectorConfig, CliError> {
    let kernel = ProductKernel::new(c.kernel.kernel()?);
    let mut cfg = SelectorConfig::new(kernel, c.epsilon)
        .with_directions(c.n_directions)
        .with_r(c.r)
        .with_min_bandwidth(Some(grid.resolution_floor()))
        .with_execution(execution(c));
    cfg.link_bound = Some(c.signal.link()?.sup_on(-2.0, 2.0));
    for w in cfg.validate()? {
        eprintln!("warning: {w}");
    }
    Ok(cfg)
}

fn risk_config(c: &RunConfig, grid: GridSpec) -> RiskConfig {
    RiskConfig {
        r: c.r,
        points: vec![c.x],
        replicates: c.replicates,
        epsilons: c.sweep_epsilons(),
        master_seed: c.seed,
        threshold_scale: c.threshold_scale,
        grid,
        execution: execution(c),
        calibration_replicates: c.calibration_replicates,
    }
}

/// The configured scale, or a pure-noise calibration at `c.epsilon`.
fn scale_for(c: &RunConfig, sel: &SelectorConfig, grid: GridSpec, s: &mut RunSummary) -> Result<f64, CliError> {
    if let Some(v) = c.threshold_scale {
        return Ok(v);
    }
    let cal = calibrate_threshold(sel, grid, c.x, c.calibration_replicates, derive_seed(c.seed, 7), execution(c))?;
    s.lines.push(format!(
        "calibrated threshold scale {:.6} (false rejection {:.3})",
        cal.scale, cal.false_rejection
    ));
    Ok(cal.scale)
}

fn dump(obs: &Observation) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    obs.dump(&mut buf)?;
    Ok(buf)
}

fn kv_table(c: &RunConfig, rows: &[(&str, String)]) -> CsvTable {
    let mut t = CsvTable::new(header(c), &["quantity", "value"]);
    for (k, v) in rows {
        t.push(vec![k.to_string(), v.clone()]);
    }
    t
}

fn cmd_simulate(c: &RunConfig, out: &mut Outputs, s: &mut RunSummary) -> Result<(), CliError> {
    let grid = grid(c)?;
    let obs = simulate(&c.signal.field()?, c.epsilon, grid, c.seed)?;
    let bytes = dump(&obs)?;
    let reloaded = Observation::load(bytes.as_slice())?;
    s.check("dump_round_trip", reloaded == obs);
    out.bytes("field.txt", &bytes)?;
    let total: f64 = obs.increments().iter().sum();
    out.table(
        "simulate.csv",
        &kv_table(
            c,
            &[
                ("cells", grid.len().to_string()),
                ("cell_area", format!("{:?}", grid.cell_area())),
                ("sum_of_increments", format!("{total:?}")),
                ("seed", obs.seed().to_string()),
            ],
        ),
    )?;
    s.lines.push(format!("simulated {} cells, sum of increments {total:.6}", grid.len()));
    Ok(())
}

fn cmd_estimate(c: &RunConfig, out: &mut Outputs, s: &mut RunSummary) -> Result<(), CliError> {
    let grid = grid(c)?;
    let field = c.signal.field()?;
    let sel = selector(c, &grid)?;
    let scale = scale_for(c, &sel, grid, s)?;
    let sel = sel.with_scale(scale);
    let obs = simulate(&field, c.epsilon, grid, c.seed)?;
    if c.dump_field {
        out.bytes("field.txt", &dump(&obs)?)?;
    }
    let (est, trace) = select_estimate(&obs, c.x, &sel);
    if !trace.under_resolved.is_empty() {
        eprintln!(
            "warning: {} bandwidth levels below the grid resolution floor {:.4e} were skipped",
            trace.under_resolved.len(),
            grid.resolution_floor()
        );
    }
    let mut h = header(c);
    h.push(format!("threshold-scale-used={scale:?}"));
    out.table("estimate_trace.csv", &trace.to_table(h))?;
    let truth = field.eval(c.x);
    s.check("estimate_finite", est.is_finite());
    s.lines.push(format!(
        "θ̂ = {:.2}°, ĥ = {}, estimate {est:.6}, truth {truth:.6}, fallback {}",
        trace.theta_hat.angle().to_degrees(),
        trace.h_hat,
        trace.fallback_used
    ));
    Ok(())
}

fn cmd_oracle(c: &RunConfig, out: &mut Outputs, s: &mut RunSummary) -> Result<(), CliError> {
    let kernel = c.kernel.kernel()?;
    let profile = BiasProfile::with_range(kernel, c.signal.link()?, 2.0, execution(c));
    let mut t = CsvTable::new(header(c), &["y", "h_star", "risk_bound", "delta_star"]);
    let mut empty = 0;
    for i in 0..=40 {
        let y = -1.0 + 0.05 * i as f64;
        match oracle(&profile, c.epsilon, y, c.r) {
            Ok(o) => t.push(vec![
                format!("{y:?}"),
                format!("{:?}", o.h_star),
                format!("{:?}", o.risk_bound),
                format!("{:?}", profile.delta_star(o.h_star, y)),
            ]),
            Err(LabError::EmptyOracleSet { .. }) => {
                empty += 1;
                t.push(vec![format!("{y:?}"), "empty".into(), String::new(), String::new()]);
            }
            Err(e) => return Err(e.into()),
        }
    }
    out.table("oracle.csv", &t)?;
    s.check("oracle_set_nonempty", empty == 0);
    s.lines.push(format!("oracle bandwidth tabulated at 41 points, {empty} empty"));
    Ok(())
}

fn fit_row(kind: &str, f: &RateFit) -> Vec<String> {
    vec![
        kind.into(),
        format!("{:?}", f.slope),
        format!("{:?}", f.intercept),
        format!("{:?}", f.residual),
        format!("{:?}", f.theoretical_exponent),
        f.n_points.to_string(),
    ]
}

fn cmd_risk_sweep(c: &RunConfig, out: &mut Outputs, s: &mut RunSummary) -> Result<(), CliError> {
    let grid = grid(c)?;
    let sel = selector(c, &grid)?;
    let rc = risk_config(c, grid);
    let (scale, cal) = rc.resolve_scale(&sel)?;
    let link = c.signal.link()?;
    let rows = oracle_ratio_study(&link, c.signal.theta(), &sel, &rc, scale)?;

    let mut h = header(c);
    h.push(format!("threshold-scale-used={scale:?}"));
    if let Some(cal) = &cal {
        h.push(format!(
            "calibration: epsilon={:?} replicates={} false-rejection={:?}",
            cal.epsilon, cal.replicates, cal.false_rejection
        ));
    }
    let mut t = CsvTable::new(
        h.clone(),
        &[
            "epsilon",
            "adaptive_risk",
            "adaptive_stderr",
            "adaptive_mean_h",
            "oracle_risk",
            "oracle_stderr",
            "h_star",
            "oracle_bound",
            "ratio",
            "inequality_bound",
            "inequality_holds",
        ],
    );
    for r in &rows {
        t.push(vec![
            format!("{:?}", r.epsilon),
            format!("{:?}", r.adaptive.risk),
            format!("{:?}", r.adaptive.stderr),
            format!("{:?}", r.adaptive.mean_h),
            format!("{:?}", r.oracle.risk),
            format!("{:?}", r.oracle.stderr),
            format!("{:?}", r.h_star),
            format!("{:?}", r.oracle_bound),
            format!("{:?}", r.ratio),
            format!("{:?}", r.inequality_bound),
            r.inequality_holds.to_string(),
        ]);
        s.check(&format!("oracle_inequality_eps_{:?}", r.epsilon), r.inequality_holds);
    }
    out.table("risk_sweep.csv", &t)?;

    let eps: Vec<f64> = rows.iter().map(|r| r.epsilon).collect();
    let beta = c.signal.smoothness();
    let adaptive = rate_fit(&eps, &rows.iter().map(|r| r.adaptive.risk).collect::<Vec<_>>(), beta, Regime::Pointwise)?;
    let oracle_fit = rate_fit(&eps, &rows.iter().map(|r| r.oracle.risk).collect::<Vec<_>>(), beta, Regime::Pointwise)?;
    let (ratio_slope, ratio_icpt, ratio_res) = log_log_fit(&eps, &rows.iter().map(|r| r.ratio).collect::<Vec<_>>())?;
    let mut summary = CsvTable::new(
        h,
        &["fit", "slope", "intercept", "residual", "theoretical_exponent", "n_points"],
    );
    summary.push(fit_row("adaptive", &adaptive));
    summary.push(fit_row("oracle", &oracle_fit));
    summary.push(vec![
        "ratio_vs_log_epsilon".into(),
        format!("{ratio_slope:?}"),
        format!("{ratio_icpt:?}"),
        format!("{ratio_res:?}"),
        "0.0".into(),
        rows.len().to_string(),
    ]);
    out.table("risk_summary.csv", &summary)?;
    s.lines.push(format!(
        "adaptive slope {:.4} (predicted {:.4}), oracle slope {:.4}, ratio slope vs log ε {ratio_slope:+.4}",
        adaptive.slope, adaptive.theoretical_exponent, oracle_fit.slope
    ));
    Ok(())
}

fn column(t: &CsvTable, names: &[&str]) -> Result<Vec<f64>, CliError> {
    let idx = names
        .iter()
        .find_map(|n| t.columns.iter().position(|c| c == n))
        .ok_or_else(|| CliError::Lab(LabError::Parse(format!("input lacks a column named {}", names.join(" or ")))))?;
    t.rows
        .iter()
        .map(|r| {
            r.get(idx)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| CliError::Lab(LabError::Parse(format!("bad value in column {}", t.columns[idx]))))
        })
        .collect()
}

fn cmd_rate_fit(c: &RunConfig, out: &mut Outputs, s: &mut RunSummary) -> Result<(), CliError> {
    let path = c
        .input
        .as_ref()
        .ok_or_else(|| CliError::guard("input", "rate-fit reads a risk CSV given by --input"))?;
    let text = fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.clone(),
        source: e,
    })?;
    let table = parse_simple(&text);
    let eps = column(&table, &["epsilon"])?;
    let risks = column(&table, &["adaptive_risk", "risk"])?;
    let regime = match c.p {
        Some(p) => Regime::Global { p, r: c.r },
        None => Regime::Pointwise,
    };
    let beta = c.signal.smoothness();
    let fit = rate_fit(&eps, &risks, beta, regime)?;
    let boundary = regime.is_boundary(beta);
    let mut h = header(c);
    h.push(format!("source={}", path.display()));
    let mut t = CsvTable::new(
        h,
        &["fit", "slope", "intercept", "residual", "theoretical_exponent", "n_points"],
    );
    t.push(fit_row(if boundary { "boundary_regime_reported_only" } else { "fit" }, &fit));
    out.table("rate_fit.csv", &t)?;
    if boundary {
        s.lines.push(format!(
            "slope {:.4}; the boundary regime (2β+1)p = r has no asserted rate, reported only",
            fit.slope
        ));
    } else {
        s.check("slope_within_tolerance", (fit.slope - fit.theoretical_exponent).abs() <= RATE_TOLERANCE);
        s.lines.push(format!(
            "slope {:.4} vs predicted {:.4} (tolerance {RATE_TOLERANCE})",
            fit.slope, fit.theoretical_exponent
        ));
    }
    Ok(())
}

fn cmd_lb_check(c: &RunConfig, out: &mut Outputs, s: &mut RunSummary) -> Result<(), CliError> {
    let fam = hypothesis_family(c.signal.beta, c.signal.l, c.epsilon, 0.5, &c.x, 2)?;
    let rep = check_family_with(&fam, 1.0, 1.0 / 3.0, DEFAULT_QUAD_N, execution(c))?;
    let pair = rep
        .argmax_pair
        .map(|(i, j)| format!("{i}-{j}"))
        .unwrap_or_else(|| "none".into());
    let rows = [
        ("epsilon", format!("{:?}", rep.epsilon)),
        ("n_hypotheses", rep.n.to_string()),
        ("h", format!("{:?}", rep.h)),
        ("lambda_eps", format!("{:?}", rep.lambda_eps)),
        ("lambda_closed_form", format!("{:?}", rep.lambda_closed_form)),
        ("lambda_deviation", format!("{:?}", rep.lambda_deviation)),
        ("max_cross_inner", format!("{:?}", rep.max_cross_inner)),
        ("argmax_pair", pair),
        ("max_sq_norm", format!("{:?}", rep.max_sq_norm)),
        ("sq_norm_analytic_bound", format!("{:?}", rep.sq_norm_analytic_bound)),
        ("c_used", format!("{:?}", rep.c_used)),
        ("rho_used", format!("{:?}", rep.rho_used)),
        ("c_min", format!("{:?}", rep.c_min)),
        ("cross_display_ratio", format!("{:?}", rep.cross_display_ratio)),
        ("bound_value", format!("{:?}", rep.bound_value)),
        ("separation_passed", rep.separation_passed.to_string()),
        ("cross_passed", rep.cross_passed.to_string()),
        ("norm_passed", rep.norm_passed.to_string()),
    ];
    out.table("lb_check.csv", &kv_table(c, &rows))?;
    s.check("separation", rep.separation_passed);
    s.check("cross_products", rep.cross_passed);
    s.check("norms", rep.norm_passed);
    s.lines.push(format!(
        "N = {} hypotheses, λ = {:.6e}, smallest c = {:.4}, bound value {:.4e}; separation {} cross {} norm {}",
        rep.n, rep.lambda_eps, rep.c_min, rep.bound_value, rep.separation_passed, rep.cross_passed, rep.norm_passed
    ));
    Ok(())
}

fn cmd_calibrate(c: &RunConfig, out: &mut Outputs, s: &mut RunSummary) -> Result<(), CliError> {
    let grid = grid(c)?;
    let sel = selector(c, &grid)?;
    let cal = calibrate_threshold(&sel, grid, c.x, c.calibration_replicates, derive_seed(c.seed, 7), execution(c))?;
    out.table(
        "calibrate.csv",
        &kv_table(
            c,
            &[
                ("scale", format!("{:?}", cal.scale)),
                ("false_rejection", format!("{:?}", cal.false_rejection)),
                ("target", format!("{:?}", cal.target)),
                ("epsilon", format!("{:?}", cal.epsilon)),
                ("replicates", cal.replicates.to_string()),
                ("seed", cal.seed.to_string()),
            ],
        ),
    )?;
    s.check("false_rejection_within_target", cal.false_rejection <= cal.target);
    s.lines.push(format!("threshold scale {:.6}, false rejection {:.3}", cal.scale, cal.false_rejection));
    Ok(())
}

/// Fast invariant suites; each contributes one check.
fn cmd_selftest(c: &RunConfig, out: &mut Outputs, s: &mut RunSummary) -> Result<(), CliError> {
    let mut results: Vec<(&str, bool, String)> = Vec::new();

    let default_kernel = certify(&silab_core::kernels::make_default_kernel(), CERT_GRID);
    let mut kernels_ok = default_kernel.passed();
    for m in 2..=4 {
        kernels_ok &= certify(&make_order_kernel(m)?, CERT_GRID).passed();
    }
    results.push(("kernel_certification", kernels_ok, "default and order 2..4".into()));

    // Low-discrepancy angles and bandwidths instead of a random generator.
    let golden = 0.618_033_988_749_895;
    let (mut single_err, mut pair_ok) = (0.0f64, true);
    for i in 0..2000 {
        let a = Direction::from_angle((i as f64 * golden).fract() * std::f64::consts::TAU);
        let b = Direction::from_angle((i as f64 * 0.414_213_562_373_095).fract() * std::f64::consts::TAU);
        let h = 2f64.powf(-12.0 * (i as f64 * 0.732_050_807_568_877).fract());
        single_err = single_err.max((matrix_single(&a, h).det() * h - 1.0).abs());
        let dp = matrix_pair(&a, &b, h).det() * h;
        pair_ok &= (0.25..=0.5).contains(&dp);
    }
    results.push(("matrix_determinants", single_err <= 1e-12 && pair_ok, format!("max single error {single_err:.2e}")));

    let small = GridSpec::with_n(64)?;
    let obs = simulate_deterministic(&Field::constant(0.7), small);
    let cfg = SelectorConfig::new(ProductKernel::default(), 0.05).with_directions(16);
    let (est, trace) = select_estimate(&obs, [0.0, 0.0], &cfg);
    let all_negative = trace.r_values.iter().flatten().all(|r| *r < 0.0);
    results.push((
        "constant_signal_selection",
        trace.h_hat == 1.0 && (est - 0.7).abs() <= 1e-8 && all_negative,
        format!("h_hat {} error {:.2e}", trace.h_hat, (est - 0.7).abs()),
    ));

    let two_over_pi = (2.0 / std::f64::consts::PI).sqrt();
    let c1 = c_r_constant(1.0)?;
    let c2 = c_r_constant(2.0)?;
    let cr_ok = (c1 - (1.0 + two_over_pi)).abs() < 1e-8 && (c2 - (2.0 + 2.0 * two_over_pi).sqrt()).abs() < 1e-8;
    results.push(("moment_constants", cr_ok, format!("c_1 {c1:.8} c_2 {c2:.8}")));

    let fam = hypothesis_family(1.0, 1.0, 2f64.powi(-6), 0.5, &[0.0, 0.0], 2)?;
    let x = [0.0, 0.0];
    let dev = (1..=fam.n)
        .map(|i| ((fam.eval(i, x) - fam.eval(0, x)).abs() - fam.lambda_closed_form()).abs())
        .fold(0.0, f64::max);
    results.push(("hypothesis_separation", dev <= 1e-10, format!("deviation {dev:.2e}")));

    let noisy = simulate(&Field::constant(0.3), 0.1, small, c.seed)?;
    let back = Observation::load(dump(&noisy)?.as_slice())?;
    results.push(("field_dump_round_trip", back == noisy, "bit-exact".into()));

    let cusp = make_hoelder(&HoelderSpec::cusp(0.5, 1.0)).is_ok();
    results.push(("link_certification", cusp, "cusp beta 0.5".into()));

    let proc = Procedure::Fixed {
        kernel: ProductKernel::default(),
        theta: Direction::from_degrees(30.0),
        h: 0.25,
    };
    let disc = silab_core::noise_field::DiscretizedField::new(&Field::constant(0.3), small);
    let run = |e| silab_core::risk::pointwise_risk(&proc, &disc, 0.3, 0.1, x, 2.0, 64, c.seed, e);
    let same = run(Execution::Sequential)? == run(Execution::Parallel)?;
    results.push(("execution_modes_agree", same, "sequential vs parallel".into()));

    let mut t = CsvTable::new(header(c), &["check", "passed", "detail"]);
    for (name, ok, detail) in &results {
        t.push(vec![name.to_string(), ok.to_string(), detail.clone()]);
        s.check(name, *ok);
        s.lines.push(format!("{} {name}: {detail}", if *ok { "ok  " } else { "FAIL" }));
    }
    out.table("selftest.csv", &t)?;
    Ok(())
}

/// Runs a command and returns its exit status: 0 when every check passed, 1 when a check
/// failed, 2 on any error.
pub fn run_and_report(config: &RunConfig) -> i32 {
    match run(config) {
        Ok(s) => {
            for l in &s.lines {
                println!("{l}");
            }
            for f in &s.files {
                println!("wrote {}", f.display());
            }
            println!("{}", s.summary_line());
            if s.passed() {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            println!("SUMMARY command={} status=ERROR checks_passed=0 checks_total=0 failed=error files=0", config.command);
            2
        }
    }
}

