//! Flag and config-file parsing into a fully resolved [`RunConfig`].

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Parser;
use silab_core::noise_field::check_epsilon;

use crate::error::CliError;
use crate::presets::{KernelPreset, SignalPreset};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Estimate,
    Oracle,
    RiskSweep,
    RateFit,
    LbCheck,
    Calibrate,
    Selftest,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::Simulate,
        Command::Estimate,
        Command::Oracle,
        Command::RiskSweep,
        Command::RateFit,
        Command::LbCheck,
        Command::Calibrate,
        Command::Selftest,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Estimate => "estimate",
            Command::Oracle => "oracle",
            Command::RiskSweep => "risk-sweep",
            Command::RateFit => "rate-fit",
            Command::LbCheck => "lb-check",
            Command::Calibrate => "calibrate",
            Command::Selftest => "selftest",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = String;
    fn from_str(s: &str) -> Result<Command, String> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown command `{s}`"))
    }
}

/// Raw command line. Every value is optional so that file values can fill the gaps.
#[derive(Debug, Default, Parser)]
#[command(name = "silab", version, about = "Adaptive single-index kernel estimation lab")]
pub struct Args {
    /// simulate | estimate | oracle | risk-sweep | rate-fit | lb-check | calibrate | selftest
    #[arg(long)]
    pub command: Option<String>,
    /// Signal preset, e.g. `cusp:beta=0.5,L=1,theta=30deg`.
    #[arg(long)]
    pub signal: Option<String>,
    /// `default` or `order:m=<moments>`.
    #[arg(long)]
    pub kernel: Option<String>,
    #[arg(long)]
    pub epsilon: Option<String>,
    #[arg(long)]
    pub r: Option<String>,
    /// Overrides the preset's β.
    #[arg(long)]
    pub beta: Option<String>,
    /// Overrides the preset's L.
    #[arg(long = "L")]
    pub l: Option<String>,
    /// Integrability index for global regimes.
    #[arg(long)]
    pub p: Option<String>,
    /// Overrides the preset's direction.
    #[arg(long = "theta-deg")]
    pub theta_deg: Option<String>,
    #[arg(long = "n-grid")]
    pub n_grid: Option<String>,
    #[arg(long = "n-directions")]
    pub n_directions: Option<String>,
    #[arg(long)]
    pub replicates: Option<String>,
    /// Pure-noise replicates used when the threshold scale is calibrated.
    #[arg(long = "calibration-replicates")]
    pub calibration_replicates: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// Fixed threshold scale; omitted means calibrate on pure noise.
    #[arg(long = "threshold-scale")]
    pub threshold_scale: Option<String>,
    /// Worker threads (0 = all cores, 1 = sequential).
    #[arg(long)]
    pub jobs: Option<String>,
    #[arg(long = "out-dir")]
    pub out_dir: Option<String>,
    /// Full-length sweeps (ε down to 2⁻⁹).
    #[arg(long)]
    pub heavy: bool,
    /// Also write the simulated observation.
    #[arg(long = "dump-field")]
    pub dump_field: bool,
    /// Estimation point `x1,x2`.
    #[arg(long)]
    pub x: Option<String>,
    /// Risk CSV read by rate-fit.
    #[arg(long)]
    pub input: Option<String>,
    /// Line-based `key = value` file; flags win over file values.
    #[arg(long)]
    pub config: Option<String>,
}

/// Keys accepted in config files (flag names without the dashes).
pub const KEYS: [&str; 21] = [
    "command",
    "signal",
    "kernel",
    "epsilon",
    "r",
    "beta",
    "L",
    "p",
    "theta-deg",
    "n-grid",
    "n-directions",
    "replicates",
    "seed",
    "threshold-scale",
    "jobs",
    "out-dir",
    "heavy",
    "dump-field",
    "x",
    "input",
    "calibration-replicates",
];

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub signal: SignalPreset,
    pub kernel: KernelPreset,
    pub epsilon: f64,
    pub r: f64,
    pub p: Option<f64>,
    pub n_grid: usize,
    pub n_directions: usize,
    pub replicates: usize,
    pub calibration_replicates: usize,
    pub seed: u64,
    pub threshold_scale: Option<f64>,
    pub jobs: usize,
    pub out_dir: PathBuf,
    pub heavy: bool,
    pub dump_field: bool,
    pub x: [f64; 2],
    pub input: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> RunConfig {
        RunConfig {
            command: Command::Selftest,
            signal: SignalPreset::default(),
            kernel: KernelPreset::Default,
            epsilon: 2f64.powi(-6),
            r: 2.0,
            p: None,
            n_grid: 256,
            n_directions: 32,
            replicates: 50,
            calibration_replicates: 200,
            seed: 7,
            threshold_scale: None,
            jobs: 0,
            out_dir: PathBuf::from("silab-out"),
            heavy: false,
            dump_field: false,
            x: [0.0, 0.0],
            input: None,
        }
    }
}

impl RunConfig {
    /// Noise levels of risk sweeps: `2⁻⁴ … 2⁻⁷`, or down to `2⁻⁹` with `--heavy`.
    pub fn sweep_epsilons(&self) -> Vec<f64> {
        let last = if self.heavy { 9 } else { 7 };
        (4..=last).map(|k| 2f64.powi(-k)).collect()
    }

    /// The resolved configuration as `key=value` lines, in config-file syntax.
    pub fn header_lines(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map(|v| format!("{v:?}")).unwrap_or_else(|| "auto".into());
        vec![
            format!("command={}", self.command),
            format!("signal={}", self.signal),
            format!("kernel={}", self.kernel),
            format!("epsilon={:?}", self.epsilon),
            format!("r={:?}", self.r),
            format!("p={}", opt(self.p)),
            format!("n-grid={}", self.n_grid),
            format!("n-directions={}", self.n_directions),
            format!("replicates={}", self.replicates),
            format!("calibration-replicates={}", self.calibration_replicates),
            format!("seed={}", self.seed),
            format!("threshold-scale={}", opt(self.threshold_scale)),
            format!("jobs={}", self.jobs),
            format!("out-dir={}", self.out_dir.display()),
            format!("heavy={}", self.heavy),
            format!("dump-field={}", self.dump_field),
            format!("x={:?},{:?}", self.x[0], self.x[1]),
            format!("input={}", self.input.as_ref().map(|p| p.display().to_string()).unwrap_or_else(|| "none".into())),
        ]
    }

    /// Guards shared by every command.
    pub fn validate(&self) -> Result<(), CliError> {
        check_epsilon(self.epsilon).map_err(|e| CliError::guard("epsilon", e.to_string()))?;
        if !(self.r >= 1.0) {
            return Err(CliError::guard("r", format!("risk order r = {} must be at least 1", self.r)));
        }
        if let Some(p) = self.p {
            if !(p >= 1.0) {
                return Err(CliError::guard("p", format!("p = {p} must be at least 1")));
            }
        }
        if self.n_grid < 16 {
            return Err(CliError::guard("n-grid", format!("{} cells per axis is below the minimum of 16", self.n_grid)));
        }
        if self.n_directions < 16 {
            return Err(CliError::guard(
                "n-directions",
                format!("{} directions is below the minimum of 16", self.n_directions),
            ));
        }
        if self.replicates == 0 || self.calibration_replicates == 0 {
            return Err(CliError::guard("replicates", "replicate counts must be positive"));
        }
        if let Some(s) = self.threshold_scale {
            if !(s > 0.0) {
                return Err(CliError::guard("threshold-scale", format!("scale {s} must be positive")));
            }
        }
        self.signal.validate()?;
        self.kernel.kernel()?;
        Ok(())
    }
}

/// Reads a `key = value` file. Blank lines and `#` comments are skipped; underscores in keys are
/// accepted as dashes.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| CliError::Malformed {
            key: format!("line {}", i + 1),
            value: raw.to_string(),
            reason: "expected `key = value`".into(),
        })?;
        let key = k.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::UnknownKey(key));
        }
        out.insert(key, v.trim().to_string());
    }
    Ok(out)
}

fn typed<T: FromStr>(key: &str, raw: &str) -> Result<T, CliError>
where
    T::Err: fmt::Display,
{
    raw.parse::<T>().map_err(|e| CliError::Malformed {
        key: key.into(),
        value: raw.into(),
        reason: e.to_string(),
    })
}

fn parse_bool(key: &str, raw: &str) -> Result<bool, CliError> {
    match raw {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(CliError::Malformed {
            key: key.into(),
            value: raw.into(),
            reason: "expected a boolean".into(),
        }),
    }
}

fn parse_point(key: &str, raw: &str) -> Result<[f64; 2], CliError> {
    let parts: Vec<&str> = raw.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => Ok([typed(key, a)?, typed(key, b)?]),
        _ => Err(CliError::Malformed {
            key: key.into(),
            value: raw.into(),
            reason: "expected `x1,x2`".into(),
        }),
    }
}

/// `auto` and `none` leave an optional value unset.
fn optional(raw: &str) -> Option<&str> {
    (!matches!(raw, "auto" | "none")).then_some(raw)
}

/// Merges file values under flag values, applies defaults, and checks the guards.
pub fn parse_config(args: &Args, file: Option<&str>) -> Result<RunConfig, CliError> {
    let file_map = match file {
        Some(text) => parse_config_file(text)?,
        None => BTreeMap::new(),
    };
    let flags: [(&str, &Option<String>); 19] = [
        ("command", &args.command),
        ("signal", &args.signal),
        ("kernel", &args.kernel),
        ("epsilon", &args.epsilon),
        ("r", &args.r),
        ("beta", &args.beta),
        ("L", &args.l),
        ("p", &args.p),
        ("theta-deg", &args.theta_deg),
        ("n-grid", &args.n_grid),
        ("n-directions", &args.n_directions),
        ("replicates", &args.replicates),
        ("calibration-replicates", &args.calibration_replicates),
        ("seed", &args.seed),
        ("threshold-scale", &args.threshold_scale),
        ("jobs", &args.jobs),
        ("out-dir", &args.out_dir),
        ("x", &args.x),
        ("input", &args.input),
    ];
    let mut merged = file_map;
    for (k, v) in flags {
        if let Some(v) = v {
            merged.insert(k.to_string(), v.clone());
        }
    }
    let get = |k: &str| merged.get(k).map(String::as_str);

    let mut c = RunConfig::default();
    if let Some(v) = get("command") {
        c.command = v.parse().map_err(|e: String| CliError::Malformed {
            key: "command".into(),
            value: v.into(),
            reason: e,
        })?;
    }
    if let Some(v) = get("signal") {
        c.signal = v.parse()?;
    }
    if let Some(v) = get("kernel") {
        c.kernel = v.parse()?;
    }
    if let Some(v) = get("beta") {
        c.signal.beta = typed("beta", v)?;
    }
    if let Some(v) = get("L") {
        c.signal.l = typed("L", v)?;
    }
    if let Some(v) = get("theta-deg") {
        c.signal.theta_deg = typed("theta-deg", v)?;
    }
    if let Some(v) = get("epsilon") {
        c.epsilon = typed("epsilon", v)?;
    }
    if let Some(v) = get("r") {
        c.r = typed("r", v)?;
    }
    if let Some(v) = get("p").and_then(optional) {
        c.p = Some(typed("p", v)?);
    }
    if let Some(v) = get("n-grid") {
        c.n_grid = typed("n-grid", v)?;
    }
    if let Some(v) = get("n-directions") {
        c.n_directions = typed("n-directions", v)?;
    }
    if let Some(v) = get("replicates") {
        c.replicates = typed("replicates", v)?;
    }
    if let Some(v) = get("calibration-replicates") {
        c.calibration_replicates = typed("calibration-replicates", v)?;
    }
    if let Some(v) = get("seed") {
        c.seed = typed("seed", v)?;
    }
    if let Some(v) = get("threshold-scale").and_then(optional) {
        c.threshold_scale = Some(typed("threshold-scale", v)?);
    }
    if let Some(v) = get("jobs") {
        c.jobs = typed("jobs", v)?;
    }
    if let Some(v) = get("out-dir") {
        c.out_dir = PathBuf::from(v);
    }
    if let Some(v) = get("x") {
        c.x = parse_point("x", v)?;
    }
    if let Some(v) = get("input").and_then(optional) {
        c.input = Some(PathBuf::from(v));
    }
    c.heavy = args.heavy || get("heavy").map(|v| parse_bool("heavy", v)).transpose()?.unwrap_or(false);
    c.dump_field = args.dump_field || get("dump-field").map(|v| parse_bool("dump-field", v)).transpose()?.unwrap_or(false);
    c.validate()?;
    Ok(c)
}

/// Resolves parsed flags, reading `--config` from disk when given.
pub fn load(args: &Args) -> Result<RunConfig, CliError> {
    let text = match &args.config {
        Some(path) => Some(read_config(Path::new(path))?),
        None => None,
    };
    parse_config(args, text.as_deref())
}

/// Parses `argv` (program name first) and resolves it.
pub fn from_argv<I, T>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = Args::try_parse_from(argv).map_err(|e| CliError::Usage(e.to_string()))?;
    load(&args)
}

fn read_config(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}
