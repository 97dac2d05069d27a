//! Monte Carlo risks, threshold calibration, rate fits and oracle-ratio diagnostics.

use crate::error::{invalid, LabError, Result};
use crate::estimator::{bias_pair, bias_single, estimate, Direction};
use crate::exec::Execution;
use crate::kernels::ProductKernel;
use crate::noise_field::{check_epsilon, derive_seed, simulate_discretized, DiscretizedField, Field, GridSpec};
use crate::oracle::{c_r_constant, level, oracle_bandwidth, oracle_risk_bound, BiasProfile};
use crate::selector::{compute_tables, lambda_const, SelectorConfig};
use crate::signals::Link;

/// How an estimate is produced from an observation.
#[derive(Clone, Debug)]
pub enum Procedure {
    /// The two-stage selection rule.
    Adaptive(SelectorConfig),
    /// `F̂_(θ°,h*)` with the true direction and the oracle bandwidth.
    Oracle {
        kernel: ProductKernel,
        theta: Direction,
        h_star: f64,
    },
    Fixed {
        kernel: ProductKernel,
        theta: Direction,
        h: f64,
    },
}

impl Procedure {
    pub fn label(&self) -> &'static str {
        match self {
            Procedure::Adaptive(_) => "adaptive",
            Procedure::Oracle { .. } => "oracle",
            Procedure::Fixed { .. } => "fixed",
        }
    }
}

/// One estimate and the bandwidth it used.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Outcome {
    pub estimate: f64,
    pub h: f64,
    pub theta: Direction,
}

fn apply(proc: &Procedure, obs: &crate::noise_field::Observation, x: [f64; 2]) -> Outcome {
    match proc {
        Procedure::Adaptive(config) => {
            let tables = compute_tables(obs, x, config);
            let d = tables.decide(config, config.threshold_scale);
            Outcome {
                estimate: tables.singles[d.h_hat_level][d.theta_hat_index],
                h: tables.levels[d.h_hat_level],
                theta: tables.directions[d.theta_hat_index],
            }
        }
        Procedure::Oracle { kernel, theta, h_star } => Outcome {
            estimate: estimate(obs, kernel, theta, *h_star, x),
            h: *h_star,
            theta: *theta,
        },
        Procedure::Fixed { kernel, theta, h } => Outcome {
            estimate: estimate(obs, kernel, theta, *h, x),
            h: *h,
            theta: *theta,
        },
    }
}

/// `outcomes[rep][point]` over independent observations seeded by `derive_seed(seed, rep)`.
pub fn replicate_outcomes(
    proc: &Procedure,
    field: &DiscretizedField,
    epsilon: f64,
    points: &[[f64; 2]],
    replicates: usize,
    seed: u64,
    exec: Execution,
) -> Result<Vec<Vec<Outcome>>> {
    check_epsilon(epsilon)?;
    let runs = exec.map_range(replicates, |rep| {
        let obs = simulate_discretized(field, epsilon, derive_seed(seed, rep as u64))?;
        Ok(points.iter().map(|&x| apply(proc, &obs, x)).collect())
    });
    runs.into_iter().collect()
}

/// `(E|F̂(x) − F(x)|^r)^{1/r}` with a delta-method standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RiskEstimate {
    pub risk: f64,
    pub stderr: f64,
    pub replicates: usize,
    pub mean_error: f64,
    pub mean_h: f64,
}

impl RiskEstimate {
    fn from_errors(errors: &[f64], hs: &[f64], r: f64) -> RiskEstimate {
        let n = errors.len() as f64;
        let powers: Vec<f64> = errors.iter().map(|e| e.abs().powf(r)).collect();
        let m = powers.iter().sum::<f64>() / n;
        let var = if errors.len() > 1 {
            powers.iter().map(|p| (p - m).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        let se_m = (var / n).sqrt();
        let risk = m.powf(1.0 / r);
        let stderr = if m > 0.0 { risk / (r * m) * se_m } else { 0.0 };
        RiskEstimate {
            risk,
            stderr,
            replicates: errors.len(),
            mean_error: errors.iter().sum::<f64>() / n,
            mean_h: hs.iter().sum::<f64>() / n,
        }
    }
}

/// Pointwise risk at `x`.
#[allow(clippy::too_many_arguments)]
pub fn pointwise_risk(
    proc: &Procedure,
    field: &DiscretizedField,
    truth: f64,
    epsilon: f64,
    x: [f64; 2],
    r: f64,
    replicates: usize,
    seed: u64,
    exec: Execution,
) -> Result<RiskEstimate> {
    if replicates == 0 {
        return Err(invalid("at least one replicate is needed"));
    }
    let runs = replicate_outcomes(proc, field, epsilon, &[x], replicates, seed, exec)?;
    let errors: Vec<f64> = runs.iter().map(|o| o[0].estimate - truth).collect();
    let hs: Vec<f64> = runs.iter().map(|o| o[0].h).collect();
    Ok(RiskEstimate::from_errors(&errors, &hs, r))
}

/// Quadrature nodes on `[-1/2, 1/2]²` with weights summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct Quadrature {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl Quadrature {
    pub fn uniform(points: Vec<[f64; 2]>) -> Quadrature {
        let w = 1.0 / points.len() as f64;
        let weights = vec![w; points.len()];
        Quadrature { points, weights }
    }

    /// Midpoint nodes along `x₁ ∈ [-1/2, 1/2]` at `x₂ = 0`, for signals that do not depend on
    /// `x₂`. Each interval `[a, b]` gets its own node count; weights are the cell lengths.
    pub fn along_first_axis(pieces: &[(f64, f64, usize)]) -> Result<Quadrature> {
        let mut points = Vec::new();
        let mut weights = Vec::new();
        let mut total = 0.0;
        for &(a, b, n) in pieces {
            if !(a < b && n > 0 && a >= -0.5 - 1e-12 && b <= 0.5 + 1e-12) {
                return Err(invalid(format!("bad quadrature piece [{a}, {b}] with {n} nodes")));
            }
            let dx = (b - a) / n as f64;
            for i in 0..n {
                points.push([a + (i as f64 + 0.5) * dx, 0.0]);
                weights.push(dx);
            }
            total += b - a;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(invalid(format!("quadrature pieces cover length {total}, not 1")));
        }
        Ok(Quadrature { points, weights })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GlobalRisk {
    /// `(Σ_x w_x·mean_rep |F̂(x) − F(x)|^r)^{1/r}`.
    pub risk: f64,
    pub stderr: f64,
    pub pointwise: Vec<RiskEstimate>,
    /// `(Σ_x w_x R_x^r)^{1/r}`; equals `risk` by Fubini on the finite grid.
    pub lr_of_pointwise: f64,
    pub max_pointwise: f64,
}

/// Global `L_r` risk by quadrature of the pointwise `r`-th moments.
#[allow(clippy::too_many_arguments)]
pub fn global_risk(
    proc: &Procedure,
    field: &DiscretizedField,
    truth: &Field,
    epsilon: f64,
    r: f64,
    quad: &Quadrature,
    replicates: usize,
    seed: u64,
    exec: Execution,
) -> Result<GlobalRisk> {
    if quad.points.is_empty() || quad.points.len() != quad.weights.len() || replicates == 0 {
        return Err(invalid("global risk needs weighted points and replicates"));
    }
    let runs = replicate_outcomes(proc, field, epsilon, &quad.points, replicates, seed, exec)?;
    let truths: Vec<f64> = quad.points.iter().map(|&x| truth.eval(x)).collect();
    let pointwise: Vec<RiskEstimate> = (0..quad.points.len())
        .map(|i| {
            let errors: Vec<f64> = runs.iter().map(|o| o[i].estimate - truths[i]).collect();
            let hs: Vec<f64> = runs.iter().map(|o| o[i].h).collect();
            RiskEstimate::from_errors(&errors, &hs, r)
        })
        .collect();
    // Per-replicate integrated loss, for the standard error.
    let per_rep: Vec<f64> = runs
        .iter()
        .map(|o| {
            o.iter()
                .zip(&truths)
                .zip(&quad.weights)
                .map(|((oc, f), w)| w * (oc.estimate - f).abs().powf(r))
                .sum()
        })
        .collect();
    let n = per_rep.len() as f64;
    let m = per_rep.iter().sum::<f64>() / n;
    let var = if per_rep.len() > 1 {
        per_rep.iter().map(|p| (p - m).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let risk = m.powf(1.0 / r);
    let stderr = if m > 0.0 { risk / (r * m) * (var / n).sqrt() } else { 0.0 };
    let lr_of_pointwise = pointwise
        .iter()
        .zip(&quad.weights)
        .map(|(p, w)| w * p.risk.powf(r))
        .sum::<f64>()
        .powf(1.0 / r);
    let max_pointwise = pointwise.iter().map(|p| p.risk).fold(0.0, f64::max);
    Ok(GlobalRisk {
        risk,
        stderr,
        pointwise,
        lr_of_pointwise,
        max_pointwise,
    })
}

/// Which rate a sweep is compared against.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Regime {
    Pointwise,
    /// Global `L_r` risk over a Nikol'skii class `N_p(β, L)`.
    Global { p: f64, r: f64 },
}

impl Regime {
    /// `2β/(2β+1)`, or `(β − 1/p + 1/r)/(β − 1/p + 1/2)` when `(2β+1)p < r`.
    pub fn exponent(self, beta: f64) -> f64 {
        match self {
            Regime::Global { p, r } if (2.0 * beta + 1.0) * p < r => (beta - 1.0 / p + 1.0 / r) / (beta - 1.0 / p + 0.5),
            _ => 2.0 * beta / (2.0 * beta + 1.0),
        }
    }

    /// The boundary `(2β+1)p = r`, whose rate is unsettled; fits are reported, never asserted.
    pub fn is_boundary(self, beta: f64) -> bool {
        matches!(self, Regime::Global { p, r } if ((2.0 * beta + 1.0) * p - r).abs() < 1e-12)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root mean square residual of the fit.
    pub residual: f64,
    pub theoretical_exponent: f64,
    pub n_points: usize,
}

/// Least-squares line through `(log a, log b)`.
pub fn log_log_fit(a: &[f64], b: &[f64]) -> Result<(f64, f64, f64)> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(LabError::DegenerateSweep(format!("{} abscissae for {} values", a.len(), b.len())));
    }
    if a.iter().chain(b).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(LabError::DegenerateSweep("log-log fit needs positive finite values".into()));
    }
    let xs: Vec<f64> = a.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = b.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(LabError::DegenerateSweep("all abscissae coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum::<f64>() / n).sqrt();
    Ok((slope, intercept, rms))
}

/// `ε√ln(1/ε)`.
pub fn noise_scale(epsilon: f64) -> f64 {
    epsilon * (1.0 / epsilon).ln().sqrt()
}

/// Slope of log risk against `log(ε√ln(1/ε))` over at least four noise levels.
pub fn rate_fit(epsilons: &[f64], risks: &[f64], beta: f64, regime: Regime) -> Result<RateFit> {
    if epsilons.len() < 4 {
        return Err(LabError::DegenerateSweep(format!(
            "rate fits need at least 4 noise levels, got {}",
            epsilons.len()
        )));
    }
    let abscissa: Vec<f64> = epsilons.iter().map(|&e| noise_scale(e)).collect();
    let (slope, intercept, residual) = log_log_fit(&abscissa, risks)?;
    Ok(RateFit {
        slope,
        intercept,
        residual,
        theoretical_exponent: regime.exponent(beta),
        n_points: epsilons.len(),
    })
}

/// Result of the pure-noise threshold calibration.
#[derive(Clone, Debug, PartialEq)]
pub struct Calibration {
    pub scale: f64,
    /// False-rejection rate at `scale`.
    pub false_rejection: f64,
    pub epsilon: f64,
    pub replicates: usize,
    pub seed: u64,
    pub target: f64,
}

/// Target false-rejection rate of `h = 1` under `F ≡ 0`.
pub const CALIBRATION_TARGET: f64 = 0.05;

/// The smallest scale on a geometric grid (ratio `2^{1/16}`) from which the false-rejection
/// rate of `h = 1` under `F ≡ 0` stays at or below 5% for all larger grid scales.
pub fn calibrate_threshold(
    config: &SelectorConfig,
    grid: GridSpec,
    x: [f64; 2],
    replicates: usize,
    seed: u64,
    exec: Execution,
) -> Result<Calibration> {
    config.validate()?;
    if replicates == 0 {
        return Err(invalid("calibration needs replicates"));
    }
    let zero = DiscretizedField::new(&Field::zero(), grid);
    let tables = exec.map_range(replicates, |rep| {
        let obs = simulate_discretized(&zero, config.epsilon, derive_seed(seed, rep as u64))?;
        Ok(compute_tables(&obs, x, config))
    });
    let tables: Vec<_> = tables.into_iter().collect::<Result<_>>()?;
    let rate = |scale: f64| {
        let rejected = tables
            .iter()
            .filter(|t| t.levels[t.decide(config, scale).h_hat_level] < 1.0)
            .count();
        rejected as f64 / replicates as f64
    };
    // Scales from 2^-12 to 2^4.
    let scales: Vec<f64> = (0..=256).map(|i| 2f64.powf(-12.0 + i as f64 / 16.0)).collect();
    let rates: Vec<f64> = scales.iter().map(|&s| rate(s)).collect();
    let mut chosen = scales.len() - 1;
    for i in (0..scales.len()).rev() {
        if rates[i] <= CALIBRATION_TARGET {
            chosen = i;
        } else {
            break;
        }
    }
    Ok(Calibration {
        scale: scales[chosen],
        false_rejection: rates[chosen],
        epsilon: config.epsilon,
        replicates,
        seed,
        target: CALIBRATION_TARGET,
    })
}

/// `C_{r,1} = 8[Λ + √(4r+2) + 1] + 𝔠_r[(2 + √2)Λ + 2] + 1`.
pub fn c_r1(r: f64, lambda: f64) -> Result<f64> {
    Ok(8.0 * (lambda + (4.0 * r + 2.0).sqrt() + 1.0) + c_r_constant(r)? * ((2.0 + 2f64.sqrt()) * lambda + 2.0) + 1.0)
}

/// `C_{r,2} = 2^{1/r}[2M + Λ𝔠_{2r}]`.
pub fn c_r2(r: f64, m: f64, lambda: f64) -> Result<f64> {
    Ok(2f64.powf(1.0 / r) * (2.0 * m + lambda * c_r_constant(2.0 * r)?))
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleRatioRow {
    pub epsilon: f64,
    pub adaptive: RiskEstimate,
    pub oracle: RiskEstimate,
    pub h_star: f64,
    pub oracle_bound: f64,
    /// Adaptive risk over the oracle bound.
    pub ratio: f64,
    pub c_r1: f64,
    pub c_r2: f64,
    /// `C_{r,1}√(‖K‖⁴∞ε² ln(1/ε)/h*) + C_{r,2}‖K‖²∞ε√ln(1/ε)`.
    pub inequality_bound: f64,
    pub inequality_holds: bool,
}

/// Settings shared by sweeps.
#[derive(Clone, Debug)]
pub struct RiskConfig {
    pub r: f64,
    pub points: Vec<[f64; 2]>,
    pub replicates: usize,
    pub epsilons: Vec<f64>,
    pub master_seed: u64,
    /// `None` triggers a calibration at the largest ε of the sweep.
    pub threshold_scale: Option<f64>,
    pub grid: GridSpec,
    pub execution: Execution,
    pub calibration_replicates: usize,
}

impl RiskConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.r >= 1.0) {
            return Err(invalid(format!("r = {} must be at least 1", self.r)));
        }
        if self.points.is_empty() {
            return Err(invalid("risk sweeps need at least one point"));
        }
        if self.replicates == 0 {
            return Err(invalid("replicates must be positive"));
        }
        for &e in &self.epsilons {
            check_epsilon(e)?;
        }
        Ok(())
    }

    fn seed_for(&self, eps_index: usize) -> u64 {
        derive_seed(self.master_seed, 1_000_000 + eps_index as u64)
    }

    /// Scale from the config, or calibrated at the largest ε.
    pub fn resolve_scale(&self, selector: &SelectorConfig) -> Result<(f64, Option<Calibration>)> {
        if let Some(s) = self.threshold_scale {
            return Ok((s, None));
        }
        let eps = self.epsilons.iter().copied().fold(0.0, f64::max);
        let mut cfg = selector.clone();
        cfg.epsilon = eps;
        let cal = calibrate_threshold(
            &cfg,
            self.grid,
            self.points[0],
            self.calibration_replicates,
            derive_seed(self.master_seed, 7),
            self.execution,
        )?;
        Ok((cal.scale, Some(cal)))
    }
}

/// Adaptive risk against the oracle bound over an ε sweep at `points[0]`.
pub fn oracle_ratio_study(
    link: &Link,
    theta0: Direction,
    selector: &SelectorConfig,
    config: &RiskConfig,
    scale: f64,
) -> Result<Vec<OracleRatioRow>> {
    config.validate()?;
    let x = config.points[0];
    let field = crate::signals::single_index_field(link, theta0);
    let disc = DiscretizedField::new(&field, config.grid);
    let truth = field.eval(x);
    let kernel = selector.kernel.clone();
    let profile = BiasProfile::new(kernel.factor().clone(), link.clone());
    let y = theta0.project(x);
    let lambda = lambda_const(kernel.factor());
    let m = link.sup_on(-2.0, 2.0);
    let c1 = c_r1(config.r, lambda)?;
    let c2 = c_r2(config.r, m, lambda)?;
    let sup = kernel.factor().sup_norm();
    config
        .epsilons
        .iter()
        .enumerate()
        .map(|(i, &eps)| {
            let mut cfg = selector.clone().with_scale(scale).with_r(config.r);
            cfg.epsilon = eps;
            let seed = config.seed_for(i);
            let adaptive = pointwise_risk(
                &Procedure::Adaptive(cfg),
                &disc,
                truth,
                eps,
                x,
                config.r,
                config.replicates,
                seed,
                config.execution,
            )?;
            let h_star = oracle_bandwidth(&profile, eps, y)?;
            let oracle = pointwise_risk(
                &Procedure::Oracle {
                    kernel: kernel.clone(),
                    theta: theta0,
                    h_star,
                },
                &disc,
                truth,
                eps,
                x,
                config.r,
                config.replicates,
                seed,
                config.execution,
            )?;
            let bound = oracle_risk_bound(h_star, eps, config.r, kernel.factor())?;
            let term = (sup.powi(4) * eps * eps * (1.0 / eps).ln() / h_star).sqrt();
            let inequality_bound = c1 * term + c2 * sup * sup * noise_scale(eps);
            Ok(OracleRatioRow {
                epsilon: eps,
                adaptive,
                oracle,
                h_star,
                oracle_bound: bound,
                ratio: adaptive.risk / bound,
                c_r1: c1,
                c_r2: c2,
                inequality_bound,
                inequality_holds: adaptive.risk <= inequality_bound,
            })
        })
        .collect()
}

/// One sweep point of a global-risk study.
#[derive(Clone, Debug, PartialEq)]
pub struct GlobalRow {
    pub epsilon: f64,
    pub risk: GlobalRisk,
}

/// Adaptive global `L_r` risk over an ε sweep.
pub fn global_sweep(field: &Field, selector: &SelectorConfig, config: &RiskConfig, scale: f64) -> Result<Vec<GlobalRow>> {
    config.validate()?;
    let disc = DiscretizedField::new(field, config.grid);
    config
        .epsilons
        .iter()
        .enumerate()
        .map(|(i, &eps)| {
            let mut cfg = selector.clone().with_scale(scale).with_r(config.r);
            cfg.epsilon = eps;
            let risk = global_risk(
                &Procedure::Adaptive(cfg),
                &disc,
                field,
                eps,
                config.r,
                &Quadrature::uniform(config.points.clone()),
                config.replicates,
                config.seed_for(i),
                config.execution,
            )?;
            Ok(GlobalRow { epsilon: eps, risk })
        })
        .collect()
}

/// One sampled configuration of the three bias inequalities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BiasInequalityCase {
    pub nu: Direction,
    pub h: f64,
    pub eta: f64,
    /// `|S_(θ°,h)(ν,h) − S_(ν,h)|`.
    pub pair_gap: f64,
    /// `|S_(ν,h) − S_(ν,η)|`.
    pub level_gap: f64,
    /// `|S_(θ°,h) − F(x)|`.
    pub bias: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BiasInequalityReport {
    pub h_star: f64,
    /// `2(h*)^{-1/2}‖K‖²∞ε√ln(1/ε)`.
    pub gap_bound: f64,
    /// `(h*)^{-1/2}‖K‖∞ε√ln(1/ε)`.
    pub bias_bound: f64,
    pub cases: Vec<BiasInequalityCase>,
    pub passed: [bool; 3],
}

/// Samples `(ν, η ≤ h ≤ h*/2)` and evaluates the noise-free gaps entering the oracle proof.
/// Bandwidths are drawn from the `2^{-i/8}` levels not below `h_min`.
#[allow(clippy::too_many_arguments)]
pub fn bias_inequalities(
    link: &Link,
    theta0: Direction,
    kernel: &ProductKernel,
    grid: &GridSpec,
    epsilon: f64,
    x: [f64; 2],
    h_min: f64,
    samples: usize,
    seed: u64,
) -> Result<BiasInequalityReport> {
    use rand::{Rng, SeedableRng};
    let profile = BiasProfile::new(kernel.factor().clone(), link.clone());
    let h_star = oracle_bandwidth(&profile, epsilon, theta0.project(x))?;
    let levels: Vec<f64> = (0..)
        .map(level)
        .take_while(|&h| h >= h_min.max(epsilon * epsilon))
        .filter(|&h| h <= 0.5 * h_star)
        .collect();
    if levels.is_empty() {
        return Err(invalid(format!("no bandwidth in [{h_min}, h*/2 = {}]", 0.5 * h_star)));
    }
    let field = crate::signals::single_index_field(link, theta0);
    let truth = field.eval(x);
    let sup = kernel.factor().sup_norm();
    let ns = noise_scale(epsilon);
    let gap_bound = 2.0 / h_star.sqrt() * sup * sup * ns;
    let bias_bound = sup / h_star.sqrt() * ns;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut cases = Vec::with_capacity(samples);
    for _ in 0..samples {
        let nu = Direction::from_angle(rng.random_range(0.0..std::f64::consts::TAU));
        let hi = rng.random_range(0..levels.len());
        let ei = rng.random_range(hi..levels.len());
        let (h, eta) = (levels[hi], levels[ei]);
        let s_nu_h = bias_single(&field, grid, kernel, &nu, h, x);
        cases.push(BiasInequalityCase {
            nu,
            h,
            eta,
            pair_gap: (bias_pair(&field, grid, kernel, &theta0, &nu, h, x) - s_nu_h).abs(),
            level_gap: (s_nu_h - bias_single(&field, grid, kernel, &nu, eta, x)).abs(),
            bias: (bias_single(&field, grid, kernel, &theta0, h, x) - truth).abs(),
        });
    }
    let passed = [
        cases.iter().all(|c| c.pair_gap <= gap_bound),
        cases.iter().all(|c| c.level_gap <= gap_bound),
        cases.iter().all(|c| c.bias <= bias_bound),
    ];
    Ok(BiasInequalityReport {
        h_star,
        gap_bound,
        bias_bound,
        cases,
        passed,
    })
}

/// Slope of `log‖Δ(h, ·)‖_p` against `log h` over the given bandwidths.
pub fn lp_bias_scaling(profile: &BiasProfile, p: f64, hs: &[f64]) -> Result<(f64, Vec<f64>)> {
    let norms: Vec<f64> = hs.iter().map(|&h| profile.delta_lp_norm(h, p)).collect();
    let (slope, _, _) = log_log_fit(hs, &norms)?;
    Ok((slope, norms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::make_default_kernel;

    #[test]
    fn exponents() {
        assert!((Regime::Pointwise.exponent(1.0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((Regime::Global { p: 1.0, r: 4.0 }.exponent(1.0) - 0.5).abs() < 1e-15);
        assert!((Regime::Global { p: 2.0, r: 2.0 }.exponent(1.0) - 2.0 / 3.0).abs() < 1e-15);
        assert!(Regime::Global { p: 1.0, r: 3.0 }.is_boundary(1.0));
    }

    #[test]
    fn exact_power_law_recovered() {
        let eps = [2f64.powi(-4), 2f64.powi(-5), 2f64.powi(-6), 2f64.powi(-7)];
        let risks: Vec<f64> = eps.iter().map(|&e| 3.0 * noise_scale(e).powf(2.0 / 3.0)).collect();
        let fit = rate_fit(&eps, &risks, 1.0, Regime::Pointwise).unwrap();
        assert!((fit.slope - 2.0 / 3.0).abs() < 1e-10);
        assert!(fit.residual < 1e-10);
        assert!(rate_fit(&eps[..3], &risks[..3], 1.0, Regime::Pointwise).is_err());
    }

    #[test]
    fn constants_match_display() {
        let lambda = lambda_const(&make_default_kernel());
        let c1 = c_r1(2.0, lambda).unwrap();
        // 𝔠₂ = √(2 + 2√(2/π)) ≈ 1.89625 gives C_{2,1} ≈ 960.4957.
        assert!((c1 - 960.495_666_765_665_6).abs() < 1e-6, "{c1}");
        let c2 = c_r2(1.0, 0.0, lambda).unwrap();
        assert!((c2 - 2.0 * lambda * c_r_constant(2.0).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn constant_field_noise_free_is_exact() {
        let grid = GridSpec::with_n(64).unwrap();
        let field = Field::constant(0.7);
        let obs = crate::noise_field::simulate_deterministic(&field, grid);
        let proc = Procedure::Fixed {
            kernel: ProductKernel::default(),
            theta: Direction::from_degrees(30.0),
            h: 0.5,
        };
        let o = apply(&proc, &obs, [0.1, -0.2]);
        assert!((o.estimate - 0.7).abs() < 1e-12);
    }
}
