//! Two-stage structural-adaptive selection of direction and bandwidth.

use std::collections::HashMap;

use crate::error::{invalid, Result};
use crate::estimator::{direction_grid, estimate_with_matrix, matrix_pair, matrix_single, Direction, TransformMatrix};
use crate::exec::Execution;
use crate::kernels::{Kernel1D, ProductKernel};
use crate::noise_field::{check_epsilon, Observation};
use crate::report::CsvTable;

/// Parameters of the selection rule.
#[derive(Clone, Debug)]
pub struct SelectorConfig {
    /// Risk order entering the threshold.
    pub r: f64,
    /// Noise level used by the thresholds (kept positive for deterministic observations).
    pub epsilon: f64,
    pub n_directions: usize,
    pub kernel: ProductKernel,
    pub threshold_scale: f64,
    /// Bandwidth levels below this are skipped as unresolved by the grid; `None` keeps all.
    pub min_bandwidth: Option<f64>,
    /// Share estimates between identical matrices (results are identical either way).
    pub cache: bool,
    pub execution: Execution,
    /// Sup norm of the link, when known, for the ε-guard warning.
    pub link_bound: Option<f64>,
}

impl SelectorConfig {
    pub const DEFAULT_DIRECTIONS: usize = 256;

    pub fn new(kernel: ProductKernel, epsilon: f64) -> SelectorConfig {
        SelectorConfig {
            r: 2.0,
            epsilon,
            n_directions: Self::DEFAULT_DIRECTIONS,
            kernel,
            threshold_scale: 1.0,
            min_bandwidth: None,
            cache: true,
            execution: Execution::Sequential,
            link_bound: None,
        }
    }

    pub fn with_directions(mut self, n: usize) -> Self {
        self.n_directions = n;
        self
    }
    pub fn with_scale(mut self, scale: f64) -> Self {
        self.threshold_scale = scale;
        self
    }
    pub fn with_min_bandwidth(mut self, h: Option<f64>) -> Self {
        self.min_bandwidth = h;
        self
    }
    pub fn with_r(mut self, r: f64) -> Self {
        self.r = r;
        self
    }
    pub fn with_cache(mut self, cache: bool) -> Self {
        self.cache = cache;
        self
    }
    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    /// Checks the guards; returns warnings that do not invalidate the configuration.
    pub fn validate(&self) -> Result<Vec<String>> {
        check_epsilon(self.epsilon)?;
        if self.n_directions < 16 {
            return Err(invalid(format!("n_directions = {} must be at least 16", self.n_directions)));
        }
        if !(self.r >= 1.0) {
            return Err(invalid(format!("r = {} must be at least 1", self.r)));
        }
        if !(self.threshold_scale > 0.0) {
            return Err(invalid(format!("threshold_scale = {} must be positive", self.threshold_scale)));
        }
        let k = self.kernel.factor();
        let mut warnings = Vec::new();
        match self.link_bound {
            Some(m) => {
                let limit = (-(1.0f64).max((2.0 * m * k.l1_norm() / k.sup_norm()).powi(2))).exp();
                if self.epsilon > limit {
                    warnings.push(format!(
                        "ε = {} exceeds exp(-max(1, (2M‖K‖₁/‖K‖∞)²)) = {limit:.3e} for M = {m}",
                        self.epsilon
                    ));
                }
            }
            None => warnings.push("link bound M not supplied; ε-guard on M unchecked".into()),
        }
        Ok(warnings)
    }
}

/// `Λ(K, Q) = 8√ln(1 + 2Q‖K‖∞) + 50`.
pub fn lambda_const(kernel: &Kernel1D) -> f64 {
    lambda_from(kernel.lipschitz_q(), kernel.sup_norm())
}

/// `Λ` from raw constants.
pub fn lambda_from(q: f64, sup_norm: f64) -> f64 {
    8.0 * (1.0 + 2.0 * q * sup_norm).ln().sqrt() + 50.0
}

/// `TH(η) = 2‖K‖∞²[Λ + √(4r+2) + 1]·ε·√(ln(1/ε)/η)`, times the threshold scale.
pub fn threshold(eta: f64, config: &SelectorConfig) -> f64 {
    threshold_at_scale(eta, config, config.threshold_scale)
}

fn threshold_at_scale(eta: f64, config: &SelectorConfig, scale: f64) -> f64 {
    let k = config.kernel.factor();
    let eps = config.epsilon;
    2.0 * k.sup_norm().powi(2)
        * (lambda_const(k) + (4.0 * config.r + 2.0).sqrt() + 1.0)
        * eps
        * ((1.0 / eps).ln() / eta).sqrt()
        * scale
}

/// `H_ε = {2^{-k}} ∩ [ε², 1]`, largest first.
pub fn bandwidth_grid(epsilon: f64) -> Vec<f64> {
    let floor = epsilon * epsilon;
    let mut out = Vec::new();
    let mut h = 1.0f64;
    while h >= floor {
        out.push(h);
        h *= 0.5;
    }
    out
}

/// The levels actually scanned and those dropped as unresolved.
pub fn scanned_levels(config: &SelectorConfig) -> (Vec<f64>, Vec<f64>) {
    let all = bandwidth_grid(config.epsilon);
    match config.min_bandwidth {
        None => (all, Vec::new()),
        Some(floor) => {
            let (mut keep, drop): (Vec<f64>, Vec<f64>) = all.into_iter().partition(|&h| h >= floor);
            if keep.is_empty() {
                keep.push(1.0);
            }
            (keep, drop)
        }
    }
}

/// Every estimate the rule needs at one point.
#[derive(Clone, Debug)]
pub struct SelectionTables {
    /// Scanned bandwidths, largest first.
    pub levels: Vec<f64>,
    pub under_resolved: Vec<f64>,
    pub directions: Vec<Direction>,
    /// `singles[l][k] = F̂_(θ_k, η_l)(x)`.
    pub singles: Vec<Vec<f64>>,
    /// `gaps[l][k] = max_ν |F̂_(θ_k,η_l)(ν,η_l)(x) − F̂_(ν,η_l)(x)|`.
    pub gaps: Vec<Vec<f64>>,
}

struct MatrixSet {
    index: HashMap<[u64; 4], usize>,
    mats: Vec<TransformMatrix>,
    cache: bool,
}

impl MatrixSet {
    fn slot(&mut self, e: TransformMatrix) -> usize {
        if !self.cache {
            self.mats.push(e);
            return self.mats.len() - 1;
        }
        let next = self.mats.len();
        let slot = *self.index.entry(e.key()).or_insert(next);
        if slot == next {
            self.mats.push(e);
        }
        slot
    }
}

/// Evaluates all single and pair estimators over the direction and bandwidth grids.
pub fn compute_tables(obs: &Observation, x: [f64; 2], config: &SelectorConfig) -> SelectionTables {
    let (levels, under_resolved) = scanned_levels(config);
    let directions = direction_grid(config.n_directions);
    let n = directions.len();
    let mut set = MatrixSet {
        index: HashMap::new(),
        mats: Vec::new(),
        cache: config.cache,
    };
    let mut single_slot = vec![vec![0usize; n]; levels.len()];
    let mut pair_slot = vec![vec![0usize; n * n]; levels.len()];
    for (l, &eta) in levels.iter().enumerate() {
        for (m, nu) in directions.iter().enumerate() {
            single_slot[l][m] = set.slot(matrix_single(nu, eta));
        }
        for (k, theta) in directions.iter().enumerate() {
            for (m, nu) in directions.iter().enumerate() {
                pair_slot[l][k * n + m] = set.slot(matrix_pair(theta, nu, eta));
            }
        }
    }
    let values = config
        .execution
        .map(&set.mats, |e| estimate_with_matrix(obs, &config.kernel, e, x));

    let singles: Vec<Vec<f64>> = single_slot
        .iter()
        .map(|row| row.iter().map(|&s| values[s]).collect())
        .collect();
    let gaps = (0..levels.len())
        .map(|l| {
            (0..n)
                .map(|k| {
                    (0..n)
                        .map(|m| (values[pair_slot[l][k * n + m]] - singles[l][m]).abs())
                        .fold(0.0, f64::max)
                })
                .collect()
        })
        .collect();
    SelectionTables {
        levels,
        under_resolved,
        directions,
        singles,
        gaps,
    }
}

/// Outcome of the rule for one threshold scale.
#[derive(Clone, Debug, PartialEq)]
pub struct Decision {
    /// `r_values[j][k] = R_(θ_k, h_j)(x)`.
    pub r_values: Vec<Vec<f64>>,
    pub h_tilde_level: Option<usize>,
    pub theta_hat_index: usize,
    pub h_hat_level: usize,
    pub fallback_used: bool,
}

impl SelectionTables {
    /// Thresholds on the scanned levels at the given scale.
    pub fn thresholds(&self, config: &SelectorConfig, scale: f64) -> Vec<f64> {
        self.levels.iter().map(|&eta| threshold_at_scale(eta, config, scale)).collect()
    }

    /// `R(θ_k, h_j) = max_{l ≥ j} (gaps[l][k] − TH(η_l))`.
    pub fn r_values(&self, th: &[f64]) -> Vec<Vec<f64>> {
        let n = self.directions.len();
        let mut out = vec![vec![0.0; n]; self.levels.len()];
        let mut running = vec![f64::NEG_INFINITY; n];
        for l in (0..self.levels.len()).rev() {
            for (run, gap) in running.iter_mut().zip(&self.gaps[l]) {
                *run = run.max(gap - th[l]);
            }
            out[l].clone_from(&running);
        }
        out
    }

    /// First stage: `(θ̂ index, h̃ level)`; `None` level means `P(x)` is empty.
    pub fn first_stage(&self, r_values: &[Vec<f64>]) -> (usize, Option<usize>) {
        for (j, row) in r_values.iter().enumerate() {
            let best = row
                .iter()
                .enumerate()
                .filter(|(_, r)| **r <= 0.0)
                .map(|(k, _)| k)
                .min_by(|&a, &b| {
                    let (da, db) = (self.directions[a], self.directions[b]);
                    da.theta1()
                        .total_cmp(&db.theta1())
                        .then(da.theta2().total_cmp(&db.theta2()))
                });
            if let Some(k) = best {
                return (k, Some(j));
            }
        }
        (0, None)
    }

    /// Second stage: the largest level `h` with `|F̂(θ̂,h) − F̂(θ̂,η)| ≤ TH(η)` for all `η ≤ h`.
    pub fn second_stage(&self, theta_index: usize, th: &[f64]) -> usize {
        let est: Vec<f64> = self.singles.iter().map(|row| row[theta_index]).collect();
        (0..est.len())
            .find(|&j| (j + 1..est.len()).all(|l| (est[j] - est[l]).abs() <= th[l]))
            .unwrap_or(est.len() - 1)
    }

    pub fn decide(&self, config: &SelectorConfig, scale: f64) -> Decision {
        let th = self.thresholds(config, scale);
        let r_values = self.r_values(&th);
        let (theta_hat_index, h_tilde_level) = self.first_stage(&r_values);
        let h_hat_level = self.second_stage(theta_hat_index, &th);
        Decision {
            r_values,
            h_tilde_level,
            theta_hat_index,
            h_hat_level,
            fallback_used: h_tilde_level.is_none(),
        }
    }

    /// Full trace for the given decision.
    pub fn trace(&self, decision: Decision) -> SelectionTrace {
        SelectionTrace {
            bandwidth_grid: self.levels.clone(),
            under_resolved: self.under_resolved.clone(),
            directions: self.directions.clone(),
            h_tilde: decision.h_tilde_level.map(|j| self.levels[j]),
            theta_hat: self.directions[decision.theta_hat_index],
            theta_hat_index: decision.theta_hat_index,
            h_hat: self.levels[decision.h_hat_level],
            estimate: self.singles[decision.h_hat_level][decision.theta_hat_index],
            fallback_used: decision.fallback_used,
            r_values: decision.r_values,
        }
    }
}

/// Audit record of one selection.
#[derive(Clone, Debug, PartialEq)]
pub struct SelectionTrace {
    pub bandwidth_grid: Vec<f64>,
    pub under_resolved: Vec<f64>,
    pub directions: Vec<Direction>,
    /// `r_values[j][k]` for bandwidth `j` and direction `k`.
    pub r_values: Vec<Vec<f64>>,
    pub h_tilde: Option<f64>,
    pub theta_hat_index: usize,
    pub theta_hat: Direction,
    pub h_hat: f64,
    pub estimate: f64,
    pub fallback_used: bool,
}

impl SelectionTrace {
    /// `(θ-index, h)` pairs with `R ≤ 0`.
    pub fn p_membership(&self) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        for (j, row) in self.r_values.iter().enumerate() {
            for (k, r) in row.iter().enumerate() {
                if *r <= 0.0 {
                    out.push((k, self.bandwidth_grid[j]));
                }
            }
        }
        out
    }

    /// One row per `(θ-index, h)` plus a summary row.
    pub fn to_table(&self, header: Vec<String>) -> CsvTable {
        let mut t = CsvTable::new(
            header,
            &["row", "theta_index", "theta1", "theta2", "h", "R", "in_P", "estimate", "fallback"],
        );
        for (j, row) in self.r_values.iter().enumerate() {
            for (k, r) in row.iter().enumerate() {
                let d = self.directions[k];
                t.push(vec![
                    "cell".into(),
                    k.to_string(),
                    format!("{:?}", d.theta1()),
                    format!("{:?}", d.theta2()),
                    format!("{:?}", self.bandwidth_grid[j]),
                    format!("{r:?}"),
                    (*r <= 0.0).to_string(),
                    String::new(),
                    String::new(),
                ]);
            }
        }
        t.push(vec![
            "summary".into(),
            self.theta_hat_index.to_string(),
            format!("{:?}", self.theta_hat.theta1()),
            format!("{:?}", self.theta_hat.theta2()),
            format!("{:?}", self.h_hat),
            self.h_tilde.map(|h| format!("h_tilde={h:?}")).unwrap_or_else(|| "h_tilde=none".into()),
            String::new(),
            format!("{:?}", self.estimate),
            self.fallback_used.to_string(),
        ]);
        t
    }
}

/// `R_(θ,h)(x)` for an arbitrary direction, with the sup over `ν` on the configured grid.
pub fn compute_r(obs: &Observation, theta: &Direction, h: f64, x: [f64; 2], config: &SelectorConfig) -> f64 {
    let (levels, _) = scanned_levels(config);
    let nus = direction_grid(config.n_directions);
    levels
        .iter()
        .filter(|&&eta| eta <= h)
        .map(|&eta| {
            let gap = nus
                .iter()
                .map(|nu| {
                    let pair = estimate_with_matrix(obs, &config.kernel, &matrix_pair(theta, nu, eta), x);
                    let single = estimate_with_matrix(obs, &config.kernel, &matrix_single(nu, eta), x);
                    (pair - single).abs()
                })
                .fold(0.0, f64::max);
            gap - threshold(eta, config)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// First stage on its own: `(θ̂, h̃, P(x))`.
pub fn first_stage(obs: &Observation, x: [f64; 2], config: &SelectorConfig) -> (Direction, Option<f64>, Vec<(usize, f64)>) {
    let tables = compute_tables(obs, x, config);
    let trace = tables.trace(tables.decide(config, config.threshold_scale));
    let p = trace.p_membership();
    (trace.theta_hat, trace.h_tilde, p)
}

/// Second stage for a given direction.
pub fn second_stage(obs: &Observation, theta_hat: &Direction, x: [f64; 2], config: &SelectorConfig) -> f64 {
    let (levels, _) = scanned_levels(config);
    let est: Vec<f64> = levels
        .iter()
        .map(|&h| estimate_with_matrix(obs, &config.kernel, &matrix_single(theta_hat, h), x))
        .collect();
    let j = (0..est.len())
        .find(|&j| (j + 1..est.len()).all(|l| (est[j] - est[l]).abs() <= threshold(levels[l], config)))
        .unwrap_or(est.len() - 1);
    levels[j]
}

/// `F̂_(θ̂,ĥ)(x)` with its trace.
pub fn select_estimate(obs: &Observation, x: [f64; 2], config: &SelectorConfig) -> (f64, SelectionTrace) {
    let tables = compute_tables(obs, x, config);
    let trace = tables.trace(tables.decide(config, config.threshold_scale));
    (trace.estimate, trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise_field::{simulate, simulate_deterministic, Field, GridSpec};

    fn cfg(eps: f64) -> SelectorConfig {
        SelectorConfig::new(ProductKernel::default(), eps).with_directions(16)
    }

    #[test]
    fn lambda_values() {
        let k = crate::kernels::make_default_kernel();
        assert!((lambda_const(&k) - (8.0 * 19f64.ln().sqrt() + 50.0)).abs() < 1e-12);
        assert!((lambda_const(&k) - 63.73).abs() < 0.01);
        assert_eq!(lambda_from(0.0, 1.5), 50.0);
        let vals: Vec<f64> = (0..20).map(|i| lambda_from(i as f64 * 0.7, 1.5)).collect();
        assert!(vals.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn threshold_values() {
        let c = cfg(0.05);
        assert!((threshold(1.0, &c) - 26.4).abs() < 0.05);
        assert!((threshold(0.5, &c) / threshold(1.0, &c) - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(threshold(1.0, &c.clone().with_scale(0.5)), 0.5 * threshold(1.0, &c));
        let grid = bandwidth_grid(0.05);
        assert!(grid.windows(2).all(|w| threshold(w[1], &c) > threshold(w[0], &c)));
    }

    #[test]
    fn grid_levels() {
        assert_eq!(bandwidth_grid(0.25), vec![1.0, 0.5, 0.25, 0.125, 0.0625]);
        let c = cfg(0.05).with_min_bandwidth(Some(0.1));
        assert_eq!(scanned_levels(&c).0, vec![1.0, 0.5, 0.25, 0.125]);
    }

    #[test]
    fn constant_signal_selects_top() {
        let grid = GridSpec::with_n(128).unwrap();
        let obs = simulate_deterministic(&Field::constant(3.0), grid);
        let c = cfg(0.25);
        let (est, trace) = select_estimate(&obs, [0.1, -0.2], &c);
        assert!((est - 3.0).abs() < 1e-12);
        assert_eq!(trace.h_hat, 1.0);
        assert_eq!(trace.h_tilde, Some(1.0));
        assert!(trace.r_values.iter().flatten().all(|r| *r < 0.0));
        assert_eq!(trace.theta_hat, -Direction::new(1.0, 0.0).unwrap());
        assert_eq!(trace.p_membership().len(), 16 * trace.bandwidth_grid.len());
    }

    #[test]
    fn cache_does_not_change_results() {
        let grid = GridSpec::with_n(48).unwrap();
        let f = Field::new("ridge", |t| (3.0 * t[0] + t[1]).sin());
        let obs = simulate(&f, 0.1, grid, 1).unwrap();
        let c = cfg(0.3);
        let a = compute_tables(&obs, [0.0, 0.1], &c);
        let b = compute_tables(&obs, [0.0, 0.1], &c.clone().with_cache(false));
        assert_eq!(a.singles, b.singles);
        assert_eq!(a.gaps, b.gaps);
    }

    #[test]
    fn tiny_scale_falls_back() {
        let grid = GridSpec::with_n(48).unwrap();
        let obs = simulate(&Field::zero(), 0.2, grid, 2).unwrap();
        let c = cfg(0.3).with_scale(1e-12);
        let (_, trace) = select_estimate(&obs, [0.0, 0.0], &c);
        assert!(trace.fallback_used);
        assert_eq!(trace.theta_hat, Direction::new(1.0, 0.0).unwrap());
        assert_eq!(trace.h_hat, *trace.bandwidth_grid.last().unwrap());
    }

    #[test]
    fn compute_r_agrees_with_tables() {
        let grid = GridSpec::with_n(48).unwrap();
        let obs = simulate(&Field::new("s", |t| t[0] * t[0]), 0.1, grid, 3).unwrap();
        let c = cfg(0.3).with_scale(0.02);
        let tables = compute_tables(&obs, [0.1, 0.1], &c);
        let d = tables.decide(&c, c.threshold_scale);
        for (j, &h) in tables.levels.iter().enumerate() {
            for k in [0usize, 5, 11] {
                let r = compute_r(&obs, &tables.directions[k], h, [0.1, 0.1], &c);
                assert_eq!(r, d.r_values[j][k]);
            }
        }
        let th = tables.directions[d.theta_hat_index];
        assert_eq!(second_stage(&obs, &th, [0.1, 0.1], &c), tables.levels[d.h_hat_level]);
    }
}
