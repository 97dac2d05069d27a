//! Discretized white-noise observations `Y(dt) = F(t)dt + εW(dt)` on a square grid.

use std::fmt;
use std::io::{BufRead, Write};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, LabError, Result};

/// Largest admissible noise level, `e^{-1}`.
pub const EPSILON_MAX: f64 = 0.367_879_441_171_442_33;

/// Checks `0 < ε ≤ e^{-1}`.
pub fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon <= EPSILON_MAX {
        Ok(())
    } else {
        Err(LabError::EpsilonOutOfRange(epsilon))
    }
}

/// The simulated domain `[-w, w]²` cut into `n × n` cells.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    half_width: f64,
    n_per_axis: usize,
}

impl GridSpec {
    pub const DEFAULT_HALF_WIDTH: f64 = 1.25;
    pub const DEFAULT_N: usize = 256;

    pub fn new(half_width: f64, n_per_axis: usize) -> Result<GridSpec> {
        if n_per_axis < 2 {
            return Err(invalid(format!("n_per_axis = {n_per_axis} must be at least 2")));
        }
        if !(half_width >= 1.25) {
            return Err(invalid(format!(
                "half_width = {half_width} must be at least 1.25 so kernel supports stay inside"
            )));
        }
        Ok(GridSpec {
            half_width,
            n_per_axis,
        })
    }

    /// Default half-width with `n` cells per axis.
    pub fn with_n(n_per_axis: usize) -> Result<GridSpec> {
        GridSpec::new(Self::DEFAULT_HALF_WIDTH, n_per_axis)
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }
    pub fn n_per_axis(&self) -> usize {
        self.n_per_axis
    }
    pub fn len(&self) -> usize {
        self.n_per_axis * self.n_per_axis
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
    pub fn step(&self) -> f64 {
        2.0 * self.half_width / self.n_per_axis as f64
    }
    pub fn cell_area(&self) -> f64 {
        self.step().powi(2)
    }
    /// `|D|`.
    pub fn area(&self) -> f64 {
        (2.0 * self.half_width).powi(2)
    }
    /// Center coordinate of cell `k` along either axis.
    #[inline]
    pub fn center(&self, k: usize) -> f64 {
        -self.half_width + (k as f64 + 0.5) * self.step()
    }
    /// Cell center `t_ij` for row `i` (second coordinate) and column `j` (first coordinate).
    #[inline]
    pub fn point(&self, row: usize, col: usize) -> [f64; 2] {
        [self.center(col), self.center(row)]
    }
    /// Smallest bandwidth the grid resolves, `4·step`.
    pub fn resolution_floor(&self) -> f64 {
        4.0 * self.step()
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            half_width: Self::DEFAULT_HALF_WIDTH,
            n_per_axis: Self::DEFAULT_N,
        }
    }
}

/// A bivariate signal with a descriptor.
#[derive(Clone)]
pub struct Field {
    id: String,
    f: Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>,
}

impl Field {
    pub fn new(id: impl Into<String>, f: impl Fn([f64; 2]) -> f64 + Send + Sync + 'static) -> Field {
        Field {
            id: id.into(),
            f: Arc::new(f),
        }
    }

    pub fn constant(c: f64) -> Field {
        Field::new(format!("constant:c={c}"), move |_| c)
    }

    pub fn zero() -> Field {
        Field::new("pure-noise", |_| 0.0)
    }

    #[inline]
    pub fn eval(&self, t: [f64; 2]) -> f64 {
        (self.f)(t)
    }

    pub fn id(&self) -> &str {
        &self.id
    }
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Field({})", self.id)
    }
}

/// Cell-integrated signal `F(t_ij)·cell_area`, reusable across replicates.
#[derive(Clone, Debug)]
pub struct DiscretizedField {
    grid: GridSpec,
    values: Vec<f64>,
    id: String,
}

impl DiscretizedField {
    pub fn new(field: &Field, grid: GridSpec) -> DiscretizedField {
        let n = grid.n_per_axis();
        let area = grid.cell_area();
        let mut values = Vec::with_capacity(grid.len());
        for row in 0..n {
            for col in 0..n {
                values.push(field.eval(grid.point(row, col)) * area);
            }
        }
        DiscretizedField {
            grid,
            values,
            id: field.id().to_string(),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn id(&self) -> &str {
        &self.id
    }
}

/// Derives the seed of replicate `index` from a master seed (SplitMix64 finalizer).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One realization of the observation on the grid, stored row-major (rows follow `t₂`).
#[derive(Clone, Debug, PartialEq)]
pub struct Observation {
    grid: GridSpec,
    increments: Vec<f64>,
    epsilon: f64,
    seed: u64,
    signal_id: String,
    deterministic: bool,
}

impl Observation {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }
    pub fn increments(&self) -> &[f64] {
        &self.increments
    }
    /// Noise level; `0` for deterministic observations.
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }
    pub fn signal_id(&self) -> &str {
        &self.signal_id
    }
    pub fn is_deterministic(&self) -> bool {
        self.deterministic
    }

    #[inline]
    pub fn increment(&self, row: usize, col: usize) -> f64 {
        self.increments[row * self.grid.n_per_axis() + col]
    }

    /// Writes the text dump: one header line, then one increment per line in row-major order.
    pub fn dump<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "# silab-field n={} half_width={:?} epsilon={:?} seed={} deterministic={} signal={}",
            self.grid.n_per_axis(),
            self.grid.half_width(),
            self.epsilon,
            self.seed,
            self.deterministic,
            self.signal_id
        )?;
        for v in &self.increments {
            writeln!(out, "{v:?}")?;
        }
        Ok(())
    }

    /// Reads a dump written by [`Observation::dump`]; values round-trip bit-exactly.
    pub fn load<R: BufRead>(input: R) -> Result<Observation> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| LabError::Parse("empty field dump".into()))??;
        let body = header
            .strip_prefix("# silab-field ")
            .ok_or_else(|| LabError::Parse("missing field dump header".into()))?;
        let (head, signal) = body
            .split_once(" signal=")
            .ok_or_else(|| LabError::Parse("header lacks signal".into()))?;
        let mut n = None;
        let mut hw = None;
        let mut eps = None;
        let mut seed = None;
        let mut det = None;
        for kv in head.split_whitespace() {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| LabError::Parse(format!("bad header token `{kv}`")))?;
            let bad = |_| LabError::Parse(format!("bad value for `{k}`"));
            match k {
                "n" => n = Some(v.parse::<usize>().map_err(|e| bad(e.to_string()))?),
                "half_width" => hw = Some(v.parse::<f64>().map_err(|e| bad(e.to_string()))?),
                "epsilon" => eps = Some(v.parse::<f64>().map_err(|e| bad(e.to_string()))?),
                "seed" => seed = Some(v.parse::<u64>().map_err(|e| bad(e.to_string()))?),
                "deterministic" => det = Some(v.parse::<bool>().map_err(|e| bad(e.to_string()))?),
                _ => return Err(LabError::Parse(format!("unknown header key `{k}`"))),
            }
        }
        let missing = |k: &str| LabError::Parse(format!("header lacks `{k}`"));
        let grid = GridSpec::new(hw.ok_or_else(|| missing("half_width"))?, n.ok_or_else(|| missing("n"))?)?;
        let mut increments = Vec::with_capacity(grid.len());
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let v = line
                .trim()
                .parse::<f64>()
                .map_err(|e| LabError::Parse(format!("bad increment `{line}`: {e}")))?;
            increments.push(v);
        }
        if increments.len() != grid.len() {
            return Err(LabError::Parse(format!(
                "expected {} increments, found {}",
                grid.len(),
                increments.len()
            )));
        }
        Ok(Observation {
            grid,
            increments,
            epsilon: eps.ok_or_else(|| missing("epsilon"))?,
            seed: seed.ok_or_else(|| missing("seed"))?,
            signal_id: signal.to_string(),
            deterministic: det.ok_or_else(|| missing("deterministic"))?,
        })
    }
}

/// Simulates `F(t_ij)·cell_area + ε·√cell_area·ξ_ij` with `ξ` drawn from a seeded ChaCha stream.
pub fn simulate(field: &Field, epsilon: f64, grid: GridSpec, seed: u64) -> Result<Observation> {
    simulate_discretized(&DiscretizedField::new(field, grid), epsilon, seed)
}

/// As [`simulate`], reusing a precomputed signal part.
pub fn simulate_discretized(signal: &DiscretizedField, epsilon: f64, seed: u64) -> Result<Observation> {
    check_epsilon(epsilon)?;
    let sd = epsilon * signal.grid.cell_area().sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let increments = signal
        .values
        .iter()
        .map(|&s| {
            let xi: f64 = rng.sample(StandardNormal);
            s + sd * xi
        })
        .collect();
    Ok(Observation {
        grid: signal.grid,
        increments,
        epsilon,
        seed,
        signal_id: signal.id.clone(),
        deterministic: false,
    })
}

/// Noise-free observation for deterministic testing: every increment is `F(t_ij)·cell_area`.
pub fn simulate_deterministic(field: &Field, grid: GridSpec) -> Observation {
    let signal = DiscretizedField::new(field, grid);
    Observation {
        grid,
        increments: signal.values,
        epsilon: 0.0,
        seed: 0,
        signal_id: signal.id,
        deterministic: true,
    }
}

/// `Σ_ij weight(t_ij)·increment(i, j)`.
pub fn integrate_against(obs: &Observation, weight: impl Fn([f64; 2]) -> f64) -> f64 {
    let g = obs.grid;
    let n = g.n_per_axis();
    let mut acc = 0.0;
    for row in 0..n {
        for col in 0..n {
            acc += weight(g.point(row, col)) * obs.increment(row, col);
        }
    }
    acc
}
