//! Bias functional of a link, its maximal version, the oracle bandwidth and the oracle
//! risk bound.

use crate::error::{invalid, LabError, Result};
use crate::estimator::{estimate, Direction};
use crate::exec::Execution;
use crate::kernels::{Kernel1D, ProductKernel};
use crate::noise_field::{check_epsilon, Observation};
use crate::quad::simpson;
use crate::signals::Link;

/// Quadrature step for the univariate bias integrals.
pub const QUAD_STEP: f64 = 1.0 / 2048.0;
/// Smallest δ is this many default quadrature steps.
pub const MIN_STEPS_PER_DELTA: f64 = 4.0;
/// Levels per octave for the δ and `h` grids.
pub const LEVELS_PER_OCTAVE: usize = 8;

/// `2^{-j/8}`.
#[inline]
pub fn level(j: usize) -> f64 {
    2f64.powf(-(j as f64) / LEVELS_PER_OCTAVE as f64)
}

/// Precomputed `Δ_{K,f}(δ_j, z_k)` on a fixed `(δ, z)` grid.
///
/// The δ grid is global (`δ_j = 2^{-j/8}` down to four quadrature steps), so
/// `Δ(h, z) = max_{δ_j ≤ h} |B(δ_j, z)|` is nondecreasing in `h` by construction.
#[derive(Clone, Debug)]
pub struct BiasProfile {
    kernel: Kernel1D,
    link: Link,
    du: f64,
    z_half: f64,
    deltas: Vec<f64>,
    weights: Vec<Vec<f64>>,
    /// `cummax[j][k] = Δ(δ_j, z_k)`.
    cummax: Vec<Vec<f64>>,
    /// Running sums of each `cummax` row.
    prefix: Vec<Vec<f64>>,
}

fn node_weights(kernel: &Kernel1D, delta: f64, du: f64) -> Vec<f64> {
    // Nodes z + (m + 1/2)du for m in -M..M.
    let m = (delta / (2.0 * du)).ceil() as i64;
    (-m..m)
        .map(|i| kernel.eval((i as f64 + 0.5) * du / delta) * du / delta)
        .collect()
}

/// Grid settings of a [`BiasProfile`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProfileOptions {
    /// Tabulated range is `z ∈ [-z_half, z_half]`.
    pub z_half: f64,
    /// Must divide `1/2` into a whole number of steps.
    pub quad_step: f64,
    pub min_delta: f64,
    pub execution: Execution,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        ProfileOptions {
            z_half: 2.0,
            quad_step: QUAD_STEP,
            min_delta: MIN_STEPS_PER_DELTA * QUAD_STEP,
            execution: Execution::default(),
        }
    }
}

impl BiasProfile {
    /// Tables over `z ∈ [-2, 2]`, which admits maximal windows at `|y| ≤ 1`.
    pub fn new(kernel: Kernel1D, link: Link) -> BiasProfile {
        BiasProfile::with_options(kernel, link, ProfileOptions::default())
    }

    pub fn with_range(kernel: Kernel1D, link: Link, z_half: f64, execution: Execution) -> BiasProfile {
        let opts = ProfileOptions {
            z_half,
            execution,
            ..ProfileOptions::default()
        };
        BiasProfile::with_options(kernel, link, opts)
    }

    pub fn with_options(kernel: Kernel1D, link: Link, opts: ProfileOptions) -> BiasProfile {
        let ProfileOptions {
            z_half,
            quad_step: du,
            min_delta,
            execution: exec,
        } = opts;
        let deltas: Vec<f64> = (0..).map(level).take_while(|&d| d >= min_delta).collect();
        let weights: Vec<Vec<f64>> = deltas.iter().map(|&d| node_weights(&kernel, d, du)).collect();
        let n_z = (2.0 * z_half / du).round() as usize + 1;
        let z_half = (n_z - 1) as f64 * du / 2.0;
        // Half-step samples u_j = z_0 - pad·du/2 + j·du/2 so that z_k and every node are samples.
        let pad = 2 * ((0.5 / du).ceil() as usize + 1);
        let u0 = -z_half - pad as f64 * du / 2.0;
        let n_u = 2 * (n_z - 1) + 2 * pad + 1;
        let fv: Vec<f64> = (0..n_u).map(|j| link.eval(u0 + j as f64 * du / 2.0)).collect();

        let columns = exec.map_range(n_z, |k| {
            let centre = pad + 2 * k;
            let fz = fv[centre];
            let mut out = Vec::with_capacity(weights.len());
            let mut run = 0.0f64;
            // Fine δ last, so walk backwards for the running max.
            let mut raw = vec![0.0; weights.len()];
            for (j, w) in weights.iter().enumerate() {
                let m = w.len() / 2;
                let start = centre + 1 - 2 * m;
                let mut s = 0.0;
                for (i, wi) in w.iter().enumerate() {
                    s += wi * (fv[start + 2 * i] - fz);
                }
                raw[j] = s.abs();
            }
            for j in (0..weights.len()).rev() {
                run = run.max(raw[j]);
                out.push(run);
            }
            out.reverse();
            out
        });
        let mut cummax = vec![vec![0.0; n_z]; deltas.len()];
        for (k, col) in columns.iter().enumerate() {
            for (j, v) in col.iter().enumerate() {
                cummax[j][k] = *v;
            }
        }
        let prefix = cummax
            .iter()
            .map(|row| {
                let mut p = Vec::with_capacity(n_z + 1);
                let mut acc = 0.0;
                p.push(0.0);
                for v in row {
                    acc += v;
                    p.push(acc);
                }
                p
            })
            .collect();
        BiasProfile {
            kernel,
            link,
            du,
            z_half,
            deltas,
            weights,
            cummax,
            prefix,
        }
    }

    pub fn kernel(&self) -> &Kernel1D {
        &self.kernel
    }

    pub fn link(&self) -> &Link {
        &self.link
    }

    pub fn deltas(&self) -> &[f64] {
        &self.deltas
    }

    pub fn quad_step(&self) -> f64 {
        self.du
    }

    /// Tabulated `z_k`.
    pub fn z_grid(&self) -> Vec<f64> {
        (0..self.n_z()).map(|k| self.z(k)).collect()
    }

    fn n_z(&self) -> usize {
        self.cummax[0].len()
    }

    fn z(&self, k: usize) -> f64 {
        -self.z_half + k as f64 * self.du
    }

    /// Row index of `Δ(h, ·)`: the first δ level not above `h`. Bandwidths below the finest
    /// δ fall back to that level, which only overstates the bias.
    fn row(&self, h: f64) -> usize {
        self.deltas
            .iter()
            .position(|&d| d <= h * (1.0 + 1e-12))
            .unwrap_or(self.deltas.len() - 1)
    }

    /// `Δ(h, z_k)` for all tabulated `z_k`.
    pub fn delta_row(&self, h: f64) -> &[f64] {
        &self.cummax[self.row(h)]
    }

    /// `Δ_{K,f}(h, z)` evaluated directly at `z`.
    pub fn delta(&self, h: f64, z: f64) -> f64 {
        let first = self.row(h);
        let fz = self.link.eval(z);
        let mut best = 0.0f64;
        for w in &self.weights[first..] {
            let m = (w.len() / 2) as f64;
            let mut s = 0.0;
            for (i, wi) in w.iter().enumerate() {
                s += wi * (self.link.eval(z + (i as f64 - m + 0.5) * self.du) - fz);
            }
            best = best.max(s.abs());
        }
        best
    }

    /// `Δ̄_{K,f}(h, y)`: the largest window average of `Δ(h, ·)` over `[y − a, y + a]`,
    /// `a = du·2^i ≤ 1`, with `y` snapped to the `z` grid.
    pub fn maximal_delta(&self, h: f64, y: f64) -> f64 {
        let row = self.row(h);
        let d = &self.cummax[row];
        let p = &self.prefix[row];
        let n = self.n_z() as i64;
        let k0 = ((y + self.z_half) / self.du).round() as i64;
        let mut best = 0.0f64;
        let mut half = 1i64;
        while half as f64 * self.du <= 1.0 + 1e-12 {
            let lo = k0 - half;
            let hi = k0 + half;
            if lo >= 0 && hi < n {
                // Trapezoid over 2·half intervals.
                let sum = p[hi as usize + 1] - p[lo as usize];
                let trap = sum - 0.5 * (d[lo as usize] + d[hi as usize]);
                best = best.max(trap / (2 * half) as f64);
            }
            half *= 2;
        }
        best
    }

    /// `Δ*(h, y) = max{Δ̄(h, y), Δ(h, y)}`.
    pub fn delta_star(&self, h: f64, y: f64) -> f64 {
        self.maximal_delta(h, y).max(self.delta(h, y))
    }

    /// `(∫|Δ(h, z)|^p dz)^{1/p}` over the tabulated range.
    pub fn delta_lp_norm(&self, h: f64, p: f64) -> f64 {
        let s: f64 = self.delta_row(h).iter().map(|v| v.powf(p)).sum();
        (s * self.du).powf(1.0 / p)
    }
}

/// `sup{h ∈ [ε², 1] : √h·Δ*(h, y) ≤ ‖K‖_∞ε√ln(1/ε)}` over `h = 2^{-i/8}`.
///
/// All levels are scanned because `√h·Δ*(h, y)` need not be monotone.
pub fn oracle_bandwidth(profile: &BiasProfile, epsilon: f64, y: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    let rhs = profile.kernel.sup_norm() * epsilon * (1.0 / epsilon).ln().sqrt();
    let floor = epsilon * epsilon;
    (0..)
        .map(level)
        .take_while(|&h| h >= floor)
        .find(|&h| h.sqrt() * profile.delta_star(h, y) <= rhs)
        .ok_or(LabError::EmptyOracleSet { y })
}

/// `𝔠_r = (E(1 + |ς|)^r)^{1/r}`, `ς ~ N(0, 1)`.
pub fn c_r_constant(r: f64) -> Result<f64> {
    if !(r >= 1.0) {
        return Err(invalid(format!("r = {r} must be at least 1")));
    }
    let phi = |s: f64| (-0.5 * s * s).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let m = 2.0 * simpson(|s| (1.0 + s).powf(r) * phi(s), 0.0, 40.0, 40_000);
    Ok(m.powf(1.0 / r))
}

/// `𝔠_r·√(‖K‖⁴_∞ε² ln(1/ε)/h*)`.
pub fn oracle_risk_bound(h_star: f64, epsilon: f64, r: f64, kernel: &Kernel1D) -> Result<f64> {
    let s = kernel.sup_norm();
    Ok(c_r_constant(r)? * (s.powi(4) * epsilon * epsilon * (1.0 / epsilon).ln() / h_star).sqrt())
}

/// `F̂_(θ°,h*)(x)`.
pub fn oracle_estimate(obs: &Observation, kernel: &ProductKernel, theta_true: &Direction, h_star: f64, x: [f64; 2]) -> f64 {
    estimate(obs, kernel, theta_true, h_star, x)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleResult {
    pub h_star: f64,
    pub risk_bound: f64,
    pub c_r: f64,
}

/// `h*` at `y` together with its risk bound.
pub fn oracle(profile: &BiasProfile, epsilon: f64, y: f64, r: f64) -> Result<OracleResult> {
    let h_star = oracle_bandwidth(profile, epsilon, y)?;
    Ok(OracleResult {
        h_star,
        risk_bound: oracle_risk_bound(h_star, epsilon, r, &profile.kernel)?,
        c_r: c_r_constant(r)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::make_default_kernel;

    fn small(link: Link) -> BiasProfile {
        BiasProfile::with_range(make_default_kernel(), link, 1.25, Execution::Sequential)
    }

    #[test]
    fn constant_and_linear_links_have_no_bias() {
        let c = small(Link::constant(3.0));
        assert_eq!(c.delta(0.5, 0.1), 0.0);
        assert_eq!(c.delta_star(1.0, 0.0), 0.0);
        assert_eq!(oracle_bandwidth(&c, 0.05, 0.0).unwrap(), 1.0);
        let lin = small(Link::new("lin", |u| 2.0 * u - 1.0));
        assert!(lin.delta(1.0, 0.2) < 1e-12);
        assert!(lin.delta_star(0.5, -0.1) < 1e-12);
    }

    #[test]
    fn c_r_closed_forms() {
        let s = (2.0 / std::f64::consts::PI).sqrt();
        assert!((c_r_constant(1.0).unwrap() - (1.0 + s)).abs() < 1e-10);
        assert!((c_r_constant(2.0).unwrap() - (2.0 + 2.0 * s).sqrt()).abs() < 1e-10);
        assert!(c_r_constant(0.5).is_err());
    }

    #[test]
    fn risk_bound_example() {
        let k = make_default_kernel();
        let e = (-1.0f64).exp();
        let b = oracle_risk_bound(1.0, e, 1.0, &k).unwrap();
        assert!((b - c_r_constant(1.0).unwrap() * 2.25 * e).abs() < 1e-12);
        let half = oracle_risk_bound(0.5, e, 1.0, &k).unwrap();
        assert!((half / b - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn table_matches_direct_delta() {
        let p = small(Link::new("cusp", |u: f64| 0.5 * u.abs().sqrt()));
        let z = p.z_grid();
        for h in [1.0, 0.3, 0.05, 0.004] {
            let row = p.delta_row(h);
            for k in (0..z.len()).step_by(97) {
                assert!((row[k] - p.delta(h, z[k])).abs() < 1e-12, "h={h} z={}", z[k]);
            }
        }
    }

    #[test]
    fn maximal_of_constant_profile() {
        // A linear link has Δ ≡ 0 apart from rounding; a quadratic one has Δ(h, ·) constant.
        let p = small(Link::new("quad", |u| u * u));
        let d = p.delta(0.25, 0.0);
        assert!(d > 0.0);
        assert!((p.maximal_delta(0.25, 0.0) - d).abs() < 1e-9 * d.max(1.0));
    }

    #[test]
    fn bump_spreads_outward() {
        let p = small(Link::new("bump", |u: f64| crate::signals::bump0(u / 0.2)));
        let y = 0.15;
        assert!(p.delta(0.05, y) == 0.0);
        assert!(p.maximal_delta(0.05, y) > 0.0);
    }
}
