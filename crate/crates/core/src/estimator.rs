//! Transform matrices `E_(θ,h)`, `E_(θ,h)(ν,h)` and the kernel estimators they index.

use crate::error::{invalid, Result};
use crate::kernels::{ProductKernel, ProfileVisitor, Weighting};
use crate::noise_field::{Field, GridSpec, Observation};

/// A unit vector in the plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Direction {
    theta1: f64,
    theta2: f64,
}

impl Direction {
    pub fn new(theta1: f64, theta2: f64) -> Result<Direction> {
        if ((theta1 * theta1 + theta2 * theta2) - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("({theta1}, {theta2}) is not a unit vector")));
        }
        Ok(Direction { theta1, theta2 })
    }

    pub fn from_angle(radians: f64) -> Direction {
        Direction {
            theta1: radians.cos(),
            theta2: radians.sin(),
        }
    }

    pub fn from_degrees(degrees: f64) -> Direction {
        Direction::from_angle(degrees.to_radians())
    }

    pub fn theta1(&self) -> f64 {
        self.theta1
    }
    pub fn theta2(&self) -> f64 {
        self.theta2
    }

    #[inline]
    pub fn dot(&self, other: &Direction) -> f64 {
        self.theta1 * other.theta1 + self.theta2 * other.theta2
    }

    #[inline]
    pub fn project(&self, t: [f64; 2]) -> f64 {
        self.theta1 * t[0] + self.theta2 * t[1]
    }

    pub fn angle(&self) -> f64 {
        self.theta2.atan2(self.theta1)
    }
}

impl std::ops::Neg for Direction {
    type Output = Direction;
    fn neg(self) -> Direction {
        Direction {
            theta1: -self.theta1,
            theta2: -self.theta2,
        }
    }
}

/// `n` equispaced directions on the circle starting at `(1, 0)`.
///
/// For even `n` the second half is the exact negation of the first, so antipodal estimators
/// share bit-identical matrices.
pub fn direction_grid(n: usize) -> Vec<Direction> {
    let angle = |k: usize| 2.0 * std::f64::consts::PI * k as f64 / n as f64;
    if n % 2 == 1 {
        return (0..n).map(|k| Direction::from_angle(angle(k))).collect();
    }
    let half: Vec<Direction> = (0..n / 2).map(|k| Direction::from_angle(angle(k))).collect();
    half.iter().copied().chain(half.iter().map(|d| -*d)).collect()
}

/// A bandwidth in `[ε², 1]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Bandwidth(f64);

impl Bandwidth {
    pub fn new(h: f64, epsilon: f64) -> Result<Bandwidth> {
        if !(h >= epsilon * epsilon && h <= 1.0) {
            return Err(invalid(format!("bandwidth {h} outside [ε², 1] for ε = {epsilon}")));
        }
        Ok(Bandwidth(h))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MatrixKind {
    Single,
    Pair,
}

/// A 2×2 matrix `[[a11, a12], [a21, a22]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransformMatrix {
    pub a: [[f64; 2]; 2],
    pub kind: MatrixKind,
}

impl TransformMatrix {
    pub fn det(&self) -> f64 {
        self.a[0][0] * self.a[1][1] - self.a[0][1] * self.a[1][0]
    }

    #[inline]
    pub fn apply(&self, d: [f64; 2]) -> [f64; 2] {
        [
            self.a[0][0] * d[0] + self.a[0][1] * d[1],
            self.a[1][0] * d[0] + self.a[1][1] * d[1],
        ]
    }

    /// `E` or `-E`, whichever has a positive leading nonzero entry. Product kernels are even in
    /// each argument, so both give the same estimator.
    pub fn canonical(&self) -> TransformMatrix {
        let flat = [self.a[0][0], self.a[0][1], self.a[1][0], self.a[1][1]];
        let lead = flat.iter().copied().find(|v| *v != 0.0).unwrap_or(0.0);
        if lead < 0.0 {
            TransformMatrix {
                a: [[-flat[0], -flat[1]], [-flat[2], -flat[3]]],
                kind: self.kind,
            }
        } else {
            *self
        }
    }

    /// Bit pattern of the canonical entries, usable as a cache key.
    pub fn key(&self) -> [u64; 4] {
        let c = self.canonical().a;
        [c[0][0], c[0][1], c[1][0], c[1][1]].map(|v| (v + 0.0).to_bits())
    }
}

/// `E_(θ,h) = [[θ₁/h, θ₂/h], [-θ₂, θ₁]]`.
pub fn matrix_single(theta: &Direction, h: f64) -> TransformMatrix {
    TransformMatrix {
        a: [
            [theta.theta1 / h, theta.theta2 / h],
            [-theta.theta2, theta.theta1],
        ],
        kind: MatrixKind::Single,
    }
}

/// `E_(θ,h)(ν,h)`, flipping `θ` first when `νᵀθ < 0`.
///
/// At exact orthogonality both `θ + ν` and `ν − θ` qualify; the one with the larger
/// sign-normalized coordinates is used, which keeps the matrix invariant under swapping the
/// arguments or negating either of them.
pub fn matrix_pair(theta: &Direction, nu: &Direction, h: f64) -> TransformMatrix {
    let c = nu.dot(theta);
    let s = 2.0 * (1.0 + c.abs());
    let plus = [theta.theta1 + nu.theta1, theta.theta2 + nu.theta2];
    let minus = [nu.theta1 - theta.theta1, nu.theta2 - theta.theta2];
    let [p1, p2] = if c > 0.0 {
        plus
    } else if c < 0.0 {
        minus
    } else {
        let norm = |v: [f64; 2]| {
            if v[0] < 0.0 || (v[0] == 0.0 && v[1] < 0.0) {
                [-v[0], -v[1]]
            } else {
                v
            }
        };
        let (a, b) = (norm(plus), norm(minus));
        if (a[0], a[1]).partial_cmp(&(b[0], b[1])) == Some(std::cmp::Ordering::Less) {
            b
        } else {
            a
        }
    };
    TransformMatrix {
        a: [[p1 / (h * s), p2 / (h * s)], [-p2 / s, p1 / s]],
        kind: MatrixKind::Pair,
    }
}

/// Raw sums `(Σ w_ij·v_ij, Σ w_ij)` with `w_ij = K(E(t_ij - x))`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct KernelSums {
    pub weighted: f64,
    pub mass: f64,
    pub cells: usize,
}

struct SumVisitor<'a, V> {
    grid: &'a GridSpec,
    e: &'a TransformMatrix,
    x: [f64; 2],
    values: V,
}

/// `[lo, hi]` of `d` with `|a·d + b| ≤ 1/2`; `None` when empty.
#[inline]
fn slab(a: f64, b: f64) -> Option<(f64, f64)> {
    if a == 0.0 {
        return (b.abs() <= 0.5).then_some((f64::NEG_INFINITY, f64::INFINITY));
    }
    let l = (-0.5 - b) / a;
    let r = (0.5 - b) / a;
    Some(if l <= r { (l, r) } else { (r, l) })
}

impl<V: Fn(usize, usize) -> f64> ProfileVisitor for SumVisitor<'_, V> {
    type Output = KernelSums;

    fn visit<K: Fn(f64) -> f64 + Copy>(self, k: K) -> KernelSums {
        let g = self.grid;
        let n = g.n_per_axis();
        let step = g.step();
        let w = g.half_width();
        let [[a, b], [c, d]] = self.e.a;
        let det = a * d - b * c;
        let [x1, x2] = self.x;
        // Corners of the support parallelogram sit at E^{-1}(±1/2, ±1/2).
        let reach2 = (c.abs() + a.abs()) / (2.0 * det.abs());
        let index = |coord: f64| (coord + w) / step - 0.5;
        let clamp = |v: f64| v.max(0.0).min((n - 1) as f64) as usize;
        let lo_r = index(x2 - reach2).ceil() - 1.0;
        let hi_r = index(x2 + reach2).floor() + 1.0;
        if hi_r < 0.0 || lo_r > (n - 1) as f64 {
            return KernelSums::default();
        }
        let mut sums = KernelSums::default();
        for row in clamp(lo_r)..=clamp(hi_r) {
            let dy = g.center(row) - x2;
            let Some((ul, uh)) = slab(a, b * dy) else { continue };
            let Some((vl, vh)) = slab(c, d * dy) else { continue };
            let lo = ul.max(vl);
            let hi = uh.min(vh);
            if lo > hi {
                continue;
            }
            let lo_c = (index(x1 + lo).ceil() - 1.0).max(0.0);
            let hi_c = (index(x1 + hi).floor() + 1.0).min((n - 1) as f64);
            if hi_c < lo_c {
                continue;
            }
            for col in lo_c as usize..=hi_c as usize {
                let dx = g.center(col) - x1;
                let u = a * dx + b * dy;
                let v = c * dx + d * dy;
                if u.abs() <= 0.5 && v.abs() <= 0.5 {
                    let wt = k(u) * k(v);
                    sums.weighted += wt * (self.values)(row, col);
                    sums.mass += wt;
                    sums.cells += 1;
                }
            }
        }
        sums
    }
}

/// Kernel sums over grid cells against arbitrary per-cell values.
pub fn kernel_sums(
    kernel: &ProductKernel,
    grid: &GridSpec,
    e: &TransformMatrix,
    x: [f64; 2],
    values: impl Fn(usize, usize) -> f64,
) -> KernelSums {
    let e = e.canonical();
    kernel.factor().visit(SumVisitor {
        grid,
        e: &e,
        x,
        values,
    })
}

fn finish(kernel: &ProductKernel, grid: &GridSpec, e: &TransformMatrix, s: KernelSums) -> f64 {
    match kernel.weighting() {
        Weighting::Normalized if s.mass > 0.0 => s.weighted / (s.mass * grid.cell_area()),
        Weighting::Normalized => 0.0,
        Weighting::Determinant => e.det().abs() * s.weighted,
    }
}

/// Estimator for an arbitrary transform matrix.
pub fn estimate_with_matrix(
    obs: &Observation,
    kernel: &ProductKernel,
    e: &TransformMatrix,
    x: [f64; 2],
) -> f64 {
    let n = obs.grid().n_per_axis();
    let inc = obs.increments();
    let s = kernel_sums(kernel, obs.grid(), e, x, |r, c| inc[r * n + c]);
    finish(kernel, obs.grid(), e, s)
}

/// `F̂_(θ,h)(x)`.
pub fn estimate(obs: &Observation, kernel: &ProductKernel, theta: &Direction, h: f64, x: [f64; 2]) -> f64 {
    estimate_with_matrix(obs, kernel, &matrix_single(theta, h), x)
}

/// `F̂_(θ,h)(ν,h)(x)`.
pub fn estimate_pair(
    obs: &Observation,
    kernel: &ProductKernel,
    theta: &Direction,
    nu: &Direction,
    h: f64,
    x: [f64; 2],
) -> f64 {
    estimate_with_matrix(obs, kernel, &matrix_pair(theta, nu, h), x)
}

/// Deterministic counterpart of [`estimate_with_matrix`]: the same quadrature applied to
/// `F(t_ij)·cell_area`.
pub fn bias_with_matrix(
    field: &Field,
    grid: &GridSpec,
    kernel: &ProductKernel,
    e: &TransformMatrix,
    x: [f64; 2],
) -> f64 {
    let area = grid.cell_area();
    let s = kernel_sums(kernel, grid, e, x, |r, c| field.eval(grid.point(r, c)) * area);
    finish(kernel, grid, e, s)
}

/// `S_(θ,h)(x)`.
pub fn bias_single(
    field: &Field,
    grid: &GridSpec,
    kernel: &ProductKernel,
    theta: &Direction,
    h: f64,
    x: [f64; 2],
) -> f64 {
    bias_with_matrix(field, grid, kernel, &matrix_single(theta, h), x)
}

/// `S_(θ,h)(ν,h)(x)`.
pub fn bias_pair(
    field: &Field,
    grid: &GridSpec,
    kernel: &ProductKernel,
    theta: &Direction,
    nu: &Direction,
    h: f64,
    x: [f64; 2],
) -> f64 {
    bias_with_matrix(field, grid, kernel, &matrix_pair(theta, nu, h), x)
}

/// `Σ w²/(Σ w)²·cell_area⁻¹`: the variance of the normalized estimator per unit `ε²`.
pub fn noise_variance_factor(kernel: &ProductKernel, grid: &GridSpec, e: &TransformMatrix, x: [f64; 2]) -> f64 {
    let e = e.canonical();
    let sq = kernel_sums(kernel, grid, &e, x, |r, c| {
        let t = grid.point(r, c);
        let [u, v] = e.apply([t[0] - x[0], t[1] - x[1]]);
        kernel.eval(u, v)
    });
    match kernel.weighting() {
        Weighting::Normalized => sq.weighted / (sq.mass * sq.mass * grid.cell_area()),
        Weighting::Determinant => e.det().powi(2) * sq.weighted * grid.cell_area(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise_field::{integrate_against, simulate, simulate_deterministic};

    fn d(t1: f64, t2: f64) -> Direction {
        Direction::new(t1, t2).unwrap()
    }

    #[test]
    fn single_examples() {
        let m = matrix_single(&d(1.0, 0.0), 0.25);
        assert_eq!(m.a, [[4.0, 0.0], [-0.0, 1.0]]);
        assert_eq!(m.det(), 4.0);
        let m = matrix_single(&d(0.0, 1.0), 0.5);
        assert_eq!(m.a, [[0.0, 2.0], [-1.0, 0.0]]);
        assert_eq!(m.det(), 2.0);
    }

    #[test]
    fn pair_examples() {
        let m = matrix_pair(&d(1.0, 0.0), &d(1.0, 0.0), 0.25);
        assert_eq!(m.a, [[2.0, 0.0], [-0.0, 0.5]]);
        assert_eq!(m.det(), 1.0);
        let flipped = matrix_pair(&d(1.0, 0.0), &d(-1.0, 0.0), 0.25);
        let direct = matrix_pair(&d(-1.0, 0.0), &d(-1.0, 0.0), 0.25);
        assert_eq!(flipped.a, direct.a);
    }

    #[test]
    fn grid_is_antipodal() {
        let g = direction_grid(48);
        for k in 0..24 {
            assert_eq!(g[k + 24], -g[k]);
            assert_eq!(matrix_pair(&g[k], &g[5], 0.5).key(), matrix_pair(&g[5], &g[k + 24], 0.5).key());
        }
        assert_eq!(g[0], d(1.0, 0.0));
    }

    #[test]
    fn estimator_matches_integrate_against() {
        let grid = GridSpec::with_n(64).unwrap();
        let k = ProductKernel::default().with_weighting(Weighting::Determinant);
        let obs = simulate(&Field::new("s", |t| t[0] * t[1]), 0.1, grid, 4).unwrap();
        let theta = Direction::from_degrees(37.0);
        let x = [0.13, -0.21];
        let e = matrix_single(&theta, 0.5);
        let direct = e.det()
            * integrate_against(&obs, |t| {
                let [u, v] = e.apply([t[0] - x[0], t[1] - x[1]]);
                k.eval(u, v)
            });
        let fast = estimate(&obs, &k, &theta, 0.5, x);
        assert!((direct - fast).abs() < 1e-12 * direct.abs().max(1.0));
    }

    #[test]
    fn constants_and_linear() {
        let grid = GridSpec::with_n(128).unwrap();
        let k = ProductKernel::default();
        let c = simulate_deterministic(&Field::constant(2.5), grid);
        for (theta, h) in [(Direction::from_degrees(10.0), 1.0), (Direction::from_degrees(123.0), 0.125)] {
            let v = estimate(&c, &k, &theta, h, [0.3, -0.4]);
            assert!((v - 2.5).abs() < 1e-12);
            let v = estimate_pair(&c, &k, &theta, &Direction::from_degrees(77.0), h, [0.3, -0.4]);
            assert!((v - 2.5).abs() < 1e-12);
        }
        let theta = Direction::from_degrees(30.0);
        let lin = Field::new("lin", move |t| 1.0 + 2.0 * theta.project(t));
        let x = [0.1, 0.2];
        let v = estimate(&simulate_deterministic(&lin, grid), &k, &theta, 0.25, x);
        assert!((v - (1.0 + 2.0 * theta.project(x))).abs() < 1e-3);
    }

    #[test]
    fn pair_equals_single_at_equal_directions() {
        let grid = GridSpec::with_n(64).unwrap();
        let k = ProductKernel::default();
        let obs = simulate(&Field::zero(), 0.1, grid, 8).unwrap();
        let th = d(1.0, 0.0);
        let pair = estimate_pair(&obs, &k, &th, &th, 0.25, [0.0, 0.0]);
        let m = TransformMatrix {
            a: [[1.0 / 0.5, 0.0], [0.0, 0.5]],
            kind: MatrixKind::Pair,
        };
        assert_eq!(matrix_pair(&th, &th, 0.25).a[0][0], m.a[0][0]);
        assert_eq!(pair, estimate_with_matrix(&obs, &k, &m, [0.0, 0.0]));
    }

    #[test]
    fn bias_equals_noiseless_estimate() {
        let grid = GridSpec::with_n(64).unwrap();
        let k = ProductKernel::default();
        let f = Field::new("cusp", |t: [f64; 2]| (t[0] - 0.3 * t[1]).abs().sqrt());
        let obs = simulate_deterministic(&f, grid);
        let th = Direction::from_degrees(200.0);
        let nu = Direction::from_degrees(15.0);
        let x = [-0.2, 0.45];
        assert_eq!(estimate(&obs, &k, &th, 0.5, x), bias_single(&f, &grid, &k, &th, 0.5, x));
        assert_eq!(estimate_pair(&obs, &k, &th, &nu, 0.5, x), bias_pair(&f, &grid, &k, &th, &nu, 0.5, x));
    }

    #[test]
    fn variance_factor_approaches_continuum() {
        let grid = GridSpec::default();
        let k = ProductKernel::default();
        for h in [1.0, 0.5, 0.25] {
            let e = matrix_single(&Direction::from_degrees(20.0), h);
            let v = noise_variance_factor(&k, &grid, &e, [0.0, 0.0]) * h;
            assert!((v / 1.44 - 1.0).abs() < 0.01, "h={h}: {v}");
        }
    }
}
