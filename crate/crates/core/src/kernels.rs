//! Compactly supported symmetric kernels on `[-1/2, 1/2]` and their product extension.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{LabError, Result};
use crate::quad::{midpoint_richardson, symmetric_midpoint};

/// Kernels vanish outside `[-HALF_SUPPORT, HALF_SUPPORT]`.
pub const HALF_SUPPORT: f64 = 0.5;
/// Tolerance on vanishing moments.
pub const MOMENT_TOL: f64 = 1e-8;
/// Tolerance on norms and on the unit integral.
pub const NORM_TOL: f64 = 1e-6;
/// Default certification grid.
pub const CERT_GRID: usize = 4096;

const DENSE: usize = 1 << 16;

#[derive(Clone)]
enum Shape {
    /// `p(u)(1 - 4u²)` with `p(u) = Σ c_k u^{2k}`.
    Poly(Vec<f64>),
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

/// A univariate kernel with its certified constants.
#[derive(Clone)]
pub struct Kernel1D {
    name: String,
    shape: Shape,
    lipschitz_q: f64,
    sup_norm: f64,
    l1_norm: f64,
    l2_norm: f64,
    moment_order: usize,
}

impl fmt::Debug for Kernel1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Kernel1D")
            .field("name", &self.name)
            .field("lipschitz_q", &self.lipschitz_q)
            .field("sup_norm", &self.sup_norm)
            .field("l1_norm", &self.l1_norm)
            .field("l2_norm", &self.l2_norm)
            .field("moment_order", &self.moment_order)
            .finish()
    }
}

/// Receives the kernel profile as a concrete closure so hot loops can be monomorphized.
pub(crate) trait ProfileVisitor {
    type Output;
    fn visit<K: Fn(f64) -> f64 + Copy>(self, k: K) -> Self::Output;
}

fn poly(coeffs: &[f64], u2: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * u2 + c)
}

fn poly_derivative(coeffs: &[f64], u: f64) -> f64 {
    let u2 = u * u;
    let p = poly(coeffs, u2);
    let dp: f64 = coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| 2.0 * k as f64 * c * u.powi(2 * k as i32 - 1))
        .sum();
    dp * (1.0 - 4.0 * u2) - 8.0 * u * p
}

/// `∫ u^{2k}(1 - 4u²) du` over the support.
fn base_moment(k: usize) -> f64 {
    let k = k as f64;
    2.0 * 0.25f64.powf(k) / ((2.0 * k + 1.0) * (2.0 * k + 3.0))
}

impl Kernel1D {
    /// Evaluates the kernel; zero outside the support.
    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        if u.abs() > HALF_SUPPORT {
            return 0.0;
        }
        match &self.shape {
            Shape::Poly(c) => poly(c, u * u) * (1.0 - 4.0 * u * u),
            Shape::Custom(f) => f(u),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn lipschitz_q(&self) -> f64 {
        self.lipschitz_q
    }
    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }
    pub fn l1_norm(&self) -> f64 {
        self.l1_norm
    }
    pub fn l2_norm(&self) -> f64 {
        self.l2_norm
    }
    pub fn moment_order(&self) -> usize {
        self.moment_order
    }

    /// Coefficients of `p` in powers of `u²` for polynomial kernels.
    pub fn polynomial_coefficients(&self) -> Option<&[f64]> {
        match &self.shape {
            Shape::Poly(c) => Some(c),
            Shape::Custom(_) => None,
        }
    }

    /// Hands the in-support profile to `visitor` (no support check inside the closure).
    pub(crate) fn visit<V: ProfileVisitor>(&self, visitor: V) -> V::Output {
        match &self.shape {
            Shape::Poly(c) if c.len() == 1 => {
                let a = c[0];
                visitor.visit(move |u: f64| a * (1.0 - 4.0 * u * u))
            }
            Shape::Poly(c) => {
                let c = c.as_slice();
                visitor.visit(move |u: f64| poly(c, u * u) * (1.0 - 4.0 * u * u))
            }
            Shape::Custom(f) => {
                let f: &(dyn Fn(f64) -> f64 + Send + Sync) = &**f;
                visitor.visit(move |u: f64| f(u))
            }
        }
    }

    /// Builds an uncertified kernel from an arbitrary profile; norms are computed numerically and
    /// `lipschitz_q` is taken as claimed. Run [`certify`] before trusting it.
    pub fn from_fn(
        name: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        lipschitz_q: f64,
        moment_order: usize,
    ) -> Kernel1D {
        let mut k = Kernel1D {
            name: name.into(),
            shape: Shape::Custom(Arc::new(f)),
            lipschitz_q,
            sup_norm: 0.0,
            l1_norm: 0.0,
            l2_norm: 0.0,
            moment_order,
        };
        k.fill_norms(CERT_GRID);
        k
    }

    fn fill_norms(&mut self, n: usize) {
        let (sup, l1, l2) = norms(self, n);
        self.sup_norm = sup;
        self.l1_norm = l1;
        self.l2_norm = l2;
    }

    /// Fails unless [`certify`] passes on the default grid.
    pub fn certified(self) -> Result<Kernel1D> {
        let report = certify(&self, CERT_GRID);
        if report.passed() {
            Ok(self)
        } else {
            Err(LabError::KernelCertification {
                name: self.name.clone(),
                reason: report.failures().join(", "),
            })
        }
    }
}

/// The parabolic kernel `K(u) = 1.5(1 - 4u²)` on `[-1/2, 1/2]`.
pub fn make_default_kernel() -> Kernel1D {
    Kernel1D {
        name: "parabolic".into(),
        shape: Shape::Poly(vec![1.5]),
        lipschitz_q: 6.0,
        sup_norm: 1.5,
        l1_norm: 1.0,
        l2_norm: 1.2f64.sqrt(),
        moment_order: 1,
    }
}

/// Symmetric polynomial kernel `p(u)(1 - 4u²)` whose moments `1..=m_b` vanish.
///
/// Odd moments vanish by symmetry, so only the even ones enter the linear system and the
/// returned kernel reports the next odd order.
pub fn make_order_kernel(m_b: usize) -> Result<Kernel1D> {
    if m_b == 0 {
        return Err(crate::error::invalid("moment order must be at least 1"));
    }
    let m = m_b / 2;
    if m == 0 {
        return Ok(make_default_kernel());
    }
    let size = m + 1;
    let a = DMatrix::from_fn(size, size, |i, j| base_moment(i + j));
    let mut rhs = DVector::zeros(size);
    rhs[0] = 1.0;
    let coeffs = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| LabError::KernelCertification {
            name: format!("order-{m_b}"),
            reason: "singular moment system".into(),
        })?;
    let coeffs: Vec<f64> = coeffs.iter().copied().collect();

    let dense_q = (0..=DENSE)
        .map(|i| poly_derivative(&coeffs, -0.5 + i as f64 / DENSE as f64).abs())
        .fold(0.0, f64::max);
    let mut k = Kernel1D {
        name: format!("order-{}", 2 * m + 1),
        shape: Shape::Poly(coeffs),
        lipschitz_q: dense_q * (1.0 + 1e-6),
        sup_norm: 0.0,
        l1_norm: 0.0,
        l2_norm: 0.0,
        moment_order: 2 * m + 1,
    };
    k.fill_norms(1 << 14);
    k.sup_norm = (0..=DENSE)
        .map(|i| k.eval(-0.5 + i as f64 / DENSE as f64).abs())
        .fold(0.0, f64::max);
    k.certified()
}

fn norms(k: &Kernel1D, n: usize) -> (f64, f64, f64) {
    let sup = (0..=n)
        .map(|i| k.eval(-0.5 + i as f64 / n as f64).abs())
        .fold(0.0, f64::max);
    let l1 = midpoint_richardson(|u| k.eval(u).abs(), -0.5, 0.5, n);
    let l2 = midpoint_richardson(|u| k.eval(u).powi(2), -0.5, 0.5, n).sqrt();
    (sup, l1, l2)
}

/// Numerical re-derivation of every kernel invariant.
#[derive(Clone, Debug)]
pub struct CertificationReport {
    pub grid_n: usize,
    pub integral: f64,
    pub sup_norm: f64,
    pub l1_norm: f64,
    pub l2_norm: f64,
    pub lipschitz_estimate: f64,
    /// `(j, |∫ z^j K|)` for `j = 1..=m_b`.
    pub moment_residuals: Vec<(usize, f64)>,
    pub symmetry_residual: f64,
    pub support_residual: f64,
    pub integral_ok: bool,
    pub norms_ok: bool,
    pub lipschitz_ok: bool,
    pub moments_ok: bool,
    pub symmetry_ok: bool,
    pub support_ok: bool,
    pub chain_ok: bool,
}

impl CertificationReport {
    pub fn passed(&self) -> bool {
        self.failures().is_empty()
    }

    pub fn failures(&self) -> Vec<&'static str> {
        let checks = [
            (self.integral_ok, "unit integral"),
            (self.norms_ok, "norms"),
            (self.lipschitz_ok, "lipschitz"),
            (self.moments_ok, "moments"),
            (self.symmetry_ok, "symmetry"),
            (self.support_ok, "support"),
            (self.chain_ok, "norm chain"),
        ];
        checks.iter().filter(|(ok, _)| !ok).map(|(_, n)| *n).collect()
    }
}

/// Recomputes the kernel invariants by midpoint quadrature (one Richardson step) and fine-grid
/// slope maximization.
pub fn certify(kernel: &Kernel1D, grid_n: usize) -> CertificationReport {
    assert!(grid_n >= 64, "certification grid must have at least 64 points");
    let n = grid_n;
    let step = 1.0 / n as f64;
    let integral = midpoint_richardson(|u| kernel.eval(u), -0.5, 0.5, n);
    let (sup, l1, l2) = norms(kernel, n);

    // Secant slopes on a grid that straddles the support ends.
    let mut lip = 0.0f64;
    let mut prev = kernel.eval(-0.5 - step);
    for i in 0..=n + 1 {
        let u = -0.5 + i as f64 * step;
        let cur = kernel.eval(u);
        lip = lip.max((cur - prev).abs() / step);
        prev = cur;
    }

    let moment_residuals: Vec<(usize, f64)> = (1..=kernel.moment_order)
        .map(|j| {
            let v = if j % 2 == 1 {
                symmetric_midpoint(|u| u.powi(j as i32) * kernel.eval(u), n)
            } else {
                midpoint_richardson(|u| u.powi(j as i32) * kernel.eval(u), -0.5, 0.5, n)
            };
            (j, v.abs())
        })
        .collect();

    let symmetry_residual = (0..=n)
        .map(|i| {
            let u = i as f64 * step * 0.5;
            (kernel.eval(u) - kernel.eval(-u)).abs()
        })
        .fold(0.0, f64::max);
    let support_residual = (1..=n)
        .map(|i| {
            let u = 0.5 + i as f64 * step;
            kernel.eval(u).abs().max(kernel.eval(-u).abs())
        })
        .fold(0.0, f64::max);

    let tol = NORM_TOL;
    CertificationReport {
        grid_n,
        integral,
        sup_norm: sup,
        l1_norm: l1,
        l2_norm: l2,
        lipschitz_estimate: lip,
        integral_ok: (integral - 1.0).abs() <= tol,
        norms_ok: (sup - kernel.sup_norm).abs() <= tol
            && (l1 - kernel.l1_norm).abs() <= tol
            && (l2 - kernel.l2_norm).abs() <= tol,
        lipschitz_ok: lip <= kernel.lipschitz_q * (1.0 + 1e-12),
        moments_ok: moment_residuals.iter().all(|&(_, r)| r <= MOMENT_TOL),
        moment_residuals,
        symmetry_ok: symmetry_residual == 0.0,
        support_ok: support_residual == 0.0,
        chain_ok: 1.0 - tol <= l1 && l1 <= l2 + tol && l2 <= sup + tol,
        symmetry_residual,
        support_residual,
    }
}

/// How the discrete kernel sum is turned into an estimate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Weighting {
    /// Divide by the discrete kernel mass `Σ K(E(t_ij - x))·cell_area`, making constants exact.
    #[default]
    Normalized,
    /// Multiply by `det(E)`, the continuum normalization.
    Determinant,
}

/// `K(u, v) = K(u)K(v)`.
#[derive(Clone, Debug)]
pub struct ProductKernel {
    factor: Kernel1D,
    weighting: Weighting,
}

impl ProductKernel {
    pub fn new(factor: Kernel1D) -> ProductKernel {
        ProductKernel {
            factor,
            weighting: Weighting::default(),
        }
    }

    pub fn with_weighting(mut self, weighting: Weighting) -> ProductKernel {
        self.weighting = weighting;
        self
    }

    pub fn factor(&self) -> &Kernel1D {
        &self.factor
    }

    pub fn weighting(&self) -> Weighting {
        self.weighting
    }

    #[inline]
    pub fn eval(&self, u: f64, v: f64) -> f64 {
        self.factor.eval(u) * self.factor.eval(v)
    }

    /// `‖K‖∞` of the bivariate kernel.
    pub fn sup_norm(&self) -> f64 {
        self.factor.sup_norm.powi(2)
    }

    /// `‖K‖₂²` of the bivariate kernel, i.e. `‖K‖₂⁴` of the factor.
    pub fn l2_norm_sq(&self) -> f64 {
        self.factor.l2_norm.powi(4)
    }
}

impl Default for ProductKernel {
    fn default() -> Self {
        ProductKernel::new(make_default_kernel())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_values() {
        let k = make_default_kernel();
        assert_eq!(k.eval(0.0), 1.5);
        assert_eq!(k.eval(0.5), 0.0);
        assert_eq!(k.eval(0.6), 0.0);
        assert_eq!(k.eval(-0.6), 0.0);
        let integral = midpoint_richardson(|u| k.eval(u), -0.5, 0.5, 4096);
        assert!((integral - 1.0).abs() < 1e-10);
    }

    #[test]
    fn default_certifies() {
        let r = certify(&make_default_kernel(), 4096);
        assert!(r.passed(), "{:?}", r.failures());
        assert!((r.sup_norm - 1.5).abs() < 1e-6);
        assert!((5.9..=6.0).contains(&r.lipschitz_estimate));
        assert!((r.l2_norm.powi(2) - 1.2).abs() < 1e-6);
        assert!(r.l1_norm >= 1.0 - 1e-12);
    }

    #[test]
    fn box_kernel_fails_lipschitz() {
        let b = Kernel1D::from_fn("box", |u: f64| if u.abs() <= 0.5 { 1.0 } else { 0.0 }, 6.0, 1);
        let r = certify(&b, 4096);
        assert!(!r.lipschitz_ok);
        assert!(b.certified().is_err());
    }

    #[test]
    fn order_kernels() {
        assert_eq!(
            make_order_kernel(1).unwrap().polynomial_coefficients(),
            Some(&[1.5][..])
        );
        let k3 = make_order_kernel(3).unwrap();
        let k2 = make_order_kernel(2).unwrap();
        assert_eq!(k2.polynomial_coefficients(), k3.polynomial_coefficients());
        assert_eq!(k3.moment_order(), 3);
        let r = certify(&k3, 4096);
        assert!(r.moment_residuals[1].1 <= 1e-8);
        assert_eq!(r.moment_residuals[2].1, 0.0);
        let k5 = make_order_kernel(5).unwrap();
        assert!(k5.l1_norm() > 1.0 && k5.sup_norm() > k5.l2_norm());
    }

    #[test]
    fn order_three_closed_form() {
        // Solving the 2x2 moment system by hand gives p(u) = 45/16 - 105/4 u².
        let c = make_order_kernel(3).unwrap();
        let c = c.polynomial_coefficients().unwrap();
        assert!((c[0] - 45.0 / 16.0).abs() < 1e-12);
        assert!((c[1] + 105.0 / 4.0).abs() < 1e-10);
    }

    #[test]
    fn product_kernel() {
        let k = ProductKernel::default();
        assert_eq!(k.eval(0.0, 0.0), 2.25);
        assert_eq!(k.sup_norm(), 2.25);
        assert!((k.l2_norm_sq() - 1.44).abs() < 1e-12);
        assert_eq!(k.eval(0.1, 0.7), 0.0);
    }
}
