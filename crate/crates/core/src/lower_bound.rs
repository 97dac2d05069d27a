//! Numerical check of the three hypothesis-family conditions behind the pointwise lower bound.

use crate::error::{invalid, Result};
use crate::exec::Execution;
use crate::signals::HypothesisFamily;

/// Relative slack allowed for quadrature in the norm and cross-product checks.
pub const QUAD_TOL: f64 = 0.02;

/// Midpoints per axis on `[-1, 1]²` for inner products.
pub const DEFAULT_QUAD_N: usize = 2048;

#[derive(Clone, Debug, PartialEq)]
pub struct LBReport {
    pub epsilon: f64,
    pub n: usize,
    pub h: f64,
    /// `F_1(x) − F_0(x)`.
    pub lambda_eps: f64,
    pub lambda_closed_form: f64,
    /// `max_i |(F_i(x) − F_0(x)) − λ_closed|`.
    pub lambda_deviation: f64,
    pub max_cross_inner: f64,
    pub argmax_pair: Option<(usize, usize)>,
    pub max_sq_norm: f64,
    /// `3^{d-1}‖g‖₂²L²h^{2β+1}`.
    pub sq_norm_analytic_bound: f64,
    pub c_used: f64,
    pub rho_used: f64,
    /// Smallest `c` with every cross product `≤ cε²`.
    pub c_min: f64,
    pub bound_value: f64,
    pub separation_passed: bool,
    pub cross_passed: bool,
    pub norm_passed: bool,
    /// `max ⟨F_i, F_j⟩ / (3^{d-2}·2‖g‖₁²𝔞²ε² ln(1/ε)·N h)`.
    pub cross_display_ratio: f64,
    /// `⟨F_i, F_j⟩`, `i, j = 1..N`, stored row-major.
    pub gram: Vec<f64>,
}

impl LBReport {
    pub fn all_passed(&self) -> bool {
        self.separation_passed && self.cross_passed && self.norm_passed
    }

    pub fn gram_entry(&self, i: usize, j: usize) -> f64 {
        self.gram[(i - 1) * self.n + (j - 1)]
    }
}

/// `½(1 − √((e^c − 1)/(e^c + 3)))·λ`.
pub fn bound_value(lambda_eps: f64, c: f64) -> Result<f64> {
    if !(c > 0.0) {
        return Err(invalid(format!("c = {c} must be positive")));
    }
    let e = c.exp();
    Ok(0.5 * (1.0 - ((e - 1.0) / (e + 3.0)).sqrt()) * lambda_eps)
}

/// Gram matrix of `F_1..F_N` over `[-1, 1]^d` by midpoint quadrature in the first two
/// coordinates; the remaining `d − 2` contribute a factor `2^{d−2}`.
pub fn gram_matrix(family: &HypothesisFamily, quad_n: usize, exec: Execution) -> Vec<f64> {
    let n = family.n;
    let step = 2.0 / quad_n as f64;
    let rows = exec.map_range(quad_n, |r| {
        let t2 = -1.0 + (r as f64 + 0.5) * step;
        let mut acc = vec![0.0; n * n];
        let mut vals = vec![0.0; n];
        for c in 0..quad_n {
            let t1 = -1.0 + (c as f64 + 0.5) * step;
            let mut any = false;
            for (i, v) in vals.iter_mut().enumerate() {
                *v = family.eval(i + 1, [t1, t2]);
                any |= *v != 0.0;
            }
            if !any {
                continue;
            }
            for i in 0..n {
                if vals[i] == 0.0 {
                    continue;
                }
                for j in 0..n {
                    acc[i * n + j] += vals[i] * vals[j];
                }
            }
        }
        acc
    });
    let scale = step * step * 2f64.powi(family.d as i32 - 2);
    let mut gram = vec![0.0; n * n];
    for row in rows {
        for (g, v) in gram.iter_mut().zip(row) {
            *g += v;
        }
    }
    gram.iter_mut().for_each(|g| *g *= scale);
    gram
}

/// Evaluates the separation, cross-product and norm conditions with the given `c` and `ρ`.
pub fn check_family(family: &HypothesisFamily, c: f64, rho: f64) -> Result<LBReport> {
    check_family_with(family, c, rho, DEFAULT_QUAD_N, Execution::default())
}

pub fn check_family_with(family: &HypothesisFamily, c: f64, rho: f64, quad_n: usize, exec: Execution) -> Result<LBReport> {
    let eps = family.epsilon;
    let x = [family.x[0], family.x[1]];
    let closed = family.lambda_closed_form();
    let lambda_eps = family.eval(1, x) - family.eval(0, x);
    let lambda_deviation = (1..=family.n)
        .map(|i| ((family.eval(i, x) - family.eval(0, x)).abs() - closed).abs())
        .fold(0.0, f64::max);

    let gram = gram_matrix(family, quad_n, exec);
    let n = family.n;
    let mut max_cross = f64::NEG_INFINITY;
    let mut argmax = None;
    for i in 0..n {
        for j in 0..n {
            if i != j && gram[i * n + j] > max_cross {
                max_cross = gram[i * n + j];
                argmax = Some((i + 1, j + 1));
            }
        }
    }
    if argmax.is_none() {
        max_cross = 0.0;
    }
    let max_sq_norm = (0..n).map(|i| gram[i * n + i]).fold(0.0, f64::max);
    let ln_n = (n as f64).ln();
    let d = family.d as i32;
    let log_term = eps * eps * (1.0 / eps).ln();
    let cross_display = 3f64.powi(d - 2) * 2.0 * family.g.l1().powi(2) * family.a_frak.powi(2) * log_term * (n as f64 * family.h);
    let sq_norm_analytic_bound =
        3f64.powi(d - 1) * family.g.l2_sq() * family.l * family.l * family.h.powf(2.0 * family.beta + 1.0);
    Ok(LBReport {
        epsilon: eps,
        n,
        h: family.h,
        lambda_eps,
        lambda_closed_form: closed,
        lambda_deviation,
        max_cross_inner: max_cross,
        argmax_pair: argmax,
        max_sq_norm,
        sq_norm_analytic_bound,
        c_used: c,
        rho_used: rho,
        c_min: (max_cross / (eps * eps)).max(0.0),
        bound_value: bound_value(lambda_eps.abs(), c)?,
        separation_passed: lambda_deviation <= 1e-10 * closed.max(1.0),
        cross_passed: n < 2 || max_cross <= c * eps * eps,
        norm_passed: n < 2 || max_sq_norm <= (1.0 + QUAD_TOL) * rho * eps * eps * ln_n,
        cross_display_ratio: if n < 2 { 0.0 } else { max_cross / cross_display },
        gram,
    })
}

/// Largest ratio of a quadrature cross product to the analytic display; must be `≤ 1` up to
/// quadrature error.
pub fn cross_inner_bound_check(family: &HypothesisFamily) -> Result<f64> {
    Ok(check_family(family, 1.0, 1.0 / 3.0)?.cross_display_ratio)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::hypothesis_family;

    #[test]
    fn bound_value_examples() {
        let b = bound_value(1.0, 5f64.ln()).unwrap();
        assert!((b - 0.5 * (1.0 - 0.5f64.sqrt())).abs() < 1e-12);
        assert!((bound_value(2.0, 1e-12).unwrap() - 1.0).abs() < 1e-5);
        assert!(bound_value(1.0, 0.5).unwrap() > bound_value(1.0, 1.0).unwrap());
        assert!(bound_value(1.0, 0.0).is_err());
    }

    #[test]
    fn single_hypothesis_is_vacuous() {
        // ε^{-b} ≤ 1 is impossible for ε < 1, so force N = 1 by hand.
        let mut fam = hypothesis_family(1.0, 1.0, 2f64.powi(-6), 0.5, &[0.0, 0.0], 2).unwrap();
        fam.n = 1;
        fam.directions.truncate(1);
        let rep = check_family_with(&fam, 1.0, 1.0 / 3.0, 256, Execution::Sequential).unwrap();
        assert!(rep.cross_passed && rep.norm_passed);
        assert!(rep.argmax_pair.is_none());
    }

    #[test]
    fn higher_dimension_scales_gram() {
        let f2 = hypothesis_family(1.0, 1.0, 2f64.powi(-6), 0.5, &[0.0, 0.0], 2).unwrap();
        let mut f3 = f2.clone();
        f3.d = 3;
        f3.x.push(0.0);
        let g2 = gram_matrix(&f2, 256, Execution::Sequential);
        let g3 = gram_matrix(&f3, 256, Execution::Sequential);
        for (a, b) in g2.iter().zip(&g3) {
            assert!((2.0 * a - b).abs() <= 1e-15 * b.abs().max(1.0));
        }
    }
}
