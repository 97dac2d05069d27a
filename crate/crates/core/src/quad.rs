//! One-dimensional quadrature used for certification.

/// Composite midpoint rule with `n` cells on `[a, b]`.
pub fn midpoint(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    (0..n).map(|i| f(a + (i as f64 + 0.5) * h)).sum::<f64>() * h
}

/// Midpoint rule with one Richardson step, removing the `O(h²)` term for piecewise-smooth
/// integrands whose kinks sit on the interval ends.
pub fn midpoint_richardson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let coarse = midpoint(&f, a, b, n);
    let fine = midpoint(&f, a, b, 2 * n);
    (4.0 * fine - coarse) / 3.0
}

/// Midpoint rule on `[-1/2, 1/2]` summed in mirrored pairs, so odd integrands of an even
/// kernel cancel exactly.
pub fn symmetric_midpoint(f: impl Fn(f64) -> f64, n: usize) -> f64 {
    let h = 1.0 / n as f64;
    let mut acc = 0.0;
    for i in 0..n / 2 {
        let u = 0.5 - (i as f64 + 0.5) * h;
        acc += f(u) + f(-u);
    }
    if n % 2 == 1 {
        acc += f(0.0);
    }
    acc * h
}

/// Composite Simpson rule with `n` (rounded up to even) intervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn richardson_is_exact_for_cubics() {
        let v = midpoint_richardson(|x| x * x * x + 2.0 * x * x, 0.0, 1.0, 8);
        assert!((v - (0.25 + 2.0 / 3.0)).abs() < 1e-14);
    }

    #[test]
    fn odd_integrands_cancel() {
        let v = symmetric_midpoint(|u| u * u * u * (1.0 - 4.0 * u * u), 4096);
        assert_eq!(v, 0.0);
    }

    #[test]
    fn simpson_matches_gaussian_mass() {
        let phi = |s: f64| (-0.5 * s * s).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let v = simpson(phi, -12.0, 12.0, 4000);
        assert!((v - 1.0).abs() < 1e-12);
    }
}
