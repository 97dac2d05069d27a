//! Certified test links, single-index fields and the lower-bound hypothesis family.

use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, LabError, Result};
use crate::estimator::Direction;
use crate::noise_field::Field;

type Fun = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A univariate link `f`, optionally with its derivative.
#[derive(Clone)]
pub struct Link {
    name: String,
    f: Fun,
    df: Option<Fun>,
}

impl Link {
    pub fn new(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Link {
        Link {
            name: name.into(),
            f: Arc::new(f),
            df: None,
        }
    }

    pub fn with_derivative(mut self, df: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Link {
        self.df = Some(Arc::new(df));
        self
    }

    pub fn constant(c: f64) -> Link {
        Link::new(format!("constant:c={c}"), move |_| c).with_derivative(|_| 0.0)
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        (self.f)(u)
    }

    pub fn derivative(&self, u: f64) -> Option<f64> {
        self.df.as_ref().map(|d| d(u))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Grid sup of `|f|` on `[lo, hi]`.
    pub fn sup_on(&self, lo: f64, hi: f64) -> f64 {
        let n = 8192;
        (0..=n)
            .map(|i| self.eval(lo + (hi - lo) * i as f64 / n as f64).abs())
            .fold(0.0, f64::max)
    }
}

impl fmt::Debug for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Link({})", self.name)
    }
}

/// Shape families for Hölder links.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Shape {
    /// `(L/2)·min(|u − u₀|, 2)^β`, for `β ≤ 1`.
    Cusp { center: f64 },
    /// A scaled `(1 − 4v²)²` bump of half-width `width/2`, for `β ≤ 2`.
    Bump { center: f64, width: f64 },
    /// `L·c·sin(ωu)` with `c` chosen from derivative bounds, for `β ≤ 2`.
    Sine { omega: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HoelderSpec {
    pub beta: f64,
    pub l: f64,
    pub shape: Shape,
}

impl HoelderSpec {
    pub fn cusp(beta: f64, l: f64) -> HoelderSpec {
        HoelderSpec {
            beta,
            l,
            shape: Shape::Cusp { center: 0.0 },
        }
    }
}

/// Parameters of a Nikol'skii class `N_p(β, L)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NikolskiiSpec {
    pub beta: f64,
    pub l: f64,
    pub p: f64,
}

impl NikolskiiSpec {
    /// Requires `p > 1` and `βp > 1`.
    pub fn new(beta: f64, l: f64, p: f64) -> Result<NikolskiiSpec> {
        if !(beta > 0.0 && l > 0.0 && p > 1.0 && beta * p > 1.0) {
            return Err(invalid(format!(
                "Nikol'skii class needs β, L > 0, p > 1 and βp > 1 (got β={beta}, L={l}, p={p})"
            )));
        }
        Ok(NikolskiiSpec { beta, l, p })
    }

    /// Admits the boundary `p ≥ 1`, `βp ≥ 1`.
    pub fn boundary(beta: f64, l: f64, p: f64) -> Result<NikolskiiSpec> {
        if !(beta > 0.0 && l > 0.0 && p >= 1.0 && beta * p >= 1.0) {
            return Err(invalid(format!(
                "Nikol'skii class needs β, L > 0, p ≥ 1 and βp ≥ 1 (got β={beta}, L={l}, p={p})"
            )));
        }
        Ok(NikolskiiSpec { beta, l, p })
    }
}

fn m_beta(beta: f64) -> usize {
    (beta.ceil() - 1.0).max(0.0) as usize
}

/// Outcome of a finite-difference class certification.
#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    /// Largest difference ratio found, compared against `1.02·L`.
    pub constant: f64,
    /// Sup (Hölder) or `L_p` (Nikol'skii) norms of the derivatives `f^(m)`, `m ≤ m_β`.
    pub derivative_norms: Vec<f64>,
    pub target: f64,
    pub passed: bool,
}

/// Certified constants may exceed `L` by this factor.
pub const CERT_SLACK: f64 = 1.02;

fn dyadic_steps(max: f64, min: f64, per_octave: usize) -> Vec<f64> {
    let mut out = Vec::new();
    let mut j = 0;
    loop {
        let h = max * 2f64.powf(-(j as f64) / per_octave as f64);
        if h < min {
            break;
        }
        out.push(h);
        j += 1;
    }
    out
}

/// `sup |g(t+h) − g(t)| / h^γ` over a `(t, h)` grid.
pub fn hoelder_ratio(g: impl Fn(f64) -> f64, gamma: f64, lo: f64, hi: f64, dt: f64, h_min: f64, h_max: f64) -> f64 {
    let n = ((hi - lo) / dt).round() as usize;
    let ts: Vec<f64> = (0..=n).map(|i| lo + i as f64 * dt).collect();
    let gs: Vec<f64> = ts.iter().map(|&t| g(t)).collect();
    let mut best = 0.0f64;
    for h in dyadic_steps(h_max, h_min, 8) {
        let scale = h.powf(gamma);
        for (t, gt) in ts.iter().zip(&gs) {
            best = best.max((g(t + h) - gt).abs() / scale);
        }
    }
    best
}

/// Finite-difference membership check for `H(β, L)` on `[lo, hi]`.
pub fn verify_hoelder(link: &Link, beta: f64, l: f64, lo: f64, hi: f64) -> Result<Certificate> {
    let m = m_beta(beta);
    let dt = 1.0 / 512.0;
    let (constant, norms) = match m {
        0 => (
            hoelder_ratio(|u| link.eval(u), beta, lo, hi, dt, 1.0 / 16384.0, 4.0),
            vec![link.sup_on(lo, hi)],
        ),
        1 => {
            let df = link
                .df
                .clone()
                .ok_or_else(|| LabError::LinkCertification(format!("{} lacks a derivative", link.name)))?;
            let d = Link {
                name: String::new(),
                f: df.clone(),
                df: None,
            };
            (
                hoelder_ratio(|u| df(u), beta - 1.0, lo, hi, dt, 1.0 / 16384.0, 4.0),
                vec![link.sup_on(lo, hi), d.sup_on(lo, hi)],
            )
        }
        _ => return Err(invalid(format!("β = {beta} > 2 is not supported"))),
    };
    let passed = constant <= CERT_SLACK * l && norms.iter().all(|&v| v <= CERT_SLACK * l);
    Ok(Certificate {
        constant,
        derivative_norms: norms,
        target: l,
        passed,
    })
}

fn lp_difference(g: &dyn Fn(f64) -> f64, h: f64, p: f64, lo: f64, hi: f64) -> f64 {
    // Differences vanish unless [t, t+h] meets [lo, hi].
    let a = lo - h;
    let dt = (h / 16.0).min(1.0 / 1024.0);
    let n = ((hi - a) / dt).ceil() as usize;
    let dt = (hi - a) / n as f64;
    let s: f64 = (0..n)
        .map(|i| {
            let t = a + (i as f64 + 0.5) * dt;
            (g(t + h) - g(t)).abs().powf(p)
        })
        .sum();
    (s * dt).powf(1.0 / p)
}

fn lp_norm(g: &dyn Fn(f64) -> f64, p: f64, lo: f64, hi: f64) -> f64 {
    let n = 1 << 16;
    let dt = (hi - lo) / n as f64;
    let s: f64 = (0..n).map(|i| g(lo + (i as f64 + 0.5) * dt).abs().powf(p)).sum();
    (s * dt).powf(1.0 / p)
}

/// Finite-difference membership check for `N_p(β, L)`; the link must be constant outside
/// `[lo, hi]` (or its `m_β`-th derivative must vanish there).
pub fn verify_nikolskii(link: &Link, spec: &NikolskiiSpec, lo: f64, hi: f64) -> Result<Certificate> {
    let m = m_beta(spec.beta);
    let (g, norms): (Fun, Vec<f64>) = match m {
        0 => (link.f.clone(), Vec::new()),
        1 => {
            let df = link
                .df
                .clone()
                .ok_or_else(|| LabError::LinkCertification(format!("{} lacks a derivative", link.name)))?;
            let n = lp_norm(&*df, spec.p, lo, hi);
            (df, vec![n])
        }
        _ => return Err(invalid(format!("β = {} > 2 is not supported", spec.beta))),
    };
    let gamma = spec.beta - m as f64;
    let constant = dyadic_steps(4.0, 1.0 / 4096.0, 4)
        .into_iter()
        .map(|h| lp_difference(&*g, h, spec.p, lo, hi) / h.powf(gamma))
        .fold(0.0, f64::max);
    let passed = constant <= CERT_SLACK * spec.l && norms.iter().all(|&v| v <= CERT_SLACK * spec.l);
    Ok(Certificate {
        constant,
        derivative_norms: norms,
        target: spec.l,
        passed,
    })
}

/// `g₀(v) = (1 − 4v²)²` on `|v| < 1/2`.
pub fn bump0(v: f64) -> f64 {
    if v.abs() >= 0.5 {
        0.0
    } else {
        (1.0 - 4.0 * v * v).powi(2)
    }
}

/// `g₀′(v) = −16v(1 − 4v²)`.
pub fn bump0_prime(v: f64) -> f64 {
    if v.abs() >= 0.5 {
        0.0
    } else {
        -16.0 * v * (1.0 - 4.0 * v * v)
    }
}

/// `sup |g₀′| = 32/(3√12)`, attained at `v = 1/√12`.
pub const BUMP0_LIPSCHITZ: f64 = 3.079_201_435_678_004;

/// Smallest `C` with `g₀/C ∈ H(β, 1)`.
pub fn bump_class_constant(beta: f64) -> Result<f64> {
    let dt = 1.0 / 2048.0;
    match m_beta(beta) {
        0 if beta == 1.0 => Ok(BUMP0_LIPSCHITZ),
        0 => Ok(hoelder_ratio(bump0, beta, -0.75, 0.75, dt, 1.0 / 8192.0, 2.0).max(1.0)),
        1 => {
            let h = hoelder_ratio(bump0_prime, beta - 1.0, -0.75, 0.75, dt, 1.0 / 8192.0, 2.0);
            Ok(h.max(BUMP0_LIPSCHITZ))
        }
        _ => Err(invalid(format!("β = {beta} > 2 is not supported"))),
    }
}

fn sine_amplitude(beta: f64, omega: f64) -> Result<f64> {
    match m_beta(beta) {
        0 => Ok(1.0f64.min(1.0 / (2f64.powf(1.0 - beta) * omega.powf(beta)))),
        1 => Ok(1.0f64
            .min(1.0 / omega)
            .min(1.0 / (omega.powf(beta) * 2f64.powf(2.0 - beta)))),
        _ => Err(invalid(format!("β = {beta} > 2 is not supported"))),
    }
}

/// Certification window for generated links.
pub const LINK_RANGE: (f64, f64) = (-3.0, 3.0);

/// A link in `H(β, L)` of the requested shape, certified by finite differences.
pub fn make_hoelder(spec: &HoelderSpec) -> Result<Link> {
    let HoelderSpec { beta, l, shape } = *spec;
    if !(beta > 0.0 && l >= 0.0) {
        return Err(invalid(format!("Hölder class needs β > 0, L ≥ 0 (got β={beta}, L={l})")));
    }
    let link = match shape {
        Shape::Cusp { center } => {
            if beta > 1.0 {
                return Err(invalid("cusp links need β ≤ 1; use bump or sine"));
            }
            Link::new(format!("cusp:beta={beta},L={l},u0={center}"), move |u: f64| {
                0.5 * l * (u - center).abs().min(2.0).powf(beta)
            })
        }
        Shape::Bump { center, width } => {
            if !(width > 0.0) {
                return Err(invalid("bump width must be positive"));
            }
            let amp = l * match m_beta(beta) {
                0 => width.powf(beta) / bump_class_constant(beta)?,
                _ => (width / BUMP0_LIPSCHITZ)
                    .min(width.powf(beta) / bump_class_constant(beta)?)
                    .min(1.0),
            }
            .min(1.0);
            Link::new(format!("bump:beta={beta},L={l},u0={center},w={width}"), move |u| {
                amp * bump0((u - center) / width)
            })
            .with_derivative(move |u| amp / width * bump0_prime((u - center) / width))
        }
        Shape::Sine { omega } => {
            let c = l * sine_amplitude(beta, omega)?;
            Link::new(format!("sine:beta={beta},L={l},omega={omega}"), move |u: f64| c * (omega * u).sin())
                .with_derivative(move |u: f64| c * omega * (omega * u).cos())
        }
    };
    certify_hoelder(link, beta, l)
}

fn certify_hoelder(link: Link, beta: f64, l: f64) -> Result<Link> {
    if l == 0.0 {
        return Ok(link);
    }
    let cert = verify_hoelder(&link, beta, l, LINK_RANGE.0, LINK_RANGE.1)?;
    if cert.passed {
        Ok(link)
    } else {
        Err(LabError::LinkCertification(format!(
            "{}: constant {:.4} (norms {:?}) exceeds {CERT_SLACK}·L = {:.4}",
            link.name,
            cert.constant,
            cert.derivative_norms,
            CERT_SLACK * l
        )))
    }
}

/// A link equal to `flat_scale` except for a localized feature of width `w` centred at the
/// spec's centre: a cusp spike `(L/2)(w^β − |u − u₁|^β)₊` for `β ≤ 1`, a bump otherwise.
pub fn make_inhomogeneous(flat_scale: f64, bump: &HoelderSpec, w: f64) -> Result<Link> {
    let HoelderSpec { beta, l, shape } = *bump;
    let center = match shape {
        Shape::Cusp { center } | Shape::Bump { center, .. } => center,
        Shape::Sine { .. } => return Err(invalid("inhomogeneous links need a cusp or bump feature")),
    };
    if !(w > 0.0) {
        return Err(invalid("feature width must be positive"));
    }
    let link = if beta <= 1.0 {
        let top = w.powf(beta);
        Link::new(
            format!("inhomogeneous:flat={flat_scale},beta={beta},L={l},u1={center},w={w}"),
            move |u: f64| flat_scale + 0.5 * l * (top - (u - center).abs().powf(beta)).max(0.0),
        )
    } else {
        let f = make_hoelder(&HoelderSpec {
            beta,
            l,
            shape: Shape::Bump { center, width: 2.0 * w },
        })?;
        let g = f.clone();
        Link::new(
            format!("inhomogeneous:flat={flat_scale},beta={beta},L={l},u1={center},w={w}"),
            move |u| flat_scale + f.eval(u),
        )
        .with_derivative(move |u| g.derivative(u).unwrap_or(0.0))
    };
    if flat_scale.abs() > l {
        return Err(invalid("flat level must not exceed L (sup-norm part of the class)"));
    }
    certify_hoelder(link, beta, l)
}

/// `F(x) = f(xᵀθ°)` with its metadata.
#[derive(Clone, Debug)]
pub struct SingleIndexSignal {
    pub link: Link,
    pub theta0: Direction,
    pub bound_m: f64,
}

impl SingleIndexSignal {
    pub fn new(link: Link, theta0: Direction) -> SingleIndexSignal {
        let bound_m = link.sup_on(-2.0, 2.0);
        SingleIndexSignal { link, theta0, bound_m }
    }

    pub fn field(&self) -> Field {
        single_index_field(&self.link, self.theta0)
    }
}

/// `t ↦ link(θ°ᵀt)`.
pub fn single_index_field(link: &Link, theta0: Direction) -> Field {
    let f = link.clone();
    Field::new(
        format!("{}@theta=({:?},{:?})", link.name(), theta0.theta1(), theta0.theta2()),
        move |t| f.eval(theta0.project(t)),
    )
}

/// The default bump rescaled into `H(β, 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BumpG {
    pub scale: f64,
}

impl BumpG {
    pub fn for_beta(beta: f64) -> Result<BumpG> {
        Ok(BumpG {
            scale: 1.0 / bump_class_constant(beta)?,
        })
    }
    #[inline]
    pub fn eval(&self, v: f64) -> f64 {
        self.scale * bump0(v)
    }
    /// `‖g‖₁ = (8/15)·scale`.
    pub fn l1(&self) -> f64 {
        8.0 / 15.0 * self.scale
    }
    /// `‖g‖₂² = (128/315)·scale²`.
    pub fn l2_sq(&self) -> f64 {
        128.0 / 315.0 * self.scale * self.scale
    }
    pub fn at_zero(&self) -> f64 {
        self.scale
    }
}

/// `ψ_ε(β, L) = L^{1/(2β+1)}(ε√ln(1/ε))^{2β/(2β+1)}`.
pub fn psi_eps(beta: f64, l: f64, epsilon: f64) -> f64 {
    let r = epsilon * (1.0 / epsilon).ln().sqrt();
    l.powf(1.0 / (2.0 * beta + 1.0)) * r.powf(2.0 * beta / (2.0 * beta + 1.0))
}

/// Ridge hypotheses `F_i(t) = L h^β g(θ_iᵀ(t − x)/h)`, `i = 1..N`.
#[derive(Clone, Debug)]
pub struct HypothesisFamily {
    pub beta: f64,
    pub l: f64,
    pub epsilon: f64,
    pub b: f64,
    pub g: BumpG,
    pub h: f64,
    pub n: usize,
    pub a_frak: f64,
    pub directions: Vec<Direction>,
    /// The estimation point in `R^d`; only its first two coordinates enter the ridges.
    pub x: Vec<f64>,
    pub d: usize,
}

impl HypothesisFamily {
    /// `F_i(t)` for `i ≥ 1`; `F_0 ≡ 0`.
    #[inline]
    pub fn eval(&self, i: usize, t: [f64; 2]) -> f64 {
        if i == 0 {
            return 0.0;
        }
        let th = self.directions[i - 1];
        let s = th.project([t[0] - self.x[0], t[1] - self.x[1]]);
        self.l * self.h.powf(self.beta) * self.g.eval(s / self.h)
    }

    /// `|g(0)|·𝔞^{2β/(2β+1)}·ψ_ε(β, L)`.
    pub fn lambda_closed_form(&self) -> f64 {
        self.g.at_zero().abs() * self.a_frak.powf(2.0 * self.beta / (2.0 * self.beta + 1.0)) * psi_eps(self.beta, self.l, self.epsilon)
    }
}

/// The hypothesis family with `h = (𝔞L⁻¹ε√ln(1/ε))^{2/(2β+1)}`, `N = ⌈ε^{-b}⌉`,
/// `𝔞² = 3^{-d}·b·‖g‖₂⁻²` and `θ_i = (cos(i/N), sin(i/N))`.
pub fn hypothesis_family(beta: f64, l: f64, epsilon: f64, b: f64, x: &[f64], d: usize) -> Result<HypothesisFamily> {
    crate::noise_field::check_epsilon(epsilon)?;
    if !(b > 0.0 && b < 2.0 / (2.0 * beta + 1.0)) {
        return Err(invalid(format!("b = {b} must lie in (0, 2/(2β+1)) = (0, {})", 2.0 / (2.0 * beta + 1.0))));
    }
    if d < 2 || x.len() != d {
        return Err(invalid(format!("point must have dimension d = {d} ≥ 2")));
    }
    let g = BumpG::for_beta(beta)?;
    let a_frak = (3f64.powi(-(d as i32)) * b / g.l2_sq()).sqrt();
    let h = (a_frak / l * epsilon * (1.0 / epsilon).ln().sqrt()).powf(2.0 / (2.0 * beta + 1.0));
    let n = epsilon.powf(-b).ceil() as usize;
    let directions = (1..=n).map(|i| Direction::from_angle(i as f64 / n as f64)).collect();
    Ok(HypothesisFamily {
        beta,
        l,
        epsilon,
        b,
        g,
        h,
        n,
        a_frak,
        directions,
        x: x.to_vec(),
        d,
    })
}
