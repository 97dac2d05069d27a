//! Named signal and kernel presets, written as `kind:key=value,...`.

use std::fmt;
use std::str::FromStr;

use silab_core::estimator::Direction;
use silab_core::kernels::{make_default_kernel, make_order_kernel, Kernel1D};
use silab_core::signals::{make_hoelder, make_inhomogeneous, single_index_field, HoelderSpec, Link, Shape};
use silab_core::Field;

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SignalKind {
    /// `(L/2)|u − center|^β`, `β ≤ 1`.
    Cusp,
    /// Compactly supported bump, `β ≤ 2`.
    Bump,
    /// Sine, `β ≤ 2`.
    Sine,
    /// Narrow tent or bump of width `w` on a constant `flat`.
    Spike,
    Constant,
    Zero,
}

impl SignalKind {
    fn name(self) -> &'static str {
        match self {
            SignalKind::Cusp => "cusp",
            SignalKind::Bump => "bump",
            SignalKind::Sine => "sine",
            SignalKind::Spike => "spike",
            SignalKind::Constant => "constant",
            SignalKind::Zero => "zero",
        }
    }

    /// Parameters the preset reads besides `theta`.
    fn keys(self) -> &'static [&'static str] {
        match self {
            SignalKind::Cusp => &["beta", "L", "center"],
            SignalKind::Bump => &["beta", "L", "center", "width"],
            SignalKind::Sine => &["beta", "L", "omega"],
            SignalKind::Spike => &["beta", "L", "center", "w", "flat"],
            SignalKind::Constant => &["c"],
            SignalKind::Zero => &[],
        }
    }
}

/// A single-index signal `F(t) = f(tᵀθ°)` with `θ°` at `theta_deg` degrees.
#[derive(Clone, Debug, PartialEq)]
pub struct SignalPreset {
    pub kind: SignalKind,
    pub beta: f64,
    pub l: f64,
    pub theta_deg: f64,
    pub center: f64,
    pub width: f64,
    pub omega: f64,
    pub w: f64,
    pub flat: f64,
    pub c: f64,
}

impl Default for SignalPreset {
    fn default() -> SignalPreset {
        SignalPreset {
            kind: SignalKind::Cusp,
            beta: 0.5,
            l: 1.0,
            theta_deg: 30.0,
            center: 0.0,
            width: 1.0,
            omega: 3.0,
            w: 0.1,
            flat: 0.0,
            c: 0.0,
        }
    }
}

impl SignalPreset {
    pub fn theta(&self) -> Direction {
        Direction::from_degrees(self.theta_deg)
    }

    /// The certified link.
    pub fn link(&self) -> Result<Link, CliError> {
        let hoelder = |shape| HoelderSpec {
            beta: self.beta,
            l: self.l,
            shape,
        };
        let link = match self.kind {
            SignalKind::Cusp => make_hoelder(&hoelder(Shape::Cusp { center: self.center }))?,
            SignalKind::Bump => make_hoelder(&hoelder(Shape::Bump {
                center: self.center,
                width: self.width,
            }))?,
            SignalKind::Sine => make_hoelder(&hoelder(Shape::Sine { omega: self.omega }))?,
            SignalKind::Spike => make_inhomogeneous(self.flat, &hoelder(Shape::Cusp { center: self.center }), self.w)?,
            SignalKind::Constant => Link::constant(self.c),
            SignalKind::Zero => Link::constant(0.0),
        };
        Ok(link)
    }

    pub fn field(&self) -> Result<Field, CliError> {
        Ok(single_index_field(&self.link()?, self.theta()))
    }

    /// Smoothness used for rate predictions; constant signals are treated as infinitely smooth
    /// and report the Lipschitz exponent.
    pub fn smoothness(&self) -> f64 {
        match self.kind {
            SignalKind::Constant | SignalKind::Zero => 1.0,
            _ => self.beta,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.link().map(|_| ())
    }
}

impl fmt::Display for SignalPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.kind.name())?;
        for key in self.kind.keys() {
            let v = match *key {
                "beta" => self.beta,
                "L" => self.l,
                "center" => self.center,
                "width" => self.width,
                "omega" => self.omega,
                "w" => self.w,
                "flat" => self.flat,
                _ => self.c,
            };
            write!(f, "{key}={v:?};")?;
        }
        write!(f, "theta={:?}deg", self.theta_deg)
    }
}

fn parse_angle(raw: &str) -> Result<f64, CliError> {
    let bad = |reason: &str| CliError::Malformed {
        key: "theta".into(),
        value: raw.into(),
        reason: reason.into(),
    };
    let (num, to_deg) = if let Some(v) = raw.strip_suffix("deg") {
        (v, 1.0)
    } else if let Some(v) = raw.strip_suffix("rad") {
        (v, 180.0 / std::f64::consts::PI)
    } else {
        (raw, 1.0)
    };
    let v: f64 = num.trim().parse().map_err(|_| bad("expected degrees, `<n>deg` or `<n>rad`"))?;
    Ok(v * to_deg)
}

impl FromStr for SignalPreset {
    type Err = CliError;

    /// Parameters may be separated by `,` or `;`; missing ones keep their defaults.
    fn from_str(s: &str) -> Result<SignalPreset, CliError> {
        let (kind, params) = s.split_once(':').unwrap_or((s, ""));
        let kind = match kind.trim() {
            "cusp" => SignalKind::Cusp,
            "bump" => SignalKind::Bump,
            "sine" => SignalKind::Sine,
            "spike" => SignalKind::Spike,
            "constant" => SignalKind::Constant,
            "zero" => SignalKind::Zero,
            other => return Err(CliError::UnknownPreset(format!("signal `{other}`"))),
        };
        let mut p = SignalPreset {
            kind,
            ..SignalPreset::default()
        };
        for kv in params.split([',', ';']).map(str::trim).filter(|t| !t.is_empty()) {
            let (k, v) = kv.split_once('=').ok_or_else(|| CliError::Malformed {
                key: "signal".into(),
                value: kv.into(),
                reason: "expected `key=value`".into(),
            })?;
            if k == "theta" {
                p.theta_deg = parse_angle(v)?;
                continue;
            }
            if !kind.keys().contains(&k) {
                return Err(CliError::UnknownPreset(format!("parameter `{k}` for signal `{}`", kind.name())));
            }
            let v: f64 = v.parse().map_err(|_| CliError::Malformed {
                key: format!("signal.{k}"),
                value: v.into(),
                reason: "expected a number".into(),
            })?;
            match k {
                "beta" => p.beta = v,
                "L" => p.l = v,
                "center" => p.center = v,
                "width" => p.width = v,
                "omega" => p.omega = v,
                "w" => p.w = v,
                "flat" => p.flat = v,
                _ => p.c = v,
            }
        }
        Ok(p)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelPreset {
    /// `1.5(1 − 4u²)` on `[-½, ½]`.
    Default,
    /// Polynomial kernel with vanishing moments up to `m`.
    Order(usize),
}

impl KernelPreset {
    pub fn kernel(self) -> Result<Kernel1D, CliError> {
        Ok(match self {
            KernelPreset::Default => make_default_kernel(),
            KernelPreset::Order(m) => make_order_kernel(m)?,
        })
    }
}

impl fmt::Display for KernelPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelPreset::Default => f.write_str("default"),
            KernelPreset::Order(m) => write!(f, "order:m={m}"),
        }
    }
}

impl FromStr for KernelPreset {
    type Err = CliError;
    fn from_str(s: &str) -> Result<KernelPreset, CliError> {
        if s == "default" {
            return Ok(KernelPreset::Default);
        }
        let m = s
            .strip_prefix("order:m=")
            .ok_or_else(|| CliError::UnknownPreset(format!("kernel `{s}`")))?;
        let m = m.parse().map_err(|_| CliError::Malformed {
            key: "kernel".into(),
            value: s.into(),
            reason: "moment order must be a non-negative integer".into(),
        })?;
        Ok(KernelPreset::Order(m))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documented_preset_parses() {
        let p: SignalPreset = "cusp:beta=0.5,L=1,theta=30deg".parse().unwrap();
        assert_eq!(p.kind, SignalKind::Cusp);
        assert_eq!((p.beta, p.l, p.theta_deg), (0.5, 1.0, 30.0));
        let back: SignalPreset = p.to_string().parse().unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn radians_and_bare_degrees() {
        let a: SignalPreset = "zero:theta=45".parse().unwrap();
        let b: SignalPreset = format!("zero:theta={}rad", std::f64::consts::FRAC_PI_4).parse().unwrap();
        assert!((a.theta_deg - b.theta_deg).abs() < 1e-12);
    }

    #[test]
    fn unknown_names_are_rejected() {
        assert!("wave:beta=1".parse::<SignalPreset>().is_err());
        assert!("cusp:omega=2".parse::<SignalPreset>().is_err());
        assert!("gauss".parse::<KernelPreset>().is_err());
        assert_eq!("order:m=3".parse::<KernelPreset>().unwrap(), KernelPreset::Order(3));
    }

    #[test]
    fn out_of_class_links_fail_certification() {
        let p: SignalPreset = "cusp:beta=1.5".parse().unwrap();
        assert!(p.validate().is_err());
    }
}
