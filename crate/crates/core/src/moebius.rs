//! Elements of PSL(2,R) acting on the upper half plane.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on |tr| - 2 separating hyperbolic from parabolic/elliptic.
pub const CLASSIFY_TOL: f64 = 1e-9;
/// Entrywise tolerance for recognising +-I.
pub const IDENTITY_TOL: f64 = 1e-12;
const RENORM_TRIGGER: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ElementClass {
    Identity,
    Elliptic,
    Parabolic,
    Hyperbolic,
}

/// A point of the boundary R u {inf}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryPoint {
    Finite(f64),
    Infinity,
}

impl BoundaryPoint {
    pub fn is_infinite(&self) -> bool {
        matches!(self, BoundaryPoint::Infinity)
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            BoundaryPoint::Finite(x) => Some(*x),
            BoundaryPoint::Infinity => None,
        }
    }
}

/// Unit-determinant real 2x2 matrix modulo sign.
///
/// The stored representative has `a > 0`, or `a == 0` and `b > 0`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MoebiusElement {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl PartialEq for MoebiusElement {
    fn eq(&self, other: &Self) -> bool {
        self.a == other.a && self.b == other.b && self.c == other.c && self.d == other.d
    }
}

impl MoebiusElement {
    /// Builds an element from entries with positive determinant, rescaling to
    /// determinant one.
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        if !(det.is_finite() && det > 0.0) || !(a.is_finite() && b.is_finite() && c.is_finite() && d.is_finite()) {
            return Err(Error::Domain(format!("matrix ({a}, {b}; {c}, {d}) has determinant {det}")));
        }
        Ok(Self::from_raw(a, b, c, d))
    }

    fn from_raw(a: f64, b: f64, c: f64, d: f64) -> Self {
        let det = a * d - b * c;
        let (a, b, c, d) = if (det - 1.0).abs() > RENORM_TRIGGER {
            let r = det.sqrt();
            (a / r, b / r, c / r, d / r)
        } else {
            (a, b, c, d)
        };
        let flip = a < 0.0 || (a == 0.0 && b < 0.0);
        if flip {
            Self { a: -a, b: -b, c: -c, d: -d }
        } else {
            Self { a, b, c, d }
        }
    }

    pub fn identity() -> Self {
        Self { a: 1.0, b: 0.0, c: 0.0, d: 1.0 }
    }

    /// diag(e^{l/2}, e^{-l/2}), translation by `l` along the imaginary axis.
    pub fn diagonal(l: f64) -> Self {
        Self::from_raw((0.5 * l).exp(), 0.0, 0.0, (-0.5 * l).exp())
    }

    pub fn entries(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    /// Matrix product `self * other`.
    pub fn compose(&self, other: &Self) -> Self {
        Self::from_raw(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )
    }

    pub fn inverse(&self) -> Self {
        Self::from_raw(self.d, -self.b, -self.c, self.a)
    }

    pub fn conjugate_by(&self, h: &Self) -> Self {
        h.compose(self).compose(&h.inverse())
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::identity();
        for _ in 0..n {
            out = out.compose(self);
        }
        out
    }

    /// Trace of the canonical representative (sign is representative-dependent).
    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn abs_trace(&self) -> f64 {
        self.trace().abs()
    }

    pub fn is_identity(&self) -> bool {
        (self.a - 1.0).abs() <= IDENTITY_TOL
            && self.b.abs() <= IDENTITY_TOL
            && self.c.abs() <= IDENTITY_TOL
            && (self.d - 1.0).abs() <= IDENTITY_TOL
    }

    pub fn classify(&self) -> ElementClass {
        if self.is_identity() {
            return ElementClass::Identity;
        }
        let t = self.abs_trace();
        if t > 2.0 + CLASSIFY_TOL {
            ElementClass::Hyperbolic
        } else if t < 2.0 - CLASSIFY_TOL {
            ElementClass::Elliptic
        } else {
            ElementClass::Parabolic
        }
    }

    fn require_hyperbolic(&self) -> Result<()> {
        if self.classify() == ElementClass::Hyperbolic {
            Ok(())
        } else {
            Err(Error::NotHyperbolic { trace: self.abs_trace() })
        }
    }

    /// l = 2 arccosh(|tr| / 2).
    pub fn translation_length(&self) -> Result<f64> {
        self.require_hyperbolic()?;
        Ok(2.0 * (0.5 * self.abs_trace()).acosh())
    }

    /// Fixed points on the boundary, attracting first.
    pub fn fixed_points(&self) -> Result<(BoundaryPoint, BoundaryPoint)> {
        self.require_hyperbolic()?;
        let (a, b, c, d) = (self.a, self.b, self.c, self.d);
        if c == 0.0 {
            let p = BoundaryPoint::Finite(b / (d - a));
            return Ok(if a.abs() > d.abs() {
                (BoundaryPoint::Infinity, p)
            } else {
                (p, BoundaryPoint::Infinity)
            });
        }
        let t = self.abs_trace();
        let disc = ((t - 2.0) * (t + 2.0)).sqrt();
        // roots of c z^2 + (d - a) z - b = 0
        let bq = d - a;
        let sign = if bq >= 0.0 { 1.0 } else { -1.0 };
        let q = -0.5 * (bq + sign * disc);
        let z1 = q / c;
        let z2 = -b / q;
        let attracting = |z: f64| (c * z + d).abs() > 1.0;
        Ok(if attracting(z1) {
            (BoundaryPoint::Finite(z1), BoundaryPoint::Finite(z2))
        } else {
            (BoundaryPoint::Finite(z2), BoundaryPoint::Finite(z1))
        })
    }

    /// Action on the closed upper half plane.
    pub fn apply(&self, z: Complex64) -> Complex64 {
        (z * self.a + self.b) / (z * self.c + self.d)
    }

    /// Image of a boundary point.
    pub fn apply_boundary(&self, p: BoundaryPoint) -> BoundaryPoint {
        match p {
            BoundaryPoint::Infinity => {
                if self.c == 0.0 {
                    BoundaryPoint::Infinity
                } else {
                    BoundaryPoint::Finite(self.a / self.c)
                }
            }
            BoundaryPoint::Finite(x) => {
                let den = self.c * x + self.d;
                if den == 0.0 {
                    BoundaryPoint::Infinity
                } else {
                    BoundaryPoint::Finite((self.a * x + self.b) / den)
                }
            }
        }
    }

    /// cosh of the hyperbolic distance between i and g(i).
    pub fn cosh_displacement_at_i(&self) -> f64 {
        0.5 * (self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d)
    }

    pub fn displacement_at_i(&self) -> f64 {
        self.cosh_displacement_at_i().max(1.0).acosh()
    }

    /// Hyperbolic distance from i to the axis of a hyperbolic element.
    pub fn axis_distance_from_i(&self) -> Result<f64> {
        let l = self.translation_length()?;
        let d = self.displacement_at_i();
        Ok(((0.5 * d).sinh() / (0.5 * l).sinh()).max(1.0).acosh())
    }

    /// The hyperbolic n-th root with the same axis, if `self` is hyperbolic.
    pub fn hyperbolic_root(&self, n: u32) -> Result<Self> {
        self.require_hyperbolic()?;
        if n <= 1 {
            return Ok(*self);
        }
        let l = self.translation_length()?;
        let theta = l / (2.0 * n as f64);
        let sh = theta.sinh();
        let u1 = (0.5 * l).sinh() / sh;
        let u2 = ((n as f64 - 1.0) * theta).sinh() / sh;
        let s = if self.trace() < 0.0 { -1.0 } else { 1.0 };
        Ok(Self::from_raw(
            (s * self.a + u2) / u1,
            s * self.b / u1,
            s * self.c / u1,
            (s * self.d + u2) / u1,
        ))
    }

    /// Entrywise comparison modulo sign.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let close = |s: f64| {
            (self.a - s * other.a).abs() <= tol
                && (self.b - s * other.b).abs() <= tol
                && (self.c - s * other.c).abs() <= tol
                && (self.d - s * other.d).abs() <= tol
        };
        close(1.0) || close(-1.0)
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.a.abs().max(self.b.abs()).max(self.c.abs()).max(self.d.abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_square() {
        let g = MoebiusElement::diagonal(1.0);
        let g2 = g.compose(&g);
        assert!((g2.a() - 1f64.exp()).abs() < 1e-14);
        assert!((g2.d() - (-1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn sign_canonical() {
        let g = MoebiusElement::new(-2.0, -1.0, -1.0, -1.0).unwrap();
        assert_eq!(g, MoebiusElement::new(2.0, 1.0, 1.0, 1.0).unwrap());
    }

    #[test]
    fn rejects_negative_det() {
        assert!(MoebiusElement::new(0.0, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn root_recovers_generator() {
        let g = MoebiusElement::new(2.0, 1.0, 1.0, 1.0).unwrap();
        for n in 2..5 {
            let r = g.pow(n).hyperbolic_root(n).unwrap();
            assert!(r.approx_eq(&g, 1e-10), "n={n}");
        }
    }
}
