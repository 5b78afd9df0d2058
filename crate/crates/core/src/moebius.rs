//! 2×2 complex matrices with unit determinant, as used for holonomy and
//! monodromy elements, plus trace-based isometry classification.

use std::fmt;
use std::ops::{Add, Mul};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default tolerance for recognising parabolic traces.
pub const PARABOLIC_TOL: f64 = 1e-8;

/// Default tolerance on `|det - 1|` for a normalized matrix.
pub const DET_TOL: f64 = 1e-10;

/// Relative tolerance used to decide that a trace is real.
pub const REAL_TRACE_TOL: f64 = 1e-8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// The matrix `[[a, b], [c, d]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2C {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl Mat2C {
    pub const IDENTITY: Mat2C = Mat2C {
        a: ONE,
        b: ZERO,
        c: ZERO,
        d: ONE,
    };

    /// Not in SL2; used for differences of matrices.
    pub const ZERO: Mat2C = Mat2C {
        a: ZERO,
        b: ZERO,
        c: ZERO,
        d: ZERO,
    };

    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Mat2C { a, b, c, d }
    }

    /// Matrix with real entries.
    pub fn real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2C::new(a.into(), b.into(), c.into(), d.into())
    }

    pub fn diag(a: Complex64, d: Complex64) -> Self {
        Mat2C::new(a, ZERO, ZERO, d)
    }

    pub fn det(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> Complex64 {
        self.a + self.d
    }

    /// Inverse via the adjugate. For unit determinant this is exact up to
    /// rounding of the division.
    pub fn inverse(&self) -> Self {
        let det = self.det();
        Mat2C::new(self.d / det, -self.b / det, -self.c / det, self.a / det)
    }

    /// Adjugate, i.e. the inverse of a unit-determinant matrix without the
    /// division.
    pub fn adjugate(&self) -> Self {
        Mat2C::new(self.d, -self.b, -self.c, self.a)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Mat2C::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    pub fn neg(&self) -> Self {
        self.scale(Complex64::new(-1.0, 0.0))
    }

    pub fn max_abs(&self) -> f64 {
        self.a
            .norm()
            .max(self.b.norm())
            .max(self.c.norm())
            .max(self.d.norm())
    }

    /// Largest entrywise distance to `other`.
    pub fn distance(&self, other: &Mat2C) -> f64 {
        (self.a - other.a)
            .norm()
            .max((self.b - other.b).norm())
            .max((self.c - other.c).norm())
            .max((self.d - other.d).norm())
    }

    /// Divide by a square root of the determinant.
    ///
    /// When `previous_root` is given, the root closest to it is chosen so
    /// that a sequence of normalizations along a computation path stays on
    /// one continuous branch. Returns the normalized matrix together with
    /// the root that was used.
    pub fn normalized(&self, previous_root: Option<Complex64>) -> (Self, Complex64) {
        let mut root = self.det().sqrt();
        if let Some(prev) = previous_root {
            if (-root - prev).norm() < (root - prev).norm() {
                root = -root;
            }
        }
        (self.scale(root.inv()), root)
    }

    pub fn commutator(&self, other: &Mat2C) -> Self {
        *self * *other * self.inverse() * other.inverse()
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Mat2C::IDENTITY, |acc, _| acc * *self)
    }
}

impl Mul for Mat2C {
    type Output = Mat2C;

    fn mul(self, o: Mat2C) -> Mat2C {
        Mat2C::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }
}

impl Add for Mat2C {
    type Output = Mat2C;

    fn add(self, o: Mat2C) -> Mat2C {
        Mat2C::new(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)
    }
}

impl fmt::Display for Mat2C {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

/// Matrix product `m1 · m2`.
pub fn compose(m1: &Mat2C, m2: &Mat2C) -> Mat2C {
    *m1 * *m2
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IsometryKind {
    Elliptic,
    Parabolic,
    Loxodromic,
    IdentityLike,
}

/// Classification of a Möbius transformation by its trace.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IsometryClass {
    pub kind: IsometryKind,
    pub tol: f64,
    /// Distance from the trace to the nearest value where the
    /// classification would change.
    pub margin: f64,
}

/// Classify `m` from its trace alone. Parabolic and identity-like
/// elements are separated by whether `m` is within `tol` of `±I`.
pub fn classify(m: &Mat2C, tol: f64) -> IsometryClass {
    let t = m.trace();
    let to_plus = (t - 2.0).norm();
    let to_minus = (t + 2.0).norm();
    let near_end = to_plus.min(to_minus);
    if near_end <= tol {
        let sign = if to_plus <= to_minus { ONE } else { -ONE };
        let kind = if m.distance(&Mat2C::IDENTITY.scale(sign)) <= tol {
            IsometryKind::IdentityLike
        } else {
            IsometryKind::Parabolic
        };
        return IsometryClass {
            kind,
            tol,
            margin: tol - near_end,
        };
    }
    if t.im.abs() <= tol && t.re.abs() < 2.0 {
        return IsometryClass {
            kind: IsometryKind::Elliptic,
            tol,
            margin: (2.0 - t.re.abs()).min(tol - t.im.abs()),
        };
    }
    // distance from the trace to the segment [-2, 2]
    let clamped = t.re.clamp(-2.0, 2.0);
    let margin = Complex64::new(t.re - clamped, t.im).norm();
    IsometryClass {
        kind: IsometryKind::Loxodromic,
        tol,
        margin,
    }
}

/// Hyperbolic translation length `2 arccosh(|t| / 2)` of an element with
/// real trace of modulus greater than two.
pub fn translation_length_from_trace(t: Complex64) -> Result<f64> {
    let tol = REAL_TRACE_TOL * t.norm().max(1.0);
    if t.im.abs() > tol || t.re.abs() <= 2.0 {
        return Err(Error::NotHyperbolic { trace: t });
    }
    Ok(2.0 * (t.re.abs() / 2.0).acosh())
}

pub fn translation_length(m: &Mat2C) -> Result<f64> {
    translation_length_from_trace(m.trace())
}
