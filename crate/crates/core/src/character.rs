//! Trace coordinates on the SL2(C) character variety.
//!
//! For `n` generators the coordinates are the traces of the `2^n - 1`
//! products `x_{i1} x_{i2} ... x_{ik}` with strictly increasing indices.
//! For the free group of rank two (the punctured torus) these are the
//! traces `(x, y, z)` of `A`, `B` and `AB`.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::moebius::Mat2C;

/// Largest generator count accepted by [`word_list`].
pub const MAX_GENERATORS: usize = 16;

/// Default tolerance for realness and relativeness checks.
pub const REAL_POINT_TOL: f64 = 1e-6;

/// Ordered list of increasing-index words in `n` generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WordList {
    n: usize,
    words: Vec<Vec<usize>>,
}

impl WordList {
    pub fn generators(&self) -> usize {
        self.n
    }

    /// Words as zero-based generator indices.
    pub fn words(&self) -> &[Vec<usize>] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Human-readable word, e.g. `x1x3`.
    pub fn label(&self, j: usize) -> String {
        self.words[j].iter().map(|i| format!("x{}", i + 1)).collect()
    }
}

/// All `2^n - 1` nonempty increasing words, ordered by length and then
/// lexicographically (so for `n = 2` the order is `x1, x2, x1x2`).
pub fn word_list(n: usize) -> Result<WordList> {
    if n == 0 || n > MAX_GENERATORS {
        return Err(Error::TooManyGenerators {
            got: n,
            max: MAX_GENERATORS,
        });
    }
    let mut words: Vec<Vec<usize>> = (1u32..(1u32 << n))
        .map(|mask| (0..n).filter(|i| mask & (1 << i) != 0).collect())
        .collect();
    words.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(WordList { n, words })
}

/// Traces of the words of `wl` under the representation sending the
/// `i`-th generator to `mats[i]`.
pub fn evaluate_character(mats: &[Mat2C], wl: &WordList) -> Result<Vec<Complex64>> {
    if mats.len() != wl.n {
        return Err(Error::DimensionMismatch {
            expected: wl.n,
            got: mats.len(),
        });
    }
    Ok(wl
        .words
        .iter()
        .map(|w| {
            w.iter()
                .fold(Mat2C::IDENTITY, |acc, &i| acc * mats[i])
                .trace()
        })
        .collect())
}

/// Traces `(x, y, z)` of `(A, B, AB)` for a rank-two representation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CharacterTriple {
    pub x: Complex64,
    pub y: Complex64,
    pub z: Complex64,
}

impl CharacterTriple {
    pub fn new(x: Complex64, y: Complex64, z: Complex64) -> Self {
        CharacterTriple { x, y, z }
    }

    pub fn real(x: f64, y: f64, z: f64) -> Self {
        CharacterTriple::new(x.into(), y.into(), z.into())
    }

    pub fn from_matrices(a: &Mat2C, b: &Mat2C) -> Self {
        CharacterTriple::new(a.trace(), b.trace(), (*a * *b).trace())
    }

    pub fn as_array(&self) -> [Complex64; 3] {
        [self.x, self.y, self.z]
    }

    /// Fricke polynomial `x² + y² + z² − xyz − 2`, the trace of the
    /// commutator `ABA⁻¹B⁻¹`.
    pub fn kappa(&self) -> Complex64 {
        commutator_trace(self)
    }

    /// `|x² + y² + z² − xyz|`, zero exactly on relative characters.
    pub fn markov_residual(&self) -> f64 {
        (self.kappa() + 2.0).norm()
    }

    /// Markov residual divided by the size of the terms that cancel in it,
    /// which is the meaningful quantity when the traces are large.
    pub fn relative_markov_residual(&self) -> f64 {
        let scale = self.x.norm_sqr()
            + self.y.norm_sqr()
            + self.z.norm_sqr()
            + (self.x * self.y * self.z).norm();
        self.markov_residual() / scale.max(1.0)
    }

    pub fn max_imag(&self) -> f64 {
        self.x.im.abs().max(self.y.im.abs()).max(self.z.im.abs())
    }

    pub fn max_norm(&self) -> f64 {
        self.x.norm().max(self.y.norm()).max(self.z.norm())
    }

    /// Largest imaginary part relative to the size of the trace.
    pub fn relative_imag(&self) -> f64 {
        self.as_array()
            .iter()
            .map(|t| t.im.abs() / t.norm().max(1.0))
            .fold(0.0, f64::max)
    }

    pub fn distance(&self, other: &CharacterTriple) -> f64 {
        (self.x - other.x)
            .norm()
            .max((self.y - other.y).norm())
            .max((self.z - other.z).norm())
    }

    /// The sign change `(A, B) -> (εA, δB)` of the SL2 lift that makes
    /// `Re x` and `Re y` nonnegative. Sends `(x, y, z)` to
    /// `(εx, δy, εδz)` and leaves `kappa` unchanged.
    pub fn positive_lift(&self) -> CharacterTriple {
        let e = if self.x.re < 0.0 { -1.0 } else { 1.0 };
        let d = if self.y.re < 0.0 { -1.0 } else { 1.0 };
        CharacterTriple::new(self.x * e, self.y * d, self.z * (e * d))
    }

    pub fn permuted(&self, perm: [usize; 3]) -> CharacterTriple {
        let a = self.as_array();
        CharacterTriple::new(a[perm[0]], a[perm[1]], a[perm[2]])
    }
}

impl fmt::Display for CharacterTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

pub fn commutator_trace(t: &CharacterTriple) -> Complex64 {
    t.x * t.x + t.y * t.y + t.z * t.z - t.x * t.y * t.z - 2.0
}

/// `tr(AB⁻¹) = xy − z`.
pub fn fourth_trace(t: &CharacterTriple) -> Complex64 {
    t.x * t.y - t.z
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RealPointKind {
    /// Real, relative, all traces greater than two: the Teichmüller
    /// component.
    FuchsianTeich,
    /// Real and relative but outside the Teichmüller component.
    Sl2RNonTeich,
    /// Real, relative, all traces in `[-2, 2]`.
    Su2,
    NotReal,
    NotRelative,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RealPointClass {
    pub kind: RealPointKind,
    /// Largest imaginary part of the three traces.
    pub imag_residual: f64,
    /// `|kappa + 2|`.
    pub markov_residual: f64,
}

/// Classify a character by realness, relativeness and the component of
/// the real points it lies on.
///
/// The tolerance is applied to the imaginary parts and to `|kappa + 2|`
/// after scaling both by the size of the traces, so large characters
/// are judged by their relative rounding error.
pub fn classify_real_point(t: &CharacterTriple, tol: f64) -> RealPointClass {
    let imag_residual = t.max_imag();
    let markov_residual = t.markov_residual();
    let kind = if t.relative_imag() > tol {
        RealPointKind::NotReal
    } else if t.relative_markov_residual() > tol {
        RealPointKind::NotRelative
    } else {
        let re = [t.x.re, t.y.re, t.z.re];
        if re.iter().all(|&v| v > 2.0) {
            RealPointKind::FuchsianTeich
        } else if re.iter().all(|&v| v.abs() <= 2.0) {
            RealPointKind::Su2
        } else {
            RealPointKind::Sl2RNonTeich
        }
    };
    RealPointClass {
        kind,
        imag_residual,
        markov_residual,
    }
}

/// A pair `(A, B)` realizing the triple: `A = [[x, -1], [1, 0]]`,
/// `B = [[0, s], [-1/s, y]]` with `s + 1/s = z`. Fails only for `z = ±2`
/// where the construction degenerates to `s = ±1` (still valid) or when
/// the root is zero.
pub fn realize(t: &CharacterTriple) -> (Mat2C, Mat2C) {
    let disc = (t.z * t.z - 4.0).sqrt();
    let s = (t.z + disc) / 2.0;
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let a = Mat2C::new(t.x, -one, one, zero);
    let b = Mat2C::new(zero, s, -s.inv(), t.y);
    (a, b)
}
