//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use qslice::character::CharacterTriple;
use qslice::discreteness::Slope;
use qslice::moebius::Mat2C;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `π / agm(1, √2)`, iterated to a fixed point.
pub fn lemniscate_oracle() -> f64 {
    let (mut a, mut b) = (1.0f64, 2f64.sqrt());
    while (a - b).abs() > 4.0 * f64::EPSILON {
        (a, b) = ((a + b) / 2.0, (a * b).sqrt());
    }
    std::f64::consts::PI / a
}

/// `g2` of the lattice `Z + iZ`.
pub fn square_g2_oracle() -> f64 {
    4.0 * lemniscate_oracle().powi(4)
}

/// Plain 2×2 product, written out here rather than taken from the crate.
fn mul(m: &Mat2C, n: &Mat2C) -> Mat2C {
    Mat2C::new(
        m.a * n.a + m.b * n.c,
        m.a * n.b + m.b * n.d,
        m.c * n.a + m.d * n.c,
        m.c * n.b + m.d * n.d,
    )
}

fn inv(m: &Mat2C) -> Mat2C {
    Mat2C::new(m.d, -m.b, -m.c, m.a)
}

/// Trace of the Christoffel word of slope `p/q` in `A` and `B`, with `B`
/// replaced by its inverse for negative slopes. `0/1 ↦ A`, `1/0 ↦ B`,
/// `1/1 ↦ AB`.
pub fn christoffel_trace(s: Slope, a: &Mat2C, b: &Mat2C) -> Complex64 {
    let (p, q) = (s.p.unsigned_abs(), s.q.unsigned_abs());
    let b = if s.p < 0 { inv(b) } else { *b };
    let n = p + q;
    let mut m = Mat2C::IDENTITY;
    for k in 1..=n {
        let letter = if k * p / n > (k - 1) * p / n { &b } else { a };
        m = mul(&m, letter);
    }
    m.a + m.d
}

/// `(A, B)` with `tr A = x`, `tr B = y`, `tr AB = z`, built independently
/// of the crate: `A = [[x, 1], [-1, 0]]`, `B = [[0, u], [-1/u, y]]` with
/// `u + 1/u = -z`.
pub fn oracle_pair(t: &CharacterTriple) -> (Mat2C, Mat2C) {
    // tr AB = x·0 + 1·(-1/u) + (-1)·u + 0·y = -(u + 1/u) = z
    let z = t.z;
    let u = (-z + (z * z - 4.0).sqrt()) / 2.0;
    let a = Mat2C::new(t.x, c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0));
    let b = Mat2C::new(c(0.0, 0.0), u, -u.inv(), t.y);
    (a, b)
}

/// A relative triple (`κ = -2`) with the given `x`, `y`: `z` is a root of
/// `z² − xyz + x² + y² = 0`.
pub fn relative_triple(x: Complex64, y: Complex64, larger: bool) -> CharacterTriple {
    let disc = (x * y * x * y - 4.0 * (x * x + y * y)).sqrt();
    let z = if larger { (x * y + disc) / 2.0 } else { (x * y - disc) / 2.0 };
    CharacterTriple::new(x, y, z)
}

pub fn random_relative(rng: &mut ChaCha8Rng) -> CharacterTriple {
    let x = c(rng.gen_range(-3.0..3.0), rng.gen_range(-1.0..1.0));
    let y = c(rng.gen_range(-3.0..3.0), rng.gen_range(-1.0..1.0));
    relative_triple(x, y, rng.gen_bool(0.5))
}

/// Every reduced slope `p/q` with `max(|p|, q) ≤ h`, each once.
pub fn slopes_up_to(h: i64) -> Vec<Slope> {
    let mut out = Vec::new();
    for q in 0..=h {
        for p in -h..=h {
            if gcd(p.unsigned_abs(), q as u64) != 1 || (q == 0 && p != 1) {
                continue;
            }
            out.push(Slope::new(p, q).unwrap());
        }
    }
    out
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Hyperbolic translation length from a real trace.
pub fn length_oracle(t: Complex64) -> f64 {
    2.0 * (t.re.abs() / 2.0).acosh()
}
