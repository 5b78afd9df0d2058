//! Weierstrass ℘ on a lattice `ω(Z + τZ)` and the one-parameter family of
//! quadratic differentials `q_c = θ℘ + c` on the punctured torus.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Minimum number of Eisenstein rows summed explicitly.
pub const MIN_CUTOFF: usize = 20;

/// Default clearance from lattice points, in lattice units.
pub const POLE_CLEARANCE: f64 = 1e-3;

/// Largest reduced `Im τ` for which the Laurent expansion at the nearest
/// lattice point converges fast enough.
const MAX_REDUCED_IM_TAU: f64 = 1.5;

const MAX_LAURENT_TERMS: usize = 160;

/// The lattice `scale · (Z + τ Z)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatticeSpec {
    pub tau: Complex64,
    pub scale: Complex64,
    /// Number of Eisenstein rows summed before the tail bound takes over.
    pub cutoff: usize,
}

impl LatticeSpec {
    /// The square lattice `Z + iZ`.
    pub fn square() -> Self {
        LatticeSpec {
            tau: Complex64::new(0.0, 1.0),
            scale: Complex64::new(1.0, 0.0),
            cutoff: MIN_CUTOFF,
        }
    }

    pub fn new(tau: Complex64) -> Result<Self> {
        let spec = LatticeSpec {
            tau,
            ..LatticeSpec::square()
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn scaled(mut self, scale: Complex64) -> Self {
        self.scale = scale;
        self
    }

    pub fn with_cutoff(mut self, cutoff: usize) -> Self {
        self.cutoff = cutoff;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau.im > 0.0) || !self.tau.re.is_finite() {
            return Err(Error::InvalidModulus {
                tau: self.tau,
                reason: "Im(tau) must be positive",
            });
        }
        if self.scale.norm() == 0.0 || !self.scale.re.is_finite() || !self.scale.im.is_finite() {
            return Err(Error::InvalidModulus {
                tau: self.tau,
                reason: "lattice scale must be nonzero and finite",
            });
        }
        if self.cutoff < MIN_CUTOFF {
            return Err(Error::CutoffTooSmall {
                got: self.cutoff,
                min: MIN_CUTOFF,
            });
        }
        Ok(())
    }

    /// The lattice point `scale · (m + nτ)`.
    pub fn point(&self, m: i64, n: i64) -> Complex64 {
        self.scale * (Complex64::new(m as f64, 0.0) + self.tau * n as f64)
    }

    /// Nearest lattice point to `z` and the distance to it.
    pub fn nearest_point(&self, z: Complex64) -> (Complex64, f64) {
        let (tau, unit) = reduce_modulus(self.tau);
        nearest_in_basis(z, self.scale * unit, tau)
    }
}

fn nearest_in_basis(z: Complex64, scale: Complex64, tau: Complex64) -> (Complex64, f64) {
    let w = z / scale;
    let t = w.im / tau.im;
    let s = w.re - t * tau.re;
    let (m0, n0) = (s.round(), t.round());
    let mut best = (Complex64::new(0.0, 0.0), f64::INFINITY);
    for dn in -1..=1 {
        for dm in -1..=1 {
            let p = scale * (Complex64::new(m0 + dm as f64, 0.0) + tau * (n0 + dn as f64));
            let d = (z - p).norm();
            if d < best.1 {
                best = (p, d);
            }
        }
    }
    best
}

/// Weierstrass invariants `g2 = 60 Σ' ω⁻⁴`, `g3 = 140 Σ' ω⁻⁶`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Invariants {
    pub g2: Complex64,
    pub g3: Complex64,
    /// Bound on the contribution of the rows beyond the cutoff to either
    /// invariant.
    pub tail_bound: f64,
}

/// `Σ_{m∈Z} (w + m)^{-k}` for `Im w > 0` via the Lipschitz formula
/// `((−2πi)^k / (k−1)!) Σ_{r≥1} r^{k−1} e^{2πirw}`.
fn row_sum(w: Complex64, k: u32) -> Complex64 {
    let q = (Complex64::new(0.0, 2.0 * PI) * w).exp();
    let mut fact = 1.0;
    for j in 1..k {
        fact *= j as f64;
    }
    let pref = Complex64::new(0.0, -2.0 * PI).powu(k) / fact;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut qr = q;
    for r in 1..10_000u32 {
        let term = qr * (r as f64).powi(k as i32 - 1);
        sum += term;
        if term.norm() <= 1e-20 * sum.norm() {
            break;
        }
        qr *= q;
    }
    pref * sum
}

/// Row-by-row Eisenstein summation: each row `{m + nτ : m ∈ Z}` is summed
/// in closed form, rows `|n| ≤ cutoff` are added explicitly and the rest is
/// covered by `tail_bound`.
pub fn eisenstein_invariants(lat: &LatticeSpec) -> Result<Invariants> {
    lat.validate()?;
    let tau = lat.tau;
    let zeta4 = PI.powi(4) / 90.0;
    let zeta6 = PI.powi(6) / 945.0;
    let mut g4 = Complex64::new(2.0 * zeta4, 0.0);
    let mut g6 = Complex64::new(2.0 * zeta6, 0.0);
    // rows n and -n agree because the exponents are even
    for n in 1..=lat.cutoff {
        g4 += 2.0 * row_sum(tau * n as f64, 4);
        g6 += 2.0 * row_sum(tau * n as f64, 6);
    }
    let qa = (-2.0 * PI * tau.im).exp();
    let tail = |k: i32| {
        2.0 * (2.0 * PI).powi(k) * qa.powi(lat.cutoff as i32 + 1) / (1.0 - qa).powi(k + 1)
    };
    let s = lat.scale;
    Ok(Invariants {
        g2: 60.0 * g4 / s.powu(4),
        g3: 140.0 * g6 / s.powu(6),
        tail_bound: (60.0 * tail(4) / s.norm().powi(4)).max(140.0 * tail(6) / s.norm().powi(6)),
    })
}

/// Reduce `τ` into the standard fundamental domain `|Re τ| ≤ 1/2`,
/// `|τ| ≥ 1`. The lattice `Z + τZ` is unchanged up to the unit factor
/// returned alongside (the new basis is `u · (1, τ')`).
fn reduce_modulus(mut tau: Complex64) -> (Complex64, Complex64) {
    let mut unit = Complex64::new(1.0, 0.0);
    for _ in 0..200 {
        tau.re -= tau.re.round();
        if tau.norm_sqr() < 1.0 - 1e-15 {
            // (1, τ) -> (τ, -1) = τ (1, -1/τ)
            unit *= tau;
            tau = -tau.inv();
        } else {
            break;
        }
    }
    (tau, unit)
}

/// Evaluator for ℘ and ℘′ on a fixed lattice.
#[derive(Clone, Debug)]
pub struct Weierstrass {
    lattice: LatticeSpec,
    invariants: Invariants,
    /// Lattice used for evaluation: `eval_scale · (Z + eval_tau Z)` with
    /// `eval_tau` reduced.
    eval_tau: Complex64,
    eval_scale: Complex64,
    /// `c_k` for `k = 2..`, stored from index 0, for the unit lattice
    /// `Z + eval_tau Z`.
    coeffs: Vec<Complex64>,
    clearance: f64,
}

impl Weierstrass {
    pub fn new(lattice: LatticeSpec) -> Result<Self> {
        let invariants = eisenstein_invariants(&lattice)?;
        let (eval_tau, unit) = reduce_modulus(lattice.tau);
        if eval_tau.im > MAX_REDUCED_IM_TAU {
            return Err(Error::InvalidModulus {
                tau: lattice.tau,
                reason: "lattice too elongated for the Laurent evaluator",
            });
        }
        let eval_scale = lattice.scale * unit;
        // invariants of the unit lattice Z + eval_tau Z
        let g2 = invariants.g2 * eval_scale.powu(4);
        let g3 = invariants.g3 * eval_scale.powu(6);
        let mut coeffs = vec![Complex64::new(0.0, 0.0); MAX_LAURENT_TERMS];
        coeffs[0] = g2 / 20.0;
        coeffs[1] = g3 / 28.0;
        for k in 4..MAX_LAURENT_TERMS + 2 {
            let mut s = Complex64::new(0.0, 0.0);
            for m in 2..=k - 2 {
                s += coeffs[m - 2] * coeffs[k - m - 2];
            }
            coeffs[k - 2] = s * (3.0 / ((2 * k + 1) as f64 * (k - 3) as f64));
        }
        Ok(Weierstrass {
            lattice,
            invariants,
            eval_tau,
            eval_scale,
            coeffs,
            clearance: POLE_CLEARANCE,
        })
    }

    pub fn square() -> Self {
        Weierstrass::new(LatticeSpec::square()).expect("square lattice is valid")
    }

    pub fn with_clearance(mut self, clearance: f64) -> Self {
        self.clearance = clearance;
        self
    }

    pub fn lattice(&self) -> &LatticeSpec {
        &self.lattice
    }

    pub fn invariants(&self) -> &Invariants {
        &self.invariants
    }

    pub fn clearance(&self) -> f64 {
        self.clearance
    }

    /// Offset of `z` from the nearest lattice point, in units of the
    /// reduced unit lattice.
    fn reduce(&self, z: Complex64) -> Result<Complex64> {
        let (p, d) = nearest_in_basis(z, self.eval_scale, self.eval_tau);
        if d < self.clearance * self.lattice.scale.norm() {
            return Err(Error::TooCloseToPole { z, distance: d });
        }
        Ok((z - p) / self.eval_scale)
    }

    fn terms_for(u2: f64) -> usize {
        if u2 <= 1e-30 {
            return 2;
        }
        let k = (45.0 / -u2.ln()).ceil() as usize + 4;
        k.clamp(4, MAX_LAURENT_TERMS)
    }

    /// ℘ and ℘′ at `z`.
    pub fn wp_both(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        let u = self.reduce(z)?;
        let u2 = u * u;
        let n = Self::terms_for(u2.norm());
        // Σ_{k=2}^{n+1} c_k u^{2k-2} and its derivative
        let mut s = Complex64::new(0.0, 0.0);
        let mut ds = Complex64::new(0.0, 0.0);
        for j in (0..n).rev() {
            let k = j + 2;
            s = s * u2 + self.coeffs[j];
            ds = ds * u2 + self.coeffs[j] * (2 * k - 2) as f64;
        }
        let inv = u2.inv();
        let wp = inv + s * u2;
        let wpp = -2.0 * inv / u + ds * u;
        let s2 = self.eval_scale * self.eval_scale;
        Ok((wp / s2, wpp / (s2 * self.eval_scale)))
    }

    pub fn wp(&self, z: Complex64) -> Result<Complex64> {
        self.wp_both(z).map(|(w, _)| w)
    }

    pub fn wp_prime(&self, z: Complex64) -> Result<Complex64> {
        self.wp_both(z).map(|(_, d)| d)
    }

    /// Residual of `(℘′)² = 4℘³ − g2 ℘ − g3`, relative to the size of the
    /// terms.
    pub fn ode_residual(&self, z: Complex64) -> Result<f64> {
        let (p, dp) = self.wp_both(z)?;
        let Invariants { g2, g3, .. } = self.invariants;
        let lhs = dp * dp;
        let rhs = 4.0 * p * p * p - g2 * p - g3;
        let scale = lhs.norm().max((4.0 * p * p * p).norm()).max(1.0);
        Ok((lhs - rhs).norm() / scale)
    }
}

/// Which second-order equation the quadratic differential is fed into.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OdeConvention {
    /// `u'' + (1/2) q u = 0`, so the Schwarzian of `u1/u2` is `q`.
    HalfSchwarzian,
}

/// Coefficient of ℘ in `q_c`. Equal indicial exponents at the puncture
/// under [`OdeConvention::HalfSchwarzian`] force `θ = 1/2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BasisDifferential {
    pub theta: f64,
    pub convention: OdeConvention,
}

impl BasisDifferential {
    pub const PARABOLIC_THETA: f64 = 0.5;

    pub fn parabolic() -> Self {
        BasisDifferential {
            theta: Self::PARABOLIC_THETA,
            convention: OdeConvention::HalfSchwarzian,
        }
    }

    pub fn with_theta(theta: f64) -> Self {
        BasisDifferential {
            theta,
            convention: OdeConvention::HalfSchwarzian,
        }
    }

    /// Indicial exponents of `u'' + (θ/2) w⁻² u = 0` at `w = 0`.
    pub fn indicial_exponents(&self) -> (Complex64, Complex64) {
        // r(r - 1) + θ/2 = 0
        let disc = Complex64::new(1.0 - 2.0 * self.theta, 0.0).sqrt();
        ((1.0 + disc) / 2.0, (1.0 - disc) / 2.0)
    }
}

impl Default for BasisDifferential {
    fn default() -> Self {
        BasisDifferential::parabolic()
    }
}

/// A point `c` of the slice, i.e. the differential `θ℘ + c`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlicePoint {
    pub c: Complex64,
}

impl SlicePoint {
    pub fn new(c: Complex64) -> Self {
        SlicePoint { c }
    }
}

impl From<Complex64> for SlicePoint {
    fn from(c: Complex64) -> Self {
        SlicePoint { c }
    }
}

/// The family `c ↦ θ℘ + c` on a fixed lattice.
#[derive(Clone, Debug)]
pub struct QuadraticFamily {
    pub wp: Weierstrass,
    pub basis: BasisDifferential,
}

impl QuadraticFamily {
    pub fn new(wp: Weierstrass, basis: BasisDifferential) -> Self {
        QuadraticFamily { wp, basis }
    }

    /// The square punctured torus with the parabolic normalization.
    pub fn square() -> Self {
        QuadraticFamily::new(Weierstrass::square(), BasisDifferential::parabolic())
    }

    pub fn eval(&self, p: SlicePoint, z: Complex64) -> Result<Complex64> {
        Ok(self.basis.theta * self.wp.wp(z)? + p.c)
    }
}

pub fn quad_diff_eval(family: &QuadraticFamily, p: SlicePoint, z: Complex64) -> Result<Complex64> {
    family.eval(p, z)
}

/// The lemniscate constant `ϖ = π / agm(1, √2)`.
pub fn lemniscate_constant() -> f64 {
    let (mut a, mut b) = (1.0f64, 2f64.sqrt());
    for _ in 0..64 {
        let (an, bn) = ((a + b) / 2.0, (a * b).sqrt());
        if (an - bn).abs() <= f64::EPSILON * an {
            a = an;
            break;
        }
        a = an;
        b = bn;
    }
    PI / a
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Plain truncated lattice sum over `|m|, |n| ≤ n_max`; error is of
    /// order `π / n_max²` relative to the leading shell.
    fn naive_g2_g3(tau: Complex64, n_max: i64) -> (Complex64, Complex64) {
        let mut s4 = c(0.0, 0.0);
        let mut s6 = c(0.0, 0.0);
        for n in -n_max..=n_max {
            for m in -n_max..=n_max {
                if m == 0 && n == 0 {
                    continue;
                }
                let w = c(m as f64, 0.0) + tau * n as f64;
                let w2 = w * w;
                s4 += (w2 * w2).inv();
                s6 += (w2 * w2 * w2).inv();
            }
        }
        (60.0 * s4, 140.0 * s6)
    }

    #[test]
    fn square_invariants() {
        let inv = eisenstein_invariants(&LatticeSpec::square()).unwrap();
        assert!(inv.g3.norm() <= 1e-10);
        let w = lemniscate_constant();
        let oracle = 4.0 * w.powi(4);
        assert!((inv.g2.re - oracle).abs() / oracle < 1e-12);
        assert!(inv.g2.im.abs() < 1e-10);
        assert!((inv.g2.re - 189.0727).abs() < 1e-3);
        assert!(inv.tail_bound < 1e-40);
        // the naive square sum converges like n^-2
        let (g2n, g3n) = naive_g2_g3(c(0.0, 1.0), 200);
        assert!((g2n - inv.g2).norm() < 1e-2, "{g2n} vs {}", inv.g2);
        assert!(g3n.norm() < 1e-8);
    }

    #[test]
    fn hexagonal_and_general_moduli() {
        let rho = c(0.5, 3f64.sqrt() / 2.0);
        let inv = eisenstein_invariants(&LatticeSpec::new(rho).unwrap()).unwrap();
        // the hexagonal lattice has g2 = 0
        assert!(inv.g2.norm() < 1e-9);
        let tau = c(0.23, 1.17);
        let inv = eisenstein_invariants(&LatticeSpec::new(tau).unwrap()).unwrap();
        let (g2n, g3n) = naive_g2_g3(tau, 300);
        assert!((g2n - inv.g2).norm() / inv.g2.norm() < 1e-4);
        assert!((g3n - inv.g3).norm() / inv.g3.norm() < 1e-4);
    }

    #[test]
    fn homogeneity_under_scaling() {
        let base = eisenstein_invariants(&LatticeSpec::square()).unwrap();
        let lambda = c(1.7, -0.4);
        let scaled = eisenstein_invariants(&LatticeSpec::square().scaled(lambda)).unwrap();
        assert!((scaled.g2 - base.g2 / lambda.powu(4)).norm() < 1e-10 * base.g2.norm());
        assert!((scaled.g3 - base.g3 / lambda.powu(6)).norm() < 1e-10);
    }

    #[test]
    fn cutoff_guard() {
        let lat = LatticeSpec::square().with_cutoff(5);
        assert!(matches!(
            eisenstein_invariants(&lat),
            Err(Error::CutoffTooSmall { got: 5, min: 20 })
        ));
        assert!(LatticeSpec::new(c(0.3, -1.0)).is_err());
    }

    #[test]
    fn wp_special_values() {
        let wp = Weierstrass::square();
        assert!(wp.wp(c(0.5, 0.5)).unwrap().norm() < 1e-12);
        let e1 = wp.invariants().g2.re.sqrt() / 2.0;
        let half = wp.wp(c(0.5, 0.0)).unwrap();
        assert!((half.re - e1).abs() / e1 < 1e-12);
        assert!((e1 - 6.87519).abs() < 1e-4);
        // ℘′ vanishes at half periods
        assert!(wp.wp_prime(c(0.5, 0.0)).unwrap().norm() < 1e-9);
        assert!(matches!(
            wp.wp(c(1.0 + 1e-5, 0.0)),
            Err(Error::TooCloseToPole { .. })
        ));
    }

    #[test]
    fn wp_matches_direct_lattice_sum() {
        // ℘(z) = z⁻² + Σ' [(z − ω)⁻² − ω⁻²], summed symmetrically; the
        // truncation error decays like n^-3 for this combination.
        let wp = Weierstrass::square();
        let z = c(0.31, 0.17);
        let mut s = z.powi(-2);
        let n_max = 300i64;
        for n in -n_max..=n_max {
            for m in -n_max..=n_max {
                if m == 0 && n == 0 {
                    continue;
                }
                let w = c(m as f64, n as f64);
                s += (z - w).powi(-2) - w.powi(-2);
            }
        }
        assert!((s - wp.wp(z).unwrap()).norm() < 1e-5);
    }

    #[test]
    fn differential_equation_residual_on_grid() {
        let wp = Weierstrass::square();
        for i in 0..10 {
            for j in 0..10 {
                let z = c(-1.3 + 0.29 * i as f64, 2.1 - 0.37 * j as f64);
                if let Ok(r) = wp.ode_residual(z) {
                    assert!(r < 1e-12, "residual {r} at {z}");
                }
            }
        }
        let hex = Weierstrass::new(LatticeSpec::new(c(0.5, 3f64.sqrt() / 2.0)).unwrap()).unwrap();
        assert!(hex.ode_residual(c(0.21, 0.33)).unwrap() < 1e-12);
    }

    #[test]
    fn quad_diff_examples() {
        let fam = QuadraticFamily::square();
        let z = c(0.5, 0.5);
        assert!(quad_diff_eval(&fam, SlicePoint::new(c(0.0, 0.0)), z).unwrap().norm() < 1e-12);
        let v = quad_diff_eval(&fam, SlicePoint::new(c(5.0, 0.0)), z).unwrap();
        assert!((v - 5.0).norm() < 1e-12);
        let p = SlicePoint::new(c(1.0, -2.0));
        let w = c(0.13, 0.71);
        let base = fam.eval(p, w).unwrap();
        assert!((fam.eval(p, w + 1.0).unwrap() - base).norm() < 1e-10);
        assert!((fam.eval(p, w + c(0.0, 1.0)).unwrap() - base).norm() < 1e-10);
    }

    #[test]
    fn indicial_exponents_coincide_at_parabolic_theta() {
        let (r1, r2) = BasisDifferential::parabolic().indicial_exponents();
        assert!((r1 - r2).norm() < 1e-15);
        assert!((r1 - 0.5).norm() < 1e-15);
        let (r1, r2) = BasisDifferential::with_theta(0.4).indicial_exponents();
        assert!((r1 - r2).norm() > 0.1);
    }
}
