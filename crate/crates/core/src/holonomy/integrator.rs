//! Adaptive DOP853 integration of the transfer matrix of
//! `u'' + (1/2) q(z) u = 0` along a straight segment in the plane.
//!
//! The state is the fundamental matrix `[[u1, u2], [u1', u2']]` with
//! `Y(0) = I`; the segment `z(t) = a + t (b − a)`, `t ∈ [0, 1]`, is the
//! integration variable. The equation has no first-derivative term, so the
//! transfer matrix has determinant one.

use num_complex::Complex64;

use super::tableau::{A, B, C, E3, E5, STAGES};
use crate::error::{Error, Result};
use crate::moebius::Mat2C;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;
const ERROR_EXPONENT: f64 = -1.0 / 8.0;
const MIN_STEP: f64 = 1e-12;

type State = [Complex64; 4];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorOptions {
    /// Local relative tolerance, measured against the largest entry of the
    /// fundamental matrix.
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions {
            rtol: 1e-14,
            atol: 1e-17,
            max_steps: 100_000,
        }
    }
}

impl IntegratorOptions {
    pub fn tightened(&self, factor: f64) -> Self {
        IntegratorOptions {
            rtol: self.rtol / factor,
            atol: self.atol / factor,
            ..*self
        }
    }
}

/// Result of integrating along one segment.
#[derive(Clone, Debug, PartialEq)]
pub struct SegmentTransfer {
    pub matrix: Mat2C,
    /// Accepted step boundaries in the segment parameter, starting at 0 and
    /// ending at 1.
    pub mesh: Vec<f64>,
    /// Sum of the embedded local error estimates, relative to the size of
    /// the fundamental matrix.
    pub error: f64,
    pub rejected: usize,
}

fn max_abs(y: &State) -> f64 {
    y.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

fn mat_of(y: &State) -> Mat2C {
    Mat2C::new(y[0], y[1], y[2], y[3])
}

/// `dY/dt = dz · [[Y10, Y11], [−q/2 · Y00, −q/2 · Y01]]`.
#[inline]
fn rhs(half_q: Complex64, dz: Complex64, y: &State) -> State {
    [
        dz * y[2],
        dz * y[3],
        -dz * half_q * y[0],
        -dz * half_q * y[1],
    ]
}

struct Stepper<'a, Q> {
    half_q: &'a Q,
    a: Complex64,
    dz: Complex64,
}

impl<Q> Stepper<'_, Q>
where
    Q: Fn(Complex64) -> Result<Complex64>,
{
    fn eval(&self, t: f64, y: &State) -> Result<State> {
        let z = self.a + self.dz * t;
        Ok(rhs((self.half_q)(z)?, self.dz, y))
    }

    fn step(&self, t: f64, y: &State, f0: &State, h: f64) -> Result<(State, [State; STAGES])> {
        dop853_step(&|t, y: &State| self.eval(t, y), t, y, f0, h)
    }
}

/// One DOP853 step of `y' = f(t, y)` from `(t, y)` with derivative `f0`.
/// Returns the increment of the state and the stage values for error
/// estimation.
fn dop853_step<const N: usize, F>(
    f: &F,
    t: f64,
    y: &[Complex64; N],
    f0: &[Complex64; N],
    h: f64,
) -> Result<([Complex64; N], [[Complex64; N]; STAGES])>
where
    F: Fn(f64, &[Complex64; N]) -> Result<[Complex64; N]>,
{
    let zero = Complex64::new(0.0, 0.0);
    let mut k = [[zero; N]; STAGES];
    k[0] = *f0;
    for s in 1..STAGES {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            let aij = A[s][j];
            if aij != 0.0 {
                for i in 0..N {
                    ys[i] += kj[i] * (h * aij);
                }
            }
        }
        k[s] = f(t + C[s] * h, &ys)?;
    }
    let mut delta = [zero; N];
    for (j, kj) in k.iter().enumerate() {
        if B[j] != 0.0 {
            for i in 0..N {
                delta[i] += kj[i] * (h * B[j]);
            }
        }
    }
    Ok((delta, k))
}

/// State with a running compensation term, so that rounding in the
/// per-step updates does not pile up over thousands of steps.
struct Compensated<const N: usize> {
    y: [Complex64; N],
    carry: [Complex64; N],
}

impl<const N: usize> Compensated<N> {
    fn new(y: [Complex64; N]) -> Self {
        Compensated {
            y,
            carry: [Complex64::new(0.0, 0.0); N],
        }
    }

    fn peek(&self, delta: &[Complex64; N]) -> [Complex64; N] {
        let mut out = self.y;
        for i in 0..N {
            out[i] += delta[i];
        }
        out
    }

    fn add(&mut self, delta: &[Complex64; N]) {
        for i in 0..N {
            let (re, ce) = two_sum(self.y[i].re, delta[i].re + self.carry[i].re);
            let (im, ci) = two_sum(self.y[i].im, delta[i].im + self.carry[i].im);
            self.y[i] = Complex64::new(re, im);
            self.carry[i] = Complex64::new(ce, ci);
        }
    }
}

const IDENTITY_STATE: State = [
    Complex64::new(1.0, 0.0),
    Complex64::new(0.0, 0.0),
    Complex64::new(0.0, 0.0),
    Complex64::new(1.0, 0.0),
];

/// `a + b` and its rounding error.
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// Scaled error norm in the style of Hairer's DOP853.
fn error_norm(k: &[State; STAGES], h: f64, scale: f64) -> f64 {
    let zero = Complex64::new(0.0, 0.0);
    let mut e5 = [zero; 4];
    let mut e3 = [zero; 4];
    for (j, kj) in k.iter().enumerate() {
        for i in 0..4 {
            e5[i] += kj[i] * E5[j];
            e3[i] += kj[i] * E3[j];
        }
    }
    let n5: f64 = e5.iter().map(|v| v.norm_sqr()).sum::<f64>() / (scale * scale);
    let n3: f64 = e3.iter().map(|v| v.norm_sqr()).sum::<f64>() / (scale * scale);
    if n5 == 0.0 && n3 == 0.0 {
        return 0.0;
    }
    h.abs() * n5 / ((n5 + 0.01 * n3) * 4.0).sqrt()
}

/// Adaptive integration from `a` to `b`. `half_q(z)` must return `q(z)/2`.
pub fn integrate_adaptive<Q>(
    half_q: &Q,
    a: Complex64,
    b: Complex64,
    opts: &IntegratorOptions,
) -> Result<SegmentTransfer>
where
    Q: Fn(Complex64) -> Result<Complex64>,
{
    let dz = b - a;
    let stepper = Stepper { half_q, a, dz };
    let mut state = Compensated::new(IDENTITY_STATE);
    let mut t = 0.0;
    let mut f = stepper.eval(0.0, &state.y)?;
    // a quarter of a local oscillation period
    let freq = dz.norm() * (half_q(a)?.norm().sqrt() + 1.0);
    let mut h = (0.25 / freq).min(1.0);
    let mut mesh = vec![0.0];
    let mut error = 0.0;
    let mut rejected = 0;

    for _ in 0..opts.max_steps {
        if t >= 1.0 {
            break;
        }
        h = h.min(1.0 - t);
        if h < MIN_STEP {
            return Err(Error::StepUnderflow { t, from: a, to: b });
        }
        let (delta, k) = stepper.step(t, &state.y, &f, h)?;
        let scale = opts.atol + opts.rtol * max_abs(&state.y).max(max_abs(&state.peek(&delta)));
        let err = error_norm(&k, h, scale);
        if err <= 1.0 {
            let factor = if err == 0.0 {
                MAX_FACTOR
            } else {
                (SAFETY * err.powf(ERROR_EXPONENT)).min(MAX_FACTOR)
            };
            t = if 1.0 - (t + h) < 1e-14 { 1.0 } else { t + h };
            state.add(&delta);
            f = stepper.eval(t, &state.y)?;
            mesh.push(t);
            error += err * opts.rtol;
            h *= factor;
        } else {
            rejected += 1;
            h *= (SAFETY * err.powf(ERROR_EXPONENT)).max(MIN_FACTOR);
        }
    }
    if t < 1.0 {
        return Err(Error::StepUnderflow { t, from: a, to: b });
    }
    Ok(SegmentTransfer {
        matrix: mat_of(&state.y),
        mesh,
        error,
        rejected,
    })
}

/// Integration on a prescribed mesh of step boundaries. The result is a
/// polynomial in the values of `q`, so for a fixed mesh it depends
/// holomorphically on any holomorphic parameter of `q`.
pub fn integrate_on_mesh<Q>(half_q: &Q, a: Complex64, b: Complex64, mesh: &[f64]) -> Result<Mat2C>
where
    Q: Fn(Complex64) -> Result<Complex64>,
{
    let dz = b - a;
    let stepper = Stepper { half_q, a, dz };
    let mut state = Compensated::new(IDENTITY_STATE);
    for w in mesh.windows(2) {
        let f = stepper.eval(w[0], &state.y)?;
        let (delta, _) = stepper.step(w[0], &state.y, &f, w[1] - w[0])?;
        state.add(&delta);
    }
    Ok(mat_of(&state.y))
}

/// Transfer matrices at two parameters on a shared mesh: `half_q` belongs
/// to the second, and the first has `half_q + delta`. Returns `Y₂` and
/// `Y₁ − Y₂`. The difference is integrated as a state of its own,
/// `D′ = A₁ D + (A₁ − A₂) Y₂`, so it carries rounding relative to its own
/// size rather than to the size of `Y`. Runge–Kutta steps commute with
/// this change of variables, so `D` is the difference of the two
/// discrete solutions.
pub fn integrate_difference_on_mesh<Q>(
    half_q: &Q,
    delta: Complex64,
    a: Complex64,
    b: Complex64,
    mesh: &[f64],
) -> Result<(Mat2C, Mat2C)>
where
    Q: Fn(Complex64) -> Result<Complex64>,
{
    let dz = b - a;
    let f = |t: f64, s: &[Complex64; 8]| -> Result<[Complex64; 8]> {
        let hq = half_q(a + dz * t)?;
        let y = [s[0], s[1], s[2], s[3]];
        let d = [s[4], s[5], s[6], s[7]];
        let fy = rhs(hq, dz, &y);
        let fd = rhs(hq + delta, dz, &d);
        Ok([
            fy[0],
            fy[1],
            fy[2],
            fy[3],
            fd[0],
            fd[1],
            fd[2] - dz * delta * y[0],
            fd[3] - dz * delta * y[1],
        ])
    };
    let zero = Complex64::new(0.0, 0.0);
    let mut init = [zero; 8];
    init[..4].copy_from_slice(&IDENTITY_STATE);
    let mut state = Compensated::new(init);
    for w in mesh.windows(2) {
        let f0 = f(w[0], &state.y)?;
        let (delta, _) = dop853_step(&f, w[0], &state.y, &f0, w[1] - w[0])?;
        state.add(&delta);
    }
    let s = state.y;
    Ok((Mat2C::new(s[0], s[1], s[2], s[3]), Mat2C::new(s[4], s[5], s[6], s[7])))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn free_equation_gives_shear() {
        let dz = c(0.3, 0.8);
        let t = integrate_adaptive(&|_| Ok(c(0.0, 0.0)), c(0.1, 0.2), c(0.1, 0.2) + dz, &Default::default())
            .unwrap();
        let expect = Mat2C::new(c(1.0, 0.0), dz, c(0.0, 0.0), c(1.0, 0.0));
        assert!(t.matrix.distance(&expect) < 1e-14);
    }

    #[test]
    fn harmonic_oscillator_trace() {
        // q = 2k² gives u'' + k² u = 0
        for (k, dz) in [(c(1.5, 0.0), c(1.0, 0.0)), (c(3.0, 1.0), c(0.4, -0.7)), (c(0.0, 4.0), c(0.0, 1.0))] {
            let half_q = k * k;
            let t = integrate_adaptive(&|_| Ok(half_q), c(0.0, 0.0), dz, &Default::default()).unwrap();
            let expect = 2.0 * (k * dz).cos();
            let tr = t.matrix.trace();
            assert!((tr - expect).norm() <= 1e-10 * expect.norm().max(1.0), "{tr} vs {expect}");
            assert!((t.matrix.det() - 1.0).norm() < 1e-10);
        }
    }

    #[test]
    fn reversal_inverts() {
        let hq = |z: Complex64| Ok(c(1.0, 0.5) * z * z + 3.0);
        let a = c(0.2, 0.1);
        let b = c(1.1, -0.6);
        let fwd = integrate_adaptive(&hq, a, b, &Default::default()).unwrap();
        let back = integrate_adaptive(&hq, b, a, &Default::default()).unwrap();
        assert!((back.matrix * fwd.matrix).distance(&Mat2C::IDENTITY) < 1e-10);
    }

    #[test]
    fn mesh_replay_reproduces_adaptive_result() {
        let hq = |z: Complex64| Ok(c(2.0, -1.0) * z.exp() + 7.0);
        let a = c(0.0, 0.0);
        let b = c(1.0, 0.5);
        let t = integrate_adaptive(&hq, a, b, &Default::default()).unwrap();
        let m = integrate_on_mesh(&hq, a, b, &t.mesh).unwrap();
        assert!(m.distance(&t.matrix) < 1e-14 * t.matrix.max_abs());
        assert_eq!(*t.mesh.last().unwrap(), 1.0);
    }

    #[test]
    fn difference_matches_separate_solutions() {
        let (a, b) = (c(0.0, 0.0), c(1.0, 0.5));
        let c2 = c(3.0, -1.0);
        let delta = c(0.02, 0.01);
        let hq2 = move |z: Complex64| Ok(z * z + c2);
        let hq1 = move |z: Complex64| Ok(z * z + c2 + delta);
        let mesh = integrate_adaptive(&hq2, a, b, &Default::default()).unwrap().mesh;
        let y1 = integrate_on_mesh(&hq1, a, b, &mesh).unwrap();
        let y2 = integrate_on_mesh(&hq2, a, b, &mesh).unwrap();
        let (m, d) = integrate_difference_on_mesh(&hq2, delta, a, b, &mesh).unwrap();
        assert!(m.distance(&y2) < 1e-15 * y2.max_abs());
        let naive = y1 + y2.scale(c(-1.0, 0.0));
        assert!(d.distance(&naive) < 1e-13 * y1.max_abs(), "{d} vs {naive}");
        let (_, zero) = integrate_difference_on_mesh(&hq2, c(0.0, 0.0), a, b, &mesh).unwrap();
        assert_eq!(zero, Mat2C::ZERO);
    }
}
