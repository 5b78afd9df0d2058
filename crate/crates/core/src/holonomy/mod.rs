//! Holonomy of the projective structures `q_c = θ℘ + c` on the punctured
//! torus, computed as monodromy of `u'' + (1/2) q_c u = 0`.

mod integrator;
mod path;
mod tableau;

use num_complex::Complex64;

pub use integrator::{
    integrate_adaptive, integrate_difference_on_mesh, integrate_on_mesh, IntegratorOptions, SegmentTransfer,
};
pub use path::{route_segment, LoopPath, LoopTag};

use crate::character::CharacterTriple;
use crate::elliptic::{QuadraticFamily, SlicePoint};
use crate::error::Result;
use crate::moebius::Mat2C;

/// Half-width of the square loop used for the puncture monodromy.
const PUNCTURE_RADIUS: f64 = 0.25;

/// Transfer along a whole polyline, with the per-segment meshes kept so
/// the same discretization can be replayed at nearby parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct PathTransfer {
    pub matrix: Mat2C,
    pub meshes: Vec<Vec<f64>>,
    pub error: f64,
}

/// Step meshes for the three loops of a holonomy computation.
#[derive(Clone, Debug, PartialEq)]
pub struct HolonomyMesh {
    pub alpha: Vec<Vec<f64>>,
    pub beta: Vec<Vec<f64>>,
    pub puncture: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HolonomyResult {
    pub c: Complex64,
    pub m_alpha: Mat2C,
    pub m_beta: Mat2C,
    pub character: CharacterTriple,
    /// Trace of the monodromy around the puncture, integrated along a small
    /// loop rather than formed from `m_alpha` and `m_beta`. Absent when the
    /// loop was skipped.
    pub puncture_trace: Option<Complex64>,
    /// Error estimate for the character, in the sup norm of the traces.
    pub error_estimate: f64,
    pub mesh: HolonomyMesh,
}

impl HolonomyResult {
    /// `tr [M_α, M_β]` from the two matrices; loses accuracy when their
    /// entries are large.
    pub fn matrix_commutator_trace(&self) -> Complex64 {
        self.m_alpha.commutator(&self.m_beta).trace()
    }
}

/// Computes `hol(c)` for the family on a fixed lattice and basepoint.
#[derive(Clone, Debug)]
pub struct HolonomySolver {
    family: QuadraticFamily,
    alpha: LoopPath,
    beta: LoopPath,
    puncture: LoopPath,
    options: IntegratorOptions,
    /// Signs `(ε, δ)` applied to `(M_α, M_β)`, fixed once from the
    /// reference computation.
    lift: (f64, f64),
    reference: Complex64,
}

impl HolonomySolver {
    /// Solver for the square torus at the default basepoint `(1 + i)/2`.
    pub fn square() -> Result<Self> {
        Self::new(
            QuadraticFamily::square(),
            Complex64::new(0.5, 0.5),
            IntegratorOptions::default(),
            Complex64::new(0.0, 0.0),
        )
    }

    /// `reference` is the slice point at which the SL2 lift is fixed: signs
    /// are chosen there so that `Re x` and `Re y` are nonnegative, and the
    /// same signs are used everywhere else.
    pub fn new(
        family: QuadraticFamily,
        basepoint: Complex64,
        options: IntegratorOptions,
        reference: Complex64,
    ) -> Result<Self> {
        let lat = *family.wp.lattice();
        let clearance = family.wp.clearance() * lat.scale.norm();
        let alpha = LoopPath::alpha(&lat, basepoint, clearance)?;
        let beta = LoopPath::beta(&lat, basepoint, clearance)?;
        let (center, _) = lat.nearest_point(basepoint);
        let puncture = LoopPath::puncture(center, PUNCTURE_RADIUS * lat.scale.norm());
        Self::with_loops(family, alpha, beta, puncture, options, reference)
    }

    pub fn with_loops(
        family: QuadraticFamily,
        alpha: LoopPath,
        beta: LoopPath,
        puncture: LoopPath,
        options: IntegratorOptions,
        reference: Complex64,
    ) -> Result<Self> {
        let mut solver = HolonomySolver {
            family,
            alpha,
            beta,
            puncture,
            options,
            lift: (1.0, 1.0),
            reference,
        };
        let at_ref = solver.compute(reference, &options, None, false)?;
        let sign = |v: f64| if v < 0.0 { -1.0 } else { 1.0 };
        solver.lift = (sign(at_ref.character.x.re), sign(at_ref.character.y.re));
        Ok(solver)
    }

    pub fn family(&self) -> &QuadraticFamily {
        &self.family
    }

    pub fn options(&self) -> &IntegratorOptions {
        &self.options
    }

    pub fn lift(&self) -> (f64, f64) {
        self.lift
    }

    pub fn reference(&self) -> Complex64 {
        self.reference
    }

    pub fn loops(&self) -> (&LoopPath, &LoopPath, &LoopPath) {
        (&self.alpha, &self.beta, &self.puncture)
    }

    fn half_q(&self, c: Complex64) -> impl Fn(Complex64) -> Result<Complex64> + '_ {
        let theta = self.family.basis.theta;
        move |z| Ok(0.5 * (theta * self.family.wp.wp(z)? + c))
    }

    /// Transfer matrix along `path` at the slice point `p`, adaptively.
    pub fn integrate_transfer(&self, p: SlicePoint, path: &LoopPath) -> Result<PathTransfer> {
        self.transfer(p.c, path, &self.options, None)
    }

    fn transfer(
        &self,
        c: Complex64,
        path: &LoopPath,
        opts: &IntegratorOptions,
        meshes: Option<&[Vec<f64>]>,
    ) -> Result<PathTransfer> {
        let hq = self.half_q(c);
        let mut matrix = Mat2C::IDENTITY;
        let mut out_meshes = Vec::new();
        let mut error = 0.0;
        for (i, (a, b)) in path.segments().enumerate() {
            let seg = match meshes {
                Some(m) => integrate_on_mesh(&hq, a, b, &m[i])?,
                None => {
                    let t = integrate_adaptive(&hq, a, b, opts)?;
                    error += t.error;
                    out_meshes.push(t.mesh);
                    t.matrix
                }
            };
            matrix = seg * matrix;
        }
        if let Some(m) = meshes {
            out_meshes = m.to_vec();
        }
        Ok(PathTransfer {
            matrix,
            meshes: out_meshes,
            error,
        })
    }

    fn compute(
        &self,
        c: Complex64,
        opts: &IntegratorOptions,
        mesh: Option<&HolonomyMesh>,
        puncture: bool,
    ) -> Result<HolonomyResult> {
        let ta = self.transfer(c, &self.alpha, opts, mesh.map(|m| m.alpha.as_slice()))?;
        let tb = self.transfer(c, &self.beta, opts, mesh.map(|m| m.beta.as_slice()))?;
        let tp = match mesh {
            Some(m) if m.puncture.is_empty() => None,
            _ if !puncture => None,
            _ => Some(self.transfer(c, &self.puncture, opts, mesh.map(|m| m.puncture.as_slice()))?),
        };
        let (e, d) = self.lift;
        let m_alpha = ta.matrix.scale(e.into());
        let m_beta = tb.matrix.scale(d.into());
        let character = CharacterTriple::from_matrices(&m_alpha, &m_beta);
        let error_estimate = (ta.error + tb.error) * character.max_norm().max(1.0);
        Ok(HolonomyResult {
            c,
            m_alpha,
            m_beta,
            character,
            puncture_trace: tp.as_ref().map(|t| t.matrix.trace()),
            error_estimate,
            mesh: HolonomyMesh {
                alpha: ta.meshes,
                beta: tb.meshes,
                puncture: tp.map(|t| t.meshes).unwrap_or_default(),
            },
        })
    }

    /// `hol(p)`. The error estimate is the change of the character when
    /// every accepted step is replayed as two half steps.
    pub fn holonomy(&self, p: SlicePoint) -> Result<HolonomyResult> {
        let mut r = self.compute(p.c, &self.options, None, true)?;
        let halved = HolonomyMesh {
            alpha: r.mesh.alpha.iter().map(|m| halve(m)).collect(),
            beta: r.mesh.beta.iter().map(|m| halve(m)).collect(),
            puncture: Vec::new(),
        };
        let fine = self.compute(p.c, &self.options, Some(&halved), false)?;
        r.error_estimate = fine.character.distance(&r.character);
        Ok(r)
    }

    /// `hol(p)` without the puncture loop or step halving, for bulk
    /// evaluation. The error estimate comes from the embedded error
    /// estimates of the integrator.
    pub fn character_only(&self, p: SlicePoint) -> Result<HolonomyResult> {
        self.compute(p.c, &self.options, None, false)
    }

    /// `hol` at `c`, replaying a mesh computed elsewhere. The puncture
    /// loop is replayed only if the mesh has one.
    pub fn holonomy_on_mesh(&self, c: Complex64, mesh: &HolonomyMesh) -> Result<HolonomyResult> {
        self.compute(c, &self.options, Some(mesh), true)
    }

    /// `(x, y, z)(c1) − (x, y, z)(c2)` on a shared mesh, without the
    /// cancellation of subtracting two separately computed characters.
    pub fn character_difference(&self, c1: Complex64, c2: Complex64, mesh: &HolonomyMesh) -> Result<[Complex64; 3]> {
        let (a2, da) = self.transfer_difference(c1, c2, &self.alpha, &mesh.alpha)?;
        let (b2, db) = self.transfer_difference(c1, c2, &self.beta, &mesh.beta)?;
        let (e, d) = self.lift;
        let (a2, da) = (a2.scale(e.into()), da.scale(e.into()));
        let (b2, db) = (b2.scale(d.into()), db.scale(d.into()));
        // A1 B1 − A2 B2 = dA B2 + A2 dB + dA dB
        let dab = da * b2 + a2 * db + da * db;
        Ok([da.trace(), db.trace(), dab.trace()])
    }

    /// Transfer at `c2` along `path` and its difference to the transfer at
    /// `c1`, composed segment by segment.
    fn transfer_difference(
        &self,
        c1: Complex64,
        c2: Complex64,
        path: &LoopPath,
        meshes: &[Vec<f64>],
    ) -> Result<(Mat2C, Mat2C)> {
        let hq = self.half_q(c2);
        let delta = 0.5 * (c1 - c2);
        let mut m = Mat2C::IDENTITY;
        let mut d = Mat2C::ZERO;
        for (i, (a, b)) in path.segments().enumerate() {
            let (s, ds) = integrate_difference_on_mesh(&hq, delta, a, b, &meshes[i])?;
            // (S + dS)(M + dM) − S M
            d = s * d + ds * m + ds * d;
            m = s * m;
        }
        Ok((m, d))
    }

    /// Finite-difference Cauchy–Riemann defect of `c ↦ (x, y, z)`: the
    /// largest difference between the real-direction and
    /// imaginary-direction central difference quotients. The stencil
    /// shares the step mesh of the center, and each quotient is formed
    /// from a directly integrated difference.
    pub fn cr_residual(&self, p: SlicePoint, h: f64) -> Result<f64> {
        let mesh = self.character_only(p)?.mesh;
        let i = Complex64::new(0.0, 1.0);
        let quotient = |step: Complex64| -> Result<[Complex64; 3]> {
            let (c1, c2) = (p.c + step, p.c - step);
            // the rounded points are not exactly 2·step apart
            let span = c1 - c2;
            Ok(self.character_difference(c1, c2, &mesh)?.map(|d| d / span))
        };
        let dx = quotient(Complex64::new(h, 0.0))?;
        let dy = quotient(i * h)?;
        let mut worst: f64 = 0.0;
        for k in 0..3 {
            worst = worst.max((dx[k] - dy[k]).norm());
        }
        Ok(worst)
    }
}

fn halve(mesh: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * mesh.len());
    for w in mesh.windows(2) {
        out.push(w[0]);
        out.push(0.5 * (w[0] + w[1]));
    }
    out.extend(mesh.last());
    out
}

/// `hol(p)` on the square torus; see [`HolonomySolver::holonomy`].
pub fn holonomy(solver: &HolonomySolver, p: SlicePoint) -> Result<HolonomyResult> {
    solver.holonomy(p)
}
