//! Fuchsian centers: Gauss–Newton on the imaginary parts of the traces,
//! validation, labels and length series.

use num_complex::Complex64;
use serde::ser::{SerializeMap, SerializeStruct};
use serde::{Serialize, Serializer};

use super::{imag_residuals, RasterConfig};
use crate::character::{classify_real_point, CharacterTriple, RealPointKind, REAL_POINT_TOL};
use crate::discreteness::{bq_test, enumerate_weighted_curves, simple_trace, BqKind, Slope};
use crate::elliptic::SlicePoint;
use crate::error::{Error, Result};
use crate::holonomy::{HolonomyResult, HolonomySolver};
use crate::moebius::translation_length_from_trace;

/// Flips allowed when evaluating the trace of one slope.
const TRACE_GUARD: usize = 256;

/// Slopes up to this height are searched when labeling centers.
const LABEL_HEIGHT: u32 = 3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonOptions {
    /// Central-difference step for the Jacobian.
    pub step: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Step halvings tried before an iteration is declared stuck.
    pub max_halvings: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            step: 1e-6,
            tol: 1e-10,
            max_iter: 50,
            max_halvings: 30,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Refinement {
    pub c: Complex64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub holonomy: HolonomyResult,
}

fn norm3(r: &[f64; 3]) -> f64 {
    r.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Damped Gauss–Newton for `(Im x, Im y, Im z) = 0`, each part relative to
/// the modulus of its trace, in the unknowns `(Re c, Im c)`. The Jacobian
/// replays the step mesh of the current iterate so its difference
/// quotients see a smooth function.
pub fn gauss_newton(solver: &HolonomySolver, seed: Complex64, opts: &NewtonOptions) -> Result<Refinement> {
    let eval = |c: Complex64| solver.character_only(SlicePoint::new(c));
    let mut c = seed;
    let mut hol = eval(c)?;
    let mut res = imag_residuals(&hol.character);
    let mut n = norm3(&res);
    let mut iterations = 0;
    while n >= opts.tol && iterations < opts.max_iter {
        iterations += 1;
        let h = opts.step;
        let at = |dc: Complex64| -> Result<[f64; 3]> {
            Ok(imag_residuals(&solver.holonomy_on_mesh(c + dc, &hol.mesh)?.character))
        };
        let (rp, rm) = (at(Complex64::new(h, 0.0))?, at(Complex64::new(-h, 0.0))?);
        let (ip, im) = (at(Complex64::new(0.0, h))?, at(Complex64::new(0.0, -h))?);
        let jr: Vec<f64> = (0..3).map(|k| (rp[k] - rm[k]) / (2.0 * h)).collect();
        let ji: Vec<f64> = (0..3).map(|k| (ip[k] - im[k]) / (2.0 * h)).collect();
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let (a11, a12, a22) = (dot(&jr, &jr), dot(&jr, &ji), dot(&ji, &ji));
        let (b1, b2) = (-dot(&jr, &res), -dot(&ji, &res));
        let det = a11 * a22 - a12 * a12;
        if !(det.abs() > 1e-300) {
            break;
        }
        let delta = Complex64::new((a22 * b1 - a12 * b2) / det, (a11 * b2 - a12 * b1) / det);
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..=opts.max_halvings {
            let trial = c + delta * lambda;
            if let Ok(t) = eval(trial) {
                let tr = imag_residuals(&t.character);
                if norm3(&tr) < n {
                    c = trial;
                    hol = t;
                    res = tr;
                    n = norm3(&tr);
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Ok(Refinement {
        c,
        residual: n,
        iterations,
        converged: n < opts.tol,
        holonomy: hol,
    })
}

/// Locate the Fuchsian point of the slice, starting from `seed`.
pub fn calibrate_fuchsian_point(solver: &HolonomySolver, seed: Complex64, opts: &NewtonOptions) -> Result<Complex64> {
    let r = gauss_newton(solver, seed, opts)?;
    if !r.converged {
        return Err(Error::InsufficientCenters { needed: 1, found: 0 });
    }
    Ok(r.c)
}

/// Which simple closed curve a center is grafted along, and the index of
/// the center among those of the same curve, counted outward from the
/// Fuchsian point. Advisory only.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CenterLabel {
    pub slope: Slope,
    pub n: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CenterRecord {
    pub c: Complex64,
    /// The lift with `Re x, Re y ≥ 0`.
    pub character: CharacterTriple,
    pub residual: f64,
    pub lengths: Vec<(Slope, f64)>,
    pub label: Option<CenterLabel>,
}

impl CenterRecord {
    pub fn length(&self, slope: Slope) -> Result<f64> {
        translation_length_from_trace(simple_trace(slope, &self.character, TRACE_GUARD)?)
    }
}

struct Pair(f64, f64);

impl Serialize for Pair {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.0, self.1].serialize(s)
    }
}

struct Lengths<'a>(&'a [(Slope, f64)]);

impl Serialize for Lengths<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (slope, l) in self.0 {
            m.serialize_entry(&slope.to_string(), l)?;
        }
        m.end()
    }
}

impl Serialize for CenterRecord {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let t = self.character.as_array().map(|v| Pair(v.re, v.im));
        let mut st = s.serialize_struct("CenterRecord", 4)?;
        st.serialize_field("c", &Pair(self.c.re, self.c.im))?;
        st.serialize_field("traces", &t)?;
        st.serialize_field("residual", &self.residual)?;
        st.serialize_field("lengths", &Lengths(&self.lengths))?;
        st.end()
    }
}

/// Refine from `seed` and validate: the converged character must be a
/// Teichmüller point and pass the discreteness test as Fuchsian. `None`
/// when refinement fails or validation rejects the limit.
pub fn refine_center(solver: &HolonomySolver, seed: Complex64, cfg: &RasterConfig) -> Result<Option<CenterRecord>> {
    let r = match gauss_newton(solver, seed, &cfg.newton) {
        Ok(r) if r.converged => r,
        _ => return Ok(None),
    };
    let character = r.holonomy.character.positive_lift();
    if classify_real_point(&character, REAL_POINT_TOL).kind != RealPointKind::FuchsianTeich {
        return Ok(None);
    }
    match bq_test(&character, &cfg.bq) {
        Ok(v) if v.kind == BqKind::Fuchsian => {}
        _ => return Ok(None),
    }
    let mut lengths = Vec::new();
    for w in enumerate_weighted_curves(cfg.length_height, 1) {
        let t = simple_trace(w.slope, &character, TRACE_GUARD)?;
        lengths.push((w.slope, translation_length_from_trace(t)?));
    }
    Ok(Some(CenterRecord {
        c: r.c,
        character,
        residual: r.residual,
        lengths,
        label: None,
    }))
}

/// The grafting curve of a center: the slope whose hyperbolic length is
/// largest relative to its flat length `|q + p i|` on the square torus.
/// Grafting along `γ` with weight `2πn` inserts a flat annulus of that
/// width, so `γ` is the curve stretched most.
fn grafting_slope(t: &CharacterTriple) -> Option<Slope> {
    enumerate_weighted_curves(LABEL_HEIGHT, 1)
        .into_iter()
        .filter_map(|w| {
            let tr = simple_trace(w.slope, t, TRACE_GUARD).ok()?;
            let len = translation_length_from_trace(tr).unwrap_or(0.0);
            let flat = ((w.slope.p * w.slope.p + w.slope.q * w.slope.q) as f64).sqrt();
            Some((w.slope, len / flat))
        })
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(s, _)| s)
}

/// Label every center except the one at `reference` by its grafting slope
/// and its rank in distance from `reference` among centers of that slope.
pub fn attribute_centers(centers: &mut [CenterRecord], reference: Complex64) {
    let slopes: Vec<Option<Slope>> = centers
        .iter()
        .map(|r| {
            if (r.c - reference).norm() < 1e-6 * reference.norm().max(1.0) {
                None
            } else {
                grafting_slope(&r.character)
            }
        })
        .collect();
    let mut order: Vec<usize> = (0..centers.len()).collect();
    order.sort_by(|&a, &b| (centers[a].c - reference).norm().total_cmp(&(centers[b].c - reference).norm()));
    let mut seen: Vec<(Slope, u32)> = Vec::new();
    for k in order {
        centers[k].label = slopes[k].map(|slope| {
            let n = match seen.iter_mut().find(|(s, _)| *s == slope) {
                Some(entry) => {
                    entry.1 += 1;
                    entry.1
                }
                None => {
                    seen.push((slope, 1));
                    1
                }
            };
            CenterLabel { slope, n }
        });
    }
}

/// `(n, ℓ_n)` for the centers labeled with `slope`, in label order, where
/// `ℓ_n` is the translation length of the curve of that slope.
pub fn center_length_series(slope: Slope, centers: &[CenterRecord]) -> Result<Vec<(u32, f64)>> {
    let mut out = Vec::new();
    for r in centers {
        if let Some(label) = r.label.filter(|l| l.slope == slope) {
            out.push((label.n, r.length(slope)?));
        }
    }
    if out.len() < 2 {
        return Err(Error::InsufficientCenters {
            needed: 2,
            found: out.len(),
        });
    }
    out.sort_by_key(|e| e.0);
    Ok(out)
}
