//! Rasterizing the slice: every pixel of a window in the `c`-plane is
//! classified by the discreteness test of its holonomy character, and
//! Fuchsian centers are located by refining seeds taken from the grid.

mod centers;
pub mod output;

use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

pub use centers::{
    attribute_centers, calibrate_fuchsian_point, center_length_series, refine_center, CenterLabel,
    CenterRecord, NewtonOptions, Refinement,
};

use crate::character::CharacterTriple;
use crate::discreteness::{bq_test, BqKind, BqOptions, BqVerdict};
use crate::elliptic::{QuadraticFamily, SlicePoint};
use crate::error::{Error, Result};
use crate::holonomy::{HolonomySolver, IntegratorOptions};

/// Side of the default window around the Fuchsian point. It holds that
/// point and the four nearest further centers, at `±21.35` and `±41.01 i`.
pub const BASE_WINDOW: f64 = 90.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PixelTag {
    QfGray,
    CenterBlack,
    OutsideWhite,
    Inconclusive,
}

impl PixelTag {
    pub const ALL: [PixelTag; 4] = [
        PixelTag::QfGray,
        PixelTag::CenterBlack,
        PixelTag::OutsideWhite,
        PixelTag::Inconclusive,
    ];

    pub fn rgb(&self) -> [u8; 3] {
        match self {
            PixelTag::QfGray => [160, 160, 160],
            PixelTag::CenterBlack => [0, 0, 0],
            PixelTag::OutsideWhite => [255, 255, 255],
            PixelTag::Inconclusive => [255, 200, 0],
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            PixelTag::QfGray => "qf-gray",
            PixelTag::CenterBlack => "center-black",
            PixelTag::OutsideWhite => "outside-white",
            PixelTag::Inconclusive => "inconclusive",
        }
    }

    /// Gray or black: inside the discreteness locus.
    pub fn is_inside(&self) -> bool {
        matches!(self, PixelTag::QfGray | PixelTag::CenterBlack)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PixelClass {
    pub tag: PixelTag,
    /// Norm of `(Im x/|x|, Im y/|y|, Im z/|z|)`, each modulus floored at 1.
    /// NaN when the holonomy could not be evaluated.
    pub imag_residual: f64,
    pub markov_residual: f64,
    pub ode_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RasterConfig {
    pub center: Complex64,
    pub width: f64,
    pub height: f64,
    /// Pixels across the width; rows are chosen to keep pixels square.
    pub resolution: usize,
    pub bq: BqOptions,
    pub integrator: IntegratorOptions,
    pub newton: NewtonOptions,
    /// Pixels with a smaller imaginary residual seed the center search.
    pub seed_threshold: f64,
    /// Refined centers closer than this are merged.
    pub merge_distance: f64,
    /// Slopes up to this height get a length entry in center records.
    pub length_height: u32,
    /// The Fuchsian point: SL2 signs are fixed there and center labels are
    /// ordered by distance from it.
    pub reference: Complex64,
    /// Thread count; `None` uses the rayon default.
    pub workers: Option<usize>,
}

impl Default for RasterConfig {
    fn default() -> Self {
        RasterConfig {
            center: Complex64::new(0.0, 0.0),
            width: BASE_WINDOW,
            height: BASE_WINDOW,
            resolution: 400,
            bq: BqOptions::default(),
            integrator: IntegratorOptions::default(),
            newton: NewtonOptions::default(),
            seed_threshold: 0.05,
            merge_distance: 1e-6,
            length_height: 2,
            reference: Complex64::new(0.0, 0.0),
            workers: None,
        }
    }
}

impl RasterConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.resolution < 2 {
            return bad(format!("resolution must be at least 2, got {}", self.resolution));
        }
        if !(self.width > 0.0 && self.width.is_finite()) {
            return bad(format!("width must be positive, got {}", self.width));
        }
        if !(self.height > 0.0 && self.height.is_finite()) {
            return bad(format!("height must be positive, got {}", self.height));
        }
        if !(self.center.re.is_finite() && self.center.im.is_finite()) {
            return bad(format!("window center must be finite, got {}", self.center));
        }
        if self.bq.max_depth == 0 || self.bq.max_nodes == 0 {
            return bad("max depth and node budget must be positive".into());
        }
        if !(self.bq.growth_bound > 2.0) {
            return bad(format!("growth bound must exceed 2, got {}", self.bq.growth_bound));
        }
        if !(self.integrator.rtol > 0.0 && self.integrator.atol > 0.0) || self.integrator.max_steps == 0 {
            return bad("integrator tolerances and step budget must be positive".into());
        }
        if !(self.seed_threshold > 0.0) || !(self.merge_distance > 0.0) {
            return bad("seed threshold and merge distance must be positive".into());
        }
        if !(self.newton.step > 0.0 && self.newton.tol > 0.0) || self.newton.max_iter == 0 {
            return bad("Gauss-Newton step, tolerance and iteration count must be positive".into());
        }
        if self.workers == Some(0) {
            return bad("worker count must be positive".into());
        }
        Ok(())
    }

    pub fn cols(&self) -> usize {
        self.resolution
    }

    pub fn rows(&self) -> usize {
        ((self.resolution as f64 * self.height / self.width).round() as usize).max(2)
    }

    pub fn pixel_size(&self) -> (f64, f64) {
        (self.width / self.cols() as f64, self.height / self.rows() as f64)
    }

    /// Center of pixel `(i, j)`, column `i` from the left and row `j` from
    /// the top.
    pub fn pixel_center(&self, i: usize, j: usize) -> Complex64 {
        let (dx, dy) = self.pixel_size();
        Complex64::new(
            self.center.re - 0.5 * self.width + (i as f64 + 0.5) * dx,
            self.center.im + 0.5 * self.height - (j as f64 + 0.5) * dy,
        )
    }

    /// Pixel containing `c`, if inside the window.
    pub fn pixel_of(&self, c: Complex64) -> Option<(usize, usize)> {
        let (dx, dy) = self.pixel_size();
        let u = (c.re - (self.center.re - 0.5 * self.width)) / dx;
        let v = ((self.center.im + 0.5 * self.height) - c.im) / dy;
        if u >= 0.0 && v >= 0.0 && (u as usize) < self.cols() && (v as usize) < self.rows() {
            Some((u as usize, v as usize))
        } else {
            None
        }
    }

    pub fn solver(&self) -> Result<HolonomySolver> {
        HolonomySolver::new(
            QuadraticFamily::square(),
            Complex64::new(0.5, 0.5),
            self.integrator,
            self.reference,
        )
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers.unwrap_or(0))
            .build()
            .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))
    }
}

/// Relative imaginary parts of the three traces.
pub fn imag_residuals(t: &CharacterTriple) -> [f64; 3] {
    t.as_array().map(|v| v.im / v.norm().max(1.0))
}

pub fn imag_residual(t: &CharacterTriple) -> f64 {
    imag_residuals(t).iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn tag_of(verdict: &Result<BqVerdict>) -> PixelTag {
    match verdict {
        Ok(v) => match v.kind {
            BqKind::Quasifuchsian | BqKind::Fuchsian => PixelTag::QfGray,
            BqKind::NotDiscrete => PixelTag::OutsideWhite,
            BqKind::Inconclusive => PixelTag::Inconclusive,
        },
        Err(_) => PixelTag::Inconclusive,
    }
}

fn sample(solver: &HolonomySolver, c: Complex64, bq: &BqOptions) -> PixelClass {
    match solver.character_only(SlicePoint::new(c)) {
        Ok(r) => PixelClass {
            tag: tag_of(&bq_test(&r.character, bq)),
            imag_residual: imag_residual(&r.character),
            markov_residual: r.character.markov_residual(),
            ode_error: r.error_estimate,
        },
        Err(_) => PixelClass {
            tag: PixelTag::Inconclusive,
            imag_residual: f64::NAN,
            markov_residual: f64::NAN,
            ode_error: f64::NAN,
        },
    }
}

/// Classify a single point; it is marked as a center when refinement
/// from `c` converges to a validated center inside the pixel of `cfg`'s
/// size around `c`.
pub fn classify_point(solver: &HolonomySolver, c: Complex64, cfg: &RasterConfig) -> Result<PixelClass> {
    cfg.validate()?;
    let mut class = sample(solver, c, &cfg.bq);
    if class.tag.is_inside() && class.imag_residual < cfg.seed_threshold {
        let (dx, dy) = cfg.pixel_size();
        if let Some(center) = refine_center(solver, c, cfg)? {
            let d = center.c - c;
            if d.re.abs() <= 0.5 * dx && d.im.abs() <= 0.5 * dy {
                class.tag = PixelTag::CenterBlack;
            }
        }
    }
    Ok(class)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RasterStats {
    pub cols: usize,
    pub rows: usize,
    pub qf_gray: usize,
    pub center_black: usize,
    pub outside_white: usize,
    pub inconclusive: usize,
    pub centers: usize,
    pub seeds: usize,
    pub mean_ode_error: f64,
    pub max_markov_residual: f64,
    pub wall_seconds: f64,
}

#[derive(Clone, Debug)]
pub struct Raster {
    pub config: RasterConfig,
    /// Row-major from the top-left pixel.
    pub pixels: Vec<PixelClass>,
    pub centers: Vec<CenterRecord>,
    pub stats: RasterStats,
}

impl Raster {
    pub fn cols(&self) -> usize {
        self.config.cols()
    }

    pub fn rows(&self) -> usize {
        self.config.rows()
    }

    pub fn tag(&self, i: usize, j: usize) -> PixelTag {
        self.pixels[j * self.cols() + i].tag
    }

    pub fn tags(&self) -> Vec<PixelTag> {
        self.pixels.iter().map(|p| p.tag).collect()
    }

    /// Pixels 4-connected to `(i, j)` through gray or black pixels.
    pub fn inside_component(&self, i: usize, j: usize) -> Vec<(usize, usize)> {
        let (w, h) = (self.cols(), self.rows());
        if !self.tag(i, j).is_inside() {
            return Vec::new();
        }
        let mut seen = vec![false; w * h];
        let mut stack = vec![(i, j)];
        let mut out = Vec::new();
        seen[j * w + i] = true;
        while let Some((a, b)) = stack.pop() {
            out.push((a, b));
            let mut push = |a: usize, b: usize| {
                if !seen[b * w + a] && self.tag(a, b).is_inside() {
                    seen[b * w + a] = true;
                    stack.push((a, b));
                }
            };
            if a > 0 {
                push(a - 1, b);
            }
            if a + 1 < w {
                push(a + 1, b);
            }
            if b > 0 {
                push(a, b - 1);
            }
            if b + 1 < h {
                push(a, b + 1);
            }
        }
        out.sort_unstable_by_key(|&(a, b)| (b, a));
        out
    }
}

/// Seeds for the center search: pixels under the residual threshold, and
/// gray pixels whose residual is a local minimum of their 3×3 block.
fn seeds(cfg: &RasterConfig, samples: &[PixelClass]) -> Vec<usize> {
    let (w, h) = (cfg.cols(), cfg.rows());
    let res = |i: usize, j: usize| samples[j * w + i].imag_residual;
    let mut out = Vec::new();
    for j in 0..h {
        for i in 0..w {
            let r = res(i, j);
            if !r.is_finite() {
                continue;
            }
            if r < cfg.seed_threshold {
                out.push(j * w + i);
                continue;
            }
            if !samples[j * w + i].tag.is_inside() {
                continue;
            }
            let mut minimum = true;
            for b in j.saturating_sub(1)..=(j + 1).min(h - 1) {
                for a in i.saturating_sub(1)..=(i + 1).min(w - 1) {
                    if (a, b) != (i, j) && !(r < res(a, b)) {
                        minimum = false;
                    }
                }
            }
            if minimum {
                out.push(j * w + i);
            }
        }
    }
    out
}

/// Classify every pixel of the window and locate the Fuchsian centers in
/// it. Output is independent of the worker count.
pub fn raster(cfg: &RasterConfig) -> Result<Raster> {
    cfg.validate()?;
    let solver = cfg.solver()?;
    raster_with(&solver, cfg)
}

pub fn raster_with(solver: &HolonomySolver, cfg: &RasterConfig) -> Result<Raster> {
    cfg.validate()?;
    let start = Instant::now();
    let pool = cfg.pool()?;
    let (w, h) = (cfg.cols(), cfg.rows());
    let samples: Vec<PixelClass> = pool.install(|| {
        (0..w * h)
            .into_par_iter()
            .map(|k| sample(solver, cfg.pixel_center(k % w, k / w), &cfg.bq))
            .collect()
    });
    let seed_list = seeds(cfg, &samples);
    let refined: Vec<Option<CenterRecord>> = pool.install(|| {
        seed_list
            .par_iter()
            .map(|&k| refine_center(solver, cfg.pixel_center(k % w, k / w), cfg).ok().flatten())
            .collect()
    });
    let mut centers: Vec<CenterRecord> = Vec::new();
    for rec in refined.into_iter().flatten() {
        if cfg.pixel_of(rec.c).is_none() {
            continue;
        }
        if centers.iter().all(|o| (o.c - rec.c).norm() >= cfg.merge_distance) {
            centers.push(rec);
        }
    }
    centers.sort_by(|a, b| {
        a.c.norm()
            .total_cmp(&b.c.norm())
            .then(a.c.re.total_cmp(&b.c.re))
            .then(a.c.im.total_cmp(&b.c.im))
    });
    attribute_centers(&mut centers, cfg.reference);

    let mut pixels = samples;
    for rec in &centers {
        if let Some((i, j)) = cfg.pixel_of(rec.c) {
            pixels[j * w + i].tag = PixelTag::CenterBlack;
        }
    }
    let count = |t: PixelTag| pixels.iter().filter(|p| p.tag == t).count();
    let finite_errors: Vec<f64> = pixels.iter().map(|p| p.ode_error).filter(|e| e.is_finite()).collect();
    let mean_ode_error = if finite_errors.is_empty() {
        f64::NAN
    } else {
        finite_errors.iter().sum::<f64>() / finite_errors.len() as f64
    };
    let max_markov_residual = pixels
        .iter()
        .map(|p| p.markov_residual)
        .filter(|e| e.is_finite())
        .fold(0.0, f64::max);
    let stats = RasterStats {
        cols: w,
        rows: h,
        qf_gray: count(PixelTag::QfGray),
        center_black: count(PixelTag::CenterBlack),
        outside_white: count(PixelTag::OutsideWhite),
        inconclusive: count(PixelTag::Inconclusive),
        centers: centers.len(),
        seeds: seed_list.len(),
        mean_ode_error,
        max_markov_residual,
        wall_seconds: start.elapsed().as_secs_f64(),
    };
    Ok(Raster {
        config: cfg.clone(),
        pixels,
        centers,
        stats,
    })
}

/// Fuchsian centers in the window of `cfg`, sorted by `|c|`. An empty list
/// is a valid answer for small windows.
pub fn find_centers(cfg: &RasterConfig) -> Result<Vec<CenterRecord>> {
    Ok(raster(cfg)?.centers)
}
