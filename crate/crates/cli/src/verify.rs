//! Self-checks run by `qslice verify`. Each suite is a list of named
//! invariants with a pass flag and the measured value.

use num_complex::Complex64;

use qslice::character::{classify_real_point, realize, CharacterTriple, RealPointKind, REAL_POINT_TOL};
use qslice::discreteness::{bq_test, simple_trace, trace_flip, BqKind, BqOptions, Slope};
use qslice::elliptic::{
    eisenstein_invariants, lemniscate_constant, BasisDifferential, LatticeSpec, QuadraticFamily, SlicePoint,
    Weierstrass,
};
use qslice::holonomy::{HolonomySolver, IntegratorOptions};
use qslice::moebius::{classify, compose, translation_length_from_trace, IsometryKind, Mat2C};
use qslice::scan::{raster, RasterConfig};

pub const SUITES: [&str; 7] = [
    "moebius",
    "character",
    "elliptic",
    "parabolicity",
    "holonomy",
    "discreteness",
    "scan",
];

pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn check(name: &'static str, value: f64, bound: f64) -> Check {
    Check {
        name,
        pass: value <= bound,
        detail: format!("{value:.3e} <= {bound:.0e}"),
    }
}

fn flag(name: &'static str, pass: bool, detail: String) -> Check {
    Check { name, pass, detail }
}

fn failed(name: &'static str, e: impl std::fmt::Display) -> Check {
    flag(name, false, format!("error: {e}"))
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Sample points spread over the default window.
const POINTS: [(f64, f64); 5] = [(0.0, 0.0), (3.0, 2.0), (-12.5, 7.25), (20.0, -30.0), (-40.0, -41.0)];

pub fn run(suite: &str, theta: f64) -> Vec<Check> {
    match suite {
        "moebius" => moebius(),
        "character" => character(),
        "elliptic" => elliptic(),
        "parabolicity" => parabolicity(theta),
        "holonomy" => holonomy(theta),
        "discreteness" => discreteness(),
        "scan" => scan(),
        _ => unreachable!("suite names are checked by the caller"),
    }
}

fn moebius() -> Vec<Check> {
    let a = Mat2C::new(c(2.0, 1.0), c(0.5, -1.0), c(1.0, 0.0), c(0.0, 0.0));
    let a = a.scale(a.det().sqrt().inv());
    let b = Mat2C::new(c(1.0, 0.0), c(3.0, 2.0), c(0.0, 0.0), c(1.0, 0.0));
    let ab = compose(&a, &b);
    let det_err = (ab.det() - 1.0).norm();
    let inv_err = compose(&a, &a.inverse()).distance(&Mat2C::IDENTITY);
    let parabolic = classify(&b, 1e-8).kind == IsometryKind::Parabolic;
    let len = translation_length_from_trace(c(2.0 * 1.5f64.cosh(), 0.0)).map(|l| (l - 3.0).abs());
    vec![
        check("det of products", det_err, 1e-12),
        check("inverse", inv_err, 1e-12),
        flag("unipotent is parabolic", parabolic, format!("{:?}", classify(&b, 1e-8).kind)),
        match len {
            Ok(e) => check("translation length", e, 1e-12),
            Err(e) => failed("translation length", e),
        },
    ]
}

fn character() -> Vec<Check> {
    let k = CharacterTriple::real(3.0, 3.0, 3.0).kappa();
    let mut realize_err: f64 = 0.0;
    let mut commutator_err: f64 = 0.0;
    for t in [
        CharacterTriple::new(c(2.5, 0.3), c(-1.0, 2.0), c(3.0, -0.5)),
        CharacterTriple::real(3.0, 3.0, 3.0),
        CharacterTriple::new(c(0.1, 0.0), c(4.0, 1.0), c(-2.5, 0.0)),
    ] {
        let (a, b) = realize(&t);
        realize_err = realize_err.max(CharacterTriple::from_matrices(&a, &b).distance(&t));
        commutator_err = commutator_err.max((a.commutator(&b).trace() - t.kappa()).norm());
    }
    vec![
        flag("kappa(3,3,3) = -2", k == c(-2.0, 0.0), format!("{k}")),
        check("realize round trip", realize_err, 1e-10),
        check("commutator trace = kappa", commutator_err, 1e-10),
    ]
}

fn elliptic() -> Vec<Check> {
    let inv = match eisenstein_invariants(&LatticeSpec::square()) {
        Ok(i) => i,
        Err(e) => return vec![failed("invariants", e)],
    };
    let oracle = 4.0 * lemniscate_constant().powi(4);
    let wp = Weierstrass::square();
    let mut worst: f64 = 0.0;
    for k in 0..40 {
        let z = c(0.05 + 0.023 * k as f64, 0.9 - 0.021 * k as f64);
        match wp.ode_residual(z) {
            Ok(r) => worst = worst.max(r),
            Err(e) => return vec![failed("wp equation", e)],
        }
    }
    let half = wp.wp(c(0.5, 0.5)).map(|v| v.norm());
    vec![
        check("g3 vanishes", inv.g3.norm(), 1e-10),
        check("g2 against lemniscate constant", (inv.g2 - oracle).norm() / oracle, 1e-8),
        check("wp equation", worst, 1e-9),
        match half {
            Ok(v) => check("wp at the half period (1+i)/2", v, 1e-9),
            Err(e) => failed("wp at the half period (1+i)/2", e),
        },
    ]
}

fn solver(theta: f64) -> qslice::Result<HolonomySolver> {
    HolonomySolver::new(
        QuadraticFamily::new(Weierstrass::square(), BasisDifferential::with_theta(theta)),
        c(0.5, 0.5),
        IntegratorOptions::default(),
        c(0.0, 0.0),
    )
}

fn parabolicity(theta: f64) -> Vec<Check> {
    let s = match solver(theta) {
        Ok(s) => s,
        Err(e) => return vec![failed("puncture trace is -2", e)],
    };
    let mut worst: f64 = 0.0;
    for (re, im) in POINTS {
        match s.holonomy(SlicePoint::new(c(re, im))) {
            Ok(r) => {
                let mut d = f64::INFINITY;
                if let Some(t) = r.puncture_trace {
                    d = (t + 2.0).norm();
                }
                worst = worst.max(d);
            }
            Err(e) => return vec![failed("puncture trace is -2", e)],
        }
    }
    vec![check("puncture trace is -2", worst, 1e-8)]
}

fn holonomy(theta: f64) -> Vec<Check> {
    let s = match solver(theta) {
        Ok(s) => s,
        Err(e) => return vec![failed("solver", e)],
    };
    let mut det: f64 = 0.0;
    let mut markov: f64 = 0.0;
    let mut cr: f64 = 0.0;
    for (re, im) in POINTS {
        let p = SlicePoint::new(c(re, im));
        let r = match s.holonomy(p) {
            Ok(r) => r,
            Err(e) => return vec![failed("holonomy", e)],
        };
        det = det.max((r.m_alpha.det() - 1.0).norm()).max((r.m_beta.det() - 1.0).norm());
        markov = markov.max(r.character.markov_residual());
        match s.cr_residual(p, 1e-4) {
            Ok(v) => cr = cr.max(v),
            Err(e) => return vec![failed("Cauchy-Riemann", e)],
        }
    }
    let origin = s.holonomy(SlicePoint::new(c(0.0, 0.0)));
    let fuchsian = match &origin {
        Ok(r) => {
            let kind = classify_real_point(&r.character, REAL_POINT_TOL).kind;
            flag("origin is Fuchsian", kind == RealPointKind::FuchsianTeich, format!("{kind:?}"))
        }
        Err(e) => failed("origin is Fuchsian", e),
    };
    vec![
        check("unit determinant", det, 1e-10),
        check("Markov identity", markov, 1e-6),
        check("Cauchy-Riemann", cr, 1e-5),
        fuchsian,
    ]
}

/// Product of letters of the Christoffel word of `p/q`; `B` is inverted
/// for negative slopes.
fn word_trace(slope: Slope, a: &Mat2C, b: &Mat2C) -> Complex64 {
    let (p, q) = (slope.p.unsigned_abs(), slope.q.unsigned_abs());
    let bb = if slope.p < 0 { b.inverse() } else { *b };
    let n = p + q;
    let mut m = Mat2C::IDENTITY;
    for k in 1..=n {
        let letter = if (k * p) / n > ((k - 1) * p) / n { &bb } else { a };
        m = compose(&m, letter);
    }
    m.trace()
}

/// Relative triple with the given `x` and `y`: `z` solves
/// `z² − xyz + x² + y² = 0`.
fn relative(x: Complex64, y: Complex64) -> CharacterTriple {
    let disc = (x * y * x * y - 4.0 * (x * x + y * y)).sqrt();
    CharacterTriple::new(x, y, (x * y + disc) / 2.0)
}

fn discreteness() -> Vec<Check> {
    let t = relative(c(2.2, 0.4), c(3.1, -0.2));
    let (a, b) = realize(&t);
    let mut worst: f64 = 0.0;
    for q in 0..=6i64 {
        for p in -6..=6i64 {
            if let Ok(s) = Slope::new(p, q) {
                match simple_trace(s, &t, 64) {
                    Ok(v) => {
                        let w = word_trace(s, &a, &b);
                        worst = worst.max((v - w).norm() / w.norm().max(1.0));
                    }
                    Err(e) => return vec![failed("simple traces match words", e)],
                }
            }
        }
    }
    let flip = (trace_flip(&t).kappa() - t.kappa()).norm();
    let opts = BqOptions::default();
    let kind = |t: &CharacterTriple| bq_test(t, &opts).map(|v| v.kind);
    let fuchsian = kind(&CharacterTriple::real(3.0, 3.0, 3.0));
    let elliptic = kind(&relative(c(1.0, 0.0), c(3.0, 0.0)));
    let short = kind(&relative(c(0.0, 0.3), c(3.0, 1.0)));
    vec![
        check("simple traces match words", worst, 1e-9),
        check("flip keeps kappa", flip, 1e-12),
        flag("(3,3,3) is Fuchsian", fuchsian == Ok(BqKind::Fuchsian), format!("{fuchsian:?}")),
        flag(
            "real trace in (-2, 2) is a witness",
            elliptic == Ok(BqKind::NotDiscrete),
            format!("{elliptic:?}"),
        ),
        flag(
            "trace below 1/2 is a witness",
            short == Ok(BqKind::NotDiscrete),
            format!("{short:?}"),
        ),
    ]
}

fn scan() -> Vec<Check> {
    let cfg = RasterConfig {
        center: c(0.0, 0.0),
        width: 4.0,
        height: 4.0,
        resolution: 16,
        workers: Some(1),
        ..Default::default()
    };
    match raster(&cfg) {
        Ok(r) => {
            let found = r.centers.iter().any(|rec| rec.c.norm() < 1e-6);
            let (i, j) = cfg.pixel_of(c(0.0, 0.0)).expect("origin is in the window");
            vec![
                flag("Fuchsian point found", found, format!("{} centers", r.centers.len())),
                flag(
                    "component around the Fuchsian point",
                    r.inside_component(i, j).len() > 1,
                    format!("{} pixels", r.inside_component(i, j).len()),
                ),
                flag(
                    "pixel count",
                    r.pixels.len() == 256,
                    format!("{}", r.pixels.len()),
                ),
            ]
        }
        Err(e) => vec![failed("smoke raster", e)],
    }
}
