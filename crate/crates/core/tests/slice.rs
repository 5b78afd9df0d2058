mod common;

use std::sync::OnceLock;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::c;
use qslice::discreteness::{bq_test, BqKind, BqOptions};
use qslice::elliptic::SlicePoint;
use qslice::holonomy::HolonomySolver;
use qslice::scan::output::ppm_bytes;
use qslice::scan::{
    calibrate_fuchsian_point, classify_point, find_centers, raster, NewtonOptions, PixelTag, RasterConfig,
};

fn solver() -> &'static HolonomySolver {
    static S: OnceLock<HolonomySolver> = OnceLock::new();
    S.get_or_init(|| HolonomySolver::square().unwrap())
}

fn fuchsian_point() -> Complex64 {
    static CF: OnceLock<Complex64> = OnceLock::new();
    *CF.get_or_init(|| calibrate_fuchsian_point(solver(), c(0.0, 0.0), &NewtonOptions::default()).unwrap())
}

fn window(center: Complex64, size: f64, resolution: usize) -> RasterConfig {
    RasterConfig {
        center,
        width: size,
        height: size,
        resolution,
        reference: fuchsian_point(),
        ..Default::default()
    }
}

#[test]
fn fuchsian_point_is_near_zero_with_square_character() {
    let c_f = fuchsian_point();
    assert!(c_f.norm() < 1e-6, "{c_f}");
    let t = solver().holonomy(SlicePoint::new(c_f)).unwrap().character.positive_lift();
    let r = 2.0 * 2f64.sqrt();
    assert!((t.x - r).norm() < 1e-8 && (t.y - r).norm() < 1e-8 && (t.z - 4.0).norm() < 1e-8);
}

/// Conjugation fixes the horizontal loop and reverses the vertical one,
/// so `z` goes to the trace of the other curve on the edge `{x, y}`.
#[test]
fn conjugate_points_have_conjugate_characters() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..10 {
        let p = c(rng.gen_range(-40.0..40.0), rng.gen_range(-40.0..40.0));
        let a = solver().character_only(SlicePoint::new(p)).unwrap().character;
        let b = solver().character_only(SlicePoint::new(p.conj())).unwrap().character;
        let expected = [a.x, a.y, a.x * a.y - a.z].map(|v| v.conj());
        for (u, v) in expected.iter().zip(b.as_array()) {
            assert!((u - v).norm() <= 1e-9 * u.norm().max(1.0), "{p}: {u} vs {v}");
        }
    }
}

#[test]
fn characters_separate_grid_points() {
    let cfg = window(fuchsian_point(), 40.0, 32);
    let chars: Vec<_> = (0..cfg.rows())
        .flat_map(|j| (0..cfg.cols()).map(move |i| (i, j)))
        .map(|(i, j)| solver().character_only(SlicePoint::new(cfg.pixel_center(i, j))).unwrap().character)
        .collect();
    let mut min = f64::INFINITY;
    for (k, a) in chars.iter().enumerate() {
        for b in &chars[k + 1..] {
            min = min.min(a.distance(b));
        }
    }
    assert!(min > 1e-3, "closest characters {min:.2e}");
}

#[test]
fn centers_are_stable_under_refinement() {
    let seed = c(-21.35, 0.0);
    let coarse = find_centers(&window(seed, 4.0, 8)).unwrap();
    let fine = find_centers(&window(seed, 4.0, 16)).unwrap();
    assert_eq!(coarse.len(), 1);
    assert_eq!(fine.len(), 1);
    assert!((coarse[0].c - fine[0].c).norm() <= 1e-6);
    assert!((coarse[0].c - c(-21.349890, 0.0)).norm() < 1e-5, "{}", coarse[0].c);
}

#[test]
fn centers_stay_fuchsian_with_twice_the_depth() {
    let deep = BqOptions {
        max_depth: 2 * BqOptions::default().max_depth,
        ..Default::default()
    };
    let centers = find_centers(&window(fuchsian_point(), 90.0, 90)).unwrap();
    assert!(centers.len() >= 5, "{}", centers.len());
    for rec in &centers {
        assert_eq!(bq_test(&rec.character, &deep).unwrap().kind, BqKind::Fuchsian);
    }
}

#[test]
fn point_classification_examples() {
    let cfg = window(fuchsian_point(), 0.2, 2);
    assert_eq!(classify_point(solver(), fuchsian_point(), &cfg).unwrap().tag, PixelTag::CenterBlack);
    let near = classify_point(solver(), c(0.8, 0.3), &cfg).unwrap();
    assert_eq!(near.tag, PixelTag::QfGray);
    assert!(near.markov_residual < 1e-8);
    let far = classify_point(solver(), c(-600.0, 650.0), &cfg).unwrap().tag;
    assert!(matches!(far, PixelTag::OutsideWhite | PixelTag::Inconclusive), "{far:?}");
}

#[test]
fn gray_fraction_is_resolution_stable() {
    let fraction = |res: usize| {
        let r = raster(&window(fuchsian_point(), 90.0, res)).unwrap();
        (r.stats.qf_gray + r.stats.center_black) as f64 / r.pixels.len() as f64
    };
    let (a, b) = (fraction(50), fraction(100));
    assert!((a - b).abs() < 0.02, "{a} vs {b}");
}

#[test]
fn smoke_raster_accounts_for_every_pixel() {
    let r = raster(&window(c(10.0, -5.0), 30.0, 16)).unwrap();
    let s = &r.stats;
    assert_eq!((s.cols, s.rows), (16, 16));
    assert_eq!(s.qf_gray + s.center_black + s.outside_white + s.inconclusive, 256);
    assert_eq!(s.centers, r.centers.len());
    assert!(s.max_markov_residual < 1e-6);
}

#[test]
fn rectangular_window_keeps_square_pixels() {
    let cfg = RasterConfig {
        width: 8.0,
        height: 2.0,
        ..window(c(0.0, 0.0), 8.0, 16)
    };
    assert_eq!((cfg.cols(), cfg.rows()), (16, 4));
    let (dx, dy) = cfg.pixel_size();
    assert!((dx - dy).abs() < 1e-12);
    assert_eq!(cfg.pixel_of(cfg.pixel_center(3, 2)), Some((3, 2)));
}

#[test]
fn raster_matches_golden_image() {
    let r = raster(&window(c(0.0, 0.0), 4.0, 16)).unwrap();
    let golden = include_bytes!("golden/window_4x4_res16.ppm");
    assert!(ppm_bytes(r.cols(), r.rows(), &r.tags()) == golden.as_slice());
}

#[test]
fn tiny_window_has_no_centers() {
    assert!(find_centers(&window(c(5.0, 5.0), 1e-6, 4)).unwrap().is_empty());
}

#[test]
fn invalid_windows_are_rejected() {
    assert!(raster(&window(c(0.0, 0.0), 4.0, 0)).is_err());
    assert!(raster(&window(c(0.0, 0.0), 0.0, 4)).is_err());
    assert!(raster(&window(c(f64::NAN, 0.0), 4.0, 4)).is_err());
}
