mod common;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{c, christoffel_trace, oracle_pair, random_relative, relative_triple, slopes_up_to};
use qslice::character::{classify_real_point, CharacterTriple, RealPointKind, REAL_POINT_TOL};
use qslice::discreteness::{bq_test, simple_trace, trace_flip, BqKind, BqOptions, Slope};

fn relative_strategy() -> impl Strategy<Value = CharacterTriple> {
    (-3.0..3.0f64, -1.0..1.0f64, -3.0..3.0f64, -1.0..1.0f64, any::<bool>())
        .prop_map(|(a, b, d, e, larger)| relative_triple(c(a, b), c(d, e), larger))
}

/// Real triples with every trace above 2 on the relative surface: the
/// Teichmüller component, all Fuchsian. `z` is real only when
/// `1/x² + 1/y² ≤ 1/4`.
fn teichmuller_strategy() -> impl Strategy<Value = CharacterTriple> {
    (2.9..8.0f64, 2.9..8.0f64).prop_map(|(x, y)| relative_triple(c(x, 0.0), c(y, 0.0), true))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn flip_preserves_kappa(t in relative_strategy()) {
        let f = trace_flip(&t);
        prop_assert!((f.kappa() - t.kappa()).norm() <= 1e-9 * t.max_norm().powi(3).max(1.0));
        let back = trace_flip(&f);
        prop_assert!(back.distance(&t) <= 1e-12 * t.max_norm().powi(2).max(1.0));
    }

    #[test]
    fn simple_trace_matches_word_trace(t in relative_strategy()) {
        let (a, b) = oracle_pair(&t);
        for s in slopes_up_to(5) {
            let v = simple_trace(s, &t, 64).unwrap();
            let w = christoffel_trace(s, &a, &b);
            prop_assert!((v - w).norm() <= 1e-9 * w.norm().max(1.0), "{s}: {v} vs {w}");
        }
    }

    #[test]
    fn teichmuller_points_are_never_rejected(t in teichmuller_strategy()) {
        let v = bq_test(&t, &BqOptions::default()).unwrap();
        prop_assert!(v.kind != BqKind::NotDiscrete);
        prop_assert!(v.witness.is_none());
    }

    #[test]
    fn teichmuller_tag_ignores_permutations(t in teichmuller_strategy(), k in 0usize..6) {
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let tag = |t: &CharacterTriple| classify_real_point(t, REAL_POINT_TOL).kind;
        prop_assert_eq!(tag(&t), RealPointKind::FuchsianTeich);
        prop_assert_eq!(tag(&t.permuted(perms[k])), RealPointKind::FuchsianTeich);
    }

    #[test]
    fn slope_text_round_trip(p in -50i64..50, q in -50i64..50) {
        if let Ok(s) = Slope::new(p, q) {
            prop_assert_eq!(s.to_string().parse::<Slope>().unwrap(), s);
            prop_assert!(s.q >= 0);
        }
    }
}

#[test]
fn witness_persists_with_more_depth() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut found = 0;
    for _ in 0..200 {
        let t = random_relative(&mut rng);
        let shallow = bq_test(&t, &BqOptions { max_depth: 6, ..Default::default() }).unwrap();
        if let Some(w) = shallow.witness {
            found += 1;
            let deep = bq_test(&t, &BqOptions { max_depth: 30, ..Default::default() }).unwrap();
            assert_eq!(deep.kind, BqKind::NotDiscrete);
            assert_eq!(deep.witness.unwrap().slope, w.slope);
        }
    }
    assert!(found > 20, "only {found} witnesses");
}

#[test]
fn off_surface_triple_is_refused() {
    assert!(bq_test(&CharacterTriple::real(3.0, 3.0, 3.1), &BqOptions::default()).is_err());
}

#[test]
fn markov_point_is_fuchsian() {
    let t = CharacterTriple::real(3.0, 3.0, 3.0);
    assert_eq!(bq_test(&t, &BqOptions::default()).unwrap().kind, BqKind::Fuchsian);
}

#[test]
fn elliptic_generator_is_a_witness() {
    let t = relative_triple(c(1.0, 0.0), c(5.0, 0.0), true);
    let v = bq_test(&t, &BqOptions::default()).unwrap();
    assert_eq!(v.kind, BqKind::NotDiscrete);
    assert_eq!(v.depth, 0);
    assert_eq!(v.witness.unwrap().slope, Slope::ZERO);
}

#[test]
fn quasifuchsian_deformation_is_recognized() {
    let t = relative_triple(c(3.0, 0.1), c(3.0, -0.05), true);
    assert_eq!(bq_test(&t, &BqOptions::default()).unwrap().kind, BqKind::Quasifuchsian);
}

#[test]
fn slopes_normalize_and_reject_non_reduced() {
    assert_eq!(Slope::new(-2, -3).unwrap(), Slope::new(2, 3).unwrap());
    assert_eq!(Slope::new(-1, 0).unwrap(), Slope::INFINITY);
    assert!(Slope::new(2, 4).is_err());
    assert!(Slope::new(0, 0).is_err());
    assert_eq!("∞".parse::<Slope>().unwrap(), Slope::INFINITY);
    assert!("x/2".parse::<Slope>().is_err());
    let _: Complex64 = simple_trace(Slope::new(-3, 2).unwrap(), &CharacterTriple::real(3.0, 3.0, 3.0), 64).unwrap();
}
