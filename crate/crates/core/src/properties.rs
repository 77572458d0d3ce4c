//! Property tests over random states and constellations.

use proptest::prelude::*;

use crate::dynamics::match_stars;
use crate::entanglement::{classify, qfi, three_tangle, witnesses, QfiAxis};
use crate::geometry::{husimi_at, husimi_q, husimi_zero_directions, multipoles, pair_metrics};
use crate::linalg::C64;
use crate::permanent::{permanent_ryser, symmetric_overlap};
use crate::stellar::{dot, normalize, stars_of, stars_to_state, DEFAULT_TOLERANCE};
use crate::{Constellation, Convention, Exec, SpinState};

fn amplitudes(max_two_s: usize) -> impl Strategy<Value = SpinState> {
    amplitudes_between(1, max_two_s)
}

fn amplitudes_between(min_two_s: usize, max_two_s: usize) -> impl Strategy<Value = SpinState> {
    (min_two_s..=max_two_s)
        .prop_flat_map(|n| prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n + 1))
        .prop_filter_map("zero vector", |v| {
            let a: Vec<C64> = v.into_iter().map(|(re, im)| C64::new(re, im)).collect();
            if a.iter().map(|z| z.norm_sqr()).sum::<f64>() < 1e-6 {
                return None;
            }
            SpinState::new(a.len() - 1, a).ok()
        })
}

fn direction() -> impl Strategy<Value = [f64; 3]> {
    (-1.0f64..1.0, 0.0f64..std::f64::consts::TAU).prop_map(|(z, p)| {
        let r = (1.0 - z * z).sqrt();
        [r * p.cos(), r * p.sin(), z]
    })
}

fn axis() -> impl Strategy<Value = [f64; 3]> {
    (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0).prop_filter_map("zero axis", |(x, y, z)| normalize([x, y, z]))
}

/// Directions with multiplicities, at most 8 stars in total.
fn degenerate_directions() -> impl Strategy<Value = Vec<[f64; 3]>> {
    prop::collection::vec((direction(), 1usize..=3), 1..=4).prop_map(|v| {
        let mut out = Vec::new();
        for (d, m) in v {
            for _ in 0..m {
                out.push(d);
            }
        }
        out
    })
}

fn rotate(v: [f64; 3], k: [f64; 3], angle: f64) -> [f64; 3] {
    let (s, c) = angle.sin_cos();
    let kxv = [k[1] * v[2] - k[2] * v[1], k[2] * v[0] - k[0] * v[2], k[0] * v[1] - k[1] * v[0]];
    let kv = dot(k, v);
    [0, 1, 2].map(|i| v[i] * c + kxv[i] * s + k[i] * kv * (1.0 - c))
}

fn well_separated(dirs: &[[f64; 3]]) -> bool {
    for (i, a) in dirs.iter().enumerate() {
        for b in &dirs[i + 1..] {
            let d = crate::stellar::chordal(*a, *b);
            if d > 0.0 && d < 0.05 {
                return false;
            }
        }
    }
    true
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stars_round_trip_to_the_same_ray(s in amplitudes(14)) {
        let back = stars_to_state(&stars_of(&s)).unwrap();
        prop_assert!(s.fidelity(&back).unwrap() > 1.0 - 1e-10);
    }

    #[test]
    fn rotations_move_stars_rigidly(s in amplitudes(8), k in axis(), angle in -3.0f64..3.0) {
        let before = stars_of(&s).expanded_directions();
        let after = stars_of(&s.rotated(k, angle).unwrap()).expanded_directions();
        let want: Vec<[f64; 3]> = before.iter().map(|d| rotate(*d, k, angle)).collect();
        prop_assert!(match_stars(&want, &after).1 < 1e-6);
    }

    #[test]
    fn classification_is_rotation_invariant(dirs in degenerate_directions(), k in axis(), angle in -3.0f64..3.0) {
        prop_assume!(well_separated(&dirs));
        let c = Constellation::from_directions(&dirs, DEFAULT_TOLERANCE, Convention::NorthAtZero).unwrap();
        let s = stars_to_state(&c).unwrap();
        let turned = stars_of(&s.rotated(k, angle).unwrap());
        let (a, b) = (classify(&stars_of(&s)), classify(&turned));
        prop_assert_eq!(&a.parts, &c.partition());
        prop_assert_eq!(a.parts, b.parts);
        prop_assert_eq!(a.slocc_label, b.slocc_label);
        prop_assert_eq!(a.petrov_label, b.petrov_label);
    }

    #[test]
    fn witnesses_are_sound(dirs in degenerate_directions()) {
        prop_assume!(well_separated(&dirs));
        let c = Constellation::from_directions(&dirs, DEFAULT_TOLERANCE, Convention::NorthAtZero).unwrap();
        let s = stars_to_state(&c).unwrap();
        let w = witnesses(&c, &multipoles(&s, s.two_s()).unwrap()).unwrap();
        // a positive distance product needs every star distinct
        prop_assert_eq!(w.distance_product_positive, !w.degenerate);
        prop_assert_eq!(w.stellar_rank == 1, c.stars.len() == 1);
        if c.stars.len() == 1 {
            // a coherent state has nonvanishing dipole
            prop_assert_eq!(w.anticoherence_order, 0);
        }
    }

    #[test]
    fn mean_pair_dot_follows_from_the_star_sum(s in amplitudes_between(2, 10)) {
        let c = stars_of(&s);
        let dirs = c.expanded_directions();
        let n = dirs.len() as f64;
        let sum = dirs.iter().fold([0.0; 3], |a, d| [a[0] + d[0], a[1] + d[1], a[2] + d[2]]);
        let want = (dot(sum, sum) - n) / (n * (n - 1.0));
        prop_assert!((pair_metrics(&c, false).unwrap().mean_pair_dot.unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn permanent_overlap_matches_inner_product(a in amplitudes(10), seed in any::<u64>()) {
        let b = crate::geometry::random_state(a.two_s(), seed);
        let direct = a.inner(&b).unwrap().norm();
        let perm = symmetric_overlap(&stars_of(&a), &stars_of(&b)).unwrap().norm();
        prop_assert!((direct - perm).abs() < 1e-9);
    }

    #[test]
    fn execution_modes_agree_exactly(s in amplitudes(8), n in 1usize..=9) {
        let m = nalgebra::DMatrix::from_fn(n, n, |i, j| s.amplitudes()[(i + j) % (s.two_s() + 1)]);
        prop_assert_eq!(permanent_ryser(&m, Exec::Sequential).unwrap(), permanent_ryser(&m, Exec::Parallel).unwrap());
        let grid = crate::geometry::icosphere(1);
        prop_assert_eq!(husimi_q(&s, &grid, Exec::Sequential).unwrap(), husimi_q(&s, &grid, Exec::Parallel).unwrap());
    }

    #[test]
    fn husimi_vanishes_at_star_antipodes(s in amplitudes(10)) {
        for d in husimi_zero_directions(&stars_of(&s)) {
            prop_assert!(husimi_at(&s, d).unwrap() < 1e-10);
        }
    }

    #[test]
    fn qfi_is_bounded_and_maximal_on_its_axis(s in amplitudes(10), k in axis()) {
        let n = s.two_s() as f64;
        let best = qfi(&s, QfiAxis::Optimal).unwrap().value;
        let along = qfi(&s, QfiAxis::Fixed(k)).unwrap().value;
        prop_assert!(along >= -1e-12 && along <= best + 1e-10);
        prop_assert!(best <= n * n + 1e-9);
    }

    #[test]
    fn three_tangle_routes_agree(s in amplitudes_between(3, 3)) {
        let t = three_tangle(&s).unwrap();
        prop_assert!((t.oracle - t.oracle_discriminant).abs() < 1e-10);
        prop_assert!(t.oracle >= 0.0 && t.oracle <= 1.0 + 1e-12);
    }
}
