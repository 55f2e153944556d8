use dispkit::exact::{
    brute_force_oracle, dispersion_exact, exact, k_dispersion_exact, torus_dispersion_exact, Witness,
};
use dispkit::geometry::Region;
use dispkit::PointSet;
use proptest::prelude::*;

/// Coordinates on a coarse grid so that shared coordinates and duplicates
/// show up often.
fn grid_coord() -> impl Strategy<Value = f64> {
    prop_oneof![(0u32..=8).prop_map(|v| v as f64 / 8.0), 0.0f64..1.0]
}

fn point_set(max_d: usize, max_n: usize) -> impl Strategy<Value = PointSet> {
    (1..=max_d, 0..=max_n).prop_flat_map(|(d, n)| {
        prop::collection::vec(grid_coord(), d * n).prop_map(move |c| PointSet::new(d, c).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn adding_a_point_never_increases_dispersion(
        p in point_set(3, 8),
        q in prop::collection::vec(grid_coord(), 3),
    ) {
        let bigger = p.with_point(&q[..p.dim()]).unwrap();
        prop_assert!(dispersion_exact(&bigger).value <= dispersion_exact(&p).value);
        prop_assert!(torus_dispersion_exact(&bigger).value <= torus_dispersion_exact(&p).value);
    }

    #[test]
    fn k_dispersion_is_monotone_in_k(p in point_set(3, 8)) {
        let mut prev = 0.0;
        for k in 0..=p.len() {
            let v = k_dispersion_exact(&p, k).value;
            prop_assert!(v >= prev);
            prev = v;
        }
        prop_assert_eq!(prev, 1.0);
    }

    #[test]
    fn trivial_lower_bound_and_torus_domination(p in point_set(3, 12)) {
        let cube = dispersion_exact(&p).value;
        prop_assert!(cube >= 1.0 / (p.len() as f64 + 1.0) - 1e-12);
        prop_assert!(torus_dispersion_exact(&p).value >= cube);
    }

    #[test]
    fn half_the_points_leave_a_half_box(p in point_set(3, 10)) {
        let k = p.len().div_ceil(2);
        prop_assert!(k_dispersion_exact(&p, k).value >= 0.5);
    }

    #[test]
    fn witnesses_are_consistent(p in point_set(3, 9), k in 0usize..3, periodic in any::<bool>()) {
        let r = exact(&p, k, periodic);
        prop_assert!(r.witness.count_in(&p) <= k);
        prop_assert!((r.witness.volume() - r.value).abs() <= 1e-12);
        match &r.witness {
            Witness::Cube(b) => {
                prop_assert!(!periodic);
                prop_assert_eq!(r.attained, !b.open_left().iter().any(|&o| o));
            }
            Witness::Torus(b) => {
                prop_assert!(periodic);
                prop_assert_eq!(r.attained, !b.is_limit());
            }
        }
    }

    #[test]
    fn permuting_axes_permutes_the_problem(p in point_set(3, 9), rot in 0usize..3) {
        let d = p.dim();
        let perm: Vec<usize> = (0..d).map(|i| (i + rot) % d).collect();
        let q = p.permute_axes(&perm).unwrap();
        let (a, b) = (dispersion_exact(&p), dispersion_exact(&q));
        prop_assert!((a.value - b.value).abs() <= 1e-12 * a.value.max(1.0));
        prop_assert_eq!(b.witness.count_in(&q), 0);
        // the permuted witness of p is an optimal empty box for q
        let permuted: Vec<f64> = perm.iter().map(|&i| a.witness.sides()[i]).collect();
        let vol: f64 = permuted.iter().product();
        prop_assert!((vol - b.value).abs() <= 1e-12);
        let (ta, tb) = (torus_dispersion_exact(&p), torus_dispersion_exact(&q));
        prop_assert!((ta.value - tb.value).abs() <= 1e-12 * ta.value.max(1.0));
    }

    #[test]
    fn agrees_with_brute_force(p in point_set(3, 7), k in 0usize..3, periodic in any::<bool>()) {
        let fast = exact(&p, k, periodic);
        let slow = brute_force_oracle(&p, k, periodic).unwrap();
        prop_assert_eq!(fast.value, slow.value);
        prop_assert_eq!(fast.attained, slow.attained);
        prop_assert_eq!(fast.witness, slow.witness);
    }
}

#[test]
fn witness_membership_uses_open_faces() {
    let p = PointSet::from_points(2, &[[0.0, 0.5], [0.5, 0.0]]).unwrap();
    let r = dispersion_exact(&p);
    let Witness::Cube(b) = &r.witness else { panic!("cube witness expected") };
    for q in p.iter() {
        assert!(!b.contains(q).unwrap());
    }
    // [t, 1)^2 is empty for every t > 0
    assert_eq!(r.value, 1.0);
    assert_eq!(b.open_left(), &[true, true]);
    assert!(!r.attained);
}
