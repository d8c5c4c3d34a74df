use proptest::prelude::*;
use subobstacle::group::{
    ball_volume_check, group_by_name, group_names, hnorm, homogeneous_dimension, left_invariance_check, quasi_constants,
    rational_samples, verify_group, Dilation, HomogeneousGroup,
};
use subobstacle::liealg::{
    bracket, hoermander_rank, homogeneity_degree, parse_field, parse_polynomial, rat, Polynomial, PolyVectorField,
};

const N: usize = 3;

fn poly() -> impl Strategy<Value = Polynomial> {
    prop::collection::vec((prop::collection::vec(0u32..3, N), -4i64..=4, 1i64..=3), 0..4).prop_map(|terms| {
        let mut p = Polynomial::zero(N);
        for (e, a, b) in terms {
            p.add_term(e, rat(a, b));
        }
        p
    })
}

fn field() -> impl Strategy<Value = PolyVectorField> {
    prop::collection::vec(poly(), N).prop_map(|c| PolyVectorField::with_weight(c, 1).unwrap())
}

fn point() -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-20i64..=20, N)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bracket_is_antisymmetric(x in field(), y in field()) {
        let a = bracket(&x, &y).unwrap();
        let b = bracket(&y, &x).unwrap();
        prop_assert!(a.add(&b).unwrap().is_zero());
        prop_assert!(bracket(&x, &x).unwrap().is_zero());
    }

    #[test]
    fn jacobi_identity(x in field(), y in field(), z in field()) {
        let t1 = bracket(&x, &bracket(&y, &z).unwrap()).unwrap();
        let t2 = bracket(&y, &bracket(&z, &x).unwrap()).unwrap();
        let t3 = bracket(&z, &bracket(&x, &y).unwrap()).unwrap();
        prop_assert!(t1.add(&t2).unwrap().add(&t3).unwrap().is_zero());
    }

    #[test]
    fn bracket_acts_as_commutator(x in field(), y in field(), f in poly()) {
        let lhs = bracket(&x, &y).unwrap().apply(&f);
        let rhs = &x.apply(&y.apply(&f)) - &y.apply(&x.apply(&f));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn product_evaluates_pointwise(p in poly(), q in poly(), x in point()) {
        let x: Vec<_> = x.iter().map(|&v| rat(v, 7)).collect();
        prop_assert_eq!((&p * &q).eval(&x), p.eval(&x) * q.eval(&x));
        prop_assert_eq!((&p - &q).eval(&x), p.eval(&x) - q.eval(&x));
    }

    #[test]
    fn polynomial_text_round_trip(p in poly()) {
        prop_assert_eq!(parse_polynomial(&p.to_string(), N).unwrap(), p);
    }

    #[test]
    fn field_text_round_trip(x in field()) {
        prop_assert_eq!(parse_field(&x.to_string(), N).unwrap(), x);
    }

    #[test]
    fn euclidean_frame_has_step_one(n in 1usize..6, seed in 0u64..1000) {
        let frame: Vec<_> = (0..n).map(|k| PolyVectorField::coordinate(n, k)).collect();
        let r = hoermander_rank(&frame, &rational_samples(n, 3, seed), 3).unwrap();
        prop_assert!(r.spans);
        prop_assert_eq!(r.step, Some(1));
    }

    #[test]
    fn hnorm_is_homogeneous(x in prop::collection::vec(-3.0f64..3.0, 5), lam in 0.05f64..20.0) {
        let d = Dilation::new(vec![1, 1, 2, 2, 3]).unwrap();
        let a = hnorm(&d.apply(lam, &x), &d);
        let b = lam * hnorm(&x, &d);
        prop_assert!((a - b).abs() <= 1e-10 * b.max(1e-300));
    }

    #[test]
    fn hnorm_is_one_on_the_unit_sphere(x in prop::collection::vec(-1.0f64..1.0, 5)) {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assume!(r > 1e-3);
        let u: Vec<f64> = x.iter().map(|v| v / r).collect();
        let d = Dilation::new(vec![1, 1, 2, 2, 3]).unwrap();
        prop_assert!((hnorm(&u, &d) - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn heisenberg_inverse_has_the_same_norm(x in prop::collection::vec(-2.0f64..2.0, 3)) {
        let g = group_by_name("heisenberg").unwrap();
        let a = hnorm(&x, g.dilation());
        let b = hnorm(&g.law().inverse(&x), g.dilation());
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
    }
}

fn fields(srcs: &[&str], n: usize) -> Vec<PolyVectorField> {
    srcs.iter().map(|s| parse_field(s, n).unwrap()).collect()
}

#[test]
fn example3_brackets() {
    let f = fields(&["d/dx1 - x1*x2*d/dx5", "d/dx2 + x1*d/dx4", "d/dx3 + x1*d/dx5"], 5);
    let xy = bracket(&f[0], &f[1]).unwrap();
    let xz = bracket(&f[0], &f[2]).unwrap();
    assert_eq!(xy.components(), parse_field("d/dx4 + x1*d/dx5", 5).unwrap().components());
    assert_eq!(xz.components(), parse_field("d/dx5", 5).unwrap().components());
}

#[test]
fn heisenberg_step_two() {
    let f = fields(&["d/dx1 + x2*d/dx3", "d/dx2 - x1*d/dx3"], 3);
    let r = hoermander_rank(&f, &rational_samples(3, 10, 1), 4).unwrap();
    assert_eq!((r.spans, r.step), (true, Some(2)));
    let short = hoermander_rank(&f, &rational_samples(3, 10, 1), 1).unwrap();
    assert!(!short.spans);
    assert!(short.ranks.iter().all(|&k| k == 2));
}

#[test]
fn grushin_fails_on_the_degenerate_line() {
    // X = d/dx1, Y = x1 d/dx2 only spans away from x1 = 0 at step 1
    let f = fields(&["d/dx1", "x1*d/dx2"], 2);
    let on_line = vec![vec![rat(0, 1), rat(3, 1)]];
    let r = hoermander_rank(&f, &on_line, 1).unwrap();
    assert!(!r.spans);
    let r = hoermander_rank(&f, &on_line, 2).unwrap();
    assert_eq!(r.step, Some(2));
}

#[test]
fn registered_groups_pass_except_the_printed_law() {
    for name in group_names() {
        let g = group_by_name(name).unwrap();
        let rep = verify_group(g.law(), g.dilation(), 50, 9);
        assert_eq!(rep.passed(), name != "example3-printed", "{name}: {rep:?}");
    }
}

#[test]
fn homogeneous_dimensions() {
    assert_eq!(homogeneous_dimension(&Dilation::new(vec![1, 1, 2, 2, 3]).unwrap()), 9);
    assert_eq!(homogeneous_dimension(&Dilation::new(vec![1, 1, 2]).unwrap()), 4);
    assert_eq!(group_by_name("kolmogorov").unwrap().q(), 6);
}

#[test]
fn left_invariant_heisenberg_fields() {
    let g = group_by_name("heisenberg").unwrap();
    for f in fields(&["d/dx1 + x2*d/dx3", "d/dx2 - x1*d/dx3", "d/dx3"], 3) {
        assert_eq!(left_invariance_check(&f, &g, 10, 2), 0.0, "{f}");
        assert!(homogeneity_degree(&f, g.dilation().sigma()).is_some());
    }
    // right-invariant fields are not left invariant
    let right = parse_field("d/dx1 - x2*d/dx3", 3).unwrap();
    assert!(left_invariance_check(&right, &g, 10, 2) > 0.0);
}

#[test]
fn group_text_round_trip() {
    for name in group_names() {
        let g = group_by_name(name).unwrap();
        let back = HomogeneousGroup::from_text(&g.to_text()).unwrap();
        assert_eq!(back.to_text(), g.to_text());
        assert_eq!(back.dilation().sigma(), g.dilation().sigma());
    }
}

#[test]
fn ball_volume_scales_like_r_to_the_q() {
    for name in ["euclidean", "heisenberg", "example3"] {
        let g = group_by_name(name).unwrap();
        for b in ball_volume_check(&g, &[0.5, 1.0, 2.0], 40_000, 3) {
            assert!((b.volume - b.predicted).abs() <= 3.0 * b.std_error, "{name}: {b:?}");
        }
    }
}

#[test]
fn quasi_triangle_constants_are_finite() {
    let g = group_by_name("heisenberg").unwrap();
    let c = quasi_constants(&g, 2000, 4);
    assert!(c.triangle >= 1.0 && c.triangle < 10.0, "{c:?}");
    assert!(c.symmetry >= 1.0 && c.symmetry < 10.0);
}
