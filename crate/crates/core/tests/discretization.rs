use proptest::prelude::*;
use subobstacle::bench::{build_example, BENCHMARKS};
use subobstacle::liealg::{parse_field, rat, Polynomial, PolyVectorField};
use subobstacle::operator::{CoefficientField, ObstacleData, OperatorSpec};
use subobstacle::pde::sparse::{bicgstab, inf_norm, solve_sparse};
use subobstacle::pde::{
    assemble, discretize_first, discretize_second, max_principle_witness, read_grid_csv, solve_linear, write_grid_csv,
    Csr, Grid, Scheme,
};

fn random_poly(n: usize, deg: u32) -> impl Strategy<Value = Polynomial> {
    prop::collection::vec((prop::collection::vec(0u32..=deg, n), -5i64..=5), 1..6).prop_map(move |terms| {
        let mut p = Polynomial::zero(n);
        for (mut e, c) in terms {
            // trim to total degree ≤ deg
            while e.iter().sum::<u32>() > deg {
                let k = e.iter().position(|&v| v > 0).unwrap();
                e[k] -= 1;
            }
            p.add_term(e, rat(c, 1));
        }
        p
    })
}

fn linear_field(n: usize) -> impl Strategy<Value = PolyVectorField> {
    prop::collection::vec(random_poly(n, 1), n).prop_map(|c| PolyVectorField::with_weight(c, 1).unwrap())
}

fn max_err(m: &Csr, grid: &Grid, u: &Polynomial, exact: &Polynomial) -> (f64, f64) {
    let uv = grid.sample(|x| u.eval_f64(x));
    let got = m.matvec(&uv);
    let want = grid.sample(|x| exact.eval_f64(x));
    let scale = want.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
    (got.iter().zip(&want).fold(0.0_f64, |a, (g, w)| a.max((g - w).abs())), scale)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn stencils_are_exact_on_quadratics(
        u in random_poly(2, 2),
        xi in linear_field(2),
        xj in linear_field(2),
        m0 in 4usize..9,
        m1 in 4usize..9,
    ) {
        let grid = Grid::new(vec![-1.0, 0.5], vec![1.0, 2.0], vec![m0, m1]).unwrap();
        let d = discretize_first(&xi, &grid, Scheme::Centered).unwrap();
        let (e, s) = max_err(&d, &grid, &u, &xi.apply(&u));
        prop_assert!(e <= 1e-10 * s, "first: {}", e);
        let d2 = discretize_second(&xi, &xj, &grid).unwrap();
        let (e, s) = max_err(&d2, &grid, &u, &xi.apply(&xj.apply(&u)));
        prop_assert!(e <= 1e-10 * s, "second: {}", e);
    }

    #[test]
    fn stencils_are_exact_in_3d(u in random_poly(3, 2), xi in linear_field(3), xj in linear_field(3)) {
        let grid = Grid::new(vec![0.0, -1.0, 0.0], vec![1.0, 1.0, 2.0], vec![5, 6, 4]).unwrap();
        let d2 = discretize_second(&xi, &xj, &grid).unwrap();
        let (e, s) = max_err(&d2, &grid, &u, &xi.apply(&xj.apply(&u)));
        prop_assert!(e <= 1e-10 * s, "{}", e);
    }

    #[test]
    fn upwind_is_exact_on_linear_functions(u in random_poly(2, 1), x in linear_field(2)) {
        let grid = Grid::new(vec![-1.0, -1.0], vec![1.0, 1.0], vec![7, 5]).unwrap();
        let d = discretize_first(&x, &grid, Scheme::Upwind).unwrap();
        let (e, s) = max_err(&d, &grid, &u, &x.apply(&u));
        prop_assert!(e <= 1e-10 * s);
    }

    #[test]
    fn csv_round_trip(vals in prop::collection::vec(-1e6f64..1e6, 12), lo in -5.0f64..0.0) {
        let g = Grid::new(vec![lo, 0.0], vec![lo + 1.0, 3.0], vec![3, 4]).unwrap();
        let mut buf = Vec::new();
        write_grid_csv(&mut buf, &g, &vals).unwrap();
        let back = read_grid_csv(std::io::Cursor::new(buf)).unwrap();
        prop_assert_eq!(back.values, vals);
        for (i, p) in back.points.iter().enumerate() {
            prop_assert_eq!(p, &g.point(i));
        }
    }
}

fn order(errs: &[f64]) -> f64 {
    let k = errs.len();
    (errs[k - 2] / errs[k - 1]).log2().min((errs[k - 3] / errs[k - 2]).log2())
}

/// Max error at interior nodes of `stencil` applied to sin(x1) e^{x2}.
fn smooth_errors(build: impl Fn(&Grid) -> (Csr, Box<dyn Fn(&[f64]) -> f64>)) -> Vec<f64> {
    [17, 33, 65, 129]
        .iter()
        .map(|&m| {
            let grid = Grid::new(vec![0.0, 0.0], vec![1.0, 1.0], vec![m, m]).unwrap();
            let (op, exact) = build(&grid);
            let u = grid.sample(|x| x[0].sin() * x[1].exp());
            let du = op.matvec(&u);
            grid.interior().iter().fold(0.0_f64, |a, &i| a.max((du[i] - exact(&grid.point(i))).abs()))
        })
        .collect()
}

#[test]
fn truncation_orders() {
    // X = (1 + x2) d/dx1 + x1 d/dx2 applied to u = sin(x1) e^{x2}
    let x = parse_field("(1 + x2)*d/dx1 + x1*d/dx2", 2).unwrap();
    let xu = |p: &[f64]| ((1.0 + p[1]) * p[0].cos() + p[0] * p[0].sin()) * p[1].exp();
    let centered = smooth_errors(|g| (discretize_first(&x, g, Scheme::Centered).unwrap(), Box::new(xu)));
    let upwind = smooth_errors(|g| (discretize_first(&x, g, Scheme::Upwind).unwrap(), Box::new(xu)));
    // X X u
    let xxu = |p: &[f64]| {
        let (s, c, e) = (p[0].sin(), p[0].cos(), p[1].exp());
        let a = 1.0 + p[1];
        // X(a c e + x1 s e) with a = 1 + x2
        a * (-a * s * e + s * e + p[0] * c * e) + p[0] * (c * e + a * c * e + p[0] * s * e)
    };
    let second = smooth_errors(|g| (discretize_second(&x, &x, g).unwrap(), Box::new(xxu)));
    assert!(order(&centered) >= 1.8, "{centered:?}");
    assert!(order(&upwind) >= 0.9, "{upwind:?}");
    assert!(order(&second) >= 1.8, "{second:?}");
}

#[test]
fn heat_solution_converges() {
    // u = sin(pi x) e^{-t} + x t solves u_xx - u_t - u = f
    let pi = std::f64::consts::PI;
    let exact = move |p: &[f64]| (pi * p[0]).sin() * (-p[1]).exp() + p[0] * p[1];
    let f = move |p: &[f64]| {
        let s = (pi * p[0]).sin() * (-p[1]).exp();
        -pi * pi * s + s - p[0] - (s + p[0] * p[1])
    };
    let spec = OperatorSpec::standard(Some(parse_field("d/dx2", 2).unwrap()), vec![parse_field("d/dx1", 2).unwrap()], -1.0)
        .unwrap();
    let data = ObstacleData {
        f: CoefficientField::function(f),
        g: CoefficientField::function(exact),
        phi: CoefficientField::constant(-1e6),
        mu: 0.0,
    };
    let errs: Vec<f64> = [17, 33, 65, 129]
        .iter()
        .map(|&m| {
            let grid = Grid::uniform(0.0, 1.0, 2, m).unwrap();
            let asm = assemble(&spec, &data, &grid, 0.0).unwrap();
            let ui = solve_linear(&asm.op, &asm.rhs, 1e-11, 10_000).unwrap();
            asm.op.interior.iter().zip(&ui).fold(0.0_f64, |a, (&i, v)| a.max((v - exact(&grid.point(i))).abs()))
        })
        .collect();
    // implicit in t: first order overall
    assert!(order(&errs) >= 0.9, "{errs:?}");
}

fn laplacian(m: usize) -> Csr {
    let grid = Grid::uniform(0.0, 1.0, 2, m + 2).unwrap();
    let spec = OperatorSpec::standard(None, vec![parse_field("d/dx1", 2).unwrap(), parse_field("d/dx2", 2).unwrap()], -1.0)
        .unwrap();
    let data = ObstacleData {
        f: CoefficientField::constant(1.0),
        g: CoefficientField::constant(0.0),
        phi: CoefficientField::constant(-1.0),
        mu: 0.0,
    };
    assemble(&spec, &data, &grid, 0.0).unwrap().op.matrix
}

#[test]
fn iterative_and_direct_solves_agree() {
    let a = laplacian(30);
    let b: Vec<f64> = (0..a.rows).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect();
    let (x, info) = bicgstab(&a, &b, None, 1e-10, 5000).unwrap();
    assert!(info.residual <= 1e-10);
    let dense = a.to_dense().lu().solve(&nalgebra::DVector::from_vec(b.clone())).unwrap();
    let d = x.iter().zip(dense.iter()).fold(0.0_f64, |m, (p, q)| m.max((p - q).abs()));
    assert!(d < 1e-9, "{d}");
    let (y, _) = solve_sparse(&a, &b, None, 1e-10, 5000).unwrap();
    let r: Vec<f64> = a.matvec(&y).iter().zip(&b).map(|(p, q)| p - q).collect();
    assert!(inf_norm(&r) <= 1e-10);
}

#[test]
fn benchmarks_assemble_to_m_matrices() {
    for name in BENCHMARKS {
        let p = build_example(name).unwrap().with_nodes(&[7]).unwrap();
        let asm = assemble(&p.spec, &p.data, &p.grid, 0.0).unwrap();
        assert!(asm.op.monotone, "{name}");
        assert!(asm.op.matrix.has_monotone_sign_pattern(), "{name}");
        let worst = max_principle_witness(&asm.op, 5, 1).unwrap();
        assert!(worst <= 1e-8, "{name}: {worst}");
        let five_d = p.grid.dim() == 5;
        assert_eq!(asm.op.stabilized_rows > 0, five_d, "{name}");
    }
}
