mod common;

use common::*;
use induction_sbp::diagnostics::{discrete_divergence, rel_l2_percent};
use induction_sbp::model::gaussian_hump;
use induction_sbp::propagate::{propagate, PropagateOptions};
use induction_sbp::stepper::{self, assemble, VelocityTerms};
use induction_sbp::*;
use proptest::prelude::*;

fn order() -> impl Strategy<Value = Order> {
    prop_oneof![Just(Order::Sbp2), Just(Order::Sbp4)]
}

fn velocity() -> impl Strategy<Value = VelocityField> {
    prop_oneof![
        Just(VelocityField::Rotation),
        Just(VelocityField::Shear),
        (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| VelocityField::Constant { a, b }),
        (-2.0..2.0f64, -2.0..2.0f64, 0.1..3.0f64)
            .prop_map(|(a, b, omega)| VelocityField::Oscillating { a, b, omega }),
    ]
}

fn grid(order: Order, nx: usize, ny: usize) -> Grid2D {
    let m = order.min_points();
    Grid2D::new(order, nx.max(m), ny.max(m), Rect::new(-1.0, 0.5, -0.25, 1.0).unwrap()).unwrap()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn scalar(rng: &mut rand_chacha::ChaCha8Rng, g: &Grid2D) -> ScalarField {
    ScalarField::from_values(g.nx(), g.ny(), random_vec(rng, g.len())).unwrap()
}

proptest! {
    #[test]
    fn sbp_identity_1d(order in order(), n in 4usize..80, seed in any::<u64>()) {
        let n = n.max(order.min_points());
        let op = SbpOperator1D::new(order, n, 0.37 / n as f64).unwrap();
        let mut r = rng(seed);
        let (v, w) = (random_vec(&mut r, n), random_vec(&mut r, n));
        let lhs = op.p_inner(&v, &op.apply_d(&w).unwrap()).unwrap()
            + op.p_inner(&op.apply_d(&v).unwrap(), &w).unwrap();
        let rhs = v[n - 1] * w[n - 1] - v[0] * w[0];
        prop_assert!((lhs - rhs).abs() <= 1e-12 * dot(&v, &v).sqrt() * dot(&w, &w).sqrt());
    }

    #[test]
    fn sbp_identity_2d(order in order(), nx in 4usize..30, ny in 4usize..30, seed in any::<u64>()) {
        let g = grid(order, nx, ny);
        let (nx, ny) = g.shape();
        let mut r = rng(seed);
        let (v, w) = (scalar(&mut r, &g), scalar(&mut r, &g));
        let scale = dot(&v.values, &v.values).sqrt() * dot(&w.values, &w.values).sqrt();
        let py = g.op_y().p_diag();
        let lx = g.p_inner(&v, &g.ddx(&w).unwrap()).unwrap() + g.p_inner(&g.ddx(&v).unwrap(), &w).unwrap();
        let rx: f64 = (0..ny).map(|j| py[j] * (v.at(nx - 1, j) * w.at(nx - 1, j) - v.at(0, j) * w.at(0, j))).sum();
        prop_assert!((lx - rx).abs() <= 1e-12 * scale);
    }

    #[test]
    fn diagonal_norm_moves_multipliers(order in order(), nx in 4usize..24, ny in 4usize..24, seed in any::<u64>()) {
        let g = grid(order, nx, ny);
        let mut r = rng(seed);
        let (u, v) = (scalar(&mut r, &g), scalar(&mut r, &g));
        for d in [g.ddx(&v).unwrap(), g.ddy(&v).unwrap()] {
            let lhs = g.p_inner(&u.hadamard(&d), &v).unwrap();
            let rhs = g.p_inner(&d, &u.hadamard(&v)).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
        }
    }

    #[test]
    fn polynomials_differentiated_exactly(order in order(), n in 4usize..60, c in prop::array::uniform3(-2.0..2.0f64)) {
        let n = n.max(order.min_points());
        let h = 1.0 / (n as f64 - 1.0);
        let op = SbpOperator1D::new(order, n, h).unwrap();
        // boundary closures are exact to degree 1 (SBP2) and 2 (SBP4)
        let deg2 = order == Order::Sbp4;
        let f: Vec<f64> = (0..n).map(|i| {
            let x = i as f64 * h;
            c[0] + c[1] * x + if deg2 { c[2] * x * x } else { 0.0 }
        }).collect();
        let d = op.apply_d(&f).unwrap();
        for (i, di) in d.iter().enumerate() {
            let x = i as f64 * h;
            let want = c[1] + if deg2 { 2.0 * c[2] * x } else { 0.0 };
            prop_assert!((di - want).abs() < 1e-10);
        }
    }

    #[test]
    fn commutator_is_bounded(order in order(), k in 0.5..3.0f64, phase in 0.0..6.3f64, seed in any::<u64>()) {
        let mut r = rng(seed);
        for n in [25usize, 50, 100, 200] {
            let op = SbpOperator1D::new(order, n, 1.0 / (n as f64 - 1.0)).unwrap();
            let u: Vec<f64> = (0..n).map(|i| (k * i as f64 * op.dx() + phase).sin()).collect();
            let w = random_vec(&mut r, n);
            let uw: Vec<f64> = u.iter().zip(&w).map(|(a, b)| a * b).collect();
            let dw = op.apply_d(&w).unwrap();
            let c: Vec<f64> = op.apply_d(&uw).unwrap().iter().zip(u.iter().zip(&dw)).map(|(a, (u, d))| a - u * d).collect();
            let ratio = (op.p_inner(&c, &c).unwrap() / op.p_inner(&w, &w).unwrap()).sqrt();
            prop_assert!(ratio <= 1.5 * k, "n={} ratio={} k={}", n, ratio, k);
        }
    }

    #[test]
    fn kronecker_oracle(order in order(), nx in 4usize..16, ny in 4usize..16, seed in any::<u64>()) {
        let g = grid(order, nx, ny);
        let mut r = rng(seed);
        let v = scalar(&mut r, &g);
        prop_assert!(max_diff(&g.ddx(&v).unwrap().values, &matvec(&kron_dx(&g), &v.values)) <= 1e-13 * g.len() as f64);
        prop_assert!(max_diff(&g.ddy(&v).unwrap().values, &matvec(&kron_dy(&g), &v.values)) <= 1e-13 * g.len() as f64);
    }

    #[test]
    fn p_norm_is_a_norm(order in order(), nx in 4usize..20, ny in 4usize..20, seed in any::<u64>()) {
        let g = grid(order, nx, ny);
        let v = scalar(&mut rng(seed), &g);
        let n = g.p_norm(&v).unwrap();
        prop_assert!((n * n - g.p_inner(&v, &v).unwrap()).abs() <= 1e-14 * n * n);
        prop_assert!(n > 0.0);
        prop_assert_eq!(g.p_norm(&g.zeros()).unwrap(), 0.0);
    }

    #[test]
    fn sat_dissipative_and_linear(order in order(), vel in velocity(), t in 0.0..3.0f64, seed in any::<u64>()) {
        let g = grid(order, 14, 17);
        let (nx, ny) = g.shape();
        let mut r = rng(seed);
        let (v, gv) = (random_field(&mut r, &g), random_field(&mut r, &g));
        let pen = PenaltySet::for_velocity(&vel, &g, t);
        let zero = VectorField2::zeros(nx, ny);
        let bv = pen.apply(&g, &v, &zero).unwrap();
        let e = g.p_inner_vector(&v, &bv).unwrap();
        let (px, py) = (g.op_x().p_diag(), g.op_y().p_diag());
        let mut want = 0.0;
        for c in [&v.b1, &v.b2] {
            for j in 0..ny {
                want += py[j] * (pen.sigma_l[j] * c.at(0, j).powi(2) + pen.sigma_r[j] * c.at(nx - 1, j).powi(2));
            }
            for i in 0..nx {
                want += px[i] * (pen.sigma_d[i] * c.at(i, 0).powi(2) + pen.sigma_u[i] * c.at(i, ny - 1).powi(2));
            }
        }
        prop_assert!(e <= 1e-14 * e.abs().max(1.0));
        prop_assert!((e - want).abs() <= 1e-12 * want.abs().max(1.0));
        let lhs = pen.apply(&g, &v, &gv).unwrap();
        let rhs = bv.sub(&pen.apply(&g, &gv, &zero).unwrap());
        prop_assert!(lhs.sub(&rhs).max_abs() <= 1e-12 * lhs.max_abs().max(1.0));
    }

    #[test]
    fn outflow_faces_are_transparent(a in 0.1..2.0f64, b in 0.1..2.0f64, seed in any::<u64>()) {
        // flow towards +x and +y leaves through the right and top faces
        let g = grid(Order::Sbp2, 9, 11);
        let (nx, ny) = g.shape();
        let pen = PenaltySet::for_velocity(&VelocityField::Constant { a, b }, &g, 0.0);
        let v = random_field(&mut rng(seed), &g);
        let out = pen.apply(&g, &v, &VectorField2::zeros(nx, ny)).unwrap();
        for j in 1..ny {
            prop_assert_eq!(out.b1.at(nx - 1, j), 0.0);
        }
        for i in 1..nx {
            prop_assert_eq!(out.b2.at(i, ny - 1), 0.0);
        }
        prop_assert!(pen.sigma_r.iter().chain(&pen.sigma_u).all(|&s| s == 0.0));
    }

    #[test]
    fn divergence_linear_and_error_scale_free(order in order(), alpha in 0.1..10.0f64, seed in any::<u64>()) {
        let g = grid(order, 15, 15);
        let mut r = rng(seed);
        let (a, b) = (random_field(&mut r, &g), random_field(&mut r, &g));
        let lhs = discrete_divergence(&g, &a.scaled(alpha).add(&b)).unwrap();
        let rhs = discrete_divergence(&g, &a).unwrap().scaled(alpha).add(&discrete_divergence(&g, &b).unwrap());
        prop_assert!(lhs.sub(&rhs).max_abs() <= 1e-12 * lhs.max_abs().max(1.0));
        let e1 = rel_l2_percent(&g, &a, &b).unwrap();
        let e2 = rel_l2_percent(&g, &a.scaled(-alpha), &b.scaled(-alpha)).unwrap();
        prop_assert!((e1 - e2).abs() <= 1e-12 * e1.max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn assembled_matches_dense(order in order(), vel in velocity(), t in 0.0..2.0f64, seed in any::<u64>()) {
        let g = grid(order, 6, 7);
        let dense = DenseTerms::new(&g, &vel, t).operator();
        let v = random_field(&mut rng(seed), &g);
        let want = matvec(&dense, &v.to_stacked());
        let got = assemble(&g, &vel, t).unwrap().apply(&g, &v).unwrap().to_stacked();
        prop_assert!(max_diff(&got, &want) <= 1e-13 * max_abs(&want).max(1.0));
    }

    #[test]
    fn energy_bookkeeping(order in order(), vel in velocity(), dt in 0.001..0.5f64, seed in any::<u64>()) {
        let g = grid(order, 13, 12);
        let spec = ProblemSpec { velocity: vel, ..ProblemSpec::rotating_hump() };
        let mut st = Stepper::new(&g, spec).unwrap().with_solver(LinearSolver::Direct);
        let s0 = StepperState { v: random_field(&mut rng(seed), &g), t: 0.2, n: 0 };
        let s1 = st.backward_euler_step(&s0, dt).unwrap();
        let (v0, v1) = (&s0.v, &s1.v);
        let t1 = 0.2 + dt;
        let lhs = 0.5 * g.p_inner_vector(v1, v1).unwrap() - 0.5 * g.p_inner_vector(v0, v0).unwrap()
            + 0.5 * g.p_inner_vector(&v1.sub(v0), &v1.sub(v0)).unwrap();
        let terms = VelocityTerms::new(&g, &vel, t1).unwrap();
        let (u1, u2) = vel.sample(&g, t1);
        let pen = PenaltySet::for_velocity(&vel, &g, t1);
        let zero = VectorField2::zeros(g.nx(), g.ny());
        let mut rhs = 0.0;
        for c in [&v1.b1, &v1.b2] {
            rhs -= g.p_inner(c, &u1.hadamard(&g.ddx(c).unwrap())).unwrap();
            rhs -= g.p_inner(c, &u2.hadamard(&g.ddy(c).unwrap())).unwrap();
        }
        rhs += g.p_inner_vector(v1, &terms.apply_c(v1)).unwrap();
        rhs += g.p_inner_vector(v1, &pen.apply(&g, v1, &zero).unwrap()).unwrap();
        rhs *= dt;
        prop_assert!((lhs - rhs).abs() <= 1e-11 * g.p_inner_vector(v0, v0).unwrap());
    }

    #[test]
    fn energy_growth_is_bounded(order in order(), vel in velocity(), dt in 0.001..1.0f64, seed in any::<u64>()) {
        let g = grid(order, 16, 14);
        let spec = ProblemSpec { velocity: vel, ..ProblemSpec::rotating_hump() };
        let mut st = Stepper::new(&g, spec).unwrap();
        let s0 = StepperState { v: random_field(&mut rng(seed), &g), t: 0.0, n: 0 };
        let s1 = st.backward_euler_step(&s0, dt).unwrap();
        let (e0, e1) = (g.p_inner_vector(&s0.v, &s0.v).unwrap(), g.p_inner_vector(&s1.v, &s1.v).unwrap());
        // velocity gradients of the catalogue fields are at most 1
        let c = 4.0;
        prop_assert!(e1 <= e0 + c * dt * e1, "e0={} e1={} c={}", e0, e1, c);
    }

    #[test]
    fn upwind_1d_matches_dense(dt in 0.01..0.5f64, seed in any::<u64>()) {
        let n = 12;
        let g = Grid2D::new(Order::Sbp2, n, 5, Rect::UNIT).unwrap();
        let line = random_vec(&mut rng(seed), n);
        let v0 = g.sample_vector(|x, _| {
            let i = (x * (n - 1) as f64).round() as usize;
            (line[i], -line[i])
        });
        let spec = ProblemSpec {
            velocity: VelocityField::Constant { a: 1.0, b: 0.0 },
            initial: InitialData::Zero,
            boundary: BoundaryMode::ZeroG,
            domain: Rect::UNIT,
            final_time: dt,
        };
        let mut st = Stepper::new(&g, spec).unwrap();
        let s1 = st.backward_euler_step(&StepperState { v: v0, t: 0.0, n: 0 }, dt).unwrap();
        let op = SbpOperator1D::new(Order::Sbp2, n, 1.0 / (n as f64 - 1.0)).unwrap();
        let mut m = dense_d(&op);
        m[0][0] += 0.5 / op.p_diag()[0];
        for (r, row) in m.iter_mut().enumerate() {
            for a in row.iter_mut() {
                *a *= dt;
            }
            row[r] += 1.0;
        }
        let want = solve_dense(m, line.clone());
        for j in 0..g.ny() {
            for i in 0..n {
                prop_assert!((s1.v.b1.at(i, j) - want[i]).abs() <= 1e-10);
                prop_assert!((s1.v.b2.at(i, j) + want[i]).abs() <= 1e-10);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn first_order_in_time(order in order(), dt in 0.01..0.04f64) {
        let g = grid(order, 16, 16);
        let spec = ProblemSpec { final_time: 0.4, domain: g.domain(), ..ProblemSpec::rotating_hump() };
        let run = |dt: f64| stepper::run(&spec, &g, DtRule::Fixed(dt), &[], Vec::new()).unwrap().final_state.v;
        let (a, b, c) = (run(dt), run(dt / 2.0), run(dt / 4.0));
        let ratio = g.p_norm_vector(&a.sub(&b)).unwrap() / g.p_norm_vector(&b.sub(&c)).unwrap();
        prop_assert!((1.8..2.2).contains(&ratio), "ratio {}", ratio);
    }

    #[test]
    fn propagation_matches_stepping(order in order(), dt in 0.002..0.01f64, seed in any::<u64>()) {
        let g = grid(order, 18, 15);
        let spec = ProblemSpec { final_time: 0.9, domain: g.domain(), ..ProblemSpec::rotating_hump() };
        let v0 = random_field(&mut rng(seed), &g).add(&gaussian_hump(&g));
        let times = TimeGrid::new(dt, spec.final_time).unwrap();
        let mut st = Stepper::new(&g, spec).unwrap();
        let mut s = StepperState { v: v0.clone(), t: 0.0, n: 0 };
        for n in 1..=times.steps {
            s = st.backward_euler_step(&s, times.step_size(n)).unwrap();
        }
        let opts = PropagateOptions { direct_steps: 0, ..PropagateOptions::default() };
        let p = propagate(&g, &spec, &times, &v0, opts).unwrap();
        let err = g.p_norm_vector(&p.v.sub(&s.v)).unwrap() / g.p_norm_vector(&s.v).unwrap();
        prop_assert!(err <= 1e-9, "err {:e}", err);
    }
}
