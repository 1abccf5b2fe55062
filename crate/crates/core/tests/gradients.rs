use nonlocal::autodiff::{grad_q, grad_qdot};
use nonlocal::lagrangian::{euler_lagrange_residual, lagrangian_value};
use nonlocal::systems::{Dissipative, LaneEmden, MaxwellBloch, Potential, PotentialTable};
use nonlocal::{Lagrangian, State};
use proptest::prelude::*;

fn central_fd<L: Lagrangian>(sys: &L, s: &State, wrt_qdot: bool) -> Vec<f64> {
    (0..s.dim())
        .map(|i| {
            let h = 1e-6 * (1.0 + if wrt_qdot { s.qdot[i] } else { s.q[i] }.abs());
            let shifted = |d: f64| {
                let mut p = s.clone();
                if wrt_qdot {
                    p.qdot[i] += d;
                } else {
                    p.q[i] += d;
                }
                lagrangian_value(sys, &p).unwrap()
            };
            (shifted(h) - shifted(-h)) / (2.0 * h)
        })
        .collect()
}

fn assert_grads_match<L: Lagrangian>(sys: &L, s: &State) -> Result<(), TestCaseError> {
    let scale = 1.0 + lagrangian_value(sys, s).unwrap().abs();
    for (ad, fd) in [
        (
            grad_q(sys, s.t, &s.q, &s.qdot).unwrap(),
            central_fd(sys, s, false),
        ),
        (
            grad_qdot(sys, s.t, &s.q, &s.qdot).unwrap(),
            central_fd(sys, s, true),
        ),
    ] {
        for (a, f) in ad.iter().zip(&fd) {
            prop_assert!((a - f).abs() < 1e-6 * scale, "ad {a} fd {f} at {s}");
        }
    }
    Ok(())
}

fn coords(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, n)
}

fn table() -> Potential {
    Potential::Table(
        PotentialTable::new(
            vec![-2.0, -1.0, 0.0, 1.5, 2.5],
            vec![3.0, 0.5, 0.0, 1.0, 0.2],
        )
        .unwrap(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn dissipative_gradients(t in -3.0..3.0f64, q in coords(2), v in coords(2), k in 0.0..2.0f64) {
        for pot in [Potential::Zero, Potential::Quadratic { stiffness: 1.5 }, table()] {
            let sys = Dissipative::new(2, k, pot).unwrap();
            assert_grads_match(&sys, &State::new(t, q.clone(), v.clone()))?;
        }
    }

    #[test]
    fn lane_emden_gradients(t in 0.05..10.0f64, q in -2.0..2.0f64, v in -2.0..2.0f64, n in 0u32..8) {
        let sys = LaneEmden::new(n).unwrap();
        assert_grads_match(&sys, &State::new(t, vec![q], vec![v]))?;
    }

    #[test]
    fn maxwell_bloch_gradients(q in coords(3), v in coords(3)) {
        assert_grads_match(&MaxwellBloch, &State::new(0.0, q, v))?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn accelerations_solve_euler_lagrange(t in 0.1..5.0f64, q in coords(3), v in coords(3)) {
        let mb = euler_lagrange_residual(&MaxwellBloch, &State::new(t, q.clone(), v.clone())).unwrap();
        let diss = Dissipative::new(2, 0.7, table()).unwrap();
        let d = euler_lagrange_residual(&diss, &State::new(t, q[..2].to_vec(), v[..2].to_vec())).unwrap();
        let le = LaneEmden::new(3).unwrap();
        let l = euler_lagrange_residual(&le, &State::new(t, vec![q[0]], vec![v[0]])).unwrap();
        for r in mb.iter().chain(&d).chain(&l) {
            prop_assert!(r.abs() < 1e-6, "residual {r}");
        }
    }
}
