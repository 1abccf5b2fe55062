use nonlocal::systems::maxwell_bloch::{self, psi};
use nonlocal::systems::{phi_quadrature, MaxwellBloch};
use nonlocal::verify::suites::maxwell_bloch_algebra_drift;
use nonlocal::verify::{drift, level_set, window_scale, LevelSetOptions};
use nonlocal::{integrate, IntegratorConfig, State};
use proptest::prelude::*;

fn with_channel(init: &State, t_end: f64) -> nonlocal::Trajectory<MaxwellBloch> {
    integrate(
        &MaxwellBloch,
        init,
        t_end,
        &IntegratorConfig::default(),
        &[MaxwellBloch::qdot3_sq_integrand()],
    )
    .unwrap()
}

#[test]
fn rearranged_constant_on_exact_orbits() {
    let stationary = State::new(0.0, vec![1.0, 3.0, 0.0], vec![3.0, -1.0, -1.0]);
    let tr = with_channel(&stationary, 20.0);
    let d = drift(&maxwell_bloch::rearranged_constant(&tr, 0.0).unwrap());
    assert!(d.max_rel < 1e-6, "{d}");

    let homoclinic = State::new(0.0, vec![2.0, 0.0, 0.0], vec![0.0, 0.0, -1.0]);
    let tr = with_channel(&homoclinic, 10.0);
    let d = drift(&maxwell_bloch::rearranged_constant(&tr, 0.0).unwrap());
    assert!(d.max_rel < 1e-6, "{d}");
    let r = maxwell_bloch::third_order_residual(&tr, tr.times()).unwrap();
    assert!(r.values.iter().all(|v| v.abs() < 1e-6));

    let rest = State::new(0.0, vec![0.0; 3], vec![0.0; 3]);
    let tr = with_channel(&rest, 5.0);
    let c = maxwell_bloch::rearranged_constant(&tr, 0.0).unwrap();
    assert!(c.values.iter().all(|&v| v == 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn first_integrals_are_conserved(
        q in prop::collection::vec(-2.0..2.0f64, 3),
        v in prop::collection::vec(-2.0..2.0f64, 3),
    ) {
        let init = State::new(0.0, q, v);
        let tr = integrate(&MaxwellBloch, &init, 20.0, &IntegratorConfig::default(), &[]).unwrap();
        let d = maxwell_bloch_algebra_drift(&tr).unwrap();
        prop_assert!(d.ebj < 100.0 * 1e-9, "{d:?}");
        prop_assert!(d.k_identity < 1e-8);
        prop_assert!(d.stripe_excess <= 1e-9);
        // ψ involves q̇₃³ and q̈₃², so it is checked one decade tighter
        let fine = IntegratorConfig::with_tolerances(1e-10, 1e-13);
        let tr = integrate(&MaxwellBloch, &init, 20.0, &fine, &[]).unwrap();
        prop_assert!(maxwell_bloch_algebra_drift(&tr).unwrap().psi < 1e-7);
    }

    #[test]
    fn level_set_vertices_lie_on_the_curve(
        e in 0.0..5.0f64,
        b in -3.0..3.0f64,
        k in -8.0..8.0f64,
        grid in 32usize..160,
    ) {
        let (ur, vr) = ((-4.0, 4.0), (-6.0, 6.0));
        let opts = LevelSetOptions { grid: (grid, grid + 7), ..LevelSetOptions::default() };
        let comps = level_set(e, b, k, ur, vr, &opts).unwrap();
        // linear interpolation error shrinks with the square of the cell size
        let h = 8.0 / (grid - 1) as f64;
        let tol = 1e-3 * window_scale(ur, vr) * (h / (8.0 / 255.0)).powi(2);
        for c in &comps {
            prop_assert!(!c.points.is_empty());
            for &(u, v) in &c.points {
                prop_assert!((psi(e, b, u, v) - k).abs() < tol.max(1e-12));
            }
        }
    }

    #[test]
    fn phi_measures_homoclinic_travel_time(t1 in 0.05..4.0f64, dt in 0.01..4.0f64) {
        let u = |t: f64| 1.0 - 2.0 / t.cosh().powi(2);
        let t2 = t1 + dt;
        let phi = phi_quadrature(u(t1), u(t2), 0.5, 1.0, 1.0).unwrap();
        prop_assert!((phi - dt).abs() < 1e-8 * (1.0 + dt), "{phi} vs {dt}");
    }
}
