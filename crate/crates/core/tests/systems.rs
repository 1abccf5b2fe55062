use nonlocal::autodiff::grad_q;
use nonlocal::integrate::lane_emden_series_start;
use nonlocal::lagrangian::{acceleration, integrand_m, momentum};
use nonlocal::systems::dissipative::{self, estimates};
use nonlocal::systems::lane_emden::{self, asymptotics};
use nonlocal::systems::maxwell_bloch::third_order_residual_at;
use nonlocal::systems::{Dissipative, LaneEmden, LaneEmdenConstant, MaxwellBloch, Potential};
use nonlocal::{
    action, integrate, integrate_two_sided, Integrand, IntegratorConfig, State, VariationField,
    Warp,
};

fn close(a: f64, b: f64, tol: f64) {
    assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
}

#[test]
fn momenta_and_gradients_at_sample_states() {
    let free = Dissipative::new(1, 1.0, Potential::Zero).unwrap();
    assert_eq!(
        momentum(&free, &State::new(0.0, vec![0.0], vec![2.0])).unwrap(),
        vec![2.0]
    );

    let mb = State::new(0.0, vec![1.0, 3.0, 0.0], vec![3.0, -1.0, -1.0]);
    assert_eq!(momentum(&MaxwellBloch, &mb).unwrap(), vec![3.0, -1.0, 4.0]);
    assert_eq!(
        grad_q(&MaxwellBloch, 0.0, &mb.q, &mb.qdot).unwrap(),
        vec![-1.0, -3.0, 0.0]
    );

    let le5 = LaneEmden::new(5).unwrap();
    assert_eq!(
        momentum(&le5, &State::new(2.0, vec![1.0], vec![0.0])).unwrap(),
        vec![0.0]
    );
    let le3 = LaneEmden::new(3).unwrap();
    assert_eq!(grad_q(&le3, 2.0, &[1.0], &[0.0]).unwrap(), vec![-4.0]);
}

#[test]
fn family_integrands_at_sample_states() {
    let free = Dissipative::new(1, 1.0, Potential::Zero).unwrap();
    let s = State::new(0.0, vec![0.0], vec![1.0]);
    let m = integrand_m(&free, &free.family(1.0), &s, &acceleration(&free, &s)).unwrap();
    assert_eq!(m, 0.0);

    let le = LaneEmden::new(3).unwrap();
    let s = State::new(1.5, vec![0.7], vec![0.0]);
    let m = integrand_m(
        &le,
        &le.family(LaneEmdenConstant::Second),
        &s,
        &acceleration(&le, &s),
    );
    assert_eq!(m.unwrap(), 0.0);

    let f = MaxwellBloch::family(-2.0);
    for s in [
        State::new(0.0, vec![1.0, 3.0, 0.5], vec![3.0, -1.0, -1.0]),
        State::new(0.0, vec![-0.4, 1.2, 2.0], vec![0.3, 0.9, 1.7]),
    ] {
        let m = integrand_m(&MaxwellBloch, &f, &s, &acceleration(&MaxwellBloch, &s)).unwrap();
        let e = MaxwellBloch::first_integrals(&s).unwrap().e;
        close(m, 2.0 * e - 3.0 * s.qdot[2] * s.qdot[2], 1e-13);
    }
}

#[test]
fn family_jets() {
    let s = State::new(2.0, vec![1.5], vec![-0.5]);
    let qddot = [0.25];
    let jet = |f: &VariationField| {
        let (mut dq, mut dv) = ([0.0], [0.0]);
        f.jet(s.t, &s.q, &s.qdot, &qddot, &mut dq, &mut dv);
        (dq[0], dv[0])
    };
    let (dq, dv) = jet(&VariationField::time_shift(Warp::Power {
        coeff: -1.0,
        exponent: -2.0,
    }));
    close(dq, 0.125, 1e-15);
    close(dv, 2.0 / 8.0 * -0.5 - 0.25 * 0.25, 1e-15);
    let (dq, dv) = jet(&VariationField::scaling(vec![1.0], 1.0));
    close(dq, 1.5 + 2.0 * -0.5, 1e-15);
    close(dv, -0.5 + (-0.5 + 2.0 * 0.25), 1e-15);
    assert_eq!(jet(&VariationField::scaling(vec![0.0], 0.0)), (0.0, 0.0));
}

#[test]
fn action_of_damped_free_particle() {
    let sys = Dissipative::new(1, 1.0, Potential::Zero).unwrap();
    let init = State::new(0.0, vec![0.0], vec![1.0]);
    let tr = integrate(
        &sys,
        &init,
        1.0,
        &IntegratorConfig::default(),
        &[Integrand::Action],
    )
    .unwrap();
    close(
        action(&tr, 0.0, 1.0).unwrap(),
        0.5 * (1.0 - (-1f64).exp()),
        1e-10,
    );

    let still = Dissipative::new(1, 0.0, Potential::Zero).unwrap();
    let init = State::new(0.0, vec![0.3], vec![0.0]);
    let tr = integrate(
        &still,
        &init,
        2.0,
        &IntegratorConfig::default(),
        &[Integrand::Action],
    )
    .unwrap();
    assert_eq!(action(&tr, 0.0, 2.0).unwrap(), 0.0);
}

fn oscillator() -> (Dissipative, State) {
    let sys = Dissipative::new(2, 0.5, Potential::Quadratic { stiffness: 1.0 }).unwrap();
    (sys, State::new(0.0, vec![1.0, -0.5], vec![0.3, 0.8]))
}

#[test]
fn zero_rate_constant_is_energy_plus_action() {
    let (sys, init) = oscillator();
    let mut channels = sys.integrands(&[0.0]);
    channels.push(Integrand::Action);
    let tr = integrate(&sys, &init, 8.0, &IntegratorConfig::default(), &channels).unwrap();
    let series = dissipative::rearranged_constant(&tr, 0.0, 0.0).unwrap();
    for (i, &t) in series.times.iter().enumerate() {
        let s = tr.node_state(i);
        let expected = 2.0 * sys.dissipative_energy(t, &s.q, &s.qdot)
            + 2.0 * sys.k() * action(&tr, 0.0, t).unwrap();
        close(series.values[i], expected, 1e-8);
    }
}

#[test]
fn negative_rate_constant_is_twice_the_energy_balance() {
    let (sys, init) = oscillator();
    let k = sys.k();
    let tr = integrate(
        &sys,
        &init,
        8.0,
        &IntegratorConfig::default(),
        &sys.integrands(&[-k]),
    )
    .unwrap();
    let series = dissipative::rearranged_constant(&tr, -k, 0.0).unwrap();
    let speed = tr.channel_named(&sys.speed_sq_integrand().name()).unwrap();
    for i in 0..tr.node_count() {
        let s = tr.node_sample(i);
        let balance = 2.0 * sys.energy(&s.state.q, &s.state.qdot) + 2.0 * k * s.acc[speed];
        close(series.values[i], balance, 1e-9);
    }
}

#[test]
fn positive_rate_constant_of_free_motion_is_one() {
    let sys = Dissipative::new(1, 1.0, Potential::Zero).unwrap();
    let init = State::new(0.0, vec![0.0], vec![1.0]);
    let tr = integrate(
        &sys,
        &init,
        6.0,
        &IntegratorConfig::default(),
        &sys.integrands(&[1.0]),
    )
    .unwrap();
    for v in dissipative::rearranged_constant(&tr, 1.0, 0.0)
        .unwrap()
        .values
    {
        close(v, 1.0, 1e-8);
    }
}

#[test]
fn free_motion_estimates_are_sharp() {
    let sys = Dissipative::new(1, 1.0, Potential::Zero).unwrap();
    let init = State::new(0.0, vec![0.0], vec![1.0]);
    let cfg = IntegratorConfig::default();
    let tr = integrate_two_sided(&sys, &init, -3.0, 5.0, &cfg, &sys.integrands(&[])).unwrap();
    let est = estimates(&tr, 0.0, 1e-9).unwrap();
    assert!(est.all_hold(), "{est:?}");
    assert!(est.past_energy.unwrap().max_rel_gap < 1e-9);
    assert!(est.past_speed.unwrap().max_rel_gap < 1e-9);
}

#[test]
fn oscillator_estimates_hold_with_margin() {
    let sys = Dissipative::new(1, 0.5, Potential::Quadratic { stiffness: 1.0 }).unwrap();
    let init = State::new(0.0, vec![1.0], vec![0.0]);
    let cfg = IntegratorConfig::default();
    let tr = integrate_two_sided(&sys, &init, -4.0, 10.0, &cfg, &sys.integrands(&[])).unwrap();
    let est = estimates(&tr, 0.0, 1e-9).unwrap();
    assert!(est.all_hold(), "{est:?}");
    assert!(est.l2_speed.unwrap().min_margin > 1e-3);
    assert!(est.past_energy.unwrap().max_rel_gap > 1e-3);
}

#[test]
fn equilibrium_estimates_are_trivial() {
    let sys = Dissipative::new(2, 0.5, Potential::Quadratic { stiffness: 1.0 }).unwrap();
    let init = State::new(0.0, vec![0.0, 0.0], vec![0.0, 0.0]);
    let cfg = IntegratorConfig::default();
    let tr = integrate_two_sided(&sys, &init, -2.0, 2.0, &cfg, &sys.integrands(&[])).unwrap();
    let est = estimates(&tr, 0.0, 1e-12).unwrap();
    assert!(est.all_hold());
    for i in 0..tr.node_count() {
        let s = tr.node_state(i);
        assert_eq!(sys.energy(&s.q, &s.qdot), 0.0);
    }
}

#[test]
fn first_lane_emden_constant_starts_at_the_energy() {
    let le = LaneEmden::new(3).unwrap();
    let init = State::new(1.0, vec![0.8], vec![-0.3]);
    let tr = integrate(
        &le,
        &init,
        5.0,
        &IntegratorConfig::default(),
        &le.integrands(),
    )
    .unwrap();
    let series = lane_emden::constant(&tr, LaneEmdenConstant::First, 1.0).unwrap();
    assert_eq!(series.values[0], le.energy(0.8, -0.3));
}

#[test]
fn third_constant_vanishes_on_the_exact_n5_solution() {
    let le = LaneEmden::new(5).unwrap();
    let init = lane_emden_series_start(5, 1.0, 1e-4).unwrap();
    let tr = integrate(
        &le,
        &init,
        10.0,
        &IntegratorConfig::default(),
        &le.integrands(),
    )
    .unwrap();
    let series = lane_emden::constant(&tr, LaneEmdenConstant::Third, init.t).unwrap();
    for v in series.values {
        close(v, 0.0, 1e-8);
    }
}

#[test]
fn asymptotic_bounds_on_special_solutions() {
    let le = LaneEmden::new(7).unwrap();
    let rest = State::new(1.0, vec![0.0], vec![0.0]);
    let tr = integrate(&le, &rest, 200.0, &IntegratorConfig::default(), &[]).unwrap();
    let asy = asymptotics(&tr, (10.0, 200.0)).unwrap();
    assert_eq!((asy.c3, asy.c4), (0.0, 0.0));
    assert!(asy.chain_holds);

    // n = 5 decays like 1/t, inside the t^{-1/6} bound
    let le = LaneEmden::new(5).unwrap();
    let init = lane_emden_series_start(5, 1.0, 1e-4).unwrap();
    let tr = integrate(&le, &init, 1e3, &IntegratorConfig::default(), &[]).unwrap();
    let asy = asymptotics(&tr, (10.0, 1e3)).unwrap();
    assert!(asy.chain_holds);
    assert!(asy.q_exponent.unwrap() < -0.9);
    for t in [10.0, 100.0, 1e3] {
        let q = tr.state_at(t).unwrap().q[0];
        assert!(q.abs() <= asy.c3 * t.powf(-1.0 / 6.0) * (1.0 + 1e-12));
    }

    let even = integrate(
        &LaneEmden::new(4).unwrap(),
        &rest,
        20.0,
        &IntegratorConfig::default(),
        &[],
    )
    .unwrap();
    assert!(matches!(
        asymptotics(&even, (10.0, 20.0)),
        Err(nonlocal::Error::Unsupported(_))
    ));
}

#[test]
fn maxwell_bloch_first_integrals_of_printed_data() {
    let stationary = State::new(0.0, vec![1.0, 3.0, 0.0], vec![3.0, -1.0, -1.0]);
    let fi = MaxwellBloch::first_integrals(&stationary).unwrap();
    assert_eq!((fi.e, fi.b, fi.j, fi.k), (5.5, 4.0, -10.0, -6.0));
    assert_eq!(MaxwellBloch::k_cubic_form(&stationary, fi.e, fi.b), -6.0);
    assert_eq!(third_order_residual_at(&stationary, fi.e, fi.b), 0.0);

    let homoclinic = State::new(0.0, vec![2.0, 0.0, 0.0], vec![0.0, 0.0, -1.0]);
    let fi = MaxwellBloch::first_integrals(&homoclinic).unwrap();
    assert_eq!((fi.e, fi.b, fi.j, fi.k), (0.5, 1.0, 0.0, 1.0));

    let zero = State::new(0.0, vec![0.0; 3], vec![0.0; 3]);
    let fi = MaxwellBloch::first_integrals(&zero).unwrap();
    assert_eq!((fi.e, fi.b, fi.j, fi.k), (0.0, 0.0, 0.0, 0.0));

    for c in [-1.5, 0.0, 2.0] {
        let drift = State::new(0.0, vec![0.0; 3], vec![0.0, 0.0, c]);
        let fi = MaxwellBloch::first_integrals(&drift).unwrap();
        assert_eq!(third_order_residual_at(&drift, fi.e, fi.b), 0.0);
    }
}

#[test]
fn embed_and_project_round_trip() {
    for xyz in [[0.0; 5], [1.0, -2.0, 0.5, 3.0, -1.0]] {
        let s = MaxwellBloch::embed(0.0, xyz, 0.7);
        assert_eq!(MaxwellBloch::project(&s).unwrap(), xyz);
    }
}
