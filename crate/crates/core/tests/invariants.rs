use ffqd_core::cost::{cost_ff_box_closed, cost_ff_ho_closed, occupations, ThermalEnsemble};
use ffqd_core::fastforward::{driving_potential, FastForwardState};
use ffqd_core::propagator::{fidelity, propagate, Boundary, PropagationSpec};
use ffqd_core::{par, BoxModel, ControlTrajectory, Grid, HarmonicModel, RampKind, SpectralModel, UnitSystem};
use proptest::prelude::*;

const NAT: UnitSystem = UnitSystem::natural();

fn ramp() -> impl Strategy<Value = RampKind> {
    prop_oneof![Just(RampKind::PolynomialRamp), Just(RampKind::TrigonometricRamp)]
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn ramps_start_and_stop_at_rest(kind in ramp(), l0 in 0.2f64..5.0, lf in 0.2f64..20.0, t in 0.1f64..10.0) {
        let traj = ControlTrajectory::connecting(kind, l0, lf, t).unwrap();
        prop_assert!((traj.value(0.0).unwrap() - l0).abs() < 1e-12 * l0);
        prop_assert!((traj.value(t).unwrap() - lf).abs() < 1e-12 * lf.max(l0));
        prop_assert!(traj.velocity(0.0).unwrap().abs() < 1e-12 * lf.max(l0));
        prop_assert!(traj.velocity(t).unwrap().abs() < 1e-12 * lf.max(l0) / t.min(1.0));
    }

    #[test]
    fn fast_forward_states_stay_normalized(kind in ramp(), lf in 1.5f64..6.0, n in 1usize..4, s in 0.0f64..=1.0) {
        let traj = ControlTrajectory::connecting(kind, 1.0, lf, 1.0).unwrap();
        let st = FastForwardState::new(BoxModel::new(NAT), n, traj).unwrap();
        let l = traj.value(s).unwrap();
        let psi = st.on_grid(&Grid::new(0.0, l, 2048).unwrap(), s).unwrap();
        prop_assert!((psi.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn drive_routes_agree(kind in ramp(), t in 0.2f64..5.0, beta in 0.2f64..5.0, n in 1.0f64..40.0) {
        let ens = ThermalEnsemble::new(beta, n, NAT).unwrap();
        let traj = ControlTrajectory::connecting(kind, 1.0, 4.0, t).unwrap();
        let d = cost_ff_box_closed(&traj, &ens, 2).unwrap().drive;
        prop_assert!(rel(d.quadrature, d.by_parts) < 1e-8);
        let rf = HarmonicModel::control_for_omega(10.0).unwrap();
        let traj = ControlTrajectory::connecting(kind, 1.0, rf, t).unwrap();
        let d = cost_ff_ho_closed(&traj, &ens, 2).unwrap().drive;
        prop_assert!(rel(d.quadrature, d.closed) < 1e-8 && rel(d.by_parts, d.closed) < 1e-8);
    }

    #[test]
    fn occupations_fill_the_requested_count(beta in 0.05f64..20.0, n in 0.5f64..30.0, l in 0.5f64..3.0) {
        let ens = ThermalEnsemble::new(beta, n, NAT).unwrap();
        let model = BoxModel::new(NAT);
        let energies: Vec<f64> = (1..=400).map(|k| model.energy(k, l).unwrap()).collect();
        let (_, f) = occupations(&energies, &ens).unwrap();
        prop_assert!((f.iter().sum::<f64>() - n).abs() < 1e-10 * n.max(1.0));
        prop_assert!(f.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn parallel_map_is_order_preserving(xs in proptest::collection::vec(-1e3f64..1e3, 0..200)) {
        let f = |x: &f64| x.sin() * x;
        prop_assert_eq!(par::map(&xs, f), par::map_sequential(&xs, f));
    }
}

#[test]
fn driven_box_follows_fast_forward_state_for_every_level() {
    let traj = ControlTrajectory::connecting(RampKind::PolynomialRamp, 1.0, 2.5, 0.8).unwrap();
    let grid = Grid::new(0.0, 1.0, 1024).unwrap();
    let v = |x: f64, t: f64| driving_potential(x, t, &traj, &NAT);
    for n in 1..=3 {
        let st = FastForwardState::new(BoxModel::new(NAT), n, traj).unwrap();
        let spec = PropagationSpec {
            grid,
            dt: 1e-3,
            t_final: 0.8,
            potential: &v,
            boundary: Boundary::DirichletMovingWall(traj),
            units: NAT,
        };
        let out = propagate(&st.on_grid(&grid, 0.0).unwrap(), &spec).unwrap();
        let want = st.on_grid(out.grid(), 0.8).unwrap();
        assert!(1.0 - fidelity(&out, &want).unwrap() < 1e-8, "n = {n}");
    }
}
