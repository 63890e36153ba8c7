use proptest::prelude::*;
use vlca_core::powertherm::*;
use vlca_core::vlca::ActuatorParams;

fn params() -> impl Strategy<Value = ThermalParams> {
    (0.5..5.0f64, 0.2..3.0f64, 2.0..20.0f64, 1.0..5.0f64, 1.5..10.0f64, 0.1..1.0f64).prop_map(
        |(cw, rwh, ch, ron, off_factor, r25)| ThermalParams {
            c_winding: cw,
            r_winding_housing: rwh,
            c_housing: ch,
            r_ambient_on: ron,
            r_ambient_off: ron * off_factor,
            r25,
            ..ThermalParams::default()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn steady_state_ignores_capacitance(p in params(), i in 0.5..5.0f64, cw2 in 0.5..5.0f64, ch2 in 2.0..20.0f64) {
        let q = ThermalParams { c_winding: cw2, c_housing: ch2, ..p };
        let want = p.steady_winding(i, Cooling::On).unwrap();
        // slowest time constant is below (R_wh + R_on)·(C_w + C_h) ≤ 8·25 s
        let currents = vec![i; 150_000];
        for par in [p, q] {
            let tr = simulate_thermal(&par, ThermalState::ambient(&par), &currents, Cooling::On, 10e-3).unwrap();
            let got = tr.last().unwrap().state.winding_c;
            prop_assert!((got - want).abs() < 1e-3 * (want - par.ambient_c), "{got} vs {want}");
        }
    }

    #[test]
    fn steady_winding_increases_with_current(p in params(), i in 0.0..10.0f64, di in 1e-3..5.0f64) {
        for c in [Cooling::Off, Cooling::On] {
            if let (Some(a), Some(b)) = (p.steady_winding(i, c), p.steady_winding(i + di, c)) {
                prop_assert!(b > a);
            }
        }
    }

    #[test]
    fn efficiency_average_ignores_time_scale(
        pw in prop::collection::vec((10.0..500.0f64, 0.5..0.95f64, -50.0..400.0f64), 10..60),
        lambda in 0.01..100.0f64,
    ) {
        let mk = |scale: f64| pw.iter().enumerate().map(|(k, (m, e, j))| PowerSample {
            t: k as f64 * 1e-3 * scale, input_power: m / e, motor_power: *m, joint_power: *j,
        }).collect::<Vec<_>>();
        match (power_flow(mk(1.0)), power_flow(mk(lambda))) {
            (Ok(a), Ok(b)) => {
                prop_assert!((a.drivetrain_efficiency_avg - b.drivetrain_efficiency_avg).abs() < 1e-9);
                prop_assert!((a.electrical_efficiency_avg - b.electrical_efficiency_avg).abs() < 1e-9);
            }
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false),
        }
    }

    #[test]
    fn cooling_never_lowers_the_limit(p in params(), arm in 0.01..0.1f64) {
        let a = ActuatorParams::identified();
        let on = continuous_force_limit(&p, &a, arm, Cooling::On);
        let off = continuous_force_limit(&p, &a, arm, Cooling::Off);
        prop_assert!(on.force_n >= off.force_n);
        prop_assert!(on.torque_nm >= off.torque_nm);
    }
}
