use proptest::prelude::*;
use thermocap_core::equilibrium::{closed_profile, GridConfig};
use thermocap_core::scaling::fit_exponent;
use thermocap_core::waves::{celerity_by_determinant, celerity_general};
use thermocap_core::{BulkConditions, Error, FluidParams, RawFluidParams, ThermoState, WaveLocus};

fn params(c: f64, d: f64, e: f64) -> Result<FluidParams, Error> {
    FluidParams::validate(RawFluidParams {
        c,
        d,
        e,
        ..RawFluidParams::REFERENCE
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn indefinite_gradient_forms_are_rejected(
        c in -2.0f64..2.0,
        e in -2.0f64..2.0,
        d in -3.0f64..3.0,
    ) {
        let result = params(c, d, e);
        if c <= 0.0 || c * e - d * d <= 0.0 {
            let rejected = matches!(result, Err(Error::IndefiniteGradientForm { .. }));
            prop_assert!(rejected);
        } else {
            prop_assert!(result.is_ok());
        }
    }

    #[test]
    fn admissible_sets_give_nonnegative_squared_speeds(
        c in 0.05f64..5.0,
        e in 0.05f64..5.0,
        frac in -0.999f64..0.999,
        rho in 0.1f64..3.0,
        a in -1.0f64..1.0,
        g2 in 0.0f64..1.0,
    ) {
        let p = params(c, frac * (c * e).sqrt(), e).unwrap();
        let locus = WaveLocus::new(rho, a, g2).unwrap();
        let v2 = celerity_general(&p, &locus).v_squared();
        prop_assert!(v2 >= 0.0 && v2.is_finite());
    }
}

proptest! {
    #[test]
    fn coexistence_identity_on_the_slaved_manifold(
        dt in 1e-5f64..0.2,
        rho in 0.3f64..1.7,
    ) {
        let p = FluidParams::reference();
        let bc = BulkConditions::from_delta_t(&p, dt).unwrap();
        let st = ThermoState::new(rho, p.entropy_slave(rho, &bc)).unwrap();
        let full = p.chemical_potential_full(st, &bc);
        let cubic = p.chemical_potential_cubic(rho, &bc);
        prop_assert!((full - cubic).abs() <= 1e-12 * cubic.abs().max(1.0));
        prop_assert!((p.temperature(st) - bc.t0()).abs() <= 1e-12);
    }

    #[test]
    fn closed_profile_is_odd_about_the_midpoint(dt in 1e-4f64..0.1) {
        let p = FluidParams::reference();
        let bc = BulkConditions::from_delta_t(&p, dt).unwrap();
        let prof = closed_profile(&p, &bc, &GridConfig::default()).unwrap();
        let (rho, y) = (prof.rho(), prof.y());
        let n = rho.len();
        for i in 0..n / 2 {
            prop_assert_eq!(y[i], -y[n - 1 - i]);
            prop_assert!(((rho[i] - 1.0) + (rho[n - 1 - i] - 1.0)).abs() <= 1e-15);
        }
        prop_assert_eq!(rho[n / 2], 1.0);
    }

    #[test]
    fn fit_recovers_exact_power_laws(
        k in -3.0f64..3.0,
        amp in 1e-3f64..1e3,
        x0 in 1e-6f64..1.0,
    ) {
        let pts: Vec<(f64, f64)> = (0..5)
            .map(|i| {
                let x = x0 * 10f64.powi(i);
                (x, amp * x.powf(k))
            })
            .collect();
        let fit = fit_exponent(&pts).unwrap();
        prop_assert!((fit.slope - k).abs() <= 1e-10);
        prop_assert!(fit.max_residual <= 1e-10);
    }

    #[test]
    fn determinant_root_matches_the_closed_speed(
        c in 0.2f64..3.0,
        e in 0.2f64..3.0,
        frac in -0.95f64..0.95,
        rho in 0.3f64..2.0,
        a in -1e-2f64..1e-2,
        log_g2 in -12.0f64..-2.0,
    ) {
        let p = params(c, frac * (c * e).sqrt(), e).unwrap();
        let locus = WaveLocus::new(rho, a, 10f64.powf(log_g2)).unwrap();
        let closed = celerity_general(&p, &locus).v;
        let root = celerity_by_determinant(&p, &locus).unwrap().v;
        prop_assert!((root - closed).abs() <= 1e-10 * closed);
    }
}
