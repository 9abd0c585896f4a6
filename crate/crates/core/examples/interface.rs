//! Width, surface tension and dividing-surface wave speed of the reference
//! fluid at a few distances below the critical temperature, from both the
//! tanh profile and the full two-field solve.

use thermocap_core::equilibrium::{observables, solve_full_bvp, surface_tension_quadrature};
use thermocap_core::waves::celerity_at_critical_density;
use thermocap_core::{BulkConditions, FluidParams, GridConfig, NewtonOptions};

fn main() -> Result<(), thermocap_core::Error> {
    let p = FluidParams::reference();
    let grid = GridConfig::default();
    println!(
        "{:>8}  {:>12}  {:>12}  {:>12}  {:>12}  {:>5}",
        "delta_T", "zeta", "sigma", "sigma_full", "v", "iters"
    );
    for dt in [1e-1, 3e-2, 1e-2, 3e-3, 1e-3] {
        let bc = BulkConditions::from_delta_t(&p, dt)?;
        let (full, report) = solve_full_bvp(&p, &bc, &grid, &NewtonOptions::default())?;
        let obs = observables(&p, &full)?;
        let v = celerity_at_critical_density(&p, &bc).v;
        println!(
            "{dt:>8.0e}  {:>12.5e}  {:>12.5e}  {:>12.5e}  {v:>12.5e}  {:>5}",
            obs.zeta,
            obs.sigma_closed,
            surface_tension_quadrature(&p, &full)?,
            report.iterations
        );
    }
    Ok(())
}
