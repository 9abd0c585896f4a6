//! Cross-module invariant suite behind `thermocap check`.
//!
//! Each check reduces to one number compared against a threshold. Random
//! sampling flows from a single seed; every check draws from its own ChaCha
//! stream so results do not depend on evaluation order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::eos::{BulkConditions, FluidParams, ThermoState};
use crate::equilibrium::{
    bulk_states, closed_profile, equilibrium_stress_residual, first_integral_residual,
    reduced_residual, solve_full_bvp, surface_tension_closed, surface_tension_quadrature,
    GridConfig, NewtonOptions,
};
use crate::par::{map_ordered, Execution};
use crate::waves::{
    celerity_at_critical_density, celerity_by_determinant, celerity_general, jump_matrix, WaveLocus,
};
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub seed: u64,
    pub rows: Vec<CheckRow>,
    pub all_pass: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct CheckInputs<'a> {
    pub params: &'a FluidParams,
    pub bc: &'a BulkConditions,
    pub grid: &'a GridConfig,
    pub newton: &'a NewtonOptions,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Check {
    EosGradient,
    EosExpandedTerms,
    Coexistence,
    BulkStates,
    ReducedResidual,
    FirstIntegral,
    TensionQuadrature,
    NewtonIterations,
    StressResidual,
    DeterminantIdentity,
    CelerityEquivalence,
    DividingSurfaceCelerity,
}

impl Check {
    const ALL: [Check; 12] = [
        Check::EosGradient,
        Check::EosExpandedTerms,
        Check::Coexistence,
        Check::BulkStates,
        Check::ReducedResidual,
        Check::FirstIntegral,
        Check::TensionQuadrature,
        Check::NewtonIterations,
        Check::StressResidual,
        Check::DeterminantIdentity,
        Check::CelerityEquivalence,
        Check::DividingSurfaceCelerity,
    ];

    fn name(self) -> &'static str {
        match self {
            Check::EosGradient => "eos_gradient_fd",
            Check::EosExpandedTerms => "eos_expanded_terms",
            Check::Coexistence => "coexistence_identity",
            Check::BulkStates => "bulk_state_equilibrium",
            Check::ReducedResidual => "profile_reduced_residual",
            Check::FirstIntegral => "profile_first_integral",
            Check::TensionQuadrature => "surface_tension_quadrature",
            Check::NewtonIterations => "full_bvp_iterations",
            Check::StressResidual => "equilibrium_stress_residual",
            Check::DeterminantIdentity => "jump_determinant_identity",
            Check::CelerityEquivalence => "celerity_root_vs_closed",
            Check::DividingSurfaceCelerity => "dividing_surface_celerity",
        }
    }

    fn threshold(self) -> f64 {
        match self {
            Check::EosGradient => 1e-6,
            Check::EosExpandedTerms | Check::Coexistence | Check::BulkStates => 1e-12,
            Check::ReducedResidual | Check::FirstIntegral | Check::StressResidual => 1e-7,
            Check::TensionQuadrature => 1e-6,
            Check::NewtonIterations => 10.0,
            Check::DeterminantIdentity | Check::DividingSurfaceCelerity => 1e-12,
            Check::CelerityEquivalence => 1e-10,
        }
    }
}

const RANDOM_SAMPLES: usize = 1000;
const RANDOM_LOCI: usize = 100;
/// Grid for the profile-residual checks.
const RESIDUAL_POINTS: usize = 2001;

pub fn run_checks(inputs: &CheckInputs<'_>) -> CheckReport {
    run_checks_with(inputs, Execution::default())
}

pub fn run_checks_with(inputs: &CheckInputs<'_>, exec: Execution) -> CheckReport {
    let rows = map_ordered(exec, &Check::ALL, |&check| {
        let threshold = check.threshold();
        let (value, note) = match evaluate(check, inputs) {
            Ok(v) => (v, None),
            Err(err) => (f64::NAN, Some(err.to_string())),
        };
        CheckRow {
            name: check.name().into(),
            value,
            threshold,
            pass: value <= threshold,
            note,
        }
    });
    let all_pass = rows.iter().all(|r| r.pass);
    CheckReport {
        seed: inputs.seed,
        rows,
        all_pass,
    }
}

fn rng_for(seed: u64, check: Check) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(check as u64);
    rng
}

/// 10 x 10 states around `(rho_c, 0)`.
fn state_grid(p: &FluidParams) -> Vec<ThermoState> {
    let mut out = Vec::with_capacity(100);
    for i in 0..10 {
        for j in 0..10 {
            let rho = p.rho_c() * (0.9 + 0.2 * i as f64 / 9.0);
            let s = -0.05 + 0.1 * j as f64 / 9.0;
            out.push(ThermoState::new(rho, s).expect("grid densities are positive"));
        }
    }
    out
}

fn rel(err: f64, reference: f64) -> f64 {
    err.abs() / reference.abs().max(1.0)
}

/// Partials written out term by term:
/// `d/d rho = 2B m^3 + (B/A) m^2 s + 2(B/A) rho s m + 2(B/A^2) rho s^2 + mu_c + T_c s`,
/// `d/d s = (B/A) rho m^2 + 2(B/A^2) rho^2 s + T_c rho`.
pub fn expanded_partials(p: &FluidParams, st: ThermoState) -> (f64, f64) {
    let (a, b) = (p.a(), p.b());
    let (rho, s) = (st.rho(), st.s());
    let m = rho - p.rho_c();
    let d_rho = 2.0 * b * m.powi(3)
        + (b / a) * m * m * s
        + 2.0 * (b / a) * rho * s * m
        + 2.0 * (b / (a * a)) * rho * s * s
        + p.mu_c()
        + p.t_c() * s;
    let d_s = (b / a) * rho * m * m + 2.0 * (b / (a * a)) * rho * rho * s + p.t_c() * rho;
    (d_rho, d_s)
}

fn evaluate(check: Check, inp: &CheckInputs<'_>) -> Result<f64> {
    let p = inp.params;
    let bc = inp.bc;
    match check {
        Check::EosGradient => Ok(state_grid(p)
            .into_iter()
            .map(|st| {
                let (rho, s) = (st.rho(), st.s());
                let h = 1e-5 * rho.abs().max(s.abs()).max(1.0);
                let f = |r: f64, e: f64| p.bulk_energy(ThermoState::new(r, e).unwrap());
                let fd_rho = (f(rho + h, s) - f(rho - h, s)) / (2.0 * h);
                let fd_s = (f(rho, s + h) - f(rho, s - h)) / (2.0 * h);
                let (d_rho, d_s) = p.bulk_energy_partials(st);
                rel(fd_rho - d_rho, d_rho).max(rel(fd_s - d_s, d_s))
            })
            .fold(0.0, f64::max)),
        Check::EosExpandedTerms => Ok(state_grid(p)
            .into_iter()
            .map(|st| {
                let (e_rho, e_s) = expanded_partials(p, st);
                let (d_rho, d_s) = p.bulk_energy_partials(st);
                rel(e_rho - d_rho, d_rho).max(rel(e_s - d_s, d_s))
            })
            .fold(0.0, f64::max)),
        Check::Coexistence => {
            let mut rng = rng_for(inp.seed, check);
            let mut worst = 0.0f64;
            for _ in 0..RANDOM_SAMPLES {
                let dt = rng.gen_range(1e-4..1e-1);
                let rho = p.rho_c() * rng.gen_range(0.5..1.5);
                let bc = BulkConditions::from_delta_t(p, dt)?;
                let st = ThermoState::new(rho, p.entropy_slave(rho, &bc))?;
                let full = p.chemical_potential_full(st, &bc);
                let cubic = p.chemical_potential_cubic(rho, &bc);
                worst = worst.max(rel(full - cubic, cubic));
            }
            Ok(worst)
        }
        Check::BulkStates => {
            let mut rng = rng_for(inp.seed, check);
            let mut worst = 0.0f64;
            for _ in 0..RANDOM_SAMPLES {
                let dt = rng.gen_range(1e-4..1e-1);
                let bc = BulkConditions::from_delta_t(p, dt)?;
                let (liquid, vapor) = bulk_states(p, &bc);
                for st in [liquid, vapor] {
                    let mu = p.chemical_potential_full(st, &bc);
                    worst = worst
                        .max(rel(mu - p.mu_c(), p.mu_c()))
                        .max(rel(p.temperature(st) - bc.t0(), bc.t0()));
                }
            }
            Ok(worst)
        }
        Check::ReducedResidual | Check::FirstIntegral => {
            let grid = inp.grid.with_points(RESIDUAL_POINTS)?;
            let prof = closed_profile(p, bc, &grid)?;
            let residual = if check == Check::ReducedResidual {
                reduced_residual(p, bc, &prof)
            } else {
                first_integral_residual(p, bc, &prof)
            };
            Ok(residual.inf_norm())
        }
        Check::TensionQuadrature => {
            let prof = closed_profile(p, bc, inp.grid)?;
            let closed = surface_tension_closed(p, bc);
            Ok((surface_tension_quadrature(p, &prof)? - closed).abs() / closed)
        }
        Check::NewtonIterations => {
            let (_, report) = solve_full_bvp(p, bc, inp.grid, inp.newton)?;
            Ok(report.iterations as f64)
        }
        Check::StressResidual => {
            let (prof, _) = solve_full_bvp(p, bc, inp.grid, inp.newton)?;
            Ok(equilibrium_stress_residual(p, &prof))
        }
        Check::DeterminantIdentity => {
            let mut rng = rng_for(inp.seed, check);
            let mut worst = 0.0f64;
            for _ in 0..RANDOM_LOCI {
                let locus = random_locus(p, &mut rng)?;
                let v = rng.gen_range(0.0..2.0) * celerity_general(p, &locus).v;
                let numeric = jump_matrix(p, &locus, v).determinant();
                let (rho, g2) = (locus.rho(), locus.grad_s_tg_sq());
                let disc = p.gradient_discriminant();
                let cofactor = -rho * (disc * g2 - p.c() * rho * v * v);
                let scale = rho * (disc * g2 + p.c() * rho * v * v);
                worst = worst.max((numeric - cofactor).abs() / scale);
            }
            Ok(worst)
        }
        Check::CelerityEquivalence => {
            let mut rng = rng_for(inp.seed, check);
            let mut worst = 0.0f64;
            for _ in 0..RANDOM_LOCI {
                let locus = random_locus(p, &mut rng)?;
                let closed = celerity_general(p, &locus).v;
                let root = celerity_by_determinant(p, &locus)?.v;
                worst = worst.max((root - closed).abs() / closed);
            }
            Ok(worst)
        }
        Check::DividingSurfaceCelerity => {
            let dt = bc.delta_t();
            let (a, b, c) = (p.a(), p.b(), p.c());
            let expected = (c * p.e() - p.d() * p.d()) * a.powi(6) * dt.powi(4)
                / (8.0 * c * c * b.powi(3) * p.rho_c().powi(5));
            let got = celerity_at_critical_density(p, bc).v_squared();
            let general = celerity_general(p, &crate::waves::dividing_surface_locus(p, bc));
            if expected == 0.0 {
                return Ok(got.abs().max(general.v_squared().abs()));
            }
            Ok(((got - expected)
                .abs()
                .max((general.v_squared() - expected).abs()))
                / expected)
        }
    }
}

fn random_locus(p: &FluidParams, rng: &mut ChaCha8Rng) -> Result<WaveLocus> {
    WaveLocus::new(
        p.rho_c() * rng.gen_range(0.3..2.0),
        rng.gen_range(-1e-2..1e-2),
        10f64.powf(rng.gen_range(-12.0..-2.0)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eos::RawFluidParams;

    fn inputs<'a>(
        p: &'a FluidParams,
        bc: &'a BulkConditions,
        g: &'a GridConfig,
        n: &'a NewtonOptions,
        seed: u64,
    ) -> CheckInputs<'a> {
        CheckInputs {
            params: p,
            bc,
            grid: g,
            newton: n,
            seed,
        }
    }

    #[test]
    fn reference_configuration_passes_every_check() {
        let p = FluidParams::reference();
        let bc = BulkConditions::from_delta_t(&p, 0.01).unwrap();
        let (g, n) = (GridConfig::default(), NewtonOptions::default());
        let report = run_checks(&inputs(&p, &bc, &g, &n, 42));
        for row in &report.rows {
            assert!(row.pass, "{row:?}");
        }
        assert!(report.all_pass);
        assert_eq!(report.rows.len(), Check::ALL.len());
    }

    #[test]
    fn same_seed_same_report() {
        let p = FluidParams::reference();
        let bc = BulkConditions::from_delta_t(&p, 0.01).unwrap();
        let (g, n) = (GridConfig::default(), NewtonOptions::default());
        let a = run_checks_with(&inputs(&p, &bc, &g, &n, 9), Execution::Sequential);
        let b = run_checks_with(&inputs(&p, &bc, &g, &n, 9), Execution::Parallel);
        assert_eq!(a, b);
    }

    #[test]
    fn solver_failure_becomes_a_failed_row() {
        let p = FluidParams::reference();
        let bc = BulkConditions::from_delta_t(&p, 0.01).unwrap();
        let g = GridConfig::default();
        let n = NewtonOptions {
            max_iter: 0,
            ..NewtonOptions::default()
        };
        let report = run_checks(&inputs(&p, &bc, &g, &n, 1));
        assert!(!report.all_pass);
        let row = report
            .rows
            .iter()
            .find(|r| r.name == "full_bvp_iterations")
            .unwrap();
        assert!(!row.pass && row.value.is_nan() && row.note.is_some());
    }

    #[test]
    fn expanded_terms_agree_for_non_reference_constants() {
        let p = FluidParams::validate(RawFluidParams {
            a: 1.7,
            b: 0.6,
            rho_c: 0.8,
            t_c: 2.3,
            mu_c: -0.4,
            ..RawFluidParams::REFERENCE
        })
        .unwrap();
        for st in state_grid(&p) {
            let (e_rho, e_s) = expanded_partials(&p, st);
            let (d_rho, d_s) = p.bulk_energy_partials(st);
            assert!(rel(e_rho - d_rho, d_rho) < 1e-12);
            assert!(rel(e_s - d_s, d_s) < 1e-12);
        }
    }
}
