use crate::eos::{BulkConditions, FluidParams};
use crate::{Error, Result};

use super::stencil::{first_derivative, first_derivative_at, second_derivative_at, simpson};
use super::{bulk_states, interface_width, GridConfig, Profile, Provenance};

/// Per-node residual on the interior nodes where the five-point stencils fit.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalResidual {
    pub y: Vec<f64>,
    pub values: Vec<f64>,
}

impl NodalResidual {
    pub fn inf_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    /// Node where the residual magnitude peaks.
    pub fn argmax(&self) -> Option<f64> {
        self.values
            .iter()
            .zip(&self.y)
            .max_by(|a, b| a.0.abs().total_cmp(&b.0.abs()))
            .map(|(_, y)| *y)
    }
}

/// `rho(y) = rho_c + (rho_l - rho_v)/2 * tanh(y / (2 zeta))`, entropy slaved
/// node by node.
pub fn closed_profile(p: &FluidParams, bc: &BulkConditions, g: &GridConfig) -> Result<Profile> {
    let zeta = interface_width(p, bc)?;
    let (liquid, vapor) = bulk_states(p, bc);
    let half_jump = 0.5 * (liquid.rho() - vapor.rho());
    let y = g.nodes(zeta);
    let rho: Vec<f64> = y
        .iter()
        .map(|&y| p.rho_c() + half_jump * (y / (2.0 * zeta)).tanh())
        .collect();
    let s = rho.iter().map(|&r| p.entropy_slave(r, bc)).collect();
    Profile::new(p, y, rho, s, *bc, Provenance::ClosedForm)
}

/// `sigma = int C rho'^2 dy` by composite Simpson, with fourth-order
/// derivatives. Fails if the profile tails have not reached the bulk
/// densities to `1e-6 (rho_l - rho_v)`.
pub fn surface_tension_quadrature(p: &FluidParams, prof: &Profile) -> Result<f64> {
    let (liquid, vapor) = bulk_states(p, prof.bc());
    let jump = liquid.rho() - vapor.rho();
    let limit = 1e-6 * jump;
    let rho = prof.rho();
    let first = rho[0];
    let last = rho[rho.len() - 1];
    // A constant profile is its own bulk; only check tails across a real jump.
    if (last - first).abs() > limit {
        let (lo_side, hi_side) = if last > first {
            (first - vapor.rho(), last - liquid.rho())
        } else {
            (first - liquid.rho(), last - vapor.rho())
        };
        if lo_side.abs() >= limit {
            return Err(Error::UndecayedTail {
                side: "left",
                deviation: lo_side.abs(),
                limit,
            });
        }
        if hi_side.abs() >= limit {
            return Err(Error::UndecayedTail {
                side: "right",
                deviation: hi_side.abs(),
                limit,
            });
        }
    }
    let h = prof.spacing();
    let integrand: Vec<f64> = first_derivative(rho, h)
        .into_iter()
        .map(|d| p.c() * d * d)
        .collect();
    Ok(simpson(&integrand, h))
}

/// `C rho'' - [B m^3 - A (T_c - T0) m + mu_c - mu1]` per node, endpoints
/// (two nodes per side) excluded.
pub fn reduced_residual(p: &FluidParams, bc: &BulkConditions, prof: &Profile) -> NodalResidual {
    let rho = prof.rho();
    let h = prof.spacing();
    let n = rho.len();
    let mut y = Vec::with_capacity(n - 4);
    let mut values = Vec::with_capacity(n - 4);
    for i in 2..n - 2 {
        let m = rho[i] - p.rho_c();
        let rhs = p.b() * m * m * m - p.a() * bc.delta_t() * m + p.mu_c() - bc.mu1();
        values.push(p.c() * second_derivative_at(rho, i, h) - rhs);
        y.push(prof.y()[i]);
    }
    NodalResidual { y, values }
}

/// `C rho'^2 / 2 - [sqrt(B)/2 m^2 - A/(2 sqrt(B)) (T_c - T0)]^2` per node,
/// endpoints excluded.
pub fn first_integral_residual(
    p: &FluidParams,
    bc: &BulkConditions,
    prof: &Profile,
) -> NodalResidual {
    let rho = prof.rho();
    let h = prof.spacing();
    let n = rho.len();
    let sb = p.b().sqrt();
    let mut y = Vec::with_capacity(n - 4);
    let mut values = Vec::with_capacity(n - 4);
    for i in 2..n - 2 {
        let m = rho[i] - p.rho_c();
        let d = first_derivative_at(rho, i, h);
        let inner = 0.5 * sb * m * m - p.a() / (2.0 * sb) * bc.delta_t();
        values.push(0.5 * p.c() * d * d - inner * inner);
        y.push(prof.y()[i]);
    }
    NodalResidual { y, values }
}
