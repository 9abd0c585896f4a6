//! Planar liquid-vapor interfaces at rest.
//!
//! Two routes are provided. The reduced route slaves the entropy to the
//! density through `T = T0`, which leaves the classical cubic profile
//! equation `C rho'' = B m^3 - A (T_c - T0) m` with its tanh solution. The
//! full route solves the coupled `(rho, s)` system by damped Newton
//! iteration with Dirichlet bulk states at both ends of a truncated domain.

mod bvp;
mod closed;
pub mod stencil;
mod stress;

use serde::{Deserialize, Serialize};

use crate::eos::{BulkConditions, FluidParams, ThermoState};
use crate::{Error, Result};

pub use bvp::{solve_full_bvp, NewtonOptions, NewtonReport};
pub use closed::{
    closed_profile, first_integral_residual, reduced_residual, surface_tension_quadrature,
    NodalResidual,
};
pub use stress::{equilibrium_stress_residual, normal_stress, stress_tensor};

/// Uniform grid on `[-L, L]` with `L = half_width_in_zeta * zeta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGridConfig", into = "RawGridConfig")]
pub struct GridConfig {
    half_width_in_zeta: f64,
    n_points: usize,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGridConfig {
    half_width_in_zeta: f64,
    n_points: usize,
}

impl GridConfig {
    pub const MIN_POINTS: usize = 51;
    pub const MIN_HALF_WIDTH: f64 = 8.0;

    pub fn new(half_width_in_zeta: f64, n_points: usize) -> Result<Self> {
        if n_points < Self::MIN_POINTS || n_points % 2 == 0 {
            return Err(Error::InvalidGrid(format!(
                "n_points must be odd and >= {}, got {n_points}",
                Self::MIN_POINTS
            )));
        }
        if !(half_width_in_zeta >= Self::MIN_HALF_WIDTH) || !half_width_in_zeta.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "half_width_in_zeta must be >= {}, got {half_width_in_zeta}",
                Self::MIN_HALF_WIDTH
            )));
        }
        Ok(Self {
            half_width_in_zeta,
            n_points,
        })
    }

    pub fn half_width_in_zeta(&self) -> f64 {
        self.half_width_in_zeta
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn with_points(self, n_points: usize) -> Result<Self> {
        Self::new(self.half_width_in_zeta, n_points)
    }

    /// Node positions for an interface of width `zeta`. The middle node is
    /// exactly `y = 0` and the grid is exactly symmetric.
    pub fn nodes(&self, zeta: f64) -> Vec<f64> {
        let mid = (self.n_points - 1) / 2;
        let h = self.spacing(zeta);
        (0..self.n_points)
            .map(|i| (i as f64 - mid as f64) * h)
            .collect()
    }

    pub fn spacing(&self, zeta: f64) -> f64 {
        2.0 * self.half_width_in_zeta * zeta / (self.n_points - 1) as f64
    }
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            half_width_in_zeta: 15.0,
            n_points: 1001,
        }
    }
}

impl TryFrom<RawGridConfig> for GridConfig {
    type Error = Error;
    fn try_from(raw: RawGridConfig) -> Result<Self> {
        Self::new(raw.half_width_in_zeta, raw.n_points)
    }
}

impl From<GridConfig> for RawGridConfig {
    fn from(g: GridConfig) -> Self {
        Self {
            half_width_in_zeta: g.half_width_in_zeta,
            n_points: g.n_points,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    ClosedForm,
    FullSolver,
}

/// Co-sampled density and specific entropy on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    y: Vec<f64>,
    rho: Vec<f64>,
    s: Vec<f64>,
    bc: BulkConditions,
    provenance: Provenance,
}

impl Profile {
    /// Checks array lengths, uniform strictly increasing spacing, positive
    /// densities, and that densities stay within `[rho_v - delta, rho_l + delta]`
    /// with `delta = 1e-6 (rho_l - rho_v)`.
    pub fn new(
        p: &FluidParams,
        y: Vec<f64>,
        rho: Vec<f64>,
        s: Vec<f64>,
        bc: BulkConditions,
        provenance: Provenance,
    ) -> Result<Self> {
        if y.len() != rho.len() || y.len() != s.len() {
            return Err(Error::InvalidProfile(format!(
                "array lengths differ: y {}, rho {}, s {}",
                y.len(),
                rho.len(),
                s.len()
            )));
        }
        if y.len() < 5 {
            return Err(Error::InvalidProfile("need at least five nodes".into()));
        }
        let h = (y[y.len() - 1] - y[0]) / (y.len() - 1) as f64;
        if !(h > 0.0) {
            return Err(Error::InvalidProfile(
                "y must be strictly increasing".into(),
            ));
        }
        for w in y.windows(2) {
            let dh = w[1] - w[0];
            if !(dh > 0.0) || (dh - h).abs() > 1e-9 * h {
                return Err(Error::InvalidProfile("y must be uniformly spaced".into()));
            }
        }
        let (liquid, vapor) = bulk_states(p, &bc);
        let jump = liquid.rho() - vapor.rho();
        let slack = 1e-6 * jump;
        for (&r, &e) in rho.iter().zip(&s) {
            if !(r > 0.0) || !e.is_finite() {
                return Err(Error::InvalidProfile(format!("bad state (rho {r}, s {e})")));
            }
            if r < vapor.rho() - slack || r > liquid.rho() + slack {
                return Err(Error::InvalidProfile(format!(
                    "density {r} outside [{}, {}]",
                    vapor.rho(),
                    liquid.rho()
                )));
            }
        }
        Ok(Self {
            y,
            rho,
            s,
            bc,
            provenance,
        })
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }
    pub fn rho(&self) -> &[f64] {
        &self.rho
    }
    pub fn s(&self) -> &[f64] {
        &self.s
    }
    pub fn bc(&self) -> &BulkConditions {
        &self.bc
    }
    pub fn provenance(&self) -> Provenance {
        self.provenance
    }
    pub fn len(&self) -> usize {
        self.y.len()
    }
    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
    pub fn spacing(&self) -> f64 {
        (self.y[self.y.len() - 1] - self.y[0]) / (self.y.len() - 1) as f64
    }

    /// Position of the dividing surface `rho = rho_c` (linear interpolation),
    /// and the entropy there. `None` if the profile never crosses `rho_c`.
    pub fn dividing_surface(&self, rho_c: f64) -> Option<(f64, f64)> {
        for i in 0..self.len() - 1 {
            let (r0, r1) = (self.rho[i] - rho_c, self.rho[i + 1] - rho_c);
            if r0 == 0.0 {
                return Some((self.y[i], self.s[i]));
            }
            if r0 * r1 < 0.0 {
                let t = r0 / (r0 - r1);
                let y = self.y[i] + t * (self.y[i + 1] - self.y[i]);
                let s = self.s[i] + t * (self.s[i + 1] - self.s[i]);
                return Some((y, s));
            }
        }
        None
    }
}

/// Interface width, bulk densities and surface tension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterfaceObservables {
    pub zeta: f64,
    pub rho_l: f64,
    pub rho_v: f64,
    pub sigma_closed: f64,
    pub sigma_quad: f64,
    pub f0: f64,
    #[serde(rename = "delta_T")]
    pub delta_t: f64,
}

/// Liquid and vapor states `rho_c +- sqrt(A dT / B)` with slaved entropies.
pub fn bulk_states(p: &FluidParams, bc: &BulkConditions) -> (ThermoState, ThermoState) {
    let half = (p.a() * bc.delta_t() / p.b()).sqrt();
    let state = |rho: f64| {
        ThermoState::new(rho, p.entropy_slave(rho, bc))
            .expect("bulk density is positive near the critical point")
    };
    (state(p.rho_c() + half), state(p.rho_c() - half))
}

/// `zeta = sqrt(C / (2 A (T_c - T0)))`.
pub fn interface_width(p: &FluidParams, bc: &BulkConditions) -> Result<f64> {
    if bc.delta_t() == 0.0 {
        return Err(Error::CriticalIsotherm);
    }
    Ok((p.c() / (2.0 * p.a() * bc.delta_t())).sqrt())
}

/// `sigma = sqrt(C)/(3B) * (2 A (T_c - T0))^{3/2}`.
pub fn surface_tension_closed(p: &FluidParams, bc: &BulkConditions) -> f64 {
    p.c().sqrt() / (3.0 * p.b()) * (2.0 * p.a() * bc.delta_t()).powf(1.5)
}

/// First-integral constant `f0 = A^2 (T_c - T0)^2 / (4B)` of the planar interface.
pub fn first_integral_constant(p: &FluidParams, bc: &BulkConditions) -> f64 {
    p.a() * p.a() * bc.delta_t() * bc.delta_t() / (4.0 * p.b())
}

pub fn observables(p: &FluidParams, prof: &Profile) -> Result<InterfaceObservables> {
    let bc = prof.bc();
    let (liquid, vapor) = bulk_states(p, bc);
    Ok(InterfaceObservables {
        zeta: interface_width(p, bc)?,
        rho_l: liquid.rho(),
        rho_v: vapor.rho(),
        sigma_closed: surface_tension_closed(p, bc),
        sigma_quad: surface_tension_quadrature(p, prof)?,
        f0: first_integral_constant(p, bc),
        delta_t: bc.delta_t(),
    })
}
