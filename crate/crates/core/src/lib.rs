//! Equilibrium liquid-vapor interfaces of a thermocapillary fluid near its
//! critical point, and the tangential acceleration waves they carry.
//!
//! The fluid stores energy in the gradients of both the matter density and
//! the specific entropy. Near the critical point the bulk energy is the
//! quartic expansion implemented in [`eos`]; [`equilibrium`] builds the
//! planar interface (closed-form tanh and full two-field boundary-value
//! solve), [`waves`] handles the weak-discontinuity algebra, and
//! [`scaling`] sweeps the distance to the critical temperature and fits the
//! resulting power laws.

// `!(x > 0.0)` also rejects NaN; it is used on purpose in validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod eos;
pub mod equilibrium;
mod error;
pub mod io;
pub mod par;
pub mod scaling;
pub mod waves;

pub use eos::{BulkConditions, FluidParams, RawFluidParams, ThermoState};
pub use equilibrium::{
    GridConfig, InterfaceObservables, NewtonOptions, NewtonReport, Profile, Provenance,
};
pub use error::{Error, Result};
pub use scaling::{ScalingReport, SweepConfig};
pub use waves::{CelerityResult, WaveLocus};
