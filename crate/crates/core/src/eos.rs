//! Critical-point equation of state.
//!
//! The volumetric bulk energy is the Rowlinson-Widom expansion around the
//! critical state,
//!
//! ```text
//! rho*alpha = B/(2 A^2) * [ (A m^2 + eta)^2 + eta^2 ] + mu_c rho + T_c eta - p_c
//! m = rho - rho_c,  eta = rho s  (s_c = 0)
//! ```
//!
//! Partial derivatives are taken at fixed specific entropy `s` (for `rho`)
//! and at fixed density (for `s`).

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Candidate parameter set, as read from a config file. Convert with
/// [`FluidParams::validate`] (or `TryFrom`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawFluidParams {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub rho_c: f64,
    #[serde(rename = "T_c")]
    pub t_c: f64,
    pub mu_c: f64,
    pub p_c: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "D")]
    pub d: f64,
    #[serde(rename = "E")]
    pub e: f64,
}

impl RawFluidParams {
    /// Reduced units: A = B = rho_c = T_c = C = E = 1, mu_c = p_c = 0, D = 0.2.
    pub const REFERENCE: RawFluidParams = RawFluidParams {
        a: 1.0,
        b: 1.0,
        rho_c: 1.0,
        t_c: 1.0,
        mu_c: 0.0,
        p_c: 0.0,
        c: 1.0,
        d: 0.2,
        e: 1.0,
    };
}

/// Validated critical-point constants and gradient coefficients.
///
/// Invariants: `A, B, rho_c, T_c > 0`, `C > 0` and `C E - D^2 > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFluidParams", into = "RawFluidParams")]
pub struct FluidParams {
    raw: RawFluidParams,
}

impl FluidParams {
    pub fn validate(raw: RawFluidParams) -> Result<Self> {
        let fields = [
            ("A", raw.a),
            ("B", raw.b),
            ("rho_c", raw.rho_c),
            ("T_c", raw.t_c),
            ("mu_c", raw.mu_c),
            ("p_c", raw.p_c),
            ("C", raw.c),
            ("D", raw.d),
            ("E", raw.e),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(Error::NonFinite(name));
            }
        }
        for (name, value) in [
            ("A", raw.a),
            ("B", raw.b),
            ("rho_c", raw.rho_c),
            ("T_c", raw.t_c),
        ] {
            if value <= 0.0 {
                return Err(Error::NonPositiveConstant(name));
            }
        }
        let discriminant = raw.c * raw.e - raw.d * raw.d;
        if raw.c <= 0.0 || discriminant <= 0.0 {
            return Err(Error::IndefiniteGradientForm {
                c: raw.c,
                discriminant,
            });
        }
        Ok(Self { raw })
    }

    /// The reduced-unit reference fluid used throughout the examples.
    pub fn reference() -> Self {
        Self::validate(RawFluidParams::REFERENCE).expect("reference parameters are admissible")
    }

    pub fn raw(&self) -> RawFluidParams {
        self.raw
    }

    pub fn a(&self) -> f64 {
        self.raw.a
    }
    pub fn b(&self) -> f64 {
        self.raw.b
    }
    pub fn rho_c(&self) -> f64 {
        self.raw.rho_c
    }
    pub fn t_c(&self) -> f64 {
        self.raw.t_c
    }
    pub fn mu_c(&self) -> f64 {
        self.raw.mu_c
    }
    pub fn p_c(&self) -> f64 {
        self.raw.p_c
    }
    pub fn c(&self) -> f64 {
        self.raw.c
    }
    pub fn d(&self) -> f64 {
        self.raw.d
    }
    pub fn e(&self) -> f64 {
        self.raw.e
    }

    /// `C E - D^2`, strictly positive.
    pub fn gradient_discriminant(&self) -> f64 {
        self.raw.c * self.raw.e - self.raw.d * self.raw.d
    }

    /// Volumetric bulk energy `rho*alpha(rho, s)`.
    pub fn bulk_energy(&self, st: ThermoState) -> f64 {
        bulk_energy_raw(self, st.rho, st.s)
    }

    /// `(d(rho alpha)/d rho |_s, d(rho alpha)/d s |_rho)`.
    pub fn bulk_energy_partials(&self, st: ThermoState) -> (f64, f64) {
        partials_raw(self, st.rho, st.s)
    }

    /// Second derivatives `[[f_rr, f_rs], [f_rs, f_ss]]` of the bulk energy
    /// in the `(rho, s)` variables.
    pub fn bulk_energy_hessian(&self, st: ThermoState) -> [[f64; 2]; 2] {
        let (rr, rs, ss) = hessian_raw(self, st.rho, st.s);
        [[rr, rs], [rs, ss]]
    }

    /// Kelvin temperature `T = (1/rho) d(rho alpha)/ds`.
    pub fn temperature(&self, st: ThermoState) -> f64 {
        temperature_raw(self, st.rho, st.s)
    }

    /// Specific enthalpy `h0 = d(rho alpha)/d rho` of the homogeneous fluid.
    pub fn enthalpy(&self, st: ThermoState) -> f64 {
        partials_raw(self, st.rho, st.s).0
    }

    /// Bulk pressure `P = rho h0 - rho alpha`.
    pub fn pressure(&self, st: ThermoState) -> f64 {
        let (h0, _) = partials_raw(self, st.rho, st.s);
        st.rho * h0 - bulk_energy_raw(self, st.rho, st.s)
    }

    /// `mu0 = h0 - s T0`.
    pub fn chemical_potential_full(&self, st: ThermoState, bc: &BulkConditions) -> f64 {
        self.enthalpy(st) - st.s * bc.t0
    }

    /// Chemical potential along the `T = T0` manifold,
    /// `mu_c + B m^3 - A (T_c - T0) m`.
    pub fn chemical_potential_cubic(&self, rho: f64, bc: &BulkConditions) -> f64 {
        let m = rho - self.rho_c();
        self.mu_c() + self.b() * m * m * m - self.a() * bc.delta_t * m
    }

    /// Specific entropy that puts `(rho, s)` at temperature `T0`:
    /// `2 rho s = (A^2/B)(T0 - T_c) - A (rho - rho_c)^2`.
    pub fn entropy_slave(&self, rho: f64, bc: &BulkConditions) -> f64 {
        entropy_slave_raw(self, rho, bc.delta_t)
    }
}

impl TryFrom<RawFluidParams> for FluidParams {
    type Error = Error;

    fn try_from(raw: RawFluidParams) -> Result<Self> {
        Self::validate(raw)
    }
}

impl From<FluidParams> for RawFluidParams {
    fn from(p: FluidParams) -> Self {
        p.raw
    }
}

/// Local `(rho, s)` pair. `rho > 0`; `s` is unrestricted (negative below `T_c`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermoState {
    rho: f64,
    s: f64,
}

impl ThermoState {
    pub fn new(rho: f64, s: f64) -> Result<Self> {
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::NonPositiveDensity(rho));
        }
        if !s.is_finite() {
            return Err(Error::NonFinite("s"));
        }
        Ok(Self { rho, s })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn s(&self) -> f64 {
        self.s
    }
}

/// Bulk temperature `T0 <= T_c` and chemical potential `mu1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BulkConditions {
    #[serde(rename = "T0")]
    pub(crate) t0: f64,
    pub(crate) mu1: f64,
    #[serde(rename = "delta_T")]
    pub(crate) delta_t: f64,
}

impl BulkConditions {
    /// Conditions at distance `delta_t = T_c - T0` below the critical point,
    /// with `mu1 = mu_c`.
    pub fn from_delta_t(p: &FluidParams, delta_t: f64) -> Result<Self> {
        if !delta_t.is_finite() {
            return Err(Error::NonFinite("delta_T"));
        }
        if delta_t < 0.0 {
            return Err(Error::SupercriticalTemperature(delta_t));
        }
        Ok(Self {
            t0: p.t_c() - delta_t,
            mu1: p.mu_c(),
            delta_t,
        })
    }

    pub fn from_temperature(p: &FluidParams, t0: f64) -> Result<Self> {
        if !t0.is_finite() {
            return Err(Error::NonFinite("T0"));
        }
        let delta_t = p.t_c() - t0;
        if delta_t < 0.0 {
            return Err(Error::SupercriticalTemperature(delta_t));
        }
        Ok(Self {
            t0,
            mu1: p.mu_c(),
            delta_t,
        })
    }

    /// Overrides the bulk chemical potential. Profiles with `mu1 != mu_c`
    /// carry no guarantee of a connecting orbit.
    pub fn with_mu1(mut self, mu1: f64) -> Self {
        self.mu1 = mu1;
        self
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn mu1(&self) -> f64 {
        self.mu1
    }

    pub fn delta_t(&self) -> f64 {
        self.delta_t
    }
}

pub(crate) fn bulk_energy_raw(p: &FluidParams, rho: f64, s: f64) -> f64 {
    let (a, b) = (p.a(), p.b());
    let m = rho - p.rho_c();
    let eta = rho * s;
    let q = a * m * m + eta;
    b / (2.0 * a * a) * (q * q + eta * eta) + p.mu_c() * rho + p.t_c() * eta - p.p_c()
}

/// Chain-rule form: with `q = A m^2 + eta`,
/// `d/drho = (B/A^2) [q (2 A m + s) + eta s] + mu_c + T_c s` and
/// `d/ds = (B/A^2) rho (q + eta) + T_c rho`.
pub(crate) fn partials_raw(p: &FluidParams, rho: f64, s: f64) -> (f64, f64) {
    let (a, b) = (p.a(), p.b());
    let k = b / (a * a);
    let m = rho - p.rho_c();
    let eta = rho * s;
    let q = a * m * m + eta;
    let d_rho = k * (q * (2.0 * a * m + s) + eta * s) + p.mu_c() + p.t_c() * s;
    let d_s = k * rho * (q + eta) + p.t_c() * rho;
    (d_rho, d_s)
}

pub(crate) fn hessian_raw(p: &FluidParams, rho: f64, s: f64) -> (f64, f64, f64) {
    let (a, b) = (p.a(), p.b());
    let m = rho - p.rho_c();
    let rr = 6.0 * b * m * m
        + 4.0 * (b / a) * m * s
        + 2.0 * (b / a) * rho * s
        + 2.0 * (b / (a * a)) * s * s;
    let rs = (b / a) * m * m + 2.0 * (b / a) * rho * m + 4.0 * (b / (a * a)) * rho * s + p.t_c();
    let ss = 2.0 * (b / (a * a)) * rho * rho;
    (rr, rs, ss)
}

pub(crate) fn temperature_raw(p: &FluidParams, rho: f64, s: f64) -> f64 {
    let (a, b) = (p.a(), p.b());
    let m = rho - p.rho_c();
    b / (a * a) * (a * m * m + 2.0 * rho * s) + p.t_c()
}

pub(crate) fn entropy_slave_raw(p: &FluidParams, rho: f64, delta_t: f64) -> f64 {
    let (a, b) = (p.a(), p.b());
    let m = rho - p.rho_c();
    (-(a * a / b) * delta_t - a * m * m) / (2.0 * rho)
}
