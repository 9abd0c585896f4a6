//! Isentropic acceleration waves (weak discontinuities) in the interface.
//!
//! Across a wave surface with normal `n`, density, entropy and their first
//! gradients are continuous. The second-derivative jumps `lambda1 = [lap rho]`,
//! `lambda2 = [lap s]` and the multiplier `lambda3` solve
//!
//! ```text
//! C lambda1 + D lambda2                         = 0
//! D a lambda1 + E a lambda2 + rho lambda3       = 0
//! D g2 lambda1 + (E g2 - rho v^2) lambda2       = 0
//! ```
//!
//! with `a = n . grad s` and `g2 = |grad_tg s|^2`. A nontrivial jump exists
//! iff `rho v^2 = (C E - D^2) g2 / C`.

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::eos::{BulkConditions, FluidParams};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawWaveLocus", into = "RawWaveLocus")]
pub struct WaveLocus {
    rho: f64,
    grad_s_normal: f64,
    grad_s_tg_sq: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWaveLocus {
    rho: f64,
    grad_s_normal: f64,
    grad_s_tg_sq: f64,
}

impl WaveLocus {
    pub fn new(rho: f64, grad_s_normal: f64, grad_s_tg_sq: f64) -> Result<Self> {
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::InvalidLocus(format!(
                "rho must be positive, got {rho}"
            )));
        }
        if !grad_s_normal.is_finite() {
            return Err(Error::InvalidLocus("grad_s_normal must be finite".into()));
        }
        if !(grad_s_tg_sq >= 0.0) || !grad_s_tg_sq.is_finite() {
            return Err(Error::InvalidLocus(format!(
                "grad_s_tg_sq must be non-negative, got {grad_s_tg_sq}"
            )));
        }
        Ok(Self {
            rho,
            grad_s_normal,
            grad_s_tg_sq,
        })
    }

    /// Locus from a wave normal and the full entropy gradient.
    pub fn from_vectors(rho: f64, normal: [f64; 3], grad_s: [f64; 3]) -> Result<Self> {
        let n = unit(normal)?;
        let a = dot(n, grad_s);
        let tg = tangential(n, grad_s);
        Self::new(rho, a, dot(tg, tg))
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }
    pub fn grad_s_normal(&self) -> f64 {
        self.grad_s_normal
    }
    pub fn grad_s_tg_sq(&self) -> f64 {
        self.grad_s_tg_sq
    }
}

impl TryFrom<RawWaveLocus> for WaveLocus {
    type Error = Error;
    fn try_from(raw: RawWaveLocus) -> Result<Self> {
        Self::new(raw.rho, raw.grad_s_normal, raw.grad_s_tg_sq)
    }
}

impl From<WaveLocus> for RawWaveLocus {
    fn from(l: WaveLocus) -> Self {
        Self {
            rho: l.rho,
            grad_s_normal: l.grad_s_normal,
            grad_s_tg_sq: l.grad_s_tg_sq,
        }
    }
}

/// Jump compatibility matrix acting on `(lambda1, lambda2, lambda3)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpSystem {
    pub matrix: Matrix3<f64>,
    pub v: f64,
}

impl JumpSystem {
    pub fn determinant(&self) -> f64 {
        self.matrix.determinant()
    }

    /// `M lambda`, row by row.
    pub fn apply(&self, lambda: [f64; 3]) -> [f64; 3] {
        let r = self.matrix * nalgebra::Vector3::from(lambda);
        [r[0], r[1], r[2]]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CelerityResult {
    /// Fluid-relative normal speed, `v >= 0`; `-v` is the mirror wave.
    pub v: f64,
    /// `(lambda1, lambda2, lambda3)` with `lambda2 = 1` when it is nonzero.
    pub lambda: [f64; 3],
    pub locus: WaveLocus,
}

impl CelerityResult {
    pub fn v_squared(&self) -> f64 {
        self.v * self.v
    }

    /// Coefficient `k` of the velocity-gradient jump `H = k grad_tg s`, from
    /// `rho v H = -(D lambda1 + E lambda2) grad_tg s`. `None` when `v = 0`.
    pub fn jump_coefficient(&self, p: &FluidParams) -> Option<f64> {
        if self.v == 0.0 {
            return None;
        }
        let [l1, l2, _] = self.lambda;
        Some(-(p.d() * l1 + p.e() * l2) / (self.locus.rho * self.v))
    }

    /// Jump vector `H` for an explicit wave normal and entropy gradient. `H`
    /// lies in the wave surface, so `n . H = 0`.
    pub fn jump_vector(
        &self,
        p: &FluidParams,
        normal: [f64; 3],
        grad_s: [f64; 3],
    ) -> Result<[f64; 3]> {
        let n = unit(normal)?;
        let tg = tangential(n, grad_s);
        let k = self.jump_coefficient(p).unwrap_or(0.0);
        Ok(tg.map(|x| k * x))
    }
}

/// Rows `[C, D, 0]`, `[D a, E a, rho]`, `[D g2, E g2 - rho v^2, 0]`.
pub fn jump_matrix(p: &FluidParams, locus: &WaveLocus, v: f64) -> JumpSystem {
    let (c, d, e) = (p.c(), p.d(), p.e());
    let a = locus.grad_s_normal;
    let g2 = locus.grad_s_tg_sq;
    let rho = locus.rho;
    #[rustfmt::skip]
    let matrix = Matrix3::new(
        c,      d,                      0.0,
        d * a,  e * a,                  rho,
        d * g2, e * g2 - rho * v * v,   0.0,
    );
    JumpSystem { matrix, v }
}

/// Closed-form null-space amplitudes, normalized to `lambda2 = 1`.
fn amplitudes(p: &FluidParams, locus: &WaveLocus) -> [f64; 3] {
    let (c, d, e) = (p.c(), p.d(), p.e());
    [
        -d / c,
        1.0,
        -(locus.grad_s_normal / locus.rho) * (e - d * d / c),
    ]
}

/// `v = sqrt((C E - D^2) g2 / (C rho))`.
pub fn celerity_general(p: &FluidParams, locus: &WaveLocus) -> CelerityResult {
    let v2 = p.gradient_discriminant() * locus.grad_s_tg_sq / (p.c() * locus.rho);
    CelerityResult {
        v: v2.sqrt(),
        lambda: amplitudes(p, locus),
        locus: *locus,
    }
}

/// Celerity by bisection on `v -> det(jump_matrix(v))` over `[0, 10 v*]`, where
/// `v*` is the closed-form value, followed by extraction of the null vector as
/// the smallest right singular direction at the root.
pub fn celerity_by_determinant(p: &FluidParams, locus: &WaveLocus) -> Result<CelerityResult> {
    let v_hi = 10.0 * celerity_general(p, locus).v;
    let det = |v: f64| jump_matrix(p, locus, v).determinant();
    let (mut lo, mut hi) = (0.0, v_hi);
    let (f_lo, f_hi) = (det(lo), det(hi));
    if !(f_lo * f_hi < 0.0) {
        return Err(Error::RootNotBracketed { v_hi });
    }
    let lo_negative = f_lo < 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f = det(mid);
        if f == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if (f < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let v = 0.5 * (lo + hi);

    // Rows differ in scale by |grad_tg s|^2; equilibrating them keeps the
    // singular values comparable.
    let system = jump_matrix(p, locus, v).matrix;
    let mut scaled = system;
    for mut row in scaled.row_iter_mut() {
        let norm = row.amax();
        if norm > 0.0 {
            row /= norm;
        }
    }
    let mut sv: Vec<f64> = scaled.singular_values().iter().copied().collect();
    sv.sort_by(f64::total_cmp);
    let (smallest, second) = (sv[0], sv[1]);
    if !(second > 1e3 * smallest) {
        return Err(Error::NullSpaceNotIsolated { smallest, second });
    }
    // At the root the third row is a combination of the first two and its
    // (3,2) entry E g^2 - rho v^2 is the product of a near cancellation, so
    // the null vector is taken orthogonal to the first two rows.
    let null = system.row(0).transpose().cross(&system.row(1).transpose());
    let mut lambda = [null[0], null[1], null[2]];
    if lambda[1].abs() > f64::EPSILON * null.amax() {
        let scale = lambda[1];
        lambda = lambda.map(|x| x / scale);
    }
    Ok(CelerityResult {
        v,
        lambda,
        locus: *locus,
    })
}

/// Locus at the dividing surface `rho = rho_c` with the wave normal
/// orthogonal to `grad rho`: there `grad s = A^2 (T_c - T0) / (2 B rho_c^2) grad rho`
/// and `C |grad rho|^2 = A^2 (T_c - T0)^2 / (2B)`.
pub fn dividing_surface_locus(p: &FluidParams, bc: &BulkConditions) -> WaveLocus {
    let (a, b, c, rho_c) = (p.a(), p.b(), p.c(), p.rho_c());
    let dt = bc.delta_t();
    let ratio = a * a * dt / (2.0 * b * rho_c * rho_c);
    let grad_rho_sq = a * a * dt * dt / (2.0 * b * c);
    WaveLocus::new(rho_c, 0.0, ratio * ratio * grad_rho_sq)
        .expect("dividing-surface locus is admissible")
}

/// `v^2 = (C E - D^2) A^6 (T_c - T0)^4 / (8 C^2 B^3 rho_c^5)`.
pub fn celerity_at_critical_density(p: &FluidParams, bc: &BulkConditions) -> CelerityResult {
    let (a, b, c, rho_c) = (p.a(), p.b(), p.c(), p.rho_c());
    let dt = bc.delta_t();
    let v2 = p.gradient_discriminant() * a.powi(6) * dt.powi(4)
        / (8.0 * c * c * b.powi(3) * rho_c.powi(5));
    let locus = dividing_surface_locus(p, bc);
    CelerityResult {
        v: v2.sqrt(),
        lambda: amplitudes(p, &locus),
        locus,
    }
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn unit(n: [f64; 3]) -> Result<[f64; 3]> {
    let norm = dot(n, n).sqrt();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::InvalidLocus(
            "wave normal must be a nonzero vector".into(),
        ));
    }
    Ok(n.map(|x| x / norm))
}

fn tangential(n: [f64; 3], v: [f64; 3]) -> [f64; 3] {
    let a = dot(n, v);
    std::array::from_fn(|i| v[i] - a * n[i])
}
