use crate::eos::{FluidParams, ThermoState};

use super::closed::NodalResidual;
use super::stencil::{first_derivative_at, laplacian3_at};
use super::Profile;

/// Korteweg stress `sigma_ij = -(P - rho div Phi) delta_ij - Phi_j rho_,i - Psi_j s_,i`
/// with `Phi = C grad rho + D grad s`, `Psi = D grad rho + E grad s`.
///
/// `P = rho eps_,rho - eps` is evaluated with the full volume energy, gradient
/// terms included, so `P = P_bulk - (C|grad rho|^2 + 2D grad rho.grad s + E|grad s|^2)/2`.
pub fn stress_tensor(
    p: &FluidParams,
    st: ThermoState,
    grad_rho: [f64; 3],
    grad_s: [f64; 3],
    lap_rho: f64,
    lap_s: f64,
) -> [[f64; 3]; 3] {
    let (c, d, e) = (p.c(), p.d(), p.e());
    let dot = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let gradient_energy = 0.5
        * (c * dot(grad_rho, grad_rho) + 2.0 * d * dot(grad_rho, grad_s) + e * dot(grad_s, grad_s));
    let pressure = p.pressure(st) - gradient_energy;
    let div_phi = c * lap_rho + d * lap_s;
    let iso = -(pressure - st.rho() * div_phi);

    let phi: [f64; 3] = std::array::from_fn(|j| c * grad_rho[j] + d * grad_s[j]);
    let psi: [f64; 3] = std::array::from_fn(|j| d * grad_rho[j] + e * grad_s[j]);
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let diag = if i == j { iso } else { 0.0 };
            diag - phi[j] * grad_rho[i] - psi[j] * grad_s[i]
        })
    })
}

/// `sigma_yy` along a one-dimensional profile (gradients along `y`), on the
/// nodes where the five-point stencils fit.
pub fn normal_stress(p: &FluidParams, prof: &Profile) -> NodalResidual {
    let (rho, s) = (prof.rho(), prof.s());
    let h = prof.spacing();
    let n = rho.len();
    let mut y = Vec::with_capacity(n - 4);
    let mut values = Vec::with_capacity(n - 4);
    for i in 2..n - 2 {
        let st = ThermoState::new(rho[i], s[i]).expect("profile densities are positive");
        let grad_rho = [0.0, first_derivative_at(rho, i, h), 0.0];
        let grad_s = [0.0, first_derivative_at(s, i, h), 0.0];
        let sigma = stress_tensor(
            p,
            st,
            grad_rho,
            grad_s,
            laplacian3_at(rho, i, h),
            laplacian3_at(s, i, h),
        );
        values.push(sigma[1][1]);
        y.push(prof.y()[i]);
    }
    NodalResidual { y, values }
}

/// `max |d sigma_yy / dy|` over interior nodes. Zero (up to discretization)
/// certifies the momentum balance at rest.
pub fn equilibrium_stress_residual(p: &FluidParams, prof: &Profile) -> f64 {
    let sigma = normal_stress(p, prof).values;
    let h = prof.spacing();
    (2..sigma.len().saturating_sub(2))
        .map(|i| first_derivative_at(&sigma, i, h).abs())
        .fold(0.0, f64::max)
}
