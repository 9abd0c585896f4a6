use std::fmt;

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::eos::{hessian_raw, partials_raw, BulkConditions, FluidParams};
use crate::{Error, Result};

use super::stencil::laplacian3_at;
use super::{bulk_states, closed_profile, interface_width, GridConfig, Profile, Provenance};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NewtonOptions {
    /// Infinity-norm of the residual at which the iteration stops.
    pub tol: f64,
    pub max_iter: usize,
    /// Step halvings allowed per iteration before giving up.
    pub max_halvings: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 50,
            max_halvings: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewtonReport {
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
    /// Residual infinity-norm before each iteration, then the final one.
    pub residual_history: Vec<f64>,
    /// Step length accepted at each iteration (1, 1/2, 1/4, ...).
    pub damping_history: Vec<f64>,
}

impl fmt::Display for NewtonReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} iterations, residual {:.3e}, converged {}, residuals [",
            self.iterations, self.residual, self.converged
        )?;
        for (i, r) in self.residual_history.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{r:.3e}")?;
        }
        f.write_str("], steps [")?;
        for (i, d) in self.damping_history.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{d}")?;
        }
        f.write_str("]")
    }
}

/// Solves the coupled equilibrium system
///
/// ```text
/// C rho'' + D s'' = d(rho alpha)/d rho - s T0 - mu1
/// D rho'' + E s'' = d(rho alpha)/d s   - rho T0
/// ```
///
/// on `[-L, L]` with the exact bulk states imposed at both ends. Second
/// derivatives use the three-point stencil, so the Jacobian is
/// block-tridiagonal with 2x2 blocks; it is factored by block elimination.
/// The closed-form tanh profile is the initial guess.
///
/// On a finite box the interface position is fixed only by exponentially
/// weak interactions of its tails with the walls, so the Jacobian has a
/// nearly singular translation mode. When plain damped Newton stalls on it,
/// the solver pins `rho = rho_c` at a trial position `y*`, solves the
/// remaining equations, and root-finds `y*` on the one equation left out.
/// All linear solves count toward `max_iter`.
pub fn solve_full_bvp(
    p: &FluidParams,
    bc: &BulkConditions,
    g: &GridConfig,
    opts: &NewtonOptions,
) -> Result<(Profile, NewtonReport)> {
    let seed = closed_profile(p, bc, g)?;
    let h = seed.spacing();
    let mut rho = seed.rho().to_vec();
    let mut s = seed.s().to_vec();
    let (liquid, vapor) = bulk_states(p, bc);
    let n = rho.len();
    rho[0] = vapor.rho();
    s[0] = vapor.s();
    rho[n - 1] = liquid.rho();
    s[n - 1] = liquid.s();

    let mut solver = Solver {
        p,
        bc,
        h,
        y: seed.y(),
        opts,
        ws: Workspace::new(n - 2),
        report: NewtonReport {
            iterations: 0,
            residual: f64::INFINITY,
            converged: false,
            residual_history: Vec::new(),
            damping_history: Vec::new(),
        },
    };

    let first = solver.residual(&rho, &s, None);
    solver.record(first.norm, None);

    match solver.damped_newton(&mut rho, &mut s, None)? {
        Phase::Converged => {}
        Phase::Stalled => {
            // the pinned search only helps once the profile is otherwise
            // equilibrated; far from it a stall is a genuine divergence
            if solver.report.residual > STALL_WINDOW * first.norm.max(opts.tol) {
                return Err(Error::NewtonDiverged(Box::new(solver.report)));
            }
            solver.translation_search(&mut rho, &mut s)?;
        }
    }
    solver.report.converged = true;

    let prof = Profile::new(p, seed.y().to_vec(), rho, s, *bc, Provenance::FullSolver)?;
    Ok((prof, solver.report))
}

/// A plain-Newton stall is handed to the pinned search only if the residual
/// has already dropped below this fraction of the seed residual.
const STALL_WINDOW: f64 = 1e-2;
/// A damped step at or below this length counts as a stall.
const STALL_STEP: f64 = 0.125;

/// `rho = rho_c` imposed at `y* = y[i] + theta (y[i+1] - y[i])` in place of
/// the density equation at interior node `i`.
#[derive(Debug, Clone, Copy)]
struct Pin {
    node: usize,
    theta: f64,
    level: f64,
}

#[derive(Debug, Clone, Copy)]
struct Residual {
    /// Infinity-norm of the unmodified system.
    norm: f64,
    /// Infinity-norm of the system being iterated (pinned or not).
    iterated: f64,
    /// Density-equation residual at the pinned node.
    force: f64,
}

enum Phase {
    Converged,
    Stalled,
}

struct Solver<'a> {
    p: &'a FluidParams,
    bc: &'a BulkConditions,
    h: f64,
    y: &'a [f64],
    opts: &'a NewtonOptions,
    ws: Workspace,
    report: NewtonReport,
}

impl Solver<'_> {
    fn record(&mut self, norm: f64, step: Option<f64>) {
        if let Some(step) = step {
            self.report.iterations += 1;
            self.report.damping_history.push(step);
        }
        self.report.residual_history.push(norm);
        self.report.residual = norm;
    }

    fn residual(&mut self, rho: &[f64], s: &[f64], pin: Option<Pin>) -> Residual {
        let (norm, iterated, force) =
            residual(self.p, self.bc, rho, s, self.h, pin, &mut self.ws.res);
        Residual {
            norm,
            iterated,
            force,
        }
    }

    /// Damped Newton on the (optionally pinned) system until the unmodified
    /// residual reaches `tol`, or, when pinned, until the pinned rows do.
    fn damped_newton(
        &mut self,
        rho: &mut Vec<f64>,
        s: &mut Vec<f64>,
        pin: Option<Pin>,
    ) -> Result<Phase> {
        let tol = self.opts.tol;
        let mut current = self.residual(rho, s, pin);
        loop {
            if current.norm <= tol {
                return Ok(Phase::Converged);
            }
            if pin.is_some() && current.iterated <= tol {
                return Ok(Phase::Stalled);
            }
            if self.report.iterations >= self.opts.max_iter {
                return Err(Error::MaxIterations(Box::new(self.report.clone())));
            }
            if !self.ws.newton_step(self.p, self.bc, rho, s, self.h, pin) {
                return Err(Error::NewtonDiverged(Box::new(self.report.clone())));
            }
            let n = rho.len();
            let mut step = 1.0;
            let mut accepted = None;
            for _ in 0..=self.opts.max_halvings {
                self.ws.trial_rho.copy_from_slice(rho);
                self.ws.trial_s.copy_from_slice(s);
                let mut positive = true;
                for k in 0..n - 2 {
                    self.ws.trial_rho[k + 1] += step * self.ws.delta[k][0];
                    self.ws.trial_s[k + 1] += step * self.ws.delta[k][1];
                    positive &= self.ws.trial_rho[k + 1] > 0.0;
                }
                if positive {
                    let ws = &mut self.ws;
                    let (norm, iterated, force) = residual(
                        self.p,
                        self.bc,
                        &ws.trial_rho,
                        &ws.trial_s,
                        self.h,
                        pin,
                        &mut ws.res,
                    );
                    let trial = Residual {
                        norm,
                        iterated,
                        force,
                    };
                    if trial.iterated.is_finite() && trial.iterated < current.iterated {
                        accepted = Some(trial);
                        break;
                    }
                }
                step *= 0.5;
            }
            let Some(trial) = accepted else {
                self.report.iterations += 1;
                if pin.is_none() {
                    return Ok(Phase::Stalled);
                }
                return Err(Error::NewtonDiverged(Box::new(self.report.clone())));
            };
            std::mem::swap(rho, &mut self.ws.trial_rho);
            std::mem::swap(s, &mut self.ws.trial_s);
            current = trial;
            self.record(current.norm, Some(step));
            if pin.is_none() && step <= STALL_STEP && current.norm > tol {
                return Ok(Phase::Stalled);
            }
        }
    }

    fn pin_at(&self, y_star: f64) -> Option<Pin> {
        let n = self.y.len();
        let x = (y_star - self.y[0]) / self.h;
        if !(x >= 1.0 && x < (n - 2) as f64) {
            return None;
        }
        let i = x.floor() as usize;
        Some(Pin {
            node: i - 1,
            theta: x - i as f64,
            level: self.p.rho_c(),
        })
    }

    /// Solves the pinned system at `y*` starting from `(rho, s)` and returns
    /// the left-out density residual; `Ok(None)` means the unmodified system
    /// converged on the way.
    fn force_at(
        &mut self,
        y_star: f64,
        rho: &mut Vec<f64>,
        s: &mut Vec<f64>,
    ) -> Result<Option<f64>> {
        let pin = self
            .pin_at(y_star)
            .ok_or_else(|| Error::NewtonDiverged(Box::new(self.report.clone())))?;
        match self.damped_newton(rho, s, Some(pin))? {
            Phase::Converged => Ok(None),
            Phase::Stalled => Ok(Some(self.residual(rho, s, Some(pin)).force)),
        }
    }

    /// Root-finds the pinned position `y*` at which the left-out density
    /// equation is satisfied too: secant steps, bounded by `max_jump`, until
    /// the force changes sign, then Illinois false position.
    fn translation_search(&mut self, rho: &mut Vec<f64>, s: &mut Vec<f64>) -> Result<()> {
        let y_mid = |rho: &[f64], y: &[f64], level: f64| {
            (0..rho.len() - 1).find_map(|i| {
                let (a, b) = (rho[i] - level, rho[i + 1] - level);
                (a == 0.0 || a * b < 0.0).then(|| y[i] + a / (a - b) * (y[i + 1] - y[i]))
            })
        };
        let diverged = |report: &NewtonReport| Error::NewtonDiverged(Box::new(report.clone()));
        let width = interface_width(self.p, self.bc)?;
        let max_jump = width;
        let limit = 0.5 * (self.y[self.y.len() - 1] - self.y[0]) * 0.5;

        let mut ya = y_mid(rho, self.y, self.p.rho_c()).ok_or_else(|| diverged(&self.report))?;
        let Some(mut fa) = self.force_at(ya, rho, s)? else {
            return Ok(());
        };
        let mut yb = ya + 0.05 * width;
        let (mut rho_b, mut s_b) = (rho.clone(), s.clone());
        let Some(mut fb) = self.force_at(yb, &mut rho_b, &mut s_b)? else {
            *rho = rho_b;
            *s = s_b;
            return Ok(());
        };

        // expand until the force changes sign
        while fa * fb > 0.0 {
            let secant = yb - fb * (yb - ya) / (fb - fa);
            let next = if secant.is_finite() {
                yb + (secant - yb).clamp(-max_jump, max_jump)
            } else {
                yb + max_jump * (yb - ya).signum()
            };
            if next.abs() > limit {
                return Err(diverged(&self.report));
            }
            ya = yb;
            fa = fb;
            *rho = rho_b.clone();
            *s = s_b.clone();
            yb = next;
            match self.force_at(yb, &mut rho_b, &mut s_b)? {
                Some(f) => fb = f,
                None => {
                    *rho = rho_b;
                    *s = s_b;
                    return Ok(());
                }
            }
        }

        // Illinois false position on the bracket [ya, yb]
        let (mut rho_a, mut s_a) = (rho.clone(), s.clone());
        loop {
            let yc = (ya * fb - yb * fa) / (fb - fa);
            let (mut rho_c, mut s_c) = if (yc - ya).abs() < (yc - yb).abs() {
                (rho_a.clone(), s_a.clone())
            } else {
                (rho_b.clone(), s_b.clone())
            };
            let Some(fc) = self.force_at(yc, &mut rho_c, &mut s_c)? else {
                *rho = rho_c;
                *s = s_c;
                return Ok(());
            };
            if fc * fb < 0.0 {
                ya = yb;
                fa = fb;
                rho_a = rho_b;
                s_a = s_b;
            } else {
                fa *= 0.5;
            }
            rho_b = rho_c;
            s_b = s_c;
            yb = yc;
            fb = fc;
        }
    }
}

/// Fills `out` with the residual at the interior nodes. Returns the
/// infinity-norm of the unmodified system, that of the iterated system (the
/// pinned row replaced by its constraint) and the left-out density residual.
fn residual(
    p: &FluidParams,
    bc: &BulkConditions,
    rho: &[f64],
    s: &[f64],
    h: f64,
    pin: Option<Pin>,
    out: &mut [[f64; 2]],
) -> (f64, f64, f64) {
    let (c, d, e) = (p.c(), p.d(), p.e());
    let mut norm = 0.0f64;
    for (k, slot) in out.iter_mut().enumerate() {
        let i = k + 1;
        let lr = laplacian3_at(rho, i, h);
        let ls = laplacian3_at(s, i, h);
        let (f_rho, f_s) = partials_raw(p, rho[i], s[i]);
        let r1 = c * lr + d * ls - (f_rho - s[i] * bc.t0() - bc.mu1());
        let r2 = d * lr + e * ls - (f_s - rho[i] * bc.t0());
        *slot = [r1, r2];
        norm = norm.max(r1.abs()).max(r2.abs());
    }
    let mut iterated = norm;
    let mut force = 0.0;
    if let Some(pin) = pin {
        let i = pin.node + 1;
        force = out[pin.node][0];
        out[pin.node][0] = (1.0 - pin.theta) * rho[i] + pin.theta * rho[i + 1] - pin.level;
        iterated = out
            .iter()
            .fold(0.0f64, |m, r| m.max(r[0].abs()).max(r[1].abs()));
    }
    if norm.is_nan() || iterated.is_nan() {
        (f64::INFINITY, f64::INFINITY, force)
    } else {
        (norm, iterated, force)
    }
}

struct Workspace {
    res: Vec<[f64; 2]>,
    delta: Vec<[f64; 2]>,
    // block elimination storage
    upper: Vec<Matrix2<f64>>,
    rhs: Vec<Vector2<f64>>,
    trial_rho: Vec<f64>,
    trial_s: Vec<f64>,
}

impl Workspace {
    fn new(interior: usize) -> Self {
        Self {
            res: vec![[0.0; 2]; interior],
            delta: vec![[0.0; 2]; interior],
            upper: vec![Matrix2::zeros(); interior],
            rhs: vec![Vector2::zeros(); interior],
            trial_rho: vec![0.0; interior + 2],
            trial_s: vec![0.0; interior + 2],
        }
    }

    /// Solves `J delta = -F` at the current iterate (whose residual is in
    /// `self.res`). Returns `false` if a pivot block is singular.
    fn newton_step(
        &mut self,
        p: &FluidParams,
        bc: &BulkConditions,
        rho: &[f64],
        s: &[f64],
        h: f64,
        pin: Option<Pin>,
    ) -> bool {
        let m = Matrix2::new(p.c(), p.d(), p.d(), p.e());
        let off = m / (h * h);
        let nint = self.res.len();

        // (lower, diagonal, upper) blocks of row k
        let blocks = |k: usize| {
            let i = k + 1;
            let (rr, rs, ss) = hessian_raw(p, rho[i], s[i]);
            let rs = rs - bc.t0();
            let mut lower = off;
            let mut diag = -2.0 * off - Matrix2::new(rr, rs, rs, ss);
            let mut upper = off;
            if let Some(pin) = pin.filter(|pin| pin.node == k) {
                lower.set_row(0, &Matrix2::zeros().row(0));
                diag.set_row(0, &Matrix2::new(1.0 - pin.theta, 0.0, 0.0, 0.0).row(0));
                upper.set_row(0, &Matrix2::new(pin.theta, 0.0, 0.0, 0.0).row(0));
            }
            (lower, diag, upper)
        };

        // forward sweep
        let mut prev_upper = Matrix2::zeros();
        let mut prev_rhs = Vector2::zeros();
        for k in 0..nint {
            let (lower, diag, upper) = blocks(k);
            let b = Vector2::new(-self.res[k][0], -self.res[k][1]);
            let (pivot, rhs) = if k == 0 {
                (diag, b)
            } else {
                (diag - lower * prev_upper, b - lower * prev_rhs)
            };
            let Some(inv) = pivot.try_inverse() else {
                return false;
            };
            prev_upper = inv * upper;
            prev_rhs = inv * rhs;
            self.upper[k] = prev_upper;
            self.rhs[k] = prev_rhs;
        }

        // back substitution
        let mut next = self.rhs[nint - 1];
        self.delta[nint - 1] = [next[0], next[1]];
        for k in (0..nint - 1).rev() {
            next = self.rhs[k] - self.upper[k] * next;
            self.delta[k] = [next[0], next[1]];
        }
        self.delta
            .iter()
            .all(|d| d[0].is_finite() && d[1].is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eos::RawFluidParams;
    use crate::equilibrium::interface_width;

    fn setup(dt: f64) -> (FluidParams, BulkConditions) {
        let p = FluidParams::reference();
        let bc = BulkConditions::from_delta_t(&p, dt).unwrap();
        (p, bc)
    }

    fn deviation(p: &FluidParams, bc: &BulkConditions, g: &GridConfig) -> f64 {
        let (full, _) = solve_full_bvp(p, bc, g, &NewtonOptions::default()).unwrap();
        crate::scaling::sup_deviation(p, bc, &full).unwrap()
    }

    #[test]
    fn converges_quickly_from_the_tanh_seed() {
        let (p, bc) = setup(0.01);
        let (prof, report) =
            solve_full_bvp(&p, &bc, &GridConfig::default(), &NewtonOptions::default()).unwrap();
        assert!(report.converged);
        assert!(report.iterations <= 10, "{report}");
        assert!(report.residual <= 1e-10);
        assert_eq!(report.damping_history.len(), report.iterations);
        assert_eq!(report.residual_history.len(), report.iterations + 1);
        assert_eq!(prof.provenance(), Provenance::FullSolver);

        // entropy stays slaved in the bulks
        let n = prof.len();
        for i in [1, 2, n - 3, n - 2] {
            let st = crate::ThermoState::new(prof.rho()[i], prof.s()[i]).unwrap();
            assert!((p.temperature(st) - bc.t0()).abs() < 1e-8);
        }
    }

    #[test]
    fn full_solution_stays_close_to_tanh() {
        let (p, bc) = setup(0.01);
        let dev = deviation(&p, &bc, &GridConfig::default());
        assert!(dev > 0.0 && dev < 1e-2, "{dev}");
    }

    #[test]
    fn dividing_surface_stays_centered() {
        let (p, bc) = setup(0.01);
        let (prof, _) =
            solve_full_bvp(&p, &bc, &GridConfig::default(), &NewtonOptions::default()).unwrap();
        let (y0, _) = prof.dividing_surface(p.rho_c()).unwrap();
        let zeta = interface_width(&p, &bc).unwrap();
        assert!(y0.abs() < 0.05 * zeta, "{y0}");
    }

    #[test]
    fn deviation_shrinks_toward_the_critical_point() {
        let p = FluidParams::reference();
        let g = GridConfig::default();
        let devs: Vec<f64> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&dt| deviation(&p, &BulkConditions::from_delta_t(&p, dt).unwrap(), &g))
            .collect();
        assert!(devs[0] > devs[1] && devs[1] > devs[2], "{devs:?}");
    }

    #[test]
    fn uncoupled_density_gradient_tracks_tanh_closer() {
        let p = FluidParams::validate(RawFluidParams {
            d: 0.0,
            ..RawFluidParams::REFERENCE
        })
        .unwrap();
        let bc = BulkConditions::from_delta_t(&p, 1e-3).unwrap();
        let g = GridConfig::new(15.0, 2001).unwrap();
        let dev = deviation(&p, &bc, &g);
        let coupled = deviation(&FluidParams::reference(), &bc, &g);
        assert!(dev < 1e-4, "{dev}");
        assert!(dev < 0.2 * coupled, "{dev} vs {coupled}");
    }

    #[test]
    fn critical_isotherm_is_rejected() {
        let (p, bc) = setup(0.0);
        assert!(matches!(
            solve_full_bvp(&p, &bc, &GridConfig::default(), &NewtonOptions::default()),
            Err(Error::CriticalIsotherm)
        ));
    }

    #[test]
    fn iteration_limit_is_reported() {
        let (p, bc) = setup(0.01);
        let opts = NewtonOptions {
            max_iter: 1,
            ..NewtonOptions::default()
        };
        match solve_full_bvp(&p, &bc, &GridConfig::default(), &opts) {
            Err(Error::MaxIterations(report)) => {
                assert_eq!(report.iterations, 1);
                assert!(!report.converged);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unreachable_tolerance_diverges_with_a_report() {
        let (p, bc) = setup(0.01);
        let opts = NewtonOptions {
            tol: 0.0,
            ..NewtonOptions::default()
        };
        match solve_full_bvp(&p, &bc, &GridConfig::default(), &opts) {
            Err(Error::NewtonDiverged(report)) => {
                assert!(report.residual < 1e-12);
                assert!(!report.converged);
                assert!(format!("{}", Error::NewtonDiverged(report)).contains("residual"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
