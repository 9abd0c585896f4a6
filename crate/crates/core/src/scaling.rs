//! Sweeps over `T_c - T0` and log-log power-law fits.
//!
//! Every observable near the critical point is a power of `dT = T_c - T0`:
//!
//! | column       | exponent |
//! |--------------|----------|
//! | `amp_rho`    | 1/2      |
//! | `amp_s`      | 1        |
//! | `zeta`       | -1/2     |
//! | `sigma`      | 3/2      |
//! | `v`          | 2        |
//! | `deviation`  | 1        |
//!
//! (the rescaling `y ~ 1/eps`, `rho - rho_c ~ eps`, `s ~ eps^2` with
//! `dT ~ eps^2`). Rows are independent and evaluated with [`crate::par`].

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::eos::{BulkConditions, FluidParams};
use crate::equilibrium::{
    bulk_states, closed_profile, interface_width, solve_full_bvp, surface_tension_quadrature,
    GridConfig, NewtonOptions, Profile,
};
use crate::par::{map_ordered, Execution};
use crate::waves::celerity_at_critical_density;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSweepConfig", into = "RawSweepConfig")]
pub struct SweepConfig {
    delta_t_values: Vec<f64>,
    use_full_solver: bool,
    grid: GridConfig,
    newton: NewtonOptions,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweepConfig {
    #[serde(rename = "delta_T_values")]
    delta_t_values: Vec<f64>,
    #[serde(default)]
    use_full_solver: bool,
    #[serde(default)]
    grid: GridConfig,
    #[serde(default)]
    newton: NewtonOptions,
}

impl SweepConfig {
    pub const DEFAULT_DELTA_T: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];

    /// At least four strictly positive, strictly decreasing values spanning
    /// two decades or more.
    pub fn new(
        delta_t_values: Vec<f64>,
        use_full_solver: bool,
        grid: GridConfig,
        newton: NewtonOptions,
    ) -> Result<Self> {
        if delta_t_values.len() < 4 {
            return Err(Error::InvalidSweep(format!(
                "need at least 4 delta_T values, got {}",
                delta_t_values.len()
            )));
        }
        if delta_t_values.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(Error::InvalidSweep(
                "delta_T values must be positive".into(),
            ));
        }
        if delta_t_values.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::InvalidSweep(
                "delta_T values must be strictly decreasing".into(),
            ));
        }
        let span = (delta_t_values[0] / delta_t_values[delta_t_values.len() - 1]).log10();
        if span < 2.0 - 1e-9 {
            return Err(Error::InvalidSweep(format!(
                "delta_T values span {span:.3} decades, need 2"
            )));
        }
        Ok(Self {
            delta_t_values,
            use_full_solver,
            grid,
            newton,
        })
    }

    pub fn delta_t_values(&self) -> &[f64] {
        &self.delta_t_values
    }
    pub fn use_full_solver(&self) -> bool {
        self.use_full_solver
    }
    pub fn grid(&self) -> &GridConfig {
        &self.grid
    }
    pub fn newton(&self) -> &NewtonOptions {
        &self.newton
    }

    pub fn with_full_solver(mut self, full: bool) -> Self {
        self.use_full_solver = full;
        self
    }
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            delta_t_values: Self::DEFAULT_DELTA_T.to_vec(),
            use_full_solver: false,
            grid: GridConfig::default(),
            newton: NewtonOptions::default(),
        }
    }
}

impl TryFrom<RawSweepConfig> for SweepConfig {
    type Error = Error;
    fn try_from(raw: RawSweepConfig) -> Result<Self> {
        Self::new(
            raw.delta_t_values,
            raw.use_full_solver,
            raw.grid,
            raw.newton,
        )
    }
}

impl From<SweepConfig> for RawSweepConfig {
    fn from(c: SweepConfig) -> Self {
        Self {
            delta_t_values: c.delta_t_values,
            use_full_solver: c.use_full_solver,
            grid: c.grid,
            newton: c.newton,
        }
    }
}

/// One sweep row. Failed rows carry `NaN` observables and the error text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "delta_T")]
    pub delta_t: f64,
    /// `max |rho - rho_c|`.
    pub amp_rho: f64,
    /// `|s|` at the dividing surface `rho = rho_c`.
    pub amp_s: f64,
    pub zeta_measured: f64,
    pub sigma_quad: f64,
    pub v: f64,
    /// `max |rho_full - rho_tanh| / (rho_l - rho_v)`; full-solver sweeps only.
    pub full_vs_reduced_deviation: Option<f64>,
    pub error: Option<String>,
}

impl SweepRow {
    pub fn ok(&self) -> bool {
        self.error.is_none()
    }

    fn failed(delta_t: f64, err: &Error) -> Self {
        Self {
            delta_t,
            amp_rho: f64::NAN,
            amp_s: f64::NAN,
            zeta_measured: f64::NAN,
            sigma_quad: f64::NAN,
            v: f64::NAN,
            full_vs_reduced_deviation: None,
            error: Some(err.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Law {
    AmpRho,
    AmpS,
    Zeta,
    Sigma,
    V,
    Deviation,
}

impl Law {
    pub const ALL: [Law; 6] = [
        Law::AmpRho,
        Law::AmpS,
        Law::Zeta,
        Law::Sigma,
        Law::V,
        Law::Deviation,
    ];

    pub fn target(self) -> f64 {
        match self {
            Law::AmpRho => 0.5,
            Law::AmpS => 1.0,
            Law::Zeta => -0.5,
            Law::Sigma => 1.5,
            Law::V => 2.0,
            Law::Deviation => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Law::AmpRho => "amp_rho",
            Law::AmpS => "amp_s",
            Law::Zeta => "zeta",
            Law::Sigma => "sigma",
            Law::V => "v",
            Law::Deviation => "deviation",
        }
    }

    /// Whether the column comes from the solved profile (as opposed to a
    /// closed formula) when the sweep uses the full solver.
    fn measured_on_profile(self) -> bool {
        !matches!(self, Law::V)
    }

    fn value(self, row: &SweepRow) -> Option<f64> {
        match self {
            Law::AmpRho => Some(row.amp_rho),
            Law::AmpS => Some(row.amp_s),
            Law::Zeta => Some(row.zeta_measured),
            Law::Sigma => Some(row.sigma_quad),
            Law::V => Some(row.v),
            Law::Deviation => row.full_vs_reduced_deviation,
        }
    }
}

/// Slope tolerances: `closed` for columns that are exact power laws,
/// `full` for columns measured on full-solver profiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExponentTolerances {
    pub closed: f64,
    pub full: f64,
}

impl Default for ExponentTolerances {
    fn default() -> Self {
        Self {
            closed: 0.02,
            full: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub slope: f64,
    pub intercept: f64,
    /// Largest absolute residual in `ln y`.
    pub max_residual: f64,
    pub slope_stderr: Option<f64>,
    /// Half-width of the 95% confidence interval on the slope.
    pub slope_ci95: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawVerdict {
    pub law: Law,
    pub target: f64,
    pub tolerance: f64,
    pub fit: Option<PowerLawFit>,
    pub points: usize,
    pub pass: bool,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub full_solver: bool,
    pub rows: Vec<SweepRow>,
    pub fits: Vec<LawVerdict>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    pub laws: Vec<LawVerdict>,
    pub all_pass: bool,
}

/// Ordinary least squares of `ln y` on `ln x`.
pub fn fit_exponent(points: &[(f64, f64)]) -> Result<PowerLawFit> {
    if points.len() < 2 {
        return Err(Error::TooFewPoints(points.len()));
    }
    if points
        .iter()
        .any(|&(x, y)| !(x > 0.0 && y > 0.0) || !x.is_finite() || !y.is_finite())
    {
        return Err(Error::NonPositiveData);
    }
    let (xmin, xmax) = points
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &(x, _)| {
            (lo.min(x), hi.max(x))
        });
    let decades = (xmax / xmin).log10();
    if decades < 1.0 - 1e-9 {
        return Err(Error::DegenerateSpan { decades });
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| y - (intercept + slope * x))
        .collect();
    let max_residual = residuals.iter().fold(0.0f64, |a, r| a.max(r.abs()));

    let dof = points.len() as f64 - 2.0;
    let (slope_stderr, slope_ci95) = if dof >= 1.0 {
        let rss: f64 = residuals.iter().map(|r| r * r).sum();
        let se = (rss / dof / sxx).sqrt();
        let t = StudentsT::new(0.0, 1.0, dof)
            .expect("positive degrees of freedom")
            .inverse_cdf(0.975);
        (Some(se), Some(t * se))
    } else {
        (None, None)
    };
    Ok(PowerLawFit {
        slope,
        intercept,
        max_residual,
        slope_stderr,
        slope_ci95,
    })
}

/// Refits every law from the report rows and compares slopes to their
/// targets. Failures are data: a law with too few usable rows fails with a
/// note instead of returning an error.
pub fn verify_exponents(report: &ScalingReport, tolerances: &ExponentTolerances) -> Verification {
    let laws: Vec<LawVerdict> = Law::ALL
        .iter()
        .filter(|law| report.full_solver || **law != Law::Deviation)
        .map(|&law| {
            let tolerance = if report.full_solver && law.measured_on_profile() {
                tolerances.full
            } else {
                tolerances.closed
            };
            let points: Vec<(f64, f64)> = report
                .rows
                .iter()
                .filter(|r| r.ok())
                .filter_map(|r| law.value(r).map(|v| (r.delta_t, v)))
                .collect();
            match fit_exponent(&points) {
                Ok(fit) => LawVerdict {
                    law,
                    target: law.target(),
                    tolerance,
                    pass: (fit.slope - law.target()).abs() <= tolerance,
                    fit: Some(fit),
                    points: points.len(),
                    note: None,
                },
                Err(err) => LawVerdict {
                    law,
                    target: law.target(),
                    tolerance,
                    fit: None,
                    points: points.len(),
                    pass: false,
                    note: Some(err.to_string()),
                },
            }
        })
        .collect();
    let all_pass = laws.iter().all(|l| l.pass);
    Verification { laws, all_pass }
}

pub fn run_sweep(p: &FluidParams, cfg: &SweepConfig) -> ScalingReport {
    run_sweep_with(p, cfg, Execution::default())
}

pub fn run_sweep_with(p: &FluidParams, cfg: &SweepConfig, exec: Execution) -> ScalingReport {
    let rows = map_ordered(exec, &cfg.delta_t_values, |&dt| {
        sweep_row(p, dt, cfg).unwrap_or_else(|err| SweepRow::failed(dt, &err))
    });
    let mut report = ScalingReport {
        full_solver: cfg.use_full_solver,
        rows,
        fits: Vec::new(),
    };
    report.fits = verify_exponents(&report, &ExponentTolerances::default()).laws;
    report
}

fn sweep_row(p: &FluidParams, dt: f64, cfg: &SweepConfig) -> Result<SweepRow> {
    let bc = BulkConditions::from_delta_t(p, dt)?;
    let (prof, deviation) = if cfg.use_full_solver {
        let (full, _) = solve_full_bvp(p, &bc, &cfg.grid, &cfg.newton)?;
        let dev = sup_deviation(p, &bc, &full)?;
        (full, Some(dev))
    } else {
        (closed_profile(p, &bc, &cfg.grid)?, None)
    };

    let amp_rho = prof
        .rho()
        .iter()
        .fold(0.0f64, |acc, r| acc.max((r - p.rho_c()).abs()));
    let (_, s_mid) = prof
        .dividing_surface(p.rho_c())
        .ok_or_else(|| Error::InvalidProfile("profile never crosses rho_c".into()))?;
    Ok(SweepRow {
        delta_t: dt,
        amp_rho,
        amp_s: s_mid.abs(),
        zeta_measured: measured_width(p, &bc, &prof)?,
        sigma_quad: surface_tension_quadrature(p, &prof)?,
        v: celerity_at_critical_density(p, &bc).v,
        full_vs_reduced_deviation: deviation,
        error: None,
    })
}

/// Width of the central band `|rho - rho_c| <= tanh(1) (rho_l - rho_v) / 2`,
/// divided by four. For the tanh profile this band is exactly `[-2 zeta, 2 zeta]`.
pub fn measured_width(p: &FluidParams, bc: &BulkConditions, prof: &Profile) -> Result<f64> {
    let (liquid, vapor) = bulk_states(p, bc);
    let band = 1f64.tanh() * 0.5 * (liquid.rho() - vapor.rho());
    let lower = crossing(prof, p.rho_c() - band)
        .ok_or_else(|| Error::InvalidProfile("profile never enters the central band".into()))?;
    let upper = crossing(prof, p.rho_c() + band)
        .ok_or_else(|| Error::InvalidProfile("profile never leaves the central band".into()))?;
    Ok((upper - lower).abs() / 4.0)
}

fn crossing(prof: &Profile, level: f64) -> Option<f64> {
    let (y, rho) = (prof.y(), prof.rho());
    (0..rho.len() - 1).find_map(|i| {
        let (a, b) = (rho[i] - level, rho[i + 1] - level);
        if a == 0.0 {
            Some(y[i])
        } else if a * b < 0.0 {
            Some(y[i] + a / (a - b) * (y[i + 1] - y[i]))
        } else {
            None
        }
    })
}

/// `max |rho_full(y) - rho_tanh(y - y0)| / (rho_l - rho_v)`, with the tanh
/// profile centred on the dividing surface `y0` of `full`. On a finite box
/// the interface position is set by wall effects alone, so the comparison is
/// made modulo translation.
pub fn sup_deviation(p: &FluidParams, bc: &BulkConditions, full: &Profile) -> Result<f64> {
    let zeta = interface_width(p, bc)?;
    let (liquid, vapor) = bulk_states(p, bc);
    let jump = liquid.rho() - vapor.rho();
    let (y0, _) = full
        .dividing_surface(p.rho_c())
        .ok_or_else(|| Error::InvalidProfile("profile never crosses rho_c".into()))?;
    let worst = full.y().iter().zip(full.rho()).fold(0.0f64, |acc, (y, r)| {
        let tanh = p.rho_c() + 0.5 * jump * ((y - y0) / (2.0 * zeta)).tanh();
        acc.max((r - tanh).abs())
    });
    Ok(worst / jump)
}
