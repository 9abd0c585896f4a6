use crate::equilibrium::NewtonReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("constant `{0}` must be strictly positive and finite")]
    NonPositiveConstant(&'static str),

    #[error("gradient energy is not positive definite: C = {c}, CE - D^2 = {discriminant}")]
    IndefiniteGradientForm { c: f64, discriminant: f64 },

    #[error("non-finite value for `{0}`")]
    NonFinite(&'static str),

    #[error("bulk temperature lies above the critical temperature (T_c - T0 = {0})")]
    SupercriticalTemperature(f64),

    #[error("density must be strictly positive, got {0}")]
    NonPositiveDensity(f64),

    #[error("critical isotherm (T0 = T_c): the interface width diverges")]
    CriticalIsotherm,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("profile tail has not decayed on the {side} side (|rho - rho_bulk| = {deviation:e}, limit {limit:e})")]
    UndecayedTail {
        side: &'static str,
        deviation: f64,
        limit: f64,
    },

    #[error("Newton iteration diverged: {0}")]
    NewtonDiverged(Box<NewtonReport>),

    #[error("Newton iteration hit the iteration limit: {0}")]
    MaxIterations(Box<NewtonReport>),

    #[error("determinant does not change sign on [0, {v_hi:e}]")]
    RootNotBracketed { v_hi: f64 },

    #[error("null space at the celerity root is not one-dimensional (singular values {smallest:e}, {second:e})")]
    NullSpaceNotIsolated { smallest: f64, second: f64 },

    #[error("invalid wave locus: {0}")]
    InvalidLocus(String),

    #[error("log-log fit needs strictly positive data")]
    NonPositiveData,

    #[error("log-log fit needs at least two points, got {0}")]
    TooFewPoints(usize),

    #[error("abscissa spans {decades:.3} decades, at least one is required")]
    DegenerateSpan { decades: f64 },

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
}
