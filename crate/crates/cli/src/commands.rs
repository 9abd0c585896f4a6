use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use thermocap_core::checks::{run_checks, CheckInputs, CheckReport};
use thermocap_core::equilibrium::{closed_profile, observables, solve_full_bvp};
use thermocap_core::io::{celerity_json, observables_json, profile_csv, sweep_csv, to_json_string};
use thermocap_core::scaling::{run_sweep, verify_exponents, ExponentTolerances};
use thermocap_core::waves::{
    celerity_at_critical_density, celerity_by_determinant, celerity_general,
};
use thermocap_core::{Error, WaveLocus};

use crate::config::{Format, RunConfig};

/// Failure classes, each with its own exit code.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Solver(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Solver(m) => write!(f, "solver error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

/// Errors that say the inputs are unusable rather than that a solve failed.
fn classify(e: Error) -> CliError {
    match e {
        Error::NonPositiveConstant(_)
        | Error::IndefiniteGradientForm { .. }
        | Error::NonFinite(_)
        | Error::SupercriticalTemperature(_)
        | Error::InvalidGrid(_)
        | Error::InvalidLocus(_)
        | Error::InvalidSweep(_) => CliError::Config(e.to_string()),
        _ => CliError::Solver(e.to_string()),
    }
}

pub struct Context {
    pub config: RunConfig,
    pub out_dir: PathBuf,
    pub format: Format,
    pub seed: u64,
    pub full: bool,
}

/// Files produced by a command, written only after every one is built.
pub struct Outcome {
    pub files: Vec<(&'static str, String)>,
    /// Set when a law or check failed; the files are still written.
    pub failed: bool,
}

impl Outcome {
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        let mut written = Vec::with_capacity(self.files.len());
        for (name, contents) in &self.files {
            let target = dir.join(name);
            write_atomic(dir, &target, contents)?;
            written.push(target);
        }
        Ok(written)
    }
}

fn write_atomic(dir: &Path, target: &Path, contents: &str) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", target.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(target).map_err(|e| io(e.error))?;
    Ok(())
}

fn json_text(v: &Value) -> String {
    to_json_string(v).expect("json values always serialize")
}

fn with_seed(mut v: Value, seed: u64) -> Value {
    if let Value::Object(map) = &mut v {
        map.insert("seed".into(), json!(seed));
    }
    v
}

pub fn profile(ctx: &Context) -> Result<Outcome, CliError> {
    let cfg = &ctx.config;
    let mut files = Vec::new();
    let prof = if ctx.full {
        let (prof, report) =
            solve_full_bvp(&cfg.params, &cfg.bc, &cfg.grid, &cfg.newton).map_err(classify)?;
        let trace = with_seed(
            serde_json::to_value(&report).expect("report serializes"),
            ctx.seed,
        );
        files.push(("newton.json", json_text(&trace)));
        prof
    } else {
        closed_profile(&cfg.params, &cfg.bc, &cfg.grid).map_err(classify)?
    };
    let obs = observables(&cfg.params, &prof).map_err(classify)?;
    if ctx.format.csv() {
        files.push(("profile.csv", profile_csv(&prof)));
    }
    if ctx.format.json() {
        let doc = json!({
            "y": prof.y(),
            "rho": prof.rho(),
            "s": prof.s(),
            "solver": if ctx.full { "full" } else { "closed" },
            "seed": ctx.seed,
        });
        files.push(("profile.json", json_text(&doc)));
    }
    files.push((
        "observables.json",
        json_text(&observables_json(&obs, Some(ctx.seed))),
    ));
    Ok(Outcome {
        files,
        failed: false,
    })
}

/// `rho=<f64> a=<f64> g2=<f64>`, space or comma separated, any order.
pub fn parse_locus(text: &str) -> Result<WaveLocus, CliError> {
    let (mut rho, mut a, mut g2) = (None, None, None);
    for item in text.split([' ', ',']).filter(|t| !t.is_empty()) {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("locus entry `{item}` is not key=value")))?;
        let x: f64 = value
            .parse()
            .map_err(|_| CliError::Config(format!("locus value `{value}` is not a number")))?;
        let slot = match key {
            "rho" => &mut rho,
            "a" => &mut a,
            "g2" => &mut g2,
            _ => return Err(CliError::Config(format!("unknown locus key `{key}`"))),
        };
        if slot.replace(x).is_some() {
            return Err(CliError::Config(format!("locus key `{key}` given twice")));
        }
    }
    match (rho, a, g2) {
        (Some(rho), Some(a), Some(g2)) => WaveLocus::new(rho, a, g2).map_err(classify),
        _ => Err(CliError::Config("locus needs rho, a and g2".into())),
    }
}

pub fn celerity(ctx: &Context, locus: Option<&str>) -> Result<Outcome, CliError> {
    let cfg = &ctx.config;
    let closed = match locus {
        Some(text) => celerity_general(&cfg.params, &parse_locus(text)?),
        None => celerity_at_critical_density(&cfg.params, &cfg.bc),
    };
    // A vanishing tangential entropy gradient leaves no wave to find.
    let determinant = if closed.v == 0.0 {
        None
    } else {
        Some(celerity_by_determinant(&cfg.params, &closed.locus).map_err(classify)?)
    };
    let doc = celerity_json(&closed, determinant.as_ref(), Some(ctx.seed));
    Ok(Outcome {
        files: vec![("celerity.json", json_text(&doc))],
        failed: false,
    })
}

pub fn sweep(ctx: &Context, tolerances: &ExponentTolerances) -> Result<Outcome, CliError> {
    let cfg = &ctx.config;
    let sweep_cfg = cfg.sweep_or_default();
    let sweep_cfg = if ctx.full {
        sweep_cfg.with_full_solver(true)
    } else {
        sweep_cfg
    };
    let mut report = run_sweep(&cfg.params, &sweep_cfg);
    let verdict = verify_exponents(&report, tolerances);
    report.fits = verdict.laws.clone();

    let mut files = Vec::new();
    if ctx.format.csv() {
        files.push(("sweep.csv", sweep_csv(&report)));
    }
    if ctx.format.json() {
        let rows = serde_json::to_value(&report.rows).expect("rows serialize");
        files.push((
            "sweep.json",
            json_text(&json!({ "rows": rows, "seed": ctx.seed })),
        ));
    }
    let summary = json!({
        "full_solver": report.full_solver,
        "fits": serde_json::to_value(&report.fits).expect("fits serialize"),
        "all_pass": verdict.all_pass,
        "tolerances": { "closed": tolerances.closed, "full": tolerances.full },
        "seed": ctx.seed,
    });
    files.push(("scaling.json", json_text(&summary)));
    Ok(Outcome {
        files,
        failed: !verdict.all_pass,
    })
}

pub fn check(ctx: &Context) -> Result<(Outcome, CheckReport), CliError> {
    let cfg = &ctx.config;
    let report = run_checks(&CheckInputs {
        params: &cfg.params,
        bc: &cfg.bc,
        grid: &cfg.grid,
        newton: &cfg.newton,
        seed: ctx.seed,
    });
    let doc = serde_json::to_value(&report).expect("check report serializes");
    let outcome = Outcome {
        files: vec![("check.json", json_text(&doc))],
        failed: !report.all_pass,
    };
    Ok((outcome, report))
}

pub fn check_table(report: &CheckReport) -> String {
    let width = report
        .rows
        .iter()
        .map(|r| r.name.len())
        .max()
        .unwrap_or(4)
        .max(5);
    let mut out = format!(
        "{:<width$}  {:>12}  {:>12}  result\n",
        "check", "value", "threshold"
    );
    for row in &report.rows {
        out.push_str(&format!(
            "{:<width$}  {:>12.4e}  {:>12.4e}  {}",
            row.name,
            row.value,
            row.threshold,
            if row.pass { "PASS" } else { "FAIL" }
        ));
        if let Some(note) = &row.note {
            out.push_str(&format!("  ({note})"));
        }
        out.push('\n');
    }
    out.push_str(&format!(
        "seed {}: {}\n",
        report.seed,
        if report.all_pass {
            "all checks pass"
        } else {
            "some checks FAIL"
        }
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn locus_parsing() {
        let l = parse_locus("rho=1.0 a=0 g2=1.25e-9").unwrap();
        assert_eq!(
            (l.rho(), l.grad_s_normal(), l.grad_s_tg_sq()),
            (1.0, 0.0, 1.25e-9)
        );
        let l = parse_locus("g2=2,rho=3,a=-1").unwrap();
        assert_eq!((l.rho(), l.grad_s_normal()), (3.0, -1.0));
        for bad in [
            "rho=1 a=0",
            "rho=1 a=0 g2=x",
            "rho=1 a=0 g2=1 b=2",
            "rho=-1 a=0 g2=1",
            "rho=1 rho=1 a=0 g2=1",
        ] {
            assert_eq!(parse_locus(bad).unwrap_err().exit_code(), 2, "{bad}");
        }
    }

    #[test]
    fn error_classes() {
        assert_eq!(classify(Error::CriticalIsotherm).exit_code(), 3);
        assert_eq!(
            classify(Error::RootNotBracketed { v_hi: 1.0 }).exit_code(),
            3
        );
        assert_eq!(classify(Error::InvalidSweep("x".into())).exit_code(), 2);
    }
}
