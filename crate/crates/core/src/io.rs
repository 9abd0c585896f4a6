//! Deterministic text encodings: CSV and JSON with every float written to
//! 17 significant digits, so identical runs give identical bytes.

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::equilibrium::{InterfaceObservables, Profile};
use crate::scaling::ScalingReport;
use crate::waves::CelerityResult;

pub const PROFILE_HEADER: &str = "y,rho,s";
pub const SWEEP_HEADER: &str =
    "delta_T,amp_rho,amp_s,zeta_measured,sigma_quad,v,full_vs_reduced_deviation";

/// `{:.16e}` for finite values, `nan`, `inf` and `-inf` otherwise.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

pub fn profile_csv(prof: &Profile) -> String {
    let mut out = String::with_capacity(64 * (prof.len() + 1));
    out.push_str(PROFILE_HEADER);
    out.push('\n');
    for ((y, r), s) in prof.y().iter().zip(prof.rho()).zip(prof.s()) {
        out.push_str(&format!(
            "{},{},{}\n",
            fmt_f64(*y),
            fmt_f64(*r),
            fmt_f64(*s)
        ));
    }
    out
}

pub fn sweep_csv(report: &ScalingReport) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for row in &report.rows {
        let cols = [
            row.delta_t,
            row.amp_rho,
            row.amp_s,
            row.zeta_measured,
            row.sigma_quad,
            row.v,
            row.full_vs_reduced_deviation.unwrap_or(f64::NAN),
        ];
        let line: Vec<String> = cols.iter().map(|&x| fmt_f64(x)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn observables_json(obs: &InterfaceObservables, seed: Option<u64>) -> Value {
    let mut v = serde_json::to_value(obs).expect("observables serialize");
    if let (Some(seed), Value::Object(map)) = (seed, &mut v) {
        map.insert("seed".into(), json!(seed));
    }
    v
}

fn celerity_fields(c: &CelerityResult) -> Map<String, Value> {
    let mut map = Map::new();
    map.insert("v".into(), json!(c.v));
    map.insert("v_squared".into(), json!(c.v_squared()));
    map.insert("lambda1".into(), json!(c.lambda[0]));
    map.insert("lambda2".into(), json!(c.lambda[1]));
    map.insert("lambda3".into(), json!(c.lambda[2]));
    map.insert(
        "locus".into(),
        json!({
            "rho": c.locus.rho(),
            "grad_s_normal": c.locus.grad_s_normal(),
            "grad_s_tg_sq": c.locus.grad_s_tg_sq(),
        }),
    );
    map.insert("v_mirror".into(), json!(-c.v));
    map
}

/// Closed-form result at the top level; the determinant-root result, when
/// present, under `determinant` together with the relative difference of the
/// two speeds.
pub fn celerity_json(
    closed: &CelerityResult,
    determinant: Option<&CelerityResult>,
    seed: Option<u64>,
) -> Value {
    let mut map = celerity_fields(closed);
    if let Some(det) = determinant {
        map.insert("determinant".into(), Value::Object(celerity_fields(det)));
        map.insert(
            "relative_difference".into(),
            json!(relative_difference(closed.v, det.v)),
        );
    }
    if let Some(seed) = seed {
        map.insert("seed".into(), json!(seed));
    }
    Value::Object(map)
}

/// `|a - b| / max(|a|, |b|)`, zero when both vanish.
pub fn relative_difference(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Pretty JSON with sorted keys and 17-significant-digit floats. Non-finite
/// floats become `null`.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<String> {
    let v = serde_json::to_value(value)?;
    let mut out = String::new();
    write_value(&v, 0, &mut out);
    out.push('\n');
    Ok(out)
}

fn write_value(v: &Value, depth: usize, out: &mut String) {
    let pad = |d: usize, out: &mut String| out.push_str(&"  ".repeat(d));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                match n.as_f64() {
                    Some(x) if x.is_finite() => out.push_str(&format!("{x:.16e}")),
                    _ => out.push_str("null"),
                }
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) => {
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                pad(depth + 1, out);
                write_value(item, depth + 1, out);
                if i + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(depth, out);
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            out.push_str("{\n");
            for (i, (k, item)) in map.iter().enumerate() {
                pad(depth + 1, out);
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_value(item, depth + 1, out);
                if i + 1 < map.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(depth, out);
            out.push('}');
        }
    }
}
