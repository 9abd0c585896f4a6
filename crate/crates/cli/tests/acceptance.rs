//! Acceptance criteria 1-8. Each test prints one `criterion N: PASS|FAIL`
//! line straight to stdout (visible without `--nocapture`) before asserting.

use std::io::Write;
use std::path::Path;
use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thermocap_core::checks::expanded_partials;
use thermocap_core::equilibrium::{
    bulk_states, closed_profile, equilibrium_stress_residual, first_integral_residual,
    reduced_residual, solve_full_bvp, surface_tension_closed, surface_tension_quadrature,
};
use thermocap_core::scaling::{fit_exponent, sup_deviation};
use thermocap_core::waves::{
    celerity_at_critical_density, celerity_by_determinant, celerity_general,
};
use thermocap_core::{
    BulkConditions, FluidParams, GridConfig, NewtonOptions, RawFluidParams, ThermoState, WaveLocus,
};

fn report(n: u32, title: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let line = format!("criterion {n}: {verdict}  {title}: {detail}\n");
    let mut out = std::io::stdout().lock();
    out.write_all(line.as_bytes()).unwrap();
    out.flush().unwrap();
}

fn reference() -> FluidParams {
    FluidParams::reference()
}

fn bc(p: &FluidParams, dt: f64) -> BulkConditions {
    BulkConditions::from_delta_t(p, dt).unwrap()
}

fn rel(err: f64, reference: f64) -> f64 {
    err.abs() / reference.abs().max(1.0)
}

#[test]
fn criterion_1_eos_derivatives() {
    let p = reference();
    let (a, b) = (p.a(), p.b());
    let energy = |rho: f64, s: f64| {
        let m = rho - p.rho_c();
        let eta = rho * s;
        let q = a * m * m + eta;
        b / (2.0 * a * a) * (q * q + eta * eta) + p.mu_c() * rho + p.t_c() * eta - p.p_c()
    };
    let mut fd_worst = 0.0f64;
    let mut expanded_worst = 0.0f64;
    for i in 0..10 {
        for j in 0..10 {
            let rho = p.rho_c() * (0.9 + 0.2 * i as f64 / 9.0);
            let s = -0.05 + 0.1 * j as f64 / 9.0;
            let st = ThermoState::new(rho, s).unwrap();
            let (d_rho, d_s) = p.bulk_energy_partials(st);
            let h = 1e-5;
            let fd_rho = (energy(rho + h, s) - energy(rho - h, s)) / (2.0 * h);
            let fd_s = (energy(rho, s + h) - energy(rho, s - h)) / (2.0 * h);
            fd_worst = fd_worst
                .max(rel(fd_rho - d_rho, d_rho))
                .max(rel(fd_s - d_s, d_s));
            let (e_rho, e_s) = expanded_partials(&p, st);
            expanded_worst = expanded_worst
                .max(rel(e_rho - d_rho, d_rho))
                .max(rel(e_s - d_s, d_s));
        }
    }
    let pass = fd_worst <= 1e-6 && expanded_worst <= 1e-12;
    report(
        1,
        "EOS derivative suite",
        pass,
        &format!("finite differences {fd_worst:.2e} (<= 1e-6), expanded terms {expanded_worst:.2e} (<= 1e-12)"),
    );
    assert!(pass);
}

#[test]
fn criterion_2_coexistence_identity() {
    let p = reference();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut identity_worst = 0.0f64;
    let mut bulk_worst = 0.0f64;
    for _ in 0..1000 {
        let dt = 10f64.powf(rng.gen_range(-4.0..-1.0));
        let rho = rng.gen_range(0.5..1.5);
        let bc = bc(&p, dt);
        let st = ThermoState::new(rho, p.entropy_slave(rho, &bc)).unwrap();
        let m = rho - p.rho_c();
        let cubic = p.mu_c() + p.b() * m.powi(3) - p.a() * dt * m;
        identity_worst = identity_worst.max(rel(p.chemical_potential_full(st, &bc) - cubic, cubic));
        let (liquid, vapor) = bulk_states(&p, &bc);
        for st in [liquid, vapor] {
            bulk_worst = bulk_worst
                .max(rel(p.chemical_potential_full(st, &bc) - p.mu_c(), p.mu_c()))
                .max(rel(p.temperature(st) - bc.t0(), bc.t0()));
        }
    }
    let pass = identity_worst <= 1e-12 && bulk_worst <= 1e-12;
    report(
        2,
        "coexistence identity",
        pass,
        &format!("slaved mu vs cubic {identity_worst:.2e}, bulk mu0/T0 {bulk_worst:.2e} (<= 1e-12, 1000 samples)"),
    );
    assert!(pass);
}

#[test]
fn criterion_3_profile_exactness() {
    let p = reference();
    let bc = bc(&p, 0.01);
    let norms = |n: usize| {
        let prof = closed_profile(&p, &bc, &GridConfig::new(15.0, n).unwrap()).unwrap();
        (
            prof.spacing(),
            reduced_residual(&p, &bc, &prof).inf_norm(),
            first_integral_residual(&p, &bc, &prof).inf_norm(),
        )
    };
    let ladder: Vec<_> = [101, 201, 401, 801].into_iter().map(norms).collect();
    // Least-squares slope of log(norm) against log(h).
    let order = |pick: fn(&(f64, f64, f64)) -> f64| {
        let pts: Vec<(f64, f64)> = ladder.iter().map(|r| (r.0.ln(), pick(r).ln())).collect();
        let k = pts.len() as f64;
        let (mx, my) = pts
            .iter()
            .fold((0.0, 0.0), |(a, b), (x, y)| (a + x / k, b + y / k));
        let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
        sxy / sxx
    };
    let (order_reduced, order_integral) = (order(|r| r.1), order(|r| r.2));
    let (_, fine_reduced, fine_integral) = norms(2001);
    let pass = order_reduced >= 3.5
        && order_integral >= 3.5
        && fine_reduced <= 1e-7
        && fine_integral <= 1e-7;
    report(
        3,
        "profile exactness",
        pass,
        &format!(
            "orders {order_reduced:.3} / {order_integral:.3} (>= 3.5), n=2001 norms {fine_reduced:.2e} / {fine_integral:.2e} (<= 1e-7)"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_4_surface_tension() {
    let p = reference();
    let mut worst = 0.0f64;
    let mut pts = Vec::new();
    for dt in [1e-4, 1e-3, 1e-2, 1e-1] {
        let bc = bc(&p, dt);
        let prof = closed_profile(&p, &bc, &GridConfig::default()).unwrap();
        let quad = surface_tension_quadrature(&p, &prof).unwrap();
        // sigma = sqrt(C) / (3 B) (2 A dT)^(3/2)
        let closed = p.c().sqrt() / (3.0 * p.b()) * (2.0 * p.a() * dt).powf(1.5);
        assert!((surface_tension_closed(&p, &bc) - closed).abs() <= 1e-15 * closed);
        worst = worst.max((quad - closed).abs() / closed);
        pts.push((dt, quad));
    }
    let slope = fit_exponent(&pts).unwrap().slope;
    let pass = worst <= 1e-6 && (slope - 1.5).abs() <= 1e-3;
    report(
        4,
        "surface tension",
        pass,
        &format!("quadrature vs closed {worst:.2e} (<= 1e-6), slope {slope:.6} (1.500 +- 0.001)"),
    );
    assert!(pass);
}

#[test]
fn criterion_5_full_bvp_consistency() {
    let p = reference();
    let grid = GridConfig::default();
    let opts = NewtonOptions::default();
    let (_, first) = solve_full_bvp(&p, &bc(&p, 0.01), &grid, &opts).unwrap();
    let mut deviations = Vec::new();
    let mut stress_worst = 0.0f64;
    for dt in [1e-2, 1e-3, 1e-4] {
        let bc = bc(&p, dt);
        let (full, _) = solve_full_bvp(&p, &bc, &grid, &opts).unwrap();
        stress_worst = stress_worst.max(equilibrium_stress_residual(&p, &full));
        deviations.push((dt, sup_deviation(&p, &bc, &full).unwrap()));
    }
    let decreasing = deviations.windows(2).all(|w| w[1].1 < w[0].1);
    let slope = fit_exponent(&deviations).unwrap().slope;
    let iterations_ok = first.iterations <= 10;
    let slope_ok = (slope - 1.0).abs() <= 0.1;
    let stress_ok = stress_worst <= 1e-7;
    let pass = iterations_ok && decreasing && slope_ok && stress_ok;
    let devs: Vec<String> = deviations.iter().map(|d| format!("{:.3e}", d.1)).collect();
    report(
        5,
        "full BVP consistency",
        pass,
        &format!(
            "{} Newton iterations (<= 10), deviations [{}] decreasing {decreasing}, slope {slope:.3} (1.0 +- 0.1), stress residual {stress_worst:.2e} (<= 1e-7)",
            first.iterations,
            devs.join(", ")
        ),
    );
    assert!(iterations_ok, "Newton took {} iterations", first.iterations);
    assert!(decreasing && stress_ok);
    assert!(slope_ok, "deviation slope {slope} outside 1.0 +- 0.1");
}

#[test]
fn criterion_6_wave_celerity() {
    let p = reference();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let locus = WaveLocus::new(
            rng.gen_range(0.3..2.0),
            rng.gen_range(-1e-2..1e-2),
            10f64.powf(rng.gen_range(-12.0..-2.0)),
        )
        .unwrap();
        let closed =
            ((p.c() * p.e() - p.d() * p.d()) * locus.grad_s_tg_sq() / (p.c() * locus.rho())).sqrt();
        let root = celerity_by_determinant(&p, &locus).unwrap().v;
        assert!((celerity_general(&p, &locus).v - closed).abs() <= 1e-14 * closed);
        worst = worst.max((root - closed).abs() / closed);
    }
    let v2 = celerity_at_critical_density(&p, &bc(&p, 0.01)).v_squared();
    let v2_err = (v2 - 1.2e-9).abs() / 1.2e-9;
    let pts: Vec<(f64, f64)> = [1e-1, 1e-2, 1e-3, 1e-4]
        .iter()
        .map(|&dt| (dt, celerity_at_critical_density(&p, &bc(&p, dt)).v))
        .collect();
    let slope = fit_exponent(&pts).unwrap().slope;
    let v_critical = celerity_at_critical_density(&p, &bc(&p, 0.0)).v;
    let pass =
        worst <= 1e-10 && v2_err <= 1e-12 && (slope - 2.0).abs() <= 0.02 && v_critical == 0.0;
    report(
        6,
        "wave celerity",
        pass,
        &format!(
            "root vs closed {worst:.2e} (<= 1e-10), v^2 = {v2:.6e} rel err {v2_err:.2e} (<= 1e-12), slope {slope:.4} (2.00 +- 0.02), v at dT=0 is {v_critical}"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_7_admissibility_guard() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut rejected = 0;
    let mut wrongly_accepted = Vec::new();
    let mut negative_v2 = 0;
    let mut admissible = 0;
    while admissible < 1000 {
        let raw = RawFluidParams {
            c: rng.gen_range(-1.0..2.0),
            d: rng.gen_range(-2.0..2.0),
            e: rng.gen_range(-1.0..2.0),
            ..RawFluidParams::REFERENCE
        };
        let ok = raw.c > 0.0 && raw.c * raw.e - raw.d * raw.d > 0.0;
        match FluidParams::validate(raw) {
            Err(_) if !ok => rejected += 1,
            Err(e) => panic!("admissible set rejected: {raw:?}: {e}"),
            Ok(_) if !ok => wrongly_accepted.push(raw),
            Ok(p) => {
                admissible += 1;
                let locus = WaveLocus::new(
                    rng.gen_range(0.1..3.0),
                    rng.gen_range(-1.0..1.0),
                    10f64.powf(rng.gen_range(-12.0..0.0)),
                )
                .unwrap();
                let dt = 10f64.powf(rng.gen_range(-5.0..-1.0));
                let v2 = [
                    celerity_general(&p, &locus).v_squared(),
                    celerity_at_critical_density(&p, &bc(&p, dt)).v_squared(),
                ];
                negative_v2 += v2.iter().filter(|&&x| x < 0.0 || x.is_nan()).count();
            }
        }
    }
    // The boundary itself is inadmissible.
    for (c, d, e) in [(0.0, 0.0, 1.0), (1.0, 1.0, 1.0), (-1.0, 0.0, -1.0)] {
        let raw = RawFluidParams {
            c,
            d,
            e,
            ..RawFluidParams::REFERENCE
        };
        if FluidParams::validate(raw).is_ok() {
            wrongly_accepted.push(raw);
        }
    }
    let pass = wrongly_accepted.is_empty() && negative_v2 == 0 && rejected > 0;
    report(
        7,
        "admissibility guard",
        pass,
        &format!(
            "{rejected} inadmissible sets rejected, {} accepted wrongly, {negative_v2} negative v^2 over 1000 admissible draws",
            wrongly_accepted.len()
        ),
    );
    assert!(pass, "{wrongly_accepted:?}");
}

const PARAMS: &str = r#""params": {"A": 1, "B": 1, "rho_c": 1, "T_c": 1, "mu_c": 0, "p_c": 0, "C": 1, "D": 0.2, "E": 1}"#;

fn thermocap(args: &[&str], out: &Path) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_thermocap"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
        .status
        .code()
        .expect("exit code")
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn criterion_8_cli_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let write = |name: &str, text: String| {
        let path = tmp.path().join(name);
        std::fs::write(&path, text).unwrap();
        path.to_string_lossy().into_owned()
    };
    let zero = write(
        "zero.json",
        format!(r#"{{{PARAMS}, "bc": {{"delta_T": 0}}}}"#),
    );
    let single = write(
        "single.json",
        format!(
            r#"{{{PARAMS}, "bc": {{"delta_T": 0.01}}, "sweep": {{"delta_T_values": [0.01]}}}}"#
        ),
    );
    let bad_d = write(
        "bad_d.json",
        format!(
            r#"{{{}, "bc": {{"delta_T": 0.01}}}}"#,
            PARAMS.replace("\"D\": 0.2", "\"D\": 1.5")
        ),
    );

    let runs: [&[&str]; 7] = [
        &["profile", "--format", "both"],
        &["profile", "--full", "--format", "both"],
        &["celerity"],
        &["celerity", "--locus", "rho=1.0 a=0 g2=1.25e-9"],
        &["sweep", "--format", "both"],
        &["sweep", "--full"],
        &["check", "--seed", "42"],
    ];
    let mut mismatched = Vec::new();
    for (i, args) in runs.iter().enumerate() {
        let dirs = [
            tmp.path().join(format!("r{i}a")),
            tmp.path().join(format!("r{i}b")),
        ];
        let codes = dirs.each_ref().map(|d| thermocap(args, d));
        if codes[0] != codes[1] || snapshot(&dirs[0]) != snapshot(&dirs[1]) {
            mismatched.push(args.join(" "));
        }
    }

    let locus_dir = tmp.path().join("r3a");
    let default_dir = tmp.path().join("r2a");
    let v = |dir: &Path| {
        let text = std::fs::read_to_string(dir.join("celerity.json")).unwrap();
        serde_json::from_str::<serde_json::Value>(&text).unwrap()["v"]
            .as_f64()
            .unwrap()
    };
    let same_v = v(&locus_dir) == v(&default_dir);

    let scratch = tmp.path().join("errors");
    let expected: [(&[&str], i32); 6] = [
        (&["profile", "--config", &zero], 3),
        (&["celerity", "--config", &zero], 0),
        (&["sweep", "--config", &single], 2),
        (&["check", "--config", &bad_d], 2),
        (&["sweep", "--full", "--tol-full", "1e-6"], 4),
        (&["sweep"], 0),
    ];
    let mut wrong_codes = Vec::new();
    for (args, want) in expected {
        let got = thermocap(args, &scratch);
        if got != want {
            wrong_codes.push(format!(
                "`{}` exited {got}, expected {want}",
                args.join(" ")
            ));
        }
    }
    let no_partial = !tmp.path().join("errors").join("profile.csv").exists();

    let pass = mismatched.is_empty() && wrong_codes.is_empty() && same_v && no_partial;
    report(
        8,
        "CLI determinism",
        pass,
        &format!(
            "{} of {} runs byte-identical, {} exit-code mismatches, locus override same v {same_v}, no partial files {no_partial}",
            runs.len() - mismatched.len(),
            runs.len(),
            wrong_codes.len()
        ),
    );
    assert!(pass, "{mismatched:?} {wrong_codes:?}");
}
