use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use oms_cli::output::sha256_hex;
use oms_cli::{parse_config, to_toml};
use serde_json::Value;

fn oms(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oms"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("oms runs")
}

fn stderr_record(out: &Output) -> Value {
    let line = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(line.lines().last().unwrap_or("")).expect("stderr is a JSON record")
}

fn read_meta(path: &Path) -> Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

#[test]
fn presets_listing_is_stable_and_complete() {
    let dir = tempfile::tempdir().unwrap();
    let a = oms(&["presets"], dir.path());
    let b = oms(&["presets"], dir.path());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert_eq!(text.lines().count(), 12);
    assert!(text.contains("fig3cd: waterfall over O_m3"));
    let json = oms(&["presets", "--format", "json"], dir.path());
    let list: Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(list.as_array().unwrap().len(), 12);
}

#[test]
fn spectrum_csv_contract_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let out = oms(&["spectrum", "--preset", "fig2a", "--out", "a"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let data = fs::read(dir.path().join("a/spectrum.csv")).unwrap();
    let text = std::str::from_utf8(&data).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x_over_omega_m1,delta_p_over_omega_m1,T_12,T_21"));
    assert_eq!(lines.count(), 2001);
    assert!(!text.contains('\r'));
    let first: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(first[0], -0.2);
    assert!((first[1] - 0.8).abs() < 1e-15);

    let meta = read_meta(&dir.path().join("a/spectrum.csv.meta.json"));
    assert_eq!(meta["data_sha256"], sha256_hex(&data));
    assert_eq!(meta["convention"], "rotated");
    assert_eq!(meta["branch"], "smallest_intensity");
    assert_eq!(meta["tool"], "oms");
    assert!(meta["version"].is_string());

    // Same job again, with a different worker count.
    let out = oms(&["spectrum", "--preset", "fig2a", "--out", "b", "--threads", "3"], dir.path());
    assert!(out.status.success());
    assert_eq!(fs::read(dir.path().join("b/spectrum.csv")).unwrap(), data);
}

#[test]
fn sidecar_config_reproduces_data() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("job.toml");
    fs::write(
        &cfg,
        "[system]\npreset = \"fig5c\"\nfrequencies = \"cyclic\"\nkappa_2 = \"60 MHz\"\n[job]\nkind = \"spectrum\"\nx_count = 101\noutput = \"first\"\n",
    )
    .unwrap();
    assert!(oms(&["spectrum", "--config", "job.toml"], dir.path()).status.success());
    let meta = read_meta(&dir.path().join("first/spectrum.csv.meta.json"));
    let resolved = meta["config"].as_str().unwrap().replace("output = \"first\"", "output = \"second\"");
    fs::write(dir.path().join("resolved.toml"), resolved).unwrap();
    assert!(oms(&["spectrum", "--config", "resolved.toml"], dir.path()).status.success());
    assert_eq!(
        fs::read(dir.path().join("first/spectrum.csv")).unwrap(),
        fs::read(dir.path().join("second/spectrum.csv")).unwrap()
    );
}

#[test]
fn round_trip_of_custom_job() {
    let text = "[system]\npreset = \"fig2a\"\nfrequencies = \"cyclic\"\ngamma_2 = \"100 kHz\"\nphi_d2 = \"pi/5\"\n\
                [job]\nkind = \"sweep\"\nx_count = 11\naxis1 = { param = \"o_m3\", start = \"0 MHz\", stop = \"48.5 MHz\", count = 3 }\n\
                axis2 = { param = \"phi_rel\", start = \"-pi\", stop = \"pi\", count = 4 }\nformat = \"json\"\n";
    let job = parse_config(text).unwrap();
    assert_eq!(parse_config(&to_toml(&job)).unwrap(), job);
}

#[test]
fn unwritable_output_exits_2_without_files() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("blocker"), b"").unwrap();
    let out = oms(&["spectrum", "--preset", "fig2a", "--out", "blocker/sub"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_record(&out)["error"]["kind"], "io");
    let entries: Vec<_> = fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(entries.len(), 1);
}

#[test]
fn validation_failures_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.toml"), "[system]\npreset = \"fig2a\"\nkappa_1 = 73\n").unwrap();
    let out = oms(&["spectrum", "--config", "bad.toml"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let rec = stderr_record(&out);
    assert_eq!(rec["error"]["exit_code"], 1);
    assert!(rec["error"]["message"].as_str().unwrap().contains("unit suffix"));

    fs::write(dir.path().join("typo.toml"), "[system]\npreset = \"fig2a\"\nomega_p3 = \"1 rad/s\"\n").unwrap();
    assert_eq!(oms(&["spectrum", "--config", "typo.toml"], dir.path()).status.code(), Some(1));
    assert_eq!(oms(&["spectrum", "--preset", "fig9"], dir.path()).status.code(), Some(1));
    assert_eq!(oms(&["spectrum"], dir.path()).status.code(), Some(1));
    assert_eq!(oms(&["frobnicate"], dir.path()).status.code(), Some(1));
    assert!(fs::read_dir(dir.path()).unwrap().all(|e| e.unwrap().path().extension().unwrap() == "toml"));
}

#[test]
fn zero_probe_is_a_solver_failure() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("job.toml"),
        "[system]\npreset = \"fig2a\"\nomega_p2 = \"0 rad/s\"\n",
    )
    .unwrap();
    let out = oms(&["spectrum", "--config", "job.toml", "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stderr_record(&out)["error"]["kind"], "solver");
    assert!(!dir.path().join("o").exists());
}

#[test]
fn steady_state_job_lists_roots() {
    let dir = tempfile::tempdir().unwrap();
    let out = oms(&["steady-state", "--preset", "fig2a", "--out", ".", "--format", "json"], dir.path());
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&fs::read(dir.path().join("steady_state.json")).unwrap()).unwrap();
    let roots = v["roots"].as_array().unwrap();
    assert!(!roots.is_empty());
    let sel = v["selected_branch"].as_u64().unwrap() as usize;
    let d3 = roots[sel]["delta"][2].as_f64().unwrap();
    let w = 2.0 * std::f64::consts::PI * 12.6e9;
    assert!((d3 / w - 1.0).abs() < 1e-9);
}

#[test]
fn waterfall_sweep_csv() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("job.toml"),
        "[system]\npreset = \"fig3cd\"\n[job]\nkind = \"sweep\"\nx_count = 21\n",
    )
    .unwrap();
    let out = oms(&["sweep", "--config", "job.toml", "--out", "w"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("w/sweep.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("o_m3_over_omega_m1,x_over_omega_m1,delta_p_over_omega_m1,T_12,T_21")
    );
    assert_eq!(lines.count(), 6 * 21);
    let meta = read_meta(&dir.path().join("w/sweep.csv.meta.json"));
    assert_eq!(meta["details"]["cells"].as_array().unwrap().len(), 6);
    assert_eq!(meta["job"], "sweep1d");
}

#[test]
fn phi_rel_sweep_records_mapping() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("job.toml"),
        "[system]\npreset = \"fig6\"\n[job]\nx_count = 5\naxis1 = { param = \"phi_rel\", start = \"-pi\", stop = \"pi\", count = 3 }\n",
    )
    .unwrap();
    let out = oms(&["sweep", "--config", "job.toml", "--out", ".", "--format", "json"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let meta = read_meta(&dir.path().join("sweep.json.meta.json"));
    assert!(meta["phi_rel_mapping"].as_str().unwrap().contains("phi_rel/2"));
}

#[test]
fn verify_job_reports_per_mode_deviations() {
    let dir = tempfile::tempdir().unwrap();
    let out = oms(&["verify", "--preset", "fig2a", "--out", "v"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_slice(&fs::read(dir.path().join("v/verify.json")).unwrap()).unwrap();
    let points = report["points"].as_array().unwrap();
    assert_eq!(points.len(), 5);
    for p in points {
        assert_eq!(p["convention"], "literal");
        for d in p["relative_deviation"].as_array().unwrap() {
            assert!(d.as_f64().unwrap() <= 5e-3);
        }
    }
    assert_eq!(report["passed"], true);
}
