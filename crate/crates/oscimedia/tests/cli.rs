//! End-to-end runs of the `oscimedia` binary: argument handling, exit
//! codes, file emission, and the figure presets.

use std::path::Path;
use std::process::{Command, Output};

fn oscimedia(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oscimedia"))
        .args(args)
        .output()
        .expect("binary launches")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

/// Splits a CSV emission into (header, provenance lines, data rows).
fn split_csv(text: &str) -> (String, Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let header = lines.next().expect("header row").to_string();
    let mut comments = Vec::new();
    let mut rows = Vec::new();
    for line in lines {
        if let Some(rest) = line.strip_prefix('#') {
            assert!(rows.is_empty(), "provenance must precede all data rows");
            comments.push(rest.trim().to_string());
        } else {
            let row: Vec<f64> = line
                .split(',')
                .map(|cell| cell.parse::<f64>().expect("numeric cell"))
                .collect();
            rows.push(row);
        }
    }
    (header, comments, rows)
}

fn read_csv(path: &Path) -> (String, Vec<String>, Vec<Vec<f64>>) {
    split_csv(&std::fs::read_to_string(path).expect("output file exists"))
}

#[test]
fn help_and_version_exit_cleanly() {
    let out = oscimedia(&["--help"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("chart"));
    assert!(stdout(&out).contains("photons"));

    let out = oscimedia(&["--version"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("oscimedia"));

    let out = oscimedia(&["scan", "--help"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("--rho-range"));
}

#[test]
fn usage_errors_exit_with_one() {
    let out = oscimedia(&["frobnicate"]);
    assert_eq!(code(&out), 1);
    assert!(!stderr(&out).is_empty());

    let out = oscimedia(&["scan", "--rho", "1.0", "--rho-range", "0.9", "1.1", "5"]);
    assert_eq!(code(&out), 1, "conflicting frequency flags");

    let out = oscimedia(&["evolve"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("rho"), "{}", stderr(&out));
}

#[test]
fn invalid_physics_exits_with_one() {
    let out = oscimedia(&["evolve", "--rho", "1.0", "--b", "1.5", "--periods", "1"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("error:"), "{}", stderr(&out));

    let out = oscimedia(&["photons", "--rho", "-0.5", "--periods", "1"]);
    assert_eq!(code(&out), 1);

    let out = oscimedia(&["scan", "--rho-range", "1.1", "0.9", "5"]);
    assert_eq!(code(&out), 1, "inverted window");

    let out = oscimedia(&["scan", "--rho-range", "0.9", "1.1", "2.5"]);
    assert_eq!(code(&out), 1, "fractional sample count");
}

#[test]
fn io_failures_exit_with_three() {
    let out = oscimedia(&["photons", "--rho", "1.0", "--config", "/does/not/exist.toml"]);
    assert_eq!(code(&out), 3);

    let out = oscimedia(&[
        "scan",
        "--rho-range",
        "0.9",
        "1.0",
        "2",
        "--periods",
        "1",
        "--out",
        "/does/not/exist/dir/out.csv",
    ]);
    assert_eq!(code(&out), 3);
}

#[test]
fn config_file_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();

    let bad_key = dir.path().join("bad_key.toml");
    std::fs::write(&bad_key, "[physics]\nvelocity = 0.3\n").unwrap();
    let out = oscimedia(&["photons", "--rho", "1.0", "--config", bad_key.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("velocity"), "{}", stderr(&out));

    let conflict = dir.path().join("conflict.toml");
    std::fs::write(&conflict, "command = \"scan\"\n").unwrap();
    let out = oscimedia(&["photons", "--rho", "1.0", "--config", conflict.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("command"), "{}", stderr(&out));

    let out = oscimedia(&["photons", "--rho", "1.0", "--preset", "fig3"]);
    assert_eq!(code(&out), 1, "fig3 belongs to scan");
}

#[test]
fn scan_emits_csv_with_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scan.csv");
    let out = oscimedia(&[
        "scan",
        "--rho-range",
        "0.98",
        "1.06",
        "5",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).is_empty(), "file output should be silent");

    let (header, comments, rows) = read_csv(&path);
    assert_eq!(header, "rho,re_nu,im_nu");
    assert!(comments.iter().any(|c| c.starts_with("tool = oscimedia")));
    assert!(comments.iter().any(|c| c == "command = scan"));
    assert!(comments.iter().any(|c| c == "rho_range = [0.98, 1.06, 5]"));
    assert!(comments.iter().any(|c| c == "b = 0.3"));
    assert_eq!(rows.len(), 5);
    assert!((rows[0][0] - 0.98).abs() < 1e-12);
    assert!((rows[4][0] - 1.06).abs() < 1e-12);
    // The window straddles the first resonance tongue: growth inside.
    assert!(rows.iter().any(|r| r[2] > 1e-3));

    // Replaying the same invocation reproduces the file byte for byte.
    let first = std::fs::read(&path).unwrap();
    let out = oscimedia(&[
        "scan",
        "--rho-range",
        "0.98",
        "1.06",
        "5",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(first, std::fs::read(&path).unwrap());
}

#[test]
fn json_output_parses_and_matches_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("e.csv");
    let json_path = dir.path().join("e.json");
    let base = [
        "evolve", "--rho", "0.7", "--b", "0.2", "--periods", "2",
    ];
    let mut csv_args = base.to_vec();
    csv_args.extend(["--out", csv_path.to_str().unwrap()]);
    assert_eq!(code(&oscimedia(&csv_args)), 0);
    let mut json_args = base.to_vec();
    json_args.extend(["--format", "json", "--out", json_path.to_str().unwrap()]);
    assert_eq!(code(&oscimedia(&json_args)), 0);

    let value: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    let (header, _, rows) = read_csv(&csv_path);
    let columns: Vec<String> = value["columns"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c.as_str().unwrap().to_string())
        .collect();
    assert_eq!(header, columns.join(","));
    let json_rows = value["rows"].as_array().unwrap();
    assert_eq!(json_rows.len(), rows.len());
    assert_eq!(rows.len(), 2 * 64 + 1);
    for (jr, cr) in json_rows.iter().zip(&rows) {
        for (jc, cc) in jr.as_array().unwrap().iter().zip(cr) {
            assert_eq!(jc.as_f64().unwrap(), *cc, "same numbers in both formats");
        }
    }
    assert_eq!(value["config"]["rho"].as_f64().unwrap(), 0.7);
    assert_eq!(value["config"]["preset"], serde_json::Value::Null);
}

#[test]
fn config_file_drives_a_run_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    let out_path = dir.path().join("photons.csv");
    std::fs::write(
        &config,
        format!(
            "command = \"photons\"\n\
             [physics]\nrho = 0.8\nb = 0.0\nperiods = 2\n\
             [numerics]\nsamples_per_period = 8\n\
             [output]\npath = {:?}\n",
            out_path.to_str().unwrap()
        ),
    )
    .unwrap();

    let out = oscimedia(&["photons", "--config", config.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let (header, comments, rows) = read_csv(&out_path);
    assert_eq!(header, "tau,density");
    assert_eq!(rows.len(), 2 * 8 + 1);
    assert!(rows.iter().all(|r| r[1] == 0.0), "still medium, no photons");
    assert!(comments.iter().any(|c| c == "samples_per_period = 8"));

    // A flag overrides the file: one period instead of two.
    let out = oscimedia(&[
        "photons",
        "--config",
        config.to_str().unwrap(),
        "--periods",
        "1",
    ]);
    assert_eq!(code(&out), 0);
    let (_, _, rows) = read_csv(&out_path);
    assert_eq!(rows.len(), 8 + 1);
}

#[test]
fn photon_presets_reproduce_the_reference_behaviour() {
    let dir = tempfile::tempdir().unwrap();

    // Resonant window: the density at the end dwarfs the first period.
    let path = dir.path().join("fig6c.csv");
    let out = oscimedia(&["photons", "--preset", "fig6c", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let (_, comments, rows) = read_csv(&path);
    assert!(comments.iter().any(|c| c == "preset = fig6c"));
    assert_eq!(rows.len(), 100 * 64 + 1);
    let first_period_end = rows[64][1];
    let final_density = rows.last().unwrap()[1];
    assert!(final_density > 1e4, "got {final_density}");
    assert!(
        final_density > 10.0 * first_period_end.max(f64::MIN_POSITIVE),
        "resonant growth: {final_density} vs {first_period_end}"
    );

    // Detuned window: bounded production.
    let path = dir.path().join("fig6b.csv");
    let out = oscimedia(&["photons", "--preset", "fig6b", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let (_, _, rows) = read_csv(&path);
    let max = rows.iter().map(|r| r[1]).fold(0.0, f64::max);
    assert!(max < 1e-2, "bounded density, got {max}");
    assert!(max > 0.0);
}

#[test]
fn fig4_emits_two_named_tables() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("fig4.csv");
    let out = oscimedia(&["scan", "--preset", "fig4", "--out", base.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let m1 = dir.path().join("fig4_m1.csv");
    let m2 = dir.path().join("fig4_m2.csv");
    assert!(m1.exists() && m2.exists());
    assert!(!base.exists(), "multi-table runs only write suffixed files");

    let (_, comments, rows) = read_csv(&m1);
    assert_eq!(rows.len(), 281);
    assert!(comments.iter().any(|c| c == "table = m1"));
    let peak = rows
        .iter()
        .max_by(|a, b| a[2].total_cmp(&b[2]))
        .unwrap();
    assert!((peak[0] - 1.016).abs() < 5e-3, "first tongue peak near 1.016");

    let (_, _, rows2) = read_csv(&m2);
    assert_eq!(rows2.len(), 281);
    let peak2 = rows2.iter().map(|r| r[2]).fold(0.0, f64::max);
    assert!(peak2 > 0.0 && peak2 < peak[2], "second tongue is weaker");
}

#[test]
fn chart_preset_emits_grid_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("small.toml");
    std::fs::write(&config, "[numerics]\nresolution = 24\n").unwrap();
    let base = dir.path().join("fig1.json");
    let out = oscimedia(&[
        "chart",
        "--preset",
        "fig1",
        "--config",
        config.to_str().unwrap(),
        "--format",
        "json",
        "--out",
        base.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(base.exists(), "grid is the unnamed primary table");
    let line_path = dir.path().join("fig1_line.json");
    assert!(line_path.exists());

    let grid: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&base).unwrap()).unwrap();
    assert_eq!(grid["rows"].as_array().unwrap().len(), 24 * 24);
    assert_eq!(grid["config"]["resolution"].as_i64().unwrap(), 24);

    let line: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&line_path).unwrap()).unwrap();
    let rows = line["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 24);
    // Straight line: endpoints pin the slope, the middle must agree.
    let q0 = rows[0][0].as_f64().unwrap();
    let a0 = rows[0][1].as_f64().unwrap();
    let q1 = rows[23][0].as_f64().unwrap();
    let a1 = rows[23][1].as_f64().unwrap();
    let slope = (a1 - a0) / (q1 - q0);
    let qm = rows[11][0].as_f64().unwrap();
    let am = rows[11][1].as_f64().unwrap();
    assert!((am - (a0 + slope * (qm - q0))).abs() < 1e-9);
}

#[test]
fn stdout_emission_matches_file_emission() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    let args = ["scan", "--rho-range", "1.4", "1.5", "3", "--b", "0.1"];
    let out = oscimedia(&args);
    assert_eq!(code(&out), 0);
    let printed = stdout(&out);

    let mut file_args = args.to_vec();
    file_args.extend(["--out", path.to_str().unwrap()]);
    assert_eq!(code(&oscimedia(&file_args)), 0);
    let written = std::fs::read_to_string(&path).unwrap();

    // Only the out field of the provenance differs.
    let scrub = |s: &str| {
        s.lines()
            .filter(|l| !l.starts_with("# out"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(scrub(&printed), scrub(&written));
}
