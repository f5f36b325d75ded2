use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

use sdre_cli::output::trajectory_header;

fn sdre(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sdre"))
        .args(args)
        .arg("--output-dir")
        .arg(dir)
        .env_remove("SDRE_OUTPUT_DIR")
        .output()
        .unwrap()
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn schema(name: &str) -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas").join(name);
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Parse the JSON file and check it against the published schema.
fn read_json(path: &Path, schema_name: &str) -> Value {
    let v: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema(schema_name)).unwrap();
    let errors: Vec<String> = validator.iter_errors(&v).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{}: {errors:?}", path.display());
    v
}

/// Rows of a CSV whose header must equal `header`.
fn read_csv(path: &Path, header: &[String]) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let h: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(h, header, "{}", path.display());
    r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect()
}

fn strings(h: &[&str]) -> Vec<String> {
    h.iter().map(|s| s.to_string()).collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap_or_else(|_| panic!("not a number: {s:?}"))
}

fn config_file(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("exp.toml");
    fs::write(&path, body).unwrap();
    path
}

#[test]
fn lqr_from_origin_costs_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    ok(&sdre(&["simulate", "--model", "lqr", "--x0", "0,0", "--t-final", "1"], tmp.path()));
    let s = read_json(&tmp.path().join("summary.json"), "summary.schema.json");
    assert_eq!(s["total_cost"], 0.0);
    assert_eq!(s["diverged"], false);
    assert_eq!(s["steps"], 101);
}

#[test]
fn van_der_pol_corrected_run_writes_all_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    ok(&sdre(
        &["simulate", "--model", "van_der_pol", "--form", "alternative", "--x0", "-0.5,0.5", "--strategy", "direct",
          "--corrected", "--residual"],
        dir,
    ));
    let s = read_json(&dir.join("summary.json"), "summary.schema.json");
    assert_eq!(s["model"], "van_der_pol");
    assert_eq!(s["strategy"], "direct");
    assert_eq!(s["params"]["form"], "alternative");
    assert_eq!(s["diverged"], false);
    let bound = s["bound"]["integral_along_trajectory"].as_f64().unwrap();
    assert!(bound > 0.0);

    let rows = read_csv(&dir.join("trajectory.csv"), &trajectory_header(2, 1));
    assert_eq!(rows.len(), 2001);
    assert_eq!(rows.len() as u64, s["steps"].as_u64().unwrap());
    assert_eq!((num(&rows[0][1]), num(&rows[0][2])), (-0.5, 0.5));
    let last = &rows[rows.len() - 1];
    assert_eq!(num(&last[0]), 20.0);
    let y_end = num(&last[1]).hypot(num(&last[2]));
    assert!(y_end < 0.5f64.hypot(0.5) * (-0.25 * 20.0f64).exp(), "{y_end}");
    for r in &rows {
        for v in r {
            num(v);
        }
    }
    // 17 significant digits
    assert!(rows[1][1].split('e').next().unwrap().trim_start_matches('-').len() == 18);

    let res = read_csv(&dir.join("residual.csv"), &strings(&["t", "E", "phi_norm", "bound_partial"]));
    assert_eq!(res.len(), 2001);
    assert_eq!(num(&res[res.len() - 1][3]), bound);
    for (r, t) in res.iter().zip(&rows) {
        assert_eq!(r[1], t[5]);
    }
}

#[test]
fn residual_stride_leaves_gaps() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    ok(&sdre(
        &["simulate", "--model", "van_der_pol", "--residual", "--residual-stride", "10", "--t-final", "1"],
        dir,
    ));
    let rows = read_csv(&dir.join("trajectory.csv"), &trajectory_header(2, 1));
    let with_e: Vec<usize> = (0..rows.len()).filter(|&k| !rows[k][5].is_empty()).collect();
    assert_eq!(with_e, (0..=100).step_by(10).collect::<Vec<_>>());
    let res = read_csv(&dir.join("residual.csv"), &strings(&["t", "E", "phi_norm", "bound_partial"]));
    assert_eq!(res.len(), 11);
}

#[test]
fn identical_runs_write_identical_trajectories() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["simulate", "--model", "zeldovich", "--d", "30", "--mu", "2", "--t-final", "0.4"];
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    ok(&sdre(&args, &a));
    ok(&sdre(&args, &b));
    let strip = |p: &Path| -> Vec<Vec<String>> {
        read_csv(&p.join("trajectory.csv"), &trajectory_header(30, 9))
            .into_iter()
            .map(|mut r| {
                r.pop();
                r
            })
            .collect()
    };
    let (ra, rb) = (strip(&a), strip(&b));
    assert_eq!(ra, rb);
    assert_eq!(ra.len(), 21);
}

#[test]
fn divergence_is_a_result_not_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    // rk4 at dt = 3 is unstable for the closed-loop rate −√2
    let cfg = config_file(
        tmp.path(),
        "[model]\nname = \"lqr\"\n[model.params]\na = [[1.0]]\nb = [[1.0]]\nq = [[1.0]]\nr = [[1.0]]\nx0 = [1.0]\n\
         [strategy]\nkind = \"direct\"\n[integrator]\nscheme = \"rk4\"\ndt = 3.0\nt_final = 300.0\n",
    );
    let out_dir = tmp.path().join("out");
    let out = sdre(&["simulate", "--config", cfg.to_str().unwrap()], &out_dir);
    ok(&out);
    let s = read_json(&out_dir.join("summary.json"), "summary.schema.json");
    assert_eq!(s["diverged"], true);
    let steps = s["steps"].as_u64().unwrap();
    assert!(steps > 1 && steps < 101, "{steps}");
    let rows = read_csv(&out_dir.join("trajectory.csv"), &trajectory_header(1, 1));
    assert_eq!(rows.len() as u64, steps);
}

#[test]
fn solver_failure_exits_nonzero() {
    let tmp = tempfile::tempdir().unwrap();
    // unstable mode with no actuation: no stabilizing Riccati solution
    let cfg = config_file(
        tmp.path(),
        "[model]\nname = \"lqr\"\n[model.params]\na = [[1.0]]\nb = [[0.0]]\nx0 = [1.0]\n[strategy]\nkind = \"direct\"\n",
    );
    let out = sdre(&["simulate", "--config", cfg.to_str().unwrap()], &tmp.path().join("out"));
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn configuration_errors_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 4] = [
        &["simulate", "--model", "heat"],
        &["simulate", "--model", "lqr", "--dt", "0"],
        &["simulate", "--model", "van_der_pol", "--strategy", "offline_online"],
        &["sdc-root", "--model", "allen_cahn"],
    ];
    for args in cases {
        let out = sdre(args, tmp.path());
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(String::from_utf8_lossy(&out.stderr).contains("configuration error"));
    }
    let cfg = config_file(tmp.path(), "[model]\nname = \"lqr\"\n\n[integrator]\nstep = 0.1\n");
    let out = sdre(&["simulate", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 5") && err.contains("step"), "{err}");
}

#[test]
fn output_dir_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config_file(tmp.path(), "output_dir = \"ignored\"\n[model]\nname = \"lqr\"\n[integrator]\nt_final = 0.1\n");
    let env_dir = tmp.path().join("env");
    let run = |extra: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_sdre"))
            .current_dir(tmp.path())
            .args(["simulate", "--config", cfg.to_str().unwrap()])
            .args(extra)
            .env("SDRE_OUTPUT_DIR", &env_dir)
            .output()
            .unwrap()
    };
    ok(&run(&[]));
    assert!(env_dir.join("summary.json").exists());
    assert!(!tmp.path().join("ignored").exists());
    // flag beats environment
    let flag_dir = tmp.path().join("flag");
    ok(&run(&["--output-dir", flag_dir.to_str().unwrap()]));
    assert!(flag_dir.join("summary.json").exists());
}

#[test]
fn bench_table_has_one_row_per_cell() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    ok(&sdre(
        &["bench", "--model", "zeldovich", "--d", "30", "--t-final", "0.2", "--strategies",
          "offline_online,cascade_nk,direct", "--mus", "1,2", "--jobs", "2"],
        dir,
    ));
    let header: Vec<String> = strings(&sdre_cli::commands::BENCH_HEADER);
    let rows = read_csv(&dir.join("bench.csv"), &header);
    assert_eq!(rows.len(), 6);
    let cells: Vec<(String, f64)> = rows.iter().map(|r| (r[0].clone(), num(&r[1]))).collect();
    assert_eq!(cells[0], ("offline_online".to_string(), 1.0));
    assert_eq!(cells[5], ("direct".to_string(), 2.0));
    assert!(rows.iter().all(|r| r[7] == "ok" && r[4] == "false"));
    // cascade and direct solve the same equation
    for mu in [1.0, 2.0] {
        let cost = |s: &str| num(&rows.iter().find(|r| r[0] == s && num(&r[1]) == mu).unwrap()[3]);
        assert!((cost("cascade_nk") - cost("direct")).abs() <= 1e-3 * cost("direct"));
    }
    let j = read_json(&dir.join("bench.json"), "bench.schema.json");
    assert_eq!(j["rows"].as_array().unwrap().len(), 6);
}

#[test]
fn bench_marks_failed_cells_and_keeps_the_rest() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    ok(&sdre(
        &["bench", "--model", "van_der_pol", "--t-final", "1", "--strategies", "offline_online,direct"],
        dir,
    ));
    let j = read_json(&dir.join("bench.json"), "bench.schema.json");
    let rows = j["rows"].as_array().unwrap();
    assert_eq!(rows[0]["status"], "failed");
    assert!(rows[0]["error"].as_str().unwrap().contains("state-independent"));
    assert_eq!(rows[1]["status"], "ok");
    let csv_rows = read_csv(&dir.join("bench.csv"), &strings(&sdre_cli::commands::BENCH_HEADER));
    assert_eq!(csv_rows[0][3], "");
}

#[test]
fn bench_without_strategies_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config_file(tmp.path(), "[model]\nname = \"lqr\"\n[bench]\nstrategies = []\n");
    let out = sdre(&["bench", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bench.strategies"));
    let out = sdre(&["bench", "--model", "lqr"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sdc_root_on_van_der_pol() {
    let tmp = tempfile::tempdir().unwrap();
    let base = tmp.path().join("base");
    ok(&sdre(&["sdc-root", "--model", "van_der_pol", "--indices", "1,1,2"], &base));
    let j = read_json(&base.join("sdc_root.json"), "sdc_root.schema.json");
    assert_eq!(j["holds"], true);
    assert_eq!(j["alpha_star"], 0.0);
    assert!(j["e_at_root"].as_f64().unwrap().abs() <= 1e-10);
    let prof = read_csv(&base.join("sdc_profile.csv"), &strings(&["alpha", "E"]));
    assert_eq!(prof.len(), 41);
    assert_eq!((num(&prof[0][0]), num(&prof[40][0])), (-10.0, 10.0));

    // the alternative factorization is the baseline shifted by one unit of Z
    let alt = tmp.path().join("alt");
    ok(&sdre(
        &["sdc-root", "--model", "van_der_pol", "--form", "alternative", "--indices", "1,1,2", "--alpha-points", "21"],
        &alt,
    ));
    let j = read_json(&alt.join("sdc_root.json"), "sdc_root.schema.json");
    assert!((j["alpha_star"].as_f64().unwrap() - 1.0).abs() <= 1e-9);
}

#[test]
fn sdc_root_without_sign_change_reports_holds_false() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let out = sdre(
        &["sdc-root", "--model", "van_der_pol", "--indices", "1,1,2", "--alpha-min", "0.5", "--alpha-max", "3",
          "--alpha-points", "6"],
        dir,
    );
    ok(&out);
    let j = read_json(&dir.join("sdc_root.json"), "sdc_root.schema.json");
    assert_eq!(j["holds"], false);
    assert!(j["alpha_star"].is_null() && j["bracket"].is_null());
    let prof = read_csv(&dir.join("sdc_profile.csv"), &strings(&["alpha", "E"]));
    assert!(prof.iter().all(|r| num(&r[1]) > 0.0));
}

#[test]
fn sdc_indices_beyond_dimension_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let out = sdre(&["sdc-root", "--model", "van_der_pol", "--indices", "1,1,3"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sdc.indices"));
}

#[test]
fn spectrum_of_scaled_identity_is_flat() {
    let tmp = tempfile::tempdir().unwrap();
    // Aᵀ = A = −½I, Q = R = I: P = ((√5 − 1)/2) I
    let cfg = config_file(
        tmp.path(),
        "[model]\nname = \"lqr\"\n[model.params]\na = [[-0.5, 0.0, 0.0], [0.0, -0.5, 0.0], [0.0, 0.0, -0.5]]\n\
         b = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]\n",
    );
    let dir = tmp.path().join("out");
    ok(&sdre(&["spectrum", "--config", cfg.to_str().unwrap()], &dir));
    let p = (5f64.sqrt() - 1.0) / 2.0;
    let sv = read_csv(&dir.join("spectrum.csv"), &strings(&["index", "sigma"]));
    assert_eq!(sv.len(), 3);
    for (i, r) in sv.iter().enumerate() {
        assert_eq!(r[0], (i + 1).to_string());
        assert!((num(&r[1]) - p).abs() < 1e-12);
    }
    let off = read_csv(&dir.join("offdiag.csv"), &strings(&["k", "max_offdiag_k"]));
    assert_eq!(off.len(), 3);
    assert!(off[1..].iter().all(|r| num(&r[1]).abs() < 1e-14));
    let j = read_json(&dir.join("spectrum.json"), "spectrum.schema.json");
    assert_eq!(j["numerical_rank"], 3);
}

#[test]
fn spectrum_case_one_has_low_numerical_rank() {
    let tmp = tempfile::tempdir().unwrap();
    ok(&sdre(&["spectrum", "--model", "zeldovich", "--case", "1"], tmp.path()));
    let j = read_json(&tmp.path().join("spectrum.json"), "spectrum.schema.json");
    let rank = j["numerical_rank"].as_u64().unwrap();
    assert!(rank < 50, "{rank}");
    let sv = read_csv(&tmp.path().join("spectrum.csv"), &strings(&["index", "sigma"]));
    let s: Vec<f64> = sv.iter().map(|r| num(&r[1])).collect();
    assert!(s.windows(2).all(|w| w[0] >= w[1]));
}

#[test]
fn selftest_passes() {
    let out = Command::new(env!("CARGO_BIN_EXE_sdre")).args(["selftest", "--seed", "3"]).output().unwrap();
    ok(&out);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.lines().count() >= 8 && !text.contains("FAIL"), "{text}");
}
