//! End-to-end tests of the `ncsohs` binary: exit codes, JSON shape, and
//! output determinism.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ncsohs"))
}

fn write_temp(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("ncsohs-cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn t_problem_file() -> PathBuf {
    write_temp(
        "t.prob",
        "nvars 2\nobjective 1+2*x+x^2+x*y^2+2*y^2+y^2*x+y*x^2*y+y^4\n",
    )
}

fn json_of(output: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&output.stdout);
    serde_json::from_str(text.trim()).unwrap_or_else(|e| {
        panic!("bad JSON ({e}): {text}");
    })
}

#[test]
fn trace_min_on_t_is_zero() {
    let out = bin()
        .args(["trace-min"])
        .arg(t_problem_file())
        .args(["--order", "2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let record = json_of(&out);
    assert_eq!(record["schema"], 1);
    assert_eq!(record["program"], "trace-min");
    assert_eq!(record["status"], "optimal");
    let bound = record["bound"].as_f64().unwrap();
    assert!(bound.abs() <= 1e-6, "bound {bound}");
}

#[test]
fn sohs_check_on_t_is_feasible() {
    let out = bin()
        .args(["sohs-check"])
        .arg(t_problem_file())
        .args(["--order", "2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let record = json_of(&out);
    assert_eq!(record["feasible"], true);
    let residual = record["certificate"]["residual_linf"].as_f64().unwrap();
    assert!(residual <= 1e-6, "residual {residual}");
    // summands parse back in the polynomial grammar
    for s in record["certificate"]["summands"].as_array().unwrap() {
        ncsohs::freealg::parse_poly(s.as_str().unwrap(), 2).unwrap();
    }
}

#[test]
fn motzkin_trace_is_classified_unbounded() {
    let path = write_temp(
        "motzkin.prob",
        "nvars 2\nobjective x*y^4*x+y*x^4*y-3*x*y^2*x+1\n",
    );
    let out = bin()
        .args(["trace-min"])
        .arg(path)
        .args(["--order", "3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stdout));
    let record = json_of(&out);
    assert_eq!(record["status"], "primal_infeasible");
    assert_eq!(record["bound"], "-inf");
}

#[test]
fn chsh_preset_reaches_tsirelson() {
    let out = bin()
        .args(["eig-min", "--preset", "chsh", "--order", "2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let record = json_of(&out);
    let bound = record["bound"].as_f64().unwrap();
    assert!((bound + 2.0 * std::f64::consts::SQRT_2).abs() < 1e-4, "bound {bound}");
    let violation = record["max_violation"].as_f64().unwrap();
    assert!((violation - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-4);
}

#[test]
fn psd_rank_rank_one_matrix() {
    let path = write_temp("ones.csv", "1,1\n1,1\n");
    let out = bin()
        .args(["psd-rank"])
        .arg(path)
        .args(["--order", "2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let record = json_of(&out);
    let rho = record["bound"].as_f64().unwrap();
    assert!(rho <= 1.0 + 1e-6, "rho {rho}");
}

#[test]
fn constrained_eigenvalue_problem_file() {
    let path = write_temp(
        "interval.prob",
        "nvars 1\nkind eigenvalue\norder 1\nobjective x1\nineq 1-x1^2\n",
    );
    let out = bin().args(["eig-min"]).arg(path).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let record = json_of(&out);
    let bound = record["bound"].as_f64().unwrap();
    assert!((bound + 1.0).abs() < 1e-6, "bound {bound}");
}

#[test]
fn json_output_is_deterministic() {
    let run = || {
        let out = bin()
            .args(["trace-min"])
            .arg(t_problem_file())
            .args(["--order", "2", "--sample-trials", "32", "--seed", "7"])
            .output()
            .unwrap();
        let mut record = json_of(&out);
        record.as_object_mut().unwrap().remove("timings");
        serde_json::to_string(&record).unwrap()
    };
    assert_eq!(run(), run());
}

#[test]
fn floats_use_full_precision() {
    let out = bin()
        .args(["trace-min"])
        .arg(t_problem_file())
        .args(["--order", "2"])
        .output()
        .unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    // 17 significant digits in scientific notation
    assert!(
        text.contains("e0") || text.contains("e-"),
        "expected scientific notation: {text}"
    );
    let record = json_of(&out);
    let printed = format!("{:.16e}", record["bound"].as_f64().unwrap());
    assert!(text.contains(&printed), "bound not printed at full precision");
}

#[test]
fn out_flag_writes_file() {
    let path = std::env::temp_dir().join("ncsohs-cli-tests/out.json");
    let _ = std::fs::remove_file(&path);
    let out = bin()
        .args(["trace-min"])
        .arg(t_problem_file())
        .args(["--order", "2", "--out"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let contents = std::fs::read_to_string(&path).unwrap();
    let record: serde_json::Value = serde_json::from_str(contents.trim()).unwrap();
    assert_eq!(record["program"], "trace-min");
}

#[test]
fn export_sdpa_subcommand_round_trips() {
    let path = std::env::temp_dir().join("ncsohs-cli-tests/t.dat-s");
    let out = bin()
        .args(["export-sdpa"])
        .arg(t_problem_file())
        .args(["--kind", "trace", "--order", "2", "--out"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let problem = ncsohs::sdp::import_sdpa(&text).unwrap();
    assert!(problem.num_constraints() > 0);
    let exported = ncsohs::sdp::export_sdpa(&problem).unwrap();
    assert_eq!(text, exported);
}

#[test]
fn export_flag_on_solve_commands() {
    let path = std::env::temp_dir().join("ncsohs-cli-tests/flagged.dat-s");
    let _ = std::fs::remove_file(&path);
    let out = bin()
        .args(["trace-min"])
        .arg(t_problem_file())
        .args(["--order", "2", "--export-sdpa"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let record = json_of(&out);
    assert_eq!(record["sdpa_export"].as_str().unwrap(), path.to_string_lossy());
    assert!(ncsohs::sdp::import_sdpa(&std::fs::read_to_string(&path).unwrap()).is_ok());
}

#[test]
fn parse_errors_exit_one_with_location() {
    let path = write_temp("bad.prob", "nvars 2\nobjective x3+y\n");
    let out = bin().args(["trace-min"]).arg(path).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2"), "stderr: {err}");

    let path = write_temp("nonsym.prob", "nvars 2\nobjective x^2\nineq x*y\n");
    let out = bin().args(["eig-min"]).arg(path).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("symmetric"), "stderr: {err}");

    let out = bin()
        .args(["trace-min", "/nonexistent/path.prob"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sample_bound_respects_sandwich() {
    let path = write_temp(
        "square.prob",
        "nvars 1\nkind eigenvalue\norder 1\nobjective x1^2-2*x1+1\n",
    );
    let out = bin()
        .args(["eig-min"])
        .arg(path)
        .args(["--sample-trials", "64", "--seed", "3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let record = json_of(&out);
    let bound = record["bound"].as_f64().unwrap();
    let sample = record["bounds"]["sample"].as_f64().unwrap();
    assert!(bound <= sample + 1e-6, "bound {bound} above sample {sample}");
}

#[test]
fn certificate_rendering_round_trips() {
    use ncsohs::cli::render_certificate;
    use ncsohs::freealg::{parse_poly, FloatPoly};
    use ncsohs::gram::{build_gram_system, extract_sohs};
    use ncsohs::Mode;

    let t = parse_poly("1+2*x+x^2+x*y^2+2*y^2+y^2*x+y*x^2*y+y^4", 2).unwrap();
    let system = build_gram_system(&t, 2, Mode::Eigenvalue).unwrap();
    let sdp = ncsohs::cli::gram_feasibility_sdp(&system);
    let sol = ncsohs::sdp::solve(&sdp, &ncsohs::sdp::SdpOptions::default());
    let cert = extract_sohs(&sol.x[0], &system.basis, 1e-8).unwrap();

    let text = render_certificate(&cert);
    assert!(text.contains("residual_linf"));
    // rendering twice is byte-identical
    assert_eq!(text, render_certificate(&cert));
    // every summand line parses back to the same coefficients
    let mut parsed: Vec<FloatPoly> = Vec::new();
    for line in text.lines() {
        if let Some(rest) = line.split_once(" = ").map(|(_, r)| r) {
            if line.starts_with('g') {
                parsed.push(parse_poly(rest, 2).unwrap().to_float());
            }
        }
    }
    assert_eq!(parsed.len(), cert.summands.len());
    for (orig, back) in cert.summands.iter().zip(&parsed) {
        let diff = (orig - back).max_abs_coeff();
        assert!(diff <= 1e-12, "rendered summand differs by {diff}");
    }

    // empty certificate renders as zero
    let zero = ncsohs::gram::extract_sohs(
        &faer::Mat::<f64>::zeros(3, 3),
        &ncsohs::freealg::enumerate_basis(2, 1).unwrap(),
        1e-9,
    )
    .unwrap();
    assert!(render_certificate(&zero).contains("\n0\n") || render_certificate(&zero).starts_with("0"));
}

#[test]
fn cli_order_flag_overrides_problem_file() {
    let path = write_temp(
        "ordered.prob",
        "nvars 1\nkind eigenvalue\norder 2\nobjective x1^2-2*x1+1\n",
    );
    let out = bin()
        .args(["eig-min"])
        .arg(&path)
        .args(["--order", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let record = json_of(&out);
    assert_eq!(record["order"], 1);
    // without the flag the file's order line applies
    let out = bin().args(["eig-min"]).arg(&path).output().unwrap();
    let record = json_of(&out);
    assert_eq!(record["order"], 2);
}
