//! Command front end: problem files, program dispatch, and result
//! records.
//!
//! The problem file is a line-oriented key-value format:
//!
//! ```text
//! # comment
//! nvars 2
//! kind trace
//! order 2
//! objective 1+2*x+x^2+x*y^2+2*y^2+y^2*x+y*x^2*y+y^4
//! ineq 1-x^2
//! eq x1*x2-x2*x1
//! ```
//!
//! Results are emitted as a versioned JSON record with a fixed field
//! order and floating-point values printed with 17 significant digits,
//! so identical inputs and options produce byte-identical output apart
//! from the timing fields.

use std::fmt::Write as _;

use num_rational::BigRational;
use thiserror::Error;

use crate::freealg::{parse_poly, poly_to_string, Coeff, NcPolynomial};
use crate::gram::{build_gram_system, extract_sohs, GramSystem, SohsCertificate};
use crate::hierarchy::{
    chsh_problem, eig_min_constrained, psd_rank_example_matrix, psd_rank_lower_bound,
    sample_upper_bound, trace_min_constrained, BoundReport, HierarchyError, HierarchyOptions,
    NcProblem,
};
use crate::sdp::{export_sdpa, solve, SdpProblem, SdpStatus, SparseSymMat};
use crate::Mode;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("problem file line {line}: {message}")]
    Problem { line: usize, message: String },
    #[error("matrix file line {line}: {message}")]
    Matrix { line: usize, message: String },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Hierarchy(#[from] HierarchyError),
    #[error(transparent)]
    Gram(#[from] crate::gram::GramError),
    #[error(transparent)]
    Sdp(#[from] crate::sdp::SdpError),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// Parsed problem file.
#[derive(Debug, Clone)]
pub struct ProblemFile {
    pub nvars: usize,
    pub objective: NcPolynomial,
    pub inequalities: Vec<NcPolynomial>,
    pub equalities: Vec<NcPolynomial>,
    pub kind: Option<Mode>,
    pub order: Option<usize>,
}

impl ProblemFile {
    /// Relaxation order: the stated one, or the smallest well-posed one.
    pub fn effective_order(&self) -> usize {
        self.order.unwrap_or_else(|| {
            crate::hierarchy::min_order(&self.objective, &self.inequalities, &self.equalities)
        })
    }

    pub fn to_problem(&self, kind: Mode, order: usize) -> Result<NcProblem, HierarchyError> {
        NcProblem::new(
            self.objective.clone(),
            self.inequalities.clone(),
            self.equalities.clone(),
            kind,
            order,
        )
    }
}

/// Parses the key-value problem format, reporting the offending line on
/// errors.
pub fn parse_problem(text: &str) -> Result<ProblemFile, CliError> {
    let mut nvars: Option<usize> = None;
    let mut objective_src: Option<(usize, String)> = None;
    let mut ineq_src: Vec<(usize, String)> = Vec::new();
    let mut eq_src: Vec<(usize, String)> = Vec::new();
    let mut kind: Option<Mode> = None;
    let mut order: Option<usize> = None;

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = match line.split_once(char::is_whitespace) {
            Some((k, v)) => (k.trim(), v.trim()),
            None => {
                return Err(CliError::Problem {
                    line: lineno,
                    message: format!("expected 'key value', found '{line}'"),
                })
            }
        };
        match key {
            "nvars" => {
                nvars = Some(value.parse().map_err(|_| CliError::Problem {
                    line: lineno,
                    message: format!("bad variable count '{value}'"),
                })?)
            }
            "objective" => objective_src = Some((lineno, value.to_string())),
            "ineq" => ineq_src.push((lineno, value.to_string())),
            "eq" => eq_src.push((lineno, value.to_string())),
            "kind" => {
                kind = Some(match value {
                    "eigenvalue" | "eig" => Mode::Eigenvalue,
                    "trace" => Mode::Trace,
                    other => {
                        return Err(CliError::Problem {
                            line: lineno,
                            message: format!(
                                "unknown kind '{other}' (expected eigenvalue or trace)"
                            ),
                        })
                    }
                })
            }
            "order" => {
                order = Some(value.parse().map_err(|_| CliError::Problem {
                    line: lineno,
                    message: format!("bad order '{value}'"),
                })?)
            }
            other => {
                return Err(CliError::Problem {
                    line: lineno,
                    message: format!("unknown key '{other}'"),
                })
            }
        }
    }

    let nvars = nvars.ok_or(CliError::Problem {
        line: 1,
        message: "missing 'nvars' line".into(),
    })?;
    let (obj_line, obj_text) = objective_src.ok_or(CliError::Problem {
        line: 1,
        message: "missing 'objective' line".into(),
    })?;
    let parse_at = |lineno: usize, text: &str| -> Result<NcPolynomial, CliError> {
        parse_poly(text, nvars).map_err(|e| CliError::Problem {
            line: lineno,
            message: e.to_string(),
        })
    };
    let objective = parse_at(obj_line, &obj_text)?;
    let mut inequalities = Vec::new();
    for (lineno, src) in &ineq_src {
        let g = parse_at(*lineno, src)?;
        if !g.is_symmetric() {
            return Err(CliError::Problem {
                line: *lineno,
                message: format!("inequality constraint must be symmetric: {}", src),
            });
        }
        inequalities.push(g);
    }
    let mut equalities = Vec::new();
    for (lineno, src) in &eq_src {
        equalities.push(parse_at(*lineno, src)?);
    }
    Ok(ProblemFile {
        nvars,
        objective,
        inequalities,
        equalities,
        kind,
        order,
    })
}

/// Parses a CSV matrix of nonnegative decimals into exact rationals.
pub fn parse_matrix_csv(text: &str) -> Result<Vec<Vec<BigRational>>, CliError> {
    let mut rows = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut row = Vec::new();
        for cell in line.split(',') {
            let cell = cell.trim();
            let p = parse_poly(cell, 1).map_err(|_| CliError::Matrix {
                line: lineno,
                message: format!("bad entry '{cell}'"),
            })?;
            if p.degree().is_some() && p.degree() != Some(0) {
                return Err(CliError::Matrix {
                    line: lineno,
                    message: format!("entry '{cell}' is not a number"),
                });
            }
            row.push(p.coeff(&crate::freealg::Word::empty()));
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::Matrix {
            line: 1,
            message: "empty matrix".into(),
        });
    }
    Ok(rows)
}

/// Options shared by the solve commands.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub order: Option<usize>,
    pub hierarchy: HierarchyOptions,
    pub seed: u64,
    pub sample_trials: usize,
    pub sample_sizes: Vec<usize>,
    pub export_sdpa_path: Option<String>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            order: None,
            hierarchy: HierarchyOptions::default(),
            seed: 0,
            sample_trials: 0,
            sample_sizes: vec![1, 2, 3],
            export_sdpa_path: None,
        }
    }
}

/// One executed command: exit status plus the JSON record.
#[derive(Debug)]
pub struct Outcome {
    pub exit_code: i32,
    pub json: String,
}

fn fmt17(v: f64) -> String {
    if v == f64::NEG_INFINITY {
        return "\"-inf\"".to_string();
    }
    if v == f64::INFINITY {
        return "\"inf\"".to_string();
    }
    if v.is_nan() {
        return "\"nan\"".to_string();
    }
    format!("{:.16e}", v)
}

fn json_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn certificate_json(cert: &SohsCertificate) -> String {
    let mut out = String::from("{\"summands\":[");
    for (i, g) in cert.summands.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&json_string(&poly_to_string(g)));
    }
    out.push_str("],\"weights\":[");
    for (i, (idx, ps)) in cert.weights.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "{{\"constraint\":{},\"polys\":[", idx);
        for (j, p) in ps.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&json_string(&poly_to_string(p)));
        }
        out.push_str("]}");
    }
    let _ = write!(out, "],\"residual_linf\":{}}}", fmt17(cert.residual_linf()));
    out
}

/// Deterministic text rendering of a certificate; each summand parses
/// back in the polynomial grammar.
pub fn render_certificate(cert: &SohsCertificate) -> String {
    let mut out = String::new();
    out.push_str("# sum-of-Hermitian-squares certificate\n");
    out.push_str("# summands are determined up to orthogonal mixing\n");
    if cert.summands.is_empty() {
        out.push_str("0\n");
    }
    for (i, g) in cert.summands.iter().enumerate() {
        let _ = writeln!(out, "g{} = {}", i + 1, poly_to_string(g));
    }
    for (idx, ps) in &cert.weights {
        for (j, p) in ps.iter().enumerate() {
            let _ = writeln!(out, "constraint{} p{} = {}", idx + 1, j + 1, poly_to_string(p));
        }
    }
    let _ = writeln!(out, "residual_linf = {:e}", cert.residual_linf());
    out
}

struct RecordFields {
    program: &'static str,
    kind: Option<Mode>,
    order: usize,
    nvars: usize,
    status: String,
    bound: f64,
    primal_bound: f64,
    dual_bound: f64,
    sample_bound: Option<f64>,
    max_violation: Option<f64>,
    gap: f64,
    iterations: usize,
    primal_feas: f64,
    dual_feas: f64,
    feasible: Option<bool>,
    certificate: Option<String>,
    sdpa_export: Option<String>,
    total_ms: u128,
}

fn record_json(f: &RecordFields) -> String {
    let mut out = String::from("{\"schema\":1");
    let _ = write!(out, ",\"program\":{}", json_string(f.program));
    if let Some(kind) = f.kind {
        let _ = write!(out, ",\"kind\":{}", json_string(&kind.to_string()));
    }
    let _ = write!(out, ",\"order\":{}", f.order);
    let _ = write!(out, ",\"nvars\":{}", f.nvars);
    let _ = write!(out, ",\"status\":{}", json_string(&f.status));
    if let Some(feasible) = f.feasible {
        let _ = write!(out, ",\"feasible\":{}", feasible);
    }
    let _ = write!(out, ",\"bound\":{}", fmt17(f.bound));
    let _ = write!(
        out,
        ",\"bounds\":{{\"primal\":{},\"dual\":{},\"sample\":{}}}",
        fmt17(f.primal_bound),
        fmt17(f.dual_bound),
        f.sample_bound.map_or("null".to_string(), fmt17),
    );
    if let Some(v) = f.max_violation {
        let _ = write!(out, ",\"max_violation\":{}", fmt17(v));
    }
    let _ = write!(out, ",\"gap\":{}", fmt17(f.gap));
    let _ = write!(
        out,
        ",\"solver\":{{\"iterations\":{},\"primal_feasibility\":{},\"dual_feasibility\":{}}}",
        f.iterations,
        fmt17(f.primal_feas),
        fmt17(f.dual_feas)
    );
    match &f.certificate {
        Some(cert) => {
            let _ = write!(out, ",\"certificate\":{}", cert);
        }
        None => out.push_str(",\"certificate\":null"),
    }
    match &f.sdpa_export {
        Some(path) => {
            let _ = write!(out, ",\"sdpa_export\":{}", json_string(path));
        }
        None => out.push_str(",\"sdpa_export\":null"),
    }
    let _ = write!(out, ",\"timings\":{{\"total_ms\":{}}}", f.total_ms);
    out.push('}');
    out
}

fn status_exit_code(status: SdpStatus, bound: f64, dual_feas: f64) -> i32 {
    match status {
        SdpStatus::Optimal => 0,
        SdpStatus::PrimalInfeasible | SdpStatus::DualInfeasible => 2,
        // a stalled solve that still produced a finite bound certified by
        // a feasible dual iterate counts as a successful bounding run
        SdpStatus::IterationLimit | SdpStatus::NumericalTrouble => {
            if bound.is_finite() && dual_feas <= 1e-6 {
                0
            } else {
                1
            }
        }
    }
}

fn write_sdpa_if_requested(
    sdp: &SdpProblem,
    path: &Option<String>,
) -> Result<Option<String>, CliError> {
    if let Some(path) = path {
        let text = export_sdpa(sdp)?;
        std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        return Ok(Some(path.clone()));
    }
    Ok(None)
}

fn run_minimization(
    program: &'static str,
    prob: &NcProblem,
    opts: &RunOptions,
    max_violation_from_bound: bool,
) -> Result<Outcome, CliError> {
    let t0 = std::time::Instant::now();
    let relaxation = crate::hierarchy::build_relaxation(prob)?;
    let sdpa_export = write_sdpa_if_requested(&relaxation.sdp, &opts.export_sdpa_path)?;
    let report: BoundReport = match prob.kind() {
        Mode::Eigenvalue => eig_min_constrained(prob, &opts.hierarchy)?,
        Mode::Trace => trace_min_constrained(prob, &opts.hierarchy)?,
    };
    let sample_bound = if opts.sample_trials > 0 {
        sample_upper_bound(prob, &opts.sample_sizes, opts.sample_trials, opts.seed).best
    } else {
        None
    };
    let bound = report.primal_bound;
    let cert_json = report.certificate.as_ref().map(certificate_json);
    let fields = RecordFields {
        program,
        kind: Some(prob.kind()),
        order: prob.order(),
        nvars: prob.nvars(),
        status: report.status.to_string(),
        bound,
        primal_bound: report.primal_bound,
        dual_bound: report.dual_bound,
        sample_bound,
        max_violation: if max_violation_from_bound {
            Some(-bound)
        } else {
            None
        },
        gap: report.gap,
        iterations: report.iterations,
        primal_feas: report.primal_feas,
        dual_feas: report.dual_feas,
        feasible: None,
        certificate: cert_json,
        sdpa_export,
        total_ms: t0.elapsed().as_millis(),
    };
    Ok(Outcome {
        exit_code: status_exit_code(report.status, bound, report.dual_feas),
        json: record_json(&fields),
    })
}

/// `eig-min` / `trace-min` on a problem file or preset.
pub fn run_min_command(
    kind: Mode,
    file: Option<&ProblemFile>,
    preset: Option<&str>,
    opts: &RunOptions,
) -> Result<Outcome, CliError> {
    let program = match kind {
        Mode::Eigenvalue => "eig-min",
        Mode::Trace => "trace-min",
    };
    match (file, preset) {
        (None, Some("chsh")) => {
            if kind != Mode::Eigenvalue {
                return Err(CliError::Usage(
                    "the chsh preset is an eigenvalue program".into(),
                ));
            }
            let order = opts.order.unwrap_or(2);
            let prob = chsh_problem(order)?;
            run_minimization(program, &prob, opts, true)
        }
        (None, Some(other)) => Err(CliError::Usage(format!(
            "unknown preset '{other}' (expected chsh)"
        ))),
        (Some(pf), None) => {
            let order = opts
                .order
                .or(pf.order)
                .unwrap_or_else(|| pf.effective_order());
            let prob = pf.to_problem(pf.kind.unwrap_or(kind), order)?;
            if prob.kind() != kind {
                return Err(CliError::Usage(format!(
                    "problem file kind '{}' does not match the {} command",
                    prob.kind(),
                    program
                )));
            }
            run_minimization(program, &prob, opts, false)
        }
        (Some(_), Some(_)) => Err(CliError::Usage(
            "give either a problem file or --preset, not both".into(),
        )),
        (None, None) => Err(CliError::Usage(
            "a problem file or --preset is required".into(),
        )),
    }
}

/// `psd-rank` on a CSV matrix or the built-in example preset.
pub fn run_psd_rank(
    matrix: Option<Vec<Vec<BigRational>>>,
    preset: Option<&str>,
    opts: &RunOptions,
) -> Result<Outcome, CliError> {
    let t0 = std::time::Instant::now();
    let m = match (matrix, preset) {
        (Some(m), None) => m,
        (None, Some("psdrank-example")) => psd_rank_example_matrix(),
        (None, Some(other)) => {
            return Err(CliError::Usage(format!(
                "unknown preset '{other}' (expected psdrank-example)"
            )))
        }
        (Some(_), Some(_)) => {
            return Err(CliError::Usage(
                "give either a matrix file or --preset, not both".into(),
            ))
        }
        (None, None) => {
            return Err(CliError::Usage(
                "a matrix file or --preset is required".into(),
            ))
        }
    };
    let order = opts.order.unwrap_or(2);
    let report = psd_rank_lower_bound(&m, order, &opts.hierarchy)?;
    // the reported value is the moment side: the infimum this program
    // approximates from above
    let bound = report.dual_bound;
    let fields = RecordFields {
        program: "psd-rank",
        kind: Some(Mode::Trace),
        order,
        nvars: m.len() + m[0].len(),
        status: report.status.to_string(),
        bound,
        primal_bound: report.primal_bound,
        dual_bound: report.dual_bound,
        sample_bound: None,
        max_violation: None,
        gap: report.gap,
        iterations: report.iterations,
        primal_feas: report.primal_feas,
        dual_feas: report.dual_feas,
        feasible: None,
        certificate: None,
        sdpa_export: None,
        total_ms: t0.elapsed().as_millis(),
    };
    Ok(Outcome {
        exit_code: status_exit_code(report.status, bound, report.dual_feas),
        json: record_json(&fields),
    })
}

/// `sohs-check`: membership of the objective in the squares cone
/// (eigenvalue kind) or its cyclic closure (trace kind) at degree `2d`.
pub fn run_sohs_check(
    file: &ProblemFile,
    kind: Mode,
    opts: &RunOptions,
) -> Result<Outcome, CliError> {
    let t0 = std::time::Instant::now();
    let order = opts
        .order
        .or(file.order)
        .unwrap_or_else(|| file.objective.degree().unwrap_or(0).div_ceil(2));
    let system = build_gram_system(&file.objective, order, kind)?;
    let sdp = gram_feasibility_sdp(&system);
    let sdpa_export = write_sdpa_if_requested(&sdp, &opts.export_sdpa_path)?;
    let sol = solve(&sdp, &opts.hierarchy.sdp);
    let feasible = sol.status == SdpStatus::Optimal;
    let mut cert = None;
    if feasible {
        let mut c = extract_sohs(&sol.x[0], &system.basis, opts.hierarchy.clip_tol)?;
        // residual against the (symmetrized) target rather than the
        // solver's Gram expansion
        c.residual = &system.target.to_float() - &c.expand_squares();
        cert = Some(c);
    }
    let exit_code = match sol.status {
        SdpStatus::Optimal => 0,
        SdpStatus::PrimalInfeasible | SdpStatus::DualInfeasible => 2,
        _ => 1,
    };
    let fields = RecordFields {
        program: "sohs-check",
        kind: Some(kind),
        order,
        nvars: file.nvars,
        status: sol.status.to_string(),
        bound: 0.0,
        primal_bound: sol.primal_value,
        dual_bound: sol.dual_value,
        sample_bound: None,
        max_violation: None,
        gap: sol.gap,
        iterations: sol.iterations,
        primal_feas: sol.primal_feas,
        dual_feas: sol.dual_feas,
        feasible: Some(feasible),
        certificate: cert.as_ref().map(certificate_json),
        sdpa_export,
        total_ms: t0.elapsed().as_millis(),
    };
    Ok(Outcome {
        exit_code,
        json: record_json(&fields),
    })
}

/// Standard-form feasibility program of a Gram system.
pub fn gram_feasibility_sdp(system: &GramSystem) -> SdpProblem {
    let n = system.basis.len();
    let mut a = Vec::with_capacity(system.constraints.len());
    let mut b = Vec::with_capacity(system.constraints.len());
    for con in &system.constraints {
        let entries: Vec<(usize, u32, u32, f64)> = con
            .entries
            .iter()
            .map(|&(u, v, value)| (0usize, u as u32, v as u32, value as f64))
            .collect();
        a.push(SparseSymMat::from_entries(1, entries));
        b.push(con.rhs.to_f64());
    }
    SdpProblem::new(
        vec![crate::sdp::Block::Psd(n)],
        SparseSymMat::zero(1),
        a,
        b,
    )
    .expect("gram system data is consistent")
}

/// `export-sdpa`: write the assembled relaxation without solving.
pub fn run_export_sdpa(
    file: &ProblemFile,
    kind: Mode,
    opts: &RunOptions,
    out_path: &str,
) -> Result<Outcome, CliError> {
    let order = opts
        .order
        .or(file.order)
        .unwrap_or_else(|| file.effective_order());
    let prob = file.to_problem(file.kind.unwrap_or(kind), order)?;
    let relaxation = crate::hierarchy::build_relaxation(&prob)?;
    let text = export_sdpa(&relaxation.sdp)?;
    std::fs::write(out_path, text).map_err(|source| CliError::Io {
        path: out_path.to_string(),
        source,
    })?;
    let json = format!(
        "{{\"schema\":1,\"program\":\"export-sdpa\",\"kind\":{},\"order\":{},\"nvars\":{},\"constraints\":{},\"path\":{}}}",
        json_string(&prob.kind().to_string()),
        order,
        prob.nvars(),
        relaxation.sdp.num_constraints(),
        json_string(out_path)
    );
    Ok(Outcome { exit_code: 0, json })
}
