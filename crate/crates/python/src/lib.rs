//! Python bindings: polynomials in noncommuting variables and the
//! eigenvalue/trace/psd-rank bounding programs.
//!
//! The module mirrors the library surface at the level a notebook wants:
//! build polynomials from the text grammar, combine them with operators,
//! and call the solver entry points, which return plain dictionaries.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use ncsohs::freealg::{
    cyclically_equivalent, evaluate, parse_poly, poly_to_string, NcPolynomial,
};
use ncsohs::gram::build_gram_system;
use ncsohs::hierarchy::{
    chsh_problem, eig_min_constrained, min_order, psd_rank_lower_bound, sample_upper_bound,
    trace_min_constrained, BoundReport, HierarchyOptions, NcProblem,
};
use ncsohs::Mode;
use num_rational::BigRational;
use num_traits::FromPrimitive;

fn parse_mode(kind: &str) -> PyResult<Mode> {
    match kind {
        "eigenvalue" | "eig" => Ok(Mode::Eigenvalue),
        "trace" => Ok(Mode::Trace),
        other => Err(PyValueError::new_err(format!(
            "unknown kind '{other}' (expected 'eigenvalue' or 'trace')"
        ))),
    }
}

/// A polynomial in noncommuting variables with exact rational
/// coefficients.
#[pyclass(name = "Polynomial", from_py_object)]
#[derive(Clone)]
struct PyPolynomial {
    inner: NcPolynomial,
}

#[pymethods]
impl PyPolynomial {
    /// Parses the text grammar, e.g. `1+2*x1-3/4*x1*x2^2`; with two
    /// variables `x` and `y` alias `x1` and `x2`.
    #[new]
    fn new(text: &str, nvars: usize) -> PyResult<Self> {
        let inner = parse_poly(text, nvars).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(PyPolynomial { inner })
    }

    #[getter]
    fn nvars(&self) -> usize {
        self.inner.nvars()
    }

    /// Degree of the longest word, or None for the zero polynomial.
    fn degree(&self) -> Option<usize> {
        self.inner.degree()
    }

    fn num_terms(&self) -> usize {
        self.inner.num_terms()
    }

    /// The involution: every word reversed.
    fn star(&self) -> Self {
        PyPolynomial {
            inner: self.inner.star(),
        }
    }

    fn is_symmetric(&self) -> bool {
        self.inner.is_symmetric()
    }

    fn symmetrize(&self) -> Self {
        PyPolynomial {
            inner: self.inner.symmetrize(),
        }
    }

    fn cyclically_equivalent(&self, other: &PyPolynomial) -> PyResult<bool> {
        if self.inner.nvars() != other.inner.nvars() {
            return Err(PyValueError::new_err("variable counts differ"));
        }
        Ok(cyclically_equivalent(&self.inner, &other.inner))
    }

    /// Evaluates at a tuple of symmetric matrices (nested lists), one
    /// per variable.
    fn evaluate(&self, point: Vec<Vec<Vec<f64>>>) -> PyResult<Vec<Vec<f64>>> {
        let mats: Vec<faer::Mat<f64>> = point
            .iter()
            .map(|rows| {
                let n = rows.len();
                faer::Mat::from_fn(n, n, |i, j| rows[i].get(j).copied().unwrap_or(f64::NAN))
            })
            .collect();
        let out = evaluate(&self.inner, &mats).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok((0..out.nrows())
            .map(|i| (0..out.ncols()).map(|j| out[(i, j)]).collect())
            .collect())
    }

    fn __add__(&self, other: &PyPolynomial) -> PyResult<Self> {
        self.check_arity(other)?;
        Ok(PyPolynomial {
            inner: &self.inner + &other.inner,
        })
    }

    fn __sub__(&self, other: &PyPolynomial) -> PyResult<Self> {
        self.check_arity(other)?;
        Ok(PyPolynomial {
            inner: &self.inner - &other.inner,
        })
    }

    fn __mul__(&self, other: &PyPolynomial) -> PyResult<Self> {
        self.check_arity(other)?;
        Ok(PyPolynomial {
            inner: &self.inner * &other.inner,
        })
    }

    fn __neg__(&self) -> Self {
        PyPolynomial {
            inner: -&self.inner,
        }
    }

    fn __eq__(&self, other: &PyPolynomial) -> bool {
        self.inner == other.inner
    }

    fn __str__(&self) -> String {
        poly_to_string(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!("Polynomial('{}', nvars={})", poly_to_string(&self.inner), self.inner.nvars())
    }
}

impl PyPolynomial {
    fn check_arity(&self, other: &PyPolynomial) -> PyResult<()> {
        if self.inner.nvars() != other.inner.nvars() {
            return Err(PyValueError::new_err("variable counts differ"));
        }
        Ok(())
    }
}

fn report_dict<'py>(py: Python<'py>, report: &BoundReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("status", report.status.to_string())?;
    d.set_item("kind", report.kind.to_string())?;
    d.set_item("order", report.order)?;
    d.set_item("primal_bound", report.primal_bound)?;
    d.set_item("dual_bound", report.dual_bound)?;
    d.set_item("gap", report.gap)?;
    d.set_item("iterations", report.iterations)?;
    d.set_item("primal_feasibility", report.primal_feas)?;
    d.set_item("dual_feasibility", report.dual_feas)?;
    match &report.certificate {
        Some(cert) => {
            let summands: Vec<String> = cert.summands.iter().map(poly_to_string).collect();
            d.set_item("certificate_summands", summands)?;
            let weights: Vec<(usize, Vec<String>)> = cert
                .weights
                .iter()
                .map(|(idx, ps)| (*idx, ps.iter().map(poly_to_string).collect()))
                .collect();
            d.set_item("certificate_weights", weights)?;
            d.set_item("certificate_residual_linf", cert.residual_linf())?;
        }
        None => {
            d.set_item("certificate_summands", py.None())?;
        }
    }
    Ok(d)
}

fn build_problem(
    objective: &PyPolynomial,
    inequalities: Vec<PyPolynomial>,
    equalities: Vec<PyPolynomial>,
    kind: Mode,
    order: Option<usize>,
) -> PyResult<NcProblem> {
    let ineqs: Vec<NcPolynomial> = inequalities.into_iter().map(|p| p.inner).collect();
    let eqs: Vec<NcPolynomial> = equalities.into_iter().map(|p| p.inner).collect();
    let order = order.unwrap_or_else(|| min_order(&objective.inner, &ineqs, &eqs));
    NcProblem::new(objective.inner.clone(), ineqs, eqs, kind, order)
        .map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Eigenvalue minimization bound over the set cut out by the
/// constraints.
#[pyfunction]
#[pyo3(signature = (objective, order=None, inequalities=vec![], equalities=vec![]))]
fn eig_min<'py>(
    py: Python<'py>,
    objective: &PyPolynomial,
    order: Option<usize>,
    inequalities: Vec<PyPolynomial>,
    equalities: Vec<PyPolynomial>,
) -> PyResult<Bound<'py, PyDict>> {
    let prob = build_problem(objective, inequalities, equalities, Mode::Eigenvalue, order)?;
    let report = eig_min_constrained(&prob, &HierarchyOptions::default())
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    report_dict(py, &report)
}

/// Trace minimization bound over the set cut out by the constraints.
#[pyfunction]
#[pyo3(signature = (objective, order=None, inequalities=vec![], equalities=vec![]))]
fn trace_min<'py>(
    py: Python<'py>,
    objective: &PyPolynomial,
    order: Option<usize>,
    inequalities: Vec<PyPolynomial>,
    equalities: Vec<PyPolynomial>,
) -> PyResult<Bound<'py, PyDict>> {
    let prob = build_problem(objective, inequalities, equalities, Mode::Trace, order)?;
    let report = trace_min_constrained(&prob, &HierarchyOptions::default())
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    report_dict(py, &report)
}

/// Membership check in the squares cone (or its cyclic closure for
/// `kind='trace'`) at degree `2 * order`.
#[pyfunction]
#[pyo3(signature = (poly, order=None, kind="eigenvalue"))]
fn sohs_check<'py>(
    py: Python<'py>,
    poly: &PyPolynomial,
    order: Option<usize>,
    kind: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let mode = parse_mode(kind)?;
    let order = order.unwrap_or_else(|| poly.inner.degree().unwrap_or(0).div_ceil(2));
    let system = build_gram_system(&poly.inner, order, mode)
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    let sdp = ncsohs::cli::gram_feasibility_sdp(&system);
    let opts = HierarchyOptions::default();
    let sol = ncsohs::sdp::solve(&sdp, &opts.sdp);
    let feasible = sol.status == ncsohs::sdp::SdpStatus::Optimal;
    let d = PyDict::new(py);
    d.set_item("feasible", feasible)?;
    d.set_item("status", sol.status.to_string())?;
    d.set_item("order", order)?;
    if feasible {
        let mut cert = ncsohs::gram::extract_sohs(&sol.x[0], &system.basis, opts.clip_tol)
            .map_err(|e| PyValueError::new_err(e.to_string()))?;
        cert.residual = &system.target.to_float() - &cert.expand_squares();
        let summands: Vec<String> = cert.summands.iter().map(poly_to_string).collect();
        d.set_item("summands", summands)?;
        d.set_item("residual_linf", cert.residual_linf())?;
    }
    Ok(d)
}

/// Lower bound on the psd rank of an entrywise nonnegative matrix.
#[pyfunction]
#[pyo3(signature = (matrix, order=2))]
fn psd_rank<'py>(
    py: Python<'py>,
    matrix: Vec<Vec<f64>>,
    order: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let exact: Vec<Vec<BigRational>> = matrix
        .iter()
        .map(|row| {
            row.iter()
                .map(|v| {
                    BigRational::from_f64(*v)
                        .ok_or_else(|| PyValueError::new_err(format!("bad entry {v}")))
                })
                .collect::<PyResult<Vec<_>>>()
        })
        .collect::<PyResult<Vec<_>>>()?;
    let report = psd_rank_lower_bound(&exact, order, &HierarchyOptions::default())
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    let d = report_dict(py, &report)?;
    d.set_item("bound", report.dual_bound)?;
    Ok(d)
}

/// The CHSH maximal-violation program; the reported violation is the
/// negated eigenvalue bound.
#[pyfunction]
#[pyo3(signature = (order=2))]
fn chsh_bound<'py>(py: Python<'py>, order: usize) -> PyResult<Bound<'py, PyDict>> {
    let prob = chsh_problem(order).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let report = eig_min_constrained(&prob, &HierarchyOptions::default())
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    let d = report_dict(py, &report)?;
    d.set_item("max_violation", -report.primal_bound)?;
    Ok(d)
}

/// Randomized upper-bound oracle by sampling the semialgebraic set.
#[pyfunction]
#[pyo3(signature = (objective, kind="eigenvalue", inequalities=vec![], equalities=vec![], sizes=vec![1, 2, 3], trials=64, seed=0))]
#[allow(clippy::too_many_arguments)]
fn sample_bound<'py>(
    py: Python<'py>,
    objective: &PyPolynomial,
    kind: &str,
    inequalities: Vec<PyPolynomial>,
    equalities: Vec<PyPolynomial>,
    sizes: Vec<usize>,
    trials: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let mode = parse_mode(kind)?;
    let prob = build_problem(objective, inequalities, equalities, mode, None)?;
    let report = sample_upper_bound(&prob, &sizes, trials, seed);
    let d = PyDict::new(py);
    d.set_item("best", report.best)?;
    d.set_item("feasible", report.feasible)?;
    d.set_item("trials", report.trials)?;
    Ok(d)
}

#[pymodule]
fn ncsohs_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyPolynomial>()?;
    m.add_function(wrap_pyfunction!(eig_min, m)?)?;
    m.add_function(wrap_pyfunction!(trace_min, m)?)?;
    m.add_function(wrap_pyfunction!(sohs_check, m)?)?;
    m.add_function(wrap_pyfunction!(psd_rank, m)?)?;
    m.add_function(wrap_pyfunction!(chsh_bound, m)?)?;
    m.add_function(wrap_pyfunction!(sample_bound, m)?)?;
    Ok(())
}
