//! Python bindings for `pmlab`.

use std::path::PathBuf;

use num_rational::BigRational;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use ::pmlab::affine::{smith_normal_form as snf, verify_certificate, AffineProblem, IntegerMatrix};
use ::pmlab::cli::{self, Command};
use ::pmlab::config::ExperimentConfig;
use ::pmlab::constructions::build_slowed_system;
use ::pmlab::exact::{ExactVector, SymbolBasis};
use ::pmlab::flow::{BumpProfile, IntegratorConfig};
use ::pmlab::orbit::{classify_orbit, coverage_experiment, Classification, ClassifyTolerances};
use ::pmlab::systems::{Direction, State, SystemDescriptor};
use ::pmlab::torus::{self, TorusPoint};
use ::pmlab::Error;

fn py_err(e: Error) -> PyErr {
    match cli::exit_code_for(&e) {
        cli::EXIT_VALIDATION => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn basis(symbols: Option<Vec<(String, String)>>) -> PyResult<std::sync::Arc<SymbolBasis>> {
    let pairs = symbols.unwrap_or_default();
    SymbolBasis::from_exprs(&pairs).map_err(py_err)
}

fn matrix(rows: Vec<Vec<i64>>) -> PyResult<IntegerMatrix> {
    IntegerMatrix::from_rows(&rows).map_err(py_err)
}

fn direction(name: &str) -> PyResult<Direction> {
    match name {
        "forward" => Ok(Direction::Forward),
        "backward" => Ok(Direction::Backward),
        other => Err(PyValueError::new_err(format!("direction must be forward or backward, not {other:?}"))),
    }
}

fn point(x: Vec<f64>) -> PyResult<State> {
    Ok(State::Torus(TorusPoint::new(x).map_err(py_err)?))
}

/// Reduces each coordinate into `[0, 1)`.
#[pyfunction]
fn wrap(x: Vec<f64>) -> PyResult<Vec<f64>> {
    Ok(torus::wrap(&x).map_err(py_err)?.into_coords())
}

/// Euclidean distance on the flat torus.
#[pyfunction]
fn torus_distance(x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
    let (x, y) = (TorusPoint::new(x).map_err(py_err)?, TorusPoint::new(y).map_err(py_err)?);
    torus::torus_distance(&x, &y).map_err(py_err)
}

/// `(U, D, V)` with `U · A · V = D`.
#[pyfunction]
fn smith_normal_form(a: Vec<Vec<i64>>) -> PyResult<(Vec<Vec<i64>>, Vec<Vec<i64>>, Vec<Vec<i64>>)> {
    let d = snf(&matrix(a)?);
    let small = |m: &IntegerMatrix| -> PyResult<Vec<Vec<i64>>> {
        m.row_vecs()
            .iter()
            .map(|r| {
                r.iter()
                    .map(|v| i64::try_from(v).map_err(|_| PyValueError::new_err("entry exceeds 64 bits")))
                    .collect()
            })
            .collect()
    };
    Ok((small(&d.u)?, small(&d.d)?, small(&d.v)?))
}

/// Exact minimality verdict for `x ↦ τx + a` on the torus.
#[pyfunction]
#[pyo3(signature = (tau, a, symbols=None))]
fn decide_affine<'py>(
    py: Python<'py>,
    tau: Vec<Vec<i64>>,
    a: Vec<String>,
    symbols: Option<Vec<(String, String)>>,
) -> PyResult<Bound<'py, PyDict>> {
    let a = ExactVector::parse(basis(symbols)?, &a).map_err(py_err)?;
    let problem = AffineProblem::new(matrix(tau)?, a).map_err(py_err)?;
    let v = problem.decide();
    let out = PyDict::new(py);
    out.set_item("verdict", format!("{:?}", v.verdict))?;
    out.set_item("certificate", format!("{:?}", v.certificate))?;
    out.set_item("assumption", &v.assumption)?;
    out.set_item("verified", verify_certificate(&problem, &v))?;
    Ok(out)
}

/// Runs a CLI subcommand on a TOML config; returns `(exit_code, report_path)`.
#[pyfunction]
#[pyo3(signature = (config, command, out_dir=None))]
fn run_experiment(config: &str, command: &str, out_dir: Option<PathBuf>) -> PyResult<(i32, String)> {
    let command = Command::from_name(command)
        .ok_or_else(|| PyValueError::new_err(format!("unknown command {command:?}")))?;
    let mut cfg = ExperimentConfig::from_toml(config).map_err(py_err)?;
    if let Some(dir) = out_dir {
        cfg.output.dir = dir;
    }
    let o = cli::run(command, &cfg).map_err(py_err)?;
    Ok((o.exit_code, o.report.display().to_string()))
}

/// A discrete dynamical system on a torus.
#[pyclass(name = "System", frozen)]
struct PySystem {
    inner: SystemDescriptor,
}

#[pymethods]
impl PySystem {
    /// `x ↦ x + a`; entries are exact expressions such as `"1/3"` or `"@theta"`.
    #[staticmethod]
    #[pyo3(signature = (a, symbols=None))]
    fn translation(a: Vec<String>, symbols: Option<Vec<(String, String)>>) -> PyResult<Self> {
        let a = ExactVector::parse(basis(symbols)?, &a).map_err(py_err)?;
        Ok(Self {
            inner: SystemDescriptor::translation(a).map_err(py_err)?,
        })
    }

    #[staticmethod]
    fn automorphism(matrix_rows: Vec<Vec<i64>>) -> PyResult<Self> {
        Ok(Self {
            inner: SystemDescriptor::automorphism(matrix(matrix_rows)?).map_err(py_err)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (matrix_rows, a, symbols=None))]
    fn affine(matrix_rows: Vec<Vec<i64>>, a: Vec<String>, symbols: Option<Vec<(String, String)>>) -> PyResult<Self> {
        let a = ExactVector::parse(basis(symbols)?, &a).map_err(py_err)?;
        Ok(Self {
            inner: SystemDescriptor::affine(matrix(matrix_rows)?, a).map_err(py_err)?,
        })
    }

    /// Time-`s` map of the slowed linear flow with the default bump.
    #[staticmethod]
    #[pyo3(signature = (frequencies, centers, bump_radius, s, symbols=None))]
    fn slowed(
        frequencies: Vec<String>,
        centers: Vec<Vec<f64>>,
        bump_radius: f64,
        s: &str,
        symbols: Option<Vec<(String, String)>>,
    ) -> PyResult<Self> {
        let gamma = ExactVector::parse(basis(symbols)?, &frequencies).map_err(py_err)?;
        let centers = centers
            .into_iter()
            .map(TorusPoint::new)
            .collect::<Result<Vec<_>, _>>()
            .map_err(py_err)?;
        let s: BigRational = s
            .parse()
            .map_err(|_| PyValueError::new_err(format!("{s:?} is not a rational number")))?;
        let c = build_slowed_system(gamma, centers, bump_radius, s, BumpProfile::ExpBump, IntegratorConfig::default())
            .map_err(py_err)?;
        Ok(Self { inner: c.system })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind_name()
    }

    fn apply(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        torus_coords(self.inner.apply(&point(x)?).map_err(py_err)?)
    }

    fn apply_inverse(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        torus_coords(self.inner.apply_inverse(&point(x)?).map_err(py_err)?)
    }

    /// `(final_fraction, [(step, fraction), ...])`.
    #[pyo3(signature = (x0, steps, resolution=32, direction="forward"))]
    fn coverage(&self, x0: Vec<f64>, steps: u64, resolution: u32, direction: &str) -> PyResult<(f64, Vec<(u64, f64)>)> {
        let dir = self::direction(direction)?;
        let run = coverage_experiment(&self.inner, &point(x0)?, steps, resolution, dir).map_err(py_err)?;
        let curve = run.curve.points.iter().map(|p| (p.step, p.fraction)).collect();
        Ok((run.grid.fraction(), curve))
    }

    /// Classification as a dict with a `kind` key.
    #[pyo3(signature = (x0, budget, resolution=32))]
    fn classify<'py>(&self, py: Python<'py>, x0: Vec<f64>, budget: u64, resolution: u32) -> PyResult<Bound<'py, PyDict>> {
        let r = classify_orbit(&self.inner, &point(x0)?, budget, resolution, &ClassifyTolerances::default())
            .map_err(py_err)?;
        let out = PyDict::new(py);
        match &r.classification {
            Classification::EmpiricallyDense => out.set_item("kind", "empirically_dense")?,
            Classification::Periodic { period } => {
                out.set_item("kind", "periodic")?;
                out.set_item("period", period)?;
            }
            Classification::AsymptoticToFixedPoint { target } => {
                out.set_item("kind", "asymptotic_to_fixed_point")?;
                out.set_item("target", target.clone())?;
            }
            Classification::NonDenseOther => out.set_item("kind", "non_dense_other")?,
            Classification::Inconclusive => out.set_item("kind", "inconclusive")?,
        }
        out.set_item("forward_fraction", r.forward.final_fraction)?;
        out.set_item("backward_fraction", r.backward.final_fraction)?;
        Ok(out)
    }

    fn __repr__(&self) -> String {
        format!("System(kind={:?}, dim={})", self.inner.kind_name(), self.inner.dim())
    }
}

fn torus_coords(s: State) -> PyResult<Vec<f64>> {
    s.torus()
        .map(|p| p.coords().to_vec())
        .ok_or_else(|| PyValueError::new_err("not a torus state"))
}

#[pymodule]
fn pmlab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(wrap, m)?)?;
    m.add_function(wrap_pyfunction!(torus_distance, m)?)?;
    m.add_function(wrap_pyfunction!(smith_normal_form, m)?)?;
    m.add_function(wrap_pyfunction!(decide_affine, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_class::<PySystem>()?;
    Ok(())
}
