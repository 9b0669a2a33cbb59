//! Python bindings: traces, formulas, robustness, the oracle and falsification.

use std::collections::BTreeMap;

use avstl::falsify::{
    falsification_loop, run_experiment as run, ExperimentConfig, InputChannel, InputSpec, ModelSpec,
    OptimizerConfig, OptimizerKind,
};
use avstl::formula::{refine_always, refine_eventually};
use avstl::oracle::{oracle_evaluate as oracle_eval, OracleConfig};
use avstl::{Error, ExtendedReal};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(pyavstl, AvstlError, PyException);
create_exception!(pyavstl, ParseError, AvstlError);
create_exception!(pyavstl, UnsupportedError, AvstlError);

fn err(e: Error) -> PyErr {
    match e {
        Error::Parse { .. } => ParseError::new_err(e.to_string()),
        Error::Unsupported(_) => UnsupportedError::new_err(e.to_string()),
        _ => AvstlError::new_err(e.to_string()),
    }
}

fn ext(x: ExtendedReal) -> f64 {
    x.value()
}

/// A piecewise-constant multi-channel trace.
#[pyclass(frozen, skip_from_py_object, module = "pyavstl")]
#[derive(Clone)]
struct Trace(avstl::Trace);

#[pymethods]
impl Trace {
    /// `times` are the sample instants, `columns` maps each variable to its values.
    #[new]
    fn new(times: Vec<f64>, columns: BTreeMap<String, Vec<f64>>) -> PyResult<Self> {
        let (names, cols): (Vec<String>, Vec<Vec<f64>>) = columns.into_iter().unzip();
        avstl::Trace::from_samples(&times, &names, &cols).map(Trace).map_err(err)
    }

    #[staticmethod]
    fn from_csv(path: &str) -> PyResult<Self> {
        avstl::Trace::from_csv_path(path).map(Trace).map_err(err)
    }

    #[staticmethod]
    fn from_csv_text(text: &str) -> PyResult<Self> {
        avstl::Trace::from_csv_reader(text.as_bytes()).map(Trace).map_err(err)
    }

    fn to_csv(&self) -> PyResult<String> {
        let mut buf = Vec::new();
        self.0.to_csv_writer(&mut buf).map_err(err)?;
        Ok(String::from_utf8(buf).expect("csv is utf-8"))
    }

    #[getter]
    fn variables(&self) -> Vec<String> {
        self.0.variables().to_vec()
    }

    #[getter]
    fn horizon(&self) -> f64 {
        self.0.horizon()
    }

    /// Value of `variable` at time `t`.
    fn value(&self, variable: &str, t: f64) -> PyResult<f64> {
        let ch = self
            .0
            .channel(variable)
            .ok_or_else(|| err(Error::UnknownVariable(variable.into())))?;
        ch.value_at(t).map(ext).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.0.total_segments()
    }

    fn __repr__(&self) -> String {
        format!("Trace(variables={:?}, horizon={})", self.0.variables(), self.0.horizon())
    }
}

/// A parsed formula.
#[pyclass(frozen, eq, skip_from_py_object, module = "pyavstl")]
#[derive(Clone, PartialEq)]
struct Formula(avstl::Formula);

#[pymethods]
impl Formula {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        avstl::parse(text).map(Formula).map_err(err)
    }

    #[getter]
    fn variables(&self) -> Vec<String> {
        self.0.variables().into_iter().collect()
    }

    /// Time span the formula looks ahead of its evaluation instant.
    #[getter]
    fn horizon(&self) -> f64 {
        self.0.temporal_horizon()
    }

    #[getter]
    fn is_averaging_free(&self) -> bool {
        self.0.is_averaging_free()
    }

    /// Replaces the eventually at `path` by its averaged refinement.
    fn refine_eventually(&self, path: Vec<usize>) -> PyResult<Formula> {
        refine_eventually(&self.0, &path).map(Formula).map_err(err)
    }

    /// Replaces the always at `path` by its averaged refinement with tail `delta`.
    fn refine_always(&self, path: Vec<usize>, delta: f64) -> PyResult<Formula> {
        refine_always(&self.0, &path, delta).map(Formula).map_err(err)
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Formula({:?})", self.0.to_string())
    }
}

/// Positive and negative robustness as piecewise-linear functions of time.
#[pyclass(frozen, module = "pyavstl")]
struct RobustnessSignal(avstl::RobustnessSignal);

#[pymethods]
impl RobustnessSignal {
    /// `(pos, neg)` at time `t`.
    fn at(&self, t: f64) -> PyResult<(f64, f64)> {
        let r = self.0.at(t).map_err(err)?;
        Ok((ext(r.pos), ext(r.neg)))
    }

    /// `(start, value, slope)` pieces of the positive channel.
    #[getter]
    fn pos(&self) -> Vec<(f64, f64, f64)> {
        self.0.pos.segments().iter().map(|s| (s.start, s.value, s.slope)).collect()
    }

    #[getter]
    fn neg(&self) -> Vec<(f64, f64, f64)> {
        self.0.neg.segments().iter().map(|s| (s.start, s.value, s.slope)).collect()
    }

    fn to_csv(&self) -> PyResult<String> {
        let mut buf = Vec::new();
        self.0.write_csv(&mut buf).map_err(err)?;
        Ok(String::from_utf8(buf).expect("csv is utf-8"))
    }
}

fn formula(f: &Bound<'_, PyAny>) -> PyResult<avstl::Formula> {
    if let Ok(f) = f.cast::<Formula>() {
        return Ok(f.get().0.clone());
    }
    let text: String = f.extract()?;
    avstl::parse(&text).map_err(err)
}

/// `(pos, neg)` of `formula` (text or `Formula`) over `trace` at time 0.
#[pyfunction]
fn evaluate(py: Python<'_>, trace: &Trace, formula: &Bound<'_, PyAny>) -> PyResult<(f64, f64)> {
    let f = self::formula(formula)?;
    let r = py.detach(|| avstl::evaluate(&trace.0, &f)).map_err(err)?;
    Ok((ext(r.pos), ext(r.neg)))
}

#[pyfunction]
fn robust_signal(py: Python<'_>, trace: &Trace, formula: &Bound<'_, PyAny>) -> PyResult<RobustnessSignal> {
    let f = self::formula(formula)?;
    py.detach(|| avstl::robust_signal(&trace.0, &f)).map(RobustnessSignal).map_err(err)
}

/// Reference evaluation by direct numerical integration; slow, for cross-checks.
#[pyfunction]
#[pyo3(signature = (trace, formula, integration_refinements = 20, abs_tolerance = 1e-7))]
fn oracle_evaluate(
    py: Python<'_>,
    trace: &Trace,
    formula: &Bound<'_, PyAny>,
    integration_refinements: usize,
    abs_tolerance: f64,
) -> PyResult<(f64, f64)> {
    let f = self::formula(formula)?;
    let cfg = OracleConfig { integration_refinements, abs_tolerance };
    let r = py.detach(|| oracle_eval(&trace.0, &f, &cfg)).map_err(err)?;
    Ok((ext(r.pos), ext(r.neg)))
}

/// Simulates a built-in model on an input trace.
#[pyfunction]
#[pyo3(signature = (model, input, horizon, params = None))]
fn simulate(model: &str, input: &Trace, horizon: f64, params: Option<&str>) -> PyResult<Trace> {
    let params = params.map(serde_json::from_str).transpose().map_err(|e| PyValueError::new_err(e.to_string()))?;
    let m = ModelSpec { name: model.into(), params }.build().map_err(err)?;
    m.simulate(&input.0, horizon).map(Trace).map_err(err)
}

/// Searches for an input of `model` driving `formula` to robustness <= 0.
///
/// `inputs` lists `(name, lo, hi, control_points)`. Returns a dict with
/// `success`, `iterations`, `best_robustness`, `history` and `input`.
#[pyfunction]
#[pyo3(signature = (model, formula, inputs, horizon, max_iterations = 1000, seed = 0, optimizer = "ANNEAL"))]
#[allow(clippy::too_many_arguments)]
fn falsify<'py>(
    py: Python<'py>,
    model: &str,
    formula: &Bound<'py, PyAny>,
    inputs: Vec<(String, f64, f64, usize)>,
    horizon: f64,
    max_iterations: usize,
    seed: u64,
    optimizer: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let f = self::formula(formula)?;
    let kind = match optimizer.to_ascii_uppercase().as_str() {
        "ANNEAL" => OptimizerKind::Anneal,
        "RANDOM" => OptimizerKind::Random,
        other => return Err(PyValueError::new_err(format!("unknown optimizer `{other}`"))),
    };
    let input = InputSpec {
        channels: inputs
            .into_iter()
            .map(|(name, lo, hi, control_points)| InputChannel { name, lo, hi, control_points })
            .collect(),
        horizon,
    };
    let opt = OptimizerConfig { kind, max_iterations, seed, ..Default::default() };
    let m = ModelSpec::new(model).build().map_err(err)?;
    let r = py.detach(|| falsification_loop(m.as_ref(), &f, &input, &opt)).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("success", r.success)?;
    d.set_item("iterations", r.iterations_used)?;
    d.set_item("best_robustness", r.best().map(ext))?;
    d.set_item("history", r.robustness_history.iter().map(|x| x.value()).collect::<Vec<_>>())?;
    d.set_item("input", r.falsifying_input.map(Trace))?;
    d.set_item("wall_time", r.wall_time)?;
    Ok(d)
}

/// Runs a plain-versus-refined experiment from its JSON config; returns the report as JSON.
#[pyfunction]
fn run_experiment(py: Python<'_>, config_json: &str) -> PyResult<String> {
    let cfg = ExperimentConfig::from_json(config_json).map_err(err)?;
    py.detach(|| run(&cfg)?.to_json()).map_err(err)
}

#[pymodule]
fn pyavstl(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Trace>()?;
    m.add_class::<Formula>()?;
    m.add_class::<RobustnessSignal>()?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(robust_signal, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(falsify, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add("AvstlError", m.py().get_type::<AvstlError>())?;
    m.add("ParseError", m.py().get_type::<ParseError>())?;
    m.add("UnsupportedError", m.py().get_type::<UnsupportedError>())?;
    Ok(())
}
