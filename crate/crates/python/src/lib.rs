//! Python bindings: intervals, models, validated simulation and monitoring.

use pyo3::exceptions::{PyValueError, PyZeroDivisionError};
use pyo3::prelude::*;

use ivsim::io::{robustness_csv, trajectory_csv, trajectory_json, ExportOptions};
use ivsim::monitor::{self, Verdict};
use ivsim::simulate::{self, Limits, Mode, SimOptions};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A closed interval with outward-rounded arithmetic.
#[pyclass(frozen, from_py_object, name = "Interval", module = "pyivsim")]
#[derive(Clone, Copy)]
struct PyInterval(ivsim::Interval);

#[pymethods]
impl PyInterval {
    #[new]
    #[pyo3(signature = (lo, hi=None))]
    fn new(lo: f64, hi: Option<f64>) -> PyResult<Self> {
        ivsim::Interval::new(lo, hi.unwrap_or(lo)).map(PyInterval).map_err(value_error)
    }

    #[getter]
    fn lo(&self) -> f64 {
        self.0.lo()
    }

    #[getter]
    fn hi(&self) -> f64 {
        self.0.hi()
    }

    #[getter]
    fn width(&self) -> f64 {
        self.0.width()
    }

    fn contains(&self, x: f64) -> bool {
        self.0.contains(x)
    }

    fn __add__(&self, o: &Self) -> Self {
        PyInterval(self.0 + o.0)
    }

    fn __sub__(&self, o: &Self) -> Self {
        PyInterval(self.0 - o.0)
    }

    fn __mul__(&self, o: &Self) -> Self {
        PyInterval(self.0 * o.0)
    }

    fn __truediv__(&self, o: &Self) -> PyResult<Self> {
        self.0.checked_div(&o.0).map(PyInterval).map_err(|e| PyZeroDivisionError::new_err(e.to_string()))
    }

    fn __neg__(&self) -> Self {
        PyInterval(-self.0)
    }

    fn __eq__(&self, o: &Self) -> bool {
        self.0 == o.0
    }

    fn sin(&self) -> Self {
        PyInterval(self.0.sin())
    }

    fn cos(&self) -> Self {
        PyInterval(self.0.cos())
    }

    fn exp(&self) -> Self {
        PyInterval(self.0.exp())
    }

    fn log(&self) -> PyResult<Self> {
        self.0.ln().map(PyInterval).map_err(value_error)
    }

    fn sqrt(&self) -> PyResult<Self> {
        self.0.sqrt().map(PyInterval).map_err(value_error)
    }

    fn __repr__(&self) -> String {
        format!("Interval({:?}, {:?})", self.0.lo(), self.0.hi())
    }
}

/// A parsed hybrid automaton.
#[pyclass(frozen, name = "Model", module = "pyivsim")]
struct PyModel(ivsim::Model);

#[pymethods]
impl PyModel {
    #[getter]
    fn variables(&self) -> Vec<String> {
        self.0.variables.clone()
    }

    #[getter]
    fn locations(&self) -> Vec<String> {
        self.0.locations.iter().map(|l| l.name.clone()).collect()
    }

    #[getter]
    fn initial_state(&self) -> Vec<PyInterval> {
        self.0.initial_state.iter().map(|i| PyInterval(*i)).collect()
    }

    /// The model's `prop`, printed, if any.
    #[getter]
    fn property(&self) -> Option<String> {
        self.0.property.as_ref().map(|p| p.display(&self.0.variables).to_string())
    }

    /// A copy with variable `var` starting in `value`.
    fn with_initial(&self, var: usize, value: PyInterval) -> PyResult<PyModel> {
        if var >= self.0.variables.len() {
            return Err(value_error(format!("no variable {var}")));
        }
        Ok(PyModel(self.0.clone().with_initial(var, value.0)))
    }

    /// Validated simulation; `mode` is "ptope" or "box".
    #[pyo3(signature = (max_time=1e6, max_jumps=100_000, mode="ptope", order=10, tol_event=1e-10, tol_step=1e-10))]
    fn simulate(
        &self,
        py: Python<'_>,
        max_time: f64,
        max_jumps: usize,
        mode: &str,
        order: usize,
        tol_event: f64,
        tol_step: f64,
    ) -> PyResult<PyTrajectory> {
        let mode = match mode {
            "ptope" => Mode::Parallelotope,
            "box" => Mode::Box,
            other => return Err(value_error(format!("unknown mode `{other}`"))),
        };
        if !(tol_event > 0.0 && tol_step > 0.0 && order >= 1) {
            return Err(value_error("tolerances must be positive and order at least 1"));
        }
        let mut opts = SimOptions {
            mode,
            tol_event,
            ..SimOptions::default()
        };
        opts.integrator.order = order;
        opts.integrator.tol_step = tol_step;
        let limits = Limits { max_jumps, max_time };
        let traj = py.detach(|| simulate::simulate(&self.0, &limits, &opts));
        Ok(PyTrajectory(traj))
    }
}

/// Validated enclosure of a hybrid trajectory.
#[pyclass(frozen, name = "Trajectory", module = "pyivsim")]
struct PyTrajectory(simulate::Trajectory);

#[pymethods]
impl PyTrajectory {
    #[getter]
    fn horizon(&self) -> f64 {
        self.0.horizon
    }

    #[getter]
    fn jumps(&self) -> usize {
        self.0.jumps()
    }

    #[getter]
    fn status(&self) -> String {
        self.0.status.to_string()
    }

    #[getter]
    fn completed(&self) -> bool {
        self.0.status.is_completed()
    }

    #[getter]
    fn variables(&self) -> Vec<String> {
        self.0.variables.clone()
    }

    /// Crossing-time enclosures of the jumps.
    #[getter]
    fn event_times(&self) -> Vec<PyInterval> {
        self.0.events.iter().map(|e| PyInterval(e.tau)).collect()
    }

    /// Box holding every state at time `t`, or None past the horizon.
    fn enclosure_at(&self, t: f64) -> Option<Vec<PyInterval>> {
        self.0.enclosure_at(t).map(|b| b.iter().map(|i| PyInterval(*i)).collect())
    }

    /// Three-valued verdict of an STL property at time 0, as printed by the
    /// CLI.
    fn evaluate(&self, prop: &str) -> PyResult<String> {
        let phi = ivsim::parse_property(prop, &self.0.variables).map_err(value_error)?;
        Ok(monitor::evaluate(&self.0, &phi).to_string())
    }

    /// Robustness of an untimed property: (t_lo, t_hi, v_lo, v_hi, monotone) rows.
    fn robustness(&self, prop: &str) -> PyResult<Vec<(f64, f64, f64, f64, String)>> {
        let phi = ivsim::parse_property(prop, &self.0.variables).map_err(value_error)?;
        let r = monitor::robustness(&self.0, &phi).map_err(value_error)?;
        Ok(r.segments
            .iter()
            .map(|s| (s.time.lo(), s.time.hi(), s.value.lo(), s.value.hi(), s.monotone.name().to_string()))
            .collect())
    }

    #[pyo3(signature = (digits=17))]
    fn to_json(&self, digits: usize) -> String {
        trajectory_json(&self.0, None, &ExportOptions { digits, ..Default::default() })
    }

    #[pyo3(signature = (digits=17, nplot=4))]
    fn to_csv(&self, digits: usize, nplot: usize) -> String {
        trajectory_csv(&self.0, &ExportOptions { digits, nplot })
    }

    /// Robustness of an untimed property as CSV.
    fn robustness_csv(&self, prop: &str) -> PyResult<String> {
        let phi = ivsim::parse_property(prop, &self.0.variables).map_err(value_error)?;
        let r = monitor::robustness(&self.0, &phi).map_err(value_error)?;
        Ok(robustness_csv(&r, &ExportOptions::default()))
    }
}

/// Parses a model; `R k` samples draw from `seed`.
#[pyfunction]
#[pyo3(signature = (source, seed=0))]
fn parse_model(source: &str, seed: u64) -> PyResult<PyModel> {
    ivsim::parse_model(source, seed).map(PyModel).map_err(value_error)
}

/// Verdict names, for comparisons.
#[pyfunction]
fn verdicts() -> Vec<String> {
    [Verdict::Valid, Verdict::Unsat]
        .iter()
        .map(Verdict::to_string)
        .chain(
            [
                monitor::UnknownReason::BoundaryAtZero,
                monitor::UnknownReason::VerificationFailed,
                monitor::UnknownReason::HorizonTooShort,
            ]
            .map(|r| Verdict::Unknown(r).to_string()),
        )
        .collect()
}

#[pymodule]
fn pyivsim(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyInterval>()?;
    m.add_class::<PyModel>()?;
    m.add_class::<PyTrajectory>()?;
    m.add_function(wrap_pyfunction!(parse_model, m)?)?;
    m.add_function(wrap_pyfunction!(verdicts, m)?)?;
    Ok(())
}
