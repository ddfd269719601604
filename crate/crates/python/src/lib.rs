//! Python bindings: model parameters, radial grids and fields, the
//! integrator, the linearization sweep and the inequality ratios.

use pyo3::exceptions::{PyOverflowError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use radwave_core::inequality::{self, InequalityError, InequalityVerdict};
use radwave_core::linearization::{self, BaseData, GridPolicy, LinearizationError};
use radwave_core::model::{self, ModelError, Nonlinearity};
use radwave_core::solver::{self, SolverError};
use radwave_core::{grid, EvolveOptions, FieldState};

fn model_err(e: ModelError) -> PyErr {
    match e {
        ModelError::Overflow { .. } => PyOverflowError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn solver_err(e: SolverError) -> PyErr {
    match e {
        SolverError::Overflow { .. } => PyOverflowError::new_err(e.to_string()),
        SolverError::Model(m) => model_err(m),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn grid_err(e: grid::GridError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn inequality_err(e: InequalityError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn linearization_err(e: LinearizationError) -> PyErr {
    match e {
        LinearizationError::Solver(s) => solver_err(s),
        other => PyValueError::new_err(other.to_string()),
    }
}

/// Model parameters `(N, b, m, f)`.
#[pyclass(name = "ModelSpec", module = "radwave", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyModelSpec(radwave_core::ModelSpec);

#[pymethods]
impl PyModelSpec {
    #[staticmethod]
    fn exp2d(b: f64) -> PyResult<Self> {
        radwave_core::ModelSpec::exp2d(b).map(Self).map_err(model_err)
    }

    #[staticmethod]
    fn power3d(b: f64, p: f64) -> PyResult<Self> {
        radwave_core::ModelSpec::power3d(b, p).map(Self).map_err(model_err)
    }

    #[staticmethod]
    fn linear(dim: usize, m: f64) -> PyResult<Self> {
        radwave_core::ModelSpec::linear(dim, m).map(Self).map_err(model_err)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn b(&self) -> f64 {
        self.0.b()
    }

    #[getter]
    fn mass(&self) -> f64 {
        self.0.mass()
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.0.kind().name()
    }

    #[getter]
    fn p(&self) -> Option<f64> {
        match self.0.kind() {
            Nonlinearity::Power3D { p } => Some(p),
            _ => None,
        }
    }

    fn f(&self, u: f64) -> PyResult<f64> {
        self.0.f_eval(u).map_err(model_err)
    }

    fn primitive(&self, u: f64) -> PyResult<f64> {
        self.0.big_f_eval(u).map_err(model_err)
    }

    /// Violated well-posedness hypotheses, empty when all hold.
    fn hypothesis_violations(&self) -> Vec<String> {
        model::validate_hypotheses(&self.0).iter().map(ToString::to_string).collect()
    }

    /// `(s_c, p_mass_critical, p_energy_critical)` of the power nonlinearity.
    fn critical_exponent(&self) -> PyResult<(f64, f64, f64)> {
        let r = model::critical_exponent(&self.0).map_err(model_err)?;
        Ok((r.s_c, r.p_mass_critical, r.p_energy_critical))
    }

    fn __repr__(&self) -> String {
        format!(
            "ModelSpec(dim={}, b={}, m={}, kind='{}')",
            self.0.dim(),
            self.0.b(),
            self.0.mass(),
            self.0.kind().name()
        )
    }
}

#[pyclass(name = "RadialGrid", module = "radwave", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyRadialGrid(radwave_core::RadialGrid);

#[pymethods]
impl PyRadialGrid {
    #[new]
    fn new(dim: usize, r_max: f64, num_cells: usize) -> PyResult<Self> {
        radwave_core::RadialGrid::new(dim, r_max, num_cells).map(Self).map_err(grid_err)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn r_max(&self) -> f64 {
        self.0.r_max()
    }

    #[getter]
    fn num_cells(&self) -> usize {
        self.0.num_cells()
    }

    #[getter]
    fn spacing(&self) -> f64 {
        self.0.spacing()
    }

    fn nodes(&self) -> Vec<f64> {
        self.0.nodes().collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "RadialGrid(dim={}, r_max={}, num_cells={})",
            self.0.dim(),
            self.0.r_max(),
            self.0.num_cells()
        )
    }
}

/// Nodal samples of a radial function.
#[pyclass(name = "RadialField", module = "radwave", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyRadialField(radwave_core::RadialField);

#[pymethods]
impl PyRadialField {
    #[new]
    fn new(grid: &PyRadialGrid, values: Vec<f64>) -> PyResult<Self> {
        radwave_core::RadialField::new(grid.0, values).map(Self).map_err(grid_err)
    }

    #[getter]
    fn grid(&self) -> PyRadialGrid {
        PyRadialGrid(*self.0.grid())
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.0.values().to_vec()
    }

    fn l2_norm(&self) -> f64 {
        grid::l2_norm(&self.0)
    }

    fn grad_l2_norm(&self) -> f64 {
        grid::grad_l2_norm(&self.0)
    }

    fn h1_norm(&self) -> f64 {
        grid::h1_norm(&self.0)
    }

    fn lp_norm(&self, p: f64) -> f64 {
        grid::lp_norm(&self.0, p)
    }

    /// `int |x|^w |u|^power dx`.
    fn weighted_power_integral(&self, weight_exponent: f64, power: f64) -> PyResult<f64> {
        grid::weighted_integral(&self.0, weight_exponent, |u| u.abs().powf(power)).map_err(grid_err)
    }

    fn support_radius(&self, threshold: f64) -> f64 {
        self.0.support_radius(threshold)
    }

    fn __len__(&self) -> usize {
        self.0.values().len()
    }
}

#[pyfunction]
#[pyo3(signature = (grid, amplitude, radius, velocity_amplitude = 0.0))]
fn initial_bump(
    grid: &PyRadialGrid,
    amplitude: f64,
    radius: f64,
    velocity_amplitude: f64,
) -> PyResult<(PyRadialField, PyRadialField)> {
    let (u, v) =
        solver::initial_bump_with_velocity(grid.0, amplitude, velocity_amplitude, radius).map_err(solver_err)?;
    Ok((PyRadialField(u), PyRadialField(v)))
}

#[pyfunction]
fn concentrate(u: &PyRadialField, v: &PyRadialField, n: u32) -> PyResult<(PyRadialField, PyRadialField)> {
    let (a, b) = solver::concentrate(&(u.0.clone(), v.0.clone()), n).map_err(solver_err)?;
    Ok((PyRadialField(a), PyRadialField(b)))
}

fn state(u: &PyRadialField, v: &PyRadialField, t: f64) -> PyResult<FieldState> {
    FieldState::new(u.0.clone(), v.0.clone(), t).map_err(solver_err)
}

fn report_dict<'py>(py: Python<'py>, r: &radwave_core::EnergyReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("t", r.t)?;
    d.set_item("total", r.total)?;
    d.set_item("kinetic_e0", r.kinetic_e0)?;
    d.set_item("potential", r.potential)?;
    d.set_item("support_radius", r.support_radius)?;
    Ok(d)
}

/// Energy report of `(u, u_t)`.
#[pyfunction]
fn energy<'py>(py: Python<'py>, spec: &PyModelSpec, u: &PyRadialField, v: &PyRadialField) -> PyResult<Bound<'py, PyDict>> {
    let r = solver::energy(&state(u, v, 0.0)?, &spec.0).map_err(solver_err)?;
    report_dict(py, &r)
}

/// `E_0` of the difference of two states.
#[pyfunction]
fn diff_energy(u1: &PyRadialField, v1: &PyRadialField, u2: &PyRadialField, v2: &PyRadialField, mass: f64) -> PyResult<f64> {
    solver::diff_energy(&state(u1, v1, 0.0)?, &state(u2, v2, 0.0)?, mass).map_err(solver_err)
}

/// Result of [`evolve`].
#[pyclass(name = "Trajectory", module = "radwave", frozen, skip_from_py_object)]
struct PyTrajectory(radwave_core::Trajectory);

#[pymethods]
impl PyTrajectory {
    #[getter]
    fn dt(&self) -> f64 {
        self.0.dt
    }

    #[getter]
    fn steps(&self) -> usize {
        self.0.steps
    }

    #[getter]
    fn max_relative_drift(&self) -> f64 {
        self.0.max_relative_drift
    }

    #[getter]
    fn l2_spacetime(&self) -> f64 {
        self.0.l2_spacetime()
    }

    fn times(&self) -> Vec<f64> {
        self.0.times()
    }

    fn reports<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyDict>>> {
        self.0.reports.iter().map(|r| report_dict(py, r)).collect()
    }

    /// `(u, u_t)` at the final time.
    fn final_state(&self) -> (PyRadialField, PyRadialField) {
        let s = &self.0.final_state;
        (PyRadialField(s.u.clone()), PyRadialField(s.v.clone()))
    }

    fn __len__(&self) -> usize {
        self.0.reports.len()
    }
}

#[pyfunction]
#[pyo3(signature = (spec, u, v, t_final, cfl = solver::DEFAULT_CFL, snapshot_stride = solver::DEFAULT_SNAPSHOT_STRIDE))]
fn evolve(
    py: Python<'_>,
    spec: &PyModelSpec,
    u: &PyRadialField,
    v: &PyRadialField,
    t_final: f64,
    cfl: f64,
    snapshot_stride: usize,
) -> PyResult<PyTrajectory> {
    let initial = state(u, v, 0.0)?;
    let options = EvolveOptions::new(t_final).with_cfl(cfl).with_stride(snapshot_stride);
    let spec = spec.0;
    py.detach(|| solver::evolve(&initial, &spec, &options))
        .map(PyTrajectory)
        .map_err(solver_err)
}

/// Nonlinear-versus-free sweep over concentration indices. Returns the rows
/// as dicts and the trend verdict label.
#[pyfunction]
#[pyo3(signature = (spec, n_list, t_final, amplitude = 1.0, radius = 1.0, check_convergence = false))]
fn linearization_sweep<'py>(
    py: Python<'py>,
    spec: &PyModelSpec,
    n_list: Vec<u32>,
    t_final: f64,
    amplitude: f64,
    radius: f64,
    check_convergence: bool,
) -> PyResult<(Vec<Bound<'py, PyDict>>, String)> {
    let spec = spec.0;
    let data = BaseData::bump(amplitude, radius);
    let out = py
        .detach(|| linearization::sweep(&spec, &data, &n_list, t_final, &GridPolicy::default(), check_convergence))
        .map_err(linearization_err)?;
    if let Some(e) = out.error {
        return Err(linearization_err(e));
    }
    let rows = out
        .rows
        .iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("n", r.n)?;
            d.set_item("sup_diff_e0", r.sup_diff_e0)?;
            d.set_item("u_l2_spacetime", r.u_l2_spacetime)?;
            d.set_item("u_l4b_spacetime", r.u_l4b_spacetime)?;
            d.set_item("strichartz_qr", r.strichartz_qr)?;
            d.set_item("data_h1", r.data_h1)?;
            d.set_item("data_l2", r.data_l2)?;
            d.set_item("grid_cells", r.grid_cells)?;
            Ok(d)
        })
        .collect::<PyResult<Vec<_>>>()?;
    let label = out.trend.map_or("aborted", |t| t.verdict.label());
    Ok((rows, label.to_string()))
}

fn verdict_dict<'py>(py: Python<'py>, v: &InequalityVerdict) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("name", &v.name)?;
    d.set_item("lhs", v.lhs)?;
    d.set_item("rhs_factor", v.rhs_factor)?;
    d.set_item("ratio", v.ratio)?;
    d.set_item("params", v.params.clone())?;
    d.set_item("witness", &v.witness)?;
    d.set_item("in_regime", v.in_regime)?;
    d.set_item("grid_cells", v.grid_cells)?;
    Ok(d)
}

#[pyfunction]
fn strauss_ratio<'py>(py: Python<'py>, field: &PyRadialField) -> PyResult<Bound<'py, PyDict>> {
    verdict_dict(py, &inequality::strauss_ratio(&field.0).map_err(inequality_err)?)
}

/// `(A, B)` of the weighted Gagliardo-Nirenberg inequality.
#[pyfunction]
fn gn_exponents(dim: usize, theta: f64, lam: f64) -> (f64, f64) {
    let e = inequality::gn_exponents(dim, theta, lam);
    (e.a, e.b)
}

#[pyfunction]
fn gn_ratio<'py>(py: Python<'py>, field: &PyRadialField, theta: f64, lam: f64) -> PyResult<Bound<'py, PyDict>> {
    verdict_dict(py, &inequality::gn_ratio(&field.0, theta, lam).map_err(inequality_err)?)
}

#[pyfunction]
fn mt_subcritical_ratio<'py>(py: Python<'py>, field: &PyRadialField, alpha: f64, beta: f64) -> PyResult<Bound<'py, PyDict>> {
    verdict_dict(py, &inequality::mt_subcritical_ratio(&field.0, alpha, beta).map_err(inequality_err)?)
}

/// `[(n, value)]` along unit-H1 Moser fields at exponent `2π(2-β)+ε`.
#[pyfunction]
fn mt_sharpness_sweep(grid: &PyRadialGrid, beta: f64, epsilon: f64, n_list: Vec<u32>) -> PyResult<Vec<(u32, f64)>> {
    let rows = inequality::mt_sharpness_sweep(grid.0, beta, epsilon, &n_list).map_err(inequality_err)?;
    Ok(rows.iter().map(|r| (r.n, r.value)).collect())
}

#[pyfunction]
fn k_alpha(alpha: f64) -> PyResult<f64> {
    inequality::k_alpha(alpha).map_err(inequality_err)
}

#[pyfunction]
fn admissible_pair(q: f64, r: f64) -> bool {
    model::admissible_pair_check(q, r)
}

#[pymodule]
fn radwave(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModelSpec>()?;
    m.add_class::<PyRadialGrid>()?;
    m.add_class::<PyRadialField>()?;
    m.add_class::<PyTrajectory>()?;
    m.add_function(wrap_pyfunction!(initial_bump, m)?)?;
    m.add_function(wrap_pyfunction!(concentrate, m)?)?;
    m.add_function(wrap_pyfunction!(energy, m)?)?;
    m.add_function(wrap_pyfunction!(diff_energy, m)?)?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(linearization_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(strauss_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(gn_exponents, m)?)?;
    m.add_function(wrap_pyfunction!(gn_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(mt_subcritical_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(mt_sharpness_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(k_alpha, m)?)?;
    m.add_function(wrap_pyfunction!(admissible_pair, m)?)?;
    Ok(())
}
