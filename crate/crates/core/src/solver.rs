//! Explicit time integration of `u_tt = Δu - m u + r^b f(u)` for radial data.
//!
//! Space is discretized in conservative (finite-volume) form on the nodes of a
//! [`RadialGrid`]: node `j` owns the shell `[r_j - dr/2, r_j + dr/2]` and fluxes
//! cross the faces `r_{j±1/2}`. At the origin this reduces to the ghost-node
//! stencil `Δu(0) ≈ 2N (u_1 - u_0) / dr^2`; `u = 0` is imposed at `r_max`.
//! The discrete operator is symmetric in the shell-volume inner product, so the
//! semi-discrete system conserves
//!
//! ```text
//! E_h = 1/2 Σ V_j v_j^2 + 1/2 Σ c_{j+1/2} (u_{j+1} - u_j)^2 + m/2 Σ V_j u_j^2 - Σ V_j r_j^b F(u_j)
//! ```
//!
//! and the only energy drift left is the `O(dt^2)` error of the time stepper.
//!
//! Time stepping is Störmer–Verlet in velocity form. Its displacement sequence
//! is the leapfrog recursion `u^{k+1} = 2u^k - u^{k-1} + dt^2 a(u^k)` started
//! with `u^1 = u^0 + dt u_1 + dt^2/2 a(u^0)`, and its integer-step velocity
//! equals the centered difference `(u^{k+1} - u^{k-1}) / (2 dt)`.

use serde::Serialize;
use thiserror::Error;

use crate::grid::{self, rpow, GridError, RadialField, RadialGrid};
use crate::model::{ModelError, ModelSpec};

pub const DEFAULT_CFL: f64 = 0.5;
pub const DEFAULT_SNAPSHOT_STRIDE: usize = 10;
/// Support threshold relative to the largest initial sample.
pub const SUPPORT_REL_THRESHOLD: f64 = 1e-9;
/// Free cells required between the initial support plus the light cone and
/// the Dirichlet wall.
pub const WALL_MARGIN_CELLS: f64 = 4.0;
/// Cells across the concentrated support demanded by [`concentrate`].
pub const MIN_SUPPORT_CELLS: f64 = 16.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("overflow in the nonlinearity at t = {t}, r = {r}: u = {u}")]
    Overflow { t: f64, r: f64, u: f64 },
    #[error("CFL number {0} must lie in (0, 1]")]
    Cfl(f64),
    #[error("r_max = {r_max} is below the required {required} (support + T + 4 dr)")]
    WallTooClose { required: f64, r_max: f64 },
    #[error("solution reached r = {support} at t = {t}, within 2 dr of the wall r_max = {r_max}")]
    WallProximity { t: f64, support: f64, r_max: f64 },
    #[error("bump radius {radius} must be positive and below r_max = {r_max}")]
    InvalidRadius { radius: f64, r_max: f64 },
    #[error("concentrated support spans {cells:.1} cells, at least {required} are needed; refine the grid")]
    Underresolved { cells: f64, required: f64 },
    #[error("states do not share a grid")]
    GridMismatch,
    #[error("invalid option: {0}")]
    InvalidOption(String),
    #[error("the model dimension {model} does not match the grid dimension {grid}")]
    DimensionMismatch { model: usize, grid: usize },
}

/// `(u, u_t)` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub u: RadialField,
    pub v: RadialField,
    pub t: f64,
}

impl FieldState {
    pub fn new(u: RadialField, v: RadialField, t: f64) -> Result<Self, SolverError> {
        if u.grid() != v.grid() {
            return Err(SolverError::GridMismatch);
        }
        Ok(Self { u, v, t })
    }

    pub fn zeros(grid: RadialGrid) -> Self {
        Self {
            u: RadialField::zeros(grid),
            v: RadialField::zeros(grid),
            t: 0.0,
        }
    }

    pub fn grid(&self) -> &RadialGrid {
        self.u.grid()
    }

    /// Same displacement with the velocity negated, for running time backwards.
    pub fn reversed(&self) -> Self {
        Self {
            u: self.u.clone(),
            v: self.v.scaled(-1.0),
            t: self.t,
        }
    }

    /// Largest radius where `|u|` or `|v|` exceeds `threshold`.
    pub fn support_radius(&self, threshold: f64) -> f64 {
        self.u
            .support_radius(threshold)
            .max(self.v.support_radius(threshold))
    }
}

/// Energy bookkeeping at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyReport {
    pub t: f64,
    pub total: f64,
    pub kinetic_e0: f64,
    pub potential: f64,
    pub support_radius: f64,
}

/// Discrete radial Laplacian in conservative form plus the weights that make
/// it self-adjoint.
#[derive(Debug, Clone)]
pub struct RadialOperator {
    grid: RadialGrid,
    /// Shell volumes `V_j`, `j < M`.
    volume: Vec<f64>,
    /// `c_{j+1/2} = omega r_{j+1/2}^{N-1} / dr`, `j < M`.
    face: Vec<f64>,
    /// `c_{j+1/2} / V_j`.
    up: Vec<f64>,
    /// `c_{j-1/2} / V_j`.
    down: Vec<f64>,
    /// `r_j^b`.
    weight: Vec<f64>,
    mass: f64,
}

impl RadialOperator {
    pub fn new(grid: RadialGrid, spec: &ModelSpec) -> Result<Self, SolverError> {
        if grid.dim() != spec.dim() {
            return Err(SolverError::DimensionMismatch {
                model: spec.dim(),
                grid: grid.dim(),
            });
        }
        let m = grid.num_cells();
        let h = grid.spacing();
        let n = grid.dim() as i32;
        let omega = grid.sphere_area();
        let volume: Vec<f64> = (0..m)
            .map(|j| {
                let r = grid.node(j);
                let lo = (r - 0.5 * h).max(0.0);
                omega * ((r + 0.5 * h).powi(n) - lo.powi(n)) / n as f64
            })
            .collect();
        let face: Vec<f64> = (0..m)
            .map(|j| omega * ((j as f64 + 0.5) * h).powi(n - 1) / h)
            .collect();
        let up = (0..m).map(|j| face[j] / volume[j]).collect();
        let down = (0..m)
            .map(|j| if j == 0 { 0.0 } else { face[j - 1] / volume[j] })
            .collect();
        let weight = (0..=m).map(|j| rpow(grid.node(j), spec.b())).collect();
        Ok(Self {
            grid,
            volume,
            face,
            up,
            down,
            weight,
            mass: spec.mass(),
        })
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    /// `a = Δ_h u - m u + r^b f(u)`; `a[M] = 0`.
    fn acceleration(
        &self,
        spec: &ModelSpec,
        u: &[f64],
        out: &mut [f64],
        t: f64,
    ) -> Result<(), SolverError> {
        let m = self.grid.num_cells();
        let linear = spec.is_linear();
        for j in 0..m {
            let below = if j == 0 { u[0] } else { u[j - 1] };
            let lap = self.up[j] * (u[j + 1] - u[j]) - self.down[j] * (u[j] - below);
            let mut a = lap - self.mass * u[j];
            if !linear {
                let f = spec.f_eval(u[j]).map_err(|e| match e {
                    ModelError::Overflow { u } => SolverError::Overflow {
                        t,
                        r: self.grid.node(j),
                        u,
                    },
                    other => other.into(),
                })?;
                a += self.weight[j] * f;
            }
            out[j] = a;
        }
        out[m] = 0.0;
        Ok(())
    }

    /// `1/2 (||v||^2 + ||u_r||^2 + m ||u||^2)` in the discrete norms.
    pub fn kinetic(&self, u: &[f64], v: &[f64]) -> f64 {
        let m = self.grid.num_cells();
        let mut acc = 0.0;
        for j in 0..m {
            let du = u[j + 1] - u[j];
            acc += self.volume[j] * (v[j] * v[j] + self.mass * u[j] * u[j]) + self.face[j] * du * du;
        }
        0.5 * acc
    }

    /// `-Σ V_j r_j^b F(u_j)`.
    pub fn potential(&self, spec: &ModelSpec, u: &[f64]) -> Result<f64, ModelError> {
        if spec.is_linear() {
            return Ok(0.0);
        }
        let mut acc = 0.0;
        for j in 0..self.grid.num_cells() {
            acc -= self.volume[j] * self.weight[j] * spec.big_f_eval(u[j])?;
        }
        Ok(acc)
    }

    pub fn report(
        &self,
        spec: &ModelSpec,
        state: &FieldState,
        support_threshold: f64,
    ) -> Result<EnergyReport, SolverError> {
        let kinetic_e0 = self.kinetic(state.u.values(), state.v.values());
        let potential = self.potential(spec, state.u.values())?;
        Ok(EnergyReport {
            t: state.t,
            total: kinetic_e0 + potential,
            kinetic_e0,
            potential,
            support_radius: state.support_radius(support_threshold),
        })
    }
}

fn default_threshold(state: &FieldState) -> f64 {
    SUPPORT_REL_THRESHOLD * state.u.max_abs().max(state.v.max_abs())
}

/// Energy of a state; support is measured relative to the state's own peak.
pub fn energy(state: &FieldState, spec: &ModelSpec) -> Result<EnergyReport, SolverError> {
    RadialOperator::new(*state.grid(), spec)?.report(spec, state, default_threshold(state))
}

/// `E_0(a - b)`, the free energy of the difference of two states.
pub fn diff_energy(a: &FieldState, b: &FieldState, mass: f64) -> Result<f64, SolverError> {
    if a.grid() != b.grid() {
        return Err(SolverError::GridMismatch);
    }
    let spec = ModelSpec::linear(a.grid().dim(), mass)?;
    let op = RadialOperator::new(*a.grid(), &spec)?;
    Ok(diff_energy_with(&op, a, b))
}

pub(crate) fn diff_energy_with(op: &RadialOperator, a: &FieldState, b: &FieldState) -> f64 {
    let du: Vec<f64> = a.u.values().iter().zip(b.u.values()).map(|(x, y)| x - y).collect();
    let dv: Vec<f64> = a.v.values().iter().zip(b.v.values()).map(|(x, y)| x - y).collect();
    op.kinetic(&du, &dv)
}

/// `u0(r) = A exp(-1 / (1 - (r/R0)^2))` for `r < R0`, zero beyond; `u1 = 0`.
pub fn initial_bump(
    grid: RadialGrid,
    amplitude: f64,
    radius: f64,
) -> Result<(RadialField, RadialField), SolverError> {
    initial_bump_with_velocity(grid, amplitude, 0.0, radius)
}

/// Bump displacement and a bump velocity profile of the same radius.
pub fn initial_bump_with_velocity(
    grid: RadialGrid,
    amplitude: f64,
    velocity_amplitude: f64,
    radius: f64,
) -> Result<(RadialField, RadialField), SolverError> {
    if !(radius > 0.0 && radius < grid.r_max()) {
        return Err(SolverError::InvalidRadius {
            radius,
            r_max: grid.r_max(),
        });
    }
    let u = RadialField::from_fn(grid, |r| amplitude * bump(r / radius))?;
    let v = RadialField::from_fn(grid, |r| velocity_amplitude * bump(r / radius))?;
    Ok((u, v))
}

fn bump(x: f64) -> f64 {
    if x.abs() < 1.0 {
        (-1.0 / (1.0 - x * x)).exp()
    } else {
        0.0
    }
}

/// `φ_n(r) = n^{N/2-1} φ(n r)`, `ψ_n(r) = n^{N/2} ψ(n r)`.
///
/// For integer `n` the samples of `φ(n r_j)` are exactly the samples at node
/// `n j`, so no interpolation is involved.
pub fn concentrate(
    data: &(RadialField, RadialField),
    n: u32,
) -> Result<(RadialField, RadialField), SolverError> {
    let (phi, psi) = data;
    if phi.grid() != psi.grid() {
        return Err(SolverError::GridMismatch);
    }
    if n == 0 {
        return Err(SolverError::InvalidOption("concentration index must be >= 1".into()));
    }
    if n == 1 {
        return Ok((phi.clone(), psi.clone()));
    }
    let grid = *phi.grid();
    let support = phi.support_radius(0.0).max(psi.support_radius(0.0));
    let cells = support / n as f64 / grid.spacing();
    if cells < MIN_SUPPORT_CELLS {
        return Err(SolverError::Underresolved {
            cells,
            required: MIN_SUPPORT_CELLS,
        });
    }
    let half_dim = grid.dim() as f64 / 2.0;
    let nf = n as f64;
    let scale = |field: &RadialField, factor: f64| {
        let vals = field.values();
        let out = (0..grid.num_nodes())
            .map(|j| vals.get(j * n as usize).map_or(0.0, |x| factor * x))
            .collect();
        RadialField::from_vec_unchecked(grid, out)
    };
    Ok((
        scale(phi, nf.powf(half_dim - 1.0)),
        scale(psi, nf.powf(half_dim)),
    ))
}

/// Space-time Lebesgue norm `||u||_{L^q_t L^r_x}` accumulated during a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpaceTimeNorm {
    pub q: f64,
    pub r: f64,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct EvolveOptions {
    pub t_final: f64,
    pub cfl: f64,
    pub snapshot_stride: usize,
    pub store_states: bool,
    /// `(q, r)` pairs to accumulate; `q` may be infinite.
    pub spacetime_norms: Vec<(f64, f64)>,
    /// Absolute support threshold; defaults to a fraction of the initial peak.
    pub support_threshold: Option<f64>,
}

impl EvolveOptions {
    pub fn new(t_final: f64) -> Self {
        Self {
            t_final,
            cfl: DEFAULT_CFL,
            snapshot_stride: DEFAULT_SNAPSHOT_STRIDE,
            store_states: false,
            spacetime_norms: Vec::new(),
            support_threshold: None,
        }
    }

    pub fn with_cfl(mut self, cfl: f64) -> Self {
        self.cfl = cfl;
        self
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.snapshot_stride = stride;
        self
    }

    pub fn storing_states(mut self) -> Self {
        self.store_states = true;
        self
    }

    pub fn with_norm(mut self, q: f64, r: f64) -> Self {
        self.spacetime_norms.push((q, r));
        self
    }

    /// `(dt, steps)` with `dt <= cfl dr` landing exactly on `t_final`.
    pub fn time_step(&self, grid: &RadialGrid) -> Result<(f64, usize), SolverError> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(SolverError::Cfl(self.cfl));
        }
        if !(self.t_final.is_finite() && self.t_final >= 0.0) {
            return Err(SolverError::InvalidOption(format!(
                "final time {} must be finite and non-negative",
                self.t_final
            )));
        }
        if self.snapshot_stride == 0 {
            return Err(SolverError::InvalidOption("snapshot stride must be >= 1".into()));
        }
        if self.t_final == 0.0 {
            return Ok((self.cfl * grid.spacing(), 0));
        }
        let steps = (self.t_final / (self.cfl * grid.spacing()) - 1e-9).ceil().max(1.0) as usize;
        Ok((self.t_final / steps as f64, steps))
    }
}

/// Stored output of [`evolve`].
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub spec: ModelSpec,
    pub grid: RadialGrid,
    pub dt: f64,
    pub steps: usize,
    pub reports: Vec<EnergyReport>,
    /// `(int_0^t ||u||_{L^2}^2 ds)^{1/2}` at each snapshot.
    pub l2_spacetime_partial: Vec<f64>,
    pub spacetime_norms: Vec<SpaceTimeNorm>,
    pub states: Option<Vec<FieldState>>,
    pub final_state: FieldState,
    pub max_relative_drift: f64,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.reports.iter().map(|r| r.t).collect()
    }

    /// `||u||_{L^2([0,T] x R^N)}`.
    pub fn l2_spacetime(&self) -> f64 {
        self.l2_spacetime_partial.last().copied().unwrap_or(0.0)
    }

    pub fn spacetime_norm(&self, q: f64, r: f64) -> Option<f64> {
        self.spacetime_norms
            .iter()
            .find(|n| n.q == q && n.r == r)
            .map(|n| n.value)
    }

    /// Rows of the energy CSV export.
    pub fn csv_rows(&self) -> impl Iterator<Item = [f64; 6]> + '_ {
        self.reports
            .iter()
            .zip(&self.l2_spacetime_partial)
            .map(|(rep, l2)| [rep.t, rep.total, rep.kinetic_e0, rep.potential, rep.support_radius, *l2])
    }
}

pub const ENERGY_CSV_HEADER: [&str; 6] = [
    "t",
    "total",
    "kinetic_e0",
    "potential",
    "support_radius",
    "l2_spacetime_partial",
];

/// Velocity-Verlet integrator holding the current state and the acceleration
/// at that state.
pub struct Integrator {
    spec: ModelSpec,
    op: RadialOperator,
    dt: f64,
    t0: f64,
    steps: usize,
    t: f64,
    u: Vec<f64>,
    v: Vec<f64>,
    a: Vec<f64>,
}

impl Integrator {
    pub fn new(initial: &FieldState, spec: &ModelSpec, dt: f64) -> Result<Self, SolverError> {
        let op = RadialOperator::new(*initial.grid(), spec)?;
        Self::with_operator(initial, spec, op, dt)
    }

    fn with_operator(
        initial: &FieldState,
        spec: &ModelSpec,
        op: RadialOperator,
        dt: f64,
    ) -> Result<Self, SolverError> {
        let m = initial.grid().num_cells();
        let mut u = initial.u.values().to_vec();
        let mut v = initial.v.values().to_vec();
        u[m] = 0.0;
        v[m] = 0.0;
        let mut a = vec![0.0; m + 1];
        op.acceleration(spec, &u, &mut a, initial.t)?;
        Ok(Self {
            spec: *spec,
            op,
            dt,
            t0: initial.t,
            steps: 0,
            t: initial.t,
            u,
            v,
            a,
        })
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn operator(&self) -> &RadialOperator {
        &self.op
    }

    /// Current nodal displacement and velocity.
    pub fn values(&self) -> (&[f64], &[f64]) {
        (&self.u, &self.v)
    }

    pub fn step(&mut self) -> Result<(), SolverError> {
        let dt = self.dt;
        let half = 0.5 * dt;
        for ((u, v), a) in self.u.iter_mut().zip(self.v.iter_mut()).zip(&self.a) {
            *v += half * a;
            *u += dt * *v;
        }
        // t0 + k dt, without accumulated rounding
        self.steps += 1;
        self.t = self.t0 + self.steps as f64 * dt;
        self.op.acceleration(&self.spec, &self.u, &mut self.a, self.t)?;
        for (v, a) in self.v.iter_mut().zip(&self.a) {
            *v += half * a;
        }
        Ok(())
    }

    pub fn state(&self) -> FieldState {
        let grid = *self.op.grid();
        FieldState {
            u: RadialField::from_vec_unchecked(grid, self.u.clone()),
            v: RadialField::from_vec_unchecked(grid, self.v.clone()),
            t: self.t,
        }
    }

    fn support_radius(&self, threshold: f64) -> f64 {
        let grid = self.op.grid();
        let last = |xs: &[f64]| xs.iter().rposition(|x| x.abs() > threshold);
        match (last(&self.u), last(&self.v)) {
            (None, None) => 0.0,
            (a, b) => grid.node(a.unwrap_or(0).max(b.unwrap_or(0))),
        }
    }
}

/// One Störmer–Verlet step of size `dt`.
pub fn step(state: &FieldState, spec: &ModelSpec, dt: f64) -> Result<FieldState, SolverError> {
    let mut integ = Integrator::new(state, spec, dt)?;
    integ.step()?;
    Ok(integ.state())
}

/// Snapshot bookkeeping shared by [`evolve`] and the linearization runs.
pub(crate) struct Recorder {
    threshold: f64,
    norms: Vec<(f64, f64, f64, f64)>, // (q, r, accumulated, previous sample)
    l2_acc: f64,
    l2_prev: f64,
    last_t: f64,
    started: bool,
    pub reports: Vec<EnergyReport>,
    pub l2_partial: Vec<f64>,
    pub states: Option<Vec<FieldState>>,
    e_initial: f64,
    pub max_relative_drift: f64,
}

impl Recorder {
    pub fn new(options: &EvolveOptions, initial: &FieldState) -> Self {
        Self {
            threshold: options
                .support_threshold
                .unwrap_or_else(|| default_threshold(initial)),
            norms: options
                .spacetime_norms
                .iter()
                .map(|&(q, r)| (q, r, 0.0, 0.0))
                .collect(),
            l2_acc: 0.0,
            l2_prev: 0.0,
            last_t: initial.t,
            started: false,
            reports: Vec::new(),
            l2_partial: Vec::new(),
            states: options.store_states.then(Vec::new),
            e_initial: 0.0,
            max_relative_drift: 0.0,
        }
    }

    pub fn record(&mut self, integ: &Integrator) -> Result<(), SolverError> {
        let grid = *integ.op.grid();
        let state = integ.state();
        let support = integ.support_radius(self.threshold);
        if support > grid.r_max() - 2.0 * grid.spacing() {
            return Err(SolverError::WallProximity {
                t: state.t,
                support,
                r_max: grid.r_max(),
            });
        }
        let kinetic_e0 = integ.op.kinetic(&integ.u, &integ.v);
        let potential = integ.op.potential(&integ.spec, &integ.u)?;
        let report = EnergyReport {
            t: state.t,
            total: kinetic_e0 + potential,
            kinetic_e0,
            potential,
            support_radius: support,
        };

        let l2_sq = grid::l2_norm(&state.u).powi(2);
        let dt = state.t - self.last_t;
        if self.started {
            self.l2_acc += 0.5 * dt * (l2_sq + self.l2_prev);
        } else {
            self.e_initial = report.total;
        }
        self.l2_prev = l2_sq;
        for (q, r, acc, prev) in self.norms.iter_mut() {
            let lr = grid::lp_norm(&state.u, *r);
            if q.is_infinite() {
                *acc = acc.max(lr);
            } else {
                let sample = lr.powf(*q);
                if self.started {
                    *acc += 0.5 * dt * (sample + *prev);
                }
                *prev = sample;
            }
        }
        let scale = self.e_initial.abs();
        if scale > 0.0 {
            let drift = (report.total - self.e_initial).abs() / scale;
            self.max_relative_drift = self.max_relative_drift.max(drift);
        }
        self.started = true;
        self.last_t = state.t;
        self.reports.push(report);
        self.l2_partial.push(self.l2_acc.sqrt());
        if let Some(states) = self.states.as_mut() {
            states.push(state);
        }
        Ok(())
    }

    pub fn spacetime_norms(&self) -> Vec<SpaceTimeNorm> {
        self.norms
            .iter()
            .map(|&(q, r, acc, _)| SpaceTimeNorm {
                q,
                r,
                value: if q.is_infinite() { acc } else { acc.powf(1.0 / q) },
            })
            .collect()
    }
}

/// Checks `r_max >= support + T + 4 dr`, with the support measured at the
/// default relative threshold.
pub fn check_wall_distance(initial: &FieldState, t_final: f64) -> Result<(), SolverError> {
    let grid = initial.grid();
    let required = initial.support_radius(default_threshold(initial)) + t_final + WALL_MARGIN_CELLS * grid.spacing();
    if grid.r_max() < required - 1e-12 {
        return Err(SolverError::WallTooClose {
            required,
            r_max: grid.r_max(),
        });
    }
    Ok(())
}

/// Integrates from `initial` to `initial.t + t_final`, recording an energy
/// report every `snapshot_stride` steps and at the final step.
pub fn evolve(
    initial: &FieldState,
    spec: &ModelSpec,
    options: &EvolveOptions,
) -> Result<Trajectory, SolverError> {
    let grid = *initial.grid();
    let (dt, steps) = options.time_step(&grid)?;
    check_wall_distance(initial, options.t_final)?;
    let mut integ = Integrator::new(initial, spec, dt)?;
    let mut rec = Recorder::new(options, initial);
    rec.record(&integ)?;
    for k in 1..=steps {
        integ.step()?;
        if k % options.snapshot_stride == 0 || k == steps {
            rec.record(&integ)?;
        }
    }
    let spacetime_norms = rec.spacetime_norms();
    Ok(Trajectory {
        spec: *spec,
        grid,
        dt,
        steps,
        reports: rec.reports,
        l2_spacetime_partial: rec.l2_partial,
        spacetime_norms,
        states: rec.states,
        final_state: integ.state(),
        max_relative_drift: rec.max_relative_drift,
    })
}
