//! Nonlinear versus free evolution along concentrating data.
//!
//! For each concentration index `n` the data `(φ_n, ψ_n)` of
//! [`concentrate`](crate::solver::concentrate) is evolved twice on one grid
//! with one time step: once with the nonlinear model and once with its free
//! companion. The kinetic energy `E_0` of the nodal difference is tracked at
//! every snapshot and its supremum over `[0, T]` is the row's headline number.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::grid::{self, RadialField, RadialGrid};
use crate::model::{self, ModelSpec, Nonlinearity};
use crate::solver::{
    check_wall_distance, concentrate, initial_bump_with_velocity, EvolveOptions, FieldState,
    Integrator, Recorder, SolverError, MIN_SUPPORT_CELLS,
};

/// Largest snapshot stride; the sup over snapshots stands in for the sup over time.
pub const MAX_SNAPSHOT_STRIDE: usize = 10;
/// Relative energy drift each evolution must stay under before its row is trusted.
pub const DEFAULT_DRIFT_GATE: f64 = 1e-3;
/// Largest relative change of a row under grid doubling.
pub const CONVERGENCE_TOL: f64 = 0.10;
/// Required decay of the last row relative to the first.
pub const TREND_RATIO: f64 = 0.5;
/// Free cells between the light cone and the wall.
pub const WALL_PAD_CELLS: usize = 8;
/// Coarsest spacing a policy grid may use.
pub const MAX_SPACING: f64 = 1e-3;

pub const SWEEP_CSV_HEADER: [&str; 9] = [
    "n",
    "sup_diff_e0",
    "u_l2_spacetime",
    "u_l4b_spacetime",
    "strichartz_qr",
    "data_h1",
    "data_l2",
    "grid_cells",
    "verdict",
];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinearizationError {
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("invalid sweep: {0}")]
    Invalid(String),
    #[error("row n = {n}: {which} evolution drifted by {drift:.3e}, above the gate {gate:.1e}")]
    DriftGate {
        n: u32,
        which: &'static str,
        drift: f64,
        gate: f64,
    },
}

/// Unconcentrated data: a bump displacement and a bump velocity of one radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BaseData {
    pub amplitude: f64,
    pub velocity_amplitude: f64,
    pub radius: f64,
}

impl BaseData {
    pub fn bump(amplitude: f64, radius: f64) -> Self {
        Self {
            amplitude,
            velocity_amplitude: 0.0,
            radius,
        }
    }

    pub fn build(&self, grid: RadialGrid) -> Result<(RadialField, RadialField), SolverError> {
        initial_bump_with_velocity(grid, self.amplitude, self.velocity_amplitude, self.radius)
    }
}

/// Grid sizing for a sweep: every row shares the grid chosen for the finest
/// concentration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridPolicy {
    /// Cells across the support `radius / n_max` of the most concentrated data.
    pub cells_per_support: usize,
    /// Upper bound on the spacing regardless of `n_max`.
    pub max_spacing: f64,
    pub cfl: f64,
    pub snapshot_stride: usize,
    pub drift_gate: f64,
}

impl Default for GridPolicy {
    fn default() -> Self {
        Self {
            cells_per_support: 64,
            max_spacing: MAX_SPACING,
            cfl: 0.5,
            snapshot_stride: MAX_SNAPSHOT_STRIDE,
            drift_gate: DEFAULT_DRIFT_GATE,
        }
    }
}

impl GridPolicy {
    /// `dr = min(radius / (n_max cells_per_support), max_spacing)` and
    /// `r_max = radius + T + 8 dr` rounded up to a whole cell.
    pub fn grid(&self, dim: usize, data: &BaseData, n_max: u32, t_final: f64) -> Result<RadialGrid, LinearizationError> {
        if (self.cells_per_support as f64) < MIN_SUPPORT_CELLS {
            return Err(LinearizationError::Invalid(format!(
                "cells_per_support = {} is below {MIN_SUPPORT_CELLS}",
                self.cells_per_support
            )));
        }
        if n_max == 0 {
            return Err(LinearizationError::Invalid("concentration index must be >= 1".into()));
        }
        if !(self.max_spacing > 0.0) {
            return Err(LinearizationError::Invalid(format!(
                "max_spacing = {} must be positive",
                self.max_spacing
            )));
        }
        let dr = (data.radius / (n_max as f64 * self.cells_per_support as f64)).min(self.max_spacing);
        let cells = ((data.radius + t_final) / dr).ceil() as usize + WALL_PAD_CELLS;
        Ok(RadialGrid::new(dim, cells as f64 * dr, cells).map_err(SolverError::from)?)
    }

    pub fn doubled(&self) -> Self {
        Self {
            cells_per_support: 2 * self.cells_per_support,
            max_spacing: 0.5 * self.max_spacing,
            ..*self
        }
    }
}

/// One concentration index of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearizationRow {
    pub n: u32,
    /// `sup_t E_0(u_n - v_n, t)` over snapshots.
    pub sup_diff_e0: f64,
    /// `||u_n||_{L^2([0,T] x R^N)}`.
    pub u_l2_spacetime: f64,
    /// `||u_n||_{L^{4(1-b)}([0,T] x R^2)}`, two dimensions only.
    pub u_l4b_spacetime: Option<f64>,
    /// `||u_n||_{L^q_T L^r}` with the pair matched to `(p, b)`, three dimensions only.
    pub strichartz_qr: Option<f64>,
    pub data_h1: f64,
    pub data_l2: f64,
    pub grid_cells: usize,
    pub runtime_seconds: f64,
    pub drift_nonlinear: f64,
    pub drift_linear: f64,
    pub initial_energy: f64,
    pub max_total_energy: f64,
    /// Largest `support(t) - radius / n - t` over the snapshots of both runs.
    pub max_cone_excess: f64,
}

/// Evolves the nonlinear model and its free companion from the concentrated
/// data on `grid`, in lockstep.
pub fn run_pair(
    spec: &ModelSpec,
    data: &BaseData,
    n: u32,
    t_final: f64,
    grid: RadialGrid,
    policy: &GridPolicy,
) -> Result<LinearizationRow, LinearizationError> {
    let start = Instant::now();
    if policy.snapshot_stride == 0 || policy.snapshot_stride > MAX_SNAPSHOT_STRIDE {
        return Err(LinearizationError::Invalid(format!(
            "snapshot stride {} must lie in 1..={MAX_SNAPSHOT_STRIDE}",
            policy.snapshot_stride
        )));
    }
    let base = data.build(grid)?;
    let (phi, psi) = concentrate(&base, n)?;
    let initial = FieldState::new(phi, psi, 0.0)?;
    check_wall_distance(&initial, t_final)?;

    let mut options = EvolveOptions::new(t_final)
        .with_cfl(policy.cfl)
        .with_stride(policy.snapshot_stride);
    let mut l4b_index = None;
    let mut strichartz_index = None;
    match spec.kind() {
        Nonlinearity::Power3D { p } => {
            let (q, r) = model::strichartz_pair(p, spec.b());
            strichartz_index = Some(options.spacetime_norms.len());
            options = options.with_norm(q, r);
        }
        _ if spec.dim() == 2 => {
            let e = 4.0 * (1.0 - spec.b());
            l4b_index = Some(options.spacetime_norms.len());
            options = options.with_norm(e, e);
        }
        _ => {}
    }
    let (dt, steps) = options.time_step(&grid)?;
    let companion = spec.linear_companion();
    let mut nonlinear = Integrator::new(&initial, spec, dt)?;
    let mut linear = Integrator::new(&initial, &companion, dt)?;
    let mut rec_nl = Recorder::new(&options, &initial);
    let mut rec_lin = Recorder::new(&EvolveOptions::new(t_final).with_stride(policy.snapshot_stride), &initial);

    let diff_e0 = |a: &Integrator, b: &Integrator| {
        let (ua, va) = a.values();
        let (ub, vb) = b.values();
        let du: Vec<f64> = ua.iter().zip(ub).map(|(x, y)| x - y).collect();
        let dv: Vec<f64> = va.iter().zip(vb).map(|(x, y)| x - y).collect();
        b.operator().kinetic(&du, &dv)
    };
    let mut sup_diff: f64 = 0.0;
    rec_nl.record(&nonlinear)?;
    rec_lin.record(&linear)?;
    for k in 1..=steps {
        nonlinear.step()?;
        linear.step()?;
        if k % policy.snapshot_stride == 0 || k == steps {
            rec_nl.record(&nonlinear)?;
            rec_lin.record(&linear)?;
            sup_diff = sup_diff.max(diff_e0(&nonlinear, &linear));
        }
    }
    for (which, drift) in [
        ("nonlinear", rec_nl.max_relative_drift),
        ("linear", rec_lin.max_relative_drift),
    ] {
        if drift > policy.drift_gate {
            return Err(LinearizationError::DriftGate {
                n,
                which,
                drift,
                gate: policy.drift_gate,
            });
        }
    }
    let data_support = data.radius / n as f64;
    let max_cone_excess = rec_nl
        .reports
        .iter()
        .chain(&rec_lin.reports)
        .map(|r| r.support_radius - data_support - r.t)
        .fold(f64::NEG_INFINITY, f64::max);
    let norms = rec_nl.spacetime_norms();
    Ok(LinearizationRow {
        n,
        sup_diff_e0: sup_diff,
        u_l2_spacetime: rec_nl.l2_partial.last().copied().unwrap_or(0.0),
        u_l4b_spacetime: l4b_index.map(|i| norms[i].value),
        strichartz_qr: strichartz_index.map(|i| norms[i].value),
        data_h1: grid::h1_norm(&initial.u),
        data_l2: grid::l2_norm(&initial.u),
        grid_cells: grid.num_cells(),
        runtime_seconds: start.elapsed().as_secs_f64(),
        drift_nonlinear: rec_nl.max_relative_drift,
        drift_linear: rec_lin.max_relative_drift,
        initial_energy: rec_nl.reports[0].total,
        max_total_energy: rec_nl.reports.iter().map(|r| r.total).fold(f64::NEG_INFINITY, f64::max),
        max_cone_excess,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrendVerdict {
    Consistent,
    Inconsistent,
    Insufficient,
}

impl TrendVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            TrendVerdict::Consistent => "consistent",
            TrendVerdict::Inconsistent => "inconsistent",
            TrendVerdict::Insufficient => "insufficient",
        }
    }
}

/// Checks on the rows of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendReport {
    pub verdict: TrendVerdict,
    /// `sup_diff_e0` never increases after its maximum.
    pub non_increasing_from_max: bool,
    pub last_over_first: f64,
    /// Two dimensions: `u_l2_spacetime` strictly decreasing.
    pub l2_strictly_decreasing: Option<bool>,
    /// Three dimensions: largest factor between a Strichartz norm and the median.
    pub strichartz_spread: Option<f64>,
    /// Largest relative change of `sup_diff_e0` under grid doubling, when checked.
    pub convergence_change: Option<f64>,
    pub energy_bound: EnergyBound,
    pub reasons: Vec<String>,
}

/// Uniform energy bound: every snapshot energy must stay below
/// `(1 + drift_gate) (1/2 (1 + m) M^2 + max_n P_n)` where `M` bounds the data
/// norms and `P_n` is the initial potential energy of row `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyBound {
    pub data_bound: f64,
    pub bound: f64,
    pub max_energy: f64,
    pub holds: bool,
}

/// Rows in `n` order, trend checks, and the first row error if the sweep
/// stopped early.
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub grid: RadialGrid,
    pub rows: Vec<LinearizationRow>,
    pub trend: Option<TrendReport>,
    pub error: Option<LinearizationError>,
}

impl SweepOutcome {
    /// Rows of the sweep CSV; absent norms are written as empty fields.
    pub fn csv_rows(&self) -> Vec<[String; 9]> {
        let label = self
            .trend
            .as_ref()
            .map_or("aborted", |t| t.verdict.label());
        let opt = |x: Option<f64>| x.map_or(String::new(), |v| format!("{v:e}"));
        self.rows
            .iter()
            .map(|r| {
                [
                    r.n.to_string(),
                    format!("{:e}", r.sup_diff_e0),
                    format!("{:e}", r.u_l2_spacetime),
                    opt(r.u_l4b_spacetime),
                    opt(r.strichartz_qr),
                    format!("{:e}", r.data_h1),
                    format!("{:e}", r.data_l2),
                    r.grid_cells.to_string(),
                    label.to_string(),
                ]
            })
            .collect()
    }
}

/// Runs every `n` of `n_list` in parallel on the shared policy grid.
pub fn sweep(
    spec: &ModelSpec,
    data: &BaseData,
    n_list: &[u32],
    t_final: f64,
    policy: &GridPolicy,
    check_convergence: bool,
) -> Result<SweepOutcome, LinearizationError> {
    if n_list.is_empty() {
        return Err(LinearizationError::Invalid("n_list is empty".into()));
    }
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LinearizationError::Invalid(format!(
            "n_list {n_list:?} must be strictly increasing"
        )));
    }
    let n_max = *n_list.last().unwrap_or(&1);
    let grid = policy.grid(spec.dim(), data, n_max, t_final)?;
    let results: Vec<Result<LinearizationRow, LinearizationError>> = n_list
        .par_iter()
        .map(|&n| run_pair(spec, data, n, t_final, grid, policy))
        .collect();
    let mut rows = Vec::with_capacity(results.len());
    for r in results {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => {
                return Ok(SweepOutcome {
                    grid,
                    rows,
                    trend: None,
                    error: Some(e),
                })
            }
        }
    }

    let convergence_change = if check_convergence {
        let fine_policy = policy.doubled();
        let fine_grid = fine_policy.grid(spec.dim(), data, n_max, t_final)?;
        let fine: Result<Vec<LinearizationRow>, LinearizationError> = n_list
            .par_iter()
            .map(|&n| run_pair(spec, data, n, t_final, fine_grid, &fine_policy))
            .collect();
        match fine {
            Ok(fine) => Some(
                rows.iter()
                    .zip(&fine)
                    .map(|(c, f)| relative_change(c.sup_diff_e0, f.sup_diff_e0))
                    .fold(0.0, f64::max),
            ),
            Err(e) => {
                return Ok(SweepOutcome {
                    grid,
                    rows,
                    trend: None,
                    error: Some(e),
                })
            }
        }
    } else {
        None
    };
    let trend = trend_report(spec, &rows, convergence_change, policy.drift_gate);
    Ok(SweepOutcome {
        grid,
        rows,
        trend: Some(trend),
        error: None,
    })
}

fn relative_change(coarse: f64, fine: f64) -> f64 {
    if coarse == fine {
        0.0
    } else {
        (coarse - fine).abs() / fine.abs().max(coarse.abs())
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let k = values.len();
    if k % 2 == 1 {
        values[k / 2]
    } else {
        0.5 * (values[k / 2 - 1] + values[k / 2])
    }
}

/// Applies the trend, diagnostic, convergence and energy-bound checks to
/// rows sorted by `n`.
pub fn trend_report(
    spec: &ModelSpec,
    rows: &[LinearizationRow],
    convergence_change: Option<f64>,
    drift_gate: f64,
) -> TrendReport {
    let sup: Vec<f64> = rows.iter().map(|r| r.sup_diff_e0).collect();
    let argmax = sup
        .iter()
        .enumerate()
        .fold(0, |best, (i, v)| if *v > sup[best] { i } else { best });
    let non_increasing = sup[argmax..].windows(2).all(|w| w[1] <= w[0]);
    let last_over_first = match (sup.first(), sup.last()) {
        (Some(&f), Some(&l)) if f > 0.0 => l / f,
        (Some(_), Some(&l)) if l == 0.0 => 0.0,
        _ => f64::INFINITY,
    };
    let l2_strictly_decreasing = (spec.dim() == 2).then(|| {
        rows.windows(2)
            .all(|w| w[1].u_l2_spacetime < w[0].u_l2_spacetime)
    });
    let strichartz: Vec<f64> = rows.iter().filter_map(|r| r.strichartz_qr).collect();
    let strichartz_spread = (!strichartz.is_empty()).then(|| {
        let med = median(&mut strichartz.clone());
        strichartz
            .iter()
            .map(|&s| if s > med { s / med } else { med / s })
            .fold(1.0, f64::max)
    });

    let mass = spec.mass();
    let data_bound = rows.iter().map(|r| r.data_h1).fold(0.0, f64::max);
    let max_potential = rows
        .iter()
        .map(|r| r.initial_energy - kinetic_part(r, mass))
        .fold(0.0, f64::max);
    let bound = (1.0 + drift_gate) * (0.5 * (1.0 + mass) * data_bound * data_bound + max_potential);
    let max_energy = rows.iter().map(|r| r.max_total_energy).fold(f64::NEG_INFINITY, f64::max);
    let energy_bound = EnergyBound {
        data_bound,
        bound,
        max_energy,
        holds: max_energy <= bound,
    };

    let mut reasons = Vec::new();
    if rows.len() < 2 {
        reasons.push("fewer than two rows".to_string());
        return TrendReport {
            verdict: TrendVerdict::Insufficient,
            non_increasing_from_max: non_increasing,
            last_over_first,
            l2_strictly_decreasing,
            strichartz_spread,
            convergence_change,
            energy_bound,
            reasons,
        };
    }
    if !non_increasing {
        reasons.push("sup_diff_e0 increases after its maximum".into());
    }
    if last_over_first > TREND_RATIO {
        reasons.push(format!("last/first = {last_over_first:.3} exceeds {TREND_RATIO}"));
    }
    if l2_strictly_decreasing == Some(false) {
        reasons.push("u_l2_spacetime is not strictly decreasing".into());
    }
    if let Some(s) = strichartz_spread {
        if s > 2.0 {
            reasons.push(format!("Strichartz norm varies by {s:.3}x about its median"));
        }
    }
    if let Some(c) = convergence_change {
        if c >= CONVERGENCE_TOL {
            reasons.push(format!("rows change by {:.1}% under grid doubling", 100.0 * c));
        }
    }
    if !energy_bound.holds {
        reasons.push("energy exceeds the data bound".into());
    }
    TrendReport {
        verdict: if reasons.is_empty() {
            TrendVerdict::Consistent
        } else {
            TrendVerdict::Inconsistent
        },
        non_increasing_from_max: non_increasing,
        last_over_first,
        l2_strictly_decreasing,
        strichartz_spread,
        convergence_change,
        energy_bound,
        reasons,
    }
}

// Free part of the initial energy in terms of the data norms; the data
// velocity is not stored per row, so this is a lower bound of E_0 and the
// potential estimate built from it is an upper bound.
fn kinetic_part(row: &LinearizationRow, mass: f64) -> f64 {
    let grad_sq = (row.data_h1 * row.data_h1 - row.data_l2 * row.data_l2).max(0.0);
    0.5 * (grad_sq + mass * row.data_l2 * row.data_l2)
}
