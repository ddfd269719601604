//! The four commands. Each writes its CSV payloads and returns a JSON summary
//! for the manifest plus the failure, if any, that decides the exit code.

use radwave_core::grid::GridError;
use radwave_core::inequality::{self, InequalityError, InequalityVerdict, VERDICT_CSV_HEADER};
use radwave_core::linearization::{self, BaseData, LinearizationError, TrendVerdict, SWEEP_CSV_HEADER};
use radwave_core::model::{self, ModelError, Nonlinearity};
use radwave_core::solver::{self, SolverError, ENERGY_CSV_HEADER};
use radwave_core::{EvolveOptions, FieldState, RadialGrid};
use serde_json::{json, Value};

use crate::config::{Command, ExperimentConfig};
use crate::persist::{num, RunDir};
use crate::RunError;

pub struct Outcome {
    pub summary: Value,
    pub files: Vec<String>,
    pub failure: Option<RunError>,
}

pub fn execute(command: Command, config: &ExperimentConfig, dir: &RunDir) -> Result<Outcome, RunError> {
    match command {
        Command::Validate => validate(config),
        Command::Simulate => simulate(config, dir),
        Command::Linearize => linearize(config, dir),
        Command::Inequalities => inequalities(config, dir),
    }
}

pub(crate) fn solver_failure(e: SolverError) -> RunError {
    match e {
        SolverError::Overflow { .. }
        | SolverError::Cfl(_)
        | SolverError::WallProximity { .. }
        | SolverError::Model(ModelError::Overflow { .. })
        | SolverError::Grid(GridError::NonFinite { .. }) => RunError::Numerical(e.to_string()),
        other => RunError::Config(other.to_string()),
    }
}

fn linearization_failure(e: LinearizationError) -> RunError {
    match e {
        LinearizationError::Solver(s) => solver_failure(s),
        LinearizationError::DriftGate { .. } => RunError::Gate(e.to_string()),
        LinearizationError::Invalid(_) => RunError::Config(e.to_string()),
    }
}

fn inequality_failure(e: InequalityError) -> RunError {
    match e {
        InequalityError::WindowGrowth { .. }
        | InequalityError::Grid(GridError::NonFinite { .. })
        | InequalityError::Model(ModelError::Overflow { .. }) => RunError::Numerical(e.to_string()),
        other => RunError::Config(other.to_string()),
    }
}

fn grid_json(grid: &RadialGrid) -> Value {
    json!({
        "dim": grid.dim(),
        "r_max": grid.r_max(),
        "num_cells": grid.num_cells(),
        "dr": grid.spacing(),
    })
}

fn validate(config: &ExperimentConfig) -> Result<Outcome, RunError> {
    let spec = &config.model;
    println!(
        "model: N = {}, b = {}, m = {}, kind = {}",
        spec.dim(),
        spec.b(),
        spec.mass(),
        spec.kind().name()
    );
    let mut summary = json!({ "model": spec });
    match model::critical_exponent(spec) {
        Ok(report) => {
            println!(
                "criticality: s_c = {}, mass-critical p = {}, energy-critical p = {}, class {}",
                report.s_c,
                report.p_mass_critical,
                report.p_energy_critical,
                serde_json::to_value(report.classification)
                    .ok()
                    .and_then(|v| v.as_str().map(str::to_string))
                    .unwrap_or_default()
            );
            summary["criticality"] = json!(report);
        }
        Err(e) => println!("criticality: {e}"),
    }
    let violations = model::validate_hypotheses(spec);
    if violations.is_empty() {
        println!("hypotheses: all hold");
    }
    for v in &violations {
        println!("hypothesis violated: {v}");
    }
    summary["hypothesis_violations"] = json!(violations);
    if let Nonlinearity::Power3D { p } = spec.kind() {
        let (q, r) = model::strichartz_pair(p, spec.b());
        let ok = model::admissible_pair_check(q, r);
        println!("strichartz pair: (q, r) = ({q}, {r}), admissible: {ok}");
        summary["strichartz_pair"] = json!({ "q": q, "r": r, "admissible": ok });
    }
    Ok(Outcome {
        summary,
        files: Vec::new(),
        failure: None,
    })
}

fn initial_state(config: &ExperimentConfig, grid: RadialGrid) -> Result<FieldState, RunError> {
    let d = &config.data;
    let (u, v) = solver::initial_bump_with_velocity(grid, d.amplitude, d.velocity_amplitude, d.radius)
        .map_err(solver_failure)?;
    FieldState::new(u, v, 0.0).map_err(solver_failure)
}

fn simulate(config: &ExperimentConfig, dir: &RunDir) -> Result<Outcome, RunError> {
    let grid = config.simulation_grid().map_err(RunError::Config)?;
    let state = initial_state(config, grid)?;
    let options = EvolveOptions::new(config.run.t_final)
        .with_cfl(config.run.cfl)
        .with_stride(config.run.snapshot_stride);
    let traj = solver::evolve(&state, &config.model, &options).map_err(solver_failure)?;

    let rows = traj.csv_rows().map(|row| row.map(num));
    dir.write_csv("energy.csv", &ENERGY_CSV_HEADER, rows)?;

    let radius = config.data.radius;
    let cone_excess = traj
        .reports
        .iter()
        .map(|r| r.support_radius - radius - r.t)
        .fold(f64::NEG_INFINITY, f64::max);
    let first = traj.reports.first().copied();
    let last = traj.reports.last().copied();
    println!(
        "simulate: {} steps of dt = {:e}, max relative energy drift {:.3e}, largest support - (R0 + t) = {:.1} cells",
        traj.steps,
        traj.dt,
        traj.max_relative_drift,
        cone_excess / grid.spacing()
    );
    let failure = (traj.max_relative_drift > config.run.drift_gate).then(|| {
        RunError::Gate(format!(
            "relative energy drift {:.3e} exceeds the gate {:.1e}",
            traj.max_relative_drift, config.run.drift_gate
        ))
    });
    Ok(Outcome {
        summary: json!({
            "grid": grid_json(&grid),
            "dt": traj.dt,
            "steps": traj.steps,
            "snapshots": traj.reports.len(),
            "max_relative_drift": traj.max_relative_drift,
            "initial": first,
            "final": last,
            "l2_spacetime": traj.l2_spacetime(),
            "max_cone_excess": cone_excess,
            "max_cone_excess_cells": cone_excess / grid.spacing(),
        }),
        files: vec!["energy.csv".into()],
        failure,
    })
}

fn linearize(config: &ExperimentConfig, dir: &RunDir) -> Result<Outcome, RunError> {
    let sweep_block = config
        .sweep
        .as_ref()
        .ok_or_else(|| RunError::Config("`linearize` requires a [sweep] block".into()))?;
    let policy = config.grid_policy();
    let d = &config.data;
    let data = BaseData {
        amplitude: d.amplitude,
        velocity_amplitude: d.velocity_amplitude,
        radius: d.radius,
    };
    let out = linearization::sweep(
        &config.model,
        &data,
        &sweep_block.n_list,
        config.run.t_final,
        &policy,
        sweep_block.check_convergence,
    )
    .map_err(linearization_failure)?;

    dir.write_csv("sweep.csv", &SWEEP_CSV_HEADER, out.csv_rows())?;

    for row in &out.rows {
        println!(
            "n = {:>4}: sup_t E_0(u_n - v_n) = {:.6e}, ||u_n||_L2 = {:.6e}, {:.1} s",
            row.n, row.sup_diff_e0, row.u_l2_spacetime, row.runtime_seconds
        );
    }
    let failure = match (&out.error, &out.trend) {
        (Some(e), _) => Some(linearization_failure(e.clone())),
        (None, Some(t)) if t.verdict == TrendVerdict::Inconsistent => {
            Some(RunError::Gate(format!("trend inconsistent: {}", t.reasons.join("; "))))
        }
        _ => None,
    };
    if let Some(t) = &out.trend {
        println!("trend: {}", t.verdict.label());
        for reason in &t.reasons {
            println!("  {reason}");
        }
    }
    Ok(Outcome {
        summary: json!({
            "grid": grid_json(&out.grid),
            "grid_policy": policy,
            "base_data": data,
            "n_list": sweep_block.n_list,
            "rows": out.rows,
            "trend": out.trend,
            "error": out.error.as_ref().map(|e| e.to_string()),
            "determinism": "no random input; rows are assembled in n order and are bit-identical across reruns on one platform",
        }),
        files: vec!["sweep.csv".into()],
        failure,
    })
}

fn verdict_row(v: &InequalityVerdict) -> Result<[String; 6], RunError> {
    let params = serde_json::to_string(&v.params).map_err(|e| RunError::Config(e.to_string()))?;
    Ok([
        v.name.clone(),
        params,
        num(v.lhs),
        num(v.rhs_factor),
        num(v.ratio),
        v.grid_cells.to_string(),
    ])
}

fn table_verdict(name: &str, lhs: f64, rhs_factor: f64, params: &[(&str, f64)], witness: String, cells: usize) -> InequalityVerdict {
    InequalityVerdict {
        name: name.to_string(),
        lhs,
        rhs_factor,
        ratio: if lhs == 0.0 { 0.0 } else { lhs / rhs_factor },
        params: params.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
        witness,
        in_regime: true,
        grid_cells: cells,
    }
}

fn inequalities(config: &ExperimentConfig, dir: &RunDir) -> Result<Outcome, RunError> {
    let block = config.inequalities.clone().unwrap_or_default();
    let spec = &config.model;
    let dim = spec.dim();
    let grid = RadialGrid::new(dim, block.r_max, block.num_cells).map_err(|e| RunError::Config(e.to_string()))?;
    let (field, _) = solver::initial_bump(grid, config.data.amplitude, config.data.radius).map_err(solver_failure)?;
    let mut verdicts = Vec::new();
    let mut notes = Vec::new();

    verdicts.push(inequality::strauss_ratio(&field).map_err(inequality_failure)?);
    for &[theta, lambda] in &block.gn {
        let mut v = inequality::gn_ratio(&field, theta, lambda).map_err(inequality_failure)?;
        let ex = inequality::gn_exponents(dim, theta, lambda);
        v.params.insert("printed_A".into(), ex.printed_a);
        verdicts.push(v);
    }

    if dim == 2 {
        let beta = block.mt_beta();
        for alpha in block.mt_alpha() {
            verdicts.push(inequality::mt_subcritical_ratio(&field, alpha, beta).map_err(inequality_failure)?);
        }
        let b = spec.b();
        if b > 0.0 && b <= 1.0 {
            verdicts.push(inequality::tech2d_ratio(&field, b, block.tech2d_alpha()).map_err(inequality_failure)?);
        } else {
            notes.push(format!("pointwise exponential estimate skipped: needs 0 < b <= 1, got {b}"));
        }
        let epsilon = block.moser_epsilon();
        let rows = inequality::mt_sharpness_sweep(grid, beta, epsilon, &block.moser_n()).map_err(inequality_failure)?;
        for r in rows {
            let mut v = table_verdict(
                "moser_sharpness",
                r.value,
                1.0,
                &[("n", r.n as f64), ("alpha", r.alpha), ("beta", r.beta), ("epsilon", epsilon), ("h1_raw", r.h1_raw)],
                format!("Moser field n = {} normalized to unit H1 norm", r.n),
                grid.num_cells(),
            );
            // above the critical exponent the values may legitimately blow up
            v.in_regime = epsilon == 0.0;
            verdicts.push(v);
        }
        if let Some(iters) = block.mt_search_iterations {
            let alpha = 2.0 * std::f64::consts::PI * (2.0 - beta);
            let (mut v, best) =
                inequality::mt_lower_bound_search(grid, alpha, beta, iters).map_err(inequality_failure)?;
            v.params.insert("inner".into(), best.inner);
            v.params.insert("outer".into(), best.outer);
            v.params.insert("shape".into(), best.shape);
            verdicts.push(v);
        }
    }

    for &alpha in &block.k_alpha {
        let k = inequality::k_alpha_with(alpha, 20001).map_err(inequality_failure)?;
        verdicts.push(table_verdict(
            "k_alpha",
            k.value,
            1.0 / alpha,
            &[("alpha", alpha), ("argmax", k.argmax), ("window", k.window)],
            "sup over s of the remainder ratio".into(),
            0,
        ));
    }

    if let Nonlinearity::Power3D { p } = spec.kind() {
        if block.strichartz {
            let (q, r) = model::strichartz_pair(p, spec.b());
            if model::admissible_pair_check(q, r) {
                let sim_grid = config.simulation_grid().map_err(RunError::Config)?;
                let state = initial_state(config, sim_grid)?;
                let options = EvolveOptions::new(config.run.t_final)
                    .with_cfl(config.run.cfl)
                    .with_stride(config.run.snapshot_stride)
                    .storing_states();
                let traj = solver::evolve(&state, spec, &options).map_err(solver_failure)?;
                verdicts.push(inequality::strichartz_diagnostic(&traj, q, r).map_err(inequality_failure)?);
            } else {
                notes.push(format!("Strichartz diagnostic skipped: (q, r) = ({q}, {r}) is not admissible"));
            }
        }
    }

    let rows = verdicts.iter().map(verdict_row).collect::<Result<Vec<_>, _>>()?;
    dir.write_csv("verdicts.csv", &VERDICT_CSV_HEADER, rows)?;

    for v in &verdicts {
        println!("{:<20} ratio {:.6e}  {}", v.name, v.ratio, v.witness);
    }
    for n in &notes {
        println!("note: {n}");
    }
    let bad: Vec<String> = verdicts
        .iter()
        .filter(|v| v.in_regime && !(v.ratio.is_finite() && v.ratio >= 0.0))
        .map(|v| format!("{} with {:?}", v.name, v.params))
        .collect();
    let failure = (!bad.is_empty()).then(|| RunError::Gate(format!("non-finite ratio in regime: {}", bad.join("; "))));
    Ok(Outcome {
        summary: json!({
            "grid": grid_json(&grid),
            "verdicts": verdicts,
            "notes": notes,
        }),
        files: vec!["verdicts.csv".into()],
        failure,
    })
}
