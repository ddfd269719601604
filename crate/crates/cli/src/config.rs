//! TOML experiment configuration: schema, defaults and validation.

use std::path::{Path, PathBuf};

use radwave_core::linearization::{GridPolicy, MAX_SNAPSHOT_STRIDE};
use radwave_core::model::{self, Nonlinearity};
use radwave_core::solver::MIN_SUPPORT_CELLS;
use radwave_core::{ModelSpec, RadialGrid};
use serde::{Deserialize, Serialize};

use crate::RunError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Validate,
    Simulate,
    Linearize,
    Inequalities,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Simulate => "simulate",
            Command::Linearize => "linearize",
            Command::Inequalities => "inequalities",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// When present it must match the command given on the command line;
    /// `validate` accepts any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(default)]
    pub allow_outside_theorems: bool,
    /// Run directory; `--out` takes precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub model: ModelSpec,
    #[serde(default)]
    pub run: RunBlock,
    #[serde(default)]
    pub data: DataBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inequalities: Option<InequalityBlock>,
}

/// Either `num_cells` (with `r_max`) or a target `dr`; a missing `r_max`
/// becomes `radius + T + 32 dr` rounded up to a whole cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_cells: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dr: Option<f64>,
}

pub const DEFAULT_DR: f64 = 2e-3;
/// Sub-threshold dispersive precursors of the discrete scheme run a few
/// cells ahead of the light cone.
const AUTO_WALL_CELLS: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunBlock {
    pub t_final: f64,
    pub cfl: f64,
    pub snapshot_stride: usize,
    /// Largest accepted relative energy drift.
    pub drift_gate: f64,
}

impl Default for RunBlock {
    fn default() -> Self {
        Self {
            t_final: 1.0,
            cfl: radwave_core::solver::DEFAULT_CFL,
            snapshot_stride: radwave_core::solver::DEFAULT_SNAPSHOT_STRIDE,
            drift_gate: radwave_core::linearization::DEFAULT_DRIFT_GATE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Bump,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataBlock {
    pub profile: Profile,
    pub amplitude: f64,
    pub velocity_amplitude: f64,
    pub radius: f64,
}

impl Default for DataBlock {
    fn default() -> Self {
        Self {
            profile: Profile::Bump,
            amplitude: 1.0,
            velocity_amplitude: 0.0,
            radius: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub n_list: Vec<u32>,
    #[serde(default = "default_cells_per_support")]
    pub cells_per_support: usize,
    #[serde(default = "default_max_spacing")]
    pub max_spacing: f64,
    /// Repeat the sweep on a doubled grid and report the relative change.
    #[serde(default)]
    pub check_convergence: bool,
}

fn default_cells_per_support() -> usize {
    GridPolicy::default().cells_per_support
}

fn default_max_spacing() -> f64 {
    GridPolicy::default().max_spacing
}

/// What the `inequalities` command evaluates. Two-dimensional items are
/// `None` by default and filled in for two-dimensional models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InequalityBlock {
    pub r_max: f64,
    pub num_cells: usize,
    /// `(theta, lambda)` pairs.
    pub gn: Vec<[f64; 2]>,
    pub k_alpha: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mt_alpha: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mt_beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub moser_n: Option<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub moser_epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mt_search_iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tech2d_alpha: Option<f64>,
    /// Three dimensions: evolve the data and compare both Strichartz sides.
    pub strichartz: bool,
}

impl Default for InequalityBlock {
    fn default() -> Self {
        Self {
            r_max: 1.25,
            num_cells: 5000,
            gn: vec![[0.0, 4.0], [1.0, 4.0]],
            k_alpha: vec![1.0, 2.0, 4.0, 8.0],
            mt_alpha: None,
            mt_beta: None,
            moser_n: None,
            moser_epsilon: None,
            mt_search_iterations: None,
            tech2d_alpha: None,
            strichartz: true,
        }
    }
}

impl InequalityBlock {
    pub fn mt_alpha(&self) -> Vec<f64> {
        self.mt_alpha.clone().unwrap_or_else(|| vec![1.0, 4.0, 8.0])
    }

    pub fn mt_beta(&self) -> f64 {
        self.mt_beta.unwrap_or(0.0)
    }

    pub fn moser_n(&self) -> Vec<u32> {
        self.moser_n.clone().unwrap_or_else(|| vec![4, 8, 16, 32, 64])
    }

    pub fn moser_epsilon(&self) -> f64 {
        self.moser_epsilon.unwrap_or(0.0)
    }

    pub fn tech2d_alpha(&self) -> f64 {
        self.tech2d_alpha.unwrap_or(4.0)
    }

    fn two_dimensional_keys(&self) -> Vec<&'static str> {
        let mut keys = Vec::new();
        if self.mt_alpha.is_some() {
            keys.push("mt_alpha");
        }
        if self.mt_beta.is_some() {
            keys.push("mt_beta");
        }
        if self.moser_n.is_some() {
            keys.push("moser_n");
        }
        if self.moser_epsilon.is_some() {
            keys.push("moser_epsilon");
        }
        if self.mt_search_iterations.is_some() {
            keys.push("mt_search_iterations");
        }
        if self.tech2d_alpha.is_some() {
            keys.push("tech2d_alpha");
        }
        keys
    }
}

/// Reads and validates a configuration file for `command`.
pub fn ingest(path: &Path, command: Command) -> Result<ExperimentConfig, RunError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| RunError::Config(format!("cannot read {}: {e}", path.display())))?;
    let config = parse(&text).map_err(|e| match e {
        RunError::Config(msg) => RunError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })?;
    config.validate(command)?;
    Ok(config)
}

/// Schema-level parse; unknown keys are errors carrying the line context.
pub fn parse(text: &str) -> Result<ExperimentConfig, RunError> {
    toml::from_str(text).map_err(|e| RunError::Config(e.to_string()))
}

pub fn to_toml(config: &ExperimentConfig) -> Result<String, RunError> {
    toml::to_string(config).map_err(|e| RunError::Config(e.to_string()))
}

impl ExperimentConfig {
    /// Collects every violation for `command`; the error lists them all.
    pub fn validate(&self, command: Command) -> Result<(), RunError> {
        let mut errors = Vec::new();
        if let Some(c) = self.command {
            if c != command && command != Command::Validate {
                errors.push(format!(
                    "config is for `{}` but `{}` was requested",
                    c.name(),
                    command.name()
                ));
            }
        }
        if !self.allow_outside_theorems {
            for v in model::validate_hypotheses(&self.model) {
                errors.push(format!("{v}; set allow_outside_theorems = true to run anyway"));
            }
        }
        let run = &self.run;
        if !(run.t_final.is_finite() && run.t_final > 0.0) {
            errors.push(format!("run.t_final = {} must be positive", run.t_final));
        }
        if run.snapshot_stride == 0 {
            errors.push("run.snapshot_stride must be >= 1".into());
        }
        if !(run.drift_gate > 0.0) {
            errors.push(format!("run.drift_gate = {} must be positive", run.drift_gate));
        }
        let data = &self.data;
        if !(data.radius.is_finite() && data.radius > 0.0) {
            errors.push(format!("data.radius = {} must be positive", data.radius));
        }
        if !(data.amplitude.is_finite() && data.velocity_amplitude.is_finite()) {
            errors.push("data amplitudes must be finite".into());
        }

        match command {
            Command::Validate => {}
            Command::Simulate => {
                if self.sweep.is_some() {
                    errors.push("[sweep] is only used by `linearize`".into());
                }
                if let Err(e) = self.simulation_grid() {
                    errors.push(e);
                }
            }
            Command::Linearize => {
                if self.grid.is_some() {
                    errors.push(
                        "[grid] is sized automatically for `linearize`; use sweep.cells_per_support and sweep.max_spacing"
                            .into(),
                    );
                }
                if run.snapshot_stride > MAX_SNAPSHOT_STRIDE {
                    errors.push(format!(
                        "run.snapshot_stride = {} exceeds {MAX_SNAPSHOT_STRIDE} for `linearize`",
                        run.snapshot_stride
                    ));
                }
                match &self.sweep {
                    None => errors.push("`linearize` requires a [sweep] block".into()),
                    Some(s) => {
                        if s.n_list.is_empty() || s.n_list.contains(&0) {
                            errors.push("sweep.n_list must be non-empty with entries >= 1".into());
                        }
                        if s.n_list.windows(2).any(|w| w[1] <= w[0]) {
                            errors.push(format!("sweep.n_list {:?} must be strictly increasing", s.n_list));
                        }
                        if (s.cells_per_support as f64) < MIN_SUPPORT_CELLS {
                            errors.push(format!(
                                "sweep.cells_per_support = {} is below {MIN_SUPPORT_CELLS}",
                                s.cells_per_support
                            ));
                        }
                        if !(s.max_spacing > 0.0) {
                            errors.push(format!("sweep.max_spacing = {} must be positive", s.max_spacing));
                        }
                    }
                }
            }
            Command::Inequalities => {
                let block = self.inequalities.clone().unwrap_or_default();
                if !(block.r_max > data.radius) {
                    errors.push(format!(
                        "inequalities.r_max = {} must exceed data.radius = {}",
                        block.r_max, data.radius
                    ));
                }
                if block.num_cells < radwave_core::grid::MIN_CELLS {
                    errors.push(format!("inequalities.num_cells = {} is too small", block.num_cells));
                }
                if self.model.dim() != 2 {
                    let keys = block.two_dimensional_keys();
                    if !keys.is_empty() {
                        errors.push(format!("{} only apply to two-dimensional models", keys.join(", ")));
                    }
                }
                if block.k_alpha.iter().any(|&a| !(a > 0.0)) {
                    errors.push("inequalities.k_alpha entries must be positive".into());
                }
                if self.model.dim() == 3
                    && block.strichartz
                    && matches!(self.model.kind(), Nonlinearity::Power3D { .. })
                {
                    if let Err(e) = self.simulation_grid() {
                        errors.push(e);
                    }
                }
            }
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(RunError::Config(errors.join("\n")))
        }
    }

    /// Grid for `simulate` and for the Strichartz evolution.
    pub fn simulation_grid(&self) -> Result<RadialGrid, String> {
        let dim = self.model.dim();
        let block = self.grid.clone().unwrap_or(GridBlock {
            r_max: None,
            num_cells: None,
            dr: Some(DEFAULT_DR),
        });
        let grid = match (block.r_max, block.num_cells, block.dr) {
            (Some(r_max), Some(cells), None) => RadialGrid::new(dim, r_max, cells),
            (r_max, None, Some(dr)) => {
                if !(dr > 0.0 && dr.is_finite()) {
                    return Err(format!("grid.dr = {dr} must be positive"));
                }
                let min_r_max = r_max.unwrap_or(
                    self.data.radius + self.run.t_final + AUTO_WALL_CELLS as f64 * dr,
                );
                RadialGrid::with_spacing(dim, min_r_max, dr)
            }
            _ => {
                return Err(
                    "[grid] needs either r_max with num_cells, or dr with an optional r_max".into(),
                )
            }
        }
        .map_err(|e| format!("grid: {e}"))?;
        if self.data.radius >= grid.r_max() {
            return Err(format!(
                "data.radius = {} must be below r_max = {}",
                self.data.radius,
                grid.r_max()
            ));
        }
        Ok(grid)
    }

    pub fn grid_policy(&self) -> GridPolicy {
        let sweep = self.sweep.clone();
        GridPolicy {
            cells_per_support: sweep.as_ref().map_or_else(default_cells_per_support, |s| s.cells_per_support),
            max_spacing: sweep.as_ref().map_or_else(default_max_spacing, |s| s.max_spacing),
            cfl: self.run.cfl,
            snapshot_stride: self.run.snapshot_stride,
            drift_gate: self.run.drift_gate,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const MINIMAL_2D: &str = r#"
[model]
dim = 2
b = 0.25
kind = "exp2d"

[sweep]
n_list = [1, 2, 4]
"#;

    #[test]
    fn minimal_linearize_config_is_valid() {
        let config = parse(MINIMAL_2D).unwrap();
        config.validate(Command::Linearize).unwrap();
        assert_eq!(config.model, ModelSpec::exp2d(0.25).unwrap());
        assert_eq!(config.run, RunBlock::default());
    }

    #[test]
    fn outside_theorem_range_is_rejected() {
        let text = "[model]\ndim = 3\nb = 0.5\nkind = \"power3d\"\np = 4.9\n";
        let err = parse(text).unwrap().validate(Command::Validate).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains(model::THEOREM_3D), "{msg}");
        assert!(msg.contains("p < 4 + b"), "{msg}");

        let allowed = format!("allow_outside_theorems = true\n{text}");
        parse(&allowed).unwrap().validate(Command::Validate).unwrap();
    }

    #[test]
    fn unknown_key_names_the_key() {
        let text = format!("{MINIMAL_2D}\n[run]\ndampening = 0.1\n");
        let msg = parse(&text).unwrap_err().to_string();
        assert!(msg.contains("dampening"), "{msg}");
        assert!(msg.contains("line"), "{msg}");
    }

    #[test]
    fn command_mismatch_is_rejected() {
        let text = format!("command = \"simulate\"\n{MINIMAL_2D}");
        let err = parse(&text).unwrap().validate(Command::Linearize).unwrap_err();
        assert!(err.to_string().contains("simulate"));
    }

    #[test]
    fn auto_grid_pads_past_the_cone() {
        let config = parse("[model]\ndim = 3\nb = 0.5\nkind = \"power3d\"\np = 3.8\n").unwrap();
        let g = config.simulation_grid().unwrap();
        assert!(g.r_max() >= 1.0 + 1.0 + 32.0 * DEFAULT_DR - 1e-12);
        assert!((g.spacing() - DEFAULT_DR).abs() < 1e-15);
    }

    #[test]
    fn two_dimensional_keys_rejected_in_three_dimensions() {
        let text = "[model]\ndim = 3\nb = 0.5\nkind = \"power3d\"\np = 3.8\n[inequalities]\nmoser_n = [4]\n";
        let err = parse(text).unwrap().validate(Command::Inequalities).unwrap_err();
        assert!(err.to_string().contains("moser_n"));
    }

    fn spec_strategy() -> impl Strategy<Value = ModelSpec> {
        prop_oneof![
            (0.0..=0.5f64).prop_map(|b| ModelSpec::exp2d(b).unwrap()),
            (0.01..1.0f64, 0.0..1.0f64)
                .prop_map(|(b, s)| ModelSpec::power3d(b, 1.0 + b + 2.99 * s).unwrap()),
            (2usize..=3).prop_map(|d| ModelSpec::linear(d, if d == 2 { 1.0 } else { 0.0 }).unwrap()),
        ]
    }

    fn config_strategy() -> impl Strategy<Value = ExperimentConfig> {
        let run = (0.1..5.0f64, 0.05..1.0f64, 1usize..20, 1e-8..1e-2f64).prop_map(|(t, c, s, g)| RunBlock {
            t_final: t,
            cfl: c,
            snapshot_stride: s,
            drift_gate: g,
        });
        let data = (-2.0..2.0f64, -1.0..1.0f64, 0.1..2.0f64).prop_map(|(a, v, r)| DataBlock {
            profile: Profile::Bump,
            amplitude: a,
            velocity_amplitude: v,
            radius: r,
        });
        let grid = proptest::option::of(prop_oneof![
            (1.0..10.0f64, 8usize..5000).prop_map(|(r, n)| GridBlock {
                r_max: Some(r),
                num_cells: Some(n),
                dr: None,
            }),
            (1e-4..1e-2f64).prop_map(|dr| GridBlock {
                r_max: None,
                num_cells: None,
                dr: Some(dr),
            }),
        ]);
        let sweep = proptest::option::of(
            (proptest::collection::btree_set(1u32..64, 1..6), 16usize..128, 1e-4..1e-2f64, any::<bool>()).prop_map(
                |(n, c, m, k)| SweepBlock {
                    n_list: n.into_iter().collect(),
                    cells_per_support: c,
                    max_spacing: m,
                    check_convergence: k,
                },
            ),
        );
        let ineq = proptest::option::of(
            (
                proptest::option::of(proptest::collection::vec(0.1..10.0f64, 0..4)),
                proptest::option::of(0.0..1.9f64),
                proptest::option::of(1usize..300),
                proptest::collection::vec((0.0..2.0f64, 2.0..6.0f64).prop_map(|(a, b)| [a, b]), 0..3),
                any::<bool>(),
            )
                .prop_map(|(mt_alpha, mt_beta, iters, gn, strichartz)| InequalityBlock {
                    gn,
                    mt_alpha,
                    mt_beta,
                    mt_search_iterations: iters,
                    strichartz,
                    ..InequalityBlock::default()
                }),
        );
        let command = proptest::option::of(prop_oneof![
            Just(Command::Validate),
            Just(Command::Simulate),
            Just(Command::Linearize),
            Just(Command::Inequalities),
        ]);
        (spec_strategy(), run, data, grid, sweep, ineq, command, any::<bool>()).prop_map(
            |(model, run, data, grid, sweep, inequalities, command, allow)| ExperimentConfig {
                command,
                allow_outside_theorems: allow,
                output: None,
                model,
                run,
                data,
                grid,
                sweep,
                inequalities,
            },
        )
    }

    proptest! {
        #[test]
        fn serialized_config_parses_back_unchanged(config in config_strategy()) {
            let text = to_toml(&config).unwrap();
            prop_assert_eq!(parse(&text).unwrap(), config, "{}", text);
        }
    }

    #[test]
    fn linearize_rejects_large_stride() {
        let text = format!("{MINIMAL_2D}\n[run]\nsnapshot_stride = 20\n");
        assert!(parse(&text).unwrap().validate(Command::Linearize).is_err());
    }
}
