use std::path::{Path, PathBuf};

use nrmhd::experiments::continuity::DEFAULT_SEED;
use nrmhd::experiments::ContinuityConfig;
use nrmhd::families::FamilyParams;
use nrmhd::verify::Profile;
use nrmhd::{Grid, SolveConfig};
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const CONFIG_KEYS: &str = "\
Config keys (JSON; every key optional, override with --set key=value):
  grid.d                 dimension, 2 or 3 (dynamic runs need 2)            [2]
  grid.N                 points per axis, even                               [512]
  grid.M                 box [0, 2πM)^d                                      [8]
  family.n               frequency n of the data family                      [8]
  family.omega           +1 or -1                                            [1]
  family.delta           envelope exponent δ in (0, 1/3)                     [0.25]
  family.s               regularity s > d/2                                  [2]
  solve.dt               time step                                           [0.01]
  solve.t_end            final time                                          [1]
  solve.cfl              advective safety factor in (0, 1]                   [0.5]
  solve.record_every     steps between recorded samples                      [1]
  solve.s                regularity of recorded norms                        [2]
  solve.magnetic_rhs     full | low_only                                     [full]
  solve.store_states     write MHDF1 snapshots at recorded samples           [false]
  experiment.n_list      solved n sweep (default depends on the experiment)  [null]
  experiment.static_n    n values of static initial distances               [4,8,16,32]
  experiment.times       residual sample times                               [0.25,0.5,0.75,1]
  experiment.alpha_list  phases α of the envelope asymptotics                [0,1]
  experiment.drift_t     time of the drift fit                               [0.5]
  experiment.eps0        largest perturbation size                           [0.01]
  experiment.levels      number of perturbation halvings                     [5]
  experiment.k_max       perturbation band 0 < |k| <= k_max                  [4]
  experiment.c           Gronwall constant (null: the locked value)          [null]
  experiment.profile     verify sizes: reduced | full                        [reduced]
  output_dir             directory for outputs                               [out]
  seed                   seed of all random data                             [24301]";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub d: usize,
    #[serde(rename = "N")]
    pub points: usize,
    #[serde(rename = "M")]
    pub m: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { d: 2, points: 512, m: 8.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FamilyConfig {
    pub n: u32,
    pub omega: i32,
    pub delta: f64,
    pub s: f64,
}

impl Default for FamilyConfig {
    fn default() -> Self {
        FamilyConfig {
            n: 8,
            omega: 1,
            delta: 0.25,
            s: 2.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n_list: Option<Vec<u32>>,
    pub static_n: Vec<u32>,
    pub times: Vec<f64>,
    pub alpha_list: Vec<f64>,
    pub drift_t: f64,
    pub eps0: f64,
    pub levels: usize,
    pub k_max: f64,
    pub c: Option<f64>,
    pub profile: Profile,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n_list: None,
            static_n: vec![4, 8, 16, 32],
            times: vec![0.25, 0.5, 0.75, 1.0],
            alpha_list: vec![0.0, 1.0],
            drift_t: 0.5,
            eps0: 1e-2,
            levels: 5,
            k_max: 4.0,
            c: None,
            profile: Profile::Reduced,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub family: FamilyConfig,
    pub solve: SolveConfig,
    pub experiment: ExperimentConfig,
    pub output_dir: PathBuf,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            grid: GridConfig::default(),
            family: FamilyConfig::default(),
            solve: SolveConfig::default(),
            experiment: ExperimentConfig::default(),
            output_dir: PathBuf::from("out"),
            seed: DEFAULT_SEED,
        }
    }
}

#[derive(Debug)]
pub enum ConfigError {
    /// Unreadable config file.
    Io(String),
    /// Malformed JSON, unknown keys or invalid values.
    Invalid(String),
}

impl RunConfig {
    /// Defaults, then the file (if any), then `--set` overrides in order.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut value = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| ConfigError::Io(format!("{}: {e}", p.display())))?;
                let file: RunConfig = serde_json::from_str(&text)
                    .map_err(|e| ConfigError::Invalid(format!("{}: {e}", p.display())))?;
                serde_json::to_value(file).expect("config serializes")
            }
            None => serde_json::to_value(RunConfig::default()).expect("config serializes"),
        };
        let mut problems = Vec::new();
        for o in overrides {
            if let Err(e) = apply_override(&mut value, o) {
                problems.push(e);
            }
        }
        if !problems.is_empty() {
            return Err(ConfigError::Invalid(problems.join("\n")));
        }
        serde_json::from_value(value).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn family_params(&self) -> FamilyParams {
        FamilyParams {
            d: self.grid.d,
            n: self.family.n,
            omega: self.family.omega,
            delta: self.family.delta,
            s: self.family.s,
        }
    }

    pub fn make_grid(&self) -> nrmhd::Result<Grid<f64>> {
        Grid::new(self.grid.d, self.grid.points, self.grid.m)
    }

    pub fn continuity(&self) -> ContinuityConfig {
        ContinuityConfig {
            base_n: self.family.n,
            eps0: self.experiment.eps0,
            levels: self.experiment.levels,
            k_max: self.experiment.k_max,
            seed: self.seed,
        }
    }

    /// Every violation of the preconditions of a run needing `ns` family members.
    pub fn problems(&self, ns: &[u32], dynamic: bool) -> Vec<String> {
        let mut out = Vec::new();
        let grid = match self.make_grid() {
            Ok(g) => Some(g),
            Err(e) => {
                out.push(format!("grid: {e}"));
                None
            }
        };
        let base = self.family_params();
        out.extend(base.problems().into_iter().map(|p| format!("family: {p}")));
        out.extend(self.solve.problems().into_iter().map(|p| format!("solve: {p}")));
        if dynamic && self.grid.d != 2 {
            out.push(format!("grid: time integration needs d = 2, got {}", self.grid.d));
        }
        if let Some(g) = &grid {
            if base.problems().is_empty() {
                for &n in ns {
                    if let Err(e) = base.with_n(n).check_on(g) {
                        out.push(format!("family n = {n}: {e}"));
                    }
                }
            }
        }
        out
    }
}

/// Set the dotted `key` of `value` to the JSON literal (or bare string) after `=`.
fn apply_override(value: &mut Value, item: &str) -> Result<(), String> {
    let (key, raw) = item
        .split_once('=')
        .ok_or_else(|| format!("--set {item}: expected key=value"))?;
    let parsed: Value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut slot = &mut *value;
    for part in key.split('.') {
        slot = slot
            .as_object_mut()
            .and_then(|m| m.get_mut(part))
            .ok_or_else(|| format!("--set {item}: unknown key {key}"))?;
    }
    *slot = parsed;
    Ok(())
}
