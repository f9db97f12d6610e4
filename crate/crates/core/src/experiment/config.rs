use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{NetworkTopology, Transfer};
use crate::tasks::MultiFamily;
use crate::training::{LossKind, TrainingConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    BinaryReal,
    BinaryComplex,
    BinaryMixed,
    MultiState,
    GhzW,
    WernerClassify,
    TopologyAblation,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::BinaryReal,
        ExperimentKind::BinaryComplex,
        ExperimentKind::BinaryMixed,
        ExperimentKind::MultiState,
        ExperimentKind::GhzW,
        ExperimentKind::WernerClassify,
        ExperimentKind::TopologyAblation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::BinaryReal => "binary_real",
            ExperimentKind::BinaryComplex => "binary_complex",
            ExperimentKind::BinaryMixed => "binary_mixed",
            ExperimentKind::MultiState => "multi_state",
            ExperimentKind::GhzW => "ghz_w",
            ExperimentKind::WernerClassify => "werner_classify",
            ExperimentKind::TopologyAblation => "topology_ablation",
        }
    }

    fn default_shape(self) -> Option<&'static str> {
        match self {
            ExperimentKind::BinaryReal | ExperimentKind::BinaryComplex | ExperimentKind::BinaryMixed => Some("2-2-2"),
            ExperimentKind::GhzW => Some("8-2-2"),
            ExperimentKind::WernerClassify => Some("4-4-2"),
            ExperimentKind::MultiState | ExperimentKind::TopologyAblation => None,
        }
    }
}

/// Task trained by each shape of a topology ablation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AblationTask {
    BinaryReal,
    BinaryComplex,
    WernerClassify,
}

impl AblationTask {
    pub fn kind(self) -> ExperimentKind {
        match self {
            AblationTask::BinaryReal => ExperimentKind::BinaryReal,
            AblationTask::BinaryComplex => ExperimentKind::BinaryComplex,
            AblationTask::WernerClassify => ExperimentKind::WernerClassify,
        }
    }

    fn default_shapes(self) -> Vec<String> {
        let shapes: &[&str] = match self {
            AblationTask::BinaryReal | AblationTask::BinaryComplex => &["2-2", "2-2-2", "2-3-2", "2-2-2-2"],
            AblationTask::WernerClassify => &["4-2", "4-4-2", "4-5-2", "4-4-4-2"],
        };
        shapes.iter().map(|s| s.to_string()).collect()
    }
}

/// Layer shape such as `"2-2-2"`, optionally with explicit edge lists that
/// replace the standard ones.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologySpec {
    pub shape: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub forward_coupling: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian_edges: Option<Vec<(usize, usize)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lindblad_edges: Option<Vec<(usize, usize)>>,
}

impl TopologySpec {
    pub fn preset(shape: &str) -> Self {
        Self {
            shape: shape.to_string(),
            forward_coupling: false,
            hamiltonian_edges: None,
            lindblad_edges: None,
        }
    }

    pub fn build(&self) -> Result<NetworkTopology> {
        let sizes = NetworkTopology::parse_shape(&self.shape)?;
        let base = if self.forward_coupling {
            NetworkTopology::from_layers_with_forward_coupling(&sizes)?
        } else {
            NetworkTopology::from_layers(&sizes)?
        };
        if self.hamiltonian_edges.is_none() && self.lindblad_edges.is_none() {
            return Ok(base);
        }
        let ham = self.hamiltonian_edges.clone().unwrap_or_else(|| base.hamiltonian_edges().to_vec());
        let lind = match &self.lindblad_edges {
            Some(edges) => edges.iter().map(|&(from, to)| Transfer { from, to }).collect(),
            None => base.lindblad_edges().to_vec(),
        };
        NetworkTopology::new(sizes, ham, lind)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub learning_rate: Option<f64>,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default = "default_time")]
    pub evolution_time: f64,
    #[serde(default)]
    pub init_low: f64,
    #[serde(default = "default_init_high")]
    pub init_high: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss: Option<LossKind>,
}

fn default_iterations() -> usize {
    100
}

fn default_time() -> f64 {
    10.0
}

fn default_init_high() -> f64 {
    1.0
}

impl Default for TrainingSection {
    fn default() -> Self {
        Self {
            learning_rate: None,
            iterations: default_iterations(),
            evolution_time: default_time(),
            init_low: 0.0,
            init_high: default_init_high(),
            loss: None,
        }
    }
}

/// Kind-specific task parameters. Fields a kind does not use must be left out.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskParams {
    /// Angles θ or φ in radians.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angles: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs_per_radius: Option<usize>,
    /// Seed of the random mixed-state pairs, separate from the init seeds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampling_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_values: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub families: Option<Vec<MultiFamily>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_p: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_p: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ablation_task: Option<AblationTask>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shapes: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub training: TrainingSection,
    #[serde(default)]
    pub task: TaskParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topology: Option<TopologySpec>,
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub iterations: Option<usize>,
    pub learning_rate: Option<f64>,
    pub evolution_time: Option<f64>,
}

/// Angles `kπ/6` for `k = 0..12`.
pub fn default_angles() -> Vec<f64> {
    (0..12).map(|k| k as f64 * PI / 6.0).collect()
}

fn default_radii() -> Vec<f64> {
    (1..=9).map(|k| k as f64 / 10.0).collect()
}

fn require_absent<T>(field: &Option<T>, name: &str, kind: ExperimentKind) -> Result<()> {
    if field.is_some() {
        return Err(Error::config(name, format!("not used by {} experiments", kind.as_str())));
    }
    Ok(())
}

fn check_unit_interval(values: &[f64], name: &str) -> Result<()> {
    if values.is_empty() {
        return Err(Error::config(name, "must not be empty"));
    }
    if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::config(name, format!("value {v} outside [0, 1]")));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind) -> Self {
        Self {
            kind,
            seeds: default_seeds(),
            output: None,
            training: TrainingSection::default(),
            task: TaskParams::default(),
            topology: None,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config("config", e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| e.context(format!("reading {}", path.display())))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config("config", e.to_string()))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.seeds = vec![seed];
        }
        if let Some(out) = &o.output {
            self.output = Some(out.clone());
        }
        if let Some(n) = o.iterations {
            self.training.iterations = n;
        }
        if let Some(eta) = o.learning_rate {
            self.training.learning_rate = Some(eta);
        }
        if let Some(t) = o.evolution_time {
            self.training.evolution_time = t;
        }
    }

    /// Kind the sub-runs actually train: the ablation's task, or the kind itself.
    pub fn task_kind(&self) -> ExperimentKind {
        match (self.kind, self.task.ablation_task) {
            (ExperimentKind::TopologyAblation, Some(t)) => t.kind(),
            (ExperimentKind::TopologyAblation, None) => ExperimentKind::BinaryComplex,
            (k, _) => k,
        }
    }

    /// Copy with every default made explicit, after checking that each field
    /// the kind needs is present and valid and that no unused field is set.
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let mut c = self.clone();
        let kind = c.kind;
        let task_kind = c.task_kind();

        if c.seeds.is_empty() {
            return Err(Error::config("seeds", "must list at least one seed"));
        }
        let mut sorted = c.seeds.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::config("seeds", "contains duplicates"));
        }
        if c.output.is_none() {
            c.output = Some(PathBuf::from("results").join(kind.as_str()));
        }

        let t = &mut c.training;
        t.learning_rate.get_or_insert(if task_kind == ExperimentKind::BinaryReal { 10.0 } else { 20.0 });
        t.loss.get_or_insert(match task_kind {
            ExperimentKind::MultiState | ExperimentKind::WernerClassify => LossKind::MeanClassification,
            _ => LossKind::WeightedDiscrimination,
        });
        if t.iterations == 0 {
            return Err(Error::config("training.iterations", "must be >= 1"));
        }
        self.training_config_from(&c.training, 0)
            .validate()
            .map_err(|e| match e {
                Error::Config { field, message } => Error::config(format!("training.{field}"), message),
                other => other,
            })?;

        let p = &mut c.task;
        let uses_angles = matches!(task_kind, ExperimentKind::BinaryReal | ExperimentKind::BinaryComplex);
        let uses_werner = task_kind == ExperimentKind::WernerClassify;
        if uses_angles {
            let angles = p.angles.get_or_insert_with(default_angles);
            if angles.is_empty() {
                return Err(Error::config("task.angles", "must not be empty"));
            }
            if let Some(a) = angles.iter().find(|a| !a.is_finite()) {
                return Err(Error::config("task.angles", format!("angle {a} is not finite")));
            }
        } else {
            require_absent(&p.angles, "task.angles", kind)?;
        }
        if task_kind == ExperimentKind::BinaryMixed {
            check_unit_interval(p.radii.get_or_insert_with(default_radii), "task.radii")?;
            if *p.pairs_per_radius.get_or_insert(100) == 0 {
                return Err(Error::config("task.pairs_per_radius", "must be >= 1"));
            }
            p.sampling_seed.get_or_insert(0);
        } else {
            require_absent(&p.radii, "task.radii", kind)?;
            require_absent(&p.pairs_per_radius, "task.pairs_per_radius", kind)?;
            require_absent(&p.sampling_seed, "task.sampling_seed", kind)?;
        }
        if task_kind == ExperimentKind::MultiState {
            let ms = p.m_values.get_or_insert_with(|| vec![3, 4, 5]);
            if ms.is_empty() {
                return Err(Error::config("task.m_values", "must not be empty"));
            }
            if let Some(m) = ms.iter().find(|&&m| m < 2) {
                return Err(Error::config("task.m_values", format!("M = {m} is below 2")));
            }
            let fams = p.families.get_or_insert_with(|| vec![MultiFamily::Real, MultiFamily::Complex]);
            if fams.is_empty() {
                return Err(Error::config("task.families", "must not be empty"));
            }
        } else {
            require_absent(&p.m_values, "task.m_values", kind)?;
            require_absent(&p.families, "task.families", kind)?;
        }
        if uses_werner {
            check_unit_interval(p.train_p.get_or_insert_with(|| vec![0.0, 0.2, 0.4, 0.8]), "task.train_p")?;
            check_unit_interval(
                p.test_p.get_or_insert_with(|| (1..=49).map(|n| 0.02 * n as f64).collect()),
                "task.test_p",
            )?;
        } else {
            require_absent(&p.train_p, "task.train_p", kind)?;
            require_absent(&p.test_p, "task.test_p", kind)?;
        }

        let state_dim = match task_kind {
            ExperimentKind::GhzW => 8,
            ExperimentKind::WernerClassify => 4,
            _ => 2,
        };
        if kind == ExperimentKind::TopologyAblation {
            require_absent(&c.topology, "topology", kind)?;
            let task = *p.ablation_task.get_or_insert(AblationTask::BinaryComplex);
            let shapes = p.shapes.get_or_insert_with(|| task.default_shapes());
            if shapes.is_empty() {
                return Err(Error::config("task.shapes", "must not be empty"));
            }
            for s in shapes.iter() {
                check_shape(&TopologySpec::preset(s), state_dim, "task.shapes")?;
            }
        } else {
            require_absent(&p.ablation_task, "task.ablation_task", kind)?;
            require_absent(&p.shapes, "task.shapes", kind)?;
            match kind.default_shape() {
                Some(shape) => {
                    let spec = c.topology.get_or_insert_with(|| TopologySpec::preset(shape));
                    check_shape(spec, state_dim, "topology")?;
                }
                None => require_absent(&c.topology, "topology", kind)?,
            }
        }
        Ok(c)
    }

    /// Training settings for one sub-run; call on a resolved config.
    pub fn training_config(&self, seed: u64) -> TrainingConfig {
        self.training_config_from(&self.training, seed)
    }

    fn training_config_from(&self, t: &TrainingSection, seed: u64) -> TrainingConfig {
        TrainingConfig {
            learning_rate: t.learning_rate.unwrap_or(f64::NAN),
            iterations: t.iterations,
            evolution_time: t.evolution_time,
            seed,
            init_low: t.init_low,
            init_high: t.init_high,
            loss: t.loss.unwrap_or(LossKind::WeightedDiscrimination),
        }
    }
}

fn check_shape(spec: &TopologySpec, state_dim: usize, field: &str) -> Result<()> {
    let topo = spec.build().map_err(|e| Error::config(field, e.to_string()))?;
    if topo.input_size() != state_dim {
        return Err(Error::config(
            field,
            format!("{} has {} input neurons, states have dimension {state_dim}", spec.shape, topo.input_size()),
        ));
    }
    if topo.output_size() != 2 {
        return Err(Error::config(field, format!("{} must end in 2 output neurons", spec.shape)));
    }
    Ok(())
}
