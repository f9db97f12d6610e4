use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{ExperimentConfig, ExperimentKind, TopologySpec};
use crate::error::{Error, Result};
use crate::network::{NetworkTopology, ParameterVector};
use crate::tasks::{
    build_multi_state_set, build_training_set, build_werner_sets, entanglement_label, multi_state_topology,
    sample_mixed_pairs, EntanglementClass, PairFamily, StatePairSpec, WernerSetSpec,
};
use crate::training::{evaluate, train, LabeledSample, LossKind, TrainingTrace};

/// Held-out states and their mixing weights `p`.
#[derive(Clone, Debug)]
pub struct TestSet {
    pub samples: Vec<LabeledSample>,
    pub p_values: Vec<f64>,
}

/// One training job: a topology, a training set, and an init seed.
#[derive(Clone, Debug)]
pub struct SubRunPlan {
    pub run: usize,
    pub group: String,
    pub setting: String,
    pub seed: u64,
    pub topology: NetworkTopology,
    pub train: Vec<LabeledSample>,
    pub helstrom: Option<f64>,
    pub test: Option<TestSet>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateReport {
    pub p: f64,
    pub raw_separable: f64,
    pub raw_entangled: f64,
    pub p_separable: f64,
    pub p_entangled: f64,
    pub truth: EntanglementClass,
    pub predicted: EntanglementClass,
}

impl StateReport {
    /// Normalized probability assigned to the true class.
    pub fn success(&self) -> f64 {
        match self.truth {
            EntanglementClass::Separable => self.p_separable,
            EntanglementClass::Entangled => self.p_entangled,
        }
    }
}

/// Class-conditional mean of the normalized output probabilities. Row 0 is
/// the true separable class, row 1 the true entangled class; column order
/// is (predict separable, predict entangled). Rows without test states are NaN.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfusionMatrix {
    pub rows: [[f64; 2]; 2],
    pub counts: [usize; 2],
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassifierReport {
    pub states: Vec<StateReport>,
    pub confusion: ConfusionMatrix,
}

impl ClassifierReport {
    pub fn correct(&self) -> usize {
        self.states.iter().filter(|s| s.truth == s.predicted).count()
    }
}

/// Scores a two-output classifier on states labelled by `p ≤ 1/3`.
pub fn evaluate_classifier(
    topo: &NetworkTopology,
    params: &ParameterVector,
    test: &[LabeledSample],
    p_values: &[f64],
    evolution_time: f64,
) -> Result<ClassifierReport> {
    params.check_against(topo)?;
    if test.len() != p_values.len() {
        return Err(Error::Dimension(format!("{} test states but {} p values", test.len(), p_values.len())));
    }
    if topo.output_size() != 2 {
        return Err(Error::Topology(format!("classifier needs 2 outputs, {} has {}", topo.shape_name(), topo.output_size())));
    }
    let s_idx = topo.output_neurons().start;
    let eval = evaluate(topo, params, test, evolution_time, LossKind::MeanClassification)?;

    let mut sums = [[0.0; 2]; 2];
    let mut counts = [0usize; 2];
    let states: Vec<StateReport> = eval
        .outputs
        .iter()
        .zip(p_values)
        .map(|(out, &p)| {
            let raw_s = out.population(s_idx).max(0.0);
            let raw_e = out.population(s_idx + 1).max(0.0);
            let mass = raw_s + raw_e;
            let (ps, pe) = if mass > 0.0 { (raw_s / mass, raw_e / mass) } else { (0.5, 0.5) };
            let truth = entanglement_label(p);
            let predicted = if ps >= pe { EntanglementClass::Separable } else { EntanglementClass::Entangled };
            let row = truth.output_offset();
            sums[row][0] += ps;
            sums[row][1] += pe;
            counts[row] += 1;
            StateReport {
                p,
                raw_separable: raw_s,
                raw_entangled: raw_e,
                p_separable: ps,
                p_entangled: pe,
                truth,
                predicted,
            }
        })
        .collect();
    let mut rows = [[f64::NAN; 2]; 2];
    for r in 0..2 {
        if counts[r] > 0 {
            rows[r] = [sums[r][0] / counts[r] as f64, sums[r][1] / counts[r] as f64];
        }
    }
    Ok(ClassifierReport {
        states,
        confusion: ConfusionMatrix { rows, counts },
    })
}

#[derive(Clone, Debug)]
pub struct SubRunResult {
    pub run: usize,
    pub group: String,
    pub setting: String,
    pub seed: u64,
    pub topology: NetworkTopology,
    pub helstrom: Option<f64>,
    /// Target output neuron of each training sample.
    pub labels: Vec<usize>,
    pub trace: TrainingTrace,
    pub classifier: Option<ClassifierReport>,
}

impl SubRunResult {
    pub fn final_success(&self) -> f64 {
        self.trace.final_record().average_success
    }
}

/// Mean and population variance of the success probability across the
/// sub-runs of one group at one iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct AggregateRow {
    pub group: String,
    pub iteration: usize,
    pub count: usize,
    pub mean_success: f64,
    pub variance_success: f64,
    pub mean_helstrom: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct ExperimentResults {
    /// Fully resolved configuration the runs were produced from.
    pub config: ExperimentConfig,
    pub runs: Vec<SubRunResult>,
}

impl ExperimentResults {
    /// Group names in first-seen order.
    pub fn groups(&self) -> Vec<String> {
        let mut groups: Vec<String> = Vec::new();
        for r in &self.runs {
            if !groups.contains(&r.group) {
                groups.push(r.group.clone());
            }
        }
        groups
    }

    pub fn runs_in<'a>(&'a self, group: &'a str) -> impl Iterator<Item = &'a SubRunResult> + 'a {
        self.runs.iter().filter(move |r| r.group == group)
    }

    pub fn aggregate(&self) -> Vec<AggregateRow> {
        let mut rows = Vec::new();
        for group in self.groups() {
            let runs: Vec<_> = self.runs_in(&group).collect();
            let n = runs.len();
            let helstrom: Option<Vec<f64>> = runs.iter().map(|r| r.helstrom).collect();
            let mean_helstrom = helstrom.map(|h| h.iter().sum::<f64>() / n as f64);
            let iterations = runs.iter().map(|r| r.trace.records.len()).min().unwrap_or(0);
            for i in 0..iterations {
                let vals: Vec<f64> = runs.iter().map(|r| r.trace.records[i].average_success).collect();
                let mean = vals.iter().sum::<f64>() / n as f64;
                let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
                rows.push(AggregateRow {
                    group: group.clone(),
                    iteration: i,
                    count: n,
                    mean_success: mean,
                    variance_success: var,
                    mean_helstrom,
                });
            }
        }
        rows
    }

    /// Mean final success per group.
    pub fn group_final_means(&self) -> Vec<(String, f64)> {
        self.groups()
            .into_iter()
            .map(|g| {
                let v: Vec<f64> = self.runs_in(&g).map(|r| r.final_success()).collect();
                let m = v.iter().sum::<f64>() / v.len() as f64;
                (g, m)
            })
            .collect()
    }
}

fn angle_label(x: f64) -> String {
    format!("{x}")
}

fn binary_plans(
    kind: ExperimentKind,
    angles: &[f64],
    topo: &NetworkTopology,
    group: &str,
    seeds: &[u64],
    plans: &mut Vec<SubRunPlan>,
) -> Result<()> {
    for &x in angles {
        let family = match kind {
            ExperimentKind::BinaryReal => PairFamily::RealPure { theta: x },
            _ => PairFamily::ComplexPure { phi: x },
        };
        let spec = StatePairSpec::equal_priors(family);
        let train = build_training_set(&spec, topo)?;
        let helstrom = spec.helstrom()?;
        for &seed in seeds {
            plans.push(SubRunPlan {
                run: plans.len(),
                group: group.to_string(),
                setting: angle_label(x),
                seed,
                topology: topo.clone(),
                train: train.clone(),
                helstrom: Some(helstrom),
                test: None,
            });
        }
    }
    Ok(())
}

fn werner_plans(
    config: &ExperimentConfig,
    topo: &NetworkTopology,
    group: &str,
    plans: &mut Vec<SubRunPlan>,
) -> Result<()> {
    let spec = WernerSetSpec {
        train_p: config.task.train_p.clone().unwrap_or_default(),
        test_p: config.task.test_p.clone().unwrap_or_default(),
        ..WernerSetSpec::default()
    };
    let sets = build_werner_sets(&spec, topo)?;
    for &seed in &config.seeds {
        plans.push(SubRunPlan {
            run: plans.len(),
            group: group.to_string(),
            setting: String::new(),
            seed,
            topology: topo.clone(),
            train: sets.train.clone(),
            helstrom: None,
            test: Some(TestSet {
                samples: sets.test.clone(),
                p_values: sets.test_p.clone(),
            }),
        });
    }
    Ok(())
}

/// Expands a resolved configuration into independent training jobs.
pub fn plan_runs(config: &ExperimentConfig) -> Result<Vec<SubRunPlan>> {
    let c = config;
    let mut plans = Vec::new();
    let topology = || -> Result<NetworkTopology> {
        c.topology
            .as_ref()
            .ok_or_else(|| Error::config("topology", "missing; resolve the config first"))?
            .build()
    };
    let angles = c.task.angles.clone().unwrap_or_default();
    match c.kind {
        ExperimentKind::BinaryReal => binary_plans(c.kind, &angles, &topology()?, "real", &c.seeds, &mut plans)?,
        ExperimentKind::BinaryComplex => {
            binary_plans(c.kind, &angles, &topology()?, "complex", &c.seeds, &mut plans)?
        }
        ExperimentKind::BinaryMixed => {
            let topo = topology()?;
            let radii = c.task.radii.clone().unwrap_or_default();
            let count = c.task.pairs_per_radius.unwrap_or(0);
            let mut rng = ChaCha8Rng::seed_from_u64(c.task.sampling_seed.unwrap_or(0));
            for (ri, &r) in radii.iter().enumerate() {
                rng.set_stream(ri as u64);
                rng.set_word_pos(0);
                for (pi, spec) in sample_mixed_pairs(r, count, &mut rng)?.into_iter().enumerate() {
                    let train = build_training_set(&spec, &topo)?;
                    let helstrom = spec.helstrom()?;
                    for &seed in &c.seeds {
                        plans.push(SubRunPlan {
                            run: plans.len(),
                            group: format!("r={r}"),
                            setting: format!("pair={pi}"),
                            seed,
                            topology: topo.clone(),
                            train: train.clone(),
                            helstrom: Some(helstrom),
                            test: None,
                        });
                    }
                }
            }
        }
        ExperimentKind::MultiState => {
            for &family in c.task.families.as_deref().unwrap_or_default() {
                for &m in c.task.m_values.as_deref().unwrap_or_default() {
                    let topo = multi_state_topology(m)?;
                    let train = build_multi_state_set(family, m, &topo)?;
                    for &seed in &c.seeds {
                        plans.push(SubRunPlan {
                            run: plans.len(),
                            group: format!("{}/M={m}", family.as_str()),
                            setting: String::new(),
                            seed,
                            topology: topo.clone(),
                            train: train.clone(),
                            helstrom: None,
                            test: None,
                        });
                    }
                }
            }
        }
        ExperimentKind::GhzW => {
            let topo = topology()?;
            let spec = StatePairSpec::equal_priors(PairFamily::GhzW);
            let train = build_training_set(&spec, &topo)?;
            let helstrom = spec.helstrom()?;
            for &seed in &c.seeds {
                plans.push(SubRunPlan {
                    run: plans.len(),
                    group: "ghz_w".into(),
                    setting: String::new(),
                    seed,
                    topology: topo.clone(),
                    train: train.clone(),
                    helstrom: Some(helstrom),
                    test: None,
                });
            }
        }
        ExperimentKind::WernerClassify => werner_plans(c, &topology()?, "werner", &mut plans)?,
        ExperimentKind::TopologyAblation => {
            let task = c.task_kind();
            for shape in c.task.shapes.as_deref().unwrap_or_default() {
                let topo = TopologySpec::preset(shape).build()?;
                match task {
                    ExperimentKind::WernerClassify => werner_plans(c, &topo, shape, &mut plans)?,
                    _ => binary_plans(task, &angles, &topo, shape, &c.seeds, &mut plans)?,
                }
            }
        }
    }
    Ok(plans)
}

pub fn run_plan(config: &ExperimentConfig, plan: &SubRunPlan) -> Result<SubRunResult> {
    let context = || {
        let setting = if plan.setting.is_empty() { String::new() } else { format!(" {}", plan.setting) };
        format!("run {} ({}{setting}, seed {})", plan.run, plan.group, plan.seed)
    };
    let tc = config.training_config(plan.seed);
    let trace = train(&plan.topology, &plan.train, &tc).map_err(|e| e.context(context()))?;
    let classifier = plan
        .test
        .as_ref()
        .map(|t| evaluate_classifier(&plan.topology, &trace.final_params, &t.samples, &t.p_values, tc.evolution_time))
        .transpose()
        .map_err(|e| e.context(context()))?;
    Ok(SubRunResult {
        run: plan.run,
        group: plan.group.clone(),
        setting: plan.setting.clone(),
        seed: plan.seed,
        topology: plan.topology.clone(),
        helstrom: plan.helstrom,
        labels: plan.train.iter().map(|s| s.label).collect(),
        trace,
        classifier,
    })
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResults> {
    run_experiment_with_progress(config, |_, _, _| {})
}

/// Runs every sub-run in order, calling `progress(done, total, result)` after each.
pub fn run_experiment_with_progress(
    config: &ExperimentConfig,
    mut progress: impl FnMut(usize, usize, &SubRunResult),
) -> Result<ExperimentResults> {
    let config = config.resolve()?;
    let plans = plan_runs(&config)?;
    let mut runs = Vec::with_capacity(plans.len());
    for plan in &plans {
        let result = run_plan(&config, plan)?;
        progress(runs.len() + 1, plans.len(), &result);
        runs.push(result);
    }
    Ok(ExperimentResults { config, runs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::DensityMatrix;

    #[test]
    fn plan_counts() {
        let c = ExperimentConfig::new(ExperimentKind::BinaryReal).resolve().unwrap();
        assert_eq!(plan_runs(&c).unwrap().len(), 12);

        let mut c = ExperimentConfig::new(ExperimentKind::BinaryMixed);
        c.task.radii = Some(vec![0.1, 0.5]);
        c.task.pairs_per_radius = Some(3);
        c.seeds = vec![0, 1];
        assert_eq!(plan_runs(&c.resolve().unwrap()).unwrap().len(), 12);

        let c = ExperimentConfig::new(ExperimentKind::MultiState).resolve().unwrap();
        assert_eq!(plan_runs(&c).unwrap().len(), 6);

        let c = ExperimentConfig::new(ExperimentKind::TopologyAblation).resolve().unwrap();
        let plans = plan_runs(&c).unwrap();
        assert_eq!(plans.len(), 48);
        assert_eq!(plans[0].topology.shape_name(), "2-2");
        assert!(plans.iter().enumerate().all(|(i, p)| p.run == i));

        let c = ExperimentConfig::new(ExperimentKind::GhzW).resolve().unwrap();
        let plans = plan_runs(&c).unwrap();
        assert_eq!(plans.len(), 1);
        assert!((plans[0].helstrom.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mixed_pairs_do_not_depend_on_other_radii() {
        let mut a = ExperimentConfig::new(ExperimentKind::BinaryMixed);
        a.task.radii = Some(vec![0.1, 0.5]);
        a.task.pairs_per_radius = Some(2);
        let mut b = a.clone();
        b.task.pairs_per_radius = Some(4);
        let pa = plan_runs(&a.resolve().unwrap()).unwrap();
        let pb = plan_runs(&b.resolve().unwrap()).unwrap();
        assert_eq!(pa[0].train, pb[0].train);
        assert_eq!(pa[2].train, pb[4].train);
    }

    fn classifier_fixture(mass_to_separable: bool) -> ClassifierReport {
        // 4-2 network with only input -> output transfers, all into one neuron.
        let topo = NetworkTopology::standard(4, &[], 2).unwrap();
        let mut params = ParameterVector::zeros(&topo);
        for (k, e) in topo.lindblad_edges().iter().enumerate() {
            let target = if mass_to_separable { 4 } else { 5 };
            params.gamma[k] = if e.to == target { 2.0 } else { 0.0 };
        }
        let spec = WernerSetSpec::default();
        let sets = build_werner_sets(&spec, &topo).unwrap();
        evaluate_classifier(&topo, &params, &sets.test, &sets.test_p, 10.0).unwrap()
    }

    #[test]
    fn confusion_rows_for_a_fixed_router() {
        let report = classifier_fixture(true);
        assert_eq!(report.confusion.counts, [16, 33]);
        let [s, e] = report.confusion.rows;
        assert!((s[0] - 1.0).abs() < 1e-9 && s[1].abs() < 1e-9);
        assert!((e[0] - 1.0).abs() < 1e-9);
        assert_eq!(report.correct(), 16);
        for row in report.confusion.rows {
            assert!((row[0] + row[1] - 1.0).abs() < 1e-9);
        }
        let report = classifier_fixture(false);
        assert_eq!(report.correct(), 33);
    }

    #[test]
    fn symmetric_network_splits_evenly() {
        let topo = NetworkTopology::standard(4, &[], 2).unwrap();
        let mut params = ParameterVector::zeros(&topo);
        params.gamma.iter_mut().for_each(|g| *g = 1.0);
        let sets = build_werner_sets(&WernerSetSpec::default(), &topo).unwrap();
        let report = evaluate_classifier(&topo, &params, &sets.test, &sets.test_p, 10.0).unwrap();
        for row in report.confusion.rows {
            assert!((row[0] - 0.5).abs() < 1e-9 && (row[1] - 0.5).abs() < 1e-9);
        }
    }

    #[test]
    fn classifier_rejects_mismatched_inputs() {
        let topo = NetworkTopology::standard(4, &[], 2).unwrap();
        let params = ParameterVector::zeros(&topo);
        let s = LabeledSample {
            rho_in: DensityMatrix::maximally_mixed(6),
            label: 4,
            weight: 1.0,
        };
        assert!(evaluate_classifier(&topo, &params, &[s], &[0.1, 0.2], 10.0).is_err());
        let wrong = ParameterVector::new(vec![], vec![]).unwrap();
        assert!(evaluate_classifier(&topo, &wrong, &[], &[], 10.0).is_err());
    }
}
