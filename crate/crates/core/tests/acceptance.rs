//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails. Pass criterion numbers to run a subset:
//! `cargo test -p qsnn --release --test acceptance -- 4 8`.

mod common;

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use common::{central_difference, random_density, random_params, random_samples, relative_error};
use qsnn::experiment::{
    emit_outputs, replay, run_experiment, ExperimentConfig, ExperimentKind, ExperimentResults, MANIFEST_FILE,
};
use qsnn::liouvillian::{assemble, evolve};
use qsnn::network::{encode_input, NetworkTopology, ParameterVector};
use qsnn::tasks::MultiFamily;
use qsnn::tensor::{hermitian_eigenvalues, DensityMatrix};
use qsnn::training::{loss_gradient, LossKind, TrainingConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Experiment results shared between criteria.
#[derive(Default)]
struct Runs {
    done: BTreeMap<&'static str, ExperimentResults>,
}

impl Runs {
    fn get(&mut self, key: &'static str, make: impl FnOnce() -> ExperimentConfig) -> &ExperimentResults {
        self.done
            .entry(key)
            .or_insert_with(|| run_experiment(&make()).unwrap_or_else(|e| panic!("{key}: {e}")))
    }
}

fn config(kind: ExperimentKind, seeds: &[u64], iterations: usize) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(kind);
    c.seeds = seeds.to_vec();
    c.training.iterations = iterations;
    c
}

fn binary_real(runs: &mut Runs) -> &ExperimentResults {
    runs.get("binary_real", || {
        let mut c = config(ExperimentKind::BinaryReal, &[0, 1, 2], 100);
        c.training.learning_rate = Some(10.0);
        c
    })
}

fn binary_complex(runs: &mut Runs) -> &ExperimentResults {
    runs.get("binary_complex", || {
        let mut c = config(ExperimentKind::BinaryComplex, &[0, 1, 2], 100);
        c.training.learning_rate = Some(20.0);
        c
    })
}

fn binary_mixed(runs: &mut Runs) -> &ExperimentResults {
    runs.get("binary_mixed", || {
        let mut c = config(ExperimentKind::BinaryMixed, &[0], 100);
        c.task.radii = Some(vec![0.1, 0.5, 0.9]);
        c.task.pairs_per_radius = Some(10);
        c
    })
}

fn ghz_w(runs: &mut Runs) -> &ExperimentResults {
    runs.get("ghz_w", || config(ExperimentKind::GhzW, &[0], 50))
}

fn werner(runs: &mut Runs) -> &ExperimentResults {
    runs.get("werner", || config(ExperimentKind::WernerClassify, &[0, 1, 2, 3, 4], 100))
}

fn ablation(runs: &mut Runs) -> &ExperimentResults {
    runs.get("ablation", || config(ExperimentKind::TopologyAblation, &[0], 100))
}

fn ablation_real(runs: &mut Runs) -> &ExperimentResults {
    runs.get("ablation_real", || {
        let mut c = config(ExperimentKind::TopologyAblation, &[0], 100);
        c.task.ablation_task = Some(qsnn::experiment::AblationTask::BinaryReal);
        c.task.shapes = Some(vec!["2-2".into(), "2-2-2".into()]);
        c
    })
}

fn multi(runs: &mut Runs) -> &ExperimentResults {
    runs.get("multi", || {
        let mut c = config(ExperimentKind::MultiState, &[0], 100);
        c.task.m_values = Some(vec![3, 4, 5]);
        c.task.families = Some(vec![MultiFamily::Real, MultiFamily::Complex]);
        c
    })
}

/// Final success and Helstrom value for each angle, one entry per seed.
fn per_setting(results: &ExperimentResults) -> BTreeMap<String, (f64, Vec<f64>)> {
    let mut map: BTreeMap<String, (f64, Vec<f64>)> = BTreeMap::new();
    for r in &results.runs {
        let e = map.entry(r.setting.clone()).or_insert((r.helstrom.unwrap(), Vec::new()));
        e.1.push(r.final_success());
    }
    map
}

fn mean(v: impl IntoIterator<Item = f64>) -> f64 {
    let v: Vec<f64> = v.into_iter().collect();
    v.iter().sum::<f64>() / v.len() as f64
}

fn c1_gradient(_: &mut Runs) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for topo in [NetworkTopology::standard(2, &[2], 2).unwrap(), NetworkTopology::standard(4, &[4], 2).unwrap()] {
        for draw in 0..20 {
            let params = random_params(&topo, &mut rng);
            let samples = random_samples(&topo, rng.gen_range(1..=4), &mut rng);
            let kind = if draw % 2 == 0 { LossKind::WeightedDiscrimination } else { LossKind::MeanClassification };
            let config = TrainingConfig::new(10.0, 1, kind);
            let g = loss_gradient(&topo, &params, &samples, &config).unwrap();
            let fd = central_difference(&topo, &params, &samples, &config, 1e-5);
            worst = worst.max(relative_error(&g, &fd));
        }
    }
    outcome(worst <= 1e-5, format!("max relative error {worst:.2e} over 40 draws on 2-2-2 and 4-4-2 (limit 1e-5)"))
}

fn c2_physicality(_: &mut Runs) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let (mut trace_dev, mut min_eig, mut herm_dev) = (0.0f64, f64::INFINITY, 0.0f64);
    for draw in 0..100 {
        let topo = if draw % 2 == 0 {
            NetworkTopology::standard(2, &[2], 2).unwrap()
        } else {
            NetworkTopology::standard(4, &[4], 2).unwrap()
        };
        let params = random_params(&topo, &mut rng);
        let t = rng.gen_range(0.5..15.0);
        let rho = encode_input(&random_density(topo.input_size(), &mut rng), topo.dim()).unwrap();
        let out = evolve(&assemble(&topo, &params, t).unwrap(), &rho).unwrap();
        let m = out.matrix();
        trace_dev = trace_dev.max((m.trace() - 1.0).norm());
        min_eig = min_eig.min(hermitian_eigenvalues(m).unwrap()[0]);
        herm_dev = herm_dev.max(m.hermitian_deviation());
    }
    outcome(
        trace_dev <= 1e-9 && min_eig >= -1e-9 && herm_dev <= 1e-10,
        format!("over 100 draws: |Tr-1| {trace_dev:.1e}, min eigenvalue {min_eig:.1e}, Hermiticity {herm_dev:.1e}"),
    )
}

fn c3_decay(_: &mut Runs) -> Outcome {
    let topo = NetworkTopology::from_layers(&[1, 1]).unwrap();
    let params = ParameterVector::new(vec![], vec![0.5]).unwrap();
    let out = evolve(&assemble(&topo, &params, 10.0).unwrap(), &DensityMatrix::basis(2, 0).unwrap()).unwrap();
    let err = (out.population(0) - (-2.5f64).exp()).abs();
    outcome(err <= 1e-8, format!("rho_00 = {:.12}, e^-2.5 = {:.12}, error {err:.1e}", out.population(0), (-2.5f64).exp()))
}

fn c4_binary_real(runs: &mut Runs) -> Outcome {
    let res = binary_real(runs);
    let pn = mean(res.runs.iter().map(|r| r.final_success()));
    let ph = mean(res.runs.iter().map(|r| r.helstrom.unwrap()));
    let worst = per_setting(res)
        .values()
        .map(|(h, v)| v.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - h)
        .fold(f64::INFINITY, f64::min);
    outcome(
        pn >= ph - 0.02 && worst >= -0.03,
        format!("mean P_N {pn:.4} vs mean P_H {ph:.4} (need >= P_H - 0.02); worst best-seed P_N - P_H {worst:.4} (need >= -0.03)"),
    )
}

fn c5_binary_complex(runs: &mut Runs) -> Outcome {
    let res = binary_complex(runs);
    let worst = per_setting(res)
        .values()
        .map(|(h, v)| v.iter().cloned().fold(f64::NEG_INFINITY, f64::max) / h)
        .fold(f64::INFINITY, f64::min);
    let pn = mean(res.runs.iter().map(|r| r.final_success()));
    let ph = mean(res.runs.iter().map(|r| r.helstrom.unwrap()));
    outcome(
        worst >= 0.91,
        format!("worst per-phase best-seed P_N / P_H {worst:.4} (need >= 0.91); mean P_N {pn:.4}, mean P_H {ph:.4}"),
    )
}

fn c6_mixed(runs: &mut Runs) -> Outcome {
    let res = binary_mixed(runs);
    let mut pass = true;
    let mut parts = Vec::new();
    for g in res.groups() {
        let pn = mean(res.runs_in(&g).map(|r| r.final_success()));
        let ph = mean(res.runs_in(&g).map(|r| r.helstrom.unwrap()));
        pass &= pn >= ph - 0.05;
        parts.push(format!("{g}: {pn:.4}/{ph:.4}"));
    }
    outcome(pass, format!("mean P_N / mean P_H per radius, 10 pairs each: {} (need gap <= 0.05)", parts.join(", ")))
}

fn c7_ghz(runs: &mut Runs) -> Outcome {
    let r = &ghz_w(runs).runs[0];
    let p = r.final_success();
    outcome(p >= 0.99, format!("8-2-2 after 50 iterations: P_N {p:.4}, P_H {:.4} (need P_N >= 0.99)", r.helstrom.unwrap()))
}

fn c8_werner(runs: &mut Runs) -> Outcome {
    let res = werner(runs);
    let reports: Vec<_> = res.runs.iter().map(|r| r.classifier.as_ref().unwrap()).collect();
    let strict_correct: Vec<usize> = reports
        .iter()
        .map(|c| c.states.iter().filter(|s| s.success() > 1.0 - s.success()).count())
        .collect();
    let mut sorted = strict_correct.clone();
    sorted.sort_unstable();
    let median = sorted[sorted.len() / 2];
    let all_on_some_seed = strict_correct.iter().any(|&c| c == 49);
    let sep = mean(reports.iter().map(|c| c.confusion.rows[0][0]));
    let ent = mean(reports.iter().map(|c| c.confusion.rows[1][1]));
    let quantitative = (sep - 0.62).abs() <= 0.08 && (ent - 0.75).abs() <= 0.08;
    outcome(
        all_on_some_seed && median >= 45 && quantitative,
        format!(
            "correct per seed {strict_correct:?} (need 49 on one seed, median >= 45); mean separable {sep:.4} (0.62 ± 0.08), entangled {ent:.4} (0.75 ± 0.08)"
        ),
    )
}

fn c9_ablation(runs: &mut Runs) -> Outcome {
    let means: BTreeMap<String, f64> = ablation(runs).group_final_means().into_iter().collect();
    let base = means["2-2-2"];
    let gap = base - means["2-2"];
    let d232 = (means["2-3-2"] - base).abs();
    let d2222 = (means["2-2-2-2"] - base).abs();
    let real: BTreeMap<String, f64> = ablation_real(runs).group_final_means().into_iter().collect();
    outcome(
        gap >= 0.15 && d232 <= 0.05 && d2222 <= 0.05,
        format!(
            "phase grid: 2-2 {:.4}, 2-2-2 {base:.4}, 2-3-2 {:.4}, 2-2-2-2 {:.4}; gap {gap:.4} (need >= 0.15), deviations {d232:.4}, {d2222:.4} (need <= 0.05); real grid gap {:.4} for reference",
            means["2-2"],
            means["2-3-2"],
            means["2-2-2-2"],
            real["2-2-2"] - real["2-2"]
        ),
    )
}

fn c10_multi(runs: &mut Runs) -> Outcome {
    let res = multi(runs);
    let mut pass = true;
    let mut parts = Vec::new();
    for r in &res.runs {
        let m = r.labels.len() as f64;
        let p = r.final_success();
        let rec = &r.trace.records;
        let first = mean(rec[..10].iter().map(|x| x.loss));
        let last = mean(rec[rec.len() - 10..].iter().map(|x| x.loss));
        pass &= p >= 1.0 / m + 0.15 && last < first;
        parts.push(format!("{} {p:.3}", r.group));
    }
    outcome(pass, format!("final P_N: {} (need >= 1/M + 0.15, loss decreasing)", parts.join(", ")))
}

fn c11_never_beat(runs: &mut Runs) -> Outcome {
    let mut checked = 0;
    let mut worst = f64::NEG_INFINITY;
    let keys: Vec<&'static str> = runs.done.keys().copied().collect();
    if keys.is_empty() {
        binary_real(runs);
        binary_complex(runs);
    }
    for res in runs.done.values() {
        for r in &res.runs {
            let Some(h) = r.helstrom else { continue };
            for rec in &r.trace.records {
                worst = worst.max(rec.average_success - h);
                checked += 1;
            }
        }
    }
    outcome(
        checked > 0 && worst <= 1e-6,
        format!("max P_N - P_H {worst:.2e} over {checked} recorded iterations (need <= 1e-6)"),
    )
}

fn c12_determinism(runs: &mut Runs) -> Outcome {
    let mut identical = 0;
    let mut differing = Vec::new();
    let mixed = binary_mixed(runs).clone();
    let werner = werner(runs).clone();
    for res in [mixed, werner] {
        let first = tempfile::tempdir().unwrap();
        let second = tempfile::tempdir().unwrap();
        emit_outputs(&res, first.path()).unwrap();
        let again = replay(&first.path().join(MANIFEST_FILE)).unwrap();
        emit_outputs(&again, second.path()).unwrap();
        for entry in std::fs::read_dir(first.path()).unwrap() {
            let name = entry.unwrap().file_name();
            let a = std::fs::read(first.path().join(&name)).unwrap();
            let b = std::fs::read(second.path().join(&name)).unwrap();
            if a == b {
                identical += 1;
            } else {
                differing.push(format!("{}/{}", res.config.kind.as_str(), name.to_string_lossy()));
            }
        }
    }
    outcome(
        differing.is_empty(),
        format!("{identical} files byte-identical after manifest replay; differing: {differing:?}"),
    )
}

type Criterion = (u32, &'static str, fn(&mut Runs) -> Outcome);

const CRITERIA: [Criterion; 12] = [
    (1, "gradient exactness", c1_gradient),
    (2, "physicality", c2_physicality),
    (3, "analytic decay", c3_decay),
    (4, "binary real", c4_binary_real),
    (5, "binary complex", c5_binary_complex),
    (6, "mixed states", c6_mixed),
    (7, "GHZ vs W", c7_ghz),
    (8, "Werner classification", c8_werner),
    (9, "topology ablation", c9_ablation),
    (10, "multi-state", c10_multi),
    (11, "never beat optimum", c11_never_beat),
    (12, "determinism", c12_determinism),
];

fn main() -> ExitCode {
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut runs = Runs::default();
    let mut failed = 0;
    let mut ran = 0;
    for (id, name, check) in CRITERIA {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let result = check(&mut runs);
        let status = if result.pass { "PASS" } else { "FAIL" };
        println!("criterion {id:>2} {status} {name}: {} [{:.1}s]", result.detail, start.elapsed().as_secs_f64());
        ran += 1;
        failed += usize::from(!result.pass);
    }
    println!("acceptance: {}/{ran} criteria passed", ran - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
