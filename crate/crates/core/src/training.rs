//! Success probabilities, losses, and full-batch gradient descent.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liouvillian::{assemble, evolve_with, output_gradients, population_gradient};
use crate::network::{NetworkTopology, ParameterVector};
use crate::tensor::DensityMatrix;

/// Input state already embedded in the network, the output neuron that
/// should receive it, and its prior weight.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledSample {
    pub rho_in: DensityMatrix,
    pub label: usize,
    pub weight: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    /// `1 − Σ_s w_s P_s` with the samples' own priors.
    WeightedDiscrimination,
    /// `1 − (1/M) Σ_s P_s`.
    MeanClassification,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingConfig {
    pub learning_rate: f64,
    pub iterations: usize,
    #[serde(default = "default_time")]
    pub evolution_time: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub init_low: f64,
    #[serde(default = "default_init_high")]
    pub init_high: f64,
    pub loss: LossKind,
}

fn default_time() -> f64 {
    10.0
}

fn default_init_high() -> f64 {
    1.0
}

impl TrainingConfig {
    pub fn new(learning_rate: f64, iterations: usize, loss: LossKind) -> Self {
        Self {
            learning_rate,
            iterations,
            evolution_time: default_time(),
            seed: 0,
            init_low: 0.0,
            init_high: default_init_high(),
            loss,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::config("learning_rate", format!("must be > 0, got {}", self.learning_rate)));
        }
        if !(self.evolution_time > 0.0 && self.evolution_time.is_finite()) {
            return Err(Error::config("evolution_time", format!("must be > 0, got {}", self.evolution_time)));
        }
        if !(self.init_low < self.init_high && self.init_low.is_finite() && self.init_high.is_finite()) {
            return Err(Error::config(
                "init_low",
                format!("need init_low < init_high, got [{}, {})", self.init_low, self.init_high),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrainingRecord {
    pub iteration: usize,
    pub loss: f64,
    pub sample_success: Vec<f64>,
    /// `Σ_s w_s P_s` under the loss weighting, so `loss = 1 − average_success`.
    pub average_success: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrainingTrace {
    pub records: Vec<TrainingRecord>,
    pub initial: ParameterVector,
    pub final_params: ParameterVector,
}

impl TrainingTrace {
    pub fn final_record(&self) -> &TrainingRecord {
        self.records.last().expect("a trace always holds the initial evaluation")
    }

    /// Highest average success reached at any iteration.
    pub fn best_success(&self) -> f64 {
        self.records.iter().map(|r| r.average_success).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `Tr(ρ |l⟩⟨l|)`, clamped to `[0, 1]`.
pub fn success_probability(rho_out: &DensityMatrix, label: usize) -> Result<f64> {
    if label >= rho_out.dim() {
        return Err(Error::InvalidArgument(format!(
            "label {label} outside {}-dimensional state",
            rho_out.dim()
        )));
    }
    Ok(rho_out.population(label).clamp(0.0, 1.0))
}

fn effective_weights(samples: &[LabeledSample], kind: LossKind) -> Vec<f64> {
    match kind {
        LossKind::WeightedDiscrimination => samples.iter().map(|s| s.weight).collect(),
        LossKind::MeanClassification => vec![1.0 / samples.len() as f64; samples.len()],
    }
}

pub fn loss(samples: &[LabeledSample], outputs: &[DensityMatrix], kind: LossKind) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("loss of an empty sample list".into()));
    }
    if samples.len() != outputs.len() {
        return Err(Error::Dimension(format!(
            "{} samples but {} output states",
            samples.len(),
            outputs.len()
        )));
    }
    let weights = effective_weights(samples, kind);
    let mut avg = 0.0;
    for ((s, out), w) in samples.iter().zip(outputs).zip(weights) {
        avg += w * success_probability(out, s.label)?;
    }
    Ok(1.0 - avg)
}

fn check_samples(topo: &NetworkTopology, samples: &[LabeledSample], kind: LossKind) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("training set is empty".into()));
    }
    let outputs = topo.output_neurons();
    for (k, s) in samples.iter().enumerate() {
        if s.rho_in.dim() != topo.dim() {
            return Err(Error::Dimension(format!(
                "sample {k} has dimension {}, network {} has {} neurons",
                s.rho_in.dim(),
                topo.shape_name(),
                topo.dim()
            )));
        }
        if !outputs.contains(&s.label) {
            return Err(Error::InvalidArgument(format!(
                "sample {k} label {} is not an output neuron ({outputs:?})",
                s.label
            )));
        }
        if !(0.0..=1.0).contains(&s.weight) {
            return Err(Error::InvalidArgument(format!("sample {k} weight {} outside [0, 1]", s.weight)));
        }
    }
    if kind == LossKind::WeightedDiscrimination {
        let total: f64 = samples.iter().map(|s| s.weight).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("sample weights sum to {total}, expected 1")));
        }
    }
    Ok(())
}

/// Outputs, per-sample success and loss at one parameter point.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub outputs: Vec<DensityMatrix>,
    pub sample_success: Vec<f64>,
    pub loss: f64,
}

pub fn evaluate(
    topo: &NetworkTopology,
    params: &ParameterVector,
    samples: &[LabeledSample],
    time: f64,
    kind: LossKind,
) -> Result<Evaluation> {
    let bundle = assemble(topo, params, time)?;
    let propagator = bundle.propagator()?;
    let outputs = samples
        .iter()
        .map(|s| evolve_with(&propagator, &s.rho_in))
        .collect::<Result<Vec<_>>>()?;
    let sample_success = samples
        .iter()
        .zip(&outputs)
        .map(|(s, o)| success_probability(o, s.label))
        .collect::<Result<Vec<_>>>()?;
    let loss = loss(samples, &outputs, kind)?;
    Ok(Evaluation {
        outputs,
        sample_success,
        loss,
    })
}

/// `∂Loss/∂θ` in `(h, γ)` order.
pub fn loss_gradient(
    topo: &NetworkTopology,
    params: &ParameterVector,
    samples: &[LabeledSample],
    config: &TrainingConfig,
) -> Result<Vec<f64>> {
    check_samples(topo, samples, config.loss)?;
    let bundle = assemble(topo, params, config.evolution_time)?;
    let weights = effective_weights(samples, config.loss);
    let targets: Vec<_> = samples.iter().zip(&weights).map(|(s, &w)| (&s.rho_in, s.label, w)).collect();
    Ok(population_gradient(&bundle, &targets)?.into_iter().map(|g| -g).collect())
}

/// Same quantity as [`loss_gradient`], assembled from the full per-parameter
/// state derivatives. Slower; kept as an independent cross-check.
pub fn loss_gradient_by_parameter(
    topo: &NetworkTopology,
    params: &ParameterVector,
    samples: &[LabeledSample],
    config: &TrainingConfig,
) -> Result<Vec<f64>> {
    check_samples(topo, samples, config.loss)?;
    let bundle = assemble(topo, params, config.evolution_time)?;
    let weights = effective_weights(samples, config.loss);
    let mut grad = vec![0.0; topo.num_params()];
    for (s, w) in samples.iter().zip(weights) {
        let (_, grads) = output_gradients(&bundle, &s.rho_in)?;
        for (g, d) in grad.iter_mut().zip(&grads) {
            *g -= w * d[(s.label, s.label)].re;
        }
    }
    Ok(grad)
}

/// `θ′ = θ − η ∂Loss/∂θ` on the concatenated `(h, γ)` vector.
pub fn gd_step(params: &ParameterVector, grad: &[f64], eta: f64) -> Result<ParameterVector> {
    if grad.len() != params.len() {
        return Err(Error::ParameterLength(format!(
            "gradient has {} entries, parameters have {}",
            grad.len(),
            params.len()
        )));
    }
    let nh = params.h.len();
    let step = |x: &[f64], g: &[f64]| x.iter().zip(g).map(|(x, g)| x - eta * g).collect::<Vec<_>>();
    ParameterVector::new(step(&params.h, &grad[..nh]), step(&params.gamma, &grad[nh..]))
}

/// Trains from a seeded uniform initialization; see [`train_from`].
pub fn train(topo: &NetworkTopology, samples: &[LabeledSample], config: &TrainingConfig) -> Result<TrainingTrace> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let initial = ParameterVector::random_uniform(topo, config.init_low, config.init_high, &mut rng);
    train_from(topo, samples, config, initial)
}

/// Runs `config.iterations` full-batch gradient steps. Record `i` holds the
/// evaluation after `i` steps, so the trace has `iterations + 1` records.
pub fn train_from(
    topo: &NetworkTopology,
    samples: &[LabeledSample],
    config: &TrainingConfig,
    initial: ParameterVector,
) -> Result<TrainingTrace> {
    config.validate()?;
    check_samples(topo, samples, config.loss)?;
    initial.check_against(topo)?;

    let mut params = initial.clone();
    let mut records = Vec::with_capacity(config.iterations + 1);
    for iteration in 0..=config.iterations {
        let eval = evaluate(topo, &params, samples, config.evolution_time, config.loss)
            .map_err(|e| e.context(format!("evaluation at iteration {iteration}")))?;
        records.push(TrainingRecord {
            iteration,
            loss: eval.loss,
            sample_success: eval.sample_success,
            average_success: 1.0 - eval.loss,
        });
        if iteration == config.iterations {
            break;
        }
        let grad = loss_gradient(topo, &params, samples, config)
            .map_err(|e| e.context(format!("gradient at iteration {iteration}")))?;
        params = gd_step(&params, &grad, config.learning_rate)?;
    }
    Ok(TrainingTrace {
        records,
        initial,
        final_params: params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::encode_input;

    fn sample(rho: DensityMatrix, label: usize, weight: f64) -> LabeledSample {
        LabeledSample {
            rho_in: rho,
            label,
            weight,
        }
    }

    #[test]
    fn success_probability_examples() {
        let l = DensityMatrix::basis(6, 4).unwrap();
        assert_eq!(success_probability(&l, 4).unwrap(), 1.0);
        assert_eq!(success_probability(&l, 5).unwrap(), 0.0);
        let mixed = DensityMatrix::maximally_mixed(6);
        assert!((success_probability(&mixed, 2).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert!(success_probability(&mixed, 6).is_err());
    }

    #[test]
    fn loss_examples() {
        let a = DensityMatrix::basis(2, 0).unwrap();
        let b = DensityMatrix::basis(2, 1).unwrap();
        let samples = vec![sample(a.clone(), 0, 0.5), sample(b.clone(), 1, 0.5)];
        assert_eq!(loss(&samples, &[a.clone(), b.clone()], LossKind::WeightedDiscrimination).unwrap(), 0.0);
        assert_eq!(loss(&samples, &[a.clone(), a.clone()], LossKind::WeightedDiscrimination).unwrap(), 0.5);

        // Populations 0.9, 0.8, 0.7, 0.6 on the labelled neuron.
        let outs: Vec<DensityMatrix> = [0.9, 0.8, 0.7, 0.6]
            .iter()
            .map(|&p| DensityMatrix::new(crate::tensor::ComplexMatrix::from_real_diag(&[p, 1.0 - p])).unwrap())
            .collect();
        let samples: Vec<_> = (0..4).map(|_| sample(a.clone(), 0, 0.1)).collect();
        assert!((loss(&samples, &outs, LossKind::MeanClassification).unwrap() - 0.25).abs() < 1e-15);

        assert!(loss(&[], &[], LossKind::MeanClassification).is_err());
    }

    #[test]
    fn gd_step_examples() {
        let p = ParameterVector::new(vec![1.0], vec![1.0]).unwrap();
        assert_eq!(gd_step(&p, &[0.0, 0.0], 10.0).unwrap(), p);
        let q = gd_step(&p, &[0.1, -0.2], 10.0).unwrap();
        assert!((q.h[0] - 0.0).abs() < 1e-15 && (q.gamma[0] - 3.0).abs() < 1e-15);
        let g = [0.03, -0.07];
        let twice = gd_step(&gd_step(&p, &g, 2.0).unwrap(), &g, 2.0).unwrap();
        let once = gd_step(&p, &[0.06, -0.14], 2.0).unwrap();
        assert!((twice.h[0] - once.h[0]).abs() < 1e-15 && (twice.gamma[0] - once.gamma[0]).abs() < 1e-15);
        assert!(gd_step(&p, &[0.0], 1.0).is_err());
    }

    #[test]
    fn gradient_single_sample_formula() {
        // One sample, weight 1: component k is −Re(∂ρ_out/∂θ_k)_{ll}.
        let topo = NetworkTopology::standard(2, &[2], 2).unwrap();
        let params = ParameterVector::from_concat(&topo, &[0.3; 13]).unwrap();
        let rho = encode_input(&DensityMatrix::basis(2, 0).unwrap(), 6).unwrap();
        let samples = vec![sample(rho.clone(), 4, 1.0)];
        let config = TrainingConfig::new(10.0, 1, LossKind::WeightedDiscrimination);
        let bundle = assemble(&topo, &params, 10.0).unwrap();
        let (_, grads) = output_gradients(&bundle, &rho).unwrap();
        let g = loss_gradient(&topo, &params, &samples, &config).unwrap();
        for k in 0..13 {
            assert!((g[k] + grads[k][(4, 4)].re).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_point_coupling_gradient_vanishes() {
        let topo = NetworkTopology::standard(2, &[2], 2).unwrap();
        let params = ParameterVector::zeros(&topo);
        let samples = vec![
            sample(encode_input(&DensityMatrix::basis(2, 0).unwrap(), 6).unwrap(), 4, 0.5),
            sample(encode_input(&DensityMatrix::basis(2, 1).unwrap(), 6).unwrap(), 5, 0.5),
        ];
        let config = TrainingConfig::new(10.0, 1, LossKind::WeightedDiscrimination);
        let g = loss_gradient(&topo, &params, &samples, &config).unwrap();
        assert!(g.iter().all(|x| x.abs() < 1e-14), "{g:?}");
    }

    #[test]
    fn sample_validation() {
        let topo = NetworkTopology::standard(2, &[2], 2).unwrap();
        let params = ParameterVector::zeros(&topo);
        let config = TrainingConfig::new(10.0, 1, LossKind::WeightedDiscrimination);
        let rho = encode_input(&DensityMatrix::basis(2, 0).unwrap(), 6).unwrap();
        // Label on a hidden neuron.
        assert!(loss_gradient(&topo, &params, &[sample(rho.clone(), 2, 1.0)], &config).is_err());
        // Weights not summing to one.
        assert!(loss_gradient(&topo, &params, &[sample(rho.clone(), 4, 0.5)], &config).is_err());
        // Wrong dimension.
        assert!(loss_gradient(&topo, &params, &[sample(DensityMatrix::basis(2, 0).unwrap(), 4, 1.0)], &config).is_err());
        assert!(loss_gradient(&topo, &params, &[], &config).is_err());
    }

    #[test]
    fn config_validation() {
        let mut c = TrainingConfig::new(10.0, 5, LossKind::MeanClassification);
        assert!(c.validate().is_ok());
        c.learning_rate = 0.0;
        assert!(c.validate().is_err());
        let mut c = TrainingConfig::new(10.0, 5, LossKind::MeanClassification);
        c.init_high = c.init_low;
        assert!(c.validate().is_err());
    }

    #[test]
    fn zero_iterations_records_initial_evaluation_only() {
        let topo = NetworkTopology::standard(2, &[2], 2).unwrap();
        let samples = vec![
            sample(encode_input(&DensityMatrix::basis(2, 0).unwrap(), 6).unwrap(), 4, 0.5),
            sample(encode_input(&DensityMatrix::basis(2, 1).unwrap(), 6).unwrap(), 5, 0.5),
        ];
        let config = TrainingConfig::new(10.0, 0, LossKind::WeightedDiscrimination).with_seed(3);
        let trace = train(&topo, &samples, &config).unwrap();
        assert_eq!(trace.records.len(), 1);
        assert_eq!(trace.initial, trace.final_params);
        assert!(trace.initial.concat().iter().all(|x| (0.0..1.0).contains(x)));
    }
}
