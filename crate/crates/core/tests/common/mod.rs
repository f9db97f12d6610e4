#![allow(dead_code)]

use qsnn::network::{encode_input, NetworkTopology, ParameterVector};
use qsnn::tensor::{ComplexMatrix, DensityMatrix, C64};
use qsnn::training::{evaluate, LabeledSample, TrainingConfig};
use rand::Rng;

pub fn random_matrix(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

/// `G G† / Tr(G G†)` for a random complex `G`.
pub fn random_density(n: usize, rng: &mut impl Rng) -> DensityMatrix {
    let g = random_matrix(n, rng);
    let m = g.dot(&g.adjoint());
    let tr = m.trace().re;
    let m = m.scale_real(1.0 / tr);
    let m = (&m + &m.adjoint()).scale_real(0.5);
    DensityMatrix::new(m).expect("Gram matrix is a valid state")
}

pub fn random_params(topo: &NetworkTopology, rng: &mut impl Rng) -> ParameterVector {
    let h = (0..topo.hamiltonian_edges().len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let g = (0..topo.lindblad_edges().len()).map(|_| rng.gen_range(0.0..1.5)).collect();
    ParameterVector::new(h, g).unwrap()
}

/// `k` random input states on the input layer with random output labels
/// and random priors summing to one.
pub fn random_samples(topo: &NetworkTopology, k: usize, rng: &mut impl Rng) -> Vec<LabeledSample> {
    let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let outputs = topo.output_neurons();
    (0..k)
        .map(|s| LabeledSample {
            rho_in: encode_input(&random_density(topo.input_size(), rng), topo.dim()).unwrap(),
            label: rng.gen_range(outputs.clone()),
            weight: raw[s] / total,
        })
        .collect()
}

pub fn central_difference(
    topo: &NetworkTopology,
    params: &ParameterVector,
    samples: &[LabeledSample],
    config: &TrainingConfig,
    eps: f64,
) -> Vec<f64> {
    let theta = params.concat();
    let loss_at = |t: &[f64]| {
        let p = ParameterVector::from_concat(topo, t).unwrap();
        evaluate(topo, &p, samples, config.evolution_time, config.loss).unwrap().loss
    };
    (0..theta.len())
        .map(|k| {
            let mut up = theta.clone();
            let mut down = theta.clone();
            up[k] += eps;
            down[k] -= eps;
            (loss_at(&up) - loss_at(&down)) / (2.0 * eps)
        })
        .collect()
}

/// `‖a − b‖₂ / ‖b‖₂`.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let norm: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    diff / norm.max(1e-300)
}
