//! Network topologies, trainable parameters, and the Hamiltonian and
//! Lindblad operators they define.
//!
//! Neurons are numbered layer by layer, input layer first, so neuron `i` is
//! the basis state `|i⟩` of an `N`-dimensional Hilbert space with `N` the
//! total neuron count.

use std::collections::HashSet;
use std::ops::Range;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{ComplexMatrix, DensityMatrix, C64, ONE};

/// Directed dissipation edge: probability flows from neuron `from` into `to`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Transfer {
    pub from: usize,
    pub to: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTopology", into = "RawTopology")]
pub struct NetworkTopology {
    layer_sizes: Vec<usize>,
    hamiltonian_edges: Vec<(usize, usize)>,
    lindblad_edges: Vec<Transfer>,
}

/// Serialized form: Lindblad edges are `[from, to]` pairs.
#[derive(Serialize, Deserialize)]
struct RawTopology {
    layer_sizes: Vec<usize>,
    hamiltonian_edges: Vec<(usize, usize)>,
    lindblad_edges: Vec<(usize, usize)>,
}

impl TryFrom<RawTopology> for NetworkTopology {
    type Error = Error;

    fn try_from(raw: RawTopology) -> Result<Self> {
        let lindblad = raw
            .lindblad_edges
            .into_iter()
            .map(|(from, to)| Transfer { from, to })
            .collect();
        NetworkTopology::new(raw.layer_sizes, raw.hamiltonian_edges, lindblad)
    }
}

impl From<NetworkTopology> for RawTopology {
    fn from(t: NetworkTopology) -> Self {
        RawTopology {
            layer_sizes: t.layer_sizes,
            hamiltonian_edges: t.hamiltonian_edges,
            lindblad_edges: t.lindblad_edges.into_iter().map(|e| (e.from, e.to)).collect(),
        }
    }
}

impl NetworkTopology {
    pub fn new(
        layer_sizes: Vec<usize>,
        hamiltonian_edges: Vec<(usize, usize)>,
        lindblad_edges: Vec<Transfer>,
    ) -> Result<Self> {
        if layer_sizes.len() < 2 {
            return Err(Error::Topology("need at least an input and an output layer".into()));
        }
        if let Some(pos) = layer_sizes.iter().position(|&s| s == 0) {
            return Err(Error::Topology(format!("layer {pos} is empty")));
        }
        let n: usize = layer_sizes.iter().sum();

        let mut seen = HashSet::new();
        for &(i, j) in &hamiltonian_edges {
            if i >= n || j >= n {
                return Err(Error::Topology(format!("Hamiltonian edge {{{i}, {j}}} outside {n} neurons")));
            }
            if i == j {
                return Err(Error::Topology(format!("Hamiltonian self-coupling on neuron {i}")));
            }
            if !seen.insert((i.min(j), i.max(j))) {
                return Err(Error::Topology(format!("duplicate Hamiltonian edge {{{i}, {j}}}")));
            }
        }
        let mut seen = HashSet::new();
        for e in &lindblad_edges {
            if e.from >= n || e.to >= n {
                return Err(Error::Topology(format!("Lindblad edge {} -> {} outside {n} neurons", e.from, e.to)));
            }
            if !seen.insert(*e) {
                return Err(Error::Topology(format!("duplicate Lindblad edge {} -> {}", e.from, e.to)));
            }
        }
        Ok(Self {
            layer_sizes,
            hamiltonian_edges,
            lindblad_edges,
        })
    }

    /// Layered network with one-way dissipation between adjacent layers and
    /// coherent couplings inside the input layer and between the input layer
    /// and the first hidden layer.
    ///
    /// Edge order: intra-input pairs `(i, j)` with `i < j` lexicographically,
    /// then input × first hidden; Lindblad edges layer pair by layer pair,
    /// source-major.
    pub fn standard(input: usize, hidden: &[usize], output: usize) -> Result<Self> {
        let mut sizes = vec![input];
        sizes.extend_from_slice(hidden);
        sizes.push(output);
        Self::layered(sizes, false)
    }

    /// Same as [`standard`](Self::standard) from a full layer list such as `[2, 2, 2]`.
    pub fn from_layers(layer_sizes: &[usize]) -> Result<Self> {
        Self::layered(layer_sizes.to_vec(), false)
    }

    /// Layered network that also couples every adjacent hidden/output pair
    /// coherently, on top of the standard edge set.
    pub fn from_layers_with_forward_coupling(layer_sizes: &[usize]) -> Result<Self> {
        Self::layered(layer_sizes.to_vec(), true)
    }

    fn layered(sizes: Vec<usize>, forward_coupling: bool) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::Topology(format!("layer sizes must be >= 1 with at least two layers, got {sizes:?}")));
        }
        let offsets: Vec<usize> = sizes
            .iter()
            .scan(0, |acc, &s| {
                let start = *acc;
                *acc += s;
                Some(start)
            })
            .collect();
        let layer = |l: usize| offsets[l]..offsets[l] + sizes[l];

        let mut ham = Vec::new();
        for i in layer(0) {
            for j in i + 1..layer(0).end {
                ham.push((i, j));
            }
        }
        // Input couples coherently only to a hidden layer, never straight to the output.
        if sizes.len() > 2 {
            for i in layer(0) {
                for j in layer(1) {
                    ham.push((i, j));
                }
            }
        }
        if forward_coupling {
            for l in 1..sizes.len() - 1 {
                for i in layer(l) {
                    for j in layer(l + 1) {
                        ham.push((i, j));
                    }
                }
            }
        }

        let mut lind = Vec::new();
        for l in 0..sizes.len() - 1 {
            for from in layer(l) {
                for to in layer(l + 1) {
                    lind.push(Transfer { from, to });
                }
            }
        }
        Self::new(sizes, ham, lind)
    }

    /// Parses shapes like `"2-2-2"`.
    pub fn parse_shape(shape: &str) -> Result<Vec<usize>> {
        shape
            .split('-')
            .map(|s| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Topology(format!("bad layer size `{s}` in shape `{shape}`")))
            })
            .collect()
    }

    pub fn shape_name(&self) -> String {
        self.layer_sizes.iter().map(ToString::to_string).collect::<Vec<_>>().join("-")
    }

    /// Total neuron count `N`.
    pub fn dim(&self) -> usize {
        self.layer_sizes.iter().sum()
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn layer(&self, l: usize) -> Range<usize> {
        let start: usize = self.layer_sizes[..l].iter().sum();
        start..start + self.layer_sizes[l]
    }

    pub fn input_size(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_size(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    pub fn output_neurons(&self) -> Range<usize> {
        self.layer(self.layer_sizes.len() - 1)
    }

    pub fn hamiltonian_edges(&self) -> &[(usize, usize)] {
        &self.hamiltonian_edges
    }

    pub fn lindblad_edges(&self) -> &[Transfer] {
        &self.lindblad_edges
    }

    pub fn num_params(&self) -> usize {
        self.hamiltonian_edges.len() + self.lindblad_edges.len()
    }
}

/// Coupling strengths `h` (one per Hamiltonian edge) followed by dissipation
/// amplitudes `γ` (one per Lindblad edge; the rate is `γ²`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterVector {
    pub h: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl ParameterVector {
    pub fn new(h: Vec<f64>, gamma: Vec<f64>) -> Result<Self> {
        if let Some(x) = h.iter().chain(&gamma).find(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite parameter {x}")));
        }
        Ok(Self { h, gamma })
    }

    pub fn zeros(topo: &NetworkTopology) -> Self {
        Self {
            h: vec![0.0; topo.hamiltonian_edges.len()],
            gamma: vec![0.0; topo.lindblad_edges.len()],
        }
    }

    /// Splits a concatenated `(h, γ)` vector according to the topology.
    pub fn from_concat(topo: &NetworkTopology, theta: &[f64]) -> Result<Self> {
        if theta.len() != topo.num_params() {
            return Err(Error::ParameterLength(format!(
                "expected {} parameters, got {}",
                topo.num_params(),
                theta.len()
            )));
        }
        let nh = topo.hamiltonian_edges.len();
        Self::new(theta[..nh].to_vec(), theta[nh..].to_vec())
    }

    /// Independent uniform draws on `[low, high)` for every parameter.
    pub fn random_uniform(topo: &NetworkTopology, low: f64, high: f64, rng: &mut impl Rng) -> Self {
        let mut draw = |n: usize| (0..n).map(|_| rng.gen_range(low..high)).collect::<Vec<f64>>();
        let h = draw(topo.hamiltonian_edges.len());
        let gamma = draw(topo.lindblad_edges.len());
        Self { h, gamma }
    }

    pub fn concat(&self) -> Vec<f64> {
        self.h.iter().chain(&self.gamma).copied().collect()
    }

    pub fn len(&self) -> usize {
        self.h.len() + self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn check_against(&self, topo: &NetworkTopology) -> Result<()> {
        if self.h.len() != topo.hamiltonian_edges.len() || self.gamma.len() != topo.lindblad_edges.len() {
            return Err(Error::ParameterLength(format!(
                "topology {} has {} couplings and {} dissipators, parameters have {} and {}",
                topo.shape_name(),
                topo.hamiltonian_edges.len(),
                topo.lindblad_edges.len(),
                self.h.len(),
                self.gamma.len()
            )));
        }
        Ok(())
    }
}

/// `∂H/∂h_k = |i⟩⟨j| + |j⟩⟨i|` for Hamiltonian edge `k = {i, j}`.
pub fn coupling_generator(n: usize, (i, j): (usize, usize)) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n, n);
    m[(i, j)] = ONE;
    m[(j, i)] = ONE;
    m
}

/// `∂L_k/∂γ_k = |to⟩⟨from|`.
pub fn transfer_generator(n: usize, edge: Transfer) -> ComplexMatrix {
    ComplexMatrix::basis_op(n, edge.to, edge.from)
}

/// `H = Σ_k h_k (|i⟩⟨j| + |j⟩⟨i|)`, real symmetric.
pub fn build_hamiltonian(topo: &NetworkTopology, params: &ParameterVector) -> Result<ComplexMatrix> {
    params.check_against(topo)?;
    let n = topo.dim();
    let mut h = ComplexMatrix::zeros(n, n);
    for (&(i, j), &strength) in topo.hamiltonian_edges.iter().zip(&params.h) {
        h[(i, j)] += C64::new(strength, 0.0);
        h[(j, i)] += C64::new(strength, 0.0);
    }
    Ok(h)
}

/// One operator `L_k = γ_k |to⟩⟨from|` per Lindblad edge.
pub fn build_lindblad_ops(topo: &NetworkTopology, params: &ParameterVector) -> Result<Vec<ComplexMatrix>> {
    params.check_against(topo)?;
    let n = topo.dim();
    Ok(topo
        .lindblad_edges
        .iter()
        .zip(&params.gamma)
        .map(|(&e, &g)| transfer_generator(n, e).scale_real(g))
        .collect())
}

/// Embeds an `n`-level state into the top-left block of an `N`-neuron
/// network, `ρ ⊕ 0`.
pub fn encode_input(rho: &DensityMatrix, network_dim: usize) -> Result<DensityMatrix> {
    let n = rho.dim();
    if n > network_dim {
        return Err(Error::Dimension(format!(
            "cannot encode a {n}-level state into {network_dim} neurons"
        )));
    }
    let mut m = ComplexMatrix::zeros(network_dim, network_dim);
    m.set_block(0, 0, rho.matrix());
    DensityMatrix::new(m)
}
