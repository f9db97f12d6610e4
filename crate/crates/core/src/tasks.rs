//! State families, training and test sets, and the Helstrom oracle.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{encode_input, NetworkTopology};
use crate::tensor::{kron, trace_norm_hermitian, ComplexMatrix, DensityMatrix, C64, I, ZERO};
use crate::training::LabeledSample;

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).expect("finite entries")
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::new(2, 2, vec![ZERO, -I, I, ZERO]).expect("finite entries")
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0]).expect("finite entries")
}

fn pure(ket: Vec<C64>) -> DensityMatrix {
    DensityMatrix::pure(&ket).expect("normalized ket")
}

/// `cosθ|0⟩ + sinθ|1⟩`.
pub fn pure_state_real(theta: f64) -> DensityMatrix {
    pure(vec![C64::from(theta.cos()), C64::from(theta.sin())])
}

/// `(|0⟩ + e^{iφ}|1⟩)/√2`.
pub fn pure_state_complex(phi: f64) -> DensityMatrix {
    pure(vec![C64::from(FRAC_1_SQRT_2), C64::from_polar(FRAC_1_SQRT_2, phi)])
}

/// Qubit state with Bloch vector of length `r` along `(θ, φ)`.
pub fn bloch_mixed_state(theta: f64, phi: f64, r: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::InvalidArgument(format!("Bloch radius {r} outside [0, 1]")));
    }
    if !theta.is_finite() || !phi.is_finite() {
        return Err(Error::InvalidArgument(format!("Bloch angles ({theta}, {phi}) not finite")));
    }
    let (x, y, z) = (theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos());
    let half = 0.5 * r;
    let mut m = ComplexMatrix::identity(2).scale_real(0.5);
    m += &pauli_x().scale_real(half * x);
    m += &pauli_y().scale_real(half * y);
    m += &pauli_z().scale_real(half * z);
    // Exact Hermiticity for the validator.
    let m = (&m + &m.adjoint()).scale_real(0.5);
    DensityMatrix::new(m)
}

fn check_multi(m: usize, s: usize) -> Result<()> {
    if s == 0 || s > m {
        return Err(Error::InvalidArgument(format!("state index {s} outside 1..={m}")));
    }
    Ok(())
}

/// Real-amplitude state at angle `2πs/M`.
pub fn multi_state_real(m: usize, s: usize) -> Result<DensityMatrix> {
    check_multi(m, s)?;
    Ok(pure_state_real(2.0 * PI * s as f64 / m as f64))
}

/// Equal-weight state with relative phase `2πs/M`.
pub fn multi_state_complex(m: usize, s: usize) -> Result<DensityMatrix> {
    check_multi(m, s)?;
    Ok(pure_state_complex(2.0 * PI * s as f64 / m as f64))
}

/// `(|000⟩ + |111⟩)/√2`, basis index `4b₂ + 2b₁ + b₀`.
pub fn ghz_state() -> DensityMatrix {
    let mut ket = vec![ZERO; 8];
    ket[0] = C64::from(FRAC_1_SQRT_2);
    ket[7] = C64::from(FRAC_1_SQRT_2);
    pure(ket)
}

/// `(|001⟩ + |010⟩ + |100⟩)/√3`.
pub fn w_state() -> DensityMatrix {
    let a = C64::from(1.0 / 3f64.sqrt());
    let mut ket = vec![ZERO; 8];
    for i in [1, 2, 4] {
        ket[i] = a;
    }
    pure(ket)
}

fn check_unitary(u: &ComplexMatrix, name: &str) -> Result<()> {
    if u.shape() != (2, 2) {
        return Err(Error::Dimension(format!("{name} must be 2x2, got {:?}", u.shape())));
    }
    let dev = u.adjoint().dot(u).max_abs_diff(&ComplexMatrix::identity(2));
    if dev > 1e-10 {
        return Err(Error::InvalidArgument(format!("{name} is not unitary (|U†U − I| = {dev:.3e})")));
    }
    Ok(())
}

/// `p|Ψ⟩⟨Ψ| + (1−p)I/4` with `|Ψ⟩ = (u1⊗u2)(|01⟩+|10⟩)/√2`.
pub fn werner_like(p: f64, u1: &ComplexMatrix, u2: &ComplexMatrix) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("mixing weight {p} outside [0, 1]")));
    }
    check_unitary(u1, "u1")?;
    check_unitary(u2, "u2")?;
    let u = kron(u1, u2);
    let psi_plus = [ZERO, C64::from(FRAC_1_SQRT_2), C64::from(FRAC_1_SQRT_2), ZERO];
    let psi: Vec<C64> = (0..4).map(|i| (0..4).map(|j| u[(i, j)] * psi_plus[j]).sum()).collect();
    let proj = ComplexMatrix::outer(&psi, &psi);
    let mut m = proj.scale_real(p);
    m += &ComplexMatrix::identity(4).scale_real((1.0 - p) / 4.0);
    let m = (&m + &m.adjoint()).scale_real(0.5);
    DensityMatrix::new(m)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntanglementClass {
    Separable,
    Entangled,
}

impl EntanglementClass {
    /// Offset within the two-neuron output layer.
    pub fn output_offset(self) -> usize {
        match self {
            EntanglementClass::Separable => 0,
            EntanglementClass::Entangled => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EntanglementClass::Separable => "separable",
            EntanglementClass::Entangled => "entangled",
        }
    }
}

pub fn entanglement_label(p: f64) -> EntanglementClass {
    if p <= 1.0 / 3.0 {
        EntanglementClass::Separable
    } else {
        EntanglementClass::Entangled
    }
}

/// Optimal success probability for telling `rho1` from `rho2` with priors `w1`, `w2`.
pub fn helstrom_success(rho1: &DensityMatrix, rho2: &DensityMatrix, w1: f64, w2: f64) -> Result<f64> {
    if rho1.dim() != rho2.dim() {
        return Err(Error::Dimension(format!("states of dimension {} and {}", rho1.dim(), rho2.dim())));
    }
    if (w1 + w2 - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!("priors {w1} + {w2} do not sum to 1")));
    }
    let diff = &rho2.matrix().scale_real(w2) - &rho1.matrix().scale_real(w1);
    Ok(1.0 - 0.5 * (1.0 - trace_norm_hermitian(&diff)?))
}

/// Bloch direction `(θ, φ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochAngles {
    pub theta: f64,
    pub phi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum PairFamily {
    /// `|ψ₀⟩` against `|ψ_θ⟩`, real amplitudes.
    RealPure { theta: f64 },
    /// `|ψ₀⟩` against `|ψ_φ⟩`, relative phase.
    ComplexPure { phi: f64 },
    /// Two mixed qubit states on the sphere of radius `r`.
    BlochMixed { r: f64, first: BlochAngles, second: BlochAngles },
    GhzW,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatePairSpec {
    #[serde(flatten)]
    pub family: PairFamily,
    pub priors: (f64, f64),
}

impl StatePairSpec {
    pub fn equal_priors(family: PairFamily) -> Self {
        Self {
            family,
            priors: (0.5, 0.5),
        }
    }

    pub fn states(&self) -> Result<(DensityMatrix, DensityMatrix)> {
        Ok(match &self.family {
            PairFamily::RealPure { theta } => {
                check_angle(*theta)?;
                (pure_state_real(0.0), pure_state_real(*theta))
            }
            PairFamily::ComplexPure { phi } => {
                check_angle(*phi)?;
                (pure_state_complex(0.0), pure_state_complex(*phi))
            }
            PairFamily::BlochMixed { r, first, second } => (
                bloch_mixed_state(first.theta, first.phi, *r)?,
                bloch_mixed_state(second.theta, second.phi, *r)?,
            ),
            PairFamily::GhzW => (ghz_state(), w_state()),
        })
    }

    pub fn helstrom(&self) -> Result<f64> {
        let (a, b) = self.states()?;
        helstrom_success(&a, &b, self.priors.0, self.priors.1)
    }
}

fn check_angle(x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("angle {x} is not finite")))
    }
}

fn check_binary_network(topo: &NetworkTopology, state_dim: usize) -> Result<()> {
    if topo.output_size() != 2 {
        return Err(Error::Topology(format!(
            "binary task needs 2 output neurons, {} has {}",
            topo.shape_name(),
            topo.output_size()
        )));
    }
    if topo.input_size() != state_dim {
        return Err(Error::Topology(format!(
            "states have dimension {state_dim}, {} has {} input neurons",
            topo.shape_name(),
            topo.input_size()
        )));
    }
    Ok(())
}

/// State 1 targets the first output neuron and state 2 the second.
pub fn build_training_set(spec: &StatePairSpec, topo: &NetworkTopology) -> Result<Vec<LabeledSample>> {
    let (w1, w2) = spec.priors;
    if !(0.0..=1.0).contains(&w1) || !(0.0..=1.0).contains(&w2) || (w1 + w2 - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!("priors ({w1}, {w2}) are not a distribution")));
    }
    let (a, b) = spec.states()?;
    check_binary_network(topo, a.dim())?;
    let first = topo.output_neurons().start;
    Ok(vec![
        LabeledSample {
            rho_in: encode_input(&a, topo.dim())?,
            label: first,
            weight: w1,
        },
        LabeledSample {
            rho_in: encode_input(&b, topo.dim())?,
            label: first + 1,
            weight: w2,
        },
    ])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultiFamily {
    Real,
    Complex,
}

impl MultiFamily {
    pub fn as_str(self) -> &'static str {
        match self {
            MultiFamily::Real => "real",
            MultiFamily::Complex => "complex",
        }
    }

    pub fn state(self, m: usize, s: usize) -> Result<DensityMatrix> {
        match self {
            MultiFamily::Real => multi_state_real(m, s),
            MultiFamily::Complex => multi_state_complex(m, s),
        }
    }
}

/// 2-M-M network for `M` equiprobable qubit states.
pub fn multi_state_topology(m: usize) -> Result<NetworkTopology> {
    NetworkTopology::standard(2, &[m], m)
}

/// State `s` targets neuron `N − s`, so the last output neuron holds `s = 1`.
pub fn build_multi_state_set(family: MultiFamily, m: usize, topo: &NetworkTopology) -> Result<Vec<LabeledSample>> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 states, got {m}")));
    }
    if topo.output_size() != m || topo.input_size() != 2 {
        return Err(Error::Topology(format!(
            "{m} qubit states need 2 inputs and {m} outputs, got {}",
            topo.shape_name()
        )));
    }
    let n = topo.dim();
    (1..=m)
        .map(|s| {
            Ok(LabeledSample {
                rho_in: encode_input(&family.state(m, s)?, n)?,
                label: n - s,
                weight: 1.0 / m as f64,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct WernerSetSpec {
    pub train_p: Vec<f64>,
    pub test_p: Vec<f64>,
    pub u1: ComplexMatrix,
    pub u2: ComplexMatrix,
}

impl Default for WernerSetSpec {
    fn default() -> Self {
        Self {
            train_p: vec![0.0, 0.2, 0.4, 0.8],
            test_p: (1..=49).map(|n| 0.02 * n as f64).collect(),
            u1: pauli_z(),
            u2: ComplexMatrix::identity(2),
        }
    }
}

#[derive(Clone, Debug)]
pub struct WernerSets {
    pub train: Vec<LabeledSample>,
    pub test: Vec<LabeledSample>,
    pub train_p: Vec<f64>,
    pub test_p: Vec<f64>,
}

fn werner_samples(spec: &WernerSetSpec, ps: &[f64], topo: &NetworkTopology) -> Result<Vec<LabeledSample>> {
    let first = topo.output_neurons().start;
    let weight = 1.0 / ps.len() as f64;
    ps.iter()
        .map(|&p| {
            let rho = werner_like(p, &spec.u1, &spec.u2)?;
            Ok(LabeledSample {
                rho_in: encode_input(&rho, topo.dim())?,
                label: first + entanglement_label(p).output_offset(),
                weight,
            })
        })
        .collect()
}

/// Separable states target the first output neuron, entangled ones the second.
pub fn build_werner_sets(spec: &WernerSetSpec, topo: &NetworkTopology) -> Result<WernerSets> {
    check_binary_network(topo, 4)?;
    if spec.train_p.is_empty() {
        return Err(Error::InvalidArgument("Werner training grid is empty".into()));
    }
    Ok(WernerSets {
        train: werner_samples(spec, &spec.train_p, topo)?,
        test: werner_samples(spec, &spec.test_p, topo)?,
        train_p: spec.train_p.clone(),
        test_p: spec.test_p.clone(),
    })
}

/// Uniform direction on the sphere.
pub fn sample_sphere_direction(rng: &mut impl Rng) -> BlochAngles {
    let cos_theta: f64 = rng.gen_range(-1.0..=1.0);
    let phi = rng.gen_range(0.0..2.0 * PI);
    BlochAngles {
        theta: cos_theta.acos(),
        phi,
    }
}

/// `count` independent pairs of radius-`r` states with uniform directions.
pub fn sample_mixed_pairs(r: f64, count: usize, rng: &mut impl Rng) -> Result<Vec<StatePairSpec>> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::InvalidArgument(format!("Bloch radius {r} outside [0, 1]")));
    }
    Ok((0..count)
        .map(|_| {
            let first = sample_sphere_direction(rng);
            let second = sample_sphere_direction(rng);
            StatePairSpec::equal_priors(PairFamily::BlochMixed { r, first, second })
        })
        .collect())
}
