//! Vectorized Lindblad generator, state evolution, and exact parameter
//! derivatives of the evolved state.
//!
//! With row-major vectorization, left and right multiplication become
//! `A ρ ↦ (A ⊗ I)|ρ⟩` and `ρ A ↦ (I ⊗ Aᵀ)|ρ⟩`, so
//!
//! ```text
//! 𝓛 = −i(H⊗I − I⊗Hᵀ) + Σ_k [L_k⊗L_k* − ½(L_k†L_k)⊗I − ½ I⊗(L_kᵀL_k*)]
//! ```

use crate::error::{Error, Result};
use crate::network::{
    build_hamiltonian, coupling_generator, transfer_generator, NetworkTopology, ParameterVector,
};
use crate::tensor::{
    check_density, devectorize, expm, expm_frechet, kron, vectorize, ComplexMatrix, DensityMatrix, I,
};

/// `−i(A⊗I − I⊗Aᵀ)`, the generator of `ρ ↦ −i[A, ρ]`.
pub fn commutator_superop(a: &ComplexMatrix) -> ComplexMatrix {
    let id = ComplexMatrix::identity(a.rows());
    (&kron(a, &id) - &kron(&id, &a.transpose())).scale(-I)
}

/// `L⊗L* − ½(L†L)⊗I − ½ I⊗(LᵀL*)`, the generator of the dissipator
/// `ρ ↦ LρL† − ½{L†L, ρ}`.
pub fn dissipator_superop(l: &ComplexMatrix) -> ComplexMatrix {
    let id = ComplexMatrix::identity(l.rows());
    let ldl = l.adjoint().dot(l);
    let mut out = kron(l, &l.conj());
    out += &kron(&ldl, &id).scale_real(-0.5);
    out += &kron(&id, &ldl.transpose()).scale_real(-0.5);
    out
}

/// Generator `𝓛` of one network together with `∂𝓛/∂θ_k` for every
/// parameter (couplings first, then dissipation amplitudes) and the fixed
/// evolution time.
#[derive(Clone, Debug)]
pub struct LiouvillianBundle {
    dim: usize,
    generator: ComplexMatrix,
    partials: Vec<ComplexMatrix>,
    evolution_time: f64,
}

impl LiouvillianBundle {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generator(&self) -> &ComplexMatrix {
        &self.generator
    }

    pub fn partials(&self) -> &[ComplexMatrix] {
        &self.partials
    }

    pub fn evolution_time(&self) -> f64 {
        self.evolution_time
    }

    /// `exp(𝓛T)`.
    pub fn propagator(&self) -> Result<ComplexMatrix> {
        expm(&self.generator.scale_real(self.evolution_time))
    }
}

pub fn assemble(topo: &NetworkTopology, params: &ParameterVector, t: f64) -> Result<LiouvillianBundle> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("evolution time must be positive, got {t}")));
    }
    params.check_against(topo)?;
    let n = topo.dim();

    let mut generator = commutator_superop(&build_hamiltonian(topo, params)?);
    let mut partials = Vec::with_capacity(topo.num_params());
    for &edge in topo.hamiltonian_edges() {
        partials.push(commutator_superop(&coupling_generator(n, edge)));
    }
    for (&edge, &g) in topo.lindblad_edges().iter().zip(&params.gamma) {
        let d = dissipator_superop(&transfer_generator(n, edge));
        generator += &d.scale_real(g * g);
        partials.push(d.scale_real(2.0 * g));
    }

    Ok(LiouvillianBundle {
        dim: n,
        generator,
        partials,
        evolution_time: t,
    })
}

fn check_output(m: ComplexMatrix) -> Result<DensityMatrix> {
    check_density(&m).map_err(Error::IntegratorFault)?;
    DensityMatrix::new(m)
}

fn check_input(bundle: &LiouvillianBundle, rho_in: &DensityMatrix) -> Result<()> {
    if rho_in.dim() != bundle.dim {
        return Err(Error::Dimension(format!(
            "input state has dimension {}, network has {} neurons",
            rho_in.dim(),
            bundle.dim
        )));
    }
    Ok(())
}

/// Applies a precomputed propagator `exp(𝓛T)` to an input state.
pub fn evolve_with(propagator: &ComplexMatrix, rho_in: &DensityMatrix) -> Result<DensityMatrix> {
    let n = rho_in.dim();
    if propagator.shape() != (n * n, n * n) {
        return Err(Error::Dimension(format!(
            "propagator of shape {:?} does not act on {n}x{n} states",
            propagator.shape()
        )));
    }
    check_output(devectorize(&vectorize(rho_in).apply(propagator), n)?)
}

/// `ρ_out = exp(𝓛T) ρ_in`, rejected with [`Error::IntegratorFault`] if the
/// result is not a density matrix.
pub fn evolve(bundle: &LiouvillianBundle, rho_in: &DensityMatrix) -> Result<DensityMatrix> {
    check_input(bundle, rho_in)?;
    evolve_with(&bundle.propagator()?, rho_in)
}

/// Evolved state and `∂ρ_out/∂θ_k` for every parameter, each from one
/// block exponential of twice the superoperator dimension.
pub fn output_gradients(
    bundle: &LiouvillianBundle,
    rho_in: &DensityMatrix,
) -> Result<(DensityMatrix, Vec<ComplexMatrix>)> {
    check_input(bundle, rho_in)?;
    let n = bundle.dim;
    let v = vectorize(rho_in);
    let rho_out = evolve_with(&bundle.propagator()?, rho_in)?;
    let mut grads = Vec::with_capacity(bundle.partials.len());
    for partial in &bundle.partials {
        if partial.max_abs() == 0.0 {
            grads.push(ComplexMatrix::zeros(n, n));
            continue;
        }
        let (_, d) = expm_frechet(&bundle.generator, partial, bundle.evolution_time)?;
        grads.push(devectorize(&v.apply(&d), n)?);
    }
    Ok((rho_out, grads))
}

/// Gradient of `Σ_s c_s ⟨l_s|ρ_out^s|l_s⟩` with respect to every parameter.
///
/// Uses `Σ_s c_s ⟨⟨l_s l_s| D_k |ρ_s⟩⟩ = Tr(∂_k𝓛 · F)` where `F` is the
/// derivative of `exp(𝓛T)` along `G = Σ_s c_s |ρ_s⟩⟨⟨l_s l_s|`, so a
/// single block exponential covers all parameters.
pub fn population_gradient(bundle: &LiouvillianBundle, targets: &[(&DensityMatrix, usize, f64)]) -> Result<Vec<f64>> {
    let n = bundle.dim;
    let mut g = ComplexMatrix::zeros(n * n, n * n);
    for &(rho, label, weight) in targets {
        check_input(bundle, rho)?;
        if label >= n {
            return Err(Error::InvalidArgument(format!("label {label} outside {n} neurons")));
        }
        let col = label * n + label;
        for (row, z) in vectorize(rho).entries().iter().enumerate() {
            g[(row, col)] += z * weight;
        }
    }
    let (_, f) = expm_frechet(&bundle.generator, &g, bundle.evolution_time)?;
    Ok(bundle.partials.iter().map(|p| p.trace_product(&f).re).collect())
}
