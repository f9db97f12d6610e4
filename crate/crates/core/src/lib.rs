//! Quantum stochastic neural networks: Lindblad dynamics on a layered
//! neuron graph, exact parameter gradients, and gradient-descent training
//! for quantum state discrimination and classification.

pub mod error;
pub mod experiment;
pub mod liouvillian;
pub mod network;
pub mod tasks;
pub mod tensor;
pub mod training;

pub use error::{Error, Result};
