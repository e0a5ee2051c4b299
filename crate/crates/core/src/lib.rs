//! Noisy Trotter supercircuits and compressed quasiprobability denoisers.
//!
//! Circuits are simulated exactly at the level of superoperators acting on
//! vectorized density matrices. A denoiser is a shallow brickwall circuit of
//! two-qubit channels, each a signed mixture of a noisy unitary and a noisy
//! measure-and-prepare channel, optimized so that the denoised noisy circuit
//! approximates the noiseless one.

pub mod analysis;
pub mod channels;
pub mod circuits;
pub mod error;
pub mod kernel;
pub mod observables;
pub mod optimizer;
pub mod pauli;
pub mod random;
pub mod sampler;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
pub use pauli::{
    choi_reshape, embed_local, embed_superop, kraus_superop, pauli_matrix, unitary_superop, Boundary, ChoiState,
    DenseOperator, DenseSuperoperator, QubitCount, VectorizedOperator,
};
