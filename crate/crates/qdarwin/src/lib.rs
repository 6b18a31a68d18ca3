//! Numerical laboratory for quantum Darwinism.
//!
//! The crate is organised bottom-up:
//! - [`qstate`]: dense states, partial traces, unitaries, Schmidt decomposition
//! - [`infomeasures`]: entropies, mutual information, discord, Holevo quantity
//! - [`branching`]: branching states and the Gram-matrix fast path
//! - [`spinmodels`]: c-not chain, central spin, hazy and interacting environments
//! - [`qbm`]: Gaussian quantum Brownian motion
//! - [`photonenv`]: photon scattering decoherence and its closed-form information curves
//! - [`envariance`]: swaps, finegraining, record algebra, frequencies, reversal
//! - [`darwin`]: partial information plots, redundancy, observable sweeps, baselines

pub mod branching;
pub mod darwin;
pub mod envariance;
mod error;
pub mod infomeasures;
pub mod linalg;
pub mod numeric;
pub mod photonenv;
pub mod qbm;
pub mod qstate;
pub mod spinmodels;

pub use error::{Error, Result};
pub use nalgebra::Complex;

/// Complex scalar used throughout.
pub type C64 = Complex<f64>;
/// Dense complex matrix.
pub type CMat = nalgebra::DMatrix<C64>;
/// Dense complex vector.
pub type CVec = nalgebra::DVector<C64>;
