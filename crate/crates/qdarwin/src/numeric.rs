//! Shared numeric policy.

/// Tolerances used to validate states and derived spectra.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericPolicy {
    /// Norm, trace and Hermiticity checks on states.
    pub state_tol: f64,
    /// Eigenvalue multisets and other derived spectra.
    pub spectrum_tol: f64,
    /// Eigenvalues at or below this contribute nothing to an entropy.
    pub eig_clip: f64,
    /// Largest total Hilbert-space dimension accepted by dense code.
    pub dim_cap: usize,
}

impl Default for NumericPolicy {
    fn default() -> Self {
        POLICY
    }
}

/// The policy used by every operation in the crate.
pub const POLICY: NumericPolicy = NumericPolicy {
    state_tol: 1e-10,
    spectrum_tol: 1e-9,
    eig_clip: 1e-12,
    dim_cap: 1 << 20,
};
