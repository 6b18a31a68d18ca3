//! Quantum Brownian motion with Gaussian states: an oscillator linearly coupled
//! through its position to a discretized ohmic bath with a sharp cutoff.
//!
//! Units have ħ = 1. Phase-space vectors interleave `(x, p)` per mode; mode 0
//! is the system and mode n ≥ 1 is bath band n.

use nalgebra::{DMatrix, DVector};
use std::f64::consts::{LN_2, PI, TAU};

use crate::darwin::Source;
use crate::linalg;
use crate::qstate::FragmentSpec;
use crate::{Error, Result};

/// Largest number of bath bands.
pub const MAX_BANDS: usize = 256;
const UNCERTAINTY_TOL: f64 = 1e-8;

/// Gaussian state: first moments and covariance `Δ_ij = ½⟨{z_i, z_j}⟩ - ⟨z_i⟩⟨z_j⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    means: DVector<f64>,
    cov: DMatrix<f64>,
}

impl GaussianState {
    pub fn new(means: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let n = cov.nrows();
        if n == 0 || n % 2 != 0 || cov.ncols() != n || means.len() != n {
            return Err(Error::ShapeMismatch);
        }
        if (&cov - cov.transpose()).amax() > 1e-9 * cov.amax().max(1.0) {
            return Err(Error::InvalidState("covariance not symmetric".into()));
        }
        let nu = symplectic_eigenvalues(&cov)?;
        // round-off in the eigenvalues grows with the largest entry
        let tol = UNCERTAINTY_TOL.max(64.0 * f64::EPSILON * cov.amax());
        if nu.iter().any(|&v| v < 0.5 - tol) {
            return Err(Error::InvalidState("covariance violates the uncertainty principle".into()));
        }
        Ok(Self { means, cov })
    }

    pub fn modes(&self) -> usize {
        self.cov.nrows() / 2
    }

    pub fn means(&self) -> &DVector<f64> {
        &self.means
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Covariance block of the listed modes.
    pub fn reduced_covariance(&self, modes: &[usize]) -> DMatrix<f64> {
        let rows: Vec<usize> = modes.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect();
        DMatrix::from_fn(rows.len(), rows.len(), |i, j| self.cov[(rows[i], rows[j])])
    }

    /// Von Neumann entropy of the listed modes, `Σ H(2ν_i)`.
    pub fn entropy(&self, modes: &[usize]) -> Result<f64> {
        if modes.is_empty() {
            return Ok(0.0);
        }
        Ok(symplectic_eigenvalues(&self.reduced_covariance(modes))?.iter().map(|&nu| gaussian_entropy_clamped(2.0 * nu)).sum())
    }
}

/// `J = ⊕ [[0, 1], [-1, 0]]`.
pub fn symplectic_form(modes: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * modes, 2 * modes);
    for m in 0..modes {
        j[(2 * m, 2 * m + 1)] = 1.0;
        j[(2 * m + 1, 2 * m)] = -1.0;
    }
    j
}

/// Symplectic eigenvalues ν (ascending, one per mode) of a positive-definite covariance.
///
/// With `Δ = L Lᵀ`, `JΔ` is similar to the antisymmetric `A = Lᵀ J L`, and `-A²`
/// has each `ν²` twice.
pub fn symplectic_eigenvalues(cov: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = cov.nrows() / 2;
    let l = cov.clone().cholesky().ok_or_else(|| Error::InvalidState("covariance not positive definite".into()))?.l();
    let a = l.transpose() * symplectic_form(n) * &l;
    let mut ev = linalg::symmetric_eigenvalues(&-(&a * &a));
    ev.sort_by(f64::total_cmp);
    Ok(ev.chunks(2).map(|p| (0.5 * (p[0] + p[1])).max(0.0).sqrt()).collect())
}

/// Symplectic area `a = 2√det Δ` of a single-mode block.
pub fn symplectic_area(delta: &DMatrix<f64>) -> Result<f64> {
    if delta.nrows() != 2 || delta.ncols() != 2 {
        return Err(Error::ShapeMismatch);
    }
    let det = delta.determinant();
    if det < 0.25 - UNCERTAINTY_TOL {
        return Err(Error::InvalidState(format!("det Δ = {det} below the vacuum bound ¼")));
    }
    Ok(2.0 * det.sqrt())
}

/// `H(a) = ½((a+1)ln(a+1) - (a-1)ln(a-1)) - ln 2`.
pub fn gaussian_entropy(a: f64) -> Result<f64> {
    if a < 1.0 - UNCERTAINTY_TOL {
        return Err(Error::InvalidArgument(format!("symplectic area {a} < 1")));
    }
    Ok(gaussian_entropy_clamped(a))
}

fn gaussian_entropy_clamped(a: f64) -> f64 {
    let a = a.max(1.0);
    let low = if a > 1.0 { (a - 1.0) * (a - 1.0).ln() } else { 0.0 };
    (0.5 * ((a + 1.0) * (a + 1.0).ln() - low) - LN_2).max(0.0)
}

/// Ohmic bath with a sharp cutoff, discretized into equal-width bands.
#[derive(Debug, Clone, PartialEq)]
pub struct OhmicBathParams {
    pub system_mass: f64,
    pub omega0: f64,
    pub gamma0: f64,
    pub cutoff: f64,
    pub bands: usize,
    pub band_mass: f64,
}

impl OhmicBathParams {
    /// `m_S = 1000`, `Ω_0 = 4`, `γ_0 = 1/40`, `Λ = 16`, unit band masses.
    pub fn standard(bands: usize) -> Self {
        Self { system_mass: 1000.0, omega0: 4.0, gamma0: 1.0 / 40.0, cutoff: 16.0, bands, band_mass: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.bands == 0 || self.bands > MAX_BANDS {
            return Err(Error::CapExceeded(format!("{} bands (allowed 1..={MAX_BANDS})", self.bands)));
        }
        if !(self.cutoff > 0.0 && self.system_mass > 0.0 && self.band_mass > 0.0 && self.omega0 > 0.0 && self.gamma0 >= 0.0) {
            return Err(Error::InvalidArgument("bath parameters must be positive".into()));
        }
        Ok(())
    }

    pub fn band_width(&self) -> f64 {
        self.cutoff / self.bands as f64
    }

    /// Band centres `ω_n = (n - ½)Δω`.
    pub fn frequencies(&self) -> Vec<f64> {
        let dw = self.band_width();
        (1..=self.bands).map(|n| (n as f64 - 0.5) * dw).collect()
    }

    /// `C_n = √((4 m_S M γ_0/π) ω_n² Δω)`, the discretized ohmic spectral density.
    pub fn couplings(&self) -> Vec<f64> {
        let dw = self.band_width();
        let k = 4.0 * self.system_mass * self.band_mass * self.gamma0 / PI;
        self.frequencies().iter().map(|w| (k * w * w * dw).sqrt()).collect()
    }

    /// Recurrence time `2π/Δω` of the discretized bath.
    pub fn recurrence_time(&self) -> f64 {
        TAU / self.band_width()
    }

    fn masses(&self) -> Vec<f64> {
        std::iter::once(self.system_mass).chain(std::iter::repeat_n(self.band_mass, self.bands)).collect()
    }

    /// Position-space stiffness matrix `K` of `H = ½pᵀM⁻¹p + ½xᵀKx`.
    fn stiffness(&self) -> DMatrix<f64> {
        let n = self.bands + 1;
        let mut k = DMatrix::zeros(n, n);
        k[(0, 0)] = self.system_mass * self.omega0 * self.omega0;
        for (i, (w, c)) in self.frequencies().iter().zip(self.couplings()).enumerate() {
            k[(i + 1, i + 1)] = self.band_mass * w * w;
            k[(0, i + 1)] = c;
            k[(i + 1, 0)] = c;
        }
        k
    }

    /// Phase-space Hamiltonian matrix `H` with `H = ½ zᵀ H z`.
    pub fn hamiltonian(&self) -> DMatrix<f64> {
        let n = self.bands + 1;
        let k = self.stiffness();
        let m = self.masses();
        let mut h = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                h[(2 * i, 2 * j)] = k[(i, j)];
            }
            h[(2 * i + 1, 2 * i + 1)] = 1.0 / m[i];
        }
        h
    }
}

/// Initial squeezing axis of the system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Squeeze {
    X,
    P,
}

/// System squeezed by `s` (in width) along `dir`, bath bands in their ground states.
pub fn initial_state(bath: &OhmicBathParams, s: f64, dir: Squeeze) -> Result<GaussianState> {
    bath.validate()?;
    if s < 1.0 {
        return Err(Error::InvalidArgument(format!("squeezing {s} < 1")));
    }
    let n = bath.bands + 1;
    let mut cov = DMatrix::zeros(2 * n, 2 * n);
    let mw = bath.system_mass * bath.omega0;
    let (vx, vp) = match dir {
        Squeeze::X => (1.0 / (2.0 * mw * s * s), s * s * mw / 2.0),
        Squeeze::P => (s * s / (2.0 * mw), mw / (2.0 * s * s)),
    };
    cov[(0, 0)] = vx;
    cov[(1, 1)] = vp;
    for (i, w) in bath.frequencies().iter().enumerate() {
        let mw = bath.band_mass * w;
        cov[(2 * i + 2, 2 * i + 2)] = 1.0 / (2.0 * mw);
        cov[(2 * i + 3, 2 * i + 3)] = mw / 2.0;
    }
    GaussianState::new(DVector::zeros(2 * n), cov)
}

/// Symplectic flow `S(t) = exp(J H t)` built from the normal modes of `M^{-½} K M^{-½}`.
pub fn symplectic_flow(bath: &OhmicBathParams, t: f64) -> Result<DMatrix<f64>> {
    bath.validate()?;
    let n = bath.bands + 1;
    let m = bath.masses();
    let k = bath.stiffness();
    let kw = DMatrix::from_fn(n, n, |i, j| k[(i, j)] / (m[i] * m[j]).sqrt());
    let eig = kw.symmetric_eigen();
    if eig.eigenvalues.iter().any(|&w2| w2 <= 0.0) {
        return Err(Error::InvalidArgument("coupled oscillators are unstable (stiffness not positive definite)".into()));
    }
    let v = &eig.eigenvectors;
    let w: Vec<f64> = eig.eigenvalues.iter().map(|x| x.sqrt()).collect();
    let f = |g: &dyn Fn(f64) -> f64| {
        let d = DMatrix::from_diagonal(&DVector::from_iterator(n, w.iter().map(|&x| g(x))));
        v * d * v.transpose()
    };
    let cw = f(&|x| (x * t).cos());
    let sw = f(&|x| (x * t).sin() / x);
    let ws = f(&|x| -x * (x * t).sin());
    let mut s = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let (ri, rj) = (m[i].sqrt(), m[j].sqrt());
            s[(2 * i, 2 * j)] = cw[(i, j)] * rj / ri;
            s[(2 * i, 2 * j + 1)] = sw[(i, j)] / (ri * rj);
            s[(2 * i + 1, 2 * j)] = ws[(i, j)] * ri * rj;
            s[(2 * i + 1, 2 * j + 1)] = cw[(i, j)] * ri / rj;
        }
    }
    Ok(s)
}

/// Evolve the squeezed system and ground-state bath for time `t < 2π/Δω`.
pub fn qbm_evolve(bath: &OhmicBathParams, s: f64, dir: Squeeze, t: f64) -> Result<GaussianState> {
    let t_rec = bath.recurrence_time();
    if t >= t_rec {
        return Err(Error::BeyondRecurrence { t, t_rec });
    }
    let init = initial_state(bath, s, dir)?;
    let flow = symplectic_flow(bath, t)?;
    let cov = &flow * init.covariance() * flow.transpose();
    let cov = (&cov + cov.transpose()) * 0.5;
    GaussianState::new(&flow * init.means(), cov)
}

/// `I(S:F)` with `frag` indexing bath bands (band n is mode n + 1).
///
/// Assumes a pure global state, so each entropy is taken on the smaller side.
pub fn qbm_mutual_info(state: &GaussianState, frag: &FragmentSpec) -> Result<f64> {
    let bands = state.modes() - 1;
    frag.validate(bands)?;
    if frag.is_empty() {
        return Ok(0.0);
    }
    let f: Vec<usize> = frag.indices().iter().map(|&b| b + 1).collect();
    let rest: Vec<usize> = frag.complement(bands).indices().iter().map(|&b| b + 1).collect();
    let with_system = |v: &[usize]| -> Vec<usize> { std::iter::once(0).chain(v.iter().copied()).collect() };
    let h_s = state.entropy(&[0])?;
    let h_f = if f.len() <= rest.len() + 1 { state.entropy(&f)? } else { state.entropy(&with_system(&rest))? };
    let h_sf = if f.len() < rest.len() { state.entropy(&with_system(&f))? } else { state.entropy(&rest)? };
    Ok(h_s + h_f - h_sf)
}

/// `I ≈ H_S + ½ ln(f/(1-f))`.
pub fn universal_pip(h_s: f64, f: f64) -> Result<f64> {
    if !(f > 0.0 && f < 1.0) {
        return Err(Error::InvalidArgument(format!("fraction {f} outside (0, 1)")));
    }
    Ok(h_s + 0.5 * (f / (1.0 - f)).ln())
}

/// `R_δ ≈ s^{2δ}`.
pub fn qbm_redundancy(s: f64, delta: f64) -> Result<f64> {
    if s <= 1.0 || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!("need s > 1 and 0 < δ < 1 (got {s}, {delta})")));
    }
    Ok(s.powf(2.0 * delta))
}

/// A Gaussian snapshot as a fragment-information source over bath bands.
#[derive(Debug, Clone)]
pub struct GaussianSource {
    pub state: GaussianState,
    h_s: f64,
}

impl GaussianSource {
    pub fn new(state: GaussianState) -> Result<Self> {
        if state.modes() < 2 {
            return Err(Error::InvalidArgument("need at least one bath band".into()));
        }
        let h_s = state.entropy(&[0])?;
        Ok(Self { state, h_s })
    }
}

impl Source for GaussianSource {
    fn env_len(&self) -> usize {
        self.state.modes() - 1
    }

    fn system_entropy(&self) -> f64 {
        self.h_s
    }

    fn mutual_info(&self, frag: &FragmentSpec) -> Result<f64> {
        qbm_mutual_info(&self.state, frag)
    }

    fn tag(&self) -> String {
        format!("gaussian:bands={}", self.state.modes() - 1)
    }
}
