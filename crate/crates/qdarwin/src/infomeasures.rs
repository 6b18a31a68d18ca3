//! Entropies and correlation measures. All values are in nats.

use rayon::prelude::*;

use crate::linalg::{self, c};
use crate::numeric::POLICY;
use crate::qstate::{lift, partial_trace, DensityMatrix, FragmentSpec};
use crate::{CMat, CVec, Error, Result, C64};

/// Normalized probability vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.iter().any(|&p| !(p >= -POLICY.eig_clip)) {
            return Err(Error::InvalidArgument("negative or NaN probability".into()));
        }
        let s: f64 = probs.iter().sum();
        if (s - 1.0).abs() > POLICY.spectrum_tol {
            return Err(Error::InvalidArgument(format!("probabilities sum to {s}")));
        }
        Ok(Self(probs))
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }
}

/// Complete set of orthogonal projectors on some subsystems.
#[derive(Debug, Clone)]
pub struct MeasurementBasis {
    projectors: Vec<CMat>,
}

impl MeasurementBasis {
    /// Validates idempotence, mutual orthogonality and completeness.
    pub fn new(projectors: Vec<CMat>) -> Result<Self> {
        let d = projectors.first().map(|p| p.nrows()).ok_or(Error::InvalidArgument("no projectors".into()))?;
        let mut sum = CMat::zeros(d, d);
        for (i, p) in projectors.iter().enumerate() {
            if p.nrows() != d || p.ncols() != d {
                return Err(Error::DimensionMismatch { expected: d, got: p.nrows() });
            }
            if linalg::max_abs_diff(&(p * p), p) > POLICY.state_tol {
                return Err(Error::InvalidArgument(format!("projector {i} not idempotent")));
            }
            for q in &projectors[i + 1..] {
                if (p * q).iter().any(|z| z.norm() > POLICY.state_tol) {
                    return Err(Error::InvalidArgument("projectors not orthogonal".into()));
                }
            }
            sum += p;
        }
        if linalg::max_abs_diff(&sum, &CMat::identity(d, d)) > POLICY.state_tol {
            return Err(Error::InvalidArgument("projectors do not sum to identity".into()));
        }
        Ok(Self { projectors })
    }

    /// Rank-one projectors onto the given orthonormal vectors.
    pub fn from_vectors(vectors: &[CVec]) -> Result<Self> {
        Self::new(vectors.iter().map(|v| linalg::outer(v, v)).collect())
    }

    /// Computational basis in dimension `dim`.
    pub fn computational(dim: usize) -> Self {
        Self { projectors: (0..dim).map(|i| linalg::outer(&linalg::basis(dim, i), &linalg::basis(dim, i))).collect() }
    }

    /// Qubit basis `{|n⟩, |-n⟩}` for Bloch direction `(theta, phi)`.
    pub fn qubit(theta: f64, phi: f64) -> Self {
        let up = linalg::bloch_state(theta, phi);
        let down = linalg::bloch_state(std::f64::consts::PI - theta, phi + std::f64::consts::PI);
        Self { projectors: vec![linalg::outer(&up, &up), linalg::outer(&down, &down)] }
    }

    /// Orthonormal basis given by the columns of a unitary.
    pub(crate) fn from_unitary_columns(u: &CMat) -> Self {
        Self {
            projectors: (0..u.ncols())
                .map(|j| {
                    let v = u.column(j).into_owned();
                    linalg::outer(&v, &v)
                })
                .collect(),
        }
    }

    pub fn projectors(&self) -> &[CMat] {
        &self.projectors
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].nrows()
    }
}

/// Weighted collection of density matrices sharing one shape.
#[derive(Debug, Clone)]
pub struct Ensemble {
    members: Vec<(f64, DensityMatrix)>,
}

impl Ensemble {
    pub fn new(members: Vec<(f64, DensityMatrix)>) -> Result<Self> {
        ProbVector::new(members.iter().map(|m| m.0).collect())?;
        if let Some(first) = members.first() {
            if members.iter().any(|m| m.1.shape() != first.1.shape()) {
                return Err(Error::ShapeMismatch);
            }
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &[(f64, DensityMatrix)] {
        &self.members
    }
}

/// Result of conditioning on a projector.
#[derive(Debug, Clone)]
pub struct Conditional {
    /// Renormalized state of the unmeasured subsystems; `None` for a zero-probability outcome.
    pub state: Option<DensityMatrix>,
    pub probability: f64,
}

/// `-Tr ρ ln ρ`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    linalg::entropy_of_spectrum(&rho.eigenvalues())
}

/// `-Σ p ln p` with `0 ln 0 = 0`.
pub fn shannon_entropy(p: &ProbVector) -> f64 {
    shannon(p.probs())
}

pub(crate) fn shannon(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum()
}

fn check_bipartition(rho: &DensityMatrix, part: &FragmentSpec) -> Result<FragmentSpec> {
    let n = rho.shape().len();
    part.validate(n)?;
    if part.is_empty() || part.len() == n {
        return Err(Error::TrivialBipartition);
    }
    Ok(part.complement(n))
}

/// `I(A:B) = H(A) + H(B) - H(A,B)` for the cut `part_a | rest`.
pub fn mutual_information(rho: &DensityMatrix, part_a: &FragmentSpec) -> Result<f64> {
    let part_b = check_bipartition(rho, part_a)?;
    let ha = von_neumann_entropy(&partial_trace(rho, part_a)?);
    let hb = von_neumann_entropy(&partial_trace(rho, &part_b)?);
    Ok(ha + hb - von_neumann_entropy(rho))
}

/// Conditions `rho` on `projector` acting on `on`; returns the state of the rest.
pub fn conditional_state(rho: &DensityMatrix, projector: &CMat, on: &FragmentSpec) -> Result<Conditional> {
    let rest = check_bipartition(rho, on)?;
    let p = lift(projector, on, rho.shape())?;
    let post = &p * rho.matrix() * &p;
    let prob = post.trace().re;
    if prob <= POLICY.eig_clip {
        return Ok(Conditional { state: None, probability: prob.max(0.0) });
    }
    let full = DensityMatrix::from_parts(rho.shape().clone(), post.unscale(prob));
    Ok(Conditional { state: Some(partial_trace(&full, &rest)?), probability: prob })
}

/// `Σ_k p_k H(rest | k)` for a measurement on `on`.
pub fn average_conditional_entropy(rho: &DensityMatrix, basis: &MeasurementBasis, on: &FragmentSpec) -> Result<f64> {
    let mut h = 0.0;
    for pr in basis.projectors() {
        let cond = conditional_state(rho, pr, on)?;
        if let Some(s) = cond.state {
            h += cond.probability * von_neumann_entropy(&s);
        }
    }
    Ok(h)
}

/// `J = H(rest) - H(rest | basis on on)`.
pub fn asymmetric_mutual_info(rho: &DensityMatrix, basis: &MeasurementBasis, on: &FragmentSpec) -> Result<f64> {
    let rest = check_bipartition(rho, on)?;
    let h = von_neumann_entropy(&partial_trace(rho, &rest)?);
    Ok(h - average_conditional_entropy(rho, basis, on)?)
}

/// `D = I - J` for a fixed basis on `on`.
pub fn discord(rho: &DensityMatrix, basis: &MeasurementBasis, on: &FragmentSpec) -> Result<f64> {
    Ok(mutual_information(rho, on)? - asymmetric_mutual_info(rho, basis, on)?)
}

/// Grid over orthonormal bases used by [`min_discord`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisGrid {
    /// Polar steps over the Bloch hemisphere (qubits).
    pub theta_steps: usize,
    /// Azimuthal steps (qubits).
    pub phi_steps: usize,
    /// Steps per parameter for qutrit bases (five parameters).
    pub qutrit_steps: usize,
    /// Largest measured dimension accepted.
    pub max_dim: usize,
}

impl Default for BasisGrid {
    fn default() -> Self {
        Self { theta_steps: 90, phi_steps: 180, qutrit_steps: 8, max_dim: 3 }
    }
}

impl BasisGrid {
    /// Every basis of the grid for a subsystem of dimension `dim`.
    pub fn bases(&self, dim: usize) -> Result<Vec<MeasurementBasis>> {
        if dim > self.max_dim {
            return Err(Error::CapExceeded(format!("basis search on dimension {dim} > {}", self.max_dim)));
        }
        let pi = std::f64::consts::PI;
        match dim {
            2 => {
                let mut out = Vec::with_capacity((self.theta_steps + 1) * self.phi_steps);
                for i in 0..=self.theta_steps {
                    let theta = 0.5 * pi * i as f64 / self.theta_steps.max(1) as f64;
                    let nphi = if i == 0 { 1 } else { self.phi_steps };
                    for j in 0..nphi {
                        out.push(MeasurementBasis::qubit(theta, 2.0 * pi * j as f64 / self.phi_steps as f64));
                    }
                }
                Ok(out)
            }
            3 => {
                let n = self.qutrit_steps.max(1);
                let grid = |k: usize, span: f64| span * k as f64 / n as f64;
                let mut out = Vec::with_capacity(n.pow(5));
                for a in 0..n {
                    for b in 0..n {
                        for g in 0..n {
                            for p1 in 0..n {
                                for p2 in 0..n {
                                    let u = qutrit_unitary(
                                        grid(a, 2.0 * pi),
                                        grid(b, pi),
                                        grid(g, 2.0 * pi),
                                        grid(p1, 2.0 * pi),
                                        grid(p2, 2.0 * pi),
                                    );
                                    out.push(MeasurementBasis::from_unitary_columns(&u));
                                }
                            }
                        }
                    }
                }
                Ok(out)
            }
            _ => Err(Error::InvalidArgument(format!("basis grid for dimension {dim}"))),
        }
    }
}

/// Real z-y-z rotation followed by relative phases on two basis vectors.
fn qutrit_unitary(a: f64, b: f64, g: f64, p1: f64, p2: f64) -> CMat {
    let rz = |t: f64| {
        let mut m = CMat::identity(3, 3);
        m[(0, 0)] = c(t.cos());
        m[(0, 1)] = c(-t.sin());
        m[(1, 0)] = c(t.sin());
        m[(1, 1)] = c(t.cos());
        m
    };
    let mut ry = CMat::identity(3, 3);
    ry[(1, 1)] = c(b.cos());
    ry[(1, 2)] = c(-b.sin());
    ry[(2, 1)] = c(b.sin());
    ry[(2, 2)] = c(b.cos());
    let mut ph = CMat::identity(3, 3);
    ph[(1, 1)] = C64::from_polar(1.0, p1);
    ph[(2, 2)] = C64::from_polar(1.0, p2);
    ph * rz(a) * ry * rz(g)
}

/// Minimum of [`discord`] over a grid of projective measurements on `on`.
pub fn min_discord(rho: &DensityMatrix, on: &FragmentSpec, grid: &BasisGrid) -> Result<f64> {
    check_bipartition(rho, on)?;
    let dim: usize = on.indices().iter().map(|&i| rho.shape().dims()[i]).product();
    let bases = grid.bases(dim)?;
    let i = mutual_information(rho, on)?;
    let js: Vec<f64> = bases
        .par_iter()
        .map(|b| asymmetric_mutual_info(rho, b, on))
        .collect::<Result<Vec<f64>>>()?;
    let jmax = js.into_iter().fold(f64::NEG_INFINITY, f64::max);
    Ok(i - jmax)
}

/// `χ = H(Σ p ρ) - Σ p H(ρ)`.
pub fn holevo(ensemble: &Ensemble) -> Result<f64> {
    if ensemble.members.is_empty() {
        return Ok(0.0);
    }
    let avg = DensityMatrix::mixture(&ensemble.members)?;
    let inner: f64 = ensemble.members.iter().map(|(p, r)| p * von_neumann_entropy(r)).sum();
    Ok(von_neumann_entropy(&avg) - inner)
}

/// Classical mutual information of the joint outcome distribution of two local measurements.
pub fn shannon_mutual_observables(
    rho: &DensityMatrix,
    obs_a: &MeasurementBasis,
    on_a: &FragmentSpec,
    obs_b: &MeasurementBasis,
    on_b: &FragmentSpec,
) -> Result<f64> {
    if !on_a.is_disjoint(on_b) {
        return Err(Error::InvalidIndices("measured parts overlap".into()));
    }
    let pa: Vec<CMat> = obs_a.projectors().iter().map(|p| lift(p, on_a, rho.shape())).collect::<Result<_>>()?;
    let pb: Vec<CMat> = obs_b.projectors().iter().map(|p| lift(p, on_b, rho.shape())).collect::<Result<_>>()?;
    let mut joint = vec![vec![0.0; pb.len()]; pa.len()];
    for (j, a) in pa.iter().enumerate() {
        let ar = a * rho.matrix();
        for (k, b) in pb.iter().enumerate() {
            joint[j][k] = (&ar * b).trace().re.max(0.0);
        }
    }
    let ma: Vec<f64> = joint.iter().map(|r| r.iter().sum()).collect();
    let mb: Vec<f64> = (0..pb.len()).map(|k| joint.iter().map(|r| r[k]).sum()).collect();
    let flat: Vec<f64> = joint.into_iter().flatten().collect();
    Ok(shannon(&ma) + shannon(&mb) - shannon(&flat))
}
