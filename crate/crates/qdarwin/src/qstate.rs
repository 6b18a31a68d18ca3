//! Dense pure and mixed states over tensor-product Hilbert spaces.
//!
//! Subsystem 0 is the leftmost tensor factor, so it is the most significant
//! digit of a basis index. Storage is dense; everything here is meant as the
//! exact reference layer for small systems.

use nalgebra::DVector;

use crate::linalg::{self, c};
use crate::numeric::POLICY;
use crate::{CMat, CVec, Error, Result, C64};

/// Ordered list of subsystem dimensions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HilbertShape {
    dims: Vec<usize>,
    total: usize,
}

impl HilbertShape {
    /// Shape with the default dimension cap.
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        Self::with_cap(dims, POLICY.dim_cap)
    }

    pub fn with_cap(dims: Vec<usize>, cap: usize) -> Result<Self> {
        if let Some(&d) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidArgument(format!("subsystem dimension {d} < 2")));
        }
        let mut total: usize = 1;
        for &d in &dims {
            total = total
                .checked_mul(d)
                .filter(|&t| t <= cap)
                .ok_or(Error::DimensionCap { requested: total.saturating_mul(d), cap })?;
        }
        Ok(Self { dims, total })
    }

    /// `n` qubits.
    pub fn qubits(n: usize) -> Result<Self> {
        Self::new(vec![2; n])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Product of all dimensions.
    pub fn total(&self) -> usize {
        self.total
    }

    /// Number of subsystems.
    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.dims.len()];
        for i in (0..self.dims.len().saturating_sub(1)).rev() {
            s[i] = s[i + 1] * self.dims[i + 1];
        }
        s
    }

    /// Global index offsets of every joint basis state of `indices`, enumerated
    /// with the first listed subsystem as the most significant digit.
    pub(crate) fn offsets(&self, indices: &[usize]) -> Vec<usize> {
        let strides = self.strides();
        let mut out = vec![0usize];
        for &i in indices {
            let mut next = Vec::with_capacity(out.len() * self.dims[i]);
            for &o in &out {
                for k in 0..self.dims[i] {
                    next.push(o + k * strides[i]);
                }
            }
            out = next;
        }
        out
    }

    /// Shape of the listed subsystems, in the listed order.
    pub fn sub(&self, indices: &[usize]) -> Result<HilbertShape> {
        HilbertShape::new(indices.iter().map(|&i| self.dims[i]).collect())
    }
}

/// A set of subsystem positions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FragmentSpec {
    indices: Vec<usize>,
}

impl FragmentSpec {
    /// Indices are sorted; duplicates are rejected.
    pub fn new(mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidIndices(format!("duplicate index in {indices:?}")));
        }
        Ok(Self { indices })
    }

    pub fn empty() -> Self {
        Self { indices: Vec::new() }
    }

    /// `{start, .., end-1}`.
    pub fn range(start: usize, end: usize) -> Self {
        Self { indices: (start..end).collect() }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    /// Checks every index is below `n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        match self.indices.last() {
            Some(&i) if i >= n => {
                Err(Error::InvalidIndices(format!("index {i} out of range for {n} subsystems")))
            }
            _ => Ok(()),
        }
    }

    /// Indices in `0..n` not in this fragment.
    pub fn complement(&self, n: usize) -> Self {
        Self { indices: (0..n).filter(|&i| !self.contains(i)).collect() }
    }

    /// Indices shifted by `k` (used to skip a leading system factor).
    pub fn shifted(&self, k: usize) -> Self {
        Self { indices: self.indices.iter().map(|&i| i + k).collect() }
    }

    /// Union with another fragment.
    pub fn union(&self, other: &FragmentSpec) -> Self {
        let mut v: Vec<usize> = self.indices.iter().chain(&other.indices).copied().collect();
        v.sort_unstable();
        v.dedup();
        Self { indices: v }
    }

    /// True if no index is shared.
    pub fn is_disjoint(&self, other: &FragmentSpec) -> bool {
        self.indices.iter().all(|&i| !other.contains(i))
    }
}

/// Normalized pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    shape: HilbertShape,
    amps: CVec,
}

impl StateVector {
    /// Validates length and norm.
    pub fn new(shape: HilbertShape, amps: CVec) -> Result<Self> {
        if amps.len() != shape.total() {
            return Err(Error::DimensionMismatch { expected: shape.total(), got: amps.len() });
        }
        let n = amps.norm();
        if (n - 1.0).abs() > POLICY.state_tol {
            return Err(Error::InvalidState(format!("norm {n} differs from 1")));
        }
        Ok(Self { shape, amps })
    }

    /// Normalizes `amps` before validating.
    pub fn normalized(shape: HilbertShape, amps: CVec) -> Result<Self> {
        let n = amps.norm();
        if n == 0.0 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        Self::new(shape, amps.unscale(n))
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(shape: HilbertShape, index: usize) -> Result<Self> {
        if index >= shape.total() {
            return Err(Error::InvalidArgument(format!("basis index {index} out of range")));
        }
        let amps = linalg::basis(shape.total(), index);
        Ok(Self { shape, amps })
    }

    /// Tensor product of single-subsystem vectors.
    pub fn product(factors: &[CVec]) -> Result<Self> {
        let shape = HilbertShape::new(factors.iter().map(|f| f.len()).collect())?;
        let mut amps = CVec::from_element(1, c(1.0));
        for f in factors {
            amps = linalg::kron_vec(&amps, f);
        }
        Self::normalized(shape, amps)
    }

    pub fn shape(&self) -> &HilbertShape {
        &self.shape
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amps
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps.dotc(&other.amps)
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix { shape: self.shape.clone(), mat: linalg::outer(&self.amps, &self.amps) }
    }

    /// Matrix with rows indexed by the `left` subsystems and columns by the rest.
    pub(crate) fn reshape(&self, left: &[usize]) -> CMat {
        let rest: Vec<usize> = (0..self.shape.len()).filter(|i| !left.contains(i)).collect();
        let lo = self.shape.offsets(left);
        let ro = self.shape.offsets(&rest);
        CMat::from_fn(lo.len(), ro.len(), |a, b| self.amps[lo[a] + ro[b]])
    }

    /// Reduced state on `keep`, computed from the amplitude matrix.
    pub fn reduced(&self, keep: &FragmentSpec) -> Result<DensityMatrix> {
        keep.validate(self.shape.len())?;
        let m = self.reshape(keep.indices());
        let shape = self.shape.sub(keep.indices())?;
        Ok(DensityMatrix { shape, mat: &m * m.adjoint() })
    }

    /// Entropy of the reduced state on `keep`, using the smaller side of the cut.
    pub fn entanglement_entropy(&self, keep: &FragmentSpec) -> Result<f64> {
        keep.validate(self.shape.len())?;
        let m = self.reshape(keep.indices());
        let g = if m.nrows() <= m.ncols() { &m * m.adjoint() } else { m.adjoint() * &m };
        Ok(linalg::matrix_entropy(&g))
    }
}

/// Valid density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    shape: HilbertShape,
    mat: CMat,
}

impl DensityMatrix {
    /// Validates Hermiticity, trace and positivity.
    pub fn new(shape: HilbertShape, mat: CMat) -> Result<Self> {
        let d = shape.total();
        if mat.nrows() != d || mat.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: mat.nrows() });
        }
        let h = linalg::hermiticity_defect(&mat);
        if h > POLICY.state_tol {
            return Err(Error::InvalidState(format!("not Hermitian (defect {h:e})")));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > POLICY.state_tol || tr.im.abs() > POLICY.state_tol {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = linalg::hermitian_eigenvalues(&mat).last().copied().unwrap_or(0.0);
        if min < -POLICY.state_tol {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self { shape, mat })
    }

    /// Diagonal density matrix on one subsystem.
    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        let shape = HilbertShape::new(vec![probs.len()])?;
        let mat = CMat::from_diagonal(&DVector::from_iterator(probs.len(), probs.iter().map(|&p| c(p))));
        Self::new(shape, mat)
    }

    /// Mixture `Σ w_k ρ_k` of states with one shape.
    pub fn mixture(members: &[(f64, DensityMatrix)]) -> Result<Self> {
        let first = members.first().ok_or(Error::InvalidArgument("empty mixture".into()))?;
        let mut mat = CMat::zeros(first.1.dim(), first.1.dim());
        for (w, r) in members {
            if r.shape != first.1.shape {
                return Err(Error::ShapeMismatch);
            }
            mat += &r.mat * c(*w);
        }
        Self::new(first.1.shape.clone(), mat)
    }

    /// Skips validation; for matrices built by trusted internal code.
    pub(crate) fn from_parts(shape: HilbertShape, mat: CMat) -> Self {
        Self { shape, mat }
    }

    pub fn shape(&self) -> &HilbertShape {
        &self.shape
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.shape.total()
    }

    /// Eigenvalues, descending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.mat)
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn fidelity_with_pure(&self, psi: &StateVector) -> f64 {
        psi.amplitudes().dotc(&(&self.mat * psi.amplitudes())).re
    }

    /// Tensor product with another density matrix.
    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        let dims = [self.shape.dims(), other.shape.dims()].concat();
        Ok(DensityMatrix { shape: HilbertShape::new(dims)?, mat: linalg::kron(&self.mat, &other.mat) })
    }
}

/// Kronecker product of two pure states; shapes concatenate.
pub fn tensor(a: &StateVector, b: &StateVector) -> Result<StateVector> {
    let dims = [a.shape.dims(), b.shape.dims()].concat();
    let shape = HilbertShape::new(dims)?;
    Ok(StateVector { shape, amps: linalg::kron_vec(&a.amps, &b.amps) })
}

/// Reduced density matrix on `keep` (indices kept in ascending order).
pub fn partial_trace(rho: &DensityMatrix, keep: &FragmentSpec) -> Result<DensityMatrix> {
    let n = rho.shape.len();
    keep.validate(n)?;
    let rest = keep.complement(n);
    let ko = rho.shape.offsets(keep.indices());
    let ro = rho.shape.offsets(rest.indices());
    let mut out = CMat::zeros(ko.len(), ko.len());
    for (a, &ka) in ko.iter().enumerate() {
        for (b, &kb) in ko.iter().enumerate() {
            let mut s = C64::new(0.0, 0.0);
            for &r in &ro {
                s += rho.mat[(ka + r, kb + r)];
            }
            out[(a, b)] = s;
        }
    }
    Ok(DensityMatrix { shape: rho.shape.sub(keep.indices())?, mat: out })
}

/// Embeds an operator on `targets` into the full space of `shape`.
pub fn lift(op: &CMat, targets: &FragmentSpec, shape: &HilbertShape) -> Result<CMat> {
    targets.validate(shape.len())?;
    let to = shape.offsets(targets.indices());
    if op.nrows() != to.len() || op.ncols() != to.len() {
        return Err(Error::DimensionMismatch { expected: to.len(), got: op.nrows() });
    }
    let ro = shape.offsets(targets.complement(shape.len()).indices());
    let mut out = CMat::zeros(shape.total(), shape.total());
    for &r in &ro {
        for (a, &ta) in to.iter().enumerate() {
            for (b, &tb) in to.iter().enumerate() {
                out[(ta + r, tb + r)] = op[(a, b)];
            }
        }
    }
    Ok(out)
}

/// Applies `op` to `targets` without checking unitarity.
pub(crate) fn apply_local(amps: &CVec, op: &CMat, targets: &[usize], shape: &HilbertShape) -> CVec {
    let rest: Vec<usize> = (0..shape.len()).filter(|i| !targets.contains(i)).collect();
    let to = shape.offsets(targets);
    let ro = shape.offsets(&rest);
    let mut out = amps.clone();
    let mut buf = CVec::zeros(to.len());
    for &r in &ro {
        for (a, &t) in to.iter().enumerate() {
            buf[a] = amps[t + r];
        }
        let y = op * &buf;
        for (a, &t) in to.iter().enumerate() {
            out[t + r] = y[a];
        }
    }
    out
}

/// Applies a unitary acting on `targets` (targets in ascending order).
pub fn apply_unitary(state: &StateVector, u: &CMat, targets: &FragmentSpec) -> Result<StateVector> {
    apply_unitary_ordered(state, u, targets.indices())
}

/// As [`apply_unitary`], with `u`'s tensor factors matching `targets` in the given order.
pub fn apply_unitary_ordered(state: &StateVector, u: &CMat, targets: &[usize]) -> Result<StateVector> {
    FragmentSpec::new(targets.to_vec())?.validate(state.shape.len())?;
    let d: usize = targets.iter().map(|&i| state.shape.dims()[i]).product();
    if u.nrows() != d || u.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, got: u.nrows() });
    }
    let defect = linalg::unitarity_defect(u);
    if defect > POLICY.state_tol {
        return Err(Error::NonUnitary(defect));
    }
    let amps = apply_local(&state.amps, u, targets, &state.shape);
    Ok(StateVector { shape: state.shape.clone(), amps })
}

/// One term of a Schmidt decomposition.
#[derive(Debug, Clone)]
pub struct SchmidtTerm {
    pub coefficient: f64,
    pub left: StateVector,
    pub right: StateVector,
}

/// Schmidt decomposition across `left` versus the remaining subsystems.
///
/// Coefficients are sorted descending; terms with coefficient below `1e-10` are dropped.
pub fn schmidt(state: &StateVector, left: &FragmentSpec) -> Result<Vec<SchmidtTerm>> {
    let n = state.shape.len();
    left.validate(n)?;
    if left.is_empty() || left.len() == n {
        return Err(Error::TrivialBipartition);
    }
    let right = left.complement(n);
    let m = state.reshape(left.indices());
    let svd = m.svd(true, true);
    let u = svd.u.expect("left singular vectors requested");
    let vt = svd.v_t.expect("right singular vectors requested");
    let ls = state.shape.sub(left.indices())?;
    let rs = state.shape.sub(right.indices())?;
    let mut terms: Vec<SchmidtTerm> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > POLICY.state_tol)
        .map(|(i, &s)| SchmidtTerm {
            coefficient: s,
            left: StateVector { shape: ls.clone(), amps: u.column(i).into_owned() },
            right: StateVector { shape: rs.clone(), amps: vt.row(i).transpose() },
        })
        .collect();
    terms.sort_by(|a, b| b.coefficient.total_cmp(&a.coefficient));
    Ok(terms)
}

/// Multiplies amplitude `i` by `exp(-i·phases[i])`.
pub fn evolve_diagonal(state: &StateVector, phases: &[f64]) -> Result<StateVector> {
    if phases.len() != state.amps.len() {
        return Err(Error::DimensionMismatch { expected: state.amps.len(), got: phases.len() });
    }
    let amps = CVec::from_iterator(
        phases.len(),
        state.amps.iter().zip(phases).map(|(a, &p)| a * C64::from_polar(1.0, -p)),
    );
    Ok(StateVector { shape: state.shape.clone(), amps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{cnot, hadamard, haar_unitary, haar_vector, pauli_z};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ghz3() -> StateVector {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut a = CVec::zeros(8);
        a[0] = c(s);
        a[7] = c(s);
        StateVector::new(HilbertShape::qubits(3).unwrap(), a).unwrap()
    }

    #[test]
    fn tensor_basis_product() {
        let q = HilbertShape::qubits(1).unwrap();
        let s = tensor(&StateVector::basis(q.clone(), 0).unwrap(), &StateVector::basis(q, 1).unwrap()).unwrap();
        assert_eq!(s.amplitudes()[1], c(1.0));
        assert_eq!(s.shape().dims(), &[2, 2]);
    }

    #[test]
    fn tensor_cap() {
        let big = StateVector::basis(HilbertShape::new(vec![1 << 10]).unwrap(), 0).unwrap();
        let big2 = StateVector::basis(HilbertShape::new(vec![1 << 11]).unwrap(), 0).unwrap();
        assert!(tensor(&big, &big2).unwrap_err().is_cap());
    }

    #[test]
    fn ghz_partial_trace_matches_index_contraction() {
        let rho = ghz3().to_density();
        // brute force: sum over the third index with explicit bit arithmetic
        let mut oracle = CMat::zeros(4, 4);
        for a in 0..4 {
            for b in 0..4 {
                for r in 0..2 {
                    oracle[(a, b)] += rho.matrix()[(a * 2 + r, b * 2 + r)];
                }
            }
        }
        let red = partial_trace(&rho, &FragmentSpec::new(vec![0, 1]).unwrap()).unwrap();
        assert!(linalg::max_abs_diff(red.matrix(), &oracle) < 1e-15);
        assert!((red.matrix()[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!((red.matrix()[(3, 3)].re - 0.5).abs() < 1e-15);
        assert!(red.matrix()[(0, 3)].norm() < 1e-15);
    }

    #[test]
    fn partial_trace_middle_qubit() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let psi = StateVector::new(HilbertShape::qubits(3).unwrap(), haar_vector(8, &mut rng)).unwrap();
        let rho = psi.to_density();
        let keep = FragmentSpec::new(vec![0, 2]).unwrap();
        let red = partial_trace(&rho, &keep).unwrap();
        let mut oracle = CMat::zeros(4, 4);
        for a in 0..4usize {
            for b in 0..4usize {
                for r in 0..2usize {
                    let ia = ((a >> 1) << 2) | (r << 1) | (a & 1);
                    let ib = ((b >> 1) << 2) | (r << 1) | (b & 1);
                    oracle[(a, b)] += rho.matrix()[(ia, ib)];
                }
            }
        }
        assert!(linalg::max_abs_diff(red.matrix(), &oracle) < 1e-14);
        let red2 = psi.reduced(&keep).unwrap();
        assert!(linalg::max_abs_diff(red.matrix(), red2.matrix()) < 1e-14);
    }

    #[test]
    fn bell_marginal_is_maximally_mixed() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut a = CVec::zeros(4);
        a[0] = c(s);
        a[3] = c(s);
        let bell = StateVector::new(HilbertShape::qubits(2).unwrap(), a).unwrap();
        let r = partial_trace(&bell.to_density(), &FragmentSpec::new(vec![0]).unwrap()).unwrap();
        assert!(linalg::max_abs_diff(r.matrix(), &(CMat::identity(2, 2) * c(0.5))) < 1e-15);
    }

    #[test]
    fn trace_nothing_out_returns_input() {
        let rho = ghz3().to_density();
        let r = partial_trace(&rho, &FragmentSpec::range(0, 3)).unwrap();
        assert_eq!(r.matrix(), rho.matrix());
    }

    #[test]
    fn invalid_indices_rejected() {
        assert!(FragmentSpec::new(vec![1, 1]).is_err());
        let rho = ghz3().to_density();
        assert!(partial_trace(&rho, &FragmentSpec::new(vec![3]).unwrap()).is_err());
    }

    #[test]
    fn cnot_truth_table() {
        let s = StateVector::basis(HilbertShape::qubits(2).unwrap(), 2).unwrap();
        let out = apply_unitary(&s, &cnot(), &FragmentSpec::range(0, 2)).unwrap();
        assert!((out.amplitudes()[3] - c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn non_unitary_rejected() {
        let s = StateVector::basis(HilbertShape::qubits(1).unwrap(), 0).unwrap();
        let m = CMat::identity(2, 2) * c(2.0);
        assert!(matches!(apply_unitary(&s, &m, &FragmentSpec::range(0, 1)), Err(Error::NonUnitary(_))));
        let h = hadamard();
        assert!(apply_unitary(&s, &h, &FragmentSpec::range(0, 2)).is_err());
    }

    #[test]
    fn unitary_then_inverse_restores() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let psi = StateVector::new(HilbertShape::qubits(4).unwrap(), haar_vector(16, &mut rng)).unwrap();
        let u = haar_unitary(4, &mut rng);
        let t = FragmentSpec::new(vec![1, 3]).unwrap();
        let back = apply_unitary(&apply_unitary(&psi, &u, &t).unwrap(), &u.adjoint(), &t).unwrap();
        assert!(back.fidelity(&psi) > 1.0 - 1e-12);
    }

    #[test]
    fn disjoint_unitaries_match_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let psi = StateVector::new(HilbertShape::qubits(3).unwrap(), haar_vector(8, &mut rng)).unwrap();
        let ua = haar_unitary(2, &mut rng);
        let ub = haar_unitary(4, &mut rng);
        let seq = apply_unitary(
            &apply_unitary(&psi, &ua, &FragmentSpec::new(vec![0]).unwrap()).unwrap(),
            &ub,
            &FragmentSpec::new(vec![1, 2]).unwrap(),
        )
        .unwrap();
        let joint = apply_unitary(&psi, &linalg::kron(&ua, &ub), &FragmentSpec::range(0, 3)).unwrap();
        let d = (seq.amplitudes() - joint.amplitudes()).camax();
        assert!(d < 1e-12);
    }

    #[test]
    fn schmidt_bell_and_product() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = StateVector::new(
            HilbertShape::qubits(2).unwrap(),
            CVec::from_vec(vec![c(s), c(0.0), c(0.0), c(s)]),
        )
        .unwrap();
        let t = schmidt(&bell, &FragmentSpec::new(vec![0]).unwrap()).unwrap();
        assert_eq!(t.len(), 2);
        assert!((t[0].coefficient - s).abs() < 1e-12);
        let prod = StateVector::basis(HilbertShape::qubits(2).unwrap(), 1).unwrap();
        let t = schmidt(&prod, &FragmentSpec::new(vec![0]).unwrap()).unwrap();
        assert_eq!(t.len(), 1);
        assert!((t[0].coefficient - 1.0).abs() < 1e-12);
    }

    #[test]
    fn schmidt_coefficients_match_reduced_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let shape = HilbertShape::new(vec![2, 3, 2]).unwrap();
        let psi = StateVector::new(shape, haar_vector(12, &mut rng)).unwrap();
        let left = FragmentSpec::new(vec![1]).unwrap();
        let terms = schmidt(&psi, &left).unwrap();
        let eig = partial_trace(&psi.to_density(), &left).unwrap().eigenvalues();
        for (t, e) in terms.iter().zip(&eig) {
            assert!((t.coefficient * t.coefficient - e).abs() < 1e-9);
        }
        let total: f64 = terms.iter().map(|t| t.coefficient.powi(2)).sum();
        assert!((total - 1.0).abs() < 1e-10);
        // reconstruct with the right factors placed after the left ones
        let mut rebuilt = CVec::zeros(12);
        for t in &terms {
            rebuilt += linalg::kron_vec(t.left.amplitudes(), t.right.amplitudes()) * c(t.coefficient);
        }
        let permuted = psi.reshape(&[1]);
        let flat = CVec::from_fn(12, |i, _| permuted[(i / 4, i % 4)]);
        assert!((rebuilt.dotc(&flat)).norm_sqr() > 1.0 - 1e-9);
    }

    #[test]
    fn complementary_spectra_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let psi = StateVector::new(HilbertShape::qubits(5).unwrap(), haar_vector(32, &mut rng)).unwrap();
        let a = FragmentSpec::new(vec![0, 3]).unwrap();
        let ea = psi.reduced(&a).unwrap().eigenvalues();
        let eb = psi.reduced(&a.complement(5)).unwrap().eigenvalues();
        for (x, y) in ea.iter().zip(&eb) {
            assert!((x - y).abs() < 1e-9);
        }
        assert!(eb[ea.len()..].iter().all(|x| x.abs() < 1e-9));
    }

    #[test]
    fn evolve_diagonal_matches_matrix_exponential() {
        let t = std::f64::consts::FRAC_PI_4;
        let psi = StateVector::product(&vec![linalg::bloch_state(std::f64::consts::FRAC_PI_2, 0.0); 2]).unwrap();
        let zz = linalg::kron(&pauli_z(), &pauli_z());
        let u = (zz * C64::new(0.0, -t)).exp();
        let dense = &u * psi.amplitudes();
        let phases: Vec<f64> = [1.0, -1.0, -1.0, 1.0].iter().map(|e| e * t).collect();
        let fast = evolve_diagonal(&psi, &phases).unwrap();
        assert!((fast.amplitudes() - dense).camax() < 1e-12);
    }

    #[test]
    fn evolve_diagonal_zero_and_global_phase() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let psi = StateVector::new(HilbertShape::qubits(3).unwrap(), haar_vector(8, &mut rng)).unwrap();
        assert_eq!(evolve_diagonal(&psi, &[0.0; 8]).unwrap(), psi);
        let g = evolve_diagonal(&psi, &[0.7; 8]).unwrap();
        let k = FragmentSpec::new(vec![1]).unwrap();
        let d = linalg::max_abs_diff(psi.reduced(&k).unwrap().matrix(), g.reduced(&k).unwrap().matrix());
        assert!(d < 1e-14);
        assert!(evolve_diagonal(&psi, &[0.0; 3]).is_err());
    }
}
