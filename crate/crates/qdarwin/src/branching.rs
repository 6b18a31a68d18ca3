//! Branching states `Σ_k √p_k e^{iφ_k} |π_k⟩ ⊗_l |ε_k^(l)⟩` and their Gram-matrix fast path.
//!
//! Every reduced state of a branching state has the spectrum of a K×K matrix
//! built from products of per-subsystem overlaps, so fragment entropies cost
//! `O(K²·|F|)` regardless of how large the environment is.

use rand::Rng;

use crate::infomeasures::shannon;
use crate::linalg::{self, c};
use crate::numeric::POLICY;
use crate::qstate::{FragmentSpec, HilbertShape, StateVector};
use crate::{CMat, CVec, Error, Result, C64};

/// Largest number of branches.
pub const MAX_BRANCHES: usize = 64;
/// Largest number of environment subsystems.
pub const MAX_ENV: usize = 1_000_000;

/// Pure branching state of a K-dimensional system and N environment subsystems.
#[derive(Debug, Clone)]
pub struct BranchingState {
    probs: Vec<f64>,
    phases: Vec<f64>,
    env_dims: Vec<usize>,
    offsets: Vec<usize>,
    /// One flat amplitude buffer per branch; subsystem `l` occupies `offsets[l]..offsets[l+1]`.
    amps: Vec<Vec<C64>>,
}

impl BranchingState {
    /// `conditional[k][l]` is the state of subsystem `l` in branch `k`.
    pub fn new(probs: Vec<f64>, phases: Vec<f64>, conditional: Vec<Vec<CVec>>) -> Result<Self> {
        let k = probs.len();
        if k == 0 || k > MAX_BRANCHES {
            return Err(Error::CapExceeded(format!("{k} branches (allowed 1..={MAX_BRANCHES})")));
        }
        crate::infomeasures::ProbVector::new(probs.clone())?;
        if phases.len() != k || conditional.len() != k {
            return Err(Error::DimensionMismatch { expected: k, got: phases.len().min(conditional.len()) });
        }
        let n = conditional[0].len();
        if n > MAX_ENV {
            return Err(Error::CapExceeded(format!("{n} environment subsystems > {MAX_ENV}")));
        }
        let env_dims: Vec<usize> = conditional[0].iter().map(|v| v.len()).collect();
        let mut offsets = vec![0];
        for d in &env_dims {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut amps = Vec::with_capacity(k);
        for row in &conditional {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: row.len() });
            }
            let mut flat = Vec::with_capacity(*offsets.last().unwrap());
            for (l, v) in row.iter().enumerate() {
                if v.len() != env_dims[l] {
                    return Err(Error::DimensionMismatch { expected: env_dims[l], got: v.len() });
                }
                if (v.norm() - 1.0).abs() > POLICY.state_tol {
                    return Err(Error::InvalidState(format!("conditional state of subsystem {l} not normalized")));
                }
                flat.extend(v.iter());
            }
            amps.push(flat);
        }
        Ok(Self { probs, phases, env_dims, offsets, amps })
    }

    /// Number of branches K (the system dimension).
    pub fn system_dim(&self) -> usize {
        self.probs.len()
    }

    /// Number of environment subsystems N.
    pub fn env_len(&self) -> usize {
        self.env_dims.len()
    }

    pub fn env_dims(&self) -> &[usize] {
        &self.env_dims
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    /// Conditional state of subsystem `l` in branch `k`.
    pub fn conditional(&self, k: usize, l: usize) -> CVec {
        CVec::from_column_slice(&self.amps[k][self.offsets[l]..self.offsets[l + 1]])
    }

    /// Same state with replaced branch phases.
    pub fn with_phases(&self, phases: Vec<f64>) -> Result<Self> {
        if phases.len() != self.probs.len() {
            return Err(Error::DimensionMismatch { expected: self.probs.len(), got: phases.len() });
        }
        Ok(Self { phases, ..self.clone() })
    }

    /// `⟨ε_j^(l)|ε_k^(l)⟩`.
    pub fn overlap(&self, l: usize, j: usize, k: usize) -> C64 {
        let r = self.offsets[l]..self.offsets[l + 1];
        self.amps[j][r.clone()].iter().zip(&self.amps[k][r]).map(|(a, b)| a.conj() * b).sum()
    }

    /// K×K matrix of overlap products `Π_{l∈frag} ⟨ε_j^(l)|ε_k^(l)⟩`.
    pub fn overlap_product(&self, frag: &FragmentSpec) -> CMat {
        let k = self.system_dim();
        let mut m = CMat::from_element(k, k, c(1.0));
        for j in 0..k {
            for i in (j + 1)..k {
                let mut z = c(1.0);
                for &l in frag.indices() {
                    z *= self.overlap(l, j, i);
                    if z.norm() == 0.0 {
                        break;
                    }
                }
                m[(j, i)] = z;
                m[(i, j)] = z.conj();
            }
        }
        m
    }

    /// Dense state with the system as subsystem 0.
    pub fn to_state_vector(&self) -> Result<StateVector> {
        let mut dims = vec![self.system_dim()];
        dims.extend(&self.env_dims);
        let shape = HilbertShape::new(dims)?;
        let mut amps = CVec::zeros(shape.total());
        let block = shape.total() / self.system_dim();
        for k in 0..self.system_dim() {
            let mut v = CVec::from_element(1, C64::from_polar(self.probs[k].sqrt(), self.phases[k]));
            for l in 0..self.env_len() {
                v = linalg::kron_vec(&v, &self.conditional(k, l));
            }
            amps.rows_mut(k * block, block).copy_from(&v);
        }
        StateVector::new(shape, amps)
    }
}

/// Hermitian, PSD, unit-trace K×K matrix sharing its spectrum with a reduced state.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix(pub CMat);

impl GramMatrix {
    pub fn entropy(&self) -> f64 {
        linalg::matrix_entropy(&self.0)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.0)
    }
}

/// `G_jk = √(p_j p_k) e^{i(φ_k-φ_j)} Π_{l∈F} ⟨ε_j|ε_k⟩`; with `include_system` the
/// off-diagonal terms are multiplied by `⟨π_j|π_k⟩ = δ_jk`.
pub fn fragment_gram(b: &BranchingState, frag: &FragmentSpec, include_system: bool) -> Result<GramMatrix> {
    frag.validate(b.env_len())?;
    let k = b.system_dim();
    if include_system {
        return Ok(GramMatrix(CMat::from_diagonal(&CVec::from_iterator(k, b.probs.iter().map(|&p| c(p))))));
    }
    let ov = b.overlap_product(frag);
    Ok(GramMatrix(CMat::from_fn(k, k, |j, i| {
        C64::from_polar((b.probs[j] * b.probs[i]).sqrt(), b.phases[i] - b.phases[j]) * ov[(j, i)]
    })))
}

/// Entropy of the reduced state on `frag` (plus the system when `include_system`).
///
/// With the system included the global purity gives `H(S,F) = H(E∖F)`, which is
/// read off the Gram matrix of the complement.
pub fn fragment_entropy(b: &BranchingState, frag: &FragmentSpec, include_system: bool) -> Result<f64> {
    frag.validate(b.env_len())?;
    let target = if include_system { frag.complement(b.env_len()) } else { frag.clone() };
    Ok(fragment_gram(b, &target, false)?.entropy())
}

/// Entropy of the reduced system state, `H(ρ_S) = H(ρ_E)`.
pub fn system_entropy(b: &BranchingState) -> f64 {
    linalg::matrix_entropy(&fragment_gram(b, &FragmentSpec::range(0, b.env_len()), false).expect("full range").0)
}

/// Shannon entropy of the branch weights; equals `H_S` once the system is fully decohered.
pub fn pointer_entropy(b: &BranchingState) -> f64 {
    shannon(&b.probs)
}

/// `I(S:F) = H_S + H_F - H_{E∖F}`.
pub fn mutual_info_branching(b: &BranchingState, frag: &FragmentSpec) -> Result<f64> {
    let hf = fragment_entropy(b, frag, false)?;
    let hsf = fragment_entropy(b, frag, true)?;
    Ok(system_entropy(b) + hf - hsf)
}

/// Entropy of an equal-weight two-branch system with decoherence factor `gamma`:
/// `ln 2 - √Γ artanh √Γ - ln √(1-Γ)`.
pub fn two_branch_entropy(gamma: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::InvalidArgument(format!("decoherence factor {gamma} outside [0, 1]")));
    }
    // same expression rearranged as ln 2 - ½[(1+x)ln(1+x) + (1-x)ln(1-x)], finite at x = 1
    let x = gamma.sqrt();
    let a = (1.0 + x) * x.ln_1p();
    let b = if x < 1.0 { (1.0 - x) * (-x).ln_1p() } else { 0.0 };
    Ok((std::f64::consts::LN_2 - 0.5 * (a + b)).max(0.0))
}

/// `(H_F - H_F(0), H_S - H_{S d E∖F})` for an initially pure environment.
pub fn classical_quantum_decomposition(b: &BranchingState, frag: &FragmentSpec) -> Result<(f64, f64)> {
    let classical = fragment_entropy(b, frag, false)?;
    let rest = frag.complement(b.env_len());
    let decohered = fragment_gram(b, &rest, false)?.entropy();
    Ok((classical, system_entropy(b) - decohered))
}

/// Probability and entropy of the fragment state conditioned on finding the
/// system in `|s⟩` (a vector in the pointer basis).
pub fn conditional_fragment_entropy(b: &BranchingState, s: &CVec, frag: &FragmentSpec) -> Result<(f64, f64)> {
    frag.validate(b.env_len())?;
    let k = b.system_dim();
    if s.len() != k {
        return Err(Error::DimensionMismatch { expected: k, got: s.len() });
    }
    let a: Vec<C64> = (0..k).map(|j| C64::from_polar(b.probs[j].sqrt(), b.phases[j]) * s[j].conj()).collect();
    let w = b.overlap_product(&frag.complement(b.env_len()));
    // ρ_F = Σ B_jk |ε_j⟩⟨ε_k| with B_jk = a_j a_k* ⟨ε_k^R|ε_j^R⟩
    let bm = CMat::from_fn(k, k, |j, i| a[j] * a[i].conj() * w[(i, j)]);
    let g = b.overlap_product(frag);
    let prob = (&bm * &g).trace().re;
    if prob <= POLICY.eig_clip {
        return Ok((prob.max(0.0), 0.0));
    }
    let root = linalg::sqrt_psd(&bm);
    let m = &root * &g * &root;
    let eig: Vec<f64> = linalg::hermitian_eigenvalues(&m).into_iter().map(|x| x / prob).collect();
    Ok((prob, linalg::entropy_of_spectrum(&eig)))
}

/// Random branching state with Haar-random conditional states.
pub fn random_branching<R: Rng + ?Sized>(k: usize, env_dims: &[usize], rng: &mut R) -> Result<BranchingState> {
    let raw: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 1e-3).collect();
    let s: f64 = raw.iter().sum();
    let probs = raw.iter().map(|x| x / s).collect();
    let phases = (0..k).map(|_| rng.random::<f64>() * std::f64::consts::TAU).collect();
    let conditional = (0..k)
        .map(|_| env_dims.iter().map(|&d| linalg::haar_vector(d, rng)).collect())
        .collect();
    BranchingState::new(probs, phases, conditional)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::infomeasures::von_neumann_entropy;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::LN_2;

    fn two_branch(c0: f64, n: usize) -> BranchingState {
        // per-qubit overlap c0 between |0⟩ and cos θ|0⟩ + sin θ|1⟩
        let th = c0.acos();
        let a = linalg::basis(2, 0);
        let b = CVec::from_vec(vec![c(th.cos()), c(th.sin())]);
        BranchingState::new(vec![0.5, 0.5], vec![0.0, 0.0], vec![vec![a; n], vec![b; n]]).unwrap()
    }

    fn dense_entropy(psi: &StateVector, keep: &FragmentSpec) -> f64 {
        von_neumann_entropy(&psi.reduced(keep).unwrap())
    }

    #[test]
    fn gram_matches_dense_reduced_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let b = random_branching(3, &[2, 3, 2, 2, 2], &mut rng).unwrap();
            let psi = b.to_state_vector().unwrap();
            let frag = FragmentSpec::new(vec![1, 3]).unwrap();
            let hf = fragment_entropy(&b, &frag, false).unwrap();
            let hsf = fragment_entropy(&b, &frag, true).unwrap();
            assert!((hf - dense_entropy(&psi, &frag.shifted(1))).abs() < 1e-9);
            let sf = frag.shifted(1).union(&FragmentSpec::new(vec![0]).unwrap());
            assert!((hsf - dense_entropy(&psi, &sf)).abs() < 1e-9);
        }
    }

    #[test]
    fn empty_fragment_is_rank_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b = random_branching(3, &[2, 2], &mut rng).unwrap();
        let g = fragment_gram(&b, &FragmentSpec::empty(), false).unwrap();
        assert!(g.entropy().abs() < 1e-10);
        assert!((g.0.trace().re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn perfect_records_give_diagonal_gram() {
        let b = two_branch(0.0, 3);
        let g = fragment_gram(&b, &FragmentSpec::new(vec![2]).unwrap(), false).unwrap();
        assert!(g.0[(0, 1)].norm() < 1e-15);
        assert!((g.0[(0, 0)].re - 0.5).abs() < 1e-15);
        let gs = fragment_gram(&b, &FragmentSpec::empty(), true).unwrap();
        assert!(gs.0[(0, 1)].norm() == 0.0);
    }

    #[test]
    fn two_by_two_eigenvalues() {
        let (p0, p1, cc) = (0.3, 0.7, 0.6);
        let th: f64 = f64::acos(cc);
        let b = BranchingState::new(
            vec![p0, p1],
            vec![0.4, -1.0],
            vec![vec![linalg::basis(2, 0)], vec![CVec::from_vec(vec![c(th.cos()), c(th.sin())])]],
        )
        .unwrap();
        let e = fragment_gram(&b, &FragmentSpec::range(0, 1), false).unwrap().eigenvalues();
        let r = (1.0 - 4.0 * p0 * p1 * (1.0 - cc * cc)).sqrt();
        assert!((e[0] - (1.0 + r) / 2.0).abs() < 1e-12);
        assert!((e[1] - (1.0 - r) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn global_purity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let b = random_branching(4, &[2; 6], &mut rng).unwrap();
        assert!(fragment_entropy(&b, &FragmentSpec::range(0, 6), true).unwrap().abs() < 1e-10);
    }

    #[test]
    fn cnot_single_qubit_fragment_gives_h_s() {
        let b = two_branch(0.0, 5);
        let hs = system_entropy(&b);
        for l in 0..5 {
            let f = FragmentSpec::new(vec![l]).unwrap();
            assert!((fragment_entropy(&b, &f, false).unwrap() - hs).abs() < 1e-12);
            assert!((mutual_info_branching(&b, &f).unwrap() - LN_2).abs() < 1e-12);
        }
        assert!((mutual_info_branching(&b, &FragmentSpec::range(0, 5)).unwrap() - 2.0 * hs).abs() < 1e-12);
        assert!(mutual_info_branching(&b, &FragmentSpec::empty()).unwrap().abs() < 1e-12);
    }

    #[test]
    fn two_branch_closed_form_matches_dense() {
        let n = 10;
        let cc = 0.8;
        let b = two_branch(cc, n);
        let psi = b.to_state_vector().unwrap();
        for m in 1..n {
            let f = FragmentSpec::range(0, m);
            let closed = two_branch_entropy(cc.powi(2 * n as i32)).unwrap() + two_branch_entropy(cc.powi(2 * m as i32)).unwrap()
                - two_branch_entropy(cc.powi(2 * (n - m) as i32)).unwrap();
            let dense = dense_entropy(&psi, &FragmentSpec::new(vec![0]).unwrap())
                + dense_entropy(&psi, &f.shifted(1))
                - dense_entropy(&psi, &f.shifted(1).union(&FragmentSpec::new(vec![0]).unwrap()));
            assert!((closed - dense).abs() < 1e-9, "m = {m} {closed} {dense}");
            assert!((closed - mutual_info_branching(&b, &f).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn two_branch_entropy_values() {
        assert!((two_branch_entropy(0.0).unwrap() - LN_2).abs() < 1e-15);
        assert!(two_branch_entropy(1.0).unwrap().abs() < 1e-15);
        let g: f64 = 0.5;
        let mut series = LN_2;
        for n in 1..2000 {
            let nf = n as f64;
            series -= g.powi(n) / (2.0 * nf * (2.0 * nf - 1.0));
        }
        assert!((two_branch_entropy(g).unwrap() - series).abs() < 1e-14);
        let x = g.sqrt();
        let printed = LN_2 - x * x.atanh() - (1.0 - g).sqrt().ln();
        assert!((two_branch_entropy(g).unwrap() - printed).abs() < 1e-14);
        assert!(two_branch_entropy(1.5).is_err());
        assert!(two_branch_entropy(-0.1).is_err());
    }

    #[test]
    fn decomposition_sums_to_mutual_information() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let b = random_branching(2, &[2; 8], &mut rng).unwrap();
        for m in 0..=8 {
            let f = FragmentSpec::range(0, m);
            let (cl, q) = classical_quantum_decomposition(&b, &f).unwrap();
            assert!((cl + q - mutual_info_branching(&b, &f).unwrap()).abs() < 1e-9);
        }
        let (cl, q) = classical_quantum_decomposition(&b, &FragmentSpec::empty()).unwrap();
        assert!(cl.abs() < 1e-12 && q.abs() < 1e-12, "{cl} {q}");
        let (cl, q) = classical_quantum_decomposition(&b, &FragmentSpec::range(0, 8)).unwrap();
        let hs = system_entropy(&b);
        assert!((q - hs).abs() < 1e-12 && (cl - hs).abs() < 1e-9);
    }

    #[test]
    fn quantum_term_vanishes_for_large_environment() {
        let b = two_branch(0.6, 50);
        let (_, q) = classical_quantum_decomposition(&b, &FragmentSpec::range(0, 20)).unwrap();
        assert!(q.abs() < 1e-6);
    }

    #[test]
    fn zero_probability_branch() {
        let b = BranchingState::new(
            vec![1.0, 0.0],
            vec![0.0, 0.0],
            vec![vec![linalg::basis(2, 0); 3], vec![linalg::basis(2, 1); 3]],
        )
        .unwrap();
        assert_eq!(system_entropy(&b), 0.0);
        assert_eq!(pointer_entropy(&b), 0.0);
        assert!(mutual_info_branching(&b, &FragmentSpec::range(0, 2)).unwrap().abs() < 1e-12);
        let psi = b.to_state_vector().unwrap();
        let p1: f64 = psi.amplitudes().rows(8, 8).iter().map(|z| z.norm_sqr()).sum();
        assert_eq!(p1, 0.0);
    }

    #[test]
    fn conditional_fragment_entropy_pointer_basis() {
        let b = two_branch(0.0, 6);
        let (p, h) = conditional_fragment_entropy(&b, &linalg::basis(2, 0), &FragmentSpec::range(0, 2)).unwrap();
        assert!((p - 0.5).abs() < 1e-12 && h.abs() < 1e-12);
        // x-basis outcome leaves F in the unconditional mixture
        let plus = linalg::bloch_state(std::f64::consts::FRAC_PI_2, 0.0);
        let (p, h) = conditional_fragment_entropy(&b, &plus, &FragmentSpec::range(0, 2)).unwrap();
        assert!((p - 0.5).abs() < 1e-12 && (h - LN_2).abs() < 1e-9);
    }

    #[test]
    fn conditional_fragment_entropy_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let b = random_branching(2, &[2; 5], &mut rng).unwrap();
        let psi = b.to_state_vector().unwrap();
        let s = linalg::bloch_state(1.1, 0.4);
        let frag = FragmentSpec::new(vec![0, 3]).unwrap();
        let (p, h) = conditional_fragment_entropy(&b, &s, &frag).unwrap();
        let rho = psi.to_density();
        let cond = crate::infomeasures::conditional_state(
            &rho,
            &linalg::outer(&s, &s),
            &FragmentSpec::new(vec![0]).unwrap(),
        )
        .unwrap();
        let rest = cond.state.unwrap();
        let hf = von_neumann_entropy(&crate::qstate::partial_trace(&rest, &frag).unwrap());
        assert!((p - cond.probability).abs() < 1e-10);
        assert!((h - hf).abs() < 1e-9);
    }

    #[test]
    fn caps_enforced() {
        let e = BranchingState::new(vec![1.0 / 65.0; 65], vec![0.0; 65], vec![vec![]; 65]).unwrap_err();
        assert!(e.is_cap());
    }
}
