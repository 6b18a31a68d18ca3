//! Envariance: symmetries of entangled states that follow from repeatability and
//! locality, and the probabilities they force.
//!
//! Branch-counting probabilities are exact rationals; floats appear only in the
//! state-level checks.

use num_rational::Ratio;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::linalg::{self, c, hadamard, outer};
use crate::numeric::POLICY;
use crate::qstate::{apply_unitary_ordered, DensityMatrix, FragmentSpec, HilbertShape, StateVector};
use crate::{CMat, CVec, Error, Result, C64};

/// Default cap on the number of finegrained branches.
pub const FINEGRAIN_CAP: u64 = 1 << 16;
/// Cap on the number of trials in a frequency distribution.
pub const FREQUENCY_CAP: usize = 1_000_000;

fn gram_defect(vs: &[CVec]) -> f64 {
    let mut worst = 0.0_f64;
    for (i, a) in vs.iter().enumerate() {
        for (j, b) in vs.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((a.dotc(b) - c(target)).norm());
        }
    }
    worst
}

/// `Σ_k a_k |s_k⟩|e_k⟩` with orthonormal `s_k` and `e_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtPair {
    coefficients: Vec<C64>,
    system_basis: Vec<CVec>,
    env_basis: Vec<CVec>,
}

impl SchmidtPair {
    pub fn new(coefficients: Vec<C64>, system_basis: Vec<CVec>, env_basis: Vec<CVec>) -> Result<Self> {
        let k = coefficients.len();
        if k == 0 || system_basis.len() != k || env_basis.len() != k {
            return Err(Error::InvalidArgument("need one system and one environment vector per coefficient".into()));
        }
        let norm: f64 = coefficients.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > POLICY.state_tol {
            return Err(Error::InvalidState(format!("Schmidt weights sum to {norm}")));
        }
        for basis in [&system_basis, &env_basis] {
            let d = basis[0].len();
            if basis.iter().any(|v| v.len() != d) {
                return Err(Error::InvalidArgument("basis vectors differ in length".into()));
            }
            if gram_defect(basis) > POLICY.state_tol {
                return Err(Error::InvalidState("basis is not orthonormal".into()));
            }
        }
        Ok(Self { coefficients, system_basis, env_basis })
    }

    /// Schmidt state in computational bases of dimension `coefficients.len()` on both sides.
    pub fn computational(coefficients: Vec<C64>) -> Result<Self> {
        let k = coefficients.len();
        let basis: Vec<CVec> = (0..k).map(|i| linalg::basis(k, i)).collect();
        Self::new(coefficients, basis.clone(), basis)
    }

    /// Even state `Σ_k e^{iφ_k}|k⟩|k⟩/√K`.
    pub fn even(phases: &[f64]) -> Result<Self> {
        let a = 1.0 / (phases.len() as f64).sqrt();
        Self::computational(phases.iter().map(|&p| C64::from_polar(a, p)).collect())
    }

    pub fn coefficients(&self) -> &[C64] {
        &self.coefficients
    }

    pub fn system_basis(&self) -> &[CVec] {
        &self.system_basis
    }

    pub fn env_basis(&self) -> &[CVec] {
        &self.env_basis
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn system_dim(&self) -> usize {
        self.system_basis[0].len()
    }

    pub fn env_dim(&self) -> usize {
        self.env_basis[0].len()
    }

    /// Global state on the shape `[d_S, d_E]`.
    pub fn global_state(&self) -> StateVector {
        let mut amps = CVec::zeros(self.system_dim() * self.env_dim());
        for ((a, s), e) in self.coefficients.iter().zip(&self.system_basis).zip(&self.env_basis) {
            amps += linalg::kron_vec(s, e) * *a;
        }
        let shape = HilbertShape::new(vec![self.system_dim(), self.env_dim()]).expect("small dimensions");
        StateVector::new(shape, amps).expect("normalized by construction")
    }

    /// Entanglement entropy `-Σ|a_k|² ln|a_k|²`.
    pub fn entropy(&self) -> f64 {
        linalg::entropy_of_spectrum(&self.coefficients.iter().map(|a| a.norm_sqr()).collect::<Vec<_>>())
    }

    /// Same state with each coefficient multiplied by `e^{iθ_k}`.
    pub fn rephased(&self, thetas: &[f64]) -> Result<Self> {
        if thetas.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), got: thetas.len() });
        }
        let coefficients = self.coefficients.iter().zip(thetas).map(|(a, &t)| a * C64::from_polar(1.0, t)).collect();
        Ok(Self { coefficients, ..self.clone() })
    }
}

/// Overlaps of one pair of candidate states and their records.
#[derive(Debug, Clone, PartialEq)]
pub struct PairOverlap {
    pub j: usize,
    pub k: usize,
    /// `⟨s_j|s_k⟩`.
    pub system: C64,
    /// `⟨ε_j|ε_k⟩`, or `None` when either state was perturbed.
    pub record: Option<C64>,
    /// `|⟨s_j|s_k⟩(1 − ⟨ε_j|ε_k⟩)|`.
    pub defect: f64,
    /// True when the pair is inconsistent with unperturbed copying.
    pub violation: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalityReport {
    pub pairs: Vec<PairOverlap>,
    /// Candidates that the transfer does not leave unperturbed.
    pub perturbed: Vec<usize>,
}

impl OrthogonalityReport {
    pub fn consistent(&self) -> bool {
        self.pairs.iter().all(|p| !p.violation)
    }
}

/// Runs `transfer` on `|s_k⟩|e_0⟩` for each candidate and checks that every pair of
/// unperturbed states is either orthogonal or left without distinguishable records.
pub fn orthogonality_check(s_states: &[CVec], transfer: &CMat, env_init: &CVec) -> Result<OrthogonalityReport> {
    const TOL: f64 = 1e-9;
    if s_states.is_empty() {
        return Err(Error::InvalidArgument("no candidate states".into()));
    }
    let ds = s_states[0].len();
    let de = env_init.len();
    if s_states.iter().any(|s| s.len() != ds) {
        return Err(Error::InvalidArgument("candidate states differ in dimension".into()));
    }
    if transfer.nrows() != ds * de || transfer.ncols() != ds * de {
        return Err(Error::DimensionMismatch { expected: ds * de, got: transfer.nrows() });
    }
    let defect = linalg::unitarity_defect(transfer);
    if defect > POLICY.state_tol {
        return Err(Error::NonUnitary(defect));
    }
    let s_states: Vec<CVec> = s_states.iter().map(|s| s.normalize()).collect();
    let e0 = env_init.normalize();

    // Record ε_k = (⟨s_k| ⊗ 1) U |s_k⟩|e_0⟩; the state is unperturbed iff ε_k carries all the norm.
    let mut records = Vec::with_capacity(s_states.len());
    let mut perturbed = Vec::new();
    for (k, s) in s_states.iter().enumerate() {
        let out = transfer * linalg::kron_vec(s, &e0);
        let eps = CVec::from_fn(de, |e, _| (0..ds).map(|a| s[a].conj() * out[a * de + e]).sum());
        if (eps.norm_squared() - 1.0).abs() > TOL {
            perturbed.push(k);
            records.push(None);
        } else {
            records.push(Some(eps));
        }
    }
    let mut pairs = Vec::new();
    for j in 0..s_states.len() {
        for k in j + 1..s_states.len() {
            let system = s_states[j].dotc(&s_states[k]);
            let record = match (&records[j], &records[k]) {
                (Some(a), Some(b)) => Some(a.dotc(b)),
                _ => None,
            };
            let (defect, violation) = match record {
                Some(r) => {
                    let d = (system * (c(1.0) - r)).norm();
                    (d, d > TOL)
                }
                None => (f64::NAN, true),
            };
            pairs.push(PairOverlap { j, k, system, record, defect, violation });
        }
    }
    Ok(OrthogonalityReport { pairs, perturbed })
}

/// Swap of `|s_k⟩` and `|s_l⟩` on `S`, followed by the counterswap on `E`.
#[derive(Debug, Clone)]
pub struct SwapOutcome {
    pub swapped: StateVector,
    pub restored: StateVector,
    /// Acts on `E` only.
    pub counterswap: CMat,
    /// Fidelity of the swapped state with the original.
    pub swapped_fidelity: f64,
    /// Fidelity of the restored state with the original.
    pub restored_fidelity: f64,
    /// True when `|a_k| = |a_l|`, so that the counterswap exists.
    pub envariant: bool,
}

fn exchange(basis: &[CVec], k: usize, l: usize, phase: C64) -> CMat {
    let d = basis[0].len();
    let (bk, bl) = (&basis[k], &basis[l]);
    CMat::identity(d, d) - outer(bk, bk) - outer(bl, bl) + outer(bk, bl) * phase + outer(bl, bk) * phase.conj()
}

/// Applies `u_S(k⇄l)` then the counterswap `e^{i(φ_k−φ_l)}|e_k⟩⟨e_l| + h.c.` on `E`.
pub fn swap_and_counterswap(state: &SchmidtPair, k: usize, l: usize) -> Result<SwapOutcome> {
    if k >= state.len() || l >= state.len() || k == l {
        return Err(Error::InvalidArgument(format!("swap indices ({k}, {l}) invalid for {} terms", state.len())));
    }
    let (ak, al) = (state.coefficients[k], state.coefficients[l]);
    let envariant = (ak.norm() - al.norm()).abs() <= POLICY.state_tol;
    let psi = state.global_state();
    let swap = exchange(&state.system_basis, k, l, c(1.0));
    let rel = if ak.norm() > 0.0 && al.norm() > 0.0 { (ak / ak.norm()) * (al / al.norm()).conj() } else { c(1.0) };
    let counterswap = exchange(&state.env_basis, k, l, rel);
    let swapped = apply_unitary_ordered(&psi, &swap, &[0])?;
    let restored = apply_unitary_ordered(&swapped, &counterswap, &[1])?;
    Ok(SwapOutcome {
        swapped_fidelity: swapped.fidelity(&psi),
        restored_fidelity: restored.fidelity(&psi),
        swapped,
        restored,
        counterswap,
        envariant,
    })
}

/// Phase unitary on `S` and its countertransformation on `E`.
#[derive(Debug, Clone)]
pub struct PhaseOutcome {
    pub transformed_fidelity: f64,
    pub restored_fidelity: f64,
}

/// Applies `Σ e^{iθ_k}|s_k⟩⟨s_k|` on `S` and undoes it with `Σ e^{-iθ_k}|e_k⟩⟨e_k|` on `E`.
pub fn phase_and_counterphase(state: &SchmidtPair, thetas: &[f64]) -> Result<PhaseOutcome> {
    if thetas.len() != state.len() {
        return Err(Error::DimensionMismatch { expected: state.len(), got: thetas.len() });
    }
    let diag = |basis: &[CVec], sign: f64| {
        let d = basis[0].len();
        let mut u = CMat::identity(d, d);
        for (b, &t) in basis.iter().zip(thetas) {
            u += outer(b, b) * (C64::from_polar(1.0, sign * t) - c(1.0));
        }
        u
    };
    let psi = state.global_state();
    let transformed = apply_unitary_ordered(&psi, &diag(&state.system_basis, 1.0), &[0])?;
    let restored = apply_unitary_ordered(&transformed, &diag(&state.env_basis, -1.0), &[1])?;
    Ok(PhaseOutcome { transformed_fidelity: transformed.fidelity(&psi), restored_fidelity: restored.fidelity(&psi) })
}

/// Target weights `μ_k / M` with `M = Σ μ_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FineGrainSpec {
    mu: Vec<u64>,
    total: u64,
}

impl FineGrainSpec {
    pub fn new(mu: Vec<u64>) -> Result<Self> {
        Self::with_cap(mu, FINEGRAIN_CAP)
    }

    /// Zero numerators are allowed and describe branches of vanishing amplitude.
    pub fn with_cap(mu: Vec<u64>, cap: u64) -> Result<Self> {
        let total = mu.iter().try_fold(0u64, |acc, &m| acc.checked_add(m)).ok_or_else(|| Error::CapExceeded("branch count overflows".into()))?;
        if total == 0 {
            return Err(Error::InvalidArgument("at least one numerator must be positive".into()));
        }
        if total > cap {
            return Err(Error::CapExceeded(format!("{total} finegrained branches > {cap}")));
        }
        Ok(Self { mu, total })
    }

    /// Largest-remainder rounding of `weights` to multiples of `1/m`.
    pub fn approximating(weights: &[f64], m: u64) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if weights.iter().any(|&w| w < 0.0) || (sum - 1.0).abs() > POLICY.state_tol {
            return Err(Error::InvalidArgument("weights must be a probability vector".into()));
        }
        let scaled: Vec<f64> = weights.iter().map(|w| w * m as f64).collect();
        let mut mu: Vec<u64> = scaled.iter().map(|s| s.floor() as u64).collect();
        let short = m - mu.iter().sum::<u64>().min(m);
        let mut order: Vec<usize> = (0..weights.len()).collect();
        order.sort_by(|&a, &b| (scaled[b] - scaled[b].floor()).total_cmp(&(scaled[a] - scaled[a].floor())));
        for &i in order.iter().take(short as usize) {
            mu[i] += 1;
        }
        Self::new(mu)
    }

    pub fn numerators(&self) -> &[u64] {
        &self.mu
    }

    pub fn total(&self) -> u64 {
        self.total
    }
}

/// A finegrained state: `Σ_k √(μ_k/M) |k⟩ (Σ_{j∈k} |c_j⟩/√μ_k) |e_j⟩` as a Schmidt pair
/// between `S⊗C` and `E`, with `M` equal coefficients.
#[derive(Debug, Clone)]
pub struct FineGrained {
    pub pair: SchmidtPair,
    /// Outcome `k` owning each finegrained branch.
    pub owner: Vec<usize>,
    /// Norm of the state before normalization, `√M`.
    pub scale: f64,
}

fn owners(spec: &FineGrainSpec) -> Vec<usize> {
    spec.mu.iter().enumerate().flat_map(|(k, &m)| std::iter::repeat_n(k, m as usize)).collect()
}

/// Dense finegrained state. `S⊗C` has dimension `K·M` and `E` has dimension `M`.
pub fn fine_grained_state(spec: &FineGrainSpec, phases: &[f64]) -> Result<FineGrained> {
    let k = spec.mu.len();
    let m = spec.total as usize;
    if phases.len() != k {
        return Err(Error::DimensionMismatch { expected: k, got: phases.len() });
    }
    if k * m * m > POLICY.dim_cap {
        return Err(Error::DimensionCap { requested: k * m * m, cap: POLICY.dim_cap });
    }
    let owner = owners(spec);
    let amp = 1.0 / (m as f64).sqrt();
    let coefficients = owner.iter().map(|&o| C64::from_polar(amp, phases[o])).collect();
    let system_basis = owner.iter().enumerate().map(|(j, &o)| linalg::basis(k * m, o * m + j)).collect();
    let env_basis = (0..m).map(|j| linalg::basis(m, j)).collect();
    Ok(FineGrained { pair: SchmidtPair::new(coefficients, system_basis, env_basis)?, owner, scale: (m as f64).sqrt() })
}

/// Probabilities forced by envariance: after finegraining, every branch carries weight
/// `(μ_k/M)·(1/μ_k) = 1/M`, all branches are swappable, and outcome `k` owns `μ_k` of them.
pub fn fine_grain_born(spec: &FineGrainSpec) -> Result<Vec<Ratio<u64>>> {
    let m = spec.total;
    let even = Ratio::new(1, m);
    let mut counts = vec![0u64; spec.mu.len()];
    for (k, &mu) in spec.mu.iter().enumerate() {
        for _ in 0..mu {
            let weight = Ratio::new(mu, m) * Ratio::new(1, mu);
            if weight != even {
                return Err(Error::NotEnvariant);
            }
            counts[k] += 1;
        }
    }
    Ok(counts.into_iter().map(|n| Ratio::new(n, m)).collect())
}

pub fn ratio_to_f64(r: &Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn check_subset(n: u64, subset: &[u64]) -> Result<Vec<u64>> {
    if n == 0 {
        return Err(Error::InvalidArgument("empty outcome set".into()));
    }
    let mut s = subset.to_vec();
    s.sort_unstable();
    s.dedup();
    if s.last().is_some_and(|&x| x >= n) {
        return Err(Error::InvalidIndices(format!("subset element outside 0..{n}")));
    }
    Ok(s)
}

/// `p(κ) = n_κ / N` for a coarse-grained event over `N` equiprobable outcomes `0..N`.
pub fn coarse_grain_probability(n: u64, subset: &[u64]) -> Result<Ratio<u64>> {
    Ok(Ratio::new(check_subset(n, subset)?.len() as u64, n))
}

/// The same probability built by eliminating outcomes outside `κ` one at a time:
/// each elimination from `r` remaining outcomes multiplies by `(r−1)/r`.
pub fn coarse_grain_by_elimination(n: u64, subset: &[u64]) -> Result<Ratio<u64>> {
    let s = check_subset(n, subset)?;
    let mut p = Ratio::from_integer(1u64);
    let mut remaining = n;
    for x in 0..n {
        if s.binary_search(&x).is_err() {
            p *= Ratio::new(remaining - 1, remaining);
            remaining -= 1;
        }
    }
    Ok(p)
}

/// Hermitian, idempotent, mutually commuting projectors.
#[derive(Debug, Clone)]
pub struct RecordProjectorSet {
    projectors: Vec<CMat>,
    dim: usize,
}

impl RecordProjectorSet {
    pub fn new(projectors: Vec<CMat>) -> Result<Self> {
        const TOL: f64 = 1e-10;
        let dim = projectors.first().map(|p| p.nrows()).ok_or_else(|| Error::InvalidArgument("no projectors".into()))?;
        for p in &projectors {
            if p.nrows() != dim || p.ncols() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: p.nrows() });
            }
            if linalg::hermiticity_defect(p) > TOL || linalg::max_abs_diff(&(p * p), p) > TOL {
                return Err(Error::InvalidArgument("not an orthogonal projector".into()));
            }
        }
        for (i, p) in projectors.iter().enumerate() {
            for q in &projectors[i + 1..] {
                if linalg::max_abs_diff(&(p * q), &(q * p)) > TOL {
                    return Err(Error::NonCommuting);
                }
            }
        }
        Ok(Self { projectors, dim })
    }

    /// Projectors onto unions of computational basis states.
    pub fn from_subsets(dim: usize, subsets: &[Vec<usize>]) -> Result<Self> {
        let ps = subsets
            .iter()
            .map(|s| {
                if s.iter().any(|&i| i >= dim) {
                    return Err(Error::InvalidIndices(format!("index outside 0..{dim}")));
                }
                Ok(CMat::from_fn(dim, dim, |a, b| if a == b && s.contains(&a) { c(1.0) } else { c(0.0) }))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(ps)
    }

    pub fn projectors(&self) -> &[CMat] {
        &self.projectors
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// Largest elementwise deviation of each lattice identity over all pairs and triples.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AlgebraReport {
    pub commutativity: f64,
    pub associativity: f64,
    pub absorption: f64,
    pub distributivity: f64,
    pub orthocomplement: f64,
}

impl AlgebraReport {
    pub fn max_defect(&self) -> f64 {
        [self.commutativity, self.associativity, self.absorption, self.distributivity, self.orthocomplement]
            .into_iter()
            .fold(0.0, f64::max)
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.max_defect() <= tol
    }
}

/// Checks the Boolean-algebra identities with `P∧Q = PQ`, `P∨Q = P+Q−PQ` and `¬P = 1−P`.
pub fn record_algebra_check(set: &RecordProjectorSet) -> AlgebraReport {
    let id = CMat::identity(set.dim, set.dim);
    let meet = |p: &CMat, q: &CMat| p * q;
    let join = |p: &CMat, q: &CMat| p + q - p * q;
    let not = |p: &CMat| &id - p;
    let d = linalg::max_abs_diff;
    let ps = &set.projectors;
    let mut r = AlgebraReport::default();
    for p in ps {
        let np = not(p);
        r.orthocomplement = r
            .orthocomplement
            .max(meet(p, &np).camax())
            .max(d(&join(p, &np), &id))
            .max(d(&not(&np), p));
        for q in ps {
            r.commutativity = r.commutativity.max(d(&meet(p, q), &meet(q, p))).max(d(&join(p, q), &join(q, p)));
            r.absorption = r.absorption.max(d(&meet(p, &join(p, q)), p)).max(d(&join(p, &meet(p, q)), p));
            for s in ps {
                r.associativity = r
                    .associativity
                    .max(d(&meet(&meet(p, q), s), &meet(p, &meet(q, s))))
                    .max(d(&join(&join(p, q), s), &join(p, &join(q, s))));
                r.distributivity = r
                    .distributivity
                    .max(d(&meet(p, &join(q, s)), &join(&meet(p, q), &meet(p, s))))
                    .max(d(&join(p, &meet(q, s)), &meet(&join(p, q), &join(p, s))));
            }
        }
    }
    r
}

/// Distribution of the number `m` of 1's in `M` repetitions of `α|0⟩ + β|1⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyDistribution {
    /// `p_M(m) = C(M,m)|α|^{2(M−m)}|β|^{2m}`.
    pub probs: Vec<f64>,
    /// `|γ_m| = √p_M(m)`, proportional to `√C(M,m)`.
    pub amplitudes: Vec<f64>,
    pub beta2: f64,
}

impl FrequencyDistribution {
    pub fn trials(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn mean(&self) -> f64 {
        self.probs.iter().enumerate().map(|(m, p)| m as f64 * p).sum()
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// `exp(−(m − |β|²M)²/(2M|α|²|β|²)) / √(2πM|α|²|β|²)` on the same support.
    pub fn gaussian(&self) -> Vec<f64> {
        let mm = self.trials() as f64;
        let var = mm * self.beta2 * (1.0 - self.beta2);
        let mean = mm * self.beta2;
        (0..=self.trials())
            .map(|m| (-(m as f64 - mean).powi(2) / (2.0 * var)).exp() / (std::f64::consts::TAU * var).sqrt())
            .collect()
    }

    /// `½ Σ_m |p_M(m) − g(m)|`.
    pub fn total_variation_to_gaussian(&self) -> f64 {
        0.5 * self.probs.iter().zip(self.gaussian()).map(|(p, g)| (p - g).abs()).sum::<f64>()
    }
}

/// Binomial branch-counting distribution, computed in the log domain.
pub fn branch_frequencies(m: usize, alpha2: f64, beta2: f64) -> Result<FrequencyDistribution> {
    if m > FREQUENCY_CAP {
        return Err(Error::CapExceeded(format!("{m} trials > {FREQUENCY_CAP}")));
    }
    if alpha2 < 0.0 || beta2 < 0.0 || (alpha2 + beta2 - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument("weights must be non-negative and sum to 1".into()));
    }
    let ln = |x: f64, k: usize| if k == 0 { 0.0 } else { k as f64 * x.ln() };
    let mut ln_binom = 0.0;
    let mut probs = Vec::with_capacity(m + 1);
    for k in 0..=m {
        if k > 0 {
            ln_binom += ((m - k + 1) as f64).ln() - (k as f64).ln();
        }
        probs.push((ln_binom + ln(alpha2, m - k) + ln(beta2, k)).exp());
    }
    let amplitudes = probs.iter().map(|p| p.sqrt()).collect();
    Ok(FrequencyDistribution { probs, amplitudes, beta2 })
}

/// Gate sequence variants of the agent circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AgentVariant {
    #[default]
    Ideal,
    OmitCounterswap,
    /// The conditional counterswap hits `S` instead of `E`.
    WrongQubit,
}

/// One step of the agent circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentStep {
    pub label: &'static str,
    pub agent_purity: f64,
    /// `⟨ψ_SE|ρ_SE|ψ_SE⟩` against the entangled state before the swap.
    pub se_fidelity: f64,
}

fn controlled(u: &CMat) -> CMat {
    let d = u.nrows();
    let mut m = CMat::identity(2 * d, 2 * d);
    m.view_mut((d, d), (d, d)).copy_from(u);
    m
}

/// Qubits `A, S, E`. Hadamards prepare `A` and `S`, a c-not entangles `S` with `E`, a random
/// local unitary (drawn from `seed`) rotates `E`'s basis, then `A` controls a swap on `S`
/// and a counterswap on `E`.
pub fn agent_circuit(system_phase: f64, seed: u64, variant: AgentVariant) -> Result<Vec<AgentStep>> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let w = linalg::haar_unitary(2, &mut rng);
    let shape = HilbertShape::qubits(3)?;
    let mut psi = StateVector::basis(shape, 0)?;
    let phase = CMat::from_diagonal(&CVec::from_vec(vec![c(1.0), C64::from_polar(1.0, system_phase)]));

    psi = apply_unitary_ordered(&psi, &hadamard(), &[0])?;
    psi = apply_unitary_ordered(&psi, &(&phase * hadamard()), &[1])?;
    psi = apply_unitary_ordered(&psi, &linalg::cnot(), &[1, 2])?;
    psi = apply_unitary_ordered(&psi, &w, &[2])?;
    let se = FragmentSpec::range(1, 3);
    let agent = FragmentSpec::range(0, 1);
    let target = {
        let rho = psi.reduced(&se)?;
        let (vals, vecs) = linalg::hermitian_eigen(rho.matrix());
        let top = vals.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i).unwrap_or(0);
        StateVector::new(HilbertShape::qubits(2)?, vecs.column(top).into_owned())?
    };
    let mut steps = Vec::new();
    let mut record = |label, psi: &StateVector| -> Result<()> {
        steps.push(AgentStep {
            label,
            agent_purity: psi.reduced(&agent)?.purity(),
            se_fidelity: psi.reduced(&se)?.fidelity_with_pure(&target),
        });
        Ok(())
    };
    record("entangled", &psi)?;

    // Schmidt form of the entangled pair: (|0⟩|w0⟩ + e^{iφ}|1⟩|w1⟩)/√2 with w_k = W|k⟩.
    let w_basis: Vec<CVec> = (0..2).map(|k| w.column(k).into_owned()).collect();
    let swap = linalg::pauli_x();
    let counter = exchange(&w_basis, 0, 1, C64::from_polar(1.0, -system_phase));
    psi = apply_unitary_ordered(&psi, &controlled(&swap), &[0, 1])?;
    record("swapped", &psi)?;
    match variant {
        AgentVariant::Ideal => psi = apply_unitary_ordered(&psi, &controlled(&counter), &[0, 2])?,
        AgentVariant::OmitCounterswap => {}
        AgentVariant::WrongQubit => psi = apply_unitary_ordered(&psi, &controlled(&counter), &[0, 1])?,
    }
    record("counterswapped", &psi)?;
    Ok(steps)
}

/// Result of undoing a premeasurement with and without a copy of the record.
#[derive(Debug, Clone)]
pub struct ReversalOutcome {
    /// Fidelity of `S⊗A` with its initial state after `U_SA` then `U_SA†`.
    pub without_copy: f64,
    /// Reduced state of `S` when the record was copied to `C` before `U_SA†`.
    pub with_copy: DensityMatrix,
}

/// `|x⟩|y⟩ → |x⟩|y + x mod d⟩`.
fn shift_add(d: usize) -> CMat {
    let mut u = CMat::zeros(d * d, d * d);
    for x in 0..d {
        for y in 0..d {
            u[(x * d + (y + x) % d, x * d + y)] = c(1.0);
        }
    }
    u
}

/// Premeasures `Σ α_s|s⟩` with an apparatus `A`, optionally copies `A` into `C`, then applies `U_SA†`.
pub fn reversal_demo(amplitudes: &[C64]) -> Result<ReversalOutcome> {
    let d = amplitudes.len();
    if d < 2 {
        return Err(Error::InvalidArgument("need at least two system levels".into()));
    }
    let shape = HilbertShape::new(vec![d, d, d])?;
    let alpha = CVec::from_column_slice(amplitudes);
    let ready = linalg::basis(d, 0);
    let initial = StateVector::new(shape, linalg::kron_vec(&alpha, &linalg::kron_vec(&ready, &ready)))?;
    let u = shift_add(d);
    let ud = u.adjoint();

    let measured = apply_unitary_ordered(&initial, &u, &[0, 1])?;
    let undone = apply_unitary_ordered(&measured, &ud, &[0, 1])?;
    let copied = apply_unitary_ordered(&measured, &u, &[1, 2])?;
    let attempted = apply_unitary_ordered(&copied, &ud, &[0, 1])?;
    Ok(ReversalOutcome { without_copy: undone.fidelity(&initial), with_copy: attempted.reduced(&FragmentSpec::range(0, 1))? })
}
