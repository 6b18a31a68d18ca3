//! Spin models: c-not chain, central spin with an Ising bath, partly mixed
//! ("hazy") baths, and a bath whose spins interact among themselves.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, LN_2};

use crate::branching::BranchingState;
use crate::infomeasures::shannon;
use crate::linalg::{self, c};
use crate::numeric::POLICY;
use crate::qstate::{evolve_diagonal, FragmentSpec, HilbertShape, StateVector};
use crate::{CMat, CVec, Error, Result, C64};

/// Default spread of system-bath couplings in the interacting model.
pub const SIGMA_D: f64 = 0.1;
/// Default spread of bath-bath couplings in the interacting model.
pub const SIGMA_M: f64 = 0.001;
/// Largest bath handled by the dense interacting model.
pub const INTERACTING_CAP: usize = 19;
/// Largest bath handled by the ancilla-purified hazy simulation.
pub const HAZY_DENSE_CAP: usize = 9;
/// Largest fragment whose state is built densely in the hazy model.
pub const HAZY_FRAGMENT_CAP: usize = 11;

fn plus() -> CVec {
    CVec::from_vec(vec![c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)])
}

fn check_amplitudes(a: C64, b: C64) -> Result<()> {
    let n = a.norm_sqr() + b.norm_sqr();
    if (n - 1.0).abs() > POLICY.state_tol {
        return Err(Error::InvalidState(format!("|a|² + |b|² = {n}")));
    }
    Ok(())
}

/// Qubit system `a|0⟩ + b|1⟩` copied into `n` qubits by c-not gates.
pub fn cnot_model(a: C64, b: C64, n: usize) -> Result<BranchingState> {
    check_amplitudes(a, b)?;
    BranchingState::new(
        vec![a.norm_sqr(), b.norm_sqr()],
        vec![a.arg(), b.arg()],
        vec![vec![linalg::basis(2, 0); n], vec![linalg::basis(2, 1); n]],
    )
}

/// Central spin coupled to N bath qubits by `σ^z Σ d_i σ^z_i`.
#[derive(Debug, Clone)]
pub struct CentralSpinParams {
    pub couplings: Vec<f64>,
    pub time: f64,
    pub env_init: Vec<CVec>,
    pub system_init: (C64, C64),
}

impl CentralSpinParams {
    /// Bath in `|+⟩^⊗N`, system in `(|0⟩ + |1⟩)/√2`.
    pub fn new(couplings: Vec<f64>, time: f64) -> Result<Self> {
        if couplings.is_empty() {
            return Err(Error::InvalidArgument("central spin needs at least one bath qubit".into()));
        }
        let n = couplings.len();
        Ok(Self { couplings, time, env_init: vec![plus(); n], system_init: (c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)) })
    }

    /// Couplings drawn uniformly from (0, 1].
    pub fn random(n: usize, time: f64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        Self::new((0..n).map(|_| 1.0 - rng.random::<f64>()).collect(), time)
    }

    /// All couplings equal to `d`.
    pub fn uniform(n: usize, d: f64, time: f64) -> Result<Self> {
        Self::new(vec![d; n], time)
    }

    pub fn len(&self) -> usize {
        self.couplings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.couplings.is_empty()
    }

    fn validate(&self) -> Result<()> {
        check_amplitudes(self.system_init.0, self.system_init.1)?;
        if self.env_init.len() != self.couplings.len() {
            return Err(Error::DimensionMismatch { expected: self.couplings.len(), got: self.env_init.len() });
        }
        for v in &self.env_init {
            if v.len() != 2 || (v.norm() - 1.0).abs() > POLICY.state_tol {
                return Err(Error::InvalidState("bath initial states must be normalized qubits".into()));
            }
        }
        Ok(())
    }

    pub fn identical_couplings(&self) -> bool {
        self.couplings.iter().all(|&d| d == self.couplings[0])
    }
}

/// Exact branching state at time `t`: branch `k` applies `exp(∓i d_i t σ^z)` to bath qubit i.
pub fn central_spin_branching(p: &CentralSpinParams) -> Result<BranchingState> {
    p.validate()?;
    let (a, b) = p.system_init;
    let branch = |sign: f64| -> Vec<CVec> {
        p.couplings
            .iter()
            .zip(&p.env_init)
            .map(|(&d, v)| {
                let ph = sign * d * p.time;
                CVec::from_vec(vec![v[0] * C64::from_polar(1.0, -ph), v[1] * C64::from_polar(1.0, ph)])
            })
            .collect()
    };
    BranchingState::new(vec![a.norm_sqr(), b.norm_sqr()], vec![a.arg(), b.arg()], vec![branch(1.0), branch(-1.0)])
}

/// Near-plateau approximation `H_S - ½(e^{H_S} - 1)(d_E^{-m} - d_E^{-(N-m)})` for an m-subsystem fragment.
pub fn plateau_overlay(h_s: f64, d_e: f64, n_env: usize, m: f64) -> f64 {
    h_s - 0.5 * h_s.exp_m1() * (d_e.powf(-m) - d_e.powf(-(n_env as f64 - m)))
}

/// `(♯F_δ, R_δ)` from `♯F_δ ≈ (H_S - ln(2δH_S)) / ln d_E` and `R_δ = ♯E / ♯F_δ`.
pub fn redundancy_estimate(h_s: f64, d_e: f64, sharp_e: f64, delta: f64) -> Result<(f64, f64)> {
    if h_s <= 0.0 || !(0.0..1.0).contains(&delta) || delta == 0.0 || d_e < 2.0 {
        return Err(Error::InvalidArgument(format!("need H_S > 0, 0 < δ < 1, d_E ≥ 2 (got {h_s}, {delta}, {d_e})")));
    }
    let arg = 2.0 * delta * h_s;
    if arg <= 0.0 || !arg.is_finite() {
        return Err(Error::InvalidArgument(format!("log argument 2δH_S = {arg} is not positive")));
    }
    let f = (h_s - arg.ln()) / d_e.ln();
    Ok((f, sharp_e / f))
}

/// `R_δ^h ≈ (1 - h/h_m) R_δ`.
pub fn hazy_redundancy_estimate(r_delta: f64, hp: &HazyParams) -> f64 {
    (1.0 - hp.h / hp.h_m) * r_delta
}

/// Central spin plus bath-bath couplings `Σ_{j,k} m_jk σ^z_j σ^z_k` (ordered pairs).
#[derive(Debug, Clone)]
pub struct InteractingEnvParams {
    pub d: Vec<f64>,
    pub m: DMatrix<f64>,
    pub time: f64,
}

impl InteractingEnvParams {
    pub fn new(d: Vec<f64>, m: DMatrix<f64>, time: f64) -> Result<Self> {
        let n = d.len();
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::ShapeMismatch);
        }
        if n > INTERACTING_CAP {
            return Err(Error::CapExceeded(format!("{n} bath spins > {INTERACTING_CAP}")));
        }
        for j in 0..n {
            if m[(j, j)] != 0.0 {
                return Err(Error::InvalidArgument("bath coupling matrix must have zero diagonal".into()));
            }
            for k in 0..j {
                if (m[(j, k)] - m[(k, j)]).abs() > 1e-15 {
                    return Err(Error::InvalidArgument("bath coupling matrix must be symmetric".into()));
                }
            }
        }
        Ok(Self { d, m, time })
    }

    /// Zero-mean normal couplings; `d` is drawn first, then the upper triangle of `m` row by row.
    pub fn random(n: usize, sigma_d: f64, sigma_m: f64, time: f64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let nd = Normal::new(0.0, sigma_d).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let nm = Normal::new(0.0, sigma_m).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let d = (0..n).map(|_| nd.sample(&mut rng)).collect();
        let mut m = DMatrix::zeros(n, n);
        for j in 0..n {
            for k in (j + 1)..n {
                let x = nm.sample(&mut rng);
                m[(j, k)] = x;
                m[(k, j)] = x;
            }
        }
        Self::new(d, m, time)
    }

    pub fn at_time(&self, time: f64) -> Self {
        Self { time, ..self.clone() }
    }
}

/// Exact state at time `t`; the system is qubit 0 and bath spin i is qubit i+1.
pub fn interacting_evolve(p: &InteractingEnvParams, system_init: (C64, C64), env_init: &CVec) -> Result<StateVector> {
    check_amplitudes(system_init.0, system_init.1)?;
    let n = p.d.len();
    if n > INTERACTING_CAP {
        return Err(Error::CapExceeded(format!("{n} bath spins > {INTERACTING_CAP}")));
    }
    let mut factors = vec![CVec::from_vec(vec![system_init.0, system_init.1])];
    factors.extend(std::iter::repeat_n(env_init.clone(), n));
    let psi = StateVector::product(&factors)?;
    let total = n + 1;
    let spin = |idx: usize, q: usize| if (idx >> (total - 1 - q)) & 1 == 0 { 1.0 } else { -1.0 };
    let phases: Vec<f64> = (0..psi.shape().total())
        .map(|idx| {
            let zs = spin(idx, 0);
            let z: Vec<f64> = (1..total).map(|q| spin(idx, q)).collect();
            let mut e = zs * p.d.iter().zip(&z).map(|(d, z)| d * z).sum::<f64>();
            for j in 0..n {
                for k in (j + 1)..n {
                    e += 2.0 * p.m[(j, k)] * z[j] * z[k];
                }
            }
            e * p.time
        })
        .collect();
    evolve_diagonal(&psi, &phases)
}

/// Pre-existing entropy `h` of each bath subsystem, out of capacity `h_m = ln d_E`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HazyParams {
    pub h: f64,
    pub h_m: f64,
}

impl HazyParams {
    pub fn new(h: f64, h_m: f64) -> Result<Self> {
        if !(h_m > 0.0) || !(0.0..=h_m).contains(&h) {
            return Err(Error::InvalidArgument(format!("need 0 ≤ h ≤ h_m, h_m > 0 (got {h}, {h_m})")));
        }
        Ok(Self { h, h_m })
    }

    /// Qubit bath with `h = fraction · ln 2`.
    pub fn qubit_fraction(fraction: f64) -> Result<Self> {
        Self::new(fraction * LN_2, LN_2)
    }

    /// Weight `q ≤ ½` of `|−⟩` in `(1-q)|+⟩⟨+| + q|−⟩⟨−|`, whose entropy is `h`.
    pub fn mixing(&self) -> Result<f64> {
        if (self.h_m - LN_2).abs() > 1e-12 {
            return Err(Error::InvalidArgument("mixed bath model needs qubit subsystems (h_m = ln 2)".into()));
        }
        if self.h <= 0.0 {
            return Ok(0.0);
        }
        if self.h >= LN_2 {
            return Ok(0.5);
        }
        let (mut lo, mut hi) = (0.0_f64, 0.5_f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if shannon(&[mid, 1.0 - mid]) < self.h {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

fn hazy_check(base: &CentralSpinParams) -> Result<()> {
    base.validate()?;
    let p = plus();
    if base.env_init.iter().any(|v| (v - &p).norm() > POLICY.state_tol) {
        return Err(Error::InvalidArgument("mixed bath model assumes |+⟩-centred bath states".into()));
    }
    Ok(())
}

fn z_rotation(angle: f64) -> CMat {
    CMat::from_diagonal(&CVec::from_vec(vec![C64::from_polar(1.0, -angle), C64::from_polar(1.0, angle)]))
}

/// Branch-conditional single-qubit bath state `U ρ U†` with `U = exp(∓i d t σ^z)`.
fn hazy_qubit_state(q: f64, d: f64, t: f64, sign: f64) -> CMat {
    let rho = linalg::outer(&plus(), &plus()) * c(1.0 - q) + {
        let m = CVec::from_vec(vec![c(FRAC_1_SQRT_2), c(-FRAC_1_SQRT_2)]);
        linalg::outer(&m, &m) * c(q)
    };
    let u = z_rotation(sign * d * t);
    &u * rho * u.adjoint()
}

/// Entropy of the system decohered by the bath qubits in `frag`.
pub(crate) fn hazy_decohered_system_entropy(base: &CentralSpinParams, frag: &[usize]) -> f64 {
    let (a, b) = base.system_init;
    let gamma: f64 = frag.iter().map(|&l| (2.0 * base.couplings[l] * base.time).cos()).product();
    let off = a * b.conj() * gamma;
    let m = CMat::from_row_slice(2, 2, &[c(a.norm_sqr()), off, off.conj(), c(b.norm_sqr())]);
    linalg::matrix_entropy(&m)
}

/// `I(S:F)` by purifying every bath qubit with an ancilla and simulating densely.
///
/// Qubit order is S, E_1, A_1, E_2, A_2, ...
pub fn hazy_mutual_info_dense(base: &CentralSpinParams, hp: &HazyParams, frag: &FragmentSpec) -> Result<f64> {
    hazy_check(base)?;
    let n = base.len();
    if n > HAZY_DENSE_CAP {
        return Err(Error::CapExceeded(format!("{n} bath qubits > {HAZY_DENSE_CAP} for the purified simulation")));
    }
    frag.validate(n)?;
    let q = hp.mixing()?;
    let (a, b) = base.system_init;
    let pair = CVec::from_vec(vec![
        c(FRAC_1_SQRT_2 * (1.0 - q).sqrt()),
        c(FRAC_1_SQRT_2 * q.sqrt()),
        c(FRAC_1_SQRT_2 * (1.0 - q).sqrt()),
        c(-FRAC_1_SQRT_2 * q.sqrt()),
    ]);
    let mut factors = vec![CVec::from_vec(vec![a, b])];
    factors.extend(std::iter::repeat_n(pair, n));
    let psi = StateVector::product(&factors)?;
    let total = 2 * n + 1;
    let bit = |idx: usize, qb: usize| (idx >> (total - 1 - qb)) & 1;
    let phases: Vec<f64> = (0..psi.shape().total())
        .map(|idx| {
            let zs = if bit(idx, 0) == 0 { 1.0 } else { -1.0 };
            let e: f64 = (0..n).map(|l| if bit(idx, 1 + 2 * l) == 0 { base.couplings[l] } else { -base.couplings[l] }).sum();
            zs * e * base.time
        })
        .collect();
    // qubit-level dims differ from the StateVector shape built from pair factors
    let shape = HilbertShape::qubits(total)?;
    let psi = StateVector::new(shape, evolve_diagonal(&psi, &phases)?.amplitudes().clone())?;
    let f = FragmentSpec::new(frag.indices().iter().map(|&l| 1 + 2 * l).collect())?;
    let s = FragmentSpec::new(vec![0])?;
    Ok(psi.entanglement_entropy(&s)? + psi.entanglement_entropy(&f)? - psi.entanglement_entropy(&s.union(&f))?)
}

/// `I(S:F) = (H_F - m h) + (H_S - H_{S d E∖F})`, exact for pure decoherence of a product bath.
///
/// Only `ρ_F` is built densely, so `|F| ≤ HAZY_FRAGMENT_CAP`.
pub fn hazy_mutual_info(base: &CentralSpinParams, hp: &HazyParams, frag: &FragmentSpec) -> Result<f64> {
    hazy_check(base)?;
    let n = base.len();
    frag.validate(n)?;
    if frag.len() > HAZY_FRAGMENT_CAP {
        return Err(Error::CapExceeded(format!("fragment of {} qubits > {HAZY_FRAGMENT_CAP}", frag.len())));
    }
    let q = hp.mixing()?;
    let (a, b) = base.system_init;
    let mut rho = [CMat::identity(1, 1), CMat::identity(1, 1)];
    for &l in frag.indices() {
        for (k, sign) in [(0, 1.0), (1, -1.0)] {
            rho[k] = linalg::kron(&rho[k], &hazy_qubit_state(q, base.couplings[l], base.time, sign));
        }
    }
    let rho_f = &rho[0] * c(a.norm_sqr()) + &rho[1] * c(b.norm_sqr());
    let classical = linalg::matrix_entropy(&rho_f) - frag.len() as f64 * hp.h;
    let all: Vec<usize> = (0..n).collect();
    let rest = frag.complement(n);
    let quantum = hazy_decohered_system_entropy(base, &all) - hazy_decohered_system_entropy(base, rest.indices());
    Ok(classical + quantum)
}

/// Classical term `H_F - H_F(0)` of the decomposition.
pub fn hazy_classical_term(base: &CentralSpinParams, hp: &HazyParams, frag: &FragmentSpec) -> Result<f64> {
    let i = hazy_mutual_info(base, hp, frag)?;
    let n = base.len();
    let all: Vec<usize> = (0..n).collect();
    let quantum = hazy_decohered_system_entropy(base, &all)
        - hazy_decohered_system_entropy(base, frag.complement(n).indices());
    Ok(i - quantum)
}

/// Spin-j matrix of `exp(-i(π/2)J_y)` in the basis `M = j, j-1, ..., -j`.
fn quarter_turn_y(n: usize) -> CMat {
    let j = n as f64 / 2.0;
    let dim = n + 1;
    let mut jy = CMat::zeros(dim, dim);
    for i in 1..dim {
        // ⟨M+1|J_+|M⟩ with M = j - i
        let m = j - i as f64;
        let v = (j * (j + 1.0) - m * (m + 1.0)).sqrt();
        jy[(i - 1, i)] = C64::new(0.0, -0.5 * v);
        jy[(i, i - 1)] = C64::new(0.0, 0.5 * v);
    }
    let (vals, vecs) = linalg::hermitian_eigen(&jy);
    let diag = CVec::from_iterator(dim, vals.iter().map(|&v| C64::from_polar(1.0, -FRAC_PI_2 * v)));
    &vecs * CMat::from_diagonal(&diag) * vecs.adjoint()
}

/// Entropy of `Σ_b w_b ρ_b^{⊗m}` where each `ρ_b` has eigenvalues `(1-q, q)` and its
/// dominant eigenvector on the Bloch equator at azimuth `φ_b`.
///
/// The state is permutation symmetric, so it splits into spin-j blocks of
/// multiplicity `C(m,k) - C(m,k-1)`, `j = m/2 - k`.
pub fn symmetric_mixture_entropy(branches: &[(f64, f64)], q: f64, m: usize) -> f64 {
    let (lp, lm) = (1.0 - q, q);
    let mut h = 0.0;
    let mut ln_binom = 0.0; // ln C(m, k)
    for k in 0..=m / 2 {
        if k > 0 {
            ln_binom += ((m - k + 1) as f64 / k as f64).ln();
        }
        if k > 0 && lm == 0.0 {
            break;
        }
        let n = m - 2 * k;
        let ln_mult = ln_binom + ((n + 1) as f64 / (m - k + 1) as f64).ln();
        let ln_scale = if k > 0 { k as f64 * (lp * lm).ln() } else { 0.0 } + n as f64 * lp.ln();
        let ratio = if lm == 0.0 { 0.0 } else { lm / lp };
        // ln of the block's total weight; blocks below ~1e-18 cannot move the entropy
        let ln_trace = if ratio >= 1.0 { ((n + 1) as f64).ln() } else { -(1.0 - ratio).ln() };
        if ln_mult + ln_scale + ln_trace < -41.0 {
            continue;
        }
        // every branch state is exp(-iφJ_z) Ry(π/2) Λ Ry(π/2)† exp(iφJ_z) on this block
        let ry = quarter_turn_y(n);
        let weights = CVec::from_iterator(n + 1, (0..=n).map(|i| c(if i == 0 { 1.0 } else { ratio.powi(i as i32) })));
        let base = &ry * CMat::from_diagonal(&weights) * ry.adjoint();
        let block = CMat::from_fn(n + 1, n + 1, |a, b| {
            let d = a as f64 - b as f64;
            base[(a, b)] * branches.iter().map(|&(w, phi)| C64::from_polar(w, phi * d)).sum::<C64>()
        });
        for mu in linalg::hermitian_eigenvalues(&block) {
            if mu <= POLICY.eig_clip {
                continue;
            }
            let ln_x = ln_scale + mu.ln();
            h -= (ln_mult + ln_x).exp() * ln_x;
        }
    }
    h
}

/// `I(S:F)` for an m-qubit fragment when all couplings are identical, via the symmetric blocks.
pub fn hazy_mutual_info_symmetric(base: &CentralSpinParams, hp: &HazyParams, m: usize) -> Result<f64> {
    hazy_check(base)?;
    if !base.identical_couplings() {
        return Err(Error::InvalidArgument("symmetric engine needs identical couplings".into()));
    }
    let n = base.len();
    if m > n {
        return Err(Error::InvalidIndices(format!("fragment of {m} qubits in a bath of {n}")));
    }
    let q = hp.mixing()?;
    let (a, b) = base.system_init;
    let ang = 2.0 * base.couplings[0] * base.time;
    let hf = symmetric_mixture_entropy(&[(a.norm_sqr(), ang), (b.norm_sqr(), -ang)], q, m);
    let all: Vec<usize> = (0..n).collect();
    let rest: Vec<usize> = (m..n).collect();
    let quantum = hazy_decohered_system_entropy(base, &all) - hazy_decohered_system_entropy(base, &rest);
    Ok(hf - m as f64 * hp.h + quantum)
}

/// Redundancy `R_δ = N / ♯F_δ` in a partly mixed bath, with `♯F_δ` interpolated
/// where `I(S:F)` first reaches `(1-δ)H_S`.
///
/// Identical couplings use the symmetric engine; otherwise `I(m)` is averaged over
/// `samples` random fragments built densely, which limits `♯F_δ` to `HAZY_FRAGMENT_CAP`.
pub fn hazy_redundancy<R: Rng + ?Sized>(
    base: &CentralSpinParams,
    hp: &HazyParams,
    delta: f64,
    samples: usize,
    rng: &mut R,
) -> Result<f64> {
    hazy_check(base)?;
    let n = base.len();
    let all: Vec<usize> = (0..n).collect();
    let target = (1.0 - delta) * hazy_decohered_system_entropy(base, &all);
    let symmetric = base.identical_couplings();
    let mut eval = |m: usize| -> Result<f64> {
        if symmetric {
            hazy_mutual_info_symmetric(base, hp, m)
        } else {
            let mut acc = 0.0;
            for _ in 0..samples.max(1) {
                let idx = rand::seq::index::sample(rng, n, m).into_vec();
                acc += hazy_mutual_info(base, hp, &FragmentSpec::new(idx)?)?;
            }
            Ok(acc / samples.max(1) as f64)
        }
    };
    if symmetric {
        // I(S:F) grows with |F|: bracket the first size reaching the target by doubling, then bisect
        let (mut lo, mut hi) = (0, 1);
        while eval(hi)? < target {
            if hi == n {
                return Err(Error::InvalidArgument("information deficit never reached; bath too small".into()));
            }
            lo = hi;
            hi = (2 * hi).min(n);
        }
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if eval(mid)? >= target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let (prev, cur) = (if lo == 0 { 0.0 } else { eval(lo)? }, eval(hi)?);
        let frac = (target - prev) / (cur - prev);
        return Ok(n as f64 / (lo as f64 + frac));
    }
    let mut prev = 0.0;
    for m in 1..=n {
        let cur = eval(m)?;
        if cur >= target {
            let frac = (target - prev) / (cur - prev);
            return Ok(n as f64 / ((m - 1) as f64 + frac));
        }
        prev = cur;
    }
    Err(Error::InvalidArgument("information deficit never reached; bath too small".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::branching::{fragment_entropy, mutual_info_branching, system_entropy};
    use crate::qstate::apply_unitary;

    #[test]
    fn cnot_examples() {
        let h = c(FRAC_1_SQRT_2);
        let b = cnot_model(h, h, 4).unwrap();
        for k in 0..4 {
            let i = mutual_info_branching(&b, &FragmentSpec::new(vec![k]).unwrap()).unwrap();
            assert!((i - LN_2).abs() < 1e-12);
        }
        let b = cnot_model(c(1.0), c(0.0), 4).unwrap();
        assert!(system_entropy(&b).abs() < 1e-12);
        assert!(cnot_model(c(1.0), c(1.0), 3).is_err());
    }

    #[test]
    fn central_spin_overlaps() {
        let p = CentralSpinParams::new(vec![0.3, 0.7], 1.3).unwrap();
        let b = central_spin_branching(&p).unwrap();
        for (l, d) in p.couplings.iter().enumerate() {
            let o = b.overlap(l, 0, 1);
            assert!((o - c((2.0 * d * p.time).cos())).norm() < 1e-14);
        }
        let p0 = CentralSpinParams::new(vec![0.3; 5], 0.0).unwrap();
        assert!(system_entropy(&central_spin_branching(&p0).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn quarter_turn_is_a_perfect_record() {
        // dense two-qubit evolution under exp(-i d t σ^z σ^z)
        let (d, t) = (1.0, std::f64::consts::FRAC_PI_4);
        let p = CentralSpinParams::new(vec![d], t).unwrap();
        let b = central_spin_branching(&p).unwrap();
        let zz = linalg::kron(&linalg::pauli_z(), &linalg::pauli_z());
        let u = (zz * C64::new(0.0, -d * t)).exp();
        let psi = StateVector::product(&[plus(), plus()]).unwrap();
        let out = apply_unitary(&psi, &u, &FragmentSpec::range(0, 2)).unwrap();
        assert!((out.fidelity(&b.to_state_vector().unwrap()) - 1.0).abs() < 1e-12);
        assert!(b.overlap(0, 0, 1).norm() < 1e-15);
    }

    #[test]
    fn plateau_overlay_near_plateau() {
        let p = CentralSpinParams::random(50, 4.0, 11).unwrap();
        let b = central_spin_branching(&p).unwrap();
        let hs = system_entropy(&b);
        for m in 15..=35 {
            let exact = mutual_info_branching(&b, &FragmentSpec::range(0, m)).unwrap();
            let approx = plateau_overlay(hs, 2.0, 50, m as f64);
            assert!((exact - approx).abs() <= 0.05 * approx, "m = {m}");
        }
    }

    #[test]
    fn pure_decoherence_identity() {
        let p = CentralSpinParams::random(60, 4.0, 3).unwrap();
        let b = central_spin_branching(&p).unwrap();
        for m in [1, 3, 7, 12] {
            let f = FragmentSpec::range(0, m);
            let hf = fragment_entropy(&b, &f, false).unwrap();
            assert!((mutual_info_branching(&b, &f).unwrap() - hf).abs() < 1e-9);
        }
    }

    #[test]
    fn redundancy_estimate_examples() {
        let (f, r) = redundancy_estimate(LN_2, 2.0, 50.0, 0.1).unwrap();
        let direct = (LN_2 - (0.2 * LN_2).ln()) / LN_2;
        assert!((f - direct).abs() < 1e-15);
        assert!(f > 1.0);
        let (_, r2) = redundancy_estimate(LN_2, 2.0, 100.0, 0.1).unwrap();
        assert!((r2 - 2.0 * r).abs() < 1e-12);
        assert!(redundancy_estimate(LN_2, 2.0, 10.0, 0.0).is_err());
        let hp = HazyParams::qubit_fraction(0.5).unwrap();
        assert!((hazy_redundancy_estimate(r, &hp) - 0.5 * r).abs() < 1e-12);
    }

    #[test]
    fn interacting_without_bath_couplings_matches_branching() {
        let n = 6;
        let d = vec![0.1, -0.2, 0.05, 0.3, -0.15, 0.22];
        let p = InteractingEnvParams::new(d.clone(), DMatrix::zeros(n, n), 3.0).unwrap();
        let h = c(FRAC_1_SQRT_2);
        let psi = interacting_evolve(&p, (h, h), &plus()).unwrap();
        let b = central_spin_branching(&CentralSpinParams::new(d, 3.0).unwrap()).unwrap();
        assert!(psi.fidelity(&b.to_state_vector().unwrap()) > 1.0 - 1e-10);
    }

    #[test]
    fn interacting_matches_matrix_exponential() {
        let p = InteractingEnvParams::random(3, 0.4, 0.3, 1.7, 5).unwrap();
        let z = linalg::pauli_z();
        let id = CMat::identity(2, 2);
        let op = |qs: &[usize]| {
            (0..4).fold(CMat::identity(1, 1), |acc, i| linalg::kron(&acc, if qs.contains(&i) { &z } else { &id }))
        };
        let mut h = CMat::zeros(16, 16);
        for j in 0..3 {
            h += op(&[0, j + 1]) * c(p.d[j]);
            for k in 0..3 {
                if j != k {
                    h += op(&[j + 1, k + 1]) * c(p.m[(j, k)]);
                }
            }
        }
        let u = (h * C64::new(0.0, -p.time)).exp();
        let init = linalg::bloch_state(0.7, 0.2);
        let env = linalg::bloch_state(1.2, -0.4);
        let psi0 = StateVector::product(&[init.clone(), env.clone(), env.clone(), env.clone()]).unwrap();
        let expect = apply_unitary(&psi0, &u, &FragmentSpec::range(0, 4)).unwrap();
        let got = interacting_evolve(&p, (init[0], init[1]), &env).unwrap();
        assert!((got.amplitudes() - expect.amplitudes()).norm() < 1e-12);
    }

    #[test]
    fn interacting_cap() {
        assert!(InteractingEnvParams::random(20, 0.1, 0.001, 1.0, 0).unwrap_err().is_cap());
    }

    #[test]
    fn mixing_inverts_binary_entropy() {
        for frac in [0.0, 0.1, 0.5, 0.9, 1.0] {
            let hp = HazyParams::qubit_fraction(frac).unwrap();
            let q = hp.mixing().unwrap();
            assert!((shannon(&[q, 1.0 - q]) - hp.h).abs() < 1e-12);
        }
        assert!(HazyParams::new(1.0, LN_2).is_err());
    }

    #[test]
    fn hazy_engines_agree_with_purified_simulation() {
        let p = CentralSpinParams::random(6, 1.5, 8).unwrap();
        for frac in [0.0, 0.3, 0.8] {
            let hp = HazyParams::qubit_fraction(frac).unwrap();
            for frag in [vec![0], vec![1, 4], vec![0, 2, 3, 5]] {
                let f = FragmentSpec::new(frag).unwrap();
                let dense = hazy_mutual_info_dense(&p, &hp, &f).unwrap();
                let fast = hazy_mutual_info(&p, &hp, &f).unwrap();
                assert!((dense - fast).abs() < 1e-9, "{dense} vs {fast}");
            }
        }
    }

    #[test]
    fn symmetric_engine_matches_dense_fragment() {
        let p = CentralSpinParams::uniform(9, 0.23, 1.1).unwrap();
        for frac in [0.0, 0.4, 0.9, 1.0] {
            let hp = HazyParams::qubit_fraction(frac).unwrap();
            for m in 0..=8 {
                let dense = hazy_mutual_info(&p, &hp, &FragmentSpec::range(0, m)).unwrap();
                let sym = hazy_mutual_info_symmetric(&p, &hp, m).unwrap();
                assert!((dense - sym).abs() < 1e-10, "h = {frac}, m = {m}: {dense} vs {sym}");
            }
        }
    }

    #[test]
    fn symmetric_blocks_are_normalized() {
        // w_b = 1 puts all weight on one product state, whose entropy is m·H(q)
        let q = 0.2;
        let h = symmetric_mixture_entropy(&[(1.0, 0.4)], q, 40);
        assert!((h - 40.0 * shannon(&[q, 1.0 - q])).abs() < 1e-9);
    }

    #[test]
    fn pure_hazy_limit_matches_branching() {
        let p = CentralSpinParams::random(8, 2.0, 4).unwrap();
        let b = central_spin_branching(&p).unwrap();
        let hp = HazyParams::qubit_fraction(0.0).unwrap();
        let f = FragmentSpec::new(vec![1, 2, 6]).unwrap();
        let i = hazy_mutual_info(&p, &hp, &f).unwrap();
        assert!((i - mutual_info_branching(&b, &f).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn fully_mixed_bath_has_no_classical_term() {
        let p = CentralSpinParams::random(8, 2.0, 4).unwrap();
        let hp = HazyParams::qubit_fraction(1.0).unwrap();
        for m in 1..=6 {
            assert!(hazy_classical_term(&p, &hp, &FragmentSpec::range(0, m)).unwrap().abs() < 1e-9);
        }
        let u = CentralSpinParams::uniform(200, 0.1, 2.0).unwrap();
        let i = hazy_mutual_info_symmetric(&u, &hp, 100).unwrap();
        let all: Vec<usize> = (0..200).collect();
        let rest: Vec<usize> = (100..200).collect();
        let q = hazy_decohered_system_entropy(&u, &all) - hazy_decohered_system_entropy(&u, &rest);
        assert!((i - q).abs() < 1e-9);
    }

    #[test]
    fn hazy_redundancy_decreases_with_h() {
        let p = CentralSpinParams::uniform(300, 0.1, 2.0).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        let mut last = f64::INFINITY;
        for frac in [0.0, 0.25, 0.5] {
            let r = hazy_redundancy(&p, &HazyParams::qubit_fraction(frac).unwrap(), 0.1, 1, &mut rng).unwrap();
            assert!(r < last);
            last = r;
        }
    }
}
