//! Partial information plots, redundancy, observable sweeps and Haar baselines.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::branching::{self, BranchingState};
use crate::infomeasures::shannon;
use crate::linalg;
use crate::qstate::{FragmentSpec, HilbertShape, StateVector};
use crate::spinmodels::{self, CentralSpinParams, HazyParams, InteractingEnvParams};
use crate::{CVec, Error, Result, C64};

/// Anything that can report `I(S:F)` for fragments of its environment.
pub trait Source: Sync {
    /// Number of environment subsystems ♯E.
    fn env_len(&self) -> usize;
    /// `H_S` of the current state.
    fn system_entropy(&self) -> f64;
    fn mutual_info(&self, frag: &FragmentSpec) -> Result<f64>;
    /// Entropy `H_{S d F}` of the system decohered by `frag` alone.
    fn decohered_entropy(&self, _frag: &FragmentSpec) -> Result<f64> {
        Err(Error::InvalidArgument(format!("{} cannot decohere against a fragment", self.tag())))
    }
    /// True when `I(S:F)` depends only on `|F|`, so one fragment per size suffices.
    fn exchangeable(&self) -> bool {
        false
    }
    fn tag(&self) -> String;
}

/// Dense pure state with the system on `system` and the environment on every other subsystem.
#[derive(Debug, Clone)]
pub struct DenseSource {
    pub state: StateVector,
    system: FragmentSpec,
    env: Vec<usize>,
    h_s: f64,
}

impl DenseSource {
    pub fn new(state: StateVector, system: FragmentSpec) -> Result<Self> {
        let n = state.shape().len();
        system.validate(n)?;
        if system.is_empty() || system.len() == n {
            return Err(Error::TrivialBipartition);
        }
        let env = system.complement(n).indices().to_vec();
        let h_s = state.entanglement_entropy(&system)?;
        Ok(Self { state, system, env, h_s })
    }

    fn to_global(&self, frag: &FragmentSpec) -> Result<FragmentSpec> {
        frag.validate(self.env.len())?;
        FragmentSpec::new(frag.indices().iter().map(|&i| self.env[i]).collect())
    }
}

impl Source for DenseSource {
    fn env_len(&self) -> usize {
        self.env.len()
    }

    fn system_entropy(&self) -> f64 {
        self.h_s
    }

    fn mutual_info(&self, frag: &FragmentSpec) -> Result<f64> {
        if frag.is_empty() {
            return Ok(0.0);
        }
        let g = self.to_global(frag)?;
        Ok(self.h_s + self.state.entanglement_entropy(&g)? - self.state.entanglement_entropy(&g.union(&self.system))?)
    }

    fn tag(&self) -> String {
        format!("dense:{:?}", self.state.shape().dims())
    }
}

impl Source for BranchingState {
    fn env_len(&self) -> usize {
        BranchingState::env_len(self)
    }

    fn system_entropy(&self) -> f64 {
        branching::system_entropy(self)
    }

    fn mutual_info(&self, frag: &FragmentSpec) -> Result<f64> {
        branching::mutual_info_branching(self, frag)
    }

    fn decohered_entropy(&self, frag: &FragmentSpec) -> Result<f64> {
        branching::fragment_entropy(self, frag, false)
    }

    fn tag(&self) -> String {
        format!("branching:K={},N={}", self.system_dim(), BranchingState::env_len(self))
    }
}

/// Central spin with a partly mixed bath.
#[derive(Debug, Clone)]
pub struct HazySource {
    pub base: CentralSpinParams,
    pub hazy: HazyParams,
}

impl Source for HazySource {
    fn env_len(&self) -> usize {
        self.base.len()
    }

    fn system_entropy(&self) -> f64 {
        spinmodels::hazy_decohered_system_entropy(&self.base, &(0..self.base.len()).collect::<Vec<_>>())
    }

    fn mutual_info(&self, frag: &FragmentSpec) -> Result<f64> {
        if self.base.identical_couplings() {
            frag.validate(self.base.len())?;
            spinmodels::hazy_mutual_info_symmetric(&self.base, &self.hazy, frag.len())
        } else {
            spinmodels::hazy_mutual_info(&self.base, &self.hazy, frag)
        }
    }

    fn decohered_entropy(&self, frag: &FragmentSpec) -> Result<f64> {
        frag.validate(self.base.len())?;
        Ok(spinmodels::hazy_decohered_system_entropy(&self.base, frag.indices()))
    }

    fn exchangeable(&self) -> bool {
        self.base.identical_couplings()
    }

    fn tag(&self) -> String {
        format!("hazy:N={},h={}", self.base.len(), self.hazy.h)
    }
}

/// One sampled fragment size.
#[derive(Debug, Clone, PartialEq)]
pub struct PipPoint {
    pub f: f64,
    pub sharp_f: usize,
    pub mean_i: f64,
    pub stddev: f64,
    pub samples: usize,
}

impl PipPoint {
    pub fn std_error(&self) -> f64 {
        if self.samples > 1 {
            self.stddev / (self.samples as f64).sqrt()
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartialInfoPlot {
    pub points: Vec<PipPoint>,
    pub source_tag: String,
    pub h_s: f64,
    pub env_len: usize,
}

impl PartialInfoPlot {
    /// Mean information at `f = ½`, interpolating between neighbouring sizes when ♯E is odd.
    pub fn plateau(&self) -> f64 {
        self.value_at(self.env_len as f64 / 2.0)
    }

    /// Piecewise-linear mean information at fragment size `m`.
    pub fn value_at(&self, m: f64) -> f64 {
        let pts = &self.points;
        for w in pts.windows(2) {
            let (a, b) = (w[0].sharp_f as f64, w[1].sharp_f as f64);
            if m >= a && m <= b {
                return w[0].mean_i + (m - a) / (b - a) * (w[1].mean_i - w[0].mean_i);
            }
        }
        pts.last().map_or(0.0, |p| p.mean_i)
    }

    pub fn point(&self, sharp_f: usize) -> Option<&PipPoint> {
        self.points.iter().find(|p| p.sharp_f == sharp_f)
    }
}

/// Every size up to `min(n, 64)`, then geometric steps to `n`, closed under `m ↦ n - m`.
pub fn default_cardinalities(n: usize) -> Vec<usize> {
    let mut v: Vec<usize> = (0..=n.min(64)).collect();
    let mut x = 64.0_f64;
    while (x as usize) < n {
        x *= 1.25;
        v.push((x as usize).min(n));
    }
    let mirrored: Vec<usize> = v.iter().map(|&m| n - m).collect();
    v.extend(mirrored);
    v.sort_unstable();
    v.dedup();
    v
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn all_subsets(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..m).collect();
    loop {
        out.push(idx.clone());
        let Some(i) = (0..m).rev().find(|&i| idx[i] != i + n - m) else { break };
        idx[i] += 1;
        for j in (i + 1)..m {
            idx[j] = idx[j - 1] + 1;
        }
    }
    out
}

/// Fragments for each requested size; sizes above `n/2` reuse the complements of
/// the draws for `n - m` so that `I(F) + I(E∖F) = 2H_S` holds sample by sample.
fn fragments_for(n: usize, sizes: &[usize], samples: usize, exchangeable: bool, seed: u64) -> Vec<Vec<FragmentSpec>> {
    let draw = |m: usize| -> Vec<FragmentSpec> {
        if exchangeable {
            return vec![FragmentSpec::range(0, m)];
        }
        if binomial(n, m) <= samples as f64 {
            return all_subsets(n, m).into_iter().map(|s| FragmentSpec::new(s).expect("distinct")).collect();
        }
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(m as u64);
        // at exactly half, draw half the samples and pair each with its complement
        let half = 2 * m == n;
        let count = if half { samples.div_ceil(2) } else { samples };
        let mut out: Vec<FragmentSpec> = (0..count)
            .map(|_| {
                let mut s = rand::seq::index::sample(&mut rng, n, m).into_vec();
                s.sort_unstable();
                FragmentSpec::new(s).expect("distinct")
            })
            .collect();
        if half {
            let comps: Vec<FragmentSpec> = out.iter().map(|f| f.complement(n)).collect();
            out.extend(comps);
        }
        out
    };
    sizes
        .iter()
        .map(|&m| {
            if 2 * m > n {
                draw(n - m).iter().map(|f| f.complement(n)).collect()
            } else {
                draw(m)
            }
        })
        .collect()
}

fn build_curve<F>(n: usize, sizes: &[usize], samples: usize, exchangeable: bool, seed: u64, metric: F) -> Result<Vec<PipPoint>>
where
    F: Fn(&FragmentSpec) -> Result<f64> + Sync,
{
    let mut sizes = sizes.to_vec();
    sizes.sort_unstable();
    sizes.dedup();
    if let Some(&m) = sizes.last() {
        if m > n {
            return Err(Error::InvalidIndices(format!("fragment size {m} exceeds environment of {n}")));
        }
    }
    let frags = fragments_for(n, &sizes, samples.max(1), exchangeable, seed);
    let flat: Vec<(usize, &FragmentSpec)> =
        frags.iter().enumerate().flat_map(|(i, fs)| fs.iter().map(move |f| (i, f))).collect();
    let values: Vec<Result<f64>> = flat.par_iter().map(|(_, f)| metric(f)).collect();
    let mut points = Vec::with_capacity(sizes.len());
    let mut it = values.into_iter();
    for (i, &m) in sizes.iter().enumerate() {
        let vals: Vec<f64> = (&mut it).take(frags[i].len()).collect::<Result<_>>()?;
        let k = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / k;
        let var = if vals.len() > 1 { vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0) } else { 0.0 };
        points.push(PipPoint { f: m as f64 / n as f64, sharp_f: m, mean_i: mean, stddev: var.sqrt(), samples: vals.len() });
    }
    Ok(points)
}

/// Sample `I(S:F)` over the given fragment sizes (default grid when `None`).
///
/// Output is a deterministic function of `seed`, independent of the thread count.
pub fn build_pip<S: Source + ?Sized>(source: &S, sizes: Option<&[usize]>, samples: usize, seed: u64) -> Result<PartialInfoPlot> {
    let n = source.env_len();
    let grid = sizes.map_or_else(|| default_cardinalities(n), <[usize]>::to_vec);
    let points = build_curve(n, &grid, samples, source.exchangeable(), seed, |f| source.mutual_info(f))?;
    Ok(PartialInfoPlot { points, source_tag: source.tag(), h_s: source.system_entropy(), env_len: n })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RedundancyReport {
    pub delta: f64,
    /// Fragment fraction where the deficit first drops to δ; `None` when never reached.
    pub f_delta: Option<f64>,
    pub r_delta: f64,
    pub r_delta_d: Option<f64>,
    pub interpolated: bool,
}

impl RedundancyReport {
    pub fn reached(&self) -> bool {
        self.f_delta.is_some()
    }
}

/// First size where a curve reaches `target`, interpolated linearly in ♯F.
/// A jump from ♯F = 0 straight to the full value `full` is a perfect record and is not interpolated.
fn crossing(points: &[PipPoint], target: f64, full: f64) -> Option<(f64, bool)> {
    let first = points.iter().position(|p| p.mean_i >= target)?;
    let hit = &points[first];
    if first == 0 {
        return Some((hit.sharp_f as f64, false));
    }
    let prev = &points[first - 1];
    if prev.sharp_f == 0 && (hit.mean_i - full).abs() <= 1e-12 * full.max(1.0) {
        return Some((hit.sharp_f as f64, false));
    }
    let t = (target - prev.mean_i) / (hit.mean_i - prev.mean_i);
    Some((prev.sharp_f as f64 + t * (hit.sharp_f - prev.sharp_f) as f64, true))
}

/// `R_δ = ♯E / ♯F_δ` with `♯F_δ` the smallest size where `I ≥ (1-δ)H_S`.
pub fn redundancy(pip: &PartialInfoPlot, delta: f64) -> Result<RedundancyReport> {
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::InvalidArgument(format!("information deficit {delta} outside [0, 1)")));
    }
    if pip.h_s <= 0.0 {
        return Err(Error::InvalidArgument("system carries no entropy; redundancy undefined".into()));
    }
    let n = pip.env_len as f64;
    Ok(match crossing(&pip.points, (1.0 - delta) * pip.h_s, pip.h_s) {
        Some((sf, interpolated)) if sf > 0.0 => {
            RedundancyReport { delta, f_delta: Some(sf / n), r_delta: n / sf, r_delta_d: None, interpolated }
        }
        _ => RedundancyReport { delta, f_delta: None, r_delta: 0.0, r_delta_d: None, interpolated: false },
    })
}

/// `R_{δ_D} = ♯E / ♯F` with ♯F the smallest size where `H_{S d F} ≥ (1-δ_D)H_S`.
pub fn redundancy_of_decoherence<S: Source + ?Sized>(source: &S, delta_d: f64, samples: usize, seed: u64) -> Result<f64> {
    let n = source.env_len();
    let h_s = source.system_entropy();
    if h_s <= 0.0 {
        return Err(Error::InvalidArgument("system carries no entropy; redundancy undefined".into()));
    }
    let grid = default_cardinalities(n);
    let pts = build_curve(n, &grid, samples, source.exchangeable(), seed, |f| source.decohered_entropy(f))?;
    Ok(match crossing(&pts, (1.0 - delta_d) * h_s, h_s) {
        Some((sf, _)) if sf > 0.0 => n as f64 / sf,
        _ => 0.0,
    })
}

/// Redundancy of information and of decoherence from one source.
pub fn redundancy_report<S: Source + ?Sized>(source: &S, delta: f64, samples: usize, seed: u64) -> Result<RedundancyReport> {
    let pip = build_pip(source, None, samples, seed)?;
    let mut r = redundancy(&pip, delta)?;
    r.r_delta_d = match redundancy_of_decoherence(source, delta, samples, seed) {
        Ok(v) => Some(v),
        Err(Error::InvalidArgument(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(r)
}

/// `(classical, quantum) = (H_F - H_F(0), H_S - H_{S d E∖F})` from dense runs, the latter by
/// re-evolving the system against the complement alone.
pub fn decompose_mutual_info(
    p: &InteractingEnvParams,
    system_init: (C64, C64),
    env_init: &CVec,
    frag: &FragmentSpec,
) -> Result<(f64, f64)> {
    if p.m.iter().any(|&x| x != 0.0) {
        return Err(Error::NonCommuting);
    }
    let n = p.d.len();
    frag.validate(n)?;
    let psi = spinmodels::interacting_evolve(p, system_init, env_init)?;
    let f = frag.shifted(1);
    let classical = if frag.is_empty() {
        0.0
    } else {
        let psi0 = spinmodels::interacting_evolve(&p.at_time(0.0), system_init, env_init)?;
        psi.entanglement_entropy(&f)? - psi0.entanglement_entropy(&f)?
    };
    let s = FragmentSpec::new(vec![0])?;
    let mut d = p.d.clone();
    for &l in frag.indices() {
        d[l] = 0.0;
    }
    let counterfactual = InteractingEnvParams::new(d, p.m.clone(), p.time)?;
    let rest = spinmodels::interacting_evolve(&counterfactual, system_init, env_init)?;
    Ok((classical, psi.entanglement_entropy(&s)? - rest.entanglement_entropy(&s)?))
}

/// One row of the pointer-selectivity sweep for `σ(μ) = cos μ σ^z + sin μ σ^x`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub mu: f64,
    /// Holevo quantity of the fragment states conditioned on σ(μ) outcomes.
    pub chi: f64,
    pub h_sigma: f64,
    /// `H(σ(μ)|Π)`, the information about σ(μ) missing once the pointer is known.
    pub h_given_pointer: f64,
    /// `R_δ(σ(μ))`, or 0 when no fragment up to half the bath supplies `(1-δ)H(σ)`.
    pub r_delta: f64,
    /// Whether `H(σ|Π) ≤ δ H(σ)`, the necessary condition for redundant imprinting.
    pub within_bound: bool,
}

fn sigma_basis(mu: f64) -> [CVec; 2] {
    let (c, s) = ((mu / 2.0).cos(), (mu / 2.0).sin());
    [
        CVec::from_vec(vec![linalg::c(c), linalg::c(s)]),
        CVec::from_vec(vec![linalg::c(-s), linalg::c(c)]),
    ]
}

/// `χ(σ:F) = H_F - Σ_i p_i H(F | σ_i)` and `H(σ)` for a qubit branching state.
pub fn observable_chi(b: &BranchingState, mu: f64, frag: &FragmentSpec) -> Result<(f64, f64)> {
    if b.system_dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: b.system_dim() });
    }
    let hf = branching::fragment_entropy(b, frag, false)?;
    let mut probs = Vec::with_capacity(2);
    let mut chi = hf;
    for v in sigma_basis(mu) {
        let (p, h) = branching::conditional_fragment_entropy(b, &v, frag)?;
        probs.push(p);
        chi -= p * h;
    }
    Ok((chi, shannon(&probs)))
}

/// Pointer-selectivity table: χ at `fragment_size`, the conditional-entropy bound and `R_δ(σ(μ))`.
pub fn observable_sweep(
    b: &BranchingState,
    mu_grid: &[f64],
    fragment_size: usize,
    delta: f64,
    samples: usize,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    let n = BranchingState::env_len(b);
    let sizes: Vec<usize> = (0..=n / 2).collect();
    if fragment_size > n {
        return Err(Error::InvalidIndices(format!("fragment size {fragment_size} exceeds environment of {n}")));
    }
    mu_grid
        .iter()
        .map(|&mu| {
            let curve = build_curve(n, &sizes, samples, false, seed, |f| observable_chi(b, mu, f).map(|x| x.0))?;
            let at = build_curve(n, &[fragment_size], samples, false, seed, |f| observable_chi(b, mu, f).map(|x| x.0))?;
            let (_, h_sigma) = observable_chi(b, mu, &FragmentSpec::empty())?;
            let [s0, s1] = sigma_basis(mu);
            let h_given_pointer: f64 = (0..2)
                .map(|k| b.probs()[k] * shannon(&[s0[k].norm_sqr(), s1[k].norm_sqr()]))
                .sum();
            let r_delta = match crossing(&curve, (1.0 - delta) * h_sigma, h_sigma) {
                Some((sf, _)) if sf > 0.0 && h_sigma > 0.0 => n as f64 / sf,
                _ => 0.0,
            };
            Ok(SweepRow {
                mu,
                chi: at[0].mean_i,
                h_sigma,
                h_given_pointer,
                r_delta,
                within_bound: h_given_pointer <= delta * h_sigma,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineReport {
    pub redundancies: Vec<f64>,
    pub mean: f64,
}

/// Haar-random pure state of one system qubit (subsystem 0) and `n_env` environment qubits.
pub fn haar_source(n_env: usize, seed: u64) -> Result<DenseSource> {
    let shape = HilbertShape::qubits(n_env + 1)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let v = linalg::haar_vector(shape.total(), &mut rng);
    DenseSource::new(StateVector::new(shape, v)?, FragmentSpec::new(vec![0])?)
}

/// `R_δ` of Haar-random pure states of one system qubit and `n_env` environment qubits.
pub fn haar_baseline(n_env: usize, states: usize, delta: f64, samples: usize, seed: u64) -> Result<BaselineReport> {
    let shape = HilbertShape::qubits(n_env + 1)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut redundancies = Vec::with_capacity(states);
    for i in 0..states {
        let v = linalg::haar_vector(shape.total(), &mut rng);
        let src = DenseSource::new(StateVector::new(shape.clone(), v)?, FragmentSpec::new(vec![0])?)?;
        let pip = build_pip(&src, None, samples, seed.wrapping_add(i as u64))?;
        redundancies.push(redundancy(&pip, delta)?.r_delta);
    }
    let mean = redundancies.iter().sum::<f64>() / states.max(1) as f64;
    Ok(BaselineReport { redundancies, mean })
}
