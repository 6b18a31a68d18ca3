//! One function per subcommand. Each turns resolved parameters into a table and a report.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use clap::ValueEnum;
use qdarwin::branching::BranchingState;
use qdarwin::darwin::{self, build_pip, haar_baseline, observable_sweep, DenseSource, HazySource, PartialInfoPlot, Source};
use qdarwin::envariance::{self, fine_grain_born, fine_grained_state, swap_and_counterswap, FineGrainSpec};
use qdarwin::photonenv::{self, DecoherenceFactor, PhotonHaloParams, PhotonSource, RadiusMode};
use qdarwin::qbm::{self, GaussianSource, OhmicBathParams, Squeeze};
use qdarwin::qstate::FragmentSpec;
use qdarwin::spinmodels::{self, CentralSpinParams, HazyParams, InteractingEnvParams, SIGMA_D, SIGMA_M};
use qdarwin::{CVec, Complex, C64};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::{Failure, Units};

pub struct Context {
    pub seed: u64,
    pub units: Units,
}

pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

pub struct Outcome {
    pub table: Table,
    pub report: Value,
    pub summary: String,
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn header(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|s| s.to_string()).collect()
}

fn pip_table(pip: &PartialInfoPlot, units: Units) -> Table {
    let s = units.scale();
    Table {
        header: vec!["f".into(), "sharpF".into(), format!("meanI_{}", units.name()), "stddev".into(), "samples".into()],
        rows: pip
            .points
            .iter()
            .map(|p| vec![num(p.f), p.sharp_f.to_string(), num(p.mean_i * s), num(p.stddev * s), p.samples.to_string()])
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    /// Perfect c-not records
    Cnot,
    /// Central spin with random couplings in (0, 1], or identical ones when `coupling` is set
    CentralSpin,
    /// Central spin with a partly mixed bath
    Hazy,
    /// Central spin with weakly interacting bath spins (dense)
    Interacting,
    /// Haar-random pure state (dense)
    Haar,
}

/// Parameters of a model; shared by `pip` and `redundancy`.
#[derive(Debug, Clone, Default, clap::Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub model: Option<Model>,
    /// Number of environment subsystems
    #[arg(long)]
    pub n: Option<usize>,
    /// Evolution time in units of inverse coupling
    #[arg(long)]
    pub time: Option<f64>,
    /// Identical coupling for the central-spin and hazy models
    #[arg(long)]
    pub coupling: Option<f64>,
    /// Bath entropy as a fraction of its capacity (hazy model)
    #[arg(long)]
    pub hazy_fraction: Option<f64>,
    /// Spread of system-bath couplings (interacting model)
    #[arg(long)]
    pub sigma_d: Option<f64>,
    /// Spread of bath-bath couplings (interacting model)
    #[arg(long)]
    pub sigma_m: Option<f64>,
    /// Random fragments per cardinality
    #[arg(long)]
    pub samples: Option<usize>,
    /// Information deficit
    #[arg(long)]
    pub delta: Option<f64>,
}

struct ResolvedModel {
    model: Model,
    n: usize,
    time: f64,
    samples: usize,
    delta: f64,
}

impl ModelArgs {
    fn resolve(&self, default_model: Model) -> ResolvedModel {
        let model = self.model.unwrap_or(default_model);
        let (n, time) = match model {
            Model::Cnot => (50, 0.0),
            Model::CentralSpin | Model::Hazy => (50, 4.0),
            Model::Interacting => (16, 10.0),
            Model::Haar => (12, 0.0),
        };
        ResolvedModel {
            model,
            n: self.n.unwrap_or(n),
            time: self.time.unwrap_or(time),
            samples: self.samples.unwrap_or(64),
            delta: self.delta.unwrap_or(0.1),
        }
    }

    fn central(&self, r: &ResolvedModel, time: f64, seed: u64) -> qdarwin::Result<CentralSpinParams> {
        match self.coupling {
            Some(d) => CentralSpinParams::uniform(r.n, d, time),
            None => CentralSpinParams::random(r.n, time, seed),
        }
    }

    fn source(&self, r: &ResolvedModel, time: f64, seed: u64) -> Result<Box<dyn Source>, Failure> {
        Ok(match r.model {
            Model::Cnot => Box::new(spinmodels::cnot_model(C64::new(FRAC_1_SQRT_2, 0.0), C64::new(FRAC_1_SQRT_2, 0.0), r.n)?),
            Model::CentralSpin => Box::new(spinmodels::central_spin_branching(&self.central(r, time, seed)?)?),
            Model::Hazy => {
                let hazy = HazyParams::qubit_fraction(self.hazy_fraction.unwrap_or(0.5))?;
                Box::new(HazySource { base: self.central(r, time, seed)?, hazy })
            }
            Model::Interacting => {
                let p = InteractingEnvParams::random(
                    r.n,
                    self.sigma_d.unwrap_or(SIGMA_D),
                    self.sigma_m.unwrap_or(SIGMA_M),
                    time,
                    seed,
                )?;
                let plus = CVec::from_vec(vec![C64::new(FRAC_1_SQRT_2, 0.0); 2]);
                let psi = spinmodels::interacting_evolve(&p, (plus[0], plus[1]), &plus)?;
                Box::new(DenseSource::new(psi, FragmentSpec::new(vec![0])?)?)
            }
            Model::Haar => Box::new(darwin::haar_source(r.n, seed)?),
        })
    }
}

pub type PipArgs = ModelArgs;

pub fn pip(a: &PipArgs, ctx: &Context) -> Result<Outcome, Failure> {
    let r = a.resolve(Model::Cnot);
    let src = a.source(&r, r.time, ctx.seed)?;
    let pip = build_pip(&*src, None, r.samples, ctx.seed)?;
    let red = darwin::redundancy(&pip, r.delta)?;
    let s = ctx.units.scale();
    let summary = format!(
        "{}: H_S = {:.6} {u}, plateau = {:.6} {u}, R_{} = {}",
        pip.source_tag,
        pip.h_s * s,
        pip.plateau() * s,
        r.delta,
        red.r_delta,
        u = ctx.units.name()
    );
    Ok(Outcome {
        report: json!({
            "model": r.model, "n": r.n, "time": r.time, "samples": r.samples, "delta": r.delta,
            "source": pip.source_tag, "h_s": pip.h_s * s, "plateau": pip.plateau() * s,
            "r_delta": red.r_delta, "f_delta": red.f_delta,
        }),
        table: pip_table(&pip, ctx.units),
        summary,
    })
}

#[derive(Debug, Clone, Default, clap::Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RedundancyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    /// Comma-separated evolution times
    #[arg(long, value_delimiter = ',')]
    pub times: Option<Vec<f64>>,
}

pub fn redundancy(a: &RedundancyArgs, ctx: &Context) -> Result<Outcome, Failure> {
    let r = a.model.resolve(Model::Interacting);
    let times = a.times.clone().unwrap_or_else(|| vec![0.5, 10.0, 500.0]);
    let s = ctx.units.scale();
    let mut rows = Vec::new();
    let mut report = Vec::new();
    for &t in &times {
        let src = a.model.source(&r, t, ctx.seed)?;
        let pip = build_pip(&*src, None, r.samples, ctx.seed)?;
        let red = darwin::redundancy(&pip, r.delta)?;
        rows.push(vec![
            num(t),
            num(pip.h_s * s),
            num(pip.plateau() * s),
            red.f_delta.map(num).unwrap_or_default(),
            num(red.r_delta),
        ]);
        report.push(json!({ "time": t, "h_s": pip.h_s * s, "r_delta": red.r_delta }));
    }
    let summary = report.iter().map(|v| format!("t = {}: R = {}", v["time"], v["r_delta"])).collect::<Vec<_>>().join("; ");
    Ok(Outcome {
        table: Table { header: header(&["time", "h_s", "plateau", "f_delta", "r_delta"]), rows },
        report: json!({ "model": r.model, "n": r.n, "samples": r.samples, "delta": r.delta, "times": report }),
        summary,
    })
}

#[derive(Debug, Clone, Default, clap::Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepArgs {
    /// Number of environment qubits
    #[arg(long)]
    pub n: Option<usize>,
    /// Evolution time in units of inverse coupling
    #[arg(long)]
    pub time: Option<f64>,
    /// Fragment size at which χ is reported
    #[arg(long)]
    pub fragment: Option<usize>,
    /// Number of observable angles in [0, π]
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
}

pub fn sweep(a: &SweepArgs, ctx: &Context) -> Result<Outcome, Failure> {
    let n = a.n.unwrap_or(12);
    let time = a.time.unwrap_or(4.0);
    let fragment = a.fragment.unwrap_or(3);
    let points = a.points.unwrap_or(17).max(2);
    let delta = a.delta.unwrap_or(0.1);
    let samples = a.samples.unwrap_or(16);
    let b: BranchingState = spinmodels::central_spin_branching(&CentralSpinParams::random(n, time, ctx.seed)?)?;
    let grid: Vec<f64> = (0..points).map(|i| PI * i as f64 / (points - 1) as f64).collect();
    let rows = observable_sweep(&b, &grid, fragment, delta, samples, ctx.seed)?;
    let s = ctx.units.scale();
    let u = ctx.units.name();
    let bound_ok = rows.iter().all(|r| r.within_bound || r.r_delta == 0.0);
    Ok(Outcome {
        table: Table {
            header: vec![
                "mu".into(),
                format!("chi_{u}"),
                format!("h_sigma_{u}"),
                format!("h_given_pointer_{u}"),
                "r_delta".into(),
                "within_bound".into(),
            ],
            rows: rows
                .iter()
                .map(|r| {
                    vec![num(r.mu), num(r.chi * s), num(r.h_sigma * s), num(r.h_given_pointer * s), num(r.r_delta), r.within_bound.to_string()]
                })
                .collect(),
        },
        report: json!({ "n": n, "time": time, "fragment": fragment, "delta": delta, "samples": samples, "bound_respected": bound_ok }),
        summary: format!(
            "χ(σ(0)) = {:.6} {u}, χ(σ(π/2)) = {:.6} {u}, bound respected: {bound_ok}",
            rows[0].chi * s,
            rows[(points - 1) / 2].chi * s
        ),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    X,
    P,
}

#[derive(Debug, Clone, Default, clap::Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QbmArgs {
    /// Squeezing parameter s
    #[arg(long)]
    pub squeezing: Option<f64>,
    #[arg(long, value_enum)]
    pub direction: Option<Direction>,
    /// Number of bath bands
    #[arg(long)]
    pub bands: Option<usize>,
    /// Evolution time in units of the system period scale
    #[arg(long)]
    pub time: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub delta: Option<f64>,
}

/// Fine grid up to 16 bands, then every 4, mirrored about half the bath.
pub fn qbm_sizes(bands: usize) -> Vec<usize> {
    let half = bands / 2;
    let mut v: Vec<usize> = (0..=half.min(16)).chain((20..=half).step_by(4)).chain(std::iter::once(half)).collect();
    let mirror: Vec<usize> = v.iter().map(|&m| bands - m).collect();
    v.extend(mirror);
    v.sort_unstable();
    v.dedup();
    v
}

pub fn qbm(a: &QbmArgs, ctx: &Context) -> Result<Outcome, Failure> {
    let s_param = a.squeezing.unwrap_or(1000.0);
    let dir = match a.direction.unwrap_or(Direction::X) {
        Direction::X => Squeeze::X,
        Direction::P => Squeeze::P,
    };
    let bands = a.bands.unwrap_or(256);
    let time = a.time.unwrap_or(4.0);
    let samples = a.samples.unwrap_or(64);
    let delta = a.delta.unwrap_or(0.1);
    let bath = OhmicBathParams::standard(bands);
    let state = qbm::qbm_evolve(&bath, s_param, dir, time)?;
    let src = GaussianSource::new(state)?;
    let pip = build_pip(&src, Some(&qbm_sizes(bands)), samples, ctx.seed)?;
    let red = darwin::redundancy(&pip, delta)?;
    let predicted = qbm::qbm_redundancy(s_param, delta)?;
    let sc = ctx.units.scale();
    Ok(Outcome {
        report: json!({
            "squeezing": s_param, "bands": bands, "time": time, "samples": samples, "delta": delta,
            "h_s": pip.h_s * sc, "ln_s": s_param.ln() * sc, "r_delta": red.r_delta, "r_delta_predicted": predicted,
        }),
        summary: format!("H_S = {:.4} (ln s = {:.4}), R_{delta} = {:.3} (s^2δ = {:.3})", pip.h_s, s_param.ln(), red.r_delta, predicted),
        table: pip_table(&pip, ctx.units),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    DustGrainSunlight,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RadiusForm {
    Printed,
    Alternate,
}

#[derive(Debug, Clone, Default, clap::Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhotonArgs {
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Elapsed time (s)
    #[arg(long = "t")]
    pub t_s: Option<f64>,
    #[arg(long)]
    pub radius_m: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub irradiance_w_m2: Option<f64>,
    #[arg(long)]
    pub temperature_k: Option<f64>,
    #[arg(long)]
    pub separation_m: Option<f64>,
    /// Angle between illumination and separation (rad)
    #[arg(long)]
    pub angle_rad: Option<f64>,
    #[arg(long, value_enum)]
    pub radius_form: Option<RadiusForm>,
    /// Isotropic illumination instead of a directed beam
    #[arg(long)]
    pub isotropic: Option<bool>,
    #[arg(long)]
    pub delta: Option<f64>,
}

pub fn photon(a: &PhotonArgs, ctx: &Context) -> Result<Outcome, Failure> {
    let base = match a.preset.unwrap_or(Preset::DustGrainSunlight) {
        Preset::DustGrainSunlight => PhotonHaloParams::dust_grain_sunlight(),
    };
    let p = PhotonHaloParams {
        radius: a.radius_m.unwrap_or(base.radius),
        epsilon: a.epsilon.unwrap_or(base.epsilon),
        irradiance: a.irradiance_w_m2.unwrap_or(base.irradiance),
        temperature: a.temperature_k.unwrap_or(base.temperature),
        separation: a.separation_m.unwrap_or(base.separation),
        angle: a.angle_rad.unwrap_or(base.angle),
        radius_mode: match a.radius_form {
            Some(RadiusForm::Alternate) => RadiusMode::Alternate,
            Some(RadiusForm::Printed) => RadiusMode::Printed,
            None => base.radius_mode,
        },
    };
    let t = a.t_s.unwrap_or(1e-6);
    let delta = a.delta.unwrap_or(0.1);
    let isotropic = a.isotropic.unwrap_or(false);
    let rate = photonenv::decoherence_rate(&p)?;
    let t_over_tau = t * rate.rate;
    let gamma = DecoherenceFactor::from_time(t_over_tau)?;
    let r = photonenv::photon_redundancy(t_over_tau, delta)?;
    let n = 1000;
    let src = PhotonSource { gamma, n, isotropic };
    let sizes: Vec<usize> = (0..=100).map(|i| i * n / 100).collect();
    let pip = build_pip(&src, Some(&sizes), 1, ctx.seed)?;
    let dipole = p.separation <= p.thermal_wavelength();
    Ok(Outcome {
        report: json!({
            "radius_m": p.radius, "epsilon": p.epsilon, "irradiance_w_m2": p.irradiance, "temperature_k": p.temperature,
            "separation_m": p.separation, "angle_rad": p.angle, "t_s": t, "delta": delta, "isotropic": isotropic,
            "effective_radius_m": p.effective_radius()?, "thermal_wavelength_m": p.thermal_wavelength(),
            "regime": if dipole { "dipole" } else { "saturated" }, "regime_ok": rate.regime_ok,
            "rate_per_s": rate.rate, "t_over_tau": t_over_tau, "gamma": gamma.value(), "r_delta": r,
        }),
        summary: format!("1/τ_D = {:.4e} /s, t/τ_D = {:.4e}, R_{delta} ≈ {:.3e}", rate.rate, t_over_tau, r),
        table: pip_table(&pip, ctx.units),
    })
}

#[derive(Debug, Clone, Default, clap::Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvarianceArgs {
    /// Colon-separated integer weights, e.g. `2:1`
    #[arg(long)]
    pub finegraining: Option<String>,
}

fn parse_weights(s: &str) -> Result<Vec<u64>, Failure> {
    s.split(':')
        .map(|w| w.trim().parse::<u64>().map_err(|_| Failure::Config(format!("finegraining: `{w}` is not a non-negative integer"))))
        .collect()
}

pub fn envariance(a: &EnvarianceArgs, _ctx: &Context) -> Result<Outcome, Failure> {
    let text = a.finegraining.clone().unwrap_or_else(|| "2:1".into());
    let spec = FineGrainSpec::new(parse_weights(&text)?)?;
    let probs = fine_grain_born(&spec)?;
    // swap check on the dense finegrained state when it is small enough
    let restoration = fine_grained_state(&spec, &vec![0.0; spec.numerators().len()]).ok().map(|fg| {
        (1..fg.pair.len())
            .map(|j| swap_and_counterswap(&fg.pair, j - 1, j).map(|o| o.restored_fidelity).unwrap_or(0.0))
            .fold(1.0, f64::min)
    });
    let rows = spec
        .numerators()
        .iter()
        .zip(&probs)
        .enumerate()
        .map(|(k, (mu, p))| vec![k.to_string(), mu.to_string(), p.to_string(), num(envariance::ratio_to_f64(p))])
        .collect();
    Ok(Outcome {
        table: Table { header: header(&["outcome", "mu", "probability", "probability_float"]), rows },
        report: json!({
            "numerators": spec.numerators(), "branches": spec.total(),
            "probabilities": probs.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            "min_swap_restoration_fidelity": restoration,
        }),
        summary: format!("p = ({})", probs.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(", ")),
    })
}

#[derive(Debug, Clone, Default, clap::Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReversalArgs {
    /// Comma-separated real amplitudes, normalized before use
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub amplitudes: Option<Vec<f64>>,
}

pub fn reversal(a: &ReversalArgs, _ctx: &Context) -> Result<Outcome, Failure> {
    let amps = a.amplitudes.clone().unwrap_or_else(|| vec![0.6, 0.8]);
    let norm = amps.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Failure::Config("amplitudes are all zero".into()));
    }
    let alpha: Vec<C64> = amps.iter().map(|&x| Complex::new(x / norm, 0.0)).collect();
    let out = envariance::reversal_demo(&alpha)?;
    let rho = out.with_copy.matrix();
    let mut coherence: f64 = 0.0;
    for i in 0..alpha.len() {
        for j in 0..alpha.len() {
            if i != j {
                coherence = coherence.max(rho[(i, j)].norm());
            }
        }
    }
    let rows = alpha
        .iter()
        .enumerate()
        .map(|(s, x)| vec![s.to_string(), num(rho[(s, s)].re), num(x.norm_sqr())])
        .collect();
    Ok(Outcome {
        table: Table { header: header(&["s", "with_copy_population", "amplitude_weight"]), rows },
        report: json!({
            "amplitudes": amps, "normalization": norm, "without_copy_fidelity": out.without_copy,
            "with_copy_max_coherence": coherence,
        }),
        summary: format!("without copy: fidelity {}; with copy: largest coherence {:e}", out.without_copy, coherence),
    })
}

#[derive(Debug, Clone, Default, clap::Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineArgs {
    /// Number of environment qubits
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of random states
    #[arg(long)]
    pub states: Option<usize>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
}

pub fn baseline(a: &BaselineArgs, ctx: &Context) -> Result<Outcome, Failure> {
    let n = a.n.unwrap_or(12);
    let states = a.states.unwrap_or(20);
    let delta = a.delta.unwrap_or(0.1);
    let samples = a.samples.unwrap_or(16);
    let rep = haar_baseline(n, states, delta, samples, ctx.seed)?;
    Ok(Outcome {
        table: Table {
            header: header(&["state", "r_delta"]),
            rows: rep.redundancies.iter().enumerate().map(|(i, r)| vec![i.to_string(), num(*r)]).collect(),
        },
        report: json!({ "n": n, "states": states, "delta": delta, "samples": samples, "mean_r_delta": rep.mean }),
        summary: format!("mean R_{delta} over {states} Haar states of 1+{n} qubits: {:.4}", rep.mean),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qbm_grid_is_mirrored() {
        let g = qbm_sizes(256);
        assert_eq!(g.first(), Some(&0));
        assert_eq!(g.last(), Some(&256));
        assert!(g.contains(&128) && g.contains(&16) && g.contains(&20));
        for &m in &g {
            assert!(g.contains(&(256 - m)));
        }
        assert_eq!(qbm_sizes(6), (0..=6).collect::<Vec<_>>());
    }

    #[test]
    fn weights_parse() {
        assert_eq!(parse_weights("2:1").unwrap(), vec![2, 1]);
        assert!(parse_weights("2:x").is_err());
    }
}
