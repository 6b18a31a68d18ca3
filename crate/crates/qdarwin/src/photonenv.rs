//! Dielectric sphere in a superposition of two locations, decohered by scattered
//! thermal photons. Everything here is closed form in the decoherence factor
//! `Γ = exp(-t/τ_D)`.

use std::f64::consts::{LN_2, PI, TAU};

use crate::branching::two_branch_entropy;
use crate::darwin::Source;
use crate::qstate::FragmentSpec;
use crate::{Error, Result};

/// Physical and mathematical constants (SI).
pub mod constants {
    pub const K_B: f64 = 1.380649e-23;
    pub const C: f64 = 299_792_458.0;
    pub const HBAR: f64 = 1.054_571_817e-34;
    pub const ZETA_7: f64 = 1.008_349_277_381_922_8;
    pub const ZETA_9: f64 = 1.002_008_392_826_082_2;
}

/// Numerical prefactor `161280 ζ(9)/π³` of the dipole-regime rate.
pub fn c_gamma() -> f64 {
    161_280.0 * constants::ZETA_9 / PI.powi(3)
}

/// Numerical prefactor `57600 ζ(7)/π³` of the saturated rate.
pub fn c_gamma_saturated() -> f64 {
    57_600.0 * constants::ZETA_7 / PI.powi(3)
}

/// Permittivity factor used for the effective radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RadiusMode {
    /// `((ε-1)/(ε-2))^{1/3}`.
    #[default]
    Printed,
    /// Clausius–Mossotti form `((ε-1)/(ε+2))^{1/3}`.
    Alternate,
}

/// Effective radius `ã` of a sphere of radius `r` and permittivity `ε`.
pub fn effective_radius(r: f64, epsilon: f64, mode: RadiusMode) -> Result<f64> {
    let den = match mode {
        RadiusMode::Printed => epsilon - 2.0,
        RadiusMode::Alternate => epsilon + 2.0,
    };
    if den == 0.0 {
        return Err(Error::InvalidArgument(format!("effective radius has a pole at ε = {epsilon}")));
    }
    let ratio = (epsilon - 1.0) / den;
    if ratio < 0.0 {
        return Err(Error::InvalidArgument(format!("negative polarizability factor at ε = {epsilon}")));
    }
    Ok(r * ratio.cbrt())
}

/// Illuminated sphere in a two-location superposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonHaloParams {
    /// Radius (m).
    pub radius: f64,
    pub epsilon: f64,
    /// Irradiance (W/m²).
    pub irradiance: f64,
    /// Black-body temperature (K).
    pub temperature: f64,
    /// Separation of the two locations (m).
    pub separation: f64,
    /// Angle between illumination and separation (rad).
    pub angle: f64,
    pub radius_mode: RadiusMode,
}

impl PhotonHaloParams {
    /// Micron-sized dust grain in sunlight.
    pub fn dust_grain_sunlight() -> Self {
        Self {
            radius: 0.5e-6,
            epsilon: 4.0,
            irradiance: 1000.0,
            temperature: 5250.0,
            separation: 1e-6,
            angle: PI / 2.0,
            radius_mode: RadiusMode::Printed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.epsilon > 1.0 && self.temperature > 0.0 && self.irradiance >= 0.0 && self.separation >= 0.0) {
            return Err(Error::InvalidArgument("need r > 0, ε > 1, T > 0, I ≥ 0, Δx ≥ 0".into()));
        }
        Ok(())
    }

    /// Thermal photon wavelength `2πħc/(k_B T)` (m).
    pub fn thermal_wavelength(&self) -> f64 {
        TAU * constants::HBAR * constants::C / (constants::K_B * self.temperature)
    }

    pub fn effective_radius(&self) -> Result<f64> {
        effective_radius(self.radius, self.epsilon, self.radius_mode)
    }
}

/// A decoherence rate and whether the parameters lie in the regime where its formula holds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rate {
    /// `1/τ_D` (1/s).
    pub rate: f64,
    pub regime_ok: bool,
}

/// `1/τ_D = C_Γ (3 + 11cos²θ) I ã⁶ Δx² (k_B T)⁵ / (ħc)⁶`, valid for `Δx` below the thermal wavelength.
pub fn decoherence_rate_dipole(p: &PhotonHaloParams) -> Result<Rate> {
    p.validate()?;
    let a = p.effective_radius()?;
    let kt = constants::K_B * p.temperature;
    let hc = constants::HBAR * constants::C;
    let rate = c_gamma()
        * (3.0 + 11.0 * p.angle.cos().powi(2))
        * p.irradiance
        * a.powi(6)
        * p.separation.powi(2)
        * (kt / hc).powi(5)
        / hc;
    Ok(Rate { rate, regime_ok: p.separation <= p.thermal_wavelength() })
}

/// `1/τ̃_D = C̃_Γ I ã⁶ (k_B T)³ / (c⁴ħ⁴)`, valid for `Δx` above the thermal wavelength.
pub fn decoherence_rate_saturated(p: &PhotonHaloParams) -> Result<Rate> {
    p.validate()?;
    let a = p.effective_radius()?;
    let kt = constants::K_B * p.temperature;
    let hc = constants::HBAR * constants::C;
    let rate = c_gamma_saturated() * p.irradiance * a.powi(6) * (kt / hc).powi(3) / hc;
    Ok(Rate { rate, regime_ok: p.separation >= p.thermal_wavelength() })
}

/// Rate of whichever limiting regime the separation falls in.
pub fn decoherence_rate(p: &PhotonHaloParams) -> Result<Rate> {
    if p.separation <= p.thermal_wavelength() {
        decoherence_rate_dipole(p)
    } else {
        decoherence_rate_saturated(p)
    }
}

/// Decoherence factor `Γ = exp(-t/τ_D)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoherenceFactor(f64);

impl DecoherenceFactor {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::InvalidArgument(format!("decoherence factor {gamma} outside [0, 1]")));
        }
        Ok(Self(gamma))
    }

    pub fn from_time(t_over_tau: f64) -> Result<Self> {
        if t_over_tau < 0.0 {
            return Err(Error::InvalidArgument("negative time".into()));
        }
        Ok(Self((-t_over_tau).exp()))
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

const SERIES_TOL: f64 = 1e-15;
const SERIES_MAX: usize = 10_000;
/// Above this base the power series converges too slowly and the closed form is used.
const SERIES_SWITCH: f64 = 0.9;

/// `Σ_{n≥1} x^n / (2n(2n-1))`.
fn power_series(x: f64) -> f64 {
    if x > SERIES_SWITCH {
        return LN_2 - two_branch_entropy(x).expect("x in [0, 1]");
    }
    let mut sum = 0.0;
    let mut pow = 1.0;
    for n in 1..=SERIES_MAX {
        pow *= x;
        let nf = n as f64;
        let term = pow / (2.0 * nf * (2.0 * nf - 1.0));
        sum += term;
        if term < SERIES_TOL {
            break;
        }
    }
    sum
}

fn check_fraction(f: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::InvalidArgument(format!("fraction {f} outside [0, 1]")));
    }
    Ok(())
}

/// `I(S:F_f) = ln 2 + Σ_n (Γ^{(1-f)n} - Γ^{fn} - Γ^n) / (2n(2n-1))`.
pub fn photon_mutual_info(gamma: DecoherenceFactor, f: f64) -> Result<f64> {
    check_fraction(f)?;
    let g = gamma.value();
    Ok(LN_2 + power_series(g.powf(1.0 - f)) - power_series(g.powf(f)) - power_series(g))
}

/// Isotropic illumination: the bath starts maximally mixed, so only `H_S - H_{S d E∖F}` survives.
pub fn photon_mutual_info_isotropic(gamma: DecoherenceFactor, f: f64) -> Result<f64> {
    check_fraction(f)?;
    let g = gamma.value();
    Ok(power_series(g.powf(1.0 - f)) - power_series(g))
}

/// `R_δ ≈ (t/τ_D) / |ln(2δ ln 2)|`.
pub fn photon_redundancy(t_over_tau: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::InvalidArgument(format!("information deficit {delta} outside (0, 0.5)")));
    }
    if t_over_tau < 0.0 {
        return Err(Error::InvalidArgument("negative time".into()));
    }
    Ok(t_over_tau / (2.0 * delta * LN_2).ln().abs())
}

/// `1/f_δ` where the exact curve first reaches `(1-δ) ln 2`, found by bisection on `f ∈ (0, ½]`.
pub fn photon_redundancy_inverted(t_over_tau: f64, delta: f64) -> Result<f64> {
    let g = DecoherenceFactor::from_time(t_over_tau)?;
    let target = (1.0 - delta) * LN_2;
    if photon_mutual_info(g, 0.5)? < target {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0_f64, 0.5_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if photon_mutual_info(g, mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(1.0 / (0.5 * (lo + hi)))
}

/// The analytic curve viewed as a bath of `n` equivalent photon fragments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonSource {
    pub gamma: DecoherenceFactor,
    pub n: usize,
    pub isotropic: bool,
}

impl Source for PhotonSource {
    fn env_len(&self) -> usize {
        self.n
    }

    fn system_entropy(&self) -> f64 {
        two_branch_entropy(self.gamma.value()).expect("Γ in [0, 1]")
    }

    fn mutual_info(&self, frag: &FragmentSpec) -> Result<f64> {
        frag.validate(self.n)?;
        let f = frag.len() as f64 / self.n as f64;
        if self.isotropic {
            photon_mutual_info_isotropic(self.gamma, f)
        } else {
            photon_mutual_info(self.gamma, f)
        }
    }

    fn decohered_entropy(&self, frag: &FragmentSpec) -> Result<f64> {
        frag.validate(self.n)?;
        two_branch_entropy(self.gamma.value().powf(frag.len() as f64 / self.n as f64))
    }

    fn exchangeable(&self) -> bool {
        true
    }

    fn tag(&self) -> String {
        format!("photon:Γ={},n={}{}", self.gamma.value(), self.n, if self.isotropic { ",isotropic" } else { "" })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::darwin::{build_pip, redundancy_of_decoherence};

    #[test]
    fn prefactors() {
        let zeta = |s: i32| (1..200_000).map(|k| (k as f64).powi(-s)).sum::<f64>();
        assert!((constants::ZETA_9 - zeta(9)).abs() < 1e-13);
        assert!((constants::ZETA_7 - zeta(7)).abs() < 1e-13);
        assert!((c_gamma() - 5210.0).abs() < 5.0);
        assert!((c_gamma_saturated() - 1873.0).abs() < 1.0);
    }

    #[test]
    fn effective_radius_modes() {
        let r = 2e-6;
        assert!((effective_radius(r, 3.0, RadiusMode::Printed).unwrap() - r * 2f64.cbrt()).abs() < 1e-20);
        assert!((effective_radius(r, 3.0, RadiusMode::Alternate).unwrap() - r * 0.4f64.cbrt()).abs() < 1e-20);
        for mode in [RadiusMode::Printed, RadiusMode::Alternate] {
            assert!((effective_radius(r, 1e12, mode).unwrap() - r).abs() < 1e-17);
        }
        assert!(effective_radius(r, 2.0, RadiusMode::Printed).is_err());
    }

    #[test]
    fn dipole_rate_angle_and_regime() {
        let p = PhotonHaloParams::dust_grain_sunlight();
        let perp = decoherence_rate_dipole(&p).unwrap();
        let par = decoherence_rate_dipole(&PhotonHaloParams { angle: 0.0, ..p }).unwrap();
        assert!((perp.rate / par.rate - 3.0 / 14.0).abs() < 1e-12);
        assert!(perp.regime_ok);
        let far = decoherence_rate_dipole(&PhotonHaloParams { separation: 1e-3, ..p }).unwrap();
        assert!(!far.regime_ok && far.rate > 0.0);
    }

    #[test]
    fn saturated_rate_scaling() {
        let p = PhotonHaloParams { separation: 1e-3, ..PhotonHaloParams::dust_grain_sunlight() };
        let a = decoherence_rate_saturated(&p).unwrap();
        let b = decoherence_rate_saturated(&PhotonHaloParams { separation: 5e-3, angle: 0.3, ..p }).unwrap();
        assert_eq!(a.rate, b.rate);
        assert!(a.regime_ok);
        let hot = decoherence_rate_saturated(&PhotonHaloParams { temperature: 2.0 * p.temperature, ..p }).unwrap();
        assert!((hot.rate / a.rate - 8.0).abs() < 1e-12);
    }

    #[test]
    fn mutual_info_endpoints_and_closed_form() {
        for g in [1e-6, 0.05, 0.3, 0.7, 0.95] {
            let gamma = DecoherenceFactor::new(g).unwrap();
            assert!(photon_mutual_info(gamma, 0.0).unwrap().abs() < 1e-12);
            let hs = two_branch_entropy(g).unwrap();
            assert!((photon_mutual_info(gamma, 1.0).unwrap() - 2.0 * hs).abs() < 1e-12);
            for f in [0.1, 0.35, 0.5, 0.8] {
                let closed = hs + two_branch_entropy(g.powf(f)).unwrap() - two_branch_entropy(g.powf(1.0 - f)).unwrap();
                let i = photon_mutual_info(gamma, f).unwrap();
                assert!((i - closed).abs() < 1e-12);
                let mirror = photon_mutual_info(gamma, 1.0 - f).unwrap();
                assert!((i + mirror - 2.0 * hs).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn lowest_power_dominates() {
        let gamma = DecoherenceFactor::from_time(50.0).unwrap();
        for f in [0.1, 0.2, 0.3, 0.4] {
            let approx = LN_2 - 0.5 * gamma.value().powf(f);
            assert!((photon_mutual_info(gamma, f).unwrap() - approx).abs() < 1e-4);
        }
    }

    #[test]
    fn plateau_widens_with_time() {
        let mut last = 0.0;
        for t in [1.0, 3.0, 10.0, 30.0] {
            let i = photon_mutual_info(DecoherenceFactor::from_time(t).unwrap(), 0.1).unwrap();
            assert!(i > last);
            last = i;
        }
    }

    #[test]
    fn redundancy_formula_and_inversion() {
        assert_eq!(photon_redundancy(0.0, 0.1).unwrap(), 0.0);
        let r = photon_redundancy(10.0, 0.1).unwrap();
        assert!((photon_redundancy(20.0, 0.1).unwrap() - 2.0 * r).abs() < 1e-12);
        assert!((r - 10.0 / (0.2 * LN_2).ln().abs()).abs() < 1e-12);
        assert!(photon_redundancy(10.0, 0.5).is_err());
        let inv = photon_redundancy_inverted(10.0, 0.1).unwrap();
        assert!((inv - r).abs() <= 0.15 * inv);
    }

    #[test]
    fn isotropic_illumination_has_no_plateau() {
        let gamma = DecoherenceFactor::from_time(30.0).unwrap();
        for f in [0.1, 0.3, 0.45] {
            assert!(photon_mutual_info_isotropic(gamma, f).unwrap() < 1e-6);
        }
        let hs = two_branch_entropy(gamma.value()).unwrap();
        assert!((photon_mutual_info_isotropic(gamma, 1.0).unwrap() - hs).abs() < 1e-12);
    }

    #[test]
    fn analytic_source_is_exact() {
        let src = PhotonSource { gamma: DecoherenceFactor::from_time(8.0).unwrap(), n: 100, isotropic: false };
        let pip = build_pip(&src, None, 32, 0).unwrap();
        for p in &pip.points {
            assert_eq!(p.samples, 1);
            assert_eq!(p.mean_i, photon_mutual_info(src.gamma, p.f).unwrap());
        }
        // decoherence deficit crossing agrees with direct inversion of the two-branch entropy
        let rd = redundancy_of_decoherence(&src, 0.1, 1, 0).unwrap();
        let hs = src.system_entropy();
        let target = 0.9 * hs;
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if two_branch_entropy(src.gamma.value().powf(mid)).unwrap() < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((rd - 1.0 / lo).abs() < 0.02 * rd, "{rd} vs {}", 1.0 / lo);
    }
}
