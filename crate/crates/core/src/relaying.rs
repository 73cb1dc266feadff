//! Per-draw two-way amplify-and-forward relaying: relay gain, SIR
//! components, end-to-end SIRs at BS1 and SU1, and a symbol-level simulation
//! of the exchange used to validate the SIR algebra.

use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;
use rand::Rng;

use crate::channels::{derive_etas, DerivedEtas, FadingRealization, PathGains, PowerConfig, ScenarioGeometry};
use crate::power::{Allocation, PowerAllocator, SolvedScenario};

/// Interference power below this fraction of the desired power reads as zero.
const ZERO_INTERFERENCE: f64 = 1e-20;
pub const MIN_ORACLE_SYMBOLS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub enum RelayError {
    /// Nothing reaches the relay, so its gain is unbounded.
    NoRelayInput,
    /// An end-to-end SIR is 0/0 or ∞/∞ for this draw.
    UndefinedSir,
    TooFewSymbols(usize),
}

impl fmt::Display for RelayError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NoRelayInput => write!(f, "all power terms at the relay are zero"),
            Self::UndefinedSir => write!(f, "end-to-end SIR undefined for this draw"),
            Self::TooFewSymbols(n) => write!(f, "{n} symbols requested, at least {MIN_ORACLE_SYMBOLS} needed"),
        }
    }
}

impl std::error::Error for RelayError {}

/// SIR quantities for one fading draw. Infinite values are a sentinel for
/// interference-free links.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SirSample {
    /// relay → BS1 against PU4 → BS1
    pub gamma1: f64,
    /// SU1 → relay against PU4 → relay and BS1
    pub gamma2: f64,
    /// relay → SU1 against PU4 → SU1
    pub gamma3: f64,
    /// BS1 → relay against PU4 → relay
    pub gamma4: f64,
    /// everything the relay forwards to SU1 against PU4 → relay
    pub gamma5: f64,
    pub gamma_bs1: f64,
    pub gamma_su1: f64,
    pub gamma_su1_upper: f64,
    pub p_su1: f64,
    pub allocation: Allocation,
    pub beta: f64,
}

/// `γ1γ2/(γ1+γ2)` as `min·(max/(min+max))`, which keeps the result inside
/// `[min/2, min]` in floating point.
pub fn combine_bs(gamma1: f64, gamma2: f64) -> f64 {
    let (lo, hi) = if gamma1 <= gamma2 { (gamma1, gamma2) } else { (gamma2, gamma1) };
    if lo == 0.0 {
        0.0
    } else if hi.is_infinite() {
        lo
    } else {
        lo * (hi / (lo + hi))
    }
}

/// `γ1γ2/(γ1+γ2+1)` as the SIR times `(γ1+γ2)/(γ1+γ2+1)`.
pub fn sinr_from_components(gamma1: f64, gamma2: f64) -> f64 {
    let sir = combine_bs(gamma1, gamma2);
    let sum = gamma1 + gamma2;
    if sum.is_infinite() {
        sir
    } else {
        sir * (sum / (sum + 1.0))
    }
}

pub fn relay_gain(
    draw: &FadingRealization,
    geom: &ScenarioGeometry,
    p_lin: f64,
    p_su1: f64,
) -> Result<f64, RelayError> {
    let total = relay_input(draw, &geom.path_gains(), p_lin, p_su1);
    if total > 0.0 {
        Ok(1.0 / total.sqrt())
    } else {
        Err(RelayError::NoRelayInput)
    }
}

/// Relay gain that also normalizes the receiver noise.
pub fn relay_gain_noisy(draw: &FadingRealization, geom: &ScenarioGeometry, p_lin: f64, p_su1: f64, sigma2: f64) -> f64 {
    1.0 / (relay_input(draw, &geom.path_gains(), p_lin, p_su1) + sigma2).sqrt()
}

fn relay_input(draw: &FadingRealization, gains: &PathGains, p_lin: f64, p_su1: f64) -> f64 {
    p_lin * gains.s * draw.h2 + p_su1 * gains.l * draw.g2 + p_lin * gains.r * draw.v2
}

/// Scenario constants needed per draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkModel {
    gains: PathGains,
    etas: DerivedEtas,
    p_lin: f64,
    c2: f64,
    allocator: PowerAllocator,
}

impl LinkModel {
    pub fn new(scenario: &SolvedScenario) -> Self {
        Self::from_parts(scenario.geometry(), scenario.power(), scenario.lambda())
    }

    pub fn from_parts(geom: &ScenarioGeometry, cfg: &PowerConfig, lambda: f64) -> Self {
        let etas = derive_etas(geom);
        let p_lin = cfg.p_lin();
        Self {
            gains: geom.path_gains(),
            etas,
            p_lin,
            c2: lambda / (etas.eta4 * p_lin),
            allocator: PowerAllocator::new(lambda, geom, cfg),
        }
    }

    pub fn allocator(&self) -> &PowerAllocator {
        &self.allocator
    }

    pub fn sample(&self, draw: &FadingRealization) -> Result<SirSample, RelayError> {
        let allocation = self.allocator.allocate(draw);
        let p_su1 = allocation.power();
        let g = &self.gains;
        let total = relay_input(draw, g, self.p_lin, p_su1);
        if !(total > 0.0) {
            return Err(RelayError::NoRelayInput);
        }
        let beta = 1.0 / total.sqrt();

        let su_at_relay = p_su1 * g.l * draw.g2;
        let gamma1 = self.etas.eta1 * draw.h2 / draw.u2;
        let gamma2 = if p_su1 > 0.0 { su_at_relay / (self.p_lin * draw.v3(g)) } else { 0.0 };
        let gamma3 = self.etas.eta2 * draw.g2 / draw.w2;
        let gamma4 = self.etas.eta3 * draw.h2 / draw.v2;
        let gamma5 = if p_su1 > 0.0 { gamma4 + su_at_relay / (self.p_lin * g.r * draw.v2) } else { gamma4 };
        // γ5/γ4 without the PU4 → relay gain, ≥ 1 exactly
        let boost = if p_su1 > 0.0 { 1.0 + su_at_relay / (self.p_lin * g.s * draw.h2) } else { 1.0 };

        let gamma_su1 = su_combine(gamma3, gamma4, boost);
        let gamma_su1_upper = su_combine(gamma3, gamma4, 1.0);
        if gamma_su1.is_nan() || gamma_su1_upper.is_nan() || gamma1.is_nan() || gamma2.is_nan() {
            return Err(RelayError::UndefinedSir);
        }
        Ok(SirSample {
            gamma1,
            gamma2,
            gamma3,
            gamma4,
            gamma5,
            gamma_bs1: combine_bs(gamma1, gamma2),
            gamma_su1,
            gamma_su1_upper,
            p_su1,
            allocation,
            beta,
        })
    }

    /// `γ2` through `T = V1·V3`: `max(0, c2/T - 1)`.
    pub fn gamma2_via_t(&self, draw: &FadingRealization) -> f64 {
        let t = draw.v1() * draw.v3(&self.gains);
        (self.c2 / t - 1.0).max(0.0)
    }

    /// BS1 SINR including the noise term of the noisy relay gain.
    pub fn sinr_bs(&self, draw: &FadingRealization) -> Result<f64, RelayError> {
        let s = self.sample(draw)?;
        Ok(sinr_from_components(s.gamma1, s.gamma2))
    }
}

/// `γ3γ4/(γ3 + boost·γ4)` as `1/(1/γ4 + boost/γ3)`.
fn su_combine(gamma3: f64, gamma4: f64, boost: f64) -> f64 {
    1.0 / (1.0 / gamma4 + boost / gamma3)
}

pub fn sir_sample(
    draw: &FadingRealization,
    geom: &ScenarioGeometry,
    cfg: &PowerConfig,
    lambda: f64,
) -> Result<SirSample, RelayError> {
    LinkModel::from_parts(geom, cfg, lambda).sample(draw)
}

pub fn sinr_bs(
    draw: &FadingRealization,
    geom: &ScenarioGeometry,
    cfg: &PowerConfig,
    lambda: f64,
) -> Result<f64, RelayError> {
    LinkModel::from_parts(geom, cfg, lambda).sinr_bs(draw)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelfInterference {
    Cancelled,
    Retained,
}

/// Measured SIRs from the symbol-level simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalSir {
    pub bs: f64,
    pub su: f64,
}

/// Simulates one two-way exchange symbol by symbol for a fixed fading draw.
///
/// Unit-modulus random-phase symbols: `x1` from BS1, `x2` from SU1, and
/// independent PU4 symbols in the multiple-access and broadcast slots.
/// Channel phases are drawn once. No noise. Each received sample is split
/// into the component carried by the wanted symbol and everything else; the
/// ratio of their empirical powers is the measured SIR.
pub fn symbol_level_oracle<R: Rng + ?Sized>(
    rng: &mut R,
    draw: &FadingRealization,
    geom: &ScenarioGeometry,
    cfg: &PowerConfig,
    lambda: f64,
    n_symbols: usize,
    self_interference: SelfInterference,
) -> Result<EmpiricalSir, RelayError> {
    if n_symbols < MIN_ORACLE_SYMBOLS {
        return Err(RelayError::TooFewSymbols(n_symbols));
    }
    let gains = geom.path_gains();
    let p = cfg.p_lin();
    let p_su1 = PowerAllocator::new(lambda, geom, cfg).allocate(draw).power();
    let beta = relay_gain(draw, geom, p, p_su1)?;

    let phase = |r: &mut R| Complex64::from_polar(1.0, r.random::<f64>() * TAU);
    let channel = |r: &mut R, power: f64, path: f64| (power * path).sqrt() * phase(r);
    let h = channel(rng, draw.h2, gains.s);
    let g = channel(rng, draw.g2, gains.l);
    let v = channel(rng, draw.v2, gains.r);
    let u = channel(rng, draw.u2, gains.q);
    let w = channel(rng, draw.w2, gains.z);
    let (sp, sq) = (p.sqrt(), p_su1.sqrt());
    let forward = sp * beta;

    let mut bs = PowerMeter::default();
    let mut su = PowerMeter::default();
    for _ in 0..n_symbols {
        let x1 = phase(rng);
        let x2 = phase(rng);
        let x3_mac = phase(rng);
        let x3_bc = phase(rng);
        let relay = sp * h * x1 + sq * g * x2 + sp * v * x3_mac;
        let mut at_bs = forward * h * relay + sp * u * x3_bc;
        let mut at_su = forward * g * relay + sp * w * x3_bc;
        if self_interference == SelfInterference::Cancelled {
            at_bs -= forward * h * sp * h * x1;
            at_su -= forward * g * sq * g * x2;
        }
        // by superposition, the part of each sample carried by the wanted symbol
        bs.push(at_bs, forward * h * sq * g * x2);
        su.push(at_su, forward * g * sp * h * x1);
    }
    Ok(EmpiricalSir { bs: bs.sir(), su: su.sir() })
}

#[derive(Default)]
struct PowerMeter {
    desired: f64,
    rest: f64,
}

impl PowerMeter {
    fn push(&mut self, received: Complex64, wanted: Complex64) {
        self.desired += wanted.norm_sqr();
        self.rest += (received - wanted).norm_sqr();
    }

    fn sir(&self) -> f64 {
        if self.rest <= ZERO_INTERFERENCE * self.desired {
            f64::INFINITY
        } else {
            self.desired / self.rest
        }
    }
}
