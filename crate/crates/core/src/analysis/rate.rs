use std::fmt;

use super::montecarlo::map_blocks;
use super::{AnalysisError, MIN_RATE_TRIALS};
use crate::channels::sample_unit_fading;
use crate::power::{fixed_power, SolvedScenario};
use crate::relaying::{combine_bs, LinkModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    /// Water-filling power under the average interference constraint.
    Optimal,
    /// Constant power meeting the same constraint on average.
    Fixed,
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Policy::Optimal => "optimal",
            Policy::Fixed => "fixed",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEstimate {
    /// `E[log2(1 + γ2)]`, the SU → relay rate the power rule maximizes.
    pub rate_bps_hz: f64,
    /// `E[½ log2(1 + γ_bs1)]`, the end-to-end half-duplex rate at BS1.
    pub rate_endtoend: f64,
    /// 95% half-width of `rate_bps_hz`.
    pub ci_halfwidth: f64,
    pub trials: u64,
    pub policy: Policy,
    pub sir_db: f64,
}

#[derive(Default, Clone, Copy)]
struct Sums {
    rate: f64,
    rate_sq: f64,
    endtoend: f64,
    n: u64,
}

/// Mean rates over `trials` draws at each average SIR in `sir_grid_db`.
/// The same seed is used at every grid point.
pub fn rate_curve(
    scenario: &SolvedScenario,
    policy: Policy,
    sir_grid_db: &[f64],
    trials: u64,
    seed: u64,
) -> Result<Vec<RateEstimate>, AnalysisError> {
    if trials < MIN_RATE_TRIALS {
        return Err(AnalysisError::TooFewTrials { requested: trials, minimum: MIN_RATE_TRIALS });
    }
    sir_grid_db.iter().map(|&db| rate_point(&scenario.at_gamma_bar(db), policy, trials, seed)).collect()
}

fn rate_point(
    scenario: &SolvedScenario,
    policy: Policy,
    trials: u64,
    seed: u64,
) -> Result<RateEstimate, AnalysisError> {
    let link = LinkModel::new(scenario);
    let gains = scenario.geometry().path_gains();
    let etas = *scenario.etas();
    let p_lin = scenario.power().p_lin();
    let gamma_bar = scenario.power().gamma_bar_lin();
    let p_fixed = fixed_power(scenario.power(), scenario.geometry());

    let sums = map_blocks(trials, seed, |rng, n| {
        let mut s = Sums::default();
        for _ in 0..n {
            let draw = sample_unit_fading(rng).with_gamma_bar(gamma_bar);
            let p_su1 = match policy {
                Policy::Optimal => link.allocator().allocate(&draw).power(),
                Policy::Fixed => p_fixed,
            };
            let gamma2 = if p_su1 > 0.0 { p_su1 * gains.l * draw.g2 / (p_lin * draw.v3(&gains)) } else { 0.0 };
            let gamma1 = etas.eta1 * draw.h2 / draw.u2;
            let r = gamma2.ln_1p() / std::f64::consts::LN_2;
            s.rate += r;
            s.rate_sq += r * r;
            s.endtoend += 0.5 * combine_bs(gamma1, gamma2).ln_1p() / std::f64::consts::LN_2;
            s.n += 1;
        }
        s
    })
    .into_iter()
    .fold(Sums::default(), |a, b| Sums {
        rate: a.rate + b.rate,
        rate_sq: a.rate_sq + b.rate_sq,
        endtoend: a.endtoend + b.endtoend,
        n: a.n + b.n,
    });

    let n = sums.n as f64;
    let mean = sums.rate / n;
    let var = (sums.rate_sq / n - mean * mean).max(0.0);
    Ok(RateEstimate {
        rate_bps_hz: mean,
        rate_endtoend: sums.endtoend / n,
        ci_halfwidth: 1.96 * (var / n).sqrt(),
        trials: sums.n,
        policy,
        sir_db: scenario.power().gamma_bar_db,
    })
}
