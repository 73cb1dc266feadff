use std::fmt;

use super::montecarlo::{map_blocks, proportion_halfwidth};
use super::su_bound::SuBoundLaw;
use super::{AnalysisError, MIN_OUTAGE_TRIALS};
use crate::channels::{derive_etas, sample_unit_fading, PowerConfig, ProductLaw, ScenarioGeometry};
use crate::power::SolvedScenario;
use crate::relaying::LinkModel;

/// Default outage threshold (1 bit/s/Hz over two half-duplex slots).
pub const DEFAULT_GAMMA_TH: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Bs,
    Su,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Bs => "bs",
            Side::Su => "su",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageEstimate {
    pub p_out: f64,
    pub ci_halfwidth: f64,
    /// Draws the estimate is taken over.
    pub trials: u64,
    pub gamma_th: f64,
    pub lower_bound: Option<f64>,
    pub upper_bound: Option<f64>,
    /// Draws left out of `trials`: silent or degenerate SU draws on the BS
    /// side, undefined SIRs on either side.
    pub excluded_draws: u64,
    /// Outage fraction over every draw with a defined SIR, silent SU included.
    pub p_out_all_draws: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageBounds {
    pub lower: f64,
    pub upper: f64,
}

/// Order-statistics bounds on the BS1 outage probability, conditioned on SU1
/// transmitting: `1 - (1-F1(γ))(1-F2(γ))` and the same at `2γ`.
pub fn outage_bs_bounds(
    gamma_th: f64,
    geom: &ScenarioGeometry,
    cfg: &PowerConfig,
    lambda: f64,
) -> Result<OutageBounds, AnalysisError> {
    if !(gamma_th >= 0.0) {
        return Err(AnalysisError::InvalidThreshold(gamma_th));
    }
    if !(lambda > 0.0) {
        return Err(AnalysisError::NoTransmission);
    }
    let etas = derive_etas(geom);
    let law = ProductLaw::new(geom);
    let scale1 = etas.eta1 * cfg.gamma_bar_lin();
    let c2 = lambda / (etas.eta4 * cfg.p_lin());
    let at_c2 = law.cdf(c2);
    // survival functions of γ1 and of γ2 given transmission
    let survive = |x: f64| -> f64 {
        if x.is_infinite() {
            return 0.0;
        }
        let s1 = scale1 / (x + scale1);
        let s2 = law.cdf(c2 / (x + 1.0)) / at_c2;
        s1 * s2
    };
    Ok(OutageBounds { lower: 1.0 - survive(gamma_th), upper: 1.0 - survive(2.0 * gamma_th) })
}

#[derive(Default, Clone, Copy)]
struct Tally {
    outage: u64,
    counted: u64,
    excluded: u64,
    outage_all: u64,
    defined: u64,
}

impl Tally {
    fn merge(self, o: Tally) -> Tally {
        Tally {
            outage: self.outage + o.outage,
            counted: self.counted + o.counted,
            excluded: self.excluded + o.excluded,
            outage_all: self.outage_all + o.outage_all,
            defined: self.defined + o.defined,
        }
    }
}

/// Monte-Carlo outage probability at BS1 or SU1.
///
/// BS-side outage is estimated over draws in which SU1 transmits, the event
/// the analytic bounds refer to; the unconditional fraction is reported in
/// `p_out_all_draws`. Infinite SIRs never count as outage.
pub fn outage_mc(
    scenario: &SolvedScenario,
    gamma_th: f64,
    side: Side,
    trials: u64,
    seed: u64,
) -> Result<OutageEstimate, AnalysisError> {
    if trials < MIN_OUTAGE_TRIALS {
        return Err(AnalysisError::TooFewTrials { requested: trials, minimum: MIN_OUTAGE_TRIALS });
    }
    if !(gamma_th >= 0.0) {
        return Err(AnalysisError::InvalidThreshold(gamma_th));
    }
    let link = LinkModel::new(scenario);
    let gamma_bar = scenario.power().gamma_bar_lin();
    let tally = map_blocks(trials, seed, |rng, n| {
        let mut t = Tally::default();
        for _ in 0..n {
            let draw = sample_unit_fading(rng).with_gamma_bar(gamma_bar);
            let Ok(s) = link.sample(&draw) else {
                t.excluded += 1;
                continue;
            };
            let gamma = match side {
                Side::Bs => s.gamma_bs1,
                Side::Su => s.gamma_su1,
            };
            let out = (gamma < gamma_th) as u64;
            t.defined += 1;
            t.outage_all += out;
            if side == Side::Bs && !s.allocation.is_active() {
                t.excluded += 1;
                continue;
            }
            t.counted += 1;
            t.outage += out;
        }
        t
    })
    .into_iter()
    .fold(Tally::default(), Tally::merge);

    if tally.counted == 0 {
        return Err(AnalysisError::NoTransmission);
    }
    let p_out = tally.outage as f64 / tally.counted as f64;
    let (lower_bound, upper_bound) = match side {
        Side::Bs => {
            let b = outage_bs_bounds(gamma_th, scenario.geometry(), scenario.power(), scenario.lambda())?;
            (Some(b.lower), Some(b.upper))
        }
        Side::Su => {
            let lower = if gamma_th > 0.0 {
                SuBoundLaw::new(scenario.geometry(), scenario.power()).cdf(gamma_th)?
            } else {
                0.0
            };
            (Some(lower), None)
        }
    };
    Ok(OutageEstimate {
        p_out,
        ci_halfwidth: proportion_halfwidth(p_out, tally.counted),
        trials: tally.counted,
        gamma_th,
        lower_bound,
        upper_bound,
        excluded_draws: tally.excluded,
        p_out_all_draws: tally.outage_all as f64 / tally.defined as f64,
    })
}
