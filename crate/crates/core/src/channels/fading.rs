use rand::Rng;
use rand_distr::Exp1;

use super::PathGains;

/// Power levels of a scenario, all in dB relative to the noise variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerConfig {
    /// Co-channel interference level; also the transmit power of BS1 and PU1.
    pub p_cci_db: f64,
    /// Average interference tolerated at BS2.
    pub w_db: f64,
    /// Average SIR folded into the desired-link fading means.
    pub gamma_bar_db: f64,
    pub sigma2: f64,
}

impl PowerConfig {
    pub fn new(p_cci_db: f64, w_db: f64, gamma_bar_db: f64) -> Self {
        Self { p_cci_db, w_db, gamma_bar_db, sigma2: 1.0 }
    }

    pub fn p_lin(&self) -> f64 {
        db_to_lin(self.p_cci_db)
    }

    pub fn w_lin(&self) -> f64 {
        db_to_lin(self.w_db)
    }

    pub fn gamma_bar_lin(&self) -> f64 {
        db_to_lin(self.gamma_bar_db)
    }

    pub fn with_gamma_bar_db(self, gamma_bar_db: f64) -> Self {
        Self { gamma_bar_db, ..self }
    }
}

fn db_to_lin(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// One block-fading draw of the six channel power gains.
///
/// `h2`, `g2`, `f2` have mean `γ̄`, `u2`, `v2`, `w2` mean one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingRealization {
    /// BS1–PU1
    pub h2: f64,
    /// SU1–PU1
    pub g2: f64,
    /// PU4–BS1
    pub u2: f64,
    /// PU4–PU1
    pub v2: f64,
    /// PU4–SU1
    pub w2: f64,
    /// SU1–BS2
    pub f2: f64,
}

impl FadingRealization {
    /// Scales the desired-link gains by `gamma_bar_lin`.
    pub fn with_gamma_bar(self, gamma_bar_lin: f64) -> Self {
        Self { h2: self.h2 * gamma_bar_lin, g2: self.g2 * gamma_bar_lin, f2: self.f2 * gamma_bar_lin, ..self }
    }

    /// `V1 = |f|²/|g|²`.
    pub fn v1(&self) -> f64 {
        self.f2 / self.g2
    }

    /// `V3 = q^{-ε}|u|² + r^{-ε}|v|²`, the interference collected at BS1 and the relay.
    pub fn v3(&self, gains: &PathGains) -> f64 {
        gains.q * self.u2 + gains.r * self.v2
    }
}

/// Draws six independent unit-mean exponentials in the order h, g, u, v, w, f.
pub fn sample_unit_fading<R: Rng + ?Sized>(rng: &mut R) -> FadingRealization {
    let mut e = || -> f64 { rng.sample(Exp1) };
    FadingRealization { h2: e(), g2: e(), u2: e(), v2: e(), w2: e(), f2: e() }
}

pub fn sample_fading<R: Rng + ?Sized>(rng: &mut R, cfg: &PowerConfig) -> FadingRealization {
    sample_unit_fading(rng).with_gamma_bar(cfg.gamma_bar_lin())
}
