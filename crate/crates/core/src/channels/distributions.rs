use super::ScenarioGeometry;
use crate::mathkernel::{tricomi_psi11, tricomi_psi11_remainder, tricomi_psi21, MathError};

/// Below this argument the repeated-rate product law is evaluated directly.
const DIRECT_CUTOVER: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Density {
    pub pdf: f64,
    pub cdf: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Rates {
    /// `a = q^ε`, `b = r^ε`, `c1 = 1/(1/a - 1/b)`
    Distinct { a: f64, b: f64, c1: f64 },
    /// `q = r`, common rate `a`
    Repeated { a: f64 },
}

impl Rates {
    fn new(geom: &ScenarioGeometry) -> Self {
        let gains = geom.path_gains();
        let a = 1.0 / gains.q;
        if geom.equal_interferer_distances() {
            Rates::Repeated { a }
        } else {
            Rates::Distinct { a, b: 1.0 / gains.r, c1: 1.0 / (gains.q - gains.r) }
        }
    }
}

/// Law of `V3 = q^{-ε}|u|² + r^{-ε}|v|²`: hypoexponential, or Erlang-2 when `q = r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferenceLaw(Rates);

impl InterferenceLaw {
    pub fn new(geom: &ScenarioGeometry) -> Self {
        Self(Rates::new(geom))
    }

    /// Density at `x ≥ 0`.
    pub fn pdf(&self, x: f64) -> f64 {
        match self.0 {
            Rates::Distinct { a, b, c1 } => {
                // factor out the slower exponential so the tail cannot form 0·∞
                let (slow, gap) = (a.min(b), (a - b).abs());
                c1.abs() * (-slow * x).exp() * -(-gap * x).exp_m1()
            }
            Rates::Repeated { a } => a * a * x * (-a * x).exp(),
        }
    }

    /// Distribution function at `x ≥ 0`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x.is_infinite() {
            return 1.0;
        }
        match self.0 {
            Rates::Distinct { a, b, c1 } => c1 * (-(-a * x).exp_m1() / a + (-b * x).exp_m1() / b),
            Rates::Repeated { a } => -(-a * x).exp_m1() - a * x * (-a * x).exp(),
        }
    }

    pub fn mean(&self) -> f64 {
        match self.0 {
            Rates::Distinct { a, b, .. } => 1.0 / a + 1.0 / b,
            Rates::Repeated { a } => 2.0 / a,
        }
    }
}

/// Law of `T = V1·V3` with `V1 = |f|²/|g|²` (equal-mean exponentials).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductLaw(Rates);

impl ProductLaw {
    pub fn new(geom: &ScenarioGeometry) -> Self {
        Self(Rates::new(geom))
    }

    /// Distribution function at `x ≥ 0`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        if x.is_infinite() {
            return 1.0;
        }
        match self.0 {
            Rates::Distinct { a, b, c1 } => c1 * x * (psi11(a * x) - psi11(b * x)),
            Rates::Repeated { a } => {
                let t = a * x;
                if t < DIRECT_CUTOVER {
                    t * (1.0 - t * psi11(t))
                } else {
                    1.0 - t * t * remainder(t, 2)
                }
            }
        }
    }

    /// Density at `x ≥ 0` (finite at the origin).
    pub fn pdf(&self, x: f64) -> f64 {
        if x.is_infinite() {
            return 0.0;
        }
        match self.0 {
            Rates::Distinct { a, b, c1 } => {
                if x == 0.0 {
                    c1 * (b / a).ln()
                } else {
                    c1 * (psi21(a * x) - psi21(b * x))
                }
            }
            Rates::Repeated { a } => {
                let t = a * x;
                if t == 0.0 {
                    a
                } else if t < DIRECT_CUTOVER {
                    a * ((1.0 + t) - t * (2.0 + t) * psi11(t))
                } else {
                    a * (-4.0 / (t * t) - t * (2.0 + t) * remainder(t, 3))
                }
            }
        }
    }

    pub fn density(&self, x: f64) -> Density {
        Density { pdf: self.pdf(x), cdf: self.cdf(x) }
    }
}

// arguments here are strictly positive by construction
fn psi11(t: f64) -> f64 {
    tricomi_psi11(t).expect("positive argument")
}

fn psi21(t: f64) -> f64 {
    tricomi_psi21(t).expect("positive argument")
}

fn remainder(t: f64, terms: usize) -> f64 {
    tricomi_psi11_remainder(t, terms).expect("positive argument")
}

fn check(function: &'static str, x: f64, positive: bool) -> Result<(), MathError> {
    let ok = if positive { x > 0.0 } else { x >= 0.0 };
    if ok {
        Ok(())
    } else {
        Err(MathError::Domain { function, arg: x })
    }
}

/// Law of the ratio of two equal-mean exponentials.
pub fn dist_v1(x: f64) -> Result<Density, MathError> {
    check("dist_v1", x, false)?;
    if x.is_infinite() {
        return Ok(Density { pdf: 0.0, cdf: 1.0 });
    }
    let y = 1.0 + x;
    Ok(Density { pdf: 1.0 / (y * y), cdf: x / y })
}

pub fn dist_v3(x: f64, geom: &ScenarioGeometry) -> Result<Density, MathError> {
    check("dist_v3", x, false)?;
    let law = InterferenceLaw::new(geom);
    Ok(Density { pdf: law.pdf(x), cdf: law.cdf(x) })
}

pub fn dist_t(x: f64, geom: &ScenarioGeometry) -> Result<Density, MathError> {
    check("dist_t", x, true)?;
    Ok(ProductLaw::new(geom).density(x))
}

/// Law of `η·X/Y` with `X` of mean `γ̄` and `Y` of unit mean, both exponential.
pub fn dist_gamma_ratio(x: f64, eta: f64, gamma_bar_lin: f64) -> Result<Density, MathError> {
    check("dist_gamma_ratio", x, false)?;
    check("dist_gamma_ratio (eta)", eta, true)?;
    check("dist_gamma_ratio (gamma_bar)", gamma_bar_lin, true)?;
    let scale = eta * gamma_bar_lin;
    if x.is_infinite() {
        return Ok(Density { pdf: 0.0, cdf: 1.0 });
    }
    let y = x + scale;
    Ok(Density { pdf: scale / (y * y), cdf: x / y })
}
