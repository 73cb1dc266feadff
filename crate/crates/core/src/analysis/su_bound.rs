use crate::channels::{derive_etas, Density, PowerConfig, ScenarioGeometry};
use crate::mathkernel::{gauss_2f1_complement, integrate, MathError, NumericTolerance, Quadrature};

/// Below this `1 - z` the first-order small-`x` expansion is exact to
/// double precision and replaces the hypergeometric form.
const SMALL_GAP: f64 = 1e-20;

/// Closed-form law of `γ3γ4/(γ3+γ4)`, the upper bound of the SU1 SIR, with
/// `γ3`, `γ4` ratio variables of scales `a = η2γ̄` and `b = η3γ̄`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuBoundLaw {
    a: f64,
    b: f64,
}

impl SuBoundLaw {
    pub fn new(geom: &ScenarioGeometry, cfg: &PowerConfig) -> Self {
        let etas = derive_etas(geom);
        let gb = cfg.gamma_bar_lin();
        Self { a: etas.eta2 * gb, b: etas.eta3 * gb }
    }

    pub fn from_scales(a: f64, b: f64) -> Result<Self, MathError> {
        for v in [a, b] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(MathError::Domain { function: "SuBoundLaw (scale)", arg: v });
            }
        }
        Ok(Self { a, b })
    }

    pub fn scales(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    /// `x + a`, `x + b` and `1 - z = x²/((x+a)(x+b))`, the complement of
    /// the hypergeometric argument.
    fn argument(&self, x: f64) -> (f64, f64, f64) {
        let pa = x + self.a;
        let pb = x + self.b;
        (pa, pb, x / pa * (x / pb))
    }

    /// `I1(x) = ∫_x^∞ Pr(γ3 > x t/(t-x)) f_γ4(t) dt` in closed form.
    pub fn tail_integral(&self, x: f64) -> Result<f64, MathError> {
        check(x)?;
        if x.is_infinite() {
            return Ok(0.0);
        }
        let (a, b) = (self.a, self.b);
        let (pa, pb, gap) = self.argument(x);
        if gap < SMALL_GAP {
            return Ok(1.0 - x * (1.0 / a + 1.0 / b));
        }
        let f = gauss_2f1_complement(2, 2, 3, gap)?;
        Ok(a * b * x * x / (2.0 * pa * pa * pb * pb) * f)
    }

    pub fn cdf(&self, x: f64) -> Result<f64, MathError> {
        check(x)?;
        let (_, _, gap) = self.argument(x);
        if gap < SMALL_GAP {
            return Ok(x * (1.0 / self.a + 1.0 / self.b));
        }
        Ok(1.0 - self.tail_integral(x)?)
    }

    pub fn pdf(&self, x: f64) -> Result<f64, MathError> {
        check(x)?;
        if x.is_infinite() {
            return Ok(0.0);
        }
        let (a, b) = (self.a, self.b);
        let (pa, pb, gap) = self.argument(x);
        if gap < SMALL_GAP {
            return Ok(1.0 / a + 1.0 / b);
        }
        let f2 = gauss_2f1_complement(2, 2, 3, gap)?;
        let f3 = gauss_2f1_complement(3, 3, 4, gap)?;
        let (pa3, pb3) = (pa * pa * pa, pb * pb * pb);
        let first = a * b * x * (x * x - a * b) / (pa3 * pb3) * f2;
        let second = 2.0 * a * b * x * x * x * (x * (a + b) + 2.0 * a * b) / (3.0 * pa3 * pa * pb3 * pb) * f3;
        Ok(first + second)
    }

    pub fn density(&self, x: f64) -> Result<Density, MathError> {
        Ok(Density { pdf: self.pdf(x)?, cdf: self.cdf(x)? })
    }
}

fn check(x: f64) -> Result<(), MathError> {
    if x > 0.0 {
        Ok(())
    } else {
        Err(MathError::Domain { function: "dist_su_upper", arg: x })
    }
}

pub fn dist_su_upper(x: f64, geom: &ScenarioGeometry, cfg: &PowerConfig) -> Result<Density, MathError> {
    SuBoundLaw::new(geom, cfg).density(x)
}

/// The defining integral of the SU tail term, by quadrature over `t ∈ (x, ∞)`.
pub fn su_tail_integral_quadrature(law: &SuBoundLaw, x: f64, tol: &NumericTolerance) -> Result<Quadrature, MathError> {
    check(x)?;
    let (a, b) = law.scales();
    integrate(
        |t| {
            if t <= x {
                return 0.0;
            }
            let threshold = x * t / (t - x);
            a / (threshold + a) * b / ((t + b) * (t + b))
        },
        x,
        f64::INFINITY,
        tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn law() -> SuBoundLaw {
        SuBoundLaw::from_scales(6.5536 * 100.0, 0.32871 * 100.0).unwrap()
    }

    #[test]
    fn limits() {
        let l = law();
        assert!(l.cdf(1e-9).unwrap() < 1e-9);
        assert!(l.cdf(1e-3).unwrap() < 1e-4);
        assert!((l.cdf(1e9).unwrap() - 1.0).abs() < 1e-12);
        assert!(l.cdf(0.0).is_err());
        assert!(l.pdf(-1.0).is_err());
    }

    #[test]
    fn small_argument_branch_is_continuous() {
        let l = law();
        let (a, b) = l.scales();
        // just above and below the switch to the expansion
        let x_switch = (SMALL_GAP * a * b).sqrt();
        let lo = l.pdf(x_switch * 0.9).unwrap();
        let hi = l.pdf(x_switch * 1.1).unwrap();
        assert!((lo / hi - 1.0).abs() < 1e-3, "{lo} vs {hi}");
    }

    #[test]
    fn pdf_is_derivative_of_cdf() {
        let l = law();
        for i in 0..40 {
            let x = 10f64.powf(-1.0 + i as f64 * 0.1);
            let h = x * 1e-5;
            let fd = (l.cdf(x + h).unwrap() - l.cdf(x - h).unwrap()) / (2.0 * h);
            let p = l.pdf(x).unwrap();
            assert!((fd / p - 1.0).abs() < 1e-6, "x={x}: {fd} vs {p}");
        }
    }

    #[test]
    fn tail_closed_form_matches_quadrature() {
        let l = law();
        let tol = NumericTolerance::new(1e-12, 0.0, 4000).unwrap();
        for &x in &[0.5, 3.0, 30.0, 300.0] {
            let q = su_tail_integral_quadrature(&l, x, &tol).unwrap();
            let c = l.tail_integral(x).unwrap();
            assert!((q.value - c).abs() < 1e-10 * c.max(1e-300) + 1e-14, "x={x}: {} vs {c}", q.value);
        }
    }
}
