use super::MathError;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const SERIES_CUTOVER: f64 = 1.0;
const ASYMPTOTIC_CUTOVER: f64 = 45.0;
const DIRECT_CUTOVER: f64 = 8.0;
const CF_MAX_ITER: usize = 5000;

/// Exponential integral `E1(x) = ∫_x^∞ e^{-t}/t dt` for `x > 0`.
///
/// Power series below `x = 1`, continued fraction above.
pub fn exp_e1(x: f64) -> Result<f64, MathError> {
    check_positive("exp_e1", x)?;
    if x <= SERIES_CUTOVER {
        Ok(e1_series(x))
    } else {
        Ok((-x).exp() * scaled_e1_cf(x))
    }
}

/// Tricomi confluent hypergeometric `U(1,1,x) = e^x E1(x)`.
///
/// Computed without forming `e^x` on the continued-fraction side, so it stays
/// finite for arguments far beyond the overflow point of `exp`.
pub fn tricomi_psi11(x: f64) -> Result<f64, MathError> {
    check_positive("tricomi_psi11", x)?;
    Ok(psi11(x))
}

/// Tricomi `U(2,1,x) = (1+x) e^x E1(x) - 1`, the kernel of the density of
/// a product of an F-ratio with a hypoexponential variable.
///
/// The direct form cancels badly for large `x` (the result decays like
/// `1/x²`), so the large-argument side goes through the asymptotic remainder.
pub fn tricomi_psi21(x: f64) -> Result<f64, MathError> {
    check_positive("tricomi_psi21", x)?;
    if x < DIRECT_CUTOVER {
        Ok((1.0 + x) * psi11(x) - 1.0)
    } else {
        Ok(-1.0 / (x * x) + (1.0 + x) * psi11_remainder(x, 2))
    }
}

/// Remainder of the asymptotic expansion of `U(1,1,x)` after `terms` terms:
/// `U(1,1,x) - Σ_{n<terms} (-1)^n n! / x^{n+1}`.
///
/// Only meaningful for moderately large `x`; used to evaluate combinations
/// such as `1 - x U(1,1,x)` without cancellation.
pub fn tricomi_psi11_remainder(x: f64, terms: usize) -> Result<f64, MathError> {
    check_positive("tricomi_psi11_remainder", x)?;
    Ok(psi11_remainder(x, terms))
}

/// `∫_0^y u e^u E1(u) du` for `y ≥ 0`.
///
/// Equals `y U(1,1,y) - U(1,1,y) - ln y + y - γ`; small `y` uses a power
/// series to avoid the cancellation of the logarithms.
pub fn integrated_psi_moment(y: f64) -> Result<f64, MathError> {
    if !(y >= 0.0) || !y.is_finite() {
        return Err(MathError::Domain { function: "integrated_psi_moment", arg: y });
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    if y <= 1.0 {
        return Ok(psi_moment_series(y));
    }
    let p = psi11(y);
    Ok(y * p - p - y.ln() + y - EULER_GAMMA)
}

fn check_positive(function: &'static str, x: f64) -> Result<(), MathError> {
    if x > 0.0 && !x.is_nan() {
        Ok(())
    } else {
        Err(MathError::Domain { function, arg: x })
    }
}

pub(crate) fn psi11(x: f64) -> f64 {
    if x <= SERIES_CUTOVER {
        x.exp() * e1_series(x)
    } else {
        scaled_e1_cf(x)
    }
}

fn psi11_remainder(x: f64, terms: usize) -> f64 {
    if x >= ASYMPTOTIC_CUTOVER {
        // leading omitted term, then the tail until the terms start growing
        let mut term = 1.0 / x;
        for n in 0..terms {
            term *= -((n + 1) as f64) / x;
        }
        let mut sum = 0.0;
        let mut n = terms;
        loop {
            sum += term;
            let next = -term * ((n + 1) as f64) / x;
            if next.abs() >= term.abs() || next.abs() <= 1e-17 * sum.abs() {
                break;
            }
            term = next;
            n += 1;
        }
        sum
    } else {
        let mut head = 0.0;
        let mut term = 1.0 / x;
        for n in 0..terms {
            head += term;
            term *= -((n + 1) as f64) / x;
        }
        psi11(x) - head
    }
}

/// `-γ - ln x - Σ_{k≥1} (-x)^k / (k·k!)`.
fn e1_series(x: f64) -> f64 {
    let mut sum = 0.0;
    let mut power = 1.0;
    for k in 1..200 {
        power *= -x / k as f64;
        let term = power / k as f64;
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    -EULER_GAMMA - x.ln() - sum
}

/// Modified Lentz evaluation of `e^x E1(x)`.
fn scaled_e1_cf(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..CF_MAX_ITER {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let delta = c * d;
        h *= delta;
        if (delta - 1.0).abs() <= 1e-16 {
            break;
        }
    }
    h
}

fn psi_moment_series(y: f64) -> f64 {
    const N: usize = 40;
    let mut exp_coef = [0.0; N];
    let mut s_coef = [0.0; N];
    exp_coef[0] = 1.0;
    let mut fact = 1.0;
    for k in 1..N {
        exp_coef[k] = exp_coef[k - 1] / k as f64;
        fact *= k as f64;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        s_coef[k] = sign / (k as f64 * fact);
    }
    let log_y = y.ln();
    let mut total = 0.0;
    let mut y_pow = y * y;
    for n in 0..N {
        let q_n: f64 = (1..=n).map(|k| s_coef[k] * exp_coef[n - k]).sum();
        let m = (n + 2) as f64;
        let term = y_pow / m * (exp_coef[n] * (-EULER_GAMMA - log_y + 1.0 / m) - q_n);
        total += term;
        if term.abs() <= 1e-18 * total.abs() && n > 4 {
            break;
        }
        y_pow *= y;
    }
    total
}
