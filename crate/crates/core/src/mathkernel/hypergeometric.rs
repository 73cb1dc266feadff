use super::expint::EULER_GAMMA;
use super::MathError;

const SERIES_MAX_TERMS: usize = 500;

/// Gauss hypergeometric function `₂F₁(a, b; c; z)` for small integer
/// parameters (`a, b ≥ 1`, `c ≥ 1`) and real `z < 1`.
///
/// The raw Gauss series is used on `|z| ≤ 1/2`. On `(1/2, 1)` the function is
/// expanded around `z = 1`; since `c - a - b` is an integer the expansion is
/// the degenerate one carrying `ln(1 - z)` and, for `c < a + b`, the pole
/// `(1 - z)^{a+b-c}`. Negative `z` is first mapped into `(0, 1)` with the
/// Pfaff transformation.
pub fn gauss_2f1(a: u32, b: u32, c: u32, z: f64) -> Result<f64, MathError> {
    if c == 0 {
        return Err(MathError::Domain { function: "gauss_2f1 (c)", arg: 0.0 });
    }
    if !(z < 1.0) {
        return Err(MathError::Domain { function: "gauss_2f1 (z)", arg: z });
    }
    if a == 0 || b == 0 {
        return Ok(1.0);
    }
    Ok(hyp2f1(a as i64, b as i64, c as i64, z))
}

/// `₂F₁(a, b; c; 1 - w)` for `w > 0`, with the complement `w` supplied
/// directly. Near `z = 1` the function depends on `1 - z` through a pole and
/// a logarithm, so forming `z` first would throw away the relative accuracy
/// of a small `w`.
pub fn gauss_2f1_complement(a: u32, b: u32, c: u32, w: f64) -> Result<f64, MathError> {
    if c == 0 {
        return Err(MathError::Domain { function: "gauss_2f1_complement (c)", arg: 0.0 });
    }
    if !(w > 0.0) {
        return Err(MathError::Domain { function: "gauss_2f1_complement (w)", arg: w });
    }
    if a == 0 || b == 0 {
        return Ok(1.0);
    }
    if w >= 0.5 {
        return Ok(hyp2f1(a as i64, b as i64, c as i64, 1.0 - w));
    }
    let (a, b, c) = (a as i64, b as i64, c as i64);
    let m = c - a - b;
    Ok(if m >= 0 {
        near_one_nonnegative_gap(a, b, m as usize, w)
    } else {
        near_one_negative_gap(a, b, (-m) as usize, w)
    })
}

fn hyp2f1(a: i64, b: i64, c: i64, z: f64) -> f64 {
    if a <= 0 || b <= 0 {
        return terminating_series(a, b, c, z);
    }
    if z < 0.0 {
        // Pfaff: F(a,b;c;z) = (1-z)^{-a} F(a, c-b; c; z/(z-1))
        let w = z / (z - 1.0);
        return (1.0 - z).powi(-(a as i32)) * hyp2f1(a, c - b, c, w);
    }
    if z <= 0.5 {
        return gauss_series(a, b, c, z);
    }
    let m = c - a - b;
    if m >= 0 {
        near_one_nonnegative_gap(a, b, m as usize, 1.0 - z)
    } else {
        near_one_negative_gap(a, b, (-m) as usize, 1.0 - z)
    }
}

fn gauss_series(a: i64, b: i64, c: i64, z: f64) -> f64 {
    let (a, b, c) = (a as f64, b as f64, c as f64);
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 0..SERIES_MAX_TERMS {
        let n = n as f64;
        term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z;
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// `a` or `b` a nonpositive integer: the series is a polynomial.
fn terminating_series(a: i64, b: i64, c: i64, z: f64) -> f64 {
    let degree = (-a.min(b)) as usize;
    let (a, b, c) = (a as f64, b as f64, c as f64);
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 0..degree {
        let n = n as f64;
        term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z;
        sum += term;
    }
    sum
}

/// `c = a + b + m`, `m ≥ 0`, expansion in powers of `w = 1 - z`.
fn near_one_nonnegative_gap(a: i64, b: i64, m: usize, w: f64) -> f64 {
    let log_w = w.ln();
    let mi = m as i64;
    let (af, bf) = (a as f64, b as f64);

    let mut finite = 0.0;
    if m > 0 {
        // Σ_{n<m} (a)_n (b)_n / (n! (1-m)_n) w^n
        let mut term = 1.0;
        for n in 0..m {
            finite += term;
            let nf = n as f64;
            term *= (af + nf) * (bf + nf) / ((nf + 1.0) * (1.0 - m as f64 + nf)) * w;
        }
        finite *= factorial(m - 1) * factorial((a + b + mi - 1) as usize)
            / (factorial((a + mi - 1) as usize) * factorial((b + mi - 1) as usize));
    }

    // Σ_n (a+m)_n (b+m)_n / (n! (n+m)!) w^n [ψ terms]
    let mut coef = 1.0 / factorial(m);
    let mut w_pow = 1.0;
    let mut tail = 0.0;
    for n in 0..SERIES_MAX_TERMS {
        let ni = n as i64;
        let bracket = if m == 0 {
            2.0 * digamma_int(ni + 1) - digamma_int(a + ni) - digamma_int(b + ni) - log_w
        } else {
            log_w - digamma_int(ni + 1) - digamma_int(ni + mi + 1) + digamma_int(a + ni + mi) + digamma_int(b + ni + mi)
        };
        let term = coef * w_pow * bracket;
        tail += term;
        if n > 2 && term.abs() <= 1e-17 * tail.abs() {
            break;
        }
        let nf = n as f64;
        coef *= (af + m as f64 + nf) * (bf + m as f64 + nf) / ((nf + 1.0) * (nf + m as f64 + 1.0));
        w_pow *= w;
    }
    let gamma_ratio =
        factorial((a + b + mi - 1) as usize) / (factorial((a - 1) as usize) * factorial((b - 1) as usize));
    if m == 0 {
        gamma_ratio * tail
    } else {
        finite - (-w).powi(m as i32) * gamma_ratio * tail
    }
}

/// `c = a + b - m`, `m ≥ 1`: pole of order `m` at `w = 1 - z = 0` plus logarithmic tail.
fn near_one_negative_gap(a: i64, b: i64, m: usize, w: f64) -> f64 {
    let log_w = w.ln();
    let mi = m as i64;
    let (af, bf) = (a as f64, b as f64);
    let c = a + b - mi;

    // Γ(m)Γ(c)/(Γ(a)Γ(b)) w^{-m} Σ_{n<m} (a-m)_n (b-m)_n / (n! (1-m)_n) w^n
    let mut poly = 0.0;
    let mut term = 1.0;
    for n in 0..m {
        poly += term;
        let nf = n as f64;
        term *= (af - m as f64 + nf) * (bf - m as f64 + nf) / ((nf + 1.0) * (1.0 - m as f64 + nf)) * w;
    }
    let pole = factorial(m - 1) * factorial((c - 1) as usize)
        / (factorial((a - 1) as usize) * factorial((b - 1) as usize))
        * w.powi(-(m as i32))
        * poly;

    // 1/Γ(a-m) or 1/Γ(b-m) vanishes when the argument is a nonpositive integer
    if a - mi <= 0 || b - mi <= 0 {
        return pole;
    }
    let mut coef = 1.0 / factorial(m);
    let mut w_pow = 1.0;
    let mut tail = 0.0;
    for n in 0..SERIES_MAX_TERMS {
        let ni = n as i64;
        let bracket =
            log_w - digamma_int(ni + 1) - digamma_int(ni + mi + 1) + digamma_int(a + ni) + digamma_int(b + ni);
        let term = coef * w_pow * bracket;
        tail += term;
        if n > 2 && term.abs() <= 1e-17 * tail.abs() {
            break;
        }
        let nf = n as f64;
        coef *= (af + nf) * (bf + nf) / ((nf + 1.0) * (nf + m as f64 + 1.0));
        w_pow *= w;
    }
    let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    let gamma_ratio =
        factorial((c - 1) as usize) / (factorial((a - mi - 1) as usize) * factorial((b - mi - 1) as usize));
    pole - sign * gamma_ratio * tail
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// ψ(n) for a positive integer: `-γ + Σ_{k<n} 1/k`.
fn digamma_int(n: i64) -> f64 {
    debug_assert!(n >= 1);
    -EULER_GAMMA + (1..n).map(|k| 1.0 / k as f64).sum::<f64>()
}
