use super::{MathError, NumericTolerance};

/// Where geometric bracketing starts and how far it may go.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootSearch {
    pub initial: f64,
    pub ceiling: f64,
}

impl Default for RootSearch {
    fn default() -> Self {
        Self { initial: 1.0, ceiling: 1e15 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    /// `g(x) - target`
    pub residual: f64,
    pub evaluations: usize,
}

/// Solves `g(x) = target` for continuous nondecreasing `g` on `[0, ∞)` with
/// `g(0) ≤ target`, using the default search window.
pub fn solve_root_monotone<G>(mut g: G, target: f64, tol: &NumericTolerance) -> Result<Root, MathError>
where
    G: FnMut(f64) -> f64,
{
    try_solve_root_monotone(|x| Ok::<f64, MathError>(g(x)), target, tol, RootSearch::default())
}

/// Fallible variant: `g` may fail (e.g. an inner quadrature), which aborts the search.
///
/// The upper end of the bracket is found by doubling from `search.initial`
/// until `g` reaches the target; bisection then runs until
/// `|g(x) - target| ≤ max(abs_tol, rel_tol·|target|)`.
pub fn try_solve_root_monotone<G, E>(
    mut g: G,
    target: f64,
    tol: &NumericTolerance,
    search: RootSearch,
) -> Result<Root, E>
where
    G: FnMut(f64) -> Result<f64, E>,
    E: From<MathError>,
{
    let threshold = match tol.threshold(target) {
        t if t > 0.0 => t,
        _ => tol.rel_tol(),
    };
    let mut evaluations = 1;
    let at_zero = g(0.0)?;
    if at_zero > target {
        return Err(MathError::TargetBelowFloor { target, value_at_zero: at_zero }.into());
    }
    if (at_zero - target).abs() <= threshold {
        return Ok(Root { x: 0.0, residual: at_zero - target, evaluations });
    }

    let mut lo = 0.0;
    let mut hi = search.initial.max(f64::MIN_POSITIVE);
    loop {
        let value = g(hi)?;
        evaluations += 1;
        if (value - target).abs() <= threshold {
            return Ok(Root { x: hi, residual: value - target, evaluations });
        }
        if value > target {
            break;
        }
        if hi >= search.ceiling {
            return Err(MathError::NoBracket { target, ceiling: search.ceiling, value_at_ceiling: value }.into());
        }
        lo = hi;
        hi = (2.0 * hi).min(search.ceiling);
    }

    let mut best = Root { x: hi, residual: f64::INFINITY, evaluations };
    for _ in 0..tol.max_iter() {
        let mid = 0.5 * (lo + hi);
        let value = g(mid)?;
        evaluations += 1;
        let residual = value - target;
        if residual.abs() < best.residual.abs() {
            best = Root { x: mid, residual, evaluations };
        }
        if residual.abs() <= threshold {
            return Ok(Root { x: mid, residual, evaluations });
        }
        if residual < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if !(lo < 0.5 * (lo + hi) && 0.5 * (lo + hi) < hi) {
            break;
        }
    }
    Err(MathError::RootNotConverged { best: best.x, residual: best.residual, iterations: evaluations }.into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity() {
        let root = solve_root_monotone(|x| x, 5.0, &NumericTolerance::ROOT).unwrap();
        assert!((root.x - 5.0).abs() <= 1e-10 * 5.0);
    }

    #[test]
    fn target_below_floor_is_rejected() {
        let err = solve_root_monotone(|x| x + 1.0, 0.5, &NumericTolerance::ROOT).unwrap_err();
        assert!(matches!(err, MathError::TargetBelowFloor { .. }));
    }

    #[test]
    fn missing_bracket_reports_ceiling() {
        let search = RootSearch { initial: 1.0, ceiling: 64.0 };
        let err =
            try_solve_root_monotone(|x: f64| Ok::<_, MathError>(x.min(10.0)), 20.0, &NumericTolerance::ROOT, search)
                .unwrap_err();
        assert_eq!(err, MathError::NoBracket { target: 20.0, ceiling: 64.0, value_at_ceiling: 10.0 });
    }

    #[test]
    fn expected_shortfall_of_samples() {
        // g(x) = E[(x - T)+] over a fixed sample, target 2
        let samples: Vec<f64> = (1..=1000).map(|i| (i as f64 / 1001.0).powi(2) * 7.0).collect();
        let g = |x: f64| samples.iter().map(|&t| (x - t).max(0.0)).sum::<f64>() / samples.len() as f64;
        let root = solve_root_monotone(g, 2.0, &NumericTolerance::ROOT).unwrap();
        assert!((g(root.x) - 2.0).abs() <= 1e-10 * 2.0);
    }

    #[test]
    fn errors_from_g_propagate() {
        let err = try_solve_root_monotone(
            |_x: f64| Err::<f64, MathError>(MathError::NonFiniteIntegrand { at: 1.0 }),
            1.0,
            &NumericTolerance::ROOT,
            RootSearch::default(),
        )
        .unwrap_err();
        assert_eq!(err, MathError::NonFiniteIntegrand { at: 1.0 });
    }

    // random monotone piecewise-linear functions through (0, 0)
    fn piecewise_linear() -> impl Strategy<Value = Vec<(f64, f64)>> {
        prop::collection::vec((0.01f64..3.0, 0.0f64..4.0), 2..12).prop_map(|steps| {
            let mut knots = vec![(0.0, 0.0)];
            let (mut x, mut y) = (0.0, 0.0);
            for (dx, slope) in steps {
                x += dx;
                y += slope * dx;
                knots.push((x, y));
            }
            knots
        })
    }

    fn eval_pl(knots: &[(f64, f64)], x: f64) -> f64 {
        for w in knots.windows(2) {
            let ((x0, y0), (x1, y1)) = (w[0], w[1]);
            if x <= x1 {
                return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
            }
        }
        // extend with unit slope past the last knot
        let (xl, yl) = *knots.last().unwrap();
        yl + (x - xl)
    }

    proptest! {
        #[test]
        fn recovers_level_of_monotone_piecewise_linear(knots in piecewise_linear(), frac in 0.05f64..0.95) {
            let x_end = knots.last().unwrap().0;
            let x0 = frac * x_end;
            let target = eval_pl(&knots, x0);
            let tol = NumericTolerance::ROOT;
            let root = solve_root_monotone(|x| eval_pl(&knots, x), target, &tol).unwrap();
            prop_assert!((eval_pl(&knots, root.x) - target).abs() <= 1e-10 * target.abs().max(1.0));
        }
    }
}
