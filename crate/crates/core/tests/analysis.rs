use cogrelay::analysis::{outage_mc, rate_curve, AnalysisError, Policy, Side, MIN_OUTAGE_TRIALS};
use cogrelay::channels::{sample_unit_fading, PowerConfig, ScenarioGeometry};
use cogrelay::mathkernel::NumericTolerance;
use cogrelay::power::{Scenario, SolvedScenario};
use cogrelay::relaying::LinkModel;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TRIALS: u64 = 50_000;

fn geometry() -> ScenarioGeometry {
    ScenarioGeometry::new(0.75, 0.25, 0.567_890_834_580_027_3, 1.248_999_599_679_679_7, 0.4, 1.0, 4.0).unwrap()
}

fn solved(cci: f64, w: f64, gb: f64) -> SolvedScenario {
    Scenario::new(geometry(), PowerConfig::new(cci, w, gb)).solve(&NumericTolerance::ROOT).unwrap()
}

#[test]
fn trivial_thresholds() {
    let s = solved(20.0, 5.0, 20.0);
    for side in [Side::Bs, Side::Su] {
        assert_eq!(outage_mc(&s, 0.0, side, TRIALS, 1).unwrap().p_out, 0.0);
        let all = outage_mc(&s, 1e12, side, TRIALS, 1).unwrap().p_out;
        assert!(all > 0.999, "{side}: {all}");
    }
}

#[test]
fn input_gates() {
    let s = solved(20.0, 5.0, 20.0);
    assert_eq!(
        outage_mc(&s, 3.0, Side::Bs, MIN_OUTAGE_TRIALS - 1, 1).unwrap_err(),
        AnalysisError::TooFewTrials { requested: MIN_OUTAGE_TRIALS - 1, minimum: MIN_OUTAGE_TRIALS }
    );
    assert!(matches!(outage_mc(&s, -1.0, Side::Su, TRIALS, 1), Err(AnalysisError::InvalidThreshold(_))));
    assert!(matches!(rate_curve(&s, Policy::Optimal, &[10.0], 1000, 1), Err(AnalysisError::TooFewTrials { .. })));
}

#[test]
fn outage_falls_with_average_sir() {
    // common random numbers make both curves monotone draw by draw
    let s = solved(20.0, 5.0, 0.0);
    for side in [Side::Bs, Side::Su] {
        let curve: Vec<f64> =
            (0..=8).map(|i| outage_mc(&s.at_gamma_bar(5.0 * i as f64), 3.0, side, TRIALS, 2).unwrap().p_out).collect();
        assert!(curve.windows(2).all(|w| w[1] <= w[0]), "{side}: {curve:?}");
        assert!(curve[0] > curve[8]);
    }
}

#[test]
fn interference_budget_orders_outage() {
    let levels = [0.0, 5.0, 10.0, 15.0];
    let su: Vec<f64> =
        levels.iter().map(|&w| outage_mc(&solved(20.0, w, 25.0), 3.0, Side::Su, TRIALS, 3).unwrap().p_out).collect();
    assert!(su.windows(2).all(|w| w[1] >= w[0]), "{su:?}");
    let bs: Vec<_> =
        levels.iter().map(|&w| outage_mc(&solved(20.0, w, 25.0), 3.0, Side::Bs, TRIALS, 3).unwrap()).collect();
    assert!(bs.windows(2).all(|w| w[1].p_out_all_draws <= w[0].p_out_all_draws));
    assert!(bs.windows(2).all(|w| w[1].p_out <= w[0].p_out + 3.0 * w[0].ci_halfwidth.hypot(w[1].ci_halfwidth)));
}

#[test]
fn bs_estimate_sits_between_bounds() {
    let e = outage_mc(&solved(20.0, 10.0, 15.0), 3.0, Side::Bs, 200_000, 4).unwrap();
    let (lo, hi) = (e.lower_bound.unwrap(), e.upper_bound.unwrap());
    assert!(lo <= hi);
    assert!(e.p_out >= lo - 3.0 * e.ci_halfwidth && e.p_out <= hi + 3.0 * e.ci_halfwidth, "{e:?}");
}

#[test]
fn optimal_power_beats_fixed_power() {
    for w in [0.0, 5.0, 10.0] {
        let s = solved(20.0, w, 25.0);
        let grid = [10.0, 25.0, 40.0];
        let opt = rate_curve(&s, Policy::Optimal, &grid, 200_000, 5).unwrap();
        let fix = rate_curve(&s, Policy::Fixed, &grid, 200_000, 5).unwrap();
        for (o, f) in opt.iter().zip(&fix) {
            assert!(o.rate_bps_hz >= f.rate_bps_hz, "W={w}: {o:?} vs {f:?}");
            assert!(f.rate_bps_hz >= 0.0 && o.rate_endtoend >= 0.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn only_budget_minus_interference_matters(w in -5.0f64..20.0, cci in 10.0f64..30.0, shift in -10.0f64..10.0) {
        let a = solved(cci, w, 20.0);
        let b = solved(cci + shift, w + shift, 20.0);
        let k = 10f64.powf(shift / 10.0);
        prop_assert!((b.lambda() / (k * a.lambda()) - 1.0).abs() < 1e-8);
        prop_assert!((b.c2() / a.c2() - 1.0).abs() < 1e-8);
        let (la, lb) = (LinkModel::new(&a), LinkModel::new(&b));
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let d = sample_unit_fading(&mut rng).with_gamma_bar(100.0);
            let (sa, sb) = (la.sample(&d).unwrap(), lb.sample(&d).unwrap());
            prop_assert!((sa.gamma_bs1 - sb.gamma_bs1).abs() <= 1e-7 * (1.0 + sa.gamma_bs1));
            prop_assert!((sa.gamma_su1 - sb.gamma_su1).abs() <= 1e-7 * (1.0 + sa.gamma_su1));
        }
    }
}
