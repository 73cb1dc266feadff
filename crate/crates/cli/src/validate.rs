//! Oracle and invariant checks behind the `validate` subcommand and the
//! acceptance suite.

use anyhow::{Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cogrelay::analysis::montecarlo::map_blocks;
use cogrelay::analysis::{
    outage_mc, rate_curve, su_tail_integral_quadrature, OutageEstimate, Policy, Side, SuBoundLaw, DEFAULT_GAMMA_TH,
};
use cogrelay::channels::{derive_etas, sample_unit_fading, PowerConfig, ScenarioGeometry};
use cogrelay::mathkernel::{exp_e1, gauss_2f1, integrate, tricomi_psi11, NumericTolerance};
use cogrelay::power::{Scenario, SolvedScenario};
use cogrelay::relaying::{sinr_from_components, LinkModel};

use crate::config::Positions;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub criterion: u8,
    pub name: String,
    /// Measured quantity, oriented so that `value <= limit` passes.
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
    /// Calibration rows are reported but never fail the suite.
    pub gate: bool,
}

impl Check {
    fn le(criterion: u8, name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self { criterion, name: name.into(), value, limit, passed: value <= limit, gate: true }
    }

    fn flag(criterion: u8, name: impl Into<String>, ok: bool) -> Self {
        Self { criterion, name: name.into(), value: if ok { 0.0 } else { 1.0 }, limit: 0.0, passed: ok, gate: true }
    }
}

/// Trial counts per Monte-Carlo criterion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Budget {
    pub seed: u64,
    pub constraint: u64,
    pub su_law: u64,
    pub sandwich: u64,
    pub invariance: u64,
    pub su_side: u64,
    pub rate: u64,
    pub per_draw: u64,
    pub special_points: usize,
}

impl Budget {
    /// Sample sizes the acceptance thresholds are stated for.
    pub fn acceptance(seed: u64) -> Self {
        Self {
            seed,
            constraint: 10_000_000,
            su_law: 10_000_000,
            sandwich: 1_000_000,
            invariance: 1_000_000,
            su_side: 10_000_000,
            rate: 1_000_000,
            per_draw: 1_000_000,
            special_points: 1000,
        }
    }

    /// One trial count for every criterion (rate runs need at least 10⁵).
    pub fn uniform(seed: u64, trials: u64) -> Self {
        Self {
            seed,
            constraint: trials,
            su_law: trials,
            sandwich: trials,
            invariance: trials,
            su_side: trials,
            rate: trials.max(cogrelay::analysis::MIN_RATE_TRIALS),
            per_draw: trials,
            special_points: 1000,
        }
    }
}

pub fn default_geometry(epsilon: f64) -> ScenarioGeometry {
    let p = Positions::default();
    ScenarioGeometry::from_positions(p.bs1, p.bs2, p.su1, p.pu1, p.pu4, epsilon).expect("default placement is valid")
}

fn solve(geom: ScenarioGeometry, cci_db: f64, w_db: f64, gamma_bar_db: f64) -> Result<SolvedScenario> {
    Scenario::new(geom, PowerConfig::new(cci_db, w_db, gamma_bar_db))
        .solve(&NumericTolerance::ROOT)
        .with_context(|| format!("water level for W = {w_db} dB, CCI = {cci_db} dB"))
}

fn db_grid(lo: f64, step: f64, hi: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// Mean interference at BS2 under the water-filling rule, estimated from
/// fading draws, against the target `W` (0.5% relative).
pub fn constraint_satisfaction(b: &Budget) -> Result<Vec<Check>> {
    const CONFIGS: [(f64, f64, f64); 9] = [
        (5.0, 20.0, 10.0),
        (10.0, 20.0, 10.0),
        (20.0, 20.0, 10.0),
        (5.0, 30.0, 10.0),
        (10.0, 30.0, 10.0),
        (20.0, 30.0, 10.0),
        (5.0, 20.0, 30.0),
        (10.0, 30.0, 30.0),
        (20.0, 30.0, 30.0),
    ];
    let geom = default_geometry(4.0);
    let gain_d = geom.path_gains().d;
    let mut checks = Vec::new();
    for (w_db, cci_db, gb_db) in CONFIGS {
        let solved = solve(geom, cci_db, w_db, gb_db)?;
        let alloc = solved.allocator();
        let gb = solved.power().gamma_bar_lin();
        let sum: f64 = map_blocks(b.constraint, b.seed, |rng, n| {
            let mut s = 0.0;
            for _ in 0..n {
                let d = sample_unit_fading(rng).with_gamma_bar(gb);
                s += alloc.allocate(&d).power() * gain_d * d.f2;
            }
            s
        })
        .into_iter()
        .sum();
        let mean = sum / b.constraint as f64;
        checks.push(Check::le(
            1,
            format!("mean interference W={w_db} CCI={cci_db} gbar={gb_db} (rel. error)"),
            rel(mean, solved.power().w_lin()),
            5e-3,
        ));
    }
    Ok(checks)
}

/// SU-bound law: empirical CDF, density vs finite difference of the CDF,
/// tail integral vs its defining quadrature.
pub fn su_bound_law(b: &Budget) -> Result<Vec<Check>> {
    let geom = default_geometry(4.0);
    let cfg = PowerConfig::new(20.0, 5.0, 20.0);
    let law = SuBoundLaw::new(&geom, &cfg);
    let etas = derive_etas(&geom);
    let gb = cfg.gamma_bar_lin();
    let grid = log_grid(1.0, 1e4, 50);

    let counts = map_blocks(b.su_law, b.seed, |rng, n| {
        let mut c = vec![0u64; grid.len()];
        for _ in 0..n {
            let d = sample_unit_fading(rng).with_gamma_bar(gb);
            let g3 = etas.eta2 * d.g2 / d.w2;
            let g4 = etas.eta3 * d.h2 / d.v2;
            let x = g3 * g4 / (g3 + g4);
            let k = grid.partition_point(|&t| t < x);
            if k < c.len() {
                c[k] += 1;
            }
        }
        c
    })
    .into_iter()
    .fold(vec![0u64; grid.len()], |mut acc, c| {
        acc.iter_mut().zip(c).for_each(|(a, v)| *a += v);
        acc
    });
    let n = b.su_law as f64;
    let mut below = 0u64;
    let mut ks: f64 = 0.0;
    for (i, &x) in grid.iter().enumerate() {
        below += counts[i];
        ks = ks.max((below as f64 / n - law.cdf(x)?).abs());
    }
    let mut checks = vec![Check::le(2, "KS distance of SU bound CDF", ks, 1.63 / n.sqrt())];

    let mut worst_fd: f64 = 0.0;
    for &x in &grid {
        let h = 1e-5 * x;
        let fd = (law.cdf(x + h)? - law.cdf(x - h)?) / (2.0 * h);
        worst_fd = worst_fd.max(rel(fd, law.pdf(x)?));
    }
    checks.push(Check::le(2, "SU bound pdf vs CDF finite difference (rel.)", worst_fd, 1e-6));

    let mut rng = ChaCha8Rng::seed_from_u64(b.seed);
    let tol = NumericTolerance::new(1e-13, 0.0, 10_000)?;
    let mut worst_tail: f64 = 0.0;
    for _ in 0..20 {
        let a = 10f64.powf(rng.random_range(-1.0..4.0));
        let bb = 10f64.powf(rng.random_range(-1.0..4.0));
        let x = 10f64.powf(rng.random_range(-2.0..4.0));
        let l = SuBoundLaw::from_scales(a, bb)?;
        let q = su_tail_integral_quadrature(&l, x, &tol)?;
        worst_tail = worst_tail.max(rel(l.tail_integral(x)?, q.value));
    }
    checks.push(Check::le(2, "tail integral closed form vs quadrature (rel.)", worst_tail, 1e-8));
    Ok(checks)
}

fn outage_curve(
    solved: &SolvedScenario,
    grid: &[f64],
    side: Side,
    trials: u64,
    seed: u64,
) -> Result<Vec<OutageEstimate>> {
    grid.iter()
        .map(|&db| outage_mc(&solved.at_gamma_bar(db), DEFAULT_GAMMA_TH, side, trials, seed).map_err(Into::into))
        .collect()
}

/// BS1 outage between the order-statistics bounds, and the lower bound
/// tight (10%) at medium and high average SIR.
pub fn bound_sandwich(b: &Budget) -> Result<Vec<Check>> {
    let geom = default_geometry(4.0);
    let grid = db_grid(0.0, 2.5, 40.0);
    let mut checks = Vec::new();
    for w_db in [5.0, 10.0] {
        let solved = solve(geom, 20.0, w_db, 0.0)?;
        let curve = outage_curve(&solved, &grid, Side::Bs, b.sandwich, b.seed)?;
        let mut outside: f64 = 0.0;
        let mut tight: f64 = 0.0;
        for (&db, e) in grid.iter().zip(&curve) {
            let (lo, hi) = (e.lower_bound.expect("bs bounds"), e.upper_bound.expect("bs bounds"));
            let slack = 3.0 * e.ci_halfwidth;
            outside = outside.max(lo - slack - e.p_out).max(e.p_out - hi - slack);
            if db >= 25.0 {
                tight = tight.max(rel(lo, e.p_out));
            }
        }
        checks.push(Check::le(3, format!("W={w_db}: MC beyond bounds by (3 CI slack)"), outside, 0.0));
        checks.push(Check::le(3, format!("W={w_db}: lower bound vs MC at >= 25 dB (rel.)"), tight, 0.1));
    }
    Ok(checks)
}

/// Outage depends on `W` and CCI only through their difference.
pub fn difference_invariance(b: &Budget) -> Result<Vec<Check>> {
    let geom = default_geometry(4.0);
    let grid = db_grid(0.0, 5.0, 40.0);
    let curve = |w: f64, cci: f64, seed: u64| -> Result<Vec<OutageEstimate>> {
        outage_curve(&solve(geom, cci, w, 0.0)?, &grid, Side::Bs, b.invariance, seed)
    };
    let minus15 = [curve(5.0, 20.0, b.seed)?, curve(15.0, 30.0, b.seed + 1)?];
    let minus10 = [curve(10.0, 20.0, b.seed)?, curve(20.0, 30.0, b.seed + 1)?];
    let mut checks = Vec::new();
    for (label, pair) in [("W-CCI=-15", &minus15), ("W-CCI=-10", &minus10)] {
        // distance in units of the combined 3-sigma band
        let worst = pair[0]
            .iter()
            .zip(&pair[1])
            .map(|(x, y)| (x.p_out - y.p_out).abs() / (3.0 * x.ci_halfwidth.hypot(y.ci_halfwidth)))
            .fold(0.0, f64::max);
        checks.push(Check::le(4, format!("{label}: curve gap / 3 CI"), worst, 1.0));
    }
    let ordered = (0..grid.len()).all(|i| minus10.iter().all(|hi| minus15.iter().all(|lo| hi[i].p_out < lo[i].p_out)));
    checks.push(Check::flag(4, "W-CCI=-10 curves below W-CCI=-15 curves", ordered));
    Ok(checks)
}

/// SU1 outage ordering and convergence to the closed-form lower bound.
pub fn su_side(b: &Budget) -> Result<Vec<Check>> {
    let geom = default_geometry(4.0);
    let grid = db_grid(0.0, 5.0, 40.0);
    let hi = outage_curve(&solve(geom, 20.0, 10.0, 0.0)?, &grid, Side::Su, b.su_side, b.seed)?;
    let lo = outage_curve(&solve(geom, 20.0, 5.0, 0.0)?, &grid, Side::Su, b.su_side, b.seed)?;
    let mut ordered = true;
    let mut below_bound: f64 = 0.0;
    let mut gap: f64 = 0.0;
    for ((&db, h), l) in grid.iter().zip(&hi).zip(&lo) {
        let bound = l.lower_bound.expect("su bound");
        ordered &= h.p_out >= l.p_out;
        below_bound = below_bound.max(bound - 3.0 * l.ci_halfwidth - l.p_out);
        if db >= 20.0 {
            gap = gap.max(rel(l.p_out, bound));
        }
    }
    Ok(vec![
        Check::flag(5, "SU outage W=CCI-10 >= W=CCI-15", ordered),
        Check::le(5, "closed form above W=CCI-15 MC by (3 CI slack)", below_bound, 0.0),
        Check::le(5, "W=CCI-15 MC vs closed form at >= 20 dB (rel.)", gap, 0.05),
    ])
}

/// Rate at `gamma_bar_db` for one policy.
fn rate_at(solved: &SolvedScenario, policy: Policy, db: &[f64], b: &Budget) -> Result<Vec<f64>> {
    Ok(rate_curve(solved, policy, db, b.rate, b.seed)?.into_iter().map(|r| r.rate_bps_hz).collect())
}

/// Optimal vs fixed power, plus the path-loss exponent calibration sweep.
pub fn rate_comparison(b: &Budget) -> Result<Vec<Check>> {
    let solved = solve(default_geometry(4.0), 20.0, 5.0, 25.0)?;
    let opt = rate_at(&solved, Policy::Optimal, &[25.0], b)?[0];
    let fixed = rate_at(&solved, Policy::Fixed, &[25.0, 35.0], b)?;
    let mut checks = vec![
        Check::le(6, "fixed / optimal rate at 25 dB (<= 1/1.5)", fixed[0] / opt, 1.0 / 1.5),
        Check::le(6, "fixed-power rate gain 25 -> 35 dB (bit/s/Hz)", fixed[1] - fixed[0], 0.2),
    ];
    for eps in [2.0, 3.0, 4.0] {
        let s = solve(default_geometry(eps), 20.0, 5.0, 25.0)?;
        for (policy, reference) in [(Policy::Optimal, 5.2), (Policy::Fixed, 2.9)] {
            let r = rate_at(&s, policy, &[25.0], b)?[0];
            checks.push(Check {
                criterion: 6,
                name: format!("calibration eps={eps} {policy} rate {r:.3} vs {reference}"),
                value: rel(r, reference),
                limit: 0.2,
                passed: rel(r, reference) <= 0.2,
                gate: false,
            });
        }
    }
    Ok(checks)
}

/// Orderings that must hold draw by draw.
pub fn per_draw_invariants(b: &Budget) -> Result<Vec<Check>> {
    let geom = default_geometry(4.0);
    let mut checks = Vec::new();
    for (w_db, gb_db) in [(5.0, 0.0), (5.0, 25.0), (20.0, 40.0)] {
        let solved = solve(geom, 20.0, w_db, gb_db)?;
        let link = LinkModel::new(&solved);
        let gb = solved.power().gamma_bar_lin();
        let violations: [u64; 4] = map_blocks(b.per_draw, b.seed, |rng, n| {
            let mut v = [0u64; 4];
            for _ in 0..n {
                let d = sample_unit_fading(rng).with_gamma_bar(gb);
                let Ok(s) = link.sample(&d) else {
                    v[0] += 1;
                    continue;
                };
                let m = s.gamma1.min(s.gamma2);
                v[0] += !(m / 2.0 <= s.gamma_bs1 && s.gamma_bs1 <= m) as u64;
                v[1] += !(sinr_from_components(s.gamma1, s.gamma2) <= s.gamma_bs1) as u64;
                let equal = s.gamma_su1 == s.gamma_su1_upper;
                v[2] += !(s.gamma_su1 <= s.gamma_su1_upper && equal == (s.p_su1 == 0.0)) as u64;
                v[3] += !((s.gamma2 - link.gamma2_via_t(&d)).abs() <= 1e-12 * (1.0 + s.gamma2)) as u64;
            }
            v
        })
        .into_iter()
        .fold([0; 4], |a, v| [a[0] + v[0], a[1] + v[1], a[2] + v[2], a[3] + v[3]]);
        let tag = format!("W={w_db} gbar={gb_db}");
        checks.push(Check::le(7, format!("{tag}: BS SIR outside [min/2, min]"), violations[0] as f64, 0.0));
        checks.push(Check::le(7, format!("{tag}: SINR above SIR"), violations[1] as f64, 0.0));
        checks.push(Check::le(7, format!("{tag}: SU SIR vs its upper bound"), violations[2] as f64, 0.0));
        checks.push(Check::le(7, format!("{tag}: two gamma2 routes disagree"), violations[3] as f64, 0.0));
    }
    Ok(checks)
}

/// `₂F₁(b, b; b+1; z)` from its Euler integral after `s = 1 - z t = e^y`,
/// which stays smooth up to `z → 1`.
fn hyp_oracle(b: i32, z: f64, tol: &NumericTolerance) -> Result<f64> {
    let a = b;
    // ln(1 - z) without rounding 1 - z at small z
    let lower = if z < 0.5 { (-z).ln_1p() } else { (1.0 - z).ln() };
    let q = integrate(|y| (-y.exp_m1()).powi(b - 1) * ((1 - a) as f64 * y).exp(), lower, 0.0, tol)?;
    Ok(b as f64 / z.powi(b) * q.value)
}

/// Special functions against quadrature oracles (1e-10 relative).
pub fn special_functions(b: &Budget) -> Result<Vec<Check>> {
    let n = b.special_points;
    let tol = NumericTolerance::new(1e-14, 0.0, 20_000)?;
    let xs = log_grid(1e-4, 1e2, n);

    let mut worst_e1: f64 = 0.0;
    let mut worst_psi: f64 = 0.0;
    for &x in &xs {
        // E1(x) = ∫_0^∞ exp(-x e^s) ds
        let e1 = integrate(|s| (-x * s.exp()).exp(), 0.0, f64::INFINITY, &tol)?.value;
        worst_e1 = worst_e1.max(rel(exp_e1(x)?, e1));
        // Ψ(1,1,x) = ∫_0^∞ e^{-xt}/(1+t) dt
        let psi = integrate(|t| (-x * t).exp() / (1.0 + t), 0.0, f64::INFINITY, &tol)?.value;
        worst_psi = worst_psi.max(rel(tricomi_psi11(x)?, psi));
    }

    // half the points log-spaced in z, half log-spaced in 1 - z down to 1e-8
    let mut zs = log_grid(1e-6, 0.5, n / 2);
    zs.extend(log_grid(1e-8, 0.5, n - n / 2).into_iter().map(|w| 1.0 - w));
    let mut worst_f2: f64 = 0.0;
    let mut worst_f3: f64 = 0.0;
    for &z in &zs {
        worst_f2 = worst_f2.max(rel(gauss_2f1(2, 2, 3, z)?, hyp_oracle(2, z, &tol)?));
        worst_f3 = worst_f3.max(rel(gauss_2f1(3, 3, 4, z)?, hyp_oracle(3, z, &tol)?));
    }
    Ok(vec![
        Check::le(8, "E1 vs quadrature (rel.)", worst_e1, 1e-10),
        Check::le(8, "Psi(1,1,.) vs quadrature (rel.)", worst_psi, 1e-10),
        Check::le(8, "2F1(2,2;3;.) vs quadrature (rel.)", worst_f2, 1e-10),
        Check::le(8, "2F1(3,3;4;.) vs quadrature (rel.)", worst_f3, 1e-10),
    ])
}

/// Same experiment in pools of 1 and 8 workers gives identical output.
pub fn reproducibility(b: &Budget) -> Result<Vec<Check>> {
    let geom = default_geometry(4.0);
    let solved = solve(geom, 20.0, 5.0, 0.0)?;
    let grid = [0.0, 20.0, 40.0];
    let trials = b.sandwich.clamp(cogrelay::analysis::MIN_OUTAGE_TRIALS, 200_000);
    let run = |threads: usize| -> Result<Vec<OutageEstimate>> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
        pool.install(|| outage_curve(&solved, &grid, Side::Bs, trials, b.seed))
    };
    Ok(vec![Check::flag(9, "outage curve identical with 1 and 8 workers", run(1)? == run(8)?)])
}

pub const CRITERIA: [(u8, &str); 9] = [
    (1, "constraint satisfaction"),
    (2, "SU bound law"),
    (3, "bound sandwich"),
    (4, "W-CCI difference invariance"),
    (5, "SU-side convergence"),
    (6, "rate comparison"),
    (7, "per-draw invariants"),
    (8, "special-function accuracy"),
    (9, "reproducibility"),
];

pub fn run_criterion(criterion: u8, b: &Budget) -> Result<Vec<Check>> {
    match criterion {
        1 => constraint_satisfaction(b),
        2 => su_bound_law(b),
        3 => bound_sandwich(b),
        4 => difference_invariance(b),
        5 => su_side(b),
        6 => rate_comparison(b),
        7 => per_draw_invariants(b),
        8 => special_functions(b),
        9 => reproducibility(b),
        _ => anyhow::bail!("no criterion {criterion}"),
    }
}

pub fn run_all(b: &Budget) -> Result<Vec<Check>> {
    let mut all = Vec::new();
    for (c, _) in CRITERIA {
        all.extend(run_criterion(c, b)?);
    }
    Ok(all)
}
