use cogrelay::channels::{
    derive_etas, dist_gamma_ratio, dist_t, dist_v1, dist_v3, sample_fading, sample_unit_fading, PowerConfig,
    ScenarioGeometry,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const N: usize = 200_000;

fn geometry() -> ScenarioGeometry {
    ScenarioGeometry::new(0.75, 0.25, 0.567_890_834_580_027_3, 1.248_999_599_679_679_7, 0.4, 1.0, 4.0).unwrap()
}

/// One-sample Kolmogorov–Smirnov statistic.
fn ks(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// 1% critical value.
fn critical() -> f64 {
    1.63 / (N as f64).sqrt()
}

fn draws<T>(seed: u64, f: impl Fn(&cogrelay::channels::FadingRealization) -> T) -> Vec<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..N).map(|_| f(&sample_unit_fading(&mut rng))).collect()
}

#[test]
fn unit_fading_is_standard_exponential() {
    let d = ks(draws(1, |d| d.u2), |x| -(-x).exp_m1());
    assert!(d < critical(), "{d}");
    let d = ks(draws(2, |d| d.f2), |x| -(-x).exp_m1());
    assert!(d < critical(), "{d}");
}

#[test]
fn sir_ratio_law() {
    let geom = geometry();
    let eta = derive_etas(&geom).eta1;
    let gb = 10f64.powf(2.5);
    let d = ks(draws(3, |d| eta * d.with_gamma_bar(gb).h2 / d.u2), |x| dist_gamma_ratio(x, eta, gb).unwrap().cdf);
    assert!(d < critical(), "{d}");
}

#[test]
fn interference_ratio_and_sum_laws() {
    let geom = geometry();
    let gains = geom.path_gains();
    let d = ks(draws(4, |d| d.v1()), |x| dist_v1(x).unwrap().cdf);
    assert!(d < critical(), "V1: {d}");
    let d = ks(draws(5, |d| d.v3(&gains)), |x| dist_v3(x, &geom).unwrap().cdf);
    assert!(d < critical(), "V3: {d}");
    let d = ks(draws(6, |d| d.v1() * d.v3(&gains)), |x| dist_t(x, &geom).unwrap().cdf);
    assert!(d < critical(), "T: {d}");
}

#[test]
fn product_law_with_equal_interferer_distances() {
    let geom = ScenarioGeometry::new(0.75, 0.25, 0.8, 0.8, 0.4, 1.0, 3.0).unwrap();
    let gains = geom.path_gains();
    let d = ks(draws(7, |d| d.v1() * d.v3(&gains)), |x| dist_t(x, &geom).unwrap().cdf);
    assert!(d < critical(), "{d}");
}

#[test]
fn scaled_fading_mean() {
    let cfg = PowerConfig::new(20.0, 5.0, 20.0);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let n = 1_000_000;
    let mean = (0..n).map(|_| sample_fading(&mut rng, &cfg).h2).sum::<f64>() / n as f64;
    assert!((mean / cfg.gamma_bar_lin() - 1.0).abs() < 5e-3, "{mean}");
}
