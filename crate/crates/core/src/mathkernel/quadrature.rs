use super::{MathError, NumericTolerance};

// 21-point Kronrod abscissae (nonnegative half); odd indices are the 10-point Gauss nodes.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Result of a converged quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

/// Globally adaptive Gauss–Kronrod (10/21) quadrature of `f` over `[lo, hi]`.
///
/// Either limit may be infinite; semi-infinite and infinite ranges are mapped
/// onto a finite interval first. The interval with the largest error estimate
/// is bisected until the summed estimate falls below
/// `max(abs_tol, rel_tol·|value|)` or `max_iter` subintervals are in use.
pub fn integrate<F>(f: F, lo: f64, hi: f64, tol: &NumericTolerance) -> Result<Quadrature, MathError>
where
    F: Fn(f64) -> f64,
{
    if lo.is_nan() || hi.is_nan() {
        return Err(MathError::Domain { function: "integrate (limits)", arg: f64::NAN });
    }
    if lo == hi {
        return Ok(Quadrature { value: 0.0, error: 0.0, evaluations: 0, intervals: 0 });
    }
    if lo > hi {
        return integrate(f, hi, lo, tol).map(|q| Quadrature { value: -q.value, ..q });
    }
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => adaptive(&f, lo, hi, tol),
        (true, false) => adaptive(
            &|t: f64| {
                let s = 1.0 - t;
                f(lo + t / s) / (s * s)
            },
            0.0,
            1.0,
            tol,
        ),
        (false, true) => adaptive(&|t: f64| f(hi - (1.0 - t) / t) / (t * t), 0.0, 1.0, tol),
        (false, false) => adaptive(
            &|t: f64| {
                let s = 1.0 - t * t;
                f(t / s) * (1.0 + t * t) / (s * s)
            },
            -1.0,
            1.0,
            tol,
        ),
    }
}

fn adaptive<F>(f: &F, lo: f64, hi: f64, tol: &NumericTolerance) -> Result<Quadrature, MathError>
where
    F: Fn(f64) -> f64,
{
    let mut segments = vec![kronrod21(f, lo, hi)?];
    let mut evaluations = 21;
    loop {
        let value: f64 = segments.iter().map(|s| s.value).sum();
        let error: f64 = segments.iter().map(|s| s.error).sum();
        if error <= tol.threshold(value) {
            return Ok(Quadrature { value, error, evaluations, intervals: segments.len() });
        }
        if segments.len() >= tol.max_iter() {
            return Err(MathError::IntegrationFailed {
                estimate: value,
                error_estimate: error,
                intervals: segments.len(),
            });
        }
        let (worst, _) =
            segments.iter().enumerate().max_by(|a, b| a.1.error.total_cmp(&b.1.error)).expect("at least one segment");
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.lo + seg.hi);
        if !(seg.lo < mid && mid < seg.hi) {
            // interval cannot be split further in floating point
            return Err(MathError::IntegrationFailed {
                estimate: value,
                error_estimate: error,
                intervals: segments.len() + 1,
            });
        }
        segments.push(kronrod21(f, seg.lo, mid)?);
        segments.push(kronrod21(f, mid, seg.hi)?);
        evaluations += 42;
    }
}

fn kronrod21<F>(f: &F, lo: f64, hi: f64) -> Result<Segment, MathError>
where
    F: Fn(f64) -> f64,
{
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let eval = |x: f64| -> Result<f64, MathError> {
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(MathError::NonFiniteIntegrand { at: x })
        }
    };
    let fc = eval(center)?;
    let mut kronrod = WGK[10] * fc;
    let mut gauss = 0.0;
    for (j, (&x, &wk)) in XGK.iter().zip(WGK.iter()).take(10).enumerate() {
        let dx = half * x;
        let pair = eval(center - dx)? + eval(center + dx)?;
        kronrod += wk * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    Ok(Segment { lo, hi, value, error })
}
