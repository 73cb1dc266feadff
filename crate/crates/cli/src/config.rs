//! Flat `key = value` scenario files.

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};

use cogrelay::analysis::DEFAULT_GAMMA_TH;
use cogrelay::channels::{GeometryError, Point, PowerConfig, ScenarioGeometry};

use crate::selection::{select_relay, NodeInventory, PuEntry, RelaySelection};

pub const DEFAULT_TRIALS: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub key: Option<String>,
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn at(key: &str, line: Option<usize>, message: impl Into<String>) -> Self {
        Self { key: Some(key.to_string()), line, message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.key, self.line) {
            (Some(k), Some(l)) => write!(f, "line {l}, key `{k}`: {}", self.message),
            (Some(k), None) => write!(f, "key `{k}`: {}", self.message),
            (None, Some(l)) => write!(f, "line {l}: {}", self.message),
            (None, None) => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Node coordinates in units of the cell radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Positions {
    pub bs1: Point,
    pub bs2: Point,
    pub su1: Point,
    pub pu1: Point,
    pub pu4: Point,
}

impl Default for Positions {
    fn default() -> Self {
        let su1 = Point::new(1.0, 0.0);
        Self {
            bs1: Point::new(0.0, 0.0),
            bs2: Point::new(2.0, 0.0),
            su1,
            pu1: Point::new(0.75, 0.0),
            pu4: interferer_position(su1, 0.4, 30.0),
        }
    }
}

/// PU4 placed `range` from SU1, `angle_deg` off the perpendicular to the BS axis.
pub fn interferer_position(su1: Point, range: f64, angle_deg: f64) -> Point {
    let t = angle_deg.to_radians();
    Point::new(su1.x + range * t.sin(), su1.y + range * t.cos())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub positions: Positions,
    pub geometry: ScenarioGeometry,
    pub power: PowerConfig,
    pub gamma_th: f64,
    pub sir_grid_db: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    pub output: Option<PathBuf>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub sir_grid_db: Option<Vec<f64>>,
    pub w_db: Option<f64>,
    pub cci_db: Option<f64>,
}

const KEYS: &[&str] = &[
    "bs1",
    "bs2",
    "su1",
    "pu1",
    "relay_candidates",
    "pu4_range",
    "pu4_angle_deg",
    "epsilon",
    "cci_db",
    "w_db",
    "gamma_bar_db",
    "gamma_th",
    "sir_grid_db",
    "trials",
    "seed",
    "noise_variance",
    "output",
];

pub fn load_config(path: &Path, overrides: &Overrides) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        key: None,
        line: None,
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    parse_config(&text, overrides)
}

pub fn parse_config(text: &str, overrides: &Overrides) -> Result<ExperimentConfig, ConfigError> {
    let mut entries: HashMap<&str, (usize, &str)> = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError {
                key: None,
                line: Some(line_no),
                message: format!("expected `key = value`, got `{line}`"),
            });
        };
        let key = key.trim();
        let value = value.trim();
        let Some(&known) = KEYS.iter().find(|k| **k == key) else {
            return Err(ConfigError::at(key, Some(line_no), "unknown key"));
        };
        if let Some((first, _)) = entries.insert(known, (line_no, value)) {
            return Err(ConfigError::at(key, Some(line_no), format!("duplicate key, first set on line {first}")));
        }
    }
    let get = |key: &str| entries.get(key).copied();

    let mut positions = Positions::default();
    for (key, slot) in [("bs1", &mut positions.bs1), ("bs2", &mut positions.bs2), ("su1", &mut positions.su1)] {
        if let Some((line, v)) = get(key) {
            *slot = parse_point(key, line, v)?;
        }
    }
    positions.pu1 = relay_position(get("pu1"), get("relay_candidates"), positions.su1)?;
    let range = number_or(get("pu4_range"), "pu4_range", 0.4)?;
    let angle = number_or(get("pu4_angle_deg"), "pu4_angle_deg", 30.0)?;
    positions.pu4 = interferer_position(positions.su1, range, angle);

    let epsilon = number_or(get("epsilon"), "epsilon", 4.0)?;
    if !(epsilon >= 2.0) || !epsilon.is_finite() {
        return Err(ConfigError::at(
            "epsilon",
            get("epsilon").map(|e| e.0),
            format!("path-loss exponent {epsilon} must be at least 2"),
        ));
    }
    let geometry = build_geometry(&positions, epsilon, None)?;

    let cci_db = match overrides.cci_db {
        Some(v) => v,
        None => number_or(get("cci_db"), "cci_db", 20.0)?,
    };
    let w_db = match overrides.w_db {
        Some(v) => v,
        None => number_or(get("w_db"), "w_db", 5.0)?,
    };
    let gamma_bar_db = number_or(get("gamma_bar_db"), "gamma_bar_db", 25.0)?;
    for (key, v) in [("cci_db", cci_db), ("w_db", w_db), ("gamma_bar_db", gamma_bar_db)] {
        if !v.is_finite() {
            return Err(ConfigError::at(key, get(key).map(|e| e.0), "level must be a finite number of dB"));
        }
    }
    let mut power = PowerConfig::new(cci_db, w_db, gamma_bar_db);
    power.sigma2 = number_or(get("noise_variance"), "noise_variance", 1.0)?;
    if !(power.sigma2 > 0.0) || !power.sigma2.is_finite() {
        return Err(ConfigError::at("noise_variance", get("noise_variance").map(|e| e.0), "must be positive"));
    }

    let gamma_th = number_or(get("gamma_th"), "gamma_th", DEFAULT_GAMMA_TH)?;
    if !(gamma_th >= 0.0) || !gamma_th.is_finite() {
        return Err(ConfigError::at("gamma_th", get("gamma_th").map(|e| e.0), "threshold must be nonnegative"));
    }

    let sir_grid_db = match &overrides.sir_grid_db {
        Some(g) => {
            check_grid(g).map_err(|m| ConfigError::at("sir_grid_db", None, m))?;
            g.clone()
        }
        None => match get("sir_grid_db") {
            Some((line, v)) => parse_grid(v).map_err(|m| ConfigError::at("sir_grid_db", Some(line), m))?,
            None => parse_grid("0:5:40").expect("default grid"),
        },
    };

    let trials = match overrides.trials {
        Some(t) => t,
        None => match get("trials") {
            Some((line, v)) => parse_count("trials", line, v)?,
            None => DEFAULT_TRIALS,
        },
    };
    if trials == 0 {
        return Err(ConfigError::at("trials", get("trials").map(|e| e.0), "must be positive"));
    }

    let seed = match overrides.seed {
        Some(s) => s,
        None => match get("seed") {
            Some((line, v)) => parse_count("seed", line, v)?,
            None => {
                return Err(ConfigError::at(
                    "seed",
                    None,
                    "missing; a seed is mandatory (set `seed = N` or pass --seed)",
                ))
            }
        },
    };

    let output = get("output").map(|(_, v)| PathBuf::from(v));

    Ok(ExperimentConfig { positions, geometry, power, gamma_th, sir_grid_db, trials, seed, output })
}

fn build_geometry(p: &Positions, epsilon: f64, line: Option<usize>) -> Result<ScenarioGeometry, ConfigError> {
    ScenarioGeometry::from_positions(p.bs1, p.bs2, p.su1, p.pu1, p.pu4, epsilon).map_err(|e| match e {
        GeometryError::Exponent(_) => ConfigError::at("epsilon", line, e.to_string()),
        GeometryError::Distance { .. } => ConfigError { key: None, line, message: format!("node placement: {e}") },
    })
}

fn relay_position(
    pu1: Option<(usize, &str)>,
    candidates: Option<(usize, &str)>,
    su1: Point,
) -> Result<Point, ConfigError> {
    match (pu1, candidates) {
        (Some((line, _)), Some(_)) => {
            Err(ConfigError::at("relay_candidates", Some(line), "give either `pu1` or `relay_candidates`, not both"))
        }
        (Some((line, v)), None) => parse_point("pu1", line, v),
        (None, Some((line, v))) => {
            let mut pu_entries = Vec::new();
            for item in v.split(';').map(str::trim).filter(|s| !s.is_empty()) {
                let (coords, idle) = match item.strip_suffix("busy") {
                    Some(rest) => (rest.trim(), false),
                    None => (item, true),
                };
                pu_entries.push(PuEntry {
                    position: parse_point("relay_candidates", line, coords)?,
                    idle,
                    priority: 0,
                });
            }
            let inventory = NodeInventory::new(su1, pu_entries.clone())
                .map_err(|m| ConfigError::at("relay_candidates", Some(line), m))?;
            match select_relay(&inventory) {
                RelaySelection::Relay(i) => Ok(pu_entries[i].position),
                RelaySelection::Suspend => {
                    Err(ConfigError::at("relay_candidates", Some(line), "no idle relay candidate; SU1 would suspend"))
                }
            }
        }
        (None, None) => Ok(Positions::default().pu1),
    }
}

fn parse_number(key: &str, line: usize, v: &str) -> Result<f64, ConfigError> {
    v.parse::<f64>().map_err(|_| ConfigError::at(key, Some(line), format!("`{v}` is not a number")))
}

fn number_or(entry: Option<(usize, &str)>, key: &str, default: f64) -> Result<f64, ConfigError> {
    match entry {
        Some((line, v)) => {
            let x = parse_number(key, line, v)?;
            if x.is_nan() {
                return Err(ConfigError::at(key, Some(line), "NaN is not allowed"));
            }
            Ok(x)
        }
        None => Ok(default),
    }
}

fn parse_count(key: &str, line: usize, v: &str) -> Result<u64, ConfigError> {
    let cleaned: String = v.chars().filter(|c| *c != '_').collect();
    if let Ok(n) = cleaned.parse::<u64>() {
        return Ok(n);
    }
    // allow `1e6`
    match cleaned.parse::<f64>() {
        Ok(x) if x >= 0.0 && x.fract() == 0.0 && x < 2f64.powi(64) => Ok(x as u64),
        _ => Err(ConfigError::at(key, Some(line), format!("`{v}` is not a nonnegative integer"))),
    }
}

fn parse_point(key: &str, line: usize, v: &str) -> Result<Point, ConfigError> {
    let parts: Vec<&str> = v.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(ConfigError::at(key, Some(line), format!("expected `x, y`, got `{v}`")));
    }
    let x = parse_number(key, line, parts[0])?;
    let y = parse_number(key, line, parts[1])?;
    if !(x.is_finite() && y.is_finite()) {
        return Err(ConfigError::at(key, Some(line), "coordinates must be finite"));
    }
    Ok(Point::new(x, y))
}

/// Parses `LO:STEP:HI` (inclusive) or a single value.
pub fn parse_grid(v: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = v.split(':').map(str::trim).collect();
    let num = |s: &str| s.parse::<f64>().map_err(|_| format!("`{s}` is not a number"));
    let grid = match parts.as_slice() {
        [single] => vec![num(single)?],
        [lo, step, hi] => {
            let (lo, step, hi) = (num(lo)?, num(step)?, num(hi)?);
            if !(step > 0.0) || !(lo.is_finite() && step.is_finite() && hi.is_finite()) {
                return Err("step must be positive and all bounds finite".into());
            }
            if hi < lo {
                return Err(format!("upper end {hi} is below lower end {lo}"));
            }
            let n = ((hi - lo) / step + 1e-9).floor() as usize;
            (0..=n).map(|i| lo + i as f64 * step).collect()
        }
        _ => return Err(format!("expected `LO:STEP:HI`, got `{v}`")),
    };
    check_grid(&grid)?;
    Ok(grid)
}

fn check_grid(g: &[f64]) -> Result<(), String> {
    if g.is_empty() {
        return Err("grid is empty".into());
    }
    if g.iter().any(|x| !x.is_finite()) {
        return Err("grid values must be finite".into());
    }
    if g.windows(2).any(|w| w[1] <= w[0]) {
        return Err("grid must be strictly increasing".into());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ExperimentConfig, ConfigError> {
        parse_config(text, &Overrides::default())
    }

    #[test]
    fn defaults_reproduce_documented_distances() {
        let c = parse("seed = 1").unwrap();
        let g = c.geometry;
        assert!((g.s() - 0.75).abs() < 1e-12);
        assert!((g.l() - 0.25).abs() < 1e-12);
        assert!((g.z() - 0.4).abs() < 1e-12);
        assert!((g.d() - 1.0).abs() < 1e-12);
        assert!((g.q() - 1.249).abs() < 1e-3);
        assert!((g.r() - 0.568).abs() < 1e-3);
        assert_eq!(g.epsilon(), 4.0);
        assert_eq!(c.gamma_th, 3.0);
        assert_eq!(c.sir_grid_db.len(), 9);
    }

    #[test]
    fn rejects_bad_input_with_key_and_line() {
        let e = parse("seed = 1\nepsilon = 1.5").unwrap_err();
        assert_eq!((e.key.as_deref(), e.line), (Some("epsilon"), Some(2)));
        let e = parse("# header\nfoo = 3\nseed = 1").unwrap_err();
        assert_eq!((e.key.as_deref(), e.line), (Some("foo"), Some(2)));
        let e = parse("trials = 10").unwrap_err();
        assert_eq!(e.key.as_deref(), Some("seed"));
        assert!(e.to_string().contains("mandatory"));
        assert!(parse("seed = 1\nseed = 2").is_err());
        assert!(parse("seed = 1\nsir_grid_db = 10:5:0").is_err());
        assert!(parse("seed = 1\nsu1 = 1").is_err());
        assert!(parse("seed = -4").is_err());
        assert!(parse("seed = 1\nw_db = inf").is_err());
    }

    #[test]
    fn overrides_take_precedence() {
        let o = Overrides {
            seed: Some(9),
            trials: Some(123),
            w_db: Some(15.0),
            cci_db: Some(30.0),
            sir_grid_db: Some(vec![1.0]),
        };
        let c = parse_config("seed = 1\nw_db = 5", &o).unwrap();
        assert_eq!((c.seed, c.trials, c.power.w_db, c.power.p_cci_db), (9, 123, 15.0, 30.0));
        assert_eq!(c.sir_grid_db, vec![1.0]);
        assert!(parse_config("", &Overrides { seed: Some(3), ..Default::default() }).is_ok());
    }

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("0:10:40").unwrap(), vec![0.0, 10.0, 20.0, 30.0, 40.0]);
        assert_eq!(parse_grid("0:0.1:0.3").unwrap().len(), 4);
        assert_eq!(parse_grid("7").unwrap(), vec![7.0]);
        assert!(parse_grid("0:0:3").is_err());
        assert!(parse_grid("a:1:3").is_err());
    }

    #[test]
    fn relay_candidates_pick_nearest_idle() {
        let c = parse("seed = 1\nrelay_candidates = 0.6, 0; 0.75, 0; 0.9, 0.05 busy").unwrap();
        assert_eq!(c.positions.pu1, Point::new(0.75, 0.0));
        assert!(parse("seed = 1\nrelay_candidates = 0.9, 0 busy").is_err());
        assert!(parse("seed = 1\npu1 = 0.7, 0\nrelay_candidates = 0.6, 0").is_err());
    }

    #[test]
    fn counts_accept_scientific_notation() {
        assert_eq!(parse("seed = 1\ntrials = 1e6").unwrap().trials, 1_000_000);
        assert_eq!(parse("seed = 1\ntrials = 2_000").unwrap().trials, 2_000);
    }
}
