//! Subcommand bodies: each produces a CSV document with `#` metadata lines.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use anyhow::{Context, Result};

use cogrelay::analysis::{outage_mc, rate_curve, Policy, Side};
use cogrelay::mathkernel::NumericTolerance;
use cogrelay::power::{Scenario, SolvedScenario};

use crate::config::ExperimentConfig;
use crate::validate::{run_all, Budget};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    OutageBs,
    OutageSu,
    Rate,
    WaterLevel,
    Validate,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::OutageBs => "outage-bs",
            Experiment::OutageSu => "outage-su",
            Experiment::Rate => "rate",
            Experiment::WaterLevel => "water-level",
            Experiment::Validate => "validate",
        }
    }
}

pub const OUTAGE_COLUMNS: [&str; 11] = [
    "gamma_bar_db",
    "w_db",
    "cci_db",
    "gamma_th",
    "side",
    "p_out",
    "ci_halfwidth",
    "lower_bound",
    "upper_bound",
    "trials",
    "excluded_draws",
];

pub const RATE_COLUMNS: [&str; 8] =
    ["gamma_bar_db", "w_db", "cci_db", "policy", "rate_eq11", "rate_endtoend", "ci_halfwidth", "trials"];

pub const WATER_LEVEL_COLUMNS: [&str; 9] = [
    "gamma_bar_db",
    "w_db",
    "cci_db",
    "lambda",
    "constraint_residual",
    "closed_form_printed",
    "printed_deviation",
    "closed_form_unit_sir",
    "unit_sir_deviation",
];

pub const VALIDATE_COLUMNS: [&str; 6] = ["criterion", "check", "value", "limit", "passed", "gate"];

/// A finished table and whether every gating check in it passed.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub csv: String,
    pub passed: bool,
}

fn num(x: f64) -> String {
    format!("{x:?}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn table<const N: usize>(columns: [&str; N], rows: Vec<Vec<String>>) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(columns)?;
    for r in rows {
        w.write_record(r)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?)?)
}

fn metadata(exp: Experiment, cfg: &ExperimentConfig, solved: &SolvedScenario) -> String {
    let mut m = String::new();
    let g = &cfg.geometry;
    let _ = writeln!(m, "# command = {}", exp.name());
    let _ = writeln!(m, "# seed = {}", cfg.seed);
    let _ = writeln!(m, "# trials = {}", cfg.trials);
    let _ = writeln!(
        m,
        "# geometry = s {:?} l {:?} r {:?} q {:?} z {:?} d {:?} epsilon {:?}",
        g.s(),
        g.l(),
        g.r(),
        g.q(),
        g.z(),
        g.d(),
        g.epsilon()
    );
    let _ = writeln!(m, "# lambda = {:?}", solved.lambda());
    let _ = writeln!(m, "# constraint_residual = {:?}", solved.water_level().residual);
    match solved.closed_form_check() {
        Some(r) => {
            let _ = writeln!(m, "# closed_form_residual = {:?}", r.unit_sir_deviation);
            let _ = writeln!(m, "# closed_form_printed_residual = {:?}", r.printed_deviation);
        }
        None => {
            let _ = writeln!(m, "# closed_form_residual = n/a (equal interferer distances)");
        }
    }
    m
}

pub fn solve_config(cfg: &ExperimentConfig) -> Result<SolvedScenario> {
    Scenario::new(cfg.geometry, cfg.power).solve(&NumericTolerance::ROOT).context("solving the water level")
}

pub fn run_experiment(exp: Experiment, cfg: &ExperimentConfig) -> Result<Report> {
    let solved = solve_config(cfg)?;
    let p = &cfg.power;
    let mut passed = true;
    let body = match exp {
        Experiment::OutageBs | Experiment::OutageSu => {
            let side = if exp == Experiment::OutageBs { Side::Bs } else { Side::Su };
            let mut rows = Vec::new();
            for &db in &cfg.sir_grid_db {
                let e = outage_mc(&solved.at_gamma_bar(db), cfg.gamma_th, side, cfg.trials, cfg.seed)
                    .with_context(|| format!("outage at {db} dB"))?;
                rows.push(vec![
                    num(db),
                    num(p.w_db),
                    num(p.p_cci_db),
                    num(cfg.gamma_th),
                    side.to_string(),
                    num(e.p_out),
                    num(e.ci_halfwidth),
                    opt(e.lower_bound),
                    opt(e.upper_bound),
                    e.trials.to_string(),
                    e.excluded_draws.to_string(),
                ]);
            }
            table(OUTAGE_COLUMNS, rows)?
        }
        Experiment::Rate => {
            let curves = [Policy::Optimal, Policy::Fixed]
                .map(|policy| rate_curve(&solved, policy, &cfg.sir_grid_db, cfg.trials, cfg.seed));
            let [opt_curve, fixed_curve] = curves;
            let (opt_curve, fixed_curve) =
                (opt_curve.context("optimal-power rate")?, fixed_curve.context("fixed-power rate")?);
            let mut rows = Vec::new();
            for (o, f) in opt_curve.iter().zip(&fixed_curve) {
                for r in [o, f] {
                    rows.push(vec![
                        num(r.sir_db),
                        num(p.w_db),
                        num(p.p_cci_db),
                        r.policy.to_string(),
                        num(r.rate_bps_hz),
                        num(r.rate_endtoend),
                        num(r.ci_halfwidth),
                        r.trials.to_string(),
                    ]);
                }
            }
            table(RATE_COLUMNS, rows)?
        }
        Experiment::WaterLevel => {
            let mut rows = Vec::new();
            for &db in &cfg.sir_grid_db {
                let s = solved.at_gamma_bar(db);
                let c = s.closed_form_check();
                rows.push(vec![
                    num(db),
                    num(p.w_db),
                    num(p.p_cci_db),
                    num(s.lambda()),
                    num(s.water_level().residual),
                    opt(c.map(|c| c.printed_value)),
                    opt(c.map(|c| c.printed_deviation)),
                    opt(c.map(|c| c.unit_sir_value)),
                    opt(c.map(|c| c.unit_sir_deviation)),
                ]);
            }
            table(WATER_LEVEL_COLUMNS, rows)?
        }
        Experiment::Validate => {
            let checks = run_all(&Budget::uniform(cfg.seed, cfg.trials))?;
            passed = checks.iter().all(|c| c.passed || !c.gate);
            let rows = checks
                .into_iter()
                .map(|c| {
                    vec![
                        c.criterion.to_string(),
                        c.name,
                        num(c.value),
                        num(c.limit),
                        c.passed.to_string(),
                        c.gate.to_string(),
                    ]
                })
                .collect();
            table(VALIDATE_COLUMNS, rows)?
        }
    };
    Ok(Report { csv: metadata(exp, cfg, &solved) + &body, passed })
}

/// Writes `contents` through a sibling temporary file so that `path` only
/// ever holds a complete table.
pub fn write_atomically(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let name = path.file_name().context("output path has no file name")?.to_string_lossy();
    let tmp = dir.join(format!(".{name}.partial"));
    let result = (|| -> Result<()> {
        let mut f = fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, path).with_context(|| format!("moving output to {}", path.display()))?;
        Ok(())
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{parse_config, Overrides};

    fn cfg(extra: &str) -> ExperimentConfig {
        parse_config(&format!("seed = 11\ntrials = 20000\nsir_grid_db = 0:20:40\n{extra}"), &Overrides::default())
            .unwrap()
    }

    fn data_rows(csv: &str) -> Vec<Vec<String>> {
        csv.lines().filter(|l| !l.starts_with('#')).skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
    }

    #[test]
    fn outage_table_has_documented_shape() {
        let r = run_experiment(Experiment::OutageBs, &cfg("")).unwrap();
        assert!(r.csv.contains("# seed = 11\n"));
        assert!(r.csv.contains("# lambda = "));
        assert!(r.csv.contains("# closed_form_residual = "));
        let header = r.csv.lines().find(|l| !l.starts_with('#')).unwrap();
        assert_eq!(header, OUTAGE_COLUMNS.join(","));
        let rows = data_rows(&r.csv);
        assert_eq!(rows.len(), 3);
        for row in rows {
            let p: f64 = row[5].parse().unwrap();
            assert!((0.0..=1.0).contains(&p));
            assert_eq!(row[4], "bs");
        }
    }

    #[test]
    fn rate_rows_alternate_policies_and_optimal_wins() {
        let mut c = cfg("");
        c.trials = 100_000;
        let r = run_experiment(Experiment::Rate, &c).unwrap();
        let rows = data_rows(&r.csv);
        assert_eq!(rows.len(), 6);
        for pair in rows.chunks(2) {
            assert_eq!((pair[0][3].as_str(), pair[1][3].as_str()), ("optimal", "fixed"));
            let (o, f): (f64, f64) = (pair[0][4].parse().unwrap(), pair[1][4].parse().unwrap());
            assert!(o >= f && f >= 0.0);
        }
    }

    #[test]
    fn water_level_table_reports_closed_form() {
        let r = run_experiment(Experiment::WaterLevel, &cfg("")).unwrap();
        let rows = data_rows(&r.csv);
        assert_eq!(rows.len(), 3);
        let lambdas: Vec<&String> = rows.iter().map(|r| &r[3]).collect();
        assert!(lambdas.windows(2).all(|w| w[0] == w[1]));
        let dev: f64 = rows[0][8].parse().unwrap();
        let w: f64 = 10f64.powf(0.5);
        assert!(dev.abs() < 1e-6 * w);
    }

    #[test]
    fn too_few_trials_is_an_error() {
        let mut c = cfg("");
        c.trials = 50;
        assert!(run_experiment(Experiment::OutageSu, &c).is_err());
    }

    #[test]
    fn atomic_write_leaves_no_partial_file() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("t.csv");
        write_atomically(&out, "a,b\n").unwrap();
        assert_eq!(fs::read_to_string(&out).unwrap(), "a,b\n");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
        assert!(write_atomically(&dir.path().join("missing/t.csv"), "x").is_err());
    }
}
