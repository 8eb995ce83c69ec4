//! Sweeps a config over its grid and writes one CSV row per
//! (lambda, discipline, policy, engine).

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use voi_lab::analytics::{self, AnalyticReport};
use voi_lab::sim::{simulate, ServerState, SimConfig};
use voi_lab::{Admission, Discipline, Error};

use crate::config::{Engine, ExperimentConfig};

pub const DEFAULT_SEED: u64 = 1;
pub const SEED_ENV: &str = "VOI_LAB_SEED";

pub const HEADER: [&str; 12] = [
    "lambda",
    "discipline",
    "policy",
    "engine",
    "avg_voi",
    "avg_aoi",
    "stderr",
    "p_idle",
    "p_busy1",
    "p_busy2",
    "seed",
    "runtime_ms",
];

/// Written in the `avg_voi` column when an engine cannot evaluate a point.
pub const UNSUPPORTED: &str = "unsupported";

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Value {
        avg_voi: f64,
        avg_aoi: Option<f64>,
        stderr: Option<f64>,
        p_idle: f64,
        p_busy1: f64,
        p_busy2: f64,
    },
    Unsupported,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub lambda: f64,
    pub discipline: Discipline,
    pub policy: Admission,
    pub engine: Engine,
    pub outcome: Outcome,
    pub seed: u64,
    pub runtime_ms: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{context}: {source}")]
    Numeric { context: String, source: Error },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Seed precedence: explicit flag, then the config, then `VOI_LAB_SEED`,
/// then [`DEFAULT_SEED`].
pub fn resolve_seed(flag: Option<u64>, config: &ExperimentConfig) -> Result<u64, RunError> {
    if let Some(s) = flag.or(config.seed) {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| RunError::Invalid(format!("{SEED_ENV}='{v}' is not a 64-bit unsigned integer"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn from_report(r: &AnalyticReport) -> Outcome {
    Outcome::Value {
        avg_voi: r.avg_voi,
        avg_aoi: None,
        stderr: None,
        p_idle: r.p_idle,
        p_busy1: r.p_busy1,
        p_busy2: r.p_busy2,
    }
}

fn analytic_outcome(result: voi_lab::Result<AnalyticReport>, context: &str) -> Result<Outcome, RunError> {
    match result {
        Ok(r) => Ok(from_report(&r)),
        Err(Error::Unsupported(_)) => Ok(Outcome::Unsupported),
        Err(e @ Error::NumericFailure { .. }) => Err(RunError::Numeric {
            context: context.to_string(),
            source: e,
        }),
        Err(e) => Err(RunError::Invalid(format!("{context}: {e}"))),
    }
}

fn run_point(
    config: &ExperimentConfig,
    seed: u64,
    lambda: f64,
    discipline: Discipline,
    policy: Admission,
    engine: Engine,
) -> Result<Row, RunError> {
    let start = Instant::now();
    let scenario = config
        .template
        .instantiate(lambda, discipline, policy)
        .map_err(|e| RunError::Invalid(e.to_string()))?;
    let context = format!("{engine} at lambda={lambda}, {discipline}, {policy}");
    let outcome = match engine {
        Engine::Analytic => analytic_outcome(analytics::avg_voi(&scenario), &context)?,
        Engine::ClosedForm => analytic_outcome(analytics::closed_form(&scenario), &context)?,
        Engine::Simulate => {
            let mut sim = SimConfig::new(scenario, config.n_packets, seed);
            sim.sample_voi_every = config.sample_voi_every;
            let r = simulate(&sim).map_err(|e| RunError::Invalid(format!("{context}: {e}")))?;
            Outcome::Value {
                avg_voi: r.avg_voi.mean,
                avg_aoi: Some(r.avg_aoi.mean),
                stderr: Some(r.avg_voi.stderr),
                p_idle: r.occupancy.get(ServerState::Idle).mean,
                p_busy1: r.occupancy.get(ServerState::Busy1).mean,
                p_busy2: r.occupancy.get(ServerState::Busy2).mean,
            }
        }
    };
    Ok(Row {
        lambda,
        discipline,
        policy,
        engine,
        outcome,
        seed,
        runtime_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Runs every grid point, up to `jobs` at a time. Rows come back in grid
/// order: lambda, then discipline, then policy, then engine.
pub fn run_experiment(config: &ExperimentConfig, seed: u64, jobs: usize) -> Result<Vec<Row>, RunError> {
    config.validate().map_err(RunError::Invalid)?;
    let mut points = Vec::new();
    for &lambda in &config.lambda_grid {
        for &d in &config.disciplines {
            for &p in &config.policies {
                for &e in &config.engines {
                    points.push((lambda, d, p, e));
                }
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| RunError::Invalid(e.to_string()))?;
    let results: Vec<Result<Row, RunError>> = pool.install(|| {
        points
            .par_iter()
            .map(|&(lambda, d, p, e)| run_point(config, seed, lambda, d, p, e))
            .collect()
    });
    results.into_iter().collect()
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_csv<W: Write>(rows: &[Row], out: W) -> Result<(), RunError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in rows {
        let mut record = vec![r.lambda.to_string(), r.discipline.to_string(), r.policy.to_string(), r.engine.to_string()];
        match &r.outcome {
            Outcome::Value {
                avg_voi,
                avg_aoi,
                stderr,
                p_idle,
                p_busy1,
                p_busy2,
            } => record.extend([
                avg_voi.to_string(),
                opt(*avg_aoi),
                opt(*stderr),
                p_idle.to_string(),
                p_busy1.to_string(),
                p_busy2.to_string(),
            ]),
            Outcome::Unsupported => {
                record.push(UNSUPPORTED.to_string());
                record.extend(std::iter::repeat_n(String::new(), 5));
            }
        }
        record.push(r.seed.to_string());
        record.push(format!("{:.3}", r.runtime_ms));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Sidecar describing how a CSV was produced; the CSV itself stays plain.
pub fn meta_text(config: &ExperimentConfig, seed: u64) -> String {
    let mut text = String::from("# provenance of the CSV next to this file\n");
    text.push_str(&config.to_text());
    text.push_str(&format!("resolved_seed = {seed}\n"));
    text.push_str("note.seed = every simulated point uses the same seed (common random numbers)\n");
    text.push_str(&format!("note.unsupported = rows with avg_voi = {UNSUPPORTED} have no result for that engine\n"));
    text.push_str("note.stderr = batch-means standard error of avg_voi, simulation rows only\n");
    text.push_str("note.runtime_ms = wall-clock time of the point; not reproducible\n");
    text
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse;

    fn small(engines: &str) -> ExperimentConfig {
        parse(&format!(
            "scenario.value = exponential(1.5)
             scenario.service = dependent(identity)
             scenario.deadline = 3
             scenario.disciplines = M/GI/1/2
             scenario.lambda_grid = 0.5, 1
             run.engines = {engines}
             run.n_packets = 2000"
        ))
        .unwrap()
    }

    #[test]
    fn rows_follow_grid_order() {
        let rows = run_experiment(&small("closed-form, analytic, simulate"), 3, 4).unwrap();
        let keys: Vec<(f64, Engine)> = rows.iter().map(|r| (r.lambda, r.engine)).collect();
        assert_eq!(
            keys,
            vec![
                (0.5, Engine::ClosedForm),
                (0.5, Engine::Analytic),
                (0.5, Engine::Simulate),
                (1.0, Engine::ClosedForm),
                (1.0, Engine::Analytic),
                (1.0, Engine::Simulate),
            ]
        );
        match &rows[3].outcome {
            Outcome::Value { avg_voi, .. } => assert!((avg_voi - 0.260_69).abs() < 1e-5),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unsupported_points_are_marked() {
        let mut c = small("closed-form");
        c.disciplines = vec![Discipline::Mg11];
        let rows = run_experiment(&c, 1, 1).unwrap();
        assert!(rows.iter().all(|r| r.outcome == Outcome::Unsupported));
        let mut out = Vec::new();
        write_csv(&rows, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.lines().nth(1).unwrap().contains(",unsupported,,,,,,1,"), "{text}");
    }

    #[test]
    fn numeric_failures_abort() {
        let failure = Error::NumericFailure {
            reason: "test".into(),
            lo: 0.0,
            hi: 1.0,
            error: 1.0,
        };
        assert!(matches!(analytic_outcome(Err(failure), "here"), Err(RunError::Numeric { .. })));
        let unsupported = Error::Unsupported("test".into());
        assert_eq!(analytic_outcome(Err(unsupported), "here").unwrap(), Outcome::Unsupported);
    }

    #[test]
    fn seed_precedence() {
        let mut c = small("analytic");
        assert_eq!(resolve_seed(Some(5), &c).unwrap(), 5);
        c.seed = Some(6);
        assert_eq!(resolve_seed(None, &c).unwrap(), 6);
        assert_eq!(resolve_seed(Some(5), &c).unwrap(), 5);
    }
}
