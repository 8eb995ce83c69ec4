//! Cross-checks analytic rows of a CSV against their simulated counterparts.

use std::collections::HashMap;
use std::fmt;
use std::io::Read;

use crate::experiment::{RunError, UNSUPPORTED};

pub const DEFAULT_SIGMAS: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Pass,
    Fail,
    /// No simulated counterpart, or a point without a value.
    Skipped(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub lambda: String,
    pub discipline: String,
    pub policy: String,
    pub engine: String,
    pub expected: Option<f64>,
    pub simulated: Option<f64>,
    pub stderr: Option<f64>,
    pub verdict: Verdict,
}

impl Comparison {
    pub fn relative_deviation(&self) -> Option<f64> {
        match (self.expected, self.simulated) {
            (Some(e), Some(s)) if e != 0.0 => Some((s - e).abs() / e.abs()),
            (Some(e), Some(s)) => Some((s - e).abs()),
            _ => None,
        }
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match &self.verdict {
            Verdict::Pass => "PASS".to_string(),
            Verdict::Fail => "FAIL".to_string(),
            Verdict::Skipped(why) => format!("SKIP ({why})"),
        };
        write!(f, "{tag} lambda={} {} {} {}", self.lambda, self.discipline, self.policy, self.engine)?;
        if let (Some(e), Some(s), Some(se)) = (self.expected, self.simulated, self.stderr) {
            write!(f, " expected={e:.6} simulated={s:.6} stderr={se:.2e}")?;
            if let Some(d) = self.relative_deviation() {
                write!(f, " rel_dev={d:.3e}")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub comparisons: Vec<Comparison>,
}

impl Summary {
    pub fn count(&self, pred: impl Fn(&Verdict) -> bool) -> usize {
        self.comparisons.iter().filter(|c| pred(&c.verdict)).count()
    }

    pub fn passed(&self) -> bool {
        self.count(|v| *v == Verdict::Fail) == 0
    }
}

struct Record {
    key: (String, String, String),
    engine: String,
    avg_voi: String,
    stderr: String,
}

fn parse_opt(s: &str) -> Option<f64> {
    s.trim().parse().ok()
}

/// Pairs every analytic and closed-form row with the simulated row of the
/// same point and checks `|expected - simulated| <= sigmas * stderr`.
pub fn compare_engines<R: Read>(csv_input: R, sigmas: f64) -> Result<Summary, RunError> {
    let mut reader = csv::Reader::from_reader(csv_input);
    let headers = reader.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| RunError::Invalid(format!("CSV lacks the '{name}' column")))
    };
    let [lambda, discipline, policy, engine, avg_voi, stderr] =
        ["lambda", "discipline", "policy", "engine", "avg_voi", "stderr"].map(col);
    let (lambda, discipline, policy, engine, avg_voi, stderr) =
        (lambda?, discipline?, policy?, engine?, avg_voi?, stderr?);

    let mut records = Vec::new();
    for row in reader.records() {
        let row = row?;
        let get = |i: usize| row.get(i).unwrap_or("").to_string();
        records.push(Record {
            key: (get(lambda), get(discipline), get(policy)),
            engine: get(engine),
            avg_voi: get(avg_voi),
            stderr: get(stderr),
        });
    }
    let simulated: HashMap<&(String, String, String), &Record> =
        records.iter().filter(|r| r.engine == "simulate").map(|r| (&r.key, r)).collect();

    let mut comparisons = Vec::new();
    for r in records.iter().filter(|r| r.engine != "simulate") {
        let sim = simulated.get(&r.key);
        let expected = parse_opt(&r.avg_voi);
        let (sim_value, sim_se) = sim.map_or((None, None), |s| (parse_opt(&s.avg_voi), parse_opt(&s.stderr)));
        let verdict = if r.avg_voi == UNSUPPORTED {
            Verdict::Skipped("unsupported".into())
        } else if sim.is_none() {
            Verdict::Skipped("no simulated row".into())
        } else {
            match (expected, sim_value, sim_se) {
                (Some(e), Some(s), Some(se)) => {
                    let diff = (e - s).abs();
                    if diff == 0.0 || diff <= sigmas * se {
                        Verdict::Pass
                    } else {
                        Verdict::Fail
                    }
                }
                _ => Verdict::Fail,
            }
        };
        comparisons.push(Comparison {
            lambda: r.key.0.clone(),
            discipline: r.key.1.clone(),
            policy: r.key.2.clone(),
            engine: r.engine.clone(),
            expected,
            simulated: sim_value,
            stderr: sim_se,
            verdict,
        });
    }
    Ok(Summary { comparisons })
}
