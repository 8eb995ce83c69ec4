//! Line-oriented `key = value` experiment configs.
//!
//! ```text
//! # uniform values, log-shift service
//! name = uniform-log
//! scenario.value = uniform(0, 10)
//! scenario.service = dependent(log-shift, 1)
//! scenario.descend = linear
//! scenario.deadline = 3
//! scenario.disciplines = M/GI/1/1, M/GI/1/2, M/GI/1/2*
//! scenario.policies = serve-all
//! scenario.lambda_grid = log:0.1:5:20
//! run.engines = analytic, simulate
//! run.n_packets = 1000000
//! run.seed = 1
//! ```

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use voi_lab::sim::DEFAULT_PACKETS;
use voi_lab::{
    Admission, DescendFunction, DescendKind, Discipline, InitialValueDist, Scenario, ServiceDist, ServiceMap,
    ServiceModel,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError {
        line,
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Engine {
    Analytic,
    ClosedForm,
    Simulate,
}

impl Engine {
    pub const ALL: [Engine; 3] = [Engine::Analytic, Engine::ClosedForm, Engine::Simulate];
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Analytic => "analytic",
            Engine::ClosedForm => "closed-form",
            Engine::Simulate => "simulate",
        })
    }
}

impl FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "analytic" => Ok(Engine::Analytic),
            "closed-form" => Ok(Engine::ClosedForm),
            "simulate" => Ok(Engine::Simulate),
            other => Err(format!("unknown engine '{other}'")),
        }
    }
}

/// Everything about a scenario except the arrival rate, discipline and
/// admission policy, which the sweep varies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioTemplate {
    pub value_dist: InitialValueDist,
    pub service: ServiceModel,
    pub descend: DescendFunction,
}

impl ScenarioTemplate {
    pub fn instantiate(&self, lambda: f64, discipline: Discipline, admission: Admission) -> voi_lab::Result<Scenario> {
        Scenario::new(lambda, self.value_dist, self.service, self.descend, discipline, admission)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: Option<String>,
    pub template: ScenarioTemplate,
    pub disciplines: Vec<Discipline>,
    pub policies: Vec<Admission>,
    pub lambda_grid: Vec<f64>,
    pub engines: Vec<Engine>,
    pub n_packets: u64,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub sample_voi_every: Option<f64>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.lambda_grid.is_empty() {
            return Err("lambda grid is empty".into());
        }
        if self.engines.is_empty() {
            return Err("no engines selected".into());
        }
        if self.disciplines.is_empty() || self.policies.is_empty() {
            return Err("no disciplines or no policies selected".into());
        }
        if self.n_packets == 0 {
            return Err("n_packets must be at least 1".into());
        }
        for &lambda in &self.lambda_grid {
            for &d in &self.disciplines {
                for &p in &self.policies {
                    self.template.instantiate(lambda, d, p).map_err(|e| e.to_string())?;
                }
            }
        }
        Ok(())
    }

    /// Renders the config in the format [`parse`] reads.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| out.push_str(&format!("{k} = {v}\n"));
        if let Some(name) = &self.name {
            line("name", name.clone());
        }
        line("scenario.value", format_value(&self.template.value_dist));
        line("scenario.service", format_service(&self.template.service));
        line("scenario.descend", format_descend(self.template.descend.kind()));
        line("scenario.deadline", self.template.descend.deadline().to_string());
        line("scenario.disciplines", join(&self.disciplines));
        line("scenario.policies", join(&self.policies));
        line("scenario.lambda_grid", join(&self.lambda_grid));
        line("run.engines", join(&self.engines));
        line("run.n_packets", self.n_packets.to_string());
        if let Some(seed) = self.seed {
            line("run.seed", seed.to_string());
        }
        if let Some(out) = &self.output {
            line("run.output", out.display().to_string());
        }
        if let Some(dt) = self.sample_voi_every {
            line("run.sample_voi_every", dt.to_string());
        }
        out
    }
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(", ")
}

fn format_value(v: &InitialValueDist) -> String {
    match *v {
        InitialValueDist::Uniform { min, max } => format!("uniform({min}, {max})"),
        InitialValueDist::Exponential { rate } => format!("exponential({rate})"),
        InitialValueDist::Binary { v1, v2, p } => format!("binary({v1}, {v2}, {p})"),
    }
}

fn format_service(s: &ServiceModel) -> String {
    match *s {
        ServiceModel::Dependent(ServiceMap::Identity) => "dependent(identity)".into(),
        ServiceModel::Dependent(ServiceMap::LogShift { a }) => format!("dependent(log-shift, {a})"),
        ServiceModel::Independent(ServiceDist::Exponential { rate }) => format!("independent(exponential, {rate})"),
        ServiceModel::Independent(ServiceDist::Deterministic { s0 }) => format!("independent(deterministic, {s0})"),
        ServiceModel::ClassConditionalExponential => "class-exponential".into(),
    }
}

fn format_descend(k: DescendKind) -> String {
    match k {
        DescendKind::Linear => "linear".into(),
        DescendKind::PowerConcave(k) => format!("concave({k})"),
        DescendKind::PowerConvex(k) => format!("convex({k})"),
    }
}

/// `name(a, b, ...)` or a bare `name`.
fn call(text: &str) -> Result<(&str, Vec<&str>), String> {
    let text = text.trim();
    match text.find('(') {
        None => Ok((text, Vec::new())),
        Some(open) => {
            let inner = text[open + 1..]
                .strip_suffix(')')
                .ok_or_else(|| format!("missing ')' in '{text}'"))?;
            let args = inner.split(',').map(str::trim).filter(|a| !a.is_empty()).collect();
            Ok((text[..open].trim(), args))
        }
    }
}

fn number(s: &str) -> Result<f64, String> {
    let x: f64 = s.trim().parse().map_err(|_| format!("'{s}' is not a number"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("'{s}' is not finite"))
    }
}

fn numbers<const N: usize>(name: &str, args: &[&str]) -> Result<[f64; N], String> {
    if args.len() != N {
        return Err(format!("{name} takes {N} argument(s), got {}", args.len()));
    }
    let mut out = [0.0; N];
    for (o, a) in out.iter_mut().zip(args) {
        *o = number(a)?;
    }
    Ok(out)
}

pub fn parse_value(text: &str) -> Result<InitialValueDist, String> {
    let (name, args) = call(text)?;
    let dist = match name {
        "uniform" => {
            let [min, max] = numbers("uniform", &args)?;
            InitialValueDist::uniform(min, max)
        }
        "exponential" => {
            let [rate] = numbers("exponential", &args)?;
            InitialValueDist::exponential(rate)
        }
        "binary" => {
            let [v1, v2, p] = numbers("binary", &args)?;
            InitialValueDist::binary(v1, v2, p)
        }
        other => return Err(format!("unknown value distribution '{other}'")),
    };
    dist.map_err(|e| e.to_string())
}

pub fn parse_service(text: &str) -> Result<ServiceModel, String> {
    let (name, args) = call(text)?;
    let model = match (name, args.as_slice()) {
        ("dependent", ["identity"]) => ServiceModel::Dependent(ServiceMap::Identity),
        ("dependent", ["log-shift", a]) => ServiceModel::Dependent(ServiceMap::LogShift { a: number(a)? }),
        ("independent", ["exponential", rate]) => {
            ServiceModel::Independent(ServiceDist::Exponential { rate: number(rate)? })
        }
        ("independent", ["deterministic", s0]) => {
            ServiceModel::Independent(ServiceDist::Deterministic { s0: number(s0)? })
        }
        ("class-exponential", []) => ServiceModel::ClassConditionalExponential,
        _ => return Err(format!("unknown service model '{}'", text.trim())),
    };
    model.validate().map_err(|e| e.to_string())?;
    Ok(model)
}

pub fn parse_descend(text: &str) -> Result<DescendKind, String> {
    let (name, args) = call(text)?;
    match name {
        "linear" if args.is_empty() => Ok(DescendKind::Linear),
        "concave" => Ok(DescendKind::PowerConcave(numbers::<1>("concave", &args)?[0])),
        "convex" => Ok(DescendKind::PowerConvex(numbers::<1>("convex", &args)?[0])),
        _ => Err(format!("unknown descend function '{}'", text.trim())),
    }
}

/// `a:b:step`, `log:a:b:n` or a comma-separated list.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, String> {
    let text = text.trim();
    let parts: Vec<&str> = text.split(':').collect();
    let grid = match parts.as_slice() {
        ["log", a, b, n] => {
            let (a, b) = (number(a)?, number(b)?);
            let n: usize = n.trim().parse().map_err(|_| format!("'{n}' is not a point count"))?;
            if !(a > 0.0 && b > a) || n < 2 {
                return Err("log grid needs 0 < a < b and at least 2 points".into());
            }
            let (la, lb) = (a.ln(), b.ln());
            (0..n)
                .map(|i| match i {
                    0 => a,
                    i if i == n - 1 => b,
                    i => (la + (lb - la) * i as f64 / (n - 1) as f64).exp(),
                })
                .collect()
        }
        [a, b, step] => {
            let (a, b, step) = (number(a)?, number(b)?, number(step)?);
            if !(step > 0.0 && b >= a) {
                return Err("range grid needs a <= b and a positive step".into());
            }
            let n = ((b - a) / step + 1e-9).floor() as usize;
            (0..=n).map(|i| a + step * i as f64).collect()
        }
        [_] => text.split(',').map(number).collect::<Result<Vec<_>, _>>()?,
        _ => return Err(format!("cannot read lambda grid '{text}'")),
    };
    if grid.is_empty() {
        return Err("lambda grid is empty".into());
    }
    if let Some(bad) = grid.iter().find(|&&l| l <= 0.0) {
        return Err(format!("arrival rates must be positive, got {bad}"));
    }
    Ok(grid)
}

fn list<T: FromStr>(text: &str) -> Result<Vec<T>, String>
where
    T::Err: fmt::Display,
{
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|e| e.to_string()))
        .collect()
}

pub fn parse(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut name = None;
    let mut value = None;
    let mut service = None;
    let mut descend = DescendKind::Linear;
    let mut deadline = None;
    let mut disciplines = Discipline::ALL.to_vec();
    let mut policies = vec![Admission::ServeAll];
    let mut grid = None;
    let mut engines = vec![Engine::Analytic, Engine::Simulate];
    let mut n_packets = DEFAULT_PACKETS;
    let mut seed = None;
    let mut output = None;
    let mut sample_voi_every = None;
    let mut seen = std::collections::HashSet::new();

    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, val) = line.split_once('=').ok_or_else(|| err(n, format!("expected 'key = value', got '{line}'")))?;
        let (key, val) = (key.trim(), val.trim());
        if !seen.insert(key.to_string()) {
            return Err(err(n, format!("duplicate key '{key}'")));
        }
        let at = |e: String| err(n, e);
        match key {
            "name" => name = Some(val.to_string()),
            "scenario.value" => value = Some(parse_value(val).map_err(at)?),
            "scenario.service" => service = Some(parse_service(val).map_err(at)?),
            "scenario.descend" => descend = parse_descend(val).map_err(at)?,
            "scenario.deadline" => deadline = Some(number(val).map_err(at)?),
            "scenario.disciplines" => disciplines = list(val).map_err(at)?,
            "scenario.policies" => policies = list(val).map_err(at)?,
            "scenario.lambda_grid" => grid = Some(parse_grid(val).map_err(at)?),
            "run.engines" => engines = list(val).map_err(at)?,
            "run.n_packets" => {
                n_packets = val.replace('_', "").parse().map_err(|_| err(n, format!("bad packet count '{val}'")))?
            }
            "run.seed" => seed = Some(val.parse().map_err(|_| err(n, format!("bad seed '{val}'")))?),
            "run.output" => output = Some(PathBuf::from(val)),
            "run.sample_voi_every" => sample_voi_every = Some(number(val).map_err(at)?),
            other => return Err(err(n, format!("unknown key '{other}'"))),
        }
    }

    let end = text.lines().count();
    let value_dist = value.ok_or_else(|| err(end, "missing scenario.value"))?;
    let service = service.ok_or_else(|| err(end, "missing scenario.service"))?;
    let deadline = deadline.ok_or_else(|| err(end, "missing scenario.deadline"))?;
    let descend = DescendFunction::new(descend, deadline).map_err(|e| err(end, e.to_string()))?;
    let config = ExperimentConfig {
        name,
        template: ScenarioTemplate {
            value_dist,
            service,
            descend,
        },
        disciplines,
        policies,
        lambda_grid: grid.ok_or_else(|| err(end, "missing scenario.lambda_grid"))?,
        engines,
        n_packets,
        seed,
        output,
        sample_voi_every,
    };
    config.validate().map_err(|e| err(end, e))?;
    Ok(config)
}
