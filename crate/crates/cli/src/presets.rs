//! Built-in experiment configs.

use crate::config::{parse, ExperimentConfig};

pub struct Preset {
    pub name: &'static str,
    pub summary: &'static str,
    pub text: &'static str,
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "uniform-log",
        summary: "Uniform(0, 10) values, service ln(1 + v), three disciplines",
        text: "name = uniform-log
scenario.value = uniform(0, 10)
scenario.service = dependent(log-shift, 1)
scenario.descend = linear
scenario.deadline = 3
scenario.disciplines = M/GI/1/1, M/GI/1/2, M/GI/1/2*
scenario.policies = serve-all
scenario.lambda_grid = log:0.1:5:20
run.engines = analytic, simulate
",
    },
    Preset {
        name: "uniform-log-closed",
        summary: "uniform-log without buffer, closed form against quadrature",
        text: "name = uniform-log-closed
scenario.value = uniform(0, 10)
scenario.service = dependent(log-shift, 1)
scenario.descend = linear
scenario.deadline = 3
scenario.disciplines = M/GI/1/1
scenario.policies = serve-all
scenario.lambda_grid = log:0.1:5:20
run.engines = closed-form, analytic
",
    },
    Preset {
        name: "exponential-dependent",
        summary: "Exp(1.5) values served in time equal to their value",
        text: "name = exponential-dependent
scenario.value = exponential(1.5)
scenario.service = dependent(identity)
scenario.descend = linear
scenario.deadline = 3
scenario.disciplines = M/GI/1/1, M/GI/1/2, M/GI/1/2*
scenario.policies = serve-all
scenario.lambda_grid = log:0.1:5:20
run.engines = analytic, simulate
",
    },
    Preset {
        name: "exponential-independent",
        summary: "Exp(1.5) values with independent Exp(1.5) service",
        text: "name = exponential-independent
scenario.value = exponential(1.5)
scenario.service = independent(exponential, 1.5)
scenario.descend = linear
scenario.deadline = 3
scenario.disciplines = M/GI/1/1, M/GI/1/2, M/GI/1/2*
scenario.policies = serve-all
scenario.lambda_grid = log:0.1:5:20
run.engines = analytic, simulate
",
    },
    Preset {
        name: "binary-dependent",
        summary: "two classes (0.4 w.p. 0.8, 1.33), service Exp with mean equal to the value, three policies",
        text: "name = binary-dependent
scenario.value = binary(0.4, 1.33, 0.8)
scenario.service = class-exponential
scenario.descend = linear
scenario.deadline = 3
scenario.disciplines = M/GI/1/1
scenario.policies = serve-all, class-only(1), class-only(2)
scenario.lambda_grid = log:0.1:5:20
run.engines = analytic, simulate
",
    },
    Preset {
        name: "binary-independent",
        summary: "two classes (0.4 w.p. 0.8, 1.33), independent Exp(1.5) service, three policies",
        text: "name = binary-independent
scenario.value = binary(0.4, 1.33, 0.8)
scenario.service = independent(exponential, 1.5)
scenario.descend = linear
scenario.deadline = 3
scenario.disciplines = M/GI/1/1
scenario.policies = serve-all, class-only(1), class-only(2)
scenario.lambda_grid = log:0.1:5:20
run.engines = analytic, simulate
",
    },
    Preset {
        name: "aoi-voi",
        summary: "Exp(1.5) values, identity service: VoI and simulated AoI for three disciplines",
        text: "name = aoi-voi
scenario.value = exponential(1.5)
scenario.service = dependent(identity)
scenario.descend = linear
scenario.deadline = 3
scenario.disciplines = M/GI/1/1, M/GI/1/2, M/GI/1/2*
scenario.policies = serve-all
scenario.lambda_grid = log:0.1:5:20
run.engines = analytic, simulate
",
    },
    Preset {
        name: "mm12-closed",
        summary: "one FCFS slot with Exp(1.5) values: closed form, quadrature and simulation",
        text: "name = mm12-closed
scenario.value = exponential(1.5)
scenario.service = dependent(identity)
scenario.descend = linear
scenario.deadline = 3
scenario.disciplines = M/GI/1/2
scenario.policies = serve-all
scenario.lambda_grid = 0.5, 1, 2
run.engines = closed-form, analytic, simulate
",
    },
];

pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

pub fn load(name: &str) -> Option<ExperimentConfig> {
    find(name).map(|p| parse(p.text).expect("built-in preset parses"))
}

/// Presets behind the standard sweeps.
pub const FIGURE_PRESETS: &[&str] = &[
    "uniform-log",
    "exponential-dependent",
    "exponential-independent",
    "binary-dependent",
    "binary-independent",
    "aoi-voi",
];
