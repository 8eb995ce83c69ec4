//! Closed-form average VoI for two special cases: the bufferless queue with
//! uniform values and logarithmic service map, and the one-slot FCFS queue
//! with exponential values served in time equal to their value.

use crate::error::{Error, Result};
use crate::model::{Admission, Discipline, InitialValueDist, Scenario, ServiceMap, ServiceModel};

use super::{AnalyticReport, Method};

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be positive and finite, got {x}")))
    }
}

/// Antiderivative in `x = 1 + v` of `(x - 1) (D - a ln x)^2`.
fn uniform_log_antiderivative(x: f64, a: f64, d: f64) -> f64 {
    let l = x.ln();
    let x2 = x * x;
    let int_x_l0 = x2 / 2.0;
    let int_x_l1 = x2 * l / 2.0 - x2 / 4.0;
    let int_x_l2 = x2 * l * l / 2.0 - x2 * l / 2.0 + x2 / 4.0;
    let int_l0 = x;
    let int_l1 = x * l - x;
    let int_l2 = x * l * l - 2.0 * x * l + 2.0 * x;
    d * d * (int_x_l0 - int_l0) - 2.0 * a * d * (int_x_l1 - int_l1) + a * a * (int_x_l2 - int_l2)
}

/// Bufferless queue, `V ~ Uniform(v_min, v_max)`, `S = a ln(1 + V)`.
pub fn closed_form_mg11_uniform_log(v_min: f64, v_max: f64, a: f64, lambda: f64, deadline: f64) -> Result<AnalyticReport> {
    InitialValueDist::uniform(v_min, v_max)?;
    positive("a", a)?;
    positive("arrival rate", lambda)?;
    positive("deadline", deadline)?;
    let u = v_max - v_min;
    let (x_min, x_max) = (1.0 + v_min, 1.0 + v_max);
    let mean_service = a / u * (x_max * x_max.ln() - x_min * x_min.ln() - u);
    let p_idle = 1.0 / (1.0 + lambda * mean_service);
    let v_up = (deadline / a).exp_m1().min(v_max);
    let eq_idle = if v_up > v_min {
        (uniform_log_antiderivative(1.0 + v_up, a, deadline) - uniform_log_antiderivative(x_min, a, deadline))
            / (2.0 * deadline * u)
    } else {
        0.0
    };
    // E[(1 + V)^(-lambda a)]
    let k = 1.0 - lambda * a;
    let mgf = if k.abs() < 1e-12 {
        (x_max.ln() - x_min.ln()) / u
    } else {
        (x_max.powf(k) - x_min.powf(k)) / (k * u)
    };
    let eq = p_idle * eq_idle;
    Ok(AnalyticReport {
        p_idle,
        p_busy: 1.0 - p_idle,
        p_busy1: 1.0 - p_idle,
        p_busy2: 0.0,
        t_cycle: 1.0 / lambda + mean_service,
        mgf,
        mean_service,
        eq_idle,
        eq_busy: 0.0,
        eq,
        avg_voi: lambda * eq,
        method: Method::ClosedForm,
    })
}

/// The uniform/log closed form exactly as the source formulas print it: the
/// mean service time omits the `-(v_max - v_min)` term of the antiderivative
/// and the area integrand uses `a ln v` in place of `a ln(1 + v)`. Kept only
/// to report how far it lands from the consistent evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrintedUniformLog {
    pub mean_service: f64,
    pub p_idle: f64,
    pub eq: f64,
    pub avg_voi: f64,
}

pub fn uniform_log_as_printed(v_min: f64, v_max: f64, a: f64, lambda: f64, deadline: f64) -> Result<PrintedUniformLog> {
    InitialValueDist::uniform(v_min, v_max)?;
    positive("a", a)?;
    positive("arrival rate", lambda)?;
    positive("deadline", deadline)?;
    // x^2 ln^k x -> 0 as x -> 0
    let x2_log = |x: f64, k: i32| if x == 0.0 { 0.0 } else { x * x * x.ln().powi(k) };
    let u = v_max - v_min;
    let mean_service = a / u * ((v_max + 1.0) * (v_max + 1.0).ln() - (v_min + 1.0) * (v_min + 1.0).ln());
    let p_idle = 1.0 / (1.0 + lambda * mean_service);
    let v_up = (deadline / a).exp_m1().min(v_max);
    let (d, up, lo) = (deadline, v_up, v_min);
    let bracket = d * d * (up * up - lo * lo) / 2.0
        - a * d / 2.0 * ((2.0 * x2_log(up, 1) - up * up) - (2.0 * x2_log(lo, 1) - lo * lo))
        + a * a / 4.0 * (2.0 * x2_log(up, 2) - 2.0 * x2_log(up, 1) + up * up)
        - (2.0 * x2_log(lo, 2) - 2.0 * x2_log(lo, 1) + lo * lo);
    let eq = p_idle / (2.0 * d * u) * bracket;
    Ok(PrintedUniformLog {
        mean_service,
        p_idle,
        eq,
        avg_voi: lambda * eq,
    })
}

/// One-slot FCFS queue with `V ~ Exp(mu)` and `S = V`.
pub fn closed_form_mm12_exp(mu: f64, lambda: f64, deadline: f64) -> Result<AnalyticReport> {
    positive("value rate", mu)?;
    positive("arrival rate", lambda)?;
    positive("deadline", deadline)?;
    let (d, m) = (deadline, mu);
    let x = d * m;
    let decay = (-x).exp();
    let scale = 2.0 * d * m * m * m;
    let eq_idle = (x * x - 4.0 * x + 6.0 - decay * (2.0 * x + 6.0)) / scale;
    let eq_busy = (12.0 + x * x - 6.0 * x - decay * (6.0 * x + x * x + 12.0)) / scale;
    let norm = lambda * lambda + lambda * m + m * m;
    let p_idle = m * m / norm;
    let p_busy1 = lambda * m / norm;
    let p_busy2 = lambda * lambda / norm;
    let eq = eq_idle * p_idle + eq_busy * p_busy1;
    Ok(AnalyticReport {
        p_idle,
        p_busy: 1.0 - p_idle,
        p_busy1,
        p_busy2,
        t_cycle: 1.0 / lambda + (m + lambda) / (m * m),
        mgf: m / (m + lambda),
        mean_service: 1.0 / m,
        eq_idle,
        eq_busy,
        eq,
        avg_voi: lambda * eq,
        method: Method::ClosedForm,
    })
}

/// Closed form for `scenario` when one exists.
pub fn closed_form(scenario: &Scenario) -> Result<AnalyticReport> {
    scenario.validate()?;
    if !scenario.descend.is_linear() || scenario.admission != Admission::ServeAll {
        return Err(Error::Unsupported("no closed form for this scenario".into()));
    }
    let d = scenario.descend.deadline();
    match (scenario.value_dist, scenario.service, scenario.discipline) {
        (InitialValueDist::Uniform { min, max }, ServiceModel::Dependent(ServiceMap::LogShift { a }), Discipline::Mg11) => {
            closed_form_mg11_uniform_log(min, max, a, scenario.lambda, d)
        }
        (InitialValueDist::Exponential { rate }, ServiceModel::Dependent(ServiceMap::Identity), Discipline::Mg12) => {
            closed_form_mm12_exp(rate, scenario.lambda, d)
        }
        _ => Err(Error::Unsupported(format!(
            "no closed form for {} with this value/service combination",
            scenario.discipline
        ))),
    }
}
