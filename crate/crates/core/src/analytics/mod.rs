//! Renewal-reward evaluation of the time-average VoI at the receiver.
//!
//! Every discipline is analysed over renewal cycles that start with an idle
//! period. A packet's contribution is the area `Q` under its value curve
//! after reception, and the time-average VoI is `lambda * E[Q]` with the
//! expectation taken over arrivals (discarded packets contribute zero).
//!
//! Conditional expectations are evaluated by adaptive quadrature over the
//! joint law of value and service time ([`PacketLaw`]); two special cases
//! also have closed forms in [`closed_form`].

pub mod closed_form;
mod law;

pub use closed_form::{closed_form, closed_form_mg11_uniform_log, closed_form_mm12_exp, uniform_log_as_printed, PrintedUniformLog};
pub use law::PacketLaw;

use std::fmt;

use crate::error::{Error, Result};
use crate::model::{admitted_fraction, Discipline, Scenario, ServiceModel, InitialValueDist};
use crate::quadrature::{self, QuadratureSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    Quadrature,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::ClosedForm => "closed-form",
            Method::Quadrature => "quadrature",
        })
    }
}

/// Stationary server-state probabilities of one renewal cycle.
///
/// For the bufferless discipline `p_busy1 == p_busy` and `p_busy2 == 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stationary {
    pub p_idle: f64,
    pub p_busy: f64,
    pub p_busy1: f64,
    pub p_busy2: f64,
    pub t_cycle: f64,
    pub mgf: f64,
    pub mean_service: f64,
    /// Expected time per service with the buffer occupied (zero without a
    /// buffer).
    pub mean_wait_b2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticReport {
    pub p_idle: f64,
    pub p_busy: f64,
    pub p_busy1: f64,
    pub p_busy2: f64,
    pub t_cycle: f64,
    pub mgf: f64,
    pub mean_service: f64,
    /// `E[Q | arrival finds the server idle]`
    pub eq_idle: f64,
    /// `E[Q | arrival finds the server busy]` (busy with an empty buffer for
    /// the FCFS buffer, any busy state for the replacing buffer).
    pub eq_busy: f64,
    pub eq: f64,
    pub avg_voi: f64,
    pub method: Method,
}

fn effective_lambda(scenario: &Scenario) -> f64 {
    scenario.lambda * admitted_fraction(scenario)
}

fn require_linear(scenario: &Scenario) -> Result<()> {
    if scenario.descend.is_linear() {
        Ok(())
    } else {
        Err(Error::Unsupported(format!(
            "{:?} descend has no renewal-reward formula; use the simulator",
            scenario.descend.kind()
        )))
    }
}

fn require_discipline(scenario: &Scenario, allowed: &[Discipline]) -> Result<()> {
    if allowed.contains(&scenario.discipline) {
        Ok(())
    } else {
        Err(Error::invalid(format!("operation does not apply to {}", scenario.discipline)))
    }
}

/// Largest initial value whose service still fits before the deadline,
/// `g^-1(D)`, intersected with the support of the value distribution.
pub fn v_tilde(scenario: &Scenario) -> Result<f64> {
    let map = match scenario.service {
        ServiceModel::Dependent(map) => map,
        _ => {
            return Err(Error::invalid(
                "the value threshold only exists for value-dependent service; \
                 independent service is thresholded on the service time itself",
            ))
        }
    };
    let threshold = map.inverse(scenario.descend.deadline());
    Ok(match scenario.value_dist {
        InitialValueDist::Uniform { max, .. } => threshold.min(max),
        InitialValueDist::Binary { v1, v2, .. } => threshold.min(v1.max(v2)),
        InitialValueDist::Exponential { .. } => threshold,
    })
}

pub fn stationary_mg11(scenario: &Scenario) -> Result<Stationary> {
    scenario.validate()?;
    require_discipline(scenario, &[Discipline::Mg11])?;
    let spec = QuadratureSpec::default();
    let law = PacketLaw::from_scenario(scenario)?;
    let lambda = effective_lambda(scenario);
    let mean_service = law.mean_service(&spec)?;
    let p_idle = 1.0 / (1.0 + lambda * mean_service);
    let p_busy = 1.0 - p_idle;
    Ok(Stationary {
        p_idle,
        p_busy,
        p_busy1: p_busy,
        p_busy2: 0.0,
        t_cycle: 1.0 / lambda + mean_service,
        mgf: law.mgf(lambda)?,
        mean_service,
        mean_wait_b2: 0.0,
    })
}

/// Stationary probabilities for the one-slot buffer disciplines. Both share
/// the same busy-period structure: a busy period ends with the first service
/// during which nothing arrives.
pub fn stationary_mg12(scenario: &Scenario) -> Result<Stationary> {
    scenario.validate()?;
    require_discipline(scenario, &[Discipline::Mg12, Discipline::Mg12Star])?;
    let spec = QuadratureSpec::default();
    let law = PacketLaw::from_scenario(scenario)?;
    let lambda = effective_lambda(scenario);
    let mean_service = law.mean_service(&spec)?;
    let mgf = law.mgf(lambda)?;
    let mean_wait_b2 = law.mean_wait_b2(lambda, &spec)?;
    // Multiply T_cycle through by lambda * MGF to keep every term finite
    // when the service time degenerates to zero.
    let denom = mgf + lambda * mean_service;
    let p_idle = mgf / denom;
    let p_busy = 1.0 - p_idle;
    let p_busy2 = lambda * mean_wait_b2 / denom;
    Ok(Stationary {
        p_idle,
        p_busy,
        p_busy1: p_busy - p_busy2,
        p_busy2,
        t_cycle: 1.0 / lambda + mean_service / mgf,
        mgf,
        mean_service,
        mean_wait_b2,
    })
}

pub fn stationary(scenario: &Scenario) -> Result<Stationary> {
    match scenario.discipline {
        Discipline::Mg11 => stationary_mg11(scenario),
        Discipline::Mg12 | Discipline::Mg12Star => stationary_mg12(scenario),
    }
}

/// `P[W' > w]`: residual service seen by an arrival that finds the server
/// busy with an empty buffer, i.e. the first arrival during a service.
pub fn residual_ccdf_mg12(scenario: &Scenario, w: f64) -> Result<f64> {
    scenario.validate()?;
    if !(w >= 0.0) {
        return Err(Error::invalid(format!("residual time must be non-negative, got {w}")));
    }
    let law = PacketLaw::from_scenario(scenario)?;
    let lambda = effective_lambda(scenario);
    let spec = QuadratureSpec::default();
    residual_ccdf(&law, lambda, law.one_minus_mgf(lambda, &spec)?, w, &spec)
}

fn residual_ccdf(law: &PacketLaw, lambda: f64, one_minus_mgf: f64, w: f64, spec: &QuadratureSpec) -> Result<f64> {
    if w <= 0.0 {
        return Ok(1.0);
    }
    Ok((law.residual_numerator(lambda, w, spec)? / one_minus_mgf).clamp(0.0, 1.0))
}

/// `E[Q | idle]`: the packet enters service at once, so its system time is
/// its own service time.
fn eq_idle(law: &PacketLaw, deadline: f64, spec: &QuadratureSpec) -> Result<f64> {
    let weighted = law.value_weighted(deadline, |s| Ok((deadline - s) * (deadline - s)), spec)?;
    Ok(weighted / (2.0 * deadline))
}

fn report(st: &Stationary, eq_idle: f64, eq_busy: f64, eq: f64, lambda: f64) -> AnalyticReport {
    AnalyticReport {
        p_idle: st.p_idle,
        p_busy: st.p_busy,
        p_busy1: st.p_busy1,
        p_busy2: st.p_busy2,
        t_cycle: st.t_cycle,
        mgf: st.mgf,
        mean_service: st.mean_service,
        eq_idle,
        eq_busy,
        eq,
        avg_voi: lambda * eq,
        method: Method::Quadrature,
    }
}

/// Bufferless queue: only packets that find the server idle are served.
pub fn avg_voi_mg11(scenario: &Scenario) -> Result<AnalyticReport> {
    avg_voi_mg11_with(scenario, &QuadratureSpec::default())
}

pub fn avg_voi_mg11_with(scenario: &Scenario, spec: &QuadratureSpec) -> Result<AnalyticReport> {
    require_linear(scenario)?;
    let st = stationary_mg11(scenario)?;
    let law = PacketLaw::from_scenario(scenario)?;
    let deadline = scenario.descend.deadline();
    let idle = eq_idle(&law, deadline, spec)?;
    Ok(report(&st, idle, 0.0, st.p_idle * idle, effective_lambda(scenario)))
}

/// One FCFS buffer slot. Arrivals in B1 wait for the residual service `W'`
/// of the packet in service; arrivals in B2 are dropped.
///
/// `E[Q | B1]` uses `E[h(W')] = h(0) + int_0^c h'(w) P[W' > w] dw` with
/// `h(w) = (c - w)^2` on `[0, c)`, `c = D - S`, so the CCDF of `W'` is never
/// differentiated. Swapping the order of integration then gives
/// `E[Q | B1] = E[Q | I] - (1 / D) int_0^D P[W' > w] E[V (D - w - S)^+] dw`.
pub fn avg_voi_mg12(scenario: &Scenario) -> Result<AnalyticReport> {
    avg_voi_mg12_with(scenario, &QuadratureSpec::default())
}

pub fn avg_voi_mg12_with(scenario: &Scenario, spec: &QuadratureSpec) -> Result<AnalyticReport> {
    require_linear(scenario)?;
    require_discipline(scenario, &[Discipline::Mg12])?;
    let st = stationary_mg12(scenario)?;
    let law = PacketLaw::from_scenario(scenario)?;
    let lambda = effective_lambda(scenario);
    let deadline = scenario.descend.deadline();
    let idle = eq_idle(&law, deadline, spec)?;

    let level = spec.per_level(2);
    let one_minus_mgf = law.one_minus_mgf(lambda, &level)?;
    let busy = if st.p_busy1 > 0.0 && one_minus_mgf > 0.0 {
        // integrand kinks where either factor crosses a service break
        let mut breaks = law.service_breaks();
        breaks.extend(law.service_breaks().iter().map(|b| deadline - b));
        let tail = quadrature::integrate_piecewise(
            |w| {
                let ccdf = residual_ccdf(&law, lambda, one_minus_mgf, w, &level)?;
                if ccdf == 0.0 {
                    return Ok(0.0);
                }
                let c = deadline - w;
                Ok(ccdf * law.value_weighted(c, |s| Ok(c - s), &level)?)
            },
            0.0,
            deadline,
            &breaks,
            &level,
        )?;
        (idle - tail / deadline).max(0.0)
    } else {
        0.0
    };
    Ok(report(&st, idle, busy, idle * st.p_idle + busy * st.p_busy1, lambda))
}

/// One replacing buffer slot (LCFS with discarding). A packet arriving in any
/// busy state is served iff nothing else arrives before the current service
/// ends. By PASTA the residual `W` of that service has the stationary
/// residual-life density `P[S > w] / E[S]`, and survival of the buffered
/// packet contributes `exp(-lambda w)`.
pub fn avg_voi_mg12star(scenario: &Scenario) -> Result<AnalyticReport> {
    avg_voi_mg12star_with(scenario, &QuadratureSpec::default())
}

pub fn avg_voi_mg12star_with(scenario: &Scenario, spec: &QuadratureSpec) -> Result<AnalyticReport> {
    require_linear(scenario)?;
    require_discipline(scenario, &[Discipline::Mg12Star])?;
    let st = stationary_mg12(scenario)?;
    let law = PacketLaw::from_scenario(scenario)?;
    let lambda = effective_lambda(scenario);
    let deadline = scenario.descend.deadline();
    let idle = eq_idle(&law, deadline, spec)?;

    let level = spec.per_level(2);
    let busy = if st.p_busy > 0.0 && st.mean_service > 0.0 {
        let breaks = law.service_breaks();
        let mean_service = st.mean_service;
        let expected_k = |c: f64| -> Result<f64> {
            quadrature::integrate_piecewise(
                |w| Ok((c - w) * (c - w) * (-lambda * w).exp() * law.service_ccdf(w) / mean_service),
                0.0,
                c,
                &breaks,
                &level,
            )
        };
        law.value_weighted(deadline, |s| expected_k(deadline - s), &level)? / (2.0 * deadline)
    } else {
        0.0
    };
    Ok(report(&st, idle, busy, idle * st.p_idle + busy * st.p_busy, lambda))
}

/// Quadrature evaluation for the scenario's discipline.
pub fn avg_voi(scenario: &Scenario) -> Result<AnalyticReport> {
    match scenario.discipline {
        Discipline::Mg11 => avg_voi_mg11(scenario),
        Discipline::Mg12 => avg_voi_mg12(scenario),
        Discipline::Mg12Star => avg_voi_mg12star(scenario),
    }
}
