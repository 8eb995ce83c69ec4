//! Joint law of (initial value, service time) for the packets admitted into
//! the queue, and the expectations over it that the renewal-reward formulas
//! need.
//!
//! Continuous value distributions are integrated numerically; binary values
//! are handled as exact two-atom sums. Given the value, the service time is
//! either a point (`g(v)` or a deterministic `s0`) or exponential.

use crate::error::{Error, Result};
use crate::model::{
    Admission, InitialValueDist, PacketClass, Scenario, ServiceDist, ServiceModel,
};
use crate::quadrature::{self, exponential_truncation, QuadratureSpec};

#[derive(Debug, Clone, PartialEq)]
enum ValueLaw {
    Uniform { min: f64, max: f64 },
    Exponential { rate: f64 },
    /// (probability, value)
    Atoms(Vec<(f64, f64)>),
}

/// Service time given the initial value.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Conditional {
    Point(f64),
    Exponential(f64),
}

/// `x - (1 - exp(-x))`, accurate near 0.
fn excess(x: f64) -> f64 {
    x + (-x).exp_m1()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PacketLaw {
    values: ValueLaw,
    service: ServiceModel,
}

impl PacketLaw {
    /// Law of the admitted packets: class-only admission conditions binary
    /// values on the admitted class.
    pub fn from_scenario(scenario: &Scenario) -> Result<Self> {
        let values = match (scenario.value_dist, scenario.admission) {
            (InitialValueDist::Uniform { min, max }, Admission::ServeAll) => ValueLaw::Uniform { min, max },
            (InitialValueDist::Exponential { rate }, Admission::ServeAll) => ValueLaw::Exponential { rate },
            (InitialValueDist::Binary { v1, v2, p }, Admission::ServeAll) => ValueLaw::Atoms(vec![(p, v1), (1.0 - p, v2)]),
            (InitialValueDist::Binary { v1, .. }, Admission::ClassOnly(PacketClass::One)) => ValueLaw::Atoms(vec![(1.0, v1)]),
            (InitialValueDist::Binary { v2, .. }, Admission::ClassOnly(PacketClass::Two)) => ValueLaw::Atoms(vec![(1.0, v2)]),
            (_, Admission::ClassOnly(_)) => {
                return Err(Error::invalid("class-only admission requires a binary value distribution"))
            }
        };
        if scenario.service == ServiceModel::ClassConditionalExponential && !matches!(values, ValueLaw::Atoms(_)) {
            return Err(Error::invalid("class-conditional service requires a binary value distribution"));
        }
        Ok(PacketLaw {
            values,
            service: scenario.service,
        })
    }

    fn conditional(&self, v: f64) -> Conditional {
        match self.service {
            ServiceModel::Dependent(map) => Conditional::Point(map.apply(v)),
            ServiceModel::Independent(ServiceDist::Deterministic { s0 }) => Conditional::Point(s0),
            ServiceModel::Independent(ServiceDist::Exponential { rate }) => Conditional::Exponential(rate),
            ServiceModel::ClassConditionalExponential => Conditional::Exponential(1.0 / v),
        }
    }

    /// Support of a continuous value law; exponential values are truncated
    /// at the tail quantile.
    fn support(&self) -> (f64, f64) {
        match self.values {
            ValueLaw::Uniform { min, max } => (min, max),
            ValueLaw::Exponential { rate } => (0.0, exponential_truncation(rate)),
            ValueLaw::Atoms(_) => (f64::NAN, f64::NAN),
        }
    }

    fn pdf(&self, v: f64) -> f64 {
        match self.values {
            ValueLaw::Uniform { min, max } => 1.0 / (max - min),
            ValueLaw::Exponential { rate } => rate * (-rate * v).exp(),
            ValueLaw::Atoms(_) => unreachable!("atoms have no density"),
        }
    }

    fn value_ccdf(&self, v: f64) -> f64 {
        match &self.values {
            ValueLaw::Uniform { min, max } => ((max - v) / (max - min)).clamp(0.0, 1.0),
            ValueLaw::Exponential { rate } => (-rate * v.max(0.0)).exp(),
            ValueLaw::Atoms(atoms) => atoms.iter().filter(|(_, x)| *x > v).map(|(p, _)| p).sum(),
        }
    }

    /// `E[phi(V); V in [lo, cap)]`.
    fn expect_value<F>(&self, cap: f64, mut phi: F, spec: &QuadratureSpec) -> Result<f64>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        self.expect_value_between(f64::NEG_INFINITY, cap, &mut phi, spec)
    }

    fn expect_value_between<F>(&self, floor: f64, cap: f64, phi: &mut F, spec: &QuadratureSpec) -> Result<f64>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        match &self.values {
            ValueLaw::Atoms(atoms) => {
                let mut sum = 0.0;
                for &(p, v) in atoms {
                    if v >= floor && v < cap {
                        sum += p * phi(v)?;
                    }
                }
                Ok(sum)
            }
            _ => {
                let (lo, hi) = self.support();
                let (lo, hi) = (lo.max(floor), hi.min(cap));
                if hi <= lo {
                    return Ok(0.0);
                }
                quadrature::integrate_fallible(|v| Ok(phi(v)? * self.pdf(v)), lo, hi, spec)
            }
        }
    }

    pub fn mean_value(&self) -> f64 {
        match &self.values {
            ValueLaw::Uniform { min, max } => 0.5 * (min + max),
            ValueLaw::Exponential { rate } => 1.0 / rate,
            ValueLaw::Atoms(atoms) => atoms.iter().map(|(p, v)| p * v).sum(),
        }
    }

    pub fn mean_service(&self, spec: &QuadratureSpec) -> Result<f64> {
        self.expect_service(spec, |c| match c {
            Conditional::Point(s) => s,
            Conditional::Exponential(r) => 1.0 / r,
        })
    }

    /// `E[exp(-lambda S)]`
    pub fn mgf(&self, lambda: f64) -> Result<f64> {
        self.expect_service(&QuadratureSpec::default(), |c| match c {
            Conditional::Point(s) => (-lambda * s).exp(),
            Conditional::Exponential(r) => r / (r + lambda),
        })
    }

    /// `1 - E[exp(-lambda S)]` without cancellation at small `lambda`.
    pub fn one_minus_mgf(&self, lambda: f64, spec: &QuadratureSpec) -> Result<f64> {
        self.expect_service(spec, |c| match c {
            Conditional::Point(s) => -(-lambda * s).exp_m1(),
            Conditional::Exponential(r) => lambda / (r + lambda),
        })
    }

    /// Mean time a service spends with the buffer occupied, given Poisson
    /// arrivals at `lambda`: `E[(S - X)^+] = E[S] + (MGF - 1) / lambda`.
    pub fn mean_wait_b2(&self, lambda: f64, spec: &QuadratureSpec) -> Result<f64> {
        self.expect_service(spec, |c| match c {
            Conditional::Point(s) => excess(lambda * s) / lambda,
            Conditional::Exponential(r) => lambda / (r * (r + lambda)),
        })
    }

    fn expect_service<F>(&self, spec: &QuadratureSpec, f: F) -> Result<f64>
    where
        F: Fn(Conditional) -> f64,
    {
        match self.service {
            ServiceModel::Independent(_) => Ok(f(self.conditional(0.0))),
            _ => self.expect_value(f64::INFINITY, |v| Ok(f(self.conditional(v))), spec),
        }
    }

    /// `P[S > w]`
    pub fn service_ccdf(&self, w: f64) -> f64 {
        if w < 0.0 {
            return 1.0;
        }
        match (self.service, &self.values) {
            (ServiceModel::Dependent(map), _) => self.value_ccdf(map.inverse(w)),
            (ServiceModel::Independent(ServiceDist::Deterministic { s0 }), _) => {
                if s0 > w {
                    1.0
                } else {
                    0.0
                }
            }
            (ServiceModel::Independent(ServiceDist::Exponential { rate }), _) => (-rate * w).exp(),
            (ServiceModel::ClassConditionalExponential, ValueLaw::Atoms(atoms)) => {
                atoms.iter().map(|(p, v)| p * (-w / v).exp()).sum()
            }
            (ServiceModel::ClassConditionalExponential, _) => unreachable!("rejected at construction"),
        }
    }

    /// `E[(1 - exp(-lambda (S - w))) ; S > w]`, the numerator of the
    /// residual-service CCDF seen by the first arrival of a service period.
    pub fn residual_numerator(&self, lambda: f64, w: f64, spec: &QuadratureSpec) -> Result<f64> {
        let term = |c: Conditional| match c {
            Conditional::Point(s) if s > w => -(-lambda * (s - w)).exp_m1(),
            Conditional::Point(_) => 0.0,
            Conditional::Exponential(r) => (-r * w).exp() * lambda / (r + lambda),
        };
        match self.service {
            ServiceModel::Independent(_) => Ok(term(self.conditional(0.0))),
            ServiceModel::Dependent(map) => {
                let floor = map.inverse(w);
                self.expect_value_between(floor, f64::INFINITY, &mut |v| Ok(term(self.conditional(v))), spec)
            }
            ServiceModel::ClassConditionalExponential => {
                self.expect_value(f64::INFINITY, |v| Ok(term(self.conditional(v))), spec)
            }
        }
    }

    /// Points where the service distribution has atoms or support edges;
    /// integrands built from it are only piecewise smooth across them.
    pub fn service_breaks(&self) -> Vec<f64> {
        match (self.service, &self.values) {
            (ServiceModel::Dependent(map), ValueLaw::Uniform { min, max }) => vec![map.apply(*min), map.apply(*max)],
            (ServiceModel::Dependent(map), ValueLaw::Atoms(atoms)) => atoms.iter().map(|(_, v)| map.apply(*v)).collect(),
            (ServiceModel::Independent(ServiceDist::Deterministic { s0 }), _) => vec![s0],
            _ => Vec::new(),
        }
    }

    /// `E[V psi(S) ; S < cutoff]`. `psi` is evaluated only on `[0, cutoff)`.
    pub fn value_weighted<F>(&self, cutoff: f64, mut psi: F, spec: &QuadratureSpec) -> Result<f64>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        match self.service {
            ServiceModel::Dependent(map) => {
                let cap = map.inverse(cutoff);
                self.expect_value(cap, |v| Ok(v * psi(map.apply(v))?), spec)
            }
            ServiceModel::Independent(_) => {
                // value and service factorize
                let service_part = conditional_expectation(self.conditional(0.0), cutoff, &mut psi, spec)?;
                Ok(self.mean_value() * service_part)
            }
            ServiceModel::ClassConditionalExponential => self.expect_value(
                f64::INFINITY,
                |v| Ok(v * conditional_expectation(self.conditional(v), cutoff, &mut psi, spec)?),
                spec,
            ),
        }
    }
}

/// `E[psi(S) ; S < cutoff]` for one conditional service law.
fn conditional_expectation<F>(c: Conditional, cutoff: f64, psi: &mut F, spec: &QuadratureSpec) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    match c {
        Conditional::Point(s) if s < cutoff => psi(s),
        Conditional::Point(_) => Ok(0.0),
        Conditional::Exponential(r) => {
            if cutoff <= 0.0 {
                return Ok(0.0);
            }
            quadrature::integrate_fallible(|s| Ok(psi(s)? * r * (-r * s).exp()), 0.0, cutoff, spec)
        }
    }
}
