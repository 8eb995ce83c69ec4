//! Domain types shared by the analytic and the simulation engines, and the
//! pointwise value and service computations on them.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{Error, Result};
use crate::quadrature::{self, QuadratureSpec};

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidInput(msg()))
    }
}

fn positive(name: &str, x: f64) -> Result<()> {
    require(x > 0.0 && x.is_finite(), || format!("{name} must be positive and finite, got {x}"))
}

/// Shape of the decay of a packet's value between generation and deadline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DescendKind {
    /// `v0 * (1 - tau / D)`
    Linear,
    /// `v0 * (1 - (tau / D)^k)`, concave for `k > 1`.
    PowerConcave(f64),
    /// `v0 * (1 - tau / D)^k`, convex for `k > 1`.
    PowerConvex(f64),
}

/// Decay law of a packet's value, which reaches zero at the deadline `D`
/// after generation and stays there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescendFunction {
    kind: DescendKind,
    deadline: f64,
}

impl DescendFunction {
    pub fn new(kind: DescendKind, deadline: f64) -> Result<Self> {
        positive("deadline", deadline)?;
        match kind {
            DescendKind::Linear => {}
            DescendKind::PowerConcave(k) | DescendKind::PowerConvex(k) => {
                require(k >= 1.0 && k.is_finite(), || format!("shape exponent must be >= 1, got {k}"))?;
            }
        }
        Ok(DescendFunction { kind, deadline })
    }

    pub fn linear(deadline: f64) -> Result<Self> {
        Self::new(DescendKind::Linear, deadline)
    }

    pub fn kind(&self) -> DescendKind {
        self.kind
    }

    pub fn deadline(&self) -> f64 {
        self.deadline
    }

    pub fn is_linear(&self) -> bool {
        self.kind == DescendKind::Linear
    }

    /// Value of a packet with initial value `v0`, `tau` time units after its
    /// generation.
    pub fn value_at(&self, v0: f64, tau: f64) -> Result<f64> {
        require(v0 >= 0.0 && v0.is_finite(), || format!("initial value must be non-negative, got {v0}"))?;
        require(tau >= 0.0 && !tau.is_nan(), || format!("elapsed time must be non-negative, got {tau}"))?;
        Ok(self.value_unchecked(v0, tau))
    }

    pub(crate) fn value_unchecked(&self, v0: f64, tau: f64) -> f64 {
        if tau >= self.deadline {
            return 0.0;
        }
        let x = tau / self.deadline;
        let remaining = match self.kind {
            DescendKind::Linear => 1.0 - x,
            DescendKind::PowerConcave(k) => 1.0 - x.powf(k),
            DescendKind::PowerConvex(k) => (1.0 - x).powf(k),
        };
        v0 * remaining
    }

    /// Value collected at the receiver by a packet that spent `t_sys` in the
    /// system: the area under its value curve from reception to the
    /// deadline.
    pub fn q_area(&self, v0: f64, t_sys: f64) -> Result<f64> {
        require(v0 >= 0.0 && v0.is_finite(), || format!("initial value must be non-negative, got {v0}"))?;
        require(t_sys >= 0.0 && !t_sys.is_nan(), || format!("system time must be non-negative, got {t_sys}"))?;
        match self.kind {
            DescendKind::Linear => Ok(self.linear_area(v0, t_sys)),
            _ => self.q_area_quadrature(v0, t_sys),
        }
    }

    fn linear_area(&self, v0: f64, t_sys: f64) -> f64 {
        if t_sys >= self.deadline {
            return 0.0;
        }
        let rest = self.deadline - t_sys;
        v0 / (2.0 * self.deadline) * rest * rest
    }

    /// [`q_area`](Self::q_area) by numerical integration of the value curve,
    /// whatever the descend kind.
    pub fn q_area_quadrature(&self, v0: f64, t_sys: f64) -> Result<f64> {
        if t_sys >= self.deadline {
            return Ok(0.0);
        }
        let spec = QuadratureSpec {
            rel_tol: 1e-12,
            abs_tol: 1e-15,
            ..QuadratureSpec::default()
        };
        quadrature::integrate(|tau| self.value_unchecked(v0, tau), t_sys, self.deadline, &spec)
    }
}

/// Packet class of a two-valued (binary) initial-value distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PacketClass {
    One,
    Two,
}

impl fmt::Display for PacketClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PacketClass::One => f.write_str("1"),
            PacketClass::Two => f.write_str("2"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialValueDist {
    Uniform { min: f64, max: f64 },
    Exponential { rate: f64 },
    /// Class 1 carries `v1` with probability `p`, class 2 carries `v2`.
    Binary { v1: f64, v2: f64, p: f64 },
}

impl InitialValueDist {
    pub fn uniform(min: f64, max: f64) -> Result<Self> {
        let d = InitialValueDist::Uniform { min, max };
        d.validate()?;
        Ok(d)
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        let d = InitialValueDist::Exponential { rate };
        d.validate()?;
        Ok(d)
    }

    pub fn binary(v1: f64, v2: f64, p: f64) -> Result<Self> {
        let d = InitialValueDist::Binary { v1, v2, p };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            InitialValueDist::Uniform { min, max } => require(
                min >= 0.0 && min < max && max.is_finite(),
                || format!("uniform values need 0 <= min < max, got [{min}, {max}]"),
            ),
            InitialValueDist::Exponential { rate } => positive("value rate", rate),
            InitialValueDist::Binary { v1, v2, p } => {
                positive("class 1 value", v1)?;
                positive("class 2 value", v2)?;
                require(p > 0.0 && p < 1.0, || format!("class 1 probability must lie in (0, 1), got {p}"))
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            InitialValueDist::Uniform { min, max } => 0.5 * (min + max),
            InitialValueDist::Exponential { rate } => 1.0 / rate,
            InitialValueDist::Binary { v1, v2, p } => p * v1 + (1.0 - p) * v2,
        }
    }

    pub fn is_binary(&self) -> bool {
        matches!(self, InitialValueDist::Binary { .. })
    }

    /// Draws an initial value, with its class for binary distributions.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, Option<PacketClass>) {
        match *self {
            InitialValueDist::Uniform { min, max } => (min + (max - min) * rng.random::<f64>(), None),
            InitialValueDist::Exponential { rate } => {
                let e: f64 = Exp1.sample(rng);
                (e / rate, None)
            }
            InitialValueDist::Binary { v1, v2, p } => {
                if rng.random::<f64>() < p {
                    (v1, Some(PacketClass::One))
                } else {
                    (v2, Some(PacketClass::Two))
                }
            }
        }
    }
}

/// Strictly increasing map from initial value to service time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ServiceMap {
    Identity,
    /// `a * ln(1 + v)`
    LogShift { a: f64 },
}

impl ServiceMap {
    pub fn apply(&self, v: f64) -> f64 {
        match *self {
            ServiceMap::Identity => v,
            ServiceMap::LogShift { a } => a * v.ln_1p(),
        }
    }

    pub fn inverse(&self, s: f64) -> f64 {
        match *self {
            ServiceMap::Identity => s,
            ServiceMap::LogShift { a } => (s / a).exp_m1(),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            ServiceMap::Identity => Ok(()),
            ServiceMap::LogShift { a } => positive("log-shift scale", a),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ServiceDist {
    Exponential { rate: f64 },
    /// Point mass at `s0`.
    Deterministic { s0: f64 },
}

impl ServiceDist {
    pub fn mean(&self) -> f64 {
        match *self {
            ServiceDist::Exponential { rate } => 1.0 / rate,
            ServiceDist::Deterministic { s0 } => s0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ServiceModel {
    /// Service time is `g(v0)`.
    Dependent(ServiceMap),
    /// Service time is drawn independently of the value.
    Independent(ServiceDist),
    /// Exponential service whose mean is the packet's class value; only
    /// meaningful for binary value distributions.
    ClassConditionalExponential,
}

impl ServiceModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            ServiceModel::Dependent(map) => map.validate(),
            ServiceModel::Independent(ServiceDist::Exponential { rate }) => positive("service rate", *rate),
            ServiceModel::Independent(ServiceDist::Deterministic { s0 }) => require(
                *s0 >= 0.0 && s0.is_finite(),
                || format!("deterministic service time must be non-negative, got {s0}"),
            ),
            ServiceModel::ClassConditionalExponential => Ok(()),
        }
    }

    /// Service requirement of a packet with initial value `v0`.
    pub fn service_time<R: Rng + ?Sized>(&self, v0: f64, class: Option<PacketClass>, rng: &mut R) -> Result<f64> {
        match *self {
            ServiceModel::Dependent(map) => Ok(map.apply(v0)),
            ServiceModel::Independent(ServiceDist::Deterministic { s0 }) => Ok(s0),
            ServiceModel::Independent(ServiceDist::Exponential { rate }) => {
                let e: f64 = Exp1.sample(rng);
                Ok(e / rate)
            }
            ServiceModel::ClassConditionalExponential => {
                if class.is_none() {
                    return Err(Error::invalid("class-conditional service needs a packet class"));
                }
                let e: f64 = Exp1.sample(rng);
                Ok(e * v0)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Discipline {
    /// No buffer; arrivals during service are dropped.
    Mg11,
    /// One FCFS buffer slot; arrivals finding it full are dropped.
    Mg12,
    /// One buffer slot; the newest arrival replaces the buffered packet.
    Mg12Star,
}

impl Discipline {
    pub const ALL: [Discipline; 3] = [Discipline::Mg11, Discipline::Mg12, Discipline::Mg12Star];

    pub fn has_buffer(&self) -> bool {
        !matches!(self, Discipline::Mg11)
    }
}

impl fmt::Display for Discipline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Discipline::Mg11 => "M/GI/1/1",
            Discipline::Mg12 => "M/GI/1/2",
            Discipline::Mg12Star => "M/GI/1/2*",
        })
    }
}

impl FromStr for Discipline {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "M/GI/1/1" | "M/G/1/1" | "M/M/1/1" => Ok(Discipline::Mg11),
            "M/GI/1/2" | "M/G/1/2" | "M/M/1/2" => Ok(Discipline::Mg12),
            "M/GI/1/2*" | "M/G/1/2*" | "M/M/1/2*" => Ok(Discipline::Mg12Star),
            other => Err(Error::invalid(format!("unknown discipline '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Admission {
    ServeAll,
    /// Packets of the other class are discarded on arrival.
    ClassOnly(PacketClass),
}

impl Admission {
    pub fn admits(&self, class: Option<PacketClass>) -> bool {
        match self {
            Admission::ServeAll => true,
            Admission::ClassOnly(c) => class == Some(*c),
        }
    }
}

impl fmt::Display for Admission {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Admission::ServeAll => f.write_str("serve-all"),
            Admission::ClassOnly(c) => write!(f, "class-only({c})"),
        }
    }
}

impl FromStr for Admission {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        match compact.as_str() {
            "serve-all" => Ok(Admission::ServeAll),
            "class-only(1)" | "class-only:1" => Ok(Admission::ClassOnly(PacketClass::One)),
            "class-only(2)" | "class-only:2" => Ok(Admission::ClassOnly(PacketClass::Two)),
            _ => Err(Error::invalid(format!("unknown admission policy '{}'", s.trim()))),
        }
    }
}

/// A complete experiment point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub lambda: f64,
    pub value_dist: InitialValueDist,
    pub service: ServiceModel,
    pub descend: DescendFunction,
    pub discipline: Discipline,
    pub admission: Admission,
}

impl Scenario {
    pub fn new(
        lambda: f64,
        value_dist: InitialValueDist,
        service: ServiceModel,
        descend: DescendFunction,
        discipline: Discipline,
        admission: Admission,
    ) -> Result<Self> {
        let s = Scenario {
            lambda,
            value_dist,
            service,
            descend,
            discipline,
            admission,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        positive("arrival rate", self.lambda)?;
        self.value_dist.validate()?;
        self.service.validate()?;
        // Re-check the descend parameters; the fields are private but the
        // struct may have been built through `Scenario { .. }`.
        DescendFunction::new(self.descend.kind, self.descend.deadline)?;
        if matches!(self.admission, Admission::ClassOnly(_)) && !self.value_dist.is_binary() {
            return Err(Error::invalid("class-only admission requires a binary value distribution"));
        }
        if self.service == ServiceModel::ClassConditionalExponential && !self.value_dist.is_binary() {
            return Err(Error::invalid("class-conditional service requires a binary value distribution"));
        }
        Ok(())
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        Scenario { lambda, ..*self }
    }

    pub fn with_discipline(&self, discipline: Discipline) -> Self {
        Scenario { discipline, ..*self }
    }

    pub fn with_admission(&self, admission: Admission) -> Self {
        Scenario { admission, ..*self }
    }
}

/// One status update as it moves through the system.
#[derive(Debug, Clone, PartialEq)]
pub struct Packet {
    pub id: u64,
    pub t_gen: f64,
    pub v0: f64,
    pub class: Option<PacketClass>,
    pub service: f64,
    pub t_recv: Option<f64>,
    pub discarded: bool,
    pub q_area: f64,
}

impl Packet {
    pub fn new(id: u64, t_gen: f64, v0: f64, class: Option<PacketClass>, service: f64) -> Self {
        Packet {
            id,
            t_gen,
            v0,
            class,
            service,
            t_recv: None,
            discarded: false,
            q_area: 0.0,
        }
    }

    pub fn deadline_instant(&self, descend: &DescendFunction) -> f64 {
        self.t_gen + descend.deadline()
    }

    pub(crate) fn discard(&mut self) {
        self.discarded = true;
        self.q_area = 0.0;
    }

    /// Completes a service that began at `t_start` and returns the collected
    /// area. The system time is taken as wait plus service so that a packet
    /// served immediately has exactly its service time.
    pub(crate) fn deliver(&mut self, t_start: f64, descend: &DescendFunction) -> Result<f64> {
        let t_sys = (t_start - self.t_gen) + self.service;
        self.t_recv = Some(t_start + self.service);
        self.q_area = descend.q_area(self.v0, t_sys)?;
        Ok(self.q_area)
    }

    pub fn system_time(&self) -> Option<f64> {
        self.t_recv.map(|t| t - self.t_gen)
    }
}

/// `E[exp(-lambda * S)]` for the service distribution of `scenario`,
/// evaluated at the scenario's admitted arrival rate.
pub fn mgf_service(scenario: &Scenario) -> Result<f64> {
    scenario.validate()?;
    crate::analytics::PacketLaw::from_scenario(scenario)?.mgf(scenario.lambda * admitted_fraction(scenario))
}

/// Fraction of arrivals that pass the admission policy.
pub fn admitted_fraction(scenario: &Scenario) -> f64 {
    match (scenario.admission, scenario.value_dist) {
        (Admission::ServeAll, _) => 1.0,
        (Admission::ClassOnly(PacketClass::One), InitialValueDist::Binary { p, .. }) => p,
        (Admission::ClassOnly(PacketClass::Two), InitialValueDist::Binary { p, .. }) => 1.0 - p,
        // rejected by validation
        (Admission::ClassOnly(_), _) => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn linear3() -> DescendFunction {
        DescendFunction::linear(3.0).unwrap()
    }

    #[test]
    fn linear_value_examples() {
        assert_eq!(linear3().value_at(10.0, 1.5).unwrap(), 5.0);
        assert_eq!(linear3().value_at(10.0, 3.0).unwrap(), 0.0);
        assert_eq!(linear3().value_at(10.0, 7.0).unwrap(), 0.0);
    }

    #[test]
    fn convex_value_example() {
        let d = DescendFunction::new(DescendKind::PowerConvex(2.0), 3.0).unwrap();
        assert_eq!(d.value_at(8.0, 1.5).unwrap(), 2.0);
    }

    #[test]
    fn value_rejects_negative_inputs() {
        assert!(linear3().value_at(-1.0, 1.0).is_err());
        assert!(linear3().value_at(1.0, -1.0).is_err());
        assert!(linear3().q_area(1.0, -0.5).is_err());
    }

    #[test]
    fn descend_rejects_bad_parameters() {
        assert!(DescendFunction::linear(0.0).is_err());
        assert!(DescendFunction::new(DescendKind::PowerConcave(0.5), 3.0).is_err());
    }

    #[test]
    fn q_area_examples() {
        assert_eq!(linear3().q_area(10.0, 0.0).unwrap(), 15.0);
        assert_eq!(linear3().q_area(10.0, 3.0).unwrap(), 0.0);
        assert!((linear3().q_area(10.0, 1.5).unwrap() - 3.75).abs() < 1e-15);
    }

    #[test]
    fn q_area_power_kinds_match_antiderivatives() {
        // concave k=2 over [0, D]: v0 * D * (1 - 1/3); convex k=2: v0 * D / 3
        let concave = DescendFunction::new(DescendKind::PowerConcave(2.0), 3.0).unwrap();
        let convex = DescendFunction::new(DescendKind::PowerConvex(2.0), 3.0).unwrap();
        assert!((concave.q_area(6.0, 0.0).unwrap() - 12.0).abs() < 1e-10);
        assert!((convex.q_area(6.0, 0.0).unwrap() - 6.0).abs() < 1e-10);
    }

    #[test]
    fn service_map_examples() {
        let log = ServiceMap::LogShift { a: 1.0 };
        let s = ServiceModel::Dependent(log);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v = std::f64::consts::E - 1.0;
        assert!((s.service_time(v, None, &mut rng).unwrap() - 1.0).abs() < 1e-15);
        let id = ServiceModel::Dependent(ServiceMap::Identity);
        assert_eq!(id.service_time(2.0, None, &mut rng).unwrap(), 2.0);
        assert!((log.inverse(log.apply(4.2)) - 4.2).abs() < 1e-14);
    }

    #[test]
    fn class_conditional_service_needs_class() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = ServiceModel::ClassConditionalExponential;
        assert!(s.service_time(0.4, None, &mut rng).is_err());
    }

    #[test]
    fn class_conditional_sampler_mean() {
        // Monte-Carlo oracle: the sample mean of 10^6 draws must sit within
        // three standard errors of the class value.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let s = ServiceModel::ClassConditionalExponential;
        let n = 1_000_000;
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for _ in 0..n {
            let x = s.service_time(0.4, Some(PacketClass::One), &mut rng).unwrap();
            sum += x;
            sum_sq += x * x;
        }
        let mean = sum / n as f64;
        let var = sum_sq / n as f64 - mean * mean;
        let se = (var / n as f64).sqrt();
        assert!((mean - 0.4).abs() < 3.0 * se, "mean {mean} se {se}");
    }

    #[test]
    fn discipline_names_round_trip() {
        for d in Discipline::ALL {
            assert_eq!(d.to_string().parse::<Discipline>().unwrap(), d);
        }
        assert!("M/GI/1/3".parse::<Discipline>().is_err());
        assert_eq!("class-only(2)".parse::<Admission>().unwrap(), Admission::ClassOnly(PacketClass::Two));
    }

    #[test]
    fn scenario_validation() {
        let base = Scenario::new(
            1.0,
            InitialValueDist::uniform(0.0, 10.0).unwrap(),
            ServiceModel::Dependent(ServiceMap::Identity),
            linear3(),
            Discipline::Mg11,
            Admission::ServeAll,
        )
        .unwrap();
        assert!(base.with_admission(Admission::ClassOnly(PacketClass::One)).validate().is_err());
        assert!(base.with_lambda(0.0).validate().is_err());
        let cc = Scenario {
            service: ServiceModel::ClassConditionalExponential,
            ..base
        };
        assert!(cc.validate().is_err());
        assert!(InitialValueDist::uniform(3.0, 1.0).is_err());
        assert!(InitialValueDist::binary(0.4, 1.33, 1.0).is_err());
    }

    #[test]
    fn mgf_examples() {
        let exp_service = Scenario::new(
            1.0,
            InitialValueDist::uniform(0.0, 10.0).unwrap(),
            ServiceModel::Independent(ServiceDist::Exponential { rate: 1.5 }),
            linear3(),
            Discipline::Mg11,
            Admission::ServeAll,
        )
        .unwrap();
        assert!((mgf_service(&exp_service).unwrap() - 0.6).abs() < 1e-15);
        let det = Scenario {
            service: ServiceModel::Independent(ServiceDist::Deterministic { s0: 2.0 }),
            ..exp_service
        };
        assert!((mgf_service(&det).unwrap() - (-2.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn mgf_dependent_matches_dense_trapezoid() {
        // Independent oracle: composite trapezoid rule on 10^6 panels.
        let scenario = Scenario::new(
            1.0,
            InitialValueDist::uniform(0.0, 10.0).unwrap(),
            ServiceModel::Dependent(ServiceMap::LogShift { a: 1.0 }),
            linear3(),
            Discipline::Mg11,
            Admission::ServeAll,
        )
        .unwrap();
        let n = 1_000_000;
        let h = 10.0 / n as f64;
        let f = |v: f64| (-(v.ln_1p())).exp() / 10.0;
        let mut trap = 0.5 * (f(0.0) + f(10.0));
        for k in 1..n {
            trap += f(k as f64 * h);
        }
        trap *= h;
        // ln(11)/10 in closed form, for the record
        assert!((trap - 11f64.ln() / 10.0).abs() < 1e-10);
        let mgf = mgf_service(&scenario).unwrap();
        assert!((mgf - trap).abs() < 1e-8, "{mgf} vs {trap}");
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn any_descend() -> impl Strategy<Value = DescendFunction> {
            (0..3usize, 1.0..4.0f64, 0.1..10.0f64).prop_map(|(kind, k, d)| {
                let kind = match kind {
                    0 => DescendKind::Linear,
                    1 => DescendKind::PowerConcave(k),
                    _ => DescendKind::PowerConvex(k),
                };
                DescendFunction::new(kind, d).unwrap()
            })
        }

        proptest! {
            #[test]
            fn value_boundaries_and_monotonicity(d in any_descend(), v0 in 0.0..50.0f64) {
                prop_assert_eq!(d.value_at(v0, 0.0).unwrap(), v0);
                prop_assert_eq!(d.value_at(0.0, 0.3 * d.deadline()).unwrap(), 0.0);
                prop_assert_eq!(d.value_at(v0, d.deadline()).unwrap(), 0.0);
                prop_assert_eq!(d.value_at(v0, 2.0 * d.deadline()).unwrap(), 0.0);
                let mut prev = f64::INFINITY;
                for i in 0..=200 {
                    let v = d.value_at(v0, d.deadline() * i as f64 / 200.0).unwrap();
                    prop_assert!(v <= prev);
                    prev = v;
                }
            }

            #[test]
            fn q_area_full_and_monotone(d in any_descend(), v0 in 0.0..50.0f64) {
                let full = d.q_area(v0, 0.0).unwrap();
                let spec = QuadratureSpec { rel_tol: 1e-12, abs_tol: 1e-14, ..QuadratureSpec::default() };
                let reference = quadrature::integrate(|t| d.value_at(v0, t).unwrap(), 0.0, d.deadline(), &spec).unwrap();
                prop_assert!((full - reference).abs() <= 1e-9 * reference.max(1.0));
                let mut prev = f64::INFINITY;
                for i in 0..=50 {
                    let q = d.q_area(v0, d.deadline() * 1.2 * i as f64 / 50.0).unwrap();
                    prop_assert!(q <= prev + 1e-12);
                    prev = q;
                }
            }

            #[test]
            fn linear_quadrature_matches_closed_form(dl in 0.1..10.0f64, v0 in 0.01..50.0f64, frac in 0.0..0.999f64) {
                let d = DescendFunction::linear(dl).unwrap();
                let t = frac * dl;
                let closed = d.q_area(v0, t).unwrap();
                let quad = d.q_area_quadrature(v0, t).unwrap();
                prop_assert!((closed - quad).abs() <= 1e-10 * closed, "{} vs {}", closed, quad);
            }

            #[test]
            fn mgf_in_unit_interval_and_decreasing(a in 0.1..3.0f64, vmax in 0.5..20.0f64) {
                let base = Scenario::new(
                    0.01,
                    InitialValueDist::uniform(0.0, vmax).unwrap(),
                    ServiceModel::Dependent(ServiceMap::LogShift { a }),
                    DescendFunction::linear(3.0).unwrap(),
                    Discipline::Mg12,
                    Admission::ServeAll,
                ).unwrap();
                let mut prev = 1.0;
                for i in 0..20 {
                    let lam = 0.01 + 0.5 * i as f64;
                    let m = mgf_service(&base.with_lambda(lam)).unwrap();
                    prop_assert!(m > 0.0 && m <= 1.0);
                    prop_assert!(m <= prev + 1e-12);
                    prev = m;
                }
            }
        }
    }
}
