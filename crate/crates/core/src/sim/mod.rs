//! Discrete-event simulation of the three disciplines.
//!
//! The system starts empty at time 0. `n_packets` packets are generated by a
//! Poisson process and the run ends when the last of them has left the
//! system. Time averages are divided by that horizon; the value a packet
//! collects after the horizon is still counted, which biases the average VoI
//! by `O(1 / n_packets)`.

mod receiver;
mod rng;
mod stats;
mod trace;

pub use receiver::{instantaneous_voi, sampled_voi_mean, trapezoid_voi_integral, Delivery, ReceiverLog};
pub use rng::{SimRng, ARRIVAL_STREAM, SERVICE_STREAM, VALUE_STREAM};
pub use stats::{ratio_estimate, Estimate};
pub use trace::{EventKind, ServerState, TraceEvent};

use rand_distr::{Distribution, Exp1};

use crate::error::{Error, Result};
use crate::model::{Discipline, Packet, Scenario};
use stats::Batch;

pub const DEFAULT_PACKETS: u64 = 1_000_000;
pub const DEFAULT_BATCHES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub scenario: Scenario,
    pub n_packets: u64,
    pub seed: u64,
    /// Sampling interval of the instantaneous VoI, if wanted.
    pub sample_voi_every: Option<f64>,
    pub batches: usize,
}

impl SimConfig {
    pub fn new(scenario: Scenario, n_packets: u64, seed: u64) -> Self {
        SimConfig {
            scenario,
            n_packets,
            seed,
            sample_voi_every: None,
            batches: DEFAULT_BATCHES,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        if self.n_packets == 0 {
            return Err(Error::invalid("n_packets must be at least 1"));
        }
        if self.batches == 0 {
            return Err(Error::invalid("batches must be at least 1"));
        }
        if let Some(dt) = self.sample_voi_every {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::invalid(format!("sampling interval must be positive, got {dt}")));
            }
        }
        Ok(())
    }
}

/// Estimates indexed by [`ServerState`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateFractions(pub [Estimate; 3]);

impl StateFractions {
    pub fn get(&self, state: ServerState) -> Estimate {
        self.0[state.index()]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub n_generated: u64,
    pub n_admitted: u64,
    pub n_delivered: u64,
    /// Delivered at or after their deadline, hence without value.
    pub n_expired: u64,
    pub horizon: f64,
    pub total_area: f64,
    pub avg_voi: Estimate,
    pub avg_aoi: Estimate,
    /// Fraction of time spent in each server state.
    pub occupancy: StateFractions,
    /// Fraction of arrivals that found the server in each state.
    pub arrival_seen: StateFractions,
    pub sampled_voi_mean: Option<f64>,
    pub seed: u64,
}

pub fn simulate(config: &SimConfig) -> Result<SimReport> {
    let keep_log = config.sample_voi_every.is_some();
    run(config, keep_log, |_| {}).map(|(report, _)| report)
}

/// Also returns the receiver log for instantaneous-VoI queries.
pub fn simulate_with_log(config: &SimConfig) -> Result<(SimReport, ReceiverLog)> {
    let (report, log) = run(config, true, |_| {})?;
    Ok((report, log.expect("log requested")))
}

/// Calls `observer` on every event, in time order.
pub fn simulate_traced<F>(config: &SimConfig, observer: F) -> Result<SimReport>
where
    F: FnMut(&TraceEvent),
{
    run(config, config.sample_voi_every.is_some(), observer).map(|(report, _)| report)
}

struct InService {
    packet: Packet,
    start: f64,
    completion: f64,
}

struct Engine<'a, F> {
    scenario: &'a Scenario,
    observer: F,
    now: f64,
    server: Option<InService>,
    buffer: Option<Packet>,
    /// Generation time of the freshest delivered packet.
    freshest: f64,
    batch: Batch,
    batches: Vec<Batch>,
    log: Option<ReceiverLog>,
    n_delivered: u64,
    n_expired: u64,
    total_area: f64,
}

impl<F: FnMut(&TraceEvent)> Engine<'_, F> {
    fn state(&self) -> ServerState {
        match (&self.server, &self.buffer) {
            (None, _) => ServerState::Idle,
            (Some(_), None) => ServerState::Busy1,
            (Some(_), Some(_)) => ServerState::Busy2,
        }
    }

    fn emit(&mut self, kind: EventKind, packet: u64) {
        let event = TraceEvent {
            time: self.now,
            kind,
            packet,
            state: self.state(),
        };
        (self.observer)(&event);
    }

    fn advance(&mut self, t: f64) {
        let dt = t - self.now;
        if dt > 0.0 {
            let state = self.state().index();
            self.batch.duration += dt;
            self.batch.occupancy[state] += dt;
            // age is t - freshest, integrated over [now, t]
            self.batch.age_integral += dt * (0.5 * (self.now + t) - self.freshest);
            self.now = t;
        }
    }

    fn start(&mut self, packet: Packet) {
        self.emit(EventKind::Start, packet.id);
        let completion = self.now + packet.service;
        self.server = Some(InService {
            packet,
            start: self.now,
            completion,
        });
    }

    fn complete(&mut self) -> Result<()> {
        let (completion, id) = match &self.server {
            Some(s) => (s.completion, s.packet.id),
            None => unreachable!("completion without a packet in service"),
        };
        self.advance(completion);
        self.emit(EventKind::Depart, id);
        let InService { mut packet, start, .. } = self.server.take().expect("server busy");

        let area = packet.deliver(start, &self.scenario.descend)?;
        self.n_delivered += 1;
        if (start - packet.t_gen) + packet.service >= self.scenario.descend.deadline() {
            self.n_expired += 1;
        }
        self.total_area += area;
        self.batch.area += area;
        self.freshest = self.freshest.max(packet.t_gen);
        if let Some(log) = self.log.as_mut().filter(|_| area > 0.0) {
            log.record(Delivery {
                id: packet.id,
                t_gen: packet.t_gen,
                t_recv: completion,
                v0: packet.v0,
            });
        }
        if let Some(next) = self.buffer.take() {
            self.start(next);
        }
        Ok(())
    }

    fn complete_until(&mut self, t: f64) -> Result<()> {
        while let Some(s) = &self.server {
            if s.completion > t {
                break;
            }
            self.complete()?;
        }
        Ok(())
    }

    fn close_batch(&mut self) {
        self.batches.push(std::mem::take(&mut self.batch));
    }

    fn arrive(&mut self, mut packet: Packet) {
        let seen = self.state();
        self.batch.arrivals += 1.0;
        self.batch.seen[seen.index()] += 1.0;
        self.emit(EventKind::Arrive, packet.id);
        if !self.scenario.admission.admits(packet.class) {
            packet.discard();
            self.emit(EventKind::Reject, packet.id);
            return;
        }
        match (seen, self.scenario.discipline) {
            (ServerState::Idle, _) => self.start(packet),
            (ServerState::Busy1, Discipline::Mg11) => {
                packet.discard();
                self.emit(EventKind::Drop, packet.id);
            }
            (ServerState::Busy1, _) => self.buffer = Some(packet),
            (ServerState::Busy2, Discipline::Mg12Star) => {
                let old = self.buffer.as_ref().map(|p| p.id).expect("buffer full");
                self.emit(EventKind::Drop, old);
                self.buffer = Some(packet);
            }
            (ServerState::Busy2, _) => {
                packet.discard();
                self.emit(EventKind::Drop, packet.id);
            }
        }
    }
}

fn run<F>(config: &SimConfig, keep_log: bool, observer: F) -> Result<(SimReport, Option<ReceiverLog>)>
where
    F: FnMut(&TraceEvent),
{
    config.validate()?;
    let scenario = &config.scenario;
    let mut rng = SimRng::new(config.seed);
    let n = config.n_packets;
    let per_batch = n.div_ceil(config.batches as u64);

    let mut engine = Engine {
        scenario,
        observer,
        now: 0.0,
        server: None,
        buffer: None,
        freshest: 0.0,
        batch: Batch::default(),
        batches: Vec::with_capacity(config.batches),
        log: keep_log.then(|| ReceiverLog::new(scenario.descend)),
        n_delivered: 0,
        n_expired: 0,
        total_area: 0.0,
    };

    let mut n_admitted = 0;
    let mut t_arrival = 0.0;
    for id in 0..n {
        let gap: f64 = Exp1.sample(&mut rng.arrivals);
        t_arrival += gap / scenario.lambda;
        // every packet draws its value and service, admitted or not, so the
        // streams stay aligned across policies and disciplines
        let (v0, class) = scenario.value_dist.sample(&mut rng.values);
        let service = scenario.service.service_time(v0, class, &mut rng.services)?;

        engine.complete_until(t_arrival)?;
        engine.advance(t_arrival);
        if id > 0 && id % per_batch == 0 {
            engine.close_batch();
        }
        if scenario.admission.admits(class) {
            n_admitted += 1;
        }
        engine.arrive(Packet::new(id, t_arrival, v0, class, service));
    }
    engine.complete_until(f64::INFINITY)?;
    engine.close_batch();

    let horizon = engine.now;
    let batches = &engine.batches;
    let by_time = |y: &dyn Fn(&Batch) -> f64| ratio_estimate(batches.iter().map(|b| (y(b), b.duration)));
    let by_arrival = |y: &dyn Fn(&Batch) -> f64| ratio_estimate(batches.iter().map(|b| (y(b), b.arrivals)));
    let occupancy = StateFractions(ServerState::ALL.map(|s| by_time(&|b| b.occupancy[s.index()])));
    let arrival_seen = StateFractions(ServerState::ALL.map(|s| by_arrival(&|b| b.seen[s.index()])));
    let avg_voi = by_time(&|b| b.area);
    let avg_aoi = by_time(&|b| b.age_integral);

    let sampled_voi_mean = match (config.sample_voi_every, &engine.log) {
        (Some(dt), Some(log)) => Some(sampled_voi_mean(log, dt, horizon)),
        _ => None,
    };

    let report = SimReport {
        n_generated: n,
        n_admitted,
        n_delivered: engine.n_delivered,
        n_expired: engine.n_expired,
        horizon,
        total_area: engine.total_area,
        avg_voi,
        avg_aoi,
        occupancy,
        arrival_seen,
        sampled_voi_mean,
        seed: config.seed,
    };
    Ok((report, engine.log))
}
