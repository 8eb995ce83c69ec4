//! Deliveries seen by the receiver and the instantaneous VoI they produce.

use crate::model::DescendFunction;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Delivery {
    pub id: u64,
    pub t_gen: f64,
    pub t_recv: f64,
    pub v0: f64,
}

/// Deliveries that still had value on reception, in reception order.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceiverLog {
    descend: DescendFunction,
    deliveries: Vec<Delivery>,
}

impl ReceiverLog {
    pub fn new(descend: DescendFunction) -> Self {
        ReceiverLog {
            descend,
            deliveries: Vec::new(),
        }
    }

    /// Appends a delivery. Reception times must be non-decreasing; packets
    /// already past their deadline are ignored.
    pub fn record(&mut self, delivery: Delivery) {
        debug_assert!(self.deliveries.last().is_none_or(|d| d.t_recv <= delivery.t_recv));
        if delivery.t_recv - delivery.t_gen < self.descend.deadline() {
            self.deliveries.push(delivery);
        }
    }

    pub fn deliveries(&self) -> &[Delivery] {
        &self.deliveries
    }

    pub fn descend(&self) -> &DescendFunction {
        &self.descend
    }

    /// Sum of the post-reception areas of all logged deliveries.
    pub fn total_area(&self) -> f64 {
        self.deliveries
            .iter()
            .map(|d| self.descend.q_area(d.v0, d.t_recv - d.t_gen).unwrap_or(0.0))
            .sum()
    }
}

/// Total value at the receiver at time `t`: every packet received by `t`
/// contributes its decayed value until its deadline.
pub fn instantaneous_voi(log: &ReceiverLog, t: f64) -> f64 {
    let d = log.descend.deadline();
    let end = log.deliveries.partition_point(|x| x.t_recv <= t);
    let mut total = 0.0;
    // t_gen <= t_recv, so anything received before t - D has expired
    for x in log.deliveries[..end].iter().rev() {
        if x.t_recv <= t - d {
            break;
        }
        total += log.descend.value_unchecked(x.v0, t - x.t_gen);
    }
    total
}

/// Mean of the instantaneous VoI sampled at `dt, 2 dt, ...` up to `horizon`.
pub fn sampled_voi_mean(log: &ReceiverLog, dt: f64, horizon: f64) -> f64 {
    let n = (horizon / dt).floor() as u64;
    if n == 0 {
        return 0.0;
    }
    let d = log.descend.deadline();
    let xs = &log.deliveries;
    // deliveries in xs[lo..hi] are received and not yet expired at t
    let (mut lo, mut hi) = (0, 0);
    let mut sum = 0.0;
    for k in 1..=n {
        let t = k as f64 * dt;
        while hi < xs.len() && xs[hi].t_recv <= t {
            hi += 1;
        }
        while lo < hi && xs[lo].t_recv <= t - d {
            lo += 1;
        }
        sum += xs[lo..hi].iter().map(|x| log.descend.value_unchecked(x.v0, t - x.t_gen)).sum::<f64>();
    }
    sum / n as f64
}

/// Trapezoid-rule integral of the instantaneous VoI over `[0, horizon]` on a
/// grid of step at most `dt`.
pub fn trapezoid_voi_integral(log: &ReceiverLog, dt: f64, horizon: f64) -> f64 {
    let n = (horizon / dt).ceil().max(1.0) as u64;
    let h = horizon / n as f64;
    let inner: f64 = (1..n).map(|k| instantaneous_voi(log, k as f64 * h)).sum();
    h * (inner + 0.5 * (instantaneous_voi(log, 0.0) + instantaneous_voi(log, horizon)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn log_with(deliveries: &[(f64, f64, f64)]) -> ReceiverLog {
        let mut log = ReceiverLog::new(DescendFunction::linear(3.0).unwrap());
        for (i, &(t_gen, t_recv, v0)) in deliveries.iter().enumerate() {
            log.record(Delivery {
                id: i as u64,
                t_gen,
                t_recv,
                v0,
            });
        }
        log
    }

    #[test]
    fn empty_log_has_no_value() {
        assert_eq!(instantaneous_voi(&log_with(&[]), 5.0), 0.0);
    }

    #[test]
    fn value_vanishes_at_the_deadline() {
        let log = log_with(&[(1.0, 2.0, 10.0)]);
        assert_eq!(instantaneous_voi(&log, 4.0), 0.0);
        assert_eq!(instantaneous_voi(&log, 1.5), 0.0);
        assert!((instantaneous_voi(&log, 2.5) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn values_add_up() {
        let log = log_with(&[(0.0, 1.0, 3.0), (0.5, 1.5, 6.0)]);
        assert!((instantaneous_voi(&log, 2.0) - (3.0 / 3.0 + 6.0 * 1.5 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn stale_receptions_are_not_logged() {
        let log = log_with(&[(0.0, 3.0, 3.0), (0.0, 3.5, 3.0)]);
        assert!(log.deliveries().is_empty());
    }

    #[test]
    fn trapezoid_matches_area_sum() {
        let log = log_with(&[(0.0, 0.5, 2.0), (1.0, 1.2, 4.0), (1.1, 2.0, 1.0)]);
        let integral = trapezoid_voi_integral(&log, 1e-4, 10.0);
        assert!((integral - log.total_area()).abs() < 1e-3 * log.total_area());
        let mean = sampled_voi_mean(&log, 1e-3, 10.0);
        assert!((mean * 10.0 - log.total_area()).abs() < 5e-3 * log.total_area());
        let pointwise = (1..=10_000).map(|k| instantaneous_voi(&log, k as f64 * 1e-3)).sum::<f64>() / 1e4;
        assert!((mean - pointwise).abs() < 1e-12);
    }
}
