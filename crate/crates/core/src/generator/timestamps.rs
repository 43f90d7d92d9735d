use super::{GeneratorError, RequestRecord};
use crate::config::TIME_STAMP;
use crate::expr::{round_half_up, Value};
use crate::metrics::dynamism;
use crate::sampling::RngStream;

/// Stop once the measured dynamism is this close to the target.
pub const DYNAMISM_TOLERANCE: f64 = 0.02;

#[derive(Debug, Clone, PartialEq)]
pub struct TimeStampPlan {
    /// Sorted announcement times.
    pub stamps: Vec<f64>,
    pub target: f64,
    pub achieved: f64,
    pub reached: bool,
}

fn rho(stamps: &[f64], period: (f64, f64)) -> f64 {
    dynamism(stamps, period).map(|r| r.rho).unwrap_or(0.0)
}

/// `n` sorted time stamps in `period` whose dynamism approaches `target`.
///
/// Starts from perfect spacing and applies burst moves: a suffix of the
/// stamps slides left by a random fraction of the gap in front of it. Only
/// moves that bring the measure closer to the target are kept.
pub fn assign_time_stamps(
    n: usize,
    period: (f64, f64),
    target: f64,
    integral: bool,
    rng: &mut RngStream,
) -> Result<TimeStampPlan, GeneratorError> {
    let (ts_min, ts_max) = period;
    if n < 2 || !(ts_max > ts_min) || !(0.0..=1.0).contains(&target) {
        return Err(GeneratorError::InvalidDynamismTarget);
    }
    let snap = |x: f64| if integral { round_half_up(x) } else { x };
    let theta = (ts_max - ts_min) / n as f64;
    let mut stamps: Vec<f64> = (1..=n).map(|k| snap(ts_min + theta * k as f64).min(ts_max)).collect();
    if target <= 0.0 {
        let first = stamps[0];
        stamps.fill(first);
    }
    let mut current = rho(&stamps, period);
    let mut err = (current - target).abs();
    let mut candidate = stamps.clone();
    for _ in 0..10 * n {
        if err <= DYNAMISM_TOLERANCE {
            break;
        }
        let k = 1 + rng.below(n - 1);
        let shift = snap(rng.next_f64() * (stamps[k] - stamps[k - 1]));
        if shift <= 0.0 {
            continue;
        }
        candidate.copy_from_slice(&stamps);
        candidate[k..].iter_mut().for_each(|t| *t -= shift);
        let r = rho(&candidate, period);
        if (r - target).abs() < err {
            std::mem::swap(&mut stamps, &mut candidate);
            current = r;
            err = (r - target).abs();
        }
    }
    Ok(TimeStampPlan {
        stamps,
        target,
        achieved: current,
        reached: err <= DYNAMISM_TOLERANCE,
    })
}

/// With probability `p` the request becomes static: its time stamp is 0.
pub fn apply_static_probability(record: &mut RequestRecord, p: f64, rng: &mut RngStream) -> bool {
    let hit = rng.bernoulli(p);
    if hit {
        record.values.insert(TIME_STAMP.to_string(), Value::Int(0));
    }
    hit
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extremes() {
        let mut rng = RngStream::new(1);
        let even = assign_time_stamps(10, (0.0, 100.0), 1.0, true, &mut rng).unwrap();
        assert_eq!(even.stamps, (1..=10).map(|k| 10.0 * k as f64).collect::<Vec<_>>());
        assert_eq!(even.achieved, 1.0);
        let burst = assign_time_stamps(10, (0.0, 100.0), 0.0, true, &mut rng).unwrap();
        assert!(burst.stamps.iter().all(|&t| t == burst.stamps[0]));
        assert_eq!(burst.achieved, 0.0);
    }

    #[test]
    fn half_target() {
        let mut rng = RngStream::new(7);
        let plan = assign_time_stamps(100, (0.0, 3600.0), 0.5, true, &mut rng).unwrap();
        assert!(plan.reached, "{}", plan.achieved);
        assert!((0.48..=0.52).contains(&plan.achieved));
        assert!(plan.stamps.windows(2).all(|w| w[0] <= w[1]));
        assert!(plan.stamps.iter().all(|&t| t > 0.0 && t <= 3600.0));
        assert_eq!(rho(&plan.stamps, (0.0, 3600.0)), plan.achieved);
    }

    #[test]
    fn bad_inputs() {
        let mut rng = RngStream::new(1);
        assert!(assign_time_stamps(1, (0.0, 10.0), 0.5, true, &mut rng).is_err());
        assert!(assign_time_stamps(5, (10.0, 10.0), 0.5, true, &mut rng).is_err());
    }

    #[test]
    fn static_probability_extremes() {
        let mut rng = RngStream::new(3);
        let mut r = RequestRecord::default();
        r.values.insert(TIME_STAMP.into(), Value::Int(500));
        assert!(!apply_static_probability(&mut r, 0.0, &mut rng));
        assert_eq!(r.get(TIME_STAMP), Some(&Value::Int(500)));
        assert!(apply_static_probability(&mut r, 1.0, &mut rng));
        assert_eq!(r.get(TIME_STAMP), Some(&Value::Int(0)));
    }
}
