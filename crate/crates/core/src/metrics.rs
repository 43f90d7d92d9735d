//! Instance measures: dynamism, urgency and geographic dispersion.

use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("need at least 2 dynamic requests, found {0}")]
    TooFewRequests(usize),
    #[error("time stamps are not sorted")]
    UnsortedInput,
    #[error("planning period [{0}, {1}] is empty")]
    DegeneratePeriod(f64, f64),
    #[error("request {index} has negative reaction time {value}")]
    NegativeReactionTime { index: usize, value: f64 },
    #[error("instance has no requests")]
    EmptyInstance,
}

/// Defaults for the dispersion neighborhood.
pub const DEFAULT_TH_S: f64 = 600.0;
pub const DEFAULT_NEIGHBORS: usize = 2;

/// Value cut to two decimals, the way the reference tables print.
pub fn display2(x: f64) -> f64 {
    (x * 100.0 + 1e-9).floor() / 100.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamismReport {
    pub theta: f64,
    pub deltas: Vec<f64>,
    pub sigmas: Vec<f64>,
    pub lambda: f64,
    pub sigma_bars: Vec<f64>,
    pub eta: f64,
    pub rho: f64,
    pub dynamic_count: usize,
}

/// Dynamism of sorted announcement times over `period`. Requests at or
/// before the period start count as static and are ignored.
pub fn dynamism(timestamps: &[f64], period: (f64, f64)) -> Result<DynamismReport, MetricsError> {
    let (ts_min, ts_max) = period;
    if !(ts_max > ts_min) {
        return Err(MetricsError::DegeneratePeriod(ts_min, ts_max));
    }
    if timestamps.windows(2).any(|w| w[1] < w[0]) {
        return Err(MetricsError::UnsortedInput);
    }
    let dynamic: Vec<f64> = timestamps.iter().copied().filter(|&t| t > ts_min).collect();
    if dynamic.len() < 2 {
        return Err(MetricsError::TooFewRequests(dynamic.len()));
    }
    let theta = (ts_max - ts_min) / dynamic.len() as f64;
    let deltas: Vec<f64> = dynamic.windows(2).map(|w| w[1] - w[0]).collect();
    let mut sigmas = Vec::with_capacity(deltas.len());
    let mut sigma_bars = Vec::with_capacity(deltas.len());
    let mut prev = 0.0;
    for (k, &delta) in deltas.iter().enumerate() {
        let (sigma, bar) = if delta < theta {
            let gap = theta - delta;
            let burst = if k > 0 { gap / theta * prev } else { 0.0 };
            (gap + burst, theta + burst)
        } else {
            (0.0, theta)
        };
        sigmas.push(sigma);
        sigma_bars.push(bar);
        prev = sigma;
    }
    let lambda: f64 = sigmas.iter().sum();
    let eta: f64 = sigma_bars.iter().sum();
    let rho = (1.0 - lambda / eta).clamp(0.0, 1.0);
    Ok(DynamismReport {
        theta,
        deltas,
        sigmas,
        lambda,
        sigma_bars,
        eta,
        rho,
        dynamic_count: dynamic.len(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct UrgencyReport {
    pub values: Vec<f64>,
    pub mean: f64,
    pub std: f64,
}

/// Reaction times `latest_departure - time_stamp`, with population statistics.
pub fn urgency(requests: &[(f64, f64)]) -> Result<UrgencyReport, MetricsError> {
    if requests.is_empty() {
        return Err(MetricsError::EmptyInstance);
    }
    let mut values = Vec::with_capacity(requests.len());
    for (index, &(ts, lu)) in requests.iter().enumerate() {
        let f = lu - ts;
        if f < 0.0 {
            return Err(MetricsError::NegativeReactionTime { index, value: f });
        }
        values.push(f);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / n;
    Ok(UrgencyReport { values, mean, std: var.sqrt() })
}

/// One request as seen by the dispersion measure. Locations are opaque
/// keys handed back to the travel function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionRequest {
    pub origin: usize,
    pub destination: usize,
    pub earliest_departure: f64,
    pub latest_arrival: f64,
    /// Direct travel time counted in the mean.
    pub direct: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Endpoint {
    Origin(usize),
    Destination(usize),
}

impl Endpoint {
    fn location(self, reqs: &[DispersionRequest]) -> usize {
        match self {
            Endpoint::Origin(j) => reqs[j].origin,
            Endpoint::Destination(j) => reqs[j].destination,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Neighborhood {
    /// Candidates whose time windows lie within the threshold.
    pub candidates: Vec<Endpoint>,
    pub nearest: Vec<Endpoint>,
    pub average: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispersionReport {
    pub mu: f64,
    pub origin_sets: Vec<Neighborhood>,
    pub destination_sets: Vec<Neighborhood>,
    pub omega: f64,
    pub gd: f64,
    pub th_s: f64,
    pub n: usize,
}

/// Endpoints of other requests whose window reference lies strictly within
/// `th_s` of `at`, in request order with origins first.
pub fn candidate_endpoints(reqs: &[DispersionRequest], i: usize, at: f64, th_s: f64) -> Vec<Endpoint> {
    let mut out = Vec::new();
    for (j, r) in reqs.iter().enumerate() {
        if j == i {
            continue;
        }
        if (at - r.earliest_departure).abs() < th_s {
            out.push(Endpoint::Origin(j));
        }
        if (at - r.latest_arrival).abs() < th_s {
            out.push(Endpoint::Destination(j));
        }
    }
    out
}

fn neighborhood(
    reqs: &[DispersionRequest],
    from: usize,
    candidates: Vec<Endpoint>,
    travel: &dyn Fn(usize, usize) -> f64,
    n: usize,
) -> Neighborhood {
    let mut timed: Vec<(f64, Endpoint)> = candidates.iter().map(|&e| (travel(from, e.location(reqs)), e)).collect();
    // stable: equal times keep candidate order
    timed.sort_by(|a, b| a.0.total_cmp(&b.0));
    timed.truncate(n);
    let average = if timed.is_empty() {
        0.0
    } else {
        timed.iter().map(|t| t.0).sum::<f64>() / timed.len() as f64
    };
    Neighborhood {
        candidates,
        nearest: timed.into_iter().map(|t| t.1).collect(),
        average,
    }
}

/// `gd = mu + omega`, where `omega` averages the travel time from each
/// endpoint to its `n` nearest time-compatible endpoints of other requests.
pub fn geographic_dispersion(
    reqs: &[DispersionRequest],
    travel: &dyn Fn(usize, usize) -> f64,
    th_s: f64,
    n: usize,
) -> Result<DispersionReport, MetricsError> {
    if reqs.is_empty() {
        return Err(MetricsError::EmptyInstance);
    }
    let count = reqs.len() as f64;
    let mu = reqs.iter().map(|r| r.direct).sum::<f64>() / count;
    let mut origin_sets = Vec::with_capacity(reqs.len());
    let mut destination_sets = Vec::with_capacity(reqs.len());
    for (i, r) in reqs.iter().enumerate() {
        let lo = candidate_endpoints(reqs, i, r.earliest_departure, th_s);
        let ld = candidate_endpoints(reqs, i, r.latest_arrival, th_s);
        origin_sets.push(neighborhood(reqs, r.origin, lo, travel, n));
        destination_sets.push(neighborhood(reqs, r.destination, ld, travel, n));
    }
    let total: f64 = origin_sets.iter().chain(&destination_sets).map(|s| s.average).sum();
    let omega = total / (2.0 * count);
    Ok(DispersionReport {
        mu,
        origin_sets,
        destination_sets,
        omega,
        gd: mu + omega,
        th_s,
        n,
    })
}

/// Flat summary with the documented keys; missing measures are skipped.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricsSummary {
    pub dynamism: Option<DynamismReport>,
    pub urgency: Option<UrgencyReport>,
    pub dispersion: Option<DispersionReport>,
}

impl MetricsSummary {
    pub fn entries(&self) -> Vec<(&'static str, f64)> {
        let mut out = Vec::new();
        if let Some(d) = &self.dynamism {
            out.extend([("theta", d.theta), ("lambda", d.lambda), ("eta", d.eta), ("rho", d.rho)]);
        }
        if let Some(u) = &self.urgency {
            out.extend([("urgency_mean", u.mean), ("urgency_std", u.std)]);
        }
        if let Some(g) = &self.dispersion {
            out.extend([("mu", g.mu), ("omega", g.omega), ("gd", g.gd)]);
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("key,value\n");
        for (k, v) in self.entries() {
            let _ = writeln!(s, "{k},{v}");
        }
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.entries() {
            let _ = writeln!(s, "{k:<13}{:.2}", display2(v));
        }
        s
    }
}
