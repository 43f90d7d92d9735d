//! Request similarity and instance similarity through optimal assignment.

use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimilarityError {
    #[error("instances differ in size: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("instances have no requests")]
    EmptyInstance,
    #[error("thresholds must be positive")]
    InvalidThreshold,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityThresholds {
    pub th_tt: f64,
    pub th_ts: f64,
    pub th_e: f64,
}

impl Default for SimilarityThresholds {
    fn default() -> Self {
        SimilarityThresholds {
            th_tt: 600.0,
            th_ts: 600.0,
            th_e: 600.0,
        }
    }
}

impl SimilarityThresholds {
    pub fn new(th_tt: f64, th_ts: f64, th_e: f64) -> Result<Self, SimilarityError> {
        if [th_tt, th_ts, th_e].iter().all(|t| *t > 0.0) {
            Ok(SimilarityThresholds { th_tt, th_ts, th_e })
        } else {
            Err(SimilarityError::InvalidThreshold)
        }
    }
}

/// Fields of a request the similarity measure reads. Locations are keys
/// for the travel function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityRequest {
    pub origin: usize,
    pub destination: usize,
    pub time_stamp: f64,
    pub earliest_departure: f64,
}

pub type Travel<'a> = dyn Fn(usize, usize) -> f64 + Sync + 'a;

/// 1 when space, announcement and departure are all close; 0.75 when space
/// and exactly one of the times are; 0.5 for space alone; else 0.
pub fn pair_similarity(a: &SimilarityRequest, b: &SimilarityRequest, th: &SimilarityThresholds, travel: &Travel) -> f64 {
    let phi = travel(a.origin, b.origin) + travel(a.destination, b.destination);
    if !(phi < th.th_tt) {
        return 0.0;
    }
    let tau = (a.time_stamp - b.time_stamp).abs() < th.th_ts;
    let theta = (a.earliest_departure - b.earliest_departure).abs() < th.th_e;
    match (tau, theta) {
        (true, true) => 1.0,
        (true, false) | (false, true) => 0.75,
        (false, false) => 0.5,
    }
}

/// Column assigned to each row maximizing the total weight of a square
/// matrix (Hungarian method with potentials, O(n^3)).
pub fn max_weight_assignment(weights: &[Vec<f64>]) -> Vec<usize> {
    let n = weights.len();
    if n == 0 {
        return Vec::new();
    }
    let top = weights.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
    let cost = |i: usize, j: usize| top - weights[i][j];
    // 1-based rows/columns; column 0 is the virtual start
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut col_of = vec![0; n];
    for j in 1..=n {
        col_of[row_of[j] - 1] = j - 1;
    }
    col_of
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityResult {
    pub xi: Vec<Vec<f64>>,
    /// Matched `(i, j)` pairs, one per request of the first instance.
    pub matching: Vec<(usize, usize)>,
    pub omega: f64,
}

impl SimilarityResult {
    pub fn matching_csv(&self) -> String {
        let mut s = String::from("i,j,xi\n");
        for &(i, j) in &self.matching {
            s.push_str(&format!("{i},{j},{}\n", self.xi[i][j]));
        }
        s
    }
}

pub fn instance_similarity(
    a: &[SimilarityRequest],
    b: &[SimilarityRequest],
    th: &SimilarityThresholds,
    travel: &Travel,
) -> Result<SimilarityResult, SimilarityError> {
    if a.len() != b.len() {
        return Err(SimilarityError::SizeMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(SimilarityError::EmptyInstance);
    }
    let xi: Vec<Vec<f64>> = a
        .par_iter()
        .map(|ra| b.iter().map(|rb| pair_similarity(ra, rb, th, travel)).collect())
        .collect();
    let matching: Vec<(usize, usize)> = max_weight_assignment(&xi).into_iter().enumerate().collect();
    let omega = matching.iter().map(|&(i, j)| xi[i][j]).sum::<f64>() / matching.len() as f64;
    Ok(SimilarityResult { xi, matching, omega })
}

/// Indices of instances kept greedily in input order: each kept one has
/// similarity at most `omega_max` to every instance kept before it.
pub fn diversity_filter(
    instances: &[Vec<SimilarityRequest>],
    th: &SimilarityThresholds,
    travel: &Travel,
    omega_max: f64,
) -> Result<Vec<usize>, SimilarityError> {
    let mut kept: Vec<usize> = Vec::new();
    for (i, inst) in instances.iter().enumerate() {
        let mut distinct = true;
        for &k in &kept {
            if instance_similarity(inst, &instances[k], th, travel)?.omega > omega_max {
                distinct = false;
                break;
            }
        }
        if distinct {
            kept.push(i);
        }
    }
    Ok(kept)
}
