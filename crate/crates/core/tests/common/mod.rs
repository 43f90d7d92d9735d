#![allow(dead_code)]

use std::path::{Path, PathBuf};

use odgen::config::{parse_config, validate_config, ValidatedConfig, TIME_STAMP};
use odgen::expr::{evaluate, parse_expression, Layered, Value};
use odgen::generator::{Instance, Scenario};
use odgen::network::{dedupe_stations, synth_grid_network, synth_stations, Arc, Coordinate, NetworkKind, Node, RoadNetwork, StationSet};

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn config_file(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

/// Synthetic city: drive and walk grids plus stations every `every` nodes.
pub struct Grid {
    pub drive: RoadNetwork,
    pub walk: RoadNetwork,
    pub stations: StationSet,
}

impl Grid {
    pub fn new(side: usize, spacing: f64, every: usize, alpha: f64) -> Grid {
        let origin = Some(Coordinate::new(-87.65, 41.86));
        let mut drive = synth_grid_network(side, side, spacing, 13.9, NetworkKind::Drive, origin).unwrap();
        let mut walk =
            synth_grid_network(side, side, spacing, NetworkKind::Walk.default_speed(), NetworkKind::Walk, origin).unwrap();
        drive.compute_arc_travel_times(alpha, None).unwrap();
        walk.compute_arc_travel_times(1.0, None).unwrap();
        let (stations, _) = dedupe_stations(synth_stations(&drive, side, every), &drive, Some(&walk));
        Grid { drive, walk, stations }
    }

    pub fn scenario(&self) -> Scenario<'_> {
        Scenario::new(&self.drive, Some(&self.walk), &self.stations, None).unwrap()
    }
}

pub fn load_config(name: &str, net: &RoadNetwork) -> ValidatedConfig {
    let text = std::fs::read_to_string(config_file(name)).unwrap();
    validate_config(&parse_config(&text).unwrap(), net).unwrap()
}

/// Re-parses every constraint from its text and evaluates it on each
/// record. Records made static by `static_probability` carry time stamp 0
/// and are exempt from the time stamp constraints.
pub fn violations(vcfg: &ValidatedConfig, inst: &Instance, scenario: &Scenario) -> Vec<String> {
    let static_p = vcfg.config.attribute(TIME_STAMP).and_then(|a| a.static_probability).is_some();
    let mut out = Vec::new();
    for (k, rec) in inst.requests.iter().enumerate() {
        let env = Layered { first: rec, second: &inst.parameters };
        let is_static = static_p && rec.get(TIME_STAMP).is_some_and(|v| v.as_f64() == Some(0.0));
        for a in &vcfg.config.attributes {
            if is_static && a.name == TIME_STAMP {
                continue;
            }
            for c in &a.constraints {
                let expr = parse_expression(&c.text).unwrap();
                if !matches!(evaluate(&expr, &env, scenario), Ok(v) if v.truthy()) {
                    out.push(format!("request {k}: {}", c.text));
                }
            }
        }
    }
    out
}

pub fn strings(v: Option<&Value>) -> Vec<String> {
    match v {
        Some(Value::Array(items)) | Some(Value::Set(items)) => items
            .iter()
            .map(|x| match x {
                Value::Str(s) => s.clone(),
                other => format!("{other:?}"),
            })
            .collect(),
        _ => Vec::new(),
    }
}

/// Network on `n` nodes from `(from, to, length)` triples with unit
/// speed, so travel times equal lengths.
pub fn tiny_network(n: usize, arcs: &[(usize, usize, f64)]) -> RoadNetwork {
    let nodes = (0..n)
        .map(|i| Node {
            id: i.to_string(),
            coord: Coordinate::new(0.001 * i as f64, 0.0005 * (i % 3) as f64),
        })
        .collect();
    let arcs = arcs
        .iter()
        .map(|&(from, to, length)| Arc {
            from,
            to,
            length,
            maxspeed: 1.0,
            tt: None,
        })
        .collect();
    let mut net = RoadNetwork::new(NetworkKind::Drive, nodes, arcs).unwrap();
    net.compute_arc_travel_times(1.0, None).unwrap();
    net
}

/// Cheapest simple path from `s` to every node by depth-first enumeration.
pub fn enumerate_paths(n: usize, arcs: &[(usize, usize, f64)], s: usize) -> Vec<f64> {
    fn walk(u: usize, cost: f64, arcs: &[(usize, usize, f64)], seen: &mut [bool], best: &mut [f64]) {
        best[u] = best[u].min(cost);
        for &(a, b, w) in arcs {
            if a == u && !seen[b] {
                seen[b] = true;
                walk(b, cost + w, arcs, seen, best);
                seen[b] = false;
            }
        }
    }
    let mut best = vec![f64::INFINITY; n];
    let mut seen = vec![false; n];
    seen[s] = true;
    walk(s, 0.0, arcs, &mut seen, &mut best);
    best
}

/// Best total weight over all permutations.
pub fn brute_force_assignment(w: &[Vec<f64>]) -> f64 {
    fn go(row: usize, w: &[Vec<f64>], used: &mut [bool], acc: f64, best: &mut f64) {
        if row == w.len() {
            *best = best.max(acc);
            return;
        }
        for j in 0..w.len() {
            if !used[j] {
                used[j] = true;
                go(row + 1, w, used, acc + w[row][j], best);
                used[j] = false;
            }
        }
    }
    let mut best = f64::NEG_INFINITY;
    go(0, w, &mut vec![false; w.len()], 0.0, &mut best);
    best
}

/// Candidate endpoints `(request, is_origin)` of requests other than `i`
/// whose reference time is strictly within `th` of `at`, listed by brute force.
pub fn oracle_candidates(windows: &[(f64, f64)], i: usize, at: f64, th: f64) -> Vec<(usize, bool)> {
    let mut out = Vec::new();
    for (j, &(e, l)) in windows.iter().enumerate() {
        for (is_origin, t) in [(true, e), (false, l)] {
            if j != i && (at - t).abs() < th {
                out.push((j, is_origin));
            }
        }
    }
    out.sort();
    out
}

/// Smallest average over every subset of `min(n, len)` of `times`.
pub fn oracle_nearest_average(times: &[f64], n: usize) -> f64 {
    let k = n.min(times.len());
    if k == 0 {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << times.len()) {
        if mask.count_ones() as usize == k {
            let s: f64 = (0..times.len()).filter(|b| mask >> b & 1 == 1).map(|b| times[b]).sum();
            best = best.min(s);
        }
    }
    best / k as f64
}
