use std::collections::{HashSet, VecDeque};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::paths::dijkstra;
use super::{haversine, Coordinate, NetworkError, RoadNetwork};

/// Nodes from which reachability is probed when hunting isolated stations.
const REACHABILITY_SAMPLES: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct RawStation {
    pub id: String,
    pub coord: Coordinate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Station {
    pub id: String,
    pub coord: Coordinate,
    pub drive_node: usize,
    pub walk_node: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StationSet {
    pub stations: Vec<Station>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DedupeStats {
    pub duplicates: usize,
    pub isolated: usize,
}

#[derive(Deserialize, Serialize)]
struct StationRow {
    station_id: String,
    lon: f64,
    lat: f64,
}

pub fn load_stations_csv(path: &Path) -> Result<Vec<RawStation>, NetworkError> {
    let io = |e: csv::Error| NetworkError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    let mut rdr = csv::Reader::from_path(path).map_err(io)?;
    let mut out = Vec::new();
    for row in rdr.deserialize::<StationRow>() {
        let row = row.map_err(|e| NetworkError::Parse(format!("{}: {e}", path.display())))?;
        out.push(RawStation {
            id: row.station_id,
            coord: Coordinate::new(row.lon, row.lat),
        });
    }
    Ok(out)
}

pub fn write_stations_csv(path: &Path, stations: &StationSet) -> Result<(), NetworkError> {
    let io = |e: csv::Error| NetworkError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    for s in &stations.stations {
        w.serialize(StationRow {
            station_id: s.id.clone(),
            lon: s.coord.lon,
            lat: s.coord.lat,
        })
        .map_err(io)?;
    }
    w.flush().map_err(|e| NetworkError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn reach(net: &RoadNetwork, source: usize) -> Vec<bool> {
    let mut seen = vec![false; net.node_count()];
    let mut queue = VecDeque::from([source]);
    seen[source] = true;
    while let Some(u) = queue.pop_front() {
        for a in net.out_arcs(u) {
            if !seen[a.to] {
                seen[a.to] = true;
                queue.push_back(a.to);
            }
        }
    }
    seen
}

/// Reachability tables from evenly spread sample nodes.
fn sample_reach(net: &RoadNetwork) -> Vec<Vec<bool>> {
    let n = net.node_count();
    let k = n.min(REACHABILITY_SAMPLES);
    (0..k).map(|i| reach(net, i * n / k)).collect()
}

fn isolated(samples: &[Vec<bool>], node: usize) -> bool {
    let misses = samples.iter().filter(|r| !r[node]).count();
    2 * misses >= samples.len()
}

/// Drops coordinate duplicates (first kept) and stations that most sample
/// nodes cannot reach, then snaps survivors to both networks.
pub fn dedupe_stations(
    raw: Vec<RawStation>,
    drive: &RoadNetwork,
    walk: Option<&RoadNetwork>,
) -> (StationSet, DedupeStats) {
    let mut stats = DedupeStats::default();
    let mut seen = HashSet::new();
    let drive_reach = sample_reach(drive);
    let walk_reach = walk.map(sample_reach);
    let mut stations = Vec::new();
    for s in raw {
        if !seen.insert((s.coord.lon.to_bits(), s.coord.lat.to_bits())) {
            stats.duplicates += 1;
            continue;
        }
        let drive_node = drive.nearest_node(s.coord);
        let walk_node = walk.map(|w| w.nearest_node(s.coord));
        let cut_off = isolated(&drive_reach, drive_node)
            || matches!((&walk_reach, walk_node), (Some(r), Some(n)) if isolated(r, n));
        if cut_off {
            stats.isolated += 1;
            continue;
        }
        stations.push(Station {
            id: s.id,
            coord: s.coord,
            drive_node,
            walk_node,
        });
    }
    (StationSet { stations }, stats)
}

/// Ids of stations reachable on foot in strictly less than `max_walk`
/// seconds, in station order. Without a walk network the straight-line
/// distance is used.
pub fn stations_within_walk(
    stations: &StationSet,
    walk: Option<&RoadNetwork>,
    origin: Coordinate,
    max_walk: f64,
    walk_speed: f64,
) -> Vec<String> {
    if !(max_walk > 0.0) || !(walk_speed > 0.0) {
        return Vec::new();
    }
    match walk {
        Some(net) => {
            let src = net.nearest_node(origin);
            let dist = dijkstra(net, src, |a| a.length / walk_speed, Some(max_walk));
            stations
                .stations
                .iter()
                .filter(|s| s.walk_node.is_some_and(|n| dist[n] < max_walk))
                .map(|s| s.id.clone())
                .collect()
        }
        None => stations
            .stations
            .iter()
            .filter(|s| haversine(origin, s.coord) / walk_speed < max_walk)
            .map(|s| s.id.clone())
            .collect(),
    }
}
