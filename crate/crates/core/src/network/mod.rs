//! Street networks, stations, POI grids and geodesy.

pub mod geo;
pub mod load;
pub mod paths;
pub mod poi;
pub mod stations;
pub mod synth;

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use geo::{destination_point, haversine, random_point_in_zone, zone_contains, Bounds, Coordinate, Zone, ZoneShape};
pub use load::{load_csv_network, load_network, write_csv_network};
pub use paths::{shortest_travel_time, travel_time_matrix, TravelCache};
pub use poi::PoiIndex;
pub use stations::{dedupe_stations, load_stations_csv, stations_within_walk, write_stations_csv, RawStation, Station, StationSet};
pub use synth::{synth_grid_network, synth_stations};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetworkError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{element} is missing attribute `{attribute}`")]
    MissingAttribute { element: String, attribute: String },
    #[error("network has no nodes")]
    EmptyNetwork,
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("node `{to}` is unreachable from `{from}`")]
    Unreachable { from: String, to: String },
    #[error("arc travel times have not been computed")]
    TravelTimesMissing,
    #[error("invalid value: {0}")]
    InvalidValue(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NetworkKind {
    Drive,
    Walk,
}

impl NetworkKind {
    /// Speed used for arcs without a usable maxspeed, m/s.
    pub fn default_speed(self) -> f64 {
        match self {
            NetworkKind::Drive => 13.9,
            NetworkKind::Walk => 1.4,
        }
    }
}

impl fmt::Display for NetworkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NetworkKind::Drive => "drive",
            NetworkKind::Walk => "walk",
        })
    }
}

impl FromStr for NetworkKind {
    type Err = NetworkError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "drive" => Ok(NetworkKind::Drive),
            "walk" => Ok(NetworkKind::Walk),
            other => Err(NetworkError::InvalidValue(format!("network kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: String,
    pub coord: Coordinate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Arc {
    pub from: usize,
    pub to: usize,
    /// Meters.
    pub length: f64,
    /// m/s.
    pub maxspeed: f64,
    /// Seconds, set by [`RoadNetwork::compute_arc_travel_times`].
    pub tt: Option<f64>,
}

/// Directed multigraph of a street network.
#[derive(Debug, Clone)]
pub struct RoadNetwork {
    pub kind: NetworkKind,
    nodes: Vec<Node>,
    arcs: Vec<Arc>,
    out: Vec<Vec<usize>>,
    index: HashMap<String, usize>,
    bounds: Bounds,
    /// Arcs whose maxspeed fell back to the kind default.
    pub defaulted_speeds: usize,
}

/// Orders node ids numerically when both parse as integers.
pub fn compare_ids(a: &str, b: &str) -> Ordering {
    match (a.parse::<u64>(), b.parse::<u64>()) {
        (Ok(x), Ok(y)) => x.cmp(&y).then_with(|| a.cmp(b)),
        _ => a.cmp(b),
    }
}

impl RoadNetwork {
    pub fn new(kind: NetworkKind, nodes: Vec<Node>, arcs: Vec<Arc>) -> Result<Self, NetworkError> {
        let bounds = Bounds::of(nodes.iter().map(|n| n.coord)).ok_or(NetworkError::EmptyNetwork)?;
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, n) in nodes.iter().enumerate() {
            if !n.coord.is_valid() {
                return Err(NetworkError::InvalidValue(format!("node `{}` has invalid coordinates", n.id)));
            }
            if index.insert(n.id.clone(), i).is_some() {
                return Err(NetworkError::Parse(format!("duplicate node id `{}`", n.id)));
            }
        }
        let mut out = vec![Vec::new(); nodes.len()];
        for (k, a) in arcs.iter().enumerate() {
            if a.from >= nodes.len() || a.to >= nodes.len() {
                return Err(NetworkError::UnknownNode(format!("index {}", a.from.max(a.to))));
            }
            if !(a.length.is_finite() && a.length >= 0.0) || (a.from != a.to && a.length <= 0.0) {
                return Err(NetworkError::InvalidValue(format!(
                    "arc {} -> {} has length {}",
                    nodes[a.from].id, nodes[a.to].id, a.length
                )));
            }
            if !(a.maxspeed.is_finite() && a.maxspeed > 0.0) {
                return Err(NetworkError::InvalidValue(format!(
                    "arc {} -> {} has maxspeed {}",
                    nodes[a.from].id, nodes[a.to].id, a.maxspeed
                )));
            }
            out[a.from].push(k);
        }
        Ok(RoadNetwork {
            kind,
            nodes,
            arcs,
            out,
            index,
            bounds,
            defaulted_speeds: 0,
        })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node(&self, i: usize) -> &Node {
        &self.nodes[i]
    }

    pub fn out_arcs(&self, u: usize) -> impl Iterator<Item = &Arc> {
        self.out[u].iter().map(move |&k| &self.arcs[k])
    }

    pub fn node_index(&self, id: &str) -> Result<usize, NetworkError> {
        self.index.get(id).copied().ok_or_else(|| NetworkError::UnknownNode(id.to_string()))
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    /// Mean of all node coordinates.
    pub fn centroid(&self) -> Coordinate {
        let n = self.nodes.len() as f64;
        let (lon, lat) = self
            .nodes
            .iter()
            .fold((0.0, 0.0), |(x, y), node| (x + node.coord.lon, y + node.coord.lat));
        Coordinate::new(lon / n, lat / n)
    }

    pub fn has_travel_times(&self) -> bool {
        self.arcs.iter().all(|a| a.tt.is_some())
    }

    /// Sets `tt = alpha * length / speed` on every arc, where speed is the
    /// arc maxspeed unless `equal_speed` overrides it.
    pub fn compute_arc_travel_times(&mut self, alpha: f64, equal_speed: Option<f64>) -> Result<(), NetworkError> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(NetworkError::InvalidValue(format!("speed factor {alpha} outside (0, 1]")));
        }
        if let Some(s) = equal_speed {
            if !(s.is_finite() && s > 0.0) {
                return Err(NetworkError::InvalidValue(format!("equal speed {s}")));
            }
        }
        for a in &mut self.arcs {
            let speed = equal_speed.unwrap_or(a.maxspeed);
            a.tt = Some(alpha * a.length / speed);
        }
        Ok(())
    }

    /// Closest node by great-circle distance; ties go to the smallest id.
    pub fn nearest_node(&self, p: Coordinate) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, n) in self.nodes.iter().enumerate() {
            let d = haversine(p, n.coord);
            if d < best_d || (d == best_d && compare_ids(&n.id, &self.nodes[best].id) == Ordering::Less) {
                best = i;
                best_d = d;
            }
        }
        best
    }
}

pub fn nearest_node(net: &RoadNetwork, p: Coordinate) -> usize {
    net.nearest_node(p)
}

pub fn compute_arc_travel_times(net: &mut RoadNetwork, alpha: f64) -> Result<(), NetworkError> {
    net.compute_arc_travel_times(alpha, None)
}
