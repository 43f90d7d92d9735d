use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::sync::{Arc as Shared, RwLock};

use rayon::prelude::*;

use super::{Arc, NetworkError, RoadNetwork};

#[derive(Copy, Clone, PartialEq)]
struct Entry {
    cost: f64,
    node: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.cost.total_cmp(&self.cost).then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source shortest costs under `weight`. Unreached nodes stay at
/// infinity. With `bound`, nodes at cost `>= bound` are not expanded.
pub fn dijkstra(net: &RoadNetwork, source: usize, weight: impl Fn(&Arc) -> f64, bound: Option<f64>) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; net.node_count()];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Entry { cost: 0.0, node: source });
    while let Some(Entry { cost, node }) = heap.pop() {
        if cost > dist[node] {
            continue;
        }
        if bound.is_some_and(|b| cost >= b) {
            continue;
        }
        for a in net.out_arcs(node) {
            let next = cost + weight(a);
            if next < dist[a.to] {
                dist[a.to] = next;
                heap.push(Entry { cost: next, node: a.to });
            }
        }
    }
    dist
}

fn arc_tt(a: &Arc) -> f64 {
    a.tt.expect("travel times checked before search")
}

/// Travel-time tree from `source`, requiring annotated arcs.
pub fn travel_time_tree(net: &RoadNetwork, source: usize) -> Result<Vec<f64>, NetworkError> {
    if !net.has_travel_times() {
        return Err(NetworkError::TravelTimesMissing);
    }
    Ok(dijkstra(net, source, arc_tt, None))
}

pub fn shortest_travel_time(net: &RoadNetwork, u: &str, v: &str) -> Result<f64, NetworkError> {
    let (s, t) = (net.node_index(u)?, net.node_index(v)?);
    let d = travel_time_tree(net, s)?[t];
    if d.is_finite() {
        Ok(d)
    } else {
        Err(NetworkError::Unreachable {
            from: u.to_string(),
            to: v.to_string(),
        })
    }
}

/// Pairwise travel times between node indices; `None` marks unreachable
/// pairs. Row `i` holds the times from `nodes[i]`.
pub fn travel_time_matrix(net: &RoadNetwork, nodes: &[usize]) -> Result<Vec<Vec<Option<f64>>>, NetworkError> {
    if !net.has_travel_times() {
        return Err(NetworkError::TravelTimesMissing);
    }
    Ok(nodes
        .par_iter()
        .map(|&s| {
            let tree = dijkstra(net, s, arc_tt, None);
            nodes
                .iter()
                .map(|&t| Some(tree[t]).filter(|d| d.is_finite()))
                .collect()
        })
        .collect())
}

/// Memoized travel-time trees keyed by source node.
pub struct TravelCache<'a> {
    net: &'a RoadNetwork,
    trees: RwLock<HashMap<usize, Shared<Vec<f64>>>>,
    capacity: usize,
}

impl<'a> TravelCache<'a> {
    pub fn new(net: &'a RoadNetwork) -> Result<Self, NetworkError> {
        if !net.has_travel_times() {
            return Err(NetworkError::TravelTimesMissing);
        }
        // keep roughly 64M floats at most
        let capacity = (64_000_000 / net.node_count().max(1)).max(16);
        Ok(TravelCache {
            net,
            trees: RwLock::new(HashMap::new()),
            capacity,
        })
    }

    pub fn network(&self) -> &RoadNetwork {
        self.net
    }

    pub fn tree(&self, source: usize) -> Shared<Vec<f64>> {
        if let Some(t) = self.trees.read().unwrap().get(&source) {
            return t.clone();
        }
        let tree = Shared::new(dijkstra(self.net, source, arc_tt, None));
        let mut guard = self.trees.write().unwrap();
        if guard.len() >= self.capacity {
            guard.clear();
        }
        guard.entry(source).or_insert(tree).clone()
    }

    /// Travel time between node indices, `None` if unreachable.
    pub fn travel_time(&self, u: usize, v: usize) -> Option<f64> {
        if u == v {
            return Some(0.0);
        }
        Some(self.tree(u)[v]).filter(|d| d.is_finite())
    }
}
