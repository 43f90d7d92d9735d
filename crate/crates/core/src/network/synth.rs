use super::geo::{offset_point, EARTH_RADIUS_M};
use super::stations::RawStation;
use super::{Arc, Coordinate, NetworkError, NetworkKind, Node, RoadNetwork};

/// Bidirectional `rows x cols` lattice with node ids `r*cols + c`.
/// Every arc has length `spacing` exactly. Node 0 sits at `origin`
/// (default `(0, 0)`), rows grow northwards and columns eastwards.
pub fn synth_grid_network(
    rows: usize,
    cols: usize,
    spacing: f64,
    maxspeed: f64,
    kind: NetworkKind,
    origin: Option<Coordinate>,
) -> Result<RoadNetwork, NetworkError> {
    if rows < 2 || cols < 2 {
        return Err(NetworkError::InvalidDimension(format!("grid {rows}x{cols}, need at least 2x2")));
    }
    if !(spacing.is_finite() && spacing > 0.0) {
        return Err(NetworkError::InvalidDimension(format!("spacing {spacing}")));
    }
    let origin = origin.unwrap_or(Coordinate::new(0.0, 0.0));
    let extent_lat = origin.lat + ((rows - 1) as f64 * spacing / EARTH_RADIUS_M).to_degrees();
    if !(-90.0..=90.0).contains(&extent_lat) {
        return Err(NetworkError::InvalidDimension("grid extends past a pole".into()));
    }
    let mut nodes = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            nodes.push(Node {
                id: (r * cols + c).to_string(),
                coord: offset_point(origin, c as f64 * spacing, r as f64 * spacing),
            });
        }
    }
    let mut arcs = Vec::with_capacity(4 * rows * cols);
    let mut link = |a: usize, b: usize| {
        for (from, to) in [(a, b), (b, a)] {
            arcs.push(Arc {
                from,
                to,
                length: spacing,
                maxspeed,
                tt: None,
            });
        }
    };
    for r in 0..rows {
        for c in 0..cols {
            let i = r * cols + c;
            if c + 1 < cols {
                link(i, i + 1);
            }
            if r + 1 < rows {
                link(i, i + cols);
            }
        }
    }
    RoadNetwork::new(kind, nodes, arcs)
}

/// Stations at every `every`-th row and column of a grid built by
/// [`synth_grid_network`], named `s<node id>`.
pub fn synth_stations(net: &RoadNetwork, cols: usize, every: usize) -> Vec<RawStation> {
    let every = every.max(1);
    net.nodes()
        .iter()
        .enumerate()
        .filter(|(i, _)| (i / cols).is_multiple_of(every) && (i % cols).is_multiple_of(every))
        .map(|(_, n)| RawStation {
            id: format!("s{}", n.id),
            coord: n.coord,
        })
        .collect()
}
