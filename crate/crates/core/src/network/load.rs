use std::collections::HashMap;
use std::path::Path;

use super::{Arc, Coordinate, NetworkError, NetworkKind, Node, RoadNetwork};

const MPH: f64 = 0.44704;
const KMH: f64 = 1.0 / 3.6;

fn io_err(path: &Path, e: impl std::fmt::Display) -> NetworkError {
    NetworkError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

/// Reads a maxspeed tag. Bare numbers are m/s; `mph` and `km/h` suffixes
/// are converted. For list values the first entry wins.
pub fn parse_maxspeed(raw: &str) -> Option<f64> {
    let mut s = raw.trim();
    if let Some(inner) = s.strip_prefix('[').and_then(|t| t.strip_suffix(']')) {
        s = inner.split(',').next()?.trim();
    }
    let s = s.trim_matches(|c| c == '\'' || c == '"').trim().to_ascii_lowercase();
    let split = s.find(|c: char| !(c.is_ascii_digit() || c == '.')).unwrap_or(s.len());
    let value: f64 = s[..split].trim().parse().ok()?;
    let factor = match s[split..].trim() {
        "" | "m/s" | "mps" => 1.0,
        "mph" | "miph" => MPH,
        "km/h" | "kmh" | "kph" => KMH,
        _ => return None,
    };
    let v = value * factor;
    (v.is_finite() && v > 0.0).then_some(v)
}

fn parse_f64(text: &str, element: &str, attribute: &str) -> Result<f64, NetworkError> {
    text.trim()
        .parse::<f64>()
        .map_err(|_| NetworkError::Parse(format!("{element}: `{attribute}` is not a number: `{text}`")))
}

/// Loads an OSMnx-style GraphML file (node `x`/`y`, edge `length` and
/// `maxspeed`). Undirected graphs get an arc in each direction.
pub fn load_network(path: &Path, kind: NetworkKind) -> Result<RoadNetwork, NetworkError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_graphml(&text, kind)
}

pub fn parse_graphml(text: &str, kind: NetworkKind) -> Result<RoadNetwork, NetworkError> {
    let doc = roxmltree::Document::parse(text).map_err(|e| NetworkError::Parse(e.to_string()))?;
    let mut keys: HashMap<(String, String), String> = HashMap::new();
    for k in doc.descendants().filter(|n| n.has_tag_name("key")) {
        let (Some(id), Some(name)) = (k.attribute("id"), k.attribute("attr.name")) else {
            continue;
        };
        let domain = k.attribute("for").unwrap_or("all");
        for d in ["node", "edge"] {
            if domain == d || domain == "all" {
                keys.insert((d.to_string(), id.to_string()), name.to_string());
            }
        }
    }
    let graph = doc
        .descendants()
        .find(|n| n.has_tag_name("graph"))
        .ok_or_else(|| NetworkError::Parse("no <graph> element".into()))?;
    let undirected = graph.attribute("edgedefault") == Some("undirected");

    let data = |el: roxmltree::Node, domain: &str| -> HashMap<String, String> {
        el.children()
            .filter(|c| c.has_tag_name("data"))
            .filter_map(|c| {
                let key = c.attribute("key")?;
                let name = keys.get(&(domain.to_string(), key.to_string())).cloned().unwrap_or(key.to_string());
                Some((name, c.text().unwrap_or("").to_string()))
            })
            .collect()
    };

    let mut nodes = Vec::new();
    let mut index = HashMap::new();
    for n in graph.children().filter(|c| c.has_tag_name("node")) {
        let id = n
            .attribute("id")
            .ok_or_else(|| NetworkError::Parse("node without id".into()))?
            .to_string();
        let attrs = data(n, "node");
        let element = format!("node `{id}`");
        let get = |name: &str| {
            attrs.get(name).ok_or_else(|| NetworkError::MissingAttribute {
                element: element.clone(),
                attribute: name.to_string(),
            })
        };
        let lon = parse_f64(get("x")?, &element, "x")?;
        let lat = parse_f64(get("y")?, &element, "y")?;
        index.insert(id.clone(), nodes.len());
        nodes.push(Node {
            id,
            coord: Coordinate::new(lon, lat),
        });
    }

    let mut arcs = Vec::new();
    let mut defaulted = 0;
    for e in graph.children().filter(|c| c.has_tag_name("edge")) {
        let endpoint = |attr: &str| -> Result<usize, NetworkError> {
            let id = e
                .attribute(attr)
                .ok_or_else(|| NetworkError::Parse(format!("edge without {attr}")))?;
            index
                .get(id)
                .copied()
                .ok_or_else(|| NetworkError::Parse(format!("edge references unknown node `{id}`")))
        };
        let (u, v) = (endpoint("source")?, endpoint("target")?);
        let attrs = data(e, "edge");
        let element = format!("edge {} -> {}", nodes[u].id, nodes[v].id);
        let length = attrs.get("length").ok_or_else(|| NetworkError::MissingAttribute {
            element: element.clone(),
            attribute: "length".into(),
        })?;
        let length = parse_f64(length, &element, "length")?;
        let maxspeed = match attrs.get("maxspeed").and_then(|s| parse_maxspeed(s)) {
            Some(s) => s,
            None => {
                defaulted += 1;
                kind.default_speed()
            }
        };
        arcs.push(Arc { from: u, to: v, length, maxspeed, tt: None });
        if undirected && u != v {
            arcs.push(Arc { from: v, to: u, length, maxspeed, tt: None });
        }
    }
    let mut net = RoadNetwork::new(kind, nodes, arcs)?;
    net.defaulted_speeds = defaulted;
    Ok(net)
}

fn column(headers: &csv::StringRecord, name: &str, path: &Path) -> Result<usize, NetworkError> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| NetworkError::MissingAttribute {
            element: path.display().to_string(),
            attribute: name.to_string(),
        })
}

fn cell<'r>(rec: &'r csv::StringRecord, col: usize, element: &str, name: &str) -> Result<&'r str, NetworkError> {
    match rec.get(col).map(str::trim) {
        Some(v) if !v.is_empty() => Ok(v),
        _ => Err(NetworkError::MissingAttribute {
            element: element.to_string(),
            attribute: name.to_string(),
        }),
    }
}

/// Loads a node CSV (`node_id,lon,lat`) and an edge CSV
/// (`u,v,length,maxspeed`, maxspeed optional).
pub fn load_csv_network(nodes_path: &Path, edges_path: &Path, kind: NetworkKind) -> Result<RoadNetwork, NetworkError> {
    let mut rdr = csv::Reader::from_path(nodes_path).map_err(|e| io_err(nodes_path, e))?;
    let headers = rdr.headers().map_err(|e| io_err(nodes_path, e))?.clone();
    let (ci, cx, cy) = (
        column(&headers, "node_id", nodes_path)?,
        column(&headers, "lon", nodes_path)?,
        column(&headers, "lat", nodes_path)?,
    );
    let mut nodes = Vec::new();
    let mut index = HashMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| NetworkError::Parse(format!("{}: {e}", nodes_path.display())))?;
        let id = cell(&rec, ci, "node row", "node_id")?.to_string();
        let element = format!("node `{id}`");
        let lon = parse_f64(cell(&rec, cx, &element, "lon")?, &element, "lon")?;
        let lat = parse_f64(cell(&rec, cy, &element, "lat")?, &element, "lat")?;
        index.insert(id.clone(), nodes.len());
        nodes.push(Node {
            id,
            coord: Coordinate::new(lon, lat),
        });
    }

    let mut rdr = csv::Reader::from_path(edges_path).map_err(|e| io_err(edges_path, e))?;
    let headers = rdr.headers().map_err(|e| io_err(edges_path, e))?.clone();
    let (cu, cv, cl) = (
        column(&headers, "u", edges_path)?,
        column(&headers, "v", edges_path)?,
        column(&headers, "length", edges_path)?,
    );
    let cs = headers.iter().position(|h| h.trim() == "maxspeed");
    let mut arcs = Vec::new();
    let mut defaulted = 0;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| NetworkError::Parse(format!("{}: {e}", edges_path.display())))?;
        let lookup = |col: usize, name: &str| -> Result<usize, NetworkError> {
            let id = cell(&rec, col, "edge row", name)?;
            index
                .get(id)
                .copied()
                .ok_or_else(|| NetworkError::Parse(format!("edge references unknown node `{id}`")))
        };
        let (u, v) = (lookup(cu, "u")?, lookup(cv, "v")?);
        let element = format!("edge {} -> {}", nodes[u].id, nodes[v].id);
        let length = parse_f64(cell(&rec, cl, &element, "length")?, &element, "length")?;
        let maxspeed = match cs.and_then(|c| rec.get(c)).and_then(parse_maxspeed) {
            Some(s) => s,
            None => {
                defaulted += 1;
                kind.default_speed()
            }
        };
        arcs.push(Arc { from: u, to: v, length, maxspeed, tt: None });
    }
    let mut net = RoadNetwork::new(kind, nodes, arcs)?;
    net.defaulted_speeds = defaulted;
    Ok(net)
}

/// Writes the CSV pair read by [`load_csv_network`].
pub fn write_csv_network(net: &RoadNetwork, nodes_path: &Path, edges_path: &Path) -> Result<(), NetworkError> {
    let mut w = csv::Writer::from_path(nodes_path).map_err(|e| io_err(nodes_path, e))?;
    w.write_record(["node_id", "lon", "lat"]).map_err(|e| io_err(nodes_path, e))?;
    for n in net.nodes() {
        w.write_record([n.id.clone(), n.coord.lon.to_string(), n.coord.lat.to_string()])
            .map_err(|e| io_err(nodes_path, e))?;
    }
    w.flush().map_err(|e| io_err(nodes_path, e))?;

    let mut w = csv::Writer::from_path(edges_path).map_err(|e| io_err(edges_path, e))?;
    w.write_record(["u", "v", "length", "maxspeed"]).map_err(|e| io_err(edges_path, e))?;
    for a in net.arcs() {
        w.write_record([
            net.node(a.from).id.clone(),
            net.node(a.to).id.clone(),
            a.length.to_string(),
            a.maxspeed.to_string(),
        ])
        .map_err(|e| io_err(edges_path, e))?;
    }
    w.flush().map_err(|e| io_err(edges_path, e))
}
