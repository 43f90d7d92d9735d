use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;
use sha2::{Digest, Sha256};

use super::{GeneratorError, Instance, TravelMatrix};
use crate::expr::Value;
use crate::network::RoadNetwork;
use crate::sampling::RngStream;

#[derive(Debug, Clone, PartialEq)]
pub struct WrittenFiles {
    pub requests: PathBuf,
    pub matrix: Option<PathBuf>,
    pub graph: Option<PathBuf>,
    pub meta: PathBuf,
}

fn io_err(path: &Path, e: impl ToString) -> GeneratorError {
    GeneratorError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn write(path: &Path, bytes: &[u8]) -> Result<String, GeneratorError> {
    fs::write(path, bytes).map_err(|e| io_err(path, e))?;
    Ok(Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect())
}

/// CSV cell text; locations print as drive node ids.
pub fn cell(v: &Value, net: &RoadNetwork) -> String {
    match v {
        Value::Location(l) => net.node(l.node).id.clone(),
        Value::Array(items) | Value::Set(items) => {
            let parts: Vec<String> = items.iter().map(|x| cell(x, net)).collect();
            format!("[{}]", parts.join(","))
        }
        other => other.to_string(),
    }
}

pub fn requests_csv(instance: &Instance, net: &RoadNetwork) -> Result<Vec<u8>, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&instance.columns)?;
    for r in &instance.requests {
        w.write_record(instance.columns.iter().map(|c| r.get(c).map(|v| cell(v, net)).unwrap_or_default()))?;
    }
    w.into_inner().map_err(|e| e.into_error().into())
}

pub fn matrix_csv(m: &TravelMatrix) -> Result<Vec<u8>, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(std::iter::once("").chain(m.labels.iter().map(String::as_str)))?;
    for (label, row) in m.labels.iter().zip(&m.times) {
        let cells = row.iter().map(|t| t.map(|x| x.to_string()).unwrap_or_default());
        w.write_record(std::iter::once(label.clone()).chain(cells))?;
    }
    w.into_inner().map_err(|e| e.into_error().into())
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Directed graph over the matrix locations weighted by travel time.
pub fn locations_graphml(m: &TravelMatrix) -> String {
    let mut s = String::from(concat!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n",
        "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n",
        "  <key id=\"x\" for=\"node\" attr.name=\"x\" attr.type=\"double\"/>\n",
        "  <key id=\"y\" for=\"node\" attr.name=\"y\" attr.type=\"double\"/>\n",
        "  <key id=\"travel_time\" for=\"edge\" attr.name=\"travel_time\" attr.type=\"double\"/>\n",
        "  <graph edgedefault=\"directed\">\n",
    ));
    for (label, c) in m.labels.iter().zip(&m.coords) {
        let _ = writeln!(
            s,
            "    <node id=\"{}\"><data key=\"x\">{}</data><data key=\"y\">{}</data></node>",
            escape(label),
            c.lon,
            c.lat
        );
    }
    for (i, row) in m.times.iter().enumerate() {
        for (j, t) in row.iter().enumerate() {
            if let (true, Some(t)) = (i != j, t) {
                let _ = writeln!(
                    s,
                    "    <edge source=\"{}\" target=\"{}\"><data key=\"travel_time\">{t}</data></edge>",
                    escape(&m.labels[i]),
                    escape(&m.labels[j])
                );
            }
        }
    }
    s.push_str("  </graph>\n</graphml>\n");
    s
}

/// Writes `<name>.csv`, the matrix and graph files when a matrix was
/// requested, and `<name>_meta.json` carrying hashes of the others.
pub fn write_instance(instance: &Instance, net: &RoadNetwork, dir: &Path) -> Result<WrittenFiles, GeneratorError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let requests = dir.join(format!("{}.csv", instance.name));
    let bytes = requests_csv(instance, net).map_err(|e| io_err(&requests, e))?;
    let mut hashes = serde_json::Map::new();
    hashes.insert("requests".into(), write(&requests, &bytes)?.into());

    let (mut matrix, mut graph) = (None, None);
    if let Some(m) = &instance.matrix {
        let mpath = dir.join(format!("{}_tt_matrix.csv", instance.name));
        let bytes = matrix_csv(m).map_err(|e| io_err(&mpath, e))?;
        hashes.insert("matrix".into(), write(&mpath, &bytes)?.into());
        let gpath = dir.join(format!("{}_locations.graphml", instance.name));
        hashes.insert("graph".into(), write(&gpath, locations_graphml(m).as_bytes())?.into());
        matrix = Some(mpath);
        graph = Some(gpath);
    }

    let meta = json!({
        "name": instance.name,
        "replica": instance.replica,
        "seed": instance.seed,
        "rng": RngStream::ALGORITHM,
        "config_sha256": instance.config_hash,
        "requests": instance.requests.len(),
        "planning_period": instance.period.map(|(a, b)| vec![a, b]),
        "dynamism": instance.dynamism.as_ref().map(|p| json!({
            "target": p.target,
            "achieved": p.achieved,
            "reached": p.reached,
        })),
        "static_requests": instance.static_requests,
        "restarts": instance.restarts,
        "retries": instance.retries,
        "sha256": hashes,
    });
    let meta_path = dir.join(format!("{}_meta.json", instance.name));
    let text = serde_json::to_string_pretty(&meta).expect("meta serializes") + "\n";
    write(&meta_path, text.as_bytes())?;
    Ok(WrittenFiles {
        requests,
        matrix,
        graph,
        meta: meta_path,
    })
}
