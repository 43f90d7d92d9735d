//! Network bundle: a directory holding preprocessed network data.
//!
//! ```text
//! drive_nodes.csv  drive_edges.csv   drive network (required)
//! walk_nodes.csv   walk_edges.csv    walk network
//! stations.csv                       station_id,lon,lat
//! pois.csv                           lon,lat
//! meta.json                          {"poi_cell_size": meters}
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use crate::network::poi::load_pois_csv;
use crate::network::{
    dedupe_stations, load_csv_network, load_stations_csv, write_csv_network, NetworkKind, PoiIndex, RoadNetwork,
    StationSet,
};

pub const DEFAULT_POI_CELL: f64 = 500.0;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct BundleMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poi_cell_size: Option<f64>,
}

pub struct Bundle {
    pub drive: RoadNetwork,
    pub walk: Option<RoadNetwork>,
    pub stations: StationSet,
    pub pois: Option<PoiIndex>,
}

pub fn network_paths(dir: &Path, kind: NetworkKind) -> (PathBuf, PathBuf) {
    (dir.join(format!("{kind}_nodes.csv")), dir.join(format!("{kind}_edges.csv")))
}

pub fn save_network(dir: &Path, net: &RoadNetwork) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let (nodes, edges) = network_paths(dir, net.kind);
    write_csv_network(net, &nodes, &edges)?;
    Ok(())
}

pub fn load_meta(dir: &Path) -> Result<BundleMeta> {
    let path = dir.join("meta.json");
    if !path.exists() {
        return Ok(BundleMeta::default());
    }
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn save_meta(dir: &Path, meta: &BundleMeta) -> Result<()> {
    let path = dir.join("meta.json");
    fs::write(&path, serde_json::to_string_pretty(meta)? + "\n").with_context(|| format!("writing {}", path.display()))
}

pub fn load_kind(dir: &Path, kind: NetworkKind) -> Result<Option<RoadNetwork>> {
    let (nodes, edges) = network_paths(dir, kind);
    if !nodes.exists() {
        return Ok(None);
    }
    Ok(Some(load_csv_network(&nodes, &edges, kind)?))
}

impl Bundle {
    pub fn load(dir: &Path) -> Result<Bundle> {
        let drive = load_kind(dir, NetworkKind::Drive)?
            .with_context(|| format!("{} has no drive network", dir.display()))?;
        let walk = load_kind(dir, NetworkKind::Walk)?;
        let stations_path = dir.join("stations.csv");
        let stations = if stations_path.exists() {
            dedupe_stations(load_stations_csv(&stations_path)?, &drive, walk.as_ref()).0
        } else {
            StationSet::default()
        };
        let pois_path = dir.join("pois.csv");
        let pois = if pois_path.exists() {
            let cell = load_meta(dir)?.poi_cell_size.unwrap_or(DEFAULT_POI_CELL);
            Some(PoiIndex::build(&load_pois_csv(&pois_path)?, drive.bounds(), cell)?)
        } else {
            None
        };
        Ok(Bundle {
            drive,
            walk,
            stations,
            pois,
        })
    }
}
