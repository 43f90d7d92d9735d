//! Instance generation: request synthesis, placement methods, time stamps,
//! replicas and output files.

pub mod instance;
pub mod order;
pub mod output;
pub mod poi_method;
pub mod request;
pub mod timestamps;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::config::ConfigError;
use crate::expr::{Bindings, EvalContext, ExprError, Location, Value};
use crate::network::{stations_within_walk, Coordinate, NetworkError, PoiIndex, RoadNetwork, StationSet, TravelCache};
use crate::sampling::SamplingError;

pub use instance::{generate_instance, generate_replicas, instance_name, Instance, TravelMatrix};
pub use order::build_attribute_order;
pub use output::{write_instance, WrittenFiles};
pub use poi_method::{apply_poi_method, PoiDraw};
pub use request::{generate_request, ParameterValues, RequestOutcome};
pub use timestamps::{apply_static_probability, assign_time_stamps, TimeStampPlan};

/// Attempts per attribute before the whole record is discarded.
pub const ATTRIBUTE_RETRIES: u32 = 50;
/// Discarded records tolerated per request before giving up.
pub const RECORD_RESTARTS: u32 = 10_000;
/// Total redraws allowed when placing a POI pair.
pub const POI_REDRAWS: u32 = 200;
/// Bearing redraws before a new distance is drawn.
pub const POI_BEARING_REDRAWS: u32 = 20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeneratorError {
    #[error("no feasible request after {restarts} restarts (last failure: {attribute})")]
    InfeasibleConfig { attribute: String, restarts: u32 },
    #[error("attribute `{attribute}`: {source}")]
    Expression { attribute: String, source: ExprError },
    #[error("attribute `{attribute}`: expected {expected}, got {found}")]
    TypeMismatch {
        attribute: String,
        expected: &'static str,
        found: &'static str,
    },
    #[error("POI index has no points of interest")]
    DegeneratePoiIndex,
    #[error("could not place a POI pair after {0} redraws")]
    PlacementFailure(u32),
    #[error("no POI index loaded for method_pois")]
    MissingPoiIndex,
    #[error("dynamism target needs at least 2 requests and a planning period")]
    InvalidDynamismTarget,
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

/// Network data a generation run draws on. The drive network must carry
/// arc travel times.
pub struct Scenario<'a> {
    pub drive: &'a RoadNetwork,
    pub walk: Option<&'a RoadNetwork>,
    pub stations: &'a StationSet,
    pub pois: Option<&'a PoiIndex>,
    cache: TravelCache<'a>,
}

impl<'a> Scenario<'a> {
    pub fn new(
        drive: &'a RoadNetwork,
        walk: Option<&'a RoadNetwork>,
        stations: &'a StationSet,
        pois: Option<&'a PoiIndex>,
    ) -> Result<Self, GeneratorError> {
        Ok(Scenario {
            drive,
            walk,
            stations,
            pois,
            cache: TravelCache::new(drive)?,
        })
    }

    pub fn travel_time(&self, u: usize, v: usize) -> Option<f64> {
        self.cache.travel_time(u, v)
    }

    /// Location value for the drive node nearest to `p`.
    pub fn snap(&self, p: Coordinate) -> Location {
        self.location(self.drive.nearest_node(p))
    }

    pub fn location(&self, node: usize) -> Location {
        let c = self.drive.node(node).coord;
        Location { node, lon: c.lon, lat: c.lat }
    }
}

impl EvalContext for Scenario<'_> {
    fn drive_travel_time(&self, from: &Location, to: &Location) -> Option<f64> {
        self.travel_time(from.node, to.node)
    }

    fn stations_within_walk(&self, at: &Location, max_walk: f64, walk_speed: f64) -> Vec<String> {
        stations_within_walk(self.stations, self.walk, Coordinate::new(at.lon, at.lat), max_walk, walk_speed)
    }
}

/// One request: attribute name to value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RequestRecord {
    pub values: BTreeMap<String, Value>,
}

impl RequestRecord {
    pub fn get(&self, name: &str) -> Option<&Value> {
        self.values.get(name)
    }
}

impl Bindings for RequestRecord {
    fn lookup(&self, name: &str) -> Option<&Value> {
        self.values.get(name)
    }
}
