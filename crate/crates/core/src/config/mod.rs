//! Instance configuration: typed model, JSON reader/writer and validation.

pub mod json;
pub mod units;
pub mod validate;

use thiserror::Error;

use crate::expr::{Expr, ExprError, Value};
use crate::network::{Coordinate, ZoneShape};
use crate::sampling::PdfSpec;

pub use json::{parse_config, to_json, to_json_string};
pub use units::{canonicalize_units, unit_factor, Dimension};
pub use validate::{validate_config, ResolvedPlace, ValidatedConfig};

pub const BUS_STATIONS: &str = "bus_stations";
pub const TIME_STAMP: &str = "time_stamp";
pub const MAX_WALKING: &str = crate::expr::eval::MAX_WALKING;
pub const WALK_SPEED: &str = crate::expr::eval::WALK_SPEED;
pub const MIN_PLANNING_PERIOD: &str = "min_planning_period";
pub const MAX_PLANNING_PERIOD: &str = "max_planning_period";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("unknown item `{key}` in {context}")]
    UnknownItem { context: String, key: String },
    #[error("{path}: expected {expected}")]
    TypeMismatch { path: String, expected: String },
    #[error("{path}: missing `{field}`")]
    MissingField { path: String, field: String },
    #[error("{path}: {message}")]
    InvalidValue { path: String, message: String },
    #[error("unknown {dimension} unit `{unit}`")]
    UnknownUnit { dimension: String, unit: String },
    #[error("place `{0}` lies outside the network bounds")]
    OutOfBounds(String),
    #[error("{context}: unresolved reference `{name}`")]
    UnresolvedReference { context: String, name: String },
    #[error("cyclic dependency: {}", .0.join(" -> "))]
    CyclicDependency(Vec<String>),
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("`{0}` is a reserved name")]
    ReservedName(String),
    #[error("{context}: {source}")]
    Expression { context: String, source: ExprError },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlaceKind {
    Location,
    Zone,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlaceCenter {
    At(Coordinate),
    Centroid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlaceSpec {
    pub name: String,
    pub kind: PlaceKind,
    pub center: PlaceCenter,
    pub class: Option<String>,
    /// Zones only; lengths in meters.
    pub shape: Option<ZoneShape>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocsFill {
    Random,
    Schools,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParamValue {
    Str(String),
    Int(i64),
    Real(f64),
    Primitives(Vec<Value>),
    /// Named location places, topped up to `size` by `locs`.
    Locations { names: Vec<String>, size: usize, locs: Option<LocsFill> },
    Zones { names: Vec<String> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSpec {
    pub name: String,
    pub value: ParamValue,
    pub dimension: Option<Dimension>,
}

impl ParameterSpec {
    /// Single primitive value, if the parameter has one.
    pub fn scalar(&self) -> Option<Value> {
        match &self.value {
            ParamValue::Str(s) => Some(Value::Str(s.clone())),
            ParamValue::Int(v) => Some(Value::Int(*v)),
            ParamValue::Real(v) => Some(Value::Real(*v)),
            _ => None,
        }
    }

    /// Number of elements of an array parameter.
    pub fn array_len(&self) -> Option<usize> {
        match &self.value {
            ParamValue::Primitives(v) => Some(v.len()),
            ParamValue::Locations { size, .. } => Some(*size),
            ParamValue::Zones { names } => Some(names.len()),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttrType {
    String,
    Integer,
    Real,
    Location,
    ArrayPrimitives,
}

impl AttrType {
    pub fn name(self) -> &'static str {
        match self {
            AttrType::String => "string",
            AttrType::Integer => "integer",
            AttrType::Real => "real",
            AttrType::Location => "location",
            AttrType::ArrayPrimitives => "array_primitives",
        }
    }

    pub fn is_numeric(self) -> bool {
        matches!(self, AttrType::Integer | AttrType::Real)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubsetKind {
    Primitives,
    Locations,
    Zones,
}

impl SubsetKind {
    pub fn key(self) -> &'static str {
        match self {
            SubsetKind::Primitives => "subset_primitives",
            SubsetKind::Locations => "subset_locations",
            SubsetKind::Zones => "subset_zones",
        }
    }
}

/// Parsed expression together with its source text.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprText {
    pub text: String,
    pub expr: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ValueSource {
    /// Locations default to a uniform network node; `time_stamp` may be
    /// driven by a dynamism target.
    Default,
    Pdf(PdfSpec),
    Expression(ExprText),
    Subset { kind: SubsetKind, parameter: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttributeSpec {
    pub name: String,
    pub ty: AttrType,
    pub dimension: Option<Dimension>,
    pub source: ValueSource,
    pub constraints: Vec<ExprText>,
    pub weights: Option<Vec<f64>>,
    pub output_csv: bool,
    pub dynamism: Option<f64>,
    pub static_probability: Option<f64>,
}

impl AttributeSpec {
    pub fn new(name: &str, ty: AttrType, source: ValueSource) -> Self {
        AttributeSpec {
            name: name.to_string(),
            ty,
            dimension: None,
            source,
            constraints: Vec::new(),
            weights: None,
            output_csv: true,
            dynamism: None,
            static_probability: None,
        }
    }

    pub fn expression(&self) -> Option<&Expr> {
        match &self.source {
            ValueSource::Expression(e) => Some(&e.expr),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MobilityMethodSpec {
    pub locations: [String; 2],
    /// Trip distance in meters.
    pub pdf: PdfSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceConfig {
    pub network: String,
    pub seed: u64,
    pub problem: String,
    pub fixed_lines: bool,
    pub max_speed_factor: f64,
    /// m/s applied to every arc instead of its maxspeed.
    pub equal_speed: Option<f64>,
    pub replicas: u32,
    pub requests: u32,
    pub instance_filename: Vec<String>,
    pub places: Vec<PlaceSpec>,
    pub parameters: Vec<ParameterSpec>,
    pub attributes: Vec<AttributeSpec>,
    pub method_pois: Vec<MobilityMethodSpec>,
    pub travel_time_matrix: Option<Vec<String>>,
}

impl InstanceConfig {
    pub fn new(network: &str, seed: u64, requests: u32) -> Self {
        InstanceConfig {
            network: network.to_string(),
            seed,
            problem: String::new(),
            fixed_lines: false,
            max_speed_factor: 1.0,
            equal_speed: None,
            replicas: 1,
            requests,
            instance_filename: vec!["network".into(), "problem".into(), "requests".into()],
            places: Vec::new(),
            parameters: Vec::new(),
            attributes: Vec::new(),
            method_pois: Vec::new(),
            travel_time_matrix: None,
        }
    }

    pub fn place(&self, name: &str) -> Option<&PlaceSpec> {
        self.places.iter().find(|p| p.name == name)
    }

    pub fn parameter(&self, name: &str) -> Option<&ParameterSpec> {
        self.parameters.iter().find(|p| p.name == name)
    }

    pub fn attribute(&self, name: &str) -> Option<&AttributeSpec> {
        self.attributes.iter().find(|a| a.name == name)
    }

    pub fn attribute_index(&self, name: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a.name == name)
    }

    /// Warnings that do not stop parsing.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.fixed_lines {
            out.push("fixed-line data unsupported".to_string());
        }
        out
    }

    /// Value of a top-level item usable in file names.
    pub fn item_value(&self, item: &str) -> Option<String> {
        Some(match item {
            "network" => self.network.clone(),
            "seed" => self.seed.to_string(),
            "problem" => self.problem.clone(),
            "fixed_lines" => self.fixed_lines.to_string(),
            "max_speed_factor" => self.max_speed_factor.to_string(),
            "replicas" => self.replicas.to_string(),
            "requests" => self.requests.to_string(),
            other => self.parameter(other)?.scalar()?.to_string(),
        })
    }
}
