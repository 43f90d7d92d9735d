//! JSON reader and canonical writer for [`InstanceConfig`].

use serde_json::{json, Map, Value as Json};

use super::units::{unit_factor, Dimension};
use super::{
    AttrType, AttributeSpec, ConfigError, ExprText, InstanceConfig, LocsFill, MobilityMethodSpec, ParamValue,
    ParameterSpec, PlaceCenter, PlaceKind, PlaceSpec, SubsetKind, ValueSource, BUS_STATIONS, MAX_WALKING, TIME_STAMP,
    WALK_SPEED,
};
use crate::expr::{parse_expression, round_half_up, Value};
use crate::network::{Coordinate, ZoneShape};
use crate::sampling::{PdfFamily, PdfSpec};

const TOP_KEYS: &[&str] = &[
    "network",
    "seed",
    "problem",
    "fixed_lines",
    "max_speed_factor",
    "equal_speed",
    "replicas",
    "requests",
    "instance_filename",
    "places",
    "parameters",
    "attributes",
    "method_pois",
    "travel_time_matrix",
];
const PLACE_KEYS: &[&str] = &[
    "name",
    "type",
    "lon",
    "lat",
    "centroid",
    "class",
    "length_lon",
    "length_lat",
    "radius",
    "length_unit",
];
const PARAM_KEYS: &[&str] = &["name", "type", "value", "time_unit", "length_unit", "speed_unit", "size", "locs"];
const ATTR_KEYS: &[&str] = &[
    "name",
    "type",
    "time_unit",
    "length_unit",
    "speed_unit",
    "pdf",
    "expression",
    "constraints",
    "subset_primitives",
    "subset_locations",
    "subset_zones",
    "weights",
    "output_csv",
    "dynamism",
    "static_probability",
];
const PDF_KEYS: &[&str] = &["type", "loc", "scale", "aux"];
const METHOD_KEYS: &[&str] = &["locations", "pdf", "length_unit"];

fn mismatch(path: &str, expected: &str) -> ConfigError {
    ConfigError::TypeMismatch {
        path: path.to_string(),
        expected: expected.to_string(),
    }
}

fn invalid(path: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::InvalidValue {
        path: path.to_string(),
        message: message.into(),
    }
}

fn missing(path: &str, field: &str) -> ConfigError {
    ConfigError::MissingField {
        path: path.to_string(),
        field: field.to_string(),
    }
}

fn object<'a>(v: &'a Json, path: &str, allowed: &[&str]) -> Result<&'a Map<String, Json>, ConfigError> {
    let map = v.as_object().ok_or_else(|| mismatch(path, "an object"))?;
    if let Some(k) = map.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(ConfigError::UnknownItem {
            context: path.to_string(),
            key: k.clone(),
        });
    }
    Ok(map)
}

fn number(v: &Json, path: &str) -> Result<f64, ConfigError> {
    v.as_f64().ok_or_else(|| mismatch(path, "a number"))
}

fn integer(v: &Json, path: &str) -> Result<i64, ConfigError> {
    if let Some(i) = v.as_i64() {
        return Ok(i);
    }
    match v.as_f64() {
        Some(f) if f.fract() == 0.0 && f.abs() < 9.0e15 => Ok(f as i64),
        _ => Err(mismatch(path, "an integer")),
    }
}

fn string<'a>(v: &'a Json, path: &str) -> Result<&'a str, ConfigError> {
    v.as_str().ok_or_else(|| mismatch(path, "a string"))
}

fn boolean(v: &Json, path: &str) -> Result<bool, ConfigError> {
    v.as_bool().ok_or_else(|| mismatch(path, "a boolean"))
}

fn array<'a>(v: &'a Json, path: &str) -> Result<&'a Vec<Json>, ConfigError> {
    v.as_array().ok_or_else(|| mismatch(path, "an array"))
}

fn strings(v: &Json, path: &str) -> Result<Vec<String>, ConfigError> {
    array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, s)| string(s, &format!("{path}[{i}]")).map(str::to_string))
        .collect()
}

fn required<'a>(map: &'a Map<String, Json>, key: &str, path: &str) -> Result<&'a Json, ConfigError> {
    map.get(key).ok_or_else(|| missing(path, key))
}

fn name_of(map: &Map<String, Json>, path: &str) -> Result<String, ConfigError> {
    let name = string(required(map, "name", path)?, &format!("{path}.name"))?;
    if name.is_empty() {
        return Err(invalid(path, "empty name"));
    }
    Ok(name.to_string())
}

fn fraction(v: &Json, path: &str) -> Result<f64, ConfigError> {
    let x = number(v, path)?;
    if !(0.0..=1.0).contains(&x) {
        return Err(invalid(path, format!("{x} is outside [0, 1]")));
    }
    Ok(x)
}

/// Unit declared on an object, as (dimension, factor to internal units).
fn unit_of(map: &Map<String, Json>, path: &str) -> Result<Option<(Dimension, f64)>, ConfigError> {
    let mut found = None;
    for d in Dimension::ALL {
        if let Some(v) = map.get(d.key()) {
            if found.is_some() {
                return Err(invalid(path, "more than one unit given"));
            }
            let tag = string(v, &format!("{path}.{}", d.key()))?;
            found = Some((d, unit_factor(d, tag)?));
        }
    }
    Ok(found)
}

/// Scales a number by a unit factor, keeping integers integral.
fn scaled_primitive(v: &Json, factor: f64, path: &str) -> Result<Value, ConfigError> {
    match v {
        Json::Bool(b) => Ok(Value::Bool(*b)),
        Json::String(s) => Ok(Value::Str(s.clone())),
        Json::Number(n) => {
            if let Some(i) = n.as_i64() {
                let x = i as f64 * factor;
                if factor == 1.0 {
                    return Ok(Value::Int(i));
                }
                if x.fract() == 0.0 {
                    return Ok(Value::Int(x as i64));
                }
                return Ok(Value::Real(x));
            }
            Ok(Value::Real(n.as_f64().unwrap() * factor))
        }
        _ => Err(mismatch(path, "a string, number or boolean")),
    }
}

fn parse_pdf(v: &Json, path: &str, factor: f64) -> Result<PdfSpec, ConfigError> {
    let map = object(v, path, PDF_KEYS)?;
    let family: PdfFamily = string(required(map, "type", path)?, &format!("{path}.type"))?
        .parse()
        .map_err(|_| invalid(&format!("{path}.type"), "unknown distribution family"))?;
    let loc = number(required(map, "loc", path)?, &format!("{path}.loc"))?;
    let scale = number(required(map, "scale", path)?, &format!("{path}.scale"))?;
    let aux = match map.get("aux") {
        Some(_) if !family.needs_aux() => {
            return Err(ConfigError::UnknownItem {
                context: format!("{path} ({family})"),
                key: "aux".into(),
            });
        }
        Some(a) => Some(number(a, &format!("{path}.aux"))?),
        None if family.needs_aux() => return Err(missing(path, "aux")),
        None => None,
    };
    PdfSpec::new(family, loc * factor, scale * factor, aux).map_err(|e| invalid(path, e.to_string()))
}

fn parse_expr(text: &str, path: &str) -> Result<ExprText, ConfigError> {
    let expr = parse_expression(text).map_err(|source| ConfigError::Expression {
        context: path.to_string(),
        source,
    })?;
    Ok(ExprText {
        text: text.to_string(),
        expr,
    })
}

fn check_reserved(name: &str, attribute: bool) -> Result<(), ConfigError> {
    if name == BUS_STATIONS || (!attribute && [TIME_STAMP, MAX_WALKING, WALK_SPEED].contains(&name)) {
        return Err(ConfigError::ReservedName(name.to_string()));
    }
    Ok(())
}

fn parse_place(v: &Json, path: &str) -> Result<PlaceSpec, ConfigError> {
    let map = object(v, path, PLACE_KEYS)?;
    let name = name_of(map, path)?;
    check_reserved(&name, false)?;
    let kind = match string(required(map, "type", path)?, &format!("{path}.type"))? {
        "location" => PlaceKind::Location,
        "zone" => PlaceKind::Zone,
        other => return Err(invalid(&format!("{path}.type"), format!("unknown place type `{other}`"))),
    };
    let centroid = match map.get("centroid") {
        Some(c) => boolean(c, &format!("{path}.centroid"))?,
        None => false,
    };
    let coord = match (map.get("lon"), map.get("lat")) {
        (Some(lon), Some(lat)) => Some(Coordinate::new(
            number(lon, &format!("{path}.lon"))?,
            number(lat, &format!("{path}.lat"))?,
        )),
        (Some(_), None) => return Err(missing(path, "lat")),
        (None, Some(_)) => return Err(missing(path, "lon")),
        (None, None) => None,
    };
    let center = match (coord, centroid) {
        (Some(c), false) => {
            if !c.is_valid() {
                return Err(invalid(path, "coordinates out of range"));
            }
            PlaceCenter::At(c)
        }
        (None, true) => PlaceCenter::Centroid,
        (Some(_), true) => return Err(invalid(path, "give either lon/lat or centroid, not both")),
        (None, false) => return Err(missing(path, "lon/lat or centroid")),
    };
    let class = match map.get("class") {
        Some(c) => Some(string(c, &format!("{path}.class"))?.to_string()),
        None => None,
    };
    let shape = match kind {
        PlaceKind::Location => {
            for k in ["length_lon", "length_lat", "radius", "length_unit"] {
                if map.contains_key(k) {
                    return Err(ConfigError::UnknownItem {
                        context: format!("{path} (location)"),
                        key: k.into(),
                    });
                }
            }
            None
        }
        PlaceKind::Zone => {
            let unit = string(required(map, "length_unit", path)?, &format!("{path}.length_unit"))?;
            let f = unit_factor(Dimension::Length, unit)?;
            let length = |k: &str| -> Result<Option<f64>, ConfigError> {
                match map.get(k) {
                    Some(v) => {
                        let x = number(v, &format!("{path}.{k}"))? * f;
                        if !(x > 0.0 && x.is_finite()) {
                            return Err(invalid(&format!("{path}.{k}"), "must be positive"));
                        }
                        Ok(Some(x))
                    }
                    None => Ok(None),
                }
            };
            let (lon, lat, radius) = (length("length_lon")?, length("length_lat")?, length("radius")?);
            Some(match (lon, lat, radius) {
                (Some(a), Some(b), None) => ZoneShape::Rectangle {
                    length_lon: a,
                    length_lat: b,
                },
                (None, None, Some(r)) => ZoneShape::Circle { radius: r },
                (None, None, None) => return Err(missing(path, "length_lon/length_lat or radius")),
                (Some(_), None, None) => return Err(missing(path, "length_lat")),
                (None, Some(_), None) => return Err(missing(path, "length_lon")),
                _ => return Err(invalid(path, "give either a rectangle or a radius, not both")),
            })
        }
    };
    Ok(PlaceSpec {
        name,
        kind,
        center,
        class,
        shape,
    })
}

fn parse_parameter(v: &Json, path: &str) -> Result<ParameterSpec, ConfigError> {
    let map = object(v, path, PARAM_KEYS)?;
    let name = name_of(map, path)?;
    check_reserved(&name, false)?;
    let ty = string(required(map, "type", path)?, &format!("{path}.type"))?;
    let unit = unit_of(map, path)?;
    let factor = unit.map_or(1.0, |u| u.1);
    let vpath = format!("{path}.value");
    let numeric = matches!(ty, "integer" | "real" | "array_primitives");
    if unit.is_some() && !numeric {
        return Err(invalid(path, format!("units are not allowed on `{ty}` parameters")));
    }
    if !matches!(ty, "array_locations" | "array_location" | "array_zones") {
        for k in ["size", "locs"] {
            if map.contains_key(k) {
                return Err(ConfigError::UnknownItem {
                    context: format!("{path} ({ty})"),
                    key: k.into(),
                });
            }
        }
    }
    let size = match map.get("size") {
        Some(s) => {
            let n = integer(s, &format!("{path}.size"))?;
            if n < 0 {
                return Err(invalid(&format!("{path}.size"), "must be non-negative"));
            }
            Some(n as usize)
        }
        None => None,
    };
    let value = match ty {
        "string" => ParamValue::Str(string(required(map, "value", path)?, &vpath)?.to_string()),
        "integer" => {
            let i = integer(required(map, "value", path)?, &vpath)?;
            ParamValue::Int(round_half_up(i as f64 * factor) as i64)
        }
        "real" => ParamValue::Real(number(required(map, "value", path)?, &vpath)? * factor),
        "array_primitives" => {
            let items = array(required(map, "value", path)?, &vpath)?;
            ParamValue::Primitives(
                items
                    .iter()
                    .enumerate()
                    .map(|(i, x)| scaled_primitive(x, factor, &format!("{vpath}[{i}]")))
                    .collect::<Result<_, _>>()?,
            )
        }
        "array_locations" | "array_location" => {
            let names = match map.get("value") {
                Some(v) => strings(v, &vpath)?,
                None => Vec::new(),
            };
            let size = size.unwrap_or(names.len());
            if size < names.len() {
                return Err(invalid(path, format!("size {size} is smaller than the {} listed locations", names.len())));
            }
            let locs = match map.get("locs") {
                Some(l) => Some(match string(l, &format!("{path}.locs"))? {
                    "random" => LocsFill::Random,
                    "schools" => LocsFill::Schools,
                    other => return Err(invalid(&format!("{path}.locs"), format!("unknown fill `{other}`"))),
                }),
                None => None,
            };
            if size > names.len() && locs.is_none() {
                return Err(missing(path, "locs"));
            }
            if size == 0 {
                return Err(invalid(path, "empty location array"));
            }
            ParamValue::Locations { names, size, locs }
        }
        "array_zones" => {
            if map.contains_key("locs") {
                return Err(invalid(path, "zone arrays cannot be filled randomly"));
            }
            let names = strings(required(map, "value", path)?, &vpath)?;
            if let Some(s) = size {
                if s != names.len() {
                    return Err(invalid(path, format!("size {s} does not match {} listed zones", names.len())));
                }
            }
            if names.is_empty() {
                return Err(invalid(path, "empty zone array"));
            }
            ParamValue::Zones { names }
        }
        other => return Err(invalid(&format!("{path}.type"), format!("unknown parameter type `{other}`"))),
    };
    Ok(ParameterSpec {
        name,
        value,
        dimension: unit.map(|u| u.0),
    })
}

fn parse_attribute(v: &Json, path: &str) -> Result<AttributeSpec, ConfigError> {
    let map = object(v, path, ATTR_KEYS)?;
    let name = name_of(map, path)?;
    check_reserved(&name, true)?;
    let ty = match string(required(map, "type", path)?, &format!("{path}.type"))? {
        "string" => AttrType::String,
        "integer" => AttrType::Integer,
        "real" => AttrType::Real,
        "location" => AttrType::Location,
        "array_primitives" => AttrType::ArrayPrimitives,
        other => return Err(invalid(&format!("{path}.type"), format!("unknown attribute type `{other}`"))),
    };
    let unit = unit_of(map, path)?;
    if unit.is_some() && !ty.is_numeric() {
        return Err(invalid(path, format!("units are not allowed on `{}` attributes", ty.name())));
    }
    let factor = unit.map_or(1.0, |u| u.1);

    let subsets: Vec<SubsetKind> = [SubsetKind::Primitives, SubsetKind::Locations, SubsetKind::Zones]
        .into_iter()
        .filter(|k| map.contains_key(k.key()))
        .collect();
    let n_sources = subsets.len() + map.contains_key("pdf") as usize + map.contains_key("expression") as usize;
    if n_sources > 1 {
        return Err(invalid(path, "at most one of pdf, expression and subset_* may be given"));
    }
    let source = if let Some(p) = map.get("pdf") {
        if !ty.is_numeric() {
            return Err(invalid(path, format!("a pdf cannot produce `{}` values", ty.name())));
        }
        ValueSource::Pdf(parse_pdf(p, &format!("{path}.pdf"), factor)?)
    } else if let Some(e) = map.get("expression") {
        let epath = format!("{path}.expression");
        let text = match e {
            Json::String(s) => s.as_str(),
            Json::Array(items) if items.len() == 1 => string(&items[0], &epath)?,
            Json::Array(_) => return Err(invalid(&epath, "expected exactly one expression")),
            _ => return Err(mismatch(&epath, "a string")),
        };
        ValueSource::Expression(parse_expr(text, &epath)?)
    } else if let Some(&kind) = subsets.first() {
        let expected = match kind {
            SubsetKind::Primitives => !matches!(ty, AttrType::Location),
            _ => ty == AttrType::Location,
        };
        if !expected {
            return Err(invalid(path, format!("{} does not fit a `{}` attribute", kind.key(), ty.name())));
        }
        let parameter = string(&map[kind.key()], &format!("{path}.{}", kind.key()))?.to_string();
        ValueSource::Subset { kind, parameter }
    } else {
        ValueSource::Default
    };

    let constraints = match map.get("constraints") {
        Some(c) => strings(c, &format!("{path}.constraints"))?
            .iter()
            .enumerate()
            .map(|(i, t)| parse_expr(t, &format!("{path}.constraints[{i}]")))
            .collect::<Result<_, _>>()?,
        None => Vec::new(),
    };
    let weights = match map.get("weights") {
        Some(w) => {
            if subsets.is_empty() {
                return Err(invalid(path, "weights need a subset_* source"));
            }
            let wpath = format!("{path}.weights");
            let ws = array(w, &wpath)?
                .iter()
                .enumerate()
                .map(|(i, x)| number(x, &format!("{wpath}[{i}]")))
                .collect::<Result<Vec<_>, _>>()?;
            if ws.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(invalid(&wpath, "weights must be non-negative"));
            }
            if !ws.iter().any(|&x| x > 0.0) {
                return Err(invalid(&wpath, "weights are all zero"));
            }
            Some(ws)
        }
        None => None,
    };
    let output_csv = match map.get("output_csv") {
        Some(b) => boolean(b, &format!("{path}.output_csv"))?,
        None => true,
    };
    let dynamism = map
        .get("dynamism")
        .map(|d| fraction(d, &format!("{path}.dynamism")))
        .transpose()?;
    let static_probability = map
        .get("static_probability")
        .map(|d| fraction(d, &format!("{path}.static_probability")))
        .transpose()?;
    if name != TIME_STAMP {
        for (k, present) in [("dynamism", dynamism.is_some()), ("static_probability", static_probability.is_some())] {
            if present {
                return Err(invalid(path, format!("`{k}` is only valid on `{TIME_STAMP}`")));
            }
        }
    }
    if [TIME_STAMP, MAX_WALKING, WALK_SPEED].contains(&name.as_str()) && !ty.is_numeric() {
        return Err(invalid(path, format!("`{name}` must be numeric")));
    }
    if dynamism.is_some() && matches!(source, ValueSource::Expression(_)) {
        return Err(invalid(path, "an expression and a dynamism target are exclusive"));
    }
    if source == ValueSource::Default && ty != AttrType::Location && dynamism.is_none() {
        return Err(missing(path, "pdf, expression or subset_*"));
    }
    Ok(AttributeSpec {
        name,
        ty,
        dimension: unit.map(|u| u.0),
        source,
        constraints,
        weights,
        output_csv,
        dynamism,
        static_probability,
    })
}

fn parse_method(v: &Json, path: &str) -> Result<MobilityMethodSpec, ConfigError> {
    let map = object(v, path, METHOD_KEYS)?;
    let locations = strings(required(map, "locations", path)?, &format!("{path}.locations"))?;
    let [a, b]: [String; 2] = locations
        .try_into()
        .map_err(|_| invalid(&format!("{path}.locations"), "expected exactly two location attributes"))?;
    if a == b {
        return Err(invalid(&format!("{path}.locations"), "the two locations must differ"));
    }
    let factor = match map.get("length_unit") {
        Some(u) => unit_factor(Dimension::Length, string(u, &format!("{path}.length_unit"))?)?,
        None => 1.0,
    };
    let pdf = parse_pdf(required(map, "pdf", path)?, &format!("{path}.pdf"), factor)?;
    Ok(MobilityMethodSpec { locations: [a, b], pdf })
}

fn list<T>(
    map: &Map<String, Json>,
    key: &str,
    f: impl Fn(&Json, &str) -> Result<T, ConfigError>,
) -> Result<Vec<T>, ConfigError> {
    match map.get(key) {
        Some(v) => array(v, key)?
            .iter()
            .enumerate()
            .map(|(i, x)| f(x, &format!("{key}[{i}]")))
            .collect(),
        None => Ok(Vec::new()),
    }
}

pub fn parse_config(text: &str) -> Result<InstanceConfig, ConfigError> {
    let root: Json = serde_json::from_str(text).map_err(|e| ConfigError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let map = object(&root, "configuration", TOP_KEYS)?;

    let network = string(required(map, "network", "configuration")?, "network")?.to_string();
    let seed = match required(map, "seed", "configuration")? {
        s if s.is_u64() => s.as_u64().unwrap(),
        s => {
            let i = integer(s, "seed")?;
            u64::try_from(i).map_err(|_| invalid("seed", "must be non-negative"))?
        }
    };
    let requests = integer(required(map, "requests", "configuration")?, "requests")?;
    if requests < 1 || requests > u32::MAX as i64 {
        return Err(invalid("requests", format!("{requests} is not a positive count")));
    }
    let mut cfg = InstanceConfig::new(&network, seed, requests as u32);
    if let Some(p) = map.get("problem") {
        cfg.problem = string(p, "problem")?.to_string();
    }
    if let Some(f) = map.get("fixed_lines") {
        cfg.fixed_lines = boolean(f, "fixed_lines")?;
    }
    if let Some(a) = map.get("max_speed_factor") {
        let a = number(a, "max_speed_factor")?;
        if !(a > 0.0 && a <= 1.0) {
            return Err(invalid("max_speed_factor", format!("{a} is outside (0, 1]")));
        }
        cfg.max_speed_factor = a;
    }
    if let Some(s) = map.get("equal_speed") {
        let s = number(s, "equal_speed")?;
        if !(s > 0.0 && s.is_finite()) {
            return Err(invalid("equal_speed", "must be positive"));
        }
        cfg.equal_speed = Some(s);
    }
    if let Some(r) = map.get("replicas") {
        let r = integer(r, "replicas")?;
        if r < 1 || r > u32::MAX as i64 {
            return Err(invalid("replicas", format!("{r} is not a positive count")));
        }
        cfg.replicas = r as u32;
    }
    if let Some(f) = map.get("instance_filename") {
        cfg.instance_filename = strings(f, "instance_filename")?;
    }
    cfg.places = list(map, "places", parse_place)?;
    cfg.parameters = list(map, "parameters", parse_parameter)?;
    cfg.attributes = list(map, "attributes", parse_attribute)?;
    cfg.method_pois = match map.get("method_pois") {
        Some(Json::Object(_)) => vec![parse_method(&map["method_pois"], "method_pois")?],
        Some(_) => list(map, "method_pois", parse_method)?,
        None => Vec::new(),
    };
    if let Some(t) = map.get("travel_time_matrix") {
        cfg.travel_time_matrix = Some(strings(t, "travel_time_matrix")?);
    }
    Ok(cfg)
}

fn value_json(v: &Value) -> Json {
    match v {
        Value::Int(i) => json!(i),
        Value::Real(x) => json!(x),
        Value::Bool(b) => json!(b),
        Value::Str(s) => json!(s),
        other => json!(other.to_string()),
    }
}

fn pdf_json(p: &PdfSpec) -> Json {
    let mut m = Map::new();
    m.insert("type".into(), json!(p.family.name()));
    m.insert("loc".into(), json!(p.loc));
    m.insert("scale".into(), json!(p.scale));
    if let Some(a) = p.aux {
        m.insert("aux".into(), json!(a));
    }
    Json::Object(m)
}

/// Canonical JSON form: every quantity in seconds, meters and m/s.
pub fn to_json(cfg: &InstanceConfig) -> Json {
    let mut root = Map::new();
    root.insert("network".into(), json!(cfg.network));
    root.insert("seed".into(), json!(cfg.seed));
    root.insert("problem".into(), json!(cfg.problem));
    root.insert("fixed_lines".into(), json!(cfg.fixed_lines));
    root.insert("max_speed_factor".into(), json!(cfg.max_speed_factor));
    if let Some(s) = cfg.equal_speed {
        root.insert("equal_speed".into(), json!(s));
    }
    root.insert("replicas".into(), json!(cfg.replicas));
    root.insert("requests".into(), json!(cfg.requests));
    root.insert("instance_filename".into(), json!(cfg.instance_filename));

    let places: Vec<Json> = cfg
        .places
        .iter()
        .map(|p| {
            let mut m = Map::new();
            m.insert("name".into(), json!(p.name));
            let kind = match p.kind {
                PlaceKind::Location => "location",
                PlaceKind::Zone => "zone",
            };
            m.insert("type".into(), json!(kind));
            match p.center {
                PlaceCenter::At(c) => {
                    m.insert("lon".into(), json!(c.lon));
                    m.insert("lat".into(), json!(c.lat));
                }
                PlaceCenter::Centroid => {
                    m.insert("centroid".into(), json!(true));
                }
            }
            if let Some(c) = &p.class {
                m.insert("class".into(), json!(c));
            }
            match p.shape {
                Some(ZoneShape::Rectangle { length_lon, length_lat }) => {
                    m.insert("length_lon".into(), json!(length_lon));
                    m.insert("length_lat".into(), json!(length_lat));
                }
                Some(ZoneShape::Circle { radius }) => {
                    m.insert("radius".into(), json!(radius));
                }
                None => {}
            }
            if p.shape.is_some() {
                m.insert("length_unit".into(), json!("m"));
            }
            Json::Object(m)
        })
        .collect();
    root.insert("places".into(), Json::Array(places));

    let params: Vec<Json> = cfg
        .parameters
        .iter()
        .map(|p| {
            let mut m = Map::new();
            m.insert("name".into(), json!(p.name));
            let (ty, value) = match &p.value {
                ParamValue::Str(s) => ("string", json!(s)),
                ParamValue::Int(i) => ("integer", json!(i)),
                ParamValue::Real(x) => ("real", json!(x)),
                ParamValue::Primitives(v) => ("array_primitives", Json::Array(v.iter().map(value_json).collect())),
                ParamValue::Locations { names, .. } => ("array_locations", json!(names)),
                ParamValue::Zones { names } => ("array_zones", json!(names)),
            };
            m.insert("type".into(), json!(ty));
            m.insert("value".into(), value);
            if let Some(d) = p.dimension {
                m.insert(d.key().into(), json!(d.canonical_unit()));
            }
            match &p.value {
                ParamValue::Locations { size, locs, .. } => {
                    m.insert("size".into(), json!(size));
                    if let Some(l) = locs {
                        let tag = match l {
                            LocsFill::Random => "random",
                            LocsFill::Schools => "schools",
                        };
                        m.insert("locs".into(), json!(tag));
                    }
                }
                ParamValue::Zones { names } => {
                    m.insert("size".into(), json!(names.len()));
                }
                _ => {}
            }
            Json::Object(m)
        })
        .collect();
    root.insert("parameters".into(), Json::Array(params));

    let attrs: Vec<Json> = cfg
        .attributes
        .iter()
        .map(|a| {
            let mut m = Map::new();
            m.insert("name".into(), json!(a.name));
            m.insert("type".into(), json!(a.ty.name()));
            if let Some(d) = a.dimension {
                m.insert(d.key().into(), json!(d.canonical_unit()));
            }
            match &a.source {
                ValueSource::Default => {}
                ValueSource::Pdf(p) => {
                    m.insert("pdf".into(), pdf_json(p));
                }
                ValueSource::Expression(e) => {
                    m.insert("expression".into(), json!(e.text));
                }
                ValueSource::Subset { kind, parameter } => {
                    m.insert(kind.key().into(), json!(parameter));
                }
            }
            if !a.constraints.is_empty() {
                let texts: Vec<&str> = a.constraints.iter().map(|c| c.text.as_str()).collect();
                m.insert("constraints".into(), json!(texts));
            }
            if let Some(w) = &a.weights {
                m.insert("weights".into(), json!(w));
            }
            if !a.output_csv {
                m.insert("output_csv".into(), json!(false));
            }
            if let Some(d) = a.dynamism {
                m.insert("dynamism".into(), json!(d));
            }
            if let Some(p) = a.static_probability {
                m.insert("static_probability".into(), json!(p));
            }
            Json::Object(m)
        })
        .collect();
    root.insert("attributes".into(), Json::Array(attrs));

    if !cfg.method_pois.is_empty() {
        let methods: Vec<Json> = cfg
            .method_pois
            .iter()
            .map(|mp| json!({ "locations": mp.locations, "pdf": pdf_json(&mp.pdf) }))
            .collect();
        root.insert("method_pois".into(), Json::Array(methods));
    }
    if let Some(t) = &cfg.travel_time_matrix {
        root.insert("travel_time_matrix".into(), json!(t));
    }
    Json::Object(root)
}

pub fn to_json_string(cfg: &InstanceConfig) -> String {
    serde_json::to_string_pretty(&to_json(cfg)).expect("config serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE_CONFIG: &str = r#"{
        "network": "Chicago, Illinois",
        "seed": 100,
        "problem": "DARP",
        "fixed_lines": true,
        "max_speed_factor": 0.5,
        "replicas": 10,
        "requests": 500,
        "instance_filename": ["network", "problem", "requests"]
    }"#;

    #[test]
    fn general_items() {
        let cfg = parse_config(SAMPLE_CONFIG).unwrap();
        assert_eq!(cfg.network, "Chicago, Illinois");
        assert_eq!((cfg.seed, cfg.replicas, cfg.requests), (100, 10, 500));
        assert_eq!(cfg.max_speed_factor, 0.5);
        assert_eq!(cfg.warnings(), ["fixed-line data unsupported"]);
        assert_eq!(cfg.item_value("requests").unwrap(), "500");
    }

    #[test]
    fn degenerate_config() {
        let cfg = parse_config(r#"{"network": "grid", "seed": 1, "requests": 1, "attributes": []}"#).unwrap();
        assert!(cfg.attributes.is_empty());
        assert_eq!(cfg.requests, 1);
        assert!(!cfg.fixed_lines);
    }

    fn with_attr(attr: &str) -> String {
        format!(r#"{{"network": "g", "seed": 1, "requests": 1, "attributes": [{attr}]}}"#)
    }

    #[test]
    fn gamma_without_aux() {
        let e = parse_config(&with_attr(r#"{"name": "x", "type": "real", "pdf": {"type": "gamma", "loc": 0, "scale": 1}}"#))
            .unwrap_err();
        assert!(matches!(e, ConfigError::MissingField { ref field, .. } if field == "aux"), "{e:?}");
        let e = parse_config(&with_attr(
            r#"{"name": "x", "type": "real", "pdf": {"type": "normal", "loc": 0, "scale": 1, "aux": 2}}"#,
        ))
        .unwrap_err();
        assert!(matches!(e, ConfigError::UnknownItem { .. }), "{e:?}");
    }

    #[test]
    fn error_kinds() {
        assert!(matches!(parse_config("{\"network\": 1,"), Err(ConfigError::Syntax { line: 1, .. })));
        assert!(matches!(
            parse_config(r#"{"network": "g", "seed": 1, "requests": 1, "colour": 3}"#),
            Err(ConfigError::UnknownItem { .. })
        ));
        assert!(matches!(
            parse_config(r#"{"network": "g", "seed": "x", "requests": 1}"#),
            Err(ConfigError::TypeMismatch { .. })
        ));
        assert!(matches!(
            parse_config(r#"{"network": "g", "requests": 1}"#),
            Err(ConfigError::MissingField { .. })
        ));
        assert!(matches!(
            parse_config(r#"{"network": "g", "seed": 1, "requests": 0}"#),
            Err(ConfigError::InvalidValue { .. })
        ));
        assert!(matches!(
            parse_config(&with_attr(r#"{"name": "bus_stations", "type": "integer", "pdf": {"type": "uniform", "loc": 0, "scale": 1}}"#)),
            Err(ConfigError::ReservedName(_))
        ));
        assert!(matches!(
            parse_config(&with_attr(r#"{"name": "a", "type": "integer", "expression": "a +", "constraints": []}"#)),
            Err(ConfigError::Expression { .. })
        ));
        assert!(matches!(
            parse_config(&with_attr(r#"{"name": "a", "type": "integer"}"#)),
            Err(ConfigError::MissingField { .. })
        ));
        assert!(matches!(
            parse_config(&with_attr(r#"{"name": "a", "type": "real", "time_unit": "h", "speed_unit": "kmh", "expression": "1"}"#)),
            Err(ConfigError::InvalidValue { .. })
        ));
    }

    #[test]
    fn units_canonicalized() {
        let text = r#"{"network": "g", "seed": 1, "requests": 1,
            "parameters": [{"name": "min_early_departure", "type": "integer", "value": 5, "time_unit": "h"}],
            "attributes": [{"name": "walk_speed", "type": "real", "speed_unit": "kmh",
                            "pdf": {"type": "uniform", "loc": 4, "scale": 1}}]}"#;
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.parameters[0].value, ParamValue::Int(18000));
        match &cfg.attributes[0].source {
            ValueSource::Pdf(p) => {
                assert!((p.loc - 4.0 / 3.6).abs() < 1e-12);
                assert!((p.scale - 1.0 / 3.6).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn expression_array_form_and_round_trip() {
        let text = r#"{"network": "g", "seed": 7, "requests": 3,
            "places": [{"name": "z", "type": "zone", "centroid": true, "radius": 2, "length_unit": "km"},
                       {"name": "p", "type": "location", "lon": 1.5, "lat": 2.5, "class": "school"}],
            "parameters": [{"name": "zs", "type": "array_zones", "value": ["z"], "size": 1},
                           {"name": "ls", "type": "array_location", "value": ["p"], "size": 3, "locs": "random"}],
            "attributes": [{"name": "lead_time", "type": "integer", "time_unit": "min",
                            "pdf": {"type": "uniform", "loc": 0, "scale": 10}, "output_csv": false},
                           {"name": "dest", "type": "location", "subset_zones": "zs", "weights": [2]},
                           {"name": "time_stamp", "type": "integer", "time_unit": "s",
                            "expression": ["100 - lead_time"], "constraints": ["time_stamp >= 0"],
                            "static_probability": 0.5}],
            "method_pois": [{"locations": ["a", "b"], "pdf": {"type": "normal", "loc": 6500, "scale": 5000}}],
            "travel_time_matrix": ["dest"]}"#;
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.places[0].shape, Some(ZoneShape::Circle { radius: 2000.0 }));
        assert!(matches!(cfg.attributes[2].source, ValueSource::Expression(ref e) if e.text == "100 - lead_time"));
        let again = parse_config(&to_json_string(&cfg)).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn dynamism_rules() {
        let ok = with_attr(
            r#"{"name": "time_stamp", "type": "integer", "pdf": {"type": "uniform", "loc": 0, "scale": 3600}, "dynamism": 0.5}"#,
        );
        assert_eq!(parse_config(&ok).unwrap().attributes[0].dynamism, Some(0.5));
        let pct = with_attr(r#"{"name": "time_stamp", "type": "integer", "dynamism": 50}"#);
        assert!(matches!(parse_config(&pct), Err(ConfigError::InvalidValue { .. })));
        let both = with_attr(r#"{"name": "time_stamp", "type": "integer", "expression": "1", "dynamism": 0.5}"#);
        assert!(matches!(parse_config(&both), Err(ConfigError::InvalidValue { .. })));
        let elsewhere = with_attr(r#"{"name": "x", "type": "integer", "expression": "1", "dynamism": 0.5}"#);
        assert!(matches!(parse_config(&elsewhere), Err(ConfigError::InvalidValue { .. })));
    }
}
