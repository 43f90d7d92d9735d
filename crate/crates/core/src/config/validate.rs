use std::collections::{BTreeSet, HashSet};

use super::{
    AttrType, ConfigError, InstanceConfig, LocsFill, ParamValue, PlaceCenter, PlaceKind, SubsetKind, ValueSource,
    BUS_STATIONS, MAX_PLANNING_PERIOD, MAX_WALKING, MIN_PLANNING_PERIOD, TIME_STAMP,
};
use crate::expr::{ExprError, BUILTINS};
use crate::generator::order::{attribute_dependencies, topological_order};
use crate::network::{Coordinate, RoadNetwork, Zone};
use crate::sampling::PdfFamily;

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedPlace {
    pub name: String,
    pub kind: PlaceKind,
    pub coord: Coordinate,
    /// Nearest drive node to `coord`.
    pub node: usize,
    pub zone: Option<Zone>,
    pub class: Option<String>,
}

/// A configuration checked against a network, with places resolved and
/// the attribute evaluation order fixed.
#[derive(Debug, Clone)]
pub struct ValidatedConfig {
    pub config: InstanceConfig,
    pub places: Vec<ResolvedPlace>,
    pub order: Vec<usize>,
    pub deps: Vec<BTreeSet<usize>>,
    /// `[ts_min, ts_max]` in seconds when it can be determined.
    pub planning_period: Option<(f64, f64)>,
}

impl ValidatedConfig {
    pub fn place(&self, name: &str) -> Option<&ResolvedPlace> {
        self.places.iter().find(|p| p.name == name)
    }
}

fn unresolved(context: &str, name: &str) -> ConfigError {
    ConfigError::UnresolvedReference {
        context: context.to_string(),
        name: name.to_string(),
    }
}

fn invalid(path: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::InvalidValue {
        path: path.to_string(),
        message: message.into(),
    }
}

fn scalar_f64(cfg: &InstanceConfig, name: &str) -> Option<f64> {
    cfg.parameter(name)?.scalar()?.as_f64()
}

/// Planning period from the planning parameters, else from the support of
/// a uniform `time_stamp` pdf.
pub fn planning_period(cfg: &InstanceConfig) -> Option<(f64, f64)> {
    if let (Some(lo), Some(hi)) = (scalar_f64(cfg, MIN_PLANNING_PERIOD), scalar_f64(cfg, MAX_PLANNING_PERIOD)) {
        return Some((lo, hi));
    }
    match &cfg.attribute(TIME_STAMP)?.source {
        ValueSource::Pdf(p) if p.family == PdfFamily::Uniform => Some((p.loc, p.loc + p.scale)),
        _ => None,
    }
}

pub fn validate_config(cfg: &InstanceConfig, net: &RoadNetwork) -> Result<ValidatedConfig, ConfigError> {
    let mut seen = HashSet::new();
    let all_names = cfg
        .places
        .iter()
        .map(|p| &p.name)
        .chain(cfg.parameters.iter().map(|p| &p.name))
        .chain(cfg.attributes.iter().map(|a| &a.name));
    for name in all_names {
        if !seen.insert(name.as_str()) {
            return Err(ConfigError::DuplicateName(name.clone()));
        }
    }

    let bounds = net.bounds();
    let mut places = Vec::with_capacity(cfg.places.len());
    for p in &cfg.places {
        let coord = match p.center {
            PlaceCenter::At(c) => c,
            PlaceCenter::Centroid => net.centroid(),
        };
        if !bounds.contains(coord) {
            return Err(ConfigError::OutOfBounds(p.name.clone()));
        }
        places.push(ResolvedPlace {
            name: p.name.clone(),
            kind: p.kind,
            coord,
            node: net.nearest_node(coord),
            zone: p.shape.map(|shape| Zone { center: coord, shape }),
            class: p.class.clone(),
        });
    }
    let place_kind = |n: &str| cfg.place(n).map(|p| p.kind);

    for prm in &cfg.parameters {
        let ctx = format!("parameter `{}`", prm.name);
        match &prm.value {
            ParamValue::Locations { names, locs, .. } => {
                for n in names {
                    if place_kind(n) != Some(PlaceKind::Location) {
                        return Err(unresolved(&ctx, n));
                    }
                }
                if *locs == Some(LocsFill::Schools)
                    && !cfg
                        .places
                        .iter()
                        .any(|p| p.kind == PlaceKind::Location && p.class.as_deref() == Some("school"))
                {
                    return Err(invalid(&ctx, "locs \"schools\" needs a location place of class \"school\""));
                }
            }
            ParamValue::Zones { names } => {
                for n in names {
                    if place_kind(n) != Some(PlaceKind::Zone) {
                        return Err(unresolved(&ctx, n));
                    }
                }
            }
            _ => {}
        }
    }

    let value_name = |n: &str| {
        cfg.attribute(n).is_some() || cfg.parameter(n).is_some() || place_kind(n) == Some(PlaceKind::Location)
    };
    let uses_stops = cfg.attributes.iter().any(|a| {
        a.expression()
            .into_iter()
            .chain(a.constraints.iter().map(|c| &c.expr))
            .any(|e| e.called_functions().contains("stops"))
    });
    if uses_stops && cfg.attribute(MAX_WALKING).is_none() && cfg.parameter(MAX_WALKING).is_none() {
        return Err(unresolved("stops()", MAX_WALKING));
    }

    for a in &cfg.attributes {
        let ctx = format!("attribute `{}`", a.name);
        let exprs = a
            .expression()
            .map(|e| (format!("{ctx} expression"), e))
            .into_iter()
            .chain(a.constraints.iter().map(|c| (format!("{ctx} constraint `{}`", c.text), &c.expr)));
        for (where_, e) in exprs {
            if let Some(f) = e.called_functions().iter().find(|f| !BUILTINS.contains(&f.as_str())) {
                return Err(ConfigError::Expression {
                    context: where_,
                    source: ExprError::UnknownFunction(f.clone()),
                });
            }
            if let Some(n) = e.dependencies().iter().find(|n| !value_name(n)) {
                return Err(unresolved(&where_, n));
            }
        }
        if let ValueSource::Subset { kind, parameter } = &a.source {
            let prm = cfg.parameter(parameter).ok_or_else(|| unresolved(&ctx, parameter))?;
            let fits = matches!(
                (kind, &prm.value),
                (SubsetKind::Primitives, ParamValue::Primitives(_))
                    | (SubsetKind::Locations, ParamValue::Locations { .. })
                    | (SubsetKind::Zones, ParamValue::Zones { .. })
            );
            if !fits {
                return Err(invalid(&ctx, format!("`{parameter}` is not usable with {}", kind.key())));
            }
            let len = prm.array_len().unwrap_or(0);
            if len == 0 {
                return Err(invalid(&ctx, format!("`{parameter}` is empty")));
            }
            if let Some(w) = &a.weights {
                if w.len() != len {
                    return Err(invalid(
                        &ctx,
                        format!("{} weights for {len} elements of `{parameter}`", w.len()),
                    ));
                }
            }
        }
    }

    let mut paired = HashSet::new();
    for m in &cfg.method_pois {
        for n in &m.locations {
            let a = cfg.attribute(n).ok_or_else(|| unresolved("method_pois", n))?;
            if a.ty != AttrType::Location || a.source != ValueSource::Default {
                return Err(invalid(
                    "method_pois",
                    format!("`{n}` must be a location attribute without its own value source"),
                ));
            }
            if !paired.insert(n.as_str()) {
                return Err(invalid("method_pois", format!("`{n}` appears in more than one pair")));
            }
        }
    }

    if let Some(names) = &cfg.travel_time_matrix {
        for n in names {
            let ok = n == BUS_STATIONS
                || cfg.attribute(n).is_some_and(|a| a.ty == AttrType::Location)
                || cfg
                    .parameter(n)
                    .is_some_and(|p| matches!(p.value, ParamValue::Locations { .. }))
                || place_kind(n) == Some(PlaceKind::Location);
            if !ok {
                return Err(unresolved("travel_time_matrix", n));
            }
        }
    }
    for item in &cfg.instance_filename {
        if cfg.item_value(item).is_none() {
            return Err(unresolved("instance_filename", item));
        }
    }

    let names: Vec<String> = cfg.attributes.iter().map(|a| a.name.clone()).collect();
    let deps = attribute_dependencies(cfg);
    let order = topological_order(&names, &deps)?;

    let period = planning_period(cfg);
    if let Some(ts) = cfg.attribute(TIME_STAMP) {
        if ts.dynamism.is_some() {
            match period {
                Some((lo, hi)) if hi > lo => {}
                _ => {
                    return Err(invalid(
                        "time_stamp",
                        "a dynamism target needs a planning period (min/max_planning_period or a uniform pdf)",
                    ))
                }
            }
        }
    }

    Ok(ValidatedConfig {
        config: cfg.clone(),
        places,
        order,
        deps,
        planning_period: period,
    })
}
