use std::collections::BTreeMap;

use super::poi_method::apply_poi_method;
use super::{GeneratorError, RequestRecord, Scenario, ATTRIBUTE_RETRIES};
use crate::config::{AttrType, AttributeSpec, LocsFill, ParamValue, PlaceKind, ValidatedConfig, ValueSource};
use crate::expr::{evaluate, round_half_up, ExprError, Layered, Value};
use crate::sampling::{sample_pdf, weighted_index, RngStream};

/// Parameter and place values visible to expressions, fixed per instance.
pub type ParameterValues = BTreeMap<String, Value>;

#[derive(Debug, Clone, PartialEq)]
pub struct RequestOutcome {
    pub record: RequestRecord,
    /// Whole records discarded before this one was accepted.
    pub restarts: u32,
    /// Single-attribute redraws across all attempts.
    pub retries: u32,
}

/// Binds scalar and array parameters plus every location place. Array
/// location parameters are topped up to their size from `rng`.
pub fn resolve_parameters(
    vcfg: &ValidatedConfig,
    scenario: &Scenario,
    rng: &mut RngStream,
) -> Result<ParameterValues, GeneratorError> {
    let mut out = ParameterValues::new();
    for p in vcfg.places.iter().filter(|p| p.kind == PlaceKind::Location) {
        out.insert(p.name.clone(), Value::Location(scenario.location(p.node)));
    }
    let schools: Vec<usize> = vcfg
        .places
        .iter()
        .filter(|p| p.kind == PlaceKind::Location && p.class.as_deref() == Some("school"))
        .map(|p| p.node)
        .collect();
    for prm in &vcfg.config.parameters {
        let value = match &prm.value {
            ParamValue::Locations { names, size, locs } => {
                let mut items: Vec<Value> = names
                    .iter()
                    .filter_map(|n| vcfg.place(n))
                    .map(|p| Value::Location(scenario.location(p.node)))
                    .collect();
                while items.len() < *size {
                    let node = match locs {
                        Some(LocsFill::Schools) => schools[rng.below(schools.len())],
                        _ => rng.below(scenario.drive.node_count()),
                    };
                    items.push(Value::Location(scenario.location(node)));
                }
                Value::Array(items)
            }
            ParamValue::Zones { names } => Value::Array(names.iter().map(|n| Value::Str(n.clone())).collect()),
            ParamValue::Primitives(items) => Value::Array(items.clone()),
            _ => prm.scalar().expect("scalar parameter"),
        };
        out.insert(prm.name.clone(), value);
    }
    Ok(out)
}

enum Draw {
    Value(Value),
    /// A draw that cannot be used, such as an unreachable destination.
    Rejected,
}

fn coerce(attr: &AttributeSpec, v: Value) -> Result<Value, GeneratorError> {
    let mismatch = |found: &Value| GeneratorError::TypeMismatch {
        attribute: attr.name.clone(),
        expected: attr.ty.name(),
        found: found.type_name(),
    };
    Ok(match (attr.ty, v) {
        (AttrType::Integer, Value::Int(i)) => Value::Int(i),
        (AttrType::Integer, Value::Real(x)) => Value::Int(round_half_up(x) as i64),
        (AttrType::Integer, Value::Bool(b)) => Value::Int(b as i64),
        (AttrType::Real, v) if v.is_numeric() => Value::Real(v.as_f64().unwrap()),
        (AttrType::String, Value::Str(s)) => Value::Str(s),
        (AttrType::Location, Value::Location(l)) => Value::Location(l),
        (AttrType::ArrayPrimitives, Value::Array(a) | Value::Set(a)) => Value::Array(a),
        (_, other) => return Err(mismatch(&other)),
    })
}

fn draw(
    vcfg: &ValidatedConfig,
    attr: &AttributeSpec,
    record: &RequestRecord,
    params: &ParameterValues,
    scenario: &Scenario,
    rng: &mut RngStream,
) -> Result<Draw, GeneratorError> {
    let raw = match &attr.source {
        ValueSource::Default => match attr.ty {
            AttrType::Location => Value::Location(scenario.location(rng.below(scenario.drive.node_count()))),
            _ => return Err(GeneratorError::InvalidDynamismTarget),
        },
        ValueSource::Pdf(pdf) => Value::Real(sample_pdf(pdf, rng)?),
        ValueSource::Expression(e) => {
            let env = Layered { first: record, second: params };
            match evaluate(&e.expr, &env, scenario) {
                Ok(v) => v,
                Err(ExprError::Unreachable { .. }) => return Ok(Draw::Rejected),
                Err(source) => {
                    return Err(GeneratorError::Expression {
                        attribute: attr.name.clone(),
                        source,
                    })
                }
            }
        }
        ValueSource::Subset { parameter, .. } => {
            let Some(Value::Array(items)) = params.get(parameter) else {
                return Err(GeneratorError::Expression {
                    attribute: attr.name.clone(),
                    source: ExprError::UnboundIdentifier(parameter.clone()),
                });
            };
            let i = weighted_index(items.len(), attr.weights.as_deref(), rng)?;
            match &items[i] {
                Value::Str(zone) if attr.ty == AttrType::Location => {
                    let z = vcfg.place(zone).and_then(|p| p.zone).expect("validated zone");
                    Value::Location(scenario.snap(z.random_point(rng)))
                }
                v => v.clone(),
            }
        }
    };
    coerce(attr, raw).map(Draw::Value)
}

fn constraints_hold(
    attr: &AttributeSpec,
    record: &RequestRecord,
    params: &ParameterValues,
    scenario: &Scenario,
) -> Result<bool, GeneratorError> {
    let env = Layered { first: record, second: params };
    for c in &attr.constraints {
        match evaluate(&c.expr, &env, scenario) {
            Ok(v) if v.truthy() => {}
            Ok(_) | Err(ExprError::Unreachable { .. }) => return Ok(false),
            Err(source) => {
                return Err(GeneratorError::Expression {
                    attribute: attr.name.clone(),
                    source,
                })
            }
        }
    }
    Ok(true)
}

/// Texts of the constraints `record` violates, re-evaluated from scratch.
pub fn record_violations(
    vcfg: &ValidatedConfig,
    record: &RequestRecord,
    params: &ParameterValues,
    scenario: &Scenario,
) -> Vec<String> {
    let env = Layered { first: record, second: params };
    let mut out = Vec::new();
    for a in &vcfg.config.attributes {
        for c in &a.constraints {
            if !matches!(evaluate(&c.expr, &env, scenario), Ok(v) if v.truthy()) {
                out.push(format!("{}: {}", a.name, c.text));
            }
        }
    }
    out
}

/// Builds one request attribute by attribute in dependency order. A value
/// violating its constraints is redrawn up to [`ATTRIBUTE_RETRIES`] times
/// (once for deterministic expressions); then the record is discarded.
/// Values in `preset` are taken as given.
pub fn generate_request(
    vcfg: &ValidatedConfig,
    params: &ParameterValues,
    scenario: &Scenario,
    preset: &BTreeMap<String, Value>,
    max_restarts: u32,
    rng: &mut RngStream,
) -> Result<RequestOutcome, GeneratorError> {
    let attrs = &vcfg.config.attributes;
    let mut restarts = 0;
    let mut retries = 0;
    'record: loop {
        let mut record = RequestRecord::default();
        // values drawn jointly by a mobility method, waiting for their turn
        let mut pending: BTreeMap<String, Value> = BTreeMap::new();
        let mut failed = None;
        for &i in &vcfg.order {
            let attr = &attrs[i];
            let method = vcfg.config.method_pois.iter().find(|m| m.locations.contains(&attr.name));
            let fixed = preset.get(&attr.name).or(pending.get(&attr.name)).cloned();
            let tries = if fixed.is_some() || matches!(attr.source, ValueSource::Expression(_)) {
                1
            } else {
                ATTRIBUTE_RETRIES
            };
            let mut accepted = false;
            for t in 0..tries {
                if t > 0 {
                    retries += 1;
                }
                let value = match (&fixed, method) {
                    (Some(v), _) => v.clone(),
                    (None, Some(m)) => {
                        let index = scenario.pois.ok_or(GeneratorError::MissingPoiIndex)?;
                        let (o, d) = apply_poi_method(m, index, scenario.drive, rng)?.endpoints();
                        let (mine, other) = if m.locations[0] == attr.name { (o, d) } else { (d, o) };
                        let partner = m.locations.iter().find(|n| **n != attr.name).unwrap();
                        pending.insert(partner.clone(), Value::Location(scenario.snap(other)));
                        Value::Location(scenario.snap(mine))
                    }
                    (None, None) => match draw(vcfg, attr, &record, params, scenario, rng)? {
                        Draw::Value(v) => v,
                        Draw::Rejected => continue,
                    },
                };
                record.values.insert(attr.name.clone(), value);
                if constraints_hold(attr, &record, params, scenario)? {
                    accepted = true;
                    break;
                }
            }
            if !accepted {
                failed = Some(attr.name.clone());
                break;
            }
        }
        match failed {
            None => return Ok(RequestOutcome { record, restarts, retries }),
            Some(attribute) => {
                restarts += 1;
                if restarts >= max_restarts {
                    return Err(GeneratorError::InfeasibleConfig { attribute, restarts });
                }
                continue 'record;
            }
        }
    }
}
