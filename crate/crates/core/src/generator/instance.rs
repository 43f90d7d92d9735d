use std::collections::{BTreeMap, HashSet};

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::request::{generate_request, resolve_parameters, ParameterValues};
use super::timestamps::{apply_static_probability, assign_time_stamps, TimeStampPlan};
use super::{GeneratorError, RequestRecord, Scenario, RECORD_RESTARTS};
use crate::config::{to_json_string, AttrType, InstanceConfig, ValidatedConfig, BUS_STATIONS, TIME_STAMP};
use crate::expr::Value;
use crate::network::{travel_time_matrix, Coordinate};
use crate::sampling::RngStream;

/// Travel times between collected locations; row `i` starts at `labels[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TravelMatrix {
    pub labels: Vec<String>,
    pub coords: Vec<Coordinate>,
    pub nodes: Vec<usize>,
    pub times: Vec<Vec<Option<f64>>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub name: String,
    pub replica: u32,
    pub seed: u64,
    pub config_hash: String,
    /// Attribute names written to the request file, in declaration order.
    pub columns: Vec<String>,
    pub requests: Vec<RequestRecord>,
    pub parameters: ParameterValues,
    pub period: Option<(f64, f64)>,
    pub matrix: Option<TravelMatrix>,
    pub dynamism: Option<TimeStampPlan>,
    pub static_requests: usize,
    pub restarts: u64,
    pub retries: u64,
}

/// Item values with whitespace removed, joined by `_`, then the 1-based
/// replica index.
pub fn instance_name(cfg: &InstanceConfig, replica: u32) -> String {
    let mut parts: Vec<String> = cfg
        .instance_filename
        .iter()
        .filter_map(|item| cfg.item_value(item))
        .map(|v| v.chars().filter(|c| !c.is_whitespace()).collect())
        .collect();
    parts.push(replica.to_string());
    parts.join("_")
}

pub fn config_hash(cfg: &InstanceConfig) -> String {
    let digest = Sha256::digest(to_json_string(cfg).as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn collect_matrix(
    names: &[String],
    requests: &[RequestRecord],
    params: &ParameterValues,
    scenario: &Scenario,
) -> Result<TravelMatrix, GeneratorError> {
    let mut seen = HashSet::new();
    let mut labels = Vec::new();
    let mut nodes = Vec::new();
    let mut push = |label: String, node: usize| {
        if seen.insert(label.clone()) {
            labels.push(label);
            nodes.push(node);
        }
    };
    let push_value = |v: &Value, push: &mut dyn FnMut(String, usize)| match v {
        Value::Location(l) => push(scenario.drive.node(l.node).id.clone(), l.node),
        Value::Array(items) => {
            for l in items.iter().filter_map(Value::as_location) {
                push(scenario.drive.node(l.node).id.clone(), l.node);
            }
        }
        _ => {}
    };
    for name in names {
        if name == BUS_STATIONS {
            for s in &scenario.stations.stations {
                push(s.id.clone(), s.drive_node);
            }
        } else if let Some(v) = params.get(name) {
            push_value(v, &mut push);
        } else {
            for r in requests {
                if let Some(v) = r.get(name) {
                    push_value(v, &mut push);
                }
            }
        }
    }
    let times = travel_time_matrix(scenario.drive, &nodes)?;
    let coords = nodes.iter().map(|&n| scenario.drive.node(n).coord).collect();
    Ok(TravelMatrix { labels, coords, nodes, times })
}

/// Replica `replica` (1-based) of the configured instance, drawn from its
/// own random stream.
pub fn generate_instance(
    vcfg: &ValidatedConfig,
    scenario: &Scenario,
    replica: u32,
) -> Result<Instance, GeneratorError> {
    let cfg = &vcfg.config;
    let mut rng = RngStream::for_stream(cfg.seed, replica as u64);
    let params = resolve_parameters(vcfg, scenario, &mut rng)?;
    let n = cfg.requests as usize;
    let ts_attr = cfg.attribute(TIME_STAMP);

    let plan = match (ts_attr.and_then(|a| a.dynamism), vcfg.planning_period) {
        (Some(target), Some(period)) => {
            let integral = ts_attr.is_some_and(|a| a.ty == AttrType::Integer);
            Some(assign_time_stamps(n, period, target, integral, &mut rng)?)
        }
        (Some(_), None) => return Err(GeneratorError::InvalidDynamismTarget),
        _ => None,
    };

    let mut requests = Vec::with_capacity(n);
    let mut restarts = 0u64;
    let mut retries = 0u64;
    let mut static_requests = 0;
    let mut preset = BTreeMap::new();
    for i in 0..n {
        if let Some(p) = &plan {
            let t = p.stamps[i];
            let v = if ts_attr.is_some_and(|a| a.ty == AttrType::Integer) {
                Value::Int(t as i64)
            } else {
                Value::Real(t)
            };
            preset.insert(TIME_STAMP.to_string(), v);
        }
        let budget = (RECORD_RESTARTS as u64).saturating_sub(restarts).max(1) as u32;
        let mut out = generate_request(vcfg, &params, scenario, &preset, budget, &mut rng).map_err(|e| match e {
            GeneratorError::InfeasibleConfig { attribute, .. } => GeneratorError::InfeasibleConfig {
                attribute,
                restarts: RECORD_RESTARTS,
            },
            other => other,
        })?;
        restarts += out.restarts as u64;
        retries += out.retries as u64;
        if let Some(p) = ts_attr.and_then(|a| a.static_probability) {
            if apply_static_probability(&mut out.record, p, &mut rng) {
                static_requests += 1;
            }
        }
        requests.push(out.record);
    }

    let matrix = match &cfg.travel_time_matrix {
        Some(names) => Some(collect_matrix(names, &requests, &params, scenario)?),
        None => None,
    };
    Ok(Instance {
        name: instance_name(cfg, replica),
        replica,
        seed: cfg.seed,
        config_hash: config_hash(cfg),
        columns: cfg
            .attributes
            .iter()
            .filter(|a| a.output_csv)
            .map(|a| a.name.clone())
            .collect(),
        requests,
        parameters: params,
        period: vcfg.planning_period,
        matrix,
        dynamism: plan,
        static_requests,
        restarts,
        retries,
    })
}

/// All replicas, generated in parallel and returned in replica order.
pub fn generate_replicas(vcfg: &ValidatedConfig, scenario: &Scenario) -> Result<Vec<Instance>, GeneratorError> {
    (1..=vcfg.config.replicas)
        .into_par_iter()
        .map(|k| generate_instance(vcfg, scenario, k))
        .collect()
}
