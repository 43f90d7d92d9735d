mod common;

use std::collections::BTreeMap;

use common::{strings, violations, Grid};
use odgen::config::{parse_config, validate_config, ValidatedConfig, ValueSource};
use odgen::expr::{evaluate, ExprError, Layered};
use odgen::generator::output::{matrix_csv, requests_csv};
use odgen::generator::request::generate_request;
use odgen::generator::{apply_poi_method, generate_instance, generate_replicas, write_instance, GeneratorError, Scenario};
use odgen::metrics::dynamism;
use odgen::network::{haversine, PoiIndex};
use odgen::sampling::RngStream;

const BASE: &str = r#"{
  "network": "Grid Town", "problem": "DARP", "seed": 7, "replicas": 3, "requests": 60,
  "max_speed_factor": 0.8,
  "parameters": [
    {"name": "min_planning_period", "type": "integer", "value": 0},
    {"name": "max_planning_period", "type": "integer", "value": 3600},
    {"name": "depots", "type": "array_locations", "size": 2, "locs": "random"}
  ],
  "attributes": [
    {"name": "origin", "type": "location"},
    {"name": "destination", "type": "location"},
    {"name": "direct_travel_time", "type": "integer", "expression": "dtt(origin, destination)", "output_csv": false,
     "constraints": ["direct_travel_time >= 60"]},
    {"name": "time_stamp", "type": "integer", "pdf": {"type": "uniform", "loc": 0, "scale": 3600}},
    {"name": "lead_time", "type": "integer", "pdf": {"type": "uniform", "loc": 60, "scale": 600}, "output_csv": false},
    {"name": "earliest_departure", "type": "integer", "expression": "time_stamp + lead_time"},
    {"name": "latest_arrival", "type": "integer", "expression": "earliest_departure + direct_travel_time * 2",
     "constraints": ["latest_arrival <= 7200"]}
  ],
  "travel_time_matrix": ["depots", "origin", "destination"]
}"#;

fn validated(text: &str, grid: &Grid) -> ValidatedConfig {
    validate_config(&parse_config(text).unwrap(), &grid.drive).unwrap()
}

fn grid() -> Grid {
    Grid::new(20, 100.0, 4, 0.8)
}

#[test]
fn same_seed_same_bytes() {
    let g = grid();
    let s = g.scenario();
    let v = validated(BASE, &g);
    let a = generate_instance(&v, &s, 1).unwrap();
    let b = generate_instance(&v, &s, 1).unwrap();
    assert_eq!(a, b);
    assert_eq!(requests_csv(&a, &g.drive).unwrap(), requests_csv(&b, &g.drive).unwrap());
    let other = generate_instance(&v, &s, 2).unwrap();
    assert_ne!(a.requests, other.requests);
}

#[test]
fn replicas_are_ordered_and_named() {
    let g = grid();
    let s = g.scenario();
    let v = validated(BASE, &g);
    let all = generate_replicas(&v, &s).unwrap();
    let names: Vec<&str> = all.iter().map(|i| i.name.as_str()).collect();
    assert_eq!(names, ["GridTown_DARP_60_1", "GridTown_DARP_60_2", "GridTown_DARP_60_3"]);
    for inst in &all {
        assert_eq!(inst, &generate_instance(&v, &s, inst.replica).unwrap());
        assert_eq!(inst.requests.len(), 60);
    }
}

#[test]
fn every_record_satisfies_constraints() {
    let g = grid();
    let s = g.scenario();
    let v = validated(BASE, &g);
    for inst in generate_replicas(&v, &s).unwrap() {
        assert!(violations(&v, &inst, &s).is_empty());
        for r in &inst.requests {
            let o = r.get("origin").unwrap().as_location().unwrap();
            let d = r.get("destination").unwrap().as_location().unwrap();
            let direct = r.get("direct_travel_time").unwrap().as_f64().unwrap();
            assert_eq!(direct, s.travel_time(o.node, d.node).unwrap().round());
        }
    }
}

#[test]
fn hidden_columns_are_not_written() {
    let g = grid();
    let s = g.scenario();
    let inst = generate_instance(&validated(BASE, &g), &s, 1).unwrap();
    let text = String::from_utf8(requests_csv(&inst, &g.drive).unwrap()).unwrap();
    let header = text.lines().next().unwrap();
    assert_eq!(header, "origin,destination,time_stamp,earliest_departure,latest_arrival");
    assert_eq!(text.lines().count(), 61);
}

#[test]
fn empty_instance_has_header_only() {
    let g = grid();
    let s = g.scenario();
    let mut v = validated(BASE, &g);
    v.config.requests = 0;
    let inst = generate_instance(&v, &s, 1).unwrap();
    let text = String::from_utf8(requests_csv(&inst, &g.drive).unwrap()).unwrap();
    assert_eq!(text, "origin,destination,time_stamp,earliest_departure,latest_arrival\n");
}

#[test]
fn matrix_covers_collected_locations() {
    let g = grid();
    let s = g.scenario();
    let inst = generate_instance(&validated(BASE, &g), &s, 1).unwrap();
    let m = inst.matrix.as_ref().unwrap();
    assert_eq!(m.labels.len(), m.times.len());
    assert!(m.times.iter().all(|row| row.len() == m.labels.len()));
    for (i, row) in m.times.iter().enumerate() {
        assert_eq!(row[i], Some(0.0));
        for (j, t) in row.iter().enumerate() {
            assert_eq!(*t, s.travel_time(m.nodes[i], m.nodes[j]));
        }
    }
    let csv = String::from_utf8(matrix_csv(m).unwrap()).unwrap();
    assert_eq!(csv.lines().count(), m.labels.len() + 1);
}

#[test]
fn written_files_match_meta_hashes() {
    use sha2::{Digest, Sha256};
    let g = grid();
    let s = g.scenario();
    let inst = generate_instance(&validated(BASE, &g), &s, 2).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let files = write_instance(&inst, &g.drive, dir.path()).unwrap();
    let meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&files.meta).unwrap()).unwrap();
    let hex = |p: &std::path::Path| -> String {
        Sha256::digest(std::fs::read(p).unwrap()).iter().map(|b| format!("{b:02x}")).collect()
    };
    assert_eq!(meta["sha256"]["requests"], hex(&files.requests));
    assert_eq!(meta["sha256"]["matrix"], hex(files.matrix.as_ref().unwrap()));
    assert_eq!(meta["sha256"]["graph"], hex(files.graph.as_ref().unwrap()));
    assert_eq!(meta["planning_period"], serde_json::json!([0.0, 3600.0]));
    assert!(files.requests.ends_with("GridTown_DARP_60_2.csv"));
}

#[test]
fn attributes_evaluate_in_emitted_order() {
    let g = grid();
    let s = g.scenario();
    let v = validated(BASE, &g);
    let inst = generate_instance(&v, &s, 1).unwrap();
    for rec in &inst.requests {
        let mut partial = BTreeMap::new();
        for &i in &v.order {
            let a = &v.config.attributes[i];
            if let ValueSource::Expression(e) = &a.source {
                let env = Layered { first: &partial, second: &inst.parameters };
                let r = evaluate(&e.expr, &env, &s);
                assert!(!matches!(r, Err(ExprError::UnboundIdentifier(_))), "{}", a.name);
            }
            partial.insert(a.name.clone(), rec.get(&a.name).unwrap().clone());
        }
    }
}

#[test]
fn infeasible_constraints_halt() {
    let g = grid();
    let s = g.scenario();
    let text = BASE.replace("direct_travel_time >= 60", "direct_travel_time >= 1000000");
    let v = validated(&text, &g);
    let mut rng = RngStream::new(1);
    let err = generate_request(&v, &BTreeMap::new(), &s, &BTreeMap::new(), 20, &mut rng).unwrap_err();
    assert!(matches!(err, GeneratorError::InfeasibleConfig { .. }));
}

#[test]
fn dynamism_target_on_grid() {
    let g = grid();
    let s = g.scenario();
    for target in [0.0, 0.3, 0.6, 0.9, 1.0] {
        let text = BASE
            .replace(r#""requests": 60"#, r#""requests": 200"#)
            .replace(
                r#""pdf": {"type": "uniform", "loc": 0, "scale": 3600}}"#,
                &format!(r#""pdf": {{"type": "uniform", "loc": 0, "scale": 3600}}, "dynamism": {target}}}"#),
            );
        let v = validated(&text, &g);
        let inst = generate_instance(&v, &s, 1).unwrap();
        let mut ts: Vec<f64> = inst.requests.iter().map(|r| r.get("time_stamp").unwrap().as_f64().unwrap()).collect();
        ts.sort_by(f64::total_cmp);
        let rho = dynamism(&ts, (0.0, 3600.0)).unwrap().rho;
        assert!((rho - target).abs() <= 0.03, "target {target} got {rho}");
    }
}

#[test]
fn static_share_follows_probability() {
    let g = grid();
    let s = g.scenario();
    let text = BASE.replace(r#""requests": 60"#, r#""requests": 400"#).replace(
        r#""pdf": {"type": "uniform", "loc": 0, "scale": 3600}}"#,
        r#""pdf": {"type": "uniform", "loc": 1, "scale": 3599}, "static_probability": 0.25}"#,
    );
    let v = validated(&text, &g);
    let inst = generate_instance(&v, &s, 1).unwrap();
    let zeros = inst.requests.iter().filter(|r| r.get("time_stamp").unwrap().as_f64() == Some(0.0)).count();
    assert_eq!(zeros, inst.static_requests);
    // mean 100, sd about 8.7
    assert!((70..=130).contains(&zeros), "{zeros}");
}

#[test]
fn poi_zone_counts_pass_chi_square() {
    let g = grid();
    let poi = PoiIndex::from_counts(g.drive.bounds(), 2, 2, vec![4, 3, 2, 1]).unwrap();
    let method = odgen::config::MobilityMethodSpec {
        locations: ["origin".into(), "destination".into()],
        pdf: odgen::sampling::PdfSpec::uniform(150.0, 200.0),
    };
    let mut rng = RngStream::new(77);
    let mut counts = [0usize; 4];
    let draws = 10_000;
    for _ in 0..draws {
        counts[apply_poi_method(&method, &poi, &g.drive, &mut rng).unwrap().zone] += 1;
    }
    let chi: f64 = counts
        .iter()
        .zip([0.4, 0.3, 0.2, 0.1])
        .map(|(&c, p)| {
            let e = p * draws as f64;
            (c as f64 - e).powi(2) / e
        })
        .sum();
    // 3 degrees of freedom, 1% level
    assert!(chi < 11.345, "chi-square {chi}, counts {counts:?}");
}

#[test]
fn poi_method_places_request_pairs() {
    let g = grid();
    let poi = PoiIndex::from_counts(g.drive.bounds(), 1, 2, vec![1, 0]).unwrap();
    let s = Scenario::new(&g.drive, Some(&g.walk), &g.stations, Some(&poi)).unwrap();
    let text = BASE.replace(
        r#""travel_time_matrix""#,
        r#""method_pois": {"locations": ["origin", "destination"], "pdf": {"type": "uniform", "loc": 1000, "scale": 0}},
  "travel_time_matrix""#,
    );
    let v = validated(&text, &g);
    let inst = generate_instance(&v, &s, 1).unwrap();
    let mut in_zone = 0;
    for r in &inst.requests {
        let o = r.get("origin").unwrap().as_location().unwrap();
        let d = r.get("destination").unwrap().as_location().unwrap();
        let (po, pd) = (g.drive.node(o.node).coord, g.drive.node(d.node).coord);
        assert!((haversine(po, pd) - 1000.0).abs() <= 150.0);
        let left = |n: usize| n % 20 <= 10;
        if left(o.node) || left(d.node) {
            in_zone += 1;
        }
    }
    assert_eq!(in_zone, inst.requests.len());
    assert!(violations(&v, &inst, &s).is_empty());
}

#[test]
fn odbrp_station_sets_are_disjoint() {
    let g = Grid::new(25, 100.0, 3, 0.5);
    let s = g.scenario();
    let text = std::fs::read_to_string(common::config_file("odbrp.json"))
        .unwrap()
        .replace(r#""requests": 500"#, r#""requests": 80"#)
        .replace(r#""radius": 2000"#, r#""radius": 600"#);
    let v = validated(&text, &g);
    let inst = generate_instance(&v, &s, 1).unwrap();
    assert!(violations(&v, &inst, &s).is_empty());
    for r in &inst.requests {
        let (so, sd) = (strings(r.get("stops_orgn")), strings(r.get("stops_dest")));
        assert!(!so.is_empty() && !sd.is_empty());
        assert!(so.iter().all(|x| !sd.contains(x)));
    }
    let m = inst.matrix.unwrap();
    assert_eq!(m.labels.len(), g.stations.stations.len());
}
