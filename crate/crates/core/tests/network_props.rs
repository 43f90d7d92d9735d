mod common;

use common::{enumerate_paths, tiny_network, Grid};
use odgen::network::paths::travel_time_tree;
use odgen::network::{
    destination_point, haversine, stations_within_walk, synth_grid_network, travel_time_matrix, Coordinate, NetworkKind,
    Zone, ZoneShape,
};
use odgen::sampling::RngStream;
use proptest::prelude::*;

fn arcs(max_nodes: usize) -> impl Strategy<Value = (usize, Vec<(usize, usize, f64)>)> {
    (1..=max_nodes).prop_flat_map(|n| {
        let arc = (0..n, 0..n, 1u32..30).prop_map(|(a, b, w)| (a, b, if a == b { 0.0 } else { w as f64 }));
        (Just(n), prop::collection::vec(arc, 0..=n * n))
    })
}

fn coordinate() -> impl Strategy<Value = Coordinate> {
    (-179.0f64..179.0, -80.0f64..80.0).prop_map(|(lon, lat)| Coordinate::new(lon, lat))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn dijkstra_equals_path_enumeration((n, arcs) in arcs(8)) {
        let net = tiny_network(n, &arcs);
        for s in 0..n {
            prop_assert_eq!(travel_time_tree(&net, s).unwrap(), enumerate_paths(n, &arcs, s));
        }
    }

    #[test]
    fn matrix_diagonal_zero_and_triangle((n, arcs) in arcs(7)) {
        let net = tiny_network(n, &arcs);
        let nodes: Vec<usize> = (0..n).collect();
        let m = travel_time_matrix(&net, &nodes).unwrap();
        let t = |i: usize, j: usize| m[i][j].unwrap_or(f64::INFINITY);
        for i in 0..n {
            prop_assert_eq!(m[i][i], Some(0.0));
            for j in 0..n {
                prop_assert!(t(i, j) >= 0.0);
                for k in 0..n {
                    prop_assert!(t(i, k) <= t(i, j) + t(j, k));
                }
            }
        }
    }

    #[test]
    fn travel_times_grow_with_speed_factor(a1 in 0.05f64..1.0, a2 in 0.05f64..1.0) {
        let (lo, hi) = if a1 <= a2 { (a1, a2) } else { (a2, a1) };
        let mut slow = synth_grid_network(4, 5, 80.0, 11.0, NetworkKind::Drive, None).unwrap();
        let mut fast = slow.clone();
        slow.compute_arc_travel_times(lo, None).unwrap();
        fast.compute_arc_travel_times(hi, None).unwrap();
        for (a, b) in slow.arcs().iter().zip(fast.arcs()) {
            prop_assert!(a.tt.unwrap() <= b.tt.unwrap());
        }
        let nodes: Vec<usize> = (0..slow.node_count()).collect();
        let (ms, mf) = (travel_time_matrix(&slow, &nodes).unwrap(), travel_time_matrix(&fast, &nodes).unwrap());
        for (rs, rf) in ms.iter().zip(&mf) {
            for (x, y) in rs.iter().zip(rf) {
                prop_assert!(x.unwrap() <= y.unwrap() + 1e-9);
            }
        }
    }

    #[test]
    fn haversine_symmetric(a in coordinate(), b in coordinate()) {
        prop_assert_eq!(haversine(a, b), haversine(b, a));
        prop_assert_eq!(haversine(a, a), 0.0);
    }

    #[test]
    fn destination_distance_and_return(a in coordinate(), d in 0.0f64..50_000.0, bearing in 0.0f64..std::f64::consts::TAU) {
        let b = destination_point(a, d, bearing);
        prop_assert!((haversine(a, b) - d).abs() <= 1e-3 * d.max(1.0));
        let back_bearing = {
            let (la, lb) = (a.lat.to_radians(), b.lat.to_radians());
            let dl = (a.lon - b.lon).to_radians();
            (dl.sin() * la.cos()).atan2(lb.cos() * la.sin() - lb.sin() * la.cos() * dl.cos())
        };
        let c = destination_point(b, d, back_bearing);
        prop_assert!(haversine(a, c) < 1.0);
    }

    #[test]
    fn zone_samples_are_members(seed in any::<u64>(), radius in 10.0f64..5000.0, w in 10.0f64..5000.0, h in 10.0f64..5000.0) {
        let center = Coordinate::new(-87.6, 41.8);
        let mut rng = RngStream::new(seed);
        for shape in [ZoneShape::Circle { radius }, ZoneShape::Rectangle { length_lon: w, length_lat: h }] {
            let zone = Zone { center, shape };
            prop_assert!(zone.contains(center));
            for _ in 0..50 {
                prop_assert!(zone.contains(zone.random_point(&mut rng)));
            }
        }
    }
}

#[test]
fn one_degree_north() {
    let a = Coordinate::new(0.0, 0.0);
    let b = Coordinate::new(0.0, 1.0);
    assert!((haversine(a, b) - 111_194.9).abs() < 1.0);
    let c = destination_point(a, 111_195.0, 0.0);
    assert!(c.lon.abs() < 1e-9 && (c.lat - 1.0).abs() < 1e-5);
}

#[test]
fn circle_membership_edge() {
    let center = Coordinate::new(10.0, 50.0);
    let zone = Zone {
        center,
        shape: ZoneShape::Circle { radius: 500.0 },
    };
    assert!(zone.contains(destination_point(center, 499.0, 1.0)));
    assert!(!zone.contains(destination_point(center, 501.5, 1.0)));
}

#[test]
fn walking_reach_matches_grid_distance() {
    let side = 12;
    let spacing = 100.0;
    let grid = Grid::new(side, spacing, 3, 1.0);
    let speed = 1.25;
    let max_walk = 600.0;
    for origin in [0, 5 * side + 7, side * side - 1, 40] {
        let at = grid.walk.node(origin).coord;
        let got = stations_within_walk(&grid.stations, Some(&grid.walk), at, max_walk, speed);
        let (r0, c0) = (origin / side, origin % side);
        let expected: Vec<String> = grid
            .stations
            .stations
            .iter()
            .filter(|s| {
                let id: usize = s.id[1..].parse().unwrap();
                let steps = (id / side).abs_diff(r0) + (id % side).abs_diff(c0);
                (steps as f64 * spacing) < speed * max_walk
            })
            .map(|s| s.id.clone())
            .collect();
        assert_eq!(got, expected, "origin {origin}");
        assert!(stations_within_walk(&grid.stations, Some(&grid.walk), at, 0.0, speed).is_empty());
    }
}
