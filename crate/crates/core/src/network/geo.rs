use serde::{Deserialize, Serialize};

use crate::sampling::RngStream;

pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Slack, in meters, absorbing floating-point drift in zone membership.
const MEMBERSHIP_SLACK_M: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coordinate {
    pub lon: f64,
    pub lat: f64,
}

impl Coordinate {
    pub fn new(lon: f64, lat: f64) -> Self {
        Coordinate { lon, lat }
    }

    pub fn is_valid(&self) -> bool {
        self.lon.is_finite() && self.lat.is_finite() && (-180.0..=180.0).contains(&self.lon) && (-90.0..=90.0).contains(&self.lat)
    }
}

/// Great-circle distance in meters.
pub fn haversine(a: Coordinate, b: Coordinate) -> f64 {
    let (p1, p2) = (a.lat.to_radians(), b.lat.to_radians());
    let dp = p2 - p1;
    let dl = (b.lon - a.lon).to_radians();
    let h = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * h.sqrt().min(1.0).asin()
}

/// Point reached by travelling `distance` meters from `a` along the
/// initial `bearing` (radians, clockwise from north).
pub fn destination_point(a: Coordinate, distance: f64, bearing: f64) -> Coordinate {
    if distance == 0.0 {
        return a;
    }
    let d = distance / EARTH_RADIUS_M;
    let p1 = a.lat.to_radians();
    let l1 = a.lon.to_radians();
    let p2 = (p1.sin() * d.cos() + p1.cos() * d.sin() * bearing.cos()).asin();
    let l2 = l1 + (bearing.sin() * d.sin() * p1.cos()).atan2(d.cos() - p1.sin() * p2.sin());
    let mut lon = l2.to_degrees();
    lon = (lon + 540.0).rem_euclid(360.0) - 180.0;
    Coordinate::new(lon, p2.to_degrees())
}

/// Local east/north offsets in meters of `p` relative to `origin`.
pub fn local_offset(origin: Coordinate, p: Coordinate) -> (f64, f64) {
    let dx = (p.lon - origin.lon).to_radians() * EARTH_RADIUS_M * origin.lat.to_radians().cos();
    let dy = (p.lat - origin.lat).to_radians() * EARTH_RADIUS_M;
    (dx, dy)
}

/// Inverse of [`local_offset`].
pub fn offset_point(origin: Coordinate, dx: f64, dy: f64) -> Coordinate {
    let lon = origin.lon + (dx / (EARTH_RADIUS_M * origin.lat.to_radians().cos())).to_degrees();
    let lat = origin.lat + (dy / EARTH_RADIUS_M).to_degrees();
    Coordinate::new(lon, lat)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub min_lon: f64,
    pub min_lat: f64,
    pub max_lon: f64,
    pub max_lat: f64,
}

impl Bounds {
    pub fn of(points: impl IntoIterator<Item = Coordinate>) -> Option<Bounds> {
        let mut it = points.into_iter();
        let first = it.next()?;
        let mut b = Bounds {
            min_lon: first.lon,
            min_lat: first.lat,
            max_lon: first.lon,
            max_lat: first.lat,
        };
        for p in it {
            b.min_lon = b.min_lon.min(p.lon);
            b.min_lat = b.min_lat.min(p.lat);
            b.max_lon = b.max_lon.max(p.lon);
            b.max_lat = b.max_lat.max(p.lat);
        }
        Some(b)
    }

    pub fn contains(&self, p: Coordinate) -> bool {
        p.lon >= self.min_lon && p.lon <= self.max_lon && p.lat >= self.min_lat && p.lat <= self.max_lat
    }

    pub fn center(&self) -> Coordinate {
        Coordinate::new((self.min_lon + self.max_lon) / 2.0, (self.min_lat + self.max_lat) / 2.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ZoneShape {
    /// Full side lengths in meters along the east and north axes.
    Rectangle { length_lon: f64, length_lat: f64 },
    Circle { radius: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Zone {
    pub center: Coordinate,
    pub shape: ZoneShape,
}

impl Zone {
    pub fn contains(&self, p: Coordinate) -> bool {
        match self.shape {
            ZoneShape::Rectangle { length_lon, length_lat } => {
                let (dx, dy) = local_offset(self.center, p);
                dx.abs() <= length_lon / 2.0 + MEMBERSHIP_SLACK_M && dy.abs() <= length_lat / 2.0 + MEMBERSHIP_SLACK_M
            }
            ZoneShape::Circle { radius } => haversine(self.center, p) <= radius + MEMBERSHIP_SLACK_M,
        }
    }

    /// Uniform point inside the zone.
    pub fn random_point(&self, rng: &mut RngStream) -> Coordinate {
        match self.shape {
            ZoneShape::Rectangle { length_lon, length_lat } => {
                let dx = (rng.next_f64() - 0.5) * length_lon;
                let dy = (rng.next_f64() - 0.5) * length_lat;
                offset_point(self.center, dx, dy)
            }
            ZoneShape::Circle { radius } => {
                let r = radius * rng.next_f64().sqrt();
                let bearing = rng.next_f64() * std::f64::consts::TAU;
                destination_point(self.center, r, bearing)
            }
        }
    }
}

pub fn zone_contains(zone: &Zone, p: Coordinate) -> bool {
    zone.contains(p)
}

pub fn random_point_in_zone(zone: &Zone, rng: &mut RngStream) -> Coordinate {
    zone.random_point(rng)
}
