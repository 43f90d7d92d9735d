use std::path::Path;

use serde::{Deserialize, Serialize};

use super::geo::local_offset;
use super::{Bounds, Coordinate, NetworkError};
use crate::sampling::{weighted_index, RngStream, SamplingError};

/// Regular grid over the network bounds counting POIs per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct PoiIndex {
    pub bounds: Bounds,
    pub cell_size: f64,
    pub rows: usize,
    pub cols: usize,
    counts: Vec<u64>,
    /// POIs outside the bounds that were ignored.
    pub dropped: usize,
}

#[derive(Deserialize, Serialize)]
struct PoiRow {
    lon: f64,
    lat: f64,
}

pub fn load_pois_csv(path: &Path) -> Result<Vec<Coordinate>, NetworkError> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| NetworkError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    rdr.deserialize::<PoiRow>()
        .map(|r| {
            r.map(|p| Coordinate::new(p.lon, p.lat))
                .map_err(|e| NetworkError::Parse(format!("{}: {e}", path.display())))
        })
        .collect()
}

pub fn write_pois_csv(path: &Path, pois: &[Coordinate]) -> Result<(), NetworkError> {
    let io = |e: csv::Error| NetworkError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    for p in pois {
        w.serialize(PoiRow { lon: p.lon, lat: p.lat }).map_err(io)?;
    }
    w.flush().map_err(|e| NetworkError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

impl PoiIndex {
    /// Cells are about `cell_size` meters on a side and tile `bounds` exactly.
    pub fn build(pois: &[Coordinate], bounds: Bounds, cell_size: f64) -> Result<PoiIndex, NetworkError> {
        if !(cell_size.is_finite() && cell_size > 0.0) {
            return Err(NetworkError::InvalidValue(format!("cell size {cell_size}")));
        }
        let sw = Coordinate::new(bounds.min_lon, (bounds.min_lat + bounds.max_lat) / 2.0);
        let (width, _) = local_offset(sw, Coordinate::new(bounds.max_lon, sw.lat));
        let (_, height) = local_offset(
            Coordinate::new(bounds.min_lon, bounds.min_lat),
            Coordinate::new(bounds.min_lon, bounds.max_lat),
        );
        let cols = ((width / cell_size).ceil() as usize).max(1);
        let rows = ((height / cell_size).ceil() as usize).max(1);
        let mut index = PoiIndex {
            bounds,
            cell_size,
            rows,
            cols,
            counts: vec![0; rows * cols],
            dropped: 0,
        };
        for &p in pois {
            match index.cell_of(p) {
                Some(i) => index.counts[i] += 1,
                None => index.dropped += 1,
            }
        }
        Ok(index)
    }

    /// Index built from explicit per-cell counts, row-major.
    pub fn from_counts(bounds: Bounds, rows: usize, cols: usize, counts: Vec<u64>) -> Result<PoiIndex, NetworkError> {
        if rows == 0 || cols == 0 || counts.len() != rows * cols {
            return Err(NetworkError::InvalidDimension(format!(
                "{} counts for a {rows}x{cols} grid",
                counts.len()
            )));
        }
        Ok(PoiIndex {
            bounds,
            cell_size: 0.0,
            rows,
            cols,
            counts,
            dropped: 0,
        })
    }

    fn steps(&self) -> (f64, f64) {
        (
            (self.bounds.max_lon - self.bounds.min_lon) / self.cols as f64,
            (self.bounds.max_lat - self.bounds.min_lat) / self.rows as f64,
        )
    }

    pub fn cell_of(&self, p: Coordinate) -> Option<usize> {
        if !self.bounds.contains(p) {
            return None;
        }
        let (dlon, dlat) = self.steps();
        let col = if dlon > 0.0 {
            (((p.lon - self.bounds.min_lon) / dlon) as usize).min(self.cols - 1)
        } else {
            0
        };
        let row = if dlat > 0.0 {
            (((p.lat - self.bounds.min_lat) / dlat) as usize).min(self.rows - 1)
        } else {
            0
        };
        Some(row * self.cols + col)
    }

    pub fn cell_bounds(&self, i: usize) -> Bounds {
        let (dlon, dlat) = self.steps();
        let (r, c) = ((i / self.cols) as f64, (i % self.cols) as f64);
        Bounds {
            min_lon: self.bounds.min_lon + c * dlon,
            min_lat: self.bounds.min_lat + r * dlat,
            max_lon: self.bounds.min_lon + (c + 1.0) * dlon,
            max_lat: self.bounds.min_lat + (r + 1.0) * dlat,
        }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn zone_count(&self) -> usize {
        self.counts.len()
    }

    /// Cell drawn with probability proportional to its POI count.
    pub fn choose_zone(&self, rng: &mut RngStream) -> Result<usize, SamplingError> {
        let w: Vec<f64> = self.counts.iter().map(|&c| c as f64).collect();
        weighted_index(w.len(), Some(&w), rng)
    }

    /// Uniform point inside cell `i`.
    pub fn random_point(&self, i: usize, rng: &mut RngStream) -> Coordinate {
        let b = self.cell_bounds(i);
        let lon = b.min_lon + rng.next_f64() * (b.max_lon - b.min_lon);
        let lat = b.min_lat + rng.next_f64() * (b.max_lat - b.min_lat);
        Coordinate::new(lon.min(b.max_lon), lat.min(b.max_lat))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bounds() -> Bounds {
        Bounds {
            min_lon: 0.0,
            min_lat: 0.0,
            max_lon: 0.01,
            max_lat: 0.01,
        }
    }

    #[test]
    fn counts_sum_to_ingested() {
        let pois: Vec<Coordinate> = (0..100)
            .map(|i| Coordinate::new((i % 10) as f64 * 0.001, (i / 10) as f64 * 0.001))
            .chain([Coordinate::new(1.0, 1.0)])
            .collect();
        let idx = PoiIndex::build(&pois, bounds(), 300.0).unwrap();
        assert_eq!(idx.total(), 100);
        assert_eq!(idx.dropped, 1);
        assert_eq!((idx.rows, idx.cols), (4, 4));
    }

    #[test]
    fn samples_stay_in_cell() {
        let idx = PoiIndex::from_counts(bounds(), 2, 2, vec![0, 0, 5, 0]).unwrap();
        let mut rng = RngStream::new(1);
        for _ in 0..200 {
            let z = idx.choose_zone(&mut rng).unwrap();
            assert_eq!(z, 2);
            let p = idx.random_point(z, &mut rng);
            assert_eq!(idx.cell_of(p), Some(2));
        }
    }
}
