use std::f64::consts::TAU;

use super::{GeneratorError, POI_BEARING_REDRAWS, POI_REDRAWS};
use crate::config::MobilityMethodSpec;
use crate::network::{destination_point, Coordinate, PoiIndex, RoadNetwork};
use crate::sampling::{sample_pdf, RngStream};

/// A placed pair: `anchor` lies in the POI-weighted `zone`, `other` sits on
/// the network at the drawn distance from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoiDraw {
    pub zone: usize,
    pub anchor: Coordinate,
    pub other: Coordinate,
    pub distance: f64,
    pub anchor_is_first: bool,
}

impl PoiDraw {
    /// Coordinates in the order of the method's location pair.
    pub fn endpoints(&self) -> (Coordinate, Coordinate) {
        if self.anchor_is_first {
            (self.anchor, self.other)
        } else {
            (self.other, self.anchor)
        }
    }
}

pub fn apply_poi_method(
    method: &MobilityMethodSpec,
    poi: &PoiIndex,
    net: &RoadNetwork,
    rng: &mut RngStream,
) -> Result<PoiDraw, GeneratorError> {
    if poi.total() == 0 {
        return Err(GeneratorError::DegeneratePoiIndex);
    }
    let zone = poi.choose_zone(rng)?;
    let anchor = poi.random_point(zone, rng);
    let bounds = net.bounds();
    let mut redraws = 0;
    let mut next_redraw = || {
        redraws += 1;
        if redraws > POI_REDRAWS {
            Err(GeneratorError::PlacementFailure(POI_REDRAWS))
        } else {
            Ok(())
        }
    };
    loop {
        let distance = sample_pdf(&method.pdf, rng)?;
        if distance < 0.0 {
            next_redraw()?;
            continue;
        }
        for _ in 0..POI_BEARING_REDRAWS {
            let bearing = rng.next_f64() * TAU;
            let p = destination_point(anchor, distance, bearing);
            if bounds.contains(p) {
                let other = net.node(net.nearest_node(p)).coord;
                let anchor_is_first = rng.bernoulli(0.5);
                return Ok(PoiDraw {
                    zone,
                    anchor,
                    other,
                    distance,
                    anchor_is_first,
                });
            }
            next_redraw()?;
        }
    }
}
