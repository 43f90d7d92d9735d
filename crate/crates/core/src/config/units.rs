use std::fmt;

use super::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dimension {
    Time,
    Length,
    Speed,
}

impl Dimension {
    /// Config key carrying the unit tag for this dimension.
    pub fn key(self) -> &'static str {
        match self {
            Dimension::Time => "time_unit",
            Dimension::Length => "length_unit",
            Dimension::Speed => "speed_unit",
        }
    }

    /// Tag of the internal unit.
    pub fn canonical_unit(self) -> &'static str {
        match self {
            Dimension::Time => "s",
            Dimension::Length => "m",
            Dimension::Speed => "mps",
        }
    }

    pub const ALL: [Dimension; 3] = [Dimension::Time, Dimension::Length, Dimension::Speed];
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dimension::Time => "time",
            Dimension::Length => "length",
            Dimension::Speed => "speed",
        })
    }
}

/// Multiplier taking `unit` to seconds, meters or meters per second.
pub fn unit_factor(dimension: Dimension, unit: &str) -> Result<f64, ConfigError> {
    let f = match (dimension, unit) {
        (Dimension::Time, "s") => 1.0,
        (Dimension::Time, "min") => 60.0,
        (Dimension::Time, "h") => 3600.0,
        (Dimension::Length, "m") => 1.0,
        (Dimension::Length, "km") => 1000.0,
        (Dimension::Length, "mi") => 1609.344,
        (Dimension::Speed, "mps") => 1.0,
        (Dimension::Speed, "kmh") => 1.0 / 3.6,
        (Dimension::Speed, "miph") => 0.44704,
        _ => {
            return Err(ConfigError::UnknownUnit {
                dimension: dimension.to_string(),
                unit: unit.to_string(),
            })
        }
    };
    Ok(f)
}

pub fn canonicalize_units(value: f64, dimension: Dimension, unit: &str) -> Result<f64, ConfigError> {
    Ok(value * unit_factor(dimension, unit)?)
}
