//! Satellite-to-UE geometry: slant range, propagation delay, delay extremes.
//!
//! The satellite is treated as a static point at altitude `h`; each UE sees
//! it under an elevation angle in (0°, 90°]. Angles are accepted in degrees
//! and converted internally, so callers never pass radians.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::float::{from_f64, positive, to_f64, SimFloat};

/// Speed of light in km/s.
pub const SPEED_OF_LIGHT_KM_S: f64 = 299_792.458;

/// Mean Earth radius in km.
pub const EARTH_RADIUS_KM: f64 = 6371.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("elevation angle {0} deg outside (0, 90]")]
    ElevationOutOfRange(f64),
    #[error("invalid satellite geometry: {0}")]
    InvalidGeometry(&'static str),
    #[error("distance must be positive, got {0} km")]
    NonPositiveDistance(f64),
    #[error("empty UE population")]
    EmptyPopulation,
}

/// Static satellite/Earth geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SatelliteGeometry<F> {
    /// Orbital altitude in km.
    pub altitude_km: F,
    /// Earth radius in km.
    pub earth_radius_km: F,
}

impl<F: SimFloat> SatelliteGeometry<F> {
    pub fn new(altitude_km: F, earth_radius_km: F) -> Result<Self, GeometryError> {
        if !positive(altitude_km) {
            return Err(GeometryError::InvalidGeometry("altitude must be positive"));
        }
        if !positive(earth_radius_km) {
            return Err(GeometryError::InvalidGeometry(
                "Earth radius must be positive",
            ));
        }
        Ok(Self {
            altitude_km,
            earth_radius_km,
        })
    }

    /// Geometry with the default Earth radius of 6371 km.
    pub fn with_altitude(altitude_km: F) -> Result<Self, GeometryError> {
        Self::new(altitude_km, from_f64(EARTH_RADIUS_KM))
    }
}

/// One UE's realized geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UeGeometry<F> {
    pub ue_id: u32,
    pub elevation_deg: F,
    pub slant_range_km: F,
    pub one_way_delay_ms: F,
}

impl<F: SimFloat> UeGeometry<F> {
    /// Derives slant range and delay from an elevation angle.
    pub fn from_elevation(
        ue_id: u32,
        elevation_deg: F,
        geom: &SatelliteGeometry<F>,
    ) -> Result<Self, GeometryError> {
        let slant_range_km = slant_range(elevation_deg, geom)?;
        let one_way_delay_ms = propagation_delay(slant_range_km)?;
        Ok(Self {
            ue_id,
            elevation_deg,
            slant_range_km,
            one_way_delay_ms,
        })
    }
}

/// Slant range in km from the satellite to a UE at the given elevation.
///
/// `d = sqrt(R_E^2 sin^2(a) + h^2 + 2 h R_E) - R_E sin(a)`, strictly
/// decreasing in elevation for a fixed altitude, equal to `h` at zenith.
pub fn slant_range<F: SimFloat>(
    elevation_deg: F,
    geom: &SatelliteGeometry<F>,
) -> Result<F, GeometryError> {
    let in_range = elevation_deg > F::zero() && elevation_deg <= from_f64(90.0);
    if !in_range {
        return Err(GeometryError::ElevationOutOfRange(to_f64(elevation_deg)));
    }
    let h = geom.altitude_km;
    let re = geom.earth_radius_km;
    let sin_a = elevation_deg.to_radians().sin();
    let re_sin = re * sin_a;
    let two = from_f64::<F>(2.0);
    Ok((re_sin * re_sin + h * h + two * h * re).sqrt() - re_sin)
}

/// One-way propagation delay in ms for a slant range in km.
pub fn propagation_delay<F: SimFloat>(slant_range_km: F) -> Result<F, GeometryError> {
    if !positive(slant_range_km) {
        return Err(GeometryError::NonPositiveDistance(to_f64(slant_range_km)));
    }
    let c_km_per_ms = from_f64::<F>(SPEED_OF_LIGHT_KM_S / 1e3);
    Ok(slant_range_km / c_km_per_ms)
}

/// Minimum and maximum one-way delay over a UE population.
pub fn delay_extremes<F: SimFloat>(ues: &[UeGeometry<F>]) -> Result<(F, F), GeometryError> {
    if ues.is_empty() {
        return Err(GeometryError::EmptyPopulation);
    }
    let mut tau_min = ues[0].one_way_delay_ms;
    let mut tau_max = tau_min;
    for ue in &ues[1..] {
        tau_min = tau_min.min(ue.one_way_delay_ms);
        tau_max = tau_max.max(ue.one_way_delay_ms);
    }
    Ok((tau_min, tau_max))
}
