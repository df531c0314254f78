//! Geodetic <-> local planar conversion.
//!
//! Local equirectangular projection about a fixed per-map origin. Within a
//! few tens of kilometers of the origin it is distance-faithful to well under
//! a tenth of a percent, which is all the map pipeline needs.

use thiserror::Error;

use crate::geom::PlanarPoint;
use crate::scalar::{lit, Real};

/// Mean Earth radius (IUGG), meters.
pub const EARTH_RADIUS_M: f64 = 6_371_008.8;

/// Largest latitude offset from the origin accepted by [`to_planar`], degrees.
pub const MAX_LAT_OFFSET_DEG: f64 = 1.0;

/// Largest planar coordinate accepted by [`to_geodetic`], meters.
pub const MAX_PLANAR_OFFSET_M: f64 = 100_000.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeoError {
    #[error("invalid geodetic coordinate: lat {lat}, lon {lon}")]
    InvalidCoordinate { lat: f64, lon: f64 },
    #[error("point lies outside the local projection range: {0}")]
    OutOfRange(String),
}

/// Latitude/longitude in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoPoint<T> {
    pub lat: T,
    pub lon: T,
}

impl<T: Real> GeoPoint<T> {
    /// Validated constructor.
    pub fn new(lat: T, lon: T) -> Result<Self, GeoError> {
        let g = Self { lat, lon };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), GeoError> {
        let ok = self.lat.is_finite()
            && self.lon.is_finite()
            && self.lat.abs() <= lit(90.0)
            && self.lon.abs() <= lit(180.0);
        if ok {
            Ok(())
        } else {
            Err(GeoError::InvalidCoordinate {
                lat: self.lat.to_f64().unwrap_or(f64::NAN),
                lon: self.lon.to_f64().unwrap_or(f64::NAN),
            })
        }
    }
}

/// A planar position stamped with seconds since trace start.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimedSample<T> {
    pub t: T,
    pub p: PlanarPoint<T>,
}

impl<T> TimedSample<T> {
    pub const fn new(t: T, p: PlanarPoint<T>) -> Self {
        Self { t, p }
    }
}

fn delta_lon<T: Real>(lon: T, origin_lon: T) -> T {
    let mut d = lon - origin_lon;
    let full = lit::<T>(360.0);
    if d > lit(180.0) {
        d = d - full;
    } else if d < lit(-180.0) {
        d = d + full;
    }
    d
}

/// Projects `g` into the planar frame anchored at `origin`.
pub fn to_planar<T: Real>(g: GeoPoint<T>, origin: GeoPoint<T>) -> Result<PlanarPoint<T>, GeoError> {
    g.validate()?;
    origin.validate()?;
    let dlat = g.lat - origin.lat;
    if dlat.abs() >= lit(MAX_LAT_OFFSET_DEG) {
        return Err(GeoError::OutOfRange(format!(
            "latitude offset {dlat} deg exceeds {MAX_LAT_OFFSET_DEG} deg"
        )));
    }
    let r = lit::<T>(EARTH_RADIUS_M);
    let x = r * origin.lat.to_radians().cos() * delta_lon(g.lon, origin.lon).to_radians();
    let y = r * dlat.to_radians();
    Ok(PlanarPoint::new(x, y))
}

/// Inverse of [`to_planar`].
pub fn to_geodetic<T: Real>(
    p: PlanarPoint<T>,
    origin: GeoPoint<T>,
) -> Result<GeoPoint<T>, GeoError> {
    origin.validate()?;
    let limit = lit::<T>(MAX_PLANAR_OFFSET_M);
    if !p.is_finite() || p.x.abs() >= limit || p.y.abs() >= limit {
        return Err(GeoError::OutOfRange(format!(
            "planar offset ({}, {}) exceeds {MAX_PLANAR_OFFSET_M} m",
            p.x, p.y
        )));
    }
    let r = lit::<T>(EARTH_RADIUS_M);
    let lat = origin.lat + (p.y / r).to_degrees();
    let mut lon = origin.lon + (p.x / (r * origin.lat.to_radians().cos())).to_degrees();
    if lon > lit(180.0) {
        lon = lon - lit(360.0);
    } else if lon < lit(-180.0) {
        lon = lon + lit(360.0);
    }
    GeoPoint::new(lat, lon)
}

/// Arithmetic mean of a set of geodetic points, used as a map origin.
pub fn centroid<T: Real>(points: &[GeoPoint<T>]) -> Option<GeoPoint<T>> {
    if points.is_empty() {
        return None;
    }
    let n = T::from_usize(points.len())?;
    let lat = points.iter().fold(T::zero(), |a, g| a + g.lat) / n;
    let lon = points.iter().fold(T::zero(), |a, g| a + g.lon) / n;
    Some(GeoPoint { lat, lon })
}
