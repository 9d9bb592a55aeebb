//! Great-circle distances and the local flat projection used by the
//! geographical scorers.

/// Mean Earth radius in kilometers.
pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// Kilometers per degree of latitude (and of longitude at the equator).
pub const KM_PER_DEG: f64 = EARTH_RADIUS_KM * std::f64::consts::PI / 180.0;

/// Haversine great-circle distance between two (lat, lon) points in degrees.
pub fn haversine_km(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let phi1 = lat1.to_radians();
    let phi2 = lat2.to_radians();
    let dphi = (lat2 - lat1).to_radians();
    let dlam = (lon2 - lon1).to_radians();

    let a = (dphi / 2.0).sin().powi(2) + phi1.cos() * phi2.cos() * (dlam / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * a.sqrt().min(1.0).asin()
}

/// Equirectangular projection about a fixed origin.
///
/// Maps (lat, lon) degrees to (x, y) kilometers in a plane tangent at the
/// origin. Good to well under a percent at the city scales the per-user
/// density models operate on, and it keeps the two axes in the same unit so
/// a single bandwidth pair is meaningful.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LocalProjection {
    pub origin_lat: f64,
    pub origin_lon: f64,
    cos_lat0: f64,
}

impl LocalProjection {
    pub fn new(origin_lat: f64, origin_lon: f64) -> Self {
        Self {
            origin_lat,
            origin_lon,
            cos_lat0: origin_lat.to_radians().cos(),
        }
    }

    /// Project (lat, lon) degrees to (x, y) km relative to the origin.
    pub fn project(&self, lat: f64, lon: f64) -> (f64, f64) {
        let x = (lon - self.origin_lon) * KM_PER_DEG * self.cos_lat0;
        let y = (lat - self.origin_lat) * KM_PER_DEG;
        (x, y)
    }
}
