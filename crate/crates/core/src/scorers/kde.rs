//! Geographical scoring by kernel density estimation over a user's
//! check-in locations.
//!
//! Support points live in a per-user local plane (equirectangular about the
//! user's mean check-in location) so both axes are kilometers. The kernel is
//! a product of normals with per-dimension Silverman bandwidths.

use log::warn;
use serde::{Deserialize, Serialize};

use super::{Context, ContextScorer};
use crate::data::{FrequencyMatrix, PoiId, UserId};
use crate::error::{CoreError, Result};
use crate::geo::LocalProjection;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KdeSettings {
    /// Silverman prefactor in h = c·σ̂·n^(−1/5).
    pub silverman_factor: f64,
    /// Lower bound on each bandwidth, km.
    pub bandwidth_floor_km: f64,
}

impl Default for KdeSettings {
    fn default() -> Self {
        Self {
            silverman_factor: 1.06,
            bandwidth_floor_km: 0.01,
        }
    }
}

/// One fitted density: weighted support points in a local plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserDensity {
    pub projection: LocalProjection,
    /// (x km, y km, weight = check-in count) per distinct POI.
    pub support: Vec<(f64, f64, f64)>,
    pub bandwidth_x: f64,
    pub bandwidth_y: f64,
    /// Total check-in count Σ weights.
    pub total_weight: f64,
}

impl UserDensity {
    fn fit(points: &[(f64, f64, f64)], settings: &KdeSettings) -> Self {
        let total_weight: f64 = points.iter().map(|p| p.2).sum();
        let lat0 = points.iter().map(|p| p.0 * p.2).sum::<f64>() / total_weight;
        let lon0 = points.iter().map(|p| p.1 * p.2).sum::<f64>() / total_weight;
        let projection = LocalProjection::new(lat0, lon0);
        let support: Vec<(f64, f64, f64)> = points
            .iter()
            .map(|&(lat, lon, w)| {
                let (x, y) = projection.project(lat, lon);
                (x, y, w)
            })
            .collect();

        // Weighted sample std over check-in events; the mean is the origin.
        let variance = |axis: fn(&(f64, f64, f64)) -> f64| -> f64 {
            if total_weight <= 1.0 {
                return 0.0;
            }
            support.iter().map(|p| p.2 * axis(p).powi(2)).sum::<f64>() / (total_weight - 1.0)
        };
        let n_factor = total_weight.powf(-0.2);
        let h = |sigma2: f64| {
            (settings.silverman_factor * sigma2.sqrt() * n_factor)
                .max(settings.bandwidth_floor_km)
        };
        Self {
            projection,
            bandwidth_x: h(variance(|p| p.0)),
            bandwidth_y: h(variance(|p| p.1)),
            support,
            total_weight,
        }
    }

    /// Weighted kernel density at (lat, lon).
    pub fn density(&self, lat: f64, lon: f64) -> f64 {
        let (qx, qy) = self.projection.project(lat, lon);
        let norm = 1.0 / (2.0 * std::f64::consts::PI * self.bandwidth_x * self.bandwidth_y);
        let sum: f64 = self
            .support
            .iter()
            .map(|&(x, y, w)| {
                let dx = (qx - x) / self.bandwidth_x;
                let dy = (qy - y) / self.bandwidth_y;
                w * norm * (-0.5 * (dx * dx + dy * dy)).exp()
            })
            .sum();
        sum / self.total_weight
    }
}

/// Fitted geographical KDE scorer. `Universal` pools every user's check-ins
/// into one shared density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GeoKdeModel {
    PerUser {
        users: Vec<Option<UserDensity>>,
        coords: Vec<(f64, f64)>,
        settings: KdeSettings,
    },
    Universal {
        density: UserDensity,
        n_users: usize,
        coords: Vec<(f64, f64)>,
        settings: KdeSettings,
    },
}

/// Fit one density per user from the train frequency matrix.
///
/// `coords` maps POI index → (lat, lon). Users without train check-ins get
/// no density and error at scoring time.
pub fn fit_geo_kde(
    matrix: &FrequencyMatrix,
    coords: &[(f64, f64)],
    settings: KdeSettings,
) -> GeoKdeModel {
    let users = (0..matrix.n_users())
        .map(|u| {
            let points: Vec<(f64, f64, f64)> = matrix
                .user_row(UserId(u as u32))
                .map(|(l, c)| {
                    let (lat, lon) = coords[l.index()];
                    (lat, lon, c as f64)
                })
                .collect();
            if points.is_empty() {
                return None;
            }
            let density = UserDensity::fit(&points, &settings);
            if points.len() == 1 {
                warn!("user index {u} has a single support point; bandwidth floor applies");
            }
            Some(density)
        })
        .collect();
    GeoKdeModel::PerUser {
        users,
        coords: coords.to_vec(),
        settings,
    }
}

/// Fit one density over all users' check-ins pooled together.
pub fn fit_geo_kde_universal(
    matrix: &FrequencyMatrix,
    coords: &[(f64, f64)],
    settings: KdeSettings,
) -> Result<GeoKdeModel> {
    let mut by_poi = vec![0f64; matrix.n_pois()];
    for u in 0..matrix.n_users() {
        for (l, c) in matrix.user_row(UserId(u as u32)) {
            by_poi[l.index()] += c as f64;
        }
    }
    let points: Vec<(f64, f64, f64)> = by_poi
        .iter()
        .enumerate()
        .filter(|&(_, &w)| w > 0.0)
        .map(|(l, &w)| {
            let (lat, lon) = coords[l];
            (lat, lon, w)
        })
        .collect();
    if points.is_empty() {
        return Err(CoreError::EmptyMatrix);
    }
    Ok(GeoKdeModel::Universal {
        density: UserDensity::fit(&points, &settings),
        n_users: matrix.n_users(),
        coords: coords.to_vec(),
        settings,
    })
}

impl GeoKdeModel {
    fn coords(&self) -> &[(f64, f64)] {
        match self {
            GeoKdeModel::PerUser { coords, .. } | GeoKdeModel::Universal { coords, .. } => coords,
        }
    }

    pub fn user_density(&self, user: UserId) -> Result<&UserDensity> {
        match self {
            GeoKdeModel::PerUser { users, .. } => users
                .get(user.index())
                .ok_or(CoreError::UnknownUser(user.0))?
                .as_ref()
                .ok_or(CoreError::UnknownUser(user.0)),
            GeoKdeModel::Universal {
                density, n_users, ..
            } => {
                if user.index() >= *n_users {
                    return Err(CoreError::UnknownUser(user.0));
                }
                Ok(density)
            }
        }
    }
}

impl ContextScorer for GeoKdeModel {
    fn context(&self) -> Context {
        Context::Geographical
    }

    fn score(&self, user: UserId, poi: PoiId) -> Result<f64> {
        let (lat, lon) = *self
            .coords()
            .get(poi.index())
            .ok_or(CoreError::UnknownPoiIndex(poi.0))?;
        Ok(self.user_density(user)?.density(lat, lon))
    }
}
