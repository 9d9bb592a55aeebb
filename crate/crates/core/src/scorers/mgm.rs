//! Multi-center Gaussian model: a per-user mixture of geographic activity
//! centers.
//!
//! Centers come from a greedy scan of the user's POIs in descending visit
//! frequency: a POI joins the nearest existing center within `d_max_km`
//! (whose position updates to the mass-weighted member mean), otherwise it
//! seeds a new center. Centers holding less than `theta` of the user's
//! check-in mass are discarded; if that removes everything, a single center
//! at the user's mean location remains.

use serde::{Deserialize, Serialize};

use super::{Context, ContextScorer};
use crate::data::{FrequencyMatrix, PoiId, UserId};
use crate::error::{CoreError, Result};
use crate::geo::haversine_km;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MgmSettings {
    /// Maximum distance at which a POI joins an existing center, km.
    pub d_max_km: f64,
    /// Minimum check-in mass fraction a center must hold.
    pub theta: f64,
    /// Lower bound on the per-center spread, km.
    pub sigma_floor_km: f64,
}

impl Default for MgmSettings {
    fn default() -> Self {
        Self {
            d_max_km: 15.0,
            theta: 0.02,
            sigma_floor_km: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MgmCenter {
    pub lat: f64,
    pub lon: f64,
    /// Fraction of the user's check-in mass in this center, ≥ theta.
    pub mass_fraction: f64,
    /// Spread of member distances, km (floored).
    pub sigma_km: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MgmModel {
    pub centers: Vec<Vec<MgmCenter>>,
    pub settings: MgmSettings,
    coords: Vec<(f64, f64)>,
}

impl MgmModel {
    /// Assemble a model directly from centers; used by tests and by tools
    /// that import centers fitted elsewhere.
    pub fn from_centers(
        centers: Vec<Vec<MgmCenter>>,
        coords: Vec<(f64, f64)>,
        settings: MgmSettings,
    ) -> Self {
        Self {
            centers,
            settings,
            coords,
        }
    }

    /// Mixture score at an explicit (lat, lon).
    pub fn score_at(&self, user: UserId, lat: f64, lon: f64) -> Result<f64> {
        let centers = self
            .centers
            .get(user.index())
            .ok_or(CoreError::UnknownUser(user.0))?;
        if centers.is_empty() {
            return Ok(0.0);
        }
        let mut num = 0.0;
        let mut mass = 0.0;
        for c in centers {
            let d = haversine_km(lat, lon, c.lat, c.lon);
            num += c.mass_fraction * (-d * d / (2.0 * c.sigma_km * c.sigma_km)).exp();
            mass += c.mass_fraction;
        }
        Ok(num / mass)
    }
}

impl ContextScorer for MgmModel {
    fn context(&self) -> Context {
        Context::MultiCenter
    }

    fn score(&self, user: UserId, poi: PoiId) -> Result<f64> {
        let (lat, lon) = *self
            .coords
            .get(poi.index())
            .ok_or(CoreError::UnknownPoiIndex(poi.0))?;
        self.score_at(user, lat, lon)
    }
}

pub fn fit_mgm(matrix: &FrequencyMatrix, coords: &[(f64, f64)], settings: MgmSettings) -> MgmModel {
    struct Builder {
        lat: f64,
        lon: f64,
        mass: f64,
        members: Vec<(f64, f64, f64)>, // lat, lon, weight
    }

    let centers = (0..matrix.n_users())
        .map(|u| {
            let user = UserId(u as u32);
            // POIs by descending count; ties by ascending index (the row
            // iterates ascending, stable sort keeps that order).
            let mut pois: Vec<(PoiId, u32)> = matrix.user_row(user).collect();
            pois.sort_by_key(|&(_, c)| std::cmp::Reverse(c));
            if pois.is_empty() {
                return Vec::new();
            }
            let total: f64 = pois.iter().map(|&(_, c)| c as f64).sum();

            let mut builders: Vec<Builder> = Vec::new();
            for &(poi, count) in &pois {
                let (lat, lon) = coords[poi.index()];
                let w = count as f64;
                let nearest = builders
                    .iter()
                    .enumerate()
                    .map(|(i, b)| (i, haversine_km(lat, lon, b.lat, b.lon)))
                    .filter(|&(_, d)| d <= settings.d_max_km)
                    .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
                match nearest {
                    Some((i, _)) => {
                        let b = &mut builders[i];
                        let new_mass = b.mass + w;
                        b.lat = (b.lat * b.mass + lat * w) / new_mass;
                        b.lon = (b.lon * b.mass + lon * w) / new_mass;
                        b.mass = new_mass;
                        b.members.push((lat, lon, w));
                    }
                    None => builders.push(Builder {
                        lat,
                        lon,
                        mass: w,
                        members: vec![(lat, lon, w)],
                    }),
                }
            }

            let finalize = |b: &Builder| -> MgmCenter {
                let distances: Vec<(f64, f64)> = b
                    .members
                    .iter()
                    .map(|&(lat, lon, w)| (haversine_km(lat, lon, b.lat, b.lon), w))
                    .collect();
                let mean = distances.iter().map(|&(d, w)| d * w).sum::<f64>() / b.mass;
                let sigma = if b.mass > 1.0 {
                    (distances
                        .iter()
                        .map(|&(d, w)| w * (d - mean).powi(2))
                        .sum::<f64>()
                        / (b.mass - 1.0))
                        .sqrt()
                } else {
                    0.0
                };
                MgmCenter {
                    lat: b.lat,
                    lon: b.lon,
                    mass_fraction: b.mass / total,
                    sigma_km: sigma.max(settings.sigma_floor_km),
                }
            };

            let kept: Vec<MgmCenter> = builders
                .iter()
                .map(finalize)
                .filter(|c| c.mass_fraction >= settings.theta)
                .collect();
            if !kept.is_empty() {
                return kept;
            }
            // Everything below threshold: one center at the user's mean.
            let mean_lat = pois
                .iter()
                .map(|&(l, c)| coords[l.index()].0 * c as f64)
                .sum::<f64>()
                / total;
            let mean_lon = pois
                .iter()
                .map(|&(l, c)| coords[l.index()].1 * c as f64)
                .sum::<f64>()
                / total;
            let fallback = Builder {
                lat: mean_lat,
                lon: mean_lon,
                mass: total,
                members: pois
                    .iter()
                    .map(|&(l, c)| (coords[l.index()].0, coords[l.index()].1, c as f64))
                    .collect(),
            };
            vec![MgmCenter {
                mass_fraction: 1.0,
                ..finalize(&fallback)
            }]
        })
        .collect();

    MgmModel {
        centers,
        settings,
        coords: coords.to_vec(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::CheckinEvent;

    fn matrix_for(events: &[(u32, u32)], n_users: usize, n_pois: usize) -> FrequencyMatrix {
        let mut lists = vec![Vec::new(); n_users];
        for (i, &(u, l)) in events.iter().enumerate() {
            lists[u as usize].push(CheckinEvent {
                user: UserId(u),
                poi: PoiId(l),
                timestamp: i as i64,
            });
        }
        FrequencyMatrix::from_checkins(n_users, n_pois, &lists)
    }

    #[test]
    fn all_checkins_at_one_point_scores_one_there() {
        let m = matrix_for(&[(0, 0), (0, 0), (0, 0)], 1, 1);
        let model = fit_mgm(&m, &[(12.0, 34.0)], MgmSettings::default());
        assert_eq!(model.centers[0].len(), 1);
        let s = model.score(UserId(0), PoiId(0)).unwrap();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn score_decreases_with_distance_from_single_center() {
        let m = matrix_for(&[(0, 0), (0, 0)], 1, 4);
        let coords = [(0.0, 0.0), (0.0, 0.01), (0.0, 0.05), (0.0, 0.2)];
        let model = fit_mgm(&m, &coords, MgmSettings::default());
        let scores: Vec<f64> = (0..4)
            .map(|l| model.score(UserId(0), PoiId(l as u32)).unwrap())
            .collect();
        for pair in scores.windows(2) {
            assert!(pair[0] > pair[1]);
        }
    }

    #[test]
    fn two_center_mixture_matches_hand_formula() {
        let centers = vec![vec![
            MgmCenter {
                lat: 0.0,
                lon: 0.0,
                mass_fraction: 0.8,
                sigma_km: 1.0,
            },
            MgmCenter {
                lat: 0.0,
                lon: 0.5,
                mass_fraction: 0.2,
                sigma_km: 1.0,
            },
        ]];
        let model = MgmModel::from_centers(centers, vec![], MgmSettings::default());
        let (qlat, qlon) = (0.0, 0.01);
        let d1 = haversine_km(qlat, qlon, 0.0, 0.0);
        let d2 = haversine_km(qlat, qlon, 0.0, 0.5);
        let expected =
            (0.8 * (-d1 * d1 / 2.0).exp() + 0.2 * (-d2 * d2 / 2.0).exp()) / (0.8 + 0.2);
        let got = model.score_at(UserId(0), qlat, qlon).unwrap();
        assert!((got - expected).abs() < 1e-9, "got {got} want {expected}");
    }

    #[test]
    fn distant_pois_seed_separate_centers() {
        // Two POI clusters ~110 km apart with d_max 15 km.
        let coords = [(0.0, 0.0), (0.0, 0.02), (0.0, 1.0)];
        let m = matrix_for(&[(0, 0), (0, 0), (0, 1), (0, 2), (0, 2)], 1, 3);
        let model = fit_mgm(&m, &coords, MgmSettings::default());
        assert_eq!(model.centers[0].len(), 2);
        let mass: f64 = model.centers[0].iter().map(|c| c.mass_fraction).sum();
        assert!((mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tiny_centers_are_discarded() {
        // 60 visits in one cluster, 1 visit far away (mass 1/61 < θ=0.05).
        let coords = [(0.0, 0.0), (0.0, 1.0)];
        let mut events = vec![(0, 0); 60];
        events.push((0, 1));
        let m = matrix_for(&events, 1, 2);
        let settings = MgmSettings {
            theta: 0.05,
            ..Default::default()
        };
        let model = fit_mgm(&m, &coords, settings);
        assert_eq!(model.centers[0].len(), 1);
        assert!(model.centers[0][0].mass_fraction >= 0.05);
    }

    #[test]
    fn fallback_center_when_everything_is_below_threshold() {
        // Two singleton clusters, each with mass 0.5 < θ=0.6.
        let coords = [(0.0, 0.0), (0.0, 1.0)];
        let m = matrix_for(&[(0, 0), (0, 1)], 1, 2);
        let settings = MgmSettings {
            theta: 0.6,
            ..Default::default()
        };
        let model = fit_mgm(&m, &coords, settings);
        assert_eq!(model.centers[0].len(), 1);
        assert_eq!(model.centers[0][0].mass_fraction, 1.0);
        // Mean of the two POIs.
        assert!((model.centers[0][0].lon - 0.5).abs() < 1e-12);
    }

    #[test]
    fn invariant_under_poi_relabeling() {
        // Permute POI indices (coordinates travel with them): any query
        // coordinate keeps its score.
        let coords = [(0.0, 0.0), (0.1, 0.1), (0.0, 0.3)];
        let m = matrix_for(&[(0, 0), (0, 0), (0, 1), (0, 2)], 1, 3);
        let model = fit_mgm(&m, &coords, MgmSettings::default());

        let permuted_coords = [(0.0, 0.3), (0.0, 0.0), (0.1, 0.1)]; // 2,0,1
        let m2 = matrix_for(&[(0, 1), (0, 1), (0, 2), (0, 0)], 1, 3);
        let relabeled = fit_mgm(&m2, &permuted_coords, MgmSettings::default());

        for &(lat, lon) in &coords {
            let a = model.score_at(UserId(0), lat, lon).unwrap();
            let b = relabeled.score_at(UserId(0), lat, lon).unwrap();
            assert!((a - b).abs() < 1e-12, "relabeling changed {a} to {b}");
        }
    }

    #[test]
    fn scores_lie_in_unit_interval() {
        let coords = [(0.0, 0.0), (0.1, 0.1), (0.0, 0.3), (0.5, 0.5)];
        let m = matrix_for(&[(0, 0), (0, 1), (0, 1), (0, 2), (0, 3)], 1, 4);
        let model = fit_mgm(&m, &coords, MgmSettings::default());
        for l in 0..4u32 {
            let s = model.score(UserId(0), PoiId(l)).unwrap();
            assert!((0.0..=1.0).contains(&s), "score {s} out of range");
        }
    }
}
