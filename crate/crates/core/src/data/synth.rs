//! Synthetic check-in generator with planted structure, used by the
//! desk-scale test protocol.
//!
//! Planted signals:
//! - geography: each user draws check-ins from a Gaussian mixture around
//!   personal activity centers (picked among POI locations);
//! - temporal order: with probability `markov_strength` the next check-in
//!   follows a fixed global POI→POI successor map;
//! - social homophily: friends are guaranteed to share a configurable
//!   fraction of visited POIs;
//! - behavior coupling: `gap_exploration_coupling` > 0 makes users with
//!   long gaps between check-ins revisit more (low exploration factor).

use std::collections::{HashMap, HashSet};

use rand::Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};

use super::types::{
    CategoryId, CheckinEvent, Dataset, Poi, PoiId, Registry, SocialGraph, UserId,
};
use crate::error::{CoreError, Result};
use crate::geo::KM_PER_DEG;
use crate::rng::{child_seed, child_seed_indexed, rng_from_seed};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticConfig {
    pub n_users: usize,
    pub n_pois: usize,
    /// Approximate total check-ins (every user gets at least 5).
    pub n_checkins: usize,
    pub centers_per_user: usize,
    /// Std-dev of check-in scatter around a center, km. 0 pins each
    /// center's check-ins to a single coordinate.
    pub center_spread_km: f64,
    /// Probability that a check-in follows the planted successor map.
    pub markov_strength: f64,
    /// Fraction of the smaller friend's visited set both friends share.
    pub homophily: f64,
    /// 0 disables categories (the Gowalla case).
    pub n_categories: usize,
    /// Mean friends per user.
    pub friends_per_user: f64,
    /// Square region side, km.
    pub region_km: f64,
    pub mean_gap_hours: f64,
    /// 0 = gaps independent of exploration; 1 = long-gap users revisit most.
    pub gap_exploration_coupling: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            n_users: 100,
            n_pois: 500,
            n_checkins: 5_000,
            centers_per_user: 3,
            center_spread_km: 2.0,
            markov_strength: 0.3,
            homophily: 0.3,
            n_categories: 10,
            friends_per_user: 4.0,
            region_km: 200.0,
            mean_gap_hours: 24.0,
            gap_exploration_coupling: 0.0,
        }
    }
}

impl SyntheticConfig {
    fn validate(&self) -> Result<()> {
        if self.n_users == 0 || self.n_pois == 0 {
            return Err(CoreError::InvalidConfig(
                "synthetic config needs at least one user and one POI".into(),
            ));
        }
        if self.centers_per_user == 0 || self.centers_per_user > self.n_pois {
            return Err(CoreError::InvalidConfig(format!(
                "centers_per_user must be in 1..={}, got {}",
                self.n_pois, self.centers_per_user
            )));
        }
        for (name, v) in [
            ("markov_strength", self.markov_strength),
            ("homophily", self.homophily),
            ("gap_exploration_coupling", self.gap_exploration_coupling),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(CoreError::InvalidConfig(format!(
                    "{name} must lie in [0, 1], got {v}"
                )));
            }
        }
        if self.center_spread_km < 0.0 || self.region_km <= 0.0 || self.mean_gap_hours <= 0.0 {
            return Err(CoreError::InvalidConfig(
                "spread must be ≥ 0; region and mean gap must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Uniform grid over the plane for nearest-POI queries.
struct PoiGrid {
    cell_km: f64,
    cells: HashMap<(i32, i32), Vec<u32>>,
    coords: Vec<(f64, f64)>,
}

impl PoiGrid {
    fn build(coords: Vec<(f64, f64)>, region_km: f64) -> Self {
        let cell_km = (region_km / (coords.len() as f64).sqrt()).max(0.5);
        let mut cells: HashMap<(i32, i32), Vec<u32>> = HashMap::new();
        for (i, &(x, y)) in coords.iter().enumerate() {
            let key = ((x / cell_km).floor() as i32, (y / cell_km).floor() as i32);
            cells.entry(key).or_default().push(i as u32);
        }
        Self {
            cell_km,
            cells,
            coords,
        }
    }

    /// Indices of the k POIs closest to (x, y), nearest first; ties break
    /// on the lower index.
    fn k_nearest(&self, x: f64, y: f64, k: usize) -> Vec<u32> {
        let cx = (x / self.cell_km).floor() as i32;
        let cy = (y / self.cell_km).floor() as i32;
        let mut found: Vec<(f64, u32)> = Vec::new();
        let mut ring = 0i32;
        loop {
            for dx in -ring..=ring {
                for dy in -ring..=ring {
                    if dx.abs() != ring && dy.abs() != ring {
                        continue;
                    }
                    if let Some(ids) = self.cells.get(&(cx + dx, cy + dy)) {
                        for &i in ids {
                            let (px, py) = self.coords[i as usize];
                            found.push(((px - x).powi(2) + (py - y).powi(2), i));
                        }
                    }
                }
            }
            found.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            if found.len() >= k {
                // Anything in later rings is at least ring·cell away.
                let bound = (ring as f64) * self.cell_km;
                if found[k - 1].0.sqrt() <= bound || ring > 10_000 {
                    return found.into_iter().take(k).map(|(_, i)| i).collect();
                }
            }
            if found.len() == self.coords.len() {
                return found.into_iter().take(k).map(|(_, i)| i).collect();
            }
            ring += 1;
        }
    }

    /// Index of the POI closest to (x, y); ties break on the lower index.
    fn nearest(&self, x: f64, y: f64) -> u32 {
        let cx = (x / self.cell_km).floor() as i32;
        let cy = (y / self.cell_km).floor() as i32;
        let mut best: Option<(f64, u32)> = None;
        let mut ring = 0i32;
        loop {
            for dx in -ring..=ring {
                for dy in -ring..=ring {
                    if dx.abs() != ring && dy.abs() != ring {
                        continue; // only the ring boundary
                    }
                    if let Some(ids) = self.cells.get(&(cx + dx, cy + dy)) {
                        for &i in ids {
                            let (px, py) = self.coords[i as usize];
                            let d2 = (px - x).powi(2) + (py - y).powi(2);
                            let better = match best {
                                None => true,
                                Some((bd, bi)) => d2 < bd || (d2 == bd && i < bi),
                            };
                            if better {
                                best = Some((d2, i));
                            }
                        }
                    }
                }
            }
            if let Some((bd, bi)) = best {
                // The next ring starts at distance ring*cell from the query
                // cell; once the best hit beats that bound it is final.
                let ring_lower_bound = (ring as f64) * self.cell_km;
                if bd.sqrt() <= ring_lower_bound || ring > 10_000 {
                    return bi;
                }
            }
            ring += 1;
        }
    }
}

pub fn generate_synthetic(cfg: &SyntheticConfig, seed: u64) -> Result<Dataset> {
    cfg.validate()?;

    // POIs uniform in the region plane; lat/lon derived near the equator so
    // kilometers and degrees stay consistent with the haversine backbone.
    let mut rng = rng_from_seed(child_seed(seed, "pois"));
    let xy: Vec<(f64, f64)> = (0..cfg.n_pois)
        .map(|_| {
            (
                rng.random_range(0.0..cfg.region_km),
                rng.random_range(0.0..cfg.region_km),
            )
        })
        .collect();

    let mut pois = Registry::new();
    let mut poi_table = Vec::with_capacity(cfg.n_pois);
    let mut cat_rng = rng_from_seed(child_seed(seed, "categories"));
    for (i, &(x, y)) in xy.iter().enumerate() {
        let idx = pois.intern(&format!("p{i}"));
        let category = if cfg.n_categories > 0 {
            Some(CategoryId(cat_rng.random_range(0..cfg.n_categories as u32)))
        } else {
            None
        };
        poi_table.push(Poi {
            id: PoiId(idx),
            lat: y / KM_PER_DEG,
            lon: x / KM_PER_DEG,
            category,
        });
    }
    let categories = (cfg.n_categories > 0).then(|| {
        let mut r = Registry::new();
        for c in 0..cfg.n_categories {
            r.intern(&format!("c{c}"));
        }
        r
    });

    let grid = PoiGrid::build(xy.clone(), cfg.region_km);

    // Planted successor map for the temporal signal. Successors are drawn
    // from each POI's nearest neighbors so consecutive check-ins stay
    // geographically plausible and the two planted signals coexist.
    let mut markov_rng = rng_from_seed(child_seed(seed, "markov"));
    let successor: Vec<u32> = (0..cfg.n_pois)
        .map(|l| {
            let neighbors = grid.k_nearest(xy[l].0, xy[l].1, 6);
            let candidates: Vec<u32> = neighbors.into_iter().filter(|&i| i != l as u32).collect();
            if candidates.is_empty() {
                l as u32
            } else {
                candidates[markov_rng.random_range(0..candidates.len())]
            }
        })
        .collect();

    // Per-user event budget.
    let mut budget_rng = rng_from_seed(child_seed(seed, "budget"));
    let weights: Vec<f64> = (0..cfg.n_users)
        .map(|_| budget_rng.random_range(0.6..1.4))
        .collect();
    let wsum: f64 = weights.iter().sum();
    let counts: Vec<usize> = weights
        .iter()
        .map(|w| ((w / wsum) * cfg.n_checkins as f64).round().max(5.0) as usize)
        .collect();

    let mut users = Registry::new();
    let mut checkins: Vec<Vec<CheckinEvent>> = Vec::with_capacity(cfg.n_users);
    for (u, &event_budget) in counts.iter().enumerate() {
        users.intern(&format!("u{u}"));
        let mut rng = rng_from_seed(child_seed_indexed(seed, "user-events", u as u64));

        // Personal activity centers at POI locations.
        let mut centers: Vec<(f64, f64)> = Vec::with_capacity(cfg.centers_per_user);
        let mut chosen = HashSet::new();
        while centers.len() < cfg.centers_per_user {
            let p = rng.random_range(0..cfg.n_pois as u32);
            if chosen.insert(p) {
                centers.push(xy[p as usize]);
            }
        }

        let explore: f64 = rng.random_range(0.15..1.0);
        let revisit_prob = (1.0 - explore).clamp(0.0, 0.95);
        let c = cfg.gap_exploration_coupling;
        let gap_scale =
            cfg.mean_gap_hours * ((1.0 - c) * rng.random_range(0.25..1.75) + c * (1.35 - explore));
        let gap_dist = Exp::new(1.0 / gap_scale).expect("positive rate");
        let scatter = (cfg.center_spread_km > 0.0)
            .then(|| Normal::new(0.0, cfg.center_spread_km).expect("valid spread"));

        let mut t: i64 = 1_500_000_000 + rng.random_range(0..86_400) as i64;
        let mut prev: Option<u32> = None;
        let mut visited: Vec<u32> = Vec::new();
        let mut events = Vec::with_capacity(event_budget);
        for _ in 0..event_budget {
            let poi = if let (Some(p), true) = (prev, rng.random::<f64>() < cfg.markov_strength) {
                successor[p as usize]
            } else if !visited.is_empty() && rng.random::<f64>() < revisit_prob {
                visited[rng.random_range(0..visited.len())]
            } else {
                let (cx, cy) = centers[rng.random_range(0..centers.len())];
                let (dx, dy) = match scatter {
                    Some(n) => (n.sample(&mut rng), n.sample(&mut rng)),
                    None => (0.0, 0.0),
                };
                grid.nearest(cx + dx, cy + dy)
            };
            events.push(CheckinEvent {
                user: UserId(u as u32),
                poi: PoiId(poi),
                timestamp: t,
            });
            visited.push(poi);
            prev = Some(poi);
            t += (gap_dist.sample(&mut rng) * 3600.0).max(1.0) as i64;
        }
        checkins.push(events);
    }

    // Friendships: random pairs, then forced sharing per the homophily knob.
    let mut social_rng = rng_from_seed(child_seed(seed, "social"));
    let target_edges = ((cfg.friends_per_user * cfg.n_users as f64) / 2.0).round() as usize;
    let mut edge_set: HashSet<(u32, u32)> = HashSet::new();
    let mut attempts = 0usize;
    while edge_set.len() < target_edges && attempts < target_edges * 20 && cfg.n_users > 1 {
        attempts += 1;
        let a = social_rng.random_range(0..cfg.n_users as u32);
        let b = social_rng.random_range(0..cfg.n_users as u32);
        if a == b {
            continue;
        }
        edge_set.insert((a.min(b), a.max(b)));
    }
    let mut edges: Vec<(u32, u32)> = edge_set.into_iter().collect();
    edges.sort_unstable();

    if cfg.homophily > 0.0 {
        for &(a, b) in &edges {
            let qa: HashSet<u32> = checkins[a as usize].iter().map(|e| e.poi.0).collect();
            let qb: HashSet<u32> = checkins[b as usize].iter().map(|e| e.poi.0).collect();
            let want = ((cfg.homophily * qa.len().min(qb.len()) as f64).ceil() as usize).max(1);
            let have = qa.intersection(&qb).count();
            if have >= want {
                continue;
            }
            // Let the second user pick up missing shared POIs as new visits.
            let mut candidates: Vec<u32> = qa.difference(&qb).copied().collect();
            candidates.sort_unstable();
            let mut t = checkins[b as usize]
                .last()
                .map(|e| e.timestamp)
                .unwrap_or(1_500_000_000);
            for &poi in candidates.iter().take(want - have) {
                t += 3600;
                checkins[b as usize].push(CheckinEvent {
                    user: UserId(b),
                    poi: PoiId(poi),
                    timestamp: t,
                });
            }
        }
    }

    let social = SocialGraph::from_edges(
        cfg.n_users,
        edges.into_iter().map(|(a, b)| (UserId(a), UserId(b))),
    );

    let mut dataset = Dataset {
        users,
        pois,
        poi_table,
        checkins,
        social,
        categories,
    };
    dataset.sort_checkins();
    Ok(dataset)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_under_seed() {
        let cfg = SyntheticConfig {
            n_users: 20,
            n_pois: 80,
            n_checkins: 600,
            ..Default::default()
        };
        let a = generate_synthetic(&cfg, 11).unwrap();
        let b = generate_synthetic(&cfg, 11).unwrap();
        assert_eq!(a.checkins, b.checkins);
        assert_eq!(a.social.n_edges(), b.social.n_edges());
        let c = generate_synthetic(&cfg, 12).unwrap();
        assert_ne!(a.checkins, c.checkins);
    }

    #[test]
    fn full_homophily_guarantees_shared_pois() {
        let cfg = SyntheticConfig {
            n_users: 30,
            n_pois: 100,
            n_checkins: 900,
            homophily: 1.0,
            ..Default::default()
        };
        let d = generate_synthetic(&cfg, 5).unwrap();
        for u in 0..d.n_users() {
            let qu: HashSet<u32> = d.checkins[u].iter().map(|e| e.poi.0).collect();
            for &f in d.social.friends(UserId(u as u32)) {
                let qf: HashSet<u32> = d.checkins[f.index()].iter().map(|e| e.poi.0).collect();
                assert!(
                    qu.intersection(&qf).count() >= 1,
                    "friends {u} and {} share nothing",
                    f.0
                );
            }
        }
    }

    #[test]
    fn zero_spread_pins_checkins_to_center_coordinates() {
        let cfg = SyntheticConfig {
            n_users: 10,
            n_pois: 50,
            n_checkins: 400,
            centers_per_user: 2,
            center_spread_km: 0.0,
            markov_strength: 0.0,
            homophily: 0.0,
            ..Default::default()
        };
        let d = generate_synthetic(&cfg, 2).unwrap();
        for events in &d.checkins {
            let mut coords: Vec<(u64, u64)> = events
                .iter()
                .map(|e| {
                    let p = &d.poi_table[e.poi.index()];
                    (p.lat.to_bits(), p.lon.to_bits())
                })
                .collect();
            coords.sort_unstable();
            coords.dedup();
            assert!(
                coords.len() <= cfg.centers_per_user,
                "more distinct coordinates than centers"
            );
        }
    }

    #[test]
    fn infeasible_configs_rejected() {
        let cfg = SyntheticConfig {
            n_users: 5,
            n_pois: 3,
            centers_per_user: 4,
            ..Default::default()
        };
        assert!(generate_synthetic(&cfg, 1).is_err());
    }
}
