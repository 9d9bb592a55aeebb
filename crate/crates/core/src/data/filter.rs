//! Cold-start filtering: drop sparse users, then sparse POIs.

use std::collections::HashSet;

use super::types::{Dataset, Poi, PoiId, Registry, SocialGraph, UserId};

/// Single-pass filter: remove users with fewer than `min_user_checkins`
/// check-in events, then POIs that — after the user removal — have fewer
/// than `min_poi_visitors` distinct visitors. Users left without any
/// check-ins by the POI removal are dropped too, so the result always
/// satisfies the one-check-in-per-user invariant of downstream stages.
///
/// Social edges touching removed users are dropped. Registries are
/// compacted; surviving entities keep their relative order.
pub fn filter_dataset(d: &Dataset, min_user_checkins: usize, min_poi_visitors: usize) -> Dataset {
    // Pass 1: users by event count.
    let user_kept: Vec<bool> = d.checkins.iter().map(|c| c.len() >= min_user_checkins).collect();

    // Pass 2: POIs by distinct-visitor count among kept users.
    let mut visitors: Vec<HashSet<u32>> = vec![HashSet::new(); d.n_pois()];
    for (u, events) in d.checkins.iter().enumerate() {
        if !user_kept[u] {
            continue;
        }
        for e in events {
            visitors[e.poi.index()].insert(u as u32);
        }
    }
    let poi_kept: Vec<bool> = visitors.iter().map(|v| v.len() >= min_poi_visitors).collect();

    rebuild(d, &user_kept, &poi_kept)
}

/// Re-apply [`filter_dataset`] until no further removals happen.
/// Monotone shrinking, so it terminates.
pub fn filter_dataset_fixpoint(
    d: &Dataset,
    min_user_checkins: usize,
    min_poi_visitors: usize,
) -> Dataset {
    let mut current = filter_dataset(d, min_user_checkins, min_poi_visitors);
    loop {
        let next = filter_dataset(&current, min_user_checkins, min_poi_visitors);
        if next.n_users() == current.n_users() && next.n_pois() == current.n_pois() {
            return next;
        }
        current = next;
    }
}

fn rebuild(d: &Dataset, user_kept: &[bool], poi_kept: &[bool]) -> Dataset {
    // Users that keep at least one check-in after POI removal.
    let effectively_kept: Vec<bool> = d
        .checkins
        .iter()
        .enumerate()
        .map(|(u, events)| {
            user_kept[u] && events.iter().any(|e| poi_kept[e.poi.index()])
        })
        .collect();

    let mut users = Registry::new();
    let mut user_map: Vec<Option<u32>> = vec![None; d.n_users()];
    for (u, &keep) in effectively_kept.iter().enumerate() {
        if keep {
            let name = d.users.name(u as u32).expect("registry covers all users");
            user_map[u] = Some(users.intern(name));
        }
    }

    let mut pois = Registry::new();
    let mut poi_table = Vec::new();
    let mut poi_map: Vec<Option<u32>> = vec![None; d.n_pois()];
    for (l, &keep) in poi_kept.iter().enumerate() {
        if keep {
            let name = d.pois.name(l as u32).expect("registry covers all POIs");
            let new_idx = pois.intern(name);
            poi_map[l] = Some(new_idx);
            let old = d.poi_table[l];
            poi_table.push(Poi {
                id: PoiId(new_idx),
                ..old
            });
        }
    }

    let mut checkins = vec![Vec::new(); users.len()];
    for (u, events) in d.checkins.iter().enumerate() {
        let Some(new_u) = user_map[u] else { continue };
        for e in events {
            if let Some(new_l) = poi_map[e.poi.index()] {
                checkins[new_u as usize].push(super::types::CheckinEvent {
                    user: UserId(new_u),
                    poi: PoiId(new_l),
                    timestamp: e.timestamp,
                });
            }
        }
    }

    let mut edges = Vec::new();
    for u in 0..d.n_users() {
        let Some(new_u) = user_map[u] else { continue };
        for &f in d.social.friends(UserId(u as u32)) {
            if f.index() > u {
                if let Some(new_f) = user_map[f.index()] {
                    edges.push((UserId(new_u), UserId(new_f)));
                }
            }
        }
    }
    let social = SocialGraph::from_edges(users.len(), edges);

    Dataset {
        users,
        pois,
        poi_table,
        checkins,
        social,
        categories: d.categories.clone(),
    }
}
