//! Core domain types: identifiers, registries, check-ins, the social graph,
//! and the user×POI frequency matrix.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Dense index of a user, assigned in first-seen order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct UserId(pub u32);

/// Dense index of a POI, assigned in first-seen order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PoiId(pub u32);

/// Dense index of a POI category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CategoryId(pub u32);

impl UserId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}
impl PoiId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}
impl CategoryId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Bidirectional map between opaque external identifiers and dense indices.
///
/// Indices are handed out in first-seen order, so a registry built from the
/// same input is always identical.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Registry {
    names: Vec<String>,
    #[serde(skip)]
    lookup: HashMap<String, u32>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Index of `name`, inserting it if unseen.
    pub fn intern(&mut self, name: &str) -> u32 {
        if let Some(&idx) = self.lookup.get(name) {
            return idx;
        }
        let idx = self.names.len() as u32;
        self.names.push(name.to_owned());
        self.lookup.insert(name.to_owned(), idx);
        idx
    }

    pub fn get(&self, name: &str) -> Option<u32> {
        self.lookup.get(name).copied()
    }

    pub fn name(&self, idx: u32) -> Option<&str> {
        self.names.get(idx as usize).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.names.iter().map(String::as_str)
    }

    /// Rebuild the name→index map after deserialization.
    pub fn rebuild_lookup(&mut self) {
        self.lookup = self
            .names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i as u32))
            .collect();
    }
}

/// One user→POI visit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckinEvent {
    pub user: UserId,
    pub poi: PoiId,
    /// Seconds since epoch.
    pub timestamp: i64,
}

/// A point of interest with coordinates and an optional category.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Poi {
    pub id: PoiId,
    pub lat: f64,
    pub lon: f64,
    pub category: Option<CategoryId>,
}

/// Undirected friendship graph over users.
///
/// Stored as sorted adjacency lists: symmetric, deduplicated, no self-loops.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SocialGraph {
    adjacency: Vec<Vec<UserId>>,
}

impl SocialGraph {
    pub fn with_users(n_users: usize) -> Self {
        Self {
            adjacency: vec![Vec::new(); n_users],
        }
    }

    /// Build from an edge list; reversed and duplicate edges collapse.
    pub fn from_edges(n_users: usize, edges: impl IntoIterator<Item = (UserId, UserId)>) -> Self {
        let mut g = Self::with_users(n_users);
        for (a, b) in edges {
            g.add_edge(a, b);
        }
        g.normalize();
        g
    }

    pub fn add_edge(&mut self, a: UserId, b: UserId) {
        if a == b {
            return;
        }
        self.adjacency[a.index()].push(b);
        self.adjacency[b.index()].push(a);
    }

    /// Sort and deduplicate adjacency lists.
    pub fn normalize(&mut self) {
        for list in &mut self.adjacency {
            list.sort_unstable();
            list.dedup();
        }
    }

    pub fn friends(&self, u: UserId) -> &[UserId] {
        &self.adjacency[u.index()]
    }

    pub fn n_users(&self) -> usize {
        self.adjacency.len()
    }

    /// Number of undirected edges.
    pub fn n_edges(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn has_edge(&self, a: UserId, b: UserId) -> bool {
        self.adjacency[a.index()].binary_search(&b).is_ok()
    }
}

/// A complete check-in dataset: registries, POIs, per-user event lists
/// (sorted by timestamp), the social graph, and optional categories.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Dataset {
    pub users: Registry,
    pub pois: Registry,
    /// POI records indexed by `PoiId`.
    pub poi_table: Vec<Poi>,
    /// Per-user check-ins, ascending by timestamp (ties keep input order).
    pub checkins: Vec<Vec<CheckinEvent>>,
    pub social: SocialGraph,
    /// Present iff the source data carries category information.
    pub categories: Option<Registry>,
}

impl Dataset {
    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    pub fn n_pois(&self) -> usize {
        self.pois.len()
    }

    pub fn n_checkins(&self) -> usize {
        self.checkins.iter().map(Vec::len).sum()
    }

    pub fn has_categories(&self) -> bool {
        self.categories.is_some()
    }

    pub fn poi(&self, id: PoiId) -> Result<&Poi> {
        self.poi_table
            .get(id.index())
            .ok_or(CoreError::UnknownPoiIndex(id.0))
    }

    pub fn user_checkins(&self, u: UserId) -> Result<&[CheckinEvent]> {
        self.checkins
            .get(u.index())
            .map(Vec::as_slice)
            .ok_or(CoreError::UnknownUser(u.0))
    }

    /// (lat, lon) lookup table, indexed by POI.
    pub fn coords(&self) -> Vec<(f64, f64)> {
        self.poi_table.iter().map(|p| (p.lat, p.lon)).collect()
    }

    /// Sort every user's check-ins by timestamp, keeping input order on ties.
    pub fn sort_checkins(&mut self) {
        for list in &mut self.checkins {
            list.sort_by_key(|e| e.timestamp);
        }
    }

    /// Build a bare dataset from per-user (poi index, timestamp) lists, with
    /// POIs placed on a line of coordinates and no social edges. Convenient
    /// for tests and small experiments.
    pub fn from_user_events(events: &[Vec<(u32, i64)>], n_pois: usize) -> Dataset {
        let mut users = Registry::new();
        let mut pois = Registry::new();
        let mut poi_table = Vec::with_capacity(n_pois);
        for l in 0..n_pois {
            let idx = pois.intern(&format!("p{l}"));
            poi_table.push(Poi {
                id: PoiId(idx),
                lat: 0.0,
                lon: 0.001 * l as f64,
                category: None,
            });
        }
        let checkins = events
            .iter()
            .enumerate()
            .map(|(u, list)| {
                users.intern(&format!("u{u}"));
                list.iter()
                    .map(|&(l, t)| {
                        assert!((l as usize) < n_pois, "poi index out of range");
                        CheckinEvent {
                            user: UserId(u as u32),
                            poi: PoiId(l),
                            timestamp: t,
                        }
                    })
                    .collect()
            })
            .collect();
        let mut d = Dataset {
            users,
            pois,
            poi_table,
            checkins,
            social: SocialGraph::with_users(events.len()),
            categories: None,
        };
        d.sort_checkins();
        d
    }
}

/// Sparse user×POI visit-count matrix.
///
/// Absent entries mean zero; stored counts are always ≥ 1. Rows iterate in
/// ascending POI order, so anything built from the matrix is deterministic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyMatrix {
    n_users: usize,
    n_pois: usize,
    rows: Vec<BTreeMap<u32, u32>>,
    total: u64,
}

impl FrequencyMatrix {
    pub fn new(n_users: usize, n_pois: usize) -> Self {
        Self {
            n_users,
            n_pois,
            rows: vec![BTreeMap::new(); n_users],
            total: 0,
        }
    }

    /// Count check-in events from per-user train lists.
    pub fn from_checkins(n_users: usize, n_pois: usize, checkins: &[Vec<CheckinEvent>]) -> Self {
        let mut m = Self::new(n_users, n_pois);
        for events in checkins {
            for e in events {
                m.increment(e.user, e.poi);
            }
        }
        m
    }

    pub fn increment(&mut self, u: UserId, l: PoiId) {
        *self.rows[u.index()].entry(l.0).or_insert(0) += 1;
        self.total += 1;
    }

    pub fn count(&self, u: UserId, l: PoiId) -> u32 {
        self.rows
            .get(u.index())
            .and_then(|r| r.get(&l.0).copied())
            .unwrap_or(0)
    }

    /// Nonzero entries of one user's row, ascending by POI index.
    pub fn user_row(&self, u: UserId) -> impl Iterator<Item = (PoiId, u32)> + '_ {
        self.rows[u.index()].iter().map(|(&l, &c)| (PoiId(l), c))
    }

    /// Number of distinct POIs the user visited.
    pub fn user_unique_pois(&self, u: UserId) -> usize {
        self.rows[u.index()].len()
    }

    /// Total check-ins by the user.
    pub fn user_total(&self, u: UserId) -> u64 {
        self.rows[u.index()].values().map(|&c| c as u64).sum()
    }

    pub fn visited(&self, u: UserId, l: PoiId) -> bool {
        self.rows[u.index()].contains_key(&l.0)
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn n_pois(&self) -> usize {
        self.n_pois
    }

    /// Sum of all counts == number of train events.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn n_nonzero(&self) -> usize {
        self.rows.iter().map(BTreeMap::len).sum()
    }
}

/// A labeled (user, POI) pair for training or testing the neural ranker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteractionSample {
    pub user: UserId,
    pub poi: PoiId,
    /// 1 = observed check-in, 0 = sampled negative.
    pub label: u8,
}
