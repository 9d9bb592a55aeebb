//! Categorical context: cumulative power law over users' categorical
//! check-in frequency.
//!
//! g(u, l) = Σ_c B[u][c] · H[c][l], where B counts the user's check-ins in
//! each category and H is the all-user check-in frequency of POI l within
//! its category. Each POI belongs to exactly one category, so only that
//! category's term survives.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use super::power_law::{power_law_exponent, power_law_score};
use super::{Context, ContextScorer};
use crate::data::{Dataset, FrequencyMatrix, PoiId, UserId};
use crate::error::{CoreError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoricalModel {
    pub gamma: f64,
    pub degenerate: bool,
    /// B[u]: category → user's check-in count in that category.
    user_category_counts: Vec<BTreeMap<u32, u32>>,
    /// Category of each POI.
    poi_category: Vec<u32>,
    /// H restricted to the POI's own category: total all-user check-ins.
    poi_total_checkins: Vec<u32>,
    n_categories: usize,
}

/// Fit from the train matrix and the dataset's POI categories.
/// Errors when the dataset carries no category information.
pub fn fit_categorical(matrix: &FrequencyMatrix, dataset: &Dataset) -> Result<CategoricalModel> {
    if !dataset.has_categories() {
        return Err(CoreError::CategoricalUnavailable);
    }
    let n_users = matrix.n_users();
    let n_pois = matrix.n_pois();
    let poi_category: Vec<u32> = dataset
        .poi_table
        .iter()
        .map(|p| p.category.expect("dataset-level flag guarantees presence").0)
        .collect();
    let n_categories = dataset.categories.as_ref().map(|r| r.len()).unwrap_or(0);

    let mut user_category_counts: Vec<BTreeMap<u32, u32>> = vec![BTreeMap::new(); n_users];
    let mut poi_total_checkins = vec![0u32; n_pois];
    for (u, counts) in user_category_counts.iter_mut().enumerate() {
        for (l, c) in matrix.user_row(UserId(u as u32)) {
            *counts.entry(poi_category[l.index()]).or_insert(0) += c;
            poi_total_checkins[l.index()] += c;
        }
    }

    // γ over all (user, POI) pairs; zero terms drop out of the sum, so only
    // pairs where the user has activity in the POI's category contribute.
    let mut category_pois: Vec<Vec<u32>> = vec![Vec::new(); n_categories];
    for l in 0..n_pois {
        if poi_total_checkins[l] > 0 {
            category_pois[poi_category[l] as usize].push(l as u32);
        }
    }
    let popularity_terms = (0..n_users).flat_map(|u| {
        let counts = &user_category_counts[u];
        let category_pois = &category_pois;
        let poi_totals = &poi_total_checkins;
        counts.iter().flat_map(move |(&c, &b)| {
            category_pois[c as usize]
                .iter()
                .map(move |&l| b as f64 * poi_totals[l as usize] as f64)
        })
    });
    let n_pairs = (n_users as u64) * (n_pois as u64);
    let gamma = power_law_exponent(popularity_terms, n_pairs);

    Ok(CategoricalModel {
        gamma: gamma.unwrap_or(f64::NAN),
        degenerate: gamma.is_none(),
        user_category_counts,
        poi_category,
        poi_total_checkins,
        n_categories,
    })
}

impl CategoricalModel {
    /// Categorical popularity g(u, l).
    pub fn popularity(&self, user: UserId, poi: PoiId) -> Result<f64> {
        let counts = self
            .user_category_counts
            .get(user.index())
            .ok_or(CoreError::UnknownUser(user.0))?;
        let cat = *self
            .poi_category
            .get(poi.index())
            .ok_or(CoreError::UnknownPoiIndex(poi.0))?;
        let b = counts.get(&cat).copied().unwrap_or(0) as f64;
        Ok(b * self.poi_total_checkins[poi.index()] as f64)
    }

    pub fn n_categories(&self) -> usize {
        self.n_categories
    }
}

impl ContextScorer for CategoricalModel {
    fn context(&self) -> Context {
        Context::Categorical
    }

    fn score(&self, user: UserId, poi: PoiId) -> Result<f64> {
        let g = self.popularity(user, poi)?;
        if self.degenerate {
            return Ok(0.0);
        }
        Ok(power_law_score(g, self.gamma))
    }
}
