//! User-behavior segmentation: geographic range, temporal check-in density,
//! exploration factor, their correlations, and bucketed metric reports.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::data::{CheckinEvent, UserId};
use crate::error::{CoreError, Result};
use crate::geo::haversine_km;

/// Which behavior aspect a report segments on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BehaviorAspect {
    /// Mean haversine distance between consecutive check-ins, km.
    Geo,
    /// Mean gap between consecutive check-ins, hours.
    Temporal,
    /// Unique POIs over total check-ins.
    Exploration,
}

impl BehaviorAspect {
    pub fn name(self) -> &'static str {
        match self {
            BehaviorAspect::Geo => "geo",
            BehaviorAspect::Temporal => "temporal",
            BehaviorAspect::Exploration => "exploration",
        }
    }
}

/// Per-user behavior statistics over train check-ins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviorProfile {
    pub user: UserId,
    /// Defined only for users with ≥ 2 check-ins.
    pub mean_consecutive_distance_km: Option<f64>,
    pub mean_consecutive_gap_hours: Option<f64>,
    pub exploration_factor: f64,
}

impl BehaviorProfile {
    pub fn aspect(&self, aspect: BehaviorAspect) -> Option<f64> {
        match aspect {
            BehaviorAspect::Geo => self.mean_consecutive_distance_km,
            BehaviorAspect::Temporal => self.mean_consecutive_gap_hours,
            BehaviorAspect::Exploration => Some(self.exploration_factor),
        }
    }
}

/// Unique POIs divided by check-ins; 1 means the user never revisits.
pub fn exploration_factor(checkins: &[CheckinEvent]) -> Result<f64> {
    if checkins.is_empty() {
        return Err(CoreError::NoCheckins);
    }
    let mut pois: Vec<u32> = checkins.iter().map(|e| e.poi.0).collect();
    pois.sort_unstable();
    pois.dedup();
    Ok(pois.len() as f64 / checkins.len() as f64)
}

/// Mean consecutive haversine distance (km) and time gap (hours); `None`
/// for users with fewer than 2 check-ins.
pub fn consecutive_behavior(
    checkins: &[CheckinEvent],
    coords: &[(f64, f64)],
) -> Option<(f64, f64)> {
    if checkins.len() < 2 {
        return None;
    }
    let n_pairs = (checkins.len() - 1) as f64;
    let mut dist = 0.0;
    let mut gap = 0.0;
    for pair in checkins.windows(2) {
        let (lat1, lon1) = coords[pair[0].poi.index()];
        let (lat2, lon2) = coords[pair[1].poi.index()];
        dist += haversine_km(lat1, lon1, lat2, lon2);
        gap += (pair[1].timestamp - pair[0].timestamp) as f64 / 3600.0;
    }
    Some((dist / n_pairs, gap / n_pairs))
}

/// Profiles for every user with train check-ins.
pub fn behavior_profiles(train: &[Vec<CheckinEvent>], coords: &[(f64, f64)]) -> Vec<BehaviorProfile> {
    train
        .iter()
        .enumerate()
        .filter(|(_, events)| !events.is_empty())
        .map(|(u, events)| {
            let consecutive = consecutive_behavior(events, coords);
            BehaviorProfile {
                user: UserId(u as u32),
                mean_consecutive_distance_km: consecutive.map(|c| c.0),
                mean_consecutive_gap_hours: consecutive.map(|c| c.1),
                exploration_factor: exploration_factor(events).expect("nonempty"),
            }
        })
        .collect()
}

/// Pearson product-moment correlation; errors when either vector is
/// constant (undefined).
pub fn pearson_r(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(CoreError::InvalidConfig(format!(
            "correlation inputs differ in length: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(CoreError::TooFew {
            needed: 2,
            got: x.len(),
            what: "observations".into(),
        });
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (xi, yi) in x.iter().zip(y) {
        sxy += (xi - mx) * (yi - my);
        sxx += (xi - mx).powi(2);
        syy += (yi - my).powi(2);
    }
    if sxx == 0.0 {
        return Err(CoreError::ConstantVector("first".into()));
    }
    if syy == 0.0 {
        return Err(CoreError::ConstantVector("second".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Percentile by linear interpolation of the empirical CDF (h = p·n over
/// 1-based sorted ranks), so uniform values 1..100 put the 20th percentile
/// at exactly 20.
pub fn percentile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty());
    assert!((0.0..=1.0).contains(&p));
    let n = sorted.len();
    let h = p * n as f64;
    if h <= 1.0 {
        return sorted[0];
    }
    if h >= n as f64 {
        return sorted[n - 1];
    }
    let i = h.floor() as usize; // 1-based index of the lower rank
    let frac = h - i as f64;
    sorted[i - 1] + frac * (sorted[i] - sorted[i - 1])
}

/// Metric means per quintile bucket of a behavior aspect.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BucketedReport {
    pub aspect: BehaviorAspect,
    /// Upper bucket boundaries at the 20/40/60/80/100th percentiles.
    pub boundaries: [f64; 5],
    pub model_labels: Vec<String>,
    /// `bucket_means[model][bucket]`; NaN-free, empty buckets yield `None`.
    pub bucket_means: Vec<Vec<Option<f64>>>,
    pub bucket_sizes: [usize; 5],
    /// All aspect values identical: everything lands in one bucket.
    pub degenerate: bool,
}

/// Assign users to quintile buckets of `aspect_values` and average each
/// model's per-user metric inside each bucket.
///
/// `per_model_values[m][i]` must align with `aspect_values[i]`.
pub fn bucketize_and_aggregate(
    aspect: BehaviorAspect,
    aspect_values: &[f64],
    model_labels: &[String],
    per_model_values: &[Vec<f64>],
    ) -> Result<BucketedReport> {
    let n = aspect_values.len();
    if n < 5 {
        return Err(CoreError::TooFew {
            needed: 5,
            got: n,
            what: "users with a defined aspect value".into(),
        });
    }
    for values in per_model_values {
        if values.len() != n {
            return Err(CoreError::InvalidConfig(
                "metric vectors must align with aspect values".into(),
            ));
        }
    }
    let mut sorted = aspect_values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let boundaries = [
        percentile(&sorted, 0.2),
        percentile(&sorted, 0.4),
        percentile(&sorted, 0.6),
        percentile(&sorted, 0.8),
        percentile(&sorted, 1.0),
    ];
    let degenerate = sorted[0] == sorted[n - 1];
    if degenerate {
        warn!("all {} aspect values identical: single effective bucket", aspect.name());
    }

    let bucket_of = |v: f64| -> usize {
        boundaries
            .iter()
            .position(|&b| v <= b)
            .unwrap_or(4)
    };
    let mut bucket_sizes = [0usize; 5];
    let assignments: Vec<usize> = aspect_values
        .iter()
        .map(|&v| {
            let b = bucket_of(v);
            bucket_sizes[b] += 1;
            b
        })
        .collect();

    let bucket_means = per_model_values
        .iter()
        .map(|values| {
            let mut sums = [0.0; 5];
            for (&v, &b) in values.iter().zip(&assignments) {
                sums[b] += v;
            }
            (0..5)
                .map(|b| (bucket_sizes[b] > 0).then(|| sums[b] / bucket_sizes[b] as f64))
                .collect()
        })
        .collect();

    Ok(BucketedReport {
        aspect,
        boundaries,
        model_labels: model_labels.to_vec(),
        bucket_means,
        bucket_sizes,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::PoiId;

    fn events(pois_times: &[(u32, i64)]) -> Vec<CheckinEvent> {
        pois_times
            .iter()
            .map(|&(l, t)| CheckinEvent {
                user: UserId(0),
                poi: PoiId(l),
                timestamp: t,
            })
            .collect()
    }

    #[test]
    fn exploration_factor_cases() {
        let all_unique = events(&[(0, 1), (1, 2), (2, 3)]);
        assert_eq!(exploration_factor(&all_unique).unwrap(), 1.0);

        // 10 check-ins over 4 POIs → 0.4
        let repeats = events(&[
            (0, 1), (1, 2), (2, 3), (3, 4), (0, 5),
            (1, 6), (2, 7), (3, 8), (0, 9), (1, 10),
        ]);
        assert_eq!(exploration_factor(&repeats).unwrap(), 0.4);

        assert!(matches!(exploration_factor(&[]), Err(CoreError::NoCheckins)));
    }

    #[test]
    fn consecutive_behavior_cases() {
        let coords = [(0.0, 0.0), (0.0, 1.0)];
        // All at one POI: distance 0; 24 h gaps.
        let same = events(&[(0, 0), (0, 86_400), (0, 172_800)]);
        let (d, g) = consecutive_behavior(&same, &coords).unwrap();
        assert_eq!(d, 0.0);
        assert_eq!(g, 24.0);

        // 3-event hand-built sequence: hops 0→1→0 of ~111.195 km each,
        // with gaps of 2 h and 4 h.
        let seq = events(&[(0, 0), (1, 7_200), (0, 21_600)]);
        let (d, g) = consecutive_behavior(&seq, &coords).unwrap();
        let hop = haversine_km(0.0, 0.0, 0.0, 1.0);
        assert!((d - hop).abs() < 1e-9);
        assert!((g - 3.0).abs() < 1e-9);

        assert!(consecutive_behavior(&events(&[(0, 0)]), &coords).is_none());
    }

    #[test]
    fn pearson_boundary_cases() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson_r(&x, &x).unwrap() - 1.0).abs() < 1e-15);
        assert!((pearson_r(&x, &y).unwrap() + 1.0).abs() < 1e-15);
        assert!(matches!(
            pearson_r(&x, &[2.0, 2.0, 2.0, 2.0]),
            Err(CoreError::ConstantVector(_))
        ));
    }

    #[test]
    fn pearson_invariant_under_positive_affine_transforms() {
        let x = [0.3, 1.7, 0.9, 2.2, 1.1];
        let y = [5.0, 2.0, 4.0, 1.0, 3.5];
        let base = pearson_r(&x, &y).unwrap();
        let scaled: Vec<f64> = x.iter().map(|v| 3.0 * v + 7.0).collect();
        let transformed = pearson_r(&scaled, &y).unwrap();
        assert!((base - transformed).abs() < 1e-12);
    }

    #[test]
    fn uniform_values_give_exact_quintile_boundaries() {
        let values: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        let labels = vec!["m".to_string()];
        let metric = vec![vec![0.5; 100]];
        let report =
            bucketize_and_aggregate(BehaviorAspect::Exploration, &values, &labels, &metric)
                .unwrap();
        assert_eq!(report.boundaries, [20.0, 40.0, 60.0, 80.0, 100.0]);
        assert_eq!(report.bucket_sizes, [20, 20, 20, 20, 20]);
    }

    #[test]
    fn identical_aspect_values_flag_degenerate() {
        let values = vec![3.0; 8];
        let labels = vec!["m".to_string()];
        let metric = vec![vec![1.0; 8]];
        let report =
            bucketize_and_aggregate(BehaviorAspect::Geo, &values, &labels, &metric).unwrap();
        assert!(report.degenerate);
        assert_eq!(report.bucket_sizes[0], 8);
    }

    #[test]
    fn bucket_means_recombine_to_global_mean() {
        let values: Vec<f64> = (0..37).map(|i| (i as f64 * 1.37).sin() + 2.0).collect();
        let metric: Vec<f64> = (0..37).map(|i| (i as f64 * 0.61).cos().abs()).collect();
        let labels = vec!["m".to_string()];
        let report =
            bucketize_and_aggregate(BehaviorAspect::Temporal, &values, &labels, std::slice::from_ref(&metric))
                .unwrap();
        let global = metric.iter().sum::<f64>() / metric.len() as f64;
        let recombined: f64 = report.bucket_means[0]
            .iter()
            .zip(&report.bucket_sizes)
            .filter_map(|(m, &s)| m.map(|m| m * s as f64))
            .sum::<f64>()
            / metric.len() as f64;
        assert!((global - recombined).abs() < 1e-12);
    }

    #[test]
    fn planted_difficulty_orders_the_buckets() {
        // Short-range users are planted easier: metric falls with the
        // aspect, plus deterministic noise well under the separation.
        let aspect: Vec<f64> = (0..60).map(|i| 1.0 + i as f64 * 0.5).collect();
        let metric: Vec<f64> = aspect
            .iter()
            .enumerate()
            .map(|(i, &a)| 1.0 / (1.0 + 0.1 * a) + 0.01 * (i as f64).sin())
            .collect();
        let labels = vec!["m".to_string()];
        let report =
            bucketize_and_aggregate(BehaviorAspect::Geo, &aspect, &labels, &[metric]).unwrap();
        let first = report.bucket_means[0][0].unwrap();
        let last = report.bucket_means[0][4].unwrap();
        assert!(first > last, "bucket 1 mean {first} should beat bucket 5 mean {last}");
    }

    #[test]
    fn too_few_users_error() {
        let labels = vec!["m".to_string()];
        let err = bucketize_and_aggregate(
            BehaviorAspect::Geo,
            &[1.0, 2.0],
            &labels,
            &[vec![0.1, 0.2]],
        );
        assert!(err.is_err());
    }
}
