//! TSV ingestion.
//!
//! File formats (UTF-8, LF, tab-separated):
//!
//! - `checkins.tsv`: `user_id<TAB>poi_id<TAB>unix_timestamp`
//! - `pois.tsv`: `poi_id<TAB>lat<TAB>lon[<TAB>category_id]`
//! - `social.tsv`: `user_a<TAB>user_b` (undirected; duplicates collapse)
//! - `categories.tsv` (optional): `category_id<TAB>name`

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use log::warn;

use super::types::{
    CategoryId, CheckinEvent, Dataset, Poi, PoiId, Registry, SocialGraph, UserId,
};
use crate::error::{CoreError, Result};

/// Side information gathered while loading.
#[derive(Debug, Clone, Default)]
pub struct LoadStats {
    pub checkin_lines: usize,
    pub social_edges_kept: usize,
    /// Social rows whose endpoints never check in; kept out of the graph.
    pub social_edges_dropped: usize,
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|source| CoreError::Io {
            path: path.display().to_string(),
            source,
        })
}

fn read_error(path: &Path, source: std::io::Error) -> CoreError {
    CoreError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn malformed(path: &Path, line: usize, msg: impl Into<String>) -> CoreError {
    CoreError::MalformedLine {
        path: path.display().to_string(),
        line,
        msg: msg.into(),
    }
}

/// Load a dataset from TSV files; categories are optional.
///
/// Users are registered in checkins.tsv first-seen order, POIs in pois.tsv
/// order. Every check-in must reference a known POI; social rows that
/// reference users absent from the check-in file are dropped (the social
/// dumps of public LBSN corpora cover users outside any city subset).
pub fn load_dataset(
    checkin_path: &Path,
    poi_path: &Path,
    social_path: &Path,
    category_path: Option<&Path>,
) -> Result<(Dataset, LoadStats)> {
    let mut stats = LoadStats::default();

    // Optional category registry; POIs may still introduce new category ids.
    let mut categories = Registry::new();
    if let Some(cat_path) = category_path {
        for (lineno, line) in open(cat_path)?.lines().enumerate() {
            let line = line.map_err(|e| read_error(cat_path, e))?;
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split('\t');
            let id = parts
                .next()
                .filter(|s| !s.is_empty())
                .ok_or_else(|| malformed(cat_path, lineno + 1, "missing category_id"))?;
            categories.intern(id);
        }
    }

    // POIs.
    let mut pois = Registry::new();
    let mut poi_table: Vec<Poi> = Vec::new();
    let mut any_with_cat = false;
    let mut any_without_cat = false;
    for (lineno, line) in open(poi_path)?.lines().enumerate() {
        let line = line.map_err(|e| read_error(poi_path, e))?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 3 {
            return Err(malformed(
                poi_path,
                lineno + 1,
                format!("expected poi_id<TAB>lat<TAB>lon, got {} fields", fields.len()),
            ));
        }
        let name = fields[0];
        let lat: f64 = fields[1]
            .parse()
            .map_err(|_| malformed(poi_path, lineno + 1, format!("bad latitude `{}`", fields[1])))?;
        let lon: f64 = fields[2].parse().map_err(|_| {
            malformed(poi_path, lineno + 1, format!("bad longitude `{}`", fields[2]))
        })?;
        if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lon) {
            return Err(CoreError::CoordinateOutOfRange {
                poi: name.to_owned(),
                lat,
                lon,
            });
        }
        let category = match fields.get(3).filter(|s| !s.is_empty()) {
            Some(cat) => {
                any_with_cat = true;
                Some(CategoryId(categories.intern(cat)))
            }
            None => {
                any_without_cat = true;
                None
            }
        };
        let idx = pois.intern(name);
        if idx as usize != poi_table.len() {
            return Err(malformed(
                poi_path,
                lineno + 1,
                format!("duplicate poi_id `{name}`"),
            ));
        }
        poi_table.push(Poi {
            id: PoiId(idx),
            lat,
            lon,
            category,
        });
    }
    // Category presence is a dataset-level flag: all POIs or none.
    if any_with_cat && any_without_cat {
        let offender = poi_table
            .iter()
            .find(|p| p.category.is_none())
            .expect("mixed flags imply at least one uncategorized POI");
        return Err(CoreError::MixedCategoryPresence {
            poi: pois.name(offender.id.0).unwrap_or_default().to_owned(),
            state: "lacks".into(),
        });
    }
    let categories = if any_with_cat { Some(categories) } else { None };

    // Check-ins.
    let mut users = Registry::new();
    let mut checkins: Vec<Vec<CheckinEvent>> = Vec::new();
    for (lineno, line) in open(checkin_path)?.lines().enumerate() {
        let line = line.map_err(|e| read_error(checkin_path, e))?;
        if line.is_empty() {
            continue;
        }
        stats.checkin_lines += 1;
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(malformed(
                checkin_path,
                lineno + 1,
                format!(
                    "expected user_id<TAB>poi_id<TAB>timestamp, got {} fields",
                    fields.len()
                ),
            ));
        }
        let poi_idx = pois.get(fields[1]).ok_or_else(|| CoreError::UnknownPoi {
            poi: fields[1].to_owned(),
            path: checkin_path.display().to_string(),
            line: lineno + 1,
        })?;
        let timestamp: i64 = fields[2].parse().map_err(|_| {
            malformed(
                checkin_path,
                lineno + 1,
                format!("bad timestamp `{}`", fields[2]),
            )
        })?;
        if timestamp < 0 {
            return Err(malformed(
                checkin_path,
                lineno + 1,
                format!("negative timestamp {timestamp}"),
            ));
        }
        let user_idx = users.intern(fields[0]);
        if user_idx as usize == checkins.len() {
            checkins.push(Vec::new());
        }
        checkins[user_idx as usize].push(CheckinEvent {
            user: UserId(user_idx),
            poi: PoiId(poi_idx),
            timestamp,
        });
    }

    // Social edges; endpoints must be check-in users.
    let mut edges: Vec<(UserId, UserId)> = Vec::new();
    for (lineno, line) in open(social_path)?.lines().enumerate() {
        let line = line.map_err(|e| read_error(social_path, e))?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 2 {
            return Err(malformed(
                social_path,
                lineno + 1,
                format!("expected user_a<TAB>user_b, got {} fields", fields.len()),
            ));
        }
        match (users.get(fields[0]), users.get(fields[1])) {
            (Some(a), Some(b)) => {
                edges.push((UserId(a), UserId(b)));
                stats.social_edges_kept += 1;
            }
            _ => stats.social_edges_dropped += 1,
        }
    }
    if stats.social_edges_dropped > 0 {
        warn!(
            "dropped {} social rows referencing users with no check-ins",
            stats.social_edges_dropped
        );
    }
    let social = SocialGraph::from_edges(users.len(), edges);

    let mut dataset = Dataset {
        users,
        pois,
        poi_table,
        checkins,
        social,
        categories,
    };
    dataset.sort_checkins();
    Ok((dataset, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_file(dir: &Path, name: &str, content: &str) -> std::path::PathBuf {
        let path = dir.join(name);
        let mut f = File::create(&path).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        path
    }

    #[test]
    fn three_line_file_two_pois() {
        let dir = tempfile::tempdir().unwrap();
        let checkins = write_file(
            dir.path(),
            "checkins.tsv",
            "alice\tp1\t100\nbob\tp2\t50\nalice\tp2\t70\n",
        );
        let pois = write_file(dir.path(), "pois.tsv", "p1\t1.0\t2.0\np2\t-3.0\t4.5\n");
        let social = write_file(dir.path(), "social.tsv", "");
        let (d, stats) = load_dataset(&checkins, &pois, &social, None).unwrap();
        assert_eq!(d.n_users(), 2);
        assert_eq!(d.n_checkins(), 3);
        assert_eq!(stats.checkin_lines, 3);
        assert!(!d.has_categories());
        // alice's check-ins re-sorted by timestamp
        let alice = d.user_checkins(UserId(0)).unwrap();
        assert_eq!(alice[0].timestamp, 70);
        assert_eq!(alice[1].timestamp, 100);
    }

    #[test]
    fn unknown_poi_is_named_in_the_error() {
        let dir = tempfile::tempdir().unwrap();
        let checkins = write_file(dir.path(), "checkins.tsv", "alice\tmissing\t100\n");
        let pois = write_file(dir.path(), "pois.tsv", "p1\t1.0\t2.0\n");
        let social = write_file(dir.path(), "social.tsv", "");
        let err = load_dataset(&checkins, &pois, &social, None).unwrap_err();
        match err {
            CoreError::UnknownPoi { poi, line, .. } => {
                assert_eq!(poi, "missing");
                assert_eq!(line, 1);
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn gowalla_style_files_have_no_categories() {
        let dir = tempfile::tempdir().unwrap();
        let checkins = write_file(dir.path(), "checkins.tsv", "u\tp1\t1\n");
        let pois = write_file(dir.path(), "pois.tsv", "p1\t0.0\t0.0\n");
        let social = write_file(dir.path(), "social.tsv", "");
        let (d, _) = load_dataset(&checkins, &pois, &social, None).unwrap();
        assert!(d.categories.is_none());
    }

    #[test]
    fn coordinate_out_of_range_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let checkins = write_file(dir.path(), "checkins.tsv", "");
        let pois = write_file(dir.path(), "pois.tsv", "p1\t95.0\t0.0\n");
        let social = write_file(dir.path(), "social.tsv", "");
        let err = load_dataset(&checkins, &pois, &social, None).unwrap_err();
        assert!(matches!(err, CoreError::CoordinateOutOfRange { .. }));
    }

    #[test]
    fn mixed_category_presence_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let checkins = write_file(dir.path(), "checkins.tsv", "");
        let pois = write_file(dir.path(), "pois.tsv", "p1\t0.0\t0.0\tfood\np2\t0.0\t1.0\n");
        let social = write_file(dir.path(), "social.tsv", "");
        let err = load_dataset(&checkins, &pois, &social, None).unwrap_err();
        assert!(matches!(err, CoreError::MixedCategoryPresence { .. }));
    }

    #[test]
    fn social_rows_deduplicate_and_drop_unknowns() {
        let dir = tempfile::tempdir().unwrap();
        let checkins = write_file(dir.path(), "checkins.tsv", "a\tp1\t1\nb\tp1\t2\n");
        let pois = write_file(dir.path(), "pois.tsv", "p1\t0.0\t0.0\n");
        let social = write_file(dir.path(), "social.tsv", "a\tb\nb\ta\na\tghost\n");
        let (d, stats) = load_dataset(&checkins, &pois, &social, None).unwrap();
        assert_eq!(d.social.n_edges(), 1);
        assert_eq!(stats.social_edges_dropped, 1);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let checkins = write_file(dir.path(), "checkins.tsv", "a\tp1\t1\nbroken line\n");
        let pois = write_file(dir.path(), "pois.tsv", "p1\t0.0\t0.0\n");
        let social = write_file(dir.path(), "social.tsv", "");
        let err = load_dataset(&checkins, &pois, &social, None).unwrap_err();
        match err {
            CoreError::MalformedLine { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other}"),
        }
    }
}
