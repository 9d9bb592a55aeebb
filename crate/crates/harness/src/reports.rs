//! Report emission: results.csv, per_user.csv, significance.csv,
//! cd_report.txt (+ SVG), bucketed_report.csv (+ SVG), behavior profiles,
//! the run manifest, and index_map.tsv.
//!
//! Everything except manifest.json is a pure function of the run output, so
//! re-running with the same config and seed reproduces the files byte for
//! byte. The manifest records wall times and is the one exception.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use ctxrec_core::data::Dataset;

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::labels::ModelSpec;
use crate::pipeline::RunOutput;
use crate::svg;

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| HarnessError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| HarnessError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    f.write_all(bytes).map_err(|e| HarnessError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let f = fs::File::create(path).map_err(|e| HarnessError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    Ok(csv::Writer::from_writer(f))
}

fn csv_error(path: &Path, e: csv::Error) -> HarnessError {
    HarnessError::Runtime(format!("writing {}: {e}", path.display()))
}

/// Render a float with full round-trip precision.
fn fmt_f64(v: f64) -> String {
    let mut buf = ryu_like(v);
    if !buf.contains('.') && !buf.contains('e') && !buf.contains("inf") && !buf.contains("NaN") {
        buf.push_str(".0");
    }
    buf
}

fn ryu_like(v: f64) -> String {
    format!("{v}")
}

/// Sample skewness, excess kurtosis, and mean; zeros when undefined.
fn moments(values: &[f64]) -> (f64, f64, f64) {
    let n = values.len() as f64;
    if values.len() < 3 {
        return (0.0, 0.0, values.iter().sum::<f64>() / n.max(1.0));
    }
    let mean = values.iter().sum::<f64>() / n;
    let m2 = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    if m2 == 0.0 {
        return (0.0, 0.0, mean);
    }
    let m3 = values.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / n;
    let m4 = values.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n;
    (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0, mean)
}

/// The manifest document written next to the reports.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub config: ExperimentConfig,
    pub config_sha256: String,
    pub code_version: String,
    pub seeds: Vec<u64>,
    /// Per master seed: the fixed fan-out to component child seeds.
    pub component_seeds: Vec<std::collections::BTreeMap<String, u64>>,
    pub total_seconds: f64,
    pub stage_seconds_per_seed: Vec<std::collections::BTreeMap<String, f64>>,
}

/// The component labels a master seed fans out to.
pub const SEED_COMPONENTS: [&str; 5] = ["synth", "pfm", "ncf", "train-negatives", "test-negatives"];

pub fn config_sha256(cfg: &ExperimentConfig) -> Result<String> {
    let canonical = serde_json::to_string(cfg).map_err(|e| HarnessError::Config(e.to_string()))?;
    let mut hasher = Sha256::new();
    hasher.update(canonical.as_bytes());
    Ok(format!("{:x}", hasher.finalize()))
}

/// Write the complete report set; returns the emitted paths.
pub fn emit_reports(cfg: &ExperimentConfig, run: &RunOutput, out_dir: &Path) -> Result<Vec<PathBuf>> {
    if run.seeds.is_empty() {
        return Err(HarnessError::Runtime("empty results: nothing to report".into()));
    }
    create_dir(out_dir)?;
    let mut emitted = Vec::new();

    // results.csv — pooled across seeds.
    let path = out_dir.join("results.csv");
    {
        let mut w = csv_writer(&path)?;
        w.write_record(["model", "contexts", "metric", "K", "mean", "stderr", "n_users"])
            .map_err(|e| csv_error(&path, e))?;
        for label in &run.model_labels {
            let spec = ModelSpec::parse(label).expect("labels are canonical");
            for &(metric, k) in &run.metrics_k {
                let values = run.pooled_values(label, metric, k);
                let result = ctxrec_core::eval::MetricResult::from_values(
                    label,
                    metric,
                    k,
                    values,
                );
                w.write_record([
                    spec.family_name().to_string(),
                    spec.context_letters(),
                    metric.name().to_string(),
                    k.to_string(),
                    fmt_f64(result.mean),
                    fmt_f64(result.stderr()),
                    result.per_user.len().to_string(),
                ])
                .map_err(|e| csv_error(&path, e))?;
            }
        }
        w.flush().map_err(|e| HarnessError::Runtime(e.to_string()))?;
    }
    emitted.push(path);

    // per_user.csv — every per-user metric value, for significance replays.
    let path = out_dir.join("per_user.csv");
    {
        let mut w = csv_writer(&path)?;
        w.write_record(["seed", "model", "user_id", "metric", "K", "value"])
            .map_err(|e| csv_error(&path, e))?;
        for seed_out in &run.seeds {
            for result in &seed_out.metric_results {
                for (user, value) in seed_out.evaluated_users.iter().zip(&result.per_user) {
                    w.write_record([
                        seed_out.seed.to_string(),
                        result.model.clone(),
                        user.clone(),
                        result.metric.name().to_string(),
                        result.k.to_string(),
                        fmt_f64(*value),
                    ])
                    .map_err(|e| csv_error(&path, e))?;
                }
            }
        }
        w.flush().map_err(|e| HarnessError::Runtime(e.to_string()))?;
    }
    emitted.push(path);

    // significance.csv — pairwise paired t-tests per seed and cell.
    let path = out_dir.join("significance.csv");
    {
        let mut w = csv_writer(&path)?;
        w.write_record([
            "seed", "metric", "K", "model_a", "model_b", "t_statistic", "p_value", "significant",
            "degenerate",
        ])
        .map_err(|e| csv_error(&path, e))?;
        for seed_out in &run.seeds {
            for row in &seed_out.significance {
                w.write_record([
                    row.seed.to_string(),
                    row.metric.name().to_string(),
                    row.k.to_string(),
                    row.model_a.clone(),
                    row.model_b.clone(),
                    fmt_f64(row.t_statistic),
                    fmt_f64(row.p_value),
                    row.significant.to_string(),
                    row.degenerate.to_string(),
                ])
                .map_err(|e| csv_error(&path, e))?;
            }
        }
        w.flush().map_err(|e| HarnessError::Runtime(e.to_string()))?;
    }
    emitted.push(path);

    // cd_report.txt — average ranks, cliques, and the pairwise table.
    let path = out_dir.join("cd_report.txt");
    let n_pooled = run
        .pooled_values(&run.model_labels[0], cfg.cd.metric, cfg.cd.k)
        .len();
    write_file(
        &path,
        render_cd_report(&run.cd, cfg.cd.metric.name(), cfg.cd.k, n_pooled).as_bytes(),
    )?;
    emitted.push(path);

    let path = out_dir.join("cd_diagram.svg");
    write_file(&path, svg::cd_diagram(&run.cd).as_bytes())?;
    emitted.push(path);

    // bucketed_report.csv + per-aspect SVG charts.
    let path = out_dir.join("bucketed_report.csv");
    {
        let mut w = csv_writer(&path)?;
        w.write_record([
            "aspect", "bucket", "upper_boundary", "bucket_size", "model", "mean_metric",
        ])
        .map_err(|e| csv_error(&path, e))?;
        for report in &run.behavior_reports {
            for (mi, label) in report.model_labels.iter().enumerate() {
                for b in 0..5 {
                    let mean = report.bucket_means[mi][b]
                        .map(fmt_f64)
                        .unwrap_or_else(|| "".to_string());
                    w.write_record([
                        report.aspect.name().to_string(),
                        (b + 1).to_string(),
                        fmt_f64(report.boundaries[b]),
                        report.bucket_sizes[b].to_string(),
                        label.clone(),
                        mean,
                    ])
                    .map_err(|e| csv_error(&path, e))?;
                }
            }
        }
        w.flush().map_err(|e| HarnessError::Runtime(e.to_string()))?;
    }
    emitted.push(path);

    for report in &run.behavior_reports {
        let path = out_dir.join(format!("behavior_{}.svg", report.aspect.name()));
        write_file(&path, svg::bucketed_chart(report).as_bytes())?;
        emitted.push(path);
    }

    // training_trace.csv — per-iteration objective (PFM) and per-epoch
    // loss (NCF), when those models trained.
    let has_traces = run
        .seeds
        .iter()
        .any(|s| s.pfm_objective_trace.is_some() || s.ncf_loss_trace.is_some());
    if has_traces {
        let path = out_dir.join("training_trace.csv");
        let mut w = csv_writer(&path)?;
        w.write_record(["seed", "model", "iteration", "value"])
            .map_err(|e| csv_error(&path, e))?;
        for seed_out in &run.seeds {
            if let Some(trace) = &seed_out.pfm_objective_trace {
                for (i, v) in trace.iter().enumerate() {
                    w.write_record([
                        seed_out.seed.to_string(),
                        "pfm".to_string(),
                        i.to_string(),
                        fmt_f64(*v),
                    ])
                    .map_err(|e| csv_error(&path, e))?;
                }
            }
            if let Some(trace) = &seed_out.ncf_loss_trace {
                for (i, v) in trace.iter().enumerate() {
                    w.write_record([
                        seed_out.seed.to_string(),
                        "ncf".to_string(),
                        i.to_string(),
                        fmt_f64(*v),
                    ])
                    .map_err(|e| csv_error(&path, e))?;
                }
            }
        }
        w.flush().map_err(|e| HarnessError::Runtime(e.to_string()))?;
        emitted.push(path);
    }

    // normality.csv — moment-based normality diagnostics per (model,
    // metric, K) over the pooled per-user values: the t-tests are reported
    // regardless, these let a reader judge the normality premise.
    {
        let path = out_dir.join("normality.csv");
        let mut w = csv_writer(&path)?;
        w.write_record(["model", "metric", "K", "n", "mean", "skewness", "excess_kurtosis"])
            .map_err(|e| csv_error(&path, e))?;
        for label in &run.model_labels {
            for &(metric, k) in &run.metrics_k {
                let values = run.pooled_values(label, metric, k);
                let (skew, kurt, mean) = moments(&values);
                w.write_record([
                    label.clone(),
                    metric.name().to_string(),
                    k.to_string(),
                    values.len().to_string(),
                    fmt_f64(mean),
                    fmt_f64(skew),
                    fmt_f64(kurt),
                ])
                .map_err(|e| csv_error(&path, e))?;
            }
        }
        w.flush().map_err(|e| HarnessError::Runtime(e.to_string()))?;
        emitted.push(path);
    }

    // behavior_profiles.csv.
    let path = out_dir.join("behavior_profiles.csv");
    {
        let mut w = csv_writer(&path)?;
        w.write_record([
            "seed",
            "user_id",
            "mean_consecutive_distance_km",
            "mean_consecutive_gap_hours",
            "exploration_factor",
        ])
        .map_err(|e| csv_error(&path, e))?;
        for seed_out in &run.seeds {
            for (profile, user) in seed_out.profiles.iter().zip(&seed_out.evaluated_users) {
                w.write_record([
                    seed_out.seed.to_string(),
                    user.clone(),
                    profile
                        .mean_consecutive_distance_km
                        .map(fmt_f64)
                        .unwrap_or_default(),
                    profile
                        .mean_consecutive_gap_hours
                        .map(fmt_f64)
                        .unwrap_or_default(),
                    fmt_f64(profile.exploration_factor),
                ])
                .map_err(|e| csv_error(&path, e))?;
            }
        }
        w.flush().map_err(|e| HarnessError::Runtime(e.to_string()))?;
    }
    emitted.push(path);

    // manifest.json — config echo, hash, version, seed fan-out, wall times.
    let manifest = Manifest {
        config: cfg.clone(),
        config_sha256: config_sha256(cfg)?,
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        seeds: cfg.seeds.clone(),
        component_seeds: cfg
            .seeds
            .iter()
            .map(|&seed| {
                SEED_COMPONENTS
                    .iter()
                    .map(|&label| (label.to_string(), ctxrec_core::rng::child_seed(seed, label)))
                    .collect()
            })
            .collect(),
        total_seconds: run.total_seconds,
        stage_seconds_per_seed: run.seeds.iter().map(|s| s.stage_seconds.clone()).collect(),
    };
    let path = out_dir.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| HarnessError::Runtime(e.to_string()))?;
    write_file(&path, json.as_bytes())?;
    emitted.push(path);

    Ok(emitted)
}

/// Recompute the derived reports (significance.csv, cd_report.txt,
/// cd_diagram.svg) from a finished run directory's per_user.csv and
/// manifest.json.
pub fn replay_reports(run_dir: &Path) -> Result<Vec<PathBuf>> {
    use ctxrec_core::eval::{paired_ttest, wilcoxon_holm_cd, MetricKind};

    let manifest_path = run_dir.join("manifest.json");
    let manifest_text = fs::read_to_string(&manifest_path).map_err(|e| HarnessError::Io {
        path: manifest_path.display().to_string(),
        source: e,
    })?;
    let manifest: Manifest = serde_json::from_str(&manifest_text)
        .map_err(|e| HarnessError::Runtime(format!("manifest.json: {e}")))?;
    let cfg = &manifest.config;
    let labels: Vec<String> = cfg
        .validate()?
        .iter()
        .map(|s| s.canonical_label())
        .collect();

    // per_user.csv → per (seed, model, metric, K) value vectors in file
    // order; the emitter wrote users in the same order for every model.
    let per_user_path = run_dir.join("per_user.csv");
    let mut reader = csv::Reader::from_path(&per_user_path)
        .map_err(|e| HarnessError::Runtime(format!("{}: {e}", per_user_path.display())))?;
    type Key = (u64, String, String, usize);
    let mut series: std::collections::BTreeMap<Key, Vec<f64>> = std::collections::BTreeMap::new();
    for record in reader.records() {
        let record =
            record.map_err(|e| HarnessError::Runtime(format!("{}: {e}", per_user_path.display())))?;
        let seed: u64 = record[0].parse().map_err(|_| bad_field(&per_user_path, "seed"))?;
        let model = record[1].to_string();
        let metric = record[3].to_string();
        let k: usize = record[4].parse().map_err(|_| bad_field(&per_user_path, "K"))?;
        let value: f64 = record[5].parse().map_err(|_| bad_field(&per_user_path, "value"))?;
        series.entry((seed, model, metric, k)).or_default().push(value);
    }

    // Recompute pairwise t-tests per seed and cell.
    let mut significance: Vec<crate::pipeline::SignificanceRow> = Vec::new();
    for &seed in &manifest.seeds {
        for &k in &cfg.metrics_k {
            for metric in MetricKind::ALL {
                for a in 0..labels.len() {
                    for b in (a + 1)..labels.len() {
                        let key_a = (seed, labels[a].clone(), metric.name().to_string(), k);
                        let key_b = (seed, labels[b].clone(), metric.name().to_string(), k);
                        let (Some(va), Some(vb)) = (series.get(&key_a), series.get(&key_b)) else {
                            continue;
                        };
                        if va.len() != vb.len() || va.len() < 2 {
                            continue;
                        }
                        let t = paired_ttest(va, vb)?;
                        significance.push(crate::pipeline::SignificanceRow {
                            seed,
                            metric,
                            k,
                            model_a: labels[a].clone(),
                            model_b: labels[b].clone(),
                            t_statistic: t.statistic,
                            p_value: t.p_value,
                            significant: t.significant(0.05),
                            degenerate: t.degenerate,
                        });
                    }
                }
            }
        }
    }

    // Pool the CD cell across seeds and recompute the ranking.
    let cd_metric = cfg.cd.metric;
    let pooled: Vec<Vec<f64>> = labels
        .iter()
        .map(|label| {
            manifest
                .seeds
                .iter()
                .flat_map(|&seed| {
                    series
                        .get(&(seed, label.clone(), cd_metric.name().to_string(), cfg.cd.k))
                        .cloned()
                        .unwrap_or_default()
                })
                .collect()
        })
        .collect();
    let n_pooled = pooled.first().map(Vec::len).unwrap_or(0);
    if n_pooled == 0 {
        return Err(HarnessError::Runtime(
            "per_user.csv holds no rows for the configured CD cell".into(),
        ));
    }
    let cd = wilcoxon_holm_cd(&pooled, &labels, 0.05)?;

    let mut emitted = Vec::new();

    let path = run_dir.join("significance.csv");
    {
        let mut w = csv_writer(&path)?;
        w.write_record([
            "seed", "metric", "K", "model_a", "model_b", "t_statistic", "p_value", "significant",
            "degenerate",
        ])
        .map_err(|e| csv_error(&path, e))?;
        for row in &significance {
            w.write_record([
                row.seed.to_string(),
                row.metric.name().to_string(),
                row.k.to_string(),
                row.model_a.clone(),
                row.model_b.clone(),
                fmt_f64(row.t_statistic),
                fmt_f64(row.p_value),
                row.significant.to_string(),
                row.degenerate.to_string(),
            ])
            .map_err(|e| csv_error(&path, e))?;
        }
        w.flush().map_err(|e| HarnessError::Runtime(e.to_string()))?;
    }
    emitted.push(path);

    let path = run_dir.join("cd_report.txt");
    write_file(
        &path,
        render_cd_report(&cd, cd_metric.name(), cfg.cd.k, n_pooled).as_bytes(),
    )?;
    emitted.push(path);

    let path = run_dir.join("cd_diagram.svg");
    write_file(&path, svg::cd_diagram(&cd).as_bytes())?;
    emitted.push(path);

    Ok(emitted)
}

fn bad_field(path: &Path, field: &str) -> HarnessError {
    HarnessError::Runtime(format!("{}: unparsable {field} field", path.display()))
}

fn render_cd_report(
    cd: &ctxrec_core::eval::CdRanking,
    metric_name: &str,
    k: usize,
    n_pooled: usize,
) -> String {
    let mut text = String::new();
    text.push_str(&format!(
        "Critical-difference ranking (Wilcoxon–Holm, alpha = {})\n",
        cd.alpha
    ));
    text.push_str(&format!(
        "Metric cell: {metric_name}@{k} over {n_pooled} pooled users\n\n"
    ));
    text.push_str("Average ranks (1 = best):\n");
    for &idx in &cd.order {
        text.push_str(&format!(
            "  {:<20} {:.4}\n",
            cd.labels[idx], cd.average_ranks[idx]
        ));
    }
    text.push_str("\nCliques (no significant difference inside a group):\n");
    if cd.cliques.is_empty() {
        text.push_str("  none — every adjacent pair differs significantly\n");
    } else {
        for clique in &cd.cliques {
            let names: Vec<&str> = clique.iter().map(|&i| cd.labels[i].as_str()).collect();
            text.push_str(&format!("  {{{}}}\n", names.join(", ")));
        }
    }
    text.push_str("\nPairwise Wilcoxon signed-rank tests (Holm-adjusted):\n");
    text.push_str("  model_a, model_b, W+, p_raw, p_holm, significant\n");
    for p in &cd.pairwise {
        text.push_str(&format!(
            "  {}, {}, {}, {}, {}, {}\n",
            cd.labels[p.model_a],
            cd.labels[p.model_b],
            fmt_f64(p.w_plus),
            fmt_f64(p.p_raw),
            fmt_f64(p.p_holm),
            p.significant
        ));
    }
    text
}

/// Emit the `external id ↔ dense index` maps for a loaded dataset.
pub fn write_index_map(dataset: &Dataset, out_dir: &Path) -> Result<PathBuf> {
    create_dir(out_dir)?;
    let path = out_dir.join("index_map.tsv");
    let mut text = String::new();
    for (idx, name) in dataset.users.names().enumerate() {
        text.push_str(&format!("user\t{idx}\t{name}\n"));
    }
    for (idx, name) in dataset.pois.names().enumerate() {
        text.push_str(&format!("poi\t{idx}\t{name}\n"));
    }
    if let Some(categories) = &dataset.categories {
        for (idx, name) in categories.names().enumerate() {
            text.push_str(&format!("category\t{idx}\t{name}\n"));
        }
    }
    write_file(&path, text.as_bytes())?;
    Ok(path)
}

/// Write a dataset back out in the TSV interchange format (used by
/// `ctxrec synth`).
pub fn write_dataset_tsv(dataset: &Dataset, out_dir: &Path) -> Result<Vec<PathBuf>> {
    create_dir(out_dir)?;
    let mut emitted = Vec::new();

    let path = out_dir.join("checkins.tsv");
    let mut text = String::new();
    for events in &dataset.checkins {
        for e in events {
            text.push_str(&format!(
                "{}\t{}\t{}\n",
                dataset.users.name(e.user.0).expect("registry"),
                dataset.pois.name(e.poi.0).expect("registry"),
                e.timestamp
            ));
        }
    }
    write_file(&path, text.as_bytes())?;
    emitted.push(path);

    let path = out_dir.join("pois.tsv");
    let mut text = String::new();
    for poi in &dataset.poi_table {
        let name = dataset.pois.name(poi.id.0).expect("registry");
        match (poi.category, &dataset.categories) {
            (Some(cat), Some(categories)) => {
                text.push_str(&format!(
                    "{name}\t{}\t{}\t{}\n",
                    poi.lat,
                    poi.lon,
                    categories.name(cat.0).expect("registry")
                ));
            }
            _ => text.push_str(&format!("{name}\t{}\t{}\n", poi.lat, poi.lon)),
        }
    }
    write_file(&path, text.as_bytes())?;
    emitted.push(path);

    let path = out_dir.join("social.tsv");
    let mut text = String::new();
    for u in 0..dataset.n_users() {
        for &f in dataset.social.friends(ctxrec_core::data::UserId(u as u32)) {
            if f.index() > u {
                text.push_str(&format!(
                    "{}\t{}\n",
                    dataset.users.name(u as u32).expect("registry"),
                    dataset.users.name(f.0).expect("registry")
                ));
            }
        }
    }
    write_file(&path, text.as_bytes())?;
    emitted.push(path);

    if let Some(categories) = &dataset.categories {
        let path = out_dir.join("categories.tsv");
        let mut text = String::new();
        for (idx, name) in categories.names().enumerate() {
            text.push_str(&format!("{name}\tcategory {idx}\n"));
        }
        write_file(&path, text.as_bytes())?;
        emitted.push(path);
    }

    emitted.push(write_index_map(dataset, out_dir)?);
    Ok(emitted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ctxrec_core::eval::CdRanking;
    use crate::pipeline::RunOutput;

    #[test]
    fn empty_results_refuse_to_report() {
        let cfg = crate::config::ExperimentConfig::from_json(
            r#"{
            "dataset": {"synthetic": {"n_users": 5, "n_pois": 10, "n_checkins": 50}},
            "models": ["M"],
            "seeds": [1],
            "output_dir": "unused"
        }"#,
        )
        .unwrap();
        let empty = RunOutput {
            model_labels: vec!["M".into()],
            metrics_k: vec![],
            seeds: vec![],
            cd: CdRanking {
                labels: vec!["M".into()],
                average_ranks: vec![1.0],
                order: vec![0],
                cliques: vec![],
                pairwise: vec![],
                alpha: 0.05,
            },
            behavior_reports: vec![],
            total_seconds: 0.0,
        };
        let dir = tempfile::tempdir().unwrap();
        let err = emit_reports(&cfg, &empty, dir.path()).unwrap_err();
        assert!(err.to_string().contains("empty results"), "{err}");
    }

    #[test]
    fn moments_match_reference_values() {
        // Frozen from an independent statistics package (population-moment
        // definitions).
        let v = [0.1, 0.3, 0.9, 0.2, 0.7, 0.4, 0.11];
        let (skew, kurt, _) = moments(&v);
        assert!((skew - 0.709959235092816).abs() < 1e-12, "{skew}");
        assert!((kurt - -0.9514277955415418).abs() < 1e-12, "{kurt}");
        // Constant vector: diagnostics collapse to zero instead of NaN.
        let (skew, kurt, mean) = moments(&[2.0; 6]);
        assert_eq!((skew, kurt, mean), (0.0, 0.0, 2.0));
    }

    #[test]
    fn config_hash_is_stable_and_content_sensitive() {
        let cfg = crate::config::ExperimentConfig::from_json(
            r#"{
            "dataset": {"synthetic": {"n_users": 5, "n_pois": 10, "n_checkins": 50}},
            "models": ["M"],
            "seeds": [1],
            "output_dir": "unused"
        }"#,
        )
        .unwrap();
        let h1 = config_sha256(&cfg).unwrap();
        let h2 = config_sha256(&cfg).unwrap();
        assert_eq!(h1, h2);
        let mut other = cfg.clone();
        other.seeds = vec![2];
        assert_ne!(h1, config_sha256(&other).unwrap());
    }
}
