//! The experiment pipeline: build the dataset, fit every component the
//! model grid needs, rank candidates per user, and aggregate metrics,
//! significance tests, critical-difference ranks, and behavior reports.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use ctxrec_core::behavior::{
    behavior_profiles, bucketize_and_aggregate, BehaviorAspect, BehaviorProfile, BucketedReport,
};
use ctxrec_core::data::{
    filter_dataset, filter_dataset_fixpoint, generate_synthetic, load_dataset, sample_negatives,
    temporal_split, training_samples, Dataset, FrequencyMatrix, NegativeMode, PoiId, SplitDataset,
    UserId,
};
use ctxrec_core::eval::{
    ndcg_at_k, paired_ttest, precision_at_k, recall_at_k, wilcoxon_holm_cd, CdRanking, MetricKind,
    MetricResult,
};
use ctxrec_core::fusion::{fuse_candidates, recommend_top_n, BaseModel, FusionConfig};
use ctxrec_core::models::{mf_predict, ncf_predict, train_ncf, train_pfm, MfModel, NcfModel};
use ctxrec_core::rng::child_seed;
use ctxrec_core::scorers::{
    fit_categorical, fit_fcf, fit_geo_kde, fit_geo_kde_universal, fit_mgm, fit_social,
    CategoricalModel, Context, ContextScorer, FcfModel, GeoKdeModel, MgmModel,
    SocialPowerLawModel, TemporalModel,
};

use crate::config::{DatasetSource, ExperimentConfig};
use crate::error::{HarnessError, Result};
use crate::labels::{ModelSpec, ScorerKind};

/// One pairwise significance test on a (metric, K) cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SignificanceRow {
    pub seed: u64,
    pub metric: MetricKind,
    pub k: usize,
    pub model_a: String,
    pub model_b: String,
    pub t_statistic: f64,
    pub p_value: f64,
    pub significant: bool,
    pub degenerate: bool,
}

/// Everything produced by one seed of the pipeline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeedOutput {
    pub seed: u64,
    /// External ids of users with a nonempty effective test set.
    pub evaluated_users: Vec<String>,
    /// One entry per (model × metric × K); per-user values align with
    /// `evaluated_users`.
    pub metric_results: Vec<MetricResult>,
    pub significance: Vec<SignificanceRow>,
    /// Behavior profile per evaluated user.
    pub profiles: Vec<BehaviorProfile>,
    pub stage_seconds: BTreeMap<String, f64>,
    pub n_users: usize,
    pub n_pois: usize,
    pub n_checkins: usize,
    /// Objective value per PFM iteration, when the factorization trained.
    pub pfm_objective_trace: Option<Vec<f64>>,
    /// Mean loss per NCF epoch, when the network trained.
    pub ncf_loss_trace: Option<Vec<f64>>,
}

/// Full experiment output across seeds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunOutput {
    pub model_labels: Vec<String>,
    pub metrics_k: Vec<(MetricKind, usize)>,
    pub seeds: Vec<SeedOutput>,
    /// Wilcoxon–Holm critical-difference ranking on the configured metric,
    /// pooled over every seed's evaluated users.
    pub cd: CdRanking,
    /// One report per behavior aspect, pooled across seeds.
    pub behavior_reports: Vec<BucketedReport>,
    pub total_seconds: f64,
}

impl RunOutput {
    /// Pooled per-user values for (model, metric, K) across all seeds.
    pub fn pooled_values(&self, model: &str, metric: MetricKind, k: usize) -> Vec<f64> {
        let mut values = Vec::new();
        for seed in &self.seeds {
            for r in &seed.metric_results {
                if r.model == model && r.metric == metric && r.k == k {
                    values.extend_from_slice(&r.per_user);
                }
            }
        }
        values
    }
}

/// Fitted models shared by every grid entry that references them.
struct Components {
    kde_per_user: Option<GeoKdeModel>,
    kde_universal: Option<GeoKdeModel>,
    temporal: Option<TemporalModel>,
    social: Option<SocialPowerLawModel>,
    categorical: Option<CategoricalModel>,
    fcf: Option<FcfModel>,
    mgm: Option<MgmModel>,
    mf: Option<MfModel>,
    ncf: Option<NcfModel>,
}

fn context_of(kind: ScorerKind) -> Context {
    match kind {
        ScorerKind::GeoKdePerUser | ScorerKind::GeoKdeUniversal => Context::Geographical,
        ScorerKind::Amc => Context::Temporal,
        ScorerKind::SocialPowerLaw => Context::Social,
        ScorerKind::Categorical => Context::Categorical,
        ScorerKind::Fcf => Context::FriendCf,
        ScorerKind::Mgm => Context::MultiCenter,
    }
}

fn prepare_dataset(cfg: &ExperimentConfig, seed: u64) -> Result<Dataset> {
    match &cfg.dataset {
        DatasetSource::Synthetic(synth) => {
            Ok(generate_synthetic(synth, child_seed(seed, "synth"))?)
        }
        DatasetSource::Files {
            checkins,
            pois,
            social,
            categories,
        } => {
            let (dataset, stats) =
                load_dataset(checkins, pois, social, categories.as_deref())?;
            info!(
                "loaded {} check-in lines, {} social edges kept, {} dropped",
                stats.checkin_lines, stats.social_edges_kept, stats.social_edges_dropped
            );
            Ok(dataset)
        }
    }
}

fn fit_components(
    cfg: &ExperimentConfig,
    specs: &[ModelSpec],
    dataset: &Dataset,
    split: &SplitDataset,
    matrix: &FrequencyMatrix,
    seed: u64,
    times: &mut BTreeMap<String, f64>,
) -> Result<Components> {
    let needed: BTreeSet<ScorerKind> = specs.iter().flat_map(|s| s.components.clone()).collect();
    let needs_mf = specs.iter().any(|s| s.base == BaseModel::Mf);
    let needs_ncf = specs.iter().any(|s| s.base == BaseModel::Ncf);
    let coords = dataset.coords();

    let t0 = Instant::now();
    let kde_per_user = needed
        .contains(&ScorerKind::GeoKdePerUser)
        .then(|| fit_geo_kde(matrix, &coords, cfg.hyper.kde));
    let kde_universal = if needed.contains(&ScorerKind::GeoKdeUniversal) {
        Some(fit_geo_kde_universal(matrix, &coords, cfg.hyper.kde)?)
    } else {
        None
    };
    let temporal = needed
        .contains(&ScorerKind::Amc)
        .then(|| TemporalModel::fit(&split.train, dataset.n_pois(), cfg.hyper.amc_alpha));
    let social = needed
        .contains(&ScorerKind::SocialPowerLaw)
        .then(|| fit_social(matrix, &dataset.social));
    let categorical = if needed.contains(&ScorerKind::Categorical) {
        Some(fit_categorical(matrix, dataset)?)
    } else {
        None
    };
    let fcf = needed
        .contains(&ScorerKind::Fcf)
        .then(|| fit_fcf(matrix, &dataset.social));
    let mgm = needed
        .contains(&ScorerKind::Mgm)
        .then(|| fit_mgm(matrix, &coords, cfg.hyper.mgm));
    times.insert("fit_scorers".into(), t0.elapsed().as_secs_f64());

    // The factorization trains whenever an M base is requested or the NCF
    // needs its factors for embedding initialization.
    let mf = if needs_mf || needs_ncf {
        let t = Instant::now();
        let model = train_pfm(matrix, cfg.hyper.pfm.clone(), child_seed(seed, "pfm"))?;
        times.insert("train_pfm".into(), t.elapsed().as_secs_f64());
        Some(model)
    } else {
        None
    };
    let ncf = if needs_ncf {
        let t = Instant::now();
        let samples = training_samples(
            split,
            matrix,
            dataset.n_pois(),
            child_seed(seed, "train-negatives"),
        );
        let model = train_ncf(
            &samples,
            mf.as_ref().expect("trained above"),
            &cfg.hyper.ncf.arch,
            &cfg.hyper.ncf.train_config(),
            child_seed(seed, "ncf"),
        )?;
        times.insert("train_ncf".into(), t.elapsed().as_secs_f64());
        Some(model)
    } else {
        None
    };

    Ok(Components {
        kde_per_user,
        kde_universal,
        temporal,
        social,
        categorical,
        fcf,
        mgm,
        mf,
        ncf,
    })
}

impl Components {
    /// Score one context component over a user's candidate list.
    fn score_component(
        &self,
        kind: ScorerKind,
        user: UserId,
        candidates: &[PoiId],
    ) -> Result<Vec<f64>> {
        let pointwise = |scorer: &dyn ContextScorer| -> Result<Vec<f64>> {
            candidates
                .iter()
                .map(|&l| scorer.score(user, l).map_err(HarnessError::from))
                .collect()
        };
        match kind {
            ScorerKind::GeoKdePerUser => {
                pointwise(self.kde_per_user.as_ref().expect("fitted for the grid"))
            }
            ScorerKind::GeoKdeUniversal => {
                pointwise(self.kde_universal.as_ref().expect("fitted for the grid"))
            }
            ScorerKind::SocialPowerLaw => {
                pointwise(self.social.as_ref().expect("fitted for the grid"))
            }
            ScorerKind::Categorical => {
                pointwise(self.categorical.as_ref().expect("fitted for the grid"))
            }
            ScorerKind::Fcf => pointwise(self.fcf.as_ref().expect("fitted for the grid")),
            ScorerKind::Mgm => pointwise(self.mgm.as_ref().expect("fitted for the grid")),
            ScorerKind::Amc => {
                let temporal = self.temporal.as_ref().expect("fitted for the grid");
                let history = temporal.history(user)?;
                Ok(temporal.graph.amc_score_many(history, candidates)?)
            }
        }
    }

    fn base_scores(
        &self,
        base: BaseModel,
        user: UserId,
        candidates: &[PoiId],
    ) -> Result<Option<Vec<f64>>> {
        match base {
            BaseModel::None => Ok(None),
            BaseModel::Mf => {
                let model = self.mf.as_ref().expect("trained for the grid");
                let scores: ctxrec_core::Result<Vec<f64>> = candidates
                    .iter()
                    .map(|&l| mf_predict(model, user, l))
                    .collect();
                Ok(Some(scores?))
            }
            BaseModel::Ncf => {
                let model = self.ncf.as_ref().expect("trained for the grid");
                let scores: ctxrec_core::Result<Vec<f64>> = candidates
                    .iter()
                    .map(|&l| ncf_predict(model, user, l))
                    .collect();
                Ok(Some(scores?))
            }
        }
    }
}

/// Per-user evaluation payload produced inside the parallel section.
struct UserEval {
    user: usize,
    /// `values[model][cell]` for the fixed (metric, K) cell order.
    values: Vec<Vec<f64>>,
}

/// Shared read-only state for the parallel per-user evaluation.
struct EvalContext<'a> {
    cfg: &'a ExperimentConfig,
    specs: &'a [ModelSpec],
    components: &'a Components,
    matrix: &'a FrequencyMatrix,
    split: &'a SplitDataset,
    cells: &'a [(MetricKind, usize)],
}

fn evaluate_user(ctx: &EvalContext<'_>, negatives: &[PoiId], user: usize) -> Result<Option<UserEval>> {
    let uid = UserId(user as u32);
    // Relevance: distinct test POIs the user has not already visited in
    // train (train POIs never enter the candidate set).
    let effective_test: BTreeSet<PoiId> = ctx.split.test[user]
        .iter()
        .map(|e| e.poi)
        .filter(|&l| !ctx.matrix.visited(uid, l))
        .collect();
    if effective_test.is_empty() {
        return Ok(None);
    }
    let mut candidate_set: BTreeSet<PoiId> = effective_test.clone();
    candidate_set.extend(negatives.iter().copied());
    let candidates: Vec<PoiId> = candidate_set.into_iter().collect();

    let list_len = ctx
        .cfg
        .top_n
        .max(ctx.cells.iter().map(|&(_, k)| k).max().unwrap_or(1));
    let mut values = Vec::with_capacity(ctx.specs.len());
    for spec in ctx.specs {
        let fusion = FusionConfig {
            base: spec.base,
            contexts: spec.components.iter().map(|&k| context_of(k)).collect(),
            normalization: ctx.cfg.normalization,
            n: list_len,
        };
        let base = ctx.components.base_scores(spec.base, uid, &candidates)?;
        let mut context_vectors = Vec::with_capacity(spec.components.len());
        for &kind in &spec.components {
            context_vectors.push((
                context_of(kind),
                ctx.components.score_component(kind, uid, &candidates)?,
            ));
        }
        let fused = fuse_candidates(base, context_vectors, candidates.len(), &fusion)?;
        let list = recommend_top_n(uid, &candidates, &fused, list_len);
        let ranked: Vec<PoiId> = list.items.iter().map(|&(l, _)| l).collect();

        let model_values: Vec<f64> = ctx
            .cells
            .iter()
            .map(|&(metric, k)| match metric {
                MetricKind::Precision => precision_at_k(&ranked, &effective_test, k),
                MetricKind::Recall => recall_at_k(&ranked, &effective_test, k),
                MetricKind::Ndcg => ndcg_at_k(&ranked, &effective_test, k),
            })
            .collect();
        values.push(model_values);
    }
    Ok(Some(UserEval { user, values }))
}

fn run_seed(
    cfg: &ExperimentConfig,
    specs: &[ModelSpec],
    labels: &[String],
    cells: &[(MetricKind, usize)],
    seed: u64,
) -> Result<SeedOutput> {
    let mut times = BTreeMap::new();

    let t = Instant::now();
    let raw = prepare_dataset(cfg, seed)?;
    times.insert("load".into(), t.elapsed().as_secs_f64());

    let t = Instant::now();
    let dataset = if cfg.filter.fixpoint {
        filter_dataset_fixpoint(&raw, cfg.filter.min_user_checkins, cfg.filter.min_poi_visitors)
    } else {
        filter_dataset(&raw, cfg.filter.min_user_checkins, cfg.filter.min_poi_visitors)
    };
    times.insert("filter".into(), t.elapsed().as_secs_f64());
    if dataset.n_users() == 0 {
        return Err(HarnessError::Runtime(
            "filtering removed every user; relax the thresholds".into(),
        ));
    }

    let t = Instant::now();
    let split = temporal_split(&dataset, cfg.split)?;
    let matrix = FrequencyMatrix::from_checkins(dataset.n_users(), dataset.n_pois(), &split.train);
    times.insert("split".into(), t.elapsed().as_secs_f64());

    let components = fit_components(cfg, specs, &dataset, &split, &matrix, seed, &mut times)?;

    let t = Instant::now();
    let negative_samples = sample_negatives(
        &split,
        &matrix,
        dataset.n_pois(),
        NegativeMode::Test {
            per_user: cfg.test_negatives,
        },
        child_seed(seed, "test-negatives"),
    );
    let mut negatives_by_user: Vec<Vec<PoiId>> = vec![Vec::new(); dataset.n_users()];
    for s in negative_samples {
        negatives_by_user[s.user.index()].push(s.poi);
    }
    times.insert("negatives".into(), t.elapsed().as_secs_f64());

    // Per-user evaluation; pure map with an order-preserving collect keeps
    // the reduction deterministic regardless of worker count.
    let t = Instant::now();
    let ctx = EvalContext {
        cfg,
        specs,
        components: &components,
        matrix: &matrix,
        split: &split,
        cells,
    };
    let evals: Vec<Option<UserEval>> = (0..dataset.n_users())
        .into_par_iter()
        .map(|user| evaluate_user(&ctx, &negatives_by_user[user], user))
        .collect::<Result<Vec<_>>>()?;
    times.insert("evaluate".into(), t.elapsed().as_secs_f64());

    let evaluated: Vec<UserEval> = evals.into_iter().flatten().collect();
    if evaluated.is_empty() {
        return Err(HarnessError::Runtime(
            "no user has a nonempty test set; nothing to evaluate".into(),
        ));
    }
    let evaluated_users: Vec<String> = evaluated
        .iter()
        .map(|e| dataset.users.name(e.user as u32).expect("registry").to_owned())
        .collect();

    let mut metric_results = Vec::with_capacity(specs.len() * cells.len());
    for (mi, label) in labels.iter().enumerate() {
        for (ci, &(metric, k)) in cells.iter().enumerate() {
            let per_user: Vec<f64> = evaluated.iter().map(|e| e.values[mi][ci]).collect();
            metric_results.push(MetricResult::from_values(label, metric, k, per_user));
        }
    }

    // Pairwise two-tailed paired t-tests on every (metric, K) cell.
    let mut significance = Vec::new();
    if evaluated.len() >= 2 {
        for (ci, &(metric, k)) in cells.iter().enumerate() {
            for a in 0..specs.len() {
                for b in (a + 1)..specs.len() {
                    let va: Vec<f64> = evaluated.iter().map(|e| e.values[a][ci]).collect();
                    let vb: Vec<f64> = evaluated.iter().map(|e| e.values[b][ci]).collect();
                    let t = paired_ttest(&va, &vb)?;
                    significance.push(SignificanceRow {
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

    // Behavior profiles over train check-ins of evaluated users.
    let t = Instant::now();
    let coords = dataset.coords();
    let all_profiles = behavior_profiles(&split.train, &coords);
    let evaluated_set: BTreeSet<usize> = evaluated.iter().map(|e| e.user).collect();
    let profiles: Vec<BehaviorProfile> = all_profiles
        .into_iter()
        .filter(|p| evaluated_set.contains(&p.user.index()))
        .collect();
    // Every evaluated user has train check-ins, so the two lists align
    // one-to-one in ascending user order; per-user rows depend on it.
    assert_eq!(profiles.len(), evaluated.len());
    times.insert("behavior".into(), t.elapsed().as_secs_f64());

    Ok(SeedOutput {
        seed,
        evaluated_users,
        metric_results,
        significance,
        profiles,
        stage_seconds: times,
        n_users: dataset.n_users(),
        n_pois: dataset.n_pois(),
        n_checkins: dataset.n_checkins(),
        pfm_objective_trace: components.mf.as_ref().map(|m| m.objective_trace.clone()),
        ncf_loss_trace: components.ncf.as_ref().map(|m| m.loss_trace.clone()),
    })
}

/// Run the full experiment: one pipeline per seed, then pooled
/// critical-difference and behavior reports.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let started = Instant::now();
    let specs = cfg.validate()?;
    let labels: Vec<String> = specs.iter().map(|s| s.canonical_label()).collect();
    let cells: Vec<(MetricKind, usize)> = MetricKind::ALL
        .iter()
        .flat_map(|&m| cfg.metrics_k.iter().map(move |&k| (m, k)))
        .collect();

    let pool = thread_pool()?;
    let seeds: Vec<SeedOutput> = pool.install(|| {
        cfg.seeds
            .iter()
            .map(|&seed| run_seed(cfg, &specs, &labels, &cells, seed))
            .collect::<Result<Vec<_>>>()
    })?;

    // Critical-difference ranking on the configured cell, pooled per-user
    // values across seeds (each user-instance saw every model).
    let per_model_values: Vec<Vec<f64>> = labels
        .iter()
        .map(|label| {
            seeds
                .iter()
                .flat_map(|s| {
                    s.metric_results
                        .iter()
                        .filter(|r| &r.model == label && r.metric == cfg.cd.metric && r.k == cfg.cd.k)
                        .flat_map(|r| r.per_user.iter().copied())
                })
                .collect()
        })
        .collect();
    let cd = if labels.len() >= 2 {
        wilcoxon_holm_cd(&per_model_values, &labels, 0.05)?
    } else {
        // Single-model grids still need a report skeleton.
        CdRanking {
            labels: labels.clone(),
            average_ranks: vec![1.0],
            order: vec![0],
            cliques: vec![],
            pairwise: vec![],
            alpha: 0.05,
        }
    };

    // Behavior reports per aspect, pooled across seeds; a user contributes
    // when the aspect is defined for them.
    let mut behavior_reports = Vec::new();
    for aspect in [
        BehaviorAspect::Geo,
        BehaviorAspect::Temporal,
        BehaviorAspect::Exploration,
    ] {
        let mut aspect_values = Vec::new();
        let mut per_model: Vec<Vec<f64>> = vec![Vec::new(); labels.len()];
        for seed_out in &seeds {
            // Index from evaluated-user order to profile.
            let profile_by_user: BTreeMap<usize, &BehaviorProfile> = seed_out
                .profiles
                .iter()
                .map(|p| (p.user.index(), p))
                .collect();
            let cd_results: Vec<&MetricResult> = labels
                .iter()
                .map(|label| {
                    seed_out
                        .metric_results
                        .iter()
                        .find(|r| &r.model == label && r.metric == cfg.cd.metric && r.k == cfg.cd.k)
                        .expect("cell exists for every model")
                })
                .collect();
            // Evaluated users appear in ascending user order in per_user.
            let mut order: Vec<usize> = profile_by_user.keys().copied().collect();
            order.sort_unstable();
            for (row, user) in order.iter().enumerate() {
                let profile = profile_by_user[user];
                if let Some(value) = profile.aspect(aspect) {
                    aspect_values.push(value);
                    for (mi, result) in cd_results.iter().enumerate() {
                        per_model[mi].push(result.per_user[row]);
                    }
                }
            }
        }
        if aspect_values.len() >= 5 {
            behavior_reports.push(bucketize_and_aggregate(
                aspect,
                &aspect_values,
                &labels,
                &per_model,
            )?);
        }
    }

    Ok(RunOutput {
        model_labels: labels,
        metrics_k: cells,
        seeds,
        cd,
        behavior_reports,
        total_seconds: started.elapsed().as_secs_f64(),
    })
}

/// Worker pool honoring the CTXREC_THREADS cap.
fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var("CTXREC_THREADS") {
        let n: usize = raw
            .parse()
            .map_err(|_| HarnessError::Config(format!("CTXREC_THREADS must be a number, got `{raw}`")))?;
        builder = builder.num_threads(n.max(1));
    }
    builder
        .build()
        .map_err(|e| HarnessError::Runtime(format!("thread pool: {e}")))
}
