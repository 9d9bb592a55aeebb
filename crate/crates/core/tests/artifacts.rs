//! Serialized model artifacts: every fitted model round-trips through the
//! versioned JSON envelope without loss.

use ctxrec_core::data::{Dataset, FrequencyMatrix, SocialGraph, UserId};
use ctxrec_core::models::{train_pfm, MfModel, PfmHyperparams};
use ctxrec_core::scorers::{
    fit_fcf, fit_geo_kde, fit_mgm, fit_social, CategoricalModel, FcfModel, GeoKdeModel,
    KdeSettings, MgmModel, MgmSettings, ModelArtifact, SocialPowerLawModel, TemporalModel,
};

fn fixture() -> (Dataset, FrequencyMatrix) {
    let events = vec![
        vec![(0u32, 0i64), (1, 5), (0, 9), (2, 14)],
        vec![(2, 1), (3, 4), (2, 7)],
        vec![(1, 2), (1, 3), (3, 8), (0, 12)],
    ];
    let mut d = Dataset::from_user_events(&events, 4);
    d.social = SocialGraph::from_edges(3, [(UserId(0), UserId(1)), (UserId(1), UserId(2))]);
    let m = FrequencyMatrix::from_checkins(3, 4, &d.checkins);
    (d, m)
}

fn round_trip<T>(kind: &str, model: T) -> T
where
    T: serde::Serialize + serde::de::DeserializeOwned + PartialEq + std::fmt::Debug + Clone,
{
    let json = ModelArtifact::new(kind, model.clone()).to_json().unwrap();
    let back = ModelArtifact::<T>::from_json(&json).unwrap();
    assert_eq!(back.kind, kind);
    assert_eq!(back.model, model, "{kind} artifact changed in flight");
    back.model
}

#[test]
fn every_scorer_round_trips() {
    let (d, m) = fixture();
    let coords = d.coords();

    round_trip::<GeoKdeModel>("geo-kde", fit_geo_kde(&m, &coords, KdeSettings::default()));
    round_trip::<SocialPowerLawModel>("social", fit_social(&m, &d.social));
    round_trip::<TemporalModel>("temporal", TemporalModel::fit(&d.checkins, 4, 0.1));
    round_trip::<FcfModel>("fcf", fit_fcf(&m, &d.social));
    round_trip::<MgmModel>("mgm", fit_mgm(&m, &coords, MgmSettings::default()));

    // Categorical needs category data.
    let mut with_cats = d.clone();
    let mut registry = ctxrec_core::data::Registry::new();
    registry.intern("food");
    registry.intern("bar");
    for (i, poi) in with_cats.poi_table.iter_mut().enumerate() {
        poi.category = Some(ctxrec_core::data::CategoryId((i % 2) as u32));
    }
    with_cats.categories = Some(registry);
    let categorical = ctxrec_core::scorers::fit_categorical(&m, &with_cats).unwrap();
    round_trip::<CategoricalModel>("categorical", categorical);
}

#[test]
fn trained_factorization_round_trips() {
    let (_, m) = fixture();
    let model = train_pfm(
        &m,
        PfmHyperparams {
            iterations: 15,
            ..PfmHyperparams::with_k(3)
        },
        5,
    )
    .unwrap();
    let back = round_trip::<MfModel>("pfm", model.clone());
    assert_eq!(back.objective_trace, model.objective_trace);
    assert_eq!(back.user_factors, model.user_factors);
}

#[test]
fn version_mismatch_is_rejected() {
    let (_, m) = fixture();
    let model = fit_social(&m, &SocialGraph::with_users(3));
    let json = ModelArtifact::new("social", model).to_json().unwrap();
    let tampered = json.replace("\"format_version\":1", "\"format_version\":999");
    assert!(ModelArtifact::<SocialPowerLawModel>::from_json(&tampered).is_err());
}
