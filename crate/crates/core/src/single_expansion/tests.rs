use super::*;
use crate::grid_paths::{make_grid, simulate_brownian, PathEnsemble};
use crate::time_models::{
    sample_times, BridgeLognormal, CoxDeterministic, IndependentTime, MarkLaw, MarkedBridge,
    SingleTimeModel, TimeLaw, TimeSample,
};

fn setup(model: &SingleTimeModel, n: usize) -> (PathEnsemble, Vec<TimeSample>) {
    let g = make_grid(1.0, 50).unwrap();
    let e = simulate_brownian(g, 1, n, 21).unwrap();
    let s = sample_times(model, &e, 22).unwrap();
    (e, s)
}

fn bridge() -> SingleTimeModel {
    SingleTimeModel::BridgeLognormal(BridgeLognormal::new(2.0).unwrap())
}

#[test]
fn null_models_have_no_drift() {
    for model in [
        SingleTimeModel::Independent(IndependentTime::new(TimeLaw::Exponential { rate: 1.0 }).unwrap()),
        SingleTimeModel::CoxDeterministic(CoxDeterministic::new(1.0).unwrap()),
    ] {
        let (e, s) = setup(&model, 200);
        let m = LocalMartingale::brownian(0);
        let d = decompose_single(&m, &model, &e, &s, DriftMode::Plain, BracketMethod::ClosedForm).unwrap();
        assert!(d.drift_before.values().iter().all(|v| *v == 0.0));
        assert!(d.drift_after.values().iter().all(|v| *v == 0.0));
        assert_eq!(d.martingale_part, d.original);
    }
}

#[test]
fn bridge_decomposition_is_additive_and_localized() {
    let model = bridge();
    let (e, s) = setup(&model, 500);
    for bracket in [BracketMethod::ClosedForm, BracketMethod::Realized] {
        let d = decompose_single(&LocalMartingale::brownian(0), &model, &e, &s, DriftMode::Plain, bracket).unwrap();
        assert!(d.additivity_residual() < 1e-13);
        assert!(d.localization_holds());
        assert!(d.martingale_part.is_finite());
    }
}

#[test]
fn after_drift_matches_bridge_slope() {
    let model = bridge();
    let (e, s) = setup(&model, 300);
    let d = decompose_single(&LocalMartingale::brownian(0), &model, &e, &s, DriftMode::Plain, BracketMethod::ClosedForm).unwrap();
    let g = *e.grid();
    for p in 0..300 {
        let k0 = g.snap_up(s[p].tau);
        for i in k0..g.steps() {
            let t = g.node(i);
            let oracle = (s[p].tau.ln() - e.value(p, i, 0)) / (2.0 - t) * g.dt();
            let inc = d.drift_after.value(p, i + 1) - d.drift_after.value(p, i);
            assert!((inc - oracle).abs() < 1e-12);
        }
    }
}

#[test]
fn standalone_drifts_agree_with_decomposition() {
    let model = bridge();
    let (e, s) = setup(&model, 200);
    let m = LocalMartingale::integral(Profile { level: 1.0, slope: 0.5 });
    let d = decompose_single(&m, &model, &e, &s, DriftMode::Plain, BracketMethod::ClosedForm).unwrap();
    let ingr = jy_ingredients(&m, &model, &e, BracketMethod::ClosedForm).unwrap();
    assert!(ingr.j.values().iter().all(|v| *v == 0.0));
    let jy = jeulin_yor_drift(&d.original, &ingr, &s).unwrap();
    for (a, b) in jy.drift.values().iter().zip(d.drift_before.values()) {
        assert!((a - b).abs() < 1e-12);
    }
    assert_eq!(jy.truncated, d.truncated);
    let after = jacod_after_drift(&m, &model, &e, &s, false).unwrap();
    assert_eq!(after, d.drift_after);
}

#[test]
fn marks_without_information_change_nothing() {
    let b = BridgeLognormal::new(2.0).unwrap();
    for law in [MarkLaw::Rademacher, MarkLaw::AnchorSign] {
        let model = SingleTimeModel::MarkedBridge(MarkedBridge::new(b, law).unwrap());
        let (e, s) = setup(&model, 200);
        let m = LocalMartingale::brownian(0);
        let plain = decompose_single(&m, &model, &e, &s, DriftMode::Plain, BracketMethod::ClosedForm).unwrap();
        let marked = decompose_single(&m, &model, &e, &s, DriftMode::Marked, BracketMethod::ClosedForm).unwrap();
        assert_eq!(plain, marked);
    }
}

#[test]
fn informative_mark_only_changes_the_after_drift() {
    let b = BridgeLognormal::new(2.0).unwrap();
    let model = SingleTimeModel::MarkedBridge(MarkedBridge::new(b, MarkLaw::IntermediateSign { at: 1.5 }).unwrap());
    let (e, s) = setup(&model, 200);
    let m = LocalMartingale::brownian(0);
    let plain = decompose_single(&m, &model, &e, &s, DriftMode::Plain, BracketMethod::ClosedForm).unwrap();
    let marked = decompose_single(&m, &model, &e, &s, DriftMode::Marked, BracketMethod::ClosedForm).unwrap();
    assert_eq!(plain.drift_before, marked.drift_before);
    assert_ne!(plain.drift_after, marked.drift_after);
}

#[test]
fn plugged_drift() {
    let model = bridge();
    let (e, s) = setup(&model, 100);
    let m = LocalMartingale::brownian(0);
    let zero = |_: f64, _: &[f64], _: &TimeSample| 0.0;
    let d = decompose_single(&m, &model, &e, &s, DriftMode::Plugged(&zero), BracketMethod::ClosedForm).unwrap();
    assert!(d.drift_after.values().iter().all(|v| *v == 0.0));
    let b = BridgeLognormal::new(2.0).unwrap();
    let slope = move |t: f64, w: &[f64], x: &TimeSample| b.slope(t, w[0], x.tau);
    let plugged = decompose_single(&m, &model, &e, &s, DriftMode::Plugged(&slope), BracketMethod::ClosedForm).unwrap();
    let plain = decompose_single(&m, &model, &e, &s, DriftMode::Plain, BracketMethod::ClosedForm).unwrap();
    assert_eq!(plugged, plain);
}

#[test]
fn errors() {
    let model = bridge();
    let (e, s) = setup(&model, 10);
    let m = LocalMartingale::brownian(0);
    assert_eq!(
        decompose_single(&m, &model, &e, &s, DriftMode::Marked, BracketMethod::ClosedForm).unwrap_err(),
        crate::Error::UnmarkedModel
    );
    assert!(decompose_single(&m, &model, &e, &s[..5], DriftMode::Plain, BracketMethod::ClosedForm).is_err());
    let late = SingleTimeModel::BridgeLognormal(BridgeLognormal::new(1.05).unwrap());
    assert!(matches!(
        decompose_single(&m, &late, &e, &s, DriftMode::Plain, BracketMethod::ClosedForm),
        Err(crate::Error::HorizonBreach { .. })
    ));
}
