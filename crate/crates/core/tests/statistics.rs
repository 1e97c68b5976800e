use filtex_core::martingale_lab::{martingale_test, progressive_features, quarter_pairs, quarter_stride, Verdict};
use filtex_core::numeric::mean_and_se;
use filtex_core::single_expansion::BracketMethod;
use filtex_core::time_models::{
    sample_family, sample_times, BridgeLognormal, IndependentTime, MarkLaw, MarkedBridge, TimeLaw,
};
use filtex_core::{
    decompose_single, simulate_brownian, DriftMode, DriverFamily, LocalMartingale, SingleTimeModel, TimeGrid,
};

fn within(xs: &[f64], expected: f64, sigmas: f64) -> bool {
    let (m, se) = mean_and_se(xs);
    (m - expected).abs() < sigmas * se
}

#[test]
fn brownian_moments() {
    let grid = TimeGrid::new(2.0, 40).unwrap();
    let e = simulate_brownian(grid, 2, 40_000, 17).unwrap();
    let last = grid.steps();
    let w1: Vec<f64> = (0..e.n_paths()).map(|p| e.value(p, last, 0)).collect();
    let sq: Vec<f64> = w1.iter().map(|x| x * x).collect();
    let cross: Vec<f64> = (0..e.n_paths()).map(|p| e.value(p, last, 0) * e.value(p, last, 1)).collect();
    assert!(within(&w1, 0.0, 4.0));
    assert!(within(&sq, 2.0, 4.0));
    assert!(within(&cross, 0.0, 4.0));
    let mid: Vec<f64> = (0..e.n_paths()).map(|p| e.value(p, 20, 1) * e.value(p, last, 1)).collect();
    assert!(within(&mid, 1.0, 4.0));
}

#[test]
fn exponential_survival() {
    let grid = TimeGrid::new(1.0, 10).unwrap();
    let e = simulate_brownian(grid, 1, 50_000, 3).unwrap();
    let model = SingleTimeModel::Independent(IndependentTime::new(TimeLaw::Exponential { rate: 1.5 }).unwrap());
    let s = sample_times(&model, &e, 3).unwrap();
    let alive: Vec<f64> = s.iter().map(|x| f64::from(u8::from(x.tau > 0.4))).collect();
    assert!(within(&alive, (-0.6f64).exp(), 4.0));
}

#[test]
fn bridge_time_has_unit_median_and_tracks_the_driver() {
    let grid = TimeGrid::new(1.0, 20).unwrap();
    let e = simulate_brownian(grid, 1, 50_000, 8).unwrap();
    let model = SingleTimeModel::BridgeLognormal(BridgeLognormal::new(2.0).unwrap());
    let s = sample_times(&model, &e, 8).unwrap();
    let below: Vec<f64> = s.iter().map(|x| f64::from(u8::from(x.tau <= 1.0))).collect();
    assert!(within(&below, 0.5, 4.0));
    // ln τ − W_T is N(0, T0 − T) and independent of W_T.
    let resid: Vec<f64> = (0..e.n_paths()).map(|p| s[p].tau.ln() - e.value(p, 20, 0)).collect();
    let sq: Vec<f64> = resid.iter().map(|r| r * r).collect();
    let cross: Vec<f64> = (0..e.n_paths()).map(|p| resid[p] * e.value(p, 20, 0)).collect();
    assert!(within(&resid, 0.0, 4.0));
    assert!(within(&sq, 1.0, 4.0));
    assert!(within(&cross, 0.0, 4.0));
}

#[test]
fn mark_laws() {
    let grid = TimeGrid::new(1.0, 20).unwrap();
    let e = simulate_brownian(grid, 1, 40_000, 4).unwrap();
    let bridge = BridgeLognormal::new(2.0).unwrap();
    let coin = SingleTimeModel::MarkedBridge(MarkedBridge::new(bridge, MarkLaw::Rademacher).unwrap());
    let marks: Vec<f64> = sample_times(&coin, &e, 4).unwrap().iter().map(|s| s.mark.unwrap()).collect();
    assert!(marks.iter().all(|x| x.abs() == 1.0));
    assert!(within(&marks, 0.0, 4.0));
    let sign = SingleTimeModel::MarkedBridge(MarkedBridge::new(bridge, MarkLaw::AnchorSign).unwrap());
    for s in sample_times(&sign, &e, 4).unwrap() {
        assert_eq!(s.mark.unwrap(), if s.tau >= 1.0 { 1.0 } else { -1.0 });
    }
    let fam = DriverFamily::new(2, 2.0, true).unwrap();
    let e2 = simulate_brownian(grid, 2, 20_000, 4).unwrap();
    let fm: Vec<f64> = sample_family(&fam, &e2, 4)
        .unwrap()
        .iter()
        .flat_map(|s| s.marks.clone().unwrap())
        .collect();
    assert!(within(&fm, 0.0, 4.0));
}

#[test]
fn corrected_driver_keeps_nominal_size() {
    let grid = TimeGrid::new(1.0, 40).unwrap();
    let model = SingleTimeModel::BridgeLognormal(BridgeLognormal::new(2.0).unwrap());
    let m = LocalMartingale::brownian(0);
    let stride = quarter_stride(&grid);
    let pairs = quarter_pairs(grid.horizon());
    let reps = 200;
    let mut passes = 0;
    for seed in 0..reps {
        let e = simulate_brownian(grid, 1, 10_000, 1000 + seed).unwrap();
        let s = sample_times(&model, &e, 1000 + seed).unwrap();
        let d = decompose_single(&m, &model, &e, &s, DriftMode::Plain, BracketMethod::ClosedForm).unwrap();
        let f = progressive_features(&e, &model, &s, false, stride).unwrap();
        let r = martingale_test(&d.martingale_part.restrict(stride).unwrap(), &f, &pairs).unwrap();
        passes += usize::from(r.verdict == Verdict::Pass);
    }
    let rate = passes as f64 / reps as f64;
    assert!(rate >= 0.97, "pass rate {rate}");
}
