use super::*;
use crate::grid_paths::{make_grid, simulate_brownian, GridProcess};
use crate::single_expansion::{decompose_single, BracketMethod, DriftMode, LocalMartingale};
use crate::time_models::{sample_family, sample_times, DriverFamily, FamilySample, SingleTimeModel};

#[test]
fn one_time_reduces_to_single_decomposition() {
    let g = make_grid(1.0, 60).unwrap();
    let e = simulate_brownian(g, 1, 300, 5).unwrap();
    let fam = DriverFamily::new(1, 2.0, false).unwrap();
    let fs = sample_family(&fam, &e, 6).unwrap();
    let single = SingleTimeModel::BridgeLognormal(*fam.component());
    let ss = sample_times(&single, &e, 6).unwrap();
    for (a, b) in fs.iter().zip(&ss) {
        assert_eq!(a.taus[0], b.tau);
    }
    let m = LocalMartingale::brownian(0);
    let multi = multi_drift(&m, &fam, &e, &fs).unwrap();
    let one = decompose_single(&m, &single, &e, &ss, DriftMode::Plain, BracketMethod::ClosedForm).unwrap();
    assert_eq!(multi, one);
}

#[test]
fn windows_partition_the_grid() {
    let g = make_grid(1.0, 40).unwrap();
    for taus in [vec![0.3, 0.7], vec![0.5, 0.5, 0.1], vec![2.0, 0.0, 0.35, 0.9]] {
        let nodes = snapped_nodes(&g, &taus);
        let w = active_windows(&nodes);
        for i in 0..=g.steps() {
            let hits: Vec<_> = w.iter().filter(|x| x.start <= i && i < x.end).collect();
            assert_eq!(hits.len(), 1, "node {i} for {taus:?}");
            let expected: Vec<usize> = (0..taus.len()).filter(|&j| nodes[j] <= i).collect();
            assert_eq!(hits[0].subset, Subset::from_indices(&expected));
        }
    }
}

#[test]
fn telescope_and_gluing_hold_on_random_paths() {
    let g = make_grid(1.0, 20).unwrap();
    let e = simulate_brownian(g, 1, 30, 8).unwrap();
    let w = e.component(0).unwrap();
    let taus: Vec<f64> = (0..90).map(|k| ((k * 37) % 23) as f64 / 20.0).collect();
    assert!(telescope_residual(&w, &taus, 3).unwrap() <= 1e-12);
    assert_eq!(gluing_residual(&w, &taus, 3, 0.4).unwrap(), 0.0);
    let one: Vec<f64> = taus[..30].to_vec();
    assert!(telescope_residual(&w, &one, 1).unwrap() <= 1e-15);
    assert!(telescope_residual(&w, &taus, 2).is_err());
}

#[test]
fn two_time_after_drift_follows_the_first_component_only() {
    let g = make_grid(1.0, 40).unwrap();
    let e = simulate_brownian(g, 2, 200, 12).unwrap();
    let fam = DriverFamily::new(2, 2.0, false).unwrap();
    let fs = sample_family(&fam, &e, 13).unwrap();
    let d = multi_drift(&LocalMartingale::brownian(0), &fam, &e, &fs).unwrap();
    assert!(d.additivity_residual() < 1e-13);
    for (p, s) in fs.iter().enumerate() {
        let k1 = g.snap_up(s.taus[0]);
        for i in 0..g.steps() {
            let inc = d.drift_after.value(p, i + 1) - d.drift_after.value(p, i);
            let oracle = if i >= k1 {
                (s.taus[0].ln() - e.value(p, i, 0)) / (2.0 - g.node(i)) * g.dt()
            } else {
                0.0
            };
            assert!((inc - oracle).abs() < 1e-12);
        }
    }
}

#[test]
fn marked_counting_process() {
    let g = make_grid(1.0, 10).unwrap();
    let s = vec![FamilySample {
        taus: vec![0.3, 0.7],
        marks: Some(vec![1.0, -1.0]),
    }];
    let n = n_process(&g, &s).unwrap();
    assert_eq!(n.value(0, 2), 0.0);
    assert_eq!(n.value(0, 5), 1.0);
    assert_eq!(n.value(0, 10), 0.0);
    let plain = vec![FamilySample {
        taus: vec![0.3, 0.7, 1.5],
        marks: Some(vec![1.0; 3]),
    }];
    assert_eq!(n_process(&g, &plain).unwrap().terminal(), vec![2.0]);
    let unmarked = vec![FamilySample { taus: vec![0.3], marks: None }];
    assert!(n_process(&g, &unmarked).is_err());
}

#[test]
fn mark_at_rho_uses_the_first_time_outside() {
    let taus = [0.5, 0.2, 0.9];
    let marks = [1.0, -1.0, 1.0];
    assert_eq!(mark_at_rho(&taus, &marks, Subset::EMPTY), Some(-1.0));
    assert_eq!(mark_at_rho(&taus, &marks, Subset::from_indices(&[1])), Some(1.0));
    assert_eq!(mark_at_rho(&taus, &marks, Subset::full(3)), None);
}

#[test]
fn subset_count_limit() {
    let g = make_grid(1.0, 4).unwrap();
    let w = GridProcess::zeros(g, 1);
    assert!(matches!(telescope_residual(&w, &[0.1; 11], 11), Err(crate::Error::TooManyTimes(11))));
}

