//! Longer cavity runs: steady-state approach and paper-scale shape contract.

use sdon::cavity::{run_cavity_case, run_cavity_with, CavityParams, PoissonMode};
use sdon::rbi::sample_profiles;

#[test]
fn constant_lid_approaches_steady_state() {
    let params = CavityParams {
        nx: 61,
        ny: 21,
        dt: 2e-3,
        n_steps: 5000,
        n_snapshots: 25,
        poisson: PoissonMode::FixedIterations(50),
        ..CavityParams::reference()
    };
    let result = run_cavity_with(&params, |_| Ok(1.0)).unwrap();
    let snaps = &result.snapshots;
    let n = params.n_nodes();
    let mut diff_sq = 0.0;
    let mut norm_sq = 0.0;
    for node in 0..n {
        let last = snaps.at(24, node, 1);
        let prev = snaps.at(23, node, 1);
        diff_sq += (last - prev) * (last - prev);
        norm_sq += last * last;
    }
    let rel = (diff_sq / norm_sq).sqrt();
    assert!(rel < 1e-3, "u-field still changing: rel change {rel:.3e}");
    // the flow actually developed
    assert!(norm_sq.sqrt() > 1.0);
}

#[test]
fn paper_grid_snapshot_shapes() {
    let params = CavityParams {
        n_steps: 50,
        n_snapshots: 25,
        ..CavityParams::reference()
    };
    assert_eq!(params.n_nodes(), 4961);
    let profile = sample_profiles(3, 1, [-2.0, 2.0], 25, params.t_total())
        .unwrap()
        .remove(0);
    let result = run_cavity_case(&profile, &params).unwrap();
    assert_eq!(result.snapshots.s, 25);
    assert_eq!(result.snapshots.n, 4961);
    assert_eq!(result.snapshots.c, 3);
    assert_eq!(result.snapshots.data.len(), 25 * 4961 * 3);
    assert_eq!(result.diagnostics.len(), 25);
}

