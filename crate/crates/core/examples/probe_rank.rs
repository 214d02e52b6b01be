//! Scratch probe: best-achievable pooled relative L2 per component when the
//! 8-case coarse cavity fields are approximated by HD basis fields plus a
//! scalar offset (the combiner's representational ceiling).

use sdon::cavity::{run_cavity_case, CavityParams, PoissonMode};
use sdon::rbi::sample_profiles;

fn main() {
    let params = CavityParams {
        nx: 61,
        ny: 21,
        dt: 1e-3,
        n_steps: 2000,
        n_snapshots: 25,
        poisson: PoissonMode::FixedIterations(50),
        ..CavityParams::reference()
    };
    let profiles = sample_profiles(11, 8, [-2.0, 2.0], 25, params.t_total()).unwrap();
    let cases: Vec<_> = profiles
        .iter()
        .map(|p| run_cavity_case(p, &params).unwrap().snapshots)
        .collect();
    let n = params.n_nodes();
    for (comp, name) in ["P", "u", "v"].iter().enumerate() {
        // rows = case-step snapshots, cols = nodes
        let rows = 8 * 25;
        let mut x = nalgebra::DMatrix::<f64>::zeros(rows, n);
        for (case, snap) in cases.iter().enumerate() {
            for step in 0..25 {
                for node in 0..n {
                    x[(case * 25 + step, node)] = snap.at(step, node, comp);
                }
            }
        }
        let total_sq: f64 = x.iter().map(|v| v * v).sum();
        let svd = x.clone().svd(false, false);
        let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        for rank in [4usize, 8, 9, 12, 16] {
            let kept: f64 = sv.iter().take(rank).map(|s| s * s).sum();
            let rel = ((total_sq - kept).max(0.0) / total_sq).sqrt() * 100.0;
            print!("{name} rank {rank}: {rel:.3}%   ");
        }
        println!();
    }
}
