//! Scratch probe: training feasibility for the overfit and generalization
//! targets.

use std::time::Instant;

use sdon::cavity::{run_cavity_case, CavityParams, PoissonMode};
use sdon::io::{DatasetContainer, FieldSnapshots};
use sdon::model::{ModelConfig, SDeepOnet, Surrogate};
use sdon::plasticity::{bar_coords, run_bar_case, BarGeometry, BarRunParams, Material};
use sdon::rbi::sample_profiles;
use sdon::train::{default_scaler_kind, evaluate, prepare, split_dataset, train, TrainConfig};

fn gen_cavity(n_cases: usize, seed: u64) -> DatasetContainer {
    let params = CavityParams {
        nx: 61,
        ny: 21,
        dt: 1e-3,
        n_steps: 2000,
        n_snapshots: 25,
        poisson: PoissonMode::FixedIterations(50),
        ..CavityParams::reference()
    };
    let profiles = sample_profiles(seed, n_cases, [-2.0, 2.0], 25, params.t_total()).unwrap();
    let start = Instant::now();
    let cases: Vec<FieldSnapshots> = profiles
        .iter()
        .map(|p| run_cavity_case(p, &params).unwrap().snapshots)
        .collect();
    println!("cavity gen: {n_cases} cases in {:?}", start.elapsed());
    let loads: Vec<f64> = profiles.iter().flat_map(|p| p.samples.clone()).collect();
    DatasetContainer::assemble(
        "cavity",
        params.coords(),
        loads,
        cases,
        vec!["P".into(), "u".into(), "v".into()],
        params.t_total(),
        serde_json::json!({"seed": seed}),
    )
    .unwrap()
}

fn gen_bar(n_cases: usize, seed: u64) -> DatasetContainer {
    let profiles = sample_profiles(seed, n_cases, [-5.5, 5.5], 40, 1.0).unwrap();
    let mat = Material::steel();
    let geom = BarGeometry::default();
    let params = BarRunParams::default();
    let cases: Vec<FieldSnapshots> = profiles
        .iter()
        .map(|p| run_bar_case(p, &mat, &geom, &params).unwrap())
        .collect();
    let loads: Vec<f64> = profiles.iter().flat_map(|p| p.samples.clone()).collect();
    DatasetContainer::assemble(
        "bar1d",
        bar_coords(1),
        loads,
        cases,
        vec!["vonMises".into(), "eqps".into()],
        1.0,
        serde_json::json!({"seed": seed}),
    )
    .unwrap()
}

fn main() {
    let which = std::env::args().nth(1).unwrap_or_else(|| "both".into());

    if which.starts_with("cavity") {
        let (branch, lr): (Vec<usize>, f64) = match which.as_str() {
            "cavity2" => (vec![32, 16, 16, 32], 3e-3),
            "cavity3" => (vec![16, 8, 8, 16], 1e-2),
            "cavity4" => (vec![32, 16, 16, 32], 5e-3),
            "cavity5" => (vec![48, 24, 24, 48], 3e-3),
            "cavity6" => (vec![64, 32, 32, 64], 2e-3),
            _ => (vec![16, 8, 8, 16], 1e-3),
        };
        let dataset = gen_cavity(8, 11);
        let data = prepare(&dataset, default_scaler_kind("cavity")).unwrap();
        let config = ModelConfig {
            hd: 8,
            s: 25,
            c: 3,
            branch_hidden: branch,
            trunk_widths: vec![2, 32, 32, 24],
        };
        let mut model = SDeepOnet::init(config, 5).unwrap();
        let indices: Vec<usize> = (0..8).collect();
        let start = Instant::now();
        for round in 0..10 {
            let out = train(&mut model, &data, &indices, &TrainConfig {
                epochs: 2000,
                batch_size: 8,
                lr,
                seed: 1,
                split_fraction: 0.8,
                shuffle: true,
            })
            .unwrap();
            let surrogate = Surrogate {
                model: model.clone(),
                field_scaler: data.field_scaler.clone(),
                load_scale: data.load_scale,
                coord_norm: data.coord_norm.clone(),
                problem: "cavity".into(),
                component_names: dataset.manifest.component_names.clone(),
                t_total: 2.0,
            };
            let report = evaluate(&surrogate, &dataset, &indices).unwrap();
            let rels: Vec<String> = report
                .components
                .iter()
                .map(|c| format!("{}={:.2}%", c.name, c.rel_l2_pct))
                .collect();
            println!(
                "cavity step {}: loss={:.3e} rel_l2 [{}] elapsed={:?}",
                (round + 1) * 2000,
                out.loss_curve.last().unwrap(),
                rels.join(" "),
                start.elapsed()
            );
        }
    }

    if which.starts_with("bar") {
        let (branch, batch): (Vec<usize>, usize) = match which.as_str() {
            "bar2" => (vec![64, 32, 32, 64], 16),
            "bar3" => (vec![48, 24, 24, 48], 24),
            _ => (vec![32, 16, 16, 32], 32),
        };
        let dataset = gen_bar(200, 21);
        let data = prepare(&dataset, default_scaler_kind("bar1d")).unwrap();
        let (train_idx, test_idx) = split_dataset(200, 3, 0.8).unwrap();
        let config = ModelConfig {
            hd: 16,
            s: 40,
            c: 2,
            branch_hidden: branch,
            trunk_widths: vec![2, 101, 101, 101, 101, 101, 32],
        };
        let mut model = SDeepOnet::init(config, 7).unwrap();
        let start = Instant::now();
        for round in 0..12 {
            train(&mut model, &data, &train_idx, &TrainConfig {
                epochs: 3000,
                batch_size: batch,
                lr: 1e-3,
                seed: 2,
                split_fraction: 0.8,
                shuffle: true,
            })
            .unwrap();
            let surrogate = Surrogate {
                model: model.clone(),
                field_scaler: data.field_scaler.clone(),
                load_scale: data.load_scale,
                coord_norm: data.coord_norm.clone(),
                problem: "bar1d".into(),
                component_names: dataset.manifest.component_names.clone(),
                t_total: 1.0,
            };
            let report = evaluate(&surrogate, &dataset, &test_idx).unwrap();
            let stats: Vec<String> = report
                .components
                .iter()
                .map(|c| format!("{} r2={:.4} rel={:.1}%", c.name, c.r2, c.rel_l2_pct))
                .collect();
            println!(
                "bar step {}: [{}] elapsed={:?}",
                (round + 1) * 3000,
                stats.join(" | "),
                start.elapsed()
            );
        }
    }
}
