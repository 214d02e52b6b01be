use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Deserialize;

use sdon::cavity::{run_cavity_case, CavityCaseResult, CavityParams, PoissonMode};
use sdon::error::{Error, Result};
use sdon::ga::{run_ga, GaConfig, InverseTarget};
use sdon::io::checkpoint::{read_checkpoint, write_checkpoint};
use sdon::io::csv::{export_fields_csv, import_dataset_csv, read_series_csv, write_series_csv};
use sdon::io::{read_dataset, write_dataset, DatasetContainer, DType, FieldSnapshots};
use sdon::model::{ModelConfig, SDeepOnet, Surrogate};
use sdon::plasticity::{bar_coords, run_bar_case, BarGeometry, BarRunParams, Material};
use sdon::rbi::{sample_profiles, sample_times};
use sdon::train::{
    default_scaler_kind, evaluate, prepare, split_dataset, train, write_loss_curve, TrainConfig,
};

use crate::{Command, GenCommon};

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::GenCavity {
            common,
            grid,
            steps,
            snapshots,
            dt,
            rho,
            mu,
            bounds,
            poisson_mode,
        } => gen_cavity(common, &grid, steps, snapshots, dt, rho, mu, &bounds, &poisson_mode),
        Command::GenBar {
            common,
            snapshots,
            nodes,
            substeps,
            bounds,
            t_total,
        } => gen_bar(common, snapshots, nodes, substeps, &bounds, t_total),
        Command::Train {
            data,
            out,
            config,
            epochs,
            batch_size,
            lr,
            seed,
            split_fraction,
            shuffle,
            hd,
            branch_hidden,
            dtype,
        } => cmd_train(TrainArgs {
            data,
            out,
            config,
            epochs,
            batch_size,
            lr,
            seed,
            split_fraction,
            shuffle,
            hd,
            branch_hidden,
            dtype,
        }),
        Command::Eval {
            data,
            model,
            report,
            subset,
            split_seed,
            split_fraction,
        } => cmd_eval(&data, &model, &report, &subset, split_seed, split_fraction),
        Command::Infer {
            model,
            load_csv,
            coords_csv,
            out,
        } => cmd_infer(&model, &load_csv, &coords_csv, &out),
        Command::Invert {
            model,
            target_csv,
            out,
            ga_config,
            generations,
            population,
            parents,
            bounds,
            seed,
            component,
            reference_load_csv,
        } => cmd_invert(InvertArgs {
            model,
            target_csv,
            out,
            ga_config,
            generations,
            population,
            parents,
            bounds,
            seed,
            component,
            reference_load_csv,
        }),
        Command::Export { data, out } => {
            let container = read_dataset(&data)?;
            export_fields_csv(&container, &out)
        }
        Command::Import {
            dir,
            components,
            t_total,
            out,
        } => {
            let names: Vec<String> = components.split(',').map(|s| s.trim().to_string()).collect();
            let container = import_dataset_csv(&dir, names, t_total)?;
            write_dataset(&container, &out)?;
            write_record(&out, "import", serde_json::json!({"from": dir.display().to_string()}))
        }
    }
}

fn usage(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

fn parse_pair(text: &str, what: &str) -> Result<[f64; 2]> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(usage(format!("{what} must be lo,hi")));
    }
    let lo: f64 = parts[0].parse().map_err(|_| usage(format!("bad {what}: {text}")))?;
    let hi: f64 = parts[1].parse().map_err(|_| usage(format!("bad {what}: {text}")))?;
    Ok([lo, hi])
}

fn parse_grid(text: &str) -> Result<(usize, usize)> {
    let parts: Vec<&str> = text.split(['x', 'X']).collect();
    if parts.len() != 2 {
        return Err(usage("grid must be NXxNY, e.g. 121x41"));
    }
    Ok((
        parts[0].parse().map_err(|_| usage(format!("bad grid: {text}")))?,
        parts[1].parse().map_err(|_| usage(format!("bad grid: {text}")))?,
    ))
}

fn parse_poisson(text: &str) -> Result<PoissonMode> {
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        ["fixed", k] => Ok(PoissonMode::FixedIterations(
            k.parse().map_err(|_| usage(format!("bad sweep count: {k}")))?,
        )),
        ["tol", tol, max] => Ok(PoissonMode::Tolerance {
            tol: tol.parse().map_err(|_| usage(format!("bad tolerance: {tol}")))?,
            max_iter: max.parse().map_err(|_| usage(format!("bad max_iter: {max}")))?,
        }),
        _ => Err(usage("poisson-mode must be fixed:K or tol:TOL:MAX_ITER")),
    }
}

/// Every run leaves its fully-resolved configuration next to its outputs.
fn write_record(out: &Path, command: &str, params: serde_json::Value) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(format!("creating {}", out.display()), e))?;
    let record = serde_json::json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "params": params,
    });
    let path = out.join("run_record.json");
    std::fs::write(&path, serde_json::to_string_pretty(&record)?)
        .map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

/// Run per-case work either sequentially (threads <= 1, the reproducibility
/// default) or on a bounded rayon pool. Case order is preserved either way.
fn run_cases<I, O>(
    threads: usize,
    inputs: &[I],
    work: impl Fn(&I) -> Result<O> + Sync,
) -> Result<Vec<O>>
where
    I: Sync,
    O: Send,
{
    if threads <= 1 {
        return inputs.iter().map(&work).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| usage(format!("thread pool: {e}")))?;
    pool.install(|| inputs.par_iter().map(&work).collect())
}

#[allow(clippy::too_many_arguments)]
fn gen_cavity(
    common: GenCommon,
    grid: &str,
    steps: usize,
    snapshots: usize,
    dt: f64,
    rho: f64,
    mu: f64,
    bounds: &str,
    poisson_mode: &str,
) -> Result<()> {
    let (nx, ny) = parse_grid(grid)?;
    let bounds = parse_pair(bounds, "bounds")?;
    let params = CavityParams {
        nx,
        ny,
        rho,
        mu,
        dt,
        n_steps: steps,
        n_snapshots: snapshots,
        poisson: parse_poisson(poisson_mode)?,
        ..CavityParams::reference()
    };
    params.validate()?;
    let profiles = sample_profiles(common.seed, common.cases, bounds, snapshots, params.t_total())?;

    let results: Vec<CavityCaseResult> =
        run_cases(common.threads, &profiles, |p| run_cavity_case(p, &params))?;

    let mut diag = String::from("case,step,cfl,divergence_norm,poisson_residual\n");
    for (case, result) in results.iter().enumerate() {
        for d in &result.diagnostics {
            diag.push_str(&format!(
                "{case},{},{},{},{}\n",
                d.step, d.cfl, d.divergence_norm, d.poisson_residual
            ));
        }
    }

    let loads: Vec<f64> = profiles.iter().flat_map(|p| p.samples.clone()).collect();
    let cases: Vec<FieldSnapshots> = results.into_iter().map(|r| r.snapshots).collect();
    let container = DatasetContainer::assemble(
        "cavity",
        params.coords(),
        loads,
        cases,
        vec!["P".into(), "u".into(), "v".into()],
        params.t_total(),
        serde_json::json!({
            "seed": common.seed, "bounds": bounds, "grid": [nx, ny],
            "dt": dt, "steps": steps, "rho": rho, "mu": mu,
            "poisson": poisson_mode,
        }),
    )?;
    write_dataset(&container, &common.out)?;
    let diag_path = common.out.join("diagnostics.csv");
    std::fs::write(&diag_path, diag)
        .map_err(|e| Error::io(format!("writing {}", diag_path.display()), e))?;
    write_record(
        &common.out,
        "gen-cavity",
        serde_json::json!({
            "cases": common.cases, "seed": common.seed, "grid": grid,
            "steps": steps, "snapshots": snapshots, "dt": dt, "rho": rho,
            "mu": mu, "bounds": bounds, "poisson_mode": poisson_mode,
            "threads": common.threads,
        }),
    )
}

fn gen_bar(
    common: GenCommon,
    snapshots: usize,
    nodes: usize,
    substeps: usize,
    bounds: &str,
    t_total: f64,
) -> Result<()> {
    let bounds = parse_pair(bounds, "bounds")?;
    let profiles = sample_profiles(common.seed, common.cases, bounds, snapshots, t_total)?;
    let mat = Material::steel();
    let geom = BarGeometry::default();
    let params = BarRunParams {
        n_nodes: nodes,
        n_sub: substeps,
    };
    let cases: Vec<FieldSnapshots> =
        run_cases(common.threads, &profiles, |p| run_bar_case(p, &mat, &geom, &params))?;
    let loads: Vec<f64> = profiles.iter().flat_map(|p| p.samples.clone()).collect();
    let container = DatasetContainer::assemble(
        "bar1d",
        bar_coords(nodes),
        loads,
        cases,
        vec!["vonMises".into(), "eqps".into()],
        t_total,
        serde_json::json!({
            "seed": common.seed, "bounds": bounds, "snapshots": snapshots,
            "nodes": nodes, "substeps": substeps, "t_total": t_total,
            "material": {"E": mat.e, "nu": mat.nu, "sigma_y0": mat.sigma_y0, "H": mat.hardening},
            "length_mm": geom.length,
        }),
    )?;
    write_dataset(&container, &common.out)?;
    write_record(
        &common.out,
        "gen-bar",
        serde_json::json!({
            "cases": common.cases, "seed": common.seed, "snapshots": snapshots,
            "nodes": nodes, "substeps": substeps, "bounds": bounds,
            "t_total": t_total, "threads": common.threads,
        }),
    )
}

#[derive(Debug, Deserialize, Default)]
struct FileSettings {
    #[serde(default)]
    train: FileTrain,
    #[serde(default)]
    model: FileModel,
}

#[derive(Debug, Deserialize, Default)]
struct FileTrain {
    epochs: Option<usize>,
    batch_size: Option<usize>,
    lr: Option<f64>,
    seed: Option<u64>,
    split_fraction: Option<f64>,
    shuffle: Option<bool>,
}

#[derive(Debug, Deserialize, Default)]
struct FileModel {
    hd: Option<usize>,
    branch_hidden: Option<Vec<usize>>,
}

fn read_toml<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    toml::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

pub(crate) struct TrainArgs {
    pub data: PathBuf,
    pub out: PathBuf,
    pub config: Option<PathBuf>,
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub lr: Option<f64>,
    pub seed: Option<u64>,
    pub split_fraction: Option<f64>,
    pub shuffle: Option<bool>,
    pub hd: Option<usize>,
    pub branch_hidden: Option<String>,
    pub dtype: String,
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let file: FileSettings = match &args.config {
        Some(path) => read_toml(path)?,
        None => FileSettings::default(),
    };
    let defaults = TrainConfig::default();
    let cfg = TrainConfig {
        epochs: args.epochs.or(file.train.epochs).unwrap_or(defaults.epochs),
        batch_size: args
            .batch_size
            .or(file.train.batch_size)
            .unwrap_or(defaults.batch_size),
        lr: args.lr.or(file.train.lr).unwrap_or(defaults.lr),
        seed: args.seed.or(file.train.seed).unwrap_or(defaults.seed),
        split_fraction: args
            .split_fraction
            .or(file.train.split_fraction)
            .unwrap_or(defaults.split_fraction),
        shuffle: args.shuffle.or(file.train.shuffle).unwrap_or(defaults.shuffle),
    };
    let hd = args.hd.or(file.model.hd).unwrap_or(32);
    let branch_hidden: Vec<usize> = match &args.branch_hidden {
        Some(text) => text
            .split(',')
            .map(|s| s.trim().parse().map_err(|_| usage(format!("bad branch width: {s}"))))
            .collect::<Result<Vec<usize>>>()?,
        None => file.model.branch_hidden.clone().unwrap_or(vec![64, 32, 32, 64]),
    };
    let dtype = match args.dtype.as_str() {
        "f64" => DType::F64,
        "f32" => DType::F32,
        other => return Err(usage(format!("dtype must be f64 or f32, got {other}"))),
    };

    let dataset = read_dataset(&args.data)?;
    let m = &dataset.manifest;
    let mut config = ModelConfig::with_hd(hd, m.s, m.c);
    config.branch_hidden = branch_hidden;
    let data = prepare(&dataset, default_scaler_kind(&m.problem))?;
    let (train_idx, test_idx) = split_dataset(m.n_cases, cfg.seed, cfg.split_fraction)?;

    let mut model = SDeepOnet::init(config.clone(), cfg.seed)?;
    let outcome = train(&mut model, &data, &train_idx, &cfg)?;

    let surrogate = Surrogate {
        model,
        field_scaler: data.field_scaler.clone(),
        load_scale: data.load_scale,
        coord_norm: data.coord_norm.clone(),
        problem: m.problem.clone(),
        component_names: m.component_names.clone(),
        t_total: m.t_total,
    };
    write_checkpoint(&surrogate, &args.out, dtype)?;
    write_loss_curve(&outcome.loss_curve, args.out.join("loss_curve.csv"))?;
    write_record(
        &args.out,
        "train",
        serde_json::json!({
            "data": args.data.display().to_string(),
            "config_file": args.config.as_ref().map(|p| p.display().to_string()),
            "train": cfg,
            "model": config,
            "dtype": args.dtype,
            "n_train_cases": train_idx.len(),
            "n_test_cases": test_idx.len(),
        }),
    )
}

fn cmd_eval(
    data: &Path,
    model: &Path,
    report_dir: &Path,
    subset: &str,
    split_seed: u64,
    split_fraction: f64,
) -> Result<()> {
    let dataset = read_dataset(data)?;
    let loaded = read_checkpoint(model)?;
    if loaded.manifest.dtype == DType::F32 {
        eprintln!("note: checkpoint stores f32 parameters; inference upcasts to f64");
    }
    let indices: Vec<usize> = match subset {
        "all" => (0..dataset.manifest.n_cases).collect(),
        "train" => split_dataset(dataset.manifest.n_cases, split_seed, split_fraction)?.0,
        "test" => split_dataset(dataset.manifest.n_cases, split_seed, split_fraction)?.1,
        other => return Err(usage(format!("subset must be all|train|test, got {other}"))),
    };
    let report = evaluate(&loaded.surrogate, &dataset, &indices)?;
    std::fs::create_dir_all(report_dir)
        .map_err(|e| Error::io(format!("creating {}", report_dir.display()), e))?;
    let json_path = report_dir.join("report.json");
    std::fs::write(&json_path, report.to_json()?)
        .map_err(|e| Error::io(format!("writing {}", json_path.display()), e))?;
    report.write_csvs(report_dir)?;
    for comp in &report.components {
        println!(
            "{}: rel_l2 = {:.4}%  mae = {:.6e}  r2 = {:.6}",
            comp.name, comp.rel_l2_pct, comp.mae, comp.r2
        );
    }
    write_record(
        report_dir,
        "eval",
        serde_json::json!({
            "data": data.display().to_string(),
            "model": model.display().to_string(),
            "subset": subset,
            "split_seed": split_seed,
            "split_fraction": split_fraction,
        }),
    )
}

/// Linearly resample a (t, value) series onto the surrogate's output times.
fn resample(series: &[(f64, f64)], t_total: f64, s: usize) -> Result<Vec<f64>> {
    let mut sorted = series.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let times = sample_times(t_total, s);
    let slack = 1e-9 * t_total.max(1.0);
    times
        .iter()
        .map(|&t| {
            if t < sorted[0].0 - slack || t > sorted[sorted.len() - 1].0 + slack {
                return Err(usage(format!(
                    "series covers [{}, {}] but the model needs t = {t}",
                    sorted[0].0,
                    sorted[sorted.len() - 1].0
                )));
            }
            let after = sorted.partition_point(|(st, _)| *st < t);
            if after == 0 {
                return Ok(sorted[0].1);
            }
            if after == sorted.len() {
                return Ok(sorted[sorted.len() - 1].1);
            }
            let (t0, v0) = sorted[after - 1];
            let (t1, v1) = sorted[after];
            if t1 == t0 {
                return Ok(v1);
            }
            Ok(v0 + (v1 - v0) * (t - t0) / (t1 - t0))
        })
        .collect()
}

fn read_coords_csv(path: &Path) -> Result<Vec<f64>> {
    let rows = read_series_csv_3(path)?;
    let n = rows.len();
    let mut coords = vec![f64::NAN; n * 2];
    for (node, x, y) in rows {
        if node >= n {
            return Err(usage(format!("coords node index {node} out of range")));
        }
        coords[node * 2] = x;
        coords[node * 2 + 1] = y;
    }
    if coords.iter().any(|v| v.is_nan()) {
        return Err(usage("coords.csv leaves node indices unfilled"));
    }
    Ok(coords)
}

fn read_series_csv_3(path: &Path) -> Result<Vec<(usize, f64, f64)>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if i == 0 && cells.iter().any(|c| c.parse::<f64>().is_err()) {
            continue;
        }
        if cells.len() != 3 {
            return Err(Error::MalformedCsv {
                path: path.display().to_string(),
                line: i + 1,
                reason: format!("expected 3 columns, found {}", cells.len()),
            });
        }
        let parse = |c: &str| -> Result<f64> {
            c.parse().map_err(|_| Error::MalformedCsv {
                path: path.display().to_string(),
                line: i + 1,
                reason: format!("'{c}' is not a number"),
            })
        };
        let node = parse(cells[0])?;
        out.push((node as usize, parse(cells[1])?, parse(cells[2])?));
    }
    Ok(out)
}

fn cmd_infer(model: &Path, load_csv: &Path, coords_csv: &Path, out: &Path) -> Result<()> {
    let loaded = read_checkpoint(model)?;
    let surrogate = &loaded.surrogate;
    let series = read_series_csv(load_csv)?;
    let load = resample(&series, surrogate.t_total, surrogate.model.config.s)?;
    let coords = read_coords_csv(coords_csv)?;
    let fields = surrogate.predict(&load, &coords)?;

    std::fs::create_dir_all(out).map_err(|e| Error::io(format!("creating {}", out.display()), e))?;
    let (s, c) = (surrogate.model.config.s, surrogate.model.config.c);
    let n = coords.len() / 2;
    let mut text = String::from("case,node,step,component,value\n");
    for node in 0..n {
        for step in 0..s {
            for comp in 0..c {
                text.push_str(&format!(
                    "0,{node},{step},{comp},{}\n",
                    fields.as_slice()[(node * s + step) * c + comp]
                ));
            }
        }
    }
    let path = out.join("fields.csv");
    std::fs::write(&path, text).map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
    write_record(
        out,
        "infer",
        serde_json::json!({
            "model": model.display().to_string(),
            "load_csv": load_csv.display().to_string(),
            "coords_csv": coords_csv.display().to_string(),
        }),
    )
}

#[derive(Debug, Deserialize, Default)]
struct FileGa {
    #[serde(default)]
    ga: FileGaInner,
}

#[derive(Debug, Deserialize, Default)]
struct FileGaInner {
    generations: Option<usize>,
    population: Option<usize>,
    parents_mating: Option<usize>,
    gene_bounds: Option<[f64; 2]>,
    mutation_fraction: Option<f64>,
    mutation_scale: Option<f64>,
    elitism: Option<usize>,
    seed: Option<u64>,
}

pub(crate) struct InvertArgs {
    pub model: PathBuf,
    pub target_csv: PathBuf,
    pub out: PathBuf,
    pub ga_config: Option<PathBuf>,
    pub generations: Option<usize>,
    pub population: Option<usize>,
    pub parents: Option<usize>,
    pub bounds: Option<String>,
    pub seed: Option<u64>,
    pub component: usize,
    pub reference_load_csv: Option<PathBuf>,
}

fn cmd_invert(args: InvertArgs) -> Result<()> {
    let loaded = read_checkpoint(&args.model)?;
    let surrogate = &loaded.surrogate;
    let s = surrogate.model.config.s;

    let file: FileGa = match &args.ga_config {
        Some(path) => read_toml(path)?,
        None => FileGa::default(),
    };
    let bounds = match &args.bounds {
        Some(text) => parse_pair(text, "bounds")?,
        None => file.ga.gene_bounds.unwrap_or([-5.5, 5.5]),
    };
    let mut cfg = GaConfig::new(bounds);
    cfg.generations = args.generations.or(file.ga.generations).unwrap_or(cfg.generations);
    cfg.population = args.population.or(file.ga.population).unwrap_or(cfg.population);
    cfg.parents_mating = args.parents.or(file.ga.parents_mating).unwrap_or(cfg.parents_mating);
    cfg.mutation_fraction = file.ga.mutation_fraction.unwrap_or(cfg.mutation_fraction);
    cfg.mutation_scale = file.ga.mutation_scale.unwrap_or(cfg.mutation_scale);
    cfg.elitism = file.ga.elitism.unwrap_or(cfg.elitism);
    cfg.seed = args.seed.or(file.ga.seed).unwrap_or(cfg.seed);

    let series = read_series_csv(&args.target_csv)?;
    let sigma_ref = resample(&series, surrogate.t_total, s)?;
    let target = InverseTarget {
        sigma_ref: sigma_ref.clone(),
    };

    // Query the surrogate at the coordinates it was trained over; for the
    // replicated-node problems that is the stored unit-box layout.
    let coords = default_query_coords(surrogate);
    let outcome = run_ga(surrogate, &coords, &target, args.component, &cfg)?;

    std::fs::create_dir_all(&args.out)
        .map_err(|e| Error::io(format!("creating {}", args.out.display()), e))?;
    let history: Vec<Vec<f64>> = outcome
        .best_history
        .iter()
        .zip(outcome.mean_history.iter())
        .enumerate()
        .map(|(g, (best, mean))| vec![g as f64 + 1.0, *best, *mean])
        .collect();
    write_series_csv(args.out.join("ga_history.csv"), "generation,best_fitness,mean_fitness", &history)?;

    let identified = sdon::ga::genome_to_profile(&outcome.best_genome, surrogate.t_total, s)?;
    let fields = surrogate.predict(&identified.samples, &coords)?;
    let identified_stress = sdon::ga::mean_stress_history(&fields, args.component)?;
    let reference_load = match &args.reference_load_csv {
        Some(path) => Some(resample(&read_series_csv(path)?, surrogate.t_total, s)?),
        None => None,
    };
    let times = sample_times(surrogate.t_total, s);
    let rows: Vec<Vec<f64>> = (0..s)
        .map(|k| {
            vec![
                times[k],
                identified.samples[k],
                reference_load.as_ref().map_or(f64::NAN, |r| r[k]),
                identified_stress[k],
                sigma_ref[k],
            ]
        })
        .collect();
    write_series_csv(
        args.out.join("comparison.csv"),
        "t,identified_load,reference_load,identified_stress,reference_stress",
        &rows,
    )?;
    let genome_path = args.out.join("best_genome.json");
    std::fs::write(
        &genome_path,
        serde_json::to_string_pretty(&serde_json::json!({
            "genome": outcome.best_genome,
            "fitness": outcome.best_fitness,
        }))?,
    )
    .map_err(|e| Error::io(format!("writing {}", genome_path.display()), e))?;
    write_record(
        &args.out,
        "invert",
        serde_json::json!({
            "model": args.model.display().to_string(),
            "target_csv": args.target_csv.display().to_string(),
            "ga": cfg,
            "component": args.component,
        }),
    )
}

/// Physical-space query point matching the training layout for single-node
/// surrogates; callers with real geometries use `infer --coords-csv`.
fn default_query_coords(surrogate: &Surrogate) -> Vec<f64> {
    let norm = &surrogate.coord_norm;
    vec![
        norm.min[0] + 0.5 * norm.range[0],
        norm.min[1] + 0.5 * norm.range[1],
    ]
}
