//! Experiment execution: expands a config into (method, grid point,
//! repetition) cells, runs them on a bounded worker pool, and assembles
//! deterministic reports.
//!
//! Seeds: the dataset of a cell is derived from (master, "data", grid index
//! if the grid varies data parameters else 0, rep); the training stream from
//! (master, method, grid index, rep). Methods therefore compare on identical
//! data at the same grid point and repetition, and runs are order-independent.

use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;

use stg_core::baselines;
use stg_core::datagen::{self, Dataset, SplitTags};
use stg_core::gates::{self, GateKind};
use stg_core::losses::{LossKind, Targets};
use stg_core::metrics;
use stg_core::net::{self, Network, NetSpec};
use stg_core::optim::{self, TrainConfig, TrainData, TrainTrace};
use stg_core::rng::{derive_seed, Rng};

use crate::config::{ExperimentConfig, ExperimentKind, Grid, Method};
use crate::report::{self, RunReport};

#[derive(Debug)]
pub enum RunnerError {
    Config(String),
    Runtime(String),
}

impl std::fmt::Display for RunnerError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunnerError::Config(m) => write!(f, "config error: {m}"),
            RunnerError::Runtime(m) => write!(f, "runtime failure: {m}"),
        }
    }
}

impl std::error::Error for RunnerError {}

/// One unit of work.
#[derive(Clone, Debug)]
struct Cell {
    method: Option<Method>, // None = MI oracle cell
    grid_index: usize,
    grid_value: f64,
    n: usize,
    rep: usize,
    data_seed: u64,
    train_seed: u64,
}

fn expand_cells(cfg: &ExperimentConfig) -> Vec<Cell> {
    let master = cfg.experiment.master_seed;
    let reps = cfg.experiment.repetitions;
    let mut cells = Vec::new();
    if cfg.experiment.name == ExperimentKind::MiOracle {
        for rep in 0..reps {
            cells.push(Cell {
                method: None,
                grid_index: 0,
                grid_value: 0.0,
                n: cfg.data.n,
                rep,
                data_seed: derive_seed(master, "data", 0, rep as u64),
                train_seed: derive_seed(master, "mi_oracle", 0, rep as u64),
            });
        }
        return cells;
    }
    let grid = cfg.grid();
    let grid_points: Vec<(usize, f64, usize)> = match &grid {
        Grid::Single => vec![(0, f64::NAN, cfg.data.n)],
        Grid::Lambda(ls) => ls
            .iter()
            .enumerate()
            .map(|(i, &l)| (i, l, cfg.data.n))
            .collect(),
        Grid::SampleSize(ns) => ns
            .iter()
            .enumerate()
            .map(|(i, &n)| (i, n as f64, n))
            .collect(),
    };
    let data_grid_matters = matches!(grid, Grid::SampleSize(_));
    for &method in &cfg.experiment.methods {
        for &(gi, gv, n) in &grid_points {
            for rep in 0..reps {
                let data_gi = if data_grid_matters { gi as u64 } else { 0 };
                cells.push(Cell {
                    method: Some(method),
                    grid_index: gi,
                    grid_value: gv,
                    n,
                    rep,
                    data_seed: derive_seed(master, "data", data_gi, rep as u64),
                    train_seed: derive_seed(master, method.as_str(), gi as u64, rep as u64),
                });
            }
        }
    }
    cells
}

fn build_dataset(cfg: &ExperimentConfig, cell: &Cell) -> stg_core::Result<Dataset> {
    let d = &cfg.data;
    let mut rng = Rng::new(cell.data_seed);
    match cfg.experiment.name {
        ExperimentKind::Xor | ExperimentKind::Stability => datagen::gen_xor(cell.n, d.d, &mut rng),
        ExperimentKind::TwoMoons => datagen::gen_two_moons(cell.n, d.d, &mut rng),
        ExperimentKind::Friedman => datagen::gen_friedman_mod(cell.n, d.d, &mut rng),
        ExperimentKind::MadelonLike => Ok(datagen::gen_madelon_like_with(
            cell.n,
            d.n_informative,
            d.n_combined,
            d.n_nuisance,
            d.flip_frac,
            d.separation,
            &mut rng,
        )?
        .dataset),
        ExperimentKind::LinregRecovery | ExperimentKind::LinregCorrelated => {
            let correlated = cfg.experiment.name == ExperimentKind::LinregCorrelated;
            Ok(datagen::gen_sparse_linear(cell.n, d.d, correlated, d.noise_var, &mut rng)?.0)
        }
        ExperimentKind::CoxSynthetic => datagen::gen_survival_with(
            cell.n,
            d.d,
            d.informative_count,
            d.censor_frac,
            d.effect,
            &mut rng,
        ),
        ExperimentKind::MiOracle => datagen::gen_xor(cell.n, d.d, &mut rng),
        ExperimentKind::CustomCsv => {
            let path = d.csv_path.as_ref().expect("validated");
            let schema = d.csv_schema.expect("validated");
            let mut ds = datagen::load_csv(path, schema)?;
            ds.splits = SplitTags::random(ds.n(), d.test_frac, d.valid_frac, &mut rng);
            Ok(ds)
        }
    }
}

/// Effective regularization for a cell: lambda-grid value, or the
/// sample-size schedule alpha_N (times c_scale for gated methods), or the
/// configured constant.
fn resolve_lambda(cfg: &ExperimentConfig, cell: &Cell, method: Method) -> stg_core::Result<f64> {
    match cfg.grid() {
        Grid::Lambda(_) => Ok(cell.grid_value),
        Grid::SampleSize(_) => {
            let k = datagen::sparsity_rule(cfg.data.d);
            let alpha = baselines::alpha_schedule(cell.n, cfg.data.d, k, cfg.data.noise_var)?;
            Ok(match method {
                Method::Lasso => alpha,
                _ => cfg.train.c_scale * alpha,
            })
        }
        Grid::Single => Ok(cfg.lambda_for(method)),
    }
}

fn n_classes(y: &Targets) -> usize {
    match y {
        Targets::Class(labels) => labels.iter().max().map(|&m| m + 1).unwrap_or(2).max(2),
        _ => 1,
    }
}

fn gate_kind(method: Method) -> GateKind {
    match method {
        Method::Stg => GateKind::Stg,
        Method::Hc => GateKind::Hc,
        Method::Dnc => GateKind::Dnc,
        Method::Lasso => unreachable!("lasso has no gate"),
    }
}

/// Rows used for final evaluation: test split when present, else train.
fn eval_rows(ds: &Dataset) -> Vec<usize> {
    if ds.splits.test.is_empty() {
        ds.splits.train.clone()
    } else {
        ds.splits.test.clone()
    }
}

fn run_cell(cfg: &ExperimentConfig, cell: &Cell) -> RunReport {
    let start = Instant::now();
    let mut report = RunReport {
        method: cell
            .method
            .map(|m| m.as_str().to_string())
            .unwrap_or_else(|| "mi_oracle".to_string()),
        grid_index: cell.grid_index,
        grid_value: cell.grid_value,
        rep: cell.rep,
        data_seed: cell.data_seed,
        train_seed: cell.train_seed,
        ..RunReport::default()
    };
    if report.grid_value.is_nan() {
        report.grid_value = 0.0;
    }
    match try_run_cell(cfg, cell, &mut report) {
        Ok(()) => {}
        Err(e) => {
            report.failed = true;
            report.error = Some(e.to_string());
        }
    }
    report.runtime_ms = start.elapsed().as_millis();
    eprintln!(
        "[run] {} grid={} rep={} {} ({} ms)",
        report.method,
        report.grid_index,
        report.rep,
        if report.failed { "FAILED" } else { "ok" },
        report.runtime_ms
    );
    report
}

fn try_run_cell(
    cfg: &ExperimentConfig,
    cell: &Cell,
    report: &mut RunReport,
) -> stg_core::Result<()> {
    let ds = build_dataset(cfg, cell)?;
    let Some(method) = cell.method else {
        return run_mi_cell(cfg, &ds, report);
    };
    if cfg.grid() == Grid::Single {
        report.grid_value = cfg.lambda_for(method);
    }
    let lambda = resolve_lambda(cfg, cell, method)?;
    report.lambda = Some(lambda);

    let (selected, weights) = match method {
        Method::Lasso => run_lasso(cfg, &ds, lambda, report)?,
        _ => run_gated(cfg, &ds, method, lambda, cell.train_seed, report)?,
    };
    report.selected_count = Some(selected.len());
    report.selected = Some(RunReport::render_selected(&selected));

    if !ds.informative.is_empty() {
        let (precision, recall, f1) = metrics::selection_f1(&selected, &ds.informative, ds.d())?;
        report.precision = Some(precision);
        report.recall = Some(recall);
        report.f1 = Some(f1);
        report.median_rank = Some(metrics::median_rank(&weights, &ds.informative)?);
        if weights.iter().any(|&w| w > 0.0) {
            report.ifwr = Some(metrics::ifwr(&weights, &ds.informative)?);
        }
        if matches!(
            cfg.experiment.name,
            ExperimentKind::LinregRecovery | ExperimentKind::LinregCorrelated
        ) {
            report.recovery = Some(metrics::support_recovery(&selected, &ds.informative));
        }
    }
    Ok(())
}

fn run_mi_cell(cfg: &ExperimentConfig, ds: &Dataset, report: &mut RunReport) -> stg_core::Result<()> {
    let Targets::Class(y) = &ds.y else {
        return Err(stg_core::Error::Usage(
            "mi oracle needs class labels".into(),
        ));
    };
    let (best, bits) = metrics::mi_bruteforce(&ds.x, y, cfg.data.subset_size)?;
    report.mi_bits = Some(bits);
    report.selected_count = Some(best.len());
    report.selected = Some(RunReport::render_selected(&best));
    report.recovery = Some(metrics::support_recovery(&best, &ds.informative));
    Ok(())
}

fn run_gated(
    cfg: &ExperimentConfig,
    ds: &Dataset,
    method: Method,
    lambda: f64,
    train_seed: u64,
    report: &mut RunReport,
) -> stg_core::Result<(Vec<usize>, Vec<f64>)> {
    let classes = n_classes(&ds.y);
    let output_dim = if cfg.train.loss == LossKind::CrossEntropy {
        classes
    } else {
        1
    };
    let spec = NetSpec {
        input_dim: ds.d(),
        hidden: cfg.model.hidden.clone(),
        output_dim,
    };
    let mut init_rng = Rng::new(derive_seed(train_seed, "init", 0, 0));
    let network = net::init(&spec, gate_kind(method), cfg.train.sigma, &mut init_rng)?;

    let tc = TrainConfig {
        loss: cfg.train.loss,
        lambda,
        lr: cfg.train.lr,
        optimizer: cfg.train.optimizer,
        epochs: cfg.train.epochs,
        batch_size: cfg.train.batch_size,
        seed: derive_seed(train_seed, "train", 0, 0),
        gate_cutoff: cfg.train.gate_cutoff,
        early_stop_patience: cfg.train.early_stop_patience,
        k_samples: cfg.train.k_samples,
        per_example_gates: cfg.train.per_example_gates,
        snapshot_every: cfg.train.snapshot_every,
    };
    let (train_x, train_y) = ds.view(&ds.splits.train);
    let (valid_x, valid_y) = ds.view(&ds.splits.valid);
    let has_valid = !ds.splits.valid.is_empty();
    let data = TrainData {
        train_x: &train_x,
        train_y: &train_y,
        valid_x: has_valid.then_some(&valid_x),
        valid_y: has_valid.then_some(&valid_y),
    };
    let (trained, trace) = optim::train(network, &data, &tc)?;

    report.train_loss_final = trace.train_loss.last().copied();
    report.valid_loss_final = trace.valid_loss.last().copied().flatten();
    report.second_chance_events = Some(optim::second_chance_probe(&trace.snapshots).len());

    evaluate_predictions(cfg, ds, &trained, report)?;

    let weights = trained.eval_gate();
    let selected = gates::selected_set(&weights, cfg.train.gate_cutoff);
    report.trace = Some(TrainTrace {
        snapshots: Vec::new(), // keep reports slim; probes already ran
        ..trace
    });
    Ok((selected, weights))
}

fn evaluate_predictions(
    cfg: &ExperimentConfig,
    ds: &Dataset,
    net: &Network,
    report: &mut RunReport,
) -> stg_core::Result<()> {
    let rows = eval_rows(ds);
    let (x, y) = ds.view(&rows);
    let preds = net.forward_eval(&x)?;
    match (&cfg.train.loss, &y) {
        (LossKind::CrossEntropy, Targets::Class(labels)) => {
            let hard: Vec<usize> = (0..preds.rows())
                .map(|r| {
                    let row = preds.row(r);
                    row.iter()
                        .enumerate()
                        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                        .map(|(c, _)| c)
                        .unwrap_or(0)
                })
                .collect();
            report.accuracy = Some(metrics::accuracy(&hard, labels)?);
        }
        (LossKind::Mse, Targets::Real(targets)) => {
            report.rmse = Some(metrics::rmse(&preds.column(0), targets)?);
        }
        (LossKind::Cox, Targets::Survival(targets)) => {
            report.cindex = Some(metrics::concordance_index(&preds.column(0), targets)?);
        }
        _ => {
            return Err(stg_core::Error::Usage(
                "loss kind does not match dataset targets".into(),
            ))
        }
    }
    Ok(())
}

fn run_lasso(
    cfg: &ExperimentConfig,
    ds: &Dataset,
    alpha: f64,
    report: &mut RunReport,
) -> stg_core::Result<(Vec<usize>, Vec<f64>)> {
    let (train_x, train_y) = ds.view(&ds.splits.train);
    let y: Vec<f64> = match &train_y {
        Targets::Real(v) => v.clone(),
        Targets::Class(v) => v.iter().map(|&c| c as f64).collect(),
        Targets::Survival(_) => {
            return Err(stg_core::Error::Usage(
                "lasso does not support the survival task".into(),
            ))
        }
    };
    let fit = baselines::lasso_fit(&train_x, &y, alpha, cfg.train.lasso_tol, cfg.train.lasso_max_iter)?;
    if !fit.converged {
        report.error = Some(format!("lasso stopped at max_iter {}", fit.iterations));
    }

    let rows = eval_rows(ds);
    let (x, yv) = ds.view(&rows);
    let preds = x.matvec(&fit.coef)?;
    match &yv {
        Targets::Real(t) => report.rmse = Some(metrics::rmse(&preds, t)?),
        Targets::Class(t) => {
            let hard: Vec<usize> = preds.iter().map(|&p| usize::from(p > 0.5)).collect();
            report.accuracy = Some(metrics::accuracy(&hard, t)?);
        }
        Targets::Survival(_) => unreachable!("rejected above"),
    }

    let weights: Vec<f64> = fit.coef.iter().map(|w| w.abs()).collect();
    let selected = baselines::lasso_support(&fit.coef);
    Ok((selected, weights))
}

/// Runs every cell of the experiment on a bounded pool and returns reports
/// in deterministic (method, grid, rep) order. Individual failures are
/// flagged rows, never aborts.
pub fn run_experiment(cfg: &ExperimentConfig, jobs: Option<usize>) -> Result<Vec<RunReport>, RunnerError> {
    cfg.validate().map_err(RunnerError::Config)?;
    let cells = expand_cells(cfg);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| RunnerError::Runtime(e.to_string()))?;
    let reports: Vec<RunReport> =
        pool.install(|| cells.par_iter().map(|cell| run_cell(cfg, cell)).collect());
    Ok(reports)
}

/// Dataset of a config's first repetition (what `stg datagen` exports).
pub fn preset_dataset(cfg: &ExperimentConfig) -> stg_core::Result<Dataset> {
    let cell = Cell {
        method: None,
        grid_index: 0,
        grid_value: 0.0,
        n: cfg.data.n,
        rep: 0,
        data_seed: derive_seed(cfg.experiment.master_seed, "data", 0, 0),
        train_seed: 0,
    };
    build_dataset(cfg, &cell)
}

/// Files written by [`emit`].
#[derive(Debug, Clone)]
pub struct Emitted {
    pub runs_csv: PathBuf,
    pub summary_csv: PathBuf,
    pub config_echo: PathBuf,
    pub trace_files: Vec<PathBuf>,
}

/// Writes runs.csv, summary.csv, config.echo, and optional per-run traces to
/// the output directory, atomically.
pub fn emit(cfg: &ExperimentConfig, reports: &[RunReport]) -> Result<Emitted, RunnerError> {
    let dir = &cfg.experiment.out_dir;
    std::fs::create_dir_all(dir).map_err(|e| RunnerError::Runtime(format!("{}: {e}", dir.display())))?;
    let io_err = |p: &PathBuf, e: std::io::Error| RunnerError::Runtime(format!("{}: {e}", p.display()));

    let runs_csv = dir.join("runs.csv");
    report::write_atomic(&runs_csv, &report::runs_to_csv(reports)).map_err(|e| io_err(&runs_csv, e))?;

    let groups = report::summarize(reports).map_err(RunnerError::Runtime)?;
    let summary_csv = dir.join("summary.csv");
    report::write_atomic(&summary_csv, &report::summary_to_csv(&groups))
        .map_err(|e| io_err(&summary_csv, e))?;

    let config_echo = dir.join("config.echo");
    report::write_atomic(&config_echo, &cfg.to_toml()).map_err(|e| io_err(&config_echo, e))?;

    let mut trace_files = Vec::new();
    if cfg.experiment.write_traces {
        let tdir = dir.join("traces");
        std::fs::create_dir_all(&tdir).map_err(|e| io_err(&tdir.clone(), e))?;
        for r in reports {
            if let Some(trace) = &r.trace {
                let path = tdir.join(format!("{}_g{}_r{}.csv", r.method, r.grid_index, r.rep));
                trace
                    .write_csv(&path)
                    .map_err(|e| RunnerError::Runtime(format!("{}: {e}", path.display())))?;
                trace_files.push(path);
            }
        }
    }
    Ok(Emitted {
        runs_csv,
        summary_csv,
        config_echo,
        trace_files,
    })
}
