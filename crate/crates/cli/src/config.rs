//! Experiment configuration: a single TOML file (key = value with nested
//! sections) fully determines a sweep. Built-in presets encode the benchmark
//! protocols; a resolved config echoes back to disk so every output is
//! reproducible from one artifact.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use stg_core::datagen::CsvSchema;
use stg_core::losses::LossKind;
use stg_core::net::Activation;
use stg_core::optim::OptKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Xor,
    TwoMoons,
    Friedman,
    MadelonLike,
    LinregRecovery,
    LinregCorrelated,
    Stability,
    CoxSynthetic,
    MiOracle,
    CustomCsv,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Xor => "xor",
            ExperimentKind::TwoMoons => "two_moons",
            ExperimentKind::Friedman => "friedman",
            ExperimentKind::MadelonLike => "madelon_like",
            ExperimentKind::LinregRecovery => "linreg_recovery",
            ExperimentKind::LinregCorrelated => "linreg_correlated",
            ExperimentKind::Stability => "stability",
            ExperimentKind::CoxSynthetic => "cox_synthetic",
            ExperimentKind::MiOracle => "mi_oracle",
            ExperimentKind::CustomCsv => "custom_csv",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "xor" => ExperimentKind::Xor,
            "two_moons" => ExperimentKind::TwoMoons,
            "friedman" => ExperimentKind::Friedman,
            "madelon_like" => ExperimentKind::MadelonLike,
            "linreg_recovery" => ExperimentKind::LinregRecovery,
            "linreg_correlated" => ExperimentKind::LinregCorrelated,
            "stability" => ExperimentKind::Stability,
            "cox_synthetic" => ExperimentKind::CoxSynthetic,
            "mi_oracle" => ExperimentKind::MiOracle,
            "custom_csv" => ExperimentKind::CustomCsv,
            _ => return None,
        })
    }

    pub const ALL: [ExperimentKind; 10] = [
        ExperimentKind::Xor,
        ExperimentKind::TwoMoons,
        ExperimentKind::Friedman,
        ExperimentKind::MadelonLike,
        ExperimentKind::LinregRecovery,
        ExperimentKind::LinregCorrelated,
        ExperimentKind::Stability,
        ExperimentKind::CoxSynthetic,
        ExperimentKind::MiOracle,
        ExperimentKind::CustomCsv,
    ];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Stg,
    Hc,
    Dnc,
    Lasso,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Stg => "stg",
            Method::Hc => "hc",
            Method::Dnc => "dnc",
            Method::Lasso => "lasso",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub name: ExperimentKind,
    pub methods: Vec<Method>,
    pub repetitions: usize,
    pub master_seed: u64,
    pub out_dir: PathBuf,
    /// Write a per-run trace CSV next to runs.csv.
    #[serde(default = "default_true")]
    pub write_traces: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataSection {
    pub n: usize,
    pub d: usize,
    // madelon_like
    pub n_informative: usize,
    pub n_combined: usize,
    pub n_nuisance: usize,
    pub flip_frac: f64,
    pub separation: f64,
    // linear recovery
    pub noise_var: f64,
    // cox_synthetic
    pub informative_count: usize,
    pub censor_frac: f64,
    pub effect: f64,
    // mi_oracle
    pub subset_size: usize,
    // custom_csv
    pub csv_path: Option<PathBuf>,
    pub csv_schema: Option<CsvSchema>,
    pub test_frac: f64,
    pub valid_frac: f64,
}

impl Default for DataSection {
    fn default() -> Self {
        Self {
            n: 1000,
            d: 10,
            n_informative: 5,
            n_combined: 15,
            n_nuisance: 480,
            flip_frac: 0.01,
            separation: stg_core::datagen::MADELON_SEPARATION,
            noise_var: 0.25,
            informative_count: 2,
            censor_frac: 0.3,
            effect: stg_core::datagen::SURVIVAL_EFFECT,
            subset_size: 2,
            csv_path: None,
            csv_schema: None,
            test_frac: 0.2,
            valid_frac: 0.1,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    /// Hidden layers as [width, activation] pairs; empty = linear model.
    pub hidden: Vec<(usize, Activation)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    pub loss: LossKind,
    pub lambda: f64,
    /// Per-method lambda overrides (the stability protocol tunes each
    /// mechanism to the same average selection size).
    pub lambda_by_method: BTreeMap<String, f64>,
    pub lr: f64,
    pub optimizer: OptKind,
    pub epochs: usize,
    pub batch_size: usize,
    pub gate_cutoff: f64,
    pub sigma: f64,
    pub k_samples: usize,
    pub per_example_gates: bool,
    pub early_stop_patience: Option<usize>,
    pub snapshot_every: Option<usize>,
    /// lambda_N = c_scale * alpha_N for gated methods on the N-grid
    /// experiments (cross-validated constant, fixed per preset).
    pub c_scale: f64,
    pub lasso_tol: f64,
    pub lasso_max_iter: usize,
}

impl Default for TrainSection {
    fn default() -> Self {
        Self {
            loss: LossKind::Mse,
            lambda: 1.0,
            lambda_by_method: BTreeMap::new(),
            lr: 0.1,
            optimizer: OptKind::Sgd,
            epochs: 500,
            batch_size: usize::MAX,
            gate_cutoff: 0.0,
            sigma: stg_core::gates::DEFAULT_SIGMA,
            k_samples: 1,
            per_example_gates: false,
            early_stop_patience: None,
            snapshot_every: None,
            c_scale: 1.0,
            lasso_tol: 1e-8,
            lasso_max_iter: 100_000,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    /// Sweep over the regularization strength.
    pub lambda: Option<Vec<f64>>,
    /// Sweep over the sample size (data varies per grid point).
    pub n: Option<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub data: DataSection,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default)]
    pub grid: GridSection,
}

/// What the single grid axis sweeps.
#[derive(Clone, Debug, PartialEq)]
pub enum Grid {
    Single,
    Lambda(Vec<f64>),
    SampleSize(Vec<usize>),
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| e.to_string())?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn grid(&self) -> Grid {
        match (&self.grid.lambda, &self.grid.n) {
            (Some(l), None) => Grid::Lambda(l.clone()),
            (None, Some(n)) => Grid::SampleSize(n.clone()),
            _ => Grid::Single,
        }
    }

    pub fn grid_len(&self) -> usize {
        match self.grid() {
            Grid::Single => 1,
            Grid::Lambda(v) => v.len(),
            Grid::SampleSize(v) => v.len(),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let e = &self.experiment;
        if e.repetitions < 1 {
            return Err("repetitions must be >= 1".into());
        }
        if e.name != ExperimentKind::MiOracle && e.methods.is_empty() {
            return Err("method set must be nonempty".into());
        }
        if self.grid.lambda.is_some() && self.grid.n.is_some() {
            return Err("grid may sweep lambda or n, not both".into());
        }
        if let Some(l) = &self.grid.lambda {
            if l.is_empty() {
                return Err("lambda grid must be nonempty".into());
            }
            if l.iter().any(|&v| v < 0.0) {
                return Err("lambda grid values must be >= 0".into());
            }
        }
        if let Some(ns) = &self.grid.n {
            if ns.is_empty() {
                return Err("n grid must be nonempty".into());
            }
            if ns.iter().any(|&n| n == 0) {
                return Err("n grid values must be positive".into());
            }
        }
        let linreg = matches!(
            e.name,
            ExperimentKind::LinregRecovery | ExperimentKind::LinregCorrelated
        );
        if linreg && self.grid.lambda.is_some() {
            return Err("linear recovery experiments sweep n, not lambda".into());
        }
        if e.name == ExperimentKind::CustomCsv
            && (self.data.csv_path.is_none() || self.data.csv_schema.is_none())
        {
            return Err("custom_csv needs data.csv_path and data.csv_schema".into());
        }
        if e.methods.contains(&Method::Lasso) && self.train.loss == LossKind::Cox {
            return Err("lasso does not support the survival task".into());
        }
        if !(self.train.lambda >= 0.0) {
            return Err("train.lambda must be >= 0".into());
        }
        if !(self.train.lr > 0.0) {
            return Err("train.lr must be > 0".into());
        }
        if self.train.epochs < 1 {
            return Err("train.epochs must be >= 1".into());
        }
        if !(self.train.sigma > 0.0) {
            return Err("train.sigma must be > 0".into());
        }
        Ok(())
    }

    /// Base lambda for a method, honoring per-method overrides.
    pub fn lambda_for(&self, method: Method) -> f64 {
        self.train
            .lambda_by_method
            .get(method.as_str())
            .copied()
            .unwrap_or(self.train.lambda)
    }
}

/// Built-in experiment presets encoding the benchmark protocol sizes.
pub fn preset(kind: ExperimentKind) -> ExperimentConfig {
    let base = |name: ExperimentKind, methods: Vec<Method>| ExperimentSection {
        name,
        methods,
        repetitions: 20,
        master_seed: 20200513,
        out_dir: PathBuf::from(format!("out/{}", name.as_str())),
        write_traces: false,
    };
    match kind {
        ExperimentKind::Xor => ExperimentConfig {
            experiment: base(kind, vec![Method::Stg]),
            data: DataSection {
                n: 1500,
                d: 10,
                ..DataSection::default()
            },
            model: ModelSection {
                hidden: vec![(24, Activation::Tanh)],
            },
            train: TrainSection {
                loss: LossKind::CrossEntropy,
                lambda: 0.8,
                lr: 0.3,
                epochs: 1200,
                batch_size: 128,
                ..TrainSection::default()
            },
            grid: GridSection::default(),
        },
        ExperimentKind::TwoMoons => ExperimentConfig {
            experiment: base(kind, vec![Method::Stg]),
            data: DataSection {
                n: 1500,
                d: 10,
                ..DataSection::default()
            },
            model: ModelSection {
                hidden: vec![(24, Activation::Tanh)],
            },
            train: TrainSection {
                loss: LossKind::CrossEntropy,
                lambda: 0.6,
                lr: 0.3,
                epochs: 1500,
                batch_size: 128,
                ..TrainSection::default()
            },
            grid: GridSection::default(),
        },
        ExperimentKind::Friedman => ExperimentConfig {
            experiment: base(kind, vec![Method::Stg]),
            data: DataSection {
                n: 600,
                d: 500,
                ..DataSection::default()
            },
            model: ModelSection {
                hidden: vec![(32, Activation::Tanh)],
            },
            train: TrainSection {
                loss: LossKind::Mse,
                lambda: 0.35,
                lr: 0.2,
                epochs: 2500,
                batch_size: 128,
                ..TrainSection::default()
            },
            grid: GridSection::default(),
        },
        ExperimentKind::MadelonLike => ExperimentConfig {
            experiment: ExperimentSection {
                repetitions: 5,
                ..base(kind, vec![Method::Stg])
            },
            data: DataSection {
                n: 1500,
                d: 500,
                ..DataSection::default()
            },
            model: ModelSection {
                hidden: vec![(32, Activation::Tanh)],
            },
            train: TrainSection {
                loss: LossKind::CrossEntropy,
                lambda: 1.0,
                lr: 0.2,
                epochs: 1200,
                batch_size: 256,
                ..TrainSection::default()
            },
            grid: GridSection {
                lambda: Some(log_grid(0.01, 10.0, 20)),
                n: None,
            },
        },
        ExperimentKind::LinregRecovery | ExperimentKind::LinregCorrelated => ExperimentConfig {
            experiment: ExperimentSection {
                repetitions: 200,
                ..base(kind, vec![Method::Stg, Method::Hc, Method::Dnc, Method::Lasso])
            },
            data: DataSection {
                n: 250,
                d: 64,
                noise_var: 0.25,
                ..DataSection::default()
            },
            model: ModelSection::default(),
            train: TrainSection {
                loss: LossKind::Mse,
                lr: 0.1,
                epochs: 3000,
                c_scale: 3.0,
                ..TrainSection::default()
            },
            grid: GridSection {
                lambda: None,
                n: Some((0..13).map(|i| 10 + 20 * i).collect()),
            },
        },
        ExperimentKind::Stability => ExperimentConfig {
            experiment: base(kind, vec![Method::Stg, Method::Hc]),
            data: DataSection {
                n: 1500,
                d: 20,
                ..DataSection::default()
            },
            model: ModelSection {
                hidden: vec![(24, Activation::Tanh)],
            },
            train: TrainSection {
                loss: LossKind::CrossEntropy,
                lambda: 0.8,
                lambda_by_method: BTreeMap::from([
                    ("stg".to_string(), 0.8),
                    ("hc".to_string(), 0.8),
                ]),
                lr: 0.3,
                epochs: 1200,
                batch_size: 128,
                ..TrainSection::default()
            },
            grid: GridSection::default(),
        },
        ExperimentKind::CoxSynthetic => ExperimentConfig {
            experiment: ExperimentSection {
                repetitions: 5,
                ..base(kind, vec![Method::Stg])
            },
            data: DataSection {
                n: 1000,
                d: 20,
                informative_count: 2,
                censor_frac: 0.3,
                ..DataSection::default()
            },
            model: ModelSection {
                hidden: vec![(16, Activation::Selu), (8, Activation::Selu)],
            },
            train: TrainSection {
                loss: LossKind::Cox,
                lambda: 0.5,
                lr: 0.01,
                optimizer: OptKind::Adam,
                epochs: 800,
                batch_size: usize::MAX,
                ..TrainSection::default()
            },
            grid: GridSection::default(),
        },
        ExperimentKind::MiOracle => ExperimentConfig {
            experiment: ExperimentSection {
                repetitions: 5,
                ..base(kind, vec![])
            },
            data: DataSection {
                n: 100_000,
                d: 6,
                subset_size: 2,
                ..DataSection::default()
            },
            model: ModelSection::default(),
            train: TrainSection::default(),
            grid: GridSection::default(),
        },
        ExperimentKind::CustomCsv => ExperimentConfig {
            experiment: ExperimentSection {
                repetitions: 1,
                ..base(kind, vec![Method::Stg])
            },
            data: DataSection::default(),
            model: ModelSection {
                hidden: vec![(32, Activation::Tanh)],
            },
            train: TrainSection::default(),
            grid: GridSection::default(),
        },
    }
}

/// Log-spaced grid of `points` values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    assert!(points >= 2 && lo > 0.0 && hi > lo);
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| (llo + (lhi - llo) * i as f64 / (points - 1) as f64).exp())
        .collect()
}
