//! Run reports, their CSV serialization, and group summaries.
//!
//! runs.csv holds one row per run; summary.csv one row per (method, grid)
//! group. Feature indices in the `selected` column are 1-based. Output files
//! are written atomically (temp file + rename) and contain nothing
//! nondeterministic: wall-clock runtimes stay in memory and go to stderr
//! logging only, so identical (config, master seed) reruns are byte-identical.

use std::fmt::Write as _;
use std::path::Path;

use stg_core::optim::TrainTrace;

/// Outcome of one (method, grid point, repetition) cell.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunReport {
    pub method: String,
    pub grid_index: usize,
    /// The swept value at this grid point (lambda, or N for sample-size grids).
    pub grid_value: f64,
    pub rep: usize,
    pub data_seed: u64,
    pub train_seed: u64,
    /// Regularization actually applied (lambda for gated methods, alpha for
    /// the LASSO); absent for the MI oracle.
    pub lambda: Option<f64>,
    pub failed: bool,
    pub error: Option<String>,
    pub accuracy: Option<f64>,
    pub rmse: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub median_rank: Option<f64>,
    pub ifwr: Option<f64>,
    pub cindex: Option<f64>,
    pub recovery: Option<bool>,
    pub selected_count: Option<usize>,
    /// Selected feature ids, 1-based, ';'-separated.
    pub selected: Option<String>,
    pub second_chance_events: Option<usize>,
    pub train_loss_final: Option<f64>,
    pub valid_loss_final: Option<f64>,
    pub mi_bits: Option<f64>,
    /// Wall time of the cell; never serialized (see module docs).
    pub runtime_ms: u128,
    /// Slim trace (snapshots dropped) for optional per-run trace files.
    pub trace: Option<TrainTrace>,
}

impl RunReport {
    /// 1-based ';'-joined rendering of a 0-based index set.
    pub fn render_selected(selected: &[usize]) -> String {
        selected
            .iter()
            .map(|d| (d + 1).to_string())
            .collect::<Vec<_>>()
            .join(";")
    }
}

const RUNS_HEADER: &str = "method,grid_index,grid_value,rep,data_seed,train_seed,lambda,failed,error,accuracy,rmse,precision,recall,f1,median_rank,ifwr,cindex,recovery,selected_count,selected,second_chance_events,train_loss_final,valid_loss_final,mi_bits";

fn opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

/// Renders runs.csv (deterministic; excludes runtime and traces).
pub fn runs_to_csv(reports: &[RunReport]) -> String {
    let mut out = String::from(RUNS_HEADER);
    out.push('\n');
    for r in reports {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.method,
            r.grid_index,
            r.grid_value,
            r.rep,
            r.data_seed,
            r.train_seed,
            opt(&r.lambda),
            r.failed as u8,
            r.error.as_deref().unwrap_or("").replace(',', ";"),
            opt(&r.accuracy),
            opt(&r.rmse),
            opt(&r.precision),
            opt(&r.recall),
            opt(&r.f1),
            opt(&r.median_rank),
            opt(&r.ifwr),
            opt(&r.cindex),
            opt(&r.recovery.map(|b| b as u8)),
            opt(&r.selected_count),
            r.selected.as_deref().unwrap_or(""),
            opt(&r.second_chance_events),
            opt(&r.train_loss_final),
            opt(&r.valid_loss_final),
            opt(&r.mi_bits),
        );
    }
    out
}

/// Parses runs.csv back into reports (traces are not stored in the CSV).
pub fn runs_from_csv(text: &str) -> Result<Vec<RunReport>, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty runs.csv")?;
    if header != RUNS_HEADER {
        return Err(format!("unexpected runs.csv header: {header}"));
    }
    let mut reports = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 24 {
            return Err(format!("line {}: expected 24 cells, got {}", i + 2, cells.len()));
        }
        let parse_f = |s: &str| -> Result<Option<f64>, String> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse::<f64>().map(Some).map_err(|e| format!("line {}: {e}", i + 2))
            }
        };
        let parse_u = |s: &str| -> Result<Option<usize>, String> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse::<usize>().map(Some).map_err(|e| format!("line {}: {e}", i + 2))
            }
        };
        reports.push(RunReport {
            method: cells[0].to_string(),
            grid_index: cells[1].parse().map_err(|e| format!("line {}: {e}", i + 2))?,
            grid_value: cells[2].parse().map_err(|e| format!("line {}: {e}", i + 2))?,
            rep: cells[3].parse().map_err(|e| format!("line {}: {e}", i + 2))?,
            data_seed: cells[4].parse().map_err(|e| format!("line {}: {e}", i + 2))?,
            train_seed: cells[5].parse().map_err(|e| format!("line {}: {e}", i + 2))?,
            lambda: parse_f(cells[6])?,
            failed: cells[7] == "1",
            error: if cells[8].is_empty() {
                None
            } else {
                Some(cells[8].to_string())
            },
            accuracy: parse_f(cells[9])?,
            rmse: parse_f(cells[10])?,
            precision: parse_f(cells[11])?,
            recall: parse_f(cells[12])?,
            f1: parse_f(cells[13])?,
            median_rank: parse_f(cells[14])?,
            ifwr: parse_f(cells[15])?,
            cindex: parse_f(cells[16])?,
            recovery: parse_u(cells[17])?.map(|v| v == 1),
            selected_count: parse_u(cells[18])?,
            selected: if cells[19].is_empty() {
                None
            } else {
                Some(cells[19].to_string())
            },
            second_chance_events: parse_u(cells[20])?,
            train_loss_final: parse_f(cells[21])?,
            valid_loss_final: parse_f(cells[22])?,
            mi_bits: parse_f(cells[23])?,
            runtime_ms: 0,
            trace: None,
        });
    }
    Ok(reports)
}

/// Mean / median / standard deviation of one metric within a group.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Stat {
    pub mean: f64,
    pub median: f64,
    pub std: f64,
    pub count: usize,
}

pub fn stat(values: &[f64]) -> Option<Stat> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2]
    } else {
        0.5 * (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2])
    };
    let std = if values.len() < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    Some(Stat {
        mean,
        median,
        std,
        count: values.len(),
    })
}

/// Per-(method, grid point) summary. Failed runs are excluded from every
/// statistic and counted in `excluded`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GroupSummary {
    pub method: String,
    pub grid_index: usize,
    pub grid_value: f64,
    pub runs: usize,
    pub excluded: usize,
    pub accuracy: Option<Stat>,
    pub rmse: Option<Stat>,
    pub f1: Option<Stat>,
    pub precision: Option<Stat>,
    pub recall: Option<Stat>,
    pub median_rank: Option<Stat>,
    pub ifwr: Option<Stat>,
    pub cindex: Option<Stat>,
    pub selected_count: Option<Stat>,
    pub mi_bits: Option<Stat>,
    pub recovery_prob: Option<f64>,
    pub second_chance_total: Option<usize>,
}

/// Groups reports by (method, grid_index) preserving first-seen order.
pub fn summarize(reports: &[RunReport]) -> Result<Vec<GroupSummary>, String> {
    if reports.is_empty() {
        return Err("no reports to summarize".into());
    }
    let mut keys: Vec<(String, usize)> = Vec::new();
    for r in reports {
        let key = (r.method.clone(), r.grid_index);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    let mut out = Vec::new();
    for (method, grid_index) in keys {
        let group: Vec<&RunReport> = reports
            .iter()
            .filter(|r| r.method == method && r.grid_index == grid_index)
            .collect();
        let ok: Vec<&&RunReport> = group.iter().filter(|r| !r.failed).collect();
        let pick = |f: fn(&RunReport) -> Option<f64>| -> Vec<f64> {
            ok.iter().filter_map(|r| f(r)).collect()
        };
        let recovery_flags: Vec<f64> = ok
            .iter()
            .filter_map(|r| r.recovery.map(|b| b as u8 as f64))
            .collect();
        let second_chance: Vec<usize> =
            ok.iter().filter_map(|r| r.second_chance_events).collect();
        out.push(GroupSummary {
            method,
            grid_index,
            grid_value: group[0].grid_value,
            runs: group.len(),
            excluded: group.len() - ok.len(),
            accuracy: stat(&pick(|r| r.accuracy)),
            rmse: stat(&pick(|r| r.rmse)),
            f1: stat(&pick(|r| r.f1)),
            precision: stat(&pick(|r| r.precision)),
            recall: stat(&pick(|r| r.recall)),
            median_rank: stat(&pick(|r| r.median_rank)),
            ifwr: stat(&pick(|r| r.ifwr)),
            cindex: stat(&pick(|r| r.cindex)),
            selected_count: stat(&pick(|r| r.selected_count.map(|v| v as f64))),
            mi_bits: stat(&pick(|r| r.mi_bits)),
            recovery_prob: if recovery_flags.is_empty() {
                None
            } else {
                Some(recovery_flags.iter().sum::<f64>() / recovery_flags.len() as f64)
            },
            second_chance_total: if second_chance.is_empty() {
                None
            } else {
                Some(second_chance.iter().sum())
            },
        });
    }
    Ok(out)
}

pub fn summary_to_csv(groups: &[GroupSummary]) -> String {
    let metrics = [
        "accuracy",
        "rmse",
        "f1",
        "precision",
        "recall",
        "median_rank",
        "ifwr",
        "cindex",
        "selected_count",
        "mi_bits",
    ];
    let mut out = String::from("method,grid_index,grid_value,runs,excluded");
    for m in metrics {
        let _ = write!(out, ",{m}_mean,{m}_median,{m}_std");
    }
    out.push_str(",recovery_prob,second_chance_total\n");
    for g in groups {
        let _ = write!(
            out,
            "{},{},{},{},{}",
            g.method, g.grid_index, g.grid_value, g.runs, g.excluded
        );
        for s in [
            &g.accuracy,
            &g.rmse,
            &g.f1,
            &g.precision,
            &g.recall,
            &g.median_rank,
            &g.ifwr,
            &g.cindex,
            &g.selected_count,
            &g.mi_bits,
        ] {
            match s {
                Some(s) => {
                    let _ = write!(out, ",{},{},{}", s.mean, s.median, s.std);
                }
                None => out.push_str(",,,"),
            }
        }
        let _ = writeln!(
            out,
            ",{},{}",
            g.recovery_prob.map(|p| p.to_string()).unwrap_or_default(),
            g.second_chance_total
                .map(|v| v.to_string())
                .unwrap_or_default()
        );
    }
    out
}

/// Atomic write: temp file in the same directory, then rename.
pub fn write_atomic(path: &Path, content: &str) -> std::io::Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(
        ".{}.tmp",
        path.file_name().and_then(|s| s.to_str()).unwrap_or("out")
    ));
    std::fs::write(&tmp, content)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}
