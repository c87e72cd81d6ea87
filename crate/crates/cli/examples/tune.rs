// Dev scratch harness for preset tuning. Not part of the deliverable surface.
use std::collections::BTreeMap;
use stg_cli::config::{preset, ExperimentKind};
use stg_cli::report::summarize;
use stg_cli::runner::run_experiment;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let name = args.first().expect("preset name");
    let kind = ExperimentKind::parse(name).expect("known preset");
    let mut cfg = preset(kind);
    let mut overrides = BTreeMap::new();
    for kv in &args[1..] {
        let (k, v) = kv.split_once('=').expect("k=v");
        overrides.insert(k.to_string(), v.to_string());
    }
    if let Some(v) = overrides.get("reps") { cfg.experiment.repetitions = v.parse().unwrap(); }
    if let Some(v) = overrides.get("lambda") { cfg.train.lambda = v.parse().unwrap(); }
    if let Some(v) = overrides.get("lambda_stg") { cfg.train.lambda_by_method.insert("stg".into(), v.parse().unwrap()); }
    if let Some(v) = overrides.get("lambda_hc") { cfg.train.lambda_by_method.insert("hc".into(), v.parse().unwrap()); }
    if let Some(v) = overrides.get("lr") { cfg.train.lr = v.parse().unwrap(); }
    if let Some(v) = overrides.get("epochs") { cfg.train.epochs = v.parse().unwrap(); }
    if let Some(v) = overrides.get("batch") { cfg.train.batch_size = v.parse().unwrap(); }
    if let Some(v) = overrides.get("c") { cfg.train.c_scale = v.parse().unwrap(); }
    if let Some(v) = overrides.get("k") { cfg.train.k_samples = v.parse().unwrap(); }
    if let Some(v) = overrides.get("sigma") { cfg.train.sigma = v.parse().unwrap(); }
    if let Some(v) = overrides.get("cutoff") { cfg.train.gate_cutoff = v.parse().unwrap(); }
    if let Some(v) = overrides.get("seed") { cfg.experiment.master_seed = v.parse().unwrap(); }
    if let Some(v) = overrides.get("hidden") {
        // e.g. hidden=32tanh or hidden=none or hidden=64tanh,32tanh
        cfg.model.hidden.clear();
        if v != "none" {
            for part in v.split(',') {
                let (w, act) = part.split_at(part.find(|c: char| c.is_alphabetic()).unwrap());
                let a = match act { "tanh" => stg_core::net::Activation::Tanh, "relu" => stg_core::net::Activation::Relu, "selu" => stg_core::net::Activation::Selu, _ => panic!() };
                cfg.model.hidden.push((w.parse().unwrap(), a));
            }
        }
    }
    if let Some(v) = overrides.get("grid_n") {
        cfg.grid.n = Some(v.split(',').map(|s| s.parse().unwrap()).collect());
        cfg.grid.lambda = None;
    }
    if let Some(v) = overrides.get("grid_lambda_list") {
        cfg.grid.lambda = Some(v.split(',').map(|s| s.parse().unwrap()).collect());
        cfg.grid.n = None;
    }
    if let Some(v) = overrides.get("grid_lambda_points") {
        cfg.grid.lambda = Some(stg_cli::config::log_grid(0.01, 10.0, v.parse().unwrap()));
    }
    if let Some(v) = overrides.get("methods") {
        cfg.experiment.methods = v.split(',').map(|m| match m {
            "stg" => stg_cli::config::Method::Stg,
            "hc" => stg_cli::config::Method::Hc,
            "dnc" => stg_cli::config::Method::Dnc,
            "lasso" => stg_cli::config::Method::Lasso,
            _ => panic!(),
        }).collect();
    }
    eprintln!("== running {} reps={} lambda={} lr={} epochs={} hidden={:?}", name, cfg.experiment.repetitions, cfg.train.lambda, cfg.train.lr, cfg.train.epochs, cfg.model.hidden);
    let t0 = std::time::Instant::now();
    let reports = run_experiment(&cfg, None).unwrap();
    eprintln!("== total {:?}", t0.elapsed());
    let groups = summarize(&reports).unwrap();
    println!("method,gi,gval,acc_med,rmse_med,f1_med,prec_med,rank_med,sel_med,recov,cidx_med,2nd_chance,excl");
    for g in groups {
        println!(
            "{},{},{:.4},{},{},{},{},{},{},{},{},{},{}",
            g.method, g.grid_index, g.grid_value,
            g.accuracy.map(|s| format!("{:.4}", s.median)).unwrap_or_default(),
            g.rmse.map(|s| format!("{:.4}", s.median)).unwrap_or_default(),
            g.f1.map(|s| format!("{:.4}", s.median)).unwrap_or_default(),
            g.precision.map(|s| format!("{:.4}", s.median)).unwrap_or_default(),
            g.median_rank.map(|s| format!("{:.2}", s.median)).unwrap_or_default(),
            g.selected_count.map(|s| format!("{:.1}", s.median)).unwrap_or_default(),
            g.recovery_prob.map(|p| format!("{:.3}", p)).unwrap_or_default(),
            g.cindex.map(|s| format!("{:.4}", s.median)).unwrap_or_default(),
            g.second_chance_total.map(|v| v.to_string()).unwrap_or_default(),
            g.excluded,
        );
    }
    // per-run details for small sweeps
    if reports.len() <= 60 {
        for r in &reports {
            println!(
                "  run {} g{} r{}: acc={:?} f1={:?} sel={:?} rank={:?} recov={:?} cidx={:?} 2nd={:?}{}",
                r.method, r.grid_index, r.rep, r.accuracy, r.f1, r.selected_count, r.median_rank,
                r.recovery, r.cindex, r.second_chance_events,
                if r.failed { format!(" FAILED: {:?}", r.error) } else { String::new() }
            );
        }
    }
}
