use std::fs;
use std::path::Path;

use rsp_core::Result;
use rsp_qpbench::bench::{run_bench, BenchConfig};

use crate::{resolve, BenchArgs, EXIT_OK};

fn show(v: Option<usize>) -> String {
    v.map_or("-".into(), |k| k.to_string())
}

pub fn cmd_bench(wd: &Path, a: &BenchArgs) -> Result<i32> {
    let mut cfg = match &a.config {
        Some(p) => BenchConfig::from_toml(&fs::read_to_string(resolve(wd, p))?)?,
        None => BenchConfig::default(),
    };
    if let Some(v) = &a.sizes {
        cfg.sizes = v.clone();
    }
    if let Some(v) = &a.seeds {
        cfg.seeds = v.clone();
    }
    if let Some(v) = &a.algorithms {
        cfg.algorithms = v.clone();
    }
    cfg.eps = a.eps.unwrap_or(cfg.eps);
    cfg.time_budget = a.time_budget.unwrap_or(cfg.time_budget);
    cfg.sgsp_iters = a.sgsp_iters.unwrap_or(cfg.sgsp_iters);
    cfg.online_iters = a.online_iters.unwrap_or(cfg.online_iters);
    cfg.cp_rounds = a.cp_rounds.unwrap_or(cfg.cp_rounds);
    cfg.checkpoint_every = a.checkpoint_every.unwrap_or(cfg.checkpoint_every);
    cfg.jobs = a.jobs.unwrap_or(cfg.jobs);
    let out = resolve(wd, &a.out);
    let summary = run_bench(&cfg, &out)?;
    println!("{:<14} {:>5} {:<15} {:<22} {:>6} {:>11} {:>11} {:>6}", "size", "seed", "algorithm", "status", "ckpts", "final_fg", "min_ogr", "first");
    for c in &summary.cells {
        println!(
            "{:<14} {:>5} {:<15} {:<22} {:>6} {:>11.3e} {:>11.3e} {:>6}",
            c.size,
            c.seed,
            c.algorithm,
            c.status,
            c.checkpoints,
            c.final_fg,
            c.min_ogr,
            show(c.first_eps_checkpoint)
        );
        if let Some(e) = &c.error {
            println!("  error: {e}");
        }
    }
    println!("results in {}", out.display());
    Ok(EXIT_OK)
}
