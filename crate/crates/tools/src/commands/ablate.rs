use scenegraph_core::encoder::KernelKind;
use scenegraph_core::harness::{run_relational_task, GridCell, RelationalConfig, RelationalRow};

use super::train::relational_config;
use super::RunContext;
use crate::error::{config_err, Result};
use crate::formats::{fmt_f64, Table};

/// Runs `cells` on `threads` workers; rows come back in grid order.
fn run_grid(cfg: &RelationalConfig, cells: &[GridCell], seeds: &[u64], threads: usize) -> Result<Vec<RelationalRow>> {
    let chunk = cells.len().div_ceil(threads.max(1)).max(1);
    let results: Vec<Result<Vec<RelationalRow>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = cells
            .chunks(chunk)
            .map(|part| scope.spawn(move || Ok(run_relational_task(cfg, part, seeds)?.rows)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("grid worker panicked")).collect()
    });
    let mut rows = Vec::with_capacity(cells.len());
    for r in results {
        rows.extend(r?);
    }
    Ok(rows)
}

/// Hop-limit by kernel ablation on the neighbor-determined predicate task.
pub fn ablate_hops(mut ctx: RunContext) -> Result<()> {
    let s = &mut ctx.settings;
    let (cfg, _) = relational_config(s)?;
    let n_seeds = s.get("seeds", 5u64)?;
    let hops = s.get_list("hops", &[1u32, 3, 6])?;
    let kernels: Vec<KernelKind> = s
        .get_list("kernels", &["identity".to_string(), "gaussian".to_string(), "rq".to_string()])?
        .iter()
        .map(|k| k.parse().map_err(|e| config_err!("`kernels`: {e}")))
        .collect::<Result<_>>()?;
    let baseline = s.get("baseline", true)?;
    s.finish()?;
    if n_seeds == 0 {
        return Err(config_err!("`seeds` must be at least 1"));
    }
    let mut cells: Vec<GridCell> = baseline.then(GridCell::baseline).into_iter().collect();
    for &h in &hops {
        cells.extend(kernels.iter().map(|&kernel| GridCell { hop_limit: Some(h), kernel }));
    }
    let seeds: Vec<u64> = (0..n_seeds).map(|k| ctx.seed + k).collect();
    log::info!("{} cells x {} seeds on {} thread(s)", cells.len(), seeds.len(), ctx.threads);
    let rows = run_grid(&cfg, &cells, &seeds, ctx.threads)?;
    let mut table = Table::new(
        ["hops", "kernel", "mean_accuracy", "std_accuracy"].into_iter().map(String::from).chain(seeds.iter().map(|s| format!("seed_{s}"))),
    );
    for row in &rows {
        let hops = row.cell.hop_limit.map_or_else(|| "none".to_string(), |h| h.to_string());
        let mut fields = vec![hops, row.cell.kernel.to_string(), fmt_f64(row.mean), fmt_f64(row.std)];
        fields.extend(row.accuracies.iter().map(|&a| fmt_f64(a)));
        table.push(fields);
    }
    ctx.write_table("table.tsv", &table)?;
    ctx.finish()
}
