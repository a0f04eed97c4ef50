//! elpf-check: the profile tail bound F(psi(1/delta, c))/delta^2 <= (1-c)^2
//! over configured (c, delta) grids.

use crate::report::CsvWriter;
use crate::{Ctx, Outcome};
use anyhow::{anyhow, Result};
use kwc_core::profile::check_tail_bound;

pub fn run(ctx: &Ctx) -> Result<Outcome> {
    let pot = ctx.cfg.potential(&ctx.base_dir)?;
    let block = ctx
        .cfg
        .elpf_check
        .as_ref()
        .ok_or_else(|| anyhow!("missing [elpf_check] section"))?;
    if block.delta_count < 2 || block.delta_min <= 0.0 || block.delta_max <= block.delta_min {
        return Err(anyhow!("[elpf_check] needs 0 < delta_min < delta_max, delta_count >= 2"));
    }
    let deltas: Vec<f64> = (0..block.delta_count)
        .map(|i| {
            block.delta_min
                * (block.delta_max / block.delta_min)
                    .powf(i as f64 / (block.delta_count - 1) as f64)
        })
        .collect();
    let rep = check_tail_bound(&pot, &block.c, &deltas)?;
    let mut csv = CsvWriter::new("elpf-check", &ctx.cfg_hash, ctx.seed, &[]);
    csv.header("max_ratio,max_excess,worst_c,worst_delta,pass");
    csv.row(&format!(
        "{:.8e},{:.3e},{},{},{}",
        rep.max_ratio, rep.max_excess, rep.worst_c, rep.worst_delta, rep.ok
    ));
    csv.write_to(&ctx.out_dir.join("elpf_check.csv"))?;
    println!(
        "elpf-check: max ratio {:.6} ({})",
        rep.max_ratio,
        if rep.ok { "pass" } else { "FAIL" }
    );
    if rep.ok {
        Ok(Outcome::Pass)
    } else {
        Ok(Outcome::PropertyViolation(format!(
            "tail bound violated by {:.3e} at c = {}, delta = {}",
            rep.max_excess, rep.worst_c, rep.worst_delta
        )))
    }
}
