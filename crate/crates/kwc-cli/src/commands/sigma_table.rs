//! sigma-table: the relaxed jump cost over a grid of jump sizes, with the
//! closed form r/(1+r) for the default quadratic/quadratic pair.

use crate::report::CsvWriter;
use crate::{Ctx, Outcome};
use anyhow::Result;
use kwc_core::potential::{sigma_jump_cost, PotentialKind, WeightKind};

pub fn run(ctx: &Ctx) -> Result<Outcome> {
    let pot = ctx.cfg.potential(&ctx.base_dir)?;
    let weight = ctx.cfg.weight(&ctx.base_dir)?;
    let block = ctx.cfg.sigma_table.clone().unwrap_or(crate::config::SigmaTableBlock {
        r: None,
        r_min: None,
        r_max: None,
        count: None,
        diff_gate: None,
    });
    let rs: Vec<f64> = match block.r {
        Some(r) => r,
        None => {
            let lo = block.r_min.unwrap_or(0.01);
            let hi = block.r_max.unwrap_or(10.0);
            let n = block.count.unwrap_or(25);
            (0..n)
                .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
                .collect()
        }
    };
    let default_pair = matches!(pot.kind, PotentialKind::Quadratic)
        && matches!(weight.kind, WeightKind::Quadratic);
    let gate = block.diff_gate.unwrap_or(1e-6);

    let mut csv = CsvWriter::new(
        "sigma-table",
        &ctx.cfg_hash,
        ctx.seed,
        &[("closed_form", format!("{default_pair}"))],
    );
    csv.header("r,sigma_numeric,sigma_closed_form,diff");
    let mut worst: f64 = 0.0;
    for &r in &rs {
        let s = sigma_jump_cost(&weight, &pot, r)?;
        if default_pair {
            let exact = r / (1.0 + r);
            let diff = (s - exact).abs();
            worst = worst.max(diff);
            csv.row(&format!("{r:.6e},{s:.12e},{exact:.12e},{diff:.3e}"));
        } else {
            csv.row(&format!("{r:.6e},{s:.12e},,"));
        }
    }
    csv.write_to(&ctx.out_dir.join("sigma_table.csv"))?;
    if default_pair && worst > gate {
        return Ok(Outcome::PropertyViolation(format!(
            "max |sigma - r/(1+r)| = {worst:.3e} exceeds gate {gate:.3e}"
        )));
    }
    Ok(Outcome::Pass)
}
