//! staircase: the jump-aware TV minimizer (DP oracle) against the plain TV
//! proximal (taut string) on the same staircase signal.

use crate::report::CsvWriter;
use crate::{Ctx, Outcome};
use anyhow::{anyhow, Result};
use kwc_core::energy::{approximate_jumps, fidelity, tv_kwc, weighted_tv};
use kwc_core::field::GridField;
use kwc_core::solver::{minimize_tv_kwc_1d, tv_prox_taut_string};
use rand::Rng;
use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};

pub fn run(ctx: &Ctx) -> Result<Outcome> {
    let pot = ctx.cfg.potential(&ctx.base_dir)?;
    let weight = ctx.cfg.weight(&ctx.base_dir)?;
    let grid = ctx.cfg.grid()?;
    if grid.dims != 1 {
        return Err(anyhow!("staircase needs a 1D grid"));
    }
    let block = ctx
        .cfg
        .staircase
        .as_ref()
        .ok_or_else(|| anyhow!("missing [staircase] section"))?;
    let n = grid.shape[0];
    let origin = grid.origin.first().copied().unwrap_or(0.0);
    let h = grid.spacing;
    let steps = &block.steps;
    if steps.is_empty() {
        return Err(anyhow!("[staircase] steps must be non-empty"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let noise = block.noise.unwrap_or(0.0);
    let vals: Vec<f64> = (0..n)
        .map(|i| {
            let k = (i * steps.len()) / n;
            steps[k] + noise * rng.gen_range(-1.0..1.0)
        })
        .collect();
    let f = GridField::from_values_1d(origin, h, vals.clone())?;

    let levels = block.levels.unwrap_or(64);
    let lambda = block.lambda;
    let u_kwc = minimize_tv_kwc_1d(&f, lambda, &pot, &weight, levels)?;
    // plain TV + fidelity: prox weight 1/(lambda h)
    let u_tv_vals = tv_prox_taut_string(&vals, 1.0 / (lambda * h))?;
    let u_tv = GridField::from_values_1d(origin, h, u_tv_vals)?;

    let thr = 0.25
        * steps
            .windows(2)
            .map(|w| (w[1] - w[0]).abs())
            .fold(f64::INFINITY, f64::min)
            .max(1e-9);
    let ones = GridField::from_values_1d(origin, h, vec![1.0; n])?;
    let kwc_jump_cost = tv_kwc(&u_kwc, &pot, &weight, thr)? - tv_below(&u_kwc, thr);
    let mut csv = CsvWriter::new(
        "staircase",
        &ctx.cfg_hash,
        ctx.seed,
        &[("lambda", format!("{lambda}")), ("levels", format!("{levels}"))],
    );
    csv.header("method,jump_count,jump_sizes,jump_cost,plain_tv,fidelity,objective");
    for (name, u, jump_cost) in [
        ("tv_kwc_dp", &u_kwc, kwc_jump_cost),
        ("tv_taut_string", &u_tv, weighted_tv(&u_tv, &ones)?),
    ] {
        let jumps = approximate_jumps(u, thr)?;
        let sizes: Vec<String> = jumps.sizes.iter().map(|s| format!("{s:.4}")).collect();
        let fid = fidelity(u, &f, lambda)?;
        let tv = weighted_tv(u, &ones)?;
        csv.row(&format!(
            "{name},{},{},{jump_cost:.8e},{tv:.8e},{fid:.8e},{:.8e}",
            jumps.sizes.len(),
            sizes.join(";"),
            jump_cost + fid
        ));
    }
    std::fs::write(ctx.out_dir.join("staircase_u_tvkwc.txt"), u_kwc.to_text())?;
    std::fs::write(ctx.out_dir.join("staircase_u_tv.txt"), u_tv.to_text())?;
    std::fs::write(ctx.out_dir.join("staircase_input.txt"), f.to_text())?;
    csv.write_to(&ctx.out_dir.join("staircase.csv"))?;
    Ok(Outcome::Pass)
}

/// TV restricted to the sub-threshold faces.
fn tv_below(u: &GridField, thr: f64) -> f64 {
    let vals = u.values();
    let mut tv = 0.0;
    for i in 0..vals.len() - 1 {
        let d = (vals[i + 1] - vals[i]).abs();
        if d <= thr {
            tv += d;
        }
    }
    tv
}
