//! gamma-check: build recovery fields across the epsilon schedule, evaluate
//! their energies against the limit, one CSV row per epsilon.

use crate::report::CsvWriter;
use crate::{Ctx, Outcome};
use anyhow::{anyhow, Result};
use kwc_core::energy::{limit_modica_mortola_1d, limit_modica_mortola_2d, modica_mortola};
use kwc_core::potential::min_weight_on;
use kwc_core::profile::{recovery_field_1d, recovery_field_2d, PiecewiseProfile};
use kwc_core::Error;

pub fn run(ctx: &Ctx) -> Result<Outcome> {
    let pot = ctx.cfg.potential(&ctx.base_dir)?;
    let weight = ctx.cfg.weight(&ctx.base_dir)?;
    let grid = ctx.cfg.grid()?;
    let schedule = ctx.cfg.schedule()?;
    let bound = ctx
        .cfg
        .gamma_check
        .as_ref()
        .map(|b| b.rel_error_bound)
        .ok_or_else(|| anyhow!("missing [gamma_check] section with rel_error_bound"))?;

    let mut csv = CsvWriter::new("gamma-check", &ctx.cfg_hash, ctx.seed, &[]);
    csv.header("epsilon,e_smm_of_recovery,e0_limit,rel_error,status");

    let mut final_rel: Option<f64> = None;
    if grid.dims == 1 {
        let limit = ctx.cfg.limit_1d()?;
        let e0 = limit_modica_mortola_1d(&limit, &pot)?;
        let origin = grid.origin.first().copied().unwrap_or(limit.domain().0);
        let mut last_ok: Option<(f64, kwc_core::GridField)> = None;
        for &eps in &schedule {
            match recovery_field_1d(eps, &limit, &weight, &pot, origin, grid.spacing, grid.shape[0])
            {
                Ok(v) => {
                    let e = modica_mortola(&v, eps, &pot)?.total();
                    let rel = if e0 > 0.0 { (e - e0).abs() / e0 } else { e.abs() };
                    final_rel = Some(rel);
                    csv.row(&format!("{eps:.6e},{e:.12e},{e0:.12e},{rel:.6e},ok"));
                    last_ok = Some((eps, v));
                }
                Err(Error::EpsilonTooLarge { first, second }) => {
                    csv.row(&format!(
                        "{eps:.6e},,,,skipped (epsilon too large: supports {first}/{second})"
                    ));
                }
                Err(e) => return Err(e.into()),
            }
        }
        // plot-ready exports for the last evaluated epsilon
        if let Some((eps, v)) = last_ok {
            std::fs::write(ctx.out_dir.join("recovery_field.txt"), v.to_text())?;
            if let Some(j) = limit.jumps().first() {
                let (eta, _) = min_weight_on(&weight, j.xi_minus, j.xi_plus)?;
                let prof = PiecewiseProfile::build(eps, j.xi_minus, j.xi_plus, &pot)?
                    .with_shift_for(eta)?;
                let r = 6.0 * eps.sqrt();
                std::fs::write(
                    ctx.out_dir.join("profile.txt"),
                    prof.to_table_text(-r, r, 2000),
                )?;
            }
        }
    } else {
        let limit = ctx.cfg.limit_2d(&ctx.base_dir)?;
        let e0 = limit_modica_mortola_2d(&limit, &pot)?;
        let origin = [
            grid.origin.first().copied().unwrap_or(limit.domain().x0),
            grid.origin.get(1).copied().unwrap_or(limit.domain().y0),
        ];
        for &eps in &schedule {
            match recovery_field_2d(
                eps,
                &limit,
                &weight,
                &pot,
                origin,
                grid.spacing,
                [grid.shape[0], grid.shape[1]],
            ) {
                Ok(v) => {
                    let e = modica_mortola(&v, eps, &pot)?.total();
                    let rel = if e0 > 0.0 { (e - e0).abs() / e0 } else { e.abs() };
                    final_rel = Some(rel);
                    csv.row(&format!("{eps:.6e},{e:.12e},{e0:.12e},{rel:.6e},ok"));
                }
                Err(Error::EpsilonTooLarge { first, second }) => {
                    csv.row(&format!(
                        "{eps:.6e},,,,skipped (epsilon too large: supports {first}/{second})"
                    ));
                }
                Err(e) => return Err(e.into()),
            }
        }
    }
    csv.write_to(&ctx.out_dir.join("gamma_check.csv"))?;
    match final_rel {
        Some(rel) if rel <= bound => Ok(Outcome::Pass),
        Some(rel) => Ok(Outcome::PropertyViolation(format!(
            "final relative error {rel:.3e} exceeds bound {bound:.3e}"
        ))),
        None => Ok(Outcome::PropertyViolation(
            "no epsilon row could be evaluated".into(),
        )),
    }
}
