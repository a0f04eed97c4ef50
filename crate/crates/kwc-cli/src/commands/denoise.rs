//! denoise: alternating minimization of the KWC energy with fidelity on a
//! signal or image, emitting the final fields, the energy trace, detected
//! jumps, and the sliced distance between the phase field and the set-valued
//! limit implied by the jumps.

use crate::report::CsvWriter;
use crate::{Ctx, Outcome};
use anyhow::{anyhow, Result};
use kwc_core::energy::{approximate_jumps, default_jump_threshold, JumpLocations};
use kwc_core::field::GridField;
use kwc_core::setvalued::{sliced_distance, Jump1d, SlicedLimit1d};
use kwc_core::solver::{alternate, SolveConfig};
use rand::Rng;
use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};

pub fn run(ctx: &Ctx) -> Result<Outcome> {
    let pot = ctx.cfg.potential(&ctx.base_dir)?;
    let weight = ctx.cfg.weight(&ctx.base_dir)?;
    let block = ctx
        .cfg
        .denoise
        .as_ref()
        .ok_or_else(|| anyhow!("missing [denoise] section"))?;

    let mut f = match (&block.input, block.synth_step_height) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(ctx.base_dir.join(path))?;
            GridField::from_text(&text)?
        }
        (None, Some(height)) => {
            let grid = ctx.cfg.grid()?;
            if grid.dims != 1 {
                return Err(anyhow!("synth step input needs a 1D [grid]"));
            }
            let origin = grid.origin.first().copied().unwrap_or(0.0);
            GridField::from_fn_1d(origin, grid.spacing, grid.shape[0], move |x| {
                if x < origin + grid.spacing * grid.shape[0] as f64 * 0.5 {
                    0.0
                } else {
                    height
                }
            })?
        }
        (None, None) => return Err(anyhow!("[denoise] needs input or synth_step_height")),
    };
    if let Some(noise) = block.noise {
        let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
        for v in f.values_mut() {
            *v += noise * rng.gen_range(-1.0..1.0);
        }
    }

    let mut config = SolveConfig {
        lambda: block.lambda,
        jump_threshold: block.jump_threshold,
        ..Default::default()
    };
    if let Ok(eps) = ctx.cfg.schedule() {
        config.eps_schedule = eps;
    }
    if let Some(s) = &ctx.cfg.solve {
        if let Some(v) = s.outer_iters {
            config.outer_iters = v;
        }
        if let Some(v) = s.v_tol {
            config.v_tol = v;
        }
        if let Some(v) = s.u_tol {
            config.u_tol = v;
        }
        if let Some(v) = s.joint_tol {
            config.joint_tol = v;
        }
        if let Some(v) = s.tau {
            config.tau = v;
        }
        if let Some(v) = s.sigma_step {
            config.sigma_step = v;
        }
        if let Some(v) = s.pd_iters {
            config.pd_iters = v;
        }
    }

    let trace = alternate(&f, &config, &pot, &weight)?;
    std::fs::write(ctx.out_dir.join("solve_config.txt"), config.to_kv_text())?;
    std::fs::write(ctx.out_dir.join("input_f.txt"), f.to_text())?;
    std::fs::write(ctx.out_dir.join("final_u.txt"), trace.final_u.to_text())?;
    std::fs::write(ctx.out_dir.join("final_v.txt"), trace.final_v.to_text())?;
    for (k, (eps, u, v)) in trace.snapshots.iter().enumerate() {
        std::fs::write(
            ctx.out_dir.join(format!("u_stage{k}_eps{eps}.txt")),
            u.to_text(),
        )?;
        std::fs::write(
            ctx.out_dir.join(format!("v_stage{k}_eps{eps}.txt")),
            v.to_text(),
        )?;
    }
    std::fs::write(ctx.out_dir.join("trace.csv"), trace.to_csv())?;

    let thr = block
        .jump_threshold
        .unwrap_or_else(|| default_jump_threshold(&f));
    let jumps = approximate_jumps(&trace.final_u, thr)?;
    let mut jcsv = CsvWriter::new(
        "denoise (jumps)",
        &ctx.cfg_hash,
        ctx.seed,
        &[("jump_threshold", format!("{thr:.6e}"))],
    );
    for w in &trace.warnings {
        jcsv.comment(w);
    }
    let eps_final = *config.eps_schedule.last().unwrap();
    match &jumps.locations {
        JumpLocations::Points(points) => {
            jcsv.header("t,size,u_minus,u_plus,v_at_face");
            for (k, t) in points.iter().enumerate() {
                jcsv.row(&format!(
                    "{t:.8e},{:.8e},{:.8e},{:.8e},{:.8e}",
                    jumps.sizes[k],
                    jumps.u_minus[k],
                    jumps.u_plus[k],
                    trace.final_v.interp_1d(*t)
                ));
            }
            jcsv.write_to(&ctx.out_dir.join("jumps.csv"))?;

            // set-valued limit implied by the jumps: xi- from the face
            // v-values, xi+ = 1
            let (lo, hi) = trace.final_u.domain_interval();
            let implied: Vec<Jump1d> = points
                .iter()
                .map(|&t| Jump1d {
                    t,
                    xi_minus: trace.final_v.interp_1d(t).min(1.0),
                    xi_plus: 1.0,
                })
                .collect();
            let mut dcsv = CsvWriter::new(
                "denoise (sliced distance)",
                &ctx.cfg_hash,
                ctx.seed,
                &[("eps_final", format!("{eps_final}"))],
            );
            dcsv.header("d_nu,degenerate_slices");
            if let Ok(limit) = SlicedLimit1d::new((lo, hi), implied) {
                let d = sliced_distance(
                    &trace.final_v,
                    &limit,
                    [1.0, 0.0],
                    &[0.0],
                    trace.final_v.spacing().max(1e-4),
                )?;
                dcsv.row(&format!("{:.8e},{}", d.value, d.degenerate_slices));
            } else {
                dcsv.comment("implied limit degenerate (no jumps or coincident locations)");
            }
            dcsv.write_to(&ctx.out_dir.join("dnu.csv"))?;
        }
        JumpLocations::Facets(facets) => {
            jcsv.header("ax,ay,bx,by,size,u_minus,u_plus");
            for (k, (a, b)) in facets.iter().enumerate() {
                jcsv.row(&format!(
                    "{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e}",
                    a[0], a[1], b[0], b[1], jumps.sizes[k], jumps.u_minus[k], jumps.u_plus[k]
                ));
            }
            // thin-band report: area where v dips, against the support bound
            let h = trace.final_v.spacing();
            let band_area = trace
                .final_v
                .values()
                .iter()
                .filter(|&&x| x < 0.9)
                .count() as f64
                * h
                * h;
            let interface_len = facets.len() as f64 * h;
            let bound = 7.0 * eps_final.sqrt() * (interface_len + 10.0 * eps_final.sqrt());
            jcsv.comment(&format!(
                "v-band area {band_area:.6e}, interface length {interface_len:.6e}, band bound {bound:.6e}"
            ));
            jcsv.write_to(&ctx.out_dir.join("jumps.csv"))?;
        }
    }
    Ok(Outcome::Pass)
}
