//! metric-demo: the two counterexamples separating graph convergence from
//! sliced graph convergence, at pixel scale.
//!
//! (a) Thick-Cantor annuli: the annulus family K_eps converges to K in the
//!     Hausdorff distance while slices at |x| in the Cantor set do not.
//! (b) Radial bump: every off-center slice graph converges, while the
//!     essential Hausdorff distance of the full graphs stays near 1.

use crate::report::CsvWriter;
use crate::{Ctx, Outcome};
use anyhow::Result;
use kwc_core::field::GridField;
use kwc_core::setvalued::{essential_hausdorff, hausdorff, PixelSet, SampledGraph, Sliceable};

/// Thick Cantor set membership up to removal depth `depth`:
/// G = [0,1] minus the union over n <= depth, odd a < 2^n of
/// (a/2^n - 2^-(2n+1), a/2^n + 2^-(2n+1)).
fn in_thick_cantor(r: f64, depth: u32) -> bool {
    if !(0.0..=1.0).contains(&r) {
        return false;
    }
    for n in 1..=depth {
        let scale = (1u64 << n) as f64;
        let radius = 0.5_f64.powi(2 * n as i32 + 1);
        let a = (r * scale).round();
        if a >= 1.0 && (a as u64) % 2 == 1 && (r - a / scale).abs() < radius {
            return false;
        }
    }
    true
}

pub fn run(ctx: &Ctx) -> Result<Outcome> {
    let block = ctx.cfg.metric_demo.clone().unwrap_or(crate::config::MetricDemoBlock {
        grid_n: None,
        bump_eps: None,
        cantor_depth: None,
        cantor_eps: None,
    });
    let n = block.grid_n.unwrap_or(512);
    let depth = block.cantor_depth.unwrap_or(3);
    let cantor_eps = block.cantor_eps.unwrap_or_else(|| vec![0.1, 0.05, 0.02]);
    let bump_eps = block.bump_eps.unwrap_or_else(|| vec![0.2, 0.1, 0.05]);

    cantor_demo(ctx, n, depth, &cantor_eps)?;
    bump_demo(ctx, n, &bump_eps)?;
    Ok(Outcome::Pass)
}

fn cantor_demo(ctx: &Ctx, n: usize, depth: u32, eps_list: &[f64]) -> Result<()> {
    let side = 2.2;
    let h = side / n as f64;
    let mask = |shift: f64| -> Vec<bool> {
        let mut m = vec![false; n * n];
        for j in 0..n {
            for i in 0..n {
                let x = -1.1 + (i as f64 + 0.5) * h;
                let y = -1.1 + (j as f64 + 0.5) * h;
                m[j * n + i] = in_thick_cantor(x.hypot(y) + shift, depth);
            }
        }
        m
    };
    let k_mask = mask(0.0);
    let k_set = PixelSet::from_mask(n, n, &k_mask, h)?;
    std::fs::write(ctx.out_dir.join("cantor_k.pgm"), k_set.to_pgm()?)?;

    let points_of = |m: &[bool]| -> Vec<[f64; 2]> {
        (0..n * n)
            .filter(|&idx| m[idx])
            .map(|idx| {
                let (i, j) = (idx % n, idx / n);
                [-1.1 + (i as f64 + 0.5) * h, -1.1 + (j as f64 + 0.5) * h]
            })
            .collect()
    };
    let k_points = SampledGraph::new(points_of(&k_mask), h)?;

    // slice positions with |x| in the Cantor set
    let slice_xs: Vec<f64> = [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0]
        .into_iter()
        .filter(|&x| in_thick_cantor(x, depth))
        .collect();
    let slice_points = |m: &[bool], x0: f64| -> Vec<[f64; 2]> {
        let i = (((x0 + 1.1) / h - 0.5).round() as usize).min(n - 1);
        (0..n)
            .filter(|&j| m[j * n + i])
            .map(|j| [-1.1 + (j as f64 + 0.5) * h, 0.0])
            .collect()
    };

    let mut csv = CsvWriter::new(
        "metric-demo (cantor)",
        &ctx.cfg_hash,
        ctx.seed,
        &[
            ("grid_n", n.to_string()),
            ("depth", depth.to_string()),
            ("spacing", format!("{h:.6e}")),
        ],
    );
    csv.comment("hausdorff of K_eps vs K shrinks with eps; slice distances at |x| in G stay at grid scale");
    csv.header("epsilon,hausdorff_k_eps_to_k,slice_x,slice_distance");
    for &eps in eps_list {
        let m = mask(eps);
        let set = PixelSet::from_mask(n, n, &m, h)?;
        std::fs::write(
            ctx.out_dir.join(format!("cantor_k_eps_{eps}.pgm")),
            set.to_pgm()?,
        )?;
        let pts = SampledGraph::new(points_of(&m), h)?;
        let dh = hausdorff(&pts, &k_points)?;
        csv.row(&format!("{eps:.6e},{dh:.6e},,"));
        for &x0 in &slice_xs {
            let a = slice_points(&m, x0);
            let b = slice_points(&k_mask, x0);
            if a.is_empty() || b.is_empty() {
                csv.row(&format!("{eps:.6e},,{x0:.6},empty-slice"));
                continue;
            }
            let d = hausdorff(
                &SampledGraph::new(a, h)?,
                &SampledGraph::new(b, h)?,
            )?;
            csv.row(&format!("{eps:.6e},,{x0:.6},{d:.6e}"));
        }
    }
    csv.write_to(&ctx.out_dir.join("metric_demo_cantor.csv"))?;
    Ok(())
}

fn bump_demo(ctx: &Ctx, n: usize, eps_list: &[f64]) -> Result<()> {
    let side = 2.4;
    let h = side / n as f64;
    let mut csv = CsvWriter::new(
        "metric-demo (radial bump)",
        &ctx.cfg_hash,
        ctx.seed,
        &[
            ("grid_n", n.to_string()),
            ("spacing", format!("{h:.6e}")),
            ("voxel_spacing", format!("{:.6e}", 2.0 * h)),
        ],
    );
    csv.comment("essential Hausdorff of the graphs stays near 1 while off-center slice distances vanish");
    csv.header("epsilon,essential_hausdorff,max_offcenter_slice_distance");
    let zero = GridField::from_fn_2d([-1.2, -1.2], h, [n, n], |_, _| 0.0)?;
    for &eps in eps_list {
        let bump = GridField::from_fn_2d([-1.2, -1.2], h, [n, n], |x, y| {
            (1.0 - x.hypot(y) / eps).max(0.0)
        })?;
        // graphs voxelized at twice the field spacing
        let decimate = |f: &GridField| -> Result<GridField> {
            let m = n / 2;
            let mut vals = Vec::with_capacity(m * m);
            for ix in 0..m {
                for iy in 0..m {
                    vals.push(f.at(2 * ix, 2 * iy));
                }
            }
            Ok(GridField::from_values_2d(
                [-1.2 - 0.5 * h, -1.2 - 0.5 * h],
                2.0 * h,
                [m, m],
                vals,
            )?)
        };
        let ga = PixelSet::from_graph_of_field_2d(&decimate(&bump)?)?;
        let gb = PixelSet::from_graph_of_field_2d(&decimate(&zero)?)?;
        let deh = essential_hausdorff(&ga, &gb)?;
        let mut max_slice = 0.0_f64;
        for &x0 in &[0.3, 0.5, 0.7, 0.9, -0.4, -0.8] {
            let a = bump.slice_graph([0.0, 1.0], [x0, 0.0], h)?;
            let b = zero.slice_graph([0.0, 1.0], [x0, 0.0], h)?;
            max_slice = max_slice.max(hausdorff(&a, &b)?);
        }
        csv.row(&format!("{eps:.6e},{deh:.6e},{max_slice:.6e}"));
    }
    csv.write_to(&ctx.out_dir.join("metric_demo_bump.csv"))?;
    Ok(())
}
