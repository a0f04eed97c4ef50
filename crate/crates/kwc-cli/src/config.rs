//! Experiment configuration: TOML sections mirroring the fixture blocks.

use anyhow::{anyhow, bail, Context, Result};
use kwc_core::field::Rect;
use kwc_core::potential::{PotentialSpec, WeightSpec};
use kwc_core::setvalued::{Jump1d, Limit2d, Segment2d, SlicedLimit1d};
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    pub potential: Option<PotentialBlock>,
    pub weight: Option<WeightBlock>,
    pub grid: Option<GridBlock>,
    pub limit: Option<LimitBlock>,
    pub schedule: Option<ScheduleBlock>,
    pub output: Option<OutputBlock>,
    pub gamma_check: Option<GammaCheckBlock>,
    pub sigma_table: Option<SigmaTableBlock>,
    pub staircase: Option<StaircaseBlock>,
    pub metric_demo: Option<MetricDemoBlock>,
    pub elpf_check: Option<ElpfBlock>,
    pub denoise: Option<DenoiseBlock>,
    pub solve: Option<SolveBlock>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialBlock {
    pub kind: String,
    pub table_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightBlock {
    pub kind: String,
    pub delta: Option<f64>,
    pub table_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub dims: usize,
    pub shape: Vec<usize>,
    pub spacing: f64,
    #[serde(default)]
    pub origin: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitBlock {
    /// 1D: [lo, hi]
    pub domain: Option<[f64; 2]>,
    /// 1D jumps: [t, xi_minus, xi_plus]
    pub jumps: Option<Vec<[f64; 3]>>,
    /// 2D: [x0, y0, x1, y1]
    pub rect: Option<[f64; 4]>,
    /// 2D segments: [ax, ay, bx, by, xi_minus, xi_plus]
    pub segments: Option<Vec<[f64; 6]>>,
    /// alternative to `segments`: plain-text segment list
    pub segments_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleBlock {
    pub eps: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaCheckBlock {
    /// exit-2 gate on the final row's relative error
    pub rel_error_bound: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SigmaTableBlock {
    pub r: Option<Vec<f64>>,
    pub r_min: Option<f64>,
    pub r_max: Option<f64>,
    pub count: Option<usize>,
    /// gate on |numeric - closed form| for the default pair
    pub diff_gate: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StaircaseBlock {
    /// plateau values, equal widths across the grid
    pub steps: Vec<f64>,
    pub lambda: f64,
    pub levels: Option<usize>,
    pub noise: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricDemoBlock {
    pub grid_n: Option<usize>,
    pub bump_eps: Option<Vec<f64>>,
    pub cantor_depth: Option<u32>,
    pub cantor_eps: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElpfBlock {
    pub c: Vec<f64>,
    pub delta_min: f64,
    pub delta_max: f64,
    pub delta_count: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DenoiseBlock {
    /// input signal/image in the grid-field text format
    pub input: Option<PathBuf>,
    /// synthesize a noisy step instead of reading a file
    pub synth_step_height: Option<f64>,
    pub noise: Option<f64>,
    pub lambda: f64,
    pub jump_threshold: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SolveBlock {
    pub outer_iters: Option<usize>,
    pub v_tol: Option<f64>,
    pub u_tol: Option<f64>,
    pub joint_tol: Option<f64>,
    pub tau: Option<f64>,
    pub sigma_step: Option<f64>,
    pub pd_iters: Option<usize>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<(Self, String)> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: ExperimentConfig =
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        Ok((cfg, text))
    }

    pub fn potential(&self, base: &Path) -> Result<PotentialSpec> {
        match &self.potential {
            None => Ok(PotentialSpec::quadratic()),
            Some(p) => match p.kind.as_str() {
                "quadratic" => Ok(PotentialSpec::quadratic()),
                "quartic" => Ok(PotentialSpec::quartic()),
                "custom" => {
                    let file = p
                        .table_file
                        .as_ref()
                        .ok_or_else(|| anyhow!("custom potential needs table_file"))?;
                    let text = std::fs::read_to_string(base.join(file))?;
                    Ok(PotentialSpec::from_table_text(&text)?)
                }
                k => bail!("unknown potential kind '{k}'"),
            },
        }
    }

    pub fn weight(&self, base: &Path) -> Result<WeightSpec> {
        match &self.weight {
            None => Ok(WeightSpec::quadratic()),
            Some(w) => match w.kind.as_str() {
                "quadratic" => Ok(WeightSpec::quadratic()),
                "shifted" => Ok(WeightSpec::shifted(w.delta.unwrap_or(0.0))?),
                "custom" => {
                    let file = w
                        .table_file
                        .as_ref()
                        .ok_or_else(|| anyhow!("custom weight needs table_file"))?;
                    let text = std::fs::read_to_string(base.join(file))?;
                    Ok(WeightSpec::from_table_text(&text)?)
                }
                k => bail!("unknown weight kind '{k}'"),
            },
        }
    }

    pub fn grid(&self) -> Result<&GridBlock> {
        let g = self
            .grid
            .as_ref()
            .ok_or_else(|| anyhow!("missing [grid] section"))?;
        if g.dims != g.shape.len() || !(g.dims == 1 || g.dims == 2) {
            bail!("[grid] dims must be 1 or 2 and match shape length");
        }
        if !g.origin.is_empty() && g.origin.len() != g.dims {
            bail!("[grid] origin must match dims");
        }
        Ok(g)
    }

    pub fn limit_1d(&self) -> Result<SlicedLimit1d> {
        let l = self
            .limit
            .as_ref()
            .ok_or_else(|| anyhow!("missing [limit] section"))?;
        let domain = l
            .domain
            .ok_or_else(|| anyhow!("[limit] needs domain = [lo, hi] in 1D"))?;
        let jumps = l
            .jumps
            .as_ref()
            .ok_or_else(|| anyhow!("[limit] needs jumps in 1D"))?
            .iter()
            .map(|j| Jump1d {
                t: j[0],
                xi_minus: j[1],
                xi_plus: j[2],
            })
            .collect();
        Ok(SlicedLimit1d::new((domain[0], domain[1]), jumps)?)
    }

    pub fn limit_2d(&self, base: &Path) -> Result<Limit2d> {
        let l = self
            .limit
            .as_ref()
            .ok_or_else(|| anyhow!("missing [limit] section"))?;
        let r = l
            .rect
            .ok_or_else(|| anyhow!("[limit] needs rect = [x0, y0, x1, y1] in 2D"))?;
        let rect = Rect::new(r[0], r[1], r[2], r[3])?;
        if let Some(file) = &l.segments_file {
            let text = std::fs::read_to_string(base.join(file))?;
            return Ok(Limit2d::from_text(rect, &text)?);
        }
        let segs = l
            .segments
            .as_ref()
            .ok_or_else(|| anyhow!("[limit] needs segments in 2D"))?
            .iter()
            .map(|s| Segment2d {
                a: [s[0], s[1]],
                b: [s[2], s[3]],
                xi_minus: s[4],
                xi_plus: s[5],
            })
            .collect();
        Ok(Limit2d::new(rect, segs)?)
    }

    pub fn schedule(&self) -> Result<Vec<f64>> {
        Ok(self
            .schedule
            .as_ref()
            .ok_or_else(|| anyhow!("missing [schedule] section"))?
            .eps
            .clone())
    }
}
