//! Single-well potentials F, jump weights alpha, the transition cost
//! G(sigma) = |int_1^sigma sqrt(F)|, interval minima of alpha, and the relaxed
//! per-unit jump cost sigma(r).

use crate::error::{Error, Result};
use crate::quad;

/// Violations smaller than this count as exact zeros in assumption checks.
const ZERO_TOL: f64 = 1e-12;

/// Monotone piecewise-cubic (Fritsch-Carlson) table used for custom potentials.
#[derive(Debug, Clone)]
pub struct CubicTable {
    x: Vec<f64>,
    y: Vec<f64>,
    slope: Vec<f64>,
}

impl CubicTable {
    pub fn new(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::invalid("table needs at least 2 points"));
        }
        let mut pts = points.to_vec();
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let x: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let y: Vec<f64> = pts.iter().map(|p| p.1).collect();
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("table abscissae must be strictly increasing"));
        }
        let n = x.len();
        let mut delta = vec![0.0; n - 1];
        for i in 0..n - 1 {
            delta[i] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
        }
        // Fritsch-Carlson slopes: harmonic-weighted means, zeroed at local extrema
        let mut slope = vec![0.0; n];
        slope[0] = delta[0];
        slope[n - 1] = delta[n - 2];
        for i in 1..n - 1 {
            if delta[i - 1] * delta[i] <= 0.0 {
                slope[i] = 0.0;
            } else {
                let w1 = 2.0 * (x[i + 1] - x[i]) + (x[i] - x[i - 1]);
                let w2 = (x[i + 1] - x[i]) + 2.0 * (x[i] - x[i - 1]);
                slope[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        Ok(CubicTable { x, y, slope })
    }

    fn segment(&self, v: f64) -> usize {
        match self.x.binary_search_by(|p| p.partial_cmp(&v).unwrap()) {
            Ok(i) => i.min(self.x.len() - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(self.x.len() - 2),
        }
    }

    pub fn eval(&self, v: f64) -> f64 {
        let n = self.x.len();
        // linear end-slope extension outside the table
        if v <= self.x[0] {
            return self.y[0] + self.slope[0] * (v - self.x[0]);
        }
        if v >= self.x[n - 1] {
            return self.y[n - 1] + self.slope[n - 1] * (v - self.x[n - 1]);
        }
        let i = self.segment(v);
        let h = self.x[i + 1] - self.x[i];
        let t = (v - self.x[i]) / h;
        let (h00, h10, h01, h11) = hermite_basis(t);
        h00 * self.y[i] + h10 * h * self.slope[i] + h01 * self.y[i + 1] + h11 * h * self.slope[i + 1]
    }

    pub fn deriv(&self, v: f64) -> f64 {
        let n = self.x.len();
        if v <= self.x[0] {
            return self.slope[0];
        }
        if v >= self.x[n - 1] {
            return self.slope[n - 1];
        }
        let i = self.segment(v);
        let h = self.x[i + 1] - self.x[i];
        let t = (v - self.x[i]) / h;
        let d00 = (6.0 * t * t - 6.0 * t) / h;
        let d10 = 3.0 * t * t - 4.0 * t + 1.0;
        let d01 = (-6.0 * t * t + 6.0 * t) / h;
        let d11 = 3.0 * t * t - 2.0 * t;
        d00 * self.y[i] + d10 * self.slope[i] + d01 * self.y[i + 1] + d11 * self.slope[i + 1]
    }

    pub fn range(&self) -> (f64, f64) {
        (self.x[0], *self.x.last().unwrap())
    }

    pub fn knots(&self) -> &[f64] {
        &self.x
    }
}

fn hermite_basis(t: f64) -> (f64, f64, f64, f64) {
    let t2 = t * t;
    let t3 = t2 * t;
    (
        2.0 * t3 - 3.0 * t2 + 1.0,
        t3 - 2.0 * t2 + t,
        -2.0 * t3 + 3.0 * t2,
        t3 - t2,
    )
}

#[derive(Debug, Clone)]
pub enum PotentialKind {
    /// F(v) = (v-1)^2
    Quadratic,
    /// F(v) = (v-1)^2 (v^2+1)
    Quartic,
    /// Tabulated, monotone piecewise-cubic interpolated
    Custom(CubicTable),
}

/// A single-well potential together with its checked assumption flags.
///
/// Flags are always computed from samples, never trusted from input; for the
/// built-in kinds they hold by inspection.
#[derive(Debug, Clone)]
pub struct PotentialSpec {
    pub kind: PotentialKind,
    satisfies_f1: bool,
    satisfies_f2: bool,
    satisfies_f2prime: bool,
}

impl PotentialSpec {
    pub fn quadratic() -> Self {
        PotentialSpec {
            kind: PotentialKind::Quadratic,
            satisfies_f1: true,
            satisfies_f2: true,
            satisfies_f2prime: true,
        }
    }

    pub fn quartic() -> Self {
        PotentialSpec {
            kind: PotentialKind::Quartic,
            satisfies_f1: true,
            satisfies_f2: true,
            satisfies_f2prime: true,
        }
    }

    /// Custom potential from (v, F(v)) pairs. Assumption flags are computed on
    /// the table knots.
    pub fn from_table(points: &[(f64, f64)]) -> Result<Self> {
        let table = CubicTable::new(points)?;
        let mut knots = table.knots().to_vec();
        if !knots.iter().any(|&v| (v - 1.0).abs() <= ZERO_TOL) {
            knots.push(1.0);
        }
        let mut spec = PotentialSpec {
            kind: PotentialKind::Custom(table),
            satisfies_f1: false,
            satisfies_f2: false,
            satisfies_f2prime: false,
        };
        let report = check_assumptions(&spec, &knots)?;
        spec.satisfies_f1 = report.f1_ok;
        spec.satisfies_f2 = report.f2_ok;
        spec.satisfies_f2prime = report.f2prime_ok;
        Ok(spec)
    }

    /// Parse a two-column plain-text table: one "v F" pair per line,
    /// '#' comments and blank lines allowed.
    pub fn from_table_text(text: &str) -> Result<Self> {
        let pts = parse_pairs(text)?;
        if !pts.iter().any(|p| (p.0 - 1.0).abs() <= ZERO_TOL) {
            return Err(Error::invalid("potential table must contain v = 1"));
        }
        Self::from_table(&pts)
    }

    pub fn eval(&self, v: f64) -> f64 {
        match &self.kind {
            PotentialKind::Quadratic => (v - 1.0) * (v - 1.0),
            PotentialKind::Quartic => (v - 1.0) * (v - 1.0) * (v * v + 1.0),
            PotentialKind::Custom(t) => t.eval(v),
        }
    }

    pub fn deriv(&self, v: f64) -> f64 {
        match &self.kind {
            PotentialKind::Quadratic => 2.0 * (v - 1.0),
            PotentialKind::Quartic => 2.0 * (v - 1.0) * (2.0 * v * v - v + 1.0),
            PotentialKind::Custom(t) => t.deriv(v),
        }
    }

    /// F evaluated at distance `g` from the well (v = 1 - g below, 1 + g
    /// above), formulated to avoid the cancellation of computing v - 1.
    pub fn eval_gap(&self, g: f64, below: bool) -> f64 {
        let v = if below { 1.0 - g } else { 1.0 + g };
        match &self.kind {
            PotentialKind::Quadratic => g * g,
            PotentialKind::Quartic => g * g * (v * v + 1.0),
            PotentialKind::Custom(t) => t.eval(v),
        }
    }

    pub fn satisfies_f1(&self) -> bool {
        self.satisfies_f1
    }
    pub fn satisfies_f2(&self) -> bool {
        self.satisfies_f2
    }
    pub fn satisfies_f2prime(&self) -> bool {
        self.satisfies_f2prime
    }
}

#[derive(Debug, Clone)]
pub enum WeightKind {
    /// alpha(v) = v^2
    Quadratic,
    /// alpha(v) = v^2 + delta, delta >= 0
    Shifted(f64),
    /// Piecewise-linear table
    Custom(Vec<(f64, f64)>),
}

/// Jump weight alpha >= 0, continuous.
#[derive(Debug, Clone)]
pub struct WeightSpec {
    pub kind: WeightKind,
}

impl WeightSpec {
    pub fn quadratic() -> Self {
        WeightSpec {
            kind: WeightKind::Quadratic,
        }
    }

    pub fn shifted(delta: f64) -> Result<Self> {
        if delta < 0.0 {
            return Err(Error::invalid("shifted weight offset must be >= 0"));
        }
        Ok(WeightSpec {
            kind: WeightKind::Shifted(delta),
        })
    }

    pub fn from_table(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::invalid("weight table needs at least 2 points"));
        }
        let mut pts = points.to_vec();
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        if pts.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::invalid("weight table abscissae must be strictly increasing"));
        }
        if pts.iter().any(|p| p.1 < 0.0) {
            return Err(Error::invalid("weight must be non-negative"));
        }
        Ok(WeightSpec {
            kind: WeightKind::Custom(pts),
        })
    }

    pub fn from_table_text(text: &str) -> Result<Self> {
        Self::from_table(&parse_pairs(text)?)
    }

    pub fn eval(&self, v: f64) -> f64 {
        match &self.kind {
            WeightKind::Quadratic => v * v,
            WeightKind::Shifted(d) => v * v + d,
            WeightKind::Custom(pts) => {
                let n = pts.len();
                if v <= pts[0].0 {
                    return pts[0].1;
                }
                if v >= pts[n - 1].0 {
                    return pts[n - 1].1;
                }
                let i = match pts.binary_search_by(|p| p.0.partial_cmp(&v).unwrap()) {
                    Ok(i) => return pts[i].1,
                    Err(i) => i - 1,
                };
                let t = (v - pts[i].0) / (pts[i + 1].0 - pts[i].0);
                pts[i].1 + t * (pts[i + 1].1 - pts[i].1)
            }
        }
    }

    pub fn deriv(&self, v: f64) -> f64 {
        match &self.kind {
            WeightKind::Quadratic | WeightKind::Shifted(_) => 2.0 * v,
            WeightKind::Custom(pts) => {
                let n = pts.len();
                if v < pts[0].0 || v > pts[n - 1].0 {
                    return 0.0;
                }
                let i = match pts.binary_search_by(|p| p.0.partial_cmp(&v).unwrap()) {
                    Ok(i) => i.min(n - 2),
                    Err(i) => i - 1,
                };
                (pts[i + 1].1 - pts[i].1) / (pts[i + 1].0 - pts[i].0)
            }
        }
    }
}

fn parse_pairs(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace().map(|t| t.replace(',', ""));
        let a = it.next();
        let b = it.next();
        match (a, b) {
            (Some(a), Some(b)) => {
                let x: f64 = a
                    .parse()
                    .map_err(|_| Error::Parse(format!("line {}: bad number '{a}'", ln + 1)))?;
                let y: f64 = b
                    .parse()
                    .map_err(|_| Error::Parse(format!("line {}: bad number '{b}'", ln + 1)))?;
                out.push((x, y));
            }
            _ => return Err(Error::Parse(format!("line {}: expected two columns", ln + 1))),
        }
    }
    Ok(out)
}

/// Result of pointwise assumption checks on a sample grid.
#[derive(Debug, Clone, Copy)]
pub struct AssumptionReport {
    pub f1_ok: bool,
    pub f2_ok: bool,
    pub f2prime_ok: bool,
    /// Largest pointwise violation magnitude (negativity, well value, or
    /// monotonicity defect); 0 when all checks pass.
    pub worst_violation: f64,
}

/// Check (F1), (F2), (F2') pointwise on `sample_grid`.
///
/// (F2) is checked as: min of F over grid points with |v-1| > R stays
/// positive, where R is half the grid's extreme radius around the well.
pub fn check_assumptions(spec: &PotentialSpec, sample_grid: &[f64]) -> Result<AssumptionReport> {
    if sample_grid.is_empty() {
        return Err(Error::invalid("sample grid must be non-empty"));
    }
    if !sample_grid.iter().any(|&v| (v - 1.0).abs() <= ZERO_TOL) {
        return Err(Error::invalid("sample grid must contain v = 1"));
    }
    let mut worst: f64 = 0.0;
    let mut f1_ok = true;
    let mut f2prime_ok = true;
    for &v in sample_grid {
        let f = spec.eval(v);
        if f < -ZERO_TOL {
            f1_ok = false;
        }
        worst = worst.max(-f);
        if (v - 1.0).abs() <= ZERO_TOL {
            if f.abs() > ZERO_TOL {
                f1_ok = false;
            }
            worst = worst.max(f.abs());
        } else if f <= ZERO_TOL {
            // zero away from the well violates uniqueness
            f1_ok = false;
        }
        let mono = spec.deriv(v) * (v - 1.0);
        if mono < -ZERO_TOL {
            f2prime_ok = false;
        }
        worst = worst.max(-mono);
    }
    let radius = sample_grid
        .iter()
        .map(|&v| (v - 1.0).abs())
        .fold(0.0_f64, f64::max);
    let r = 0.5 * radius;
    let outside_min = sample_grid
        .iter()
        .filter(|&&v| (v - 1.0).abs() > r)
        .map(|&v| spec.eval(v))
        .fold(f64::INFINITY, f64::min);
    let f2_ok = outside_min.is_finite() && outside_min > ZERO_TOL;
    Ok(AssumptionReport {
        f1_ok,
        f2_ok,
        f2prime_ok,
        worst_violation: worst.max(0.0),
    })
}

/// Transition cost G(sigma) = | int_1^sigma sqrt(F(tau)) dtau |.
///
/// Adaptive quadrature with the well v = 1 always an interval endpoint, so
/// the degenerate zero of sqrt(F) never sits inside a panel.
pub fn transition_cost(spec: &PotentialSpec, sigma: f64) -> Result<f64> {
    if !spec.satisfies_f1() {
        return Err(Error::invalid(
            "transition cost needs a potential satisfying (F1)",
        ));
    }
    if sigma == 1.0 {
        return Ok(0.0);
    }
    let v = quad::integrate(|t| spec.eval(t).max(0.0).sqrt(), 1.0, sigma, 1e-10)?;
    Ok(v.abs())
}

/// Minimum of the weight over [xi_minus, xi_plus]: dense grid scan (4097
/// nodes) plus golden-section refinement; ties broken toward the smallest
/// argument. Returns (argmin, min value).
pub fn min_weight_on(weight: &WeightSpec, xi_minus: f64, xi_plus: f64) -> Result<(f64, f64)> {
    if xi_minus > xi_plus {
        return Err(Error::invalid(format!(
            "inverted interval [{xi_minus}, {xi_plus}]"
        )));
    }
    if xi_minus == xi_plus {
        return Ok((xi_minus, weight.eval(xi_minus)));
    }
    const NODES: usize = 4097;
    let h = (xi_plus - xi_minus) / (NODES - 1) as f64;
    let mut best_i = 0;
    let mut best = f64::INFINITY;
    for i in 0..NODES {
        let v = xi_minus + i as f64 * h;
        let a = weight.eval(v);
        if a < best {
            best = a;
            best_i = i;
        }
    }
    let lo = xi_minus + best_i.saturating_sub(1) as f64 * h;
    let hi = (xi_minus + (best_i + 1) as f64 * h).min(xi_plus);
    let (xg, fg) = quad::golden_min(|v| weight.eval(v), lo, hi, 1e-12);
    let (grid_x, grid_f) = (xi_minus + best_i as f64 * h, best);
    // prefer the refined point only on a strict improvement; on a tie keep the
    // smaller argument
    if fg < grid_f - 1e-15 || (fg <= grid_f + 1e-15 && xg < grid_x) {
        Ok((xg, fg.min(grid_f)))
    } else {
        Ok((grid_x, grid_f))
    }
}

/// Options for the sigma(r) minimization.
#[derive(Debug, Clone, Copy)]
pub struct SigmaOptions {
    /// The outer minimization runs over xi_minus in [1 - xi_max, 1].
    pub xi_max: f64,
}

impl Default for SigmaOptions {
    fn default() -> Self {
        SigmaOptions { xi_max: 10.0 }
    }
}

/// Detailed sigma(r) result: the cost, the outer minimizer xi_minus, and the
/// inner weight minimizer eta.
#[derive(Debug, Clone, Copy)]
pub struct SigmaDetail {
    pub value: f64,
    pub xi_minus: f64,
    pub eta: f64,
}

/// Relaxed per-unit-length cost of a jump of size r:
/// sigma(r) = min over xi_minus <= 1 of
///     r * min_{xi_minus <= xi <= 1} alpha(xi) + 2 G(xi_minus),
/// valid when alpha(v) >= alpha(1) for v >= 1; otherwise the full
/// two-variable minimization over xi_minus <= 1 <= xi_plus is used.
pub fn sigma_jump_cost(weight: &WeightSpec, pot: &PotentialSpec, r: f64) -> Result<f64> {
    Ok(sigma_jump_cost_detail(weight, pot, r, SigmaOptions::default())?.value)
}

pub fn sigma_jump_cost_detail(
    weight: &WeightSpec,
    pot: &PotentialSpec,
    r: f64,
    opt: SigmaOptions,
) -> Result<SigmaDetail> {
    if r < 0.0 {
        return Err(Error::invalid("jump size r must be >= 0"));
    }
    let alpha1 = weight.eval(1.0);
    // does alpha stay above alpha(1) for v >= 1?
    let one_sided = (0..=1024)
        .map(|i| 1.0 + opt.xi_max * i as f64 / 1024.0)
        .all(|v| weight.eval(v) >= alpha1 - ZERO_TOL);

    // cumulative G on a descending grid from the well
    const NODES: usize = 4097;
    let lo = 1.0 - opt.xi_max;
    let h = opt.xi_max / (NODES - 1) as f64;
    let mut g_at = vec![0.0_f64; NODES]; // g_at[k] = G(1 - k h)
    for k in 1..NODES {
        let a = 1.0 - k as f64 * h;
        let b = a + h;
        g_at[k] = g_at[k - 1] + quad::integrate(|t| pot.eval(t).max(0.0).sqrt(), a, b, 1e-12)?;
    }
    let g_below = |xi: f64| -> Result<f64> {
        // G(xi) for xi in [lo, 1] from the cumulative table plus a short panel
        let k = (((1.0 - xi) / h).floor() as usize).min(NODES - 1);
        let node = 1.0 - k as f64 * h;
        Ok(g_at[k] + quad::integrate(|t| pot.eval(t).max(0.0).sqrt(), xi, node, 1e-12)?)
    };

    if one_sided {
        // suffix minima of alpha on the same grid: inner_min[k] = min alpha on [1-kh, 1]
        let mut inner_min = vec![0.0_f64; NODES];
        let mut inner_arg = vec![1.0_f64; NODES];
        inner_min[0] = alpha1;
        for k in 1..NODES {
            let v = 1.0 - k as f64 * h;
            let a = weight.eval(v);
            if a < inner_min[k - 1] {
                inner_min[k] = a;
                inner_arg[k] = v;
            } else {
                inner_min[k] = inner_min[k - 1];
                inner_arg[k] = inner_arg[k - 1];
            }
        }
        let mut best_k = 0;
        let mut best = f64::INFINITY;
        for k in 0..NODES {
            let cost = r * inner_min[k] + 2.0 * g_at[k];
            if cost < best {
                best = cost;
                best_k = k;
            }
        }
        // golden refinement around the best grid node
        let xlo = (1.0 - (best_k + 1) as f64 * h).max(lo);
        let xhi = 1.0 - best_k.saturating_sub(1) as f64 * h;
        let objective = |xi: f64| -> f64 {
            let inner = min_weight_on(weight, xi, 1.0).map(|m| m.1).unwrap_or(f64::INFINITY);
            let g = g_below(xi).unwrap_or(f64::INFINITY);
            r * inner + 2.0 * g
        };
        let (xg, fg) = quad::golden_min(objective, xlo, xhi, 1e-11);
        let (xi_minus, value) = if fg < best {
            (xg, fg)
        } else {
            (1.0 - best_k as f64 * h, best)
        };
        let (eta, _) = min_weight_on(weight, xi_minus, 1.0)?;
        Ok(SigmaDetail {
            value,
            xi_minus,
            eta,
        })
    } else {
        // full two-variable search over xi_minus <= 1 <= xi_plus
        let g_above_tbl: Vec<f64> = {
            let mut g = vec![0.0_f64; NODES];
            for k in 1..NODES {
                let b = 1.0 + k as f64 * h;
                let a = b - h;
                g[k] = g[k - 1] + quad::integrate(|t| pot.eval(t).max(0.0).sqrt(), a, b, 1e-12)?;
            }
            g
        };
        // running minima of alpha away from the well: every candidate
        // interval contains 1, so its inner min is min(below, above)
        let mut below_min = vec![alpha1; NODES];
        let mut above_min = vec![alpha1; NODES];
        for k in 1..NODES {
            below_min[k] = below_min[k - 1].min(weight.eval(1.0 - k as f64 * h));
            above_min[k] = above_min[k - 1].min(weight.eval(1.0 + k as f64 * h));
        }
        const COARSE: usize = 257;
        let step = opt.xi_max / (COARSE - 1) as f64;
        let mut best = (f64::INFINITY, 1.0, 1.0);
        for i in 0..COARSE {
            let xm = 1.0 - i as f64 * step;
            let ki = (i * (NODES - 1) / (COARSE - 1)).min(NODES - 1);
            for j in 0..COARSE {
                let xp = 1.0 + j as f64 * step;
                let kj = (j * (NODES - 1) / (COARSE - 1)).min(NODES - 1);
                let inner = below_min[ki].min(above_min[kj]);
                let cost = r * inner + 2.0 * (g_at[ki] + g_above_tbl[kj]);
                if cost < best.0 {
                    best = (cost, xm, xp);
                }
            }
        }
        // coordinate-wise golden refinement
        let mut xm = best.1;
        let mut xp = best.2;
        for _ in 0..4 {
            let f_xm = |x: f64| {
                let inner = min_weight_on(weight, x, xp).map(|m| m.1).unwrap_or(f64::INFINITY);
                let g = g_below(x).unwrap_or(f64::INFINITY);
                let gp = transition_cost(pot, xp).unwrap_or(f64::INFINITY);
                r * inner + 2.0 * (g + gp)
            };
            xm = quad::golden_min(f_xm, (xm - step).max(lo), (xm + step).min(1.0), 1e-10).0;
            let f_xp = |x: f64| {
                let inner = min_weight_on(weight, xm, x).map(|m| m.1).unwrap_or(f64::INFINITY);
                let g = transition_cost(pot, x).unwrap_or(f64::INFINITY);
                let gm = g_below(xm).unwrap_or(f64::INFINITY);
                r * inner + 2.0 * (gm + g)
            };
            xp = quad::golden_min(f_xp, (xp - step).max(1.0), xp + step, 1e-10).0;
        }
        let inner = min_weight_on(weight, xm, xp)?;
        let value = r * inner.1 + 2.0 * (g_below(xm)? + transition_cost(pot, xp)?);
        Ok(SigmaDetail {
            value: value.min(best.0),
            xi_minus: xm,
            eta: inner.0,
        })
    }
}
