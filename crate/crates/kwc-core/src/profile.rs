//! Recovery-sequence construction: the equipartition ODE profile psi(s, c)
//! defined by int_c^psi dz/sqrt(F(z)) = s, the eight-piece Lipschitz profile
//! joining 1 -> a -> 1 -> b -> 1 across a jump, the shift pinning the weight
//! minimizer on the jump set, signed distances to flat segments, and the
//! recovery fields built from them.

use crate::error::{Error, Result};
use crate::field::GridField;
use crate::potential::{min_weight_on, PotentialSpec, WeightSpec};
use crate::quad;
use crate::setvalued::{point_segment_distance, Limit2d, Segment2d, SlicedLimit1d};

/// Gaps below this are indistinguishable from the well at f64 precision:
/// 1 - g collapses onto neighbouring floats and F(1 - g) is O(1e-26).
const GAP_FLOOR: f64 = 1e-13;

/// Tabulated solution of dpsi/ds = sqrt(F(psi)), psi(0) = c, built by
/// adaptive quadrature of the monotone map psi -> s and evaluated by cubic
/// Hermite interpolation with the exact slopes sqrt(F(psi)).
#[derive(Debug, Clone)]
pub struct ProfileTable {
    c: f64,
    /// s where the table reaches the well numerically; None when the map is
    /// clearly divergent (s_* = infinity), Some(estimate) when summable.
    s_star: Option<f64>,
    s_grid: Vec<f64>,
    psi_values: Vec<f64>,
    slopes: Vec<f64>,
}

impl ProfileTable {
    pub fn build(pot: &PotentialSpec, c: f64) -> Result<Self> {
        if !pot.satisfies_f1() {
            return Err(Error::invalid("profile needs a potential satisfying (F1)"));
        }
        let gap0 = (c - 1.0).abs();
        if gap0 <= GAP_FLOOR {
            return Ok(ProfileTable {
                c,
                s_star: Some(0.0),
                s_grid: vec![0.0],
                psi_values: vec![1.0],
                slopes: vec![0.0],
            });
        }
        let below = c < 1.0;
        let psi_of_gap = |g: f64| if below { 1.0 - g } else { 1.0 + g };
        let mut s_grid = vec![0.0];
        let mut psi_values = vec![c];
        let mut slopes = vec![signed_slope(pot, gap0, below)];
        let mut s = 0.0;
        // nodes in u = ln(gap0/gap), graded smoothly: du grows like e^{u/4} so
        // the centered-difference residual g * du^2 stays uniformly small
        let du0 = (2e-6 / gap0.max(1.0)).sqrt();
        let u_end = (gap0 / GAP_FLOOR).ln();
        let mut u = 0.0;
        let mut g_prev = gap0;
        // per-decade increment sums; their ratio detects a finite s_*
        let decade = std::f64::consts::LN_10;
        let mut decade_sums = vec![0.0_f64];
        while u < u_end {
            let du = du0 * (u / 4.0).exp();
            u = (u + du).min(u_end);
            let g = gap0 * (-u).exp();
            // ds = | int dz / sqrt(F) | over the psi step, integrated in the
            // gap coordinate where F can be evaluated without cancellation
            let ds = quad::integrate_rel(
                |t| 1.0 / pot.eval_gap(t, below).max(0.0).sqrt().max(1e-300),
                g,
                g_prev,
                1e-300,
                1e-11,
            )?;
            s += ds;
            let idx = (u / decade) as usize;
            if idx >= decade_sums.len() {
                decade_sums.resize(idx + 1, 0.0);
            }
            decade_sums[idx] += ds;
            s_grid.push(s);
            psi_values.push(psi_of_gap(g));
            slopes.push(signed_slope(pot, g, below));
            g_prev = g;
        }
        // the gap map is summable (finite s_*) iff late decades decay
        let n = decade_sums.len();
        let s_star = if n >= 3 && decade_sums[n - 2] < 0.9 * decade_sums[n - 3] {
            let rho = decade_sums[n - 2] / decade_sums[n - 3];
            Some(s + decade_sums[n - 2] * rho / (1.0 - rho))
        } else {
            None
        };
        Ok(ProfileTable {
            c,
            s_star,
            s_grid,
            psi_values,
            slopes,
        })
    }

    pub fn anchor(&self) -> f64 {
        self.c
    }
    pub fn s_star(&self) -> Option<f64> {
        self.s_star
    }
    pub fn s_grid(&self) -> &[f64] {
        &self.s_grid
    }
    pub fn psi_values(&self) -> &[f64] {
        &self.psi_values
    }

    fn s_end(&self) -> f64 {
        *self.s_grid.last().unwrap()
    }

    /// psi(|s|, c); even in s, clamped to 1 once the table reaches the well.
    pub fn eval(&self, s: f64) -> f64 {
        let s = s.abs();
        let n = self.s_grid.len();
        if n == 1 || s >= self.s_end() {
            return 1.0;
        }
        let i = match self
            .s_grid
            .binary_search_by(|p| p.partial_cmp(&s).unwrap())
        {
            Ok(i) => return self.psi_values[i],
            Err(i) => i - 1, // s > 0 = s_grid[0], so i >= 1
        };
        let h = self.s_grid[i + 1] - self.s_grid[i];
        let t = (s - self.s_grid[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.psi_values[i]
            + h01 * self.psi_values[i + 1]
            + h * (h10 * self.slopes[i] + h11 * self.slopes[i + 1])
    }

    /// Smallest s >= 0 with psi(s) = target (target between c and 1).
    pub fn invert(&self, target: f64) -> Result<f64> {
        let lo_v = self.c.min(1.0);
        let hi_v = self.c.max(1.0);
        if !(lo_v..=hi_v).contains(&target) {
            return Err(Error::invalid(format!(
                "profile inversion target {target} outside [{lo_v}, {hi_v}]"
            )));
        }
        if (target - self.c).abs() <= GAP_FLOOR {
            return Ok(0.0);
        }
        if (target - 1.0).abs() <= GAP_FLOOR {
            return Ok(self.s_end());
        }
        // the profile moves monotonically from c toward 1
        let toward_one = |v: f64| if self.c < 1.0 { v } else { -v };
        let lo_key = toward_one(self.psi_values[0]);
        let t_key = toward_one(target);
        let mut i = match self
            .psi_values
            .binary_search_by(|p| toward_one(*p).partial_cmp(&t_key).unwrap())
        {
            Ok(i) => return Ok(self.s_grid[i]),
            Err(i) => i.saturating_sub(1),
        };
        let _ = lo_key;
        i = i.min(self.s_grid.len().saturating_sub(2));
        let (sa, sb) = (self.s_grid[i], self.s_grid[i + 1]);
        quad::bisect(
            |s| toward_one(self.eval(s)) - t_key,
            sa,
            sb,
            1e-14 * (1.0 + sb),
        )
    }
}

fn signed_slope(pot: &PotentialSpec, gap: f64, below: bool) -> f64 {
    let root = pot.eval_gap(gap, below).max(0.0).sqrt();
    if below {
        root
    } else {
        -root
    }
}

/// psi(s, c): unique solution of int_c^psi dz/sqrt(F) = |s| on the c-side of
/// the well, evenly extended in s, identically 1 for c = 1.
pub fn ode_profile(pot: &PotentialSpec, s: f64, c: f64) -> Result<f64> {
    let table = ProfileTable::build(pot, c)?;
    Ok(table.eval(s))
}

/// Which of the eight pieces of the profile a point falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfilePiece {
    LeftTail,
    LeftConnector,
    WellA,
    RisingA,
    MidConnector,
    BumpB,
    RightConnector,
    RightTail,
}

/// The eight-piece Lipschitz profile: constant 1 tails, the psi(., a) well
/// around s = 0, a linear connector, the psi(., b) excursion around
/// s = 3 sqrt(eps), and a linear return to 1. Breakpoints at
/// {-2, -1, 0, 1, 2, 4, 5} x sqrt(eps).
#[derive(Debug, Clone)]
pub struct PiecewiseProfile {
    eps: f64,
    a: f64,
    b: f64,
    sqrt_eps: f64,
    table_a: ProfileTable,
    table_b: ProfileTable,
    /// value of the a-branch at |s| = sqrt(eps)
    p1: f64,
    /// value of the b-branch at distance sqrt(eps) from its center
    p2: f64,
    s0: f64,
}

impl PiecewiseProfile {
    pub fn build(eps: f64, a: f64, b: f64, pot: &PotentialSpec) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::invalid("need 0 < eps < 1"));
        }
        if !(a <= 1.0 && 1.0 <= b) {
            return Err(Error::invalid("need a <= 1 <= b"));
        }
        let sqrt_eps = eps.sqrt();
        let table_a = ProfileTable::build(pot, a)?;
        let table_b = ProfileTable::build(pot, b)?;
        let p1 = table_a.eval(sqrt_eps / eps);
        let p2 = table_b.eval(sqrt_eps / eps);
        Ok(PiecewiseProfile {
            eps,
            a,
            b,
            sqrt_eps,
            table_a,
            table_b,
            p1,
            p2,
            s0: 0.0,
        })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }
    pub fn endpoints(&self) -> (f64, f64) {
        (self.a, self.b)
    }
    pub fn shift(&self) -> f64 {
        self.s0
    }
    pub fn breakpoints(&self) -> [f64; 7] {
        let r = self.sqrt_eps;
        [-2.0 * r, -r, 0.0, r, 2.0 * r, 4.0 * r, 5.0 * r]
    }

    pub fn piece(&self, s: f64) -> ProfilePiece {
        let r = self.sqrt_eps;
        if s <= -2.0 * r {
            ProfilePiece::LeftTail
        } else if s <= -r {
            ProfilePiece::LeftConnector
        } else if s <= 0.0 {
            ProfilePiece::WellA
        } else if s <= r {
            ProfilePiece::RisingA
        } else if s <= 2.0 * r {
            ProfilePiece::MidConnector
        } else if s <= 4.0 * r {
            ProfilePiece::BumpB
        } else if s <= 5.0 * r {
            ProfilePiece::RightConnector
        } else {
            ProfilePiece::RightTail
        }
    }

    /// The unshifted profile.
    pub fn eval(&self, s: f64) -> f64 {
        let r = self.sqrt_eps;
        match self.piece(s) {
            ProfilePiece::LeftTail | ProfilePiece::RightTail => 1.0,
            ProfilePiece::LeftConnector => {
                // linear from (−2r, 1) to (−r, p1)
                1.0 + (self.p1 - 1.0) * (s + 2.0 * r) / r
            }
            ProfilePiece::WellA | ProfilePiece::RisingA => self.table_a.eval(s / self.eps),
            ProfilePiece::MidConnector => self.p1 + (self.p2 - self.p1) * (s - r) / r,
            ProfilePiece::BumpB => self.table_b.eval((s - 3.0 * r) / self.eps),
            ProfilePiece::RightConnector => self.p2 + (1.0 - self.p2) * (s - 4.0 * r) / r,
        }
    }

    /// The shifted profile phi(s) = Psi(s + s0).
    pub fn eval_shifted(&self, s: f64) -> f64 {
        self.eval(s + self.s0)
    }

    /// Smallest s0 >= 0 with Psi(s0) = eta, for eta in [a, b]: the unique
    /// root on the rising branch for eta < 1, the first attainment otherwise.
    pub fn shift_for(&self, eta: f64) -> Result<f64> {
        let r = self.sqrt_eps;
        if !(self.a..=self.b).contains(&eta) {
            return Err(Error::invalid(format!(
                "eta = {eta} outside the profile range [{}, {}]",
                self.a, self.b
            )));
        }
        if eta == self.eval(0.0) {
            return Ok(0.0);
        }
        if eta < 1.0 {
            if eta <= self.p1 {
                return Ok(self.eps * self.table_a.invert(eta)?);
            }
            // on the mid connector, which rises through 1
            let slope = (self.p2 - self.p1) / r;
            return Ok(r + (eta - self.p1) / slope);
        }
        // eta >= 1: first attainment is on the mid connector if reached there,
        // else on the rising half of the b-excursion
        if self.p2 >= eta {
            let slope = (self.p2 - self.p1) / r;
            if slope > 0.0 {
                return Ok(r + (eta - self.p1) / slope);
            }
            return Ok(2.0 * r);
        }
        if eta <= self.b {
            let back = self.eps * self.table_b.invert(eta)?;
            return Ok(3.0 * r - back);
        }
        Err(Error::invalid("eta above the profile maximum"))
    }

    /// Fix the shift so that the shifted profile equals eta at s = 0.
    pub fn with_shift_for(mut self, eta: f64) -> Result<Self> {
        self.s0 = self.shift_for(eta)?;
        Ok(self)
    }

    /// Interval of s where the shifted profile differs from 1.
    pub fn support(&self) -> (f64, f64) {
        let r = self.sqrt_eps;
        (-2.0 * r - self.s0, 5.0 * r - self.s0)
    }

    /// Two-column text (s, Psi_eps(s)) of the shifted profile on [lo, hi].
    pub fn to_table_text(&self, lo: f64, hi: f64, n: usize) -> String {
        let mut out = String::new();
        for i in 0..=n {
            let s = lo + (hi - lo) * i as f64 / n as f64;
            out.push_str(&format!("{s:.12e} {:.12e}\n", self.eval_shifted(s)));
        }
        out
    }
}

/// Signed distance to a flat segment: |sd| is the exact point-to-segment
/// distance, the sign comes from the side test against the supporting line,
/// oriented so the segment is the graph of a function over its major axis.
pub fn signed_distance_point(seg: &Segment2d, p: [f64; 2]) -> Result<f64> {
    let d = [seg.b[0] - seg.a[0], seg.b[1] - seg.a[1]];
    if d[0] == 0.0 && d[1] == 0.0 {
        return Err(Error::invalid("segment is not graph-like (zero length)"));
    }
    // orient along the graph axis so "above the graph" has a fixed sign
    let (a, dir) = if d[0].abs() >= d[1].abs() {
        if d[0] > 0.0 {
            (seg.a, d)
        } else {
            (seg.b, [-d[0], -d[1]])
        }
    } else if d[1] > 0.0 {
        (seg.a, d)
    } else {
        (seg.b, [-d[0], -d[1]])
    };
    let dist = point_segment_distance(p, seg.a, seg.b);
    let cr = dir[0] * (p[1] - a[1]) - dir[1] * (p[0] - a[0]);
    Ok(if cr >= 0.0 { dist } else { -dist })
}

/// Signed-distance samples of one segment on a cell-centred grid.
pub fn signed_distance_field(
    seg: &Segment2d,
    origin: [f64; 2],
    spacing: f64,
    shape: [usize; 2],
) -> Result<GridField> {
    GridField::from_fn_2d(origin, spacing, shape, |x, y| {
        signed_distance_point(seg, [x, y]).unwrap_or(f64::NAN)
    })
}

/// Recovery field on a 1D grid: around each jump t_k the shifted profile of
/// (xi-, xi+) evaluated at t - t_k, and 1 elsewhere. Supports must be
/// pairwise disjoint and inside the limit's domain.
pub fn recovery_field_1d(
    eps: f64,
    limit: &SlicedLimit1d,
    weight: &WeightSpec,
    pot: &PotentialSpec,
    origin: f64,
    spacing: f64,
    n: usize,
) -> Result<GridField> {
    let mut profiles = Vec::new();
    for j in limit.jumps() {
        let (eta, _) = min_weight_on(weight, j.xi_minus, j.xi_plus)?;
        let prof = PiecewiseProfile::build(eps, j.xi_minus, j.xi_plus, pot)?.with_shift_for(eta)?;
        profiles.push((j.t, prof));
    }
    let (dom_lo, dom_hi) = limit.domain();
    for (i, (t, prof)) in profiles.iter().enumerate() {
        let (lo, hi) = prof.support();
        if t + lo < dom_lo || t + hi > dom_hi {
            return Err(Error::EpsilonTooLarge { first: i, second: i });
        }
        for (k, (t2, prof2)) in profiles.iter().enumerate().skip(i + 1) {
            let (lo2, hi2) = prof2.support();
            if (t + hi).max(t2 + hi2) - (t + lo).min(t2 + lo2) < (hi - lo) + (hi2 - lo2) {
                return Err(Error::EpsilonTooLarge { first: i, second: k });
            }
        }
    }
    GridField::from_fn_1d(origin, spacing, n, |t| {
        for (tk, prof) in &profiles {
            let s = t - tk;
            let (lo, hi) = prof.support();
            if s > lo && s < hi {
                return prof.eval_shifted(s);
            }
        }
        1.0
    })
}

/// Recovery field on a 2D grid: around each segment the shifted profile
/// composed with the signed distance, and 1 elsewhere.
pub fn recovery_field_2d(
    eps: f64,
    limit: &Limit2d,
    weight: &WeightSpec,
    pot: &PotentialSpec,
    origin: [f64; 2],
    spacing: f64,
    shape: [usize; 2],
) -> Result<GridField> {
    let mut profiles = Vec::new();
    for seg in limit.segments() {
        let (eta, _) = min_weight_on(weight, seg.xi_minus, seg.xi_plus)?;
        let prof = PiecewiseProfile::build(eps, seg.xi_minus, seg.xi_plus, pot)?
            .with_shift_for(eta)?;
        profiles.push((seg, prof));
    }
    let dom = limit.domain();
    let radius = |prof: &PiecewiseProfile| {
        let (lo, hi) = prof.support();
        lo.abs().max(hi.abs())
    };
    for (i, (seg, prof)) in profiles.iter().enumerate() {
        let r = radius(prof);
        for p in [seg.a, seg.b] {
            if p[0] - r < dom.x0 || p[0] + r > dom.x1 || p[1] - r < dom.y0 || p[1] + r > dom.y1 {
                return Err(Error::EpsilonTooLarge { first: i, second: i });
            }
        }
        for (k, (seg2, prof2)) in profiles.iter().enumerate().skip(i + 1) {
            let gap = crate::setvalued::segment_pair_distance(seg, seg2);
            if gap <= r + radius(prof2) {
                return Err(Error::EpsilonTooLarge { first: i, second: k });
            }
        }
    }
    GridField::from_fn_2d(origin, spacing, shape, |x, y| {
        for (seg, prof) in &profiles {
            let dist = point_segment_distance([x, y], seg.a, seg.b);
            if dist <= radius(prof) {
                let sd = signed_distance_point(seg, [x, y]).unwrap_or(0.0);
                let (lo, hi) = prof.support();
                if sd > lo && sd < hi {
                    return prof.eval_shifted(sd);
                }
            }
        }
        1.0
    })
}

/// Report of the profile tail bound F(psi(1/delta, c)) / delta^2 <= (1-c)^2.
#[derive(Debug, Clone)]
pub struct TailBoundReport {
    pub ok: bool,
    /// max over the grid of ratio / bound (0 when every bound is 0/0-free)
    pub max_ratio: f64,
    pub max_excess: f64,
    pub worst_c: f64,
    pub worst_delta: f64,
}

/// Check F(psi(1/delta, c)) / delta^2 <= (1-c)^2 + slack on the given grids.
pub fn check_tail_bound(
    pot: &PotentialSpec,
    c_grid: &[f64],
    delta_grid: &[f64],
) -> Result<TailBoundReport> {
    const SLACK: f64 = 1e-8;
    if !pot.satisfies_f1() || !pot.satisfies_f2prime() {
        return Err(Error::invalid(
            "tail bound check needs (F1) and (F2')",
        ));
    }
    let mut report = TailBoundReport {
        ok: true,
        max_ratio: 0.0,
        max_excess: f64::NEG_INFINITY,
        worst_c: f64::NAN,
        worst_delta: f64::NAN,
    };
    for &c in c_grid {
        let table = ProfileTable::build(pot, c)?;
        for &delta in delta_grid {
            if delta <= 0.0 {
                return Err(Error::invalid("delta grid must be positive"));
            }
            let psi = table.eval(1.0 / delta);
            let lhs = pot.eval(psi).max(0.0) / (delta * delta);
            let bound = (1.0 - c) * (1.0 - c);
            let excess = lhs - bound;
            if excess > report.max_excess {
                report.max_excess = excess;
                report.worst_c = c;
                report.worst_delta = delta;
            }
            if bound > 0.0 {
                report.max_ratio = report.max_ratio.max(lhs / bound);
            }
            if excess > SLACK {
                report.ok = false;
            }
        }
    }
    Ok(report)
}
