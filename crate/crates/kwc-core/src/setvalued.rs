//! Set-valued limits (interval values on a singular set, {1} elsewhere) and
//! the metrics used to compare them with phase fields: graph Hausdorff
//! distance, the per-direction sliced distance, its weighted sum over a
//! direction set, and the essential Hausdorff distance on pixel grids.

use crate::error::{Error, Result};
use crate::field::{GridField, Rect};

const UNIT_TOL: f64 = 1e-12;

#[inline]
fn cross(p: [f64; 2], q: [f64; 2]) -> f64 {
    p[0] * q[1] - p[1] * q[0]
}

#[inline]
fn sub(p: [f64; 2], q: [f64; 2]) -> [f64; 2] {
    [p[0] - q[0], p[1] - q[1]]
}

#[inline]
fn dot(p: [f64; 2], q: [f64; 2]) -> f64 {
    p[0] * q[0] + p[1] * q[1]
}

#[inline]
fn norm(p: [f64; 2]) -> f64 {
    p[0].hypot(p[1])
}

pub(crate) fn point_segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = sub(b, a);
    let l2 = dot(d, d);
    if l2 == 0.0 {
        return norm(sub(p, a));
    }
    let t = (dot(sub(p, a), d) / l2).clamp(0.0, 1.0);
    norm(sub(p, [a[0] + t * d[0], a[1] + t * d[1]]))
}

pub(crate) fn segment_pair_distance(a: &Segment2d, b: &Segment2d) -> f64 {
    // segments are disjoint iff they do not intersect; then the minimum is
    // attained endpoint-to-segment
    let d1 = sub(a.b, a.a);
    let d2 = sub(b.b, b.a);
    let denom = cross(d1, d2);
    if denom.abs() > 1e-15 {
        let t = cross(sub(b.a, a.a), d2) / denom;
        let u = cross(sub(b.a, a.a), d1) / denom;
        if (0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u) {
            return 0.0;
        }
    }
    [
        point_segment_distance(a.a, b.a, b.b),
        point_segment_distance(a.b, b.a, b.b),
        point_segment_distance(b.a, a.a, a.b),
        point_segment_distance(b.b, a.a, a.b),
    ]
    .into_iter()
    .fold(f64::INFINITY, f64::min)
}

/// One jump of a 1D set-valued limit: value [xi_minus, xi_plus] at t.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jump1d {
    pub t: f64,
    pub xi_minus: f64,
    pub xi_plus: f64,
}

/// Set-valued limit on an interval: {1} off the jump set, [xi-, xi+] at each
/// jump point.
#[derive(Debug, Clone, PartialEq)]
pub struct SlicedLimit1d {
    domain: (f64, f64),
    jumps: Vec<Jump1d>,
}

impl SlicedLimit1d {
    pub fn new(domain: (f64, f64), mut jumps: Vec<Jump1d>) -> Result<Self> {
        if domain.0 >= domain.1 {
            return Err(Error::invalid("1D limit needs a non-degenerate domain"));
        }
        jumps.sort_by(|a, b| a.t.partial_cmp(&b.t).unwrap());
        for w in jumps.windows(2) {
            if w[1].t <= w[0].t {
                return Err(Error::invalid("jump positions must be strictly increasing"));
            }
        }
        for j in &jumps {
            if j.t <= domain.0 || j.t >= domain.1 {
                return Err(Error::invalid("jump positions must lie in the open domain"));
            }
            if !(j.xi_minus <= 1.0 && 1.0 <= j.xi_plus) {
                return Err(Error::invalid("jump values must satisfy xi- <= 1 <= xi+"));
            }
        }
        Ok(SlicedLimit1d { domain, jumps })
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }
    pub fn jumps(&self) -> &[Jump1d] {
        &self.jumps
    }
}

/// One flat piece of a 2D singular set with constant interval values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment2d {
    pub a: [f64; 2],
    pub b: [f64; 2],
    pub xi_minus: f64,
    pub xi_plus: f64,
}

impl Segment2d {
    pub fn length(&self) -> f64 {
        norm(sub(self.b, self.a))
    }
}

/// Set-valued limit on a rectangle: {1} off the segments, [xi-, xi+] on them.
#[derive(Debug, Clone, PartialEq)]
pub struct Limit2d {
    segments: Vec<Segment2d>,
    domain: Rect,
}

impl Limit2d {
    pub fn new(domain: Rect, segments: Vec<Segment2d>) -> Result<Self> {
        for s in &segments {
            if s.length() <= 0.0 {
                return Err(Error::invalid("segments must have positive length"));
            }
            if !(domain.contains(s.a) && domain.contains(s.b)) {
                return Err(Error::invalid("segments must lie inside the domain"));
            }
            if !(s.xi_minus <= 1.0 && 1.0 <= s.xi_plus) {
                return Err(Error::invalid("segment values must satisfy xi- <= 1 <= xi+"));
            }
        }
        for i in 0..segments.len() {
            for j in i + 1..segments.len() {
                if segment_pair_distance(&segments[i], &segments[j]) <= UNIT_TOL {
                    return Err(Error::invalid(format!(
                        "segments {i} and {j} are not disjoint"
                    )));
                }
            }
        }
        Ok(Limit2d { segments, domain })
    }

    pub fn segments(&self) -> &[Segment2d] {
        &self.segments
    }
    pub fn domain(&self) -> Rect {
        self.domain
    }

    /// Serialize as one line per segment: `ax ay bx by xi_minus xi_plus`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for seg in &self.segments {
            s.push_str(&format!(
                "{:.17e} {:.17e} {:.17e} {:.17e} {:.17e} {:.17e}\n",
                seg.a[0], seg.a[1], seg.b[0], seg.b[1], seg.xi_minus, seg.xi_plus
            ));
        }
        s
    }

    pub fn from_text(domain: Rect, text: &str) -> Result<Self> {
        let mut segments = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let nums: Vec<f64> = line
                .split_whitespace()
                .map(|t| {
                    t.parse()
                        .map_err(|_| Error::Parse(format!("segment line {}: '{t}'", ln + 1)))
                })
                .collect::<Result<_>>()?;
            if nums.len() != 6 {
                return Err(Error::Parse(format!(
                    "segment line {}: expected 6 columns",
                    ln + 1
                )));
            }
            segments.push(Segment2d {
                a: [nums[0], nums[1]],
                b: [nums[2], nums[3]],
                xi_minus: nums[4],
                xi_plus: nums[5],
            });
        }
        Limit2d::new(domain, segments)
    }
}

/// Finite planar point set approximating the graph of a slice.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledGraph {
    pub points: Vec<[f64; 2]>,
    pub resolution: f64,
}

impl SampledGraph {
    pub fn new(points: Vec<[f64; 2]>, resolution: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("sampled graph must be non-empty"));
        }
        Ok(SampledGraph { points, resolution })
    }
}

/// Truncated countable dense direction set with weights 2^-j.
#[derive(Debug, Clone)]
pub struct DirectionSet {
    pub directions: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl DirectionSet {
    /// First `m` directions of the golden-angle sequence on the circle,
    /// weights 2^-j for j = 1..=m.
    pub fn golden(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid("direction set must be non-empty"));
        }
        let golden_angle = std::f64::consts::PI * (3.0 - 5.0_f64.sqrt());
        let mut directions = Vec::with_capacity(m);
        let mut weights = Vec::with_capacity(m);
        for j in 1..=m {
            let theta = j as f64 * golden_angle;
            directions.push([theta.cos(), theta.sin()]);
            weights.push(0.5_f64.powi(j as i32));
        }
        Ok(DirectionSet {
            directions,
            weights,
        })
    }

    /// Tail bound of the truncation: sum of the dropped weights 2^-j, j > m.
    pub fn tail_bound(&self) -> f64 {
        0.5_f64.powi(self.directions.len() as i32)
    }
}

/// Slice a 2D limit along the line x + t nu. Jump positions are the
/// parameters t where the line crosses a segment, carrying that segment's
/// interval values. Lines running along a segment are degenerate.
pub fn slice_limit(limit: &Limit2d, nu: [f64; 2], x: [f64; 2]) -> Result<SlicedLimit1d> {
    if (norm(nu) - 1.0).abs() > UNIT_TOL {
        return Err(Error::invalid("direction must be a unit vector"));
    }
    if dot(x, nu).abs() > 1e-9 {
        return Err(Error::invalid("slice base point must be orthogonal to nu"));
    }
    let (t0, t1) = line_rect_interval(x, nu, limit.domain())
        .ok_or_else(|| Error::invalid("slice line misses the domain"))?;
    let mut jumps = Vec::new();
    for seg in limit.segments() {
        let d = sub(seg.b, seg.a);
        let len = norm(d);
        let denom = cross(nu, d);
        if denom.abs() <= UNIT_TOL * len {
            // parallel; degenerate only if the line actually runs along the segment
            let dist = point_segment_distance(seg.a, x, [x[0] + nu[0], x[1] + nu[1]]);
            let line_dist = cross(nu, sub(seg.a, x)).abs();
            let _ = dist;
            if line_dist <= 1e-9 {
                return Err(Error::DegenerateSlice { x, nu });
            }
            continue;
        }
        let rel = sub(seg.a, x);
        let t = cross(rel, d) / cross(nu, d);
        let u = -cross(rel, nu) / cross(d, nu);
        if (0.0..=1.0).contains(&u) && t > t0 && t < t1 {
            jumps.push(Jump1d {
                t,
                xi_minus: seg.xi_minus,
                xi_plus: seg.xi_plus,
            });
        }
    }
    SlicedLimit1d::new((t0, t1), jumps)
}

/// Parameter interval of the line x + t nu inside the rectangle, if any.
fn line_rect_interval(x: [f64; 2], nu: [f64; 2], rect: Rect) -> Option<(f64, f64)> {
    let mut t_lo = f64::NEG_INFINITY;
    let mut t_hi = f64::INFINITY;
    for axis in 0..2 {
        let (lo, hi) = if axis == 0 {
            (rect.x0, rect.x1)
        } else {
            (rect.y0, rect.y1)
        };
        if nu[axis].abs() < 1e-300 {
            if x[axis] < lo || x[axis] > hi {
                return None;
            }
        } else {
            let a = (lo - x[axis]) / nu[axis];
            let b = (hi - x[axis]) / nu[axis];
            t_lo = t_lo.max(a.min(b));
            t_hi = t_hi.min(a.max(b));
        }
    }
    (t_lo < t_hi).then_some((t_lo, t_hi))
}

/// Graph of a 1D grid field: the point set {(t_i, v_i)}.
pub fn graph_of_field(v: &GridField) -> Result<SampledGraph> {
    if v.dims() != 1 {
        return Err(Error::invalid("graph_of_field expects a 1D field"));
    }
    if v.len() < 2 {
        return Err(Error::invalid("graph_of_field needs at least 2 samples"));
    }
    let points = (0..v.len())
        .map(|i| [v.coord_1d(i), v.values()[i]])
        .collect();
    SampledGraph::new(points, v.spacing())
}

/// Graph of a 1D set-valued limit: background line at height 1 sampled at
/// spacing <= resolution, plus each vertical interval {t_k} x [xi-, xi+]
/// sampled at spacing <= resolution.
pub fn graph_of_limit(sl: &SlicedLimit1d, resolution: f64) -> Result<SampledGraph> {
    if resolution <= 0.0 {
        return Err(Error::invalid("resolution must be positive"));
    }
    let (lo, hi) = sl.domain();
    let len = hi - lo;
    let n = (len / resolution).ceil().max(1.0) as usize;
    let mut points = Vec::with_capacity(n + 1);
    for i in 0..=n {
        points.push([lo + len * i as f64 / n as f64, 1.0]);
    }
    for j in sl.jumps() {
        let span = j.xi_plus - j.xi_minus;
        if span <= 0.0 {
            points.push([j.t, 1.0]);
            continue;
        }
        let m = (span / resolution).ceil().max(1.0) as usize;
        for k in 0..=m {
            points.push([j.t, j.xi_minus + span * k as f64 / m as f64]);
        }
    }
    SampledGraph::new(points, resolution)
}

/// Exact Hausdorff distance between two finite point sets. Brute force below
/// 10^4 points per set, uniform spatial hashing (still exact) above.
pub fn hausdorff(a: &SampledGraph, b: &SampledGraph) -> Result<f64> {
    if a.points.is_empty() || b.points.is_empty() {
        return Err(Error::invalid("hausdorff needs non-empty point sets"));
    }
    Ok(directed(&a.points, &b.points).max(directed(&b.points, &a.points)))
}

fn directed(from: &[[f64; 2]], to: &[[f64; 2]]) -> f64 {
    if from.len().max(to.len()) <= 10_000 {
        let mut worst = 0.0_f64;
        for p in from {
            let mut best = f64::INFINITY;
            for q in to {
                let d2 = (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2);
                if d2 < best {
                    best = d2;
                }
            }
            worst = worst.max(best);
        }
        return worst.sqrt();
    }
    directed_hashed(from, to)
}

fn directed_hashed(from: &[[f64; 2]], to: &[[f64; 2]]) -> f64 {
    use std::collections::HashMap;
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in to {
        x0 = x0.min(p[0]);
        y0 = y0.min(p[1]);
        x1 = x1.max(p[0]);
        y1 = y1.max(p[1]);
    }
    let diag = ((x1 - x0).powi(2) + (y1 - y0).powi(2)).sqrt();
    let cell = (diag / (to.len() as f64).sqrt()).max(diag * 1e-12).max(1e-300);
    let key = |p: &[f64; 2]| -> (i64, i64) {
        (
            ((p[0] - x0) / cell).floor() as i64,
            ((p[1] - y0) / cell).floor() as i64,
        )
    };
    let mut buckets: HashMap<(i64, i64), Vec<[f64; 2]>> = HashMap::new();
    for p in to {
        buckets.entry(key(p)).or_default().push(*p);
    }
    let mut worst = 0.0_f64;
    for p in from {
        let (kx, ky) = key(p);
        let mut best = f64::INFINITY;
        let mut ring: i64 = 0;
        loop {
            // points in ring r are at distance >= (r-1)*cell; once the current
            // best beats that, it is exact
            if ring > 0 && best.is_finite() && best.sqrt() <= (ring - 1) as f64 * cell {
                break;
            }
            let mut any_cell_possible = false;
            for dx in -ring..=ring {
                for dy in -ring..=ring {
                    if dx.abs() != ring && dy.abs() != ring {
                        continue;
                    }
                    any_cell_possible = true;
                    if let Some(pts) = buckets.get(&(kx + dx, ky + dy)) {
                        for q in pts {
                            let d2 = (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2);
                            if d2 < best {
                                best = d2;
                            }
                        }
                    }
                }
            }
            ring += 1;
            // safety: beyond the bounding box plus current best there is nothing
            if (!any_cell_possible
                || ring as f64 * cell
                    > 2.0 * diag + (p[0] - x0).abs() + (p[1] - y0).abs() + best.sqrt())
                && best.is_finite()
            {
                break;
            }
        }
        worst = worst.max(best);
    }
    worst.sqrt()
}

/// Anything that can produce the graph of its slice along a line.
pub trait Sliceable {
    fn slice_dims(&self) -> usize;
    /// 2D objects: the rectangle being sliced. 1D objects: unused.
    fn slice_rect(&self) -> Option<Rect>;
    fn slice_graph(&self, nu: [f64; 2], x: [f64; 2], resolution: f64) -> Result<SampledGraph>;
}

impl Sliceable for GridField {
    fn slice_dims(&self) -> usize {
        self.dims()
    }

    fn slice_rect(&self) -> Option<Rect> {
        (self.dims() == 2).then(|| self.domain_rect())
    }

    fn slice_graph(&self, nu: [f64; 2], x: [f64; 2], resolution: f64) -> Result<SampledGraph> {
        if self.dims() == 1 {
            return graph_of_field(self);
        }
        let (t0, t1) = line_rect_interval(x, nu, self.domain_rect())
            .ok_or_else(|| Error::invalid("slice line misses the field domain"))?;
        let m = ((t1 - t0) / resolution).ceil().max(1.0) as usize;
        let dt = (t1 - t0) / m as f64;
        let points = (0..m)
            .map(|k| {
                let t = t0 + (k as f64 + 0.5) * dt;
                let p = [x[0] + t * nu[0], x[1] + t * nu[1]];
                [t, self.bilinear(p[0], p[1])]
            })
            .collect();
        SampledGraph::new(points, resolution)
    }
}

impl Sliceable for Limit2d {
    fn slice_dims(&self) -> usize {
        2
    }

    fn slice_rect(&self) -> Option<Rect> {
        Some(self.domain())
    }

    fn slice_graph(&self, nu: [f64; 2], x: [f64; 2], resolution: f64) -> Result<SampledGraph> {
        let sl = slice_limit(self, nu, x)?;
        graph_of_limit(&sl, resolution)
    }
}

impl Sliceable for SlicedLimit1d {
    fn slice_dims(&self) -> usize {
        1
    }

    fn slice_rect(&self) -> Option<Rect> {
        None
    }

    fn slice_graph(&self, _nu: [f64; 2], _x: [f64; 2], resolution: f64) -> Result<SampledGraph> {
        graph_of_limit(self, resolution)
    }
}

/// Result of the per-direction sliced distance.
#[derive(Debug, Clone, Copy)]
pub struct SliceDistance {
    pub value: f64,
    /// Slices skipped because the line ran along a jump segment.
    pub degenerate_slices: usize,
}

/// Midpoints of a uniform partition of the interval into `count` cells.
pub fn uniform_slice_positions(interval: (f64, f64), count: usize) -> Vec<f64> {
    let (lo, hi) = interval;
    let w = (hi - lo) / count as f64;
    (0..count).map(|i| lo + (i as f64 + 0.5) * w).collect()
}

/// Projection interval of a rectangle onto the axis orthogonal to nu.
pub fn shadow_interval(rect: Rect, nu: [f64; 2]) -> (f64, f64) {
    let tau = [-nu[1], nu[0]];
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for c in rect.corners() {
        let p = dot(c, tau);
        lo = lo.min(p);
        hi = hi.max(p);
    }
    (lo, hi)
}

/// Sliced distance between two objects along direction nu: midpoint-rule
/// quadrature over the supplied slice positions of d_g/(1 + d_g), where d_g is
/// the Hausdorff distance of the slice graphs. For 1D objects the definition
/// collapses to the single-slice value.
pub fn sliced_distance(
    a: &dyn Sliceable,
    b: &dyn Sliceable,
    nu: [f64; 2],
    positions: &[f64],
    resolution: f64,
) -> Result<SliceDistance> {
    if resolution <= 0.0 {
        return Err(Error::invalid("resolution must be positive"));
    }
    if a.slice_dims() != b.slice_dims() {
        return Err(Error::invalid("objects must have matching dimensions"));
    }
    if a.slice_dims() == 1 {
        let ga = a.slice_graph(nu, [0.0, 0.0], resolution)?;
        let gb = b.slice_graph(nu, [0.0, 0.0], resolution)?;
        let dg = hausdorff(&ga, &gb)?;
        return Ok(SliceDistance {
            value: dg / (1.0 + dg),
            degenerate_slices: 0,
        });
    }
    if positions.is_empty() {
        return Err(Error::invalid("need at least one slice position"));
    }
    let rect = a
        .slice_rect()
        .ok_or_else(|| Error::invalid("2D slicing needs a rectangular domain"))?;
    let (lo, hi) = shadow_interval(rect, nu);
    let cell = (hi - lo) / positions.len() as f64;
    let tau = [-nu[1], nu[0]];
    let mut total = 0.0;
    let mut degenerate = 0;
    for &p in positions {
        if p < lo || p > hi {
            return Err(Error::invalid("slice position outside the shadow interval"));
        }
        let x = [p * tau[0], p * tau[1]];
        let ga = match a.slice_graph(nu, x, resolution) {
            Ok(g) => g,
            Err(Error::DegenerateSlice { .. }) => {
                degenerate += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let gb = match b.slice_graph(nu, x, resolution) {
            Ok(g) => g,
            Err(Error::DegenerateSlice { .. }) => {
                degenerate += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let dg = hausdorff(&ga, &gb)?;
        total += cell * dg / (1.0 + dg);
    }
    Ok(SliceDistance {
        value: total,
        degenerate_slices: degenerate,
    })
}

/// Result of the direction-set metric.
#[derive(Debug, Clone, Copy)]
pub struct DirectionMetric {
    pub value: f64,
    /// Truncation tail: the weight mass of the dropped directions.
    pub tail_bound: f64,
    pub degenerate_slices: usize,
}

/// Weighted sum over the direction set of d_nu/(1 + d_nu); the sliced-graph
/// metric truncated to finitely many directions.
pub fn direction_metric(
    a: &dyn Sliceable,
    b: &dyn Sliceable,
    dirs: &DirectionSet,
    slice_count: usize,
    resolution: f64,
) -> Result<DirectionMetric> {
    if dirs.directions.is_empty() {
        return Err(Error::invalid("direction set must be non-empty"));
    }
    let mut value = 0.0;
    let mut degenerate = 0;
    for (nu, w) in dirs.directions.iter().zip(&dirs.weights) {
        let positions = if a.slice_dims() == 1 {
            vec![0.0]
        } else {
            let rect = a
                .slice_rect()
                .ok_or_else(|| Error::invalid("2D slicing needs a rectangular domain"))?;
            uniform_slice_positions(shadow_interval(rect, *nu), slice_count)
        };
        let d = sliced_distance(a, b, *nu, &positions, resolution)?;
        degenerate += d.degenerate_slices;
        value += w * d.value / (1.0 + d.value);
    }
    Ok(DirectionMetric {
        value,
        tail_bound: dirs.tail_bound(),
        degenerate_slices: degenerate,
    })
}

/// A set of occupied pixels/voxels on a uniform grid of spacing h.
/// 2D sets keep the third coordinate at 0.
#[derive(Debug, Clone)]
pub struct PixelSet {
    pub coords: Vec<[i64; 3]>,
    pub spacing: f64,
}

impl PixelSet {
    pub fn new(coords: Vec<[i64; 3]>, spacing: f64) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::invalid("pixel set must be non-empty"));
        }
        if spacing <= 0.0 {
            return Err(Error::invalid("spacing must be positive"));
        }
        Ok(PixelSet { coords, spacing })
    }

    /// 2D mask (row-major, `width` fast axis) to pixel set.
    pub fn from_mask(width: usize, height: usize, on: &[bool], spacing: f64) -> Result<Self> {
        if on.len() != width * height {
            return Err(Error::invalid("mask size mismatch"));
        }
        let coords: Vec<[i64; 3]> = (0..height)
            .flat_map(|j| (0..width).map(move |i| (i, j)))
            .filter(|&(i, j)| on[j * width + i])
            .map(|(i, j)| [i as i64, j as i64, 0])
            .collect();
        Self::new(coords, spacing)
    }

    /// Voxelized graph of a 2D field: one column of voxels per node spanning
    /// from the node value to its neighbours' values, so the surface stays
    /// gap-free. The vertical spacing equals the lateral spacing, keeping the
    /// integer voxel metric isotropic.
    pub fn from_graph_of_field_2d(field: &GridField) -> Result<Self> {
        if field.dims() != 2 {
            return Err(Error::invalid("expected a 2D field"));
        }
        let h = field.spacing();
        let hz = h;
        let [nx, ny] = field.shape();
        let mut coords = Vec::new();
        for ix in 0..nx {
            for iy in 0..ny {
                let v = field.at(ix, iy);
                let mut lo = v;
                let mut hi = v;
                let mut look = |jx: isize, jy: isize| {
                    if jx >= 0 && jy >= 0 && (jx as usize) < nx && (jy as usize) < ny {
                        let w = field.at(jx as usize, jy as usize);
                        let mid = 0.5 * (v + w);
                        lo = lo.min(mid);
                        hi = hi.max(mid);
                    }
                };
                look(ix as isize - 1, iy as isize);
                look(ix as isize + 1, iy as isize);
                look(ix as isize, iy as isize - 1);
                look(ix as isize, iy as isize + 1);
                let k0 = (lo / hz).round() as i64;
                let k1 = (hi / hz).round() as i64;
                for k in k0..=k1 {
                    coords.push([ix as i64, iy as i64, k]);
                }
            }
        }
        Self::new(coords, h)
    }

    /// Write as a PGM-style text mask (P2, maxval 1). 2D sets only.
    pub fn to_pgm(&self) -> Result<String> {
        if self.coords.iter().any(|c| c[2] != 0) {
            return Err(Error::invalid("PGM export is for 2D pixel sets"));
        }
        let min_x = self.coords.iter().map(|c| c[0]).min().unwrap();
        let min_y = self.coords.iter().map(|c| c[1]).min().unwrap();
        let max_x = self.coords.iter().map(|c| c[0]).max().unwrap();
        let max_y = self.coords.iter().map(|c| c[1]).max().unwrap();
        let w = (max_x - min_x + 1) as usize;
        let h = (max_y - min_y + 1) as usize;
        let mut grid = vec![0u8; w * h];
        for c in &self.coords {
            grid[(c[1] - min_y) as usize * w + (c[0] - min_x) as usize] = 1;
        }
        let mut s = format!("P2\n# spacing {:.17e}\n{w} {h}\n1\n", self.spacing);
        for j in 0..h {
            let row: Vec<String> = (0..w).map(|i| grid[j * w + i].to_string()).collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        Ok(s)
    }

    pub fn from_pgm(text: &str) -> Result<Self> {
        let mut spacing = 1.0;
        let mut tokens: Vec<&str> = Vec::new();
        for line in text.lines() {
            if let Some(rest) = line.strip_prefix('#') {
                let mut it = rest.split_whitespace();
                if it.next() == Some("spacing") {
                    if let Some(v) = it.next().and_then(|t| t.parse().ok()) {
                        spacing = v;
                    }
                }
                continue;
            }
            tokens.extend(line.split_whitespace());
        }
        if tokens.first() != Some(&"P2") && tokens.first() != Some(&"P1") {
            return Err(Error::Parse("expected P1/P2 mask".into()));
        }
        let is_p2 = tokens[0] == "P2";
        let w: usize = tokens
            .get(1)
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Parse("bad mask width".into()))?;
        let h: usize = tokens
            .get(2)
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Parse("bad mask height".into()))?;
        let data_start = if is_p2 { 4 } else { 3 };
        let mut coords = Vec::new();
        for (k, t) in tokens[data_start..].iter().enumerate() {
            if k >= w * h {
                break;
            }
            let v: i64 = t
                .parse()
                .map_err(|_| Error::Parse(format!("bad mask value '{t}'")))?;
            if v != 0 {
                coords.push([(k % w) as i64, (k / w) as i64, 0]);
            }
        }
        Self::new(coords, spacing)
    }
}

/// Discrete essential Hausdorff distance between pixel sets: for each pixel,
/// the smallest radius (a multiple of h) whose ball contains a pixel of the
/// other set; symmetrized by taking the max of the two directed suprema.
/// Exact on the given sets via a separable integer squared-distance transform.
pub fn essential_hausdorff(a: &PixelSet, b: &PixelSet) -> Result<f64> {
    if (a.spacing - b.spacing).abs() > 1e-12 * a.spacing {
        return Err(Error::invalid("pixel sets must share the grid spacing"));
    }
    let d_ab = directed_pixel_sup(a, b)?;
    let d_ba = directed_pixel_sup(b, a)?;
    Ok(d_ab.max(d_ba) * a.spacing)
}

/// max over `from` of the distance (in cells, rounded up to integers) to `to`.
fn directed_pixel_sup(from: &PixelSet, to: &PixelSet) -> Result<f64> {
    let mut lo = [i64::MAX; 3];
    let mut hi = [i64::MIN; 3];
    for c in from.coords.iter().chain(&to.coords) {
        for k in 0..3 {
            lo[k] = lo[k].min(c[k]);
            hi[k] = hi[k].max(c[k]);
        }
    }
    let dims: Vec<usize> = (0..3).map(|k| (hi[k] - lo[k] + 1) as usize).collect();
    let total: usize = dims.iter().product();
    if total > 300_000_000 {
        return Err(Error::invalid(format!(
            "pixel bounding box too large ({total} cells)"
        )));
    }
    const INF: f64 = 1e30;
    let mut dist = vec![INF; total];
    let index = |c: &[i64; 3]| -> usize {
        (((c[0] - lo[0]) as usize * dims[1]) + (c[1] - lo[1]) as usize) * dims[2]
            + (c[2] - lo[2]) as usize
    };
    for c in &to.coords {
        dist[index(c)] = 0.0;
    }
    // separable squared EDT, one axis at a time
    let strides = [dims[1] * dims[2], dims[2], 1];
    let mut f_buf = Vec::new();
    let mut d_buf = Vec::new();
    let mut v_buf: Vec<usize> = Vec::new();
    let mut z_buf: Vec<f64> = Vec::new();
    for axis in 0..3 {
        let n = dims[axis];
        if n == 1 {
            continue;
        }
        let stride = strides[axis];
        let outer: usize = total / n;
        // enumerate line start offsets
        for line in 0..outer {
            // map line id to the base offset skipping the transformed axis
            let mut rem = line;
            let mut base = 0;
            for k in 0..3 {
                if k == axis {
                    continue;
                }
                let extent = dims[k];
                let coord = rem % extent;
                rem /= extent;
                base += coord * strides[k];
            }
            f_buf.clear();
            f_buf.extend((0..n).map(|i| dist[base + i * stride]));
            edt_1d(&f_buf, &mut d_buf, &mut v_buf, &mut z_buf);
            for i in 0..n {
                dist[base + i * stride] = d_buf[i];
            }
        }
    }
    let mut worst_sq = 0.0_f64;
    for c in &from.coords {
        worst_sq = worst_sq.max(dist[index(c)]);
    }
    // min radius in whole multiples of h covering the nearest pixel
    Ok((worst_sq.sqrt() - 1e-9).ceil().max(0.0))
}

/// Felzenszwalb-Huttenlocher 1D squared-distance transform (lower envelope of
/// parabolas). Inputs/outputs are squared distances.
fn edt_1d(f: &[f64], d: &mut Vec<f64>, v: &mut Vec<usize>, z: &mut Vec<f64>) {
    let n = f.len();
    d.clear();
    d.resize(n, 0.0);
    v.clear();
    v.resize(n, 0);
    z.clear();
    z.resize(n + 1, 0.0);
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        loop {
            let p = v[k];
            let s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q - p) as f64);
            if s <= z[k] {
                if k == 0 {
                    // parabola q dominates everywhere so far
                    v[0] = q;
                    z[0] = f64::NEG_INFINITY;
                    z[1] = f64::INFINITY;
                    break;
                }
                k -= 1;
            } else {
                k += 1;
                v[k] = q;
                z[k] = s;
                z[k + 1] = f64::INFINITY;
                break;
            }
        }
    }
    let mut k = 0usize;
    for (q, dq_out) in d.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let dq = q as f64 - p as f64;
        *dq_out = dq * dq + f[p];
    }
}
