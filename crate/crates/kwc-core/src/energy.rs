//! Discrete evaluation of the phase-field and limit energies: the single-well
//! Modica-Mortola energy, weighted total variation, the combined KWC energy,
//! their jump-augmented variants, the limit energies of set-valued
//! configurations, the relaxed jump-aware total variation, and the fidelity
//! term.

use crate::error::{Error, Result};
use crate::field::GridField;
use crate::potential::{
    min_weight_on, sigma_jump_cost, transition_cost, PotentialSpec, WeightSpec,
};
use crate::setvalued::{point_segment_distance, Limit2d, SlicedLimit1d};

/// Itemized energy values with the evaluation parameters echoed.
#[derive(Debug, Clone, Copy, Default)]
pub struct EnergyReport {
    pub dirichlet: f64,
    pub potential: f64,
    pub weighted_tv: f64,
    pub jump_term: f64,
    pub fidelity: f64,
    pub epsilon: f64,
    pub lambda: f64,
    pub spacing: f64,
}

impl EnergyReport {
    pub fn total(&self) -> f64 {
        self.dirichlet + self.potential + self.weighted_tv + self.jump_term + self.fidelity
    }

    /// key=value lines.
    pub fn to_kv_text(&self) -> String {
        format!(
            "dirichlet={:.17e}\npotential={:.17e}\nweighted_tv={:.17e}\njump_term={:.17e}\nfidelity={:.17e}\ntotal={:.17e}\nepsilon={:.17e}\nlambda={:.17e}\nspacing={:.17e}\n",
            self.dirichlet,
            self.potential,
            self.weighted_tv,
            self.jump_term,
            self.fidelity,
            self.total(),
            self.epsilon,
            self.lambda,
            self.spacing,
        )
    }

    pub fn csv_header() -> &'static str {
        "dirichlet,potential,weighted_tv,jump_term,fidelity,total,epsilon,lambda,spacing"
    }

    pub fn to_csv_row(&self) -> String {
        format!(
            "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
            self.dirichlet,
            self.potential,
            self.weighted_tv,
            self.jump_term,
            self.fidelity,
            self.total(),
            self.epsilon,
            self.lambda,
            self.spacing,
        )
    }
}

/// Single-well Modica-Mortola energy: (eps/2) |grad v|^2 + (1/2 eps) F(v),
/// forward differences, one-sided at the boundary, cell measure h^N.
pub fn modica_mortola(v: &GridField, eps: f64, pot: &PotentialSpec) -> Result<EnergyReport> {
    if eps <= 0.0 {
        return Err(Error::invalid("eps must be positive"));
    }
    let h = v.spacing();
    let cell = h.powi(v.dims() as i32);
    let mut dirichlet = 0.0;
    if v.dims() == 1 {
        let vals = v.values();
        for i in 0..vals.len() - 1 {
            let g = (vals[i + 1] - vals[i]) / h;
            dirichlet += g * g;
        }
    } else {
        let [nx, ny] = v.shape();
        for ix in 0..nx {
            for iy in 0..ny {
                if ix + 1 < nx {
                    let g = (v.at(ix + 1, iy) - v.at(ix, iy)) / h;
                    dirichlet += g * g;
                }
                if iy + 1 < ny {
                    let g = (v.at(ix, iy + 1) - v.at(ix, iy)) / h;
                    dirichlet += g * g;
                }
            }
        }
    }
    let dirichlet = 0.5 * eps * dirichlet * cell;
    let potential: f64 =
        0.5 / eps * v.values().iter().map(|&x| pot.eval(x)).sum::<f64>() * cell;
    Ok(EnergyReport {
        dirichlet,
        potential,
        epsilon: eps,
        spacing: h,
        ..Default::default()
    })
}

fn check_compatible(a: &GridField, b: &GridField, what: &str) -> Result<()> {
    if a.dims() != b.dims() || a.shape() != b.shape() {
        return Err(Error::invalid(format!("{what}: shapes must match")));
    }
    if (a.spacing() - b.spacing()).abs() > 1e-12 * a.spacing() {
        return Err(Error::invalid(format!("{what}: spacings must match")));
    }
    Ok(())
}

/// Anisotropic weighted total variation: per-face min of the adjacent node
/// weights times |forward difference|, times the facet measure h^{N-1}.
pub fn weighted_tv(u: &GridField, w: &GridField) -> Result<f64> {
    check_compatible(u, w, "weighted_tv")?;
    if w.values().iter().any(|&x| x < 0.0) {
        return Err(Error::invalid("weight field must be non-negative"));
    }
    let facet = if u.dims() == 1 { 1.0 } else { u.spacing() };
    let mut tv = 0.0;
    if u.dims() == 1 {
        let uu = u.values();
        let ww = w.values();
        for i in 0..uu.len() - 1 {
            tv += ww[i].min(ww[i + 1]) * (uu[i + 1] - uu[i]).abs();
        }
    } else {
        let [nx, ny] = u.shape();
        for ix in 0..nx {
            for iy in 0..ny {
                if ix + 1 < nx {
                    tv += w.at(ix, iy).min(w.at(ix + 1, iy))
                        * (u.at(ix + 1, iy) - u.at(ix, iy)).abs();
                }
                if iy + 1 < ny {
                    tv += w.at(ix, iy).min(w.at(ix, iy + 1))
                        * (u.at(ix, iy + 1) - u.at(ix, iy)).abs();
                }
            }
        }
    }
    Ok(tv * facet)
}

/// KWC energy: weighted TV of u with weight alpha(v), plus the Modica-Mortola
/// energy of v.
pub fn kwc_energy(
    u: &GridField,
    v: &GridField,
    eps: f64,
    pot: &PotentialSpec,
    weight: &WeightSpec,
) -> Result<EnergyReport> {
    check_compatible(u, v, "kwc_energy")?;
    let mut w = v.clone();
    for x in w.values_mut() {
        *x = weight.eval(*x);
    }
    let tv = weighted_tv(u, &w)?;
    let mut report = modica_mortola(v, eps, pot)?;
    report.weighted_tv = tv;
    Ok(report)
}

/// Jump locations: points on a line (1D) or small segments (2D facets).
#[derive(Debug, Clone)]
pub enum JumpLocations {
    Points(Vec<f64>),
    Facets(Vec<([f64; 2], [f64; 2])>),
}

impl JumpLocations {
    pub fn len(&self) -> usize {
        match self {
            JumpLocations::Points(p) => p.len(),
            JumpLocations::Facets(f) => f.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// The triplet (J, j, alpha): jump locations, jump sizes, and the weight.
#[derive(Debug, Clone)]
pub struct JumpTriplet {
    pub locations: JumpLocations,
    pub sizes: Vec<f64>,
    pub weight: WeightSpec,
}

impl JumpTriplet {
    pub fn new(locations: JumpLocations, sizes: Vec<f64>, weight: WeightSpec) -> Result<Self> {
        if locations.len() != sizes.len() {
            return Err(Error::invalid("jump sizes must match locations"));
        }
        if sizes.iter().any(|&j| j < 0.0) {
            return Err(Error::invalid("jump sizes must be non-negative"));
        }
        Ok(JumpTriplet {
            locations,
            sizes,
            weight,
        })
    }
}

/// Jumps detected on a grid field: locations, sizes, and one-sided values.
#[derive(Debug, Clone)]
pub struct DetectedJumps {
    pub locations: JumpLocations,
    pub sizes: Vec<f64>,
    pub u_minus: Vec<f64>,
    pub u_plus: Vec<f64>,
}

impl DetectedJumps {
    pub fn into_triplet(self, weight: WeightSpec) -> JumpTriplet {
        JumpTriplet {
            locations: self.locations,
            sizes: self.sizes,
            weight,
        }
    }
}

/// Threshold-based jump detection: faces with |forward difference| above the
/// threshold become jump points (1D) or axis-aligned facets of length h (2D),
/// carrying the adjacent node values as one-sided limits.
pub fn approximate_jumps(u: &GridField, jump_threshold: f64) -> Result<DetectedJumps> {
    if jump_threshold < 0.0 {
        return Err(Error::invalid("jump threshold must be non-negative"));
    }
    let h = u.spacing();
    if u.dims() == 1 {
        let vals = u.values();
        let mut points = Vec::new();
        let mut sizes = Vec::new();
        let mut um = Vec::new();
        let mut up = Vec::new();
        for i in 0..vals.len() - 1 {
            let d = vals[i + 1] - vals[i];
            if d.abs() > jump_threshold {
                points.push(u.origin()[0] + (i as f64 + 1.0) * h);
                sizes.push(d.abs());
                um.push(vals[i]);
                up.push(vals[i + 1]);
            }
        }
        Ok(DetectedJumps {
            locations: JumpLocations::Points(points),
            sizes,
            u_minus: um,
            u_plus: up,
        })
    } else {
        let [nx, ny] = u.shape();
        let [ox, oy] = u.origin();
        let mut facets = Vec::new();
        let mut sizes = Vec::new();
        let mut um = Vec::new();
        let mut up = Vec::new();
        for ix in 0..nx {
            for iy in 0..ny {
                if ix + 1 < nx {
                    let d = u.at(ix + 1, iy) - u.at(ix, iy);
                    if d.abs() > jump_threshold {
                        let x = ox + (ix as f64 + 1.0) * h;
                        let y = oy + iy as f64 * h;
                        facets.push(([x, y], [x, y + h]));
                        sizes.push(d.abs());
                        um.push(u.at(ix, iy));
                        up.push(u.at(ix + 1, iy));
                    }
                }
                if iy + 1 < ny {
                    let d = u.at(ix, iy + 1) - u.at(ix, iy);
                    if d.abs() > jump_threshold {
                        let x = ox + ix as f64 * h;
                        let y = oy + (iy as f64 + 1.0) * h;
                        facets.push(([x, y], [x + h, y]));
                        sizes.push(d.abs());
                        um.push(u.at(ix, iy));
                        up.push(u.at(ix, iy + 1));
                    }
                }
            }
        }
        Ok(DetectedJumps {
            locations: JumpLocations::Facets(facets),
            sizes,
            u_minus: um,
            u_plus: up,
        })
    }
}

/// Default jump threshold: 10 h times a robust (median) slope estimate.
pub fn default_jump_threshold(u: &GridField) -> f64 {
    let mut diffs: Vec<f64> = Vec::new();
    if u.dims() == 1 {
        let vals = u.values();
        for i in 0..vals.len() - 1 {
            diffs.push((vals[i + 1] - vals[i]).abs());
        }
    } else {
        let [nx, ny] = u.shape();
        for ix in 0..nx {
            for iy in 0..ny {
                if ix + 1 < nx {
                    diffs.push((u.at(ix + 1, iy) - u.at(ix, iy)).abs());
                }
                if iy + 1 < ny {
                    diffs.push((u.at(ix, iy + 1) - u.at(ix, iy)).abs());
                }
            }
        }
    }
    if diffs.is_empty() {
        return 0.0;
    }
    diffs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    10.0 * diffs[diffs.len() / 2]
}

/// Modica-Mortola energy augmented by the jump term int_J alpha(v) j dH^{N-1}.
pub fn modica_mortola_jump(
    v: &GridField,
    eps: f64,
    pot: &PotentialSpec,
    triplet: &JumpTriplet,
) -> Result<f64> {
    let base = modica_mortola(v, eps, pot)?.total();
    let mut jump = 0.0;
    match &triplet.locations {
        JumpLocations::Points(points) => {
            let (lo, hi) = v.domain_interval();
            for (t, j) in points.iter().zip(&triplet.sizes) {
                if *t < lo || *t > hi {
                    return Err(Error::invalid(format!("jump location {t} outside domain")));
                }
                jump += triplet.weight.eval(v.interp_1d(*t)) * j;
            }
        }
        JumpLocations::Facets(facets) => {
            let rect = v.domain_rect();
            for ((a, b), j) in facets.iter().zip(&triplet.sizes) {
                if !rect.contains(*a) || !rect.contains(*b) {
                    return Err(Error::invalid("jump facet outside domain"));
                }
                let len = (b[0] - a[0]).hypot(b[1] - a[1]);
                // midpoint rule along the facet, at least 32 nodes
                let m = 32;
                let mut acc = 0.0;
                for q in 0..m {
                    let t = (q as f64 + 0.5) / m as f64;
                    let p = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
                    acc += triplet.weight.eval(v.bilinear(p[0], p[1]));
                }
                jump += acc / m as f64 * len * j;
            }
        }
    }
    Ok(base + jump)
}

/// Limit Modica-Mortola energy of a 1D set-valued limit:
/// 2 sum_k (G(xi-) + G(xi+)).
pub fn limit_modica_mortola_1d(limit: &SlicedLimit1d, pot: &PotentialSpec) -> Result<f64> {
    let mut e = 0.0;
    for j in limit.jumps() {
        e += 2.0 * (transition_cost(pot, j.xi_minus)? + transition_cost(pot, j.xi_plus)?);
    }
    Ok(e)
}

/// Limit Modica-Mortola energy of a 2D set-valued limit:
/// 2 sum over segments of (G(xi-) + G(xi+)) times length.
pub fn limit_modica_mortola_2d(limit: &Limit2d, pot: &PotentialSpec) -> Result<f64> {
    let mut e = 0.0;
    for s in limit.segments() {
        e += 2.0
            * (transition_cost(pot, s.xi_minus)? + transition_cost(pot, s.xi_plus)?)
            * s.length();
    }
    Ok(e)
}

/// Position tolerance for matching jump locations against the singular set.
const MATCH_TOL_1D: f64 = 1e-9;

/// Augmented limit energy: limit Modica-Mortola plus, over J cap Sigma,
/// (min alpha over the interval) j dH^{N-1}.
pub fn limit_modica_mortola_jump_1d(
    limit: &SlicedLimit1d,
    triplet: &JumpTriplet,
    pot: &PotentialSpec,
) -> Result<f64> {
    let base = limit_modica_mortola_1d(limit, pot)?;
    let points = match &triplet.locations {
        JumpLocations::Points(p) => p,
        JumpLocations::Facets(_) => {
            return Err(Error::invalid("1D limit needs point locations"))
        }
    };
    let mut extra = 0.0;
    for (t, j) in points.iter().zip(&triplet.sizes) {
        if let Some(jump) = limit
            .jumps()
            .iter()
            .find(|q| (q.t - t).abs() <= MATCH_TOL_1D)
        {
            let (_, alpha0) = min_weight_on(&triplet.weight, jump.xi_minus, jump.xi_plus)?;
            extra += alpha0 * j;
        }
    }
    Ok(base + extra)
}

pub fn limit_modica_mortola_jump_2d(
    limit: &Limit2d,
    triplet: &JumpTriplet,
    pot: &PotentialSpec,
) -> Result<f64> {
    let base = limit_modica_mortola_2d(limit, pot)?;
    let facets = match &triplet.locations {
        JumpLocations::Facets(f) => f,
        JumpLocations::Points(_) => {
            return Err(Error::invalid("2D limit needs facet locations"))
        }
    };
    let mut extra = 0.0;
    for ((a, b), j) in facets.iter().zip(&triplet.sizes) {
        let len = (b[0] - a[0]).hypot(b[1] - a[1]);
        let mid = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
        for seg in limit.segments() {
            if point_segment_distance(mid, seg.a, seg.b) < 0.5 * len {
                let (_, alpha0) = min_weight_on(&triplet.weight, seg.xi_minus, seg.xi_plus)?;
                extra += alpha0 * j * len;
                break;
            }
        }
    }
    Ok(base + extra)
}

/// TV of u over the faces not detected as jumps (absolutely continuous plus
/// sub-threshold part), with facet measure, unweighted.
fn tv_below_threshold(u: &GridField, jump_threshold: f64) -> f64 {
    let facet = if u.dims() == 1 { 1.0 } else { u.spacing() };
    let mut tv = 0.0;
    if u.dims() == 1 {
        let vals = u.values();
        for i in 0..vals.len() - 1 {
            let d = (vals[i + 1] - vals[i]).abs();
            if d <= jump_threshold {
                tv += d;
            }
        }
    } else {
        let [nx, ny] = u.shape();
        for ix in 0..nx {
            for iy in 0..ny {
                if ix + 1 < nx {
                    let d = (u.at(ix + 1, iy) - u.at(ix, iy)).abs();
                    if d <= jump_threshold {
                        tv += d;
                    }
                }
                if iy + 1 < ny {
                    let d = (u.at(ix, iy + 1) - u.at(ix, iy)).abs();
                    if d <= jump_threshold {
                        tv += d;
                    }
                }
            }
        }
    }
    tv * facet
}

/// Limit KWC energy: alpha(1) TV over non-jump faces, the limit
/// Modica-Mortola energy of the set-valued limit, and per detected jump the
/// discounted cost alpha_0 |u+ - u-| on Sigma (alpha(1) |u+ - u-| off Sigma).
pub fn limit_kwc_energy_1d(
    u: &GridField,
    limit: &SlicedLimit1d,
    pot: &PotentialSpec,
    weight: &WeightSpec,
    jump_threshold: f64,
) -> Result<EnergyReport> {
    if u.dims() != 1 {
        return Err(Error::invalid("limit_kwc_energy_1d expects a 1D field"));
    }
    let alpha1 = weight.eval(1.0);
    let detected = approximate_jumps(u, jump_threshold)?;
    let points = match &detected.locations {
        JumpLocations::Points(p) => p.clone(),
        _ => unreachable!(),
    };
    let mut jump_term = 0.0;
    for (t, j) in points.iter().zip(&detected.sizes) {
        let alpha = match limit
            .jumps()
            .iter()
            .find(|q| (q.t - t).abs() <= MATCH_TOL_1D + 0.5 * u.spacing())
        {
            Some(q) => min_weight_on(weight, q.xi_minus, q.xi_plus)?.1,
            None => alpha1,
        };
        jump_term += alpha * j;
    }
    Ok(EnergyReport {
        potential: limit_modica_mortola_1d(limit, pot)?,
        weighted_tv: alpha1 * tv_below_threshold(u, jump_threshold),
        jump_term,
        spacing: u.spacing(),
        ..Default::default()
    })
}

pub fn limit_kwc_energy_2d(
    u: &GridField,
    limit: &Limit2d,
    pot: &PotentialSpec,
    weight: &WeightSpec,
    jump_threshold: f64,
) -> Result<EnergyReport> {
    if u.dims() != 2 {
        return Err(Error::invalid("limit_kwc_energy_2d expects a 2D field"));
    }
    let alpha1 = weight.eval(1.0);
    let h = u.spacing();
    let detected = approximate_jumps(u, jump_threshold)?;
    let facets = match &detected.locations {
        JumpLocations::Facets(f) => f.clone(),
        _ => unreachable!(),
    };
    let mut jump_term = 0.0;
    for ((a, b), j) in facets.iter().zip(&detected.sizes) {
        let mid = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
        let alpha = limit
            .segments()
            .iter()
            .find(|seg| point_segment_distance(mid, seg.a, seg.b) < 0.5 * h)
            .map(|seg| min_weight_on(weight, seg.xi_minus, seg.xi_plus).map(|m| m.1))
            .transpose()?
            .unwrap_or(alpha1);
        jump_term += alpha * j * h;
    }
    Ok(EnergyReport {
        potential: limit_modica_mortola_2d(limit, pot)?,
        weighted_tv: alpha1 * tv_below_threshold(u, jump_threshold),
        jump_term,
        spacing: h,
        ..Default::default()
    })
}

/// Relaxed jump-aware total variation: sigma(|u+ - u-|) per detected jump
/// plus alpha(1) TV over the remaining faces.
pub fn tv_kwc(
    u: &GridField,
    pot: &PotentialSpec,
    weight: &WeightSpec,
    jump_threshold: f64,
) -> Result<f64> {
    let alpha1 = weight.eval(1.0);
    let detected = approximate_jumps(u, jump_threshold)?;
    let facet = if u.dims() == 1 { 1.0 } else { u.spacing() };
    let mut total = alpha1 * tv_below_threshold(u, jump_threshold);
    for j in &detected.sizes {
        total += sigma_jump_cost(weight, pot, *j)? * facet;
    }
    Ok(total)
}

/// Quadratic fidelity (lambda/2) sum (u - f)^2 h^N.
pub fn fidelity(u: &GridField, f: &GridField, lambda: f64) -> Result<f64> {
    check_compatible(u, f, "fidelity")?;
    if lambda < 0.0 {
        return Err(Error::invalid("lambda must be non-negative"));
    }
    let cell = u.spacing().powi(u.dims() as i32);
    let sum: f64 = u
        .values()
        .iter()
        .zip(f.values())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(0.5 * lambda * sum * cell)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::recovery_field_1d;
    use crate::setvalued::Jump1d;

    fn quad_pot() -> PotentialSpec {
        PotentialSpec::quadratic()
    }

    fn step_1d(n: usize, height: f64) -> GridField {
        GridField::from_fn_1d(0.0, 1.0 / n as f64, n, |x| if x < 0.5 { 0.0 } else { height })
            .unwrap()
    }

    #[test]
    fn modica_mortola_basics() {
        let ones = GridField::from_values_1d(0.0, 0.1, vec![1.0; 10]).unwrap();
        assert_eq!(modica_mortola(&ones, 0.5, &quad_pot()).unwrap().total(), 0.0);
        let zeros = GridField::from_values_1d(0.0, 0.1, vec![0.0; 10]).unwrap();
        let e = modica_mortola(&zeros, 0.5, &quad_pot()).unwrap();
        assert!((e.total() - 1.0).abs() < 1e-12);
        assert_eq!(e.dirichlet, 0.0);
        assert!(modica_mortola(&ones, 0.0, &quad_pot()).is_err());
    }

    #[test]
    fn modica_mortola_first_order_in_h() {
        // smooth field: v(x) = 1 + sin(2 pi x); exact energy
        // (eps/2)(2 pi)^2 (1/2) + (1/(2 eps)) (1/2)
        let eps = 0.7;
        let exact = 0.5 * eps * 4.0 * std::f64::consts::PI.powi(2) * 0.5 + 0.25 / eps;
        let energy_at = |n: usize| {
            let v = GridField::from_fn_1d(0.0, 1.0 / n as f64, n, |x| {
                1.0 + (2.0 * std::f64::consts::PI * x).sin()
            })
            .unwrap();
            modica_mortola(&v, eps, &quad_pot()).unwrap().total()
        };
        let e1 = (energy_at(64) - exact).abs();
        let e2 = (energy_at(128) - exact).abs();
        let e4 = (energy_at(256) - exact).abs();
        let r1 = e1 / e2;
        let r2 = e2 / e4;
        assert!((1.5..=2.5).contains(&r1), "ratio {r1}");
        assert!((1.5..=2.5).contains(&r2), "ratio {r2}");
    }

    #[test]
    fn weighted_tv_examples() {
        let n = 10;
        let u = step_1d(n, 2.0);
        let ones = GridField::from_values_1d(0.0, 0.1, vec![1.0; n]).unwrap();
        assert!((weighted_tv(&u, &ones).unwrap() - 2.0).abs() < 1e-15);
        let constant = GridField::from_values_1d(0.0, 0.1, vec![3.0; n]).unwrap();
        assert_eq!(weighted_tv(&constant, &ones).unwrap(), 0.0);
        // weight dips to 0.25 at one node adjacent to the step face
        let mut w = vec![1.0; n];
        w[5] = 0.25;
        let w = GridField::from_values_1d(0.0, 0.1, w).unwrap();
        let u1 = step_1d(n, 1.0);
        assert!((weighted_tv(&u1, &w).unwrap() - 0.25).abs() < 1e-15);
        let bad = GridField::from_values_1d(0.0, 0.2, vec![1.0; 5]).unwrap();
        assert!(weighted_tv(&u1, &bad).is_err());
    }

    #[test]
    fn weighted_tv_2d_axis_steps() {
        let n = 16;
        let h = 1.0 / n as f64;
        // vertical interface: u = 1 on the right half; ny faces of length h
        let u = GridField::from_fn_2d([0.0, 0.0], h, [n, n], |x, _| if x < 0.5 { 0.0 } else { 1.0 })
            .unwrap();
        let ones = GridField::from_values_2d([0.0, 0.0], h, [n, n], vec![1.0; n * n]).unwrap();
        assert!((weighted_tv(&u, &ones).unwrap() - 1.0).abs() < 1e-12);
        // both interfaces: an L-shaped quadrant has TV 2
        let q = GridField::from_fn_2d([0.0, 0.0], h, [n, n], |x, y| {
            if x < 0.5 && y < 0.5 {
                1.0
            } else {
                0.0
            }
        })
        .unwrap();
        assert!((weighted_tv(&q, &ones).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kwc_energy_step_with_unit_phase() {
        let n = 16;
        let u = step_1d(n, 1.5);
        let v = GridField::from_values_1d(0.0, 1.0 / n as f64, vec![1.0; n]).unwrap();
        let e = kwc_energy(&u, &v, 0.1, &quad_pot(), &WeightSpec::quadratic()).unwrap();
        assert!((e.total() - 1.5).abs() < 1e-12);
        let c = GridField::from_values_1d(0.0, 1.0 / n as f64, vec![2.0; n]).unwrap();
        let e0 = kwc_energy(&c, &v, 0.1, &quad_pot(), &WeightSpec::quadratic()).unwrap();
        assert_eq!(e0.total(), 0.0);
    }

    #[test]
    fn modica_mortola_jump_examples() {
        let n = 10;
        let v = GridField::from_values_1d(0.0, 0.1, vec![1.0; n]).unwrap();
        let empty = JumpTriplet::new(
            JumpLocations::Points(vec![]),
            vec![],
            WeightSpec::quadratic(),
        )
        .unwrap();
        assert_eq!(modica_mortola_jump(&v, 0.5, &quad_pot(), &empty).unwrap(), 0.0);
        let tr = JumpTriplet::new(
            JumpLocations::Points(vec![0.5]),
            vec![2.0],
            WeightSpec::quadratic(),
        )
        .unwrap();
        assert!((modica_mortola_jump(&v, 0.5, &quad_pot(), &tr).unwrap() - 2.0).abs() < 1e-12);
        // 2D: one facet of length 0.5, j = 1, v = 0.5 everywhere, alpha = v^2
        let v2 = GridField::from_values_2d([0.0, 0.0], 0.1, [10, 10], vec![0.5; 100]).unwrap();
        let tr2 = JumpTriplet::new(
            JumpLocations::Facets(vec![([0.2, 0.5], [0.7, 0.5])]),
            vec![1.0],
            WeightSpec::quadratic(),
        )
        .unwrap();
        let base = modica_mortola(&v2, 0.5, &quad_pot()).unwrap().total();
        let got = modica_mortola_jump(&v2, 0.5, &quad_pot(), &tr2).unwrap();
        assert!((got - base - 0.125).abs() < 1e-12);
        // location outside the domain
        let out = JumpTriplet::new(
            JumpLocations::Points(vec![2.0]),
            vec![1.0],
            WeightSpec::quadratic(),
        )
        .unwrap();
        assert!(modica_mortola_jump(&v, 0.5, &quad_pot(), &out).is_err());
    }

    #[test]
    fn limit_energies_closed_forms() {
        let empty = SlicedLimit1d::new((0.0, 1.0), vec![]).unwrap();
        assert_eq!(limit_modica_mortola_1d(&empty, &quad_pot()).unwrap(), 0.0);
        let one = SlicedLimit1d::new(
            (0.0, 1.0),
            vec![Jump1d {
                t: 0.5,
                xi_minus: 0.3,
                xi_plus: 1.2,
            }],
        )
        .unwrap();
        let e = limit_modica_mortola_1d(&one, &quad_pot()).unwrap();
        assert!((e - 0.53).abs() < 1e-9, "{e}");
        // 2D: same values on a length-0.5 segment
        let rect = crate::Rect::new(0.0, 0.0, 1.0, 1.0).unwrap();
        let lim2 = Limit2d::new(
            rect,
            vec![crate::setvalued::Segment2d {
                a: [0.25, 0.5],
                b: [0.75, 0.5],
                xi_minus: 0.3,
                xi_plus: 1.2,
            }],
        )
        .unwrap();
        let e2 = limit_modica_mortola_2d(&lim2, &quad_pot()).unwrap();
        assert!((e2 - 0.265).abs() < 1e-9, "{e2}");
    }

    #[test]
    fn limit_jump_energy_matches_sigma() {
        // J = Sigma = {0.5}, xi- = 1/(1+r), xi+ = 1: total = r/(1+r)
        for r in [0.5, 1.0, 2.0, 5.0] {
            let xim = 1.0 / (1.0 + r);
            let limit = SlicedLimit1d::new(
                (0.0, 1.0),
                vec![Jump1d {
                    t: 0.5,
                    xi_minus: xim,
                    xi_plus: 1.0,
                }],
            )
            .unwrap();
            let tr = JumpTriplet::new(
                JumpLocations::Points(vec![0.5]),
                vec![r],
                WeightSpec::quadratic(),
            )
            .unwrap();
            let e = limit_modica_mortola_jump_1d(&limit, &tr, &quad_pot()).unwrap();
            assert!((e - r / (1.0 + r)).abs() < 1e-9, "r={r}: {e}");
        }
        // J disjoint from Sigma: equals the plain limit energy
        let limit = SlicedLimit1d::new(
            (0.0, 1.0),
            vec![Jump1d {
                t: 0.5,
                xi_minus: 0.5,
                xi_plus: 1.0,
            }],
        )
        .unwrap();
        let tr = JumpTriplet::new(
            JumpLocations::Points(vec![0.25]),
            vec![3.0],
            WeightSpec::quadratic(),
        )
        .unwrap();
        let base = limit_modica_mortola_1d(&limit, &quad_pot()).unwrap();
        assert_eq!(
            limit_modica_mortola_jump_1d(&limit, &tr, &quad_pot()).unwrap(),
            base
        );
    }

    #[test]
    fn approximate_jumps_examples() {
        let n = 100;
        // smooth ramp below threshold
        let ramp = GridField::from_fn_1d(0.0, 1.0 / n as f64, n, |x| x).unwrap();
        let d = approximate_jumps(&ramp, 0.5).unwrap();
        assert!(d.locations.is_empty());
        // clean step of height 1
        let u = step_1d(n, 1.0);
        let d = approximate_jumps(&u, 0.5).unwrap();
        assert_eq!(d.sizes, vec![1.0]);
        assert_eq!(d.u_minus, vec![0.0]);
        assert_eq!(d.u_plus, vec![1.0]);
        // two steps of height 0.6
        let two = GridField::from_fn_1d(0.0, 0.01, n, |x| {
            if x < 0.3 {
                0.0
            } else if x < 0.7 {
                0.6
            } else {
                1.2
            }
        })
        .unwrap();
        let d = approximate_jumps(&two, 0.5).unwrap();
        assert_eq!(d.sizes.len(), 2);
    }

    #[test]
    fn limit_kwc_energy_step_discount() {
        let n = 200;
        for r in [0.5, 2.0] {
            let u = step_1d(n, r);
            let xim = 1.0 / (1.0 + r);
            let limit = SlicedLimit1d::new(
                (0.0, 1.0),
                vec![Jump1d {
                    t: 0.5,
                    xi_minus: xim,
                    xi_plus: 1.0,
                }],
            )
            .unwrap();
            let e = limit_kwc_energy_1d(&u, &limit, &quad_pot(), &WeightSpec::quadratic(), 0.1)
                .unwrap();
            assert!(
                (e.total() - r / (1.0 + r)).abs() < 1e-9,
                "r={r}: {}",
                e.total()
            );
            // without the singular set the jump pays alpha(1) |u+ - u-| = r
            let empty = SlicedLimit1d::new((0.0, 1.0), vec![]).unwrap();
            let e0 = limit_kwc_energy_1d(&u, &empty, &quad_pot(), &WeightSpec::quadratic(), 0.1)
                .unwrap();
            assert!((e0.total() - r).abs() < 1e-12);
        }
        // constant u, empty Sigma
        let c = GridField::from_values_1d(0.0, 0.01, vec![1.0; 100]).unwrap();
        let empty = SlicedLimit1d::new((0.0, 1.0), vec![]).unwrap();
        let e = limit_kwc_energy_1d(&c, &empty, &quad_pot(), &WeightSpec::quadratic(), 0.1)
            .unwrap();
        assert_eq!(e.total(), 0.0);
    }

    #[test]
    fn tv_kwc_staircase_contrast() {
        let pot = quad_pot();
        let w = WeightSpec::quadratic();
        // single step of height 1: sigma(1) = 1/2
        let u = step_1d(64, 1.0);
        let t = tv_kwc(&u, &pot, &w, 0.5).unwrap();
        assert!((t - 0.5).abs() < 1e-7, "{t}");
        // two height-1 steps vs one height-2 step with the same endpoints
        let two = GridField::from_fn_1d(0.0, 1.0 / 64.0, 64, |x| {
            if x < 0.33 {
                0.0
            } else if x < 0.66 {
                1.0
            } else {
                2.0
            }
        })
        .unwrap();
        let one = step_1d(64, 2.0);
        let t_two = tv_kwc(&two, &pot, &w, 0.5).unwrap();
        let t_one = tv_kwc(&one, &pot, &w, 0.5).unwrap();
        assert!((t_two - 1.0).abs() < 1e-7, "{t_two}");
        assert!((t_one - 2.0 / 3.0).abs() < 1e-7, "{t_one}");
        assert!(t_one < t_two);
        // smooth field: plain TV
        let ramp = GridField::from_fn_1d(0.0, 1.0 / 64.0, 64, |x| x).unwrap();
        let t = tv_kwc(&ramp, &pot, &w, 0.5).unwrap();
        let ones = GridField::from_values_1d(0.0, 1.0 / 64.0, vec![1.0; 64]).unwrap();
        let plain = weighted_tv(&ramp, &ones).unwrap();
        assert!((t - plain).abs() < 1e-12);
        // sigma(r) <= alpha(1) r keeps tv_kwc below the plain TV
        assert!(t_one <= 2.0 + 1e-12);
    }

    #[test]
    fn fidelity_examples() {
        let n = 10;
        let u = GridField::from_values_1d(0.0, 0.1, vec![2.0; n]).unwrap();
        let f = GridField::from_values_1d(0.0, 0.1, vec![1.0; n]).unwrap();
        assert_eq!(fidelity(&u, &u, 3.0).unwrap(), 0.0);
        assert_eq!(fidelity(&u, &f, 0.0).unwrap(), 0.0);
        assert!((fidelity(&u, &f, 2.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(fidelity(&u, &f, -1.0).is_err());
    }

    #[test]
    fn recovery_energy_approaches_limit_1d() {
        // desk-scale limsup check at eps = 1e-2 (the acceptance suite sweeps
        // further)
        let limit = SlicedLimit1d::new(
            (-1.0, 2.0),
            vec![Jump1d {
                t: 0.5,
                xi_minus: 0.3,
                xi_plus: 1.2,
            }],
        )
        .unwrap();
        let eps = 1e-2_f64;
        let h = eps / 50.0;
        let n = (3.0_f64 / h).round() as usize;
        let v = recovery_field_1d(
            eps,
            &limit,
            &WeightSpec::quadratic(),
            &quad_pot(),
            -1.0,
            h,
            n,
        )
        .unwrap();
        let e = modica_mortola(&v, eps, &quad_pot()).unwrap().total();
        let e0 = limit_modica_mortola_1d(&limit, &quad_pot()).unwrap();
        assert!(
            (e - e0).abs() / e0 < 0.05,
            "E_eps = {e}, E_0 = {e0}"
        );
    }

    #[test]
    fn recovery_energy_approaches_limit_quartic() {
        // no closed form here: G comes from quadrature and psi from the
        // tabulated map, so this exercises the whole pipeline
        let pot = PotentialSpec::quartic();
        let limit = SlicedLimit1d::new(
            (-1.0, 2.0),
            vec![Jump1d {
                t: 0.5,
                xi_minus: 0.3,
                xi_plus: 1.2,
            }],
        )
        .unwrap();
        let eps = 1e-2_f64;
        let h = eps / 50.0;
        let n = (3.0_f64 / h).round() as usize;
        let v = recovery_field_1d(eps, &limit, &WeightSpec::quadratic(), &pot, -1.0, h, n).unwrap();
        let e = modica_mortola(&v, eps, &pot).unwrap().total();
        let e0 = limit_modica_mortola_1d(&limit, &pot).unwrap();
        assert!(e0 > 0.0);
        assert!((e - e0).abs() / e0 < 0.05, "E_eps = {e}, E_0 = {e0}");
    }

    #[test]
    fn report_serialization_round_trip_shapes() {
        let r = EnergyReport {
            dirichlet: 1.0,
            potential: 2.0,
            weighted_tv: 3.0,
            jump_term: 4.0,
            fidelity: 5.0,
            epsilon: 0.1,
            lambda: 50.0,
            spacing: 0.01,
        };
        assert_eq!(r.total(), 15.0);
        let kv = r.to_kv_text();
        assert!(kv.contains("total=1.5"));
        assert_eq!(
            r.to_csv_row().split(',').count(),
            EnergyReport::csv_header().split(',').count()
        );
    }
}
