//! Numerical workhorses: adaptive Gauss-Kronrod quadrature, golden-section
//! minimization, and bracketed root finding.

use crate::error::{Error, Result};

/// Gauss-Kronrod 7-15 abscissae on [0, 1] half-interval (positive nodes).
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

/// One Gauss-Kronrod 7-15 panel. Returns (kronrod, |kronrod - gauss|).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = half * XGK[i];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        kron += WGK[i] * (f1 + f2);
        if i % 2 == 1 {
            gauss += WG[i / 2] * (f1 + f2);
        }
    }
    (kron * half, ((kron - gauss) * half).abs())
}

/// Adaptive quadrature of `f` on [a, b] to absolute tolerance `tol`.
///
/// Splits the worst panel first; panels with non-finite endpoint behaviour are
/// not special-cased, so singular integrands must be split by the caller at
/// their singular points (the potential module splits at the well v = 1).
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    integrate_rel(f, a, b, tol, 0.0)
}

/// Adaptive quadrature with a mixed stopping rule: the estimated error must
/// drop below `max(abs_tol, rel_tol * |value|)`.
pub fn integrate_rel<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (sign, lo, hi) = if a < b { (1.0, a, b) } else { (-1.0, b, a) };
    let (v0, e0) = gk15(&f, lo, hi);
    let mut panels: Vec<(f64, f64, f64, f64)> = vec![(lo, hi, v0, e0)];
    let mut total_err = e0;
    let mut value: f64 = v0;
    let max_panels = 20_000;
    let target = |v: f64| abs_tol.max(rel_tol * v.abs());
    while total_err > target(value) && panels.len() < max_panels {
        // split the panel with the largest error
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.partial_cmp(&y.1 .3).unwrap())
            .unwrap();
        let (pa, pb, pv, pe) = panels.swap_remove(idx);
        total_err -= pe;
        let mid = 0.5 * (pa + pb);
        if mid <= pa || mid >= pb {
            // interval exhausted at machine precision; keep its estimate
            panels.push((pa, pb, pv, 0.0));
            continue;
        }
        let (v1, e1) = gk15(&f, pa, mid);
        let (v2, e2) = gk15(&f, mid, pb);
        total_err += e1 + e2;
        value += v1 + v2 - pv;
        panels.push((pa, mid, v1, e1));
        panels.push((mid, pb, v2, e2));
    }
    value = panels.iter().map(|p| p.2).sum();
    if !value.is_finite()
        || (total_err > target(value) && total_err > 100.0 * target(value).max(1e-300))
    {
        return Err(Error::NumericFailure {
            what: "adaptive quadrature",
            achieved: total_err,
            requested: target(value),
        });
    }
    Ok(sign * value)
}

/// Golden-section minimization of `f` on [a, b] to interval width `tol`.
/// Returns (argmin, min). On plateaus the left side is preferred.
pub fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Bisection on a bracketing interval [a, b] with f(a), f(b) of opposite sign
/// (or zero). Finds x with |interval| <= tol; f need only be continuous.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> Result<f64> {
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::invalid(format!(
            "bisect: no sign change on [{a}, {b}] (f(a)={fa:e}, f(b)={fb:e})"
        )));
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (b - a).abs() <= tol || m <= a || m >= b {
            return Ok(m);
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomial_exactly() {
        let v = integrate(|x| 3.0 * x * x, 0.0, 2.0, 1e-12).unwrap();
        assert!((v - 8.0).abs() < 1e-12);
    }

    #[test]
    fn integrates_sqrt_singularity() {
        // integral of 1/sqrt(x) on (0,1] = 2; integrable endpoint singularity
        let v = integrate(|x| 1.0 / x.max(1e-300).sqrt(), 0.0, 1.0, 1e-10).unwrap();
        assert!((v - 2.0).abs() < 1e-7, "got {v}");
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let v = integrate(|x| x, 1.0, 0.0, 1e-12).unwrap();
        assert!((v + 0.5).abs() < 1e-12);
    }

    #[test]
    fn golden_finds_parabola_vertex() {
        let (x, fx) = golden_min(|x| (x - 0.3).powi(2), -1.0, 1.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-9);
        assert!(fx < 1e-17);
    }

    #[test]
    fn bisect_finds_root() {
        let x = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((x - std::f64::consts::SQRT_2).abs() < 1e-13);
    }
}
