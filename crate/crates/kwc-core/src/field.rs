//! Uniform-grid scalar fields (cell-centred samples) in 1D and 2D, with the
//! plain-text interchange format `dims shape... spacing origin...` followed by
//! row-major node values.

use crate::error::{Error, Result};
use std::fmt::Write as _;

/// Axis-aligned rectangle [x0, x1] x [y0, y1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        if !(x0 < x1 && y0 < y1) {
            return Err(Error::invalid("degenerate rectangle"));
        }
        Ok(Rect { x0, y0, x1, y1 })
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        p[0] >= self.x0 && p[0] <= self.x1 && p[1] >= self.y0 && p[1] <= self.y1
    }

    pub fn contains_open(&self, p: [f64; 2]) -> bool {
        p[0] > self.x0 && p[0] < self.x1 && p[1] > self.y0 && p[1] < self.y1
    }

    pub fn corners(&self) -> [[f64; 2]; 4] {
        [
            [self.x0, self.y0],
            [self.x1, self.y0],
            [self.x0, self.y1],
            [self.x1, self.y1],
        ]
    }
}

/// Scalar samples at cell centres of a uniform grid; `n` cells of width `h`
/// cover `[origin, origin + n h]` per axis, node i at `origin + (i + 1/2) h`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    dims: usize,
    shape: [usize; 2],
    spacing: f64,
    origin: [f64; 2],
    values: Vec<f64>,
}

impl GridField {
    pub fn from_values_1d(origin: f64, spacing: f64, values: Vec<f64>) -> Result<Self> {
        if spacing <= 0.0 {
            return Err(Error::invalid("spacing must be positive"));
        }
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("values must be non-empty and finite"));
        }
        let n = values.len();
        Ok(GridField {
            dims: 1,
            shape: [n, 1],
            spacing,
            origin: [origin, 0.0],
            values,
        })
    }

    pub fn from_values_2d(
        origin: [f64; 2],
        spacing: f64,
        shape: [usize; 2],
        values: Vec<f64>,
    ) -> Result<Self> {
        if spacing <= 0.0 {
            return Err(Error::invalid("spacing must be positive"));
        }
        if shape[0] == 0 || shape[1] == 0 || values.len() != shape[0] * shape[1] {
            return Err(Error::invalid("value count must match shape"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("values must be finite"));
        }
        Ok(GridField {
            dims: 2,
            shape,
            spacing,
            origin,
            values,
        })
    }

    pub fn from_fn_1d(origin: f64, spacing: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = (0..n)
            .map(|i| f(origin + (i as f64 + 0.5) * spacing))
            .collect();
        Self::from_values_1d(origin, spacing, values)
    }

    pub fn from_fn_2d(
        origin: [f64; 2],
        spacing: f64,
        shape: [usize; 2],
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(shape[0] * shape[1]);
        for ix in 0..shape[0] {
            let x = origin[0] + (ix as f64 + 0.5) * spacing;
            for iy in 0..shape[1] {
                let y = origin[1] + (iy as f64 + 0.5) * spacing;
                values.push(f(x, y));
            }
        }
        Self::from_values_2d(origin, spacing, shape, values)
    }

    pub fn dims(&self) -> usize {
        self.dims
    }
    pub fn shape(&self) -> [usize; 2] {
        self.shape
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
    pub fn spacing(&self) -> f64 {
        self.spacing
    }
    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    #[inline]
    pub fn idx(&self, ix: usize, iy: usize) -> usize {
        ix * self.shape[1] + iy
    }

    #[inline]
    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.values[self.idx(ix, iy)]
    }

    pub fn coord_1d(&self, i: usize) -> f64 {
        self.origin[0] + (i as f64 + 0.5) * self.spacing
    }

    pub fn coord_2d(&self, ix: usize, iy: usize) -> [f64; 2] {
        [
            self.origin[0] + (ix as f64 + 0.5) * self.spacing,
            self.origin[1] + (iy as f64 + 0.5) * self.spacing,
        ]
    }

    pub fn domain_interval(&self) -> (f64, f64) {
        (
            self.origin[0],
            self.origin[0] + self.shape[0] as f64 * self.spacing,
        )
    }

    pub fn domain_rect(&self) -> Rect {
        Rect {
            x0: self.origin[0],
            y0: self.origin[1],
            x1: self.origin[0] + self.shape[0] as f64 * self.spacing,
            y1: self.origin[1] + self.shape[1] as f64 * self.spacing,
        }
    }

    /// Linear interpolation along a 1D field, clamped at the half-cell rims.
    pub fn interp_1d(&self, t: f64) -> f64 {
        let s = (t - self.origin[0]) / self.spacing - 0.5;
        let n = self.shape[0];
        if s <= 0.0 {
            return self.values[0];
        }
        if s >= (n - 1) as f64 {
            return self.values[n - 1];
        }
        let i = s.floor() as usize;
        let frac = s - i as f64;
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }

    /// Bilinear interpolation on a 2D field, clamped at the half-cell rims.
    pub fn bilinear(&self, x: f64, y: f64) -> f64 {
        let sx = (x - self.origin[0]) / self.spacing - 0.5;
        let sy = (y - self.origin[1]) / self.spacing - 0.5;
        let (nx, ny) = (self.shape[0], self.shape[1]);
        let cx = sx.clamp(0.0, (nx - 1) as f64);
        let cy = sy.clamp(0.0, (ny - 1) as f64);
        let ix = (cx.floor() as usize).min(nx.saturating_sub(2));
        let iy = (cy.floor() as usize).min(ny.saturating_sub(2));
        let fx = cx - ix as f64;
        let fy = cy - iy as f64;
        if nx == 1 && ny == 1 {
            return self.values[0];
        }
        if nx == 1 {
            return self.at(0, iy) * (1.0 - fy) + self.at(0, iy + 1) * fy;
        }
        if ny == 1 {
            return self.at(ix, 0) * (1.0 - fx) + self.at(ix + 1, 0) * fx;
        }
        let v00 = self.at(ix, iy);
        let v01 = self.at(ix, iy + 1);
        let v10 = self.at(ix + 1, iy);
        let v11 = self.at(ix + 1, iy + 1);
        v00 * (1.0 - fx) * (1.0 - fy)
            + v10 * fx * (1.0 - fy)
            + v01 * (1.0 - fx) * fy
            + v11 * fx * fy
    }

    /// Serialize: header `dims shape... spacing origin...`, then node values
    /// row-major.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        if self.dims == 1 {
            let _ = writeln!(s, "1 {} {:.17e} {:.17e}", self.shape[0], self.spacing, self.origin[0]);
            for chunk in self.values.chunks(8) {
                let line: Vec<String> = chunk.iter().map(|v| format!("{v:.17e}")).collect();
                let _ = writeln!(s, "{}", line.join(" "));
            }
        } else {
            let _ = writeln!(
                s,
                "2 {} {} {:.17e} {:.17e} {:.17e}",
                self.shape[0], self.shape[1], self.spacing, self.origin[0], self.origin[1]
            );
            for ix in 0..self.shape[0] {
                let row: Vec<String> = (0..self.shape[1])
                    .map(|iy| format!("{:.17e}", self.at(ix, iy)))
                    .collect();
                let _ = writeln!(s, "{}", row.join(" "));
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut tokens = text
            .lines()
            .map(|l| l.split('#').next().unwrap())
            .flat_map(|l| l.split_whitespace());
        let mut next = |what: &str| -> Result<String> {
            tokens
                .next()
                .map(str::to_owned)
                .ok_or_else(|| Error::Parse(format!("grid field: missing {what}")))
        };
        let parse_f = |s: String| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::Parse(format!("grid field: bad number '{s}'")))
        };
        let parse_u = |s: String| -> Result<usize> {
            s.parse()
                .map_err(|_| Error::Parse(format!("grid field: bad count '{s}'")))
        };
        let dims = parse_u(next("dims")?)?;
        match dims {
            1 => {
                let n = parse_u(next("shape")?)?;
                let h = parse_f(next("spacing")?)?;
                let origin = parse_f(next("origin")?)?;
                let mut values = Vec::with_capacity(n);
                for _ in 0..n {
                    values.push(parse_f(next("value")?)?);
                }
                Self::from_values_1d(origin, h, values)
            }
            2 => {
                let nx = parse_u(next("shape x")?)?;
                let ny = parse_u(next("shape y")?)?;
                let h = parse_f(next("spacing")?)?;
                let ox = parse_f(next("origin x")?)?;
                let oy = parse_f(next("origin y")?)?;
                let mut values = Vec::with_capacity(nx * ny);
                for _ in 0..nx * ny {
                    values.push(parse_f(next("value")?)?);
                }
                Self::from_values_2d([ox, oy], h, [nx, ny], values)
            }
            d => Err(Error::Parse(format!("grid field: unsupported dims {d}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip_1d() {
        let f = GridField::from_fn_1d(-0.5, 0.25, 6, |x| x * x).unwrap();
        let g = GridField::from_text(&f.to_text()).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn text_round_trip_2d() {
        let f = GridField::from_fn_2d([0.0, 1.0], 0.5, [3, 4], |x, y| x + 10.0 * y).unwrap();
        let g = GridField::from_text(&f.to_text()).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn bilinear_reproduces_affine() {
        let f = GridField::from_fn_2d([0.0, 0.0], 0.1, [20, 20], |x, y| 2.0 * x - 3.0 * y + 1.0)
            .unwrap();
        for (x, y) in [(0.5, 0.5), (0.31, 0.77), (1.2, 0.05)] {
            let exact = 2.0 * x - 3.0 * y + 1.0;
            // clamped at rims, exact in the interior
            if x > 0.05 && x < 1.95 && y > 0.05 && y < 1.95 {
                assert!((f.bilinear(x, y) - exact).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(GridField::from_values_1d(0.0, 0.0, vec![1.0]).is_err());
        assert!(GridField::from_values_1d(0.0, 0.1, vec![f64::NAN]).is_err());
        assert!(GridField::from_values_2d([0.0; 2], 0.1, [2, 2], vec![0.0; 3]).is_err());
    }
}
