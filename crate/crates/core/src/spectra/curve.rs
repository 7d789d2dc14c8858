use std::io::{BufRead, BufReader, Read};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Wavelength span covered by the response model, nm.
pub const GRID_MIN_NM: f64 = 350.0;
pub const GRID_MAX_NM: f64 = 1150.0;
const GRID_SLACK_NM: f64 = 1e-9;

/// A function of wavelength sampled on a strictly ascending grid and
/// linearly interpolated in between.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralCurve {
    wavelength_nm: Vec<f64>,
    value: Vec<f64>,
}

impl SpectralCurve {
    /// A non-negative curve (flux or response).
    pub fn new(wavelength_nm: Vec<f64>, value: Vec<f64>) -> Result<Self> {
        if wavelength_nm.len() != value.len() {
            return Err(Error::GridMismatch(format!(
                "{} wavelengths but {} values",
                wavelength_nm.len(),
                value.len()
            )));
        }
        if wavelength_nm.is_empty() {
            return Err(Error::InvalidInput("empty spectral curve".into()));
        }
        for w in wavelength_nm.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidInput(format!(
                    "grid not strictly ascending at {} nm",
                    w[1]
                )));
            }
        }
        let (lo, hi) = (wavelength_nm[0], wavelength_nm[wavelength_nm.len() - 1]);
        if !(lo >= GRID_MIN_NM - GRID_SLACK_NM && hi <= GRID_MAX_NM + GRID_SLACK_NM) {
            return Err(Error::InvalidInput(format!(
                "grid [{lo}, {hi}] nm outside [{GRID_MIN_NM}, {GRID_MAX_NM}]"
            )));
        }
        if let Some(v) = value.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidInput(format!(
                "spectral value {v} is negative or non-finite"
            )));
        }
        Ok(SpectralCurve { wavelength_nm, value })
    }

    /// A curve whose values are probabilities.
    pub fn probability(wavelength_nm: Vec<f64>, value: Vec<f64>) -> Result<Self> {
        let c = Self::new(wavelength_nm, value)?;
        if let Some(v) = c.value.iter().find(|v| **v > 1.0) {
            return Err(Error::InvalidInput(format!("probability {v} exceeds 1")));
        }
        Ok(c)
    }

    pub fn constant(grid: &[f64], value: f64) -> Result<Self> {
        Self::new(grid.to_vec(), vec![value; grid.len()])
    }

    pub fn from_fn(grid: &[f64], f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid.to_vec(), grid.iter().map(|&l| f(l)).collect())
    }

    /// Read two-column text (`wavelength_nm value`, whitespace or comma
    /// separated, `#` comments).
    pub fn parse<R: Read>(input: R) -> Result<Self> {
        let mut wl = Vec::new();
        let mut val = Vec::new();
        for (k, line) in BufReader::new(input).lines().enumerate() {
            let line = line?;
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let mut cols = body
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty());
            let parse = |s: Option<&str>| s.and_then(|s| s.parse::<f64>().ok());
            match (parse(cols.next()), parse(cols.next())) {
                (Some(l), Some(v)) => {
                    wl.push(l);
                    val.push(v);
                }
                _ => {
                    return Err(Error::InvalidInput(format!(
                        "line {}: expected `wavelength value`",
                        k + 1
                    )));
                }
            }
        }
        Self::new(wl, val)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::parse(file).map_err(|e| match e {
            Error::InvalidInput(m) => Error::InvalidInput(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn wavelengths(&self) -> &[f64] {
        &self.wavelength_nm
    }

    pub fn values(&self) -> &[f64] {
        &self.value
    }

    pub fn len(&self) -> usize {
        self.value.len()
    }

    pub fn is_empty(&self) -> bool {
        self.value.is_empty()
    }

    pub fn support(&self) -> (f64, f64) {
        (self.wavelength_nm[0], self.wavelength_nm[self.len() - 1])
    }

    /// Linear interpolation; `None` outside the support.
    pub fn at(&self, lambda: f64) -> Option<f64> {
        let (lo, hi) = self.support();
        if lambda < lo - GRID_SLACK_NM || lambda > hi + GRID_SLACK_NM {
            return None;
        }
        let k = self.wavelength_nm.partition_point(|&w| w < lambda);
        if k == 0 {
            return Some(self.value[0]);
        }
        if k == self.len() {
            return Some(self.value[k - 1]);
        }
        let (x0, x1) = (self.wavelength_nm[k - 1], self.wavelength_nm[k]);
        let (y0, y1) = (self.value[k - 1], self.value[k]);
        if lambda == x1 {
            return Some(y1);
        }
        Some(y0 + (y1 - y0) * (lambda - x0) / (x1 - x0))
    }

    /// Resample onto `grid`, which must lie inside the support.
    pub fn resample(&self, grid: &[f64]) -> Result<Self> {
        if self.wavelength_nm == grid {
            return Ok(self.clone());
        }
        let values = grid
            .iter()
            .map(|&l| {
                self.at(l).ok_or_else(|| {
                    let (lo, hi) = self.support();
                    Error::GridMismatch(format!("{l} nm outside curve support [{lo}, {hi}]"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(grid.to_vec(), values)
    }

    pub fn map(&self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        Self::new(
            self.wavelength_nm.clone(),
            self.wavelength_nm
                .iter()
                .zip(&self.value)
                .map(|(&l, &v)| f(l, v))
                .collect(),
        )
    }

    pub fn scaled(&self, k: f64) -> Result<Self> {
        self.map(|_, v| v * k)
    }

    /// Pointwise product on an identical grid.
    pub fn product(&self, other: &SpectralCurve) -> Result<Self> {
        if self.wavelength_nm != other.wavelength_nm {
            return Err(Error::GridMismatch(
                "pointwise product of curves on different grids".into(),
            ));
        }
        Self::new(
            self.wavelength_nm.clone(),
            self.value.iter().zip(&other.value).map(|(a, b)| a * b).collect(),
        )
    }

    /// Trapezoidal integral over the whole grid.
    pub fn integral(&self) -> f64 {
        self.integral_between(f64::NEG_INFINITY, f64::INFINITY)
    }

    /// Trapezoidal integral over `[lo, hi]` intersected with the support;
    /// interior limits are interpolated.
    pub fn integral_between(&self, lo: f64, hi: f64) -> f64 {
        let (s_lo, s_hi) = self.support();
        let (lo, hi) = (lo.max(s_lo), hi.min(s_hi));
        if !(hi > lo) {
            return 0.0;
        }
        let mut xs = vec![lo];
        let mut ys = vec![self.at(lo).unwrap_or(0.0)];
        for (&x, &y) in self.wavelength_nm.iter().zip(&self.value) {
            if x > lo && x < hi {
                xs.push(x);
                ys.push(y);
            }
        }
        xs.push(hi);
        ys.push(self.at(hi).unwrap_or(0.0));
        trapezoid(&xs, &ys)
    }

    /// Cumulative trapezoidal integral at each grid point, starting at 0.
    pub fn cumulative(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        let mut acc = crate::special::CompensatedSum::new();
        out.push(0.0);
        for k in 1..self.len() {
            let dx = self.wavelength_nm[k] - self.wavelength_nm[k - 1];
            acc.add(0.5 * dx * (self.value[k] + self.value[k - 1]));
            out.push(acc.value());
        }
        out
    }
}

pub(crate) fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    crate::special::csum(
        x.windows(2)
            .zip(y.windows(2))
            .map(|(xw, yw)| 0.5 * (xw[1] - xw[0]) * (yw[0] + yw[1])),
    )
}

/// Uniform grid from `lo` to `hi` inclusive.
pub fn uniform_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|k| lo + k as f64 * step).collect()
}

/// Union of the curves' grid points restricted to their common support.
pub fn common_grid(curves: &[&SpectralCurve]) -> Result<Vec<f64>> {
    let lo = curves.iter().map(|c| c.support().0).fold(f64::NEG_INFINITY, f64::max);
    let hi = curves.iter().map(|c| c.support().1).fold(f64::INFINITY, f64::min);
    if !(hi > lo) {
        return Err(Error::GridMismatch(format!(
            "curves share no support ({lo} to {hi} nm)"
        )));
    }
    let mut grid: Vec<f64> = curves
        .iter()
        .flat_map(|c| c.wavelengths().iter().copied())
        .filter(|&l| l >= lo - GRID_SLACK_NM && l <= hi + GRID_SLACK_NM)
        .collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    Ok(grid)
}
