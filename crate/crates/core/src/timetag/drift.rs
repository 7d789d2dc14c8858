use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftKnot {
    pub t_ps: u64,
    pub offset_ps: f64,
}

/// Piecewise-linear offset of B's clock relative to A's, held constant
/// beyond the end knots.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DriftModel {
    pub knots: Vec<DriftKnot>,
}

impl DriftModel {
    pub fn zero() -> Self {
        DriftModel::default()
    }

    pub fn constant(offset_ps: f64) -> Self {
        DriftModel {
            knots: vec![DriftKnot { t_ps: 0, offset_ps }],
        }
    }

    pub fn new(knots: Vec<DriftKnot>) -> Result<Self> {
        if knots.windows(2).any(|w| w[1].t_ps <= w[0].t_ps) {
            return Err(Error::InvalidInput("drift knots must be strictly ascending".into()));
        }
        if knots.iter().any(|k| !k.offset_ps.is_finite()) {
            return Err(Error::InvalidInput("drift offsets must be finite".into()));
        }
        Ok(DriftModel { knots })
    }

    pub fn offset_ps(&self, t_ps: u64) -> f64 {
        let k = self.knots.partition_point(|k| k.t_ps <= t_ps);
        match (k, self.knots.len()) {
            (_, 0) => 0.0,
            (0, _) => self.knots[0].offset_ps,
            (k, n) if k == n => self.knots[n - 1].offset_ps,
            (k, _) => {
                let (a, b) = (self.knots[k - 1], self.knots[k]);
                let w = (t_ps - a.t_ps) as f64 / (b.t_ps - a.t_ps) as f64;
                a.offset_ps + w * (b.offset_ps - a.offset_ps)
            }
        }
    }

    /// Map a B timestamp onto A's timebase.
    pub fn to_a_time(&self, t_b_ps: u64) -> i64 {
        t_b_ps as i64 - self.offset_ps(t_b_ps).round() as i64
    }

    /// Map an A timestamp onto B's timebase (first order in the drift rate).
    pub fn to_b_time(&self, t_a_ps: u64) -> i64 {
        t_a_ps as i64 + self.offset_ps(t_a_ps).round() as i64
    }

    /// Least-squares slope through the knots, ps per second.
    pub fn slope_ps_per_s(&self) -> f64 {
        let n = self.knots.len() as f64;
        if self.knots.len() < 2 {
            return 0.0;
        }
        let mx = self.knots.iter().map(|k| k.t_ps as f64 * 1e-12).sum::<f64>() / n;
        let my = self.knots.iter().map(|k| k.offset_ps).sum::<f64>() / n;
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for k in &self.knots {
            let dx = k.t_ps as f64 * 1e-12 - mx;
            sxy += dx * (k.offset_ps - my);
            sxx += dx * dx;
        }
        sxy / sxx
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DriftOptions {
    pub block_s: f64,
    pub bin_ps: u64,
    /// Half-width of the searched offset range.
    pub max_offset_ps: u64,
    pub min_peak_counts: u64,
    /// Required peak excess over the flat background, in Poisson σ.
    pub min_prominence_sigma: f64,
}

impl Default for DriftOptions {
    fn default() -> Self {
        DriftOptions {
            block_s: 10.0,
            bin_ps: 100,
            max_offset_ps: 20_000,
            min_peak_counts: 10,
            min_prominence_sigma: 5.0,
        }
    }
}

/// Per-block cross-correlation of A and B outcome timestamps, peak located
/// by parabolic interpolation, knots at block centres.
pub fn estimate_drift(a_ps: &[u64], b_ps: &[u64], opts: &DriftOptions) -> Result<DriftModel> {
    if a_ps.is_empty() || b_ps.is_empty() {
        return Err(Error::NoCorrelationPeak { block_start_ps: 0 });
    }
    if !(opts.block_s > 0.0) || opts.bin_ps == 0 {
        return Err(Error::InvalidInput("drift block and bin must be positive".into()));
    }
    let start = a_ps[0].min(b_ps[0]);
    let end = a_ps[a_ps.len() - 1].max(b_ps[b_ps.len() - 1]) + 1;
    let block_ps = opts.block_s * 1e12;
    let n_blocks = (((end - start) as f64 / block_ps).round() as u64).max(1);
    let len = (end - start).div_ceil(n_blocks);

    let half = (opts.max_offset_ps / opts.bin_ps) as i64 + 1;
    let n_bins = (2 * half + 1) as usize;
    let max_off = opts.max_offset_ps as i64;
    let bin = opts.bin_ps as i64;

    let mut knots = Vec::with_capacity(n_blocks as usize);
    let mut j0 = 0usize;
    for blk in 0..n_blocks {
        let (lo, hi) = (start + blk * len, (start + (blk + 1) * len).min(end));
        let mut hist = vec![0u64; n_bins];
        let a_lo = a_ps.partition_point(|&t| t < lo);
        let a_hi = a_ps.partition_point(|&t| t < hi);
        for &ta in &a_ps[a_lo..a_hi] {
            let ta = ta as i64;
            while j0 < b_ps.len() && (b_ps[j0] as i64) < ta - max_off {
                j0 += 1;
            }
            for &tb in &b_ps[j0..] {
                let d = tb as i64 - ta;
                if d > max_off {
                    break;
                }
                let k = (d as f64 / bin as f64).round() as i64 + half;
                hist[k as usize] += 1;
            }
        }
        let (kp, &peak) = hist
            .iter()
            .enumerate()
            .max_by_key(|&(k, c)| (*c, std::cmp::Reverse(k)))
            .unwrap();
        let neighbours = hist.get(kp.wrapping_sub(1)).copied().unwrap_or(0) + hist.get(kp + 1).copied().unwrap_or(0);
        let total: u64 = hist.iter().sum();
        let background = (total - peak - neighbours) as f64 / (n_bins as f64 - 3.0);
        let excess = peak as f64 - background;
        if peak < opts.min_peak_counts || excess < opts.min_prominence_sigma * background.max(1.0).sqrt() {
            return Err(Error::NoCorrelationPeak { block_start_ps: lo });
        }
        let c = |k: usize| hist.get(k).copied().unwrap_or(0) as f64;
        let (cm, c0, cp) = (if kp > 0 { c(kp - 1) } else { 0.0 }, c(kp), c(kp + 1));
        let denom = cm - 2.0 * c0 + cp;
        let delta = if denom != 0.0 {
            (0.5 * (cm - cp) / denom).clamp(-0.5, 0.5)
        } else {
            0.0
        };
        knots.push(DriftKnot {
            t_ps: lo + (hi - lo) / 2,
            offset_ps: (kp as f64 - half as f64 + delta) * bin as f64,
        });
    }
    DriftModel::new(knots)
}
