use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use super::predictability::PredictabilityTable;
use super::settings::SettingProbabilities;
use crate::error::{Error, Result};
use crate::special::{csum, ln_erfc, normal_isf_ln};
use crate::timetag::CoincidenceTable;

/// Win counts and the predictability-weighted win statistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WinStatistic {
    /// `N11^{A≠B}, N12^{A≠B}, N21^{A≠B}, N22^{A=B}`.
    pub n_win: [u64; 4],
    pub w: f64,
    /// Local-realist expectation `N (3 + ε̄)`.
    pub w_expected: f64,
    pub eps_bar: f64,
}

fn check_cells(probs: &SettingProbabilities, pred: &PredictabilityTable) -> Result<()> {
    for k in 0..4 {
        if pred.eps_ij[k] >= 1.0 {
            return Err(Error::FullyPredictable {
                i: k / 2 + 1,
                j: k % 2 + 1,
            });
        }
        if !(probs.q[k] > 0.0) {
            return Err(Error::EmptyCell {
                i: k / 2 + 1,
                j: k % 2 + 1,
            });
        }
    }
    Ok(())
}

pub fn n_win(table: &CoincidenceTable) -> [u64; 4] {
    [
        table.different_outcomes(0, 0),
        table.different_outcomes(0, 1),
        table.different_outcomes(1, 0),
        table.equal_outcomes(1, 1),
    ]
}

pub fn win_statistic(
    table: &CoincidenceTable,
    probs: &SettingProbabilities,
    pred: &PredictabilityTable,
) -> Result<WinStatistic> {
    check_cells(probs, pred)?;
    let n_win = n_win(table);
    let w = csum((0..4).map(|k| n_win[k] as f64 / (probs.q[k] * (1.0 - pred.eps_ij[k]))));
    Ok(WinStatistic {
        n_win,
        w,
        w_expected: probs.n as f64 * (3.0 + pred.eps_bar),
        eps_bar: pred.eps_bar,
    })
}

/// Loser plan minimizing `σ_W` subject to `Σ f = 1`, `f ≥ 0`.
///
/// The objective is separable and concave in each `f_ij`, so the constrained
/// optimum is found by solving the equality-constrained problem on an active
/// set and dropping the most negative component until the result is feasible.
pub fn optimal_losers(probs: &SettingProbabilities, pred: &PredictabilityTable) -> Result<[f64; 4]> {
    check_cells(probs, pred)?;
    let n = probs.n as f64;
    if probs.n < 2 {
        return Err(Error::InvalidInput("at least two trials required".into()));
    }
    // maximize Σ a f - b f² (i.e. minimize σ_W²)
    let b: [f64; 4] = probs.q.map(|q| n * n / ((n - 1.0) * q));
    let a: [f64; 4] = std::array::from_fn(|k| b[k] + n * pred.eps_ij[k] / (probs.q[k] * (1.0 - pred.eps_ij[k])));
    let mut active = [true; 4];
    loop {
        let sum_ratio: f64 = (0..4).filter(|&k| active[k]).map(|k| a[k] / (2.0 * b[k])).sum();
        let sum_inv: f64 = (0..4).filter(|&k| active[k]).map(|k| 1.0 / (2.0 * b[k])).sum();
        let lambda = (1.0 - sum_ratio) / sum_inv;
        let f: [f64; 4] = std::array::from_fn(|k| if active[k] { (a[k] + lambda) / (2.0 * b[k]) } else { 0.0 });
        let worst = (0..4)
            .filter(|&k| active[k] && f[k] < 0.0)
            .min_by(|&x, &y| f[x].total_cmp(&f[y]));
        match worst {
            Some(k) => active[k] = false,
            None => return Ok(f),
        }
    }
}

/// Standard deviation of `W` under a local-realist loser plan `f`.
pub fn sigma_w(probs: &SettingProbabilities, pred: &PredictabilityTable, f: &[f64; 4]) -> f64 {
    let n = probs.n as f64;
    let q = &probs.q;
    let e = &pred.eps_ij;
    let var = n * n / (n - 1.0) * csum((0..4).map(|k| f[k] * (1.0 - f[k]) / q[k]))
        + n * csum((0..4).map(|k| f[k] * e[k] / (q[k] * (1.0 - e[k]))));
    var.max(0.0).sqrt()
}

/// `σ_W` at the unconstrained optimum in closed form. Equal to
/// [`sigma_w`] at [`optimal_losers`] whenever no component was clamped.
pub fn sigma_w_closed_form(probs: &SettingProbabilities, pred: &PredictabilityTable) -> f64 {
    let n = probs.n as f64;
    let q = &probs.q;
    let e = &pred.eps_ij;
    let eb = pred.eps_bar;
    let inv_q = csum(q.iter().map(|q| 1.0 / q));
    let t1 = csum((0..4).map(|k| e[k] / (q[k] * (1.0 - e[k]))));
    let t2 = csum((0..4).map(|k| (n - e[k]) * e[k] / (q[k] * (1.0 - e[k]).powi(2))));
    let var =
        n * n / (4.0 * (n - 1.0)) * (inv_q - 4.0) - n * eb + n / 4.0 * t1 - 0.25 * (n - 1.0) * eb * eb + 0.25 * t2;
    var.max(0.0).sqrt()
}

/// Full significance chain from the win statistic to the memory-adjusted
/// p-value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceReport {
    pub n_win: [u64; 4],
    /// Observed per-cell win frequencies `N_ij^win / N_ij`.
    pub p_win: [f64; 4],
    pub w: f64,
    pub w_expected: f64,
    pub eps_bar: f64,
    pub f_opt: [f64; 4],
    /// Components forced to zero by the non-negativity constraint.
    pub f_opt_clamped: [bool; 4],
    pub sigma_w: f64,
    pub nu_bar: f64,
    pub delta_nu: f64,
    pub nu_n: f64,
    pub p_cond: f64,
    pub p: f64,
    pub ln_p: f64,
    /// `ν` with `p = ½ erfc(ν/√2)`.
    pub nu_equivalent: f64,
    pub b: f64,
    pub p_mem: f64,
    pub ln_p_mem: f64,
    pub nu_mem: f64,
}

/// One-sided Gaussian significance of a tail probability, floored at zero.
fn equivalent_sigma(ln_p: f64) -> f64 {
    if ln_p >= 0.0 {
        0.0
    } else {
        normal_isf_ln(ln_p).max(0.0)
    }
}

/// Propagated uncertainty of `ν̄` from the predictability errors.
pub fn delta_nu(
    win: &WinStatistic,
    probs: &SettingProbabilities,
    pred: &PredictabilityTable,
    f: &[f64; 4],
    sigma_w: f64,
    nu_bar: f64,
) -> f64 {
    let n = probs.n as f64;
    let g: [f64; 4] = std::array::from_fn(|k| {
        let e = win.n_win[k] as f64 - n * probs.q[k] - nu_bar * n / (2.0 * sigma_w) * f[k];
        e / (probs.q[k] * (1.0 - pred.eps_ij[k]).powi(2))
    });
    let mut d2 = 0.0;
    for i in 0..2 {
        d2 += (pred.sigma_eps_a[i] / sigma_w).powi(2) * (g[2 * i] + g[2 * i + 1]).powi(2);
    }
    for j in 0..2 {
        d2 += (pred.sigma_eps_b[j] / sigma_w).powi(2) * (g[j] + g[2 + j]).powi(2);
    }
    d2.sqrt()
}

/// `p_mem = p / (1 - B)`, in log domain.
pub fn memory_adjusted_ln_p(ln_p: f64, b: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&b) {
        return Err(Error::InvalidInput(format!("memory bound B = {b} outside [0, 1)")));
    }
    Ok(ln_p - (1.0 - b).ln())
}

pub fn memory_adjusted_p(p: f64, b: f64) -> Result<f64> {
    memory_adjusted_ln_p(p.ln(), b)?;
    Ok((p / (1.0 - b)).min(1.0))
}

/// Run the significance chain. `b` is the memory bound.
pub fn significance(
    table: &CoincidenceTable,
    probs: &SettingProbabilities,
    pred: &PredictabilityTable,
    b: f64,
) -> Result<SignificanceReport> {
    let win = win_statistic(table, probs, pred)?;
    let f = optimal_losers(probs, pred)?;
    let sw = sigma_w(probs, pred, &f);
    if !(sw > 0.0) {
        return Err(Error::InvalidInput("σ_W vanishes".into()));
    }
    let nu_bar = (win.w - win.w_expected) / sw;
    let dn = delta_nu(&win, probs, pred, &f, sw, nu_bar);
    let nu_n = nu_bar / (1.0 + dn);
    // p-values are bounds; without excess wins they saturate at 1
    let ln_p = ln_erfc(nu_n / SQRT_2).min(0.0);
    let ln_p_mem = memory_adjusted_ln_p(ln_p, b)?.min(0.0);
    Ok(SignificanceReport {
        n_win: win.n_win,
        p_win: std::array::from_fn(|k| win.n_win[k] as f64 / probs.n_ij[k] as f64),
        w: win.w,
        w_expected: win.w_expected,
        eps_bar: win.eps_bar,
        f_opt: f,
        f_opt_clamped: f.map(|x| x == 0.0),
        sigma_w: sw,
        nu_bar,
        delta_nu: dn,
        nu_n,
        p_cond: 0.5 * ln_p.exp(),
        p: ln_p.exp(),
        ln_p,
        nu_equivalent: equivalent_sigma(ln_p),
        b,
        p_mem: ln_p_mem.exp(),
        ln_p_mem,
        nu_mem: equivalent_sigma(ln_p_mem),
    })
}
