use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{csum, erfc};
use crate::timetag::CoincidenceTable;

/// Joint and marginal setting-choice frequencies of a coincidence table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SettingProbabilities {
    /// Cell order `11, 12, 21, 22`.
    pub q: [f64; 4],
    pub p_a: [f64; 2],
    pub p_b: [f64; 2],
    pub n_ij: [u64; 4],
    pub n: u64,
}

pub fn setting_probabilities(table: &CoincidenceTable) -> Result<SettingProbabilities> {
    let n = table.total();
    if n == 0 {
        return Err(Error::ZeroTotal);
    }
    let n_ij = [table.n_ij(0, 0), table.n_ij(0, 1), table.n_ij(1, 0), table.n_ij(1, 1)];
    let nf = n as f64;
    let q = n_ij.map(|c| c as f64 / nf);
    Ok(SettingProbabilities {
        q,
        p_a: [(n_ij[0] + n_ij[1]) as f64 / nf, (n_ij[2] + n_ij[3]) as f64 / nf],
        p_b: [(n_ij[0] + n_ij[2]) as f64 / nf, (n_ij[1] + n_ij[3]) as f64 / nf],
        n_ij,
        n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Chi2Result {
    pub chi2: f64,
    pub dof: u32,
    pub p_value: f64,
}

/// Pearson χ² test of independence of the two sides' setting choices
/// (2×2 contingency, one degree of freedom).
pub fn chi2_independence(probs: &SettingProbabilities) -> Result<Chi2Result> {
    let mut terms = [0.0; 4];
    for i in 0..2 {
        for j in 0..2 {
            let expected = probs.p_a[i] * probs.p_b[j];
            if !(expected > 0.0) {
                return Err(Error::DegenerateMarginals);
            }
            let d = probs.q[2 * i + j] - expected;
            terms[2 * i + j] = d * d / expected;
        }
    }
    let chi2 = probs.n as f64 * csum(terms);
    Ok(Chi2Result {
        chi2,
        dof: 1,
        // χ²₁ survival function
        p_value: erfc((chi2 / 2.0).sqrt()),
    })
}
