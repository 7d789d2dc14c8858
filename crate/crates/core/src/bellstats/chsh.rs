use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::timetag::CoincidenceTable;

/// CHSH quantities in the win-probability form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChshEstimate {
    /// `p(A=B | a_i b_j)`, cell order `11, 12, 21, 22`.
    pub p_equal: [f64; 4],
    /// `E_ij = 2 p(A=B | a_i b_j) - 1`.
    pub correlators: [f64; 4],
    /// `C = -p11 - p12 - p21 + p22`; local realism requires `C <= 0`.
    pub c: f64,
    /// `S = 2 |-C - 1|`.
    pub s: f64,
}

pub fn chsh(table: &CoincidenceTable) -> Result<ChshEstimate> {
    let mut p_equal = [0.0; 4];
    for i in 0..2 {
        for j in 0..2 {
            let n = table.n_ij(i, j);
            if n == 0 {
                return Err(Error::EmptyCell { i: i + 1, j: j + 1 });
            }
            p_equal[2 * i + j] = table.equal_outcomes(i, j) as f64 / n as f64;
        }
    }
    let c = -p_equal[0] - p_equal[1] - p_equal[2] + p_equal[3];
    Ok(ChshEstimate {
        p_equal,
        correlators: p_equal.map(|p| 2.0 * p - 1.0),
        c,
        s: 2.0 * (-c - 1.0).abs(),
    })
}

/// Gaussian significance of `S > 2` treating trials as independent and
/// identically distributed: `σ_S² = Σ (1 - E_ij²) / N_ij`.
///
/// Reproduced for comparison only; it ignores setting predictability and
/// memory effects.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NaiveSignificance {
    pub sigma_s: f64,
    pub nu: f64,
}

pub fn naive_significance(table: &CoincidenceTable) -> Result<NaiveSignificance> {
    let est = chsh(table)?;
    let var: f64 = (0..4)
        .map(|k| (1.0 - est.correlators[k].powi(2)) / table.n_ij(k / 2, k % 2) as f64)
        .sum();
    let sigma_s = var.sqrt();
    Ok(NaiveSignificance {
        sigma_s,
        nu: (est.s - 2.0) / sigma_s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fully_correlated_table() {
        let t = CoincidenceTable::from_cells([[5, 0, 0, 5]; 4]);
        let e = chsh(&t).unwrap();
        assert_eq!(e.c, -2.0);
        assert_eq!(e.s, 2.0);
        assert_eq!(e.correlators, [1.0; 4]);
    }

    #[test]
    fn tsirelson_point() {
        // p(A=B) = (1 ∓ 1/√2)/2 pattern of the optimal singlet angles
        let lo = (1.0 - std::f64::consts::FRAC_1_SQRT_2) / 2.0;
        let n = 1_000_000.0;
        let eq = (lo * n).round() as u64;
        let ne = n as u64 - eq;
        let hi_eq = ne;
        let cells = [
            [eq / 2, ne / 2, ne / 2, eq / 2],
            [eq / 2, ne / 2, ne / 2, eq / 2],
            [eq / 2, ne / 2, ne / 2, eq / 2],
            [hi_eq / 2, eq / 2, eq / 2, hi_eq / 2],
        ];
        let e = chsh(&CoincidenceTable::from_cells(cells)).unwrap();
        assert!((e.s - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-5, "{}", e.s);
    }

    #[test]
    fn empty_cell() {
        let t = CoincidenceTable::from_cells([[1, 0, 0, 0], [0; 4], [1, 0, 0, 0], [1, 0, 0, 0]]);
        assert!(matches!(chsh(&t), Err(Error::EmptyCell { i: 1, j: 2 })));
    }
}
