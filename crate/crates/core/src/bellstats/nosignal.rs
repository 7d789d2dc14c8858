use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::erfc;
use crate::timetag::{CoincidenceTable, SinglesTable};

/// Pooled two-proportion z-test of `x1/n1` against `x2/n2`, two-sided.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZTest {
    pub p1: f64,
    pub p2: f64,
    pub z: f64,
    pub p_value: f64,
}

pub fn pooled_z_test(x1: f64, n1: f64, x2: f64, n2: f64) -> Result<ZTest> {
    if !(n1 > 0.0 && n2 > 0.0) {
        return Err(Error::InvalidInput("z-test with an empty sample".into()));
    }
    let (p1, p2) = (x1 / n1, x2 / n2);
    let p = (x1 + x2) / (n1 + n2);
    let se = (p * (1.0 - p) * (1.0 / n1 + 1.0 / n2)).sqrt();
    let z = if se > 0.0 { (p1 - p2) / se } else { 0.0 };
    Ok(ZTest {
        p1,
        p2,
        z,
        p_value: erfc(z.abs() / SQRT_2),
    })
}

/// Singles-based no-signaling checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoSignalingReport {
    /// `p(A=+ | a_i b_j)`, order `11, 12, 21, 22`.
    pub p_a_plus: [f64; 4],
    /// `p(B=+ | a_i b_j)`, order `b1: a1, a2; b2: a1, a2`.
    pub p_b_plus: [f64; 4],
    /// Alice at `a1`, Alice at `a2` (each `b1` vs `b2`), then Bob at `b1`,
    /// Bob at `b2` (each `a1` vs `a2`).
    pub tests: [ZTest; 4],
}

impl NoSignalingReport {
    pub fn min_p_value(&self) -> f64 {
        self.tests.iter().map(|t| t.p_value).fold(1.0, f64::min)
    }
}

pub fn no_signaling(singles: &SinglesTable) -> Result<NoSignalingReport> {
    let cond = |c: [u64; 2], side: char, x: usize, y: usize| -> Result<(f64, f64)> {
        let n = c[0] + c[1];
        if n == 0 {
            return Err(Error::InvalidInput(format!(
                "no singles for side {side} at settings ({x}, {y})"
            )));
        }
        Ok((c[0] as f64, n as f64))
    };
    let mut p_a_plus = [0.0; 4];
    let mut p_b_plus = [0.0; 4];
    let mut tests = [ZTest {
        p1: 0.0,
        p2: 0.0,
        z: 0.0,
        p_value: 1.0,
    }; 4];
    for i in 0..2 {
        let (x1, n1) = cond(singles.a[i][0], 'A', i + 1, 1)?;
        let (x2, n2) = cond(singles.a[i][1], 'A', i + 1, 2)?;
        tests[i] = pooled_z_test(x1, n1, x2, n2)?;
        p_a_plus[2 * i] = tests[i].p1;
        p_a_plus[2 * i + 1] = tests[i].p2;
    }
    for j in 0..2 {
        let (x1, n1) = cond(singles.b[j][0], 'B', j + 1, 1)?;
        let (x2, n2) = cond(singles.b[j][1], 'B', j + 1, 2)?;
        tests[2 + j] = pooled_z_test(x1, n1, x2, n2)?;
        p_b_plus[2 * j] = tests[2 + j].p1;
        p_b_plus[2 * j + 1] = tests[2 + j].p2;
    }
    Ok(NoSignalingReport {
        p_a_plus,
        p_b_plus,
        tests,
    })
}

/// Real-valued counterpart of [`CoincidenceTable`] with the same layout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealTable {
    pub counts: [f64; 16],
}

impl From<&CoincidenceTable> for RealTable {
    fn from(t: &CoincidenceTable) -> Self {
        RealTable {
            counts: t.counts.map(|c| c as f64),
        }
    }
}

impl RealTable {
    pub fn get(&self, i: usize, j: usize, a: usize, b: usize) -> f64 {
        self.counts[((i * 2 + j) * 2 + a) * 2 + b]
    }

    pub fn n_ij(&self, i: usize, j: usize) -> f64 {
        (0..4).map(|k| self.get(i, j, k / 2, k % 2)).sum()
    }
}

/// Rescale outcome counts for unequal `+`/`-` detection efficiencies:
/// Alice's `+` counts by `√R_A`, her `-` counts by `1/√R_A`, and likewise for
/// Bob.
pub fn efficiency_correction(table: &CoincidenceTable, r_a: f64, r_b: f64) -> Result<RealTable> {
    if !(r_a > 0.0 && r_b > 0.0) || !(r_a.is_finite() && r_b.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "efficiency ratios must be positive, got {r_a}, {r_b}"
        )));
    }
    let (sa, sb) = (r_a.sqrt(), r_b.sqrt());
    let mut out = RealTable::from(table);
    for (idx, c) in out.counts.iter_mut().enumerate() {
        let fa = if (idx >> 1) & 1 == 0 { sa } else { 1.0 / sa };
        let fb = if idx & 1 == 0 { sb } else { 1.0 / sb };
        *c *= fa * fb;
    }
    Ok(out)
}

/// No-signaling tests on coincidence-conditioned marginals: `p(A=+)` across
/// Bob's settings for each of Alice's, then `p(B=+)` across Alice's settings
/// for each of Bob's.
pub fn coincidence_marginal_tests(table: &RealTable) -> Result<[ZTest; 4]> {
    let a_plus = |i, j| table.get(i, j, 0, 0) + table.get(i, j, 0, 1);
    let b_plus = |i, j| table.get(i, j, 0, 0) + table.get(i, j, 1, 0);
    let n = |i, j| table.n_ij(i, j);
    Ok([
        pooled_z_test(a_plus(0, 0), n(0, 0), a_plus(0, 1), n(0, 1))?,
        pooled_z_test(a_plus(1, 0), n(1, 0), a_plus(1, 1), n(1, 1))?,
        pooled_z_test(b_plus(0, 0), n(0, 0), b_plus(1, 0), n(1, 0))?,
        pooled_z_test(b_plus(0, 1), n(0, 1), b_plus(1, 1), n(1, 1))?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn balanced_singles() {
        let s = SinglesTable {
            a: [[[50, 50]; 2]; 2],
            b: [[[70, 30]; 2]; 2],
        };
        let r = no_signaling(&s).unwrap();
        for t in r.tests {
            assert_eq!(t.z, 0.0);
            assert_eq!(t.p_value, 1.0);
        }
        assert_eq!(r.p_b_plus, [0.7; 4]);
    }

    #[test]
    fn empty_condition_is_an_error() {
        let mut s = SinglesTable {
            a: [[[5, 5]; 2]; 2],
            b: [[[5, 5]; 2]; 2],
        };
        s.b[1][0] = [0, 0];
        assert!(no_signaling(&s).is_err());
    }

    #[test]
    fn identity_and_closed_form_correction() {
        let t = CoincidenceTable { counts: [1; 16] };
        assert_eq!(efficiency_correction(&t, 1.0, 1.0).unwrap(), RealTable::from(&t));
        let c = efficiency_correction(&t, 4.0, 1.0).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                for b in 0..2 {
                    assert_eq!(c.get(i, j, 0, b), 2.0);
                    assert_eq!(c.get(i, j, 1, b), 0.5);
                }
            }
        }
        assert!(efficiency_correction(&t, 0.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn z_test_is_antisymmetric(x1 in 0u32..1000, e1 in 1u32..1000, x2 in 0u32..1000, e2 in 1u32..1000) {
            let (x1, n1, x2, n2) = (x1 as f64, (x1 + e1) as f64, x2 as f64, (x2 + e2) as f64);
            let f = pooled_z_test(x1, n1, x2, n2).unwrap();
            let r = pooled_z_test(x2, n2, x1, n1).unwrap();
            prop_assert!((f.z + r.z).abs() < 1e-12);
            prop_assert!((f.p_value - r.p_value).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&f.p_value));
        }

        #[test]
        fn correction_round_trips(counts in proptest::array::uniform16(0u64..10_000), ra in 0.2f64..5.0, rb in 0.2f64..5.0) {
            let t = CoincidenceTable { counts };
            let c = efficiency_correction(&t, ra, rb).unwrap();
            let (sa, sb) = (ra.sqrt(), rb.sqrt());
            for i in 0..2 {
                for j in 0..2 {
                    // the ratio of ++ to -- scales by R_A R_B
                    let pp = c.get(i, j, 0, 0);
                    let mm = c.get(i, j, 1, 1);
                    let raw_pp = t.get(i, j, 0, 0) as f64;
                    prop_assert!((pp - raw_pp * sa * sb).abs() <= 1e-9 * pp.max(1.0));
                    prop_assert!((mm * sa * sb - t.get(i, j, 1, 1) as f64).abs() <= 1e-9 * mm.max(1.0) * sa * sb);
                }
            }
        }
    }
}
