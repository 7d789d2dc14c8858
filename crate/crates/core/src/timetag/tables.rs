use serde::{Deserialize, Serialize};

use super::{DriftModel, GatedOutcome, SettingTrack};
use crate::error::{Error, Result};

/// Coincidence counts `N_ij^{AB}`: settings `i, j` (0 for setting 1) and
/// outcomes `A, B` (0 for `+`). Serialized row-major as `"N_ij_AB"`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CoincidenceTable {
    #[serde(rename = "N_ij_AB")]
    pub counts: [u64; 16],
}

fn idx(i: usize, j: usize, a: usize, b: usize) -> usize {
    ((i * 2 + j) * 2 + a) * 2 + b
}

impl CoincidenceTable {
    /// Rows in cell order `11, 12, 21, 22`, each `(++, +−, −+, −−)`.
    pub fn from_cells(cells: [[u64; 4]; 4]) -> Self {
        let mut counts = [0u64; 16];
        for (cell, row) in cells.iter().enumerate() {
            counts[cell * 4..cell * 4 + 4].copy_from_slice(row);
        }
        CoincidenceTable { counts }
    }

    pub fn cells(&self) -> [[u64; 4]; 4] {
        let mut out = [[0u64; 4]; 4];
        for (cell, row) in out.iter_mut().enumerate() {
            row.copy_from_slice(&self.counts[cell * 4..cell * 4 + 4]);
        }
        out
    }

    pub fn get(&self, i: usize, j: usize, a: usize, b: usize) -> u64 {
        self.counts[idx(i, j, a, b)]
    }

    pub fn add(&mut self, i: usize, j: usize, a: usize, b: usize, n: u64) {
        self.counts[idx(i, j, a, b)] += n;
    }

    pub fn n_ij(&self, i: usize, j: usize) -> u64 {
        self.counts[idx(i, j, 0, 0)..=idx(i, j, 1, 1)].iter().sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn equal_outcomes(&self, i: usize, j: usize) -> u64 {
        self.get(i, j, 0, 0) + self.get(i, j, 1, 1)
    }

    pub fn different_outcomes(&self, i: usize, j: usize) -> u64 {
        self.get(i, j, 0, 1) + self.get(i, j, 1, 0)
    }

    /// Swap the roles of the two sides.
    pub fn transposed(&self) -> Self {
        let mut t = CoincidenceTable::default();
        for i in 0..2 {
            for j in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        t.add(j, i, b, a, self.get(i, j, a, b));
                    }
                }
            }
        }
        t
    }

    /// Pointwise sum.
    pub fn merge(&self, other: &Self) -> Self {
        let mut out = *self;
        for (o, x) in out.counts.iter_mut().zip(other.counts) {
            *o += x;
        }
        out
    }
}

/// Local outcome counts split by the distant setting in force:
/// `a[i][j][±]` is `N_{a_i}^{±}` with Bob at `b_j`, `b[j][i][±]` is
/// `N_{b_j}^{±}` with Alice at `a_i`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SinglesTable {
    pub a: [[[u64; 2]; 2]; 2],
    pub b: [[[u64; 2]; 2]; 2],
}

impl SinglesTable {
    pub fn total(&self) -> u64 {
        let s = |t: &[[[u64; 2]; 2]; 2]| t.iter().flatten().flatten().sum::<u64>();
        s(&self.a) + s(&self.b)
    }

    pub fn merge(&self, other: &Self) -> Self {
        let mut out = *self;
        for i in 0..2 {
            for j in 0..2 {
                for o in 0..2 {
                    out.a[i][j][o] += other.a[i][j][o];
                    out.b[i][j][o] += other.b[i][j][o];
                }
            }
        }
        out
    }

    /// Consistency of the local totals with a coincidence table: every
    /// coincidence is also a single on both sides.
    pub fn check_covers(&self, table: &CoincidenceTable) -> Result<()> {
        for i in 0..2 {
            for j in 0..2 {
                for o in 0..2 {
                    let ca = table.get(i, j, o, 0) + table.get(i, j, o, 1);
                    let cb = table.get(i, j, 0, o) + table.get(i, j, 1, o);
                    if self.a[i][j][o] < ca || self.b[j][i][o] < cb {
                        return Err(Error::InconsistentTables(format!(
                            "singles in cell a{}b{} fewer than coincidences",
                            i + 1,
                            j + 1
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Count each valid local outcome under the distant setting valid at the
/// same instant (drift-corrected).
#[allow(clippy::too_many_arguments)]
pub fn tabulate_singles(
    gated_a: &[GatedOutcome],
    gated_b: &[GatedOutcome],
    track_a: &SettingTrack,
    track_b: &SettingTrack,
    tau_used_a_ps: u64,
    tau_used_b_ps: u64,
    drift: &DriftModel,
) -> SinglesTable {
    let mut t = SinglesTable::default();
    for g in gated_a.iter().filter(|g| g.valid) {
        let tb = drift.to_b_time(g.event.timestamp_ps);
        if tb < 0 {
            continue;
        }
        if let (Some(i), Some(j)) = (g.setting, track_b.valid_at(tb as u64, tau_used_b_ps)) {
            t.a[i][j][g.event.outcome.index()] += 1;
        }
    }
    for g in gated_b.iter().filter(|g| g.valid) {
        let ta = drift.to_a_time(g.event.timestamp_ps);
        if ta < 0 {
            continue;
        }
        if let (Some(j), Some(i)) = (g.setting, track_a.valid_at(ta as u64, tau_used_a_ps)) {
            t.b[j][i][g.event.outcome.index()] += 1;
        }
    }
    t
}
