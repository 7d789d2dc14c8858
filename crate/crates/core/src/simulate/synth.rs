use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::timetag::{CoincidenceTable, Outcome, SinglesTable, SiteStreams, StreamParams, TimeTagEvent};
use crate::Side;

/// Slot geometry used to lay out synthesized events.
///
/// Each slot opens with one setting click per side at the same instant.
/// Outcomes follow at `first_offset_ps + m * spacing_ps`, well inside both
/// validity windows and further apart than the coincidence window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthesisLayout {
    pub slot_ps: u64,
    pub first_offset_ps: u64,
    pub spacing_ps: u64,
    pub items_per_slot: usize,
}

impl SynthesisLayout {
    pub fn for_params(params: &StreamParams) -> Result<Self> {
        let spacing_ps = (4 * params.window_ps).max(10_000);
        let first_offset_ps = 1_000;
        let tau_min = params.tau_used_a_ps.min(params.tau_used_b_ps);
        if tau_min < first_offset_ps + spacing_ps {
            return Err(Error::InvalidInput(format!(
                "validity window {tau_min} ps too short to lay out synthesized events"
            )));
        }
        let items_per_slot = ((tau_min - first_offset_ps) / spacing_ps) as usize;
        let cut = params.tau_cut_a_ps.unwrap_or(0).max(params.tau_cut_b_ps.unwrap_or(0));
        let slot_ps = params.tau_used_a_ps.max(params.tau_used_b_ps) + cut + spacing_ps;
        Ok(SynthesisLayout {
            slot_ps,
            first_offset_ps,
            spacing_ps,
            items_per_slot,
        })
    }
}

#[derive(Clone, Copy)]
enum Item {
    Both(Outcome, Outcome),
    AOnly(Outcome),
    BOnly(Outcome),
}

const OUTCOMES: [Outcome; 2] = [Outcome::Plus, Outcome::Minus];

fn cell_items(table: &CoincidenceTable, singles: Option<&SinglesTable>, i: usize, j: usize) -> Result<Vec<Item>> {
    let mut items = Vec::new();
    for a in 0..2 {
        for b in 0..2 {
            let n = table.get(i, j, a, b) as usize;
            items.extend(std::iter::repeat_n(Item::Both(OUTCOMES[a], OUTCOMES[b]), n));
        }
    }
    let Some(s) = singles else { return Ok(items) };
    for o in 0..2 {
        let ca = table.get(i, j, o, 0) + table.get(i, j, o, 1);
        let cb = table.get(i, j, 0, o) + table.get(i, j, 1, o);
        let extra_a = s.a[i][j][o].checked_sub(ca);
        let extra_b = s.b[j][i][o].checked_sub(cb);
        let (Some(extra_a), Some(extra_b)) = (extra_a, extra_b) else {
            return Err(Error::InconsistentTables(format!(
                "singles in cell a{}b{} fewer than coincidences",
                i + 1,
                j + 1
            )));
        };
        items.extend(std::iter::repeat_n(Item::AOnly(OUTCOMES[o]), extra_a as usize));
        items.extend(std::iter::repeat_n(Item::BOnly(OUTCOMES[o]), extra_b as usize));
    }
    Ok(items)
}

/// Build streams whose pipeline output under `params` reproduces the given
/// coincidence table and, if supplied, singles table exactly.
///
/// B events are written on B's clock according to `params.fixed_drift`.
pub fn synthesize_from_tables(
    table: &CoincidenceTable,
    singles: Option<&SinglesTable>,
    params: &StreamParams,
) -> Result<SiteStreams> {
    let layout = SynthesisLayout::for_params(params)?;
    let drift = &params.fixed_drift;
    let mut streams = SiteStreams::default();
    let mut slot_start = super::START_PS;
    let to_b = |t: u64| -> Result<u64> {
        u64::try_from(drift.to_b_time(t)).map_err(|_| Error::InvalidInput("drift maps events before B's origin".into()))
    };
    for i in 0..2 {
        for j in 0..2 {
            let items = cell_items(table, singles, i, j)?;
            for chunk in items.chunks(layout.items_per_slot) {
                let t0 = slot_start;
                slot_start += layout.slot_ps;
                streams.a.push(TimeTagEvent {
                    timestamp_ps: t0,
                    site: Side::A,
                    channel: params.ports.color(Side::A, i).channel(),
                });
                streams.b.push(TimeTagEvent {
                    timestamp_ps: to_b(t0)?,
                    site: Side::B,
                    channel: params.ports.color(Side::B, j).channel(),
                });
                for (m, item) in chunk.iter().enumerate() {
                    let t = t0 + layout.first_offset_ps + m as u64 * layout.spacing_ps;
                    let (oa, ob) = match *item {
                        Item::Both(a, b) => (Some(a), Some(b)),
                        Item::AOnly(a) => (Some(a), None),
                        Item::BOnly(b) => (None, Some(b)),
                    };
                    if let Some(o) = oa {
                        streams.a.push(TimeTagEvent {
                            timestamp_ps: t,
                            site: Side::A,
                            channel: o.channel(),
                        });
                    }
                    if let Some(o) = ob {
                        streams.b.push(TimeTagEvent {
                            timestamp_ps: to_b(t)?,
                            site: Side::B,
                            channel: o.channel(),
                        });
                    }
                }
            }
        }
    }
    streams.sort();
    Ok(streams)
}
