use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Side;

/// Origin of a simulated detection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruthLabel {
    /// Stellar photon reaching the port of its own color.
    StellarCorrect,
    /// Stellar photon misrouted to the other port.
    StellarWrongWay,
    /// Setting-port click not caused by the target star.
    Noise,
    /// Photon of an emitted entangled pair.
    PairPhoton,
    /// Outcome-detector dark count.
    DarkCount,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventTruth {
    pub label: TruthLabel,
    pub pair_id: Option<u64>,
}

/// Labels for every event of both streams, aligned with the event order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthRecord {
    pub a: Vec<EventTruth>,
    pub b: Vec<EventTruth>,
}

#[derive(Serialize, Deserialize)]
struct Row {
    side: char,
    index: usize,
    label: TruthLabel,
    pair_id: Option<u64>,
}

impl TruthRecord {
    pub fn side(&self, side: Side) -> &[EventTruth] {
        match side {
            Side::A => &self.a,
            Side::B => &self.b,
        }
    }

    pub fn count(&self, side: Side, label: TruthLabel) -> usize {
        self.side(side).iter().filter(|t| t.label == label).count()
    }

    /// Sidecar CSV: `side,index,label,pair_id`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for side in [Side::A, Side::B] {
            for (index, t) in self.side(side).iter().enumerate() {
                w.serialize(Row {
                    side: side.label(),
                    index,
                    label: t.label,
                    pair_id: t.pair_id,
                })?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rec = TruthRecord::default();
        for row in csv::Reader::from_reader(input).deserialize() {
            let row: Row = row?;
            let list = match row.side {
                'A' => &mut rec.a,
                'B' => &mut rec.b,
                s => return Err(Error::InvalidInput(format!("unknown side `{s}` in truth file"))),
            };
            if row.index != list.len() {
                return Err(Error::InvalidInput(format!(
                    "truth rows out of order at {}{}",
                    row.side, row.index
                )));
            }
            list.push(EventTruth {
                label: row.label,
                pair_id: row.pair_id,
            });
        }
        Ok(rec)
    }
}
