//! Time-tagged detection streams: ingestion, clock-drift correction,
//! setting-validity gating, the dead-time filter on setting clicks, and
//! coincidence/singles tabulation.
//!
//! All timestamps are integer picoseconds. Site B's clock is modelled as
//! `t_B = t_A + offset(t_B)`, so a B timestamp maps to A's timebase as
//! `t_B - offset(t_B)`.

mod coincidence;
mod deadtime;
mod drift;
mod gate;
mod io;
mod pipeline;
mod tables;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Side;

pub use coincidence::{brute_force_coincidences, brute_force_pairs, match_coincidences, match_pairs, Pairing};
pub use deadtime::{dead_time_filter, DeadTimeLog};
pub use drift::{estimate_drift, DriftKnot, DriftModel, DriftOptions};
pub use gate::{duty_cycle, gate_settings, GateReport, GatedOutcome, SettingTrack};
pub use io::{parse_timetags, parse_timetags_text, write_timetags, write_timetags_text, SiteStreams, RECORD_BYTES};
pub use pipeline::{analyze_streams, GateSummary, StreamAnalysis, StreamParams};
pub use tables::{tabulate_singles, CoincidenceTable, SinglesTable};

/// Detector channel, in wire-code order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    OutcomePlus = 0,
    OutcomeMinus = 1,
    SettingRed = 2,
    SettingBlue = 3,
}

impl Channel {
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8, index: usize) -> Result<Self> {
        match code {
            0 => Ok(Channel::OutcomePlus),
            1 => Ok(Channel::OutcomeMinus),
            2 => Ok(Channel::SettingRed),
            3 => Ok(Channel::SettingBlue),
            _ => Err(Error::UnknownCode {
                kind: "channel",
                code,
                index,
            }),
        }
    }

    pub fn outcome(self) -> Option<Outcome> {
        match self {
            Channel::OutcomePlus => Some(Outcome::Plus),
            Channel::OutcomeMinus => Some(Outcome::Minus),
            _ => None,
        }
    }

    pub fn color(self) -> Option<Color> {
        match self {
            Channel::SettingRed => Some(Color::Red),
            Channel::SettingBlue => Some(Color::Blue),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    /// Table index: 0 for `+`, 1 for `−`.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn channel(self) -> Channel {
        match self {
            Outcome::Plus => Channel::OutcomePlus,
            Outcome::Minus => Channel::OutcomeMinus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Color {
    Red,
    Blue,
}

impl Color {
    pub fn other(self) -> Color {
        match self {
            Color::Red => Color::Blue,
            Color::Blue => Color::Red,
        }
    }

    pub fn channel(self) -> Channel {
        match self {
            Color::Red => Channel::SettingRed,
            Color::Blue => Channel::SettingBlue,
        }
    }
}

/// Which color selects setting 1 on each side; the other color selects
/// setting 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PortMap {
    pub a_setting1: Color,
    pub b_setting1: Color,
}

impl Default for PortMap {
    fn default() -> Self {
        PortMap {
            a_setting1: Color::Red,
            b_setting1: Color::Blue,
        }
    }
}

impl PortMap {
    /// Setting index 0 (setting 1) or 1 (setting 2).
    pub fn setting(&self, side: Side, color: Color) -> usize {
        let first = match side {
            Side::A => self.a_setting1,
            Side::B => self.b_setting1,
        };
        usize::from(color != first)
    }

    pub fn color(&self, side: Side, setting: usize) -> Color {
        let first = match side {
            Side::A => self.a_setting1,
            Side::B => self.b_setting1,
        };
        if setting == 0 {
            first
        } else {
            first.other()
        }
    }
}

/// One detection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TimeTagEvent {
    pub timestamp_ps: u64,
    pub site: Side,
    pub channel: Channel,
}

/// A local measurement outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeEvent {
    pub timestamp_ps: u64,
    pub outcome: Outcome,
}

/// A setting-reader click.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SettingClick {
    pub timestamp_ps: u64,
    pub color: Color,
}

/// Split one site's sorted events into outcomes and setting clicks.
pub fn split_channels(events: &[TimeTagEvent]) -> (Vec<OutcomeEvent>, Vec<SettingClick>) {
    let mut outcomes = Vec::new();
    let mut settings = Vec::new();
    for e in events {
        if let Some(outcome) = e.channel.outcome() {
            outcomes.push(OutcomeEvent {
                timestamp_ps: e.timestamp_ps,
                outcome,
            });
        } else if let Some(color) = e.channel.color() {
            settings.push(SettingClick {
                timestamp_ps: e.timestamp_ps,
                color,
            });
        }
    }
    (outcomes, settings)
}
