//! Computational stack for a Bell test whose measurement settings are chosen
//! by the colors of photons from distant stars.
//!
//! * [`geometry`]: site positions, star directions, setting-validity
//!   windows, atmospheric delay, light-cone lookback times.
//! * [`catalogue`]: star catalogue ingestion and candidate selection.
//! * [`spectra`]: the color setting reader and its wrong-way fractions.
//! * [`timetag`]: time-tag streams, drift correction, gating, coincidences.
//! * [`bellstats`]: CHSH, predictability, memory-robust significance,
//!   no-signaling checks.
//! * [`simulate`]: ground-truth-labelled synthetic streams.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bellstats;
pub mod catalogue;
pub mod config;
pub mod error;
pub mod geometry;
pub mod simulate;
pub mod special;
pub mod spectra;
pub mod timetag;

use serde::{Deserialize, Serialize};

pub use error::{Error, Result};

/// One of the two measurement stations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn label(self) -> char {
        match self {
            Side::A => 'A',
            Side::B => 'B',
        }
    }

    pub fn other(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}
