use serde::{Deserialize, Serialize};

use super::{
    dead_time_filter, duty_cycle, estimate_drift, gate_settings, match_coincidences, split_channels, tabulate_singles,
    CoincidenceTable, DriftModel, DriftOptions, GateReport, PortMap, SettingTrack, SinglesTable, SiteStreams,
};
use crate::error::Result;
use crate::Side;

/// Stream-analysis parameters. Times in picoseconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StreamParams {
    pub window_ps: u64,
    pub tau_used_a_ps: u64,
    pub tau_used_b_ps: u64,
    /// `None` disables the dead-time filter on that side.
    pub tau_cut_a_ps: Option<u64>,
    pub tau_cut_b_ps: Option<u64>,
    pub ports: PortMap,
    /// Estimate drift from the data; otherwise use `fixed_drift`.
    pub estimate_drift: Option<DriftOptions>,
    pub fixed_drift: DriftModel,
}

impl Default for StreamParams {
    fn default() -> Self {
        StreamParams {
            window_ps: 2_500,
            tau_used_a_ps: 2_000_000,
            tau_used_b_ps: 5_000_000,
            tau_cut_a_ps: Some(500_000),
            tau_cut_b_ps: Some(500_000),
            ports: PortMap::default(),
            estimate_drift: None,
            fixed_drift: DriftModel::zero(),
        }
    }
}

impl StreamParams {
    pub fn tau_used_ps(&self, side: Side) -> u64 {
        match side {
            Side::A => self.tau_used_a_ps,
            Side::B => self.tau_used_b_ps,
        }
    }

    pub fn tau_cut_ps(&self, side: Side) -> Option<u64> {
        match side {
            Side::A => self.tau_cut_a_ps,
            Side::B => self.tau_cut_b_ps,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct GateSummary {
    pub outcomes: usize,
    pub valid: usize,
    pub expired: usize,
    pub no_setting: usize,
    pub dead_time_deleted: usize,
    pub settings: usize,
    pub settings_marked: usize,
    pub duty_cycle: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamAnalysis {
    pub coincidences: CoincidenceTable,
    pub singles: SinglesTable,
    pub drift: DriftModel,
    pub gate_a: GateSummary,
    pub gate_b: GateSummary,
}

struct SideResult {
    track: SettingTrack,
    report: GateReport,
    summary: GateSummary,
}

fn process_side(streams: &SiteStreams, side: Side, params: &StreamParams, span: (u64, u64)) -> SideResult {
    let (outcomes, settings) = split_channels(streams.side(side));
    let log = params.tau_cut_ps(side).map(|cut| dead_time_filter(&settings, cut));
    let track = SettingTrack::new(side, &settings, &params.ports, log.as_ref());
    let tau = params.tau_used_ps(side);
    let report = gate_settings(&outcomes, &track, tau);
    let summary = GateSummary {
        outcomes: outcomes.len(),
        valid: report.valid,
        expired: report.expired,
        no_setting: report.no_setting,
        dead_time_deleted: report.dead_time_deleted,
        settings: settings.len(),
        settings_marked: log.as_ref().map_or(0, |l| l.deleted.len()),
        duty_cycle: duty_cycle(&track, tau, span.0, span.1),
    };
    SideResult { track, report, summary }
}

/// Drift estimation, dead-time filter, gating, coincidence matching and
/// singles tabulation for a pair of site streams.
pub fn analyze_streams(streams: &SiteStreams, params: &StreamParams) -> Result<StreamAnalysis> {
    let first = streams
        .a
        .first()
        .into_iter()
        .chain(streams.b.first())
        .map(|e| e.timestamp_ps)
        .min();
    let last = streams
        .a
        .last()
        .into_iter()
        .chain(streams.b.last())
        .map(|e| e.timestamp_ps)
        .max();
    let span = (first.unwrap_or(0), last.map_or(0, |t| t + 1));

    let drift = match &params.estimate_drift {
        Some(opts) => {
            let outcome_times = |side: Side| -> Vec<u64> {
                streams
                    .side(side)
                    .iter()
                    .filter(|e| e.channel.outcome().is_some())
                    .map(|e| e.timestamp_ps)
                    .collect()
            };
            estimate_drift(&outcome_times(Side::A), &outcome_times(Side::B), opts)?
        }
        None => params.fixed_drift.clone(),
    };

    let (a, b) = rayon::join(
        || process_side(streams, Side::A, params, span),
        || process_side(streams, Side::B, params, span),
    );
    let coincidences = match_coincidences(&a.report.gated, &b.report.gated, params.window_ps, &drift);
    let singles = tabulate_singles(
        &a.report.gated,
        &b.report.gated,
        &a.track,
        &b.track,
        params.tau_used_a_ps,
        params.tau_used_b_ps,
        &drift,
    );
    Ok(StreamAnalysis {
        coincidences,
        singles,
        drift,
        gate_a: a.summary,
        gate_b: b.summary,
    })
}
