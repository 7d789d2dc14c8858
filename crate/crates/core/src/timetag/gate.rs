use serde::{Deserialize, Serialize};

use super::{DeadTimeLog, OutcomeEvent, PortMap, SettingClick};
use crate::Side;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
struct TrackClick {
    timestamp_ps: u64,
    setting: usize,
    marked: bool,
}

/// One side's setting clicks resolved to setting indices, with dead-time marks.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SettingTrack {
    clicks: Vec<TrackClick>,
}

/// The setting in force at some instant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ActiveSetting {
    pub setting: usize,
    pub age_ps: u64,
    pub marked: bool,
}

impl SettingTrack {
    /// `settings` sorted by time; `log` from the dead-time filter, if applied.
    pub fn new(side: Side, settings: &[SettingClick], ports: &PortMap, log: Option<&DeadTimeLog>) -> Self {
        let clicks = settings
            .iter()
            .enumerate()
            .map(|(k, c)| TrackClick {
                timestamp_ps: c.timestamp_ps,
                setting: ports.setting(side, c.color),
                marked: log.is_some_and(|l| l.marked[k]),
            })
            .collect();
        SettingTrack { clicks }
    }

    pub fn len(&self) -> usize {
        self.clicks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clicks.is_empty()
    }

    /// Most recent click at or before `t_ps`.
    pub fn active_at(&self, t_ps: u64) -> Option<ActiveSetting> {
        let k = self.clicks.partition_point(|c| c.timestamp_ps <= t_ps);
        (k > 0).then(|| {
            let c = self.clicks[k - 1];
            ActiveSetting {
                setting: c.setting,
                age_ps: t_ps - c.timestamp_ps,
                marked: c.marked,
            }
        })
    }

    /// The setting usable at `t_ps`: present, unmarked, and not expired.
    pub fn valid_at(&self, t_ps: u64, tau_used_ps: u64) -> Option<usize> {
        self.active_at(t_ps)
            .filter(|a| !a.marked && a.age_ps <= tau_used_ps)
            .map(|a| a.setting)
    }
}

/// An outcome annotated with the setting in force on its side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GatedOutcome {
    pub event: OutcomeEvent,
    /// 0 for setting 1, 1 for setting 2; `None` before the first click.
    pub setting: Option<usize>,
    pub age_ps: Option<u64>,
    /// `age_ps <= tau_used`.
    pub valid: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateReport {
    pub gated: Vec<GatedOutcome>,
    pub valid: usize,
    pub expired: usize,
    pub no_setting: usize,
    /// Outcomes whose active setting was marked by the dead-time filter;
    /// they are dropped from `gated`.
    pub dead_time_deleted: usize,
}

/// Attribute each outcome to the most recent setting click on its side.
pub fn gate_settings(outcomes: &[OutcomeEvent], track: &SettingTrack, tau_used_ps: u64) -> GateReport {
    let mut report = GateReport {
        gated: Vec::with_capacity(outcomes.len()),
        ..GateReport::default()
    };
    for &event in outcomes {
        match track.active_at(event.timestamp_ps) {
            None => {
                report.no_setting += 1;
                report.gated.push(GatedOutcome {
                    event,
                    setting: None,
                    age_ps: None,
                    valid: false,
                });
            }
            Some(a) if a.marked => report.dead_time_deleted += 1,
            Some(a) => {
                let valid = a.age_ps <= tau_used_ps;
                if valid {
                    report.valid += 1;
                } else {
                    report.expired += 1;
                }
                report.gated.push(GatedOutcome {
                    event,
                    setting: Some(a.setting),
                    age_ps: Some(a.age_ps),
                    valid,
                });
            }
        }
    }
    report
}

/// Fraction of `[start, end)` during which a valid setting is in force.
pub fn duty_cycle(track: &SettingTrack, tau_used_ps: u64, start_ps: u64, end_ps: u64) -> f64 {
    if end_ps <= start_ps {
        return 0.0;
    }
    let mut covered: u64 = 0;
    for (k, c) in track.clicks.iter().enumerate() {
        if c.marked {
            continue;
        }
        let next = track.clicks.get(k + 1).map_or(u64::MAX, |n| n.timestamp_ps);
        let lo = c.timestamp_ps.max(start_ps);
        let hi = c.timestamp_ps.saturating_add(tau_used_ps).min(next).min(end_ps);
        covered += hi.saturating_sub(lo);
    }
    covered as f64 / (end_ps - start_ps) as f64
}

#[cfg(test)]
mod tests {
    use super::super::{dead_time_filter, Color, Outcome};
    use super::*;

    fn outcome(t: u64) -> OutcomeEvent {
        OutcomeEvent {
            timestamp_ps: t,
            outcome: Outcome::Plus,
        }
    }

    fn red(t: u64) -> SettingClick {
        SettingClick {
            timestamp_ps: t,
            color: Color::Red,
        }
    }

    #[test]
    fn validity_window() {
        let track = SettingTrack::new(Side::A, &[red(0)], &PortMap::default(), None);
        let r = gate_settings(&[outcome(1_900_000), outcome(2_100_000)], &track, 2_000_000);
        assert!(r.gated[0].valid);
        assert!(!r.gated[1].valid);
        assert_eq!(r.gated[0].setting, Some(0));
        assert_eq!((r.valid, r.expired), (1, 1));
    }

    #[test]
    fn outcome_before_any_setting_is_invalid() {
        let track = SettingTrack::new(Side::A, &[red(100)], &PortMap::default(), None);
        let r = gate_settings(&[outcome(50)], &track, 1000);
        assert_eq!(r.no_setting, 1);
        assert!(!r.gated[0].valid && r.gated[0].setting.is_none());
    }

    #[test]
    fn marked_setting_deletes_outcomes() {
        let clicks = [
            red(0),
            SettingClick {
                timestamp_ps: 300,
                color: Color::Blue,
            },
        ];
        let log = dead_time_filter(&clicks, 500);
        let track = SettingTrack::new(Side::A, &clicks, &PortMap::default(), Some(&log));
        let r = gate_settings(&[outcome(200), outcome(400)], &track, 10_000);
        assert_eq!(r.dead_time_deleted, 1);
        assert_eq!(r.gated.len(), 1);
        assert_eq!(r.gated[0].event.timestamp_ps, 200);
    }

    #[test]
    fn duty_cycle_of_regular_clicks() {
        let clicks: Vec<SettingClick> = (0..10).map(|k| red(k * 1000)).collect();
        let track = SettingTrack::new(Side::A, &clicks, &PortMap::default(), None);
        assert!((duty_cycle(&track, 400, 0, 10_000) - 0.4).abs() < 1e-12);
        assert!((duty_cycle(&track, 5000, 0, 10_000) - 1.0).abs() < 1e-12);
        assert_eq!(duty_cycle(&SettingTrack::default(), 5000, 0, 10_000), 0.0);
    }
}
