use serde::{Deserialize, Serialize};

use super::SettingClick;

/// Result of the artificial dead-time filter on one side's setting clicks.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeadTimeLog {
    /// Per click: marked for deletion.
    pub marked: Vec<bool>,
    /// Indices of marked clicks.
    pub deleted: Vec<usize>,
}

/// Mark every click that follows the last unmarked click of the opposite
/// color by less than `tau_cut_ps`. Outcomes later attributed to a marked
/// click are removed from the analysis by the gate.
pub fn dead_time_filter(settings: &[SettingClick], tau_cut_ps: u64) -> DeadTimeLog {
    let mut last_unmarked = [None::<u64>; 2];
    let mut log = DeadTimeLog {
        marked: Vec::with_capacity(settings.len()),
        deleted: Vec::new(),
    };
    for (k, click) in settings.iter().enumerate() {
        let opposite = click.color.other() as usize;
        let hit = last_unmarked[opposite].is_some_and(|t| click.timestamp_ps.saturating_sub(t) < tau_cut_ps);
        if hit {
            log.deleted.push(k);
        } else {
            last_unmarked[click.color as usize] = Some(click.timestamp_ps);
        }
        log.marked.push(hit);
    }
    log
}

#[cfg(test)]
mod tests {
    use super::super::Color;
    use super::*;
    use proptest::prelude::*;

    fn click(t: u64, color: Color) -> SettingClick {
        SettingClick { timestamp_ps: t, color }
    }

    /// Quadratic restatement of the rule.
    fn oracle(settings: &[SettingClick], tau_cut: u64) -> Vec<bool> {
        let mut marked: Vec<bool> = Vec::new();
        for (k, c) in settings.iter().enumerate() {
            let reference = (0..k)
                .rev()
                .find(|&j| !marked[j] && settings[j].color != c.color)
                .map(|j| settings[j].timestamp_ps);
            marked.push(reference.is_some_and(|t| c.timestamp_ps - t < tau_cut));
        }
        marked
    }

    #[test]
    fn close_opposite_click_is_marked() {
        let tau = 500_000;
        assert_eq!(
            dead_time_filter(&[click(0, Color::Red), click(300_000, Color::Blue)], tau).marked,
            vec![false, true]
        );
        assert_eq!(
            dead_time_filter(&[click(0, Color::Red), click(700_000, Color::Blue)], tau).marked,
            vec![false, false]
        );
        assert_eq!(
            dead_time_filter(&[click(0, Color::Red), click(100, Color::Red)], tau).marked,
            vec![false, false]
        );
    }

    #[test]
    fn alternating_clicks_lose_every_second() {
        let tau = 1000;
        let clicks: Vec<SettingClick> = (0..12)
            .map(|k| click(k * tau / 2, if k % 2 == 0 { Color::Red } else { Color::Blue }))
            .collect();
        let log = dead_time_filter(&clicks, tau);
        assert_eq!(log.marked, (0..12).map(|k| k % 2 == 1).collect::<Vec<_>>());
        assert_eq!(log.marked, oracle(&clicks, tau));
        assert_eq!(log.deleted, vec![1, 3, 5, 7, 9, 11]);
    }

    proptest! {
        #[test]
        fn matches_quadratic_oracle(gaps in prop::collection::vec((0u64..2000, any::<bool>()), 0..200), tau in 1u64..1500) {
            let mut t = 0;
            let clicks: Vec<SettingClick> = gaps.iter().map(|&(g, red)| {
                t += g;
                click(t, if red { Color::Red } else { Color::Blue })
            }).collect();
            prop_assert_eq!(dead_time_filter(&clicks, tau).marked, oracle(&clicks, tau));
        }
    }
}
