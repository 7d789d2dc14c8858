use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::ephemeris::direction_unchecked;
use super::{CelestialTarget, RunWindow, SiteLayout, TimingBudget, Vec3, SPEED_OF_LIGHT};
use crate::error::{Error, Result};
use crate::Side;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValiditySample {
    pub utc: DateTime<Utc>,
    pub tau_valid_s: f64,
}

/// Sampled setting-validity time for one side over a run window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityProfile {
    pub side: Side,
    pub samples: Vec<ValiditySample>,
    pub min_tau_valid_s: f64,
    pub max_tau_valid_s: f64,
    /// `None` when the buffer and set time exhaust the window.
    pub tau_used_s: Option<f64>,
}

impl ValidityProfile {
    pub fn variation_s(&self) -> f64 {
        self.max_tau_valid_s - self.min_tau_valid_s
    }

    pub fn is_causally_aligned(&self) -> bool {
        self.min_tau_valid_s > 0.0
    }
}

/// Instantaneous validity time for `side` given the unit vector toward its
/// star (ECEF).
///
/// With co-located stellar and entangled-photon receivers the cable-delay
/// term vanishes, leaving the baseline projection plus the free-space
/// channel path difference through air.
pub fn tau_valid(layout: &SiteLayout, side: Side, star_unit: Vec3, budget: &TimingBudget) -> f64 {
    let r_a = layout.alice.ecef();
    let r_b = layout.bob.ecef();
    let s = layout.source.ecef();
    let (near, far) = match side {
        Side::A => (r_a, r_b),
        Side::B => (r_b, r_a),
    };
    let projection = star_unit.dot(&(near - far));
    let channel = budget.index_air * ((near - s).norm() - (far - s).norm());
    (projection + channel) / SPEED_OF_LIGHT
}

/// Sample `tau_valid` over the window without enforcing alignment.
pub fn sample_validity<F>(
    layout: &SiteLayout,
    side: Side,
    direction: F,
    budget: &TimingBudget,
    window: &RunWindow,
    step_s: f64,
) -> ValidityProfile
where
    F: Fn(DateTime<Utc>) -> Vec3,
{
    let samples: Vec<ValiditySample> = window
        .offsets(step_s)
        .into_iter()
        .map(|off| {
            let utc = window.at(off);
            ValiditySample {
                utc,
                tau_valid_s: tau_valid(layout, side, direction(utc), budget),
            }
        })
        .collect();
    let min = samples.iter().map(|s| s.tau_valid_s).fold(f64::INFINITY, f64::min);
    let max = samples.iter().map(|s| s.tau_valid_s).fold(f64::NEG_INFINITY, f64::max);
    ValidityProfile {
        side,
        samples,
        min_tau_valid_s: min,
        max_tau_valid_s: max,
        tau_used_s: tau_used(min, budget, side).ok(),
    }
}

/// Validity profiles for both sides from arbitrary direction functions.
pub fn validity_times_with<FA, FB>(
    layout: &SiteLayout,
    dir_a: FA,
    dir_b: FB,
    budget: &TimingBudget,
    window: &RunWindow,
    step_s: f64,
) -> Result<(ValidityProfile, ValidityProfile)>
where
    FA: Fn(DateTime<Utc>) -> Vec3,
    FB: Fn(DateTime<Utc>) -> Vec3,
{
    if !(step_s > 0.0) {
        return Err(Error::InvalidInput(format!("sampling step {step_s} must be positive")));
    }
    budget.validate()?;
    let a = sample_validity(layout, Side::A, dir_a, budget, window, step_s);
    let b = sample_validity(layout, Side::B, dir_b, budget, window, step_s);
    for p in [&a, &b] {
        if let Some(bad) = p.samples.iter().find(|s| s.tau_valid_s <= 0.0) {
            return Err(Error::CausalMisalignment {
                side: p.side.label(),
                offset_s: (bad.utc - window.start_utc).num_milliseconds() as f64 / 1e3,
                tau_valid_s: bad.tau_valid_s,
            });
        }
        tau_used(p.min_tau_valid_s, budget, p.side)?;
    }
    Ok((a, b))
}

/// Validity profiles for a star pair observed from the layout.
pub fn validity_times(
    layout: &SiteLayout,
    star_a: &CelestialTarget,
    star_b: &CelestialTarget,
    budget: &TimingBudget,
    window: &RunWindow,
    step_s: f64,
) -> Result<(ValidityProfile, ValidityProfile)> {
    let dir = |t: &CelestialTarget, side: Side| {
        let site = layout.site(side).clone();
        let (ra, dec) = (t.right_ascension_deg, t.declination_deg);
        move |utc: DateTime<Utc>| direction_unchecked(ra, dec, utc, &site).unit
    };
    validity_times_with(
        layout,
        dir(star_a, Side::A),
        dir(star_b, Side::B),
        budget,
        window,
        step_s,
    )
}

/// Usable window: minimum validity minus buffer and setting time.
pub fn tau_used(min_valid_s: f64, budget: &TimingBudget, side: Side) -> Result<f64> {
    let used = min_valid_s - budget.buffer(side) - budget.tau_set_s;
    if used > 0.0 {
        Ok(used)
    } else {
        Err(Error::WindowExhausted {
            side: side.label(),
            min_valid_s,
        })
    }
}

/// Delay of a photon behind its causal light cone through an atmosphere of
/// scale height `scale_height_m`.
pub fn atmospheric_delay(elevation_m: f64, airmass: f64, scale_height_m: f64, n_minus_1: f64) -> f64 {
    (scale_height_m - elevation_m) * airmass * n_minus_1 / SPEED_OF_LIGHT
}

/// Plane-parallel airmass.
pub fn airmass(altitude_deg: f64) -> Result<f64> {
    if !(altitude_deg > 0.0 && altitude_deg <= 90.0) {
        return Err(Error::InvalidInput(format!("altitude {altitude_deg} outside (0, 90]")));
    }
    Ok(1.0 / altitude_deg.to_radians().sin())
}
