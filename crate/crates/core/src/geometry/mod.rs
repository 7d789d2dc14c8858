//! Observer geometry: site positions, star directions, setting-validity
//! windows, atmospheric delay and light-cone lookback times.

mod earth;
mod ephemeris;
mod lookback;
mod validity;

use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Side;

pub use earth::{enu_basis, site_to_ecef, Vec3};
pub use ephemeris::{angular_separation, equatorial_to_ecef, gmst_deg, julian_date, star_direction, StarDirection};
pub use lookback::{earth_worldline_lookback, lookback_intersection, Lookback};
pub use validity::{
    airmass, atmospheric_delay, sample_validity, tau_used, tau_valid, validity_times, validity_times_with,
    ValidityProfile, ValiditySample,
};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Julian light-year, meters.
pub const LIGHT_YEAR_M: f64 = 9.460_730_472_580_8e15;
/// Distance in light-years of a source with 1 mas parallax.
pub const LY_PER_INVERSE_MAS: f64 = 3261.6;

/// A site on the WGS-84 ellipsoid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeodeticSite {
    pub label: String,
    #[serde(rename = "lat_deg")]
    pub latitude_deg: f64,
    /// East-positive, normalized to (-180, 180].
    #[serde(rename = "lon_deg")]
    pub longitude_deg: f64,
    #[serde(rename = "elev_m")]
    pub elevation_m: f64,
}

impl GeodeticSite {
    pub fn new(label: impl Into<String>, latitude_deg: f64, longitude_deg: f64, elevation_m: f64) -> Result<Self> {
        let site = GeodeticSite {
            label: label.into(),
            latitude_deg,
            longitude_deg,
            elevation_m,
        };
        site.validated()
    }

    /// Check the invariants and normalize longitude.
    pub fn validated(mut self) -> Result<Self> {
        if !(self.latitude_deg.is_finite() && self.latitude_deg.abs() <= 90.0) {
            return Err(Error::InvalidInput(format!(
                "latitude {} out of range",
                self.latitude_deg
            )));
        }
        if !self.longitude_deg.is_finite() || !self.elevation_m.is_finite() {
            return Err(Error::InvalidInput(format!(
                "site {} has non-finite fields",
                self.label
            )));
        }
        let mut lon = self.longitude_deg.rem_euclid(360.0);
        if lon > 180.0 {
            lon -= 360.0;
        }
        self.longitude_deg = lon;
        Ok(self)
    }

    pub fn ecef(&self) -> Vec3 {
        site_to_ecef(self)
    }
}

/// The three experimental sites. Each side's stellar and entangled-photon
/// receivers are taken to be co-located.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteLayout {
    pub alice: GeodeticSite,
    pub bob: GeodeticSite,
    pub source: GeodeticSite,
}

impl SiteLayout {
    pub fn site(&self, side: Side) -> &GeodeticSite {
        match side {
            Side::A => &self.alice,
            Side::B => &self.bob,
        }
    }

    /// Build from a list of sites labelled A, B and S.
    pub fn from_sites(sites: &[GeodeticSite]) -> Result<Self> {
        let find = |label: &str| {
            sites
                .iter()
                .find(|s| s.label.eq_ignore_ascii_case(label))
                .cloned()
                .ok_or_else(|| Error::InvalidInput(format!("missing site `{label}`")))
                .and_then(GeodeticSite::validated)
        };
        Ok(SiteLayout {
            alice: find("A")?,
            bob: find("B")?,
            source: find("S")?,
        })
    }
}

/// A catalogue star with its parallax distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CelestialTarget {
    pub catalogue_id: String,
    pub right_ascension_deg: f64,
    pub declination_deg: f64,
    pub parallax_mas: f64,
    pub parallax_error_mas: f64,
    pub distance_ly: f64,
    pub distance_error_ly: f64,
    /// Hipparcos H_p magnitude.
    pub magnitude: f64,
}

impl CelestialTarget {
    pub fn from_parallax(
        id: impl Into<String>,
        ra_deg: f64,
        dec_deg: f64,
        parallax_mas: f64,
        parallax_error_mas: f64,
        magnitude: f64,
    ) -> Result<Self> {
        let (d, sd) = crate::catalogue::parallax_to_distance(parallax_mas, parallax_error_mas)?;
        Ok(CelestialTarget {
            catalogue_id: id.into(),
            right_ascension_deg: ra_deg,
            declination_deg: dec_deg,
            parallax_mas,
            parallax_error_mas,
            distance_ly: d,
            distance_error_ly: sd,
            magnitude,
        })
    }

    pub fn from_distance(
        id: impl Into<String>,
        ra_deg: f64,
        dec_deg: f64,
        distance_ly: f64,
        distance_error_ly: f64,
        magnitude: f64,
    ) -> Result<Self> {
        if !(distance_ly > 0.0) {
            return Err(Error::InvalidInput(format!(
                "distance {distance_ly} ly must be positive"
            )));
        }
        let parallax_mas = LY_PER_INVERSE_MAS / distance_ly;
        Ok(CelestialTarget {
            catalogue_id: id.into(),
            right_ascension_deg: ra_deg,
            declination_deg: dec_deg,
            parallax_mas,
            parallax_error_mas: parallax_mas * distance_error_ly / distance_ly,
            distance_ly,
            distance_error_ly,
            magnitude,
        })
    }
}

/// Delay and overhead parameters entering the validity windows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimingBudget {
    pub tau_set_s: f64,
    pub tau_buffer_a_s: f64,
    pub tau_buffer_b_s: f64,
    pub tau_atm_s: f64,
    pub index_air: f64,
    pub cable_delay_a: f64,
    pub cable_delay_b: f64,
}

impl Default for TimingBudget {
    fn default() -> Self {
        TimingBudget {
            tau_set_s: 170e-9,
            tau_buffer_a_s: 0.38e-6,
            tau_buffer_b_s: 1.76e-6,
            tau_atm_s: 18e-9,
            index_air: 1.0 + 2.7e-4,
            cable_delay_a: 0.0,
            cable_delay_b: 0.0,
        }
    }
}

impl TimingBudget {
    pub fn buffer(&self, side: Side) -> f64 {
        match side {
            Side::A => self.tau_buffer_a_s,
            Side::B => self.tau_buffer_b_s,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let delays = [
            self.tau_set_s,
            self.tau_buffer_a_s,
            self.tau_buffer_b_s,
            self.tau_atm_s,
            self.cable_delay_a,
            self.cable_delay_b,
        ];
        if delays.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(Error::InvalidInput(
                "timing budget delays must be finite and >= 0".into(),
            ));
        }
        if !(self.index_air >= 1.0) {
            return Err(Error::InvalidInput(format!("index of air {} < 1", self.index_air)));
        }
        Ok(())
    }
}

/// Observation window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunWindow {
    pub start_utc: DateTime<Utc>,
    pub duration_s: f64,
}

impl RunWindow {
    /// Sample offsets (seconds from start) at the given step, endpoint included.
    pub fn offsets(&self, step_s: f64) -> Vec<f64> {
        let n = (self.duration_s / step_s).floor() as usize;
        let mut v: Vec<f64> = (0..=n).map(|k| k as f64 * step_s).collect();
        if v.last().is_some_and(|&last| self.duration_s - last > 1e-9) {
            v.push(self.duration_s);
        }
        v
    }

    pub fn at(&self, offset_s: f64) -> DateTime<Utc> {
        self.start_utc + Duration::nanoseconds((offset_s * 1e9).round() as i64)
    }

    pub fn mid(&self) -> DateTime<Utc> {
        self.at(self.duration_s / 2.0)
    }
}
