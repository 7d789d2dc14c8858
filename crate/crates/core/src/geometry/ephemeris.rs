//! Low-order ephemeris: Greenwich mean sidereal time and topocentric
//! horizon coordinates.
//!
//! Precession, nutation, aberration and refraction are neglected, and UTC is
//! used in place of UT1/TT. Pointing error is below 0.5° for epochs
//! 1990–2100 (dominated by precession from J2000 catalogue coordinates).

use chrono::{DateTime, Datelike, Utc};
use serde::{Deserialize, Serialize};

use super::earth::{enu_basis, Vec3};
use super::{CelestialTarget, GeodeticSite};
use crate::error::{Error, Result};

const UNIX_EPOCH_JD: f64 = 2_440_587.5;
const J2000_JD: f64 = 2_451_545.0;

/// Julian date of a UTC instant.
pub fn julian_date(utc: DateTime<Utc>) -> f64 {
    let secs = utc.timestamp() as f64 + f64::from(utc.timestamp_subsec_nanos()) * 1e-9;
    UNIX_EPOCH_JD + secs / 86_400.0
}

/// Greenwich mean sidereal time in degrees, `[0, 360)`.
pub fn gmst_deg(utc: DateTime<Utc>) -> f64 {
    let d = julian_date(utc) - J2000_JD;
    let t = d / 36_525.0;
    let g = 280.460_618_37 + 360.985_647_366_29 * d + 0.000_387_933 * t * t - t * t * t / 38_710_000.0;
    g.rem_euclid(360.0)
}

/// Unit vector toward an equatorial direction, in ECEF at the given instant.
pub fn equatorial_to_ecef(ra_deg: f64, dec_deg: f64, utc: DateTime<Utc>) -> Vec3 {
    let lon = (ra_deg - gmst_deg(utc)).to_radians();
    let dec = dec_deg.to_radians();
    Vec3::new(dec.cos() * lon.cos(), dec.cos() * lon.sin(), dec.sin())
}

/// Direction to a star as seen from a site.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StarDirection {
    /// Unit vector in ECEF.
    pub unit: Vec3,
    /// Degrees clockwise from North, `[0, 360)`.
    pub azimuth_deg: f64,
    /// Degrees above the horizon.
    pub altitude_deg: f64,
}

pub fn star_direction(target: &CelestialTarget, utc: DateTime<Utc>, site: &GeodeticSite) -> Result<StarDirection> {
    if !(target.right_ascension_deg.is_finite() && target.declination_deg.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "non-finite coordinates for {}",
            target.catalogue_id
        )));
    }
    if !(1990..=2100).contains(&utc.year()) {
        return Err(Error::InvalidInput(format!(
            "epoch {utc} outside supported era 1990-2100"
        )));
    }
    Ok(direction_unchecked(
        target.right_ascension_deg,
        target.declination_deg,
        utc,
        site,
    ))
}

pub(crate) fn direction_unchecked(ra_deg: f64, dec_deg: f64, utc: DateTime<Utc>, site: &GeodeticSite) -> StarDirection {
    let unit = equatorial_to_ecef(ra_deg, dec_deg, utc);
    let [east, north, up] = enu_basis(site);
    let azimuth_deg = unit.dot(&east).atan2(unit.dot(&north)).to_degrees().rem_euclid(360.0);
    let altitude_deg = unit.dot(&up).clamp(-1.0, 1.0).asin().to_degrees();
    StarDirection {
        unit,
        azimuth_deg,
        altitude_deg,
    }
}

/// Great-circle angle between two catalogue positions, degrees.
pub fn angular_separation(t1: &CelestialTarget, t2: &CelestialTarget) -> f64 {
    let (r1, d1) = (t1.right_ascension_deg.to_radians(), t1.declination_deg.to_radians());
    let (r2, d2) = (t2.right_ascension_deg.to_radians(), t2.declination_deg.to_radians());
    // haversine form, well conditioned near 0 and 180 degrees
    let h = ((d2 - d1) / 2.0).sin().powi(2) + d1.cos() * d2.cos() * ((r2 - r1) / 2.0).sin().powi(2);
    (2.0 * h.sqrt().clamp(0.0, 1.0).asin()).to_degrees()
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn target(id: &str, ra: f64, dec: f64) -> CelestialTarget {
        CelestialTarget::from_distance(id, ra, dec, 1000.0, 100.0, 6.0).unwrap()
    }

    fn alice() -> GeodeticSite {
        GeodeticSite::new("A", 48.21645, 16.354311, 215.0).unwrap()
    }

    fn bob() -> GeodeticSite {
        GeodeticSite::new("B", 48.23160, 16.3579553, 200.0).unwrap()
    }

    #[test]
    fn run1_alice_star_az_alt() {
        let t = Utc.with_ymd_and_hms(2016, 4, 21, 21, 23, 0).unwrap();
        let d = star_direction(&target("56127", 172.5787, -3.0035), t, &alice()).unwrap();
        assert!((d.azimuth_deg - 199.0).abs() < 1.0, "az {}", d.azimuth_deg);
        assert!((d.altitude_deg - 37.0).abs() < 1.0, "alt {}", d.altitude_deg);
    }

    #[test]
    fn run2_bob_star_az_alt() {
        let t = Utc.with_ymd_and_hms(2016, 4, 22, 0, 49, 0).unwrap();
        let d = star_direction(&target("2876", 9.1139, 60.3262), t, &bob()).unwrap();
        assert!((d.azimuth_deg - 25.0).abs() < 1.0, "az {}", d.azimuth_deg);
        assert!((d.altitude_deg - 26.0).abs() < 1.0, "alt {}", d.altitude_deg);
    }

    #[test]
    fn zenith_by_construction() {
        let site = alice();
        let t = Utc.with_ymd_and_hms(2020, 1, 1, 3, 0, 0).unwrap();
        // hour angle zero: RA equals local sidereal time
        let lst = gmst_deg(t) + site.longitude_deg;
        let d = star_direction(&target("z", lst.rem_euclid(360.0), site.latitude_deg), t, &site).unwrap();
        assert!((d.altitude_deg - 90.0).abs() < 0.5);
    }

    #[test]
    fn rejects_non_finite_and_out_of_era() {
        let mut t = target("x", 10.0, 10.0);
        let ok = Utc.with_ymd_and_hms(2016, 1, 1, 0, 0, 0).unwrap();
        assert!(star_direction(&t, Utc.with_ymd_and_hms(1980, 1, 1, 0, 0, 0).unwrap(), &alice()).is_err());
        t.declination_deg = f64::NAN;
        assert!(star_direction(&t, ok, &alice()).is_err());
    }

    #[test]
    fn separations() {
        let a = target("56127", 172.5787, -3.0035);
        let b = target("105259A", 319.8154, 58.6235);
        assert!((angular_separation(&a, &b) - 119.0).abs() < 1.0);
        let c = target("80620", 246.9311, -7.5976);
        let d = target("2876", 9.1139, 60.3262);
        assert!((angular_separation(&c, &d) - 112.0).abs() < 1.0);
        assert_eq!(angular_separation(&a, &a), 0.0);
    }

    #[test]
    fn gmst_reference_epoch() {
        // J2000.0 noon: 280.46061837 degrees
        let t = Utc.with_ymd_and_hms(2000, 1, 1, 12, 0, 0).unwrap();
        assert!((gmst_deg(t) - 280.460_618_37).abs() < 1e-6);
    }
}
