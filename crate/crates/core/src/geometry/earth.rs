use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use super::GeodeticSite;

const WGS84_A: f64 = 6_378_137.0;
const WGS84_F: f64 = 1.0 / 298.257_223_563;

/// Cartesian 3-vector (meters for positions, dimensionless for directions).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3(pub [f64; 3]);

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3([x, y, z])
    }

    pub fn dot(&self, other: &Vec3) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn normalized(&self) -> Vec3 {
        *self * (1.0 / self.norm())
    }

    pub fn x(&self) -> f64 {
        self.0[0]
    }
    pub fn y(&self) -> f64 {
        self.0[1]
    }
    pub fn z(&self) -> f64 {
        self.0[2]
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, k: f64) -> Vec3 {
        Vec3([self.0[0] * k, self.0[1] * k, self.0[2] * k])
    }
}

/// Earth-centered, Earth-fixed position of a site on the WGS-84 ellipsoid.
pub fn site_to_ecef(site: &GeodeticSite) -> Vec3 {
    let e2 = WGS84_F * (2.0 - WGS84_F);
    let lat = site.latitude_deg.to_radians();
    let lon = site.longitude_deg.to_radians();
    let h = site.elevation_m;
    let (slat, clat) = lat.sin_cos();
    let n = WGS84_A / (1.0 - e2 * slat * slat).sqrt();
    Vec3::new(
        (n + h) * clat * lon.cos(),
        (n + h) * clat * lon.sin(),
        (n * (1.0 - e2) + h) * slat,
    )
}

/// Local east/north/up unit vectors (geodetic normal) at a site, in ECEF.
pub fn enu_basis(site: &GeodeticSite) -> [Vec3; 3] {
    let lat = site.latitude_deg.to_radians();
    let lon = site.longitude_deg.to_radians();
    let (slat, clat) = lat.sin_cos();
    let (slon, clon) = lon.sin_cos();
    [
        Vec3::new(-slon, clon, 0.0),
        Vec3::new(-slat * clon, -slat * slon, clat),
        Vec3::new(clat * clon, clat * slon, slat),
    ]
}
