use serde::{Deserialize, Serialize};

/// Lookback time to the intersection of two stellar emission events' past
/// light cones, with its 1σ error (distance errors only).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lookback {
    pub years: f64,
    pub sigma_years: f64,
}

/// `d_a`, `d_b` in light-years (errors likewise), `alpha_deg` the angular
/// separation of the two stars.
pub fn lookback_intersection(d_a: f64, sigma_a: f64, d_b: f64, sigma_b: f64, alpha_deg: f64) -> Lookback {
    let cos_a = alpha_deg.to_radians().cos();
    let chord = (d_a * d_a + d_b * d_b - 2.0 * d_a * d_b * cos_a).max(0.0).sqrt();
    let t = 0.5 * (d_a + d_b + chord);
    let denom = 2.0 * t - d_a - d_b;
    let sigma = if denom > 0.0 {
        let term_a = sigma_a * (t - 0.5 * d_b * (1.0 + cos_a));
        let term_b = sigma_b * (t - 0.5 * d_a * (1.0 + cos_a));
        (term_a * term_a + term_b * term_b).sqrt() / denom
    } else {
        // coincident directions and distances: t = d, dt/dd_k = 1/2
        0.5 * sigma_a.hypot(sigma_b)
    };
    Lookback {
        years: t,
        sigma_years: sigma,
    }
}

/// Lookback to where a star's emission light cone re-crosses Earth's worldline.
pub fn earth_worldline_lookback(distance_ly: f64) -> f64 {
    2.0 * distance_ly
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fd_sigma(d_a: f64, s_a: f64, d_b: f64, s_b: f64, alpha: f64) -> f64 {
        let f = |x: f64, y: f64| lookback_intersection(x, 0.0, y, 0.0, alpha).years;
        let h = 1e-3;
        let ga = (f(d_a + h, d_b) - f(d_a - h, d_b)) / (2.0 * h);
        let gb = (f(d_a, d_b + h) - f(d_a, d_b - h)) / (2.0 * h);
        (ga * s_a).hypot(gb * s_b)
    }

    #[test]
    fn published_pairs() {
        let r1 = lookback_intersection(604.0, 35.0, 1930.0, 605.0, 119.0);
        assert!(
            (r1.years - 2409.0).abs() < 1.0 && (r1.sigma_years - 598.0).abs() < 2.0,
            "{r1:?}"
        );
        let r2 = lookback_intersection(577.0, 40.0, 3624.0, 1370.0, 112.0);
        assert!(
            (r2.years - 4040.0).abs() < 1.0 && (r2.sigma_years - 1363.0).abs() < 2.0,
            "{r2:?}"
        );
    }

    #[test]
    fn degenerate_geometries() {
        assert_eq!(lookback_intersection(100.0, 0.0, 100.0, 0.0, 180.0).years, 200.0);
        assert!((lookback_intersection(100.0, 0.0, 100.0, 0.0, 0.0).years - 100.0).abs() < 1e-12);
        assert_eq!(earth_worldline_lookback(604.0), 1208.0);
    }

    #[test]
    fn error_formula_matches_finite_differences_on_published_inputs() {
        for (da, sa, db, sb, al) in [
            (604.0, 35.0, 1930.0, 605.0, 119.0),
            (577.0, 40.0, 3624.0, 1370.0, 112.0),
        ] {
            let analytic = lookback_intersection(da, sa, db, sb, al).sigma_years;
            let numeric = fd_sigma(da, sa, db, sb, al);
            assert!((analytic / numeric - 1.0).abs() < 0.01);
        }
    }

    proptest! {
        #[test]
        fn bounded_below_by_farther_star(d_a in 1.0f64..5000.0, d_b in 1.0f64..5000.0, alpha in 0.0f64..180.0) {
            let t = lookback_intersection(d_a, 0.0, d_b, 0.0, alpha).years;
            prop_assert!(t >= d_a.max(d_b) * (1.0 - 1e-12));
        }

        #[test]
        fn monotone_in_separation(d_a in 1.0f64..5000.0, d_b in 1.0f64..5000.0, a1 in 0.0f64..180.0, a2 in 0.0f64..180.0) {
            let (lo, hi) = if a1 <= a2 { (a1, a2) } else { (a2, a1) };
            let t_lo = lookback_intersection(d_a, 0.0, d_b, 0.0, lo).years;
            let t_hi = lookback_intersection(d_a, 0.0, d_b, 0.0, hi).years;
            prop_assert!(t_hi >= t_lo - 1e-9 * t_hi);
        }

        #[test]
        fn equality_only_for_coincident_stars(d in 1.0f64..5000.0, delta in 1.0f64..100.0, alpha in 1.0f64..180.0) {
            prop_assert!(lookback_intersection(d, 0.0, d + delta, 0.0, 0.0).years > d);
            prop_assert!(lookback_intersection(d, 0.0, d, 0.0, alpha).years > d);
        }
    }
}
