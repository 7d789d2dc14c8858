//! Hipparcos-style catalogue ingestion, candidate filtering and pair ranking.

use std::cmp::Ordering;
use std::io::Read;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, RowDiagnostic};
use crate::geometry::{
    airmass, angular_separation, lookback_intersection, star_direction, tau_used, tau_valid, CelestialTarget, Lookback,
    RunWindow, SiteLayout, TimingBudget, LY_PER_INVERSE_MAS,
};
use crate::Side;

const COLUMNS: [&str; 6] = ["hip", "ra_deg", "dec_deg", "plx_mas", "e_plx_mas", "hp_mag"];

/// Naive inverse-parallax distance in light-years with first-order error.
pub fn parallax_to_distance(parallax_mas: f64, parallax_error_mas: f64) -> Result<(f64, f64)> {
    if !(parallax_mas > 0.0) || !parallax_mas.is_finite() {
        return Err(Error::NonpositiveParallax(parallax_mas));
    }
    let d = LY_PER_INVERSE_MAS / parallax_mas;
    Ok((d, d * parallax_error_mas.abs() / parallax_mas))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogueRecord {
    pub hip_id: String,
    pub ra_deg: f64,
    pub dec_deg: f64,
    pub parallax_mas: f64,
    pub parallax_error_mas: f64,
    pub hp_magnitude: f64,
}

impl CatalogueRecord {
    pub fn distance_ly(&self) -> (f64, f64) {
        parallax_to_distance(self.parallax_mas, self.parallax_error_mas).unwrap_or((f64::NAN, f64::NAN))
    }

    pub fn fractional_distance_error(&self) -> f64 {
        self.parallax_error_mas / self.parallax_mas
    }

    pub fn target(&self) -> Result<CelestialTarget> {
        CelestialTarget::from_parallax(
            self.hip_id.clone(),
            self.ra_deg,
            self.dec_deg,
            self.parallax_mas,
            self.parallax_error_mas,
            self.hp_magnitude,
        )
    }

    fn check(&self) -> Result<()> {
        let fields = [
            self.ra_deg,
            self.dec_deg,
            self.parallax_mas,
            self.parallax_error_mas,
            self.hp_magnitude,
        ];
        if fields.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite field".into()));
        }
        if self.parallax_mas <= 0.0 {
            return Err(Error::NonpositiveParallax(self.parallax_mas));
        }
        if self.parallax_error_mas < 0.0 {
            return Err(Error::InvalidInput("negative parallax error".into()));
        }
        if self.dec_deg.abs() > 90.0 {
            return Err(Error::InvalidInput(format!(
                "declination {} out of range",
                self.dec_deg
            )));
        }
        Ok(())
    }
}

/// Records that parsed cleanly plus diagnostics for those that did not.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParsedCatalogue {
    pub records: Vec<CatalogueRecord>,
    pub diagnostics: Vec<RowDiagnostic>,
}

/// Parse a delimited catalogue with header `hip,ra_deg,dec_deg,plx_mas,e_plx_mas,hp_mag`
/// (any column order, extra columns ignored, `#` comment lines skipped).
///
/// Malformed rows fail the whole parse unless `lenient`, in which case they
/// are skipped and reported in [`ParsedCatalogue::diagnostics`].
pub fn parse_catalogue<R: Read>(input: R, lenient: bool) -> Result<ParsedCatalogue> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(input);
    let header = reader.headers()?.clone();
    let mut idx = [0usize; 6];
    for (k, name) in COLUMNS.iter().enumerate() {
        idx[k] = header
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::MissingColumn((*name).to_string()))?;
    }

    let mut out = ParsedCatalogue::default();
    for row in reader.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let field = |k: usize| row.get(idx[k]).unwrap_or("");
        let number = |k: usize| -> Result<f64, String> {
            field(k)
                .parse::<f64>()
                .map_err(|_| format!("column `{}`: cannot parse `{}`", COLUMNS[k], field(k)))
        };
        let parsed = (|| -> Result<CatalogueRecord, String> {
            let hip_id = field(0).to_string();
            if hip_id.is_empty() {
                return Err("empty hip id".into());
            }
            let rec = CatalogueRecord {
                hip_id,
                ra_deg: number(1)?,
                dec_deg: number(2)?,
                parallax_mas: number(3)?,
                parallax_error_mas: number(4)?,
                hp_magnitude: number(5)?,
            };
            rec.check().map_err(|e| e.to_string())?;
            Ok(rec)
        })();
        match parsed {
            Ok(rec) => out.records.push(rec),
            Err(message) => out.diagnostics.push(RowDiagnostic { line, message }),
        }
    }
    if !lenient && !out.diagnostics.is_empty() {
        return Err(Error::MalformedRows(out.diagnostics));
    }
    Ok(out)
}

/// Rectangular azimuth/altitude box. An azimuth range with `lo > hi` wraps
/// through north.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SkyWindow {
    pub azimuth_deg: [f64; 2],
    pub altitude_deg: [f64; 2],
}

impl Default for SkyWindow {
    fn default() -> Self {
        SkyWindow {
            azimuth_deg: [0.0, 360.0],
            altitude_deg: [0.0, 90.0],
        }
    }
}

impl SkyWindow {
    /// Box centred on a pointing with the given half-widths.
    pub fn around(azimuth_deg: f64, altitude_deg: f64, half_width_deg: f64) -> Self {
        SkyWindow {
            azimuth_deg: [
                (azimuth_deg - half_width_deg).rem_euclid(360.0),
                (azimuth_deg + half_width_deg).rem_euclid(360.0),
            ],
            altitude_deg: [altitude_deg - half_width_deg, altitude_deg + half_width_deg],
        }
    }

    pub fn contains(&self, azimuth_deg: f64, altitude_deg: f64) -> bool {
        let [alt_lo, alt_hi] = self.altitude_deg;
        if !(altitude_deg >= alt_lo && altitude_deg <= alt_hi && altitude_deg > 0.0) {
            return false;
        }
        let [lo, hi] = self.azimuth_deg;
        if hi - lo >= 360.0 {
            return true;
        }
        let az = azimuth_deg.rem_euclid(360.0);
        if lo <= hi {
            az >= lo && az <= hi
        } else {
            az >= lo || az <= hi
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScoreWeights {
    pub brightness: f64,
    pub distance: f64,
    pub visibility: f64,
    pub tau_valid: f64,
    pub inverse_airmass: f64,
}

impl Default for ScoreWeights {
    fn default() -> Self {
        ScoreWeights {
            brightness: 1.0,
            distance: 1.0,
            visibility: 1.0,
            tau_valid: 1.0,
            inverse_airmass: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SelectionCriteria {
    pub min_distance_ly: f64,
    pub max_fractional_distance_error: f64,
    pub magnitude_range: [f64; 2],
    pub window_a: SkyWindow,
    pub window_b: SkyWindow,
    /// Minimum time inside the sky window, seconds.
    pub min_visible_s: f64,
    pub step_s: f64,
    pub weights: ScoreWeights,
}

impl Default for SelectionCriteria {
    fn default() -> Self {
        SelectionCriteria {
            min_distance_ly: 500.0,
            max_fractional_distance_error: 0.5,
            magnitude_range: [5.0, 9.0],
            window_a: SkyWindow::default(),
            window_b: SkyWindow::default(),
            min_visible_s: 0.0,
            step_s: 10.0,
            weights: ScoreWeights::default(),
        }
    }
}

impl SelectionCriteria {
    pub fn window(&self, side: Side) -> &SkyWindow {
        match side {
            Side::A => &self.window_a,
            Side::B => &self.window_b,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let [m_lo, m_hi] = self.magnitude_range;
        let nonempty = |r: [f64; 2]| r[0] <= r[1];
        if !(self.min_distance_ly > 0.0) {
            return Err(Error::InvalidInput("min_distance_ly must be positive".into()));
        }
        if !(m_lo <= m_hi) || !nonempty(self.window_a.altitude_deg) || !nonempty(self.window_b.altitude_deg) {
            return Err(Error::InvalidInput("selection ranges must be non-empty".into()));
        }
        if !(self.step_s > 0.0) {
            return Err(Error::InvalidInput("selection step must be positive".into()));
        }
        Ok(())
    }

    /// Distance, distance-error and magnitude filters.
    pub fn passes_static(&self, rec: &CatalogueRecord) -> bool {
        let (d, _) = rec.distance_ly();
        d > self.min_distance_ly
            && rec.fractional_distance_error() < self.max_fractional_distance_error
            && rec.hp_magnitude >= self.magnitude_range[0]
            && rec.hp_magnitude <= self.magnitude_range[1]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedCandidate {
    pub record: CatalogueRecord,
    pub side: Side,
    pub visibility_duration_s: f64,
    pub min_tau_valid_s: f64,
    pub airmass_at_mid: f64,
    pub score: f64,
}

/// Score from the candidate's own features, each mapped to [0, 1].
pub fn candidate_score(
    record: &CatalogueRecord,
    visibility_fraction: f64,
    min_tau_valid_s: f64,
    airmass_at_mid: f64,
    criteria: &SelectionCriteria,
) -> f64 {
    let w = &criteria.weights;
    let [m_lo, m_hi] = criteria.magnitude_range;
    let brightness = if m_hi > m_lo {
        ((m_hi - record.hp_magnitude) / (m_hi - m_lo)).clamp(0.0, 1.0)
    } else {
        1.0
    };
    let (d, _) = record.distance_ly();
    let distance = (1.0 - criteria.min_distance_ly / d).clamp(0.0, 1.0);
    // saturating map of the validity time with a 1 μs scale
    let tau = if min_tau_valid_s > 0.0 {
        min_tau_valid_s / (min_tau_valid_s + 1e-6)
    } else {
        0.0
    };
    let inv_x = if airmass_at_mid.is_finite() && airmass_at_mid > 0.0 {
        1.0 / airmass_at_mid
    } else {
        0.0
    };
    let total = w.brightness + w.distance + w.visibility + w.tau_valid + w.inverse_airmass;
    if total <= 0.0 {
        return 0.0;
    }
    (w.brightness * brightness
        + w.distance * distance
        + w.visibility * visibility_fraction.clamp(0.0, 1.0)
        + w.tau_valid * tau
        + w.inverse_airmass * inv_x)
        / total
}

/// Filter and score the records visible from `side` during the window.
pub fn select_candidates(
    records: &[CatalogueRecord],
    criteria: &SelectionCriteria,
    layout: &SiteLayout,
    side: Side,
    budget: &TimingBudget,
    window: &RunWindow,
) -> Result<Vec<RankedCandidate>> {
    criteria.validate()?;
    let site = layout.site(side);
    let offsets = window.offsets(criteria.step_s);
    let sample_s = if offsets.len() > 1 {
        window.duration_s / (offsets.len() - 1) as f64
    } else {
        window.duration_s
    };
    let sky = criteria.window(side);
    let results: Vec<Option<RankedCandidate>> = records
        .par_iter()
        .map(|rec| -> Result<Option<RankedCandidate>> {
            if !criteria.passes_static(rec) {
                return Ok(None);
            }
            let target = rec.target()?;
            let mut visible = 0usize;
            let mut min_tau = f64::INFINITY;
            for &off in &offsets {
                let dir = star_direction(&target, window.at(off), site)?;
                if sky.contains(dir.azimuth_deg, dir.altitude_deg) {
                    visible += 1;
                }
                min_tau = min_tau.min(tau_valid(layout, side, dir.unit, budget));
            }
            let visible_s = if offsets.len() > 1 {
                (visible.saturating_sub(1)) as f64 * sample_s
            } else {
                visible as f64 * window.duration_s
            };
            if visible == 0 || visible_s < criteria.min_visible_s {
                return Ok(None);
            }
            let mid = star_direction(&target, window.mid(), site)?;
            let x = airmass(mid.altitude_deg).unwrap_or(f64::INFINITY);
            let fraction = visible as f64 / offsets.len() as f64;
            Ok(Some(RankedCandidate {
                score: candidate_score(rec, fraction, min_tau, x, criteria),
                record: rec.clone(),
                side,
                visibility_duration_s: visible_s,
                min_tau_valid_s: min_tau,
                airmass_at_mid: x,
            }))
        })
        .collect::<Result<_>>()?;
    Ok(results.into_iter().flatten().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedPair {
    pub hip_a: String,
    pub hip_b: String,
    pub score: f64,
    pub min_tau_valid_a_s: f64,
    pub min_tau_valid_b_s: f64,
    pub tau_used_a_s: Option<f64>,
    pub tau_used_b_s: Option<f64>,
    pub separation_deg: f64,
    pub lookback: Lookback,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PairRanking {
    pub pairs: Vec<RankedPair>,
    /// Pairs excluded because some side's validity time is not positive.
    pub causally_misaligned: Vec<(String, String)>,
}

/// Catalogue ids order numerically on their leading digits, then lexically.
pub fn compare_ids(a: &str, b: &str) -> Ordering {
    let split = |s: &str| {
        let digits = s.chars().take_while(|c| c.is_ascii_digit()).count();
        let n = s[..digits].parse::<u64>().ok();
        (n, s[digits..].to_string())
    };
    let (na, ra) = split(a);
    let (nb, rb) = split(b);
    match (na, nb) {
        (Some(x), Some(y)) => x.cmp(&y).then_with(|| ra.cmp(&rb)),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => a.cmp(b),
    }
}

/// Form all A×B pairs, drop causally misaligned ones, order by descending score.
pub fn rank_pairs(
    candidates_a: &[RankedCandidate],
    candidates_b: &[RankedCandidate],
    budget: &TimingBudget,
) -> PairRanking {
    let mut ranking = PairRanking::default();
    for a in candidates_a {
        for b in candidates_b {
            if a.record.hip_id == b.record.hip_id {
                continue;
            }
            if a.min_tau_valid_s <= 0.0 || b.min_tau_valid_s <= 0.0 {
                ranking
                    .causally_misaligned
                    .push((a.record.hip_id.clone(), b.record.hip_id.clone()));
                continue;
            }
            let (da, sa) = a.record.distance_ly();
            let (db, sb) = b.record.distance_ly();
            let (Ok(ta), Ok(tb)) = (a.record.target(), b.record.target()) else {
                continue;
            };
            let sep = angular_separation(&ta, &tb);
            ranking.pairs.push(RankedPair {
                hip_a: a.record.hip_id.clone(),
                hip_b: b.record.hip_id.clone(),
                score: 0.5 * (a.score + b.score),
                min_tau_valid_a_s: a.min_tau_valid_s,
                min_tau_valid_b_s: b.min_tau_valid_s,
                tau_used_a_s: tau_used(a.min_tau_valid_s, budget, Side::A).ok(),
                tau_used_b_s: tau_used(b.min_tau_valid_s, budget, Side::B).ok(),
                separation_deg: sep,
                lookback: lookback_intersection(da, sa, db, sb, sep),
            });
        }
    }
    ranking.pairs.sort_by(|x, y| {
        y.score
            .total_cmp(&x.score)
            .then_with(|| compare_ids(&x.hip_a, &y.hip_a))
            .then_with(|| compare_ids(&x.hip_b, &y.hip_b))
    });
    ranking
}
