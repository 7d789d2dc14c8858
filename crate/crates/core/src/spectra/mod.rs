//! Color setting-reader model: stellar spectrum through atmosphere, optics,
//! dichroic mirrors and detectors, and the resulting wrong-way fractions.
//!
//! The blue port sees the shortpass transmission `ρ_blue = ρ_T,s`; the red
//! port sees the shortpass reflection followed by the longpass transmission,
//! `ρ_red = ρ_R,s · ρ_T,l`. Photons redder than the cutoff `λ′` that land in
//! the blue port (and vice versa) produce wrong-way settings.

mod curve;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use curve::{common_grid, uniform_grid, SpectralCurve, GRID_MAX_NM, GRID_MIN_NM};

const PLANCK: f64 = 6.626_070_15e-34;
const BOLTZMANN: f64 = 1.380_649e-23;
const TRANSMISSION_FLOOR: f64 = 1e-12;

/// Planck photon number flux per unit wavelength, `2c/λ⁴ / (exp(hc/λkT) - 1)`,
/// in arbitrary units.
pub fn blackbody(temperature_k: f64, grid_nm: &[f64]) -> Result<SpectralCurve> {
    if !(temperature_k > 0.0 && temperature_k.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "temperature {temperature_k} K must be positive"
        )));
    }
    let c = crate::geometry::SPEED_OF_LIGHT;
    SpectralCurve::from_fn(grid_nm, |l_nm| {
        let l = l_nm * 1e-9;
        // scaled to keep magnitudes near unity; only ratios matter
        1e-30 * 2.0 * c / l.powi(4) / (PLANCK * c / (l * BOLTZMANN * temperature_k)).exp_m1()
    })
}

/// A curve raised to airmass `x`: `exp(-x τ)` with `τ = -ln T_zenith`.
#[derive(Debug, Clone, PartialEq)]
pub struct Attenuated {
    pub curve: SpectralCurve,
    /// Grid points with zero zenith transmission, floored at 1e-12.
    pub floored_points: usize,
}

pub fn apply_airmass(zenith: &SpectralCurve, airmass: f64) -> Result<Attenuated> {
    if !(airmass >= 1.0 && airmass.is_finite()) {
        return Err(Error::InvalidInput(format!("airmass {airmass} < 1")));
    }
    if let Some(v) = zenith.values().iter().find(|v| **v > 1.0) {
        return Err(Error::InvalidInput(format!("zenith transmission {v} exceeds 1")));
    }
    let floored_points = zenith.values().iter().filter(|v| **v < TRANSMISSION_FLOOR).count();
    let curve = zenith.map(|_, t| {
        let t = t.max(TRANSMISSION_FLOOR);
        if airmass == 1.0 {
            t
        } else {
            (airmass * t.ln()).exp()
        }
    })?;
    Ok(Attenuated { curve, floored_points })
}

/// File names of the response curves making up a [`SettingReaderModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFiles {
    pub shortpass_transmission: PathBuf,
    pub shortpass_reflection: PathBuf,
    pub longpass_transmission: PathBuf,
    pub lens: PathBuf,
    pub mirror: PathBuf,
    pub detector: PathBuf,
    pub atmosphere_zenith: PathBuf,
}

impl ModelFiles {
    /// The standard file names inside `dir`.
    pub fn in_dir(dir: &Path) -> Self {
        ModelFiles {
            shortpass_transmission: dir.join("shortpass_transmission.txt"),
            shortpass_reflection: dir.join("shortpass_reflection.txt"),
            longpass_transmission: dir.join("longpass_transmission.txt"),
            lens: dir.join("lens.txt"),
            mirror: dir.join("mirror.txt"),
            detector: dir.join("detector_qe.txt"),
            atmosphere_zenith: dir.join("atmosphere_zenith.txt"),
        }
    }

    /// Resolve relative paths against `base`.
    pub fn relative_to(&self, base: &Path) -> Self {
        let r = |p: &PathBuf| if p.is_absolute() { p.clone() } else { base.join(p) };
        ModelFiles {
            shortpass_transmission: r(&self.shortpass_transmission),
            shortpass_reflection: r(&self.shortpass_reflection),
            longpass_transmission: r(&self.longpass_transmission),
            lens: r(&self.lens),
            mirror: r(&self.mirror),
            detector: r(&self.detector),
            atmosphere_zenith: r(&self.atmosphere_zenith),
        }
    }
}

/// Optical response of one setting reader.
#[derive(Debug, Clone, PartialEq)]
pub struct SettingReaderModel {
    pub shortpass_transmission: SpectralCurve,
    pub shortpass_reflection: SpectralCurve,
    pub longpass_transmission: SpectralCurve,
    pub lens: SpectralCurve,
    pub mirror: SpectralCurve,
    pub detector: SpectralCurve,
    pub atmosphere_zenith: SpectralCurve,
}

impl SettingReaderModel {
    pub fn load(files: &ModelFiles) -> Result<Self> {
        let p = |path: &Path| -> Result<SpectralCurve> {
            let c = SpectralCurve::load(path)?;
            SpectralCurve::probability(c.wavelengths().to_vec(), c.values().to_vec())
                .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
        };
        Ok(SettingReaderModel {
            shortpass_transmission: p(&files.shortpass_transmission)?,
            shortpass_reflection: p(&files.shortpass_reflection)?,
            longpass_transmission: p(&files.longpass_transmission)?,
            lens: p(&files.lens)?,
            mirror: p(&files.mirror)?,
            detector: p(&files.detector)?,
            atmosphere_zenith: p(&files.atmosphere_zenith)?,
        })
    }

    /// A model with the given port responses and perfectly transparent
    /// optics, atmosphere and detectors.
    pub fn ideal_optics(blue: SpectralCurve, red: SpectralCurve) -> Result<Self> {
        let one = SpectralCurve::constant(blue.wavelengths(), 1.0)?;
        Ok(SettingReaderModel {
            shortpass_transmission: blue,
            shortpass_reflection: red,
            longpass_transmission: one.clone(),
            lens: one.clone(),
            mirror: one.clone(),
            detector: one.clone(),
            atmosphere_zenith: one,
        })
    }

    fn curves(&self) -> [&SpectralCurve; 7] {
        [
            &self.shortpass_transmission,
            &self.shortpass_reflection,
            &self.longpass_transmission,
            &self.lens,
            &self.mirror,
            &self.detector,
            &self.atmosphere_zenith,
        ]
    }

    pub fn blue(&self, grid: &[f64]) -> Result<SpectralCurve> {
        self.shortpass_transmission.resample(grid)
    }

    pub fn red(&self, grid: &[f64]) -> Result<SpectralCurve> {
        self.shortpass_reflection
            .resample(grid)?
            .product(&self.longpass_transmission.resample(grid)?)
    }
}

/// `N_in = N_star · ρ_atm,X · ρ_lens² · ρ_mirror · ρ_det` on the common grid of
/// the star curve and all model curves.
pub fn compose_input_spectrum(star: &SpectralCurve, model: &SettingReaderModel, airmass: f64) -> Result<SpectralCurve> {
    let mut all: Vec<&SpectralCurve> = model.curves().to_vec();
    all.push(star);
    let grid = common_grid(&all)?;
    let atm = apply_airmass(&model.atmosphere_zenith.resample(&grid)?, airmass)?.curve;
    let lens = model.lens.resample(&grid)?;
    star.resample(&grid)?
        .product(&atm)?
        .product(&lens)?
        .product(&lens)?
        .product(&model.mirror.resample(&grid)?)?
        .product(&model.detector.resample(&grid)?)
}

/// Photon counts sorted by band (relative to the cutoff) and port.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandCounts {
    pub red_to_blue: f64,
    pub red_to_red: f64,
    pub blue_to_red: f64,
    pub blue_to_blue: f64,
}

impl BandCounts {
    pub fn f_red_to_blue(&self) -> Result<f64> {
        let d = self.red_to_blue + self.red_to_red;
        if d > 0.0 {
            Ok(self.red_to_blue / d)
        } else {
            Err(Error::NoPhotonsInBand("red"))
        }
    }

    pub fn f_blue_to_red(&self) -> Result<f64> {
        let d = self.blue_to_red + self.blue_to_blue;
        if d > 0.0 {
            Ok(self.blue_to_red / d)
        } else {
            Err(Error::NoPhotonsInBand("blue"))
        }
    }

    /// Overall fraction of wrong settings.
    pub fn objective(&self) -> Option<f64> {
        let total = self.red_to_blue + self.red_to_red + self.blue_to_red + self.blue_to_blue;
        (total > 0.0).then(|| (self.red_to_blue + self.blue_to_red) / total)
    }
}

/// Port-weighted band integrals at an arbitrary cutoff inside the grid.
pub fn band_counts(
    n_in: &SpectralCurve,
    blue: &SpectralCurve,
    red: &SpectralCurve,
    cutoff_nm: f64,
) -> Result<BandCounts> {
    let (lo, hi) = n_in.support();
    if !(cutoff_nm >= lo && cutoff_nm <= hi) {
        return Err(Error::InvalidInput(format!(
            "cutoff {cutoff_nm} nm outside [{lo}, {hi}]"
        )));
    }
    let nb = n_in.product(&blue.resample(n_in.wavelengths())?)?;
    let nr = n_in.product(&red.resample(n_in.wavelengths())?)?;
    Ok(BandCounts {
        red_to_blue: nb.integral_between(cutoff_nm, hi),
        red_to_red: nr.integral_between(cutoff_nm, hi),
        blue_to_red: nr.integral_between(lo, cutoff_nm),
        blue_to_blue: nb.integral_between(lo, cutoff_nm),
    })
}

/// `(f_r→b, f_b→r)` for the model's ports at cutoff `λ′`.
pub fn wrong_way_fractions(n_in: &SpectralCurve, model: &SettingReaderModel, cutoff_nm: f64) -> Result<(f64, f64)> {
    let grid = n_in.wavelengths();
    let counts = band_counts(n_in, &model.blue(grid)?, &model.red(grid)?, cutoff_nm)?;
    Ok((counts.f_red_to_blue()?, counts.f_blue_to_red()?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WrongWayReport {
    pub cutoff_nm: f64,
    pub f_red_to_blue: f64,
    pub f_blue_to_red: f64,
    /// Overall wrong-setting fraction at the cutoff.
    pub objective: f64,
    /// Settings generated per photon arriving above the atmosphere.
    pub efficiency: f64,
}

/// Scan all interior grid points for the cutoff minimizing the overall
/// wrong-setting fraction. Ties go to the shortest wavelength.
pub fn optimal_cutoff_with(
    n_in: &SpectralCurve,
    blue: &SpectralCurve,
    red: &SpectralCurve,
    aperture: &SpectralCurve,
) -> Result<WrongWayReport> {
    let grid = n_in.wavelengths();
    let nb = n_in.product(&blue.resample(grid)?)?;
    let nr = n_in.product(&red.resample(grid)?)?;
    let (cb, cr) = (nb.cumulative(), nr.cumulative());
    let n = grid.len();
    let (total_b, total_r) = (cb[n - 1], cr[n - 1]);
    let mut best: Option<(f64, usize, BandCounts)> = None;
    for k in 0..n {
        let counts = BandCounts {
            red_to_blue: total_b - cb[k],
            red_to_red: total_r - cr[k],
            blue_to_red: cr[k],
            blue_to_blue: cb[k],
        };
        if counts.red_to_blue + counts.red_to_red <= 0.0 || counts.blue_to_red + counts.blue_to_blue <= 0.0 {
            continue;
        }
        let Some(obj) = counts.objective() else { continue };
        if best.as_ref().is_none_or(|(b, _, _)| obj < *b) {
            best = Some((obj, k, counts));
        }
    }
    let (objective, k, counts) = best.ok_or(Error::NoPhotonsInBand("red and blue"))?;
    let aperture_total = aperture.resample(grid)?.integral();
    let efficiency = if aperture_total > 0.0 {
        (total_b + total_r) / aperture_total
    } else {
        0.0
    };
    Ok(WrongWayReport {
        cutoff_nm: grid[k],
        f_red_to_blue: counts.f_red_to_blue()?,
        f_blue_to_red: counts.f_blue_to_red()?,
        objective,
        efficiency,
    })
}

/// [`optimal_cutoff_with`] using the model's ports; `aperture` is the
/// stellar photon flux before any losses.
pub fn optimal_cutoff(
    n_in: &SpectralCurve,
    model: &SettingReaderModel,
    aperture: &SpectralCurve,
) -> Result<WrongWayReport> {
    let grid = n_in.wavelengths();
    optimal_cutoff_with(n_in, &model.blue(grid)?, &model.red(grid)?, aperture)
}

/// Full reader analysis for a blackbody star at the given airmass.
pub fn analyze_star(
    temperature_k: f64,
    airmass: f64,
    model: &SettingReaderModel,
    step_nm: f64,
) -> Result<WrongWayReport> {
    let mut all: Vec<&SpectralCurve> = model.curves().to_vec();
    let probe = SpectralCurve::constant(&[GRID_MIN_NM, GRID_MAX_NM], 1.0)?;
    all.push(&probe);
    let g = common_grid(&all)?;
    let grid = uniform_grid(g[0], g[g.len() - 1], step_nm);
    let star = blackbody(temperature_k, &grid)?;
    let n_in = compose_input_spectrum(&star, model, airmass)?;
    optimal_cutoff(&n_in, model, &star)
}
