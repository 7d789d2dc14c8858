use std::path::PathBuf;

use cosmic_bell::spectra::{
    analyze_star, band_counts, blackbody, compose_input_spectrum, optimal_cutoff, optimal_cutoff_with, uniform_grid,
    wrong_way_fractions, ModelFiles, SettingReaderModel, SpectralCurve,
};
use proptest::prelude::*;

const HIP56127_TEMPERATURE_K: f64 = 3800.0;

fn fixture_model() -> SettingReaderModel {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/spectra");
    SettingReaderModel::load(&ModelFiles::in_dir(&dir)).unwrap()
}

fn run1_airmass() -> f64 {
    1.0 / 37.15f64.to_radians().sin()
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ *b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

#[test]
fn fixture_reader_matches_published_wrong_way_fractions() {
    let r = analyze_star(HIP56127_TEMPERATURE_K, run1_airmass(), &fixture_model(), 1.0).unwrap();
    assert!((r.cutoff_nm - 703.0).abs() <= 5.0, "{r:?}");
    assert!((r.f_red_to_blue - 0.0142).abs() <= 0.005, "{r:?}");
    assert!((r.f_blue_to_red - 0.0192).abs() <= 0.005, "{r:?}");
    assert!((r.efficiency - 0.25).abs() <= 0.05, "{r:?}");
}

#[test]
fn cutoff_is_global_minimum_of_objective() {
    let model = fixture_model();
    let grid = uniform_grid(350.0, 1150.0, 5.0);
    let star = blackbody(HIP56127_TEMPERATURE_K, &grid).unwrap();
    let n_in = compose_input_spectrum(&star, &model, 1.5).unwrap();
    let r = optimal_cutoff(&n_in, &model, &star).unwrap();
    let (blue, red) = (model.blue(&grid).unwrap(), model.red(&grid).unwrap());
    for &l in &grid[1..grid.len() - 1] {
        let obj = band_counts(&n_in, &blue, &red, l).unwrap().objective().unwrap();
        assert!(r.objective <= obj * (1.0 + 1e-12), "{l}: {obj} < {}", r.objective);
    }
}

#[test]
fn grid_refinement_is_stable() {
    let model = fixture_model();
    let x = run1_airmass();
    let at = |step: f64| {
        let g = uniform_grid(350.0, 1150.0, step);
        let star = blackbody(HIP56127_TEMPERATURE_K, &g).unwrap();
        let n_in = compose_input_spectrum(&star, &model, x).unwrap();
        wrong_way_fractions(&n_in, &model, 704.0).unwrap()
    };
    let (a1, b1) = at(1.0);
    let (a4, b4) = at(0.25);
    assert!((a1 - a4).abs() < 1e-4 && (b1 - b4).abs() < 1e-4, "{a1} {a4} {b1} {b4}");
}

#[test]
fn input_spectrum_regression_hash() {
    let model = fixture_model();
    let g = uniform_grid(350.0, 1150.0, 1.0);
    let star = blackbody(HIP56127_TEMPERATURE_K, &g).unwrap();
    let n_in = compose_input_spectrum(&star, &model, run1_airmass()).unwrap();
    let text: String = n_in.values().iter().map(|v| format!("{v:.6e}\n")).collect();
    assert_eq!(fnv1a(text.as_bytes()), GOLDEN_HASH, "{:x}", fnv1a(text.as_bytes()));
}

const GOLDEN_HASH: u64 = 0xe0ed_e2dc_297a_2f81;

fn smooth_reader(g: &[f64], edge: f64, width: f64, leak: f64) -> (SpectralCurve, SpectralCurve) {
    let s = |l: f64| 1.0 / (1.0 + ((l - edge) / width).exp());
    let blue = SpectralCurve::from_fn(g, |l| leak + (0.95 - leak) * s(l)).unwrap();
    let red = SpectralCurve::from_fn(g, |l| leak + (0.95 - leak) * (1.0 - s(l))).unwrap();
    (blue, red)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fractions_ignore_flux_normalization(t in 2500.0f64..12000.0, k in 1e-6f64..1e6, cut in 500.0f64..900.0) {
        let g = uniform_grid(350.0, 1150.0, 2.0);
        let (blue, red) = smooth_reader(&g, 700.0, 12.0, 1e-3);
        let star = blackbody(t, &g).unwrap();
        let a = band_counts(&star, &blue, &red, cut).unwrap();
        let b = band_counts(&star.scaled(k).unwrap(), &blue, &red, cut).unwrap();
        prop_assert!((a.f_red_to_blue().unwrap() - b.f_red_to_blue().unwrap()).abs() < 1e-12);
        prop_assert!((a.f_blue_to_red().unwrap() - b.f_blue_to_red().unwrap()).abs() < 1e-12);
    }

    #[test]
    fn mirrored_reader_swaps_fractions(t in 2500.0f64..12000.0, edge in 600.0f64..900.0, cut_k in 100usize..300) {
        let g = uniform_grid(350.0, 1150.0, 2.0);
        let (blue, red) = smooth_reader(&g, edge, 15.0, 1e-3);
        let star = blackbody(t, &g).unwrap();
        let flip = |c: &SpectralCurve| SpectralCurve::new(g.clone(), c.values().iter().rev().copied().collect()).unwrap();
        let cut = g[cut_k];
        let mirrored_cut = 350.0 + 1150.0 - cut;
        let a = band_counts(&star, &blue, &red, cut).unwrap();
        let b = band_counts(&flip(&star), &flip(&red), &flip(&blue), mirrored_cut).unwrap();
        prop_assert!((a.f_red_to_blue().unwrap() - b.f_blue_to_red().unwrap()).abs() < 1e-12);
        prop_assert!((a.f_blue_to_red().unwrap() - b.f_red_to_blue().unwrap()).abs() < 1e-12);
    }

    #[test]
    fn returned_cutoff_minimizes_objective(t in 2500.0f64..12000.0, edge in 500.0f64..1000.0, w in 3.0f64..40.0) {
        let g = uniform_grid(350.0, 1150.0, 10.0);
        let (blue, red) = smooth_reader(&g, edge, w, 5e-3);
        let star = blackbody(t, &g).unwrap();
        let r = optimal_cutoff_with(&star, &blue, &red, &star).unwrap();
        for &l in &g[1..g.len() - 1] {
            let obj = band_counts(&star, &blue, &red, l).unwrap().objective().unwrap();
            prop_assert!(r.objective <= obj * (1.0 + 1e-12));
        }
        prop_assert!(g.contains(&r.cutoff_nm));
        prop_assert!((0.0..=1.0).contains(&r.f_red_to_blue) && (0.0..=1.0).contains(&r.f_blue_to_red));
    }

    #[test]
    fn fourfold_refinement_changes_fractions_little(t in 3000.0f64..10000.0, edge in 600.0f64..800.0) {
        let at = |step: f64| {
            let g = uniform_grid(350.0, 1150.0, step);
            let (blue, red) = smooth_reader(&g, edge, 10.0, 1e-3);
            let star = blackbody(t, &g).unwrap();
            let c = band_counts(&star, &blue, &red, 700.0).unwrap();
            (c.f_red_to_blue().unwrap(), c.f_blue_to_red().unwrap())
        };
        let (a1, b1) = at(1.0);
        let (a4, b4) = at(0.25);
        prop_assert!((a1 - a4).abs() < 1e-3 && (b1 - b4).abs() < 1e-3);
    }
}
