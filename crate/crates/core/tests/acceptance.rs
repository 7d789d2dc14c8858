//! Acceptance harness: one PASS/FAIL line per criterion, nonzero exit on
//! any failure. Tolerances are pinned here.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

mod common;

use std::process::ExitCode;
use std::time::Instant;

use cosmic_bell::bellstats::*;
use cosmic_bell::geometry::{
    angular_separation, atmospheric_delay, lookback_intersection, tau_used, validity_times, TimingBudget,
};
use cosmic_bell::simulate::{simulate_run, synthesize_from_tables, SimulationConfig};
use cosmic_bell::spectra::{
    analyze_star, blackbody, compose_input_spectrum, optimal_cutoff, uniform_grid, wrong_way_fractions, ModelFiles,
    SettingReaderModel, SpectralCurve,
};
use cosmic_bell::timetag::*;
use cosmic_bell::Side;

#[derive(Default)]
struct Check {
    failures: Vec<String>,
    count: usize,
}

impl Check {
    fn near(&mut self, what: &str, got: f64, want: f64, tol: f64) {
        self.count += 1;
        if !((got - want).abs() <= tol) {
            self.failures.push(format!("{what} = {got:.6} (want {want} ± {tol})"));
        }
    }

    fn rel(&mut self, what: &str, got: f64, want: f64, tol: f64) {
        self.count += 1;
        if !((got / want - 1.0).abs() <= tol) {
            self.failures
                .push(format!("{what} = {got:.6e} (want {want:e} ± {:.1}%)", tol * 100.0));
        }
    }

    fn factor(&mut self, what: &str, got: f64, want: f64, k: f64) {
        self.count += 1;
        if !(got >= want / k && got <= want * k) {
            self.failures
                .push(format!("{what} = {got:.3e} (want {want:e} within ×/÷{k})"));
        }
    }

    fn holds(&mut self, what: &str, ok: bool) {
        self.count += 1;
        if !ok {
            self.failures.push(what.to_string());
        }
    }
}

fn reports() -> [AnalysisReport; 2] {
    [
        common::run_tables(1).analyze().unwrap(),
        common::run_tables(2).analyze().unwrap(),
    ]
}

fn chsh_values(c: &mut Check, r: &[AnalysisReport; 2]) {
    c.near("run1 C", r[0].chsh.c, 0.2125, 5e-4);
    c.near("run1 S", r[0].chsh.s, 2.425, 5e-4);
    c.near("run2 C", r[1].chsh.c, 0.2509, 5e-4);
    c.near("run2 S", r[1].chsh.s, 2.502, 5e-4);
}

fn independence(c: &mut Check, r: &[AnalysisReport; 2]) {
    c.near("run1 chi2", r[0].chi2.chi2, 1.132, 5e-4);
    c.near("run1 p", r[0].chi2.p_value, 0.287, 0.002);
    c.near("run2 chi2", r[1].chi2.chi2, 1.158, 5e-4);
    c.near("run2 p", r[1].chi2.p_value, 0.282, 0.002);
}

fn predictability_tables(c: &mut Check, r: &[AnalysisReport; 2]) {
    let eps = [
        [0.13521, 0.07645, 0.17791, 0.11915],
        [0.10533, 0.08917, 0.16094, 0.14477],
    ];
    let sig = [
        [6.92e-3, 3.44e-3, 8.24e-3, 5.65e-3],
        [4.30e-3, 3.72e-3, 6.08e-3, 5.68e-3],
    ];
    for run in 0..2 {
        let p = &r[run].predictability;
        for k in 0..4 {
            c.near(&format!("run{} eps[{k}]", run + 1), p.eps_ij[k], eps[run][k], 3e-4);
            c.rel(
                &format!("run{} sigma_eps[{k}]", run + 1),
                p.sigma_eps_ij[k],
                sig[run][k],
                0.1,
            );
        }
    }
    c.near("run1 eps", r[0].predictability.eps, 0.1779, 3e-4);
    c.near("run2 eps", r[1].predictability.eps, 0.1609, 3e-4);
}

fn significance_chain(c: &mut Check, r: &[AnalysisReport; 2]) {
    struct Ref {
        w: f64,
        w_exp: f64,
        sigma_w: f64,
        f: [f64; 4],
        nu_bar: f64,
        delta_nu: f64,
        nu: f64,
        p: f64,
    }
    let refs = [
        Ref {
            w: 5.0249e5,
            w_exp: 4.8954e5,
            sigma_w: 954.3,
            f: [0.376, 0.0, 0.483, 0.141],
            nu_bar: 13.57,
            delta_nu: 0.799,
            nu: 7.54,
            p: 4.64e-14,
        },
        Ref {
            w: 3.3030e5,
            w_exp: 3.1754e5,
            sigma_w: 682.6,
            f: [0.101, 0.062, 0.428, 0.409],
            nu_bar: 18.71,
            delta_nu: 0.540,
            nu: 12.15,
            p: 5.93e-34,
        },
    ];
    for (run, want) in refs.iter().enumerate() {
        let s = &r[run].significance;
        let tag = |x: &str| format!("run{} {x}", run + 1);
        c.rel(&tag("W"), s.w, want.w, 3e-3);
        c.rel(&tag("<W>"), s.w_expected, want.w_exp, 3e-3);
        c.rel(&tag("sigma_W"), s.sigma_w, want.sigma_w, 0.01);
        for k in 0..4 {
            c.near(&tag(&format!("f_opt[{k}]")), s.f_opt[k], want.f[k], 0.003);
        }
        c.near(&tag("nu_bar"), s.nu_bar, want.nu_bar, 0.1);
        c.near(&tag("delta_nu"), s.delta_nu, want.delta_nu, 0.01);
        c.near(&tag("nu"), s.nu_n, want.nu, 0.05);
        c.factor(&tag("p"), s.p, want.p, 2.0);
    }
}

fn memory(c: &mut Check, r: &[AnalysisReport; 2]) {
    let want = [(0.7393, 1.78e-13, 7.31), (0.8500, 3.96e-33, 11.93)];
    for (run, (b, p, nu)) in want.into_iter().enumerate() {
        let tag = |x: &str| format!("run{} {x}", run + 1);
        c.near(&tag("B"), r[run].memory.b, b, 0.002);
        c.holds(&tag("B maximal at n = 1"), r[run].memory.n_at_max == 1);
        c.factor(&tag("p_mem"), r[run].significance.p_mem, p, 2.0);
        c.near(&tag("nu_mem"), r[run].significance.nu_mem, nu, 0.05);
    }
}

fn no_signaling_check(c: &mut Check, r: &[AnalysisReport; 2]) {
    let ns = r[0].no_signaling.as_ref().unwrap();
    let pa = [0.4965, 0.4977, 0.5011, 0.4994];
    let pb = [0.5391, 0.5386, 0.5669, 0.5671];
    let pv = [0.211, 0.177, 0.532, 0.654];
    for k in 0..4 {
        c.near(&format!("run1 P(A+)[{k}]"), ns.p_a_plus[k], pa[k], 5e-4);
        c.near(&format!("run1 P(B+)[{k}]"), ns.p_b_plus[k], pb[k], 5e-4);
        c.near(&format!("run1 z-test p[{k}]"), ns.tests[k].p_value, pv[k], 0.01);
    }
    // run-2 singles are unpublished: synthesized signaling-free singles must
    // survive the stream round trip and pass the same tests
    let t = common::run_tables(2);
    let table = t.coincidences;
    let mut singles = SinglesTable::default();
    for i in 0..2 {
        for j in 0..2 {
            // marginals fixed by the local setting alone: P(+) = 0.48 + 0.04 * setting
            let m = 4 * table.n_ij(i, j);
            let a_plus = (m as f64 * (0.48 + 0.04 * i as f64)).round() as u64;
            let b_plus = (m as f64 * (0.48 + 0.04 * j as f64)).round() as u64;
            singles.a[i][j] = [a_plus, m - a_plus];
            singles.b[j][i] = [b_plus, m - b_plus];
        }
    }
    let params = StreamParams::default();
    let round_trip = synthesize_from_tables(&table, Some(&singles), &params).and_then(|s| analyze_streams(&s, &params));
    match round_trip {
        Ok(out) => {
            c.holds(
                "run2 synthesized singles round trip",
                out.singles == singles && out.coincidences == table,
            );
            let ns = no_signaling(&out.singles).unwrap();
            c.holds("run2 synthesized singles pass z-tests", ns.min_p_value() > 0.01);
        }
        Err(e) => c.holds(&format!("run2 synthesis: {e}"), false),
    }
}

fn geometry(c: &mut Check) {
    for (run, want) in [(1, [2.55e-6, 6.93e-6]), (2, [2.58e-6, 6.85e-6])] {
        let cfg = common::run_config(run);
        let (sa, sb) = cfg.targets().unwrap();
        let (a, b) = validity_times(&cfg.layout().unwrap(), &sa, &sb, &cfg.budget, &cfg.window, 1.0).unwrap();
        c.near(
            &format!("run{run} min tau_valid A (us)"),
            a.min_tau_valid_s * 1e6,
            want[0] * 1e6,
            0.05,
        );
        c.near(
            &format!("run{run} min tau_valid B (us)"),
            b.min_tau_valid_s * 1e6,
            want[1] * 1e6,
            0.05,
        );
    }
    let budget = TimingBudget::default();
    c.near(
        "tau_used A (us)",
        tau_used(2.55e-6, &budget, Side::A).unwrap() * 1e6,
        2.00,
        1e-9,
    );
    c.near(
        "tau_used B (us)",
        tau_used(6.93e-6, &budget, Side::B).unwrap() * 1e6,
        5.00,
        1e-9,
    );
    c.near(
        "atmospheric delay (ns)",
        atmospheric_delay(200.0, 2.5, 8000.0, 2.7e-4) * 1e9,
        17.6,
        0.1,
    );
    for (run, want) in [(1, (2409.0, 598.0)), (2, (4040.0, 1363.0))] {
        let (sa, sb) = common::run_config(run).targets().unwrap();
        let l = lookback_intersection(
            sa.distance_ly,
            sa.distance_error_ly,
            sb.distance_ly,
            sb.distance_error_ly,
            angular_separation(&sa, &sb),
        );
        c.near(&format!("run{run} lookback (yr)"), l.years, want.0, 2.0);
        c.near(&format!("run{run} lookback sigma (yr)"), l.sigma_years, want.1, 5.0);
    }
}

fn spectra(c: &mut Check) {
    let g = uniform_grid(350.0, 1150.0, 1.0);
    let blue = SpectralCurve::from_fn(&g, |l| if l < 700.0 { 1.0 } else { 0.0 }).unwrap();
    let red = SpectralCurve::from_fn(&g, |l| if l > 700.0 { 1.0 } else { 0.0 }).unwrap();
    let ideal = SettingReaderModel::ideal_optics(blue, red).unwrap();
    let star = blackbody(5000.0, &g).unwrap();
    let n_in = compose_input_spectrum(&star, &ideal, 1.0).unwrap();
    c.holds(
        "step dichroics give f = (0, 0)",
        wrong_way_fractions(&n_in, &ideal, 700.0).unwrap() == (0.0, 0.0),
    );
    c.holds(
        "step dichroics give exact cutoff",
        optimal_cutoff(&n_in, &ideal, &star).unwrap().cutoff_nm == 700.0,
    );

    let model = SettingReaderModel::load(&ModelFiles::in_dir(&common::fixtures().join("spectra"))).unwrap();
    let x = 1.0 / 37.15f64.to_radians().sin();
    let r = analyze_star(3800.0, x, &model, 1.0).unwrap();
    c.near("lambda' (nm)", r.cutoff_nm, 703.0, 5.0);
    c.near("f_r->b", r.f_red_to_blue, 0.0142, 0.005);
    c.near("f_b->r", r.f_blue_to_red, 0.0192, 0.005);
    let at = |step: f64| {
        let g = uniform_grid(350.0, 1150.0, step);
        let n_in = compose_input_spectrum(&blackbody(3800.0, &g).unwrap(), &model, x).unwrap();
        wrong_way_fractions(&n_in, &model, r.cutoff_nm).unwrap()
    };
    let (coarse, fine) = (at(1.0), at(0.25));
    c.near("grid refinement f_r->b", coarse.0, fine.0, 1e-3);
    c.near("grid refinement f_b->r", coarse.1, fine.1, 1e-3);
}

fn pipeline(c: &mut Check) {
    // matcher against the quadratic oracle
    for seed in 0..3 {
        let cfg = SimulationConfig {
            seed,
            duration_s: 0.02,
            pair_rate_hz: 2.5e5,
            jitter_ps: 1500.0,
            block_s: 0.01,
            ..SimulationConfig::default()
        };
        let run = simulate_run(&cfg).unwrap();
        let p = cfg.stream_params();
        let gated = |side: Side| {
            let (o, s) = split_channels(run.streams.side(side));
            gate_settings(&o, &SettingTrack::new(side, &s, &p.ports, None), p.tau_used_ps(side)).gated
        };
        let (ga, gb) = (gated(Side::A), gated(Side::B));
        c.holds(
            "matcher sample size ≤ 1e4 per side",
            ga.len() <= 10_000 && gb.len() <= 10_000,
        );
        c.holds(
            &format!("matcher ≡ oracle (seed {seed})"),
            match_coincidences(&ga, &gb, p.window_ps, &p.fixed_drift)
                == brute_force_coincidences(&ga, &gb, p.window_ps, &p.fixed_drift),
        );
    }
    // closed loop at V = 1 and V = 0
    for (v, want) in [(1.0, 2.0 * std::f64::consts::SQRT_2), (0.0, 0.0)] {
        let cfg = SimulationConfig {
            seed: 11,
            pair_rate_hz: 2.5e5,
            visibility: v,
            block_s: 0.1,
            ..SimulationConfig::default()
        };
        let out = analyze_streams(&simulate_run(&cfg).unwrap().streams, &cfg.stream_params()).unwrap();
        let e = chsh(&out.coincidences).unwrap().correlators;
        // S in the sign convention of the default angles
        let s = -(e[0] + e[1] + e[2] - e[3]);
        c.near(&format!("closed-loop S at V = {v}"), s, want, 0.02);
    }
    // drift recovery
    let cfg = SimulationConfig {
        seed: 5,
        duration_s: 2.0,
        pair_rate_hz: 5e4,
        drift_offset_ps: 1500.0,
        drift_ps_per_s: 2000.0,
        jitter_ps: 300.0,
        ..SimulationConfig::default()
    };
    let run = simulate_run(&cfg).unwrap();
    let params = StreamParams {
        estimate_drift: Some(DriftOptions {
            block_s: 0.25,
            ..DriftOptions::default()
        }),
        ..cfg.stream_params()
    };
    let slope = analyze_streams(&run.streams, &params).unwrap().drift.slope_ps_per_s();
    c.rel("drift slope", slope, cfg.drift_ps_per_s, 0.1);
    // memory convolution against Monte Carlo
    let t = common::run_tables(1);
    let model = TrialModel::new(
        &setting_probabilities(&t.coincidences).unwrap(),
        &predictability(&t.rates).unwrap(),
    )
    .unwrap();
    for comp in [[1u8, 0, 0, 0], [0, 1, 1, 0], [1, 1, 1, 1], [0, 0, 3, 2]] {
        let exact = p_left(&model, comp);
        let (mc, se) = p_left_monte_carlo(&model, comp.map(u32::from), 200_000, 3);
        c.holds(
            &format!("p_left {comp:?}: exact {exact:.5} vs MC {mc:.5} ± {se:.5}"),
            (exact - mc).abs() < 3.0 * se.max(1e-4),
        );
    }
}

type Criterion<'a> = (&'static str, Box<dyn Fn(&mut Check) + 'a>);

fn main() -> ExitCode {
    let r = reports();
    let criteria: Vec<Criterion> = vec![
        ("CHSH values", Box::new(|c| chsh_values(c, &r))),
        ("settings independence", Box::new(|c| independence(c, &r))),
        ("predictability", Box::new(|c| predictability_tables(c, &r))),
        ("significance chain", Box::new(|c| significance_chain(c, &r))),
        ("memory bound", Box::new(|c| memory(c, &r))),
        ("no-signaling", Box::new(|c| no_signaling_check(c, &r))),
        ("geometry", Box::new(geometry)),
        ("spectra", Box::new(spectra)),
        ("pipeline properties", Box::new(pipeline)),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut c = Check::default();
        run(&mut c);
        let secs = start.elapsed().as_secs_f64();
        if c.failures.is_empty() {
            println!("PASS {}. {name} ({} checks, {secs:.2} s)", k + 1, c.count);
        } else {
            failed += 1;
            println!(
                "FAIL {}. {name} ({}/{} checks failed, {secs:.2} s)",
                k + 1,
                c.failures.len(),
                c.count
            );
            for f in &c.failures {
                println!("     {f}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
