//! Plain-text renderings for `--table`.

use std::fmt::Write;

use crate::commands::{AnalyzeOutput, PlanReport, ReportOutput, SimulateOutput, StarSpectra};

pub fn plan(r: &PlanReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "window {} + {} s",
        r.window.start_utc.to_rfc3339(),
        r.window.duration_s
    );
    let _ = writeln!(
        s,
        "candidates: {} on A, {} on B",
        r.candidates_a.len(),
        r.candidates_b.len()
    );
    let _ = writeln!(
        s,
        "{:<10} {:<10} {:>7} {:>12} {:>12} {:>8} {:>14}",
        "hip_a", "hip_b", "score", "tau_A (us)", "tau_B (us)", "sep", "t_AB (yr)"
    );
    for p in &r.pairs {
        let _ = writeln!(
            s,
            "{:<10} {:<10} {:>7.4} {:>12.3} {:>12.3} {:>8.2} {:>7.0} ± {:<5.0}",
            p.hip_a,
            p.hip_b,
            p.score,
            p.min_tau_valid_a_s * 1e6,
            p.min_tau_valid_b_s * 1e6,
            p.separation_deg,
            p.lookback.years,
            p.lookback.sigma_years
        );
    }
    if let Some(c) = &r.configured_pair {
        let us = |t: Option<f64>| t.map_or("-".to_string(), |t| format!("{:.2}", t * 1e6));
        let _ = writeln!(s, "configured pair {} / {}", c.hip_a, c.hip_b);
        let _ = writeln!(
            s,
            "  min tau_valid {:.3} / {:.3} us, tau_used {} / {} us",
            c.min_tau_valid_a_s * 1e6,
            c.min_tau_valid_b_s * 1e6,
            us(c.tau_used_a_s),
            us(c.tau_used_b_s)
        );
        let _ = writeln!(
            s,
            "  lookback {:.0} ± {:.0} yr",
            c.lookback.years, c.lookback.sigma_years
        );
    }
    s
}

pub fn spectra(rows: &[StarSpectra]) -> String {
    let mut s = format!(
        "{:<4} {:<10} {:>7} {:>7} {:>10} {:>8} {:>8} {:>10}\n",
        "side", "hip", "T (K)", "X", "cut (nm)", "f_r->b", "f_b->r", "efficiency"
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{:<4} {:<10} {:>7.0} {:>7.3} {:>10.1} {:>8.4} {:>8.4} {:>10.3}",
            r.side.label(),
            r.hip,
            r.temperature_k,
            r.airmass,
            r.report.cutoff_nm,
            r.report.f_red_to_blue,
            r.report.f_blue_to_red,
            r.report.efficiency
        );
    }
    s
}

pub fn simulate(r: &SimulateOutput) -> String {
    format!(
        "seed {}\npairs emitted {}\nevents A {} B {}\npredicted S {:.4}\nwrote {} and {}\n",
        r.seed, r.pairs_emitted, r.events_a, r.events_b, r.predicted_s, r.streams_file, r.truth_file
    )
}

pub fn analyze(o: &AnalyzeOutput) -> String {
    let r = &o.report;
    let s = &r.significance;
    let mut t = String::new();
    let _ = writeln!(t, "coincidences {}", r.table.total());
    let _ = writeln!(t, "E_ij {:?}", r.chsh.correlators.map(|e| (e * 1e4).round() / 1e4));
    let _ = writeln!(
        t,
        "S {:.4}  C {:.4}  eps {:.4}  violated {}",
        r.chsh.s, r.chsh.c, r.predictability.eps, r.violation.violated
    );
    let _ = writeln!(t, "chi2 {:.3}  p {:.3}", r.chi2.chi2, r.chi2.p_value);
    let _ = writeln!(t, "W {:.0}  <W> {:.0}  sigma_W {:.1}", s.w, s.w_expected, s.sigma_w);
    let _ = writeln!(t, "nu {:.2}  p {:.3e}", s.nu_n, s.p);
    let _ = writeln!(t, "B {:.4}  p_mem {:.3e}  nu_mem {:.2}", r.memory.b, s.p_mem, s.nu_mem);
    if let Some(ns) = &r.no_signaling {
        let _ = writeln!(
            t,
            "no-signaling p-values {:?}",
            ns.tests.map(|z| (z.p_value * 1e3).round() / 1e3)
        );
    }
    if let Some(st) = &o.streams {
        let _ = writeln!(
            t,
            "duty cycle A {:.3} B {:.3}  drift {:.1} ps/s",
            st.gate_a.duty_cycle, st.gate_b.duty_cycle, st.drift_slope_ps_per_s
        );
    }
    t
}

pub fn report(r: &ReportOutput) -> String {
    let mut t = String::from("setting   E\n");
    for (label, e) in &r.figures.correlators {
        let _ = writeln!(t, "{label:<9} {e:.4}");
    }
    t.push_str("\nn   max p_left\n");
    for (n, p) in &r.figures.p_left_max {
        let _ = writeln!(t, "{n:<3} {p:.6}");
    }
    let _ = writeln!(
        t,
        "\nS {:.4}  p_mem {:.3e}  nu_mem {:.2}",
        r.summary.s, r.summary.p_mem, r.summary.nu_mem
    );
    t
}
