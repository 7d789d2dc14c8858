//! Synthetic time-tag streams with ground-truth labels.
//!
//! Entangled pairs are emitted as a Poisson process. Each photon is measured
//! in the basis selected by the most recent setting click on its side at its
//! arrival time, and the two outcomes are drawn from the singlet correlation
//! `p(A=B | a, b) = (1 - V cos 2(a - b)) / 2`. Setting clicks are the
//! superposition of correctly routed stellar photons, wrong-way stellar
//! photons and port noise. B's timestamps carry a linear clock drift and
//! Gaussian jitter.
//!
//! Generation is split into fixed time blocks, each drawing from its own
//! ChaCha8 stream derived from the master seed, so the output does not depend
//! on the number of worker threads.

mod synth;
mod truth;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use synth::{synthesize_from_tables, SynthesisLayout};
pub use truth::{EventTruth, TruthLabel, TruthRecord};

use crate::error::{Error, Result};
use crate::timetag::{Channel, DriftKnot, DriftModel, Outcome, PortMap, SiteStreams, StreamParams, TimeTagEvent};
use crate::Side;

/// One side's setting reader and measurement angles, in setting order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SideSimConfig {
    /// Polarizer angle for settings 1 and 2, degrees. The orthogonal angle
    /// is the other outcome.
    pub angles_deg: [f64; 2],
    /// Stellar photon rate of the color assigned to each setting, Hz.
    pub stellar_hz: [f64; 2],
    /// Noise click rate at each setting port, Hz.
    pub noise_hz: [f64; 2],
    /// `(f_1→2, f_2→1)`.
    pub wrong_way: [f64; 2],
    /// Outcome detection efficiency.
    pub efficiency: f64,
    /// Dark count rate of each outcome detector, Hz.
    pub dark_count_hz: f64,
}

impl SideSimConfig {
    fn default_for(side: Side) -> Self {
        SideSimConfig {
            angles_deg: match side {
                // setting 1 is red on A, blue on B
                Side::A => [0.0, 45.0],
                Side::B => [22.5, -22.5],
            },
            stellar_hz: [5e5, 5e5],
            noise_hz: [0.0, 0.0],
            wrong_way: [0.0, 0.0],
            efficiency: 1.0,
            dark_count_hz: 0.0,
        }
    }

    fn validate(&self, side: Side) -> Result<()> {
        let rates = self
            .stellar_hz
            .iter()
            .chain(&self.noise_hz)
            .chain(std::iter::once(&self.dark_count_hz));
        let bad = |m: &str| Err(Error::InvalidInput(format!("simulation side {}: {m}", side.label())));
        if rates.clone().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return bad("rates must be finite and non-negative");
        }
        if self
            .wrong_way
            .iter()
            .chain(std::iter::once(&self.efficiency))
            .any(|p| !(0.0..=1.0).contains(p))
        {
            return bad("probabilities must lie in [0, 1]");
        }
        if self.angles_deg.iter().any(|a| !a.is_finite()) {
            return bad("angles must be finite");
        }
        Ok(())
    }

    fn setting_rate(&self) -> f64 {
        self.stellar_hz.iter().sum::<f64>() + self.noise_hz.iter().sum::<f64>()
    }
}

impl Default for SideSimConfig {
    fn default() -> Self {
        Self::default_for(Side::A)
    }
}

fn default_side_b() -> SideSimConfig {
    SideSimConfig::default_for(Side::B)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationConfig {
    pub seed: u64,
    pub duration_s: f64,
    pub pair_rate_hz: f64,
    pub visibility: f64,
    pub a: SideSimConfig,
    #[serde(default = "default_side_b")]
    pub b: SideSimConfig,
    pub ports: PortMap,
    /// Per-channel detector dead time, ps.
    pub dead_time_ps: u64,
    /// B clock offset at the start of the run, ps.
    pub drift_offset_ps: f64,
    pub drift_ps_per_s: f64,
    /// Standard deviation of B outcome timestamps, ps.
    pub jitter_ps: f64,
    pub tau_used_a_ps: u64,
    pub tau_used_b_ps: u64,
    pub tau_cut_ps: Option<u64>,
    pub window_ps: u64,
    /// Length of an independently seeded generation block, seconds.
    pub block_s: f64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            seed: 1,
            duration_s: 1.0,
            pair_rate_hz: 1e5,
            visibility: 1.0,
            a: SideSimConfig::default_for(Side::A),
            b: SideSimConfig::default_for(Side::B),
            ports: PortMap::default(),
            dead_time_ps: 0,
            drift_offset_ps: 0.0,
            drift_ps_per_s: 0.0,
            jitter_ps: 0.0,
            tau_used_a_ps: 2_000_000,
            tau_used_b_ps: 5_000_000,
            tau_cut_ps: None,
            window_ps: 2_500,
            block_s: 0.25,
        }
    }
}

/// Run start on both clocks, ps. Leaves room for negative drift offsets.
pub const START_PS: u64 = 1_000_000_000;

impl SimulationConfig {
    pub fn side(&self, side: Side) -> &SideSimConfig {
        match side {
            Side::A => &self.a,
            Side::B => &self.b,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.a.validate(Side::A)?;
        self.b.validate(Side::B)?;
        let finite_pos = |x: f64| x.is_finite() && x > 0.0;
        if !finite_pos(self.duration_s) || !finite_pos(self.block_s) {
            return Err(Error::InvalidInput("duration and block length must be positive".into()));
        }
        if !(self.pair_rate_hz.is_finite() && self.pair_rate_hz >= 0.0) {
            return Err(Error::InvalidInput("pair rate must be non-negative".into()));
        }
        if !(0.0..=1.0).contains(&self.visibility) {
            return Err(Error::InvalidInput(format!(
                "visibility {} outside [0, 1]",
                self.visibility
            )));
        }
        if !(self.jitter_ps.is_finite() && self.jitter_ps >= 0.0)
            || !self.drift_ps_per_s.is_finite()
            || !self.drift_offset_ps.is_finite()
        {
            return Err(Error::InvalidInput(
                "drift and jitter must be finite, jitter >= 0".into(),
            ));
        }
        let worst = self.drift_offset_ps.abs() + self.drift_ps_per_s.abs() * self.duration_s + 10.0 * self.jitter_ps;
        if worst >= START_PS as f64 {
            return Err(Error::InvalidInput(
                "drift offset too large for the clock origin".into(),
            ));
        }
        Ok(())
    }

    /// B clock offset relative to A as a function of A time.
    pub fn true_drift(&self) -> DriftModel {
        let end = START_PS + (self.duration_s * 1e12) as u64;
        DriftModel {
            knots: vec![
                DriftKnot {
                    t_ps: START_PS,
                    offset_ps: self.drift_offset_ps,
                },
                DriftKnot {
                    t_ps: end,
                    offset_ps: self.drift_offset_ps + self.drift_ps_per_s * self.duration_s,
                },
            ],
        }
    }

    /// Pipeline parameters matching this configuration, with the true drift.
    pub fn stream_params(&self) -> StreamParams {
        StreamParams {
            window_ps: self.window_ps,
            tau_used_a_ps: self.tau_used_a_ps,
            tau_used_b_ps: self.tau_used_b_ps,
            tau_cut_a_ps: self.tau_cut_ps,
            tau_cut_b_ps: self.tau_cut_ps,
            ports: self.ports,
            estimate_drift: None,
            fixed_drift: self.true_drift(),
        }
    }

    /// `E_ij = -V cos 2(a_i - b_j)`, cell order `11, 12, 21, 22`.
    pub fn predicted_correlators(&self) -> [f64; 4] {
        std::array::from_fn(|k| {
            let d = (self.a.angles_deg[k / 2] - self.b.angles_deg[k % 2]).to_radians();
            -self.visibility * (2.0 * d).cos()
        })
    }

    pub fn predicted_s(&self) -> f64 {
        let e = self.predicted_correlators();
        (e[0] + e[1] + e[2] - e[3]).abs()
    }
}

/// Simulated streams in local clock time, with labels aligned to the events.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedRun {
    pub streams: SiteStreams,
    pub truth: TruthRecord,
    pub pairs_emitted: u64,
}

#[derive(Clone, Copy)]
struct Labeled {
    t_ps: u64,
    channel: Channel,
    truth: EventTruth,
}

// Substream ids: block index in the high bits, purpose in the low nibble.
const PURPOSE_SETTINGS_A: u64 = 0;
const PURPOSE_SETTINGS_B: u64 = 1;
const PURPOSE_PAIRS: u64 = 2;
const PURPOSE_DARK_A: u64 = 3;
const PURPOSE_DARK_B: u64 = 4;

fn substream(seed: u64, block: usize, purpose: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((block as u64) << 4) | purpose);
    rng
}

/// Event times of a Poisson process of `rate_hz` on `[lo, hi)` seconds.
fn poisson_times(rng: &mut ChaCha8Rng, rate_hz: f64, lo: f64, hi: f64) -> Vec<f64> {
    let mut out = Vec::new();
    if rate_hz <= 0.0 {
        return out;
    }
    let exp = Exp::new(rate_hz).expect("positive rate");
    let mut t = lo;
    loop {
        t += exp.sample(rng);
        if t >= hi {
            return out;
        }
        out.push(t);
    }
}

fn to_ps(t_s: f64) -> u64 {
    START_PS + (t_s * 1e12).round() as u64
}

/// Setting clicks of one side on its own clock for one block, tagged with
/// setting index.
fn setting_block(cfg: &SimulationConfig, side: Side, block: usize, lo: f64, hi: f64) -> Vec<(f64, usize, TruthLabel)> {
    let sc = cfg.side(side);
    let purpose = if side == Side::A {
        PURPOSE_SETTINGS_A
    } else {
        PURPOSE_SETTINGS_B
    };
    let mut rng = substream(cfg.seed, block, purpose);
    // (port, label) categories and their rates
    let cats = [
        (
            0,
            TruthLabel::StellarCorrect,
            sc.stellar_hz[0] * (1.0 - sc.wrong_way[0]),
        ),
        (1, TruthLabel::StellarWrongWay, sc.stellar_hz[0] * sc.wrong_way[0]),
        (
            1,
            TruthLabel::StellarCorrect,
            sc.stellar_hz[1] * (1.0 - sc.wrong_way[1]),
        ),
        (0, TruthLabel::StellarWrongWay, sc.stellar_hz[1] * sc.wrong_way[1]),
        (0, TruthLabel::Noise, sc.noise_hz[0]),
        (1, TruthLabel::Noise, sc.noise_hz[1]),
    ];
    let total = sc.setting_rate();
    let times = poisson_times(&mut rng, total, lo, hi);
    if times.is_empty() {
        return Vec::new();
    }
    let pick = WeightedIndex::new(cats.iter().map(|c| c.2)).expect("positive total rate");
    times
        .into_iter()
        .map(|t| {
            let (port, label, _) = cats[pick.sample(&mut rng)];
            (t, port, label)
        })
        .collect()
}

fn active_setting(times: &[f64], settings: &[usize], t: f64) -> usize {
    let k = times.partition_point(|&x| x <= t);
    // before the first click the modulator rests in setting 1
    if k == 0 {
        0
    } else {
        settings[k - 1]
    }
}

fn apply_dead_time(events: &mut Vec<Labeled>, dead_ps: u64) {
    if dead_ps == 0 {
        return;
    }
    let mut last: [Option<u64>; 4] = [None; 4];
    events.retain(|e| {
        let ch = e.channel.code() as usize;
        if last[ch].is_some_and(|l| e.t_ps < l + dead_ps) {
            return false;
        }
        last[ch] = Some(e.t_ps);
        true
    });
}

pub fn simulate_run(cfg: &SimulationConfig) -> Result<SimulatedRun> {
    cfg.validate()?;
    let n_blocks = (cfg.duration_s / cfg.block_s).ceil().max(1.0) as usize;
    let bounds = |k: usize| {
        (
            k as f64 * cfg.block_s,
            ((k + 1) as f64 * cfg.block_s).min(cfg.duration_s),
        )
    };

    // setting clicks in true (A) time
    let settings: Vec<Vec<(f64, usize, TruthLabel)>> = [Side::A, Side::B]
        .par_iter()
        .map(|&side| {
            (0..n_blocks)
                .into_par_iter()
                .map(|k| {
                    let (lo, hi) = bounds(k);
                    setting_block(cfg, side, k, lo, hi)
                })
                .flatten_iter()
                .collect()
        })
        .collect();
    let times: Vec<Vec<f64>> = settings.iter().map(|s| s.iter().map(|x| x.0).collect()).collect();
    let ports: Vec<Vec<usize>> = settings.iter().map(|s| s.iter().map(|x| x.1).collect()).collect();

    let b_offset = |t_s: f64| cfg.drift_offset_ps + cfg.drift_ps_per_s * t_s;
    let b_clock = |t_s: f64, extra_ps: f64| -> u64 { (to_ps(t_s) as f64 + b_offset(t_s) + extra_ps).round() as u64 };

    let jitter = Normal::new(0.0, cfg.jitter_ps).expect("finite jitter");
    let pair_blocks: Vec<(Vec<Labeled>, Vec<Labeled>, u64)> = (0..n_blocks)
        .into_par_iter()
        .map(|k| {
            let (lo, hi) = bounds(k);
            let mut rng = substream(cfg.seed, k, PURPOSE_PAIRS);
            let emissions = poisson_times(&mut rng, cfg.pair_rate_hz, lo, hi);
            let mut a = Vec::new();
            let mut b = Vec::new();
            let id_base = (k as u64) << 40;
            for (n, &t) in emissions.iter().enumerate() {
                let id = Some(id_base + n as u64);
                let i = active_setting(&times[0], &ports[0], t);
                let j = active_setting(&times[1], &ports[1], t);
                let d = (cfg.a.angles_deg[i] - cfg.b.angles_deg[j]).to_radians();
                let p_equal = 0.5 * (1.0 - cfg.visibility * (2.0 * d).cos());
                let out_a = if rng.random::<f64>() < 0.5 {
                    Outcome::Plus
                } else {
                    Outcome::Minus
                };
                let equal = rng.random::<f64>() < p_equal;
                let out_b = match (out_a, equal) {
                    (o, true) => o,
                    (Outcome::Plus, false) => Outcome::Minus,
                    (Outcome::Minus, false) => Outcome::Plus,
                };
                let det_a = rng.random::<f64>() < cfg.a.efficiency;
                let det_b = rng.random::<f64>() < cfg.b.efficiency;
                let dj = if cfg.jitter_ps > 0.0 {
                    jitter.sample(&mut rng)
                } else {
                    0.0
                };
                let truth = EventTruth {
                    label: TruthLabel::PairPhoton,
                    pair_id: id,
                };
                if det_a {
                    a.push(Labeled {
                        t_ps: to_ps(t),
                        channel: out_a.channel(),
                        truth,
                    });
                }
                if det_b {
                    b.push(Labeled {
                        t_ps: b_clock(t, dj),
                        channel: out_b.channel(),
                        truth,
                    });
                }
            }
            (a, b, emissions.len() as u64)
        })
        .collect();

    let dark = |side: Side| -> Vec<Labeled> {
        let sc = cfg.side(side);
        let purpose = if side == Side::A {
            PURPOSE_DARK_A
        } else {
            PURPOSE_DARK_B
        };
        (0..n_blocks)
            .into_par_iter()
            .map(|k| {
                let (lo, hi) = bounds(k);
                let mut rng = substream(cfg.seed, k, purpose);
                poisson_times(&mut rng, 2.0 * sc.dark_count_hz, lo, hi)
                    .into_iter()
                    .map(|t| {
                        let o = if rng.random::<f64>() < 0.5 {
                            Outcome::Plus
                        } else {
                            Outcome::Minus
                        };
                        let t_ps = if side == Side::A { to_ps(t) } else { b_clock(t, 0.0) };
                        Labeled {
                            t_ps,
                            channel: o.channel(),
                            truth: EventTruth {
                                label: TruthLabel::DarkCount,
                                pair_id: None,
                            },
                        }
                    })
                    .collect::<Vec<_>>()
            })
            .flatten_iter()
            .collect()
    };

    let mut pairs_emitted = 0;
    let mut streams = SiteStreams::default();
    let mut truth = TruthRecord::default();
    let mut sides: [Vec<Labeled>; 2] = [Vec::new(), Vec::new()];
    for (a, b, n) in pair_blocks {
        sides[0].extend(a);
        sides[1].extend(b);
        pairs_emitted += n;
    }
    for side in [Side::A, Side::B] {
        let s = side.index();
        sides[s].extend(dark(side));
        sides[s].extend(settings[s].iter().map(|&(t, port, label)| Labeled {
            t_ps: if side == Side::A { to_ps(t) } else { b_clock(t, 0.0) },
            channel: cfg.ports.color(side, port).channel(),
            truth: EventTruth { label, pair_id: None },
        }));
        // deterministic order: time, then channel, then pair id
        sides[s].sort_by_key(|e| (e.t_ps, e.channel.code(), e.truth.pair_id));
        apply_dead_time(&mut sides[s], cfg.dead_time_ps);
        let events: Vec<TimeTagEvent> = sides[s]
            .iter()
            .map(|e| TimeTagEvent {
                timestamp_ps: e.t_ps,
                site: side,
                channel: e.channel,
            })
            .collect();
        let labels: Vec<EventTruth> = sides[s].iter().map(|e| e.truth).collect();
        match side {
            Side::A => {
                streams.a = events;
                truth.a = labels;
            }
            Side::B => {
                streams.b = events;
                truth.b = labels;
            }
        }
    }
    Ok(SimulatedRun {
        streams,
        truth,
        pairs_emitted,
    })
}

/// Fraction of stellar setting clicks that went the wrong way, from the
/// truth labels, split by the port the photon was destined for. Returns
/// `(f_1→2, f_2→1)` and the stellar counts per destined port.
pub fn labeled_wrong_way(run: &SimulatedRun, side: Side, ports: &PortMap) -> ([f64; 2], [u64; 2]) {
    let mut wrong = [0u64; 2];
    let mut total = [0u64; 2];
    for (e, t) in run.streams.side(side).iter().zip(run.truth.side(side)) {
        let Some(color) = e.channel.color() else { continue };
        let port = ports.setting(side, color);
        match t.label {
            TruthLabel::StellarCorrect => total[port] += 1,
            TruthLabel::StellarWrongWay => {
                // destined for the other port
                wrong[1 - port] += 1;
                total[1 - port] += 1;
            }
            _ => {}
        }
    }
    (std::array::from_fn(|p| wrong[p] as f64 / total[p].max(1) as f64), total)
}

/// Click rate per setting port, Hz.
pub fn port_rates(streams: &SiteStreams, side: Side, ports: &PortMap, duration_s: f64) -> [f64; 2] {
    let mut n = [0u64; 2];
    for e in streams.side(side) {
        if let Some(color) = e.channel.color() {
            n[ports.setting(side, color)] += 1;
        }
    }
    n.map(|c| c as f64 / duration_s)
}
