use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use cosmic_bell::bellstats::{analyze_tables, AnalysisReport, FigureData, TableInput};
use cosmic_bell::catalogue::{parse_catalogue, rank_pairs, select_candidates, RankedCandidate, RankedPair};
use cosmic_bell::config::RunConfig;
use cosmic_bell::geometry::{airmass, star_direction, validity_times, Lookback, RunWindow};
use cosmic_bell::simulate::simulate_run;
use cosmic_bell::spectra::{analyze_star, SettingReaderModel, WrongWayReport};
use cosmic_bell::timetag::{analyze_streams, parse_timetags, parse_timetags_text, write_timetags, GateSummary};
use cosmic_bell::Side;

use crate::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRow {
    pub hip: String,
    pub score: f64,
    pub visibility_s: f64,
    pub min_tau_valid_s: f64,
    pub airmass_at_mid: f64,
}

impl From<&RankedCandidate> for CandidateRow {
    fn from(c: &RankedCandidate) -> Self {
        CandidateRow {
            hip: c.record.hip_id.clone(),
            score: c.score,
            visibility_s: c.visibility_duration_s,
            min_tau_valid_s: c.min_tau_valid_s,
            airmass_at_mid: c.airmass_at_mid,
        }
    }
}

/// Validity and lookback for the pair named in the config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfiguredPair {
    pub hip_a: String,
    pub hip_b: String,
    pub min_tau_valid_a_s: f64,
    pub min_tau_valid_b_s: f64,
    pub variation_a_s: f64,
    pub variation_b_s: f64,
    pub tau_used_a_s: Option<f64>,
    pub tau_used_b_s: Option<f64>,
    pub lookback: Lookback,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanReport {
    pub window: RunWindow,
    pub candidates_a: Vec<CandidateRow>,
    pub candidates_b: Vec<CandidateRow>,
    pub pairs: Vec<RankedPair>,
    pub causally_misaligned: usize,
    pub configured_pair: Option<ConfiguredPair>,
}

fn sorted_rows(cands: &[RankedCandidate]) -> Vec<CandidateRow> {
    let mut rows: Vec<CandidateRow> = cands.iter().map(CandidateRow::from).collect();
    rows.sort_by(|x, y| {
        y.score
            .total_cmp(&x.score)
            .then_with(|| cosmic_bell::catalogue::compare_ids(&x.hip, &y.hip))
    });
    rows
}

pub fn plan(cfg: &RunConfig) -> CliResult<PlanReport> {
    let path = cfg
        .catalogue
        .as_ref()
        .map(|p| cfg.resolve(p))
        .ok_or_else(|| CliError::BadInput("config has no `catalogue`".into()))?;
    let records = parse_catalogue(File::open(&path)?, false)?.records;
    let layout = cfg.layout()?;
    let select = |side| select_candidates(&records, &cfg.selection, &layout, side, &cfg.budget, &cfg.window);
    let (a, b) = (select(Side::A)?, select(Side::B)?);
    for (side, c) in [('A', &a), ('B', &b)] {
        if c.is_empty() {
            return Err(CliError::BadInput(format!("no candidates on side {side}")));
        }
    }
    let mut ranking = rank_pairs(&a, &b, &cfg.budget);
    if ranking.pairs.is_empty() {
        return Err(CliError::BadInput("no causally aligned candidate pairs".into()));
    }
    let configured_pair = match &cfg.stars {
        None => None,
        Some(stars) => {
            let (ta, tb) = cfg.targets()?;
            let (pa, pb) = validity_times(&layout, &ta, &tb, &cfg.budget, &cfg.window, cfg.validity_step_s)?;
            let sep = cosmic_bell::geometry::angular_separation(&ta, &tb);
            Some(ConfiguredPair {
                hip_a: stars.a.hip.clone(),
                hip_b: stars.b.hip.clone(),
                min_tau_valid_a_s: pa.min_tau_valid_s,
                min_tau_valid_b_s: pb.min_tau_valid_s,
                variation_a_s: pa.variation_s(),
                variation_b_s: pb.variation_s(),
                tau_used_a_s: pa.tau_used_s,
                tau_used_b_s: pb.tau_used_s,
                lookback: cosmic_bell::geometry::lookback_intersection(
                    ta.distance_ly,
                    ta.distance_error_ly,
                    tb.distance_ly,
                    tb.distance_error_ly,
                    sep,
                ),
            })
        }
    };
    ranking.pairs.truncate(cfg.top_pairs);
    Ok(PlanReport {
        window: cfg.window,
        candidates_a: sorted_rows(&a),
        candidates_b: sorted_rows(&b),
        pairs: ranking.pairs,
        causally_misaligned: ranking.causally_misaligned.len(),
        configured_pair,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarSpectra {
    pub side: Side,
    pub hip: String,
    pub temperature_k: f64,
    pub altitude_deg: f64,
    pub airmass: f64,
    pub report: WrongWayReport,
}

pub fn spectra(cfg: &RunConfig) -> CliResult<Vec<StarSpectra>> {
    let sc = cfg
        .spectra
        .as_ref()
        .ok_or_else(|| CliError::BadInput("config has no `spectra`".into()))?;
    let model = SettingReaderModel::load(&cfg.model_files()?)?;
    let stars = cfg
        .stars
        .as_ref()
        .ok_or_else(|| CliError::BadInput("config has no `stars`".into()))?;
    let layout = cfg.layout()?;
    let mut out = Vec::new();
    for (side, star) in [(Side::A, &stars.a), (Side::B, &stars.b)] {
        let temperature_k = *sc
            .temperatures_k
            .get(&star.hip)
            .ok_or_else(|| CliError::BadInput(format!("no temperature for star {}", star.hip)))?;
        let dir = star_direction(&star.target()?, cfg.window.mid(), layout.site(side))?;
        let x = airmass(dir.altitude_deg)?;
        out.push(StarSpectra {
            side,
            hip: star.hip.clone(),
            temperature_k,
            altitude_deg: dir.altitude_deg,
            airmass: x,
            report: analyze_star(temperature_k, x, &model, sc.step_nm)?,
        });
    }
    Ok(out)
}

pub const STREAMS_FILE: &str = "streams.bin";
pub const TRUTH_FILE: &str = "truth.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateOutput {
    pub seed: u64,
    pub pairs_emitted: u64,
    pub events_a: usize,
    pub events_b: usize,
    pub predicted_correlators: [f64; 4],
    pub predicted_s: f64,
    pub streams_file: String,
    pub truth_file: String,
}

pub fn simulate(cfg: &RunConfig, dir: &Path) -> CliResult<SimulateOutput> {
    let sim = &cfg.simulation;
    let run = simulate_run(sim)?;
    std::fs::create_dir_all(dir)?;
    let mut w = BufWriter::new(File::create(dir.join(STREAMS_FILE))?);
    write_timetags(&run.streams, &mut w)?;
    w.flush()?;
    let mut w = BufWriter::new(File::create(dir.join(TRUTH_FILE))?);
    run.truth.write_csv(&mut w)?;
    w.flush()?;
    Ok(SimulateOutput {
        seed: sim.seed,
        pairs_emitted: run.pairs_emitted,
        events_a: run.streams.a.len(),
        events_b: run.streams.b.len(),
        predicted_correlators: sim.predicted_correlators(),
        predicted_s: sim.predicted_s(),
        streams_file: STREAMS_FILE.into(),
        truth_file: TRUTH_FILE.into(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamSummary {
    pub drift_slope_ps_per_s: f64,
    pub gate_a: GateSummary,
    pub gate_b: GateSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeOutput {
    pub report: AnalysisReport,
    pub streams: Option<StreamSummary>,
}

pub fn analyze(cfg: &RunConfig, streams: Option<&Path>, tables: Option<&Path>) -> CliResult<AnalyzeOutput> {
    if let Some(path) = streams {
        let rates = cfg
            .rates
            .as_ref()
            .ok_or_else(|| CliError::BadInput("stream analysis needs `rates` in the config".into()))?;
        let s = if path.extension().is_some_and(|e| e == "txt") {
            parse_timetags_text(BufReader::new(File::open(path)?))?
        } else {
            parse_timetags(&std::fs::read(path)?)?
        };
        let out = analyze_streams(&s, &cfg.analysis.stream)?;
        let report = analyze_tables(&out.coincidences, rates, Some(&out.singles), &cfg.analysis.statistics)?;
        return Ok(AnalyzeOutput {
            report,
            streams: Some(StreamSummary {
                drift_slope_ps_per_s: out.drift.slope_ps_per_s(),
                gate_a: out.gate_a,
                gate_b: out.gate_b,
            }),
        });
    }
    let path = tables
        .map(Path::to_path_buf)
        .or_else(|| cfg.analysis.tables.as_ref().map(|p| cfg.resolve(p)))
        .ok_or_else(|| CliError::BadInput("no --streams, --tables or analysis.tables given".into()))?;
    let mut input = TableInput::load(&path).map_err(|e| CliError::BadInput(format!("{}: {e}", path.display())))?;
    if let Some(rates) = &cfg.rates {
        input.rates = rates.clone();
    }
    Ok(AnalyzeOutput {
        report: input.analyze()?,
        streams: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub s: f64,
    pub c: f64,
    pub eps: f64,
    pub violated: bool,
    pub p: f64,
    pub nu: f64,
    pub b: f64,
    pub p_mem: f64,
    pub nu_mem: f64,
    pub naive_nu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportOutput {
    pub summary: Summary,
    pub figures: FigureData,
}

pub fn report(cfg: &RunConfig, input: Option<&Path>) -> CliResult<ReportOutput> {
    let analysis = match input {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            serde_json::from_str::<AnalyzeOutput>(&text)
                .map_err(|e| CliError::BadInput(format!("{}: {e}", path.display())))?
        }
        None => analyze(cfg, None, None)?,
    };
    let r = &analysis.report;
    let s = &r.significance;
    Ok(ReportOutput {
        summary: Summary {
            s: r.chsh.s,
            c: r.chsh.c,
            eps: r.predictability.eps,
            violated: r.violation.violated,
            p: s.p,
            nu: s.nu_n,
            b: r.memory.b,
            p_mem: s.p_mem,
            nu_mem: s.nu_mem,
            naive_nu: r.naive.nu,
        },
        figures: r.figures(),
    })
}
