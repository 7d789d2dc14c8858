use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::chsh::{chsh, naive_significance, ChshEstimate, NaiveSignificance};
use super::memory::{memory_bound, MemoryBound, TrialModel};
use super::nosignal::{coincidence_marginal_tests, efficiency_correction, no_signaling, NoSignalingReport, ZTest};
use super::predictability::{predictability, PredictabilityTable, RateBudget};
use super::settings::{chi2_independence, setting_probabilities, Chi2Result, SettingProbabilities};
use super::significance::{significance, SignificanceReport};
use crate::error::Result;
use crate::timetag::{CoincidenceTable, SinglesTable};

/// Significant digits kept in serialized reports.
pub const REPORT_DIGITS: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisOptions {
    /// Longest trial sequence searched by the memory bound.
    pub memory_n_max: usize,
    /// Detection-efficiency ratios `(R_A, R_B)` for the coincidence
    /// marginal tests, if known.
    pub efficiency_ratios: Option<[f64; 2]>,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            memory_n_max: 15,
            efficiency_ratios: None,
        }
    }
}

/// Pre-tabulated analysis inputs: counts, rate budget and optional singles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableInput {
    pub coincidences: CoincidenceTable,
    pub rates: RateBudget,
    #[serde(default)]
    pub singles: Option<SinglesTable>,
    #[serde(default)]
    pub options: AnalysisOptions,
}

impl TableInput {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn analyze(&self) -> Result<AnalysisReport> {
        analyze_tables(&self.coincidences, &self.rates, self.singles.as_ref(), &self.options)
    }
}

/// Adapted CHSH test `C ≤ ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub c: f64,
    pub eps: f64,
    pub violated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectedMarginals {
    pub r_a: f64,
    pub r_b: f64,
    pub tests: [ZTest; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub table: CoincidenceTable,
    pub settings: SettingProbabilities,
    pub chsh: ChshEstimate,
    pub chi2: Chi2Result,
    pub predictability: PredictabilityTable,
    pub significance: SignificanceReport,
    pub memory: MemoryBound,
    pub no_signaling: Option<NoSignalingReport>,
    pub corrected_marginals: Option<CorrectedMarginals>,
    pub violation: Violation,
    pub naive: NaiveSignificance,
}

pub fn analyze_tables(
    table: &CoincidenceTable,
    budget: &RateBudget,
    singles: Option<&SinglesTable>,
    opts: &AnalysisOptions,
) -> Result<AnalysisReport> {
    let settings = setting_probabilities(table)?;
    let chsh = chsh(table)?;
    let chi2 = chi2_independence(&settings)?;
    let pred = predictability(budget)?;
    let model = TrialModel::new(&settings, &pred)?;
    let memory = memory_bound(&model, opts.memory_n_max)?;
    let significance = significance(table, &settings, &pred, memory.b)?;
    let no_signaling = singles.map(no_signaling).transpose()?;
    let corrected_marginals = match opts.efficiency_ratios {
        Some([r_a, r_b]) => Some(CorrectedMarginals {
            r_a,
            r_b,
            tests: coincidence_marginal_tests(&efficiency_correction(table, r_a, r_b)?)?,
        }),
        None => None,
    };
    Ok(AnalysisReport {
        table: *table,
        settings,
        violation: Violation {
            c: chsh.c,
            eps: pred.eps,
            violated: chsh.c > pred.eps,
        },
        naive: naive_significance(table)?,
        chsh,
        chi2,
        predictability: pred,
        significance,
        memory,
        no_signaling,
        corrected_marginals,
    })
}

/// Data behind the correlator bar chart and the backslide curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureData {
    /// `(label, E_ij)` for `a1b1, a1b2, a2b1, a2b2`.
    pub correlators: Vec<(String, f64)>,
    /// `(n, max p_left(n))`.
    pub p_left_max: Vec<(usize, f64)>,
}

impl AnalysisReport {
    pub fn figures(&self) -> FigureData {
        FigureData {
            correlators: (0..4)
                .map(|k| (format!("a{}b{}", k / 2 + 1, k % 2 + 1), self.chsh.correlators[k]))
                .collect(),
            p_left_max: self
                .memory
                .p_left_max
                .iter()
                .enumerate()
                .map(|(n, &p)| (n + 1, p))
                .collect(),
        }
    }
}

/// Round to `digits` significant digits.
pub fn round_significant(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x).parse().unwrap_or(x)
}

/// Round every floating-point number in a JSON tree. Integers are left alone.
pub fn round_json(value: &mut Value, digits: usize) {
    match value {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => {
            if let Some(r) = n
                .as_f64()
                .and_then(|x| serde_json::Number::from_f64(round_significant(x, digits)))
            {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(|v| round_json(v, digits)),
        Value::Object(map) => map.values_mut().for_each(|v| round_json(v, digits)),
        _ => {}
    }
}

/// Serialize with numbers rounded to [`REPORT_DIGITS`].
pub fn to_report_json<T: Serialize>(value: &T) -> Result<Value> {
    let mut v = serde_json::to_value(value)?;
    round_json(&mut v, REPORT_DIGITS);
    Ok(v)
}
