//! Statistical analysis of coincidence tables: CHSH estimates, settings
//! independence, excess predictability, the predictability- and
//! memory-robust significance, and no-signaling checks.

mod chsh;
mod memory;
mod nosignal;
mod predictability;
mod report;
mod settings;
mod significance;

pub use chsh::{chsh, naive_significance, ChshEstimate, NaiveSignificance};
pub use memory::{
    memory_bound, p_left, p_left_monte_carlo, win_distribution, MemoryBound, TrialModel, MAX_TRIALS, ZERO_TOLERANCE,
};
pub use nosignal::{
    coincidence_marginal_tests, efficiency_correction, no_signaling, pooled_z_test, NoSignalingReport, RealTable, ZTest,
};
pub use predictability::{
    poisson_sigma, predictability, stellar_rates, PredictabilityTable, RateBudget, SideRates, StellarRates,
};
pub use report::{
    analyze_tables, round_json, round_significant, to_report_json, AnalysisOptions, AnalysisReport, CorrectedMarginals,
    FigureData, TableInput, Violation, REPORT_DIGITS,
};
pub use settings::{chi2_independence, setting_probabilities, Chi2Result, SettingProbabilities};
pub use significance::{
    delta_nu, memory_adjusted_ln_p, memory_adjusted_p, n_win, optimal_losers, sigma_w, sigma_w_closed_form,
    significance, win_statistic, SignificanceReport, WinStatistic,
};
