//! Scenario definitions, sweep execution, and CSV emission.

use dissem_core::{
    adaptive_policy_table, adopt_prob, evaluate, expected_capacity, fit_scaling_b,
    no_gossip_baseline, pt2_high_approx, pt2_high_limit, pt_low_approx, McMode, ModelParams,
    PolicyTable,
};
use rayon::prelude::*;
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    M,
    Lambda,
    LambdaS,
    N,
    P,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::M => "m",
            SweepAxis::Lambda => "lambda",
            SweepAxis::LambdaS => "lambda_s",
            SweepAxis::N => "n",
            SweepAxis::P => "p",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "m" => Some(SweepAxis::M),
            "lambda" => Some(SweepAxis::Lambda),
            "lambda_s" => Some(SweepAxis::LambdaS),
            "n" => Some(SweepAxis::N),
            "p" => Some(SweepAxis::P),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyMode {
    Constant,
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Analytic,
    PaperFaithfulMc,
    EventDrivenMc,
}

impl Engine {
    pub fn mc_mode(&self) -> Option<McMode> {
        match self {
            Engine::Analytic => None,
            Engine::PaperFaithfulMc => Some(McMode::PaperFaithful),
            Engine::EventDrivenMc => Some(McMode::EventDriven),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    /// Long-term average error per swept point.
    Delta,
    /// Per-state adoption probabilities with their high-rate approximation.
    PtHigh,
    /// Per-state adoption probabilities with their low-rate approximation.
    PtLow,
    /// Adaptive versus matched-constant policy error.
    ComparePolicy,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub base: ModelParams,
    pub sweep_axis: SweepAxis,
    pub sweep_values: Vec<f64>,
    pub series_axis: Option<SweepAxis>,
    pub series_values: Vec<f64>,
    /// When set, a series value c on the lambda_s axis is interpreted as
    /// the per-node rate c, giving lambda_s = c * n at each swept point.
    pub lambda_s_per_n: bool,
    pub policy_mode: PolicyMode,
    pub engine: Engine,
    pub metric: Metric,
    /// Also emit the no-gossip baseline and the gain |delta - delta_ng|.
    pub emit_ng: bool,
    /// Constant-capacity grid (inclusive) for the fitted scaling column.
    pub fit_grid: Option<(u32, u32)>,
    pub cycles: u64,
    pub burn_in: u64,
    pub seed: u64,
    pub output_path: String,
}

/// A rectangular result table; `None` cells print as empty fields.
#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

#[derive(Debug)]
pub enum RunError {
    Config(String),
    Model(dissem_core::Error),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(msg) => write!(f, "config error: {msg}"),
            RunError::Model(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<dissem_core::Error> for RunError {
    fn from(e: dissem_core::Error) -> Self {
        RunError::Model(e)
    }
}

/// Process exit code for an error, per the documented contract.
pub fn exit_code(err: &RunError) -> i32 {
    match err {
        RunError::Config(_) => 2,
        RunError::Model(dissem_core::Error::NonConvergence { .. }) => 4,
        RunError::Model(_) => 2,
    }
}

fn apply_axis(
    base: &ModelParams,
    axis: SweepAxis,
    value: f64,
    lambda_s_per_n: bool,
) -> Result<ModelParams, RunError> {
    let as_count = |what: &str| -> Result<u32, RunError> {
        if value < 0.0 || value.fract() != 0.0 || value > u32::MAX as f64 {
            Err(RunError::Config(format!(
                "{what} sweep value {value} is not a nonnegative integer"
            )))
        } else {
            Ok(value as u32)
        }
    };
    let params = match axis {
        SweepAxis::M => ModelParams {
            m: as_count("m")?,
            ..*base
        },
        SweepAxis::Lambda => ModelParams {
            lambda: value,
            ..*base
        },
        SweepAxis::LambdaS => {
            let lambda_s = if lambda_s_per_n {
                value * base.n as f64
            } else {
                value
            };
            ModelParams { lambda_s, ..*base }
        }
        SweepAxis::N => ModelParams {
            n: as_count("n")?,
            ..*base
        },
        SweepAxis::P => ModelParams { p: value, ..*base },
    };
    params.validated().map_err(RunError::Model)
}

fn series_points(scenario: &Scenario) -> Vec<Option<f64>> {
    if scenario.series_values.is_empty() {
        vec![None]
    } else {
        scenario.series_values.iter().copied().map(Some).collect()
    }
}

fn series_suffix(scenario: &Scenario, value: Option<f64>) -> String {
    match (scenario.series_axis, value) {
        (Some(axis), Some(v)) => format!("_{}{}", axis.name(), fmt_value(v)),
        _ => String::new(),
    }
}

fn params_at(
    scenario: &Scenario,
    sweep_value: f64,
    series_value: Option<f64>,
) -> Result<ModelParams, RunError> {
    // Apply the sweep axis last so that couplings (lambda_s = c * n)
    // see the swept n.
    let mut params = scenario.base;
    if let (Some(axis), Some(v)) = (scenario.series_axis, series_value) {
        params = apply_axis(&params, axis, v, false)?;
    }
    params = apply_axis(&params, scenario.sweep_axis, sweep_value, false)?;
    if scenario.lambda_s_per_n {
        if let (Some(SweepAxis::LambdaS), Some(c)) = (scenario.series_axis, series_value) {
            params = ModelParams {
                lambda_s: c * params.n as f64,
                ..params
            }
            .validated()?;
        }
    }
    Ok(params)
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

struct PointResult {
    delta: f64,
    std_error: Option<f64>,
    delta_ng: Option<f64>,
    e_mstar: Option<f64>,
}

fn run_point(scenario: &Scenario, params: &ModelParams, point_seed: u64) -> Result<PointResult, RunError> {
    let policy = match scenario.policy_mode {
        PolicyMode::Constant => PolicyTable::constant(params),
        PolicyMode::Adaptive => adaptive_policy_table(params)?,
    };
    let (delta, std_error, pi) = match scenario.engine.mc_mode() {
        None => {
            let solved = evaluate(params, &policy)?;
            (solved.delta, None, Some(solved.pi))
        }
        Some(mode) => {
            let est = dissem_core::estimate_error(
                params,
                &policy,
                mode,
                scenario.cycles,
                scenario.burn_in,
                point_seed,
            );
            (est.mean_error, Some(est.std_error), None)
        }
    };
    let delta_ng = if scenario.emit_ng {
        Some(no_gossip_baseline(params, &policy)?)
    } else {
        None
    };
    let e_mstar = match (scenario.policy_mode, &pi) {
        (PolicyMode::Adaptive, Some(pi)) => Some(expected_capacity(pi, &policy)),
        _ => None,
    };
    Ok(PointResult {
        delta,
        std_error,
        delta_ng,
        e_mstar,
    })
}

fn run_delta(scenario: &Scenario) -> Result<Table, RunError> {
    let series = series_points(scenario);
    let mut columns = vec![scenario.sweep_axis.name().to_string()];
    for &s in &series {
        let suffix = series_suffix(scenario, s);
        if scenario.engine == Engine::Analytic {
            columns.push(format!("delta{suffix}"));
        } else {
            columns.push(format!("mean_error{suffix}"));
            columns.push(format!("std_error{suffix}"));
        }
        if scenario.emit_ng {
            columns.push(format!("delta_ng{suffix}"));
            columns.push(format!("gain{suffix}"));
        }
        if scenario.policy_mode == PolicyMode::Adaptive {
            columns.push(format!("e_mstar{suffix}"));
        }
        if scenario.fit_grid.is_some() {
            columns.push(format!("fitted_b{suffix}"));
        }
    }

    // Per-series fitted scaling constants (independent of the sweep).
    let fitted: Vec<Option<f64>> = match scenario.fit_grid {
        None => vec![None; series.len()],
        Some((lo, hi)) => series
            .iter()
            .map(|&s| {
                let params = params_at(scenario, scenario.sweep_values[0], s)?;
                let grid: Vec<u32> = (lo..=hi).collect();
                Ok(Some(fit_scaling_b(&params, &grid)?))
            })
            .collect::<Result<_, RunError>>()?,
    };

    let points: Vec<(usize, usize)> = (0..scenario.sweep_values.len())
        .flat_map(|i| (0..series.len()).map(move |j| (i, j)))
        .collect();
    let results: Vec<Result<PointResult, RunError>> = points
        .par_iter()
        .map(|&(i, j)| {
            let params = params_at(scenario, scenario.sweep_values[i], series[j])?;
            let point_seed = splitmix64(scenario.seed ^ (i * series.len() + j) as u64);
            run_point(scenario, &params, point_seed)
        })
        .collect();

    let mut rows = Vec::with_capacity(scenario.sweep_values.len());
    let mut it = results.into_iter();
    for &sweep_value in &scenario.sweep_values {
        let mut row = vec![Some(sweep_value)];
        for j in 0..series.len() {
            let r = it.next().expect("one result per point")?;
            row.push(Some(r.delta));
            if let Some(se) = r.std_error {
                row.push(Some(se));
            }
            if scenario.emit_ng {
                row.push(r.delta_ng);
                row.push(r.delta_ng.map(|ng| (r.delta - ng).abs()));
            }
            if scenario.policy_mode == PolicyMode::Adaptive {
                row.push(r.e_mstar);
            }
            if scenario.fit_grid.is_some() {
                row.push(fitted[j]);
            }
        }
        rows.push(row);
    }
    Ok(Table { columns, rows })
}

fn require_analytic(scenario: &Scenario, what: &str) -> Result<(), RunError> {
    if scenario.engine != Engine::Analytic {
        return Err(RunError::Config(format!(
            "metric {what} requires engine = analytic"
        )));
    }
    Ok(())
}

/// Per-state adoption probabilities: one row per starting correct count,
/// one column group per series value. Cells where a law's precondition
/// fails (no prior-correct node at N = 0, no prior-incorrect node when
/// N + m >= n) stay empty.
fn run_pt(scenario: &Scenario, high: bool) -> Result<Table, RunError> {
    require_analytic(scenario, if high { "pt-high" } else { "pt-low" })?;
    if scenario.sweep_axis != SweepAxis::Lambda {
        return Err(RunError::Config(
            "pt metrics sweep the gossip rate; set sweep axis = lambda".into(),
        ));
    }
    let base = scenario.base.validated()?;
    let n = base.n;
    let mut columns = vec!["N".to_string()];
    for &lam in &scenario.sweep_values {
        let tag = fmt_value(lam);
        if high {
            columns.push(format!("p_t2_lambda{tag}"));
            columns.push(format!("p_t2_approx_lambda{tag}"));
        } else {
            columns.push(format!("p_t1_lambda{tag}"));
            columns.push(format!("p_t1_approx_lambda{tag}"));
            columns.push(format!("p_t2_lambda{tag}"));
            columns.push(format!("p_t2_approx_lambda{tag}"));
        }
    }
    if high {
        columns.push("p_t2_limit".to_string());
    }

    let mut rows = Vec::new();
    for big_n in 0..=n {
        let mut row = vec![Some(big_n as f64)];
        for &lam in &scenario.sweep_values {
            let params = base.with_lambda(lam)?;
            let t1_ok = big_n >= 1 && big_n + params.m <= n;
            let t2_ok = big_n + params.m <= n - 1;
            if !high {
                row.push(if t1_ok {
                    Some(adopt_prob(&params, big_n, true)?)
                } else {
                    None
                });
                row.push(if t1_ok {
                    Some(pt_low_approx(&params, big_n, true)?)
                } else {
                    None
                });
            }
            row.push(if t2_ok {
                Some(adopt_prob(&params, big_n, false)?)
            } else {
                None
            });
            if high {
                row.push(if t2_ok {
                    Some(pt2_high_approx(&params, big_n)?)
                } else {
                    None
                });
            } else {
                row.push(if t2_ok {
                    Some(pt_low_approx(&params, big_n, false)?)
                } else {
                    None
                });
            }
        }
        if high {
            row.push(if big_n + base.m <= n - 1 {
                Some(pt2_high_limit(&base, big_n))
            } else {
                None
            });
        }
        rows.push(row);
    }
    Ok(Table { columns, rows })
}

/// One row per swept point comparing the adaptive policy against a
/// constant policy whose capacity is the rounded stationary mean of the
/// adaptive one (the matched-budget fairness rule).
fn run_compare_policy(scenario: &Scenario) -> Result<Table, RunError> {
    require_analytic(scenario, "compare-policy")?;
    let series = series_points(scenario);
    let mut columns = vec![scenario.sweep_axis.name().to_string()];
    for &s in &series {
        let suffix = series_suffix(scenario, s);
        columns.push(format!("delta_adaptive{suffix}"));
        columns.push(format!("delta_constant{suffix}"));
        columns.push(format!("m_constant{suffix}"));
        columns.push(format!("e_mstar{suffix}"));
    }

    let points: Vec<(usize, usize)> = (0..scenario.sweep_values.len())
        .flat_map(|i| (0..series.len()).map(move |j| (i, j)))
        .collect();
    let results: Vec<Result<[f64; 4], RunError>> = points
        .par_iter()
        .map(|&(i, j)| {
            let params = params_at(scenario, scenario.sweep_values[i], series[j])?;
            let adaptive = adaptive_policy_table(&params)?;
            let solved_a = evaluate(&params, &adaptive)?;
            let e_mstar = expected_capacity(&solved_a.pi, &adaptive);
            let m_const = (e_mstar.round() as u32).min(params.n);
            let params_c = params.with_m(m_const)?;
            let solved_c = evaluate(&params_c, &PolicyTable::constant(&params_c))?;
            Ok([solved_a.delta, solved_c.delta, m_const as f64, e_mstar])
        })
        .collect();

    let mut rows = Vec::with_capacity(scenario.sweep_values.len());
    let mut it = results.into_iter();
    for &sweep_value in &scenario.sweep_values {
        let mut row = vec![Some(sweep_value)];
        for _ in 0..series.len() {
            let r = it.next().expect("one result per point")?;
            row.extend(r.into_iter().map(Some));
        }
        rows.push(row);
    }
    Ok(Table { columns, rows })
}

/// Executes the scenario and assembles the result table. Deterministic
/// for the analytic engine and for fixed seeds with the Monte-Carlo
/// engines, independent of thread count.
pub fn run_scenario(scenario: &Scenario) -> Result<Table, RunError> {
    if scenario.sweep_values.is_empty() {
        return Err(RunError::Config("sweep values must be nonempty".into()));
    }
    match scenario.metric {
        Metric::Delta => run_delta(scenario),
        Metric::PtHigh => run_pt(scenario, true),
        Metric::PtLow => run_pt(scenario, false),
        Metric::ComparePolicy => run_compare_policy(scenario),
    }
}

/// Formats a value with up to 12 significant digits, trimming trailing
/// zeros; plain decimal notation for moderate magnitudes, scientific
/// otherwise. Locale-independent and deterministic.
pub fn fmt_value(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let exp = v.abs().log10().floor() as i32;
    if (-5..15).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let mut s = format!("{v:.decimals$}");
        if s.contains('.') {
            while s.ends_with('0') {
                s.pop();
            }
            if s.ends_with('.') {
                s.pop();
            }
        }
        s
    } else {
        let mut s = format!("{v:.11e}");
        if let Some(epos) = s.find('e') {
            let (mantissa, exponent) = s.split_at(epos);
            let mut m = mantissa.to_string();
            if m.contains('.') {
                while m.ends_with('0') {
                    m.pop();
                }
                if m.ends_with('.') {
                    m.pop();
                }
            }
            s = format!("{m}{exponent}");
        }
        s
    }
}

/// Renders the table as CSV: header row, comma separator, '.' decimal
/// point, empty field for absent cells.
pub fn to_csv(table: &Table) -> String {
    let mut out = String::new();
    out.push_str(&table.columns.join(","));
    out.push('\n');
    for row in &table.rows {
        let mut first = true;
        for cell in row {
            if !first {
                out.push(',');
            }
            first = false;
            if let Some(v) = cell {
                let _ = write!(out, "{}", fmt_value(*v));
            }
        }
        out.push('\n');
    }
    out
}
