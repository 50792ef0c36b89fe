//! Line-oriented scenario configuration files.
//!
//! UTF-8 text with `[section]` headers and `key = value` lines; `#`
//! starts a comment. Unknown sections or keys are rejected with the
//! offending line number. Numeric lists accept either comma-separated
//! values or inclusive ranges `start:end` / `start:end:step`.

use crate::scenario::{Engine, Metric, PolicyMode, Scenario, SweepAxis};
use dissem_core::{ModelParams, DEFAULT_SOLVE_TOL, DEFAULT_TAIL_TOL};

#[derive(Debug)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn err(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError {
        line: Some(line),
        message: message.into(),
    }
}

fn global_err(message: impl Into<String>) -> ConfigError {
    ConfigError {
        line: None,
        message: message.into(),
    }
}

/// Parses a value list: `1,2,3.5` or `1:60` (step 1) or `0:40:5`.
pub fn parse_values(text: &str, line: usize) -> Result<Vec<f64>, ConfigError> {
    let text = text.trim();
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() > 3 {
            return Err(err(line, format!("bad range '{text}': use start:end[:step]")));
        }
        let num = |s: &str| -> Result<f64, ConfigError> {
            s.trim()
                .parse()
                .map_err(|_| err(line, format!("'{s}' is not a number")))
        };
        let start = num(parts[0])?;
        let end = num(parts[1])?;
        let step = if parts.len() == 3 { num(parts[2])? } else { 1.0 };
        if step <= 0.0 || end < start {
            return Err(err(line, format!("bad range '{text}': need end >= start and step > 0")));
        }
        let count = ((end - start) / step).floor() as usize + 1;
        return Ok((0..count).map(|i| start + i as f64 * step).collect());
    }
    text.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| err(line, format!("'{}' is not a number", s.trim())))
        })
        .collect()
}

#[derive(Default)]
struct Raw {
    entries: Vec<(String, String, String, usize)>, // (section, key, value, line)
}

fn tokenize(text: &str) -> Result<Raw, ConfigError> {
    let mut raw = Raw::default();
    let mut section = String::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| err(lineno, "unterminated section header"))?;
            section = name.trim().to_string();
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(lineno, format!("expected 'key = value', got '{line}'")))?;
        if section.is_empty() {
            return Err(err(lineno, "key before any [section] header"));
        }
        raw.entries.push((
            section.clone(),
            key.trim().to_string(),
            value.trim().to_string(),
            lineno,
        ));
    }
    Ok(raw)
}

/// Parses a scenario config. Every key is optional except the model
/// parameters and the sweep definition; omitted run keys take the
/// documented defaults.
pub fn parse_scenario(text: &str) -> Result<Scenario, ConfigError> {
    let raw = tokenize(text)?;

    let mut n = None;
    let mut m = 0u32;
    let mut p = None;
    let mut lambda_e = None;
    let mut lambda_s = None;
    let mut lambda = 0.0f64;
    let mut tail_tol = DEFAULT_TAIL_TOL;
    let mut solve_tol = DEFAULT_SOLVE_TOL;

    let mut sweep_axis = None;
    let mut sweep_values = Vec::new();
    let mut series_axis = None;
    let mut series_values = Vec::new();
    let mut lambda_s_per_n = false;

    let mut metric = Metric::Delta;
    let mut engine = Engine::Analytic;
    let mut policy = PolicyMode::Constant;
    let mut emit_ng = false;
    let mut fit_grid = None;
    let mut cycles = 100_000u64;
    let mut burn_in = dissem_core::DEFAULT_BURN_IN;
    let mut seed = 0u64;
    let mut output_path = String::new();

    for (section, key, value, line) in &raw.entries {
        let line = *line;
        let parse_f64 = || -> Result<f64, ConfigError> {
            value
                .parse()
                .map_err(|_| err(line, format!("'{value}' is not a number")))
        };
        let parse_u64 = || -> Result<u64, ConfigError> {
            value
                .parse()
                .map_err(|_| err(line, format!("'{value}' is not a nonnegative integer")))
        };
        let parse_u32 = || -> Result<u32, ConfigError> {
            value
                .parse()
                .map_err(|_| err(line, format!("'{value}' is not a nonnegative integer")))
        };
        let parse_bool = || -> Result<bool, ConfigError> {
            match value.as_str() {
                "true" | "yes" | "1" => Ok(true),
                "false" | "no" | "0" => Ok(false),
                _ => Err(err(line, format!("'{value}' is not a boolean"))),
            }
        };
        let parse_axis = || -> Result<SweepAxis, ConfigError> {
            SweepAxis::parse(value).ok_or_else(|| {
                err(
                    line,
                    format!("'{value}' is not an axis (m, lambda, lambda_s, n, p)"),
                )
            })
        };
        match (section.as_str(), key.as_str()) {
            ("model", "n") => n = Some(parse_u32()?),
            ("model", "m") => m = parse_u32()?,
            ("model", "p") => p = Some(parse_f64()?),
            ("model", "lambda_e") => lambda_e = Some(parse_f64()?),
            ("model", "lambda_s") => lambda_s = Some(parse_f64()?),
            ("model", "lambda") => lambda = parse_f64()?,
            ("model", "tail_tol") => tail_tol = parse_f64()?,
            ("model", "solve_tol") => solve_tol = parse_f64()?,
            ("sweep", "axis") => sweep_axis = Some(parse_axis()?),
            ("sweep", "values") => sweep_values = parse_values(value, line)?,
            ("series", "axis") => series_axis = Some(parse_axis()?),
            ("series", "values") => series_values = parse_values(value, line)?,
            ("series", "lambda_s_per_n") => lambda_s_per_n = parse_bool()?,
            ("run", "metric") => {
                metric = match value.as_str() {
                    "delta" => Metric::Delta,
                    "pt-high" => Metric::PtHigh,
                    "pt-low" => Metric::PtLow,
                    "compare-policy" => Metric::ComparePolicy,
                    _ => {
                        return Err(err(
                            line,
                            format!("'{value}' is not a metric (delta, pt-high, pt-low, compare-policy)"),
                        ))
                    }
                }
            }
            ("run", "engine") => {
                engine = match value.as_str() {
                    "analytic" => Engine::Analytic,
                    "paper-faithful-mc" => Engine::PaperFaithfulMc,
                    "event-driven-mc" => Engine::EventDrivenMc,
                    _ => {
                        return Err(err(
                            line,
                            format!("'{value}' is not an engine (analytic, paper-faithful-mc, event-driven-mc)"),
                        ))
                    }
                }
            }
            ("run", "policy") => {
                policy = match value.as_str() {
                    "constant" => PolicyMode::Constant,
                    "adaptive" => PolicyMode::Adaptive,
                    _ => {
                        return Err(err(
                            line,
                            format!("'{value}' is not a policy (constant, adaptive)"),
                        ))
                    }
                }
            }
            ("run", "emit_ng") => emit_ng = parse_bool()?,
            ("run", "fit_grid") => {
                let vals = parse_values(value, line)?;
                let ints: Option<Vec<u32>> = vals
                    .iter()
                    .map(|&v| {
                        if v >= 0.0 && v.fract() == 0.0 {
                            Some(v as u32)
                        } else {
                            None
                        }
                    })
                    .collect();
                let ints =
                    ints.ok_or_else(|| err(line, "fit_grid values must be integers"))?;
                let (lo, hi) = (ints.iter().min(), ints.iter().max());
                fit_grid = Some((*lo.unwrap_or(&0), *hi.unwrap_or(&0)));
            }
            ("run", "cycles") => cycles = parse_u64()?,
            ("run", "burn_in") => burn_in = parse_u64()?,
            ("run", "seed") => seed = parse_u64()?,
            ("output", "path") => output_path = value.clone(),
            _ => {
                return Err(err(
                    line,
                    format!("unknown key '{key}' in section [{section}]"),
                ))
            }
        }
    }

    let n = n.ok_or_else(|| global_err("missing [model] n"))?;
    let p = p.ok_or_else(|| global_err("missing [model] p"))?;
    let lambda_e = lambda_e.ok_or_else(|| global_err("missing [model] lambda_e"))?;
    let lambda_s = lambda_s.ok_or_else(|| global_err("missing [model] lambda_s"))?;
    let base = ModelParams {
        n,
        m,
        p,
        lambda_e,
        lambda_s,
        lambda,
        tail_tol,
        solve_tol,
    }
    .validated()
    .map_err(|e| global_err(format!("invalid [model] parameters: {e}")))?;

    let sweep_axis = sweep_axis.ok_or_else(|| global_err("missing [sweep] axis"))?;
    if sweep_values.is_empty() {
        return Err(global_err("missing or empty [sweep] values"));
    }
    if series_axis.is_some() && series_values.is_empty() {
        return Err(global_err("[series] axis given without values"));
    }

    Ok(Scenario {
        base,
        sweep_axis,
        sweep_values,
        series_axis,
        series_values,
        lambda_s_per_n,
        policy_mode: policy,
        engine,
        metric,
        emit_ng,
        fit_grid,
        cycles,
        burn_in,
        seed,
        output_path,
    })
}
