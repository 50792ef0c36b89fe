//! Command-line entry point.
//!
//! Exit codes: 0 success, 2 configuration error, 3 I/O error,
//! 4 numerical non-convergence.

use clap::{Args, Parser, Subcommand};
use dissem_cli::{config, presets, scenario};
use dissem_core::{
    adaptive_policy_table, evaluate, expected_capacity, ModelParams, PolicyTable,
};
use scenario::{fmt_value, Engine, RunError, Scenario};
use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "dissem", version, about = "Source/gossip dissemination model sweeps")]
struct Cli {
    /// Base RNG seed for Monte-Carlo engines.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output CSV path (overrides the scenario's own path); '-' for stdout.
    #[arg(long, global = true)]
    out: Option<String>,
    /// Worker threads for sweep evaluation (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario described by a config file.
    Run {
        /// Path to the scenario config.
        config: String,
    },
    /// Run a named figure preset.
    Preset {
        /// Preset name (fig2..fig9); see --list.
        name: Option<String>,
        /// List available presets and exit.
        #[arg(long)]
        list: bool,
        /// Override the retained Monte-Carlo cycles.
        #[arg(long)]
        cycles: Option<u64>,
        /// Override the burn-in cycles.
        #[arg(long)]
        burn_in: Option<u64>,
        /// Override the engine (analytic, paper-faithful-mc, event-driven-mc).
        #[arg(long)]
        engine: Option<String>,
    },
    /// Monte-Carlo estimate at a single parameter point.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        /// Simulation mode: paper-faithful or event-driven.
        #[arg(long, default_value = "paper-faithful")]
        mode: String,
        /// Use the adaptive capacity policy instead of constant m.
        #[arg(long)]
        adaptive: bool,
        /// Retained cycles.
        #[arg(long, default_value_t = 100_000)]
        cycles: u64,
        /// Discarded warm-up cycles.
        #[arg(long, default_value_t = dissem_core::DEFAULT_BURN_IN)]
        burn_in: u64,
        /// Write a per-cycle trace CSV (cycle_index, x_s, N, N_end, error).
        #[arg(long)]
        trace: Option<String>,
    },
    /// Adaptive versus matched-constant policy at a single point.
    ComparePolicy {
        #[command(flatten)]
        model: ModelArgs,
    },
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long)]
    n: u32,
    #[arg(long, default_value_t = 0)]
    m: u32,
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda_e: f64,
    #[arg(long)]
    lambda_s: f64,
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
}

impl ModelArgs {
    fn build(&self) -> Result<ModelParams, RunError> {
        ModelParams::new(
            self.n,
            self.m,
            self.p,
            self.lambda_e,
            self.lambda_s,
            self.lambda,
        )
        .map_err(RunError::Model)
    }
}

fn write_output(path: &str, contents: &str) -> Result<(), ExitCode> {
    let result = if path == "-" {
        std::io::stdout().write_all(contents.as_bytes())
    } else {
        std::fs::write(path, contents)
    };
    result.map_err(|e| {
        eprintln!("error: cannot write '{path}': {e}");
        ExitCode::from(3)
    })
}

fn finish_scenario(scenario: &Scenario, out: Option<String>) -> ExitCode {
    let started = Instant::now();
    let table = match scenario::run_scenario(scenario) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(scenario::exit_code(&e) as u8);
        }
    };
    let path = out.unwrap_or_else(|| {
        if scenario.output_path.is_empty() {
            "-".to_string()
        } else {
            scenario.output_path.clone()
        }
    });
    if let Err(code) = write_output(&path, &scenario::to_csv(&table)) {
        return code;
    }
    // Timing goes to stderr so the CSV artifact stays byte-reproducible.
    eprintln!(
        "wrote {} rows to {path} in {:.3}s",
        table.rows.len(),
        started.elapsed().as_secs_f64()
    );
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: cannot configure {threads} threads: {e}");
            return ExitCode::from(2);
        }
    }

    match cli.command {
        Command::Run { config: path } => {
            let text = match std::fs::read_to_string(&path) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: cannot read '{path}': {e}");
                    return ExitCode::from(3);
                }
            };
            let mut scenario = match config::parse_scenario(&text) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: {path}: {e}");
                    return ExitCode::from(2);
                }
            };
            if let Some(seed) = cli.seed {
                scenario.seed = seed;
            }
            finish_scenario(&scenario, cli.out)
        }
        Command::Preset {
            name,
            list,
            cycles,
            burn_in,
            engine,
        } => {
            if list {
                for n in presets::PRESET_NAMES {
                    println!("{n}: {}", presets::describe(n).unwrap_or(""));
                }
                return ExitCode::SUCCESS;
            }
            let Some(name) = name else {
                eprintln!("error: preset name required (or --list)");
                return ExitCode::from(2);
            };
            let Some(mut scenario) = presets::preset(&name) else {
                eprintln!("error: unknown preset '{name}'; try --list");
                return ExitCode::from(2);
            };
            if let Some(c) = cycles {
                scenario.cycles = c;
            }
            if let Some(b) = burn_in {
                scenario.burn_in = b;
            }
            if let Some(e) = engine {
                scenario.engine = match e.as_str() {
                    "analytic" => Engine::Analytic,
                    "paper-faithful-mc" => Engine::PaperFaithfulMc,
                    "event-driven-mc" => Engine::EventDrivenMc,
                    _ => {
                        eprintln!("error: unknown engine '{e}'");
                        return ExitCode::from(2);
                    }
                };
            }
            if let Some(seed) = cli.seed {
                scenario.seed = seed;
            }
            finish_scenario(&scenario, cli.out)
        }
        Command::Simulate {
            model,
            mode,
            adaptive,
            cycles,
            burn_in,
            trace,
        } => {
            let params = match model.build() {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            let mc_mode = match mode.as_str() {
                "paper-faithful" => dissem_core::McMode::PaperFaithful,
                "event-driven" => dissem_core::McMode::EventDriven,
                _ => {
                    eprintln!("error: unknown mode '{mode}'");
                    return ExitCode::from(2);
                }
            };
            let policy = if adaptive {
                match adaptive_policy_table(&params) {
                    Ok(p) => p,
                    Err(e) => {
                        eprintln!("error: {e}");
                        return ExitCode::from(2);
                    }
                }
            } else {
                PolicyTable::constant(&params)
            };
            let seed = cli.seed.unwrap_or(0);
            let mut trace_csv = trace
                .as_ref()
                .map(|_| String::from("cycle_index,x_s,N,N_end,error\n"));
            let est = dissem_core::estimate_error_traced(
                &params,
                &policy,
                mc_mode,
                cycles,
                burn_in,
                seed,
                |state, rec| {
                    if let Some(csv) = trace_csv.as_mut() {
                        csv.push_str(&format!(
                            "{},{},{},{},{}\n",
                            state.cycle_index,
                            state.source_bit,
                            rec.n_start,
                            rec.n_end,
                            fmt_value(rec.error)
                        ));
                    }
                },
            );
            if let (Some(path), Some(csv)) = (trace, trace_csv) {
                if let Err(code) = write_output(&path, &csv) {
                    return code;
                }
            }
            let summary = format!(
                "mean_error,std_error,cycles,burn_in,seed,mode\n{},{},{},{},{},{}\n",
                fmt_value(est.mean_error),
                fmt_value(est.std_error),
                est.cycles,
                est.burn_in,
                est.seed,
                est.mode.as_str()
            );
            match write_output(&cli.out.unwrap_or_else(|| "-".into()), &summary) {
                Ok(()) => ExitCode::SUCCESS,
                Err(code) => code,
            }
        }
        Command::ComparePolicy { model } => {
            let result = (|| -> Result<String, RunError> {
                let params = model.build()?;
                let adaptive = adaptive_policy_table(&params)?;
                let solved_a = evaluate(&params, &adaptive)?;
                let e_mstar = expected_capacity(&solved_a.pi, &adaptive);
                let m_const = (e_mstar.round() as u32).min(params.n);
                let params_c = params.with_m(m_const)?;
                let solved_c = evaluate(&params_c, &PolicyTable::constant(&params_c))?;
                Ok(format!(
                    "delta_adaptive,delta_constant,m_constant,e_mstar\n{},{},{},{}\n",
                    fmt_value(solved_a.delta),
                    fmt_value(solved_c.delta),
                    m_const,
                    fmt_value(e_mstar)
                ))
            })();
            match result {
                Ok(csv) => match write_output(&cli.out.unwrap_or_else(|| "-".into()), &csv) {
                    Ok(()) => ExitCode::SUCCESS,
                    Err(code) => code,
                },
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(scenario::exit_code(&e) as u8)
                }
            }
        }
    }
}
