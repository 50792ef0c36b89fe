//! Named scenario presets reproducing the reference figure data sets.

use crate::scenario::{Engine, Metric, PolicyMode, Scenario, SweepAxis};
use dissem_core::ModelParams;

fn params(n: u32, m: u32, p: f64, lambda_e: f64, lambda_s: f64, lambda: f64) -> ModelParams {
    ModelParams::new(n, m, p, lambda_e, lambda_s, lambda).expect("preset parameters are valid")
}

fn range(start: u32, end: u32, step: u32) -> Vec<f64> {
    (start..=end).step_by(step as usize).map(f64::from).collect()
}

fn blank(base: ModelParams, sweep_axis: SweepAxis, sweep_values: Vec<f64>) -> Scenario {
    Scenario {
        base,
        sweep_axis,
        sweep_values,
        series_axis: None,
        series_values: vec![],
        lambda_s_per_n: false,
        policy_mode: PolicyMode::Constant,
        engine: Engine::Analytic,
        metric: Metric::Delta,
        emit_ng: false,
        fit_grid: None,
        cycles: 100_000,
        burn_in: dissem_core::DEFAULT_BURN_IN,
        seed: 0,
        output_path: String::new(),
    }
}

/// All preset names, in figure order.
pub const PRESET_NAMES: [&str; 8] = [
    "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9",
];

/// One-line description of each preset for `--list` output.
pub fn describe(name: &str) -> Option<&'static str> {
    Some(match name {
        "fig2" => "error vs capacity m (1..60), gossip rate series {0, 10, 20}",
        "fig3" => "error vs gossip rate (0..40), capacity series {5, 10, 15}",
        "fig4" => "error vs source rate (1..400), capacity series {5, 10, 15}",
        "fig5" => "error vs network size (10..150), source rate coupled as c*n, c in {0.1, 0.2, 0.5}",
        "fig6" => "per-state adoption probabilities vs low gossip rates {0.1, 0.5, 1}",
        "fig7" => "per-state adoption probabilities vs high gossip rates {20, 200, 400} with step limit",
        "fig8" => "gossip gain vs capacity m (1..20), change-probability series {0.3, 0.5, 0.7}, fitted scaling",
        "fig9" => "adaptive vs matched-constant policy over source rates, gossip series {0, 1, 5}",
        _ => return None,
    })
}

/// Returns the named preset scenario with its default output file name.
pub fn preset(name: &str) -> Option<Scenario> {
    let mut s = match name {
        "fig2" => {
            let mut s = blank(
                params(60, 1, 0.4, 1.0, 10.0, 0.0),
                SweepAxis::M,
                range(1, 60, 1),
            );
            s.series_axis = Some(SweepAxis::Lambda);
            s.series_values = vec![0.0, 10.0, 20.0];
            s
        }
        "fig3" => {
            let mut s = blank(
                params(60, 5, 0.4, 1.0, 10.0, 0.0),
                SweepAxis::Lambda,
                range(0, 40, 1),
            );
            s.series_axis = Some(SweepAxis::M);
            s.series_values = vec![5.0, 10.0, 15.0];
            s
        }
        "fig4" => {
            let mut s = blank(
                params(60, 5, 0.2, 1.0, 1.0, 5.0),
                SweepAxis::LambdaS,
                range(1, 400, 1),
            );
            s.series_axis = Some(SweepAxis::M);
            s.series_values = vec![5.0, 10.0, 15.0];
            s
        }
        "fig5" => {
            let mut s = blank(
                params(60, 8, 0.2, 1.0, 6.0, 10.0),
                SweepAxis::N,
                range(10, 150, 10),
            );
            s.series_axis = Some(SweepAxis::LambdaS);
            s.series_values = vec![0.1, 0.2, 0.5];
            s.lambda_s_per_n = true;
            s
        }
        "fig6" => {
            // Same base as fig7 with the gossip rate lowered.
            let mut s = blank(
                params(200, 20, 0.2, 1.0, 2.0, 0.1),
                SweepAxis::Lambda,
                vec![0.1, 0.5, 1.0],
            );
            s.metric = Metric::PtLow;
            s
        }
        "fig7" => {
            let mut s = blank(
                params(200, 20, 0.2, 1.0, 2.0, 20.0),
                SweepAxis::Lambda,
                vec![20.0, 200.0, 400.0],
            );
            s.metric = Metric::PtHigh;
            s
        }
        "fig8" => {
            let mut s = blank(
                params(80, 1, 0.3, 1.0, 10.0, 0.4),
                SweepAxis::M,
                range(1, 20, 1),
            );
            s.series_axis = Some(SweepAxis::P);
            s.series_values = vec![0.3, 0.5, 0.7];
            s.emit_ng = true;
            s.fit_grid = Some((2, 20));
            s
        }
        "fig9" => {
            let mut s = blank(
                params(60, 1, 0.2, 1.0, 1.0, 0.0),
                SweepAxis::LambdaS,
                vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 200.0],
            );
            s.series_axis = Some(SweepAxis::Lambda);
            s.series_values = vec![0.0, 1.0, 5.0];
            s.metric = Metric::ComparePolicy;
            s
        }
        _ => return None,
    };
    s.output_path = format!("{name}.csv");
    Some(s)
}
