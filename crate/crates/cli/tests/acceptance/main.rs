//! Acceptance gate: one test per numbered criterion, each printing a
//! pass/fail line per sub-check (visible with --nocapture, and always
//! visible on failure). Tolerances are pinned inline.

mod oracle;

use dissem_cli::scenario::{run_scenario, to_csv, Engine, Metric, PolicyMode, Scenario, SweepAxis};
use dissem_core::{
    adaptive_policy_table, adopt_prob, build_chain, evaluate, expected_capacity, fit_scaling_b,
    ks_pmf, m_star, ndp_given_n_pmf, no_gossip_baseline, nprime_pmf, pt_low_approx, stationary,
    McMode, ModelParams, PolicyTable,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Checks {
    name: &'static str,
    failures: Vec<String>,
}

impl Checks {
    fn new(name: &'static str) -> Self {
        Checks {
            name,
            failures: Vec::new(),
        }
    }

    fn check(&mut self, label: &str, ok: bool, detail: String) {
        println!(
            "[{}] {label}: {} — {detail}",
            self.name,
            if ok { "pass" } else { "FAIL" }
        );
        if !ok {
            self.failures.push(format!("{label} — {detail}"));
        }
    }

    fn finish(self) {
        if self.failures.is_empty() {
            println!("[{}] PASS", self.name);
        } else {
            panic!(
                "[{}] failed sub-checks:\n  {}",
                self.name,
                self.failures.join("\n  ")
            );
        }
    }
}

fn delta_at(params: &ModelParams) -> f64 {
    evaluate(params, &PolicyTable::constant(params))
        .expect("chain solve")
        .delta
}

fn argmin<I: Iterator<Item = (u32, f64)>>(iter: I) -> (u32, f64) {
    iter.min_by(|a, b| a.1.partial_cmp(&b.1).expect("finite"))
        .expect("nonempty")
}

#[test]
fn criterion_01_chain_soundness() {
    let mut c = Checks::new("criterion 1");
    for n in [4u32, 20, 60] {
        let m = (n / 10).max(1);
        let params = ModelParams::new(n, m, 0.3, 1.0, 5.0, 2.0).unwrap();
        let matrix = build_chain(&params, &PolicyTable::constant(&params)).unwrap();
        let worst_row = matrix
            .row_sums()
            .iter()
            .map(|s| (s - 1.0).abs())
            .fold(0.0, f64::max);
        c.check(
            &format!("n={n} row sums"),
            worst_row <= 1e-11,
            format!("max |sum-1| = {worst_row:.3e} (tol 1e-11)"),
        );
        let pi = stationary(&matrix, params.solve_tol).unwrap();
        c.check(
            &format!("n={n} residual"),
            pi.residual <= 1e-12,
            format!("|pi P - pi|_inf = {:.3e} (tol 1e-12)", pi.residual),
        );
        let half = pi.pi.len() / 2;
        let sym = (0..half)
            .map(|j| (pi.pi[j] - pi.pi[half + j]).abs())
            .fold(0.0, f64::max);
        c.check(
            &format!("n={n} bit symmetry"),
            sym <= 1e-10,
            format!("max |pi_0j - pi_1j| = {sym:.3e} (tol 1e-10)"),
        );
    }
    c.finish();
}

#[test]
fn criterion_02_small_scale_oracle() {
    let mut c = Checks::new("criterion 2");
    for (n, m) in [(4u32, 1u32), (5, 0), (5, 2), (6, 2)] {
        let params = ModelParams::new(n, m, 0.4, 1.0, 3.0, 1.0).unwrap();
        let (rho_s, rho_g) = oracle::ratios_rat(&params);
        let k_max = params.ratios().k_max;
        let mut worst = 0.0f64;
        for big_n in 0..=n {
            let ks = ks_pmf(&params, big_n).unwrap();
            let exact = oracle::ks_rat(n, m, big_n, &rho_s);
            for (k, w) in exact.iter().enumerate() {
                let want = num_traits::ToPrimitive::to_f64(w).unwrap();
                worst = worst.max((ks.prob(k as i64) - want).abs());
            }
            if big_n + m < n {
                let np = nprime_pmf(&params, big_n).unwrap();
                let exact = oracle::nprime_rat(n, m, big_n, &rho_g, k_max);
                worst = worst.max(oracle::max_gap(&np, &exact));
            }
            let ndp = ndp_given_n_pmf(&params, big_n).unwrap();
            let exact = oracle::ndp_rat(n, m, big_n, &rho_s, &rho_g, k_max);
            assert!(exact.iter().all(oracle::rational_is_probability));
            worst = worst.max(oracle::max_gap(&ndp, &exact));
        }
        c.check(
            &format!("n={n} m={m} laws vs exact rationals"),
            worst <= 1e-10,
            format!("max pmf gap = {worst:.3e} (tol 1e-10)"),
        );
    }

    let params = ModelParams::new(6, 2, 0.4, 1.0, 3.0, 1.0).unwrap();
    let policy = PolicyTable::constant(&params);
    let delta = evaluate(&params, &policy).unwrap().delta;
    let est = dissem_core::estimate_error(
        &params,
        &policy,
        McMode::PaperFaithful,
        1_000_000,
        1_000,
        2024,
    );
    let gap = (delta - est.mean_error).abs();
    c.check(
        "chain delta vs Monte-Carlo",
        gap <= 3.0 * est.std_error,
        format!(
            "analytic {delta:.6} vs mc {:.6} ± {:.6} (3 SE = {:.6})",
            est.mean_error,
            est.std_error,
            3.0 * est.std_error
        ),
    );
    c.finish();
}

#[test]
fn criterion_03_fig4_asymptotes() {
    let mut c = Checks::new("criterion 3");
    for (m, target) in [(5u32, 0.348), (10, 0.21), (15, 0.144)] {
        let params = ModelParams::new(60, m, 0.2, 1.0, 400.0, 5.0).unwrap();
        let delta = delta_at(&params);
        c.check(
            &format!("m={m} asymptote"),
            (delta - target).abs() <= 0.01,
            format!("delta = {delta:.4}, target {target} ± 0.01"),
        );
    }
    c.finish();
}

#[test]
fn criterion_04_fig2_structure() {
    let mut c = Checks::new("criterion 4");
    let base = ModelParams::new(60, 1, 0.4, 1.0, 10.0, 0.0).unwrap();
    let lambdas = [0.0f64, 10.0, 20.0];
    let mut curves = Vec::new();
    for &lam in &lambdas {
        let curve: Vec<(u32, f64)> = (1..=60)
            .map(|m| {
                let params = base.with_m(m).unwrap().with_lambda(lam).unwrap();
                (m, delta_at(&params))
            })
            .collect();
        curves.push(curve);
    }
    let (arg10, min10) = argmin(curves[1].iter().copied());
    c.check(
        "argmin m at lambda=10",
        (23..=27).contains(&arg10),
        format!("argmin = {arg10} (delta {min10:.5}), expect 25 ± 2"),
    );
    let (arg0, min0) = argmin(curves[0].iter().copied());
    c.check(
        "argmin m at lambda=0",
        (53..=57).contains(&arg0),
        format!("argmin = {arg0} (delta {min0:.5}), expect 55 ± 2"),
    );
    let overlap = (40..=60)
        .map(|m| {
            let vals: Vec<f64> = curves.iter().map(|c| c[m - 1].1).collect();
            let hi = vals.iter().cloned().fold(f64::MIN, f64::max);
            let lo = vals.iter().cloned().fold(f64::MAX, f64::min);
            hi - lo
        })
        .fold(0.0, f64::max);
    c.check(
        "curves overlap for m >= 40",
        overlap <= 2e-3,
        format!("max spread = {overlap:.2e} (tol 2e-3)"),
    );
    let ordered = (1..=5).all(|m| {
        let d0 = curves[0][m - 1].1;
        let d10 = curves[1][m - 1].1;
        let d20 = curves[2][m - 1].1;
        d0 < d10 && d10 < d20
    });
    c.check(
        "gossip harmful for m <= 5",
        ordered,
        "delta(0) < delta(10) < delta(20) for m = 1..5".to_string(),
    );
    c.finish();
}

#[test]
fn criterion_05_fig3_optima() {
    let mut c = Checks::new("criterion 5");
    let base = ModelParams::new(60, 5, 0.4, 1.0, 10.0, 0.0).unwrap();
    for (m, expected) in [(5u32, vec![1u32]), (10, vec![3]), (15, vec![6, 7])] {
        let (arg, min) = argmin((0..=40).map(|lam| {
            let params = base.with_m(m).unwrap().with_lambda(lam as f64).unwrap();
            (lam, delta_at(&params))
        }));
        c.check(
            &format!("argmin lambda at m={m}"),
            expected.contains(&arg),
            format!("argmin = {arg} (delta {min:.6}), expect {expected:?}"),
        );
    }
    c.finish();
}

#[test]
fn criterion_06_lemma2_limit() {
    let mut c = Checks::new("criterion 6");
    let params = ModelParams::new(200, 20, 0.2, 1.0, 2.0, 400.0).unwrap();
    let worst_low = (0..=70)
        .map(|big_n| adopt_prob(&params, big_n, false).unwrap())
        .fold(0.0, f64::max);
    c.check(
        "adopt(false) <= 0.05 for N <= 70",
        worst_low <= 0.05,
        format!("max over N <= 70 is {worst_low:.4}"),
    );
    let worst_high = (90..=179)
        .map(|big_n| adopt_prob(&params, big_n, false).unwrap())
        .fold(1.0, f64::min);
    c.check(
        "adopt(false) >= 0.95 for N >= 90",
        worst_high >= 0.95,
        format!("min over N >= 90 is {worst_high:.4}"),
    );
    let mid = adopt_prob(&params, 80, false).unwrap();
    c.check(
        "adopt(false) at N = 80",
        (mid - 0.5).abs() <= 0.01,
        format!("value {mid:.4}, expect 0.5 ± 0.01"),
    );
    c.finish();
}

#[test]
fn criterion_07_lemma3_bound() {
    let mut c = Checks::new("criterion 7");
    for lam in [0.05f64, 0.1, 0.5] {
        let params = ModelParams::new(200, 20, 0.2, 1.0, 2.0, lam).unwrap();
        let rho_g = params.ratios().rho_g;
        let mut worst_excess = f64::MIN;
        for big_n in 0..=179 {
            let exact = adopt_prob(&params, big_n, false).unwrap();
            let approx = pt_low_approx(&params, big_n, false).unwrap();
            let bound = (1.0 + (big_n + 20) as f64 / 200.0) * rho_g * rho_g;
            worst_excess = worst_excess.max((exact - approx).abs() - bound);
        }
        c.check(
            &format!("lambda={lam} bound"),
            worst_excess <= 0.0,
            format!("max(|gap| - bound) = {worst_excess:.3e}"),
        );
    }
    c.finish();
}

#[test]
fn criterion_08_m_star_properties() {
    let mut c = Checks::new("criterion 8");
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    let mut root_ok = true;
    let mut match_worst = 0.0f64;
    let mut companion_ok = true;
    for _ in 0..100 {
        let n = rng.gen_range(5u32..120);
        let big_n = rng.gen_range(0..n);
        let lambda_s = rng.gen_range(0.2f64..50.0);
        let params = ModelParams::new(n, 0, 0.3, 1.0, lambda_s, 1.0).unwrap();
        let (root, _) = m_star(&params, big_n).unwrap();
        let half = (n - big_n) as f64 / 2.0;
        root_ok &= (0.0..=half + 1e-12).contains(&root);

        let rho_s = params.ratios().rho_s;
        let log_rho = rho_s.ln();
        let free = (n - big_n) as f64;
        let numeric = oracle::golden_max(
            |m| m * (free - m) * (m * log_rho).exp(),
            0.0,
            free,
            1e-10,
        );
        match_worst = match_worst.max((numeric - root).abs());

        let inv = 1.0 / log_rho;
        let companion = half - inv + (half * half + inv * inv).sqrt();
        companion_ok &= companion > free;
    }
    c.check(
        "root in [0, (n-N)/2]",
        root_ok,
        "100 random parameter points".to_string(),
    );
    c.check(
        "matches numerical maximizer",
        match_worst <= 1e-6,
        format!("max |closed form - golden section| = {match_worst:.3e} (tol 1e-6)"),
    );
    c.check(
        "discarded root exceeds n - N",
        companion_ok,
        "second quadratic root checked at all 100 points".to_string(),
    );
    let mut table_ok = true;
    for lambda_s in [2.0f64, 10.0, 100.0] {
        let params = ModelParams::new(60, 0, 0.3, 1.0, lambda_s, 1.0).unwrap();
        let caps = adaptive_policy_table(&params).unwrap();
        table_ok &= caps.capacities().windows(2).all(|w| w[1] <= w[0]);
    }
    c.check(
        "adaptive table nonincreasing in N",
        table_ok,
        "lambda_s in {2, 10, 100}, n = 60".to_string(),
    );
    c.finish();
}

#[test]
fn criterion_09_fig9_policy_comparison() {
    let mut c = Checks::new("criterion 9");
    let grid = [1.0f64, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 200.0];
    let lambdas = [0.0f64, 1.0, 5.0];
    let mut dominance_violations = Vec::new();
    let mut e_mstar_by_ls: Vec<Vec<f64>> = Vec::new();
    for &ls in &grid {
        let mut row = Vec::new();
        for &lam in &lambdas {
            let params = ModelParams::new(60, 0, 0.2, 1.0, ls, lam).unwrap();
            let adaptive = adaptive_policy_table(&params).unwrap();
            let solved_a = evaluate(&params, &adaptive).unwrap();
            let e_mstar = expected_capacity(&solved_a.pi, &adaptive);
            row.push(e_mstar);
            let m_const = (e_mstar.round() as u32).min(60);
            let params_c = params.with_m(m_const).unwrap();
            let delta_c = delta_at(&params_c);
            if solved_a.delta > delta_c + 1e-12 {
                dominance_violations.push(format!(
                    "lambda_s={ls} lambda={lam}: adaptive {:.6} > constant {delta_c:.6} (m={m_const})",
                    solved_a.delta
                ));
            }
        }
        e_mstar_by_ls.push(row);
    }
    c.check(
        "adaptive <= constant everywhere",
        dominance_violations.is_empty(),
        if dominance_violations.is_empty() {
            "27 grid points".to_string()
        } else {
            dominance_violations.join("; ")
        },
    );
    let monotone = e_mstar_by_ls
        .iter()
        .all(|row| row.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    c.check(
        "E[m*] nonincreasing in lambda",
        monotone,
        "at every fixed lambda_s".to_string(),
    );
    c.finish();
}

#[test]
fn criterion_10_b_fit_and_gain_peak() {
    let mut c = Checks::new("criterion 10");
    let grid: Vec<u32> = (2..=20).collect();
    let mut fits = Vec::new();
    for p in [0.3f64, 0.5, 0.7] {
        let params = ModelParams::new(80, 1, p, 1.0, 10.0, 0.4).unwrap();
        fits.push(fit_scaling_b(&params, &grid).unwrap());

        let (peak, gain) = (1u32..=20)
            .map(|m| {
                let pm = params.with_m(m).unwrap();
                let policy = PolicyTable::constant(&pm);
                let delta = evaluate(&pm, &policy).unwrap().delta;
                let ng = no_gossip_baseline(&pm, &policy).unwrap();
                (m, (delta - ng).abs())
            })
            .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap();
        c.check(
            &format!("gain peak at p={p}"),
            (7..=9).contains(&peak),
            format!("argmax m = {peak} (gain {gain:.5}), expect 8 ± 1"),
        );
    }
    c.check(
        "B at p=0.5",
        (fits[1] - 1.1).abs() <= 0.2,
        format!("B = {:.3}, expect 1.1 ± 0.2", fits[1]),
    );
    c.check(
        "B at p=0.7",
        (fits[2] - 0.8).abs() <= 0.2,
        format!("B = {:.3}, expect 0.8 ± 0.2", fits[2]),
    );
    c.check(
        "B strictly decreasing in p",
        fits[0] > fits[1] && fits[1] > fits[2],
        format!("B = {:.3}, {:.3}, {:.3}", fits[0], fits[1], fits[2]),
    );
    c.finish();
}

#[test]
fn criterion_11_csv_determinism() {
    let mut c = Checks::new("criterion 11");
    // Full binary path: identical bytes from two runs of a preset.
    let dir = tempfile::tempdir().unwrap();
    let out_a = dir.path().join("a.csv");
    let out_b = dir.path().join("b.csv");
    for out in [&out_a, &out_b] {
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_dissem"))
            .args(["preset", "fig6", "--out"])
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    let (a, b) = (std::fs::read(&out_a).unwrap(), std::fs::read(&out_b).unwrap());
    c.check(
        "analytic preset byte-identical",
        a == b,
        format!("{} bytes each", a.len()),
    );
    assert!(!a.is_empty());

    // Monte-Carlo scenario with a fixed seed, repeated in-process.
    let scenario = Scenario {
        base: ModelParams::new(12, 3, 0.3, 1.0, 4.0, 2.0).unwrap(),
        sweep_axis: SweepAxis::M,
        sweep_values: vec![1.0, 3.0, 5.0],
        series_axis: None,
        series_values: vec![],
        lambda_s_per_n: false,
        policy_mode: PolicyMode::Constant,
        engine: Engine::PaperFaithfulMc,
        metric: Metric::Delta,
        emit_ng: false,
        fit_grid: None,
        cycles: 20_000,
        burn_in: 500,
        seed: 7,
        output_path: String::new(),
    };
    let first = to_csv(&run_scenario(&scenario).unwrap());
    let second = to_csv(&run_scenario(&scenario).unwrap());
    c.check(
        "seeded Monte-Carlo byte-identical",
        first == second,
        format!("{} bytes each", first.len()),
    );
    c.finish();
}
