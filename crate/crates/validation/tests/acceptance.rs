//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use levy_langevin::analysis::{
    dissipation_probe, h_eps, residual_sweep, tail_test, DampedStable, ExperimentConfig, NoiseSpec,
};
use levy_langevin::dynamics::FlowBranch;
use levy_langevin::limits::{limit_power_gaps, stable_filter_params};
use levy_langevin::noise::{EllSchedule, TruncatedStableFamily};
use levy_langevin::{
    flow_displacement, flow_velocity, limit_log_signs, rescale_to_y, solve_exact, solve_oracle, Jump, JumpPath,
    StreamId, SystemParams,
};
use rand::Rng;

// criterion 1
const ORACLE_SCENARIOS: usize = 50;
const ORACLE_BETAS: [f64; 7] = [-0.5, 0.0, 0.5, 1.0, 1.5, 2.5, 3.0];
const ORACLE_MAX_JUMPS: usize = 10;
const ORACLE_DT_OVER_EPS: f64 = 1e-6;
const ORACLE_GAP: f64 = 1e-5;
const ORACLE_TIME: Duration = Duration::from_secs(30);
// criterion 2
const RESIDUAL_BETAS: [f64; 3] = [0.0, 0.5, 1.5];
const RESIDUAL_EPS: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];
const RESIDUAL_PATHS: usize = 200;
const RESIDUAL_FINAL: f64 = 1e-2;
const RESIDUAL_TIME: Duration = Duration::from_secs(60);
// criterion 3
const LOG_EPS: [f64; 7] = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8];
const LOG_FINAL_REL: f64 = 0.2;
// criterion 4
const POWER_EPS: f64 = 1e-6;
const POWER_REL: f64 = 0.01;
// criterion 5
const FILTER_PATHS: usize = 10_000;
const FILTER_EPS: f64 = 1e-3;
const FILTER_ELL: f64 = 1e-3;
const FILTER_HILL: (f64, f64) = (0.65, 0.85);
const FILTER_TIME: Duration = Duration::from_secs(120);
// criterion 6
const H_ODD_TOL: f64 = 1e-8;
const H_REGULAR_LEVEL: f64 = 1e-3;
const H_REGULAR_N: i32 = 12;
const H_BLOWUP_FACTOR: f64 = 10.0;
const H_TRAPEZOID_TOL: f64 = 1e-6;
const H_QUAD_TOL: f64 = 1e-10;
// criterion 7
const DISSIPATION_PATHS: usize = 2000;
const DISSIPATION_EPS: [f64; 3] = [1e-1, 1e-2, 1e-3];
const DISSIPATION_DELTA: f64 = 0.1;
const DISSIPATION_SE: f64 = 2.0;
// criterion 8
const SEMIGROUP_REL: f64 = 1e-12;
const ADDITIVITY_REL: f64 = 1e-10;
const RESCALING_REL: f64 = 1e-9;
const INVARIANT_CASES: u32 = 2000;
const INVARIANT_TIME: Duration = Duration::from_secs(60);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn stream(group: u32, index: u32) -> levy_langevin::rng::Stream {
    StreamId::new(20_261_014, group, index).rng()
}

fn fixture(events: &[(f64, f64)]) -> JumpPath {
    JumpPath::new(1.0, events.iter().map(|&(tau, size)| Jump { tau, size }).collect()).unwrap()
}

fn stable_family(alpha: f64, ell: EllSchedule) -> NoiseSpec {
    NoiseSpec::TruncatedStable(TruncatedStableFamily { alpha, c: 1.0, ell })
}

fn random_path(rng: &mut impl Rng, max_jumps: usize) -> JumpPath {
    let n = rng.random_range(0..=max_jumps);
    let mut taus: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0)).collect();
    taus.sort_by(f64::total_cmp);
    taus.dedup();
    let events = taus
        .into_iter()
        .map(|tau| {
            let m: f64 = rng.random_range(0.1..2.0);
            Jump { tau, size: if rng.random::<bool>() { m } else { -m } }
        })
        .collect();
    JumpPath::new(1.0, events).unwrap()
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = stream(1, 0);
    let grid: Vec<f64> = (1..=20).map(|i| i as f64 * 0.05).collect();
    let mut worst = 0.0_f64;
    for i in 0..ORACLE_SCENARIOS {
        let beta = ORACLE_BETAS[i % ORACLE_BETAS.len()];
        let eps = rng.random_range(0.2..1.0);
        let p = SystemParams::new(beta, eps, rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)).unwrap();
        let noise = random_path(&mut rng, ORACLE_MAX_JUMPS);
        let exact = solve_exact(&noise, &p, &grid).unwrap();
        let oracle = solve_oracle(&noise, &p, ORACLE_DT_OVER_EPS * eps, &grid).unwrap();
        for k in 0..grid.len() {
            worst = worst.max((exact.x[k] - oracle.x[k]).abs()).max((exact.v[k] - oracle.v[k]).abs());
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst < ORACLE_GAP && elapsed < ORACLE_TIME,
        format!("max sup-gap {worst:.3e} (< {ORACLE_GAP:e}), {:.1}s", elapsed.as_secs_f64()),
    )
}

fn pathwise_residual_decay() -> Outcome {
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for beta in RESIDUAL_BETAS {
        let cfg = ExperimentConfig::new(
            stable_family(1.2, EllSchedule::default()),
            beta,
            RESIDUAL_EPS.to_vec(),
            1.0,
            RESIDUAL_PATHS,
            2,
        );
        let rows = residual_sweep(&cfg, 1.0).unwrap();
        let medians: Vec<f64> = rows.iter().map(|r| r.median).collect();
        let ok = medians.windows(2).all(|w| w[1] < w[0]) && medians[medians.len() - 1] < RESIDUAL_FINAL;
        pass &= ok;
        let listed: Vec<String> = medians.iter().map(|m| format!("{m:.2e}")).collect();
        parts.push(format!("beta={beta}: [{}] {}", listed.join(", "), if ok { "ok" } else { "no" }));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < RESIDUAL_TIME;
    outcome(pass, format!("{}; {:.1}s", parts.join("; "), elapsed.as_secs_f64()))
}

fn log_scaling() -> Outcome {
    let fixtures: [[(f64, f64); 3]; 3] = [
        [(0.2, 1.0), (0.5, 2.0), (0.75, 0.5)],
        [(0.2, 1.0), (0.5, 2.0), (0.75, -0.5)],
        [(0.1, -1.5), (0.45, -0.8), (0.7, -1.2)],
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, f) in fixtures.iter().enumerate() {
        let noise = fixture(f);
        let v0 = 1.0;
        let limit = limit_log_signs(&noise, v0, &[1.0]).unwrap().values[0];
        let errs: Vec<f64> = LOG_EPS
            .iter()
            .map(|&eps| {
                let p = SystemParams::new(2.0, eps, 0.0, v0).unwrap();
                let x = solve_exact(&noise, &p, &[1.0]).unwrap().x[0];
                ((x / (1.0f64 / eps).ln() - limit) / limit).abs()
            })
            .collect();
        let ok = errs.windows(2).all(|w| w[1] < w[0]) && errs[errs.len() - 1] < LOG_FINAL_REL;
        pass &= ok;
        parts.push(format!("fixture {i}: {:.1}% -> {:.1}%", 100.0 * errs[0], 100.0 * errs[errs.len() - 1]));
    }
    outcome(pass, parts.join("; "))
}

fn power_scaling() -> Outcome {
    let fixtures: [[(f64, f64); 3]; 3] = [
        [(0.2, 1.0), (0.5, 2.0), (0.8, -0.5)],
        [(0.1, -1.5), (0.4, -0.3), (0.8, 2.0)],
        [(0.3, 0.7), (0.6, 1.1), (0.9, 3.0)],
    ];
    let mut worst = 0.0_f64;
    for f in &fixtures {
        let noise = fixture(f);
        let p = SystemParams::new(3.0, POWER_EPS, 0.0, 0.5).unwrap();
        let x = solve_exact(&noise, &p, &[1.0]).unwrap().x[0];
        let limit = limit_power_gaps(&noise, 0.5, 3.0, 1.0).unwrap();
        worst = worst.max(((POWER_EPS.sqrt() * x - limit) / limit).abs());
    }
    outcome(worst < POWER_REL, format!("max relative error {:.3}% (< 1%)", 100.0 * worst))
}

fn stable_filter() -> Outcome {
    let start = Instant::now();
    let target = stable_filter_params(1.2, 0.4, 1.0).unwrap().alpha_x;
    let cfg = ExperimentConfig::new(
        stable_family(1.2, EllSchedule::fixed(FILTER_ELL)),
        0.4,
        vec![FILTER_EPS],
        1.0,
        FILTER_PATHS,
        5,
    );
    let r = tail_test(&cfg, 1.0).unwrap()[0];
    let elapsed = start.elapsed();
    let hill_ok = r.hill_index >= FILTER_HILL.0 && r.hill_index <= FILTER_HILL.1;
    let ks_ok = r.ks_statistic < r.ks_critical;
    outcome(
        hill_ok && ks_ok && elapsed < FILTER_TIME,
        format!(
            "Hill {:.3} (k={}, target {target:.2}), KS {:.4} vs critical {:.4}, {:.1}s",
            r.hill_index,
            r.hill_k,
            r.ks_statistic,
            r.ks_critical,
            elapsed.as_secs_f64()
        ),
    )
}

fn h_trapezoid(v: f64, alpha: f64, beta: f64, panels: usize) -> f64 {
    // z = w^m, m = 1/(2-α); the integrand tends to m F''(v) at w = 0
    let m = 1.0 / (2.0 - alpha);
    let f = |x: f64| x.abs().powf(2.0 - beta) * x.signum() / (2.0 - beta);
    let g = |w: f64| {
        if w == 0.0 {
            m * (1.0 - beta) * v.abs().powf(-beta) * v.signum()
        } else {
            let z = w.powf(m);
            m * (f(v + z) + f(v - z) - 2.0 * f(v)) * w.powf(-m * alpha - 1.0)
        }
    };
    let h = 1.0 / panels as f64;
    let mut s = 0.5 * (g(0.0) + g(1.0));
    for i in 1..panels {
        s += g(i as f64 * h);
    }
    s * h
}

fn h_functional() -> Outcome {
    let m = DampedStable::new(1.2);
    let h = |v: f64, beta: f64| h_eps(v, beta, &m, H_QUAD_TOL).unwrap();

    let mut rng = stream(6, 0);
    let mut odd = 0.0_f64;
    for _ in 0..100 {
        let v: f64 = rng.random_range(1e-3..3.0);
        let beta = [0.4, 0.8, 1.1][rng.random_range(0..3)];
        odd = odd.max((h(v, beta) + h(-v, beta)).abs());
    }
    let zero = [0.4, 0.8, 1.1].iter().map(|&b| h(0.0, b).abs()).fold(0.0, f64::max);
    let odd_ok = odd <= H_ODD_TOL && zero <= H_ODD_TOL;

    let regular = h(2f64.powi(-H_REGULAR_N), 0.4).abs();
    let regular_ok = regular < H_REGULAR_LEVEL;

    let (h2, h10) = (h(0.25, 1.1).abs(), h(2f64.powi(-10), 1.1).abs());
    let blowup_ok = h10 >= H_BLOWUP_FACTOR * h2;

    let mut trap = 0.0_f64;
    for beta in [0.4, 0.8, 1.1] {
        for v in [0.1, 0.5, 1.3] {
            trap = trap.max((h(v, beta) - h_trapezoid(v, 1.2, beta, 1_000_000)).abs());
        }
    }
    let trap_ok = trap < H_TRAPEZOID_TOL;

    let flag = |b: bool| if b { "ok" } else { "no" };
    outcome(
        odd_ok && regular_ok && blowup_ok && trap_ok,
        format!(
            "oddness {odd:.1e}, H(0) {zero:.1e} [{}]; (1.2,0.4) |H(2^-12)| = {regular:.4} vs < 1e-3 [{}]; \
             (1.2,1.1) |H(2^-10)|/|H(2^-2)| = {:.2} vs >= 10 [{}]; trapezoid gap {trap:.1e} [{}]",
            flag(odd_ok),
            flag(regular_ok),
            h10 / h2,
            flag(blowup_ok),
            flag(trap_ok)
        ),
    )
}

fn dissipation() -> Outcome {
    let cfg = ExperimentConfig::new(
        stable_family(1.2, EllSchedule::default()),
        0.5,
        DISSIPATION_EPS.to_vec(),
        1.0,
        DISSIPATION_PATHS,
        7,
    );
    let rows = dissipation_probe(&cfg, 1.0, DISSIPATION_DELTA, 1.0).unwrap();
    let pass = rows
        .windows(2)
        .all(|w| w[0].end_exceed - w[1].end_exceed > DISSIPATION_SE * (w[0].end_se.powi(2) + w[1].end_se.powi(2)).sqrt());
    let listed: Vec<String> = rows
        .iter()
        .map(|r| format!("{:.4}±{:.4}", r.end_exceed, r.end_se))
        .collect();
    outcome(pass, format!("P(|V_1| > 0.1) = [{}]", listed.join(", ")))
}

fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    a == b || (a - b).abs() <= rel * a.abs().max(b.abs())
}

fn algebraic_invariants() -> Outcome {
    let start = Instant::now();
    let betas = [0.0, 0.5, 1.0, 1.5, 3.0];
    let mut rng = stream(8, 0);
    let (mut semigroup, mut additivity, mut rescaling, mut oddness, mut extinction) = (0u32, 0u32, 0u32, 0u32, 0u32);
    for i in 0..INVARIANT_CASES {
        let beta = betas[i as usize % betas.len()];
        let v = rng.random_range(1e-3..10.0) * if rng.random::<bool>() { 1.0 } else { -1.0 };
        let (s, t, eps) = (rng.random_range(0.0..3.0), rng.random_range(0.0..3.0), rng.random_range(0.05..2.0));
        let once = flow_velocity(v, s + t, eps, beta).unwrap();
        let vs = flow_velocity(v, s, eps, beta).unwrap();
        if !rel_close(once, flow_velocity(vs, t, eps, beta).unwrap(), SEMIGROUP_REL) {
            semigroup += 1;
        }
        let whole = flow_displacement(v, s + t, eps, beta).unwrap();
        let split = flow_displacement(v, s, eps, beta).unwrap() + flow_displacement(vs, t, eps, beta).unwrap();
        if !rel_close(whole, split, ADDITIVITY_REL) {
            additivity += 1;
        }
        if beta < 1.0 {
            let stop = eps * v.abs().powf(1.0 - beta) / (1.0 - beta);
            let (branch, _) = FlowBranch::for_beta(beta);
            let tail = branch.displacement(v, stop * (1.0 + s), eps);
            let full = v.abs().powf(2.0 - beta) * v.signum() / (2.0 - beta);
            if !rel_close(tail, full, 1e-12) {
                extinction += 1;
            }
        }

        let noise = random_path(&mut rng, 10);
        let beta_r = [0.5, 1.0, 1.5, 2.0, 3.0][i as usize % 5];
        let alpha = rng.random_range(0.6..1.9);
        let eps_r = 10f64.powf(rng.random_range(-4.0..0.0));
        let p = SystemParams::new(beta_r, eps_r, rng.random_range(-1.0..1.0), rng.random_range(-3.0..3.0)).unwrap();
        let grid = [0.2, 0.5, 0.77, 1.0];
        let traj = solve_exact(&noise, &p, &grid).unwrap();
        let r = rescale_to_y(&noise, &traj, alpha).unwrap();
        if r.max_rel_gap_x > RESCALING_REL || r.max_rel_gap_y > RESCALING_REL {
            rescaling += 1;
        }
        let q = SystemParams::new(beta_r, eps_r, -p.x0, -p.v0).unwrap();
        let flipped = solve_exact(&noise.negated(), &q, &grid).unwrap();
        if (0..grid.len()).any(|k| traj.x[k] != -flipped.x[k] || traj.v[k] != -flipped.v[k]) {
            oddness += 1;
        }
    }
    let elapsed = start.elapsed();
    let failures = semigroup + additivity + rescaling + oddness + extinction;
    outcome(
        failures == 0 && elapsed < INVARIANT_TIME,
        format!(
            "{INVARIANT_CASES} cases: semigroup {semigroup}, additivity {additivity}, rescaling {rescaling}, \
             oddness {oddness}, extinction {extinction} violations; {:.1}s",
            elapsed.as_secs_f64()
        ),
    )
}

fn csv_outputs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn determinism() -> Outcome {
    let root = tempfile::tempdir().unwrap();
    let commands: [&[&str]; 4] = [
        &["simulate", "--beta", "0.5", "--eps", "1e-2,1e-3", "--seed", "3", "--grid", "101"],
        &["residual", "--beta", "0", "--eps", "1e-1,1e-2,1e-3", "--paths", "300", "--seed", "7"],
        &["tailtest", "--eps", "1e-2", "--paths", "2000", "--seed", "11"],
        &["dissipation", "--beta", "0.5", "--eps", "1e-1,1e-2", "--paths", "500", "--seed", "13"],
    ];
    let mut mismatches = Vec::new();
    let mut files = 0;
    for (i, cmd) in commands.iter().enumerate() {
        let mut runs = Vec::new();
        for (j, workers) in ["1", "4", "1"].iter().enumerate() {
            let out = root.path().join(format!("{i}_{j}"));
            let mut argv = vec!["levylangevin".to_string()];
            argv.extend(cmd.iter().map(|s| s.to_string()));
            argv.extend(["--workers".into(), workers.to_string(), "--out".into(), out.display().to_string()]);
            let code = levy_langevin_cli::run(argv);
            if code != 0 {
                return outcome(false, format!("`{}` exited with {code}", cmd.join(" ")));
            }
            runs.push(csv_outputs(&out));
        }
        files += runs[0].len();
        if runs[0].is_empty() || runs[0] != runs[1] || runs[0] != runs[2] {
            mismatches.push(cmd[0]);
        }
    }
    outcome(
        mismatches.is_empty(),
        format!("{files} CSV files, 1 vs 4 workers and repeated runs; mismatches: {mismatches:?}"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("exact solver matches stepping oracle", oracle_equivalence),
        ("pathwise residual decays with eps", pathwise_residual_decay),
        ("log-scaled limit at beta = 2", log_scaling),
        ("power-scaled limit at beta = 3", power_scaling),
        ("stable filter tail index and KS", stable_filter),
        ("H functional shape", h_functional),
        ("velocity dissipation", dissipation),
        ("algebraic invariants", algebraic_invariants),
        ("determinism across workers", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!("{} [{}] {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
