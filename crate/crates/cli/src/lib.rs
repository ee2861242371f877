//! Command-line experiment runner for `levy-langevin`.
//!
//! Every subcommand resolves its settings from an optional flat TOML file
//! (`--config`) overridden by flags, writes versioned CSV tables into `--out`,
//! and pairs each table with a `<name>.manifest.json` sidecar.
//!
//! Exit codes: `0` success, `1` validation or I/O error, `2` numerical budget exceeded.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use levy_langevin::analysis::{
    dissipation_probe, h_eps, residual_sweep, tail_test, DampedStable, ExperimentConfig, NoiseSpec,
};
use levy_langevin::limits::{limit_path, stable_filter_params, Scaling};
use levy_langevin::noise::{EllSchedule, NoiseFamily, TruncatedStableFamily};
use levy_langevin::{
    classify_regime, sample_jump_events, solve_exact, Jump, JumpPath, LimitKind, StreamId, SystemParams,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Budget(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Budget(_) => 2,
            _ => 1,
        }
    }
}

impl From<levy_langevin::Error> for CliError {
    fn from(e: levy_langevin::Error) -> Self {
        match e {
            levy_langevin::Error::Budget { .. } => CliError::Budget(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "levylangevin", version, about = "Small-noise Lévy-driven Langevin experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact trajectory `t,X,V` on a uniform grid.
    Simulate(Flags),
    /// Scaled position next to its small-noise limit on a common noise path.
    Limit(Flags),
    /// Median and 90% quantile of the pathwise residual per ε.
    Residual(Flags),
    /// Regime classification of `(α, β)`.
    Regime(Flags),
    /// The second-difference functional `H` on a `v` grid.
    Hfunc(Flags),
    /// Hill index and two-sample KS distance against the filtered limit.
    Tailtest(Flags),
    /// Velocity exceedance probabilities per ε.
    Dissipation(Flags),
}

/// Flags shared by every subcommand. Unset values fall back to the config
/// file, then to built-in defaults.
#[derive(Debug, Args, Default)]
struct Flags {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,
    /// Comma-separated list.
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    /// Fixed truncation level; defaults to `ℓ = ε`.
    #[arg(long)]
    ell: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    /// Evaluation time; defaults to the horizon.
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    v0: Option<f64>,
    /// Jump fixture, one `tau,size` pair per line.
    #[arg(long)]
    noise: Option<PathBuf>,
    /// Number of grid points.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    /// Threshold for the running supremum of `|V|`.
    #[arg(long)]
    r: Option<f64>,
    /// Threshold for `|V_t|`.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    quad_tol: Option<f64>,
    /// Right end of the `hfunc` grid.
    #[arg(long)]
    vmax: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum EpsValue {
    One(f64),
    Many(Vec<f64>),
}

/// Contents of a `--config` file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    alpha: Option<f64>,
    beta: Option<f64>,
    eps: Option<EpsValue>,
    ell: Option<f64>,
    c: Option<f64>,
    t: Option<f64>,
    horizon: Option<f64>,
    paths: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    x0: Option<f64>,
    v0: Option<f64>,
    noise: Option<PathBuf>,
    grid: Option<usize>,
    workers: Option<usize>,
    r: Option<f64>,
    delta: Option<f64>,
    quad_tol: Option<f64>,
    vmax: Option<f64>,
}

/// Fully resolved settings, echoed into every manifest.
#[derive(Debug, Clone, Serialize)]
pub struct Settings {
    pub alpha: f64,
    pub beta: f64,
    pub eps: Vec<f64>,
    pub ell: Option<f64>,
    pub c: f64,
    pub t: f64,
    pub horizon: f64,
    pub paths: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub x0: f64,
    pub v0: f64,
    pub noise: Option<PathBuf>,
    pub grid: usize,
    pub workers: usize,
    pub r: f64,
    pub delta: f64,
    pub quad_tol: f64,
    pub vmax: f64,
}

fn resolve(flags: Flags) -> CliResult<Settings> {
    let file = match &flags.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
            toml::from_str::<FileConfig>(&text).map_err(|e| {
                CliError::Validation(format!("malformed config {}: {}", path.display(), e.message().trim()))
            })?
        }
        None => FileConfig::default(),
    };
    let eps = flags
        .eps
        .or(file.eps.map(|e| match e {
            EpsValue::One(x) => vec![x],
            EpsValue::Many(v) => v,
        }))
        .unwrap_or_else(|| vec![1e-2]);
    let horizon = flags.horizon.or(file.horizon).unwrap_or(1.0);
    let s = Settings {
        alpha: flags.alpha.or(file.alpha).unwrap_or(1.2),
        beta: flags.beta.or(file.beta).unwrap_or(0.4),
        eps,
        ell: flags.ell.or(file.ell),
        c: flags.c.or(file.c).unwrap_or(1.0),
        t: flags.t.or(file.t).unwrap_or(horizon),
        horizon,
        paths: flags.paths.or(file.paths).unwrap_or(1000),
        seed: flags.seed.or(file.seed).unwrap_or(0),
        out: flags.out.or(file.out).unwrap_or_else(|| PathBuf::from("out")),
        x0: flags.x0.or(file.x0).unwrap_or(0.0),
        v0: flags.v0.or(file.v0).unwrap_or(0.0),
        noise: flags.noise.or(file.noise),
        grid: flags.grid.or(file.grid).unwrap_or(200),
        workers: flags.workers.or(file.workers).unwrap_or(0),
        r: flags.r.or(file.r).unwrap_or(1.0),
        delta: flags.delta.or(file.delta).unwrap_or(0.1),
        quad_tol: flags.quad_tol.or(file.quad_tol).unwrap_or(1e-10),
        vmax: flags.vmax.or(file.vmax).unwrap_or(2.0),
    };
    if s.eps.is_empty() {
        return Err(CliError::Validation("--eps: at least one value is required".into()));
    }
    if !(s.horizon.is_finite() && s.horizon >= 0.0) {
        return Err(CliError::Validation(format!("--horizon: must be finite and nonnegative, got {}", s.horizon)));
    }
    if !(s.t >= 0.0 && s.t <= s.horizon) {
        return Err(CliError::Validation(format!("--t: must lie in [0, {}], got {}", s.horizon, s.t)));
    }
    Ok(s)
}

impl Settings {
    fn family(&self) -> TruncatedStableFamily {
        TruncatedStableFamily {
            alpha: self.alpha,
            c: self.c,
            ell: self.ell.map(EllSchedule::fixed).unwrap_or_default(),
        }
    }

    fn experiment(&self) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(
            NoiseSpec::TruncatedStable(self.family()),
            self.beta,
            self.eps.clone(),
            self.horizon,
            self.paths,
            self.seed,
        );
        cfg.x0 = self.x0;
        cfg.v0 = self.v0;
        cfg.workers = self.workers;
        cfg
    }

    /// The fixture from `--noise`, or one sampled path for grid point `index`.
    fn noise_path(&self, index: usize) -> CliResult<JumpPath> {
        match &self.noise {
            Some(path) => read_fixture(path, self.horizon),
            None => {
                let model = self.family().model(self.eps[index])?;
                Ok(sample_jump_events(&model, self.horizon, StreamId::new(self.seed, index as u32, 0))?)
            }
        }
    }

    fn uniform_grid(&self) -> CliResult<Vec<f64>> {
        if self.grid < 2 {
            return Err(CliError::Validation(format!("--grid: need at least 2 points, got {}", self.grid)));
        }
        let n = self.grid - 1;
        Ok((0..=n).map(|i| if i == n { self.horizon } else { self.horizon * i as f64 / n as f64 }).collect())
    }
}

fn read_fixture(path: &Path, horizon: f64) -> CliResult<JumpPath> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read noise fixture {}: {e}", path.display())))?;
    let mut events = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("tau") {
            continue;
        }
        let parsed: Vec<f64> = line
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::Validation(format!("{}:{}: {e}", path.display(), lineno + 1)))?;
        match parsed[..] {
            [tau, size] => events.push(Jump { tau, size }),
            _ => {
                return Err(CliError::Validation(format!(
                    "{}:{}: expected `tau,size`",
                    path.display(),
                    lineno + 1
                )))
            }
        }
    }
    Ok(JumpPath::new(horizon, events)?)
}

/// Human-readable number rounded to 12 significant decimals.
fn fmt_num(x: f64) -> String {
    let s = format!("{:.12}", x);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-" { "0".into() } else { s.to_string() }
}

struct Table {
    name: String,
    header: Vec<&'static str>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    fn render(&self) -> String {
        let mut s = format!("# schema={SCHEMA_VERSION}\n{}\n", self.header.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&x| format!("{x}")).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("cannot write {}: {e}", path.display()))
}

/// Writes a two-column `x,y` CSV for one curve. An empty curve gives a
/// header-only file.
pub fn emit_plot_data(curve: &[(f64, f64)], path: &Path) -> CliResult<()> {
    let table = Table {
        name: String::new(),
        header: vec!["x", "y"],
        rows: curve.iter().map(|&(x, y)| vec![x, y]).collect(),
    };
    fs::write(path, table.render()).map_err(|e| io_err(path, e))
}

/// Git-style content hash: SHA-256 of `blob <len>\0<content>`.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    hex::encode(h.finalize())
}

#[derive(Serialize)]
struct Manifest<'a> {
    schema: u32,
    command: &'a str,
    config: &'a Settings,
    config_hash: String,
    master_seed: u64,
    outputs: Vec<String>,
    paths: usize,
    wall_clock_seconds: f64,
}

fn write_outputs(command: &str, settings: &Settings, tables: &[Table], started: Instant) -> CliResult<()> {
    fs::create_dir_all(&settings.out).map_err(|e| io_err(&settings.out, e))?;
    let config_json = serde_json::to_string(settings).map_err(|e| CliError::Validation(e.to_string()))?;
    for t in tables {
        let path = settings.out.join(&t.name);
        fs::write(&path, t.render()).map_err(|e| io_err(&path, e))?;
    }
    let manifest = Manifest {
        schema: SCHEMA_VERSION,
        command,
        config: settings,
        config_hash: content_hash(config_json.as_bytes()),
        master_seed: settings.seed,
        outputs: tables.iter().map(|t| t.name.clone()).collect(),
        paths: settings.paths,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Validation(e.to_string()))?;
    for t in tables {
        let path = settings.out.join(format!("{}.manifest.json", t.name));
        fs::write(&path, &json).map_err(|e| io_err(&path, e))?;
    }
    Ok(())
}

fn per_eps_name(stem: &str, settings: &Settings, i: usize) -> String {
    if settings.eps.len() == 1 {
        format!("{stem}.csv")
    } else {
        format!("{stem}_{i}.csv")
    }
}

fn simulate(s: &Settings) -> CliResult<Vec<Table>> {
    let grid = s.uniform_grid()?;
    (0..s.eps.len())
        .map(|i| {
            let noise = s.noise_path(i)?;
            let params = SystemParams::new(s.beta, s.eps[i], s.x0, s.v0)?;
            let traj = solve_exact(&noise, &params, &grid)?;
            Ok(Table {
                name: per_eps_name("simulate", s, i),
                header: vec!["t", "X", "V"],
                rows: (0..grid.len()).map(|k| vec![grid[k], traj.x[k], traj.v[k]]).collect(),
            })
        })
        .collect()
}

fn limit(s: &Settings) -> CliResult<Vec<Table>> {
    let grid = s.uniform_grid()?;
    (0..s.eps.len())
        .map(|i| {
            let noise = s.noise_path(i)?;
            let params = SystemParams::new(s.beta, s.eps[i], s.x0, s.v0)?;
            let traj = solve_exact(&noise, &params, &grid)?;
            let lim = limit_path(&noise, &params, &grid)?;
            let factor = lim.scaling.factor(s.eps[i]);
            let shift = if lim.scaling == Scaling::Identity { 0.0 } else { s.x0 };
            Ok(Table {
                name: per_eps_name("limit", s, i),
                header: vec!["t", "X_scaled", "limit"],
                rows: (0..grid.len())
                    .map(|k| vec![grid[k], factor * (traj.x[k] - shift), lim.values[k]])
                    .collect(),
            })
        })
        .collect()
}

fn residual(s: &Settings) -> CliResult<Vec<Table>> {
    let rows = residual_sweep(&s.experiment(), s.t)?;
    Ok(vec![Table {
        name: "residual.csv".into(),
        header: vec!["eps", "abs_residual_median", "abs_residual_p90"],
        rows: rows.iter().map(|r| vec![r.eps, r.median, r.p90]).collect(),
    }])
}

fn regime_line(s: &Settings) -> CliResult<String> {
    let report = classify_regime(s.alpha, s.beta)?;
    let mut line = report.limit_kind.to_string();
    if let Some(reg) = report.regularity {
        let _ = write!(line, " {reg}");
    }
    if report.limit_kind == LimitKind::NonGaussianFilter && s.alpha > 0.0 && s.alpha < 2.0 {
        let f = stable_filter_params(s.alpha, s.beta, s.c)?;
        let _ = write!(line, " alpha_X={}", fmt_num(f.alpha_x));
    }
    Ok(line)
}

fn hfunc(s: &Settings) -> CliResult<Vec<(f64, f64)>> {
    if !(s.vmax > 0.0 && s.vmax.is_finite()) {
        return Err(CliError::Validation(format!("--vmax: must be positive, got {}", s.vmax)));
    }
    let measure = DampedStable::new(s.alpha);
    (1..=s.grid)
        .map(|i| {
            let v = s.vmax * i as f64 / s.grid as f64;
            Ok((v, h_eps(v, s.beta, &measure, s.quad_tol)?))
        })
        .collect()
}

fn tailtest(s: &Settings) -> CliResult<Vec<Table>> {
    let alpha_x = stable_filter_params(s.alpha, s.beta, s.c)?.alpha_x;
    let reports = tail_test(&s.experiment(), s.t)?;
    Ok(vec![Table {
        name: "tailtest.csv".into(),
        header: vec!["eps", "hill_k", "hill_index", "alpha_x", "ks_statistic", "ks_critical_1pct"],
        rows: reports
            .iter()
            .map(|r| vec![r.eps, r.hill_k as f64, r.hill_index, alpha_x, r.ks_statistic, r.ks_critical])
            .collect(),
    }])
}

fn dissipation(s: &Settings) -> CliResult<Vec<Table>> {
    let rows = dissipation_probe(&s.experiment(), s.r, s.delta, s.t)?;
    Ok(vec![Table {
        name: "dissipation.csv".into(),
        header: vec!["eps", "p_sup_exceed", "se_sup_exceed", "p_end_exceed", "se_end_exceed"],
        rows: rows
            .iter()
            .map(|r| vec![r.eps, r.sup_exceed, r.sup_se, r.end_exceed, r.end_se])
            .collect(),
    }])
}

fn execute(cli: Cli) -> CliResult<()> {
    let started = Instant::now();
    let (name, flags) = match cli.command {
        Command::Simulate(f) => ("simulate", f),
        Command::Limit(f) => ("limit", f),
        Command::Residual(f) => ("residual", f),
        Command::Regime(f) => ("regime", f),
        Command::Hfunc(f) => ("hfunc", f),
        Command::Tailtest(f) => ("tailtest", f),
        Command::Dissipation(f) => ("dissipation", f),
    };
    let s = resolve(flags)?;
    let tables = match name {
        "simulate" => simulate(&s)?,
        "limit" => limit(&s)?,
        "residual" => residual(&s)?,
        "regime" => {
            println!("{}", regime_line(&s)?);
            return Ok(());
        }
        "hfunc" => {
            let curve = hfunc(&s)?;
            vec![Table {
                name: format!("hfunc_alpha{}_beta{}.csv", fmt_num(s.alpha), fmt_num(s.beta)),
                header: vec!["x", "y"],
                rows: curve.iter().map(|&(x, y)| vec![x, y]).collect(),
            }]
        }
        "tailtest" => tailtest(&s)?,
        "dissipation" => dissipation(&s)?,
        _ => unreachable!(),
    };
    write_outputs(name, &s, &tables, started)
}

/// Parses `argv` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments");
            eprintln!("{}", first.trim_start_matches("error: "));
            return 1;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            e.exit_code()
        }
    }
}
