use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use spatial_irv::asymptotics::{
    circle_coupling_experiment, gaps_for, max_gap_experiment, winning_share_experiment,
    GumbelExperimentResult, SpacingSource,
};
use spatial_irv::exactk3::{density_k3, irv_tail_density};
use spatial_irv::experiments::{
    fmt_float, run_beta_sweep, run_scatter, run_verify, run_winner_histograms, write_atomic,
    write_csv, CsvRecord, ExperimentConfig, Fault, OutputFormat, RunManifest, Scale, VerifyOptions,
};
use spatial_irv::seeds::{experiment_id, trial_rng};
use spatial_irv::stats::median;
use spatial_irv::tabulate::{parse_positions, tabulate, Profile, Rule, TieRule};
use spatial_irv::zones::{min_zone_numeric, zone_closed_form};
use spatial_irv::DistSpec;

const EXIT_USAGE: u8 = 1;
const EXIT_VERIFY_FAILED: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "spatial-irv", version, about = "One-dimensional plurality and IRV election simulations")]
struct Cli {
    /// Master seed for all random draws.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output file; stdout when absent. A manifest is written beside it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq)]
enum RuleArg {
    Plurality,
    Irv,
    Both,
}

impl RuleArg {
    fn rules(self) -> Vec<Rule> {
        match self {
            RuleArg::Plurality => vec![Rule::Plurality],
            RuleArg::Irv => vec![Rule::Irv],
            RuleArg::Both => vec![Rule::Plurality, Rule::Irv],
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TieArg {
    Left,
    Right,
    Error,
}

impl From<TieArg> for TieRule {
    fn from(t: TieArg) -> Self {
        match t {
            TieArg::Left => TieRule::EliminateLeftmost,
            TieArg::Right => TieRule::EliminateRightmost,
            TieArg::Error => TieRule::Error,
        }
    }
}

#[derive(Args, Debug)]
struct Common {
    /// Voter and candidate distribution: uniform, beta:<alpha> or table:<csv>.
    #[arg(long, default_value = "uniform")]
    dist: String,

    #[arg(long, value_enum, default_value_t = TieArg::Left)]
    tie_rule: TieArg,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tabulate one profile, or simulate winner positions over many.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = RuleArg::Both)]
        rule: RuleArg,
        /// Fixed candidate positions, e.g. 0.2,0.3,0.4,0.85.
        #[arg(long, conflicts_with = "k")]
        candidates: Option<String>,
        /// Candidate counts, comma separated.
        #[arg(long, value_delimiter = ',')]
        k: Vec<usize>,
        /// Number of random profiles; omit to tabulate a single one.
        #[arg(long)]
        trials: Option<u64>,
    },
    /// Exact winner densities for three candidates, or the IRV tail for any k.
    Density {
        #[arg(long, value_enum)]
        rule: RuleArg,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 201)]
        grid: usize,
        /// Tail formula on [0, 1/6] (IRV only).
        #[arg(long)]
        tail: bool,
    },
    /// Exclusion zone for a distribution.
    Zone {
        #[arg(long, default_value = "uniform")]
        dist: String,
        #[arg(long, value_enum, default_value_t = Method::Closed)]
        method: Method,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Extreme-value statistics of uniform spacings.
    Gumbel {
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, value_enum, default_value_t = Mode::Share)]
        mode: Mode,
        /// Gap construction for maxgap mode.
        #[arg(long, value_enum, default_value_t = Source::Exponential)]
        source: Source,
    },
    /// Plurality against IRV winner on the same draws.
    Scatter {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "3,4,5")]
        k: Vec<usize>,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
    },
    /// Symmetric Beta sweep against the closed-form zones.
    Betasweep {
        #[arg(long, value_delimiter = ',', default_value = "0.3,0.5,0.8,1,2,5")]
        alphas: Vec<f64>,
        #[arg(long, default_value_t = 30)]
        k: usize,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, value_enum, default_value_t = TieArg::Left)]
        tie_rule: TieArg,
    },
    /// Run the self-check suite; exits with status 2 on any failure.
    Verify {
        /// Full trial counts instead of the quick suite.
        #[arg(long)]
        full: bool,
        /// Deliberately break IRV tabulation to confirm the suite notices.
        #[arg(long, value_enum)]
        inject_fault: Option<FaultArg>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Method {
    Closed,
    Numeric,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Share,
    Maxgap,
    Circle,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Source {
    Uniform,
    Exponential,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FaultArg {
    ShiftedShares,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

/// Where results go: a file with a manifest beside it, or stdout.
struct Sink<'a> {
    out: Option<&'a Path>,
    format: OutputFormat,
}

impl Sink<'_> {
    fn emit_bytes(&self, bytes: &[u8]) -> Result<()> {
        match self.out {
            Some(p) => write_atomic(p, bytes).with_context(|| format!("writing {}", p.display())),
            None => {
                std::io::stdout().write_all(bytes)?;
                Ok(())
            }
        }
    }

    /// Rows as CSV, or the whole payload as JSON.
    fn emit<R: CsvRecord>(&self, rows: &[R], json: impl FnOnce() -> Value) -> Result<()> {
        let bytes = match self.format {
            OutputFormat::Csv => {
                let mut buf = Vec::new();
                write_csv(&mut buf, rows)?;
                buf
            }
            OutputFormat::Json => {
                let mut b = serde_json::to_vec_pretty(&json())?;
                b.push(b'\n');
                b
            }
        };
        self.emit_bytes(&bytes)
    }

    fn manifest(&self, command: &str, config: Value, started: Instant, summary: &Value, notes: Vec<String>) -> Result<()> {
        if let Some(p) = self.out {
            let mut m = RunManifest::new(command, &config)?;
            m.outputs.push(p.display().to_string());
            m.notes = notes;
            m.finish(started.elapsed(), summary)?;
            m.write_beside(p)?;
        }
        Ok(())
    }
}

fn run(cli: &Cli) -> Result<u8> {
    let started = Instant::now();
    let sink = Sink {
        out: cli.out.as_deref(),
        format: cli.format.into(),
    };
    match &cli.command {
        Command::Simulate { common, rule, candidates, k, trials } => {
            simulate(cli, &sink, started, common, *rule, candidates.as_deref(), k, *trials)
        }
        Command::Density { rule, k, grid, tail } => density(&sink, *rule, *k, *grid, *tail),
        Command::Zone { dist, method, tol } => zone(&sink, cli, started, dist, *method, *tol),
        Command::Gumbel { k, trials, mode, source } => gumbel(cli, &sink, started, *k, *trials, *mode, *source),
        Command::Scatter { common, k, trials } => {
            let cfg = ExperimentConfig {
                dist: common.dist.clone(),
                ks: k.clone(),
                trials: *trials,
                master_seed: cli.seed,
                tie_rule: common.tie_rule.into(),
                out: cli.out.clone(),
                format: cli.format.into(),
                ..Default::default()
            };
            let run = run_scatter(&cfg)?;
            let summary = serde_json::to_value(&run.summaries)?;
            sink.emit(&run.rows, || json!({"summaries": run.summaries, "rows": run.rows}))?;
            sink.manifest("scatter", serde_json::to_value(&cfg)?, started, &summary, vec![])?;
            print_summary(&summary)?;
            Ok(0)
        }
        Command::Betasweep { alphas, k, trials, tie_rule } => {
            let cfg = ExperimentConfig {
                alphas: alphas.clone(),
                ks: vec![*k],
                trials: *trials,
                master_seed: cli.seed,
                tie_rule: (*tie_rule).into(),
                out: cli.out.clone(),
                format: cli.format.into(),
                ..Default::default()
            };
            let run = run_beta_sweep(&cfg)?;
            let summary = serde_json::to_value(&run.summaries)?;
            sink.emit(&run.rows, || json!({"k": run.k, "summaries": run.summaries, "rows": run.rows}))?;
            let notes = vec![
                format!("{k} candidates per profile; the default is 30 but sweeps at k = 20 are also quoted, pass --k to match"),
                "zones with c below the verify inset are skipped".to_string(),
            ];
            sink.manifest("betasweep", serde_json::to_value(&cfg)?, started, &summary, notes)?;
            print_summary(&summary)?;
            Ok(0)
        }
        Command::Verify { full, inject_fault } => {
            let opts = VerifyOptions {
                seed: cli.seed,
                scale: if *full { Scale::Full } else { Scale::Quick },
                fault: inject_fault.map(|FaultArg::ShiftedShares| Fault::ShiftedShares),
            };
            let report = run_verify(opts)?;
            for c in &report.checks {
                eprintln!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            let mut bytes = serde_json::to_vec_pretty(&report)?;
            bytes.push(b'\n');
            sink.emit_bytes(&bytes)?;
            let summary = json!({"passed": report.passed});
            sink.manifest("verify", serde_json::to_value(opts)?, started, &summary, vec![])?;
            Ok(if report.passed { 0 } else { EXIT_VERIFY_FAILED })
        }
    }
}

fn print_summary(summary: &Value) -> Result<()> {
    eprintln!("{}", serde_json::to_string_pretty(summary)?);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    cli: &Cli,
    sink: &Sink,
    started: Instant,
    common: &Common,
    rule: RuleArg,
    candidates: Option<&str>,
    ks: &[usize],
    trials: Option<u64>,
) -> Result<u8> {
    let d = common.dist.parse::<DistSpec>()?.build()?;
    let tie: TieRule = common.tie_rule.into();
    if let Some(t) = trials {
        if candidates.is_some() {
            bail!("--trials needs --k, not --candidates");
        }
        let cfg = ExperimentConfig {
            rules: rule.rules(),
            dist: common.dist.clone(),
            ks: if ks.is_empty() { vec![3] } else { ks.to_vec() },
            trials: t,
            master_seed: cli.seed,
            tie_rule: tie,
            out: cli.out.clone(),
            format: cli.format.into(),
            ..Default::default()
        };
        let run = run_winner_histograms(&cfg)?;
        let summary = serde_json::to_value(&run.summaries)?;
        sink.emit(&run.samples, || json!({"summaries": run.summaries, "samples": run.samples}))?;
        if let (Some(out), false) = (cli.out.as_deref(), run.overlay.is_empty()) {
            let mut p = out.as_os_str().to_owned();
            p.push(".density.csv");
            let mut buf = Vec::new();
            write_csv(&mut buf, &run.overlay)?;
            write_atomic(Path::new(&p), &buf)?;
        }
        sink.manifest("simulate", serde_json::to_value(&cfg)?, started, &summary, vec![])?;
        print_summary(&summary)?;
        return Ok(0);
    }

    let positions = match (candidates, ks) {
        (Some(s), _) => parse_positions(s)?,
        (None, [k]) => {
            let mut rng = trial_rng(cli.seed, experiment_id("simulate/profile"), 0);
            d.sample_n(&mut rng, *k)
        }
        _ => bail!("give --candidates, a single --k, or --trials"),
    };
    let profile = Profile::new(positions)?;
    let mut outcomes = serde_json::Map::new();
    for r in rule.rules() {
        outcomes.insert(r.to_string(), serde_json::to_value(tabulate(r, &profile, &d, tie)?)?);
    }
    let payload = json!({
        "candidates": profile.positions(),
        "distribution": d.label(),
        "outcomes": outcomes,
    });
    let mut bytes = serde_json::to_vec_pretty(&payload)?;
    bytes.push(b'\n');
    sink.emit_bytes(&bytes)?;
    sink.manifest(
        "simulate",
        json!({"candidates": profile.positions(), "dist": common.dist, "seed": cli.seed}),
        started,
        &json!({}),
        vec![],
    )?;
    Ok(0)
}

struct DensityRow(f64, f64);

impl CsvRecord for DensityRow {
    fn header() -> &'static [&'static str] {
        &["x", "density"]
    }
    fn fields(&self) -> Vec<String> {
        vec![fmt_float(self.0), fmt_float(self.1)]
    }
}

fn density(sink: &Sink, rule: RuleArg, k: usize, grid: usize, tail: bool) -> Result<u8> {
    if grid < 2 {
        bail!("--grid must be at least 2");
    }
    let rule = match rule {
        RuleArg::Plurality => Rule::Plurality,
        RuleArg::Irv => Rule::Irv,
        RuleArg::Both => bail!("choose one rule"),
    };
    let step = |i: usize, hi: f64| hi * i as f64 / (grid - 1) as f64;
    let rows: Vec<DensityRow> = if tail {
        if rule != Rule::Irv {
            bail!("--tail is only defined for irv");
        }
        (0..grid)
            .map(|i| {
                let x = step(i, 1.0 / 6.0);
                irv_tail_density(k, x).map(|v| DensityRow(x, v))
            })
            .collect::<Result<_, _>>()?
    } else {
        if k != 3 {
            bail!("exact densities are available for k = 3 only; use --tail for other k");
        }
        let p = density_k3(rule);
        (0..grid)
            .map(|i| {
                let x = step(i, 1.0);
                p.eval(x).map(|v| DensityRow(x, v))
            })
            .collect::<Result<_, _>>()?
    };
    sink.emit(&rows, || {
        json!({"rule": rule, "k": k, "tail": tail,
               "points": rows.iter().map(|r| [r.0, r.1]).collect::<Vec<_>>()})
    })?;
    Ok(0)
}

fn zone(sink: &Sink, cli: &Cli, started: Instant, dist: &str, method: Method, tol: f64) -> Result<u8> {
    let d = dist.parse::<DistSpec>()?.build()?;
    let z = match method {
        Method::Closed => zone_closed_form(&d)?,
        Method::Numeric => min_zone_numeric(&d, tol)?,
    };
    let payload = json!({
        "c": z.c,
        "kind": z.kind,
        "regime": z.regime,
        "verified": z.verified,
        "warnings": z.warnings,
    });
    let mut bytes = serde_json::to_vec_pretty(&payload)?;
    bytes.push(b'\n');
    sink.emit_bytes(&bytes)?;
    let method = format!("{method:?}").to_lowercase();
    sink.manifest("zone", json!({"dist": dist, "method": method, "tol": tol, "seed": cli.seed}), started, &payload, vec![])?;
    Ok(0)
}

struct StatRow(u64, f64);

impl CsvRecord for StatRow {
    fn header() -> &'static [&'static str] {
        &["index", "statistic"]
    }
    fn fields(&self) -> Vec<String> {
        vec![self.0.to_string(), fmt_float(self.1)]
    }
}

struct CouplingRow(usize, u64, u64, f64);

impl CsvRecord for CouplingRow {
    fn header() -> &'static [&'static str] {
        &["k", "trials", "disagreements", "rate"]
    }
    fn fields(&self) -> Vec<String> {
        vec![self.0.to_string(), self.1.to_string(), self.2.to_string(), fmt_float(self.3)]
    }
}

fn gumbel(cli: &Cli, sink: &Sink, started: Instant, k: usize, trials: u64, mode: Mode, source: Source) -> Result<u8> {
    let config = json!({"k": k, "trials": trials, "mode": format!("{mode:?}").to_lowercase(),
                        "source": format!("{source:?}").to_lowercase(), "seed": cli.seed});
    let summary = match mode {
        Mode::Circle => {
            let r = circle_coupling_experiment(k, trials, cli.seed)?;
            let row = [CouplingRow(r.k, r.trials, r.disagreements, r.rate)];
            sink.emit(&row, || serde_json::to_value(&r).unwrap_or(Value::Null))?;
            serde_json::to_value(&r)?
        }
        Mode::Share | Mode::Maxgap => {
            let r: GumbelExperimentResult = match mode {
                Mode::Share => winning_share_experiment(k, trials, cli.seed)?,
                _ => {
                    let src = match source {
                        Source::Uniform => SpacingSource::SortedUniform,
                        Source::Exponential => SpacingSource::Exponential,
                    };
                    max_gap_experiment(gaps_for(k), trials, cli.seed, src)?
                }
            };
            let summary = json!({"ks": r.ks_statistic, "median": median(&r.statistics), "mean": r.mean,
                                 "k": r.k, "n": r.n, "trials": r.trials});
            // statistics come back sorted; emitted as an empirical sample
            let rows: Vec<StatRow> = r.statistics.iter().enumerate().map(|(i, &s)| StatRow(i as u64, s)).collect();
            sink.emit(&rows, || json!({"summary": summary, "statistics": r.statistics}))?;
            summary
        }
    };
    sink.manifest("gumbel", config, started, &summary, vec![])?;
    print_summary(&summary)?;
    Ok(0)
}
