//! `patronet`: batch front end for the patronet library.
//!
//! Exit status is 0 on success, 1 when `verify` finds a profitable deviation
//! and 2 for usage or input errors.

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use patronet::game::{
    self, brute_force_equilibria, comparative_statics, construct_benchmark,
    construct_clientelism_equilibrium, enumerate_equilibria, equilibrium_to_network,
    partition_sets, verify_spne, GameParams, GridSpec, StrategyProfile, StrategySpace,
};
use patronet::graph::{parse_village_file, validate_network, write_village_csv};
use patronet::indices::{compute_indices, write_indices_csv};
use patronet::regression::{
    client_effect_experiment, cols, read_dataset, run_suite, simulate_survey, suite_table_csv,
    write_dataset, EffectSizes, FitSummary, NetworkSource, RandomNetworkConfig, SurveyConfig,
};
use patronet::Execution;

use output::{csv_rows, emit, json};

#[derive(Parser)]
#[command(name = "patronet", version, about = "Service-network indices, clientelism game solver and regression runs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-household indices of an edge-list CSV.
    Indices(IndicesArgs),
    /// Construct the clientelism equilibrium.
    Solve(SolveArgs),
    /// Check a strategy profile for profitable deviations (exit 1 if any).
    Verify(VerifyArgs),
    /// Enumerate equilibria of a small game.
    Bruteforce(BruteArgs),
    /// Comparative statics over a parameter grid.
    Sweep(SweepArgs),
    /// Export the equilibrium or a benchmark economy as an edge list.
    ExportNet(ExportArgs),
    /// Draw a synthetic survey dataset.
    Simulate(SimulateArgs),
    /// Run the model suite on a dataset.
    Regress(RegressArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct Out {
    /// Output file; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ParamArgs {
    /// JSON file with `n, b, theta, c, R, e`; individual flags override it.
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long = "R")]
    r: Option<f64>,
    #[arg(long)]
    e: Option<f64>,
}

impl ParamArgs {
    /// File values (or the reference point) with flag overrides applied.
    fn resolve(&self) -> Result<GameParams> {
        let base = match &self.params {
            Some(path) => serde_json::from_str(&read(path)?)
                .with_context(|| format!("parsing {}", path.display()))?,
            None => GameParams::reference(),
        };
        let pick = |flag: Option<f64>, name: &'static str, base: game::Rational| match flag {
            Some(v) => game::rational_from_f64(name, v),
            None => Ok(base),
        };
        Ok(GameParams::exact(
            self.n.unwrap_or(base.n),
            pick(self.b, "b", base.b)?,
            pick(self.theta, "theta", base.theta)?,
            pick(self.c, "c", base.c)?,
            pick(self.r, "R", base.r)?,
            pick(self.e, "e", base.e)?,
        )?)
    }
}

#[derive(Args)]
struct IndicesArgs {
    /// Edge-list CSV.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[command(flatten)]
    out: Out,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[command(flatten)]
    out: Out,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Strategy profile JSON; the constructed equilibrium when omitted.
    #[arg(long)]
    profile: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[command(flatten)]
    out: Out,
}

#[derive(Clone, Copy, ValueEnum)]
enum Space {
    Pruned,
    Full,
}

#[derive(Args)]
struct BruteArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, value_enum, default_value = "pruned")]
    space: Space,
    /// Largest n accepted.
    #[arg(long, default_value_t = game::DEFAULT_MAX_N)]
    max_n: usize,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[command(flatten)]
    out: Out,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Grid as inline JSON or a path to a JSON file, e.g. `{"b":[3,4,5]}`.
    #[arg(long)]
    grid: String,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[command(flatten)]
    out: Out,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Export the no-election benchmark instead of the equilibrium.
    #[arg(long)]
    benchmark: bool,
    /// Providers per single-resource elite type in the benchmark.
    #[arg(long, default_value_t = 1, requires = "benchmark")]
    replicas: usize,
    /// Benchmark agents link to a single elite.
    #[arg(long, requires = "benchmark")]
    capped: bool,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[command(flatten)]
    out: Out,
}

#[derive(Clone, Copy, ValueEnum)]
enum Source {
    Random,
    Game,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 36)]
    villages: usize,
    /// Households per village; the game source uses `n` instead.
    #[arg(long, default_value_t = 100)]
    households: usize,
    #[arg(long, value_enum, default_value = "random")]
    source: Source,
    /// True client effect on participation.
    #[arg(long, default_value_t = 0.15)]
    effect: f64,
    /// True client effect on days worked.
    #[arg(long, default_value_t = 5.0)]
    days_effect: f64,
    /// Instead of a dataset, fit the client model on this many surveys
    /// (seeds `seed..seed+count`) and write one estimate per seed.
    #[arg(long)]
    experiment: Option<u64>,
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Dataset CSV; the column sidecar goes to `<output>.meta.json`.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct RegressArgs {
    /// Dataset CSV.
    #[arg(long)]
    input: PathBuf,
    /// Column sidecar; defaults to `<input>.meta.json`.
    #[arg(long)]
    meta: Option<PathBuf>,
    /// Outcome columns to model.
    #[arg(long = "outcome", default_values_t = [cols::PARTICIPATION.to_owned(), cols::DAYS_WORKED.to_owned()])]
    outcomes: Vec<String>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[command(flatten)]
    out: Out,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Serde name of a unit enum value.
fn token<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default()
}

fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn indices(a: IndicesArgs) -> Result<()> {
    let parsed = parse_village_file(&a.input)?;
    let villages: Vec<_> = parsed.into_iter().map(|p| p.network).collect();
    for net in &villages {
        let report = validate_network(net);
        if !report.is_clean() {
            bail!(
                "village {} is invalid: {}",
                net.village_id(),
                serde_json::to_string(&report.violations)?
            );
        }
    }
    let run = compute_indices(&villages, Execution::Parallel);
    let bytes = match a.format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_indices_csv(&mut buf, &run.households)?;
            buf
        }
        Format::Json => json(&serde_json::json!({
            "households": run.households,
            "patron_reports": run.patron_reports,
        }))?,
    };
    emit(a.out.output.as_deref(), &bytes)
}

fn solve(a: SolveArgs) -> Result<()> {
    let p = a.params.resolve()?;
    let eq = construct_clientelism_equilibrium(&p)?;
    let bytes = match a.format {
        Format::Json => json(&eq)?,
        Format::Csv => csv_rows(
            &["agent", "search_cost", "link", "vote", "expected_public_work", "lifetime_payoff"],
            eq.outcome.agents.iter().map(|ag| {
                vec![
                    ag.agent.to_string(),
                    game::to_f64(&ag.search_cost).to_string(),
                    ag.link.map(|e| e.index().to_string()).unwrap_or_default(),
                    token(&ag.vote),
                    game::to_f64(&ag.expected_public_work).to_string(),
                    game::to_f64(&ag.lifetime_payoff).to_string(),
                ]
            }),
        ),
    };
    emit(a.out.output.as_deref(), &bytes)
}

fn verify(a: VerifyArgs) -> Result<bool> {
    let p = a.params.resolve()?;
    let profile: StrategyProfile = match &a.profile {
        Some(path) => serde_json::from_str(&read(path)?)
            .with_context(|| format!("parsing {}", path.display()))?,
        None => construct_clientelism_equilibrium(&p)?.profile,
    };
    let report = verify_spne(&p, &profile)?;
    let bytes = match a.format {
        Format::Json => json(&report)?,
        Format::Csv => csv_rows(
            &["stage", "agent", "deviation", "gain", "pass"],
            report.records.iter().map(|r| {
                vec![
                    token(&r.stage),
                    r.agent.to_string(),
                    r.description(),
                    r.gain.to_string(),
                    r.pass().to_string(),
                ]
            }),
        ),
    };
    emit(a.out.output.as_deref(), &bytes)?;
    for r in report.failures() {
        eprintln!("profitable deviation: {}", r.description());
    }
    Ok(report.passed())
}

fn bruteforce(a: BruteArgs) -> Result<()> {
    let p = a.params.resolve()?;
    let res = match a.space {
        Space::Pruned => brute_force_equilibria(&p, a.max_n, Execution::Parallel)?,
        Space::Full => {
            let sets = partition_sets(&p);
            let pi0 = sets.pi0.into_iter().collect();
            let pi1: std::collections::BTreeSet<usize> = sets.pi1.into_iter().collect();
            enumerate_equilibria(
                &p,
                [pi0, pi1.clone(), pi1],
                StrategySpace::Full,
                a.max_n,
                Execution::Parallel,
            )?
        }
    };
    let bytes = match a.format {
        Format::Json => json(&res)?,
        Format::Csv => csv_rows(
            &["clients_0", "clients_1", "clients_2", "tally", "profiles"],
            res.partitions.iter().map(|pc| {
                let join = |v: &[usize]| {
                    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
                };
                let part = &pc.partition;
                vec![
                    join(&part.clients[0]),
                    join(&part.clients[1]),
                    join(&part.clients[2]),
                    part.tally.map(|t| t.to_string()).join(";"),
                    pc.profiles.to_string(),
                ]
            }),
        ),
    };
    emit(a.out.output.as_deref(), &bytes)
}

fn sweep(a: SweepArgs) -> Result<()> {
    let base = a.params.resolve()?;
    let text = if a.grid.trim_start().starts_with('{') {
        a.grid.clone()
    } else {
        read(Path::new(&a.grid))?
    };
    let grid: GridSpec = serde_json::from_str(&text).context("parsing --grid")?;
    let rows = comparative_statics(&base, &grid, Execution::Parallel)?;
    let bytes = match a.format {
        Format::Json => json(&rows)?,
        Format::Csv => {
            let q = |v: &Option<game::Rational>| v.as_ref().map(|q| game::to_f64(q).to_string()).unwrap_or_default();
            csv_rows(
                &[
                    "n", "b", "theta", "c", "R", "e", "included", "clients", "client_work",
                    "nonclient_work", "work_gap",
                ],
                rows.iter().map(|r| {
                    let p = &r.params;
                    vec![
                        p.n.to_string(),
                        game::to_f64(&p.b).to_string(),
                        game::to_f64(&p.theta).to_string(),
                        game::to_f64(&p.c).to_string(),
                        game::to_f64(&p.r).to_string(),
                        game::to_f64(&p.e).to_string(),
                        r.included.to_string(),
                        r.clients.map(|c| c.to_string()).unwrap_or_default(),
                        q(&r.client_work),
                        q(&r.nonclient_work),
                        q(&r.work_gap),
                    ]
                }),
            )
        }
    };
    emit(a.out.output.as_deref(), &bytes)
}

fn export_net(a: ExportArgs) -> Result<()> {
    if a.format != Format::Csv {
        bail!("export-net writes edge-list CSV only");
    }
    let p = a.params.resolve()?;
    let net = if a.benchmark {
        construct_benchmark(&p, a.replicas, a.capped)?.network
    } else {
        let eq = construct_clientelism_equilibrium(&p)?;
        equilibrium_to_network(&p, &eq.profile)
    };
    let mut buf = Vec::new();
    write_village_csv(&mut buf, std::slice::from_ref(&net))?;
    emit(a.out.output.as_deref(), &buf)
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let effects = EffectSizes {
        participation_client: a.effect,
        days_client: a.days_effect,
    };
    let cfg = match a.source {
        Source::Random => SurveyConfig {
            villages: a.villages,
            households: a.households,
            source: NetworkSource::Random(RandomNetworkConfig::default()),
            effects,
        },
        Source::Game => {
            let p = a.params.resolve()?;
            SurveyConfig {
                villages: a.villages,
                households: p.n,
                source: NetworkSource::Game(p),
                effects,
            }
        }
    };
    if let Some(count) = a.experiment {
        let seeds: Vec<u64> = (a.seed..a.seed.saturating_add(count)).collect();
        let estimates = client_effect_experiment(&cfg, &seeds, Execution::Parallel)?;
        let bytes = match a.format {
            Format::Json => json(&estimates)?,
            Format::Csv => csv_rows(
                &["seed", "estimate", "se", "p_value"],
                estimates.iter().map(|s| {
                    vec![
                        s.seed.to_string(),
                        s.estimate.to_string(),
                        s.se.to_string(),
                        s.p_value.to_string(),
                    ]
                }),
            ),
        };
        return emit(a.output.as_deref(), &bytes);
    }
    if a.format != Format::Csv {
        bail!("datasets are written as CSV with a JSON sidecar");
    }
    let Some(output) = a.output else {
        bail!("simulate needs --output for the dataset and its sidecar");
    };
    let data = simulate_survey(&cfg, a.seed, Execution::Parallel)?;
    let (mut csv_buf, mut meta_buf) = (Vec::new(), Vec::new());
    write_dataset(&data, &mut csv_buf, &mut meta_buf)?;
    meta_buf.push(b'\n');
    emit(Some(&output), &csv_buf)?;
    emit(Some(&sidecar(&output)), &meta_buf)
}

#[derive(Serialize)]
#[serde(untagged)]
enum SuiteEntry {
    Fit(FitSummary),
    Failed {
        model: u8,
        variant: &'static str,
        outcome: String,
        error: String,
    },
}

fn regress(a: RegressArgs) -> Result<()> {
    let meta = a.meta.clone().unwrap_or_else(|| sidecar(&a.input));
    let csv_file = std::fs::File::open(&a.input)
        .with_context(|| format!("opening {}", a.input.display()))?;
    let meta_file =
        std::fs::File::open(&meta).with_context(|| format!("opening {}", meta.display()))?;
    let data = read_dataset(std::io::BufReader::new(csv_file), meta_file)?;
    let outcomes: Vec<&str> = a.outcomes.iter().map(String::as_str).collect();
    let rows = run_suite(&data, &outcomes, Execution::Parallel);
    let bytes = match a.format {
        Format::Csv => {
            let mut buf = Vec::new();
            suite_table_csv(&mut buf, &rows)?;
            buf
        }
        Format::Json => {
            let entries: Vec<SuiteEntry> = rows
                .iter()
                .map(|row| match &row.result {
                    Ok(fit) => SuiteEntry::Fit(FitSummary::new(&row.spec, fit)),
                    Err(e) => SuiteEntry::Failed {
                        model: row.spec.model,
                        variant: row.spec.variant.as_str(),
                        outcome: row.spec.outcome.clone(),
                        error: e.clone(),
                    },
                })
                .collect();
            json(&entries)?
        }
    };
    emit(a.out.output.as_deref(), &bytes)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Indices(a) => indices(a)?,
        Command::Solve(a) => solve(a)?,
        Command::Verify(a) => return verify(a),
        Command::Bruteforce(a) => bruteforce(a)?,
        Command::Sweep(a) => sweep(a)?,
        Command::ExportNet(a) => export_net(a)?,
        Command::Simulate(a) => simulate(a)?,
        Command::Regress(a) => regress(a)?,
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
