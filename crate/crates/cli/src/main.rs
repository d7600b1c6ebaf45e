use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use xcore::checker::check;
use xcore::engine::{Budget, SolverOptions};
use xcore::generators::{generate, Problem, ProblemSpec};
use xcore::harness::{
    engine_transcript, read_output, read_records, run_campaign, write_records, CampaignConfig, ProtocolStatus, RankOptions,
    Report, SolverEntry, Track,
};
use xcore::model::{Assignment, Instance};
use xcore::xcsp::{emit_instance, parse_instance, Profile};

#[derive(Parser)]
#[command(name = "xcore", version, about = "Generate, solve, check and score XCSP3-core instances")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a benchmark instance
    Generate(GenerateArgs),
    /// Solve an instance and print s/o/v lines
    Solve(SolveArgs),
    /// Check an assignment against an instance
    Check(CheckArgs),
    /// Score a records file
    Score(ScoreArgs),
    /// Run solvers over an instance set and score them
    Campaign(CampaignArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    Main,
    Mini,
}

impl From<ProfileArg> for Profile {
    fn from(p: ProfileArg) -> Self {
        match p {
            ProfileArg::Main => Profile::Main,
            ProfileArg::Mini => Profile::Mini,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(Args)]
struct GenerateArgs {
    /// Problem name, e.g. hamming or bin-packing-v1
    problem: String,
    /// Comma-separated integer parameters
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    params: Vec<i64>,
    /// Recorded in the problem spec; the models are deterministic
    #[arg(long)]
    seed: Option<u64>,
    /// Output file (standard output when absent)
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    /// Wall-clock budget in seconds
    #[arg(long)]
    budget_wall: Option<f64>,
    /// Search node budget
    #[arg(long)]
    budget_nodes: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "main")]
    profile: ProfileArg,
    #[arg(long, value_enum, default_value = "off")]
    restarts: OnOff,
}

#[derive(Args)]
struct CheckArgs {
    instance: PathBuf,
    /// Values in variable-id order, space separated
    #[arg(long, allow_hyphen_values = true, conflicts_with = "solution", required_unless_present = "solution")]
    values: Option<String>,
    /// Solver output file; its last `v` line is checked
    #[arg(long)]
    solution: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "main")]
    profile: ProfileArg,
}

#[derive(Args)]
struct ScoreArgs {
    /// Line-delimited JSON run records
    records: PathBuf,
    /// Campaign configuration giving the track, teams and ranking options
    #[arg(long, conflicts_with = "track")]
    config: Option<PathBuf>,
    #[arg(long)]
    track: Option<String>,
    /// Print the machine-readable report
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct CampaignArgs {
    config: PathBuf,
    /// Records output (default: records.jsonl next to the configuration)
    #[arg(long)]
    records: Option<PathBuf>,
    /// Also write the machine-readable report here
    #[arg(long)]
    json: Option<PathBuf>,
}

fn read_instance(path: &Path, profile: Profile) -> Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_instance(&text, profile).map_err(|ds| {
        let lines: Vec<String> = ds.iter().map(|d| d.to_string()).collect();
        anyhow!("cannot parse {}:\n{}", path.display(), lines.join("\n"))
    })
}

fn cmd_generate(a: GenerateArgs) -> Result<ExitCode> {
    let problem: Problem = a.problem.parse()?;
    let spec = ProblemSpec { problem, params: a.params, seed: a.seed };
    let inst = generate(&spec)?;
    let text = emit_instance(&inst);
    match a.output {
        Some(p) => fs::write(&p, text).with_context(|| format!("cannot write {}", p.display()))?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_solve(a: SolveArgs) -> Result<ExitCode> {
    if a.budget_wall.is_some_and(|w| !(w.is_finite() && w >= 0.0)) {
        bail!("--budget-wall must be a non-negative number of seconds");
    }
    let inst = read_instance(&a.instance, a.profile.into())?;
    let budget = Budget { wall: a.budget_wall.map(Duration::from_secs_f64), nodes: a.budget_nodes };
    let options = SolverOptions { budget, seed: a.seed, restarts: matches!(a.restarts, OnOff::On) };
    let stdout = io::stdout();
    let status = engine_transcript(&inst, options, &mut stdout.lock())?;
    Ok(if status == ProtocolStatus::Unknown { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn cmd_check(a: CheckArgs) -> Result<ExitCode> {
    let inst = read_instance(&a.instance, a.profile.into())?;
    let values: Vec<i64> = match (&a.values, &a.solution) {
        (Some(v), _) => v
            .split_whitespace()
            .map(|t| t.parse::<i64>().map_err(|_| anyhow!("bad value {t:?}")))
            .collect::<Result<_>>()?,
        (None, Some(p)) => {
            let text = fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?;
            read_output(&text).values.ok_or_else(|| anyhow!("{} has no v line", p.display()))?
        }
        (None, None) => unreachable!("clap requires one of --values and --solution"),
    };
    let verdict = check(&inst, &Assignment::new(values));
    if verdict.satisfied() {
        println!("satisfied");
        return Ok(ExitCode::SUCCESS);
    }
    if let Some((expected, given)) = verdict.length_mismatch {
        println!("wrong length: {given} values for {expected} variables");
    }
    if !verdict.domain_violations.is_empty() {
        println!("out of domain: {:?}", verdict.domain_violations);
    }
    if !verdict.violated.is_empty() {
        println!("violated: {:?}", verdict.violated);
    }
    Ok(ExitCode::from(1))
}

fn cmd_score(a: ScoreArgs) -> Result<ExitCode> {
    let f = fs::File::open(&a.records).with_context(|| format!("cannot read {}", a.records.display()))?;
    let records = read_records(&mut BufReader::new(f))?;
    let (track, entries, options): (Track, Vec<SolverEntry>, RankOptions) = match (&a.config, &a.track) {
        (Some(c), _) => {
            let cfg = CampaignConfig::load(c)?;
            (cfg.track, cfg.entries(), cfg.ranking)
        }
        (None, Some(t)) => (t.parse().map_err(|e: String| anyhow!(e))?, Vec::new(), RankOptions::default()),
        (None, None) => {
            let cop = records.iter().any(|r| r.sense.is_some());
            (if cop { Track::Cop } else { Track::Csp }, Vec::new(), RankOptions::default())
        }
    };
    let report = Report::build(track, records, &entries, &options);
    print!("{}", if a.json { report.json() + "\n" } else { report.text() });
    Ok(ExitCode::SUCCESS)
}

fn cmd_campaign(a: CampaignArgs) -> Result<ExitCode> {
    let cfg = CampaignConfig::load(&a.config)?;
    let base = a.config.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let outcome = run_campaign(&cfg, base)?;
    let records_path = a.records.unwrap_or_else(|| base.join("records.jsonl"));
    let mut f = fs::File::create(&records_path).with_context(|| format!("cannot write {}", records_path.display()))?;
    write_records(&outcome.records, &mut f)?;
    if let Some(j) = a.json {
        fs::write(&j, outcome.report.json() + "\n").with_context(|| format!("cannot write {}", j.display()))?;
    }
    print!("{}", outcome.report.text());
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let r = match cli.command {
        Cmd::Generate(a) => cmd_generate(a),
        Cmd::Solve(a) => cmd_solve(a),
        Cmd::Check(a) => cmd_check(a),
        Cmd::Score(a) => cmd_score(a),
        Cmd::Campaign(a) => cmd_campaign(a),
    };
    r.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::from(2)
    })
}
