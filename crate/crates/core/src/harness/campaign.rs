use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{self, BufRead, Read, Write};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::protocol::{engine_transcript, read_output};
use super::rank::{rank, RankOptions, SolverEntry, Standing, Track, TrackConfig};
use super::record::{claim_from_output, verify, RunRecord};
use super::score::ScoreTable;
use crate::engine::{Budget, SolverOptions};
use crate::model::{Assignment, Instance};
use crate::xcsp::parse_instance;

/// Environment variable capping the number of concurrent jobs.
pub const WORKERS_ENV: &str = "XCORE_WORKERS";

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuiltinOptions {
    #[serde(default)]
    pub restarts: bool,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub nodes: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    pub id: String,
    /// Defaults to the solver id.
    #[serde(default)]
    pub team: Option<String>,
    #[serde(default)]
    pub off_competition: bool,
    /// External command; `{instance}`, `{wall}` and `{cpu}` are replaced by
    /// the instance path and the budgets in whole seconds.
    #[serde(default)]
    pub command: Option<Vec<String>>,
    /// The built-in engine, run in process.
    #[serde(default)]
    pub builtin: Option<BuiltinOptions>,
}

impl SolverSpec {
    pub fn entry(&self) -> SolverEntry {
        SolverEntry { id: self.id.clone(), team: self.team.clone().unwrap_or_else(|| self.id.clone()), off_competition: self.off_competition }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    pub track: Track,
    /// Glob patterns, relative to the configuration file.
    pub instances: Vec<String>,
    pub solvers: Vec<SolverSpec>,
    /// Seconds; overrides the track default.
    #[serde(default)]
    pub wall_budget: Option<u64>,
    #[serde(default)]
    pub cpu_budget: Option<u64>,
    /// Use the 40-minute timeouts of the track table instead of the
    /// cluster limits.
    #[serde(default)]
    pub table_timeouts: bool,
    #[serde(default)]
    pub workers: Option<usize>,
    /// Prefix for external commands, e.g. a CPU-time limiter; takes the same
    /// placeholders as solver commands.
    #[serde(default)]
    pub limiter: Vec<String>,
    #[serde(default)]
    pub ranking: RankOptions,
}

#[derive(Debug, thiserror::Error)]
pub enum CampaignError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("invalid campaign configuration: {0}")]
    Config(String),
    #[error("bad instance pattern {0:?}")]
    Pattern(String),
    #[error("cannot parse instance {path}: {message}")]
    Instance { path: String, message: String },
    #[error("bad records line {line}: {message}")]
    Records { line: usize, message: String },
}

impl CampaignConfig {
    pub fn from_toml(text: &str) -> Result<Self, CampaignError> {
        let c: CampaignConfig = toml::from_str(text).map_err(|e| CampaignError::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self, CampaignError> {
        let text = std::fs::read_to_string(path).map_err(|source| CampaignError::Io { path: path.into(), source })?;
        Self::from_toml(&text)
    }

    fn validate(&self) -> Result<(), CampaignError> {
        let mut seen = std::collections::BTreeSet::new();
        for s in &self.solvers {
            if !seen.insert(&s.id) {
                return Err(CampaignError::Config(format!("duplicate solver id {:?}", s.id)));
            }
            match (&s.command, &s.builtin) {
                (Some(c), None) if !c.is_empty() => {}
                (None, Some(_)) => {}
                _ => return Err(CampaignError::Config(format!("solver {:?} needs exactly one of a non-empty command or builtin", s.id))),
            }
        }
        if self.workers == Some(0) {
            return Err(CampaignError::Config("workers must be positive".into()));
        }
        Ok(())
    }

    pub fn track_config(&self) -> TrackConfig {
        let mut t = if self.table_timeouts { TrackConfig::table_timeouts(self.track) } else { TrackConfig::defaults(self.track) };
        if let Some(w) = self.wall_budget {
            t.wall_budget = Duration::from_secs(w);
        }
        if let Some(c) = self.cpu_budget {
            t.cpu_budget = Duration::from_secs(c);
        }
        t
    }

    pub fn entries(&self) -> Vec<SolverEntry> {
        self.solvers.iter().map(SolverSpec::entry).collect()
    }
}

/// Configured worker count, capped by the environment and by the number of
/// jobs.
pub fn worker_count(configured: Option<usize>, jobs: usize) -> usize {
    let default = thread::available_parallelism().map_or(1, |n| n.get());
    let mut w = configured.unwrap_or(default);
    if let Some(cap) = std::env::var(WORKERS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        w = w.min(cap.max(1));
    }
    w.clamp(1, jobs.max(1))
}

/// Instance files matched by the patterns, sorted, with their ids (paths
/// relative to `base`).
pub fn collect_instances(patterns: &[String], base: &Path) -> Result<Vec<(String, PathBuf)>, CampaignError> {
    let mut out = BTreeMap::new();
    for p in patterns {
        let full = if Path::new(p).is_absolute() { p.clone() } else { base.join(p).to_string_lossy().into_owned() };
        for entry in glob::glob(&full).map_err(|_| CampaignError::Pattern(p.clone()))? {
            let path = entry.map_err(|e| CampaignError::Io { path: e.path().into(), source: io::Error::other(e.to_string()) })?;
            let id = path.strip_prefix(base).unwrap_or(&path).to_string_lossy().replace('\\', "/");
            out.insert(id, path);
        }
    }
    Ok(out.into_iter().collect())
}

fn substitute(arg: &str, instance: &Path, t: &TrackConfig) -> String {
    arg.replace("{instance}", &instance.to_string_lossy())
        .replace("{wall}", &t.wall_budget.as_secs().to_string())
        .replace("{cpu}", &t.cpu_budget.as_secs().to_string())
}

/// Runs an external command under a wall-clock limit and returns its
/// standard output and whether it was killed.
fn run_external(argv: &[String], wall: Duration) -> io::Result<(String, bool)> {
    let mut child = Command::new(&argv[0]).args(&argv[1..]).stdin(Stdio::null()).stdout(Stdio::piped()).stderr(Stdio::null()).spawn()?;
    let mut stdout = child.stdout.take().expect("piped stdout");
    let reader = thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = stdout.read_to_end(&mut buf);
        buf
    });
    let start = Instant::now();
    let mut killed = false;
    loop {
        if child.try_wait()?.is_some() {
            break;
        }
        if start.elapsed() >= wall {
            let _ = child.kill();
            let _ = child.wait();
            killed = true;
            break;
        }
        thread::sleep(Duration::from_millis(5));
    }
    let buf = reader.join().unwrap_or_default();
    Ok((String::from_utf8_lossy(&buf).into_owned(), killed))
}

/// Runs one solver on one instance and returns the verified record.
pub fn run_job(spec: &SolverSpec, id: &str, path: &Path, inst: &Instance, t: &TrackConfig, limiter: &[String]) -> RunRecord {
    let start = Instant::now();
    let mut notes = Vec::new();
    let text = if let Some(b) = &spec.builtin {
        let budget = Budget { wall: Some(t.wall_budget), nodes: b.nodes };
        let mut buf = Vec::new();
        let opts = SolverOptions { budget, seed: b.seed, restarts: b.restarts };
        engine_transcript(inst, opts, &mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("protocol text is ASCII")
    } else {
        let argv: Vec<String> =
            limiter.iter().chain(spec.command.iter().flatten()).map(|a| substitute(a, path, t)).collect();
        match run_external(&argv, t.wall_budget) {
            Ok((out, killed)) => {
                if killed {
                    notes.push(format!("killed after {} s", t.wall_budget.as_secs()));
                }
                out
            }
            Err(e) => {
                let mut r = RunRecord::new(id, &spec.id, super::record::Claim::Unknown);
                r.sense = inst.objective.as_ref().map(|o| o.sense);
                r.wall_time = start.elapsed().as_secs_f64();
                r.diagnostics.push(format!("cannot start {:?}: {e}", argv[0]));
                return r;
            }
        }
    };
    let wall_time = start.elapsed().as_secs_f64();
    let out = read_output(&text);
    let (claim, diagnostics) = claim_from_output(&out, inst.objective.is_some());
    let mut r = RunRecord::new(id, &spec.id, claim);
    r.wall_time = wall_time;
    r.diagnostics = notes;
    r.diagnostics.extend(diagnostics);
    r.bound = out.bound;
    if claim.has_solution() {
        r.assignment = out.values.map(Assignment::new);
    }
    verify(inst, &mut r);
    r
}

/// Everything a campaign produced.
#[derive(Clone, Debug)]
pub struct CampaignOutcome {
    pub records: Vec<RunRecord>,
    pub report: Report,
}

/// Runs every solver on every instance, at most `workers` jobs at a time.
pub fn run_campaign(config: &CampaignConfig, base: &Path) -> Result<CampaignOutcome, CampaignError> {
    let t = config.track_config();
    let files = collect_instances(&config.instances, base)?;
    let mut instances = Vec::new();
    for (id, path) in files {
        let text = std::fs::read_to_string(&path).map_err(|source| CampaignError::Io { path: path.clone(), source })?;
        let inst = parse_instance(&text, config.track.profile()).map_err(|ds| CampaignError::Instance {
            path: id.clone(),
            message: ds.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "),
        })?;
        instances.push((id, path, inst));
    }
    let jobs: Vec<(usize, usize)> = (0..instances.len()).flat_map(|i| (0..config.solvers.len()).map(move |s| (i, s))).collect();
    let results: Mutex<Vec<Option<RunRecord>>> = Mutex::new(vec![None; jobs.len()]);
    let next = AtomicUsize::new(0);
    thread::scope(|scope| {
        for _ in 0..worker_count(config.workers, jobs.len()) {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::SeqCst);
                let Some(&(i, s)) = jobs.get(k) else { break };
                let (id, path, inst) = &instances[i];
                let r = run_job(&config.solvers[s], id, path, inst, &t, &config.limiter);
                results.lock().expect("no worker panicked")[k] = Some(r);
            });
        }
    });
    let records: Vec<RunRecord> = results.into_inner().expect("workers joined").into_iter().map(|r| r.expect("every job ran")).collect();
    let report = Report::build(config.track, records.clone(), &config.entries(), &config.ranking);
    Ok(CampaignOutcome { records: report.table.records.clone(), report })
}

pub fn write_records(records: &[RunRecord], out: &mut dyn Write) -> io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut *out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_records(input: &mut dyn BufRead) -> Result<Vec<RunRecord>, CampaignError> {
    let mut out = Vec::new();
    for (no, line) in input.lines().enumerate() {
        let line = line.map_err(|e| CampaignError::Records { line: no + 1, message: e.to_string() })?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| CampaignError::Records { line: no + 1, message: e.to_string() })?);
    }
    Ok(out)
}

/// Scores and ranking of a set of records.
#[derive(Clone, Debug)]
pub struct Report {
    pub track: Track,
    pub table: ScoreTable,
    pub ranking: Vec<Standing>,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    track: Track,
    points: &'a BTreeMap<String, BTreeMap<String, f64>>,
    totals: &'a BTreeMap<String, f64>,
    ranking: &'a [Standing],
    discrepancies: &'a [String],
    invalid: Vec<(&'a str, &'a str, &'a [String])>,
}

fn fmt_points(p: f64) -> String {
    if p.fract() == 0.0 {
        format!("{p:.0}")
    } else {
        format!("{p}")
    }
}

impl Report {
    pub fn build(track: Track, records: Vec<RunRecord>, entries: &[SolverEntry], options: &RankOptions) -> Self {
        let table = ScoreTable::build(records);
        let ranking = rank(track, &table, entries, options);
        Report { track, table, ranking }
    }

    fn invalid(&self) -> Vec<&RunRecord> {
        self.table.records.iter().filter(|r| r.claim == super::record::Claim::Invalid).collect()
    }

    pub fn text(&self) -> String {
        let solvers: Vec<String> = self.table.solvers().into_iter().collect();
        let width = self.table.points.keys().map(String::len).max().unwrap_or(8).max(8);
        let mut s = String::new();
        let _ = writeln!(s, "track {}: {} instances, {} solvers", self.track, self.table.points.len(), solvers.len());
        let _ = writeln!(s);
        let _ = write!(s, "{:width$}", "instance");
        for v in &solvers {
            let _ = write!(s, "  {v:>8}");
        }
        let _ = writeln!(s);
        for (inst, ps) in &self.table.points {
            let _ = write!(s, "{inst:width$}");
            for v in &solvers {
                let _ = write!(s, "  {:>8}", ps.get(v).map_or("-".to_string(), |&p| fmt_points(p)));
            }
            let _ = writeln!(s);
        }
        let _ = write!(s, "{:width$}", "total");
        for v in &solvers {
            let _ = write!(s, "  {:>8}", fmt_points(self.table.totals[v]));
        }
        let _ = writeln!(s);
        let _ = writeln!(s);
        let _ = writeln!(s, "ranking");
        for (i, st) in self.ranking.iter().enumerate() {
            let _ = writeln!(s, "{:>3}. {}  {} points  {:.3} s", i + 1, st.solver, fmt_points(st.points), st.wall_time);
        }
        let invalid = self.invalid();
        if !invalid.is_empty() {
            let _ = writeln!(s);
            let _ = writeln!(s, "invalid claims");
            for r in invalid {
                let _ = writeln!(s, "  {} {}: {}", r.instance, r.solver, r.diagnostics.join("; "));
            }
        }
        if !self.table.discrepancies.is_empty() {
            let _ = writeln!(s);
            let _ = writeln!(s, "discrepancies");
            for d in &self.table.discrepancies {
                let _ = writeln!(s, "  {d}");
            }
        }
        s
    }

    pub fn json(&self) -> String {
        let j = ReportJson {
            track: self.track,
            points: &self.table.points,
            totals: &self.table.totals,
            ranking: &self.ranking,
            discrepancies: &self.table.discrepancies,
            invalid: self.invalid().into_iter().map(|r| (r.instance.as_str(), r.solver.as_str(), r.diagnostics.as_slice())).collect(),
        };
        serde_json::to_string_pretty(&j).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_parses_and_validates() {
        let c = CampaignConfig::from_toml(
            r#"
            track = "fast-cop"
            instances = ["*.xml"]
            wall_budget = 5
            [[solvers]]
            id = "engine"
            builtin = { restarts = true }
            [[solvers]]
            id = "ext"
            team = "t"
            command = ["./solver", "{instance}", "{wall}"]
            [ranking]
            variant_allow = ["t"]
            "#,
        )
        .unwrap();
        assert_eq!(c.track, Track::FastCop);
        assert_eq!(c.track_config().wall_budget, Duration::from_secs(5));
        assert_eq!(c.track_config().cpu_budget, Duration::from_secs(180));
        assert_eq!(c.entries()[0].team, "engine");
        let bad = r#"
            track = "csp"
            instances = []
            [[solvers]]
            id = "x"
        "#;
        assert!(CampaignConfig::from_toml(bad).is_err());
    }

    #[test]
    fn placeholders_are_substituted() {
        let t = TrackConfig::defaults(Track::Csp);
        assert_eq!(substitute("--cpu={cpu}:{wall}:{instance}", Path::new("a.xml"), &t), "--cpu=1800:2700:a.xml");
    }

    #[test]
    fn worker_count_is_capped_by_jobs() {
        assert_eq!(worker_count(Some(8), 3), 3);
        assert_eq!(worker_count(Some(2), 0), 1);
    }
}
