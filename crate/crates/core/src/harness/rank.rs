use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::score::ScoreTable;
use crate::xcsp::Profile;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Track {
    Csp,
    Cop,
    FastCop,
    ParallelCop,
    MiniCsp,
    MiniCop,
}

impl Track {
    pub const ALL: [Track; 6] = [Track::Csp, Track::Cop, Track::FastCop, Track::ParallelCop, Track::MiniCsp, Track::MiniCop];

    pub fn name(self) -> &'static str {
        match self {
            Track::Csp => "csp",
            Track::Cop => "cop",
            Track::FastCop => "fast-cop",
            Track::ParallelCop => "parallel-cop",
            Track::MiniCsp => "mini-csp",
            Track::MiniCop => "mini-cop",
        }
    }

    pub fn is_mini(self) -> bool {
        matches!(self, Track::MiniCsp | Track::MiniCop)
    }

    pub fn is_cop(self) -> bool {
        !matches!(self, Track::Csp | Track::MiniCsp)
    }

    /// The standard track whose podium is excluded from this mini track.
    pub fn main_track(self) -> Option<Track> {
        match self {
            Track::MiniCsp => Some(Track::Csp),
            Track::MiniCop => Some(Track::Cop),
            _ => None,
        }
    }

    pub fn profile(self) -> Profile {
        if self.is_mini() {
            Profile::Mini
        } else {
            Profile::Main
        }
    }
}

impl fmt::Display for Track {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Track {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Track::ALL.into_iter().find(|t| t.name() == s).ok_or_else(|| format!("unknown track {s:?}"))
    }
}

/// Resource limits and selection size of a track.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrackConfig {
    pub track: Track,
    /// CPU time per job, summed over `cores`.
    pub cpu_budget: Duration,
    pub wall_budget: Duration,
    pub cores: u32,
    pub instance_count: usize,
}

impl TrackConfig {
    /// Limits as enforced on the cluster: 3 min CPU / 4.5 min wall for the
    /// fast track, 30 min CPU / 45 min wall for other sequential tracks,
    /// 4 cores and 30 min wall for the parallel track.
    pub fn defaults(track: Track) -> Self {
        let min = |m: u64| Duration::from_secs(m * 60);
        let (cpu, wall, cores) = match track {
            Track::FastCop => (min(3), Duration::from_secs(270), 1),
            Track::ParallelCop => (min(4 * 30), min(30), 4),
            _ => (min(30), min(45), 1),
        };
        let instance_count = match track {
            Track::Csp => 200,
            Track::Cop | Track::FastCop | Track::ParallelCop => 250,
            Track::MiniCsp | Track::MiniCop => 150,
        };
        TrackConfig { track, cpu_budget: cpu, wall_budget: wall, cores, instance_count }
    }

    /// Limits from the track table instead: 40 min timeouts, 4 min for the
    /// fast track.
    pub fn table_timeouts(track: Track) -> Self {
        let mut c = Self::defaults(track);
        let t = Duration::from_secs(if track == Track::FastCop { 4 * 60 } else { 40 * 60 });
        c.wall_budget = t;
        c.cpu_budget = t * c.cores;
        c
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverEntry {
    pub id: String,
    pub team: String,
    #[serde(default)]
    pub off_competition: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieBreak {
    /// Less summed wall time first.
    #[default]
    WallTime,
    /// Solver id only.
    SolverId,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RankOptions {
    /// Ranking of the corresponding main track, best first; its top three
    /// are not ranked in a mini track.
    pub main_ranking: Vec<String>,
    /// Teams whose variants are all ranked.
    pub variant_allow: BTreeSet<String>,
    pub tie_break: TieBreak,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Standing {
    pub solver: String,
    pub points: f64,
    pub wall_time: f64,
}

fn standings(table: &ScoreTable, ids: &BTreeSet<String>, tie: TieBreak) -> Vec<Standing> {
    let mut out: Vec<Standing> = ids
        .iter()
        .map(|s| Standing {
            solver: s.clone(),
            points: table.totals.get(s).copied().unwrap_or(0.0),
            wall_time: table.wall.get(s).copied().unwrap_or(0.0),
        })
        .collect();
    out.sort_by(|a, b| {
        let by_points = b.points.total_cmp(&a.points);
        let by_wall = match tie {
            TieBreak::WallTime => a.wall_time.total_cmp(&b.wall_time),
            TieBreak::SolverId => std::cmp::Ordering::Equal,
        };
        by_points.then(by_wall).then_with(|| a.solver.cmp(&b.solver))
    });
    out
}

/// Ranks the solvers of a track. Off-competition entries go first; in a
/// mini track, the podium of the main track next; then every team keeps
/// only its best variant, judged on scores among that team's variants
/// alone. Solvers without an entry are treated as single-solver teams.
pub fn rank(track: Track, table: &ScoreTable, entries: &[SolverEntry], options: &RankOptions) -> Vec<Standing> {
    let by_id: BTreeMap<&str, &SolverEntry> = entries.iter().map(|e| (e.id.as_str(), e)).collect();
    let team = |s: &str| by_id.get(s).map_or(s.to_string(), |e| e.team.clone());
    let mut ids: BTreeSet<String> =
        table.solvers().into_iter().filter(|s| !by_id.get(s.as_str()).is_some_and(|e| e.off_competition)).collect();
    if track.is_mini() {
        let podium: BTreeSet<&String> = options.main_ranking.iter().take(3).collect();
        ids.retain(|s| !podium.contains(s));
    }
    let mut teams: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for s in &ids {
        teams.entry(team(s)).or_default().insert(s.clone());
    }
    for (t, variants) in teams {
        if variants.len() < 2 || options.variant_allow.contains(&t) {
            continue;
        }
        let internal = standings(&table.restricted(&variants), &variants, options.tie_break);
        for s in internal.iter().skip(1) {
            ids.remove(&s.solver);
        }
    }
    standings(table, &ids, options.tie_break)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::record::{Claim, RunRecord};
    use crate::model::Assignment;

    fn entry(id: &str, team: &str, off: bool) -> SolverEntry {
        SolverEntry { id: id.into(), team: team.into(), off_competition: off }
    }

    /// A CSP table where `solved[s]` instances out of 100 are solved by `s`.
    fn table(solved: &[(&str, usize)]) -> ScoreTable {
        let mut recs = Vec::new();
        for &(s, k) in solved {
            for i in 0..100 {
                let mut r = RunRecord::new(&format!("i{i:03}"), s, if i < k { Claim::Sat } else { Claim::Unknown });
                if i < k {
                    r.assignment = Some(Assignment::new(vec![]));
                    r.verified = true;
                }
                r.wall_time = 1.0;
                recs.push(r);
            }
        }
        ScoreTable::build(recs)
    }

    fn names(r: &[Standing]) -> Vec<&str> {
        r.iter().map(|s| s.solver.as_str()).collect()
    }

    #[test]
    fn defaults_follow_the_cluster_limits() {
        let f = TrackConfig::defaults(Track::FastCop);
        assert_eq!((f.cpu_budget.as_secs(), f.wall_budget.as_secs()), (180, 270));
        let c = TrackConfig::defaults(Track::Csp);
        assert_eq!((c.cpu_budget.as_secs(), c.wall_budget.as_secs(), c.instance_count), (1800, 2700, 200));
        assert_eq!(TrackConfig::defaults(Track::Cop).instance_count, 250);
        assert_eq!(TrackConfig::defaults(Track::MiniCop).instance_count, 150);
        assert_eq!(TrackConfig::table_timeouts(Track::Cop).wall_budget.as_secs(), 2400);
    }

    #[test]
    fn off_competition_is_not_ranked() {
        let t = table(&[("ace", 90), ("b", 50)]);
        let r = rank(Track::Csp, &t, &[entry("ace", "ace", true), entry("b", "b", false)], &RankOptions::default());
        assert_eq!(names(&r), ["b"]);
        assert_eq!(t.totals["ace"], 90.0);
    }

    #[test]
    fn main_podium_is_excluded_from_mini() {
        let t = table(&[("a", 10), ("b", 20), ("c", 30)]);
        let opts = RankOptions { main_ranking: vec!["x".into(), "b".into(), "y".into(), "a".into()], ..Default::default() };
        assert_eq!(names(&rank(Track::MiniCsp, &t, &[], &opts)), ["c", "a"]);
        assert_eq!(names(&rank(Track::Csp, &t, &[], &opts)), ["c", "b", "a"]);
    }

    #[test]
    fn only_best_team_variant_is_ranked() {
        let t = table(&[("t1", 50), ("t2", 40), ("u", 45)]);
        let es = [entry("t1", "team", false), entry("t2", "team", false), entry("u", "u", false)];
        assert_eq!(names(&rank(Track::Csp, &t, &es, &RankOptions::default())), ["t1", "u"]);
        let allow = RankOptions { variant_allow: ["team".to_string()].into(), ..Default::default() };
        assert_eq!(names(&rank(Track::Csp, &t, &es, &allow)), ["t1", "u", "t2"]);
    }

    #[test]
    fn ties_break_on_wall_time() {
        let mut t = table(&[("a", 5), ("b", 5)]);
        t.wall.insert("a".into(), 900.0);
        assert_eq!(names(&rank(Track::Csp, &t, &[], &RankOptions::default())), ["b", "a"]);
        let by_id = RankOptions { tie_break: TieBreak::SolverId, ..Default::default() };
        assert_eq!(names(&rank(Track::Csp, &t, &[], &by_id)), ["a", "b"]);
    }
}
