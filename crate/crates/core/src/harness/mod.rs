//! Campaign runner and competition scoring.
//!
//! Solvers are run over instance sets under a track's budgets, every
//! claimed solution is verified with the checker, and points and rankings
//! follow the competition rules.

mod campaign;
mod protocol;
mod rank;
mod record;
mod score;

pub use campaign::{
    collect_instances, read_records, run_campaign, run_job, worker_count, write_records, BuiltinOptions, CampaignConfig,
    CampaignError, CampaignOutcome, Report, SolverSpec, WORKERS_ENV,
};
pub use protocol::{engine_transcript, read_output, value_line, ProtocolStatus, SolverOutput};
pub use rank::{rank, RankOptions, SolverEntry, Standing, TieBreak, Track, TrackConfig};
pub use record::{claim_from_output, verify, Claim, RunRecord};
pub use score::{score_cop, score_csp, InstanceScore, ScoreTable};
