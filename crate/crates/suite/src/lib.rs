//! Benchmark suites: run seeded trial batches over a set of worlds, score
//! each environment, and render reports.
//!
//! The per-environment score is
//! `success * OT / clamp(AT, 4*OT, 8*OT)` averaged over trials, where OT is
//! the course's optimal traversal time and AT the measured one. A successful
//! trial therefore scores in [0.125, 0.25] and failures score 0.

mod report;
mod scoring;
mod suite;

pub use report::{render_csv, render_markdown};
pub use scoring::{aggregate_score, optimal_time, score_trial, EnvScore, ScoreError};
pub use suite::{
    run_suite, trial_seed, EpisodeArtifact, RunMeta, SuiteConfig, SuiteOutput, TransitionRecord,
    TrialRecord,
};
