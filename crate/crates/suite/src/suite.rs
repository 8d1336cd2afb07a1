//! Seeded trial batches over a world set, parallel across episodes.

use crate::scoring::{aggregate_score, EnvScore, ScoreError};
use navbench_core::episode::{run_episode, EpisodeSetup, PolicyChoice};
use navbench_core::{EpisodeRecord, FsmState, SafetyMode};
use navbench_worldgen::WorldSpec;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// fnv1a over the world id, mixed with the root seed and trial index.
pub fn trial_seed(root: u64, world_id: &str, trial: u32) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in world_id.as_bytes() {
        hash ^= *b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01B3);
    }
    let mut z = hash ^ root.rotate_left(17) ^ ((trial as u64) << 32);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub trials_per_world: u32,
    pub root_seed: u64,
    pub safety: SafetyMode,
    pub policy: PolicyChoice,
    pub jobs: usize,
    /// Per-trial timeout = 8 * OT + this slack; beyond 8 * OT the score is
    /// already floor-clipped.
    pub timeout_slack: f64,
    /// Render a costmap image per episode.
    pub dump_costmap: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            trials_per_world: 1,
            root_seed: 0,
            safety: SafetyMode::Fi,
            policy: PolicyChoice::Pursuit,
            jobs: 1,
            timeout_slack: 10.0,
            dump_costmap: false,
        }
    }
}

/// One trial's persisted summary. Scoring is a pure fold over these.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub world_id: String,
    pub trial_index: u32,
    pub outcome: String,
    pub actual_time: f64,
    pub optimal_time: f64,
    pub seed: u64,
    pub trace_path: String,
    /// Fraction of controller ticks per state.
    pub fsm_summary: BTreeMap<String, f64>,
    pub loop_detected: bool,
    pub transitions: Vec<TransitionRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionRecord {
    pub t: f64,
    pub from: String,
    pub to: String,
    pub trigger: String,
}

/// Everything one episode produced; file writes happen later on the
/// coordinating thread.
#[derive(Debug, Clone)]
pub struct EpisodeArtifact {
    pub record: TrialRecord,
    pub trace_csv: Vec<u8>,
    pub costmap_pgm: Option<Vec<u8>>,
}

/// Run metadata persisted next to the records for reporting.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunMeta {
    pub schema_version: u32,
    pub method: String,
    pub root_seed: u64,
    pub trials_per_world: u32,
    pub worlds: usize,
    pub jobs: usize,
}

#[derive(Debug, Clone)]
pub struct SuiteOutput {
    pub artifacts: Vec<EpisodeArtifact>,
    pub env_scores: Vec<EnvScore>,
    pub aggregate: f64,
}

fn episode_to_record(
    world_id: &str,
    trial: u32,
    seed: u64,
    optimal: f64,
    record: &EpisodeRecord,
) -> TrialRecord {
    let mut fsm_summary = BTreeMap::new();
    for state in FsmState::ALL {
        fsm_summary.insert(
            state.as_str().to_string(),
            record.state_shares[state.index()],
        );
    }
    TrialRecord {
        world_id: world_id.to_string(),
        trial_index: trial,
        outcome: record.outcome.as_str().to_string(),
        actual_time: record.actual_time,
        optimal_time: optimal,
        seed,
        trace_path: format!("traces/{world_id}_t{trial}.csv"),
        fsm_summary,
        loop_detected: record.loop_detected,
        transitions: record
            .transitions
            .iter()
            .map(|e| TransitionRecord {
                t: e.t,
                from: e.from.as_str().to_string(),
                to: e.to.as_str().to_string(),
                trigger: e.trigger.as_str().to_string(),
            })
            .collect(),
    }
}

/// Run every (world, trial) pair, in parallel when `jobs > 1`. Results are
/// keyed and folded in deterministic order, so the aggregate does not depend
/// on scheduling.
pub fn run_suite(
    worlds: &[(String, WorldSpec)],
    config: &SuiteConfig,
    setup_base: &EpisodeSetup,
) -> Result<SuiteOutput, ScoreError> {
    let mut jobs_pairs: Vec<(usize, u32)> = Vec::new();
    for (wi, _) in worlds.iter().enumerate() {
        for trial in 0..config.trials_per_world {
            jobs_pairs.push((wi, trial));
        }
    }

    let run_one = |&(wi, trial): &(usize, u32)| -> EpisodeArtifact {
        let (world_id, world) = &worlds[wi];
        let seed = trial_seed(config.root_seed, world_id, trial);
        let mut setup = setup_base.clone();
        setup.safety_mode = config.safety;
        setup.policy = config.policy;
        setup.sim.seed = seed;
        setup.sim.timeout = 8.0 * world.optimal_time + config.timeout_slack;
        setup.keep_costmap = config.dump_costmap;
        let record = match run_episode(&world.grid, world.start, world.goal, &setup) {
            Ok(r) => r,
            Err(e) => {
                // A world/pose error counts as an immediate failed trial; the
                // suite keeps going.
                eprintln!("episode {world_id} trial {trial} failed: {e}");
                return EpisodeArtifact {
                    record: TrialRecord {
                        world_id: world_id.clone(),
                        trial_index: trial,
                        outcome: "timeout".to_string(),
                        actual_time: 8.0 * world.optimal_time + config.timeout_slack,
                        optimal_time: world.optimal_time,
                        seed,
                        trace_path: String::new(),
                        fsm_summary: BTreeMap::new(),
                        loop_detected: false,
                        transitions: Vec::new(),
                    },
                    trace_csv: Vec::new(),
                    costmap_pgm: None,
                };
            }
        };
        let mut trace_csv = Vec::new();
        navbench_core::episode::write_trace_csv(&record, &mut trace_csv)
            .expect("in-memory write cannot fail");
        let costmap_pgm = record.final_costmap.as_ref().map(|map| {
            let mut bytes = Vec::new();
            map.write_pgm(&mut bytes).expect("in-memory write cannot fail");
            bytes
        });
        EpisodeArtifact {
            record: episode_to_record(world_id, trial, seed, world.optimal_time, &record),
            trace_csv,
            costmap_pgm,
        }
    };

    let mut artifacts: Vec<EpisodeArtifact> = if config.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.jobs)
            .build()
            .expect("thread pool");
        pool.install(|| jobs_pairs.par_iter().map(run_one).collect())
    } else {
        jobs_pairs.iter().map(run_one).collect()
    };
    artifacts.sort_by(|a, b| {
        (&a.record.world_id, a.record.trial_index).cmp(&(&b.record.world_id, b.record.trial_index))
    });

    let records: Vec<TrialRecord> = artifacts.iter().map(|a| a.record.clone()).collect();
    let (env_scores, aggregate) = aggregate_score(&records)?;
    Ok(SuiteOutput {
        artifacts,
        env_scores,
        aggregate,
    })
}
