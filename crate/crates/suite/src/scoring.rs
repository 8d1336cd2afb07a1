//! Per-trial and per-environment scoring.

use crate::suite::TrialRecord;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ScoreError {
    #[error("optimal time must be positive, got {0}")]
    InvalidOptimalTime(f64),
    #[error("path length must be positive, got {0}")]
    InvalidPathLength(f64),
}

/// `success * OT / clamp(AT, 4*OT, 8*OT)`.
pub fn score_trial(success: bool, actual_time: f64, optimal: f64) -> Result<f64, ScoreError> {
    if optimal <= 0.0 {
        return Err(ScoreError::InvalidOptimalTime(optimal));
    }
    if !success {
        return Ok(0.0);
    }
    let clipped = actual_time.clamp(4.0 * optimal, 8.0 * optimal);
    Ok(optimal / clipped)
}

/// Optimal traversal time at the benchmark's nominal 2 m/s top speed.
pub fn optimal_time(path_length: f64) -> Result<f64, ScoreError> {
    if path_length <= 0.0 {
        return Err(ScoreError::InvalidPathLength(path_length));
    }
    Ok(path_length / navbench_worldgen::NOMINAL_SPEED)
}

/// Mean trial score for one environment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnvScore {
    pub world_id: String,
    pub optimal_time: f64,
    pub trials: usize,
    pub successes: usize,
    pub collisions: usize,
    pub timeouts: usize,
    pub score: f64,
}

/// Fold records into per-world scores and the unweighted aggregate. Pure and
/// order-insensitive: records are grouped and averaged by (world, trial) key.
pub fn aggregate_score(records: &[TrialRecord]) -> Result<(Vec<EnvScore>, f64), ScoreError> {
    use std::collections::BTreeMap;
    let mut by_world: BTreeMap<&str, Vec<&TrialRecord>> = BTreeMap::new();
    for r in records {
        by_world.entry(&r.world_id).or_default().push(r);
    }
    let mut rows = Vec::with_capacity(by_world.len());
    let mut total = 0.0;
    for (world_id, mut trials) in by_world {
        trials.sort_by_key(|r| r.trial_index);
        let mut sum = 0.0;
        let mut successes = 0;
        let mut collisions = 0;
        let mut timeouts = 0;
        for r in &trials {
            match r.outcome.as_str() {
                "success" => successes += 1,
                "collision" => collisions += 1,
                _ => timeouts += 1,
            }
            sum += score_trial(r.outcome == "success", r.actual_time, r.optimal_time)?;
        }
        let score = sum / trials.len() as f64;
        total += score;
        rows.push(EnvScore {
            world_id: world_id.to_string(),
            optimal_time: trials[0].optimal_time,
            trials: trials.len(),
            successes,
            collisions,
            timeouts,
            score,
        });
    }
    let aggregate = if rows.is_empty() {
        0.0
    } else {
        total / rows.len() as f64
    };
    Ok((rows, aggregate))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lower_clip_binds() {
        // AT below 4*OT clips up: maximal score 0.25
        assert_eq!(score_trial(true, 10.0, 5.0).unwrap(), 0.25);
        assert_eq!(score_trial(true, 0.0, 5.0).unwrap(), 0.25);
    }

    #[test]
    fn upper_clip_binds() {
        assert_eq!(score_trial(true, 50.0, 5.0).unwrap(), 0.125);
    }

    #[test]
    fn failure_scores_zero() {
        assert_eq!(score_trial(false, 3.0, 5.0).unwrap(), 0.0);
        assert_eq!(score_trial(false, 1e9, 5.0).unwrap(), 0.0);
    }

    #[test]
    fn unclipped_band() {
        let s = score_trial(true, 30.0, 5.0).unwrap();
        assert!((s - 5.0 / 30.0).abs() < 1e-15);
    }

    #[test]
    fn boundary_cases_exact() {
        assert_eq!(score_trial(true, 20.0, 5.0).unwrap(), 0.25);
        assert_eq!(score_trial(true, 40.0, 5.0).unwrap(), 0.125);
    }

    #[test]
    fn invalid_optimal_time() {
        assert!(matches!(
            score_trial(true, 1.0, 0.0),
            Err(ScoreError::InvalidOptimalTime(_))
        ));
    }

    #[test]
    fn optimal_time_examples() {
        assert_eq!(optimal_time(10.0).unwrap(), 5.0);
        assert_eq!(optimal_time(2.0).unwrap(), 1.0);
        assert!(matches!(
            optimal_time(-1.0),
            Err(ScoreError::InvalidPathLength(_))
        ));
    }

    fn record(world: &str, trial: u32, outcome: &str, at: f64, ot: f64) -> TrialRecord {
        TrialRecord {
            world_id: world.to_string(),
            trial_index: trial,
            outcome: outcome.to_string(),
            actual_time: at,
            optimal_time: ot,
            seed: 0,
            trace_path: String::new(),
            fsm_summary: Default::default(),
            loop_detected: false,
            transitions: Vec::new(),
        }
    }

    #[test]
    fn aggregate_is_order_invariant() {
        let mut records = vec![
            record("b", 0, "success", 10.0, 5.0),
            record("a", 1, "timeout", 50.0, 5.0),
            record("a", 0, "success", 30.0, 5.0),
            record("b", 1, "collision", 3.0, 5.0),
        ];
        let (rows, agg) = aggregate_score(&records).unwrap();
        records.reverse();
        let (rows2, agg2) = aggregate_score(&records).unwrap();
        assert_eq!(agg, agg2);
        assert_eq!(rows.len(), rows2.len());
        for (x, y) in rows.iter().zip(&rows2) {
            assert_eq!(x.world_id, y.world_id);
            assert_eq!(x.score, y.score);
        }
        // a: (1/6 + 0)/2 ; b: (0.25 + 0)/2
        let want = ((5.0 / 30.0) / 2.0 + 0.125) / 2.0;
        assert!((agg - want).abs() < 1e-15);
    }

    #[test]
    fn success_scores_stay_in_band() {
        for k in 0..2000 {
            let ot = 0.5 + k as f64 * 0.01;
            let at = (k as f64 * 7.7) % 90.0;
            let s = score_trial(true, at, ot).unwrap();
            assert!((0.125..=0.25).contains(&s), "s={s} at={at} ot={ot}");
        }
    }
}
