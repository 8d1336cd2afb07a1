//! Run configuration with layered precedence:
//! CLI flag > NAVBENCH_* environment variable > config file > built-in
//! default. Unknown config-file keys are rejected.

use anyhow::{bail, Context, Result};
use navbench_core::episode::{EpisodeSetup, PolicyChoice};
use navbench_core::SafetyMode;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// On-disk config file shape. Every field is optional; present fields sit
/// between environment variables and built-in defaults.
#[derive(Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub trials: Option<u32>,
    pub policy: Option<String>,
    pub safety: Option<String>,
    pub jobs: Option<usize>,
    pub seed: Option<u64>,
    pub v_max: Option<f64>,
    pub w_max: Option<f64>,
    pub goal_tolerance: Option<f64>,
    pub accel_linear: Option<f64>,
    pub accel_angular: Option<f64>,
}

/// Fully resolved run settings; printable via --print-config.
#[derive(Debug, Clone, Serialize)]
pub struct EffectiveConfig {
    pub trials: u32,
    pub policy: String,
    pub safety: String,
    pub jobs: usize,
    pub seed: u64,
    pub v_max: f64,
    pub w_max: f64,
    pub goal_tolerance: f64,
    pub accel_linear: Option<f64>,
    pub accel_angular: Option<f64>,
    pub dump_costmap: bool,
}

pub fn parse_safety(s: &str) -> Result<SafetyMode> {
    Ok(match s {
        "fi" => SafetyMode::Fi,
        "mpc" => SafetyMode::Mpc,
        "none" => SafetyMode::Off,
        other => bail!("unknown safety mode '{other}' (fi|mpc|none)"),
    })
}

pub fn parse_policy(s: &str) -> Result<PolicyChoice> {
    Ok(match s {
        "pursuit" => PolicyChoice::Pursuit,
        other => bail!("unknown policy '{other}' (pursuit)"),
    })
}

fn env_var<T: std::str::FromStr>(name: &str) -> Result<Option<T>> {
    match std::env::var(name) {
        Ok(v) => v
            .parse::<T>()
            .map(Some)
            .map_err(|_| anyhow::anyhow!("cannot parse {name}={v}")),
        Err(_) => Ok(None),
    }
}

pub fn load_file(path: Option<&Path>) -> Result<ConfigFile> {
    match path {
        None => Ok(ConfigFile::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading config {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing config {}", p.display()))
        }
    }
}

pub struct Resolved {
    pub effective: EffectiveConfig,
    pub safety: SafetyMode,
    pub policy: PolicyChoice,
    pub setup: EpisodeSetup,
}

/// Layer flags over env over file over the benchmark defaults.
#[allow(clippy::too_many_arguments)]
pub fn resolve(
    file: &ConfigFile,
    trials: Option<u32>,
    policy: Option<&str>,
    safety: Option<&str>,
    jobs: Option<usize>,
    seed: Option<u64>,
    dump_costmap: bool,
) -> Result<Resolved> {
    let mut setup = EpisodeSetup::benchmark();

    let trials = trials
        .or(env_var("NAVBENCH_TRIALS")?)
        .or(file.trials)
        .unwrap_or(3);
    let jobs = jobs
        .or(env_var("NAVBENCH_JOBS")?)
        .or(file.jobs)
        .unwrap_or(1);
    let seed = seed
        .or(env_var("NAVBENCH_SEED")?)
        .or(file.seed)
        .unwrap_or(0);
    let safety_str: String = safety
        .map(str::to_string)
        .or(env_var("NAVBENCH_SAFETY")?)
        .or_else(|| file.safety.clone())
        .unwrap_or_else(|| "fi".to_string());
    let policy_str: String = policy
        .map(str::to_string)
        .or(env_var("NAVBENCH_POLICY")?)
        .or_else(|| file.policy.clone())
        .unwrap_or_else(|| "pursuit".to_string());

    if let Some(v) = file.v_max {
        setup.sim.v_max = v;
        setup.controller.v_max = v;
    }
    if let Some(w) = file.w_max {
        setup.sim.w_max = w;
        setup.controller.w_max = w;
    }
    if let Some(g) = file.goal_tolerance {
        setup.sim.goal_tolerance = g;
    }
    match (file.accel_linear, file.accel_angular) {
        (None, None) => {}
        (lin, ang) => {
            let current = setup.sim.accel_limits.unwrap_or(navbench_core::sim::AccelLimits {
                linear: 0.7,
                angular: 2.5,
            });
            setup.sim.accel_limits = Some(navbench_core::sim::AccelLimits {
                linear: lin.unwrap_or(current.linear),
                angular: ang.unwrap_or(current.angular),
            });
        }
    }

    let safety_mode = parse_safety(&safety_str)?;
    let policy_choice = parse_policy(&policy_str)?;
    setup.safety_mode = safety_mode;
    setup.policy = policy_choice;
    setup.keep_costmap = dump_costmap;

    Ok(Resolved {
        effective: EffectiveConfig {
            trials,
            policy: policy_str,
            safety: safety_str,
            jobs,
            seed,
            v_max: setup.sim.v_max,
            w_max: setup.sim.w_max,
            goal_tolerance: setup.sim.goal_tolerance,
            accel_linear: setup.sim.accel_limits.map(|a| a.linear),
            accel_angular: setup.sim.accel_limits.map(|a| a.angular),
            dump_costmap,
        },
        safety: safety_mode,
        policy: policy_choice,
        setup,
    })
}
