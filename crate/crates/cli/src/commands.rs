//! Subcommand implementations. Every command re-loads what it wrote before
//! exiting 0, so a zero exit means the artifacts are parseable.

use crate::config;
use crate::{BatchArgs, GenerateArgs, RunArgs, ScoreArgs};
use anyhow::{bail, Context, Result};
use navbench_suite::{
    aggregate_score, render_csv, render_markdown, run_suite, EnvScore, RunMeta, SuiteConfig,
    SuiteOutput, TrialRecord,
};
use navbench_worldgen::{
    generate_world, world_from_json, world_to_json, GenParams, Manifest, ManifestEntry, WorldSpec,
    SCHEMA_VERSION,
};
use std::fs;
use std::path::{Path, PathBuf};

pub fn generate(args: GenerateArgs) -> Result<()> {
    if args.count == 0 {
        bail!("--count must be at least 1");
    }
    let base = GenParams::default();
    let params_for = |i: usize| GenParams {
        seed: args.seed + i as u64,
        initial_fill: args.initial_fill.unwrap_or(base.initial_fill),
        smoothing_iterations: args.smoothing_iterations.unwrap_or(base.smoothing_iterations),
        fill_threshold: args.fill_threshold.unwrap_or(base.fill_threshold),
        clear_threshold: args.clear_threshold.unwrap_or(base.clear_threshold),
        width: args.width.unwrap_or(base.width),
        height: args.height.unwrap_or(base.height),
        resolution: args.resolution.unwrap_or(base.resolution),
    };

    let mut worlds = Vec::with_capacity(args.count);
    for i in 0..args.count {
        let params = params_for(i);
        let world = generate_world(&params)
            .with_context(|| format!("generating course {i} (seed {})", params.seed))?;
        worlds.push(world);
    }
    let lengths: Vec<f64> = worlds.iter().map(|w| w.path_length).collect();
    let labels = Manifest::difficulty_labels(&lengths);

    fs::create_dir_all(&args.out)
        .with_context(|| format!("creating output dir {}", args.out.display()))?;

    let mut entries = Vec::new();
    for (i, (world, label)) in worlds.iter().zip(&labels).enumerate() {
        if let Some(want) = &args.difficulty {
            if want != label {
                continue;
            }
        }
        let id = format!("w{i:03}");
        let file = format!("{id}.json");
        let path = args.out.join(&file);
        fs::write(&path, world_to_json(world))
            .with_context(|| format!("writing {}", path.display()))?;
        entries.push(ManifestEntry {
            id,
            file,
            path_length: world.path_length,
            optimal_time: world.optimal_time,
            difficulty: label.to_string(),
        });
    }
    if entries.is_empty() {
        bail!("no course fell in the requested difficulty tercile");
    }
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        seed: args.seed,
        count: entries.len(),
        worlds: entries,
    };
    let manifest_path = args.out.join("manifest.json");
    fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)?)
        .with_context(|| format!("writing {}", manifest_path.display()))?;

    // Round-trip everything back before declaring success.
    let reloaded = load_worlds(&args.out)?;
    if reloaded.len() != manifest.count {
        bail!("wrote {} courses but reloaded {}", manifest.count, reloaded.len());
    }
    println!(
        "generated {} course(s) into {} (seed {})",
        manifest.count,
        args.out.display(),
        args.seed
    );
    Ok(())
}

/// Load all worlds in a directory: manifest order when present, otherwise
/// sorted file order.
pub fn load_worlds(dir: &Path) -> Result<Vec<(String, WorldSpec)>> {
    let manifest_path = dir.join("manifest.json");
    let mut out = Vec::new();
    if manifest_path.exists() {
        let manifest: Manifest = serde_json::from_str(
            &fs::read_to_string(&manifest_path).context("reading manifest")?,
        )
        .context("parsing manifest")?;
        for entry in manifest.worlds {
            let path = dir.join(&entry.file);
            let text = fs::read_to_string(&path)
                .with_context(|| format!("reading {}", path.display()))?;
            let world = world_from_json(&text)
                .with_context(|| format!("parsing {}", path.display()))?;
            out.push((entry.id, world));
        }
    } else {
        let mut files: Vec<PathBuf> = fs::read_dir(dir)
            .with_context(|| format!("reading {}", dir.display()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().map(|e| e == "json").unwrap_or(false))
            .collect();
        files.sort();
        for path in files {
            let text = fs::read_to_string(&path)
                .with_context(|| format!("reading {}", path.display()))?;
            let world = world_from_json(&text)
                .with_context(|| format!("parsing {}", path.display()))?;
            let id = path
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("world")
                .to_string();
            out.push((id, world));
        }
    }
    if out.is_empty() {
        bail!("no course files found in {}", dir.display());
    }
    Ok(out)
}

pub fn run(args: RunArgs) -> Result<()> {
    let file = config::load_file(args.config.as_deref())?;
    let resolved = config::resolve(
        &file,
        args.trials,
        args.policy.as_deref(),
        args.safety.as_deref(),
        args.jobs,
        args.seed,
        args.dump_costmap,
    )?;
    if args.print_config {
        println!("{}", serde_json::to_string_pretty(&resolved.effective)?);
        return Ok(());
    }
    let worlds = load_worlds(&args.worlds)?;
    let output = execute_suite(&worlds, &resolved, &args.out)?;
    if args.fsm_log {
        for artifact in &output.artifacts {
            for tr in &artifact.record.transitions {
                println!(
                    "{} t{} {:.2}s {} -> {} ({})",
                    artifact.record.world_id,
                    artifact.record.trial_index,
                    tr.t,
                    tr.from,
                    tr.to,
                    tr.trigger
                );
            }
        }
    }
    for row in &output.env_scores {
        println!(
            "{}: score {:.4} ({} success, {} collision, {} timeout)",
            row.world_id, row.score, row.successes, row.collisions, row.timeouts
        );
    }
    println!("aggregate {:.6}", output.aggregate);
    Ok(())
}

/// Run the suite and persist records, traces, and metadata; all file writes
/// happen here on the calling thread.
fn execute_suite(
    worlds: &[(String, WorldSpec)],
    resolved: &config::Resolved,
    out: &Path,
) -> Result<SuiteOutput> {
    let suite_config = SuiteConfig {
        trials_per_world: resolved.effective.trials,
        root_seed: resolved.effective.seed,
        safety: resolved.safety,
        policy: resolved.policy,
        jobs: resolved.effective.jobs,
        timeout_slack: 10.0,
        dump_costmap: resolved.effective.dump_costmap,
    };
    let output = run_suite(worlds, &suite_config, &resolved.setup)
        .map_err(|e| anyhow::anyhow!("scoring failed: {e}"))?;

    fs::create_dir_all(out.join("traces"))
        .with_context(|| format!("creating {}", out.display()))?;
    for artifact in &output.artifacts {
        if !artifact.record.trace_path.is_empty() {
            fs::write(out.join(&artifact.record.trace_path), &artifact.trace_csv)?;
        }
        if let Some(pgm) = &artifact.costmap_pgm {
            let dir = out.join("costmaps");
            fs::create_dir_all(&dir)?;
            fs::write(
                dir.join(format!(
                    "{}_t{}.pgm",
                    artifact.record.world_id, artifact.record.trial_index
                )),
                pgm,
            )?;
        }
    }
    let records: Vec<&TrialRecord> = output.artifacts.iter().map(|a| &a.record).collect();
    fs::write(
        out.join("records.json"),
        serde_json::to_string_pretty(&records)?,
    )?;
    let meta = RunMeta {
        schema_version: SCHEMA_VERSION,
        method: format!("{}+{}", resolved.effective.policy, resolved.effective.safety),
        root_seed: resolved.effective.seed,
        trials_per_world: resolved.effective.trials,
        worlds: worlds.len(),
        jobs: resolved.effective.jobs,
    };
    fs::write(out.join("run_meta.json"), serde_json::to_string_pretty(&meta)?)?;

    // Reload before declaring success.
    let _: Vec<TrialRecord> =
        serde_json::from_str(&fs::read_to_string(out.join("records.json"))?)?;
    for artifact in &output.artifacts {
        if !artifact.record.trace_path.is_empty() {
            let text = fs::read(out.join(&artifact.record.trace_path))?;
            navbench_core::episode::read_trace_csv(std::io::Cursor::new(text))
                .map_err(|e| anyhow::anyhow!("trace verification failed: {e}"))?;
        }
    }
    Ok(output)
}

fn load_results(dir: &Path) -> Result<(String, Vec<TrialRecord>)> {
    let records_path = dir.join("records.json");
    let text = fs::read_to_string(&records_path)
        .with_context(|| format!("reading {}", records_path.display()))?;
    let records: Vec<TrialRecord> =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", records_path.display()))?;
    if records.is_empty() {
        bail!("{} holds no trial records", records_path.display());
    }
    let method = fs::read_to_string(dir.join("run_meta.json"))
        .ok()
        .and_then(|t| serde_json::from_str::<RunMeta>(&t).ok())
        .map(|m| m.method)
        .unwrap_or_else(|| dir.display().to_string());
    Ok((method, records))
}

pub fn score(args: ScoreArgs) -> Result<()> {
    let mut methods: Vec<(String, Vec<EnvScore>, f64)> = Vec::new();
    for dir in &args.results {
        let (method, records) = load_results(dir)?;
        let (rows, aggregate) =
            aggregate_score(&records).map_err(|e| anyhow::anyhow!("scoring failed: {e}"))?;
        methods.push((method, rows, aggregate));
    }
    let out_dir = args
        .out
        .clone()
        .unwrap_or_else(|| args.results[0].clone());
    fs::create_dir_all(&out_dir)?;

    let md = render_markdown(&methods);
    fs::write(out_dir.join("report.md"), &md)?;
    let mut csv_all = String::new();
    for (method, rows, aggregate) in &methods {
        csv_all.push_str(&render_csv(method, rows, *aggregate));
    }
    fs::write(out_dir.join("report.csv"), &csv_all)?;

    if args.format == "md" {
        println!("{md}");
    } else {
        print!("{csv_all}");
    }
    for (method, _, aggregate) in &methods {
        println!("aggregate[{method}] {aggregate:.6}");
    }
    Ok(())
}

pub fn batch(args: BatchArgs) -> Result<()> {
    let file = config::load_file(args.config.as_deref())?;
    let resolved = config::resolve(
        &file,
        args.trials,
        args.policy.as_deref(),
        args.safety.as_deref(),
        args.jobs,
        Some(args.seed),
        false,
    )?;
    if args.print_config {
        println!("{}", serde_json::to_string_pretty(&resolved.effective)?);
        return Ok(());
    }
    let worlds_dir = args.out.join("worlds");
    let results_dir = args.out.join("results");
    generate(GenerateArgs {
        count: args.count,
        seed: args.seed,
        difficulty: None,
        out: worlds_dir.clone(),
        initial_fill: None,
        smoothing_iterations: None,
        fill_threshold: None,
        clear_threshold: None,
        width: None,
        height: None,
        resolution: None,
    })?;
    let worlds = load_worlds(&worlds_dir)?;
    let output = execute_suite(&worlds, &resolved, &results_dir)?;
    let md = render_markdown(&[(
        format!("{}+{}", resolved.effective.policy, resolved.effective.safety),
        output.env_scores.clone(),
        output.aggregate,
    )]);
    fs::write(args.out.join("report.md"), md)?;
    fs::write(
        args.out.join("report.csv"),
        render_csv(
            &format!("{}+{}", resolved.effective.policy, resolved.effective.safety),
            &output.env_scores,
            output.aggregate,
        ),
    )?;
    println!("aggregate {:.6}", output.aggregate);
    Ok(())
}
