//! The subcommands, callable without going through argument parsing.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use morphreg::mesh::{build_topology, init_identity_solution};
use morphreg::multires::run_schedule_with;
use morphreg::objectives::eval_all;
use morphreg::volume::{generate_synthetic_pair, RegistrationProblem, SyntheticConfig};

use crate::bundle::{write_bundle, Bundle, Manifest, RunRecord};
use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::metrics::{compute_metrics, Metrics};
use crate::problem::{load_problem, write_problem};
use crate::render::{render_solution, write_rendered};

/// Writes a synthetic problem; `size` and `guidance_points` override the
/// chosen preset.
pub fn synth(
    out: &Path,
    smoke: bool,
    size: Option<usize>,
    guidance_points: Option<usize>,
) -> Result<RegistrationProblem> {
    let mut cfg = if smoke {
        SyntheticConfig::smoke()
    } else {
        SyntheticConfig::default()
    };
    if let Some(n) = size {
        let scale = n as f64 / cfg.size as f64;
        cfg.size = n;
        cfg.cube_side *= scale;
        cfg.source_radius *= scale;
        cfg.target_radius *= scale;
        cfg.parabola_depth *= scale;
    }
    if let Some(g) = guidance_points {
        cfg.guidance_points = g;
    }
    let problem = generate_synthetic_pair(&cfg)?;
    write_problem(out, &problem)?;
    Ok(problem)
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Runs the configured schedule on the problem in `problem_dir` and writes
/// a bundle to `out`.
pub fn register(
    config: &RunConfig,
    problem_dir: &Path,
    out: &Path,
    quiet: bool,
) -> Result<Manifest> {
    config.validate()?;
    let problem = load_problem(problem_dir)?;
    let stages = config.stages();
    let topo = Arc::new(build_topology(stages[0].grid_resolution)?);
    let identity = eval_all(&init_identity_solution(topo, problem.dims()), &problem)?;

    let started_unix = unix_now();
    let clock = Instant::now();
    let total = stages.len();
    let results = run_schedule_with(&problem, &stages, &config.optimizer(), &mut |i, g| {
        let last = g.generation == stages[i].generations;
        if quiet || !(g.generation % 10 == 0 || last) {
            return;
        }
        eprintln!(
            "stage {}/{total} gen {:>4} archive {:>4} accepted {:>6}/{:<6} best [{}] {:.1}s",
            i + 1,
            g.generation,
            g.archive_size,
            g.accepted_changes,
            g.attempted_changes,
            g.best
                .iter()
                .map(|v| format!("{v:.5}"))
                .collect::<Vec<_>>()
                .join(", "),
            clock.elapsed().as_secs_f64()
        );
    })?;

    write_bundle(
        out,
        &RunRecord {
            config,
            problem_dir,
            problem: &problem,
            identity,
            results: &results,
            threads: rayon::current_num_threads(),
            started_unix,
            finished_unix: unix_now(),
        },
    )
}

/// Resolves the problem directory: the explicit argument wins over the
/// config's `problem` key.
pub fn problem_dir(config: &RunConfig, explicit: Option<&Path>) -> Result<PathBuf> {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| config.problem.clone())
        .ok_or_else(|| {
            CliError::Config("no problem directory: pass --problem or set `problem`".into())
        })
}

/// Writes the warped volumes and DVF of one solution; returns the directory.
pub fn render(bundle: &Bundle, id: &str, out: Option<&Path>) -> Result<PathBuf> {
    let sol = bundle.solution(id)?;
    let rendered = render_solution(&sol, bundle.problem())?;
    let dir = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| bundle.root().join("render").join(id));
    write_rendered(&dir, &rendered)?;
    Ok(dir)
}

pub fn metrics(bundle: &Bundle, id: &str) -> Result<Metrics> {
    compute_metrics(id, &bundle.solution(id)?, bundle.problem())
}
