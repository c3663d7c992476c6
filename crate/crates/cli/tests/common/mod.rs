#![allow(dead_code)]

use std::path::{Path, PathBuf};

use morphreg_cli::commands;
use morphreg_cli::config::{RunConfig, StageSpec};

/// Small problem written into `root/problem`.
pub fn tiny_problem(root: &Path) -> PathBuf {
    let dir = root.join("problem");
    commands::synth(&dir, true, None, Some(32)).unwrap();
    dir
}

pub fn tiny_config(seed: u64) -> RunConfig {
    RunConfig {
        seed,
        archive_cells: 50,
        schedule: vec![
            StageSpec {
                grid_resolution: [3; 3],
                population_size: 8,
                generations: 3,
            },
            StageSpec {
                grid_resolution: [5; 3],
                population_size: 8,
                generations: 2,
            },
        ],
        ..RunConfig::default()
    }
}

/// Problem plus a two-stage bundle at `root/bundle`.
pub fn tiny_bundle(root: &Path) -> PathBuf {
    let problem = tiny_problem(root);
    let out = root.join("bundle");
    commands::register(&tiny_config(3), &problem, &out, true).unwrap();
    out
}
