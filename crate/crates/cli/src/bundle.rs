//! Run bundles on disk.
//!
//! ```text
//! bundle/
//!   manifest.json
//!   stage_1/front.csv           id,dissimilarity,deformation,guidance
//!   stage_1/solutions/s1-000.bin
//!   stage_2/...
//!   selected.json               written by the server's select endpoint
//! ```
//!
//! Solution ids are `s<stage>-<index>` with 1-based stages and the index
//! zero-padded to three digits, e.g. `s2-017`.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use morphreg::mesh::{GridTopology, Solution};
use morphreg::multires::StageResult;
use morphreg::objectives::ObjectiveVector;
use morphreg::volume::RegistrationProblem;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::problem::load_problem;

pub const MANIFEST: &str = "manifest.json";
pub const SELECTED: &str = "selected.json";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageInfo {
    pub stage: usize,
    pub grid_resolution: [usize; 3],
    pub population_size: usize,
    pub generations: usize,
    pub variable_count: usize,
    pub front_size: usize,
    /// Relative to the bundle root.
    pub front: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub config: RunConfig,
    pub seed: u64,
    pub problem: PathBuf,
    pub dims: [usize; 3],
    pub spacing: [f64; 3],
    pub objectives: Vec<String>,
    /// Objectives of the identity solution on the first stage's grid.
    pub identity: FrontRow,
    pub stages: Vec<StageInfo>,
    pub threads: usize,
    pub started_unix: u64,
    pub finished_unix: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrontRow {
    pub id: String,
    pub dissimilarity: f64,
    pub deformation: f64,
    pub guidance: Option<f64>,
}

impl FrontRow {
    pub fn new(id: String, v: &ObjectiveVector) -> Self {
        FrontRow {
            id,
            dissimilarity: v.dissimilarity,
            deformation: v.deformation,
            guidance: v.guidance,
        }
    }

    pub fn objectives(&self) -> ObjectiveVector {
        ObjectiveVector::new(self.dissimilarity, self.deformation, self.guidance)
    }
}

pub fn solution_id(stage: usize, index: usize) -> String {
    format!("s{stage}-{index:03}")
}

/// Inverse of [`solution_id`].
pub fn parse_id(id: &str) -> Option<(usize, usize)> {
    let rest = id.strip_prefix('s')?;
    let (stage, index) = rest.split_once('-')?;
    if index.len() < 3 || !index.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    if stage.is_empty() || !stage.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let stage: usize = stage.parse().ok()?;
    let index: usize = index.parse().ok()?;
    (stage >= 1 && solution_id(stage, index) == id).then_some((stage, index))
}

fn stage_dir(stage: usize) -> String {
    format!("stage_{stage}")
}

fn solution_path(root: &Path, stage: usize, id: &str) -> PathBuf {
    root.join(stage_dir(stage))
        .join("solutions")
        .join(format!("{id}.bin"))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| CliError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    text.push('\n');
    write_file(path, text.as_bytes())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| CliError::Json {
        path: path.to_path_buf(),
        source,
    })
}

/// CSV bytes of a front table; floats use the shortest round-trip form.
pub fn front_csv(rows: &[FrontRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |source| CliError::Csv {
        path: PathBuf::from("front.csv"),
        source,
    };
    w.write_record(["id", "dissimilarity", "deformation", "guidance"])
        .map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.id.clone(),
            r.dissimilarity.to_string(),
            r.deformation.to_string(),
            r.guidance.map(|g| g.to_string()).unwrap_or_default(),
        ])
        .map_err(csv_err)?;
    }
    w.into_inner()
        .map_err(|e| CliError::Bundle(format!("CSV buffer: {e}")))
}

pub fn read_front(path: &Path) -> Result<Vec<FrontRow>> {
    let csv_err = |source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let num = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| CliError::Bundle(format!("bad number in {}", path.display())))
        };
        let guidance = match rec.get(3) {
            None | Some("") => None,
            Some(_) => Some(num(3)?),
        };
        rows.push(FrontRow {
            id: rec.get(0).unwrap_or_default().to_string(),
            dissimilarity: num(1)?,
            deformation: num(2)?,
            guidance,
        });
    }
    Ok(rows)
}

/// Everything `register` produced, ready to be written.
pub struct RunRecord<'a> {
    pub config: &'a RunConfig,
    pub problem_dir: &'a Path,
    pub problem: &'a RegistrationProblem,
    pub identity: ObjectiveVector,
    pub results: &'a [StageResult],
    pub threads: usize,
    pub started_unix: u64,
    pub finished_unix: u64,
}

/// Writes a bundle into `root`. An existing bundle there is replaced.
pub fn write_bundle(root: &Path, run: &RunRecord) -> Result<Manifest> {
    if root.join(MANIFEST).exists() {
        for entry in fs::read_dir(root).map_err(|e| CliError::io(root, e))? {
            let entry = entry.map_err(|e| CliError::io(root, e))?;
            let name = entry.file_name().to_string_lossy().into_owned();
            let path = entry.path();
            if name.starts_with("stage_") || name == "selected" {
                fs::remove_dir_all(&path).map_err(|e| CliError::io(&path, e))?;
            } else if name == SELECTED {
                fs::remove_file(&path).map_err(|e| CliError::io(&path, e))?;
            }
        }
    }
    fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;

    let mut stages = Vec::new();
    for (i, res) in run.results.iter().enumerate() {
        let stage = i + 1;
        let rows: Vec<FrontRow> = res
            .archive
            .entries()
            .iter()
            .enumerate()
            .map(|(k, e)| FrontRow::new(solution_id(stage, k), &e.objectives))
            .collect();
        for (row, e) in rows.iter().zip(res.archive.entries()) {
            write_file(&solution_path(root, stage, &row.id), &e.payload.encode())?;
        }
        let front = format!("{}/front.csv", stage_dir(stage));
        write_file(&root.join(&front), &front_csv(&rows)?)?;
        let variable_count = res
            .archive
            .entries()
            .first()
            .map(|e| e.payload.variable_count())
            .unwrap_or(0);
        stages.push(StageInfo {
            stage,
            grid_resolution: res.stage.grid_resolution,
            population_size: res.stage.population_size,
            generations: res.stage.generations,
            variable_count,
            front_size: rows.len(),
            front,
        });
    }

    let problem =
        fs::canonicalize(run.problem_dir).map_err(|e| CliError::io(run.problem_dir, e))?;
    let mut objectives = vec!["dissimilarity".to_string(), "deformation".to_string()];
    if run.problem.guidance.is_some() {
        objectives.push("guidance".to_string());
    }
    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        config: run.config.clone(),
        seed: run.config.seed,
        problem,
        dims: run.problem.dims(),
        spacing: run.problem.spacing(),
        objectives,
        identity: FrontRow::new("identity".into(), &run.identity),
        stages,
        threads: run.threads,
        started_unix: run.started_unix,
        finished_unix: run.finished_unix,
    };
    write_json(&root.join(MANIFEST), &manifest)?;
    Ok(manifest)
}

/// A bundle opened for reading.
pub struct Bundle {
    root: PathBuf,
    manifest: Manifest,
    fronts: Vec<Vec<FrontRow>>,
    problem: RegistrationProblem,
    topologies: Vec<Arc<GridTopology>>,
}

impl Bundle {
    pub fn open(root: &Path) -> Result<Self> {
        let manifest: Manifest = read_json(&root.join(MANIFEST))?;
        if manifest.format_version != FORMAT_VERSION {
            return Err(CliError::Bundle(format!(
                "unsupported format version {}",
                manifest.format_version
            )));
        }
        let fronts = manifest
            .stages
            .iter()
            .map(|s| read_front(&root.join(&s.front)))
            .collect::<Result<Vec<_>>>()?;
        let problem = load_problem(&manifest.problem)?;
        if problem.dims() != manifest.dims {
            return Err(CliError::Bundle(
                "problem volumes do not match the manifest dims".into(),
            ));
        }
        let topologies = manifest
            .stages
            .iter()
            .map(|s| morphreg::mesh::build_topology(s.grid_resolution).map(Arc::new))
            .collect::<morphreg::Result<Vec<_>>>()?;
        Ok(Bundle {
            root: root.to_path_buf(),
            manifest,
            fronts,
            problem,
            topologies,
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    pub fn problem(&self) -> &RegistrationProblem {
        &self.problem
    }

    pub fn stage_count(&self) -> usize {
        self.fronts.len()
    }

    /// Front table of a 1-based stage.
    pub fn front(&self, stage: usize) -> Result<&[FrontRow]> {
        stage
            .checked_sub(1)
            .and_then(|i| self.fronts.get(i))
            .map(Vec::as_slice)
            .ok_or_else(|| CliError::NotFound(format!("stage {stage}")))
    }

    pub fn row(&self, id: &str) -> Result<&FrontRow> {
        let unknown = || CliError::NotFound(format!("solution {id}"));
        let (stage, _) = parse_id(id).ok_or_else(unknown)?;
        self.front(stage)
            .map_err(|_| unknown())?
            .iter()
            .find(|r| r.id == id)
            .ok_or_else(unknown)
    }

    pub fn solution(&self, id: &str) -> Result<Solution> {
        self.row(id)?;
        let (stage, _) = parse_id(id).expect("row ids parse");
        let path = solution_path(&self.root, stage, id);
        let bytes = fs::read(&path).map_err(|e| CliError::io(&path, e))?;
        Ok(Solution::decode(
            &bytes,
            self.problem.dims(),
            Some(&self.topologies[stage - 1]),
        )?)
    }
}
