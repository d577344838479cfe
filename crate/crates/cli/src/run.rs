use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use acpso::evolve::{evolve, Direction, SearchConfig, SearchResult, Strategy};
use acpso::graph::InstanceDoc;
use acpso::problems::{CaseProblem, Instance, PackKind, ProblemPack};
use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::genmodel::{generate, size_of};
use crate::{read_json, write_json, CliError, OperatorSource, RunArgs, SCHEMA_VERSION};

pub const MANIFEST: &str = "manifest.json";
pub const SEED_INSTANCE: &str = "instance.json";

pub fn front_file(i: usize) -> String {
    format!("front_{i}.csv")
}

pub fn log_file(i: usize) -> String {
    format!("log_{i}.csv")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    pub name: String,
    pub direction: Direction,
}

/// Where the seed instance came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceSource {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub size: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Repetition {
    pub index: usize,
    pub seed: u64,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Feasible non-dominated solutions found (distinct objective vectors).
    pub front_size: usize,
    pub wall_time_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub tool_version: String,
    pub pack: PackKind,
    pub operators: String,
    pub strategy: Strategy,
    pub population_size: usize,
    pub evolutions: usize,
    pub base_seed: u64,
    pub instance: InstanceSource,
    pub objectives: Vec<Objective>,
    pub repetitions: Vec<Repetition>,
    pub wall_time_s: f64,
}

impl Manifest {
    pub fn completed(&self) -> bool {
        self.repetitions.iter().all(|r| r.status == Status::Ok)
    }
}

fn seed_instance(pack: &ProblemPack, args: &RunArgs) -> Result<(Instance, InstanceSource), CliError> {
    if let Some(path) = &args.instance {
        let doc: InstanceDoc = read_json(path)?;
        let instance = pack
            .load_instance(&doc)
            .map_err(|e| CliError::input(anyhow::anyhow!("{}: {e}", path.display())))?;
        let source = InstanceSource {
            file: Some(path.display().to_string()),
            size: None,
            seed: None,
        };
        return Ok((instance, source));
    }
    let size = size_of(pack, args.size.as_deref(), args.preset.as_deref())
        .map_err(|_| CliError::input(anyhow::anyhow!("one of --instance, --size or --preset is required")))?;
    let instance = generate(pack, &size, args.instance_seed)?;
    let source = InstanceSource {
        file: None,
        size: Some(size),
        seed: Some(args.instance_seed),
    };
    Ok((instance, source))
}

/// Distinct feasible objective vectors in natural sign, sorted.
pub fn front_rows(result: &SearchResult, directions: &[Direction]) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = result
        .front
        .iter()
        .map(|i| i.natural_objectives(directions))
        .collect();
    rows.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    rows.dedup();
    rows
}

fn csv_error(path: &Path, e: impl std::fmt::Display) -> String {
    format!("cannot write {}: {e}", path.display())
}

fn write_front(path: &Path, names: &[String], rows: &[Vec<f64>]) -> Result<(), String> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(names).map_err(|e| csv_error(path, e))?;
    for row in rows {
        w.write_record(row.iter().map(|v| v.to_string())).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| csv_error(path, e))
}

fn write_log(path: &Path, names: &[String], result: &SearchResult) -> Result<(), String> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    let mut header = vec!["generation".to_owned()];
    header.extend(names.iter().map(|n| format!("best_{n}")));
    header.extend(["feasible", "front0", "hypervolume"].map(String::from));
    w.write_record(&header).map_err(|e| csv_error(path, e))?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for g in &result.log {
        let mut rec = vec![g.generation.to_string()];
        rec.extend(g.best.iter().map(|&b| opt(b)));
        rec.extend([g.feasible.to_string(), g.front0.to_string(), opt(g.hypervolume)]);
        w.write_record(&rec).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| csv_error(path, e))
}

struct Batch<'a> {
    problem: &'a CaseProblem,
    operators: &'a [Box<dyn acpso::evolve::SearchOperator>],
    instance: &'a Instance,
    names: Vec<String>,
    directions: Vec<Direction>,
    out: PathBuf,
}

impl Batch<'_> {
    fn repetition(&self, index: usize, config: SearchConfig) -> Repetition {
        let start = Instant::now();
        let seed = config.rng_seed;
        let outcome = evolve(self.problem, self.operators, &self.instance.model, &config)
            .map_err(|e| e.to_string())
            .and_then(|result| {
                let rows = front_rows(&result, &self.directions);
                write_front(&self.out.join(front_file(index)), &self.names, &rows)?;
                write_log(&self.out.join(log_file(index)), &self.names, &result)?;
                Ok(rows.len())
            });
        let wall_time_s = start.elapsed().as_secs_f64();
        match outcome {
            Ok(front_size) => {
                info!("repetition {index} (seed {seed}): {front_size} front points in {wall_time_s:.1}s");
                Repetition {
                    index,
                    seed,
                    status: Status::Ok,
                    error: None,
                    front_size,
                    wall_time_s,
                }
            }
            Err(e) => {
                warn!("repetition {index} (seed {seed}) failed: {e}");
                Repetition {
                    index,
                    seed,
                    status: Status::Failed,
                    error: Some(e),
                    front_size: 0,
                    wall_time_s,
                }
            }
        }
    }
}

/// Runs the batch and writes fronts, logs, the seed instance and the
/// manifest to `args.out`. Fails with exit code 1 if any repetition failed.
pub fn cmd_run(args: &RunArgs) -> Result<Manifest, CliError> {
    let start = Instant::now();
    if args.repetitions == 0 {
        return Err(CliError::input(anyhow::anyhow!("--repetitions must be at least 1")));
    }
    let pack = ProblemPack::new(args.pack);
    let (instance, source) = seed_instance(&pack, args)?;
    let problem = pack.problem(&instance).map_err(CliError::input)?;
    let operators = match args.operators {
        OperatorSource::Generated => pack.generated_operators().map_err(CliError::failed)?,
        OperatorSource::Manual => pack.manual_operators(),
    };
    let base = SearchConfig {
        population_size: args.pop,
        evolutions: args.evolutions,
        strategy: args.strategy,
        rng_seed: args.seed,
    };
    base.validate().map_err(CliError::input)?;

    fs::create_dir_all(&args.out)
        .map_err(|e| CliError::failed(anyhow::anyhow!("cannot create {}: {e}", args.out.display())))?;
    write_json(&pack.instance_doc(&instance), Some(&args.out.join(SEED_INSTANCE)))?;

    let objectives: Vec<Objective> = pack
        .objectives()
        .into_iter()
        .map(|(name, direction)| Objective {
            name: name.to_owned(),
            direction,
        })
        .collect();
    let batch = Batch {
        problem: &problem,
        operators: &operators,
        instance: &instance,
        names: objectives.iter().map(|o| o.name.clone()).collect(),
        directions: objectives.iter().map(|o| o.direction).collect(),
        out: args.out.clone(),
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = args.jobs {
        pool = pool.num_threads(jobs.max(1));
    }
    let pool = pool.build().map_err(CliError::failed)?;
    let repetitions: Vec<Repetition> = pool.install(|| {
        (0..args.repetitions)
            .into_par_iter()
            .map(|i| {
                let config = SearchConfig {
                    rng_seed: args.seed.wrapping_add(i as u64),
                    ..base.clone()
                };
                batch.repetition(i, config)
            })
            .collect()
    });

    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_owned(),
        pack: args.pack,
        operators: match args.operators {
            OperatorSource::Generated => "generated".into(),
            OperatorSource::Manual => "manual".into(),
        },
        strategy: args.strategy,
        population_size: args.pop,
        evolutions: args.evolutions,
        base_seed: args.seed,
        instance: source,
        objectives,
        repetitions,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    write_json(&manifest, Some(&args.out.join(MANIFEST)))?;
    if !manifest.completed() {
        let failed = manifest.repetitions.iter().filter(|r| r.status == Status::Failed).count();
        return Err(CliError::failed(anyhow::anyhow!(
            "{failed} of {} repetitions failed; see {}",
            manifest.repetitions.len(),
            args.out.join(MANIFEST).display()
        )));
    }
    Ok(manifest)
}

/// Reads the manifest and every front of a result directory, in natural
/// sign. Failed repetitions contribute an empty front.
pub fn read_results(dir: &Path) -> Result<(Manifest, Vec<Vec<Vec<f64>>>), CliError> {
    let manifest: Manifest = read_json(&dir.join(MANIFEST))?;
    if manifest.schema_version != SCHEMA_VERSION {
        return Err(CliError::input(anyhow::anyhow!(
            "{}: unsupported schema version {}",
            dir.display(),
            manifest.schema_version
        )));
    }
    let arity = manifest.objectives.len();
    let mut fronts = Vec::with_capacity(manifest.repetitions.len());
    for rep in &manifest.repetitions {
        if rep.status == Status::Failed {
            fronts.push(Vec::new());
            continue;
        }
        let path = dir.join(front_file(rep.index));
        let mut r = csv::Reader::from_path(&path)
            .map_err(|e| CliError::input(anyhow::anyhow!("cannot read {}: {e}", path.display())))?;
        let mut rows = Vec::new();
        for (line, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| CliError::input(anyhow::anyhow!("{}: {e}", path.display())))?;
            let row: Vec<f64> = rec
                .iter()
                .map(|f| f.parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| CliError::input(anyhow::anyhow!("{}:{}: {e}", path.display(), line + 2)))?;
            if row.len() != arity {
                return Err(CliError::input(anyhow::anyhow!(
                    "{}:{}: expected {arity} objectives, found {}",
                    path.display(),
                    line + 2,
                    row.len()
                )));
            }
            rows.push(row);
        }
        fronts.push(rows);
    }
    Ok((manifest, fronts))
}
