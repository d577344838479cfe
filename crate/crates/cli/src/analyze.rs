use std::collections::BTreeMap;
use std::path::Path;

use acpso::evolve::Direction;
use acpso::metrics::{
    bsr, cohens_d, hypervolume, mann_whitney_u, merge_reference_set, reference_contribution, summarize, EffectSize,
    Summary,
};
use serde::Serialize;

use crate::run::{read_results, Manifest, Objective};
use crate::{write_json, AnalyzeArgs, CliError, SCHEMA_VERSION};

/// Margin added to the normalized worst point to form the nadir.
pub const NADIR_MARGIN: f64 = 0.01;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Indicator {
    /// Best objective value per run (single-objective packs).
    Best,
    /// Hypervolume of the run's front in the shared normalized space.
    Hypervolume,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Normalization {
    /// Componentwise best and worst over all runs, minimization space.
    pub low: Vec<f64>,
    pub high: Vec<f64>,
    pub nadir: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Configuration {
    pub label: String,
    pub dir: String,
    pub operators: String,
    pub runs: usize,
    pub feasible_runs: usize,
    /// Indicator value per run; `None` for a single-objective run without
    /// a feasible solution.
    pub values: Vec<Option<f64>>,
    pub summary: Option<Summary>,
    /// Reference-set points this configuration found (RSC).
    pub rsc: usize,
    pub bsr: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Comparison {
    pub a: String,
    pub b: String,
    pub u: Option<f64>,
    pub p: Option<f64>,
    pub d: Option<f64>,
    pub effect: Option<EffectSize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Analysis {
    pub schema_version: u32,
    pub objectives: Vec<Objective>,
    pub indicator: Indicator,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normalization: Option<Normalization>,
    /// Size of the merged non-dominated reference set (RS).
    pub reference_set_size: usize,
    /// Reference set in natural sign.
    pub reference_set: Vec<Vec<f64>>,
    pub configurations: Vec<Configuration>,
    pub comparisons: Vec<Comparison>,
}

struct Loaded {
    label: String,
    dir: String,
    manifest: Manifest,
    /// Per-run fronts in minimization space.
    fronts: Vec<Vec<Vec<f64>>>,
}

fn labels(dirs: &[&Path]) -> Vec<String> {
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    dirs.iter()
        .map(|d| {
            let base = d
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| d.display().to_string());
            let count = seen.entry(base.clone()).or_insert(0);
            *count += 1;
            if *count == 1 {
                base
            } else {
                format!("{base}#{count}")
            }
        })
        .collect()
}

fn load(dirs: &[&Path]) -> Result<Vec<Loaded>, CliError> {
    let mut out: Vec<Loaded> = Vec::new();
    for (dir, label) in dirs.iter().zip(labels(dirs)) {
        let (manifest, fronts) = read_results(dir)?;
        if let Some(first) = out.first() {
            if first.manifest.objectives != manifest.objectives {
                return Err(CliError::input(anyhow::anyhow!(
                    "objective mismatch: {} has {} objectives ({}), {} has {} ({})",
                    first.dir,
                    first.manifest.objectives.len(),
                    names(&first.manifest.objectives),
                    dir.display(),
                    manifest.objectives.len(),
                    names(&manifest.objectives)
                )));
            }
        }
        let dirs: Vec<Direction> = manifest.objectives.iter().map(|o| o.direction).collect();
        let fronts = fronts
            .into_iter()
            .map(|f| f.into_iter().map(|p| minimized(&dirs, &p)).collect())
            .collect();
        out.push(Loaded {
            label,
            dir: dir.display().to_string(),
            manifest,
            fronts,
        });
    }
    Ok(out)
}

fn names(objectives: &[Objective]) -> String {
    objectives.iter().map(|o| o.name.as_str()).collect::<Vec<_>>().join(", ")
}

fn minimized(dirs: &[Direction], p: &[f64]) -> Vec<f64> {
    dirs.iter().zip(p).map(|(d, &v)| d.minimized(v)).collect()
}

fn normalization(runs: &[Loaded], arity: usize) -> Option<Normalization> {
    let points: Vec<&Vec<f64>> = runs.iter().flat_map(|r| r.fronts.iter().flatten()).collect();
    if points.is_empty() {
        return None;
    }
    let mut low = vec![f64::INFINITY; arity];
    let mut high = vec![f64::NEG_INFINITY; arity];
    for p in points {
        for k in 0..arity {
            low[k] = low[k].min(p[k]);
            high[k] = high[k].max(p[k]);
        }
    }
    Some(Normalization {
        low,
        high,
        nadir: vec![1.0 + NADIR_MARGIN; arity],
    })
}

fn normalize(n: &Normalization, p: &[f64]) -> Vec<f64> {
    p.iter()
        .enumerate()
        .map(|(k, &v)| {
            let range = n.high[k] - n.low[k];
            if range > 0.0 {
                (v - n.low[k]) / range
            } else {
                0.0
            }
        })
        .collect()
}

fn indicator_values(run: &Loaded, indicator: &Indicator, norm: Option<&Normalization>) -> Result<Vec<Option<f64>>, CliError> {
    let dir = run.manifest.objectives[0].direction;
    run.fronts
        .iter()
        .map(|front| match indicator {
            Indicator::Best => Ok(front
                .iter()
                .map(|p| p[0])
                .min_by(f64::total_cmp)
                .map(|v| dir.minimized(v))),
            Indicator::Hypervolume => match norm {
                // no feasible solution in the run: volume 0
                _ if front.is_empty() => Ok(Some(0.0)),
                None => Ok(Some(0.0)),
                Some(n) => {
                    let pts: Vec<Vec<f64>> = front.iter().map(|p| normalize(n, p)).collect();
                    hypervolume(&pts, &n.nadir).map(Some).map_err(CliError::failed)
                }
            },
        })
        .collect()
}

fn compare(a: &Configuration, b: &Configuration) -> Comparison {
    let xs: Vec<f64> = a.values.iter().flatten().copied().collect();
    let ys: Vec<f64> = b.values.iter().flatten().copied().collect();
    let mw = mann_whitney_u(&xs, &ys).ok();
    let d = cohens_d(&xs, &ys).ok().flatten();
    Comparison {
        a: a.label.clone(),
        b: b.label.clone(),
        u: mw.as_ref().map(|m| m.u_a),
        p: mw.as_ref().map(|m| m.p),
        d: d.as_ref().map(|d| d.d),
        effect: d.map(|d| d.label),
    }
}

/// Pure function of the result directories.
pub fn analyze(dirs: &[&Path], epsilon: f64) -> Result<Analysis, CliError> {
    if dirs.is_empty() {
        return Err(CliError::input(anyhow::anyhow!("at least one result directory is required")));
    }
    let runs = load(dirs)?;
    let objectives = runs[0].manifest.objectives.clone();
    let arity = objectives.len();
    let directions: Vec<Direction> = objectives.iter().map(|o| o.direction).collect();
    let indicator = if arity == 1 {
        Indicator::Best
    } else {
        Indicator::Hypervolume
    };
    let norm = match indicator {
        Indicator::Best => None,
        Indicator::Hypervolume => normalization(&runs, arity),
    };
    let all: Vec<Vec<Vec<f64>>> = runs.iter().flat_map(|r| r.fronts.iter().cloned()).collect();
    let reference = merge_reference_set(&all);

    let mut configurations = Vec::with_capacity(runs.len());
    for run in &runs {
        let values = indicator_values(run, &indicator, norm.as_ref())?;
        let present: Vec<f64> = values.iter().flatten().copied().collect();
        let contribution: Vec<Vec<f64>> = run.fronts.iter().flatten().cloned().collect();
        configurations.push(Configuration {
            label: run.label.clone(),
            dir: run.dir.clone(),
            operators: run.manifest.operators.clone(),
            runs: run.fronts.len(),
            feasible_runs: run.fronts.iter().filter(|f| !f.is_empty()).count(),
            summary: summarize(&present).ok(),
            rsc: reference_contribution(&contribution, &reference, epsilon),
            bsr: bsr(&contribution, &reference, epsilon).ok(),
            values,
        });
    }
    let mut comparisons = Vec::new();
    for i in 0..configurations.len() {
        for j in i + 1..configurations.len() {
            comparisons.push(compare(&configurations[i], &configurations[j]));
        }
    }
    Ok(Analysis {
        schema_version: SCHEMA_VERSION,
        objectives,
        indicator,
        normalization: norm,
        reference_set_size: reference.len(),
        reference_set: reference.iter().map(|p| minimized(&directions, p)).collect(),
        configurations,
        comparisons,
    })
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into())
}

/// Plain-text comparison table.
pub fn table(a: &Analysis) -> String {
    let mut out = format!(
        "{:<20} {:>5} {:>8} {:>10} {:>10} {:>10} {:>10} {:>5} {:>6}\n",
        "config", "runs", "feasible", "median", "min", "max", "sd", "RSC", "BSR"
    );
    for c in &a.configurations {
        let s = c.summary.as_ref();
        out.push_str(&format!(
            "{:<20} {:>5} {:>8} {:>10} {:>10} {:>10} {:>10} {:>5} {:>6}\n",
            c.label,
            c.runs,
            c.feasible_runs,
            cell(s.map(|s| s.median)),
            cell(s.map(|s| s.min)),
            cell(s.map(|s| s.max)),
            cell(s.and_then(|s| s.sd)),
            c.rsc,
            cell(c.bsr),
        ));
    }
    out.push_str(&format!("RS = {}\n", a.reference_set_size));
    for c in &a.comparisons {
        out.push_str(&format!(
            "{} vs {}: U = {}, p = {}, d = {}\n",
            c.a,
            c.b,
            cell(c.u),
            cell(c.p),
            cell(c.d)
        ));
    }
    out
}

pub fn cmd_analyze(args: &AnalyzeArgs) -> Result<Analysis, CliError> {
    let dirs: Vec<&Path> = args.dirs.iter().map(|d| d.as_path()).collect();
    let analysis = analyze(&dirs, args.epsilon)?;
    write_json(&analysis, args.out.as_deref())?;
    if args.out.is_some() {
        print!("{}", table(&analysis));
    }
    Ok(analysis)
}
