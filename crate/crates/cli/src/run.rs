//! Campaign execution: one handler per command, replicates computed in
//! parallel chunks and written in replicate order.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};

use bcmrt::clustering::{search_colorings_capped, Coloring, DEFAULT_CAP};
use bcmrt::estimators::{estimate_q_with, Normalization};
use bcmrt::generator::sample_tree;
use bcmrt::hypothesis::{exact_tv, optimal_risk, risk_mc, LabelledTest, SplitProductTest, SumDistanceTest, TreeTest};
use bcmrt::oracles::{
    delta_lower, efron_stein_bound, efron_stein_series, gamma_product, gamma_product_asymptotic, level_moments,
    moment_table, subtree_second_moment_bound, EnumerationLimit, MomentKind,
};
use bcmrt::rng::replicate_seed;
use bcmrt::statistics::{collision_count, cross_type_k, degree_counts, monochromatic_count, root_split, sum_distance};
use bcmrt::{project, Setting, TimeLabelledTree};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Command, ExperimentSpec, Format};
use crate::error::CliError;
use crate::output::{decimal, finite, RowWriter};

/// Replicates held in memory at once; output order never depends on it.
const CHUNK: usize = 256;

/// What a campaign reports besides its rows.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunReport {
    /// Summary statistics (`estimate` only); kept out of the row stream so
    /// every row of a campaign shares one schema.
    pub summary: Option<Value>,
}

/// Runs the campaign into `out` on a pool of `spec.threads()` workers.
pub fn run(spec: &ExperimentSpec, out: &mut (dyn Write + Send)) -> Result<RunReport, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.threads()?)
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    pool.install(|| {
        let mut w = RowWriter::new(spec.format()?, out);
        let mut report = RunReport::default();
        match spec.command {
            Command::Generate => generate(spec, &mut w)?,
            Command::Stats => stats(spec, &mut w)?,
            Command::Estimate => report.summary = Some(estimate(spec, &mut w)?),
            Command::Test => test(spec, &mut w)?,
            Command::Cluster => cluster(spec, &mut w)?,
            Command::Oracle => oracle(spec, &mut w)?,
            Command::TvExact => tv(spec, &mut w)?,
        }
        w.finish()?;
        Ok(report)
    })
}

/// Runs the campaign into `--out` or standard output.
pub fn execute(spec: &ExperimentSpec) -> Result<RunReport, CliError> {
    match spec.get::<String>("out")? {
        Some(path) => {
            let mut f = BufWriter::new(File::create(&path)?);
            let report = run(spec, &mut f)?;
            f.flush()?;
            Ok(report)
        }
        None => {
            let mut out = BufWriter::new(std::io::stdout());
            let report = run(spec, &mut out)?;
            out.flush()?;
            Ok(report)
        }
    }
}

/// Replicate indices of the campaign: all of `0..reps`, or the single
/// `--replicate` to re-run one row in isolation.
fn replicates(spec: &ExperimentSpec) -> Result<Vec<usize>, CliError> {
    Ok(match spec.get::<usize>("replicate")? {
        Some(i) => vec![i],
        None => (0..spec.reps()?).collect(),
    })
}

/// Computes `f(replicate, seed_used)` in parallel chunks and hands the
/// results to `sink` in replicate order.
fn campaign<R: Send>(
    spec: &ExperimentSpec,
    f: impl Fn(usize, u64) -> Result<R, CliError> + Sync,
    mut sink: impl FnMut(R) -> Result<(), CliError>,
) -> Result<(), CliError> {
    let master = spec.seed()?;
    for chunk in replicates(spec)?.chunks(CHUNK) {
        let rows: Vec<R> = chunk
            .par_iter()
            .map(|&i| f(i, replicate_seed(master, i as u64)))
            .collect::<Result<_, _>>()?;
        for r in rows {
            sink(r)?;
        }
    }
    Ok(())
}

fn nullable_parents(parent: &[u32]) -> Vec<Option<u32>> {
    parent.iter().map(|&p| (p != bcmrt::tree::NO_PARENT).then_some(p)).collect()
}

// ---------------------------------------------------------------------------
// generate

#[derive(Serialize)]
struct GenerateRow<T> {
    replicate: usize,
    seed_used: u64,
    n: usize,
    q: f64,
    setting: &'static str,
    /// Canonical code (hex) of the observed tree; absent for `full`.
    form: Option<String>,
    tree: T,
}

fn generate(spec: &ExperimentSpec, w: &mut RowWriter) -> Result<(), CliError> {
    let n: usize = spec.require("n")?;
    let q: f64 = spec.require("q")?;
    let setting_name = spec.get::<String>("setting")?.unwrap_or_else(|| "full".into());
    let setting = match setting_name.as_str() {
        "full" => None,
        s => Some(s.parse::<Setting>().map_err(|e| CliError::Usage(e.to_string()))?),
    };
    let label = setting.map_or("full", |s| s.as_str());
    let csv = spec.format()? == Format::Csv;
    campaign(
        spec,
        |i, seed| {
            let tree = sample_tree(n, q, seed)?;
            let (form, payload) = match setting {
                None => (None, serde_json::to_value(&tree)?),
                Some(s) => {
                    let obs = project(&tree, s);
                    let form = obs.key();
                    let payload = match s {
                        Setting::Labelled => serde_json::to_value(form.labelled_representative()?)?,
                        _ => {
                            let shape = obs.as_shape();
                            json!({
                                "parent": nullable_parents(shape.parents()),
                                "root_edge": shape.root_edge(),
                            })
                        }
                    };
                    (Some(form.hex()), payload)
                }
            };
            Ok(GenerateRow { replicate: i, seed_used: seed, n, q, setting: label, form, tree: payload })
        },
        |row| {
            if csv {
                // nested trees travel as one JSON-valued cell
                let GenerateRow { replicate, seed_used, n, q, setting, form, tree } = row;
                w.write(&GenerateRow { replicate, seed_used, n, q, setting, form, tree: tree.to_string() })
            } else {
                w.write(&row)
            }
        },
    )
}

// ---------------------------------------------------------------------------
// stats

#[derive(Serialize)]
#[allow(non_snake_case)]
struct StatsRow {
    replicate: usize,
    seed: Option<u64>,
    seed_used: Option<u64>,
    n: usize,
    q: Option<f64>,
    N1: u64,
    N2: u64,
    N3: u64,
    Z: u64,
    M_true: u64,
    split_product: u64,
    R: u64,
    #[serde(serialize_with = "decimal")]
    S: u128,
    #[serde(serialize_with = "decimal")]
    K: u128,
}

fn stats_row(
    tree: &TimeLabelledTree,
    replicate: usize,
    seed: Option<u64>,
    seed_used: Option<u64>,
    q: Option<f64>,
) -> Result<StatsRow, CliError> {
    let deg = degree_counts(tree);
    let split = root_split(tree)?;
    Ok(StatsRow {
        replicate,
        seed,
        seed_used,
        n: tree.n(),
        q,
        N1: deg.get(1),
        N2: deg.get(2),
        N3: deg.get(3),
        Z: collision_count(tree),
        M_true: monochromatic_count(tree, &Coloring::truth(tree.n()))?,
        split_product: split.product,
        R: split.r.expect("typed trees carry R"),
        S: sum_distance(tree),
        K: cross_type_k(tree),
    })
}

/// One input line: a bare tree, or a `generate` row of the `full` setting.
fn parse_tree_line(line: &str, idx: usize) -> Result<(TimeLabelledTree, usize, Option<u64>, Option<f64>), CliError> {
    let bad = |detail: String| CliError::Input { line: idx + 1, detail };
    let v: Value = serde_json::from_str(line).map_err(|e| bad(e.to_string()))?;
    if let Some(s) = v.get("setting").and_then(Value::as_str) {
        if s != "full" {
            return Err(bad(format!("setting `{s}` hides the types the statistics need")));
        }
    }
    let tree_value = v.get("tree").cloned().unwrap_or_else(|| v.clone());
    let tree: TimeLabelledTree = serde_json::from_value(tree_value).map_err(|e| bad(e.to_string()))?;
    let replicate = v.get("replicate").and_then(Value::as_u64).map_or(idx, |r| r as usize);
    Ok((tree, replicate, v.get("seed_used").and_then(Value::as_u64), v.get("q").and_then(Value::as_f64)))
}

fn stats(spec: &ExperimentSpec, w: &mut RowWriter) -> Result<(), CliError> {
    if let Some(path) = spec.get::<String>("input")? {
        let reader = BufReader::new(File::open(&path)?);
        let mut lines = Vec::new();
        for line in reader.lines() {
            lines.push(line?);
        }
        for (chunk_no, chunk) in lines.chunks(CHUNK).enumerate() {
            let rows: Vec<StatsRow> = chunk
                .par_iter()
                .enumerate()
                .filter(|(_, l)| !l.trim().is_empty())
                .map(|(j, l)| {
                    let (tree, rep, seed_used, q) = parse_tree_line(l, chunk_no * CHUNK + j)?;
                    stats_row(&tree, rep, None, seed_used, q)
                })
                .collect::<Result<_, _>>()?;
            for r in &rows {
                w.write(r)?;
            }
        }
        return Ok(());
    }
    let n: usize = spec.require("n")?;
    let q: f64 = spec.require("q")?;
    let master = spec.seed()?;
    campaign(
        spec,
        |i, seed| stats_row(&sample_tree(n, q, seed)?, i, Some(master), Some(seed), Some(q)),
        |row| w.write(&row),
    )
}

// ---------------------------------------------------------------------------
// estimate

#[derive(Serialize)]
struct EstimateRow {
    replicate: usize,
    seed_used: u64,
    n: usize,
    q: f64,
    q_hat: f64,
    z: u64,
    /// Absent in the boundary-half regime.
    scale: Option<f64>,
    regime: String,
}

/// Empirical quantile by nearest rank on sorted data.
fn quantile(sorted: &[f64], level: f64) -> f64 {
    let k = ((level * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[k - 1]
}

fn estimate(spec: &ExperimentSpec, w: &mut RowWriter) -> Result<Value, CliError> {
    let n: usize = spec.require("n")?;
    let q: f64 = spec.require("q")?;
    let norm: Normalization = spec.get("normalization")?.unwrap_or_default();
    let mut q_hats = Vec::new();
    campaign(
        spec,
        |i, seed| {
            let r = estimate_q_with(&sample_tree(n, q, seed)?, norm)?;
            Ok(EstimateRow {
                replicate: i,
                seed_used: seed,
                n,
                q,
                q_hat: r.q_hat,
                z: r.z,
                scale: finite(r.scale),
                regime: r.regime.to_string(),
            })
        },
        |row| {
            q_hats.push(row.q_hat);
            w.write(&row)
        },
    )?;
    q_hats.sort_by(f64::total_cmp);
    let mean = q_hats.iter().sum::<f64>() / q_hats.len() as f64;
    Ok(json!({
        "reps": q_hats.len(),
        "mean": mean,
        "p05": quantile(&q_hats, 0.05),
        "p25": quantile(&q_hats, 0.25),
        "median": quantile(&q_hats, 0.5),
        "p75": quantile(&q_hats, 0.75),
        "p95": quantile(&q_hats, 0.95),
    }))
}

// ---------------------------------------------------------------------------
// test and tv-exact

#[derive(Serialize)]
struct TestRow {
    setting: &'static str,
    test: &'static str,
    n: usize,
    q0: f64,
    q1: f64,
    seed: u64,
    reps: usize,
    risk: f64,
    se: f64,
    type_one: f64,
    type_two: f64,
}

fn test(spec: &ExperimentSpec, w: &mut RowWriter) -> Result<(), CliError> {
    let n: usize = spec.require("n")?;
    let (q0, q1): (f64, f64) = (spec.require("q0")?, spec.require("q1")?);
    let setting: Setting = spec.require("setting")?;
    let (seed, reps) = (spec.seed()?, spec.reps()?);
    let (name, test): (&'static str, Box<dyn TreeTest>) = match setting {
        Setting::Labelled => ("collision", Box::new(LabelledTest::new(n, q0, q1)?)),
        Setting::RootedUnlabelled => ("split_product", Box::new(SplitProductTest::new(n, q0, q1)?)),
        Setting::UnrootedUnlabelled => ("sum_distance", Box::new(SumDistanceTest::new(n, q0, q1)?)),
    };
    let r = risk_mc(test.as_ref(), q0, q1, n, reps, seed)?;
    w.write(&TestRow {
        setting: setting.as_str(),
        test: name,
        n,
        q0,
        q1,
        seed,
        reps: r.reps,
        risk: r.risk,
        se: r.se,
        type_one: r.type_one,
        type_two: r.type_two,
    })
}

#[derive(Serialize)]
struct TvRow {
    setting: &'static str,
    n: usize,
    q0: f64,
    q1: f64,
    tv: f64,
    optimal_risk: f64,
}

fn tv(spec: &ExperimentSpec, w: &mut RowWriter) -> Result<(), CliError> {
    let n: usize = spec.require("n")?;
    let (q0, q1): (f64, f64) = (spec.require("q0")?, spec.require("q1")?);
    let setting: Setting = spec.require("setting")?;
    let limit = if spec.flag("extended")? { EnumerationLimit::Extended } else { EnumerationLimit::Default };
    let tv = exact_tv(n, q0, q1, setting, limit)?;
    w.write(&TvRow { setting: setting.as_str(), n, q0, q1, tv, optimal_risk: optimal_risk(tv) })
}

// ---------------------------------------------------------------------------
// cluster

#[derive(Serialize)]
struct ClusterRow {
    replicate: usize,
    seed_used: u64,
    n: usize,
    q: f64,
    coloring: Option<String>,
    mono_edges: u64,
    threshold: i64,
    /// `max(m, n − m)` against the generating coloring.
    overlap: Option<usize>,
    recovered: bool,
    searched: u64,
}

fn cluster(spec: &ExperimentSpec, w: &mut RowWriter) -> Result<(), CliError> {
    let n: usize = spec.require("n")?;
    let q: f64 = spec.require("q")?;
    let cap: usize = spec.get("cap")?.unwrap_or(DEFAULT_CAP);
    campaign(
        spec,
        |i, seed| {
            let r = search_colorings_capped(&sample_tree(n, q, seed)?, q, cap)?;
            Ok(ClusterRow {
                replicate: i,
                seed_used: seed,
                n,
                q,
                coloring: r.coloring.map(|c| c.to_string()),
                mono_edges: r.mono_edges,
                threshold: r.threshold,
                overlap: r.overlap,
                recovered: r.overlap == Some(n),
                searched: r.searched,
            })
        },
        |row| w.write(&row),
    )
}

// ---------------------------------------------------------------------------
// oracle

fn oracle(spec: &ExperimentSpec, w: &mut RowWriter) -> Result<(), CliError> {
    let which: String = spec.require("which")?;
    let q = || spec.require::<f64>("q");
    let n = || spec.require::<usize>("n");
    let kind = match which.as_str() {
        "leaf" => Some(MomentKind::Leaf),
        "degree" => Some(MomentKind::Degree { k_max: spec.get("k")?.unwrap_or(4) }),
        "rooted" => Some(MomentKind::Rooted),
        "unrooted" => Some(MomentKind::Unrooted),
        _ => None,
    };
    if let Some(kind) = kind {
        let table = moment_table(kind, q()?, n()?)?;
        let mut header = vec!["n".to_string()];
        header.extend(kind.columns());
        w.begin_table(&header)?;
        for (m, row) in table.rows() {
            let mut cells = vec![m as f64];
            cells.extend_from_slice(row);
            w.table_row(&header, &cells)?;
        }
        return Ok(());
    }
    match which.as_str() {
        "gamma" => {
            let (n, q) = (n()?, q()?);
            let header = ["n", "product", "asymptotic"].map(String::from);
            w.begin_table(&header)?;
            for m in 1..=n {
                w.table_row(&header, &[m as f64, gamma_product(m, q)?, gamma_product_asymptotic(m, q)])?;
            }
        }
        "delta" => {
            let (q0, q1) = (q()?, spec.require::<f64>("q1")?);
            let header = ["q0", "q1", "delta"].map(String::from);
            w.begin_table(&header)?;
            w.table_row(&header, &[q0, q1, delta_lower(q0, q1)?])?;
        }
        "level" => {
            let header = ["n", "mean", "second_moment"].map(String::from);
            w.begin_table(&header)?;
            for m in 1..=n()? {
                let (m1, m2) = level_moments(m)?;
                w.table_row(&header, &[m as f64, m1, m2])?;
            }
        }
        "esbound" => {
            let i: Option<usize> = spec.get("i")?;
            let mut header = ["n", "series", "bound"].map(String::from).to_vec();
            if i.is_some() {
                header.push("subtree_second_moment_bound".into());
            }
            w.begin_table(&header)?;
            for m in 2..=n()? {
                let mut cells = vec![m as f64, efron_stein_series(m), efron_stein_bound(m)?];
                if let Some(i) = i {
                    cells.push(if i <= m { subtree_second_moment_bound(m, i)? } else { f64::NAN });
                }
                w.table_row(&header, &cells)?;
            }
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown oracle `{other}` (leaf|degree|rooted|unrooted|gamma|delta|level|esbound)"
            )))
        }
    }
    Ok(())
}
