//! Benchmark suites: instance enumeration, parallel execution and the
//! per-point aggregates.
//!
//! A suite is a TOML file:
//!
//! ```toml
//! seed = 7
//! timeout = 10.0          # seconds per instance
//! [options]
//! format = "nnf"
//! lift = "ctrl"
//! plr = true
//! bcp = true
//!
//! [[random]]
//! name = "d1"
//! d = 1
//! k = 3
//! n = 3
//! p = 0.5
//! ratios = [10, 15, 20]   # L/N
//! samples = 20
//!
//! [[branch]]
//! family = "p"
//! h = [1, 2, 3]
//!
//! [[files]]
//! name = "examples"
//! glob = "formulas/*.km"  # relative to the suite file
//! ```

use crate::error::{read_file, CliError};
use crate::options::RunOptions;
use crate::report::{ReportVerdict, RunReport};
use crate::run::{run_formula, run_text, RunConfig, SolverChoice};
use kmsat::benchgen::{derive_seed, gen_branch_n, gen_branch_p, gen_random_boxcnf, BranchParams, RandomCnfParams};
use kmsat::formula::FormulaStore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::time::Duration;

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "KMSAT_WORKERS";

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Suite {
    #[serde(default)]
    pub seed: u64,
    /// Seconds per instance.
    pub timeout: Option<f64>,
    pub max_bytes: Option<u64>,
    #[serde(default)]
    pub options: RunOptions,
    #[serde(default)]
    pub random: Vec<RandomGroup>,
    #[serde(default)]
    pub branch: Vec<BranchGroup>,
    #[serde(default)]
    pub files: Vec<FileGroup>,
    /// Directory that file globs are relative to.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomGroup {
    pub name: String,
    pub d: u32,
    pub k: u32,
    pub n: u32,
    #[serde(default = "one")]
    pub m: u32,
    pub p: f64,
    /// Values of L/N, one point each.
    pub ratios: Vec<u32>,
    pub samples: u32,
}

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchFamily {
    N,
    P,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchGroup {
    pub family: BranchFamily,
    pub h: Vec<u32>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileGroup {
    pub name: String,
    pub glob: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Random(RandomCnfParams),
    Branch(BranchFamily, u32),
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub id: String,
    pub point: String,
    pub source: Source,
}

impl Suite {
    pub fn parse(text: &str, base_dir: impl Into<PathBuf>) -> Result<Suite, CliError> {
        let mut suite: Suite = toml::from_str(text).map_err(|e| CliError::Suite(e.to_string()))?;
        suite.base_dir = base_dir.into();
        for g in &suite.random {
            if g.ratios.is_empty() || g.samples == 0 {
                return Err(CliError::Suite(format!("random group '{}' has no instances", g.name)));
            }
        }
        Ok(suite)
    }

    pub fn load(path: &Path) -> Result<Suite, CliError> {
        let text = read_file(path)?;
        Suite::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Instances in report order.
    pub fn instances(&self) -> Result<Vec<Instance>, CliError> {
        let mut out = Vec::new();
        for (gi, g) in self.random.iter().enumerate() {
            let group_seed = derive_seed(self.seed, gi as u64);
            for &ratio in &g.ratios {
                let point = format!("{}/LN={ratio}", g.name);
                let point_seed = derive_seed(group_seed, u64::from(ratio));
                for i in 0..g.samples {
                    let params = RandomCnfParams {
                        d: g.d,
                        l: ratio * g.n,
                        k: g.k,
                        n: g.n,
                        m: g.m,
                        p: g.p,
                        seed: derive_seed(point_seed, u64::from(i)),
                    };
                    params.validate()?;
                    out.push(Instance {
                        id: format!("{point}/{i:04}"),
                        point: point.clone(),
                        source: Source::Random(params),
                    });
                }
            }
        }
        for g in &self.branch {
            let fam = match g.family {
                BranchFamily::N => "n",
                BranchFamily::P => "p",
            };
            for &h in &g.h {
                let id = format!("branch-{fam}/h={h}");
                out.push(Instance { id: id.clone(), point: id, source: Source::Branch(g.family, h) });
            }
        }
        for g in &self.files {
            let pattern = self.base_dir.join(&g.glob);
            let pattern = pattern.to_string_lossy();
            let paths = glob::glob(&pattern).map_err(|e| CliError::Suite(format!("glob '{}': {e}", g.glob)))?;
            let mut paths: Vec<PathBuf> = paths.filter_map(Result::ok).collect();
            paths.sort();
            for p in paths {
                let rel = p.strip_prefix(&self.base_dir).unwrap_or(&p).to_string_lossy().into_owned();
                out.push(Instance { id: format!("{}/{rel}", g.name), point: g.name.clone(), source: Source::File(p) });
            }
        }
        Ok(out)
    }

    pub fn config(&self, solver: SolverChoice) -> RunConfig {
        RunConfig {
            options: self.options,
            solver,
            timeout: self.timeout.map(Duration::from_secs_f64),
            max_bytes: self.max_bytes,
        }
    }
}

pub fn run_instance(inst: &Instance, config: &RunConfig) -> RunReport {
    let mut store = FormulaStore::new();
    let built = match &inst.source {
        Source::Random(params) => gen_random_boxcnf(&mut store, params),
        Source::Branch(BranchFamily::N, h) => gen_branch_n(&mut store, BranchParams { h: *h }),
        Source::Branch(BranchFamily::P, h) => gen_branch_p(&mut store, BranchParams { h: *h }),
        Source::File(path) => {
            return match read_file(path) {
                Ok(text) => run_text(&inst.id, &text, config).report,
                Err(e) => error_report(&inst.id, config, e),
            }
        }
    };
    match built {
        Ok(f) => run_formula(&inst.id, &mut store, f, config).report,
        Err(e) => error_report(&inst.id, config, e.into()),
    }
}

fn error_report(id: &str, config: &RunConfig, e: CliError) -> RunReport {
    let mut r = RunReport::new(id, config.options);
    r.verdict = Some(ReportVerdict::Error);
    r.error = Some(e.to_string());
    r
}

/// Aggregate over the instances of one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointSummary {
    pub point: String,
    pub instances: usize,
    pub solved: usize,
    pub solved_fraction: f64,
    pub sat: usize,
    /// Among solved instances; `None` when nothing was solved.
    pub sat_fraction: Option<f64>,
    /// Nearest-rank percentiles of encode+solve time, unsolved instances
    /// ranking last; `None` when the rank falls on an unsolved instance.
    pub p50_ms: Option<f64>,
    pub p90_ms: Option<f64>,
}

/// Nearest-rank percentile (`0 < q <= 100`) of a sample where `None`
/// ranks above every value.
pub fn nearest_rank(values: &[Option<f64>], q: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| match (a, b) {
        (Some(x), Some(y)) => x.total_cmp(y),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    });
    let rank = ((q / 100.0) * sorted.len() as f64).ceil().max(1.0) as usize;
    sorted[rank.min(sorted.len()) - 1]
}

pub fn summarize(reports: &[RunReport], points: &[String]) -> Vec<PointSummary> {
    let mut order: Vec<&str> = Vec::new();
    for p in points {
        if !order.contains(&p.as_str()) {
            order.push(p);
        }
    }
    order
        .into_iter()
        .map(|point| {
            let rs: Vec<&RunReport> = reports.iter().zip(points).filter(|(_, p)| *p == point).map(|(r, _)| r).collect();
            let solved = rs.iter().filter(|r| r.verdict.is_some_and(ReportVerdict::solved)).count();
            let sat = rs.iter().filter(|r| r.verdict == Some(ReportVerdict::Sat)).count();
            let times: Vec<Option<f64>> =
                rs.iter().map(|r| r.verdict.is_some_and(ReportVerdict::solved).then(|| r.total_ms())).collect();
            PointSummary {
                point: point.to_string(),
                instances: rs.len(),
                solved,
                solved_fraction: solved as f64 / rs.len() as f64,
                sat,
                sat_fraction: (solved > 0).then(|| sat as f64 / solved as f64),
                p50_ms: nearest_rank(&times, 50.0),
                p90_ms: nearest_rank(&times, 90.0),
            }
        })
        .collect()
}

/// One line of a bench report file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Record {
    Instance(RunReport),
    Point(PointSummary),
}

pub struct BenchReport {
    pub instances: Vec<RunReport>,
    pub points: Vec<PointSummary>,
}

impl BenchReport {
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        let records =
            self.instances.iter().cloned().map(Record::Instance).chain(self.points.iter().cloned().map(Record::Point));
        for r in records {
            out.push_str(&serde_json::to_string(&r).expect("records serialize"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Vec<Record>, serde_json::Error> {
        text.lines().filter(|l| !l.trim().is_empty()).map(serde_json::from_str).collect()
    }
}

/// Worker count: explicit value, then `KMSAT_WORKERS`, then the number of
/// available cores.
pub fn worker_count(explicit: Option<usize>) -> usize {
    explicit
        .or_else(|| std::env::var(WORKERS_ENV).ok().and_then(|v| v.parse().ok()))
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

pub fn run_suite(suite: &Suite, solver: SolverChoice, workers: usize) -> Result<BenchReport, CliError> {
    let instances = suite.instances()?;
    let config = suite.config(solver);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| CliError::Suite(e.to_string()))?;
    // par_iter keeps the input order, so the report does not depend on scheduling
    let reports: Vec<RunReport> = pool.install(|| instances.par_iter().map(|i| run_instance(i, &config)).collect());
    let points: Vec<String> = instances.iter().map(|i| i.point.clone()).collect();
    let summary = summarize(&reports, &points);
    Ok(BenchReport { instances: reports, points: summary })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_rank_percentiles() {
        let v: Vec<Option<f64>> = [15.0, 20.0, 35.0, 40.0, 50.0].into_iter().map(Some).collect();
        assert_eq!(nearest_rank(&v, 50.0), Some(35.0));
        assert_eq!(nearest_rank(&v, 90.0), Some(50.0));
        assert_eq!(nearest_rank(&v, 1.0), Some(15.0));
        let w = vec![Some(3.0), None, Some(1.0), None];
        assert_eq!(nearest_rank(&w, 50.0), Some(3.0));
        assert_eq!(nearest_rank(&w, 90.0), None);
        assert_eq!(nearest_rank(&[], 50.0), None);
    }

    #[test]
    fn enumeration_is_stable() {
        let text = "seed = 3\n[[random]]\nname = \"r\"\nd = 1\nk = 3\nn = 3\np = 0.5\nratios = [2, 4]\nsamples = 3\n\
                    [[branch]]\nfamily = \"n\"\nh = [1, 2]\n";
        let suite = Suite::parse(text, ".").unwrap();
        let a = suite.instances().unwrap();
        let b = suite.instances().unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 8);
        assert_eq!(a[0].id, "r/LN=2/0000");
        assert_eq!(a[3].point, "r/LN=4");
        assert_eq!(a[7].id, "branch-n/h=2");
        let Source::Random(p) = &a[4].source else { panic!("expected a random instance") };
        assert_eq!(p.l, 12);
    }

    #[test]
    fn suite_errors() {
        assert!(Suite::parse("bogus = 1", ".").is_err());
        assert!(Suite::parse(
            "[[random]]\nname = \"r\"\nd = 1\nk = 4\nn = 3\np = 0.5\nratios = [2]\nsamples = 1\n",
            "."
        )
        .unwrap()
        .instances()
        .is_err());
        assert!(Suite::parse(
            "[[random]]\nname = \"r\"\nd = 1\nk = 3\nn = 3\np = 0.5\nratios = []\nsamples = 1\n",
            "."
        )
        .is_err());
    }

    #[test]
    fn summaries() {
        let o = RunOptions::default();
        let mk = |v, t| {
            let mut r = RunReport::new("x", o);
            r.verdict = Some(v);
            r.solve_ms = t;
            r
        };
        let reports = vec![
            mk(ReportVerdict::Sat, 1.0),
            mk(ReportVerdict::Unsat, 2.0),
            mk(ReportVerdict::Timeout, 9.0),
            mk(ReportVerdict::Sat, 4.0),
        ];
        let points = vec!["a".to_string(), "a".into(), "a".into(), "b".into()];
        let s = summarize(&reports, &points);
        assert_eq!(s.len(), 2);
        assert_eq!((s[0].instances, s[0].solved, s[0].sat), (3, 2, 1));
        assert_eq!(s[0].sat_fraction, Some(0.5));
        assert_eq!(s[0].p50_ms, Some(2.0));
        assert_eq!(s[0].p90_ms, None);
        assert_eq!(s[1].p90_ms, Some(4.0));
    }
}
