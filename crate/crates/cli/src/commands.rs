use std::collections::HashSet;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use kns::baselines::psd_params;
use kns::datagen::{generate, SyntheticSpec};
use kns::eval::{benchmark, pr_curve, timed, Algorithm, EvalReport, PrCurve};
use kns::io::{self as kio, MatrixFormat};
use kns::presets::{Preset, PRESETS};
use kns::{DetectorParams, Error, ProjectionSense, Result};
use serde::{Deserialize, Serialize};

use crate::{AlgoName, BenchArgs, EvalArgs, ParamArgs, ScoreArgs, SynthArgs};

const DEFAULT_K: usize = 5;
const DEFAULT_SCN: u32 = 25;
const DEFAULT_DST: usize = 20;
const DEFAULT_KNN: usize = 10;

fn param_err(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}

/// Explicit parameter flags; anything unset falls back to the preset row.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Overrides {
    pub k: Option<usize>,
    pub scn: Option<u32>,
    pub alpha: Option<usize>,
    pub dst: Option<usize>,
    pub knn: Option<usize>,
    pub sense: Option<ProjectionSense>,
}

impl From<&ParamArgs> for Overrides {
    fn from(p: &ParamArgs) -> Self {
        Self {
            k: p.k,
            scn: p.scn,
            alpha: p.alpha,
            dst: p.dst,
            knn: p.knn,
            sense: p.sense.map(Into::into),
        }
    }
}

fn resolve(name: AlgoName, o: &Overrides, preset: Option<&Preset>, seed: u64) -> Algorithm {
    let alpha = o.alpha.unwrap_or(DetectorParams::DEFAULT_ALPHA);
    match name {
        AlgoName::Kns => {
            let k = o.k.or(preset.map(|p| p.kns_k)).unwrap_or(DEFAULT_K);
            let scn = o.scn.or(preset.map(|p| p.kns_scn)).unwrap_or(DEFAULT_SCN);
            let mut params = DetectorParams::new(k, scn)
                .with_seed(seed)
                .with_alpha(alpha);
            if let Some(s) = o.sense {
                params = params.with_sense(s);
            }
            Algorithm::Kns(params)
        }
        AlgoName::Psd => {
            let dst = o.dst.or(preset.map(|p| p.psd_dst)).unwrap_or(DEFAULT_DST);
            let scn = o.scn.or(preset.map(|p| p.psd_scn)).unwrap_or(DEFAULT_SCN);
            Algorithm::Psd(psd_params(dst, scn).with_seed(seed).with_alpha(alpha))
        }
        AlgoName::Lof => Algorithm::Lof {
            knn: o.knn.or(preset.map(|p| p.lof_knn)).unwrap_or(DEFAULT_KNN),
        },
        AlgoName::Rpgs => Algorithm::Rpgs {
            scn: o.scn.or(preset.map(|p| p.kns_scn)).unwrap_or(DEFAULT_SCN),
        },
    }
}

/// Rejects parameters that cannot work on an `n × m` input.
fn check(alg: &Algorithm, n: usize, m: usize) -> Result<()> {
    match alg {
        Algorithm::Kns(p) | Algorithm::Psd(p) => p.validate(m),
        Algorithm::Lof { knn } if *knn == 0 || *knn >= n => Err(param_err(format!(
            "knn must lie in 1..{n} for {n} points, got {knn}"
        ))),
        Algorithm::Rpgs { scn } if *scn < 2 => {
            Err(param_err(format!("scn must be at least 2, got {scn}")))
        }
        _ => Ok(()),
    }
}

fn set_threads(threads: usize) -> Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::Contract(format!("thread pool: {e}")))
}

fn stdout_err(e: io::Error) -> Error {
    Error::Io(e)
}

fn one_line<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).unwrap_or_default()
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ScoreConfig {
    pub input: PathBuf,
    pub format: MatrixFormat,
    pub n_points: usize,
    pub n_dims: usize,
    pub detector: Algorithm,
    pub top: usize,
    pub threads: usize,
}

pub fn score(args: ScoreArgs) -> Result<()> {
    let preset = args
        .params
        .preset
        .as_deref()
        .map(Preset::by_name)
        .transpose()?;
    let alg = resolve(
        args.algo,
        &Overrides::from(&args.params),
        preset.as_ref(),
        args.seed,
    );
    if args.top == 0 {
        return Err(param_err("--top must be at least 1"));
    }
    set_threads(args.threads)?;
    let format = MatrixFormat::from(args.format);
    let data = kio::ingest_matrix(&args.input, format)?;
    let truth = match &args.labels {
        Some(path) => Some(read_truth(path, data.n_points())?),
        None => None,
    };
    check(&alg, data.n_points(), data.n_dims())?;
    let config = ScoreConfig {
        input: args.input.clone(),
        format,
        n_points: data.n_points(),
        n_dims: data.n_dims(),
        detector: alg.clone(),
        top: args.top,
        threads: args.threads,
    };

    let (report, cpu) = timed(|| alg.run(&data));
    let report = report?;
    let top = args.top.min(report.len());

    let mut out = io::stdout().lock();
    writeln!(out, "# config {}", one_line(&config)).map_err(stdout_err)?;
    writeln!(out, "# cpu_seconds {:.6}", cpu.as_secs_f64()).map_err(stdout_err)?;
    writeln!(out, "rank,point_id,score").map_err(stdout_err)?;
    for (i, &p) in report.top(top).iter().enumerate() {
        writeln!(out, "{},{},{:.12}", i + 1, p + 1, report.scores[p]).map_err(stdout_err)?;
    }
    if let Some(truth) = &truth {
        let hits = report.top(top).iter().filter(|p| truth.contains(p)).count() as f64;
        let precision = hits / top as f64;
        let recall = hits / truth.len() as f64;
        let f = if hits == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        writeln!(
            out,
            "# top {top}: precision {precision:.4} recall {recall:.4} f_measure {f:.4}"
        )
        .map_err(stdout_err)?;
        let curve = pr_curve(&report.ranking, truth)?;
        writeln!(
            out,
            "# best f_measure {:.4} at rank {}",
            curve.best_f, curve.best_cutoff
        )
        .map_err(stdout_err)?;
    }

    if let Some(dir) = &args.out {
        fs::create_dir_all(dir)?;
        kio::write_score_table(&dir.join("scores.csv"), &report, top)?;
        kio::write_json(&dir.join("config.json"), &config)?;
    }
    Ok(())
}

fn read_truth(path: &Path, n: usize) -> Result<HashSet<usize>> {
    let ids = kio::read_outlier_labels(path)?;
    if let Some(bad) = ids.iter().find(|&&p| p >= n) {
        return Err(Error::InvalidData(format!(
            "{}: point id {} exceeds the {n} points scored",
            path.display(),
            bad + 1
        )));
    }
    Ok(ids.into_iter().collect())
}

pub fn synth(args: SynthArgs) -> Result<()> {
    let preset = args.preset.as_deref().map(Preset::by_name).transpose()?;
    let n = args.n.or(preset.map(|p| p.n_points));
    let m = args.m.or(preset.map(|p| p.n_dims));
    let (Some(n), Some(m)) = (n, m) else {
        return Err(param_err("synth needs --preset or both --n and --m"));
    };
    let spec = SyntheticSpec::mixture(n, m, args.seed);
    spec.validate()?;
    set_threads(args.threads)?;
    let ds = generate(&spec)?;
    kio::write_dataset(&args.out, &ds)?;
    println!(
        "wrote {} points x {} dims to {} ({} outliers, escape fraction {:.4})",
        n,
        m,
        args.out.display(),
        spec.n_outliers,
        ds.escape_fraction()
    );
    Ok(())
}

/// Everything a bench run depends on. Stored in `report.json` so the run can
/// be repeated with `--config`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub datasets: Vec<String>,
    pub seeds: Vec<u64>,
    pub algorithms: Vec<AlgoName>,
    pub overrides: Overrides,
    pub threads: usize,
}

/// `a..b` (inclusive) or a comma-separated list.
pub fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    let bad = || param_err(format!("cannot parse seeds {text:?}"));
    let text = text.trim();
    let seeds: Vec<u64> = if let Some((a, b)) = text.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b
            .trim()
            .trim_start_matches('=')
            .parse()
            .map_err(|_| bad())?;
        (a..=b).collect()
    } else {
        text.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse().map_err(|_| bad()))
            .collect::<Result<_>>()?
    };
    if seeds.is_empty() {
        return Err(param_err("at least one seed is required"));
    }
    Ok(seeds)
}

fn bench_datasets(name: &str, include_xl: bool) -> Result<Vec<String>> {
    if name == "paper-table1" {
        let rows = if include_xl { 8 } else { 7 };
        Ok(PRESETS[..rows].iter().map(Preset::name).collect())
    } else {
        Ok(vec![Preset::by_name(name)?.name()])
    }
}

impl BenchConfig {
    fn from_args(args: &BenchArgs) -> Result<Self> {
        if let Some(path) = &args.config {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::InvalidData(format!("cannot read {}: {e}", path.display())))?;
            #[derive(Deserialize)]
            struct Wrapper {
                config: BenchConfig,
            }
            let w: Wrapper = serde_json::from_str(&text)
                .map_err(|e| Error::InvalidData(format!("{}: {e}", path.display())))?;
            return Ok(w.config);
        }
        let algorithms = if args.algo.is_empty() {
            vec![AlgoName::Kns, AlgoName::Psd, AlgoName::Lof]
        } else {
            args.algo.clone()
        };
        Ok(Self {
            datasets: bench_datasets(&args.dataset, args.include_xl)?,
            seeds: parse_seeds(&args.seeds)?,
            algorithms,
            overrides: Overrides {
                k: args.k,
                scn: args.scn,
                alpha: args.alpha,
                dst: args.dst,
                knn: args.knn,
                sense: args.sense.map(Into::into),
            },
            threads: args.threads,
        })
    }

    /// Every (dataset, seed) job with its resolved detectors, checked up front.
    fn jobs(&self) -> Result<Vec<Job>> {
        if self.seeds.is_empty() {
            return Err(param_err("at least one seed is required"));
        }
        if self.algorithms.is_empty() {
            return Err(param_err("at least one algorithm is required"));
        }
        let mut jobs = Vec::new();
        for name in &self.datasets {
            let preset = Preset::by_name(name)?;
            for &seed in &self.seeds {
                let spec = preset.dataset(seed);
                spec.validate()?;
                let algorithms: Vec<Algorithm> = self
                    .algorithms
                    .iter()
                    .map(|&a| resolve(a, &self.overrides, Some(&preset), seed))
                    .collect();
                for alg in &algorithms {
                    check(alg, spec.n_points, spec.n_dims)?;
                }
                jobs.push(Job {
                    dataset: preset.name(),
                    seed,
                    spec,
                    algorithms,
                });
            }
        }
        Ok(jobs)
    }
}

struct Job {
    dataset: String,
    seed: u64,
    spec: SyntheticSpec,
    algorithms: Vec<Algorithm>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BenchRun {
    pub dataset: String,
    pub seed: u64,
    pub containment_escapes: usize,
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FSummary {
    pub dataset: String,
    pub n_points: usize,
    pub n_dims: usize,
    pub algorithm: String,
    pub runs: usize,
    pub failures: usize,
    pub mean_f: f64,
    pub min_f: f64,
    pub max_f: f64,
    pub mean_cpu_seconds: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub summary: Vec<FSummary>,
    pub runs: Vec<BenchRun>,
}

fn summarize(config: &BenchConfig, runs: &[BenchRun]) -> Vec<FSummary> {
    let mut out = Vec::new();
    for name in &config.datasets {
        let of_dataset: Vec<&BenchRun> = runs.iter().filter(|r| &r.dataset == name).collect();
        let Some(first) = of_dataset.first() else {
            continue;
        };
        for alg in &config.algorithms {
            let alg_name = alg.as_str();
            let results: Vec<_> = of_dataset
                .iter()
                .filter_map(|r| r.report.result(alg_name))
                .collect();
            let fs: Vec<f64> = results
                .iter()
                .filter_map(|r| r.curve.as_ref().map(|c| c.best_f))
                .collect();
            let mean = |v: &[f64]| {
                if v.is_empty() {
                    f64::NAN
                } else {
                    v.iter().sum::<f64>() / v.len() as f64
                }
            };
            let cpu: Vec<f64> = results.iter().map(|r| r.cpu_seconds).collect();
            out.push(FSummary {
                dataset: name.clone(),
                n_points: first.report.dataset.n_points,
                n_dims: first.report.dataset.n_dims,
                algorithm: alg_name.to_string(),
                runs: results.len(),
                failures: results.len() - fs.len(),
                mean_f: mean(&fs),
                min_f: fs.iter().copied().fold(f64::NAN, f64::min),
                max_f: fs.iter().copied().fold(f64::NAN, f64::max),
                mean_cpu_seconds: mean(&cpu),
            });
        }
    }
    out
}

fn write_summary(path: &Path, rows: &[FSummary]) -> Result<()> {
    let mut w = io::BufWriter::new(fs::File::create(path)?);
    writeln!(
        w,
        "dataset,n_points,n_dims,algorithm,runs,failures,mean_f,min_f,max_f,mean_cpu_seconds"
    )?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            r.dataset,
            r.n_points,
            r.n_dims,
            r.algorithm,
            r.runs,
            r.failures,
            r.mean_f,
            r.min_f,
            r.max_f,
            r.mean_cpu_seconds
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn bench(args: BenchArgs) -> Result<()> {
    let config = BenchConfig::from_args(&args)?;
    let jobs = config.jobs()?;
    set_threads(config.threads)?;
    fs::create_dir_all(&args.out)?;

    let mut runs = Vec::with_capacity(jobs.len());
    for job in jobs {
        let ds = generate(&job.spec)?;
        let report = benchmark(&ds, &job.algorithms);
        let dir = args
            .out
            .join(&job.dataset)
            .join(format!("seed-{}", job.seed));
        fs::create_dir_all(&dir)?;
        for r in &report.results {
            match &r.curve {
                Some(c) => {
                    kio::write_pr_table(&dir.join(format!("pr_{}.csv", r.algorithm.name())), c)?
                }
                None => log::warn!(
                    "{} seed {}: {} failed: {}",
                    job.dataset,
                    job.seed,
                    r.algorithm.name(),
                    r.error.as_deref().unwrap_or("unknown error")
                ),
            }
        }
        eprintln!(
            "{} seed {}: {}",
            job.dataset,
            job.seed,
            report
                .results
                .iter()
                .map(|r| format!(
                    "{} F={} cpu={:.3}s",
                    r.algorithm.name(),
                    r.curve
                        .as_ref()
                        .map_or("failed".into(), |c: &PrCurve| format!("{:.3}", c.best_f)),
                    r.cpu_seconds
                ))
                .collect::<Vec<_>>()
                .join(", ")
        );
        runs.push(BenchRun {
            dataset: job.dataset,
            seed: job.seed,
            containment_escapes: ds.containment_escapes,
            report,
        });
    }

    let summary = summarize(&config, &runs);
    write_summary(&args.out.join("f_summary.csv"), &summary)?;
    let report = BenchReport {
        config,
        summary,
        runs,
    };
    kio::write_json(&args.out.join("report.json"), &report)?;
    let mut out = io::stdout().lock();
    writeln!(
        out,
        "dataset,n_dims,algorithm,mean_f,min_f,max_f,mean_cpu_seconds"
    )
    .map_err(stdout_err)?;
    for r in &report.summary {
        writeln!(
            out,
            "{},{},{},{:.4},{:.4},{:.4},{:.4}",
            r.dataset, r.n_dims, r.algorithm, r.mean_f, r.min_f, r.max_f, r.mean_cpu_seconds
        )
        .map_err(stdout_err)?;
    }
    Ok(())
}

pub fn eval(args: EvalArgs) -> Result<()> {
    let ranking = kio::read_score_ranking(&args.scores)?;
    let truth = read_truth(&args.labels, ranking.len())?;
    let curve = pr_curve(&ranking, &truth)?;
    let mut out = io::stdout().lock();
    writeln!(out, "rank,recall,precision,f_measure").map_err(stdout_err)?;
    for p in &curve.points {
        writeln!(
            out,
            "{},{:.4},{:.4},{:.4}",
            p.rank,
            p.recall,
            p.precision,
            p.f_measure()
        )
        .map_err(stdout_err)?;
    }
    writeln!(
        out,
        "# best f_measure {:.4} at rank {}",
        curve.best_f, curve.best_cutoff
    )
    .map_err(stdout_err)?;
    if let Some(path) = &args.out {
        kio::write_pr_table(path, &curve)?;
    }
    Ok(())
}
