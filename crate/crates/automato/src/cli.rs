//! Command-line surface: cluster, update-alpha, benchmark, mapper, and
//! diagram subcommands.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::automato::{fit, update_alpha, AutomatoConfig, FittedModelJson};
use crate::density::{DensityKind, Smoothing};
use crate::error::{Error, Result};
use crate::evaluation::{run_benchmark, BenchmarkDataset};
use crate::geometry::{min_max_scale, GraphKind, PointCloud};
use crate::io::load_points;
use crate::mapper::{build_cover, mapper_graph};
use crate::tomato::{tomato_cluster, TomatoParams};

/// Formats a float with 17 significant digits.
fn g17(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Parser, Debug)]
#[command(
    name = "automato",
    about = "Mode-seeking clustering with a bootstrap-selected prominence threshold"
)]
pub struct Cli {
    /// Cap on worker threads for the parallel bootstrap (default: all cores)
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Optional JSON config file; flags take precedence over its entries
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct EstimatorOpts {
    /// Neighborhood graph: "knn" or "rips" [default: knn]
    #[arg(long)]
    pub graph: Option<String>,

    /// Neighbor count for the k-NN graph [default: 10]
    #[arg(short = 'k', long)]
    pub k: Option<usize>,

    /// Radius for the Rips graph
    #[arg(long)]
    pub delta: Option<f64>,

    /// Density estimator: "dtm", "log-dtm", or "kde" [default: log-dtm]
    #[arg(long)]
    pub density: Option<String>,

    /// Neighbor count for the DTM estimators [default: 10]
    #[arg(long)]
    pub density_k: Option<usize>,

    /// Mass fraction m in (0,1) for the DTM estimators; overrides density-k
    #[arg(long)]
    pub mass_fraction: Option<f64>,

    /// Bandwidth for the Gaussian KDE
    #[arg(long)]
    pub bandwidth: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct BootstrapOpts {
    /// Confidence level in (0,1) [default: 0.35]
    #[arg(long)]
    pub alpha: Option<f64>,

    /// Number of bootstrap iterations [default: 1000]
    #[arg(short = 'B', long)]
    pub b_iterations: Option<usize>,

    /// RNG seed; seeded runs are bit-reproducible
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Cluster a points file; writes one label per input row
    Cluster {
        /// Points file (whitespace- or comma-delimited, one point per row)
        points: PathBuf,

        /// Fixed prominence threshold (number or "inf"); skips the bootstrap
        #[arg(long, conflicts_with_all = ["alpha", "b_iterations"])]
        tau: Option<String>,

        /// Min-max scale the cloud before clustering
        #[arg(long)]
        scale: bool,

        /// Experimental: flag outliers below this reciprocity share as -1
        #[arg(long)]
        outlier_fraction: Option<f64>,

        /// Output labels file (stdout when omitted)
        #[arg(short, long)]
        out: Option<PathBuf>,

        /// Where to write the fitted-model JSON (bootstrap mode only)
        #[arg(long)]
        model: Option<PathBuf>,

        #[command(flatten)]
        estimators: EstimatorOpts,

        #[command(flatten)]
        bootstrap: BootstrapOpts,
    },

    /// Recompute the clustering of a fitted model at a new confidence level
    UpdateAlpha {
        /// Fitted-model JSON produced by `cluster --model`
        model: PathBuf,

        /// Points file the model was fitted on
        #[arg(long)]
        points: PathBuf,

        /// New confidence level in (0,1)
        #[arg(long)]
        alpha: f64,

        /// Min-max scale the cloud before clustering (match the fit)
        #[arg(long)]
        scale: bool,

        /// Output labels file (stdout when omitted)
        #[arg(short, long)]
        out: Option<PathBuf>,
    },

    /// Score the clusterer against ground-truth files over seeded runs
    Benchmark {
        /// Dataset spec "name=points.csv:truth1.csv[:truth2.csv...]"
        #[arg(long = "data", required = true)]
        data: Vec<String>,

        /// Seeded runs per dataset [default: 10]
        #[arg(long, default_value_t = 10)]
        runs: usize,

        /// CSV output path (table always printed to stdout)
        #[arg(short, long)]
        out: Option<PathBuf>,

        #[command(flatten)]
        estimators: EstimatorOpts,

        #[command(flatten)]
        bootstrap: BootstrapOpts,
    },

    /// Build a Mapper graph over an interval cover of a coordinate filter
    Mapper {
        points: PathBuf,

        /// Coordinate used as the filter function [default: 0]
        #[arg(long, default_value_t = 0)]
        filter_dim: usize,

        /// Number of cover intervals [default: 15]
        #[arg(long, default_value_t = 15)]
        intervals: usize,

        /// Fractional overlap between consecutive intervals [default: 0.3]
        #[arg(long, default_value_t = 0.3)]
        overlap: f64,

        /// Min-max scale the cloud before filtering/clustering
        #[arg(long)]
        scale: bool,

        /// JSON output path (stdout when omitted)
        #[arg(short, long)]
        out: Option<PathBuf>,

        /// Optional DOT output path
        #[arg(long)]
        dot: Option<PathBuf>,

        #[command(flatten)]
        estimators: EstimatorOpts,

        #[command(flatten)]
        bootstrap: BootstrapOpts,
    },

    /// Emit the persistence diagram (two columns) and the bootstrap threshold
    Diagram {
        points: PathBuf,

        /// Fixed threshold to report instead of running the bootstrap
        #[arg(long, conflicts_with_all = ["alpha", "b_iterations"])]
        tau: Option<String>,

        /// Min-max scale the cloud first
        #[arg(long)]
        scale: bool,

        /// Output path (stdout when omitted)
        #[arg(short, long)]
        out: Option<PathBuf>,

        /// Optional JSON output path for the diagram
        #[arg(long)]
        json: Option<PathBuf>,

        #[command(flatten)]
        estimators: EstimatorOpts,

        #[command(flatten)]
        bootstrap: BootstrapOpts,
    },
}

/// Optional JSON config file; every field may be omitted. Precedence is
/// flags > config file > built-in defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub graph: Option<String>,
    pub k: Option<usize>,
    pub delta: Option<f64>,
    pub density: Option<String>,
    pub density_k: Option<usize>,
    pub mass_fraction: Option<f64>,
    pub bandwidth: Option<f64>,
    pub alpha: Option<f64>,
    pub b_iterations: Option<usize>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }
}

/// Resolves estimator flags plus config-file entries into tomato params.
fn resolve_params(opts: &EstimatorOpts, file: &ConfigFile) -> Result<TomatoParams> {
    let graph_name = opts
        .graph
        .clone()
        .or_else(|| file.graph.clone())
        .unwrap_or_else(|| "knn".into());
    let graph = match graph_name.as_str() {
        "knn" => GraphKind::Knn(opts.k.or(file.k).unwrap_or(10)),
        "rips" => {
            let delta = opts.delta.or(file.delta).ok_or_else(|| {
                Error::InvalidParameter("--delta is required with --graph rips".into())
            })?;
            GraphKind::Rips(delta)
        }
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown graph kind {other:?} (expected knn or rips)"
            )))
        }
    };
    let smoothing = match opts.mass_fraction.or(file.mass_fraction) {
        Some(m) => Smoothing::MassFraction(m),
        None => Smoothing::K(opts.density_k.or(file.density_k).unwrap_or(10)),
    };
    let density_name = opts
        .density
        .clone()
        .or_else(|| file.density.clone())
        .unwrap_or_else(|| "log-dtm".into());
    let density = match density_name.as_str() {
        "dtm" => DensityKind::Dtm(smoothing),
        "log-dtm" | "log_dtm" => DensityKind::LogDtm(smoothing),
        "kde" => DensityKind::Kde {
            bandwidth: opts.bandwidth.or(file.bandwidth).ok_or_else(|| {
                Error::InvalidParameter("--bandwidth is required with --density kde".into())
            })?,
        },
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown density kind {other:?} (expected dtm, log-dtm, or kde)"
            )))
        }
    };
    Ok(TomatoParams {
        graph,
        density,
        tau: f64::INFINITY,
    })
}

fn resolve_config(
    opts: &EstimatorOpts,
    boot: &BootstrapOpts,
    file: &ConfigFile,
    outlier_fraction: Option<f64>,
) -> Result<AutomatoConfig> {
    Ok(AutomatoConfig {
        tomato: resolve_params(opts, file)?,
        alpha: boot.alpha.or(file.alpha).unwrap_or(0.35),
        b_iterations: boot.b_iterations.or(file.b_iterations).unwrap_or(1000),
        seed: boot.seed.or(file.seed),
        outlier_fraction,
    })
}

fn parse_tau(s: &str) -> Result<f64> {
    if s == "inf" || s == "+inf" || s == "infinity" {
        return Ok(f64::INFINITY);
    }
    let tau: f64 = s
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("bad tau {s:?}")))?;
    if tau < 0.0 || tau.is_nan() {
        return Err(Error::InvalidParameter(format!(
            "tau must be nonnegative, got {tau}"
        )));
    }
    Ok(tau)
}

fn emit(out: &Option<PathBuf>, body: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, body).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        }),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn load_cloud(path: &Path, scale: bool) -> Result<PointCloud> {
    let cloud = load_points(path)?;
    Ok(if scale { min_max_scale(&cloud) } else { cloud })
}

fn labels_body(labels: &[i64]) -> String {
    labels.iter().map(|l| format!("{l}\n")).collect()
}

/// Runs a parsed command; errors bubble up for exit-code mapping.
pub fn run(cli: &Cli) -> Result<()> {
    let file = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    if let Some(threads) = cli.threads.or(file.threads) {
        // Ignore failure when a pool was already installed (tests).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }

    match &cli.command {
        Command::Cluster {
            points,
            tau,
            scale,
            outlier_fraction,
            out,
            model,
            estimators,
            bootstrap,
        } => {
            let cloud = load_cloud(points, *scale)?;
            match tau {
                Some(tau_str) => {
                    let mut params = resolve_params(estimators, &file)?;
                    params.tau = parse_tau(tau_str)?;
                    let (clustering, _) = tomato_cluster(&cloud, &params)?;
                    let labels: Vec<i64> =
                        clustering.labels.iter().map(|&l| l as i64).collect();
                    eprintln!(
                        "n={} clusters={} tau={}",
                        cloud.len(),
                        clustering.n_clusters,
                        g17(params.tau)
                    );
                    emit(out, &labels_body(&labels))?;
                }
                None => {
                    let config =
                        resolve_config(estimators, bootstrap, &file, *outlier_fraction)?;
                    let fitted = fit(&cloud, &config)?;
                    eprintln!(
                        "n={} clusters={} tau={} q_hat={} seed={}",
                        cloud.len(),
                        fitted.clustering.n_clusters,
                        g17(fitted.tau),
                        g17(fitted.q_hat),
                        config.seed.map_or("none".into(), |s| s.to_string()),
                    );
                    emit(out, &labels_body(&fitted.labels_i64()))?;
                    if let Some(model_path) = model {
                        let body = serde_json::to_string_pretty(&fitted.to_json())
                            .expect("model serializes");
                        std::fs::write(model_path, body).map_err(|e| Error::Io {
                            path: model_path.display().to_string(),
                            source: e,
                        })?;
                    }
                }
            }
            Ok(())
        }

        Command::UpdateAlpha {
            model,
            points,
            alpha,
            scale,
            out,
        } => {
            let text = std::fs::read_to_string(model).map_err(|e| Error::Io {
                path: model.display().to_string(),
                source: e,
            })?;
            let value: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| Error::Parse(format!("{}: {e}", model.display())))?;
            let stored = FittedModelJson::from_json(&value)?;
            let cloud = load_cloud(points, *scale)?;
            let fitted = stored.rehydrate(&cloud)?;
            let updated = update_alpha(&fitted, *alpha, &cloud)?;
            eprintln!(
                "n={} clusters={} tau={} q_hat={}",
                cloud.len(),
                updated.clustering.n_clusters,
                g17(updated.tau),
                g17(updated.q_hat),
            );
            emit(out, &labels_body(&updated.labels_i64()))
        }

        Command::Benchmark {
            data,
            runs,
            out,
            estimators,
            bootstrap,
        } => {
            let datasets: Vec<BenchmarkDataset> = data
                .iter()
                .map(|spec| parse_dataset_spec(spec))
                .collect::<Result<_>>()?;
            let config = resolve_config(estimators, bootstrap, &file, None)?;
            let base_seed = config.seed.unwrap_or(0);
            let report = run_benchmark(&datasets, &config, *runs, base_seed)?;
            print!("{}", report.to_table());
            if let Some(path) = out {
                std::fs::write(path, report.to_csv()).map_err(|e| Error::Io {
                    path: path.display().to_string(),
                    source: e,
                })?;
            }
            Ok(())
        }

        Command::Mapper {
            points,
            filter_dim,
            intervals,
            overlap,
            scale,
            out,
            dot,
            estimators,
            bootstrap,
        } => {
            let cloud = load_cloud(points, *scale)?;
            if *filter_dim >= cloud.dim() {
                return Err(Error::InvalidParameter(format!(
                    "filter dimension {filter_dim} out of range for d={}",
                    cloud.dim()
                )));
            }
            let filter: Vec<f64> = cloud.rows().map(|r| r[*filter_dim]).collect();
            let cover = build_cover(&filter, *intervals, *overlap)?;
            let config = resolve_config(estimators, bootstrap, &file, None)?;
            let clusterer = move |sub: &PointCloud, seed: u64| {
                let mut cfg = config;
                cfg.seed = Some(seed);
                Ok(fit(sub, &cfg)?.clustering.labels)
            };
            let seed = config.seed.unwrap_or(0);
            let graph = mapper_graph(&cloud, &filter, &cover, &clusterer, seed)?;
            eprintln!(
                "vertices={} edges={} components={} cycle_rank={}",
                graph.vertices.len(),
                graph.edges.len(),
                graph.n_components(),
                graph.cycle_rank()
            );
            let body = serde_json::to_string_pretty(&graph.to_json())
                .expect("graph serializes");
            emit(out, &format!("{body}\n"))?;
            if let Some(path) = dot {
                std::fs::write(path, graph.to_dot()).map_err(|e| Error::Io {
                    path: path.display().to_string(),
                    source: e,
                })?;
            }
            Ok(())
        }

        Command::Diagram {
            points,
            tau,
            scale,
            out,
            json,
            estimators,
            bootstrap,
        } => {
            let cloud = load_cloud(points, *scale)?;
            let (diagram, tau_line) = match tau {
                Some(tau_str) => {
                    let mut params = resolve_params(estimators, &file)?;
                    params.tau = f64::INFINITY;
                    let (_, dgm) = tomato_cluster(&cloud, &params)?;
                    (dgm, parse_tau(tau_str)?)
                }
                None => {
                    let config = resolve_config(estimators, bootstrap, &file, None)?;
                    let fitted = fit(&cloud, &config)?;
                    (fitted.reference_diagram, fitted.tau)
                }
            };
            let mut body = diagram.to_two_column();
            body.push_str(&format!("tau {}\n", g17(tau_line)));
            emit(out, &body)?;
            if let Some(path) = json {
                let body = serde_json::to_string_pretty(&diagram.to_json())
                    .expect("diagram serializes");
                std::fs::write(path, body).map_err(|e| Error::Io {
                    path: path.display().to_string(),
                    source: e,
                })?;
            }
            Ok(())
        }
    }
}

/// Parses "name=points:truth1[:truth2...]".
fn parse_dataset_spec(spec: &str) -> Result<BenchmarkDataset> {
    let (name, rest) = spec.split_once('=').ok_or_else(|| {
        Error::InvalidParameter(format!(
            "bad dataset spec {spec:?}, expected name=points:truth[,...]"
        ))
    })?;
    let mut parts = rest.split(':');
    let points_path = PathBuf::from(parts.next().unwrap_or_default());
    let truth_paths: Vec<PathBuf> = parts.map(PathBuf::from).collect();
    if truth_paths.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "dataset {name:?} has no ground-truth file"
        )));
    }
    Ok(BenchmarkDataset {
        name: name.to_string(),
        points_path,
        truth_paths,
    })
}

/// Maps errors onto the documented exit codes: 2 for unusable input, 1 for
/// runtime failures.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidParameter(_)
        | Error::Parse(_)
        | Error::LengthMismatch(_)
        | Error::Io { .. } => 2,
        _ => 1,
    }
}
