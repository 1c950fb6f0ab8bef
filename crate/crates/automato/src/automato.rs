//! Automatic prominence-threshold selection: a bottleneck bootstrap over
//! the reference persistence diagram, quantile extraction, and the final
//! clustering at tau = 2 * q_hat / sqrt(n).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::{DensityKind, Smoothing};
use crate::diagram::bottleneck_distance;
use crate::error::{Error, Result};
use crate::geometry::{directed_knn, GraphKind, NeighborhoodGraph, PointCloud};
use crate::tomato::{cluster_graph, prepare, Clustering, PersistenceDiagram, TomatoParams};

/// Retries per bootstrap iteration before the fit gives up on a
/// degenerate-resample streak.
const MAX_RESAMPLE_ATTEMPTS: usize = 10;

/// Fit configuration. `tomato.tau` is ignored on input; the bootstrap
/// chooses the threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AutomatoConfig {
    pub tomato: TomatoParams,
    pub alpha: f64,
    pub b_iterations: usize,
    pub seed: Option<u64>,
    /// Experimental reciprocal-neighbor outlier rule; off by default.
    pub outlier_fraction: Option<f64>,
}

impl Default for AutomatoConfig {
    fn default() -> Self {
        Self {
            tomato: TomatoParams::default(),
            alpha: 0.35,
            b_iterations: 1000,
            seed: None,
            outlier_fraction: None,
        }
    }
}

impl AutomatoConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in (0,1), got {}",
                self.alpha
            )));
        }
        if self.b_iterations == 0 {
            return Err(Error::InvalidParameter(
                "b_iterations must be at least 1".into(),
            ));
        }
        if let Some(f) = self.outlier_fraction {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "outlier fraction must lie in (0,1], got {f}"
                )));
            }
        }
        Ok(())
    }
}

/// A fitted model: reference diagram, sorted bootstrap distances, the
/// selected threshold, and the final clustering.
#[derive(Debug, Clone)]
pub struct FittedAutomato {
    pub reference_diagram: PersistenceDiagram,
    /// sqrt(n)-scaled bottleneck distances, nondecreasing, length B.
    pub sorted_distances: Vec<f64>,
    pub q_hat: f64,
    pub tau: f64,
    pub clustering: Clustering,
    pub outliers: Option<Vec<bool>>,
    pub config: AutomatoConfig,
    pub n_points: usize,
}

impl FittedAutomato {
    /// Labels with flagged outliers replaced by -1.
    pub fn labels_i64(&self) -> Vec<i64> {
        match &self.outliers {
            None => self.clustering.labels.iter().map(|&l| l as i64).collect(),
            Some(mask) => self
                .clustering
                .labels
                .iter()
                .zip(mask)
                .map(|(&l, &out)| if out { -1 } else { l as i64 })
                .collect(),
        }
    }
}

/// Quantile index of Algorithm 1: the (1-indexed) k-th order statistic with
/// k = ceil((1 - alpha) * B).
pub fn quantile_index(alpha: f64, b: usize) -> usize {
    let k = ((1.0 - alpha) * b as f64).ceil() as usize;
    k.clamp(1, b)
}

fn iteration_rng(seed: u64, iteration: usize, attempt: usize) -> ChaCha8Rng {
    let mut bytes = [0u8; 32];
    bytes[..8].copy_from_slice(&seed.to_le_bytes());
    bytes[8..16].copy_from_slice(&(iteration as u64).to_le_bytes());
    bytes[16..24].copy_from_slice(&(attempt as u64).to_le_bytes());
    ChaCha8Rng::from_seed(bytes)
}

/// One bootstrap iteration: resample n indices with replacement, run the
/// full estimator stack on the resample, and measure the finite-only
/// bottleneck distance to the reference diagram. Degenerate resamples are
/// retried on fresh substreams.
fn bootstrap_distance(
    cloud: &PointCloud,
    params: &TomatoParams,
    reference: &PersistenceDiagram,
    seed: u64,
    iteration: usize,
) -> Result<f64> {
    let n = cloud.len();
    let sqrt_n = (n as f64).sqrt();
    let mut last_err = String::new();
    for attempt in 0..MAX_RESAMPLE_ATTEMPTS {
        let mut rng = iteration_rng(seed, iteration, attempt);
        let indices: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
        let resample = cloud.select(&indices)?;
        match prepare(&resample, params) {
            Ok((graph, density)) => {
                let dgm = crate::tomato::compute_persistence(&graph, &density)?;
                return Ok(sqrt_n * bottleneck_distance(&dgm, reference, true).distance);
            }
            Err(Error::DegenerateDensity(msg)) => {
                last_err = msg;
                continue;
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::BootstrapRetriesExhausted {
        iteration,
        attempts: MAX_RESAMPLE_ATTEMPTS,
        last: last_err,
    })
}

/// Fits the model: reference diagram at tau = +inf, B bootstrap distances,
/// quantile extraction, and the final clustering at the derived threshold.
/// Seeded runs are bit-reproducible and independent of thread count.
pub fn fit(cloud: &PointCloud, config: &AutomatoConfig) -> Result<FittedAutomato> {
    config.validate()?;
    let n = cloud.len();
    if n < 2 {
        return Err(Error::InvalidParameter(
            "fit requires at least 2 points".into(),
        ));
    }
    let params = config.tomato;
    let (graph, density) = prepare(cloud, &params)?;
    let reference = crate::tomato::compute_persistence(&graph, &density)?;

    let seed = config.seed.unwrap_or(0);
    let mut distances: Vec<f64> = (0..config.b_iterations)
        .into_par_iter()
        .map(|i| bootstrap_distance(cloud, &params, &reference, seed, i))
        .collect::<Result<Vec<f64>>>()?;
    distances.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite distances"));

    let k = quantile_index(config.alpha, config.b_iterations);
    let q_hat = distances[k - 1];
    let tau = 2.0 * q_hat / (n as f64).sqrt();
    let (clustering, _) = cluster_graph(&graph, &density, tau)?;

    let outliers = match config.outlier_fraction {
        Some(fraction) => {
            let graph_k = match params.graph {
                GraphKind::Knn(k) => k,
                GraphKind::Rips(_) => {
                    return Err(Error::InvalidParameter(
                        "outlier flagging requires a k-NN graph".into(),
                    ))
                }
            };
            Some(flag_outliers_knn(cloud, graph_k, fraction)?)
        }
        None => None,
    };

    Ok(FittedAutomato {
        reference_diagram: reference,
        sorted_distances: distances,
        q_hat,
        tau,
        clustering,
        outliers,
        config: *config,
        n_points: n,
    })
}

/// Re-derives the threshold and clustering at a new confidence level from
/// the stored bootstrap distances; no resampling happens. Equivalent to a
/// fresh `fit` at `alpha_new` with the same seed.
pub fn update_alpha(
    fitted: &FittedAutomato,
    alpha_new: f64,
    cloud: &PointCloud,
) -> Result<FittedAutomato> {
    if !(alpha_new > 0.0 && alpha_new < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0,1), got {alpha_new}"
        )));
    }
    let b = fitted.sorted_distances.len();
    let k = quantile_index(alpha_new, b);
    let q_hat = fitted.sorted_distances[k - 1];
    let tau = 2.0 * q_hat / (fitted.n_points as f64).sqrt();
    let (graph, density) = prepare(cloud, &fitted.config.tomato)?;
    let (clustering, _) = cluster_graph(&graph, &density, tau)?;
    let mut config = fitted.config;
    config.alpha = alpha_new;
    Ok(FittedAutomato {
        reference_diagram: fitted.reference_diagram.clone(),
        sorted_distances: fitted.sorted_distances.clone(),
        q_hat,
        tau,
        clustering,
        outliers: fitted.outliers.clone(),
        config,
        n_points: fitted.n_points,
    })
}

/// Experimental outlier rule: a point is flagged iff the share of its k
/// nearest neighbors that list it back among their own k nearest is
/// strictly below `fraction`.
pub fn flag_outliers_knn(cloud: &PointCloud, k: usize, fraction: f64) -> Result<Vec<bool>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "outlier fraction must lie in (0,1], got {fraction}"
        )));
    }
    let neighbors = directed_knn(cloud, k)?;
    let flags = (0..cloud.len())
        .map(|v| {
            let reciprocating = neighbors[v]
                .iter()
                .filter(|&&u| neighbors[u].contains(&v))
                .count();
            (reciprocating as f64 / k as f64) < fraction
        })
        .collect();
    Ok(flags)
}

/// Spec'd surface: validates that the graph is k-NN and applies the rule.
pub fn flag_outliers(
    cloud: &PointCloud,
    graph: &NeighborhoodGraph,
    fraction: f64,
) -> Result<Vec<bool>> {
    match graph.kind() {
        GraphKind::Knn(k) => flag_outliers_knn(cloud, k, fraction),
        GraphKind::Rips(_) => Err(Error::InvalidParameter(
            "outlier flagging requires a k-NN graph".into(),
        )),
    }
}

// --- model serialization -------------------------------------------------

#[derive(Serialize, Deserialize)]
struct DiagramPointSer {
    birth: f64,
    death: serde_json::Value,
    peak: usize,
}

#[derive(Serialize, Deserialize)]
struct GraphSer {
    kind: String,
    param: f64,
}

#[derive(Serialize, Deserialize)]
struct DensitySer {
    kind: String,
    param: f64,
    param_is_fraction: bool,
}

/// JSON image of a fitted model, sufficient to re-derive clusterings at new
/// alpha values without refitting.
#[derive(Serialize, Deserialize)]
pub struct FittedModelJson {
    pub n_points: usize,
    pub alpha: f64,
    pub b_iterations: usize,
    pub seed: Option<u64>,
    pub outlier_fraction: Option<f64>,
    graph: GraphSer,
    density: DensitySer,
    diagram: Vec<DiagramPointSer>,
    pub sorted_distances: Vec<f64>,
    pub q_hat: f64,
    pub tau: f64,
    pub labels: Vec<i64>,
}

impl FittedAutomato {
    pub fn to_json(&self) -> serde_json::Value {
        let graph = match self.config.tomato.graph {
            GraphKind::Knn(k) => GraphSer {
                kind: "knn".into(),
                param: k as f64,
            },
            GraphKind::Rips(d) => GraphSer {
                kind: "rips".into(),
                param: d,
            },
        };
        let density = match self.config.tomato.density {
            DensityKind::Dtm(s) => density_ser("dtm", s),
            DensityKind::LogDtm(s) => density_ser("log_dtm", s),
            DensityKind::Kde { bandwidth } => DensitySer {
                kind: "kde".into(),
                param: bandwidth,
                param_is_fraction: false,
            },
        };
        let model = FittedModelJson {
            n_points: self.n_points,
            alpha: self.config.alpha,
            b_iterations: self.config.b_iterations,
            seed: self.config.seed,
            outlier_fraction: self.config.outlier_fraction,
            graph,
            density,
            diagram: self
                .reference_diagram
                .points
                .iter()
                .map(|p| DiagramPointSer {
                    birth: p.birth,
                    death: if p.is_infinite() {
                        serde_json::Value::String("-inf".into())
                    } else {
                        serde_json::json!(p.death)
                    },
                    peak: p.peak,
                })
                .collect(),
            sorted_distances: self.sorted_distances.clone(),
            q_hat: self.q_hat,
            tau: self.tau,
            labels: self.labels_i64(),
        };
        serde_json::to_value(model).expect("model serializes")
    }
}

fn density_ser(kind: &str, s: Smoothing) -> DensitySer {
    match s {
        Smoothing::K(k) => DensitySer {
            kind: kind.into(),
            param: k as f64,
            param_is_fraction: false,
        },
        Smoothing::MassFraction(m) => DensitySer {
            kind: kind.into(),
            param: m,
            param_is_fraction: true,
        },
    }
}

impl FittedModelJson {
    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        serde_json::from_value(value.clone())
            .map_err(|e| Error::Parse(format!("bad model JSON: {e}")))
    }

    pub fn config(&self) -> Result<AutomatoConfig> {
        let graph = match self.graph.kind.as_str() {
            "knn" => GraphKind::Knn(self.graph.param as usize),
            "rips" => GraphKind::Rips(self.graph.param),
            other => return Err(Error::Parse(format!("unknown graph kind {other}"))),
        };
        let smoothing = |s: &DensitySer| {
            if s.param_is_fraction {
                Smoothing::MassFraction(s.param)
            } else {
                Smoothing::K(s.param as usize)
            }
        };
        let density = match self.density.kind.as_str() {
            "dtm" => DensityKind::Dtm(smoothing(&self.density)),
            "log_dtm" => DensityKind::LogDtm(smoothing(&self.density)),
            "kde" => DensityKind::Kde {
                bandwidth: self.density.param,
            },
            other => return Err(Error::Parse(format!("unknown density kind {other}"))),
        };
        Ok(AutomatoConfig {
            tomato: TomatoParams {
                graph,
                density,
                tau: f64::INFINITY,
            },
            alpha: self.alpha,
            b_iterations: self.b_iterations,
            seed: self.seed,
            outlier_fraction: self.outlier_fraction,
        })
    }

    /// Rebuilds a fitted handle from the serialized distances; the
    /// clustering is re-derived from the stored threshold and the cloud.
    pub fn rehydrate(&self, cloud: &PointCloud) -> Result<FittedAutomato> {
        let config = self.config()?;
        let (graph, density) = prepare(cloud, &config.tomato)?;
        let reference = crate::tomato::compute_persistence(&graph, &density)?;
        let (clustering, _) = cluster_graph(&graph, &density, self.tau)?;
        Ok(FittedAutomato {
            reference_diagram: reference,
            sorted_distances: self.sorted_distances.clone(),
            q_hat: self.q_hat,
            tau: self.tau,
            clustering,
            outliers: None,
            config,
            n_points: self.n_points,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_index_matches_worked_example() {
        // B=10, alpha=0.35 -> k = ceil(6.5) = 7
        assert_eq!(quantile_index(0.35, 10), 7);
        assert_eq!(quantile_index(0.35, 1000), 650);
    }

    #[test]
    fn quantile_index_clamps() {
        assert_eq!(quantile_index(0.999, 10), 1);
        assert_eq!(quantile_index(1e-12, 10), 10);
    }

    #[test]
    fn outlier_mutual_pair_not_flagged() {
        // A tight blob plus a far-away mutual pair; pair members reciprocate
        // half of their k=2 neighborhoods, which meets the 0.5 threshold.
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for i in 0..8 {
            rows.push(vec![0.01 * i as f64, 0.0]);
        }
        rows.push(vec![100.0, 0.0]);
        rows.push(vec![100.2, 0.0]);
        let cloud = PointCloud::from_rows(&rows).unwrap();
        let flags = flag_outliers_knn(&cloud, 2, 0.5).unwrap();
        assert!(!flags[8]);
        assert!(!flags[9]);
    }

    #[test]
    fn outlier_lone_point_flagged() {
        let mut rows: Vec<Vec<f64>> = (0..20).map(|i| vec![0.01 * i as f64, 0.0]).collect();
        rows.push(vec![100.0, 100.0]);
        let cloud = PointCloud::from_rows(&rows).unwrap();
        let flags = flag_outliers_knn(&cloud, 5, 0.5).unwrap();
        assert!(flags[20]);
        // The last blob point loses reciprocity to index tie-breaking, so
        // only the interior of the line is asserted.
        assert!(flags[..19].iter().all(|&f| !f));
    }

    #[test]
    fn outlier_threshold_near_zero_flags_nothing() {
        let rows: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64]).collect();
        let cloud = PointCloud::from_rows(&rows).unwrap();
        let flags = flag_outliers_knn(&cloud, 2, 1e-12).unwrap();
        assert!(flags.iter().all(|&f| !f));
    }

    #[test]
    fn flag_outliers_rejects_rips_graph() {
        let cloud = PointCloud::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
        let graph = crate::geometry::build_rips_graph(&cloud, 2.0).unwrap();
        assert!(flag_outliers(&cloud, &graph, 0.5).is_err());
    }

    #[test]
    fn config_validation() {
        let mut cfg = AutomatoConfig {
            alpha: 0.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        cfg.alpha = 0.35;
        cfg.b_iterations = 0;
        assert!(cfg.validate().is_err());
    }
}
