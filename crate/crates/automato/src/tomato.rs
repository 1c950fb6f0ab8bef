//! Mode-seeking clustering on a neighborhood graph: hill-climbing forest,
//! 0-dimensional superlevelset persistence via union-find, and merging of
//! low-prominence clusters.

use serde::{Deserialize, Serialize};

use crate::density::{dtm_density, kde_gaussian, log_dtm_density, DensityEstimate, DensityKind};
use crate::error::{Error, Result};
use crate::geometry::{
    build_knn_graph, build_rips_graph, GraphKind, NeighborhoodGraph, PointCloud,
};

/// One off-diagonal point of a persistence diagram. `death` is
/// `f64::NEG_INFINITY` for components that never die; `peak` is the vertex
/// at which the component is born.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagramPoint {
    pub birth: f64,
    pub death: f64,
    pub peak: usize,
}

impl DiagramPoint {
    /// Lifetime `birth - death`; `+inf` for never-dying components.
    pub fn prominence(&self) -> f64 {
        if self.death == f64::NEG_INFINITY {
            f64::INFINITY
        } else {
            self.birth - self.death
        }
    }

    pub fn is_infinite(&self) -> bool {
        self.death == f64::NEG_INFINITY
    }
}

/// Persistence diagram of the superlevelset filtration of a density over a
/// graph. One point per local peak; the diagonal is implicit.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PersistenceDiagram {
    pub points: Vec<DiagramPoint>,
}

impl PersistenceDiagram {
    pub fn finite_points(&self) -> impl Iterator<Item = &DiagramPoint> {
        self.points.iter().filter(|p| !p.is_infinite())
    }

    pub fn infinite_points(&self) -> impl Iterator<Item = &DiagramPoint> {
        self.points.iter().filter(|p| p.is_infinite())
    }

    /// Number of points with prominence at least `tau` (infinite points
    /// always count).
    pub fn count_prominent(&self, tau: f64) -> usize {
        self.points
            .iter()
            .filter(|p| p.is_infinite() || p.prominence() >= tau)
            .count()
    }

    /// JSON export with `-inf` deaths encoded as the string `"-inf"`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.points
                .iter()
                .map(|p| {
                    serde_json::json!({
                        "birth": p.birth,
                        "death": if p.is_infinite() {
                            serde_json::Value::String("-inf".into())
                        } else {
                            serde_json::json!(p.death)
                        },
                        "peak": p.peak,
                    })
                })
                .collect(),
        )
    }

    /// Two-column plain-text form (birth death), one point per line.
    pub fn to_two_column(&self) -> String {
        let mut out = String::new();
        for p in &self.points {
            if p.is_infinite() {
                out.push_str(&format!("{:.17e} -inf\n", p.birth));
            } else {
                out.push_str(&format!("{:.17e} {:.17e}\n", p.birth, p.death));
            }
        }
        out
    }
}

/// Final cluster assignment: labels in `[0, n_clusters)` plus the density
/// peak that represents each cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    pub labels: Vec<usize>,
    pub n_clusters: usize,
    pub peak_of_cluster: Vec<usize>,
}

/// Inputs of a single clustering run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TomatoParams {
    pub graph: GraphKind,
    pub density: DensityKind,
    pub tau: f64,
}

impl Default for TomatoParams {
    fn default() -> Self {
        use crate::density::Smoothing;
        Self {
            graph: GraphKind::Knn(10),
            density: DensityKind::LogDtm(Smoothing::K(10)),
            tau: f64::INFINITY,
        }
    }
}

/// Vertex indices ordered by decreasing density, ties broken by ascending
/// index. Earlier vertices are "older" in the superlevelset filtration.
fn processing_order(density: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..density.len()).collect();
    order.sort_unstable_by(|&a, &b| {
        density[b]
            .partial_cmp(&density[a])
            .expect("finite densities")
            .then(a.cmp(&b))
    });
    order
}

/// True iff `u` comes before `v` in the processing order.
fn precedes(density: &[f64], u: usize, v: usize) -> bool {
    density[u] > density[v] || (density[u] == density[v] && u < v)
}

/// Gradient forest of the density over the graph: each vertex points to the
/// preceding neighbor of highest density, or to itself if it is a peak.
///
/// Returns `(parent, peaks)` where `parent[v] = None` marks a peak.
pub fn hill_climb_forest(
    graph: &NeighborhoodGraph,
    density: &DensityEstimate,
) -> Result<(Vec<Option<usize>>, Vec<usize>)> {
    let n = graph.n_vertices();
    let dens = &density.values;
    if dens.len() != n {
        return Err(Error::LengthMismatch(format!(
            "density has {} values for a graph on {n} vertices",
            dens.len()
        )));
    }
    let mut parent: Vec<Option<usize>> = Vec::with_capacity(n);
    let mut peaks = Vec::new();
    for v in 0..n {
        let best = graph
            .neighbors(v)
            .iter()
            .copied()
            .filter(|&u| precedes(dens, u, v))
            .max_by(|&a, &b| {
                dens[a]
                    .partial_cmp(&dens[b])
                    .expect("finite densities")
                    .then(b.cmp(&a))
            });
        if best.is_none() {
            peaks.push(v);
        }
        parent.push(best);
    }
    Ok((parent, peaks))
}

struct UnionFind {
    parent: Vec<usize>,
    /// Peak vertex of the component rooted here; valid at roots only.
    peak: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            peak: (0..n).collect(),
        }
    }

    fn find(&mut self, v: usize) -> usize {
        let mut root = v;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = v;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }
}

struct PersistenceOutcome {
    diagram: PersistenceDiagram,
    /// For each dying peak vertex, the peak of the component that absorbed it.
    merge_target: Vec<Option<usize>>,
}

/// Core of the 0-dimensional persistence computation: sweep vertices in
/// decreasing density, birth a component at each local peak, and apply the
/// elder rule at merges (the component with the higher-born peak survives,
/// ties to the smaller peak index).
fn persistence_sweep(
    graph: &NeighborhoodGraph,
    density: &DensityEstimate,
) -> Result<PersistenceOutcome> {
    let n = graph.n_vertices();
    let dens = &density.values;
    if dens.len() != n {
        return Err(Error::LengthMismatch(format!(
            "density has {} values for a graph on {n} vertices",
            dens.len()
        )));
    }
    let mut uf = UnionFind::new(n);
    let mut processed = vec![false; n];
    let mut points = Vec::new();
    let mut merge_target = vec![None; n];

    for &v in &processing_order(dens) {
        let mut roots: Vec<usize> = graph
            .neighbors(v)
            .iter()
            .copied()
            .filter(|&u| processed[u])
            .map(|u| uf.find(u))
            .collect();
        roots.sort_unstable();
        roots.dedup();

        if roots.is_empty() {
            // Local peak: a new component is born at this density.
            processed[v] = true;
            continue;
        }

        // Elder rule: survivor has the highest-born peak, ties to the
        // smaller peak index.
        let survivor = *roots
            .iter()
            .max_by(|&&a, &&b| {
                let (pa, pb) = (uf.peak[a], uf.peak[b]);
                dens[pa]
                    .partial_cmp(&dens[pb])
                    .expect("finite densities")
                    .then(pb.cmp(&pa))
            })
            .expect("non-empty roots");
        let surviving_peak = uf.peak[survivor];
        for &r in &roots {
            if r != survivor {
                let dying_peak = uf.peak[r];
                points.push(DiagramPoint {
                    birth: dens[dying_peak],
                    death: dens[v],
                    peak: dying_peak,
                });
                merge_target[dying_peak] = Some(surviving_peak);
                uf.parent[r] = survivor;
            }
        }
        uf.parent[v] = survivor;
        uf.peak[survivor] = surviving_peak;
        processed[v] = true;
    }

    // Components that never merged persist to -inf.
    for v in 0..n {
        if uf.find(v) == v {
            points.push(DiagramPoint {
                birth: dens[uf.peak[v]],
                death: f64::NEG_INFINITY,
                peak: uf.peak[v],
            });
        }
    }
    points.sort_unstable_by(|a, b| {
        b.birth
            .partial_cmp(&a.birth)
            .expect("finite births")
            .then(b.death.partial_cmp(&a.death).expect("comparable deaths"))
            .then(a.peak.cmp(&b.peak))
    });
    Ok(PersistenceOutcome {
        diagram: PersistenceDiagram { points },
        merge_target,
    })
}

/// Persistence diagram of the superlevelset filtration of the density over
/// the graph. One point per local peak; one `-inf` death per connected
/// component of the graph.
pub fn compute_persistence(
    graph: &NeighborhoodGraph,
    density: &DensityEstimate,
) -> Result<PersistenceDiagram> {
    Ok(persistence_sweep(graph, density)?.diagram)
}

/// Clusters a graph-plus-density pair at prominence threshold `tau`.
///
/// The candidate clustering is the hill-climbing forest; every cluster of
/// prominence below `tau` is absorbed wholesale into the cluster it merges
/// with in the filtration. The returned diagram does not depend on `tau`.
pub fn cluster_graph(
    graph: &NeighborhoodGraph,
    density: &DensityEstimate,
    tau: f64,
) -> Result<(Clustering, PersistenceDiagram)> {
    let n = graph.n_vertices();
    let (parent, _) = hill_climb_forest(graph, density)?;
    let outcome = persistence_sweep(graph, density)?;
    let diagram = outcome.diagram;

    // prominence lookup per peak vertex
    let mut prominence = vec![f64::NAN; n];
    for p in &diagram.points {
        prominence[p.peak] = p.prominence();
    }

    // Resolve each peak to its surviving ancestor under the threshold.
    let mut resolved: Vec<Option<usize>> = vec![None; n];
    fn resolve(
        peak: usize,
        tau: f64,
        prominence: &[f64],
        merge_target: &[Option<usize>],
        resolved: &mut Vec<Option<usize>>,
    ) -> usize {
        if let Some(r) = resolved[peak] {
            return r;
        }
        let r = if prominence[peak] >= tau || merge_target[peak].is_none() {
            peak
        } else {
            let target = merge_target[peak].expect("finite-prominence peak has a merge target");
            resolve(target, tau, prominence, merge_target, resolved)
        };
        resolved[peak] = Some(r);
        r
    }

    // Label vertices by the resolved peak of their gradient tree.
    let mut tree_peak = vec![usize::MAX; n];
    fn find_tree_peak(v: usize, parent: &[Option<usize>], tree_peak: &mut [usize]) -> usize {
        if tree_peak[v] != usize::MAX {
            return tree_peak[v];
        }
        let p = match parent[v] {
            None => v,
            Some(u) => find_tree_peak(u, parent, tree_peak),
        };
        tree_peak[v] = p;
        p
    }

    let final_peak: Vec<usize> = (0..n)
        .map(|v| {
            let peak = find_tree_peak(v, &parent, &mut tree_peak);
            resolve(peak, tau, &prominence, &outcome.merge_target, &mut resolved)
        })
        .collect();
    let mut surviving = final_peak.clone();
    surviving.sort_unstable();
    surviving.dedup();
    let labels: Vec<usize> = final_peak
        .iter()
        .map(|p| {
            surviving
                .binary_search(p)
                .expect("resolved peak is a surviving peak")
        })
        .collect();

    Ok((
        Clustering {
            labels,
            n_clusters: surviving.len(),
            peak_of_cluster: surviving,
        },
        diagram,
    ))
}

/// Builds the neighborhood graph and density from `params`, then clusters.
pub fn tomato_cluster(
    cloud: &PointCloud,
    params: &TomatoParams,
) -> Result<(Clustering, PersistenceDiagram)> {
    let (graph, density) = prepare(cloud, params)?;
    cluster_graph(&graph, &density, params.tau)
}

/// Graph and density construction shared by clustering and the bootstrap.
pub fn prepare(
    cloud: &PointCloud,
    params: &TomatoParams,
) -> Result<(NeighborhoodGraph, DensityEstimate)> {
    let graph = match params.graph {
        GraphKind::Knn(k) => build_knn_graph(cloud, k)?,
        GraphKind::Rips(delta) => build_rips_graph(cloud, delta)?,
    };
    let density = match params.density {
        DensityKind::Dtm(s) => dtm_density(cloud, s)?,
        DensityKind::LogDtm(s) => log_dtm_density(cloud, s)?,
        DensityKind::Kde { bandwidth } => kde_gaussian(cloud, bandwidth)?,
    };
    Ok((graph, density))
}
