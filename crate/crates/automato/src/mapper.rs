//! Mapper graphs: interval covers over a real-valued filter, per-preimage
//! clustering, and the nerve of the resulting vertex sets.

use crate::error::{Error, Result};
use crate::geometry::PointCloud;

/// Uniform-length closed intervals covering the filter range, with a fixed
/// fractional overlap between consecutive intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalCover {
    pub intervals: Vec<(f64, f64)>,
    pub overlap_fraction: f64,
}

impl IntervalCover {
    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Indices whose filter value falls inside interval `i` (closed ends).
    pub fn preimage(&self, i: usize, filter_values: &[f64]) -> Vec<usize> {
        let (lo, hi) = self.intervals[i];
        filter_values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v >= lo && v <= hi)
            .map(|(j, _)| j)
            .collect()
    }
}

/// Cover of `[min, max]` of the filter by `n_intervals` uniform intervals
/// with the given fractional overlap. A constant filter collapses to a
/// single interval.
pub fn build_cover(
    filter_values: &[f64],
    n_intervals: usize,
    overlap_fraction: f64,
) -> Result<IntervalCover> {
    if filter_values.is_empty() {
        return Err(Error::InvalidParameter("empty filter".into()));
    }
    if n_intervals == 0 {
        return Err(Error::InvalidParameter(
            "cover needs at least one interval".into(),
        ));
    }
    if !(0.0..1.0).contains(&overlap_fraction) {
        return Err(Error::InvalidParameter(format!(
            "overlap fraction must lie in [0,1), got {overlap_fraction}"
        )));
    }
    if filter_values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("non-finite filter value".into()));
    }
    let lo = filter_values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = filter_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = hi - lo;
    if range == 0.0 || n_intervals == 1 {
        return Ok(IntervalCover {
            intervals: vec![(lo, hi)],
            overlap_fraction,
        });
    }
    // length solves L * (1 + (N-1)(1-g)) = range
    let n = n_intervals as f64;
    let step_frac = 1.0 - overlap_fraction;
    let length = range / (1.0 + (n - 1.0) * step_frac);
    let intervals = (0..n_intervals)
        .map(|i| {
            let start = lo + i as f64 * length * step_frac;
            (start, start + length)
        })
        .collect();
    Ok(IntervalCover {
        intervals,
        overlap_fraction,
    })
}

/// One Mapper vertex: a cluster found inside one cover interval.
#[derive(Debug, Clone, PartialEq)]
pub struct MapperVertex {
    pub interval: usize,
    pub cluster: usize,
    /// Indices into the original cloud.
    pub members: Vec<usize>,
}

/// Nerve of the clustered preimages: vertices are per-interval clusters,
/// edges connect vertices sharing at least one point.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MapperGraph {
    pub vertices: Vec<MapperVertex>,
    pub edges: Vec<(usize, usize)>,
}

impl MapperGraph {
    pub fn n_components(&self) -> usize {
        let n = self.vertices.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut Vec<usize>, v: usize) -> usize {
            if parent[v] != v {
                let root = find(parent, parent[v]);
                parent[v] = root;
            }
            parent[v]
        }
        for &(u, v) in &self.edges {
            let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
            if ru != rv {
                parent[ru] = rv;
            }
        }
        (0..n).filter(|&v| find(&mut parent, v) == v).count()
    }

    /// First Betti number of the graph: E - V + #components.
    pub fn cycle_rank(&self) -> usize {
        self.edges.len() + self.n_components() - self.vertices.len()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "vertices": self.vertices.iter().enumerate().map(|(id, v)| {
                serde_json::json!({
                    "id": id,
                    "interval": v.interval,
                    "size": v.members.len(),
                    "members": v.members,
                })
            }).collect::<Vec<_>>(),
            "edges": self.edges.iter().map(|&(a, b)| vec![a, b]).collect::<Vec<_>>(),
        })
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph mapper {\n");
        for (id, v) in self.vertices.iter().enumerate() {
            out.push_str(&format!(
                "  v{id} [label=\"i{} c{} ({})\"];\n",
                v.interval,
                v.cluster,
                v.members.len()
            ));
        }
        for &(a, b) in &self.edges {
            out.push_str(&format!("  v{a} -- v{b};\n"));
        }
        out.push_str("}\n");
        out
    }
}

/// Clustering callback used on each preimage sub-cloud. The seed is derived
/// from the outer seed, offset by interval index, so runs are reproducible.
pub trait Clusterer {
    fn cluster(&self, cloud: &PointCloud, seed: u64) -> Result<Vec<usize>>;
}

impl<F> Clusterer for F
where
    F: Fn(&PointCloud, u64) -> Result<Vec<usize>>,
{
    fn cluster(&self, cloud: &PointCloud, seed: u64) -> Result<Vec<usize>> {
        self(cloud, seed)
    }
}

/// Builds the Mapper graph: clusters each nonempty preimage, collects one
/// vertex per cluster, and connects vertices from different intervals that
/// share a point.
pub fn mapper_graph(
    cloud: &PointCloud,
    filter_values: &[f64],
    cover: &IntervalCover,
    clusterer: &dyn Clusterer,
    seed: u64,
) -> Result<MapperGraph> {
    if filter_values.len() != cloud.len() {
        return Err(Error::LengthMismatch(format!(
            "{} filter values for {} points",
            filter_values.len(),
            cloud.len()
        )));
    }
    let mut vertices: Vec<MapperVertex> = Vec::new();
    for i in 0..cover.len() {
        let members = cover.preimage(i, filter_values);
        if members.is_empty() {
            continue;
        }
        let sub = cloud.select(&members)?;
        let labels = clusterer
            .cluster(&sub, seed.wrapping_add(i as u64))
            .map_err(|e| Error::MapperClusterer {
                interval: i,
                source: Box::new(e),
            })?;
        if labels.len() != members.len() {
            return Err(Error::LengthMismatch(format!(
                "clusterer returned {} labels for {} points in interval {i}",
                labels.len(),
                members.len()
            )));
        }
        let n_clusters = labels.iter().max().map_or(0, |m| m + 1);
        for c in 0..n_clusters {
            let cluster_members: Vec<usize> = members
                .iter()
                .zip(&labels)
                .filter(|(_, &l)| l == c)
                .map(|(&m, _)| m)
                .collect();
            if !cluster_members.is_empty() {
                vertices.push(MapperVertex {
                    interval: i,
                    cluster: c,
                    members: cluster_members,
                });
            }
        }
    }

    let mut edges = Vec::new();
    for a in 0..vertices.len() {
        for b in (a + 1)..vertices.len() {
            if vertices[a].interval == vertices[b].interval {
                continue;
            }
            let shares = vertices[a]
                .members
                .iter()
                .any(|m| vertices[b].members.binary_search(m).is_ok());
            if shares {
                edges.push((a, b));
            }
        }
    }
    Ok(MapperGraph { vertices, edges })
}
