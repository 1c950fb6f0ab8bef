//! Point-cloud container, min-max preprocessing, and neighborhood graphs.

use crate::error::{Error, Result};

/// A dense set of `n` points in `d`-dimensional Euclidean space.
///
/// Coordinates are stored row-major; every coordinate must be finite.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    data: Vec<f64>,
    n: usize,
    d: usize,
}

impl PointCloud {
    /// Builds a cloud from row-major data. Rejects empty clouds and
    /// non-finite coordinates.
    pub fn new(data: Vec<f64>, n: usize, d: usize) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::InvalidParameter(format!(
                "point cloud must have n >= 1 and d >= 1, got n={n}, d={d}"
            )));
        }
        if data.len() != n * d {
            return Err(Error::LengthMismatch(format!(
                "expected {} coordinates for n={n}, d={d}, got {}",
                n * d,
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite coordinate {bad} in point cloud"
            )));
        }
        Ok(Self { data, n, d })
    }

    /// Builds a cloud from a list of equal-length rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidParameter("empty point cloud".into()));
        }
        let d = rows[0].len();
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != d) {
            return Err(Error::LengthMismatch(format!(
                "row {i} has {} columns, expected {d}",
                r.len()
            )));
        }
        let data: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::new(data, rows.len(), d)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false // n >= 1 by construction
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.d)
    }

    pub fn dist_sq(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.point(i), self.point(j));
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist_sq(i, j).sqrt()
    }

    /// Selects a subset of rows (indices may repeat), e.g. a bootstrap
    /// resample.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(indices.len() * self.d);
        for &i in indices {
            data.extend_from_slice(self.point(i));
        }
        Self::new(data, indices.len(), self.d)
    }
}

/// How a neighborhood graph was constructed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GraphKind {
    /// Symmetrized k-nearest-neighbor graph.
    Knn(usize),
    /// delta-Rips graph: edge iff Euclidean distance <= delta.
    Rips(f64),
}

/// Undirected graph on point indices; adjacency lists are sorted and
/// free of self-loops and duplicates.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodGraph {
    n_vertices: usize,
    adjacency: Vec<Vec<usize>>,
    kind: GraphKind,
}

impl NeighborhoodGraph {
    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (u, adj) in self.adjacency.iter().enumerate() {
            for &v in adj {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Test/internal constructor from raw adjacency; symmetrizes and sorts.
    pub fn from_adjacency(adjacency: Vec<Vec<usize>>, kind: GraphKind) -> Self {
        let n = adjacency.len();
        let mut sym = vec![Vec::new(); n];
        for (u, adj) in adjacency.iter().enumerate() {
            for &v in adj {
                if v != u {
                    sym[u].push(v);
                    sym[v].push(u);
                }
            }
        }
        for list in &mut sym {
            list.sort_unstable();
            list.dedup();
        }
        Self {
            n_vertices: n,
            adjacency: sym,
            kind,
        }
    }
}

/// Maps every coordinate column affinely onto [0, 1]. A constant column
/// maps to all zeros.
pub fn min_max_scale(cloud: &PointCloud) -> PointCloud {
    let (n, d) = (cloud.len(), cloud.dim());
    let mut mins = vec![f64::INFINITY; d];
    let mut maxs = vec![f64::NEG_INFINITY; d];
    for row in cloud.rows() {
        for (c, &x) in row.iter().enumerate() {
            mins[c] = mins[c].min(x);
            maxs[c] = maxs[c].max(x);
        }
    }
    let mut data = Vec::with_capacity(n * d);
    for row in cloud.rows() {
        for (c, &x) in row.iter().enumerate() {
            let range = maxs[c] - mins[c];
            data.push(if range == 0.0 { 0.0 } else { (x - mins[c]) / range });
        }
    }
    PointCloud::new(data, n, d).expect("scaled cloud stays valid")
}

/// The k nearest neighbors of each point under Euclidean distance,
/// excluding the point itself. Ties broken by smaller index.
pub fn directed_knn(cloud: &PointCloud, k: usize) -> Result<Vec<Vec<usize>>> {
    let n = cloud.len();
    if k == 0 || k >= n {
        return Err(Error::InvalidParameter(format!(
            "k-NN requires 1 <= k <= n-1, got k={k}, n={n}"
        )));
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut cand: Vec<(f64, usize)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| (cloud.dist_sq(i, j), j))
            .collect();
        cand.select_nth_unstable_by(k - 1, |a, b| {
            a.partial_cmp(b).expect("finite distances")
        });
        let mut nearest: Vec<(f64, usize)> = cand[..k].to_vec();
        nearest.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite distances"));
        out.push(nearest.into_iter().map(|(_, j)| j).collect());
    }
    Ok(out)
}

/// Symmetrized k-NN graph: edge present if either endpoint lists the other
/// among its k nearest neighbors.
pub fn build_knn_graph(cloud: &PointCloud, k: usize) -> Result<NeighborhoodGraph> {
    let directed = directed_knn(cloud, k)?;
    Ok(NeighborhoodGraph::from_adjacency(directed, GraphKind::Knn(k)))
}

/// delta-Rips graph: edge iff the pairwise distance is at most delta.
pub fn build_rips_graph(cloud: &PointCloud, delta: f64) -> Result<NeighborhoodGraph> {
    if !delta.is_finite() || delta <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "Rips radius must be positive, got {delta}"
        )));
    }
    let n = cloud.len();
    let delta_sq = delta * delta;
    let mut adjacency = vec![Vec::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            if cloud.dist_sq(i, j) <= delta_sq {
                adjacency[i].push(j);
                adjacency[j].push(i);
            }
        }
    }
    Ok(NeighborhoodGraph {
        n_vertices: n,
        adjacency,
        kind: GraphKind::Rips(delta),
    })
}
