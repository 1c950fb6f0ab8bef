//! Per-vertex density estimation: distance-to-measure (plain and log) and
//! truncated Gaussian KDE.

use crate::error::{Error, Result};
use crate::geometry::{directed_knn, PointCloud};

/// Contributions beyond this many bandwidths are dropped from the KDE sum.
const KDE_TRUNCATION: f64 = 3.0;

/// Smoothing parameter for the DTM estimators: either an explicit neighbor
/// count k, or a mass fraction m resolved as k = ceil(m * n).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Smoothing {
    K(usize),
    MassFraction(f64),
}

impl Smoothing {
    /// Resolves to a neighbor count, validating 1 <= k <= n-1.
    pub fn resolve(&self, n: usize) -> Result<usize> {
        let k = match *self {
            Smoothing::K(k) => k,
            Smoothing::MassFraction(m) => {
                if !(m > 0.0 && m < 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "mass fraction must lie in (0,1), got {m}"
                    )));
                }
                (m * n as f64).ceil() as usize
            }
        };
        if k == 0 || k >= n {
            return Err(Error::InvalidParameter(format!(
                "DTM smoothing resolves to k={k}, need 1 <= k <= n-1 (n={n})"
            )));
        }
        Ok(k)
    }
}

/// Which estimator produced a [`DensityEstimate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DensityKind {
    Dtm(Smoothing),
    LogDtm(Smoothing),
    Kde { bandwidth: f64 },
}

/// Per-point density values, one per row of the source cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityEstimate {
    pub values: Vec<f64>,
    pub kind: DensityKind,
}

/// Empirical (unnormalized) distance-to-measure density:
/// `(mean squared distance to the k nearest neighbors)^(-1/2)`.
/// The query point is excluded from its own neighbor set.
pub fn dtm_density(cloud: &PointCloud, smoothing: Smoothing) -> Result<DensityEstimate> {
    let n = cloud.len();
    let k = smoothing.resolve(n)?;
    let neighbors = directed_knn(cloud, k)?;
    let mut values = Vec::with_capacity(n);
    for (i, nbrs) in neighbors.iter().enumerate() {
        let mean_sq: f64 =
            nbrs.iter().map(|&j| cloud.dist_sq(i, j)).sum::<f64>() / k as f64;
        if mean_sq == 0.0 {
            return Err(Error::DegenerateDensity(format!(
                "point {i}: all {k} nearest neighbors are coincident with it"
            )));
        }
        values.push(mean_sq.powf(-0.5));
    }
    Ok(DensityEstimate {
        values,
        kind: DensityKind::Dtm(smoothing),
    })
}

/// Natural logarithm of [`dtm_density`], computed elementwise.
pub fn log_dtm_density(cloud: &PointCloud, smoothing: Smoothing) -> Result<DensityEstimate> {
    let dtm = dtm_density(cloud, smoothing)?;
    Ok(DensityEstimate {
        values: dtm.values.iter().map(|v| v.ln()).collect(),
        kind: DensityKind::LogDtm(smoothing),
    })
}

/// Truncated Gaussian kernel density, unnormalized: each point sums
/// `exp(-dist^2 / (2 h^2))` over neighbors within `3h` (self included).
pub fn kde_gaussian(cloud: &PointCloud, bandwidth: f64) -> Result<DensityEstimate> {
    if !bandwidth.is_finite() || bandwidth <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "KDE bandwidth must be positive, got {bandwidth}"
        )));
    }
    let n = cloud.len();
    let cutoff_sq = (KDE_TRUNCATION * bandwidth) * (KDE_TRUNCATION * bandwidth);
    let two_h_sq = 2.0 * bandwidth * bandwidth;
    let mut values = vec![0.0; n];
    for (i, value) in values.iter_mut().enumerate() {
        for j in 0..n {
            let dsq = cloud.dist_sq(i, j);
            if dsq <= cutoff_sq {
                *value += (-dsq / two_h_sq).exp();
            }
        }
    }
    Ok(DensityEstimate {
        values,
        kind: DensityKind::Kde { bandwidth },
    })
}
