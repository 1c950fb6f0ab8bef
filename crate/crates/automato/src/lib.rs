//! Persistence-based mode-seeking clustering with an automatically chosen
//! prominence threshold.
//!
//! The pipeline: build a neighborhood graph on the point cloud, estimate a
//! density at each vertex, climb the density to a spanning forest of peaks,
//! read off the 0-dimensional superlevelset persistence diagram, and merge
//! every cluster whose prominence falls below a threshold `tau`. The
//! threshold itself is chosen by a bottleneck bootstrap: resample the cloud
//! B times, measure the sqrt(n)-scaled bottleneck distance of each resample
//! diagram to the reference diagram (finite points only), take the
//! `ceil((1-alpha)B)`-th order statistic `q_hat`, and set
//! `tau = 2 * q_hat / sqrt(n)`.
//!
//! Also included: Fowlkes-Mallows evaluation with noise masking, a seeded
//! benchmark harness, and a Mapper implementation that can use the fitted
//! clusterer on filter preimages.

pub mod automato;
pub mod cli;
pub mod density;
pub mod diagram;
pub mod error;
pub mod evaluation;
pub mod geometry;
pub mod io;
pub mod mapper;
pub mod tomato;

pub use crate::automato::{fit, update_alpha, AutomatoConfig, FittedAutomato};
pub use crate::error::{Error, Result};
pub use crate::geometry::PointCloud;
pub use crate::tomato::{tomato_cluster, Clustering, PersistenceDiagram, TomatoParams};
