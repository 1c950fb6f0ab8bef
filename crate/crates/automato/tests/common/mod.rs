//! Shared test oracles and data generators. Everything here is independent
//! of the library's implementation paths: the persistence oracle rebuilds
//! every superlevelset explicitly, the bottleneck oracle enumerates every
//! matching, and the pair-counting oracle loops over all index pairs.

#![allow(dead_code)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use automato::geometry::PointCloud;
use automato::tomato::{DiagramPoint, PersistenceDiagram};

// --- persistence oracle ---------------------------------------------------

/// Brute-force 0-dimensional superlevelset persistence: for each distinct
/// density level (descending), build the induced subgraph on vertices at or
/// above the level, compute its connected components, and track component
/// births and merges. Densities must be distinct.
pub fn persistence_oracle(adjacency: &[Vec<usize>], density: &[f64]) -> Vec<(f64, f64, usize)> {
    let n = density.len();
    let mut levels: Vec<f64> = density.to_vec();
    levels.sort_by(|a, b| b.partial_cmp(a).unwrap());
    levels.dedup();

    // Alive components as vertex sets with (birth, peak).
    let mut alive: Vec<(Vec<usize>, f64, usize)> = Vec::new();
    let mut finished: Vec<(f64, f64, usize)> = Vec::new();

    for &t in &levels {
        let active: Vec<usize> = (0..n).filter(|&v| density[v] >= t).collect();
        let comps = connected_components(adjacency, &active);
        let mut next_alive: Vec<(Vec<usize>, f64, usize)> = Vec::new();
        for comp in comps {
            // Previous components swallowed by this one.
            let prev: Vec<&(Vec<usize>, f64, usize)> = alive
                .iter()
                .filter(|(verts, _, _)| verts.iter().any(|v| comp.contains(v)))
                .collect();
            match prev.len() {
                0 => {
                    // Newborn: its peak is the highest-density vertex.
                    let peak = *comp
                        .iter()
                        .max_by(|&&a, &&b| density[a].partial_cmp(&density[b]).unwrap())
                        .unwrap();
                    next_alive.push((comp.clone(), density[peak], peak));
                }
                1 => {
                    let (_, birth, peak) = prev[0];
                    next_alive.push((comp.clone(), *birth, *peak));
                }
                _ => {
                    // Merge: survivor has the highest birth (ties to the
                    // smaller peak index); the rest die at this level.
                    let survivor = prev
                        .iter()
                        .max_by(|(_, b1, p1), (_, b2, p2)| {
                            b1.partial_cmp(b2).unwrap().then(p2.cmp(p1))
                        })
                        .unwrap();
                    for dead in &prev {
                        if !std::ptr::eq(*dead, *survivor) {
                            finished.push((dead.1, t, dead.2));
                        }
                    }
                    next_alive.push((comp.clone(), survivor.1, survivor.2));
                }
            }
        }
        alive = next_alive;
    }
    for (_, birth, peak) in alive {
        finished.push((birth, f64::NEG_INFINITY, peak));
    }
    finished
}

fn connected_components(adjacency: &[Vec<usize>], active: &[usize]) -> Vec<Vec<usize>> {
    let mut comps = Vec::new();
    let mut seen = vec![false; adjacency.len()];
    let is_active = {
        let mut mask = vec![false; adjacency.len()];
        for &v in active {
            mask[v] = true;
        }
        mask
    };
    for &start in active {
        if seen[start] {
            continue;
        }
        let mut comp = Vec::new();
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(v) = stack.pop() {
            comp.push(v);
            for &u in &adjacency[v] {
                if is_active[u] && !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        comp.sort_unstable();
        comps.push(comp);
    }
    comps
}

/// Multiset equality of diagram triples within a tiny tolerance for the
/// float fields and exact equality for the peak.
pub fn same_diagram(actual: &PersistenceDiagram, expected: &[(f64, f64, usize)]) -> bool {
    if actual.points.len() != expected.len() {
        return false;
    }
    let key = |b: f64, d: f64, p: usize| (format!("{b:.12e}|{d:.12e}"), p);
    let mut a: Vec<_> = actual
        .points
        .iter()
        .map(|pt| key(pt.birth, pt.death, pt.peak))
        .collect();
    let mut e: Vec<_> = expected.iter().map(|&(b, d, p)| key(b, d, p)).collect();
    a.sort();
    e.sort();
    a == e
}

// --- bottleneck oracle ----------------------------------------------------

fn linf(a: &DiagramPoint, b: &DiagramPoint) -> f64 {
    let db = (a.birth - b.birth).abs();
    let dd = if a.is_infinite() && b.is_infinite() {
        0.0
    } else if a.is_infinite() || b.is_infinite() {
        f64::INFINITY
    } else {
        (a.death - b.death).abs()
    };
    db.max(dd)
}

fn diag_cost(p: &DiagramPoint) -> f64 {
    if p.is_infinite() {
        f64::INFINITY
    } else {
        (p.birth - p.death) / 2.0
    }
}

/// Exhaustive bottleneck distance: every point of the first diagram is
/// assigned to an unused point of the second or to the diagonal; leftover
/// points of the second go to the diagonal. Handles infinite points via
/// the (-inf)-(-inf)=0 convention.
pub fn bottleneck_oracle(d1: &PersistenceDiagram, d2: &PersistenceDiagram, finite_only: bool) -> f64 {
    let p1: Vec<DiagramPoint> = if finite_only {
        d1.finite_points().copied().collect()
    } else {
        d1.points.clone()
    };
    let p2: Vec<DiagramPoint> = if finite_only {
        d2.finite_points().copied().collect()
    } else {
        d2.points.clone()
    };
    let mut used = vec![false; p2.len()];
    best_assignment(&p1, &p2, 0, &mut used, 0.0)
}

fn best_assignment(
    p1: &[DiagramPoint],
    p2: &[DiagramPoint],
    idx: usize,
    used: &mut Vec<bool>,
    current_max: f64,
) -> f64 {
    if idx == p1.len() {
        let mut cost = current_max;
        for (j, u) in used.iter().enumerate() {
            if !u {
                cost = cost.max(diag_cost(&p2[j]));
            }
        }
        return cost;
    }
    let mut best = f64::INFINITY;
    for j in 0..p2.len() {
        if used[j] {
            continue;
        }
        used[j] = true;
        let c = best_assignment(p1, p2, idx + 1, used, current_max.max(linf(&p1[idx], &p2[j])));
        used[j] = false;
        best = best.min(c);
    }
    let c = best_assignment(
        p1,
        p2,
        idx + 1,
        used,
        current_max.max(diag_cost(&p1[idx])),
    );
    best.min(c)
}

// --- Fowlkes-Mallows oracle -------------------------------------------------

/// O(n^2) pair counting with the same -1 masking rule as the library.
pub fn fowlkes_mallows_oracle(pred: &[i64], truth: &[i64]) -> f64 {
    let kept: Vec<usize> = (0..pred.len()).filter(|&i| pred[i] != -1).collect();
    let mut tp = 0u64;
    let mut same_pred = 0u64;
    let mut same_truth = 0u64;
    for (a, &i) in kept.iter().enumerate() {
        for &j in &kept[a + 1..] {
            let in_pred = pred[i] == pred[j];
            let in_truth = truth[i] == truth[j];
            if in_pred {
                same_pred += 1;
            }
            if in_truth {
                same_truth += 1;
            }
            if in_pred && in_truth {
                tp += 1;
            }
        }
    }
    if tp == 0 || same_pred == 0 || same_truth == 0 {
        return 0.0;
    }
    (tp as f64 / same_pred as f64).sqrt() * (tp as f64 / same_truth as f64).sqrt()
}

// --- generators -------------------------------------------------------------

/// Random undirected graph on `n` vertices with edge probability `p`.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.gen_bool(p) {
                adj[u].push(v);
                adj[v].push(u);
            }
        }
    }
    adj
}

/// Distinct random densities in (0, 1).
pub fn random_distinct_densities(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let values: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let mut sorted = values.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if sorted.windows(2).all(|w| w[0] != w[1]) {
            return values;
        }
    }
}

/// Random diagram with the given number of finite and infinite points.
pub fn random_diagram(rng: &mut ChaCha8Rng, n_finite: usize, n_infinite: usize) -> PersistenceDiagram {
    let mut points = Vec::new();
    for i in 0..n_finite {
        let death: f64 = rng.gen_range(-2.0..2.0);
        let lifetime: f64 = rng.gen_range(0.01..3.0);
        points.push(DiagramPoint {
            birth: death + lifetime,
            death,
            peak: i,
        });
    }
    for i in 0..n_infinite {
        points.push(DiagramPoint {
            birth: rng.gen_range(-2.0..4.0),
            death: f64::NEG_INFINITY,
            peak: n_finite + i,
        });
    }
    PersistenceDiagram { points }
}

/// Three well-separated 2-D Gaussian blobs (100 points each, sigma 0.05,
/// centers mutually >= 0.5 apart after min-max scaling), with generator
/// labels as ground truth.
pub fn three_blobs(seed: u64) -> (PointCloud, Vec<i64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers = [(0.0, 0.0), (1.0, 0.0), (0.5, 0.9)];
    let mut rows = Vec::with_capacity(300);
    let mut labels = Vec::with_capacity(300);
    for (c, &(cx, cy)) in centers.iter().enumerate() {
        for _ in 0..100 {
            let dx: f64 = rng.sample(StandardNormal);
            let dy: f64 = rng.sample(StandardNormal);
            rows.push(vec![cx + 0.05 * dx, cy + 0.05 * dy]);
            labels.push(c as i64);
        }
    }
    (PointCloud::from_rows(&rows).unwrap(), labels)
}

/// Noisy concentric circles: radii 1 and 2 (ratio 2:1), 400 points split
/// proportionally to circumference so both circles share one linear density,
/// equally spaced angles, radial Gaussian noise with sigma 0.05 * outer
/// radius: point = (r + eps) * (cos t, sin t).
pub fn concentric_circles(seed: u64) -> (PointCloud, Vec<i64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sigma = 0.05 * 2.0;
    let counts = [133usize, 267];
    let radii = [1.0, 2.0];
    let mut rows = Vec::with_capacity(400);
    let mut labels = Vec::with_capacity(400);
    for (c, (&count, &r)) in counts.iter().zip(&radii).enumerate() {
        for i in 0..count {
            let theta = std::f64::consts::TAU * i as f64 / count as f64;
            let eps: f64 = rng.sample(StandardNormal);
            let radius = r + sigma * eps;
            rows.push(vec![radius * theta.cos(), radius * theta.sin()]);
            labels.push(c as i64);
        }
    }
    (PointCloud::from_rows(&rows).unwrap(), labels)
}

/// Random labeling with cluster ids in [0, max_clusters).
pub fn random_labels(rng: &mut ChaCha8Rng, n: usize, max_clusters: usize) -> Vec<i64> {
    (0..n).map(|_| rng.gen_range(0..max_clusters) as i64).collect()
}
