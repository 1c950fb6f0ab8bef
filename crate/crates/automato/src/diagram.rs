//! Bottleneck distance between persistence diagrams: binary search over
//! candidate costs with a bipartite matching feasibility test.

use crate::tomato::{DiagramPoint, PersistenceDiagram};

/// One side of a matched pair: a concrete diagram point or the diagonal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MatchEnd {
    Point(DiagramPoint),
    Diagonal,
}

/// Optimal bottleneck value together with a witnessing matching.
#[derive(Debug, Clone)]
pub struct MatchingResult {
    pub distance: f64,
    pub matching: Vec<(MatchEnd, MatchEnd)>,
}

fn linf(a: &DiagramPoint, b: &DiagramPoint) -> f64 {
    (a.birth - b.birth).abs().max((a.death - b.death).abs())
}

/// Cost of sending a point to the diagonal: half its lifetime.
fn diag_cost(p: &DiagramPoint) -> f64 {
    (p.birth - p.death) / 2.0
}

/// Kuhn's augmenting-path maximum matching on an adjacency-list bipartite
/// graph. Returns `match_right[r] = Some(l)` assignments.
fn max_matching(n_left: usize, n_right: usize, adj: &[Vec<usize>]) -> Vec<Option<usize>> {
    let mut match_right: Vec<Option<usize>> = vec![None; n_right];
    let mut match_left: Vec<Option<usize>> = vec![None; n_left];

    fn try_augment(
        l: usize,
        adj: &[Vec<usize>],
        seen: &mut [bool],
        match_left: &mut [Option<usize>],
        match_right: &mut [Option<usize>],
    ) -> bool {
        for &r in &adj[l] {
            if seen[r] {
                continue;
            }
            seen[r] = true;
            if match_right[r].is_none()
                || try_augment(
                    match_right[r].unwrap(),
                    adj,
                    seen,
                    match_left,
                    match_right,
                )
            {
                match_right[r] = Some(l);
                match_left[l] = Some(r);
                return true;
            }
        }
        false
    }

    for l in 0..n_left {
        let mut seen = vec![false; n_right];
        try_augment(l, adj, &mut seen, &mut match_left, &mut match_right);
    }
    match_right
}

/// Augmented bipartite graph for threshold `t`: left side is the points of
/// the first diagram plus one diagonal slot per point of the second, right
/// side symmetric. Feasible iff a perfect matching exists.
fn feasibility_adjacency(p1: &[DiagramPoint], p2: &[DiagramPoint], t: f64) -> Vec<Vec<usize>> {
    let (n1, n2) = (p1.len(), p2.len());
    // Left: [0,n1) points of d1, [n1, n1+n2) diagonal slots.
    // Right: [0,n2) points of d2, [n2, n2+n1) diagonal slots.
    let mut adj = vec![Vec::new(); n1 + n2];
    for (i, a) in p1.iter().enumerate() {
        for (j, b) in p2.iter().enumerate() {
            if linf(a, b) <= t {
                adj[i].push(j);
            }
        }
        if diag_cost(a) <= t {
            for slot in 0..n1 {
                adj[i].push(n2 + slot);
            }
        }
    }
    for (j, b) in p2.iter().enumerate() {
        if diag_cost(b) <= t {
            adj[n1 + j].push(j);
        }
        // unused diagonal slots pair with each other at zero cost
        for slot in 0..n1 {
            adj[n1 + j].push(n2 + slot);
        }
    }
    adj
}

fn has_perfect_matching(p1: &[DiagramPoint], p2: &[DiagramPoint], t: f64) -> bool {
    let total = p1.len() + p2.len();
    let adj = feasibility_adjacency(p1, p2, t);
    let match_right = max_matching(total, total, &adj);
    match_right.iter().filter(|m| m.is_some()).count() == total
}

/// Pair up infinite-death points by sorted birth; `None` when the counts
/// differ (the distance is then `+inf`).
fn match_infinite(
    inf1: &[DiagramPoint],
    inf2: &[DiagramPoint],
) -> Option<(f64, Vec<(MatchEnd, MatchEnd)>)> {
    if inf1.len() != inf2.len() {
        return None;
    }
    let mut a: Vec<DiagramPoint> = inf1.to_vec();
    let mut b: Vec<DiagramPoint> = inf2.to_vec();
    a.sort_unstable_by(|x, y| x.birth.partial_cmp(&y.birth).expect("finite births"));
    b.sort_unstable_by(|x, y| x.birth.partial_cmp(&y.birth).expect("finite births"));
    let mut cost: f64 = 0.0;
    let mut pairs = Vec::with_capacity(a.len());
    for (x, y) in a.iter().zip(&b) {
        cost = cost.max((x.birth - y.birth).abs());
        pairs.push((MatchEnd::Point(*x), MatchEnd::Point(*y)));
    }
    Some((cost, pairs))
}

/// Bottleneck distance between two diagrams. With `finite_only` set,
/// infinite-death points are dropped from both sides before matching;
/// otherwise they are matched among themselves by birth (deaths cancel via
/// the `(-inf) - (-inf) = 0` convention) and a count mismatch makes the
/// distance `+inf`.
pub fn bottleneck_distance(
    d1: &PersistenceDiagram,
    d2: &PersistenceDiagram,
    finite_only: bool,
) -> MatchingResult {
    let p1: Vec<DiagramPoint> = d1.finite_points().copied().collect();
    let p2: Vec<DiagramPoint> = d2.finite_points().copied().collect();

    let (mut base_cost, mut matching) = if finite_only {
        (0.0, Vec::new())
    } else {
        let inf1: Vec<DiagramPoint> = d1.infinite_points().copied().collect();
        let inf2: Vec<DiagramPoint> = d2.infinite_points().copied().collect();
        match match_infinite(&inf1, &inf2) {
            Some(pair) => pair,
            None => {
                return MatchingResult {
                    distance: f64::INFINITY,
                    matching: Vec::new(),
                }
            }
        }
    };

    // Candidate costs: every pairwise L-inf cost plus every half-lifetime.
    let mut candidates: Vec<f64> = vec![0.0];
    for a in &p1 {
        candidates.push(diag_cost(a));
        for b in &p2 {
            candidates.push(linf(a, b));
        }
    }
    candidates.extend(p2.iter().map(diag_cost));
    candidates.retain(|c| *c >= base_cost);
    candidates.push(base_cost);
    candidates.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite costs"));
    candidates.dedup();

    // Smallest feasible candidate by binary search.
    let mut lo = 0usize;
    let mut hi = candidates.len() - 1;
    debug_assert!(has_perfect_matching(&p1, &p2, candidates[hi]));
    while lo < hi {
        let mid = (lo + hi) / 2;
        if has_perfect_matching(&p1, &p2, candidates[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let finite_cost = candidates[lo];
    base_cost = base_cost.max(finite_cost);

    // Extract the witness from the optimal feasibility graph.
    let (n1, n2) = (p1.len(), p2.len());
    let adj = feasibility_adjacency(&p1, &p2, finite_cost);
    let match_right = max_matching(n1 + n2, n1 + n2, &adj);
    for (r, l) in match_right.iter().enumerate() {
        let l = l.expect("perfect matching at the optimum");
        let left_end = if l < n1 {
            MatchEnd::Point(p1[l])
        } else {
            MatchEnd::Diagonal
        };
        let right_end = if r < n2 {
            MatchEnd::Point(p2[r])
        } else {
            MatchEnd::Diagonal
        };
        if !(matches!(left_end, MatchEnd::Diagonal) && matches!(right_end, MatchEnd::Diagonal)) {
            matching.push((left_end, right_end));
        }
    }

    MatchingResult {
        distance: base_cost,
        matching,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dgm(points: &[(f64, f64)]) -> PersistenceDiagram {
        PersistenceDiagram {
            points: points
                .iter()
                .enumerate()
                .map(|(i, &(b, d))| DiagramPoint {
                    birth: b,
                    death: d,
                    peak: i,
                })
                .collect(),
        }
    }

    #[test]
    fn identical_diagrams_distance_zero() {
        let d = dgm(&[(3.0, 1.0), (5.0, 2.0)]);
        let r = bottleneck_distance(&d, &d, true);
        assert_eq!(r.distance, 0.0);
    }

    #[test]
    fn single_point_vs_empty_goes_to_diagonal() {
        let r = bottleneck_distance(&dgm(&[(3.0, 1.0)]), &dgm(&[]), true);
        assert_eq!(r.distance, 1.0);
        assert_eq!(r.matching.len(), 1);
        assert!(matches!(r.matching[0], (MatchEnd::Point(_), MatchEnd::Diagonal)));
    }

    #[test]
    fn direct_match_beats_double_diagonal() {
        let r = bottleneck_distance(&dgm(&[(4.0, 0.0)]), &dgm(&[(4.0, 1.0)]), true);
        assert_eq!(r.distance, 1.0);
    }

    #[test]
    fn infinite_points_match_by_birth() {
        let d1 = dgm(&[(5.0, f64::NEG_INFINITY)]);
        let d2 = dgm(&[(7.0, f64::NEG_INFINITY)]);
        let r = bottleneck_distance(&d1, &d2, false);
        assert_eq!(r.distance, 2.0);
    }

    #[test]
    fn infinite_count_mismatch_is_infinite() {
        let d1 = dgm(&[(5.0, f64::NEG_INFINITY), (4.0, f64::NEG_INFINITY)]);
        let d2 = dgm(&[(7.0, f64::NEG_INFINITY)]);
        let r = bottleneck_distance(&d1, &d2, false);
        assert_eq!(r.distance, f64::INFINITY);
    }

    #[test]
    fn finite_only_drops_infinite_points() {
        let d1 = dgm(&[(5.0, f64::NEG_INFINITY), (3.0, 1.0)]);
        let d2 = dgm(&[(7.0, f64::NEG_INFINITY), (3.0, 1.0)]);
        let r = bottleneck_distance(&d1, &d2, true);
        assert_eq!(r.distance, 0.0);
    }

    #[test]
    fn matching_costs_bounded_by_distance() {
        let d1 = dgm(&[(4.0, 0.0), (3.0, 2.5), (8.0, 6.0)]);
        let d2 = dgm(&[(4.2, 0.3), (7.0, 5.0)]);
        let r = bottleneck_distance(&d1, &d2, true);
        let mut max_cost: f64 = 0.0;
        for (a, b) in &r.matching {
            let cost = match (a, b) {
                (MatchEnd::Point(x), MatchEnd::Point(y)) => linf(x, y),
                (MatchEnd::Point(x), MatchEnd::Diagonal)
                | (MatchEnd::Diagonal, MatchEnd::Point(x)) => diag_cost(x),
                (MatchEnd::Diagonal, MatchEnd::Diagonal) => 0.0,
            };
            assert!(cost <= r.distance + 1e-12);
            max_cost = max_cost.max(cost);
        }
        assert!((max_cost - r.distance).abs() < 1e-12);
    }

    #[test]
    fn symmetry() {
        let d1 = dgm(&[(4.0, 0.0), (3.0, 2.5)]);
        let d2 = dgm(&[(4.2, 0.3), (7.0, 5.0), (1.0, 0.5)]);
        let a = bottleneck_distance(&d1, &d2, true).distance;
        let b = bottleneck_distance(&d2, &d1, true).distance;
        assert!((a - b).abs() < 1e-12);
    }
}
