//! Fowlkes-Mallows scoring with noise masking, and the seeded multi-run
//! benchmark harness.

use std::collections::HashMap;
use std::path::PathBuf;
use std::time::Instant;

use crate::automato::{fit, AutomatoConfig};
use crate::error::{Error, Result};
use crate::geometry::min_max_scale;
use crate::io::{load_labels, load_points};

/// Noise/outlier marker in label vectors.
pub const NOISE: i64 = -1;

/// Fowlkes-Mallows score between a predicted and a ground-truth labeling.
///
/// Indices where `pred` is -1 are removed before pair counting; the truth
/// must not contain -1. Returns 0 when no co-clustered pair is recovered.
pub fn fowlkes_mallows(pred: &[i64], truth: &[i64]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch(format!(
            "pred has {} labels, truth has {}",
            pred.len(),
            truth.len()
        )));
    }
    if truth.contains(&NOISE) {
        return Err(Error::InvalidParameter(
            "ground truth must not contain -1 labels".into(),
        ));
    }
    let kept: Vec<usize> = (0..pred.len()).filter(|&i| pred[i] != NOISE).collect();
    if kept.is_empty() {
        return Err(Error::InvalidParameter(
            "all points are masked as noise".into(),
        ));
    }

    // Contingency counts over the unmasked points.
    let mut table: HashMap<(i64, i64), u64> = HashMap::new();
    let mut pred_sizes: HashMap<i64, u64> = HashMap::new();
    let mut truth_sizes: HashMap<i64, u64> = HashMap::new();
    for &i in &kept {
        *table.entry((pred[i], truth[i])).or_default() += 1;
        *pred_sizes.entry(pred[i]).or_default() += 1;
        *truth_sizes.entry(truth[i]).or_default() += 1;
    }
    let choose2 = |c: u64| (c * c.saturating_sub(1)) / 2;
    let tp: u64 = table.values().map(|&c| choose2(c)).sum();
    let pred_pairs: u64 = pred_sizes.values().map(|&c| choose2(c)).sum();
    let truth_pairs: u64 = truth_sizes.values().map(|&c| choose2(c)).sum();
    if tp == 0 || pred_pairs == 0 || truth_pairs == 0 {
        return Ok(0.0);
    }
    Ok((tp as f64 / pred_pairs as f64).sqrt() * (tp as f64 / truth_pairs as f64).sqrt())
}

/// One (dataset, ground truth) input of the benchmark.
#[derive(Debug, Clone)]
pub struct BenchmarkDataset {
    pub name: String,
    pub points_path: PathBuf,
    pub truth_paths: Vec<PathBuf>,
}

/// Mean/std Fowlkes-Mallows over the seeded runs against one ground truth.
#[derive(Debug, Clone)]
pub struct BenchmarkRow {
    pub dataset: String,
    pub truth: String,
    pub mean_fm: f64,
    pub std_fm: f64,
    pub runs: usize,
    pub seconds: f64,
    /// Marks the best-scoring truth of a multi-truth dataset.
    pub best: bool,
}

#[derive(Debug, Clone, Default)]
pub struct BenchmarkReport {
    pub rows: Vec<BenchmarkRow>,
}

impl BenchmarkReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("dataset,truth,mean_fm,std_fm,runs,seconds,best\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{:.16e},{:.16e},{},{:.16e},{}\n",
                r.dataset, r.truth, r.mean_fm, r.std_fm, r.runs, r.seconds, r.best
            ));
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{:<20} {:<20} {:>10} {:>10} {:>5} {:>9} {:>5}\n",
            "dataset", "truth", "mean_fm", "std_fm", "runs", "seconds", "best"
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{:<20} {:<20} {:>10.6} {:>10.6} {:>5} {:>9.3} {:>5}\n",
                r.dataset,
                r.truth,
                r.mean_fm,
                r.std_fm,
                r.runs,
                r.seconds,
                if r.best { "*" } else { "" }
            ));
        }
        out
    }
}

/// Runs the harness: each dataset is min-max scaled, fitted `runs` times
/// with seeds `base_seed + 0 .. base_seed + runs - 1`, and scored against
/// every ground truth. Rows are sorted by dataset, then truth.
pub fn run_benchmark(
    datasets: &[BenchmarkDataset],
    config: &AutomatoConfig,
    runs: usize,
    base_seed: u64,
) -> Result<BenchmarkReport> {
    if runs == 0 {
        return Err(Error::InvalidParameter("runs must be at least 1".into()));
    }
    let mut rows = Vec::new();
    for ds in datasets {
        let cloud = min_max_scale(&load_points(&ds.points_path)?);
        let truths: Vec<(String, Vec<i64>)> = ds
            .truth_paths
            .iter()
            .map(|p| {
                let labels = load_labels(p)?;
                if labels.len() != cloud.len() {
                    return Err(Error::LengthMismatch(format!(
                        "{}: {} labels for {} points",
                        p.display(),
                        labels.len(),
                        cloud.len()
                    )));
                }
                Ok((
                    p.file_stem()
                        .map(|s| s.to_string_lossy().into_owned())
                        .unwrap_or_else(|| p.display().to_string()),
                    labels,
                ))
            })
            .collect::<Result<_>>()?;

        let start = Instant::now();
        let mut scores: Vec<Vec<f64>> = vec![Vec::with_capacity(runs); truths.len()];
        for run in 0..runs {
            let mut cfg = *config;
            cfg.seed = Some(base_seed + run as u64);
            let fitted = fit(&cloud, &cfg)?;
            let pred = fitted.labels_i64();
            for (t, (_, truth)) in truths.iter().enumerate() {
                scores[t].push(fowlkes_mallows(&pred, truth)?);
            }
        }
        let seconds = start.elapsed().as_secs_f64();

        let mut ds_rows: Vec<BenchmarkRow> = truths
            .iter()
            .zip(&scores)
            .map(|((truth_name, _), s)| {
                let mean = s.iter().sum::<f64>() / s.len() as f64;
                let var = s.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / s.len() as f64;
                BenchmarkRow {
                    dataset: ds.name.clone(),
                    truth: truth_name.clone(),
                    mean_fm: mean,
                    std_fm: var.sqrt(),
                    runs,
                    seconds,
                    best: false,
                }
            })
            .collect();
        if let Some(best_idx) = ds_rows
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| a.mean_fm.partial_cmp(&b.mean_fm).expect("finite scores"))
            .map(|(i, _)| i)
        {
            ds_rows[best_idx].best = true;
        }
        rows.extend(ds_rows);
    }
    rows.sort_by(|a, b| a.dataset.cmp(&b.dataset).then(a.truth.cmp(&b.truth)));
    Ok(BenchmarkReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_agreement_scores_one() {
        let labels = vec![0, 0, 1, 1, 2];
        assert_eq!(fowlkes_mallows(&labels, &labels).unwrap(), 1.0);
    }

    #[test]
    fn worked_example_all_in_one_vs_two_pairs() {
        // truth {a,b},{c,d}; prediction puts everything together:
        // TP = 2 same-in-both pairs, all 6 pairs co-clustered in pred.
        let pred = vec![0, 0, 0, 0];
        let truth = vec![0, 0, 1, 1];
        let fm = fowlkes_mallows(&pred, &truth).unwrap();
        assert!((fm - (1.0f64 / 3.0).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn noise_masking_removes_points() {
        let pred = vec![0, 0, NOISE, 1];
        let truth = vec![0, 0, 1, 1];
        let masked = fowlkes_mallows(&pred, &truth).unwrap();
        // Remaining points: pred [0,0,1], truth [0,0,1] -> perfect.
        assert_eq!(masked, 1.0);
    }

    #[test]
    fn rejects_noise_in_truth() {
        assert!(fowlkes_mallows(&[0, 1], &[0, NOISE]).is_err());
    }

    #[test]
    fn rejects_length_mismatch() {
        assert!(fowlkes_mallows(&[0, 1], &[0]).is_err());
    }

    #[test]
    fn rejects_all_masked() {
        assert!(fowlkes_mallows(&[NOISE, NOISE], &[0, 1]).is_err());
    }

    #[test]
    fn zero_tp_scores_zero() {
        // Everything a singleton in pred: no co-clustered pairs recovered.
        let pred = vec![0, 1, 2, 3];
        let truth = vec![0, 0, 1, 1];
        assert_eq!(fowlkes_mallows(&pred, &truth).unwrap(), 0.0);
    }

    #[test]
    fn relabeling_invariance() {
        let pred = vec![5, 5, 9, 9, 2];
        let same = vec![0, 0, 1, 1, 2];
        let truth = vec![1, 1, 0, 0, 2];
        assert_eq!(
            fowlkes_mallows(&pred, &truth).unwrap(),
            fowlkes_mallows(&same, &truth).unwrap()
        );
    }

    #[test]
    fn symmetric_without_noise() {
        let a = vec![0, 0, 1, 1, 2, 2];
        let b = vec![0, 0, 0, 1, 1, 1];
        assert_eq!(
            fowlkes_mallows(&a, &b).unwrap(),
            fowlkes_mallows(&b, &a).unwrap()
        );
    }
}
