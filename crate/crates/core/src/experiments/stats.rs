use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::learners::LearningCurve;

/// Sample mean and half-width of the two-sided 95% Student-t interval.
pub fn mean_ci95(samples: &[f64]) -> Result<(f64, f64)> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::Statistics(format!(
            "a confidence interval needs at least two samples, got {n}"
        )));
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    if var == 0.0 {
        return Ok((mean, 0.0));
    }
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .map_err(|e| Error::Statistics(e.to_string()))?
        .inverse_cdf(0.975);
    Ok((mean, t * (var / n as f64).sqrt()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BucketStat {
    /// Right edge of the bucket in primitive timesteps.
    pub timestep: f64,
    pub mean: f64,
    pub ci_half_width: f64,
}

impl BucketStat {
    pub fn ci_lo(&self) -> f64 {
        self.mean - self.ci_half_width
    }

    pub fn ci_hi(&self) -> f64 {
        self.mean + self.ci_half_width
    }
}

/// Across-seed mean curve with 95% confidence band.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregatedCurve {
    pub seeds: usize,
    pub buckets: Vec<BucketStat>,
}

/// Buckets one curve over `[0, budget]` into `buckets` equal-width bins.
///
/// Each bin holds the mean return of the episodes that ended inside it; the
/// last bin also takes episodes that overshot the budget. Empty bins repeat
/// the previous bin's value, and empty bins before the first episode take
/// the first observed value.
pub fn bucket_curve(curve: &LearningCurve, buckets: usize, budget_steps: u64) -> Result<Vec<f64>> {
    if buckets == 0 {
        return Err(Error::Config("bucket count must be positive".into()));
    }
    if curve.is_empty() {
        return Err(Error::Statistics(format!(
            "curve for seed {} has no completed episodes",
            curve.seed
        )));
    }
    let width = budget_steps as f64 / buckets as f64;
    let mut sums = vec![0.0; buckets];
    let mut counts = vec![0usize; buckets];
    for p in &curve.points {
        // Bucket b covers (b * width, (b + 1) * width].
        let b = ((p.timestep as f64 / width).ceil() as usize)
            .saturating_sub(1)
            .min(buckets - 1);
        sums[b] += p.episode_return;
        counts[b] += 1;
    }
    let first = counts.iter().position(|&c| c > 0).expect("curve is non-empty");
    let mut out = Vec::with_capacity(buckets);
    let mut last = sums[first] / counts[first] as f64;
    for b in 0..buckets {
        if counts[b] > 0 {
            last = sums[b] / counts[b] as f64;
        }
        out.push(last);
    }
    Ok(out)
}

/// Bucket timestep coordinates (right edges).
pub fn bucket_edges(buckets: usize, budget_steps: u64) -> Vec<f64> {
    let width = budget_steps as f64 / buckets as f64;
    (1..=buckets).map(|b| b as f64 * width).collect()
}

/// Mean and 95% CI per bucket across per-seed curves sharing one budget.
pub fn aggregate_curves(curves: &[LearningCurve], buckets: usize, budget_steps: u64) -> Result<AggregatedCurve> {
    if curves.len() < 2 {
        return Err(Error::Statistics(
            "aggregating curves needs at least two seeds for a confidence interval".into(),
        ));
    }
    let per_seed = curves
        .iter()
        .map(|c| bucket_curve(c, buckets, budget_steps))
        .collect::<Result<Vec<_>>>()?;
    let edges = bucket_edges(buckets, budget_steps);
    let mut out = Vec::with_capacity(buckets);
    for (b, &t) in edges.iter().enumerate() {
        let column: Vec<f64> = per_seed.iter().map(|s| s[b]).collect();
        let (mean, half) = mean_ci95(&column)?;
        out.push(BucketStat {
            timestep: t,
            mean,
            ci_half_width: half,
        });
    }
    Ok(AggregatedCurve {
        seeds: curves.len(),
        buckets: out,
    })
}

/// Trapezoidal area under `(x, y)` divided by the x range.
pub fn auc(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::Statistics("AUC needs at least two points".into()));
    }
    let range = points[points.len() - 1].0 - points[0].0;
    if !(range > 0.0) {
        return Err(Error::Statistics("AUC needs increasing timesteps".into()));
    }
    let area: f64 = points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
        .sum();
    Ok(area / range)
}

impl AggregatedCurve {
    pub fn auc(&self) -> Result<f64> {
        let pts: Vec<(f64, f64)> = self.buckets.iter().map(|b| (b.timestep, b.mean)).collect();
        auc(&pts)
    }
}

/// Percentage change of `with_macro` relative to `vanilla`; negative means
/// the macro arm needed fewer steps.
pub fn reduction_pct(vanilla: f64, with_macro: f64) -> f64 {
    (with_macro - vanilla) / vanilla * 100.0
}
