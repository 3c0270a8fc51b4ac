//! Overlap metrics and score summaries.

use crate::error::{Error, Result};
use crate::grid::{same_dims, BoolMask};

/// Jaccard overlap `|a ∩ b| / |a ∪ b|`. Two empty masks score 1.0; use
/// [`overlap`] to detect that degenerate case.
pub fn jaccard(a: &BoolMask, b: &BoolMask) -> Result<f64> {
    let (inter, union) = intersection_union(a, b)?;
    if union == 0 {
        return Ok(1.0);
    }
    Ok(inter as f64 / union as f64)
}

/// Dice overlap `2 |a ∩ b| / (|a| + |b|)`. Two empty masks score 1.0.
pub fn dice(a: &BoolMask, b: &BoolMask) -> Result<f64> {
    let (inter, union) = intersection_union(a, b)?;
    // |a| + |b| = union + intersection
    let denom = union + inter;
    if denom == 0 {
        return Ok(1.0);
    }
    Ok(2.0 * inter as f64 / denom as f64)
}

/// Both overlap scores plus a flag marking the degenerate both-empty case,
/// which scores 1.0 by convention; flagged rows are excluded from summary
/// tables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Overlap {
    pub jaccard: f64,
    pub dice: f64,
    pub degenerate: bool,
}

pub fn overlap(a: &BoolMask, b: &BoolMask) -> Result<Overlap> {
    let (inter, union) = intersection_union(a, b)?;
    if union == 0 {
        return Ok(Overlap { jaccard: 1.0, dice: 1.0, degenerate: true });
    }
    Ok(Overlap {
        jaccard: inter as f64 / union as f64,
        dice: 2.0 * inter as f64 / (union + inter) as f64,
        degenerate: false,
    })
}

fn intersection_union(a: &BoolMask, b: &BoolMask) -> Result<(usize, usize)> {
    same_dims(a.dims(), b.dims(), "overlap metric")?;
    let mut inter = 0usize;
    let mut union = 0usize;
    for (&x, &y) in a.data().iter().zip(b.data()) {
        if x && y {
            inter += 1;
        }
        if x || y {
            union += 1;
        }
    }
    Ok((inter, union))
}

/// Converts a Jaccard score to the Dice score via `S = 2J / (1 + J)`.
pub fn dice_from_jaccard(j: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&j) {
        return Err(Error::Argument(format!("jaccard score {j} outside [0, 1]")));
    }
    Ok(2.0 * j / (1.0 + j))
}

/// One scored example.
#[derive(Debug, Clone)]
pub struct ScoredExample {
    pub id: String,
    pub category: String,
    pub score: f64,
}

/// Per-category statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoryStats {
    pub category: String,
    pub count: usize,
    pub mean: f64,
    pub std: f64,
}

/// Summary of a score list: overall mean with sample standard deviation,
/// median and quartiles, and per-category breakdown.
#[derive(Debug, Clone)]
pub struct Report {
    pub count: usize,
    pub mean: f64,
    pub std: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub categories: Vec<CategoryStats>,
}

/// Linear interpolation between order statistics of `sorted` at percentile
/// `p` in [0, 100].
pub(crate) fn percentile(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    if sorted.len() == 1 {
        return sorted[0];
    }
    let pos = p / 100.0 * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

fn mean_std(scores: &[f64]) -> (f64, f64) {
    let n = scores.len();
    let mean = scores.iter().sum::<f64>() / n as f64;
    let std = if n < 2 {
        0.0
    } else {
        (scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    };
    (mean, std)
}

/// Summarizes scored examples; categories appear in first-seen order.
pub fn report(results: &[ScoredExample]) -> Result<Report> {
    if results.is_empty() {
        return Err(Error::Argument("report requires at least one result".into()));
    }
    let scores: Vec<f64> = results.iter().map(|r| r.score).collect();
    let (mean, std) = mean_std(&scores);
    let mut sorted = scores.clone();
    sorted.sort_by(|a, b| a.total_cmp(b));

    let mut categories: Vec<CategoryStats> = Vec::new();
    let mut order: Vec<String> = Vec::new();
    for r in results {
        if !order.contains(&r.category) {
            order.push(r.category.clone());
        }
    }
    for cat in order {
        let cat_scores: Vec<f64> = results
            .iter()
            .filter(|r| r.category == cat)
            .map(|r| r.score)
            .collect();
        let (m, s) = mean_std(&cat_scores);
        categories.push(CategoryStats { category: cat, count: cat_scores.len(), mean: m, std: s });
    }

    Ok(Report {
        count: results.len(),
        mean,
        std,
        median: percentile(&sorted, 50.0),
        q1: percentile(&sorted, 25.0),
        q3: percentile(&sorted, 75.0),
        categories,
    })
}

impl Report {
    /// Summary CSV: one `overall` row then one row per category.
    pub fn write_csv(&self, w: &mut impl std::io::Write) -> Result<()> {
        writeln!(w, "category,count,mean,std,median,q1,q3")?;
        writeln!(
            w,
            "overall,{},{},{},{},{},{}",
            self.count, self.mean, self.std, self.median, self.q1, self.q3
        )?;
        for c in &self.categories {
            writeln!(w, "{},{},{},{},,,", c.category, c.count, c.mean, c.std)?;
        }
        Ok(())
    }
}

/// Per-example CSV with both metrics: `id,category,jaccard,dice`.
pub fn write_scores_csv(
    w: &mut impl std::io::Write,
    rows: &[(String, String, Overlap)],
) -> Result<()> {
    writeln!(w, "id,category,jaccard,dice")?;
    for (id, cat, ov) in rows {
        writeln!(w, "{id},{cat},{},{}", ov.jaccard, ov.dice)?;
    }
    Ok(())
}
