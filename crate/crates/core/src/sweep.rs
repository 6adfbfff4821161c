//! Robustness sweeps: certify perturbed canonical configurations over a grid
//! of perturbation sizes and seeds.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certify::certify_config;
use crate::clifford::{clifford_family, perturb_pointset, projector_pointset};
use crate::error::{Error, Result};
use crate::report::fmt_f64;

/// One `(delta, seed)` cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub delta: f64,
    pub seed: u64,
    pub delta_observed: f64,
    pub max_pre_block_ac: f64,
    pub mean_pre_block_ac: f64,
    pub max_commutation: f64,
    pub final_ac_mean_sq: f64,
    pub block_dim: usize,
    pub block_trace_fraction: f64,
}

/// Medians over the seeds of one `delta`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub delta: f64,
    pub cells: usize,
    pub delta_observed: f64,
    pub max_pre_block_ac: f64,
    pub mean_pre_block_ac: f64,
    pub max_commutation: f64,
    pub final_ac_mean_sq: f64,
    pub block_dim: f64,
    pub block_trace_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub n: usize,
    pub cells: Vec<SweepCell>,
    pub summaries: Vec<SweepSummary>,
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.is_empty() {
        f64::NAN
    } else if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let avg = (start + end - 1) as f64 / 2.0 + 1.0;
        for &k in &order[start..end] {
            out[k] = avg;
        }
        start = end;
    }
    out
}

/// Spearman rank correlation with average ranks for ties. NaN when either
/// side is constant or the lengths differ.
pub fn spearman_rho(x: &[f64], y: &[f64]) -> f64 {
    if x.len() != y.len() || x.len() < 2 {
        return f64::NAN;
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let mean = (x.len() as f64 + 1.0) / 2.0;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mean) * (b - mean);
        sxx += (a - mean) * (a - mean);
        syy += (b - mean) * (b - mean);
    }
    sxy / (sxx * syy).sqrt()
}

/// Certifies `seeds` perturbations of the canonical configuration of `n`
/// pairs at every `delta` of the grid. Cell seeds are `base_seed + s`, the
/// same for every `delta`, so the grid compares like with like.
pub fn run_sweep(n: usize, grid: &[f64], seeds: usize, base_seed: u64) -> Result<SweepTable> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("delta grid is empty".into()));
    }
    if seeds == 0 {
        return Err(Error::InvalidParameter("seed count must be positive".into()));
    }
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n = {n} must be at least 2")));
    }
    let mut deltas = grid.to_vec();
    for &d in &deltas {
        if !(0.0..=1.0).contains(&d) {
            return Err(Error::InvalidParameter(format!("grid value {d} outside [0, 1]")));
        }
    }
    deltas.sort_by(f64::total_cmp);
    deltas.dedup();
    let canonical = projector_pointset(&clifford_family(n)?);
    let jobs: Vec<(f64, u64)> = deltas
        .iter()
        .flat_map(|&d| (0..seeds as u64).map(move |s| (d, base_seed.wrapping_add(s))))
        .collect();
    let cells = jobs
        .par_iter()
        .map(|&(delta, seed)| -> Result<SweepCell> {
            let cfg = perturb_pointset(&canonical, delta, seed)?;
            let r = certify_config(&cfg)?;
            Ok(SweepCell {
                delta,
                seed,
                delta_observed: r.input_delta,
                max_pre_block_ac: r.max_pre_block_ac(),
                mean_pre_block_ac: r.mean_pre_block_ac(),
                max_commutation: r.max_commutation(),
                final_ac_mean_sq: r.final_ac_mean_sq,
                block_dim: r.block_dim,
                block_trace_fraction: r.block_trace_fraction,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let summaries = deltas
        .iter()
        .map(|&delta| {
            let group: Vec<&SweepCell> = cells.iter().filter(|c| c.delta == delta).collect();
            let med = |f: fn(&SweepCell) -> f64| median(&group.iter().map(|c| f(c)).collect::<Vec<_>>());
            SweepSummary {
                delta,
                cells: group.len(),
                delta_observed: med(|c| c.delta_observed),
                max_pre_block_ac: med(|c| c.max_pre_block_ac),
                mean_pre_block_ac: med(|c| c.mean_pre_block_ac),
                max_commutation: med(|c| c.max_commutation),
                final_ac_mean_sq: med(|c| c.final_ac_mean_sq),
                block_dim: med(|c| c.block_dim as f64),
                block_trace_fraction: med(|c| c.block_trace_fraction),
            }
        })
        .collect();
    Ok(SweepTable { n, cells, summaries })
}

impl SweepTable {
    /// Spearman correlation between `delta` and the median `final_ac_mean_sq`.
    pub fn median_trend(&self) -> f64 {
        let d: Vec<f64> = self.summaries.iter().map(|s| s.delta).collect();
        let f: Vec<f64> = self.summaries.iter().map(|s| s.final_ac_mean_sq).collect();
        spearman_rho(&d, &f)
    }

    /// Cell rows for each `delta` in seed order, followed by its summary row.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "kind",
            "n",
            "delta",
            "seed",
            "delta_observed",
            "max_pre_block_ac",
            "mean_pre_block_ac",
            "max_commutation",
            "final_ac_mean_sq",
            "block_dim",
            "block_trace_fraction",
        ])?;
        for s in &self.summaries {
            let mut group: Vec<&SweepCell> = self.cells.iter().filter(|c| c.delta == s.delta).collect();
            group.sort_by_key(|c| c.seed);
            for c in group {
                w.write_record([
                    "cell".to_string(),
                    self.n.to_string(),
                    fmt_f64(c.delta),
                    c.seed.to_string(),
                    fmt_f64(c.delta_observed),
                    fmt_f64(c.max_pre_block_ac),
                    fmt_f64(c.mean_pre_block_ac),
                    fmt_f64(c.max_commutation),
                    fmt_f64(c.final_ac_mean_sq),
                    c.block_dim.to_string(),
                    fmt_f64(c.block_trace_fraction),
                ])?;
            }
            w.write_record([
                "median".to_string(),
                self.n.to_string(),
                fmt_f64(s.delta),
                String::new(),
                fmt_f64(s.delta_observed),
                fmt_f64(s.max_pre_block_ac),
                fmt_f64(s.mean_pre_block_ac),
                fmt_f64(s.max_commutation),
                fmt_f64(s.final_ac_mean_sq),
                fmt_f64(s.block_dim),
                fmt_f64(s.block_trace_fraction),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spearman_examples() {
        assert_eq!(spearman_rho(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]), 1.0);
        assert_eq!(spearman_rho(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]), -1.0);
        assert!(spearman_rho(&[1.0, 2.0], &[5.0, 5.0]).is_nan());
        let r = spearman_rho(&[1.0, 2.0, 3.0, 4.0], &[1.0, 1.0, 2.0, 3.0]);
        assert!(r > 0.9 && r < 1.0);
    }

    #[test]
    fn median_examples() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn sweep_shape() {
        let t = run_sweep(2, &[1e-3, 0.0], 3, 7).unwrap();
        assert_eq!(t.cells.len(), 6);
        assert_eq!(t.summaries.len(), 2);
        assert_eq!(t.summaries[0].delta, 0.0);
        assert!(t.summaries[0].final_ac_mean_sq <= 1e-10);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1 + 6 + 2);
    }

    #[test]
    fn sweep_rejects_bad_grid() {
        assert!(run_sweep(4, &[], 3, 0).is_err());
        assert!(run_sweep(4, &[2.0], 3, 0).is_err());
        assert!(run_sweep(4, &[0.1], 0, 0).is_err());
    }
}
