//! Box-counting dimension of finite interval approximations.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::geometry::Coupling;
use crate::spectrum::{spectrum_cover, BandSet};

/// Fits with an RMS residual above this are flagged.
pub const POOR_FIT: f64 = 0.05;
pub const MIN_SCALES: usize = 5;
/// log(1 + √2), the large-coupling limit of dim · log V.
pub const ASYMPTOTE: f64 = 0.881_373_587_019_543;

/// A decreasing geometric sequence of box sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsGrid {
    pub scales: Vec<f64>,
}

impl EpsGrid {
    /// eps_max, eps_max·ratio, … down to the last scale ≥ eps_min.
    pub fn geometric(eps_max: f64, eps_min: f64, ratio: f64) -> Result<Self> {
        if !(eps_max > 0.0 && eps_min > 0.0 && eps_min <= eps_max && eps_max.is_finite()) {
            return domain(format!("invalid scale range [{eps_min}, {eps_max}]"));
        }
        if !(ratio > 0.0 && ratio <= 0.5) {
            return domain(format!("scale ratio must lie in (0, 1/2], got {ratio}"));
        }
        let mut scales = Vec::new();
        let mut e = eps_max;
        while e >= eps_min * (1.0 - 1e-12) {
            scales.push(e);
            e *= ratio;
        }
        Ok(EpsGrid { scales })
    }

    /// `count` scales starting at eps_max.
    pub fn with_count(eps_max: f64, ratio: f64, count: usize) -> Result<Self> {
        let eps_min = eps_max * ratio.powi(count.saturating_sub(1) as i32);
        let mut g = Self::geometric(eps_max, eps_min, ratio)?;
        g.scales.truncate(count);
        Ok(g)
    }

    /// Checks that explicit scales decrease geometrically with ratio ≤ 1/2.
    pub fn from_scales(scales: Vec<f64>) -> Result<Self> {
        if scales.len() < 2 {
            return Ok(EpsGrid { scales });
        }
        if scales.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return domain("scales must be positive and finite");
        }
        let r = scales[1] / scales[0];
        if !(r <= 0.5) {
            return domain(format!("scale ratio must be at most 1/2, got {r}"));
        }
        for w in scales.windows(2) {
            if ((w[1] / w[0]) - r).abs() > 1e-9 * r {
                return domain("scales are not geometric");
            }
        }
        Ok(EpsGrid { scales })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionEstimate {
    /// Slope clamped into [0, 1].
    pub value: f64,
    pub raw_slope: f64,
    pub scale_range: (f64, f64),
    /// RMS residual of the log-log fit.
    pub regression_residual: f64,
    pub poor_fit: bool,
    /// (ε, N(ε)) in the order of the grid.
    pub counts: Vec<(f64, u64)>,
}

/// Number of closed grid boxes [jε, (j+1)ε] needed to cover the set.
pub fn box_count(b: &BandSet, eps: f64) -> Result<u64> {
    if !(eps > 0.0 && eps.is_finite()) {
        return domain(format!("box size must be positive, got {eps}"));
    }
    if b.is_empty() {
        return domain("cannot count boxes of an empty set");
    }
    let mut count = 0u64;
    let mut last: Option<i64> = None;
    for &(lo, hi) in &b.intervals {
        let (qlo, qhi) = (lo / eps, hi / eps);
        if qlo.abs().max(qhi.abs()) > 4e15 {
            return domain(format!("box size {eps} too small for the set's extent"));
        }
        let first = qlo.floor() as i64;
        let end = if hi > lo { (qhi.ceil() as i64 - 1).max(first) } else { first };
        let start = match last {
            Some(l) if first <= l => l + 1,
            _ => first,
        };
        if end >= start {
            count += (end - start + 1) as u64;
            last = Some(end);
        }
    }
    Ok(count)
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Slope of log N(ε) against log(1/ε) over the usable scales of the grid,
/// those at least four times the set's resolution.
pub fn box_dimension(b: &BandSet, grid: &EpsGrid) -> Result<DimensionEstimate> {
    let floor = 4.0 * b.resolution;
    let usable: Vec<f64> = grid.scales.iter().copied().filter(|&e| e >= floor).collect();
    if usable.len() < MIN_SCALES {
        return domain(format!(
            "only {} usable scales (need {MIN_SCALES}) above 4 x resolution {}",
            usable.len(),
            b.resolution
        ));
    }
    let counts: Vec<(f64, u64)> = usable
        .iter()
        .map(|&e| box_count(b, e).map(|n| (e, n)))
        .collect::<Result<_>>()?;
    let xs: Vec<f64> = counts.iter().map(|(e, _)| (1.0 / e).ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|(_, n)| (*n as f64).ln()).collect();
    let (slope, icpt) = least_squares(&xs, &ys);
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - slope * x - icpt).powi(2)).sum();
    let residual = (rss / xs.len() as f64).sqrt();
    let lo = usable.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = usable.iter().copied().fold(0.0, f64::max);
    Ok(DimensionEstimate {
        value: slope.clamp(0.0, 1.0),
        raw_slope: slope,
        scale_range: (lo, hi),
        regression_residual: residual,
        poor_fit: residual > POOR_FIT,
        counts,
    })
}

/// Box dimension of the part of the set inside [lo, hi].
pub fn local_dimension(b: &BandSet, window: (f64, f64), grid: &EpsGrid) -> Result<DimensionEstimate> {
    let part = b.clip(window.0, window.1);
    if part.is_empty() {
        return domain(format!("window [{}, {}] misses the set", window.0, window.1));
    }
    box_dimension(&part, grid)
}

/// Depth-n approximation of the attractor of x ↦ rx and x ↦ rx + 1 − r.
pub fn cantor_set(ratio: f64, depth: u32) -> Result<BandSet> {
    if !(ratio > 0.0 && ratio < 0.5) {
        return domain(format!("contraction ratio must lie in (0, 1/2), got {ratio}"));
    }
    if depth > 24 {
        return domain(format!("depth {depth} too large"));
    }
    let mut iv = vec![(0.0f64, 1.0f64)];
    for _ in 0..depth {
        iv = iv
            .iter()
            .flat_map(|&(a, b)| {
                let w = (b - a) * ratio;
                [(a, a + w), (b - w, b)]
            })
            .collect();
    }
    let mut out = BandSet::new(iv, depth as i64)?;
    out.resolution = ratio.powi(depth as i32);
    Ok(out)
}

/// One row of the large-coupling table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoteRow {
    pub coupling: f64,
    pub k: usize,
    pub bands: usize,
    pub min_band_width: f64,
    pub dimension: f64,
    pub dim_log_v: f64,
    pub estimate: DimensionEstimate,
}

/// Smallest band width, relative to the energy window 4 + V, that the
/// automatic choice of k accepts.
pub const AUTO_K_WIDTH: f64 = 1e-13;
pub const AUTO_K_MAX: usize = 16;

/// Largest k ≤ 16 whose cover σ_k ∪ σ_{k+1} resolves in double precision
/// with every band wider than `AUTO_K_WIDTH · (4 + V)`.
pub fn auto_k(c: Coupling) -> Result<usize> {
    let floor = AUTO_K_WIDTH * (4.0 + c.v());
    let mut best = 3;
    for k in 4..=AUTO_K_MAX {
        match spectrum_cover(c, k, 0.0) {
            Ok(cover) if cover.min_width() >= floor => best = k,
            _ => break,
        }
    }
    Ok(best)
}

/// Dimension estimates of spectrum covers for large couplings, with box
/// sizes from `eps_max` down to four times the widest band.
pub fn asymptote_check(couplings: &[f64], k: Option<usize>, eps_max: f64, eps_ratio: f64) -> Result<Vec<AsymptoteRow>> {
    couplings
        .iter()
        .map(|&v| {
            if !(v >= 16.0) {
                return domain(format!("couplings must be at least 16, got {v}"));
            }
            let c = Coupling::new(v)?;
            let k = match k {
                Some(k) => k,
                None => auto_k(c)?,
            };
            let cover = spectrum_cover(c, k, 0.0)?;
            let native = cover.max_width();
            let cover = cover.with_resolution(native);
            let grid = EpsGrid::geometric(eps_max, 4.0 * native, eps_ratio)?;
            let estimate = box_dimension(&cover, &grid)?;
            Ok(AsymptoteRow {
                coupling: v,
                k,
                bands: cover.len(),
                min_band_width: cover.min_width(),
                dimension: estimate.value,
                dim_log_v: estimate.value * v.ln(),
                estimate,
            })
        })
        .collect()
}
