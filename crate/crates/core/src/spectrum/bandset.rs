use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// A finite union of disjoint closed intervals, sorted by left end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandSet {
    pub intervals: Vec<(f64, f64)>,
    /// Approximant index or refinement depth that produced the set.
    pub generation: i64,
    /// Finest scale at which the set is meaningful: the merge tolerance
    /// or construction scale. Zero for exact sets.
    pub resolution: f64,
}

impl BandSet {
    /// Validates sortedness, disjointness and lo ≤ hi.
    pub fn new(intervals: Vec<(f64, f64)>, generation: i64) -> Result<Self> {
        for &(lo, hi) in &intervals {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return domain(format!("invalid interval [{lo}, {hi}]"));
            }
        }
        for w in intervals.windows(2) {
            if !(w[1].0 > w[0].1) {
                return domain(format!(
                    "intervals [{}, {}] and [{}, {}] are not sorted and disjoint",
                    w[0].0, w[0].1, w[1].0, w[1].1
                ));
            }
        }
        Ok(BandSet { intervals, generation, resolution: 0.0 })
    }

    pub fn empty(generation: i64) -> Self {
        BandSet { intervals: Vec::new(), generation, resolution: 0.0 }
    }

    /// Sorts and merges intervals whose gap is at most `gap_tolerance`.
    pub fn from_unsorted(mut intervals: Vec<(f64, f64)>, gap_tolerance: f64, generation: i64) -> Result<Self> {
        for &(lo, hi) in &intervals {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return domain(format!("invalid interval [{lo}, {hi}]"));
            }
        }
        if !(gap_tolerance >= 0.0) {
            return domain(format!("gap tolerance must be non-negative, got {gap_tolerance}"));
        }
        intervals.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(intervals.len());
        for (lo, hi) in intervals {
            match out.last_mut() {
                Some(last) if lo <= last.1 + gap_tolerance => last.1 = last.1.max(hi),
                _ => out.push((lo, hi)),
            }
        }
        Ok(BandSet { intervals: out, generation, resolution: gap_tolerance })
    }

    pub fn with_resolution(mut self, resolution: f64) -> Self {
        self.resolution = resolution;
        self
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|(lo, hi)| hi - lo).sum()
    }

    pub fn max_width(&self) -> f64 {
        self.intervals.iter().map(|(lo, hi)| hi - lo).fold(0.0, f64::max)
    }

    pub fn min_width(&self) -> f64 {
        self.intervals.iter().map(|(lo, hi)| hi - lo).fold(f64::INFINITY, f64::min)
    }

    pub fn bounds(&self) -> Option<(f64, f64)> {
        Some((self.intervals.first()?.0, self.intervals.last()?.1))
    }

    /// Union with another set, merging gaps up to `gap_tolerance`.
    pub fn union(&self, other: &BandSet, gap_tolerance: f64) -> Result<BandSet> {
        let mut all = self.intervals.clone();
        all.extend_from_slice(&other.intervals);
        let mut out = BandSet::from_unsorted(all, gap_tolerance, self.generation.min(other.generation))?;
        out.resolution = gap_tolerance.max(self.resolution).max(other.resolution);
        Ok(out)
    }

    /// Intersection with the closed window [lo, hi].
    pub fn clip(&self, lo: f64, hi: f64) -> BandSet {
        let intervals = self
            .intervals
            .iter()
            .filter(|&&(a, b)| b >= lo && a <= hi)
            .map(|&(a, b)| (a.max(lo), b.min(hi)))
            .collect();
        BandSet { intervals, generation: self.generation, resolution: self.resolution }
    }

    /// Whether `e` lies within `slack` of the set.
    pub fn contains(&self, e: f64, slack: f64) -> bool {
        let i = self.intervals.partition_point(|&(_, hi)| hi + slack < e);
        self.intervals.get(i).is_some_and(|&(lo, _)| lo - slack <= e)
    }

    /// Distance from `e` to the set.
    pub fn distance(&self, e: f64) -> f64 {
        let i = self.intervals.partition_point(|&(_, hi)| hi < e);
        let mut d = f64::INFINITY;
        if let Some(&(lo, _)) = self.intervals.get(i) {
            d = (lo - e).max(0.0);
        }
        if i > 0 {
            d = d.min(e - self.intervals[i - 1].1);
        }
        d
    }
}

/// Total length Σ(hi − lo).
pub fn band_measure(b: &BandSet) -> f64 {
    b.measure()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measure_examples() {
        assert_eq!(band_measure(&BandSet::new(vec![(-2.0, 2.0)], 0).unwrap()), 4.0);
        assert_eq!(band_measure(&BandSet::empty(0)), 0.0);
        assert_eq!(band_measure(&BandSet::new(vec![(0.0, 1.0), (2.0, 2.5)], 0).unwrap()), 1.5);
    }

    #[test]
    fn validation_and_merge() {
        assert!(BandSet::new(vec![(0.0, 1.0), (1.0, 2.0)], 0).is_err());
        assert!(BandSet::new(vec![(1.0, 0.0)], 0).is_err());
        let b = BandSet::from_unsorted(vec![(2.0, 3.0), (0.0, 1.0), (1.05, 1.5)], 0.1, 0).unwrap();
        assert_eq!(b.intervals, vec![(0.0, 1.5), (2.0, 3.0)]);
        assert!(b.contains(1.2, 0.0) && !b.contains(1.7, 0.0) && b.contains(1.95, 0.06));
        assert_eq!(b.distance(1.75), 0.25);
        assert_eq!(b.clip(1.0, 2.5).intervals, vec![(1.0, 1.5), (2.0, 2.5)]);
    }
}
