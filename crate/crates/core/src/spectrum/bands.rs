//! Band sets σ_k = {E : |x_k(E)| ≤ 1} of the periodic approximants.
//!
//! The p = F_k bands of σ_k are separated by the p − 1 eigenvalues of the
//! Dirichlet restriction to sites 1..p−1, which sit in the closed gaps.
//! Those eigenvalues are isolated by bisection on an eigenvalue count;
//! each band then holds exactly one zero of x_k, and its edges are found
//! by bisection on |x_k| = 1 on either side of that zero. No band can be
//! missed however narrow it is.

use rayon::prelude::*;

use super::bandset::BandSet;
use super::trace::{escape_test, half_trace, OrbitRecord};
use super::transfer::{fibonacci, potential_site, Mat2};
use crate::error::{domain, Error, Result};
use crate::geometry::Coupling;

pub const MAX_K: usize = 30;
pub const DEFAULT_ROOT_TOLERANCE: f64 = 1e-13;
const MAX_BISECTIONS: usize = 60;
/// Above this block length the O(k) lifted-angle count replaces the O(p)
/// Sturm count.
const STURM_LIMIT: u64 = 8192;

/// Number of eigenvalues below `e` of the Jacobi matrix with unit
/// off-diagonal and the given diagonal, from the signs of the LDLᵀ pivots.
pub fn sturm_count(e: f64, diagonal: &[f64]) -> usize {
    let mut count = 0;
    let mut d = 1.0f64;
    for (i, &v) in diagonal.iter().enumerate() {
        d = if i == 0 { v - e } else { (v - e) - 1.0 / d };
        if d == 0.0 {
            d = -f64::EPSILON * (1.0 + v.abs() + e.abs());
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// An SL(2,ℝ) element carried with a continuous lift of the angle of its
/// first column.
#[derive(Debug, Clone, Copy)]
struct Lifted {
    m: Mat2,
    angle: f64,
}

fn normalized(m: Mat2) -> Mat2 {
    let s = m[0][0].abs().max(m[0][1].abs()).max(m[1][0].abs()).max(m[1][1].abs());
    if s > 0.0 && s.is_finite() {
        [[m[0][0] / s, m[0][1] / s], [m[1][0] / s, m[1][1] / s]]
    } else {
        m
    }
}

fn compose(a: &Lifted, b: &Lifted) -> Lifted {
    use std::f64::consts::{PI, TAU};
    let m = normalized(super::transfer::mat2_mul(&a.m, &b.m));
    let n = (b.angle / PI).floor();
    let sign = if (n as i64).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let (w0, w1) = (sign * b.m[0][0], sign * b.m[1][0]);
    let au = (a.m[0][0] * w0 + a.m[0][1] * w1, a.m[1][0] * w0 + a.m[1][1] * w1);
    let ae = (a.m[0][0], a.m[1][0]);
    let mut d = (au.1.atan2(au.0) - ae.1.atan2(ae.0)).rem_euclid(TAU);
    if d > 1.5 * PI {
        d -= TAU;
    }
    Lifted { m, angle: a.angle + d + n * PI }
}

/// Dirichlet eigenvalue count below `e` for block k from the rotation of
/// the lifted block matrix, in O(k).
pub fn lifted_dirichlet_count(k: u32, e: f64, v: f64) -> usize {
    let mut prev = Lifted { m: [[1.0, -v], [0.0, 1.0]], angle: 0.0 };
    let mut cur = Lifted { m: [[e, -1.0], [1.0, 0.0]], angle: 1.0f64.atan2(e) };
    if k == 0 {
        return 0;
    }
    for _ in 0..k {
        let next = compose(&prev, &cur);
        prev = cur;
        cur = next;
    }
    let p = fibonacci(k) as i64;
    let turns = (cur.angle / std::f64::consts::PI).floor() as i64;
    (p - 1 - turns).clamp(0, p - 1) as usize
}

/// Diagonal of the Dirichlet block on sites 1..F_k − 1.
pub fn dirichlet_diagonal(k: u32, v: f64) -> Vec<f64> {
    let p = fibonacci(k);
    (1..p).map(|m| if potential_site(m) { v } else { 0.0 }).collect()
}

struct Counter {
    k: u32,
    v: f64,
    diagonal: Option<Vec<f64>>,
}

impl Counter {
    fn new(k: u32, v: f64) -> Self {
        let diagonal = (fibonacci(k) <= STURM_LIMIT).then(|| dirichlet_diagonal(k, v));
        Counter { k, v, diagonal }
    }

    fn count(&self, e: f64) -> usize {
        match &self.diagonal {
            Some(d) => sturm_count(e, d),
            None => lifted_dirichlet_count(self.k, e, self.v),
        }
    }
}

fn isolate(c: &Counter, lo: f64, hi: f64, clo: usize, chi: usize, tol: f64, out: &mut Vec<(f64, f64)>) {
    if chi <= clo {
        return;
    }
    let mid = 0.5 * (lo + hi);
    if hi - lo <= tol || mid <= lo || mid >= hi {
        out.extend(std::iter::repeat_n((lo, hi), chi - clo));
        return;
    }
    let cm = c.count(mid).clamp(clo, chi);
    isolate(c, lo, mid, clo, cm, tol, out);
    isolate(c, mid, hi, cm, chi, tol, out);
}

/// Brackets of width ≤ `tol` around each Dirichlet eigenvalue, in order.
pub fn dirichlet_brackets(k: u32, v: f64, lo: f64, hi: f64, tol: f64) -> Vec<(f64, f64)> {
    let c = Counter::new(k, v);
    let chunks = 64usize;
    let h = (hi - lo) / chunks as f64;
    let nodes: Vec<f64> = (0..=chunks).map(|i| if i == chunks { hi } else { lo + h * i as f64 }).collect();
    let counts: Vec<usize> = nodes.par_iter().map(|&e| c.count(e)).collect();
    let parts: Vec<Vec<(f64, f64)>> = (0..chunks)
        .into_par_iter()
        .map(|i| {
            let mut out = Vec::new();
            isolate(&c, nodes[i], nodes[i + 1], counts[i], counts[i + 1].max(counts[i]), tol, &mut out);
            out
        })
        .collect();
    parts.concat()
}

fn bisect<F: Fn(f64) -> bool>(pred: F, mut yes: f64, mut no: f64, tol: f64) -> f64 {
    for _ in 0..MAX_BISECTIONS {
        if (yes - no).abs() <= tol {
            break;
        }
        let mid = 0.5 * (yes + no);
        if mid == yes || mid == no {
            break;
        }
        if pred(mid) {
            yes = mid;
        } else {
            no = mid;
        }
    }
    yes
}

/// Locates the band between two Dirichlet brackets. `inner` lies between
/// the brackets, `outer` spans them; a band edge that coincides with a
/// Dirichlet eigenvalue is pinned inside its bracket.
fn band_in(k: i32, v: f64, inner: (f64, f64), outer: (f64, f64), tol: f64) -> Result<(f64, f64)> {
    let x = |e: f64| half_trace(k, e, v);
    let (lo, hi) = inner;
    let (xl, xh) = (x(lo), x(hi));
    let root = if xl.signum() == xh.signum() && xl != 0.0 && xh != 0.0 {
        // A band narrower than the rounding noise of x_k: fall back to the
        // smallest sampled |x_k|.
        let n = 256;
        let (e, xe) = (0..=n)
            .map(|i| {
                let e = lo + (hi - lo) * i as f64 / n as f64;
                (e, x(e))
            })
            .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .expect("nonempty sample");
        if !(xe.abs() <= 1.0) {
            return Err(Error::Numeric(format!(
                "band of x_{k} on [{lo}, {hi}] not resolved in double precision (min |x| = {xe})"
            )));
        }
        e
    } else {
        let neg_lo = xl < 0.0;
        bisect(|e| (x(e) < 0.0) == neg_lo, lo, hi, tol)
    };
    // Inside the band, s·x < 1 where s is the sign of x across the
    // adjacent gap; this stays monotone even when the neighbouring band
    // ends exactly on the Dirichlet eigenvalue.
    let edge = |inner_end: f64, outer_end: f64| {
        let s = if x(inner_end) < 0.0 { -1.0 } else { 1.0 };
        let inside = |e: f64| s * x(e) < 1.0;
        if !inside(inner_end) {
            bisect(inside, root, inner_end, tol)
        } else if !inside(outer_end) {
            bisect(inside, inner_end, outer_end, tol)
        } else {
            0.5 * (inner_end + outer_end)
        }
    };
    let left = edge(lo, outer.0);
    let right = edge(hi, outer.1);
    Ok((left.min(root), right.max(root)))
}

/// The band set σ_k for 1 ≤ k ≤ 30, band edges to within `root_tolerance`.
pub fn approximant_bands(k: usize, c: Coupling, root_tolerance: f64) -> Result<BandSet> {
    if !(1..=MAX_K).contains(&k) {
        return domain(format!("approximant index must lie in 1..={MAX_K}, got {k}"));
    }
    if !(root_tolerance > 0.0) {
        return domain(format!("root tolerance must be positive, got {root_tolerance}"));
    }
    let v = c.v();
    let (lo, hi) = (-2.5, 2.5 + v);
    let brackets = dirichlet_brackets(k as u32, v, lo, hi, root_tolerance);
    let p = fibonacci(k as u32) as usize;
    if brackets.len() != p - 1 {
        return Err(Error::Numeric(format!(
            "isolated {} Dirichlet eigenvalues, expected {}",
            brackets.len(),
            p - 1
        )));
    }
    let bands: Result<Vec<(f64, f64)>> = (0..p)
        .into_par_iter()
        .map(|j| {
            let (oa, ia) = if j == 0 { (lo, lo) } else { brackets[j - 1] };
            let (ib, ob) = if j + 1 == p { (hi, hi) } else { brackets[j] };
            band_in(k as i32, v, (ia, ib), (oa, ob), root_tolerance)
        })
        .collect();
    let mut out = BandSet::from_unsorted(bands?, 0.0, k as i64)?;
    out.resolution = root_tolerance;
    Ok(out)
}

/// σ_k ∪ σ_{k+1}, merged across gaps no wider than `resolution`.
pub fn spectrum_cover(c: Coupling, k: usize, resolution: f64) -> Result<BandSet> {
    spectrum_cover_with_tolerance(c, k, resolution, DEFAULT_ROOT_TOLERANCE)
}

pub fn spectrum_cover_with_tolerance(c: Coupling, k: usize, resolution: f64, root_tolerance: f64) -> Result<BandSet> {
    if k < 1 || k + 1 > MAX_K {
        return domain(format!("cover index must lie in 1..={}, got {k}", MAX_K - 1));
    }
    if !(resolution >= 0.0 && resolution.is_finite()) {
        return domain(format!("resolution must be finite and non-negative, got {resolution}"));
    }
    let a = approximant_bands(k, c, root_tolerance)?;
    let b = approximant_bands(k + 1, c, root_tolerance)?;
    let mut u = a.union(&b, resolution)?;
    u.generation = k as i64;
    u.resolution = resolution;
    Ok(u)
}

/// Escape test over an evenly spaced energy grid, in grid order.
pub fn escape_sweep(
    c: Coupling,
    e_lo: f64,
    e_hi: f64,
    points: usize,
    n_max: usize,
    escape_radius: f64,
) -> Result<Vec<(f64, OrbitRecord)>> {
    if points < 2 || !(e_lo < e_hi) {
        return domain("escape sweep needs at least two points on an increasing range");
    }
    let h = (e_hi - e_lo) / (points - 1) as f64;
    (0..points)
        .into_par_iter()
        .map(|i| {
            let e = if i + 1 == points { e_hi } else { e_lo + h * i as f64 };
            escape_test(e, c, n_max, escape_radius).map(|r| (e, r))
        })
        .collect()
}
