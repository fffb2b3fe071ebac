//! The half-trace recursion x_{k+1} = 2 x_k x_{k−1} − x_{k−2} and the
//! boundedness test along the line ℓ_V.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::geometry::{line_point, Coupling, Point3};

/// Magnitude past which a trace sequence is cut off as escaped.
pub const OVERFLOW: f64 = 1e300;

/// Three consecutive half-traces (x_{k−2}, x_{k−1}, x_k).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceSequenceState {
    pub x_prev2: f64,
    pub x_prev1: f64,
    pub x_curr: f64,
    pub k: i64,
}

impl TraceSequenceState {
    /// The state at k = 1: (x₋₁, x₀, x₁) = (1, E/2, (E−V)/2).
    pub fn seed(energy: f64, c: Coupling) -> Self {
        TraceSequenceState { x_prev2: 1.0, x_prev1: 0.5 * energy, x_curr: 0.5 * (energy - c.v()), k: 1 }
    }

    pub fn advance(&mut self) {
        let next = 2.0 * self.x_curr * self.x_prev1 - self.x_prev2;
        self.x_prev2 = self.x_prev1;
        self.x_prev1 = self.x_curr;
        self.x_curr = next;
        self.k += 1;
    }

    /// The Fricke combination of the three stored values.
    pub fn fricke(&self) -> f64 {
        let (a, b, c) = (self.x_curr, self.x_prev1, self.x_prev2);
        a * a + b * b + c * c - 2.0 * a * b * c - 1.0
    }

    /// Sum of the magnitudes of the monomials in the Fricke combination,
    /// the natural scale for its rounding error.
    pub fn fricke_scale(&self) -> f64 {
        let (a, b, c) = (self.x_curr, self.x_prev1, self.x_prev2);
        a * a + b * b + c * c + 2.0 * (a * b * c).abs() + 1.0
    }

    pub fn as_point(&self) -> Point3 {
        Point3::new(self.x_curr, self.x_prev1, self.x_prev2)
    }
}

/// The half-traces x₋₁, x₀, …, x_{k_last}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSequence {
    pub energy: f64,
    pub coupling: Coupling,
    /// values[j] = x_{j−1}.
    pub values: Vec<f64>,
    /// Set when the sequence was cut short by overflow.
    pub escaped: bool,
}

impl TraceSequence {
    pub fn get(&self, k: i64) -> Option<f64> {
        usize::try_from(k + 1).ok().and_then(|i| self.values.get(i).copied())
    }

    pub fn last_index(&self) -> i64 {
        self.values.len() as i64 - 2
    }
}

pub fn trace_sequence(energy: f64, c: Coupling, k_max: usize) -> Result<TraceSequence> {
    if k_max < 1 {
        return domain("k_max must be at least 1");
    }
    if !energy.is_finite() {
        return domain(format!("non-finite energy {energy}"));
    }
    let mut s = TraceSequenceState::seed(energy, c);
    let mut values = vec![s.x_prev2, s.x_prev1, s.x_curr];
    let mut escaped = false;
    for _ in 1..k_max {
        s.advance();
        if !(s.x_curr.abs() <= OVERFLOW) {
            escaped = true;
            break;
        }
        values.push(s.x_curr);
    }
    Ok(TraceSequence { energy, coupling: c, values, escaped })
}

/// x_k(E) by the recursion, continued in sign/log form once the sequence
/// has certainly escaped, so the result is never NaN. Huge values come
/// back as ±∞.
pub fn half_trace(k: i32, energy: f64, v: f64) -> f64 {
    let (mut a, mut b, mut c) = (1.0f64, 0.5 * energy, 0.5 * (energy - v));
    match k {
        i32::MIN..=-1 => return a,
        0 => return b,
        _ => {}
    }
    let mut j = 1;
    while j < k {
        if c.abs() > 1e100 && b.abs() > 1.0 {
            let (mut sb, mut lb) = (b.signum(), b.abs().ln());
            let (mut sc, mut lc) = (c.signum(), c.abs().ln());
            while j < k {
                let (sn, ln) = (sb * sc, std::f64::consts::LN_2 + lb + lc);
                sb = sc;
                lb = lc;
                sc = sn;
                lc = ln;
                j += 1;
            }
            return if lc > 709.0 { sc * f64::INFINITY } else { sc * lc.exp() };
        }
        let next = 2.0 * c * b - a;
        a = b;
        b = c;
        c = next;
        j += 1;
    }
    c
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrbitStatus {
    BoundedSoFar,
    Escaped,
}

/// Outcome of iterating the trace map from a point of ℓ_V.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub start: Point3,
    pub status: OrbitStatus,
    pub steps_used: usize,
    pub escape_index: Option<usize>,
    pub max_norm: f64,
    /// Escape was declared because an iterate stopped being finite.
    pub nonfinite: bool,
}

fn escaped_now(p: &Point3, radius: f64) -> bool {
    p.y.abs() > 1.0 && p.x.abs() > 1.0 && p.x.abs() > radius
}

/// Iterates T from ((E−V)/2, E/2, 1) until two consecutive half-traces
/// exceed 1 in magnitude with the later one past `escape_radius`.
pub fn escape_test(energy: f64, c: Coupling, n_max: usize, escape_radius: f64) -> Result<OrbitRecord> {
    if n_max < 1 {
        return domain("n_max must be at least 1");
    }
    if !(escape_radius > 1.0 && escape_radius.is_finite()) {
        return domain(format!("escape radius must exceed 1, got {escape_radius}"));
    }
    if !energy.is_finite() {
        return domain(format!("non-finite energy {energy}"));
    }
    let start = line_point(energy, c);
    let mut rec = OrbitRecord {
        start,
        status: OrbitStatus::BoundedSoFar,
        steps_used: 0,
        escape_index: None,
        max_norm: start.sup_norm(),
        nonfinite: false,
    };
    if escaped_now(&start, escape_radius) {
        rec.status = OrbitStatus::Escaped;
        rec.escape_index = Some(0);
        return Ok(rec);
    }
    let mut p = start;
    for step in 1..=n_max {
        p = p.forward();
        rec.steps_used = step;
        if !p.is_finite() {
            rec.nonfinite = true;
            rec.status = OrbitStatus::Escaped;
            rec.escape_index = Some(step);
            return Ok(rec);
        }
        rec.max_norm = rec.max_norm.max(p.sup_norm());
        if escaped_now(&p, escape_radius) {
            rec.status = OrbitStatus::Escaped;
            rec.escape_index = Some(step);
            return Ok(rec);
        }
    }
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: f64) -> Coupling {
        Coupling::new(v).unwrap()
    }

    #[test]
    fn sequence_examples() {
        let s = trace_sequence(2.0, c(0.0), 30).unwrap();
        assert!(s.values.iter().all(|&x| x == 1.0));
        let s = trace_sequence(0.0, c(0.0), 5).unwrap();
        let want = [1.0, 0.0, 0.0, -1.0, 0.0, 0.0, 1.0];
        assert_eq!(s.values.len(), want.len());
        for (a, b) in s.values.iter().zip(want) {
            assert!(*a == b);
        }
        let s = trace_sequence(3.0, c(0.0), 40).unwrap();
        assert!(s.escaped);
        assert!(s.values.windows(2).skip(2).all(|w| w[1] > w[0]));
        assert!(trace_sequence(0.0, c(0.0), 0).is_err());
    }

    #[test]
    fn half_trace_matches_sequence() {
        for &(e, v) in &[(0.3, 1.0), (-1.7, 0.1), (2.9, 4.0), (5.0, 0.0)] {
            let s = trace_sequence(e, c(v), 12).unwrap();
            for k in -1..=s.last_index() {
                assert_eq!(half_trace(k as i32, e, v), s.get(k).unwrap());
            }
        }
        let big = half_trace(40, 3.0, 0.0);
        assert!(big.is_infinite() && big > 0.0);
        assert!(!half_trace(60, -3.1, 2.0).is_nan());
    }

    #[test]
    fn escape_examples() {
        let r = escape_test(0.0, c(0.0), 1000, 2.0).unwrap();
        assert_eq!((r.status, r.steps_used), (OrbitStatus::BoundedSoFar, 1000));
        let r = escape_test(10.0, c(1.0), 10, 2.0).unwrap();
        assert_eq!(r.status, OrbitStatus::Escaped);
        assert!(r.escape_index.unwrap() <= r.steps_used);
        let r = escape_test(2.0, c(0.0), 500, 2.0).unwrap();
        assert_eq!(r.status, OrbitStatus::BoundedSoFar);
        assert_eq!(r.max_norm, 1.0);
        assert!(escape_test(0.0, c(0.0), 0, 2.0).is_err());
        assert!(escape_test(0.0, c(0.0), 10, 1.0).is_err());
    }
}
