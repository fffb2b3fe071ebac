//! The coupled recurrences for the xy- and z-components of a vector pushed
//! through a neighbourhood of a singular point.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::GOLDEN;

/// Relative slack for comparisons that can hold with equality.
const REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceParams {
    pub c1: f64,
    pub c2: f64,
    pub lambda: f64,
    pub epsilon: f64,
    pub delta: f64,
}

impl Default for RecurrenceParams {
    fn default() -> Self {
        RecurrenceParams { c1: 1.0, c2: 1.0, lambda: GOLDEN * GOLDEN, epsilon: 0.1, delta: 1e-3 }
    }
}

impl RecurrenceParams {
    /// δ = 0 is accepted as the decoupled limit.
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 1.0 && self.lambda.is_finite()) {
            return domain(format!("lambda must exceed 1, got {}", self.lambda));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 0.25) {
            return domain(format!("epsilon must lie in (0, 1/4), got {}", self.epsilon));
        }
        if !(self.delta >= 0.0 && self.delta < self.lambda - 1.0) {
            return domain(format!("delta must lie in [0, lambda - 1), got {}", self.delta));
        }
        if !(self.c1 >= 0.0 && self.c1.is_finite()) {
            return domain(format!("c1 must be non-negative, got {}", self.c1));
        }
        if !(self.c2 > 0.0 && self.c2.is_finite()) {
            return domain(format!("c2 must be positive, got {}", self.c2));
        }
        Ok(())
    }

    /// λ^{1−ε}.
    pub fn lambda_minus(&self) -> f64 {
        self.lambda.powf(1.0 - self.epsilon)
    }

    pub fn with_delta(self, delta: f64) -> Self {
        RecurrenceParams { delta, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RecurrenceKind {
    #[serde(rename = "dD")]
    DD,
    #[serde(rename = "aA")]
    AA,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceFlags {
    /// d_N ≤ 2δ^{1/2} D_N.
    pub final_cone: bool,
    /// D_N ≥ D₀ λ^{N(1−ε)}.
    pub final_growth: bool,
    /// D₀ λ^{N(1−ε)} > λ^{(N/2)(1−4ε)}.
    pub growth_floor: bool,
    /// D_{k+1} ≥ λ^{1−ε} D_k at every step.
    pub stepwise_growth: bool,
    /// d_{k+1} ≤ (1+2δ+δ^{1/2}) max(d_k, δ^{1/2} D_k) at every step.
    pub stepwise_small: bool,
    /// Once δ^{1/2} D_l > d_l for some l ≥ 1 it stays so.
    pub dichotomy: bool,
    /// A_k ≥ D_k and A_k/a_k ≥ D_k/d_k against the comparison run; aA only.
    pub domination: Option<bool>,
}

impl RecurrenceFlags {
    /// Both conclusions of the estimate.
    pub fn conclusions(&self) -> bool {
        self.final_cone && self.final_growth && self.growth_floor
    }

    pub fn all(&self) -> bool {
        self.conclusions()
            && self.stepwise_growth
            && self.stepwise_small
            && self.dichotomy
            && self.domination.unwrap_or(true)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceRun {
    pub params: RecurrenceParams,
    pub n: usize,
    pub kind: RecurrenceKind,
    pub d_or_a: Vec<f64>,
    #[serde(rename = "D_or_A")]
    pub big: Vec<f64>,
    pub b: Vec<f64>,
    pub flags: RecurrenceFlags,
    /// Factor applied to C₁ in the dD comparison run of an aA run.
    pub kappa: Option<f64>,
}

fn conclusion_flags(p: &RecurrenceParams, small: &[f64], big: &[f64]) -> RecurrenceFlags {
    let n = small.len() - 1;
    let sd = p.delta.sqrt();
    let target = big[0] * p.lambda.powf(n as f64 * (1.0 - p.epsilon));
    let floor = p.lambda.powf(0.5 * n as f64 * (1.0 - 4.0 * p.epsilon));
    let lm = p.lambda_minus();
    let factor = 1.0 + 2.0 * p.delta + sd;
    let mut stepwise_growth = true;
    let mut stepwise_small = true;
    for k in 0..n {
        if !(big[k + 1] >= lm * big[k]) {
            stepwise_growth = false;
        }
        let bound = factor * small[k].max(sd * big[k]);
        if !(small[k + 1] <= bound * (1.0 + REL_TOL)) {
            stepwise_small = false;
        }
    }
    let mut dichotomy = true;
    let mut crossed = false;
    for k in 1..=n {
        let above = sd * big[k] > small[k];
        if crossed && !above {
            dichotomy = false;
        }
        crossed |= above;
    }
    RecurrenceFlags {
        final_cone: small[n] <= 2.0 * sd * big[n],
        final_growth: big[n] >= target * (1.0 - REL_TOL),
        growth_floor: target > floor,
        stepwise_growth,
        stepwise_small,
        dichotomy,
        domination: None,
    }
}

/// b_k = (λ−δ)^{−N+k}, k = 0..=N.
pub fn b_exact(p: &RecurrenceParams, n: usize) -> Vec<f64> {
    (0..=n).map(|k| (p.lambda - p.delta).powi(k as i32 - n as i32)).collect()
}

/// b̃_k = (λ+δ)^{−N+k}, the fastest admissible growth.
pub fn b_max_growth(p: &RecurrenceParams, n: usize) -> Vec<f64> {
    (0..=n).map(|k| (p.lambda + p.delta).powi(k as i32 - n as i32)).collect()
}

/// A random sequence satisfying the admissibility constraints of run_aa.
pub fn b_random<R: Rng>(rng: &mut R, p: &RecurrenceParams, n: usize) -> Vec<f64> {
    let (lo, hi) = (p.lambda - p.delta, p.lambda + p.delta);
    let ratios: Vec<f64> = (0..n).map(|_| if hi > lo { rng.random_range(lo..hi) } else { lo }).collect();
    let mut b = vec![0.0; n + 1];
    let r_last = ratios[n - 1];
    b[n - 1] = rng.random_range(1.0 / r_last..1.0);
    b[n] = (r_last * b[n - 1]).max(1.0);
    for k in (0..n - 1).rev() {
        b[k] = b[k + 1] / ratios[k];
    }
    b
}

fn run_dd_with(p: &RecurrenceParams, n: usize, d0_big: f64, b: &[f64], c1: f64) -> (Vec<f64>, Vec<f64>) {
    let mut d = Vec::with_capacity(n + 1);
    let mut big = Vec::with_capacity(n + 1);
    d.push(1.0);
    big.push(d0_big);
    for k in 0..n {
        let (dk, bk) = (d[k], big[k]);
        d.push((1.0 + 2.0 * p.delta) * dk + p.delta * bk);
        big.push((p.lambda - p.delta) * bk - c1 * b[k] * dk);
    }
    (d, big)
}

/// The pair d_k, D_k with d₀ = 1 and D₀ = C₂(λ+δ)^{−N/2} unless given.
pub fn run_dd(p: &RecurrenceParams, n: usize, d0_big: Option<f64>) -> Result<RecurrenceRun> {
    p.validate()?;
    if n < 1 {
        return domain("N must be at least 1");
    }
    let floor = p.c2 * (p.lambda + p.delta).powf(-0.5 * n as f64);
    let d0_big = d0_big.unwrap_or(floor);
    if !(d0_big >= floor * (1.0 - REL_TOL) && d0_big.is_finite()) {
        return domain(format!("D0 = {d0_big} is below C2 (lambda + delta)^(-N/2) = {floor}"));
    }
    let b = b_exact(p, n);
    let (d, big) = run_dd_with(p, n, d0_big, &b, p.c1);
    let flags = conclusion_flags(p, &d, &big);
    Ok(RecurrenceRun { params: *p, n, kind: RecurrenceKind::DD, d_or_a: d, big, b, flags, kappa: None })
}

/// Per-step choice of how far below (a) and above (A) the printed
/// inequalities each new term lies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlackSchedule {
    /// Equalities throughout.
    Zero,
    /// σ_a, σ_A uniform in [0, max] per step.
    Random { seed: u64, max: f64 },
    /// Explicit (σ_a, σ_A) per step.
    Explicit(Vec<(f64, f64)>),
}

impl SlackSchedule {
    fn materialize(&self, n: usize) -> Result<Vec<(f64, f64)>> {
        let s = match self {
            SlackSchedule::Zero => vec![(0.0, 0.0); n],
            SlackSchedule::Random { seed, max } => {
                if !(*max >= 0.0 && *max < 1.0) {
                    return domain(format!("slack bound must lie in [0, 1), got {max}"));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                (0..n).map(|_| (rng.random::<f64>() * max, rng.random::<f64>() * max)).collect()
            }
            SlackSchedule::Explicit(v) => {
                if v.len() != n {
                    return domain(format!("slack schedule has {} steps, expected {n}", v.len()));
                }
                v.clone()
            }
        };
        if s.iter().any(|&(a, b)| !(0.0..1.0).contains(&a) || !(b >= 0.0 && b.is_finite())) {
            return domain("slack values must satisfy 0 <= sigma_a < 1 and sigma_A >= 0");
        }
        Ok(s)
    }
}

fn check_b_sequence(p: &RecurrenceParams, b: &[f64]) -> Result<()> {
    let n = b.len() - 1;
    if !(b[0] > 0.0) {
        return domain(format!("b sequence: b_0 = {} must be positive", b[0]));
    }
    for k in 0..n {
        if !(b[k + 1] > b[k]) {
            return domain(format!("b sequence: not strictly increasing at k = {k}"));
        }
        let r = b[k + 1] / b[k];
        if r < (p.lambda - p.delta) * (1.0 - REL_TOL) || r > (p.lambda + p.delta) * (1.0 + REL_TOL) {
            return domain(format!("b sequence: ratio {r} at k = {k} outside [lambda - delta, lambda + delta]"));
        }
    }
    if !(b[n - 1] < 1.0) {
        return domain(format!("b sequence: b_(N-1) = {} must be below 1", b[n - 1]));
    }
    if !(b[n] >= 1.0) {
        return domain(format!("b sequence: b_N = {} must be at least 1", b[n]));
    }
    Ok(())
}

/// Sequences a_k, A_k meeting the one-sided recurrences with the given
/// slack. A₀ defaults to C₂ √b̃₀. Domination is checked against the dD run
/// with D₀ = A₀ and C₁ scaled by κ = max(1, max_k b̃_k / b_k), so that the
/// comparison coefficient bounds C₁ b̃_k at every step.
pub fn run_aa(p: &RecurrenceParams, b: &[f64], slack: &SlackSchedule, a0_big: Option<f64>) -> Result<RecurrenceRun> {
    p.validate()?;
    if b.len() < 2 {
        return domain("b sequence needs at least two terms");
    }
    check_b_sequence(p, b)?;
    let n = b.len() - 1;
    let sig = slack.materialize(n)?;
    let floor = p.c2 * b[0].sqrt();
    let a0_big = a0_big.unwrap_or(floor);
    if !(a0_big >= floor * (1.0 - REL_TOL) && a0_big.is_finite()) {
        return domain(format!("A0 = {a0_big} is below C2 sqrt(b_0) = {floor}"));
    }
    let mut a = vec![1.0];
    let mut big = vec![a0_big];
    for k in 0..n {
        let (ak, bk) = (a[k], big[k]);
        let (sa, sb) = sig[k];
        a.push((1.0 - sa) * ((1.0 + 2.0 * p.delta) * ak + p.delta * bk));
        let rhs = (p.lambda - p.delta) * bk - p.c1 * b[k] * ak;
        big.push(rhs + sb * rhs.abs());
    }
    let mut flags = conclusion_flags(p, &a, &big);
    let be = b_exact(p, n);
    let kappa = b.iter().zip(&be).map(|(x, y)| x / y).fold(1.0, f64::max);
    let (d, dd) = run_dd_with(p, n, a0_big, &be, kappa * p.c1);
    let dominated = (0..=n).all(|k| {
        let slack = REL_TOL * dd[k].abs();
        big[k] >= dd[k] - slack && big[k] * d[k] >= dd[k] * a[k] - slack * a[k]
    });
    flags.domination = Some(dominated);
    Ok(RecurrenceRun { params: *p, n, kind: RecurrenceKind::AA, d_or_a: a, big, b: b.to_vec(), flags, kappa: Some(kappa) })
}

/// A (δ₀, N₀) at which every probed δ ≤ δ₀ passes for all N in [N₀, n_ref].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassingPair {
    pub delta0: f64,
    pub n0: usize,
    /// Largest δ passing at N = n_ref, found by bisection.
    pub delta_max: f64,
    pub n_ref: usize,
    pub probes: Vec<f64>,
}

pub const DEFAULT_N_REF: usize = 200;

fn dd_passes(p: &RecurrenceParams, n: usize) -> bool {
    run_dd(p, n, None).map(|r| r.flags.all()).unwrap_or(false)
}

/// Smallest N such that run_dd passes for every N' in [N, n_ref].
pub fn min_passing_n(p: &RecurrenceParams, n_ref: usize) -> Option<usize> {
    if !dd_passes(p, n_ref) {
        return None;
    }
    let mut n0 = n_ref;
    while n0 > 1 && dd_passes(p, n0 - 1) {
        n0 -= 1;
    }
    Some(n0)
}

/// Bisects the largest passing δ at N = n_ref, halves it, then takes the
/// smallest N₀ that works for δ₀ and the probes δ₀/2, δ₀/10, δ₀/100, δ₀/1000.
pub fn find_passing_pair(base: &RecurrenceParams, n_ref: usize) -> Result<PassingPair> {
    base.validate()?;
    let (mut lo, mut hi) = (0.0, (base.lambda - 1.0) * 0.999);
    if !dd_passes(&base.with_delta(1e-12), n_ref) {
        return domain(format!("no passing delta at N = {n_ref}"));
    }
    lo = f64::max(lo, 1e-12);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if dd_passes(&base.with_delta(mid), n_ref) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let delta0 = 0.5 * lo;
    let probes: Vec<f64> = [1.0, 0.5, 0.1, 0.01, 0.001].iter().map(|f| delta0 * f).collect();
    let mut n0 = 1;
    for &d in &probes {
        match min_passing_n(&base.with_delta(d), n_ref) {
            Some(n) => n0 = n0.max(n),
            None => return domain(format!("probe delta {d} fails at N = {n_ref}")),
        }
    }
    Ok(PassingPair { delta0, n0, delta_max: lo, n_ref, probes })
}
