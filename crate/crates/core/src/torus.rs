//! The unperturbed factor: the cat map on the 2-torus and its
//! semiconjugacy onto the Cayley cubic.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::geometry::Point3;
use crate::GOLDEN;

/// A point of the torus ℝ²/ℤ², stored reduced into [0,1)².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint {
    pub theta: f64,
    pub phi: f64,
}

fn reduce(a: f64) -> f64 {
    let r = a.rem_euclid(1.0);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

impl TorusPoint {
    pub fn new(theta: f64, phi: f64) -> Self {
        TorusPoint { theta: reduce(theta), phi: reduce(phi) }
    }
}

/// 𝒜(θ, φ) = (θ + φ, θ) mod 1.
pub fn torus_auto(t: TorusPoint) -> TorusPoint {
    TorusPoint::new(t.theta + t.phi, t.theta)
}

/// F(θ, φ) = (cos 2π(θ+φ), cos 2πθ, cos 2πφ).
pub fn semiconj(t: TorusPoint) -> Point3 {
    semiconj_raw(t.theta, t.phi)
}

/// F evaluated at unreduced angles.
pub fn semiconj_raw(theta: f64, phi: f64) -> Point3 {
    Point3::new((TAU * (theta + phi)).cos(), (TAU * theta).cos(), (TAU * phi).cos())
}

/// Jacobian of F as three rows of two entries.
pub fn df_semiconj(t: TorusPoint) -> [[f64; 2]; 3] {
    df_semiconj_raw(t.theta, t.phi)
}

pub fn df_semiconj_raw(theta: f64, phi: f64) -> [[f64; 2]; 3] {
    let s = (TAU * (theta + phi)).sin();
    let a = (TAU * theta).sin();
    let b = (TAU * phi).sin();
    let k = -TAU;
    [[k * s, k * s], [k * a, 0.0], [0.0, k * b]]
}

/// ‖T(F(t)) − F(𝒜(t))‖ at one point.
pub fn semiconj_defect(t: TorusPoint) -> f64 {
    semiconj(t).forward().dist(&semiconj(torus_auto(t)))
}

/// Defects over the grid (i/n, j/n), row-major in θ.
pub fn semiconjugacy_defects(grid_resolution: usize) -> Result<Vec<(f64, f64, f64)>> {
    if grid_resolution < 2 {
        return domain(format!("grid resolution must be at least 2, got {grid_resolution}"));
    }
    let n = grid_resolution;
    let h = 1.0 / n as f64;
    Ok((0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            (0..n).map(move |j| {
                let t = TorusPoint::new(i as f64 * h, j as f64 * h);
                (t.theta, t.phi, semiconj_defect(t))
            })
        })
        .collect())
}

/// Maximum semiconjugacy defect over the grid.
pub fn check_semiconjugacy(grid_resolution: usize) -> Result<f64> {
    if grid_resolution < 2 {
        return domain(format!("grid resolution must be at least 2, got {grid_resolution}"));
    }
    let n = grid_resolution;
    let h = 1.0 / n as f64;
    Ok((0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| semiconj_defect(TorusPoint::new(i as f64 * h, j as f64 * h)))
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max))
}

/// Eigendata of A = [[1,1],[1,0]].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenData {
    pub mu: f64,
    pub v_u: [f64; 2],
    pub v_s: [f64; 2],
}

pub const CAT: [[f64; 2]; 2] = [[1.0, 1.0], [1.0, 0.0]];
pub const CAT_INV: [[f64; 2]; 2] = [[0.0, 1.0], [1.0, -1.0]];

pub fn mat2_apply(m: &[[f64; 2]; 2], v: [f64; 2]) -> [f64; 2] {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

fn norm2(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

impl EigenData {
    pub fn new() -> Self {
        let mu = GOLDEN;
        let nu = norm2([mu, 1.0]);
        let ns = norm2([1.0, -mu]);
        EigenData { mu, v_u: [mu / nu, 1.0 / nu], v_s: [1.0 / ns, -mu / ns] }
    }

    /// Coordinates (c_u, c_s) with v = c_u v^u + c_s v^s.
    pub fn decompose(&self, v: [f64; 2]) -> (f64, f64) {
        let (a, b) = (self.v_u, self.v_s);
        let det = a[0] * b[1] - a[1] * b[0];
        let cu = (v[0] * b[1] - v[1] * b[0]) / det;
        let cs = (a[0] * v[1] - a[1] * v[0]) / det;
        (cu, cs)
    }
}

impl Default for EigenData {
    fn default() -> Self {
        Self::new()
    }
}

/// Aperture of the cone families K^u and K^s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeSpec2D {
    pub zeta: f64,
}

impl ConeSpec2D {
    pub fn new(zeta: f64) -> Result<Self> {
        if zeta > 0.0 && zeta < 1.0 {
            Ok(ConeSpec2D { zeta })
        } else {
            domain(format!("cone aperture zeta must lie in (0, 1), got {zeta}"))
        }
    }
}

impl Default for ConeSpec2D {
    fn default() -> Self {
        ConeSpec2D { zeta: 0.1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Which {
    Stable,
    Unstable,
}

pub fn cone_member_2d(v: [f64; 2], c: &ConeSpec2D, which: Which) -> Result<bool> {
    if v == [0.0, 0.0] || !(v[0].is_finite() && v[1].is_finite()) {
        return domain("cone membership needs a finite non-zero vector");
    }
    let (cu, cs) = EigenData::new().decompose(v);
    Ok(match which {
        Which::Unstable => cu.abs() > cs.abs() / c.zeta,
        Which::Stable => cs.abs() > cu.abs() / c.zeta,
    })
}

/// A random vector strictly inside the requested cone.
pub fn sample_cone_vector<R: Rng>(rng: &mut R, c: &ConeSpec2D, which: Which) -> [f64; 2] {
    let e = EigenData::new();
    let lead: f64 = rng.random_range(0.1..2.0) * if rng.random::<bool>() { 1.0 } else { -1.0 };
    let side = lead.abs() * c.zeta * rng.random_range(-0.999..0.999);
    let (a, b) = match which {
        Which::Unstable => (lead, side),
        Which::Stable => (side, lead),
    };
    [a * e.v_u[0] + b * e.v_s[0], a * e.v_u[1] + b * e.v_s[1]]
}

/// Minimum of ‖Aⁿv‖/(μⁿ‖v‖) over random unstable-cone vectors, or of the
/// same quantity for A⁻¹ on stable-cone vectors.
pub fn cone_expansion_check(
    c: &ConeSpec2D,
    which: Which,
    n: u32,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    if n < 1 {
        return domain("iterate count must be at least 1");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = match which {
        Which::Unstable => CAT,
        Which::Stable => CAT_INV,
    };
    let scale = GOLDEN.powi(n as i32);
    let mut min_ratio = f64::INFINITY;
    for _ in 0..samples {
        let v = sample_cone_vector(&mut rng, c, which);
        let mut w = v;
        for _ in 0..n {
            w = mat2_apply(&m, w);
        }
        min_ratio = min_ratio.min(norm2(w) / (scale * norm2(v)));
    }
    Ok(min_ratio)
}

/// Angle and length-ratio statistics of the two columns of DF over a
/// punctured neighbourhood of the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleRatioBounds {
    pub max_cos_angle: f64,
    pub ratio_min: f64,
    pub ratio_max: f64,
}

/// Samples a polar grid of `samples` radii by `samples` directions.
pub fn df_angle_ratio_bounds(neighborhood_radius: f64, samples: usize) -> Result<AngleRatioBounds> {
    if !(neighborhood_radius > 0.0 && neighborhood_radius <= 0.25) {
        return domain(format!("neighbourhood radius must lie in (0, 0.25], got {neighborhood_radius}"));
    }
    if samples < 2 {
        return domain("need at least two samples per axis");
    }
    let mut out = AngleRatioBounds { max_cos_angle: 0.0, ratio_min: f64::INFINITY, ratio_max: 0.0 };
    for i in 1..=samples {
        let r = neighborhood_radius * i as f64 / samples as f64;
        for j in 0..samples {
            let a = 2.0 * PI * (j as f64 + 0.5) / samples as f64;
            let d = df_semiconj_raw(r * a.cos(), r * a.sin());
            let c1 = [d[0][0], d[1][0], d[2][0]];
            let c2 = [d[0][1], d[1][1], d[2][1]];
            let n1 = (c1[0] * c1[0] + c1[1] * c1[1] + c1[2] * c1[2]).sqrt();
            let n2 = (c2[0] * c2[0] + c2[1] * c2[1] + c2[2] * c2[2]).sqrt();
            let dot = c1[0] * c2[0] + c1[1] * c2[1] + c1[2] * c2[2];
            out.max_cos_angle = out.max_cos_angle.max((dot / (n1 * n2)).abs());
            out.ratio_min = out.ratio_min.min(n1 / n2);
            out.ratio_max = out.ratio_max.max(n1 / n2);
        }
    }
    Ok(out)
}
