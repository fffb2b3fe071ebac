use serde::{Deserialize, Serialize};

use super::{cross, inv3, norm, Mat3, Vec3};
use crate::error::{domain, Result};
use crate::geometry::Point3;

/// DT at the fixed point (1, 1, 1).
pub const DT_P1: Mat3 = [[2.0, 2.0, -1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularEigenData {
    pub dt_p1: Mat3,
    /// (λ_big, λ_mid, λ_small).
    pub eigenvalues: (f64, f64, f64),
    /// Unit eigenvectors in the order of `eigenvalues`.
    pub eigenvectors: [Vec3; 3],
    /// Coefficients (c₀, c₁, c₂) of x³ + c₂x² + c₁x + c₀.
    pub char_poly: [f64; 3],
}

impl SingularEigenData {
    /// Columns v_small, v_mid, v_big, so coordinates read (stable, centre,
    /// unstable).
    pub fn frame(&self) -> Mat3 {
        let [b, m, s] = self.eigenvectors;
        [[s[0], m[0], b[0]], [s[1], m[1], b[1]], [s[2], m[2], b[2]]]
    }

    pub fn frame_inverse(&self) -> Mat3 {
        inv3(&self.frame()).expect("eigenframe of DT(P1) is invertible")
    }
}

pub fn char_poly(m: &Mat3) -> [f64; 3] {
    let tr = m[0][0] + m[1][1] + m[2][2];
    let minors = (m[0][0] * m[1][1] - m[0][1] * m[1][0])
        + (m[0][0] * m[2][2] - m[0][2] * m[2][0])
        + (m[1][1] * m[2][2] - m[1][2] * m[2][1]);
    [-super::det3(m), minors, -tr]
}

fn poly_eval(c: &[f64; 3], x: f64) -> f64 {
    ((x + c[2]) * x + c[1]) * x + c[0]
}

/// Real roots of a monic cubic with three simple real roots, by decreasing
/// modulus.
fn cubic_roots(c: &[f64; 3]) -> Vec<f64> {
    let bound = 1.0 + c.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let n = 4096;
    let mut roots = Vec::new();
    let xs: Vec<f64> = (0..=n).map(|i| -bound + 2.0 * bound * i as f64 / n as f64).collect();
    for w in xs.windows(2) {
        let (mut a, mut b) = (w[0], w[1]);
        let (fa, fb) = (poly_eval(c, a), poly_eval(c, b));
        if fa == 0.0 {
            roots.push(a);
            continue;
        }
        if fa * fb > 0.0 {
            continue;
        }
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if poly_eval(c, m) * poly_eval(c, a) <= 0.0 {
                b = m;
            } else {
                a = m;
            }
        }
        roots.push(0.5 * (a + b));
    }
    roots.sort_by(|a, b| b.total_cmp(a));
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    roots.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
    roots
}

/// Kernel direction of M − λI from the largest cross product of its rows.
fn eigenvector(m: &Mat3, lambda: f64) -> Vec3 {
    let mut r = *m;
    for (i, row) in r.iter_mut().enumerate() {
        row[i] -= lambda;
    }
    let cands = [cross(r[0], r[1]), cross(r[0], r[2]), cross(r[1], r[2])];
    let v = cands.into_iter().max_by(|a, b| norm(*a).total_cmp(&norm(*b))).unwrap();
    let n = norm(v);
    let s = if v[2] < 0.0 { -1.0 } else { 1.0 };
    [s * v[0] / n, s * v[1] / n, s * v[2] / n]
}

pub fn singular_eigen() -> SingularEigenData {
    let m = DT_P1;
    let cp = char_poly(&m);
    let r = cubic_roots(&cp);
    assert_eq!(r.len(), 3, "DT(P1) has three real eigenvalues");
    SingularEigenData {
        dt_p1: m,
        eigenvalues: (r[0], r[1], r[2]),
        eigenvectors: [eigenvector(&m, r[0]), eigenvector(&m, r[1]), eigenvector(&m, r[2])],
        char_poly: cp,
    }
}

/// The constant C₂ of the cone family K_p.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeSpec3D {
    pub c2: f64,
}

impl ConeSpec3D {
    pub fn new(c2: f64) -> Result<Self> {
        if c2 > 0.0 && c2.is_finite() {
            Ok(ConeSpec3D { c2 })
        } else {
            domain(format!("cone constant c2 must be positive, got {c2}"))
        }
    }
}

impl Default for ConeSpec3D {
    fn default() -> Self {
        ConeSpec3D { c2: 1.0 }
    }
}

/// |v_z| ≥ C₂ √|z_p| |v_xy|, boundary included, with |v_xy| = |v_x| + |v_y|.
pub fn cone_member_3d(v: Vec3, p: Point3, c: &ConeSpec3D) -> Result<bool> {
    if v == [0.0; 3] || v.iter().any(|x| !x.is_finite()) {
        return domain("cone membership needs a finite non-zero vector");
    }
    let vxy = v[0].abs() + v[1].abs();
    Ok(v[2].abs() >= c.c2 * p.z.abs().sqrt() * vxy)
}
