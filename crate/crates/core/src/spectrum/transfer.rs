//! One-step transfer matrices and the Fibonacci block products.

use crate::error::{domain, Result};
use crate::geometry::Coupling;

pub type Mat2 = [[f64; 2]; 2];

/// The rotation number α = (√5 − 1)/2.
pub const ALPHA: f64 = 0.618_033_988_749_894_8;

/// Largest block index accepted by the direct product.
pub const MAX_ORACLE_K: i32 = 16;

pub fn mat2_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

/// Indicator of mα mod 1 ∈ [1−α, 1).
pub fn potential_site(m: u64) -> bool {
    (m as f64 * ALPHA).fract() >= 1.0 - ALPHA
}

/// Fibonacci numbers with F₀ = F₁ = 1.
pub fn fibonacci(k: u32) -> u64 {
    let (mut a, mut b) = (1u64, 1u64);
    for _ in 0..k {
        let c = a + b;
        a = b;
        b = c;
    }
    a
}

pub fn transfer_matrix(m: u64, energy: f64, c: Coupling) -> Result<Mat2> {
    if m < 1 {
        return domain("site index must be at least 1");
    }
    let v = if potential_site(m) { c.v() } else { 0.0 };
    Ok([[energy - v, -1.0], [1.0, 0.0]])
}

/// The block matrix M_k: explicit for k = −1, 0 and the ordered product of
/// one-step matrices over sites F_k, …, 1 otherwise.
pub fn block_matrix(k: i32, energy: f64, c: Coupling) -> Result<Mat2> {
    if !(-1..=MAX_ORACLE_K).contains(&k) {
        return domain(format!("block index must lie in -1..={MAX_ORACLE_K}, got {k}"));
    }
    Ok(match k {
        -1 => [[1.0, -c.v()], [0.0, 1.0]],
        0 => [[energy, -1.0], [1.0, 0.0]],
        _ => {
            let len = fibonacci(k as u32);
            let mut m = [[1.0, 0.0], [0.0, 1.0]];
            for site in 1..=len {
                m = mat2_mul(&transfer_matrix(site, energy, c)?, &m);
            }
            m
        }
    })
}

/// ½ Tr M_k(E) from the explicit product.
pub fn half_trace_oracle(k: i32, energy: f64, c: Coupling) -> Result<f64> {
    let m = block_matrix(k, energy, c)?;
    Ok(0.5 * (m[0][0] + m[1][1]))
}
