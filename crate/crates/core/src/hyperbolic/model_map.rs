//! Smooth perturbations of diag(λ⁻¹, 1, λ) that keep the plane {z = 0}
//! invariant:
//!
//! f₁ = x/λ + a tanh(z) cos(x + y + θ₁)
//! f₂ = y + a tanh(z) cos(x − y + θ₂)
//! f₃ = λz + a tanh(z) sin(x + y + θ₃)
//!
//! Every first and second partial derivative of the perturbation is bounded
//! by a, so ‖Df − A‖_F ≤ 3a and each component Hessian has Frobenius norm at
//! most 3a. The amplitude is a = 0.3δ.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Mat3, Vec3};
use crate::error::{Error, Result};
use crate::GOLDEN;

pub const AMPLITUDE_FACTOR: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelMapSpec {
    pub lambda: f64,
    pub delta: f64,
    pub seed: u64,
    /// Required bound on second derivatives and on |∂f₃/∂(x,y)| / |z|.
    pub c1: f64,
}

impl Default for ModelMapSpec {
    fn default() -> Self {
        ModelMapSpec { lambda: GOLDEN * GOLDEN, delta: 1e-3, seed: 0, c1: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMap {
    pub spec: ModelMapSpec,
    pub amplitude: f64,
    pub phases: [f64; 3],
    /// Verified bound on ‖Df − A‖.
    pub delta: f64,
    /// Verified second-derivative bound.
    pub c1: f64,
    pub audit: ModelMapAudit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelMapAudit {
    pub samples: usize,
    pub max_jacobian_deviation: f64,
    pub max_second_derivative: f64,
    pub max_plane_defect: f64,
    pub max_jacobian_fd_error: f64,
    pub passed: bool,
}

/// Working box sampled by the audit.
pub const AUDIT_BOX: [(f64, f64); 3] = [(-4.0, 4.0), (-4.0, 4.0), (-1.0, 3.0)];
pub const AUDIT_SAMPLES: usize = 10_000;

impl ModelMap {
    pub fn linear(&self) -> Mat3 {
        let l = self.spec.lambda;
        [[1.0 / l, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, l]]
    }

    pub fn eval(&self, p: Vec3) -> Vec3 {
        let [x, y, z] = p;
        let (a, l, t) = (self.amplitude, self.spec.lambda, self.phases);
        let h = a * z.tanh();
        [x / l + h * (x + y + t[0]).cos(), y + h * (x - y + t[1]).cos(), l * z + h * (x + y + t[2]).sin()]
    }

    pub fn jacobian(&self, p: Vec3) -> Mat3 {
        let [x, y, z] = p;
        let (a, l, t) = (self.amplitude, self.spec.lambda, self.phases);
        let h = a * z.tanh();
        let hz = a / z.cosh().powi(2);
        let (c1, s1) = ((x + y + t[0]).cos(), (x + y + t[0]).sin());
        let (c2, s2) = ((x - y + t[1]).cos(), (x - y + t[1]).sin());
        let (c3, s3) = ((x + y + t[2]).cos(), (x + y + t[2]).sin());
        [
            [1.0 / l - h * s1, -h * s1, hz * c1],
            [-h * s2, 1.0 + h * s2, hz * c2],
            [h * c3, h * c3, l + hz * s3],
        ]
    }

    fn audit(&self, samples: usize, seed: u64) -> ModelMapAudit {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_a0d1);
        let lin = self.linear();
        let (mut jac, mut hess, mut plane, mut fd_err) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        let step = 1e-4;
        for _ in 0..samples {
            let p: Vec3 = std::array::from_fn(|i| rng.random_range(AUDIT_BOX[i].0..AUDIT_BOX[i].1));
            let j = self.jacobian(p);
            let dev: f64 = (0..3).flat_map(|r| (0..3).map(move |c| (r, c))).map(|(r, c)| (j[r][c] - lin[r][c]).powi(2)).sum();
            jac = jac.max(dev.sqrt());
            plane = plane.max(self.eval([p[0], p[1], 0.0])[2].abs());
            // Central differences of the analytic Jacobian give the Hessians and
            // check the Jacobian against differences of f.
            let mut h2 = [0.0f64; 3];
            for c in 0..3 {
                let mut pp = p;
                let mut pm = p;
                pp[c] += step;
                pm[c] -= step;
                let (jp, jm) = (self.jacobian(pp), self.jacobian(pm));
                let (fp, fm) = (self.eval(pp), self.eval(pm));
                for r in 0..3 {
                    for k in 0..3 {
                        h2[r] += ((jp[r][k] - jm[r][k]) / (2.0 * step)).powi(2);
                    }
                    fd_err = fd_err.max(((fp[r] - fm[r]) / (2.0 * step) - j[r][c]).abs());
                }
            }
            hess = hess.max(h2.iter().fold(0.0f64, |m, x| m.max(x.sqrt())));
        }
        let passed = plane == 0.0
            && (jac < self.delta || (self.delta == 0.0 && jac == 0.0))
            && hess <= self.c1 * (1.0 + 1e-6)
            && fd_err <= 1e-6;
        ModelMapAudit {
            samples,
            max_jacobian_deviation: jac,
            max_second_derivative: hess,
            max_plane_defect: plane,
            max_jacobian_fd_error: fd_err,
            passed,
        }
    }
}

/// Builds and audits a map of the family. δ = 0 gives the linear map.
pub fn make_model_map(spec: ModelMapSpec) -> Result<ModelMap> {
    if !(spec.lambda > 1.0 && spec.lambda.is_finite()) {
        return Err(Error::Domain(format!("lambda must exceed 1, got {}", spec.lambda)));
    }
    if !(spec.delta >= 0.0 && spec.delta.is_finite()) {
        return Err(Error::Domain(format!("delta must be non-negative, got {}", spec.delta)));
    }
    if !(spec.c1 > 0.0) {
        return Err(Error::Domain(format!("c1 must be positive, got {}", spec.c1)));
    }
    let amplitude = AMPLITUDE_FACTOR * spec.delta;
    if 3.0 * amplitude > spec.c1 {
        return Err(Error::Construction(format!(
            "delta = {} needs second derivatives up to {} > c1 = {}",
            spec.delta,
            3.0 * amplitude,
            spec.c1
        )));
    }
    if spec.delta >= spec.lambda - 1.0 {
        return Err(Error::Construction(format!(
            "delta = {} is too large for lambda = {}: the map is no longer expanding in z",
            spec.delta, spec.lambda
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let phases: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.0..std::f64::consts::TAU));
    let mut map = ModelMap {
        spec,
        amplitude,
        phases,
        delta: spec.delta,
        c1: 3.0 * amplitude,
        audit: ModelMapAudit {
            samples: 0,
            max_jacobian_deviation: 0.0,
            max_second_derivative: 0.0,
            max_plane_defect: 0.0,
            max_jacobian_fd_error: 0.0,
            passed: false,
        },
    };
    map.audit = map.audit(AUDIT_SAMPLES, spec.seed);
    if !map.audit.passed {
        return Err(Error::Construction(format!("model map failed its audit: {:?}", map.audit)));
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_delta_is_linear() {
        let m = make_model_map(ModelMapSpec { delta: 0.0, ..Default::default() }).unwrap();
        let l = m.spec.lambda;
        let p = [0.7, -2.0, 0.3];
        assert_eq!(m.eval(p), [0.7 / l, -2.0, l * 0.3]);
        assert_eq!(m.jacobian(p), m.linear());
    }

    #[test]
    fn plane_invariant_and_audited() {
        for seed in 0..4 {
            let m = make_model_map(ModelMapSpec { seed, delta: 0.01, ..Default::default() }).unwrap();
            assert_eq!(m.eval([1.3, -0.4, 0.0])[2], 0.0);
            assert!(m.audit.passed);
            assert!(m.audit.max_jacobian_deviation < 0.01);
        }
    }

    #[test]
    fn unattainable() {
        let e = make_model_map(ModelMapSpec { delta: 0.5, c1: 0.1, ..Default::default() }).unwrap_err();
        assert!(matches!(e, Error::Construction(_)));
    }
}
