use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model_map::ModelMap;
use super::singular::{cone_member_3d, ConeSpec3D};
use super::{mat3_apply, norm1, Vec3};
use crate::error::{domain, Result};
use crate::geometry::Point3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertifyParams {
    pub epsilon: f64,
    pub eta: f64,
    /// δ in the tilt bound |u_xy| < 2δ^{1/2}|u_z|.
    pub delta: f64,
    pub iteration_cap: usize,
}

impl Default for CertifyParams {
    fn default() -> Self {
        CertifyParams { epsilon: 0.1, eta: 0.5, delta: 1e-3, iteration_cap: 10_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertStatus {
    Completed,
    Inconclusive,
}

/// Norms are |v| = |v_x| + |v_y| + |v_z|.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionReport {
    pub sample_id: u64,
    pub start: Point3,
    pub vector: Vec3,
    pub status: CertStatus,
    /// First k with z-coordinate of f^k(p) above 1.
    pub exit_time: usize,
    /// |Df^k v| / |v| for k = 1..=N.
    pub growth_ratios: Vec<f64>,
    /// |u_xy| / |u_z| for u = Df^N v.
    pub final_tilt: f64,
    /// |Df^N v| ≥ λ^{(N/2)(1−4ε)} |v|.
    pub expansion_at_exit: bool,
    /// |u_xy| < 2δ^{1/2} |u_z|.
    pub tilt_bound: bool,
    /// |Df^k v| ≥ (η/2) λ^{(k/2)(1−4ε)} |v| for all k ≤ N; only when
    /// |v_z| ≥ η |v_xy|.
    pub expansion_along: Option<bool>,
}

impl ExpansionReport {
    pub fn passed(&self) -> bool {
        self.status == CertStatus::Completed && self.expansion_at_exit && self.tilt_bound && self.expansion_along.unwrap_or(true)
    }
}

pub fn expansion_certificate(
    map: &ModelMap,
    p: Point3,
    v: Vec3,
    cone: &ConeSpec3D,
    params: &CertifyParams,
) -> Result<ExpansionReport> {
    expansion_certificate_with_id(map, p, v, cone, params, 0)
}

fn expansion_certificate_with_id(
    map: &ModelMap,
    p: Point3,
    v: Vec3,
    cone: &ConeSpec3D,
    params: &CertifyParams,
    sample_id: u64,
) -> Result<ExpansionReport> {
    if !(p.z > 0.0 && p.z < 1.0) {
        return domain(format!("start point needs 0 < z < 1, got z = {}", p.z));
    }
    if !cone_member_3d(v, p, cone)? {
        return domain("vector is not in the cone at the start point");
    }
    if !(params.epsilon > 0.0 && params.epsilon < 0.25) {
        return domain(format!("epsilon must lie in (0, 1/4), got {}", params.epsilon));
    }
    if !(params.eta > 0.0 && params.delta > 0.0) {
        return domain("eta and the certification delta must be positive");
    }
    let lambda = map.spec.lambda;
    let rate = 0.5 * (1.0 - 4.0 * params.epsilon) * lambda.ln();
    let v0 = norm1(v);
    let mut q = p.to_array();
    let mut w = v;
    let mut ratios = Vec::new();
    let mut exit = None;
    for k in 1..=params.iteration_cap {
        w = mat3_apply(&map.jacobian(q), w);
        q = map.eval(q);
        ratios.push(norm1(w) / v0);
        if q[2] > 1.0 {
            exit = Some(k);
            break;
        }
    }
    let mut report = ExpansionReport {
        sample_id,
        start: p,
        vector: v,
        status: CertStatus::Inconclusive,
        exit_time: ratios.len(),
        growth_ratios: Vec::new(),
        final_tilt: f64::NAN,
        expansion_at_exit: false,
        tilt_bound: false,
        expansion_along: None,
    };
    let Some(n) = exit else {
        return Ok(report);
    };
    let uxy = w[0].abs() + w[1].abs();
    let uz = w[2].abs();
    report.status = CertStatus::Completed;
    report.exit_time = n;
    report.final_tilt = uxy / uz;
    report.expansion_at_exit = ratios[n - 1] >= (n as f64 * rate).exp();
    report.tilt_bound = uxy < 2.0 * params.delta.sqrt() * uz;
    if v[2].abs() >= params.eta * (v[0].abs() + v[1].abs()) {
        let c = 0.5 * params.eta;
        report.expansion_along = Some(ratios.iter().enumerate().all(|(i, r)| *r >= c * ((i + 1) as f64 * rate).exp()));
    }
    report.growth_ratios = ratios;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub samples: usize,
    pub completed: usize,
    pub inconclusive: usize,
    pub passed: usize,
    pub with_eta_condition: usize,
    pub min_exit_time: usize,
    pub max_final_tilt: f64,
    /// min over samples of |Df^N v| / (λ^{(N/2)(1−4ε)} |v|).
    pub min_exit_margin: f64,
    pub failures: Vec<ExpansionReport>,
}

impl SweepSummary {
    pub fn pass_fraction(&self) -> f64 {
        if self.completed == 0 {
            0.0
        } else {
            self.passed as f64 / self.completed as f64
        }
    }
}

/// Random start points with N(p) ≥ n0 and random vectors of K_p, from the
/// cone boundary up to |v_z| = 10 |v_xy|.
pub fn sample_start<R: Rng>(rng: &mut R, map: &ModelMap, cone: &ConeSpec3D, n0: usize) -> (Point3, Vec3) {
    let grow = map.spec.lambda + map.delta;
    let m = n0 as f64 + rng.random_range(0.0..30.0);
    let z = grow.powf(-m);
    let x = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
    let y = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
    let t: f64 = rng.random_range(0.0..1.0);
    let (vx, vy) = (t * if rng.random::<bool>() { 1.0 } else { -1.0 }, (1.0 - t) * if rng.random::<bool>() { 1.0 } else { -1.0 });
    let lo = cone.c2 * z.sqrt();
    let vz = (lo.ln() + rng.random_range(0.0..1.0) * (10.0f64.ln() - lo.ln())).exp().max(lo);
    let vz = if rng.random::<bool>() { vz } else { -vz };
    (Point3::new(x, y, z), [vx, vy, vz])
}

pub fn model_map_sweep(
    map: &ModelMap,
    cone: &ConeSpec3D,
    params: &CertifyParams,
    n0: usize,
    samples: usize,
    seed: u64,
) -> Result<SweepSummary> {
    if samples == 0 {
        return domain("sample count must be positive");
    }
    let lambda = map.spec.lambda;
    let rate = 0.5 * (1.0 - 4.0 * params.epsilon) * lambda.ln();
    let reports: Vec<ExpansionReport> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let (p, v) = sample_start(&mut rng, map, cone, n0);
            expansion_certificate_with_id(map, p, v, cone, params, i)
        })
        .collect::<Result<_>>()?;
    let mut s = SweepSummary {
        samples,
        completed: 0,
        inconclusive: 0,
        passed: 0,
        with_eta_condition: 0,
        min_exit_time: usize::MAX,
        max_final_tilt: 0.0,
        min_exit_margin: f64::INFINITY,
        failures: Vec::new(),
    };
    for r in reports {
        match r.status {
            CertStatus::Inconclusive => s.inconclusive += 1,
            CertStatus::Completed => {
                s.completed += 1;
                s.min_exit_time = s.min_exit_time.min(r.exit_time);
                s.max_final_tilt = s.max_final_tilt.max(r.final_tilt);
                let margin = r.growth_ratios[r.exit_time - 1] / (r.exit_time as f64 * rate).exp();
                s.min_exit_margin = s.min_exit_margin.min(margin);
                s.with_eta_condition += r.expansion_along.is_some() as usize;
                if r.passed() {
                    s.passed += 1;
                } else if s.failures.len() < 10 {
                    s.failures.push(r);
                }
            }
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::super::model_map::{make_model_map, ModelMapSpec};
    use super::*;

    #[test]
    fn linear_eigen_direction() {
        let map = make_model_map(ModelMapSpec { delta: 0.0, ..Default::default() }).unwrap();
        let l = map.spec.lambda;
        let n = 25;
        let p = Point3::new(0.2, 0.4, l.powi(-n));
        let r = expansion_certificate(&map, p, [0.0, 0.0, 1.0], &ConeSpec3D::default(), &CertifyParams::default()).unwrap();
        assert_eq!(r.status, CertStatus::Completed);
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.final_tilt, 0.0);
        for (k, g) in r.growth_ratios.iter().enumerate() {
            assert!((g - l.powi(k as i32 + 1)).abs() <= 1e-12 * g);
        }
    }

    #[test]
    fn cap_is_inconclusive() {
        let map = make_model_map(ModelMapSpec { delta: 0.0, ..Default::default() }).unwrap();
        let params = CertifyParams { iteration_cap: 5, ..Default::default() };
        let r = expansion_certificate(&map, Point3::new(0.0, 0.0, 1e-20), [0.0, 0.0, 1.0], &ConeSpec3D::default(), &params).unwrap();
        assert_eq!(r.status, CertStatus::Inconclusive);
        assert!(expansion_certificate(&map, Point3::new(0.0, 0.0, 0.5), [1.0, 0.0, 0.0], &ConeSpec3D::default(), &params).is_err());
    }
}
