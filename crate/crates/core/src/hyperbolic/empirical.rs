//! Expansion of unstable-cone vectors along sampled bounded orbits of the
//! trace map on S_V for small V.
//!
//! Points are drawn as projections onto S_V of F(t) for random torus points
//! t and kept when their orbits stay within the norm cap for n steps in both
//! directions. A tangent vector DF(t)w with w in the unstable cone K^u is
//! projected onto T_q S_V and pushed by DT. Cone membership at a point q is
//! read off by pulling the vector back to the torus through the nearest
//! preimage of q under F and decomposing it in the eigenbasis of the cat map.
//! Steps that start or end near a singular point, measured in the eigenframe
//! of DT(P₁), are skipped; the first step after leaving such a neighbourhood
//! only re-seeds the membership state.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::singular::singular_eigen;
use super::{mat3_apply, norm, Mat3, Vec3};
use crate::error::{domain, Result};
use crate::geometry::{fricke, fricke_grad, Coupling, Point3, P1};
use crate::torus::{df_semiconj_raw, semiconj_raw, EigenData};
use crate::GOLDEN;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalParams {
    pub coupling: f64,
    pub samples: usize,
    pub n: usize,
    pub epsilon: f64,
    pub zeta: f64,
    /// Singular-neighbourhood radius in eigenframe coordinates; defaults to
    /// max(0.05, 2V).
    pub radius: Option<f64>,
    pub norm_cap: f64,
    pub max_tries_per_sample: usize,
    pub seed: u64,
}

impl Default for EmpiricalParams {
    fn default() -> Self {
        EmpiricalParams {
            coupling: 0.05,
            samples: 1000,
            n: 30,
            epsilon: 0.1,
            zeta: 0.1,
            radius: None,
            norm_cap: 10.0,
            max_tries_per_sample: 10_000,
            seed: 0,
        }
    }
}

impl EmpiricalParams {
    pub fn resolved_radius(&self) -> f64 {
        self.radius.unwrap_or(f64::max(0.05, 2.0 * self.coupling))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmpiricalStatus {
    Conclusive,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeViolation {
    pub sample_id: u64,
    pub step: usize,
    pub point: Point3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalReport {
    pub params: EmpiricalParams,
    pub radius: f64,
    pub status: EmpiricalStatus,
    pub samples_found: usize,
    pub tries: u64,
    /// Samples where pulling a vector back to the torus failed.
    pub inconclusive: usize,
    pub inconclusive_rate: f64,
    /// Steps outside the neighbourhood that started inside the cone.
    pub segments: u64,
    pub violations: u64,
    pub invariance_fraction: f64,
    /// min over conclusive samples of ‖DTⁿv‖ / (μ^{n(1−4ε)} ‖v‖).
    pub min_ratio: f64,
    pub min_ratio_start: Option<Point3>,
    /// min over counted steps of the expansion of the pulled-back torus
    /// vector.
    pub min_torus_step_ratio: f64,
    pub counterexamples: Vec<ConeViolation>,
}

struct Ctx {
    level: f64,
    radius: f64,
    frame_inv: Mat3,
    eig: EigenData,
    zeta: f64,
    inversion_tol: f64,
}

fn dt(q: Vec3) -> Mat3 {
    [[2.0 * q[1], 2.0 * q[0], -1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]
}

fn project_to_surface(mut q: Vec3, level: f64) -> Vec3 {
    for _ in 0..20 {
        let p = Point3::from_array(q);
        let g = fricke_grad(p);
        let gg = g[0] * g[0] + g[1] * g[1] + g[2] * g[2];
        if gg == 0.0 {
            break;
        }
        let r = (fricke(p) - level) / gg;
        q = [q[0] - r * g[0], q[1] - r * g[1], q[2] - r * g[2]];
    }
    q
}

/// Least squares J w ≈ v for the 3×2 Jacobian of F; returns w and the
/// smallest singular value of J.
fn lstsq(j: &[[f64; 2]; 3], v: Vec3) -> ([f64; 2], f64) {
    let (mut g00, mut g01, mut g11, mut r0, mut r1) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..3 {
        g00 += j[i][0] * j[i][0];
        g01 += j[i][0] * j[i][1];
        g11 += j[i][1] * j[i][1];
        r0 += j[i][0] * v[i];
        r1 += j[i][1] * v[i];
    }
    let det = g00 * g11 - g01 * g01;
    let tr = g00 + g11;
    let smin2 = 0.5 * (tr - ((g00 - g11).powi(2) + 4.0 * g01 * g01).sqrt());
    if det == 0.0 {
        return ([f64::NAN; 2], 0.0);
    }
    ([(g11 * r0 - g01 * r1) / det, (g00 * r1 - g01 * r0) / det], smin2.max(0.0).sqrt())
}

/// Nearest preimage of q under F: arccos guess over the four sign choices,
/// then Gauss-Newton. Returns the angles and the final residual.
fn inverse_semiconj(q: Vec3) -> ([f64; 2], f64) {
    let th = q[1].clamp(-1.0, 1.0).acos() / std::f64::consts::TAU;
    let ph = q[2].clamp(-1.0, 1.0).acos() / std::f64::consts::TAU;
    let mut best = (f64::INFINITY, [th, ph]);
    for a in [th, -th] {
        for b in [ph, -ph] {
            let e = ((std::f64::consts::TAU * (a + b)).cos() - q[0]).abs();
            if e < best.0 {
                best = (e, [a, b]);
            }
        }
    }
    let mut t = best.1;
    for _ in 0..30 {
        let f = semiconj_raw(t[0], t[1]).to_array();
        let r = [q[0] - f[0], q[1] - f[1], q[2] - f[2]];
        let (dt, _) = lstsq(&df_semiconj_raw(t[0], t[1]), r);
        if !(dt[0].is_finite() && dt[1].is_finite()) {
            break;
        }
        t = [t[0] + dt[0], t[1] + dt[1]];
        if dt[0].abs() + dt[1].abs() < 1e-15 {
            break;
        }
    }
    let f = semiconj_raw(t[0], t[1]).to_array();
    (t, norm([q[0] - f[0], q[1] - f[1], q[2] - f[2]]))
}

impl Ctx {
    /// Inside the union of the four singular neighbourhoods, or outside the
    /// cube enlarged by the radius.
    fn near_singular(&self, q: Vec3) -> bool {
        if q.iter().any(|x| x.abs() > 1.0 + self.radius) {
            return true;
        }
        let p1 = P1.to_array();
        [[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]].iter().any(|s| {
            let d = [s[0] * q[0] - p1[0], s[1] * q[1] - p1[1], s[2] * q[2] - p1[2]];
            norm(mat3_apply(&self.frame_inv, d)) < self.radius
        })
    }

    /// Cone membership of v at q and the norm of the pulled-back vector;
    /// `None` if the pull-back is unreliable.
    fn cone_state(&self, q: Vec3, v: Vec3) -> Option<(bool, f64)> {
        let (t, res) = inverse_semiconj(q);
        if !(res <= self.inversion_tol) {
            return None;
        }
        let (w, smin) = lstsq(&df_semiconj_raw(t[0], t[1]), v);
        if !(smin > 1e-6 * norm(v).clamp(1e-300, 1.0)) || !(w[0].is_finite() && w[1].is_finite()) {
            return None;
        }
        let (cu, cs) = self.eig.decompose(w);
        Some((cu.abs() > cs.abs() / self.zeta, w[0].hypot(w[1])))
    }
}

struct SampleOutcome {
    tries: u64,
    found: bool,
    inconclusive: bool,
    segments: u64,
    violations: Vec<(usize, Point3)>,
    ratio: f64,
    start: Point3,
    min_torus_step: f64,
}

fn bounded(q0: Vec3, n: usize, cap: f64) -> bool {
    let mut p = Point3::from_array(q0);
    for _ in 0..n {
        p = p.forward();
        if !(p.sup_norm() <= cap) {
            return false;
        }
    }
    let mut p = Point3::from_array(q0);
    for _ in 0..n {
        p = p.backward();
        if !(p.sup_norm() <= cap) {
            return false;
        }
    }
    true
}

fn run_sample(ctx: &Ctx, prm: &EmpiricalParams, id: u64) -> SampleOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(prm.seed);
    rng.set_stream(id);
    let mut out = SampleOutcome {
        tries: 0,
        found: false,
        inconclusive: false,
        segments: 0,
        violations: Vec::new(),
        ratio: f64::INFINITY,
        start: Point3::new(f64::NAN, f64::NAN, f64::NAN),
        min_torus_step: f64::INFINITY,
    };
    let mut q0 = [0.0; 3];
    while out.tries < prm.max_tries_per_sample as u64 {
        out.tries += 1;
        let t: [f64; 2] = [rng.random(), rng.random()];
        let q = project_to_surface(semiconj_raw(t[0], t[1]).to_array(), ctx.level);
        if q.iter().any(|x| !x.is_finite()) || ctx.near_singular(q) || !bounded(q, prm.n, prm.norm_cap) {
            continue;
        }
        q0 = q;
        out.found = true;
        break;
    }
    if !out.found {
        return out;
    }
    out.start = Point3::from_array(q0);
    let c: f64 = rng.random_range(-prm.zeta..prm.zeta) * 0.99;
    let w = [ctx.eig.v_u[0] + c * ctx.eig.v_s[0], ctx.eig.v_u[1] + c * ctx.eig.v_s[1]];
    let (t0, res) = inverse_semiconj(q0);
    if !(res <= ctx.inversion_tol) {
        out.inconclusive = true;
        return out;
    }
    let j = df_semiconj_raw(t0[0], t0[1]);
    let mut v = [j[0][0] * w[0] + j[0][1] * w[1], j[1][0] * w[0] + j[1][1] * w[1], j[2][0] * w[0] + j[2][1] * w[1]];
    let nn = fricke_grad(Point3::from_array(q0));
    let nn2 = nn[0] * nn[0] + nn[1] * nn[1] + nn[2] * nn[2];
    let vn = (v[0] * nn[0] + v[1] * nn[1] + v[2] * nn[2]) / nn2;
    v = [v[0] - vn * nn[0], v[1] - vn * nn[1], v[2] - vn * nn[2]];
    let v0 = norm(v);
    let mut q = q0;
    let Some((mut inc, mut wn)) = ctx.cone_state(q, v) else {
        out.inconclusive = true;
        return out;
    };
    for k in 0..prm.n {
        let v2 = mat3_apply(&dt(q), v);
        let q2 = Point3::from_array(q).forward().to_array();
        let out_q2 = !ctx.near_singular(q2);
        if !ctx.near_singular(q) && out_q2 {
            let Some((inc2, wn2)) = ctx.cone_state(q2, v2) else {
                out.inconclusive = true;
                return out;
            };
            if inc {
                out.segments += 1;
                out.min_torus_step = out.min_torus_step.min(wn2 / wn);
                if !inc2 {
                    out.violations.push((k, Point3::from_array(q)));
                }
            }
            inc = inc2;
            wn = wn2;
        } else if out_q2 {
            let Some((inc2, wn2)) = ctx.cone_state(q2, v2) else {
                out.inconclusive = true;
                return out;
            };
            inc = inc2;
            wn = wn2;
        } else {
            inc = false;
        }
        v = v2;
        q = q2;
    }
    out.ratio = norm(v) / (GOLDEN.powf(prm.n as f64 * (1.0 - 4.0 * prm.epsilon)) * v0);
    out
}

pub fn empirical_trace_certificate(prm: &EmpiricalParams) -> Result<EmpiricalReport> {
    let c = Coupling::new(prm.coupling)?;
    if c.v() > 0.5 {
        return domain(format!("coupling must lie in [0, 0.5], got {}", c.v()));
    }
    if prm.samples == 0 || prm.n == 0 {
        return domain("samples and n must be positive");
    }
    if !(prm.epsilon > 0.0 && prm.epsilon < 0.25) {
        return domain(format!("epsilon must lie in (0, 1/4), got {}", prm.epsilon));
    }
    if !(prm.zeta > 0.0 && prm.zeta < 1.0) {
        return domain(format!("zeta must lie in (0, 1), got {}", prm.zeta));
    }
    let radius = prm.resolved_radius();
    if !(radius > 0.0 && prm.norm_cap > 1.0) {
        return domain("radius must be positive and the norm cap above 1");
    }
    let ctx = Ctx {
        level: c.level(),
        radius,
        frame_inv: singular_eigen().frame_inverse(),
        eig: EigenData::new(),
        zeta: prm.zeta,
        inversion_tol: 1e-8 + 2.0 * c.v(),
    };
    let outcomes: Vec<SampleOutcome> = (0..prm.samples as u64).into_par_iter().map(|i| run_sample(&ctx, prm, i)).collect();
    let mut r = EmpiricalReport {
        params: *prm,
        radius,
        status: EmpiricalStatus::Conclusive,
        samples_found: 0,
        tries: 0,
        inconclusive: 0,
        inconclusive_rate: 0.0,
        segments: 0,
        violations: 0,
        invariance_fraction: 1.0,
        min_ratio: f64::INFINITY,
        min_ratio_start: None,
        min_torus_step_ratio: f64::INFINITY,
        counterexamples: Vec::new(),
    };
    for (i, o) in outcomes.into_iter().enumerate() {
        r.tries += o.tries;
        if !o.found {
            continue;
        }
        r.samples_found += 1;
        if o.inconclusive {
            r.inconclusive += 1;
            continue;
        }
        r.segments += o.segments;
        r.violations += o.violations.len() as u64;
        for (step, point) in o.violations {
            if r.counterexamples.len() < 20 {
                r.counterexamples.push(ConeViolation { sample_id: i as u64, step, point });
            }
        }
        r.min_torus_step_ratio = r.min_torus_step_ratio.min(o.min_torus_step);
        if o.ratio < r.min_ratio {
            r.min_ratio = o.ratio;
            r.min_ratio_start = Some(o.start);
        }
    }
    if r.samples_found == 0 || r.inconclusive == r.samples_found {
        r.status = EmpiricalStatus::Inconclusive;
    } else {
        r.inconclusive_rate = r.inconclusive as f64 / r.samples_found as f64;
    }
    if r.samples_found == 0 {
        r.inconclusive_rate = 1.0;
    }
    if r.segments > 0 {
        r.invariance_fraction = 1.0 - r.violations as f64 / r.segments as f64;
    }
    Ok(r)
}
