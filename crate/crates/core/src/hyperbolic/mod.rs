//! Expansion near the singular points: the linearization at P₁, the cone
//! field K_p, the recurrence estimates behind it, synthetic maps of the
//! normal form, and an empirical certificate for the trace map itself.

pub mod certificate;
pub mod empirical;
pub mod model_map;
pub mod recurrence;
pub mod singular;

pub use certificate::{expansion_certificate, model_map_sweep, CertifyParams, ExpansionReport, SweepSummary};
pub use empirical::{empirical_trace_certificate, EmpiricalParams, EmpiricalReport};
pub use model_map::{make_model_map, ModelMap, ModelMapAudit, ModelMapSpec};
pub use recurrence::{
    find_passing_pair, min_passing_n, run_aa, run_dd, PassingPair, RecurrenceFlags, RecurrenceKind,
    RecurrenceParams, RecurrenceRun, SlackSchedule, DEFAULT_N_REF,
};
pub use singular::{cone_member_3d, singular_eigen, ConeSpec3D, SingularEigenData};

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

pub fn mat3_apply(m: &Mat3, v: Vec3) -> Vec3 {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

pub fn det3(m: &Mat3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Inverse by cofactors; `None` when the determinant vanishes.
pub fn inv3(m: &Mat3) -> Option<Mat3> {
    let d = det3(m);
    if d == 0.0 || !d.is_finite() {
        return None;
    }
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
            let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
            *x = (m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]) / d;
        }
    }
    Some(out)
}

pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

/// |v_x| + |v_y| + |v_z|.
pub fn norm1(a: Vec3) -> f64 {
    a[0].abs() + a[1].abs() + a[2].abs()
}
