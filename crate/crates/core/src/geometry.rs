//! The trace map, the Fricke invariant and the surfaces it cuts out.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Default half-width of the excluded band around the pole of the
/// period-two curve.
pub const PER2_EXCLUSION: f64 = 1e-6;

/// A point of phase space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }

    /// Builds a point, rejecting non-finite coordinates.
    pub fn try_new(x: f64, y: f64, z: f64) -> Result<Self> {
        let p = Point3 { x, y, z };
        p.check()?;
        Ok(p)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    fn check(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            domain(format!("non-finite point ({}, {}, {})", self.x, self.y, self.z))
        }
    }

    /// One step of the trace map, without the finiteness check.
    #[inline]
    pub fn forward(self) -> Self {
        Point3::new(2.0 * self.x * self.y - self.z, self.x, self.y)
    }

    /// One step of the inverse map, without the finiteness check.
    #[inline]
    pub fn backward(self) -> Self {
        Point3::new(self.y, self.z, 2.0 * self.y * self.z - self.x)
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Point3::new(a[0], a[1], a[2])
    }

    pub fn sup_norm(&self) -> f64 {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }

    pub fn dist(&self, other: &Point3) -> f64 {
        let (a, b, c) = (self.x - other.x, self.y - other.y, self.z - other.z);
        (a * a + b * b + c * c).sqrt()
    }
}

/// The coupling constant V ≥ 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Coupling(f64);

impl Coupling {
    pub fn new(v: f64) -> Result<Self> {
        if v.is_finite() && v >= 0.0 {
            Ok(Coupling(v))
        } else {
            domain(format!("coupling must be finite and non-negative, got {v}"))
        }
    }

    pub fn v(self) -> f64 {
        self.0
    }

    /// The Fricke level V²/4 of the invariant surface.
    pub fn level(self) -> f64 {
        0.25 * self.0 * self.0
    }
}

/// The invariant surface S_V with a membership tolerance on the Fricke value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceSpec {
    pub coupling: Coupling,
    pub membership_tolerance: f64,
}

impl SurfaceSpec {
    pub fn new(coupling: Coupling, membership_tolerance: f64) -> Result<Self> {
        if !(membership_tolerance > 0.0 && membership_tolerance < 1e-2) {
            return domain(format!(
                "membership tolerance must lie in (0, 1e-2), got {membership_tolerance}"
            ));
        }
        Ok(SurfaceSpec { coupling, membership_tolerance })
    }
}

/// T(x,y,z) = (2xy − z, x, y).
pub fn trace_step(p: Point3) -> Result<Point3> {
    p.check()?;
    Ok(p.forward())
}

/// T⁻¹(x,y,z) = (y, z, 2yz − x).
pub fn trace_step_inv(p: Point3) -> Result<Point3> {
    p.check()?;
    Ok(p.backward())
}

/// G(x,y,z) = x² + y² + z² − 2xyz − 1.
#[inline]
pub fn fricke(p: Point3) -> f64 {
    p.x * p.x + p.y * p.y + p.z * p.z - 2.0 * p.x * p.y * p.z - 1.0
}

/// Gradient of the Fricke invariant.
#[inline]
pub fn fricke_grad(p: Point3) -> [f64; 3] {
    [
        2.0 * (p.x - p.y * p.z),
        2.0 * (p.y - p.x * p.z),
        2.0 * (p.z - p.x * p.y),
    ]
}

pub fn on_surface(p: Point3, s: &SurfaceSpec) -> bool {
    (fricke(p) - s.coupling.level()).abs() <= s.membership_tolerance
}

/// The point ((E−V)/2, E/2, 1) of the line ℓ_V.
pub fn line_point(energy: f64, c: Coupling) -> Point3 {
    Point3::new(0.5 * (energy - c.v()), 0.5 * energy, 1.0)
}

/// The point (x, x/(2x−1), x) of the period-two curve.
pub fn per2_point(x: f64) -> Result<Point3> {
    per2_point_with_band(x, PER2_EXCLUSION)
}

pub fn per2_point_with_band(x: f64, band: f64) -> Result<Point3> {
    if !x.is_finite() {
        return domain(format!("non-finite abscissa {x}"));
    }
    if (x - 0.5).abs() < band {
        return domain(format!(
            "x = {x} lies within {band} of the pole x = 1/2 of the period-two curve"
        ));
    }
    Ok(Point3::new(x, x / (2.0 * x - 1.0), x))
}

pub const P1: Point3 = Point3::new(1.0, 1.0, 1.0);
pub const P2: Point3 = Point3::new(1.0, -1.0, -1.0);
pub const P3: Point3 = Point3::new(-1.0, 1.0, -1.0);
pub const P4: Point3 = Point3::new(-1.0, -1.0, 1.0);

/// The four singular points of the Cayley cubic and their orbit structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularOrbit {
    pub points: [Point3; 4],
    pub p1_fixed: bool,
    pub three_cycle: bool,
}

pub fn singular_orbit() -> SingularOrbit {
    let points = [P1, P2, P3, P4];
    let p1_fixed = P1.forward() == P1;
    let three_cycle = P2.forward() == P3 && P3.forward() == P4 && P4.forward() == P2;
    SingularOrbit { points, p1_fixed, three_cycle }
}

/// The z-values above one mesh node. `upper` alone is set when the
/// discriminant vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshNode {
    pub x: f64,
    pub y: f64,
    pub upper: Option<f64>,
    pub lower: Option<f64>,
}

/// Sampled surface S_V over a rectangular (x, y) grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceMesh {
    pub spec: SurfaceSpec,
    pub nx: usize,
    pub ny: usize,
    /// Row-major over y then x.
    pub nodes: Vec<MeshNode>,
    /// True where the discriminant is negative and no real z exists.
    pub branch_mask: Vec<bool>,
    /// Roots dropped because rounding pushed them past the tolerance.
    pub rejected: usize,
}

/// Sheet label of an emitted mesh point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sheet {
    #[serde(rename = "+")]
    Upper,
    #[serde(rename = "-")]
    Lower,
}

impl Sheet {
    pub fn symbol(self) -> &'static str {
        match self {
            Sheet::Upper => "+",
            Sheet::Lower => "-",
        }
    }
}

impl SurfaceMesh {
    pub fn points(&self) -> impl Iterator<Item = (Point3, Sheet)> + '_ {
        self.nodes.iter().flat_map(|n| {
            let up = n.upper.map(|z| (Point3::new(n.x, n.y, z), Sheet::Upper));
            let lo = n.lower.map(|z| (Point3::new(n.x, n.y, z), Sheet::Lower));
            up.into_iter().chain(lo)
        })
    }

    pub fn point_count(&self) -> usize {
        self.nodes
            .iter()
            .map(|n| n.upper.is_some() as usize + n.lower.is_some() as usize)
            .sum()
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let h = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|i| if i + 1 == n { hi } else { lo + h * i as f64 })
        .collect()
}

/// Solves z² − 2xyz + (x²+y²−1−V²/4) = 0 on a grid.
pub fn surface_mesh(
    s: &SurfaceSpec,
    x_range: (f64, f64),
    y_range: (f64, f64),
    resolution: usize,
) -> Result<SurfaceMesh> {
    if resolution < 2 {
        return domain(format!("mesh resolution must be at least 2, got {resolution}"));
    }
    for (name, (a, b)) in [("x_range", x_range), ("y_range", y_range)] {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return domain(format!("{name} must be a finite increasing pair, got ({a}, {b})"));
        }
    }
    let level = s.coupling.level();
    let xs = linspace(x_range.0, x_range.1, resolution);
    let ys = linspace(y_range.0, y_range.1, resolution);
    let mut nodes = Vec::with_capacity(resolution * resolution);
    let mut branch_mask = Vec::with_capacity(resolution * resolution);
    let mut rejected = 0;
    let polish = |x: f64, y: f64, z: f64| -> Option<f64> {
        let p = Point3::new(x, y, z);
        let g = fricke(p) - level;
        let dg = 2.0 * (z - x * y);
        let z = if dg != 0.0 && g != 0.0 { z - g / dg } else { z };
        let q = Point3::new(x, y, z);
        on_surface(q, s).then_some(z)
    };
    for &y in &ys {
        for &x in &xs {
            let disc = (x * x - 1.0) * (y * y - 1.0) + level;
            let b = x * y;
            let mut node = MeshNode { x, y, upper: None, lower: None };
            if disc < 0.0 {
                branch_mask.push(true);
                nodes.push(node);
                continue;
            }
            branch_mask.push(false);
            if disc == 0.0 {
                match polish(x, y, b) {
                    Some(z) => node.upper = Some(z),
                    None => rejected += 1,
                }
            } else {
                let r = disc.sqrt();
                let c = x * x + y * y - 1.0 - level;
                let z1 = if b >= 0.0 { b + r } else { b - r };
                let z2 = c / z1;
                let (hi, lo) = if z1 >= z2 { (z1, z2) } else { (z2, z1) };
                match polish(x, y, hi) {
                    Some(z) => node.upper = Some(z),
                    None => rejected += 1,
                }
                match polish(x, y, lo) {
                    Some(z) => node.lower = Some(z),
                    None => rejected += 1,
                }
            }
            nodes.push(node);
        }
    }
    Ok(SurfaceMesh { spec: *s, nx: resolution, ny: resolution, nodes, branch_mask, rejected })
}
