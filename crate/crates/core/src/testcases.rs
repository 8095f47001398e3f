//! Benchmark problems and their mesh generators.
//!
//! * `curved_quad`: `0 <= x <= 1`, `g1(x) <= y <= g2(x)` with
//!   `g1 = sin(pi x) / 20`, `g2 = 1 + sin(3 pi x) / 20`.
//! * `circle`: the unit disk, `u = 1 - r^2`.
//! * `annulus`: `0.4 <= r <= 1`, `u = -(r^2 - 1)(r^2 - 0.16)`.
//! * `patch`: the unit square with a polynomial solution the scheme
//!   reproduces exactly on straight meshes.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::geometry::{AnalyticCurve, EdgeShape, Mesh, Point2, SignedEdge};

fn g1(x: f64) -> f64 {
    (PI * x).sin() / 20.0
}

fn g1_slope(x: f64) -> f64 {
    PI * (PI * x).cos() / 20.0
}

fn g1_curv(x: f64) -> f64 {
    -PI * PI * (PI * x).sin() / 20.0
}

fn g2(x: f64) -> f64 {
    1.0 + (3.0 * PI * x).sin() / 20.0
}

fn g2_slope(x: f64) -> f64 {
    3.0 * PI * (3.0 * PI * x).cos() / 20.0
}

fn g2_curv(x: f64) -> f64 {
    -9.0 * PI * PI * (3.0 * PI * x).sin() / 20.0
}

pub static CASE1_G1: AnalyticCurve = AnalyticCurve {
    name: "case1_g1",
    value: g1,
    slope: g1_slope,
};

pub static CASE1_G2: AnalyticCurve = AnalyticCurve {
    name: "case1_g2",
    value: g2,
    slope: g2_slope,
};

static REGISTRY: [&AnalyticCurve; 2] = [&CASE1_G1, &CASE1_G2];

/// Resolves a curve name used by `graph` edges in mesh files.
pub fn lookup_curve(name: &str) -> Option<&'static AnalyticCurve> {
    REGISTRY.iter().copied().find(|c| c.name == name)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    /// Boundary edges follow the exact boundary.
    Curved,
    /// Boundary edges are chords between boundary nodes.
    Straight,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CaseKind {
    CurvedQuad,
    Circle,
    Annulus,
    Patch,
}

impl CaseKind {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "curved_quad" => CaseKind::CurvedQuad,
            "circle" => CaseKind::Circle,
            "annulus" => CaseKind::Annulus,
            "patch" => CaseKind::Patch,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            CaseKind::CurvedQuad => "curved_quad",
            CaseKind::Circle => "circle",
            CaseKind::Annulus => "annulus",
            CaseKind::Patch => "patch",
        }
    }

    /// Mesh for a refinement level. For `curved_quad` and `patch` the level is
    /// the number of divisions per direction; for `circle` and `annulus` it is
    /// the 1-based refinement index.
    pub fn mesh(self, level: usize, variant: Variant) -> Result<Mesh> {
        match self {
            CaseKind::CurvedQuad => case1_mesh(level, variant),
            CaseKind::Circle => {
                check_level(level)?;
                Ok(circle_mesh(level, variant))
            }
            CaseKind::Annulus => {
                check_level(level)?;
                Ok(annulus_mesh(level, variant))
            }
            CaseKind::Patch => {
                if level == 0 {
                    return Err(Error::InvalidArgument("patch mesh needs at least one division".into()));
                }
                Ok(square_mesh(level))
            }
        }
    }

    /// Nominal mesh size of a level, the `h` used for convergence rates.
    pub fn nominal_h(self, level: usize) -> f64 {
        match self {
            CaseKind::CurvedQuad | CaseKind::Patch => 1.0 / level as f64,
            CaseKind::Circle | CaseKind::Annulus => 0.3 / (1u64 << (level - 1)) as f64,
        }
    }

    /// The manufactured solution; `patch` depends on the element order.
    pub fn problem(self, order: usize) -> &'static TestCase {
        match self {
            CaseKind::CurvedQuad => &CASE1,
            CaseKind::Circle => &CASE2,
            CaseKind::Annulus => &CASE3,
            CaseKind::Patch if order <= 2 => &PATCH_LINEAR,
            CaseKind::Patch => &PATCH_QUADRATIC,
        }
    }
}

fn check_level(level: usize) -> Result<()> {
    if !(1..=8).contains(&level) {
        return Err(Error::InvalidArgument(format!("refinement level {level} outside 1..=8")));
    }
    Ok(())
}

/// Closed-form data of a manufactured problem `-Δu = f`, `u = g` on the
/// boundary.
pub struct TestCase {
    pub name: &'static str,
    pub u: fn(Point2) -> f64,
    pub grad_u: fn(Point2) -> Point2,
    pub f: fn(Point2) -> f64,
    pub g: fn(Point2) -> f64,
}

fn zero(_: Point2) -> f64 {
    0.0
}

fn case1_u(p: Point2) -> f64 {
    p.x * (p.x - 1.0) * (p.y - g1(p.x)) * (p.y - g2(p.x))
}

fn case1_grad(p: Point2) -> Point2 {
    let (x, y) = (p.x, p.y);
    let q = x * (x - 1.0);
    let (a, b) = (y - g1(x), y - g2(x));
    let dx = (2.0 * x - 1.0) * a * b - q * (g1_slope(x) * b + a * g2_slope(x));
    let dy = q * (a + b);
    Point2::new(dx, dy)
}

/// `-Δu` for `u = q(x) a(x, y) b(x, y)`, `q = x(x-1)`, `a = y - g1`,
/// `b = y - g2`, expanded by the product rule.
fn case1_f(p: Point2) -> f64 {
    let (x, y) = (p.x, p.y);
    let q = x * (x - 1.0);
    let dq = 2.0 * x - 1.0;
    let (a, b) = (y - g1(x), y - g2(x));
    let (da, db) = (-g1_slope(x), -g2_slope(x));
    let (d2a, d2b) = (-g1_curv(x), -g2_curv(x));
    let uxx = 2.0 * a * b + 2.0 * dq * (da * b + a * db) + q * (d2a * b + 2.0 * da * db + a * d2b);
    let uyy = 2.0 * q;
    -(uxx + uyy)
}

pub static CASE1: TestCase = TestCase {
    name: "curved_quad",
    u: case1_u,
    grad_u: case1_grad,
    f: case1_f,
    g: zero,
};

pub static CASE2: TestCase = TestCase {
    name: "circle",
    u: |p| 1.0 - (p.x * p.x + p.y * p.y),
    grad_u: |p| Point2::new(-2.0 * p.x, -2.0 * p.y),
    f: |_| 4.0,
    g: zero,
};

pub static CASE3: TestCase = TestCase {
    name: "annulus",
    u: |p| {
        let r2 = p.x * p.x + p.y * p.y;
        -(r2 - 1.0) * (r2 - 0.16)
    },
    grad_u: |p| {
        let r2 = p.x * p.x + p.y * p.y;
        p * -(4.0 * r2 - 2.32)
    },
    f: |p| 16.0 * (p.x * p.x + p.y * p.y) - 4.64,
    g: zero,
};

pub static PATCH_LINEAR: TestCase = TestCase {
    name: "patch_linear",
    u: |p| 1.0 + 2.0 * p.x - 3.0 * p.y,
    grad_u: |_| Point2::new(2.0, -3.0),
    f: |_| 0.0,
    g: |p| 1.0 + 2.0 * p.x - 3.0 * p.y,
};

pub static PATCH_QUADRATIC: TestCase = TestCase {
    name: "patch_quadratic",
    u: |p| p.x * p.x - p.x * p.y + 2.0 * p.y * p.y,
    grad_u: |p| Point2::new(2.0 * p.x - p.y, -p.x + 4.0 * p.y),
    f: |_| -6.0,
    g: |p| p.x * p.x - p.x * p.y + 2.0 * p.y * p.y,
};

/// Node map from the unit square onto the curved quadrilateral domain.
pub fn case1_map(xs: f64, ys: f64) -> Point2 {
    if ys <= 0.5 {
        Point2::new(xs, ys + g1(xs) * (1.0 - 2.0 * ys))
    } else {
        Point2::new(xs, 1.0 - ys + g2(xs) * (2.0 * ys - 1.0))
    }
}

/// Structured `n x n` quadrilateral mesh with nodes `node(i, j)`; the bottom
/// and top rows may use custom edge shapes.
fn structured_quads(
    n: usize,
    node: impl Fn(usize, usize) -> Point2,
    bottom: impl Fn(Point2, Point2) -> EdgeShape,
    top: impl Fn(Point2, Point2) -> EdgeShape,
) -> Mesh {
    let vid = |i: usize, j: usize| i + j * (n + 1);
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push(node(i, j));
        }
    }
    let mut edges = Vec::new();
    // horizontal edges, row-major, then vertical edges
    for j in 0..=n {
        for i in 0..n {
            let (a, b) = (vid(i, j), vid(i + 1, j));
            let shape = if j == 0 {
                bottom(vertices[a], vertices[b])
            } else if j == n {
                top(vertices[a], vertices[b])
            } else {
                EdgeShape::Line
            };
            edges.push((a, b, shape));
        }
    }
    let hcount = edges.len();
    for j in 0..n {
        for i in 0..=n {
            edges.push((vid(i, j), vid(i, j + 1), EdgeShape::Line));
        }
    }
    let h = |i: usize, j: usize| i + j * n;
    let v = |i: usize, j: usize| hcount + i + j * (n + 1);
    let mut loops = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            loops.push(vec![
                SignedEdge::new(h(i, j), true),
                SignedEdge::new(v(i + 1, j), true),
                SignedEdge::new(h(i, j + 1), false),
                SignedEdge::new(v(i, j), false),
            ]);
        }
    }
    Mesh::new(vertices, edges, loops).expect("structured quad mesh is well formed")
}

/// Uniform `n x n` mesh of the unit square.
pub fn square_mesh(n: usize) -> Mesh {
    let s = n as f64;
    structured_quads(
        n,
        |i, j| Point2::new(i as f64 / s, j as f64 / s),
        |_, _| EdgeShape::Line,
        |_, _| EdgeShape::Line,
    )
}

/// `n x n` mesh of the curved quadrilateral domain. Interior edges are
/// straight; the edges on `y = g1` and `y = g2` are graph curves (curved
/// variant) or chords (straight variant).
pub fn case1_mesh(n: usize, variant: Variant) -> Result<Mesh> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("case 1 needs an even division count >= 2, got {n}")));
    }
    let s = n as f64;
    let graph = |curve: &'static AnalyticCurve| {
        move |a: Point2, b: Point2| match variant {
            Variant::Curved => EdgeShape::Graph { curve, x0: a.x, x1: b.x },
            Variant::Straight => EdgeShape::Line,
        }
    };
    Ok(structured_quads(
        n,
        |i, j| case1_map(i as f64 / s, j as f64 / s),
        graph(&CASE1_G1),
        graph(&CASE1_G2),
    ))
}

/// Polar mesh layout: `rings` radial layers between `inner` and `outer`. Ring
/// `j` uses `sectors[j]` angular cells; counts double outward when the outer
/// arc of a cell would exceed 1.5 radial steps, which leaves hanging nodes
/// that turn the inner-ring cells into pentagons.
pub const CIRCLE_RINGS: usize = 5;
pub const CIRCLE_SECTORS: usize = 6;
pub const ANNULUS_RINGS: usize = 3;
pub const ANNULUS_SECTORS: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub struct PolarLayout {
    pub inner: f64,
    pub outer: f64,
    pub rings: usize,
    pub sectors: Vec<usize>,
    /// Circumferential edges away from the boundary are circular arcs.
    pub interior_arcs: bool,
}

impl PolarLayout {
    pub fn new(inner: f64, outer: f64, rings: usize, base_sectors: usize) -> Self {
        let dr = (outer - inner) / rings as f64;
        let mut sectors = Vec::with_capacity(rings);
        let mut m = base_sectors;
        for j in 1..=rings {
            let r = inner + j as f64 * dr;
            while r * TAU / m as f64 > 1.5 * dr {
                m *= 2;
            }
            sectors.push(m);
        }
        Self {
            inner,
            outer,
            rings,
            sectors,
            interior_arcs: true,
        }
    }

    /// Uniform refinement: every ring split in two radially and every sector
    /// halved, `times` times.
    pub fn refined(&self, times: u32) -> Self {
        let f = 1usize << times;
        Self {
            inner: self.inner,
            outer: self.outer,
            rings: self.rings * f,
            sectors: self.sectors.iter().flat_map(|&m| std::iter::repeat_n(m * f, f)).collect(),
            interior_arcs: self.interior_arcs,
        }
    }

    pub fn build(&self, variant: Variant) -> Mesh {
        let disk = self.inner == 0.0;
        let dr = (self.outer - self.inner) / self.rings as f64;
        let radius = |j: usize| {
            if j == self.rings {
                self.outer
            } else {
                self.inner + j as f64 * dr
            }
        };
        // circle j carries the nodes of the finer adjacent ring
        let count = |j: usize| self.sectors[j.min(self.rings - 1)];
        let first_circle = if disk { 1 } else { 0 };

        let mut vertices = Vec::new();
        if disk {
            vertices.push(Point2::new(0.0, 0.0));
        }
        let mut circle_start = vec![0usize; self.rings + 1];
        for j in first_circle..=self.rings {
            circle_start[j] = vertices.len();
            let (r, c) = (radius(j), count(j));
            for i in 0..c {
                let th = TAU * i as f64 / c as f64;
                vertices.push(Point2::new(r * th.cos(), r * th.sin()));
            }
        }
        let node = |j: usize, i: usize| circle_start[j] + i % count(j);

        let mut edges = Vec::new();
        let mut circ_start = vec![0usize; self.rings + 1];
        for j in first_circle..=self.rings {
            circ_start[j] = edges.len();
            let (r, c) = (radius(j), count(j));
            let on_boundary = j == self.rings || (!disk && j == 0);
            let arc = if on_boundary {
                variant == Variant::Curved
            } else {
                self.interior_arcs
            };
            for i in 0..c {
                let shape = if arc {
                    EdgeShape::Arc {
                        center: Point2::default(),
                        radius: r,
                        theta0: TAU * i as f64 / c as f64,
                        theta1: TAU * (i + 1) as f64 / c as f64,
                    }
                } else {
                    EdgeShape::Line
                };
                edges.push((node(j, i), node(j, i + 1), shape));
            }
        }
        let mut radial_start = vec![0usize; self.rings + 1];
        for j in 1..=self.rings {
            radial_start[j] = edges.len();
            let m = self.sectors[j - 1];
            for i in 0..m {
                let outer = node(j, i * (count(j) / m));
                let inner = if disk && j == 1 { 0 } else { node(j - 1, i) };
                edges.push((inner, outer, EdgeShape::Line));
            }
        }

        let mut loops = Vec::new();
        for j in 1..=self.rings {
            let m = self.sectors[j - 1];
            let q = count(j) / m;
            for i in 0..m {
                let mut lp = vec![SignedEdge::new(radial_start[j] + i, true)];
                for s in 0..q {
                    lp.push(SignedEdge::new(circ_start[j] + i * q + s, true));
                }
                lp.push(SignedEdge::new(radial_start[j] + (i + 1) % m, false));
                if !(disk && j == 1) {
                    lp.push(SignedEdge::new(circ_start[j - 1] + i, false));
                }
                loops.push(lp);
            }
        }
        Mesh::new(vertices, edges, loops).expect("polar mesh is well formed")
    }
}

pub fn circle_layout(level: usize) -> PolarLayout {
    PolarLayout::new(0.0, 1.0, CIRCLE_RINGS, CIRCLE_SECTORS).refined(level as u32 - 1)
}

pub fn annulus_layout(level: usize) -> PolarLayout {
    PolarLayout::new(0.4, 1.0, ANNULUS_RINGS, ANNULUS_SECTORS).refined(level as u32 - 1)
}

/// Unit disk: a central fan of circular sectors surrounded by rings of
/// annular cells.
pub fn circle_mesh(level: usize, variant: Variant) -> Mesh {
    circle_layout(level).build(variant)
}

pub fn annulus_mesh(level: usize, variant: Variant) -> Mesh {
    annulus_layout(level).build(variant)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::validate;
    use approx::assert_relative_eq;

    #[test]
    fn case1_map_fixed_points() {
        assert_eq!(case1_map(0.5, 0.5), Point2::new(0.5, 0.5));
        let b = case1_map(0.5, 0.0);
        assert_relative_eq!(b.y, 0.05, max_relative = 1e-15);
        let t = case1_map(0.5, 1.0);
        assert_relative_eq!(t.y, 0.95, max_relative = 1e-15);
    }

    #[test]
    fn case1_rejects_odd() {
        assert!(case1_mesh(7, Variant::Curved).is_err());
        assert!(case1_mesh(0, Variant::Curved).is_err());
    }

    #[test]
    fn case1_boundary_solution_vanishes() {
        for i in 0..=10 {
            let x = i as f64 / 10.0;
            assert!((CASE1.u)(Point2::new(x, g1(x))).abs() < 1e-16);
            assert!((CASE1.u)(Point2::new(x, g2(x))).abs() < 1e-16);
            assert_eq!((CASE1.u)(Point2::new(0.0, x)), 0.0);
            assert_eq!((CASE1.u)(Point2::new(1.0, x)), 0.0);
        }
    }

    #[test]
    fn case1_f_matches_symbolic_values() {
        // reference values from symbolic differentiation
        assert_relative_eq!((CASE1.f)(Point2::new(0.5, 0.5)), 0.349_834_752_438_723_7, max_relative = 1e-13);
        assert_relative_eq!((CASE1.f)(Point2::new(0.3, 0.2)), 0.757_883_656_323_241, max_relative = 1e-13);
    }

    #[test]
    fn case3_source_on_inner_circle() {
        assert_relative_eq!((CASE3.f)(Point2::new(0.4, 0.0)), -2.08, max_relative = 1e-14);
        assert!((CASE3.u)(Point2::new(0.0, 0.4)).abs() < 1e-16);
        assert!((CASE3.u)(Point2::new(0.6, 0.8)).abs() < 1e-15);
        assert_eq!((CASE2.u)(Point2::default()), 1.0);
    }

    #[test]
    fn variants_share_interior() {
        let c = case1_mesh(8, Variant::Curved).unwrap();
        let s = case1_mesh(8, Variant::Straight).unwrap();
        assert_eq!(c.vertices, s.vertices);
        for (a, b) in c.edges.iter().zip(&s.edges) {
            assert_eq!(a.vertices, b.vertices);
            if !a.boundary || a.is_straight() {
                assert_eq!(a.curve, b.curve);
            }
        }
    }

    #[test]
    fn domain_areas() {
        let c1 = case1_mesh(8, Variant::Curved).unwrap();
        assert_relative_eq!(c1.total_area(), 1.0 - 1.0 / (15.0 * PI), max_relative = 1e-10);
        for level in 1..=3 {
            assert_relative_eq!(circle_mesh(level, Variant::Curved).total_area(), PI, max_relative = 1e-10);
            assert_relative_eq!(annulus_mesh(level, Variant::Curved).total_area(), 0.84 * PI, max_relative = 1e-10);
        }
    }

    #[test]
    fn generated_meshes_are_regular() {
        let meshes = [
            case1_mesh(16, Variant::Curved).unwrap(),
            case1_mesh(16, Variant::Straight).unwrap(),
            circle_mesh(2, Variant::Curved),
            annulus_mesh(2, Variant::Curved),
        ];
        for m in &meshes {
            let r = validate(m).unwrap();
            assert!(r.min_area_ratio > 0.05, "{r:?}");
        }
    }

    #[test]
    fn polar_levels_track_target_h() {
        for level in 1..=5 {
            for kind in [CaseKind::Circle, CaseKind::Annulus] {
                let m = kind.mesh(level, Variant::Curved).unwrap();
                let target = kind.nominal_h(level);
                assert!((m.h - target).abs() <= 0.15 * target, "{kind:?} level {level}: h = {}", m.h);
            }
        }
    }

    #[test]
    fn registry_resolves() {
        assert_eq!(lookup_curve("case1_g1").unwrap().name, "case1_g1");
        assert!(lookup_curve("case1_g3").is_none());
    }
}
