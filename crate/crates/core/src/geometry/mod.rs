//! Curved polygonal meshes.
//!
//! Every edge carries a parametric map `F_e : [0, 1] -> R^2`. Straight edges
//! are affine, arcs are parameterized by angle and graph curves by `x`, each
//! affine in the edge parameter `t`. Elements are counterclockwise loops of
//! signed edge references.

mod io;
mod validate;

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::quadrature;

pub use io::{read_mesh, read_mesh_str, write_mesh, write_mesh_string};
pub use validate::{validate, RegularityReport};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 2D cross product.
    pub fn cross(self, other: Self) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Self) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

/// A named closed-form curve `y = g(x)` usable as edge geometry.
pub struct AnalyticCurve {
    pub name: &'static str,
    pub value: fn(f64) -> f64,
    pub slope: fn(f64) -> f64,
}

impl fmt::Debug for AnalyticCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name)
    }
}

impl PartialEq for AnalyticCurve {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CurveSpec {
    Line {
        p0: Point2,
        p1: Point2,
    },
    Arc {
        center: Point2,
        radius: f64,
        theta0: f64,
        theta1: f64,
    },
    Graph {
        curve: &'static AnalyticCurve,
        x0: f64,
        x1: f64,
    },
}

impl CurveSpec {
    /// `F_e(t)` without range checking.
    pub fn eval(&self, t: f64) -> Point2 {
        match *self {
            CurveSpec::Line { p0, p1 } => p0 + (p1 - p0) * t,
            CurveSpec::Arc {
                center,
                radius,
                theta0,
                theta1,
            } => {
                let th = theta0 + t * (theta1 - theta0);
                center + Point2::new(th.cos(), th.sin()) * radius
            }
            CurveSpec::Graph { curve, x0, x1 } => {
                let x = x0 + t * (x1 - x0);
                Point2::new(x, (curve.value)(x))
            }
        }
    }

    /// `dF_e/dt`.
    pub fn derivative(&self, t: f64) -> Point2 {
        match *self {
            CurveSpec::Line { p0, p1 } => p1 - p0,
            CurveSpec::Arc {
                radius,
                theta0,
                theta1,
                ..
            } => {
                let th = theta0 + t * (theta1 - theta0);
                Point2::new(-th.sin(), th.cos()) * (radius * (theta1 - theta0))
            }
            CurveSpec::Graph { curve, x0, x1 } => {
                let x = x0 + t * (x1 - x0);
                Point2::new(1.0, (curve.slope)(x)) * (x1 - x0)
            }
        }
    }

    pub fn is_straight(&self) -> bool {
        matches!(self, CurveSpec::Line { .. })
    }

    fn check(&self, edge: usize) -> Result<()> {
        let degenerate = |reason: &str| {
            Err(Error::DegenerateCurve {
                edge,
                reason: reason.to_string(),
            })
        };
        match *self {
            CurveSpec::Line { p0, p1 } => {
                if !p0.is_finite() || !p1.is_finite() {
                    return degenerate("non-finite endpoint");
                }
                if p0 == p1 {
                    return degenerate("zero-length line");
                }
            }
            CurveSpec::Arc {
                center,
                radius,
                theta0,
                theta1,
            } => {
                if !center.is_finite() || !(radius > 0.0) || !radius.is_finite() {
                    return degenerate("arc radius must be positive");
                }
                if theta0 == theta1 || !theta0.is_finite() || !theta1.is_finite() {
                    return degenerate("arc has empty angular span");
                }
                if (theta1 - theta0).abs() >= PI {
                    return degenerate("arc spans half a turn or more");
                }
            }
            CurveSpec::Graph { x0, x1, .. } => {
                if x0 == x1 || !x0.is_finite() || !x1.is_finite() {
                    return degenerate("graph segment has empty x-range");
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub id: usize,
    pub vertices: [usize; 2],
    pub curve: CurveSpec,
    /// Arc length `h_e`.
    pub length: f64,
    pub boundary: bool,
}

impl Edge {
    pub fn point_at(&self, t: f64) -> Result<Point2> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::ParameterOutOfRange(t));
        }
        Ok(self.curve.eval(t))
    }

    pub fn is_straight(&self) -> bool {
        self.curve.is_straight()
    }

    /// `|F'(t)|`, the arc-length density of the edge parameter.
    pub fn jacobian(&self, t: f64) -> f64 {
        self.curve.derivative(t).norm()
    }
}

/// Edge reference inside an element loop; `forward` means the loop traverses
/// the edge from `vertices[0]` to `vertices[1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SignedEdge {
    pub edge: usize,
    pub forward: bool,
}

impl SignedEdge {
    pub fn new(edge: usize, forward: bool) -> Self {
        Self { edge, forward }
    }

    pub fn sign(self) -> f64 {
        if self.forward {
            1.0
        } else {
            -1.0
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Element {
    pub id: usize,
    pub edges: Vec<SignedEdge>,
    /// Moment centroid `x_T`.
    pub centroid: Point2,
    /// Diameter `h_T`.
    pub diameter: f64,
    /// Signed area; positive for counterclockwise loops.
    pub area: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<Point2>,
    pub edges: Vec<Edge>,
    pub elements: Vec<Element>,
    /// Max element diameter.
    pub h: f64,
}

/// Edge geometry before the mesh computes lengths and boundary flags.
#[derive(Clone, Debug, PartialEq)]
pub enum EdgeShape {
    Line,
    Arc {
        center: Point2,
        radius: f64,
        theta0: f64,
        theta1: f64,
    },
    Graph {
        curve: &'static AnalyticCurve,
        x0: f64,
        x1: f64,
    },
}

impl Mesh {
    /// Builds a mesh from raw vertices, edges `(v0, v1, shape)` and element
    /// loops. Computes edge lengths, boundary flags and element geometry.
    /// Referential integrity and edge geometry are checked here; loop
    /// closure, orientation and edge sharing are left to [`validate`].
    pub fn new(
        vertices: Vec<Point2>,
        edges: Vec<(usize, usize, EdgeShape)>,
        loops: Vec<Vec<SignedEdge>>,
    ) -> Result<Mesh> {
        for (i, v) in vertices.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!("vertex {i} is not finite")));
            }
        }
        let nv = vertices.len();
        let mut built = Vec::with_capacity(edges.len());
        for (id, (v0, v1, shape)) in edges.into_iter().enumerate() {
            for v in [v0, v1] {
                if v >= nv {
                    return Err(Error::DanglingReference(format!(
                        "edge {id} references vertex {v} of {nv}"
                    )));
                }
            }
            let curve = match shape {
                EdgeShape::Line => CurveSpec::Line {
                    p0: vertices[v0],
                    p1: vertices[v1],
                },
                EdgeShape::Arc {
                    center,
                    radius,
                    theta0,
                    theta1,
                } => CurveSpec::Arc {
                    center,
                    radius,
                    theta0,
                    theta1,
                },
                EdgeShape::Graph { curve, x0, x1 } => CurveSpec::Graph { curve, x0, x1 },
            };
            curve.check(id)?;
            let length = quadrature::arc_length(&curve);
            for (t, v) in [(0.0, v0), (1.0, v1)] {
                let gap = curve.eval(t).dist(vertices[v]);
                if gap > 1e-12 * length.max(f64::MIN_POSITIVE) {
                    return Err(Error::DegenerateCurve {
                        edge: id,
                        reason: format!("F({t}) misses vertex {v} by {gap:e}"),
                    });
                }
            }
            built.push(Edge {
                id,
                vertices: [v0, v1],
                curve,
                length,
                boundary: false,
            });
        }

        let mut uses = vec![0usize; built.len()];
        for (eid, lp) in loops.iter().enumerate() {
            if lp.is_empty() {
                return Err(Error::InvalidArgument(format!("element {eid} has no edges")));
            }
            for se in lp {
                if se.edge >= built.len() {
                    return Err(Error::DanglingReference(format!(
                        "element {eid} references edge {} of {}",
                        se.edge,
                        built.len()
                    )));
                }
                uses[se.edge] += 1;
            }
        }
        for (edge, n) in built.iter_mut().zip(&uses) {
            edge.boundary = *n == 1;
        }

        let elements: Vec<Element> = loops
            .into_iter()
            .enumerate()
            .map(|(id, lp)| element_geometry(id, lp, &vertices, &built))
            .collect();
        let h = elements.iter().map(|e| e.diameter).fold(0.0, f64::max);
        Ok(Mesh {
            vertices,
            edges: built,
            elements,
            h,
        })
    }

    /// Raw construction data, in the same shape [`Mesh::new`] accepts.
    pub fn parts(&self) -> (Vec<Point2>, Vec<(usize, usize, EdgeShape)>, Vec<Vec<SignedEdge>>) {
        let edges = self
            .edges
            .iter()
            .map(|e| {
                let shape = match e.curve {
                    CurveSpec::Line { .. } => EdgeShape::Line,
                    CurveSpec::Arc {
                        center,
                        radius,
                        theta0,
                        theta1,
                    } => EdgeShape::Arc {
                        center,
                        radius,
                        theta0,
                        theta1,
                    },
                    CurveSpec::Graph { curve, x0, x1 } => EdgeShape::Graph { curve, x0, x1 },
                };
                (e.vertices[0], e.vertices[1], shape)
            })
            .collect();
        let loops = self.elements.iter().map(|e| e.edges.clone()).collect();
        (self.vertices.clone(), edges, loops)
    }

    pub fn edge(&self, se: SignedEdge) -> &Edge {
        &self.edges[se.edge]
    }

    pub fn total_area(&self) -> f64 {
        self.elements.iter().map(|e| e.area).sum()
    }

    pub fn boundary_edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(|e| e.boundary)
    }

    /// Start vertex of a signed edge in traversal order.
    pub fn start_vertex(&self, se: SignedEdge) -> usize {
        let e = &self.edges[se.edge];
        if se.forward {
            e.vertices[0]
        } else {
            e.vertices[1]
        }
    }

    pub fn end_vertex(&self, se: SignedEdge) -> usize {
        let e = &self.edges[se.edge];
        if se.forward {
            e.vertices[1]
        } else {
            e.vertices[0]
        }
    }
}

fn element_geometry(id: usize, edges: Vec<SignedEdge>, vertices: &[Point2], all: &[Edge]) -> Element {
    let anchor = {
        let e = &all[edges[0].edge];
        vertices[e.vertices[0]]
    };
    let m = quadrature::loop_moments(all, &edges, anchor, 1.0, 1);
    let area = m[0];
    let centroid = if area != 0.0 {
        anchor + Point2::new(m[1], m[2]) * (1.0 / area)
    } else {
        anchor
    };

    let mut pts = Vec::new();
    for se in &edges {
        let e = &all[se.edge];
        pts.push(vertices[e.vertices[0]]);
        pts.push(vertices[e.vertices[1]]);
        if !e.is_straight() {
            pts.extend((1..=9).map(|i| e.curve.eval(i as f64 / 10.0)));
        }
    }
    let mut diameter: f64 = 0.0;
    for (i, p) in pts.iter().enumerate() {
        for q in &pts[i + 1..] {
            diameter = diameter.max(p.dist(*q));
        }
    }
    Element {
        id,
        edges,
        centroid,
        diameter,
        area,
    }
}

/// Unit outward normal at `F_e(t)` as seen from `element`: the rotated tangent
/// `(psi', -phi')`, flipped when it points toward the element centroid.
pub fn outward_normal(mesh: &Mesh, edge: usize, t: f64, element: usize) -> Result<Point2> {
    let el = &mesh.elements[element];
    if !el.edges.iter().any(|se| se.edge == edge) {
        return Err(Error::EdgeNotInElement { edge, element });
    }
    let e = &mesh.edges[edge];
    let p = e.point_at(t)?;
    let d = e.curve.derivative(t);
    let len = d.norm();
    if len == 0.0 {
        return Err(Error::DegenerateCurve {
            edge,
            reason: format!("zero tangent at t = {t}"),
        });
    }
    let n = Point2::new(d.y, -d.x) * (1.0 / len);
    let beta = el.centroid - p;
    Ok(if n.dot(beta) < 0.0 { n } else { -n })
}

pub fn arc_length(edge: &Edge) -> f64 {
    quadrature::arc_length(&edge.curve)
}
