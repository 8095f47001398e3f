//! Shared fixtures for the integration tests: the four curved element
//! archetypes and an adaptive subdivision integrator that only touches
//! the edge curves, never the moment code.

#![allow(dead_code)]

use std::f64::consts::FRAC_PI_2;

use wg_core::geometry::{EdgeShape, Element, Mesh, Point2, SignedEdge};
use wg_core::testcases::{self, Variant};

/// A mesh with the element of interest.
pub struct Archetype {
    pub name: &'static str,
    pub mesh: Mesh,
    pub element: usize,
}

impl Archetype {
    pub fn element(&self) -> &Element {
        &self.mesh.elements[self.element]
    }
}

pub fn quarter_disk() -> Mesh {
    let v = vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)];
    let e = vec![
        (0, 1, EdgeShape::Line),
        (
            1,
            2,
            EdgeShape::Arc {
                center: Point2::default(),
                radius: 1.0,
                theta0: 0.0,
                theta1: FRAC_PI_2,
            },
        ),
        (2, 0, EdgeShape::Line),
    ];
    let l = vec![vec![SignedEdge::new(0, true), SignedEdge::new(1, true), SignedEdge::new(2, true)]];
    Mesh::new(v, e, l).unwrap()
}

fn first_with(mesh: &Mesh, min_curved: usize) -> usize {
    mesh.elements
        .iter()
        .position(|el| el.edges.iter().filter(|se| !mesh.edge(**se).is_straight()).count() >= min_curved)
        .expect("generated mesh has curved elements")
}

/// Unit square, a cell of the mapped case-1 mesh touching a graph boundary,
/// the quarter disk, and an annular cell bounded by two arcs.
pub fn archetypes() -> Vec<Archetype> {
    let mapped = testcases::case1_mesh(4, Variant::Curved).unwrap();
    let mapped_el = first_with(&mapped, 1);
    let annulus = testcases::annulus_mesh(1, Variant::Curved);
    let annular_el = first_with(&annulus, 2);
    vec![
        Archetype {
            name: "unit square",
            mesh: testcases::square_mesh(1),
            element: 0,
        },
        Archetype {
            name: "mapped quad",
            mesh: mapped,
            element: mapped_el,
        },
        Archetype {
            name: "circular sector",
            mesh: quarter_disk(),
            element: 0,
        },
        Archetype {
            name: "annular cell",
            mesh: annulus,
            element: annular_el,
        },
    ]
}

/// Straight-edged elements: the unit square, every cell of a straight
/// case-1 mesh, and a skew triangle.
pub fn straight_elements() -> Vec<(Mesh, usize)> {
    let mut out = vec![(testcases::square_mesh(1), 0)];
    let m = testcases::case1_mesh(4, Variant::Straight).unwrap();
    for i in 0..m.elements.len() {
        out.push((m.clone(), i));
    }
    let v = vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.2), Point2::new(0.3, 0.9)];
    let e = (0..3).map(|i| (i, (i + 1) % 3, EdgeShape::Line)).collect();
    let l = vec![(0..3).map(|i| SignedEdge::new(i, true)).collect()];
    out.push((Mesh::new(v, e, l).unwrap(), 0));
    out
}

const GL5: [(f64, f64); 5] = [
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.0, 0.568_888_888_888_888_9),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

fn gauss_square(f: &impl Fn(f64, f64) -> f64, t0: f64, t1: f64, l0: f64, l1: f64) -> f64 {
    let (ct, ht) = (0.5 * (t0 + t1), 0.5 * (t1 - t0));
    let (cl, hl) = (0.5 * (l0 + l1), 0.5 * (l1 - l0));
    let mut s = 0.0;
    for (xi, wi) in GL5 {
        for (xj, wj) in GL5 {
            s += wi * wj * f(ct + ht * xi, cl + hl * xj);
        }
    }
    s * ht * hl
}

fn adaptive(f: &impl Fn(f64, f64) -> f64, t0: f64, t1: f64, l0: f64, l1: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let (tm, lm) = (0.5 * (t0 + t1), 0.5 * (l0 + l1));
    let parts = [
        gauss_square(f, t0, tm, l0, lm),
        gauss_square(f, tm, t1, l0, lm),
        gauss_square(f, t0, tm, lm, l1),
        gauss_square(f, tm, t1, lm, l1),
    ];
    let refined: f64 = parts.iter().sum();
    if depth == 0 || (refined - whole).abs() <= tol {
        return refined;
    }
    let t = 0.25 * tol;
    adaptive(f, t0, tm, l0, lm, parts[0], t, depth - 1)
        + adaptive(f, tm, t1, l0, lm, parts[1], t, depth - 1)
        + adaptive(f, t0, tm, lm, l1, parts[2], t, depth - 1)
        + adaptive(f, tm, t1, lm, l1, parts[3], t, depth - 1)
}

/// `int_T f` by adaptive tensor Gauss over the sectors joining each edge to
/// the vertex average, which every archetype is star-shaped about.
pub fn oracle_integral(mesh: &Mesh, element: &Element, f: impl Fn(Point2) -> f64) -> f64 {
    let n = element.edges.len() as f64;
    let c = element.edges.iter().fold(Point2::default(), |acc, se| acc + mesh.vertices[mesh.start_vertex(*se)] * (1.0 / n));
    let mut total = 0.0;
    for se in &element.edges {
        let curve = &mesh.edge(*se).curve;
        let forward = se.forward;
        let g = |t: f64, lam: f64| {
            let s = if forward { t } else { 1.0 - t };
            let p = curve.eval(s);
            let dp = curve.derivative(s);
            let r = p - c;
            let x = c + r * lam;
            f(x) * lam * r.cross(dp).abs()
        };
        let whole = gauss_square(&g, 0.0, 1.0, 0.0, 1.0);
        total += adaptive(&g, 0.0, 1.0, 0.0, 1.0, whole, 1e-15, 10);
    }
    total
}

/// Error relative to the larger of `|reference|` and `floor`.
pub fn rel(value: f64, reference: f64, floor: f64) -> f64 {
    (value - reference).abs() / reference.abs().max(floor)
}

/// One criterion line: `criterion N [PASS|FAIL] name: detail (runtime)`.
pub fn report(id: usize, name: &str, ok: bool, detail: &str, secs: f64) {
    println!("criterion {id} [{}] {name}: {detail} ({secs:.2} s)", if ok { "PASS" } else { "FAIL" });
}
