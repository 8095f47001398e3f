//! Gauss rules, edge line integrals and element integration.
//!
//! Polynomial integrals over curved elements are reduced to the boundary by
//! the divergence theorem: for the scaled monomial `xi^a eta^b` the flux
//! `(P, 0)` with `dP/dx = xi^a eta^b` turns the area integral into
//! `sum_e int_e P n_x ds`, and each edge integral is a Gauss sum over the
//! edge parameter. Non-polynomial integrands use a fan of curved triangles
//! with apex at the element centroid.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::geometry::{CurveSpec, Edge, Element, Mesh, Point2, SignedEdge};

pub const MAX_RULE: usize = 32;

/// Gauss-Legendre rule on `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&t, &w)| w * f(t)).sum()
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }
}

fn legendre_rule(n: usize) -> GaussRule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        if n == 1 {
            x = 0.0;
            dp = 1.0;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // x is the i-th largest root; map [-1, 1] to [0, 1].
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    GaussRule { nodes, weights }
}

static RULES: OnceLock<Vec<GaussRule>> = OnceLock::new();

/// The `n`-point Gauss-Legendre rule on `[0, 1]`, `1 <= n <= 32`.
pub fn gauss_rule(n: usize) -> Result<&'static GaussRule> {
    if !(1..=MAX_RULE).contains(&n) {
        return Err(Error::RuleSize(n));
    }
    let rules = RULES.get_or_init(|| (1..=MAX_RULE).map(legendre_rule).collect());
    Ok(&rules[n - 1])
}

fn rule(n: usize) -> &'static GaussRule {
    gauss_rule(n.clamp(1, MAX_RULE)).expect("clamped rule size")
}

/// Rule size for an edge integrand that is a polynomial of degree `degree`
/// in the edge parameter on straight edges. Curved pullbacks are analytic,
/// so they get a generous fixed over-integration.
pub fn edge_rule_size(curve: &CurveSpec, degree: usize) -> usize {
    if curve.is_straight() {
        degree / 2 + 1
    } else {
        (degree + 6).clamp(16, MAX_RULE)
    }
}

/// Rule size used for the moment fluxes of degree `d`.
pub fn moment_rule_size(curve: &CurveSpec, d: usize) -> usize {
    if curve.is_straight() {
        d + 1
    } else {
        (d + 6).clamp(12, MAX_RULE)
    }
}

/// `int_0^1 |F'(t)| dt`, composite 16-point Gauss with panel doubling until
/// two successive estimates agree to 1e-13 relative.
pub fn arc_length(curve: &CurveSpec) -> f64 {
    if let CurveSpec::Line { p0, p1 } = curve {
        return p0.dist(*p1);
    }
    let g = rule(16);
    let composite = |panels: usize| -> f64 {
        let w = 1.0 / panels as f64;
        (0..panels)
            .map(|p| {
                let a = p as f64 * w;
                g.integrate(|t| curve.derivative(a + w * t).norm()) * w
            })
            .sum()
    };
    let mut panels = 1;
    let mut prev = composite(panels);
    while panels < 1 << 12 {
        panels *= 2;
        let next = composite(panels);
        if (next - prev).abs() <= 1e-13 * next.abs() {
            return next;
        }
        prev = next;
    }
    prev
}

/// `int_e f ds = int_0^1 f(F(t)) |F'(t)| dt` with an `n`-point rule.
pub fn edge_integral(edge: &Edge, f: impl Fn(Point2) -> f64, n: usize) -> Result<f64> {
    let g = gauss_rule(n)?;
    Ok(g.integrate(|t| f(edge.curve.eval(t)) * edge.curve.derivative(t).norm()))
}

#[inline]
fn tri_index(a: usize, b: usize) -> usize {
    let d = a + b;
    d * (d + 1) / 2 + b
}

/// Which antiderivative direction the boundary flux uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flux {
    X,
    Y,
}

fn powers(v: f64, n: usize, out: &mut Vec<f64>) {
    out.clear();
    let mut p = 1.0;
    for _ in 0..=n {
        out.push(p);
        p *= v;
    }
}

/// Moments `int xi^a eta^b` over the region bounded by `lp`, with
/// `xi = (x - center.x) / scale` and `eta = (y - center.y) / scale`, for all
/// `a + b <= d`, laid out in [`MomentTable`] order.
pub fn loop_moments_with(edges: &[Edge], lp: &[SignedEdge], center: Point2, scale: f64, d: usize, flux: Flux) -> Vec<f64> {
    let mut out = vec![0.0; (d + 1) * (d + 2) / 2];
    let (mut px, mut py) = (Vec::new(), Vec::new());
    for se in lp {
        let curve = &edges[se.edge].curve;
        let g = rule(moment_rule_size(curve, d));
        let sign = se.sign();
        for (t, w) in g.points() {
            let p = curve.eval(t);
            let dp = curve.derivative(t);
            let xi = (p.x - center.x) / scale;
            let eta = (p.y - center.y) / scale;
            powers(xi, d + 1, &mut px);
            powers(eta, d + 1, &mut py);
            // n_x ds = sign * y'(t) dt, n_y ds = -sign * x'(t) dt
            match flux {
                Flux::X => {
                    let f = sign * w * dp.y * scale;
                    for deg in 0..=d {
                        for b in 0..=deg {
                            let a = deg - b;
                            out[tri_index(a, b)] += f * px[a + 1] * py[b] / (a + 1) as f64;
                        }
                    }
                }
                Flux::Y => {
                    let f = -sign * w * dp.x * scale;
                    for deg in 0..=d {
                        for b in 0..=deg {
                            let a = deg - b;
                            out[tri_index(a, b)] += f * px[a] * py[b + 1] / (b + 1) as f64;
                        }
                    }
                }
            }
        }
    }
    out
}

pub fn loop_moments(edges: &[Edge], lp: &[SignedEdge], center: Point2, scale: f64, d: usize) -> Vec<f64> {
    loop_moments_with(edges, lp, center, scale, d, Flux::X)
}

/// `m_ab = int_T xi^a eta^b dT` with `xi = (x - x_T) / h_T`,
/// `eta = (y - y_T) / h_T`. Values are in physical area units, so
/// `m_00 = |T|`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentTable {
    pub element: usize,
    pub degree: usize,
    pub center: Point2,
    pub scale: f64,
    values: Vec<f64>,
}

impl MomentTable {
    pub fn get(&self, a: usize, b: usize) -> f64 {
        assert!(a + b <= self.degree, "moment ({a}, {b}) beyond degree {}", self.degree);
        self.values[tri_index(a, b)]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `(a, b, m_ab)` in increasing total degree.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..=self.degree).flat_map(move |deg| (0..=deg).map(move |b| (deg - b, b, self.values[tri_index(deg - b, b)])))
    }
}

pub fn element_moments_with(element: &Element, mesh: &Mesh, d: usize, flux: Flux) -> MomentTable {
    let values = loop_moments_with(&mesh.edges, &element.edges, element.centroid, element.diameter, d, flux);
    MomentTable {
        element: element.id,
        degree: d,
        center: element.centroid,
        scale: element.diameter,
        values,
    }
}

pub fn element_moments(element: &Element, mesh: &Mesh, d: usize) -> MomentTable {
    element_moments_with(element, mesh, d, Flux::X)
}

/// Moments of an element about an arbitrary center and scale.
pub fn element_moments_about(element: &Element, mesh: &Mesh, d: usize, center: Point2, scale: f64) -> MomentTable {
    MomentTable {
        element: element.id,
        degree: d,
        center,
        scale,
        values: loop_moments(&mesh.edges, &element.edges, center, scale, d),
    }
}

/// Quadrature points and weights for `int_T f dT` on the fan of curved
/// triangles `(t, s) -> x_T + s (F_e(t) - x_T)`, one per loop edge, each with
/// an `n x n` tensor Gauss rule.
pub fn fan_points(element: &Element, mesh: &Mesh, n: usize) -> Result<Vec<(Point2, f64)>> {
    let g = gauss_rule(n)?;
    let c = element.centroid;
    let mut pts = Vec::with_capacity(element.edges.len() * n * n);
    for se in &element.edges {
        let curve = &mesh.edges[se.edge].curve;
        for (t, wt) in g.points() {
            let p = curve.eval(t) - c;
            let tangent = curve.derivative(t) * se.sign();
            let jac = p.cross(tangent);
            if !(jac > 0.0) {
                return Err(Error::NotStarShaped { element: element.id });
            }
            for (s, ws) in g.points() {
                pts.push((c + p * s, wt * ws * s * jac));
            }
        }
    }
    Ok(pts)
}

pub fn fan_quadrature(element: &Element, mesh: &Mesh, f: impl Fn(Point2) -> f64, n: usize) -> Result<f64> {
    Ok(fan_points(element, mesh, n)?.into_iter().map(|(p, w)| w * f(p)).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{EdgeShape, Mesh};
    use crate::testcases;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn quarter_disk() -> Mesh {
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

    #[test]
    fn one_point_rule() {
        let g = gauss_rule(1).unwrap();
        assert_eq!(g.nodes, vec![0.5]);
        assert_eq!(g.weights, vec![1.0]);
    }

    #[test]
    fn two_point_rule() {
        let g = gauss_rule(2).unwrap();
        let d = 1.0 / (2.0 * 3f64.sqrt());
        assert_relative_eq!(g.nodes[0], 0.5 - d, max_relative = 1e-15);
        assert_relative_eq!(g.nodes[1], 0.5 + d, max_relative = 1e-15);
        assert_relative_eq!(g.weights[0], 0.5, max_relative = 1e-15);
        assert_relative_eq!(g.integrate(|t| t.powi(3)), 0.25, max_relative = 1e-15);
    }

    #[test]
    fn rule_size_bounds() {
        assert!(matches!(gauss_rule(0), Err(Error::RuleSize(0))));
        assert!(gauss_rule(33).is_err());
    }

    #[test]
    fn every_rule_is_exact_to_its_degree() {
        for n in 1..=MAX_RULE {
            let g = gauss_rule(n).unwrap();
            assert!((g.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14, "n = {n}");
            assert!(g.nodes.iter().all(|&t| t > 0.0 && t < 1.0));
            assert!(g.weights.iter().all(|&w| w > 0.0));
            for p in 0..2 * n {
                // Shifted monomials stay well conditioned at high degree.
                let exact = (0.5f64.powi(p as i32 + 1) * (1.0 - (-1f64).powi(p as i32 + 1))) / (p + 1) as f64;
                let approx = g.integrate(|t| (t - 0.5).powi(p as i32));
                assert!((approx - exact).abs() < 1e-14, "n = {n}, p = {p}: {approx} vs {exact}");
            }
        }
    }

    #[test]
    fn edge_integrals() {
        let m = quarter_disk();
        let arc = &m.edges[1];
        assert_relative_eq!(edge_integral(arc, |_| 1.0, 16).unwrap(), arc.length, max_relative = 1e-14);
        assert_relative_eq!(edge_integral(arc, |p| p.x * p.x, 16).unwrap(), FRAC_PI_4, max_relative = 1e-14);
        let line = &m.edges[0];
        assert_relative_eq!(edge_integral(line, |p| p.x, 1).unwrap(), 0.5, max_relative = 1e-15);
    }

    #[test]
    fn square_moments() {
        let m = testcases::square_mesh(1);
        let t = element_moments(&m.elements[0], &m, 4);
        assert_relative_eq!(t.get(0, 0), 1.0, max_relative = 1e-14);
        assert!(t.get(1, 0).abs() < 1e-15);
        assert!(t.get(0, 1).abs() < 1e-15);
        // int (x - 1/2)^2 / 2 over the unit square
        assert_relative_eq!(t.get(2, 0), 1.0 / 24.0, max_relative = 1e-14);
    }

    #[test]
    fn quarter_disk_moments() {
        let m = quarter_disk();
        let el = &m.elements[0];
        let raw = loop_moments(&m.edges, &el.edges, Point2::default(), 1.0, 1);
        assert_relative_eq!(raw[0], FRAC_PI_4, max_relative = 1e-14);
        assert_relative_eq!(raw[1], 1.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(raw[2], 1.0 / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn fan_square() {
        let m = testcases::square_mesh(1);
        let el = &m.elements[0];
        assert_relative_eq!(fan_quadrature(el, &m, |_| 1.0, 4).unwrap(), 1.0, max_relative = 1e-13);
        let v = fan_quadrature(el, &m, |p| p.x * p.x * p.y * p.y, 6).unwrap();
        assert_relative_eq!(v, 1.0 / 9.0, max_relative = 1e-13);
    }

    #[test]
    fn fan_rejects_non_star_shaped() {
        // An L-shaped hexagon whose centroid sits outside the reflex corner's view.
        let v = vec![
            Point2::new(0.0, 0.0),
            Point2::new(4.0, 0.0),
            Point2::new(4.0, 0.2),
            Point2::new(0.2, 0.2),
            Point2::new(0.2, 4.0),
            Point2::new(0.0, 4.0),
        ];
        let e = (0..6).map(|i| (i, (i + 1) % 6, EdgeShape::Line)).collect();
        let l = vec![(0..6).map(|i| SignedEdge::new(i, true)).collect()];
        let m = Mesh::new(v, e, l).unwrap();
        assert!(matches!(
            fan_quadrature(&m.elements[0], &m, |_| 1.0, 4),
            Err(Error::NotStarShaped { element: 0 })
        ));
    }

    #[test]
    fn green_identity_closed_loops() {
        let mesh = testcases::case1_mesh(8, testcases::Variant::Curved).unwrap();
        for el in &mesh.elements {
            let mut acc = Point2::default();
            let mut perimeter = 0.0;
            for se in &el.edges {
                let e = &mesh.edges[se.edge];
                perimeter += e.length;
                let g = rule(edge_rule_size(&e.curve, 0));
                for (t, w) in g.points() {
                    let d = e.curve.derivative(t) * se.sign();
                    acc = acc + Point2::new(d.y, -d.x) * w;
                }
            }
            assert!(acc.norm() <= 1e-12 * perimeter, "element {}: {acc:?}", el.id);
        }
    }
}
