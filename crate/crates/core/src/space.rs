//! Local weak Galerkin spaces `W(k, T)` and their operators.
//!
//! Interior functions live in `P_k(T)` spanned by scaled monomials
//! `xi^a eta^b`, `xi = (x - x_T) / h_T`, `eta = (y - y_T) / h_T`, ordered by
//! total degree and then by the power of `eta`. Edge functions are
//! polynomials of degree `k - 1` in the edge parameter `t`, measured along the
//! stored edge direction, so both neighbours of an interior edge share one
//! set of trace coefficients. On curved edges these are the pullback spaces
//! `V_b(e, k - 1)`.
//!
//! The discrete weak gradient lives in `[P_{k-1}(T)]^2` with basis
//! `(phi_r, 0)` followed by `(0, phi_r)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::{Edge, Element, Mesh, Point2};
use crate::quadrature::{edge_rule_size, element_moments, fan_points, gauss_rule, MomentTable};

/// Polynomial order `k >= 1` of the interior space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SpaceOrder(usize);

impl SpaceOrder {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("element order must be at least 1".into()));
        }
        Ok(Self(k))
    }

    pub fn k(self) -> usize {
        self.0
    }

    pub fn interior_dim(self) -> usize {
        poly_dim(self.0)
    }

    pub fn edge_dim(self) -> usize {
        self.0
    }

    pub fn gradient_dim(self) -> usize {
        2 * poly_dim(self.0 - 1)
    }
}

pub fn poly_dim(deg: usize) -> usize {
    (deg + 1) * (deg + 2) / 2
}

/// Exponents `(a, b)` of the scaled monomial basis of `P_deg`.
pub fn exponents(deg: usize) -> Vec<(usize, usize)> {
    (0..=deg).flat_map(|d| (0..=d).map(move |b| (d - b, b))).collect()
}

/// Scaled monomials of an element, evaluated at physical points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledMonomials {
    pub center: Point2,
    pub scale: f64,
}

impl ScaledMonomials {
    pub fn of(element: &Element) -> Self {
        Self {
            center: element.centroid,
            scale: element.diameter,
        }
    }

    pub fn eval(&self, deg: usize, p: Point2) -> Vec<f64> {
        let xi = (p.x - self.center.x) / self.scale;
        let eta = (p.y - self.center.y) / self.scale;
        let mut out = Vec::with_capacity(poly_dim(deg));
        for d in 0..=deg {
            for b in 0..=d {
                out.push(xi.powi((d - b) as i32) * eta.powi(b as i32));
            }
        }
        out
    }

    /// Value of the polynomial with coefficients `c` at `p`.
    pub fn value(&self, deg: usize, c: &[f64], p: Point2) -> f64 {
        self.eval(deg, p).iter().zip(c).map(|(a, b)| a * b).sum()
    }
}

/// Gram matrix of the scaled monomials of `P_deg` from a moment table.
pub fn mass_from_moments(m: &MomentTable, deg: usize) -> DMatrix<f64> {
    let ex = exponents(deg);
    let n = ex.len();
    DMatrix::from_fn(n, n, |i, j| m.get(ex[i].0 + ex[j].0, ex[i].1 + ex[j].1))
}

/// Matrix of `d/dx` (first) and `d/dy` (second) from `P_deg` coefficients to
/// `P_{deg-1}` coefficients, stacked into `2 dim(P_{deg-1}) x dim(P_deg)`.
pub fn gradient_operator(deg: usize, scale: f64) -> DMatrix<f64> {
    let src = exponents(deg);
    let dst_dim = if deg == 0 { 0 } else { poly_dim(deg - 1) };
    let index = |a: usize, b: usize| {
        let d = a + b;
        d * (d + 1) / 2 + b
    };
    let mut g = DMatrix::zeros(2 * dst_dim, src.len());
    for (j, &(a, b)) in src.iter().enumerate() {
        if a > 0 {
            g[(index(a - 1, b), j)] = a as f64 / scale;
        }
        if b > 0 {
            g[(dst_dim + index(a, b - 1), j)] = b as f64 / scale;
        }
    }
    g
}

fn condition_estimate(m: &DMatrix<f64>) -> f64 {
    let ev = m.clone().symmetric_eigen().eigenvalues;
    let max = ev.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let min = ev.iter().fold(f64::INFINITY, |a, &v| a.min(v));
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Solves `m x = rhs` for a local SPD matrix: Cholesky, falling back to
/// column-pivoted QR.
pub fn spd_solve(m: &DMatrix<f64>, rhs: &DMatrix<f64>, element: usize) -> Result<DMatrix<f64>> {
    if let Some(ch) = m.clone().cholesky() {
        return Ok(ch.solve(rhs));
    }
    let cond = condition_estimate(m);
    if cond.is_finite() && cond < 1e15 {
        if let Some(x) = m.clone().col_piv_qr().solve(rhs) {
            return Ok(x);
        }
    }
    Err(Error::Conditioning { element, condition: cond })
}

fn check_spd(m: &DMatrix<f64>, element: usize) -> Result<()> {
    if m.clone().cholesky().is_none() {
        return Err(Error::Conditioning {
            element,
            condition: condition_estimate(m),
        });
    }
    Ok(())
}

/// `M_ij = (phi_i, phi_j)_T` over the scaled monomials of `P_k(T)`.
pub fn interior_mass(element: &Element, mesh: &Mesh, k: usize) -> Result<DMatrix<f64>> {
    let m = mass_from_moments(&element_moments(element, mesh, 2 * k), k);
    check_spd(&m, element.id)?;
    Ok(m)
}

/// `W_ij = int_0^1 t^(i+j) |F'(t)| dt`, `0 <= i, j <= degree`.
pub fn edge_weighted_mass(edge: &Edge, degree: usize) -> DMatrix<f64> {
    let g = gauss_rule(edge_rule_size(&edge.curve, 2 * degree)).expect("edge rule size");
    let n = degree + 1;
    let mut w = DMatrix::zeros(n, n);
    for (t, wt) in g.points() {
        let jac = wt * edge.jacobian(t);
        let tp: Vec<f64> = (0..2 * n - 1).map(|p| t.powi(p as i32)).collect();
        for i in 0..n {
            for j in 0..n {
                w[(i, j)] += jac * tp[i + j];
            }
        }
    }
    w
}

/// Rule size used by fan quadrature for non-polynomial interior integrands.
pub fn fan_rule_size(k: usize) -> usize {
    (k + 5).max(8)
}

/// Rule size for non-polynomial data on edges.
pub const EDGE_DATA_RULE: usize = 16;

/// `Q_0 f`: coefficients of the `L^2(T)` projection onto `P_k(T)`.
pub fn project_q0(f: impl Fn(Point2) -> f64, element: &Element, mesh: &Mesh, k: usize) -> Result<DVector<f64>> {
    let basis = ScaledMonomials::of(element);
    let mut rhs = DVector::zeros(poly_dim(k));
    for (p, w) in fan_points(element, mesh, fan_rule_size(k))? {
        let fv = w * f(p);
        for (r, phi) in rhs.iter_mut().zip(basis.eval(k, p)) {
            *r += fv * phi;
        }
    }
    let m = interior_mass(element, mesh, k)?;
    let x = spd_solve(&m, &DMatrix::from_column_slice(rhs.len(), 1, rhs.as_slice()), element.id)?;
    Ok(x.column(0).into_owned())
}

/// `Q_b g` on one edge: the `|F'|`-weighted projection of `g o F_e` onto
/// polynomials of degree `k - 1` in `t`.
pub fn project_qb(g: impl Fn(Point2) -> f64, edge: &Edge, k: usize) -> Result<DVector<f64>> {
    let rule = gauss_rule(EDGE_DATA_RULE.max(edge_rule_size(&edge.curve, 2 * k)))?;
    let mut rhs = DMatrix::zeros(k, 1);
    for (t, w) in rule.points() {
        let v = w * g(edge.curve.eval(t)) * edge.jacobian(t);
        for j in 0..k {
            rhs[(j, 0)] += v * t.powi(j as i32);
        }
    }
    let x = spd_solve(&edge_weighted_mass(edge, k - 1), &rhs, edge.id)?;
    Ok(x.column(0).into_owned())
}

/// `𝕈_h w`: componentwise projection onto `[P_{k-1}(T)]^2`, x-block first.
pub fn project_gradient(w: impl Fn(Point2) -> Point2, element: &Element, mesh: &Mesh, k: usize) -> Result<DVector<f64>> {
    let wx = project_q0(|p| w(p).x, element, mesh, k - 1)?;
    let wy = project_q0(|p| w(p).y, element, mesh, k - 1)?;
    Ok(DVector::from_iterator(wx.len() + wy.len(), wx.iter().chain(wy.iter()).copied()))
}

/// Local ordering of the WG unknowns of one element: interior coefficients,
/// then `k` trace coefficients per loop edge in loop order.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalDofLayout {
    pub element: usize,
    pub interior: usize,
    pub edge_dim: usize,
    pub edges: Vec<usize>,
}

impl LocalDofLayout {
    pub fn new(element: &Element, k: usize) -> Self {
        Self {
            element: element.id,
            interior: poly_dim(k),
            edge_dim: k,
            edges: element.edges.iter().map(|se| se.edge).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.interior + self.edge_dim * self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// First local slot of the `i`-th loop edge.
    pub fn edge_offset(&self, i: usize) -> usize {
        self.interior + i * self.edge_dim
    }
}

/// Per-edge operators of one element, for the `i`-th loop edge.
#[derive(Clone, Debug)]
pub struct EdgeOperators {
    pub edge: usize,
    pub sign: f64,
    /// Weighted edge mass `W_e`, `k x k`.
    pub mass: DMatrix<f64>,
    /// `R_e`: interior coefficients to the coefficients of `Q_b` of their trace.
    pub trace: DMatrix<f64>,
}

/// `G` maps local WG coefficients to the coefficients of `∇_w v` in
/// `[P_{k-1}(T)]^2`.
#[derive(Clone, Debug)]
pub struct WeakGradientMatrix {
    pub element: usize,
    pub matrix: DMatrix<f64>,
}

/// Everything the assembly needs from one element.
#[derive(Clone, Debug)]
pub struct ElementOperators {
    pub element: usize,
    pub order: usize,
    pub layout: LocalDofLayout,
    pub basis: ScaledMonomials,
    pub moments: MomentTable,
    /// Gram matrix of `P_k(T)`.
    pub interior_mass: DMatrix<f64>,
    /// Gram matrix of `P_{k-1}(T)`; the vector mass is two diagonal copies.
    pub gradient_mass: DMatrix<f64>,
    pub edges: Vec<EdgeOperators>,
    pub weak_gradient: WeakGradientMatrix,
}

/// Which right-hand side defines the weak gradient.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GradientForm {
    /// `-(v_0, div q)_T + <v_b, q.n>_{∂T}`.
    Duality,
    /// `(∇v_0, q)_T + <v_b - v_0, q.n>_{∂T}`.
    IntegratedByParts,
}

impl ElementOperators {
    pub fn new(element: &Element, mesh: &Mesh, k: usize) -> Result<Self> {
        Self::with_form(element, mesh, k, GradientForm::Duality)
    }

    pub fn with_form(element: &Element, mesh: &Mesh, k: usize, form: GradientForm) -> Result<Self> {
        SpaceOrder::new(k)?;
        let basis = ScaledMonomials::of(element);
        let moments = element_moments(element, mesh, 2 * k);
        let interior_mass = mass_from_moments(&moments, k);
        check_spd(&interior_mass, element.id)?;
        let gradient_mass = mass_from_moments(&moments, k - 1);
        check_spd(&gradient_mass, element.id)?;
        let layout = LocalDofLayout::new(element, k);

        let n_int = poly_dim(k);
        let n_g = poly_dim(k - 1);
        let mut rhs = DMatrix::zeros(2 * n_g, layout.len());

        let ex_k = exponents(k);
        let ex_g = exponents(k - 1);
        let s = element.diameter;
        for (r, &(ar, br)) in ex_g.iter().enumerate() {
            for (i, &(ai, bi)) in ex_k.iter().enumerate() {
                match form {
                    GradientForm::Duality => {
                        // -(phi_i, d/dx phi_r), -(phi_i, d/dy phi_r)
                        if ar > 0 {
                            rhs[(r, i)] -= ar as f64 / s * moments.get(ai + ar - 1, bi + br);
                        }
                        if br > 0 {
                            rhs[(n_g + r, i)] -= br as f64 / s * moments.get(ai + ar, bi + br - 1);
                        }
                    }
                    GradientForm::IntegratedByParts => {
                        if ai > 0 {
                            rhs[(r, i)] += ai as f64 / s * moments.get(ai - 1 + ar, bi + br);
                        }
                        if bi > 0 {
                            rhs[(n_g + r, i)] += bi as f64 / s * moments.get(ai + ar, bi - 1 + br);
                        }
                    }
                }
            }
        }

        let mut edges = Vec::with_capacity(element.edges.len());
        for (pos, se) in element.edges.iter().enumerate() {
            let edge = &mesh.edges[se.edge];
            let sign = se.sign();
            let mass = edge_weighted_mass(edge, k - 1);
            let g = gauss_rule(edge_rule_size(&edge.curve, 2 * k))?;
            let mut trace_rhs = DMatrix::zeros(k, n_int);
            let off = layout.edge_offset(pos);
            for (t, w) in g.points() {
                let p = edge.curve.eval(t);
                let dp = edge.curve.derivative(t);
                let jac = dp.norm();
                let phi_k = basis.eval(k, p);
                let tp: Vec<f64> = (0..k).map(|j| t.powi(j as i32)).collect();
                for j in 0..k {
                    for i in 0..n_int {
                        trace_rhs[(j, i)] += w * jac * tp[j] * phi_k[i];
                    }
                }
                // n_x ds = sign y' dt, n_y ds = -sign x' dt
                let nx = w * sign * dp.y;
                let ny = -w * sign * dp.x;
                for r in 0..n_g {
                    for j in 0..k {
                        rhs[(r, off + j)] += nx * phi_k[r] * tp[j];
                        rhs[(n_g + r, off + j)] += ny * phi_k[r] * tp[j];
                    }
                    if form == GradientForm::IntegratedByParts {
                        for i in 0..n_int {
                            rhs[(r, i)] -= nx * phi_k[r] * phi_k[i];
                            rhs[(n_g + r, i)] -= ny * phi_k[r] * phi_k[i];
                        }
                    }
                }
            }
            let trace = spd_solve(&mass, &trace_rhs, element.id)?;
            edges.push(EdgeOperators {
                edge: se.edge,
                sign,
                mass,
                trace,
            });
        }

        let mut g = DMatrix::zeros(2 * n_g, layout.len());
        let top = spd_solve(&gradient_mass, &rhs.rows(0, n_g).into_owned(), element.id)?;
        let bottom = spd_solve(&gradient_mass, &rhs.rows(n_g, n_g).into_owned(), element.id)?;
        g.rows_mut(0, n_g).copy_from(&top);
        g.rows_mut(n_g, n_g).copy_from(&bottom);

        Ok(Self {
            element: element.id,
            order: k,
            layout,
            basis,
            moments,
            interior_mass,
            gradient_mass,
            edges,
            weak_gradient: WeakGradientMatrix {
                element: element.id,
                matrix: g,
            },
        })
    }

    /// Block-diagonal Gram matrix of `[P_{k-1}(T)]^2`.
    pub fn vector_mass(&self) -> DMatrix<f64> {
        let n = self.gradient_mass.nrows();
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(&self.gradient_mass);
        m.view_mut((n, n), (n, n)).copy_from(&self.gradient_mass);
        m
    }

    /// `Q_b v_0 - v_b` on the `i`-th loop edge as a `k x n_local` map.
    pub fn jump_operator(&self, i: usize) -> DMatrix<f64> {
        let k = self.order;
        let mut d = DMatrix::zeros(k, self.layout.len());
        d.view_mut((0, 0), (k, self.layout.interior)).copy_from(&self.edges[i].trace);
        let off = self.layout.edge_offset(i);
        for j in 0..k {
            d[(j, off + j)] = -1.0;
        }
        d
    }
}

pub fn weak_gradient_matrix(element: &Element, mesh: &Mesh, k: usize) -> Result<WeakGradientMatrix> {
    Ok(ElementOperators::new(element, mesh, k)?.weak_gradient)
}
