//! Global weak Galerkin system: local stiffness and stabilizer, load
//! vectors, DOF numbering and symmetric Dirichlet elimination.
//!
//! Global numbering puts all interior coefficients first, element by
//! element, followed by `k` trace coefficients per edge in edge order.

use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{Element, Mesh, Point2};
use crate::quadrature::fan_points;
use crate::space::{fan_rule_size, poly_dim, project_qb, ElementOperators, SpaceOrder};
use crate::sparse::{CsrMatrix, Triplets};

/// Global numbering of the WG unknowns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DofMap {
    pub order: usize,
    pub elements: usize,
    pub edges: usize,
    pub interior_dim: usize,
    /// `true` on trace slots of boundary edges.
    pub dirichlet: Vec<bool>,
    /// Position in the reduced system, `None` for Dirichlet slots.
    pub free_index: Vec<Option<usize>>,
    pub free: usize,
}

impl DofMap {
    pub fn new(mesh: &Mesh, k: usize) -> Result<Self> {
        SpaceOrder::new(k)?;
        let interior_dim = poly_dim(k);
        let n = mesh.elements.len() * interior_dim + mesh.edges.len() * k;
        let mut dirichlet = vec![false; n];
        let base = mesh.elements.len() * interior_dim;
        for e in mesh.boundary_edges() {
            for j in 0..k {
                dirichlet[base + e.id * k + j] = true;
            }
        }
        let mut free = 0;
        let free_index = dirichlet
            .iter()
            .map(|&d| {
                if d {
                    None
                } else {
                    free += 1;
                    Some(free - 1)
                }
            })
            .collect();
        Ok(Self {
            order: k,
            elements: mesh.elements.len(),
            edges: mesh.edges.len(),
            interior_dim,
            dirichlet,
            free_index,
            free,
        })
    }

    pub fn len(&self) -> usize {
        self.dirichlet.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirichlet.is_empty()
    }

    pub fn interior(&self, element: usize, i: usize) -> usize {
        element * self.interior_dim + i
    }

    pub fn trace(&self, edge: usize, j: usize) -> usize {
        self.elements * self.interior_dim + edge * self.order + j
    }

    /// Free-slot index groups: the interior of each element, then the free
    /// traces of each edge.
    pub fn free_blocks(&self) -> Vec<Vec<usize>> {
        let interior = (0..self.elements).map(|t| (0..self.interior_dim).filter_map(|i| self.free_index[self.interior(t, i)]).collect());
        let traces = (0..self.edges).map(|e| (0..self.order).filter_map(|j| self.free_index[self.trace(e, j)]).collect());
        interior.chain(traces).filter(|b: &Vec<usize>| !b.is_empty()).collect()
    }

    /// Global indices of the local slots of an element, in local order.
    pub fn local_to_global(&self, element: &Element) -> Vec<usize> {
        let mut out: Vec<usize> = (0..self.interior_dim).map(|i| self.interior(element.id, i)).collect();
        for se in &element.edges {
            out.extend((0..self.order).map(|j| self.trace(se.edge, j)));
        }
        out
    }
}

/// Global coefficient vector of a weak function.
#[derive(Clone, Debug, PartialEq)]
pub struct WeakFunction {
    pub coeffs: Vec<f64>,
}

impl WeakFunction {
    pub fn zeros(dofs: &DofMap) -> Self {
        Self {
            coeffs: vec![0.0; dofs.len()],
        }
    }

    /// Constant `c` in both components. Relies on the constant scaled
    /// monomial and the constant edge polynomial coming first.
    pub fn constant(dofs: &DofMap, c: f64) -> Self {
        let mut w = Self::zeros(dofs);
        for t in 0..dofs.elements {
            w.coeffs[dofs.interior(t, 0)] = c;
        }
        for e in 0..dofs.edges {
            w.coeffs[dofs.trace(e, 0)] = c;
        }
        w
    }

    pub fn check(&self, dofs: &DofMap) -> Result<()> {
        if self.coeffs.len() != dofs.len() {
            return Err(Error::LayoutMismatch(format!(
                "weak function has {} coefficients, layout has {}",
                self.coeffs.len(),
                dofs.len()
            )));
        }
        Ok(())
    }

    pub fn local(&self, dofs: &DofMap, element: &Element) -> DVector<f64> {
        DVector::from_iterator(
            dofs.interior_dim + dofs.order * element.edges.len(),
            dofs.local_to_global(element).into_iter().map(|g| self.coeffs[g]),
        )
    }

    /// Value of the interior component at `p`, a point of `element`.
    pub fn interior_value(&self, dofs: &DofMap, element: &Element, ops: &ElementOperators, p: Point2) -> f64 {
        let start = dofs.interior(element.id, 0);
        ops.basis.value(dofs.order, &self.coeffs[start..start + dofs.interior_dim], p)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Local operators and the two element matrices.
#[derive(Clone, Debug)]
pub struct LocalMatrices {
    pub ops: ElementOperators,
    /// `G^T M G`, the weak-gradient form.
    pub stiffness: DMatrix<f64>,
    /// `rho h_T^-1 sum_e D_e^T W_e D_e`.
    pub stabilizer: DMatrix<f64>,
}

impl LocalMatrices {
    pub fn combined(&self) -> DMatrix<f64> {
        &self.stiffness + &self.stabilizer
    }
}

pub fn local_matrices(element: &Element, mesh: &Mesh, k: usize, rho: f64) -> Result<LocalMatrices> {
    let ops = ElementOperators::new(element, mesh, k)?;
    let g = &ops.weak_gradient.matrix;
    let stiffness = g.transpose() * ops.vector_mass() * g;
    let n = ops.layout.len();
    let mut stabilizer = DMatrix::zeros(n, n);
    for (i, e) in ops.edges.iter().enumerate() {
        let d = ops.jump_operator(i);
        stabilizer += d.transpose() * &e.mass * d;
    }
    stabilizer *= rho / element.diameter;
    Ok(LocalMatrices {
        stiffness: symmetrize(stiffness),
        stabilizer: symmetrize(stabilizer),
        ops,
    })
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

/// `(f, phi_i)_T` in the interior slots, zero in the trace slots.
pub fn local_load(element: &Element, mesh: &Mesh, f: impl Fn(Point2) -> f64, k: usize, ops: &ElementOperators) -> Result<DVector<f64>> {
    let mut b = DVector::zeros(ops.layout.len());
    for (p, w) in fan_points(element, mesh, fan_rule_size(k))? {
        let fv = w * f(p);
        for (i, phi) in ops.basis.eval(k, p).into_iter().enumerate() {
            b[i] += fv * phi;
        }
    }
    Ok(b)
}

/// Worker count from `WG_THREADS`; `0` or unset means sequential.
pub fn thread_count() -> usize {
    std::env::var("WG_THREADS")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(0)
}

/// Local matrices for every element, in element order.
pub fn all_local_matrices(mesh: &Mesh, k: usize, rho: f64) -> Result<Vec<LocalMatrices>> {
    let threads = thread_count();
    if threads == 0 {
        return mesh.elements.iter().map(|t| local_matrices(t, mesh, k, rho)).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("WG_THREADS: {e}")))?;
    pool.install(|| mesh.elements.par_iter().map(|t| local_matrices(t, mesh, k, rho)).collect())
}

/// A discretized problem before boundary conditions.
#[derive(Clone, Debug)]
pub struct Discretization {
    pub order: usize,
    pub rho: f64,
    pub dofs: DofMap,
    pub locals: Vec<LocalMatrices>,
}

impl Discretization {
    pub fn new(mesh: &Mesh, k: usize, rho: f64) -> Result<Self> {
        if !(rho > 0.0) {
            return Err(Error::InvalidArgument(format!("stabilizer coefficient {rho} must be positive")));
        }
        let dofs = DofMap::new(mesh, k)?;
        let locals = all_local_matrices(mesh, k, rho)?;
        Ok(Self {
            order: k,
            rho,
            dofs,
            locals,
        })
    }

    /// The assembled matrix over all slots, without boundary conditions.
    pub fn full_matrix(&self, mesh: &Mesh) -> CsrMatrix {
        let mut t = Triplets::new(self.dofs.len());
        for (el, loc) in mesh.elements.iter().zip(&self.locals) {
            let map = self.dofs.local_to_global(el);
            let a = loc.combined();
            for (i, &gi) in map.iter().enumerate() {
                for (j, &gj) in map.iter().enumerate() {
                    if a[(i, j)] != 0.0 {
                        t.push(gi, gj, a[(i, j)]);
                    }
                }
            }
        }
        t.into_csr()
    }

    /// `sum_T v_T^T (A_T + S_T) v_T` evaluated element by element.
    pub fn energy_squared(&self, mesh: &Mesh, v: &WeakFunction) -> Result<f64> {
        v.check(&self.dofs)?;
        Ok(mesh
            .elements
            .iter()
            .zip(&self.locals)
            .map(|(el, loc)| {
                let x = v.local(&self.dofs, el);
                (x.transpose() * loc.combined() * &x)[(0, 0)]
            })
            .sum())
    }
}

/// Reduced SPD system on the free slots.
#[derive(Clone, Debug)]
pub struct SparseSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// Full-length vector carrying `Q_b g` on Dirichlet slots, zero elsewhere.
    pub dirichlet_values: Vec<f64>,
}

impl SparseSystem {
    pub fn free(&self) -> usize {
        self.rhs.len()
    }

    /// `i j value` triplets of the matrix, a blank line, then `b`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# n = {} nnz = {}\n", self.matrix.n, self.matrix.nnz()));
        self.matrix.write_triplets(&mut out);
        out.push('\n');
        for v in &self.rhs {
            out.push_str(&format!("{v:.16e}\n"));
        }
        out
    }

    pub fn dump_to(&self, path: &Path) -> Result<()> {
        fs::write(path, self.dump())?;
        Ok(())
    }
}

/// Assembles `A u = b` with `u_b = Q_b g` eliminated symmetrically.
pub fn assemble(disc: &Discretization, mesh: &Mesh, f: impl Fn(Point2) -> f64, g: impl Fn(Point2) -> f64) -> Result<SparseSystem> {
    let dofs = &disc.dofs;
    let k = disc.order;
    if dofs.free == 0 {
        return Err(Error::InvalidArgument("system has no free unknowns".into()));
    }
    let mut dirichlet_values = vec![0.0; dofs.len()];
    for e in mesh.boundary_edges() {
        let q = project_qb(&g, e, k)?;
        for j in 0..k {
            dirichlet_values[dofs.trace(e.id, j)] = q[j];
        }
    }

    let mut rhs = vec![0.0; dofs.free];
    let mut t = Triplets::new(dofs.free);
    for (el, loc) in mesh.elements.iter().zip(&disc.locals) {
        let map = dofs.local_to_global(el);
        let a = loc.combined();
        let load = local_load(el, mesh, &f, k, &loc.ops)?;
        for (i, &gi) in map.iter().enumerate() {
            let Some(fi) = dofs.free_index[gi] else { continue };
            rhs[fi] += load[i];
            for (j, &gj) in map.iter().enumerate() {
                match dofs.free_index[gj] {
                    Some(fj) => {
                        if a[(i, j)] != 0.0 {
                            t.push(fi, fj, a[(i, j)]);
                        }
                    }
                    None => rhs[fi] -= a[(i, j)] * dirichlet_values[gj],
                }
            }
        }
    }
    Ok(SparseSystem {
        matrix: t.into_csr(),
        rhs,
        dirichlet_values,
    })
}

/// Full weak function from the free-slot solution and the boundary values.
pub fn expand(dofs: &DofMap, system: &SparseSystem, free: &[f64]) -> Result<WeakFunction> {
    if free.len() != dofs.free {
        return Err(Error::LayoutMismatch(format!("{} free values for {} free slots", free.len(), dofs.free)));
    }
    let coeffs = dofs
        .free_index
        .iter()
        .zip(&system.dirichlet_values)
        .map(|(fi, &d)| fi.map_or(d, |i| free[i]))
        .collect();
    Ok(WeakFunction { coeffs })
}

/// Free-slot part of a weak function.
pub fn restrict(dofs: &DofMap, w: &WeakFunction) -> Vec<f64> {
    w.coeffs
        .iter()
        .zip(&dofs.free_index)
        .filter_map(|(c, fi)| fi.map(|_| *c))
        .collect()
}

/// `|A u - b| / |b|`.
pub fn solution_norm_check(free: &[f64], system: &SparseSystem) -> f64 {
    let r = system.matrix.mul_vec(free);
    let num: f64 = r.iter().zip(&system.rhs).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let den: f64 = system.rhs.iter().map(|b| b * b).sum::<f64>().sqrt();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}
