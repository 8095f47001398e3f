//! Errors `e_h = Q_h u - u_h` in the four reported norms, and convergence
//! rates across refinement levels.

use std::fmt::Write as _;

use nalgebra::DVector;

use crate::assembly::{Discretization, DofMap, WeakFunction};
use crate::error::{Error, Result};
use crate::geometry::{Mesh, Point2};
use crate::quadrature::fan_points;
use crate::space::{fan_rule_size, gradient_operator, project_q0, project_qb};

/// `Q_h u`: `Q_0 u` per element and `Q_b u` per edge.
pub fn project_exact(u: impl Fn(Point2) -> f64, mesh: &Mesh, dofs: &DofMap) -> Result<WeakFunction> {
    let k = dofs.order;
    let mut w = WeakFunction::zeros(dofs);
    for el in &mesh.elements {
        let q = project_q0(&u, el, mesh, k)?;
        for (i, v) in q.iter().enumerate() {
            w.coeffs[dofs.interior(el.id, i)] = *v;
        }
    }
    for e in &mesh.edges {
        let q = project_qb(&u, e, k)?;
        for (j, v) in q.iter().enumerate() {
            w.coeffs[dofs.trace(e.id, j)] = *v;
        }
    }
    Ok(w)
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ErrorReport {
    /// Triple-bar energy norm.
    pub energy: f64,
    /// `|e_0|` over the domain.
    pub l2_interior: f64,
    /// `(sum_T h_T |e_b|^2_{∂T})^{1/2}`.
    pub l2_edge: f64,
    /// Broken `|∇e_0|`.
    pub h1_broken: f64,
}

impl ErrorReport {
    pub fn max(&self) -> f64 {
        self.energy.max(self.l2_interior).max(self.l2_edge).max(self.h1_broken)
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.energy, self.l2_interior, self.l2_edge, self.h1_broken]
    }
}

/// Error norms of `e = reference - uh`.
pub fn error_norms(disc: &Discretization, mesh: &Mesh, uh: &WeakFunction, reference: &WeakFunction) -> Result<ErrorReport> {
    uh.check(&disc.dofs)?;
    reference.check(&disc.dofs)?;
    weak_norms(disc, mesh, &reference.sub(uh))
}

/// The four norms of a single weak function.
pub fn weak_norms(disc: &Discretization, mesh: &Mesh, e: &WeakFunction) -> Result<ErrorReport> {
    e.check(&disc.dofs)?;
    let k = disc.order;
    let n_int = disc.dofs.interior_dim;
    let mut energy = 0.0;
    let mut l2 = 0.0;
    let mut eb = 0.0;
    let mut h1 = 0.0;
    for (el, loc) in mesh.elements.iter().zip(&disc.locals) {
        let x = e.local(&disc.dofs, el);
        energy += (x.transpose() * loc.combined() * &x)[(0, 0)];
        let e0 = x.rows(0, n_int).into_owned();
        l2 += (e0.transpose() * &loc.ops.interior_mass * &e0)[(0, 0)];
        let grad = gradient_operator(k, el.diameter) * &e0;
        h1 += (grad.transpose() * loc.ops.vector_mass() * &grad)[(0, 0)];
        let mut edge_sum = 0.0;
        for (i, op) in loc.ops.edges.iter().enumerate() {
            let b: DVector<f64> = x.rows(loc.ops.layout.edge_offset(i), k).into_owned();
            edge_sum += (b.transpose() * &op.mass * &b)[(0, 0)];
        }
        eb += el.diameter * edge_sum;
    }
    Ok(ErrorReport {
        energy: energy.max(0.0).sqrt(),
        l2_interior: l2.max(0.0).sqrt(),
        l2_edge: eb.max(0.0).sqrt(),
        h1_broken: h1.max(0.0).sqrt(),
    })
}

/// `|u - u_0|` against the exact solution, by fan quadrature.
pub fn continuous_l2_error(disc: &Discretization, mesh: &Mesh, uh: &WeakFunction, u: impl Fn(Point2) -> f64) -> Result<f64> {
    uh.check(&disc.dofs)?;
    let mut s = 0.0;
    for (el, loc) in mesh.elements.iter().zip(&disc.locals) {
        for (p, w) in fan_points(el, mesh, fan_rule_size(disc.order) + 2)? {
            let d = u(p) - uh.interior_value(&disc.dofs, el, &loc.ops, p);
            s += w * d * d;
        }
    }
    Ok(s.sqrt())
}

/// One refinement level of a study.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelResult {
    pub level: usize,
    pub h: f64,
    pub dofs: usize,
    pub errors: ErrorReport,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub result: LevelResult,
    /// energy, l2, eb, h1; `None` on the first row.
    pub rates: Option<[f64; 4]>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
}

pub const CSV_HEADER: &str = "level,h,dofs,energy,energy_rate,l2,l2_rate,eb,eb_rate,h1,h1_rate";

fn rate(prev: f64, cur: f64, h_prev: f64, h_cur: f64) -> f64 {
    (prev / cur).ln() / (h_prev / h_cur).ln()
}

/// Consecutive-pair log-ratio rates.
pub fn rates(results: &[LevelResult]) -> Result<ConvergenceReport> {
    if results.len() < 2 {
        return Err(Error::InvalidArgument("rates need at least two levels".into()));
    }
    if results.windows(2).any(|w| !(w[1].h < w[0].h)) {
        return Err(Error::InvalidArgument("mesh sizes must decrease strictly".into()));
    }
    let rows = results
        .iter()
        .enumerate()
        .map(|(i, r)| ConvergenceRow {
            result: r.clone(),
            rates: (i > 0).then(|| {
                let p = &results[i - 1];
                let a = p.errors.as_array();
                let b = r.errors.as_array();
                [0, 1, 2, 3].map(|c| rate(a[c], b[c], p.h, r.h))
            }),
        })
        .collect();
    Ok(ConvergenceReport { rows })
}

impl ConvergenceReport {
    /// Rates of the finest pair.
    pub fn final_rates(&self) -> [f64; 4] {
        self.rows.last().and_then(|r| r.rates).expect("at least two rows")
    }

    /// Mean of all pairwise rates.
    pub fn mean_rates(&self) -> [f64; 4] {
        let all: Vec<[f64; 4]> = self.rows.iter().filter_map(|r| r.rates).collect();
        let n = all.len() as f64;
        [0, 1, 2, 3].map(|c| all.iter().map(|r| r[c]).sum::<f64>() / n)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            let r = &row.result;
            let e = r.errors.as_array();
            let _ = write!(out, "{},{:.5e},{}", r.level, r.h, r.dofs);
            for c in 0..4 {
                match row.rates {
                    Some(rt) => {
                        let _ = write!(out, ",{:.5e},{:.2}", e[c], rt[c]);
                    }
                    None => {
                        let _ = write!(out, ",{:.5e},", e[c]);
                    }
                }
            }
            out.push('\n');
        }
        out
    }
}
