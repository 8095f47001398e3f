//! Preconditioned conjugate gradients with point or block Jacobi.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    /// Final `|b - A x| / |b|`.
    pub residual: f64,
    pub converged: bool,
    /// Preconditioned residual norm `sqrt(r^T M^-1 r)` per iteration,
    /// starting with the initial residual.
    pub history: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PreconditionerKind {
    Jacobi,
    /// Inverse diagonal blocks supplied by the caller, point Jacobi otherwise.
    BlockJacobi,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    /// `None` picks `20 sqrt(n) + 200`.
    pub maxiter: Option<usize>,
    pub preconditioner: PreconditionerKind,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            maxiter: None,
            preconditioner: PreconditionerKind::BlockJacobi,
        }
    }
}

/// Block-diagonal preconditioner `z = D^-1 r` over disjoint index blocks
/// that cover every row.
#[derive(Clone, Debug)]
pub struct Preconditioner {
    blocks: Vec<(Vec<usize>, DMatrix<f64>)>,
}

impl Preconditioner {
    pub fn jacobi(a: &CsrMatrix) -> Result<Self> {
        Self::block_jacobi(a, &(0..a.n).map(|i| vec![i]).collect::<Vec<_>>())
    }

    pub fn block_jacobi(a: &CsrMatrix, blocks: &[Vec<usize>]) -> Result<Self> {
        let mut seen = vec![false; a.n];
        let mut out = Vec::with_capacity(blocks.len());
        for idx in blocks {
            for &i in idx {
                if i >= a.n || std::mem::replace(&mut seen[i], true) {
                    return Err(Error::InvalidArgument(format!("preconditioner block index {i} repeated or out of range")));
                }
                let d = a.get(i, i);
                if !(d > 0.0) {
                    return Err(Error::NotSpd(format!("diagonal entry {i} is {d}")));
                }
            }
            if idx.is_empty() {
                continue;
            }
            let m = DMatrix::from_fn(idx.len(), idx.len(), |r, c| a.get(idx[r], idx[c]));
            let inv = m
                .cholesky()
                .ok_or_else(|| Error::NotSpd(format!("diagonal block at row {} is not positive definite", idx[0])))?
                .inverse();
            out.push((idx.clone(), inv));
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidArgument(format!("row {i} is not covered by a preconditioner block")));
        }
        Ok(Self { blocks: out })
    }

    pub fn apply(&self, r: &[f64], z: &mut [f64]) {
        for (idx, inv) in &self.blocks {
            if idx.len() == 1 {
                z[idx[0]] = inv[(0, 0)] * r[idx[0]];
                continue;
            }
            let local = DVector::from_iterator(idx.len(), idx.iter().map(|&i| r[i]));
            let y = inv * local;
            for (k, &i) in idx.iter().enumerate() {
                z[i] = y[k];
            }
        }
    }
}

impl SolverOptions {
    pub fn maxiter_for(&self, n: usize) -> usize {
        self.maxiter.unwrap_or_else(|| 20 * (n as f64).sqrt().ceil() as usize + 200)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solves `A x = b` from the zero initial guess with point Jacobi.
pub fn solve_cg(a: &CsrMatrix, b: &[f64], opts: &SolverOptions) -> Result<(Vec<f64>, SolveReport)> {
    solve_cg_from(a, b, vec![0.0; b.len()], opts)
}

pub fn solve_cg_from(a: &CsrMatrix, b: &[f64], x0: Vec<f64>, opts: &SolverOptions) -> Result<(Vec<f64>, SolveReport)> {
    solve_pcg(a, b, x0, &Preconditioner::jacobi(a)?, opts)
}

/// Solves with the preconditioner selected by `opts`; `blocks` are used for
/// [`PreconditionerKind::BlockJacobi`].
pub fn solve_with_blocks(a: &CsrMatrix, b: &[f64], blocks: &[Vec<usize>], opts: &SolverOptions) -> Result<(Vec<f64>, SolveReport)> {
    let pc = match opts.preconditioner {
        PreconditionerKind::Jacobi => Preconditioner::jacobi(a)?,
        PreconditionerKind::BlockJacobi => Preconditioner::block_jacobi(a, blocks)?,
    };
    solve_pcg(a, b, vec![0.0; b.len()], &pc, opts)
}

/// Like [`pcg_iterate`] but non-convergence is an error.
pub fn solve_pcg(a: &CsrMatrix, b: &[f64], x0: Vec<f64>, pc: &Preconditioner, opts: &SolverOptions) -> Result<(Vec<f64>, SolveReport)> {
    let (x, report) = pcg_iterate(a, b, x0, pc, opts)?;
    if !report.converged {
        return Err(Error::NotConverged(report));
    }
    Ok((x, report))
}

/// Runs PCG until the relative residual reaches `opts.tol` or the iteration
/// cap, returning the last iterate either way.
pub fn pcg_iterate(a: &CsrMatrix, b: &[f64], x0: Vec<f64>, pc: &Preconditioner, opts: &SolverOptions) -> Result<(Vec<f64>, SolveReport)> {
    let n = a.n;
    if b.len() != n || x0.len() != n {
        return Err(Error::InvalidArgument(format!(
            "system of size {n} with rhs {} and start {}",
            b.len(),
            x0.len()
        )));
    }
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("right-hand side is not finite".into()));
    }
    let maxiter = opts.maxiter_for(n);

    let bnorm = norm(b);
    let mut x = x0;
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok((
            x,
            SolveReport {
                iterations: 0,
                residual: 0.0,
                converged: true,
                history: vec![0.0],
            },
        ));
    }

    let mut r = a.mul_vec(&x);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut z = vec![0.0; n];
    pc.apply(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut history = vec![rz.max(0.0).sqrt()];
    let mut residual = norm(&r) / bnorm;
    let mut iterations = 0;

    while residual > opts.tol && iterations < maxiter {
        a.mul_vec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::NotSpd(format!("p^T A p = {pap:e} at iteration {iterations}")));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        pc.apply(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        iterations += 1;
        history.push(rz.max(0.0).sqrt());
        residual = norm(&r) / bnorm;
    }

    let report = SolveReport {
        iterations,
        residual,
        converged: residual <= opts.tol,
        history,
    };
    Ok((x, report))
}
