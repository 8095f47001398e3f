//! End-to-end runs: mesh, assemble, solve, measure.

use crate::assembly::{assemble, expand, Discretization, SparseSystem, WeakFunction};
use crate::error::Result;
use crate::error_analysis::{error_norms, project_exact, rates, ConvergenceReport, ErrorReport, LevelResult};
use crate::geometry::Mesh;
use crate::solver::{solve_with_blocks, SolveReport, SolverOptions};
use crate::testcases::{CaseKind, TestCase, Variant};

#[derive(Clone, Debug)]
pub struct RunSettings {
    pub case: CaseKind,
    pub variant: Variant,
    pub order: usize,
    pub rho: f64,
    pub solver: SolverOptions,
}

impl RunSettings {
    pub fn new(case: CaseKind, variant: Variant, order: usize) -> Self {
        Self {
            case,
            variant,
            order,
            rho: 1.0,
            solver: SolverOptions::default(),
        }
    }
}

/// Everything produced by one solve.
#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub mesh: Mesh,
    pub disc: Discretization,
    pub system: SparseSystem,
    pub solution: WeakFunction,
    pub projection: WeakFunction,
    pub report: SolveReport,
    pub errors: ErrorReport,
}

pub fn solve_problem(mesh: Mesh, problem: &TestCase, order: usize, rho: f64, solver: &SolverOptions) -> Result<SolveOutcome> {
    let disc = Discretization::new(&mesh, order, rho)?;
    let system = assemble(&disc, &mesh, problem.f, problem.g)?;
    let (x, report) = solve_with_blocks(&system.matrix, &system.rhs, &disc.dofs.free_blocks(), solver)?;
    let solution = expand(&disc.dofs, &system, &x)?;
    let projection = project_exact(problem.u, &mesh, &disc.dofs)?;
    let errors = error_norms(&disc, &mesh, &solution, &projection)?;
    Ok(SolveOutcome {
        mesh,
        disc,
        system,
        solution,
        projection,
        report,
        errors,
    })
}

pub fn run_level(settings: &RunSettings, level: usize) -> Result<(LevelResult, SolveOutcome)> {
    let mesh = settings.case.mesh(level, settings.variant)?;
    let out = solve_problem(mesh, settings.case.problem(settings.order), settings.order, settings.rho, &settings.solver)?;
    let result = LevelResult {
        level,
        h: settings.case.nominal_h(level),
        dofs: out.system.free(),
        errors: out.errors,
    };
    Ok((result, out))
}

pub fn run_study(settings: &RunSettings, levels: &[usize]) -> Result<ConvergenceReport> {
    let results = levels
        .iter()
        .map(|&l| run_level(settings, l).map(|r| r.0))
        .collect::<Result<Vec<_>>>()?;
    rates(&results)
}
