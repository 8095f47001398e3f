//! Weak Galerkin finite elements for `-Δu = f`, `u = g` on polygonal meshes
//! whose edges may be curved.
//!
//! A run goes mesh ([`geometry`], [`testcases`]) → local operators
//! ([`space`]) → global system ([`assembly`]) → conjugate gradients
//! ([`solver`]) → errors and rates ([`error_analysis`]). [`study`] strings
//! the steps together and [`cli`] drives them from config files.

pub mod assembly;
pub mod cli;
pub mod error;
pub mod error_analysis;
pub mod geometry;
pub mod quadrature;
pub mod solver;
pub mod space;
pub mod sparse;
pub mod study;
pub mod testcases;

pub use assembly::{assemble, local_matrices, Discretization, DofMap, SparseSystem, WeakFunction};
pub use error::{Error, Result};
pub use error_analysis::{error_norms, project_exact, rates, ConvergenceReport, ErrorReport, LevelResult};
pub use geometry::{CurveSpec, Edge, EdgeShape, Element, Mesh, Point2, SignedEdge};
pub use solver::{solve_cg, PreconditionerKind, SolveReport, SolverOptions};
pub use study::{run_level, run_study, solve_problem, RunSettings, SolveOutcome};
pub use testcases::{CaseKind, TestCase, Variant};
