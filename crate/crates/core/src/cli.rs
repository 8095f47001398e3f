//! Run configuration and the `wgfem` subcommands.
//!
//! Config files are line oriented:
//!
//! ```text
//! # comment
//! case = curved_quad        # curved_quad | circle | annulus | patch
//! variant = curved          # curved | straight
//! order = 2                 # 1..=3
//! levels = 8, 16, 32        # ascending
//! rho = 1
//! solver.tol = 1e-12
//! solver.maxiter = 5000
//! solver.preconditioner = block_jacobi   # block_jacobi | jacobi
//! output.dir = out
//! ```
//!
//! For `curved_quad` and `patch` a level is the number of divisions per
//! direction; for `circle` and `annulus` it is the refinement index from 1.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::geometry::{read_mesh, validate, write_mesh, Element, Mesh, Point2};
use crate::quadrature::element_moments_about;
use crate::solver::{PreconditionerKind, SolverOptions};
use crate::study::{run_level, run_study, RunSettings, SolveOutcome};
use crate::testcases::{CaseKind, Variant};

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub case: CaseKind,
    pub variant: Variant,
    pub order: usize,
    pub levels: Vec<usize>,
    pub rho: f64,
    pub tol: f64,
    pub maxiter: Option<usize>,
    pub preconditioner: PreconditionerKind,
    pub output_dir: Option<PathBuf>,
}

fn config_err(key: &str, msg: impl Into<String>) -> Error {
    Error::Config {
        key: key.to_string(),
        msg: msg.into(),
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| config_err(key, format!("cannot parse `{v}`")))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut case = None;
        let mut variant = Variant::Curved;
        let mut order = None;
        let mut levels = None;
        let mut rho = 1.0;
        let mut tol = SolverOptions::default().tol;
        let mut maxiter = None;
        let mut preconditioner = PreconditionerKind::BlockJacobi;
        let mut output_dir = None;

        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(Error::Parse {
                line: n + 1,
                msg: format!("expected `key = value`, got `{line}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "case" => case = Some(CaseKind::parse(value).ok_or_else(|| config_err(key, format!("unknown case `{value}`")))?),
                "variant" => {
                    variant = match value {
                        "curved" => Variant::Curved,
                        "straight" => Variant::Straight,
                        _ => return Err(config_err(key, format!("unknown variant `{value}`"))),
                    }
                }
                "order" => order = Some(parse_num::<usize>(key, value)?),
                "levels" => {
                    levels = Some(
                        value
                            .split(',')
                            .map(|s| parse_num::<usize>(key, s.trim()))
                            .collect::<Result<Vec<_>>>()?,
                    )
                }
                "rho" => rho = parse_num(key, value)?,
                "solver.tol" => tol = parse_num(key, value)?,
                "solver.maxiter" => maxiter = Some(parse_num(key, value)?),
                "solver.preconditioner" => {
                    preconditioner = match value {
                        "jacobi" => PreconditionerKind::Jacobi,
                        "block_jacobi" => PreconditionerKind::BlockJacobi,
                        _ => return Err(config_err(key, format!("unknown preconditioner `{value}`"))),
                    }
                }
                "output.dir" => output_dir = Some(PathBuf::from(value)),
                _ => return Err(config_err(key, "unknown key")),
            }
        }

        let case = case.ok_or_else(|| config_err("case", "missing"))?;
        let order = order.ok_or_else(|| config_err("order", "missing"))?;
        if !(1..=3).contains(&order) {
            return Err(config_err("order", format!("{order} outside 1..=3")));
        }
        let levels = levels.ok_or_else(|| config_err("levels", "missing"))?;
        if levels.is_empty() || levels.windows(2).any(|w| w[1] <= w[0]) {
            return Err(config_err("levels", "must be nonempty and strictly ascending"));
        }
        if !(rho > 0.0) {
            return Err(config_err("rho", "must be positive"));
        }
        if !(tol > 0.0) {
            return Err(config_err("solver.tol", "must be positive"));
        }
        Ok(Self {
            case,
            variant,
            order,
            levels,
            rho,
            tol,
            maxiter,
            preconditioner,
            output_dir,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn settings(&self) -> RunSettings {
        RunSettings {
            case: self.case,
            variant: self.variant,
            order: self.order,
            rho: self.rho,
            solver: SolverOptions {
                tol: self.tol,
                maxiter: self.maxiter,
                preconditioner: self.preconditioner,
            },
        }
    }

    fn variant_name(&self) -> &'static str {
        match self.variant {
            Variant::Curved => "curved",
            Variant::Straight => "straight",
        }
    }

    fn out_dir(&self) -> Result<PathBuf> {
        let dir = self.output_dir.clone().unwrap_or_else(|| PathBuf::from("."));
        fs::create_dir_all(&dir)?;
        Ok(dir)
    }
}

/// Writes one mesh file per level; returns a summary table.
pub fn cmd_mesh(cfg: &RunConfig) -> Result<String> {
    let dir = cfg.out_dir()?;
    let mut out = String::from("level,file,elements,edges,h,min_area_ratio\n");
    for &level in &cfg.levels {
        let mesh = cfg.case.mesh(level, cfg.variant)?;
        let report = validate(&mesh)?;
        let name = format!("{}_{}_{}.wgmesh", cfg.case.name(), cfg.variant_name(), level);
        write_mesh(&mesh, dir.join(&name))?;
        let _ = writeln!(out, "{level},{name},{},{},{:.5e},{:.5e}", report.elements, report.edges, report.h, report.min_area_ratio);
    }
    Ok(out)
}

/// `x,y,u0` on a 5 x 5 grid per element, mapped through the fan of the
/// element from its centroid.
pub fn solution_samples(out: &SolveOutcome) -> String {
    let mut csv = String::from("x,y,u0\n");
    for (el, loc) in out.mesh.elements.iter().zip(&out.disc.locals) {
        let c = el.centroid;
        for a in 0..5 {
            let t = (a as f64 + 0.5) / 5.0;
            let boundary = boundary_point(&out.mesh, el, t);
            for b in 0..5 {
                let s = (b as f64 + 0.5) / 5.0;
                let p = c + (boundary - c) * s;
                let v = out.solution.interior_value(&out.disc.dofs, el, &loc.ops, p);
                let _ = writeln!(csv, "{:.10e},{:.10e},{:.10e}", p.x, p.y, v);
            }
        }
    }
    csv
}

/// Point at fraction `t` of the loop, each edge taking an equal share.
fn boundary_point(mesh: &Mesh, el: &Element, t: f64) -> Point2 {
    let n = el.edges.len();
    let pos = (t * n as f64).min(n as f64 - 1e-12);
    let i = pos.floor() as usize;
    let local = pos - i as f64;
    let se = el.edges[i];
    let s = if se.forward { local } else { 1.0 - local };
    mesh.edge(se).curve.eval(s)
}

/// Solves the first configured level; writes `solution.csv` and returns the
/// error summary.
pub fn cmd_solve(cfg: &RunConfig, dump_system: Option<&Path>) -> Result<String> {
    let level = cfg.levels[0];
    let (result, outcome) = run_level(&cfg.settings(), level)?;
    if let Some(path) = dump_system {
        outcome.system.dump_to(path)?;
    }
    let dir = cfg.out_dir()?;
    fs::write(dir.join("solution.csv"), solution_samples(&outcome))?;
    let e = result.errors;
    let mut s = String::new();
    let _ = writeln!(s, "case = {}", cfg.case.name());
    let _ = writeln!(s, "variant = {}", cfg.variant_name());
    let _ = writeln!(s, "order = {}", cfg.order);
    let _ = writeln!(s, "level = {level}");
    let _ = writeln!(s, "dofs = {}", result.dofs);
    let _ = writeln!(s, "iterations = {}", outcome.report.iterations);
    let _ = writeln!(s, "residual = {:.5e}", outcome.report.residual);
    let _ = writeln!(s, "energy = {:.5e}", e.energy);
    let _ = writeln!(s, "l2 = {:.5e}", e.l2_interior);
    let _ = writeln!(s, "eb = {:.5e}", e.l2_edge);
    let _ = writeln!(s, "h1 = {:.5e}", e.h1_broken);
    Ok(s)
}

/// Convergence table over all configured levels; also written to
/// `study.csv` when `output.dir` is set.
pub fn cmd_study(cfg: &RunConfig) -> Result<String> {
    let report = run_study(&cfg.settings(), &cfg.levels)?;
    let csv = report.to_csv();
    if cfg.output_dir.is_some() {
        fs::write(cfg.out_dir()?.join("study.csv"), &csv)?;
    }
    Ok(csv)
}

/// `element,a,b,value`: raw moments `int x^a y^b` for `a + b <= degree`.
pub fn cmd_moments(mesh_path: &Path, degree: usize) -> Result<String> {
    let mesh = read_mesh(mesh_path)?;
    validate(&mesh)?;
    let mut out = String::from("element,a,b,value\n");
    for el in &mesh.elements {
        let table = element_moments_about(el, &mesh, degree, Point2::default(), 1.0);
        for (a, b, v) in table.iter() {
            let _ = writeln!(out, "{},{a},{b},{v:.16e}", el.id);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_config() {
        let cfg = RunConfig::parse(
            "# study\ncase = circle\nvariant = straight\norder = 2\nlevels = 1, 2,3\nrho = 2\nsolver.tol = 1e-10\nsolver.maxiter = 99\noutput.dir = out # here\n",
        )
        .unwrap();
        assert_eq!(cfg.case, CaseKind::Circle);
        assert_eq!(cfg.variant, Variant::Straight);
        assert_eq!(cfg.levels, vec![1, 2, 3]);
        assert_eq!(cfg.rho, 2.0);
        assert_eq!(cfg.maxiter, Some(99));
        assert_eq!(cfg.output_dir, Some(PathBuf::from("out")));
    }

    #[test]
    fn config_errors_name_the_key() {
        let cases = [
            ("case = circle\norder = 4\nlevels = 1", "order"),
            ("case = disk\norder = 1\nlevels = 1", "case"),
            ("case = circle\norder = 1\nlevels = 2, 1", "levels"),
            ("case = circle\norder = 1\nlevels = 1\nsolver.tol = abc", "solver.tol"),
            ("case = circle\norder = 1\nlevels = 1\ncolour = red", "colour"),
            ("order = 1\nlevels = 1", "case"),
        ];
        for (text, key) in cases {
            match RunConfig::parse(text) {
                Err(Error::Config { key: k, .. }) => assert_eq!(k, key, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
        assert!(matches!(RunConfig::parse("case circle"), Err(Error::Parse { line: 1, .. })));
    }
}
