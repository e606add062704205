//! Nontrivial critical points of the discrete energy.
//!
//! Each starting field is pushed to the maximum of the energy along its ray,
//! then driven to a zero of the residual by damped Newton steps on the merit
//! `½‖R‖²` (falling back to merit gradient steps where the Jacobian is
//! singular or the Newton direction does not decrease the merit).

use serde::{Deserialize, Serialize};

use super::seeds::{find_direction_d, theta_seeds};
use super::{energy, jacobian, residual_flat, EnergyReport, FieldTuple, Grid};
use crate::cone::{principal_submatrix, ConeVector, SymMatrix};
use crate::copositivity::{classify_copositivity, CopositivityKind, Tolerance};
use crate::error::{check_dim, Error, NotApplicable, Result};
use crate::solvability::{constant_solution, ProblemParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub residual_tol: f64,
    pub negativity_tol: f64,
    /// Relative to the starting amplitude of each seed.
    pub nontriviality_threshold: f64,
    pub max_iterations: usize,
    /// Number of starting fields; raised to at least `n + 2`.
    pub seed_count: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            residual_tol: 1e-8,
            negativity_tol: 1e-10,
            nontriviality_threshold: 1e-4,
            max_iterations: 200,
            seed_count: 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolutionKind {
    Constant,
    Nonconstant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeumannSolution {
    pub grid: Grid,
    pub field: FieldTuple,
    pub report: EnergyReport,
    pub classification: SolutionKind,
    pub seed_provenance: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SeedStatus {
    Converged,
    /// Fell below the nontriviality threshold.
    Collapsed,
    /// Converged to a zero of the residual that takes negative values.
    SignChanging,
    Stalled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedDiagnostic {
    pub label: String,
    pub status: SeedStatus,
    pub residual_inf: f64,
    pub start_amplitude: f64,
    pub final_amplitude: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SolveOutcome {
    Solution {
        solution: NeumannSolution,
        diagnostics: Vec<SeedDiagnostic>,
    },
    TrivialOnly {
        diagnostics: Vec<SeedDiagnostic>,
    },
    Inconclusive {
        best: FieldTuple,
        best_residual: f64,
        diagnostics: Vec<SeedDiagnostic>,
    },
}

impl SolveOutcome {
    pub fn solution(&self) -> Option<&NeumannSolution> {
        match self {
            SolveOutcome::Solution { solution, .. } => Some(solution),
            _ => None,
        }
    }

    pub fn diagnostics(&self) -> &[SeedDiagnostic] {
        match self {
            SolveOutcome::Solution { diagnostics, .. }
            | SolveOutcome::TrivialOnly { diagnostics }
            | SolveOutcome::Inconclusive { diagnostics, .. } => diagnostics,
        }
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn merit(r: &[f64]) -> f64 {
    0.5 * r.iter().map(|x| x * x).sum::<f64>()
}

struct Run {
    field: Vec<f64>,
    status: SeedStatus,
    residual_inf: f64,
    iterations: usize,
}

/// Newton direction `-J⁻¹ r`; a singular Jacobian (for instance a component
/// that vanishes identically, leaving the bare Neumann Laplacian) is retried
/// with a tiny diagonal shift.
fn newton_direction(b: &SymMatrix, p: f64, grid: &Grid, u: &[f64], r: &[f64]) -> Option<Vec<f64>> {
    let n = b.n();
    let solve = |shift: f64| -> Option<Vec<f64>> {
        let mut jac = jacobian(b, u, n, p, grid);
        if shift > 0.0 {
            for i in 0..u.len() {
                jac.add(i, i, shift);
            }
        }
        let lu = jac.factor().ok()?;
        let mut step: Vec<f64> = r.iter().map(|x| -x).collect();
        lu.solve(&mut step);
        step.iter().all(|s| s.is_finite()).then_some(step)
    };
    solve(0.0).or_else(|| solve(1e-10 / (grid.spacing() * grid.spacing())))
}

/// Damped Newton on the residual from `start` (node-major flat layout).
///
/// Convergence requires a small residual and a Newton step that is small
/// relative to the field: near a degenerate zero such as `u = 0` the residual
/// shrinks like `u^{p-1}` while every step removes a fixed fraction of `u`.
fn drive(b: &SymMatrix, p: f64, grid: &Grid, start: Vec<f64>, config: &SolverConfig, collapse_scale: f64) -> Run {
    let n = b.n();
    let mut u = start;
    let mut r = residual_flat(b, &u, n, p, grid);
    let mut f = merit(&r);
    let collapse = config.nontriviality_threshold * collapse_scale;
    let mut last_step = f64::INFINITY;
    let mut polish = 0;
    for it in 0..config.max_iterations {
        let rinf = inf_norm(&r);
        let amp = inf_norm(&u);
        if amp < collapse {
            return Run {
                field: u,
                status: SeedStatus::Collapsed,
                residual_inf: rinf,
                iterations: it,
            };
        }
        let converged = rinf < config.residual_tol && last_step <= 1e-6 * amp;
        if converged {
            polish += 1;
            if polish > 2 {
                return finish(u, rinf, it, config);
            }
        }
        let mut accepted = false;
        if let Some(step) = newton_direction(b, p, grid, &u, &r) {
            let mut alpha = 1.0;
            while alpha >= 1.0 / 1024.0 {
                let trial: Vec<f64> = u.iter().zip(&step).map(|(a, s)| a + alpha * s).collect();
                let rt = residual_flat(b, &trial, n, p, grid);
                let ft = merit(&rt);
                if ft < (1.0 - 1e-4 * alpha) * f || (converged && inf_norm(&rt) < rinf) {
                    last_step = alpha * inf_norm(&step);
                    u = trial;
                    r = rt;
                    f = ft;
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
        }
        if !accepted && converged {
            // Newton can no longer improve a converged iterate
            return finish(u, rinf, it, config);
        }
        if !accepted {
            let grad = jacobian(b, &u, n, p, grid).transpose_mul(&r);
            let g2: f64 = grad.iter().map(|g| g * g).sum();
            let mut alpha = if g2 > 0.0 { f / g2 } else { 0.0 };
            while alpha > 0.0 && alpha * g2.sqrt() > 1e-16 * (1.0 + amp) {
                let trial: Vec<f64> = u.iter().zip(&grad).map(|(a, g)| a - alpha * g).collect();
                let rt = residual_flat(b, &trial, n, p, grid);
                let ft = merit(&rt);
                if ft < f - 1e-4 * alpha * g2 {
                    last_step = alpha * inf_norm(&grad);
                    u = trial;
                    r = rt;
                    f = ft;
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
        }
        if !accepted {
            return Run {
                field: u,
                status: SeedStatus::Stalled,
                residual_inf: rinf,
                iterations: it,
            };
        }
    }
    let rinf = inf_norm(&r);
    let status = if inf_norm(&u) < collapse { SeedStatus::Collapsed } else { SeedStatus::Stalled };
    Run {
        field: u,
        status,
        residual_inf: rinf,
        iterations: config.max_iterations,
    }
}

fn finish(u: Vec<f64>, rinf: f64, iterations: usize, config: &SolverConfig) -> Run {
    let min = u.iter().cloned().fold(f64::INFINITY, f64::min);
    Run {
        field: u,
        status: if min >= -config.negativity_tol {
            SeedStatus::Converged
        } else {
            SeedStatus::SignChanging
        },
        residual_inf: rinf,
        iterations,
    }
}

/// Scale factor putting a field at the maximum of the energy along its ray.
fn ray_max_scale(b: &SymMatrix, u: &FieldTuple, p: f64, grid: &Grid) -> Result<f64> {
    let e = energy(b, u, p, grid)?;
    if e.dirichlet > 0.0 && e.phi > 0.0 {
        Ok((e.dirichlet / (p * e.phi)).powf(1.0 / (p - 2.0)))
    } else {
        Ok(1.0)
    }
}

fn accept(
    b: &SymMatrix,
    p: f64,
    grid: &Grid,
    field: Vec<f64>,
    config: &SolverConfig,
    label: String,
) -> Result<Option<NeumannSolution>> {
    let n = b.n();
    let clamped: Vec<f64> = field.iter().map(|&v| v.max(0.0)).collect();
    let field = FieldTuple::from_flat(&clamped, n);
    let report = energy(b, &field, p, grid)?;
    if report.residual_inf >= config.residual_tol || field.max_abs() == 0.0 {
        return Ok(None);
    }
    let classification = if field.is_constant() {
        SolutionKind::Constant
    } else {
        SolutionKind::Nonconstant
    };
    Ok(Some(NeumannSolution {
        grid: grid.clone(),
        field,
        report,
        classification,
        seed_provenance: label,
    }))
}

/// Newton polish of an arbitrary starting field.
pub fn newton_polish(
    b: &SymMatrix,
    p: f64,
    grid: &Grid,
    start: &FieldTuple,
    config: &SolverConfig,
) -> Result<(FieldTuple, SeedDiagnostic)> {
    check_dim(b.n(), start.n())?;
    check_dim(grid.node_count(), start.nodes())?;
    let amp = start.max_abs();
    let run = drive(b, p, grid, start.to_flat(), config, amp);
    let field = FieldTuple::from_flat(&run.field, b.n());
    let diag = SeedDiagnostic {
        label: "polish".into(),
        status: run.status,
        residual_inf: run.residual_inf,
        start_amplitude: amp,
        final_amplitude: field.max_abs(),
        iterations: run.iterations,
    };
    Ok((field, diag))
}

fn interpolate_axis(src_m: usize, dst_m: usize, i: usize) -> (usize, usize, f64) {
    let s = i as f64 * (src_m - 1) as f64 / (dst_m - 1) as f64;
    let lo = (s.floor() as usize).min(src_m - 2);
    (lo, lo + 1, s - lo as f64)
}

/// Interpolate an accepted solution to a grid with `points_per_side` nodes
/// and polish it there.
pub fn refine_solution(
    b: &SymMatrix,
    p: f64,
    solution: &NeumannSolution,
    points_per_side: usize,
    config: &SolverConfig,
) -> Result<NeumannSolution> {
    let src = &solution.grid;
    let dst = Grid::new(src.dim(), src.extent(), points_per_side)?;
    let (sm, dm) = (src.points_per_side(), dst.points_per_side());
    let components = solution
        .field
        .components()
        .iter()
        .map(|c| {
            (0..dst.node_count())
                .map(|k| {
                    let (ix, iy) = dst.index(k);
                    let (x0, x1, tx) = interpolate_axis(sm, dm, ix);
                    if dst.dim() == 1 {
                        (1.0 - tx) * c[x0] + tx * c[x1]
                    } else {
                        let (y0, y1, ty) = interpolate_axis(sm, dm, iy);
                        let row = |y: usize| (1.0 - tx) * c[y * sm + x0] + tx * c[y * sm + x1];
                        (1.0 - ty) * row(y0) + ty * row(y1)
                    }
                })
                .collect()
        })
        .collect();
    let start = FieldTuple::new(components)?;
    let (field, diag) = newton_polish(b, p, &dst, &start, config)?;
    if diag.status != SeedStatus::Converged {
        return Err(Error::Internal(format!(
            "refinement to {points_per_side} nodes did not converge ({:?}, residual {:e})",
            diag.status, diag.residual_inf
        )));
    }
    accept(b, p, &dst, field.to_flat(), config, solution.seed_provenance.clone())?
        .ok_or_else(|| Error::Internal("refined field failed acceptance".into()))
}

/// Search for a nontrivial nonnegative solution of the Neumann problem on `grid`.
///
/// `params.p` is validated as subcritical for the grid dimension.
pub fn mountain_pass_solve(
    b: &SymMatrix,
    params: &ProblemParams,
    grid: &Grid,
    config: &SolverConfig,
) -> Result<SolveOutcome> {
    let params = ProblemParams::new(grid.dim() as u32, params.p)?;
    let p = params.p.value();
    if let Some(i) = b.diagonal().iter().position(|&d| d < 0.0) {
        return Err(Error::Precondition(format!("diagonal entry {} is negative", i + 1)));
    }
    let n = b.n();
    let nodes = grid.node_count();

    if let Some(sol) = constant_solution(b, p)? {
        let field = FieldTuple::constant(sol.u.as_slice(), nodes);
        let report = energy(b, &field, p, grid)?;
        let label = format!(
            "constant solution on support {:?}",
            sol.support.iter().map(|i| i + 1).collect::<Vec<_>>()
        );
        let diag = SeedDiagnostic {
            label: label.clone(),
            status: SeedStatus::Converged,
            residual_inf: report.residual_inf,
            start_amplitude: field.max_abs(),
            final_amplitude: field.max_abs(),
            iterations: 0,
        };
        return Ok(SolveOutcome::Solution {
            solution: NeumannSolution {
                grid: grid.clone(),
                field,
                report,
                classification: SolutionKind::Constant,
                seed_provenance: label,
            },
            diagnostics: vec![diag],
        });
    }

    let d = match find_direction_d(b, p) {
        Ok(d) => d,
        Err(Error::NotApplicable(NotApplicable::StrictlyCopositive | NotApplicable::NoStrictlyNegativeDirection)) => {
            ConeVector::ones(n)
        }
        Err(e) => return Err(e),
    };
    let seeds = theta_seeds(b, &d, grid, config.seed_count.max(n + 2))?;
    let mut diagnostics = Vec::new();
    let mut accepted: Vec<NeumannSolution> = Vec::new();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for seed in seeds {
        let scale = ray_max_scale(b, &seed.field, p, grid)?;
        let start = seed.field.scaled(scale);
        let amp = start.max_abs();
        let run = drive(b, p, grid, start.to_flat(), config, amp);
        diagnostics.push(SeedDiagnostic {
            label: seed.label.clone(),
            status: run.status,
            residual_inf: run.residual_inf,
            start_amplitude: amp,
            final_amplitude: inf_norm(&run.field),
            iterations: run.iterations,
        });
        if run.status != SeedStatus::Collapsed && best.as_ref().is_none_or(|(r, _)| run.residual_inf < *r) {
            best = Some((run.residual_inf, run.field.clone()));
        }
        if run.status == SeedStatus::Converged {
            if let Some(sol) = accept(b, p, grid, run.field, config, seed.label)? {
                accepted.push(sol);
            }
        }
    }
    if let Some(solution) = select(accepted) {
        return Ok(SolveOutcome::Solution { solution, diagnostics });
    }

    // a face of the cone on which the form is not strictly copositive carries
    // a solution with the remaining components identically zero
    if n >= 2 {
        for drop in 0..n {
            let support: Vec<usize> = (0..n).filter(|&i| i != drop).collect();
            let sub = principal_submatrix(b, &support)?;
            if classify_copositivity(&sub, Tolerance::DEFAULT)?.kind == CopositivityKind::StrictlyCopositive {
                continue;
            }
            if let SolveOutcome::Solution { solution, diagnostics: sub_diag } =
                mountain_pass_solve(&sub, &params, grid, config)?
            {
                let mut components = vec![vec![0.0; nodes]; n];
                for (k, &i) in support.iter().enumerate() {
                    components[i] = solution.field.component(k).to_vec();
                }
                let label = format!("face without component {}: {}", drop + 1, solution.seed_provenance);
                diagnostics.extend(sub_diag);
                let flat = FieldTuple::new(components)?.to_flat();
                if let Some(sol) = accept(b, p, grid, flat, config, label)? {
                    return Ok(SolveOutcome::Solution { solution: sol, diagnostics });
                }
            }
        }
    }

    if diagnostics.iter().all(|d| d.status == SeedStatus::Collapsed) {
        return Ok(SolveOutcome::TrivialOnly { diagnostics });
    }
    let (best_residual, best) = best.unwrap_or((f64::NAN, vec![0.0; n * nodes]));
    Ok(SolveOutcome::Inconclusive {
        best: FieldTuple::from_flat(&best, n),
        best_residual,
        diagnostics,
    })
}

/// Smallest residual wins; ties go to lower energy, then to the
/// lexicographically smaller field.
fn select(mut candidates: Vec<NeumannSolution>) -> Option<NeumannSolution> {
    candidates.sort_by(|a, b| {
        a.report
            .residual_inf
            .total_cmp(&b.report.residual_inf)
            .then(a.report.energy.total_cmp(&b.report.energy))
            .then_with(|| {
                let fa = a.field.components().iter().flatten();
                let fb = b.field.components().iter().flatten();
                fa.zip(fb)
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
    });
    candidates.into_iter().next()
}
