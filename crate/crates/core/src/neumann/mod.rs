//! Finite-difference Neumann problem on a box:
//!
//! ```text
//! -Δu_i = Σ_j β_ij (u_j^+)^{p/2} (u_i^+)^{p/2-1} - u_i^-   in Ω,   ∂_ν u = 0 on ∂Ω,
//! ```
//!
//! discretized on a vertex-centred grid with trapezoid weights so that the
//! residual is exactly the weighted gradient of the discrete energy
//!
//! ```text
//! E_h(u) = ½ Σ_edges w_⊥ (Δu)²/h + ½ Σ_k w_k |u_k^-|² - (1/p) Σ_k w_k Σ_ij β_ij (u_i^+)^{p/2} (u_j^+)^{p/2}.
//! ```

mod band;
mod io;
mod seeds;
mod solver;

pub use io::write_csv;
pub use seeds::{bump_profiles, find_direction_d, homotopy_seed, theta_seeds, ThetaSeed};
pub use solver::{
    mountain_pass_solve, newton_polish, refine_solution, NeumannSolution, SeedDiagnostic, SeedStatus, SolutionKind,
    SolveOutcome, SolverConfig,
};

use serde::{Deserialize, Serialize};

use crate::cone::{check_exponent, SymMatrix};
use crate::error::{check_dim, Error, Result};
use crate::numeric::{cone_pow, CompensatedSum};

pub const MIN_POINTS_PER_SIDE: usize = 17;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    extent: f64,
    points_per_side: usize,
    spacing: f64,
}

impl Grid {
    /// Box `[0, extent]^dim` with `points_per_side` nodes per axis.
    pub fn new(dim: usize, extent: f64, points_per_side: usize) -> Result<Self> {
        if !(dim == 1 || dim == 2) {
            return Err(Error::Parameter(format!("grid dimension must be 1 or 2, got {dim}")));
        }
        if !(extent.is_finite() && extent > 0.0) {
            return Err(Error::Parameter(format!("extent {extent} must be > 0")));
        }
        if points_per_side < MIN_POINTS_PER_SIDE {
            return Err(Error::Parameter(format!(
                "points_per_side {points_per_side} < {MIN_POINTS_PER_SIDE}"
            )));
        }
        Ok(Self {
            dim,
            extent,
            points_per_side,
            spacing: extent / (points_per_side - 1) as f64,
        })
    }

    pub fn unit(dim: usize, points_per_side: usize) -> Result<Self> {
        Self::new(dim, 1.0, points_per_side)
    }

    /// Same spacing, more nodes; used by reflection so that `h` is bitwise shared.
    fn extended(&self, points_per_side: usize) -> Self {
        Self {
            dim: self.dim,
            extent: self.spacing * (points_per_side - 1) as f64,
            points_per_side,
            spacing: self.spacing,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn points_per_side(&self) -> usize {
        self.points_per_side
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn node_count(&self) -> usize {
        self.points_per_side.pow(self.dim as u32)
    }

    pub fn volume(&self) -> f64 {
        self.extent.powi(self.dim as i32)
    }

    /// Axis indices of node `k` (x fastest).
    pub fn index(&self, k: usize) -> (usize, usize) {
        (k % self.points_per_side, k / self.points_per_side)
    }

    pub fn coords(&self, k: usize) -> Vec<f64> {
        let (ix, iy) = self.index(k);
        let x = ix as f64 * self.spacing;
        if self.dim == 1 {
            vec![x]
        } else {
            vec![x, iy as f64 * self.spacing]
        }
    }

    fn axis_weight(&self, i: usize) -> f64 {
        if i == 0 || i == self.points_per_side - 1 {
            0.5 * self.spacing
        } else {
            self.spacing
        }
    }

    /// Trapezoid quadrature weight of node `k`.
    pub fn weight(&self, k: usize) -> f64 {
        let (ix, iy) = self.index(k);
        if self.dim == 1 {
            self.axis_weight(ix)
        } else {
            self.axis_weight(ix) * self.axis_weight(iy)
        }
    }

    /// Neighbour index along an axis, reflected at the boundary (ghost node).
    #[inline]
    fn mirror(&self, i: usize, forward: bool) -> usize {
        let last = self.points_per_side - 1;
        match (forward, i) {
            (true, i) if i == last => last - 1,
            (true, i) => i + 1,
            (false, 0) => 1,
            (false, i) => i - 1,
        }
    }

    /// `(left, right)` and, in 2D, `(down, up)` neighbours of node `k`.
    fn neighbours(&self, k: usize) -> [(usize, usize); 2] {
        let m = self.points_per_side;
        let (ix, iy) = self.index(k);
        let row = iy * m;
        let horizontal = (row + self.mirror(ix, false), row + self.mirror(ix, true));
        if self.dim == 1 {
            [horizontal, (k, k)]
        } else {
            [horizontal, (self.mirror(iy, false) * m + ix, self.mirror(iy, true) * m + ix)]
        }
    }

    /// Discrete Laplacian with ghost-node reflection. Neighbour pairs are
    /// summed first so that mirrored fields give bitwise mirrored values.
    pub fn laplacian(&self, u: &[f64], k: usize) -> f64 {
        let h2 = self.spacing * self.spacing;
        let [(l, r), (d, t)] = self.neighbours(k);
        let x = (u[l] + u[r]) - 2.0 * u[k];
        if self.dim == 1 {
            x / h2
        } else {
            (x + ((u[d] + u[t]) - 2.0 * u[k])) / h2
        }
    }
}

/// `n` scalar fields sampled on the grid nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldTuple {
    components: Vec<Vec<f64>>,
}

impl FieldTuple {
    pub fn new(components: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = components.first() else {
            return Err(Error::Parameter("field tuple needs at least one component".into()));
        };
        let len = first.len();
        for c in &components {
            check_dim(len, c.len())?;
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::Parameter("field values must be finite".into()));
            }
        }
        Ok(Self { components })
    }

    pub fn zeros(n: usize, nodes: usize) -> Self {
        Self {
            components: vec![vec![0.0; nodes]; n],
        }
    }

    pub fn constant(values: &[f64], nodes: usize) -> Self {
        Self {
            components: values.iter().map(|&v| vec![v; nodes]).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.components.len()
    }

    pub fn nodes(&self) -> usize {
        self.components[0].len()
    }

    pub fn component(&self, i: usize) -> &[f64] {
        &self.components[i]
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.components
    }

    pub fn min_value(&self) -> f64 {
        self.components.iter().flatten().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_nonnegative(&self, tol: f64) -> bool {
        self.min_value() >= -tol
    }

    pub fn is_constant(&self) -> bool {
        self.components.iter().all(|c| {
            let lo = c.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = c.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            hi - lo <= 1e-12 * (1.0 + hi.abs())
        })
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self {
            components: self.components.iter().map(|c| c.iter().map(|v| t * v).collect()).collect(),
        }
    }

    /// Node-major flat vector: entry `k * n + i` is `u_i` at node `k`.
    fn to_flat(&self) -> Vec<f64> {
        let (n, nodes) = (self.n(), self.nodes());
        let mut out = vec![0.0; n * nodes];
        for (i, c) in self.components.iter().enumerate() {
            for (k, v) in c.iter().enumerate() {
                out[k * n + i] = *v;
            }
        }
        out
    }

    fn from_flat(flat: &[f64], n: usize) -> Self {
        let nodes = flat.len() / n;
        Self {
            components: (0..n).map(|i| (0..nodes).map(|k| flat[k * n + i]).collect()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub energy: f64,
    /// `∫ |∇u|² + |u^-|²`.
    pub dirichlet: f64,
    /// `(1/p) ∫ Σ_ij β_ij (u_i^+)^{p/2} (u_j^+)^{p/2}`.
    pub phi: f64,
    pub residual_inf: f64,
    /// Per component, `∫ Σ_j β_ij (u_j^+)^{p/2} (u_i^+)^{p/2-1}`; zero for exact solutions.
    pub identity_defects: Vec<f64>,
}

fn check_field(b: &SymMatrix, u: &FieldTuple, grid: &Grid) -> Result<()> {
    check_dim(b.n(), u.n())?;
    check_dim(grid.node_count(), u.nodes())
}

/// Values `(u_i^+)^{p/2}` and `(u_i^+)^{p/2-1}` at one node.
#[inline]
fn powers(u: &[f64], q: f64, uq: &mut [f64], uq1: &mut [f64]) {
    for i in 0..u.len() {
        let v = u[i].max(0.0);
        uq[i] = cone_pow(v, q);
        uq1[i] = cone_pow(v, q - 1.0);
    }
}

/// Nonlinear term `(u_i^+)^{q-1} Σ_j β_ij (u_j^+)^q` for every component at a node.
#[inline]
fn nonlinear(b: &SymMatrix, uq: &[f64], uq1: &[f64], out: &mut [f64]) {
    let n = uq.len();
    for i in 0..n {
        if uq1[i] == 0.0 {
            out[i] = 0.0;
            continue;
        }
        let mut s = 0.0;
        for j in 0..n {
            s += b.get(i, j) * uq[j];
        }
        out[i] = uq1[i] * s;
    }
}

/// Discrete Euler–Lagrange residual, node-major flat layout.
fn residual_flat(b: &SymMatrix, flat: &[f64], n: usize, p: f64, grid: &Grid) -> Vec<f64> {
    let q = 0.5 * p;
    let nodes = grid.node_count();
    let comps: Vec<Vec<f64>> = (0..n).map(|i| (0..nodes).map(|k| flat[k * n + i]).collect()).collect();
    let mut out = vec![0.0; n * nodes];
    let (mut uq, mut uq1, mut nl) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for k in 0..nodes {
        let node = &flat[k * n..(k + 1) * n];
        powers(node, q, &mut uq, &mut uq1);
        nonlinear(b, &uq, &uq1, &mut nl);
        for i in 0..n {
            out[k * n + i] = -grid.laplacian(&comps[i], k) + node[i].min(0.0) - nl[i];
        }
    }
    out
}

/// Residual field `R_i = -Δ_h u_i + u_i^- - Σ_j β_ij (u_j^+)^{p/2} (u_i^+)^{p/2-1}`.
pub fn residual(b: &SymMatrix, u: &FieldTuple, p: f64, grid: &Grid) -> Result<FieldTuple> {
    check_exponent(p)?;
    check_field(b, u, grid)?;
    let r = residual_flat(b, &u.to_flat(), u.n(), p, grid);
    Ok(FieldTuple::from_flat(&r, u.n()))
}

pub fn energy(b: &SymMatrix, u: &FieldTuple, p: f64, grid: &Grid) -> Result<EnergyReport> {
    check_exponent(p)?;
    check_field(b, u, grid)?;
    let n = u.n();
    let q = 0.5 * p;
    let m = grid.points_per_side();
    let h = grid.spacing();
    let mut dirichlet = CompensatedSum::new();
    let mut phi = CompensatedSum::new();
    let mut defects = vec![CompensatedSum::new(); n];
    for c in u.components() {
        // edges along x, and along y in 2D, weighted by the transverse trapezoid weight
        let rows = if grid.dim() == 1 { 1 } else { m };
        for r in 0..rows {
            let w_perp = if grid.dim() == 1 { 1.0 } else { grid.axis_weight(r) };
            for k in 0..m - 1 {
                let d = c[r * m + k + 1] - c[r * m + k];
                dirichlet.add(w_perp * d * d / h);
                if grid.dim() == 2 {
                    let d = c[(k + 1) * m + r] - c[k * m + r];
                    dirichlet.add(w_perp * d * d / h);
                }
            }
        }
    }
    let (mut uq, mut uq1, mut nl) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut node = vec![0.0; n];
    for k in 0..grid.node_count() {
        let w = grid.weight(k);
        for i in 0..n {
            node[i] = u.component(i)[k];
            let neg = node[i].min(0.0);
            dirichlet.add(w * neg * neg);
        }
        powers(&node, q, &mut uq, &mut uq1);
        nonlinear(b, &uq, &uq1, &mut nl);
        for i in 0..n {
            for j in 0..n {
                phi.add(w * b.get(i, j) * uq[i] * uq[j] / p);
            }
            defects[i].add(w * nl[i]);
        }
    }
    let r = residual_flat(b, &u.to_flat(), n, p, grid);
    let dirichlet = dirichlet.value();
    let phi = phi.value();
    Ok(EnergyReport {
        energy: 0.5 * dirichlet - phi,
        dirichlet,
        phi,
        residual_inf: r.iter().fold(0.0, |a, v| a.max(v.abs())),
        identity_defects: defects.iter().map(|d| d.value()).collect(),
    })
}

/// Jacobian of the residual in banded form.
fn jacobian(b: &SymMatrix, flat: &[f64], n: usize, p: f64, grid: &Grid) -> band::BandMatrix {
    let q = 0.5 * p;
    let nodes = grid.node_count();
    let stride = if grid.dim() == 1 { 1 } else { grid.points_per_side() };
    let bw = stride * n + n - 1;
    let mut jac = band::BandMatrix::zeros(n * nodes, bw, bw);
    let inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
    let cap = 1e8 * inv_h2;
    let (mut uq, mut uq1) = (vec![0.0; n], vec![0.0; n]);
    for k in 0..nodes {
        let node = &flat[k * n..(k + 1) * n];
        powers(node, q, &mut uq, &mut uq1);
        let [(l, r), (d, t)] = grid.neighbours(k);
        for i in 0..n {
            let row = k * n + i;
            let axes = if grid.dim() == 1 { 1.0 } else { 2.0 };
            jac.add(row, row, 2.0 * axes * inv_h2);
            jac.add(row, l * n + i, -inv_h2);
            jac.add(row, r * n + i, -inv_h2);
            if grid.dim() == 2 {
                jac.add(row, d * n + i, -inv_h2);
                jac.add(row, t * n + i, -inv_h2);
            }
            if node[i] < 0.0 {
                jac.add(row, row, 1.0);
            }
            if node[i] <= 0.0 {
                continue;
            }
            let mut buq = 0.0;
            for j in 0..n {
                buq += b.get(i, j) * uq[j];
            }
            for j in 0..n {
                let mut dn = if node[j] > 0.0 {
                    uq1[i] * b.get(i, j) * q * uq1[j]
                } else {
                    0.0
                };
                if j == i {
                    dn += (q - 1.0) * cone_pow(node[i], q - 2.0) * buq;
                }
                jac.add(row, k * n + j, -dn.clamp(-cap, cap));
            }
        }
    }
    jac
}

/// Even reflection of a box solution, `copies` periods per axis. The
/// extension lives on `[0, 2 * copies * L]^dim` with the original spacing.
pub fn reflect_tile(u: &FieldTuple, grid: &Grid, copies: usize) -> Result<(Grid, FieldTuple)> {
    if copies == 0 {
        return Err(Error::Parameter("copies must be >= 1".into()));
    }
    check_dim(grid.node_count(), u.nodes())?;
    let m = grid.points_per_side();
    let period = 2 * (m - 1);
    let big = copies * period + 1;
    let out_grid = grid.extended(big);
    let fold = |i: usize| {
        let r = i % period;
        if r < m {
            r
        } else {
            period - r
        }
    };
    let components = u
        .components()
        .iter()
        .map(|c| {
            (0..out_grid.node_count())
                .map(|k| {
                    let (ix, iy) = out_grid.index(k);
                    if grid.dim() == 1 {
                        c[fold(ix)]
                    } else {
                        c[fold(iy) * m + fold(ix)]
                    }
                })
                .collect()
        })
        .collect();
    Ok((out_grid, FieldTuple { components }))
}
