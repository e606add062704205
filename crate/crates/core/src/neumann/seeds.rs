//! Starting fields: constants along an interior direction `d` with
//! `b(d^{p/2}) < 0`, separated bumps `c_i φ_i`, and homotopies between them.

use serde::{Deserialize, Serialize};

use super::{FieldTuple, Grid};
use crate::cone::{check_exponent, quadratic_form, ConeVector, SymMatrix};
use crate::copositivity::{classify_copositivity, simplex_min_quadratic, CopositivityKind, Tolerance};
use crate::error::{check_dim, Error, NotApplicable, Result};
use crate::numeric::cone_pow;
use crate::solvability::constant_solution;

/// Floor on `d_i / max d`.
pub const DIRECTION_FLOOR: f64 = 1e-4;

/// Interior direction `d` with `b(d^{p/2}) < 0`, max-normalized.
pub fn find_direction_d(b: &SymMatrix, p: f64) -> Result<ConeVector> {
    check_exponent(p)?;
    let verdict = classify_copositivity(b, Tolerance::DEFAULT)?;
    if verdict.kind == CopositivityKind::StrictlyCopositive {
        return Err(Error::NotApplicable(NotApplicable::StrictlyCopositive));
    }
    if constant_solution(b, p)?.is_some() {
        return Err(Error::NotApplicable(NotApplicable::ConstantSolutionExists));
    }
    let min = simplex_min_quadratic(b)?;
    if min.min_value >= -Tolerance::DEFAULT.value() {
        return Err(Error::NotApplicable(NotApplicable::NoStrictlyNegativeDirection));
    }
    let n = b.n();
    let x = min.argmin.as_slice();
    let bary = 1.0 / n as f64;
    let mut t = 0.5;
    while t > 1e-12 {
        let c: Vec<f64> = x.iter().map(|&xi| (1.0 - t) * xi + t * bary).collect();
        let dmax = c.iter().map(|&ci| cone_pow(ci, 2.0 / p)).fold(0.0, f64::max);
        let d: Vec<f64> = c
            .iter()
            .map(|&ci| (cone_pow(ci, 2.0 / p) / dmax).max(DIRECTION_FLOOR))
            .collect();
        let back: Vec<f64> = d.iter().map(|&di| cone_pow(di, 0.5 * p)).collect();
        if quadratic_form(b, &back)?.value < 0.0 {
            return ConeVector::new(d);
        }
        t *= 0.5;
    }
    Err(Error::NotApplicable(NotApplicable::NoStrictlyNegativeDirection))
}

/// `n` profiles along the first axis, `0 <= φ_i <= 1`, with pairwise disjoint
/// supports separated by a total gap of `0.2 L`. Each support must contain at
/// least four nodes.
pub fn bump_profiles(n: usize, grid: &Grid) -> Result<Vec<Vec<f64>>> {
    if n == 0 {
        return Err(Error::Parameter("need at least one profile".into()));
    }
    let l = grid.extent();
    let (gap, width) = if n == 1 { (0.0, l) } else { (0.2 * l / (n - 1) as f64, 0.8 * l / n as f64) };
    let m = grid.points_per_side();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let a = i as f64 * (width + gap);
        let mut prof = vec![0.0; grid.node_count()];
        let mut support = 0;
        for ix in 0..m {
            let x = ix as f64 * grid.spacing();
            let s = (x - a) / width;
            if !(0.0..=1.0).contains(&s) {
                continue;
            }
            // touching the left wall the profile starts at 1, touching the right wall it ends at 1
            let v = if n == 1 {
                1.0
            } else if i == 0 {
                (0.5 * std::f64::consts::PI * s).cos().powi(2)
            } else if i == n - 1 {
                (0.5 * std::f64::consts::PI * s).sin().powi(2)
            } else {
                (std::f64::consts::PI * s).sin().powi(2)
            };
            if v <= 0.0 {
                continue;
            }
            support += 1;
            for iy in 0..if grid.dim() == 1 { 1 } else { m } {
                prof[iy * m + ix] = v;
            }
        }
        if support < 4 {
            return Err(Error::Capacity(format!(
                "bump {i} of {n} covers {support} nodes; refine the grid"
            )));
        }
        out.push(prof);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if out[i].iter().zip(&out[j]).any(|(a, b)| a * b != 0.0) {
                return Err(Error::Internal("bump supports overlap".into()));
            }
        }
    }
    Ok(out)
}

/// `h_{c,t} = (1 - t) c + t (c_1 φ_1, …, c_n φ_n)`.
pub fn homotopy_seed(c: &ConeVector, t: f64, grid: &Grid) -> Result<FieldTuple> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Parameter(format!("homotopy parameter {t} outside [0, 1]")));
    }
    let profiles = bump_profiles(c.len(), grid)?;
    let components = c
        .as_slice()
        .iter()
        .zip(&profiles)
        .map(|(&ci, prof)| prof.iter().map(|&phi| (1.0 - t) * ci + t * ci * phi).collect())
        .collect();
    FieldTuple::new(components)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaSeed {
    pub field: FieldTuple,
    pub label: String,
}

/// `count >= n + 2` starting fields built from the direction `d`.
pub fn theta_seeds(b: &SymMatrix, d: &ConeVector, grid: &Grid, count: usize) -> Result<Vec<ThetaSeed>> {
    let n = b.n();
    check_dim(n, d.len())?;
    if !d.is_interior() {
        return Err(Error::Parameter("direction d must be interior".into()));
    }
    if count < n + 2 {
        return Err(Error::Parameter(format!("count {count} < n + 2 = {}", n + 2)));
    }
    let nodes = grid.node_count();
    let mut seeds = Vec::with_capacity(count);
    let push = |field: FieldTuple, label: String, seeds: &mut Vec<ThetaSeed>| {
        if seeds.len() < count {
            seeds.push(ThetaSeed { field, label });
        }
    };
    push(FieldTuple::constant(d.as_slice(), nodes), "constant 1.0 d".into(), &mut seeds);
    push(homotopy_seed(d, 1.0, grid)?, "bumps d".into(), &mut seeds);
    for t in [0.75, 0.5, 0.25] {
        push(homotopy_seed(d, t, grid)?, format!("homotopy t={t} d"), &mut seeds);
    }
    for lambda in [0.5, 2.0] {
        let c: Vec<f64> = d.as_slice().iter().map(|v| lambda * v).collect();
        push(FieldTuple::constant(&c, nodes), format!("constant {lambda} d"), &mut seeds);
    }
    // rays on the boundary faces of the cone
    for i in 0..n {
        if n == 1 {
            break;
        }
        let mut c = d.clone().into_vec();
        c[i] = 0.0;
        let c = ConeVector::new(c)?;
        push(homotopy_seed(&c, 1.0, grid)?, format!("bumps d with c{}=0", i + 1), &mut seeds);
    }
    let mut k = 1;
    while seeds.len() < count {
        let t = 1.0 - 0.5f64.powi(k + 1);
        let field = homotopy_seed(d, t, grid)?.scaled(1.5f64.powi(k));
        push(field, format!("homotopy t={t} scaled {}", 1.5f64.powi(k)), &mut seeds);
        k += 1;
    }
    Ok(seeds)
}
