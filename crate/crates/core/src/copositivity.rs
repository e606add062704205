//! Classification of a coupling matrix as not copositive, copositive but not
//! strictly, or strictly copositive.
//!
//! By degree-2 homogeneity, positivity of `b` on the cone is decided on the
//! standard simplex. The minimum of a quadratic over the simplex is attained at
//! a vertex or at a stationary point in the relative interior of some face, so
//! enumerating all supports and solving the face KKT system
//!
//! ```text
//! (B_S c_S)_i = lambda  (i in S),   sum c_S = 1
//! ```
//!
//! yields the global minimum. For `n` in `{2, 3}` closed-form criteria are
//! cross-checked against the enumeration.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::cone::{principal_submatrix, quadratic_form, ConeVector, SymMatrix};
use crate::error::{Error, Result};
use crate::numeric::{simplex_grid_size, SimplexGrid};

/// Largest matrix size accepted by the face enumeration.
pub const MAX_DIMENSION: usize = 16;

/// Face systems with a 1-norm condition number above this are treated as flat.
pub const FACE_CONDITION_LIMIT: f64 = 1e12;

/// Barycentric step used on flat faces.
pub const FLAT_FACE_GRID: u32 = 64;

/// Flat faces are gridded only while the grid stays below this many points.
/// Larger flat faces are covered by their subfaces: along a flat direction of
/// the stationarity system the form is constant, so the minimum is also
/// reached on a smaller face.
pub const FLAT_FACE_GRID_BUDGET: u64 = 50_000;

/// Classification dead-band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance(f64);

impl Tolerance {
    pub const DEFAULT: Tolerance = Tolerance(1e-9);

    pub fn new(tol: f64) -> Result<Self> {
        if tol > 0.0 && tol < 1e-3 {
            Ok(Self(tol))
        } else {
            Err(Error::Parameter(format!("tolerance {tol} outside (0, 1e-3)")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::DEFAULT
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CopositivityKind {
    NotCopositive,
    CopositiveNotStrict,
    StrictlyCopositive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassificationMethod {
    ClosedForm2,
    ClosedForm3,
    FaceEnumeration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CopositivityVerdict {
    pub kind: CopositivityKind,
    /// Global minimizer of `b` on the standard simplex.
    pub witness: ConeVector,
    pub min_value: f64,
    pub method: ClassificationMethod,
    /// Some flat face was scanned on a barycentric grid.
    pub grid_assisted: bool,
    /// `|min_value| <= tol`.
    pub boundary_case: bool,
    /// Final expression of the closed-form criterion (`n = 3` only).
    pub closed_form_diagnostic: Option<f64>,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexMinimum {
    pub min_value: f64,
    pub argmin: ConeVector,
    pub grid_assisted: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PsdClass {
    PositiveDefinite,
    PositiveSemidefinite,
    Indefinite,
}

/// Outcome of the closed-form strict copositivity test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormResult {
    pub strictly_copositive: bool,
    /// For `n = 3` and positive diagonal, the value of the final expression.
    pub diagnostic: Option<f64>,
}

struct Candidate {
    value: f64,
    point: Vec<f64>,
}

impl Candidate {
    /// Strictly better, with a lexicographic tie-break on the point.
    fn beats(&self, other: &Candidate) -> bool {
        let scale = 1.0 + self.value.abs().max(other.value.abs());
        if (self.value - other.value).abs() > 1e-14 * scale {
            return self.value < other.value;
        }
        for (a, b) in self.point.iter().zip(&other.point) {
            if a != b {
                return a < b;
            }
        }
        false
    }
}

/// Solve the face stationarity system on `support`. Returns `None` when the
/// system is flat (singular or condition above [`FACE_CONDITION_LIMIT`]).
fn solve_face(b: &SymMatrix, support: &[usize]) -> Option<Vec<f64>> {
    let k = support.len();
    let dim = k + 1;
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    for (r, &i) in support.iter().enumerate() {
        for (c, &j) in support.iter().enumerate() {
            m[(r, c)] = b.get(i, j);
        }
        m[(r, k)] = -1.0;
        m[(k, r)] = 1.0;
    }
    let norm1 = column_norm1(&m);
    let lu = m.lu();
    let inverse = lu.try_inverse()?;
    let condition = norm1 * column_norm1(&inverse);
    if !condition.is_finite() || condition > FACE_CONDITION_LIMIT {
        return None;
    }
    let mut rhs = DVector::<f64>::zeros(dim);
    rhs[k] = 1.0;
    let sol = &inverse * rhs;
    Some(sol.iter().take(k).copied().collect())
}

fn column_norm1(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn embed(n: usize, support: &[usize], local: &[f64]) -> Vec<f64> {
    let mut full = vec![0.0; n];
    for (&i, &v) in support.iter().zip(local) {
        full[i] = v;
    }
    full
}

/// Global minimum of `b` over the standard simplex by face enumeration.
pub fn simplex_min_quadratic(b: &SymMatrix) -> Result<SimplexMinimum> {
    let n = b.n();
    if n > MAX_DIMENSION {
        return Err(Error::Capacity(format!(
            "face enumeration supports n <= {MAX_DIMENSION}, got {n}"
        )));
    }
    let mut best: Option<Candidate> = None;
    let mut grid_assisted = false;
    let consider = |point: Vec<f64>, best: &mut Option<Candidate>| {
        let value = quadratic_form(b, &point).expect("dimension checked").value;
        let cand = Candidate { value, point };
        if best.as_ref().is_none_or(|cur| cand.beats(cur)) {
            *best = Some(cand);
        }
    };
    for mask in 1u32..(1u32 << n) {
        let support: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        if support.len() == 1 {
            consider(embed(n, &support, &[1.0]), &mut best);
            continue;
        }
        match solve_face(b, &support) {
            Some(local) => {
                if local.iter().all(|&v| v > 0.0) {
                    let s: f64 = local.iter().sum();
                    let local: Vec<f64> = local.iter().map(|v| v / s).collect();
                    consider(embed(n, &support, &local), &mut best);
                }
            }
            None => {
                let k = support.len();
                if simplex_grid_size(k, FLAT_FACE_GRID) <= FLAT_FACE_GRID_BUDGET {
                    grid_assisted = true;
                    for counts in SimplexGrid::new(k, FLAT_FACE_GRID) {
                        if counts.contains(&0) {
                            // subfaces are enumerated on their own
                            continue;
                        }
                        let local: Vec<f64> =
                            counts.iter().map(|&c| c as f64 / FLAT_FACE_GRID as f64).collect();
                        consider(embed(n, &support, &local), &mut best);
                    }
                }
            }
        }
    }
    let best = best.expect("vertices are always candidates");
    Ok(SimplexMinimum {
        min_value: best.value,
        argmin: ConeVector::new(best.point)?,
        grid_assisted,
    })
}

/// Closed-form strict copositivity for `n = 2` and `n = 3`.
pub fn strict_copositivity_closed_form(b: &SymMatrix) -> Result<ClosedFormResult> {
    let n = b.n();
    if !(n == 2 || n == 3) {
        return Err(Error::Capacity(format!("closed form covers n in {{2, 3}}, got {n}")));
    }
    let diag = b.diagonal();
    if diag.iter().any(|&d| d <= 0.0) {
        return Ok(ClosedFormResult {
            strictly_copositive: false,
            diagnostic: None,
        });
    }
    if n == 2 {
        return Ok(ClosedFormResult {
            strictly_copositive: b.get(0, 1) > -(diag[0] * diag[1]).sqrt(),
            diagnostic: None,
        });
    }
    let (b11, b22, b33) = (diag[0], diag[1], diag[2]);
    let (b12, b13, b23) = (b.get(0, 1), b.get(0, 2), b.get(1, 2));
    let s12 = b12 + (b11 * b22).sqrt();
    let s13 = b13 + (b11 * b33).sqrt();
    let s23 = b23 + (b22 * b33).sqrt();
    let pairs_ok = s12 > 0.0 && s13 > 0.0 && s23 > 0.0;
    let product = 2.0 * s12 * s13 * s23;
    let diagnostic = (b11 * b22 * b33).sqrt() + b12 * b33.sqrt() + b13 * b22.sqrt() + b23 * b11.sqrt()
        + product.max(0.0).sqrt();
    Ok(ClosedFormResult {
        strictly_copositive: pairs_ok && diagnostic > 0.0,
        diagnostic: Some(diagnostic),
    })
}

/// Classify `B` using the face-enumeration oracle, cross-checked against the
/// closed forms for small `n`.
pub fn classify_copositivity(b: &SymMatrix, tol: Tolerance) -> Result<CopositivityVerdict> {
    let min = simplex_min_quadratic(b)?;
    let t = tol.value();
    let kind = if min.min_value < -t {
        CopositivityKind::NotCopositive
    } else if min.min_value > t {
        CopositivityKind::StrictlyCopositive
    } else {
        CopositivityKind::CopositiveNotStrict
    };
    let (method, diagnostic) = match b.n() {
        2 | 3 => {
            let cf = strict_copositivity_closed_form(b)?;
            let oracle_strict = kind == CopositivityKind::StrictlyCopositive;
            if min.min_value.abs() > t && cf.strictly_copositive != oracle_strict {
                return Err(Error::Internal(format!(
                    "closed form says strict = {}, face enumeration found min {:e}",
                    cf.strictly_copositive, min.min_value
                )));
            }
            let method = if b.n() == 2 {
                ClassificationMethod::ClosedForm2
            } else {
                ClassificationMethod::ClosedForm3
            };
            (method, cf.diagnostic)
        }
        _ => (ClassificationMethod::FaceEnumeration, None),
    };
    Ok(CopositivityVerdict {
        kind,
        witness: min.argmin,
        min_value: min.min_value,
        method,
        grid_assisted: min.grid_assisted,
        boundary_case: min.min_value.abs() <= t,
        closed_form_diagnostic: diagnostic,
        tolerance: t,
    })
}

/// Eigenvalues of `B` in ascending order.
pub fn eigenvalues(b: &SymMatrix) -> Vec<f64> {
    let n = b.n();
    let m = DMatrix::from_row_slice(n, n, b.entries());
    let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn check_psd(b: &SymMatrix, tol: Tolerance) -> PsdClass {
    let lambda_min = eigenvalues(b)[0];
    if lambda_min > tol.value() {
        PsdClass::PositiveDefinite
    } else if lambda_min.abs() <= tol.value() {
        PsdClass::PositiveSemidefinite
    } else {
        PsdClass::Indefinite
    }
}

/// True iff every proper principal submatrix is strictly copositive, i.e. `b`
/// is positive on the boundary of the cone minus the origin.
pub fn boundary_positive(b: &SymMatrix, tol: Tolerance) -> Result<bool> {
    let n = b.n();
    if n < 2 {
        return Err(Error::Parameter("boundary positivity needs n >= 2".into()));
    }
    for drop in 0..n {
        let keep: Vec<usize> = (0..n).filter(|&i| i != drop).collect();
        let sub = principal_submatrix(b, &keep)?;
        if simplex_min_quadratic(&sub)?.min_value <= tol.value() {
            return Ok(false);
        }
    }
    Ok(true)
}
