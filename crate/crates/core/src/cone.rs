//! Coupling matrices, vectors of the nonnegative cone and the two homogeneous
//! forms everything else is built on: the quadratic form `b(c) = c^T B c` and
//! the weighted degree-`(p-1)` form
//!
//! ```text
//! f(c) = sum_{i,j} beta_ij c_j^{p/2} c_i^{p/2-1} mu_i
//! ```
//!
//! Both forms are evaluated with compensated summation so that certificates do
//! not depend on the order in which terms are visited.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::numeric::{compensated_sum, cone_pow, CompensatedSum};

/// Largest admissible asymmetry `|b_ij - b_ji|` accepted by the constructors.
pub const SYMMETRY_TOLERANCE: f64 = 1e-9;

/// Symmetric real `n x n` coupling matrix, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix {
    n: usize,
    entries: Vec<f64>,
    /// Largest `|b_ij - b_ji|` seen before symmetrization.
    max_asymmetry: f64,
}

impl SymMatrix {
    /// Build from row-major entries, averaging `(b_ij + b_ji) / 2`.
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parameter("matrix must have at least one row".into()));
        }
        check_dim(n * n, entries.len())?;
        if let Some(bad) = entries.iter().find(|v| !v.is_finite()) {
            return Err(Error::Parameter(format!("non-finite matrix entry {bad}")));
        }
        let mut sym = entries;
        let mut max_asymmetry: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let a = sym[i * n + j];
                let b = sym[j * n + i];
                max_asymmetry = max_asymmetry.max((a - b).abs());
                let avg = 0.5 * (a + b);
                sym[i * n + j] = avg;
                sym[j * n + i] = avg;
            }
        }
        if max_asymmetry > SYMMETRY_TOLERANCE {
            return Err(Error::Asymmetric(max_asymmetry));
        }
        Ok(Self {
            n,
            entries: sym,
            max_asymmetry,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for row in rows {
            check_dim(n, row.len())?;
            entries.extend_from_slice(row);
        }
        Self::new(n, entries)
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1.0;
        }
        Self {
            n,
            entries,
            max_asymmetry: 0.0,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn max_asymmetry(&self) -> f64 {
        self.max_asymmetry
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// `B x`, each component compensated.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| compensated_sum((0..self.n).map(|j| self.get(i, j) * x[j])))
            .collect()
    }

    /// `P^T B P` for the permutation sending position `k` to `perm[k]`,
    /// i.e. entry `(k, l)` of the result is `b_{perm[k], perm[l]}`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_dim(self.n, perm.len())?;
        let mut seen = vec![false; self.n];
        for &p in perm {
            if p >= self.n || seen[p] {
                return Err(Error::Parameter("not a permutation".into()));
            }
            seen[p] = true;
        }
        let n = self.n;
        let entries = (0..n * n).map(|idx| self.get(perm[idx / n], perm[idx % n])).collect();
        Ok(Self {
            n,
            entries,
            max_asymmetry: self.max_asymmetry,
        })
    }

    /// `diag(mu^2) B diag(mu^2)`, the rescaled matrix whose unweighted cubic
    /// form matches the `mu`-weighted cubic form of `B`.
    pub fn weight_scaled(&self, mu: &[f64]) -> Result<Self> {
        check_dim(self.n, mu.len())?;
        let n = self.n;
        let entries = (0..n * n)
            .map(|idx| {
                let (i, j) = (idx / n, idx % n);
                mu[i] * mu[i] * self.get(i, j) * mu[j] * mu[j]
            })
            .collect();
        Ok(Self {
            n,
            entries,
            max_asymmetry: 0.0,
        })
    }
}

/// Vector of the closed cone `C^n_+`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeVector {
    components: Vec<f64>,
}

impl ConeVector {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Parameter("cone vector must be nonempty".into()));
        }
        for &c in &components {
            if !c.is_finite() || c < 0.0 {
                return Err(Error::Parameter(format!("cone vector component {c} is not >= 0")));
            }
        }
        // normalize -0.0
        Ok(Self {
            components: components.into_iter().map(|c| c + 0.0).collect(),
        })
    }

    pub fn ones(n: usize) -> Self {
        Self {
            components: vec![1.0; n],
        }
    }

    pub fn basis(n: usize, i: usize) -> Self {
        let mut components = vec![0.0; n];
        components[i] = 1.0;
        Self { components }
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.components
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.components
    }

    /// True iff some component is strictly positive.
    pub fn is_nontrivial(&self) -> bool {
        self.components.iter().any(|&c| c > 0.0)
    }

    pub fn is_interior(&self) -> bool {
        self.components.iter().all(|&c| c > 0.0)
    }

    /// Rescaled copy with components summing to one.
    pub fn on_simplex(&self) -> Option<Self> {
        crate::numeric::to_simplex(&self.components).map(|components| Self { components })
    }

    /// Rescaled copy with largest component equal to one.
    pub fn max_normalized(&self) -> Option<Self> {
        let m = self.components.iter().copied().fold(0.0, f64::max);
        if m > 0.0 {
            Some(Self {
                components: self.components.iter().map(|c| c / m).collect(),
            })
        } else {
            None
        }
    }

    /// Componentwise power `c_i^e`.
    pub fn powf(&self, e: f64) -> Self {
        Self {
            components: self.components.iter().map(|&c| cone_pow(c, e)).collect(),
        }
    }
}

/// Value of a form, optionally with its gradient in `c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormValue {
    pub value: f64,
    pub gradient: Option<Vec<f64>>,
}

/// `b(c) = sum beta_ij c_i c_j`, with gradient `2 B c`.
pub fn quadratic_form(b: &SymMatrix, c: &[f64]) -> Result<FormValue> {
    check_dim(b.n(), c.len())?;
    let bc = b.apply(c);
    let mut acc = CompensatedSum::new();
    for i in 0..b.n() {
        for j in 0..b.n() {
            acc.add(b.get(i, j) * c[i] * c[j]);
        }
    }
    Ok(FormValue {
        value: acc.value(),
        gradient: Some(bc.into_iter().map(|v| 2.0 * v).collect()),
    })
}

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if p.is_finite() && p > 2.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("exponent p = {p} must satisfy p > 2")))
    }
}

/// Weighted degree-`(p-1)` form `sum beta_ij c_j^{p/2} c_i^{p/2-1} mu_i`.
///
/// The gradient is reported when every partial derivative is finite; for
/// `p < 4` it blows up where a component of `c` vanishes.
pub fn p_form(b: &SymMatrix, c: &ConeVector, mu: &ConeVector, p: f64) -> Result<FormValue> {
    check_exponent(p)?;
    check_dim(b.n(), c.len())?;
    check_dim(b.n(), mu.len())?;
    let (value, gradient) = p_form_raw(b, c.as_slice(), mu.as_slice(), p, true);
    let gradient = gradient.filter(|g| g.iter().all(|v| v.is_finite()));
    Ok(FormValue { value, gradient })
}

/// Unchecked evaluation shared with the minimizers. `c` and `mu` must be
/// nonnegative and of length `n`.
pub(crate) fn p_form_raw(
    b: &SymMatrix,
    c: &[f64],
    mu: &[f64],
    p: f64,
    with_gradient: bool,
) -> (f64, Option<Vec<f64>>) {
    let n = b.n();
    let q = 0.5 * p;
    let cq: Vec<f64> = c.iter().map(|&x| cone_pow(x, q)).collect();
    let cq1: Vec<f64> = c.iter().map(|&x| cone_pow(x, q - 1.0)).collect();
    let bcq = b.apply(&cq);
    let value = compensated_sum((0..n).map(|i| mu[i] * cq1[i] * bcq[i]));
    if !with_gradient {
        return (value, None);
    }
    // d/dc_k = mu_k (q-1) c_k^{q-2} (B c^q)_k + q c_k^{q-1} sum_i beta_ik mu_i c_i^{q-1}
    let weighted: Vec<f64> = (0..n).map(|i| mu[i] * cq1[i]).collect();
    let bw = b.apply(&weighted);
    let gradient = (0..n)
        .map(|k| {
            let own = if mu[k] == 0.0 || bcq[k] == 0.0 {
                0.0
            } else {
                mu[k] * (q - 1.0) * cone_pow(c[k], q - 2.0) * bcq[k]
            };
            own + q * cq1[k] * bw[k]
        })
        .collect();
    (value, Some(gradient))
}

/// Principal submatrix on the (ordered, zero-based) index set `support`.
pub fn principal_submatrix(b: &SymMatrix, support: &[usize]) -> Result<SymMatrix> {
    if support.is_empty() {
        return Err(Error::Parameter("empty index set".into()));
    }
    let mut seen = vec![false; b.n()];
    for &i in support {
        if i >= b.n() {
            return Err(Error::Parameter(format!("index {i} out of range for n = {}", b.n())));
        }
        if seen[i] {
            return Err(Error::Parameter(format!("index {i} repeated")));
        }
        seen[i] = true;
    }
    let k = support.len();
    let entries = (0..k * k).map(|idx| b.get(support[idx / k], support[idx % k])).collect();
    Ok(SymMatrix {
        n: k,
        entries,
        max_asymmetry: b.max_asymmetry,
    })
}

/// Row sums of the negative parts: component `i` is `sum_{j != i} min(beta_ij, 0)`.
pub fn negative_part_row_sums(b: &SymMatrix) -> Vec<f64> {
    (0..b.n())
        .map(|i| compensated_sum((0..b.n()).filter(|&j| j != i).map(|j| b.get(i, j).min(0.0))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> SymMatrix {
        SymMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn cv(v: &[f64]) -> ConeVector {
        ConeVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn quadratic_form_examples() {
        let id = SymMatrix::identity(2);
        assert_eq!(quadratic_form(&id, &[1.0, 1.0]).unwrap().value, 2.0);
        let b = m(&[&[1.0, -2.0], &[-2.0, 1.0]]);
        assert_eq!(quadratic_form(&b, &[1.0, 1.0]).unwrap().value, -2.0);
        let b1 = m(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 1.0], &[0.0, 1.0, 1.0]]);
        assert_eq!(quadratic_form(&b1, &[1.0, 1.0, 1.0]).unwrap().value, 5.0);
    }

    #[test]
    fn quadratic_form_dimension_error() {
        let id = SymMatrix::identity(2);
        assert_eq!(
            quadratic_form(&id, &[1.0, 1.0, 1.0]).unwrap_err(),
            Error::Dimension { expected: 2, got: 3 }
        );
    }

    #[test]
    fn p_form_examples() {
        let id = SymMatrix::identity(2);
        let ones = ConeVector::ones(2);
        assert_eq!(p_form(&id, &cv(&[1.0, 1.0]), &ones, 4.0).unwrap().value, 2.0);
        assert_eq!(p_form(&id, &cv(&[2.0, 0.0]), &ones, 4.0).unwrap().value, 8.0);
        let b0 = m(&[&[1.0, -1.0, -1.0], &[-1.0, 1.0, 1.0], &[-1.0, 1.0, 1.0]]);
        let v = p_form(&b0, &cv(&[3.0, 2.0, 2.0]), &ConeVector::ones(3), 4.0).unwrap();
        assert_eq!(v.value, -1.0);
    }

    #[test]
    fn p_form_rejects_small_exponent() {
        let id = SymMatrix::identity(2);
        let ones = ConeVector::ones(2);
        assert!(matches!(p_form(&id, &ones, &ones, 2.0), Err(Error::Parameter(_))));
    }

    #[test]
    fn p_form_gradient_dropped_at_boundary_for_small_p() {
        let b = m(&[&[1.0, -0.5], &[-0.5, 1.0]]);
        let v = p_form(&b, &cv(&[1.0, 0.0]), &ConeVector::ones(2), 3.0).unwrap();
        assert!(v.gradient.is_none());
        let v = p_form(&b, &cv(&[1.0, 0.0]), &ConeVector::ones(2), 4.0).unwrap();
        assert!(v.gradient.is_some());
    }

    #[test]
    fn submatrix_examples() {
        let be = m(&[&[1.0, -0.9, -0.9], &[-0.9, 1.0, 1.0], &[-0.9, 1.0, 1.0]]);
        let s = principal_submatrix(&be, &[1, 2]).unwrap();
        assert_eq!(s.rows(), vec![vec![1.0, 1.0], vec![1.0, 1.0]]);
        assert_eq!(principal_submatrix(&be, &[0, 1, 2]).unwrap(), be);
        let id = SymMatrix::identity(3);
        assert_eq!(principal_submatrix(&id, &[1]).unwrap().rows(), vec![vec![1.0]]);
        assert!(principal_submatrix(&id, &[]).is_err());
        assert!(principal_submatrix(&id, &[3]).is_err());
    }

    #[test]
    fn negative_row_sums() {
        let b = m(&[&[1.0, -0.4, -0.4], &[-0.4, 1.0, 0.5], &[-0.4, 0.5, 1.0]]);
        let s = negative_part_row_sums(&b);
        let want = [-0.8, -0.4, -0.4];
        for (a, w) in s.iter().zip(want) {
            assert!((a - w).abs() < 1e-15);
        }
        assert_eq!(negative_part_row_sums(&SymMatrix::identity(4)), vec![0.0; 4]);
        let be = m(&[&[1.0, -0.9, -0.9], &[-0.9, 1.0, 1.0], &[-0.9, 1.0, 1.0]]);
        let s = negative_part_row_sums(&be);
        for (a, w) in s.iter().zip([-1.8, -0.9, -0.9]) {
            assert!((a - w).abs() < 1e-15);
        }
    }

    #[test]
    fn symmetrization_bounds() {
        let ok = SymMatrix::new(2, vec![1.0, 0.5 + 4e-10, 0.5, 1.0]).unwrap();
        assert_eq!(ok.get(0, 1), ok.get(1, 0));
        assert!(ok.max_asymmetry() > 0.0);
        assert!(matches!(
            SymMatrix::new(2, vec![1.0, 0.5 + 1e-6, 0.5, 1.0]),
            Err(Error::Asymmetric(_))
        ));
        assert!(SymMatrix::new(0, vec![]).is_err());
    }

    #[test]
    fn cone_vector_validation() {
        assert!(ConeVector::new(vec![1.0, -1e-3]).is_err());
        assert!(!cv(&[0.0, 0.0]).is_nontrivial());
        assert!(cv(&[0.0, 2.0]).is_nontrivial());
    }
}
