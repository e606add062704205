//! Banded LU with partial pivoting (LAPACK `gbtf2` layout, column-major).

use crate::error::{Error, Result};

pub(crate) struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let ldab = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            ldab,
            data: vec![0.0; ldab * n],
        }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> usize {
        // row kl + ku + i - j of column j
        j * self.ldab + self.kl + self.ku + i - j
    }

    /// `A[i][j] += v`; the entry must lie inside the band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i <= j + self.kl && j <= i + self.ku, "({i}, {j}) outside band");
        let k = self.at(i, j);
        self.data[k] += v;
    }

    #[cfg(test)]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i > j + self.kl || j > i + self.ku {
            0.0
        } else {
            self.data[self.at(i, j)]
        }
    }

    /// `Aᵀ x` (before factorization).
    pub fn transpose_mul(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|j| {
                let lo = j.saturating_sub(self.ku);
                let hi = (j + self.kl).min(n - 1);
                (lo..=hi).map(|i| self.data[self.at(i, j)] * x[i]).sum()
            })
            .collect()
    }

    /// In-place factorization; returns the pivot sequence.
    pub fn factor(mut self) -> Result<BandLu> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let kv = kl + ku;
        let ld = self.ldab;
        let mut ipiv = vec![0usize; n];
        let mut ju = 0usize;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let col = j * ld + kv;
            let mut jp = 0;
            let mut best = self.data[col].abs();
            for t in 1..=km {
                let v = self.data[col + t].abs();
                if v > best {
                    best = v;
                    jp = t;
                }
            }
            ipiv[j] = j + jp;
            if best == 0.0 || !best.is_finite() {
                return Err(Error::Internal(format!("singular banded system at column {j}")));
            }
            ju = ju.max((j + ku + jp).min(n - 1));
            if jp != 0 {
                for c in j..=ju {
                    let a = c * ld + kv + j - c;
                    self.data.swap(a, a + jp);
                }
            }
            let piv = self.data[col];
            for t in 1..=km {
                self.data[col + t] /= piv;
            }
            for c in (j + 1)..=ju {
                let base = c * ld + kv + j - c;
                let a_jc = self.data[base];
                if a_jc != 0.0 {
                    for t in 1..=km {
                        self.data[base + t] -= self.data[col + t] * a_jc;
                    }
                }
            }
        }
        Ok(BandLu { m: self, ipiv })
    }
}

pub(crate) struct BandLu {
    m: BandMatrix,
    ipiv: Vec<usize>,
}

impl BandLu {
    pub fn solve(&self, rhs: &mut [f64]) {
        let m = &self.m;
        let (n, kl) = (m.n, m.kl);
        let kv = m.kl + m.ku;
        let ld = m.ldab;
        for j in 0..n {
            let pj = self.ipiv[j];
            if pj != j {
                rhs.swap(j, pj);
            }
            let km = kl.min(n - 1 - j);
            let bj = rhs[j];
            if bj != 0.0 {
                let col = j * ld + kv;
                for t in 1..=km {
                    rhs[j + t] -= m.data[col + t] * bj;
                }
            }
        }
        for j in (0..n).rev() {
            let col = j * ld;
            rhs[j] /= m.data[col + kv];
            let bj = rhs[j];
            if bj != 0.0 {
                let lo = j.saturating_sub(kv);
                for i in lo..j {
                    rhs[i] -= m.data[col + kv + i - j] * bj;
                }
            }
        }
    }
}
