//! Small numerical helpers shared by the classifiers: compensated summation,
//! cone-safe powers, Euclidean projection onto the standard simplex and
//! barycentric grid enumeration.

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Compensated sum of an iterator of terms.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let mut acc = CompensatedSum::new();
    for t in terms {
        acc.add(t);
    }
    acc.value()
}

/// `c^e` for `c >= 0`, with an exact zero at the cone boundary when `e > 0`.
///
/// Integer exponents go through `powi` so that values such as `3^2` are exact.
#[inline]
pub fn cone_pow(c: f64, e: f64) -> f64 {
    if c <= 0.0 {
        return if e > 0.0 {
            0.0
        } else if e == 0.0 {
            1.0
        } else {
            f64::INFINITY
        };
    }
    if e.fract() == 0.0 && e.abs() <= 64.0 {
        c.powi(e as i32)
    } else {
        (e * c.ln()).exp()
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    compensated_sum(a.iter().zip(b).map(|(x, y)| x * y))
}

/// Euclidean projection onto `{x >= 0, sum x = 1}` (sort-based).
pub fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut u: Vec<f64> = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (k, &uk) in u.iter().enumerate() {
        cumulative += uk;
        let t = (cumulative - 1.0) / (k as f64 + 1.0);
        if uk - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Rescale a nonnegative vector so its components sum to one.
pub fn to_simplex(c: &[f64]) -> Option<Vec<f64>> {
    let s = compensated_sum(c.iter().copied());
    if !(s > 0.0) {
        return None;
    }
    Some(c.iter().map(|x| x / s).collect())
}

/// Number of points of the barycentric grid `{k / r : k in N^n, sum k = r}`,
/// saturating at `u64::MAX`.
pub fn simplex_grid_size(n: usize, r: u32) -> u64 {
    if n == 0 {
        return 0;
    }
    // C(r + n - 1, n - 1)
    let k = (n - 1) as u128;
    let top = r as u128 + k;
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (top - i) / (i + 1);
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Largest resolution `r <= wanted` whose grid has at most `budget` points.
pub fn resolution_within_budget(n: usize, wanted: u32, budget: u64) -> u32 {
    let mut r = wanted;
    while r > 1 && simplex_grid_size(n, r) > budget {
        r -= 1;
    }
    r
}

/// Lexicographic enumeration of integer compositions of `r` into `n` parts.
pub struct SimplexGrid {
    counts: Vec<u32>,
    total: u32,
    done: bool,
}

impl SimplexGrid {
    pub fn new(n: usize, total: u32) -> Self {
        assert!(n >= 1);
        let mut counts = vec![0; n];
        counts[n - 1] = total;
        Self {
            counts,
            total,
            done: false,
        }
    }

    /// Current composition; call [`SimplexGrid::advance`] to move on.
    pub fn current(&self) -> Option<&[u32]> {
        if self.done {
            None
        } else {
            Some(&self.counts)
        }
    }

    pub fn advance(&mut self) {
        let n = self.counts.len();
        if n == 1 {
            self.done = true;
            return;
        }
        // find the rightmost position before the last with room to grow
        let last = self.counts[n - 1];
        if last > 0 {
            self.counts[n - 2] += 1;
            self.counts[n - 1] = last - 1;
            return;
        }
        let mut i = n - 2;
        loop {
            if i == 0 {
                self.done = true;
                return;
            }
            let moved = self.counts[i];
            self.counts[i] = 0;
            if moved > 0 {
                self.counts[i - 1] += 1;
                let used: u32 = self.counts[..i].iter().sum();
                self.counts[n - 1] = self.total - used;
                return;
            }
            i -= 1;
        }
    }
}

impl Iterator for SimplexGrid {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        let out = self.current()?.to_vec();
        self.advance();
        Some(out)
    }
}

/// Projected-gradient descent with Armijo backtracking on the standard simplex.
///
/// `eval` returns the objective value and its gradient. Returns the final point
/// and value.
pub fn simplex_descent<F>(eval: F, start: &[f64], tolerance: f64, max_iter: usize) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    let mut x = project_to_simplex(start);
    let (mut fx, mut g) = eval(&x);
    let mut step = 1.0 / (1.0 + g.iter().map(|v| v.abs()).fold(0.0, f64::max));
    let mut stalls = 0;
    for _ in 0..max_iter {
        let mut accepted = false;
        let mut trial_step = step;
        while trial_step > 1e-18 {
            let trial: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - trial_step * gi).collect();
            let y = project_to_simplex(&trial);
            let slope: f64 = y.iter().zip(&x).zip(&g).map(|((yi, xi), gi)| (yi - xi) * gi).sum();
            if slope >= 0.0 {
                // projected direction is not a descent direction: stationary
                break;
            }
            let (fy, gy) = eval(&y);
            if fy <= fx + 1e-4 * slope {
                let gain = fx - fy;
                x = y;
                fx = fy;
                g = gy;
                accepted = true;
                if gain <= tolerance * (1.0 + fx.abs()) {
                    stalls += 1;
                } else {
                    stalls = 0;
                }
                break;
            }
            trial_step *= 0.5;
        }
        if !accepted || stalls >= 3 {
            break;
        }
        step = (trial_step * 2.0).min(1e6);
    }
    (x, fx)
}
