//! Strict `(p-1)`-copositivity: existence of a positive weight `mu` with
//!
//! ```text
//! f_mu(c) = sum_{i,j} beta_ij c_j^{p/2} c_i^{p/2-1} mu_i > 0   on C^n_+ \ {0}.
//! ```
//!
//! `f_mu` is linear in `mu` and homogeneous of degree `p-1` in `c`, so a weight
//! is searched by cutting planes: a finite adversarial set of simplex points
//! feeds a max-min linear program over `mu`, and a global minimization of
//! `f_mu` on the simplex either certifies the LP weight or returns new cuts.

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cone::{check_exponent, p_form_raw, ConeVector, SymMatrix};
use crate::copositivity::strict_copositivity_closed_form;
use crate::error::{check_dim, Error, Result};
use crate::numeric::{
    compensated_sum, cone_pow, project_to_simplex, resolution_within_budget, simplex_descent,
    simplex_grid_size, SimplexGrid,
};

/// Lower bound on LP weights; the definition needs strictly positive `mu`.
pub const MU_LOWER_BOUND: f64 = 1e-6;

pub const DEFAULT_RESOLUTION: u32 = 64;
pub const DEFAULT_MULTISTARTS: usize = 32;
pub const DEFAULT_GRID_BUDGET: u64 = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub resolution: u32,
    pub multistarts: usize,
    pub local_tolerance: f64,
    /// Largest number of barycentric grid points evaluated per scan. When the
    /// requested resolution exceeds it the resolution is lowered and the
    /// remainder of the budget is spent on seeded uniform samples.
    pub grid_budget: u64,
    /// Re-scan at four times the resolution before certifying.
    pub refine: bool,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            resolution: DEFAULT_RESOLUTION,
            multistarts: DEFAULT_MULTISTARTS,
            local_tolerance: 1e-14,
            grid_budget: DEFAULT_GRID_BUDGET,
            refine: true,
            seed: 0,
        }
    }
}

/// How a minimum estimate was obtained, recorded for audit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    pub grid_resolution: u32,
    pub multistart_count: usize,
    pub local_tolerance: f64,
    pub random_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuCertificate {
    /// Weight, normalized so that its largest component is one.
    pub mu: ConeVector,
    pub p: f64,
    /// Minimum over the simplex of `f_mu(c) / (mu . c)^{p-1}`.
    pub kappa: f64,
    /// Minimum of `f_mu` over the simplex.
    pub min_on_simplex: f64,
    /// Simplex point where `min_on_simplex` was attained.
    pub worst_point: ConeVector,
    pub verification: Verification,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuViolation {
    pub mu: ConeVector,
    /// Simplex point with `f_mu <= 0`.
    pub point: ConeVector,
    pub value: f64,
    /// Further distinct nonpositive local minima, most negative first.
    pub local_minima: Vec<ConeVector>,
    pub verification: Verification,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MuVerification {
    Certified(MuCertificate),
    Violated(MuViolation),
}

impl MuVerification {
    pub fn certificate(&self) -> Option<&MuCertificate> {
        match self {
            MuVerification::Certified(c) => Some(c),
            MuVerification::Violated(_) => None,
        }
    }
}

struct Scan {
    min_value: f64,
    min_point: Vec<f64>,
    kappa: f64,
    nonpositive_minima: Vec<(Vec<f64>, f64)>,
    verification: Verification,
}

/// Keeps the `cap` smallest values seen.
struct SmallestK {
    cap: usize,
    items: Vec<(f64, Vec<f64>)>,
}

impl SmallestK {
    fn new(cap: usize) -> Self {
        Self {
            cap,
            items: Vec::with_capacity(cap + 1),
        }
    }

    fn worst(&self) -> f64 {
        self.items.iter().map(|x| x.0).fold(f64::NEG_INFINITY, f64::max)
    }

    fn offer(&mut self, value: f64, point: impl FnOnce() -> Vec<f64>) {
        if self.cap == 0 {
            return;
        }
        if self.items.len() < self.cap {
            self.items.push((value, point()));
        } else if value < self.worst() {
            let idx = self
                .items
                .iter()
                .enumerate()
                .max_by(|a, b| a.1 .0.total_cmp(&b.1 .0))
                .map(|(i, _)| i)
                .unwrap();
            self.items[idx] = (value, point());
        }
    }
}

fn finite_gradient(g: Vec<f64>) -> Vec<f64> {
    g.into_iter()
        .map(|v| if v.is_nan() { 0.0 } else { v.clamp(-1e12, 1e12) })
        .collect()
}

fn eval_f(b: &SymMatrix, mu: &[f64], p: f64, c: &[f64]) -> (f64, Vec<f64>) {
    let (v, g) = p_form_raw(b, c, mu, p, true);
    (v, finite_gradient(g.expect("gradient requested")))
}

fn eval_ratio(b: &SymMatrix, mu: &[f64], p: f64, c: &[f64]) -> (f64, Vec<f64>) {
    let (f, g) = p_form_raw(b, c, mu, p, true);
    let g = finite_gradient(g.expect("gradient requested"));
    let s = compensated_sum(mu.iter().zip(c).map(|(m, x)| m * x));
    let denom = s.powf(p - 1.0);
    let ratio = f / denom;
    let grad = g
        .iter()
        .zip(mu)
        .map(|(gi, mi)| gi / denom - (p - 1.0) * ratio * mi / s)
        .collect();
    (ratio, grad)
}

fn distinct(points: &[(Vec<f64>, f64)], x: &[f64], tol: f64) -> bool {
    points
        .iter()
        .all(|(y, _)| y.iter().zip(x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) > tol)
}

/// Grid scan plus multistart projected-gradient refinement.
fn scan(b: &SymMatrix, mu: &[f64], p: f64, resolution: u32, opts: &VerifyOptions) -> Scan {
    let n = b.n();
    let q = 0.5 * p;
    let r = resolution_within_budget(n, resolution, opts.grid_budget);
    let grid_points = simplex_grid_size(n, r);
    let random_samples = if r < resolution {
        opts.grid_budget.saturating_sub(grid_points) as usize
    } else {
        0
    };
    let tq: Vec<f64> = (0..=r).map(|k| cone_pow(k as f64 / r as f64, q)).collect();
    let tq1: Vec<f64> = (0..=r).map(|k| cone_pow(k as f64 / r as f64, q - 1.0)).collect();

    let mut by_value = SmallestK::new(opts.multistarts);
    let mut by_ratio = SmallestK::new(8);
    let mut grid_min = f64::INFINITY;
    let mut grid_min_point = vec![0.0; n];
    let mut kappa = f64::INFINITY;
    let mut cq = vec![0.0; n];
    let mut cq1 = vec![0.0; n];

    let mut visit = |c_of: &dyn Fn() -> Vec<f64>, cq: &[f64], cq1: &[f64], s: f64| {
        let mut f = 0.0;
        for i in 0..n {
            if cq1[i] == 0.0 {
                continue;
            }
            let mut row = 0.0;
            for j in 0..n {
                row += b.get(i, j) * cq[j];
            }
            f += mu[i] * cq1[i] * row;
        }
        let ratio = f / s.powf(p - 1.0);
        if f < grid_min {
            grid_min = f;
            grid_min_point = c_of();
        }
        kappa = kappa.min(ratio);
        by_value.offer(f, c_of);
        by_ratio.offer(ratio, c_of);
    };

    let mut grid = SimplexGrid::new(n, r);
    while let Some(counts) = grid.current() {
        let mut s = 0.0;
        for i in 0..n {
            cq[i] = tq[counts[i] as usize];
            cq1[i] = tq1[counts[i] as usize];
            s += mu[i] * counts[i] as f64 / r as f64;
        }
        let point = || counts.iter().map(|&k| k as f64 / r as f64).collect::<Vec<f64>>();
        visit(&point, &cq, &cq1, s);
        grid.advance();
    }
    if random_samples > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut c = vec![0.0; n];
        for _ in 0..random_samples {
            let mut total = 0.0;
            for ci in c.iter_mut() {
                let u: f64 = rng.random::<f64>();
                *ci = -(1.0 - u).ln();
                total += *ci;
            }
            let mut s = 0.0;
            for i in 0..n {
                c[i] /= total;
                cq[i] = cone_pow(c[i], q);
                cq1[i] = cone_pow(c[i], q - 1.0);
                s += mu[i] * c[i];
            }
            let point = || c.clone();
            visit(&point, &cq, &cq1, s);
        }
    }

    // multistart descent on f_mu
    let mut starts: Vec<Vec<f64>> = by_value.items.iter().map(|x| x.1.clone()).collect();
    for i in 0..n {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        starts.push(v);
        for j in (i + 1)..n {
            let mut m = vec![0.0; n];
            m[i] = 0.5;
            m[j] = 0.5;
            starts.push(m);
        }
    }
    let multistart_count = starts.len();
    let mut min_value = f64::INFINITY;
    let mut min_point = grid_min_point.clone();
    let mut minima: Vec<(Vec<f64>, f64)> = Vec::new();
    for start in &starts {
        let (x, _) = simplex_descent(|c| eval_f(b, mu, p, c), start, opts.local_tolerance, 500);
        let fx = p_form_raw(b, &x, mu, p, false).0;
        if fx < min_value {
            min_value = fx;
            min_point = x.clone();
        }
        if fx <= 0.0 && distinct(&minima, &x, 1e-6) {
            minima.push((x, fx));
        }
    }
    // a grid point can still beat every descent result
    let grid_exact = p_form_raw(b, &grid_min_point, mu, p, false).0;
    if grid_exact < min_value {
        min_value = grid_exact;
        min_point = grid_min_point;
    }
    minima.sort_by(|a, b| a.1.total_cmp(&b.1));

    // kappa: minimize the degree-zero ratio from its best grid points
    let mut kappa_starts: Vec<Vec<f64>> = by_ratio.items.iter().map(|x| x.1.clone()).collect();
    kappa_starts.push(min_point.clone());
    for start in &kappa_starts {
        let (x, _) = simplex_descent(|c| eval_ratio(b, mu, p, c), start, opts.local_tolerance, 500);
        let s = compensated_sum(mu.iter().zip(&x).map(|(m, xi)| m * xi));
        let fx = p_form_raw(b, &x, mu, p, false).0;
        kappa = kappa.min(fx / s.powf(p - 1.0));
    }

    Scan {
        min_value,
        min_point,
        kappa,
        nonpositive_minima: minima,
        verification: Verification {
            grid_resolution: r,
            multistart_count,
            local_tolerance: opts.local_tolerance,
            random_samples,
        },
    }
}

fn check_mu(b: &SymMatrix, mu: &ConeVector) -> Result<()> {
    check_dim(b.n(), mu.len())?;
    if !mu.is_interior() {
        return Err(Error::Parameter(
            "mu must have strictly positive components (coordinate vectors force it)".into(),
        ));
    }
    Ok(())
}

/// Estimate the global minimum of `f_mu` on the simplex and either certify
/// `mu` or return a violating point.
pub fn verify_mu(b: &SymMatrix, mu: &ConeVector, p: f64, resolution: u32) -> Result<MuVerification> {
    verify_mu_with(
        b,
        mu,
        p,
        &VerifyOptions {
            resolution,
            ..VerifyOptions::default()
        },
    )
}

pub fn verify_mu_with(b: &SymMatrix, mu: &ConeVector, p: f64, opts: &VerifyOptions) -> Result<MuVerification> {
    check_exponent(p)?;
    check_mu(b, mu)?;
    if opts.resolution < 16 {
        return Err(Error::Parameter(format!("resolution {} < 16", opts.resolution)));
    }
    let mu = mu.max_normalized().expect("interior weight");
    let w = mu.as_slice();
    let mut result = scan(b, w, p, opts.resolution, opts);
    if result.min_value > 0.0 && opts.refine {
        let fine = scan(b, w, p, opts.resolution.saturating_mul(4), opts);
        result.kappa = result.kappa.min(fine.kappa);
        if fine.min_value < result.min_value {
            result.min_value = fine.min_value;
            result.min_point = fine.min_point;
        }
        result.nonpositive_minima.extend(fine.nonpositive_minima);
        result.verification = fine.verification;
    }
    if result.min_value > 0.0 && result.kappa > 0.0 {
        Ok(MuVerification::Certified(MuCertificate {
            mu,
            p,
            kappa: result.kappa,
            min_on_simplex: result.min_value,
            worst_point: ConeVector::new(result.min_point)?,
            verification: result.verification,
        }))
    } else {
        let mut others = Vec::new();
        for (x, _) in result.nonpositive_minima {
            if x.iter().zip(&result.min_point).any(|(a, b)| (a - b).abs() > 1e-6) {
                others.push(ConeVector::new(x)?);
            }
        }
        Ok(MuVerification::Violated(MuViolation {
            mu,
            point: ConeVector::new(result.min_point)?,
            value: result.min_value,
            local_minima: others,
            verification: result.verification,
        }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MuSearchBudget {
    pub max_iterations: usize,
    pub lp_margin_tol: f64,
    pub resolution: u32,
    pub seed: u64,
}

impl Default for MuSearchBudget {
    fn default() -> Self {
        Self {
            max_iterations: 50,
            lp_margin_tol: 1e-7,
            resolution: DEFAULT_RESOLUTION,
            seed: 0,
        }
    }
}

/// The finitely-cut linear program is already blocked: no weight in the box
/// reaches a margin above `lp_margin_tol` on the adversarial set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuSearchFailure {
    pub adversarial_set: Vec<ConeVector>,
    /// `min_{c in adversarial_set} f_mu(c)` at the final LP weight.
    pub best_margin: f64,
    pub iterations: usize,
    pub lp_mu: ConeVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuSearchInconclusive {
    pub adversarial_set: Vec<ConeVector>,
    pub last_margin: f64,
    pub iterations: usize,
    pub lp_mu: ConeVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MuSearchOutcome {
    Certified {
        certificate: MuCertificate,
        iterations: usize,
        adversarial_set: Vec<ConeVector>,
    },
    Failure(MuSearchFailure),
    Inconclusive(MuSearchInconclusive),
}

impl MuSearchOutcome {
    pub fn certificate(&self) -> Option<&MuCertificate> {
        match self {
            MuSearchOutcome::Certified { certificate, .. } => Some(certificate),
            _ => None,
        }
    }

    /// Weight returned by the last linear program (or the certified weight).
    pub fn last_mu(&self) -> &ConeVector {
        match self {
            MuSearchOutcome::Certified { certificate, .. } => &certificate.mu,
            MuSearchOutcome::Failure(f) => &f.lp_mu,
            MuSearchOutcome::Inconclusive(i) => &i.lp_mu,
        }
    }
}

/// Coefficients of `f_mu(c)` as a linear function of `mu`.
fn cut_row(b: &SymMatrix, c: &[f64], p: f64) -> Vec<f64> {
    let q = 0.5 * p;
    let cq: Vec<f64> = c.iter().map(|&x| cone_pow(x, q)).collect();
    let bcq = b.apply(&cq);
    c.iter().zip(bcq).map(|(&x, r)| cone_pow(x, q - 1.0) * r).collect()
}

/// max t  s.t.  rows . mu >= t,  MU_LOWER_BOUND <= mu <= 1,  max mu = 1.
///
/// The normalization `max mu = 1` is the union over `k` of `mu_k = 1`; each
/// piece is an ordinary LP.
fn max_min_weight(rows: &[Vec<f64>], n: usize) -> Result<(Vec<f64>, f64)> {
    let mut best: Option<(Vec<f64>, f64)> = None;
    for k in 0..n {
        let mut lp = Problem::new(OptimizationDirection::Maximize);
        let vars: Vec<_> = (0..n)
            .map(|i| {
                if i == k {
                    lp.add_var(0.0, (1.0, 1.0))
                } else {
                    lp.add_var(0.0, (MU_LOWER_BOUND, 1.0))
                }
            })
            .collect();
        let t = lp.add_var(1.0, (f64::NEG_INFINITY, f64::INFINITY));
        for row in rows {
            let mut terms: Vec<_> = vars.iter().zip(row).map(|(&v, &a)| (v, a)).collect();
            terms.push((t, -1.0));
            lp.add_constraint(terms.as_slice(), ComparisonOp::Ge, 0.0);
        }
        let outcome = lp
            .solve()
            .map_err(|e| Error::Internal(format!("weight LP failed: {e:?}")))?;
        let solution = outcome
            .into_solution()
            .map_err(|_| Error::Internal("weight LP interrupted".into()))?;
        let mu: Vec<f64> = vars
            .iter()
            .map(|&v| solution.var_value(v).clamp(MU_LOWER_BOUND, 1.0))
            .collect();
        let objective = solution.objective();
        if best.as_ref().is_none_or(|(_, t)| objective > *t) {
            best = Some((mu, objective));
        }
    }
    Ok(best.expect("n >= 1"))
}

/// Cutting-plane search for a weight certifying strict `(p-1)`-copositivity.
pub fn find_mu(b: &SymMatrix, p: f64, budget: &MuSearchBudget) -> Result<MuSearchOutcome> {
    check_exponent(p)?;
    let n = b.n();
    if n > crate::copositivity::MAX_DIMENSION {
        return Err(Error::Capacity(format!("weight search supports n <= 16, got {n}")));
    }
    let opts = VerifyOptions {
        resolution: budget.resolution,
        seed: budget.seed,
        ..VerifyOptions::default()
    };
    let mut adversarial: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut v = vec![0.0; n];
            v[i] = 1.0;
            v
        })
        .collect();
    if n > 1 {
        adversarial.push(vec![1.0 / n as f64; n]);
    }
    let mut rows: Vec<Vec<f64>> = adversarial.iter().map(|c| cut_row(b, c, p)).collect();
    let to_cone = |set: &[Vec<f64>]| -> Result<Vec<ConeVector>> {
        set.iter().map(|c| ConeVector::new(c.clone())).collect()
    };
    let mut last_mu = vec![1.0; n];
    let mut last_margin = f64::NAN;
    for iteration in 1..=budget.max_iterations {
        let (mu, _) = max_min_weight(&rows, n)?;
        let margin = adversarial
            .iter()
            .map(|c| p_form_raw(b, c, &mu, p, false).0)
            .fold(f64::INFINITY, f64::min);
        last_mu = mu.clone();
        last_margin = margin;
        if margin <= budget.lp_margin_tol {
            return Ok(MuSearchOutcome::Failure(MuSearchFailure {
                adversarial_set: to_cone(&adversarial)?,
                best_margin: margin,
                iterations: iteration,
                lp_mu: ConeVector::new(mu)?,
            }));
        }
        let mu_cone = ConeVector::new(mu)?;
        match verify_mu_with(b, &mu_cone, p, &opts)? {
            MuVerification::Certified(certificate) => {
                return Ok(MuSearchOutcome::Certified {
                    certificate,
                    iterations: iteration,
                    adversarial_set: to_cone(&adversarial)?,
                });
            }
            MuVerification::Violated(v) => {
                let mut fresh = 0;
                let candidates = std::iter::once(&v.point).chain(v.local_minima.iter().take(7));
                for c in candidates {
                    let c = project_to_simplex(c.as_slice());
                    let known: Vec<(Vec<f64>, f64)> =
                        adversarial.iter().map(|a| (a.clone(), 0.0)).collect();
                    if distinct(&known, &c, 1e-12) {
                        rows.push(cut_row(b, &c, p));
                        adversarial.push(c);
                        fresh += 1;
                    }
                }
                if fresh == 0 {
                    break;
                }
            }
        }
    }
    Ok(MuSearchOutcome::Inconclusive(MuSearchInconclusive {
        adversarial_set: to_cone(&adversarial)?,
        last_margin,
        iterations: budget.max_iterations,
        lp_mu: ConeVector::new(last_mu)?,
    }))
}

/// Weight `(beta_11^{-1/p}, beta_22^{-1/p})` for a strictly copositive `2 x 2` matrix.
pub fn constructive_mu_n2(b: &SymMatrix, p: f64) -> Result<ConeVector> {
    check_exponent(p)?;
    if b.n() != 2 {
        return Err(Error::Parameter(format!("constructive weight needs n = 2, got {}", b.n())));
    }
    if !strict_copositivity_closed_form(b)?.strictly_copositive {
        return Err(Error::Precondition("matrix is not strictly copositive".into()));
    }
    ConeVector::new(vec![b.get(0, 0).powf(-1.0 / p), b.get(1, 1).powf(-1.0 / p)])
}

/// `kappa_0 = min_i (beta_ii + sum_{j != i} min(beta_ij, 0))` when every
/// `beta_ii > 0` and `kappa_0 > 0`; then `mu = 1` gives
/// `f_1(c) >= kappa_0 sum c_i^{p-1}` on the cone.
pub fn sufficient_condition(b: &SymMatrix) -> Option<f64> {
    let neg = crate::cone::negative_part_row_sums(b);
    if b.diagonal().iter().any(|&d| d <= 0.0) {
        return None;
    }
    let kappa0 = (0..b.n())
        .map(|i| b.get(i, i) + neg[i])
        .fold(f64::INFINITY, f64::min);
    (kappa0 > 0.0).then_some(kappa0)
}

/// The `3 x 3` family with unit diagonal, `beta_12 = beta_13 = eps - 1`, `beta_23 = 1`.
pub fn b_epsilon(eps: f64) -> Result<SymMatrix> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::Parameter(format!("eps = {eps} must be > 0")));
    }
    Ok(b_epsilon_unchecked(eps))
}

/// The `eps -> 0` member of the family.
pub fn b_epsilon_limit() -> SymMatrix {
    b_epsilon_unchecked(0.0)
}

fn b_epsilon_unchecked(eps: f64) -> SymMatrix {
    let o = eps - 1.0;
    SymMatrix::new(3, vec![1.0, o, o, o, 1.0, 1.0, o, 1.0, 1.0]).expect("symmetric by construction")
}

/// Limiting cubic form of the family at `mu = (1, 1, 1)`:
/// `(c1^3 - c1 c2^2 - c1 c3^2) + (-c1^2 c2 + c2^3 + c2 c3^2) + (-c1^2 c3 + c2^2 c3 + c3^3)`.
pub fn b_epsilon_limit_form(c: &ConeVector) -> Result<f64> {
    if c.len() != 3 {
        return Err(Error::Parameter(format!("limit form is defined on C^3_+, got length {}", c.len())));
    }
    let (c1, c2, c3) = (c.as_slice()[0], c.as_slice()[1], c.as_slice()[2]);
    Ok(compensated_sum([
        c1 * c1 * c1,
        -c1 * c2 * c2,
        -c1 * c3 * c3,
        -c1 * c1 * c2,
        c2 * c2 * c2,
        c2 * c3 * c3,
        -c1 * c1 * c3,
        c2 * c2 * c3,
        c3 * c3 * c3,
    ]))
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
    fn verify_identity() {
        let v = verify_mu(&SymMatrix::identity(2), &ConeVector::ones(2), 4.0, 64).unwrap();
        let cert = v.certificate().expect("identity is certified");
        assert!((cert.min_on_simplex - 0.25).abs() < 1e-12);
        assert!((cert.worst_point.as_slice()[0] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn verify_limit_matrix_finds_violation() {
        let v = verify_mu(&b_epsilon_limit(), &ConeVector::ones(3), 4.0, 64).unwrap();
        let MuVerification::Violated(viol) = v else {
            panic!("limit matrix must not be certified at mu = 1");
        };
        // (3, 2, 2) / 7 gives -1/343; the true simplex minimum is at least that low
        assert!(viol.value <= -1.0 / 343.0 + 1e-15);
        let at = b_epsilon_limit_form(&viol.point).unwrap();
        assert!((at - viol.value).abs() < 1e-15);
    }

    #[test]
    fn verify_sufficient_condition_bound() {
        let b = m(&[&[1.0, -0.4, -0.4], &[-0.4, 1.0, 0.5], &[-0.4, 0.5, 1.0]]);
        let v = verify_mu(&b, &ConeVector::ones(3), 4.0, 64).unwrap();
        let cert = v.certificate().unwrap();
        assert!(cert.min_on_simplex >= 0.2 / 9.0 - 1e-12);
    }

    #[test]
    fn verify_rejects_zero_weight() {
        let err = verify_mu(&SymMatrix::identity(2), &cv(&[1.0, 0.0]), 4.0, 64).unwrap_err();
        assert!(matches!(err, Error::Parameter(_)));
        let err = verify_mu(&SymMatrix::identity(2), &ConeVector::ones(2), 4.0, 8).unwrap_err();
        assert!(matches!(err, Error::Parameter(_)));
    }

    #[test]
    fn find_mu_identity() {
        let out = find_mu(&SymMatrix::identity(3), 4.0, &MuSearchBudget::default()).unwrap();
        let cert = out.certificate().expect("certified");
        assert_eq!(cert.mu.as_slice(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn find_mu_two_by_two() {
        let b = m(&[&[1.0, -1.9], &[-1.9, 4.0]]);
        let out = find_mu(&b, 4.0, &MuSearchBudget::default()).unwrap();
        assert!(out.certificate().is_some(), "{out:?}");
    }

    #[test]
    fn constructive_examples() {
        let mu = constructive_mu_n2(&m(&[&[4.0, -1.0], &[-1.0, 9.0]]), 4.0).unwrap();
        assert!((mu.as_slice()[0] - 0.707_106_781_186_547_5).abs() < 1e-12);
        assert!((mu.as_slice()[1] - 0.577_350_269_189_625_8).abs() < 1e-12);
        for p in [2.5, 3.0, 4.0, 6.0] {
            assert_eq!(constructive_mu_n2(&SymMatrix::identity(2), p).unwrap().as_slice(), &[1.0, 1.0]);
        }
        let mu = constructive_mu_n2(&m(&[&[1.0, -1.9], &[-1.9, 4.0]]), 3.0).unwrap();
        assert_eq!(mu.as_slice()[0], 1.0);
        assert!((mu.as_slice()[1] - 0.629_960_524_947_436_6).abs() < 1e-12);
        assert!(matches!(
            constructive_mu_n2(&m(&[&[1.0, -1.0], &[-1.0, 1.0]]), 4.0),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn sufficient_condition_examples() {
        let b = m(&[&[1.0, -0.4, -0.4], &[-0.4, 1.0, 0.5], &[-0.4, 0.5, 1.0]]);
        assert!((sufficient_condition(&b).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(sufficient_condition(&m(&[&[1.0, -1.0], &[-1.0, 1.0]])), None);
        assert_eq!(sufficient_condition(&SymMatrix::identity(5)), Some(1.0));
    }

    #[test]
    fn b_epsilon_examples() {
        assert_eq!(
            b_epsilon(0.1).unwrap().rows(),
            vec![vec![1.0, -0.9, -0.9], vec![-0.9, 1.0, 1.0], vec![-0.9, 1.0, 1.0]]
        );
        assert_eq!(
            b_epsilon(1.0).unwrap().rows(),
            vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 1.0], vec![0.0, 1.0, 1.0]]
        );
        let d = strict_copositivity_closed_form(&b_epsilon(0.25).unwrap()).unwrap();
        assert!((d.diagnostic.unwrap() - 1.0).abs() < 1e-12);
        assert!(b_epsilon(0.0).is_err());
        assert!(b_epsilon(-0.5).is_err());
    }

    #[test]
    fn limit_form_examples() {
        assert_eq!(b_epsilon_limit_form(&cv(&[3.0, 2.0, 2.0])).unwrap(), -1.0);
        assert_eq!(b_epsilon_limit_form(&cv(&[1.0, 0.0, 0.0])).unwrap(), 1.0);
        assert_eq!(b_epsilon_limit_form(&cv(&[0.0, 1.0, 1.0])).unwrap(), 4.0);
        assert!(b_epsilon_limit_form(&cv(&[1.0, 1.0])).is_err());
    }
}
