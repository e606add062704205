//! Existence / nonexistence verdicts for nonnegative entire solutions of
//!
//! ```text
//! -Δu_i = Σ_j β_ij u_j^{p/2} u_i^{p/2-1}   on R^N,  i = 1..n.
//! ```

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::cone::{check_exponent, principal_submatrix, ConeVector, SymMatrix};
use crate::copositivity::{classify_copositivity, CopositivityKind, Tolerance};
use crate::error::{Error, Result};
use crate::numeric::cone_pow;
use crate::p_copositivity::{
    constructive_mu_n2, find_mu, sufficient_condition, verify_mu, MuCertificate, MuSearchBudget,
    MuSearchOutcome, MuVerification, DEFAULT_RESOLUTION,
};

/// Relative tolerance for threshold comparisons on non-rational exponents.
pub const THRESHOLD_TOLERANCE: f64 = 1e-12;

/// Nonlinearity exponent, kept exact when given as a rational.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Exponent {
    Rational { num: i64, den: i64 },
    Real { value: f64 },
}

impl Exponent {
    pub const CUBIC: Exponent = Exponent::Rational { num: 4, den: 1 };

    pub fn rational(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::Parameter("exponent denominator is zero".into()));
        }
        let g = gcd(num.unsigned_abs(), den.unsigned_abs()) as i64;
        let s = if den < 0 { -1 } else { 1 };
        Ok(Exponent::Rational {
            num: s * num / g,
            den: s * den / g,
        })
    }

    pub fn real(value: f64) -> Self {
        Exponent::Real { value }
    }

    pub fn value(&self) -> f64 {
        match *self {
            Exponent::Rational { num, den } => num as f64 / den as f64,
            Exponent::Real { value } => value,
        }
    }

    pub fn is_cubic(&self) -> bool {
        match *self {
            Exponent::Rational { num, den } => num == 4 && den == 1,
            Exponent::Real { value } => value == 4.0,
        }
    }

    /// Sign of `self - a/b` for `b > 0`.
    fn cmp_ratio(&self, a: i64, b: i64) -> std::cmp::Ordering {
        match *self {
            Exponent::Rational { num, den } => (num as i128 * b as i128).cmp(&(a as i128 * den as i128)),
            Exponent::Real { value } => {
                let t = a as f64 / b as f64;
                if (value - t).abs() <= THRESHOLD_TOLERANCE * t.abs().max(1.0) {
                    std::cmp::Ordering::Equal
                } else {
                    value.total_cmp(&t)
                }
            }
        }
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

impl From<f64> for Exponent {
    fn from(value: f64) -> Self {
        Exponent::Real { value }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Exponent::Rational { num, den: 1 } => write!(f, "{num}"),
            Exponent::Rational { num, den } => write!(f, "{num}/{den}"),
            Exponent::Real { value } => write!(f, "{value}"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    /// Accepts `a/b`, terminating decimals (kept exact) and any other float.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parameter(format!("cannot parse exponent {s:?}"));
        if let Some((a, b)) = s.split_once('/') {
            let a: i64 = a.trim().parse().map_err(|_| bad())?;
            let b: i64 = b.trim().parse().map_err(|_| bad())?;
            return Exponent::rational(a, b);
        }
        if let Ok(k) = s.parse::<i64>() {
            return Exponent::rational(k, 1);
        }
        if let Some((int, frac)) = s.split_once('.') {
            let digits_ok = !frac.is_empty() && frac.len() <= 12 && frac.bytes().all(|c| c.is_ascii_digit());
            if digits_ok {
                if let (Ok(i), Ok(fr)) = (int.parse::<i64>(), frac.parse::<i64>()) {
                    let den = 10i64.pow(frac.len() as u32);
                    let sign = if int.starts_with('-') { -1 } else { 1 };
                    return Exponent::rational(i * den + sign * fr, den);
                }
            }
        }
        let v: f64 = s.parse().map_err(|_| bad())?;
        if !v.is_finite() {
            return Err(bad());
        }
        Ok(Exponent::Real { value: v })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    /// Space dimension `N`.
    pub dim: u32,
    pub p: Exponent,
}

impl ProblemParams {
    /// Requires `p > 2` and, for `N >= 3`, `p < 2N/(N-2)`.
    pub fn new(dim: u32, p: Exponent) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Parameter("space dimension must be >= 1".into()));
        }
        check_exponent(p.value())?;
        if p.cmp_ratio(2, 1) != std::cmp::Ordering::Greater {
            return Err(Error::Parameter(format!("p = {p} must be > 2")));
        }
        if dim >= 3 {
            let n = dim as i64;
            if p.cmp_ratio(2 * n, n - 2) != std::cmp::Ordering::Less {
                return Err(Error::Parameter(format!(
                    "p = {p} is not subcritical for N = {dim} (needs p < {}/{})",
                    2 * n,
                    n - 2
                )));
            }
        }
        Ok(Self { dim, p })
    }

    pub fn cubic(dim: u32) -> Result<Self> {
        Self::new(dim, Exponent::CUBIC)
    }

    /// `N <= 2`, or `p <= (2N-2)/(N-2)`: the range where a weight certificate
    /// rules out nontrivial entire solutions.
    pub fn in_weight_range(&self) -> bool {
        if self.dim <= 2 {
            return true;
        }
        let n = self.dim as i64;
        self.p.cmp_ratio(2 * n - 2, n - 2) != std::cmp::Ordering::Greater
    }

    /// `N <= 2` and `p <= 4`.
    pub fn in_low_dimension_range(&self) -> bool {
        self.dim <= 2 && self.p.cmp_ratio(4, 1) != std::cmp::Ordering::Greater
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolvabilityKind {
    ExistsNontrivial,
    NoNontrivial,
    Unknown,
}

/// Which argument decided the verdict. Serialized with stable tags; the
/// `Cubic` variants are used for `p = 4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Reason {
    #[serde(rename = "ConstantSolution")]
    ConstantSolution,
    #[serde(rename = "ZeroDiagonal")]
    ZeroDiagonal,
    #[serde(rename = "Thm1.1")]
    NotStrictlyCopositiveCubic,
    #[serde(rename = "Thm4.1")]
    NotStrictlyCopositive,
    #[serde(rename = "Thm1.6")]
    LowDimensionCubic,
    #[serde(rename = "Thm4.6")]
    LowDimension,
    #[serde(rename = "Cor1.3")]
    TwoComponentCubic,
    #[serde(rename = "Cor4.5")]
    TwoComponent,
    #[serde(rename = "Prop1.7")]
    DominantDiagonalCubic,
    #[serde(rename = "Prop4.7")]
    DominantDiagonal,
    #[serde(rename = "Prop1.2")]
    WeightCertificateCubic,
    #[serde(rename = "Prop4.3")]
    WeightCertificate,
    #[serde(rename = "OpenGap")]
    OpenGap,
}

impl Reason {
    pub fn tag(&self) -> &'static str {
        match self {
            Reason::ConstantSolution => "ConstantSolution",
            Reason::ZeroDiagonal => "ZeroDiagonal",
            Reason::NotStrictlyCopositiveCubic => "Thm1.1",
            Reason::NotStrictlyCopositive => "Thm4.1",
            Reason::LowDimensionCubic => "Thm1.6",
            Reason::LowDimension => "Thm4.6",
            Reason::TwoComponentCubic => "Cor1.3",
            Reason::TwoComponent => "Cor4.5",
            Reason::DominantDiagonalCubic => "Prop1.7",
            Reason::DominantDiagonal => "Prop4.7",
            Reason::WeightCertificateCubic => "Prop1.2",
            Reason::WeightCertificate => "Prop4.3",
            Reason::OpenGap => "OpenGap",
        }
    }

    fn pick(cubic: bool, a: Reason, b: Reason) -> Reason {
        if cubic {
            a
        } else {
            b
        }
    }
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantSolution {
    /// Constant field `u_i = c_i^{2/p}`.
    pub u: ConeVector,
    /// Kernel vector of the support submatrix, max-normalized.
    pub kernel: ConeVector,
    pub support: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SolvabilityCertificate {
    ConstantSolution(ConstantSolution),
    /// Simplex point with `b(c) <= tol`.
    CopositivityWitness { point: ConeVector, min_value: f64 },
    /// Simplex minimizer of `b`, with positive minimum.
    StrictCopositivity { point: ConeVector, min_value: f64 },
    ConstructiveWeight { certificate: MuCertificate },
    DominantDiagonal { kappa0: f64 },
    Weight { certificate: MuCertificate },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolvabilityVerdict {
    pub kind: SolvabilityKind,
    pub reason: Reason,
    pub certificate: Option<SolvabilityCertificate>,
    /// The copositivity minimum lay inside the tolerance dead-band.
    pub boundary: bool,
    pub note: Option<String>,
    /// Weight search attached for audit when it was run.
    pub search: Option<MuSearchOutcome>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolvabilityBudget {
    pub search: MuSearchBudget,
    pub tolerance: Tolerance,
}

impl Default for SolvabilityBudget {
    fn default() -> Self {
        Self {
            search: MuSearchBudget::default(),
            tolerance: Tolerance::DEFAULT,
        }
    }
}

fn kernel_scale(b: &SymMatrix) -> f64 {
    b.entries().iter().fold(1.0f64, |m, v| m.max(v.abs()))
}

/// Replace components lying within 1e-10 of a fraction with denominator at
/// most 64 by that fraction.
fn snap_small_rationals(c: &[f64]) -> Vec<f64> {
    c.iter()
        .map(|&x| {
            for den in 1..=64u32 {
                let k = (x * den as f64).round();
                let r = k / den as f64;
                if (x - r).abs() < 1e-10 {
                    return r;
                }
            }
            x
        })
        .collect()
}

fn residual_inf(b: &SymMatrix, c: &[f64]) -> f64 {
    b.apply(c).iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Positive kernel vector of a support submatrix, if its kernel is spanned by one.
fn positive_kernel(bs: &SymMatrix) -> Option<Vec<f64>> {
    let k = bs.n();
    let scale = kernel_scale(bs);
    let tol = 1e-12 * scale * k as f64;
    if k == 1 {
        return (bs.get(0, 0).abs() <= tol).then(|| vec![1.0]);
    }
    let m = DMatrix::from_row_slice(k, k, bs.entries());
    let eig = SymmetricEigen::new(m);
    let null: Vec<usize> = (0..k).filter(|&i| eig.eigenvalues[i].abs() <= tol).collect();
    if null.len() != 1 {
        return None;
    }
    let v = eig.eigenvectors.column(null[0]);
    let sign = if v.sum() < 0.0 { -1.0 } else { 1.0 };
    let v: Vec<f64> = v.iter().map(|x| sign * x).collect();
    let vmax = v.iter().cloned().fold(0.0, f64::max);
    if v.iter().any(|&x| x <= 1e-9 * vmax) {
        return None;
    }
    let c: Vec<f64> = v.iter().map(|x| x / vmax).collect();
    let snapped = snap_small_rationals(&c);
    let best = if residual_inf(bs, &snapped) <= residual_inf(bs, &c) { snapped } else { c };
    (residual_inf(bs, &best) <= 1e-10 * scale).then_some(best)
}

/// Search all supports, smallest first, for a positive kernel vector; the
/// corresponding constant field solves the system exactly.
pub fn constant_solution(b: &SymMatrix, p: f64) -> Result<Option<ConstantSolution>> {
    check_exponent(p)?;
    let n = b.n();
    if n > crate::copositivity::MAX_DIMENSION {
        return Err(Error::Capacity(format!("support enumeration supports n <= 16, got {n}")));
    }
    let mut masks: Vec<u32> = (1..(1u32 << n)).collect();
    masks.sort_by_key(|m| (m.count_ones(), m.reverse_bits()));
    for mask in masks {
        let support: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let bs = principal_submatrix(b, &support)?;
        if let Some(cs) = positive_kernel(&bs) {
            let mut c = vec![0.0; n];
            for (k, &i) in support.iter().enumerate() {
                c[i] = cs[k];
            }
            let u: Vec<f64> = c.iter().map(|&x| cone_pow(x, 2.0 / p)).collect();
            return Ok(Some(ConstantSolution {
                u: ConeVector::new(u)?,
                kernel: ConeVector::new(c)?,
                support,
            }));
        }
    }
    Ok(None)
}

/// `max_i |Σ_j β_ij u_j^{p/2} u_i^{p/2-1}|`: zero exactly when the constant
/// field `u` solves the system.
pub fn constant_residual(b: &SymMatrix, u: &ConeVector, p: f64) -> Result<f64> {
    crate::error::check_dim(b.n(), u.len())?;
    let q = 0.5 * p;
    let uq: Vec<f64> = u.as_slice().iter().map(|&x| cone_pow(x, q)).collect();
    let buq = b.apply(&uq);
    Ok(u.as_slice()
        .iter()
        .zip(buq)
        .map(|(&x, r)| (cone_pow(x, q - 1.0) * r).abs())
        .fold(0.0, f64::max))
}

const OPEN_GAP_NOTE: &str = "strict copositivity holds but no weight certificate was found in budget; \
for N = 3 and n >= 3 strict copositivity is conjectured to be sufficient for nonexistence, which remains open";

pub fn classify_solvability(
    b: &SymMatrix,
    params: &ProblemParams,
    budget: &SolvabilityBudget,
) -> Result<SolvabilityVerdict> {
    let p = params.p.value();
    if let Some(i) = b.diagonal().iter().position(|&d| d < 0.0) {
        return Err(Error::Precondition(format!(
            "diagonal entry beta_{0}{0} = {1} is negative",
            i + 1,
            b.get(i, i)
        )));
    }
    let cubic = params.p.is_cubic();
    let verdict = |kind, reason, certificate| SolvabilityVerdict {
        kind,
        reason,
        certificate,
        boundary: false,
        note: None,
        search: None,
    };

    // (1) constant solutions
    if let Some(sol) = constant_solution(b, p)? {
        let reason = if sol.support.len() == 1 {
            Reason::ZeroDiagonal
        } else {
            Reason::ConstantSolution
        };
        return Ok(verdict(
            SolvabilityKind::ExistsNontrivial,
            reason,
            Some(SolvabilityCertificate::ConstantSolution(sol)),
        ));
    }

    // (2) not strictly copositive
    let cop = classify_copositivity(b, budget.tolerance)?;
    if cop.kind != CopositivityKind::StrictlyCopositive {
        let mut v = verdict(
            SolvabilityKind::ExistsNontrivial,
            Reason::pick(cubic, Reason::NotStrictlyCopositiveCubic, Reason::NotStrictlyCopositive),
            Some(SolvabilityCertificate::CopositivityWitness {
                point: cop.witness.clone(),
                min_value: cop.min_value,
            }),
        );
        v.boundary = cop.kind == CopositivityKind::CopositiveNotStrict;
        return Ok(v);
    }

    // (3) low space dimension
    if params.in_low_dimension_range() {
        return Ok(verdict(
            SolvabilityKind::NoNontrivial,
            Reason::pick(cubic, Reason::LowDimensionCubic, Reason::LowDimension),
            Some(SolvabilityCertificate::StrictCopositivity {
                point: cop.witness,
                min_value: cop.min_value,
            }),
        ));
    }

    if !params.in_weight_range() {
        let mut v = verdict(SolvabilityKind::Unknown, Reason::OpenGap, None);
        v.note = Some(format!(
            "p = {} exceeds (2N-2)/(N-2) for N = {}; weight certificates do not apply",
            params.p, params.dim
        ));
        return Ok(v);
    }

    // (4) two components: explicit weight
    if b.n() == 2 {
        let mu = constructive_mu_n2(b, p)?;
        match verify_mu(b, &mu, p, DEFAULT_RESOLUTION)? {
            MuVerification::Certified(certificate) => {
                return Ok(verdict(
                    SolvabilityKind::NoNontrivial,
                    Reason::pick(cubic, Reason::TwoComponentCubic, Reason::TwoComponent),
                    Some(SolvabilityCertificate::ConstructiveWeight { certificate }),
                ));
            }
            MuVerification::Violated(v) => {
                return Err(Error::Internal(format!(
                    "explicit two-component weight failed verification at {:?} (value {:e})",
                    v.point.as_slice(),
                    v.value
                )));
            }
        }
    }

    // (5) diagonal dominance of the negative part
    if let Some(kappa0) = sufficient_condition(b) {
        return Ok(verdict(
            SolvabilityKind::NoNontrivial,
            Reason::pick(cubic, Reason::DominantDiagonalCubic, Reason::DominantDiagonal),
            Some(SolvabilityCertificate::DominantDiagonal { kappa0 }),
        ));
    }

    // (6) weight search
    let search = find_mu(b, p, &budget.search)?;
    if let Some(certificate) = search.certificate() {
        let certificate = certificate.clone();
        let mut v = verdict(
            SolvabilityKind::NoNontrivial,
            Reason::pick(cubic, Reason::WeightCertificateCubic, Reason::WeightCertificate),
            Some(SolvabilityCertificate::Weight { certificate }),
        );
        v.search = Some(search);
        return Ok(v);
    }

    // (7)
    let mut v = verdict(SolvabilityKind::Unknown, Reason::OpenGap, None);
    v.note = Some(OPEN_GAP_NOTE.into());
    v.search = Some(search);
    Ok(v)
}
