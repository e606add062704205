//! Copositivity and strict `(p-1)`-copositivity of symmetric coupling matrices,
//! with the solvability classification of the associated Liouville-type system
//! on the cone and numerical Neumann solutions on the square.

pub mod cone;
pub mod copositivity;
pub mod error;
pub mod neumann;
pub mod numeric;
pub mod p_copositivity;
pub mod solvability;

pub use cone::{p_form, principal_submatrix, quadratic_form, ConeVector, FormValue, SymMatrix};
pub use copositivity::{
    boundary_positive, check_psd, classify_copositivity, simplex_min_quadratic,
    strict_copositivity_closed_form, CopositivityKind, CopositivityVerdict, PsdClass, Tolerance,
};
pub use error::{Error, NotApplicable, Result};
pub use p_copositivity::{
    b_epsilon_limit_form, b_epsilon, b_epsilon_limit, constructive_mu_n2, find_mu, sufficient_condition,
    verify_mu, MuCertificate, MuSearchBudget, MuSearchOutcome, MuVerification,
};
pub use solvability::{
    classify_solvability, constant_solution, Exponent, ProblemParams, Reason, SolvabilityBudget,
    SolvabilityKind, SolvabilityVerdict,
};
