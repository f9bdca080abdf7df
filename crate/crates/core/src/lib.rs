//! Archetypal analysis and the geometry of its approximation quality.
//!
//! Data are stored column-per-point (`m x n`). Archetypal analysis finds
//! column-stochastic `B` (`n x k`) and `A` (`k x n`) minimizing
//! `||X - X B A||^2`; the archetypes `Z = X B` are convex combinations of data
//! and every point is approximated as a convex combination of archetypes.
//!
//! Besides the solver this crate carries exact planar hulls, the SiVM greedy
//! selection heuristic, and constructions of stochastic low-rank
//! approximations of the identity whose errors have closed forms.

pub mod aa;
pub mod cls;
pub mod error;
pub mod hull2d;
pub mod identity;
pub mod io;
pub mod simplex;
pub mod sivm;
pub mod synthetic;
pub mod types;

pub use aa::{fit_aa, fit_aa_on_vertices, transform, AAConfig, Init};
pub use cls::{solve_simplex_ls, solve_simplex_ls_batch, SolverConfig};
pub use error::{Error, Result};
pub use hull2d::{convex_hull_2d, extremality_test, HullResult};
pub use identity::{certify, ConstructionKind, IdentityApproxCertificate, Partition};
pub use sivm::{select_sivm, sivm_factorization, SelectionResult};
pub use types::{frobenius_sq, normalize_column, residual_sq, DataMatrix, Factorization, StochasticMatrix, StochasticVector};
