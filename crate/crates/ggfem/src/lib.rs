//! Finite elements for the three-dimensional gradgrad complex.
//!
//! The library builds, on tetrahedral meshes, the conforming discrete complex
//!
//! ```text
//! P1  ⊂  U_h  --gradgrad-->  Σ_h  --curl-->  V_h  --div-->  Q_h  -->  0
//! ```
//!
//! where Σ_h is H(curl)-conforming with symmetric matrix values, V_h is
//! H(div)-conforming with traceless matrix values, and U_h is an H²-conforming
//! scalar element of degree k+2.  Every structural claim about these spaces
//! (bubble-space characterizations, unisolvence of the degrees of freedom,
//! exactness of the assembled complex, dimension counts) is checked in exact
//! rational arithmetic.  On top of the complex sits a mixed Crank-Nicolson
//! solver for the linearized Einstein-Bianchi system.
//!
//! Organization:
//! * [`num`], [`poly`], [`tensor`], [`geom`], [`calculus`], [`integrate`]:
//!   exact barycentric polynomial layer.
//! * [`linalg`]: exact rational/finite-field elimination with certified ranks.
//! * [`mesh`]: tetrahedral meshes, canonical entity frames, file format.
//! * [`local_spaces`]: local polynomial subspaces and the theorems about them.
//! * [`dof`]: degrees of freedom, unisolvence, dual bases.
//! * [`global_space`]: assembled global spaces, conformity, interpolation.
//! * [`complex`]: the discrete complex, exactness and surjectivity checks.
//! * [`fla`]: dense float kernels (LU, Cholesky, SVD, eigenvalues, Lanczos).
//! * [`solver`]: the Einstein-Bianchi mixed system.
//! * [`report`]: JSON report emission.

// Index loops over coordinate axes and tensor slots routinely address
// several arrays with one index; iterator rewrites obscure that.
#![allow(clippy::needless_range_loop)]

pub mod calculus;
pub mod complex;
pub mod dof;
pub mod fla;
pub mod geom;
pub mod global_space;
pub mod integrate;
pub mod linalg;
pub mod local_spaces;
pub mod mesh;
pub mod num;
pub mod poly;
pub mod report;
pub mod solver;
pub mod tensor;

pub use num::Rat;

/// Errors reported by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("degenerate tetrahedron: {0}")]
    DegenerateTet(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("polynomial degree {got} exceeds cap {cap}")]
    DegreeCap { got: usize, cap: usize },
    #[error("mesh error: {0}")]
    Mesh(String),
    #[error("mesh file parse error at line {line}: {msg}")]
    MeshParse { line: usize, msg: String },
    #[error("linear algebra error: {0}")]
    LinAlg(String),
    #[error("unisolvence failure: {0}")]
    Unisolvence(String),
    #[error("verification failure: {0}")]
    Verification(String),
    #[error("solver error: {0}")]
    Solver(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Highest polynomial degree the exact layer accepts for space construction.
pub const DEGREE_CAP: usize = 16;
/// Highest total degree accepted by the exact integration rules.
pub const INTEGRATION_DEGREE_CAP: usize = 20;
