//! Exact Lie point symmetries of holomorphic, completely overdetermined,
//! involutive second-order PDE systems `u^k_{ij} = F^k_{ij}(x, u, u_x)`.
//!
//! The crate covers the whole pipeline: an exact arithmetic kernel over the
//! Gaussian rationals, jet-space total derivatives, prolongation of point
//! vector fields, generation and layered solution of the determining
//! equations, Lie-algebra bookkeeping, and the Segre-family systems of real
//! hypersurfaces together with the automorphism algebras of hyperquadrics.

pub mod algebra;
pub mod determining;
pub mod error;
pub mod expr;
pub mod jet;
pub mod linalg;
pub mod poly;
pub mod prolong;
pub mod scalar;
pub mod segre;
pub mod series;
pub mod vars;

pub use error::{Error, Result};
pub use poly::{Monomial, Poly};
pub use scalar::GaussScalar;
pub use vars::{Var, VarTable};
