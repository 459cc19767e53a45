//! Exact-arithmetic computation of Euler characteristics of Kronecker
//! quiver moduli spaces via torus localization.
//!
//! The library enumerates tree-shaped localization data of the universal
//! abelian covering quiver (the brute-force census), implements the glueing
//! construction on bipartite quivers together with its knot/count
//! recursions, and evaluates the closed-form and asymptotic results for
//! the Kronecker families `(d, d+1)`, `(3, 4)` and `(n, n)`.
//!
//! All stability and counting logic is exact: big integers, exact
//! rationals, cross-multiplied slope comparisons. Floating point only
//! appears in the logarithmic/asymptotic layer.

pub mod covering;
pub mod error;
pub mod formulas;
pub mod glueing;
pub mod quiver;
pub mod series;

pub use error::Error;
pub use quiver::{BipartiteQuiver, DimensionVector, KroneckerPair, RootClass, SlopeSpec};
