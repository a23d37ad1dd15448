//! Exact p-adic / word-combinatorial laboratory.
//!
//! The crate is organised around a small exact-arithmetic kernel and the
//! machinery built on top of it:
//!
//! * [`padic`] — truncated-precision elements of `Q_p`, the p-adic logarithm
//!   and Hensel square roots; all absolute values are exact powers of `p`.
//! * [`quad`] — quadratic extensions `Q_p(√Δ)` with half-integer valuations.
//! * [`proj`] — the projective line `P¹(Q_p)`, its ultrametric, matrix
//!   actions and empirical badly-approximable estimates.
//! * [`matrices`] — the continued-fraction matrix semigroup `A_w`, exact
//!   eigendata over `Q_p` or a quadratic extension, `κ(A)` and `ε₃`.
//! * [`words`] — lazy infinite words (periodic, morphic, Sturmian,
//!   concatenation schemes), factors and complexity.
//! * [`dynamics`] — prefix-matrix sets `U_k`/`V_k` mod `p^k`, derived words
//!   and bipartite factor graphs `G_n`.
//! * [`checkers`] — executable hypothesis checks and exact ε-bound
//!   computations for the main exclusion theorems.
//! * [`experiments`] — experiment specs, deterministic JSON/CSV output and
//!   the CLI surface.
//!
//! Everything on acceptance paths is exact: integers are arbitrary
//! precision, absolute values are rational exponents of `p`, and verdict
//! inequalities are evaluated with zero tolerance.

pub mod checkers;
pub mod dynamics;
pub mod experiments;
pub mod magnitude;
pub mod matrices;
pub mod padic;
pub mod proj;
pub mod quad;
pub mod realquad;
pub mod words;

pub use magnitude::Magnitude;
pub use padic::{ExtVal, PAdic, PadicError};
pub use quad::QuadExt;
