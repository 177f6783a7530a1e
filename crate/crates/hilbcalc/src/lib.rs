//! Exact symbolic calculator for the cohomology rings of Hilbert schemes of
//! points `X^[n]` on a smooth projective surface `X`.
//!
//! The cohomology of the disjoint union of all `X^[n]` carries an action of a
//! Heisenberg super-algebra: for every integer `n != 0` and cohomology class
//! `c` on `X` there is an operator `a_n(c)` (creation for `n < 0`,
//! annihilation for `n > 0`), and products of creation operators applied to
//! the vacuum span everything. This crate implements that operator calculus
//! with exact rational arithmetic over a user-supplied finite model of
//! `H*(X)` and builds on it:
//!
//! - cup products and intersection numbers on `X^[n]`,
//! - Chern-character operators and their commutators with creation operators,
//! - conversion between the creation-monomial basis and the
//!   characteristic-class generator basis,
//! - `n`-independent structure constants of the stable ("Hilbert") ring.
//!
//! Everything is exact: coefficients are arbitrary-precision rationals and
//! all identities checked by the verification suites hold with zero
//! tolerance.
//!
//! Entry points: [`surface::SurfaceModel`] (the base-surface data),
//! [`engine::Engine`] (all computations, with memoization), and the binary
//! `hilbcalc` for command-line use.

pub mod cache;
pub mod cup;
pub mod engine;
pub mod fock;
pub mod hilbert;
pub mod linalg;
pub mod ops;
pub mod rational;
pub mod surface;
pub mod verify;

pub use engine::Engine;
pub use surface::SurfaceModel;
