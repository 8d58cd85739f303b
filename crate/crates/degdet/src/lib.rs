//! Exact computation of the degree of the Dieudonné determinant of linear
//! symbolic matrices `A = A_0 + A_1 x_1 + ... + A_m x_m` over `K[t]`.
//!
//! The crate provides:
//!
//! - exact scalar and univariate arithmetic over `GF(p)` and the rationals
//!   ([`field`], [`poly`]);
//! - dense exact linear algebra over `K` and `K(t)`, including Smith-McMillan
//!   diagonalization and Bruhat `L D P U` factorization ([`matrix`]);
//! - the symbolic pencil model with steepest-descent moves and a randomized
//!   commutative degree oracle ([`pencil`]);
//! - maximum vanishing subspace problem (MVSP) solvers: exhaustive, bipartite,
//!   rank-one via matroid intersection, and layered mixed ([`mvsp`],
//!   [`matroid`]);
//! - steepest descent for L-convex functions on the integer lattice
//!   ([`lconvex`]);
//! - the degree-of-determinant solvers: steepest descent (plain and
//!   long-step) and combinatorial relaxation, with certificates ([`solver`]);
//! - combinatorial front-ends: weighted bipartite matching, maximum-weight
//!   bases, weighted matroid intersection, mixed polynomial matrices, and DAE
//!   index analysis ([`apps`]).
//!
//! With the default `parallel` feature, embarrassingly parallel inner loops
//! (oracle trials, exhaustive sweeps) run on rayon; disabling the feature
//! yields a fully sequential build with identical results.

pub mod exec;
pub mod field;
pub mod lconvex;
pub mod matrix;
pub mod matroid;
pub mod mvsp;
pub mod pencil;
pub mod poly;
pub mod solver;
pub mod apps;
