//! Finite-dimensional numerics for complex structures on classical phase
//! space and for the quantum structures they induce.
//!
//! The crate is organised around one chain of constructions:
//!
//! * [`phase_space`] fixes the real coordinate conventions on `R^{2n}` and
//!   the complexification `z = (q + ip) / sqrt(2)`.
//! * [`moduli`] handles orthogonal complex structures `J` (`J^2 = -I`),
//!   their pushforward under `O(2n)`, the unitary embedding, and the
//!   `(R, S)` block decomposition of an orthogonal map in `(z, z̄)`
//!   coordinates.  `S = 0` is the Cauchy-Riemann condition.
//! * [`fock_boson`] and [`fock_fermion`] build truncated Fock spaces over a
//!   chosen structure and realise Bogoliubov transformations on them, with
//!   explicit control of every truncation artefact.
//! * [`qseries`] provides exact truncated power series in `t^{1/4}` with
//!   big-rational coefficients, enough to state theta-function and
//!   partition-counting identities coefficient by coefficient.
//! * [`matrix_model`] integrates the bosonic sector of a 9-matrix quantum
//!   mechanics and maps configurations isometrically onto flat phase space.
//!
//! Numerical routines avoid external linear-algebra backends: the handful
//! of dense eigensolves needed here run through a built-in Hermitian Jacobi
//! solver, which keeps results bit-reproducible across platforms.

pub mod error;
pub mod fock_boson;
pub mod fock_fermion;
pub mod matrix_model;
pub mod moduli;
pub mod phase_space;
pub mod qseries;

pub(crate) mod linalg;

pub use error::{Error, Result};
