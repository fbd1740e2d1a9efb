//! Exact-diagonalization engine for the local equilibration of closed spin
//! chains.
//!
//! The library builds transverse-field Ising and next-nearest-neighbor XXZ
//! chains, evolves a pure initial state spectrally, and evaluates the
//! relative purity f(t) = Tr_S(omega_S rho_S(t)) against the dephased steady
//! state, the figure of merit g(t) = |f(t) - Tr_S(omega_S^2)|^2, four
//! families of fluctuation-speed bounds, and the derived quantum-speed-limit
//! and equilibration-time estimates.
//!
//! Everything is dense and double precision; one O(d^3) diagonalization per
//! scenario, O(d^2) per time point afterwards. Deterministic by
//! construction: fixed evaluation blocking, ordered reductions, no
//! thread-count-dependent results.

extern crate blas_src;

pub mod bounds;
pub mod error;
pub mod evolve;
pub mod info;
pub mod linalg;
pub mod scenario;
pub mod spin;

pub use error::{Error, Result};
