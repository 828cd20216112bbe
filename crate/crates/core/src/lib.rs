//! Numerical harmonic analysis and operator calculus on the affine Poincaré
//! group: the group Fourier transform realized as integral kernels on the
//! four cones, Plancherel and inversion identities, pseudo-differential
//! operators with operator-valued symbols, and Wigner/Weyl transforms —
//! all as concrete quadrature-backed operators with verifiable error
//! behavior under grid refinement.

pub mod cone;
pub mod error;
pub mod exec;
pub mod fourier;
pub mod gft;
pub mod grid;
pub mod group;
pub mod interp;
pub mod io;
pub mod psido;
pub mod rng;
pub mod testfn;
pub mod wigner;

pub use error::{PncError, Result};
