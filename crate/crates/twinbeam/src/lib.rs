//! Gaussian dynamics of a backward twin-beam amplifier with phase-sensitive gain on
//! the idler and equal loss on the signal.
//!
//! At `g = γ` the quadrature pair `(q_i, p_s)` evolves under a PT-symmetric generator
//! with eigenvalues `±β = ±√(κ² − γ²)`; the conjugate pair `(p_i, q_s)` does not.
//! [`analytic`] evaluates the closed forms, [`oracle`] re-derives them independently,
//! and [`sensing`] and [`scan`] build figures of merit and boundary searches on top.

pub mod analytic;
pub mod error;
pub mod fock;
pub mod oracle;
pub mod params;
pub mod scan;
pub mod sensing;

pub use error::{Error, Result};
pub use params::{
    spectral, symplectic_check, CovarianceState, InputState, Pair, QuadLabel, Regime, Spectral, SystemParams,
    VACUUM_VARIANCE,
};
