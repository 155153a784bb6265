use thiserror::Error;

use crate::params::Pair;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("validation: {0}")]
    Validation(String),
    #[error("secular divergence in {pair:?} pair (secant magnitude {secant:.3e})")]
    SecularDivergence { pair: Pair, secant: f64 },
    #[error("type-I configuration (g == gamma) required, got g={g}, gamma={gamma}")]
    NotTypeI { g: f64, gamma: f64 },
    #[error("thermal occupation only enters the PT-pair idler variance; n_th={0} unsupported here")]
    ThermalUnsupported(f64),
    #[error("quadrature did not converge: estimated error {estimate:.3e} after {intervals} intervals")]
    Integration { estimate: f64, intervals: usize },
    #[error("non-finite sample at trajectory {trajectory}")]
    Numerical { trajectory: u64 },
    #[error("mean photon sum {0:.3e} too small for a noise figure")]
    VanishingDenominator(f64),
    #[error("truncation {0} below the minimum of 4 levels")]
    Truncation(usize),
    #[error("covariance condition number {0:.3e} exceeds 1e12")]
    IllConditioned(f64),
    #[error("PT-pair optimal lengths need the unbroken regime (gamma/kappa = {0})")]
    BrokenRegime(f64),
    #[error("no crossing of the vacuum level inside the window")]
    NoCrossing,
    #[error("no transition inside the ratio range")]
    NoTransition,
    #[error("fewer than two peaks found")]
    FewerThanTwoPeaks,
}

pub type Result<T> = std::result::Result<T, Error>;
