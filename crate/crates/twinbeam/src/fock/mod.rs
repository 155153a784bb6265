//! Fock-space construction of the Hamiltonian and symmetry analysis of its quadrature pairs.

pub mod effective;
pub mod operators;

pub use effective::{
    eigensystem, h_pi_qs, h_qi_ps, pia_cases, pt_classify, pt_conjugate, EffectiveH2, Eigensystem, ModeEquations,
    PiaCase, PumpCase, Quadrature, Symmetry,
};
pub use operators::{build_hamiltonian, build_hamiltonian_su11, su11_check, FockOperator, Su11Report};
