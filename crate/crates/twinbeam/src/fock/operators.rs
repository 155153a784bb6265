//! Truncated Fock-space operators for one or two bosonic modes.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::SystemParams;

pub const MIN_CUTOFF: usize = 4;
pub const DEFAULT_MARGIN: usize = 2;

type CMat = DMatrix<Complex64>;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Dense operator on `N` (one mode) or `N·N` (two modes, idler ⊗ signal) levels.
///
/// Identities that fail at the truncation corner are checked only on basis states
/// whose every occupation is below `dim − boundary_margin`.
#[derive(Clone, Debug, PartialEq)]
pub struct FockOperator {
    pub dim: usize,
    pub modes: usize,
    pub matrix: CMat,
    pub boundary_margin: usize,
}

impl FockOperator {
    fn new(dim: usize, modes: usize, matrix: CMat) -> Self {
        Self {
            dim,
            modes,
            matrix,
            boundary_margin: DEFAULT_MARGIN,
        }
    }

    /// Basis indices whose occupations all lie below `dim − margin`.
    pub fn interior(&self, margin: usize) -> Vec<usize> {
        let top = self.dim.saturating_sub(margin);
        let total = self.matrix.nrows();
        (0..total)
            .filter(|&k| match self.modes {
                1 => k < top,
                _ => k / self.dim < top && k % self.dim < top,
            })
            .collect()
    }

    /// Largest entry of `self − other` on the interior block.
    pub fn interior_residual(&self, other: &CMat, margin: usize) -> f64 {
        let idx = self.interior(margin);
        let mut worst = 0.0f64;
        for &r in &idx {
            for &c in &idx {
                worst = worst.max((self.matrix[(r, c)] - other[(r, c)]).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (&self.matrix - self.matrix.adjoint()).iter().all(|z| z.norm() <= tol)
    }

    /// Eigenvalues of `matrix` from a complex Schur decomposition.
    pub fn spectrum(&self) -> Vec<Complex64> {
        nalgebra::Schur::new(self.matrix.clone()).eigenvalues().map_or_else(Vec::new, |v| v.iter().copied().collect())
    }
}

fn check_cutoff(n: usize) -> Result<()> {
    if n < MIN_CUTOFF {
        Err(Error::Truncation(n))
    } else {
        Ok(())
    }
}

/// Single-mode `a` with `a|n⟩ = √n |n−1⟩`.
pub fn annihilation(n: usize) -> CMat {
    CMat::from_fn(n, n, |r, c| if c == r + 1 { Complex64::from((c as f64).sqrt()) } else { Complex64::from(0.0) })
}

/// `(a_i, a_s)` on the idler ⊗ signal product space.
pub fn two_mode_annihilation(n: usize) -> (CMat, CMat) {
    let a = annihilation(n);
    let id = CMat::identity(n, n);
    (a.kronecker(&id), id.kronecker(&a))
}

/// `H = ig(a_i² − a_i†²)/2 − iγ a_s†a_s + κ(a_i†a_s† + a_i a_s)` with `ħ = 1`.
pub fn build_hamiltonian(params: &SystemParams, n_cut: usize) -> Result<FockOperator> {
    check_cutoff(n_cut)?;
    let (ai, as_) = two_mode_annihilation(n_cut);
    let (ait, ast) = (ai.adjoint(), as_.adjoint());
    let h = (&ai * &ai - &ait * &ait) * (I * params.g / 2.0) - &ast * &as_ * (I * params.gamma)
        + (&ait * &ast + &ai * &as_) * Complex64::from(params.kappa);
    Ok(FockOperator::new(n_cut, 2, h))
}

/// Generators of the single-mode (`a_i²/2`, `a_i†²/2`, `(n_i + 1/2)/2`) and
/// two-mode (`a_i a_s`, `a_i†a_s†`, `(n_i + n_s + 1)/2`) representations,
/// written from their matrix elements rather than from products of `a`.
#[derive(Clone, Debug)]
pub struct Su11 {
    pub minus: FockOperator,
    pub plus: FockOperator,
    pub z: FockOperator,
}

pub fn su11_single(n: usize) -> Su11 {
    let lower = CMat::from_fn(n, n, |r, c| {
        if c == r + 2 {
            Complex64::from((c as f64 * (c - 1) as f64).sqrt() / 2.0)
        } else {
            Complex64::from(0.0)
        }
    });
    let z = CMat::from_fn(n, n, |r, c| Complex64::from(if r == c { (r as f64 + 0.5) / 2.0 } else { 0.0 }));
    Su11 {
        plus: FockOperator::new(n, 1, lower.adjoint()),
        minus: FockOperator::new(n, 1, lower),
        z: FockOperator::new(n, 1, z),
    }
}

pub fn su11_two_mode(n: usize) -> Su11 {
    let d = n * n;
    let lower = CMat::from_fn(d, d, |r, c| {
        let (ri, rs, ci, cs) = (r / n, r % n, c / n, c % n);
        if ci == ri + 1 && cs == rs + 1 {
            Complex64::from((ci as f64 * cs as f64).sqrt())
        } else {
            Complex64::from(0.0)
        }
    });
    let z = CMat::from_fn(d, d, |r, c| {
        Complex64::from(if r == c { ((r / n + r % n) as f64 + 1.0) / 2.0 } else { 0.0 })
    });
    Su11 {
        plus: FockOperator::new(n, 2, lower.adjoint()),
        minus: FockOperator::new(n, 2, lower),
        z: FockOperator::new(n, 2, z),
    }
}

/// The same Hamiltonian through the generators:
/// `ig(L_{i,−} − L_{i,+}) − iγ n_s + κ(L_+ + L_−)`, with the single-mode set lifted to the product space.
pub fn build_hamiltonian_su11(params: &SystemParams, n_cut: usize) -> Result<FockOperator> {
    check_cutoff(n_cut)?;
    let single = su11_single(n_cut);
    let pair = su11_two_mode(n_cut);
    let id = CMat::identity(n_cut, n_cut);
    let ns = CMat::from_fn(n_cut, n_cut, |r, c| Complex64::from(if r == c { r as f64 } else { 0.0 }));
    let idler_sq = (single.minus.matrix - single.plus.matrix).kronecker(&id) * (I * params.g);
    let loss = id.kronecker(&ns) * (I * params.gamma);
    let coupling = (pair.plus.matrix + pair.minus.matrix) * Complex64::from(params.kappa);
    Ok(FockOperator::new(n_cut, 2, idler_sq - loss + coupling))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Su11Report {
    pub single_mode_residual: f64,
    pub two_mode_residual: f64,
    pub max_residual: f64,
}

fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

fn algebra_residual(set: &Su11, margin: usize) -> f64 {
    let (p, m, z) = (&set.plus.matrix, &set.minus.matrix, &set.z.matrix);
    let zero = CMat::zeros(p.nrows(), p.ncols());
    let residuals = [
        commutator(z, p) - p,
        commutator(z, m) + m,
        commutator(p, m) + z * Complex64::from(2.0),
    ];
    residuals
        .into_iter()
        .map(|r| FockOperator::new(set.z.dim, set.z.modes, r).interior_residual(&zero, margin))
        .fold(0.0, f64::max)
}

/// `[L_z, L_±] = ±L_±` and `[L_+, L_−] = −2L_z` for both representations on the interior.
pub fn su11_check(n_cut: usize, margin: usize) -> Su11Report {
    let single = algebra_residual(&su11_single(n_cut), margin);
    let two = algebra_residual(&su11_two_mode(n_cut), margin);
    Su11Report {
        single_mode_residual: single,
        two_mode_residual: two,
        max_residual: single.max(two),
    }
}
