//! Two-point boundary-value transfer from the initial-value propagator.
//!
//! The idler is prescribed at `z = L` and the signal at `z = 0`. Given the forward
//! propagator `Φ(L) = [[a, b], [c, d]]`, solving `x₁(L) = a x₁(0) + b x₂(0)` for
//! `x₁(0)` yields the input-output map `[[1/a, −b/a], [c/a, d − cb/a]]`.

use nalgebra::Matrix2;

use crate::analytic::entire;
use crate::error::{Error, Result};
use crate::params::{Pair, SystemParams};

const PIVOT_MIN: f64 = 1e-12;

/// Generator of `d/dz (x_i, x_s)` for either pair, for arbitrary `g`.
pub fn generator(pair: Pair, params: &SystemParams) -> Matrix2<f64> {
    let (g, gamma, kappa) = (params.g, params.gamma, params.kappa);
    match pair {
        Pair::Pt => Matrix2::new(g, kappa, -kappa, -gamma),
        Pair::NonPt => Matrix2::new(-g, kappa, -kappa, -gamma),
    }
}

/// Diagonal (2,2) Padé approximant of `e^A`, fourth order.
fn pade22(a: &Matrix2<f64>) -> Matrix2<f64> {
    let a2 = a * a;
    let i = Matrix2::identity();
    let num = i + a * 0.5 + a2 / 12.0;
    let den = i - a * 0.5 + a2 / 12.0;
    den.try_inverse().expect("Padé denominator is regular for small steps") * num
}

/// z-ordered product of `n_steps` Padé step propagators.
pub fn stepped_propagator(m: &Matrix2<f64>, length: f64, n_steps: usize) -> Matrix2<f64> {
    let step = pade22(&(m * (length / n_steps as f64)));
    let mut phi = Matrix2::identity();
    for _ in 0..n_steps {
        phi = step * phi;
    }
    phi
}

/// `e^{Mu}` through Cayley–Hamilton: `e^{tu}[C(u)·I + S(u)·(M − tI)]` with `t = tr M / 2`.
pub fn expm2(m: &Matrix2<f64>, u: f64) -> Matrix2<f64> {
    let t = 0.5 * m.trace();
    let b = m - Matrix2::identity() * t;
    // (M − tI)² = −det(M − tI)·I, so the entire functions take β² = det(M − tI).
    let (c, s) = entire::cs(b.determinant(), u);
    (Matrix2::identity() * c + b * s) * (t * u).exp()
}

/// Input-output map from a forward propagator.
pub fn rearrange(pair: Pair, phi: &Matrix2<f64>) -> Result<Matrix2<f64>> {
    let (a, b, c, d) = (phi[(0, 0)], phi[(0, 1)], phi[(1, 0)], phi[(1, 1)]);
    if a.abs() < PIVOT_MIN {
        return Err(Error::SecularDivergence { pair, secant: 1.0 / a.abs() });
    }
    Ok(Matrix2::new(1.0 / a, -b / a, c / a, d - c * b / a))
}

pub fn bvp_transfer(pair: Pair, params: &SystemParams, n_steps: usize) -> Result<Matrix2<f64>> {
    if n_steps < 16 {
        return Err(Error::Validation(format!("n_steps = {n_steps} below 16")));
    }
    let phi = stepped_propagator(&generator(pair, params), params.length, n_steps);
    rearrange(pair, &phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn expm2_matches_stepped_product() {
        for m in [
            Matrix2::new(0.3, 1.0, -1.0, -0.3),
            Matrix2::new(2.0, 1.0, -1.0, -2.0),
            Matrix2::new(-0.5, 1.0, -1.0, -0.5),
            Matrix2::new(1.0, 1.0, -1.0, -1.0),
        ] {
            assert_relative_eq!(expm2(&m, 1.7), stepped_propagator(&m, 1.7, 4096), max_relative = 1e-11);
        }
    }

    #[test]
    fn semigroup() {
        let m = Matrix2::new(0.7, 1.1, -1.1, -0.7);
        assert_relative_eq!(expm2(&m, 2.0), expm2(&m, 0.5) * expm2(&m, 1.5), max_relative = 1e-13);
    }

    #[test]
    fn too_few_steps() {
        let p = SystemParams::type_i(0.1, 1.0, 1.0).unwrap();
        assert!(bvp_transfer(Pair::Pt, &p, 8).is_err());
    }
}
