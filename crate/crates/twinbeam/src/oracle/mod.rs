//! Independent numerical re-derivations of the closed forms.
//!
//! Quadrature re-integrates the noise kernels, [`bvp`] rebuilds the transfer maps
//! from stepped propagators, [`mc`] samples the stochastic boundary-value problem and
//! [`wick`] enumerates Gaussian moments. None of them reuse the closed-form
//! variances of [`crate::analytic`].
//!
//! Noise convention: the quadrature noises `P_s`, `Q_s` of the lossy signal are white
//! with symmetrized intensity `(γ/2)(2n_th + 1)` each and `[P_s(z), Q_s(z')] = −iγδ(z − z')`,
//! both following from `⟨f f†⟩ = 2γδ` and the quadrature definitions.

pub mod bvp;
pub mod mc;
pub mod quad;
pub mod wick;

use nalgebra::Matrix4;

pub use bvp::bvp_transfer;
pub use mc::{mc_ensemble, nf_oracle, McConfig, McEnsemble, NfEstimate};
pub use quad::integrate;
pub use wick::{isserlis, nf_wick, raw_moment, wick_fourth_moment};

use crate::analytic::{output_means, transfer, TransferSolution};
use crate::error::Result;
use crate::params::{CovarianceState, Pair, QuadLabel, SystemParams, PI0, PSL, QI0, QSL};

pub const DEFAULT_TOL: f64 = 1e-12;

/// `(γw/2)∫₀ᴸ k_a k_b` for rows `a`, `b` (0 = idler side, 1 = signal side).
fn noise_integral(t: &TransferSolution, params: &SystemParams, a: usize, b: usize, tol: f64) -> Result<f64> {
    let weight = 0.5 * params.gamma * (2.0 * params.n_th + 1.0);
    if weight == 0.0 {
        return Ok(0.0);
    }
    let k = |row: usize, z: f64| if row == 0 { t.kernel_i(z) } else { t.kernel_s(z) };
    Ok(weight * integrate(|z| k(a, z) * k(b, z), 0.0, t.length(), tol / weight)?)
}

fn pair_entry(pair: Pair, params: &SystemParams, a: usize, b: usize, tol: f64) -> Result<f64> {
    let t = transfer(pair, params)?;
    let v = params.input.input_variance;
    let h = &t.homo;
    let homogeneous = v * (h[(a, 0)] * h[(b, 0)] + h[(a, 1)] * h[(b, 1)]);
    Ok(homogeneous + noise_integral(&t, params, a, b, tol)?)
}

/// Output variance from the input-output map plus quadrature of the squared noise kernel.
///
/// Thermal occupation weights the noise term of every label.
pub fn kernel_variance(label: QuadLabel, params: &SystemParams, tol: f64) -> Result<f64> {
    let single = |l: QuadLabel| match l {
        QuadLabel::Qi0 => pair_entry(Pair::Pt, params, 0, 0, tol),
        QuadLabel::PsL => pair_entry(Pair::Pt, params, 1, 1, tol),
        QuadLabel::Pi0 => pair_entry(Pair::NonPt, params, 0, 0, tol),
        QuadLabel::QsL => pair_entry(Pair::NonPt, params, 1, 1, tol),
        QuadLabel::D1 | QuadLabel::D2 => unreachable!(),
    };
    match label {
        QuadLabel::D1 => Ok(0.5 * (single(QuadLabel::Qi0)? + single(QuadLabel::QsL)?)),
        QuadLabel::D2 => Ok(0.5 * (single(QuadLabel::Pi0)? + single(QuadLabel::PsL)?)),
        l => single(l),
    }
}

/// Full output covariance assembled by quadrature, cross terms included.
pub fn kernel_covariance(params: &SystemParams, tol: f64) -> Result<CovarianceState> {
    let mut cov = Matrix4::zeros();
    for (pair, (i, s)) in [(Pair::Pt, (QI0, PSL)), (Pair::NonPt, (PI0, QSL))] {
        let slots = [i, s];
        for a in 0..2 {
            for b in a..2 {
                let v = pair_entry(pair, params, a, b, tol)?;
                cov[(slots[a], slots[b])] = v;
                cov[(slots[b], slots[a])] = v;
            }
        }
    }
    Ok(CovarianceState {
        means: output_means(params)?,
        cov,
    })
}

/// Left-hand sides of the two output commutation identities, both equal to 1:
/// `[q_i(0), p_i(0)] = i/2` and `[q_s(L), p_s(L)] = i/2`.
pub fn commutation_identities(params: &SystemParams, tol: f64) -> Result<[f64; 2]> {
    let pt = transfer(Pair::Pt, params)?;
    let np = transfer(Pair::NonPt, params)?;
    let (h, n) = (&pt.homo, &np.homo);
    let g2 = 2.0 * params.gamma;
    let l = params.length;
    let idler = integrate(|z| pt.kernel_i(z) * np.kernel_i(z), 0.0, l, tol)?;
    let signal = integrate(|z| np.kernel_s(z) * pt.kernel_s(z), 0.0, l, tol)?;
    Ok([
        h[(0, 0)] * n[(0, 0)] - h[(0, 1)] * n[(0, 1)] - g2 * idler,
        n[(1, 1)] * h[(1, 1)] - n[(1, 0)] * h[(1, 0)] + g2 * signal,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{noise_figure, output_covariance, variance};
    use crate::params::InputState;
    use approx::assert_relative_eq;
    use nalgebra::Matrix2;

    fn p(r: f64, x: f64) -> SystemParams {
        SystemParams::from_ratio(r, 1.0, x).unwrap()
    }

    #[test]
    fn kernel_variance_matches_analytic() {
        for &(r, x) in &[(0.0, 1.0), (0.2, 1.0), (0.6, 3.0), (1.0, 2.5), (1.7, 4.0)] {
            for l in QuadLabel::ALL {
                let a = variance(l, &p(r, x)).unwrap();
                let k = kernel_variance(l, &p(r, x), DEFAULT_TOL).unwrap();
                assert!((a - k).abs() <= 1e-9 * a.max(1.0), "{l} r={r} x={x}: {a} vs {k}");
            }
        }
    }

    #[test]
    fn trivial_kernel_cases() {
        for l in QuadLabel::ALL {
            assert_relative_eq!(kernel_variance(l, &p(0.8, 0.0), DEFAULT_TOL).unwrap(), 0.25, epsilon = 1e-15);
        }
        let t = transfer(Pair::Pt, &p(0.0, 1.0)).unwrap();
        assert_eq!(noise_integral(&t, &p(0.0, 1.0), 0, 0, DEFAULT_TOL).unwrap(), 0.0);
    }

    #[test]
    fn ep_quadrature_matches_series() {
        let prm = SystemParams::type_i(1.0, 1.0, 1.3).unwrap();
        let expect = crate::analytic::closed::variance_qi0_ep(1.0, 1.3);
        assert_relative_eq!(kernel_variance(QuadLabel::Qi0, &prm, DEFAULT_TOL).unwrap(), expect, epsilon = 1e-8);
    }

    #[test]
    fn thermal_quadrature() {
        let prm = p(0.4, 2.0).with_n_th(1.5).unwrap();
        assert_relative_eq!(
            kernel_variance(QuadLabel::Qi0, &prm, DEFAULT_TOL).unwrap(),
            variance(QuadLabel::Qi0, &prm).unwrap(),
            max_relative = 1e-10
        );
    }

    #[test]
    fn cross_terms_match() {
        let prm = p(0.5, 2.0);
        let k = kernel_covariance(&prm, DEFAULT_TOL).unwrap();
        assert_relative_eq!(k.cov, output_covariance(&prm).unwrap().cov, epsilon = 1e-10);
    }

    #[test]
    fn commutators_preserved() {
        for &(r, x) in &[(0.0, 1.0), (0.3, 2.0), (1.0, 3.0), (2.0, 5.0), (0.9, 7.5)] {
            let [a, b] = commutation_identities(&p(r, x), DEFAULT_TOL).unwrap();
            assert_relative_eq!(a, 1.0, epsilon = 1e-9);
            assert_relative_eq!(b, 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn bvp_examples() {
        let hermitian = SystemParams::type_i(0.0, 1.0, std::f64::consts::PI / 3.0).unwrap();
        let h = 3f64.sqrt() / 2.0;
        assert_relative_eq!(
            bvp_transfer(Pair::Pt, &hermitian, 4096).unwrap(),
            Matrix2::new(2.0, -2.0 * h, -2.0 * h, 2.0),
            epsilon = 1e-10
        );
        let prm = p(2.0, 1.5);
        assert_relative_eq!(
            bvp_transfer(Pair::NonPt, &prm, 4096).unwrap(),
            crate::analytic::closed::transfer_nonpt(&prm),
            epsilon = 1e-10
        );
        assert_eq!(bvp_transfer(Pair::Pt, &p(0.4, 0.0), 16).unwrap(), Matrix2::identity());
    }

    #[test]
    fn bvp_converges_at_fourth_order() {
        for &(r, x) in &[(0.2, 1.0), (0.7, 3.0), (1.5, 2.0)] {
            let prm = p(r, x);
            let exact = transfer(Pair::Pt, &prm).unwrap().homo;
            let err = |n| (bvp_transfer(Pair::Pt, &prm, n).unwrap() - exact).abs().max();
            let (e1, e2) = (err(16), err(32));
            assert!(e2 <= e1 / 4.0, "r={r}: {e1} -> {e2}");
            assert!((bvp_transfer(Pair::Pt, &prm, 4096).unwrap() - exact).abs().max() < 1e-10);
        }
    }

    #[test]
    fn decoupled_limit() {
        let prm = SystemParams::type_i(0.6, 1e-8, 1.0).unwrap();
        let fwd = bvp::expm2(&bvp::generator(Pair::Pt, &prm), 1.0);
        assert_relative_eq!(fwd, Matrix2::new(0.6f64.exp(), 0.0, 0.0, (-0.6f64).exp()), epsilon = 1e-7);
        let homo = bvp_transfer(Pair::Pt, &prm, 1024).unwrap();
        assert_relative_eq!(homo, Matrix2::identity() * (-0.6f64).exp(), epsilon = 1e-7);
    }

    #[test]
    fn wick_nf_matches_matrix_form() {
        for &(r, x, alpha) in &[(0.2, 1.0, 0.0), (0.5, 2.0, 1.0), (1.0, 3.0, 0.5), (2.0, 1.0, 2.0), (0.0, 4.0, 1.5)] {
            let prm = p(r, x).with_input(InputState::sensing(alpha)).unwrap();
            let a = noise_figure(&prm).unwrap();
            let w = nf_wick(&output_covariance(&prm).unwrap()).unwrap();
            assert_relative_eq!(a.ratio(), w.ratio(), max_relative = 1e-9);
        }
    }
}
