//! Secant and PT-phase forms in complex arithmetic.
//!
//! Each expression is written in `β`, `ε = arctan(γ/β)` and `φ = arctan(γ/κ)`,
//! continued past the EP through [`crate::params::spectral`]. They lose accuracy as
//! `β → 0` and are undefined at the EP itself, where the `*_ep` limits apply.

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::{spectral, SystemParams};

fn real(z: Complex64) -> Result<f64> {
    if z.im.abs() <= 1e-9 * z.re.abs().max(1.0) && z.re.is_finite() {
        Ok(z.re)
    } else {
        Err(Error::Validation(format!("imaginary residue {:.3e} in a real observable", z.im)))
    }
}

struct Parts {
    bl: Complex64,
    eps: Complex64,
    gl: f64,
    kl: f64,
    phi: f64,
    h: f64,
    w: f64,
}

fn parts(params: &SystemParams) -> Parts {
    let sp = spectral(params);
    Parts {
        bl: sp.beta * params.length,
        eps: sp.epsilon,
        gl: params.gamma * params.length,
        kl: params.kappa * params.length,
        phi: sp.phi,
        h: sp.h_l,
        w: sp.w,
    }
}

/// `sec(βL−ε)·[[cos ε, −sin βL], [−sin βL, cos ε]]`.
pub fn transfer_pt(params: &SystemParams) -> Result<Matrix2<f64>> {
    let p = parts(params);
    let sec = 1.0 / (p.bl - p.eps).cos();
    let diag = real(sec * p.eps.cos())?;
    let off = real(-sec * p.bl.sin())?;
    Ok(Matrix2::new(diag, off, off, diag))
}

/// `sec(κL)·[[e^{γL}, −sin κL], [−sin κL, e^{−γL}]]`.
pub fn transfer_nonpt(params: &SystemParams) -> Matrix2<f64> {
    let (s, c) = (params.kappa * params.length).sin_cos();
    let e = (params.gamma * params.length).exp();
    Matrix2::new(e, -s, -s, 1.0 / e) / c
}

/// `⟨q_i(0)⟩ = [cos ε⟨q_i(L)⟩ − sin βL⟨p_s(0)⟩]/cos(βL − ε)`.
pub fn mean_qi0(params: &SystemParams) -> Result<f64> {
    let p = parts(params);
    let num = p.eps.cos() * params.input.mean_qi_l - p.bl.sin() * params.input.mean_ps_0;
    real(num / (p.bl - p.eps).cos())
}

/// Thermally weighted idler variance
/// `{3 + w[2γL − tan ε sin 2βL] − cos 2βL − 2 sin²ε} / 8cos²(βL − ε)`;
/// at `w = 1` this is `[h(L) − 2 sin²ε − sec ε cos(2βL − ε)] / 8cos²(βL − ε)`.
pub fn variance_qi0(params: &SystemParams) -> Result<f64> {
    let p = parts(params);
    let num = 3.0 + p.w * (2.0 * p.gl - p.eps.tan() * (2.0 * p.bl).sin())
        - (2.0 * p.bl).cos()
        - 2.0 * p.eps.sin().powi(2);
    real(num / (8.0 * (p.bl - p.eps).cos().powi(2)))
}

/// The `w = 1` form written with `h(L)`.
pub fn variance_qi0_h(params: &SystemParams) -> Result<f64> {
    let p = parts(params);
    let num = p.h - 2.0 * p.eps.sin().powi(2) - (2.0 * p.bl - p.eps).cos() / p.eps.cos();
    real(num / (8.0 * (p.bl - p.eps).cos().powi(2)))
}

/// `[h(L) − cos 2βL + tan ε sin(2βL − 2ε)] / 8cos²(βL − ε)`.
pub fn variance_ps(params: &SystemParams) -> Result<f64> {
    let p = parts(params);
    let num = p.h - (2.0 * p.bl).cos() + p.eps.tan() * (2.0 * p.bl - 2.0 * p.eps).sin();
    real(num / (8.0 * (p.bl - p.eps).cos().powi(2)))
}

/// `[2 + cos²φ e^{−2γL} − cos φ cos(2κL + φ)] / 8cos²κL`.
pub fn variance_qs(params: &SystemParams) -> f64 {
    let p = parts(params);
    let cp = p.phi.cos();
    (2.0 + cp * cp * (-2.0 * p.gl).exp() - cp * (2.0 * p.kl + p.phi).cos()) / (8.0 * p.kl.cos().powi(2))
}

/// `[(2 + cos²φ) e^{2γL} − cos φ cos(2κL − φ)] / 8cos²κL`.
pub fn variance_pi(params: &SystemParams) -> f64 {
    let p = parts(params);
    let cp = p.phi.cos();
    ((2.0 + cp * cp) * (2.0 * p.gl).exp() - cp * (2.0 * p.kl - p.phi).cos()) / (8.0 * p.kl.cos().powi(2))
}

/// `⟨Δq_i²(0)⟩` at `γ = κ`: `(3 + 3x² + 2x³)/(12(1 + x)²)` with `x = κL`.
pub fn variance_qi0_ep(kappa: f64, length: f64) -> f64 {
    let x = kappa * length;
    (3.0 + 3.0 * x * x + 2.0 * x.powi(3)) / (12.0 * (1.0 + x).powi(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{transfer, variance};
    use crate::params::{Pair, QuadLabel};
    use approx::assert_relative_eq;

    #[test]
    fn h_form_equals_weighted_form_at_zero_temperature() {
        for &(r, x) in &[(0.2, 1.0), (0.7, 3.0), (1.8, 2.2), (2.5, 6.0)] {
            let p = SystemParams::from_ratio(r, 1.0, x).unwrap();
            assert_relative_eq!(variance_qi0(&p).unwrap(), variance_qi0_h(&p).unwrap(), max_relative = 1e-12);
        }
    }

    #[test]
    fn complex_forms_match_regular_forms() {
        for &(r, x) in &[(0.0, 1.0), (0.2, 1.0), (0.6, 2.0), (0.95, 7.0), (1.5, 4.0), (3.0, 7.9)] {
            let p = SystemParams::from_ratio(r, 1.0, x).unwrap();
            assert_relative_eq!(
                transfer_pt(&p).unwrap(),
                transfer(Pair::Pt, &p).unwrap().homo,
                max_relative = 1e-11
            );
            assert_relative_eq!(transfer_nonpt(&p), transfer(Pair::NonPt, &p).unwrap().homo, max_relative = 1e-13);
            let pairs = [
                (variance_qi0(&p).unwrap(), QuadLabel::Qi0),
                (variance_ps(&p).unwrap(), QuadLabel::PsL),
                (variance_qs(&p), QuadLabel::QsL),
                (variance_pi(&p), QuadLabel::Pi0),
            ];
            for (closed, label) in pairs {
                assert_relative_eq!(closed, variance(label, &p).unwrap(), max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn thermal_weight_matches_regular_form() {
        let p = SystemParams::from_ratio(0.4, 1.0, 2.0).unwrap().with_n_th(2.0).unwrap();
        assert_relative_eq!(
            variance_qi0(&p).unwrap(),
            variance(QuadLabel::Qi0, &p).unwrap(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn imaginary_residue_is_rejected() {
        assert!(real(Complex64::new(1.0, 1e-3)).is_err());
        assert_eq!(real(Complex64::new(2.0, 1e-12)).unwrap(), 2.0);
    }
}
