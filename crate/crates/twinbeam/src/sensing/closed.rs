//! Secant/PT-phase forms of susceptibilities and inverse variances for the
//! `|α, α⟩` seed (every input mean equal to `α`).

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
    b: Complex64,
    bl: Complex64,
    eps: Complex64,
    l: f64,
    kl: f64,
    gl: f64,
    phi: f64,
}

fn parts(params: &SystemParams) -> Parts {
    let sp = spectral(params);
    Parts {
        b: sp.beta,
        bl: sp.beta * params.length,
        eps: sp.epsilon,
        l: params.length,
        kl: params.kappa * params.length,
        gl: params.gamma * params.length,
        phi: sp.phi,
    }
}

/// `B` in `χ^{q_i(0)} = α B / (β cos²(βL − ε))`:
/// `(sin²ε − κL cos βL) cos(βL − ε) + (cos ε − sin βL)(κL + sin ε) sin(βL − ε)`.
fn qi0_bracket(p: &Parts) -> Complex64 {
    let (se, ce) = (p.eps.sin(), p.eps.cos());
    let shift = p.bl - p.eps;
    (se * se - p.kl * p.bl.cos()) * shift.cos() + (ce - p.bl.sin()) * (p.kl + se) * shift.sin()
}

pub fn chi_qi0(params: &SystemParams, alpha: f64) -> Result<f64> {
    let p = parts(params);
    real(alpha * qi0_bracket(&p) / (p.b * (p.bl - p.eps).cos().powi(2)))
}

/// `α L (3 + κ²L²) / [3(1 + κL)²]`, negated: the `γ = κ` limit of [`chi_qi0`].
pub fn chi_qi0_ep(alpha: f64, kappa: f64, length: f64) -> f64 {
    let x = kappa * length;
    -alpha * length * (3.0 + x * x) / (3.0 * (1.0 + x).powi(2))
}

/// Equal to [`chi_qi0`]: with equal seeds both means are `α(cos ε − sin βL)/cos(βL − ε)`.
pub fn chi_ps(params: &SystemParams, alpha: f64) -> Result<f64> {
    chi_qi0(params, alpha)
}

/// `αL sec²κL (e^{−γL} sin κL − 1)`.
pub fn chi_qs(params: &SystemParams, alpha: f64) -> f64 {
    let p = parts(params);
    alpha * p.l * ((-p.gl).exp() * p.kl.sin() - 1.0) / p.kl.cos().powi(2)
}

/// `αL sec²κL (e^{γL} sin κL − 1)`.
pub fn chi_pi(params: &SystemParams, alpha: f64) -> f64 {
    let p = parts(params);
    alpha * p.l * (p.gl.exp() * p.kl.sin() - 1.0) / p.kl.cos().powi(2)
}

/// `8α²B² / (β² cos²(βL − ε) {3 + 2γL − tan ε sin 2βL − cos 2βL − 2 sin²ε})`.
pub fn inverse_variance_qi0(params: &SystemParams, alpha: f64) -> Result<f64> {
    let p = parts(params);
    let var_num = 3.0 + 2.0 * p.gl - p.eps.tan() * (2.0 * p.bl).sin() - (2.0 * p.bl).cos() - 2.0 * p.eps.sin().powi(2);
    real(8.0 * alpha * alpha * qi0_bracket(&p).powi(2) / (p.b * p.b * (p.bl - p.eps).cos().powi(2) * var_num))
}

/// `8α²B² / (β² cos²(βL − ε){3 + 2γL + tan ε sin(2βL − 2ε) − cos 2βL})`.
pub fn inverse_variance_ps(params: &SystemParams, alpha: f64) -> Result<f64> {
    let p = parts(params);
    let var_num = 3.0 + 2.0 * p.gl + p.eps.tan() * (2.0 * p.bl - 2.0 * p.eps).sin() - (2.0 * p.bl).cos();
    real(8.0 * alpha * alpha * qi0_bracket(&p).powi(2) / (p.b * p.b * (p.bl - p.eps).cos().powi(2) * var_num))
}

/// `8α²L² sec²κL [e^{−γL} sin κL − 1]² / (2 − cos φ cos(2κL + φ) + cos²φ e^{−2γL})`.
pub fn inverse_variance_qs(params: &SystemParams, alpha: f64) -> f64 {
    let p = parts(params);
    let cp = p.phi.cos();
    8.0 * (alpha * p.l).powi(2) * ((-p.gl).exp() * p.kl.sin() - 1.0).powi(2)
        / p.kl.cos().powi(2)
        / (2.0 - cp * (2.0 * p.kl + p.phi).cos() + cp * cp * (-2.0 * p.gl).exp())
}

/// `8α²L² sec²κL [e^{γL} sin κL − 1]² / ((2 + cos²φ) e^{2γL} − cos φ cos(2κL − φ))`.
pub fn inverse_variance_pi(params: &SystemParams, alpha: f64) -> f64 {
    let p = parts(params);
    let cp = p.phi.cos();
    8.0 * (alpha * p.l).powi(2) * (p.gl.exp() * p.kl.sin() - 1.0).powi(2)
        / p.kl.cos().powi(2)
        / ((2.0 + cp * cp) * (2.0 * p.gl).exp() - cp * (2.0 * p.kl - p.phi).cos())
}

/// Quantum Fisher information at `γ = κ` for the `|α, α⟩` seed, `x = κL`.
pub fn ep_qfi(alpha: f64, kappa: f64, length: f64) -> f64 {
    let x = kappa * length;
    let (s, c) = x.sin_cos();
    let (s2, c2) = (2.0 * x).sin_cos();
    let e = |k: f64| (k * x).exp();
    let den = 7.0 * e(4.0) + 2.0 * e(2.0) * c2 - 1.0;
    let t2 = (s - e(1.0)) * (e(1.0) * s + e(3.0) * s - s2 + (e(1.0) - 5.0 * e(3.0)) * c + c2 - e(2.0)) / den;
    let t3 = (e(1.0) * s - 1.0) * (e(2.0) * s + s + e(3.0) * s2 + (3.0 * e(2.0) + 1.0) * c + e(3.0) * c2 - e(1.0)) / den;
    let a2l2 = (alpha * length).powi(2);
    let polynomial = (1.0 + x) * (x.powi(4) + 4.0 * x.powi(3) - 3.0 * x * x + 3.0);
    8.0 / 3.0 * a2l2 * (x * x + 3.0).powi(2) / polynomial + 4.0 / 3.0 * a2l2 * 6.0 / c.powi(3) * (t2 - t3)
}
