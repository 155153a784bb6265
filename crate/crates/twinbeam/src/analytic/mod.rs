//! Closed-form Gaussian dynamics of the type-I (`g = γ`) system.
//!
//! Production formulas are written with the entire functions of [`entire`], which
//! agree with the secant/PT-phase forms of [`closed`] wherever those are finite
//! and stay regular at the EP and past it.

pub mod closed;
pub mod entire;

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{Matrix2, Matrix4, Vector4};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{spectral, CovarianceState, Pair, QuadLabel, SystemParams, PI0, PSL, QI0, QSL};

/// Secant magnitude beyond which the backward geometry is treated as divergent.
pub const SECULAR_LIMIT: f64 = 1e6;

/// `|β|L` below which the EP series branch is reported.
pub const EP_SERIES_LIMIT: f64 = 1e-4;

pub(crate) fn require_type_i(params: &SystemParams) -> Result<()> {
    if params.is_type_i() {
        Ok(())
    } else {
        Err(Error::NotTypeI {
            g: params.g,
            gamma: params.gamma,
        })
    }
}

/// Input-output map of one quadrature pair.
///
/// `homo` maps `(x_i(L), x_s(0))` to `(x_i(0), x_s(L))`; the kernels weight the
/// pair's Langevin noise source at position `z`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransferSolution {
    pub pair: Pair,
    pub homo: Matrix2<f64>,
    pub ep_series: bool,
    gamma: f64,
    kappa: f64,
    beta_sq: f64,
    length: f64,
    /// `D = C(L) + γS(L)` for the PT pair, `cos κL` for the other.
    denom: f64,
}

impl TransferSolution {
    pub fn length(&self) -> f64 {
        self.length
    }

    /// Largest secant factor of the map.
    pub fn secant(&self) -> f64 {
        1.0 / self.denom.abs()
    }

    pub fn kernel_i(&self, z: f64) -> f64 {
        let u = self.length - z;
        match self.pair {
            Pair::Pt => -self.kappa * entire::cs(self.beta_sq, u).1 / self.denom,
            Pair::NonPt => -(self.gamma * z).exp() * (self.kappa * u).sin() / self.denom,
        }
    }

    pub fn kernel_s(&self, z: f64) -> f64 {
        match self.pair {
            Pair::Pt => {
                let (c, s) = entire::cs(self.beta_sq, z);
                (c + self.gamma * s) / self.denom
            }
            Pair::NonPt => (self.gamma * (z - self.length)).exp() * (self.kappa * z).cos() / self.denom,
        }
    }
}

pub fn transfer(pair: Pair, params: &SystemParams) -> Result<TransferSolution> {
    require_type_i(params)?;
    let sp = spectral(params);
    let (gamma, kappa, l) = (params.gamma, params.kappa, params.length);
    let (homo, denom) = match pair {
        Pair::Pt => {
            let (c, s) = entire::cs(sp.beta_sq, l);
            let d = c + gamma * s;
            (Matrix2::new(1.0, -kappa * s, -kappa * s, 1.0) / d, d)
        }
        Pair::NonPt => {
            let (s, c) = (kappa * l).sin_cos();
            let e = (gamma * l).exp();
            (Matrix2::new(e, -s, -s, 1.0 / e) / c, c)
        }
    };
    let sol = TransferSolution {
        pair,
        homo,
        ep_series: pair == Pair::Pt && sp.beta.norm() * l < EP_SERIES_LIMIT,
        gamma,
        kappa,
        beta_sq: sp.beta_sq,
        length: l,
        denom,
    };
    if !(sol.secant() <= SECULAR_LIMIT) {
        return Err(Error::SecularDivergence {
            pair,
            secant: sol.secant(),
        });
    }
    Ok(sol)
}

/// Covariance block of one pair: `(Var x_i(0), Var x_s(L), Cov)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PairCovariance {
    pub var_i: f64,
    pub var_s: f64,
    pub cov: f64,
}

fn pt_block(params: &SystemParams, w: f64) -> Result<PairCovariance> {
    let t = transfer(Pair::Pt, params)?;
    let sp = spectral(params);
    let (gamma, kappa, l) = (params.gamma, params.kappa, params.length);
    let v = params.input.input_variance;
    let (c, s) = entire::cs(sp.beta_sq, l);
    let d2 = t.denom * t.denom;
    let iss = entire::int_s2(sp.beta_sq, l);
    let noise = 0.5 * gamma * w;
    let ks2 = kappa * kappa * s * s;
    // ∫₀ᴸ (C + γS)² = (L + SC)/2 + γS² + γ²∫S²
    let int_ks = 0.5 * (l + s * c) + gamma * s * s + gamma * gamma * iss;
    // ∫₀ᴸ S(L−z)(C(z) + γS(z)) = LS/2 + γ·(S ⋆ S)
    let int_cross = 0.5 * l * s + gamma * entire::conv_ss(sp.beta_sq, l);
    Ok(PairCovariance {
        var_i: (v * (1.0 + ks2) + noise * kappa * kappa * iss) / d2,
        var_s: (v * (1.0 + ks2) + noise * int_ks) / d2,
        cov: (-2.0 * v * kappa * s - noise * kappa * int_cross) / d2,
    })
}

fn nonpt_block(params: &SystemParams, w: f64) -> Result<PairCovariance> {
    let t = transfer(Pair::NonPt, params)?;
    let (gamma, kappa, l) = (params.gamma, params.kappa, params.length);
    let v = params.input.input_variance;
    let (s, c) = (kappa * l).sin_cos();
    let c2 = c * c;
    debug_assert_eq!(c, t.denom);
    let e = (gamma * l).exp();
    let noise = 0.5 * gamma * w;
    let two_g = Complex64::new(2.0 * gamma, 0.0);
    let ikl = Complex64::new(0.0, kappa * l);
    let e_real = entire::exp_integral(two_g, l).re;
    let e_minus = entire::exp_integral(Complex64::new(2.0 * gamma, -2.0 * kappa), l);
    let e_plus = entire::exp_integral(Complex64::new(2.0 * gamma, 2.0 * kappa), l);
    // ∫ e^{2γz} sin²κ(L−z), ∫ e^{−2γ(L−z)} cos²κz, ∫ e^{2γz} sin κ(L−z) cos κz
    let j1 = 0.5 * e_real - 0.5 * ((2.0 * ikl).exp() * e_minus).re;
    let j2 = (0.5 * e_real + 0.5 * e_plus.re) / (e * e);
    let j3 = 0.5 * s * e_real + 0.5 * (ikl.exp() * e_minus).im;
    Ok(PairCovariance {
        var_i: (v * (e * e + s * s) + noise * j1) / c2,
        var_s: (v * (s * s + 1.0 / (e * e)) + noise * j2) / c2,
        cov: (-v * s * (e + 1.0 / e) - noise * j3 / e) / c2,
    })
}

/// Covariance block of `pair` with explicit thermal weight `w = 2n_th + 1` on every noise term.
pub fn pair_covariance(pair: Pair, params: &SystemParams, w: f64) -> Result<PairCovariance> {
    match pair {
        Pair::Pt => pt_block(params, w),
        Pair::NonPt => nonpt_block(params, w),
    }
}

fn require_zero_temperature(params: &SystemParams) -> Result<()> {
    if params.n_th == 0.0 {
        Ok(())
    } else {
        Err(Error::ThermalUnsupported(params.n_th))
    }
}

fn pair_means(pair: Pair, params: &SystemParams) -> Result<nalgebra::Vector2<f64>> {
    let inp = &params.input;
    let input = match pair {
        Pair::Pt => nalgebra::Vector2::new(inp.mean_qi_l, inp.mean_ps_0),
        Pair::NonPt => nalgebra::Vector2::new(inp.mean_pi_l, inp.mean_qs_0),
    };
    Ok(transfer(pair, params)?.homo * input)
}

pub fn mean(label: QuadLabel, params: &SystemParams) -> Result<f64> {
    Ok(match label {
        QuadLabel::Qi0 => pair_means(Pair::Pt, params)?[0],
        QuadLabel::PsL => pair_means(Pair::Pt, params)?[1],
        QuadLabel::Pi0 => pair_means(Pair::NonPt, params)?[0],
        QuadLabel::QsL => pair_means(Pair::NonPt, params)?[1],
        QuadLabel::D1 => FRAC_1_SQRT_2 * (pair_means(Pair::Pt, params)?[0] + pair_means(Pair::NonPt, params)?[1]),
        QuadLabel::D2 => FRAC_1_SQRT_2 * (pair_means(Pair::NonPt, params)?[0] + pair_means(Pair::Pt, params)?[1]),
    })
}

/// Means in the ordering `(q_i(0), q_s(L), p_i(0), p_s(L))`.
pub fn output_means(params: &SystemParams) -> Result<Vector4<f64>> {
    let pt = pair_means(Pair::Pt, params)?;
    let np = pair_means(Pair::NonPt, params)?;
    Ok(Vector4::new(pt[0], np[1], np[0], pt[1]))
}

/// Output variance. Thermal occupation is honoured for `qi0` only.
pub fn variance(label: QuadLabel, params: &SystemParams) -> Result<f64> {
    if label == QuadLabel::Qi0 {
        let w = 2.0 * params.n_th + 1.0;
        return Ok(pt_block(params, w)?.var_i);
    }
    require_zero_temperature(params)?;
    Ok(match label {
        QuadLabel::PsL => pt_block(params, 1.0)?.var_s,
        QuadLabel::Pi0 => nonpt_block(params, 1.0)?.var_i,
        QuadLabel::QsL => nonpt_block(params, 1.0)?.var_s,
        QuadLabel::D1 => 0.5 * (pt_block(params, 1.0)?.var_i + nonpt_block(params, 1.0)?.var_s),
        QuadLabel::D2 => 0.5 * (nonpt_block(params, 1.0)?.var_i + pt_block(params, 1.0)?.var_s),
        QuadLabel::Qi0 => unreachable!(),
    })
}

pub fn output_covariance(params: &SystemParams) -> Result<CovarianceState> {
    require_zero_temperature(params)?;
    let pt = pt_block(params, 1.0)?;
    let np = nonpt_block(params, 1.0)?;
    let mut cov = Matrix4::zeros();
    cov[(QI0, QI0)] = pt.var_i;
    cov[(PSL, PSL)] = pt.var_s;
    cov[(QI0, PSL)] = pt.cov;
    cov[(PSL, QI0)] = pt.cov;
    cov[(PI0, PI0)] = np.var_i;
    cov[(QSL, QSL)] = np.var_s;
    cov[(PI0, QSL)] = np.cov;
    cov[(QSL, PI0)] = np.cov;
    Ok(CovarianceState {
        means: output_means(params)?,
        cov,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Mode {
    IdlerOut,
    SignalOut,
}

fn photons(state: &CovarianceState, q: usize, p: usize) -> f64 {
    state.cov[(q, q)] + state.cov[(p, p)] + state.means[q].powi(2) + state.means[p].powi(2) - 0.5
}

/// `⟨N⟩ = Var q + Var p + ⟨q⟩² + ⟨p⟩² − 1/2`.
pub fn mean_photon(mode: Mode, params: &SystemParams) -> Result<f64> {
    let state = output_covariance(params)?;
    Ok(match mode {
        Mode::IdlerOut => photons(&state, QI0, PI0),
        Mode::SignalOut => photons(&state, QSL, PSL),
    })
}

/// Relative-intensity statistics of `N_i(0) − N_s(L)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NoiseFigure {
    pub variance: f64,
    pub photon_sum: f64,
}

impl NoiseFigure {
    /// `Var[N_i − N_s]/(⟨N_i⟩ + ⟨N_s⟩)`; equals 1 at the shot-noise level.
    pub fn ratio(&self) -> f64 {
        self.variance / self.photon_sum
    }

    /// Shot-noise-referenced figure `ratio − 1`; negative means relative-intensity squeezing.
    pub fn signed(&self) -> f64 {
        self.ratio() - 1.0
    }

    /// Plot transform `lg(NF + 1)` for `NF ≥ 0` and `−lg(|NF| + 1)` otherwise, on [`Self::signed`].
    pub fn transformed(&self) -> f64 {
        let nf = self.signed();
        if nf >= 0.0 {
            (nf + 1.0).log10()
        } else {
            -(nf.abs() + 1.0).log10()
        }
    }
}

/// Sign pattern of `N_i − N_s` over the output ordering.
pub(crate) const INTENSITY_SIGNS: [f64; 4] = [1.0, -1.0, 1.0, -1.0];

/// Relative-intensity noise of a Gaussian state.
///
/// Weyl-ordered moments factorize classically; the operator square of
/// `Σ s_a v_a²` then differs from its Weyl symbol by `−2ħ² = −1/2` (`ħ = 1/2`).
pub fn noise_figure_of(state: &CovarianceState) -> Result<NoiseFigure> {
    let a = Matrix4::from_diagonal(&Vector4::from(INTENSITY_SIGNS));
    let av = a * state.cov;
    let mu = &state.means;
    let classical = 2.0 * (av * av).trace() + 4.0 * (mu.transpose() * av * a * mu)[0];
    let photon_sum = state.cov.trace() + mu.norm_squared() - 1.0;
    if !(photon_sum > 1e-12) {
        return Err(Error::VanishingDenominator(photon_sum));
    }
    Ok(NoiseFigure {
        variance: classical - 0.5,
        photon_sum,
    })
}

pub fn noise_figure(params: &SystemParams) -> Result<NoiseFigure> {
    noise_figure_of(&output_covariance(params)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{symplectic_check, InputState};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn p(r: f64, x: f64) -> SystemParams {
        SystemParams::from_ratio(r, 1.0, x).unwrap()
    }

    #[test]
    fn zero_length_is_identity() {
        for pair in [Pair::Pt, Pair::NonPt] {
            let t = transfer(pair, &p(0.7, 0.0)).unwrap();
            assert_eq!(t.homo, Matrix2::identity());
        }
        let s = output_covariance(&p(1.3, 0.0)).unwrap();
        assert_relative_eq!(s.cov, Matrix4::identity() * 0.25, epsilon = 1e-15);
    }

    #[test]
    fn hermitian_pt_transfer() {
        let prm = SystemParams::type_i(0.0, 1.0, PI / 3.0).unwrap();
        let t = transfer(Pair::Pt, &prm).unwrap();
        let h = 3f64.sqrt() / 2.0;
        assert_relative_eq!(t.homo, Matrix2::new(2.0, -2.0 * h, -2.0 * h, 2.0), epsilon = 1e-14);
    }

    #[test]
    fn mean_example() {
        let prm = SystemParams::type_i(0.0, 1.0, PI / 3.0)
            .unwrap()
            .with_input(InputState {
                mean_qi_l: 1.0,
                ..InputState::vacuum()
            })
            .unwrap();
        assert_relative_eq!(mean(QuadLabel::Qi0, &prm).unwrap(), 2.0, epsilon = 1e-14);
        for l in QuadLabel::ALL {
            assert_eq!(mean(l, &p(0.4, 2.0)).unwrap(), 0.0);
        }
    }

    #[test]
    fn hermitian_variance_example() {
        let prm = SystemParams::type_i(0.0, 1.0, PI / 6.0).unwrap();
        assert_relative_eq!(variance(QuadLabel::Qi0, &prm).unwrap(), 5.0 / 12.0, epsilon = 1e-14);
    }

    #[test]
    fn secular_divergence() {
        let prm = SystemParams::type_i(0.0, 1.0, PI / 2.0).unwrap();
        assert!(matches!(transfer(Pair::NonPt, &prm), Err(Error::SecularDivergence { .. })));
        assert!(matches!(variance(QuadLabel::Qi0, &prm), Err(Error::SecularDivergence { .. })));
    }

    #[test]
    fn ep_series_flag() {
        let prm = SystemParams::type_i(1.0, 1.0, 1.0).unwrap();
        assert!(transfer(Pair::Pt, &prm).unwrap().ep_series);
        assert!(!transfer(Pair::Pt, &p(0.5, 2.0)).unwrap().ep_series);
    }

    #[test]
    fn ep_variance_series_limit() {
        for &x in &[0.3, 1.0, 2.0 * 3f64.sqrt(), 5.0] {
            let kl = x / 2.0;
            let expect = (3.0 + 3.0 * kl * kl + 2.0 * kl.powi(3)) / (12.0 * (1.0 + kl).powi(2));
            assert_relative_eq!(variance(QuadLabel::Qi0, &p(1.0, x)).unwrap(), expect, max_relative = 1e-13);
        }
        assert_relative_eq!(variance(QuadLabel::Qi0, &p(1.0, 2.0 * 3f64.sqrt())).unwrap(), 0.25, epsilon = 1e-14);
    }

    #[test]
    fn thermal_only_for_idler_q() {
        let prm = p(0.3, 1.0).with_n_th(0.5).unwrap();
        assert!(variance(QuadLabel::Qi0, &prm).is_ok());
        assert!(matches!(variance(QuadLabel::PsL, &prm), Err(Error::ThermalUnsupported(_))));
        assert!(matches!(output_covariance(&prm), Err(Error::ThermalUnsupported(_))));
    }

    #[test]
    fn general_g_rejected() {
        let prm = SystemParams::new(0.2, 0.5, 1.0, 1.0).unwrap();
        assert!(matches!(transfer(Pair::Pt, &prm), Err(Error::NotTypeI { .. })));
    }

    #[test]
    fn two_mode_variances_are_averages() {
        let prm = p(0.6, 2.5);
        let d1 = variance(QuadLabel::D1, &prm).unwrap();
        let sum = variance(QuadLabel::Qi0, &prm).unwrap() + variance(QuadLabel::QsL, &prm).unwrap();
        assert_eq!(d1, 0.5 * sum);
    }

    #[test]
    fn output_covariance_is_physical() {
        let s = output_covariance(&p(0.2, 1.0)).unwrap();
        let r = symplectic_check(&s).unwrap();
        assert!(r.psd && r.uncertainty_ok);
    }

    #[test]
    fn photon_numbers() {
        assert_eq!(mean_photon(Mode::IdlerOut, &p(0.0, 0.0)).unwrap(), 0.0);
        let prm = SystemParams::type_i(0.0, 1.0, PI / 6.0).unwrap();
        let ni = mean_photon(Mode::IdlerOut, &prm).unwrap();
        let ns = mean_photon(Mode::SignalOut, &prm).unwrap();
        assert_relative_eq!(ni, ns, max_relative = 1e-13);
        assert_relative_eq!(ni, (PI / 6.0).tan().powi(2), max_relative = 1e-13);
    }

    #[test]
    fn noise_figure_edges() {
        assert!(matches!(noise_figure(&p(0.3, 0.0)), Err(Error::VanishingDenominator(_))));
        let nf = noise_figure(&p(0.0, 1.3)).unwrap();
        assert!(nf.variance.abs() < 1e-12);
        let coherent = CovarianceState {
            means: Vector4::new(1.0, 0.5, -2.0, 0.0),
            cov: Matrix4::identity() * 0.25,
        };
        let nf = noise_figure_of(&coherent).unwrap();
        assert_relative_eq!(nf.ratio(), 1.0, epsilon = 1e-14);
        assert_relative_eq!(nf.photon_sum, 5.25, epsilon = 1e-14);
    }
}
