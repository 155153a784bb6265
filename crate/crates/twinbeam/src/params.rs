//! Parameter records, spectral quantities and covariance utilities.
//!
//! Quadratures follow `q = (a† + a)/2`, `p = i(a† − a)/2`, so `[q, p] = i/2`
//! and every vacuum quadrature variance is [`VACUUM_VARIANCE`].

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix4, SymmetricEigen, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const VACUUM_VARIANCE: f64 = 0.25;

/// Relative width of the exceptional-point band, `|γ − κ| ≤ EP_TOL·κ`.
pub const EP_TOL: f64 = 1e-12;

/// Input quadrature means and per-quadrature variance.
///
/// The idler enters at `z = L`, the signal at `z = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputState {
    pub mean_qi_l: f64,
    pub mean_pi_l: f64,
    pub mean_qs_0: f64,
    pub mean_ps_0: f64,
    pub input_variance: f64,
}

impl InputState {
    pub fn vacuum() -> Self {
        Self {
            mean_qi_l: 0.0,
            mean_pi_l: 0.0,
            mean_qs_0: 0.0,
            mean_ps_0: 0.0,
            input_variance: VACUUM_VARIANCE,
        }
    }

    /// Literal `|α, α⟩` with real `α`: both `q` means equal `α`, both `p` means vanish.
    pub fn two_photon(alpha: f64) -> Self {
        Self {
            mean_qi_l: alpha,
            mean_pi_l: 0.0,
            mean_qs_0: alpha,
            mean_ps_0: 0.0,
            ..Self::vacuum()
        }
    }

    /// `α_i = iα_s* = √2 α e^{iπ/4}`, i.e. `α_i = α_s = α(1 + i)`: all four means equal `α`.
    pub fn sensing(alpha: f64) -> Self {
        Self {
            mean_qi_l: alpha,
            mean_pi_l: alpha,
            mean_qs_0: alpha,
            mean_ps_0: alpha,
            ..Self::vacuum()
        }
    }

    fn validate(&self) -> Result<()> {
        let all = [
            self.mean_qi_l,
            self.mean_pi_l,
            self.mean_qs_0,
            self.mean_ps_0,
            self.input_variance,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("input state must be finite".into()));
        }
        if self.input_variance < VACUUM_VARIANCE * (1.0 - 1e-12) {
            return Err(Error::Validation(format!(
                "input variance {} violates the uncertainty bound 1/4",
                self.input_variance
            )));
        }
        Ok(())
    }
}

impl Default for InputState {
    fn default() -> Self {
        Self::vacuum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub g: f64,
    pub gamma: f64,
    pub kappa: f64,
    pub length: f64,
    pub n_th: f64,
    pub input: InputState,
}

impl SystemParams {
    /// Unrestricted constructor: any non-negative `g` and `γ`.
    pub fn new(g: f64, gamma: f64, kappa: f64, length: f64) -> Result<Self> {
        let p = Self {
            g,
            gamma,
            kappa,
            length,
            n_th: 0.0,
            input: InputState::vacuum(),
        };
        p.validate()?;
        Ok(p)
    }

    /// Type-I configuration, `g = γ`.
    pub fn type_i(gamma: f64, kappa: f64, length: f64) -> Result<Self> {
        Self::new(gamma, gamma, kappa, length)
    }

    /// Type-I point addressed by the dimensionless pair `(γ/κ, 2κL)`.
    pub fn from_ratio(ratio: f64, kappa: f64, two_kappa_l: f64) -> Result<Self> {
        Self::type_i(ratio * kappa, kappa, two_kappa_l / (2.0 * kappa))
    }

    pub fn with_input(mut self, input: InputState) -> Result<Self> {
        self.input = input;
        self.validate()?;
        Ok(self)
    }

    pub fn with_n_th(mut self, n_th: f64) -> Result<Self> {
        self.n_th = n_th;
        self.validate()?;
        Ok(self)
    }

    pub fn with_length(mut self, length: f64) -> Result<Self> {
        self.length = length;
        self.validate()?;
        Ok(self)
    }

    pub fn with_kappa(mut self, kappa: f64) -> Result<Self> {
        self.kappa = kappa;
        self.validate()?;
        Ok(self)
    }

    pub fn is_type_i(&self) -> bool {
        self.g == self.gamma
    }

    pub fn ratio(&self) -> f64 {
        self.gamma / self.kappa
    }

    pub fn two_kappa_l(&self) -> f64 {
        2.0 * self.kappa * self.length
    }

    pub fn validate(&self) -> Result<()> {
        let rates = [self.g, self.gamma, self.kappa, self.length, self.n_th];
        if rates.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Validation(format!(
                "rates, length and n_th must be finite and non-negative: {self:?}"
            )));
        }
        if self.kappa <= 0.0 {
            return Err(Error::Validation("kappa must be positive".into()));
        }
        self.input.validate()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    Unbroken,
    #[serde(rename = "EP")]
    Ep,
    Broken,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Unbroken => "unbroken",
            Regime::Ep => "EP",
            Regime::Broken => "broken",
        })
    }
}

/// Spectral data of the PT pair, analytically continued past the EP.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Spectral {
    /// `β² = κ² − γ²`, real in every regime.
    pub beta_sq: f64,
    pub beta: Complex64,
    pub epsilon: Complex64,
    pub phi: f64,
    pub h_l: f64,
    pub w: f64,
    pub regime: Regime,
}

impl Spectral {
    pub fn sin_epsilon(&self) -> Complex64 {
        self.epsilon.sin()
    }

    pub fn cos_epsilon(&self) -> Complex64 {
        self.epsilon.cos()
    }
}

pub fn regime(gamma: f64, kappa: f64) -> Regime {
    if (gamma - kappa).abs() <= EP_TOL * kappa {
        Regime::Ep
    } else if gamma < kappa {
        Regime::Unbroken
    } else {
        Regime::Broken
    }
}

/// `β = √(κ² − γ²)` on the principal branch and `ε = −i·Ln((β + iγ)/κ)`,
/// so that `sin ε = γ/κ` and `cos ε = β/κ` hold in every regime.
pub fn spectral(params: &SystemParams) -> Spectral {
    let (gamma, kappa) = (params.gamma, params.kappa);
    let regime = regime(gamma, kappa);
    let beta_sq = match regime {
        Regime::Ep => 0.0,
        _ => (kappa - gamma) * (kappa + gamma),
    };
    let beta = if beta_sq >= 0.0 {
        Complex64::new(beta_sq.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-beta_sq).sqrt())
    };
    let epsilon = match regime {
        Regime::Unbroken => Complex64::new(gamma.atan2(beta.re), 0.0),
        Regime::Ep => Complex64::new(std::f64::consts::FRAC_PI_2, 0.0),
        Regime::Broken => {
            let z = (beta + Complex64::new(0.0, gamma)) / kappa;
            -Complex64::i() * z.ln()
        }
    };
    Spectral {
        beta_sq,
        beta,
        epsilon,
        phi: (gamma / kappa).atan(),
        h_l: 3.0 + 2.0 * gamma * params.length,
        w: 2.0 * params.n_th + 1.0,
        regime,
    }
}

/// The two decoupled quadrature pairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pair {
    /// `(q_i, p_s)`, generator `[[g, κ], [−κ, −γ]]`, noise `P_s`.
    Pt,
    /// `(p_i, q_s)`, generator `[[−g, κ], [−κ, −γ]]`, noise `Q_s`.
    NonPt,
}

/// Output observables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QuadLabel {
    Qi0,
    PsL,
    Pi0,
    QsL,
    /// `[q_i(0) + q_s(L)]/√2`
    D1,
    /// `[p_i(0) + p_s(L)]/√2`
    D2,
}

impl QuadLabel {
    pub const SINGLE: [QuadLabel; 4] = [QuadLabel::Qi0, QuadLabel::QsL, QuadLabel::Pi0, QuadLabel::PsL];
    pub const ALL: [QuadLabel; 6] = [
        QuadLabel::Qi0,
        QuadLabel::PsL,
        QuadLabel::Pi0,
        QuadLabel::QsL,
        QuadLabel::D1,
        QuadLabel::D2,
    ];

    /// Position in the output ordering `(q_i(0), q_s(L), p_i(0), p_s(L))`.
    pub fn index(self) -> Option<usize> {
        match self {
            QuadLabel::Qi0 => Some(QI0),
            QuadLabel::QsL => Some(QSL),
            QuadLabel::Pi0 => Some(PI0),
            QuadLabel::PsL => Some(PSL),
            QuadLabel::D1 | QuadLabel::D2 => None,
        }
    }

    pub fn pair(self) -> Option<Pair> {
        match self {
            QuadLabel::Qi0 | QuadLabel::PsL => Some(Pair::Pt),
            QuadLabel::Pi0 | QuadLabel::QsL => Some(Pair::NonPt),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            QuadLabel::Qi0 => "qi0",
            QuadLabel::PsL => "ps_L",
            QuadLabel::Pi0 => "pi0",
            QuadLabel::QsL => "qs_L",
            QuadLabel::D1 => "d1",
            QuadLabel::D2 => "d2",
        }
    }
}

impl fmt::Display for QuadLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for QuadLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        QuadLabel::ALL
            .into_iter()
            .find(|l| l.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Validation(format!("unknown quadrature label {s:?}")))
    }
}

pub const QI0: usize = 0;
pub const QSL: usize = 1;
pub const PI0: usize = 2;
pub const PSL: usize = 3;

/// Output means and symmetrized covariance in the ordering
/// `v = (q_i(0), q_s(L), p_i(0), p_s(L))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovarianceState {
    pub means: Vector4<f64>,
    pub cov: Matrix4<f64>,
}

impl CovarianceState {
    pub fn vacuum() -> Self {
        Self {
            means: Vector4::zeros(),
            cov: Matrix4::identity() * VACUUM_VARIANCE,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SymplecticReport {
    pub psd: bool,
    pub uncertainty_ok: bool,
    pub min_eigenvalue: f64,
}

/// Physicality gate: positive semidefiniteness and the per-mode bound `V_qq·V_pp ≥ 1/16`.
pub fn symplectic_check(state: &CovarianceState) -> Result<SymplecticReport> {
    let v = &state.cov;
    let asym = (v - v.transpose()).amax();
    if asym > 1e-12 * v.amax().max(1.0) {
        return Err(Error::Validation(format!("covariance asymmetric by {asym:.3e}")));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Validation("covariance not finite".into()));
    }
    let min_eigenvalue = SymmetricEigen::new(*v).eigenvalues.min();
    let bound = 1.0 / 16.0 - 1e-10;
    let uncertainty_ok = v[(QI0, QI0)] * v[(PI0, PI0)] >= bound && v[(QSL, QSL)] * v[(PSL, PSL)] >= bound;
    Ok(SymplecticReport {
        psd: min_eigenvalue >= -1e-10,
        uncertainty_ok,
        min_eigenvalue,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn three_four_five() {
        let p = SystemParams::type_i(0.6, 1.0, 1.0).unwrap();
        let s = spectral(&p);
        assert_eq!(s.regime, Regime::Unbroken);
        assert_relative_eq!(s.beta.re, 0.8, epsilon = 1e-15);
        assert_relative_eq!(s.epsilon.re, 0.75f64.atan(), epsilon = 1e-15);
        assert_relative_eq!(s.phi, 0.6f64.atan(), epsilon = 1e-15);
    }

    #[test]
    fn exceptional_point_and_broken() {
        let s = spectral(&SystemParams::type_i(1.0, 1.0, 1.0).unwrap());
        assert_eq!(s.regime, Regime::Ep);
        assert_eq!(s.beta, Complex64::new(0.0, 0.0));

        let s = spectral(&SystemParams::type_i(2.0, 1.0, 1.0).unwrap());
        assert_eq!(s.regime, Regime::Broken);
        assert_relative_eq!(s.beta.im, 3f64.sqrt(), epsilon = 1e-15);
        assert_eq!(s.beta.re, 0.0);
        assert_relative_eq!(s.sin_epsilon().re, 2.0, epsilon = 1e-12);
        assert!(s.sin_epsilon().im.abs() < 1e-12);
        assert!((s.cos_epsilon() - s.beta).norm() < 1e-12);
    }

    #[test]
    fn ep_band_tolerance() {
        let s = spectral(&SystemParams::type_i(1.0 - 5e-13, 1.0, 1.0).unwrap());
        assert_eq!(s.regime, Regime::Ep);
        let s = spectral(&SystemParams::type_i(1.0 - 5e-12, 1.0, 1.0).unwrap());
        assert_eq!(s.regime, Regime::Unbroken);
    }

    #[test]
    fn thermal_weight_and_h() {
        let p = SystemParams::type_i(0.5, 1.0, 2.0).unwrap().with_n_th(1.5).unwrap();
        let s = spectral(&p);
        assert_eq!(s.w, 4.0);
        assert_eq!(s.h_l, 5.0);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(SystemParams::type_i(0.1, 0.0, 1.0).is_err());
        assert!(SystemParams::type_i(-0.1, 1.0, 1.0).is_err());
        assert!(SystemParams::type_i(0.1, 1.0, f64::NAN).is_err());
        let squeezed_input = InputState {
            input_variance: 0.2,
            ..InputState::vacuum()
        };
        assert!(SystemParams::type_i(0.1, 1.0, 1.0).unwrap().with_input(squeezed_input).is_err());
    }

    #[test]
    fn presets() {
        let s = InputState::sensing(2.0);
        assert_eq!([s.mean_qi_l, s.mean_pi_l, s.mean_qs_0, s.mean_ps_0], [2.0; 4]);
        let t = InputState::two_photon(2.0);
        assert_eq!([t.mean_qi_l, t.mean_pi_l, t.mean_qs_0, t.mean_ps_0], [2.0, 0.0, 2.0, 0.0]);
        assert_eq!(t.input_variance, 0.25);
    }

    #[test]
    fn symplectic_vacuum_and_violation() {
        let r = symplectic_check(&CovarianceState::vacuum()).unwrap();
        assert!(r.psd && r.uncertainty_ok);
        assert_relative_eq!(r.min_eigenvalue, 0.25);

        let thin = CovarianceState {
            means: Vector4::zeros(),
            cov: Matrix4::identity() * 0.1,
        };
        let r = symplectic_check(&thin).unwrap();
        assert!(r.psd);
        assert!(!r.uncertainty_ok);

        let mut skew = CovarianceState::vacuum();
        skew.cov[(0, 1)] = 0.1;
        assert!(matches!(symplectic_check(&skew), Err(Error::Validation(_))));
    }

    #[test]
    fn label_round_trip() {
        for l in QuadLabel::ALL {
            assert_eq!(l.name().parse::<QuadLabel>().unwrap(), l);
        }
        assert!("x".parse::<QuadLabel>().is_err());
    }
}
