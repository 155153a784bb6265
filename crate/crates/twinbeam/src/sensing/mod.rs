//! Figures of merit for estimating the coupling `κ` from homodyne data.
//!
//! Susceptibilities are exact κ-derivatives of the regular transfer maps, so they
//! stay finite through the EP. The QFI differentiates the mean vector numerically
//! and is therefore independent of them.

pub mod closed;

use nalgebra::{Matrix2, SymmetricEigen, Vector2, Vector4};
use serde::Serialize;

use crate::analytic::{self, entire, output_covariance, output_means, transfer};
use crate::error::{Error, Result};
use crate::params::{spectral, InputState, Pair, QuadLabel, Regime, SystemParams};

pub const CONDITION_LIMIT: f64 = 1e12;
pub const NEAR_OPTIMAL: f64 = 0.99;
pub const CRAMER_RAO_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SensingConfig {
    pub alpha: f64,
    pub params: SystemParams,
    pub fd_step: f64,
    pub quad: QuadLabel,
}

impl SensingConfig {
    /// Seeds `params` with `|α, α⟩`.
    pub fn new(alpha: f64, params: SystemParams, quad: QuadLabel) -> Result<Self> {
        Self::with_input(alpha, params, quad, InputState::sensing(alpha))
    }

    pub fn with_input(alpha: f64, params: SystemParams, quad: QuadLabel, input: InputState) -> Result<Self> {
        let cfg = Self {
            alpha,
            params: params.with_input(input)?,
            fd_step: 1e-5,
            quad,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_fd_step(mut self, fd_step: f64) -> Result<Self> {
        self.fd_step = fd_step;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::Validation(format!("alpha = {} must be finite and non-negative", self.alpha)));
        }
        if !(1e-8..=1e-3).contains(&self.fd_step) {
            return Err(Error::Validation(format!("fd_step = {} outside [1e-8, 1e-3]", self.fd_step)));
        }
        if self.quad.index().is_none() {
            return Err(Error::Validation(format!("{} is not a single-mode quadrature", self.quad)));
        }
        self.params.validate()
    }
}

/// `∂/∂κ` of the input-output map at fixed `γ`, `g = γ`, `L`.
fn d_homo(pair: Pair, params: &SystemParams) -> Result<Matrix2<f64>> {
    transfer(pair, params)?;
    let (gamma, kappa, l) = (params.gamma, params.kappa, params.length);
    Ok(match pair {
        Pair::Pt => {
            let b2 = spectral(params).beta_sq;
            let (c, s) = entire::cs(b2, l);
            let d = c + gamma * s;
            // ∂β²/∂κ = 2κ; ∂C/∂β² = −LS/2; ∂S/∂β² = −(S − LC)/(2β²).
            let ds = -2.0 * kappa * entire::conv_ss(b2, l);
            let dd = -kappa * l * s + gamma * ds;
            let off = -kappa * s;
            let d_off = -(s + kappa * ds);
            Matrix2::new(0.0, d_off, d_off, 0.0) / d - Matrix2::new(1.0, off, off, 1.0) * (dd / (d * d))
        }
        Pair::NonPt => {
            let (s, c) = (kappa * l).sin_cos();
            let e = (gamma * l).exp();
            let (sec2, sec_tan) = (1.0 / (c * c), s / (c * c));
            Matrix2::new(e * sec_tan, -sec2, -sec2, sec_tan / e) * l
        }
    })
}

fn single(quad: QuadLabel) -> Result<(Pair, usize)> {
    match quad {
        QuadLabel::Qi0 => Ok((Pair::Pt, 0)),
        QuadLabel::PsL => Ok((Pair::Pt, 1)),
        QuadLabel::Pi0 => Ok((Pair::NonPt, 0)),
        QuadLabel::QsL => Ok((Pair::NonPt, 1)),
        other => Err(Error::Validation(format!("{other} is not a single-mode quadrature"))),
    }
}

/// `χ = ∂⟨x⟩/∂κ` of the configured quadrature.
pub fn susceptibility(cfg: &SensingConfig) -> Result<f64> {
    let (pair, row) = single(cfg.quad)?;
    let inp = &cfg.params.input;
    let means = match pair {
        Pair::Pt => Vector2::new(inp.mean_qi_l, inp.mean_ps_0),
        Pair::NonPt => Vector2::new(inp.mean_pi_l, inp.mean_qs_0),
    };
    Ok((d_homo(pair, &cfg.params)? * means)[row])
}

/// `Δκ⁻² = χ² / Var`.
pub fn inverse_variance(cfg: &SensingConfig) -> Result<f64> {
    let chi = susceptibility(cfg)?;
    Ok(chi * chi / analytic::variance(cfg.quad, &cfg.params)?)
}

/// `dμ/dκ` by Richardson extrapolation of central differences at steps `h` and `h/2`.
pub fn mean_derivative(params: &SystemParams, fd_step: f64) -> Result<Vector4<f64>> {
    let h = fd_step * params.kappa;
    let central = |h: f64| -> Result<Vector4<f64>> {
        let up = output_means(&params.with_kappa(params.kappa + h)?)?;
        let down = output_means(&params.with_kappa(params.kappa - h)?)?;
        Ok((up - down) / (2.0 * h))
    };
    let coarse = central(h)?;
    let fine = central(h / 2.0)?;
    Ok((fine * 4.0 - coarse) / 3.0)
}

/// `F_κ = (dμ/dκ)ᵀ V⁻¹ (dμ/dκ)` through the eigen-decomposition of `V`.
pub fn qfi(cfg: &SensingConfig) -> Result<f64> {
    let v = output_covariance(&cfg.params)?.cov;
    let eig = SymmetricEigen::new(v);
    let (lo, hi) = (eig.eigenvalues.min(), eig.eigenvalues.max());
    if !(lo > 0.0 && hi / lo < CONDITION_LIMIT) {
        return Err(Error::IllConditioned(if lo > 0.0 { hi / lo } else { f64::INFINITY }));
    }
    let dmu = mean_derivative(&cfg.params, cfg.fd_step)?;
    let proj = eig.eigenvectors.transpose() * dmu;
    Ok(proj.iter().zip(eig.eigenvalues.iter()).map(|(p, l)| p * p / l).sum())
}

pub fn ep_qfi_closed_form(alpha: f64, kappa: f64, length: f64) -> f64 {
    closed::ep_qfi(alpha, kappa, length)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CramerRaoRow {
    pub gamma_over_kappa: f64,
    pub two_kappa_l: f64,
    pub qfi: f64,
    /// In [`QuadLabel::SINGLE`] order.
    pub inverse_variance: [f64; 4],
    pub ratio: [f64; 4],
    pub near_optimal: [bool; 4],
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SkippedPoint {
    pub gamma_over_kappa: f64,
    pub two_kappa_l: f64,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CramerRaoReport {
    pub rows: Vec<CramerRaoRow>,
    pub skipped: Vec<SkippedPoint>,
}

impl CramerRaoReport {
    /// Largest `(Δκ⁻² − F_κ)/F_κ` over every row and quadrature.
    pub fn worst_excess(&self) -> f64 {
        self.rows
            .iter()
            .flat_map(|r| r.ratio.iter().map(|x| x - 1.0))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn cramer_rao_row(alpha: f64, ratio: f64, kappa: f64, x: f64) -> Result<CramerRaoRow> {
    let params = SystemParams::from_ratio(ratio, kappa, x)?;
    let base = SensingConfig::new(alpha, params, QuadLabel::Qi0)?;
    let f = qfi(&base)?;
    let mut inverse_variance = [0.0; 4];
    for (slot, quad) in QuadLabel::SINGLE.into_iter().enumerate() {
        inverse_variance[slot] = inverse_variance_of(&SensingConfig { quad, ..base })?;
    }
    let ratio_v = inverse_variance.map(|d| d / f);
    Ok(CramerRaoRow {
        gamma_over_kappa: ratio,
        two_kappa_l: x,
        qfi: f,
        inverse_variance,
        near_optimal: ratio_v.map(|r| r > NEAR_OPTIMAL),
        ratio: ratio_v,
    })
}

fn inverse_variance_of(cfg: &SensingConfig) -> Result<f64> {
    inverse_variance(cfg)
}

/// `Δκ⁻²/F_κ` per quadrature over `ratios × grid` (grid in `2κL`). Points where the
/// map diverges or `V` is ill-conditioned are listed in `skipped`.
pub fn cramer_rao_report(alpha: f64, ratios: &[f64], grid: &[f64], kappa: f64) -> Result<CramerRaoReport> {
    let mut report = CramerRaoReport::default();
    for &r in ratios {
        for &x in grid {
            match cramer_rao_row(alpha, r, kappa, x) {
                Ok(row) => report.rows.push(row),
                Err(e @ (Error::SecularDivergence { .. } | Error::IllConditioned(_) | Error::VanishingDenominator(_))) => {
                    report.skipped.push(SkippedPoint {
                        gamma_over_kappa: r,
                        two_kappa_l: x,
                        reason: e.to_string(),
                    })
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OptimalLength {
    pub n: usize,
    pub nominal: f64,
    /// Argmax of `Δκ⁻²/F_κ` within ±5% of `nominal`.
    pub refined: f64,
    pub ratio_at_refined: f64,
    /// The maximum is interior to the window rather than on its edge.
    pub verified: bool,
}

const WINDOW: f64 = 0.05;
const WINDOW_SAMPLES: usize = 201;

fn sensing_ratio(quad: QuadLabel, params: &SystemParams, length: f64) -> f64 {
    let eval = || -> Result<f64> {
        let cfg = SensingConfig::new(1.0, params.with_length(length)?, quad)?;
        Ok(inverse_variance(&cfg)? / qfi(&cfg)?)
    };
    eval().ok().filter(|r| r.is_finite()).unwrap_or(f64::NEG_INFINITY)
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > 1e-10 * b.abs().max(1.0) {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

fn refine(quad: QuadLabel, params: &SystemParams, n: usize, nominal: f64) -> OptimalLength {
    let f = |l: f64| sensing_ratio(quad, params, l);
    let (lo, hi) = (nominal * (1.0 - WINDOW), nominal * (1.0 + WINDOW));
    let step = (hi - lo) / (WINDOW_SAMPLES - 1) as f64;
    let samples: Vec<f64> = (0..WINDOW_SAMPLES).map(|k| f(lo + k as f64 * step)).collect();
    let best = (0..WINDOW_SAMPLES).max_by(|&i, &j| samples[i].total_cmp(&samples[j])).unwrap_or(0);
    let interior = best > 0 && best + 1 < WINDOW_SAMPLES && samples[best].is_finite();
    let at = lo + best as f64 * step;
    let refined = if interior { golden_max(f, at - step, at + step) } else { at };
    let value = f(refined).max(samples[best]);
    OptimalLength {
        n,
        nominal,
        refined,
        ratio_at_refined: value,
        verified: interior,
    }
}

/// Classical optima: `(2n − 1/2)π/β` for the PT pair, `(2n − 1/2)π/κ` for the other.
pub fn optimal_lengths(quad: QuadLabel, params: &SystemParams, n_max: usize) -> Result<Vec<OptimalLength>> {
    let (pair, _) = single(quad)?;
    let wavenumber = match pair {
        Pair::Pt => {
            let sp = spectral(params);
            if sp.regime != Regime::Unbroken {
                return Err(Error::BrokenRegime(params.ratio()));
            }
            sp.beta.re
        }
        Pair::NonPt => params.kappa,
    };
    Ok((1..=n_max)
        .map(|n| refine(quad, params, n, (2.0 * n as f64 - 0.5) * std::f64::consts::PI / wavenumber))
        .collect())
}

/// Squeezing-assisted points `nπ/κ` of `q_s(L)`.
pub fn quantum_optimal_lengths(params: &SystemParams, n_max: usize) -> Vec<OptimalLength> {
    (1..=n_max)
        .map(|n| refine(QuadLabel::QsL, params, n, n as f64 * std::f64::consts::PI / params.kappa))
        .collect()
}
