//! Gaussian moments by explicit pair-partition enumeration.

use nalgebra::Matrix4;

use crate::analytic::{NoiseFigure, INTENSITY_SIGNS};
use crate::error::{Error, Result};
use crate::params::{CovarianceState, PI0, PSL, QI0, QSL};

/// `⟨x_a x_b x_c x_d⟩` of a zero-mean Gaussian: the three pairings.
pub fn wick_fourth_moment(cov: &Matrix4<f64>, idx: [usize; 4]) -> f64 {
    let [a, b, c, d] = idx;
    cov[(a, b)] * cov[(c, d)] + cov[(a, c)] * cov[(b, d)] + cov[(a, d)] * cov[(b, c)]
}

/// Zero-mean moment of any even order by recursive pairing of the first index.
pub fn isserlis(cov: &Matrix4<f64>, idx: &[usize]) -> f64 {
    match idx.len() {
        0 => 1.0,
        n if n % 2 == 1 => 0.0,
        _ => {
            let first = idx[0];
            let rest = &idx[1..];
            (0..rest.len())
                .map(|k| {
                    let others: Vec<usize> = rest.iter().enumerate().filter(|&(j, _)| j != k).map(|(_, &v)| v).collect();
                    cov[(first, rest[k])] * isserlis(cov, &others)
                })
                .sum()
        }
    }
}

/// Raw moment `⟨Π (μ_a + δx_a)⟩`, expanded over subsets of the centered part.
pub fn raw_moment(state: &CovarianceState, idx: &[usize]) -> f64 {
    let n = idx.len();
    (0..1u32 << n)
        .map(|mask| {
            let mut centered = Vec::with_capacity(n);
            let mut mean_part = 1.0;
            for (j, &a) in idx.iter().enumerate() {
                if mask >> j & 1 == 1 {
                    centered.push(a);
                } else {
                    mean_part *= state.means[a];
                }
            }
            mean_part * isserlis(&state.cov, &centered)
        })
        .sum()
}

/// Relative-intensity noise assembled term by term from single- and two-mode moments.
///
/// Symmetric-ordered moments are the classical Gaussian ones; within one mode
/// `⟨q²p² + p²q²⟩ = 2⟨q²p²⟩_W − 1/4`, and operators of different modes commute.
pub fn nf_wick(state: &CovarianceState) -> Result<NoiseFigure> {
    let m2 = |a: usize| raw_moment(state, &[a, a]);
    let m22 = |a: usize, b: usize| raw_moment(state, &[a, a, b, b]);
    let mode_var = |q: usize, p: usize| {
        m22(q, q) - m2(q).powi(2) + m22(p, p) - m2(p).powi(2) + (2.0 * m22(q, p) - 0.25) - 2.0 * m2(q) * m2(p)
    };
    let idler = [QI0, PI0];
    let signal = [QSL, PSL];
    debug_assert!(idler.iter().all(|&a| INTENSITY_SIGNS[a] > 0.0) && signal.iter().all(|&a| INTENSITY_SIGNS[a] < 0.0));
    let cross: f64 = idler
        .iter()
        .flat_map(|&a| signal.iter().map(move |&b| (a, b)))
        .map(|(a, b)| m22(a, b) - m2(a) * m2(b))
        .sum();
    let variance = mode_var(QI0, PI0) + mode_var(QSL, PSL) - 2.0 * cross;
    let photon_sum = m2(QI0) + m2(PI0) + m2(QSL) + m2(PSL) - 1.0;
    if !(photon_sum > 1e-12) {
        return Err(Error::VanishingDenominator(photon_sum));
    }
    Ok(NoiseFigure { variance, photon_sum })
}
