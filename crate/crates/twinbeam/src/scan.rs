//! Boundary searches over `2κL` and `γ/κ`.
//!
//! "Quantum" means strictly below the vacuum level: variance `< 1/4 − 1e−9` or signed
//! NF `< −1e−9`. Sweeps skip points within [`GUARD_HALF_WIDTH`] of a secular line.

use std::f64::consts::PI;

use serde::Serialize;

use crate::analytic::{closed, noise_figure, variance};
use crate::error::{Error, Result};
use crate::params::{spectral, Pair, QuadLabel, Regime, SystemParams, VACUUM_VARIANCE};

pub const GUARD_HALF_WIDTH: f64 = 0.02;
pub const QUANTUM_TOL: f64 = 1e-9;
pub const PERIOD_GRID: usize = 2000;
const DUAL_PERIOD_CV: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Observable {
    Variance(QuadLabel),
    NoiseFigure,
}

impl Observable {
    fn pairs(self) -> &'static [Pair] {
        match self {
            Observable::Variance(QuadLabel::Qi0 | QuadLabel::PsL) => &[Pair::Pt],
            Observable::Variance(QuadLabel::Pi0 | QuadLabel::QsL) => &[Pair::NonPt],
            _ => &[Pair::Pt, Pair::NonPt],
        }
    }

    /// Distance below the vacuum reference: `variance − 1/4` or the signed NF.
    pub fn excess(self, params: &SystemParams) -> Result<f64> {
        match self {
            Observable::Variance(l) => Ok(variance(l, params)? - VACUUM_VARIANCE),
            Observable::NoiseFigure => Ok(noise_figure(params)?.signed()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScanSpec {
    pub observable: Observable,
    /// `(lo, hi]` in `2κL`.
    pub window: (f64, f64),
    pub ratio_range: (f64, f64),
    pub resolution: usize,
    pub bisect_tol: f64,
}

impl ScanSpec {
    pub fn new(observable: Observable) -> Self {
        Self {
            observable,
            window: (0.0, 8.0),
            ratio_range: (0.0, 3.0),
            resolution: 800,
            bisect_tol: 1e-4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.window;
        let (rlo, rhi) = self.ratio_range;
        if !(lo >= 0.0 && hi > lo && rlo >= 0.0 && rhi > rlo && self.resolution >= 2 && self.bisect_tol > 0.0) {
            return Err(Error::Validation(format!("malformed scan specification {self:?}")));
        }
        Ok(())
    }
}

/// Secular lines in `(0, hi]` of the given pair at `γ/κ = ratio`.
///
/// The PT map diverges where `βL − ε = π/2 + mπ` (unbroken regime only); the other
/// pair where `κL = π/2 + mπ`.
pub fn secular_points(pair: Pair, ratio: f64, hi: f64) -> Vec<f64> {
    let (first, spacing) = match pair {
        Pair::NonPt => (PI, 2.0 * PI),
        Pair::Pt => {
            if ratio >= 1.0 {
                return Vec::new();
            }
            let beta = (1.0 - ratio * ratio).sqrt();
            let eps = (ratio / beta).atan();
            (2.0 * (PI / 2.0 + eps) / beta, 2.0 * PI / beta)
        }
    };
    (0..).map(|m| first + m as f64 * spacing).take_while(|&x| x <= hi + GUARD_HALF_WIDTH).collect()
}

pub fn in_guard_band(observable: Observable, ratio: f64, x: f64) -> bool {
    observable
        .pairs()
        .iter()
        .flat_map(|&p| secular_points(p, ratio, x + 1.0))
        .any(|s| (x - s).abs() < GUARD_HALF_WIDTH)
}

/// `count` points `lo + k(hi − lo)/count`, `k = 1..=count`, outside the guard bands.
pub fn guarded_grid(observable: Observable, ratio: f64, window: (f64, f64), count: usize) -> Vec<f64> {
    let (lo, hi) = window;
    (1..=count)
        .map(|k| lo + (hi - lo) * k as f64 / count as f64)
        .filter(|&x| !in_guard_band(observable, ratio, x))
        .collect()
}

fn at(ratio: f64, x: f64) -> Result<SystemParams> {
    SystemParams::from_ratio(ratio, 1.0, x)
}

fn bisect(f: impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64, tol: f64) -> Result<f64> {
    let mut fa = f(a)?;
    while b - a > tol {
        let m = 0.5 * (a + b);
        let fm = f(m)?;
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// First sign change of `variance − 1/4` on a guarded grid of `window`, refined by bisection.
pub fn vacuum_crossing(label: QuadLabel, ratio: f64, window: (f64, f64), resolution: usize, tol: f64) -> Result<f64> {
    let obs = Observable::Variance(label);
    let (lo, hi) = window;
    let step = (hi - lo) / resolution as f64;
    let excess = |x: f64| obs.excess(&at(ratio, x)?);
    let mut prev: Option<(f64, f64)> = None;
    for k in 1..=resolution {
        let x = lo + k as f64 * step;
        if in_guard_band(obs, ratio, x) {
            prev = None;
            continue;
        }
        let v = match excess(x) {
            Ok(v) => v,
            Err(Error::SecularDivergence { .. }) => {
                prev = None;
                continue;
            }
            Err(e) => return Err(e),
        };
        if let Some((xp, vp)) = prev {
            if (vp < 0.0) != (v < 0.0) {
                return bisect(excess, xp, x, tol);
            }
        }
        prev = Some((x, v));
    }
    Err(Error::NoCrossing)
}

/// Smallest `2κL > 0` where `⟨Δq_i²(0)⟩` crosses the vacuum level, on `(0, 8]`.
pub fn vacuum_intersection_length(gamma_over_kappa: f64) -> Result<f64> {
    vacuum_crossing(QuadLabel::Qi0, gamma_over_kappa, (0.0, 8.0), 4000, 1e-10)
}

/// The same crossing on the EP curve from its series form: `2x³ = 6x`, `x = κL`.
pub fn ep_vacuum_intersection_series() -> Result<f64> {
    let f = |two_x: f64| Ok(closed::variance_qi0_ep(1.0, two_x / 2.0) - VACUUM_VARIANCE);
    bisect(f, 1.0, 8.0, 1e-12)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NfBoundary {
    pub critical_ratio: f64,
    /// Argmin of the NF over the window at the critical ratio.
    pub argmin_2kl: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WindowMinimum {
    pub value: f64,
    pub at: f64,
}

fn golden_min(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc <= fd {
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
    let x = 0.5 * (a + b);
    (f(x), x)
}

/// Minimum of the observable's excess over the guarded window: grid search, then
/// golden-section between the neighbours of the best grid point.
pub fn window_minimum(spec: &ScanSpec, ratio: f64) -> Result<WindowMinimum> {
    let f = |x: f64| {
        if in_guard_band(spec.observable, ratio, x) {
            return f64::INFINITY;
        }
        at(ratio, x)
            .and_then(|p| spec.observable.excess(&p))
            .ok()
            .filter(|v| v.is_finite())
            .unwrap_or(f64::INFINITY)
    };
    let (lo, hi) = spec.window;
    let step = (hi - lo) / spec.resolution as f64;
    let (mut best, mut best_x) = (f64::INFINITY, lo);
    for k in 1..=spec.resolution {
        let x = lo + k as f64 * step;
        let v = f(x);
        if v < best {
            best = v;
            best_x = x;
        }
    }
    if !best.is_finite() {
        return Err(Error::VanishingDenominator(best));
    }
    let a = (best_x - step).max(lo + 1e-9);
    let b = (best_x + step).min(hi);
    let (v, x) = golden_min(&f, a, b, 1e-9);
    Ok(if v < best { WindowMinimum { value: v, at: x } } else { WindowMinimum { value: best, at: best_x } })
}

/// Largest `γ/κ` in `ratio_range` at which the window minimum changes sign, by bisection.
pub fn nf_boundary(spec: &ScanSpec) -> Result<NfBoundary> {
    spec.validate()?;
    let g = |r: f64| window_minimum(spec, r).map(|m| m.value);
    let (rlo, rhi) = spec.ratio_range;
    let n = 60;
    let mut hi_val = g(rhi)?;
    let mut r_hi = rhi;
    for k in (0..n).rev() {
        let r = rlo + (rhi - rlo) * k as f64 / n as f64;
        let v = g(r)?;
        if (v < -QUANTUM_TOL) != (hi_val < -QUANTUM_TOL) {
            let shifted = |r: f64| g(r).map(|v| v + QUANTUM_TOL);
            let critical = bisect(shifted, r, r_hi, spec.bisect_tol)?;
            return Ok(NfBoundary {
                critical_ratio: critical,
                argmin_2kl: window_minimum(spec, critical)?.at,
            });
        }
        hi_val = v;
        r_hi = r;
    }
    Err(Error::NoTransition)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BoundaryKind {
    /// The EP value is already at or below vacuum, so the EP curve bounds the quantum region.
    Ep,
    /// The EP value is classical; the transition sits at a length-dependent ratio.
    Deviates,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VarianceBoundary {
    pub two_kappa_l: f64,
    pub ep_variance: f64,
    pub kind: BoundaryKind,
    /// Root in `γ/κ` of `variance = 1/4` at this length, when one exists in the range.
    pub critical_ratio: Option<f64>,
}

/// Classical-to-quantum report for a variance observable at fixed `2κL`.
pub fn variance_boundary(label: QuadLabel, two_kappa_l: f64, ratio_range: (f64, f64), tol: f64) -> Result<VarianceBoundary> {
    let obs = Observable::Variance(label);
    let f = |r: f64| obs.excess(&at(r, two_kappa_l)?);
    let ep_excess = f(1.0)?;
    let (rlo, rhi) = ratio_range;
    let n = 300;
    let mut root = None;
    let mut prev: Option<(f64, f64)> = None;
    for k in 0..=n {
        let r = rlo + (rhi - rlo) * k as f64 / n as f64;
        let Ok(v) = f(r) else {
            prev = None;
            continue;
        };
        if let Some((rp, vp)) = prev {
            if (vp < 0.0) != (v < 0.0) {
                root = Some(bisect(f, rp, r, tol)?);
                break;
            }
        }
        prev = Some((r, v));
    }
    Ok(VarianceBoundary {
        two_kappa_l,
        ep_variance: ep_excess + VACUUM_VARIANCE,
        kind: if ep_excess <= QUANTUM_TOL { BoundaryKind::Ep } else { BoundaryKind::Deviates },
        critical_ratio: root,
    })
}

/// Dispatches on the observable: NF gives the window-minimum boundary; variances give
/// the report at the window's upper edge.
pub fn c2q_boundary(spec: &ScanSpec) -> Result<f64> {
    match spec.observable {
        Observable::NoiseFigure => Ok(nf_boundary(spec)?.critical_ratio),
        Observable::Variance(label) => variance_boundary(label, spec.window.1, spec.ratio_range, spec.bisect_tol)?
            .critical_ratio
            .ok_or(Error::NoTransition),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OscillationReport {
    pub peaks: Vec<f64>,
    /// Mean peak spacing; for a dual-period curve, the mean of the two family spacings.
    pub period: f64,
    /// `2π/β` for the PT pair, `2π` for the other; none for mixed quadratures.
    pub expected: Option<f64>,
    pub relative_error: Option<f64>,
    pub dual_period: bool,
    /// Mean spacing within the even- and odd-indexed peak families.
    pub family_periods: Option<[f64; 2]>,
}

/// Local maxima of `values` over `grid`; plateaus count once, at their centre.
fn peaks(grid: &[f64], values: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < values.len() {
        if values[i] > values[i - 1] {
            let mut j = i;
            while j + 1 < values.len() && values[j + 1] == values[i] {
                j += 1;
            }
            if j + 1 < values.len() && values[j + 1] < values[i] {
                out.push(0.5 * (grid[i] + grid[j]));
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Peak spacing of a variance curve; divergent points count as `+∞`, so secular
/// lines register as peaks.
pub fn oscillation_period(label: QuadLabel, gamma_over_kappa: f64, window: (f64, f64)) -> Result<OscillationReport> {
    let prm = at(gamma_over_kappa, 1.0)?;
    if spectral(&prm).regime != Regime::Unbroken {
        return Err(Error::BrokenRegime(gamma_over_kappa));
    }
    let (lo, hi) = window;
    let grid: Vec<f64> = (1..=PERIOD_GRID).map(|k| lo + (hi - lo) * k as f64 / PERIOD_GRID as f64).collect();
    let values = grid
        .iter()
        .map(|&x| match variance(label, &at(gamma_over_kappa, x)?) {
            Ok(v) => Ok(v),
            Err(Error::SecularDivergence { .. }) => Ok(f64::INFINITY),
            Err(e) => Err(e),
        })
        .collect::<Result<Vec<f64>>>()?;
    let found = peaks(&grid, &values);
    if found.len() < 2 {
        return Err(Error::FewerThanTwoPeaks);
    }
    let spacings: Vec<f64> = found.windows(2).map(|w| w[1] - w[0]).collect();
    let raw = mean(&spacings);
    let sd = (spacings.iter().map(|s| (s - raw).powi(2)).sum::<f64>() / spacings.len() as f64).sqrt();
    let dual = sd / raw > DUAL_PERIOD_CV;
    let family = |start: usize| {
        let f: Vec<f64> = found.iter().skip(start).step_by(2).copied().collect();
        (f.len() >= 2).then(|| mean(&f.windows(2).map(|w| w[1] - w[0]).collect::<Vec<_>>()))
    };
    let family_periods = match (family(0), family(1)) {
        (Some(a), Some(b)) if dual => Some([a, b]),
        _ => None,
    };
    let beta = (1.0 - gamma_over_kappa * gamma_over_kappa).sqrt();
    let expected = match label {
        QuadLabel::Qi0 | QuadLabel::PsL => Some(2.0 * PI / beta),
        QuadLabel::Pi0 | QuadLabel::QsL => Some(2.0 * PI),
        QuadLabel::D1 | QuadLabel::D2 => None,
    };
    let period = family_periods.map_or(raw, |[a, b]| 0.5 * (a + b));
    Ok(OscillationReport {
        relative_error: expected.map(|e| (period - e).abs() / e),
        peaks: found,
        period,
        expected,
        dual_period: dual,
        family_periods,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ep_intersection_two_paths() {
        let series = ep_vacuum_intersection_series().unwrap();
        assert_relative_eq!(series, 2.0 * 3f64.sqrt(), epsilon = 1e-10);
        for r in [1.0 - 1e-6, 1.0 + 1e-6] {
            let x = vacuum_intersection_length(r).unwrap();
            assert!((x - 2.0 * 3f64.sqrt()).abs() < 1e-3, "{r}: {x}");
        }
    }

    #[test]
    fn weak_loss_crosses_early() {
        let x = vacuum_intersection_length(0.2).unwrap();
        assert_relative_eq!(x, 0.405_435_193_831_608_5, epsilon = 1e-8);
    }

    #[test]
    fn strong_loss_stays_sub_vacuum() {
        assert!(matches!(vacuum_intersection_length(2.0), Err(Error::NoCrossing)));
        for x in guarded_grid(Observable::Variance(QuadLabel::Qi0), 2.0, (0.0, 8.0), 400) {
            assert!(variance(QuadLabel::Qi0, &at(2.0, x).unwrap()).unwrap() < VACUUM_VARIANCE);
        }
    }

    #[test]
    fn secular_points_match_divergences() {
        for &r in &[0.0, 0.2, 0.7] {
            for s in secular_points(Pair::Pt, r, 20.0) {
                assert!(matches!(variance(QuadLabel::Qi0, &at(r, s).unwrap()), Err(Error::SecularDivergence { .. })), "r={r} s={s}");
            }
        }
        assert!(secular_points(Pair::Pt, 1.3, 20.0).is_empty());
        assert_eq!(secular_points(Pair::NonPt, 0.5, 8.0).len(), 1);
    }

    #[test]
    fn fixed_length_boundaries() {
        let short = variance_boundary(QuadLabel::Qi0, 2.0, (0.0, 3.0), 1e-10).unwrap();
        assert_eq!(short.kind, BoundaryKind::Ep);
        let long = variance_boundary(QuadLabel::Qi0, 5.0, (0.0, 3.0), 1e-10).unwrap();
        assert_eq!(long.kind, BoundaryKind::Deviates);
        assert!(long.critical_ratio.unwrap() > 1.0);
    }

    #[test]
    fn peak_detection_handles_plateaus() {
        let g: Vec<f64> = (0..9).map(f64::from).collect();
        let v = [0.0, 1.0, f64::INFINITY, f64::INFINITY, 1.0, 0.0, 2.0, 0.5, 0.0];
        assert_eq!(peaks(&g, &v), vec![2.5, 6.0]);
    }
}
