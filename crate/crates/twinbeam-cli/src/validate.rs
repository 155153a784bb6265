//! Oracle-equivalence and invariant suites behind the `validate` scenario.
//!
//! Each suite reports a worst-case metric against a fixed threshold. Calibration rows
//! compare against published values and are informational only.


use rayon::prelude::*;
use serde::Serialize;
use twinbeam::analytic::{noise_figure, output_covariance, transfer, variance};
use twinbeam::fock::operators::DEFAULT_MARGIN;
use twinbeam::fock::{h_qi_ps, pia_cases, pt_classify, su11_check, Symmetry};
use twinbeam::oracle::{bvp_transfer, commutation_identities, kernel_variance, mc_ensemble, nf_wick, DEFAULT_TOL};
use twinbeam::scan::{
    ep_vacuum_intersection_series, guarded_grid, nf_boundary, oscillation_period, vacuum_intersection_length,
    Observable, ScanSpec,
};
use twinbeam::sensing::{cramer_rao_report, ep_qfi_closed_form, qfi, susceptibility, SensingConfig};
use twinbeam::{symplectic_check, Error, Pair, QuadLabel, SystemParams, VACUUM_VARIANCE};

use crate::settings::Settings;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Info,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub status: Status,
    pub metric: f64,
    pub threshold: f64,
    pub detail: String,
}

impl SuiteResult {
    pub fn failed(&self) -> bool {
        self.status == Status::Fail
    }

    fn check(name: &str, metric: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            status: if metric <= threshold { Status::Pass } else { Status::Fail },
            metric,
            threshold,
            detail: detail.into(),
        }
    }

    fn error(name: &str, threshold: f64, e: Error) -> Self {
        Self {
            name: name.into(),
            status: Status::Fail,
            metric: f64::NAN,
            threshold,
            detail: e.to_string(),
        }
    }
}

fn at(r: f64, x: f64) -> SystemParams {
    SystemParams::from_ratio(r, 1.0, x).expect("grid parameters are valid")
}

/// `γ/κ ∈ [0, 3]` × guarded `2κL ∈ (0, 8]`, 20 × up to 20 points.
pub fn oracle_grid() -> Vec<(f64, f64)> {
    (0..20)
        .map(|i| 3.0 * i as f64 / 19.0)
        .flat_map(|r| {
            guarded_grid(Observable::Variance(QuadLabel::D1), r, (0.0, 8.0), 20)
                .into_iter()
                .map(move |x| (r, x))
        })
        .collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn suite(name: &str, threshold: f64, f: impl FnOnce() -> Result<(f64, String), Error>) -> SuiteResult {
    match f() {
        Ok((metric, detail)) => SuiteResult::check(name, metric, threshold, detail),
        Err(e) => SuiteResult::error(name, threshold, e),
    }
}

pub fn vacuum_baseline() -> SuiteResult {
    suite("vacuum_baseline", 1e-12, || {
        let mut worst: f64 = 0.0;
        for r in [0.0, 0.2, 1.0, 2.0] {
            for l in QuadLabel::SINGLE {
                worst = worst.max((variance(l, &at(r, 0.0))? - VACUUM_VARIANCE).abs());
            }
        }
        Ok((worst, "max |Var − 1/4| at L = 0".into()))
    })
}

pub fn oracle_quadrature() -> SuiteResult {
    suite("oracle_quadrature", 1e-9, || {
        let grid = oracle_grid();
        let worst = grid
            .par_iter()
            .map(|&(r, x)| {
                let p = at(r, x);
                QuadLabel::SINGLE.into_iter().try_fold(0.0f64, |w, l| {
                    let exact = variance(l, &p)?;
                    let tol = DEFAULT_TOL * exact.max(1.0);
                    Ok::<_, Error>(w.max(rel(kernel_variance(l, &p, tol)?, exact)))
                })
            })
            .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))?;
        Ok((worst, format!("max relative deviation over {} points", grid.len())))
    })
}

pub fn oracle_bvp() -> SuiteResult {
    suite("oracle_bvp", 1e-9, || {
        let mut worst: f64 = 0.0;
        for &(r, x) in oracle_grid().iter().step_by(7) {
            let p = at(r, x);
            for pair in [Pair::Pt, Pair::NonPt] {
                let exact = transfer(pair, &p)?.homo;
                let stepped = bvp_transfer(pair, &p, 4096)?;
                worst = worst.max((stepped - exact).abs().max() / exact.abs().max());
            }
        }
        Ok((worst, "stepped propagator vs closed map, 4096 steps".into()))
    })
}

pub fn monte_carlo(s: &Settings) -> SuiteResult {
    suite("monte_carlo", 5.0, || {
        let mut worst: f64 = 0.0;
        for (r, x) in [(0.2, 1.0), (1.0, 3.0), (2.5, 2.0)] {
            let p = at(r, x);
            let e = mc_ensemble(&p, &s.mc)?;
            let exact = output_covariance(&p)?.cov;
            for a in 0..4 {
                for b in 0..4 {
                    worst = worst.max(((e.state.cov[(a, b)] - exact[(a, b)]) / e.cov_stderr[(a, b)]).abs());
                }
            }
        }
        Ok((worst, format!("max |z| of covariance entries, n_traj = {}, seed = {}", s.mc.n_traj, s.mc.seed)))
    })
}

pub fn commutation() -> SuiteResult {
    suite("commutation", 1e-9, || {
        let grid = oracle_grid();
        let worst = grid
            .par_iter()
            .map(|&(r, x)| {
                let [a, b] = commutation_identities(&at(r, x), DEFAULT_TOL)?;
                Ok::<_, Error>((a - 1.0).abs().max((b - 1.0).abs()))
            })
            .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))?;
        Ok((worst, "max |identity − 1|".into()))
    })
}

pub fn physicality() -> SuiteResult {
    suite("physicality", 0.0, || {
        let mut bad = 0usize;
        for (r, x) in oracle_grid() {
            let rep = symplectic_check(&output_covariance(&at(r, x))?)?;
            bad += usize::from(!(rep.psd && rep.uncertainty_ok));
        }
        Ok((bad as f64, "points violating V + iΩ/4 ≥ 0".into()))
    })
}

pub fn wick_noise_figure() -> SuiteResult {
    suite("wick_noise_figure", 1e-9, || {
        let mut worst: f64 = 0.0;
        for k in 1..=10 {
            let p = at(0.15 * k as f64, 0.7 * k as f64);
            let Ok(state) = output_covariance(&p) else { continue };
            worst = worst.max(rel(nf_wick(&state)?.ratio(), noise_figure(&p)?.ratio()));
        }
        Ok((worst, "fourth-moment assembly vs covariance form".into()))
    })
}

pub fn ep_susceptibility() -> SuiteResult {
    suite("ep_susceptibility", 1e-6, || {
        let p = SystemParams::type_i(1.0 - 1e-6, 1.0, 1.0)?;
        let chi = susceptibility(&SensingConfig::new(2.0, p, QuadLabel::Qi0)?)?;
        Ok(((chi + 2.0 / 3.0).abs(), format!("chi = {chi:.12}")))
    })
}

pub fn cramer_rao() -> SuiteResult {
    suite("cramer_rao", 1e-9, || {
        let mut worst = f64::NEG_INFINITY;
        let mut rows = 0;
        for r in [0.2, 1.0, 2.0] {
            let grid = guarded_grid(Observable::Variance(QuadLabel::D1), r, (0.0, 8.0), 400);
            let rep = cramer_rao_report(2.0, &[r], &grid, 1.0)?;
            rows += rep.rows.len();
            worst = worst.max(rep.worst_excess());
        }
        Ok((worst, format!("max (Δκ⁻² − F)/F over {rows} points")))
    })
}

pub fn ep_qfi() -> SuiteResult {
    suite("ep_qfi", 1e-3, || {
        let mut worst: f64 = 0.0;
        for k in 1..=10 {
            let l = 0.35 * k as f64;
            let p = SystemParams::type_i(1.0 - 1e-6, 1.0, l)?;
            let f = qfi(&SensingConfig::new(2.0, p, QuadLabel::Qi0)?)?;
            worst = worst.max(rel(f, ep_qfi_closed_form(2.0, 1.0, l)));
        }
        Ok((worst, "relative deviation on 10 lengths".into()))
    })
}

pub fn ep_vacuum_intersection() -> SuiteResult {
    suite("ep_vacuum_intersection", 1e-3, || {
        let target = 2.0 * 3f64.sqrt();
        let mut worst = (ep_vacuum_intersection_series()? - target).abs();
        for r in [1.0 - 1e-6, 1.0 + 1e-6] {
            worst = worst.max((vacuum_intersection_length(r)? - target).abs());
        }
        Ok((worst, "series root and bisection at γ = κ(1 ∓ 1e-6)".into()))
    })
}

pub fn oscillation_periods() -> SuiteResult {
    suite("oscillation_periods", 0.02, || {
        let pt = oscillation_period(QuadLabel::Qi0, 0.2, (0.0, 20.0))?;
        let herm = oscillation_period(QuadLabel::Qi0, 0.0, (0.0, 20.0))?;
        let worst = pt.relative_error.unwrap_or(f64::INFINITY).max(herm.relative_error.unwrap_or(f64::INFINITY));
        Ok((worst, format!("periods {:.4} and {:.4}", pt.period, herm.period)))
    })
}

pub fn symmetry() -> SuiteResult {
    suite("symmetry", 1e-12, || {
        let cases = pia_cases();
        let classified = pt_classify(&h_qi_ps(0.5, 1.0)) == Symmetry::Pt
            && cases.len() == 8
            && cases.iter().all(|c| c.symmetry == Symmetry::Neither);
        let su = su11_check(10, DEFAULT_MARGIN);
        let metric = if classified { su.max_residual } else { f64::INFINITY };
        Ok((metric, format!("PT/PIA classification {classified}, SU(1,1) residual {:.2e}", su.max_residual)))
    })
}

pub fn period_at_pi() -> SuiteResult {
    suite("non_pt_period", 0.02, || {
        let r = oscillation_period(QuadLabel::QsL, 0.5, (0.0, 20.0))?;
        Ok((r.relative_error.unwrap_or(f64::INFINITY), format!("qs_L period {:.4} vs 2π", r.period)))
    })
}

/// Published boundary γ/κ ≈ 0.52 against the window-minimum definition.
pub fn nf_boundary_calibration() -> SuiteResult {
    let spec = ScanSpec::new(Observable::NoiseFigure);
    match nf_boundary(&spec) {
        Ok(b) => SuiteResult {
            name: "nf_boundary_calibration".into(),
            status: Status::Info,
            metric: b.critical_ratio,
            threshold: 0.52,
            detail: format!("window minimum at 2κL = {:.3e}", b.argmin_2kl),
        },
        Err(e) => SuiteResult {
            status: Status::Info,
            ..SuiteResult::error("nf_boundary_calibration", 0.52, e)
        },
    }
}

/// Smallest `2κL` on a 400-point grid with `d1` below vacuum, for `γ/κ < 1`.
pub fn d1_calibration() -> SuiteResult {
    let first = [0.2, 0.5, 0.8].into_iter().find_map(|r| {
        guarded_grid(Observable::Variance(QuadLabel::D1), r, (0.0, 8.0), 400)
            .into_iter()
            .find(|&x| variance(QuadLabel::D1, &at(r, x)).is_ok_and(|v| v < VACUUM_VARIANCE - 1e-9))
            .map(|x| (r, x))
    });
    SuiteResult {
        name: "d1_unbroken_calibration".into(),
        status: Status::Info,
        metric: first.map_or(f64::NAN, |(_, x)| x),
        threshold: f64::NAN,
        detail: match first {
            Some((r, x)) => format!("d1 below vacuum at γ/κ = {r}, 2κL = {x}"),
            None => "d1 stays at or above vacuum for γ/κ < 1".into(),
        },
    }
}

pub fn run_all(s: &Settings) -> Vec<SuiteResult> {
    let suites: Vec<Box<dyn Fn() -> SuiteResult + Sync + '_>> = vec![
        Box::new(vacuum_baseline),
        Box::new(oracle_quadrature),
        Box::new(oracle_bvp),
        Box::new(|| monte_carlo(s)),
        Box::new(commutation),
        Box::new(physicality),
        Box::new(wick_noise_figure),
        Box::new(ep_susceptibility),
        Box::new(cramer_rao),
        Box::new(ep_qfi),
        Box::new(ep_vacuum_intersection),
        Box::new(oscillation_periods),
        Box::new(period_at_pi),
        Box::new(symmetry),
        Box::new(nf_boundary_calibration),
        Box::new(d1_calibration),
    ];
    suites.par_iter().map(|f| f()).collect()
}
