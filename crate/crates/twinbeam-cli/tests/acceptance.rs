//! One line per acceptance criterion; exits nonzero if any criterion fails.

use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use twinbeam::analytic::{output_covariance, variance};
use twinbeam::fock::operators::DEFAULT_MARGIN;
use twinbeam::fock::{h_qi_ps, pia_cases, pt_classify, su11_check, Symmetry};
use twinbeam::oracle::{commutation_identities, kernel_variance, mc_ensemble, McConfig, DEFAULT_TOL};
use twinbeam::scan::{
    ep_vacuum_intersection_series, guarded_grid, nf_boundary, oscillation_period, vacuum_intersection_length,
    Observable, ScanSpec,
};
use twinbeam::sensing::{cramer_rao_report, ep_qfi_closed_form, qfi, susceptibility, SensingConfig};
use twinbeam::{QuadLabel, SystemParams, VACUUM_VARIANCE};
use twinbeam_cli::{run_scenario, Format, Overrides, SCENARIOS};

const VACUUM_TOL: f64 = 1e-12;
const VACUUM_RUNTIME: Duration = Duration::from_secs(1);
const ORACLE_REL_TOL: f64 = 1e-9;
const MC_Z_LIMIT: f64 = 5.0;
const MC_TRAJ: u64 = 100_000;
const MC_SEED: u64 = 20_240_517;
const ORACLE_RUNTIME: Duration = Duration::from_secs(120);
const COMMUTATOR_TOL: f64 = 1e-9;
const EP_CHI: f64 = -2.0 / 3.0;
const EP_CHI_TOL: f64 = 1e-6;
const EP_OFFSET: f64 = 1e-6;
const CRAMER_RAO_SLACK: f64 = 1e-9;
const EP_QFI_TOL: f64 = 1e-3;
const NF_BOUNDARY: f64 = 0.52;
const NF_BOUNDARY_TOL: f64 = 0.02;
const NF_RUNTIME: Duration = Duration::from_secs(60);
const INTERSECTION_TOL: f64 = 1e-3;
const PERIOD_TOL: f64 = 0.02;
const SU11_TOL: f64 = 1e-12;
const SUB_VACUUM_TOL: f64 = 1e-9;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn at(r: f64, x: f64) -> SystemParams {
    SystemParams::from_ratio(r, 1.0, x).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// 20 ratios in [0, 3] × 20 lengths in (0, 8], guard bands removed.
fn grid() -> Vec<(f64, f64)> {
    (0..20)
        .map(|i| 3.0 * i as f64 / 19.0)
        .flat_map(|r| {
            guarded_grid(Observable::Variance(QuadLabel::D1), r, (0.0, 8.0), 20)
                .into_iter()
                .map(move |x| (r, x))
        })
        .collect()
}

fn vacuum_baseline() -> Outcome {
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    for r in [0.0, 0.2, 0.5, 1.0, 2.0, 3.0] {
        for l in QuadLabel::SINGLE {
            worst = worst.max((variance(l, &at(r, 0.0)).unwrap() - VACUUM_VARIANCE).abs());
        }
    }
    let el = t.elapsed();
    outcome(
        worst <= VACUUM_TOL && el < VACUUM_RUNTIME,
        format!("max |Var - 1/4| = {worst:.1e} (tol {VACUUM_TOL:.0e}), {el:.2?} (limit {VACUUM_RUNTIME:?})"),
    )
}

fn oracle_equivalence() -> Outcome {
    let t = Instant::now();
    let pts = grid();
    let cfg = McConfig {
        n_traj: MC_TRAJ,
        seed: MC_SEED,
        ..McConfig::default()
    };
    let (quad, z) = pts
        .par_iter()
        .map(|&(r, x)| {
            let p = at(r, x);
            let mut q: f64 = 0.0;
            for l in QuadLabel::SINGLE {
                let exact = variance(l, &p).unwrap();
                let k = kernel_variance(l, &p, DEFAULT_TOL * exact.max(1.0)).unwrap();
                q = q.max(rel(k, exact));
            }
            let e = mc_ensemble(&p, &cfg).unwrap();
            let exact = output_covariance(&p).unwrap().cov;
            let mut z: f64 = 0.0;
            for a in 0..4 {
                for b in a..4 {
                    z = z.max(((e.state.cov[(a, b)] - exact[(a, b)]) / e.cov_stderr[(a, b)]).abs());
                }
            }
            (q, z)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    let el = t.elapsed();
    outcome(
        quad <= ORACLE_REL_TOL && z < MC_Z_LIMIT && el < ORACLE_RUNTIME,
        format!(
            "{} points: quadrature rel {quad:.1e} (tol {ORACLE_REL_TOL:.0e}), MC max |z| {z:.2} (limit {MC_Z_LIMIT}), {el:.1?} (limit {ORACLE_RUNTIME:?})",
            pts.len()
        ),
    )
}

fn commutation() -> Outcome {
    let worst = grid()
        .par_iter()
        .map(|&(r, x)| {
            let [a, b] = commutation_identities(&at(r, x), DEFAULT_TOL).unwrap();
            (a - 1.0).abs().max((b - 1.0).abs())
        })
        .reduce(|| 0.0, f64::max);
    outcome(worst <= COMMUTATOR_TOL, format!("max |identity - 1| = {worst:.1e} (tol {COMMUTATOR_TOL:.0e})"))
}

fn ep_susceptibility() -> Outcome {
    let p = SystemParams::type_i(1.0 - EP_OFFSET, 1.0, 1.0).unwrap();
    let chi = susceptibility(&SensingConfig::new(2.0, p, QuadLabel::Qi0).unwrap()).unwrap();
    let err = (chi - EP_CHI).abs();
    outcome(err <= EP_CHI_TOL, format!("chi = {chi:.10} vs -2/3, |diff| {err:.1e} (tol {EP_CHI_TOL:.0e})"))
}

fn cramer_rao() -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    let mut rows = 0;
    let mut skipped = 0;
    for (alpha, gamma, kappa) in [(2.0, 0.2, 1.0), (2.0, 1.0, 1.0), (2.0, 2.0, 1.0)] {
        let r = gamma / kappa;
        let pts = guarded_grid(Observable::Variance(QuadLabel::D1), r, (0.0, 8.0), 400);
        let rep = cramer_rao_report(alpha, &[r], &pts, kappa).unwrap();
        rows += rep.rows.len();
        skipped += rep.skipped.len();
        worst = worst.max(rep.worst_excess());
    }
    outcome(
        worst <= CRAMER_RAO_SLACK,
        format!("{rows} points ({skipped} ill-conditioned skipped): max (dk - F)/F = {worst:.2e} (slack {CRAMER_RAO_SLACK:.0e})"),
    )
}

fn ep_qfi() -> Outcome {
    let mut worst: f64 = 0.0;
    for k in 1..=10 {
        let l = 0.35 * k as f64;
        let p = SystemParams::type_i(1.0 - EP_OFFSET, 1.0, l).unwrap();
        let f = qfi(&SensingConfig::new(2.0, p, QuadLabel::Qi0).unwrap()).unwrap();
        worst = worst.max(rel(f, ep_qfi_closed_form(2.0, 1.0, l)));
    }
    outcome(worst <= EP_QFI_TOL, format!("10 lengths: max rel {worst:.1e} (tol {EP_QFI_TOL:.0e})"))
}

fn c2q_boundary() -> Outcome {
    let t = Instant::now();
    let r = nf_boundary(&ScanSpec::new(Observable::NoiseFigure));
    let el = t.elapsed();
    match r {
        Ok(b) => outcome(
            (b.critical_ratio - NF_BOUNDARY).abs() <= NF_BOUNDARY_TOL && el < NF_RUNTIME,
            format!(
                "r* = {:.4} (target {NF_BOUNDARY} ± {NF_BOUNDARY_TOL}), window minimum at 2kL = {:.1e}, {el:.2?} (limit {NF_RUNTIME:?})",
                b.critical_ratio, b.argmin_2kl
            ),
        ),
        Err(e) => outcome(false, format!("{e}")),
    }
}

fn intersection() -> Outcome {
    let target = 2.0 * 3f64.sqrt();
    let series = ep_vacuum_intersection_series().unwrap();
    let lo = vacuum_intersection_length(1.0 - EP_OFFSET).unwrap();
    let hi = vacuum_intersection_length(1.0 + EP_OFFSET).unwrap();
    let worst = [series, lo, hi].iter().map(|x| (x - target).abs()).fold(0.0, f64::max);
    outcome(
        worst <= INTERSECTION_TOL,
        format!("series {series:.6}, bisection {lo:.6} / {hi:.6} vs 2√3 (tol {INTERSECTION_TOL:.0e})"),
    )
}

fn periods() -> Outcome {
    let pt = oscillation_period(QuadLabel::Qi0, 0.2, (0.0, 20.0)).unwrap();
    let herm = oscillation_period(QuadLabel::Qi0, 0.0, (0.0, 20.0)).unwrap();
    let beta = (1.0f64 - 0.04).sqrt();
    let e_pt = rel(pt.period, 2.0 * std::f64::consts::PI / beta);
    let e_h = rel(herm.period, 2.0 * std::f64::consts::PI);
    outcome(
        e_pt <= PERIOD_TOL && e_h <= PERIOD_TOL,
        format!("γ/κ=0.2: {:.4} (rel {e_pt:.1e}); Hermitian: {:.4} (rel {e_h:.1e}); tol {PERIOD_TOL}", pt.period, herm.period),
    )
}

fn symmetry() -> Outcome {
    let pt = pt_classify(&h_qi_ps(0.5, 1.0)) == Symmetry::Pt;
    let cases = pia_cases();
    let neither = cases.len() == 8 && cases.iter().all(|c| c.symmetry == Symmetry::Neither);
    let su = su11_check(10, DEFAULT_MARGIN).max_residual;
    outcome(
        pt && neither && su < SU11_TOL,
        format!("H(qi,ps) PT: {pt}; {} PIA cases all Neither: {neither}; SU(1,1) residual {su:.1e} (tol {SU11_TOL:.0e})", cases.len()),
    )
}

/// First grid point with `label` below vacuum at `γ/κ = r`.
fn first_sub_vacuum(label: QuadLabel, r: f64) -> Option<f64> {
    guarded_grid(Observable::Variance(label), r, (0.0, 8.0), 400)
        .into_iter()
        .find(|&x| variance(label, &at(r, x)).is_ok_and(|v| v < VACUUM_VARIANCE - SUB_VACUUM_TOL))
}

/// Guarded grid points with `label` below vacuum at `γ/κ = r`.
fn sub_vacuum_points(label: QuadLabel, r: f64) -> Vec<f64> {
    guarded_grid(Observable::Variance(label), r, (0.0, 8.0), 400)
        .into_iter()
        .filter(|&x| variance(label, &at(r, x)).is_ok_and(|v| v < VACUUM_VARIANCE - SUB_VACUUM_TOL))
        .collect()
}

fn squeezing() -> Outcome {
    let strong = first_sub_vacuum(QuadLabel::Qi0, 2.0);
    let reference = first_sub_vacuum(QuadLabel::QsL, 0.0).unwrap_or(f64::INFINITY);
    let earlier: Vec<(f64, Option<f64>)> = [0.2, 1.0, 2.0].map(|r| (r, first_sub_vacuum(QuadLabel::QsL, r))).to_vec();
    let loss_induced = earlier.iter().all(|(_, x)| x.is_some_and(|x| x < reference));
    let d1_unbroken: Vec<(f64, Option<f64>)> = [0.2, 0.5, 0.8].map(|r| (r, first_sub_vacuum(QuadLabel::D1, r))).to_vec();
    let d1_broken: Vec<(f64, Option<f64>)> = [1.0, 1.5, 2.0].map(|r| (r, first_sub_vacuum(QuadLabel::D1, r))).to_vec();
    let d1_ok = d1_unbroken.iter().all(|(_, x)| x.is_none()) && d1_broken.iter().all(|(_, x)| x.is_some());
    // Extent of the d1 sub-vacuum set below the EP, reported for diagnosis only.
    let extents: Vec<String> = [0.2, 0.5, 0.8]
        .map(|r| {
            let pts = sub_vacuum_points(QuadLabel::D1, r);
            format!("{r}: {} pts in [{:.2}, {:.2}]", pts.len(), pts.first().unwrap_or(&f64::NAN), pts.last().unwrap_or(&f64::NAN))
        })
        .to_vec();
    outcome(
        strong.is_some() && loss_induced && d1_ok,
        format!(
            "qi0 sub-vacuum at γ/κ=2 from {strong:?}; first qs_L dips {earlier:?} vs Hermitian {reference}; \
             d1 first dips γ/κ<1 {d1_unbroken:?}, γ/κ≥1 {d1_broken:?}; d1 sub-vacuum extent below EP {extents:?}"
        ),
    )
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().into_string().unwrap(), fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

fn determinism() -> Outcome {
    let mut mismatched = Vec::new();
    let mut files = 0;
    for name in SCENARIOS {
        let runs: Vec<_> = [1usize, 8, 1]
            .into_iter()
            .map(|threads| {
                let dir = tempfile::tempdir().unwrap();
                let o = Overrides {
                    threads: Some(threads),
                    seed: Some(MC_SEED),
                    ..Overrides::default()
                };
                run_scenario(name, &o, dir.path(), Format::Csv).unwrap();
                snapshot(dir.path())
            })
            .collect();
        files += runs[0].len();
        if runs[0] != runs[1] || runs[0] != runs[2] {
            mismatched.push(name);
        }
    }
    outcome(
        mismatched.is_empty(),
        format!("{} scenarios, {files} files, 1/8/1 threads; mismatched: {mismatched:?}", SCENARIOS.len()),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("vacuum baseline", vacuum_baseline),
        ("oracle equivalence", oracle_equivalence),
        ("commutation preservation", commutation),
        ("EP susceptibility", ep_susceptibility),
        ("Cramér-Rao bound", cramer_rao),
        ("EP QFI closed form", ep_qfi),
        ("C2Q NF boundary", c2q_boundary),
        ("EP-curve/vacuum intersection", intersection),
        ("oscillation periods", periods),
        ("symmetry classification", symmetry),
        ("squeezing existence", squeezing),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        failed += usize::from(!o.pass);
        println!("criterion {:2} {} {name}: {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
