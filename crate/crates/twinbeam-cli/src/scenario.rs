//! Figure scenarios: curve definitions and pointwise evaluation.

use rayon::prelude::*;
use serde::Serialize;
use twinbeam::analytic::{noise_figure, transfer, variance};
use twinbeam::params::regime;
use twinbeam::scan::{in_guard_band, Observable};
use twinbeam::sensing::{inverse_variance, qfi, susceptibility, SensingConfig};
use twinbeam::{Error, InputState, Pair, QuadLabel, SystemParams, VACUUM_VARIANCE};

use crate::settings::Settings;
use crate::validate::{self, SuiteResult};
use crate::CliError;

pub const SCENARIOS: [&str; 10] = [
    "fig2", "fig3", "fig4", "fig5", "figS1", "figS2", "figS3", "figS4", "figS5", "validate",
];

const SENSING_SETS: [(f64, f64, f64); 3] = [(2.0, 0.2, 1.0), (2.0, 1.0, 1.0), (2.0, 2.0, 1.0)];

#[derive(Clone, Copy, Debug, PartialEq)]
enum Eval {
    Variance(QuadLabel),
    Vacuum,
    NfTransformed,
    NfSigned,
    Susceptibility(QuadLabel),
    InverseVariance(QuadLabel),
    Qfi,
    /// `Δκ⁻²/F_κ`.
    Ratio(QuadLabel),
}

impl Eval {
    fn observable(self) -> Option<Observable> {
        match self {
            Eval::Vacuum => None,
            Eval::Variance(l) | Eval::Susceptibility(l) | Eval::InverseVariance(l) => Some(Observable::Variance(l)),
            Eval::NfTransformed | Eval::NfSigned => Some(Observable::NoiseFigure),
            // F_κ couples both pairs.
            Eval::Qfi | Eval::Ratio(_) => Some(Observable::Variance(QuadLabel::D1)),
        }
    }

    fn name(self) -> String {
        match self {
            Eval::Variance(l) => format!("var_{l}"),
            Eval::Vacuum => "vacuum".into(),
            Eval::NfTransformed => "nf_lg".into(),
            Eval::NfSigned => "nf".into(),
            Eval::Susceptibility(l) => format!("chi_{l}"),
            Eval::InverseVariance(l) => format!("dk_{l}"),
            Eval::Qfi => "qfi".into(),
            Eval::Ratio(l) => format!("ratio_{l}"),
        }
    }
}

#[derive(Clone, Debug)]
struct Job {
    file: String,
    label: String,
    gamma: f64,
    alpha: f64,
    input: InputState,
    eval: Eval,
    reference: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Curve {
    pub file: String,
    pub label: String,
    pub observable: String,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub regime: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioResult {
    pub scenario: String,
    pub curves: Vec<Curve>,
    pub warnings: Vec<String>,
    pub suites: Vec<SuiteResult>,
}

impl ScenarioResult {
    pub fn failed_suites(&self) -> Vec<&str> {
        self.suites.iter().filter(|s| s.failed()).map(|s| s.name.as_str()).collect()
    }
}

fn ratio_label(r: f64) -> String {
    format!("gamma/kappa={r}")
}

fn tag(r: f64) -> String {
    format!("r{r}")
}

/// Built-in `γ/κ` values unless `--gamma` fixes a single one.
fn ratios(s: &Settings, builtin: &[f64]) -> Vec<f64> {
    match s.gamma {
        Some(g) => vec![g / s.kappa],
        None => builtin.to_vec(),
    }
}

fn sensing_sets(s: &Settings) -> Vec<(f64, f64)> {
    match s.gamma {
        Some(g) => vec![(s.alpha, g / s.kappa)],
        None => SENSING_SETS.iter().map(|&(a, g, k)| (a, g / k)).collect(),
    }
}

fn job(s: &Settings, file: String, label: String, ratio: f64, eval: Eval) -> Job {
    Job {
        file,
        label,
        gamma: ratio * s.kappa,
        alpha: s.alpha,
        input: InputState::vacuum(),
        eval,
        reference: false,
    }
}

fn variance_jobs(s: &Settings, fig: &str, labels: &[QuadLabel], builtin: &[f64], hermitian: bool, input: InputState) -> Vec<Job> {
    let mut jobs = Vec::new();
    for &l in labels {
        for r in ratios(s, builtin) {
            jobs.push(Job {
                input,
                ..job(s, format!("{fig}_{l}_{}", tag(r)), ratio_label(r), r, Eval::Variance(l))
            });
        }
        if hermitian {
            jobs.push(Job {
                input,
                reference: true,
                ..job(s, format!("{fig}_{l}_hermitian"), "hermitian".into(), 0.0, Eval::Variance(l))
            });
        }
        jobs.push(Job {
            reference: true,
            ..job(s, format!("{fig}_{l}_vacuum"), "vacuum".into(), 0.0, Eval::Vacuum)
        });
    }
    jobs
}

fn sensing_jobs(s: &Settings, fig: &str, evals: &[Eval], sets: &[(f64, f64)]) -> Vec<Job> {
    let mut jobs = Vec::new();
    for &(alpha, r) in sets {
        for &e in evals {
            jobs.push(Job {
                alpha,
                ..job(
                    s,
                    format!("{fig}_{}_{}", e.name(), tag(r)),
                    format!("alpha={alpha};gamma/kappa={r}"),
                    r,
                    e,
                )
            });
        }
    }
    jobs
}

fn jobs(name: &str, s: &Settings) -> Result<Vec<Job>, CliError> {
    use QuadLabel::*;
    let single = QuadLabel::SINGLE;
    Ok(match name {
        "fig2" => variance_jobs(s, "fig2", &[Qi0, PsL, QsL, Pi0], &[0.2, 1.0, 2.0], true, InputState::vacuum()),
        "fig3" => variance_jobs(s, "fig3", &[D1, D2], &[0.2, 1.0, 2.0], true, InputState::vacuum()),
        "fig4" => {
            let mut v: Vec<Job> = ratios(s, &[0.2, 0.3, 0.6, 1.0, 2.0])
                .into_iter()
                .map(|r| job(s, format!("fig4_nf_lg_{}", tag(r)), ratio_label(r), r, Eval::NfTransformed))
                .collect();
            v.push(Job {
                reference: true,
                ..job(s, "fig4_nf_lg_hermitian".into(), "hermitian".into(), 0.0, Eval::NfTransformed)
            });
            v
        }
        "figS1" => [Eval::NfTransformed, Eval::NfSigned]
            .into_iter()
            .map(|e| Job {
                reference: true,
                ..job(s, format!("figS1_{}_hermitian", e.name()), "hermitian".into(), 0.0, e)
            })
            .collect(),
        "fig5" => {
            let mut evals: Vec<Eval> = single.iter().map(|&l| Eval::InverseVariance(l)).collect();
            evals.push(Eval::Qfi);
            sensing_jobs(s, "fig5", &evals, &sensing_sets(s))
        }
        "figS2" => {
            let sets: Vec<(f64, f64)> = ratios(s, &[0.2, 1.0, 1.2]).into_iter().map(|r| (s.alpha, r)).collect();
            let evals: Vec<Eval> = single.iter().map(|&l| Eval::Susceptibility(l)).collect();
            sensing_jobs(s, "figS2", &evals, &sets)
        }
        "figS3" => variance_jobs(s, "figS3", &single, &[0.2, 1.0, 2.0], false, InputState::two_photon(s.alpha)),
        "figS4" => {
            let evals: Vec<Eval> = single.iter().map(|&l| Eval::Ratio(l)).collect();
            sensing_jobs(s, "figS4", &evals, &sensing_sets(s))
        }
        "figS5" => {
            let sets: Vec<(f64, f64)> = ratios(s, &[0.98, 1.02]).into_iter().map(|r| (s.alpha, r)).collect();
            let mut evals: Vec<Eval> = single.iter().map(|&l| Eval::InverseVariance(l)).collect();
            evals.push(Eval::Qfi);
            evals.extend(single.iter().map(|&l| Eval::Ratio(l)));
            sensing_jobs(s, "figS5", &evals, &sets)
        }
        "validate" => Vec::new(),
        other => return Err(CliError::Usage(format!("unknown scenario {other:?}; expected one of {}", SCENARIOS.join(", ")))),
    })
}

enum Point {
    Value(f64, bool),
    Guard,
    Divergent,
}

fn evaluate(job: &Job, s: &Settings, x: f64) -> Result<Point, Error> {
    if job.eval == Eval::Vacuum {
        return Ok(Point::Value(VACUUM_VARIANCE, false));
    }
    let ratio = job.gamma / s.kappa;
    if job.eval.observable().is_some_and(|o| in_guard_band(o, ratio, x)) {
        return Ok(Point::Guard);
    }
    let length = x / (2.0 * s.kappa);
    let params = SystemParams::new(s.g.unwrap_or(job.gamma), job.gamma, s.kappa, length)?.with_input(job.input)?;
    let ep_series = transfer(Pair::Pt, &params).map(|t| t.ep_series).unwrap_or(false);
    let sensing = |quad| SensingConfig::new(job.alpha, params, quad);
    let value = match job.eval {
        Eval::Variance(l) => variance(l, &params),
        Eval::NfTransformed => noise_figure(&params).map(|n| n.transformed()),
        Eval::NfSigned => noise_figure(&params).map(|n| n.signed()),
        Eval::Susceptibility(l) => sensing(l).and_then(|c| susceptibility(&c)),
        Eval::InverseVariance(l) => sensing(l).and_then(|c| inverse_variance(&c)),
        Eval::Qfi => sensing(QuadLabel::Qi0).and_then(|c| qfi(&c)),
        Eval::Ratio(l) => sensing(l).and_then(|c| Ok(inverse_variance(&c)? / qfi(&c)?)),
        Eval::Vacuum => unreachable!(),
    };
    match value {
        Ok(v) => Ok(Point::Value(v, ep_series)),
        Err(Error::SecularDivergence { .. } | Error::IllConditioned(_) | Error::VanishingDenominator(_)) => {
            Ok(Point::Divergent)
        }
        Err(e) => Err(e),
    }
}

fn run_job(job: &Job, s: &Settings) -> Result<(Curve, Vec<String>), Error> {
    let mut curve = Curve {
        file: job.file.clone(),
        label: job.label.clone(),
        observable: job.eval.name(),
        grid: Vec::new(),
        values: Vec::new(),
        regime: Vec::new(),
    };
    let regime_label = if job.reference {
        "reference".to_string()
    } else {
        regime(job.gamma, s.kappa).to_string()
    };
    let (mut guard, mut divergent, mut series) = (0, 0, 0);
    for x in s.grid.points() {
        match evaluate(job, s, x)? {
            Point::Value(v, ep) => {
                curve.grid.push(x);
                curve.values.push(v);
                curve.regime.push(regime_label.clone());
                series += usize::from(ep);
            }
            Point::Guard => guard += 1,
            Point::Divergent => divergent += 1,
        }
    }
    let mut warnings = Vec::new();
    if guard > 0 {
        warnings.push(format!("{}: skipped {guard} points inside secular guard bands", job.file));
    }
    if divergent > 0 {
        warnings.push(format!("{}: skipped {divergent} divergent or ill-conditioned points", job.file));
    }
    if series > 0 {
        warnings.push(format!("{}: {series} points evaluated on the exceptional-point series branch", job.file));
    }
    Ok((curve, warnings))
}

/// Evaluates a scenario without touching the filesystem.
pub fn compute(name: &str, s: &Settings) -> Result<ScenarioResult, CliError> {
    let jobs = jobs(name, s)?;
    let body = || -> Result<ScenarioResult, CliError> {
        let done = jobs.par_iter().map(|j| run_job(j, s)).collect::<Result<Vec<_>, Error>>()?;
        let mut result = ScenarioResult {
            scenario: name.to_string(),
            curves: Vec::with_capacity(done.len()),
            warnings: Vec::new(),
            suites: Vec::new(),
        };
        for (curve, warnings) in done {
            result.curves.push(curve);
            result.warnings.extend(warnings);
        }
        if name == "validate" {
            result.suites = validate::run_all(s);
        }
        Ok(result)
    };
    match s.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(e.to_string()))?
            .install(body),
        None => body(),
    }
}
