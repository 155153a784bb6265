//! Monte Carlo ensembles of the stochastic boundary-value problem.
//!
//! Each realization draws the four input quadratures and the Langevin noise of both
//! pairs, then maps them to the outputs with the exact linear rearrangement of the
//! forward propagator. The noise of step `[z_k, z_{k+1}]` enters through the
//! response it excites at `z = L`, `η_k = ∫ Φ(L − z) e₂ f(z) dz`; its 2×2 covariance
//! `(γw/2)∫ φφᵀ` is integrated once per step, so every draw is exact in law and the
//! partition only fixes how many normals are consumed.

use nalgebra::{Matrix2, Matrix4, Vector2, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use super::bvp::{expm2, generator, rearrange};
use super::quad::integrate;
use crate::analytic::{INTENSITY_SIGNS, SECULAR_LIMIT};
use crate::error::{Error, Result};
use crate::params::{CovarianceState, Pair, SystemParams, PI0, PSL, QI0, QSL};

/// Identity of the random stream, recorded in run manifests.
pub const GENERATOR: &str = "ChaCha8 (rand_chacha 0.9), stream = trajectory index, StandardNormal ziggurat (rand_distr 0.5)";

const PILOT: u64 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct McConfig {
    pub n_traj: u64,
    pub n_steps: usize,
    pub seed: u64,
    pub chunk: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            n_traj: 100_000,
            n_steps: 16,
            seed: 0x7b1c_5eed,
            chunk: 4096,
        }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_traj == 0 || self.n_steps < 16 || self.chunk == 0 {
            return Err(Error::Validation(format!(
                "McConfig needs n_traj ≥ 1, n_steps ≥ 16, chunk ≥ 1 (got {}, {}, {})",
                self.n_traj, self.n_steps, self.chunk
            )));
        }
        Ok(())
    }
}

/// Sample estimate of the relative-intensity noise figure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NfEstimate {
    pub ratio: f64,
    pub stderr: f64,
    pub variance: f64,
    pub photon_sum: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McEnsemble {
    pub n_traj: u64,
    /// Sample means and unbiased sample covariance of `(q_i(0), q_s(L), p_i(0), p_s(L))`.
    pub state: CovarianceState,
    pub mean_stderr: Vector4<f64>,
    pub cov_stderr: Matrix4<f64>,
    /// `E[(x_a − μ_a)²(x_b − μ_b)²]` about the sample means.
    pub fourth: Matrix4<f64>,
    /// Sample covariance of the inputs `(q_i(L), q_s(0), p_i(L), p_s(0))`.
    pub input_cov: Matrix4<f64>,
    /// Mean squared norm of the noise part of the outputs.
    pub injected_power: f64,
    intensity: IntensitySums,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
struct IntensitySums {
    n: f64,
    q: [f64; 4],
    n1: f64,
    n2: f64,
    qn: f64,
    q2n: f64,
}

impl McEnsemble {
    /// NF ratio with a delta-method standard error.
    ///
    /// With `Q = Σ s_a x_a²` and `n = Σ x_a² − 1` per trajectory,
    /// `Var(N_i − N_s) = E[Q²] − E[Q]² − 1/2` and `⟨N_i + N_s⟩ = E[n]`.
    pub fn noise_figure(&self) -> Result<NfEstimate> {
        let s = &self.intensity;
        let m = |x: f64| x / s.n;
        let (a, b, q3, q4) = (m(s.q[0]), m(s.q[1]), m(s.q[2]), m(s.q[3]));
        let (c, c2, qn, q2n) = (m(s.n1), m(s.n2), m(s.qn), m(s.q2n));
        if !(c > 1e-12) {
            return Err(Error::VanishingDenominator(c));
        }
        let variance = b - a * a - 0.5;
        let ratio = variance / c;
        let grad = [-2.0 * a / c, 1.0 / c, -ratio / c];
        let sigma = [
            [b - a * a, q3 - a * b, qn - a * c],
            [q3 - a * b, q4 - b * b, q2n - b * c],
            [qn - a * c, q2n - b * c, c2 - c * c],
        ];
        let mut quad = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                quad += grad[i] * sigma[i][j] * grad[j];
            }
        }
        Ok(NfEstimate {
            ratio,
            stderr: (quad.max(0.0) / s.n).sqrt(),
            variance,
            photon_sum: c,
        })
    }
}

struct PairSampler {
    homo: Matrix2<f64>,
    steps: Vec<Matrix2<f64>>,
}

fn cholesky2(s: &Matrix2<f64>) -> Matrix2<f64> {
    let l11 = s[(0, 0)].max(0.0).sqrt();
    if l11 <= 1e-300 {
        return Matrix2::new(0.0, 0.0, 0.0, s[(1, 1)].max(0.0).sqrt());
    }
    let l21 = s[(1, 0)] / l11;
    Matrix2::new(l11, 0.0, l21, (s[(1, 1)] - l21 * l21).max(0.0).sqrt())
}

fn pair_sampler(pair: Pair, params: &SystemParams, n_steps: usize) -> Result<PairSampler> {
    let m = generator(pair, params);
    let l = params.length;
    let phi = expm2(&m, l);
    let homo = rearrange(pair, &phi)?;
    let secant = homo.abs().max();
    if !(secant <= SECULAR_LIMIT) {
        return Err(Error::SecularDivergence { pair, secant });
    }
    let a = phi[(0, 0)];
    let k = Matrix2::new(-1.0 / a, 0.0, -phi[(1, 0)] / a, 1.0);
    let intensity = 0.5 * params.gamma * (2.0 * params.n_th + 1.0);
    let h = l / n_steps as f64;
    let response = |z: f64| expm2(&m, l - z).column(1).into_owned();
    let steps = (0..n_steps)
        .map(|j| {
            if intensity == 0.0 {
                return Ok(Matrix2::zeros());
            }
            let (z0, z1) = (j as f64 * h, (j + 1) as f64 * h);
            let scale = 1e-14 * (1.0 + response(z0).norm_squared() * h);
            let entry = |r: usize, c: usize| {
                integrate(
                    |z| {
                        let f = response(z);
                        f[r] * f[c]
                    },
                    z0,
                    z1,
                    scale,
                )
            };
            let (s11, s12, s22) = (entry(0, 0)?, entry(0, 1)?, entry(1, 1)?);
            let sigma = Matrix2::new(s11, s12, s12, s22) * intensity;
            Ok(k * cholesky2(&sigma))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PairSampler { homo, steps })
}

/// Full 4×4 input-output map in the output/input orderings used by [`McEnsemble`].
pub fn input_output_map(params: &SystemParams) -> Result<Matrix4<f64>> {
    let pt = rearrange(Pair::Pt, &expm2(&generator(Pair::Pt, params), params.length))?;
    let np = rearrange(Pair::NonPt, &expm2(&generator(Pair::NonPt, params), params.length))?;
    let mut h = Matrix4::zeros();
    // PT pair: (q_i, p_s) ↔ slots (0, 3); the other pair: (p_i, q_s) ↔ slots (2, 1).
    for (pair, (i, s)) in [(pt, (QI0, PSL)), (np, (PI0, QSL))] {
        h[(i, i)] = pair[(0, 0)];
        h[(i, s)] = pair[(0, 1)];
        h[(s, i)] = pair[(1, 0)];
        h[(s, s)] = pair[(1, 1)];
    }
    Ok(h)
}

struct Sampler {
    pt: PairSampler,
    np: PairSampler,
    in_mean: Vector4<f64>,
    in_sd: f64,
    seed: [u8; 32],
}

struct Draw {
    input: Vector4<f64>,
    output: Vector4<f64>,
    noise: Vector4<f64>,
}

impl Sampler {
    fn draw(&self, traj: u64) -> Result<Draw> {
        let mut rng = ChaCha8Rng::from_seed(self.seed);
        rng.set_stream(traj);
        let mut normal = || -> f64 { rng.sample(StandardNormal) };
        let mut input = self.in_mean;
        for x in input.iter_mut() {
            *x += self.in_sd * normal();
        }
        let mut noise = [Vector2::zeros(), Vector2::zeros()];
        for (acc, sampler) in noise.iter_mut().zip([&self.pt, &self.np]) {
            for f in &sampler.steps {
                let xi = Vector2::new(normal(), normal());
                *acc += f * xi;
            }
        }
        let pt = self.pt.homo * Vector2::new(input[QI0], input[PSL]) + noise[0];
        let np = self.np.homo * Vector2::new(input[PI0], input[QSL]) + noise[1];
        let output = Vector4::new(pt[0], np[1], np[0], pt[1]);
        if !output.iter().all(|x| x.is_finite()) {
            return Err(Error::Numerical { trajectory: traj });
        }
        Ok(Draw {
            input,
            output,
            noise: Vector4::new(noise[0][0], noise[1][1], noise[1][0], noise[0][1]),
        })
    }
}

#[derive(Clone, Default)]
struct Acc {
    s1: [f64; 4],
    s2: [[f64; 4]; 4],
    s3: [[f64; 4]; 4],
    s4: [[f64; 4]; 4],
    in1: [f64; 4],
    in2: [[f64; 4]; 4],
    noise2: f64,
    nf: IntensitySums,
}

impl Acc {
    fn push(&mut self, d: &Draw, pilot: &Vector4<f64>, in_mean: &Vector4<f64>) {
        let y = d.output - pilot;
        let u = d.input - in_mean;
        for a in 0..4 {
            self.s1[a] += y[a];
            self.in1[a] += u[a];
            for b in 0..4 {
                self.s2[a][b] += y[a] * y[b];
                self.s3[a][b] += y[a] * y[a] * y[b];
                self.s4[a][b] += y[a] * y[a] * y[b] * y[b];
                self.in2[a][b] += u[a] * u[b];
            }
        }
        self.noise2 += d.noise.norm_squared();
        let x = &d.output;
        let q: f64 = (0..4).map(|a| INTENSITY_SIGNS[a] * x[a] * x[a]).sum();
        let n = x.norm_squared() - 1.0;
        let s = &mut self.nf;
        s.n += 1.0;
        s.q[0] += q;
        s.q[1] += q * q;
        s.q[2] += q * q * q;
        s.q[3] += q * q * q * q;
        s.n1 += n;
        s.n2 += n * n;
        s.qn += q * n;
        s.q2n += q * q * n;
    }

    fn merge(&mut self, o: &Acc) {
        for a in 0..4 {
            self.s1[a] += o.s1[a];
            self.in1[a] += o.in1[a];
            for b in 0..4 {
                self.s2[a][b] += o.s2[a][b];
                self.s3[a][b] += o.s3[a][b];
                self.s4[a][b] += o.s4[a][b];
                self.in2[a][b] += o.in2[a][b];
            }
        }
        self.noise2 += o.noise2;
        let (s, t) = (&mut self.nf, &o.nf);
        s.n += t.n;
        for k in 0..4 {
            s.q[k] += t.q[k];
        }
        s.n1 += t.n1;
        s.n2 += t.n2;
        s.qn += t.qn;
        s.q2n += t.q2n;
    }
}

pub fn mc_ensemble(params: &SystemParams, cfg: &McConfig) -> Result<McEnsemble> {
    cfg.validate()?;
    params.validate()?;
    let inp = &params.input;
    let sampler = Sampler {
        pt: pair_sampler(Pair::Pt, params, cfg.n_steps)?,
        np: pair_sampler(Pair::NonPt, params, cfg.n_steps)?,
        in_mean: Vector4::new(inp.mean_qi_l, inp.mean_qs_0, inp.mean_pi_l, inp.mean_ps_0),
        in_sd: inp.input_variance.sqrt(),
        seed: ChaCha8Rng::seed_from_u64(cfg.seed).get_seed(),
    };
    let n_pilot = cfg.n_traj.min(PILOT);
    let mut pilot = Vector4::zeros();
    for t in 0..n_pilot {
        pilot += sampler.draw(t)?.output;
    }
    pilot /= n_pilot as f64;

    let n_chunks = cfg.n_traj.div_ceil(cfg.chunk);
    let partials = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = Acc::default();
            for t in c * cfg.chunk..((c + 1) * cfg.chunk).min(cfg.n_traj) {
                acc.push(&sampler.draw(t)?, &pilot, &sampler.in_mean);
            }
            Ok(acc)
        })
        .collect::<Result<Vec<Acc>>>()?;
    let mut acc = Acc::default();
    for p in &partials {
        acc.merge(p);
    }
    Ok(finish(&acc, &pilot, cfg.n_traj))
}

fn finish(acc: &Acc, pilot: &Vector4<f64>, n_traj: u64) -> McEnsemble {
    let n = n_traj as f64;
    let dof = (n - 1.0).max(1.0);
    let d = Vector4::from_fn(|a, _| acc.s1[a] / n);
    let cov = Matrix4::from_fn(|a, b| (acc.s2[a][b] - n * d[a] * d[b]) / dof);
    let input_cov = Matrix4::from_fn(|a, b| (acc.in2[a][b] - acc.in1[a] * acc.in1[b] / n) / dof);
    let e2 = |a: usize, b: usize| acc.s2[a][b] / n;
    let e3 = |a: usize, b: usize| acc.s3[a][b] / n;
    let fourth = Matrix4::from_fn(|a, b| {
        let (da, db) = (d[a], d[b]);
        acc.s4[a][b] / n - 2.0 * db * e3(a, b) - 2.0 * da * e3(b, a)
            + db * db * e2(a, a)
            + da * da * e2(b, b)
            + 4.0 * da * db * e2(a, b)
            - 2.0 * da * db * db * d[a]
            - 2.0 * da * da * db * d[b]
            + da * da * db * db
    });
    let mean_stderr = Vector4::from_fn(|a, _| (cov[(a, a)] / n).sqrt());
    let cov_stderr = Matrix4::from_fn(|a, b| {
        // Diagonal: E[δ⁴] − σ⁴; off-diagonal uses E[δa²δb²] as a bound on E[(δaδb)²].
        ((fourth[(a, b)] - cov[(a, b)].powi(2)).max(0.0) / n).sqrt()
    });
    McEnsemble {
        n_traj,
        state: CovarianceState {
            means: pilot + d,
            cov,
        },
        mean_stderr,
        cov_stderr,
        fourth,
        input_cov,
        injected_power: acc.noise2 / n,
        intensity: acc.nf,
    }
}

/// NF estimated from a trajectory ensemble.
pub fn nf_oracle(params: &SystemParams, cfg: &McConfig) -> Result<NfEstimate> {
    mc_ensemble(params, cfg)?.noise_figure()
}
