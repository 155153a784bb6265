//! Effective 2×2 Hamiltonians of closed quadrature pairs.
//!
//! Linear mode equations `da/dz = P a + Q a†` become a real 4×4 system for
//! `(q_i, q_s, p_i, p_s)` through `a = q + ip`:
//! `dq = Re(P+Q) q − Im(P−Q) p` and `dp = Im(P+Q) q + Re(P−Q) p`.
//! A pair that the system maps into itself evolves under a 2×2 block `M`,
//! and its effective Hamiltonian is `H = iM`.

use std::fmt;

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;
use serde::Serialize;

const I: Complex64 = Complex64::new(0.0, 1.0);
const CLASSIFY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Quadrature {
    Qi,
    Qs,
    Pi,
    Ps,
}

impl Quadrature {
    /// Slot in `(q_i, q_s, p_i, p_s)`.
    fn slot(self) -> usize {
        match self {
            Quadrature::Qi => 0,
            Quadrature::Qs => 1,
            Quadrature::Pi => 2,
            Quadrature::Ps => 3,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Quadrature::Qi => "q_i",
            Quadrature::Qs => "q_s",
            Quadrature::Pi => "p_i",
            Quadrature::Ps => "p_s",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EffectiveH2 {
    pub matrix: Matrix2<Complex64>,
    pub label: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Symmetry {
    Pt,
    AntiPt,
    Neither,
}

impl fmt::Display for Symmetry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Symmetry::Pt => "PT",
            Symmetry::AntiPt => "anti-PT",
            Symmetry::Neither => "neither",
        })
    }
}

/// `P·conj(H)·P` with `P` the swap of the two components.
pub fn pt_conjugate(h: &Matrix2<Complex64>) -> Matrix2<Complex64> {
    let c = h.map(|z| z.conj());
    Matrix2::new(c[(1, 1)], c[(1, 0)], c[(0, 1)], c[(0, 0)])
}

pub fn pt_classify(h: &EffectiveH2) -> Symmetry {
    let t = pt_conjugate(&h.matrix);
    let close = |a: &Matrix2<Complex64>, b: &Matrix2<Complex64>| (a - b).iter().all(|z| z.norm() <= CLASSIFY_TOL);
    if close(&t, &h.matrix) {
        Symmetry::Pt
    } else if close(&t, &(-h.matrix)) {
        Symmetry::AntiPt
    } else {
        Symmetry::Neither
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Eigensystem {
    pub eigenvalues: [Complex64; 2],
    /// `|⟨ψ₊, ψ₋⟩| / (‖ψ₊‖‖ψ₋‖)`; 1 when the eigenvectors coalesce.
    pub eigenvector_overlap: f64,
}

fn eigenvector(h: &Matrix2<Complex64>, lambda: Complex64) -> [Complex64; 2] {
    let (a, b, c, d) = (h[(0, 0)], h[(0, 1)], h[(1, 0)], h[(1, 1)]);
    // Either row of (H − λ) annihilates the vector it is orthogonal to; use the larger.
    let v1 = [b, lambda - a];
    let v2 = [lambda - d, c];
    let n = |v: &[Complex64; 2]| v[0].norm_sqr() + v[1].norm_sqr();
    if n(&v1) >= n(&v2) {
        v1
    } else {
        v2
    }
}

pub fn eigensystem(h: &EffectiveH2) -> Eigensystem {
    let m = &h.matrix;
    let half_tr = (m[(0, 0)] + m[(1, 1)]) / 2.0;
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let root = (half_tr * half_tr - det).sqrt();
    let (lp, lm) = (half_tr + root, half_tr - root);
    let (vp, vm) = (eigenvector(m, lp), eigenvector(m, lm));
    let inner = vp[0].conj() * vm[0] + vp[1].conj() * vm[1];
    let norms = ((vp[0].norm_sqr() + vp[1].norm_sqr()) * (vm[0].norm_sqr() + vm[1].norm_sqr())).sqrt();
    let overlap = if norms == 0.0 { 1.0 } else { inner.norm() / norms };
    Eigensystem {
        eigenvalues: [lp, lm],
        eigenvector_overlap: overlap,
    }
}

/// `da/dz = P a + Q a†` for `a = (a_i, a_s)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeEquations {
    pub p: Matrix2<Complex64>,
    pub q: Matrix2<Complex64>,
}

impl ModeEquations {
    /// Phase-sensitive idler gain, signal loss and backward coupling:
    /// `da_i/dz = g a_i† + iκ a_s†`, `da_s/dz = −γ a_s − iκ a_i†`.
    pub fn twin_beam(g: f64, gamma: f64, kappa: f64) -> Self {
        let z = Complex64::from(0.0);
        Self {
            p: Matrix2::new(z, z, z, Complex64::from(-gamma)),
            q: Matrix2::new(Complex64::from(g), I * kappa, -I * kappa, z),
        }
    }

    /// Phase-insensitive idler gain (`+g`, case I) or loss (`−g`, case II), pump phase `ξ`:
    /// `da_i/dz = ±(g a_i − iκ e^{−iξ} a_s†)`, `da_s/dz = −γ a_s − iκ e^{−iξ} a_i†`.
    pub fn phase_insensitive(case: PumpCase, xi: f64, g: f64, gamma: f64, kappa: f64) -> Self {
        let sign = match case {
            PumpCase::Gain => 1.0,
            PumpCase::Loss => -1.0,
        };
        let c = -I * kappa * Complex64::from_polar(1.0, -xi);
        let z = Complex64::from(0.0);
        Self {
            p: Matrix2::new(Complex64::from(sign * g), z, z, Complex64::from(-gamma)),
            q: Matrix2::new(z, c * sign, c, z),
        }
    }

    /// Real generator over `(q_i, q_s, p_i, p_s)`.
    pub fn quadrature_generator(&self) -> Matrix4<f64> {
        let sum = self.p + self.q;
        let diff = self.p - self.q;
        let mut g = Matrix4::zeros();
        for j in 0..2 {
            for k in 0..2 {
                g[(j, k)] = sum[(j, k)].re;
                g[(j, k + 2)] = -diff[(j, k)].im;
                g[(j + 2, k)] = sum[(j, k)].im;
                g[(j + 2, k + 2)] = diff[(j, k)].re;
            }
        }
        g
    }

    /// `H = iM` of the pair `(idler, signal)` when the system leaves it invariant.
    pub fn effective(&self, idler: Quadrature, signal: Quadrature) -> Option<EffectiveH2> {
        let mut g = self.quadrature_generator();
        let scale = g.abs().max();
        // Phases such as e^{−iπ/2} leave round-off where exact zeros belong.
        g.apply(|x| {
            if x.abs() <= 1e-14 * scale {
                *x = 0.0
            }
        });
        let slots = [idler.slot(), signal.slot()];
        let leaks = slots
            .iter()
            .any(|&r| (0..4).filter(|c| !slots.contains(c)).any(|c| g[(r, c)] != 0.0));
        if leaks {
            return None;
        }
        let m = Matrix2::from_fn(|r, c| Complex64::from(g[(slots[r], slots[c])]));
        Some(EffectiveH2 {
            matrix: m * I,
            label: format!("({}, {})", idler.name(), signal.name()),
        })
    }

    /// All invariant idler/signal pairings.
    pub fn closed_pairs(&self) -> Vec<EffectiveH2> {
        let idlers = [Quadrature::Qi, Quadrature::Pi];
        let signals = [Quadrature::Qs, Quadrature::Ps];
        idlers
            .iter()
            .flat_map(|&i| signals.iter().map(move |&s| (i, s)))
            .filter_map(|(i, s)| self.effective(i, s))
            .collect()
    }
}

/// `H_(q_i,p_s) = [[iγ, iκ], [−iκ, −iγ]]` of the type-I system, by derivation.
pub fn h_qi_ps(gamma: f64, kappa: f64) -> EffectiveH2 {
    ModeEquations::twin_beam(gamma, gamma, kappa)
        .effective(Quadrature::Qi, Quadrature::Ps)
        .expect("(q_i, p_s) is invariant")
}

/// `H_(p_i,q_s) = [[−iγ, iκ], [−iκ, −iγ]]`.
pub fn h_pi_qs(gamma: f64, kappa: f64) -> EffectiveH2 {
    ModeEquations::twin_beam(gamma, gamma, kappa)
        .effective(Quadrature::Pi, Quadrature::Qs)
        .expect("(p_i, q_s) is invariant")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PumpCase {
    Gain,
    Loss,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PiaCase {
    pub case: PumpCase,
    pub xi: f64,
    pub hamiltonian: EffectiveH2,
    pub symmetry: Symmetry,
}

/// The eight effective Hamiltonians of phase-insensitive idler amplification
/// (gain or loss, `ξ ∈ {0, π/2}`, two invariant pairs each) at `g = γ = κ = 1`.
pub fn pia_cases() -> Vec<PiaCase> {
    let mut out = Vec::with_capacity(8);
    for case in [PumpCase::Gain, PumpCase::Loss] {
        for xi in [0.0, std::f64::consts::FRAC_PI_2] {
            for h in ModeEquations::phase_insensitive(case, xi, 1.0, 1.0, 1.0).closed_pairs() {
                out.push(PiaCase {
                    case,
                    xi,
                    symmetry: pt_classify(&h),
                    hamiltonian: h,
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn h(m: Matrix2<Complex64>) -> EffectiveH2 {
        EffectiveH2 {
            matrix: m,
            label: String::new(),
        }
    }

    #[test]
    fn derived_pair_hamiltonians() {
        let pt = h_qi_ps(0.3, 1.1);
        assert_eq!(pt.matrix, Matrix2::new(c(0.0, 0.3), c(0.0, 1.1), c(0.0, -1.1), c(0.0, -0.3)));
        assert_eq!(pt_classify(&pt), Symmetry::Pt);
        let np = h_pi_qs(0.3, 1.1);
        assert_eq!(np.matrix, Matrix2::new(c(0.0, -0.3), c(0.0, 1.1), c(0.0, -1.1), c(0.0, -0.3)));
        assert_eq!(pt_classify(&np), Symmetry::Neither);
    }

    #[test]
    fn real_symmetric_is_pt() {
        assert_eq!(pt_classify(&h(Matrix2::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)))), Symmetry::Pt);
        assert_eq!(pt_classify(&h(Matrix2::new(c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)))), Symmetry::AntiPt);
    }

    #[test]
    fn pia_examples() {
        let cases = pia_cases();
        assert_eq!(cases.len(), 8);
        assert!(cases.iter().all(|k| k.symmetry == Symmetry::Neither));
        let gain0 = cases.iter().find(|k| k.case == PumpCase::Gain && k.xi == 0.0 && k.hamiltonian.label == "(q_i, p_s)").unwrap();
        assert_eq!(gain0.hamiltonian.matrix, Matrix2::new(c(0.0, 1.0), c(0.0, -1.0), c(0.0, -1.0), c(0.0, -1.0)));
        let loss90 = cases
            .iter()
            .find(|k| k.case == PumpCase::Loss && k.xi > 1.0 && k.hamiltonian.label == "(p_i, p_s)")
            .unwrap();
        let expect = Matrix2::new(c(0.0, -1.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, -1.0));
        assert!((loss90.hamiltonian.matrix - expect).iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn eigenvalues_and_coalescence() {
        let e = eigensystem(&h_qi_ps(0.6, 1.0));
        assert_relative_eq!(e.eigenvalues[0].re, 0.8, epsilon = 1e-14);
        assert_relative_eq!(e.eigenvalues[1].re, -0.8, epsilon = 1e-14);
        let e = eigensystem(&h_qi_ps(2.0, 1.0));
        assert_relative_eq!(e.eigenvalues[0].im.abs(), 3f64.sqrt(), epsilon = 1e-14);
        assert!(e.eigenvalues[0].re.abs() < 1e-14);
        assert!(eigensystem(&h_qi_ps(1.0, 1.0)).eigenvector_overlap > 1.0 - 1e-6);
        assert!(eigensystem(&h_qi_ps(0.2, 1.0)).eigenvector_overlap < 0.5);
    }
}
