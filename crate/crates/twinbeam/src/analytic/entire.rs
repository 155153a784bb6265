//! Entire functions of `β²` that keep the PT-pair propagator regular across the EP.
//!
//! With `C(u) = cos βu` and `S(u) = sin(βu)/β` the propagator of
//! `[[γ, κ], [−κ, −γ]]` is `C·I + S·M` for every sign of `β²`.

use num_complex::Complex64;

const SERIES_LIMIT: f64 = 1.0;
const MAX_TERMS: usize = 60;

fn series(first: f64, mut ratio: impl FnMut(usize) -> f64) -> f64 {
    let mut term = first;
    let mut sum = first;
    for k in 1..MAX_TERMS {
        term *= ratio(k);
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// `(C(u), S(u))`.
pub fn cs(beta_sq: f64, u: f64) -> (f64, f64) {
    let x = beta_sq * u * u;
    if x.abs() <= SERIES_LIMIT {
        let c = series(1.0, |k| -x / ((2 * k - 1) as f64 * (2 * k) as f64));
        let s = u * series(1.0, |k| -x / ((2 * k) as f64 * (2 * k + 1) as f64));
        (c, s)
    } else if beta_sq > 0.0 {
        let b = beta_sq.sqrt();
        ((b * u).cos(), (b * u).sin() / b)
    } else {
        let b = (-beta_sq).sqrt();
        ((b * u).cosh(), (b * u).sinh() / b)
    }
}

/// `∫₀ᵘ S(z)² dz = (u − S C)/(2β²)`.
pub fn int_s2(beta_sq: f64, u: f64) -> f64 {
    let x = beta_sq * u * u;
    if x.abs() <= SERIES_LIMIT {
        u.powi(3) * series(1.0 / 3.0, |k| -4.0 * x / ((2 * k + 2) as f64 * (2 * k + 3) as f64))
    } else {
        let (c, s) = cs(beta_sq, u);
        (u - s * c) / (2.0 * beta_sq)
    }
}

/// `∫₀ᵘ S(u − z) S(z) dz = (S − uC)/(2β²)`.
pub fn conv_ss(beta_sq: f64, u: f64) -> f64 {
    let x = beta_sq * u * u;
    if x.abs() <= SERIES_LIMIT {
        u.powi(3) * series(1.0 / 6.0, |k| -x / ((2 * k) as f64 * (2 * k + 3) as f64))
    } else {
        let (c, s) = cs(beta_sq, u);
        (s - u * c) / (2.0 * beta_sq)
    }
}

/// `e^w − 1` without cancellation for small `|w|`.
pub fn expm1(w: Complex64) -> Complex64 {
    let (x, y) = (w.re, w.im);
    let half = (0.5 * y).sin();
    Complex64::new(x.exp_m1() * y.cos() - 2.0 * half * half, x.exp() * y.sin())
}

/// `∫₀ᴸ e^{az} dz`.
pub fn exp_integral(a: Complex64, l: f64) -> Complex64 {
    let al = a * l;
    if al.norm() < 1e-3 {
        l * (1.0 + al / 2.0 + al * al / 6.0 + al * al * al / 24.0 + al * al * al * al / 120.0)
    } else {
        expm1(al) / a
    }
}
