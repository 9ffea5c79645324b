#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Integer-order Bessel function from `J_n(x) = (1/2π) ∫₀^{2π} cos(nτ - x sin τ) dτ`.
/// The trapezoid rule on a periodic integrand converges geometrically; 1024
/// nodes are exact to rounding for `|x| ≤ 40`, `|n| ≤ 200`.
pub fn bessel_j(n: i64, x: f64) -> f64 {
    let m = 1024;
    let h = 2.0 * PI / m as f64;
    (0..m)
        .map(|k| {
            let tau = k as f64 * h;
            (n as f64 * tau - x * tau.sin()).cos()
        })
        .sum::<f64>()
        / m as f64
}

/// Modified Bessel `I₀` from its power series.
pub fn bessel_i0(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= (x / 2.0).powi(2) / (k as f64).powi(2);
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    sum
}
