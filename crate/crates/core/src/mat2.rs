//! Dense 2×2 complex matrices and the closed-form exponential of a traceless
//! generator.
//!
//! A traceless `K` squares to a multiple of the identity, `K² = z·I` with
//! `z = -det K`, so `exp(τK) = cosh(τ√z)·I + (sinh(τ√z)/√z)·K`. Both
//! coefficients are even entire functions of `√z` and are evaluated here as
//! functions of `z`, which makes the choice of square-root branch irrelevant
//! and removes the removable singularity at `z = 0`.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Below this value of `|z|·τ²` (i.e. `|√z|·τ < 1e-4`) the coefficients use
/// their Taylor series.
const TAYLOR_CUTOFF: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[ONE, ZERO], [ZERO, ONE]]);

    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub fn diag(a: Complex64, d: Complex64) -> Self {
        Mat2([[a, ZERO], [ZERO, d]])
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[i][j]
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> Complex64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let m = &self.0;
        Mat2([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    /// Matrix-vector product.
    #[inline]
    pub fn apply(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1],
            m[1][0] * v[0] + m[1][1] * v[1],
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        (*self - *other).max_abs()
    }

    /// Both eigenvalues from the characteristic quadratic
    /// `η² - tr·η + det = 0`.
    ///
    /// The root of larger modulus is formed without cancellation and the
    /// other one is recovered from `det / η`, so reciprocal pairs stay
    /// accurate when one multiplier is exponentially small.
    ///
    /// A discriminant below the rounding level of the entries is taken as an
    /// exact double root; otherwise a coalescing pair on the unit circle
    /// picks up a spurious `√ε` modulus splitting.
    pub fn eigenvalues(&self) -> [Complex64; 2] {
        let half_tr = self.trace() * 0.5;
        let det = self.det();
        let disc_sq = half_tr * half_tr - det;
        let noise = 8.0 * f64::EPSILON * self.max_abs().powi(2).max(1.0);
        let disc = if disc_sq.norm() <= noise { ZERO } else { disc_sq.sqrt() };
        let plus = half_tr + disc;
        let minus = half_tr - disc;
        let big = if plus.norm_sqr() >= minus.norm_sqr() { plus } else { minus };
        if big == ZERO {
            return [ZERO, ZERO];
        }
        [big, det / big]
    }
}

impl Mul for Mat2 {
    type Output = Mat2;

    fn mul(self, rhs: Mat2) -> Mat2 {
        let a = &self.0;
        let b = &rhs.0;
        Mat2([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }
}

impl Add for Mat2 {
    type Output = Mat2;

    fn add(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        Mat2([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;

    fn sub(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        Mat2([
            [a[0][0] - b[0][0], a[0][1] - b[0][1]],
            [a[1][0] - b[1][0], a[1][1] - b[1][1]],
        ])
    }
}

/// `cosh(τ·√z)` as an entire function of `z`.
pub fn cosh_sqrt(z: Complex64, tau: f64) -> Complex64 {
    let w = z * (tau * tau);
    if w.norm() < TAYLOR_CUTOFF {
        return ONE + w * 0.5 + w * w / 24.0;
    }
    (z.sqrt() * tau).cosh()
}

/// `sinh(τ·√z)/√z` as an entire function of `z`; equals `τ` at `z = 0`.
pub fn sinhc_sqrt(z: Complex64, tau: f64) -> Complex64 {
    let w = z * (tau * tau);
    if w.norm() < TAYLOR_CUTOFF {
        return (ONE + w / 6.0 + w * w / 120.0) * tau;
    }
    let root = z.sqrt();
    (root * tau).sinh() / root
}

/// `exp(τ·K)` for a traceless `K`. `tau` may be negative.
pub fn exp_traceless(k: &Mat2, tau: f64) -> Mat2 {
    let z = -k.det();
    let c = cosh_sqrt(z, tau);
    let s = sinhc_sqrt(z, tau);
    Mat2::IDENTITY.scale(c) + k.scale(s)
}
