//! One-period Bloch-space propagators and complex quasi-energy bands.
//!
//! Splitting the lattice into even sites `a_n = c_{2n}` and odd sites
//! `b_n = c_{2n+1}` and Fourier transforming gives, for each quasi-momentum
//! `q`, the 2×2 system
//!
//! ```text
//! d/dt [A, B]ᵀ = K(t) [A, B]ᵀ,   K(t) = [[ Δ(t), iρ ], [ iρ*, -Δ(t) ]],
//! ρ = κ (1 + e^{iq}).
//! ```
//!
//! `K` is traceless with `K² = (Δ² - |ρ|²)·I = λ²·I`, so a constant segment
//! propagates as `cosh(λτ)·I + (sinh(λτ)/λ)·K`. The monodromy matrix `M`
//! collects the two solutions started from `[1, 0]ᵀ` and `[0, 1]ᵀ` after one
//! period; its eigenvalues `η` give `E′ = arg(η)/T` and `E″ = -ln|η|/T`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::drive::{DriveWaveform, Shape};
use crate::error::{Error, Result};
use crate::export::{Cell, Table};
use crate::mat2::{cosh_sqrt, exp_traceless, sinhc_sqrt, Mat2};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Default integration steps per drive period for non-square drives.
pub const DEFAULT_STEPS_PER_PERIOD: usize = 512;
/// Fewest steps per period accepted by the numeric propagator.
pub const MIN_STEPS_PER_PERIOD: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeConfig {
    kappa: f64,
}

impl LatticeConfig {
    pub fn new(kappa: f64) -> Result<Self> {
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "hopping rate must be positive, got {kappa}"
            )));
        }
        Ok(Self { kappa })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// `ρ(q) = κ (1 + e^{iq})`.
    pub fn bloch_coupling(&self, q: f64) -> Complex64 {
        self.kappa * (Complex64::new(1.0, 0.0) + Complex64::from_polar(1.0, q))
    }
}

impl Default for LatticeConfig {
    fn default() -> Self {
        Self { kappa: 1.0 }
    }
}

/// Bloch-space generator `K` for drive value `delta` and coupling `rho`.
pub fn generator(delta: Complex64, rho: Complex64) -> Mat2 {
    Mat2::new(delta, I * rho, I * rho.conj(), -delta)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonodromyMatrix {
    pub q: f64,
    pub matrix: Mat2,
}

impl MonodromyMatrix {
    pub fn det(&self) -> Complex64 {
        self.matrix.det()
    }

    /// Floquet multipliers `η`.
    pub fn multipliers(&self) -> [Complex64; 2] {
        self.matrix.eigenvalues()
    }
}

/// Closed-form monodromy for a square-wave drive.
///
/// Over the half-cycle with drive `+Δ₀` the propagator is
/// `M₁ = [[C + (Δ₀/λ)S, i(ρ/λ)S], [i(ρ*/λ)S, C - (Δ₀/λ)S]]` and over the
/// `-Δ₀` half-cycle `M₂` is the same with the diagonal swapped, where
/// `C = cosh(λT/2)` and `S = sinh(λT/2)`. `M₂M₁` is the monodromy based at a
/// rising edge. For any other phase `θ` it is conjugated by the closed-form
/// propagator from the preceding edge to `t = 0`, which keeps it comparable
/// entry by entry with [`monodromy_numeric`] started at `t₀ = 0`. With
/// `θ = 0` the result is exactly `M₂M₁`.
pub fn monodromy_analytic_square(
    q: f64,
    w: &DriveWaveform,
    cfg: &LatticeConfig,
) -> Result<MonodromyMatrix> {
    if *w.shape() != Shape::Square {
        return Err(Error::InvalidArgument(format!(
            "analytic monodromy needs a square wave, got {}",
            w.shape().name()
        )));
    }
    let delta0 = w.amplitude();
    let rho = cfg.bloch_coupling(q);
    let period = w.period();
    let half = 0.5 * period;

    let lambda_sq = delta0 * delta0 - rho.norm_sqr();
    let c = cosh_sqrt(lambda_sq, half);
    // S/λ, never formed by division
    let s_over_lambda = sinhc_sqrt(lambda_sq, half);
    let off_upper = I * rho * s_over_lambda;
    let off_lower = I * rho.conj() * s_over_lambda;
    let m1 = Mat2::new(
        c + delta0 * s_over_lambda,
        off_upper,
        off_lower,
        c - delta0 * s_over_lambda,
    );
    let m2 = Mat2::new(
        c - delta0 * s_over_lambda,
        off_upper,
        off_lower,
        c + delta0 * s_over_lambda,
    );

    // time elapsed at t = 0 since the last rising edge
    let cycles = w.theta() / (2.0 * PI);
    let elapsed = (cycles - cycles.floor()) * period;
    let matrix = if elapsed == 0.0 {
        m2 * m1
    } else if elapsed < half {
        let k = generator(delta0, rho);
        exp_traceless(&k, elapsed) * (m2 * m1) * exp_traceless(&k, -elapsed)
    } else {
        let k = generator(-delta0, rho);
        let into = elapsed - half;
        exp_traceless(&k, into) * (m1 * m2) * exp_traceless(&k, -into)
    };
    if !matrix.is_finite() {
        return Err(Error::Overflow { q });
    }
    Ok(MonodromyMatrix { q, matrix })
}

/// How [`monodromy_numeric_with`] propagates across a period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Propagation {
    /// Exact segment exponentials for piecewise-constant drives, RK4 otherwise.
    #[default]
    Auto,
    /// Exact segment exponentials; piecewise-constant drives only.
    ExactSegments,
    /// Classical fixed-step RK4 for every drive.
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericOptions {
    pub steps_per_period: usize,
    /// Start of the propagation window `[t₀, t₀ + T]`.
    pub t0: f64,
    pub method: Propagation,
}

impl Default for NumericOptions {
    fn default() -> Self {
        Self { steps_per_period: DEFAULT_STEPS_PER_PERIOD, t0: 0.0, method: Propagation::Auto }
    }
}

/// Monodromy over `[0, T]` by direct propagation of the Bloch equations.
pub fn monodromy_numeric(
    q: f64,
    w: &DriveWaveform,
    cfg: &LatticeConfig,
    steps_per_period: usize,
) -> Result<MonodromyMatrix> {
    let opts = NumericOptions { steps_per_period, ..NumericOptions::default() };
    monodromy_numeric_with(q, w, cfg, &opts)
}

pub fn monodromy_numeric_with(
    q: f64,
    w: &DriveWaveform,
    cfg: &LatticeConfig,
    opts: &NumericOptions,
) -> Result<MonodromyMatrix> {
    if opts.steps_per_period < MIN_STEPS_PER_PERIOD {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_STEPS_PER_PERIOD} steps per period, got {}",
            opts.steps_per_period
        )));
    }
    let exact = match opts.method {
        Propagation::Auto => w.is_piecewise_constant(),
        Propagation::ExactSegments => {
            if !w.is_piecewise_constant() {
                return Err(Error::InvalidArgument(
                    "exact segment propagation needs a piecewise-constant drive".into(),
                ));
            }
            true
        }
        Propagation::Rk4 => false,
    };

    let rho = cfg.bloch_coupling(q);
    let period = w.period();
    let mut x = Mat2::IDENTITY;
    for (a, b) in w.segments(opts.t0, opts.t0 + period) {
        let len = b - a;
        if exact {
            let k = generator(w.evaluate(0.5 * (a + b)), rho);
            x = exp_traceless(&k, len) * x;
        } else {
            let n = ((opts.steps_per_period as f64 * len / period).round() as usize).max(1);
            let h = len / n as f64;
            // inside a segment a piecewise-constant drive is sampled once, so
            // RK4 stages never see the value across an edge
            let held = w.is_piecewise_constant().then(|| w.evaluate(0.5 * (a + b)));
            let k_at = |t: f64| generator(held.unwrap_or_else(|| w.evaluate(t)), rho);
            for j in 0..n {
                let t = a + j as f64 * h;
                x = rk4_step(&k_at, t, h, x);
            }
        }
        if !x.is_finite() {
            return Err(Error::Overflow { q });
        }
    }
    Ok(MonodromyMatrix { q, matrix: x })
}

fn rk4_step(k_at: &impl Fn(f64) -> Mat2, t: f64, h: f64, x: Mat2) -> Mat2 {
    let half = Complex64::new(0.5 * h, 0.0);
    let full = Complex64::new(h, 0.0);
    let k_mid = k_at(t + 0.5 * h);
    let k1 = k_at(t) * x;
    let k2 = k_mid * (x + k1.scale(half));
    let k3 = k_mid * (x + k2.scale(half));
    let k4 = k_at(t + h) * (x + k3.scale(full));
    x + (k1 + k2.scale(Complex64::new(2.0, 0.0)) + k3.scale(Complex64::new(2.0, 0.0)) + k4)
        .scale(Complex64::new(h / 6.0, 0.0))
}

/// Analytic path for square waves, numeric propagation otherwise.
pub fn monodromy(q: f64, w: &DriveWaveform, cfg: &LatticeConfig) -> Result<MonodromyMatrix> {
    match w.shape() {
        Shape::Square => monodromy_analytic_square(q, w, cfg),
        _ => monodromy_numeric(q, w, cfg, DEFAULT_STEPS_PER_PERIOD),
    }
}

/// Complex quasi-energy `E′ + iE″`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasiEnergy {
    pub re: f64,
    pub im: f64,
}

impl QuasiEnergy {
    /// `E′ = arg(η)/T` with `arg ∈ (-π, π]`, `E″ = -ln|η|/T`.
    pub fn from_multiplier(eta: Complex64, period: f64) -> Result<Self> {
        let modulus = eta.norm();
        if !(modulus.is_finite() && modulus > 0.0) {
            return Err(Error::Numeric(format!("degenerate Floquet multiplier {eta}")));
        }
        let mut arg = eta.arg();
        if arg <= -PI {
            arg = PI;
        }
        Ok(Self { re: arg / period, im: -modulus.ln() / period })
    }
}

/// Both quasi-energies of `m`, ordered by `(E′, E″)`.
pub fn quasi_energies(m: &MonodromyMatrix, period: f64) -> Result<[QuasiEnergy; 2]> {
    if !m.matrix.is_finite() {
        return Err(Error::Numeric("monodromy matrix is not finite".into()));
    }
    let [a, b] = m.multipliers();
    let mut out = [QuasiEnergy::from_multiplier(a, period)?, QuasiEnergy::from_multiplier(b, period)?];
    if (out[1].re, out[1].im) < (out[0].re, out[0].im) {
        out.swap(0, 1);
    }
    Ok(out)
}

/// `n` quasi-momenta uniformly covering `[-π, π)`.
pub fn q_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| -PI + 2.0 * PI * k as f64 / n as f64).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuasiEnergySpectrum {
    pub q: Vec<f64>,
    /// Two bands, each indexed like `q`, ordered by continuity in `q`.
    pub bands: [Vec<QuasiEnergy>; 2],
    pub omega: f64,
    pub amplitude: Complex64,
    pub kappa: f64,
}

impl QuasiEnergySpectrum {
    /// `max_q |E″(q)|` over both bands.
    pub fn max_imag(&self) -> f64 {
        self.bands.iter().flatten().map(|e| e.im.abs()).fold(0.0, f64::max)
    }

    /// `max_q E′ - min_q E′` for one band.
    pub fn band_width(&self, band: usize) -> f64 {
        let (lo, hi) = self.bands[band]
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), e| (lo.min(e.re), hi.max(e.re)));
        hi - lo
    }

    /// Larger of the two band widths.
    pub fn bandwidth(&self) -> f64 {
        self.band_width(0).max(self.band_width(1))
    }

    /// Largest `|E′(q_{k-1}) - 2E′(q_k) + E′(q_{k+1})|` over grid points with
    /// `q_lo ≤ |q_k| ≤ q_hi`, over both bands, divided by [`Self::bandwidth`].
    pub fn relative_second_difference(&self, q_lo: f64, q_hi: f64) -> f64 {
        let width = self.bandwidth();
        let mut worst: f64 = 0.0;
        for band in &self.bands {
            for k in 1..self.q.len().saturating_sub(1) {
                let q = self.q[k].abs();
                if q < q_lo || q > q_hi {
                    continue;
                }
                let d2 = band[k - 1].re - 2.0 * band[k].re + band[k + 1].re;
                worst = worst.max(d2.abs());
            }
        }
        worst / width
    }

    /// Export table with columns `q,E1_re,E1_im,E2_re,E2_im`.
    pub fn to_table(&self) -> Table {
        let mut table = Table::new(["q", "E1_re", "E1_im", "E2_re", "E2_im"]);
        for (k, &q) in self.q.iter().enumerate() {
            let (a, b) = (self.bands[0][k], self.bands[1][k]);
            table.push_row(vec![
                Cell::F(q),
                Cell::F(a.re),
                Cell::F(a.im),
                Cell::F(b.re),
                Cell::F(b.im),
            ]);
        }
        table
    }
}

/// Quasi-energy bands on a uniform `n_q` grid over `[-π, π)`.
///
/// Multipliers at neighbouring `q` are paired by proximity, seeded at
/// `q = -π` in `(E′, E″)` order, so each band is continuous in `q`. The `q`
/// points are computed in parallel.
pub fn spectrum(w: &DriveWaveform, cfg: &LatticeConfig, n_q: usize) -> Result<QuasiEnergySpectrum> {
    if n_q < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 q points, got {n_q}")));
    }
    let q = q_grid(n_q);
    let period = w.period();
    let multipliers = q
        .par_iter()
        .map(|&qk| monodromy(qk, w, cfg).map(|m| m.multipliers()))
        .collect::<Result<Vec<_>>>()?;

    let mut ordered = Vec::with_capacity(n_q);
    for (k, &[a, b]) in multipliers.iter().enumerate() {
        let pair = if k == 0 {
            let ea = QuasiEnergy::from_multiplier(a, period)?;
            let eb = QuasiEnergy::from_multiplier(b, period)?;
            if (eb.re, eb.im) < (ea.re, ea.im) {
                [b, a]
            } else {
                [a, b]
            }
        } else {
            let [pa, pb]: [Complex64; 2] = ordered[k - 1];
            let keep = (a - pa).norm() + (b - pb).norm();
            let swap = (b - pa).norm() + (a - pb).norm();
            if swap < keep {
                [b, a]
            } else {
                [a, b]
            }
        };
        ordered.push(pair);
    }

    let mut bands = [Vec::with_capacity(n_q), Vec::with_capacity(n_q)];
    for pair in &ordered {
        for (band, &eta) in bands.iter_mut().zip(pair) {
            band.push(QuasiEnergy::from_multiplier(eta, period)?);
        }
    }
    Ok(QuasiEnergySpectrum { q, bands, omega: w.omega(), amplitude: w.amplitude(), kappa: cfg.kappa() })
}
