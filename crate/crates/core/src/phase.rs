//! PT phase classification of square-wave drives with real amplitude.
//!
//! A point `(ω, Δ₀)` is unbroken when every quasi-energy is real, i.e. when
//! `max_q |E″(q)|` stays below a tolerance. Symmetry breaking can start in a
//! very narrow `q` window (a resonance between the two folded bands), so the
//! grid scan is followed by a local refinement: around each grid maximum of
//! `|tr M / 2|` a golden-section search locates the true maximum, where
//! `|E″|` is largest. For `det M = 1`, both multipliers are unimodular exactly
//! when `tr M / 2` is real and in `[-1, 1]`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::drive::DriveWaveform;
use crate::error::{Error, Result};
use crate::export::{Cell, Table};
use crate::fit::{linear_fit, LinearFit};
use crate::floquet::{monodromy, q_grid, LatticeConfig, QuasiEnergy};

pub const DEFAULT_NQ: usize = 512;
pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_BISECT_TOL: f64 = 1e-3;

/// Upper bound on the automatically expanded amplitude bracket.
const MAX_AMPLITUDE: f64 = 1e6;
const GOLDEN_ITERATIONS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseOptions {
    /// Quasi-momentum grid size.
    pub n_q: usize,
    /// Unbroken ⇔ `max_q |E″| < tol` (units of κ).
    pub tol: f64,
    /// Amplitude precision of threshold bisection.
    pub bisect_tol: f64,
    /// Refine grid maxima of `|tr M / 2|` between grid points.
    pub refine: bool,
}

impl Default for PhaseOptions {
    fn default() -> Self {
        Self { n_q: DEFAULT_NQ, tol: DEFAULT_TOL, bisect_tol: DEFAULT_BISECT_TOL, refine: true }
    }
}

impl PhaseOptions {
    fn validate(&self) -> Result<()> {
        if self.n_q < 3 {
            return Err(Error::InvalidArgument(format!("need at least 3 q points, got {}", self.n_q)));
        }
        if !(self.tol > 0.0 && self.bisect_tol > 0.0) {
            return Err(Error::InvalidArgument("tolerances must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub omega: f64,
    pub delta0: f64,
    pub unbroken: bool,
    /// `max_q |E″(q)|`; `+∞` when propagation overflowed.
    pub max_imag: f64,
}

/// `max_q |E″(q)|` for an arbitrary drive, `+∞` on overflow.
pub fn max_imag_quasi_energy(w: &DriveWaveform, cfg: &LatticeConfig, opts: &PhaseOptions) -> Result<f64> {
    opts.validate()?;
    let period = w.period();
    // (|tr/2|, max |E″|) at q
    let probe = |q: f64| -> Result<(f64, f64)> {
        let m = match monodromy(q, w, cfg) {
            Ok(m) => m,
            Err(Error::Overflow { .. }) => return Ok((f64::INFINITY, f64::INFINITY)),
            Err(e) => return Err(e),
        };
        let half_trace = (m.matrix.trace() * 0.5).norm();
        let mut worst: f64 = 0.0;
        for eta in m.multipliers() {
            let e = match QuasiEnergy::from_multiplier(eta, period) {
                Ok(e) => e.im.abs(),
                Err(_) => f64::INFINITY,
            };
            worst = worst.max(e);
        }
        Ok((half_trace, worst))
    };

    let grid = q_grid(opts.n_q);
    let samples = grid.iter().map(|&q| probe(q)).collect::<Result<Vec<_>>>()?;
    let mut worst = samples.iter().map(|s| s.1).fold(0.0, f64::max);
    if !opts.refine || !worst.is_finite() {
        return Ok(worst);
    }

    let n = grid.len();
    let h = grid[1] - grid[0];
    for k in 0..n {
        let here = samples[k].0;
        if here < samples[(k + n - 1) % n].0 || here < samples[(k + 1) % n].0 {
            continue;
        }
        let q_best = golden_max(|q| probe(q).map(|p| p.0).unwrap_or(f64::INFINITY), grid[k] - h, grid[k] + h);
        worst = worst.max(probe(q_best)?.1);
    }
    Ok(worst)
}

/// Maximiser of a unimodal function on `[a, b]`.
fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..GOLDEN_ITERATIONS {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        x1
    } else {
        x2
    }
}

/// Classifies the square-wave drive `Δ₀ square(ωt + θ)` with real `Δ₀`.
pub fn is_unbroken(omega: f64, delta0: f64, cfg: &LatticeConfig, opts: &PhaseOptions) -> Result<PhasePoint> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::InvalidArgument(format!("frequency must be positive, got {omega}")));
    }
    if !(delta0 >= 0.0 && delta0.is_finite()) {
        return Err(Error::InvalidArgument(format!("amplitude must be non-negative, got {delta0}")));
    }
    let w = DriveWaveform::square(Complex64::new(delta0, 0.0), omega)?;
    let max_imag = max_imag_quasi_energy(&w, cfg, opts)?;
    Ok(PhasePoint { omega, delta0, unbroken: max_imag < opts.tol, max_imag })
}

/// Largest unbroken amplitude at `omega`, to within `opts.bisect_tol`.
///
/// The bracket `[bisect_tol, Δ_hi]` is grown by doubling until `Δ_hi` is
/// broken, then bisected. Fails with [`Error::NoUnbrokenPhase`] if already
/// `Δ₀ = bisect_tol` is broken.
pub fn threshold_amplitude(omega: f64, cfg: &LatticeConfig, opts: &PhaseOptions) -> Result<f64> {
    opts.validate()?;
    let step = opts.bisect_tol;
    if !is_unbroken(omega, step, cfg, opts)?.unbroken {
        return Err(Error::NoUnbrokenPhase { omega, delta0: step });
    }
    let mut lo = step;
    let mut hi = (2.0 * step).max(1.0);
    while is_unbroken(omega, hi, cfg, opts)?.unbroken {
        lo = hi;
        hi *= 2.0;
        if hi > MAX_AMPLITUDE {
            return Err(Error::Numeric(format!(
                "no symmetry breaking found below amplitude {MAX_AMPLITUDE} at omega = {omega}"
            )));
        }
    }
    while hi - lo > step {
        let mid = 0.5 * (lo + hi);
        if is_unbroken(omega, mid, cfg, opts)?.unbroken {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Threshold amplitude sampled over frequencies; `None` where no unbroken
/// phase exists.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdCurve {
    pub points: Vec<(f64, Option<f64>)>,
    pub n_q: usize,
    pub tol: f64,
    pub bisect_tol: f64,
}

impl ThresholdCurve {
    /// Whether the threshold never decreases with frequency (observed, not
    /// guaranteed).
    pub fn is_monotone(&self) -> bool {
        let found: Vec<f64> = self.points.iter().filter_map(|p| p.1).collect();
        found.windows(2).all(|w| w[1] >= w[0])
    }

    /// Straight-line fit of the threshold over `omega_lo ≤ ω ≤ omega_hi`.
    pub fn linear_fit(&self, omega_lo: f64, omega_hi: f64) -> Result<LinearFit> {
        let (x, y): (Vec<f64>, Vec<f64>) = self
            .points
            .iter()
            .filter(|p| p.0 >= omega_lo && p.0 <= omega_hi)
            .filter_map(|&(w, th)| th.map(|th| (w, th)))
            .unzip();
        linear_fit(&x, &y)
    }

    pub fn to_table(&self) -> Table {
        let mut table = Table::new(["omega", "delta0_th"]);
        for &(w, th) in &self.points {
            table.push_row(vec![Cell::F(w), Cell::F(th.unwrap_or(f64::NAN))]);
        }
        table
    }
}

pub fn threshold_curve(omegas: &[f64], cfg: &LatticeConfig, opts: &PhaseOptions) -> Result<ThresholdCurve> {
    let points = omegas
        .par_iter()
        .map(|&w| match threshold_amplitude(w, cfg, opts) {
            Ok(th) => Ok((w, Some(th))),
            Err(Error::NoUnbrokenPhase { .. }) => Ok((w, None)),
            Err(e) => Err(e),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ThresholdCurve { points, n_q: opts.n_q, tol: opts.tol, bisect_tol: opts.bisect_tol })
}

/// Inclusive, uniformly spaced scan axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridRange {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl GridRange {
    pub fn new(min: f64, max: f64, steps: usize) -> Result<Self> {
        if steps == 0 || !(min.is_finite() && max.is_finite()) || max < min {
            return Err(Error::InvalidArgument(format!("invalid range [{min}, {max}] with {steps} steps")));
        }
        if steps > 1 && max == min {
            return Err(Error::InvalidArgument("range with several steps must have max > min".into()));
        }
        Ok(Self { min, max, steps })
    }

    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.min];
        }
        let span = self.max - self.min;
        (0..self.steps)
            .map(|k| self.min + span * k as f64 / (self.steps - 1) as f64)
            .collect()
    }
}

/// Rectangular `(Δ₀, ω)` scan, row-major with one row per amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMap {
    pub omegas: Vec<f64>,
    pub deltas: Vec<f64>,
    pub points: Vec<PhasePoint>,
}

impl PhaseMap {
    pub fn point(&self, delta_idx: usize, omega_idx: usize) -> &PhasePoint {
        &self.points[delta_idx * self.omegas.len() + omega_idx]
    }

    /// Points at `ω ≥ omega_min` that are unbroken although a smaller
    /// amplitude at the same frequency is broken.
    pub fn monotonicity_violations(&self, omega_min: f64) -> Vec<PhasePoint> {
        let mut out = Vec::new();
        for (j, &w) in self.omegas.iter().enumerate() {
            if w < omega_min {
                continue;
            }
            let mut seen_broken = false;
            for i in 0..self.deltas.len() {
                let p = self.point(i, j);
                if !p.unbroken {
                    seen_broken = true;
                } else if seen_broken {
                    out.push(*p);
                }
            }
        }
        out
    }

    /// First amplitude row that is broken at column `omega_idx`.
    pub fn first_broken_row(&self, omega_idx: usize) -> Option<usize> {
        (0..self.deltas.len()).find(|&i| !self.point(i, omega_idx).unbroken)
    }

    pub fn to_table(&self) -> Table {
        let mut table = Table::new(["omega", "delta0", "unbroken", "max_imag"]);
        for p in &self.points {
            table.push_row(vec![Cell::F(p.omega), Cell::F(p.delta0), Cell::B(p.unbroken), Cell::F(p.max_imag)]);
        }
        table
    }
}

/// Dense scan; grid points are classified in parallel, output order is fixed.
pub fn phase_map(
    omega: GridRange,
    delta: GridRange,
    cfg: &LatticeConfig,
    opts: &PhaseOptions,
) -> Result<PhaseMap> {
    if omega.min <= 0.0 {
        return Err(Error::InvalidArgument("frequency range must be positive".into()));
    }
    if delta.min < 0.0 {
        return Err(Error::InvalidArgument("amplitude range must be non-negative".into()));
    }
    opts.validate()?;
    let omegas = omega.values();
    let deltas = delta.values();
    let cells: Vec<(f64, f64)> = deltas.iter().flat_map(|&d| omegas.iter().map(move |&w| (w, d))).collect();
    let points = cells
        .par_iter()
        .map(|&(w, d)| is_unbroken(w, d, cfg, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(PhaseMap { omegas, deltas, points })
}

/// Lowest frequency at which some unbroken phase exists.
///
/// Bisects on `ω` the predicate "`Δ₀ = bisect_tol` is unbroken", which is
/// exactly the condition for [`threshold_amplitude`] to succeed. The
/// interval must have the predicate false at `omega_lo` and true at
/// `omega_hi`.
pub fn minimum_frequency(
    cfg: &LatticeConfig,
    omega_lo: f64,
    omega_hi: f64,
    tol: f64,
    opts: &PhaseOptions,
) -> Result<f64> {
    if !(omega_lo > 0.0 && omega_hi > omega_lo && tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "invalid search interval [{omega_lo}, {omega_hi}] or tolerance {tol}"
        )));
    }
    let has_phase = |w: f64| is_unbroken(w, opts.bisect_tol, cfg, opts).map(|p| p.unbroken);
    if has_phase(omega_lo)? || !has_phase(omega_hi)? {
        return Err(Error::NotBracketed { lo: omega_lo, hi: omega_hi });
    }
    let (mut lo, mut hi) = (omega_lo, omega_hi);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if has_phase(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> LatticeConfig {
        LatticeConfig::default()
    }

    #[test]
    fn reference_points_classify() {
        let o = PhaseOptions::default();
        assert!(is_unbroken(15.0, 10.0, &cfg(), &o).unwrap().unbroken);
        assert!(!is_unbroken(2.0, 5.0, &cfg(), &o).unwrap().unbroken);
        for w in [0.5, 3.0, 15.0, 40.0] {
            let p = is_unbroken(w, 0.0, &cfg(), &o).unwrap();
            assert!(p.unbroken && p.max_imag < 1e-12, "omega={w} max_imag={}", p.max_imag);
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        let o = PhaseOptions::default();
        assert!(is_unbroken(0.0, 1.0, &cfg(), &o).is_err());
        assert!(is_unbroken(5.0, -1.0, &cfg(), &o).is_err());
        assert!(GridRange::new(1.0, 0.0, 3).is_err());
        assert!(GridRange::new(1.0, 2.0, 0).is_err());
    }

    #[test]
    fn refinement_catches_narrow_resonance() {
        // ω = 3: the folded bands cross near q ≈ 1.446 and break the symmetry
        // in a window much narrower than the grid spacing
        let coarse = PhaseOptions { refine: false, ..Default::default() };
        let fine = PhaseOptions::default();
        assert!(is_unbroken(3.0, 1e-3, &cfg(), &coarse).unwrap().unbroken);
        assert!(!is_unbroken(3.0, 1e-3, &cfg(), &fine).unwrap().unbroken);
    }

    #[test]
    fn threshold_below_onset_errors() {
        let err = threshold_amplitude(3.0, &cfg(), &PhaseOptions::default()).unwrap_err();
        assert!(matches!(err, Error::NoUnbrokenPhase { .. }));
    }

    #[test]
    fn zero_amplitude_row_unbroken() {
        let map = phase_map(
            GridRange::new(1.0, 20.0, 7).unwrap(),
            GridRange::new(0.0, 16.0, 3).unwrap(),
            &cfg(),
            &PhaseOptions::default(),
        )
        .unwrap();
        assert_eq!(map.points.len(), 21);
        for j in 0..map.omegas.len() {
            assert!(map.point(0, j).unbroken);
        }
        // row-major, amplitude rows
        assert_eq!(map.point(1, 0).delta0, 8.0);
        assert_eq!(map.point(1, 0).omega, 1.0);
    }

    #[test]
    fn unbracketed_search_errors() {
        let err = minimum_frequency(&cfg(), 10.0, 20.0, 1e-2, &PhaseOptions::default()).unwrap_err();
        assert!(matches!(err, Error::NotBracketed { .. }));
    }

    #[test]
    fn golden_section_finds_peak() {
        let q = golden_max(|x| -(x - 0.3).powi(2), 0.0, 1.0);
        assert!((q - 0.3).abs() < 1e-8);
    }
}
