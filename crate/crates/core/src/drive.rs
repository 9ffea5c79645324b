//! Periodic complex drive waveforms `Δ(t)` and their running phase integral
//! `Φ(t) = ∫₀ᵗ Δ(t′) dt′`.
//!
//! Every waveform is written as `Δ(t) = Δ₀ · s(u)` where `u = (ωt + θ)/2π`
//! counts drive cycles and `s` is a unit-amplitude, zero-mean, 1-periodic
//! shape:
//!
//! - [`Shape::Square`]: `s = +1` on the first half of each cycle, `-1` on the
//!   second. The default `θ = π/2` puts `+Δ₀` on `[-T/4, T/4)`.
//! - [`Shape::Sinusoid`]: `s = cos(2πu)`, default `θ = 0`.
//! - [`Shape::Sampled`]: zero-order hold over uniformly spaced samples,
//!   default `θ = 0`.
//!
//! With the defaults, all three closed-form shapes satisfy
//! `Φ(t - T/2) = -Φ(t)`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Constraint tolerance for closed-form shapes.
pub const CLOSED_FORM_TOL: f64 = 1e-10;
/// Constraint tolerance for sampled shapes.
pub const SAMPLED_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Square,
    Sinusoid,
    /// One period of unit-scale samples, uniformly spaced, held constant
    /// between sample points.
    Sampled(Vec<Complex64>),
}

impl Shape {
    pub fn name(&self) -> &'static str {
        match self {
            Shape::Square => "square",
            Shape::Sinusoid => "sin",
            Shape::Sampled(_) => "sampled",
        }
    }

    /// Phase `θ` that makes the phase integral antisymmetric.
    pub fn default_theta(&self) -> f64 {
        match self {
            Shape::Square => FRAC_PI_2,
            Shape::Sinusoid | Shape::Sampled(_) => 0.0,
        }
    }

    /// Number of discontinuities per cycle, `None` for smooth shapes.
    fn pieces(&self) -> Option<usize> {
        match self {
            Shape::Square => Some(2),
            Shape::Sinusoid => None,
            Shape::Sampled(s) => Some(s.len()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriveWaveform {
    shape: Shape,
    amplitude: Complex64,
    omega: f64,
    theta: f64,
    /// Cumulative integrals of the sampled shape, `prefix[k] = Σ_{j<k} s_j / m`.
    prefix: Vec<Complex64>,
}

impl DriveWaveform {
    pub fn new(shape: Shape, amplitude: Complex64, omega: f64, theta: f64) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "drive frequency must be positive and finite, got {omega}"
            )));
        }
        if !(amplitude.re.is_finite() && amplitude.im.is_finite()) {
            return Err(Error::InvalidArgument("drive amplitude must be finite".into()));
        }
        if !theta.is_finite() {
            return Err(Error::InvalidArgument("drive phase must be finite".into()));
        }
        let mut prefix = Vec::new();
        if let Shape::Sampled(samples) = &shape {
            if samples.len() < 2 {
                return Err(Error::InvalidArgument(format!(
                    "sampled waveform needs at least 2 samples, got {}",
                    samples.len()
                )));
            }
            if samples.iter().any(|s| !(s.re.is_finite() && s.im.is_finite())) {
                return Err(Error::InvalidArgument("non-finite waveform sample".into()));
            }
            let m = samples.len() as f64;
            prefix.reserve(samples.len() + 1);
            let mut acc = Complex64::new(0.0, 0.0);
            prefix.push(acc);
            for s in samples {
                acc += s / m;
                prefix.push(acc);
            }
            let scale = samples.iter().map(|s| s.norm()).fold(0.0, f64::max);
            if acc.norm() > SAMPLED_TOL * scale.max(f64::MIN_POSITIVE) {
                return Err(Error::ConstraintViolated(format!(
                    "sampled waveform has nonzero mean {acc}"
                )));
            }
        }
        Ok(Self { shape, amplitude, omega, theta, prefix })
    }

    /// Square wave with the antisymmetric default phase.
    pub fn square(amplitude: Complex64, omega: f64) -> Result<Self> {
        Self::new(Shape::Square, amplitude, omega, Shape::Square.default_theta())
    }

    /// `Δ₀ cos(ωt)`.
    pub fn sinusoid(amplitude: Complex64, omega: f64) -> Result<Self> {
        Self::new(Shape::Sinusoid, amplitude, omega, 0.0)
    }

    pub fn sampled(samples: Vec<Complex64>, amplitude: Complex64, omega: f64) -> Result<Self> {
        Self::new(Shape::Sampled(samples), amplitude, omega, 0.0)
    }

    /// Same waveform with another time origin.
    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn amplitude(&self) -> Complex64 {
        self.amplitude
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    pub fn is_piecewise_constant(&self) -> bool {
        self.shape.pieces().is_some()
    }

    /// Default tolerance for the zero-mean and antisymmetry checks.
    pub fn default_tolerance(&self) -> f64 {
        match self.shape {
            Shape::Sampled(_) => SAMPLED_TOL,
            _ => CLOSED_FORM_TOL,
        }
    }

    #[inline]
    fn cycles(&self, t: f64) -> f64 {
        (self.omega * t + self.theta) / (2.0 * PI)
    }

    /// Unit shape at cycle coordinate `u`.
    fn unit_value(&self, u: f64) -> Complex64 {
        let frac = u - u.floor();
        match &self.shape {
            Shape::Square => Complex64::new(if frac < 0.5 { 1.0 } else { -1.0 }, 0.0),
            Shape::Sinusoid => Complex64::new((2.0 * PI * u).cos(), 0.0),
            Shape::Sampled(s) => {
                let k = ((frac * s.len() as f64) as usize).min(s.len() - 1);
                s[k]
            }
        }
    }

    /// Antiderivative of the unit shape in `u`, zero at `u = 0`.
    fn unit_integral(&self, u: f64) -> Complex64 {
        let whole = u.floor();
        let frac = u - whole;
        match &self.shape {
            Shape::Square => Complex64::new(if frac < 0.5 { frac } else { 1.0 - frac }, 0.0),
            Shape::Sinusoid => Complex64::new((2.0 * PI * u).sin() / (2.0 * PI), 0.0),
            Shape::Sampled(s) => {
                let m = s.len();
                let k = ((frac * m as f64) as usize).min(m - 1);
                let within = frac - k as f64 / m as f64;
                self.prefix[m] * whole + self.prefix[k] + s[k] * within
            }
        }
    }

    /// `Δ(t)`.
    pub fn evaluate(&self, t: f64) -> Complex64 {
        self.amplitude * self.unit_value(self.cycles(t))
    }

    /// `Φ(t) = ∫₀ᵗ Δ(t′) dt′`, exact for every shape (the sampled shape is
    /// integrated piece by piece).
    pub fn phase_integral(&self, t: f64) -> Complex64 {
        let diff = self.unit_integral(self.cycles(t)) - self.unit_integral(self.cycles(0.0));
        self.amplitude * diff * self.period()
    }

    /// `|∫₀ᵀ Δ(t) dt|`.
    pub fn zero_mean_residual(&self) -> f64 {
        self.phase_integral(self.period()).norm()
    }

    /// `max_k |Φ(t_k - T/2) + Φ(t_k)|` over `n_samples` uniformly spaced
    /// times in one period.
    pub fn antisymmetry_residual(&self, n_samples: usize) -> f64 {
        let period = self.period();
        (0..n_samples)
            .map(|k| {
                let t = period * k as f64 / n_samples as f64;
                (self.phase_integral(t - 0.5 * period) + self.phase_integral(t)).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Whether `Φ(t - T/2) = -Φ(t)` holds within `tol` on `n_samples` points.
    pub fn check_antisymmetry(&self, n_samples: usize, tol: f64) -> Result<bool> {
        if n_samples < 16 {
            return Err(Error::InvalidArgument(format!(
                "antisymmetry check needs at least 16 samples, got {n_samples}"
            )));
        }
        Ok(self.antisymmetry_residual(n_samples) < tol)
    }

    /// Discontinuity times strictly inside `(t0, t1)`, ascending. Empty for
    /// smooth shapes.
    pub fn breakpoints(&self, t0: f64, t1: f64) -> Vec<f64> {
        let Some(m) = self.shape.pieces() else {
            return Vec::new();
        };
        let m = m as f64;
        let period = self.period();
        let eps = 1e-12 * period;
        let first = (self.cycles(t0) * m).floor() as i64;
        let last = (self.cycles(t1) * m).ceil() as i64;
        (first..=last)
            .map(|j| (j as f64 / m) * period - self.theta / self.omega)
            .filter(|&t| t > t0 + eps && t < t1 - eps)
            .collect()
    }

    /// `[t0, t1]` cut at the drive discontinuities.
    pub fn segments(&self, t0: f64, t1: f64) -> Vec<(f64, f64)> {
        let mut edges = Vec::with_capacity(4);
        edges.push(t0);
        edges.extend(self.breakpoints(t0, t1));
        edges.push(t1);
        edges.windows(2).map(|w| (w[0], w[1])).collect()
    }

    /// One-line parameter summary for output metadata.
    pub fn describe(&self) -> String {
        let mut s = format!(
            "waveform={} delta0_re={} delta0_im={} omega={} theta={}",
            self.shape.name(),
            self.amplitude.re,
            self.amplitude.im,
            self.omega,
            self.theta
        );
        if let Shape::Sampled(samples) = &self.shape {
            s.push_str(&format!(" samples={}", samples.len()));
        }
        s
    }
}

/// Parses a sampled waveform: one `re im` pair (or a bare `re`) per line.
/// Blank lines and lines starting with `#` are skipped.
pub fn parse_samples(text: &str) -> Result<Vec<Complex64>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(|c: char| c.is_whitespace() || c == ',')
            .filter(|f| !f.is_empty())
            .collect();
        let parse = |f: &str| {
            f.parse::<f64>().map_err(|e| Error::Parse {
                line: idx + 1,
                msg: format!("{f:?}: {e}"),
            })
        };
        let value = match fields.as_slice() {
            [re] => Complex64::new(parse(re)?, 0.0),
            [re, im] => Complex64::new(parse(re)?, parse(im)?),
            _ => {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: format!("expected `re im`, got {} fields", fields.len()),
                })
            }
        };
        out.push(value);
    }
    Ok(out)
}

pub fn load_samples(path: impl AsRef<Path>) -> Result<Vec<Complex64>> {
    parse_samples(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn square_wave(amp: Complex64, omega: f64) -> DriveWaveform {
        DriveWaveform::square(amp, omega).unwrap()
    }

    #[test]
    fn square_wave_sign_convention() {
        let w = square_wave(re(1.0), 2.0 * PI);
        assert_eq!(w.evaluate(0.0), re(1.0));
        assert_eq!(w.evaluate(0.6), re(-1.0));
        assert_eq!(w.evaluate(-0.2), re(1.0));
        assert_eq!(w.evaluate(0.26), re(-1.0));
        assert_eq!(w.evaluate(0.8), re(1.0));
    }

    #[test]
    fn zero_amplitude_is_zero_everywhere() {
        let shapes = [Shape::Square, Shape::Sinusoid, Shape::Sampled(vec![re(1.0), re(-1.0)])];
        for shape in shapes {
            let w = DriveWaveform::new(shape.clone(), re(0.0), 3.0, shape.default_theta()).unwrap();
            for k in 0..20 {
                let t = 0.17 * k as f64 - 1.0;
                assert_eq!(w.evaluate(t).norm(), 0.0);
                assert_eq!(w.phase_integral(t).norm(), 0.0);
            }
            assert!(w.check_antisymmetry(64, 1e-12).unwrap());
        }
    }

    #[test]
    fn too_few_samples_rejected() {
        let err = DriveWaveform::sampled(vec![re(1.0)], re(1.0), 1.0).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
        let err = DriveWaveform::sampled(vec![], re(1.0), 1.0).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }

    #[test]
    fn nonzero_mean_samples_rejected() {
        let err = DriveWaveform::sampled(vec![re(1.0), re(0.5)], re(1.0), 1.0).unwrap_err();
        assert!(matches!(err, Error::ConstraintViolated(_)));
    }

    #[test]
    fn bad_frequency_rejected() {
        assert!(DriveWaveform::square(re(1.0), 0.0).is_err());
        assert!(DriveWaveform::square(re(1.0), -2.0).is_err());
        assert!(DriveWaveform::square(re(1.0), f64::NAN).is_err());
    }

    #[test]
    fn square_phase_integral_quarter_ramp() {
        let amp = Complex64::new(1.3, -0.4);
        let w = square_wave(amp, 7.0);
        let t = w.period();
        assert!((w.phase_integral(t / 4.0) - amp * t / 4.0).norm() < 1e-14);
        assert!(w.phase_integral(t).norm() < 1e-12);
        assert!(w.phase_integral(0.0).norm() == 0.0);
        // triangle: back to zero at T/2, minimum at 3T/4
        assert!(w.phase_integral(t / 2.0).norm() < 1e-14);
        assert!((w.phase_integral(0.75 * t) + amp * t / 4.0).norm() < 1e-14);
    }

    #[test]
    fn sinusoid_antiderivative() {
        let amp = re(2.5);
        let omega = 3.0;
        let w = DriveWaveform::sinusoid(amp, omega).unwrap();
        for k in 0..50 {
            let t = -2.0 + 0.13 * k as f64;
            let expected = amp * (omega * t).sin() / omega;
            assert!((w.phase_integral(t) - expected).norm() < 1e-13);
            assert!((w.evaluate(t) - amp * (omega * t).cos()).norm() < 1e-13);
        }
    }

    #[test]
    fn antisymmetry_default_vs_zero_theta() {
        let w = square_wave(re(1.0), 2.0 * PI);
        assert!(w.check_antisymmetry(64, CLOSED_FORM_TOL).unwrap());

        // θ = 0 puts +Δ₀ on [0, T/2): Φ(T/4 - T/2) + Φ(T/4) = Δ₀T/2.
        let shifted = w.clone().with_theta(0.0);
        assert!(!shifted.check_antisymmetry(64, CLOSED_FORM_TOL).unwrap());
        let t = shifted.period();
        let at_quarter = shifted.phase_integral(t / 4.0 - t / 2.0) + shifted.phase_integral(t / 4.0);
        assert!((at_quarter - re(t / 2.0)).norm() < 1e-14);

        let sin = DriveWaveform::sinusoid(Complex64::new(0.0, -3.0), 5.0).unwrap();
        assert!(sin.check_antisymmetry(128, CLOSED_FORM_TOL).unwrap());
    }

    #[test]
    fn antisymmetry_needs_enough_samples() {
        let w = square_wave(re(1.0), 1.0);
        assert!(matches!(w.check_antisymmetry(8, 1e-3), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn sampled_square_matches_closed_form() {
        // eight samples of a square wave starting at the falling edge +T/4
        let samples: Vec<_> = (0..8).map(|k| re(if k < 2 || k >= 6 { 1.0 } else { -1.0 })).collect();
        let amp = re(0.9);
        let sampled = DriveWaveform::sampled(samples, amp, 4.0).unwrap();
        let square = square_wave(amp, 4.0);
        for k in 0..97 {
            let t = -1.3 + 0.031 * k as f64;
            assert!((sampled.phase_integral(t) - square.phase_integral(t)).norm() < 1e-13);
        }
        assert!(sampled.check_antisymmetry(64, SAMPLED_TOL).unwrap());
        assert!(sampled.zero_mean_residual() < 1e-14);
    }

    #[test]
    fn breakpoints_land_on_edges() {
        let w = square_wave(re(1.0), 2.0 * PI);
        let bp = w.breakpoints(0.0, 2.0);
        let expected = [0.25, 0.75, 1.25, 1.75];
        assert_eq!(bp.len(), expected.len());
        for (a, b) in bp.iter().zip(expected) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!(w.breakpoints(0.3, 0.7).is_empty());
        let segs = w.segments(0.0, 1.0);
        assert_eq!(segs.len(), 3);
        assert!(DriveWaveform::sinusoid(re(1.0), 1.0).unwrap().breakpoints(0.0, 100.0).is_empty());
    }

    #[test]
    fn parse_sample_file() {
        let text = "# header\n1.0 0.5\n\n-1 -0.5\n0.25\n";
        let s = parse_samples(text).unwrap();
        assert_eq!(s, vec![Complex64::new(1.0, 0.5), Complex64::new(-1.0, -0.5), re(0.25)]);
        assert!(matches!(parse_samples("1 2 3"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_samples("0 0\nabc 1"), Err(Error::Parse { line: 2, .. })));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn shape_strategy() -> impl Strategy<Value = Shape> {
            prop_oneof![Just(Shape::Square), Just(Shape::Sinusoid)]
        }

        proptest! {
            #[test]
            fn periodic_and_zero_mean(
                shape in shape_strategy(),
                re_amp in -15.0..15.0f64,
                im_amp in -15.0..15.0f64,
                omega in 0.5..30.0f64,
                t in -20.0..20.0f64,
            ) {
                let theta = shape.default_theta();
                let w = DriveWaveform::new(shape, Complex64::new(re_amp, im_amp), omega, theta).unwrap();
                let period = w.period();
                let scale = 1.0 + w.amplitude().norm() * period;
                prop_assert!((w.evaluate(t + period) - w.evaluate(t)).norm() <= 1e-9 * (1.0 + w.amplitude().norm()));
                prop_assert!(w.zero_mean_residual() < 1e-12 * scale);
                prop_assert!((w.phase_integral(t + period) - w.phase_integral(t)).norm() < 1e-11 * scale);
                prop_assert!(w.antisymmetry_residual(64) < CLOSED_FORM_TOL * scale);
            }

            #[test]
            fn hermitian_duality(
                shape in shape_strategy(),
                amp in -15.0..15.0f64,
                omega in 0.5..30.0f64,
                t in -20.0..20.0f64,
            ) {
                let theta = shape.default_theta();
                let imag = DriveWaveform::new(shape.clone(), Complex64::new(0.0, amp), omega, theta).unwrap();
                let real = DriveWaveform::new(shape, Complex64::new(amp, 0.0), omega, theta).unwrap();
                prop_assert_eq!(imag.evaluate(t).re, 0.0);
                prop_assert_eq!(real.evaluate(t).im, 0.0);
            }
        }
    }
}
