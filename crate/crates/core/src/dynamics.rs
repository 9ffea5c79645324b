//! Real-space evolution of the driven lattice
//!
//! ```text
//! i dc_n/dt = -κ (c_{n-1} + c_{n+1}) + i (-1)^n Δ(t) c_n
//! ```
//!
//! on a finite, odd-sized lattice with hard walls, plus the spreading
//! observables built on it and the high-frequency effective hopping
//! `κ′ = κ ⟨e^{-2Φ(t)}⟩_T`.

use num_complex::Complex64;

use crate::drive::DriveWaveform;
use crate::error::{Error, Result};
use crate::export::{Cell, Table};
use crate::fit::{linear_fit, LinearFit};
use crate::floquet::LatticeConfig;
use crate::mat2::sinhc_sqrt;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Edge occupation, relative to the peak, that counts as boundary contact.
pub const EDGE_FRACTION: f64 = 1e-6;
/// Norm beyond which a run is reported as diverged.
const DIVERGENCE_NORM: f64 = 1e200;

/// Amplitudes `c_n` on sites `n = -(N-1)/2 ..= (N-1)/2` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeState {
    amplitudes: Vec<Complex64>,
    t: f64,
}

impl LatticeState {
    pub fn new(amplitudes: Vec<Complex64>, t: f64) -> Result<Self> {
        if amplitudes.len().is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "lattice needs an odd number of sites, got {}",
                amplitudes.len()
            )));
        }
        if amplitudes.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::InvalidArgument("non-finite amplitude".into()));
        }
        Ok(Self { amplitudes, t })
    }

    pub fn sites(&self) -> usize {
        self.amplitudes.len()
    }

    /// Largest site index, `(N-1)/2`.
    pub fn half_width(&self) -> i64 {
        (self.amplitudes.len() / 2) as i64
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Site index `n` of array slot `i`.
    pub fn site(&self, i: usize) -> i64 {
        i as i64 - self.half_width()
    }

    pub fn amplitude(&self, n: i64) -> Option<Complex64> {
        let i = n + self.half_width();
        (0..self.amplitudes.len() as i64).contains(&i).then(|| self.amplitudes[i as usize])
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn occupations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }
}

fn check_sites(n: usize) -> Result<()> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("site count must be odd and at least 3, got {n}")));
    }
    Ok(())
}

/// `c_n(0) = δ_{n,0}`.
pub fn single_site_excitation(sites: usize) -> Result<LatticeState> {
    check_sites(sites)?;
    let mut amplitudes = vec![ZERO; sites];
    amplitudes[sites / 2] = Complex64::new(1.0, 0.0);
    LatticeState::new(amplitudes, 0.0)
}

/// `c_n(0) = exp[-(n/w)² + i n q₀]`, deliberately not normalised.
pub fn gaussian_excitation(sites: usize, width: f64, momentum: f64) -> Result<LatticeState> {
    check_sites(sites)?;
    if !(width > 0.0 && width.is_finite()) || !momentum.is_finite() {
        return Err(Error::InvalidArgument(format!("invalid wavepacket width {width} or momentum {momentum}")));
    }
    let half = (sites / 2) as i64;
    let amplitudes = (-half..=half)
        .map(|n| {
            let x = n as f64;
            Complex64::from_polar((-(x / width).powi(2)).exp(), x * momentum)
        })
        .collect();
    LatticeState::new(amplitudes, 0.0)
}

/// Norm `N = Σ|c_n|²`, mean site `n̄` and spread `σ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables {
    pub norm: f64,
    pub mean: f64,
    pub sigma: f64,
}

pub fn observables(s: &LatticeState) -> Result<Observables> {
    let occ = s.occupations();
    let norm: f64 = occ.iter().sum();
    if !(norm > 0.0) {
        return Err(Error::ZeroNorm);
    }
    let mean = occ.iter().enumerate().map(|(i, p)| s.site(i) as f64 * p).sum::<f64>() / norm;
    let var = occ
        .iter()
        .enumerate()
        .map(|(i, p)| (s.site(i) as f64 - mean).powi(2) * p)
        .sum::<f64>()
        / norm;
    Ok(Observables { norm, mean, sigma: var.sqrt() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    pub n_periods: usize,
    /// Must be even.
    pub steps_per_period: usize,
    /// Record a sample every this many periods.
    pub snapshot_every: usize,
    /// Keep the full amplitude vector with every sample.
    pub keep_fields: bool,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { n_periods: 80, steps_per_period: 512, snapshot_every: 1, keep_fields: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub observables: Observables,
    pub field: Option<Vec<Complex64>>,
}

/// Result of [`evolve`]: time-ordered samples plus run metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    samples: Vec<Sample>,
    final_state: LatticeState,
    drive: DriveWaveform,
    kappa: f64,
    steps_per_period: usize,
    boundary_contact: Option<f64>,
    warnings: Vec<String>,
}

impl Trajectory {
    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn final_state(&self) -> &LatticeState {
        &self.final_state
    }

    pub fn drive(&self) -> &DriveWaveform {
        &self.drive
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn sites(&self) -> usize {
        self.final_state.sites()
    }

    pub fn steps_per_period(&self) -> usize {
        self.steps_per_period
    }

    /// First checked time at which the edge occupation exceeded
    /// [`EDGE_FRACTION`] of the peak.
    pub fn boundary_contact(&self) -> Option<f64> {
        self.boundary_contact
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn sigmas(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.observables.sigma).collect()
    }

    /// `[25%, 95%]` of the run, cut off at boundary contact.
    pub fn default_fit_window(&self) -> (f64, f64) {
        let end = self.samples.last().map_or(0.0, |s| s.t);
        let hi = 0.95 * end;
        (0.25 * end, self.boundary_contact.map_or(hi, |tc| tc.min(hi)))
    }

    /// `t,norm,mean,sigma` rows.
    pub fn observables_table(&self) -> Table {
        let mut table = Table::new(["t", "norm", "mean", "sigma"]);
        for s in &self.samples {
            let o = s.observables;
            table.push_row(vec![Cell::F(s.t), Cell::F(o.norm), Cell::F(o.mean), Cell::F(o.sigma)]);
        }
        table
    }

    /// One row of `|c_n|²` per retained snapshot, columns labelled by site.
    pub fn field_table(&self) -> Option<Table> {
        let half = self.final_state.half_width();
        let mut table = Table::new((-half..=half).map(|n| n.to_string()));
        for s in &self.samples {
            let field = s.field.as_ref()?;
            table.push_row(field.iter().map(|c| Cell::F(c.norm_sqr())).collect());
        }
        Some(table)
    }
}

/// Right-hand side `dc_n/dt = iκ(c_{n-1} + c_{n+1}) + (-1)^n Δ c_n`.
fn rhs(c: &[Complex64], delta: Complex64, kappa: f64, parity: &[f64], out: &mut [Complex64]) {
    let n = c.len();
    let hop = I * kappa;
    for i in 0..n {
        let left = if i > 0 { c[i - 1] } else { ZERO };
        let right = if i + 1 < n { c[i + 1] } else { ZERO };
        out[i] = hop * (left + right) + delta * parity[i] * c[i];
    }
}

struct Rk4Buffers {
    k1: Vec<Complex64>,
    k2: Vec<Complex64>,
    k3: Vec<Complex64>,
    k4: Vec<Complex64>,
    tmp: Vec<Complex64>,
}

impl Rk4Buffers {
    fn new(n: usize) -> Self {
        Self { k1: vec![ZERO; n], k2: vec![ZERO; n], k3: vec![ZERO; n], k4: vec![ZERO; n], tmp: vec![ZERO; n] }
    }

    /// One classical RK4 step; `drive` gives `Δ` at the three stage times.
    fn step(&mut self, c: &mut [Complex64], drive: [Complex64; 3], h: f64, kappa: f64, parity: &[f64]) {
        let [d0, dm, d1] = drive;
        rhs(c, d0, kappa, parity, &mut self.k1);
        for ((t, &ci), &k) in self.tmp.iter_mut().zip(c.iter()).zip(&self.k1) {
            *t = ci + k * (0.5 * h);
        }
        rhs(&self.tmp, dm, kappa, parity, &mut self.k2);
        for ((t, &ci), &k) in self.tmp.iter_mut().zip(c.iter()).zip(&self.k2) {
            *t = ci + k * (0.5 * h);
        }
        rhs(&self.tmp, dm, kappa, parity, &mut self.k3);
        for ((t, &ci), &k) in self.tmp.iter_mut().zip(c.iter()).zip(&self.k3) {
            *t = ci + k * h;
        }
        rhs(&self.tmp, d1, kappa, parity, &mut self.k4);
        let w = h / 6.0;
        for (i, ci) in c.iter_mut().enumerate() {
            *ci += (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]) * w;
        }
    }
}

fn edge_contact(c: &[Complex64]) -> bool {
    let peak = c.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
    let edge = c[0].norm_sqr().max(c[c.len() - 1].norm_sqr());
    peak > 0.0 && edge > EDGE_FRACTION * peak
}

/// Integrates the lattice equations with fixed-step RK4 from `s0.time()`.
///
/// Every drive period is cut at the drive discontinuities and each piece is
/// stepped separately, so no step straddles a jump. Samples are taken at the
/// start and every `snapshot_every` periods; boundary contact is checked at
/// the end of every period.
pub fn evolve(
    s0: &LatticeState,
    w: &DriveWaveform,
    cfg: &LatticeConfig,
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    if opts.steps_per_period == 0 || !opts.steps_per_period.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "steps per period must be even and positive, got {}",
            opts.steps_per_period
        )));
    }
    if opts.snapshot_every == 0 {
        return Err(Error::InvalidArgument("snapshot interval must be at least one period".into()));
    }
    let kappa = cfg.kappa();
    let period = w.period();
    let t_start = s0.time();
    let mut state = s0.clone();
    let parity: Vec<f64> = (0..state.sites())
        .map(|i| if state.site(i).rem_euclid(2) == 0 { 1.0 } else { -1.0 })
        .collect();
    let mut buffers = Rk4Buffers::new(state.sites());
    let piecewise = w.is_piecewise_constant();

    let sample = |s: &LatticeState| -> Result<Sample> {
        Ok(Sample {
            t: s.t,
            observables: observables(s)?,
            field: opts.keep_fields.then(|| s.amplitudes.clone()),
        })
    };
    let mut samples = vec![sample(&state)?];
    let mut boundary_contact = edge_contact(&state.amplitudes).then_some(t_start);

    for p in 0..opts.n_periods {
        let p_start = t_start + p as f64 * period;
        for (a, b) in w.segments(p_start, p_start + period) {
            let len = b - a;
            let n = ((opts.steps_per_period as f64 * len / period).round() as usize).max(1);
            let h = len / n as f64;
            let held = piecewise.then(|| w.evaluate(0.5 * (a + b)));
            for j in 0..n {
                let t = a + j as f64 * h;
                let drive = match held {
                    Some(d) => [d; 3],
                    None => [w.evaluate(t), w.evaluate(t + 0.5 * h), w.evaluate(t + h)],
                };
                buffers.step(&mut state.amplitudes, drive, h, kappa, &parity);
            }
        }
        state.t = p_start + period;

        let norm: f64 = state.amplitudes.iter().map(|c| c.norm_sqr()).sum();
        if !(norm.is_finite() && norm < DIVERGENCE_NORM) {
            return Err(Error::Diverged { t: state.t });
        }
        if boundary_contact.is_none() && edge_contact(&state.amplitudes) {
            boundary_contact = Some(state.t);
        }
        if (p + 1) % opts.snapshot_every == 0 {
            samples.push(sample(&state)?);
        }
    }

    let warnings = boundary_contact
        .map(|tc| vec![format!("wavefront reached the lattice edge at t = {tc}")])
        .unwrap_or_default();
    Ok(Trajectory {
        samples,
        final_state: state,
        drive: w.clone(),
        kappa,
        steps_per_period: opts.steps_per_period,
        boundary_contact,
        warnings,
    })
}

/// Least-squares fit of `σ(t)`; the slope is the ballistic velocity.
pub type VelocityFit = LinearFit;

/// Fits `σ(t)` over samples with `window.0 ≤ t ≤ window.1`; at least ten
/// samples are required.
pub fn ballistic_velocity(traj: &Trajectory, window: (f64, f64)) -> Result<VelocityFit> {
    let (t, sigma): (Vec<f64>, Vec<f64>) = traj
        .samples()
        .iter()
        .filter(|s| s.t >= window.0 && s.t <= window.1)
        .map(|s| (s.t, s.observables.sigma))
        .unzip();
    if t.len() < 10 {
        return Err(Error::InsufficientData { needed: 10, got: t.len() });
    }
    if sigma.iter().any(|s| !s.is_finite()) {
        return Err(Error::Numeric("non-finite spread in fit window".into()));
    }
    linear_fit(&t, &sigma)
}

/// High-frequency renormalised hopping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveHopping {
    /// `κ′ = κ ⟨e^{-2Φ}⟩_T`.
    pub kappa_eff: Complex64,
    /// `κ′/κ` from quadrature of `e^{-2Φ}`.
    pub ratio: Complex64,
    /// `⟨e^{+2Φ}⟩_T`, equal to `ratio` for an antisymmetric phase integral.
    pub mirror_ratio: Complex64,
    /// `2 sinh(Δ₀T/2)/(Δ₀T)` for square waves.
    pub closed_form_ratio: Option<Complex64>,
}

// 5-point Gauss-Legendre on [-1, 1]
const GL_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];
const PANELS_PER_PERIOD: usize = 256;

/// `(1/T) ∫₀ᵀ f(Φ(t)) dt` by composite Gauss-Legendre, panels aligned with
/// drive discontinuities. Normalised by the summed weights, so a constant
/// integrand is reproduced exactly.
fn period_average(w: &DriveWaveform, f: impl Fn(Complex64) -> Complex64) -> Complex64 {
    let period = w.period();
    let mut acc = ZERO;
    let mut total = 0.0;
    for (a, b) in w.segments(0.0, period) {
        let panels = ((PANELS_PER_PERIOD as f64 * (b - a) / period).ceil() as usize).max(1);
        let h = (b - a) / panels as f64;
        for p in 0..panels {
            let mid = a + (p as f64 + 0.5) * h;
            for (x, wt) in GL_NODES.iter().zip(GL_WEIGHTS) {
                acc += f(w.phase_integral(mid + 0.5 * h * x)) * (wt * 0.5 * h);
                total += wt * 0.5 * h;
            }
        }
    }
    acc / total
}

/// `κ′ = κ (1/T) ∫₀ᵀ e^{-2Φ(t)} dt`.
///
/// Requires `Φ(t - T/2) = -Φ(t)`, under which the mirrored average of
/// `e^{+2Φ}` must agree; both are computed and compared. For square waves
/// the closed form is evaluated as well and must agree with the quadrature.
pub fn effective_hopping(w: &DriveWaveform, cfg: &LatticeConfig) -> Result<EffectiveHopping> {
    let period = w.period();
    let scale = 1f64.max(w.amplitude().norm() * period);
    let tol = w.default_tolerance();
    if !w.check_antisymmetry(256, tol * scale)? {
        return Err(Error::ConstraintViolated(format!(
            "phase integral is not antisymmetric (residual {})",
            w.antisymmetry_residual(256)
        )));
    }
    let ratio = period_average(w, |phi| (-2.0 * phi).exp());
    let mirror_ratio = period_average(w, |phi| (2.0 * phi).exp());
    let agree = 1e-9f64.max(tol * 1e-1);
    if (ratio - mirror_ratio).norm() > agree * ratio.norm().max(1.0) {
        return Err(Error::ConstraintViolated(format!(
            "mirrored hopping integrals differ: {ratio} vs {mirror_ratio}"
        )));
    }
    let closed_form_ratio = match w.shape() {
        crate::drive::Shape::Square => {
            let x = w.amplitude() * (0.5 * period);
            let closed = sinhc_sqrt(x * x, 1.0);
            if (closed - ratio).norm() > 1e-9 * closed.norm().max(1.0) {
                return Err(Error::Numeric(format!("hopping quadrature {ratio} disagrees with closed form {closed}")));
            }
            Some(closed)
        }
        _ => None,
    };
    Ok(EffectiveHopping { kappa_eff: ratio * cfg.kappa(), ratio, mirror_ratio, closed_form_ratio })
}
