mod common;

use std::f64::consts::{PI, SQRT_2};

use common::{bessel_i0, bessel_j, c};
use ptfloquet::{
    ballistic_velocity, effective_hopping, evolve, observables, single_site_excitation,
    DriveWaveform, EvolveOptions, LatticeConfig, Trajectory,
};

fn run(amp: num_complex::Complex64, omega: f64, sites: usize, periods: usize, steps: usize) -> Trajectory {
    let w = DriveWaveform::square(amp, omega).unwrap();
    let opts = EvolveOptions { n_periods: periods, steps_per_period: steps, ..Default::default() };
    evolve(&single_site_excitation(sites).unwrap(), &w, &LatticeConfig::default(), &opts).unwrap()
}

#[test]
fn undriven_matches_bessel_solution() {
    // ω = 2π/10 puts a sample at every κt = 1, 2, ..., 10
    let omega = 2.0 * PI / 1.0;
    let w = DriveWaveform::square(c(0.0, 0.0), omega).unwrap();
    let opts = EvolveOptions { n_periods: 10, steps_per_period: 512, keep_fields: true, ..Default::default() };
    let traj = evolve(&single_site_excitation(201).unwrap(), &w, &LatticeConfig::default(), &opts).unwrap();
    let mut worst: f64 = 0.0;
    for s in traj.samples() {
        let field = s.field.as_ref().unwrap();
        for (i, a) in field.iter().enumerate() {
            let n = i as i64 - 100;
            let exact = bessel_j(n, 2.0 * s.t).powi(2);
            worst = worst.max((a.norm_sqr() - exact).abs());
        }
    }
    assert!(worst < 1e-6, "max pointwise error {worst}");
}

#[test]
fn undriven_spread_follows_sqrt2_law() {
    let traj = run(c(0.0, 0.0), 2.0 * PI / 0.25, 201, 40, 128);
    for s in traj.samples().iter().filter(|s| (2.0..=10.0).contains(&s.t)) {
        let expected = SQRT_2 * s.t;
        assert!((s.observables.sigma / expected - 1.0).abs() < 0.01, "t={} σ={}", s.t, s.observables.sigma);
    }
    let v = ballistic_velocity(&traj, (2.0, 10.0)).unwrap();
    assert!((v.slope - SQRT_2).abs() < 0.01 * SQRT_2, "V={}", v.slope);
}

#[test]
fn undriven_profile_is_mirror_symmetric() {
    let traj = run(c(0.0, 0.0), 15.0, 101, 20, 256);
    let a = traj.final_state();
    for n in 1..=a.half_width() {
        assert_eq!(a.amplitude(n).unwrap().norm(), a.amplitude(-n).unwrap().norm());
    }
}

#[test]
fn hermitian_drive_conserves_norm() {
    let traj = run(c(0.0, -10.7), 15.0, 201, 80, 512);
    for s in traj.samples() {
        assert!((s.observables.norm - 1.0).abs() < 1e-8, "t={} N={}", s.t, s.observables.norm);
    }
}

#[test]
fn pt_drive_norm_oscillates_but_stays_bounded() {
    let w = DriveWaveform::square(c(10.7, 0.0), 15.0).unwrap();
    // sample 16 times per period over the first 10 periods
    let opts = EvolveOptions { n_periods: 1, steps_per_period: 512, ..Default::default() };
    let mut state = single_site_excitation(201).unwrap();
    let mut norms = vec![];
    for _ in 0..10 {
        let traj = evolve(&state, &w, &LatticeConfig::default(), &opts).unwrap();
        norms.extend(traj.samples().iter().map(|s| s.observables.norm));
        state = traj.final_state().clone();
    }
    let (lo, hi) = norms.iter().fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
    assert!(hi - lo > 1e-3, "norm constant: {lo}..{hi}");
    assert!(hi < 10.0, "norm grew to {hi}");
    // no monotone growth: the per-period norms are not sorted ascending
    assert!(norms.windows(2).any(|p| p[1] < p[0]));
}

#[test]
fn pt_drive_mean_stays_bounded() {
    let traj = run(c(10.7, 0.0), 15.0, 201, 20, 512);
    for s in traj.samples() {
        assert!(s.observables.mean.abs() < 1.0, "t={} n̄={}", s.t, s.observables.mean);
    }
}

#[test]
fn step_refinement_is_fourth_order() {
    let finals: Vec<_> = [128, 256, 512, 1024]
        .iter()
        .map(|&steps| run(c(10.7, 0.0), 15.0, 101, 10, steps).final_state().amplitudes().to_vec())
        .collect();
    let diff = |a: &[num_complex::Complex64], b: &[num_complex::Complex64]| {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    };
    let d: Vec<f64> = finals.windows(2).map(|p| diff(&p[0], &p[1])).collect();
    for pair in d.windows(2) {
        let order = (pair[0] / pair[1]).log2();
        assert!((3.5..4.5).contains(&order), "differences {d:?}");
    }
    assert!(d[2] < 1e-8, "halving the default step moves amplitudes by {}", d[2]);
}

#[test]
fn hyper_ballistic_tracks_effective_hopping() {
    let cfg = LatticeConfig::default();
    let base = run(c(0.0, 0.0), 15.0, 201, 80, 512);
    let v0 = ballistic_velocity(&base, base.default_fit_window()).unwrap().slope;
    for amp in [6.0, 8.0, 10.7] {
        let traj = run(c(amp, 0.0), 15.0, 201, 80, 512);
        let v = ballistic_velocity(&traj, traj.default_fit_window()).unwrap().slope;
        let w = DriveWaveform::square(c(amp, 0.0), 15.0).unwrap();
        let k = effective_hopping(&w, &cfg).unwrap().ratio.re;
        assert!((v / v0 / k - 1.0).abs() < 0.2, "Δ₀={amp}: V ratio {} vs κ′/κ {k}", v / v0);
    }
}

#[test]
fn boundary_contact_is_reported() {
    let traj = run(c(10.7, 0.0), 15.0, 41, 40, 256);
    let t = traj.boundary_contact().expect("wavefront reaches the wall");
    assert!(t > 0.0 && t < traj.samples().last().unwrap().t);
    assert!(!traj.warnings().is_empty());
    let quiet = run(c(0.0, 0.0), 15.0, 201, 10, 256);
    assert!(quiet.boundary_contact().is_none());
}

#[test]
fn sampled_observables_match_snapshots() {
    let w = DriveWaveform::square(c(5.0, 0.0), 15.0).unwrap();
    let opts = EvolveOptions { n_periods: 6, snapshot_every: 2, keep_fields: true, ..Default::default() };
    let traj = evolve(&single_site_excitation(51).unwrap(), &w, &LatticeConfig::default(), &opts).unwrap();
    assert_eq!(traj.samples().len(), 4);
    for s in traj.samples() {
        let state = ptfloquet::LatticeState::new(s.field.clone().unwrap(), s.t).unwrap();
        assert_eq!(observables(&state).unwrap(), s.observables);
    }
}

/// Midpoint rule on a fine grid, independent of the Gauss-Legendre panels
/// used by the library.
fn midpoint_ratio(w: &DriveWaveform, m: usize) -> num_complex::Complex64 {
    let period = w.period();
    (0..m)
        .map(|k| (-2.0 * w.phase_integral((k as f64 + 0.5) * period / m as f64)).exp())
        .sum::<num_complex::Complex64>()
        / m as f64
}

#[test]
fn hopping_matches_direct_quadrature() {
    let cfg = LatticeConfig::default();
    let w = DriveWaveform::square(c(0.0, -10.7), 15.0).unwrap();
    let h = effective_hopping(&w, &cfg).unwrap();
    let direct = midpoint_ratio(&w, 10_000);
    assert!((h.ratio - direct).norm() < 1e-6);
    assert!((h.ratio.re - 0.3496).abs() < 1e-3);
    let real = DriveWaveform::square(c(10.7, 0.0), 15.0).unwrap();
    let h = effective_hopping(&real, &cfg).unwrap();
    assert!((h.ratio - midpoint_ratio(&real, 10_000)).norm() < 1e-6);
}

#[test]
fn mirror_identity_for_both_shapes() {
    let cfg = LatticeConfig::default();
    for amp in [c(10.7, 0.0), c(0.0, -10.7), c(3.0, 2.0)] {
        for w in [DriveWaveform::square(amp, 15.0).unwrap(), DriveWaveform::sinusoid(amp, 15.0).unwrap()] {
            let h = effective_hopping(&w, &cfg).unwrap();
            assert!((h.ratio - h.mirror_ratio).norm() < 1e-9, "{}", w.describe());
        }
    }
}

#[test]
fn sinusoid_hopping_is_bessel_renormalised() {
    // Φ = (Δ₀/ω) sin(ωt) gives ⟨e^{-2Φ}⟩ = I₀(2Δ₀/ω), or J₀(2|Δ₀|/ω) for imaginary Δ₀
    let cfg = LatticeConfig::default();
    for (amp, omega) in [(10.7, 15.0), (4.0, 6.0), (1.0, 20.0)] {
        let w = DriveWaveform::sinusoid(c(amp, 0.0), omega).unwrap();
        let h = effective_hopping(&w, &cfg).unwrap();
        assert!((h.ratio.re - bessel_i0(2.0 * amp / omega)).abs() < 1e-10);
        assert!(h.ratio.im.abs() < 1e-12);
        let w = DriveWaveform::sinusoid(c(0.0, amp), omega).unwrap();
        let h = effective_hopping(&w, &cfg).unwrap();
        assert!((h.ratio.re - bessel_j(0, 2.0 * amp / omega)).abs() < 1e-10);
    }
}
