use moltrap_core::constants;
use moltrap_core::oscillator::*;
use proptest::prelude::*;
use std::f64::consts::PI;

fn ion() -> OscillatorParams {
    let m = 1.67e-24;
    OscillatorParams::undamped(m, m * (2.0 * PI * 318e3f64).powi(2))
}

fn unit() -> OscillatorParams {
    OscillatorParams::undamped(1.0, 4.0 * PI * PI)
}

/// Final amplitude after `cycles` of drive, without storing the trajectory.
fn final_amplitude(p: &OscillatorParams, a0: f64, drive: &DriveWaveform, cycles: f64, steps_per_cycle: f64) -> f64 {
    let nu = natural_frequency(p);
    let t = cycles / nu;
    let dt = 1.0 / (steps_per_cycle * nu);
    let traj = integrate_strided(p, OscillatorState::at_turning_point(a0), drive, t, dt, u64::MAX).unwrap();
    traj.final_amplitude().unwrap()
}

#[test]
fn undriven_energy_conserved_over_a_million_steps() {
    let p = ion();
    let a0 = 4.17e-6;
    let mut prop = Propagator::new(p, OscillatorState::at_turning_point(a0), p.default_dt()).unwrap();
    let e0 = p.energy(&prop.state());
    let mut worst: f64 = 0.0;
    for _ in 0..1_000_000 {
        let s = prop.step(&Undriven).unwrap();
        worst = worst.max((p.energy(&s) - e0).abs() / e0);
    }
    assert!(worst <= 1e-9, "max relative energy error {worst:e}");
}

#[test]
fn resonant_square_slope_matches_analytic_over_ten_thousand_cycles() {
    let p = ion();
    let f = constants().nuclear_magneton * 100.0;
    let nu = natural_frequency(&p);
    let a0 = 4.17e-6;
    let drive = DriveWaveform::square(f, nu, DrivePhase::Zero);
    let cycles = 1e4;
    let gain = final_amplitude(&p, a0, &drive, cycles, DEFAULT_STEPS_PER_CYCLE) - a0;
    let numeric_slope = gain / (cycles / nu);
    let analytic = 4.0 * f * nu / p.spring_k;
    let rel = (numeric_slope - analytic).abs() / analytic;
    assert!(rel <= 1e-3, "slope relative error {rel:e}");
    // same law through the envelope function
    let env = analytic_envelope(&p, a0, &drive, cycles / nu).unwrap();
    assert!(((env - a0) - gain).abs() / gain <= 1e-3);
}

#[test]
fn phase_pi_loss_mirrors_phase_zero_gain() {
    let p = ion();
    let f = constants().nuclear_magneton * 100.0;
    let nu = natural_frequency(&p);
    let a0 = 4.17e-6;
    let up = DriveWaveform::square(f, nu, DrivePhase::Zero);
    let down = DriveWaveform::square(f, nu, DrivePhase::Pi);
    let gain = final_amplitude(&p, a0, &up, 1e4, DEFAULT_STEPS_PER_CYCLE) - a0;
    let loss = final_amplitude(&p, a0, &down, 1e4, DEFAULT_STEPS_PER_CYCLE) - a0;
    assert!(gain > 0.0 && loss < 0.0);
    assert!((gain + loss).abs() / gain <= 1e-3, "gain {gain:e} loss {loss:e}");
}

#[test]
fn negative_spin_force_reverses_the_effect() {
    let p = unit();
    let up = DriveWaveform::square(1e-2, 1.0, DrivePhase::Zero);
    let flipped = DriveWaveform::square(-1e-2, 1.0, DrivePhase::Zero);
    let pi = DriveWaveform::square(1e-2, 1.0, DrivePhase::Pi);
    let a = final_amplitude(&p, 1.0, &flipped, 20.0, 200.0);
    let b = final_amplitude(&p, 1.0, &pi, 20.0, 200.0);
    assert!((a - b).abs() < 1e-12);
    assert!(final_amplitude(&p, 1.0, &up, 20.0, 200.0) > 1.0);
}

#[test]
fn sine_drive_slope_matches_pi_f_nu_over_k() {
    let p = unit();
    let d = DriveWaveform::sine(1e-3, 1.0, DrivePhase::Zero);
    let gain = final_amplitude(&p, 1.0, &d, 200.0, 200.0) - 1.0;
    let expected = envelope_slope(&p, &d).unwrap() * 200.0;
    assert!((gain - expected).abs() / expected < 1e-3, "{gain} vs {expected}");
}

/// Starting from rest, a resonant sine drive approaches Q f / k with time
/// constant 2Q/ω. After five time constants the amplitude is within 1% of
/// its limit.
fn steady_state_ratio(q: f64) -> f64 {
    let p = OscillatorParams {
        quality: Some(q),
        ..unit()
    };
    let f = 1e-6;
    let tau = 2.0 * q / p.angular_frequency();
    let d = DriveWaveform::sine(f, 1.0, DrivePhase::Zero);
    let dt = 1.0 / MIN_STEPS_PER_CYCLE;
    let traj = integrate_strided(&p, OscillatorState::at_turning_point(0.0), &d, 5.0 * tau, dt, u64::MAX).unwrap();
    traj.final_amplitude().unwrap() / (q * f / p.spring_k)
}

#[test]
fn finite_q_steady_state_q_1e3() {
    let r = steady_state_ratio(1e3);
    assert!((r - 1.0).abs() <= 0.05, "ratio {r}");
}

#[test]
fn finite_q_steady_state_q_1e6() {
    let r = steady_state_ratio(1e6);
    assert!((r - 1.0).abs() <= 0.05, "ratio {r}");
}

#[test]
#[ignore = "full 30 s ion-scale run, about 1e7 cycles"]
fn full_thirty_second_ion_readout() {
    let p = ion();
    let f = constants().nuclear_magneton * 100.0;
    let nu = natural_frequency(&p);
    let a0 = 4.17e-6;
    let drive = DriveWaveform::square(f, nu, DrivePhase::Zero);
    let gain = final_amplitude(&p, a0, &drive, 30.0 * nu, MIN_STEPS_PER_CYCLE) - a0;
    let analytic = 4.0 * f / p.spring_k * nu * 30.0;
    assert!((gain - analytic).abs() / analytic < 1e-3);
    assert!((gain - 3e-6).abs() / 3e-6 < 0.05);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn readout_sign_follows_phase(
        f in 1e-3f64..5e-2,
        cycles in 10.0f64..40.0,
        threshold_frac in 0.1f64..0.9,
        a0_factor in 2.0f64..10.0,
    ) {
        let p = unit();
        let nu = natural_frequency(&p);
        let predicted = 4.0 * f / p.spring_k * cycles;
        let threshold = threshold_frac * predicted;
        let a0 = a0_factor * predicted;
        let dt = p.default_dt();
        for (phase, expected) in [(DrivePhase::Zero, Readout::SpinUp), (DrivePhase::Pi, Readout::SpinDown)] {
            let d = DriveWaveform::square(f, nu, phase);
            let traj = integrate_strided(&p, OscillatorState::at_turning_point(a0), &d, cycles / nu, dt, 1000).unwrap();
            prop_assert_eq!(classify_readout(&traj, a0, threshold).unwrap(), expected);
        }
        let free = integrate_strided(&p, OscillatorState::at_turning_point(a0), &Undriven, cycles / nu, dt, 1000).unwrap();
        prop_assert_eq!(classify_readout(&free, a0, threshold).unwrap(), Readout::Indeterminate);
    }

    #[test]
    fn free_flow_conserves_energy_for_any_start(z in -1.0f64..1.0, v in -5.0f64..5.0) {
        prop_assume!(z.abs() + v.abs() > 1e-3);
        let p = unit();
        let s0 = OscillatorState { time: 0.0, z, vz: v };
        let e0 = p.energy(&s0);
        let traj = integrate_strided(&p, s0, &Undriven, 50.0, p.default_dt(), 97).unwrap();
        for s in &traj.states {
            prop_assert!((p.energy(s) - e0).abs() / e0 < 1e-11);
        }
    }
}
