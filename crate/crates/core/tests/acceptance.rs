//! Acceptance criteria 1–9. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

mod common;

use std::cell::Cell;
use std::f64::consts::PI;
use std::time::Instant;

use common::*;
use parity_core::cascade::{compare_schemes, tune_cascade};
use parity_core::device::{
    build_state_network, DevicePhases, Mode, ParityDevice, QubitState, ResonatorModel,
};
use parity_core::eraser::{eraser_residuals, solve_eraser, FreeParameters, SearchOptions};
use parity_core::estimates::{peak_power, purcell_t1};
use parity_core::fidelity::{
    build_mode_grid, default_grid, eraser_quality, fidelity_even_odd, fidelity_from_differences,
    fidelity_linear_closed, fidelity_numeric, fidelity_quadratic_closed, FidelityBranch,
    ProbePulse, DEFAULT_SPAN_SIGMAS,
};
use parity_core::network::reflection_coefficient;
use parity_core::units::{hz_to_rad, rad_to_hz, AngularFrequency};
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let (_, sol) = solve_three_qubit(ResonatorModel::Stub);
    let secs = start.elapsed().as_secs_f64();
    let f_ghz = sol.omega_p.hz() * 1e-9;
    let chi_mhz = rad_to_hz(sol.chi) * 1e-6;
    let dt = sol.delta_theta.abs().to_degrees();
    let pass = (f_ghz - 9.804).abs() <= 5e-3
        && (chi_mhz - 5.77).abs() <= 0.15
        && (dt - 172.9).abs() <= 1.0
        && secs < 60.0;
    outcome(
        pass,
        format!(
            "f_p={f_ghz:.6} GHz chi={chi_mhz:.4} MHz (chi/2pi) dtheta={dt:.3} deg in {secs:.2} s"
        ),
    )
}

fn winding_check(dev: &ParityDevice, turns: f64) -> (bool, f64, f64) {
    let states = QubitState::all(dev.qubits()).unwrap();
    let phases = DevicePhases::for_states(dev, &states).unwrap();
    let (mut worst, mut min_net) = (0.0f64, f64::INFINITY);
    for s in &states {
        let p = phases.profile(s).unwrap();
        worst = worst.max((p.winding().abs() - turns * PI).abs());
        min_net = min_net.min(p.net_change().abs());
    }
    (worst <= 1e-3, worst, min_net)
}

fn criterion_2() -> Outcome {
    let (t, sol) = solve_three_qubit(ResonatorModel::Stub);
    let dev = sol.device(&t).unwrap();
    let (pass, worst, min_net) = winding_check(&dev, 4.0);
    outcome(
        pass,
        format!("max ||winding| - 4pi| = {worst:.2e} rad over 8 states; min |net change| 9.6-10.2 GHz = {:.4} pi", min_net / PI),
    )
}

fn criterion_3() -> Outcome {
    let (t, sol) = solve_three_qubit(ResonatorModel::Stub);
    let res = eraser_residuals(&sol.device(&t).unwrap(), sol.omega_p).unwrap();
    let worst = res.iter().fold(0.0f64, |a, r| a.max(r.abs()));
    outcome(
        res.len() == 2 && worst < 1e-6,
        format!(
            "residuals {:?}",
            res.iter().map(|r| format!("{r:.3e}")).collect::<Vec<_>>()
        ),
    )
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let modes = [9.99, 10.0, 10.01]
        .iter()
        .map(|&f| Mode {
            omega: ghz(f),
            c_couple: 10e-15,
        })
        .collect();
    let template =
        ParityDevice::equal_chi(4, modes, hz_to_rad(5.77e6), 50.0, ResonatorModel::Stub).unwrap();
    let sol = match solve_eraser(
        &template,
        FreeParameters::ChiAndModes,
        template.band(),
        &SearchOptions::default(),
    ) {
        Ok(s) => s,
        Err(e) => return outcome(false, format!("solver failed: {e}")),
    };
    let secs = start.elapsed().as_secs_f64();
    let dev = sol.device(&template).unwrap();
    let res = eraser_residuals(&dev, sol.omega_p).unwrap();
    let worst_res = res.iter().fold(0.0f64, |a, r| a.max(r.abs()));
    let (wind_ok, worst_wind, _) = winding_check(&dev, 6.0);
    let modes_ghz: Vec<String> = sol
        .mode_omegas
        .iter()
        .map(|w| format!("{:.5}", rad_to_hz(*w) * 1e-9))
        .collect();
    outcome(
        res.len() == 3 && worst_res < 1e-6 && wind_ok && secs < 600.0,
        format!(
            "modes [{}] GHz, max residual {worst_res:.2e} rad, max winding error {worst_wind:.2e} rad, {secs:.1} s",
            modes_ghz.join(", ")
        ),
    )
}

fn criterion_5() -> Outcome {
    let wp = ghz(9.8);
    let mut worst_lin = 0.0f64;
    let mut worst_quad = 0.0f64;
    let mut worst_forms = 0.0f64;
    for &n in &[1.0, 5.0, 25.0] {
        let pulse = ProbePulse::from_photons(n, wp, 1e-6).unwrap();
        let w = pulse.bandwidth;
        let grid = default_grid(&pulse).unwrap();
        for &x in &[0.01, 0.1, 0.5] {
            let b = x / w;
            let f =
                fidelity_numeric(|o| Ok(b * (o - wp.value())), |_| Ok(0.0), &pulse, &grid).unwrap();
            worst_lin = worst_lin.max((f - fidelity_linear_closed(n, b, w).exact).abs());

            let b2 = x / (w * w);
            let f = fidelity_numeric(
                |o| Ok(b2 * (o - wp.value()).powi(2)),
                |_| Ok(0.0),
                &pulse,
                &grid,
            )
            .unwrap();
            let q = fidelity_quadratic_closed(n, b2, w);
            worst_quad = worst_quad.max((f - q.exact()).abs());
        }
    }
    for i in 0..=1000 {
        let y = 10.0 * i as f64 / 1000.0;
        for &n in &[1.0, 5.0, 25.0] {
            let q = fidelity_quadratic_closed(n, y, 1.0);
            worst_forms = worst_forms.max((q.complex_form - q.real_form).abs());
        }
    }
    outcome(
        worst_lin <= 1e-6 && worst_quad <= 1e-6 && worst_forms <= 1e-12,
        format!(
            "linear {worst_lin:.2e}, quadratic {worst_quad:.2e}, printed forms {worst_forms:.2e}"
        ),
    )
}

fn criterion_6() -> Outcome {
    let eo = fidelity_even_odd(5.0, PI);
    let exact = eo == (-10.0f64).exp();
    let (t, sol) = solve_three_qubit(ResonatorModel::Stub);
    let pulse = ProbePulse::from_photons(5.0, sol.omega_p, 1e-6).unwrap();
    let reports = eraser_quality(&t, &sol, &pulse).unwrap();
    let cross = reports
        .iter()
        .filter(|r| r.branch == FidelityBranch::EvenOdd)
        .fold(0.0f64, |a, r| a.max(r.f_numeric));
    outcome(
        exact && cross < 2e-4,
        format!(
            "F_even_odd(5, pi) = {eo:e} (exact: {exact}); max cross-parity F_numeric = {cross:.3e}"
        ),
    )
}

fn criterion_7() -> Outcome {
    let t1 = purcell_t1(hz_to_rad(5e9), hz_to_rad(5e6), hz_to_rad(5.77e6)).unwrap();
    let p = peak_power(5.0, ghz(9.804), 1e-6).unwrap();
    let t1_us = t1.cyclic * 1e6;
    outcome(
        (150.0..=210.0).contains(&t1_us) && (p.dbm + 135.0).abs() <= 0.5,
        format!(
            "T1 = {t1_us:.1} us (cyclic; angular {:.1} us), P = {:.2} dBm",
            t1.angular * 1e6,
            p.dbm
        ),
    )
}

fn criterion_8() -> Outcome {
    // unimodularity on random lossless networks
    let mut runner = TestRunner::new_with_rng(
        Config {
            cases: 1000,
            failure_persistence: None,
            ..Config::default()
        },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    );
    let worst_r = Cell::new(0.0f64);
    let cases = Cell::new(0usize);
    let run = runner.run(&(lossless_network(), probe_omega()), |(net, w)| {
        let r = reflection_coefficient(&net, AngularFrequency::new(w).unwrap(), 50.0);
        worst_r.set(worst_r.get().max((r.norm() - 1.0).abs()));
        cases.set(cases.get() + 1);
        Ok(())
    });
    let unimodular = run.is_ok() && cases.get() >= 1000 && worst_r.get() <= 1e-9;

    // exact Hamming-weight collapse on the raw networks
    let template = three_qubit_template(ResonatorModel::Stub);
    let mut collapse = true;
    for s in QubitState::all(3).unwrap() {
        let rep = QubitState::with_weight(3, s.weight()).unwrap();
        let (a, b) = (
            build_state_network(&template, &s).unwrap(),
            build_state_network(&template, &rep).unwrap(),
        );
        for k in 0..200 {
            let w = ghz(9.6 + 0.6 * k as f64 / 199.0);
            let (ra, rb) = (
                reflection_coefficient(&a, w, 50.0),
                reflection_coefficient(&b, w, 50.0),
            );
            collapse &= ra.re.to_bits() == rb.re.to_bits() && ra.im.to_bits() == rb.im.to_bits();
        }
    }

    // mode weights and grid convergence at the solved point
    let (t, sol) = solve_three_qubit(ResonatorModel::Stub);
    let pulse = ProbePulse::from_photons(5.0, sol.omega_p, 1e-6).unwrap();
    let g4 = build_mode_grid(pulse.omega_p, pulse.bandwidth, DEFAULT_SPAN_SIGMAS, 4001).unwrap();
    let g8 = build_mode_grid(pulse.omega_p, pulse.bandwidth, DEFAULT_SPAN_SIGMAS, 8001).unwrap();
    let norm = g4.norm_sqr();
    let norm_ok = (1.0 - 1e-6..=1.0).contains(&norm) && (1.0 - 1e-6..=1.0).contains(&g8.norm_sqr());
    let phases = DevicePhases::new(&sol.device(&t).unwrap()).unwrap();
    let mut conv = 0.0f64;
    for i in 0..=3usize {
        for j in (i + 1)..=3 {
            let f = |g: &parity_core::fidelity::ModeGrid| {
                use parity_core::device::ReflectionPhase;
                let d: Vec<f64> = g
                    .omegas
                    .iter()
                    .map(|&w| {
                        phases.theta_weight(i, w).unwrap() - phases.theta_weight(j, w).unwrap()
                    })
                    .collect();
                fidelity_from_differences(&d, &pulse, g)
            };
            conv = conv.max((f(&g4) - f(&g8)).abs());
        }
    }
    outcome(
        unimodular && collapse && norm_ok && conv < 1e-8,
        format!(
            "max ||r|-1| = {:.1e} over {} networks; collapse exact: {collapse}; sum C^2 = {norm:.12}; 4001 vs 8001 = {conv:.1e}",
            worst_r.get(),
            cases.get()
        ),
    )
}

fn criterion_9() -> Outcome {
    let (t, sol) = solve_three_qubit(ResonatorModel::Stub);
    let cascade = match tune_cascade(3, ghz(10.0), 10e-15, 50.0, ResonatorModel::Lumped, None) {
        Ok(c) => c,
        Err(e) => return outcome(false, format!("cascade tuning failed: {e}")),
    };
    let cmp = compare_schemes(&t, &sol, &cascade, 5.0, 1e-6).unwrap();
    let suppression = 1.0 / cmp.b_ratio;
    outcome(
        suppression >= 100.0 && cmp.cascade.b2 != 0.0 && cmp.cascade_quadratic_gap <= 1e-4,
        format!(
            "|b| parallel/cascade = {suppression:.2e} (chi {:.3} vs {:.3} MHz); cascade b' = {:.3e} s^2; quadratic gap {:.2e}",
            rad_to_hz(sol.chi) * 1e-6,
            rad_to_hz(cascade.device.cavities()[0].chi) * 1e-6,
            cmp.cascade.b2,
            cmp.cascade_quadratic_gap
        ),
    )
}

fn main() {
    type Check = fn() -> Outcome;
    let criteria: [(&str, Check); 9] = [
        ("three-qubit solution", criterion_1),
        ("winding 4pi", criterion_2),
        ("eraser residuals", criterion_3),
        ("four-qubit feasibility", criterion_4),
        ("closed forms", criterion_5),
        ("even/odd overlap", criterion_6),
        ("estimates", criterion_7),
        ("invariant suites", criterion_8),
        ("cascade comparison", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {} [{name}]: {} - {}",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
