mod common;

use common::*;
use parity_core::device::{Mode, ParityDevice, ResonatorModel};
use parity_core::eraser::{
    dispersion_report, eraser_residuals, solve_eraser, FreeParameters, SearchOptions,
};
use parity_core::units::{hz_to_rad, rad_to_hz};
use parity_core::Error;

fn modes(freqs: &[f64]) -> Vec<Mode> {
    freqs
        .iter()
        .map(|&f| Mode {
            omega: ghz(f),
            c_couple: 10e-15,
        })
        .collect()
}

#[test]
fn grid_density_does_not_move_the_root() {
    let t = three_qubit_template(ResonatorModel::Stub);
    let sols: Vec<_> = [33, 65, 129]
        .iter()
        .map(|&k| {
            let opts = SearchOptions {
                omega_points: k,
                chi_points: k,
                ..SearchOptions::default()
            };
            solve_eraser(&t, FreeParameters::Chi, t.band(), &opts).unwrap()
        })
        .collect();
    let tol = 10.0 * SearchOptions::default().tol;
    for s in &sols[1..] {
        assert!(
            (s.omega_p.value() - sols[0].omega_p.value()).abs() / sols[0].omega_p.value() < tol
        );
        assert!(
            (s.chi - sols[0].chi).abs() / sols[0].chi < tol,
            "{} vs {}",
            s.chi,
            sols[0].chi
        );
    }
}

#[test]
fn solution_verifies_and_is_reproducible() {
    let (t, a) = solve_three_qubit(ResonatorModel::Stub);
    let (_, b) = solve_three_qubit(ResonatorModel::Stub);
    assert_eq!(a, b);
    let res = eraser_residuals(&a.device(&t).unwrap(), a.omega_p).unwrap();
    assert!(res.iter().all(|r| r.abs() < a.tolerance));
    assert!(!a.low_contrast);
    let d = dispersion_report(&t, &a).unwrap();
    // order 1/χ
    let scale = 1.0 / a.chi;
    assert!(
        d.max_b() > 0.1 * scale && d.max_b() < 10.0 * scale,
        "{} vs {scale}",
        d.max_b()
    );
}

#[test]
fn lumped_model_lands_near_the_stub_root() {
    let (_, stub) = solve_three_qubit(ResonatorModel::Stub);
    let (_, lumped) = solve_three_qubit(ResonatorModel::Lumped);
    let df = (lumped.omega_p.hz() - stub.omega_p.hz()).abs();
    let dchi = rad_to_hz(lumped.chi - stub.chi).abs();
    assert!(df < 20e6, "f_p differs by {df} Hz");
    assert!(dchi < 1e6, "chi differs by {dchi} Hz");
    assert!(lumped.residuals.iter().all(|r| r.abs() < 1e-9));
}

#[test]
fn two_qubits_with_two_modes() {
    let t = ParityDevice::equal_chi(
        2,
        modes(&[9.99, 10.01]),
        hz_to_rad(5e6),
        50.0,
        ResonatorModel::Stub,
    )
    .unwrap();
    let sol = solve_eraser(&t, FreeParameters::Chi, t.band(), &SearchOptions::default()).unwrap();
    assert_eq!(sol.residuals.len(), 1);
    assert!(sol.residuals[0].abs() < 1e-9);
    assert!(sol.delta_theta.abs() > 1e-3);
}

#[test]
fn one_mode_is_not_enough_for_two_or_three_qubits() {
    for n in [2, 3] {
        let t = ParityDevice::equal_chi(
            n,
            modes(&[10.0]),
            hz_to_rad(5e6),
            50.0,
            ResonatorModel::Stub,
        )
        .unwrap();
        match solve_eraser(&t, FreeParameters::Chi, t.band(), &SearchOptions::default()) {
            Err(Error::WindingInfeasible {
                qubits,
                modes,
                required,
            }) => {
                assert_eq!((qubits, modes, required), (n, 1, 2));
            }
            other => panic!("expected WindingInfeasible, got {other:?}"),
        }
    }
}

#[test]
fn single_qubit_has_no_eraser_conditions() {
    let t = ParityDevice::equal_chi(
        1,
        modes(&[10.0]),
        hz_to_rad(5e6),
        50.0,
        ResonatorModel::Stub,
    )
    .unwrap();
    let sol = solve_eraser(&t, FreeParameters::Chi, t.band(), &SearchOptions::default()).unwrap();
    assert!(sol.residuals.is_empty());
    assert!(sol.delta_theta.abs() > std::f64::consts::FRAC_PI_2);
}

#[test]
fn far_apart_modes_give_weak_contrast() {
    let t = ParityDevice::equal_chi(
        3,
        modes(&[9.0, 11.0]),
        hz_to_rad(5e6),
        50.0,
        ResonatorModel::Stub,
    )
    .unwrap();
    match solve_eraser(&t, FreeParameters::Chi, t.band(), &SearchOptions::default()) {
        Ok(sol) => assert!(
            sol.low_contrast,
            "dtheta = {}",
            sol.delta_theta.to_degrees()
        ),
        Err(Error::NoSolution { best_norm, .. }) => assert!(best_norm > 0.0),
        Err(e) => panic!("unexpected error {e}"),
    }
}

#[test]
fn narrow_chi_range_reports_best_candidate() {
    let t = three_qubit_template(ResonatorModel::Stub);
    let opts = SearchOptions {
        chi_min: hz_to_rad(0.1e6),
        chi_max: hz_to_rad(0.2e6),
        ..SearchOptions::default()
    };
    match solve_eraser(&t, FreeParameters::Chi, t.band(), &opts) {
        Err(Error::NoSolution {
            best_f_hz,
            best_chi_hz,
            best_norm,
        }) => {
            assert!(best_norm > 1e-9);
            assert!(best_f_hz > 9.5e9 && best_f_hz < 10.3e9);
            assert!((0.09e6..=0.21e6).contains(&best_chi_hz));
        }
        other => panic!("expected NoSolution, got {other:?}"),
    }
}

#[test]
fn search_band_must_sit_inside_the_analysis_band() {
    let t = three_qubit_template(ResonatorModel::Stub);
    let err = solve_eraser(
        &t,
        FreeParameters::Chi,
        band(9.0, 10.0),
        &SearchOptions::default(),
    )
    .unwrap_err();
    assert!(matches!(err, Error::InvalidInput(_)), "{err}");
    let bad = SearchOptions {
        tol: 1e-12,
        ..SearchOptions::default()
    };
    assert!(solve_eraser(&t, FreeParameters::Chi, t.band(), &bad).is_err());
}
