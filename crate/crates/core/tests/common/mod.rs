#![allow(dead_code)]

use parity_core::device::Band;
use parity_core::device::{Mode, ParityDevice, ResonatorModel};
use parity_core::eraser::{solve_eraser, EraserSolution, FreeParameters, SearchOptions};
use parity_core::network::NetworkElement;
use parity_core::units::AngularFrequency;
use proptest::prelude::*;

pub fn ghz(f: f64) -> AngularFrequency {
    AngularFrequency::from_ghz(f).unwrap()
}

pub fn band(lo_ghz: f64, hi_ghz: f64) -> Band {
    Band::new(ghz(lo_ghz), ghz(hi_ghz)).unwrap()
}

/// Two modes at 9.99 and 10.01 GHz through 10 fF, analysed over 9.6–10.2 GHz.
pub fn three_qubit_template(model: ResonatorModel) -> ParityDevice {
    let modes = vec![
        Mode {
            omega: ghz(9.99),
            c_couple: 10e-15,
        },
        Mode {
            omega: ghz(10.01),
            c_couple: 10e-15,
        },
    ];
    ParityDevice::equal_chi(3, modes, parity_core::units::hz_to_rad(5e6), 50.0, model)
        .unwrap()
        .with_band(band(9.6, 10.2))
}

pub fn solve_three_qubit(model: ResonatorModel) -> (ParityDevice, EraserSolution) {
    let t = three_qubit_template(model);
    let sol = solve_eraser(&t, FreeParameters::Chi, t.band(), &SearchOptions::default()).unwrap();
    (t, sol)
}

fn leaf() -> impl Strategy<Value = NetworkElement> {
    prop_oneof![
        (1e-15..1e-12f64).prop_map(NetworkElement::Capacitor),
        (1e-10..1e-8f64).prop_map(NetworkElement::Inductor),
        (20.0..100.0f64, 5.0..15.0f64).prop_map(|(z0, f)| NetworkElement::QuarterWaveStub {
            z0,
            resonance: ghz(f),
        }),
    ]
}

/// Random lossless trees of capacitors, inductors and stubs.
pub fn lossless_network() -> impl Strategy<Value = NetworkElement> {
    leaf().prop_recursive(3, 24, 4, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(NetworkElement::Series),
            prop::collection::vec(inner, 2..4).prop_map(NetworkElement::Parallel),
        ]
    })
}

/// Angular frequency between 1 and 20 GHz.
pub fn probe_omega() -> impl Strategy<Value = f64> {
    (1.0..20.0f64).prop_map(|f| ghz(f).value())
}
