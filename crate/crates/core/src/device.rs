//! Qubit-state-dependent reflection networks for an n-qubit, m-mode parity device.
//!
//! Each qubit pulls every mode by `±χ` depending on its state, so the device
//! seen from the probe port is a different lossless network for each of the
//! `2ⁿ` basis states. Modes are coupled to the port through a series
//! capacitor each, and the branches are joined in parallel.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{NetworkElement, PhaseCurve, PhaseProfile, MIN_BASE_POINTS};
use crate::units::{wrap_phase, AngularFrequency};

pub const MAX_QUBITS: usize = 8;

/// Base points used when sweeping a device band.
pub const DEVICE_SWEEP_POINTS: usize = 256;

/// Basis state `|s₁…sₙ⟩`; bit `j` is qubit `j+1`, written left to right.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct QubitState {
    bits: Vec<bool>,
}

impl QubitState {
    pub fn new(bits: Vec<bool>) -> Result<Self> {
        if bits.is_empty() || bits.len() > MAX_QUBITS {
            return Err(Error::InvalidInput(format!(
                "qubit state must have 1..={MAX_QUBITS} bits, got {}",
                bits.len()
            )));
        }
        Ok(Self { bits })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(vec![false; n])
    }

    /// Canonical representative of Hamming weight `w`: the last `w` qubits set
    /// (`001`, `011`, `111` for three qubits).
    pub fn with_weight(n: usize, weight: usize) -> Result<Self> {
        if weight > n {
            return Err(Error::InvalidInput(format!(
                "weight {weight} exceeds qubit count {n}"
            )));
        }
        Self::new((0..n).map(|j| j >= n - weight).collect())
    }

    /// All `2ⁿ` states in binary counting order.
    pub fn all(n: usize) -> Result<Vec<Self>> {
        Self::zeros(n)?;
        Ok((0..1usize << n)
            .map(|k| Self {
                bits: (0..n).map(|j| (k >> (n - 1 - j)) & 1 == 1).collect(),
            })
            .collect())
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn weight(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn parity(&self) -> Parity {
        Parity::of_weight(self.weight())
    }

    /// `(−1)^{s_j}` for each qubit.
    pub fn signs(&self) -> impl Iterator<Item = f64> + '_ {
        self.bits.iter().map(|&b| if b { -1.0 } else { 1.0 })
    }

    pub fn reversed(&self) -> Self {
        Self {
            bits: self.bits.iter().rev().copied().collect(),
        }
    }
}

impl fmt::Display for QubitState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for QubitState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidInput(format!(
                    "qubit state may only contain 0/1, found {other:?}"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(bits)
    }
}

impl TryFrom<String> for QubitState {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<QubitState> for String {
    fn from(s: QubitState) -> String {
        s.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of_weight(w: usize) -> Self {
        if w.is_multiple_of(2) {
            Self::Even
        } else {
            Self::Odd
        }
    }
}

/// Dispersive pull of one qubit on one mode, in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersiveCoupling {
    pub chi: f64,
}

impl DispersiveCoupling {
    pub fn new(chi: f64) -> Result<Self> {
        if chi.is_finite() && chi > 0.0 {
            Ok(Self { chi })
        } else {
            Err(Error::InvalidInput(format!(
                "dispersive shift must be finite and > 0, got {chi}"
            )))
        }
    }

    /// `χ = g²/Δ` with `Δ = ω_qubit − ω_mode`.
    pub fn from_coupling(g: f64, detuning: f64) -> Result<Self> {
        if detuning == 0.0 || !detuning.is_finite() || !g.is_finite() {
            return Err(Error::InvalidInput(format!(
                "coupling g = {g}, detuning Δ = {detuning} do not define a dispersive shift"
            )));
        }
        Self::new(g * g / detuning)
    }
}

/// How each quarter-wave resonator is represented in the network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ResonatorModel {
    /// `i Z0 tan(π/2 · ω/ω_r)`.
    #[default]
    Stub,
    /// Parallel LC with `C = π/(4 ω_r Z0)`, `L = 1/(ω_r² C)`.
    Lumped,
}

impl ResonatorModel {
    pub fn element(self, resonance: AngularFrequency, z0: f64) -> Result<NetworkElement> {
        match self {
            Self::Stub => Ok(NetworkElement::stub(z0, resonance)),
            Self::Lumped => NetworkElement::lumped_resonator(resonance, z0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub omega: AngularFrequency,
    /// Coupling capacitance to the probe port, farads.
    pub c_couple: f64,
}

/// Inclusive analysis band; all phase curves share its lower edge as anchor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub lo: AngularFrequency,
    pub hi: AngularFrequency,
}

impl Band {
    pub fn new(lo: AngularFrequency, hi: AngularFrequency) -> Result<Self> {
        if lo >= hi {
            return Err(Error::InvalidInput(format!(
                "band lower edge {lo} must lie below upper edge {hi}"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn contains(&self, omega: f64) -> bool {
        omega >= self.lo.value() && omega <= self.hi.value()
    }
}

/// `ω_mode + Σ_j (−1)^{s_j} χ_j`.
pub fn shifted_frequency(
    mode: AngularFrequency,
    chis: &[f64],
    state: &QubitState,
) -> Result<AngularFrequency> {
    if chis.len() != state.len() {
        return Err(Error::InvalidInput(format!(
            "{} dispersive shifts given for a {}-qubit state",
            chis.len(),
            state.len()
        )));
    }
    let shift: f64 = state.signs().zip(chis).map(|(s, chi)| s * chi).sum();
    let omega = mode.value() + shift;
    AngularFrequency::new(omega).map_err(|_| Error::NonPositiveResult { omega })
}

/// n qubits coupled to m resonant modes that are read out through one port.
#[derive(Debug, Clone, PartialEq)]
pub struct ParityDevice {
    n: usize,
    modes: Vec<Mode>,
    /// `chi[j][k]`: shift of mode `k` by qubit `j`, rad/s.
    chi: Vec<Vec<f64>>,
    equal_chi: bool,
    z0: f64,
    model: ResonatorModel,
    band: Band,
}

impl ParityDevice {
    /// Every qubit pulls every mode by the same `χ`.
    pub fn equal_chi(
        n: usize,
        modes: Vec<Mode>,
        chi: f64,
        z0: f64,
        model: ResonatorModel,
    ) -> Result<Self> {
        DispersiveCoupling::new(chi)?;
        let m = modes.len();
        let band = default_band(&modes, chi, n, z0)?;
        Self::build(n, modes, vec![vec![chi; m]; n], true, z0, model, band)
    }

    /// Arbitrary per-qubit, per-mode shifts.
    pub fn with_chi_matrix(
        modes: Vec<Mode>,
        chi: Vec<Vec<f64>>,
        z0: f64,
        model: ResonatorModel,
    ) -> Result<Self> {
        let n = chi.len();
        let max_chi = chi.iter().flatten().fold(0.0_f64, |a, &b| a.max(b));
        let equal = chi.iter().flatten().all(|&c| c == chi[0][0]);
        let band = default_band(&modes, max_chi, n, z0)?;
        Self::build(n, modes, chi, equal, z0, model, band)
    }

    fn build(
        n: usize,
        modes: Vec<Mode>,
        chi: Vec<Vec<f64>>,
        equal_chi: bool,
        z0: f64,
        model: ResonatorModel,
        band: Band,
    ) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::InvalidInput(format!(
                "device must have 1..={MAX_QUBITS} qubits, got {n}"
            )));
        }
        if modes.is_empty() {
            return Err(Error::InvalidInput("device needs at least one mode".into()));
        }
        if !(z0.is_finite() && z0 > 0.0) {
            return Err(Error::InvalidInput(format!("Z0 must be > 0, got {z0}")));
        }
        for pair in modes.windows(2) {
            if pair[1].omega <= pair[0].omega {
                return Err(Error::InvalidInput(
                    "mode frequencies must be strictly increasing".into(),
                ));
            }
        }
        for mode in &modes {
            if !(mode.c_couple.is_finite() && mode.c_couple > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "coupling capacitance must be > 0, got {}",
                    mode.c_couple
                )));
            }
        }
        if chi.len() != n || chi.iter().any(|row| row.len() != modes.len()) {
            return Err(Error::InvalidInput(format!(
                "dispersive shift matrix must be {n}×{}",
                modes.len()
            )));
        }
        for &c in chi.iter().flatten() {
            DispersiveCoupling::new(c)?;
        }
        Ok(Self {
            n,
            modes,
            chi,
            equal_chi,
            z0,
            model,
            band,
        })
    }

    pub fn with_band(mut self, band: Band) -> Self {
        self.band = band;
        self
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn z0(&self) -> f64 {
        self.z0
    }

    pub fn model(&self) -> ResonatorModel {
        self.model
    }

    pub fn band(&self) -> Band {
        self.band
    }

    pub fn is_equal_chi(&self) -> bool {
        self.equal_chi
    }

    pub fn chi_matrix(&self) -> &[Vec<f64>] {
        &self.chi
    }

    /// The common `χ` of an equal-shift device.
    pub fn chi(&self) -> Option<f64> {
        self.equal_chi.then(|| self.chi[0][0])
    }

    /// Same device with a different common `χ`; keeps the band.
    pub fn with_equal_chi(&self, chi: f64) -> Result<Self> {
        DispersiveCoupling::new(chi)?;
        Ok(Self {
            chi: vec![vec![chi; self.modes.len()]; self.n],
            equal_chi: true,
            ..self.clone()
        })
    }

    /// Same device with new mode frequencies; keeps couplings, shifts and band.
    pub fn with_mode_frequencies(&self, omegas: &[f64]) -> Result<Self> {
        if omegas.len() != self.modes.len() {
            return Err(Error::InvalidInput("mode count mismatch".into()));
        }
        let modes = self
            .modes
            .iter()
            .zip(omegas)
            .map(|(m, &w)| {
                Ok(Mode {
                    omega: AngularFrequency::new(w)?,
                    c_couple: m.c_couple,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::build(
            self.n,
            modes,
            self.chi.clone(),
            self.equal_chi,
            self.z0,
            self.model,
            self.band,
        )
    }

    /// Minimum number of modes for which the phase can wind far enough: ⌈(n+1)/2⌉.
    pub fn required_modes(n: usize) -> usize {
        (n + 2) / 2
    }

    /// State-shifted frequency of each mode.
    pub fn shifted_modes(&self, state: &QubitState) -> Result<Vec<AngularFrequency>> {
        self.check_state(state)?;
        (0..self.modes.len())
            .map(|k| {
                let column: Vec<f64> = self.chi.iter().map(|row| row[k]).collect();
                shifted_frequency(self.modes[k].omega, &column, state)
            })
            .collect()
    }

    fn check_state(&self, state: &QubitState) -> Result<()> {
        if state.len() != self.n {
            return Err(Error::InvalidInput(format!(
                "state {state} does not match a {}-qubit device",
                self.n
            )));
        }
        Ok(())
    }
}

/// `[min loaded mode − 20χn, max mode + 20χn]`, where the loaded position
/// accounts for the series coupling capacitor pulling the branch resonance
/// down by roughly `2 C_c ω Z0 / π` relative.
fn default_band(modes: &[Mode], chi: f64, n: usize, z0: f64) -> Result<Band> {
    let margin = 20.0 * chi * n as f64;
    let lo = modes
        .iter()
        .map(|m| {
            let w = m.omega.value();
            let pull = (4.0 * m.c_couple * w * z0 / std::f64::consts::PI).min(0.5);
            w * (1.0 - pull)
        })
        .fold(f64::INFINITY, f64::min)
        - margin;
    let hi = modes.iter().map(|m| m.omega.value()).fold(0.0, f64::max) + margin;
    let lo = AngularFrequency::new(lo.max(1e-3 * hi))?;
    Band::new(lo, AngularFrequency::new(hi)?)
}

/// `Parallel_k Series{C_k, resonator_k(ω_k(state))}`; a single mode yields the bare series branch.
pub fn build_state_network(dev: &ParityDevice, state: &QubitState) -> Result<NetworkElement> {
    let shifted = dev.shifted_modes(state)?;
    let mut branches = dev
        .modes
        .iter()
        .zip(shifted)
        .map(|(mode, omega)| {
            Ok(NetworkElement::Series(vec![
                NetworkElement::Capacitor(mode.c_couple),
                dev.model.element(omega, dev.z0)?,
            ]))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(if branches.len() == 1 {
        branches.pop().expect("one branch")
    } else {
        NetworkElement::Parallel(branches)
    })
}

/// Unwrapped phase of `state` at `omega`, anchored at the device band's lower edge.
pub fn phase_for_state(
    dev: &ParityDevice,
    state: &QubitState,
    omega: AngularFrequency,
) -> Result<f64> {
    let phases = DevicePhases::for_states(dev, std::slice::from_ref(state))?;
    phases.theta(state, omega.value())
}

/// `dθ/dω` (order 1) or `d²θ/dω²` (order 2) of `state` at `omega`.
pub fn phase_derivatives(
    dev: &ParityDevice,
    state: &QubitState,
    omega: AngularFrequency,
    order: u8,
) -> Result<f64> {
    let net = build_state_network(dev, state)?;
    let z0 = dev.z0;
    derivative(|w| Ok(net.reactance(w).phase(z0)), omega.value(), order)
}

/// Stencil step for phase derivatives: `max(ω·1e-7, 2π·1 kHz)`.
pub fn derivative_step(omega: f64) -> f64 {
    (omega * 1e-7).max(TAU * 1e3)
}

/// Central finite differences with one Richardson extrapolation.
///
/// `phase` may return wrapped or unwrapped values; differences are taken
/// modulo 2π and must stay below π/4, otherwise the stencil is treated as
/// straddling an unresolved feature.
pub fn derivative(phase: impl Fn(f64) -> Result<f64>, omega: f64, order: u8) -> Result<f64> {
    let h = derivative_step(omega);
    let step = |a: f64, b: f64| -> Result<f64> {
        let d = wrap_phase(b - a);
        if d.abs() >= std::f64::consts::FRAC_PI_4 {
            Err(Error::PoleProximity { omega })
        } else {
            Ok(d)
        }
    };
    let centre = phase(omega)?;
    let estimate = |h: f64| -> Result<f64> {
        let plus = step(centre, phase(omega + h)?)?;
        let minus = step(centre, phase(omega - h)?)?;
        match order {
            1 => Ok((plus - minus) / (2.0 * h)),
            2 => Ok((plus + minus) / (h * h)),
            _ => Err(Error::InvalidInput(format!(
                "derivative order must be 1 or 2, got {order}"
            ))),
        }
    };
    let coarse = estimate(h)?;
    let fine = estimate(0.5 * h)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// Per-state reflection phase of a device, anchored on a common branch at the
/// band's lower edge.
pub trait ReflectionPhase: Sync {
    fn qubits(&self) -> usize;

    /// Unwrapped phase of `state` at `omega` (rad/s).
    fn theta(&self, state: &QubitState, omega: f64) -> Result<f64>;

    /// Phase derivative of order 1 or 2.
    fn theta_derivative(&self, state: &QubitState, omega: f64, order: u8) -> Result<f64>;

    fn theta_weight(&self, weight: usize, omega: f64) -> Result<f64> {
        self.theta(&QubitState::with_weight(self.qubits(), weight)?, omega)
    }
}

/// Swept phase curves of a [`ParityDevice`], one per distinct network.
///
/// With equal shifts the network depends on the state only through its
/// Hamming weight, so states of equal weight share one curve object.
#[derive(Debug, Clone)]
pub struct DevicePhases {
    n: usize,
    z0: f64,
    equal_chi: bool,
    curves: Vec<(QubitState, PhaseCurve)>,
}

impl DevicePhases {
    /// Curves for every Hamming weight (equal shifts) or every basis state.
    pub fn new(dev: &ParityDevice) -> Result<Self> {
        let states = if dev.equal_chi {
            (0..=dev.n)
                .map(|w| QubitState::with_weight(dev.n, w))
                .collect::<Result<Vec<_>>>()?
        } else {
            QubitState::all(dev.n)?
        };
        Self::for_states(dev, &states)
    }

    /// Curves only for the listed states (plus the all-zero reference).
    pub fn for_states(dev: &ParityDevice, states: &[QubitState]) -> Result<Self> {
        let reference_state = QubitState::zeros(dev.n)?;
        let mut wanted: Vec<QubitState> = vec![reference_state];
        for s in states {
            dev.check_state(s)?;
            let key = Self::key(dev.equal_chi, s)?;
            if !wanted.contains(&key) {
                wanted.push(key);
            }
        }
        let band = dev.band;
        let mut curves = wanted
            .into_iter()
            .map(|s| {
                let net = build_state_network(dev, &s)?;
                let curve = PhaseCurve::new(net, dev.z0, band.lo, band.hi, DEVICE_SWEEP_POINTS)?;
                Ok((s, curve))
            })
            .collect::<Result<Vec<_>>>()?;
        let reference = curves[0].1.profile().theta[0];
        for (_, curve) in curves.iter_mut().skip(1) {
            curve.align_anchor(reference);
        }
        Ok(Self {
            n: dev.n,
            z0: dev.z0,
            equal_chi: dev.equal_chi,
            curves,
        })
    }

    fn key(equal_chi: bool, state: &QubitState) -> Result<QubitState> {
        if equal_chi {
            QubitState::with_weight(state.len(), state.weight())
        } else {
            Ok(state.clone())
        }
    }

    pub fn curve(&self, state: &QubitState) -> Result<&PhaseCurve> {
        let key = Self::key(self.equal_chi, state)?;
        self.curves
            .iter()
            .find(|(s, _)| *s == key)
            .map(|(_, c)| c)
            .ok_or_else(|| Error::InvalidInput(format!("no phase curve for state {state}")))
    }

    pub fn profile(&self, state: &QubitState) -> Result<&PhaseProfile> {
        Ok(self.curve(state)?.profile())
    }

    /// Number of distinct curves held.
    pub fn distinct_curves(&self) -> usize {
        self.curves.len()
    }
}

impl ReflectionPhase for DevicePhases {
    fn qubits(&self) -> usize {
        self.n
    }

    fn theta(&self, state: &QubitState, omega: f64) -> Result<f64> {
        self.curve(state)?.theta_at(omega)
    }

    fn theta_derivative(&self, state: &QubitState, omega: f64, order: u8) -> Result<f64> {
        let net = self.curve(state)?.network();
        let z0 = self.z0;
        derivative(|w| Ok(net.reactance(w).phase(z0)), omega, order)
    }
}

/// Bare (state-shifted) mode frequencies and the loaded reflection poles for one weight.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoleDiagnostics {
    pub weight: usize,
    pub bare_hz: Vec<f64>,
    pub loaded_poles_hz: Vec<f64>,
}

/// Bare and coupling-capacitor-loaded resonance positions for every weight.
pub fn pole_diagnostics(dev: &ParityDevice) -> Result<Vec<PoleDiagnostics>> {
    let phases = DevicePhases::new(dev)?;
    (0..=dev.n)
        .map(|w| {
            let state = QubitState::with_weight(dev.n, w)?;
            Ok(PoleDiagnostics {
                weight: w,
                bare_hz: dev.shifted_modes(&state)?.iter().map(|m| m.hz()).collect(),
                loaded_poles_hz: phases
                    .profile(&state)?
                    .poles
                    .iter()
                    .map(|p| p / TAU)
                    .collect(),
            })
        })
        .collect()
}

const _: () = assert!(DEVICE_SWEEP_POINTS >= MIN_BASE_POINTS);
