//! Sequential-scattering alternative: the probe reflects off one cavity per
//! qubit in turn (ideal circulators in between), so the total phase is the
//! sum of single-cavity phases.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::device::{
    derivative, Band, ParityDevice, QubitState, ReflectionPhase, ResonatorModel,
    DEVICE_SWEEP_POINTS,
};
use crate::eraser::{
    dispersion_at, residuals_from_phases, weight_phases, DispersionReport, EraserSolution,
};
use crate::error::{Error, Result};
use crate::fidelity::{
    default_grid, fidelity_quadratic_closed, quality_from_phases, FidelityBranch, FidelityReport,
    ProbePulse,
};
use crate::network::{NetworkElement, PhaseCurve};
use crate::units::{hz_to_rad, wrap_phase, AngularFrequency};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cavity {
    pub omega_r: AngularFrequency,
    /// Dispersive shift from this cavity's qubit, rad/s.
    pub chi: f64,
    pub c_couple: f64,
}

/// One cavity per qubit; cavity `j` is read through qubit `j`.
#[derive(Debug, Clone)]
pub struct CascadeDevice {
    cavities: Vec<Cavity>,
    z0: f64,
    model: ResonatorModel,
    band: Band,
    /// `[qubit in 0, qubit in 1]` curves per cavity.
    curves: Vec<[PhaseCurve; 2]>,
}

impl CascadeDevice {
    pub fn new(cavities: Vec<Cavity>, z0: f64, model: ResonatorModel, band: Band) -> Result<Self> {
        if cavities.is_empty() || cavities.len() > crate::device::MAX_QUBITS {
            return Err(Error::InvalidInput(format!(
                "cascade needs 1..={} cavities, got {}",
                crate::device::MAX_QUBITS,
                cavities.len()
            )));
        }
        let wr = cavities[0].omega_r;
        if cavities.iter().any(|c| c.omega_r != wr) {
            return Err(Error::InvalidInput(
                "all cascade cavities must share one resonant frequency".into(),
            ));
        }
        if !(z0.is_finite() && z0 > 0.0) {
            return Err(Error::InvalidInput(format!("Z0 must be > 0, got {z0}")));
        }
        let curves = cavities
            .iter()
            .map(|c| {
                if !(c.chi.is_finite() && c.chi > 0.0) {
                    return Err(Error::InvalidInput(format!("χ must be > 0, got {}", c.chi)));
                }
                if !(c.c_couple.is_finite() && c.c_couple > 0.0) {
                    return Err(Error::InvalidInput(format!(
                        "coupling capacitance must be > 0, got {}",
                        c.c_couple
                    )));
                }
                let mk = |sign: f64| -> Result<PhaseCurve> {
                    let w = c.omega_r.value() + sign * c.chi;
                    let w = AngularFrequency::new(w)
                        .map_err(|_| Error::NonPositiveResult { omega: w })?;
                    let net = cavity_network(w, c.c_couple, z0, model)?;
                    let mut curve =
                        PhaseCurve::new(net, z0, band.lo, band.hi, DEVICE_SWEEP_POINTS)?;
                    curve.align_anchor(0.0);
                    Ok(curve)
                };
                Ok([mk(1.0)?, mk(-1.0)?])
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            cavities,
            z0,
            model,
            band,
            curves,
        })
    }

    /// `n` identical cavities.
    pub fn uniform(
        n: usize,
        cavity: Cavity,
        z0: f64,
        model: ResonatorModel,
        band: Band,
    ) -> Result<Self> {
        Self::new(vec![cavity; n], z0, model, band)
    }

    pub fn cavities(&self) -> &[Cavity] {
        &self.cavities
    }

    pub fn band(&self) -> Band {
        self.band
    }

    pub fn z0(&self) -> f64 {
        self.z0
    }

    pub fn model(&self) -> ResonatorModel {
        self.model
    }

    /// Resonators used: one per qubit.
    pub fn resonator_count(&self) -> usize {
        self.cavities.len()
    }

    fn check(&self, state: &QubitState) -> Result<()> {
        if state.len() != self.cavities.len() {
            return Err(Error::InvalidInput(format!(
                "state {state} does not match a {}-cavity cascade",
                self.cavities.len()
            )));
        }
        Ok(())
    }

    /// Sorted before summing so the result does not depend on cavity order.
    fn sum_terms(mut terms: Vec<f64>) -> f64 {
        terms.sort_by(f64::total_cmp);
        terms.iter().sum()
    }

    /// Sum of principal single-cavity phases; only meaningful modulo 2π.
    fn wrapped_sum(&self, state: &QubitState, omega: f64) -> f64 {
        let terms = self
            .curves
            .iter()
            .zip(state.bits())
            .map(|(pair, &b)| pair[b as usize].network().reactance(omega).phase(self.z0))
            .collect();
        Self::sum_terms(terms)
    }
}

/// Series coupling capacitor followed by the resonator.
pub fn cavity_network(
    omega_r: AngularFrequency,
    c_couple: f64,
    z0: f64,
    model: ResonatorModel,
) -> Result<NetworkElement> {
    Ok(NetworkElement::Series(vec![
        NetworkElement::Capacitor(c_couple),
        model.element(omega_r, z0)?,
    ]))
}

/// `Σ_j θ_single(ω; ω_r + (−1)^{s_j} χ_j)`.
pub fn cascade_phase(dev: &CascadeDevice, state: &QubitState, omega: f64) -> Result<f64> {
    dev.check(state)?;
    let terms = dev
        .curves
        .iter()
        .zip(state.bits())
        .map(|(pair, &b)| pair[b as usize].theta_at(omega))
        .collect::<Result<Vec<f64>>>()?;
    Ok(CascadeDevice::sum_terms(terms))
}

impl ReflectionPhase for CascadeDevice {
    fn qubits(&self) -> usize {
        self.cavities.len()
    }

    fn theta(&self, state: &QubitState, omega: f64) -> Result<f64> {
        cascade_phase(self, state, omega)
    }

    fn theta_derivative(&self, state: &QubitState, omega: f64, order: u8) -> Result<f64> {
        self.check(state)?;
        derivative(|w| Ok(self.wrapped_sum(state, w)), omega, order)
    }
}

/// Cascade tuned so that each qubit flips the reflected phase by π and the
/// two detuned branches have equal slope at `ω_p`.
#[derive(Debug, Clone)]
pub struct TunedCascade {
    pub device: CascadeDevice,
    pub omega_p: AngularFrequency,
    /// Single-cavity phase step between qubit states at `ω_p`, rad.
    pub step: f64,
}

/// Default band around the loaded resonance of a single cavity.
pub fn cascade_band(omega_r: AngularFrequency, c_couple: f64, z0: f64) -> Result<Band> {
    let w = omega_r.value();
    let pull = (2.0 * c_couple * w * z0 / PI).min(0.25);
    Band::new(
        AngularFrequency::new(w * (1.0 - 2.0 * pull))?,
        AngularFrequency::new(w * (1.0 - 0.5 * pull))?,
    )
}

/// Zero of the branch reactance below the resonator pole (the loaded resonance).
fn loaded_resonance(net: &NetworkElement, omega_r: f64) -> f64 {
    let (mut a, mut b) = (omega_r * 1e-3, omega_r * (1.0 - 1e-12));
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let x = net.reactance(m);
        if x.num * x.den < 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

fn bisect(mut a: f64, mut b: f64, f: impl Fn(f64) -> f64) -> Result<f64> {
    let (mut fa, fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::InvalidInput(format!(
            "no sign change on [{a:.9e}, {b:.9e}]"
        )));
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Probe frequency with equal branch slopes, and the phase step there, for shift `chi`.
fn balanced_point(
    omega_r: AngularFrequency,
    chi: f64,
    c_couple: f64,
    z0: f64,
    model: ResonatorModel,
) -> Result<(f64, f64)> {
    let wr = omega_r.value();
    let up = AngularFrequency::new(wr + chi)?;
    let down = AngularFrequency::new(wr - chi)
        .map_err(|_| Error::NonPositiveResult { omega: wr - chi })?;
    let plus = cavity_network(up, c_couple, z0, model)?;
    let minus = cavity_network(down, c_couple, z0, model)?;
    let imbalance = |w: f64| plus.reactance(w).phase_slope(z0) - minus.reactance(w).phase_slope(z0);
    // the slope peaks sit near the loaded resonances; widen until they straddle the balance point
    let a = loaded_resonance(&minus, down.value());
    let b = loaded_resonance(&plus, up.value());
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    let mut k = 1.0;
    while !(imbalance(mid - k * half) > 0.0 && imbalance(mid + k * half) < 0.0) {
        k *= 2.0;
        if k * half > 0.5 * mid {
            return Err(Error::InvalidInput(format!(
                "cannot balance branch slopes for χ = {chi:.6e} rad/s"
            )));
        }
    }
    let omega_p = bisect(mid - k * half, mid + k * half, imbalance)?;
    let step =
        (plus.reactance(omega_p).phase(z0) - minus.reactance(omega_p).phase(z0)).rem_euclid(TAU);
    Ok((omega_p, step))
}

/// Tunes `n` identical cavities: `ω_p` balances the branch slopes (so the
/// first-order dispersion mismatch vanishes) and `χ` makes the per-qubit step π.
pub fn tune_cascade(
    n: usize,
    omega_r: AngularFrequency,
    c_couple: f64,
    z0: f64,
    model: ResonatorModel,
    band: Option<Band>,
) -> Result<TunedCascade> {
    let step_error =
        |chi: f64| balanced_point(omega_r, chi, c_couple, z0, model).map(|(_, s)| s - PI);
    let (mut a, mut b) = (hz_to_rad(0.01e6), hz_to_rad(0.01e6));
    // expand until the step passes π
    let mut found = false;
    for _ in 0..60 {
        b *= 1.5;
        if b >= 0.5 * omega_r.value() {
            break;
        }
        if step_error(b)? > 0.0 {
            found = true;
            break;
        }
        a = b;
    }
    if !found {
        return Err(Error::InvalidInput(
            "no dispersive shift gives a π phase step for this cavity".into(),
        ));
    }
    let chi = bisect(a, b, |c| step_error(c).unwrap_or(f64::NAN))?;
    let (omega_p, step) = balanced_point(omega_r, chi, c_couple, z0, model)?;
    let band = match band {
        Some(b) => b,
        None => cascade_band(omega_r, c_couple, z0)?,
    };
    if !band.contains(omega_p) {
        return Err(Error::OutOfBand {
            omega: omega_p,
            lo: band.lo.value(),
            hi: band.hi.value(),
        });
    }
    let cavity = Cavity {
        omega_r,
        chi,
        c_couple,
    };
    Ok(TunedCascade {
        device: CascadeDevice::uniform(n, cavity, z0, model, band)?,
        omega_p: AngularFrequency::new(omega_p)?,
        step,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeSummary {
    pub resonators: usize,
    pub omega_p: AngularFrequency,
    pub chi: f64,
    pub residuals: Vec<f64>,
    pub delta_theta: f64,
    pub b: f64,
    pub b2: f64,
    pub dispersion: DispersionReport,
    pub fidelities: Vec<FidelityReport>,
    pub min_same_parity_fidelity: f64,
    pub max_cross_parity_fidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeComparison {
    pub qubits: usize,
    pub parallel: SchemeSummary,
    pub cascade: SchemeSummary,
    /// `|b_cascade| / |b_parallel|`.
    pub b_ratio: f64,
    /// Largest `|F_numeric − F_quadratic|` over cascade same-parity pairs.
    pub cascade_quadratic_gap: f64,
}

fn summarize<P: ReflectionPhase + ?Sized>(
    phases: &P,
    resonators: usize,
    omega_p: f64,
    chi: f64,
    pulse: &ProbePulse,
    same_parity: FidelityBranch,
) -> Result<SchemeSummary> {
    let theta = weight_phases(phases, omega_p)?;
    let residuals = residuals_from_phases(&theta);
    let delta_theta = wrap_phase(theta[0] - theta[1]);
    let dispersion = dispersion_at(phases, omega_p)?;
    let fidelities = quality_from_phases(
        phases,
        delta_theta,
        pulse,
        &default_grid(pulse)?,
        same_parity,
    )?;
    let same = |r: &&FidelityReport| r.branch != FidelityBranch::EvenOdd;
    let min_same = fidelities
        .iter()
        .filter(same)
        .fold(1.0f64, |a, r| a.min(r.f_numeric));
    let max_cross = fidelities
        .iter()
        .filter(|r| r.branch == FidelityBranch::EvenOdd)
        .fold(0.0f64, |a, r| a.max(r.f_numeric));
    Ok(SchemeSummary {
        resonators,
        omega_p: AngularFrequency::new(omega_p)?,
        chi,
        residuals,
        delta_theta,
        b: dispersion.max_b(),
        b2: dispersion.max_b2(),
        dispersion,
        fidelities,
        min_same_parity_fidelity: min_same,
        max_cross_parity_fidelity: max_cross,
    })
}

/// Residuals, dispersion and fidelities of both schemes for a pulse of
/// `mean_photons` and `duration`, each centred on its own probe frequency.
pub fn compare_schemes(
    template: &ParityDevice,
    parallel: &EraserSolution,
    cascade: &TunedCascade,
    mean_photons: f64,
    duration: f64,
) -> Result<SchemeComparison> {
    let n = template.qubits();
    if cascade.device.qubits() != n {
        return Err(Error::InvalidInput(format!(
            "parallel device has {n} qubits, cascade has {}",
            cascade.device.qubits()
        )));
    }
    let dev = parallel.device(template)?;
    let phases = crate::device::DevicePhases::new(&dev)?;
    let p_pulse = ProbePulse::from_photons(mean_photons, parallel.omega_p, duration)?;
    let par = summarize(
        &phases,
        dev.modes().len(),
        parallel.omega_p.value(),
        parallel.chi,
        &p_pulse,
        FidelityBranch::SameParityLinear,
    )?;
    let c_pulse = ProbePulse::from_photons(mean_photons, cascade.omega_p, duration)?;
    let cas = summarize(
        &cascade.device,
        cascade.device.resonator_count(),
        cascade.omega_p.value(),
        cascade.device.cavities()[0].chi,
        &c_pulse,
        FidelityBranch::SameParityQuadratic,
    )?;
    let gap = cas
        .fidelities
        .iter()
        .filter(|r| r.branch == FidelityBranch::SameParityQuadratic)
        .filter_map(|r| r.f_closed.map(|c| (r.f_numeric - c).abs()))
        .fold(0.0f64, f64::max);
    Ok(SchemeComparison {
        qubits: n,
        b_ratio: if par.b == 0.0 {
            f64::INFINITY
        } else {
            cas.b / par.b
        },
        parallel: par,
        cascade: cas,
        cascade_quadratic_gap: gap,
    })
}

/// Penalty on a same-parity overlap from a pure second-derivative mismatch `b2`.
pub fn quadratic_penalty(pulse: &ProbePulse, b2: f64) -> f64 {
    1.0 - fidelity_quadratic_closed(pulse.mean_photons(), 0.5 * b2, pulse.bandwidth).exact()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ghz(f: f64) -> AngularFrequency {
        AngularFrequency::from_ghz(f).unwrap()
    }

    fn tuned(n: usize) -> TunedCascade {
        tune_cascade(n, ghz(10.0), 10e-15, 50.0, ResonatorModel::Lumped, None).unwrap()
    }

    #[test]
    fn tuning_gives_half_turn_and_balanced_slopes() {
        let t = tuned(3);
        assert!((t.step - PI).abs() < 1e-9, "{}", t.step);
        let dev = &t.device;
        let w = t.omega_p.value();
        let g0 = dev.curves[0][0].network().reactance(w).phase_slope(50.0);
        let g1 = dev.curves[0][1].network().reactance(w).phase_slope(50.0);
        assert!((g0 - g1).abs() < 1e-12 * g0.abs(), "{g0} {g1}");
    }

    #[test]
    fn single_cavity_reduces_to_device_phase() {
        let t = tuned(1);
        let c = t.device.cavities()[0];
        let dev = ParityDevice::equal_chi(
            1,
            vec![crate::device::Mode {
                omega: c.omega_r,
                c_couple: c.c_couple,
            }],
            c.chi,
            50.0,
            ResonatorModel::Lumped,
        )
        .unwrap()
        .with_band(t.device.band());
        for s in ["0", "1"] {
            let s: QubitState = s.parse().unwrap();
            let a = cascade_phase(&t.device, &s, t.omega_p.value()).unwrap();
            let b = crate::device::phase_for_state(&dev, &s, t.omega_p).unwrap();
            assert!((wrap_phase(a - b)).abs() < 1e-12, "{a} {b}");
        }
    }

    #[test]
    fn additivity_and_weight_symmetry() {
        let t = tuned(3);
        let w = t.omega_p.value() + 3e6;
        let dev = &t.device;
        let s: QubitState = "011".parse().unwrap();
        let total = cascade_phase(dev, &s, w).unwrap();
        let mut parts: Vec<f64> = s
            .bits()
            .iter()
            .enumerate()
            .map(|(j, &b)| dev.curves[j][b as usize].theta_at(w).unwrap())
            .collect();
        parts.sort_by(f64::total_cmp);
        assert_eq!(total, parts.iter().sum::<f64>());
        for other in ["101", "110"] {
            assert_eq!(
                cascade_phase(dev, &other.parse().unwrap(), w).unwrap(),
                total
            );
        }
    }

    #[test]
    fn eraser_conditions_hold_when_tuned() {
        let t = tuned(4);
        let theta = weight_phases(&t.device, t.omega_p.value()).unwrap();
        for r in residuals_from_phases(&theta) {
            assert!(r.abs() < 1e-8, "{r}");
        }
        assert!((wrap_phase(theta[0] - theta[1]).abs() - PI).abs() < 1e-8);
    }

    #[test]
    fn first_order_dispersion_cancels_but_second_order_remains() {
        let t = tuned(3);
        let rep = dispersion_at(&t.device, t.omega_p.value()).unwrap();
        let w = 1e6;
        for e in &rep.entries {
            assert!(e.b.abs() < 1e-3 * e.b2.abs() * w, "{e:?}");
            assert!(e.b2 != 0.0);
        }
    }

    #[test]
    fn mismatched_cavities_are_rejected() {
        let band = cascade_band(ghz(10.0), 10e-15, 50.0).unwrap();
        let a = Cavity {
            omega_r: ghz(10.0),
            chi: 1e7,
            c_couple: 10e-15,
        };
        let b = Cavity {
            omega_r: ghz(10.1),
            ..a
        };
        assert!(CascadeDevice::new(vec![a, b], 50.0, ResonatorModel::Lumped, band).is_err());
        assert!(CascadeDevice::new(vec![], 50.0, ResonatorModel::Lumped, band).is_err());
    }
}
