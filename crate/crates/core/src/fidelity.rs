//! Overlap of reflected coherent-state wavepackets for pairs of qubit states.
//!
//! A Gaussian probe of bandwidth `W` is decomposed on a uniform grid of
//! harmonic modes with amplitudes `α C_i`. Each mode picks up the reflection
//! phase of the qubit state, and the overlap modulus is
//! `|exp(−Σ |α C_i|² (1 − e^{−iΔθ_i}))| = exp(−|α|² Σ C_i² (1 − cos Δθ_i))`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::device::{DevicePhases, ParityDevice, QubitState, ReflectionPhase};
use crate::eraser::{dispersion_at, EraserSolution};
use crate::error::{Error, Result};
use crate::units::{pairwise_sum, wrap_phase, AngularFrequency};

pub const DEFAULT_GRID_POINTS: usize = 4001;
pub const DEFAULT_SPAN_SIGMAS: f64 = 8.0;
pub const MIN_GRID_POINTS: usize = 201;
pub const MIN_SPAN_SIGMAS: f64 = 6.0;

/// Expansions are reported when their small parameter is below this.
pub const EXPANSION_LIMIT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbePulse {
    pub alpha: Complex64,
    pub omega_p: AngularFrequency,
    /// Bandwidth `W = 1/T`, rad/s.
    pub bandwidth: f64,
}

impl ProbePulse {
    pub fn new(alpha: Complex64, omega_p: AngularFrequency, bandwidth: f64) -> Result<Self> {
        if !(bandwidth.is_finite() && bandwidth > 0.0) {
            return Err(Error::InvalidInput(format!(
                "pulse bandwidth must be > 0, got {bandwidth}"
            )));
        }
        if !(alpha.re.is_finite() && alpha.im.is_finite()) {
            return Err(Error::InvalidInput("pulse amplitude must be finite".into()));
        }
        Ok(Self {
            alpha,
            omega_p,
            bandwidth,
        })
    }

    /// Real amplitude with mean photon number `n̄` and duration `T = 1/W`.
    pub fn from_photons(
        mean_photons: f64,
        omega_p: AngularFrequency,
        duration: f64,
    ) -> Result<Self> {
        if !(mean_photons.is_finite() && mean_photons >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "mean photon number must be ≥ 0, got {mean_photons}"
            )));
        }
        if !(duration.is_finite() && duration > 0.0) {
            return Err(Error::InvalidInput(format!(
                "pulse duration must be > 0, got {duration}"
            )));
        }
        Self::new(
            Complex64::new(mean_photons.sqrt(), 0.0),
            omega_p,
            1.0 / duration,
        )
    }

    pub fn mean_photons(&self) -> f64 {
        self.alpha.norm_sqr()
    }

    pub fn duration(&self) -> f64 {
        1.0 / self.bandwidth
    }
}

/// Uniform frequency grid with Gaussian amplitude weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeGrid {
    pub omegas: Vec<f64>,
    pub spacing: f64,
    pub weights: Vec<f64>,
}

impl ModeGrid {
    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }

    /// `Σ C_i²`.
    pub fn norm_sqr(&self) -> f64 {
        let sq: Vec<f64> = self.weights.iter().map(|c| c * c).collect();
        pairwise_sum(&sq)
    }
}

/// `C_i = √δω · e^{−(ω_i−ω_p)²/4W²} / (2πW²)^{1/4}` on `ω_p ± span·W`.
pub fn build_mode_grid(
    omega_p: AngularFrequency,
    bandwidth: f64,
    span_sigmas: f64,
    points: usize,
) -> Result<ModeGrid> {
    if !(span_sigmas >= MIN_SPAN_SIGMAS && span_sigmas.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "grid span must be ≥ {MIN_SPAN_SIGMAS} bandwidths, got {span_sigmas}"
        )));
    }
    if points < MIN_GRID_POINTS || points.is_multiple_of(2) {
        return Err(Error::InvalidInput(format!(
            "grid needs an odd number of points ≥ {MIN_GRID_POINTS}, got {points}"
        )));
    }
    if !(bandwidth.is_finite() && bandwidth > 0.0) {
        return Err(Error::InvalidInput(format!(
            "bandwidth must be > 0, got {bandwidth}"
        )));
    }
    let wp = omega_p.value();
    let half = (points / 2) as i64;
    let spacing = span_sigmas * bandwidth / half as f64;
    let norm = spacing.sqrt() / (2.0 * PI * bandwidth * bandwidth).powf(0.25);
    let mut omegas = Vec::with_capacity(points);
    let mut weights = Vec::with_capacity(points);
    for k in -half..=half {
        let d = k as f64 * spacing;
        omegas.push(wp + d);
        weights.push(norm * (-(d * d) / (4.0 * bandwidth * bandwidth)).exp());
    }
    Ok(ModeGrid {
        omegas,
        spacing,
        weights,
    })
}

/// Default grid for a pulse: 4001 points over ±8W.
pub fn default_grid(pulse: &ProbePulse) -> Result<ModeGrid> {
    build_mode_grid(
        pulse.omega_p,
        pulse.bandwidth,
        DEFAULT_SPAN_SIGMAS,
        DEFAULT_GRID_POINTS,
    )
}

/// Mode-sum overlap modulus of two reflected pulses.
pub fn fidelity_numeric(
    theta_s: impl Fn(f64) -> Result<f64>,
    theta_s2: impl Fn(f64) -> Result<f64>,
    pulse: &ProbePulse,
    grid: &ModeGrid,
) -> Result<f64> {
    let diffs = grid
        .omegas
        .iter()
        .map(|&w| Ok(theta_s(w)? - theta_s2(w)?))
        .collect::<Result<Vec<f64>>>()?;
    Ok(fidelity_from_differences(&diffs, pulse, grid))
}

/// Overlap modulus from precomputed phase differences on `grid`.
pub fn fidelity_from_differences(diffs: &[f64], pulse: &ProbePulse, grid: &ModeGrid) -> f64 {
    let terms: Vec<f64> = grid
        .weights
        .iter()
        .zip(diffs)
        .map(|(c, &d)| c * c * one_minus_cos(wrap_phase(d)))
        .collect();
    (-pulse.mean_photons() * pairwise_sum(&terms))
        .exp()
        .clamp(0.0, 1.0)
}

/// A closed-form fidelity and, where its small parameter allows, the leading expansion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedForm {
    pub exact: f64,
    pub expansion: Option<f64>,
}

/// Linear dispersion mismatch `Δθ = b(ω−ω_p)`: `exp(−|α|²(1−e^{−b²W²/2}))`.
pub fn fidelity_linear_closed(alpha_sq: f64, b: f64, bandwidth: f64) -> ClosedForm {
    let n = alpha_sq;
    let x = b * bandwidth;
    let exact = (-n * (-(-0.5 * x * x).exp_m1())).exp();
    let expansion = (n.sqrt() * x.abs() < EXPANSION_LIMIT).then_some(1.0 - 0.5 * n * x * x);
    ClosedForm { exact, expansion }
}

/// Opposite-parity overlap at contrast `Δθ`: `e^{−|α|²(1−cos Δθ)}`.
pub fn fidelity_even_odd(alpha_sq: f64, delta_theta: f64) -> f64 {
    (-alpha_sq * one_minus_cos(delta_theta)).exp()
}

/// `1 − cos x`, without cancellation for small `x`.
fn one_minus_cos(x: f64) -> f64 {
    if x.abs() < 0.5 {
        let s = (0.5 * x).sin();
        2.0 * s * s
    } else {
        1.0 - x.cos()
    }
}

/// Both printed forms of the quadratic-mismatch overlap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticClosed {
    /// `|exp(−|α|²(1 − 1/√(1+2ib'W²)))|`.
    pub complex_form: f64,
    /// `exp(−|α|²(1 − √((1+√(1+4b'²W⁴))/(2+8b'²W⁴))))`.
    pub real_form: f64,
    /// `1 − 3|α|²b'²W⁴/2` when `|α|b'W² < 0.1`.
    pub expansion: Option<f64>,
}

impl QuadraticClosed {
    pub fn exact(&self) -> f64 {
        self.complex_form
    }
}

/// Quadratic mismatch `Δθ = b'(ω−ω_p)²`.
///
/// A second-derivative difference `d` enters its Taylor phase as `d/2·(ω−ω_p)²`,
/// so pass `d/2` here when starting from [`dispersion_at`] output.
pub fn fidelity_quadratic_closed(alpha_sq: f64, b2: f64, bandwidth: f64) -> QuadraticClosed {
    let n = alpha_sq;
    let y = b2 * bandwidth * bandwidth;
    let root = Complex64::new(1.0, 2.0 * y).sqrt();
    let complex_form = (-n * (Complex64::new(1.0, 0.0) - root.inv())).exp().norm();
    let y2 = y * y;
    let real_form =
        (-n * (1.0 - ((1.0 + (1.0 + 4.0 * y2).sqrt()) / (2.0 + 8.0 * y2)).sqrt())).exp();
    let expansion = (n.sqrt() * y.abs() < EXPANSION_LIMIT).then_some(1.0 - 1.5 * n * y2);
    QuadraticClosed {
        complex_form,
        real_form,
        expansion,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FidelityBranch {
    SameParityLinear,
    SameParityQuadratic,
    EvenOdd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub pair: (QubitState, QubitState),
    pub f_numeric: f64,
    pub f_closed: Option<f64>,
    pub branch: FidelityBranch,
}

/// Overlaps of reflected pulses for every unordered pair of Hamming weights of
/// the solved device, followed by equal-weight pairs (a state and its mirror image).
pub fn eraser_quality(
    template: &ParityDevice,
    sol: &EraserSolution,
    pulse: &ProbePulse,
) -> Result<Vec<FidelityReport>> {
    let dev = sol.device(template)?;
    let phases = DevicePhases::new(&dev)?;
    quality_from_phases(
        &phases,
        sol.delta_theta,
        pulse,
        &default_grid(pulse)?,
        FidelityBranch::SameParityLinear,
    )
}

/// [`eraser_quality`] for any phase model. `same_parity` selects the closed
/// form attached to same-parity pairs: linear uses `b`, quadratic uses half
/// the second-derivative mismatch as the coefficient of `(ω−ω_p)²`.
pub fn quality_from_phases<P: ReflectionPhase + ?Sized>(
    phases: &P,
    delta_theta: f64,
    pulse: &ProbePulse,
    grid: &ModeGrid,
    same_parity: FidelityBranch,
) -> Result<Vec<FidelityReport>> {
    let n = phases.qubits();
    let wp = pulse.omega_p.value();
    let curves = (0..=n)
        .map(|w| {
            let s = QubitState::with_weight(n, w)?;
            let theta = grid
                .omegas
                .iter()
                .map(|&x| phases.theta(&s, x))
                .collect::<Result<Vec<f64>>>()?;
            Ok((s, theta))
        })
        .collect::<Result<Vec<_>>>()?;
    let dispersion = dispersion_at(phases, wp)?;

    let mut reports = Vec::new();
    for i in 0..=n {
        for j in (i + 1)..=n {
            let diffs: Vec<f64> = curves[i]
                .1
                .iter()
                .zip(&curves[j].1)
                .map(|(a, b)| a - b)
                .collect();
            let f_numeric = fidelity_from_differences(&diffs, pulse, grid);
            let (branch, f_closed) = if (j - i) % 2 == 0 {
                let entry = dispersion.pair(i, j);
                let closed = match same_parity {
                    FidelityBranch::SameParityQuadratic => {
                        let b2 = entry.map_or(0.0, |e| e.b2);
                        fidelity_quadratic_closed(pulse.mean_photons(), 0.5 * b2, pulse.bandwidth)
                            .exact()
                    }
                    _ => {
                        let b = entry.map_or(0.0, |e| e.b);
                        fidelity_linear_closed(pulse.mean_photons(), b, pulse.bandwidth).exact
                    }
                };
                let branch = match same_parity {
                    FidelityBranch::SameParityQuadratic => FidelityBranch::SameParityQuadratic,
                    _ => FidelityBranch::SameParityLinear,
                };
                (branch, closed)
            } else {
                (
                    FidelityBranch::EvenOdd,
                    fidelity_even_odd(pulse.mean_photons(), delta_theta),
                )
            };
            reports.push(FidelityReport {
                pair: (curves[i].0.clone(), curves[j].0.clone()),
                f_numeric,
                f_closed: Some(f_closed),
                branch,
            });
        }
    }
    for w in 1..n {
        let s = QubitState::with_weight(n, w)?;
        let mirror = s.reversed();
        let a = grid
            .omegas
            .iter()
            .map(|&x| phases.theta(&s, x))
            .collect::<Result<Vec<f64>>>()?;
        let b = grid
            .omegas
            .iter()
            .map(|&x| phases.theta(&mirror, x))
            .collect::<Result<Vec<f64>>>()?;
        let diffs: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        reports.push(FidelityReport {
            pair: (s, mirror),
            f_numeric: fidelity_from_differences(&diffs, pulse, grid),
            f_closed: Some(1.0),
            branch: match same_parity {
                FidelityBranch::SameParityQuadratic => FidelityBranch::SameParityQuadratic,
                _ => FidelityBranch::SameParityLinear,
            },
        });
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pulse(n: f64, w: f64) -> ProbePulse {
        ProbePulse::new(
            Complex64::new(n.sqrt(), 0.0),
            AngularFrequency::from_ghz(9.804).unwrap(),
            w,
        )
        .unwrap()
    }

    #[test]
    fn grid_is_normalised_with_peak_at_centre() {
        let p = pulse(5.0, 1e6);
        for points in [2001, 4001, 8001] {
            let g = build_mode_grid(p.omega_p, p.bandwidth, 8.0, points).unwrap();
            let s = g.norm_sqr();
            assert!((1.0 - 1e-6..=1.0).contains(&s), "{points}: {s}");
            let mid = points / 2;
            assert_eq!(g.omegas[mid], p.omega_p.value());
            assert!(g.weights.iter().all(|&c| c <= g.weights[mid]));
        }
    }

    #[test]
    fn grid_normalisation_is_scale_invariant() {
        let w0 = AngularFrequency::from_ghz(5.0).unwrap();
        let a = build_mode_grid(w0, 1e3, 8.0, 4001).unwrap().norm_sqr();
        let b = build_mode_grid(w0, 1e8, 8.0, 4001).unwrap().norm_sqr();
        assert_relative_eq!(a, b, max_relative = 1e-12);
    }

    #[test]
    fn grid_rejects_bad_shapes() {
        let w0 = AngularFrequency::from_ghz(5.0).unwrap();
        assert!(build_mode_grid(w0, 1e6, 5.0, 4001).is_err());
        assert!(build_mode_grid(w0, 1e6, 8.0, 4000).is_err());
        assert!(build_mode_grid(w0, 1e6, 8.0, 101).is_err());
        assert!(build_mode_grid(w0, 0.0, 8.0, 4001).is_err());
    }

    #[test]
    fn identical_phases_and_vacuum_give_unit_overlap() {
        let p = pulse(5.0, 1e6);
        let g = default_grid(&p).unwrap();
        let f = fidelity_numeric(|w| Ok(w.sin()), |w| Ok(w.sin()), &p, &g).unwrap();
        assert_eq!(f, 1.0);
        let vac = pulse(0.0, 1e6);
        let f = fidelity_numeric(|_| Ok(0.0), |_| Ok(2.0), &vac, &g).unwrap();
        assert_eq!(f, 1.0);
    }

    #[test]
    fn linear_closed_form_values() {
        let a = 5.0;
        assert_eq!(fidelity_linear_closed(a, 0.0, 1e6).exact, 1.0);
        let c = fidelity_linear_closed(a, 0.1 / 1e6, 1e6);
        assert_relative_eq!(
            c.exact,
            (-5.0 * (1.0 - (-0.005f64).exp())).exp(),
            max_relative = 1e-14
        );
        assert!((c.exact - 0.975370_7).abs() < 1e-7);
        // |α| bW = 0.22, expansion not reported
        assert!(c.expansion.is_none());
        let small = fidelity_linear_closed(a, 0.01 / 1e6, 1e6);
        assert!((small.expansion.unwrap() - small.exact).abs() < 1e-6);
        let wide = fidelity_linear_closed(a, 1e3, 1e6);
        assert_relative_eq!(wide.exact, (-5.0f64).exp(), max_relative = 1e-12);
    }

    #[test]
    fn linear_numeric_matches_closed_form() {
        let p = pulse(5.0, 1e6);
        let g = default_grid(&p).unwrap();
        let wp = p.omega_p.value();
        let b = 0.1 / p.bandwidth;
        let f = fidelity_numeric(move |w| Ok(b * (w - wp)), |_| Ok(0.0), &p, &g).unwrap();
        let c = fidelity_linear_closed(p.mean_photons(), b, p.bandwidth).exact;
        assert!((f - c).abs() < 1e-6, "{f} vs {c}");
    }

    #[test]
    fn even_odd_values() {
        let a = 5.0;
        assert_eq!(fidelity_even_odd(a, PI), (-10.0f64).exp());
        assert_eq!(fidelity_even_odd(a, 0.0), 1.0);
        let f = fidelity_even_odd(a, 172.9f64.to_radians());
        assert!(f < (-9.8f64).exp());
        assert_relative_eq!(
            f,
            (-5.0 * (1.0 - 172.9f64.to_radians().cos())).exp(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn quadratic_forms_agree() {
        let a = 5.0;
        assert_eq!(fidelity_quadratic_closed(a, 0.0, 1e6).exact(), 1.0);
        for k in 0..=1000 {
            let y = 10.0 * k as f64 / 1000.0;
            let q = fidelity_quadratic_closed(a, y / 1e12, 1e6);
            assert!((q.complex_form - q.real_form).abs() < 1e-12, "{y}");
        }
        let q = fidelity_quadratic_closed(a, 0.001 / 1e12, 1e6);
        assert!((q.expansion.unwrap() - q.exact()).abs() < 1e-9);
    }

    #[test]
    fn quadratic_numeric_matches_closed_form() {
        let p = pulse(5.0, 1e6);
        let g = default_grid(&p).unwrap();
        let wp = p.omega_p.value();
        let b2 = 0.05 / (p.bandwidth * p.bandwidth);
        let f = fidelity_numeric(move |w| Ok(b2 * (w - wp).powi(2)), |_| Ok(0.0), &p, &g).unwrap();
        let c = fidelity_quadratic_closed(p.mean_photons(), b2, p.bandwidth).exact();
        assert!((f - c).abs() < 1e-6, "{f} vs {c}");
    }

    #[test]
    fn pulse_validation() {
        let w = AngularFrequency::from_ghz(9.8).unwrap();
        assert!(ProbePulse::from_photons(-1.0, w, 1e-6).is_err());
        assert!(ProbePulse::from_photons(5.0, w, 0.0).is_err());
        let p = ProbePulse::from_photons(5.0, w, 1e-6).unwrap();
        assert_relative_eq!(p.mean_photons(), 5.0, max_relative = 1e-15);
        assert_relative_eq!(p.duration() * p.bandwidth, 1.0);
    }
}
