//! Order-of-magnitude engineering numbers: Purcell-limited T1, measurement
//! time and probe power.
//!
//! Dispersive shifts and loss rates are often quoted in MHz without saying
//! whether the number is `χ` or `χ/2π`. Estimates that depend on that choice
//! return both readings, tagged.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::AngularFrequency;

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    /// Quoted rates are angular (rad/s).
    Angular,
    /// Quoted rates are ordinary frequencies; a rate `2π·f` is read as `f`.
    Cyclic,
}

/// An estimate under both readings of the quoted rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConventionPair {
    pub angular: f64,
    pub cyclic: f64,
}

impl ConventionPair {
    pub fn get(&self, c: Convention) -> f64 {
        match c {
            Convention::Angular => self.angular,
            Convention::Cyclic => self.cyclic,
        }
    }
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "{name} must be finite and > 0, got {x}"
        )))
    }
}

/// Purcell-limited lifetime `Δ/(κχ)`, all arguments in rad/s.
///
/// `angular` takes the arguments literally. `cyclic` reads each rate as its
/// ordinary frequency, i.e. `(Δ/2π)/((κ/2π)(χ/2π)) = 2πΔ/(κχ)`; the ratio
/// `Δ/χ` is unchanged, so the two differ only in whether `κ` counts radians.
pub fn purcell_t1(delta: f64, kappa: f64, chi: f64) -> Result<ConventionPair> {
    positive("detuning Δ", delta)?;
    positive("loss rate κ", kappa)?;
    positive("dispersive shift χ", chi)?;
    let angular = delta / (kappa * chi);
    Ok(ConventionPair {
        angular,
        cyclic: TAU * angular,
    })
}

/// `Δ²/(κg²)`; equals [`purcell_t1`] when `χ = g²/Δ`.
pub fn purcell_t1_from_coupling(delta: f64, kappa: f64, g: f64) -> Result<ConventionPair> {
    positive("coupling g", g)?;
    purcell_t1(delta, kappa, g * g / delta)
}

/// `safety_factor / χ` with `χ` in rad/s; the cyclic reading is `safety_factor/(χ/2π)`.
pub fn measurement_time(chi: f64, safety_factor: f64) -> Result<ConventionPair> {
    positive("dispersive shift χ", chi)?;
    positive("safety factor", safety_factor)?;
    let angular = safety_factor / chi;
    Ok(ConventionPair {
        angular,
        cyclic: TAU * angular,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Power {
    pub watts: f64,
    pub dbm: f64,
}

/// `P = |α|² ħ ω_p / T`.
pub fn peak_power(alpha_sq: f64, omega_p: AngularFrequency, duration: f64) -> Result<Power> {
    if !(alpha_sq.is_finite() && alpha_sq >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "mean photon number must be ≥ 0, got {alpha_sq}"
        )));
    }
    positive("pulse duration", duration)?;
    let watts = alpha_sq * HBAR * omega_p.value() / duration;
    Ok(Power {
        watts,
        dbm: 10.0 * (watts / 1e-3).log10(),
    })
}

/// External loss rate of a quarter-wave resonator through a series capacitor,
/// `κ = (4/π) ω_r³ C_c² Z0²` in rad/s. Order-of-magnitude only.
pub fn kappa_from_coupling(c_couple: f64, z0: f64, omega_r: AngularFrequency) -> Result<f64> {
    if !(c_couple.is_finite() && c_couple >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "coupling capacitance must be ≥ 0, got {c_couple}"
        )));
    }
    positive("Z0", z0)?;
    let w = omega_r.value();
    Ok(4.0 / PI * w.powi(3) * c_couple * c_couple * z0 * z0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::hz_to_rad;
    use approx::assert_relative_eq;

    #[test]
    fn purcell_readings() {
        let t = purcell_t1(hz_to_rad(5e9), hz_to_rad(5e6), hz_to_rad(5.77e6)).unwrap();
        assert_relative_eq!(t.cyclic, 5e9 / (5e6 * 5.77e6), max_relative = 1e-12);
        assert_relative_eq!(t.angular, t.cyclic / TAU, max_relative = 1e-15);
        assert!((150e-6..=210e-6).contains(&t.cyclic));
        let half = purcell_t1(hz_to_rad(5e9), hz_to_rad(5e6), hz_to_rad(11.54e6)).unwrap();
        assert_relative_eq!(half.cyclic, 0.5 * t.cyclic, max_relative = 1e-12);
        assert!(purcell_t1(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn purcell_coupling_identity() {
        let (delta, kappa, g) = (hz_to_rad(5e9), hz_to_rad(5e6), hz_to_rad(170e6));
        let a = purcell_t1_from_coupling(delta, kappa, g).unwrap();
        let b = purcell_t1(delta, kappa, g * g / delta).unwrap();
        assert_relative_eq!(
            a.angular,
            delta * delta / (kappa * g * g),
            max_relative = 1e-12
        );
        assert_relative_eq!(a.angular, b.angular, max_relative = 1e-15);
    }

    #[test]
    fn measurement_time_readings() {
        let chi = hz_to_rad(5.77e6);
        let t = measurement_time(chi, 10.0).unwrap();
        assert_relative_eq!(t.cyclic, 10.0 / 5.77e6, max_relative = 1e-12);
        assert!((1.5e-6..2.5e-6).contains(&t.cyclic));
        assert!(t.angular < 0.3e-6);
        let one = measurement_time(chi, 1.0).unwrap();
        assert_relative_eq!(one.angular, 1.0 / chi, max_relative = 1e-15);
        assert!(measurement_time(1e30, 10.0).unwrap().cyclic < 1e-28);
    }

    #[test]
    fn probe_power() {
        let w = AngularFrequency::from_ghz(9.804).unwrap();
        let p = peak_power(5.0, w, 1e-6).unwrap();
        assert!((p.dbm + 135.0).abs() < 0.5, "{}", p.dbm);
        assert_eq!(peak_power(0.0, w, 1e-6).unwrap().watts, 0.0);
        let q = peak_power(5.0, w, 0.5e-6).unwrap();
        assert_relative_eq!(q.watts, 2.0 * p.watts, max_relative = 1e-15);
        assert!((q.dbm - p.dbm - 3.0103).abs() < 1e-4);
    }

    #[test]
    fn coupling_kappa_scaling() {
        let w = AngularFrequency::from_ghz(10.0).unwrap();
        let k = kappa_from_coupling(10e-15, 50.0, w).unwrap();
        let mhz = k / TAU / 1e6;
        assert!((5.0..=30.0).contains(&mhz), "{mhz}");
        assert_eq!(kappa_from_coupling(0.0, 50.0, w).unwrap(), 0.0);
        let k2 = kappa_from_coupling(20e-15, 50.0, w).unwrap();
        assert_relative_eq!(k2, 4.0 * k, max_relative = 1e-14);
    }
}
