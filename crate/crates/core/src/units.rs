//! Frequency units and small numeric helpers shared by the analysis modules.

use std::f64::consts::{PI, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Angular frequency in rad/s. Always finite and strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct AngularFrequency(f64);

impl AngularFrequency {
    pub fn new(rad_per_s: f64) -> Result<Self> {
        if rad_per_s.is_finite() && rad_per_s > 0.0 {
            Ok(Self(rad_per_s))
        } else {
            Err(Error::InvalidInput(format!(
                "angular frequency must be finite and > 0, got {rad_per_s}"
            )))
        }
    }

    /// The only place where ordinary frequency is turned into angular frequency.
    pub fn from_hz(hz: f64) -> Result<Self> {
        Self::new(TAU * hz)
    }

    pub fn from_ghz(ghz: f64) -> Result<Self> {
        Self::from_hz(ghz * 1e9)
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn hz(self) -> f64 {
        self.0 / TAU
    }
}

impl TryFrom<f64> for AngularFrequency {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl From<AngularFrequency> for f64 {
    fn from(w: AngularFrequency) -> f64 {
        w.0
    }
}

impl fmt::Display for AngularFrequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "2π·{:.6} GHz", self.hz() * 1e-9)
    }
}

/// Converts an ordinary frequency (Hz) to rad/s without the positivity check.
/// Used for shifts and bandwidths, which are rates rather than carrier frequencies.
#[inline]
pub fn hz_to_rad(hz: f64) -> f64 {
    TAU * hz
}

#[inline]
pub fn rad_to_hz(rad: f64) -> f64 {
    rad / TAU
}

/// Maps an angle into (−π, π].
#[inline]
pub fn wrap_phase(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y > PI {
        y - TAU
    } else {
        y
    }
}

/// Pairwise summation; the fixed split order keeps results bit-stable.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 16;
    if xs.len() <= BLOCK {
        xs.iter().sum()
    } else {
        let (a, b) = xs.split_at(xs.len() / 2);
        pairwise_sum(a) + pairwise_sum(b)
    }
}

/// Rounds to `digits` significant decimal digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x)
        .parse()
        .unwrap_or(x)
}

/// Formats with `digits` significant digits in plain or exponent notation, like C's `%g`.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if exp < -5 || exp >= digits as i32 {
        let s = format!("{:.*e}", digits.saturating_sub(1), x);
        // trim trailing zeros in the mantissa
        match s.split_once('e') {
            Some((m, e)) if m.contains('.') => {
                let m = m.trim_end_matches('0').trim_end_matches('.');
                format!("{m}e{e}")
            }
            _ => s,
        }
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        let s = format!("{:.*}", decimals, x);
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hz_round_trip() {
        let w = AngularFrequency::from_ghz(9.99).unwrap();
        assert!((w.hz() - 9.99e9).abs() < 1e-3);
        assert!(AngularFrequency::new(0.0).is_err());
        assert!(AngularFrequency::new(f64::NAN).is_err());
        assert!(AngularFrequency::from_hz(-1.0).is_err());
    }

    #[test]
    fn wrap_range() {
        assert_eq!(wrap_phase(PI), PI);
        assert!((wrap_phase(-PI) - PI).abs() < 1e-15);
        assert!((wrap_phase(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert!((wrap_phase(7.0 * TAU + 0.25) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn pairwise_matches_naive_for_small_inputs() {
        let xs: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(pairwise_sum(&xs), 5050.0);
    }

    #[test]
    fn sig_formatting() {
        assert_eq!(format_sig(9.803982320412345, 12), "9.80398232041");
        assert_eq!(format_sig(-12.5, 12), "-12.5");
        assert_eq!(format_sig(1.0e-9, 12), "1e-9");
        assert_eq!(format_sig(172.898923464620, 12), "172.898923465");
        assert_eq!(round_sig(1.23456789, 3), 1.23);
    }
}
