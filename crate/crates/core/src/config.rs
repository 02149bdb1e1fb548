//! JSON schemas for device descriptions and solver output.
//!
//! Interface units are GHz, MHz, fF and ohms. Quoted MHz shifts are read as
//! ordinary frequencies (`χ/2π`). Parse errors carry the offending field path.

use std::f64::consts::TAU;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::cascade::{cascade_band, tune_cascade, TunedCascade};
use crate::device::{Band, Mode, ParityDevice, ResonatorModel};
use crate::eraser::{Basin, EraserSolution, FreeParameters, SearchOptions};
use crate::error::{Error, Result};
use crate::units::{hz_to_rad, rad_to_hz, AngularFrequency};

pub const SCHEMA_VERSION: &str = "1";

/// Parses JSON into `T`, reporting the field path and position on failure.
pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let at = if path.is_empty() || path == "." {
            String::new()
        } else {
            format!("field `{path}`: ")
        };
        Error::InvalidInput(format!("{at}{inner}"))
    })
}

fn field_err(path: &str, msg: impl std::fmt::Display) -> Error {
    Error::InvalidInput(format!("field `{path}`: {msg}"))
}

fn check_version(v: &str) -> Result<()> {
    if v == SCHEMA_VERSION {
        Ok(())
    } else {
        Err(field_err(
            "schema_version",
            format!("unsupported schema version {v:?}, expected {SCHEMA_VERSION:?}"),
        ))
    }
}

fn default_z0() -> f64 {
    50.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeConfig {
    #[serde(rename = "f_GHz")]
    pub f_ghz: f64,
    #[serde(rename = "C_couple_fF")]
    pub c_couple_ff: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandConfig {
    #[serde(rename = "f_lo_GHz")]
    pub f_lo_ghz: f64,
    #[serde(rename = "f_hi_GHz")]
    pub f_hi_ghz: f64,
}

impl BandConfig {
    fn to_band(self, path: &str) -> Result<Band> {
        let lo = AngularFrequency::from_ghz(self.f_lo_ghz)
            .map_err(|e| field_err(&format!("{path}.f_lo_GHz"), e))?;
        let hi = AngularFrequency::from_ghz(self.f_hi_ghz)
            .map_err(|e| field_err(&format!("{path}.f_hi_GHz"), e))?;
        Band::new(lo, hi).map_err(|e| field_err(path, e))
    }
}

/// `"solve"` or a fixed `χ/2π` in MHz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChiSetting {
    Value(f64),
    Keyword(ChiKeyword),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChiKeyword {
    Solve,
}

impl Default for ChiSetting {
    fn default() -> Self {
        Self::Keyword(ChiKeyword::Solve)
    }
}

/// Solver knobs in interface units; all optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SearchConfig {
    pub omega_points: Option<usize>,
    pub chi_points: Option<usize>,
    #[serde(rename = "chi_min_MHz")]
    pub chi_min_mhz: Option<f64>,
    #[serde(rename = "chi_max_MHz")]
    pub chi_max_mhz: Option<f64>,
    pub tol_rad: Option<f64>,
    pub max_iterations: Option<usize>,
    pub max_seeds: Option<usize>,
    pub spacing_points: Option<usize>,
    /// Probe search window; defaults to the analysis band.
    pub search_band: Option<BandConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceConfig {
    pub schema_version: String,
    pub n_qubits: usize,
    pub modes: Vec<ModeConfig>,
    #[serde(rename = "chi_MHz", default)]
    pub chi_mhz: ChiSetting,
    #[serde(rename = "Z0_ohms", default = "default_z0")]
    pub z0_ohms: f64,
    #[serde(default)]
    pub band: Option<BandConfig>,
    #[serde(default)]
    pub resonator_model: ResonatorModel,
    #[serde(default)]
    pub free_mode_frequencies: bool,
    #[serde(default)]
    pub search: SearchConfig,
}

impl DeviceConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = parse_json(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        check_version(&self.schema_version)?;
        if self.n_qubits == 0 || self.n_qubits > crate::device::MAX_QUBITS {
            return Err(field_err(
                "n_qubits",
                format!(
                    "must be in 1..={}, got {}",
                    crate::device::MAX_QUBITS,
                    self.n_qubits
                ),
            ));
        }
        if self.modes.is_empty() {
            return Err(field_err("modes", "at least one mode is required"));
        }
        for (i, m) in self.modes.iter().enumerate() {
            if !(m.f_ghz.is_finite() && m.f_ghz > 0.0) {
                return Err(field_err(
                    &format!("modes[{i}].f_GHz"),
                    format!("must be > 0, got {}", m.f_ghz),
                ));
            }
            if !(m.c_couple_ff.is_finite() && m.c_couple_ff > 0.0) {
                return Err(field_err(
                    &format!("modes[{i}].C_couple_fF"),
                    format!("must be > 0, got {}", m.c_couple_ff),
                ));
            }
            if i > 0 && m.f_ghz <= self.modes[i - 1].f_ghz {
                return Err(field_err(
                    &format!("modes[{i}].f_GHz"),
                    "mode frequencies must be strictly increasing",
                ));
            }
        }
        if let ChiSetting::Value(v) = self.chi_mhz {
            if !(v.is_finite() && v > 0.0) {
                return Err(field_err(
                    "chi_MHz",
                    format!("must be > 0 or \"solve\", got {v}"),
                ));
            }
        }
        if !(self.z0_ohms.is_finite() && self.z0_ohms > 0.0) {
            return Err(field_err(
                "Z0_ohms",
                format!("must be > 0, got {}", self.z0_ohms),
            ));
        }
        if let Some(b) = self.band {
            b.to_band("band")?;
        }
        if let Some(b) = self.search.search_band {
            b.to_band("search.search_band")?;
        }
        self.search_options().map_err(|e| match e {
            Error::InvalidInput(m) => field_err("search", m),
            other => other,
        })?;
        Ok(())
    }

    pub fn search_options(&self) -> Result<SearchOptions> {
        let d = SearchOptions::default();
        let s = &self.search;
        let mut o = SearchOptions {
            omega_points: s.omega_points.unwrap_or(d.omega_points),
            chi_points: s.chi_points.unwrap_or(d.chi_points),
            chi_min: s.chi_min_mhz.map_or(d.chi_min, |v| hz_to_rad(v * 1e6)),
            chi_max: s.chi_max_mhz.map_or(d.chi_max, |v| hz_to_rad(v * 1e6)),
            tol: s.tol_rad.unwrap_or(d.tol),
            max_iterations: s.max_iterations.unwrap_or(d.max_iterations),
            max_seeds: s.max_seeds.unwrap_or(d.max_seeds),
            spacing_points: s.spacing_points.unwrap_or(d.spacing_points),
        };
        if let ChiSetting::Value(v) = self.chi_mhz {
            if s.chi_min_mhz.is_none() && s.chi_max_mhz.is_none() {
                o = o.around_chi(hz_to_rad(v * 1e6));
            }
        }
        o.validate()?;
        Ok(o)
    }

    pub fn free_parameters(&self) -> FreeParameters {
        if self.free_mode_frequencies {
            FreeParameters::ChiAndModes
        } else {
            FreeParameters::Chi
        }
    }

    /// `χ` used to build the device: the fixed value, or the geometric centre
    /// of the search range when it is to be solved for.
    pub fn nominal_chi(&self) -> Result<f64> {
        match self.chi_mhz {
            ChiSetting::Value(v) => Ok(hz_to_rad(v * 1e6)),
            ChiSetting::Keyword(ChiKeyword::Solve) => {
                let o = self.search_options()?;
                Ok((o.chi_min * o.chi_max).sqrt())
            }
        }
    }

    pub fn modes(&self) -> Result<Vec<Mode>> {
        self.modes
            .iter()
            .map(|m| {
                Ok(Mode {
                    omega: AngularFrequency::from_ghz(m.f_ghz)?,
                    c_couple: m.c_couple_ff * 1e-15,
                })
            })
            .collect()
    }

    pub fn device(&self) -> Result<ParityDevice> {
        let dev = ParityDevice::equal_chi(
            self.n_qubits,
            self.modes()?,
            self.nominal_chi()?,
            self.z0_ohms,
            self.resonator_model,
        )?;
        Ok(match self.band {
            Some(b) => dev.with_band(b.to_band("band")?),
            None => dev,
        })
    }

    pub fn search_band(&self, dev: &ParityDevice) -> Result<Band> {
        match self.search.search_band {
            Some(b) => b.to_band("search.search_band"),
            None => Ok(dev.band()),
        }
    }
}

fn default_lumped() -> ResonatorModel {
    ResonatorModel::Lumped
}

fn default_cascade_cc() -> f64 {
    10.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CascadeConfig {
    pub schema_version: String,
    pub n_qubits: usize,
    #[serde(rename = "f_r_GHz")]
    pub f_r_ghz: f64,
    #[serde(rename = "C_couple_fF", default = "default_cascade_cc")]
    pub c_couple_ff: f64,
    #[serde(rename = "Z0_ohms", default = "default_z0")]
    pub z0_ohms: f64,
    #[serde(default = "default_lumped")]
    pub resonator_model: ResonatorModel,
    #[serde(default)]
    pub band: Option<BandConfig>,
}

impl CascadeConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = parse_json(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        check_version(&self.schema_version)?;
        if self.n_qubits == 0 || self.n_qubits > crate::device::MAX_QUBITS {
            return Err(field_err(
                "n_qubits",
                format!("must be in 1..=8, got {}", self.n_qubits),
            ));
        }
        if !(self.f_r_ghz.is_finite() && self.f_r_ghz > 0.0) {
            return Err(field_err(
                "f_r_GHz",
                format!("must be > 0, got {}", self.f_r_ghz),
            ));
        }
        if !(self.c_couple_ff.is_finite() && self.c_couple_ff > 0.0) {
            return Err(field_err(
                "C_couple_fF",
                format!("must be > 0, got {}", self.c_couple_ff),
            ));
        }
        if !(self.z0_ohms.is_finite() && self.z0_ohms > 0.0) {
            return Err(field_err(
                "Z0_ohms",
                format!("must be > 0, got {}", self.z0_ohms),
            ));
        }
        if let Some(b) = self.band {
            b.to_band("band")?;
        }
        Ok(())
    }

    pub fn tune(&self) -> Result<TunedCascade> {
        let wr = AngularFrequency::from_ghz(self.f_r_ghz)?;
        let cc = self.c_couple_ff * 1e-15;
        let band = match self.band {
            Some(b) => b.to_band("band")?,
            None => cascade_band(wr, cc, self.z0_ohms)?,
        };
        tune_cascade(
            self.n_qubits,
            wr,
            cc,
            self.z0_ohms,
            self.resonator_model,
            Some(band),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasinFile {
    #[serde(rename = "f_p_Hz")]
    pub f_p_hz: f64,
    #[serde(rename = "chi_Hz")]
    pub chi_hz: f64,
    #[serde(rename = "mode_frequencies_Hz")]
    pub mode_frequencies_hz: Vec<f64>,
    pub delta_theta_deg: f64,
    pub residual_norm_rad: f64,
}

/// Serialized [`EraserSolution`]. The `*_rad_s` fields are authoritative and
/// are written at full round-trip precision; Hz and degree fields are for reading.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionFile {
    pub schema_version: String,
    pub n_qubits: usize,
    pub chi_convention: String,
    pub omega_p_rad_s: f64,
    pub chi_rad_s: f64,
    pub mode_omegas_rad_s: Vec<f64>,
    #[serde(rename = "f_p_Hz")]
    pub f_p_hz: f64,
    #[serde(rename = "chi_Hz")]
    pub chi_hz: f64,
    #[serde(rename = "mode_frequencies_Hz")]
    pub mode_frequencies_hz: Vec<f64>,
    pub theta_by_weight_rad: Vec<f64>,
    pub theta_by_weight_deg: Vec<f64>,
    pub residuals_rad: Vec<f64>,
    pub delta_theta_rad: f64,
    pub delta_theta_deg: f64,
    pub dispersion_b_s: f64,
    pub dispersion_b2_s2: f64,
    pub low_contrast: bool,
    pub tolerance_rad: f64,
    pub basins: Vec<BasinFile>,
}

pub const CHI_CONVENTION: &str = "chi_Hz is chi/2pi; chi_rad_s = 2pi * chi_Hz";

impl SolutionFile {
    pub fn from_solution(sol: &EraserSolution) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.into(),
            n_qubits: sol.qubits,
            chi_convention: CHI_CONVENTION.into(),
            omega_p_rad_s: sol.omega_p.value(),
            chi_rad_s: sol.chi,
            mode_omegas_rad_s: sol.mode_omegas.clone(),
            f_p_hz: sol.omega_p.hz(),
            chi_hz: rad_to_hz(sol.chi),
            mode_frequencies_hz: sol.mode_omegas.iter().map(|w| rad_to_hz(*w)).collect(),
            theta_by_weight_rad: sol.theta_by_weight.clone(),
            theta_by_weight_deg: sol.theta_by_weight.iter().map(|t| t.to_degrees()).collect(),
            residuals_rad: sol.residuals.clone(),
            delta_theta_rad: sol.delta_theta,
            delta_theta_deg: sol.delta_theta.to_degrees(),
            dispersion_b_s: sol.dispersion_b,
            dispersion_b2_s2: sol.dispersion_b2,
            low_contrast: sol.low_contrast,
            tolerance_rad: sol.tolerance,
            basins: sol
                .basins
                .iter()
                .map(|b| BasinFile {
                    f_p_hz: b.omega_p / TAU,
                    chi_hz: rad_to_hz(b.chi),
                    mode_frequencies_hz: b.mode_omegas.iter().map(|w| rad_to_hz(*w)).collect(),
                    delta_theta_deg: b.delta_theta.to_degrees(),
                    residual_norm_rad: b.residual_norm,
                })
                .collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: Self = parse_json(text)?;
        check_version(&f.schema_version)?;
        AngularFrequency::new(f.omega_p_rad_s).map_err(|e| field_err("omega_p_rad_s", e))?;
        if !(f.chi_rad_s.is_finite() && f.chi_rad_s > 0.0) {
            return Err(field_err("chi_rad_s", "must be > 0"));
        }
        Ok(f)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("solution is plain data")
    }

    pub fn to_solution(&self) -> Result<EraserSolution> {
        Ok(EraserSolution {
            qubits: self.n_qubits,
            omega_p: AngularFrequency::new(self.omega_p_rad_s)?,
            chi: self.chi_rad_s,
            mode_omegas: self.mode_omegas_rad_s.clone(),
            theta_by_weight: self.theta_by_weight_rad.clone(),
            residuals: self.residuals_rad.clone(),
            delta_theta: self.delta_theta_rad,
            dispersion_b: self.dispersion_b_s,
            dispersion_b2: self.dispersion_b2_s2,
            low_contrast: self.low_contrast,
            tolerance: self.tolerance_rad,
            basins: self
                .basins
                .iter()
                .map(|b| Basin {
                    omega_p: hz_to_rad(b.f_p_hz),
                    chi: hz_to_rad(b.chi_hz),
                    mode_omegas: b
                        .mode_frequencies_hz
                        .iter()
                        .map(|f| hz_to_rad(*f))
                        .collect(),
                    delta_theta: b.delta_theta_deg.to_radians(),
                    residual_norm: b.residual_norm_rad,
                })
                .collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const THREE_QUBIT: &str = r#"{
        "schema_version": "1",
        "n_qubits": 3,
        "modes": [
            {"f_GHz": 9.99, "C_couple_fF": 10},
            {"f_GHz": 10.01, "C_couple_fF": 10}
        ],
        "chi_MHz": "solve",
        "Z0_ohms": 50,
        "band": {"f_lo_GHz": 9.6, "f_hi_GHz": 10.2},
        "resonator_model": "stub"
    }"#;

    #[test]
    fn three_qubit_config_parses() {
        let cfg = DeviceConfig::from_json(THREE_QUBIT).unwrap();
        assert_eq!(cfg.chi_mhz, ChiSetting::Keyword(ChiKeyword::Solve));
        let dev = cfg.device().unwrap();
        assert_eq!(dev.qubits(), 3);
        assert_eq!(dev.modes().len(), 2);
        assert!((dev.band().lo.hz() - 9.6e9).abs() < 1e-3);
        assert_eq!(cfg.free_parameters(), FreeParameters::Chi);
    }

    #[test]
    fn numeric_chi_narrows_search() {
        let text = THREE_QUBIT.replace("\"solve\"", "5.77");
        let cfg = DeviceConfig::from_json(&text).unwrap();
        let o = cfg.search_options().unwrap();
        let chi = hz_to_rad(5.77e6);
        assert!((o.chi_min - chi / 3.0).abs() < 1e-6);
        assert!((o.chi_max - 3.0 * chi).abs() < 1e-6);
    }

    #[test]
    fn errors_name_the_field() {
        let bad_type = THREE_QUBIT.replace("\"C_couple_fF\": 10}\n", "\"C_couple_fF\": \"x\"}\n");
        let e = DeviceConfig::from_json(&bad_type).unwrap_err().to_string();
        assert!(e.contains("modes[1].C_couple_fF"), "{e}");

        let bad_value = THREE_QUBIT.replace("\"f_GHz\": 10.01", "\"f_GHz\": -1");
        let e = DeviceConfig::from_json(&bad_value).unwrap_err().to_string();
        assert!(e.contains("modes[1].f_GHz"), "{e}");

        let unknown = THREE_QUBIT.replace("\"Z0_ohms\"", "\"Z_0\"");
        let e = DeviceConfig::from_json(&unknown).unwrap_err().to_string();
        assert!(e.contains("Z_0"), "{e}");

        let version = THREE_QUBIT.replace("\"1\"", "\"2\"");
        let e = DeviceConfig::from_json(&version).unwrap_err().to_string();
        assert!(e.contains("schema_version"), "{e}");

        let e = DeviceConfig::from_json("{\"schema_version\": \"1\", ")
            .unwrap_err()
            .to_string();
        assert!(e.contains("line"), "{e}");
    }

    #[test]
    fn cascade_config_defaults() {
        let cfg = CascadeConfig::from_json(r#"{"schema_version":"1","n_qubits":3,"f_r_GHz":10.0}"#)
            .unwrap();
        assert_eq!(cfg.resonator_model, ResonatorModel::Lumped);
        assert_eq!(cfg.c_couple_ff, 10.0);
        assert!(
            CascadeConfig::from_json(r#"{"schema_version":"1","n_qubits":0,"f_r_GHz":10.0}"#)
                .is_err()
        );
    }
}
