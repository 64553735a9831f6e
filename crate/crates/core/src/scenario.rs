//! Scenario files: the JSON schema consumed by the CLI and FFI layers.
//!
//! All quantities are SI; angles are given in degrees in files and converted
//! to radians at this boundary. Unknown keys are rejected.

use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ConstraintSet, CostKind, Scenario, State, VehicleParams};

#[derive(Debug, Error)]
pub enum ScenarioFileError {
    #[error("cannot read scenario file: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed scenario: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid scenario: {0}")]
    Invalid(#[from] crate::model::ModelError),
    #[error("invalid scenario: {0}")]
    Schema(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    Auto,
    Indirect,
    Direct,
}

impl Default for SolveMethod {
    fn default() -> Self {
        SolveMethod::Auto
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VehicleSection {
    /// Maximal thrust, N.
    pub thrust_max_n: f64,
    /// Maximal mass flow rate, kg/s.
    pub flow_rate_kg_s: f64,
    /// Dry mass, kg.
    pub mass_empty_kg: f64,
    /// Gravitational acceleration, m/s^2.
    pub gravity_m_s2: f64,
    pub throttle_min: f64,
    pub throttle_max: f64,
    /// Constant-pressure force term sigma, N (0 selects the vacuum model).
    #[serde(default)]
    pub pressure_term_n: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ConstraintsSection {
    #[serde(default)]
    pub pointing_enabled: bool,
    /// Half-angle of the pointing cone, degrees; required when enabled.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pointing_half_angle_deg: Option<f64>,
    #[serde(default)]
    pub glide_slope_enabled: bool,
    /// Glide-slope angle, degrees; required when enabled.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub glide_slope_angle_deg: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub position_m: [f64; 3],
    pub velocity_m_s: [f64; 3],
    pub mass_kg: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FinalSection {
    /// Fixed landing coordinates for a pinpoint landing; omit to leave the
    /// horizontal position free (only altitude and vertical speed pinned).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position_xy_m: Option<[f64; 2]>,
    /// Final velocity target; with a free horizontal position only the z
    /// component is enforced.
    #[serde(default)]
    pub velocity_m_s: [f64; 3],
    /// Fixed final time, s; omit to leave t_f free.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_s: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default)]
    pub method: SolveMethod,
    /// Transcription nodes for the direct solver.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
    /// Integration steps for the indirect solver.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub vehicle: VehicleSection,
    #[serde(default)]
    pub constraints: ConstraintsSection,
    pub initial: InitialSection,
    #[serde(rename = "final")]
    pub terminal: FinalSection,
    pub cost: CostSelector,
    #[serde(default)]
    pub solver: SolverSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostSelector {
    MinFuel,
    MaxFinalMass,
    MinTime,
}

impl From<CostSelector> for CostKind {
    fn from(c: CostSelector) -> CostKind {
        match c {
            CostSelector::MinFuel => CostKind::MinFuel,
            CostSelector::MaxFinalMass => CostKind::MaxFinalMass,
            CostSelector::MinTime => CostKind::MinTime,
        }
    }
}

impl ScenarioFile {
    pub fn from_path(path: &std::path::Path) -> Result<Self, ScenarioFileError> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn from_json(text: &str) -> Result<Self, ScenarioFileError> {
        Ok(serde_json::from_str(text)?)
    }

    /// Convert to the validated in-memory scenario, degrees to radians.
    pub fn to_scenario(&self) -> Result<Scenario, ScenarioFileError> {
        let v = &self.vehicle;
        let params = VehicleParams {
            thrust_max: v.thrust_max_n,
            flow_rate: v.flow_rate_kg_s,
            mass_empty: v.mass_empty_kg,
            gravity: v.gravity_m_s2,
            throttle_min: v.throttle_min,
            throttle_max: v.throttle_max,
            pressure_term: v.pressure_term_n,
        };
        let c = &self.constraints;
        if c.pointing_enabled && c.pointing_half_angle_deg.is_none() {
            return Err(ScenarioFileError::Schema(
                "pointing_enabled requires pointing_half_angle_deg".into(),
            ));
        }
        if c.glide_slope_enabled && c.glide_slope_angle_deg.is_none() {
            return Err(ScenarioFileError::Schema(
                "glide_slope_enabled requires glide_slope_angle_deg".into(),
            ));
        }
        let constraints = ConstraintSet {
            pointing_half_angle: c
                .pointing_half_angle_deg
                .unwrap_or(90.0)
                .to_radians(),
            glide_slope_angle: c.glide_slope_angle_deg.unwrap_or(0.0).to_radians(),
            pointing_enabled: c.pointing_enabled,
            glide_slope_enabled: c.glide_slope_enabled,
        };
        let scenario = Scenario {
            params,
            constraints,
            initial_state: State::new(
                Vector3::from(self.initial.position_m),
                Vector3::from(self.initial.velocity_m_s),
                self.initial.mass_kg,
            ),
            final_position_xy: self.terminal.position_xy_m.map(Vector2::from),
            final_velocity: Vector3::from(self.terminal.velocity_m_s),
            cost: self.cost.into(),
            final_time: self.terminal.time_s,
        };
        scenario.validate()?;
        Ok(scenario)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_json() -> &'static str {
        r#"{
            "vehicle": {
                "thrust_max_n": 16573.0,
                "flow_rate_kg_s": 0.0,
                "mass_empty_kg": 1505.0,
                "gravity_m_s2": 3.71,
                "throttle_min": 0.3,
                "throttle_max": 0.8
            },
            "constraints": {
                "glide_slope_enabled": true,
                "glide_slope_angle_deg": 0.0,
                "pointing_enabled": true,
                "pointing_half_angle_deg": 45.0
            },
            "initial": {
                "position_m": [2000.0, 0.0, 1500.0],
                "velocity_m_s": [100.0, 0.0, -75.0],
                "mass_kg": 1905.0
            },
            "final": {
                "position_xy_m": [0.0, 0.0],
                "velocity_m_s": [0.0, 0.0, 0.0]
            },
            "cost": "min_fuel"
        }"#
    }

    #[test]
    fn reference_file_round_trips() {
        let file = ScenarioFile::from_json(reference_json()).unwrap();
        let scenario = file.to_scenario().unwrap();
        assert_eq!(scenario.params.thrust_max, 16573.0);
        assert!(scenario.constraints.pointing_enabled);
        assert!((scenario.constraints.pointing_half_angle - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
        assert!(scenario.pinpoint());
        assert!(scenario.final_time.is_none());
    }

    #[test]
    fn unknown_keys_are_rejected_by_name() {
        let bad = reference_json().replace("\"cost\"", "\"costt\"");
        let err = ScenarioFile::from_json(&bad).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("costt"), "{msg}");
    }

    #[test]
    fn angle_at_ninety_degrees_is_rejected() {
        let bad = reference_json().replace("\"pointing_half_angle_deg\": 45.0", "\"pointing_half_angle_deg\": 95.0");
        let file = ScenarioFile::from_json(&bad).unwrap();
        assert!(file.to_scenario().is_err());
    }

    #[test]
    fn pressure_term_violating_net_thrust_is_rejected() {
        let bad = reference_json()
            .replace("\"flow_rate_kg_s\": 0.0", "\"flow_rate_kg_s\": 0.0, \"pressure_term_n\": 5000.0")
            .replace("\"glide_slope_enabled\": true", "\"glide_slope_enabled\": false")
            .replace("\"pointing_enabled\": true", "\"pointing_enabled\": false");
        let file = ScenarioFile::from_json(&bad).unwrap();
        let err = file.to_scenario().unwrap_err();
        assert!(err.to_string().contains("net thrust"), "{err}");
    }

    #[test]
    fn enabled_constraint_requires_its_angle() {
        let bad = reference_json().replace("\"glide_slope_angle_deg\": 0.0,", "");
        let file = ScenarioFile::from_json(&bad).unwrap();
        let err = file.to_scenario().unwrap_err();
        assert!(err.to_string().contains("glide_slope_angle_deg"), "{err}");
    }
}
