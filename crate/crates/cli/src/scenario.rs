//! Scenario files: versioned JSON describing constants, grid, state and the
//! requests to run against them.

use std::sync::Arc;

use qdim_core::fock::{FockState1, FockState2, StateRecords};
use qdim_core::kspace::{coherent_field, EmStateField, PhotonProfile, ScalarField, ScalarProfile};
use qdim_core::photon::{single_photon_field, PhotonPolarization, SinglePhotonSpec};
use qdim_core::{KGrid, PhysicalConstants, Vec3, C64};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("unsupported schema version {0} (expected {SCHEMA_VERSION})")]
    Version(u32),
    #[error("{context}: {source}")]
    Physics {
        context: &'static str,
        #[source]
        source: qdim_core::Error,
    },
    #[error("{0}")]
    Inconsistent(String),
}

fn physics(context: &'static str) -> impl FnOnce(qdim_core::Error) -> ScenarioError {
    move |source| ScenarioError::Physics { context, source }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: u32,
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub constants: PhysicalConstants,
    pub grid: GridSpec,
    #[serde(default = "default_cutoff")]
    pub cutoff: usize,
    pub state: StateSpec,
    #[serde(default)]
    pub requests: Vec<Request>,
}

fn default_cutoff() -> usize {
    16
}

fn default_width() -> f64 {
    1.0
}

fn default_shift() -> [f64; 3] {
    [0.5; 3]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GridSpec {
    Spherical {
        r_nodes: usize,
        ang_nodes: usize,
        #[serde(default = "default_width")]
        r_scale: f64,
    },
    Box {
        side: f64,
        n: usize,
        #[serde(default = "default_shift")]
        shift: [f64; 3],
    },
    /// Rows `[kx, ky, kz, w]`.
    Explicit { nodes: Vec<[f64; 4]> },
    /// Rows `[kx, ky, kz, w]`; each row also contributes `−k` with weight `w`.
    SymmetricPairs { half: Vec<[f64; 4]> },
}

impl GridSpec {
    pub fn build(&self) -> qdim_core::Result<KGrid> {
        let split = |rows: &[[f64; 4]]| -> (Vec<Vec3>, Vec<f64>) {
            rows.iter().map(|r| (Vec3::new(r[0], r[1], r[2]), r[3])).unzip()
        };
        match self {
            Self::Spherical { r_nodes, ang_nodes, r_scale } => KGrid::spherical(*r_nodes, *ang_nodes, *r_scale),
            Self::Box { side, n, shift } => KGrid::box_modes(*side, *n, *shift),
            Self::Explicit { nodes } => {
                let (k, w) = split(nodes);
                KGrid::explicit(k, w)
            }
            Self::SymmetricPairs { half } => {
                let (k, w) = split(half);
                KGrid::symmetric_pairs(&k.into_iter().zip(w).collect::<Vec<_>>())
            }
        }
    }
}

/// Complex amplitude per node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProfileSpec {
    /// `amplitude · exp(−|k − center|²/(2 width²))`
    Gaussian {
        amplitude: [f64; 2],
        #[serde(default = "default_width")]
        width: f64,
        #[serde(default)]
        center: [f64; 3],
    },
    /// One `[re, im]` per node.
    Values { values: Vec<[f64; 2]> },
}

impl ProfileSpec {
    fn tabulate(&self, grid: &KGrid) -> Result<Vec<C64>, ScenarioError> {
        match self {
            Self::Gaussian { amplitude, width, center } => {
                if width.is_nan() || *width <= 0.0 {
                    return Err(ScenarioError::Inconsistent(format!("gaussian width must be positive (got {width})")));
                }
                let a = C64::new(amplitude[0], amplitude[1]);
                let c = Vec3::from(*center);
                Ok(grid.nodes().iter().map(|k| a * (-(k - c).norm_squared() / (2.0 * width * width)).exp()).collect())
            }
            Self::Values { values } => {
                if values.len() != grid.len() {
                    return Err(ScenarioError::Inconsistent(format!(
                        "profile has {} values for {} grid nodes",
                        values.len(),
                        grid.len()
                    )));
                }
                Ok(values.iter().map(|v| C64::new(v[0], v[1])).collect())
            }
        }
    }
}

/// Real value per node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RealProfileSpec {
    Gaussian {
        amplitude: f64,
        #[serde(default = "default_width")]
        width: f64,
    },
    Values {
        values: Vec<f64>,
    },
}

impl RealProfileSpec {
    fn tabulate(&self, grid: &KGrid) -> Vec<f64> {
        match self {
            Self::Gaussian { amplitude, width } => {
                grid.nodes().iter().map(|k| amplitude * (-k.norm_squared() / (2.0 * width * width)).exp()).collect()
            }
            Self::Values { values } => values.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldKind {
    Scalar,
    Photon,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StateSpec {
    /// Coherent state per node with amplitude `F(k)`. Scalar fields use
    /// `profile`; photon fields use `profile_h` and `profile_v`.
    Coherent {
        field: FieldKind,
        #[serde(default)]
        profile: Option<ProfileSpec>,
        #[serde(default)]
        profile_h: Option<ProfileSpec>,
        #[serde(default)]
        profile_v: Option<ProfileSpec>,
    },
    /// The same number state on every node: `n` for scalar fields,
    /// `(n_h, n_v)` for photon fields.
    Number {
        field: FieldKind,
        #[serde(default)]
        n: usize,
        #[serde(default)]
        n_h: usize,
        #[serde(default)]
        n_v: usize,
    },
    SinglePhoton {
        rho: RealProfileSpec,
        #[serde(default)]
        phase: Option<Vec<f64>>,
        polarization: PhotonPolarization,
    },
    /// Explicit per-node states, or a single state used on every node.
    Explicit { field: FieldKind, states: Vec<StateRecords> },
}

impl StateSpec {
    pub fn field_kind(&self) -> FieldKind {
        match self {
            Self::Coherent { field, .. } | Self::Number { field, .. } | Self::Explicit { field, .. } => *field,
            Self::SinglePhoton { .. } => FieldKind::Photon,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Request {
    /// Points `[x0, x1, x2, x3]`.
    FieldEval {
        points: Vec<[f64; 4]>,
    },
    Energy,
    Stokes,
    /// Rotation matrix (row-major rows) or rapidity; checked at `points`.
    Covariance {
        #[serde(default)]
        rotation: Option<[[f64; 3]; 3]>,
        #[serde(default)]
        chi: Option<f64>,
        points: Vec<[f64; 4]>,
    },
    Calibrate,
    AppendixB {
        #[serde(default)]
        x0: f64,
    },
    Verify {
        #[serde(default)]
        seed: Option<u64>,
    },
}

impl Request {
    pub fn name(&self) -> &'static str {
        match self {
            Self::FieldEval { .. } => "field-eval",
            Self::Energy => "energy",
            Self::Stokes => "stokes",
            Self::Covariance { .. } => "covariance",
            Self::Calibrate => "calibrate",
            Self::AppendixB { .. } => "appendix-b",
            Self::Verify { .. } => "verify",
        }
    }
}

/// Field built from a scenario.
#[derive(Debug, Clone)]
pub enum BuiltField {
    Scalar(ScalarField),
    Photon(EmStateField),
}

/// Everything a scenario describes, constructed and validated.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub grid: Arc<KGrid>,
    pub field: BuiltField,
    pub constants: PhysicalConstants,
    /// Amplitude per node used by the mirror cross-term check (scalar profile or the
    /// H component of a photon profile).
    pub amplitude_h: Option<Vec<C64>>,
    pub photon_spec: Option<SinglePhotonSpec>,
}

impl Scenario {
    /// SHA-256 of the canonical re-serialization.
    pub fn checksum(&self) -> String {
        let text = serde_json::to_string(self).expect("scenario serializes");
        Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn prepare(&self) -> Result<Prepared, ScenarioError> {
        if self.schema != SCHEMA_VERSION {
            return Err(ScenarioError::Version(self.schema));
        }
        self.constants.validate().map_err(physics("constants"))?;
        if self.cutoff == 0 {
            return Err(physics("cutoff")(qdim_core::Error::InvalidCutoff(0)));
        }
        let grid = Arc::new(self.grid.build().map_err(physics("grid"))?);
        let pc = self.constants;
        let cutoff = self.cutoff;
        let mut amplitude_h = None;
        let mut photon_spec = None;
        let field = match &self.state {
            StateSpec::Coherent { field: FieldKind::Scalar, profile, profile_h, profile_v } => {
                if profile_h.is_some() || profile_v.is_some() {
                    return Err(ScenarioError::Inconsistent(
                        "scalar coherent state takes `profile`, not `profile_h`/`profile_v`".into(),
                    ));
                }
                let p = profile
                    .as_ref()
                    .ok_or_else(|| ScenarioError::Inconsistent("scalar coherent state needs `profile`".into()))?;
                let values = p.tabulate(&grid)?;
                amplitude_h = Some(values.clone());
                let prof = ScalarProfile::from_values(grid.clone(), values).map_err(physics("profile"))?;
                BuiltField::Scalar(coherent_field(&prof, cutoff, pc).map_err(physics("coherent state"))?)
            }
            StateSpec::Coherent { field: FieldKind::Photon, profile, profile_h, profile_v } => {
                if profile.is_some() {
                    return Err(ScenarioError::Inconsistent(
                        "photon coherent state takes `profile_h`/`profile_v`, not `profile`".into(),
                    ));
                }
                let zero = vec![C64::new(0.0, 0.0); grid.len()];
                let h = profile_h.as_ref().map(|p| p.tabulate(&grid)).transpose()?.unwrap_or_else(|| zero.clone());
                let v = profile_v.as_ref().map(|p| p.tabulate(&grid)).transpose()?.unwrap_or(zero);
                amplitude_h = Some(h.clone());
                let prof =
                    PhotonProfile::from_values(grid.clone(), h.into_iter().zip(v).map(|(a, b)| [a, b]).collect())
                        .map_err(physics("profile"))?;
                BuiltField::Photon(coherent_field(&prof, cutoff, pc).map_err(physics("coherent state"))?)
            }
            StateSpec::Number { field: FieldKind::Scalar, n, n_h, n_v } => {
                if *n_h != 0 || *n_v != 0 {
                    return Err(ScenarioError::Inconsistent("scalar number state takes `n`, not `n_h`/`n_v`".into()));
                }
                let s = FockState1::number(*n, cutoff).map_err(physics("number state"))?;
                BuiltField::Scalar(ScalarField::uniform(grid.clone(), s, pc).map_err(physics("state field"))?)
            }
            StateSpec::Number { field: FieldKind::Photon, n, n_h, n_v } => {
                if *n != 0 {
                    return Err(ScenarioError::Inconsistent("photon number state takes `n_h`/`n_v`, not `n`".into()));
                }
                let s = FockState2::number(*n_h, *n_v, cutoff).map_err(physics("number state"))?;
                BuiltField::Photon(EmStateField::uniform(grid.clone(), s, pc).map_err(physics("state field"))?)
            }
            StateSpec::SinglePhoton { rho, phase, polarization } => {
                let rho = rho.tabulate(&grid);
                let phase = phase.clone().unwrap_or_else(|| vec![0.0; rho.len()]);
                let spec = SinglePhotonSpec::new(rho, phase, *polarization).map_err(physics("single-photon spec"))?;
                let f = single_photon_field(&spec, grid.clone(), cutoff, pc).map_err(physics("single-photon state"))?;
                photon_spec = Some(spec);
                BuiltField::Photon(f)
            }
            StateSpec::Explicit { field, states } => {
                if states.len() != 1 && states.len() != grid.len() {
                    return Err(ScenarioError::Inconsistent(format!(
                        "explicit state needs 1 or {} records (got {})",
                        grid.len(),
                        states.len()
                    )));
                }
                let expected_modes = match field {
                    FieldKind::Scalar => 1,
                    FieldKind::Photon => 2,
                };
                if let Some(i) = states.iter().position(|s| s.modes != expected_modes) {
                    return Err(ScenarioError::Inconsistent(format!(
                        "state {i} has {} modes but the field is {field:?}",
                        states[i].modes
                    )));
                }
                let pick = |i: usize| &states[if states.len() == 1 { 0 } else { i }];
                match field {
                    FieldKind::Scalar => {
                        let s = (0..grid.len())
                            .map(|i| FockState1::try_from(pick(i)))
                            .collect::<qdim_core::Result<Vec<_>>>()
                            .map_err(physics("explicit state"))?;
                        BuiltField::Scalar(ScalarField::new(grid.clone(), s, pc).map_err(physics("state field"))?)
                    }
                    FieldKind::Photon => {
                        let s = (0..grid.len())
                            .map(|i| FockState2::try_from(pick(i)))
                            .collect::<qdim_core::Result<Vec<_>>>()
                            .map_err(physics("explicit state"))?;
                        BuiltField::Photon(EmStateField::new(grid.clone(), s, pc).map_err(physics("state field"))?)
                    }
                }
            }
        };
        for req in &self.requests {
            self.check_request(req)?;
        }
        Ok(Prepared { grid, field, constants: pc, amplitude_h, photon_spec })
    }

    fn check_request(&self, req: &Request) -> Result<(), ScenarioError> {
        let kind = self.state.field_kind();
        match req {
            Request::Stokes if kind == FieldKind::Scalar => {
                Err(ScenarioError::Inconsistent("stokes request needs a photon field".into()))
            }
            Request::Covariance { rotation, chi, .. } => match (rotation, chi) {
                (Some(_), Some(_)) | (None, None) => {
                    Err(ScenarioError::Inconsistent("covariance request needs exactly one of `rotation`, `chi`".into()))
                }
                (None, Some(_)) if kind == FieldKind::Photon => {
                    Err(ScenarioError::Inconsistent("boosts are only defined for scalar fields".into()))
                }
                _ => Ok(()),
            },
            Request::AppendixB { .. } if !matches!(self.state, StateSpec::Coherent { .. }) => {
                Err(ScenarioError::Inconsistent("appendix-b request needs a coherent profile".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Parses and fully validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let scenario: Scenario = serde_path_to_error::deserialize(de)
        .map_err(|e| ScenarioError::Schema { path: e.path().to_string(), message: e.inner().to_string() })?;
    scenario.prepare()?;
    Ok(scenario)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "schema": 1,
        "grid": {"kind": "explicit", "nodes": [[0, 0, 1, 1]]},
        "cutoff": 2,
        "state": {"kind": "number", "field": "scalar", "n": 0},
        "requests": [{"kind": "energy"}]
    }"#;

    #[test]
    fn minimal_parses() {
        let s = parse_scenario(MINIMAL).unwrap();
        assert_eq!(s.requests, vec![Request::Energy]);
        assert_eq!(s.constants, PhysicalConstants::natural());
        assert_eq!(s.checksum().len(), 64);
    }

    #[test]
    fn schema_error_has_path() {
        let text = MINIMAL.replace(r#""n": 0"#, r#""n": "zero""#);
        let err = parse_scenario(&text).unwrap_err();
        assert!(err.to_string().contains("state"), "{err}");
        let text = MINIMAL.replace(r#""cutoff": 2"#, r#""cutof": 2"#);
        assert!(matches!(parse_scenario(&text), Err(ScenarioError::Schema { .. })));
    }

    #[test]
    fn version_checked() {
        let text = MINIMAL.replace(r#""schema": 1"#, r#""schema": 7"#);
        assert!(matches!(parse_scenario(&text), Err(ScenarioError::Version(7))));
    }

    #[test]
    fn rho_out_of_range_names_node() {
        let text = r#"{
            "schema": 1,
            "grid": {"kind": "explicit", "nodes": [[0,0,1,1],[0,1,0,1],[1,0,0,1],[0,0,2,1]]},
            "cutoff": 2,
            "state": {"kind": "single-photon", "polarization": "linear-h",
                      "rho": {"type": "values", "values": [0.1, 0.2, 0.3, 1.2]}}
        }"#;
        let err = parse_scenario(text).unwrap_err();
        assert!(err.to_string().contains("rho[3] out of [0,1]"), "{err}");
    }

    #[test]
    fn zero_node_names_index() {
        let text = MINIMAL.replace("[[0, 0, 1, 1]]", "[[0, 0, 1, 1], [0, 0, 0, 1]]");
        let err = parse_scenario(&text).unwrap_err();
        assert!(err.to_string().contains("node 1"), "{err}");
    }

    #[test]
    fn inconsistent_requests_rejected() {
        let text = MINIMAL.replace(r#"{"kind": "energy"}"#, r#"{"kind": "stokes"}"#);
        assert!(matches!(parse_scenario(&text), Err(ScenarioError::Inconsistent(_))));
    }
}
