//! TOML model file.
//!
//! ```toml
//! format = "tarifflab-model"
//! version = 1
//! periods = 2
//! customers = 1
//! covariance_convention = "population"   # 1/J
//! g = [2.0, -0.5, -0.5, 1.0]             # row-major, kWh per $/kWh
//! mean_price = [1.0, 2.0]                # $/kWh
//! mean_state = [10.0, 8.0]               # kWh
//! cross_covariance = [0.0, 0.0, 0.0, 0.0]
//!
//! [provenance]                           # optional, written by `fit`
//! flat_rate = 0.172
//! elasticity = -0.3
//! alpha = 0.2
//! connection_charge = 0.52
//! kernel_scale = 1.0e6
//! realized_elasticity = -0.3
//! price_unit = "mwh"
//!
//! [[scenario]]                           # one per day, equiprobable
//! price = [1.0, 2.0]
//! state = [10.0, 8.0]
//! ```
//!
//! The moment fields are redundant with the scenarios and are checked
//! against them on load. A hand-written `g` overrides any calibration.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CalibrationConfig, IngestError};
use crate::model::LinearDemandModel;
use crate::scenario::{Scenario, ScenarioSet};
use crate::{Matrix, Vector};

pub const MODEL_FORMAT: &str = "tarifflab-model";
pub const MODEL_FORMAT_VERSION: u32 = 1;
pub const COVARIANCE_CONVENTION: &str = "population";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub flat_rate: f64,
    pub elasticity: f64,
    pub alpha: f64,
    pub connection_charge: f64,
    pub kernel_scale: f64,
    pub realized_elasticity: f64,
    pub price_unit: String,
}

impl Provenance {
    pub fn calibration_config(&self, customers: u64) -> CalibrationConfig {
        CalibrationConfig {
            flat_rate: self.flat_rate,
            elasticity: self.elasticity,
            alpha: self.alpha,
            customers,
            connection_charge: self.connection_charge,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRecord {
    pub price: Vec<f64>,
    pub state: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub periods: usize,
    pub customers: u64,
    pub covariance_convention: String,
    pub g: Vec<f64>,
    pub mean_price: Vec<f64>,
    pub mean_state: Vec<f64>,
    pub cross_covariance: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
    #[serde(rename = "scenario", default)]
    pub scenarios: Vec<ScenarioRecord>,
}

fn row_major(m: &Matrix) -> Vec<f64> {
    m.transpose().as_slice().to_vec()
}

fn err(msg: impl Into<String>) -> IngestError {
    IngestError::ModelFile(msg.into())
}

impl ModelFile {
    pub fn from_model(model: &LinearDemandModel, provenance: Option<Provenance>) -> Self {
        let set = model.scenarios();
        Self {
            format: MODEL_FORMAT.into(),
            version: MODEL_FORMAT_VERSION,
            periods: model.periods(),
            customers: model.customers(),
            covariance_convention: COVARIANCE_CONVENTION.into(),
            g: row_major(model.g()),
            mean_price: set.mean_price().as_slice().to_vec(),
            mean_state: set.mean_state().as_slice().to_vec(),
            cross_covariance: row_major(set.cross_covariance()),
            provenance,
            scenarios: set
                .scenarios()
                .iter()
                .map(|s| ScenarioRecord {
                    price: s.price.as_slice().to_vec(),
                    state: s.state.as_slice().to_vec(),
                })
                .collect(),
        }
    }

    pub fn parse(text: &str) -> Result<Self, IngestError> {
        let file: Self = toml::from_str(text).map_err(|e| err(e.to_string()))?;
        file.check_shape()?;
        Ok(file)
    }

    pub fn to_toml(&self) -> Result<String, IngestError> {
        toml::to_string(self).map_err(|e| err(e.to_string()))
    }

    pub fn read(path: &Path) -> Result<Self, IngestError> {
        let text = std::fs::read_to_string(path).map_err(|source| IngestError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn write(&self, path: &Path) -> Result<(), IngestError> {
        std::fs::write(path, self.to_toml()?).map_err(|source| IngestError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    fn check_shape(&self) -> Result<(), IngestError> {
        if self.format != MODEL_FORMAT {
            return Err(err(format!("unknown format `{}`", self.format)));
        }
        if self.version != MODEL_FORMAT_VERSION {
            return Err(err(format!("unsupported version {}", self.version)));
        }
        if self.covariance_convention != COVARIANCE_CONVENTION {
            return Err(err(format!(
                "covariance_convention must be `{COVARIANCE_CONVENTION}`, found `{}`",
                self.covariance_convention
            )));
        }
        let n = self.periods;
        if n == 0 {
            return Err(err("periods must be positive"));
        }
        let lengths = [
            ("g", self.g.len(), n * n),
            ("mean_price", self.mean_price.len(), n),
            ("mean_state", self.mean_state.len(), n),
            ("cross_covariance", self.cross_covariance.len(), n * n),
        ];
        for (name, found, expected) in lengths {
            if found != expected {
                return Err(err(format!(
                    "`{name}` has {found} entries, expected {expected}"
                )));
            }
        }
        if self.scenarios.is_empty() {
            return Err(err("no [[scenario]] entries"));
        }
        for (j, s) in self.scenarios.iter().enumerate() {
            if s.price.len() != n || s.state.len() != n {
                return Err(err(format!("scenario {j} does not have {n} periods")));
            }
        }
        Ok(())
    }

    /// `G` as stored, without symmetry or definiteness checks.
    pub fn g_matrix(&self) -> Matrix {
        Matrix::from_row_slice(self.periods, self.periods, &self.g)
    }

    pub fn scenario_set(&self) -> Result<ScenarioSet, IngestError> {
        let set = ScenarioSet::new(
            self.scenarios
                .iter()
                .map(|s| {
                    Scenario::new(
                        Vector::from_column_slice(&s.price),
                        Vector::from_column_slice(&s.state),
                    )
                })
                .collect(),
        )?;
        let n = self.periods;
        let checks = [
            (
                "mean_price",
                Vector::from_column_slice(&self.mean_price) - set.mean_price(),
            ),
            (
                "mean_state",
                Vector::from_column_slice(&self.mean_state) - set.mean_state(),
            ),
        ];
        for (name, diff) in checks {
            if diff.amax() > 1e-9 * set.mean_state().amax().max(1.0) {
                return Err(err(format!("`{name}` disagrees with the scenarios")));
            }
        }
        let cov = Matrix::from_row_slice(n, n, &self.cross_covariance);
        let scale = set.cross_covariance().amax().max(1.0);
        if (cov - set.cross_covariance()).amax() > 1e-9 * scale {
            return Err(err("`cross_covariance` disagrees with the scenarios"));
        }
        Ok(set)
    }

    pub fn to_model(&self) -> Result<LinearDemandModel, IngestError> {
        Ok(LinearDemandModel::new(
            self.g_matrix(),
            self.scenario_set()?,
            self.customers,
        )?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelError;

    fn model() -> LinearDemandModel {
        let set = ScenarioSet::new(vec![
            Scenario::new(
                Vector::from_column_slice(&[1.5, 2.5]),
                Vector::from_column_slice(&[11.0, 9.0]),
            ),
            Scenario::new(
                Vector::from_column_slice(&[0.5, 1.5]),
                Vector::from_column_slice(&[9.0, 7.0]),
            ),
        ])
        .unwrap();
        let g = Matrix::from_row_slice(2, 2, &[2.0, -0.5, -0.5, 1.0]);
        LinearDemandModel::new(g, set, 3).unwrap()
    }

    #[test]
    fn round_trip_is_exact() {
        let m = model();
        let file = ModelFile::from_model(&m, None);
        let text = file.to_toml().unwrap();
        let back = ModelFile::parse(&text).unwrap();
        assert_eq!(back, file);
        assert_eq!(back.to_toml().unwrap(), text);
        assert_eq!(back.to_model().unwrap(), m);
    }

    #[test]
    fn provenance_round_trips() {
        let p = Provenance {
            flat_rate: 0.172,
            elasticity: -0.3,
            alpha: 0.2,
            connection_charge: 0.52,
            kernel_scale: 12345.678,
            realized_elasticity: -0.30000000000000004,
            price_unit: "mwh".into(),
        };
        let file = ModelFile::from_model(&model(), Some(p.clone()));
        let back = ModelFile::parse(&file.to_toml().unwrap()).unwrap();
        assert_eq!(back.provenance, Some(p));
    }

    #[test]
    fn corrupted_files_rejected() {
        let file = ModelFile::from_model(&model(), None);
        let mut bad = file.clone();
        bad.g.pop();
        assert!(ModelFile::parse(&bad.to_toml().unwrap()).is_err());

        let mut bad = file.clone();
        bad.mean_state[0] += 1.0;
        assert!(bad.to_model().is_err());

        let mut bad = file.clone();
        bad.covariance_convention = "sample".into();
        assert!(ModelFile::parse(&bad.to_toml().unwrap()).is_err());

        let mut not_pd = file;
        not_pd.g = vec![1.0, 2.0, 2.0, 1.0];
        let parsed = ModelFile::parse(&not_pd.to_toml().unwrap()).unwrap();
        assert!(matches!(
            parsed.to_model(),
            Err(IngestError::Model(ModelError::NotPositiveDefinite))
        ));
    }
}
