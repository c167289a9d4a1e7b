//! JSON file formats: the model/portfolio input consumed by most CLI
//! commands, and the two-market input consumed by `aggregate`.
//!
//! Model schema (numbers decimal, matrices row-major):
//! ```json
//! {
//!   "dimension": 2,
//!   "components": [
//!     { "weight": 0.3, "mean": [0.0, 0.0], "scale": [[1.0, 0.2], [0.2, 1.0]],
//!       "generator": { "type": "student-t", "nu": 4.0 } }
//!   ],
//!   "portfolio": { "delta": [1.0, -0.5], "theta": 0.0, "horizon": 0.0 }
//! }
//! ```
//! `theta` and `horizon` default to 0. Generator types: `student-t` (with
//! `nu`) and `normal`. Unknown fields are rejected so typos fail loudly.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    EllipticComponent, GeneratorKind, Matrix, MixtureModel, Portfolio, ValidatedModel,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub dimension: usize,
    pub components: Vec<ComponentFile>,
    pub portfolio: PortfolioFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentFile {
    pub weight: f64,
    pub mean: Vec<f64>,
    /// Row-major dispersion matrix exactly as it appears in the density.
    pub scale: Vec<Vec<f64>>,
    pub generator: GeneratorFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GeneratorFile {
    StudentT { nu: f64 },
    Normal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PortfolioFile {
    pub delta: Vec<f64>,
    #[serde(default)]
    pub theta: f64,
    #[serde(default)]
    pub horizon: f64,
}

/// Two-market aggregation input: one common-generator mixture shared by both
/// markets (zero means), per-market deltas and scale blocks, and the
/// cross-scale block Σ₁₂ (n₁ × n₂, row-major).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AggregateFile {
    pub components: Vec<AggregateComponentFile>,
    pub market1: MarketFile,
    pub market2: MarketFile,
    pub cross_scale: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AggregateComponentFile {
    pub weight: f64,
    pub generator: GeneratorFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketFile {
    pub delta: Vec<f64>,
    pub scale: Vec<Vec<f64>>,
}

impl From<&GeneratorFile> for GeneratorKind<f64> {
    fn from(g: &GeneratorFile) -> Self {
        match g {
            GeneratorFile::StudentT { nu } => GeneratorKind::StudentT { nu: *nu },
            GeneratorFile::Normal => GeneratorKind::Normal,
        }
    }
}

impl ModelFile {
    /// Build and validate the in-memory model plus portfolio.
    pub fn to_model(&self) -> Result<(ValidatedModel<f64>, Portfolio<f64>)> {
        let components = self
            .components
            .iter()
            .map(|c| {
                Ok(EllipticComponent {
                    weight: c.weight,
                    mean: c.mean.clone(),
                    scale: Matrix::from_rows(&c.scale)?,
                    generator: (&c.generator).into(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let model = MixtureModel { components, dimension: self.dimension }.validate()?;
        let portfolio = Portfolio::with_theta(
            self.portfolio.delta.clone(),
            self.portfolio.theta,
            self.portfolio.horizon,
        )?;
        if portfolio.delta.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                message: format!(
                    "portfolio delta length {} does not match dimension {}",
                    portfolio.delta.len(),
                    self.dimension
                ),
            });
        }
        Ok((model, portfolio))
    }

    /// Inverse of [`ModelFile::to_model`], for round-trip serialization.
    /// Custom radial generators have no file representation.
    pub fn from_model(model: &ValidatedModel<f64>, p: &Portfolio<f64>) -> Result<Self> {
        let components = model
            .components()
            .iter()
            .map(|c| {
                let generator = match &c.generator {
                    GeneratorKind::StudentT { nu } => GeneratorFile::StudentT { nu: *nu },
                    GeneratorKind::Normal => GeneratorFile::Normal,
                    GeneratorKind::Custom { .. } => {
                        return Err(Error::Unsupported(
                            "custom radial generators have no file representation".into(),
                        ))
                    }
                };
                let n = c.scale.dim();
                let scale = (0..n)
                    .map(|i| (0..n).map(|j| c.scale.get(i, j)).collect())
                    .collect();
                Ok(ComponentFile { weight: c.weight, mean: c.mean.clone(), scale, generator })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ModelFile {
            dimension: model.dimension(),
            components,
            portfolio: PortfolioFile {
                delta: p.delta.clone(),
                theta: p.theta,
                horizon: p.horizon,
            },
        })
    }
}

/// Parse and validate a model file from JSON text.
pub fn parse_model(json: &str) -> Result<(ValidatedModel<f64>, Portfolio<f64>)> {
    let file: ModelFile =
        serde_json::from_str(json).map_err(|e| Error::Parse(format!("model file: {e}")))?;
    file.to_model()
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Read, parse, and validate a model file from disk.
pub fn load_model(path: &Path) -> Result<(ValidatedModel<f64>, Portfolio<f64>)> {
    parse_model(&read_file(path)?)
}

/// Parse the two-market aggregation input from JSON text.
pub fn parse_aggregate(json: &str) -> Result<AggregateFile> {
    serde_json::from_str(json).map_err(|e| Error::Parse(format!("aggregate file: {e}")))
}

/// Read and parse the two-market aggregation input from disk.
pub fn load_aggregate(path: &Path) -> Result<AggregateFile> {
    parse_aggregate(&read_file(path)?)
}

/// Serialize a model back to pretty JSON.
pub fn model_to_json(model: &ValidatedModel<f64>, p: &Portfolio<f64>) -> Result<String> {
    let file = ModelFile::from_model(model, p)?;
    serde_json::to_string_pretty(&file).map_err(|e| Error::Parse(format!("serialize: {e}")))
}
