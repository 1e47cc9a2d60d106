//! JSON equation files: `{"rhs": "...", "params": {...}, "sample_box": [lo, hi]}`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ast::Expression;
use super::parser::{parse, parse_decimal, ParseError, Params};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquationFile {
    pub rhs: String,
    #[serde(default)]
    pub params: BTreeMap<String, serde_json::Number>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_box: Option<[f64; 2]>,
}

#[derive(Debug, Error)]
pub enum FileError {
    #[error("file not found: {0}")]
    NotFound(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed equation file: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

impl EquationFile {
    pub fn from_json(text: &str) -> Result<Self, FileError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, FileError> {
        let text = std::fs::read_to_string(path).map_err(|source| {
            if source.kind() == std::io::ErrorKind::NotFound {
                FileError::NotFound(path.display().to_string())
            } else {
                FileError::Io {
                    path: path.display().to_string(),
                    source,
                }
            }
        })?;
        Self::from_json(&text)
    }

    /// Parameter values read exactly from their JSON text.
    pub fn exact_params(&self) -> Result<Params, ParseError> {
        self.params
            .iter()
            .map(|(name, value)| {
                let text = value.to_string();
                parse_decimal(&text)
                    .map(|v| (name.clone(), v))
                    .ok_or_else(|| ParseError::InvalidParam {
                        name: name.clone(),
                        reason: format!("`{text}` is not a finite decimal"),
                    })
            })
            .collect()
    }

    pub fn expression(&self) -> Result<Expression, ParseError> {
        parse(&self.rhs, &self.exact_params()?)
    }
}
