//! Game and matrix files.

use std::fs;
use std::path::Path;

use cournot_core::{GameParams, ModelError, QuantityMatrix, QuantityVector};
use serde::Deserialize;

use crate::Failure;

/// `{"A": .., "costs": [..], "init": [..]?, "names": [..]?}`
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSpecFile {
    #[serde(rename = "A")]
    pub capacity: f64,
    pub costs: Vec<f64>,
    #[serde(default)]
    pub init: Option<Vec<f64>>,
    #[serde(default)]
    pub names: Option<Vec<String>>,
}

/// `{"rows": [[..], ..]}` in the caller's firm order.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub rows: Vec<Vec<f64>>,
}

/// A validated game file.
#[derive(Debug, Clone)]
pub struct Game {
    pub params: GameParams,
    /// Start vector in sorted order.
    pub init: Option<QuantityVector>,
    pub names: Option<Vec<String>>,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Malformed(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Malformed(format!("{}: {e}", path.display())))
}

impl GameSpecFile {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        read_json(path)
    }

    pub fn into_game(self) -> Result<Game, Failure> {
        let params = GameParams::new(self.capacity, self.costs)?;
        if let Some(names) = &self.names {
            check_len(params.n(), names.len())?;
        }
        let init = match self.init {
            Some(values) => {
                check_len(params.n(), values.len())?;
                Some(QuantityVector::new(params.from_user_order(&values))?)
            }
            None => None,
        };
        Ok(Game {
            params,
            init,
            names: self.names,
        })
    }
}

fn check_len(expected: usize, found: usize) -> Result<(), Failure> {
    if expected == found {
        Ok(())
    } else {
        Err(ModelError::DimensionMismatch { expected, found }.into())
    }
}

pub fn load_game(path: &Path) -> Result<Game, Failure> {
    GameSpecFile::load(path)?.into_game()
}

pub fn load_matrix(path: &Path, params: &GameParams) -> Result<QuantityMatrix, Failure> {
    let file: MatrixFile = read_json(path)?;
    for row in &file.rows {
        check_len(params.n(), row.len())?;
    }
    Ok(QuantityMatrix::from_user_rows(params, &file.rows)?)
}
