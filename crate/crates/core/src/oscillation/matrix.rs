use crate::model::{self, GameParams, ModelError};
use crate::scalar::{Exact, Scalar};

/// `t x n` matrix whose rows are meant to map cyclically onto each other
/// under the update: row `r` is followed by row `(r + 1) % t`. Firms are in
/// ascending cost order.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantityMatrix<S = f64> {
    rows: Vec<Vec<S>>,
}

impl<S: Scalar> QuantityMatrix<S> {
    pub fn new(rows: Vec<Vec<S>>) -> Result<Self, ModelError> {
        let width = rows.first().map(Vec::len).ok_or(ModelError::EmptyMatrix)?;
        for row in &rows {
            if row.len() != width {
                return Err(ModelError::DimensionMismatch {
                    expected: width,
                    found: row.len(),
                });
            }
            for (firm, v) in row.iter().enumerate() {
                if !v.is_finite() || *v < S::zero() {
                    return Err(ModelError::InvalidQuantity {
                        firm,
                        value: v.to_f64(),
                    });
                }
            }
        }
        let rows = rows
            .into_iter()
            .map(|r| {
                r.into_iter()
                    .map(|v| if v == S::zero() { S::zero() } else { v })
                    .collect()
            })
            .collect();
        Ok(QuantityMatrix { rows })
    }

    /// Rows given in the caller's firm order.
    pub fn from_user_rows(params: &GameParams<S>, rows: &[Vec<S>]) -> Result<Self, ModelError> {
        for row in rows {
            if row.len() != params.n() {
                return Err(ModelError::DimensionMismatch {
                    expected: params.n(),
                    found: row.len(),
                });
            }
        }
        Self::new(rows.iter().map(|r| params.from_user_order(r)).collect())
    }

    pub fn period(&self) -> usize {
        self.rows.len()
    }

    pub fn n_firms(&self) -> usize {
        self.rows[0].len()
    }

    pub fn rows(&self) -> &[Vec<S>] {
        &self.rows
    }

    pub fn row(&self, r: usize) -> &[S] {
        &self.rows[r]
    }

    pub fn user_rows(&self, params: &GameParams<S>) -> Vec<Vec<S>> {
        self.rows.iter().map(|r| params.to_user_order(r)).collect()
    }

    pub fn convert<T: Scalar>(&self) -> QuantityMatrix<T> {
        QuantityMatrix {
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(|v| T::from_f64(v.to_f64())).collect())
                .collect(),
        }
    }

    pub fn to_f64(&self) -> QuantityMatrix<f64> {
        self.convert()
    }

    /// Rows in reverse phase, i.e. starting from the other row of a 2-cycle.
    pub fn rotated(&self) -> Self {
        let mut rows = self.rows.clone();
        rows.rotate_left(1);
        QuantityMatrix { rows }
    }
}

impl QuantityMatrix<f64> {
    pub fn exact(&self) -> QuantityMatrix<Exact> {
        self.convert()
    }
}

/// Zero-based position in a matrix; `firm` is in ascending cost order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cell {
    pub row: usize,
    pub firm: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport<S = f64> {
    pub valid: bool,
    pub max_residual: S,
    /// Cell holding `max_residual` (the first such cell).
    pub worst: Cell,
    /// `residuals[r][j] = |best response of firm j to row r-1  -  M[r][j]|`.
    pub residuals: Vec<Vec<S>>,
}

/// Checks that each row is the simultaneous best response to the previous
/// one (cyclically) within `tol`.
pub fn verify_quantity_matrix<S: Scalar>(
    params: &GameParams<S>,
    matrix: &QuantityMatrix<S>,
    tol: f64,
) -> Result<VerifyReport<S>, ModelError> {
    if matrix.n_firms() != params.n() {
        return Err(ModelError::DimensionMismatch {
            expected: params.n(),
            found: matrix.n_firms(),
        });
    }
    let t = matrix.period();
    let mut residuals = Vec::with_capacity(t);
    let mut max_residual = S::zero();
    let mut worst = Cell { row: 0, firm: 0 };
    for r in 0..t {
        let prev = &matrix.rows[(r + t - 1) % t];
        let response = model::step_values(params, prev);
        let row: Vec<S> = response
            .into_iter()
            .zip(&matrix.rows[r])
            .map(|(b, m)| (b - m.clone()).abs())
            .collect();
        for (firm, d) in row.iter().enumerate() {
            if *d > max_residual {
                max_residual = d.clone();
                worst = Cell { row: r, firm };
            }
        }
        residuals.push(row);
    }
    let valid = max_residual <= S::from_f64(tol);
    Ok(VerifyReport {
        valid,
        max_residual,
        worst,
        residuals,
    })
}
