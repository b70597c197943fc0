use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::model::{JointTable, Outcome, Setting};

/// Cells must be nonnegative and sum to one within this tolerance.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Finite table `p(A,B | a_i, b_j)` over chosen setting lists.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBehavior")]
pub struct Behavior {
    settings_a: Vec<Setting>,
    settings_b: Vec<Setting>,
    cells: Vec<Vec<JointTable>>,
}

#[derive(Deserialize)]
struct RawBehavior {
    settings_a: Vec<Setting>,
    settings_b: Vec<Setting>,
    cells: Vec<Vec<JointTable>>,
}

impl TryFrom<RawBehavior> for Behavior {
    type Error = crate::error::Error;

    fn try_from(raw: RawBehavior) -> Result<Self> {
        Behavior::new(raw.settings_a, raw.settings_b, raw.cells)
    }
}

impl Behavior {
    pub fn new(settings_a: Vec<Setting>, settings_b: Vec<Setting>, cells: Vec<Vec<JointTable>>) -> Result<Self> {
        if settings_a.is_empty() || settings_b.is_empty() {
            return Err(invalid("behavior needs at least one setting per wing"));
        }
        if cells.len() != settings_a.len() || cells.iter().any(|row| row.len() != settings_b.len()) {
            return Err(invalid(format!(
                "cells must be a {}x{} table",
                settings_a.len(),
                settings_b.len()
            )));
        }
        for (i, row) in cells.iter().enumerate() {
            for (j, cell) in row.iter().enumerate() {
                if !cell.is_normalized(NORMALIZATION_TOL) {
                    return Err(invalid(format!("cell ({i}, {j}) = {:?} is not a distribution", cell.0)));
                }
            }
        }
        Ok(Behavior { settings_a, settings_b, cells })
    }

    /// Builds every cell from a function of the setting indices.
    pub fn from_fn(
        settings_a: Vec<Setting>,
        settings_b: Vec<Setting>,
        mut cell: impl FnMut(usize, usize) -> JointTable,
    ) -> Result<Self> {
        let cells = (0..settings_a.len())
            .map(|i| (0..settings_b.len()).map(|j| cell(i, j)).collect())
            .collect();
        Behavior::new(settings_a, settings_b, cells)
    }

    pub fn settings_a(&self) -> &[Setting] {
        &self.settings_a
    }

    pub fn settings_b(&self) -> &[Setting] {
        &self.settings_b
    }

    pub fn cells(&self) -> &[Vec<JointTable>] {
        &self.cells
    }

    pub fn cell(&self, i: usize, j: usize) -> &JointTable {
        &self.cells[i][j]
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.settings_a.len(), self.settings_b.len())
    }

    pub fn correlator(&self, i: usize, j: usize) -> f64 {
        self.cells[i][j].correlator()
    }

    /// `p(A = +)` at wing A computed from cell `(i, j)`.
    pub fn marginal_a_plus(&self, i: usize, j: usize) -> f64 {
        self.cells[i][j].marginal_a(Outcome::Plus)
    }

    pub fn marginal_b_plus(&self, i: usize, j: usize) -> f64 {
        self.cells[i][j].marginal_b(Outcome::Plus)
    }
}
