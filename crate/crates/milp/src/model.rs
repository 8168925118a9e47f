//! Solver-agnostic description of a mixed-integer linear program.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::ModelError;

/// Index of a column in a [`LinearModel`].
pub type ColumnId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Continuous,
    Integer,
    /// Integer column with bounds fixed to `[0, 1]`.
    Binary,
}

impl ColumnKind {
    pub fn is_integer(self) -> bool {
        !matches!(self, ColumnKind::Continuous)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub kind: ColumnKind,
    pub objective: f64,
    /// Branch-and-bound branches on fractional columns of the highest
    /// priority first. Zero for every column gives plain most-fractional
    /// branching.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub branch_priority: i32,
}

fn is_zero(p: &i32) -> bool {
    *p == 0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub name: String,
    pub terms: Vec<(ColumnId, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Row {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(j, a)| a * values[j]).sum()
    }

    /// Amount by which `values` violate this row (zero when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.activity(values);
        match self.relation {
            Relation::Le => (lhs - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - lhs).max(0.0),
            Relation::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// A minimization problem `min c·x + offset` over linear rows and column bounds.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    columns: Vec<Column>,
    rows: Vec<Row>,
    objective_offset: f64,
}

/// A single failed check reported by [`LinearModel::check_solution`].
#[derive(Debug, Clone, PartialEq)]
pub enum Infeasibility {
    Row { row: usize, name: String, violation: f64 },
    Bound { column: ColumnId, name: String, violation: f64 },
    Integrality { column: ColumnId, name: String, value: f64 },
}

impl LinearModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_column(
        &mut self,
        name: impl Into<String>,
        lower: f64,
        upper: f64,
        kind: ColumnKind,
        objective: f64,
    ) -> ColumnId {
        let (lower, upper) = match kind {
            ColumnKind::Binary => (0.0, 1.0),
            _ => (lower, upper),
        };
        self.columns.push(Column {
            name: name.into(),
            lower,
            upper,
            kind,
            objective,
            branch_priority: 0,
        });
        self.columns.len() - 1
    }

    pub fn continuous(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> ColumnId {
        self.add_column(name, lower, upper, ColumnKind::Continuous, 0.0)
    }

    pub fn integer(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> ColumnId {
        self.add_column(name, lower, upper, ColumnKind::Integer, 0.0)
    }

    pub fn binary(&mut self, name: impl Into<String>) -> ColumnId {
        self.add_column(name, 0.0, 1.0, ColumnKind::Binary, 0.0)
    }

    /// Appends a row. Terms on the same column are merged and zero
    /// coefficients dropped, so the stored row is canonical.
    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        terms: impl IntoIterator<Item = (ColumnId, f64)>,
        relation: Relation,
        rhs: f64,
    ) -> usize {
        let mut terms: Vec<(ColumnId, f64)> = terms.into_iter().collect();
        terms.sort_by_key(|&(j, _)| j);
        let mut merged: Vec<(ColumnId, f64)> = Vec::with_capacity(terms.len());
        for (j, a) in terms {
            match merged.last_mut() {
                Some(last) if last.0 == j => last.1 += a,
                _ => merged.push((j, a)),
            }
        }
        merged.retain(|&(_, a)| a != 0.0);
        self.rows.push(Row {
            name: name.into(),
            terms: merged,
            relation,
            rhs,
        });
        self.rows.len() - 1
    }

    pub fn set_objective(&mut self, column: ColumnId, coefficient: f64) {
        self.columns[column].objective = coefficient;
    }

    pub fn add_objective(&mut self, column: ColumnId, coefficient: f64) {
        self.columns[column].objective += coefficient;
    }

    pub fn set_bounds(&mut self, column: ColumnId, lower: f64, upper: f64) {
        self.columns[column].lower = lower;
        self.columns[column].upper = upper;
    }

    pub fn set_objective_offset(&mut self, offset: f64) {
        self.objective_offset = offset;
    }

    pub fn objective_offset(&self) -> f64 {
        self.objective_offset
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn set_branch_priority(&mut self, id: ColumnId, priority: i32) {
        self.columns[id].branch_priority = priority;
    }

    pub fn column(&self, id: ColumnId) -> &Column {
        &self.columns[id]
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn num_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_integer(&self) -> usize {
        self.columns.iter().filter(|c| c.kind.is_integer()).count()
    }

    pub fn integer_columns(&self) -> impl Iterator<Item = ColumnId> + '_ {
        self.columns
            .iter()
            .enumerate()
            .filter(|(_, c)| c.kind.is_integer())
            .map(|(j, _)| j)
    }

    /// Same model with every integrality mark dropped.
    pub fn relaxed(&self) -> LinearModel {
        let mut out = self.clone();
        for c in &mut out.columns {
            c.kind = ColumnKind::Continuous;
        }
        out
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.columns
            .iter()
            .zip(values)
            .map(|(c, v)| c.objective * v)
            .sum::<f64>()
            + self.objective_offset
    }

    /// Structural sanity: rows reference existing columns, bounds are ordered,
    /// coefficients are finite and binaries stay within `[0, 1]`.
    pub fn validate(&self) -> Result<(), ModelError> {
        for (j, c) in self.columns.iter().enumerate() {
            if c.lower.is_nan() || c.upper.is_nan() || c.lower > c.upper {
                return Err(ModelError::BadBounds {
                    column: j,
                    lower: c.lower,
                    upper: c.upper,
                });
            }
            if c.lower == f64::INFINITY || c.upper == f64::NEG_INFINITY {
                return Err(ModelError::BadBounds {
                    column: j,
                    lower: c.lower,
                    upper: c.upper,
                });
            }
            if !c.objective.is_finite() {
                return Err(ModelError::NonFinite {
                    what: format!("objective coefficient of column {j}"),
                });
            }
            if c.kind == ColumnKind::Binary && (c.lower < 0.0 || c.upper > 1.0) {
                return Err(ModelError::BadBounds {
                    column: j,
                    lower: c.lower,
                    upper: c.upper,
                });
            }
        }
        for (i, r) in self.rows.iter().enumerate() {
            if !r.rhs.is_finite() {
                return Err(ModelError::NonFinite {
                    what: format!("rhs of row {i}"),
                });
            }
            for &(j, a) in &r.terms {
                if j >= self.columns.len() {
                    return Err(ModelError::UnknownColumn { row: i, column: j });
                }
                if !a.is_finite() {
                    return Err(ModelError::NonFinite {
                        what: format!("coefficient of column {j} in row {i}"),
                    });
                }
            }
        }
        Ok(())
    }

    /// Independent row-by-row re-check of an assignment.
    pub fn check_solution(&self, values: &[f64], tolerance: f64) -> Vec<Infeasibility> {
        let mut out = Vec::new();
        for (j, c) in self.columns.iter().enumerate() {
            let v = values[j];
            let below = c.lower - v;
            let above = v - c.upper;
            if below > tolerance || above > tolerance {
                out.push(Infeasibility::Bound {
                    column: j,
                    name: c.name.clone(),
                    violation: below.max(above),
                });
            }
            if c.kind.is_integer() && (v - v.round()).abs() > tolerance {
                out.push(Infeasibility::Integrality {
                    column: j,
                    name: c.name.clone(),
                    value: v,
                });
            }
        }
        for (i, r) in self.rows.iter().enumerate() {
            let violation = r.violation(values);
            if violation > tolerance {
                out.push(Infeasibility::Row {
                    row: i,
                    name: r.name.clone(),
                    violation,
                });
            }
        }
        out
    }
}
