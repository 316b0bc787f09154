//! JSON documents describing metric Lie algebras on the command line.
//!
//! A document lists a bracket table over a basis `e_1 … e_dim` (1-based,
//! only `i < j` entries; antisymmetry fills in the rest), an optional Gram
//! matrix (identity when absent), an optional derivation matrix, and
//! free-form metadata. The wire format is JSON with exactly these field
//! names; rendering and parsing round-trip losslessly.
//!
//! When `derivation` is present the document denotes the rank-one
//! extension of the listed algebra by that derivation: the extending
//! direction becomes a final basis vector of unit length orthogonal to
//! the original span, so the effective algebra has dimension `dim + 1`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::algebra::{LieAlgebra, MetricAlgebra, MAX_DIM};
use crate::error::{CurvlieError, Result};
use crate::extension;
use crate::tol::Tolerances;

/// One bracket-table entry `(i, j, coefficients)` meaning
/// `[e_i, e_j] = Σ_k coefficients[k] · e_k`, with 1-based `i < j`.
pub type BracketEntry = (usize, usize, Vec<f64>);

/// A metric Lie algebra (optionally with a distinguished derivation) in
/// its file form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgebraDocument {
    /// Dimension of the bracket table's basis.
    pub dim: usize,
    /// Nonzero brackets, `i < j`, 1-based indices.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub brackets: Vec<BracketEntry>,
    /// Gram matrix of the inner product on `e_1 … e_dim` (rows); identity
    /// when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<Vec<Vec<f64>>>,
    /// A derivation of the listed algebra (rows); its presence turns the
    /// document into the rank-one extension by this map.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derivation: Option<Vec<Vec<f64>>>,
    /// Free-form name/notes; carried through verbatim.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<serde_json::Value>,
}

/// Converts a row-major nested array into a square matrix of the given
/// dimension, rejecting ragged rows and non-finite entries.
pub fn matrix_from_rows(rows: &[Vec<f64>], dim: usize, what: &str) -> Result<DMatrix<f64>> {
    if rows.len() != dim {
        return Err(CurvlieError::Input(format!(
            "{what} has {} rows, expected {dim}",
            rows.len()
        )));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != dim {
            return Err(CurvlieError::Input(format!(
                "{what} row {} has {} entries, expected {dim}",
                i + 1,
                row.len()
            )));
        }
        if let Some(bad) = row.iter().find(|v| !v.is_finite()) {
            return Err(CurvlieError::Input(format!(
                "{what} row {} contains a non-finite value {bad}",
                i + 1
            )));
        }
    }
    Ok(DMatrix::from_fn(dim, dim, |i, j| rows[i][j]))
}

/// Renders a matrix as the row-major nested array used in documents.
pub fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

impl AlgebraDocument {
    /// Parses and structurally validates a document from JSON text.
    pub fn parse(text: &str) -> Result<AlgebraDocument> {
        let doc: AlgebraDocument = serde_json::from_str(text)
            .map_err(|e| CurvlieError::Input(format!("document does not parse: {e}")))?;
        doc.validate()?;
        Ok(doc)
    }

    /// Renders the document as pretty-printed JSON (with sorted metadata
    /// keys, so output is deterministic). Fails only on an invalid
    /// document.
    pub fn render(&self) -> Result<String> {
        self.validate()?;
        let mut text = serde_json::to_string_pretty(self)
            .map_err(|e| CurvlieError::Internal(format!("document serialization: {e}")))?;
        text.push('\n');
        Ok(text)
    }

    /// Structural validation: index ranges, entry shapes, finiteness.
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.dim > MAX_DIM {
            return Err(CurvlieError::Input(format!(
                "dimension {} outside supported range 1..={MAX_DIM}",
                self.dim
            )));
        }
        let dim = self.dim;
        let mut seen = vec![false; dim * dim];
        for (i, j, coeffs) in &self.brackets {
            if *i < 1 || *j < 1 || *i > dim || *j > dim {
                return Err(CurvlieError::Input(format!(
                    "bracket index ({i},{j}) outside 1..={dim}"
                )));
            }
            if i >= j {
                return Err(CurvlieError::Input(format!(
                    "bracket entries must have i < j, got ({i},{j})"
                )));
            }
            if coeffs.len() != dim {
                return Err(CurvlieError::Input(format!(
                    "coefficient vector for ({i},{j}) has length {}, expected {dim}",
                    coeffs.len()
                )));
            }
            if let Some(bad) = coeffs.iter().find(|v| !v.is_finite()) {
                return Err(CurvlieError::Input(format!(
                    "coefficient vector for ({i},{j}) contains a non-finite value {bad}"
                )));
            }
            let slot = (i - 1) * dim + (j - 1);
            if seen[slot] {
                return Err(CurvlieError::Input(format!(
                    "duplicate bracket entry for ({i},{j})"
                )));
            }
            seen[slot] = true;
        }
        if let Some(rows) = &self.metric {
            matrix_from_rows(rows, dim, "metric")?;
        }
        if let Some(rows) = &self.derivation {
            matrix_from_rows(rows, dim, "derivation")?;
        }
        Ok(())
    }

    /// The Lie algebra of the bracket table alone (no metric, no
    /// extension).
    pub fn algebra(&self) -> Result<LieAlgebra> {
        self.validate()?;
        let entries: Vec<(usize, usize, Vec<f64>)> = self
            .brackets
            .iter()
            .map(|(i, j, c)| (i - 1, j - 1, c.clone()))
            .collect();
        LieAlgebra::from_brackets(self.dim, &entries)
    }

    /// The metric algebra the document denotes: the bracket table with
    /// its metric, extended by the derivation when one is present (the
    /// extending direction is a unit vector orthogonal to the original
    /// basis).
    pub fn effective(&self, tols: &Tolerances) -> Result<MetricAlgebra> {
        let base = self.algebra()?;
        let dim = self.dim;
        match &self.derivation {
            None => match &self.metric {
                None => Ok(MetricAlgebra::standard(base)),
                Some(rows) => {
                    let gram = matrix_from_rows(rows, dim, "metric")?;
                    MetricAlgebra::new(base, gram, tols.tol_struct)
                }
            },
            Some(rows) => {
                let d = matrix_from_rows(rows, dim, "derivation")?;
                let ext = extension::expand(&base, &d, tols)?;
                match &self.metric {
                    None => Ok(MetricAlgebra::standard(ext.total)),
                    Some(mrows) => {
                        let gram_nil = matrix_from_rows(mrows, dim, "metric")?;
                        let mut gram = DMatrix::identity(dim + 1, dim + 1);
                        gram.view_mut((0, 0), (dim, dim)).copy_from(&gram_nil);
                        MetricAlgebra::new(ext.total, gram, tols.tol_struct)
                    }
                }
            }
        }
    }

    /// A document for a plain algebra: its nonzero brackets, no metric,
    /// no derivation.
    pub fn from_algebra(alg: &LieAlgebra) -> AlgebraDocument {
        let n = alg.dim();
        let mut brackets = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let v = alg.bracket_basis(i, j);
                if v.iter().any(|x| *x != 0.0) {
                    brackets.push((i + 1, j + 1, v.iter().copied().collect()));
                }
            }
        }
        AlgebraDocument {
            dim: n,
            brackets,
            metric: None,
            derivation: None,
            meta: None,
        }
    }

    /// A document for the rank-one extension of `nil` by `d`.
    pub fn from_expansion(nil: &LieAlgebra, d: &DMatrix<f64>) -> AlgebraDocument {
        let mut doc = AlgebraDocument::from_algebra(nil);
        doc.derivation = Some(matrix_to_rows(d));
        doc
    }
}
