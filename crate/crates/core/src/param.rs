//! Coordinates, basis, and conservative rows of an invertible
//! parametrization matrix.
//!
//! For an invertible Theta of size (l+1)x(l+1) with inverse B, any
//! vector decomposes as s = sum_j (theta_j . s) b_j where theta_j are
//! the rows of Theta and b_j the columns of B. The rows whose inner
//! product with the all-ones vector clears a relative tolerance form
//! the index set I(l); dividing such a row by that inner product gives
//! a conservative row (entries summing to one).

use crate::criteria::CriterionId;
use crate::energy::{invert, FamilyId};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Default relative tolerance for the trend-correlation test.
pub const DEFAULT_TOL_REL: f64 = 1e-10;

/// An analyzed parametrization matrix of one level.
#[derive(Debug, Clone)]
pub struct ParamMatrix {
    level: usize,
    theta: Matrix,
    basis: Matrix,
    trend_products: Vec<f64>,
    row_norms: Vec<f64>,
    index_set: Vec<usize>,
    near_threshold: Vec<usize>,
    family: Option<FamilyId>,
}

/// A conservative row at one level, with provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightRow {
    pub level: usize,
    pub weights: Vec<f64>,
    pub source: RowProvenance,
}

/// Which family, rows, and criterion produced a weight row.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RowProvenance {
    pub family: Option<FamilyId>,
    pub rows: Vec<usize>,
    pub criterion: Option<CriterionId>,
}

impl WeightRow {
    /// The weighted prediction `w . s`.
    pub fn apply(&self, data: &[f64]) -> Result<f64> {
        if data.len() != self.weights.len() {
            return Err(Error::DimensionMismatch { expected: self.weights.len(), got: data.len() });
        }
        Ok(self.weights.iter().zip(data).map(|(w, s)| w * s).sum())
    }

    /// Sum of the weights; one up to rounding.
    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Analyzes an invertible square matrix: inverse, trend products, and
/// the index set of rows correlated with the constant trend.
pub fn analyze(theta: Matrix, tol_rel: f64) -> Result<ParamMatrix> {
    analyze_tagged(theta, tol_rel, None)
}

/// `analyze` with a family tag recorded for provenance.
pub fn analyze_tagged(
    theta: Matrix,
    tol_rel: f64,
    family: Option<FamilyId>,
) -> Result<ParamMatrix> {
    if !theta.is_square() {
        return Err(Error::NotSquare { rows: theta.rows(), cols: theta.cols() });
    }
    let level = theta.rows() - 1;
    let basis = invert(&theta)?;

    let dim = theta.rows();
    let mut trend_products: Vec<f64> = Vec::with_capacity(dim);
    let mut row_norms: Vec<f64> = Vec::with_capacity(dim);
    for j in 0..dim {
        let row = theta.row(j);
        trend_products.push(row.iter().sum());
        row_norms.push(row.iter().map(|v| v * v).sum::<f64>().sqrt());
    }

    let scale = (dim as f64).sqrt();
    let mut index_set = Vec::new();
    let mut near_threshold = Vec::new();
    for j in 0..dim {
        let threshold = tol_rel * scale * row_norms[j];
        let magnitude = trend_products[j].abs();
        if magnitude > threshold {
            index_set.push(j);
        }
        // rows within a decade of the cut, on either side
        if magnitude > threshold / 10.0 && magnitude <= threshold * 10.0 {
            near_threshold.push(j);
        }
    }
    if index_set.is_empty() {
        return Err(Error::EmptyIndexSet { level });
    }

    Ok(ParamMatrix {
        level,
        theta,
        basis,
        trend_products,
        row_norms,
        index_set,
        near_threshold,
        family,
    })
}

impl ParamMatrix {
    /// The level l (dimension minus one).
    pub fn level(&self) -> usize {
        self.level
    }

    /// Dimension l + 1.
    pub fn dim(&self) -> usize {
        self.level + 1
    }

    pub fn theta(&self) -> &Matrix {
        &self.theta
    }

    /// The inverse matrix whose columns form the basis.
    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    /// Inner products theta_j . 1 for every row.
    pub fn trend_products(&self) -> &[f64] {
        &self.trend_products
    }

    /// Euclidean norms of the rows.
    pub fn row_norms(&self) -> &[f64] {
        &self.row_norms
    }

    /// Sorted indices of the rows correlated with the constant trend.
    pub fn index_set(&self) -> &[usize] {
        &self.index_set
    }

    /// Rows whose trend product sits within a decade of the tolerance
    /// cut; reported so borderline classifications are visible.
    pub fn near_threshold(&self) -> &[usize] {
        &self.near_threshold
    }

    pub fn family(&self) -> Option<FamilyId> {
        self.family
    }

    /// Entries of row j divided by its trend product, without the
    /// index-set membership check.
    pub(crate) fn normalized_row_unchecked(&self, j: usize) -> Vec<f64> {
        let t = self.trend_products[j];
        self.theta.row(j).iter().map(|v| v / t).collect()
    }

    /// The conservative row theta_j / (theta_j . 1) for j in I(l).
    pub fn conservative_row(&self, j: usize) -> Result<WeightRow> {
        if !self.index_set.contains(&j) {
            return Err(Error::NotCorrelated { j, level: self.level });
        }
        Ok(WeightRow {
            level: self.level,
            weights: self.normalized_row_unchecked(j),
            source: RowProvenance { family: self.family, rows: vec![j], criterion: None },
        })
    }

    /// How far the trend-correlated coordinates are from reproducing
    /// the constant one: max over i of
    /// |sum_{j in I(l)} (theta_j . 1) b_ij - 1|. Exactly zero in exact
    /// arithmetic because the excluded rows contribute nothing to the
    /// expansion of the all-ones vector.
    pub fn constant_reproduction_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim() {
            let total: f64 = self
                .index_set
                .iter()
                .map(|&j| self.trend_products[j] * self.basis[(i, j)])
                .sum();
            worst = worst.max((total - 1.0).abs());
        }
        worst
    }

    /// Reassembles s from its coordinates: sum_j (theta_j . s) b_j.
    pub fn reconstruct(&self, s: &[f64]) -> Result<Vec<f64>> {
        if s.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: s.len() });
        }
        let coords = self.theta.mul_vec(s);
        Ok(self.basis.mul_vec(&coords))
    }

    /// Splits s(i) into the component carried by I(l) and the rest.
    pub fn decompose(&self, s: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        if s.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: s.len() });
        }
        let coords = self.theta.mul_vec(s);
        let mut bulk = vec![0.0; self.dim()];
        let mut residual = vec![0.0; self.dim()];
        let in_set: Vec<bool> = {
            let mut mask = vec![false; self.dim()];
            for &j in &self.index_set {
                mask[j] = true;
            }
            mask
        };
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let contribution = coords[j] * self.basis[(i, j)];
                if in_set[j] {
                    bulk[i] += contribution;
                } else {
                    residual[i] += contribution;
                }
            }
        }
        Ok((bulk, residual))
    }
}
