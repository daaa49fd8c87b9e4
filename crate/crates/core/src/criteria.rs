//! Selection criteria: rules that pick one conservative row per level
//! from an analyzed parametrization.
//!
//! Eight families are implemented. Four are data-free (they look only
//! at the matrix): the plain index pick, the index-set mean, the two
//! tail scores, the trend-correlation maximizer and the
//! nearest-to-uniform rows. Two consume the observed data prefix: the
//! variance ordering and the fixed-distance ordering. Argmax/argmin
//! sets are resolved with a small relative tie tolerance and tied rows
//! are averaged; the two data-driven orderings instead break ties by
//! the smallest row index, as sequential "first element" picks.

use crate::error::{Error, Result};
use crate::param::{ParamMatrix, RowProvenance, WeightRow};

/// Relative tolerance under which two scores count as tied.
pub(crate) const TIE_TOL: f64 = 1e-9;

/// Exponent/norm selector shared by the prediction cost and the
/// nearest-to-uniform criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Q {
    One,
    Two,
    Inf,
}

impl Q {
    pub const ALL: [Q; 3] = [Q::One, Q::Two, Q::Inf];

    pub fn label(self) -> &'static str {
        match self {
            Q::One => "1",
            Q::Two => "2",
            Q::Inf => "inf",
        }
    }

    pub fn parse(text: &str) -> Option<Q> {
        match text.trim() {
            "1" => Some(Q::One),
            "2" => Some(Q::Two),
            "inf" | "Inf" | "INF" | "+inf" | "infinity" => Some(Q::Inf),
            _ => None,
        }
    }
}

impl std::fmt::Display for Q {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// A criterion family together with its hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CriterionId {
    U { u: usize },
    Mean,
    Tail1 { u: usize },
    Tail2 { u: usize },
    MaxCor,
    NearUniform { q1: Q },
    Var { u: usize },
    Fd { u: usize, v: usize },
}

impl CriterionId {
    pub fn kind_name(&self) -> &'static str {
        match self {
            CriterionId::U { .. } => "S_u",
            CriterionId::Mean => "S_mean",
            CriterionId::Tail1 { .. } => "S_tail1",
            CriterionId::Tail2 { .. } => "S_tail2",
            CriterionId::MaxCor => "S_maxcor",
            CriterionId::NearUniform { .. } => "S_nearU",
            CriterionId::Var { .. } => "S_var",
            CriterionId::Fd { .. } => "S_fd",
        }
    }
}

impl std::fmt::Display for CriterionId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CriterionId::U { u } => write!(f, "S_u(u={u})"),
            CriterionId::Mean => write!(f, "S_mean"),
            CriterionId::Tail1 { u } => write!(f, "S_tail1(u={u})"),
            CriterionId::Tail2 { u } => write!(f, "S_tail2(u={u})"),
            CriterionId::MaxCor => write!(f, "S_maxcor"),
            CriterionId::NearUniform { q1 } => write!(f, "S_nearU(q1={q1})"),
            CriterionId::Var { u } => write!(f, "S_var(u={u})"),
            CriterionId::Fd { u, v } => write!(f, "S_fd(u={u},v={v})"),
        }
    }
}

/// Mean and variance of data with respect to a conservative row.
/// The variance may be negative because weights may be negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedStats {
    pub mean: f64,
    pub variance: f64,
}

/// Weighted mean and spread of `data` under the conservative `weights`.
pub fn weighted_stats(weights: &[f64], data: &[f64]) -> Result<WeightedStats> {
    if weights.len() != data.len() {
        return Err(Error::DimensionMismatch { expected: weights.len(), got: data.len() });
    }
    let mean: f64 = weights.iter().zip(data).map(|(w, s)| w * s).sum();
    let variance: f64 = weights.iter().zip(data).map(|(w, s)| w * (s - mean) * (s - mean)).sum();
    Ok(WeightedStats { mean, variance })
}

/// Weighted mean of the data under row j's conservative row, computed
/// as (theta_j . s) / (theta_j . 1).
pub(crate) fn row_mean(pm: &ParamMatrix, j: usize, data: &[f64]) -> f64 {
    let dot: f64 = pm.theta().row(j).iter().zip(data).map(|(a, b)| a * b).sum();
    dot / pm.trend_products()[j]
}

fn argmax_positions(scores: &[f64]) -> Vec<usize> {
    let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let cut = best - TIE_TOL * (1.0 + best.abs());
    (0..scores.len()).filter(|&p| scores[p] >= cut).collect()
}

fn argmin_positions(scores: &[f64]) -> Vec<usize> {
    let best = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let cut = best + TIE_TOL * (1.0 + best.abs());
    (0..scores.len()).filter(|&p| scores[p] <= cut).collect()
}

/// Average of the normalized rows at the given index-set positions.
fn average_rows(pm: &ParamMatrix, positions: &[usize], criterion: CriterionId) -> WeightRow {
    let dim = pm.dim();
    let count = positions.len() as f64;
    let mut weights = vec![0.0; dim];
    let mut rows = Vec::with_capacity(positions.len());
    for &p in positions {
        let j = pm.index_set()[p];
        rows.push(j);
        let t = pm.trend_products()[j] * count;
        for (w, v) in weights.iter_mut().zip(pm.theta().row(j)) {
            *w += v / t;
        }
    }
    WeightRow {
        level: pm.level(),
        weights,
        source: RowProvenance { family: pm.family(), rows, criterion: Some(criterion) },
    }
}

fn single_row(pm: &ParamMatrix, position: usize, criterion: CriterionId) -> WeightRow {
    let j = pm.index_set()[position];
    let mut row = pm.conservative_row(j).expect("position is inside the index set");
    row.source.criterion = Some(criterion);
    row
}

/// Clamped index-set position min(u, card - 1).
fn clamp_position(pm: &ParamMatrix, u: usize) -> usize {
    u.min(pm.index_set().len() - 1)
}

// ---- data-free scores ------------------------------------------------

/// Tail sums of the normalized rows from `anchor` to l.
pub(crate) fn positions_tail1(pm: &ParamMatrix, anchor: usize) -> Vec<usize> {
    let scores: Vec<f64> = pm
        .index_set()
        .iter()
        .map(|&j| {
            let t = pm.trend_products()[j];
            pm.theta().row(j)[anchor..].iter().map(|v| v / t).sum()
        })
        .collect();
    argmax_positions(&scores)
}

/// Largest normalized entry over the tail from `anchor` to l.
pub(crate) fn positions_tail2(pm: &ParamMatrix, anchor: usize) -> Vec<usize> {
    let scores: Vec<f64> = pm
        .index_set()
        .iter()
        .map(|&j| {
            let t = pm.trend_products()[j];
            pm.theta().row(j)[anchor..]
                .iter()
                .map(|v| v / t)
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    argmax_positions(&scores)
}

/// Correlation |theta_j . 1| / (sqrt(l+1) ||theta_j||) with the trend.
pub(crate) fn positions_maxcor(pm: &ParamMatrix) -> Vec<usize> {
    let scale = (pm.dim() as f64).sqrt();
    let scores: Vec<f64> = pm
        .index_set()
        .iter()
        .map(|&j| pm.trend_products()[j].abs() / (scale * pm.row_norms()[j]))
        .collect();
    argmax_positions(&scores)
}

/// Distance of each normalized row to the uniform row in the q1-norm.
pub(crate) fn positions_near_uniform(pm: &ParamMatrix, q1: Q) -> Vec<usize> {
    let uniform = 1.0 / pm.dim() as f64;
    let scores: Vec<f64> = pm
        .index_set()
        .iter()
        .map(|&j| {
            let t = pm.trend_products()[j];
            let deviations = pm.theta().row(j).iter().map(|v| (v / t - uniform).abs());
            match q1 {
                Q::One => deviations.sum(),
                Q::Two => deviations.map(|d| d * d).sum::<f64>().sqrt(),
                Q::Inf => deviations.fold(0.0, f64::max),
            }
        })
        .collect();
    argmin_positions(&scores)
}

// ---- data-driven orderings -------------------------------------------

/// Positions 0..keys.len() sorted by ascending key; the stable sort
/// keeps ties in position (and therefore row-index) order.
pub(crate) fn sorted_positions(keys: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&a, &b| keys[a].total_cmp(&keys[b]));
    order
}

/// Index-set positions ordered by ascending variance of the data under
/// each normalized row, ties by smaller row index.
pub(crate) fn var_ordering(pm: &ParamMatrix, data: &[f64]) -> Vec<usize> {
    let keys: Vec<f64> = pm
        .index_set()
        .iter()
        .map(|&j| {
            let t = pm.trend_products()[j];
            let mean = row_mean(pm, j, data);
            pm.theta()
                .row(j)
                .iter()
                .zip(data)
                .map(|(v, s)| (v / t) * (s - mean) * (s - mean))
                .sum()
        })
        .collect();
    sorted_positions(&keys)
}

/// Index-set positions ordered by ascending distance of each row's
/// weighted mean from the anchored observation, ties by smaller row
/// index.
pub(crate) fn fd_ordering(pm: &ParamMatrix, data: &[f64], anchor: usize) -> Vec<usize> {
    let keys: Vec<f64> =
        pm.index_set().iter().map(|&j| (row_mean(pm, j, data) - data[anchor]).abs()).collect();
    sorted_positions(&keys)
}

// ---- the criteria ------------------------------------------------------

/// The u-th row of the sorted index set, clamped at the last one.
pub fn s_u(pm: &ParamMatrix, u: usize) -> WeightRow {
    single_row(pm, clamp_position(pm, u), CriterionId::U { u })
}

/// Average of every normalized row over the index set.
pub fn s_mean(pm: &ParamMatrix) -> WeightRow {
    let positions: Vec<usize> = (0..pm.index_set().len()).collect();
    average_rows(pm, &positions, CriterionId::Mean)
}

/// Rows maximizing the tail sum from min(u, l), averaged.
pub fn s_tail1(pm: &ParamMatrix, u: usize) -> WeightRow {
    let anchor = u.min(pm.level());
    let positions = positions_tail1(pm, anchor);
    average_rows(pm, &positions, CriterionId::Tail1 { u })
}

/// Rows maximizing the largest tail entry from min(u, l), averaged.
pub fn s_tail2(pm: &ParamMatrix, u: usize) -> WeightRow {
    let anchor = u.min(pm.level());
    let positions = positions_tail2(pm, anchor);
    average_rows(pm, &positions, CriterionId::Tail2 { u })
}

/// Rows most correlated with the constant trend, averaged.
pub fn s_maxcor(pm: &ParamMatrix) -> WeightRow {
    let positions = positions_maxcor(pm);
    average_rows(pm, &positions, CriterionId::MaxCor)
}

/// Rows nearest to the uniform row in the q1-norm, averaged.
pub fn s_near_uniform(pm: &ParamMatrix, q1: Q) -> WeightRow {
    let positions = positions_near_uniform(pm, q1);
    average_rows(pm, &positions, CriterionId::NearUniform { q1 })
}

/// The row at clamped position u of the ascending variance ordering.
pub fn s_var(pm: &ParamMatrix, data: &[f64], u: usize) -> Result<WeightRow> {
    if data.len() != pm.dim() {
        return Err(Error::DimensionMismatch { expected: pm.dim(), got: data.len() });
    }
    let order = var_ordering(pm, data);
    Ok(single_row(pm, order[clamp_position(pm, u)], CriterionId::Var { u }))
}

/// The row at clamped position v of the ordering by distance of each
/// row's weighted mean from s(min(l, u)).
pub fn s_fd(pm: &ParamMatrix, data: &[f64], u: usize, v: usize) -> Result<WeightRow> {
    if data.len() != pm.dim() {
        return Err(Error::DimensionMismatch { expected: pm.dim(), got: data.len() });
    }
    let anchor = u.min(pm.level());
    let order = fd_ordering(pm, data, anchor);
    Ok(single_row(pm, order[clamp_position(pm, v)], CriterionId::Fd { u, v }))
}

/// Dispatches a criterion id to its implementation.
pub fn evaluate_criterion(pm: &ParamMatrix, data: &[f64], id: CriterionId) -> Result<WeightRow> {
    Ok(match id {
        CriterionId::U { u } => s_u(pm, u),
        CriterionId::Mean => s_mean(pm),
        CriterionId::Tail1 { u } => s_tail1(pm, u),
        CriterionId::Tail2 { u } => s_tail2(pm, u),
        CriterionId::MaxCor => s_maxcor(pm),
        CriterionId::NearUniform { q1 } => s_near_uniform(pm, q1),
        CriterionId::Var { u } => s_var(pm, data, u)?,
        CriterionId::Fd { u, v } => s_fd(pm, data, u, v)?,
    })
}
