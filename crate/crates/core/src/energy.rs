//! Energy matrices of natural cubic splines and the parametrization
//! families derived from them.
//!
//! For each level l there is a symmetric matrix S and a fixed
//! nonsymmetric matrix M with
//!
//! ```text
//! integral_0^l s(t)^2 dt = p^T M p = p^T S p
//! ```
//!
//! for every natural cubic spline with knot values p. M is assembled by
//! writing the spline's slopes, curvatures and third derivatives as
//! linear maps of p, expanding the squared piecewise polynomial into
//! monomial moments, and placing every cross term with the earlier
//! block (order p, q, u, v) on the row side. S is the symmetric part
//! (M + M^T) / 2; only S is determined by the quadratic form, so the
//! row-side convention is what pins M.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::spline::solve_unit_tridiagonal;

/// The two energy matrices of one level.
#[derive(Debug, Clone)]
pub struct EnergyMatrixPair {
    pub level: usize,
    pub m: Matrix,
    pub s: Matrix,
}

/// The six admissible parametrization family tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FamilyId {
    M,
    MT,
    MInv,
    MInvT,
    S,
    SInv,
}

impl FamilyId {
    pub const ALL: [FamilyId; 6] =
        [FamilyId::M, FamilyId::MT, FamilyId::MInv, FamilyId::MInvT, FamilyId::S, FamilyId::SInv];

    /// CLI tag.
    pub fn tag(self) -> &'static str {
        match self {
            FamilyId::M => "M",
            FamilyId::MT => "Mt",
            FamilyId::MInv => "Minv",
            FamilyId::MInvT => "Minvt",
            FamilyId::S => "S",
            FamilyId::SInv => "Sinv",
        }
    }

    pub fn parse(tag: &str) -> Option<FamilyId> {
        FamilyId::ALL.iter().copied().find(|f| f.tag().eq_ignore_ascii_case(tag))
    }
}

impl std::fmt::Display for FamilyId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// Ill-conditioning notice collected while building a family.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionWarning {
    pub level: usize,
    pub pivot_ratio: f64,
}

/// One parametrization family: the matrices Theta^(1) .. Theta^(n).
#[derive(Debug, Clone)]
pub struct ParamFamily {
    pub id: FamilyId,
    /// Entry l-1 holds the (l+1)x(l+1) matrix of level l.
    pub matrices: Vec<Matrix>,
    pub warnings: Vec<ConditionWarning>,
}

impl ParamFamily {
    /// Largest level n.
    pub fn max_level(&self) -> usize {
        self.matrices.len()
    }

    /// The matrix of level l (1-based).
    pub fn level(&self, l: usize) -> &Matrix {
        &self.matrices[l - 1]
    }
}

/// Map from knot values to knot curvatures u (natural boundary rows are
/// zero, interior rows solve the unit-spacing tridiagonal system).
fn curvature_map(l: usize) -> Matrix {
    let mut u = Matrix::zeros(l + 1, l + 1);
    if l < 2 {
        return u;
    }
    for c in 0..=l {
        let rhs: Vec<f64> = (1..l)
            .map(|i| {
                let mut r = 0.0;
                if i == c + 1 {
                    r += 6.0;
                }
                if i == c {
                    r -= 12.0;
                }
                if i + 1 == c {
                    r += 6.0;
                }
                r
            })
            .collect();
        let solved = solve_unit_tridiagonal(rhs);
        for (k, val) in solved.into_iter().enumerate() {
            u[(k + 1, c)] = val;
        }
    }
    u
}

/// Map from knot values to knot slopes q, derived from the C^2
/// matching conditions and the curvature map.
fn slope_map(l: usize, u: &Matrix) -> Matrix {
    let mut q = Matrix::zeros(l + 1, l + 1);
    for i in 0..l {
        let row = q.row_mut(i);
        row[i + 1] += 1.0;
        row[i] -= 1.0;
        for c in 0..=l {
            row[c] -= u[(i, c)] / 3.0 + u[(i + 1, c)] / 6.0;
        }
    }
    let row = q.row_mut(l);
    row[l] += 1.0;
    row[l - 1] -= 1.0;
    for c in 0..=l {
        row[c] += u[(l - 1, c)] / 6.0 + u[(l, c)] / 3.0;
    }
    q
}

/// Map from knot values to per-interval third derivatives v.
fn jerk_map(l: usize, u: &Matrix) -> Matrix {
    Matrix::from_fn(l, l + 1, |i, c| u[(i + 1, c)] - u[(i, c)])
}

/// Assembles M and S for level l.
pub fn assemble_energy(l: usize) -> Result<EnergyMatrixPair> {
    if l < 1 {
        return Err(Error::TooShort { min: 1, got: l });
    }
    let u_full = curvature_map(l);
    let q_full = slope_map(l, &u_full);

    // Restrictions to the interval-opening knots 0..l-1.
    let p_map = Matrix::identity(l + 1).truncate_rows(l);
    let q_map = q_full.truncate_rows(l);
    let u_map = u_full.truncate_rows(l);
    let v_map = jerk_map(l, &u_full);

    // Moments of (p + q t + u t^2/2 + v t^3/6)^2 over one unit interval,
    // keyed by block pair in the fixed order p, q, u, v.
    let blocks = [&p_map, &q_map, &u_map, &v_map];
    let coeffs: [[f64; 4]; 4] = [
        [1.0, 1.0, 1.0 / 3.0, 1.0 / 12.0],
        [0.0, 1.0 / 3.0, 1.0 / 4.0, 1.0 / 15.0],
        [0.0, 0.0, 1.0 / 20.0, 1.0 / 36.0],
        [0.0, 0.0, 0.0, 1.0 / 252.0],
    ];

    let mut m = Matrix::zeros(l + 1, l + 1);
    for a in 0..4 {
        for b in a..4 {
            m.add_scaled(&blocks[a].transpose_mul(blocks[b]), coeffs[a][b]);
        }
    }

    let mt = m.transpose();
    let mut s = m.clone();
    s.add_scaled(&mt, 1.0);
    let s = Matrix::from_fn(l + 1, l + 1, |i, j| s[(i, j)] / 2.0);

    Ok(EnergyMatrixPair { level: l, m, s })
}

/// Inverse of a square matrix by LU with partial pivoting.
///
/// The singularity error names the matrix's level (dimension minus one).
pub fn invert(matrix: &Matrix) -> Result<Matrix> {
    if !matrix.is_square() {
        return Err(Error::NotSquare { rows: matrix.rows(), cols: matrix.cols() });
    }
    matrix.inverse(matrix.rows().saturating_sub(1))
}

fn transform(
    id: FamilyId,
    pair: &EnergyMatrixPair,
    warnings: &mut Vec<ConditionWarning>,
) -> Result<Matrix> {
    let invert_tracked = |base: &Matrix, warnings: &mut Vec<ConditionWarning>| -> Result<Matrix> {
        let lu = base.lu(pair.level)?;
        if lu.ill_conditioned() {
            warnings.push(ConditionWarning { level: pair.level, pivot_ratio: lu.pivot_ratio() });
        }
        Ok(lu.inverse())
    };
    match id {
        FamilyId::M => Ok(pair.m.clone()),
        FamilyId::MT => Ok(pair.m.transpose()),
        FamilyId::MInv => invert_tracked(&pair.m, warnings),
        FamilyId::MInvT => Ok(invert_tracked(&pair.m, warnings)?.transpose()),
        FamilyId::S => Ok(pair.s.clone()),
        FamilyId::SInv => invert_tracked(&pair.s, warnings),
    }
}

/// Builds one family up to level n.
pub fn build_family(id: FamilyId, n: usize) -> Result<ParamFamily> {
    let built = build_families(&[id], n)?;
    Ok(built.into_iter().next().expect("one family requested"))
}

/// Builds several families at once, assembling each level's energy pair
/// only once. Levels are assembled in parallel and merged in index
/// order.
pub fn build_families(ids: &[FamilyId], n: usize) -> Result<Vec<ParamFamily>> {
    if n < 1 {
        return Err(Error::TooShort { min: 1, got: n });
    }
    let pairs: Vec<EnergyMatrixPair> =
        (1..=n).into_par_iter().map(assemble_energy).collect::<Result<_>>()?;

    ids.iter()
        .map(|&id| {
            let mut warnings = Vec::new();
            let matrices = pairs
                .iter()
                .map(|pair| transform(id, pair, &mut warnings))
                .collect::<Result<Vec<_>>>()?;
            Ok(ParamFamily { id, matrices, warnings })
        })
        .collect()
}
