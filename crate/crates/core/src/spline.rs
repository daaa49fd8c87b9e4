//! Natural cubic splines on the integer knots 0..l.
//!
//! A spline is stored by its knot values `p`, knot slopes `q`, knot
//! curvatures `u` and per-interval third derivatives `v`, so that on
//! [i, i+1)
//!
//! ```text
//! s(t) = p_i + q_i (t-i) + u_i (t-i)^2 / 2 + v_i (t-i)^3 / 6
//! ```
//!
//! Natural boundary conditions are u_0 = u_l = 0. The interior
//! curvatures solve the unit-spacing tridiagonal system
//! `u_{i-1} + 4 u_i + u_{i+1} = 6 (p_{i-1} - 2 p_i + p_{i+1})`.

use crate::error::{Error, Result};

/// Piecewise cubic interpolant on knots 0..l.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseCubic {
    values: Vec<f64>,
    slopes: Vec<f64>,
    curvatures: Vec<f64>,
    jerks: Vec<f64>, // one per interval
}

/// Solves the strictly diagonally dominant system with diagonal 4 and
/// off-diagonals 1 (Thomas algorithm, no pivoting needed).
pub(crate) fn solve_unit_tridiagonal(mut rhs: Vec<f64>) -> Vec<f64> {
    let n = rhs.len();
    if n == 0 {
        return rhs;
    }
    let mut upper = vec![0.0; n];
    upper[0] = 1.0 / 4.0;
    rhs[0] /= 4.0;
    for i in 1..n {
        let denom = 4.0 - upper[i - 1];
        upper[i] = 1.0 / denom;
        rhs[i] = (rhs[i] - rhs[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= upper[i] * rhs[i + 1];
    }
    rhs
}

/// Interpolates `values` at knots 0..l by the natural cubic spline.
pub fn interpolate_natural(values: &[f64]) -> Result<PiecewiseCubic> {
    if values.len() < 2 {
        return Err(Error::TooShort { min: 2, got: values.len() });
    }
    if let Some(index) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    let l = values.len() - 1;

    let mut curvatures = vec![0.0; l + 1];
    if l >= 2 {
        let rhs: Vec<f64> = (1..l)
            .map(|i| 6.0 * (values[i - 1] - 2.0 * values[i] + values[i + 1]))
            .collect();
        let interior = solve_unit_tridiagonal(rhs);
        curvatures[1..l].copy_from_slice(&interior);
    }

    let mut slopes = vec![0.0; l + 1];
    for i in 0..l {
        slopes[i] = values[i + 1] - values[i] - curvatures[i] / 3.0 - curvatures[i + 1] / 6.0;
    }
    slopes[l] =
        values[l] - values[l - 1] + curvatures[l - 1] / 6.0 + curvatures[l] / 3.0;

    let jerks: Vec<f64> = (0..l).map(|i| curvatures[i + 1] - curvatures[i]).collect();

    Ok(PiecewiseCubic { values: values.to_vec(), slopes, curvatures, jerks })
}

impl PiecewiseCubic {
    /// Number of knots (l + 1).
    pub fn knot_count(&self) -> usize {
        self.values.len()
    }

    /// The last knot l.
    pub fn last_knot(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn curvatures(&self) -> &[f64] {
        &self.curvatures
    }

    pub fn jerks(&self) -> &[f64] {
        &self.jerks
    }

    /// Evaluates s(t) for t in [0, l]; t = l uses the last interval's
    /// polynomial.
    pub fn evaluate(&self, t: f64) -> Result<f64> {
        let l = self.last_knot() as f64;
        if !(0.0..=l).contains(&t) {
            return Err(Error::OutOfDomain { t, max: l });
        }
        let i = (t.floor() as usize).min(self.last_knot() - 1);
        let d = t - i as f64;
        Ok(self.values[i]
            + d * (self.slopes[i] + d * (self.curvatures[i] / 2.0 + d * self.jerks[i] / 6.0)))
    }

    /// Exact integral of s(t)^2 over [0, l].
    ///
    /// Four Gauss-Legendre points per unit interval integrate the
    /// degree-6 integrand exactly (the rule is exact through degree 7).
    pub fn integral_of_square(&self) -> f64 {
        // Nodes/weights for [0, 1].
        let r = (6.0 / 5.0_f64).sqrt();
        let a_inner = (3.0 / 7.0 - 2.0 / 7.0 * r).sqrt();
        let a_outer = (3.0 / 7.0 + 2.0 / 7.0 * r).sqrt();
        let s30 = 30.0_f64.sqrt();
        let w_inner = (18.0 + s30) / 72.0;
        let w_outer = (18.0 - s30) / 72.0;
        let nodes = [
            (0.5 * (1.0 - a_outer), w_outer),
            (0.5 * (1.0 - a_inner), w_inner),
            (0.5 * (1.0 + a_inner), w_inner),
            (0.5 * (1.0 + a_outer), w_outer),
        ];

        let mut total = 0.0;
        for i in 0..self.last_knot() {
            let mut piece = 0.0;
            for (x, w) in nodes {
                let s = self.values[i]
                    + x * (self.slopes[i]
                        + x * (self.curvatures[i] / 2.0 + x * self.jerks[i] / 6.0));
                piece += w * s * s;
            }
            total += piece;
        }
        total
    }

    /// Residuals of the C^2 matching conditions at interior knots:
    /// (value, slope, curvature-jump) mismatches, maximized over knots.
    /// All three are zero for a valid spline up to rounding.
    pub fn continuity_residuals(&self) -> (f64, f64, f64) {
        let l = self.last_knot();
        let mut dv: f64 = 0.0;
        let mut ds: f64 = 0.0;
        let mut dc: f64 = 0.0;
        for i in 0..l {
            let value_end = self.values[i]
                + self.slopes[i]
                + self.curvatures[i] / 2.0
                + self.jerks[i] / 6.0;
            let slope_end = self.slopes[i] + self.curvatures[i] + self.jerks[i] / 2.0;
            dv = dv.max((value_end - self.values[i + 1]).abs());
            ds = ds.max((slope_end - self.slopes[i + 1]).abs());
            dc = dc.max((self.curvatures[i] + self.jerks[i] - self.curvatures[i + 1]).abs());
        }
        (dv, ds, dc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn zero_spline_is_identically_zero() {
        let s = interpolate_natural(&[0.0, 0.0]).unwrap();
        assert!(s.values().iter().all(|&v| v == 0.0));
        assert!(s.slopes().iter().all(|&v| v == 0.0));
        assert!(s.curvatures().iter().all(|&v| v == 0.0));
        assert!(s.jerks().iter().all(|&v| v == 0.0));
        assert_eq!(s.evaluate(0.5).unwrap(), 0.0);
        assert_eq!(s.integral_of_square(), 0.0);
    }

    #[test]
    fn two_knots_give_the_straight_line() {
        let s = interpolate_natural(&[0.0, 1.0]).unwrap();
        assert_eq!(s.values(), &[0.0, 1.0]);
        assert_eq!(s.slopes(), &[1.0, 1.0]);
        assert_eq!(s.curvatures(), &[0.0, 0.0]);
        assert_eq!(s.jerks(), &[0.0]);
        assert_relative_eq!(s.evaluate(0.25).unwrap(), 0.25, epsilon = 1e-15);
        // integral of t^2 over [0,1]
        assert_relative_eq!(s.integral_of_square(), 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn three_knot_valley_solves_the_hand_system() {
        // 4 u_1 = 6 (p_0 - 2 p_1 + p_2) = 12
        let s = interpolate_natural(&[1.0, 0.0, 1.0]).unwrap();
        assert_relative_eq!(s.curvatures()[1], 3.0, epsilon = 1e-12);
        assert_eq!(s.curvatures()[0], 0.0);
        assert_eq!(s.curvatures()[2], 0.0);
        assert_relative_eq!(s.slopes()[0], -1.5, epsilon = 1e-12);
        assert_relative_eq!(s.slopes()[1], 0.0, epsilon = 1e-12);
        assert_relative_eq!(s.slopes()[2], 1.5, epsilon = 1e-12);
        assert_relative_eq!(s.evaluate(1.0).unwrap(), 0.0, epsilon = 1e-12);
        let (dv, ds, dc) = s.continuity_residuals();
        assert!(dv < 1e-10 && ds < 1e-10 && dc < 1e-10);
    }

    #[test]
    fn valley_integral_matches_symbolic_value() {
        // Piecewise expansion of (1 - 1.5 t + 0.5 t^3)^2 and its mirror
        // integrates to 33/140 per interval.
        let s = interpolate_natural(&[1.0, 0.0, 1.0]).unwrap();
        assert_relative_eq!(s.integral_of_square(), 33.0 / 70.0, epsilon = 1e-14);
    }

    #[test]
    fn rejects_single_value_and_bad_domain() {
        assert_eq!(
            interpolate_natural(&[1.0]),
            Err(Error::TooShort { min: 2, got: 1 })
        );
        let s = interpolate_natural(&[0.0, 1.0, 0.0]).unwrap();
        assert!(matches!(s.evaluate(-0.1), Err(Error::OutOfDomain { .. })));
        assert!(matches!(s.evaluate(2.0 + 1e-9), Err(Error::OutOfDomain { .. })));
        assert!(s.evaluate(2.0).is_ok());
    }

    proptest! {
        #[test]
        fn reproduces_knots_and_stays_smooth(vals in proptest::collection::vec(-50.0f64..50.0, 2..14)) {
            let s = interpolate_natural(&vals).unwrap();
            for (i, v) in vals.iter().enumerate() {
                let at_knot = s.evaluate(i as f64).unwrap();
                prop_assert!((at_knot - v).abs() < 1e-10);
            }
            let (dv, ds, dc) = s.continuity_residuals();
            prop_assert!(dv < 1e-9 && ds < 1e-9 && dc < 1e-9);
        }

        #[test]
        fn line_data_yields_line_spline(a in -5.0f64..5.0, b in -5.0f64..5.0, l in 1usize..12) {
            let vals: Vec<f64> = (0..=l).map(|i| a + b * i as f64).collect();
            let s = interpolate_natural(&vals).unwrap();
            for &q in s.slopes() {
                prop_assert!((q - b).abs() < 1e-10);
            }
            for &u in s.curvatures() {
                prop_assert!(u.abs() < 1e-10);
            }
            for &v in s.jerks() {
                prop_assert!(v.abs() < 1e-10);
            }
        }
    }
}
