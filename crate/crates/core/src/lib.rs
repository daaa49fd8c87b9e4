//! One-step-ahead prediction of a scalar series from matrix
//! parametrizations of Euclidean space.
//!
//! Any invertible matrix assigns coordinates to a data window; its rows
//! that correlate with the constant trend can be normalized into
//! conservative rows (weights summing to one) and used as one-step
//! predictors. This crate builds such parametrizations from the energy
//! matrices of natural cubic splines, implements eight families of
//! row-selection criteria, and crowns a winner per backtest cost
//! through a seven-stage tournament, for cost exponents q = 1, 2, inf.
//!
//! ```
//! use splinecast::{
//!     energy::{build_families, FamilyId},
//!     tournament::{run_tournament, AnalyzedFamily},
//!     criteria::Q,
//!     SeriesData,
//! };
//!
//! let values: Vec<f64> = (0..=20).map(|i| 10.0 + 0.1 * i as f64).collect();
//! let series = SeriesData::new(values, 1990)?;
//!
//! let families = build_families(&FamilyId::ALL, series.n())?;
//! let analyzed: Vec<AnalyzedFamily> = families
//!     .iter()
//!     .map(|f| AnalyzedFamily::from_family(f, 1e-10))
//!     .collect::<Result<_, _>>()?;
//!
//! let results = run_tournament(&analyzed, &series, &[Q::Two], 4)?;
//! println!("forecast: {}", results[0].forecast);
//! # Ok::<(), splinecast::Error>(())
//! ```

pub mod criteria;
pub mod energy;
pub mod error;
pub mod matrix;
pub mod param;
pub mod series;
pub mod spline;
pub mod tournament;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use series::SeriesData;
