//! Observed scalar series indexed 0..n with a calendar offset.

use crate::error::{Error, Result};

/// An annual series s(0..n); index 0 corresponds to `start_year`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesData {
    values: Vec<f64>,
    start_year: i64,
}

impl SeriesData {
    /// Validates length (at least 2) and finiteness.
    pub fn new(values: Vec<f64>, start_year: i64) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::TooShort { min: 2, got: values.len() });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { values, start_year })
    }

    /// The last index n (length minus one).
    pub fn n(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The prefix s(0..=l).
    pub fn prefix(&self, l: usize) -> &[f64] {
        &self.values[..=l]
    }

    pub fn start_year(&self) -> i64 {
        self.start_year
    }

    /// Calendar year of index `i`.
    pub fn year_of(&self, i: usize) -> i64 {
        self.start_year + i as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_short_and_non_finite_input() {
        assert_eq!(
            SeriesData::new(vec![1.0], 2000),
            Err(Error::TooShort { min: 2, got: 1 })
        );
        assert_eq!(
            SeriesData::new(vec![1.0, f64::NAN, 2.0], 2000),
            Err(Error::NonFinite { index: 1 })
        );
    }

    #[test]
    fn indexing_and_years() {
        let s = SeriesData::new(vec![1.0, 2.0, 3.0], 1901).unwrap();
        assert_eq!(s.n(), 2);
        assert_eq!(s.year_of(2), 1903);
        assert_eq!(s.prefix(1), &[1.0, 2.0]);
    }
}
