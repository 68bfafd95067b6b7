use crate::error::{Error, Result};

/// Dense `n × m` matrix of finite reals, one row per point.
///
/// Point and dimension indices are 0-based in the API. Files written by the
/// CLI report 1-based point IDs.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    n: usize,
    m: usize,
    values: Vec<f64>,
}

impl DataMatrix {
    /// Builds a matrix from row-major values.
    pub fn from_row_major(n: usize, m: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::data("matrix has no points"));
        }
        if m < 2 {
            return Err(Error::data(format!(
                "matrix has {m} dimension(s); at least 2 are required"
            )));
        }
        if values.len() != n * m {
            return Err(Error::data(format!(
                "expected {} values for a {n}x{m} matrix, got {}",
                n * m,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::data(format!(
                "non-finite value at point {}, dimension {}",
                pos / m,
                pos % m
            )));
        }
        Ok(Self { n, m, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != m) {
            return Err(Error::data(format!(
                "row {bad} has {} values, expected {m}",
                rows[bad].len()
            )));
        }
        Self::from_row_major(rows.len(), m, rows.concat())
    }

    /// Number of points.
    pub fn n_points(&self) -> usize {
        self.n
    }

    /// Number of dimensions.
    pub fn n_dims(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, point: usize, dim: usize) -> f64 {
        self.values[point * self.m + dim]
    }

    pub fn row(&self, point: usize) -> &[f64] {
        &self.values[point * self.m..(point + 1) * self.m]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.m)
    }

    pub fn column(&self, dim: usize) -> impl Iterator<Item = f64> + '_ {
        self.values[dim..].iter().step_by(self.m).copied()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// Returns a copy with rows reordered so that row `i` of the result is row
    /// `order[i]` of `self`.
    pub fn permute_rows(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.n {
            return Err(Error::param("row order length does not match point count"));
        }
        let mut values = Vec::with_capacity(self.values.len());
        for &p in order {
            if p >= self.n {
                return Err(Error::param(format!("row index {p} out of range")));
            }
            values.extend_from_slice(self.row(p));
        }
        Self::from_row_major(self.n, self.m, values)
    }

    /// Applies `x -> f(dim, x)` element-wise.
    pub fn map_columns(&self, f: impl Fn(usize, f64) -> f64) -> Result<Self> {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| f(i % self.m, v))
            .collect();
        Self::from_row_major(self.n, self.m, values)
    }
}
