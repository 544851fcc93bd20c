//! Internal dense-matrix helpers.
//!
//! State vectors stay plain `&[f64]` throughout the crate; this module gives
//! the few matrix-valued pieces (operator definitions, Lyapunov weights) a
//! compact row-major representation plus bridges to nalgebra for the
//! factorisations done at construction time (eigenvalues, LU, Cholesky).

use crate::{Error, Result};
use nalgebra::DMatrix;

/// Dense square matrix, row-major. Serialises as nested row arrays.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMat {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl serde::Serialize for DenseMat {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(serializer)
    }
}

impl<'de> serde::Deserialize<'de> for DenseMat {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<f64>> = serde::Deserialize::deserialize(deserializer)?;
        DenseMat::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

impl DenseMat {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::invalid("matrix must be non-empty"));
        }
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("matrix entries must be finite"));
        }
        Ok(Self { dim, data })
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self {
            dim,
            data: vec![0.0; dim * dim],
        };
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let dim = diag.len();
        let mut m = Self {
            dim,
            data: vec![0.0; dim * dim],
        };
        for (i, d) in diag.iter().enumerate() {
            m.data[i * dim + i] = *d;
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
    }

    /// `out = M x`, no allocation.
    #[inline]
    pub fn matvec_into(&self, x: &[f64], out: &mut [f64]) {
        for i in 0..self.dim {
            let row = &self.data[i * self.dim..(i + 1) * self.dim];
            out[i] = crate::numeric::dot(row, x);
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.matvec_into(x, &mut out);
        out
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| self.data[i * self.dim..(i + 1) * self.dim].to_vec())
            .collect()
    }

    pub fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }

    pub fn from_nalgebra(m: &DMatrix<f64>) -> Self {
        let dim = m.nrows();
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(m[(i, j)]);
            }
        }
        Self { dim, data }
    }

    /// Largest singular value.
    pub fn spectral_norm(&self) -> f64 {
        self.to_nalgebra()
            .singular_values()
            .iter()
            .copied()
            .fold(0.0, f64::max)
    }

    /// Maximum real part over the (complex) eigenvalue spectrum.
    pub fn max_eigenvalue_real_part(&self) -> f64 {
        self.to_nalgebra()
            .complex_eigenvalues()
            .iter()
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Symmetric positive-definiteness via Cholesky.
    pub fn is_positive_definite(&self) -> bool {
        nalgebra::Cholesky::new(self.to_nalgebra()).is_some()
    }

    /// Solves `M x = b` by LU with partial pivoting.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let lu = self.to_nalgebra().lu();
        let rhs = nalgebra::DVector::from_column_slice(b);
        lu.solve(&rhs)
            .map(|x| x.iter().copied().collect())
            .ok_or(Error::SingularMatrix {
                context: "linear solve",
            })
    }
}
