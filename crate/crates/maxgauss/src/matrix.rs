//! Dense symmetric-matrix arithmetic backing the tests: sample moments,
//! pooled covariance, correlation rescaling, and PSD-corrected factorization
//! for Gaussian sampling.
//!
//! Variance and covariance use divisor `n`, not `n - 1`. This matches the
//! plug-in estimators the calibration is defined with, and differs from what
//! most statistics libraries return by default.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// An n x p observation matrix (rows are observations, columns are features).
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: DMatrix<f64>,
    feature_names: Option<Vec<String>>,
}

impl DataMatrix {
    pub fn new(values: DMatrix<f64>, feature_names: Option<Vec<String>>) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(Error::invalid("data matrix must have at least 1 row and 1 column"));
        }
        if let Some(names) = &feature_names {
            if names.len() != values.ncols() {
                return Err(Error::DimensionMismatch(format!(
                    "{} feature names for {} columns",
                    names.len(),
                    values.ncols()
                )));
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("data matrix contains non-finite entries"));
        }
        Ok(Self { values, feature_names })
    }

    /// Build from row-major data.
    pub fn from_rows(rows: &[Vec<f64>], feature_names: Option<Vec<String>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::invalid("no observations"));
        }
        let p = rows[0].len();
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        let values = DMatrix::from_fn(rows.len(), p, |i, j| rows[i][j]);
        Self::new(values, feature_names)
    }

    pub fn n_obs(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    /// Subtract a fixed vector from every row.
    pub fn shifted(&self, mu0: &[f64]) -> Result<Self> {
        if mu0.len() != self.n_features() {
            return Err(Error::DimensionMismatch(format!(
                "shift vector has length {}, data has {} columns",
                mu0.len(),
                self.n_features()
            )));
        }
        let mut values = self.values.clone();
        for mut row in values.row_iter_mut() {
            for (v, m) in row.iter_mut().zip(mu0) {
                *v -= m;
            }
        }
        Ok(Self { values, feature_names: self.feature_names.clone() })
    }

    /// Select a subset of columns by index, preserving order.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Self> {
        if cols.is_empty() {
            return Err(Error::invalid("empty column selection"));
        }
        if let Some(&bad) = cols.iter().find(|&&c| c >= self.n_features()) {
            return Err(Error::invalid(format!("column index {bad} out of range")));
        }
        let values = DMatrix::from_fn(self.n_obs(), cols.len(), |i, j| self.values[(i, cols[j])]);
        let names = self
            .feature_names
            .as_ref()
            .map(|ns| cols.iter().map(|&c| ns[c].clone()).collect());
        Self::new(values, names)
    }
}

/// Dense symmetric p x p matrix. Symmetry is structural: setters write both
/// triangles from one value.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    inner: DMatrix<f64>,
}

impl SymmetricMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { inner: DMatrix::zeros(dim, dim) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { inner: DMatrix::identity(dim, dim) }
    }

    /// Wrap a dense matrix, symmetrizing by averaging with its transpose.
    pub fn from_dense(mat: DMatrix<f64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimensionMismatch("matrix is not square".into()));
        }
        if mat.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("matrix contains non-finite entries"));
        }
        let sym = (&mat + mat.transpose()) * 0.5;
        Ok(Self { inner: sym })
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = DMatrix::zeros(dim, dim);
        for k in 0..dim {
            for l in k..dim {
                let v = f(k, l);
                m[(k, l)] = v;
                m[(l, k)] = v;
            }
        }
        Self { inner: m }
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn get(&self, k: usize, l: usize) -> f64 {
        self.inner[(k, l)]
    }

    pub fn set(&mut self, k: usize, l: usize, v: f64) {
        self.inner[(k, l)] = v;
        self.inner[(l, k)] = v;
    }

    pub fn as_dense(&self) -> &DMatrix<f64> {
        &self.inner
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|k| self.inner[(k, k)]).collect()
    }

    /// Principal submatrix on the given (sorted or unsorted) index set.
    pub fn principal_submatrix(&self, idx: &[usize]) -> Result<Self> {
        if idx.is_empty() {
            return Err(Error::invalid("empty index set"));
        }
        if let Some(&bad) = idx.iter().find(|&&i| i >= self.dim()) {
            return Err(Error::invalid(format!("index {bad} out of range")));
        }
        Ok(Self::from_fn(idx.len(), |a, b| self.get(idx[a], idx[b])))
    }

    /// Replace the diagonal, keeping off-diagonal entries.
    pub fn with_diagonal(&self, diag: &[f64]) -> Result<Self> {
        if diag.len() != self.dim() {
            return Err(Error::DimensionMismatch("diagonal length mismatch".into()));
        }
        let mut out = self.clone();
        for (k, &d) in diag.iter().enumerate() {
            out.inner[(k, k)] = d;
        }
        Ok(out)
    }
}

/// Factor L with L * L' equal to the PSD-corrected input matrix.
#[derive(Debug, Clone)]
pub struct PsdFactor {
    factor: DMatrix<f64>,
    clipped_count: usize,
}

impl PsdFactor {
    pub fn dim(&self) -> usize {
        self.factor.nrows()
    }

    pub fn factor(&self) -> &DMatrix<f64> {
        &self.factor
    }

    /// Number of eigenvalues clamped up to the floor.
    pub fn clipped_count(&self) -> usize {
        self.clipped_count
    }

    /// Apply the factor to a standard-normal vector: W = L * z.
    pub fn transform(&self, z: &DVector<f64>) -> DVector<f64> {
        &self.factor * z
    }
}

/// Column means, one per feature.
pub fn sample_mean(data: &DataMatrix) -> Vec<f64> {
    let n = data.n_obs() as f64;
    data.values().column_iter().map(|c| c.sum() / n).collect()
}

/// Sample covariance with divisor n. PSD by construction (Gram form).
pub fn sample_covariance(data: &DataMatrix) -> Result<SymmetricMatrix> {
    let n = data.n_obs();
    if n < 2 {
        return Err(Error::invalid("sample covariance needs at least 2 observations"));
    }
    let p = data.n_features();
    let means = sample_mean(data);
    let mut centered = data.values().clone();
    for mut row in centered.row_iter_mut() {
        for (v, m) in row.iter_mut().zip(&means) {
            *v -= m;
        }
    }
    let gram = centered.transpose() * &centered / (n as f64);
    debug_assert_eq!(gram.nrows(), p);
    SymmetricMatrix::from_dense(gram)
}

/// Per-column variances with divisor n (the diagonal of `sample_covariance`
/// without forming the full matrix).
pub fn sample_variances(data: &DataMatrix) -> Vec<f64> {
    let n = data.n_obs() as f64;
    let means = sample_mean(data);
    data.values()
        .column_iter()
        .zip(&means)
        .map(|(c, m)| c.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n)
        .collect()
}

/// R = D^{-1/2} Sigma D^{-1/2} with D = diag(Sigma).
pub fn correlation_from_covariance(cov: &SymmetricMatrix) -> Result<SymmetricMatrix> {
    let p = cov.dim();
    let mut inv_sd = vec![0.0; p];
    for k in 0..p {
        let d = cov.get(k, k);
        if d <= 0.0 {
            return Err(Error::DegenerateVariance {
                index: k,
                message: format!("diagonal entry {d} is not positive"),
            });
        }
        inv_sd[k] = 1.0 / d.sqrt();
    }
    let mut out = SymmetricMatrix::zeros(p);
    for k in 0..p {
        for l in k..p {
            if k == l {
                out.set(k, k, 1.0);
            } else {
                out.set(k, l, cov.get(k, l) * inv_sd[k] * inv_sd[l]);
            }
        }
    }
    Ok(out)
}

/// Pooled covariance (m/N) * covX + (n/N) * covY with N = n + m.
///
/// Note the deliberate weight swap: the first sample's covariance is weighted
/// by the second sample's size.
pub fn pooled_covariance(
    cov_x: &SymmetricMatrix,
    cov_y: &SymmetricMatrix,
    n: usize,
    m: usize,
) -> Result<SymmetricMatrix> {
    if cov_x.dim() != cov_y.dim() {
        return Err(Error::DimensionMismatch(format!(
            "covariance dims {} and {}",
            cov_x.dim(),
            cov_y.dim()
        )));
    }
    if n < 2 || m < 2 {
        return Err(Error::invalid("pooled covariance needs n >= 2 and m >= 2"));
    }
    let total = (n + m) as f64;
    let wx = m as f64 / total;
    let wy = n as f64 / total;
    SymmetricMatrix::from_dense(cov_x.as_dense() * wx + cov_y.as_dense() * wy)
}

/// Factor a symmetric matrix for Gaussian sampling, clamping eigenvalues
/// below `eig_floor` to enforce positive semi-definiteness.
///
/// Cholesky is attempted first; the symmetric eigen-decomposition route is
/// taken only when the matrix is not numerically positive definite, so
/// rank-deficient inputs (perfectly correlated coordinates) are supported.
pub fn psd_factorize(mat: &SymmetricMatrix, eig_floor: f64) -> Result<PsdFactor> {
    if mat.as_dense().iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("matrix contains non-finite entries"));
    }
    if eig_floor <= 0.0 {
        if let Some(chol) = nalgebra::Cholesky::new(mat.as_dense().clone()) {
            return Ok(PsdFactor { factor: chol.l(), clipped_count: 0 });
        }
    }
    let eigen = mat.as_dense().clone().symmetric_eigen();
    let mut clipped = 0usize;
    let dim = mat.dim();
    let mut scaled = eigen.eigenvectors.clone();
    for (j, &ev) in eigen.eigenvalues.iter().enumerate() {
        let v = if ev < eig_floor {
            clipped += 1;
            eig_floor
        } else {
            ev
        };
        let s = v.max(0.0).sqrt();
        for i in 0..dim {
            scaled[(i, j)] *= s;
        }
    }
    Ok(PsdFactor { factor: scaled, clipped_count: clipped })
}
