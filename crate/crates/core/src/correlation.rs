//! Spatial correlation between IRS elements: matrix construction from the
//! built-in models, validation, and a PSD square-root factor used to color
//! i.i.d. Gaussian draws.

use std::fmt;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Smallest eigenvalue accepted for a correlation matrix.
pub const PSD_TOLERANCE: f64 = 1e-10;
/// Eigenvalues in `[-FACTOR_CLAMP_TOLERANCE, 0)` are clamped to zero when factoring.
pub const FACTOR_CLAMP_TOLERANCE: f64 = 1e-8;
const RELATIVE_EIGEN_FLOOR: f64 = 1e-12;
const SYMMETRY_TOLERANCE: f64 = 1e-12;
const JACOBI_OFF_DIAGONAL_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub enum CorrelationModel {
    Identity,
    /// Every distinct pair has correlation `rho`.
    Uniform {
        rho: f64,
    },
    /// `rho^|i-k|` on the linear element index.
    ExponentialLinear {
        rho: f64,
    },
    /// `rho^d` with `d` the Euclidean distance between the elements' positions
    /// on an `n_side × n_side` grid (row-major indexing).
    ExponentialGrid {
        rho: f64,
        n_side: usize,
    },
    /// Matrix read from a headerless CSV file.
    Custom {
        path: PathBuf,
    },
}

impl CorrelationModel {
    pub fn rho(&self) -> Option<f64> {
        match self {
            CorrelationModel::Uniform { rho }
            | CorrelationModel::ExponentialLinear { rho }
            | CorrelationModel::ExponentialGrid { rho, .. } => Some(*rho),
            CorrelationModel::Identity | CorrelationModel::Custom { .. } => None,
        }
    }

    fn check_rho(rho: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::InvalidParameter {
                name: "rho",
                value: rho,
                reason: "must lie in [0, 1]",
            });
        }
        Ok(())
    }
}

impl fmt::Display for CorrelationModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CorrelationModel::Identity => write!(f, "identity"),
            CorrelationModel::Uniform { rho } => write!(f, "uniform(rho={rho})"),
            CorrelationModel::ExponentialLinear { rho } => {
                write!(f, "exponential_linear(rho={rho})")
            }
            CorrelationModel::ExponentialGrid { rho, n_side } => {
                write!(f, "exponential_grid(rho={rho}, n_side={n_side})")
            }
            CorrelationModel::Custom { path } => write!(f, "custom({})", path.display()),
        }
    }
}

/// Coarse classification of a correlation matrix; selects which closed forms apply.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CorrelationKind {
    /// `R = I`.
    Uncorrelated,
    /// Every entry equal to one (rank one).
    FullyCorrelated,
    /// All off-diagonal entries equal to `rho`, `0 < rho < 1`.
    Uniform(f64),
    General,
}

/// A validated `M × M` correlation matrix, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl CorrelationMatrix {
    /// Validates `rows` and wraps them; any violation is an error.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let report = validate(rows);
        if let Some(issue) = report.issues.first() {
            return Err(match issue {
                Violation::NotPositiveSemidefinite { min_eigenvalue } => {
                    Error::NotPositiveSemidefinite {
                        min_eigenvalue: *min_eigenvalue,
                    }
                }
                other => Error::InvalidCorrelation(other.to_string()),
            });
        }
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            entries.extend_from_slice(row);
        }
        // Symmetrize away rounding-level asymmetry.
        for i in 0..dim {
            for k in (i + 1)..dim {
                let avg = 0.5 * (entries[i * dim + k] + entries[k * dim + i]);
                entries[i * dim + k] = avg;
                entries[k * dim + i] = avg;
            }
        }
        Ok(Self { dim, entries })
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![0.0; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = 1.0;
        }
        Self { dim, entries }
    }

    /// Uniform correlation built without an eigen check (always PSD for `rho ∈ [0, 1]`).
    fn uniform_unchecked(dim: usize, rho: f64) -> Self {
        let mut entries = vec![rho; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = 1.0;
        }
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.entries[i * self.dim + k]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.dim).map(<[f64]>::to_vec).collect()
    }

    pub fn kind(&self) -> CorrelationKind {
        let n = self.dim;
        if n == 1 {
            return CorrelationKind::Uncorrelated;
        }
        let first = self.get(0, 1);
        let uniform = (0..n).all(|i| (0..n).all(|k| i == k || self.get(i, k) == first));
        if !uniform {
            return CorrelationKind::General;
        }
        if first == 0.0 {
            CorrelationKind::Uncorrelated
        } else if first == 1.0 {
            CorrelationKind::FullyCorrelated
        } else {
            CorrelationKind::Uniform(first)
        }
    }

    pub fn is_identity(&self) -> bool {
        self.kind() == CorrelationKind::Uncorrelated
    }
}

/// Builds the `m × m` matrix for `model`.
pub fn build_matrix(model: &CorrelationModel, m: usize) -> Result<CorrelationMatrix> {
    if m == 0 {
        return Err(Error::Dimension(
            "the IRS needs at least one element".into(),
        ));
    }
    let exponential =
        |rho: f64, distance: &dyn Fn(usize, usize) -> f64| -> Result<CorrelationMatrix> {
            CorrelationModel::check_rho(rho)?;
            let rows: Vec<Vec<f64>> = (0..m)
                .map(|i| {
                    (0..m)
                        .map(|k| {
                            if i == k {
                                1.0
                            } else {
                                rho.powf(distance(i, k))
                            }
                        })
                        .collect()
                })
                .collect();
            CorrelationMatrix::from_rows(&rows)
        };
    match model {
        CorrelationModel::Identity => Ok(CorrelationMatrix::identity(m)),
        CorrelationModel::Uniform { rho } => {
            CorrelationModel::check_rho(*rho)?;
            Ok(CorrelationMatrix::uniform_unchecked(m, *rho))
        }
        CorrelationModel::ExponentialLinear { rho } => {
            exponential(*rho, &|i, k| i.abs_diff(k) as f64)
        }
        CorrelationModel::ExponentialGrid { rho, n_side } => {
            if n_side * n_side != m {
                return Err(Error::Dimension(format!(
                    "exponential grid with side {n_side} has {} elements, requested {m}",
                    n_side * n_side
                )));
            }
            let n = *n_side;
            exponential(*rho, &move |i, k| {
                let dr = (i / n).abs_diff(k / n) as f64;
                let dc = (i % n).abs_diff(k % n) as f64;
                dr.hypot(dc)
            })
        }
        CorrelationModel::Custom { path } => {
            let rows = read_matrix_csv(path)?;
            if rows.len() != m {
                return Err(Error::Dimension(format!(
                    "{} holds a {}×{} matrix, requested {m} elements",
                    path.display(),
                    rows.len(),
                    rows.len()
                )));
            }
            CorrelationMatrix::from_rows(&rows)
        }
    }
}

/// Reads a headerless CSV of `M` rows with `M` reals each.
pub fn read_matrix_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    let file_error = |message: String| Error::MatrixFile {
        path: path.display().to_string(),
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| file_error(e.to_string()))?;
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| file_error(e.to_string()))?;
        let row = record
            .iter()
            .map(|field| {
                field
                    .parse::<f64>()
                    .map_err(|e| file_error(format!("line {}: `{field}`: {e}", line + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(file_error("file is empty".into()));
    }
    Ok(rows)
}

/// A single failed check; indices are zero-based.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NotSquare {
        row: usize,
        len: usize,
        expected: usize,
    },
    NonFinite {
        i: usize,
        k: usize,
    },
    Asymmetric {
        i: usize,
        k: usize,
        difference: f64,
    },
    Diagonal {
        i: usize,
        value: f64,
    },
    OutOfRange {
        i: usize,
        k: usize,
        value: f64,
    },
    NotPositiveSemidefinite {
        min_eigenvalue: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotSquare { row, len, expected } => {
                write!(f, "row {row} has {len} entries, expected {expected}")
            }
            Violation::NonFinite { i, k } => write!(f, "entry ({i}, {k}) is not finite"),
            Violation::Asymmetric { i, k, difference } => {
                write!(
                    f,
                    "entries ({i}, {k}) and ({k}, {i}) differ by {difference:e}"
                )
            }
            Violation::Diagonal { i, value } => {
                write!(f, "diagonal entry ({i}, {i}) is {value}, expected 1")
            }
            Violation::OutOfRange { i, k, value } => {
                write!(f, "entry ({i}, {k}) = {value} is outside [0, 1]")
            }
            Violation::NotPositiveSemidefinite { min_eigenvalue } => {
                write!(
                    f,
                    "smallest eigenvalue {min_eigenvalue:e} is below -{PSD_TOLERANCE:e}"
                )
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub issues: Vec<Violation>,
    /// Smallest eigenvalue, when the matrix was well-formed enough to compute it.
    pub min_eigenvalue: Option<f64>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Checks shape, symmetry, unit diagonal, entry range and positive semidefiniteness.
#[allow(clippy::needless_range_loop)] // symmetric access needs both rows[i][k] and rows[k][i]
pub fn validate(rows: &[Vec<f64>]) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n = rows.len();
    if n == 0 {
        report.issues.push(Violation::NotSquare {
            row: 0,
            len: 0,
            expected: 1,
        });
        return report;
    }
    for (row, r) in rows.iter().enumerate() {
        if r.len() != n {
            report.issues.push(Violation::NotSquare {
                row,
                len: r.len(),
                expected: n,
            });
        }
    }
    if !report.issues.is_empty() {
        return report;
    }
    for i in 0..n {
        for k in 0..n {
            let v = rows[i][k];
            if !v.is_finite() {
                report.issues.push(Violation::NonFinite { i, k });
                continue;
            }
            if i == k {
                if v != 1.0 {
                    report.issues.push(Violation::Diagonal { i, value: v });
                }
            } else if !(0.0..=1.0).contains(&v) {
                report.issues.push(Violation::OutOfRange { i, k, value: v });
            }
            if k > i && rows[k][i].is_finite() {
                let difference = (v - rows[k][i]).abs();
                if difference > SYMMETRY_TOLERANCE {
                    report
                        .issues
                        .push(Violation::Asymmetric { i, k, difference });
                }
            }
        }
    }
    if report
        .issues
        .iter()
        .any(|v| matches!(v, Violation::NonFinite { .. }))
    {
        return report;
    }
    let mut flat = Vec::with_capacity(n * n);
    for i in 0..n {
        for k in 0..n {
            flat.push(0.5 * (rows[i][k] + rows[k][i]));
        }
    }
    let eigen = symmetric_eigen(n, &flat);
    let min = eigen.values.iter().copied().fold(f64::INFINITY, f64::min);
    report.min_eigenvalue = Some(min);
    if min < -PSD_TOLERANCE {
        report.issues.push(Violation::NotPositiveSemidefinite {
            min_eigenvalue: min,
        });
    }
    report
}

/// Eigen-decomposition of a symmetric matrix. `vectors` is row-major with
/// the eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<f64>,
}

/// Cyclic Jacobi rotations until the off-diagonal Frobenius norm falls below
/// `1e-12` (relative to the matrix norm when that exceeds one).
pub fn symmetric_eigen(n: usize, matrix: &[f64]) -> SymmetricEigen {
    assert_eq!(matrix.len(), n * n, "matrix must be n×n");
    let mut a = matrix.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| a[p * n + q] * a[p * n + q])
            .sum::<f64>()
            * 2.0;
        if off.sqrt() <= JACOBI_OFF_DIAGONAL_TOL * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    SymmetricEigen {
        values: (0..n).map(|i| a[i * n + i]).collect(),
        vectors: v,
    }
}

/// Symmetric square root `A` with `A Aᵀ = R`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationFactor {
    dim: usize,
    entries: Vec<f64>,
    identity: bool,
}

impl CorrelationFactor {
    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![0.0; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = 1.0;
        }
        Self {
            dim,
            entries,
            identity: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.entries[i * self.dim + k]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    /// `out = A · input`.
    pub fn apply(&self, input: &[Complex64], out: &mut [Complex64]) {
        debug_assert_eq!(input.len(), self.dim);
        debug_assert_eq!(out.len(), self.dim);
        if self.identity {
            out.copy_from_slice(input);
            return;
        }
        for (row, o) in self.entries.chunks_exact(self.dim).zip(out.iter_mut()) {
            let (mut re, mut im) = (0.0, 0.0);
            for (a, z) in row.iter().zip(input) {
                re += a * z.re;
                im += a * z.im;
            }
            *o = Complex64::new(re, im);
        }
    }

    /// `A Aᵀ`, row-major.
    pub fn reconstruct(&self) -> Vec<f64> {
        let n = self.dim;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                out[i * n + k] = (0..n).map(|j| self.get(i, j) * self.get(k, j)).sum();
            }
        }
        out
    }

    /// `max |A Aᵀ − R|`.
    pub fn residual(&self, r: &CorrelationMatrix) -> f64 {
        self.reconstruct()
            .iter()
            .zip(r.as_slice())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Symmetric PSD square root through the eigen-decomposition; small negative
/// eigenvalues are clamped to zero so singular matrices (full correlation) factor.
pub fn sqrt_psd(r: &CorrelationMatrix) -> Result<CorrelationFactor> {
    let n = r.dim();
    if r.is_identity() {
        return Ok(CorrelationFactor::identity(n));
    }
    let eigen = symmetric_eigen(n, r.as_slice());
    let min = eigen.values.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -FACTOR_CLAMP_TOLERANCE {
        return Err(Error::NotPositiveSemidefinite {
            min_eigenvalue: min,
        });
    }
    // Rounding-level eigenvalues would otherwise add O(sqrt(eps)) noise to the factor.
    let max = eigen.values.iter().copied().fold(0.0, f64::max);
    let floor = RELATIVE_EIGEN_FLOOR * max;
    let roots: Vec<f64> = eigen
        .values
        .iter()
        .map(|&l| if l <= floor { 0.0 } else { l.sqrt() })
        .collect();
    let v = &eigen.vectors;
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        for k in i..n {
            let s: f64 = (0..n).map(|j| v[i * n + j] * roots[j] * v[k * n + j]).sum();
            entries[i * n + k] = s;
            entries[k * n + i] = s;
        }
    }
    Ok(CorrelationFactor {
        dim: n,
        entries,
        identity: false,
    })
}
