//! Exact finite-dimensional complex operator algebra.
//!
//! [`Operator`] is the universal carrier for every matrix in this crate:
//! algebra elements, Dirac operators, probes, represented forms. Storage is
//! dense by default, but four structured layouts (diagonal, 2x2 blocks of
//! diagonals, banded, circulant) are tracked through products, sums,
//! adjoints and commutators so that large truncations never touch an
//! `O(dim^2)` array. Every structured result agrees with the dense path
//! entry for entry; the test suite checks this on small dimensions.
//!
//! Index conventions:
//! * entries are row-major, `entry(row, col)`;
//! * `kron(a, b)` puts the left factor on the outer index, so
//!   `kron(a, b).entry(i1*n + j1, i2*n + j2) = a[(i1,i2)] * b[(j1,j2)]`
//!   with `n = b.dim()`;
//! * `matrix_unit(i, j, n)` uses 1-based `i`, `j` and maps the j-th basis
//!   vector to the i-th.

use num_complex::Complex64;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

use crate::fourier;

/// Shorthand for a complex scalar.
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Largest dimension at which a mixed-storage operation is allowed to fall
/// back to dense arithmetic. Structured model code never reaches this path
/// at large sizes; hitting the limit indicates a construction bug upstream.
pub const DENSE_FALLBACK_LIMIT: usize = 4096;

/// Dimension up to which banded norms are computed by the exact dense SVD
/// route instead of power iteration.
const BANDED_EXACT_NORM_LIMIT: usize = 64;

#[derive(Debug, Error)]
pub enum OperatorError {
    #[error("entry array has {found} elements, expected {expected} for dimension {dim}")]
    EntryCount {
        dim: usize,
        expected: usize,
        found: usize,
    },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("matrix unit index ({i},{j}) out of range for dimension {dim} (indices are 1-based)")]
    IndexOutOfRange { i: usize, j: usize, dim: usize },
    #[error("operator declared hermitian but the non-hermitian defect is {defect:.3e}")]
    HermitianHintViolated { defect: f64 },
    #[error("dimension must be positive")]
    ZeroDimension,
}

/// Storage layout. The variants other than `Dense` are exact fast paths,
/// not approximations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StorageKind {
    Dense,
    Diagonal,
    BlockTwo,
    Banded,
    Circulant,
}

#[derive(Clone)]
enum Storage {
    /// Row-major `dim*dim` array.
    Dense(Vec<Complex64>),
    /// Diagonal entries.
    Diagonal(Vec<Complex64>),
    /// 2x2 block matrix with diagonal blocks; `blocks[2*r + c]` holds the
    /// diagonal of block `(r, c)`, each of length `half`, flat index
    /// `r*half + k`.
    BlockTwo {
        half: usize,
        blocks: [Vec<Complex64>; 4],
    },
    /// Band storage: `diags[t]` is the diagonal at offset `o = t - lo`
    /// (offset = col - row), holding `dim - |o|` entries indexed by
    /// `min(row, col)`.
    Banded {
        lo: usize,
        hi: usize,
        diags: Vec<Vec<Complex64>>,
    },
    /// Circulant: `entry(r, c) = coeffs[(r - c) mod dim]`.
    Circulant(Vec<Complex64>),
}

/// A finite-dimensional complex linear operator.
#[derive(Clone)]
pub struct Operator {
    dim: usize,
    storage: Storage,
    hermitian_hint: Option<bool>,
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Operator(dim={}, {:?})", self.dim, self.storage_kind())
    }
}

// ---------------------------------------------------------------------------
// construction
// ---------------------------------------------------------------------------

impl Operator {
    /// Dense operator from a row-major entry array of length `dim*dim`.
    pub fn from_entries(dim: usize, entries: Vec<Complex64>) -> Result<Self, OperatorError> {
        if dim == 0 {
            return Err(OperatorError::ZeroDimension);
        }
        if entries.len() != dim * dim {
            return Err(OperatorError::EntryCount {
                dim,
                expected: dim * dim,
                found: entries.len(),
            });
        }
        Ok(Self {
            dim,
            storage: Storage::Dense(entries),
            hermitian_hint: None,
        })
    }

    /// Dense operator from real row-major entries.
    pub fn from_real_entries(dim: usize, entries: &[f64]) -> Result<Self, OperatorError> {
        Self::from_entries(dim, entries.iter().map(|&x| c64(x, 0.0)).collect())
    }

    /// Diagonal operator.
    pub fn diagonal(entries: Vec<Complex64>) -> Self {
        assert!(!entries.is_empty(), "diagonal operator needs dim >= 1");
        let real = entries.iter().all(|z| z.im == 0.0);
        Self {
            dim: entries.len(),
            storage: Storage::Diagonal(entries),
            hermitian_hint: if real { Some(true) } else { None },
        }
    }

    /// Diagonal operator with real entries.
    pub fn diagonal_real(entries: &[f64]) -> Self {
        Self::diagonal(entries.iter().map(|&x| c64(x, 0.0)).collect())
    }

    /// 2x2 block operator with diagonal blocks, total dimension `2*half`.
    /// `blocks = [b11, b12, b21, b22]`, each of length `half`.
    pub fn block_two(half: usize, blocks: [Vec<Complex64>; 4]) -> Self {
        assert!(half > 0);
        for b in &blocks {
            assert_eq!(b.len(), half, "block diagonal length must equal half");
        }
        Self {
            dim: 2 * half,
            storage: Storage::BlockTwo { half, blocks },

            hermitian_hint: None,
        }
    }

    /// Banded operator from `(offset, diagonal)` pairs; offset = col - row,
    /// diagonal length must be `dim - |offset|`.
    pub fn banded(dim: usize, diagonals: Vec<(i64, Vec<Complex64>)>) -> Self {
        assert!(dim > 0);
        let lo = diagonals
            .iter()
            .map(|(o, _)| if *o < 0 { (-*o) as usize } else { 0 })
            .max()
            .unwrap_or(0);
        let hi = diagonals
            .iter()
            .map(|(o, _)| if *o > 0 { *o as usize } else { 0 })
            .max()
            .unwrap_or(0);
        assert!(lo < dim && hi < dim, "band offsets must be < dim");
        let mut diags: Vec<Vec<Complex64>> = (0..=lo + hi)
            .map(|t| {
                let o = t as i64 - lo as i64;
                vec![ZERO; dim - o.unsigned_abs() as usize]
            })
            .collect();
        for (o, d) in diagonals {
            let t = (o + lo as i64) as usize;
            assert_eq!(d.len(), dim - o.unsigned_abs() as usize);
            for (dst, src) in diags[t].iter_mut().zip(&d) {
                *dst += *src;
            }
        }
        Self {
            dim,
            storage: Storage::Banded { lo, hi, diags },
            hermitian_hint: None,
        }
    }

    /// Banded Toeplitz operator: `entry(r, c) = coeff(c - r)` for the given
    /// offsets, zero elsewhere.
    pub fn toeplitz_banded(dim: usize, coeffs: &[(i64, Complex64)]) -> Self {
        let diagonals = coeffs
            .iter()
            .filter(|(o, _)| (o.unsigned_abs() as usize) < dim)
            .map(|&(o, z)| (o, vec![z; dim - o.unsigned_abs() as usize]))
            .collect();
        Self::banded(dim, diagonals)
    }

    /// Circulant operator with first column `coeffs`.
    pub fn circulant(coeffs: Vec<Complex64>) -> Self {
        assert!(!coeffs.is_empty());
        Self {
            dim: coeffs.len(),
            storage: Storage::Circulant(coeffs),
            hermitian_hint: None,
        }
    }

    /// Identity.
    pub fn identity(dim: usize) -> Self {
        Self::diagonal(vec![c64(1.0, 0.0); dim])
    }

    /// Zero operator (diagonal storage).
    pub fn zeros(dim: usize) -> Self {
        Self::diagonal(vec![ZERO; dim])
    }

    /// Attach the advisory hermitian hint. Setting it to `true` verifies
    /// that the non-hermitian defect is at most `1e-12 * max|entry|`.
    pub fn with_hermitian_hint(mut self, hint: bool) -> Result<Self, OperatorError> {
        if hint {
            let defect = self.hermiticity_defect();
            let scale = self.max_abs_entry();
            if defect > 1e-12 * scale {
                return Err(OperatorError::HermitianHintViolated { defect });
            }
        }
        self.hermitian_hint = Some(hint);
        Ok(self)
    }

    pub fn hermitian_hint(&self) -> Option<bool> {
        self.hermitian_hint
    }
}

/// Build an operator from explicit entries.
pub fn make_operator(dim: usize, entries: Vec<Complex64>) -> Result<Operator, OperatorError> {
    Operator::from_entries(dim, entries)
}

/// The elementary matrix `m_ij` of dimension `n` (1-based indices): a single
/// 1 at row `i`, column `j`, mapping `e_j` to `e_i`.
pub fn matrix_unit(i: usize, j: usize, n: usize) -> Result<Operator, OperatorError> {
    if i == 0 || j == 0 || i > n || j > n {
        return Err(OperatorError::IndexOutOfRange { i, j, dim: n });
    }
    let mut entries = vec![ZERO; n * n];
    entries[(i - 1) * n + (j - 1)] = c64(1.0, 0.0);
    Operator::from_entries(n, entries)
}

// ---------------------------------------------------------------------------
// entry access and shape
// ---------------------------------------------------------------------------

impl Operator {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn storage_kind(&self) -> StorageKind {
        match &self.storage {
            Storage::Dense(_) => StorageKind::Dense,
            Storage::Diagonal(_) => StorageKind::Diagonal,
            Storage::BlockTwo { .. } => StorageKind::BlockTwo,
            Storage::Banded { .. } => StorageKind::Banded,
            Storage::Circulant(_) => StorageKind::Circulant,
        }
    }

    /// Entry at `(row, col)`, zero-based.
    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        debug_assert!(row < self.dim && col < self.dim);
        match &self.storage {
            Storage::Dense(e) => e[row * self.dim + col],
            Storage::Diagonal(d) => {
                if row == col {
                    d[row]
                } else {
                    ZERO
                }
            }
            Storage::BlockTwo { half, blocks } => {
                let (r, k) = (row / half, row % half);
                let (c, l) = (col / half, col % half);
                if k == l {
                    blocks[2 * r + c][k]
                } else {
                    ZERO
                }
            }
            Storage::Banded { lo, hi, diags } => {
                let o = col as i64 - row as i64;
                if o < -(*lo as i64) || o > *hi as i64 {
                    ZERO
                } else {
                    diags[(o + *lo as i64) as usize][row.min(col)]
                }
            }
            Storage::Circulant(c) => c[(row + self.dim - col) % self.dim],
        }
    }

    /// Row-major dense copy of all entries.
    pub fn dense_entries(&self) -> Vec<Complex64> {
        match &self.storage {
            Storage::Dense(e) => e.clone(),
            _ => {
                let n = self.dim;
                let mut out = vec![ZERO; n * n];
                match &self.storage {
                    Storage::Diagonal(d) => {
                        for (i, &z) in d.iter().enumerate() {
                            out[i * n + i] = z;
                        }
                    }
                    Storage::BlockTwo { half, blocks } => {
                        for r in 0..2 {
                            for c in 0..2 {
                                for k in 0..*half {
                                    out[(r * half + k) * n + (c * half + k)] =
                                        blocks[2 * r + c][k];
                                }
                            }
                        }
                    }
                    Storage::Banded { lo, diags, .. } => {
                        for t in 0..diags.len() {
                            let o = t as i64 - *lo as i64;
                            for (idx, &z) in diags[t].iter().enumerate() {
                                let (row, col) = if o >= 0 {
                                    (idx, idx + o as usize)
                                } else {
                                    (idx + (-o) as usize, idx)
                                };
                                out[row * n + col] = z;
                            }
                        }
                    }
                    Storage::Circulant(cf) => {
                        for row in 0..n {
                            for col in 0..n {
                                out[row * n + col] = cf[(row + n - col) % n];
                            }
                        }
                    }
                    Storage::Dense(_) => unreachable!(),
                }
                out
            }
        }
    }

    /// Densely stored copy.
    pub fn to_dense(&self) -> Operator {
        Operator {
            dim: self.dim,
            storage: Storage::Dense(self.dense_entries()),
            hermitian_hint: self.hermitian_hint,
        }
    }

    pub fn max_abs_entry(&self) -> f64 {
        let max_norm = |v: &[Complex64]| v.iter().map(|z| z.norm()).fold(0.0, f64::max);
        match &self.storage {
            Storage::Dense(e) => max_norm(e),
            Storage::Diagonal(d) => max_norm(d),
            Storage::BlockTwo { blocks, .. } => blocks.iter().map(|b| max_norm(b)).fold(0.0, f64::max),
            Storage::Banded { diags, .. } => diags.iter().map(|b| max_norm(b)).fold(0.0, f64::max),
            Storage::Circulant(c) => max_norm(c),
        }
    }

    /// Largest `|A_ij - conj(A_ji)|` over all entries.
    pub fn hermiticity_defect(&self) -> f64 {
        match &self.storage {
            Storage::Dense(e) => {
                let n = self.dim;
                let mut worst = 0.0f64;
                for i in 0..n {
                    for j in i..n {
                        let d = (e[i * n + j] - e[j * n + i].conj()).norm();
                        worst = worst.max(d);
                    }
                }
                worst
            }
            Storage::Diagonal(d) => d.iter().map(|z| 2.0 * z.im.abs()).fold(0.0, f64::max),
            Storage::BlockTwo { half, blocks } => {
                let mut worst = 0.0f64;
                for k in 0..*half {
                    worst = worst.max(2.0 * blocks[0][k].im.abs());
                    worst = worst.max(2.0 * blocks[3][k].im.abs());
                    worst = worst.max((blocks[1][k] - blocks[2][k].conj()).norm());
                }
                worst
            }
            _ => {
                // banded / circulant: compare against the adjoint entrywise
                let adj = self.adjoint();
                let mut worst = 0.0f64;
                match (&self.storage, &adj.storage) {
                    (Storage::Banded { lo, diags, .. }, _) => {
                        for t in 0..diags.len() {
                            let o = t as i64 - *lo as i64;
                            for (idx, &z) in diags[t].iter().enumerate() {
                                let (row, col) = if o >= 0 {
                                    (idx, idx + o as usize)
                                } else {
                                    (idx + (-o) as usize, idx)
                                };
                                worst = worst.max((z - adj.entry(row, col)).norm());
                            }
                        }
                    }
                    (Storage::Circulant(c), Storage::Circulant(ca)) => {
                        for (a, b) in c.iter().zip(ca.iter()) {
                            worst = worst.max((a - b).norm());
                        }
                    }
                    _ => unreachable!(),
                }
                worst
            }
        }
    }

    /// True when the non-hermitian defect is within `1e-10 * (1 + max|entry|)`.
    pub fn is_hermitian_within_default(&self) -> bool {
        self.hermiticity_defect() <= 1e-10 * (1.0 + self.max_abs_entry())
    }

    pub fn trace(&self) -> Complex64 {
        match &self.storage {
            Storage::Dense(e) => (0..self.dim).map(|i| e[i * self.dim + i]).sum(),
            Storage::Diagonal(d) => d.iter().sum(),
            Storage::BlockTwo { blocks, .. } => {
                blocks[0].iter().sum::<Complex64>() + blocks[3].iter().sum::<Complex64>()
            }
            Storage::Banded { lo, diags, .. } => diags[*lo].iter().sum(),
            Storage::Circulant(c) => c[0] * self.dim as f64,
        }
    }

    /// Max entrywise difference against another operator.
    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        assert_eq!(self.dim, other.dim, "max_abs_diff: dimension mismatch");
        self.add_scaled(other, c64(-1.0, 0.0)).max_abs_entry()
    }

    pub fn is_zero_within(&self, tol: f64) -> bool {
        self.max_abs_entry() <= tol
    }
}

// ---------------------------------------------------------------------------
// adjoint, sums, scaling
// ---------------------------------------------------------------------------

impl Operator {
    /// Conjugate transpose.
    pub fn adjoint(&self) -> Operator {
        let storage = match &self.storage {
            Storage::Dense(e) => {
                let n = self.dim;
                let mut out = vec![ZERO; n * n];
                for i in 0..n {
                    for j in 0..n {
                        out[j * n + i] = e[i * n + j].conj();
                    }
                }
                Storage::Dense(out)
            }
            Storage::Diagonal(d) => Storage::Diagonal(d.iter().map(|z| z.conj()).collect()),
            Storage::BlockTwo { half, blocks } => Storage::BlockTwo {
                half: *half,
                blocks: [
                    blocks[0].iter().map(|z| z.conj()).collect(),
                    blocks[2].iter().map(|z| z.conj()).collect(),
                    blocks[1].iter().map(|z| z.conj()).collect(),
                    blocks[3].iter().map(|z| z.conj()).collect(),
                ],
            },
            Storage::Banded { lo, hi, diags } => Storage::Banded {
                lo: *hi,
                hi: *lo,
                diags: diags
                    .iter()
                    .rev()
                    .map(|d| d.iter().map(|z| z.conj()).collect())
                    .collect(),
            },
            Storage::Circulant(c) => {
                let n = self.dim;
                let mut out = vec![ZERO; n];
                for k in 0..n {
                    out[k] = c[(n - k) % n].conj();
                }
                Storage::Circulant(out)
            }
        };
        Operator {
            dim: self.dim,
            storage,
            hermitian_hint: self.hermitian_hint,
        }
    }

    /// Scalar multiple.
    pub fn scale(&self, alpha: Complex64) -> Operator {
        let map = |v: &[Complex64]| v.iter().map(|z| alpha * z).collect::<Vec<_>>();
        let storage = match &self.storage {
            Storage::Dense(e) => Storage::Dense(map(e)),
            Storage::Diagonal(d) => Storage::Diagonal(map(d)),
            Storage::BlockTwo { half, blocks } => Storage::BlockTwo {
                half: *half,
                blocks: [map(&blocks[0]), map(&blocks[1]), map(&blocks[2]), map(&blocks[3])],
            },
            Storage::Banded { lo, hi, diags } => Storage::Banded {
                lo: *lo,
                hi: *hi,
                diags: diags.iter().map(|d| map(d)).collect(),
            },
            Storage::Circulant(c) => Storage::Circulant(map(c)),
        };
        Operator {
            dim: self.dim,
            storage,
            hermitian_hint: None,
        }
    }

    /// `self + alpha * other`, preserving structure where the layouts match.
    pub fn add_scaled(&self, other: &Operator, alpha: Complex64) -> Operator {
        assert_eq!(self.dim, other.dim, "add: dimension mismatch");
        let dim = self.dim;
        match (&self.storage, &other.storage) {
            (Storage::Diagonal(a), Storage::Diagonal(b)) => Operator {
                dim,
                storage: Storage::Diagonal(
                    a.iter().zip(b).map(|(x, y)| x + alpha * y).collect(),
                ),
                hermitian_hint: None,
            },
            (Storage::BlockTwo { .. }, Storage::BlockTwo { .. })
            | (Storage::BlockTwo { .. }, Storage::Diagonal(_))
            | (Storage::Diagonal(_), Storage::BlockTwo { .. }) => {
                let a = self.as_block_two().expect("even dimension");
                let b = other.as_block_two().expect("even dimension");
                let half = dim / 2;
                let mut blocks: [Vec<Complex64>; 4] = Default::default();
                for t in 0..4 {
                    blocks[t] = a[t].iter().zip(&b[t]).map(|(x, y)| x + alpha * y).collect();
                }
                Operator {
                    dim,
                    storage: Storage::BlockTwo { half, blocks },
                    hermitian_hint: None,
                }
            }
            (Storage::Banded { .. }, Storage::Banded { .. })
            | (Storage::Banded { .. }, Storage::Diagonal(_))
            | (Storage::Diagonal(_), Storage::Banded { .. }) => {
                let (alo, ahi, adiags) = self.as_band_parts();
                let (blo, bhi, bdiags) = other.as_band_parts();
                let lo = alo.max(blo);
                let hi = ahi.max(bhi);
                let mut diags: Vec<Vec<Complex64>> = (0..=lo + hi)
                    .map(|t| {
                        let o = t as i64 - lo as i64;
                        vec![ZERO; dim - o.unsigned_abs() as usize]
                    })
                    .collect();
                let mut fold = |plo: usize, pdiags: &[Vec<Complex64>], factor: Complex64| {
                    for (t, d) in pdiags.iter().enumerate() {
                        let o = t as i64 - plo as i64;
                        let dst = &mut diags[(o + lo as i64) as usize];
                        for (x, y) in dst.iter_mut().zip(d) {
                            *x += factor * y;
                        }
                    }
                };
                fold(alo, &adiags, c64(1.0, 0.0));
                fold(blo, &bdiags, alpha);
                Operator {
                    dim,
                    storage: Storage::Banded { lo, hi, diags },
                    hermitian_hint: None,
                }
            }
            (Storage::Circulant(a), Storage::Circulant(b)) => Operator {
                dim,
                storage: Storage::Circulant(
                    a.iter().zip(b).map(|(x, y)| x + alpha * y).collect(),
                ),
                hermitian_hint: None,
            },
            _ => {
                assert!(
                    dim <= DENSE_FALLBACK_LIMIT,
                    "dense fallback (add) at dim {dim} exceeds the supported limit"
                );
                let mut e = self.dense_entries();
                let f = other.dense_entries();
                for (x, y) in e.iter_mut().zip(f) {
                    *x += alpha * y;
                }
                Operator {
                    dim,
                    storage: Storage::Dense(e),
                    hermitian_hint: None,
                }
            }
        }
    }

    /// Block view, promoting diagonal storage of even dimension.
    fn as_block_two(&self) -> Option<[Vec<Complex64>; 4]> {
        match &self.storage {
            Storage::BlockTwo { blocks, .. } => Some(blocks.clone()),
            Storage::Diagonal(d) if self.dim % 2 == 0 => {
                let half = self.dim / 2;
                Some([
                    d[..half].to_vec(),
                    vec![ZERO; half],
                    vec![ZERO; half],
                    d[half..].to_vec(),
                ])
            }
            _ => None,
        }
    }

    /// Band view `(lo, hi, diags)`, promoting diagonal storage.
    fn as_band_parts(&self) -> (usize, usize, Vec<Vec<Complex64>>) {
        match &self.storage {
            Storage::Banded { lo, hi, diags } => (*lo, *hi, diags.clone()),
            Storage::Diagonal(d) => (0, 0, vec![d.clone()]),
            _ => unreachable!("as_band_parts on non-banded storage"),
        }
    }
}

// ---------------------------------------------------------------------------
// products
// ---------------------------------------------------------------------------

/// Matrix product; errors on dimension mismatch.
pub fn multiply(a: &Operator, b: &Operator) -> Result<Operator, OperatorError> {
    if a.dim != b.dim {
        return Err(OperatorError::DimensionMismatch {
            left: a.dim,
            right: b.dim,
        });
    }
    Ok(a.mul_impl(b))
}

/// Commutator `[a, b] = ab - ba`; errors on dimension mismatch.
pub fn commutator(a: &Operator, b: &Operator) -> Result<Operator, OperatorError> {
    let ab = multiply(a, b)?;
    let ba = multiply(b, a)?;
    Ok(ab.add_scaled(&ba, c64(-1.0, 0.0)))
}

impl Operator {
    fn mul_impl(&self, other: &Operator) -> Operator {
        let dim = self.dim;
        match (&self.storage, &other.storage) {
            (Storage::Diagonal(a), Storage::Diagonal(b)) => Operator {
                dim,
                storage: Storage::Diagonal(a.iter().zip(b).map(|(x, y)| x * y).collect()),
                hermitian_hint: None,
            },
            (Storage::BlockTwo { .. }, Storage::BlockTwo { .. })
            | (Storage::BlockTwo { .. }, Storage::Diagonal(_))
            | (Storage::Diagonal(_), Storage::BlockTwo { .. }) => {
                let a = self.as_block_two().expect("even dimension");
                let b = other.as_block_two().expect("even dimension");
                let half = dim / 2;
                let mut blocks: [Vec<Complex64>; 4] = [
                    vec![ZERO; half],
                    vec![ZERO; half],
                    vec![ZERO; half],
                    vec![ZERO; half],
                ];
                for r in 0..2 {
                    for c in 0..2 {
                        for k in 0..half {
                            blocks[2 * r + c][k] =
                                a[2 * r][k] * b[c][k] + a[2 * r + 1][k] * b[2 + c][k];
                        }
                    }
                }
                Operator {
                    dim,
                    storage: Storage::BlockTwo { half, blocks },
                    hermitian_hint: None,
                }
            }
            (Storage::Diagonal(d), Storage::Banded { lo, hi, diags }) => {
                // row scaling: (D B)(r, c) = d_r * B(r, c)
                let mut out = diags.clone();
                for t in 0..out.len() {
                    let o = t as i64 - *lo as i64;
                    for (idx, z) in out[t].iter_mut().enumerate() {
                        let row = if o >= 0 { idx } else { idx + (-o) as usize };
                        *z *= d[row];
                    }
                }
                Operator {
                    dim,
                    storage: Storage::Banded {
                        lo: *lo,
                        hi: *hi,
                        diags: out,
                    },
                    hermitian_hint: None,
                }
            }
            (Storage::Banded { lo, hi, diags }, Storage::Diagonal(d)) => {
                // column scaling
                let mut out = diags.clone();
                for t in 0..out.len() {
                    let o = t as i64 - *lo as i64;
                    for (idx, z) in out[t].iter_mut().enumerate() {
                        let col = if o >= 0 { idx + o as usize } else { idx };
                        *z *= d[col];
                    }
                }
                Operator {
                    dim,
                    storage: Storage::Banded {
                        lo: *lo,
                        hi: *hi,
                        diags: out,
                    },
                    hermitian_hint: None,
                }
            }
            (
                Storage::Banded {
                    lo: alo,
                    hi: ahi,
                    diags: _,
                },
                Storage::Banded {
                    lo: blo,
                    hi: bhi,
                    diags: _,
                },
            ) => {
                let lo = (alo + blo).min(dim - 1);
                let hi = (ahi + bhi).min(dim - 1);
                let mut diags: Vec<Vec<Complex64>> = (0..=lo + hi)
                    .map(|t| {
                        let o = t as i64 - lo as i64;
                        vec![ZERO; dim - o.unsigned_abs() as usize]
                    })
                    .collect();
                // C(r, c) = sum_k A(r, k) B(k, c); iterate offsets
                for oa in -(*alo as i64)..=*ahi as i64 {
                    for ob in -(*blo as i64)..=*bhi as i64 {
                        let oc = oa + ob;
                        if oc < -(lo as i64) || oc > hi as i64 {
                            continue;
                        }
                        let t = (oc + lo as i64) as usize;
                        for row in 0..dim {
                            let mid = row as i64 + oa;
                            let col = row as i64 + oc;
                            if mid < 0 || mid >= dim as i64 || col < 0 || col >= dim as i64 {
                                continue;
                            }
                            let val = self.entry(row, mid as usize)
                                * other.entry(mid as usize, col as usize);
                            if val != ZERO {
                                let idx = row.min(col as usize);
                                diags[t][idx] += val;
                            }
                        }
                    }
                }
                Operator {
                    dim,
                    storage: Storage::Banded { lo, hi, diags },
                    hermitian_hint: None,
                }
            }
            (Storage::Circulant(a), Storage::Circulant(b)) => {
                // cyclic convolution of first columns
                let n = dim;
                let mut out = vec![ZERO; n];
                for (k, o) in out.iter_mut().enumerate() {
                    let mut acc = ZERO;
                    for j in 0..n {
                        acc += a[j] * b[(k + n - j) % n];
                    }
                    *o = acc;
                }
                Operator {
                    dim,
                    storage: Storage::Circulant(out),
                    hermitian_hint: None,
                }
            }
            _ => {
                assert!(
                    dim <= DENSE_FALLBACK_LIMIT,
                    "dense fallback (mul) at dim {dim} exceeds the supported limit"
                );
                let a = self.dense_entries();
                let b = other.dense_entries();
                let mut out = vec![ZERO; dim * dim];
                for i in 0..dim {
                    for k in 0..dim {
                        let aik = a[i * dim + k];
                        if aik == ZERO {
                            continue;
                        }
                        let brow = &b[k * dim..(k + 1) * dim];
                        let orow = &mut out[i * dim..(i + 1) * dim];
                        for (o, &bv) in orow.iter_mut().zip(brow) {
                            *o += aik * bv;
                        }
                    }
                }
                Operator {
                    dim,
                    storage: Storage::Dense(out),
                    hermitian_hint: None,
                }
            }
        }
    }
}

/// Kronecker (tensor) product with the left factor on the outer index.
pub fn kron(a: &Operator, b: &Operator) -> Operator {
    let dim = a.dim * b.dim;
    match (&a.storage, &b.storage) {
        (Storage::Diagonal(da), Storage::Diagonal(db)) => {
            let mut d = Vec::with_capacity(dim);
            for x in da {
                for y in db {
                    d.push(x * y);
                }
            }
            Operator {
                dim,
                storage: Storage::Diagonal(d),
                hermitian_hint: None,
            }
        }
        (_, Storage::Diagonal(db)) if a.dim == 2 => {
            let half = b.dim;
            let mut blocks: [Vec<Complex64>; 4] = Default::default();
            for r in 0..2 {
                for c in 0..2 {
                    let arc = a.entry(r, c);
                    blocks[2 * r + c] = db.iter().map(|y| arc * y).collect();
                }
            }
            Operator {
                dim,
                storage: Storage::BlockTwo { half, blocks },
                hermitian_hint: None,
            }
        }
        _ => {
            assert!(
                dim <= DENSE_FALLBACK_LIMIT,
                "dense fallback (kron) at dim {dim} exceeds the supported limit"
            );
            let (na, nb) = (a.dim, b.dim);
            let mut out = vec![ZERO; dim * dim];
            for i1 in 0..na {
                for i2 in 0..na {
                    let av = a.entry(i1, i2);
                    if av == ZERO {
                        continue;
                    }
                    for j1 in 0..nb {
                        for j2 in 0..nb {
                            let bv = b.entry(j1, j2);
                            if bv == ZERO {
                                continue;
                            }
                            out[(i1 * nb + j1) * dim + (i2 * nb + j2)] = av * bv;
                        }
                    }
                }
            }
            Operator {
                dim,
                storage: Storage::Dense(out),
                hermitian_hint: None,
            }
        }
    }
}

// ---------------------------------------------------------------------------
// norms
// ---------------------------------------------------------------------------

impl Operator {
    /// Operator norm (largest singular value). Exact per storage except for
    /// large banded operators, where a deterministic power iteration on
    /// `A*A` is used (accurate to ~1e-10 for the diagnostics it serves).
    pub fn operator_norm(&self) -> f64 {
        match &self.storage {
            Storage::Dense(_) => {
                let sv = dense_singular_values(self);
                sv.first().copied().unwrap_or(0.0)
            }
            Storage::Diagonal(d) => d.iter().map(|z| z.norm()).fold(0.0, f64::max),
            Storage::BlockTwo { half, blocks } => {
                let mut worst = 0.0f64;
                for k in 0..*half {
                    let (smax, _) =
                        svd2(blocks[0][k], blocks[1][k], blocks[2][k], blocks[3][k]);
                    worst = worst.max(smax);
                }
                worst
            }
            Storage::Banded { .. } => {
                if self.dim <= BANDED_EXACT_NORM_LIMIT {
                    let sv = dense_singular_values(&self.to_dense());
                    sv.first().copied().unwrap_or(0.0)
                } else {
                    self.power_norm_estimate()
                }
            }
            Storage::Circulant(c) => fourier::dft_forward(c)
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max),
        }
    }

    /// Deterministic power iteration for `sqrt(lambda_max(A*A))`. The
    /// Rayleigh quotient increases monotonically, so the estimate is a
    /// tight lower bound; diagnostics that consume it tolerate far more
    /// than the ~1e-12 relative stall threshold used here.
    fn power_norm_estimate(&self) -> f64 {
        let n = self.dim;
        let mut v: Vec<Complex64> = (0..n)
            .map(|i| c64(1.0 + 1e-3 * (i as f64) / n as f64, 0.0))
            .collect();
        normalize(&mut v);
        let adj = self.adjoint();
        let mut prev = 0.0f64;
        for _ in 0..1000 {
            let w = self.apply(&v);
            let mut u = adj.apply(&w);
            let nu: f64 = w.iter().map(|z| z.norm_sqr()).sum();
            if (nu - prev).abs() <= 1e-13 * nu.max(f64::MIN_POSITIVE) {
                return nu.sqrt();
            }
            prev = nu;
            normalize(&mut u);
            v = u;
        }
        prev.sqrt()
    }

    /// Matrix-vector product.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.dim);
        let n = self.dim;
        match &self.storage {
            Storage::Dense(e) => {
                let mut y = vec![ZERO; n];
                for i in 0..n {
                    let row = &e[i * n..(i + 1) * n];
                    let mut acc = ZERO;
                    for (a, b) in row.iter().zip(x) {
                        acc += a * b;
                    }
                    y[i] = acc;
                }
                y
            }
            Storage::Diagonal(d) => d.iter().zip(x).map(|(a, b)| a * b).collect(),
            Storage::BlockTwo { half, blocks } => {
                let mut y = vec![ZERO; n];
                for k in 0..*half {
                    let (x1, x2) = (x[k], x[half + k]);
                    y[k] = blocks[0][k] * x1 + blocks[1][k] * x2;
                    y[half + k] = blocks[2][k] * x1 + blocks[3][k] * x2;
                }
                y
            }
            Storage::Banded { lo, diags, .. } => {
                let mut y = vec![ZERO; n];
                for (t, d) in diags.iter().enumerate() {
                    let o = t as i64 - *lo as i64;
                    if o >= 0 {
                        let o = o as usize;
                        for (idx, &z) in d.iter().enumerate() {
                            y[idx] += z * x[idx + o];
                        }
                    } else {
                        let s = (-o) as usize;
                        for (idx, &z) in d.iter().enumerate() {
                            y[idx + s] += z * x[idx];
                        }
                    }
                }
                y
            }
            Storage::Circulant(c) => {
                let mut y = vec![ZERO; n];
                for (i, o) in y.iter_mut().enumerate() {
                    let mut acc = ZERO;
                    for (j, &xv) in x.iter().enumerate() {
                        acc += c[(i + n - j) % n] * xv;
                    }
                    *o = acc;
                }
                y
            }
        }
    }
}

fn normalize(v: &mut [Complex64]) {
    let n: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if n > 0.0 {
        for z in v.iter_mut() {
            *z /= n;
        }
    }
}

/// Largest singular value, as a free function.
pub fn operator_norm(a: &Operator) -> f64 {
    a.operator_norm()
}

// ---------------------------------------------------------------------------
// sparse vectors and entry-oracle quadratic forms
// ---------------------------------------------------------------------------

/// A sparse column vector with sorted, unique indices.
#[derive(Clone, Debug)]
pub struct SparseVec {
    dim: usize,
    entries: Vec<(usize, Complex64)>,
}

impl SparseVec {
    pub fn new(dim: usize, mut entries: Vec<(usize, Complex64)>) -> Self {
        entries.sort_by_key(|&(i, _)| i);
        entries.dedup_by(|a, b| {
            if a.0 == b.0 {
                b.1 += a.1;
                true
            } else {
                false
            }
        });
        Self { dim, entries }
    }

    pub fn unit(dim: usize, index: usize) -> Self {
        Self {
            dim,
            entries: vec![(index, c64(1.0, 0.0))],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(usize, Complex64)] {
        &self.entries
    }

    /// `<self, other> = sum_i conj(self_i) * other_i`.
    pub fn dot_conj(&self, other: &SparseVec) -> Complex64 {
        let (mut i, mut j) = (0usize, 0usize);
        let mut acc = ZERO;
        while i < self.entries.len() && j < other.entries.len() {
            let (ia, va) = self.entries[i];
            let (ib, vb) = other.entries[j];
            match ia.cmp(&ib) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += va.conj() * vb;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }
}

impl Operator {
    /// True when columns and rows have small support, so sparse application
    /// stays sparse.
    pub fn supports_sparse_apply(&self) -> bool {
        matches!(
            self.storage,
            Storage::Diagonal(_) | Storage::BlockTwo { .. } | Storage::Banded { .. }
        )
    }

    fn for_column_support(&self, col: usize, f: &mut dyn FnMut(usize)) {
        match &self.storage {
            Storage::Dense(_) | Storage::Circulant(_) => {
                for i in 0..self.dim {
                    f(i);
                }
            }
            Storage::Diagonal(_) => f(col),
            Storage::BlockTwo { half, .. } => {
                let k = col % half;
                f(k);
                f(half + k);
            }
            Storage::Banded { lo, hi, .. } => {
                let start = col.saturating_sub(*hi);
                let end = (col + *lo).min(self.dim - 1);
                for i in start..=end {
                    f(i);
                }
            }
        }
    }

    fn for_row_support(&self, row: usize, f: &mut dyn FnMut(usize)) {
        match &self.storage {
            Storage::Dense(_) | Storage::Circulant(_) => {
                for j in 0..self.dim {
                    f(j);
                }
            }
            Storage::Diagonal(_) => f(row),
            Storage::BlockTwo { half, .. } => {
                let k = row % half;
                f(k);
                f(half + k);
            }
            Storage::Banded { lo, hi, .. } => {
                let start = row.saturating_sub(*lo);
                let end = (row + *hi).min(self.dim - 1);
                for j in start..=end {
                    f(j);
                }
            }
        }
    }

    /// `A v` for sparse `v`.
    pub fn apply_sparse(&self, v: &SparseVec) -> SparseVec {
        let mut acc: BTreeMap<usize, Complex64> = BTreeMap::new();
        for &(j, x) in v.entries() {
            self.for_column_support(j, &mut |i| {
                let a = self.entry(i, j);
                if a != ZERO {
                    *acc.entry(i).or_insert(ZERO) += a * x;
                }
            });
        }
        SparseVec {
            dim: self.dim,
            entries: acc.into_iter().collect(),
        }
    }

    /// `A* v` for sparse `v`, without materializing the adjoint.
    pub fn apply_adjoint_sparse(&self, v: &SparseVec) -> SparseVec {
        let mut acc: BTreeMap<usize, Complex64> = BTreeMap::new();
        for &(j, x) in v.entries() {
            self.for_row_support(j, &mut |i| {
                let a = self.entry(j, i).conj();
                if a != ZERO {
                    *acc.entry(i).or_insert(ZERO) += a * x;
                }
            });
        }
        SparseVec {
            dim: self.dim,
            entries: acc.into_iter().collect(),
        }
    }

    /// `sum_j A(row, j) v_j` over the support of `v`.
    pub fn row_dot(&self, row: usize, v: &SparseVec) -> Complex64 {
        let mut acc = ZERO;
        for &(j, x) in v.entries() {
            let a = self.entry(row, j);
            if a != ZERO {
                acc += a * x;
            }
        }
        acc
    }

    /// `<v, A v>` via the entry oracle (small support) or a sparse apply.
    pub fn quadratic_form(&self, v: &SparseVec) -> Complex64 {
        if v.nnz() <= 8 {
            let mut acc = ZERO;
            for &(i, vi) in v.entries() {
                acc += vi.conj() * self.row_dot(i, v);
            }
            acc
        } else {
            v.dot_conj(&self.apply_sparse(v))
        }
    }
}

/// `<v, A B v>` without materializing the product `A B`.
///
/// Chooses between `<v, A(Bv)>` and `<A* v, B v>` depending on which factor
/// keeps sparse vectors sparse; either route is exact.
pub fn product_quadratic_form(a: &Operator, b: &Operator, v: &SparseVec) -> Complex64 {
    if b.supports_sparse_apply() || !a.supports_sparse_apply() {
        let w = b.apply_sparse(v);
        let mut acc = ZERO;
        for &(i, vi) in v.entries() {
            acc += vi.conj() * a.row_dot(i, &w);
        }
        acc
    } else {
        let u = a.apply_adjoint_sparse(v);
        let mut acc = ZERO;
        for &(i, ui) in u.entries() {
            acc += ui.conj() * b.row_dot(i, v);
        }
        acc
    }
}

// ---------------------------------------------------------------------------
// dense SVD kernel (one-sided Jacobi) and the 2x2 helper
// ---------------------------------------------------------------------------

/// Singular values of a 2x2 matrix `[[m00, m01], [m10, m11]]`, descending.
///
/// `smax` comes from the Gram matrix without cancellation; `smin` uses the
/// exact relation `smax * smin = |det|`.
pub(crate) fn svd2(
    m00: Complex64,
    m01: Complex64,
    m10: Complex64,
    m11: Complex64,
) -> (f64, f64) {
    let a = m00.norm_sqr() + m10.norm_sqr();
    let b = m01.norm_sqr() + m11.norm_sqr();
    let g = m00.conj() * m01 + m10.conj() * m11;
    let mid = 0.5 * (a + b);
    let rad = (0.5 * (a - b)).hypot(g.norm());
    let smax = (mid + rad).max(0.0).sqrt();
    let det = (m00 * m11 - m01 * m10).norm();
    let smin = if smax > 0.0 { det / smax } else { 0.0 };
    (smax, smin)
}

/// Singular values of a dense operator, descending, via one-sided Jacobi.
/// Deterministic sweep order; accuracy near machine precision for the
/// moderate dimensions it is used at.
pub(crate) fn dense_singular_values(a: &Operator) -> Vec<f64> {
    let n = a.dim;
    // column-major copy
    let mut cols: Vec<Vec<Complex64>> = (0..n)
        .map(|j| (0..n).map(|i| a.entry(i, j)).collect())
        .collect();
    let max_sweeps = 60;
    for _ in 0..max_sweeps {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let (alpha, beta, gamma) = {
                    let (cp, cq) = (&cols[p], &cols[q]);
                    let mut alpha = 0.0f64;
                    let mut beta = 0.0f64;
                    let mut gamma = ZERO;
                    for k in 0..n {
                        alpha += cp[k].norm_sqr();
                        beta += cq[k].norm_sqr();
                        gamma += cp[k].conj() * cq[k];
                    }
                    (alpha, beta, gamma)
                };
                let gn = gamma.norm();
                if gn <= 1e-15 * (alpha * beta).sqrt() || gn == 0.0 {
                    continue;
                }
                rotated = true;
                // unitary rotation zeroing the off-diagonal Gram entry:
                // t^2 + 2*tau*t - 1 = 0 with tau = (alpha - beta) / (2|gamma|)
                let phase = gamma / gn;
                let tau = (alpha - beta) / (2.0 * gn);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let vp = cols[p][k];
                    let vq = cols[q][k];
                    cols[p][k] = c * vp + s * phase.conj() * vq;
                    cols[q][k] = -s * phase * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = cols
        .iter()
        .map(|col| col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|x, y| y.partial_cmp(x).unwrap());
    sv
}

// ---------------------------------------------------------------------------
// std::ops sugar (panics on dimension mismatch; use the checked free
// functions when the dimensions are not known to agree)
// ---------------------------------------------------------------------------

impl std::ops::Add<&Operator> for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        self.add_scaled(rhs, c64(1.0, 0.0))
    }
}

impl std::ops::Sub<&Operator> for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        self.add_scaled(rhs, c64(-1.0, 0.0))
    }
}

impl std::ops::Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale(c64(-1.0, 0.0))
    }
}

impl std::ops::Mul<&Operator> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim, rhs.dim, "mul: dimension mismatch");
        self.mul_impl(rhs)
    }
}

impl std::ops::Mul<Complex64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: Complex64) -> Operator {
        self.scale(rhs)
    }
}

impl std::ops::Mul<f64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: f64) -> Operator {
        self.scale(c64(rhs, 0.0))
    }
}
