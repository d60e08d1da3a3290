//! Singular values, Hermitian eigendecomposition and functional calculus.
//!
//! Singular values are computed by a route that is independent of the
//! Hermitian eigensolver (one-sided Jacobi on the matrix itself, or exact
//! per-storage formulas), so the two can be cross-checked against each
//! other. All solvers are deterministic: fixed sweep orders, no pivots
//! chosen by runtime state.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::fourier;
use crate::operator::{
    c64, dense_singular_values, multiply, Operator, SparseVec, StorageKind,
};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Dimension cap for routes that must densify unstructured storage.
const DENSE_EIG_LIMIT: usize = 4096;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("operator is not hermitian: defect {defect:.3e} exceeds 1e-10*(1+{scale:.3e})")]
    NotHermitian { defect: f64, scale: f64 },
    #[error("function undefined (non-finite) at eigenvalue {eigenvalue}")]
    FunctionUndefined { eigenvalue: f64 },
    #[error("exponents must satisfy p,q > 1 and 1/p + 1/q = 1 (got p={p}, q={q})")]
    ExponentMismatch { p: f64, q: f64 },
    #[error(transparent)]
    Operator(#[from] crate::operator::OperatorError),
}

// ---------------------------------------------------------------------------
// singular profiles
// ---------------------------------------------------------------------------

/// Non-increasing singular values `mu_k` together with the partial sums
/// `sigma_n = sum_{k<n} mu_k` (`sigma` has `dim + 1` entries, `sigma[0] = 0`).
#[derive(Clone, Debug, Serialize)]
pub struct SingularProfile {
    mu: Vec<f64>,
    sigma: Vec<f64>,
}

impl SingularProfile {
    /// Build from raw values; sorts into non-increasing order and clamps
    /// rounding-level negatives to zero.
    pub fn from_values(mut mu: Vec<f64>) -> Self {
        for v in &mut mu {
            if *v < 0.0 {
                debug_assert!(*v > -1e-12, "singular value significantly negative");
                *v = 0.0;
            }
        }
        mu.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let mut sigma = Vec::with_capacity(mu.len() + 1);
        let mut acc = 0.0;
        sigma.push(0.0);
        for &v in &mu {
            acc += v;
            sigma.push(acc);
        }
        Self { mu, sigma }
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    /// `sigma_n`, the sum of the `n` largest singular values.
    pub fn sigma_at(&self, n: usize) -> f64 {
        self.sigma[n.min(self.mu.len())]
    }

    /// Profile of `|A|^p`: each singular value raised to `p`.
    pub fn powered(&self, p: f64) -> SingularProfile {
        SingularProfile::from_values(self.mu.iter().map(|&m| m.powf(p)).collect())
    }
}

/// Singular values of `a`, counted with multiplicity, decreasing.
pub fn singular_values(a: &Operator) -> SingularProfile {
    let values = match a.storage_kind() {
        StorageKind::Dense => dense_singular_values(a),
        StorageKind::Diagonal => (0..a.dim()).map(|i| a.entry(i, i).norm()).collect(),
        StorageKind::BlockTwo => {
            let half = a.dim() / 2;
            let mut out = Vec::with_capacity(a.dim());
            for k in 0..half {
                let (s1, s2) = crate::operator::svd2(
                    a.entry(k, k),
                    a.entry(k, half + k),
                    a.entry(half + k, k),
                    a.entry(half + k, half + k),
                );
                out.push(s1);
                out.push(s2);
            }
            out
        }
        StorageKind::Circulant => {
            let coeffs: Vec<Complex64> = (0..a.dim()).map(|i| a.entry(i, 0)).collect();
            fourier::dft_forward(&coeffs).iter().map(|z| z.norm()).collect()
        }
        StorageKind::Banded => {
            assert!(
                a.dim() <= DENSE_EIG_LIMIT,
                "dense SVD fallback for banded operator at dim {} exceeds the supported limit",
                a.dim()
            );
            dense_singular_values(&a.to_dense())
        }
    };
    SingularProfile::from_values(values)
}

// ---------------------------------------------------------------------------
// hermitian eigendecomposition
// ---------------------------------------------------------------------------

/// Eigenvalues (ascending) with orthonormal eigenvectors stored as sparse
/// columns: one entry per column for diagonal operators, two for 2x2-block
/// ones, full columns for dense input.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    values: Vec<f64>,
    vectors: Vec<SparseVec>,
}

impl HermitianEigen {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vectors(&self) -> &[SparseVec] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn check_hermitian(a: &Operator) -> Result<(), SpectralError> {
    let defect = a.hermiticity_defect();
    let scale = a.max_abs_entry();
    if defect > 1e-10 * (1.0 + scale) {
        return Err(SpectralError::NotHermitian { defect, scale });
    }
    Ok(())
}

/// Eigendecomposition of a Hermitian operator. Rejects inputs whose
/// non-hermitian defect exceeds `1e-10 * (1 + max|entry|)`.
pub fn eig_hermitian(a: &Operator) -> Result<HermitianEigen, SpectralError> {
    check_hermitian(a)?;
    let dim = a.dim();
    let mut pairs: Vec<(f64, SparseVec)> = match a.storage_kind() {
        StorageKind::Diagonal => (0..dim)
            .map(|i| (a.entry(i, i).re, SparseVec::unit(dim, i)))
            .collect(),
        StorageKind::BlockTwo => {
            let half = dim / 2;
            let mut out = Vec::with_capacity(dim);
            for k in 0..half {
                let p = a.entry(k, k).re;
                let q = a.entry(half + k, half + k).re;
                let z = a.entry(k, half + k);
                let [(l1, v1a, v1b), (l2, v2a, v2b)] = eig2(p, z, q);
                out.push((l1, SparseVec::new(dim, vec![(k, v1a), (half + k, v1b)])));
                out.push((l2, SparseVec::new(dim, vec![(k, v2a), (half + k, v2b)])));
            }
            out
        }
        _ => {
            assert!(
                dim <= DENSE_EIG_LIMIT,
                "dense eigendecomposition at dim {dim} exceeds the supported limit"
            );
            let (values, columns) = jacobi_hermitian(a);
            values
                .into_iter()
                .zip(columns)
                .map(|(v, col)| {
                    (
                        v,
                        SparseVec::new(dim, col.into_iter().enumerate().collect()),
                    )
                })
                .collect()
        }
    };
    // ascending by eigenvalue; stable, so ties keep construction order
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let (values, vectors) = pairs.into_iter().unzip();
    Ok(HermitianEigen { values, vectors })
}

/// Eigenpairs of the Hermitian 2x2 matrix `[[p, z], [conj(z), q]]`,
/// ascending. Eigenvector formulas are chosen to avoid cancellation.
fn eig2(p: f64, z: Complex64, q: f64) -> [(f64, Complex64, Complex64); 2] {
    let zn = z.norm();
    let scale = p.abs().max(q.abs()).max(zn);
    if zn <= f64::EPSILON * scale || zn == 0.0 {
        let one = c64(1.0, 0.0);
        return if p <= q {
            [(p, one, ZERO), (q, ZERO, one)]
        } else {
            [(q, ZERO, one), (p, one, ZERO)]
        };
    }
    let mid = 0.5 * (p + q);
    let delta = 0.5 * (p - q);
    let rad = delta.hypot(zn);
    let l1 = mid - rad;
    let l2 = mid + rad;
    // eigenvector for l2: [l2 - q, conj(z)] if delta >= 0 else [z, l2 - p]
    let (va, vb) = if delta >= 0.0 {
        (c64(rad + delta, 0.0), z.conj())
    } else {
        (z, c64(rad - delta, 0.0))
    };
    let norm = (va.norm_sqr() + vb.norm_sqr()).sqrt();
    let (v2a, v2b) = (va / norm, vb / norm);
    // orthogonal complement is the l1 eigenvector
    let (v1a, v1b) = (-v2b.conj(), v2a.conj());
    [(l1, v1a, v1b), (l2, v2a, v2b)]
}

/// Cyclic two-sided Jacobi for dense Hermitian matrices. Returns
/// (eigenvalues, columns), unsorted.
fn jacobi_hermitian(a: &Operator) -> (Vec<f64>, Vec<Vec<Complex64>>) {
    let n = a.dim();
    let mut m = a.dense_entries();
    let mut v = vec![ZERO; n * n];
    for i in 0..n {
        v[i * n + i] = c64(1.0, 0.0);
    }
    let fro: f64 = m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for _ in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[p * n + q].norm_sqr();
            }
        }
        if off.sqrt() <= 1e-15 * fro.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                let gn = apq.norm();
                if gn == 0.0 {
                    continue;
                }
                let app = m[p * n + p].re;
                let aqq = m[q * n + q].re;
                let phase = apq / gn;
                let rho = (app - aqq) / (2.0 * gn);
                let t = if rho >= 0.0 {
                    1.0 / (rho + (1.0 + rho * rho).sqrt())
                } else {
                    -1.0 / (-rho + (1.0 + rho * rho).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // columns: col_p' = c col_p + s conj(phase) col_q,
                //          col_q' = -s phase col_p + c col_q
                for r in 0..n {
                    let mp = m[r * n + p];
                    let mq = m[r * n + q];
                    m[r * n + p] = c * mp + s * phase.conj() * mq;
                    m[r * n + q] = -s * phase * mp + c * mq;
                    let vp = v[r * n + p];
                    let vq = v[r * n + q];
                    v[r * n + p] = c * vp + s * phase.conj() * vq;
                    v[r * n + q] = -s * phase * vp + c * vq;
                }
                // rows: row_p' = c row_p + s phase row_q,
                //       row_q' = -s conj(phase) row_p + c row_q
                for col in 0..n {
                    let mp = m[p * n + col];
                    let mq = m[q * n + col];
                    m[p * n + col] = c * mp + s * phase * mq;
                    m[q * n + col] = -s * phase.conj() * mp + c * mq;
                }
            }
        }
    }
    let values: Vec<f64> = (0..n).map(|i| m[i * n + i].re).collect();
    let columns: Vec<Vec<Complex64>> = (0..n)
        .map(|j| (0..n).map(|i| v[i * n + j]).collect())
        .collect();
    (values, columns)
}

// ---------------------------------------------------------------------------
// functional calculus
// ---------------------------------------------------------------------------

/// `f(A)` for Hermitian `A` via the spectral theorem, with a complex-valued
/// function (used for the unitaries `exp(it|A|)`). Structure is preserved:
/// diagonal stays diagonal, 2x2-block stays 2x2-block.
pub fn functional_calculus_complex(
    a: &Operator,
    f: impl Fn(f64) -> Complex64,
) -> Result<Operator, SpectralError> {
    check_hermitian(a)?;
    let dim = a.dim();
    let eval = |lambda: f64| -> Result<Complex64, SpectralError> {
        let y = f(lambda);
        if y.re.is_finite() && y.im.is_finite() {
            Ok(y)
        } else {
            Err(SpectralError::FunctionUndefined { eigenvalue: lambda })
        }
    };
    match a.storage_kind() {
        StorageKind::Diagonal => {
            let mut d = Vec::with_capacity(dim);
            for i in 0..dim {
                d.push(eval(a.entry(i, i).re)?);
            }
            Ok(Operator::diagonal(d))
        }
        StorageKind::BlockTwo => {
            let half = dim / 2;
            let mut b11 = Vec::with_capacity(half);
            let mut b12 = Vec::with_capacity(half);
            let mut b21 = Vec::with_capacity(half);
            let mut b22 = Vec::with_capacity(half);
            for k in 0..half {
                let p = a.entry(k, k).re;
                let q = a.entry(half + k, half + k).re;
                let z = a.entry(k, half + k);
                let [(l1, v1a, v1b), (l2, v2a, v2b)] = eig2(p, z, q);
                let (f1, f2) = (eval(l1)?, eval(l2)?);
                // f(H) = f1 v1 v1* + f2 v2 v2*
                b11.push(f1 * v1a * v1a.conj() + f2 * v2a * v2a.conj());
                b12.push(f1 * v1a * v1b.conj() + f2 * v2a * v2b.conj());
                b21.push(f1 * v1b * v1a.conj() + f2 * v2b * v2a.conj());
                b22.push(f1 * v1b * v1b.conj() + f2 * v2b * v2b.conj());
            }
            Ok(Operator::block_two(half, [b11, b12, b21, b22]))
        }
        _ => {
            assert!(
                dim <= DENSE_EIG_LIMIT,
                "dense functional calculus at dim {dim} exceeds the supported limit"
            );
            let dense = a.to_dense();
            let (values, columns) = jacobi_hermitian(&dense);
            let mut fv = Vec::with_capacity(dim);
            for &l in &values {
                fv.push(eval(l)?);
            }
            // V f(diag) V*
            let mut out = vec![ZERO; dim * dim];
            for (j, col) in columns.iter().enumerate() {
                let fj = fv[j];
                for r in 0..dim {
                    let vr = col[r] * fj;
                    if vr == ZERO {
                        continue;
                    }
                    for c in 0..dim {
                        out[r * dim + c] += vr * col[c].conj();
                    }
                }
            }
            Ok(Operator::from_entries(dim, out)?)
        }
    }
}

/// `f(A)` for Hermitian `A` and real-valued `f`.
pub fn functional_calculus(
    a: &Operator,
    f: impl Fn(f64) -> f64,
) -> Result<Operator, SpectralError> {
    functional_calculus_complex(a, |x| c64(f(x), 0.0))
}

/// `|A|` for Hermitian `A`.
pub fn abs_hermitian(a: &Operator) -> Result<Operator, SpectralError> {
    functional_calculus(a, f64::abs)
}

/// `|A|^r` for Hermitian `A`; negative `r` requires an invertible argument.
pub fn abs_power(a: &Operator, r: f64) -> Result<Operator, SpectralError> {
    functional_calculus(a, |x| x.abs().powf(r))
}

// ---------------------------------------------------------------------------
// finite-N Weyl-Hoelder inequality
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct WeylHolderRow {
    pub n: usize,
    /// `sigma_N(AB)`
    pub lhs: f64,
    /// `sigma_N(|A|^p)^{1/p} * sigma_N(|B|^q)^{1/q}`
    pub rhs: f64,
    pub margin: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct WeylHolderReport {
    pub p: f64,
    pub q: f64,
    pub rows: Vec<WeylHolderRow>,
    /// true iff `lhs <= rhs + 1e-10` for every `N <= dim`
    pub holds: bool,
}

/// Checks `sigma_N(AB) <= sigma_N(|A|^p)^{1/p} sigma_N(|B|^q)^{1/q}` for all
/// `N` up to the dimension.
pub fn check_weyl_holder(
    a: &Operator,
    b: &Operator,
    p: f64,
    q: f64,
) -> Result<WeylHolderReport, SpectralError> {
    validate_conjugate_exponents(p, q)?;
    let ab = multiply(a, b)?;
    let prof_ab = singular_values(&ab);
    let prof_a = singular_values(a).powered(p);
    let prof_b = singular_values(b).powered(q);
    let mut rows = Vec::with_capacity(ab.dim());
    let mut holds = true;
    for n in 1..=ab.dim() {
        let lhs = prof_ab.sigma_at(n);
        let rhs = prof_a.sigma_at(n).powf(1.0 / p) * prof_b.sigma_at(n).powf(1.0 / q);
        if lhs > rhs + 1e-10 {
            holds = false;
        }
        rows.push(WeylHolderRow {
            n,
            lhs,
            rhs,
            margin: rhs - lhs,
        });
    }
    Ok(WeylHolderReport { p, q, rows, holds })
}

pub(crate) fn validate_conjugate_exponents(p: f64, q: f64) -> Result<(), SpectralError> {
    if !(p > 1.0) || !(q > 1.0) || (1.0 / p + 1.0 / q - 1.0).abs() > 1e-12 {
        return Err(SpectralError::ExponentMismatch { p, q });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::make_operator;

    fn re(x: f64) -> Complex64 {
        c64(x, 0.0)
    }

    #[test]
    fn singular_values_rank_one() {
        let a = make_operator(2, vec![re(0.0), re(2.0), re(0.0), re(0.0)]).unwrap();
        let prof = singular_values(&a);
        assert!((prof.mu()[0] - 2.0).abs() < 1e-14);
        assert!(prof.mu()[1].abs() < 1e-14);
    }

    #[test]
    fn singular_values_harmonic_diag() {
        let a = Operator::diagonal_real(&[1.0, 0.5, 1.0 / 3.0, 0.25]);
        let prof = singular_values(&a);
        let h4 = 1.0 + 0.5 + 1.0 / 3.0 + 0.25;
        assert!((prof.sigma_at(4) - h4).abs() < 1e-14);
        // invariant: each partial sum extends the previous one by mu[n-1],
        // with no compensation or reordering (bitwise identity)
        for n in 1..=4 {
            assert_eq!(prof.sigma()[n], prof.sigma()[n - 1] + prof.mu()[n - 1]);
        }
    }

    #[test]
    fn singular_values_of_unitary_are_ones() {
        // 2x2 rotation (real unitary)
        let th = 0.7f64;
        let u = make_operator(
            2,
            vec![re(th.cos()), re(-th.sin()), re(th.sin()), re(th.cos())],
        )
        .unwrap();
        let prof = singular_values(&u);
        for &m in prof.mu() {
            assert!((m - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn eig_diagonal_sorted_ascending() {
        let a = Operator::diagonal_real(&[2.0, 1.0]);
        let eig = eig_hermitian(&a).unwrap();
        assert_eq!(eig.values(), &[1.0, 2.0]);
        assert_eq!(eig.vectors()[0].entries()[0].0, 1);
        assert_eq!(eig.vectors()[1].entries()[0].0, 0);
    }

    #[test]
    fn eig_pauli_x() {
        let a = make_operator(2, vec![re(0.0), re(1.0), re(1.0), re(0.0)]).unwrap();
        let eig = eig_hermitian(&a).unwrap();
        assert!((eig.values()[0] + 1.0).abs() < 1e-12);
        assert!((eig.values()[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let a = make_operator(2, vec![re(0.0), re(1.0), re(0.0), re(0.0)]).unwrap();
        assert!(matches!(
            eig_hermitian(&a),
            Err(SpectralError::NotHermitian { .. })
        ));
    }

    #[test]
    fn eig_reconstructs_dense_hermitian() {
        // deterministic pseudo-random hermitian
        let n = 12;
        let mut entries = vec![ZERO; n * n];
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        for i in 0..n {
            for j in i..n {
                let z = if i == j {
                    re(next())
                } else {
                    c64(next(), next())
                };
                entries[i * n + j] = z;
                entries[j * n + i] = z.conj();
            }
        }
        let a = make_operator(n, entries).unwrap();
        let eig = eig_hermitian(&a).unwrap();
        // residual ||A v - lambda v|| per eigenpair
        for (l, v) in eig.values().iter().zip(eig.vectors()) {
            let mut x = vec![ZERO; n];
            for &(i, z) in v.entries() {
                x[i] = z;
            }
            let ax = a.apply(&x);
            let mut worst = 0.0f64;
            for (i, xi) in x.iter().enumerate() {
                worst = worst.max((ax[i] - l * xi).norm());
            }
            assert!(worst < 1e-12, "residual {worst}");
        }
        // orthonormality
        for i in 0..n {
            for j in 0..n {
                let d = eig.vectors()[i].dot_conj(&eig.vectors()[j]);
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((d - re(expect)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn block_eig_matches_dense_route() {
        let half = 5;
        let b11: Vec<Complex64> = (0..half).map(|k| re(k as f64 - 2.0)).collect();
        let b22: Vec<Complex64> = (0..half).map(|k| re(0.5 * k as f64 + 1.0)).collect();
        let b12: Vec<Complex64> = (0..half).map(|k| c64(0.3 * k as f64, 0.1)).collect();
        let b21: Vec<Complex64> = b12.iter().map(|z| z.conj()).collect();
        let a = Operator::block_two(half, [b11, b12, b21, b22]);
        let fast = eig_hermitian(&a).unwrap();
        let dense = eig_hermitian(&a.to_dense()).unwrap();
        for (x, y) in fast.values().iter().zip(dense.values()) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn functional_calculus_examples() {
        let d = Operator::diagonal_real(&[-2.0, 3.0]);
        let abs = abs_hermitian(&d).unwrap();
        assert!(abs.max_abs_diff(&Operator::diagonal_real(&[2.0, 3.0])) < 1e-14);

        let d = Operator::diagonal_real(&[1.0, 2.0]);
        let inv = functional_calculus(&d, |x| 1.0 / x).unwrap();
        assert!(inv.max_abs_diff(&Operator::diagonal_real(&[1.0, 0.5])) < 1e-14);

        let d = Operator::diagonal_real(&[1.0, 4.0]);
        let sq = functional_calculus(&d, f64::sqrt).unwrap();
        assert!(sq.max_abs_diff(&Operator::diagonal_real(&[1.0, 2.0])) < 1e-14);
    }

    #[test]
    fn functional_calculus_rejects_singular_inverse() {
        let d = Operator::diagonal_real(&[0.0, 1.0]);
        let r = functional_calculus(&d, |x| 1.0 / x);
        assert!(matches!(r, Err(SpectralError::FunctionUndefined { .. })));
    }

    #[test]
    fn functional_calculus_block_matches_dense() {
        let half = 4;
        let b11: Vec<Complex64> = (0..half).map(|k| re(1.0 + k as f64)).collect();
        let b22: Vec<Complex64> = (0..half).map(|k| re(2.0 + 0.5 * k as f64)).collect();
        let b12: Vec<Complex64> = (0..half).map(|k| c64(0.2, 0.1 * k as f64)).collect();
        let b21: Vec<Complex64> = b12.iter().map(|z| z.conj()).collect();
        let a = Operator::block_two(half, [b11, b12, b21, b22]);
        let fast = functional_calculus(&a, |x| x.abs().sqrt()).unwrap();
        assert_eq!(fast.storage_kind(), StorageKind::BlockTwo);
        let dense = functional_calculus(&a.to_dense(), |x| x.abs().sqrt()).unwrap();
        assert!(fast.max_abs_diff(&dense) < 1e-10);
    }

    #[test]
    fn weyl_holder_equality_family() {
        let vals: Vec<f64> = (1..=16).map(|k| 1.0 / (k as f64).sqrt()).collect();
        let a = Operator::diagonal_real(&vals);
        let report = check_weyl_holder(&a, &a, 2.0, 2.0).unwrap();
        assert!(report.holds);
        for row in &report.rows {
            assert!(
                (row.lhs - row.rhs).abs() < 1e-12,
                "N={} lhs={} rhs={}",
                row.n,
                row.lhs,
                row.rhs
            );
        }
    }

    #[test]
    fn weyl_holder_zero_operator() {
        let a = Operator::zeros(6);
        let b = Operator::identity(6);
        let report = check_weyl_holder(&a, &b, 3.0, 1.5).unwrap();
        assert!(report.holds);
        for row in &report.rows {
            assert_eq!(row.lhs, 0.0);
        }
    }

    #[test]
    fn weyl_holder_rejects_bad_exponents() {
        let a = Operator::identity(2);
        assert!(matches!(
            check_weyl_holder(&a, &a, 2.0, 3.0),
            Err(SpectralError::ExponentMismatch { .. })
        ));
    }

    #[test]
    fn singular_profiles_fast_paths_match_dense() {
        let half = 6;
        let b11: Vec<Complex64> = (0..half).map(|k| c64(0.4 * k as f64 - 1.0, 0.3)).collect();
        let b12: Vec<Complex64> = (0..half).map(|k| c64(0.1, 0.2 * k as f64)).collect();
        let b21: Vec<Complex64> = (0..half).map(|k| c64(-0.5, 0.05 * k as f64)).collect();
        let b22: Vec<Complex64> = (0..half).map(|k| re(1.0 + 0.1 * k as f64)).collect();
        let block = Operator::block_two(half, [b11, b12, b21, b22]);
        let fast = singular_values(&block);
        let dense = singular_values(&block.to_dense());
        for (a, b) in fast.mu().iter().zip(dense.mu()) {
            assert!((a - b).abs() < 1e-10, "block {a} vs dense {b}");
        }
        let circ = Operator::circulant(vec![re(0.6), c64(0.1, -0.4), re(0.0), c64(0.2, 0.2)]);
        let fast = singular_values(&circ);
        let dense = singular_values(&circ.to_dense());
        for (a, b) in fast.mu().iter().zip(dense.mu()) {
            assert!((a - b).abs() < 1e-10, "circulant {a} vs dense {b}");
        }
    }

    #[test]
    fn singular_values_cross_check_via_gram_route() {
        // independent route: eigenvalues of A*A, square-rooted
        let n = 10;
        let mut entries = vec![ZERO; n * n];
        let mut state = 42u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            ((state >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        for e in entries.iter_mut() {
            *e = c64(next(), next());
        }
        let a = make_operator(n, entries).unwrap();
        let direct = singular_values(&a);
        let gram = multiply(&a.adjoint(), &a).unwrap();
        let eig = eig_hermitian(&gram).unwrap();
        let mut via_gram: Vec<f64> = eig.values().iter().map(|l| l.max(0.0).sqrt()).collect();
        via_gram.sort_by(|x, y| y.partial_cmp(x).unwrap());
        for (d, g) in direct.mu().iter().zip(&via_gram) {
            assert!((d - g).abs() < 1e-9, "direct {d} vs gram {g}");
        }
    }
}
