//! Finite-truncation estimators for the Dixmier trace.
//!
//! A Dixmier trace evaluates a generalized limit of `sigma_N / log N`. No
//! finite computation can realize the limiting state itself, so this module
//! reports two concrete estimators side by side:
//!
//! * the **ratio** estimator `sigma_N / ln N`, the defining quotient, which
//!   converges slowly (a `gamma / ln N` bias on harmonic-type spectra);
//! * the **increment** estimator `(sigma_{2N} - sigma_N) / ln 2`, which
//!   cancels the constant offset and converges like `1/N` whenever the
//!   divergence is genuinely logarithmic.
//!
//! When the increment table is stable and the two estimators approach each
//! other, every admissible limiting state assigns the same value and the
//! estimate is trustworthy; otherwise the result is flagged
//! `omega_dependent` and the value field should not be quoted alone. This
//! flag is a practical diagnostic, not a proof of non-measurability.

use num_complex::Complex64;
use serde::ser::{SerializeSeq, SerializeStruct};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::operator::{c64, multiply, Operator, SparseVec};
use crate::spectral::{
    eig_hermitian, singular_values, validate_conjugate_exponents, SingularProfile, SpectralError,
};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Error)]
pub enum DixmierError {
    #[error("schedule must be non-empty and strictly increasing")]
    ScheduleInvalid,
    #[error("schedule point {n} needs 2N <= dim, but dim = {dim}")]
    ScheduleOutOfRange { n: usize, dim: usize },
    #[error("estimator point N = {n} out of range for dim {dim}")]
    PointOutOfRange { n: usize, dim: usize },
    #[error("operator is not positive: eigenvalue {eigenvalue:.3e} below -1e-10 * norm")]
    NotPositive { eigenvalue: f64 },
    #[error("dirac operator is numerically singular: min |eigenvalue| = {min_abs:.3e}")]
    SingularDirac { min_abs: f64 },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Operator(#[from] crate::operator::OperatorError),
}

// ---------------------------------------------------------------------------
// point estimators on singular profiles
// ---------------------------------------------------------------------------

/// `sigma_N / ln N`. Requires `2 <= N <= dim`.
pub fn ratio_estimator(profile: &SingularProfile, n: usize) -> Result<f64, DixmierError> {
    if n < 2 || n > profile.dim() {
        return Err(DixmierError::PointOutOfRange {
            n,
            dim: profile.dim(),
        });
    }
    Ok(profile.sigma_at(n) / (n as f64).ln())
}

/// `(sigma_{2N} - sigma_N) / ln 2`. Requires `2N <= dim`.
pub fn increment_estimator(profile: &SingularProfile, n: usize) -> Result<f64, DixmierError> {
    if n == 0 || 2 * n > profile.dim() {
        return Err(DixmierError::PointOutOfRange {
            n,
            dim: profile.dim(),
        });
    }
    Ok((profile.sigma_at(2 * n) - profile.sigma_at(n)) / std::f64::consts::LN_2)
}

/// Default truncation schedule: powers of two up to `dim / 2` (so the
/// increment estimator always has `sigma_{2N}` available), starting at 64,
/// lowered for small dimensions so at least a few points exist.
pub fn default_schedule(dim: usize) -> Vec<usize> {
    let top = {
        let mut t = 1usize;
        while 2 * t * 2 <= dim {
            t *= 2;
        }
        t
    };
    let mut start = top.min(64);
    while start > 4 && top / start < 4 {
        start /= 2;
    }
    let mut out = Vec::new();
    let mut n = start;
    while n <= top {
        out.push(n);
        n *= 2;
    }
    out
}

fn validate_schedule(schedule: &[usize], dim: usize) -> Result<(), DixmierError> {
    if schedule.is_empty() || schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(DixmierError::ScheduleInvalid);
    }
    for &n in schedule {
        if n < 2 || 2 * n > dim {
            return Err(DixmierError::ScheduleOutOfRange { n, dim });
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// trace estimates
// ---------------------------------------------------------------------------

/// Which estimator produced the headline `value`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    Ratio,
    Increment,
    Cutoff,
}

/// One schedule point: both estimator columns at `N`.
#[derive(Clone, Copy, Debug)]
pub struct TraceSample {
    pub n: usize,
    pub ratio: Complex64,
    pub increment: Complex64,
}

/// A Dixmier-trace approximation with its convergence table.
#[derive(Clone, Debug)]
pub struct TraceEstimate {
    /// Headline estimate: the increment column at the largest scheduled N.
    pub value: Complex64,
    pub estimator: Estimator,
    pub table: Vec<TraceSample>,
    /// Max pairwise spread of the increment column over the last three
    /// schedule points.
    pub stability: f64,
    /// Set when the table gives no evidence that the limiting state is
    /// irrelevant: the increment column is unstable, or the ratio column is
    /// not approaching it.
    pub omega_dependent: bool,
}

impl TraceEstimate {
    pub(crate) fn from_table(table: Vec<TraceSample>, estimator: Estimator) -> Self {
        let last = table.last().expect("non-empty table");
        let value = last.increment;
        let tail: Vec<Complex64> = table
            .iter()
            .rev()
            .take(3)
            .map(|s| s.increment)
            .collect();
        let mut stability = 0.0f64;
        for i in 0..tail.len() {
            for j in (i + 1)..tail.len() {
                stability = stability.max((tail[i] - tail[j]).norm());
            }
        }
        let gap_first = (table[0].ratio - table[0].increment).norm();
        let gap_last = (last.ratio - last.increment).norm();
        let tol = 1e-3f64.max(0.05 * value.norm());
        let omega_dependent = stability > tol || gap_last > gap_first + tol;
        Self {
            value,
            estimator,
            table,
            stability,
            omega_dependent,
        }
    }

    /// Real part of the headline value (profile-based estimates are real).
    pub fn value_re(&self) -> f64 {
        self.value.re
    }

    /// True when all table entries are real to machine precision.
    fn is_real(&self) -> bool {
        self.table
            .iter()
            .all(|s| s.ratio.im == 0.0 && s.increment.im == 0.0)
    }
}

impl Serialize for TraceEstimate {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        struct Row<'a>(&'a TraceSample, bool);
        impl Serialize for Row<'_> {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                let Row(s, real) = *self;
                if real {
                    let mut seq = serializer.serialize_seq(Some(3))?;
                    seq.serialize_element(&s.n)?;
                    seq.serialize_element(&s.ratio.re)?;
                    seq.serialize_element(&s.increment.re)?;
                    seq.end()
                } else {
                    let mut seq = serializer.serialize_seq(Some(5))?;
                    seq.serialize_element(&s.n)?;
                    seq.serialize_element(&s.ratio.re)?;
                    seq.serialize_element(&s.ratio.im)?;
                    seq.serialize_element(&s.increment.re)?;
                    seq.serialize_element(&s.increment.im)?;
                    seq.end()
                }
            }
        }
        let real = self.is_real();
        let mut st = serializer.serialize_struct("TraceEstimate", 5)?;
        if real {
            st.serialize_field("value", &self.value.re)?;
        } else {
            st.serialize_field("value", &[self.value.re, self.value.im])?;
        }
        st.serialize_field("estimator", &self.estimator)?;
        let rows: Vec<Row> = self.table.iter().map(|s| Row(s, real)).collect();
        st.serialize_field("table", &rows)?;
        st.serialize_field("stability", &self.stability)?;
        st.serialize_field("omega_dependent", &self.omega_dependent)?;
        st.end()
    }
}

fn real_sample(n: usize, profile: &SingularProfile) -> TraceSample {
    TraceSample {
        n,
        ratio: c64(profile.sigma_at(n) / (n as f64).ln(), 0.0),
        increment: c64(
            (profile.sigma_at(2 * n) - profile.sigma_at(n)) / std::f64::consts::LN_2,
            0.0,
        ),
    }
}

/// Estimate for a singular profile directly (both columns per N).
pub fn estimate_profile(
    profile: &SingularProfile,
    schedule: &[usize],
) -> Result<TraceEstimate, DixmierError> {
    validate_schedule(schedule, profile.dim())?;
    let table = schedule.iter().map(|&n| real_sample(n, profile)).collect();
    Ok(TraceEstimate::from_table(table, Estimator::Increment))
}

/// Dixmier-trace estimate of a positive semidefinite operator.
pub fn dixmier_positive(
    a: &Operator,
    schedule: &[usize],
) -> Result<TraceEstimate, DixmierError> {
    let eig = eig_hermitian(a)?;
    let scale = eig
        .values()
        .iter()
        .fold(0.0f64, |acc, &l| acc.max(l.abs()));
    if let Some(&min) = eig
        .values()
        .iter()
        .min_by(|a, b| a.partial_cmp(b).unwrap())
    {
        if min < -1e-10 * scale.max(1.0) {
            return Err(DixmierError::NotPositive { eigenvalue: min });
        }
    }
    let profile = SingularProfile::from_values(
        eig.values().iter().map(|&l| l.max(0.0)).collect(),
    );
    estimate_profile(&profile, schedule)
}

/// Dixmier-trace estimate of a selfadjoint operator via its spectral
/// positive and negative parts.
pub fn dixmier_selfadjoint(
    a: &Operator,
    schedule: &[usize],
) -> Result<TraceEstimate, DixmierError> {
    let eig = eig_hermitian(a)?;
    let pos = SingularProfile::from_values(
        eig.values().iter().map(|&l| l.max(0.0)).collect(),
    );
    let neg = SingularProfile::from_values(
        eig.values().iter().map(|&l| (-l).max(0.0)).collect(),
    );
    validate_schedule(schedule, a.dim())?;
    let table = schedule
        .iter()
        .map(|&n| {
            let p = real_sample(n, &pos);
            let m = real_sample(n, &neg);
            TraceSample {
                n,
                ratio: p.ratio - m.ratio,
                increment: p.increment - m.increment,
            }
        })
        .collect();
    Ok(TraceEstimate::from_table(table, Estimator::Increment))
}

// ---------------------------------------------------------------------------
// cutoff estimator in the |D| eigenbasis
// ---------------------------------------------------------------------------

/// Eigenbasis of |D| ordered by ascending |eigenvalue| (ties keep the
/// decomposition's stable order), with weights `|lambda|^{-d}` precomputable.
#[derive(Clone, Debug)]
pub struct DiracSpectrum {
    /// |eigenvalue| per basis vector, ascending.
    abs_values: Vec<f64>,
    vectors: Vec<SparseVec>,
}

impl DiracSpectrum {
    /// Decompose a Hermitian, invertible Dirac operator.
    pub fn new(d_op: &Operator) -> Result<Self, DixmierError> {
        let eig = eig_hermitian(d_op)?;
        let mut order: Vec<usize> = (0..eig.len()).collect();
        order.sort_by(|&i, &j| {
            eig.values()[i]
                .abs()
                .partial_cmp(&eig.values()[j].abs())
                .unwrap()
                .then(i.cmp(&j))
        });
        let abs_values: Vec<f64> = order.iter().map(|&i| eig.values()[i].abs()).collect();
        let max = abs_values.last().copied().unwrap_or(0.0);
        let min = abs_values.first().copied().unwrap_or(0.0);
        if min <= 1e-12 * (1.0 + max) {
            return Err(DixmierError::SingularDirac { min_abs: min });
        }
        let vectors = order.iter().map(|&i| eig.vectors()[i].clone()).collect();
        Ok(Self {
            abs_values,
            vectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.abs_values.len()
    }

    pub fn abs_values(&self) -> &[f64] {
        &self.abs_values
    }

    pub fn vectors(&self) -> &[SparseVec] {
        &self.vectors
    }

    /// Cutoff tables for per-vector diagonal terms supplied by `quad`,
    /// weighted by `|lambda_m|^{-d}`:
    /// `s_N = sum_{m < N} |lambda_m|^{-d} * quad(m)`.
    pub fn cutoff_tables(
        &self,
        d: f64,
        schedule: &[usize],
        mut quad: impl FnMut(&SparseVec) -> Complex64,
    ) -> Result<Vec<TraceSample>, DixmierError> {
        validate_schedule(schedule, self.dim())?;
        let need = 2 * schedule.last().copied().unwrap();
        let mut prefix = Vec::with_capacity(need + 1);
        prefix.push(ZERO);
        let mut acc = ZERO;
        for m in 0..need {
            let w = self.abs_values[m].powf(-d);
            acc += w * quad(&self.vectors[m]);
            prefix.push(acc);
        }
        Ok(schedule
            .iter()
            .map(|&n| TraceSample {
                n,
                ratio: prefix[n] / (n as f64).ln(),
                increment: (prefix[2 * n] - prefix[n]) / std::f64::consts::LN_2,
            })
            .collect())
    }
}

/// Estimate of `trace_omega(|D|^{-d} T)` by partial diagonal sums in the
/// |D| eigenbasis, cut off at the N smallest |D|-eigenvalues.
pub fn cutoff_estimator(
    t: &Operator,
    d_op: &Operator,
    d: f64,
    schedule: &[usize],
) -> Result<TraceEstimate, DixmierError> {
    if t.dim() != d_op.dim() {
        return Err(DixmierError::DimensionMismatch {
            left: t.dim(),
            right: d_op.dim(),
        });
    }
    let spectrum = DiracSpectrum::new(d_op)?;
    let table = spectrum.cutoff_tables(d, schedule, |v| t.quadratic_form(v))?;
    Ok(TraceEstimate::from_table(table, Estimator::Cutoff))
}

// ---------------------------------------------------------------------------
// trace-level Hoelder check
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct HolderRow {
    pub n: usize,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct HolderReport {
    pub p: f64,
    pub q: f64,
    /// increment estimates per schedule point
    pub rows: Vec<HolderRow>,
    /// headline estimates at the largest N
    pub lhs: f64,
    pub rhs: f64,
    pub tolerance: f64,
    pub holds: bool,
}

/// Trace-level Hoelder inequality check:
/// `tau(|AB|) <= tau(|A|^p)^{1/p} * tau(|B|^q)^{1/q}` on increment
/// estimates, with tolerance `1e-6 + 1e-2 * rhs`.
pub fn holder_check(
    a: &Operator,
    b: &Operator,
    p: f64,
    q: f64,
    schedule: &[usize],
) -> Result<HolderReport, DixmierError> {
    validate_conjugate_exponents(p, q)?;
    let ab = multiply(a, b)?;
    let prof_ab = singular_values(&ab);
    let prof_a = singular_values(a).powered(p);
    let prof_b = singular_values(b).powered(q);
    validate_schedule(schedule, prof_ab.dim())?;
    let mut rows = Vec::with_capacity(schedule.len());
    for &n in schedule {
        let lhs = increment_estimator(&prof_ab, n)?;
        let ia = increment_estimator(&prof_a, n)?.max(0.0);
        let ib = increment_estimator(&prof_b, n)?.max(0.0);
        rows.push(HolderRow {
            n,
            lhs,
            rhs: ia.powf(1.0 / p) * ib.powf(1.0 / q),
        });
    }
    let last = rows.last().expect("non-empty schedule");
    let tolerance = 1e-6 + 1e-2 * last.rhs;
    let holds = last.lhs <= last.rhs + tolerance;
    Ok(HolderReport {
        p,
        q,
        lhs: last.lhs,
        rhs: last.rhs,
        tolerance,
        holds,
        rows,
    })
}
