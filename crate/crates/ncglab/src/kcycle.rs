//! Finite truncations of summable spectral triples and their trace checks.
//!
//! A [`KCycle`] bundles named algebra generators with a Hermitian,
//! invertible Dirac operator `D` and a summability exponent `d`. All trace
//! functionals are evaluated through the cutoff estimator in the |D|
//! eigenbasis (cached at construction), so repeated checks on one model pay
//! for the eigendecomposition once.
//!
//! Statements about unbounded operators have no literal finite-dimensional
//! counterpart; the operations here replace them with their finitary
//! shadows: boundedness of a commutator becomes stability of its norm
//! across a truncation sweep, membership in a smoothness subalgebra becomes
//! a growth verdict on iterated derivation norms.

use serde::Serialize;
use thiserror::Error;

use crate::dixmier::{
    DiracSpectrum, DixmierError, Estimator, TraceEstimate,
};
use crate::operator::{
    c64, commutator, multiply, product_quadratic_form, Operator, OperatorError,
};
use crate::spectral::{
    abs_hermitian, abs_power, functional_calculus, functional_calculus_complex, singular_values,
    SpectralError,
};

#[derive(Debug, Error)]
pub enum KCycleError {
    #[error("summability exponent must be positive, got {0}")]
    InvalidExponent(f64),
    #[error("dirac operator is not hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },
    #[error("generator `{name}` has dimension {dim}, dirac has {expected}")]
    GeneratorDimension {
        name: String,
        dim: usize,
        expected: usize,
    },
    #[error("fractional commutator ratio needs at least one truncation")]
    EmptyTruncationFamily,
    #[error(transparent)]
    Dixmier(#[from] DixmierError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

/// A finite-dimensional K-cycle: named generators, Dirac operator,
/// summability exponent.
pub struct KCycle {
    label: String,
    generators: Vec<(String, Operator)>,
    dirac: Operator,
    exponent: f64,
    dim: usize,
    spectrum: DiracSpectrum,
    abs_dirac: Operator,
}

impl KCycle {
    pub fn new(
        label: impl Into<String>,
        generators: Vec<(String, Operator)>,
        dirac: Operator,
        exponent: f64,
    ) -> Result<Self, KCycleError> {
        if !(exponent > 0.0) {
            return Err(KCycleError::InvalidExponent(exponent));
        }
        let defect = dirac.hermiticity_defect();
        if defect > 1e-10 * (1.0 + dirac.max_abs_entry()) {
            return Err(KCycleError::NotHermitian { defect });
        }
        let dim = dirac.dim();
        for (name, g) in &generators {
            if g.dim() != dim {
                return Err(KCycleError::GeneratorDimension {
                    name: name.clone(),
                    dim: g.dim(),
                    expected: dim,
                });
            }
        }
        let spectrum = DiracSpectrum::new(&dirac)?;
        let abs_dirac = abs_hermitian(&dirac)?;
        Ok(Self {
            label: label.into(),
            generators,
            dirac,
            exponent,
            dim,
            spectrum,
            abs_dirac,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn dirac(&self) -> &Operator {
        &self.dirac
    }

    /// `|D|`, computed once at construction.
    pub fn abs_dirac(&self) -> &Operator {
        &self.abs_dirac
    }

    pub fn spectrum(&self) -> &DiracSpectrum {
        &self.spectrum
    }

    pub fn generators(&self) -> &[(String, Operator)] {
        &self.generators
    }

    pub fn generator(&self, name: &str) -> Option<&Operator> {
        self.generators
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, g)| g)
    }

    pub fn default_schedule(&self) -> Vec<usize> {
        crate::dixmier::default_schedule(self.dim)
    }
}

// ---------------------------------------------------------------------------
// verification report
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct KCycleReport {
    pub label: String,
    pub dim: usize,
    pub exponent: f64,
    pub hermiticity_defect: f64,
    pub min_abs_eigenvalue: f64,
    /// `||[D, g]||` per named generator.
    pub commutator_norms: Vec<(String, f64)>,
    /// Ratio/increment tables for `sigma_N(|D|^{-d}) / log N`.
    pub summability: TraceEstimate,
    /// Boundedness verdict: monotone non-increasing ratio tail, or tail
    /// spread within 5% of the last value.
    pub summability_bounded: bool,
    pub pass: bool,
}

impl KCycle {
    /// Summability and well-formedness report.
    pub fn verify(&self, schedule: &[usize]) -> Result<KCycleReport, KCycleError> {
        let hermiticity_defect = self.dirac.hermiticity_defect();
        let min_abs_eigenvalue = self.spectrum.abs_values().first().copied().unwrap_or(0.0);
        let mut commutator_norms = Vec::with_capacity(self.generators.len());
        for (name, g) in &self.generators {
            let c = commutator(&self.dirac, g)?;
            commutator_norms.push((name.clone(), c.operator_norm()));
        }
        let profile = crate::spectral::SingularProfile::from_values(
            self.spectrum
                .abs_values()
                .iter()
                .map(|&l| l.powf(-self.exponent))
                .collect(),
        );
        let summability = crate::dixmier::estimate_profile(&profile, schedule)?;
        let ratios: Vec<f64> = summability.table.iter().map(|s| s.ratio.re).collect();
        let tail = &ratios[ratios.len().saturating_sub(3)..];
        let monotone = tail.windows(2).all(|w| w[1] <= w[0] + 1e-12);
        let spread = tail
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
                (lo.min(x), hi.max(x))
            });
        let stable = (spread.1 - spread.0) <= 0.05 * ratios.last().unwrap().abs().max(1e-12);
        let summability_bounded = monotone || stable;
        let pass = summability_bounded && min_abs_eigenvalue > 0.0;
        Ok(KCycleReport {
            label: self.label.clone(),
            dim: self.dim,
            exponent: self.exponent,
            hermiticity_defect,
            min_abs_eigenvalue,
            commutator_norms,
            summability,
            summability_bounded,
            pass,
        })
    }
}

// ---------------------------------------------------------------------------
// the functional phi and its hypertrace defect
// ---------------------------------------------------------------------------

impl KCycle {
    /// `phi(T) = tau(|D|^{-d} T)` via the cutoff estimator in the cached
    /// |D| eigenbasis.
    pub fn phi(&self, t: &Operator, schedule: &[usize]) -> Result<TraceEstimate, KCycleError> {
        if t.dim() != self.dim {
            return Err(KCycleError::Operator(OperatorError::DimensionMismatch {
                left: t.dim(),
                right: self.dim,
            }));
        }
        let table = self
            .spectrum
            .cutoff_tables(self.exponent, schedule, |v| t.quadratic_form(v))?;
        Ok(TraceEstimate::from_table(table, Estimator::Cutoff))
    }

    /// `phi(aT) - phi(Ta)`, evaluated per cutoff without materializing the
    /// products, so arbitrary bounded probes `T` stay cheap.
    pub fn hypertrace_defect(
        &self,
        a: &Operator,
        t: &Operator,
        schedule: &[usize],
    ) -> Result<TraceEstimate, KCycleError> {
        if a.dim() != self.dim || t.dim() != self.dim {
            return Err(KCycleError::Operator(OperatorError::DimensionMismatch {
                left: a.dim().max(t.dim()),
                right: self.dim,
            }));
        }
        let table = self.spectrum.cutoff_tables(self.exponent, schedule, |v| {
            product_quadratic_form(a, t, v) - product_quadratic_form(t, a, v)
        })?;
        Ok(TraceEstimate::from_table(table, Estimator::Cutoff))
    }

    /// Estimate of `tau(|[|D|^{-d}, a]|)`: the quantity whose vanishing
    /// makes `phi` a hypertrace.
    pub fn commutator_vanishing(
        &self,
        a: &Operator,
        schedule: &[usize],
    ) -> Result<TraceEstimate, KCycleError> {
        let inv_pow = abs_power(&self.dirac, -self.exponent)?;
        let x = commutator(&inv_pow, a)?;
        let profile = singular_values(&x);
        Ok(crate::dixmier::estimate_profile(&profile, schedule)?)
    }
}

// ---------------------------------------------------------------------------
// resolvent power identity
// ---------------------------------------------------------------------------

/// Relative residual of the identity
/// `[a, H^{-k}] = sum_{j=1..k} H^{-j} [H, a] H^{-(k+1-j)}`
/// for Hermitian invertible `H`: `||lhs - rhs|| / (1e-30 + ||lhs||)`.
pub fn power_identity_residual(
    h: &Operator,
    a: &Operator,
    k: u32,
) -> Result<f64, KCycleError> {
    assert!(k >= 1, "power identity needs k >= 1");
    let neg_pow = |j: i32| functional_calculus(h, |x| x.powi(-j));
    let h_inv_k = neg_pow(k as i32)?;
    let lhs = commutator(a, &h_inv_k)?;
    let comm = commutator(h, a)?;
    let mut rhs = Operator::zeros(h.dim());
    for j in 1..=k {
        let left = neg_pow(j as i32)?;
        let right = neg_pow((k + 1 - j) as i32)?;
        let term = multiply(&multiply(&left, &comm)?, &right)?;
        rhs = &rhs + &term;
    }
    let residual = (&lhs - &rhs).operator_norm();
    Ok(residual / (1e-30 + lhs.operator_norm()))
}

// ---------------------------------------------------------------------------
// fractional commutator ratios across a truncation family
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct FractionalRatioRow {
    pub dim: usize,
    /// `||[|D|^r, a]||`
    pub frac_norm: f64,
    /// `||[D, a]||`
    pub comm_norm: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FractionalRatioReport {
    pub r: f64,
    pub rows: Vec<FractionalRatioRow>,
    /// heuristic bound recorded with the verdict: 2x the first ratio
    pub bound: f64,
    /// true iff every ratio stays within the bound
    pub bounded: bool,
    /// set when some truncation has `[D, a] = 0`, making the ratio moot
    pub vacuous: bool,
}

/// `||[|D|^r, a]|| / ||[D, a]||` across a family of truncations of the same
/// model. The family is supplied explicitly (one `(KCycle, element)` pair
/// per truncation size) because rebuilding a model at a different size is a
/// model-level operation.
pub fn fractional_commutator_ratio(
    truncations: &[(KCycle, Operator)],
    r: f64,
) -> Result<FractionalRatioReport, KCycleError> {
    if truncations.is_empty() {
        return Err(KCycleError::EmptyTruncationFamily);
    }
    let mut rows = Vec::with_capacity(truncations.len());
    let mut vacuous = false;
    for (kc, a) in truncations {
        let frac = commutator(&abs_power(&kc.dirac, r)?, a)?.operator_norm();
        let comm = commutator(&kc.dirac, a)?.operator_norm();
        let scale = kc.dirac.operator_norm() * a.operator_norm();
        if comm <= 1e-12 * (1.0 + scale) {
            vacuous = true;
            rows.push(FractionalRatioRow {
                dim: kc.dim,
                frac_norm: frac,
                comm_norm: comm,
                ratio: f64::NAN,
            });
        } else {
            rows.push(FractionalRatioRow {
                dim: kc.dim,
                frac_norm: frac,
                comm_norm: comm,
                ratio: frac / comm,
            });
        }
    }
    let (bound, bounded) = if vacuous {
        (f64::NAN, false)
    } else {
        let first = rows.first().unwrap().ratio;
        let bound = 2.0 * first;
        (bound, rows.iter().all(|row| row.ratio <= bound))
    };
    Ok(FractionalRatioReport {
        r,
        rows,
        bound,
        bounded,
        vacuous,
    })
}

// ---------------------------------------------------------------------------
// the derivation, its flow, and regularity sweeps
// ---------------------------------------------------------------------------

impl KCycle {
    /// The derivation `delta(a) = [|D|, a]`.
    pub fn delta(&self, a: &Operator) -> Result<Operator, KCycleError> {
        Ok(commutator(&self.abs_dirac, a)?)
    }

    /// The flow `alpha_t(a) = exp(it|D|) a exp(-it|D|)`, whose generator is
    /// `i * delta`.
    pub fn evolve(&self, a: &Operator, t: f64) -> Result<Operator, KCycleError> {
        let u = functional_calculus_complex(&self.dirac, |x| {
            let phase = t * x.abs();
            c64(phase.cos(), phase.sin())
        })?;
        Ok(multiply(&multiply(&u, a)?, &u.adjoint())?)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RegularityRow {
    pub dim: usize,
    /// `||delta^j(a)||` for `j = 1..=n_max`
    pub delta_norms: Vec<f64>,
    /// `||delta^j([D, a])||` for `j = 1..=n_max`
    pub delta_comm_norms: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RegularityVerdict {
    pub j: usize,
    /// norm at largest dim exceeds 4x the norm at smallest dim
    pub growing: bool,
    pub growth_ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RegularityReport {
    pub n_max: usize,
    pub rows: Vec<RegularityRow>,
    /// verdicts for the `delta^j(a)` columns
    pub verdicts: Vec<RegularityVerdict>,
    /// verdicts for the `delta^j([D, a])` columns
    pub comm_verdicts: Vec<RegularityVerdict>,
}

impl RegularityReport {
    /// Smoothness diagnostic: the element fails the order-2 regularity test
    /// when `||delta^2(a)||` grows across the sweep.
    pub fn non_order_two(&self) -> bool {
        self.verdicts
            .iter()
            .find(|v| v.j == 2)
            .map(|v| v.growing)
            .unwrap_or(false)
    }
}

/// Norms of iterated derivations `delta^j(a)` and `delta^j([D, a])` across
/// a truncation family, with growth verdicts (ratio across the sweep > 4
/// means growing).
pub fn regularity_profile(
    truncations: &[(KCycle, Operator)],
    n_max: usize,
) -> Result<RegularityReport, KCycleError> {
    if truncations.is_empty() {
        return Err(KCycleError::EmptyTruncationFamily);
    }
    assert!(n_max >= 1);
    let mut rows = Vec::with_capacity(truncations.len());
    for (kc, a) in truncations {
        let mut delta_norms = Vec::with_capacity(n_max);
        let mut cur = a.clone();
        for _ in 0..n_max {
            cur = kc.delta(&cur)?;
            delta_norms.push(cur.operator_norm());
        }
        let comm = commutator(&kc.dirac, a)?;
        let mut delta_comm_norms = Vec::with_capacity(n_max);
        let mut cur = comm;
        for _ in 0..n_max {
            cur = kc.delta(&cur)?;
            delta_comm_norms.push(cur.operator_norm());
        }
        rows.push(RegularityRow {
            dim: kc.dim,
            delta_norms,
            delta_comm_norms,
        });
    }
    let verdict_for = |col: &dyn Fn(&RegularityRow) -> f64, j: usize| {
        let first = col(rows.first().unwrap());
        let last = col(rows.last().unwrap());
        let scale = rows.iter().map(col).fold(0.0f64, f64::max);
        let (growing, growth_ratio) = if last <= 1e-12 * (1.0 + scale) {
            (false, 0.0)
        } else if first <= 1e-12 * (1.0 + scale) {
            (true, f64::INFINITY)
        } else {
            (last / first > 4.0, last / first)
        };
        RegularityVerdict {
            j,
            growing,
            growth_ratio,
        }
    };
    let verdicts = (1..=n_max)
        .map(|j| verdict_for(&|row: &RegularityRow| row.delta_norms[j - 1], j))
        .collect();
    let comm_verdicts = (1..=n_max)
        .map(|j| verdict_for(&|row: &RegularityRow| row.delta_comm_norms[j - 1], j))
        .collect();
    Ok(RegularityReport {
        n_max,
        rows,
        verdicts,
        comm_verdicts,
    })
}
