//! Represented differential forms over a K-cycle and the functional `tau`.
//!
//! A word `a0 da1 ... dan` acts on the Hilbert space as
//! `a0 [D, a1] ... [D, an]`; `tau` evaluates `i^n phi(...)` on such words
//! and extends linearly. Whether `tau` is a trace reduces to whether `phi`
//! is a trace on the *-algebra generated by the algebra elements and their
//! D-commutators, so the survey below scans exactly those monomials for
//! commutation defects under `phi`.

use num_complex::Complex64;
use serde::Serialize;
use std::fmt;
use thiserror::Error;

use crate::dixmier::{Estimator, TraceEstimate, TraceSample};
use crate::kcycle::{KCycle, KCycleError};
use crate::operator::{c64, commutator, multiply, Operator};

#[derive(Debug, Error)]
pub enum FormsError {
    #[error("unresolved operator reference `{0}`")]
    Unresolved(String),
    #[error("survey length {0} exceeds the cost guard (L <= 3)")]
    LengthGuard(usize),
    #[error("survey needs L >= 2 (a pair of letters), got {0}")]
    LengthTooSmall(usize),
    #[error(transparent)]
    KCycle(#[from] KCycleError),
    #[error(transparent)]
    Operator(#[from] crate::operator::OperatorError),
}

/// Reference to a named algebra element, or the unit.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum OpRef {
    Unit,
    Named(String),
}

impl fmt::Display for OpRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OpRef::Unit => write!(f, "1"),
            OpRef::Named(n) => write!(f, "{n}"),
        }
    }
}

/// A formal word `a0 da1 ... dan`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FormWord {
    pub a0: OpRef,
    pub letters: Vec<String>,
}

impl FormWord {
    pub fn new(a0: OpRef, letters: Vec<String>) -> Self {
        Self { a0, letters }
    }

    /// Degree-zero word `a0`.
    pub fn element(name: impl Into<String>) -> Self {
        Self::new(OpRef::Named(name.into()), vec![])
    }

    /// `da1 ... dan` with unit coefficient.
    pub fn differentials(letters: Vec<String>) -> Self {
        Self::new(OpRef::Unit, letters)
    }

    pub fn degree(&self) -> usize {
        self.letters.len()
    }
}

impl fmt::Display for FormWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.a0)?;
        for l in &self.letters {
            write!(f, "·d({l})")?;
        }
        Ok(())
    }
}

/// A finite linear combination of words; merging keeps at most one term
/// per distinct word.
#[derive(Clone, Debug, Default)]
pub struct FormSum {
    terms: Vec<(Complex64, FormWord)>,
}

impl FormSum {
    pub fn new(terms: Vec<(Complex64, FormWord)>) -> Self {
        let mut out: Vec<(Complex64, FormWord)> = Vec::new();
        for (coeff, word) in terms {
            if let Some(t) = out.iter_mut().find(|(_, w)| *w == word) {
                t.0 += coeff;
            } else {
                out.push((coeff, word));
            }
        }
        Self { terms: out }
    }

    pub fn terms(&self) -> &[(Complex64, FormWord)] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

fn resolve<'a>(kc: &'a KCycle, name: &str) -> Result<&'a Operator, FormsError> {
    kc.generator(name)
        .ok_or_else(|| FormsError::Unresolved(name.to_string()))
}

/// The operator `a0 [D, a1] ... [D, an]` represented on the K-cycle's space.
pub fn represent(kc: &KCycle, word: &FormWord) -> Result<Operator, FormsError> {
    let mut acc = match &word.a0 {
        OpRef::Unit => Operator::identity(kc.dim()),
        OpRef::Named(name) => resolve(kc, name)?.clone(),
    };
    for letter in &word.letters {
        let g = resolve(kc, letter)?;
        let dg = commutator(kc.dirac(), g)?;
        acc = multiply(&acc, &dg)?;
    }
    Ok(acc)
}

fn i_power(n: usize) -> Complex64 {
    match n % 4 {
        0 => c64(1.0, 0.0),
        1 => c64(0.0, 1.0),
        2 => c64(-1.0, 0.0),
        _ => c64(0.0, -1.0),
    }
}

/// `tau(sum) = sum_t coeff_t * i^deg(t) * phi(represent(word_t))`,
/// evaluated per cutoff so linearity is exact at every schedule point.
pub fn tau(kc: &KCycle, sum: &FormSum, schedule: &[usize]) -> Result<TraceEstimate, FormsError> {
    let mut table: Vec<TraceSample> = schedule
        .iter()
        .map(|&n| TraceSample {
            n,
            ratio: c64(0.0, 0.0),
            increment: c64(0.0, 0.0),
        })
        .collect();
    for (coeff, word) in &sum.terms {
        let weight = coeff * i_power(word.degree());
        let op = represent(kc, word)?;
        let est = kc.phi(&op, schedule)?;
        for (dst, src) in table.iter_mut().zip(&est.table) {
            dst.ratio += weight * src.ratio;
            dst.increment += weight * src.increment;
        }
    }
    Ok(TraceEstimate::from_table(table, Estimator::Cutoff))
}

// ---------------------------------------------------------------------------
// monomials of the *-algebra <A, [D, A]>
// ---------------------------------------------------------------------------

/// A represented product of alphabet letters, with its spelling.
#[derive(Clone, Debug)]
pub struct Monomial {
    pub word: String,
    pub len: usize,
    pub op: Operator,
}

/// Deduplicated monomials plus an audit trail of dropped spellings.
#[derive(Clone, Debug)]
pub struct MonomialSet {
    pub monomials: Vec<Monomial>,
    /// `(surviving spelling or "0", dropped spelling)` per collision
    pub collisions: Vec<(String, String)>,
}

/// All products of at most `max_len` letters from the alphabet
/// `{g, g*, [D,g], [D,g]*}` over the given named generators, deduplicated
/// by operator-norm distance (threshold 1e-10; the zero operator counts,
/// so nilpotent products drop out).
pub fn enumerate_monomials(
    kc: &KCycle,
    max_len: usize,
    generator_set: &[(String, Operator)],
) -> Result<MonomialSet, FormsError> {
    assert!(max_len >= 1);
    let mut alphabet: Vec<(String, Operator)> = Vec::new();
    for (name, g) in generator_set {
        let dg = commutator(kc.dirac(), g)?;
        alphabet.push((name.clone(), g.clone()));
        alphabet.push((format!("{name}*"), g.adjoint()));
        alphabet.push((format!("[D,{name}]"), dg.clone()));
        alphabet.push((format!("[D,{name}]*"), dg.adjoint()));
    }
    let mut kept: Vec<Monomial> = Vec::new();
    let mut collisions: Vec<(String, String)> = Vec::new();
    // words of each length in lexicographic alphabet order
    let mut frontier: Vec<(String, Operator, usize)> =
        vec![(String::new(), Operator::identity(kc.dim()), 0)];
    for _len in 1..=max_len {
        let mut next = Vec::new();
        for (word, op, len) in &frontier {
            for (lname, lop) in &alphabet {
                let new_word = if word.is_empty() {
                    lname.clone()
                } else {
                    format!("{word}·{lname}")
                };
                let new_op = multiply(op, lop)?;
                next.push((new_word, new_op, len + 1));
            }
        }
        for (word, op, len) in &next {
            if op.operator_norm() <= 1e-10 {
                collisions.push(("0".into(), word.clone()));
                continue;
            }
            match kept
                .iter()
                .find(|m| m.op.max_abs_diff(op) <= 1e-10 || (&m.op - op).operator_norm() <= 1e-10)
            {
                Some(existing) => collisions.push((existing.word.clone(), word.clone())),
                None => kept.push(Monomial {
                    word: word.clone(),
                    len: *len,
                    op: op.clone(),
                }),
            }
        }
        frontier = next;
    }
    Ok(MonomialSet {
        monomials: kept,
        collisions,
    })
}

// ---------------------------------------------------------------------------
// trace-defect survey
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct DefectEntry {
    pub x: String,
    pub y: String,
    /// `|phi(xy) - phi(yx)|` (increment estimate at the largest N)
    pub defect: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SurveyReport {
    #[serde(rename = "L")]
    pub l: usize,
    pub schedule: Vec<usize>,
    pub max_defect: f64,
    pub worst_pair: (String, String),
    pub defect_table: Vec<DefectEntry>,
    /// spellings dropped during monomial deduplication
    pub collisions: Vec<(String, String)>,
}

/// Exhaustive commutation-defect scan of `phi` over monomial pairs `(x, y)`
/// with `len(x) + len(y) <= L`, drawn from the K-cycle's own generators.
pub fn trace_defect_survey(
    kc: &KCycle,
    l: usize,
    schedule: &[usize],
) -> Result<SurveyReport, FormsError> {
    if l > 3 {
        return Err(FormsError::LengthGuard(l));
    }
    if l < 2 {
        return Err(FormsError::LengthTooSmall(l));
    }
    let set = enumerate_monomials(kc, l - 1, kc.generators())?;
    let mut defect_table = Vec::new();
    let mut max_defect = 0.0f64;
    let mut worst_pair = ("".to_string(), "".to_string());
    for (i, x) in set.monomials.iter().enumerate() {
        for y in &set.monomials[i..] {
            if x.len + y.len > l {
                continue;
            }
            let xy = multiply(&x.op, &y.op)?;
            let yx = multiply(&y.op, &x.op)?;
            let comm = &xy - &yx;
            let est = kc.phi(&comm, schedule)?;
            let defect = est.value.norm();
            if defect > max_defect || defect_table.is_empty() {
                max_defect = defect;
                worst_pair = (x.word.clone(), y.word.clone());
            }
            defect_table.push(DefectEntry {
                x: x.word.clone(),
                y: y.word.clone(),
                defect,
            });
        }
    }
    Ok(SurveyReport {
        l,
        schedule: schedule.to_vec(),
        max_defect,
        worst_pair,
        defect_table,
        collisions: set.collisions,
    })
}
