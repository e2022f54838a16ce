//! Symbolic operators on `l²(N)^{⊗L}`.
//!
//! Every operator is a finite sum of coefficient-weighted elementary tensors
//! whose slot factors are products of weighted shifts and diagonals. Such an
//! operator maps a basis vector to a finite combination of basis vectors, so
//! it can be applied exactly without truncating the Hilbert space. Matrices
//! only appear as finite sections (see [`section`]) for norms and reports.

mod norm;
mod section;

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use norm::{
    largest_singular_value, norm_bounds, norm_bounds_with, tail_bound, NormBounds, NormConfig,
    NormMethod,
};
pub use section::{MultiIndexBox, Section};

/// Terms whose coefficient magnitude falls below this are dropped.
pub const COEFF_EPS: f64 = 1e-15;

/// Largest section dimension `d^L` that will be materialised.
pub const MAX_SECTION_DIM: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FockError {
    #[error("slot count mismatch: {left} vs {right}")]
    SlotMismatch { left: usize, right: usize },
    #[error("operators carry different deformation parameters {left} and {right}")]
    QMismatch { left: f64, right: f64 },
    #[error("deformation parameter {0} outside [0, 1)")]
    InvalidQ(f64),
    #[error("section {d}^{slots} exceeds the budget of {budget} basis vectors")]
    SectionTooLarge { d: usize, slots: usize, budget: usize },
    #[error("section size must be at least {min}, got {d}")]
    SectionTooSmall { d: usize, min: usize },
    #[error("slot permutation {0:?} is not a permutation of the slots")]
    BadSlotPermutation(Vec<usize>),
}

/// Elementary operators on `l²(N)` with band width at most one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Primitive {
    /// Backward shift `S`: `e_0 -> 0`, `e_m -> e_{m-1}`.
    Shift,
    /// Forward shift `S*`: `e_m -> e_{m+1}`.
    CoShift,
    /// `P_0 = I - S*S`.
    Proj0,
    /// `q^N`.
    DiagQN,
    /// `q^{N+1}`.
    DiagQN1,
    /// `sqrt(1 - q^{2N})`.
    DiagSqrtW,
    Identity,
}

impl Primitive {
    /// Image of `e_m` as `(index, weight)`, or `None` when it vanishes.
    pub fn act(self, m: usize, q: f64) -> Option<(usize, f64)> {
        match self {
            Primitive::Shift => m.checked_sub(1).map(|k| (k, 1.0)),
            Primitive::CoShift => Some((m + 1, 1.0)),
            Primitive::Proj0 => (m == 0).then_some((0, 1.0)),
            Primitive::DiagQN => nonzero(m, q_pow(q, m)),
            Primitive::DiagQN1 => nonzero(m, q_pow(q, m + 1)),
            Primitive::DiagSqrtW => nonzero(m, (1.0 - q_pow(q, 2 * m)).max(0.0).sqrt()),
            Primitive::Identity => Some((m, 1.0)),
        }
    }

    pub fn adjoint(self) -> Self {
        match self {
            Primitive::Shift => Primitive::CoShift,
            Primitive::CoShift => Primitive::Shift,
            other => other,
        }
    }

    /// Net change of the basis index.
    pub fn shift(self) -> isize {
        match self {
            Primitive::Shift => -1,
            Primitive::CoShift => 1,
            _ => 0,
        }
    }

    pub fn is_q_free(self) -> bool {
        !matches!(self, Primitive::DiagQN | Primitive::DiagQN1 | Primitive::DiagSqrtW)
    }

    /// Limit of the weight as the index goes to infinity; this is the value
    /// of the Toeplitz symbol at `1`.
    pub fn symbol(self) -> f64 {
        match self {
            Primitive::Shift | Primitive::CoShift | Primitive::DiagSqrtW | Primitive::Identity => 1.0,
            Primitive::Proj0 | Primitive::DiagQN | Primitive::DiagQN1 => 0.0,
        }
    }

    fn label(self) -> &'static str {
        match self {
            Primitive::Shift => "S",
            Primitive::CoShift => "S*",
            Primitive::Proj0 => "P0",
            Primitive::DiagQN => "q^N",
            Primitive::DiagQN1 => "q^(N+1)",
            Primitive::DiagSqrtW => "sqrt(1-q^2N)",
            Primitive::Identity => "I",
        }
    }
}

fn q_pow(q: f64, m: usize) -> f64 {
    if m > i32::MAX as usize {
        return if q == 1.0 { 1.0 } else { 0.0 };
    }
    q.powi(m as i32)
}

fn nonzero(m: usize, w: f64) -> Option<(usize, f64)> {
    (w != 0.0).then_some((m, w))
}

/// A finite product `p_1 p_2 ... p_k` acting on one tensor slot; `p_k` acts first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FactorWord {
    factors: Vec<Primitive>,
}

/// Behaviour of a word on all inputs beyond a threshold: the weight stays
/// within `eps` of `limit` and the index moves by `shift`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Asymptotics {
    pub limit: f64,
    pub eps: f64,
    pub shift: isize,
}

impl FactorWord {
    pub fn new(factors: Vec<Primitive>) -> Self {
        FactorWord { factors }
    }

    pub fn identity() -> Self {
        FactorWord { factors: Vec::new() }
    }

    pub fn single(p: Primitive) -> Self {
        FactorWord { factors: vec![p] }
    }

    pub fn factors(&self) -> &[Primitive] {
        &self.factors
    }

    pub fn act(&self, m: usize, q: f64) -> Option<(usize, f64)> {
        let mut idx = m;
        let mut weight = 1.0;
        for p in self.factors.iter().rev() {
            let (next, w) = p.act(idx, q)?;
            idx = next;
            weight *= w;
        }
        Some((idx, weight))
    }

    /// Operator product `self * other`.
    pub fn then_after(&self, other: &FactorWord) -> FactorWord {
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&other.factors);
        FactorWord { factors }
    }

    pub fn adjoint(&self) -> FactorWord {
        FactorWord {
            factors: self.factors.iter().rev().map(|p| p.adjoint()).collect(),
        }
    }

    pub fn net_shift(&self) -> isize {
        self.factors.iter().map(|p| p.shift()).sum()
    }

    pub fn is_q_free(&self) -> bool {
        self.factors.iter().all(|p| p.is_q_free())
    }

    pub fn symbol(&self) -> f64 {
        self.factors.iter().map(|p| p.symbol()).product()
    }

    /// Limit/deviation pair valid for every input `m >= lo`, or `None` when
    /// some `S` or `P_0` could still meet `e_0` on that range.
    pub fn asymptotics(&self, lo: usize, q: f64) -> Option<Asymptotics> {
        let mut idx = lo as isize;
        let mut abs_limit = 1.0;
        let mut bound = 1.0;
        let mut limit = 1.0;
        for p in self.factors.iter().rev() {
            let (l, e) = match p {
                Primitive::Shift | Primitive::Proj0 if idx < 1 => return None,
                Primitive::Shift | Primitive::CoShift | Primitive::Identity => (1.0, 0.0),
                Primitive::Proj0 => (0.0, 0.0),
                Primitive::DiagQN => (0.0, q_pow(q, idx as usize)),
                Primitive::DiagQN1 => (0.0, q_pow(q, idx as usize + 1)),
                Primitive::DiagSqrtW => {
                    (1.0, 1.0 - (1.0 - q_pow(q, 2 * idx as usize)).max(0.0).sqrt())
                }
            };
            limit *= l;
            abs_limit *= f64::abs(l);
            bound *= f64::abs(l) + e;
            idx += p.shift();
        }
        Some(Asymptotics {
            limit,
            eps: (bound - abs_limit).max(0.0),
            shift: self.net_shift(),
        })
    }

    /// Smallest `lo` for which [`FactorWord::asymptotics`] applies.
    pub fn tail_threshold(&self) -> usize {
        (0..=self.factors.len() + 1)
            .find(|&lo| self.asymptotics(lo, 0.5).is_some())
            .unwrap_or(self.factors.len() + 1)
    }

    /// True when the word annihilates every basis vector.
    pub fn is_zero(&self, q: f64) -> bool {
        let lo = self.tail_threshold();
        let finite_zero = (0..lo).all(|m| self.act(m, q).is_none());
        let tail = self.asymptotics(lo, q).expect("threshold");
        finite_zero && tail.limit == 0.0 && tail.eps == 0.0
    }
}

impl fmt::Display for FactorWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "I");
        }
        let parts: Vec<&str> = self.factors.iter().map(|p| p.label()).collect();
        write!(f, "{}", parts.join("·"))
    }
}

/// A scalar of modulus one, kept apart from the term coefficients so that
/// norms are exactly invariant under it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitPhase(Complex64);

impl UnitPhase {
    pub const ONE: UnitPhase = UnitPhase(Complex64 { re: 1.0, im: 0.0 });

    /// Normalises `z` to modulus one. `z` must be nonzero.
    pub fn new(z: Complex64) -> Self {
        let r = z.norm();
        if r == 1.0 {
            UnitPhase(z)
        } else {
            UnitPhase(z / r)
        }
    }

    pub fn value(self) -> Complex64 {
        self.0
    }

    pub fn conj(self) -> Self {
        UnitPhase(self.0.conj())
    }

}

impl std::ops::Mul for UnitPhase {
    type Output = UnitPhase;

    /// Exact when either factor is [`UnitPhase::ONE`].
    fn mul(self, other: UnitPhase) -> UnitPhase {
        if self == Self::ONE {
            return other;
        }
        if other == Self::ONE {
            return self;
        }
        UnitPhase::new(self.0 * other.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coeff: Complex64,
    pub slots: Vec<FactorWord>,
}

/// `phase * Σ_k coeff_k (w_k1 ⊗ ... ⊗ w_kL)` with the primitives evaluated at `q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorTermSum {
    slots: usize,
    q: f64,
    phase: UnitPhase,
    terms: Vec<Term>,
}

fn check_q(q: f64) -> Result<(), FockError> {
    if (0.0..1.0).contains(&q) {
        Ok(())
    } else {
        Err(FockError::InvalidQ(q))
    }
}

impl TensorTermSum {
    pub fn zero(slots: usize, q: f64) -> Result<Self, FockError> {
        check_q(q)?;
        Ok(TensorTermSum { slots, q, phase: UnitPhase::ONE, terms: Vec::new() })
    }

    pub fn identity(slots: usize, q: f64) -> Result<Self, FockError> {
        Self::scalar(slots, q, Complex64::new(1.0, 0.0))
    }

    pub fn scalar(slots: usize, q: f64, c: Complex64) -> Result<Self, FockError> {
        Self::from_terms(slots, q, vec![Term { coeff: c, slots: vec![FactorWord::identity(); slots] }])
    }

    /// Single primitive on slot `slot` of an `slots`-fold tensor power.
    pub fn primitive(slots: usize, slot: usize, p: Primitive, q: f64) -> Result<Self, FockError> {
        let mut words = vec![FactorWord::identity(); slots];
        words[slot] = FactorWord::single(p);
        Self::from_terms(slots, q, vec![Term { coeff: Complex64::new(1.0, 0.0), slots: words }])
    }

    pub fn elementary(q: f64, coeff: Complex64, words: Vec<FactorWord>) -> Result<Self, FockError> {
        Self::from_terms(words.len(), q, vec![Term { coeff, slots: words }])
    }

    /// Builds a normalised sum: identical slot words are merged, terms with a
    /// vanishing slot word or a negligible coefficient are dropped.
    pub fn from_terms(slots: usize, q: f64, terms: Vec<Term>) -> Result<Self, FockError> {
        check_q(q)?;
        for t in &terms {
            if t.slots.len() != slots {
                return Err(FockError::SlotMismatch { left: slots, right: t.slots.len() });
            }
        }
        let mut ts = TensorTermSum { slots, q, phase: UnitPhase::ONE, terms };
        ts.normalize();
        Ok(ts)
    }

    fn normalize(&mut self) {
        let q = self.q;
        let mut merged: BTreeMap<Vec<FactorWord>, Complex64> = BTreeMap::new();
        for t in self.terms.drain(..) {
            if t.slots.iter().any(|w| w.is_zero(q)) {
                continue;
            }
            *merged.entry(t.slots).or_insert(Complex64::new(0.0, 0.0)) += t.coeff;
        }
        self.terms = merged
            .into_iter()
            .filter(|(_, c)| c.norm() >= COEFF_EPS)
            .map(|(slots, coeff)| Term { coeff, slots })
            .collect();
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn phase(&self) -> UnitPhase {
        self.phase
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_q_free(&self) -> bool {
        self.terms.iter().all(|t| t.slots.iter().all(|w| w.is_q_free()))
    }

    /// Reinterprets a `q`-free operator at another deformation parameter.
    pub fn at_q(&self, q: f64) -> Result<Self, FockError> {
        check_q(q)?;
        if q != self.q && !self.is_q_free() {
            return Err(FockError::QMismatch { left: self.q, right: q });
        }
        let mut out = self.clone();
        out.q = q;
        Ok(out)
    }

    fn common_q(&self, other: &Self) -> Result<f64, FockError> {
        if self.slots != other.slots {
            return Err(FockError::SlotMismatch { left: self.slots, right: other.slots });
        }
        if self.q == other.q || other.is_q_free() {
            Ok(self.q)
        } else if self.is_q_free() {
            Ok(other.q)
        } else {
            Err(FockError::QMismatch { left: self.q, right: other.q })
        }
    }

    /// Multiplies by a unit scalar, tracked in the phase.
    pub fn with_phase(mut self, phase: UnitPhase) -> Self {
        self.phase = self.phase * phase;
        self
    }

    /// The same operator with the unit phase dropped; norms are unchanged.
    pub fn without_phase(&self) -> Self {
        let mut out = self.clone();
        out.phase = UnitPhase::ONE;
        out
    }

    /// Multiplies every coefficient by `c`.
    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.coeff *= c;
        }
        out.normalize();
        out
    }

    /// Moves the phase into the coefficients.
    pub fn fold_phase(&self) -> Self {
        if self.phase == UnitPhase::ONE {
            return self.clone();
        }
        let mut out = self.scale(self.phase.value());
        out.phase = UnitPhase::ONE;
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self, FockError> {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, FockError> {
        self.combine(other, -1.0)
    }

    fn combine(&self, other: &Self, sign: f64) -> Result<Self, FockError> {
        let q = self.common_q(other)?;
        let (phase, lhs, rhs) = if self.phase == other.phase {
            (self.phase, self.clone(), other.clone())
        } else {
            (UnitPhase::ONE, self.fold_phase(), other.fold_phase())
        };
        let mut terms = lhs.terms;
        terms.extend(rhs.terms.into_iter().map(|t| Term { coeff: t.coeff * sign, slots: t.slots }));
        let mut out = TensorTermSum::from_terms(self.slots, q, terms)?;
        out.phase = phase;
        Ok(out)
    }

    /// Operator product `self * other`, slot by slot.
    pub fn mul(&self, other: &Self) -> Result<Self, FockError> {
        let q = self.common_q(other)?;
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                let slots = a.slots.iter().zip(&b.slots).map(|(x, y)| x.then_after(y)).collect();
                terms.push(Term { coeff: a.coeff * b.coeff, slots });
            }
        }
        let mut out = TensorTermSum::from_terms(self.slots, q, terms)?;
        out.phase = self.phase * other.phase;
        Ok(out)
    }

    pub fn adjoint(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| Term {
                coeff: t.coeff.conj(),
                slots: t.slots.iter().map(|w| w.adjoint()).collect(),
            })
            .collect();
        let mut out = TensorTermSum::from_terms(self.slots, self.q, terms).expect("same shape");
        out.phase = self.phase.conj();
        out
    }

    /// Reorders tensor slots: slot `s` of the result is slot `perm[s]` of `self`.
    pub fn permute_slots(&self, perm: &[usize]) -> Result<Self, FockError> {
        let mut seen = vec![false; self.slots];
        if perm.len() != self.slots || perm.iter().any(|&p| p >= self.slots || std::mem::replace(&mut seen[p], true)) {
            return Err(FockError::BadSlotPermutation(perm.to_vec()));
        }
        let terms = self
            .terms
            .iter()
            .map(|t| Term { coeff: t.coeff, slots: perm.iter().map(|&p| t.slots[p].clone()).collect() })
            .collect();
        let mut out = TensorTermSum::from_terms(self.slots, self.q, terms)?;
        out.phase = self.phase;
        Ok(out)
    }

    /// Replaces the listed slots by the scalar value of their symbol and
    /// removes them (the homomorphism sending `S` to `1` on those slots).
    pub fn evaluate_symbol_on(&self, deleted: &[usize]) -> Self {
        let keep: Vec<usize> = (0..self.slots).filter(|s| !deleted.contains(s)).collect();
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let factor: f64 = deleted.iter().map(|&s| t.slots[s].symbol()).product();
                Term { coeff: t.coeff * factor, slots: keep.iter().map(|&s| t.slots[s].clone()).collect() }
            })
            .collect();
        let mut out = TensorTermSum::from_terms(keep.len(), self.q, terms).expect("same shape");
        out.phase = self.phase;
        out
    }

    /// Largest `|net shift|` of any slot word; outputs of `e_β` differ from
    /// `β` by at most this much in every slot.
    pub fn band_reach(&self) -> usize {
        self.terms
            .iter()
            .flat_map(|t| t.slots.iter().map(|w| w.net_shift().unsigned_abs()))
            .max()
            .unwrap_or(0)
    }

    /// Exact image of the basis vector `e_β`.
    pub fn apply(&self, beta: &[usize]) -> Result<BTreeMap<Vec<usize>, Complex64>, FockError> {
        if beta.len() != self.slots {
            return Err(FockError::SlotMismatch { left: self.slots, right: beta.len() });
        }
        let mut out: BTreeMap<Vec<usize>, Complex64> = BTreeMap::new();
        'terms: for t in &self.terms {
            let mut idx = Vec::with_capacity(self.slots);
            let mut weight = 1.0;
            for (w, &m) in t.slots.iter().zip(beta) {
                match w.act(m, self.q) {
                    Some((k, x)) => {
                        idx.push(k);
                        weight *= x;
                    }
                    None => continue 'terms,
                }
            }
            if weight != 0.0 {
                *out.entry(idx).or_insert(Complex64::new(0.0, 0.0)) += t.coeff * weight;
            }
        }
        let phase = self.phase.value();
        Ok(out
            .into_iter()
            .filter(|(_, c)| *c != Complex64::new(0.0, 0.0))
            .map(|(k, c)| (k, c * phase))
            .collect())
    }

    /// Finite section on multi-indices with all entries below `d`.
    pub fn section(&self, d: usize) -> Result<Section, FockError> {
        Section::build(self, d)
    }
}

impl fmt::Display for TensorTermSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let body: Vec<String> = self
            .terms
            .iter()
            .map(|t| {
                let words: Vec<String> = t.slots.iter().map(|w| w.to_string()).collect();
                format!("({}{:+}i)·{}", t.coeff.re, t.coeff.im, words.join(" ⊗ "))
            })
            .collect();
        if self.phase != UnitPhase::ONE {
            let p = self.phase.value();
            write!(f, "({}{:+}i)·[{}]", p.re, p.im, body.join(" + "))
        } else {
            write!(f, "{}", body.join(" + "))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const Q: f64 = 0.3;

    fn one_slot(p: Primitive) -> TensorTermSum {
        TensorTermSum::primitive(1, 0, p, Q).unwrap()
    }

    #[test]
    fn primitive_actions() {
        assert_eq!(Primitive::Shift.act(0, Q), None);
        assert_eq!(Primitive::Shift.act(4, Q), Some((3, 1.0)));
        assert_eq!(Primitive::CoShift.act(4, Q), Some((5, 1.0)));
        assert_eq!(Primitive::Proj0.act(0, Q), Some((0, 1.0)));
        assert_eq!(Primitive::Proj0.act(2, Q), None);
        assert_eq!(Primitive::DiagQN.act(3, Q), Some((3, Q.powi(3))));
        assert_eq!(Primitive::DiagQN1.act(3, Q), Some((3, Q.powi(4))));
        assert_eq!(Primitive::DiagSqrtW.act(0, Q), None);
        assert_eq!(Primitive::DiagQN.act(0, 0.0), Some((0, 1.0)));
        assert_eq!(Primitive::DiagQN.act(1, 0.0), None);
    }

    #[test]
    fn apply_examples() {
        assert!(one_slot(Primitive::Shift).apply(&[0]).unwrap().is_empty());
        let out = one_slot(Primitive::DiagQN).apply(&[3]).unwrap();
        assert_eq!(out.len(), 1);
        assert!((out[&vec![3]].re - 0.027).abs() < 1e-15);
        assert!(one_slot(Primitive::DiagSqrtW).apply(&[0]).unwrap().is_empty());
        assert!(matches!(
            one_slot(Primitive::Shift).apply(&[0, 1]),
            Err(FockError::SlotMismatch { .. })
        ));
    }

    #[test]
    fn zero_words_are_pruned() {
        assert!(FactorWord::new(vec![Primitive::Shift, Primitive::Proj0]).is_zero(Q));
        assert!(FactorWord::new(vec![Primitive::Proj0, Primitive::CoShift]).is_zero(Q));
        assert!(!FactorWord::new(vec![Primitive::Proj0, Primitive::Shift]).is_zero(Q));
        assert!(FactorWord::new(vec![Primitive::DiagQN1]).is_zero(0.0));
        assert!(!FactorWord::new(vec![Primitive::DiagQN]).is_zero(0.0));
        let s = one_slot(Primitive::Shift);
        let p = one_slot(Primitive::Proj0);
        assert!(s.mul(&p).unwrap().is_zero());
    }

    #[test]
    fn shift_costhift_product_is_identity_exactly() {
        let s = one_slot(Primitive::Shift);
        let prod = s.mul(&s.adjoint()).unwrap();
        for m in 0..20 {
            let out = prod.apply(&[m]).unwrap();
            assert_eq!(out.len(), 1);
            assert_eq!(out[&vec![m]], Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn asymptotics_of_words() {
        let w = FactorWord::new(vec![Primitive::Shift, Primitive::DiagSqrtW]);
        assert_eq!(w.tail_threshold(), 1);
        let a = w.asymptotics(3, Q).unwrap();
        assert_eq!(a.limit, 1.0);
        assert!((a.eps - (1.0 - (1.0 - Q.powi(6)).sqrt())).abs() < 1e-15);
        assert_eq!(a.shift, -1);
        let w = FactorWord::new(vec![Primitive::Proj0, Primitive::Shift, Primitive::Shift]);
        assert_eq!(w.tail_threshold(), 3);
        assert_eq!(FactorWord::single(Primitive::DiagQN).symbol(), 0.0);
        assert_eq!(FactorWord::single(Primitive::DiagSqrtW).symbol(), 1.0);
    }

    #[test]
    fn q_compatibility() {
        let a = TensorTermSum::primitive(1, 0, Primitive::DiagQN, 0.3).unwrap();
        let b = TensorTermSum::primitive(1, 0, Primitive::Proj0, 0.0).unwrap();
        let diff = a.sub(&b).unwrap();
        assert_eq!(diff.q(), 0.3);
        let c = TensorTermSum::primitive(1, 0, Primitive::DiagQN, 0.2).unwrap();
        assert!(matches!(a.sub(&c), Err(FockError::QMismatch { .. })));
        assert!(TensorTermSum::zero(1, 1.0).is_err());
    }

    #[test]
    fn phase_is_tracked_separately() {
        let i = Complex64::new(0.0, 1.0);
        let a = one_slot(Primitive::Shift).with_phase(UnitPhase::new(i));
        let b = one_slot(Primitive::Shift).with_phase(UnitPhase::new(i));
        let d = a.sub(&b).unwrap();
        assert!(d.is_zero());
        let out = a.apply(&[2]).unwrap();
        assert_eq!(out[&vec![1]], i);
        let mixed = a.add(&one_slot(Primitive::Shift)).unwrap();
        assert_eq!(mixed.phase(), UnitPhase::ONE);
        assert_eq!(mixed.apply(&[1]).unwrap()[&vec![0]], Complex64::new(1.0, 1.0));
    }

    #[test]
    fn symbol_evaluation_drops_slots() {
        let words = vec![FactorWord::single(Primitive::Shift), FactorWord::single(Primitive::DiagQN)];
        let ts = TensorTermSum::elementary(Q, Complex64::new(2.0, 0.0), words).unwrap();
        let ev = ts.evaluate_symbol_on(&[0]);
        assert_eq!(ev.slots(), 1);
        assert_eq!(ev.terms()[0].coeff, Complex64::new(2.0, 0.0));
        assert!(ts.evaluate_symbol_on(&[1]).is_zero());
    }

    #[test]
    fn permute_slots_checks_input() {
        let ts = TensorTermSum::identity(2, Q).unwrap();
        assert!(ts.permute_slots(&[0, 0]).is_err());
        assert!(ts.permute_slots(&[1, 0]).is_ok());
    }
}
