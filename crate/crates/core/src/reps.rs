//! Irreducible representations `π_{t,w} = χ_t * π_{s_{r_1}} * ... * π_{s_{r_L}}`
//! as symbolic operators on `l²(N)^{⊗L}`.
//!
//! Slot `m` of the tensor power carries the letter `r_m` of the word. The
//! image of `z_{i,j}` is the path sum over the `L`-fold coproduct, with the
//! crystallized coproduct at `q = 0` and the matrix coproduct for `q > 0`.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coalgebra::{coproduct_paths, CoalgebraError, CoproductMode};
use crate::coxeter::{CoxeterError, ReducedWord};
use crate::fock::{FactorWord, FockError, Primitive, TensorTermSum, Term, UnitPhase};

/// Allowed deviation of `|t_i|` from one.
pub const UNIT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RepsError {
    #[error("letter {letter} out of range 1..={n}")]
    LetterOutOfRange { letter: usize, n: usize },
    #[error("generator index ({i}, {j}) outside 1..={size}")]
    IndexOutOfRange { i: usize, j: usize, size: usize },
    #[error("torus point of rank {torus} used with words of rank {word}")]
    RankMismatch { torus: usize, word: usize },
    #[error("q = {0} outside [0, 1)")]
    InvalidQ(f64),
    #[error("torus coordinate {index} has modulus {modulus}, expected 1")]
    NotUnitModulus { index: usize, modulus: f64 },
    #[error(transparent)]
    Coxeter(#[from] CoxeterError),
    #[error(transparent)]
    Coalgebra(#[from] CoalgebraError),
    #[error(transparent)]
    Fock(#[from] FockError),
}

/// A point `(t_1, ..., t_n)` of the maximal torus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct TorusPoint {
    coords: Vec<Complex64>,
}

impl TorusPoint {
    pub fn new(coords: Vec<Complex64>) -> Result<Self, RepsError> {
        for (index, z) in coords.iter().enumerate() {
            let modulus = z.norm();
            if modulus.is_nan() || (modulus - 1.0).abs() > UNIT_TOLERANCE {
                return Err(RepsError::NotUnitModulus { index, modulus });
            }
        }
        Ok(TorusPoint { coords })
    }

    /// `t_0 = (1, ..., 1)`.
    pub fn identity(n: usize) -> Self {
        TorusPoint { coords: vec![Complex64::new(1.0, 0.0); n] }
    }

    /// `t_k = exp(i θ_k)`.
    pub fn from_angles(angles: &[f64]) -> Self {
        TorusPoint { coords: angles.iter().map(|&a| Complex64::from_polar(1.0, a)).collect() }
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let angles: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
        Self::from_angles(&angles)
    }

    pub fn rank(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    pub fn is_identity(&self) -> bool {
        self.coords.iter().all(|&z| z == Complex64::new(1.0, 0.0))
    }

    /// Largest coordinate distance to another point of the same rank.
    pub fn distance(&self, other: &TorusPoint) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl TryFrom<Vec<[f64; 2]>> for TorusPoint {
    type Error = RepsError;

    fn try_from(v: Vec<[f64; 2]>) -> Result<Self, RepsError> {
        TorusPoint::new(v.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
    }
}

impl From<TorusPoint> for Vec<[f64; 2]> {
    fn from(t: TorusPoint) -> Self {
        t.coords.iter().map(|z| [z.re, z.im]).collect()
    }
}

/// Matrix position `(i, j)` of the generator `z_{i,j}`, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GeneratorIndex {
    pub i: usize,
    pub j: usize,
}

impl GeneratorIndex {
    pub fn new(i: usize, j: usize) -> Self {
        GeneratorIndex { i, j }
    }

    /// All `(n+1)^2` generators in row-major order.
    pub fn all(n: usize) -> Vec<GeneratorIndex> {
        (1..=n + 1).flat_map(|i| (1..=n + 1).map(move |j| GeneratorIndex { i, j })).collect()
    }

    pub fn is_diagonal(&self) -> bool {
        self.i == self.j
    }

    fn check(&self, n: usize) -> Result<(), RepsError> {
        let size = n + 1;
        if self.i == 0 || self.j == 0 || self.i > size || self.j > size {
            return Err(RepsError::IndexOutOfRange { i: self.i, j: self.j, size });
        }
        Ok(())
    }
}

impl std::fmt::Display for GeneratorIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "z{}{}", self.i, self.j)
    }
}

/// The data `(t, w, q)` selecting one irreducible representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RepSpecJson", into = "RepSpecJson")]
pub struct RepSpec {
    t: TorusPoint,
    word: ReducedWord,
    q: f64,
}

#[derive(Serialize, Deserialize)]
struct RepSpecJson {
    n: usize,
    q: f64,
    t: TorusPoint,
    word: Vec<usize>,
}

impl TryFrom<RepSpecJson> for RepSpec {
    type Error = RepsError;

    fn try_from(j: RepSpecJson) -> Result<Self, RepsError> {
        RepSpec::new(j.t, ReducedWord::new(j.n, j.word)?, j.q)
    }
}

impl From<RepSpec> for RepSpecJson {
    fn from(s: RepSpec) -> Self {
        RepSpecJson { n: s.word.rank(), q: s.q, word: s.word.letters().to_vec(), t: s.t }
    }
}

impl RepSpec {
    pub fn new(t: TorusPoint, word: ReducedWord, q: f64) -> Result<Self, RepsError> {
        if t.rank() != word.rank() {
            return Err(RepsError::RankMismatch { torus: t.rank(), word: word.rank() });
        }
        if !(0.0..1.0).contains(&q) {
            return Err(RepsError::InvalidQ(q));
        }
        Ok(RepSpec { t, word, q })
    }

    pub fn t(&self) -> &TorusPoint {
        &self.t
    }

    pub fn word(&self) -> &ReducedWord {
        &self.word
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn rank(&self) -> usize {
        self.word.rank()
    }

    pub fn with_t(&self, t: TorusPoint) -> Result<Self, RepsError> {
        RepSpec::new(t, self.word.clone(), self.q)
    }

    pub fn with_q(&self, q: f64) -> Result<Self, RepsError> {
        RepSpec::new(self.t.clone(), self.word.clone(), q)
    }
}

/// One slot factor of a generator image: `coeff * word`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotEntry {
    pub coeff: f64,
    pub word: FactorWord,
}

impl SlotEntry {
    fn new(coeff: f64, factors: Vec<Primitive>) -> Self {
        SlotEntry { coeff, word: FactorWord::new(factors) }
    }
}

/// `π_{s_r}(z_{i,j})` at deformation `q`, or `None` where the entry vanishes.
pub fn simple_generator_image(
    n: usize,
    r: usize,
    g: GeneratorIndex,
    q: f64,
) -> Result<Option<SlotEntry>, RepsError> {
    if r == 0 || r > n {
        return Err(RepsError::LetterOutOfRange { letter: r, n });
    }
    g.check(n)?;
    if !(0.0..1.0).contains(&q) {
        return Err(RepsError::InvalidQ(q));
    }
    use Primitive::*;
    let crystal = q == 0.0;
    let entry = match (g.i, g.j) {
        (i, j) if i == r && j == r => {
            if crystal {
                SlotEntry::new(1.0, vec![Shift])
            } else {
                SlotEntry::new(1.0, vec![Shift, DiagSqrtW])
            }
        }
        (i, j) if i == r + 1 && j == r + 1 => {
            if crystal {
                SlotEntry::new(1.0, vec![CoShift])
            } else {
                SlotEntry::new(1.0, vec![DiagSqrtW, CoShift])
            }
        }
        (i, j) if i == r && j == r + 1 => {
            if crystal {
                SlotEntry::new(1.0, vec![Proj0])
            } else {
                SlotEntry::new(-1.0, vec![DiagQN1])
            }
        }
        (i, j) if i == r + 1 && j == r => {
            if crystal {
                SlotEntry::new(1.0, vec![Proj0])
            } else {
                SlotEntry::new(1.0, vec![DiagQN])
            }
        }
        (i, j) if i == j => SlotEntry::new(1.0, Vec::new()),
        _ => return Ok(None),
    };
    Ok(Some(entry))
}

/// `χ_t(z_{i,j})`, independent of `q`.
pub fn character(t: &TorusPoint, g: GeneratorIndex) -> Complex64 {
    let n = t.rank();
    if g.i != g.j {
        return Complex64::new(0.0, 0.0);
    }
    let c = t.coords();
    match g.i {
        1 if n >= 1 => c[0],
        i if i == n + 1 && n >= 1 => c[n - 1].conj(),
        i if 1 < i && i <= n => c[i - 2].conj() * c[i - 1],
        _ => Complex64::new(1.0, 0.0),
    }
}

/// `π_{t,w}(z_{i,j})` as a path sum over the iterated coproduct.
pub fn rep_image(spec: &RepSpec, g: GeneratorIndex) -> Result<TensorTermSum, RepsError> {
    let n = spec.rank();
    g.check(n)?;
    let q = spec.q;
    let letters = spec.word.letters();
    let slots = letters.len();
    let phase = UnitPhase::new(character(&spec.t, GeneratorIndex::new(g.i, g.i)));
    if !g.is_diagonal() && slots == 0 {
        return Ok(TensorTermSum::zero(0, q)?.with_phase(phase));
    }
    let paths = coproduct_paths(g.i, g.j, slots, CoproductMode::for_q(q), n)?;
    let mut terms = Vec::with_capacity(paths.len());
    'paths: for path in &paths {
        let mut coeff = 1.0;
        let mut words = Vec::with_capacity(slots);
        for (&r, (k, l)) in letters.iter().zip(path.leg_pairs()) {
            match simple_generator_image(n, r, GeneratorIndex::new(k, l), q)? {
                Some(e) => {
                    coeff *= e.coeff;
                    words.push(e.word);
                }
                None => continue 'paths,
            }
        }
        terms.push(Term { coeff: Complex64::new(coeff, 0.0), slots: words });
    }
    Ok(TensorTermSum::from_terms(slots, q, terms)?.with_phase(phase))
}

/// `c_{k,j}(q) = (-q)^{min(k-j, 0)}`; equal to one at `q = 0`.
pub fn crystal_scaling(g: GeneratorIndex, q: f64) -> f64 {
    let e = g.i as i32 - g.j as i32;
    if q == 0.0 || e >= 0 {
        1.0
    } else {
        (-q).powi(e)
    }
}

/// `π_{t,w}(c_{k,j}(q) z_{k,j}(q))`.
pub fn scaled_rep_image(spec: &RepSpec, g: GeneratorIndex) -> Result<TensorTermSum, RepsError> {
    let c = crystal_scaling(g, spec.q);
    let img = rep_image(spec, g)?;
    Ok(if c == 1.0 { img } else { img.scale(Complex64::new(c, 0.0)) })
}

/// `Σ_k π(z_{k,i})^* π(z_{k,j})` and `Σ_k π(z_{i,k}) π(z_{j,k})^*`, each
/// minus `δ_{i,j} I`.
pub fn unitarity_residuals(
    spec: &RepSpec,
    i: usize,
    j: usize,
) -> Result<(TensorTermSum, TensorTermSum), RepsError> {
    let n = spec.rank();
    let slots = spec.word.len();
    let q = spec.q;
    let delta = if i == j { 1.0 } else { 0.0 };
    let id = TensorTermSum::scalar(slots, q, Complex64::new(delta, 0.0))?;
    let mut cols = TensorTermSum::zero(slots, q)?;
    let mut rows = TensorTermSum::zero(slots, q)?;
    for k in 1..=n + 1 {
        let a = rep_image(spec, GeneratorIndex::new(k, i))?;
        let b = rep_image(spec, GeneratorIndex::new(k, j))?;
        cols = cols.add(&a.adjoint().mul(&b)?)?;
        let c = rep_image(spec, GeneratorIndex::new(i, k))?;
        let e = rep_image(spec, GeneratorIndex::new(j, k))?;
        rows = rows.add(&c.mul(&e.adjoint())?)?;
    }
    Ok((cols.sub(&id)?, rows.sub(&id)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::Primitive::*;

    fn g(i: usize, j: usize) -> GeneratorIndex {
        GeneratorIndex::new(i, j)
    }

    fn spec(n: usize, word: &[usize], q: f64) -> RepSpec {
        RepSpec::new(TorusPoint::identity(n), ReducedWord::new(n, word.to_vec()).unwrap(), q).unwrap()
    }

    fn single(coeff: f64, slots: Vec<Vec<Primitive>>, q: f64) -> TensorTermSum {
        TensorTermSum::elementary(
            q,
            Complex64::new(coeff, 0.0),
            slots.into_iter().map(FactorWord::new).collect(),
        )
        .unwrap()
    }

    #[test]
    fn generator_table() {
        let e = simple_generator_image(2, 1, g(1, 1), 0.3).unwrap().unwrap();
        assert_eq!(e.word.factors(), &[Shift, DiagSqrtW]);
        let e = simple_generator_image(2, 1, g(1, 1), 0.0).unwrap().unwrap();
        assert_eq!(e.word.factors(), &[Shift]);
        for q in [0.0, 0.4] {
            let e = simple_generator_image(2, 1, g(3, 3), q).unwrap().unwrap();
            assert!(e.word.factors().is_empty());
            assert_eq!(e.coeff, 1.0);
            assert!(simple_generator_image(2, 1, g(1, 3), q).unwrap().is_none());
        }
        let e = simple_generator_image(2, 2, g(2, 3), 0.3).unwrap().unwrap();
        assert_eq!((e.coeff, e.word.factors()), (-1.0, &[DiagQN1][..]));
        let e = simple_generator_image(2, 2, g(3, 2), 0.0).unwrap().unwrap();
        assert_eq!(e.word.factors(), &[Proj0]);
        assert!(simple_generator_image(2, 3, g(1, 1), 0.3).is_err());
        assert!(simple_generator_image(2, 0, g(1, 1), 0.3).is_err());
    }

    #[test]
    fn character_values() {
        let t = TorusPoint::from_angles(&[0.7, -1.9]);
        let [t1, t2] = [t.coords()[0], t.coords()[1]];
        assert_eq!(character(&t, g(1, 1)), t1);
        assert_eq!(character(&t, g(2, 2)), t1.conj() * t2);
        assert_eq!(character(&t, g(3, 3)), t2.conj());
        assert_eq!(character(&t, g(1, 2)), Complex64::new(0.0, 0.0));
        let t0 = TorusPoint::identity(3);
        for i in 1..=4 {
            assert_eq!(character(&t0, g(i, i)), Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn torus_validation_and_serde() {
        assert!(TorusPoint::new(vec![Complex64::new(2.0, 0.0)]).is_err());
        let t = TorusPoint::new(vec![Complex64::new(0.0, 1.0), Complex64::new(-1.0, 0.0)]).unwrap();
        let s = serde_json::to_string(&t).unwrap();
        assert_eq!(s, "[[0.0,1.0],[-1.0,0.0]]");
        assert_eq!(serde_json::from_str::<TorusPoint>(&s).unwrap(), t);
        assert!(serde_json::from_str::<TorusPoint>("[[0.5,0.0]]").is_err());
    }

    #[test]
    fn rep_spec_serde() {
        let t = TorusPoint::new(vec![Complex64::new(0.0, 1.0), Complex64::new(-1.0, 0.0)]).unwrap();
        let s = RepSpec::new(t, ReducedWord::new(2, vec![1, 2, 1]).unwrap(), 0.2).unwrap();
        let js = serde_json::to_string(&s).unwrap();
        assert_eq!(js, r#"{"n":2,"q":0.2,"t":[[0.0,1.0],[-1.0,0.0]],"word":[1,2,1]}"#);
        assert_eq!(serde_json::from_str::<RepSpec>(&js).unwrap(), s);
        assert!(serde_json::from_str::<RepSpec>(r#"{"n":2,"q":0.2,"t":[[1,0],[1,0]],"word":[1,1]}"#).is_err());
        assert!(RepSpec::new(TorusPoint::identity(3), ReducedWord::empty(2), 0.1).is_err());
        assert!(RepSpec::new(TorusPoint::identity(2), ReducedWord::empty(2), 1.0).is_err());
    }

    #[test]
    fn single_letter_image() {
        let img = rep_image(&spec(2, &[1], 0.3), g(1, 1)).unwrap();
        assert_eq!(img, single(1.0, vec![vec![Shift, DiagSqrtW]], 0.3));
    }

    #[test]
    fn empty_word_is_character() {
        let t = TorusPoint::from_angles(&[0.4, 1.1]);
        let s = RepSpec::new(t.clone(), ReducedWord::empty(2), 0.3).unwrap();
        let img = rep_image(&s, g(1, 1)).unwrap();
        assert_eq!(img.slots(), 0);
        let value = img.apply(&[]).unwrap();
        assert!((value[&Vec::new()] - t.coords()[0]).norm() < 1e-15);
        assert!(rep_image(&s, g(1, 2)).unwrap().is_zero());
    }

    #[test]
    fn crystal_two_letter_example() {
        let img = rep_image(&spec(2, &[2, 1], 0.0), g(3, 1)).unwrap();
        assert_eq!(img, single(1.0, vec![vec![Proj0], vec![Proj0]], 0.0));
    }

    #[test]
    fn scaled_cancellation() {
        let s = spec(2, &[1], 0.3);
        assert_eq!(scaled_rep_image(&s, g(2, 1)).unwrap(), rep_image(&s, g(2, 1)).unwrap());
        let scaled = scaled_rep_image(&s, g(1, 2)).unwrap();
        let qn = single(1.0, vec![vec![DiagQN1]], 0.3).scale(Complex64::new(1.0 / 0.3, 0.0));
        let sec_a = scaled.section(8).unwrap();
        let sec_b = single(1.0, vec![vec![DiagQN]], 0.3).section(8).unwrap();
        assert!(sec_a.max_abs_diff(&sec_b) < 1e-15);
        assert!(qn.section(8).unwrap().max_abs_diff(&sec_b) < 1e-15);
        let crystal = rep_image(&spec(2, &[1], 0.0), g(1, 2)).unwrap();
        assert_eq!(crystal, single(1.0, vec![vec![Proj0]], 0.0));
        assert_eq!(crystal_scaling(g(1, 3), 0.5), 4.0);
        assert_eq!(crystal_scaling(g(1, 2), 0.5), -2.0);
        assert_eq!(crystal_scaling(g(1, 3), 0.0), 1.0);
    }

    #[test]
    fn identity_word_is_diagonal() {
        for q in [0.0, 0.5] {
            let s = RepSpec::new(TorusPoint::from_angles(&[0.3, 0.9]), ReducedWord::empty(2), q).unwrap();
            for gen in GeneratorIndex::all(2) {
                assert_eq!(rep_image(&s, gen).unwrap().is_zero(), !gen.is_diagonal());
            }
        }
    }

    #[test]
    fn unitarity_single_letter() {
        let s = spec(1, &[1], 0.4);
        for i in 1..=2 {
            for j in 1..=2 {
                let (a, b) = unitarity_residuals(&s, i, j).unwrap();
                assert!(a.section(10).unwrap().max_abs_entry() < 1e-14);
                assert!(b.section(10).unwrap().max_abs_entry() < 1e-14);
            }
        }
    }
}
