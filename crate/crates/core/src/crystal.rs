//! Crystal-limit checks on the representation images.
//!
//! * convergence deficits `‖π^{(q)}(c_{k,j}(q) z_{k,j}) − π^{(0)}(z_{k,j})‖`,
//! * the braid-move identities relating equivalent reduced words,
//! * the kernel element `a` separating the longest-word stratum,
//! * Bruhat factorization through leg deletion,
//! * recovery of the torus label from diagonal generator images.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coalgebra::{coproduct_paths, delete_legs, CoproductMode};
use crate::coxeter::{
    bruhat_leq, normal_form, reduced_subword_positions, CoxeterError, Permutation, ReducedWord,
};
use crate::fock::{
    norm_bounds, FactorWord, FockError, NormBounds, Primitive, Section, TensorTermSum, Term,
    UnitPhase,
};
use crate::reps::{
    character, rep_image, scaled_rep_image, simple_generator_image, GeneratorIndex, RepSpec,
    RepsError, TorusPoint,
};

/// Entrywise tolerance for the identity checks of this module.
pub const IDENTITY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CrystalError {
    #[error("q = {0} must lie in (0, 1)")]
    RequiresDeformed(f64),
    #[error("q = {0} must be 0")]
    RequiresCrystal(f64),
    #[error("{u} is not below {w} in Bruhat order")]
    NotBelow { u: String, w: String },
    #[error("no image supplied for generator {0}")]
    MissingImage(GeneratorIndex),
    #[error("torus coordinate {coordinate} cannot be recovered: reference image vanishes on the section")]
    Unrecoverable { coordinate: usize },
    #[error("rank {n} too small, need at least {min}")]
    RankTooSmall { n: usize, min: usize },
    #[error(transparent)]
    Reps(#[from] RepsError),
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error(transparent)]
    Coxeter(#[from] CoxeterError),
}

impl From<crate::coalgebra::CoalgebraError> for CrystalError {
    fn from(e: crate::coalgebra::CoalgebraError) -> Self {
        CrystalError::Reps(RepsError::from(e))
    }
}

/// `π^{(q)}_{t,w}(c_{k,j}(q) z_{k,j}(q)) − π^{(0)}_{t,w}(z_{k,j}(0))`.
pub fn deficit_operator(spec: &RepSpec, g: GeneratorIndex) -> Result<TensorTermSum, CrystalError> {
    let scaled = scaled_rep_image(spec, g)?;
    let crystal = rep_image(&spec.with_q(0.0)?, g)?.at_q(spec.q())?;
    Ok(scaled.sub(&crystal)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorBounds {
    pub i: usize,
    pub j: usize,
    pub lower: f64,
    pub upper: f64,
}

impl GeneratorBounds {
    pub fn generator(&self) -> GeneratorIndex {
        GeneratorIndex::new(self.i, self.j)
    }

    pub fn bounds(&self) -> NormBounds {
        NormBounds { lower: self.lower, upper: self.upper }
    }
}

/// Certified norm brackets of every deficit operator of one representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeficitReport {
    pub n: usize,
    pub q: f64,
    pub word: Vec<usize>,
    pub d: usize,
    pub generators: Vec<GeneratorBounds>,
    pub max_lower: f64,
    pub max_upper: f64,
}

impl DeficitReport {
    pub fn get(&self, g: GeneratorIndex) -> Option<&GeneratorBounds> {
        self.generators.iter().find(|b| b.i == g.i && b.j == g.j)
    }
}

/// Deficits of all `(n+1)^2` generators; `0 < q < 1`.
pub fn convergence_deficit(
    t: &TorusPoint,
    word: &ReducedWord,
    q: f64,
    d: usize,
) -> Result<DeficitReport, CrystalError> {
    if !(q > 0.0 && q < 1.0) {
        return Err(CrystalError::RequiresDeformed(q));
    }
    let spec = RepSpec::new(t.clone(), word.clone(), q)?;
    let n = word.rank();
    let generators = GeneratorIndex::all(n)
        .into_par_iter()
        .map(|g| {
            let b = norm_bounds(&deficit_operator(&spec, g)?, d)?;
            Ok(GeneratorBounds { i: g.i, j: g.j, lower: b.lower, upper: b.upper })
        })
        .collect::<Result<Vec<_>, CrystalError>>()?;
    let max_lower = generators.iter().map(|b| b.lower).fold(0.0, f64::max);
    let max_upper = generators.iter().map(|b| b.upper).fold(0.0, f64::max);
    Ok(DeficitReport { n, q, word: word.letters().to_vec(), d, generators, max_lower, max_upper })
}

/// CSV table: one row per report, one column of upper bounds per generator.
pub fn deficit_table_csv(reports: &[DeficitReport]) -> String {
    let mut out = String::from("q");
    if let Some(first) = reports.first() {
        for b in &first.generators {
            out.push_str(&format!(",z{}{}", b.i, b.j));
        }
    }
    out.push('\n');
    for r in reports {
        out.push_str(&r.q.to_string());
        for b in &r.generators {
            out.push_str(&format!(",{:e}", b.upper));
        }
        out.push('\n');
    }
    out
}

/// Test hooks that deliberately break an identity.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BraidOptions {
    /// Negates the right-hand side of the reflection identity.
    pub inject_sign_flip: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReflectionResidual {
    /// The identity compares words `[w, w+1, w]` and `[w+1, w, w+1]`.
    pub window: usize,
    pub i: usize,
    pub j: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlipResidual {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    pub i: usize,
    pub j: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BraidReport {
    pub n: usize,
    pub q: f64,
    pub d: usize,
    /// Empty unless `q = 0`.
    pub reflection: Vec<ReflectionResidual>,
    pub flip: Vec<FlipResidual>,
    pub max_reflection_residual: f64,
    pub max_flip_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn spec_t0(n: usize, letters: Vec<usize>, q: f64) -> Result<RepSpec, CrystalError> {
    Ok(RepSpec::new(TorusPoint::identity(n), ReducedWord::new(n, letters)?, q)?)
}

/// Braid-move identities.
///
/// Reflection (at `q = 0`, for every window `w` with `w + 2 <= n + 1`):
/// `π_{[w,w+1,w]}(z_{k,l})` equals `π_{[w+1,w,w+1]}(z_{k',l'})^*` with
/// `k' = 2w + 2 − k`, for `k, l` in the window `w..=w+2`.
///
/// Flip (any `q`, letters `a, b` with `|a − b| >= 2`): swapping the two
/// tensor slots of `π_{[a,b]}(z)` gives `π_{[b,a]}(z)`.
pub fn braid_equivalence_check(
    q: f64,
    d: usize,
    n: usize,
    opts: BraidOptions,
) -> Result<BraidReport, CrystalError> {
    let mut reflection_cases = Vec::new();
    if q == 0.0 {
        for w in 1..n {
            for k in w..=w + 2 {
                for l in w..=w + 2 {
                    reflection_cases.push((w, k, l));
                }
            }
        }
    }
    let reflection = reflection_cases
        .into_par_iter()
        .map(|(w, k, l)| {
            let lhs = rep_image(&spec_t0(n, vec![w, w + 1, w], q)?, GeneratorIndex::new(k, l))?;
            let g = GeneratorIndex::new(2 * w + 2 - k, 2 * w + 2 - l);
            let mut rhs = rep_image(&spec_t0(n, vec![w + 1, w, w + 1], q)?, g)?;
            if opts.inject_sign_flip {
                rhs = rhs.scale(Complex64::new(-1.0, 0.0));
            }
            let residual = lhs.section(d)?.max_abs_diff(&rhs.section(d)?.adjoint());
            Ok(ReflectionResidual { window: w, i: k, j: l, residual })
        })
        .collect::<Result<Vec<_>, CrystalError>>()?;

    let mut flip_cases = Vec::new();
    for a in 1..=n {
        for b in a + 2..=n {
            for g in GeneratorIndex::all(n) {
                flip_cases.push((a, b, g));
            }
        }
    }
    let flip = flip_cases
        .into_par_iter()
        .map(|(a, b, g)| {
            let lhs = rep_image(&spec_t0(n, vec![a, b], q)?, g)?.permute_slots(&[1, 0])?;
            let rhs = rep_image(&spec_t0(n, vec![b, a], q)?, g)?;
            let residual = lhs.section(d)?.max_abs_diff(&rhs.section(d)?);
            Ok(FlipResidual { left: vec![a, b], right: vec![b, a], i: g.i, j: g.j, residual })
        })
        .collect::<Result<Vec<_>, CrystalError>>()?;

    let max_reflection_residual = reflection.iter().map(|r| r.residual).fold(0.0, f64::max);
    let max_flip_residual = flip.iter().map(|r| r.residual).fold(0.0, f64::max);
    let tolerance = IDENTITY_TOLERANCE;
    let pass = max_reflection_residual <= tolerance && max_flip_residual <= tolerance;
    Ok(BraidReport {
        n,
        q,
        d,
        reflection,
        flip,
        max_reflection_residual,
        max_flip_residual,
        tolerance,
        pass,
    })
}

/// `a = (z_{n+1,1})(z_{n,1} z_{n+1,2}) ... (z_{2,1} z_{3,2} ... z_{n+1,n})`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelElement {
    pub n: usize,
    pub brackets: Vec<Vec<GeneratorIndex>>,
}

impl KernelElement {
    pub fn new(n: usize) -> Self {
        // bracket k holds z_{n+2-k+m-1, m} for m = 1..=k
        let brackets = (1..=n)
            .map(|k| (1..=k).map(|m| GeneratorIndex::new(n + 2 - k + m - 1, m)).collect())
            .collect();
        KernelElement { n, brackets }
    }

    /// All factors in product order.
    pub fn factors(&self) -> impl Iterator<Item = GeneratorIndex> + '_ {
        self.brackets.iter().flatten().copied()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelEvaluation {
    pub image: TensorTermSum,
    pub bounds: NormBounds,
}

/// `π_{t,w}(a)` at `q = 0` together with its norm bracket on the `d`-section.
pub fn evaluate_kernel_element(spec: &RepSpec, d: usize) -> Result<KernelEvaluation, CrystalError> {
    if spec.q() != 0.0 {
        return Err(CrystalError::RequiresCrystal(spec.q()));
    }
    let a = KernelElement::new(spec.rank());
    let mut image = TensorTermSum::identity(spec.word().len(), 0.0)?;
    for g in a.factors() {
        image = image.mul(&rep_image(spec, g)?)?;
    }
    let bounds = norm_bounds(&image, d)?;
    Ok(KernelEvaluation { image, bounds })
}

/// `P_0 ⊗ ... ⊗ P_0` on `slots` slots.
pub fn p0_tensor(slots: usize) -> TensorTermSum {
    TensorTermSum::elementary(
        0.0,
        Complex64::new(1.0, 0.0),
        vec![FactorWord::single(Primitive::Proj0); slots],
    )
    .expect("q = 0 is valid")
}

/// Smallest entrywise distance between `a` and `λ b` over unit scalars `λ`,
/// with `λ` read off the largest entry of `b`. Infinite if `b` vanishes
/// while `a` does not.
pub fn distance_up_to_unit(a: &Section, b: &Section) -> f64 {
    let Some((r, c)) = largest_entry(b) else {
        return if a.max_abs_entry() == 0.0 { 0.0 } else { f64::INFINITY };
    };
    let ratio = a.entry(r, c) / b.entry(r, c);
    if ratio.norm() == 0.0 {
        return f64::INFINITY;
    }
    let lambda = ratio / ratio.norm();
    let mut worst: f64 = 0.0;
    for col in 0..a.dim() {
        let rows: BTreeSet<usize> = a.column(col).iter().chain(b.column(col)).map(|&(r, _)| r).collect();
        for row in rows {
            worst = worst.max((a.entry(row, col) - lambda * b.entry(row, col)).norm());
        }
    }
    worst
}

/// Position of the first entry of maximal modulus, in column-major order.
fn largest_entry(s: &Section) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize, f64)> = None;
    for col in 0..s.dim() {
        for &(row, v) in s.column(col) {
            if best.is_none_or(|(_, _, m)| v.norm() > m) {
                best = Some((row, col, v.norm()));
            }
        }
    }
    best.filter(|&(_, _, m)| m > 0.0).map(|(r, c, _)| (r, c))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorizationResidual {
    pub i: usize,
    pub j: usize,
    /// Symbol map `S -> 1` applied on the deleted slots of the operator.
    pub symbol_residual: f64,
    /// Counit applied leg-wise to the coproduct paths of `w`.
    pub path_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorizationReport {
    pub u: Vec<usize>,
    pub w: Vec<usize>,
    pub word: Vec<usize>,
    pub u_word: Vec<usize>,
    /// 1-based legs of `word` removed to reach `u_word`.
    pub deleted_legs: Vec<usize>,
    pub q: f64,
    pub d: usize,
    pub generators: Vec<FactorizationResidual>,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Image of `z_{i,j}` under `π_{t,word}` built from the `w`-paths that
/// survive the counit on `deleted`.
fn deleted_path_image(
    spec_w: &RepSpec,
    u_letters: &[usize],
    deleted: &BTreeSet<usize>,
    g: GeneratorIndex,
) -> Result<TensorTermSum, CrystalError> {
    let n = spec_w.rank();
    let q = spec_w.q();
    let paths = coproduct_paths(g.i, g.j, spec_w.word().len(), CoproductMode::for_q(q), n)?;
    let kept = delete_legs(&paths, deleted)?;
    let mut terms = Vec::with_capacity(kept.len());
    'paths: for path in &kept {
        let mut coeff = 1.0;
        let mut words = Vec::with_capacity(u_letters.len());
        for (&r, (k, l)) in u_letters.iter().zip(path.leg_pairs()) {
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
    let phase = character(spec_w.t(), GeneratorIndex::new(g.i, g.i));
    Ok(TensorTermSum::from_terms(u_letters.len(), q, terms)?.with_phase(UnitPhase::new(phase)))
}

/// Checks that `π_{t,u}` factors through `π_{t,w}` for `u <= w`.
///
/// The reduced word of `w` is its normal form; `u` is realised as the first
/// reduced subword of it.
pub fn factorization_check(
    u: &Permutation,
    w: &Permutation,
    t: &TorusPoint,
    q: f64,
    d: usize,
) -> Result<FactorizationReport, CrystalError> {
    if !bruhat_leq(u, w)? {
        return Err(CrystalError::NotBelow { u: u.to_string(), w: w.to_string() });
    }
    let n = w.rank();
    let word = normal_form(w).expand();
    let positions = reduced_subword_positions(n, &word, u)?
        .ok_or_else(|| CrystalError::NotBelow { u: u.to_string(), w: w.to_string() })?;
    let u_word: Vec<usize> = positions.iter().map(|&p| word[p]).collect();
    let deleted0: Vec<usize> = (0..word.len()).filter(|p| !positions.contains(p)).collect();
    let deleted: BTreeSet<usize> = deleted0.iter().map(|&p| p + 1).collect();
    let spec_w = RepSpec::new(t.clone(), ReducedWord::new(n, word.clone())?, q)?;
    let spec_u = RepSpec::new(t.clone(), ReducedWord::new(n, u_word.clone())?, q)?;

    let generators = GeneratorIndex::all(n)
        .into_par_iter()
        .map(|g| {
            let direct = rep_image(&spec_u, g)?.section(d)?;
            let symbol = rep_image(&spec_w, g)?.evaluate_symbol_on(&deleted0).section(d)?;
            let paths = deleted_path_image(&spec_w, &u_word, &deleted, g)?.section(d)?;
            Ok(FactorizationResidual {
                i: g.i,
                j: g.j,
                symbol_residual: symbol.max_abs_diff(&direct),
                path_residual: paths.max_abs_diff(&direct),
            })
        })
        .collect::<Result<Vec<_>, CrystalError>>()?;
    let max_residual = generators
        .iter()
        .map(|r| r.symbol_residual.max(r.path_residual))
        .fold(0.0, f64::max);
    Ok(FactorizationReport {
        u: u.images().to_vec(),
        w: w.images().to_vec(),
        word,
        u_word,
        deleted_legs: deleted.into_iter().collect(),
        q,
        d,
        generators,
        max_residual,
        tolerance: IDENTITY_TOLERANCE,
        pass: max_residual <= IDENTITY_TOLERANCE,
    })
}

/// Sections of the diagonal generator images of `π_{t,word}`.
pub fn diagonal_images(spec: &RepSpec, d: usize) -> Result<BTreeMap<GeneratorIndex, Section>, CrystalError> {
    (1..=spec.rank() + 1)
        .map(|i| {
            let g = GeneratorIndex::new(i, i);
            Ok((g, rep_image(spec, g)?.section(d)?))
        })
        .collect()
}

/// Recovers `t` from sections of `π_{t,word}(z_{i,i})`.
///
/// The ratio against the `t_0` image at its largest entry is
/// `χ_t(z_{i,i})`; the characters telescope to `t_i = t_{i-1} χ_t(z_{i,i})`.
pub fn recover_torus_label(
    images: &BTreeMap<GeneratorIndex, Section>,
    word: &ReducedWord,
    q: f64,
    d: usize,
) -> Result<TorusPoint, CrystalError> {
    let n = word.rank();
    let reference = RepSpec::new(TorusPoint::identity(n), word.clone(), q)?;
    let mut chars = Vec::with_capacity(n + 1);
    for i in 1..=n + 1 {
        let g = GeneratorIndex::new(i, i);
        let image = images.get(&g).ok_or(CrystalError::MissingImage(g))?;
        let ref_section = rep_image(&reference, g)?.section(d)?;
        let (r, c) = largest_entry(&ref_section).ok_or(CrystalError::Unrecoverable { coordinate: i })?;
        let ratio = image.entry(r, c) / ref_section.entry(r, c);
        if ratio.norm() == 0.0 {
            return Err(CrystalError::Unrecoverable { coordinate: i });
        }
        chars.push(ratio / ratio.norm());
    }
    let mut coords = Vec::with_capacity(n);
    let mut prev = Complex64::new(1.0, 0.0);
    for c in chars.iter().take(n) {
        prev *= c;
        coords.push(prev / prev.norm());
    }
    Ok(TorusPoint::new(coords)?)
}
