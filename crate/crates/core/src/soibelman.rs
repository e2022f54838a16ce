//! Finite block sums standing in for direct integrals over the torus.
//!
//! A discrete measure on `T^n` with finitely many words gives the block
//! diagonal representation `⊕ π_{t,w}`. Its norm on any element is the
//! largest block norm, and an element vanishes iff it vanishes on every block.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coxeter::{longest_permutation, ReducedWord};
use crate::crystal::{
    convergence_deficit, deficit_operator, distance_up_to_unit, evaluate_kernel_element, p0_tensor,
    CrystalError, DeficitReport, GeneratorBounds, IDENTITY_TOLERANCE,
};
use crate::fock::norm_bounds;
use crate::reps::{rep_image, scaled_rep_image, GeneratorIndex, RepSpec, TorusPoint};
use crate::spectrum::RepLabel;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SoibelmanError {
    #[error("grid needs at least one point per circle")]
    EmptyGrid,
    #[error("q list must be nonempty, strictly decreasing and inside (0, 1)")]
    BadQList,
    #[error("no words given")]
    NoWords,
    #[error("block multiplicity must be positive")]
    ZeroMultiplicity,
    #[error("torus rank {torus} does not match word rank {word}")]
    RankMismatch { torus: usize, word: usize },
    #[error(transparent)]
    Crystal(#[from] CrystalError),
}

impl From<crate::reps::RepsError> for SoibelmanError {
    fn from(e: crate::reps::RepsError) -> Self {
        SoibelmanError::Crystal(e.into())
    }
}

impl From<crate::fock::FockError> for SoibelmanError {
    fn from(e: crate::fock::FockError) -> Self {
        SoibelmanError::Crystal(e.into())
    }
}

/// Points of `T^n` with positive weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMeasure {
    pub points: Vec<TorusPoint>,
    pub weights: Vec<f64>,
}

/// `e^{2πik/m}`, exact at multiples of a quarter turn.
fn root_of_unity(k: usize, m: usize) -> Complex64 {
    if (4 * k).is_multiple_of(m) {
        match (4 * k / m) % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    } else {
        Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / m as f64)
    }
}

/// The `m^n` points whose coordinates are `m`-th roots of unity, first
/// coordinate most significant, each with weight `m^{-n}`.
pub fn torus_grid(n: usize, m: usize) -> Result<GridMeasure, SoibelmanError> {
    if m == 0 {
        return Err(SoibelmanError::EmptyGrid);
    }
    let total = m.pow(n as u32);
    let points = (0..total)
        .map(|code| {
            let mut ks = vec![0; n];
            let mut rest = code;
            for s in (0..n).rev() {
                ks[s] = rest % m;
                rest /= m;
            }
            TorusPoint::new(ks.iter().map(|&k| root_of_unity(k, m)).collect()).expect("unit roots")
        })
        .collect();
    Ok(GridMeasure { points, weights: vec![1.0 / total as f64; total] })
}

/// One summand `multiplicity · π_{t,w}` of a block representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BlockJson", into = "BlockJson")]
pub struct Block {
    pub t: TorusPoint,
    pub word: ReducedWord,
    pub multiplicity: u32,
}

#[derive(Serialize, Deserialize)]
struct BlockJson {
    t: TorusPoint,
    word: Vec<usize>,
    multiplicity: u32,
}

impl TryFrom<BlockJson> for Block {
    type Error = SoibelmanError;

    fn try_from(b: BlockJson) -> Result<Self, SoibelmanError> {
        let n = b.t.rank();
        let word = ReducedWord::new(n, b.word).map_err(|e| SoibelmanError::from(CrystalError::from(e)))?;
        Block::new(b.t, word, b.multiplicity)
    }
}

impl From<Block> for BlockJson {
    fn from(b: Block) -> Self {
        BlockJson { t: b.t, word: b.word.letters().to_vec(), multiplicity: b.multiplicity }
    }
}

impl Block {
    pub fn new(t: TorusPoint, word: ReducedWord, multiplicity: u32) -> Result<Self, SoibelmanError> {
        if multiplicity == 0 {
            return Err(SoibelmanError::ZeroMultiplicity);
        }
        if t.rank() != word.rank() {
            return Err(SoibelmanError::RankMismatch { torus: t.rank(), word: word.rank() });
        }
        Ok(Block { t, word, multiplicity })
    }

    pub fn label(&self) -> RepLabel {
        RepLabel::new(self.t.clone(), self.word.permutation()).expect("ranks checked")
    }

    pub fn spec(&self, q: f64) -> Result<RepSpec, SoibelmanError> {
        Ok(RepSpec::new(self.t.clone(), self.word.clone(), q)?)
    }
}

/// Finite direct sum of irreducibles. Multiplicities never change norms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BlockRep {
    pub blocks: Vec<Block>,
}

impl BlockRep {
    /// One block per grid point and word, multiplicity one.
    pub fn from_grid(grid: &GridMeasure, words: &[ReducedWord]) -> Result<Self, SoibelmanError> {
        let mut blocks = Vec::with_capacity(grid.points.len() * words.len());
        for t in &grid.points {
            for w in words {
                blocks.push(Block::new(t.clone(), w.clone(), 1)?);
            }
        }
        Ok(BlockRep { blocks })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockDeficit {
    pub block: usize,
    pub word: Vec<usize>,
    pub max_lower: f64,
    pub max_upper: f64,
    /// Every generator bracket coincides bit for bit with the `t_0` one.
    pub matches_t0: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockDeficitReport {
    pub q: f64,
    pub d: usize,
    pub blocks: Vec<BlockDeficit>,
    /// Per generator, the largest bracket over all blocks.
    pub generators: Vec<GeneratorBounds>,
    pub reference: Vec<DeficitReport>,
    pub sup_lower: f64,
    pub sup_upper: f64,
    /// The supremum over the grid is attained at `t_0`.
    pub t_independent: bool,
}

/// Supremum over blocks `(t, w)` of the deficit brackets.
pub fn block_deficit_sup(
    grid: &GridMeasure,
    words: &[ReducedWord],
    q: f64,
    d: usize,
) -> Result<BlockDeficitReport, SoibelmanError> {
    if words.is_empty() {
        return Err(SoibelmanError::NoWords);
    }
    let rep = BlockRep::from_grid(grid, words)?;
    let reference = words
        .iter()
        .map(|w| convergence_deficit(&TorusPoint::identity(w.rank()), w, q, d))
        .collect::<Result<Vec<_>, _>>()?;
    let per_block = rep
        .blocks
        .par_iter()
        .map(|b| convergence_deficit(&b.t, &b.word, q, d))
        .collect::<Result<Vec<_>, _>>()?;
    let blocks: Vec<BlockDeficit> = per_block
        .iter()
        .enumerate()
        .map(|(k, r)| {
            let reference = &reference[k % words.len()];
            BlockDeficit {
                block: k,
                word: r.word.clone(),
                max_lower: r.max_lower,
                max_upper: r.max_upper,
                matches_t0: r.generators == reference.generators,
            }
        })
        .collect();
    let mut generators: Vec<GeneratorBounds> = reference[0]
        .generators
        .iter()
        .map(|g| GeneratorBounds { i: g.i, j: g.j, lower: 0.0, upper: 0.0 })
        .collect();
    for r in &per_block {
        for (acc, g) in generators.iter_mut().zip(&r.generators) {
            acc.lower = acc.lower.max(g.lower);
            acc.upper = acc.upper.max(g.upper);
        }
    }
    let sup_lower = generators.iter().map(|g| g.lower).fold(0.0, f64::max);
    let sup_upper = generators.iter().map(|g| g.upper).fold(0.0, f64::max);
    let ref_lower = reference.iter().map(|r| r.max_lower).fold(0.0, f64::max);
    let ref_upper = reference.iter().map(|r| r.max_upper).fold(0.0, f64::max);
    let t_independent = blocks.iter().all(|b| b.matches_t0) && sup_lower == ref_lower && sup_upper == ref_upper;
    Ok(BlockDeficitReport {
        q,
        d,
        blocks,
        generators,
        reference,
        sup_lower,
        sup_upper,
        t_independent,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelBlock {
    pub block: usize,
    pub word: Vec<usize>,
    pub is_longest: bool,
    pub norm_upper: f64,
    pub annihilates: bool,
    /// Entrywise distance of the image from a unit multiple of `P_0^{⊗L}`,
    /// for longest-word blocks.
    pub p0_distance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaithfulnessReport {
    pub d: usize,
    pub blocks: Vec<KernelBlock>,
    pub has_longest_blocks: bool,
    /// `a` vanishes on every block off the longest stratum and is a unit
    /// multiple of `P_0^{⊗L}` on every block in it.
    pub separates_longest_stratum: bool,
    pub tolerance: f64,
}

/// Evaluates the kernel element `a` on each block at `q = 0`.
pub fn faithfulness_probe(rep: &BlockRep, d: usize) -> Result<FaithfulnessReport, SoibelmanError> {
    let blocks = rep
        .blocks
        .par_iter()
        .enumerate()
        .map(|(k, b)| {
            let n = b.word.rank();
            let is_longest = n >= 1 && b.word.permutation() == longest_permutation(n);
            let eval = evaluate_kernel_element(&b.spec(0.0)?, d)?;
            let p0_distance = if is_longest {
                let p0 = p0_tensor(b.word.len()).section(d)?;
                Some(distance_up_to_unit(&eval.image.section(d)?, &p0))
            } else {
                None
            };
            Ok(KernelBlock {
                block: k,
                word: b.word.letters().to_vec(),
                is_longest,
                norm_upper: eval.bounds.upper,
                annihilates: eval.bounds.upper <= IDENTITY_TOLERANCE,
                p0_distance,
            })
        })
        .collect::<Result<Vec<_>, SoibelmanError>>()?;
    let has_longest_blocks = blocks.iter().any(|b| b.is_longest);
    let separates_longest_stratum = blocks.iter().all(|b| {
        if b.is_longest {
            !b.annihilates && b.p0_distance.is_some_and(|x| x <= IDENTITY_TOLERANCE)
        } else {
            b.annihilates
        }
    });
    Ok(FaithfulnessReport {
        d,
        blocks,
        has_longest_blocks,
        separates_longest_stratum,
        tolerance: IDENTITY_TOLERANCE,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapSequence {
    pub word: Vec<usize>,
    pub i: usize,
    pub j: usize,
    /// Largest entry of the block sections of `π^{(q)}(c z) − π^{(0)}(z)`.
    pub entry_gap: Vec<f64>,
    pub norm_lower: Vec<f64>,
    pub norm_upper: Vec<f64>,
}

impl GapSequence {
    /// Each sequence is identically zero or strictly decreasing.
    pub fn is_decreasing(&self) -> bool {
        [&self.entry_gap, &self.norm_lower, &self.norm_upper]
            .iter()
            .all(|s| s.iter().all(|&x| x == 0.0) || s.windows(2).all(|p| p[1] < p[0]))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitSampleReport {
    pub q_list: Vec<f64>,
    pub d: usize,
    pub grid_points: usize,
    pub sequences: Vec<GapSequence>,
    pub all_decreasing: bool,
}

/// Gaps between the scaled `q`-sections and the `q = 0` sections, whose
/// operators are the limits, over all blocks of `grid × words`.
pub fn limit_algebra_sample(
    grid: &GridMeasure,
    words: &[ReducedWord],
    q_list: &[f64],
    d: usize,
) -> Result<LimitSampleReport, SoibelmanError> {
    let ok = !q_list.is_empty()
        && q_list.iter().all(|&q| q > 0.0 && q < 1.0)
        && q_list.windows(2).all(|p| p[1] < p[0]);
    if !ok {
        return Err(SoibelmanError::BadQList);
    }
    if words.is_empty() {
        return Err(SoibelmanError::NoWords);
    }
    let mut cases = Vec::new();
    for w in words {
        for g in GeneratorIndex::all(w.rank()) {
            cases.push((w.clone(), g));
        }
    }
    let sequences = cases
        .into_par_iter()
        .map(|(w, g)| {
            let mut seq = GapSequence {
                word: w.letters().to_vec(),
                i: g.i,
                j: g.j,
                entry_gap: Vec::with_capacity(q_list.len()),
                norm_lower: Vec::with_capacity(q_list.len()),
                norm_upper: Vec::with_capacity(q_list.len()),
            };
            for &q in q_list {
                let (mut entry, mut lower, mut upper): (f64, f64, f64) = (0.0, 0.0, 0.0);
                for t in &grid.points {
                    let spec = RepSpec::new(t.clone(), w.clone(), q)?;
                    let limit = rep_image(&spec.with_q(0.0)?, g)?.section(d)?;
                    let scaled = scaled_rep_image(&spec, g)?.section(d)?;
                    entry = entry.max(scaled.max_abs_diff(&limit));
                    let b = norm_bounds(&deficit_operator(&spec, g)?, d)?;
                    lower = lower.max(b.lower);
                    upper = upper.max(b.upper);
                }
                seq.entry_gap.push(entry);
                seq.norm_lower.push(lower);
                seq.norm_upper.push(upper);
            }
            Ok(seq)
        })
        .collect::<Result<Vec<_>, SoibelmanError>>()?;
    let all_decreasing = sequences.iter().all(|s| s.is_decreasing());
    Ok(LimitSampleReport {
        q_list: q_list.to_vec(),
        d,
        grid_points: grid.points.len(),
        sequences,
        all_decreasing,
    })
}
