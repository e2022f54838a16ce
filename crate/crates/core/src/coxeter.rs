//! Type-A Coxeter combinatorics for the symmetric group `S_{n+1}`.
//!
//! Permutations are stored in one-line notation with values in `1..=n+1`.
//! Composition is functional: `compose(u, w)(x) = u(w(x))`, and a word
//! `[r_1, r_2, ..., r_k]` denotes the product `s_{r_1} s_{r_2} ... s_{r_k}`
//! read with the same convention. This is the order in which the letters of
//! a word are fed into the convolution product of representations, and it
//! is used everywhere in the crate.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoxeterError {
    #[error("rank mismatch: S_{} vs S_{}", .left + 1, .right + 1)]
    RankMismatch { left: usize, right: usize },
    #[error("not a permutation of 1..={size}: {images:?}")]
    InvalidPermutation { images: Vec<usize>, size: usize },
    #[error("letter {letter} out of range 1..={n}")]
    LetterOutOfRange { letter: usize, n: usize },
    #[error("word {0:?} is not reduced")]
    NotReduced(Vec<usize>),
    #[error("rank must be at least {min}, got {n}")]
    RankTooSmall { n: usize, min: usize },
    #[error("reduced word enumeration exceeded budget of {0} words")]
    BudgetExceeded(usize),
    #[error("cannot parse {input:?}: {reason}")]
    Parse { input: String, reason: String },
}

/// An element of `S_{n+1}` in one-line notation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self, CoxeterError> {
        let size = images.len();
        let mut seen = vec![false; size + 1];
        for &v in &images {
            if v == 0 || v > size || seen[v] {
                return Err(CoxeterError::InvalidPermutation { images, size });
            }
            seen[v] = true;
        }
        if size < 2 {
            return Err(CoxeterError::RankTooSmall { n: size.saturating_sub(1), min: 1 });
        }
        Ok(Permutation { images })
    }

    pub fn identity(n: usize) -> Self {
        Permutation { images: (1..=n + 1).collect() }
    }

    /// The Coxeter generator `s_r = (r, r+1)`.
    pub fn simple(n: usize, r: usize) -> Result<Self, CoxeterError> {
        check_letter(r, n)?;
        let mut p = Self::identity(n);
        p.images.swap(r - 1, r);
        Ok(p)
    }

    /// Product `s_{r_1} ... s_{r_k}` of a (not necessarily reduced) word.
    pub fn from_word(n: usize, letters: &[usize]) -> Result<Self, CoxeterError> {
        let mut p = Self::identity(n);
        for &r in letters {
            check_letter(r, n)?;
            p.right_mul_simple(r);
        }
        Ok(p)
    }

    /// Every element of `S_{n+1}`, in lexicographic order of one-line notation.
    pub fn all(n: usize) -> Vec<Self> {
        (1..=n + 1)
            .permutations(n + 1)
            .map(|images| Permutation { images })
            .collect()
    }

    /// Rank parameter: the group is `S_{n+1}`.
    pub fn rank(&self) -> usize {
        self.images.len() - 1
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// `w(x)` for `x` in `1..=n+1`.
    pub fn apply(&self, x: usize) -> usize {
        self.images[x - 1]
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &v)| v == i + 1)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.images.len()];
        for (i, &v) in self.images.iter().enumerate() {
            inv[v - 1] = i + 1;
        }
        Permutation { images: inv }
    }

    /// Number of inversions of the one-line notation.
    pub fn length(&self) -> usize {
        let m = self.images.len();
        (0..m)
            .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
            .filter(|&(i, j)| self.images[i] > self.images[j])
            .count()
    }

    /// `self * s_r`: swaps positions `r` and `r+1` of the one-line notation.
    fn right_mul_simple(&mut self, r: usize) {
        self.images.swap(r - 1, r);
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.images.iter().join(" "))
    }
}

impl Serialize for Permutation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.images.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Permutation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let images = Vec::<usize>::deserialize(d)?;
        Permutation::new(images).map_err(serde::de::Error::custom)
    }
}

impl FromStr for Permutation {
    type Err = CoxeterError;

    /// Accepts one-line notation separated by whitespace or commas, or a JSON list.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let trimmed = s.trim().trim_start_matches('[').trim_end_matches(']');
        let images = trimmed
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|tok| !tok.is_empty())
            .map(|tok| {
                tok.parse::<usize>().map_err(|e| CoxeterError::Parse {
                    input: s.to_string(),
                    reason: e.to_string(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Permutation::new(images)
    }
}

pub fn compose(u: &Permutation, w: &Permutation) -> Result<Permutation, CoxeterError> {
    same_rank(u, w)?;
    Ok(Permutation {
        images: w.images.iter().map(|&x| u.apply(x)).collect(),
    })
}

pub fn length(w: &Permutation) -> usize {
    w.length()
}

fn check_letter(r: usize, n: usize) -> Result<(), CoxeterError> {
    if r == 0 || r > n {
        Err(CoxeterError::LetterOutOfRange { letter: r, n })
    } else {
        Ok(())
    }
}

fn same_rank(u: &Permutation, w: &Permutation) -> Result<(), CoxeterError> {
    if u.rank() != w.rank() {
        Err(CoxeterError::RankMismatch { left: u.rank(), right: w.rank() })
    } else {
        Ok(())
    }
}

/// A reduced expression: the letters multiply to a permutation of length
/// equal to the number of letters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ReducedWord {
    n: usize,
    letters: Vec<usize>,
}

impl ReducedWord {
    pub fn new(n: usize, letters: Vec<usize>) -> Result<Self, CoxeterError> {
        let p = Permutation::from_word(n, &letters)?;
        if p.length() != letters.len() {
            return Err(CoxeterError::NotReduced(letters));
        }
        Ok(ReducedWord { n, letters })
    }

    pub fn empty(n: usize) -> Self {
        ReducedWord { n, letters: Vec::new() }
    }

    /// Parses the comma-separated serialization, e.g. `"1,2,1"`. The empty
    /// string, `"e"` and `"id"` denote the empty word.
    pub fn parse(n: usize, s: &str) -> Result<Self, CoxeterError> {
        let t = s.trim();
        if t.is_empty() || t == "e" || t == "id" || t == "[]" {
            return Ok(Self::empty(n));
        }
        let letters = t
            .trim_start_matches('[')
            .trim_end_matches(']')
            .split(',')
            .map(|tok| {
                tok.trim().parse::<usize>().map_err(|e| CoxeterError::Parse {
                    input: s.to_string(),
                    reason: e.to_string(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(n, letters)
    }

    pub fn rank(&self) -> usize {
        self.n
    }

    pub fn letters(&self) -> &[usize] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn permutation(&self) -> Permutation {
        Permutation::from_word(self.n, &self.letters).expect("letters validated at construction")
    }
}

impl fmt::Display for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letters.iter().join(","))
    }
}

/// Staircase factorization `w = s_[a_k,b_k] ... s_[a_1,b_1]` with
/// `s_[a,b] = s_b s_{b-1} ... s_a` and `b_k < ... < b_1`.
///
/// Segments are stored in the order they are written, i.e. starting with
/// `(a_k, b_k)`, so the `b` values increase along the list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NormalForm {
    segments: Vec<(usize, usize)>,
}

impl NormalForm {
    pub fn new(segments: Vec<(usize, usize)>) -> Self {
        NormalForm { segments }
    }

    pub fn segments(&self) -> &[(usize, usize)] {
        &self.segments
    }

    /// Expands every segment to `b, b-1, ..., a` and concatenates.
    pub fn expand(&self) -> Vec<usize> {
        self.segments
            .iter()
            .flat_map(|&(a, b)| (a..=b).rev())
            .collect()
    }

    pub fn word(&self, n: usize) -> Result<ReducedWord, CoxeterError> {
        ReducedWord::new(n, self.expand())
    }

    /// Checks the segment constraints for rank `n`.
    pub fn is_well_formed(&self, n: usize) -> bool {
        let bounds_ok = self
            .segments
            .iter()
            .all(|&(a, b)| 1 <= a && a <= b && b <= n);
        let increasing = self.segments.windows(2).all(|p| p[0].1 < p[1].1);
        bounds_ok && increasing
    }
}

/// Staircase normal form read off the inversion table of `w`.
///
/// For each value `m`, the number `c_m` of smaller values to the right of
/// `m` in one-line notation gives the segment `(m - c_m, m - 1)` (skipped
/// when `c_m = 0`). Peeling the largest value first is the coset
/// decomposition `S_{m-1} \ S_m`, so the segments come out with increasing
/// `b`.
pub fn normal_form(w: &Permutation) -> NormalForm {
    let images = w.images();
    let mut segments = Vec::new();
    for m in 2..=images.len() {
        let pos = images.iter().position(|&v| v == m).expect("bijection");
        let smaller_right = images[pos + 1..].iter().filter(|&&v| v < m).count();
        if smaller_right > 0 {
            segments.push((m - smaller_right, m - 1));
        }
    }
    NormalForm { segments }
}

/// Bruhat order via the subword property.
///
/// Runs over the prefixes of the normal-form word of `w`, keeping the set of
/// products of all subwords of the prefix. A subword product is always
/// below `w`, and every element below `w` arises this way.
pub fn bruhat_leq(u: &Permutation, w: &Permutation) -> Result<bool, CoxeterError> {
    same_rank(u, w)?;
    if u.length() > w.length() {
        return Ok(false);
    }
    if u.is_identity() {
        return Ok(true);
    }
    let word = normal_form(w).expand();
    let mut reachable: HashSet<Permutation> = HashSet::new();
    reachable.insert(Permutation::identity(w.rank()));
    for &r in &word {
        let extended: Vec<Permutation> = reachable
            .iter()
            .map(|p| {
                let mut q = p.clone();
                q.right_mul_simple(r);
                q
            })
            .collect();
        reachable.extend(extended);
        if reachable.contains(u) {
            return Ok(true);
        }
    }
    Ok(reachable.contains(u))
}

/// Positions (0-based) of a subword of `word` that is a reduced word for `u`.
///
/// The first such position set in lexicographic order is returned. `None`
/// means `u` is not below the product of `word` in Bruhat order.
pub fn reduced_subword_positions(
    n: usize,
    word: &[usize],
    u: &Permutation,
) -> Result<Option<Vec<usize>>, CoxeterError> {
    if u.rank() != n {
        return Err(CoxeterError::RankMismatch { left: u.rank(), right: n });
    }
    let target = u.length();
    if target > word.len() {
        return Ok(None);
    }
    fn search(
        word: &[usize],
        start: usize,
        remaining: usize,
        current: &mut Permutation,
        picked: &mut Vec<usize>,
        u: &Permutation,
    ) -> bool {
        if remaining == 0 {
            return current == u;
        }
        for i in start..=word.len() - remaining {
            let before = current.length();
            current.right_mul_simple(word[i]);
            if current.length() == before + 1 {
                picked.push(i);
                if search(word, i + 1, remaining - 1, current, picked, u) {
                    return true;
                }
                picked.pop();
            }
            current.right_mul_simple(word[i]);
        }
        false
    }
    let mut current = Permutation::identity(n);
    let mut picked = Vec::with_capacity(target);
    if search(word, 0, target, &mut current, &mut picked, u) {
        Ok(Some(picked))
    } else {
        Ok(None)
    }
}

/// The Matsumoto class of `w`: all reduced words, obtained by closing one of
/// them under braid and commutation moves.
pub fn reduced_words(w: &Permutation, budget: usize) -> Result<BTreeSet<ReducedWord>, CoxeterError> {
    let start = normal_form(w).expand();
    reduced_word_closure(w.rank(), start, budget)
}

/// Closure of a reduced word under braid moves. Exposed separately so the
/// closure can be started from any member of the class.
pub fn reduced_word_closure(
    n: usize,
    start: Vec<usize>,
    budget: usize,
) -> Result<BTreeSet<ReducedWord>, CoxeterError> {
    let first = ReducedWord::new(n, start)?;
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut queue = VecDeque::new();
    seen.insert(first.letters.clone());
    queue.push_back(first.letters);
    while let Some(word) = queue.pop_front() {
        for next in braid_neighbours(&word) {
            if seen.insert(next.clone()) {
                if seen.len() > budget {
                    return Err(CoxeterError::BudgetExceeded(budget));
                }
                queue.push_back(next);
            }
        }
    }
    Ok(seen
        .into_iter()
        .map(|letters| ReducedWord { n, letters })
        .collect())
}

fn braid_neighbours(word: &[usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for i in 0..word.len().saturating_sub(1) {
        let (a, b) = (word[i], word[i + 1]);
        if a.abs_diff(b) >= 2 {
            let mut next = word.to_vec();
            next.swap(i, i + 1);
            out.push(next);
        }
        if i + 2 < word.len() && word[i + 2] == a && a.abs_diff(b) == 1 {
            let mut next = word.to_vec();
            next[i] = b;
            next[i + 1] = a;
            next[i + 2] = b;
            out.push(next);
        }
    }
    out
}

/// `w_L = s_1 (s_2 s_1) (s_3 s_2 s_1) ... (s_n ... s_1)`.
pub fn longest_word(n: usize) -> NormalForm {
    NormalForm {
        segments: (1..=n).map(|b| (1, b)).collect(),
    }
}

pub fn longest_permutation(n: usize) -> Permutation {
    Permutation { images: (1..=n + 1).rev().collect() }
}

/// `w_k`: the longest word with `s_1` removed from the `k`-th bracket, for
/// `k = 1..=n`. Each has length one less than `w_L` and is covered by it.
pub fn maximal_subwords_of_longest(n: usize) -> Result<Vec<Permutation>, CoxeterError> {
    if n < 2 {
        return Err(CoxeterError::RankTooSmall { n, min: 2 });
    }
    (1..=n)
        .map(|k| Permutation::from_word(n, &maximal_subword_letters(n, k)))
        .collect()
}

/// Letters of `w_k` (bracket `k` shortened to `s_k ... s_2`).
pub fn maximal_subword_letters(n: usize, k: usize) -> Vec<usize> {
    (1..=n)
        .flat_map(|b| {
            let low = if b == k { 2 } else { 1 };
            (low..=b).rev()
        })
        .collect()
}
