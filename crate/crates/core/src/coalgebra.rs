//! Iterated comultiplication as path enumeration.
//!
//! Applying the coproduct `l - 1` times to `z_{i,j}` gives a sum over index
//! paths `i = k_0, k_1, ..., k_l = j` of `z_{k_0,k_1} ⊗ ... ⊗ z_{k_{l-1},k_l}`.
//! In crystal mode each split of `z_{a,b}` only ranges over `k` between `a`
//! and `b`; in generic mode `k` is free in `1..=n+1`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoalgebraError {
    #[error("matrix index ({i}, {j}) outside 1..={size}")]
    IndexOutOfRange { i: usize, j: usize, size: usize },
    #[error("leg {leg} outside 1..={legs}")]
    LegOutOfRange { leg: usize, legs: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoproductMode {
    /// `Δ(z_{i,j}) = Σ_{k between i and j} z_{i,k} ⊗ z_{k,j}`.
    Crystal,
    /// `Δ(z_{i,j}) = Σ_{k=1}^{n+1} z_{i,k} ⊗ z_{k,j}`.
    Generic,
}

impl CoproductMode {
    /// Crystal mode at `q = 0`, generic otherwise.
    pub fn for_q(q: f64) -> Self {
        if q == 0.0 {
            CoproductMode::Crystal
        } else {
            CoproductMode::Generic
        }
    }

    fn split_range(self, a: usize, b: usize, n: usize) -> std::ops::RangeInclusive<usize> {
        match self {
            CoproductMode::Crystal => a.min(b)..=a.max(b),
            CoproductMode::Generic => 1..=n + 1,
        }
    }
}

/// Which leg gets split at each iteration step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitOrder {
    /// `(Δ ⊗ id ⊗ ...) ∘ ... ∘ Δ`: always the first leg.
    LeftToRight,
    /// `(... ⊗ id ⊗ Δ) ∘ ... ∘ Δ`: always the last leg.
    RightToLeft,
}

/// Nodes `k_0, ..., k_l` of one summand of the iterated coproduct.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IndexPath(pub Vec<usize>);

impl IndexPath {
    pub fn nodes(&self) -> &[usize] {
        &self.0
    }

    pub fn legs(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    /// `(k_{m-1}, k_m)` for legs `m = 1..=l`.
    pub fn leg_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.0.windows(2).map(|w| (w[0], w[1]))
    }
}

/// Paths of the `l`-fold coproduct of `z_{i,j}`, iterated left to right.
///
/// For `l = 0` this is the counit: the single path `[i]` when `i == j`,
/// nothing otherwise.
pub fn coproduct_paths(
    i: usize,
    j: usize,
    l: usize,
    mode: CoproductMode,
    n: usize,
) -> Result<Vec<IndexPath>, CoalgebraError> {
    coproduct_paths_ordered(i, j, l, mode, n, SplitOrder::LeftToRight)
}

pub fn coproduct_paths_ordered(
    i: usize,
    j: usize,
    l: usize,
    mode: CoproductMode,
    n: usize,
    order: SplitOrder,
) -> Result<Vec<IndexPath>, CoalgebraError> {
    let size = n + 1;
    if i == 0 || j == 0 || i > size || j > size {
        return Err(CoalgebraError::IndexOutOfRange { i, j, size });
    }
    if l == 0 {
        return Ok(if i == j { vec![IndexPath(vec![i])] } else { Vec::new() });
    }
    let mut paths = vec![vec![i, j]];
    for _ in 1..l {
        let mut next = Vec::new();
        for p in &paths {
            let leg = match order {
                SplitOrder::LeftToRight => 0,
                SplitOrder::RightToLeft => p.len() - 2,
            };
            for k in mode.split_range(p[leg], p[leg + 1], n) {
                let mut q = Vec::with_capacity(p.len() + 1);
                q.extend_from_slice(&p[..=leg]);
                q.push(k);
                q.extend_from_slice(&p[leg + 1..]);
                next.push(q);
            }
        }
        paths = next;
    }
    Ok(paths.into_iter().map(IndexPath).collect())
}

/// Applies the counit on the given legs (1-based): keeps paths that are
/// constant across every deleted leg and contracts those legs.
pub fn delete_legs(
    paths: &[IndexPath],
    deleted: &BTreeSet<usize>,
) -> Result<Vec<IndexPath>, CoalgebraError> {
    let mut out = Vec::new();
    for p in paths {
        let legs = p.legs();
        if let Some(&bad) = deleted.iter().find(|&&m| m == 0 || m > legs) {
            return Err(CoalgebraError::LegOutOfRange { leg: bad, legs });
        }
        if deleted.iter().all(|&m| p.0[m - 1] == p.0[m]) {
            let nodes = p
                .0
                .iter()
                .enumerate()
                .filter(|(idx, _)| !deleted.contains(idx))
                .map(|(_, &k)| k)
                .collect();
            out.push(IndexPath(nodes));
        }
    }
    Ok(out)
}
