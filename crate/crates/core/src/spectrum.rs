//! Labels `(t, w) ∈ T^n × S_{n+1}` of irreducible representations and the
//! specialization preorder induced by Bruhat factorization.
//!
//! `π_{t,u}` factors through `π_{t,w}` whenever `u <= w`, so the kernel of
//! `π_{t,w}` is contained in that of `π_{t,u}` and `(t,u)` lies in the
//! closure of `(t,w)`. Only this sufficient direction is modelled.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::coxeter::{
    bruhat_leq, longest_permutation, normal_form, CoxeterError, Permutation,
};
use crate::reps::TorusPoint;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectrumError {
    #[error("rank {n} too small, need at least {min}")]
    RankTooSmall { n: usize, min: usize },
    #[error("labels have different torus points")]
    DifferentTorusPoints,
    #[error("{u} is not strictly below {w} in Bruhat order")]
    NotStrictlyBelow { u: String, w: String },
    #[error("torus rank {torus} does not match permutation rank {perm}")]
    RankMismatch { torus: usize, perm: usize },
    #[error(transparent)]
    Coxeter(#[from] CoxeterError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RepLabelJson", into = "RepLabelJson")]
pub struct RepLabel {
    pub t: TorusPoint,
    pub w: Permutation,
}

#[derive(Serialize, Deserialize)]
struct RepLabelJson {
    t: TorusPoint,
    w: Permutation,
}

impl TryFrom<RepLabelJson> for RepLabel {
    type Error = SpectrumError;

    fn try_from(j: RepLabelJson) -> Result<Self, SpectrumError> {
        RepLabel::new(j.t, j.w)
    }
}

impl From<RepLabel> for RepLabelJson {
    fn from(l: RepLabel) -> Self {
        RepLabelJson { t: l.t, w: l.w }
    }
}

impl RepLabel {
    pub fn new(t: TorusPoint, w: Permutation) -> Result<Self, SpectrumError> {
        if t.rank() != w.rank() {
            return Err(SpectrumError::RankMismatch { torus: t.rank(), perm: w.rank() });
        }
        Ok(RepLabel { t, w })
    }

    /// `t`-hash and normal-form word, e.g. `3fa2c1d0/121`; `e` for the identity.
    pub fn node_id(&self) -> String {
        let letters = normal_form(&self.w).expand();
        let word = if letters.is_empty() {
            "e".to_string()
        } else {
            letters.iter().map(|l| l.to_string()).collect::<Vec<_>>().join("")
        };
        format!("{}/{}", torus_hash(&self.t), word)
    }
}

/// First 8 hex digits of SHA-256 over the bit patterns of the coordinates.
pub fn torus_hash(t: &TorusPoint) -> String {
    let mut h = Sha256::new();
    for z in t.coords() {
        h.update(z.re.to_bits().to_le_bytes());
        h.update(z.im.to_bits().to_le_bytes());
    }
    h.finalize().iter().take(4).map(|b| format!("{b:02x}")).collect()
}

/// The label bijection between the `q = 0` and `q > 0` spectra.
pub fn t_q_map(label: &RepLabel) -> RepLabel {
    label.clone()
}

/// Inverse of [`t_q_map`].
pub fn t_q_map_inverse(label: &RepLabel) -> RepLabel {
    label.clone()
}

/// Edges `a -> b` (label indices) with equal `t` and `w_b < w_a` in Bruhat
/// order. With `reduce`, only edges not implied by a two-step path through
/// the given labels are kept.
pub fn specialization_edges(
    labels: &[RepLabel],
    reduce: bool,
) -> Result<Vec<(usize, usize)>, SpectrumError> {
    let mut edges = BTreeSet::new();
    for (a, la) in labels.iter().enumerate() {
        for (b, lb) in labels.iter().enumerate() {
            if a != b && la.t == lb.t && la.w != lb.w && bruhat_leq(&lb.w, &la.w)? {
                edges.insert((a, b));
            }
        }
    }
    if reduce {
        let full = edges.clone();
        edges.retain(|&(a, b)| {
            !(0..labels.len()).any(|c| full.contains(&(a, c)) && full.contains(&(c, b)))
        });
    }
    Ok(edges.into_iter().collect())
}

/// `((t_0, w_L), (t_0, s_1))`: the closure of `{(t_0, w_L)}` contains
/// `(t_0, s_1)`, so the two points cannot be separated.
pub fn non_hausdorff_witness(n: usize) -> Result<(RepLabel, RepLabel), SpectrumError> {
    if n < 2 {
        return Err(SpectrumError::RankTooSmall { n, min: 2 });
    }
    let t = TorusPoint::identity(n);
    let top = RepLabel::new(t.clone(), longest_permutation(n))?;
    let low = RepLabel::new(t, Permutation::simple(n, 1)?)?;
    Ok((top, low))
}

/// Accepts `(upper, lower)` only for equal `t` and strictly smaller `w`.
pub fn validate_witness(upper: &RepLabel, lower: &RepLabel) -> Result<(), SpectrumError> {
    if upper.t != lower.t {
        return Err(SpectrumError::DifferentTorusPoints);
    }
    if upper.w == lower.w || !bruhat_leq(&lower.w, &upper.w)? {
        return Err(SpectrumError::NotStrictlyBelow {
            u: lower.w.to_string(),
            w: upper.w.to_string(),
        });
    }
    Ok(())
}

/// All labels `(t, w)` with `w ∈ S_{n+1}`, in lexicographic order of `w`.
pub fn fiber(t: &TorusPoint) -> Vec<RepLabel> {
    Permutation::all(t.rank())
        .into_iter()
        .map(|w| RepLabel { t: t.clone(), w })
        .collect()
}

/// DOT digraph; an optional witness edge is drawn dashed and labelled.
pub fn to_dot(labels: &[RepLabel], edges: &[(usize, usize)], witness: Option<(usize, usize)>) -> String {
    let mut out = String::from("digraph specialization {\n");
    for l in labels {
        out.push_str(&format!("  \"{}\";\n", l.node_id()));
    }
    for &(a, b) in edges {
        out.push_str(&format!("  \"{}\" -> \"{}\";\n", labels[a].node_id(), labels[b].node_id()));
    }
    if let Some((a, b)) = witness {
        out.push_str(&format!(
            "  \"{}\" -> \"{}\" [style=dashed, label=\"non-Hausdorff\"];\n",
            labels[a].node_id(),
            labels[b].node_id()
        ));
    }
    out.push_str("}\n");
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjacencyEntry {
    pub node: String,
    pub label: RepLabel,
    pub successors: Vec<String>,
}

pub fn to_adjacency(labels: &[RepLabel], edges: &[(usize, usize)]) -> Vec<AdjacencyEntry> {
    labels
        .iter()
        .enumerate()
        .map(|(a, l)| AdjacencyEntry {
            node: l.node_id(),
            label: l.clone(),
            successors: edges
                .iter()
                .filter(|&&(x, _)| x == a)
                .map(|&(_, b)| labels[b].node_id())
                .collect(),
        })
        .collect()
}
