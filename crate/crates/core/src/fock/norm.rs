//! Two-sided operator norm estimates.
//!
//! The lower bound is the largest singular value of a finite section, which
//! can only grow with the section size. The upper bound adds a Schur-test
//! bound on everything the section leaves out. Entries outside the section
//! are controlled symbolically: beyond a threshold each slot word behaves
//! like its limit weight up to an explicit deviation, so the supremum over
//! infinitely many rows and columns reduces to a finite enumeration.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{FockError, Section, TensorTermSum};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormBounds {
    pub lower: f64,
    pub upper: f64,
}

impl NormBounds {
    pub const ZERO: NormBounds = NormBounds { lower: 0.0, upper: 0.0 };

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    /// Direct-sum norm: the supremum over blocks.
    pub fn sup(self, other: NormBounds) -> NormBounds {
        NormBounds { lower: self.lower.max(other.lower), upper: self.upper.max(other.upper) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormMethod {
    Dense,
    Lanczos,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormConfig {
    /// Sections up to this dimension use a dense SVD.
    pub dense_limit: usize,
    /// Relative residual at which the Krylov iteration stops.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NormConfig {
    fn default() -> Self {
        NormConfig { dense_limit: 64, tol: 1e-12, max_iter: 10_000 }
    }
}

impl NormConfig {
    pub fn method_for(&self, dim: usize) -> NormMethod {
        if dim <= self.dense_limit {
            NormMethod::Dense
        } else {
            NormMethod::Lanczos
        }
    }
}

pub fn norm_bounds(ts: &TensorTermSum, d: usize) -> Result<NormBounds, FockError> {
    norm_bounds_with(ts, d, &NormConfig::default())
}

pub fn norm_bounds_with(
    ts: &TensorTermSum,
    d: usize,
    cfg: &NormConfig,
) -> Result<NormBounds, FockError> {
    if d < 2 {
        return Err(FockError::SectionTooSmall { d, min: 2 });
    }
    if ts.is_zero() {
        return Ok(NormBounds::ZERO);
    }
    let section = ts.without_phase().section(d)?;
    let (lower, margin) = largest_singular_value(&section, cfg);
    let tail = tail_bound(ts, d);
    // reach 0 means diagonal: the section and its complement are invariant
    let upper = if ts.band_reach() == 0 { (lower + margin).max(tail) } else { lower + margin + tail };
    Ok(NormBounds { lower, upper })
}

/// Largest singular value of a section together with a safety margin from
/// the iteration residual (zero for the dense path).
pub fn largest_singular_value(section: &Section, cfg: &NormConfig) -> (f64, f64) {
    if section.nnz() == 0 {
        return (0.0, 0.0);
    }
    match cfg.method_for(section.dim()) {
        NormMethod::Dense => {
            let sv = section.to_dense().singular_values();
            (sv.iter().cloned().fold(0.0, f64::max), 0.0)
        }
        NormMethod::Lanczos => {
            let (theta, residual) = lanczos_gram_top(section, cfg);
            let sigma = theta.max(0.0).sqrt();
            (sigma, (theta.max(0.0) + residual).sqrt() - sigma)
        }
    }
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn vec_norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Top eigenpair of `A^H A` by Lanczos with full reorthogonalisation.
/// Returns the top Ritz value and its residual norm.
fn lanczos_gram_top(section: &Section, cfg: &NormConfig) -> (f64, f64) {
    let n = section.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(0x51C7_A11E);
    let mut v: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    let nv = vec_norm(&v);
    v.iter_mut().for_each(|z| *z /= nv);

    let kmax = n.min(cfg.max_iter).max(1);
    let mut basis: Vec<Vec<Complex64>> = vec![v];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut last = (0.0, f64::INFINITY);

    for k in 0..kmax {
        let mut w = section.adjoint_matvec(&section.matvec(&basis[k]));
        let alpha = dot(&basis[k], &w).re;
        alphas.push(alpha);
        // Full Gram-Schmidt, twice; this subsumes the three-term recurrence.
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                if c != Complex64::new(0.0, 0.0) {
                    w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
                }
            }
        }
        let beta = vec_norm(&w);
        let scale = alphas.iter().fold(0.0f64, |m, a| m.max(a.abs()));
        let exhausted = beta <= 1e-14 * scale.max(f64::MIN_POSITIVE) || k + 1 == kmax;
        if exhausted || k % 4 == 3 {
            let (theta, s_last) = tridiagonal_top(&alphas, &betas);
            let residual = if exhausted && beta <= 1e-14 * scale.max(f64::MIN_POSITIVE) {
                0.0
            } else {
                beta * s_last.abs()
            };
            last = (theta, residual);
            if exhausted || residual <= cfg.tol * theta.max(f64::MIN_POSITIVE) {
                return last;
            }
        }
        betas.push(beta);
        w.iter_mut().for_each(|z| *z /= beta);
        basis.push(w);
    }
    last
}

fn tridiagonal_top(alphas: &[f64], betas: &[f64]) -> (f64, f64) {
    let k = alphas.len();
    let mut t = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alphas[i];
        if i + 1 < k {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let (imax, &theta) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty");
    (theta, eig.eigenvectors[(k - 1, imax)])
}

/// Schur-test bound `sqrt(R C)` on the part of the operator outside the
/// `d`-section, where `C` and `R` are the largest absolute column and row
/// sums over multi-indices having some slot at least `d - reach`.
pub fn tail_bound(ts: &TensorTermSum, d: usize) -> f64 {
    if ts.is_zero() || ts.slots() == 0 {
        return 0.0;
    }
    let cols = column_sup(ts, d);
    let rows = column_sup(&ts.adjoint(), d);
    (cols * rows).sqrt()
}

/// Per slot: exact actions on `e_0 .. e_{m-1}`, then the asymptotic class.
struct SlotProfile {
    exact: Vec<Option<(usize, f64)>>,
    limit: f64,
    eps: f64,
    shift: isize,
}

fn column_sup(ts: &TensorTermSum, d: usize) -> f64 {
    let slots = ts.slots();
    let q = ts.q();
    let region_start = d.saturating_sub(ts.band_reach());
    let threshold = ts
        .terms()
        .iter()
        .flat_map(|t| t.slots.iter().map(|w| w.tail_threshold()))
        .max()
        .unwrap_or(0);
    let m = region_start.max(threshold);
    let profiles: Vec<(Complex64, Vec<SlotProfile>)> = ts
        .terms()
        .iter()
        .map(|t| {
            let per_slot = t
                .slots
                .iter()
                .map(|w| {
                    let a = w.asymptotics(m, q).expect("m is past every threshold");
                    SlotProfile {
                        exact: (0..m).map(|k| w.act(k, q)).collect(),
                        limit: a.limit,
                        eps: a.eps,
                        shift: a.shift,
                    }
                })
                .collect();
            (t.coeff, per_slot)
        })
        .collect();

    // Class c in 0..m is the exact index c; class m stands for every index >= m.
    let classes = m + 1;
    let total = classes.pow(slots as u32);
    (0..total)
        .into_par_iter()
        .map(|code| {
            let mut class = vec![0; slots];
            let mut rest = code;
            for s in (0..slots).rev() {
                class[s] = rest % classes;
                rest /= classes;
            }
            if !class.iter().any(|&c| c >= region_start) {
                return 0.0;
            }
            column_bound(&profiles, &class, m)
        })
        .reduce(|| 0.0, f64::max)
}

fn column_bound(profiles: &[(Complex64, Vec<SlotProfile>)], class: &[usize], m: usize) -> f64 {
    // Output pattern per slot: exact row index, or net shift for the tail class.
    let mut groups: BTreeMap<Vec<isize>, (Complex64, f64)> = BTreeMap::new();
    'terms: for (coeff, per_slot) in profiles {
        let mut key = Vec::with_capacity(class.len());
        let mut value = 1.0;
        let mut abs_value = 1.0;
        let mut bound = 1.0;
        for (p, &c) in per_slot.iter().zip(class) {
            if c < m {
                match p.exact[c] {
                    Some((k, w)) => {
                        key.push(k as isize);
                        value *= w;
                        abs_value *= w.abs();
                        bound *= w.abs();
                    }
                    None => continue 'terms,
                }
            } else {
                key.push(isize::MIN / 2 + p.shift);
                value *= p.limit;
                abs_value *= p.limit.abs();
                bound *= p.limit.abs() + p.eps;
            }
        }
        let entry = groups.entry(key).or_insert((Complex64::new(0.0, 0.0), 0.0));
        entry.0 += coeff * value;
        entry.1 += coeff.norm() * (bound - abs_value).max(0.0);
    }
    groups.values().map(|(v, e)| v.norm() + e).sum()
}
