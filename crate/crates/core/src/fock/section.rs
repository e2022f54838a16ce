use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::json;

use super::{FockError, TensorTermSum, MAX_SECTION_DIM};

/// The box `{0, ..., d-1}^L` of multi-indices, ordered lexicographically
/// with slot 0 most significant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MultiIndexBox {
    pub d: usize,
    pub slots: usize,
}

impl MultiIndexBox {
    pub fn new(d: usize, slots: usize) -> Result<Self, FockError> {
        if d == 0 {
            return Err(FockError::SectionTooSmall { d, min: 1 });
        }
        let budget = MAX_SECTION_DIM;
        let mut dim: usize = 1;
        for _ in 0..slots {
            dim = dim.checked_mul(d).filter(|&x| x <= budget).ok_or(FockError::SectionTooLarge {
                d,
                slots,
                budget,
            })?;
        }
        Ok(MultiIndexBox { d, slots })
    }

    pub fn dim(&self) -> usize {
        self.d.pow(self.slots as u32)
    }

    pub fn encode(&self, alpha: &[usize]) -> Option<usize> {
        let mut idx = 0;
        for &a in alpha {
            if a >= self.d {
                return None;
            }
            idx = idx * self.d + a;
        }
        Some(idx)
    }

    pub fn decode(&self, mut idx: usize) -> Vec<usize> {
        let mut alpha = vec![0; self.slots];
        for s in (0..self.slots).rev() {
            alpha[s] = idx % self.d;
            idx /= self.d;
        }
        alpha
    }
}

/// Sparse finite section, stored by columns. Entry `(α, β)` is `⟨e_α, T e_β⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    index: MultiIndexBox,
    columns: Vec<Vec<(usize, Complex64)>>,
}

/// Action of one slot word on `e_0 .. e_{d-1}`, kept only inside the section.
type SlotTable = Vec<Option<(usize, f64)>>;

impl Section {
    pub(super) fn build(ts: &TensorTermSum, d: usize) -> Result<Self, FockError> {
        let index = MultiIndexBox::new(d, ts.slots())?;
        let q = ts.q();
        // tables[t][s][m] = action of slot word s of term t on e_m
        let tables: Vec<Vec<SlotTable>> = ts
            .terms()
            .iter()
            .map(|t| {
                t.slots
                    .iter()
                    .map(|w| (0..d).map(|m| w.act(m, q).filter(|&(k, _)| k < d)).collect())
                    .collect()
            })
            .collect();
        let phase = ts.phase().value();
        let columns = (0..index.dim())
            .into_par_iter()
            .map(|col| {
                let beta = index.decode(col);
                let mut entries: Vec<(usize, Complex64)> = Vec::new();
                'terms: for (term, table) in ts.terms().iter().zip(&tables) {
                    let mut row = 0;
                    let mut weight = 1.0;
                    for (slot_table, &m) in table.iter().zip(&beta) {
                        match slot_table[m] {
                            Some((k, w)) => {
                                row = row * d + k;
                                weight *= w;
                            }
                            None => continue 'terms,
                        }
                    }
                    entries.push((row, term.coeff * weight));
                }
                entries.sort_by_key(|&(r, _)| r);
                let mut merged: Vec<(usize, Complex64)> = Vec::with_capacity(entries.len());
                for (r, v) in entries {
                    match merged.last_mut() {
                        Some((lr, lv)) if *lr == r => *lv += v,
                        _ => merged.push((r, v)),
                    }
                }
                merged
                    .into_iter()
                    .filter(|(_, v)| *v != Complex64::new(0.0, 0.0))
                    .map(|(r, v)| (r, v * phase))
                    .collect()
            })
            .collect();
        Ok(Section { index, columns })
    }

    pub fn index(&self) -> MultiIndexBox {
        self.index
    }

    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(|c| c.len()).sum()
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.columns[col]
            .iter()
            .find(|&&(r, _)| r == row)
            .map(|&(_, v)| v)
            .unwrap_or_default()
    }

    pub fn column(&self, col: usize) -> &[(usize, Complex64)] {
        &self.columns[col]
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (c, col) in self.columns.iter().enumerate() {
            for &(r, v) in col {
                m[(r, c)] = v;
            }
        }
        m
    }

    pub fn adjoint(&self) -> Section {
        let mut columns = vec![Vec::new(); self.dim()];
        for (c, col) in self.columns.iter().enumerate() {
            for &(r, v) in col {
                columns[r].push((c, v.conj()));
            }
        }
        Section { index: self.index, columns }
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.dim()];
        for (col, &xc) in self.columns.iter().zip(x) {
            if xc == Complex64::new(0.0, 0.0) {
                continue;
            }
            for &(r, v) in col {
                y[r] += v * xc;
            }
        }
        y
    }

    /// `z = A^H y`.
    pub fn adjoint_matvec(&self, y: &[Complex64]) -> Vec<Complex64> {
        self.columns
            .iter()
            .map(|col| col.iter().map(|&(r, v)| v.conj() * y[r]).sum())
            .collect()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.columns
            .iter()
            .flatten()
            .map(|(_, v)| v.norm())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise difference over rows and columns whose multi-indices
    /// have every slot below `limit`.
    pub fn max_abs_diff_within(&self, other: &Section, limit: usize) -> f64 {
        assert_eq!(self.index, other.index, "sections of different shape");
        let inside = |i: usize| self.index.decode(i).iter().all(|&a| a < limit);
        let mut worst: f64 = 0.0;
        for c in (0..self.dim()).filter(|&c| inside(c)) {
            let mut rows: Vec<usize> = self.columns[c]
                .iter()
                .chain(&other.columns[c])
                .map(|&(r, _)| r)
                .filter(|&r| inside(r))
                .collect();
            rows.sort_unstable();
            rows.dedup();
            for r in rows {
                worst = worst.max((self.entry(r, c) - other.entry(r, c)).norm());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &Section) -> f64 {
        self.max_abs_diff_within(other, self.index.d)
    }

    /// Row-major CSV with cells written as `re+imi`.
    pub fn to_csv(&self) -> String {
        let n = self.dim();
        let mut rows = vec![vec![Complex64::new(0.0, 0.0); n]; n];
        for (c, col) in self.columns.iter().enumerate() {
            for &(r, v) in col {
                rows[r][c] = v;
            }
        }
        let mut out = String::new();
        for row in rows {
            let cells: Vec<String> = row.iter().map(|&z| complex_cell(z)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let n = self.dim();
        let mut rows = vec![vec![[0.0f64, 0.0f64]; n]; n];
        for (c, col) in self.columns.iter().enumerate() {
            for &(r, v) in col {
                rows[r][c] = [v.re, v.im];
            }
        }
        json!({
            "schema": "qcrystal.section/1",
            "d": self.index.d,
            "slots": self.index.slots,
            "dim": n,
            "order": "lexicographic, slot 0 most significant",
            "entries": rows,
        })
    }
}

pub(crate) fn complex_cell(z: Complex64) -> String {
    let re = if z.re == 0.0 { 0.0 } else { z.re };
    let im = if z.im == 0.0 { 0.0 } else { z.im };
    if im < 0.0 {
        format!("{re}-{}i", -im)
    } else {
        format!("{re}+{im}i")
    }
}
