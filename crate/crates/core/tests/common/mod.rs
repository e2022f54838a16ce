//! Independent dense-matrix oracles. Nothing here goes through the symbolic
//! operator layer: generator images are built as explicit truncated
//! matrices and combined with Kronecker products.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use qcrystal::coxeter::Permutation;

pub type M = DMatrix<Complex64>;

pub fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `S e_m = e_{m-1}` truncated to `d x d`.
pub fn shift(d: usize) -> M {
    M::from_fn(d, d, |r, col| if col == r + 1 { c(1.0) } else { c(0.0) })
}

pub fn diag(d: usize, f: impl Fn(usize) -> f64) -> M {
    M::from_fn(d, d, |r, col| if r == col { c(f(r)) } else { c(0.0) })
}

pub fn proj0(d: usize) -> M {
    diag(d, |m| if m == 0 { 1.0 } else { 0.0 })
}

/// `π_{s_r}(z_{k,l})` as a `d x d` matrix, from the generator table.
pub fn simple_image(r: usize, k: usize, l: usize, q: f64, d: usize) -> Option<M> {
    let sqrt_w = diag(d, |m| (1.0 - q.powi(2 * m as i32)).sqrt());
    let s = shift(d);
    let s_star = s.adjoint();
    if q == 0.0 {
        return match (k, l) {
            _ if k == r && l == r => Some(s),
            _ if k == r + 1 && l == r + 1 => Some(s_star),
            _ if (k == r && l == r + 1) || (k == r + 1 && l == r) => Some(proj0(d)),
            _ if k == l => Some(M::identity(d, d)),
            _ => None,
        };
    }
    match (k, l) {
        _ if k == r && l == r => Some(&s * &sqrt_w),
        _ if k == r + 1 && l == r + 1 => Some(&sqrt_w * &s_star),
        _ if k == r && l == r + 1 => Some(diag(d, |m| -q.powi(m as i32 + 1))),
        _ if k == r + 1 && l == r => Some(diag(d, |m| q.powi(m as i32))),
        _ if k == l => Some(M::identity(d, d)),
        _ => None,
    }
}

pub fn kron_all(factors: &[M]) -> M {
    let mut out = M::from_element(1, 1, c(1.0));
    for f in factors {
        out = out.kronecker(f);
    }
    out
}

pub fn character(t: &[Complex64], i: usize, j: usize) -> Complex64 {
    if i != j {
        return c(0.0);
    }
    let n = t.len();
    let mut v = c(1.0);
    if i <= n {
        v *= t[i - 1];
    }
    if i >= 2 {
        v *= t[i - 2].conj();
    }
    v
}

/// Every node sequence `i, k_1, ..., k_{L-1}, j` with free interior nodes.
pub fn all_paths(i: usize, j: usize, legs: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let interior = legs.saturating_sub(1);
    let total = (n + 1).pow(interior as u32);
    for code in 0..total {
        let mut nodes = vec![i];
        let mut rest = code;
        let mut mid = Vec::with_capacity(interior);
        for _ in 0..interior {
            mid.push(rest % (n + 1) + 1);
            rest /= n + 1;
        }
        mid.reverse();
        nodes.extend(mid);
        nodes.push(j);
        out.push(nodes);
    }
    out
}

pub fn is_monotone(path: &[usize]) -> bool {
    path.windows(2).all(|p| p[0] <= p[1]) || path.windows(2).all(|p| p[0] >= p[1])
}

/// Dense `d^L x d^L` matrix of `π_{t,w}(z_{i,j})`.
pub fn image(n: usize, letters: &[usize], t: &[Complex64], q: f64, i: usize, j: usize, d: usize) -> M {
    let legs = letters.len();
    let chi = character(t, i, i);
    if legs == 0 {
        return M::from_element(1, 1, if i == j { chi } else { c(0.0) });
    }
    let dim = d.pow(legs as u32);
    let mut out = M::zeros(dim, dim);
    for path in all_paths(i, j, legs, n) {
        if q == 0.0 && !is_monotone(&path) {
            continue;
        }
        let factors: Option<Vec<M>> = letters
            .iter()
            .enumerate()
            .map(|(m, &r)| simple_image(r, path[m], path[m + 1], q, d))
            .collect();
        if let Some(f) = factors {
            out += kron_all(&f);
        }
    }
    out * chi
}

/// Restriction of a `d^L` matrix to multi-indices with every slot below `e`.
pub fn interior(m: &M, d: usize, legs: usize, e: usize) -> M {
    let keep: Vec<usize> = (0..d.pow(legs as u32))
        .filter(|&idx| {
            let mut x = idx;
            (0..legs).all(|_| {
                let ok = x % d < e;
                x /= d;
                ok
            })
        })
        .collect();
    M::from_fn(keep.len(), keep.len(), |r, col| m[(keep[r], keep[col])])
}

pub fn max_abs(m: &M) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Products of all subwords of `letters`.
pub fn subword_products(n: usize, letters: &[usize]) -> Vec<Permutation> {
    let mut out = Vec::new();
    for mask in 0u32..(1 << letters.len()) {
        let sub: Vec<usize> = (0..letters.len()).filter(|b| mask >> b & 1 == 1).map(|b| letters[b]).collect();
        out.push(Permutation::from_word(n, &sub).unwrap());
    }
    out
}
