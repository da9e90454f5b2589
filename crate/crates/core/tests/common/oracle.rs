//! Brute-force reference computations for small algebras, written against
//! the raw structure constants with plain Gaussian elimination.

use ito_core::ItoAlgebraSpec;
use num_complex::Complex64;

pub type V = Vec<Complex64>;

const PIVOT: f64 = 1e-9;

/// Reduced row echelon form; returns the pivot columns.
pub fn rref(rows: &mut [V], ncols: usize) -> Vec<usize> {
    let scale = rows
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0_f64, |acc, z| acc.max(z.norm()))
        .max(1.0);
    let mut pivots = Vec::new();
    let mut top = 0;
    for col in 0..ncols {
        if top == rows.len() {
            break;
        }
        let (best, val) = (top..rows.len())
            .map(|r| (r, rows[r][col].norm()))
            .fold((top, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if val <= PIVOT * scale {
            continue;
        }
        rows.swap(top, best);
        let p = rows[top][col];
        for z in rows[top].iter_mut() {
            *z /= p;
        }
        let pivot_row = rows[top].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != top {
                let factor = row[col];
                if factor.norm() > 0.0 {
                    for (z, q) in row.iter_mut().zip(&pivot_row) {
                        *z -= factor * q;
                    }
                }
            }
        }
        pivots.push(col);
        top += 1;
    }
    pivots
}

/// Basis of `{x : rows x = 0}`.
pub fn kernel(rows: &[V], ncols: usize) -> Vec<V> {
    let mut m = rows.to_vec();
    let pivots = rref(&mut m, ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut x = vec![Complex64::new(0.0, 0.0); ncols];
            x[f] = Complex64::new(1.0, 0.0);
            for (r, &p) in pivots.iter().enumerate() {
                x[p] = -m[r][f];
            }
            x
        })
        .collect()
}

pub fn rank(vectors: &[V], dim: usize) -> usize {
    let mut m = vectors.to_vec();
    rref(&mut m, dim).len()
}

pub fn same_span(a: &[V], b: &[V], dim: usize) -> bool {
    let ra = rank(a, dim);
    let rb = rank(b, dim);
    let mut both = a.to_vec();
    both.extend_from_slice(b);
    ra == rb && rank(&both, dim) == ra
}

pub fn contained(a: &[V], b: &[V], dim: usize) -> bool {
    let mut both = a.to_vec();
    both.extend_from_slice(b);
    rank(&both, dim) == rank(b, dim)
}

pub fn product(spec: &ItoAlgebraSpec, a: &[Complex64], b: &[Complex64]) -> V {
    let n = spec.dim();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        for j in 0..n {
            for (k, o) in out.iter_mut().enumerate() {
                *o += a[i] * b[j] * spec.structure_coeff(i, j, k);
            }
        }
    }
    out
}

pub fn functional(spec: &ItoAlgebraSpec, a: &[Complex64]) -> Complex64 {
    a.iter().zip(spec.functional_values()).map(|(x, l)| x * l).sum()
}

/// `G[i][j] = l(a_i★ a_j)` from the raw involution matrix.
pub fn gram(spec: &ItoAlgebraSpec) -> Vec<V> {
    let n = spec.dim();
    let s = spec.involution_matrix();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let star: V = (0..n).map(|m| s[(i, m)]).collect();
                    functional(spec, &product(spec, &star, &unit(n, j)))
                })
                .collect()
        })
        .collect()
}

pub fn unit(n: usize, i: usize) -> V {
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    v[i] = Complex64::new(1.0, 0.0);
    v
}

pub fn apply(rows: &[V], x: &[Complex64]) -> V {
    rows.iter().map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
}

/// Rows of the matrix of `x ↦ a x` (left) or `x ↦ x a` (right).
pub fn mult_rows(spec: &ItoAlgebraSpec, a: &[Complex64], left: bool) -> Vec<V> {
    let n = spec.dim();
    let cols: Vec<V> = (0..n)
        .map(|j| {
            let e = unit(n, j);
            if left {
                product(spec, a, &e)
            } else {
                product(spec, &e, a)
            }
        })
        .collect();
    (0..n).map(|k| (0..n).map(|j| cols[j][k]).collect()).collect()
}

/// Span of `vectors` closed under products, by plain iteration.
pub fn product_closure(spec: &ItoAlgebraSpec, vectors: &[V]) -> Vec<V> {
    let n = spec.dim();
    let mut current: Vec<V> = vectors.to_vec();
    loop {
        let r = rank(&current, n);
        let mut next = current.clone();
        for a in &current {
            for b in &current {
                next.push(product(spec, a, b));
            }
        }
        if rank(&next, n) == r {
            return current;
        }
        // keep a row-reduced basis to bound growth
        let mut m = next;
        let pivots = rref(&mut m, n);
        current = m.into_iter().take(pivots.len()).collect();
    }
}
