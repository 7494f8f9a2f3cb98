//! Truncated SVD of the `√P` design matrix, the count-based baseline.
//!
//! Randomized block subspace iteration: a seeded random block is pushed
//! through `X` and `Xᵀ` with re-orthonormalization, and the Ritz values of
//! the projected problem are taken once every requested triplet satisfies
//! `‖X v − σ u‖ ≤ tol · σ₁`. The small projected SVD is a one-sided Jacobi.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;

use crate::cooc::CoocMatrix;
use crate::linalg::{axpy, dot, norm, Matrix, SparseVector};
use crate::{seeded_rng, Error, Result};

/// Row-sparse matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseRows {
    n_cols: usize,
    rows: Vec<SparseVector>,
}

impl SparseRows {
    pub fn new(n_cols: usize, rows: Vec<SparseVector>) -> Result<Self> {
        if let Some(r) = rows.iter().find(|r| r.dim() != n_cols) {
            return Err(Error::DimensionMismatch {
                expected: n_cols,
                found: r.dim(),
            });
        }
        Ok(SparseRows { n_cols, rows })
    }

    pub fn from_dense(m: &Matrix) -> Self {
        SparseRows {
            n_cols: m.cols(),
            rows: (0..m.rows()).map(|i| SparseVector::from_dense(m.row(i))).collect(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn rows(&self) -> &[SparseVector] {
        &self.rows
    }

    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.n_rows(), self.n_cols);
        for (i, r) in self.rows.iter().enumerate() {
            for (j, v) in r.iter() {
                m.set(i, j as usize, v);
            }
        }
        m
    }

    /// `X · x`
    fn mul(&self, x: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|r| r.dot_dense(x)).collect()
    }

    /// `Xᵀ · y`
    fn mul_t(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_cols];
        for (r, &yi) in self.rows.iter().zip(y) {
            if yi != 0.0 {
                for (j, v) in r.iter() {
                    out[j as usize] += yi * v;
                }
            }
        }
        out
    }
}

/// The stacked `√P_w` rows of every word with counts, in word id order.
#[derive(Clone, Debug)]
pub struct DesignMatrix {
    matrix: SparseRows,
    words: Vec<u32>,
    excluded: Vec<u32>,
}

impl DesignMatrix {
    pub fn matrix(&self) -> &SparseRows {
        &self.matrix
    }

    /// Word id of each row.
    pub fn words(&self) -> &[u32] {
        &self.words
    }

    /// Words left out for lack of counts.
    pub fn excluded(&self) -> &[u32] {
        &self.excluded
    }
}

pub fn build_design_matrix(cooc: &CoocMatrix) -> Result<DesignMatrix> {
    let mut rows = Vec::new();
    let mut words = Vec::new();
    let mut excluded = Vec::new();
    for w in 0..cooc.n_words() as u32 {
        if cooc.is_empty_row(w) {
            excluded.push(w);
        } else {
            rows.push(cooc.sqrt_row(w)?.as_sparse().clone());
            words.push(w);
        }
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput("design matrix (every row is empty)"));
    }
    Ok(DesignMatrix {
        matrix: SparseRows::new(cooc.n_contexts(), rows)?,
        words,
        excluded,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SvdOptions {
    /// Extra block columns beyond the requested rank.
    pub oversample: usize,
    pub max_iterations: usize,
    /// Convergence threshold on `‖X v − σ u‖ / σ₁`.
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for SvdOptions {
    fn default() -> Self {
        SvdOptions {
            oversample: 10,
            max_iterations: 500,
            tolerance: 1e-11,
            seed: 0,
        }
    }
}

/// Top singular triplets, singular values descending. Each left singular
/// vector has its largest-magnitude entry positive.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedSvd {
    pub singular_values: Vec<f64>,
    /// `rows × m`
    pub u: Matrix,
    /// `cols × m`
    pub v: Matrix,
    pub iterations: usize,
}

impl TruncatedSvd {
    /// `U · Σ^exponent`. Exponent 1 gives `U Σ = X V`.
    pub fn embeddings(&self, exponent: f64) -> Matrix {
        let scale: Vec<f64> = self
            .singular_values
            .iter()
            .map(|&s| libm::pow(s, exponent))
            .collect();
        Matrix::from_fn(self.u.rows(), self.u.cols(), |i, k| self.u.get(i, k) * scale[k])
    }

    /// Dense `U Σ Vᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        let us = self.embeddings(1.0);
        us.matmul(&self.v.transpose()).expect("shapes agree")
    }
}

fn orthonormalize(cols: &mut [Vec<f64>]) {
    for j in 0..cols.len() {
        let (done, rest) = cols.split_at_mut(j);
        let v = &mut rest[0];
        let original = norm(v);
        for _ in 0..2 {
            for q in done.iter() {
                let c = dot(q, v);
                if c != 0.0 {
                    axpy(-c, q, v);
                }
            }
        }
        let n = norm(v);
        if n <= 1e-13 * original.max(f64::MIN_POSITIVE) || n == 0.0 {
            v.iter_mut().for_each(|x| *x = 0.0);
        } else {
            v.iter_mut().for_each(|x| *x /= n);
        }
    }
}

/// One-sided Jacobi SVD of the matrix whose columns are `a` (each of length
/// `n`). Returns `(σ, right vectors as columns of length l, left vectors of
/// length n)` so that `A = left · diag(σ) · rightᵀ`, sorted descending.
fn jacobi_svd(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let l = a.len();
    let mut w: Vec<Vec<f64>> = (0..l)
        .map(|i| {
            let mut e = vec![0.0; l];
            e[i] = 1.0;
            e
        })
        .collect();
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..l {
            for q in p + 1..l {
                let alpha = dot(&a[p], &a[p]);
                let beta = dot(&a[q], &a[q]);
                let gamma = dot(&a[p], &a[q]);
                if gamma == 0.0 || gamma.abs() <= 1e-15 * libm::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + libm::sqrt(1.0 + zeta * zeta));
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = c * t;
                for cols in [&mut a, &mut w] {
                    let (lo, hi) = cols.split_at_mut(q);
                    let (x, y) = (&mut lo[p], &mut hi[0]);
                    for (xi, yi) in x.iter_mut().zip(y.iter_mut()) {
                        let (u, v) = (*xi, *yi);
                        *xi = c * u - s * v;
                        *yi = s * u + c * v;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let sigma: Vec<f64> = a.iter().map(|c| norm(c)).collect();
    let mut order: Vec<usize> = (0..l).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]).then(i.cmp(&j)));
    let mut s_out = Vec::with_capacity(l);
    let mut right = Vec::with_capacity(l);
    let mut left = Vec::with_capacity(l);
    for &i in &order {
        let s = sigma[i];
        s_out.push(s);
        right.push(w[i].clone());
        left.push(if s > 0.0 {
            a[i].iter().map(|x| x / s).collect()
        } else {
            vec![0.0; a[i].len()]
        });
    }
    (s_out, right, left)
}

/// Top-`m` singular triplets of `x`.
pub fn truncated_svd(x: &SparseRows, m: usize, opts: &SvdOptions) -> Result<TruncatedSvd> {
    let (n_r, n_c) = (x.n_rows(), x.n_cols());
    let k = n_r.min(n_c);
    if m == 0 || m > k {
        return Err(Error::invalid(alloc::format!(
            "rank {m} must be in 1..={k} for a {n_r}x{n_c} matrix"
        )));
    }
    let l = (m + opts.oversample).min(k);
    let mut rng = seeded_rng(opts.seed);
    let omega: Vec<Vec<f64>> = (0..l)
        .map(|_| (0..n_c).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let mut q: Vec<Vec<f64>> = omega.iter().map(|c| x.mul(c)).collect();
    orthonormalize(&mut q);

    let mut worst = f64::INFINITY;
    for it in 1..=opts.max_iterations {
        let mut z: Vec<Vec<f64>> = q.iter().map(|c| x.mul_t(c)).collect();
        orthonormalize(&mut z);
        q = z.iter().map(|c| x.mul(c)).collect();
        orthonormalize(&mut q);

        // Bᵀ = Xᵀ Q, columns of length n_c. Bᵀ = V Σ Wᵀ, so B = W Σ Vᵀ.
        let bt: Vec<Vec<f64>> = q.iter().map(|c| x.mul_t(c)).collect();
        let (sigma, w, v) = jacobi_svd(bt);
        let u: Vec<Vec<f64>> = w[..m]
            .iter()
            .map(|wc| {
                let mut col = vec![0.0; n_r];
                for (qi, &c) in q.iter().zip(wc) {
                    axpy(c, qi, &mut col);
                }
                col
            })
            .collect();

        let scale = sigma[0].max(f64::MIN_POSITIVE);
        worst = 0.0;
        for i in 0..m {
            let mut r = x.mul(&v[i]);
            axpy(-sigma[i], &u[i], &mut r);
            worst = worst.max(norm(&r) / scale);
        }
        if worst <= opts.tolerance || sigma[0] == 0.0 {
            let mut u_m = Matrix::zeros(n_r, m);
            let mut v_m = Matrix::zeros(n_c, m);
            for i in 0..m {
                let pivot = u[i]
                    .iter()
                    .enumerate()
                    .fold((0, 0.0f64), |best, (j, &val)| {
                        if val.abs() > best.1.abs() {
                            (j, val)
                        } else {
                            best
                        }
                    })
                    .1;
                let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
                for (j, &x) in u[i].iter().enumerate().take(n_r) {
                    u_m.set(j, i, sign * x);
                }
                for (j, &x) in v[i].iter().enumerate().take(n_c) {
                    v_m.set(j, i, sign * x);
                }
            }
            return Ok(TruncatedSvd {
                singular_values: sigma[..m].to_vec(),
                u: u_m,
                v: v_m,
                iterations: it,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iterations,
        residual: worst,
    })
}

/// Baseline embeddings `U Σ^exponent`, paired with word ids.
pub fn svd_embeddings(
    design: &DesignMatrix,
    m: usize,
    exponent: f64,
    opts: &SvdOptions,
) -> Result<Vec<(u32, Vec<f64>)>> {
    if !(exponent.is_finite() && exponent >= 0.0) {
        return Err(Error::invalid("exponent must be finite and non-negative"));
    }
    let svd = truncated_svd(design.matrix(), m, opts)?;
    let emb = svd.embeddings(exponent);
    Ok(design
        .words()
        .iter()
        .enumerate()
        .map(|(i, &w)| (w, emb.row(i).to_vec()))
        .collect())
}
