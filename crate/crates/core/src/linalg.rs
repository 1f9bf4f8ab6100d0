//! Dense symmetric matrices, matrix-free operators and small vector helpers.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A symmetric linear operator `v -> H v`.
pub trait SymmetricOperator<S>: Sync {
    fn dim(&self) -> usize;

    /// Writes `H x` into `out`. Both slices have length [`dim`](Self::dim).
    fn apply(&self, x: &[S], out: &mut [S]);

    fn apply_new(&self, x: &[S]) -> Vec<S>
    where
        S: Scalar,
    {
        let mut out = vec![S::zero(); self.dim()];
        self.apply(x, &mut out);
        out
    }
}

/// Wraps a closure as an operator.
pub struct FnOperator<F> {
    dim: usize,
    f: F,
}

impl<F> FnOperator<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<S, F> SymmetricOperator<S> for FnOperator<F>
where
    F: Fn(&[S], &mut [S]) + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[S], out: &mut [S]) {
        (self.f)(x, out)
    }
}

/// Diagonal operator.
#[derive(Clone, Debug)]
pub struct Diagonal<S>(pub Vec<S>);

impl<S: Scalar> SymmetricOperator<S> for Diagonal<S> {
    fn dim(&self) -> usize {
        self.0.len()
    }

    fn apply(&self, x: &[S], out: &mut [S]) {
        for ((o, &d), &xi) in out.iter_mut().zip(&self.0).zip(x) {
            *o = d * xi;
        }
    }
}

/// Square matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<S> {
    n: usize,
    data: Vec<S>,
}

impl<S: Scalar> DenseMatrix<S> {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![S::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![S::one(); n])
    }

    pub fn from_diagonal(diag: &[S]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.set(i, i, d);
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    /// Builds from row-major data of length `n * n`.
    pub fn from_row_major(n: usize, data: Vec<S>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, got: data.len() });
        }
        Ok(Self { n, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> S {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[S] {
        &self.data
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [S] {
        &mut self.data[i * self.n..(i + 1) * self.n]
    }

    /// `max |H_ij - H_ji|`.
    pub fn asymmetry(&self) -> S {
        let mut worst = S::zero();
        for i in 0..self.n {
            for j in 0..i {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Replaces the matrix by `(H + Hᵀ)/2`.
    pub fn symmetrize(&mut self) {
        let half = S::of(0.5);
        for i in 0..self.n {
            for j in 0..i {
                let v = (self.get(i, j) + self.get(j, i)) * half;
                self.set(i, j, v);
                self.set(j, i, v);
            }
        }
    }

    pub fn trace(&self) -> S {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn scale(&mut self, c: S) {
        for v in &mut self.data {
            *v = *v * c;
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == S::zero() {
                    continue;
                }
                let row = &other.data[k * n..(k + 1) * n];
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d = *d + a * b;
                }
            }
        }
        out
    }

    pub fn cast<T: Scalar>(&self) -> DenseMatrix<T> {
        DenseMatrix { n: self.n, data: self.data.iter().map(|v| T::of(v.to_f64_lossy())).collect() }
    }

    pub fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j).to_f64_lossy())
    }

    pub fn from_nalgebra(m: &DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
        }
        Ok(Self::from_fn(m.nrows(), |i, j| S::of(m[(i, j)])))
    }

    /// Eigenvalues (ascending) and orthonormal eigenvectors (as columns),
    /// computed in `f64`.
    pub fn symmetric_eigen(&self) -> (Vec<S>, DenseMatrix<S>) {
        let eig = nalgebra::SymmetricEigen::new(self.to_nalgebra());
        let mut order: Vec<usize> = (0..self.n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| S::of(eig.eigenvalues[k])).collect();
        let vectors = Self::from_fn(self.n, |i, j| S::of(eig.eigenvectors[(i, order[j])]));
        (values, vectors)
    }

    /// Eigenvalues in ascending order.
    pub fn symmetric_eigenvalues(&self) -> Vec<S> {
        let mut vals: Vec<f64> = self.to_nalgebra().symmetric_eigenvalues().iter().copied().collect();
        vals.sort_by(f64::total_cmp);
        vals.into_iter().map(S::of).collect()
    }
}

impl<S: Scalar> SymmetricOperator<S> for DenseMatrix<S> {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[S], out: &mut [S]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = dot(self.row(i), x);
        }
    }
}

/// Inner product with four interleaved accumulators (fixed order, so
/// results are reproducible).
pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    let n = a.len().min(b.len());
    let (ca, cb) = (a[..n].chunks_exact(4), b[..n].chunks_exact(4));
    let (ra, rb) = (ca.remainder(), cb.remainder());
    let mut acc = [S::zero(); 4];
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            acc[k] = acc[k] + x[k] * y[k];
        }
    }
    let tail: S = ra.iter().zip(rb).map(|(&x, &y)| x * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

pub fn norm_sq<S: Scalar>(a: &[S]) -> S {
    dot(a, a)
}

/// `y += alpha * x`.
pub fn axpy<S: Scalar>(alpha: S, x: &[S], y: &mut [S]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = *yi + alpha * xi;
    }
}

pub fn sub<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

pub fn all_finite<S: Scalar>(a: &[S]) -> bool {
    a.iter().all(|v| v.is_finite())
}

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `diag`
/// and off-diagonal `off` (`off[k]` couples rows `k` and `k+1`), by
/// implicit QL with Wilkinson shifts. Returned ascending.
pub fn tridiagonal_eigenvalues<S: Scalar>(diag: &[S], off: &[S]) -> Result<Vec<S>> {
    let n = diag.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    if off.len() + 1 != n {
        return Err(Error::DimensionMismatch { expected: n - 1, got: off.len() });
    }
    let mut d = diag.to_vec();
    let mut e: Vec<S> = off.to_vec();
    e.push(S::zero());
    let two = S::of(2.0);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= S::epsilon() * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::Unsupported("tridiagonal QL did not converge".into()));
            }
            let mut g = (d[l + 1] - d[l]) / (two * e[l]);
            let mut r = g.hypot(S::one());
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (S::one(), S::one(), S::zero());
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == S::zero() {
                    d[i + 1] = d[i + 1] - p;
                    e[m] = S::zero();
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                let rr = (d[i] - g) * s + two * c * b;
                p = s * rr;
                d[i + 1] = g + p;
                g = c * rr - b;
            }
            if underflow {
                continue;
            }
            d[l] = d[l] - p;
            e[l] = g;
            e[m] = S::zero();
        }
    }
    d.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_matches_dense() {
        let diag = [2.0f64, -1.0, 3.5, 0.25, 1.0];
        let off = [0.5f64, 1.5, -0.75, 2.0];
        let got = tridiagonal_eigenvalues(&diag, &off).unwrap();
        let dense = DenseMatrix::from_fn(5, |i, j| {
            if i == j {
                diag[i]
            } else if i + 1 == j {
                off[i]
            } else if j + 1 == i {
                off[j]
            } else {
                0.0
            }
        });
        let want = dense.symmetric_eigenvalues();
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-12, "{g} vs {w}");
        }
    }

    #[test]
    fn tridiagonal_handles_decoupled_blocks() {
        let got = tridiagonal_eigenvalues(&[3.0, 1.0, 2.0], &[0.0, 0.0]).unwrap();
        assert_eq!(got, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn eigen_reconstructs_matrix() {
        let m = DenseMatrix::from_fn(4, |i, j| 1.0 / (1.0 + i as f64 + j as f64));
        let (vals, vecs) = m.symmetric_eigen();
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let rebuilt: DenseMatrix<f64> =
            DenseMatrix::from_fn(4, |i, j| (0..4).map(|k| vecs.get(i, k) * vals[k] * vecs.get(j, k)).sum());
        for (a, b) in rebuilt.as_slice().iter().zip(m.as_slice()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn dense_apply_and_helpers() {
        let m = DenseMatrix::from_row_major(2, vec![1.0f32, 2.0, 2.0, 5.0]).unwrap();
        assert_eq!(m.apply_new(&[1.0, 1.0]), vec![3.0, 7.0]);
        assert_eq!(m.trace(), 6.0);
        assert_eq!(m.asymmetry(), 0.0);
        let mut y = vec![1.0, 1.0];
        axpy(2.0, &[1.0, -1.0], &mut y);
        assert_eq!(y, vec![3.0, -1.0]);
        assert!(DenseMatrix::<f64>::from_row_major(2, vec![1.0]).is_err());
    }
}
