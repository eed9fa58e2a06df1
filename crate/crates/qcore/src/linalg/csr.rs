//! Compressed-sparse-row complex matrices.
//!
//! Operators on large tensor-product spaces are band-structured (ladder
//! operators kron identities), so CSR keeps propagator matvecs at
//! O(nnz) instead of O(dim^2).

use ndarray::{Array1, Array2};

use crate::scalar::{Cx, Real};

#[derive(Clone, Debug)]
pub struct Csr<T: Real> {
    pub nrows: usize,
    pub ncols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub data: Vec<Cx<T>>,
}

impl<T: Real> Csr<T> {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, indptr: vec![0; nrows + 1], indices: Vec::new(), data: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            data: vec![Cx::new(T::one(), T::zero()); n],
        }
    }

    pub fn from_diag(diag: &[Cx<T>]) -> Self {
        let n = diag.len();
        let mut m = Self::identity(n);
        m.data.copy_from_slice(diag);
        m
    }

    /// Build from triplets; duplicate entries are summed.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, Cx<T>)]) -> Self {
        let mut counts = vec![0usize; nrows + 1];
        for &(i, _, _) in triplets {
            counts[i + 1] += 1;
        }
        for i in 0..nrows {
            counts[i + 1] += counts[i];
        }
        let mut indices = vec![0usize; triplets.len()];
        let mut data = vec![Cx::new(T::zero(), T::zero()); triplets.len()];
        let mut next = counts.clone();
        for &(i, j, v) in triplets {
            let k = next[i];
            indices[k] = j;
            data[k] = v;
            next[i] += 1;
        }
        let mut m = Self { nrows, ncols, indptr: counts, indices, data };
        m.sort_and_merge();
        m
    }

    fn sort_and_merge(&mut self) {
        let mut indptr = vec![0usize; self.nrows + 1];
        let mut indices = Vec::with_capacity(self.indices.len());
        let mut data = Vec::with_capacity(self.data.len());
        for i in 0..self.nrows {
            let lo = self.indptr[i];
            let hi = self.indptr[i + 1];
            let mut row: Vec<(usize, Cx<T>)> =
                (lo..hi).map(|k| (self.indices[k], self.data[k])).collect();
            row.sort_by_key(|&(j, _)| j);
            let mut last: Option<usize> = None;
            for (j, v) in row {
                if last == Some(j) {
                    let n = data.len();
                    data[n - 1] += v;
                } else {
                    indices.push(j);
                    data.push(v);
                    last = Some(j);
                }
            }
            indptr[i + 1] = indices.len();
        }
        self.indptr = indptr;
        self.indices = indices;
        self.data = data;
    }

    pub fn from_dense(a: &Array2<Cx<T>>) -> Self {
        let (nrows, ncols) = a.dim();
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::new();
        let mut data = Vec::new();
        let zero = T::zero();
        for i in 0..nrows {
            for j in 0..ncols {
                let v = a[[i, j]];
                if v.re != zero || v.im != zero {
                    indices.push(j);
                    data.push(v);
                }
            }
            indptr[i + 1] = indices.len();
        }
        Self { nrows, ncols, indptr, indices, data }
    }

    pub fn to_dense(&self) -> Array2<Cx<T>> {
        let mut out = Array2::zeros((self.nrows, self.ncols));
        for i in 0..self.nrows {
            for k in self.indptr[i]..self.indptr[i + 1] {
                out[[i, self.indices[k]]] = self.data[k];
            }
        }
        out
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn scale(&self, factor: Cx<T>) -> Self {
        let mut out = self.clone();
        for v in out.data.iter_mut() {
            *v *= factor;
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut indptr = vec![0usize; self.nrows + 1];
        let mut indices = Vec::with_capacity(self.nnz() + other.nnz());
        let mut data = Vec::with_capacity(self.nnz() + other.nnz());
        for i in 0..self.nrows {
            let (mut ka, mut kb) = (self.indptr[i], other.indptr[i]);
            let (ea, eb) = (self.indptr[i + 1], other.indptr[i + 1]);
            while ka < ea || kb < eb {
                let ja = if ka < ea { self.indices[ka] } else { usize::MAX };
                let jb = if kb < eb { other.indices[kb] } else { usize::MAX };
                if ja == jb {
                    indices.push(ja);
                    data.push(self.data[ka] + other.data[kb]);
                    ka += 1;
                    kb += 1;
                } else if ja < jb {
                    indices.push(ja);
                    data.push(self.data[ka]);
                    ka += 1;
                } else {
                    indices.push(jb);
                    data.push(other.data[kb]);
                    kb += 1;
                }
            }
            indptr[i + 1] = indices.len();
        }
        Self { nrows: self.nrows, ncols: self.ncols, indptr, indices, data }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut counts = vec![0usize; self.ncols + 1];
        for &j in &self.indices {
            counts[j + 1] += 1;
        }
        for j in 0..self.ncols {
            counts[j + 1] += counts[j];
        }
        let mut indices = vec![0usize; self.nnz()];
        let mut data = vec![Cx::new(T::zero(), T::zero()); self.nnz()];
        let mut next = counts.clone();
        for i in 0..self.nrows {
            for k in self.indptr[i]..self.indptr[i + 1] {
                let j = self.indices[k];
                let slot = next[j];
                indices[slot] = i;
                data[slot] = self.data[k].conj();
                next[j] += 1;
            }
        }
        Self { nrows: self.ncols, ncols: self.nrows, indptr: counts, indices, data }
    }

    /// Kronecker product, left factor is the slow index.
    pub fn kron(&self, other: &Self) -> Self {
        let nrows = self.nrows * other.nrows;
        let ncols = self.ncols * other.ncols;
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(self.nnz() * other.nnz());
        let mut data = Vec::with_capacity(self.nnz() * other.nnz());
        for ia in 0..self.nrows {
            for ib in 0..other.nrows {
                for ka in self.indptr[ia]..self.indptr[ia + 1] {
                    let va = self.data[ka];
                    let ja = self.indices[ka];
                    for kb in other.indptr[ib]..other.indptr[ib + 1] {
                        indices.push(ja * other.ncols + other.indices[kb]);
                        data.push(va * other.data[kb]);
                    }
                }
                indptr[ia * other.nrows + ib + 1] = indices.len();
            }
        }
        Self { nrows, ncols, indptr, indices, data }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.ncols, other.nrows);
        let mut indptr = vec![0usize; self.nrows + 1];
        let mut indices = Vec::new();
        let mut data = Vec::new();
        let zero = Cx::new(T::zero(), T::zero());
        let mut acc: Vec<Cx<T>> = vec![zero; other.ncols];
        let mut touched: Vec<usize> = Vec::new();
        for i in 0..self.nrows {
            for k in self.indptr[i]..self.indptr[i + 1] {
                let va = self.data[k];
                let row = self.indices[k];
                for kb in other.indptr[row]..other.indptr[row + 1] {
                    let j = other.indices[kb];
                    if acc[j] == zero {
                        touched.push(j);
                    }
                    acc[j] += va * other.data[kb];
                }
            }
            touched.sort_unstable();
            for &j in &touched {
                indices.push(j);
                data.push(acc[j]);
                acc[j] = zero;
            }
            indptr[i + 1] = indices.len();
            touched.clear();
        }
        Self { nrows: self.nrows, ncols: other.ncols, indptr, indices, data }
    }

    pub fn matvec(&self, x: &Array1<Cx<T>>) -> Array1<Cx<T>> {
        assert_eq!(self.ncols, x.len());
        let xs = x.as_slice().expect("contiguous");
        let mut out = Array1::zeros(self.nrows);
        let os = out.as_slice_mut().expect("contiguous");
        for i in 0..self.nrows {
            let mut acc = Cx::new(T::zero(), T::zero());
            for k in self.indptr[i]..self.indptr[i + 1] {
                acc += self.data[k] * xs[self.indices[k]];
            }
            os[i] = acc;
        }
        out
    }

    /// out = self * b for dense b.
    pub fn mul_dense(&self, b: &Array2<Cx<T>>) -> Array2<Cx<T>> {
        assert_eq!(self.ncols, b.nrows());
        let ncols = b.ncols();
        let mut out = Array2::zeros((self.nrows, ncols));
        for i in 0..self.nrows {
            let mut orow = out.row_mut(i);
            let orow = orow.as_slice_mut().expect("contiguous");
            for k in self.indptr[i]..self.indptr[i + 1] {
                let v = self.data[k];
                let brow = b.row(self.indices[k]);
                let brow = brow.as_slice().expect("contiguous");
                for (o, &bv) in orow.iter_mut().zip(brow) {
                    *o += v * bv;
                }
            }
        }
        out
    }

    /// out = b * self for dense b.
    pub fn mul_dense_left(&self, b: &Array2<Cx<T>>) -> Array2<Cx<T>> {
        assert_eq!(b.ncols(), self.nrows);
        let m = b.nrows();
        let mut out = Array2::zeros((m, self.ncols));
        for i in 0..m {
            let brow = b.row(i);
            let brow = brow.as_slice().expect("contiguous");
            let mut orow = out.row_mut(i);
            let orow = orow.as_slice_mut().expect("contiguous");
            for (k_row, &bv) in brow.iter().enumerate() {
                if bv.re == T::zero() && bv.im == T::zero() {
                    continue;
                }
                for k in self.indptr[k_row]..self.indptr[k_row + 1] {
                    orow[self.indices[k]] += bv * self.data[k];
                }
            }
        }
        out
    }
}
