//! Hermitian eigendecomposition by cyclic complex Jacobi rotations.
//!
//! Dimensions in this toolkit stay small enough (spin manifolds, Fock
//! cutoffs, reduced cavity states) that Jacobi's O(n^3)-per-sweep cost is
//! acceptable, and it needs no external LAPACK while staying generic over
//! the scalar type.

use ndarray::Array2;

use super::dense::{frobenius, hermitian_defect};
use crate::error::{Error, Result};
use crate::scalar::{Cx, Real};

pub struct Eigh<T: Real> {
    /// Eigenvalues in ascending order.
    pub values: Vec<T>,
    /// Column k is the eigenvector for `values[k]`.
    pub vectors: Array2<Cx<T>>,
}

const MAX_SWEEPS: usize = 60;

/// Eigendecomposition of a Hermitian matrix.
pub fn eigh<T: Real>(matrix: &Array2<Cx<T>>) -> Result<Eigh<T>> {
    let n = matrix.nrows();
    if matrix.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "eigh expects a square matrix, got {}x{}",
            n,
            matrix.ncols()
        )));
    }
    let defect = hermitian_defect(matrix);
    let scale = frobenius(matrix);
    let herm_tol = (T::of(1e-10) + T::epsilon() * T::of(64.0) * scale).max(T::of(1e-12));
    if defect > herm_tol {
        return Err(Error::NotHermitian { defect: defect.to_f64().unwrap_or(f64::NAN) });
    }

    let mut a = matrix.clone();
    let mut v: Array2<Cx<T>> = Array2::eye(n);
    let zero = Cx::new(T::zero(), T::zero());

    if n > 1 {
        let stop = scale * T::epsilon() * T::of(n as f64) * T::of(4.0);
        let mut converged = false;
        for _ in 0..MAX_SWEEPS {
            let mut off = T::zero();
            for p in 0..n {
                for q in (p + 1)..n {
                    off = off + a[[p, q]].norm_sqr();
                }
            }
            if off.sqrt() <= stop || off == T::zero() {
                converged = true;
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    rotate(&mut a, &mut v, p, q);
                }
            }
        }
        if !converged {
            // final sweep check
            let mut off = T::zero();
            for p in 0..n {
                for q in (p + 1)..n {
                    off = off + a[[p, q]].norm_sqr();
                }
            }
            if off.sqrt() > scale * T::of(1e-10) {
                return Err(Error::EigenFailure(format!(
                    "Jacobi did not converge in {MAX_SWEEPS} sweeps (off-norm {:.3e})",
                    off.sqrt().to_f64().unwrap_or(f64::NAN)
                )));
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<T> = (0..n).map(|i| a[[i, i]].re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).expect("finite eigenvalues"));

    let values: Vec<T> = order.iter().map(|&i| diag[i]).collect();
    let mut vectors = Array2::from_elem((n, n), zero);
    for (dst, &src) in order.iter().enumerate() {
        for r in 0..n {
            vectors[[r, dst]] = v[[r, src]];
        }
    }
    Ok(Eigh { values, vectors })
}

fn rotate<T: Real>(a: &mut Array2<Cx<T>>, v: &mut Array2<Cx<T>>, p: usize, q: usize) {
    let z = a[[p, q]];
    let r = z.norm();
    if r == T::zero() {
        return;
    }
    let u = z / Cx::new(r, T::zero());
    let app = a[[p, p]].re;
    let aqq = a[[q, q]].re;
    let diff = app - aqq;
    // smaller-magnitude root of r t^2 + (app-aqq) t - r = 0
    let disc = (diff * diff + T::of(4.0) * r * r).sqrt();
    let t = if diff >= T::zero() {
        T::of(2.0) * r / (diff + disc)
    } else {
        -T::of(2.0) * r / (-diff + disc)
    };
    let c = T::one() / (T::one() + t * t).sqrt();
    let s = t * c;
    let cs = Cx::new(c, T::zero());
    let su = u * s;

    let n = a.nrows();
    // row update: rows p,q of A <- J^H A
    for i in 0..n {
        let ap = a[[p, i]];
        let aq = a[[q, i]];
        a[[p, i]] = cs * ap + su * aq;
        a[[q, i]] = -su.conj() * ap + cs * aq;
    }
    // column update: cols p,q of A <- A J
    for i in 0..n {
        let ap = a[[i, p]];
        let aq = a[[i, q]];
        a[[i, p]] = cs * ap + su.conj() * aq;
        a[[i, q]] = -su * ap + cs * aq;
    }
    let new_pp = app * c * c + T::of(2.0) * c * s * r + aqq * s * s;
    let new_qq = app * s * s - T::of(2.0) * c * s * r + aqq * c * c;
    a[[p, p]] = Cx::new(new_pp, T::zero());
    a[[q, q]] = Cx::new(new_qq, T::zero());
    a[[p, q]] = Cx::new(T::zero(), T::zero());
    a[[q, p]] = Cx::new(T::zero(), T::zero());
    // accumulate V <- V J
    for i in 0..v.nrows() {
        let vp = v[[i, p]];
        let vq = v[[i, q]];
        v[[i, p]] = cs * vp + su.conj() * vq;
        v[[i, q]] = -su * vp + cs * vq;
    }
}

/// Rotate each column's global phase so its largest-magnitude component is
/// real and positive. Makes eigenbasis expansion coefficients reproducible.
pub fn fix_column_phases<T: Real>(vectors: &mut Array2<Cx<T>>) {
    let (n, cols) = vectors.dim();
    for c in 0..cols {
        let mut best = T::zero();
        let mut arg = Cx::new(T::one(), T::zero());
        for r in 0..n {
            let m = vectors[[r, c]].norm();
            if m > best {
                best = m;
                arg = vectors[[r, c]];
            }
        }
        if best > T::zero() {
            let phase = arg / Cx::new(arg.norm(), T::zero());
            let correction = phase.conj();
            for r in 0..n {
                let v = vectors[[r, c]] * correction;
                vectors[[r, c]] = v;
            }
        }
    }
}

/// Estimate the minimum eigenvalue of a Hermitian matrix.
///
/// Exact (Jacobi) for small matrices; Lanczos extreme-eigenvalue iteration
/// for large ones, which is what trace-one density-matrix positivity checks
/// need.
pub fn min_eigenvalue<T: Real>(matrix: &Array2<Cx<T>>) -> Result<T> {
    let n = matrix.nrows();
    if n <= 160 {
        return Ok(eigh(matrix)?.values[0]);
    }
    // Lanczos on -A: its largest Ritz value converges to -lambda_min.
    let mut v = ndarray::Array1::from_elem(n, Cx::new(T::zero(), T::zero()));
    let mut seed = 0x9e3779b97f4a7c15u64;
    for x in v.iter_mut() {
        seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let r = ((seed >> 11) as f64) / ((1u64 << 53) as f64) - 0.5;
        *x = Cx::new(T::of(r), T::zero());
    }
    let norm = super::dense::vec_norm(&v);
    v.mapv_inplace(|z| z / Cx::new(norm, T::zero()));

    let m = 90.min(n - 1);
    let mut alphas: Vec<T> = Vec::with_capacity(m);
    let mut betas: Vec<T> = Vec::with_capacity(m);
    let mut basis: Vec<ndarray::Array1<Cx<T>>> = vec![v.clone()];
    for j in 0..m {
        let vj = &basis[j];
        let mut w = matrix.dot(vj).mapv(|z| -z);
        if j > 0 {
            let b = betas[j - 1];
            w = &w - &basis[j - 1].mapv(|z| z * Cx::new(b, T::zero()));
        }
        let alpha = super::dense::vdot(vj, &w).re;
        w = &w - &vj.mapv(|z| z * Cx::new(alpha, T::zero()));
        // full reorthogonalization
        for b in &basis {
            let ovl = super::dense::vdot(b, &w);
            w = &w - &b.mapv(|z| z * ovl);
        }
        alphas.push(alpha);
        let beta = super::dense::vec_norm(&w);
        if beta < T::epsilon() * T::of(16.0) {
            break;
        }
        betas.push(beta);
        basis.push(w.mapv(|z| z / Cx::new(beta, T::zero())));
    }
    let k = alphas.len();
    let mut tm = Array2::from_elem((k, k), Cx::new(T::zero(), T::zero()));
    for i in 0..k {
        tm[[i, i]] = Cx::new(alphas[i], T::zero());
        if i + 1 < k && i < betas.len() {
            tm[[i, i + 1]] = Cx::new(betas[i], T::zero());
            tm[[i + 1, i]] = Cx::new(betas[i], T::zero());
        }
    }
    let eig = eigh(&tm)?;
    Ok(-eig.values[k - 1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn diagonalizes_known_hermitian() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3
        let a = array![
            [Cx::new(2.0, 0.0), Cx::new(0.0, 1.0)],
            [Cx::new(0.0, -1.0), Cx::new(2.0, 0.0)]
        ];
        let e = eigh(&a).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!((e.values[1] - 3.0).abs() < 1e-14);
        // residual A v = lambda v
        for k in 0..2 {
            let v = e.vectors.column(k).to_owned();
            let av = a.dot(&v);
            for i in 0..2 {
                let r = (av[i] - v[i] * Cx::new(e.values[k], 0.0)).norm();
                assert!(r < 1e-14);
            }
        }
    }

    #[test]
    fn random_hermitian_residuals() {
        let n = 24;
        let mut seed = 12345u64;
        let mut rng = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        let mut a = Array2::from_elem((n, n), Cx::new(0.0, 0.0));
        for i in 0..n {
            for j in i..n {
                let z = if i == j { Cx::new(rng(), 0.0) } else { Cx::new(rng(), rng()) };
                a[[i, j]] = z;
                a[[j, i]] = z.conj();
            }
        }
        let e = eigh(&a).unwrap();
        // sorted ascending
        for k in 1..n {
            assert!(e.values[k] >= e.values[k - 1]);
        }
        // orthonormality and residuals
        for k in 0..n {
            let v = e.vectors.column(k).to_owned();
            let av = a.dot(&v);
            for i in 0..n {
                let r = (av[i] - v[i] * Cx::new(e.values[k], 0.0)).norm();
                assert!(r < 1e-12, "residual {r}");
            }
            for l in 0..n {
                let d = super::super::dense::vdot(&v, &e.vectors.column(l).to_owned()).norm();
                let expect = if l == k { 1.0 } else { 0.0 };
                assert!((d - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn min_eigenvalue_matches_exact_for_large() {
        let n = 200;
        // diagonal with a known smallest entry plus small off-diagonal noise
        let mut a = Array2::from_elem((n, n), Cx::new(0.0, 0.0));
        for i in 0..n {
            a[[i, i]] = Cx::new(1.0 + i as f64 * 0.01, 0.0);
        }
        a[[7, 7]] = Cx::new(-0.5, 0.0);
        for i in 0..n - 1 {
            a[[i, i + 1]] = Cx::new(0.001, 0.002);
            a[[i + 1, i]] = Cx::new(0.001, -0.002);
        }
        let est = min_eigenvalue(&a).unwrap();
        assert!((est - (-0.5)).abs() < 1e-3, "got {est}");
    }
}
