//! Dense complex-matrix helpers.

use ndarray::{Array1, Array2};

use crate::scalar::{Cx, Real};

pub fn adjoint<T: Real>(a: &Array2<Cx<T>>) -> Array2<Cx<T>> {
    a.t().mapv(|z| z.conj())
}

pub fn hermitian_defect<T: Real>(a: &Array2<Cx<T>>) -> T {
    let mut worst = T::zero();
    let n = a.nrows();
    for i in 0..n {
        for j in i..n {
            let d = (a[[i, j]] - a[[j, i]].conj()).norm();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

pub fn hermitize<T: Real>(a: &mut Array2<Cx<T>>) {
    let n = a.nrows();
    let half = T::of(0.5);
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = (a[[i, j]] + a[[j, i]].conj()) * half;
            a[[i, j]] = avg;
            a[[j, i]] = avg.conj();
        }
        let d = a[[i, i]];
        a[[i, i]] = Cx::new(d.re, T::zero());
    }
}

pub fn trace<T: Real>(a: &Array2<Cx<T>>) -> Cx<T> {
    a.diag().iter().copied().fold(Cx::new(T::zero(), T::zero()), |acc, z| acc + z)
}

pub fn max_abs<T: Real>(a: &Array2<Cx<T>>) -> T {
    a.iter().map(|z| z.norm()).fold(T::zero(), |m, v| if v > m { v } else { m })
}

pub fn frobenius<T: Real>(a: &Array2<Cx<T>>) -> T {
    a.iter().map(|z| z.norm_sqr()).fold(T::zero(), |acc, v| acc + v).sqrt()
}

pub fn vec_norm<T: Real>(v: &Array1<Cx<T>>) -> T {
    v.iter().map(|z| z.norm_sqr()).fold(T::zero(), |acc, x| acc + x).sqrt()
}

pub fn vdot<T: Real>(a: &Array1<Cx<T>>, b: &Array1<Cx<T>>) -> Cx<T> {
    a.iter()
        .zip(b.iter())
        .fold(Cx::new(T::zero(), T::zero()), |acc, (x, y)| acc + x.conj() * y)
}

/// Kronecker product with the left factor as the slow index.
pub fn kron<T: Real>(a: &Array2<Cx<T>>, b: &Array2<Cx<T>>) -> Array2<Cx<T>> {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    let mut out = Array2::zeros((ra * rb, ca * cb));
    for ia in 0..ra {
        for ja in 0..ca {
            let va = a[[ia, ja]];
            if va.re == T::zero() && va.im == T::zero() {
                continue;
            }
            for ib in 0..rb {
                for jb in 0..cb {
                    out[[ia * rb + ib, ja * cb + jb]] = va * b[[ib, jb]];
                }
            }
        }
    }
    out
}

pub fn matmul<T: Real>(a: &Array2<Cx<T>>, b: &Array2<Cx<T>>) -> Array2<Cx<T>> {
    a.dot(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn kron_matches_hand_example() {
        let a = array![[Cx::new(1.0, 0.0), Cx::new(2.0, 0.0)]];
        let b = array![[Cx::new(0.0, 1.0)], [Cx::new(3.0, 0.0)]];
        let k = kron(&a, &b);
        assert_eq!(k.dim(), (2, 2));
        assert_eq!(k[[0, 0]], Cx::new(0.0, 1.0));
        assert_eq!(k[[0, 1]], Cx::new(0.0, 2.0));
        assert_eq!(k[[1, 0]], Cx::new(3.0, 0.0));
        assert_eq!(k[[1, 1]], Cx::new(6.0, 0.0));
    }
}
