//! Matrix-exponential action for Hermitian generators.
//!
//! `expi_action` computes exp(-i t H) v with Lanczos subspace projection and
//! adaptive substepping, never forming the exponential densely. Small
//! matrices (rotation unitaries, quadrature generators) go through the exact
//! eigendecomposition route instead.

use ndarray::{Array1, Array2};

use super::csr::Csr;
use super::dense::{vdot, vec_norm};
use super::eigen::eigh;
use crate::error::{Error, Result};
use crate::scalar::{cx, Cx, Real};

#[derive(Clone, Copy, Debug, Default)]
pub struct ExpmStats {
    pub substeps: usize,
    pub matvecs: usize,
    pub error_estimate: f64,
}

/// exp(-i t H) v for Hermitian H in CSR form.
pub fn expi_action<T: Real>(
    h: &Csr<T>,
    t: T,
    v: &Array1<Cx<T>>,
    tol: T,
) -> Result<(Array1<Cx<T>>, ExpmStats)> {
    let n = h.nrows;
    if h.ncols != n || v.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "expi_action: H is {}x{}, v has length {}",
            h.nrows,
            h.ncols,
            v.len()
        )));
    }
    let mut stats = ExpmStats::default();
    if t == T::zero() {
        return Ok((v.clone(), stats));
    }
    let m_max = 30.min(n);
    let mut psi = v.clone();
    let mut remaining = t;
    let total = t.abs();
    let sign = if t > T::zero() { T::one() } else { -T::one() };
    let mut accumulated_err = T::zero();
    let max_substeps = 200_000usize;

    while remaining.abs() > T::epsilon() * total {
        let beta0 = vec_norm(&psi);
        if beta0 == T::zero() {
            break;
        }
        // Lanczos basis from current state
        let mut basis: Vec<Array1<Cx<T>>> = Vec::with_capacity(m_max + 1);
        basis.push(psi.mapv(|z| z / cx(beta0)));
        let mut alphas: Vec<T> = Vec::new();
        let mut betas: Vec<T> = Vec::new();
        let mut breakdown = false;
        for j in 0..m_max {
            let mut w = h.matvec(&basis[j]);
            stats.matvecs += 1;
            if j > 0 {
                let b = betas[j - 1];
                w.zip_mut_with(&basis[j - 1], |wi, vi| *wi -= *vi * cx(b));
            }
            let alpha = vdot(&basis[j], &w).re;
            w.zip_mut_with(&basis[j], |wi, vi| *wi -= *vi * cx(alpha));
            // full reorthogonalization keeps the small basis clean
            for b in &basis {
                let ovl = vdot(b, &w);
                w.zip_mut_with(b, |wi, vi| *wi -= *vi * ovl);
            }
            alphas.push(alpha);
            let beta = vec_norm(&w);
            if beta <= T::epsilon() * T::of(64.0) * beta0.max(T::one()) {
                breakdown = true;
                break;
            }
            betas.push(beta);
            basis.push(w.mapv(|z| z / cx(beta)));
        }
        let m = alphas.len();
        // tridiagonal projection, diagonalized exactly
        let mut tm = Array2::from_elem((m, m), Cx::new(T::zero(), T::zero()));
        for i in 0..m {
            tm[[i, i]] = cx(alphas[i]);
            if i + 1 < m {
                tm[[i, i + 1]] = cx(betas[i]);
                tm[[i + 1, i]] = cx(betas[i]);
            }
        }
        let eig = eigh(&tm)?;
        let first_row: Vec<Cx<T>> = (0..m).map(|k| eig.vectors[[0, k]]).collect();

        let propagate = |h_step: T| -> (Vec<Cx<T>>, T) {
            // y = exp(-i h T_m) e1 via the eigendecomposition of T_m
            let mut y = vec![Cx::new(T::zero(), T::zero()); m];
            for k in 0..m {
                let phase = -h_step * eig.values[k];
                let rot = Cx::new(phase.cos(), phase.sin());
                let amp = first_row[k].conj() * rot;
                for i in 0..m {
                    y[i] += eig.vectors[[i, k]] * amp;
                }
            }
            let tail = y[m - 1].norm();
            (y, tail)
        };

        let mut h_step = remaining.abs().min(total);
        let mut accepted = None;
        let beta_next = if breakdown { T::zero() } else { *betas.last().unwrap_or(&T::zero()) };
        for _ in 0..120 {
            let (y, tail) = propagate(sign * h_step);
            if breakdown {
                accepted = Some((y, T::zero()));
                break;
            }
            // Saad-style local error estimate for the Lanczos projection
            let err_est = beta0 * beta_next * h_step * tail;
            let budget = tol * beta0.max(T::one()) * (h_step / total);
            if err_est <= budget * T::of(0.25) {
                accepted = Some((y, err_est));
                break;
            }
            h_step = h_step * T::of(0.5);
            if h_step < total * T::epsilon() * T::of(16.0) {
                return Err(Error::ToleranceNotAchieved(format!(
                    "expi_action step collapsed below {:e}",
                    h_step.to_f64().unwrap_or(f64::NAN)
                )));
            }
        }
        let (y, err_est) = accepted.ok_or_else(|| {
            Error::ToleranceNotAchieved("expi_action: no acceptable substep found".into())
        })?;

        let mut next = Array1::from_elem(n, Cx::new(T::zero(), T::zero()));
        for (j, b) in basis.iter().enumerate().take(m) {
            let amp = y[j] * cx(beta0);
            next.zip_mut_with(b, |ni, bi| *ni += *bi * amp);
        }
        psi = next;
        accumulated_err = accumulated_err + err_est;
        remaining = remaining - sign * h_step;
        stats.substeps += 1;
        if stats.substeps > max_substeps {
            return Err(Error::ToleranceNotAchieved(
                "expi_action exceeded the substep budget".into(),
            ));
        }
    }
    stats.error_estimate = accumulated_err.to_f64().unwrap_or(f64::NAN);
    Ok((psi, stats))
}

/// Dense exp(-i t H) for small Hermitian H via exact diagonalization.
pub fn expi_hermitian_dense<T: Real>(h: &Array2<Cx<T>>, t: T) -> Result<Array2<Cx<T>>> {
    let eig = eigh(h)?;
    let n = h.nrows();
    let mut out = Array2::from_elem((n, n), Cx::new(T::zero(), T::zero()));
    for k in 0..n {
        let phase = -t * eig.values[k];
        let rot = Cx::new(phase.cos(), phase.sin());
        for i in 0..n {
            let vik = eig.vectors[[i, k]] * rot;
            for j in 0..n {
                out[[i, j]] += vik * eig.vectors[[j, k]].conj();
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn pauli_z_rotation() {
        // H = sigma_z: exp(-i t H)|+> has components e^{-it}, e^{+it}
        let h = array![[cx(1.0), cx(0.0)], [cx(0.0), cx(-1.0)]];
        let hs = Csr::from_dense(&h);
        let v = array![
            Cx::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            Cx::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)
        ];
        let t = 0.7;
        let (out, _) = expi_action(&hs, t, &v, 1e-12).unwrap();
        let expect0 = Cx::new((-t).cos(), (-t).sin()) * v[0];
        let expect1 = Cx::new(t.cos(), t.sin()) * v[1];
        assert!((out[0] - expect0).norm() < 1e-12);
        assert!((out[1] - expect1).norm() < 1e-12);

        let dense = expi_hermitian_dense(&h, t).unwrap();
        let out2 = dense.dot(&v);
        assert!((out2[0] - expect0).norm() < 1e-13);
        assert!((out2[1] - expect1).norm() < 1e-13);
    }

    #[test]
    fn large_random_tridiagonal_agrees_with_dense() {
        let n = 60;
        let mut h = Array2::from_elem((n, n), Cx::new(0.0, 0.0));
        for i in 0..n {
            h[[i, i]] = cx((i as f64 * 0.37).sin());
            if i + 1 < n {
                let z = Cx::new((i as f64 * 0.11).cos(), (i as f64 * 0.23).sin());
                h[[i, i + 1]] = z;
                h[[i + 1, i]] = z.conj();
            }
        }
        let mut v = Array1::from_elem(n, Cx::new(0.0, 0.0));
        v[0] = cx(1.0);
        let t = 5.0;
        let (fast, stats) = expi_action(&Csr::from_dense(&h), t, &v, 1e-11).unwrap();
        let slow = expi_hermitian_dense(&h, t).unwrap().dot(&v);
        let diff = (&fast - &slow).mapv(|z| z.norm_sqr()).sum().sqrt();
        assert!(diff < 1e-9, "diff {diff}, stats {stats:?}");
        // norm preserved
        let norm: f64 = fast.mapv(|z| z.norm_sqr()).sum().sqrt();
        assert!((norm - 1.0).abs() < 1e-10);
    }
}
