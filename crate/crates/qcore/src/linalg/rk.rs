//! Embedded Dormand-Prince 5(4) integrator with PI step-size control.
//!
//! Integrates matrix-valued ODEs (density matrices). Explicit stepping is
//! adequate in the non-stiff photon-loss regime; persistent rejection is
//! reported as an error rather than silently degrading accuracy.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::scalar::{Cx, Real};

#[derive(Clone, Copy, Debug, Default)]
pub struct RkStats {
    pub steps: usize,
    pub rejected: usize,
    pub last_error: f64,
}

pub struct RkOptions<T: Real> {
    pub rtol: T,
    pub atol: T,
    pub max_steps: usize,
}

impl<T: Real> Default for RkOptions<T> {
    fn default() -> Self {
        Self { rtol: T::of(1e-8), atol: T::of(1e-12), max_steps: 2_000_000 }
    }
}

type M<T> = Array2<Cx<T>>;

fn scaled_err_norm<T: Real>(err: &M<T>, y0: &M<T>, y1: &M<T>, atol: T, rtol: T) -> T {
    let mut acc = T::zero();
    let n = err.len() as f64;
    for ((e, a), b) in err.iter().zip(y0.iter()).zip(y1.iter()) {
        let sc = atol + rtol * a.norm().max(b.norm());
        let q = e.norm() / sc;
        acc = acc + q * q;
    }
    (acc / T::of(n)).sqrt()
}

/// Integrate dy/dt = f(y) from `t0` to `t1`, calling `on_sample` at every
/// accepted step boundary that coincides with a requested sample time.
pub fn dopri5<T, F>(
    f: F,
    y0: M<T>,
    t0: T,
    t1: T,
    sample_times: &[T],
    mut on_sample: impl FnMut(T, &M<T>),
    opts: &RkOptions<T>,
) -> Result<(M<T>, RkStats)>
where
    T: Real,
    F: Fn(&M<T>) -> M<T>,
{
    let span = t1 - t0;
    let mut stats = RkStats::default();
    let mut y = y0;
    if span == T::zero() {
        for &ts in sample_times {
            on_sample(ts, &y);
        }
        return Ok((y, stats));
    }
    assert!(span > T::zero(), "dopri5 integrates forward in time");

    // Butcher tableau (Dormand-Prince 5(4))
    let a21 = T::of(1.0 / 5.0);
    let a31 = T::of(3.0 / 40.0);
    let a32 = T::of(9.0 / 40.0);
    let a41 = T::of(44.0 / 45.0);
    let a42 = T::of(-56.0 / 15.0);
    let a43 = T::of(32.0 / 9.0);
    let a51 = T::of(19372.0 / 6561.0);
    let a52 = T::of(-25360.0 / 2187.0);
    let a53 = T::of(64448.0 / 6561.0);
    let a54 = T::of(-212.0 / 729.0);
    let a61 = T::of(9017.0 / 3168.0);
    let a62 = T::of(-355.0 / 33.0);
    let a63 = T::of(46732.0 / 5247.0);
    let a64 = T::of(49.0 / 176.0);
    let a65 = T::of(-5103.0 / 18656.0);
    let b1 = T::of(35.0 / 384.0);
    let b3 = T::of(500.0 / 1113.0);
    let b4 = T::of(125.0 / 192.0);
    let b5 = T::of(-2187.0 / 6784.0);
    let b6 = T::of(11.0 / 84.0);
    // b - bhat
    let e1 = T::of(71.0 / 57600.0);
    let e3 = T::of(-71.0 / 16695.0);
    let e4 = T::of(71.0 / 1920.0);
    let e5 = T::of(-17253.0 / 339200.0);
    let e6 = T::of(22.0 / 525.0);
    let e7 = T::of(-1.0 / 40.0);

    let lc = |m: &M<T>, s: T| m.mapv(|z| z * Cx::new(s, T::zero()));

    let mut samples: Vec<T> = sample_times.to_vec();
    samples.retain(|&ts| ts >= t0 && ts <= t1);
    samples.sort_by(|a, b| a.partial_cmp(b).expect("finite sample times"));
    let mut next_sample = 0usize;
    while next_sample < samples.len() && samples[next_sample] <= t0 {
        on_sample(samples[next_sample], &y);
        next_sample += 1;
    }

    let mut t = t0;
    let mut k1 = f(&y);
    // initial step heuristic
    let f_scale = k1.iter().map(|z| z.norm_sqr()).fold(T::zero(), |a, b| a + b).sqrt();
    let y_scale = y.iter().map(|z| z.norm_sqr()).fold(T::zero(), |a, b| a + b).sqrt();
    let mut h = if f_scale > T::zero() {
        (opts.rtol.powf(T::of(0.2)) * (y_scale.max(T::one()) / f_scale)).min(span / T::of(16.0))
    } else {
        span / T::of(16.0)
    }
    .max(span * T::of(1e-10));

    let h_min = span * T::epsilon() * T::of(32.0);
    let mut err_prev = T::of(1e-4);
    let mut rejected_last = false;
    let mut consecutive_rejects = 0usize;

    while t < t1 {
        let mut clipped = false;
        let mut h_try = h;
        if t + h_try > t1 {
            h_try = t1 - t;
            clipped = true;
        }
        if next_sample < samples.len() && t + h_try > samples[next_sample] {
            h_try = samples[next_sample] - t;
            clipped = true;
        }
        if h_try < h_min {
            // immediately at a sample boundary
            if next_sample < samples.len() && (samples[next_sample] - t).abs() <= h_min {
                on_sample(samples[next_sample], &y);
                next_sample += 1;
                continue;
            }
            return Err(Error::StepSizeUnderflow {
                t: t.to_f64().unwrap_or(f64::NAN),
                h: h_try.to_f64().unwrap_or(f64::NAN),
            });
        }

        let k2 = f(&(&y + &lc(&k1, h_try * a21)));
        let k3 = f(&(&y + &(&lc(&k1, h_try * a31) + &lc(&k2, h_try * a32))));
        let k4 = f(&(&y
            + &(&(&lc(&k1, h_try * a41) + &lc(&k2, h_try * a42)) + &lc(&k3, h_try * a43))));
        let k5 = f(&(&y
            + &(&(&(&lc(&k1, h_try * a51) + &lc(&k2, h_try * a52)) + &lc(&k3, h_try * a53))
                + &lc(&k4, h_try * a54))));
        let k6 = f(&(&y
            + &(&(&(&(&lc(&k1, h_try * a61) + &lc(&k2, h_try * a62)) + &lc(&k3, h_try * a63))
                + &lc(&k4, h_try * a64))
                + &lc(&k5, h_try * a65))));
        let y_new = &y
            + &(&(&(&(&lc(&k1, h_try * b1) + &lc(&k3, h_try * b3)) + &lc(&k4, h_try * b4))
                + &lc(&k5, h_try * b5))
                + &lc(&k6, h_try * b6));
        let k7 = f(&y_new);
        let err_m = &(&(&(&(&lc(&k1, h_try * e1) + &lc(&k3, h_try * e3)) + &lc(&k4, h_try * e4))
            + &lc(&k5, h_try * e5))
            + &lc(&k6, h_try * e6))
            + &lc(&k7, h_try * e7);

        let err = scaled_err_norm(&err_m, &y, &y_new, opts.atol, opts.rtol).max(T::of(1e-300));
        stats.last_error = err.to_f64().unwrap_or(f64::NAN);

        if err <= T::one() {
            t = t + h_try;
            y = y_new;
            k1 = k7; // FSAL
            stats.steps += 1;
            consecutive_rejects = 0;
            while next_sample < samples.len()
                && (samples[next_sample] - t).abs() <= h_min.max(span * T::of(1e-14))
            {
                on_sample(samples[next_sample], &y);
                next_sample += 1;
            }
            // PI controller
            let mut factor =
                T::of(0.9) * err.powf(T::of(-0.17)) * err_prev.powf(T::of(0.04));
            factor = factor.min(T::of(5.0)).max(T::of(0.2));
            if rejected_last {
                factor = factor.min(T::one());
            }
            err_prev = err.max(T::of(1e-4));
            rejected_last = false;
            if !clipped {
                h = h_try * factor;
            } else {
                h = (h * factor).max(h_try);
            }
        } else {
            stats.rejected += 1;
            consecutive_rejects += 1;
            rejected_last = true;
            if consecutive_rejects > 40 {
                return Err(Error::StepSizeUnderflow {
                    t: t.to_f64().unwrap_or(f64::NAN),
                    h: h_try.to_f64().unwrap_or(f64::NAN),
                });
            }
            h = h_try * (T::of(0.9) * err.powf(T::of(-0.2))).max(T::of(0.1));
        }
        if stats.steps + stats.rejected > opts.max_steps {
            return Err(Error::ToleranceNotAchieved(format!(
                "dopri5 exceeded {} steps",
                opts.max_steps
            )));
        }
    }
    Ok((y, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    #[test]
    fn exponential_decay_matrix() {
        // dY/dt = -Y  => Y(t) = e^{-t} Y0
        let y0 = Array2::from_elem((3, 3), cx(1.0));
        let (y, stats) = dopri5(
            |y: &Array2<Cx<f64>>| y.mapv(|z| -z),
            y0,
            0.0,
            2.0,
            &[],
            |_, _| {},
            &RkOptions::default(),
        )
        .unwrap();
        let expect = (-2.0f64).exp();
        for v in y.iter() {
            assert!((v.re - expect).abs() < 1e-9, "steps {}", stats.steps);
        }
    }

    #[test]
    fn oscillator_phase_accuracy() {
        // dY/dt = i w Y => phase rotation
        let w = 7.0;
        let y0 = Array2::from_elem((1, 1), cx(1.0));
        let (y, _) = dopri5(
            |y: &Array2<Cx<f64>>| y.mapv(|z| Cx::new(0.0, w) * z),
            y0,
            0.0,
            3.0,
            &[],
            |_, _| {},
            &RkOptions { rtol: 1e-10, atol: 1e-14, max_steps: 1_000_000 },
        )
        .unwrap();
        let expect = Cx::new((w * 3.0).cos(), (w * 3.0).sin());
        assert!((y[[0, 0]] - expect).norm() < 1e-8);
    }

    #[test]
    fn samples_are_hit_in_order() {
        let y0 = Array2::from_elem((1, 1), cx(1.0));
        let mut seen = Vec::new();
        let samples = [0.0, 0.25, 0.5, 0.75, 1.0];
        dopri5(
            |y: &Array2<Cx<f64>>| y.mapv(|z| -z),
            y0,
            0.0,
            1.0,
            &samples,
            |t, y| seen.push((t, y[[0, 0]].re)),
            &RkOptions::default(),
        )
        .unwrap();
        assert_eq!(seen.len(), samples.len());
        for (i, (t, v)) in seen.iter().enumerate() {
            assert!((t - samples[i]).abs() < 1e-12);
            assert!((v - (-t).exp()).abs() < 1e-8);
        }
    }
}
