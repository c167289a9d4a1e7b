//! Scalar root finding (Brent's method) used by the quantile solvers.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Outcome of a bracketed root search.
#[derive(Debug, Clone, Copy)]
pub struct RootResult<T> {
    pub root: T,
    pub f_root: T,
    pub iterations: usize,
}

/// Brent's method on a sign-changing bracket `[a, b]`.
///
/// Converges when `|f(x)| <= f_tol` or the bracket collapses to machine
/// width; errors if the bracket does not straddle a root or the iteration
/// budget runs out. The objective may itself fail, and that failure is
/// propagated.
pub fn brent<T, F>(mut f: F, a: T, b: T, f_tol: T, max_iter: usize) -> Result<RootResult<T>>
where
    T: Real,
    F: FnMut(T) -> Result<T>,
{
    let two = T::of(2.0);
    let half = T::of(0.5);
    let mut a = a;
    let mut b = b;
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == T::zero() {
        return Ok(RootResult { root: a, f_root: fa, iterations: 0 });
    }
    if fb == T::zero() {
        return Ok(RootResult { root: b, f_root: fb, iterations: 0 });
    }
    if fa.signum() == fb.signum() {
        return Err(Error::domain(
            "brent",
            format!("bracket [{a}, {b}] does not straddle a root"),
        ));
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for iter in 1..=max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = two * T::epsilon() * b.abs() + half * T::epsilon();
        let xm = half * (c - b);
        if fb.abs() <= f_tol || xm.abs() <= tol1 {
            return Ok(RootResult { root: b, f_root: fb, iterations: iter });
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            // inverse quadratic / secant step
            let s = fb / fa;
            let (mut p, mut q) = if a == c {
                (two * xm * s, T::one() - s)
            } else {
                let q0 = fa / fc;
                let r = fb / fc;
                (
                    s * (two * xm * q0 * (q0 - r) - (b - a) * (r - T::one())),
                    (q0 - T::one()) * (r - T::one()) * (s - T::one()),
                )
            };
            if p > T::zero() {
                q = -q;
            }
            p = p.abs();
            let min1 = T::of(3.0) * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if two * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        if d.abs() > tol1 {
            b = b + d;
        } else {
            b = b + tol1 * xm.signum();
        }
        fb = f(b)?;
    }
    Err(Error::NonConvergence { context: "brent", budget: max_iter })
}
