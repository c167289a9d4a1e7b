//! One-dimensional reductions of elliptic laws: the marginal survival
//! function of a standardized linear functional and the tail moment integral
//! behind Expected Shortfall, each with a closed-form route (Student, normal)
//! and an independent quadrature route (any generator).
//!
//! Quadrature on u ∈ [lower, ∞) uses the substitution u = lower + S·r²,
//! r = t/(1−t), which maps to t ∈ (0, 1), kills the integrable endpoint
//! behavior, and concentrates nodes on the characteristic scale S. Integrands
//! are assembled in log space so large-n powers and tiny densities cannot
//! overflow or underflow the intermediate products.

use crate::error::{Error, Result};
use crate::model::GeneratorKind;
use crate::quad::integrate;
use crate::scalar::Real;
use crate::specfun::{
    ln_beta, log_gamma, normal_tail, reg_incomplete_beta_cmpl, sphere_surface, student_tail,
};

const QUAD_ABS_TOL: f64 = 1e-12;
const QUAD_REL_TOL: f64 = 1e-10;
const QUAD_MAX_INTERVALS: usize = 2048;

const LN_PI: f64 = 1.144_729_885_849_400_2;
const LN_2PI: f64 = 1.837_877_066_409_345_6;

/// ln g(u) of the n-dimensional radial profile at squared radius u ≥ 0.
pub(crate) fn log_radial_density<T: Real>(
    gen: &GeneratorKind<T>,
    u: T,
    n: usize,
) -> Result<T> {
    let half = T::of(0.5);
    match gen {
        GeneratorKind::StudentT { nu } => {
            let nu = *nu;
            let nn = T::count(n);
            // ln C(nu, n) = lnΓ((nu+n)/2) − lnΓ(nu/2) − (n/2) ln(nu π)
            let ln_c = log_gamma(half * (nu + nn))? - log_gamma(half * nu)?
                - half * nn * (nu.ln() + T::of(LN_PI));
            Ok(ln_c - half * (nn + nu) * (u / nu).ln_1p())
        }
        GeneratorKind::Normal => Ok(-half * T::count(n) * T::of(LN_2PI) - half * u),
        GeneratorKind::Custom { g } => {
            let gv = g(u);
            if gv < T::zero() {
                return Err(Error::domain(
                    "radial density",
                    format!("custom generator is negative at u = {u}"),
                ));
            }
            Ok(gv.ln())
        }
    }
}

// characteristic squared-radius scale of the tail beyond `lower`
fn char_scale<T: Real>(gen: &GeneratorKind<T>, lower: T, n: usize) -> T {
    let body = match gen {
        GeneratorKind::StudentT { nu } => *nu,
        _ => T::count(n.max(1)),
    };
    lower + body
}

/// Survival function P(Z > s), s > 0, of the standardized one-dimensional
/// marginal; closed forms for Student and normal generators, quadrature for
/// custom ones.
pub fn marginal_survival<T: Real>(gen: &GeneratorKind<T>, s: T, n: usize) -> Result<T> {
    match gen {
        GeneratorKind::StudentT { nu } => student_tail(s, *nu),
        GeneratorKind::Normal => {
            if !(s > T::zero()) {
                return Err(Error::domain(
                    "marginal_survival",
                    format!("threshold must be positive, got {s}"),
                ));
            }
            Ok(normal_tail(s))
        }
        GeneratorKind::Custom { .. } => marginal_survival_integral(gen, s, n),
    }
}

/// Survival function for any real threshold (symmetry extension).
pub fn marginal_survival_full<T: Real>(gen: &GeneratorKind<T>, x: T, n: usize) -> Result<T> {
    if x > T::zero() {
        marginal_survival(gen, x, n)
    } else if x < T::zero() {
        Ok(T::one() - marginal_survival(gen, -x, n)?)
    } else {
        Ok(T::of(0.5))
    }
}

/// The quadrature route for the marginal survival function, valid for every
/// generator kind; for s > 0 and the model dimension n:
///
/// n ≥ 2: G(s) = (|S_{n−2}|/4)·B((n−1)/2, ½)·∫_{s²}^∞ u^{(n−2)/2}
///                  I_{1−s²/u}((n−1)/2, ½) g(u) du
/// n = 1: G(s) = ½ ∫_{s²}^∞ u^{−1/2} g(u) du
pub fn marginal_survival_integral<T: Real>(
    gen: &GeneratorKind<T>,
    s: T,
    n: usize,
) -> Result<T> {
    if !(s > T::zero()) {
        return Err(Error::domain(
            "marginal_survival_integral",
            format!("threshold must be positive, got {s}"),
        ));
    }
    if n == 0 {
        return Err(Error::domain("marginal_survival_integral", "dimension must be >= 1"));
    }
    let half = T::of(0.5);
    let two = T::of(2.0);
    let lower = s * s;
    let scale = char_scale(gen, lower, n);
    let a = half * T::count(n - 1); // (n-1)/2, only used when n >= 2

    let integrand = |t: T| -> Result<T> {
        let omt = T::one() - t;
        let r = t / omt;
        let sr2 = scale * r * r;
        let u = lower + sr2;
        let ln_g = log_radial_density(gen, u, n)?;
        // du = 2 S r / (1-t)^2 dt
        let ln_jac = (two * scale * r).ln() - two * omt.ln();
        if n == 1 {
            Ok(half * (ln_g - half * u.ln() + ln_jac).exp())
        } else {
            // exact complement pair avoids forming 1 - s^2/u near u = s^2
            let x = sr2 / u;
            let xc = lower / u;
            let ib = reg_incomplete_beta_cmpl(x, xc, a, half)?;
            let ln_mag = ln_g + half * T::count(n - 2) * u.ln() + ln_jac;
            Ok(ib * ln_mag.exp())
        }
    };

    let q = integrate(
        integrand,
        T::zero(),
        T::one(),
        T::of(QUAD_ABS_TOL),
        T::of(QUAD_REL_TOL),
        QUAD_MAX_INTERVALS,
    )?;
    if n == 1 {
        Ok(q.value)
    } else {
        let coeff = T::of(0.25) * sphere_surface::<T>(n)? * ln_beta(a, half)?.exp();
        Ok(coeff * q.value)
    }
}

/// Tail moment J(q) = ∫_q^∞ x f₁(x) dx of the standardized marginal, even in
/// q; equals π^{(n−1)/2}/(2 Γ((n+1)/2)) ∫_{q²}^∞ (u−q²)^{(n−1)/2} g(u) du.
/// Closed forms: normal → φ(q); Student → (ν/(ν−1) + q²/(ν−1))·f_ν(q).
pub fn tail_moment<T: Real>(gen: &GeneratorKind<T>, q: T, n: usize) -> Result<T> {
    let q = q.abs();
    let half = T::of(0.5);
    match gen {
        GeneratorKind::Normal => Ok((-half * q * q - half * T::of(LN_2PI)).exp()),
        GeneratorKind::StudentT { nu } => {
            let nu = *nu;
            // the tail mean exists for nu > 1; the stricter nu > 2 rule is a
            // model-validation concern, enforced there
            if !(nu > T::one()) {
                return Err(Error::domain(
                    "tail_moment",
                    format!("tail moment needs degrees of freedom above 1, got {nu}"),
                ));
            }
            // (1/(2√π)) Γ((ν−1)/2)/Γ(ν/2) ν^{ν/2} (q²+ν)^{(1−ν)/2}, log space
            let ln_j = log_gamma(half * (nu - T::one()))? - log_gamma(half * nu)?
                - half * T::of(LN_PI) - T::of(2.0).ln()
                + half * nu * nu.ln()
                + half * (T::one() - nu) * (q * q + nu).ln();
            Ok(ln_j.exp())
        }
        GeneratorKind::Custom { .. } => tail_moment_integral(gen, q, n),
    }
}

/// The quadrature route for the tail moment, valid for every generator.
pub fn tail_moment_integral<T: Real>(gen: &GeneratorKind<T>, q: T, n: usize) -> Result<T> {
    if n == 0 {
        return Err(Error::domain("tail_moment_integral", "dimension must be >= 1"));
    }
    let q = q.abs();
    let half = T::of(0.5);
    let two = T::of(2.0);
    let lower = q * q;
    let scale = char_scale(gen, lower, n);
    let nn = T::count(n);

    let integrand = |t: T| -> Result<T> {
        let omt = T::one() - t;
        let r = t / omt;
        let sr2 = scale * r * r;
        let u = lower + sr2;
        let ln_g = log_radial_density(gen, u, n)?;
        // (u-q²)^{(n-1)/2} du = 2 S^{(n+1)/2} r^n / (1-t)^2 dt, via u-q² = S r²
        let ln_mag = ln_g
            + half * (nn + T::one()) * scale.ln()
            + nn * r.ln()
            + two.ln()
            - two * omt.ln();
        Ok(ln_mag.exp())
    };

    let qd = integrate(
        integrand,
        T::zero(),
        T::one(),
        T::of(QUAD_ABS_TOL),
        T::of(QUAD_REL_TOL),
        QUAD_MAX_INTERVALS,
    )?;
    // π^{(n−1)/2} / (2 Γ((n+1)/2))
    let ln_coeff = half * T::count(n - 1) * T::of(LN_PI)
        - two.ln()
        - log_gamma(half * (nn + T::one()))?;
    Ok(ln_coeff.exp() * qd.value)
}
