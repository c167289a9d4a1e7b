//! Value-at-Risk for mixture-elliptic models: the standardized quantile
//! solver, common-moment and general VaR, Delta-Theta VaR, incremental
//! (Euler) VaR, and two-market aggregation.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{
    portfolio_mean, portfolio_stdev, GeneratorKind, Portfolio, ValidatedModel,
};
use crate::radial::{marginal_survival, marginal_survival_full};
use crate::scalar::Real;
use crate::solve::brent;

/// Brent function-value tolerance and iteration cap for all quantile solves.
pub const SOLVER_F_TOL: f64 = 1e-12;
pub const SOLVER_MAX_ITER: usize = 200;
/// Bracket expansion ceiling: confidence levels whose standardized quantile
/// exceeds this are rejected as out of scope.
pub const BRACKET_CAP: f64 = 1e12;

/// Solved standardized quantile plus solver diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuantileSolution<T> {
    /// q with Σ β_j G_j(q) = α.
    pub q_alpha: T,
    /// Residual Σ β_j G_j(q) − α at the returned root.
    pub residual: T,
    pub iterations: usize,
    /// Bracket (lo, hi) inside which the root was isolated.
    pub bracket: (T, T),
}

/// Reporting conventions attached to every risk figure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Convention<T> {
    /// Sign convention for the reported numbers.
    pub loss_sign: &'static str,
    /// Carry horizon t entering the Θ·t term (0 for pure linear portfolios).
    pub horizon: T,
}

pub(crate) const LOSS_SIGN: &str = "VaR/ES reported as positive currency losses";

/// A computed risk figure: VaR, optionally ES, and how they were produced.
///
/// `var` is typically ≥ 0; it can be negative when a favorable drift
/// exceeds the quantile term, and is reported signed so that affine
/// identities hold exactly.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskReport<T> {
    pub var: T,
    pub es: Option<T>,
    pub alpha: T,
    pub convention: Convention<T>,
    /// Present when the figure came from a common-moment quantile solve.
    pub quantile: Option<QuantileSolution<T>>,
}

fn check_alpha<T: Real>(alpha: T) -> Result<()> {
    if !(alpha > T::zero() && alpha < T::of(0.5)) {
        return Err(Error::domain(
            "confidence level",
            format!("alpha must lie in (0, 0.5), got {alpha}"),
        ));
    }
    Ok(())
}

fn check_weights<T: Real>(mix: &[(T, GeneratorKind<T>)]) -> Result<()> {
    if mix.is_empty() {
        return Err(Error::domain("mixture_tail", "empty mixture"));
    }
    let sum = mix.iter().fold(T::zero(), |a, (w, _)| a + *w);
    if (sum - T::one()).abs() > T::of(1e-9) {
        return Err(Error::domain(
            "mixture_tail",
            format!("mixture weights sum to {sum}, not 1"),
        ));
    }
    Ok(())
}

/// Σ_j β_j G_j(q): the upper-tail probability of the standardized mixture at
/// q > 0. `dim` is the model dimension (it only matters for custom radial
/// generators, whose marginals are dimension-dependent).
pub fn mixture_tail<T: Real>(
    q: T,
    mix: &[(T, GeneratorKind<T>)],
    dim: usize,
) -> Result<T> {
    if !(q > T::zero()) {
        return Err(Error::domain(
            "mixture_tail",
            format!("threshold must be positive, got {q}"),
        ));
    }
    check_weights(mix)?;
    let mut acc = T::zero();
    for (w, gen) in mix {
        acc = acc + *w * marginal_survival(gen, q, dim)?;
    }
    Ok(acc)
}

/// Solve Σ_j β_j G_j(q) = α for the standardized quantile q > 0.
///
/// Bracketing: the tail is ½ at 0⁺, so lo = 0 always brackets for
/// α < ½; hi expands ×4 from 1 until the tail drops below α, capped at
/// [`BRACKET_CAP`] (beyond which the confidence level is declared out of
/// scope for the generator family).
pub fn solve_quantile<T: Real>(
    mix: &[(T, GeneratorKind<T>)],
    alpha: T,
    dim: usize,
) -> Result<QuantileSolution<T>> {
    check_alpha(alpha)?;
    check_weights(mix)?;
    let mut hi = T::one();
    while mixture_tail(hi, mix, dim)? > alpha {
        hi = hi * T::of(4.0);
        if hi > T::of(BRACKET_CAP) {
            return Err(Error::AlphaTooSmall {
                alpha: alpha.as_f64(),
                cap: BRACKET_CAP,
            });
        }
    }
    let objective = |q: T| -> Result<T> {
        if q <= T::zero() {
            // continuity limit: every marginal tail approaches ½ at 0⁺
            Ok(T::of(0.5) - alpha)
        } else {
            Ok(mixture_tail(q, mix, dim)? - alpha)
        }
    };
    let root = brent(objective, T::zero(), hi, T::of(SOLVER_F_TOL), SOLVER_MAX_ITER)?;
    Ok(QuantileSolution {
        q_alpha: root.root,
        residual: root.f_root,
        iterations: root.iterations,
        bracket: (T::zero(), hi),
    })
}

// (β_j, generator_j) pairs of a validated model
fn mixture_of<T: Real>(model: &ValidatedModel<T>) -> Vec<(T, GeneratorKind<T>)> {
    model
        .components()
        .iter()
        .map(|c| (c.weight, c.generator.clone()))
        .collect()
}

// per-component portfolio stdevs, rejecting degenerate directions
fn component_stdevs<T: Real>(p: &Portfolio<T>, model: &ValidatedModel<T>) -> Result<Vec<T>> {
    model
        .components()
        .iter()
        .enumerate()
        .map(|(j, c)| {
            portfolio_stdev(p, c).map_err(|_| Error::DegeneratePortfolio { component: j })
        })
        .collect()
}

/// VaR for a common-moment mixture: VaR = −δ·μ + q_α·√(δΣδᵗ).
pub fn var_common_moments<T: Real>(
    p: &Portfolio<T>,
    model: &ValidatedModel<T>,
    alpha: T,
) -> Result<RiskReport<T>> {
    check_alpha(alpha)?;
    if !model.common_moments() {
        return Err(Error::Unsupported(
            "model components have distinct moments; use var_general".into(),
        ));
    }
    let q = solve_quantile(&mixture_of(model), alpha, model.dimension())?;
    let sigma = component_stdevs(p, model)?[0];
    let mu = portfolio_mean(p, &model.components()[0])?;
    Ok(RiskReport {
        var: -mu + q.q_alpha * sigma,
        es: None,
        alpha,
        convention: Convention { loss_sign: LOSS_SIGN, horizon: p.horizon },
        quantile: Some(q),
    })
}

/// VaR for arbitrary (possibly distinct) component moments: the positive root
/// of α = Σ_j β_j G_j((δ·μ_j + VaR)/√(δΣ_jδᵗ)).
pub fn var_general<T: Real>(
    p: &Portfolio<T>,
    model: &ValidatedModel<T>,
    alpha: T,
) -> Result<RiskReport<T>> {
    check_alpha(alpha)?;
    let dim = model.dimension();
    let sigmas = component_stdevs(p, model)?;
    let mus: Vec<T> = model
        .components()
        .iter()
        .map(|c| portfolio_mean(p, c))
        .collect::<Result<_>>()?;

    let tail_at = |v: T| -> Result<T> {
        let mut acc = T::zero();
        for ((c, mu), sigma) in model.components().iter().zip(&mus).zip(&sigmas) {
            let arg = (*mu + v) / *sigma;
            acc = acc + c.weight * marginal_survival_full(&c.generator, arg, dim)?;
        }
        Ok(acc)
    };

    // only positive-VaR solutions are in scope: the tail at 0 must exceed α
    if tail_at(T::zero())? <= alpha {
        return Err(Error::InfeasibleConfidence { alpha: alpha.as_f64() });
    }
    let mut hi = T::one();
    while tail_at(hi)? > alpha {
        hi = hi * T::of(4.0);
        if hi > T::of(BRACKET_CAP) {
            return Err(Error::AlphaTooSmall { alpha: alpha.as_f64(), cap: BRACKET_CAP });
        }
    }
    let root = brent(
        |v| Ok(tail_at(v)? - alpha),
        T::zero(),
        hi,
        T::of(SOLVER_F_TOL),
        SOLVER_MAX_ITER,
    )?;
    Ok(RiskReport {
        var: root.root,
        es: None,
        alpha,
        convention: Convention { loss_sign: LOSS_SIGN, horizon: p.horizon },
        quantile: None,
    })
}

/// Delta-Theta VaR for a common-moment model:
/// VaR = −δ·μ + Θ·t + q_α·√(δΣδᵗ).
///
/// The Θ·t term enters with the orientation in which it was stated; callers
/// supply Θ accordingly. With Θ·t = 0 this is exactly
/// [`var_common_moments`].
pub fn var_delta_theta<T: Real>(
    p: &Portfolio<T>,
    model: &ValidatedModel<T>,
    alpha: T,
) -> Result<RiskReport<T>> {
    let mut report = var_common_moments(p, model, alpha)?;
    report.var = report.var + p.carry();
    Ok(report)
}

/// Per-position incremental VaR (Euler decomposition), requiring μ = 0 and
/// common moments: IVaR_i = δ_i·γ_i with γ = q_α·Σδᵗ/√(δΣδᵗ), so that
/// Σ_i IVaR_i = VaR exactly.
pub fn incremental_var<T: Real>(
    p: &Portfolio<T>,
    model: &ValidatedModel<T>,
    alpha: T,
) -> Result<Vec<T>> {
    check_alpha(alpha)?;
    if !model.common_moments() {
        return Err(Error::Unsupported(
            "incremental VaR requires common component moments".into(),
        ));
    }
    let zero_mean = model
        .components()
        .iter()
        .all(|c| c.mean.iter().all(|m| m.abs() <= T::of(1e-12)));
    if !zero_mean {
        return Err(Error::Unsupported(
            "incremental VaR is stated for zero-mean models only".into(),
        ));
    }
    let q = solve_quantile(&mixture_of(model), alpha, model.dimension())?;
    let sigma = component_stdevs(p, model)?[0];
    let scale = &model.components()[0].scale;
    let n = scale.dim();
    if p.delta.len() != n {
        return Err(Error::DimensionMismatch {
            message: format!(
                "delta length {} does not match model dimension {n}",
                p.delta.len()
            ),
        });
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = T::zero();
        for j in 0..n {
            row = row + scale.get(i, j) * p.delta[j];
        }
        out.push(p.delta[i] * q.q_alpha * row / sigma);
    }
    Ok(out)
}

/// Implied correlation φ = q²·cross/(V₁·V₂) between two sub-portfolio VaRs,
/// where cross = δ₁ᵗΣ₁₂δ₂.
pub fn implied_var_correlation<T: Real>(var1: T, var2: T, q: T, cross: T) -> Result<T> {
    if !(var1 > T::zero() && var2 > T::zero() && q > T::zero()) {
        return Err(Error::domain(
            "aggregate_var",
            "sub-portfolio VaRs and the quantile must be positive",
        ));
    }
    Ok(q * q * cross / (var1 * var2))
}

/// Two-market VaR aggregation for zero-mean sub-portfolios sharing the same
/// generator and α: VaR(M) = √(V₁² + V₂² + 2q²·δ₁ᵗΣ₁₂δ₂).
pub fn aggregate_var<T: Real>(var1: T, var2: T, q: T, cross: T) -> Result<T> {
    let phi = implied_var_correlation(var1, var2, q, cross)?;
    if phi.abs() > T::one() + T::of(1e-12) {
        return Err(Error::InvalidCorrelation { phi: phi.as_f64() });
    }
    let radicand = var1 * var1 + var2 * var2 + T::of(2.0) * q * q * cross;
    if radicand < T::zero() {
        return Err(Error::InvalidCorrelation { phi: phi.as_f64() });
    }
    Ok(radicand.sqrt())
}
