//! Portfolios and mixture-of-elliptic risk-factor models: domain types,
//! validation, and the little linear algebra the engines need.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quad::integrate;
use crate::scalar::Real;
use crate::specfun::sphere_surface;

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(n: usize) -> Self {
        Matrix { n, data: vec![T::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, T::one());
        }
        m
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::domain("matrix", "no rows"));
        }
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::domain(
                    "matrix",
                    format!("row {i} has length {}, expected {n}", row.len()),
                ));
            }
            data.extend_from_slice(row);
        }
        Ok(Matrix { n, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    #[inline]
    pub(crate) fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
    }

    /// v M v^t for a coordinate vector v.
    pub fn quadratic_form(&self, v: &[T]) -> Result<T> {
        if v.len() != self.n {
            return Err(Error::DimensionMismatch {
                message: format!(
                    "vector length {} does not match matrix dimension {}",
                    v.len(),
                    self.n
                ),
            });
        }
        let mut acc = T::zero();
        for i in 0..self.n {
            let mut row = T::zero();
            for j in 0..self.n {
                row = row + self.get(i, j) * v[j];
            }
            acc = acc + v[i] * row;
        }
        Ok(acc)
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    /// Largest |M_ij - M_ji| over all pairs.
    pub fn asymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Lower-triangular L with L L^t = self; fails if any pivot is not
    /// strictly positive (matrix not positive definite).
    pub fn cholesky(&self) -> Result<CholeskyFactor<T>> {
        let n = self.n;
        let mut l = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let mut sum = self.get(i, j);
                for k in 0..j {
                    sum = sum - l.get(i, k) * l.get(j, k);
                }
                if i == j {
                    if !(sum > T::zero()) {
                        return Err(Error::domain(
                            "cholesky",
                            format!("matrix is not positive definite (pivot {i})"),
                        ));
                    }
                    l.set(i, j, sum.sqrt());
                } else {
                    l.set(i, j, sum / l.get(j, j));
                }
            }
        }
        Ok(CholeskyFactor { lower: l })
    }
}

/// Lower-triangular factor L of a scale matrix, convention L L^t = Σ.
#[derive(Debug, Clone, PartialEq)]
pub struct CholeskyFactor<T> {
    lower: Matrix<T>,
}

impl<T: Real> CholeskyFactor<T> {
    pub fn lower(&self) -> &Matrix<T> {
        &self.lower
    }

    pub fn dim(&self) -> usize {
        self.lower.n
    }

    /// ‖L^t δ‖ = √(δ Σ δ^t), the portfolio scale under this factor.
    pub fn portfolio_norm(&self, delta: &[T]) -> Result<T> {
        let n = self.lower.n;
        if delta.len() != n {
            return Err(Error::DimensionMismatch {
                message: format!(
                    "delta length {} does not match factor dimension {n}",
                    delta.len()
                ),
            });
        }
        let mut acc = T::zero();
        for j in 0..n {
            let mut v = T::zero();
            for i in j..n {
                v = v + delta[i] * self.lower.get(i, j);
            }
            acc = acc + v * v;
        }
        Ok(acc.sqrt())
    }

    /// L·ε — maps iid standard coordinates onto the component's scale.
    pub fn mul_vec(&self, eps: &[T]) -> Vec<T> {
        let n = self.lower.n;
        debug_assert_eq!(eps.len(), n);
        let mut out = vec![T::zero(); n];
        for i in 0..n {
            let mut acc = T::zero();
            for j in 0..=i {
                acc = acc + self.lower.get(i, j) * eps[j];
            }
            out[i] = acc;
        }
        out
    }

    /// Relative Frobenius error ‖L L^t − Σ‖ / ‖Σ‖.
    pub fn reconstruction_error(&self, sigma: &Matrix<T>) -> T {
        let n = self.lower.n;
        let mut num = T::zero();
        let mut den = T::zero();
        for i in 0..n {
            for j in 0..n {
                let mut v = T::zero();
                for k in 0..=i.min(j) {
                    v = v + self.lower.get(i, k) * self.lower.get(j, k);
                }
                let d = v - sigma.get(i, j);
                num = num + d * d;
                den = den + sigma.get(i, j) * sigma.get(i, j);
            }
        }
        if den == T::zero() {
            num.sqrt()
        } else {
            (num / den).sqrt()
        }
    }
}

/// Radial profile of one elliptic component.
///
/// `Custom` carries the fully normalized density generator g: the component
/// density is |Σ|^{-1/2} g((x−μ) Σ^{-1} (x−μ)^t), and g must integrate to one
/// in the model's dimension (checked at validation time).
#[derive(Clone)]
pub enum GeneratorKind<T> {
    StudentT { nu: T },
    Normal,
    Custom { g: Arc<dyn Fn(T) -> T + Send + Sync> },
}

impl<T: fmt::Debug> fmt::Debug for GeneratorKind<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorKind::StudentT { nu } => f.debug_struct("StudentT").field("nu", nu).finish(),
            GeneratorKind::Normal => f.write_str("Normal"),
            GeneratorKind::Custom { .. } => f.write_str("Custom{..}"),
        }
    }
}

// Custom generators compare by function identity: two models are equal only
// when they share the same closure, not merely pointwise-equal ones.
impl<T: PartialEq> PartialEq for GeneratorKind<T> {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Self::StudentT { nu: a }, Self::StudentT { nu: b }) => a == b,
            (Self::Normal, Self::Normal) => true,
            (Self::Custom { g: a }, Self::Custom { g: b }) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

/// One elliptic mixture component: weight, location, scale, radial profile.
///
/// `scale` is the dispersion matrix exactly as it appears in the density —
/// no degrees-of-freedom covariance rescaling is applied anywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct EllipticComponent<T> {
    pub weight: T,
    pub mean: Vec<T>,
    pub scale: Matrix<T>,
    pub generator: GeneratorKind<T>,
}

/// Mixture of elliptic components; the joint risk-factor law.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureModel<T> {
    pub components: Vec<EllipticComponent<T>>,
    pub dimension: usize,
}

/// Linear (or Delta-Theta) portfolio: P&L ≈ δ·X + Θ·t.
#[derive(Debug, Clone, PartialEq)]
pub struct Portfolio<T> {
    pub delta: Vec<T>,
    pub theta: T,
    pub horizon: T,
}

impl<T: Real> Portfolio<T> {
    /// Pure linear portfolio (Θ = 0).
    pub fn new(delta: Vec<T>) -> Result<Self> {
        Self::with_theta(delta, T::zero(), T::zero())
    }

    pub fn with_theta(delta: Vec<T>, theta: T, horizon: T) -> Result<Self> {
        if delta.is_empty() {
            return Err(Error::domain("portfolio", "delta is empty"));
        }
        if delta.iter().any(|d| !d.is_finite()) {
            return Err(Error::domain("portfolio", "delta has non-finite entries"));
        }
        if delta.iter().all(|d| *d == T::zero()) {
            return Err(Error::domain("portfolio", "delta is identically zero"));
        }
        if !theta.is_finite() {
            return Err(Error::domain("portfolio", "theta is not finite"));
        }
        if !(horizon >= T::zero()) {
            return Err(Error::domain("portfolio", format!("horizon must be >= 0, got {horizon}")));
        }
        Ok(Portfolio { delta, theta, horizon })
    }

    /// Carry term Θ·t.
    pub fn carry(&self) -> T {
        self.theta * self.horizon
    }
}

/// δ·μ_j — the portfolio drift contributed by one component.
pub fn portfolio_mean<T: Real>(p: &Portfolio<T>, c: &EllipticComponent<T>) -> Result<T> {
    if p.delta.len() != c.mean.len() {
        return Err(Error::DimensionMismatch {
            message: format!(
                "delta length {} does not match component dimension {}",
                p.delta.len(),
                c.mean.len()
            ),
        });
    }
    Ok(p.delta.iter().zip(&c.mean).fold(T::zero(), |acc, (d, m)| acc + *d * *m))
}

/// √(δ Σ_j δ^t) — the portfolio scale under one component.
pub fn portfolio_stdev<T: Real>(p: &Portfolio<T>, c: &EllipticComponent<T>) -> Result<T> {
    let q = c.scale.quadratic_form(&p.delta)?;
    if !(q > T::zero()) {
        return Err(Error::domain(
            "portfolio_stdev",
            "delta lies in the null space of the scale matrix",
        ));
    }
    Ok(q.sqrt())
}

/// A [`MixtureModel`] that passed [`MixtureModel::validate`]: factorizations
/// cached, moments classified. Immutable and safely shareable across threads.
#[derive(Debug, Clone)]
pub struct ValidatedModel<T> {
    model: MixtureModel<T>,
    factors: Vec<CholeskyFactor<T>>,
    common_moments: bool,
}

impl<T: Real> MixtureModel<T> {
    /// Checks every invariant and returns the model with factorizations
    /// cached, or the complete list of violations (not just the first).
    pub fn validate(self) -> Result<ValidatedModel<T>> {
        let mut violations: Vec<String> = Vec::new();
        let n = self.dimension;
        if n == 0 {
            violations.push("model dimension must be at least 1".into());
        }
        if self.components.is_empty() {
            violations.push("model has no components".into());
        }

        let mut weight_sum = T::zero();
        let mut factors = Vec::with_capacity(self.components.len());
        for (j, c) in self.components.iter().enumerate() {
            if !(c.weight > T::zero()) || !c.weight.is_finite() {
                violations.push(format!("component {j}: weight {} is not positive", c.weight));
            }
            weight_sum = weight_sum + c.weight;
            if c.mean.len() != n {
                violations.push(format!(
                    "component {j}: mean length {} does not match model dimension {n}",
                    c.mean.len()
                ));
            }
            if c.scale.dim() != n {
                violations.push(format!(
                    "component {j}: scale dimension {} does not match model dimension {n}",
                    c.scale.dim()
                ));
                continue;
            }
            let scale_mag = c.scale.max_abs();
            let sym_tol = T::of(1e-12) * scale_mag.max(T::one());
            if c.scale.asymmetry() > sym_tol {
                violations.push(format!("component {j}: scale matrix is not symmetric"));
            }
            match c.scale.cholesky() {
                Ok(f) => {
                    let err = f.reconstruction_error(&c.scale);
                    if err > T::of(1e-10) {
                        violations.push(format!(
                            "component {j}: factorization reconstruction error {err} exceeds 1e-10"
                        ));
                    }
                    factors.push(f);
                }
                Err(_) => {
                    violations.push(format!("component {j}: scale matrix is not positive definite"));
                }
            }
            match &c.generator {
                GeneratorKind::StudentT { nu } => {
                    if !(*nu > T::of(2.0)) || !nu.is_finite() {
                        violations.push(format!(
                            "component {j}: degrees of freedom {nu} must exceed 2"
                        ));
                    }
                }
                GeneratorKind::Normal => {}
                GeneratorKind::Custom { g } => {
                    if n >= 1 {
                        match custom_normalization(g.as_ref(), n) {
                            Ok(mass) => {
                                if (mass - T::one()).abs() > T::of(1e-6) {
                                    violations.push(format!(
                                        "component {j}: custom generator integrates to {mass}, not 1, in dimension {n}"
                                    ));
                                }
                            }
                            Err(e) => violations.push(format!(
                                "component {j}: custom generator normalization check failed: {e}"
                            )),
                        }
                    }
                }
            }
        }

        if !self.components.is_empty() && (weight_sum - T::one()).abs() > T::of(1e-12) {
            violations.push(format!("component weights sum to {weight_sum}, not 1"));
        }

        if !violations.is_empty() {
            return Err(Error::Validation { violations });
        }

        let common_moments = self.has_common_moments();
        Ok(ValidatedModel { model: self, factors, common_moments })
    }

    // true iff all means agree within 1e-12 and all scales agree within
    // 1e-12 relative to the largest scale entry
    fn has_common_moments(&self) -> bool {
        let Some(first) = self.components.first() else { return false };
        let mean_tol = T::of(1e-12);
        let scale_mag = self
            .components
            .iter()
            .fold(T::zero(), |m, c| m.max(c.scale.max_abs()))
            .max(T::one());
        let scale_tol = T::of(1e-12) * scale_mag;
        self.components.iter().skip(1).all(|c| {
            c.mean
                .iter()
                .zip(&first.mean)
                .all(|(a, b)| (*a - *b).abs() <= mean_tol)
                && c.scale.dim() == first.scale.dim()
                && (0..c.scale.dim()).all(|i| {
                    (0..c.scale.dim())
                        .all(|j| (c.scale.get(i, j) - first.scale.get(i, j)).abs() <= scale_tol)
                })
        })
    }
}

// total mass of the elliptic density induced by g in dimension n:
// |S_{n-1}|/2 * int_0^infty u^{n/2-1} g(u) du, via u = n (r/(1-r))^2
fn custom_normalization<T: Real>(g: &(dyn Fn(T) -> T + Send + Sync), n: usize) -> Result<T> {
    let surface = sphere_surface::<T>(n + 1)?;
    let scale = T::count(n);
    let half_n = T::count(n) * T::of(0.5);
    let result = integrate(
        |r: T| {
            let omr = T::one() - r;
            let w = r / omr;
            let u = scale * w * w;
            let gv = g(u);
            if gv < T::zero() {
                return Err(Error::domain(
                    "custom generator",
                    format!("g({u}) = {gv} is negative"),
                ));
            }
            // u^{n/2-1} du = 2 scale^{n/2} w^{n-1} / (1-r)^2 dr; the w^{n-1}
            // power absorbs the u^{-1/2} endpoint singularity when n = 1
            Ok(gv * T::of(2.0) * scale.powf(half_n) * w.powi(n as i32 - 1) / (omr * omr))
        },
        T::zero(),
        T::one(),
        T::of(1e-10),
        T::of(1e-10),
        512,
    )?;
    Ok(result.value * surface * T::of(0.5))
}

impl<T: Real> ValidatedModel<T> {
    /// The underlying mixture.
    pub fn mix(&self) -> &MixtureModel<T> {
        &self.model
    }

    pub fn dimension(&self) -> usize {
        self.model.dimension
    }

    pub fn components(&self) -> &[EllipticComponent<T>] {
        &self.model.components
    }

    /// Cached lower-triangular factor of component `j`'s scale matrix.
    pub fn factor(&self, j: usize) -> &CholeskyFactor<T> {
        &self.factors[j]
    }

    /// True iff every component shares the same mean and scale.
    pub fn common_moments(&self) -> bool {
        self.common_moments
    }

    /// Recover the plain model (e.g. to modify and re-validate).
    pub fn into_mix(self) -> MixtureModel<T> {
        self.model
    }
}
