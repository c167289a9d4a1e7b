use crate::scalar::Real;

const FRAC_2_SQRT_PI: f64 = 1.128_379_167_095_512_6;
const LN_SQRT_PI: f64 = 0.572_364_942_924_700_1;
const SERIES_BUDGET: usize = 200;
const CF_BUDGET: usize = 300;

// erf by the all-positive-term confluent series
//   erf(x) = (2/sqrt(pi)) x e^{-x^2} sum_k (2x^2)^k / (1*3*...*(2k+1)),
// free of cancellation in erf itself; the final 1 - erf(x) step amplifies
// roundoff by e^{x^2}ish, so the series is only used for x <= 1.2.
fn erf_series<T: Real>(x: T) -> T {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut k = T::one();
    for _ in 0..SERIES_BUDGET {
        term = term * (x2 + x2) / (k + k + T::one());
        sum = sum + term;
        if term <= sum.abs() * T::epsilon() {
            break;
        }
        k = k + T::one();
    }
    T::of(FRAC_2_SQRT_PI) * (-x2).exp() * sum
}

// erfc(x) = Q(1/2, x^2), evaluated by the upper-incomplete-gamma continued
// fraction (modified Lentz); converges for x^2 around 3/2 and beyond, faster
// as x grows.
fn erfc_cf<T: Real>(x: T) -> T {
    let a = T::of(0.5);
    let xg = x * x;
    let tiny = T::of(1e-300).max(T::min_positive_value());
    let mut b = xg + T::one() - a;
    let mut c = tiny.recip();
    let mut d = b.recip();
    let mut h = d;
    for i in 1..=CF_BUDGET {
        let an = -T::count(i) * (T::count(i) - a);
        b = b + T::of(2.0);
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = d.recip();
        let delta = d * c;
        h = h * delta;
        if (delta - T::one()).abs() < T::epsilon() {
            break;
        }
    }
    // prefactor e^{-x^2} x^{2a} ... with a = 1/2: e^{-x^2} x / sqrt(pi)
    ((-xg + a * xg.ln() - T::of(LN_SQRT_PI)).exp()) * h
}

/// Complementary error function, accurate to ~1e-15 relative on the real line.
pub fn erfc<T: Real>(x: T) -> T {
    if x < T::zero() {
        return T::of(2.0) - erfc(-x);
    }
    if x <= T::of(1.2) {
        T::one() - erf_series(x)
    } else {
        erfc_cf(x)
    }
}

/// Lower tail of the standard normal law, Phi(-s), for any real s.
pub fn normal_tail<T: Real>(s: T) -> T {
    // Phi(-s) = erfc(s / sqrt(2)) / 2
    T::of(0.5) * erfc(s * T::of(core::f64::consts::FRAC_1_SQRT_2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn erfc_matches_reference_values() {
        let cases = [
            (0.05, 0.9436280222029834),
            (0.1, 0.8875370839817152),
            (0.5, 0.4795001221869535),
            (1.0, 0.15729920705028516),
            (1.5, 0.03389485352468927),
            (1.9999, 0.00467980209297061),
            (2.0, 0.004677734981047266),
            (2.0001, 0.0046756686958033394),
            (2.5, 0.00040695201744495886),
            (3.0, 2.2090496998585445e-5),
            (5.0, 1.5374597944280347e-12),
            (8.0, 1.1224297172982928e-29),
            (10.0, 2.0884875837625446e-45),
            (26.0, 5.663192408856145e-296),
            (-0.3, 1.3286267594591274),
            (-1.0, 1.8427007929497148),
            (-2.5, 1.999593047982555),
        ];
        for (x, want) in cases {
            assert_relative_eq!(erfc(x), want, max_relative = 2e-14, epsilon = 1e-300);
        }
    }

    #[test]
    fn normal_tail_matches_reference_values() {
        assert_eq!(normal_tail(0.0), 0.5);
        let cases = [
            (0.5, 0.3085375387259869),
            (1.0, 0.15865525393145707),
            (2.3263478740408408, 0.01),
            (-1.0, 0.8413447460685429),
            (5.0, 2.866515718791933e-7),
            (10.0, 7.61985302416047e-24),
        ];
        for (s, want) in cases {
            assert_abs_diff_eq!(normal_tail(s), want, epsilon = 1e-14);
        }
    }

    #[test]
    fn tails_are_monotone_and_symmetric() {
        let mut prev = normal_tail(-8.0f64);
        let mut s = -7.5f64;
        while s <= 8.0 {
            let cur = normal_tail(s);
            assert!(cur < prev, "normal tail must decrease, s={s}");
            assert_abs_diff_eq!(cur + normal_tail(-s), 1.0, epsilon = 1e-14);
            prev = cur;
            s += 0.5;
        }
    }

    #[test]
    fn works_in_f32() {
        assert!((normal_tail(1.0f32) - 0.15865525).abs() < 1e-6);
        assert!((erfc(2.5f32) - 4.0695202e-4).abs() < 1e-9);
    }
}
