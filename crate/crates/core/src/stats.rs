//! Pearson correlation with a two-sided t-test.
//!
//! The Student-t tail is evaluated through the regularized incomplete beta
//! function (continued fraction, modified Lentz), no tables.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Correlation of one pair of series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationEntry<T> {
    pub r: T,
    /// Two-sided p-value.
    pub p: T,
    pub n: usize,
}

/// A correlation entry after significance filtering. Suppressed entries stay
/// in the payload so clients can render them as not significant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilteredEntry<T> {
    pub entry: CorrelationEntry<T>,
    pub suppressed: bool,
}

/// Product-moment correlation coefficient, two-pass, clamped to `[-1, 1]`.
pub fn pearson<T: Scalar>(x: &[T], y: &[T]) -> Result<T> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::DegenerateInput(format!("{} samples", x.len())));
    }
    let n = T::of_usize(x.len());
    let mx = x.iter().fold(T::zero(), |a, &v| a + v) / n;
    let my = y.iter().fold(T::zero(), |a, &v| a + v) / n;
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&a, &b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxy = sxy + dx * dy;
        sxx = sxx + dx * dx;
        syy = syy + dy * dy;
    }
    if sxx == T::zero() || syy == T::zero() {
        return Err(Error::DegenerateInput("constant input vector".into()));
    }
    let r = sxy / (sxx * syy).sqrt();
    Ok(r.max(-T::one()).min(T::one()))
}

/// Two-sided p-value of `r` over `n` paired samples, from
/// `t = r * sqrt((n - 2) / (1 - r^2))` on `n - 2` degrees of freedom.
pub fn pearson_pvalue<T: Scalar>(r: T, n: usize) -> Result<T> {
    if n < 3 {
        return Err(Error::InsufficientSamples(n));
    }
    if !(r.abs() <= T::one()) {
        return Err(Error::BadParam(format!("correlation {r} outside [-1, 1]")));
    }
    if r.abs() == T::one() {
        return Ok(T::zero());
    }
    let df = T::of_usize(n - 2);
    let t = r * (df / (T::one() - r * r)).sqrt();
    Ok(students_t_two_sided(t, df))
}

/// `P(|T| >= |t|)` for Student's t with `df` degrees of freedom.
pub fn students_t_two_sided<T: Scalar>(t: T, df: T) -> T {
    if t == T::zero() {
        return T::one();
    }
    if t.is_infinite() {
        return T::zero();
    }
    let x = df / (df + t * t);
    reg_inc_beta(df / T::of(2.0), T::of(0.5), x)
}

/// `pearson` followed by `pearson_pvalue`.
pub fn correlate<T: Scalar>(x: &[T], y: &[T]) -> Result<CorrelationEntry<T>> {
    let r = pearson(x, y)?;
    let p = pearson_pvalue(r, x.len())?;
    Ok(CorrelationEntry { r, p, n: x.len() })
}

/// Flags entries with `p > alpha`. The boundary `p == alpha` is kept.
pub fn significance_filter<K: Ord, T: Scalar>(
    entries: BTreeMap<K, CorrelationEntry<T>>,
    alpha: T,
) -> BTreeMap<K, FilteredEntry<T>> {
    debug_assert!(alpha > T::zero() && alpha < T::one());
    entries
        .into_iter()
        .map(|(k, entry)| {
            let suppressed = entry.p > alpha;
            (k, FilteredEntry { entry, suppressed })
        })
        .collect()
}

/// Natural log of the gamma function, Lanczos approximation (g = 7, 9 terms)
/// with reflection below 0.5.
pub fn ln_gamma<T: Scalar>(x: T) -> T {
    const G: f64 = 7.0;
    const COEFFS: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    let pi = T::of(std::f64::consts::PI);
    if x < T::of(0.5) {
        return (pi / (pi * x).sin()).ln() - ln_gamma(T::one() - x);
    }
    let x = x - T::one();
    let mut acc = T::of(COEFFS[0]);
    for (i, &c) in COEFFS.iter().enumerate().skip(1) {
        acc = acc + T::of(c) / (x + T::of_usize(i));
    }
    let t = x + T::of(G + 0.5);
    T::of(0.5) * (T::of(2.0) * pi).ln() + (x + T::of(0.5)) * t.ln() - t + acc.ln()
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn reg_inc_beta<T: Scalar>(a: T, b: T, x: T) -> T {
    if x <= T::zero() {
        return T::zero();
    }
    if x >= T::one() {
        return T::one();
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (T::one() - x).ln();
    let front = ln_front.exp();
    if x < (a + T::one()) / (a + b + T::of(2.0)) {
        front * beta_continued_fraction(a, b, x) / a
    } else {
        T::one() - front * beta_continued_fraction(b, a, T::one() - x) / b
    }
}

fn beta_continued_fraction<T: Scalar>(a: T, b: T, x: T) -> T {
    const MAX_ITER: usize = 10_000;
    let eps = T::epsilon();
    let tiny = T::min_positive_value() / eps;
    let one = T::one();
    let two = T::of(2.0);
    let qab = a + b;
    let qap = a + one;
    let qam = a - one;
    let mut c = one;
    let mut d = one - qab * x / qap;
    if d.abs() < tiny {
        d = tiny;
    }
    d = one / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = T::of_usize(m);
        let m2 = two * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = one + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = one + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = one / d;
        h = h * d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = one + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = one + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = one / d;
        let delta = d * c;
        h = h * delta;
        if (delta - one).abs() <= eps {
            break;
        }
    }
    h
}
