//! Exact truncated power series, the functional equation `y = x phi(y)`,
//! Lagrange inversion, and square-root singularity asymptotics for simply
//! generated tree families.

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;

/// A power series truncated at a fixed order; coefficients beyond the
/// order are undefined and never read.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedSeries {
    coeffs: Vec<BigInt>,
}

impl TruncatedSeries {
    /// Build from coefficients, padding with zeros or truncating to
    /// exactly `order + 1` entries.
    pub fn new(mut coeffs: Vec<BigInt>, order: usize) -> Self {
        coeffs.resize(order + 1, BigInt::zero());
        Self { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        Self::new(Vec::new(), order)
    }

    /// The identity series `x`.
    pub fn x(order: usize) -> Self {
        let mut s = Self::zero(order);
        if order >= 1 {
            s.coeffs[1] = BigInt::one();
        }
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, i: usize) -> &BigInt {
        &self.coeffs[i]
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn add(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        let coeffs = (0..=order)
            .map(|i| &self.coeffs[i] + &other.coeffs[i])
            .collect();
        Self { coeffs }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        let coeffs = (0..=order)
            .map(|i| &self.coeffs[i] - &other.coeffs[i])
            .collect();
        Self { coeffs }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        let mut coeffs = vec![BigInt::zero(); order + 1];
        for i in 0..=order.min(self.order()) {
            if self.coeffs[i].is_zero() {
                continue;
            }
            for j in 0..=(order - i).min(other.order()) {
                coeffs[i + j] += &self.coeffs[i] * &other.coeffs[j];
            }
        }
        Self { coeffs }
    }

    /// Multiply by `x` (shift coefficients up), dropping the top term.
    pub fn shift_up(&self) -> Self {
        let order = self.order();
        let mut coeffs = vec![BigInt::zero(); order + 1];
        coeffs[1..=order].clone_from_slice(&self.coeffs[..order]);
        Self { coeffs }
    }

    pub fn pow(&self, k: usize) -> Self {
        let mut acc = {
            let mut one = Self::zero(self.order());
            one.coeffs[0] = BigInt::one();
            one
        };
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Formal derivative, truncated at `order - 1`.
    pub fn derivative(&self) -> Self {
        if self.order() == 0 {
            return Self::zero(0);
        }
        let coeffs = (1..=self.order())
            .map(|i| &self.coeffs[i] * BigInt::from(i))
            .collect();
        Self { coeffs }
    }

    /// Substitute `inner` (which must have zero constant term) into this
    /// series, by Horner evaluation from the top coefficient down.
    pub fn compose(&self, inner: &Self) -> Self {
        assert!(
            inner.coeffs[0].is_zero(),
            "composition requires zero constant term"
        );
        let order = self.order().min(inner.order());
        let mut acc = TruncatedSeries::zero(order);
        for i in (0..=self.order()).rev() {
            acc = acc.mul(inner);
            acc.coeffs[0] += &self.coeffs[i];
        }
        acc
    }
}

/// The branching series `phi` of a simply generated tree family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PhiSpec {
    /// Explicit coefficients `phi_0, phi_1, ...`.
    Dense(Vec<BigInt>),
    /// `(1 + a x^b)^c`.
    BinomialPower { a: u64, b: u32, c: u32 },
}

impl PhiSpec {
    pub fn dense_u64(coeffs: &[u64]) -> Self {
        PhiSpec::Dense(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn to_series(&self, order: usize) -> TruncatedSeries {
        match self {
            PhiSpec::Dense(c) => TruncatedSeries::new(c.clone(), order),
            PhiSpec::BinomialPower { a, b, c } => {
                let mut s = TruncatedSeries::zero(order);
                s.coeffs[0] = BigInt::one();
                if (*b as usize) <= order {
                    s.coeffs[*b as usize] = BigInt::from(*a);
                }
                s.pow(*c as usize)
            }
        }
    }

    /// Simply-generated admissibility: `phi_0 > 0` and some `phi_j > 0`
    /// with `j >= 2`.
    pub fn is_admissible(&self) -> bool {
        // probe to a fixed order comfortably past any b*c we use
        let probe = match self {
            PhiSpec::Dense(c) => c.len().max(3) - 1,
            PhiSpec::BinomialPower { b, c, .. } => (*b as usize) * (*c as usize).max(1) + 1,
        };
        let s = self.to_series(probe);
        s.coeff(0).is_positive() && s.coeffs()[2..].iter().any(|c| c.is_positive())
    }
}

/// Solve `y(x) = x phi(y(x))` with `y(0) = 0` to the given order by
/// fixed-point iteration.
pub fn solve_functional(phi: &PhiSpec, order: usize) -> TruncatedSeries {
    assert!(order >= 1, "order must be at least 1");
    let phi_s = phi.to_series(order);
    let mut y = TruncatedSeries::zero(order);
    for _ in 0..order {
        y = phi_s.compose(&y).shift_up();
    }
    let next = phi_s.compose(&y).shift_up();
    assert_eq!(y, next, "fixed point failed to stabilize");
    y
}

/// `[x^n] g(y(x))` by Lagrange inversion:
/// `(1/n) [u^(n-1)] g'(u) phi(u)^n`.
pub fn lagrange_composition_coeff(
    g: &TruncatedSeries,
    phi: &PhiSpec,
    n: usize,
) -> Result<Ratio<BigInt>, Error> {
    assert!(n >= 1);
    if g.order() < n {
        return Err(Error::InsufficientOrder {
            have: g.order(),
            need: n,
        });
    }
    let phi_s = phi.to_series(n - 1);
    let inner = g.derivative().mul(&phi_s.pow(n));
    let num = if n - 1 <= inner.order() {
        inner.coeff(n - 1).clone()
    } else {
        BigInt::zero()
    };
    Ok(Ratio::new(num, BigInt::from(n)))
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// `[x^n] y(x)^m` for `phi = 1 + a x^b`:
/// `(m/n) C(n, (n-m)/b) a^((n-m)/b)` when `b | (n-m)` and `n >= m`,
/// zero otherwise. The division by `n` is exact and asserted.
pub fn lagrange_power_coeff(a: u64, b: u64, m: u64, n: u64) -> BigInt {
    lagrange_power_coeff_big(&BigInt::from(a), b, m, n)
}

/// As [`lagrange_power_coeff`] but with a big-integer weight `a`, as
/// needed when the recursion feeds a previously computed count back in.
pub fn lagrange_power_coeff_big(a: &BigInt, b: u64, m: u64, n: u64) -> BigInt {
    assert!(a.is_positive() && b >= 1 && m >= 1 && n >= 1);
    if n < m || !(n - m).is_multiple_of(b) {
        return BigInt::zero();
    }
    let k = (n - m) / b;
    let val = BigInt::from(m) * binomial(n, k) * a.pow(k as u32);
    let (q, r) = num_integer::Integer::div_rem(&val, &BigInt::from(n));
    assert!(r.is_zero(), "closed form not divisible by n");
    q
}

/// `[x^n] y(x)^m` for `phi = (1 + x^(m-1))^(m-1)`:
/// `(m/n) C(n(m-1), (n-m)/(m-1))` when `(m-1) | (n-m)`, zero otherwise.
pub fn tree_family_coeff(m: u64, n: u64) -> BigInt {
    assert!(m >= 3 && n >= m);
    if !(n - m).is_multiple_of(m - 1) {
        return BigInt::zero();
    }
    let k = (n - m) / (m - 1);
    let val = BigInt::from(m) * binomial(n * (m - 1), k);
    let (q, r) = num_integer::Integer::div_rem(&val, &BigInt::from(n));
    assert!(r.is_zero(), "closed form not divisible by n");
    q
}

/// The singularity location for `phi = 1 + a x^b`, as
/// `x0^(-1) = prefactor * base^exponent` with `prefactor = a b`,
/// `base = (b - 1) a` and `exponent = -(b - 1)/b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Singularity {
    pub value: f64,
    pub prefactor: u64,
    pub base: u64,
    pub exponent: Ratio<i64>,
}

impl Singularity {
    /// `ln(x0^(-1))`, from the exact parts.
    pub fn ln_inverse(&self) -> f64 {
        (self.prefactor as f64).ln()
            + (*self.exponent.numer() as f64) / (*self.exponent.denom() as f64)
                * (self.base as f64).ln()
    }
}

/// `x0^(-1) = a b (1/((b-1)a))^((b-1)/b)` for `phi = 1 + a x^b`.
pub fn x0_inverse(a: u64, b: u64) -> Result<Singularity, Error> {
    assert!(a >= 1 && b >= 1);
    if b == 1 {
        return Err(Error::NoSingularityRegime);
    }
    let prefactor = a * b;
    let base = (b - 1) * a;
    let exponent = Ratio::new(-((b - 1) as i64), b as i64);
    let value =
        prefactor as f64 * (base as f64).powf(*exponent.numer() as f64 / *exponent.denom() as f64);
    Ok(Singularity {
        value,
        prefactor,
        base,
        exponent,
    })
}

/// Leading-term estimate of `[x^n] y(x)` for `phi = 1 + a x^b`:
/// `b sqrt(x0 F_x / (2 pi F_yy)) x0^(-n) n^(-3/2)` on the residue class
/// `n = 1 mod b` where the coefficients live, zero off it. The factor `b`
/// accounts for the lacunary support: only every `b`-th coefficient is
/// nonzero, so the mass of the circle-method integral concentrates on `b`
/// conjugate saddle points.
pub fn asymptotic_coeff_estimate(a: u64, b: u64, n: u64) -> Result<f64, Error> {
    assert!(n >= 1);
    if b == 1 {
        return Err(Error::NoSingularityRegime);
    }
    if !(n - 1).is_multiple_of(b) {
        return Ok(0.0);
    }
    let af = a as f64;
    let bf = b as f64;
    // y0^b = 1/((b-1)a); phi(y0) = b/(b-1); x0 = y0 (b-1)/b
    let y0 = (1.0 / ((bf - 1.0) * af)).powf(1.0 / bf);
    let phi_y0 = bf / (bf - 1.0);
    let x0 = y0 * (bf - 1.0) / bf;
    let f_x = phi_y0;
    let f_yy = x0 * af * bf * (bf - 1.0) * y0.powf(bf - 2.0);
    let amp = bf * (x0 * f_x / (2.0 * std::f64::consts::PI * f_yy)).sqrt();
    let x0_inv = x0_inverse(a, b)?.value;
    Ok(amp * x0_inv.powf(n as f64) * (n as f64).powf(-1.5))
}

/// Natural logarithm of a positive big integer, via the leading 64 bits
/// plus a power-of-two correction. Accurate to f64 precision.
pub fn ln_bigint(x: &BigInt) -> f64 {
    assert!(x.is_positive(), "ln of non-positive integer");
    let bits = x.bits();
    if bits <= 63 {
        return (x.to_u64().unwrap() as f64).ln();
    }
    let shift = bits - 63;
    let top: BigInt = x >> shift;
    (top.to_u64().unwrap() as f64).ln() + shift as f64 * std::f64::consts::LN_2
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: i64) -> BigInt {
        BigInt::from(v)
    }

    #[test]
    fn solve_catalan() {
        // binary trees: phi = 1 + 2x + x^2
        let y = solve_functional(&PhiSpec::dense_u64(&[1, 2, 1]), 5);
        assert_eq!(y.coeffs(), &[c(0), c(1), c(2), c(5), c(14), c(42)]);
    }

    #[test]
    fn solve_lacunary() {
        let y = solve_functional(&PhiSpec::BinomialPower { a: 2, b: 2, c: 1 }, 5);
        assert_eq!(y.coeffs(), &[c(0), c(1), c(0), c(2), c(0), c(8)]);
    }

    #[test]
    fn solve_trivial_phi() {
        let y = solve_functional(&PhiSpec::dense_u64(&[1]), 7);
        assert_eq!(y, TruncatedSeries::x(7));
    }

    #[test]
    fn functional_equation_holds_exactly() {
        for phi in [
            PhiSpec::dense_u64(&[1, 2, 1]),
            PhiSpec::BinomialPower { a: 1, b: 2, c: 2 },
            PhiSpec::BinomialPower { a: 3, b: 3, c: 1 },
        ] {
            let order = 16;
            let y = solve_functional(&phi, order);
            let rhs = phi.to_series(order).compose(&y).shift_up();
            assert_eq!(y, rhs);
        }
    }

    #[test]
    fn lagrange_matches_composition() {
        let phi = PhiSpec::dense_u64(&[1, 2, 1]);
        let g = TruncatedSeries::x(8);
        let r = lagrange_composition_coeff(&g, &phi, 4).unwrap();
        assert_eq!(r, Ratio::from(c(14)));

        // g = u^2, phi = 1 + x^2, n = 4 -> 2
        let g2 = TruncatedSeries::x(8).pow(2);
        let phi2 = PhiSpec::BinomialPower { a: 1, b: 2, c: 1 };
        assert_eq!(
            lagrange_composition_coeff(&g2, &phi2, 4).unwrap(),
            Ratio::from(c(2))
        );

        // g = u^m, n = m -> 1
        for m in 1..=4usize {
            let g = TruncatedSeries::x(8).pow(m);
            assert_eq!(
                lagrange_composition_coeff(&g, &phi, m).unwrap(),
                Ratio::from(c(1))
            );
        }
    }

    #[test]
    fn lagrange_reports_insufficient_order() {
        let g = TruncatedSeries::x(3);
        let phi = PhiSpec::dense_u64(&[1, 1]);
        match lagrange_composition_coeff(&g, &phi, 5) {
            Err(Error::InsufficientOrder { have: 3, need: 5 }) => {}
            other => panic!("expected InsufficientOrder, got {other:?}"),
        }
    }

    #[test]
    fn power_coeff_examples() {
        for (a, b) in [(1u64, 1u64), (2, 2), (3, 5)] {
            assert_eq!(lagrange_power_coeff(a, b, 1, 1), c(1));
        }
        assert_eq!(lagrange_power_coeff(2, 2, 1, 5), c(8));
        assert_eq!(lagrange_power_coeff(2, 2, 1, 4), c(0));
    }

    #[test]
    fn power_coeff_matches_series_oracle() {
        for a in 1..=3u64 {
            for b in 1..=3u64 {
                let phi = PhiSpec::BinomialPower {
                    a,
                    b: b as u32,
                    c: 1,
                };
                let y = solve_functional(&phi, 25);
                for m in 1..=4usize {
                    let ym = y.pow(m);
                    for n in 1..=25usize {
                        assert_eq!(
                            lagrange_power_coeff(a, b, m as u64, n as u64),
                            *ym.coeff(n),
                            "a={a} b={b} m={m} n={n}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn tree_family_examples() {
        assert_eq!(tree_family_coeff(3, 3), c(1));
        assert_eq!(tree_family_coeff(3, 5), c(6));
        assert_eq!(tree_family_coeff(3, 7), c(39));
        assert_eq!(tree_family_coeff(3, 4), c(0));
    }

    #[test]
    fn tree_family_matches_series_oracle() {
        for m in [3u64, 4] {
            let phi = PhiSpec::BinomialPower {
                a: 1,
                b: (m - 1) as u32,
                c: (m - 1) as u32,
            };
            let ym = solve_functional(&phi, 20).pow(m as usize);
            for n in m..=20 {
                assert_eq!(
                    tree_family_coeff(m, n),
                    *ym.coeff(n as usize),
                    "m={m} n={n}"
                );
            }
        }
    }

    #[test]
    fn singularity_values() {
        let s = x0_inverse(1, 2).unwrap();
        assert!((s.value - 2.0).abs() < 1e-14);
        let s = x0_inverse(2, 2).unwrap();
        assert!((s.value - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-13);
        assert!(matches!(x0_inverse(5, 1), Err(Error::NoSingularityRegime)));
        for a in 1..=4 {
            for b in 2..=5 {
                let s = x0_inverse(a, b).unwrap();
                assert!(s.value > 0.0);
                assert!((s.ln_inverse() - s.value.ln()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn asymptotic_estimate_accuracy() {
        let exact = lagrange_power_coeff(1, 2, 1, 41);
        let est = asymptotic_coeff_estimate(1, 2, 41).unwrap();
        let exact_f = exact.to_string().parse::<f64>().unwrap();
        assert!(
            (est - exact_f).abs() / exact_f < 0.15,
            "est {est} vs exact {exact_f}"
        );
        assert!(est > 0.0);
        assert_eq!(asymptotic_coeff_estimate(1, 2, 40).unwrap(), 0.0);
    }

    #[test]
    fn asymptotic_ratio_trends_to_one() {
        let mut prev_err = f64::INFINITY;
        for k in [5u64, 10, 15, 20, 25, 30] {
            let n = 2 * k + 1;
            let est = asymptotic_coeff_estimate(1, 2, n).unwrap();
            let exact = lagrange_power_coeff(1, 2, 1, n);
            let ratio = est / exact.to_string().parse::<f64>().unwrap();
            let err = (ratio - 1.0).abs();
            assert!(err < prev_err, "n={n}: {err} !< {prev_err}");
            prev_err = err;
        }
        assert!(prev_err < 0.05);
    }

    #[test]
    fn growth_rate_matches_singularity() {
        // the growth rate extracted from big-integer logs converges to
        // log(x0^{-1}); the subexponential n^{-3/2} factor decays too
        // slowly for log(c_n)/n alone, so difference consecutive nonzero
        // coefficients
        let n = 199u64;
        let c_lo = lagrange_power_coeff(1, 2, 1, n);
        let c_hi = lagrange_power_coeff(1, 2, 1, n + 2);
        let rate = (ln_bigint(&c_hi) - ln_bigint(&c_lo)) / 2.0;
        let target = x0_inverse(1, 2).unwrap().value.ln();
        assert!((rate - target).abs() < 1e-2, "{rate} vs {target}");
    }

    #[test]
    fn ln_bigint_accuracy() {
        let x = BigInt::from(10u32).pow(50);
        assert!((ln_bigint(&x) - 50.0 * 10f64.ln()).abs() < 1e-9);
        assert!((ln_bigint(&BigInt::from(7)) - 7f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn admissibility() {
        assert!(PhiSpec::dense_u64(&[1, 2, 1]).is_admissible());
        assert!(PhiSpec::BinomialPower { a: 1, b: 2, c: 1 }.is_admissible());
        assert!(!PhiSpec::dense_u64(&[1, 1]).is_admissible());
        assert!(!PhiSpec::dense_u64(&[0, 1, 1]).is_admissible());
    }
}
