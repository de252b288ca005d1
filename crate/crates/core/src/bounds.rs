//! Closed-form bounds on the number of cops.
//!
//! Everything that telescopes is computed with exact big rationals. Floats
//! only appear for the product constant `P`, logarithms and exponentials.

use std::fmt;
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

/// Terms used for `P` when sizing budgets.
pub const P_TERMS: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BoundsError {
    #[error("ground set size must be at least {min}, got {n}")]
    TooSmall { n: u32, min: u32 },
    #[error("product runs to {upto} but only {max} rounds exist for n = {n}")]
    BeyondMiddle { n: u32, upto: u32, max: u32 },
    #[error("inflated factor {i} is not positive for n = {n} (value {value})")]
    NonPositiveFactor { n: u32, i: u32, value: ExactRational },
}

/// Reduced rational with arbitrary-precision parts. Displays as `p/q`, or
/// `p` when the denominator is 1.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactRational(pub BigRational);

impl ExactRational {
    pub fn from_integer(v: impl Into<BigInt>) -> Self {
        ExactRational(BigRational::from_integer(v.into()))
    }

    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Self {
        ExactRational(BigRational::new(numer.into(), denom.into()))
    }

    pub fn one() -> Self {
        ExactRational(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn ceil(&self) -> BigInt {
        self.0.ceil().to_integer()
    }

    /// Ceiling as a `u32`, saturating.
    pub fn ceil_u32(&self) -> u32 {
        self.ceil().to_u32().unwrap_or(u32::MAX)
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }
}

impl fmt::Display for ExactRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl Serialize for ExactRational {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

fn half(n: u32) -> u32 {
    n / 2
}

/// Greedy-robber lower bound: `2^m` for `n = 2m`,
/// `C(2m+1, m+1) / 2^m` for `n = 2m+1`.
pub fn lower_bound(n: u32) -> ExactRational {
    let m = half(n);
    let pow = BigInt::one() << m;
    if n % 2 == 0 {
        ExactRational(BigRational::from_integer(pow))
    } else {
        let c = BigInt::from(binomial(2 * m as u64 + 1, m as u64 + 1));
        ExactRational(BigRational::new(c, pow))
    }
}

fn check_upto(n: u32, upto: u32) -> Result<(), BoundsError> {
    let max = half(n);
    if upto > max {
        return Err(BoundsError::BeyondMiddle { n, upto, max });
    }
    Ok(())
}

/// `prod_{i=1}^{upto} (1 - i/(n-i+1))`, the fraction of cops a greedy
/// robber lets through.
pub fn survival_product(n: u32, upto: u32) -> Result<ExactRational, BoundsError> {
    check_upto(n, upto)?;
    let mut acc = BigRational::one();
    for i in 1..=upto as i64 {
        let d = n as i64 - i + 1;
        acc *= BigRational::new(BigInt::from(d - i), BigInt::from(d));
    }
    Ok(ExactRational(acc))
}

/// `prod_{i=1}^{upto} (1 - (1 + 1/i^3) i/(n-i+1))`. Fails on the first
/// factor that is not positive.
pub fn inflated_survival_product(n: u32, upto: u32) -> Result<ExactRational, BoundsError> {
    check_upto(n, upto)?;
    let mut acc = BigRational::one();
    for i in 1..=upto as i64 {
        // 1 - (i^3 + 1) / (i^2 (n - i + 1))
        let denom = i * i * (n as i64 - i + 1);
        let factor = BigRational::new(BigInt::from(denom - (i * i * i + 1)), BigInt::from(denom));
        if factor <= BigRational::zero() {
            return Err(BoundsError::NonPositiveFactor {
                n,
                i: i as u32,
                value: ExactRational(factor),
            });
        }
        acc *= factor;
    }
    Ok(ExactRational(acc))
}

/// Partial product `prod_{i=1}^{terms} (1 + 1/i^2)`. The infinite product is
/// `sinh(pi)/pi = 3.676077...`; a million terms falls short by about
/// `P / 10^6`.
pub fn p_constant(terms: u64) -> f64 {
    if terms == P_TERMS {
        static CACHED: OnceLock<f64> = OnceLock::new();
        return *CACHED.get_or_init(|| p_partial(P_TERMS));
    }
    p_partial(terms)
}

fn p_partial(terms: u64) -> f64 {
    (1..=terms)
        .map(|i| {
            let x = i as f64;
            (1.0 / (x * x)).ln_1p()
        })
        .sum::<f64>()
        .exp()
}

/// Constant `c` used by the randomized strategy's budget.
pub fn default_budget_constant(n: u32) -> f64 {
    let p = p_constant(P_TERMS);
    if n % 2 == 0 {
        210.0 * p
    } else {
        35.0 * p / 3.0
    }
}

/// Cops the randomized strategy is proven to need: `c ln n 2^m` for
/// `n = 2m`, `c ln n 2^(m+1) / sqrt(n)` for `n = 2m+1`.
pub fn recommended_cop_count(n: u32, c_override: Option<f64>) -> Result<u64, BoundsError> {
    if n < 2 {
        return Err(BoundsError::TooSmall { n, min: 2 });
    }
    let c = c_override.unwrap_or_else(|| default_budget_constant(n));
    let m = half(n) as i32;
    let nf = n as f64;
    let raw = if n % 2 == 0 {
        c * nf.ln() * 2f64.powi(m)
    } else {
        c * nf.ln() * 2f64.powi(m + 1) / nf.sqrt()
    };
    Ok(raw.ceil() as u64)
}

/// Per-round quantities from the concentration argument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RoundDiagnosticsParams {
    pub k: u32,
    pub epsilon: f64,
    pub p: f64,
    pub mu: f64,
}

impl RoundDiagnosticsParams {
    pub fn new(n: u32, k: u32, survivors: u64) -> Self {
        let kf = k as f64;
        let p = kf / (n as f64 - kf + 1.0);
        RoundDiagnosticsParams {
            k,
            epsilon: 1.0 / (kf * kf * kf),
            p,
            mu: survivors as f64 * p,
        }
    }

    /// Evaded fraction above which the round counts as bad.
    pub fn threshold(&self) -> f64 {
        (1.0 + self.epsilon) * self.p
    }
}

/// Union bound on the chance that some element evades more than the
/// inflated fraction: `2 (n-k+1) exp(-eps^2 mu / 3)`. Not clamped.
pub fn chernoff_bk_bound(n: u32, k: u32, survivors: u64) -> f64 {
    let d = RoundDiagnosticsParams::new(n, k, survivors);
    2.0 * (n as f64 - k as f64 + 1.0) * (-d.epsilon * d.epsilon * d.mu / 3.0).exp()
}

/// Size of the middle level, `C(n, ceil(n/2))`: enough cops to sit on every
/// set the robber can end on.
pub fn trivial_upper_bound(n: u32) -> BigUint {
    binomial(n as u64, n.div_ceil(2) as u64)
}

fn display<T: fmt::Display, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub n: u32,
    pub lower: ExactRational,
    pub lower_ceil: u32,
    #[serde(serialize_with = "display")]
    pub trivial_upper: BigUint,
    /// Randomized-strategy budget, absent for `n < 2`.
    pub recommended: Option<u64>,
    pub budget_constant: f64,
    pub p_constant: f64,
    pub p_terms: u64,
}

impl BoundReport {
    pub fn new(n: u32, c_override: Option<f64>) -> Self {
        let lower = lower_bound(n);
        let recommended = recommended_cop_count(n, c_override).ok();
        if let Some(r) = recommended {
            if c_override.is_none() {
                assert!(
                    BigInt::from(r) >= lower.ceil(),
                    "budget {r} below the lower bound for n = {n}"
                );
            }
        }
        BoundReport {
            n,
            lower_ceil: lower.ceil_u32(),
            lower,
            trivial_upper: trivial_upper_bound(n),
            recommended,
            budget_constant: c_override.unwrap_or_else(|| default_budget_constant(n)),
            p_constant: p_constant(P_TERMS),
            p_terms: P_TERMS,
        }
    }

    pub fn parity(&self) -> &'static str {
        if self.n % 2 == 0 {
            "even"
        } else {
            "odd"
        }
    }
}

impl fmt::Display for BoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n              {} ({})", self.n, self.parity())?;
        writeln!(f, "lower bound    {} (ceil {})", self.lower, self.lower_ceil)?;
        writeln!(f, "middle level   {}", self.trivial_upper)?;
        match self.recommended {
            Some(r) => writeln!(f, "recommended    {r} (c = {:.4})", self.budget_constant)?,
            None => writeln!(f, "recommended    -")?,
        }
        write!(f, "P              {:.6} ({} terms)", self.p_constant, self.p_terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(p: i64, d: i64) -> ExactRational {
        ExactRational::new(p, d)
    }

    #[test]
    fn lower_bounds() {
        assert_eq!(lower_bound(1), q(1, 1));
        assert_eq!(lower_bound(2), q(2, 1));
        assert_eq!(lower_bound(4), q(4, 1));
        assert_eq!(lower_bound(5), q(5, 2));
        assert_eq!(lower_bound(6), q(8, 1));
        assert_eq!(lower_bound(7), q(35, 8));
        assert_eq!(lower_bound(5).to_string(), "5/2");
    }

    #[test]
    fn survival_examples() {
        assert_eq!(survival_product(4, 2).unwrap(), q(1, 4));
        assert_eq!(survival_product(5, 2).unwrap(), q(2, 5));
        assert_eq!(survival_product(9, 0).unwrap(), q(1, 1));
        assert!(matches!(survival_product(4, 3), Err(BoundsError::BeyondMiddle { .. })));
    }

    #[test]
    fn telescoping_and_reciprocity() {
        for m in 1..=20u32 {
            let even = survival_product(2 * m, m).unwrap();
            assert_eq!(even, ExactRational(BigRational::new(BigInt::one(), BigInt::one() << m)));
            let odd = survival_product(2 * m + 1, m).unwrap();
            let c = BigInt::from(binomial(2 * m as u64 + 1, m as u64 + 1));
            assert_eq!(odd, ExactRational(BigRational::new(BigInt::one() << m, c)));
            for n in [2 * m, 2 * m + 1] {
                let prod = lower_bound(n).0 * survival_product(n, m).unwrap().0;
                assert!(prod.is_one());
            }
        }
    }

    #[test]
    fn inflated_examples() {
        assert_eq!(inflated_survival_product(10, 1).unwrap(), q(4, 5));
        assert_eq!(inflated_survival_product(20, 0).unwrap(), q(1, 1));
        assert!(matches!(
            inflated_survival_product(2, 1),
            Err(BoundsError::NonPositiveFactor { i: 1, .. })
        ));
        assert_eq!(inflated_survival_product(3, 1).unwrap(), q(1, 3));
    }

    #[test]
    fn inflation_ratio_is_bounded() {
        for n in 4..=40u32 {
            let m = n / 2;
            // the last factor may vanish; compare as far as the product exists
            let upto = (0..=m)
                .rev()
                .find(|&u| inflated_survival_product(n, u).is_ok())
                .unwrap();
            let ratio = survival_product(n, upto).unwrap().0 / inflated_survival_product(n, upto).unwrap().0;
            let mut cap = BigRational::one();
            for i in 1..=upto as i64 {
                cap *= BigRational::new(BigInt::from(i * i + 1), BigInt::from(i * i));
            }
            assert!(ratio <= cap, "n={n}");
        }
    }

    #[test]
    fn p_values() {
        assert_eq!(p_constant(1), 2.0);
        assert!((p_constant(2) - 2.5).abs() < 1e-12);
        let p = p_constant(P_TERMS);
        assert!((p - 3.67607).abs() < 5e-6, "{p}");
        assert!(p < std::f64::consts::PI.sinh() / std::f64::consts::PI);
        let mut last = 0.0;
        for t in [1, 2, 5, 10, 100, 1000, 100_000, P_TERMS] {
            let v = p_constant(t);
            assert!(v >= last && v < 4.0);
            last = v;
        }
    }

    #[test]
    fn recommended_counts() {
        let r20 = recommended_cop_count(20, None).unwrap();
        let expect = 210.0 * p_constant(P_TERMS) * 20f64.ln() * 1024.0;
        assert_eq!(r20, expect.ceil() as u64);
        assert!((2_368_000..2_368_300).contains(&r20), "{r20}");
        assert_eq!(recommended_cop_count(4, Some(1.0)).unwrap(), 6);
        for n in (4..=40).step_by(2) {
            assert!(recommended_cop_count(n + 2, None).unwrap() > recommended_cop_count(n, None).unwrap());
        }
        assert!(recommended_cop_count(1, None).is_err());
    }

    #[test]
    fn chernoff_examples() {
        assert_eq!(chernoff_bk_bound(10, 1, 0), 20.0);
        let v = chernoff_bk_bound(10, 1, 100);
        assert!((v - 20.0 * (-10.0f64 / 3.0).exp()).abs() < 1e-12);
        assert!(chernoff_bk_bound(10, 2, 500) < chernoff_bk_bound(10, 2, 400));
    }

    #[test]
    fn middle_level() {
        assert_eq!(trivial_upper_bound(4), BigUint::from(6u32));
        assert_eq!(trivial_upper_bound(5), BigUint::from(10u32));
        let n = 50.0f64;
        let ratio = trivial_upper_bound(50).to_f64().unwrap() * (std::f64::consts::PI * n / 2.0).sqrt()
            / 2f64.powi(50);
        assert!((ratio - 1.0).abs() < 0.02, "{ratio}");
    }

    #[test]
    fn report_orders_bounds() {
        for n in 1..=40 {
            let r = BoundReport::new(n, None);
            assert!(r.lower.0 <= BigRational::from_integer(BigInt::from(r.trivial_upper.clone())));
        }
    }

    proptest! {
        #[test]
        fn chernoff_monotone(n in 2u32..60, k_frac in 0.0f64..1.0, a in 0u64..2000, b in 1u64..1000) {
            let k = 1 + ((n / 2 - 1) as f64 * k_frac) as u32;
            prop_assert!(chernoff_bk_bound(n, k, a + b) < chernoff_bk_bound(n, k, a));
        }

        #[test]
        fn survival_in_unit_interval(n in 1u32..64, frac in 0.0f64..=1.0) {
            let upto = ((n / 2) as f64 * frac) as u32;
            let s = survival_product(n, upto).unwrap().0;
            prop_assert!(s > BigRational::zero() && s <= BigRational::one());
        }
    }
}
