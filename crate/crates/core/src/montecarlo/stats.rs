use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;
/// One-sided 95% normal quantile, used when every trial had the same result.
pub const Z_95_ONE_SIDED: f64 = 1.644_853_626_951_472_2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub low: f64,
    pub high: f64,
    pub one_sided: bool,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.low <= x && x <= self.high
    }
}

/// 95% Wilson score interval for `wins` out of `trials`. With 0 or all wins
/// the interval is one-sided at 95%.
pub fn wilson_interval(wins: u64, trials: u64) -> Interval {
    assert!(trials > 0 && wins <= trials);
    let n = trials as f64;
    if wins == 0 || wins == trials {
        let z2 = Z_95_ONE_SIDED * Z_95_ONE_SIDED;
        return if wins == 0 {
            Interval {
                low: 0.0,
                high: z2 / (n + z2),
                one_sided: true,
            }
        } else {
            Interval {
                low: n / (n + z2),
                high: 1.0,
                one_sided: true,
            }
        };
    }
    let p = wins as f64 / n;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z_95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    Interval {
        low: (center - half).max(0.0),
        high: (center + half).min(1.0),
        one_sided: false,
    }
}

/// Standard error of a proportion `p` estimated from `n` Bernoulli draws.
pub fn binomial_se(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: u64,
    pub p_value: f64,
}

/// Pearson goodness-of-fit against the uniform distribution on
/// `counts.len()` cells.
pub fn chi_square_uniform(counts: &[u64]) -> ChiSquareTest {
    assert!(counts.len() >= 2, "need at least two cells");
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    let statistic = counts
        .iter()
        .map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum::<f64>();
    let dof = counts.len() as u64 - 1;
    let dist = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
    ChiSquareTest {
        statistic,
        dof,
        p_value: dist.sf(statistic),
    }
}
