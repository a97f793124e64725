//! Paired-comparison and agreement statistics.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("no items to rate")]
    NoItems,
    #[error("item {item} has {found} ratings, expected {expected}")]
    UnequalRaters {
        item: usize,
        expected: u32,
        found: u32,
    },
    #[error("item {item} has {found} categories, expected {expected}")]
    RaggedCategories {
        item: usize,
        expected: usize,
        found: usize,
    },
    #[error("at least two raters per item are required, got {0}")]
    TooFewRaters(u32),
}

/// Complementary error function.
///
/// Chebyshev fit from Numerical Recipes (`erfcc`); fractional error below
/// 1.2e-7 everywhere, so absolute error below that on `[0, 1]`.
pub fn erfc<T: Scalar>(x: T) -> T {
    const COEFFS: [f64; 10] = [
        -1.265_512_23,
        1.000_023_68,
        0.374_091_96,
        0.096_784_18,
        -0.186_288_06,
        0.278_868_07,
        -1.135_203_98,
        1.488_515_87,
        -0.822_152_23,
        0.170_872_77,
    ];
    let z = x.abs();
    let t = T::one() / (T::one() + T::lit(0.5) * z);
    let poly = COEFFS
        .iter()
        .rev()
        .fold(T::zero(), |acc, &c| T::lit(c) + t * acc);
    let ans = t * (-z * z + poly).exp();
    if x >= T::zero() {
        ans
    } else {
        T::lit(2.0) - ans
    }
}

/// Upper tail of the χ² distribution with one degree of freedom,
/// `P(X > x) = erfc(√(x/2))`, clamped to `[0, 1]`.
pub fn chi_square_sf<T: Scalar>(x: T) -> T {
    if x <= T::zero() {
        return T::one();
    }
    erfc((x / T::lit(2.0)).sqrt()).min(T::one()).max(T::zero())
}

/// Joint outcomes of two models over the same prediction keys.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyTable2x2 {
    /// Both succeed.
    pub n_ss: u64,
    /// First succeeds, second fails.
    pub n_sf: u64,
    /// First fails, second succeeds.
    pub n_fs: u64,
    /// Both fail.
    pub n_ff: u64,
}

impl ContingencyTable2x2 {
    pub fn new(n_ss: u64, n_sf: u64, n_fs: u64, n_ff: u64) -> Self {
        Self {
            n_ss,
            n_sf,
            n_fs,
            n_ff,
        }
    }

    pub fn total(&self) -> u64 {
        self.n_ss + self.n_sf + self.n_fs + self.n_ff
    }

    /// The same comparison with the models swapped.
    pub fn transposed(&self) -> Self {
        Self {
            n_sf: self.n_fs,
            n_fs: self.n_sf,
            ..*self
        }
    }

    pub fn first_accuracy(&self) -> f64 {
        100.0 * (self.n_ss + self.n_sf) as f64 / self.total() as f64
    }

    pub fn second_accuracy(&self) -> f64 {
        100.0 * (self.n_ss + self.n_fs) as f64 / self.total() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McNemarResult {
    pub chi2: f64,
    pub p: f64,
    /// No discordant pairs; chi2 is 0 by convention.
    pub degenerate: bool,
}

/// Continuity-corrected McNemar statistic `(|b − c| − 1)² / (b + c)`.
pub fn mcnemar(t: &ContingencyTable2x2) -> McNemarResult {
    let discordant = t.n_sf + t.n_fs;
    if discordant == 0 {
        return McNemarResult {
            chi2: 0.0,
            p: 1.0,
            degenerate: true,
        };
    }
    let diff = t.n_sf.abs_diff(t.n_fs) as f64 - 1.0;
    let chi2 = diff * diff / discordant as f64;
    McNemarResult {
        chi2,
        p: chi_square_sf(chi2),
        degenerate: false,
    }
}

/// Exact two-sided binomial McNemar p-value. Not the variant used for the
/// reported comparison tables; offered for small discordant counts.
pub fn mcnemar_exact_p(t: &ContingencyTable2x2) -> f64 {
    let n = t.n_sf + t.n_fs;
    if n == 0 {
        return 1.0;
    }
    let k = t.n_sf.min(t.n_fs);
    // log C(n, i) accumulated incrementally
    let ln_half_n = n as f64 * 0.5f64.ln();
    let mut ln_c = 0.0f64;
    let mut tail = 0.0f64;
    for i in 0..=k {
        if i > 0 {
            ln_c += ((n - i + 1) as f64).ln() - (i as f64).ln();
        }
        tail += (ln_c + ln_half_n).exp();
    }
    (2.0 * tail).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FleissKappa {
    pub kappa: f64,
    pub observed: f64,
    pub expected: f64,
    /// Expected agreement is 1 (a single category everywhere); kappa is 1
    /// by convention.
    pub degenerate: bool,
}

/// Fleiss' kappa over an items × categories matrix of rater counts.
pub fn fleiss_kappa(counts: &[Vec<u32>]) -> Result<FleissKappa, StatsError> {
    let first = counts.first().ok_or(StatsError::NoItems)?;
    let k = first.len();
    let n: u32 = first.iter().sum();
    if n < 2 {
        return Err(StatsError::TooFewRaters(n));
    }
    for (item, row) in counts.iter().enumerate() {
        if row.len() != k {
            return Err(StatsError::RaggedCategories {
                item,
                expected: k,
                found: row.len(),
            });
        }
        let found = row.iter().sum();
        if found != n {
            return Err(StatsError::UnequalRaters {
                item,
                expected: n,
                found,
            });
        }
    }
    let items = counts.len() as f64;
    let nf = n as f64;
    let observed = counts
        .iter()
        .map(|row| {
            let sq: f64 = row.iter().map(|&c| (c as f64) * (c as f64)).sum();
            (sq - nf) / (nf * (nf - 1.0))
        })
        .sum::<f64>()
        / items;
    let expected: f64 = (0..k)
        .map(|j| {
            let p = counts.iter().map(|row| row[j] as f64).sum::<f64>() / (items * nf);
            p * p
        })
        .sum();
    if (1.0 - expected).abs() < 1e-15 {
        return Ok(FleissKappa {
            kappa: 1.0,
            observed,
            expected,
            degenerate: true,
        });
    }
    Ok(FleissKappa {
        kappa: (observed - expected) / (1.0 - expected),
        observed,
        expected,
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Composite Simpson rule for `∫_a^b f`.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let x = a + i as f64 * h;
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
        }
        s * h / 3.0
    }

    fn erfc_by_quadrature(x: f64) -> f64 {
        1.0 - 2.0 / std::f64::consts::PI.sqrt() * simpson(|t| (-t * t).exp(), 0.0, x, 20_000)
    }

    #[test]
    fn erfc_matches_quadrature() {
        for i in 0..=60 {
            let x = i as f64 * 0.1;
            let want = erfc_by_quadrature(x);
            assert!(
                (erfc(x) - want).abs() < 2e-7,
                "x={x}: {} vs {want}",
                erfc(x)
            );
        }
        assert!((erfc(-0.5) - (2.0 - erfc_by_quadrature(0.5))).abs() < 2e-7);
    }

    #[test]
    fn chi_square_sf_examples() {
        assert_eq!(chi_square_sf(0.0), 1.0);
        assert!((chi_square_sf(0.0333_f64) - 0.8551).abs() < 5e-4);
        assert!((chi_square_sf(3.841_f64) - 0.05).abs() < 5e-4);
        assert!(chi_square_sf(48.658) < 1e-4);
        assert!((chi_square_sf(3.841_f32) - 0.05).abs() < 5e-4);
    }

    #[test]
    fn mcnemar_examples() {
        let r = mcnemar(&ContingencyTable2x2::new(34, 71, 8, 15));
        assert!((r.chi2 - 48.658).abs() < 1e-3);
        assert!(r.p < 1e-4);
        let r = mcnemar(&ContingencyTable2x2::new(89, 15, 15, 9));
        assert!((r.chi2 - 0.033).abs() < 1e-3);
        assert!((r.p - 0.8551).abs() < 5e-4);
        let r = mcnemar(&ContingencyTable2x2::new(34, 70, 8, 16));
        assert!((r.chi2 - 47.705).abs() < 1e-3);
        let r = mcnemar(&ContingencyTable2x2::new(10, 0, 0, 3));
        assert!(r.degenerate && r.chi2 == 0.0 && r.p == 1.0);
    }

    #[test]
    fn mcnemar_is_symmetric() {
        for (b, c) in [(71, 8), (1, 0), (15, 16), (3, 40)] {
            let t = ContingencyTable2x2::new(5, b, c, 2);
            assert_eq!(mcnemar(&t), mcnemar(&t.transposed()));
        }
    }

    #[test]
    fn exact_mcnemar() {
        // b=1, c=0: 2 * 0.5 = 1
        assert_eq!(mcnemar_exact_p(&ContingencyTable2x2::new(0, 1, 0, 0)), 1.0);
        // b=5, c=0: 2 * 0.5^5
        let p = mcnemar_exact_p(&ContingencyTable2x2::new(0, 5, 0, 0));
        assert!((p - 0.0625).abs() < 1e-12);
        // b=2, c=8: 2 * (1 + 10 + 45) / 1024
        let p = mcnemar_exact_p(&ContingencyTable2x2::new(0, 2, 8, 0));
        assert!((p - 112.0 / 1024.0).abs() < 1e-12);
    }

    #[test]
    fn kappa_edge_cases() {
        let perfect = vec![vec![3, 0], vec![0, 3], vec![3, 0]];
        assert_eq!(fleiss_kappa(&perfect).unwrap().kappa, 1.0);
        let one_category = vec![vec![4, 0]; 5];
        let k = fleiss_kappa(&one_category).unwrap();
        assert!(k.degenerate && k.kappa == 1.0);
        let opposed = vec![vec![1, 1], vec![1, 1]];
        let k = fleiss_kappa(&opposed).unwrap();
        assert!((k.kappa + 1.0).abs() < 1e-15);
        assert!(matches!(fleiss_kappa(&[]), Err(StatsError::NoItems)));
        assert!(matches!(
            fleiss_kappa(&[vec![2, 1], vec![1, 1]]),
            Err(StatsError::UnequalRaters { item: 1, .. })
        ));
        assert!(matches!(
            fleiss_kappa(&[vec![1, 0]]),
            Err(StatsError::TooFewRaters(1))
        ));
    }
}
