//! Lower and upper bounds on the number `E_n` of maximal unbalanced families,
//! evaluated exactly and checked against known counts.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Published values of `E_n` for `n = 1..=9`.
pub const KNOWN_COUNTS: [(usize, u64); 9] =
    [(1, 0), (2, 2), (3, 6), (4, 32), (5, 370), (6, 11_292), (7, 1_066_044), (8, 347_326_352), (9, 419_172_756_930)];

pub fn known_count(n: usize) -> Option<BigInt> {
    KNOWN_COUNTS.iter().find(|(k, _)| *k == n).map(|(_, e)| BigInt::from(*e))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundsTriple {
    pub n: usize,
    /// `2^{(n-1)(n-2)/2}`
    pub lower_power: BigInt,
    /// `prod_{i=0}^{n-2} (2^i + 1)`
    pub lower_product: BigInt,
    /// `2^{(n-1)^2}`
    pub upper: BigInt,
}

pub fn bounds_for(n: usize) -> Result<BoundsTriple> {
    if n == 0 {
        return Err(invalid("bounds need n >= 1"));
    }
    let one = BigInt::one();
    let lower_product = (0..n - 1).map(|i| (&one << i) + 1u32).product();
    Ok(BoundsTriple {
        n,
        lower_power: &one << ((n - 1) * n.saturating_sub(2) / 2),
        lower_product,
        upper: &one << ((n - 1) * (n - 1)),
    })
}

/// `lower_power < e < upper` and `lower_product <= e`.
pub fn sandwich_check(n: usize, e: &BigInt) -> Result<bool> {
    let b = bounds_for(n)?;
    Ok(&b.lower_power < e && e < &b.upper && &b.lower_product <= e)
}

/// `2^{(n-1)^2}`: the number of length-`n` vectors with entries below
/// `2^{n-1}`, divided by `2^{n-1}` for the common-parity constraint.
pub fn signature_space_bound(n: usize) -> Result<BigInt> {
    if n < 2 {
        return Err(invalid("the signature space bound needs n >= 2"));
    }
    Ok(BigInt::one() << ((n - 1) * (n - 1)))
}

fn factorial(n: usize) -> BigInt {
    (1..=n).map(BigInt::from).product()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorialRatioReport {
    /// `(n, E_n / n!)` over the table.
    pub ratios: Vec<(usize, BigRational)>,
    /// The ratio strictly increases from `n = 6` up to the limit.
    pub increasing_from_six: bool,
}

/// Exact `E_n / n!` for the tabulated `n <= limit`.
pub fn factorial_ratio_check(limit: usize) -> Result<FactorialRatioReport> {
    if limit > 9 {
        return Err(invalid("known counts stop at n = 9"));
    }
    let ratios: Vec<(usize, BigRational)> =
        (1..=limit).map(|n| (n, BigRational::new(known_count(n).expect("tabulated"), factorial(n)))).collect();
    let increasing_from_six =
        ratios.iter().filter(|(n, _)| *n >= 6).collect::<Vec<_>>().windows(2).all(|w| w[0].1 < w[1].1);
    Ok(FactorialRatioReport { ratios, increasing_from_six })
}

/// `{"schema":"1","n":4,"lower_power":"8","lower_product":"30","upper":"512","E":"32","sandwich":true}`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundsJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub n: usize,
    pub lower_power: String,
    pub lower_product: String,
    pub upper: String,
    #[serde(rename = "E", default, skip_serializing_if = "Option::is_none")]
    pub e: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sandwich: Option<bool>,
}

/// Bounds report for `n`, with the sandwich verdict when `E_n` is known.
pub fn bounds_report(n: usize, e: Option<&BigInt>) -> Result<BoundsJson> {
    let b = bounds_for(n)?;
    let sandwich = e.map(|e| sandwich_check(n, e)).transpose()?;
    Ok(BoundsJson {
        schema: Some("1".into()),
        n,
        lower_power: b.lower_power.to_string(),
        lower_product: b.lower_product.to_string(),
        upper: b.upper.to_string(),
        e: e.map(BigInt::to_string),
        sandwich,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: u64) -> BigInt {
        BigInt::from(v)
    }

    #[test]
    fn bounds_examples() {
        let b = bounds_for(4).unwrap();
        assert_eq!((b.lower_power, b.lower_product, b.upper), (big(8), big(30), big(512)));
        let b = bounds_for(5).unwrap();
        assert_eq!((b.lower_power, b.lower_product, b.upper), (big(64), big(270), big(65536)));
        let b = bounds_for(2).unwrap();
        assert_eq!((b.lower_power, b.lower_product, b.upper), (big(1), big(2), big(2)));
        assert!(bounds_for(0).is_err());
    }

    #[test]
    fn sandwich_examples() {
        assert!(sandwich_check(4, &big(32)).unwrap());
        assert!(sandwich_check(6, &big(11292)).unwrap());
        assert_eq!(bounds_for(6).unwrap().lower_product, big(4590));
        assert!(sandwich_check(9, &big(419_172_756_930)).unwrap());
        assert!(!sandwich_check(4, &big(29)).unwrap());
        // E_1 = 0 sits below 2^0
        assert!(!sandwich_check(1, &big(0)).unwrap());
    }

    #[test]
    fn signature_space() {
        assert_eq!(signature_space_bound(2).unwrap(), big(2));
        assert_eq!(signature_space_bound(3).unwrap(), big(16));
        assert_eq!(signature_space_bound(4).unwrap(), big(512));
        assert!(signature_space_bound(1).is_err());
    }

    #[test]
    fn factorial_ratios() {
        let r = factorial_ratio_check(9).unwrap();
        assert!(r.increasing_from_six);
        let at = |n: usize| r.ratios[n - 1].1.clone();
        assert_eq!(at(6), BigRational::new(big(11292), big(720)));
        assert_eq!(at(6), BigRational::new(big(941), big(60)));
        assert!(at(7) > at(6));
        assert!(at(9) > at(8));
        assert!(factorial_ratio_check(10).is_err());
    }

    #[test]
    fn report_json() {
        let r = bounds_report(4, Some(&big(32))).unwrap();
        assert_eq!(
            serde_json::to_string(&r).unwrap(),
            r#"{"schema":"1","n":4,"lower_power":"8","lower_product":"30","upper":"512","E":"32","sandwich":true}"#
        );
    }
}
