//! Set families over `[n]`, selections, signatures, swap vectors, and exact
//! balance certificates.
//!
//! Subsets are bit masks with bit `i - 1` standing for element `i`. A
//! selection picks exactly one set from every complementary pair of
//! nontrivial subsets; it is encoded as a [`SignVector`] over the
//! representatives, the nonempty subsets of `[n - 1]`, indexed by mask.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kernel::{lp_max_margin, IntVector, LpProblem};
use crate::scalar::{format_rational, parse_rational};

/// Largest supported ground-set size.
pub const MAX_N: usize = 16;

pub(crate) fn check_n(n: usize) -> Result<()> {
    if n == 0 || n > MAX_N {
        return Err(invalid(format!("ground set size {n} outside 1..={MAX_N}")));
    }
    Ok(())
}

/// Number of complementary pairs of nontrivial subsets, `2^{n-1} - 1`.
pub fn pair_count(n: usize) -> usize {
    (1usize << (n - 1)) - 1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Subset {
    mask: u32,
    n: u8,
}

impl Subset {
    pub fn new(mask: u32, n: usize) -> Result<Self> {
        check_n(n)?;
        if (mask as u64) >> n != 0 {
            return Err(invalid(format!("mask {mask:#x} has bits beyond n = {n}")));
        }
        Ok(Subset { mask, n: n as u8 })
    }

    /// Builds a subset from 1-based elements.
    pub fn from_elements(elements: &[usize], n: usize) -> Result<Self> {
        check_n(n)?;
        let mut mask = 0u32;
        for &e in elements {
            if e == 0 || e > n {
                return Err(invalid(format!("element {e} outside 1..={n}")));
            }
            if mask & 1 << (e - 1) != 0 {
                return Err(invalid(format!("element {e} repeated")));
            }
            mask |= 1 << (e - 1);
        }
        Ok(Subset { mask, n: n as u8 })
    }

    pub fn mask(self) -> u32 {
        self.mask
    }

    pub fn n(self) -> usize {
        self.n as usize
    }

    pub fn full_mask(n: usize) -> u32 {
        ((1u64 << n) - 1) as u32
    }

    /// Whether the 1-based element `i` belongs to the subset.
    pub fn contains(self, i: usize) -> bool {
        self.mask >> (i - 1) & 1 == 1
    }

    pub fn elements(self) -> Vec<usize> {
        (1..=self.n()).filter(|&i| self.contains(i)).collect()
    }

    pub fn len(self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.mask == 0
    }

    pub fn complement(self) -> Subset {
        Subset { mask: !self.mask & Self::full_mask(self.n()), n: self.n }
    }

    /// `∅` or `[n]`.
    pub fn is_trivial(self) -> bool {
        self.mask == 0 || self.mask == Self::full_mask(self.n())
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.elements().iter().map(usize::to_string).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// A duplicate-free family of subsets of `[n]`, sorted by mask.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Family {
    n: usize,
    members: Vec<Subset>,
}

impl Family {
    pub fn new(n: usize, members: impl IntoIterator<Item = Subset>) -> Result<Self> {
        check_n(n)?;
        let mut members: Vec<Subset> = members.into_iter().collect();
        if let Some(bad) = members.iter().find(|s| s.n() != n) {
            return Err(invalid(format!("member {bad} is over n = {}, not {n}", bad.n())));
        }
        members.sort_unstable();
        if members.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("family has a repeated member"));
        }
        Ok(Family { n, members })
    }

    pub fn from_masks(n: usize, masks: impl IntoIterator<Item = u32>) -> Result<Self> {
        let members = masks.into_iter().map(|m| Subset::new(m, n)).collect::<Result<Vec<_>>>()?;
        Family::new(n, members)
    }

    pub fn empty(n: usize) -> Result<Self> {
        Family::new(n, [])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn members(&self) -> &[Subset] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, s: Subset) -> bool {
        self.members.binary_search(&s).is_ok()
    }

    pub fn to_json(&self) -> FamilyJson {
        FamilyJson { n: self.n, members: self.members.iter().map(|s| s.elements()).collect() }
    }

    pub fn from_json(json: &FamilyJson) -> Result<Self> {
        let members =
            json.members.iter().map(|elems| Subset::from_elements(elems, json.n)).collect::<Result<Vec<_>>>()?;
        Family::new(json.n, members)
    }

    pub fn parse_json(text: &str) -> Result<Self> {
        Family::from_json(&serde_json::from_str(text)?)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.members.iter().map(Subset::to_string).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// `{"n": 3, "members": [[1],[1,2],[1,3]]}`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyJson {
    pub n: usize,
    pub members: Vec<Vec<usize>>,
}

/// One sign per representative mask `1..=2^{n-1}-1`; `+1` selects the
/// representative, `-1` its complement in `[n]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignVector {
    n: usize,
    signs: Vec<i8>,
}

impl SignVector {
    pub fn new(n: usize, signs: Vec<i8>) -> Result<Self> {
        check_n(n)?;
        if n < 2 {
            return Err(invalid("sign vectors need n >= 2"));
        }
        if signs.len() != pair_count(n) {
            return Err(Error::DimensionMismatch { expected: pair_count(n), found: signs.len() });
        }
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(invalid("signs must be +1 or -1"));
        }
        Ok(SignVector { n, signs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    /// Sign of representative mask `m`.
    pub fn sign(&self, m: usize) -> i8 {
        self.signs[m - 1]
    }

    pub fn flipped(&self, m: usize) -> SignVector {
        let mut signs = self.signs.clone();
        signs[m - 1] = -signs[m - 1];
        SignVector { n: self.n, signs }
    }

    /// The member of the family chosen for representative `m`.
    pub fn chosen(&self, m: usize) -> Subset {
        let rep = Subset { mask: m as u32, n: self.n as u8 };
        if self.sign(m) > 0 {
            rep
        } else {
            rep.complement()
        }
    }
}

pub fn selection_to_family(sigma: &SignVector) -> Family {
    let members = (1..=pair_count(sigma.n)).map(|m| sigma.chosen(m));
    Family::new(sigma.n, members).expect("a selection never repeats a member")
}

/// Inverse of [`selection_to_family`]; `None` if `fam` is not a selection.
pub fn family_to_selection(fam: &Family) -> Option<SignVector> {
    let n = fam.n;
    if n < 2 || fam.len() != pair_count(n) {
        return None;
    }
    let high = 1u32 << (n - 1);
    let mut signs = vec![0i8; pair_count(n)];
    for s in fam.members() {
        if s.is_trivial() {
            return None;
        }
        let (rep, sign) = if s.mask & high == 0 { (s.mask, 1) } else { (s.complement().mask, -1) };
        let slot = &mut signs[rep as usize - 1];
        if *slot != 0 {
            return None;
        }
        *slot = sign;
    }
    Some(SignVector { n, signs })
}

/// Whether `fam` holds exactly one set of every complementary pair and
/// neither `∅` nor `[n]`.
pub fn is_selection(fam: &Family) -> bool {
    family_to_selection(fam).is_some()
}

/// Per-element membership counts.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Signature(pub Vec<u64>);

impl Signature {
    pub fn entries(&self) -> &[u64] {
        &self.0
    }

    /// All entries even or all entries odd.
    pub fn is_parity_uniform(&self) -> bool {
        self.0.iter().all(|e| e % 2 == 0) || self.0.iter().all(|e| e % 2 == 1)
    }

    pub fn to_csv_line(&self) -> String {
        let parts: Vec<String> = self.0.iter().map(u64::to_string).collect();
        parts.join(",")
    }
}

pub fn signature(fam: &Family) -> Signature {
    Signature((1..=fam.n).map(|i| fam.members.iter().filter(|s| s.contains(i)).count() as u64).collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SwapVector(pub Vec<i64>);

impl SwapVector {
    pub fn entries(&self) -> &[i64] {
        &self.0
    }

    pub fn is_constant(&self) -> bool {
        self.0.windows(2).all(|w| w[0] == w[1])
    }
}

/// `+1` on the elements of `f`, `-1` elsewhere.
pub fn swap_vector(f: Subset) -> Result<SwapVector> {
    if f.is_trivial() {
        return Err(invalid(format!("swap vector of trivial subset {f}")));
    }
    Ok(SwapVector((1..=f.n()).map(|i| if f.contains(i) { 1 } else { -1 }).collect()))
}

pub fn family_swap_sum(fam: &Family) -> Result<SwapVector> {
    let mut total = vec![0i64; fam.n];
    for &f in &fam.members {
        for (t, s) in total.iter_mut().zip(swap_vector(f)?.0) {
            *t += s;
        }
    }
    Ok(SwapVector(total))
}

/// Exact evidence for the balance status of a family.
#[derive(Debug, Clone, PartialEq)]
pub enum BalanceCertificate {
    /// Zero-sum `witness` with strictly positive sum over every member.
    Unbalanced { witness: Vec<BigRational> },
    /// Convex `weights`, one per member in family order, whose weighted sum
    /// of characteristic vectors is `constant` in every coordinate.
    Balanced { weights: Vec<BigRational>, constant: BigRational },
}

impl BalanceCertificate {
    pub fn is_balanced(&self) -> bool {
        matches!(self, BalanceCertificate::Balanced { .. })
    }

    /// Re-checks the certificate against `fam` in exact arithmetic.
    pub fn verify(&self, fam: &Family) -> bool {
        match self {
            BalanceCertificate::Unbalanced { witness } => {
                witness.len() == fam.n
                    && witness.iter().fold(BigRational::zero(), |a, x| a + x).is_zero()
                    && fam.members.iter().all(|f| {
                        (1..=fam.n)
                            .filter(|&i| f.contains(i))
                            .fold(BigRational::zero(), |a, i| a + &witness[i - 1])
                            .is_positive()
                    })
            }
            BalanceCertificate::Balanced { weights, constant } => {
                if weights.len() != fam.len() || weights.iter().any(Signed::is_negative) {
                    return false;
                }
                if !weights.iter().fold(BigRational::zero(), |a, x| a + x).is_one() {
                    return false;
                }
                (1..=fam.n).all(|i| {
                    let coord = fam
                        .members
                        .iter()
                        .zip(weights)
                        .filter(|(f, _)| f.contains(i))
                        .fold(BigRational::zero(), |a, (_, w)| a + w);
                    &coord == constant
                })
            }
        }
    }

    pub fn to_json(&self) -> CertificateJson {
        let fmt = |v: &[BigRational]| v.iter().map(format_rational).collect();
        match self {
            BalanceCertificate::Unbalanced { witness } => CertificateJson {
                schema: Some("1".into()),
                verdict: Verdict::Unbalanced,
                witness: Some(fmt(witness)),
                weights: None,
                constant: None,
            },
            BalanceCertificate::Balanced { weights, constant } => CertificateJson {
                schema: Some("1".into()),
                verdict: Verdict::Balanced,
                witness: None,
                weights: Some(fmt(weights)),
                constant: Some(format_rational(constant)),
            },
        }
    }

    pub fn from_json(json: &CertificateJson) -> Result<Self> {
        let parse = |v: &[String]| -> Result<Vec<BigRational>> {
            v.iter().map(|s| parse_rational(s).ok_or_else(|| invalid(format!("bad rational `{s}`")))).collect()
        };
        match json.verdict {
            Verdict::Unbalanced => {
                let witness = json.witness.as_deref().ok_or_else(|| invalid("missing witness"))?;
                Ok(BalanceCertificate::Unbalanced { witness: parse(witness)? })
            }
            Verdict::Balanced => {
                let weights = json.weights.as_deref().ok_or_else(|| invalid("missing weights"))?;
                let constant = json.constant.as_deref().ok_or_else(|| invalid("missing constant"))?;
                Ok(BalanceCertificate::Balanced {
                    weights: parse(weights)?,
                    constant: parse_rational(constant).ok_or_else(|| invalid("bad constant"))?,
                })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Balanced,
    Unbalanced,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant: Option<String>,
}

/// The separation LP for `fam`: maximize `t` with `sum_{i in F} v_i >= t` for
/// every member, `sum v = 0`, and `v` in the unit box.
pub fn separation_problem(fam: &Family) -> LpProblem<i64> {
    let n = fam.n;
    let mut lp = LpProblem::with_unit_box(n);
    for f in &fam.members {
        lp.push_margin(IntVector::from_mask(f.mask as u64, n)).expect("dimension n");
    }
    lp.push_zero(IntVector::new(vec![1; n])).expect("dimension n");
    lp
}

/// Decides balance status and returns an exact certificate.
///
/// The empty family is certified unbalanced by the zero vector. A family
/// containing `∅` or `[n]` is balanced by putting all weight on that member.
/// Otherwise the separation LP decides: a positive optimal margin yields the
/// witness, and at margin zero the row multipliers are balancing weights and
/// the multiplier of the zero-sum row is the constant.
pub fn balance_certify(fam: &Family) -> Result<BalanceCertificate> {
    let n = fam.n;
    if fam.is_empty() {
        return Ok(BalanceCertificate::Unbalanced { witness: vec![BigRational::zero(); n] });
    }
    if let Some(pos) = fam.members.iter().position(|s| s.is_trivial()) {
        let mut weights = vec![BigRational::zero(); fam.len()];
        weights[pos] = BigRational::one();
        let constant = if fam.members[pos].is_empty() { 0 } else { 1 };
        return Ok(BalanceCertificate::Balanced {
            weights,
            constant: BigRational::from_integer(BigInt::from(constant)),
        });
    }
    let lp = separation_problem(fam);
    let sol = lp_max_margin(&lp)?;
    let cert = if sol.is_strictly_feasible() {
        BalanceCertificate::Unbalanced { witness: sol.witness }
    } else {
        let mut duals = sol.duals;
        let constant = duals.pop().expect("zero-sum row");
        BalanceCertificate::Balanced { weights: duals, constant }
    };
    if !cert.verify(fam) {
        return Err(Error::Internal(format!("certificate for {fam} failed re-verification")));
    }
    Ok(cert)
}
