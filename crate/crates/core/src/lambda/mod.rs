//! The mod 2 lambda algebra.
//!
//! A monomial `l_{i1} ... l_{is}` has homological degree `s` and weight
//! `i1 + ... + is`; its internal degree is `t = s + weight`, so its stem is
//! the weight.

mod basis;
mod normal;

use std::fmt;

use smallvec::SmallVec;

pub use basis::{admissible_basis, admissible_count};
pub use normal::{adem_normalize, adem_pair, delta, delta_monomial, left_mul, multiply, normalize_word, sq0, DEFAULT_FUEL};

/// Bumped whenever normal forms could change; part of cache fingerprints.
pub const NORMALIZATION_VERSION: u32 = 1;

pub type Indices = SmallVec<[u32; 8]>;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct LambdaMonomial(pub Indices);

impl LambdaMonomial {
    pub fn unit() -> Self {
        LambdaMonomial(Indices::new())
    }

    pub fn new(idx: &[u32]) -> Self {
        LambdaMonomial(Indices::from_slice(idx))
    }

    pub fn generator(i: u32) -> Self {
        Self::new(&[i])
    }

    pub fn indices(&self) -> &[u32] {
        &self.0
    }

    pub fn s(&self) -> u32 {
        self.0.len() as u32
    }

    pub fn weight(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn t(&self) -> u32 {
        self.s() + self.weight()
    }

    pub fn stem(&self) -> u32 {
        self.weight()
    }

    pub fn first(&self) -> Option<u32> {
        self.0.first().copied()
    }

    pub fn is_unit(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_admissible(&self) -> bool {
        self.0.windows(2).all(|w| 2 * w[0] >= w[1])
    }

    pub fn concat(&self, other: &LambdaMonomial) -> LambdaMonomial {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        LambdaMonomial(v)
    }

    pub fn tail(&self) -> LambdaMonomial {
        LambdaMonomial(Indices::from_slice(&self.0[1..]))
    }
}

impl fmt::Display for LambdaMonomial {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "l{}", i)?;
        }
        Ok(())
    }
}

impl fmt::Debug for LambdaMonomial {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A sum of monomials, kept sorted and free of duplicates. Normalized chains
/// contain only admissible monomials.
#[derive(Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct LambdaChain {
    terms: Vec<LambdaMonomial>,
}

impl LambdaChain {
    pub fn zero() -> Self {
        LambdaChain { terms: vec![] }
    }

    pub fn one() -> Self {
        LambdaChain { terms: vec![LambdaMonomial::unit()] }
    }

    pub fn monomial(m: LambdaMonomial) -> Self {
        LambdaChain { terms: vec![m] }
    }

    pub fn generator(i: u32) -> Self {
        Self::monomial(LambdaMonomial::generator(i))
    }

    /// Sum of the given terms mod 2; repeated terms cancel in pairs.
    pub fn from_terms(mut terms: Vec<LambdaMonomial>) -> Self {
        terms.sort_unstable();
        let mut out: Vec<LambdaMonomial> = Vec::with_capacity(terms.len());
        for m in terms {
            if out.last() == Some(&m) {
                out.pop();
            } else {
                out.push(m);
            }
        }
        LambdaChain { terms: out }
    }

    pub fn terms(&self) -> &[LambdaMonomial] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<LambdaMonomial> {
        self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_normal(&self) -> bool {
        self.terms.iter().all(|m| m.is_admissible())
    }

    pub fn contains(&self, m: &LambdaMonomial) -> bool {
        self.terms.binary_search(m).is_ok()
    }

    pub fn add(&self, other: &LambdaChain) -> LambdaChain {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self::from_terms(terms)
    }

    /// `(s, t)` if every term has the same bidegree.
    pub fn bidegree(&self) -> Option<(u32, u32)> {
        let first = self.terms.first()?;
        let d = (first.s(), first.t());
        if self.terms.iter().all(|m| (m.s(), m.t()) == d) {
            Some(d)
        } else {
            None
        }
    }

    /// Normal form under the Adem relations.
    pub fn normalize(&self) -> LambdaChain {
        let mut acc = Vec::new();
        for m in &self.terms {
            acc.extend(normalize_word(m.indices()));
        }
        Self::from_terms(acc)
    }
}

impl fmt::Display for LambdaChain {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, m) in self.terms.iter().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{}", m)?;
        }
        Ok(())
    }
}

impl fmt::Debug for LambdaChain {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Index `n` of the subcomplex spanned by admissibles with first index `<= n`.
#[derive(Clone, Copy, PartialEq, Eq, Debug, PartialOrd, Ord, Hash)]
pub struct FiltrationLevel(pub u32);

/// Drop every term lying in the filtration level `n`. The unit lies in every
/// level.
pub fn reduce_mod_filtration(chain: &LambdaChain, n: FiltrationLevel) -> LambdaChain {
    LambdaChain { terms: chain.terms.iter().filter(|m| m.first().map_or(false, |i| i > n.0)).cloned().collect() }
}

/// Largest first index among the terms and the sum of tails carrying it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeadingTerm {
    pub index: u32,
    pub residual: LambdaChain,
}

/// Split off the leading generator of a cycle. The residual is checked to be
/// a cycle as well.
pub fn leading_term(cycle: &LambdaChain) -> crate::error::Result<LeadingTerm> {
    use crate::error::Error;
    let chain = cycle.normalize();
    if chain.is_zero() {
        return Err(Error::ZeroChain);
    }
    if !delta(&chain).is_zero() {
        return Err(Error::NotACycle);
    }
    let index = chain.terms.iter().filter_map(|m| m.first()).max().ok_or(Error::ZeroChain)?;
    let residual = LambdaChain::from_terms(chain.terms.iter().filter(|m| m.first() == Some(index)).map(|m| m.tail()).collect());
    if !delta(&residual).is_zero() {
        return Err(Error::ResidualNotACycle);
    }
    Ok(LeadingTerm { index, residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ch(ms: &[&[u32]]) -> LambdaChain {
        LambdaChain::from_terms(ms.iter().map(|m| LambdaMonomial::new(m)).collect())
    }

    #[test]
    fn cancellation_and_order() {
        let c = ch(&[&[3, 1], &[1, 1], &[3, 1]]);
        assert_eq!(c, ch(&[&[1, 1]]));
        assert_eq!(ch(&[&[2], &[1]]).terms()[0], LambdaMonomial::new(&[1]));
        assert_eq!(format!("{}", ch(&[&[0, 23, 7], &[]])), "1 + l0 l23 l7");
        assert_eq!(format!("{}", LambdaChain::zero()), "0");
    }

    #[test]
    fn gradings() {
        let m = LambdaMonomial::new(&[2, 3, 3]);
        assert_eq!((m.s(), m.t(), m.stem()), (3, 11, 8));
        assert!(m.is_admissible());
        assert!(!LambdaMonomial::new(&[0, 1]).is_admissible());
    }

    #[test]
    fn filtration_drop() {
        let c = ch(&[&[3, 1], &[7, 0], &[], &[5]]);
        assert_eq!(reduce_mod_filtration(&c, FiltrationLevel(5)), ch(&[&[7, 0]]));
    }

    #[test]
    fn leading_terms() {
        let lt = leading_term(&LambdaChain::generator(3)).unwrap();
        assert_eq!((lt.index, lt.residual), (3, LambdaChain::one()));
        let lt = leading_term(&ch(&[&[2, 3, 3]])).unwrap();
        assert_eq!((lt.index, lt.residual), (2, ch(&[&[3, 3]])));
        assert!(matches!(leading_term(&LambdaChain::zero()), Err(crate::error::Error::ZeroChain)));
        assert!(matches!(leading_term(&LambdaChain::generator(2)), Err(crate::error::Error::NotACycle)));
    }
}
