//! Adem normal forms, products and the differential.

use std::sync::Arc;

use dashmap::DashMap;
use once_cell::sync::Lazy;

use super::{Indices, LambdaChain, LambdaMonomial};
use crate::error::{Error, Result};
use crate::gf2::binom_mod2;

pub const DEFAULT_FUEL: u64 = 50_000_000;

type Terms = Arc<Vec<LambdaMonomial>>;

static PAIRS: Lazy<DashMap<(u32, u32), Arc<Vec<(u32, u32)>>>> = Lazy::new(DashMap::new);
static LEFT: Lazy<DashMap<(u32, LambdaMonomial), Terms>> = Lazy::new(DashMap::new);
static DELTA: Lazy<DashMap<LambdaMonomial, Terms>> = Lazy::new(DashMap::new);

/// Only monomials up to this length are memoized. Longer ones are mostly
/// seen once, and keeping them exhausts memory on large sweeps.
const MEMO_MAX_LEN: usize = 5;

/// Expansion of the inadmissible pair `l_i l_k` (`k > 2i`) into admissible
/// pairs: `l_i l_{2i+1+m} = sum_v C(m-1-v, v) l_{m+i-v} l_{2i+1+v}`.
pub fn adem_pair(i: u32, k: u32) -> Arc<Vec<(u32, u32)>> {
    debug_assert!(k > 2 * i);
    if let Some(v) = PAIRS.get(&(i, k)) {
        return v.clone();
    }
    let m = (k - 2 * i - 1) as i64;
    let mut out = vec![];
    let mut v = 0i64;
    while 2 * v < m {
        if binom_mod2(m - 1 - v, v) {
            out.push(((m + i as i64 - v) as u32, 2 * i + 1 + v as u32));
        }
        v += 1;
    }
    let out = Arc::new(out);
    PAIRS.insert((i, k), out.clone());
    out
}

fn cancel(terms: Vec<LambdaMonomial>) -> Vec<LambdaMonomial> {
    LambdaChain::from_terms(terms).into_terms()
}

/// Normal form of `l_i * m` for admissible `m`.
pub fn left_mul(i: u32, m: &LambdaMonomial) -> Terms {
    match m.first() {
        None => return Arc::new(vec![LambdaMonomial::generator(i)]),
        Some(j) if j <= 2 * i => {
            let mut v = Indices::with_capacity(m.0.len() + 1);
            v.push(i);
            v.extend_from_slice(&m.0);
            return Arc::new(vec![LambdaMonomial(v)]);
        }
        _ => {}
    }
    let key = (i, m.clone());
    if m.0.len() <= MEMO_MAX_LEN {
        if let Some(v) = LEFT.get(&key) {
            return v.clone();
        }
    }
    let tail = m.tail();
    let mut acc = vec![];
    for &(a, b) in adem_pair(i, m.0[0]).iter() {
        for r in left_mul(b, &tail).iter() {
            acc.extend(left_mul(a, r).iter().cloned());
        }
    }
    let out = Arc::new(cancel(acc));
    if m.0.len() <= MEMO_MAX_LEN {
        LEFT.insert(key, out.clone());
    }
    out
}

/// Normal form of an arbitrary word, built from the right.
pub fn normalize_word(word: &[u32]) -> Vec<LambdaMonomial> {
    let mut cur = vec![LambdaMonomial::unit()];
    for &i in word.iter().rev() {
        let mut next = vec![];
        for m in &cur {
            next.extend(left_mul(i, m).iter().cloned());
        }
        cur = cancel(next);
    }
    cur
}

/// Rewrite to admissible form by repeatedly expanding the leftmost
/// inadmissible adjacent pair. Fails once more than `fuel` rewrites were
/// needed.
pub fn adem_normalize(chain: &LambdaChain, fuel: u64) -> Result<LambdaChain> {
    let mut out = vec![];
    let mut cur = chain.terms().to_vec();
    let mut used = 0u64;
    while !cur.is_empty() {
        let mut next = vec![];
        for w in cancel(cur) {
            let idx = w.indices();
            match (0..idx.len().saturating_sub(1)).find(|&j| 2 * idx[j] < idx[j + 1]) {
                None => out.push(w),
                Some(j) => {
                    used += 1;
                    if used > fuel {
                        return Err(Error::RewriteFuelExhausted);
                    }
                    for &(a, b) in adem_pair(idx[j], idx[j + 1]).iter() {
                        let mut v = Indices::from_slice(&idx[..j]);
                        v.push(a);
                        v.push(b);
                        v.extend_from_slice(&idx[j + 2..]);
                        next.push(LambdaMonomial(v));
                    }
                }
            }
        }
        cur = next;
    }
    Ok(LambdaChain::from_terms(out))
}

/// Product of two chains, normalized.
pub fn multiply(a: &LambdaChain, b: &LambdaChain) -> LambdaChain {
    let b = if b.is_normal() { b.clone() } else { b.normalize() };
    let mut acc = vec![];
    for x in a.terms() {
        let mut cur = b.terms().to_vec();
        for &i in x.indices().iter().rev() {
            let mut next = vec![];
            for m in &cur {
                next.extend(left_mul(i, m).iter().cloned());
            }
            cur = cancel(next);
        }
        acc.extend(cur);
    }
    LambdaChain::from_terms(acc)
}

/// Differential of an admissible monomial, normalized.
pub fn delta_monomial(m: &LambdaMonomial) -> Terms {
    let Some(i) = m.first() else {
        return Arc::new(vec![]);
    };
    let memo = m.0.len() <= MEMO_MAX_LEN;
    if memo {
        if let Some(v) = DELTA.get(m) {
            return v.clone();
        }
    }
    let tail = m.tail();
    let mut acc = vec![];
    let mut v = 0u32;
    while 2 * v + 2 <= i {
        if binom_mod2((i - 1 - v) as i64, (v + 1) as i64) {
            for r in left_mul(v, &tail).iter() {
                acc.extend(left_mul(i - 1 - v, r).iter().cloned());
            }
        }
        v += 1;
    }
    for r in delta_monomial(&tail).iter() {
        acc.extend(left_mul(i, r).iter().cloned());
    }
    let out = Arc::new(cancel(acc));
    if memo {
        DELTA.insert(m.clone(), out.clone());
    }
    out
}

pub fn delta(chain: &LambdaChain) -> LambdaChain {
    let chain = if chain.is_normal() { chain.clone() } else { chain.normalize() };
    let mut acc = vec![];
    for m in chain.terms() {
        acc.extend(delta_monomial(m).iter().cloned());
    }
    LambdaChain::from_terms(acc)
}

/// The algebra map `l_j -> l_{2j+1}`.
pub fn sq0(chain: &LambdaChain) -> LambdaChain {
    let chain = if chain.is_normal() { chain.clone() } else { chain.normalize() };
    LambdaChain::from_terms(chain.terms().iter().map(|m| LambdaMonomial(m.0.iter().map(|&j| 2 * j + 1).collect())).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lambda::admissible_basis;
    use proptest::prelude::*;

    fn ch(ms: &[&[u32]]) -> LambdaChain {
        LambdaChain::from_terms(ms.iter().map(|m| LambdaMonomial::new(m)).collect())
    }

    #[test]
    fn small_relations() {
        assert_eq!(ch(&[&[0, 2]]).normalize(), ch(&[&[1, 1]]));
        assert_eq!(ch(&[&[0, 1]]).normalize(), LambdaChain::zero());
        assert_eq!(ch(&[&[1, 3]]).normalize(), LambdaChain::zero());
        assert_eq!(ch(&[&[3, 7]]).normalize(), LambdaChain::zero());
        assert_eq!(ch(&[&[2, 0]]).normalize(), ch(&[&[2, 0]]));
    }

    #[test]
    fn small_differentials() {
        assert_eq!(delta(&LambdaChain::generator(2)), ch(&[&[1, 0]]));
        assert_eq!(delta(&LambdaChain::generator(0)), LambdaChain::zero());
        assert_eq!(delta(&LambdaChain::generator(3)), LambdaChain::zero());
        assert_eq!(delta(&LambdaChain::generator(7)), LambdaChain::zero());
        assert_eq!(delta(&LambdaChain::generator(4)), ch(&[&[3, 0], &[2, 1]]));
        assert_eq!(delta(&LambdaChain::generator(5)), ch(&[&[3, 1]]));
        assert_eq!(delta(&LambdaChain::generator(6)), ch(&[&[5, 0], &[3, 2]]));
    }

    #[test]
    fn hopf_relations_vanish() {
        for i in 0..6u32 {
            let h = |k: u32| LambdaChain::generator((1 << k) - 1);
            assert!(multiply(&h(i), &h(i + 1)).is_zero());
        }
    }

    #[test]
    fn sq0_is_multiplicative() {
        let a = ch(&[&[0, 2, 3]]);
        let b = ch(&[&[1, 4]]);
        assert_eq!(sq0(&multiply(&a, &b)), multiply(&sq0(&a), &sq0(&b)));
    }

    #[test]
    fn delta_squared_small() {
        for s in 1..=4 {
            for w in 0..=20 {
                for m in admissible_basis(s, w).iter() {
                    let d = delta(&LambdaChain::monomial(m.clone()));
                    assert!(delta(&d).is_zero(), "d^2 {}", m);
                }
            }
        }
    }

    #[test]
    fn fuel_exhaustion() {
        let c = ch(&[&[0, 7, 30]]);
        assert!(matches!(adem_normalize(&c, 0), Err(Error::RewriteFuelExhausted)));
        assert_eq!(adem_normalize(&c, DEFAULT_FUEL).unwrap(), c.normalize());
    }

    proptest! {
        #[test]
        fn strategies_agree(word in prop::collection::vec(0u32..24, 0..6)) {
            let c = LambdaChain::monomial(LambdaMonomial::new(&word));
            let a = adem_normalize(&c, DEFAULT_FUEL).unwrap();
            let b = c.normalize();
            prop_assert!(a.is_normal());
            prop_assert_eq!(a.clone(), b);
            prop_assert_eq!(adem_normalize(&a, DEFAULT_FUEL).unwrap(), a);
        }

        #[test]
        fn associativity(x in prop::collection::vec(0u32..16, 1..3), y in prop::collection::vec(0u32..16, 1..3), z in prop::collection::vec(0u32..16, 1..3)) {
            let (x, y, z) = (LambdaChain::monomial(LambdaMonomial::new(&x)), LambdaChain::monomial(LambdaMonomial::new(&y)), LambdaChain::monomial(LambdaMonomial::new(&z)));
            prop_assert_eq!(multiply(&multiply(&x, &y), &z), multiply(&x, &multiply(&y, &z)));
        }

        #[test]
        fn leibniz(x in prop::collection::vec(0u32..20, 1..4), y in prop::collection::vec(0u32..20, 1..4)) {
            let (x, y) = (LambdaChain::monomial(LambdaMonomial::new(&x)), LambdaChain::monomial(LambdaMonomial::new(&y)));
            let lhs = delta(&multiply(&x, &y));
            let rhs = multiply(&delta(&x), &y).add(&multiply(&x, &delta(&y)));
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn sq0_commutes_with_delta(x in prop::collection::vec(0u32..20, 1..4)) {
            let x = LambdaChain::monomial(LambdaMonomial::new(&x));
            prop_assert_eq!(sq0(&delta(&x)), delta(&sq0(&x)));
        }

        #[test]
        fn normalization_preserves_bidegree(word in prop::collection::vec(0u32..30, 1..6)) {
            let m = LambdaMonomial::new(&word);
            for t in LambdaChain::monomial(m.clone()).normalize().terms() {
                prop_assert_eq!((t.s(), t.t()), (m.s(), m.t()));
            }
        }
    }
}
