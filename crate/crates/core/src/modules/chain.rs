use std::cmp::Reverse;
use std::fmt;
use std::sync::Arc;

use super::{stunted_projective, FiniteAModule};
use crate::error::{Error, Result};
use crate::lambda::{delta_monomial, left_mul, normalize_word, LambdaChain, LambdaMonomial};

/// A sum of terms `cell (x) monomial`, sorted with the top cell first and
/// free of duplicates.
#[derive(Clone)]
pub struct ModuleChain {
    module: Arc<FiniteAModule>,
    terms: Vec<(usize, LambdaMonomial)>,
}

impl PartialEq for ModuleChain {
    fn eq(&self, other: &Self) -> bool {
        self.module == other.module && self.terms == other.terms
    }
}

impl Eq for ModuleChain {}

fn sort_cancel(mut terms: Vec<(usize, LambdaMonomial)>) -> Vec<(usize, LambdaMonomial)> {
    terms.sort_unstable_by(|a, b| (Reverse(a.0), &a.1).cmp(&(Reverse(b.0), &b.1)));
    let mut out: Vec<(usize, LambdaMonomial)> = Vec::with_capacity(terms.len());
    for t in terms {
        if out.last() == Some(&t) {
            out.pop();
        } else {
            out.push(t);
        }
    }
    out
}

impl ModuleChain {
    pub fn zero(module: Arc<FiniteAModule>) -> Self {
        ModuleChain { module, terms: vec![] }
    }

    /// Sum of terms mod 2. Monomials are normalized.
    pub fn from_terms(module: Arc<FiniteAModule>, terms: Vec<(usize, LambdaMonomial)>) -> Self {
        let mut out = Vec::with_capacity(terms.len());
        for (c, m) in terms {
            assert!(c < module.num_cells(), "cell index out of range");
            if m.is_admissible() {
                out.push((c, m));
            } else {
                out.extend(normalize_word(m.indices()).into_iter().map(|n| (c, n)));
            }
        }
        ModuleChain { module, terms: sort_cancel(out) }
    }

    /// `cell (x) chain`.
    pub fn cell_times(module: Arc<FiniteAModule>, cell: usize, chain: &LambdaChain) -> Self {
        Self::from_terms(module, chain.terms().iter().map(|m| (cell, m.clone())).collect())
    }

    pub fn module(&self) -> &Arc<FiniteAModule> {
        &self.module
    }

    pub fn terms(&self) -> &[(usize, LambdaMonomial)] {
        &self.terms
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

    pub fn add(&self, other: &ModuleChain) -> Result<ModuleChain> {
        self.check_same(other)?;
        let mut t = self.terms.clone();
        t.extend(other.terms.iter().cloned());
        Ok(ModuleChain { module: self.module.clone(), terms: sort_cancel(t) })
    }

    pub fn check_same(&self, other: &ModuleChain) -> Result<()> {
        if self.module != other.module {
            return Err(Error::ModuleMismatch(format!("{} vs {}", self.module.name(), other.module.name())));
        }
        Ok(())
    }

    /// Right multiplication by a lambda chain.
    pub fn mul_lambda(&self, rhs: &LambdaChain) -> ModuleChain {
        let rhs = rhs.normalize();
        let mut out = vec![];
        for (c, m) in &self.terms {
            let prod = crate::lambda::multiply(&LambdaChain::monomial(m.clone()), &rhs);
            out.extend(prod.into_terms().into_iter().map(|x| (*c, x)));
        }
        ModuleChain { module: self.module.clone(), terms: sort_cancel(out) }
    }

    /// `(s, t)` if all terms share one bidegree.
    pub fn bidegree(&self) -> Option<(u32, u32)> {
        let d = |(c, m): &(usize, LambdaMonomial)| (m.s(), self.module.degree(*c) + m.t());
        let first = d(self.terms.first()?);
        self.terms.iter().all(|t| d(t) == first).then_some(first)
    }

    /// Highest cell degree among the terms.
    pub fn top_degree(&self) -> Option<u32> {
        self.terms.iter().map(|(c, _)| self.module.degree(*c)).max()
    }

    /// The lambda part sitting on one cell.
    pub fn component(&self, cell: usize) -> LambdaChain {
        LambdaChain::from_terms(self.terms.iter().filter(|(c, _)| *c == cell).map(|(_, m)| m.clone()).collect())
    }

    /// Same terms viewed in another module with identical cell ids.
    pub fn transport(&self, target: Arc<FiniteAModule>) -> Result<ModuleChain> {
        let mut out = vec![];
        for (c, m) in &self.terms {
            let id = self.module.cell_id(*c);
            let d = target.cell_index(id).ok_or_else(|| Error::UnknownName(format!("{} in {}", id, target.name())))?;
            out.push((d, m.clone()));
        }
        Ok(ModuleChain { module: target, terms: sort_cancel(out) })
    }
}

impl fmt::Display for ModuleChain {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (c, m)) in self.terms.iter().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            f.write_str(self.module.cell_id(*c))?;
            if !m.is_unit() {
                write!(f, " {}", m)?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for ModuleChain {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "{}[{}]", self.module.name(), self)
    }
}

/// `d(a l_I) = a d(l_I) + sum_j (a Sq^{j+1}) l_j l_I`.
pub fn delta_term(module: &FiniteAModule, cell: usize, m: &LambdaMonomial, out: &mut Vec<(usize, LambdaMonomial)>) {
    out.extend(delta_monomial(m).iter().map(|x| (cell, x.clone())));
    for (n, targets) in module.action_entries(cell) {
        let prod = left_mul(n - 1, m);
        for &d in targets {
            out.extend(prod.iter().map(|x| (d, x.clone())));
        }
    }
}

pub fn module_delta(chain: &ModuleChain) -> ModuleChain {
    let mut out = vec![];
    for (c, m) in &chain.terms {
        delta_term(&chain.module, *c, m, &mut out);
    }
    ModuleChain { module: chain.module.clone(), terms: sort_cancel(out) }
}

/// `e_k l_I -> e_{2k+1} Sq^0(l_I)`, from `P^m_l` to `P^{2m+1}_{2l+1}`; the
/// infinite stand-in maps to itself.
pub fn module_sq0(chain: &ModuleChain) -> Result<ModuleChain> {
    let p = chain.module.projective().ok_or(Error::NotPType)?;
    let target = if p.infinite {
        chain.module.clone()
    } else {
        stunted_projective(2 * p.l + 1, 2 * p.m + 1)?
    };
    let mut out = vec![];
    for (c, m) in &chain.terms {
        let k = p.l + *c as u32;
        let d = target.projective_cell(2 * k + 1).ok_or_else(|| Error::Domain(format!("e{} beyond the top cell", 2 * k + 1)))?;
        out.push((d, LambdaMonomial(m.0.iter().map(|&j| 2 * j + 1).collect())));
    }
    Ok(ModuleChain { module: target, terms: sort_cancel(out) })
}

/// `e_k l_I -> l_k l_I`, defined on `P^m_1` and the infinite stand-in.
pub fn transfer_chain(chain: &ModuleChain) -> Result<LambdaChain> {
    let p = chain.module.projective().ok_or(Error::NotPType)?;
    if p.l != 1 {
        return Err(Error::NotPType);
    }
    let mut out = vec![];
    for (c, m) in &chain.terms {
        out.extend(left_mul(p.l + *c as u32, m).iter().cloned());
    }
    Ok(LambdaChain::from_terms(out))
}

/// Drop every term on a cell of degree `<= n`.
pub fn reduce_mod_f(chain: &ModuleChain, n: u32) -> ModuleChain {
    ModuleChain {
        module: chain.module.clone(),
        terms: chain.terms.iter().filter(|(c, _)| chain.module.degree(*c) > n).cloned().collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lambda::{delta, LambdaChain};
    use crate::modules::{projective_infinite, sphere, stunted_projective};

    fn pc(p: &Arc<FiniteAModule>, terms: &[(u32, &[u32])]) -> ModuleChain {
        ModuleChain::from_terms(p.clone(), terms.iter().map(|(k, m)| (p.projective_cell(*k).unwrap(), LambdaMonomial::new(m))).collect())
    }

    #[test]
    fn projective_differentials() {
        let p = projective_infinite();
        assert_eq!(module_delta(&pc(&p, &[(2, &[])])), pc(&p, &[(1, &[0])]));
        assert!(module_delta(&pc(&p, &[(1, &[])])).is_zero());
        assert!(module_delta(&pc(&p, &[(15, &[])])).is_zero());
        let d = module_delta(&pc(&p, &[(2, &[2])]));
        assert_eq!(d, pc(&p, &[(2, &[1, 0]), (1, &[0, 2])]));
        assert_eq!(d, pc(&p, &[(2, &[1, 0]), (1, &[1, 1])]));
        let p4 = stunted_projective(1, 4).unwrap();
        assert_eq!(module_delta(&pc(&p4, &[(4, &[])])), pc(&p4, &[(3, &[0]), (2, &[1])]));
    }

    #[test]
    fn sphere_matches_lambda() {
        let s = sphere(0);
        let x = LambdaChain::from_terms(vec![LambdaMonomial::new(&[6, 2]), LambdaMonomial::new(&[4, 4])]);
        let c = ModuleChain::cell_times(s.clone(), 0, &x);
        assert_eq!(module_delta(&c), ModuleChain::cell_times(s, 0, &delta(&x)));
    }

    #[test]
    fn transfer_commutes() {
        let p = projective_infinite();
        for k in 1..20u32 {
            for w in [0u32, 1, 3, 6] {
                let x = pc(&p, &[(k, &[w])]);
                assert_eq!(transfer_chain(&module_delta(&x)).unwrap(), delta(&transfer_chain(&x).unwrap()));
            }
        }
    }

    #[test]
    fn sq0_commutes() {
        let p = stunted_projective(3, 12).unwrap();
        for k in 3..=12u32 {
            let x = pc(&p, &[(k, &[2, 1])]);
            assert_eq!(module_sq0(&module_delta(&x)).unwrap(), module_delta(&module_sq0(&x).unwrap()));
        }
        assert!(matches!(module_sq0(&ModuleChain::zero(sphere(0))), Err(Error::NotPType)));
    }

    #[test]
    fn filtration_reduction() {
        let p = projective_infinite();
        let x = pc(&p, &[(48, &[0]), (47, &[1]), (46, &[2])]);
        assert_eq!(reduce_mod_f(&x, 46), pc(&p, &[(48, &[0]), (47, &[1])]));
        assert_eq!(format!("{}", x), "e48 l0 + e47 l1 + e46 l2");
    }
}
