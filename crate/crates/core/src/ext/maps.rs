use std::collections::BTreeMap;
use std::sync::Arc;

use super::{ext_basis, ClassCoords, ExtBasis};
use crate::error::{Error, Result};
use crate::gf2::{solve_in_span, BitMatrix, BitVector, Echelon};
use crate::lambda::{leading_term, LambdaChain, LambdaMonomial, LeadingTerm};
use crate::modules::{module_delta, sphere, transfer_chain, FiniteAModule, ModuleChain, ModuleMorphism};

/// Matrix of `f_*: Ext^{s,t}(source) -> Ext^{s,t}(target)`, columns indexed
/// by the source basis.
pub fn induced_on_ext(f: &ModuleMorphism, s: u32, t: u32) -> Result<BitMatrix> {
    let src = ext_basis(f.source(), s, t)?;
    let tgt = ext_basis(f.target(), s, t)?;
    let cols = src.representatives().iter().map(|z| tgt.coords(&f.apply(z)?)).collect::<Result<Vec<_>>>()?;
    BitMatrix::from_columns(tgt.dim(), &cols)
}

/// Matrix of the transfer `Ext^{s,t}(P) -> Ext^{s+1,t+1}(S^0)`.
pub fn transfer_on_ext(module: &Arc<FiniteAModule>, s: u32, t: u32) -> Result<BitMatrix> {
    let src = ext_basis(module, s, t)?;
    let s0 = sphere(0);
    let tgt = ext_basis(&s0, s + 1, t + 1)?;
    let mut cols = vec![];
    for z in src.representatives() {
        let x = transfer_chain(&z)?;
        cols.push(tgt.coords(&ModuleChain::cell_times(s0.clone(), 0, &x))?);
    }
    BitMatrix::from_columns(tgt.dim(), &cols)
}

/// Matrix of right multiplication by the class of a lambda cycle.
pub fn multiplication_matrix(module: &Arc<FiniteAModule>, s: u32, t: u32, x: &LambdaChain) -> Result<BitMatrix> {
    let (xs, xt) = x.normalize().bidegree().ok_or_else(|| Error::Domain("multiplier is zero or not homogeneous".into()))?;
    if !crate::lambda::delta(x).is_zero() {
        return Err(Error::NotACycle);
    }
    let src = ext_basis(module, s, t)?;
    let tgt = ext_basis(module, s + xs, t + xt)?;
    let cols = src.representatives().iter().map(|z| tgt.coords(&z.mul_lambda(x))).collect::<Result<Vec<_>>>()?;
    BitMatrix::from_columns(tgt.dim(), &cols)
}

/// `0 -> A -> B -> C -> 0` of modules.
#[derive(Clone, Debug)]
pub struct ShortExactSequence {
    incl: ModuleMorphism,
    proj: ModuleMorphism,
    /// Per cell of `C`, a preimage in `B`.
    section: Vec<Vec<usize>>,
}

fn cells_of_degree(m: &FiniteAModule, d: u32) -> Vec<usize> {
    (0..m.num_cells()).filter(|&c| m.degree(c) == d).collect()
}

fn local_matrix(f: &ModuleMorphism, src: &[usize], tgt: &[usize]) -> Result<BitMatrix> {
    let cols: Vec<BitVector> = src.iter().map(|&c| BitVector::from_indices(tgt.len(), f.image(c).iter().map(|y| tgt.iter().position(|t| t == y).unwrap()))).collect();
    BitMatrix::from_columns(tgt.len(), &cols)
}

impl ShortExactSequence {
    pub fn new(incl: ModuleMorphism, proj: ModuleMorphism) -> Result<Self> {
        if incl.target() != proj.source() {
            return Err(Error::InvalidMorphism("inclusion target differs from projection source".into()));
        }
        if !incl.is_injective() || !proj.is_surjective() {
            return Err(Error::InvalidMorphism("not injective then surjective".into()));
        }
        let comp = incl.compose(&proj)?;
        if (0..comp.source().num_cells()).any(|c| !comp.image(c).is_empty()) {
            return Err(Error::InvalidMorphism("composite is nonzero".into()));
        }
        let (a, b, c) = (incl.source(), incl.target(), proj.target());
        let mut degrees: Vec<u32> = b.cells().iter().map(|x| x.degree).collect();
        degrees.dedup();
        for d in degrees {
            if cells_of_degree(a, d).len() + cells_of_degree(c, d).len() != cells_of_degree(b, d).len() {
                return Err(Error::InvalidMorphism(format!("not exact in degree {}", d)));
            }
        }
        let mut section = vec![];
        for cell in 0..c.num_cells() {
            let d = c.degree(cell);
            let (bs, cs) = (cells_of_degree(b, d), cells_of_degree(c, d));
            let m = local_matrix(&proj, &bs, &cs)?;
            let target = BitVector::unit(cs.len(), cs.iter().position(|&x| x == cell).unwrap());
            let x = solve_in_span(&m, &target)?;
            section.push(x.ones().map(|i| bs[i]).collect());
        }
        Ok(ShortExactSequence { incl, proj, section })
    }

    /// The sequence `sub -> module -> quotient` killing the given cells.
    pub fn from_submodule(module: &Arc<FiniteAModule>, cells: &[&str]) -> Result<Self> {
        use crate::modules::{sub_quotient, SubQuotient};
        let (_, incl) = sub_quotient(module, cells, SubQuotient::Sub)?;
        let (_, proj) = sub_quotient(module, cells, SubQuotient::Quotient)?;
        Self::new(incl, proj)
    }

    pub fn sub(&self) -> &Arc<FiniteAModule> {
        self.incl.source()
    }

    pub fn middle(&self) -> &Arc<FiniteAModule> {
        self.incl.target()
    }

    pub fn quotient(&self) -> &Arc<FiniteAModule> {
        self.proj.target()
    }

    pub fn inclusion(&self) -> &ModuleMorphism {
        &self.incl
    }

    pub fn projection(&self) -> &ModuleMorphism {
        &self.proj
    }

    /// Lift a chain on the quotient cell by cell.
    pub fn lift(&self, z: &ModuleChain) -> Result<ModuleChain> {
        let mut out = vec![];
        for (c, m) in z.transport(self.quotient().clone())?.terms() {
            out.extend(self.section[*c].iter().map(|&b| (b, m.clone())));
        }
        Ok(ModuleChain::from_terms(self.middle().clone(), out))
    }

    /// Preimage under the inclusion of a chain in its image.
    pub fn pull_back(&self, y: &ModuleChain) -> Result<ModuleChain> {
        let (a, b) = (self.sub(), self.middle());
        let mut groups: BTreeMap<(u32, LambdaMonomial), Vec<usize>> = BTreeMap::new();
        for (c, m) in y.terms() {
            groups.entry((b.degree(*c), m.clone())).or_default().push(*c);
        }
        let mut out = vec![];
        for ((d, m), cells) in groups {
            let (as_, bs) = (cells_of_degree(a, d), cells_of_degree(b, d));
            let mat = local_matrix(&self.incl, &as_, &bs)?;
            let v = BitVector::from_indices(bs.len(), cells.iter().map(|c| bs.iter().position(|x| x == c).unwrap()));
            let x = solve_in_span(&mat, &v)?;
            out.extend(x.ones().map(|i| (as_[i], m.clone())));
        }
        Ok(ModuleChain::from_terms(a.clone(), out))
    }

    /// Snake-lemma image of a cycle on the quotient: lift, differentiate,
    /// pull back.
    pub fn connecting_chain(&self, z: &ModuleChain) -> Result<ModuleChain> {
        let y = self.lift(z)?;
        if self.proj.apply(&y)? != z.transport(self.quotient().clone())? {
            return Err(Error::InvalidMorphism("lift does not project back".into()));
        }
        let x = self.pull_back(&module_delta(&y))?;
        if !module_delta(&x).is_zero() {
            return Err(Error::NotACycle);
        }
        Ok(x)
    }
}

/// Matrix of `Ext^{s,t}(C) -> Ext^{s+1,t}(A)`.
pub fn connecting_map(ses: &ShortExactSequence, s: u32, t: u32) -> Result<BitMatrix> {
    let src = ext_basis(ses.quotient(), s, t)?;
    let tgt = ext_basis(ses.sub(), s + 1, t)?;
    let mut cols = vec![];
    for z in src.representatives() {
        cols.push(tgt.coords(&ses.connecting_chain(&z)?)?);
    }
    BitMatrix::from_columns(tgt.dim(), &cols)
}

/// Leading term of a homologous cycle whose largest first index is as small
/// as possible.
pub fn leading_term_reduced(cycle: &LambdaChain) -> Result<LeadingTerm> {
    let cycle = cycle.normalize();
    let (s, t) = cycle.bidegree().ok_or(Error::ZeroChain)?;
    let s0 = sphere(0);
    let basis: Arc<ExtBasis> = ext_basis(&s0, s, t)?;
    let z = ModuleChain::cell_times(s0.clone(), 0, &cycle);
    if let ClassCoords::Boundary(_) = basis.class_coords(&z)? {
        return Err(Error::ZeroChain);
    }
    let n = basis.chain_dim();
    let flip = |v: &BitVector| BitVector::from_indices(n, v.ones().map(|i| n - 1 - i));
    let mut e = Echelon::new(n);
    for b in basis.boundary_rows() {
        e.insert(flip(b));
    }
    let e = e.into_reduced();
    let r = flip(&e.reduce(&flip(&basis.chains().vector(&z)?)));
    let reduced = basis.chains().chain(&s0, &r).component(0);
    leading_term(&reduced)
}
