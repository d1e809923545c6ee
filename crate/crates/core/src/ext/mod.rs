//! Ext of a module as the homology of `H_*(X) (x) Lambda`.

mod maps;

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use dashmap::DashMap;
use once_cell::sync::Lazy;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gf2::{BitVector, Echelon};
use crate::lambda::{LambdaChain, LambdaMonomial};
use crate::modules::{chain::delta_term, sphere, FiniteAModule, ModuleChain};

pub use maps::{connecting_map, induced_on_ext, leading_term_reduced, multiplication_matrix, transfer_on_ext, ShortExactSequence};

pub const DEFAULT_MAX_BASIS: usize = 400_000;

static MAX_BASIS: AtomicUsize = AtomicUsize::new(DEFAULT_MAX_BASIS);
static MEMO: Lazy<DashMap<(String, u32, u32), Arc<ExtBasis>>> = Lazy::new(DashMap::new);

/// Largest chain basis any single bidegree may use.
pub fn set_max_basis(cap: usize) {
    MAX_BASIS.store(cap, Ordering::Relaxed);
}

pub fn max_basis() -> usize {
    MAX_BASIS.load(Ordering::Relaxed)
}

/// Drop all in-memory Ext bases.
pub fn clear_memo() {
    MEMO.clear();
    BOUNDARIES.clear();
}

type Term = (usize, LambdaMonomial);

/// Ordered chain basis of one bidegree with a reverse index.
#[derive(Debug)]
pub struct ChainBasis {
    pub terms: Vec<Term>,
    index: HashMap<Term, usize>,
}

impl ChainBasis {
    pub fn new(module: &FiniteAModule, s: u32, stem: i64, cap: usize) -> Result<Self> {
        let terms = if stem < 0 { vec![] } else { module.chain_basis(s, stem as u32) };
        if terms.len() > cap {
            return Err(Error::WindowTooLarge { size: terms.len(), cap });
        }
        let index = terms.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
        Ok(ChainBasis { terms, index })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn position(&self, t: &Term) -> Option<usize> {
        self.index.get(t).copied()
    }

    pub fn vector(&self, chain: &ModuleChain) -> Result<BitVector> {
        let mut v = BitVector::zeros(self.len());
        for t in chain.terms() {
            let i = self.position(t).ok_or_else(|| Error::Domain(format!("term {} {} is outside the bidegree", chain.module().cell_id(t.0), t.1)))?;
            v.flip(i);
        }
        Ok(v)
    }

    pub fn chain(&self, module: &Arc<FiniteAModule>, v: &BitVector) -> ModuleChain {
        ModuleChain::from_terms(module.clone(), v.ones().map(|i| self.terms[i].clone()).collect())
    }
}

/// Matrix of the differential out of `source`, one image vector per basis
/// element.
pub fn differential_images(module: &FiniteAModule, source: &ChainBasis, target: &ChainBasis) -> Vec<BitVector> {
    source
        .terms
        .par_iter()
        .map(|(c, m)| {
            let mut out = vec![];
            delta_term(module, *c, m, &mut out);
            let mut v = BitVector::zeros(target.len());
            for t in out {
                v.flip(target.position(&t).expect("differential lands in the next bidegree"));
            }
            v
        })
        .collect()
}

/// Deterministic basis of `Ext^{s,t}`: cycles reduced against the boundary
/// echelon, then brought to reduced echelon form.
#[derive(Debug)]
pub struct ExtBasis {
    module: Arc<FiniteAModule>,
    s: u32,
    t: u32,
    chains: ChainBasis,
    prev: ChainBasis,
    boundaries: Echelon,
    classes: Echelon,
    cycle_dim: usize,
}

/// Result of locating a chain in `Ext`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClassCoords {
    Class(BitVector),
    /// The chain is `d` of the witness.
    Boundary(ModuleChain),
}

impl ExtBasis {
    pub fn compute(module: &Arc<FiniteAModule>, s: u32, t: u32) -> Result<Self> {
        Self::compute_capped(module, s, t, max_basis())
    }

    pub fn compute_capped(module: &Arc<FiniteAModule>, s: u32, t: u32, cap: usize) -> Result<Self> {
        if t < s {
            return Err(Error::Domain(format!("t = {} below s = {}", t, s)));
        }
        let stem = (t - s) as i64;
        let chains = ChainBasis::new(module, s, stem, cap)?;
        let next = ChainBasis::new(module, s + 1, stem - 1, cap)?;
        let prev = if s == 0 { ChainBasis::new(module, 0, -1, cap)? } else { ChainBasis::new(module, s - 1, stem + 1, cap)? };

        let mut boundaries = Echelon::with_tags(chains.len());
        for (j, v) in differential_images(module, &prev, &chains).into_iter().enumerate() {
            let _ = boundaries.insert_tagged(v, BitVector::unit(prev.len(), j));
        }
        let boundaries = boundaries.into_reduced();

        let mut kernel = Echelon::with_tags(next.len());
        let mut cycles = Echelon::new(chains.len());
        for (j, v) in differential_images(module, &chains, &next).into_iter().enumerate() {
            if let Err(rel) = kernel.insert_tagged(v, BitVector::unit(chains.len(), j)) {
                cycles.insert(rel);
            }
        }
        let cycle_dim = cycles.rank();
        let mut classes = Echelon::new(chains.len());
        for z in cycles.into_reduced().rows() {
            classes.insert(boundaries.reduce(z));
        }
        let classes = classes.into_reduced();
        Ok(ExtBasis { module: module.clone(), s, t, chains, prev, boundaries, classes, cycle_dim })
    }

    pub fn module(&self) -> &Arc<FiniteAModule> {
        &self.module
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn stem(&self) -> u32 {
        self.t - self.s
    }

    pub fn dim(&self) -> usize {
        self.classes.rank()
    }

    pub fn chain_dim(&self) -> usize {
        self.chains.len()
    }

    pub fn cycle_dim(&self) -> usize {
        self.cycle_dim
    }

    pub fn boundary_dim(&self) -> usize {
        self.boundaries.rank()
    }

    pub fn chains(&self) -> &ChainBasis {
        &self.chains
    }

    /// Boundary rows in the reduced echelon, as vectors in the chain basis.
    pub fn boundary_rows(&self) -> &[BitVector] {
        self.boundaries.rows()
    }

    pub fn representative(&self, i: usize) -> ModuleChain {
        self.chains.chain(&self.module, &self.classes.rows()[i])
    }

    pub fn representatives(&self) -> Vec<ModuleChain> {
        (0..self.dim()).map(|i| self.representative(i)).collect()
    }

    /// Representative of the class with the given coordinates.
    pub fn class_chain(&self, coords: &BitVector) -> ModuleChain {
        let mut v = BitVector::zeros(self.chains.len());
        for i in coords.ones() {
            v.add_assign(&self.classes.rows()[i]);
        }
        self.chains.chain(&self.module, &v)
    }

    /// Reduce a cycle vector against boundaries; the result is the canonical
    /// representative of its class.
    pub fn reduce_vector(&self, v: &BitVector) -> BitVector {
        self.boundaries.reduce(v)
    }

    pub fn class_coords(&self, chain: &ModuleChain) -> Result<ClassCoords> {
        let chain = if chain.module() == &self.module { chain.clone() } else { chain.transport(self.module.clone())? };
        if chain.is_zero() {
            return Ok(ClassCoords::Class(BitVector::zeros(self.dim())));
        }
        if chain.bidegree() != Some((self.s, self.t)) {
            return Err(Error::Domain(format!("chain {} is not in bidegree ({}, {})", chain, self.s, self.t)));
        }
        if !crate::modules::module_delta(&chain).is_zero() {
            return Err(Error::NotACycle);
        }
        let v = self.chains.vector(&chain)?;
        let (r, witness) = self.boundaries.reduce_tagged(&v, self.prev.len());
        if r.is_zero() {
            return Ok(ClassCoords::Boundary(self.prev.chain(&self.module, &witness)));
        }
        let coords = BitVector::from_indices(self.dim(), self.classes.pivots().iter().enumerate().filter(|(_, &p)| r.get(p)).map(|(k, _)| k));
        debug_assert!(self.classes.reduce(&r).is_zero());
        Ok(ClassCoords::Class(coords))
    }

    /// Coordinates, with boundaries sent to zero.
    pub fn coords(&self, chain: &ModuleChain) -> Result<BitVector> {
        Ok(match self.class_coords(chain)? {
            ClassCoords::Class(c) => c,
            ClassCoords::Boundary(_) => BitVector::zeros(self.dim()),
        })
    }
}

/// Memoized Ext basis at `(s, t)`.
pub fn ext_basis(module: &Arc<FiniteAModule>, s: u32, t: u32) -> Result<Arc<ExtBasis>> {
    let key = (module.fingerprint().to_string(), s, t);
    if let Some(b) = MEMO.get(&key) {
        return Ok(b.clone());
    }
    let b = Arc::new(ExtBasis::compute(module, s, t)?);
    MEMO.insert(key, b.clone());
    Ok(b)
}

pub fn ext_dim(module: &Arc<FiniteAModule>, s: u32, t: u32) -> Result<usize> {
    Ok(ext_basis(module, s, t)?.dim())
}

struct BoundarySpace {
    chains: ChainBasis,
    prev: ChainBasis,
    echelon: Echelon,
}

static BOUNDARIES: Lazy<DashMap<(String, u32, u32), Arc<BoundarySpace>>> = Lazy::new(DashMap::new);

fn boundary_space(module: &Arc<FiniteAModule>, s: u32, t: u32) -> Result<Arc<BoundarySpace>> {
    let key = (module.fingerprint().to_string(), s, t);
    if let Some(b) = BOUNDARIES.get(&key) {
        return Ok(b.clone());
    }
    let cap = max_basis();
    let stem = t as i64 - s as i64;
    let chains = ChainBasis::new(module, s, stem, cap)?;
    let prev = if s == 0 { ChainBasis::new(module, 0, -1, cap)? } else { ChainBasis::new(module, s - 1, stem + 1, cap)? };
    let mut echelon = Echelon::with_tags(chains.len());
    for (j, v) in differential_images(module, &prev, &chains).into_iter().enumerate() {
        let _ = echelon.insert_tagged(v, BitVector::unit(prev.len(), j));
    }
    let b = Arc::new(BoundarySpace { chains, prev, echelon });
    BOUNDARIES.insert(key, b.clone());
    Ok(b)
}

/// A chain `y` with `d y` equal to the given homogeneous chain, if one
/// exists. Needs only the boundaries into the bidegree, so it reaches
/// bidegrees where a full Ext basis would be too large.
pub fn boundary_witness(chain: &ModuleChain) -> Result<Option<ModuleChain>> {
    if chain.is_zero() {
        return Ok(Some(ModuleChain::zero(chain.module().clone())));
    }
    let (s, t) = chain.bidegree().ok_or_else(|| Error::Domain("chain is not homogeneous".into()))?;
    let b = boundary_space(chain.module(), s, t)?;
    let v = b.chains.vector(chain)?;
    let (r, tag) = b.echelon.reduce_tagged(&v, b.prev.len());
    Ok(r.is_zero().then(|| b.prev.chain(chain.module(), &tag)))
}

/// Class of `Ext^{s,t}` given by coordinates in the deterministic basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtClass {
    pub module: Arc<FiniteAModule>,
    pub s: u32,
    pub t: u32,
    pub coords: BitVector,
}

impl ExtClass {
    pub fn of_chain(chain: &ModuleChain) -> Result<ExtClass> {
        let (s, t) = chain.bidegree().ok_or_else(|| Error::Domain("chain is zero or not homogeneous".into()))?;
        let basis = ext_basis(chain.module(), s, t)?;
        Ok(ExtClass { module: chain.module().clone(), s, t, coords: basis.coords(chain)? })
    }

    pub fn is_zero(&self) -> bool {
        self.coords.is_zero()
    }

    pub fn representative(&self) -> Result<ModuleChain> {
        Ok(ext_basis(&self.module, self.s, self.t)?.class_chain(&self.coords))
    }
}

/// Locate a lambda cycle in `Ext` of the sphere.
pub fn sphere_class_coords(chain: &LambdaChain) -> Result<ClassCoords> {
    let s0 = sphere(0);
    let m = ModuleChain::cell_times(s0.clone(), 0, chain);
    if m.is_zero() {
        return Ok(ClassCoords::Class(BitVector::zeros(0)));
    }
    let (s, t) = m.bidegree().ok_or_else(|| Error::Domain("chain is not homogeneous".into()))?;
    ext_basis(&s0, s, t)?.class_coords(&m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modules::{module_from_str, projective_infinite, stunted_projective};

    fn sphere_dim(s: u32, stem: u32) -> usize {
        ext_dim(&sphere(0), s, s + stem).unwrap()
    }

    #[test]
    fn low_sphere_groups() {
        for s in 0..8 {
            assert_eq!(sphere_dim(s, 0), 1, "h0^{}", s);
        }
        assert_eq!(sphere_dim(1, 1), 1);
        assert_eq!(sphere_dim(2, 2), 1);
        assert_eq!(sphere_dim(3, 3), 1);
        assert_eq!(sphere_dim(2, 3), 1);
        assert_eq!(sphere_dim(4, 3), 0);
        assert_eq!(sphere_dim(1, 2), 0);
        assert_eq!(sphere_dim(1, 7), 1);
        assert_eq!(sphere_dim(3, 8), 1);
        assert_eq!(sphere_dim(2, 8), 1);
        assert_eq!(sphere_dim(4, 8), 0);
        assert_eq!(sphere_dim(5, 8), 0);
        assert_eq!(sphere_dim(5, 9), 1);
    }

    #[test]
    fn coords_of_known_cycles() {
        let h0 = LambdaChain::generator(0);
        assert!(matches!(sphere_class_coords(&h0).unwrap(), ClassCoords::Class(c) if c.count_ones() == 1));
        let l2 = crate::lambda::delta(&LambdaChain::generator(2));
        match sphere_class_coords(&l2).unwrap() {
            ClassCoords::Boundary(w) => assert_eq!(format!("{}", w), "e0 l2"),
            other => panic!("{:?}", other),
        }
        assert!(matches!(sphere_class_coords(&LambdaChain::generator(2)), Err(Error::NotACycle)));
    }

    #[test]
    fn representatives_are_cycles_and_independent() {
        let p = projective_infinite();
        for s in 0..4 {
            for n in 0..12 {
                let b = ext_basis(&p, s, s + n).unwrap();
                for i in 0..b.dim() {
                    let z = b.representative(i);
                    assert!(crate::modules::module_delta(&z).is_zero());
                    assert_eq!(b.coords(&z).unwrap(), BitVector::unit(b.dim(), i));
                }
            }
        }
    }

    #[test]
    fn m2_groups() {
        let m2 = module_from_str("[header]\nname = \"M2\"\n[[cells]]\nid = \"e0\"\ndegree = 0\n[[cells]]\nid = \"e1\"\ndegree = 1\n[[action]]\ncell = \"e1\"\nn = 1\nvalue = \"e0\"\n").unwrap();
        assert_eq!(ext_dim(&m2, 0, 0).unwrap(), 1);
        assert_eq!(ext_dim(&m2, 1, 1).unwrap(), 0);
        assert_eq!(ext_dim(&m2, 1, 2).unwrap(), 1);
    }

    #[test]
    fn window_cap() {
        let r = ExtBasis::compute_capped(&stunted_projective(1, 20).unwrap(), 4, 24, 3);
        assert!(matches!(r, Err(Error::WindowTooLarge { .. })));
    }

    #[test]
    fn witnesses() {
        let s0 = sphere(0);
        let c = ModuleChain::cell_times(s0.clone(), 0, &crate::lambda::delta(&LambdaChain::generator(4)));
        let w = boundary_witness(&c).unwrap().unwrap();
        assert_eq!(crate::modules::module_delta(&w), c);
        let h0 = ModuleChain::cell_times(s0, 0, &LambdaChain::generator(0));
        assert!(boundary_witness(&h0).unwrap().is_none());
    }
}
