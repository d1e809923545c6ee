use std::sync::Arc;

use super::{FiniteAModule, ModuleChain};
use crate::error::{Error, Result};

/// Degree preserving map of modules commuting with the action, given on
/// cells.
#[derive(Clone, Debug)]
pub struct ModuleMorphism {
    source: Arc<FiniteAModule>,
    target: Arc<FiniteAModule>,
    map: Vec<Vec<usize>>,
}

fn toggle(v: &mut Vec<usize>, d: usize) {
    if let Some(p) = v.iter().position(|&x| x == d) {
        v.remove(p);
    } else {
        v.push(d);
    }
}

impl ModuleMorphism {
    pub fn new(source: Arc<FiniteAModule>, target: Arc<FiniteAModule>, map: Vec<Vec<usize>>) -> Result<Self> {
        if map.len() != source.num_cells() {
            return Err(Error::InvalidMorphism(format!("{} images for {} cells", map.len(), source.num_cells())));
        }
        let mut clean = vec![];
        for (c, img) in map.into_iter().enumerate() {
            let mut v = vec![];
            for d in img {
                if d >= target.num_cells() || target.degree(d) != source.degree(c) {
                    return Err(Error::InvalidMorphism(format!("image of {} has the wrong degree", source.cell_id(c))));
                }
                toggle(&mut v, d);
            }
            v.sort_unstable();
            clean.push(v);
        }
        let f = ModuleMorphism { source, target, map: clean };
        f.check_action()?;
        Ok(f)
    }

    /// Map sending each source cell to the target cell with the same id, or
    /// to zero when there is none.
    pub fn by_ids(source: Arc<FiniteAModule>, target: Arc<FiniteAModule>) -> Result<Self> {
        let map = source.cells().iter().map(|c| target.cell_index(&c.id).into_iter().collect()).collect();
        Self::new(source, target, map)
    }

    fn check_action(&self) -> Result<()> {
        for c in 0..self.source.num_cells() {
            let max_n = self.source.degree(c);
            for n in 1..=max_n {
                let mut lhs = vec![];
                for &x in self.source.sq(c, n) {
                    for &y in &self.map[x] {
                        toggle(&mut lhs, y);
                    }
                }
                let mut rhs = vec![];
                for &y in &self.map[c] {
                    for &z in self.target.sq(y, n) {
                        toggle(&mut rhs, z);
                    }
                }
                lhs.sort_unstable();
                rhs.sort_unstable();
                if lhs != rhs {
                    return Err(Error::InvalidMorphism(format!("does not commute with Sq^{} on {}", n, self.source.cell_id(c))));
                }
            }
        }
        Ok(())
    }

    pub fn source(&self) -> &Arc<FiniteAModule> {
        &self.source
    }

    pub fn target(&self) -> &Arc<FiniteAModule> {
        &self.target
    }

    pub fn image(&self, cell: usize) -> &[usize] {
        &self.map[cell]
    }

    /// The induced chain map `a l_I -> f(a) l_I`.
    pub fn apply(&self, chain: &ModuleChain) -> Result<ModuleChain> {
        if chain.module() != &self.source {
            return Err(Error::ModuleMismatch(format!("{} is not the source {}", chain.module().name(), self.source.name())));
        }
        let mut out = vec![];
        for (c, m) in chain.terms() {
            for &d in &self.map[*c] {
                out.push((d, m.clone()));
            }
        }
        Ok(ModuleChain::from_terms(self.target.clone(), out))
    }

    pub fn compose(&self, after: &ModuleMorphism) -> Result<ModuleMorphism> {
        if self.target != after.source {
            return Err(Error::ModuleMismatch("composition of non-composable maps".into()));
        }
        let map = self
            .map
            .iter()
            .map(|img| {
                let mut v = vec![];
                for &x in img {
                    for &y in &after.map[x] {
                        toggle(&mut v, y);
                    }
                }
                v
            })
            .collect();
        ModuleMorphism::new(self.source.clone(), after.target.clone(), map)
    }

    /// Injective on every degree.
    pub fn is_injective(&self) -> bool {
        self.degreewise(|rank, src, _| rank == src)
    }

    /// Surjective on every degree.
    pub fn is_surjective(&self) -> bool {
        self.degreewise(|rank, _, tgt| rank == tgt)
    }

    fn degreewise(&self, ok: impl Fn(usize, usize, usize) -> bool) -> bool {
        use crate::gf2::{BitMatrix, BitVector};
        let mut degrees: Vec<u32> = self.source.cells().iter().chain(self.target.cells()).map(|c| c.degree).collect();
        degrees.sort_unstable();
        degrees.dedup();
        degrees.into_iter().all(|d| {
            let src: Vec<usize> = (0..self.source.num_cells()).filter(|&c| self.source.degree(c) == d).collect();
            let tgt: Vec<usize> = (0..self.target.num_cells()).filter(|&c| self.target.degree(c) == d).collect();
            let cols: Vec<BitVector> = src
                .iter()
                .map(|&c| BitVector::from_indices(tgt.len(), self.map[c].iter().map(|y| tgt.iter().position(|t| t == y).unwrap())))
                .collect();
            let rank = BitMatrix::from_columns(tgt.len(), &cols).map(|m| m.rank()).unwrap_or(0);
            ok(rank, src.len(), tgt.len())
        })
    }
}
