//! The spectral sequence of the cell degree filtration `F(i)` of `M (x) Lambda`.
//!
//! `E_1^{i,s,n}` is the sum over cells of degree `i` of `Ext^{s}` of the
//! sphere in stem `n - i`. Page `r` is computed directly as `Zr / Br`
//! inside `E_1` coordinates, where `Zr` holds the top components of chains
//! `x` in `F(i)` with `d x` in `F(i - r)` and `Br` the top components of
//! boundaries `d y` in `F(i)` with `y` in `F(i + r - 1)`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ext::{differential_images, ext_basis, max_basis, ChainBasis, ExtClass};
use crate::gf2::{BitMatrix, BitVector, Echelon};
use crate::lambda::LambdaChain;
use crate::modules::{sphere, FiniteAModule, ModuleChain};
use crate::naming::sphere_class_name;

/// Stems `stem_min..=stem_max` and `0 <= s <= s_max`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SsWindow {
    pub stem_min: u32,
    pub stem_max: u32,
    pub s_max: u32,
}

/// Position `(i, s, stem)` of an entry.
pub type Position = (u32, u32, u32);

#[derive(Clone, Debug)]
pub struct PageEntry {
    /// Basis in `E_1` coordinates, reduced against `Br`.
    pub basis: Vec<BitVector>,
    /// Chains in `Zr` lifting the basis.
    pub lifts: Vec<ModuleChain>,
    pub names: Vec<String>,
}

impl PageEntry {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

#[derive(Clone, Debug)]
pub struct Differential {
    pub source: Position,
    pub target: Position,
    /// Columns indexed by the source basis.
    pub matrix: BitMatrix,
    /// Names of the target basis, which may lie outside the window.
    pub target_names: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct SSPage {
    pub module: Arc<FiniteAModule>,
    pub r: u32,
    pub window: SsWindow,
    pub entries: BTreeMap<Position, PageEntry>,
    pub differentials: Vec<Differential>,
}

impl SSPage {
    pub fn dim(&self, p: Position) -> usize {
        self.entries.get(&p).map_or(0, |e| e.dim())
    }

    /// Nonzero differentials in the form `e_i a -> e_j b`.
    pub fn arrows(&self) -> Vec<String> {
        let mut out = vec![];
        for d in &self.differentials {
            let src = &self.entries[&d.source];
            for (k, name) in src.names.iter().enumerate() {
                let img = d.matrix.column(k);
                if img.is_zero() {
                    continue;
                }
                let rhs: Vec<String> = img.ones().map(|j| d.target_names[j].clone()).collect();
                out.push(format!("{} -> {}", name, rhs.join(" + ")));
            }
        }
        out
    }
}

/// Name of a permanent cycle, `e_i a`, with `a` a class of the sphere.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PermanentCycleName {
    pub i: u32,
    /// Sphere coordinates of `a` per cell of degree `i`.
    pub alpha: Vec<(String, Vec<usize>)>,
    pub label: String,
}

impl fmt::Display for PermanentCycleName {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str(&self.label)
    }
}

/// Page `r` on which entry `(i, s, stem)` has become `E_infinity`.
pub fn converged_at(module: &FiniteAModule, i: u32, stem: u32) -> u32 {
    let lo = module.min_degree().unwrap_or(0);
    let hi = module.max_degree().unwrap_or(0).min(stem + 1);
    (i - lo).max(hi.saturating_sub(i)) + 1
}

fn label(i: u32, alpha: &str) -> String {
    if alpha == "1" {
        format!("\u{113}{}", i)
    } else {
        format!("\u{113}{} {}", i, alpha)
    }
}

struct Column {
    module: Arc<FiniteAModule>,
    s: u32,
    stem: u32,
    prev: ChainBasis,
    cur: ChainBasis,
    next_len: usize,
    next_deg: Vec<u32>,
    d_prev: Vec<BitVector>,
    d_cur: Vec<BitVector>,
    degrees: Vec<u32>,
}

fn degs(module: &FiniteAModule, b: &ChainBasis) -> Vec<u32> {
    b.terms.iter().map(|(c, _)| module.degree(*c)).collect()
}

/// Combinations of `images` that vanish, as vectors over the image index.
fn kernel_of(images: &[BitVector], width: usize) -> Vec<BitVector> {
    let n = images.len();
    let mut e = Echelon::with_tags(width);
    let mut out = vec![];
    for (j, v) in images.iter().enumerate() {
        if let Err(rel) = e.insert_tagged(v.clone(), BitVector::unit(n, j)) {
            out.push(rel);
        }
    }
    out
}

fn mask(v: &BitVector, keep: impl Fn(usize) -> bool) -> BitVector {
    BitVector::from_indices(v.len(), v.ones().filter(|&k| keep(k)))
}

impl Column {
    fn new(module: &Arc<FiniteAModule>, s: u32, stem: u32) -> Result<Column> {
        let cap = max_basis();
        let cur = ChainBasis::new(module, s, stem as i64, cap)?;
        let prev = if s == 0 { ChainBasis::new(module, 0, -1, cap)? } else { ChainBasis::new(module, s - 1, stem as i64 + 1, cap)? };
        let next = ChainBasis::new(module, s + 1, stem as i64 - 1, cap)?;
        let d_prev = differential_images(module, &prev, &cur);
        let d_cur = differential_images(module, &cur, &next);
        let mut degrees: Vec<u32> = degs(module, &cur).into_iter().collect();
        degrees.dedup();
        degrees.reverse();
        Ok(Column { module: module.clone(), s, stem, next_len: next.len(), next_deg: degs(module, &next), prev, cur, d_prev, d_cur, degrees })
    }

    fn cur_deg(&self, k: usize) -> u32 {
        self.module.degree(self.cur.terms[k].0)
    }

    /// Sphere coordinates of the degree `i` part of `x`, one block per cell.
    fn e1_coords(&self, x: &BitVector, i: u32) -> Result<BitVector> {
        let cells: Vec<usize> = (0..self.module.num_cells()).filter(|&c| self.module.degree(c) == i).collect();
        let basis = ext_basis(&sphere(0), self.s, self.s + self.stem - i)?;
        let s0 = sphere(0);
        let mut out = BitVector::zeros(0);
        for c in cells {
            let monos = x.ones().filter(|&k| self.cur.terms[k].0 == c).map(|k| self.cur.terms[k].1.clone()).collect();
            let chain = ModuleChain::cell_times(s0.clone(), 0, &LambdaChain::from_terms(monos));
            let coords = if chain.is_zero() { BitVector::zeros(basis.dim()) } else { basis.coords(&chain)? };
            out = out.concat(&coords);
        }
        Ok(out)
    }

    fn e1_dim(&self, i: u32) -> Result<usize> {
        let cells = (0..self.module.num_cells()).filter(|&c| self.module.degree(c) == i).count();
        if i > self.stem {
            return Ok(0);
        }
        Ok(cells * ext_basis(&sphere(0), self.s, self.s + self.stem - i)?.dim())
    }

    /// Pairs `(E_1 coordinates, chain)` spanning `Zr` in filtration `i`.
    fn z_bar(&self, i: u32, r: u32) -> Result<Vec<(BitVector, BitVector)>> {
        let idx: Vec<usize> = (0..self.cur.len()).filter(|&k| self.cur_deg(k) <= i).collect();
        let floor = i as i64 - r as i64;
        let images: Vec<BitVector> = idx.iter().map(|&k| mask(&self.d_cur[k], |q| self.next_deg[q] as i64 > floor)).collect();
        let mut out = vec![];
        for rel in kernel_of(&images, self.next_len) {
            let x = BitVector::from_indices(self.cur.len(), rel.ones().map(|j| idx[j]));
            let e = self.e1_coords(&x, i)?;
            if !e.is_zero() {
                out.push((e, x));
            }
        }
        Ok(out)
    }

    /// `E_1` coordinates spanning `Br` in filtration `i`.
    fn b_bar(&self, i: u32, r: u32) -> Result<Vec<BitVector>> {
        let top = i + r - 1;
        let idx: Vec<usize> = (0..self.prev.len()).filter(|&k| self.module.degree(self.prev.terms[k].0) <= top).collect();
        let images: Vec<BitVector> = idx.iter().map(|&k| mask(&self.d_prev[k], |q| self.cur_deg(q) > i)).collect();
        let mut out = vec![];
        for rel in kernel_of(&images, self.cur.len()) {
            let mut y = BitVector::zeros(self.cur.len());
            for j in rel.ones() {
                y.add_assign(&self.d_prev[idx[j]]);
            }
            let e = self.e1_coords(&y, i)?;
            if !e.is_zero() {
                out.push(e);
            }
        }
        Ok(out)
    }
}

/// Page data of one entry: reduced boundaries and the quotient basis.
struct Slot {
    boundaries: Echelon,
    quotient: Echelon,
    entry: PageEntry,
}

impl Slot {
    /// Coordinates of an element of `Zr` in the quotient basis.
    fn coords(&self, v: &BitVector) -> BitVector {
        let v = self.boundaries.reduce(v);
        let piv = self.quotient.pivots();
        BitVector::from_indices(piv.len(), (0..piv.len()).filter(|&k| v.get(piv[k])))
    }
}

struct Engine {
    module: Arc<FiniteAModule>,
    columns: HashMap<(u32, u32), Arc<Column>>,
    slots: HashMap<(u32, Position), Arc<Slot>>,
}

impl Engine {
    fn column(&mut self, s: u32, stem: u32) -> Result<Arc<Column>> {
        if let Some(c) = self.columns.get(&(s, stem)) {
            return Ok(c.clone());
        }
        let c = Arc::new(Column::new(&self.module, s, stem)?);
        self.columns.insert((s, stem), c.clone());
        Ok(c)
    }

    fn slot(&mut self, r: u32, p: Position) -> Result<Arc<Slot>> {
        if let Some(x) = self.slots.get(&(r, p)) {
            return Ok(x.clone());
        }
        let (i, s, stem) = p;
        let col = self.column(s, stem)?;
        let n = col.e1_dim(i)?;
        let mut boundaries = Echelon::new(n);
        for b in col.b_bar(i, r)? {
            boundaries.insert(b);
        }
        let boundaries = boundaries.into_reduced();
        let z = col.z_bar(i, r)?;
        let mut quotient = Echelon::with_tags(n);
        for (k, (e, _)) in z.iter().enumerate() {
            let _ = quotient.insert_tagged(boundaries.reduce(e), BitVector::unit(z.len(), k));
        }
        let quotient = quotient.into_reduced();
        let mut lifts = vec![];
        for tag in quotient.tags() {
            let mut x = BitVector::zeros(col.cur.len());
            for k in tag.ones() {
                x.add_assign(&z[k].1);
            }
            lifts.push(col.cur.chain(&self.module, &x));
        }
        let names = quotient.rows().iter().map(|v| self.name(i, s, stem, v)).collect::<Result<Vec<_>>>()?;
        let slot = Arc::new(Slot { boundaries, entry: PageEntry { basis: quotient.rows().to_vec(), lifts, names }, quotient });
        self.slots.insert((r, p), slot.clone());
        Ok(slot)
    }

    fn name(&self, i: u32, s: u32, stem: u32, v: &BitVector) -> Result<String> {
        let cells: Vec<usize> = (0..self.module.num_cells()).filter(|&c| self.module.degree(c) == i).collect();
        let dim = ext_basis(&sphere(0), s, s + stem - i)?.dim();
        let mut parts = vec![];
        for (b, &c) in cells.iter().enumerate() {
            let block = BitVector::from_indices(dim, (0..dim).filter(|&k| v.get(b * dim + k)));
            if block.is_zero() {
                continue;
            }
            let alpha = sphere_class_name(s, stem - i, &block)?;
            parts.push(if cells.len() == 1 { label(i, &alpha) } else { label_cell(self.module.cell_id(c), &alpha) });
        }
        Ok(parts.join(" + "))
    }

    fn differential(&mut self, r: u32, p: Position) -> Result<Option<Differential>> {
        let (i, s, stem) = p;
        if i < r || stem == 0 {
            return Ok(None);
        }
        let target = (i - r, s + 1, stem - 1);
        let lo = self.module.min_degree().unwrap_or(0);
        if target.0 < lo {
            return Ok(None);
        }
        let src = self.slot(r, p)?;
        let tgt = self.slot(r, target)?;
        let tcol = self.column(s + 1, stem - 1)?;
        let mut cols = vec![];
        for x in &src.entry.lifts {
            let dx = crate::modules::module_delta(x);
            debug_assert!(dx.top_degree().map_or(true, |d| d <= target.0));
            let v = tcol.cur.vector(&dx)?;
            cols.push(tgt.coords(&tcol.e1_coords(&v, target.0)?));
        }
        Ok(Some(Differential { source: p, target, matrix: BitMatrix::from_columns(tgt.entry.dim(), &cols)?, target_names: tgt.entry.names.clone() }))
    }
}

fn label_cell(id: &str, alpha: &str) -> String {
    let bar = format!("\u{304}{}", id);
    if alpha == "1" {
        bar
    } else {
        format!("{} {}", bar, alpha)
    }
}

/// Pages `1..=r_max` over the window.
pub fn compute_pages(module: &Arc<FiniteAModule>, window: SsWindow, r_max: u32) -> Result<Vec<SSPage>> {
    let mut eng = Engine { module: module.clone(), columns: HashMap::new(), slots: HashMap::new() };
    let mut pages = vec![];
    for r in 1..=r_max.max(1) {
        let mut entries = BTreeMap::new();
        let mut differentials = vec![];
        for stem in window.stem_min..=window.stem_max {
            for s in 0..=window.s_max {
                let degrees = eng.column(s, stem)?.degrees.clone();
                for i in degrees {
                    let p = (i, s, stem);
                    let slot = eng.slot(r, p)?;
                    if slot.entry.dim() == 0 {
                        continue;
                    }
                    entries.insert(p, slot.entry.clone());
                    if let Some(d) = eng.differential(r, p)? {
                        if !d.matrix.is_zero() {
                            differentials.push(d);
                        }
                    }
                }
            }
        }
        pages.push(SSPage { module: module.clone(), r, window, entries, differentials });
    }
    Ok(pages)
}

/// Number of pages after which every entry of the window is permanent.
pub fn pages_needed(module: &FiniteAModule, window: SsWindow) -> u32 {
    let (lo, hi) = (module.min_degree().unwrap_or(0), module.max_degree().unwrap_or(0));
    (window.stem_min..=window.stem_max).map(|n| (lo..=hi.min(n + 1)).map(|i| converged_at(module, i, n)).max().unwrap_or(1)).max().unwrap_or(1)
}

/// Totals `sum_i dim E_infinity^{i,s,stem}` keyed by `(s, stem)`.
pub fn assemble_einf(pages: &[SSPage]) -> Result<BTreeMap<(u32, u32), usize>> {
    let mut out = BTreeMap::new();
    let Some(last) = pages.last() else {
        return Ok(out);
    };
    for (&(i, s, stem), e) in &last.entries {
        if last.r < converged_at(&last.module, i, stem) {
            return Err(Error::NotConverged { i, s, stem });
        }
        *out.entry((s, stem)).or_insert(0) += e.dim();
    }
    Ok(out)
}

/// The `E_infinity` name of a nonzero class: the top filtration component
/// of a representative of minimal filtration.
pub fn locate_class(class: &ExtClass) -> Result<PermanentCycleName> {
    if class.is_zero() {
        return Err(Error::ZeroChain);
    }
    let basis = ext_basis(&class.module, class.s, class.t)?;
    let rep = basis.class_chain(&class.coords);
    let v = basis.reduce_vector(&basis.chains().vector(&rep)?);
    let rep = basis.chains().chain(&class.module, &v);
    let i = rep.top_degree().ok_or(Error::ZeroChain)?;
    let m = &class.module;
    let cells: Vec<usize> = (0..m.num_cells()).filter(|&c| m.degree(c) == i).collect();
    let mut alpha = vec![];
    let mut parts = vec![];
    for &c in &cells {
        let comp = rep.component(c);
        if comp.is_zero() {
            continue;
        }
        let coords = match crate::ext::sphere_class_coords(&comp)? {
            crate::ext::ClassCoords::Class(v) => v,
            crate::ext::ClassCoords::Boundary(_) => return Err(Error::Domain("top component is a boundary".into())),
        };
        let name = sphere_class_name(class.s, class.t - class.s - i, &coords)?;
        parts.push(if cells.len() == 1 { label(i, &name) } else { label_cell(m.cell_id(c), &name) });
        alpha.push((m.cell_id(c).to_string(), coords.ones().collect()));
    }
    Ok(PermanentCycleName { i, alpha, label: parts.join(" + ") })
}
