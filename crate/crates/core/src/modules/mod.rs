//! Finite modules over the Steenrod algebra and their chain complexes
//! `H_*(X) (x) Lambda`.

pub(crate) mod chain;
mod file;
mod morphism;

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::gf2::binom_mod2;
use crate::lambda::{admissible_basis, NORMALIZATION_VERSION};

pub use chain::{module_delta, module_sq0, reduce_mod_f, transfer_chain, ModuleChain};
pub use file::{module_from_file, module_from_str, module_to_string};
pub use morphism::ModuleMorphism;

/// Top cell used for the stand-in of the infinite projective space.
pub const P_INFINITE_TOP: u32 = 1023;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub id: String,
    pub degree: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Window {
    pub s_max: u32,
    pub stem_max: u32,
}

/// Cells `e_l .. e_m` of a stunted projective space, cell `k` at index `k - l`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ProjectiveRange {
    pub l: u32,
    pub m: u32,
    /// The module stands for the infinite space truncated above `m`.
    pub infinite: bool,
}

#[derive(Clone, Debug)]
pub struct FiniteAModule {
    name: String,
    cells: Vec<Cell>,
    index: HashMap<String, usize>,
    /// Per cell: nonzero `(n, cell Sq^n)` sorted by `n`.
    action: Vec<Vec<(u32, Vec<usize>)>>,
    projective: Option<ProjectiveRange>,
    window_hint: Option<Window>,
    fingerprint: String,
}

impl PartialEq for FiniteAModule {
    fn eq(&self, other: &Self) -> bool {
        self.fingerprint == other.fingerprint
    }
}

impl Eq for FiniteAModule {}

impl FiniteAModule {
    /// Build a module from cells and a table of nonzero action entries. Cells
    /// are stored by ascending degree, ties kept in the given order.
    pub fn new(name: &str, cells: Vec<Cell>, entries: &[(String, u32, Vec<String>)]) -> Result<Self> {
        let mut cells = cells;
        cells.sort_by_key(|c| c.degree);
        let mut index = HashMap::new();
        for (i, c) in cells.iter().enumerate() {
            if index.insert(c.id.clone(), i).is_some() {
                return Err(Error::InvalidAction(format!("duplicate cell id {}", c.id)));
            }
        }
        let mut action: Vec<Vec<(u32, Vec<usize>)>> = vec![vec![]; cells.len()];
        for (id, n, value) in entries {
            let &c = index.get(id).ok_or_else(|| Error::InvalidAction(format!("unknown cell {}", id)))?;
            if *n == 0 {
                return Err(Error::InvalidAction(format!("Sq^0 entry on {}", id)));
            }
            if action[c].iter().any(|(k, _)| k == n) {
                return Err(Error::InvalidAction(format!("duplicate entry {} Sq^{}", id, n)));
            }
            let mut targets = vec![];
            for v in value {
                let &d = index.get(v).ok_or_else(|| Error::InvalidAction(format!("unknown cell {}", v)))?;
                if cells[d].degree + n != cells[c].degree {
                    return Err(Error::InvalidAction(format!("{} Sq^{} = {} has the wrong degree", id, n, v)));
                }
                if let Some(p) = targets.iter().position(|&x| x == d) {
                    targets.remove(p);
                } else {
                    targets.push(d);
                }
            }
            targets.sort_unstable();
            if !targets.is_empty() {
                action[c].push((*n, targets));
            }
        }
        for a in action.iter_mut() {
            a.sort_by_key(|(n, _)| *n);
        }
        let mut m = FiniteAModule { name: name.to_string(), cells, index, action, projective: None, window_hint: None, fingerprint: String::new() };
        m.refresh_fingerprint();
        Ok(m)
    }

    fn refresh_fingerprint(&mut self) {
        let mut h = Sha256::new();
        h.update(format!("v{};", NORMALIZATION_VERSION));
        for (i, c) in self.cells.iter().enumerate() {
            h.update(format!("{}:{};", c.id, c.degree));
            for (n, t) in &self.action[i] {
                h.update(format!("{}^{}={:?};", i, n, t));
            }
        }
        if let Some(p) = self.projective {
            h.update(format!("P{}:{}:{}", p.l, p.m, p.infinite));
        }
        self.fingerprint = h.finalize().iter().map(|b| format!("{:02x}", b)).collect();
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    pub fn with_window_hint(mut self, w: Window) -> Self {
        self.window_hint = Some(w);
        self
    }

    pub fn window_hint(&self) -> Option<Window> {
        self.window_hint
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn degree(&self, cell: usize) -> u32 {
        self.cells[cell].degree
    }

    pub fn cell_id(&self, cell: usize) -> &str {
        &self.cells[cell].id
    }

    pub fn cell_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn projective(&self) -> Option<ProjectiveRange> {
        self.projective
    }

    pub fn is_p_type(&self) -> bool {
        self.projective.is_some()
    }

    /// Cell of degree `k` in a projective-type module.
    pub fn projective_cell(&self, k: u32) -> Option<usize> {
        let p = self.projective?;
        (p.l..=p.m).contains(&k).then(|| (k - p.l) as usize)
    }

    /// `cell Sq^n` as a sorted list of cells.
    pub fn sq(&self, cell: usize, n: u32) -> &[usize] {
        match self.action[cell].binary_search_by_key(&n, |(k, _)| *k) {
            Ok(i) => &self.action[cell][i].1,
            Err(_) => &[],
        }
    }

    pub fn action_entries(&self, cell: usize) -> &[(u32, Vec<usize>)] {
        &self.action[cell]
    }

    pub fn min_degree(&self) -> Option<u32> {
        self.cells.first().map(|c| c.degree)
    }

    pub fn max_degree(&self) -> Option<u32> {
        self.cells.last().map(|c| c.degree)
    }

    /// Cells of degree at most `d`, highest degree first.
    pub fn cells_up_to(&self, d: i64) -> impl Iterator<Item = usize> + '_ {
        (0..self.cells.len()).rev().filter(move |&c| self.cells[c].degree as i64 <= d)
    }

    /// Chain basis of `H_*(X) (x) Lambda` in homological degree `s` and stem
    /// `n`: top cells first, then monomials in lexicographic order.
    pub fn chain_basis(&self, s: u32, stem: u32) -> Vec<(usize, crate::lambda::LambdaMonomial)> {
        let mut out = vec![];
        for c in self.cells_up_to(stem as i64) {
            for m in admissible_basis(s, stem - self.degree(c)).iter() {
                out.push((c, m.clone()));
            }
        }
        out
    }

    pub fn chain_basis_len(&self, s: u32, stem: u32) -> usize {
        self.cells_up_to(stem as i64).map(|c| admissible_basis(s, stem - self.degree(c)).len()).sum()
    }

    /// Action table in the file triple form.
    pub fn entries(&self) -> Vec<(String, u32, Vec<String>)> {
        let mut out = vec![];
        for (c, a) in self.action.iter().enumerate() {
            for (n, t) in a {
                out.push((self.cells[c].id.clone(), *n, t.iter().map(|&d| self.cells[d].id.clone()).collect()));
            }
        }
        out
    }
}

impl fmt::Display for FiniteAModule {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "{} ({} cells)", self.name, self.cells.len())
    }
}

pub fn sphere(l: u32) -> Arc<FiniteAModule> {
    let name = if l == 0 { "S0".to_string() } else { format!("S{}", l) };
    Arc::new(FiniteAModule::new(&name, vec![Cell { id: format!("e{}", l), degree: l }], &[]).expect("sphere"))
}

fn projective_entries(l: u32, m: u32) -> Vec<(String, u32, Vec<String>)> {
    let mut entries = vec![];
    for k in l..=m {
        for n in 1..=k {
            if k - n >= l && binom_mod2((k - n) as i64, n as i64) {
                entries.push((format!("e{}", k), n, vec![format!("e{}", k - n)]));
            }
        }
    }
    entries
}

fn projective_cells(l: u32, m: u32) -> Vec<Cell> {
    (l..=m).map(|k| Cell { id: format!("e{}", k), degree: k }).collect()
}

/// `P^m_l`, cells `e_l .. e_m` with `e_k Sq^n = C(k-n, n) e_{k-n}`.
pub fn stunted_projective(l: u32, m: u32) -> Result<Arc<FiniteAModule>> {
    if l == 0 || l > m {
        return Err(Error::Domain(format!("need 1 <= l <= m, got l={} m={}", l, m)));
    }
    let name = if l == 1 { format!("P{}", m) } else { format!("P{}_{}", m, l) };
    let mut module = FiniteAModule::new(&name, projective_cells(l, m), &projective_entries(l, m))?;
    module.projective = Some(ProjectiveRange { l, m, infinite: false });
    module.refresh_fingerprint();
    Ok(Arc::new(module))
}

/// The infinite projective space, truncated far above any window in use.
pub fn projective_infinite() -> Arc<FiniteAModule> {
    static P: once_cell::sync::Lazy<Arc<FiniteAModule>> = once_cell::sync::Lazy::new(|| {
        let mut module = FiniteAModule::new("P", projective_cells(1, P_INFINITE_TOP), &projective_entries(1, P_INFINITE_TOP)).expect("P");
        module.projective = Some(ProjectiveRange { l: 1, m: P_INFINITE_TOP, infinite: true });
        module.refresh_fingerprint();
        Arc::new(module)
    });
    P.clone()
}

/// `P_l`, the infinite space with cells below `l` removed.
pub fn projective_infinite_from(l: u32) -> Result<Arc<FiniteAModule>> {
    if l == 1 {
        return Ok(projective_infinite());
    }
    if l == 0 || l > P_INFINITE_TOP {
        return Err(Error::Domain(format!("bottom cell {} out of range", l)));
    }
    let mut module = FiniteAModule::new(&format!("P_{}", l), projective_cells(l, P_INFINITE_TOP), &projective_entries(l, P_INFINITE_TOP))?;
    module.projective = Some(ProjectiveRange { l, m: P_INFINITE_TOP, infinite: true });
    module.refresh_fingerprint();
    Ok(Arc::new(module))
}

const BUNDLED_MODULES: &[(&str, &str)] = &[("M2.mod", include_str!("../../data/modules/M2.mod")), ("W1.mod", include_str!("../../data/modules/W1.mod"))];

/// Text of a module file shipped with the crate.
pub fn bundled_module(name: &str) -> Option<&'static str> {
    BUNDLED_MODULES.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

/// Module named by a short spec: `S0`, `S<k>`, `P`, `P(l,m)`, `P(l,inf)`,
/// `Pt62`, `Pt62(l)`, `M2` or `file:<path>` (relative to `base`, falling back to the bundled
/// module files).
pub fn resolve(spec: &str, base: Option<&std::path::Path>) -> Result<Arc<FiniteAModule>> {
    let spec = spec.trim();
    let bad = || Error::UnknownName(format!("module {}", spec));
    if let Some(path) = spec.strip_prefix("file:") {
        let p = std::path::Path::new(path);
        let p = match base {
            Some(b) if p.is_relative() => b.join(p),
            _ => p.to_path_buf(),
        };
        if !p.exists() {
            if let Some(text) = bundled_module(path) {
                return file::module_from_str(text);
            }
        }
        return file::module_from_file(p);
    }
    let args = |s: &str| -> Result<Vec<String>> {
        let inner = s.strip_prefix('(').and_then(|x| x.strip_suffix(')')).ok_or_else(bad)?;
        Ok(inner.split(',').map(|x| x.trim().to_string()).collect())
    };
    let num = |s: &str| s.parse::<u32>().map_err(|_| bad());
    match spec {
        "S0" | "sphere" => return Ok(sphere(0)),
        "P" => return Ok(projective_infinite()),
        "Pt62" => return Ok(tilde_p62()),
        "M2" => return stunted_projective(1, 2).map(|m| Arc::new((*m).clone().with_name("M2"))),
        _ => {}
    }
    if let Some(rest) = spec.strip_prefix("Pt62") {
        let a = args(rest)?;
        return match a.as_slice() {
            [l] => tilde_p62_stunted(num(l)?),
            _ => Err(bad()),
        };
    }
    if let Some(rest) = spec.strip_prefix('P') {
        let a = args(rest)?;
        return match a.as_slice() {
            [m] => stunted_projective(1, num(m)?),
            [l, m] if m == "inf" => projective_infinite_from(num(l)?),
            [l, m] => stunted_projective(num(l)?, num(m)?),
            _ => Err(bad()),
        };
    }
    if let Some(k) = spec.strip_prefix('S') {
        return Ok(sphere(num(k)?));
    }
    Err(bad())
}

/// `P^62` with `e31` replaced by `et31`, where `et31 Sq^16 = e15` and every
/// other entry into or out of `et31` vanishes.
pub fn tilde_p62() -> Arc<FiniteAModule> {
    tilde_p62_stunted(1).expect("tilde P62")
}

/// Quotient of the tilde module by the cells below `l`.
pub fn tilde_p62_stunted(l: u32) -> Result<Arc<FiniteAModule>> {
    if l == 0 || l > 62 {
        return Err(Error::Domain(format!("bottom cell {} outside 1..62", l)));
    }
    let id = |k: u32| if k == 31 { "et31".to_string() } else { format!("e{}", k) };
    let cells: Vec<Cell> = (l..=62).map(|k| Cell { id: id(k), degree: k }).collect();
    let mut entries = vec![];
    for k in l..=62 {
        if k == 31 {
            if l <= 15 {
                entries.push((id(31), 16, vec![id(15)]));
            }
            continue;
        }
        for n in 1..=k {
            if k - n >= l && k - n != 31 && binom_mod2((k - n) as i64, n as i64) {
                entries.push((id(k), n, vec![id(k - n)]));
            }
        }
    }
    let name = if l == 1 { "Pt62".to_string() } else { format!("Pt62_{}", l) };
    Ok(Arc::new(FiniteAModule::new(&name, cells, &entries)?))
}

/// Shift all degrees by `k`. Ids of the form `e<degree>` are renamed.
pub fn suspend(m: &FiniteAModule, k: u32) -> Result<Arc<FiniteAModule>> {
    let rename = |c: &Cell| -> String {
        if c.id == format!("e{}", c.degree) {
            format!("e{}", c.degree + k)
        } else {
            c.id.clone()
        }
    };
    let cells: Vec<Cell> = m.cells.iter().map(|c| Cell { id: rename(c), degree: c.degree + k }).collect();
    let entries: Vec<(String, u32, Vec<String>)> = (0..m.cells.len())
        .flat_map(|c| m.action[c].iter().map(move |(n, t)| (c, *n, t.clone())))
        .map(|(c, n, t)| (rename(&m.cells[c]), n, t.iter().map(|&d| rename(&m.cells[d])).collect()))
        .collect();
    Ok(Arc::new(FiniteAModule::new(&format!("S{}{}", k, m.name), cells, &entries)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SubQuotient {
    /// Keep exactly the given cells; they must span a submodule.
    Sub,
    /// Kill the given cells; they must span a submodule.
    Quotient,
}

fn closed(m: &FiniteAModule, set: &[bool]) -> Option<String> {
    for c in 0..m.cells.len() {
        if !set[c] {
            continue;
        }
        for (n, t) in &m.action[c] {
            if let Some(&d) = t.iter().find(|&&d| !set[d]) {
                return Some(format!("{} Sq^{} involves {}", m.cells[c].id, n, m.cells[d].id));
            }
        }
    }
    None
}

/// Sub- or quotient module on a set of cells, with the inclusion or the
/// projection.
pub fn sub_quotient(m: &Arc<FiniteAModule>, cells: &[&str], kind: SubQuotient) -> Result<(Arc<FiniteAModule>, ModuleMorphism)> {
    let mut set = vec![false; m.cells.len()];
    for id in cells {
        let c = m.cell_index(id).ok_or_else(|| Error::UnknownName(id.to_string()))?;
        set[c] = true;
    }
    if let Some(why) = closed(m, &set) {
        return Err(Error::NotActionClosed(why));
    }
    let keep: Vec<usize> = (0..m.cells.len()).filter(|&c| set[c] == (kind == SubQuotient::Sub)).collect();
    let new_cells: Vec<Cell> = keep.iter().map(|&c| m.cells[c].clone()).collect();
    let mut entries = vec![];
    for &c in &keep {
        for (n, t) in &m.action[c] {
            let t: Vec<String> = t.iter().filter(|d| keep.contains(d)).map(|&d| m.cells[d].id.clone()).collect();
            if !t.is_empty() {
                entries.push((m.cells[c].id.clone(), *n, t));
            }
        }
    }
    let suffix = match kind {
        SubQuotient::Sub => "sub",
        SubQuotient::Quotient => "quot",
    };
    let mut out = FiniteAModule::new(&format!("{}_{}", m.name, suffix), new_cells, &entries)?;
    if let Some(p) = m.projective {
        let degs: Vec<u32> = out.cells.iter().map(|c| c.degree).collect();
        let (lo, hi) = (degs.first().copied().unwrap_or(0), degs.last().copied().unwrap_or(0));
        let consecutive = degs.iter().enumerate().all(|(i, &d)| d == lo + i as u32);
        if consecutive && !degs.is_empty() && (kind == SubQuotient::Quotient && hi == p.m || kind == SubQuotient::Sub && lo == p.l) {
            out.projective = Some(ProjectiveRange { l: lo, m: hi, infinite: p.infinite && hi == p.m });
            out.refresh_fingerprint();
        }
    }
    let out = Arc::new(out);
    let map = match kind {
        SubQuotient::Sub => ModuleMorphism::new(out.clone(), m.clone(), out.cells.iter().map(|c| vec![m.cell_index(&c.id).unwrap()]).collect())?,
        SubQuotient::Quotient => ModuleMorphism::new(m.clone(), out.clone(), m.cells.iter().map(|c| out.cell_index(&c.id).into_iter().collect()).collect())?,
    };
    Ok((out, map))
}

/// Report of a successful `d^2 = 0` sweep.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub checked: usize,
    pub window: Window,
}

/// Check `d^2 = 0` on every chain basis element with `s <= s_max` and stem
/// `<= stem_max`.
pub fn validate_module(m: &Arc<FiniteAModule>, window: Window) -> Result<ValidationReport> {
    use rayon::prelude::*;
    let jobs: Vec<(u32, u32)> = (0..=window.s_max).flat_map(|s| (0..=window.stem_max).map(move |n| (s, n))).collect();
    let counts: Vec<Result<usize>> = jobs
        .par_iter()
        .map(|&(s, n)| {
            let basis = m.chain_basis(s, n);
            for (c, mono) in &basis {
                let x = ModuleChain::from_terms(m.clone(), vec![(*c, mono.clone())]);
                let dd = module_delta(&module_delta(&x));
                if !dd.is_zero() {
                    return Err(Error::InvalidAction(format!("d^2 != 0 on {}: {}", x, dd)));
                }
            }
            Ok(basis.len())
        })
        .collect();
    let mut checked = 0;
    for c in counts {
        checked += c?;
    }
    Ok(ValidationReport { checked, window })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spheres() {
        let s = sphere(47);
        assert_eq!(s.num_cells(), 1);
        assert_eq!(s.degree(0), 47);
        assert_eq!(sphere(0).cell_id(0), "e0");
    }

    #[test]
    fn projective_action() {
        let p = stunted_projective(1, 8).unwrap();
        let e = |k: u32| p.projective_cell(k).unwrap();
        assert_eq!(p.sq(e(2), 1), &[e(1)]);
        assert!(p.sq(e(3), 1).is_empty());
        assert_eq!(p.sq(e(5), 2), &[e(3)]);
        assert!(p.sq(e(6), 2).is_empty());
        assert_eq!(p.sq(e(6), 1), &[e(5)]);
        assert_eq!(p.sq(e(4), 2), &[e(2)]);
        assert!(p.sq(e(4), 3).is_empty());
        assert_eq!(p.sq(e(8), 4), &[e(4)]);
        let p = projective_infinite();
        let e15 = p.projective_cell(15).unwrap();
        assert!((1..=15).all(|n| p.sq(e15, n).is_empty()));
        assert!(stunted_projective(0, 3).is_err());
    }

    #[test]
    fn stunted_truncates() {
        let p = stunted_projective(15, 18).unwrap();
        assert_eq!(p.num_cells(), 4);
        let e16 = p.projective_cell(16).unwrap();
        assert_eq!(p.sq(e16, 1), &[p.projective_cell(15).unwrap()]);
        let e18 = p.projective_cell(18).unwrap();
        assert!(p.sq(e18, 8).is_empty());
    }

    #[test]
    fn tilde_module() {
        let m = tilde_p62();
        assert_eq!(m.num_cells(), 62);
        let t = m.cell_index("et31").unwrap();
        assert!(m.cell_index("e31").is_none());
        assert_eq!(m.sq(t, 16), &[m.cell_index("e15").unwrap()]);
        assert_eq!(m.action_entries(t).len(), 1);
        for c in 0..m.num_cells() {
            for (_, v) in m.action_entries(c) {
                assert!(!v.contains(&t));
            }
        }
        let q = tilde_p62_stunted(17).unwrap();
        assert!(q.action_entries(q.cell_index("et31").unwrap()).is_empty());
    }

    #[test]
    fn sub_quotients() {
        let p = stunted_projective(1, 4).unwrap();
        let (s, f) = sub_quotient(&p, &["e1"], SubQuotient::Sub).unwrap();
        assert_eq!(s.num_cells(), 1);
        assert_eq!(f.target().num_cells(), 4);
        assert!(matches!(sub_quotient(&p, &["e2"], SubQuotient::Sub), Err(Error::NotActionClosed(_))));
        let (q, _) = sub_quotient(&stunted_projective(1, 62).unwrap(), &["e31"], SubQuotient::Quotient).unwrap();
        assert_eq!(q.num_cells(), 61);
        assert!(matches!(sub_quotient(&p, &["e2", "e3"], SubQuotient::Quotient), Err(Error::NotActionClosed(_))));
    }

    #[test]
    fn bad_degree_rejected() {
        let cells = vec![Cell { id: "e1".into(), degree: 1 }, Cell { id: "e2".into(), degree: 2 }];
        let r = FiniteAModule::new("bad", cells, &[("e2".into(), 2, vec!["e1".into()])]);
        assert!(matches!(r, Err(Error::InvalidAction(_))));
    }

    #[test]
    fn small_modules_square_to_zero() {
        let w = Window { s_max: 3, stem_max: 16 };
        assert!(validate_module(&stunted_projective(1, 12).unwrap(), w).is_ok());
        assert!(validate_module(&stunted_projective(5, 12).unwrap(), w).is_ok());
        assert!(validate_module(&tilde_p62_stunted(10).unwrap(), Window { s_max: 2, stem_max: 34 }).is_ok());
    }

    #[test]
    fn inconsistent_action_detected() {
        // e2 Sq^1 = e1 with e1 Sq^1 = e0 violates Sq^1 Sq^1 = 0.
        let cells = (0..3).map(|k| Cell { id: format!("e{}", k), degree: k }).collect();
        let m = Arc::new(FiniteAModule::new("bad", cells, &[("e2".into(), 1, vec!["e1".into()]), ("e1".into(), 1, vec!["e0".into()])]).unwrap());
        assert!(matches!(validate_module(&m, Window { s_max: 2, stem_max: 4 }), Err(Error::InvalidAction(_))));
    }
}
