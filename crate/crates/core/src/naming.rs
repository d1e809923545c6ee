//! Names for classes of the sphere as products of registry classes.

use std::sync::Arc;

use dashmap::DashMap;
use once_cell::sync::Lazy;

use crate::error::Result;
use crate::ext::{ext_basis, sphere_class_coords, ClassCoords};
use crate::gf2::{BitVector, Echelon};
use crate::lambda::{multiply, LambdaChain};
use crate::registry::load_registry;

/// Basis of one bidegree named by monomials in the generators, completed by
/// placeholder names where the monomials do not span.
struct NamedBasis {
    names: Vec<String>,
    echelon: Echelon,
}

static NAMED: Lazy<DashMap<(u32, u32), Arc<NamedBasis>>> = Lazy::new(DashMap::new);

struct Generator {
    name: String,
    s: u32,
    stem: u32,
    chain: LambdaChain,
}

fn generators() -> Result<Vec<Generator>> {
    Ok(load_registry()?
        .iter()
        .filter_map(|e| e.lambda().map(|c| Generator { name: e.name.clone(), s: e.s, stem: e.stem(), chain: c }))
        .filter(|g| g.s > 0)
        .collect())
}

/// Monomials `(generator, exponent)` of bidegree `(s, stem)`, fewest
/// factors first.
fn monomials(gens: &[Generator], s: u32, stem: u32) -> Vec<Vec<(usize, u32)>> {
    fn go(gens: &[Generator], from: usize, s: u32, stem: u32, cur: &mut Vec<(usize, u32)>, out: &mut Vec<Vec<(usize, u32)>>) {
        if s == 0 {
            if stem == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for j in from..gens.len() {
            let g = &gens[j];
            let mut k = 1;
            while g.s * k <= s && g.stem * k <= stem {
                cur.push((j, k));
                go(gens, j + 1, s - g.s * k, stem - g.stem * k, cur, out);
                cur.pop();
                k += 1;
            }
        }
    }
    let mut out = vec![];
    go(gens, 0, s, stem, &mut vec![], &mut out);
    out.sort_by_key(|m| m.iter().map(|&(_, k)| k).sum::<u32>());
    out
}

fn monomial_name(gens: &[Generator], m: &[(usize, u32)]) -> String {
    if m.is_empty() {
        return "1".into();
    }
    m.iter().map(|&(j, k)| if k == 1 { gens[j].name.clone() } else { format!("{}^{}", gens[j].name, k) }).collect::<Vec<_>>().join(" ")
}

fn named_basis(s: u32, stem: u32) -> Result<Arc<NamedBasis>> {
    if let Some(b) = NAMED.get(&(s, stem)) {
        return Ok(b.clone());
    }
    let dim = ext_basis(&crate::modules::sphere(0), s, s + stem)?.dim();
    let gens = generators()?;
    let mut plain = Echelon::new(dim);
    let mut kept: Vec<(String, BitVector)> = vec![];
    if dim > 0 {
        for m in monomials(&gens, s, stem) {
            if kept.len() == dim {
                break;
            }
            let mut c = LambdaChain::one();
            for &(j, k) in &m {
                for _ in 0..k {
                    c = multiply(&c, &gens[j].chain);
                }
            }
            if let ClassCoords::Class(v) = sphere_class_coords(&c)? {
                if !v.is_zero() && plain.insert(v.clone()).is_some() {
                    kept.push((monomial_name(&gens, &m), v));
                }
            }
        }
        for k in 0..dim {
            let v = BitVector::unit(dim, k);
            if plain.insert(v.clone()).is_some() {
                kept.push((format!("x{}_{}_{}", stem, s, k), v));
            }
        }
    } else if s == 0 && stem == 0 {
        kept.push(("1".into(), BitVector::unit(1, 0)));
    }
    let mut echelon = Echelon::with_tags(dim);
    for (k, (_, v)) in kept.iter().enumerate() {
        let _ = echelon.insert_tagged(v.clone(), BitVector::unit(kept.len(), k));
    }
    let b = Arc::new(NamedBasis { names: kept.into_iter().map(|(n, _)| n).collect(), echelon });
    NAMED.insert((s, stem), b.clone());
    Ok(b)
}

/// Names making up a class of the sphere given by basis coordinates.
pub fn sphere_class_terms(s: u32, stem: u32, coords: &BitVector) -> Result<Vec<String>> {
    if s == 0 && stem == 0 {
        return Ok(if coords.is_zero() { vec![] } else { vec!["1".into()] });
    }
    let b = named_basis(s, stem)?;
    let (_, tag) = b.echelon.reduce_tagged(coords, b.names.len());
    Ok(tag.ones().map(|k| b.names[k].clone()).collect())
}

/// Display name of a class of the sphere: its first named term.
pub fn sphere_class_name(s: u32, stem: u32, coords: &BitVector) -> Result<String> {
    Ok(sphere_class_terms(s, stem, coords)?.into_iter().next().unwrap_or_else(|| "0".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(s: u32, stem: u32) -> Vec<String> {
        let dim = ext_basis(&crate::modules::sphere(0), s, s + stem).unwrap().dim();
        (0..dim).map(|k| sphere_class_terms(s, stem, &BitVector::unit(dim, k)).unwrap().join(" + ")).collect()
    }

    #[test]
    fn low_stems() {
        assert_eq!(names(1, 0), ["h0"]);
        assert_eq!(names(3, 0), ["h0^3"]);
        assert_eq!(names(2, 6), ["h2^2"]);
        assert_eq!(names(3, 8), ["c0"]);
        assert_eq!(names(4, 14), ["d0"]);
        assert_eq!(names(5, 9), ["Ph1"]);
        assert_eq!(sphere_class_name(0, 0, &BitVector::unit(1, 0)).unwrap(), "1");
    }

    #[test]
    fn multiples() {
        assert_eq!(names(2, 14), ["h3^2"]);
        assert_eq!(names(3, 14), ["h0 h3^2"]);
        assert_eq!(names(3, 3), ["h0^2 h2"]);
    }
}
