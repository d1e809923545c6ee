//! Bundled named cycle representatives.

use std::collections::HashMap;
use std::sync::Arc;

use once_cell::sync::OnceCell;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::expr::{eval, Scope, Value};
use crate::lambda::LambdaChain;
use crate::modules::{module_delta, resolve, FiniteAModule, ModuleChain};

const BUNDLED: &str = include_str!("../data/registry.toml");

#[derive(Clone, Debug, Deserialize)]
pub struct RawEntry {
    pub name: String,
    pub module: String,
    pub chain: String,
    #[serde(default)]
    pub note: String,
}

#[derive(Deserialize)]
struct RegistryFile {
    class: Vec<RawEntry>,
}

/// A named class with a cycle representative.
#[derive(Clone, Debug)]
pub struct NamedClassEntry {
    pub name: String,
    pub module_spec: String,
    pub module: Arc<FiniteAModule>,
    pub chain: ModuleChain,
    pub s: u32,
    pub t: u32,
    pub note: String,
}

impl NamedClassEntry {
    pub fn stem(&self) -> u32 {
        self.t - self.s
    }

    pub fn is_sphere(&self) -> bool {
        self.module_spec == "S0"
    }

    /// The representative as a lambda chain, for entries on the sphere.
    pub fn lambda(&self) -> Option<LambdaChain> {
        self.is_sphere().then(|| self.chain.component(0))
    }

    pub fn value(&self) -> Value {
        match self.lambda() {
            Some(c) => Value::Lambda(c),
            None => Value::Module(self.chain.clone()),
        }
    }
}

/// Parse and check a registry document. Every entry must be a nonzero
/// homogeneous cycle.
pub fn parse_registry(text: &str) -> Result<Vec<NamedClassEntry>> {
    let file: RegistryFile = toml::from_str(text).map_err(|e| Error::RegistryCorrupt(e.message().to_string()))?;
    let mut modules: HashMap<String, Arc<FiniteAModule>> = HashMap::new();
    let mut bindings: HashMap<String, Value> = HashMap::new();
    let mut out = vec![];
    for raw in file.class {
        let corrupt = |msg: String| Error::RegistryCorrupt(format!("{}: {}", raw.name, msg));
        if bindings.contains_key(&raw.name) {
            return Err(corrupt("duplicate name".into()));
        }
        let module = match modules.get(&raw.module) {
            Some(m) => m.clone(),
            None => {
                let m = resolve(&raw.module, None).map_err(|e| corrupt(e.to_string()))?;
                modules.insert(raw.module.clone(), m.clone());
                m
            }
        };
        let scope = Scope { module: Some(module.clone()), bindings: &bindings };
        let value = eval(&raw.chain, &scope).map_err(|e| corrupt(e.to_string()))?;
        let chain = value.into_module(&module).map_err(|e| corrupt(e.to_string()))?;
        let (s, t) = chain.bidegree().ok_or_else(|| corrupt("representative is zero or not homogeneous".into()))?;
        if !module_delta(&chain).is_zero() {
            return Err(corrupt("representative is not a cycle".into()));
        }
        let entry = NamedClassEntry { name: raw.name.clone(), module_spec: raw.module.clone(), module, chain, s, t, note: raw.note.clone() };
        bindings.insert(raw.name.clone(), entry.value());
        out.push(entry);
    }
    Ok(out)
}

static REGISTRY: OnceCell<Vec<NamedClassEntry>> = OnceCell::new();

/// The bundled registry, loaded and checked once.
pub fn load_registry() -> Result<&'static [NamedClassEntry]> {
    REGISTRY.get_or_try_init(|| parse_registry(BUNDLED)).map(|v| v.as_slice())
}

/// Registry values keyed by name, for use as expression bindings.
pub fn registry_bindings() -> Result<HashMap<String, Value>> {
    Ok(load_registry()?.iter().map(|e| (e.name.clone(), e.value())).collect())
}

pub fn lookup(name: &str) -> Result<&'static NamedClassEntry> {
    load_registry()?.iter().find(|e| e.name == name).ok_or_else(|| Error::UnknownName(name.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_entries_are_cycles() {
        let reg = load_registry().unwrap();
        assert!(reg.len() > 60);
        let d0 = lookup("d0").unwrap();
        assert_eq!((d0.s, d0.stem()), (4, 14));
        assert_eq!(d0.lambda().unwrap().to_string(), "l2 l4 l5 l3 + l4 l4 l3 l3 + l6 l2 l3 l3");
        let g = lookup("hat_D3").unwrap();
        assert_eq!((g.s, g.t), (3, 64));
        let b = lookup("beta187").unwrap();
        assert_eq!((b.s, b.t), (5, 192));
        assert_eq!(lookup("c1").unwrap().lambda().unwrap().to_string(), "l5 l7 l7");
    }

    #[test]
    fn bidegrees_match_the_families() {
        for (name, s, t) in [("h4", 1, 16), ("c2", 3, 44), ("e1", 4, 42), ("f0", 4, 22), ("g2", 4, 48), ("p0", 4, 37), ("D3", 4, 65), ("Ph2", 5, 16), ("x0", 5, 42), ("T0", 5, 146), ("V0", 5, 161), ("U0", 5, 265)] {
            let e = lookup(name).unwrap();
            assert_eq!((e.s, e.t), (s, t), "{}", name);
        }
    }

    #[test]
    fn corrupt_registry_rejected() {
        let bad = "[[class]]\nname = \"x\"\nmodule = \"S0\"\nchain = \"l2\"\n";
        assert!(matches!(parse_registry(bad), Err(Error::RegistryCorrupt(_))));
        let dup = "[[class]]\nname = \"x\"\nmodule = \"S0\"\nchain = \"l1\"\n[[class]]\nname = \"x\"\nmodule = \"S0\"\nchain = \"l3\"\n";
        assert!(matches!(parse_registry(dup), Err(Error::RegistryCorrupt(_))));
    }
}
