//! Module description files.
//!
//! ```toml
//! [header]
//! name = "M2"
//! p_type = false
//! window = { s_max = 6, stem_max = 20 }
//!
//! [[cells]]
//! id = "e0"
//! degree = 0
//!
//! [[action]]
//! cell = "e1"
//! n = 1
//! value = "e0"
//! ```

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{stunted_projective, Cell, FiniteAModule, Window};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
struct Header {
    name: String,
    #[serde(default)]
    p_type: bool,
    #[serde(default)]
    window: Option<Window>,
}

#[derive(Serialize, Deserialize)]
struct Entry {
    cell: String,
    n: u32,
    value: String,
}

#[derive(Serialize, Deserialize)]
struct Document {
    header: Header,
    cells: Vec<Cell>,
    #[serde(default)]
    action: Vec<Entry>,
}

fn parse_sum(s: &str) -> Vec<String> {
    let s = s.trim();
    if s == "0" || s.is_empty() {
        return vec![];
    }
    s.split('+').map(|x| x.trim().to_string()).collect()
}

pub fn module_from_str(text: &str) -> Result<Arc<FiniteAModule>> {
    let doc: Document = toml::from_str(text).map_err(|e| Error::parse(e.span().map_or(0, |r| r.start), e.message().to_string()))?;
    let entries: Vec<(String, u32, Vec<String>)> = doc.action.iter().map(|e| (e.cell.clone(), e.n, parse_sum(&e.value))).collect();
    let mut m = FiniteAModule::new(&doc.header.name, doc.cells, &entries)?;
    if doc.header.p_type {
        let (l, top) = (m.min_degree().unwrap_or(0), m.max_degree().unwrap_or(0));
        let p = stunted_projective(l.max(1), top)?;
        let same_cells = m.cells() == p.cells();
        let same_action = same_cells && (0..m.num_cells()).all(|c| m.action_entries(c) == p.action_entries(c));
        if !same_action {
            return Err(Error::InvalidAction("p_type is set but the action is not that of a stunted projective space".into()));
        }
        let hint = doc.header.window;
        m = (*p).clone().with_name(&doc.header.name);
        if let Some(w) = hint {
            m = m.with_window_hint(w);
        }
        return Ok(Arc::new(m));
    }
    if let Some(w) = doc.header.window {
        m = m.with_window_hint(w);
    }
    Ok(Arc::new(m))
}

pub fn module_from_file(path: impl AsRef<Path>) -> Result<Arc<FiniteAModule>> {
    module_from_str(&std::fs::read_to_string(path)?)
}

pub fn module_to_string(m: &FiniteAModule) -> String {
    let doc = Document {
        header: Header { name: m.name().to_string(), p_type: m.is_p_type(), window: m.window_hint() },
        cells: m.cells().to_vec(),
        action: m.entries().into_iter().map(|(cell, n, v)| Entry { cell, n, value: v.join(" + ") }).collect(),
    };
    toml::to_string(&doc).expect("module serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modules::{stunted_projective, tilde_p62, validate_module};

    const M2: &str = r#"
[header]
name = "M2"
window = { s_max = 4, stem_max = 12 }

[[cells]]
id = "e0"
degree = 0

[[cells]]
id = "e1"
degree = 1

[[action]]
cell = "e1"
n = 1
value = "e0"
"#;

    #[test]
    fn parse_m2() {
        let m = module_from_str(M2).unwrap();
        assert_eq!(m.num_cells(), 2);
        assert_eq!(m.sq(1, 1), &[0]);
        assert!(validate_module(&m, m.window_hint().unwrap()).is_ok());
    }

    #[test]
    fn spurious_entry_rejected() {
        let text = M2.replace("value = \"e0\"", "value = \"e0\"\n\n[[action]]\ncell = \"e1\"\nn = 2\nvalue = \"e0\"");
        assert!(matches!(module_from_str(&text), Err(Error::InvalidAction(_))));
    }

    #[test]
    fn round_trip() {
        for m in [stunted_projective(3, 9).unwrap(), tilde_p62()] {
            let back = module_from_str(&module_to_string(&m)).unwrap();
            assert_eq!(back.fingerprint(), m.fingerprint());
        }
    }

    #[test]
    fn malformed_is_parse_error() {
        assert!(matches!(module_from_str("[header\nname="), Err(Error::Parse { .. })));
    }
}
