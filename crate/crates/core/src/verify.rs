//! Identity scripts and golden chart tables.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::expr::{check_syntax, eval, Scope, Value};
use crate::ext::{boundary_witness, ext_dim, multiplication_matrix};
use crate::lambda::{delta, reduce_mod_filtration, FiltrationLevel, LambdaChain};
use crate::modules::{module_delta, reduce_mod_f, resolve, FiniteAModule, ModuleChain};
use crate::registry::registry_bindings;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Assertion {
    IsCycle(String),
    DeltaEquals(String, String),
    CongruentModF(String, String, u32),
    CongruentModLambda(String, String, u32),
    ClassEqual(String, String),
    IsBoundary(String),
    DimEquals(String, u32, u32, usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Step {
    Module(String),
    Let(String, String),
    Check(Assertion),
}

/// A parsed script: steps with their line numbers.
#[derive(Clone, Debug)]
pub struct IdentityScript {
    steps: Vec<(usize, Step)>,
}

fn split_eq(rest: &str, line: usize) -> Result<(String, String)> {
    let (a, b) = rest.split_once("==").ok_or_else(|| Error::ScriptParse { line, msg: "expected '=='".into() })?;
    Ok((a.trim().to_string(), b.trim().to_string()))
}

fn split_mod(rhs: &str, line: usize) -> Result<(String, u32)> {
    let at = rhs.rfind(" mod ").ok_or_else(|| Error::ScriptParse { line, msg: "expected 'mod <n>'".into() })?;
    let n = rhs[at + 5..].trim().parse().map_err(|_| Error::ScriptParse { line, msg: "filtration must be an integer".into() })?;
    Ok((rhs[..at].trim().to_string(), n))
}

fn syntax(text: &str, line: usize) -> Result<()> {
    check_syntax(text).map_err(|e| Error::ScriptParse { line, msg: e.to_string() })
}

impl IdentityScript {
    pub fn parse(text: &str) -> Result<Self> {
        let mut steps = vec![];
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (word, rest) = body.split_once(char::is_whitespace).unwrap_or((body, ""));
            let rest = rest.trim();
            let perr = |msg: &str| Error::ScriptParse { line, msg: msg.into() };
            let step = match word {
                "module" => {
                    if rest.is_empty() {
                        return Err(perr("missing module"));
                    }
                    Step::Module(rest.to_string())
                }
                "let" => {
                    let (name, e) = rest.split_once('=').ok_or_else(|| perr("expected 'let name = chain'"))?;
                    let name = name.trim().trim_start_matches('$');
                    if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'') {
                        return Err(perr("bad binding name"));
                    }
                    syntax(e.trim(), line)?;
                    Step::Let(name.to_string(), e.trim().to_string())
                }
                "IsCycle" | "IsBoundary" => {
                    syntax(rest, line)?;
                    Step::Check(if word == "IsCycle" { Assertion::IsCycle(rest.into()) } else { Assertion::IsBoundary(rest.into()) })
                }
                "DeltaEquals" | "ClassEqual" => {
                    let (a, b) = split_eq(rest, line)?;
                    syntax(&a, line)?;
                    syntax(&b, line)?;
                    Step::Check(if word == "DeltaEquals" { Assertion::DeltaEquals(a, b) } else { Assertion::ClassEqual(a, b) })
                }
                "CongruentModF" | "CongruentModLambda" => {
                    let (a, rhs) = split_eq(rest, line)?;
                    let (b, n) = split_mod(&rhs, line)?;
                    syntax(&a, line)?;
                    syntax(&b, line)?;
                    Step::Check(if word == "CongruentModF" { Assertion::CongruentModF(a, b, n) } else { Assertion::CongruentModLambda(a, b, n) })
                }
                "DimEquals" => {
                    let (lhs, d) = split_eq(rest, line)?;
                    let d = d.parse().map_err(|_| perr("dimension must be an integer"))?;
                    let mut parts = lhs.rsplitn(3, char::is_whitespace);
                    let t = parts.next().and_then(|x| x.parse().ok()).ok_or_else(|| perr("expected 'DimEquals <module> <s> <t> == <d>'"))?;
                    let s = parts.next().and_then(|x| x.parse().ok()).ok_or_else(|| perr("expected 'DimEquals <module> <s> <t> == <d>'"))?;
                    let m = parts.next().map(str::trim).filter(|m| !m.is_empty()).ok_or_else(|| perr("missing module"))?;
                    Step::Check(Assertion::DimEquals(m.to_string(), s, t, d))
                }
                _ => return Err(perr(&format!("unknown statement '{}'", word))),
            };
            steps.push((line, step));
        }
        Ok(IdentityScript { steps })
    }

    pub fn assertion_count(&self) -> usize {
        self.steps.iter().filter(|(_, s)| matches!(s, Step::Check(_))).count()
    }
}

#[derive(Clone, Debug)]
pub struct AssertionResult {
    pub line: usize,
    pub assertion: Assertion,
    pub passed: bool,
    pub detail: String,
    /// Counterexample chain on failure, such as the nonzero difference.
    pub witness: Option<String>,
}

#[derive(Clone, Debug, Default)]
pub struct ScriptReport {
    pub results: Vec<AssertionResult>,
}

impl ScriptReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn first_failure(&self) -> Option<&AssertionResult> {
        self.results.iter().find(|r| !r.passed)
    }
}

impl fmt::Display for ScriptReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.results {
            writeln!(f, "{} line {}: {:?}{}", if r.passed { "PASS" } else { "FAIL" }, r.line, r.assertion, if r.detail.is_empty() { String::new() } else { format!(" ({})", r.detail) })?;
        }
        Ok(())
    }
}

struct Runner<'p> {
    base: Option<&'p Path>,
    module: Option<Arc<FiniteAModule>>,
    bindings: HashMap<String, Value>,
}

enum Outcome {
    Pass(String),
    Fail(String, Option<String>),
}

/// Both sides as chains of one kind: module chains when a module is set or
/// either side lives in a module.
enum Pair {
    Lambda(LambdaChain, LambdaChain),
    Module(ModuleChain, ModuleChain),
}

impl<'p> Runner<'p> {
    fn value(&self, text: &str) -> Result<Value> {
        eval(text, &Scope { module: self.module.clone(), bindings: &self.bindings })
    }

    fn as_module(&self, v: Value) -> Result<ModuleChain> {
        match (&self.module, v) {
            (_, Value::Module(c)) => match &self.module {
                Some(m) if c.module() != m => Value::Module(c).into_module(m),
                _ => Ok(c),
            },
            (Some(m), v) => v.into_module(m),
            (None, v) => Ok(ModuleChain::cell_times(crate::modules::sphere(0), 0, &v.into_lambda()?)),
        }
    }

    fn pair(&self, a: &str, b: &str) -> Result<Pair> {
        let (x, y) = (self.value(a)?, self.value(b)?);
        let lambda_only = self.module.is_none() && matches!(x, Value::Lambda(_)) && matches!(y, Value::Lambda(_));
        if lambda_only {
            Ok(Pair::Lambda(x.into_lambda()?, y.into_lambda()?))
        } else {
            Ok(Pair::Module(self.as_module(x)?, self.as_module(y)?))
        }
    }

    fn check(&mut self, a: &Assertion) -> Result<Outcome> {
        use Outcome::*;
        Ok(match a {
            Assertion::IsCycle(e) => {
                let c = self.as_module(self.value(e)?)?;
                let d = module_delta(&c);
                if d.is_zero() { Pass(String::new()) } else { Fail("differential is nonzero".into(), Some(d.to_string())) }
            }
            Assertion::DeltaEquals(a, b) => {
                let diff = match self.pair(a, b)? {
                    Pair::Lambda(x, y) => delta(&x).add(&y).to_string(),
                    Pair::Module(x, y) => module_delta(&x).add(&y)?.to_string(),
                };
                if diff == "0" { Pass(String::new()) } else { Fail("d(lhs) - rhs is nonzero".into(), Some(diff)) }
            }
            Assertion::CongruentModF(a, b, n) => {
                let (x, y) = match self.pair(a, b)? {
                    Pair::Module(x, y) => (x, y),
                    Pair::Lambda(..) => return Ok(Fail("cell filtration needs a module".into(), None)),
                };
                let r = reduce_mod_f(&x.add(&y)?, *n);
                if r.is_zero() { Pass(String::new()) } else { Fail(format!("difference survives modulo F({})", n), Some(r.to_string())) }
            }
            Assertion::CongruentModLambda(a, b, n) => {
                let r = match self.pair(a, b)? {
                    Pair::Lambda(x, y) => reduce_mod_filtration(&x.add(&y), FiltrationLevel(*n)).to_string(),
                    Pair::Module(x, y) => {
                        let d = x.add(&y)?;
                        let m = d.module().clone();
                        let mut terms = vec![];
                        for cell in 0..m.num_cells() {
                            for t in reduce_mod_filtration(&d.component(cell), FiltrationLevel(*n)).terms() {
                                terms.push((cell, t.clone()));
                            }
                        }
                        ModuleChain::from_terms(m, terms).to_string()
                    }
                };
                if r == "0" { Pass(String::new()) } else { Fail(format!("difference survives modulo lambda filtration {}", n), Some(r)) }
            }
            Assertion::ClassEqual(a, b) => {
                let (x, y) = match self.pair(a, b)? {
                    Pair::Lambda(x, y) => {
                        let s0 = crate::modules::sphere(0);
                        (ModuleChain::cell_times(s0.clone(), 0, &x), ModuleChain::cell_times(s0, 0, &y))
                    }
                    Pair::Module(x, y) => (x, y),
                };
                for (side, c) in [("lhs", &x), ("rhs", &y)] {
                    let d = module_delta(c);
                    if !d.is_zero() {
                        return Ok(Fail(format!("{} is not a cycle", side), Some(d.to_string())));
                    }
                }
                if let (Some(p), Some(q)) = (x.bidegree(), y.bidegree()) {
                    if p != q {
                        return Ok(Fail(format!("bidegrees differ: {:?} and {:?}", p, q), None));
                    }
                }
                let diff = x.add(&y)?;
                if diff.bidegree().is_none() && !diff.is_zero() {
                    return Ok(Fail("chains are not homogeneous".into(), None));
                }
                match boundary_witness(&diff)? {
                    Some(w) => Pass(format!("difference is d of a chain with {} terms", w.len())),
                    None => Fail("difference is not a boundary".into(), Some(diff.to_string())),
                }
            }
            Assertion::IsBoundary(e) => {
                let c = self.as_module(self.value(e)?)?;
                if !c.is_zero() && c.bidegree().is_none() {
                    return Ok(Fail("chain is not homogeneous".into(), None));
                }
                match boundary_witness(&c)? {
                    Some(w) => Pass(format!("witness has {} terms", w.len())),
                    None => Fail("not a boundary".into(), Some(c.to_string())),
                }
            }
            Assertion::DimEquals(m, s, t, d) => {
                let module = resolve(m, self.base)?;
                let got = ext_dim(&module, *s, *t)?;
                if got == *d { Pass(String::new()) } else { Fail(format!("dimension is {}", got), None) }
            }
        })
    }
}

/// Run a script with the registry names bound. Evaluation errors fail the
/// assertion; resource caps abort the run.
pub fn run_script(text: &str, base: Option<&Path>) -> Result<ScriptReport> {
    let script = IdentityScript::parse(text)?;
    run_parsed(&script, base)
}

pub fn run_parsed(script: &IdentityScript, base: Option<&Path>) -> Result<ScriptReport> {
    let mut r = Runner { base, module: None, bindings: registry_bindings()? };
    let mut report = ScriptReport::default();
    for (line, step) in &script.steps {
        match step {
            Step::Module(spec) => {
                r.module = Some(resolve(spec, base).map_err(|e| Error::ScriptParse { line: *line, msg: e.to_string() })?);
            }
            Step::Let(name, e) => {
                let v = r.value(e).map_err(|e| Error::ScriptParse { line: *line, msg: e.to_string() })?;
                r.bindings.insert(name.clone(), v);
            }
            Step::Check(a) => {
                let (passed, detail, witness) = match r.check(a) {
                    Ok(Outcome::Pass(d)) => (true, d, None),
                    Ok(Outcome::Fail(d, w)) => (false, d, w),
                    Err(e @ Error::WindowTooLarge { .. }) => return Err(e),
                    Err(e) => (false, e.to_string(), None),
                };
                report.results.push(AssertionResult { line: *line, assertion: a.clone(), passed, detail, witness });
            }
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, Deserialize)]
pub struct Dot {
    pub stem: u32,
    pub s: u32,
    #[serde(default)]
    pub name: String,
}

#[derive(Clone, Debug, Deserialize)]
pub struct Line {
    pub from: usize,
    pub to: usize,
    pub kind: String,
    #[serde(default)]
    pub dashed: bool,
}

/// A bidegree where the drawn chart is known to be wrong, with the corrected
/// dimension.
#[derive(Clone, Debug, Deserialize)]
pub struct Erratum {
    pub stem: u32,
    pub s: u32,
    pub dim: usize,
    pub reason: String,
}

/// Golden chart: dots per bidegree, drawn multiplication lines, errata.
#[derive(Clone, Debug, Deserialize)]
pub struct Figure {
    pub name: String,
    pub module: String,
    #[serde(default)]
    pub stem_offset: u32,
    pub columns: Vec<u32>,
    pub s_max: u32,
    pub tier: String,
    #[serde(default)]
    pub notes: String,
    #[serde(default, rename = "dot")]
    pub dots: Vec<Dot>,
    #[serde(default, rename = "line")]
    pub lines: Vec<Line>,
    #[serde(default, rename = "erratum")]
    pub errata: Vec<Erratum>,
}

impl Figure {
    pub fn from_toml(text: &str) -> Result<Self> {
        let f: Figure = toml::from_str(text).map_err(|e| Error::RegistryCorrupt(e.message().to_string()))?;
        for l in &f.lines {
            if l.from >= f.dots.len() || l.to >= f.dots.len() {
                return Err(Error::RegistryCorrupt(format!("{}: line endpoint out of range", f.name)));
            }
        }
        Ok(f)
    }

    pub fn is_primary(&self) -> bool {
        self.tier == "primary"
    }

    /// Dot counts as drawn.
    pub fn drawn(&self) -> BTreeMap<(u32, u32), usize> {
        let mut m = BTreeMap::new();
        for d in &self.dots {
            *m.entry((d.stem, d.s)).or_insert(0) += 1;
        }
        m
    }

    /// Expected dimension at a chart position after errata.
    pub fn expected(&self, stem: u32, s: u32) -> usize {
        match self.errata.iter().find(|e| e.stem == stem && e.s == s) {
            Some(e) => e.dim,
            None => self.drawn().get(&(stem, s)).copied().unwrap_or(0),
        }
    }
}

const FIGURES: &[(&str, &str)] = &[
    ("sphere", include_str!("../data/figures/sphere.toml")),
    ("m2_relative", include_str!("../data/figures/m2_relative.toml")),
    ("p18_15", include_str!("../data/figures/p18_15.toml")),
    ("p_13_16", include_str!("../data/figures/p_13_16.toml")),
    ("p14_13_16", include_str!("../data/figures/p14_13_16.toml")),
    ("p62_47", include_str!("../data/figures/p62_47.toml")),
    ("p48_46", include_str!("../data/figures/p48_46.toml")),
    ("p62_46", include_str!("../data/figures/p62_46.toml")),
    ("p_46", include_str!("../data/figures/p_46.toml")),
    ("p49_46", include_str!("../data/figures/p49_46.toml")),
];

pub fn figure_ids() -> Vec<&'static str> {
    FIGURES.iter().map(|(id, _)| *id).collect()
}

pub fn figure(id: &str) -> Result<Figure> {
    let (_, text) = FIGURES.iter().find(|(k, _)| *k == id).ok_or_else(|| Error::UnknownName(format!("figure {}", id)))?;
    Figure::from_toml(text)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellDiff {
    pub stem: u32,
    pub s: u32,
    pub expected: usize,
    pub actual: usize,
}

#[derive(Clone, Debug)]
pub struct LineIssue {
    pub from: (u32, u32),
    pub to: (u32, u32),
    pub kind: String,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct FigureReport {
    pub figure: String,
    pub cells: usize,
    pub diffs: Vec<CellDiff>,
    /// Errata whose corrected dimension the engine reproduces, with the
    /// drawn count.
    pub errata_confirmed: Vec<(u32, u32, usize, usize)>,
    pub lines_checked: usize,
    pub line_issues: Vec<LineIssue>,
}

impl FigureReport {
    pub fn passed(&self) -> bool {
        self.diffs.is_empty() && self.line_issues.is_empty()
    }
}

impl fmt::Display for FigureReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}: {} cells, {} diffs, {} lines checked, {} line issues", self.figure, self.cells, self.diffs.len(), self.lines_checked, self.line_issues.len())?;
        for d in &self.diffs {
            writeln!(f, "  (stem {}, s {}): chart {} engine {}", d.stem, d.s, d.expected, d.actual)?;
        }
        for (stem, s, drawn, dim) in &self.errata_confirmed {
            writeln!(f, "  erratum (stem {}, s {}): drawn {} corrected {}", stem, s, drawn, dim)?;
        }
        for l in &self.line_issues {
            writeln!(f, "  {} line {:?} -> {:?}: {}", l.kind, l.from, l.to, l.detail)?;
        }
        Ok(())
    }
}

fn h(kind: &str) -> Option<LambdaChain> {
    let i: u32 = kind.strip_prefix('h')?.parse().ok()?;
    Some(LambdaChain::generator((1 << i) - 1))
}

/// Compare a bundled figure against the engine.
pub fn check_figure(id: &str) -> Result<FigureReport> {
    let fig = figure(id)?;
    let module = resolve(&fig.module, None)?;
    check_figure_with(&fig, &module)
}

/// Compare a figure against the given module. Lines are checked as far as
/// dots can be told apart: the product map must hit every target dot, so its
/// rank is at least the number of distinct target dots.
pub fn check_figure_with(fig: &Figure, module: &Arc<FiniteAModule>) -> Result<FigureReport> {
    let drawn = fig.drawn();
    let t_of = |stem: u32, s: u32| s + stem + fig.stem_offset;
    let mut diffs = vec![];
    let mut cells = 0;
    for &stem in &fig.columns {
        for s in 0..=fig.s_max {
            cells += 1;
            let expected = fig.expected(stem, s);
            let actual = ext_dim(module, s, t_of(stem, s))?;
            if expected != actual {
                diffs.push(CellDiff { stem, s, expected, actual });
            }
        }
    }
    let errata_confirmed = fig
        .errata
        .iter()
        .filter(|e| !diffs.iter().any(|d| d.stem == e.stem && d.s == e.s))
        .map(|e| (e.stem, e.s, drawn.get(&(e.stem, e.s)).copied().unwrap_or(0), e.dim))
        .collect();

    let mut groups: BTreeMap<((u32, u32), (u32, u32), String), Vec<usize>> = BTreeMap::new();
    for l in &fig.lines {
        let (a, b) = (&fig.dots[l.from], &fig.dots[l.to]);
        groups.entry(((a.stem, a.s), (b.stem, b.s), l.kind.clone())).or_default().push(l.to);
    }
    let mut line_issues = vec![];
    for ((from, to, kind), mut targets) in groups {
        targets.sort();
        targets.dedup();
        let issue = |detail: String| LineIssue { from, to, kind: kind.clone(), detail };
        let x = match h(&kind) {
            Some(x) => x,
            None => {
                line_issues.push(issue("unknown line kind".into()));
                continue;
            }
        };
        let step = (1u32 << kind[1..].parse::<u32>().unwrap_or(0)) - 1;
        if to.0 != from.0 + step || to.1 != from.1 + 1 {
            line_issues.push(issue("endpoints do not match the multiplier's degree".into()));
            continue;
        }
        let m = multiplication_matrix(module, from.1, t_of(from.0, from.1), &x)?;
        if m.rank() < targets.len() {
            line_issues.push(issue(format!("product has rank {} but {} target dots are drawn", m.rank(), targets.len())));
        }
    }
    Ok(FigureReport { figure: fig.name.clone(), cells, diffs, errata_confirmed, lines_checked: fig.lines.len(), line_issues })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_statements() {
        let s = IdentityScript::parse("# c\nmodule P\nlet x = e1 l1\nIsCycle $x\nDeltaEquals l2 == l1 l0 # trailing\nCongruentModF e2 == e2 mod 1\nDimEquals P(1,2) 1 2 == 1\n").unwrap();
        assert_eq!(s.assertion_count(), 4);
        for (bad, line) in [("IsCycle l1\nfoo l1", 2), ("DeltaEquals l2 l1", 1), ("CongruentModF e1 == e1", 1), ("IsCycle (l1", 1), ("DimEquals 1 2 == x", 1)] {
            match IdentityScript::parse(bad) {
                Err(Error::ScriptParse { line: l, .. }) => assert_eq!(l, line, "{}", bad),
                other => panic!("{}: {:?}", bad, other),
            }
        }
    }

    #[test]
    fn small_identities() {
        let r = run_script("DeltaEquals l2 == l1 l0\nIsCycle $h3 $h3\nClassEqual l1 l1 l1 == $h0^2 $h2\nIsBoundary l1 l0\nDimEquals S0 2 16 == 1\nmodule P(1,2)\nIsCycle e1 l1\n", None).unwrap();
        assert!(r.passed(), "{}", r);
        let r = run_script("DeltaEquals l4 == l1 l0\nIsBoundary l0\n", None).unwrap();
        assert_eq!(r.results.iter().filter(|x| !x.passed).count(), 2);
        assert!(r.first_failure().unwrap().witness.is_some());
    }

    #[test]
    fn figures_load() {
        for id in figure_ids() {
            let f = figure(id).unwrap();
            assert!(!f.dots.is_empty(), "{}", id);
        }
        let s = figure("sphere").unwrap();
        assert_eq!(s.drawn().get(&(14, 4)), Some(&1));
        assert!(!s.notes.is_empty());
    }

    #[test]
    fn small_figure() {
        let r = check_figure("p18_15").unwrap();
        assert!(r.passed(), "{}", r);
    }
}
