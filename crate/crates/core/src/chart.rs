//! Ext charts as data, with text, JSON and SVG renderings.
//!
//! Horizontal axis is the stem `t - s`, vertical axis is `s`. A line for
//! `h_i` joins a class to each basis class of its product, so every drawn
//! line is a computed relation.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cache::{ExtRecord, ResultCache};
use crate::error::{Error, Result};
use crate::modules::FiniteAModule;

pub const CHART_SCHEMA: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartWindow {
    pub stem_min: u32,
    pub stem_max: u32,
    pub s_max: u32,
}

impl ChartWindow {
    pub fn contains(&self, stem: u32, s: u32) -> bool {
        (self.stem_min..=self.stem_max).contains(&stem) && s <= self.s_max
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartDot {
    pub s: u32,
    pub stem: u32,
    /// Position within the basis of its bidegree.
    pub index: usize,
    pub name: String,
    /// Cycle representative.
    pub representative: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartLine {
    pub from: usize,
    pub to: usize,
    pub kind: String,
}

/// Display-only data supplied by the user, such as Adams differentials.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub text: String,
    /// `[stem, s]`
    #[serde(default)]
    pub from: Option<[u32; 2]>,
    #[serde(default)]
    pub to: Option<[u32; 2]>,
}

#[derive(Deserialize)]
struct AnnotationFile {
    #[serde(default)]
    annotation: Vec<Annotation>,
}

pub fn load_annotations(path: impl AsRef<Path>) -> Result<Vec<Annotation>> {
    let text = std::fs::read_to_string(path)?;
    let f: AnnotationFile = toml::from_str(&text).map_err(|e| Error::parse(e.span().map_or(0, |r| r.start), e.message()))?;
    Ok(f.annotation)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartDocument {
    pub schema: u32,
    pub module: String,
    pub fingerprint: String,
    pub window: ChartWindow,
    pub dots: Vec<ChartDot>,
    pub lines: Vec<ChartLine>,
    #[serde(default)]
    pub annotations: Vec<Annotation>,
}

#[derive(Clone, Debug)]
pub struct ChartOptions {
    pub window: ChartWindow,
    /// `i` for each `h_i` whose lines are drawn.
    pub lines: Vec<u32>,
}

impl ChartOptions {
    pub fn new(window: ChartWindow) -> Self {
        ChartOptions { window, lines: vec![0, 1, 2] }
    }
}

fn record(module: &Arc<FiniteAModule>, cache: Option<&ResultCache>, s: u32, t: u32) -> Result<ExtRecord> {
    match cache {
        Some(c) => c.record(module, s, t),
        None => ExtRecord::compute(module, s, t),
    }
}

/// Compute the chart over a window, reading and filling the cache if given.
pub fn build_chart(module: &Arc<FiniteAModule>, opts: &ChartOptions, cache: Option<&ResultCache>) -> Result<ChartDocument> {
    let w = opts.window;
    let cells: Vec<(u32, u32)> = (0..=w.s_max).flat_map(|s| (w.stem_min..=w.stem_max).map(move |n| (s, n))).collect();
    let records: Vec<Result<ExtRecord>> = cells
        .par_iter()
        .map(|&(s, stem)| {
            let mut rec = record(module, cache, s, s + stem)?;
            let before = rec.products.len();
            for &i in &opts.lines {
                if rec.dim > 0 && w.contains(stem + (1 << i) - 1, s + 1) {
                    rec.add_product(module, i)?;
                }
            }
            if let Some(c) = cache {
                if rec.products.len() != before {
                    c.put(module, &rec)?;
                }
            }
            Ok(rec)
        })
        .collect();
    let mut dots = vec![];
    let mut index: BTreeMap<(u32, u32, usize), usize> = BTreeMap::new();
    let mut recs = vec![];
    for r in records {
        let r = r?;
        for k in 0..r.dim {
            index.insert((r.s, r.t - r.s, k), dots.len());
            dots.push(ChartDot { s: r.s, stem: r.t - r.s, index: k, name: r.names[k].clone(), representative: r.representatives[k].clone() });
        }
        recs.push(r);
    }
    let mut lines = vec![];
    for r in &recs {
        for &i in &opts.lines {
            let Some(cols) = r.products.get(&format!("h{}", i)) else { continue };
            let (ts, tstem) = (r.s + 1, r.t - r.s + (1 << i) - 1);
            for (k, col) in cols.iter().enumerate() {
                for &j in col {
                    if let (Some(&a), Some(&b)) = (index.get(&(r.s, r.t - r.s, k)), index.get(&(ts, tstem, j))) {
                        lines.push(ChartLine { from: a, to: b, kind: format!("h{}", i) });
                    }
                }
            }
        }
    }
    Ok(ChartDocument { schema: CHART_SCHEMA, module: module.name().to_string(), fingerprint: module.fingerprint().to_string(), window: w, dots, lines, annotations: vec![] })
}

impl ChartDocument {
    /// Dot counts keyed by `(stem, s)`.
    pub fn dims(&self) -> BTreeMap<(u32, u32), usize> {
        let mut out = BTreeMap::new();
        for d in &self.dots {
            *out.entry((d.stem, d.s)).or_insert(0) += 1;
        }
        out
    }

    pub fn check(&self) -> Result<()> {
        for l in &self.lines {
            let (a, b) = match (self.dots.get(l.from), self.dots.get(l.to)) {
                (Some(a), Some(b)) => (a, b),
                _ => return Err(Error::Domain(format!("line {} -> {} has a missing endpoint", l.from, l.to))),
            };
            let i: u32 = l.kind.trim_start_matches('h').parse().map_err(|_| Error::Domain(format!("line kind {}", l.kind)))?;
            if b.s != a.s + 1 || b.stem != a.stem + (1 << i) - 1 {
                return Err(Error::Domain(format!("{} line from ({}, {}) to ({}, {})", l.kind, a.stem, a.s, b.stem, b.s)));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("chart serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ChartDocument = serde_json::from_str(text).map_err(|e| Error::parse(e.column(), e.to_string()))?;
        if doc.schema != CHART_SCHEMA {
            return Err(Error::Domain(format!("chart schema {} (expected {})", doc.schema, CHART_SCHEMA)));
        }
        doc.check()?;
        Ok(doc)
    }

    /// Grid of dimensions followed by the dot, line and annotation lists.
    pub fn to_text(&self) -> String {
        let w = self.window;
        let dims = self.dims();
        let mut out = String::new();
        let _ = writeln!(out, "{} stems {}..{} s <= {}", self.module, w.stem_min, w.stem_max, w.s_max);
        for s in (0..=w.s_max).rev() {
            let _ = write!(out, "{:>3} |", s);
            for stem in w.stem_min..=w.stem_max {
                match dims.get(&(stem, s)) {
                    Some(d) => {
                        let _ = write!(out, "{:>3}", d);
                    }
                    None => out.push_str("  ."),
                }
            }
            out.push('\n');
        }
        out.push_str("    +");
        out.push_str(&"---".repeat((w.stem_max - w.stem_min + 1) as usize));
        out.push_str("\n     ");
        for stem in w.stem_min..=w.stem_max {
            let _ = write!(out, "{:>3}", stem);
        }
        out.push_str("\n\ndots\n");
        for (k, d) in self.dots.iter().enumerate() {
            let _ = writeln!(out, "{:>4}  ({}, {})  {}", k, d.stem, d.s, d.name);
        }
        if !self.lines.is_empty() {
            out.push_str("lines\n");
            for l in &self.lines {
                let _ = writeln!(out, "  {} -> {}  {}", l.from, l.to, l.kind);
            }
        }
        if !self.annotations.is_empty() {
            out.push_str("annotations\n");
            for a in &self.annotations {
                let _ = writeln!(out, "  {}", a.text);
            }
        }
        out
    }

    /// Fixed layout: a 40 px grid, dots of one bidegree spread horizontally.
    pub fn to_svg(&self) -> String {
        const CELL: i64 = 40;
        const MARGIN: i64 = 40;
        let w = self.window;
        let cols = (w.stem_max - w.stem_min + 1) as i64;
        let rows = w.s_max as i64 + 1;
        let (width, height) = (2 * MARGIN + cols * CELL, 2 * MARGIN + rows * CELL);
        let cx = |stem: u32| MARGIN + (stem - w.stem_min) as i64 * CELL + CELL / 2;
        let cy = |s: u32| MARGIN + (w.s_max - s) as i64 * CELL + CELL / 2;
        let dims = self.dims();
        let pos = |d: &ChartDot| {
            let n = dims[&(d.stem, d.s)] as i64;
            (cx(d.stem) + (2 * d.index as i64 - (n - 1)) * 5, cy(d.s))
        };
        let esc = |s: &str| s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;");
        let mut out = String::new();
        let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#, width, height, width, height);
        let _ = writeln!(out, r#"<title>{}</title>"#, esc(&self.module));
        out.push_str("<g stroke=\"#ddd\" stroke-width=\"1\">\n");
        for c in 0..=cols {
            let x = MARGIN + c * CELL;
            let _ = writeln!(out, r#"<line x1="{}" y1="{}" x2="{}" y2="{}"/>"#, x, MARGIN, x, MARGIN + rows * CELL);
        }
        for r in 0..=rows {
            let y = MARGIN + r * CELL;
            let _ = writeln!(out, r#"<line x1="{}" y1="{}" x2="{}" y2="{}"/>"#, MARGIN, y, MARGIN + cols * CELL, y);
        }
        out.push_str("</g>\n<g font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">\n");
        for stem in w.stem_min..=w.stem_max {
            let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, cx(stem), MARGIN + rows * CELL + 14, stem);
        }
        for s in 0..=w.s_max {
            let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, MARGIN - 12, cy(s) + 4, s);
        }
        out.push_str("</g>\n<g stroke=\"black\" stroke-width=\"1\">\n");
        for l in &self.lines {
            let ((x1, y1), (x2, y2)) = (pos(&self.dots[l.from]), pos(&self.dots[l.to]));
            let _ = writeln!(out, r#"<line class="{}" x1="{}" y1="{}" x2="{}" y2="{}"/>"#, l.kind, x1, y1, x2, y2);
        }
        out.push_str("</g>\n<g fill=\"black\">\n");
        for d in &self.dots {
            let (x, y) = pos(d);
            let _ = writeln!(out, r#"<circle cx="{}" cy="{}" r="3"><title>{}</title></circle>"#, x, y, esc(&d.name));
        }
        out.push_str("</g>\n");
        if !self.annotations.is_empty() {
            out.push_str("<g stroke=\"red\" stroke-dasharray=\"3,2\" fill=\"red\" font-family=\"sans-serif\" font-size=\"9\">\n");
            for a in &self.annotations {
                if let (Some([fs, fss]), Some([ts, tss])) = (a.from, a.to) {
                    if w.contains(fs, fss) && w.contains(ts, tss) {
                        let _ = writeln!(out, r#"<line x1="{}" y1="{}" x2="{}" y2="{}"><title>{}</title></line>"#, cx(fs), cy(fss), cx(ts), cy(tss), esc(&a.text));
                    }
                }
            }
            out.push_str("</g>\n");
        }
        out.push_str("</svg>\n");
        out
    }
}

/// Number of dots in an SVG produced by [`ChartDocument::to_svg`].
pub fn svg_dot_count(svg: &str) -> usize {
    svg.matches("<circle ").count()
}
