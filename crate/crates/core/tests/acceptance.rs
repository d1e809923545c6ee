//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! `cargo test --release --test acceptance` runs the normal suite;
//! append `-- --extended` to add the full stem-62 charts.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use lambdaext::ext::{ext_dim, induced_on_ext, multiplication_matrix, transfer_on_ext};
use lambdaext::lambda::LambdaChain;
use lambdaext::modules::{projective_infinite, resolve, sphere, stunted_projective, tilde_p62, validate_module, FiniteAModule, ModuleMorphism, Window};
use lambdaext::registry::load_registry;
use lambdaext::rho::rho;
use lambdaext::ss::{assemble_einf, compute_pages, pages_needed, SsWindow};
use lambdaext::verify::{check_figure, check_figure_with, figure, figure_ids, run_script};

type Outcome = Result<String, String>;

struct Criterion {
    id: &'static str,
    title: &'static str,
    tolerance: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn d_squared() -> Outcome {
    let mut checked = 0;
    checked += validate_module(&sphere(0), Window { s_max: 7, stem_max: 40 }).map_err(err)?.checked;
    let p8 = stunted_projective(1, 8).map_err(err)?;
    let m2 = resolve("M2", None).map_err(err)?;
    for m in [projective_infinite(), m2, tilde_p62(), p8] {
        checked += validate_module(&m, Window { s_max: 5, stem_max: 30 }).map_err(err)?.checked;
    }
    Ok(format!("{} basis chains", checked))
}

fn figure_one() -> Outcome {
    let r = check_figure("sphere").map_err(err)?;
    ensure(r.passed(), || r.to_string())?;
    let dims: Vec<usize> = (1..=4).map(|s| ext_dim(&sphere(0), s, s + 3).unwrap()).collect();
    ensure(dims == [1, 1, 1, 0], || format!("stem 3 column {:?}", dims))?;
    let stem14: Vec<usize> = (2..=7).map(|s| ext_dim(&sphere(0), s, s + 14).unwrap()).collect();
    ensure(stem14 == [1, 1, 1, 1, 1, 0], || format!("stem 14 column {:?}", stem14))?;
    Ok(format!("{} cells, {} h_i lines confirmed", r.cells, r.lines_checked))
}

/// Dimension of `Ext^{s}(M2)` at a stem from the cofibration `S^1 -> M2 -> S^2`:
/// cokernel of `h0` into the bottom cell plus kernel of `h0` on the top cell.
fn m2_by_exact_sequence(s: u32, stem: u32) -> usize {
    let s0 = sphere(0);
    let h0 = LambdaChain::generator(0);
    let dim = |s: u32, n: i64| if n < 0 { 0 } else { ext_dim(&s0, s, s + n as u32).unwrap() };
    let rank = |s: u32, n: i64| if n < 0 { 0 } else { multiplication_matrix(&s0, s, s + n as u32, &h0).unwrap().rank() };
    let n = stem as i64;
    let coker = dim(s, n - 1) - if s == 0 { 0 } else { rank(s - 1, n - 1) };
    let ker = dim(s, n - 2) - rank(s, n - 2);
    coker + ker
}

fn figures_two_to_five() -> Outcome {
    let mut notes = vec![];
    for id in ["m2_relative", "p18_15", "p_13_16", "p14_13_16"] {
        let r = check_figure(id).map_err(err)?;
        ensure(r.passed(), || r.to_string())?;
        notes.push(format!("{} {} cells", id, r.cells));
        for (stem, s, drawn, dim) in &r.errata_confirmed {
            notes.push(format!("erratum ({}, {}) drawn {} engine {}", stem, s, drawn, dim));
        }
    }
    // independent oracle for M2
    let fig = figure("m2_relative").map_err(err)?;
    let m2 = resolve(&fig.module, None).map_err(err)?;
    for &c in &fig.columns {
        let stem = c + fig.stem_offset;
        for s in 0..=fig.s_max {
            let (oracle, engine) = (m2_by_exact_sequence(s, stem), ext_dim(&m2, s, s + stem).map_err(err)?);
            ensure(oracle == engine, || format!("M2 (stem {}, s {}): exact sequence {} engine {}", stem, s, oracle, engine))?;
        }
    }
    ensure(m2_by_exact_sequence(4, 18) == 1, || "exact sequence does not confirm the M2 erratum".into())?;
    // alpha16 in P^14 through the cell filtration
    let p14 = stunted_projective(1, 14).map_err(err)?;
    let w = SsWindow { stem_min: 16, stem_max: 16, s_max: 5 };
    let pages = compute_pages(&p14, w, pages_needed(&p14, w)).map_err(err)?;
    let einf = assemble_einf(&pages).map_err(err)?;
    let at = |s: u32| einf.get(&(s, 16)).copied().unwrap_or(0);
    ensure(at(3) == 1 && at(4) == 0, || format!("P14 stem 16 E_inf: s=3 {} s=4 {}", at(3), at(4)))?;
    notes.push("M2 matches exact sequence oracle; P14 (16,3)/(16,4) match E_inf".into());
    Ok(notes.join("; "))
}

fn script_dir() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/data/scripts"))
}

fn run_file(name: &str) -> Result<usize, String> {
    let path = script_dir().join(name);
    let text = std::fs::read_to_string(&path).map_err(err)?;
    let r = run_script(&text, Some(script_dir())).map_err(err)?;
    match r.first_failure() {
        Some(f) => Err(format!("{}: line {}: {}", name, f.line, f.detail)),
        None => Ok(r.results.len()),
    }
}

fn relations() -> Outcome {
    Ok(format!("{} assertions", run_file("relations.lx")?))
}

fn identities() -> Outcome {
    let mut parts = vec![];
    for (tag, f) in [("a", "b0.lx"), ("b", "beta187.lx"), ("c", "pt62_equation.lx"), ("d", "p62_47_extension.lx")] {
        parts.push(format!("({}) {}", tag, run_file(f)?));
    }
    let reg = load_registry().map_err(err)?;
    parts.push(format!("(e) {} registry cycles", reg.len()));
    Ok(parts.join(", "))
}

fn kahn_priddy() -> Outcome {
    let p = projective_infinite();
    let mut checked = 0;
    for stem in 1..=17u32 {
        for s in 1..=9u32 {
            let m = transfer_on_ext(&p, s - 1, s - 1 + stem).map_err(err)?;
            ensure(m.rank() == m.num_rows(), || format!("not onto at stem {} s {}: rank {} of {}", stem, s, m.rank(), m.num_rows()))?;
            checked += m.num_rows();
        }
    }
    Ok(format!("onto in 153 bidegrees, {} target classes", checked))
}

fn ss_oracle() -> Outcome {
    let mut notes = vec![];
    for m in [4, 8] {
        let p = stunted_projective(1, m).map_err(err)?;
        let w = SsWindow { stem_min: 0, stem_max: 12, s_max: 6 };
        let pages = compute_pages(&p, w, pages_needed(&p, w)).map_err(err)?;
        let einf = assemble_einf(&pages).map_err(err)?;
        for stem in 0..=12 {
            for s in 0..=6 {
                let (a, b) = (einf.get(&(s, stem)).copied().unwrap_or(0), ext_dim(&p, s, s + stem).map_err(err)?);
                ensure(a == b, || format!("P(1,{}) (stem {}, s {}): E_inf {} Ext {}", m, stem, s, a, b))?;
            }
        }
        let arrows = pages[0].arrows();
        for want in ["\u{113}2 -> \u{113}1 h0", "\u{113}4 -> \u{113}3 h0"] {
            ensure(arrows.iter().any(|a| a == want), || format!("P(1,{}): d1 {} missing", m, want))?;
        }
        notes.push(format!("P(1,{}) {} pages", m, pages.len()));
    }
    Ok(notes.join(", "))
}

fn rho_values() -> Outcome {
    let got: Vec<u64> = [2u64, 4, 8, 16, 64].iter().map(|&n| rho(n).unwrap()).collect();
    ensure(got == [2, 4, 8, 9, 12], || format!("{:?}", got))?;
    Ok("2,4,8,9,12".into())
}

fn stem62_low() -> Outcome {
    let p62 = stunted_projective(1, 62).map_err(err)?;
    let pt = tilde_p62();
    ensure(ext_dim(&p62, 0, 31).map_err(err)? == 1, || "Ext^{0,31}(P62) is not Z/2".into())?;
    let q = ModuleMorphism::by_ids(p62, pt).map_err(err)?;
    let m = induced_on_ext(&q, 0, 31).map_err(err)?;
    ensure(m.is_zero(), || "q on Ext^{0,31} is nonzero".into())?;
    let mut cells = 0;
    for id in figure_ids() {
        let fig = figure(id).map_err(err)?;
        if fig.is_primary() {
            continue;
        }
        let module = resolve(&fig.module, None).map_err(err)?;
        for &c in &fig.columns {
            let stem = c + fig.stem_offset;
            for s in 0..=1 {
                let (want, got) = (fig.expected(stem, s), ext_dim(&module, s, s + stem).map_err(err)?);
                ensure(want == got, || format!("{} (stem {}, s {}): chart {} engine {}", id, stem, s, want, got))?;
                cells += 1;
            }
        }
    }
    Ok(format!("q* = 0 on Ext^(0,31); {} s <= 1 cells of the stem-62 charts", cells))
}

fn stem62_full() -> Outcome {
    let mut parts = vec![];
    for id in figure_ids() {
        let fig = figure(id).map_err(err)?;
        if fig.is_primary() {
            continue;
        }
        let module: Arc<FiniteAModule> = resolve(&fig.module, None).map_err(err)?;
        let r = check_figure_with(&fig, &module).map_err(err)?;
        ensure(r.passed(), || r.to_string())?;
        parts.push(format!("{} {} cells", id, r.cells));
    }
    Ok(parts.join(", "))
}

fn main() {
    let extended = std::env::args().any(|a| a == "--extended");
    let min = |m: u64| Duration::from_secs(60 * m);
    let mut criteria = vec![
        Criterion { id: "1", title: "d^2 = 0 on sphere, P, M2, Pt62, P(1,8)", tolerance: "exact", budget: min(10), run: d_squared },
        Criterion { id: "2", title: "sphere chart, stems 0-17, s <= 10", tolerance: "exact", budget: min(1), run: figure_one },
        Criterion { id: "3", title: "charts of M2, P(15,18), P, P(1,14)", tolerance: "exact", budget: min(10), run: figures_two_to_five },
        Criterion { id: "4", title: "h_i relations and M2 extensions", tolerance: "exact", budget: min(2), run: relations },
        Criterion { id: "5", title: "chain identities (a)-(e)", tolerance: "exact", budget: min(1), run: identities },
        Criterion { id: "6", title: "transfer onto, stems 1-17, s <= 9", tolerance: "exact", budget: min(5), run: kahn_priddy },
        Criterion { id: "7", title: "cell spectral sequence vs Ext for P(1,4), P(1,8)", tolerance: "exact", budget: min(5), run: ss_oracle },
        Criterion { id: "8", title: "rho(n)", tolerance: "exact", budget: Duration::from_secs(1), run: rho_values },
        Criterion { id: "9", title: "stem 62, s <= 1", tolerance: "exact", budget: min(2), run: stem62_low },
    ];
    if extended {
        criteria.push(Criterion { id: "9x", title: "stem 62 charts, all rows", tolerance: "exact", budget: min(600), run: stem62_full });
    }
    let mut failed = 0;
    let mut summary: BTreeMap<&str, bool> = BTreeMap::new();
    for c in &criteria {
        let start = Instant::now();
        let out = (c.run)();
        let took = start.elapsed();
        let (ok, detail) = match out {
            Ok(d) if took <= c.budget => (true, d),
            Ok(d) => (false, format!("{}; over time budget", d)),
            Err(e) => (false, e),
        };
        println!("{} [{}] {} | {} | {:.1}s of {}s | {}", if ok { "PASS" } else { "FAIL" }, c.id, c.title, c.tolerance, took.as_secs_f64(), c.budget.as_secs(), detail);
        summary.insert(c.id, ok);
        if !ok {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed", summary.len() - failed, summary.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
