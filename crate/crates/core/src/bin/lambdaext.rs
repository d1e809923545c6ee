use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use lambdaext::cache::ResultCache;
use lambdaext::chart::{build_chart, load_annotations, ChartOptions, ChartWindow};
use lambdaext::ext::{ext_dim, set_max_basis, transfer_on_ext};
use lambdaext::modules::{resolve, validate_module, FiniteAModule, Window};
use lambdaext::ss::{assemble_einf, compute_pages, pages_needed, SsWindow};
use lambdaext::verify::{check_figure, figure_ids, run_script};
use lambdaext::Error;

#[derive(Parser)]
#[command(name = "lambdaext", version, about = "Ext over the mod 2 Steenrod algebra via the lambda algebra")]
struct Cli {
    /// Result cache directory (default: $LAMBDAEXT_CACHE)
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Worker threads
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Largest chain basis allowed in one bidegree
    #[arg(long, global = true)]
    max_basis: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Svg,
}

#[derive(Args)]
struct Range {
    /// Stem range `a..b` (inclusive) or a single stem
    #[arg(long, default_value = "0..17", value_parser = parse_range)]
    stems: (u32, u32),
    /// Largest homological degree s
    #[arg(long, default_value_t = 10)]
    smax: u32,
}

#[derive(Subcommand)]
enum Cmd {
    /// Ext chart of a module
    Ext {
        /// `S0`, `P`, `P(l,m)`, `Pt62`, `M2`, `file:<path>`, ...
        module: String,
        #[command(flatten)]
        range: Range,
        /// Multiplication lines to draw, e.g. `0,1,2`; empty for none
        #[arg(long, default_value = "0,1,2", value_delimiter = ',')]
        lines: Vec<String>,
        /// TOML file of display-only annotations
        #[arg(long)]
        annotations: Option<PathBuf>,
    },
    /// Cell filtration spectral sequence of a module
    Ss {
        module: String,
        #[command(flatten)]
        range: Range,
        /// Last page to compute (default: enough to converge)
        #[arg(long)]
        pages: Option<u32>,
    },
    /// Run identity scripts, bundled figures or the registry
    Verify {
        #[command(subcommand)]
        what: VerifyCmd,
    },
    /// Module utilities
    Module {
        #[command(subcommand)]
        what: ModuleCmd,
    },
    /// Rank of the algebraic transfer Ext(P) -> Ext(S0)
    Transfer {
        #[arg(default_value = "P")]
        module: String,
        #[command(flatten)]
        range: Range,
        /// Exit 1 unless every bidegree in positive stems is onto
        #[arg(long)]
        require_onto: bool,
    },
    /// Vector-field number rho(n)
    Rho { n: u64 },
    /// Manage the result cache
    Cache {
        #[command(subcommand)]
        action: CacheCmd,
    },
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// An identity script
    Script { path: PathBuf },
    /// A bundled figure by id, or `all` for the primary ones
    Figure { id: String },
    /// Reload and check every registry representative
    Registry,
}

#[derive(Subcommand)]
enum ModuleCmd {
    /// Check d^2 = 0 over a window
    Check {
        module: String,
        #[arg(long, value_parser = parse_range)]
        stems: Option<(u32, u32)>,
        #[arg(long)]
        smax: Option<u32>,
    },
}

#[derive(Subcommand)]
enum CacheCmd {
    Stats,
    Clear,
    /// Check checksums and recompute a random sample
    Verify {
        #[arg(long, default_value_t = 8)]
        sample: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn parse_range(s: &str) -> Result<(u32, u32), String> {
    let num = |x: &str| x.trim().parse::<u32>().map_err(|e| format!("{}: {}", x, e));
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (num(a)?, num(b.trim_start_matches('='))?),
        None => (num(s)?, num(s)?),
    };
    if a > b {
        return Err(format!("empty range {}", s));
    }
    Ok((a, b))
}

/// Outcome of a command: `Ok(true)` passes, `Ok(false)` is a failed check.
type Outcome = Result<bool, Error>;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::WindowTooLarge { .. } | Error::NotConverged { .. } => 3,
        Error::Parse { .. } | Error::ScriptParse { .. } | Error::UnknownName(_) | Error::Domain(_) | Error::Io(_) => 2,
        _ => 1,
    }
}

fn module(spec: &str) -> Result<Arc<FiniteAModule>, Error> {
    resolve(spec, Some(Path::new(".")))
}

fn print_json(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json"));
}

fn cache(cli: &Cli) -> Result<Option<ResultCache>, Error> {
    ResultCache::from_flag_or_env(cli.cache_dir.as_deref())
}

fn no_svg(cli: &Cli) -> Result<(), Error> {
    if cli.format == Format::Svg {
        return Err(Error::Domain("svg output is only available for `ext`".into()));
    }
    Ok(())
}

fn run(cli: &Cli) -> Outcome {
    match &cli.cmd {
        Cmd::Ext { module: spec, range, lines, annotations } => {
            let m = module(spec)?;
            let mut lines_i = vec![];
            for l in lines.iter().filter(|l| !l.is_empty()) {
                let i = l.trim_start_matches('h').parse().map_err(|_| Error::Domain(format!("line kind {}", l)))?;
                if i > 5 {
                    return Err(Error::Domain(format!("h{} lines are not supported", i)));
                }
                lines_i.push(i);
            }
            let window = ChartWindow { stem_min: range.stems.0, stem_max: range.stems.1, s_max: range.smax };
            let opts = ChartOptions { window, lines: lines_i };
            let cache = cache(cli)?;
            let mut doc = build_chart(&m, &opts, cache.as_ref())?;
            if let Some(p) = annotations {
                doc.annotations = load_annotations(p)?;
            }
            match cli.format {
                Format::Text => print!("{}", doc.to_text()),
                Format::Json => println!("{}", doc.to_json()),
                Format::Svg => print!("{}", doc.to_svg()),
            }
            Ok(true)
        }
        Cmd::Ss { module: spec, range, pages } => {
            no_svg(cli)?;
            let m = module(spec)?;
            let window = SsWindow { stem_min: range.stems.0, stem_max: range.stems.1, s_max: range.smax };
            let r_max = pages.unwrap_or_else(|| pages_needed(&m, window));
            let pages = compute_pages(&m, window, r_max)?;
            let einf = assemble_einf(&pages);
            let mut check = vec![];
            if let Ok(einf) = &einf {
                for stem in window.stem_min..=window.stem_max {
                    for s in 0..=window.s_max {
                        let direct = ext_dim(&m, s, s + stem)?;
                        let total = einf.get(&(s, stem)).copied().unwrap_or(0);
                        check.push((stem, s, total, direct));
                    }
                }
            }
            let agree = einf.is_ok() && check.iter().all(|c| c.2 == c.3);
            let last = pages.last().expect("at least one page");
            if cli.format == Format::Json {
                print_json(&json!({
                    "module": m.name(),
                    "window": window,
                    "pages": pages.iter().map(|p| json!({"r": p.r, "differentials": p.arrows()})).collect::<Vec<_>>(),
                    "einf": last.entries.iter().map(|(&(i, s, stem), e)| json!({"i": i, "s": s, "stem": stem, "names": e.names})).collect::<Vec<_>>(),
                    "converged": einf.is_ok(),
                    "agrees_with_ext": agree,
                }));
            } else {
                for p in &pages {
                    println!("E{}: {} nonzero differentials", p.r, p.differentials.len());
                    for a in p.arrows() {
                        println!("  d{}: {}", p.r, a);
                    }
                }
                println!("E{} entries", last.r);
                for (&(i, s, stem), e) in &last.entries {
                    println!("  (i {}, s {}, stem {})  {}", i, s, stem, e.names.join(", "));
                }
                match &einf {
                    Ok(_) => println!("converged; totals {} direct Ext", if agree { "match" } else { "DIFFER FROM" }),
                    Err(e) => println!("{}", e),
                }
            }
            einf?;
            Ok(agree)
        }
        Cmd::Verify { what } => {
            no_svg(cli)?;
            match what {
                VerifyCmd::Script { path } => {
                    let text = std::fs::read_to_string(path)?;
                    let report = run_script(&text, path.parent())?;
                    if cli.format == Format::Json {
                        print_json(&json!(report
                            .results
                            .iter()
                            .map(|r| json!({"line": r.line, "passed": r.passed, "detail": r.detail, "witness": r.witness}))
                            .collect::<Vec<_>>()));
                    } else {
                        print!("{}", report);
                    }
                    Ok(report.passed())
                }
                VerifyCmd::Figure { id } => {
                    let ids: Vec<String> = if id == "all" {
                        figure_ids().into_iter().filter(|i| lambdaext::verify::figure(i).map(|f| f.is_primary()).unwrap_or(false)).map(String::from).collect()
                    } else {
                        vec![id.clone()]
                    };
                    let mut ok = true;
                    let mut out = vec![];
                    for id in ids {
                        let r = check_figure(&id)?;
                        ok &= r.passed();
                        if cli.format == Format::Json {
                            out.push(json!({"figure": r.figure, "cells": r.cells, "diffs": r.diffs.iter().map(|d| [d.stem, d.s, d.expected as u32, d.actual as u32]).collect::<Vec<_>>(), "lines_checked": r.lines_checked, "line_issues": r.line_issues.len(), "passed": r.passed()}));
                        } else {
                            print!("{}", r);
                        }
                    }
                    if cli.format == Format::Json {
                        print_json(&json!(out));
                    }
                    Ok(ok)
                }
                VerifyCmd::Registry => {
                    let reg = lambdaext::registry::load_registry()?;
                    if cli.format == Format::Json {
                        print_json(&json!(reg.iter().map(|e| json!({"name": e.name, "module": e.module_spec, "s": e.s, "t": e.t})).collect::<Vec<_>>()));
                    } else {
                        for e in reg {
                            println!("{:<24} {:<10} (s {}, stem {})", e.name, e.module_spec, e.s, e.stem());
                        }
                        println!("{} representatives, all cycles", reg.len());
                    }
                    Ok(true)
                }
            }
        }
        Cmd::Module { what: ModuleCmd::Check { module: spec, stems, smax } } => {
            no_svg(cli)?;
            let m = module(spec)?;
            let hint = m.window_hint().unwrap_or(Window { s_max: 5, stem_max: 30 });
            let window = Window { s_max: smax.unwrap_or(hint.s_max), stem_max: stems.map_or(hint.stem_max, |r| r.1) };
            let report = validate_module(&m, window)?;
            if cli.format == Format::Json {
                print_json(&json!({"module": m.name(), "fingerprint": m.fingerprint(), "cells": m.num_cells(), "checked": report.checked, "s_max": window.s_max, "stem_max": window.stem_max}));
            } else {
                println!("{}: {} cells, fingerprint {}", m.name(), m.num_cells(), m.fingerprint());
                println!("d^2 = 0 on {} basis chains (s <= {}, stem <= {})", report.checked, window.s_max, window.stem_max);
            }
            Ok(true)
        }
        Cmd::Transfer { module: spec, range, require_onto } => {
            no_svg(cli)?;
            let m = module(spec)?;
            let mut rows = vec![];
            let mut onto = true;
            for stem in range.stems.0.max(1)..=range.stems.1 {
                for s in 0..range.smax {
                    let mat = transfer_on_ext(&m, s, s + stem)?;
                    let ok = mat.rank() == mat.num_rows();
                    onto &= ok;
                    rows.push((stem, s + 1, mat.rank(), mat.num_rows(), ok));
                }
            }
            if cli.format == Format::Json {
                print_json(&json!(rows.iter().map(|r| json!({"stem": r.0, "s": r.1, "rank": r.2, "target_dim": r.3, "onto": r.4})).collect::<Vec<_>>()));
            } else {
                for r in &rows {
                    if r.3 > 0 {
                        println!("stem {:>3} s {:>2}: rank {} of {}{}", r.0, r.1, r.2, r.3, if r.4 { "" } else { "  NOT ONTO" });
                    }
                }
                println!("{}", if onto { "onto in every bidegree" } else { "not onto" });
            }
            Ok(onto || !require_onto)
        }
        Cmd::Rho { n } => {
            no_svg(cli)?;
            let r = lambdaext::rho::rho(*n)?;
            if cli.format == Format::Json {
                print_json(&json!({"n": n, "rho": r}));
            } else {
                println!("{}", r);
            }
            Ok(true)
        }
        Cmd::Cache { action } => {
            no_svg(cli)?;
            let cache = cache(cli)?.ok_or_else(|| Error::Domain("no cache directory: pass --cache-dir or set LAMBDAEXT_CACHE".into()))?;
            match action {
                CacheCmd::Stats => {
                    let st = cache.stats()?;
                    if cli.format == Format::Json {
                        print_json(&json!({"entries": st.entries(), "modules": st.modules}));
                    } else {
                        println!("{} entries in {}", st.entries(), cache.dir().display());
                        for (fp, (name, n)) in &st.modules {
                            println!("  {} {:<12} {}", &fp[..12], name, n);
                        }
                    }
                }
                CacheCmd::Clear => {
                    let n = cache.clear()?;
                    println!("removed {} entries", n);
                }
                CacheCmd::Verify { sample, seed } => {
                    let r = cache.verify(*sample, *seed)?;
                    if cli.format == Format::Json {
                        print_json(&json!(r));
                    } else {
                        println!("{} checksums ok, {} recomputed and identical", r.checked, r.recomputed);
                    }
                }
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.max_basis {
        set_max_basis(n);
    }
    if let Some(j) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global() {
            eprintln!("error: {}", e);
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(exit_code(&e))
        }
    }
}
