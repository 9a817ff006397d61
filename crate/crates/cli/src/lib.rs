//! Command-line front end for `dvbc-core`.
//!
//! Every command reads one or two JSON scenario documents (see [`document`]).
//! Commands that compute new data write an updated document to `-o` or
//! standard output. Commands that check something print a report. Exit status
//! is 0 on success, 1 when a check fails or an obstruction is found, and 2 on
//! usage, I/O or parse errors.

pub mod checks;
pub mod document;
pub mod report;

use std::collections::BTreeMap;
use std::path::{Path as FsPath, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dvbc_core::cochain::{
    curvature, d_nabla, d_nabla_hom, d_scalar, pullback_cochain, pullback_scalar, scalar_wedge,
    wedge, wedge_averaged, AveragingMode,
};
use dvbc_core::complex::{generator_loops, spanning_tree};
use dvbc_core::tolerance::max_abs_diff;
use dvbc_core::{
    is_flat, parallel_sections, trivial_subbundle_gauge, trivialize, CochainError, ObstructionKind,
    ProductOrder, SimplicialMap, Tolerance, TrivializationResult, Vertex,
};
use nalgebra::DMatrix;
use thiserror::Error;

use crate::document::{parse_with, Document, NamedCochain, ParseError};
use crate::report::{Report, Status};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: ParseError },
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Compute(String),
}

impl From<CochainError> for CliError {
    fn from(e: CochainError) -> Self {
        CliError::Compute(e.to_string())
    }
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "dvbc",
    version,
    about = "Discrete vector bundles with connection"
)]
pub struct Cli {
    #[command(flatten)]
    pub opts: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Absolute tolerance.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol_abs: f64,
    /// Relative tolerance.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol_rel: f64,
    /// Seed for randomly drawn test inputs.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Emit reports as JSON.
    #[arg(long, global = true)]
    pub json: bool,
    /// Write the resulting document here instead of standard output.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OrderArg {
    AlphaFirst,
    WFirst,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Permutation,
    OuterAlpha,
    OuterW,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the identity suite on the document's bundle.
    Check { file: PathBuf },
    /// Append the curvature as a Hom-valued 2-cochain.
    Curvature {
        file: PathBuf,
        #[arg(long, default_value = "curvature")]
        name: String,
    },
    /// Report flatness and generator-loop holonomies.
    Flat { file: PathBuf },
    /// Write a trivializing gauge, or report the obstruction.
    Trivialize { file: PathBuf },
    /// Append a basis of parallel sections.
    ParallelSections {
        file: PathBuf,
        #[arg(long, default_value = "parallel")]
        prefix: String,
        /// Also write the gauge reducing to block upper-unitriangular form.
        #[arg(long)]
        reduce: bool,
    },
    /// Append the covariant coboundary of a named cochain.
    Dnabla {
        file: PathBuf,
        cochain: String,
        #[arg(long)]
        name: Option<String>,
    },
    /// Append the wedge product of a bundle-valued (or scalar) and a scalar cochain.
    Wedge {
        file: PathBuf,
        a: String,
        w: String,
        #[arg(long, value_enum, default_value_t = OrderArg::AlphaFirst)]
        order: OrderArg,
        #[arg(long, value_enum, default_value_t = ModeArg::Permutation)]
        mode: ModeArg,
        #[arg(long)]
        name: Option<String>,
    },
    /// Pull the codomain's bundle and cochains back to the domain's complex.
    Pullback {
        domain: PathBuf,
        codomain: PathBuf,
        /// Vertex map as `u=v` pairs, e.g. `0=0,1=1,2=2,3=0`.
        #[arg(long)]
        map: String,
    },
}

/// Result of a command before anything is written.
#[derive(Debug)]
pub struct Outcome {
    pub report: Option<Report>,
    pub document: Option<Document>,
    pub success: bool,
}

impl Outcome {
    fn report(report: Report) -> Self {
        let success = report.passed();
        Self {
            report: Some(report),
            document: None,
            success,
        }
    }

    fn document(document: Document, report: Report) -> Self {
        let success = report.passed();
        Self {
            report: Some(report),
            document: Some(document),
            success,
        }
    }
}

pub fn tolerance(opts: &GlobalOpts) -> Result<Tolerance, CliError> {
    Tolerance::new(opts.tol_abs, opts.tol_rel)
        .ok_or_else(|| CliError::Usage("tolerances must be finite and non-negative".into()))
}

pub fn load(path: &FsPath, tol: &Tolerance) -> Result<Document, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_with(&text, tol).map_err(|source| CliError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

fn cochain<'a>(doc: &'a Document, name: &str) -> Result<&'a NamedCochain, CliError> {
    doc.cochains
        .get(name)
        .ok_or_else(|| CliError::Usage(format!("no cochain named `{name}`")))
}

fn insert(doc: &mut Document, name: String, c: NamedCochain) -> Result<(), CliError> {
    if doc.cochains.contains_key(&name) {
        return Err(CliError::Usage(format!(
            "a cochain named `{name}` already exists (choose another with --name)"
        )));
    }
    doc.cochains.insert(name, c);
    Ok(())
}

fn require_bundle(doc: &Document) -> Result<Arc<dvbc_core::Bundle>, CliError> {
    doc.bundle
        .clone()
        .ok_or_else(|| CliError::Usage("the document has no bundle section".into()))
}

fn compute<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Compute(e.to_string())
}

/// Parses `u=v,u=v,…`.
pub fn parse_vertex_map(text: &str) -> Result<BTreeMap<Vertex, Vertex>, CliError> {
    let mut map = BTreeMap::new();
    for pair in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (u, v) = pair
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("map entry `{pair}` is not of the form u=v")))?;
        let parse = |s: &str| {
            s.trim().parse::<Vertex>().map_err(|_| {
                CliError::Usage(format!("map entry `{pair}` has a non-integer vertex"))
            })
        };
        if map.insert(parse(u)?, parse(v)?).is_some() {
            return Err(CliError::Usage(format!(
                "vertex {} is mapped twice",
                u.trim()
            )));
        }
    }
    Ok(map)
}

fn cmd_curvature(mut doc: Document, name: String) -> Result<Outcome, CliError> {
    let bundle = require_bundle(&doc)?;
    let f = curvature(&bundle);
    let mut report = Report::new("curvature");
    report.push(&name, Status::Info, Some(f.max_abs()), "largest entry");
    insert(&mut doc, name, NamedCochain::Hom(f))?;
    Ok(Outcome::document(doc, report))
}

fn cmd_flat(doc: &Document, tol: &Tolerance) -> Result<Outcome, CliError> {
    let bundle = require_bundle(doc)?;
    let flat = is_flat(&bundle, tol);
    let mut report = Report::new("flatness");
    let detail = match &flat.witness {
        Some(t) => format!("holonomy around {t} differs from the identity"),
        None => format!("{} triangles", bundle.complex().count(2)),
    };
    let status = if flat.flat {
        Status::Pass
    } else {
        Status::Fail
    };
    report.push("flat", status, Some(flat.max_residual), detail);
    if bundle.complex().is_connected() {
        let tree = spanning_tree(bundle.complex()).map_err(compute)?;
        for path in generator_loops(bundle.complex(), &tree) {
            let h = bundle.holonomy(&path).map_err(compute)?;
            let dev = max_abs_diff(&h, &DMatrix::identity(h.nrows(), h.ncols()));
            report.push("holonomy", Status::Info, Some(dev), format!("{path}"));
        }
    }
    Ok(Outcome::report(report))
}

fn cmd_trivialize(mut doc: Document, tol: &Tolerance) -> Result<Outcome, CliError> {
    let bundle = require_bundle(&doc)?;
    let mut report = Report::new("trivialization");
    match trivialize(&bundle, tol).map_err(compute)? {
        TrivializationResult::Gauge(g) => {
            report.push("trivializable", Status::Pass, None, "gauge section written");
            doc.gauge = Some(g);
            Ok(Outcome::document(doc, report))
        }
        TrivializationResult::Obstruction(o) => {
            let detail = match &o.kind {
                ObstructionKind::NonFlat(t) => {
                    format!("non_flat: holonomy around {t} is not the identity")
                }
                ObstructionKind::NontrivialHolonomy(p) => {
                    format!("nontrivial_holonomy: around {p}")
                }
            };
            report.push("trivializable", Status::Fail, Some(o.residual), detail);
            Ok(Outcome::report(report))
        }
    }
}

fn cmd_parallel_sections(
    mut doc: Document,
    tol: &Tolerance,
    prefix: &str,
    reduce: bool,
) -> Result<Outcome, CliError> {
    let bundle = require_bundle(&doc)?;
    let basis = parallel_sections(&bundle, tol).map_err(compute)?;
    let mut report = Report::new("parallel sections");
    report.push(
        "dimension",
        Status::Info,
        None,
        basis.dimension().to_string(),
    );
    for (i, s) in basis.sections().iter().enumerate() {
        insert(
            &mut doc,
            format!("{prefix}_{i}"),
            NamedCochain::Vector(s.clone()),
        )?;
    }
    if reduce {
        if basis.dimension() == 0 {
            report.push("reduce", Status::Skip, None, "no parallel sections");
        } else {
            doc.gauge = Some(trivial_subbundle_gauge(&basis, tol).map_err(compute)?);
            report.push("reduce", Status::Info, None, "gauge section written");
        }
    }
    Ok(Outcome::document(doc, report))
}

fn cmd_dnabla(mut doc: Document, source: &str, name: Option<String>) -> Result<Outcome, CliError> {
    let out = match cochain(&doc, source)? {
        NamedCochain::Scalar(w) => NamedCochain::Scalar(d_scalar(w)),
        NamedCochain::Vector(a) => NamedCochain::Vector(d_nabla(a)?),
        NamedCochain::Hom(a) => NamedCochain::Hom(d_nabla_hom(a)?),
    };
    let name = name.unwrap_or_else(|| format!("d_{source}"));
    let mut report = Report::new("covariant coboundary");
    report.push(
        &name,
        Status::Info,
        None,
        format!("degree {}", out.degree()),
    );
    insert(&mut doc, name, out)?;
    Ok(Outcome::document(doc, report))
}

fn cmd_wedge(
    mut doc: Document,
    a: &str,
    w: &str,
    order: OrderArg,
    mode: ModeArg,
    name: Option<String>,
) -> Result<Outcome, CliError> {
    let NamedCochain::Scalar(wc) = cochain(&doc, w)? else {
        return Err(CliError::Usage(format!("`{w}` must be a scalar cochain")));
    };
    let order = match order {
        OrderArg::AlphaFirst => ProductOrder::AlphaFirst,
        OrderArg::WFirst => ProductOrder::WFirst,
    };
    let out = match (cochain(&doc, a)?, mode) {
        (NamedCochain::Scalar(ac), ModeArg::Permutation) => NamedCochain::Scalar(match order {
            ProductOrder::AlphaFirst => scalar_wedge(ac, wc)?,
            ProductOrder::WFirst => scalar_wedge(wc, ac)?,
        }),
        (NamedCochain::Vector(ac), ModeArg::Permutation) => {
            NamedCochain::Vector(wedge(ac, wc, order)?)
        }
        (NamedCochain::Vector(ac), m) => {
            if order != ProductOrder::AlphaFirst {
                return Err(CliError::Usage("averaging modes compute α ∧ w only".into()));
            }
            let m = if m == ModeArg::OuterAlpha {
                AveragingMode::OuterAlpha
            } else {
                AveragingMode::OuterW
            };
            NamedCochain::Vector(wedge_averaged(ac, wc, m)?)
        }
        (NamedCochain::Scalar(_), _) => {
            return Err(CliError::Usage(
                "averaging modes need a bundle-valued first operand".into(),
            ))
        }
        (NamedCochain::Hom(_), _) => {
            return Err(CliError::Usage(format!(
                "`{a}` is Hom-valued; wedge needs a vector or scalar cochain"
            )))
        }
    };
    let name = name.unwrap_or_else(|| format!("{a}_wedge_{w}"));
    let mut report = Report::new("wedge product");
    report.push(
        &name,
        Status::Info,
        None,
        format!("degree {}", out.degree()),
    );
    insert(&mut doc, name, out)?;
    Ok(Outcome::document(doc, report))
}

fn cmd_pullback(domain: Document, codomain: Document, map: &str) -> Result<Outcome, CliError> {
    let x = domain
        .complex
        .clone()
        .ok_or_else(|| CliError::Usage("the domain document has no complex section".into()))?;
    let y = codomain
        .complex
        .clone()
        .ok_or_else(|| CliError::Usage("the codomain document has no complex section".into()))?;
    let f = SimplicialMap::new(x.clone(), y, parse_vertex_map(map)?)
        .map_err(|e| CliError::Usage(format!("--map: {e}")))?;
    let mut out = Document {
        complex: Some(x),
        ..Document::default()
    };
    let mut report = Report::new("pullback");
    let pulled = match &codomain.bundle {
        Some(b) => Some(Arc::new(b.pullback(&f).map_err(compute)?)),
        None => None,
    };
    out.bundle = pulled.clone();
    for (name, c) in &codomain.cochains {
        let result = match (c, &pulled) {
            (NamedCochain::Scalar(w), _) => NamedCochain::Scalar(pullback_scalar(&f, w)?),
            (NamedCochain::Vector(a), Some(p)) => NamedCochain::Vector(pullback_cochain(&f, a, p)?),
            (NamedCochain::Vector(_), None) => unreachable!("vector cochains require a bundle"),
            (NamedCochain::Hom(_), _) => {
                report.push(
                    name,
                    Status::Skip,
                    None,
                    "Hom-valued cochains are not pulled back",
                );
                continue;
            }
        };
        report.push(
            name,
            Status::Info,
            None,
            format!("{} degree {}", result.kind(), result.degree()),
        );
        out.cochains.insert(name.clone(), result);
    }
    Ok(Outcome::document(out, report))
}

/// Runs a parsed command without writing anything.
pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let tol = tolerance(&cli.opts)?;
    match &cli.command {
        Command::Check { file } => {
            let doc = load(file, &tol)?;
            Ok(Outcome::report(checks::run(&doc, &tol, cli.opts.seed)?))
        }
        Command::Curvature { file, name } => cmd_curvature(load(file, &tol)?, name.clone()),
        Command::Flat { file } => cmd_flat(&load(file, &tol)?, &tol),
        Command::Trivialize { file } => cmd_trivialize(load(file, &tol)?, &tol),
        Command::ParallelSections {
            file,
            prefix,
            reduce,
        } => cmd_parallel_sections(load(file, &tol)?, &tol, prefix, *reduce),
        Command::Dnabla {
            file,
            cochain,
            name,
        } => cmd_dnabla(load(file, &tol)?, cochain, name.clone()),
        Command::Wedge {
            file,
            a,
            w,
            order,
            mode,
            name,
        } => cmd_wedge(load(file, &tol)?, a, w, *order, *mode, name.clone()),
        Command::Pullback {
            domain,
            codomain,
            map,
        } => cmd_pullback(load(domain, &tol)?, load(codomain, &tol)?, map),
    }
}

fn render(report: &Report, json: bool) -> String {
    if json {
        report.to_json()
    } else {
        report.to_string()
    }
}

/// Executes, writes the document and report, and returns the exit status.
pub fn run(cli: &Cli) -> i32 {
    let outcome = match execute(cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    match (&outcome.document, &cli.opts.output) {
        (Some(doc), Some(path)) => {
            if let Err(e) = std::fs::write(path, doc.serialize()) {
                eprintln!("error: {}: {e}", path.display());
                return EXIT_USAGE;
            }
            if let Some(r) = &outcome.report {
                print!("{}", render(r, cli.opts.json));
            }
        }
        (Some(doc), None) => {
            print!("{}", doc.serialize());
            if let Some(r) = &outcome.report {
                eprint!("{}", render(r, cli.opts.json));
            }
        }
        (None, _) => {
            if let Some(r) = &outcome.report {
                print!("{}", render(r, cli.opts.json));
            }
        }
    }
    if outcome.success {
        EXIT_OK
    } else {
        EXIT_FAILURE
    }
}
