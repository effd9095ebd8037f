use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use eigenclose::assembly::assemble;
use eigenclose::report::{emit, render, run_experiment, ExperimentConfig, Format, PostKinds};
use eigenclose::{build_mesh, CellKind, DomainKind, ElementKind};

#[derive(Parser)]
#[command(name = "eigenclose", version, about = "Two-sided bounds for Laplace eigenvalues")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Domain {
    Square,
    Lshape,
}

impl From<Domain> for DomainKind {
    fn from(d: Domain) -> Self {
        match d {
            Domain::Square => DomainKind::UnitSquare,
            Domain::Lshape => DomainKind::LShape,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Element {
    Ecr,
    Eq1rot,
}

#[derive(Clone, Copy, ValueEnum)]
enum Dofs {
    /// Edge means and cell mean
    Mean,
    /// Point values at edge midpoints and cell center
    Midpoint,
}

#[derive(Clone, Copy, ValueEnum)]
enum Post {
    None,
    Lowest,
    Higher,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Markdown,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Cell {
    Triangle,
    Rectangle,
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    A,
    B,
}

#[derive(Subcommand)]
enum Command {
    /// Run a refinement sweep and write the bounds table
    Run {
        #[arg(long, value_enum, default_value = "square")]
        domain: Domain,
        #[arg(long, value_enum, default_value = "eq1rot")]
        element: Element,
        #[arg(long, value_enum, default_value = "mean")]
        dofs: Dofs,
        #[arg(long, value_delimiter = ',', default_value = "8,16,32")]
        levels: Vec<usize>,
        #[arg(long, default_value_t = 6)]
        m: usize,
        /// Source solves for the higher-order postprocessing (default: m)
        #[arg(long)]
        subspace: Option<usize>,
        #[arg(long, value_enum, default_value = "both")]
        post: Post,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, value_enum, default_value = "csv")]
        format: OutFormat,
        /// Output directory; stdout when absent
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a mesh in the plain-text dump format
    Mesh {
        #[arg(long, value_enum, default_value = "square")]
        domain: Domain,
        #[arg(long, value_enum, default_value = "rectangle")]
        cell: Cell,
        #[arg(long)]
        n: usize,
    },
    /// Print an assembled matrix in coordinate format
    Matrix {
        #[arg(long, value_enum, default_value = "square")]
        domain: Domain,
        /// ecr, eq1rot, p1, q1, p2, q2, ecr-mid or eq1rot-mid
        #[arg(long)]
        element: String,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value = "a")]
        which: Which,
    },
}

fn nc_kind(element: Element, dofs: Dofs) -> ElementKind {
    match (element, dofs) {
        (Element::Ecr, Dofs::Mean) => ElementKind::Ecr,
        (Element::Ecr, Dofs::Midpoint) => ElementKind::EcrMidpoint,
        (Element::Eq1rot, Dofs::Mean) => ElementKind::Eq1Rot,
        (Element::Eq1rot, Dofs::Midpoint) => ElementKind::Eq1RotMidpoint,
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("EIGENCLOSE_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn run(cli: Cli) -> eigenclose::Result<ExitCode> {
    match cli.command {
        Command::Run {
            domain,
            element,
            dofs,
            levels,
            m,
            subspace,
            post,
            tol,
            seed,
            format,
            out,
        } => {
            let config = ExperimentConfig {
                domain: domain.into(),
                nc_kind: nc_kind(element, dofs),
                post: match post {
                    Post::None => PostKinds::None,
                    Post::Lowest => PostKinds::Lowest,
                    Post::Higher => PostKinds::Higher,
                    Post::Both => PostKinds::Both,
                },
                levels,
                m,
                subspace,
                tol,
                seed,
            };
            let format = match format {
                OutFormat::Csv => Format::Csv,
                OutFormat::Markdown => Format::Markdown,
                OutFormat::Json => Format::Json,
            };
            let bundle = run_experiment(&config)?;
            match out {
                Some(dir) => {
                    let path = emit(&bundle, format, &dir)?;
                    eprintln!("wrote {}", path.display());
                }
                None => {
                    std::io::stdout().write_all(render(&bundle, format)?.as_bytes())?;
                }
            }
            for f in &bundle.failures {
                eprintln!("level n={} failed: {}", f.n, f.error);
            }
            if !bundle.failures.is_empty() {
                return Ok(ExitCode::from(1));
            }
            if bundle.has_inversion() {
                for r in &bundle.reports {
                    if let Err(e) = r.verify() {
                        eprintln!("n={}: {e}", r.n);
                    }
                    for j in r.direction_violations() {
                        eprintln!("n={}: bounds for eigenvalue {j} do not contain the exact value", r.n);
                    }
                }
                return Ok(ExitCode::from(2));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Mesh { domain, cell, n } => {
            let cell = match cell {
                Cell::Triangle => CellKind::Triangle,
                Cell::Rectangle => CellKind::Rectangle,
            };
            let mesh = build_mesh(domain.into(), cell, n)?;
            mesh.write_text(std::io::stdout().lock())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Matrix {
            domain,
            element,
            n,
            which,
        } => {
            let kind = ElementKind::parse(&element)
                .ok_or_else(|| eigenclose::Error::InvalidConfig(format!("unknown element {element}")))?;
            let mesh = build_mesh(domain.into(), kind.cell_kind(), n)?;
            let asm = assemble(&mesh, kind)?;
            let mat = match which {
                Which::A => &asm.a,
                Which::B => &asm.b,
            };
            mat.write_coo(std::io::stdout().lock())?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    configure_threads();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
