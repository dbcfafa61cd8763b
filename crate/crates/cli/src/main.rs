use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use arrzeta::archzeta2::{Precision, QuadratureConfig};
use arrzeta::io::{load_arrangement, run, Command, Mode, Options};
use arrzeta::resolution::ResolutionChoice;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "arrzeta", version, about = "Singularity invariants of central hyperplane arrangements")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Intersection lattice with codimensions and Moebius values.
    Lattice(Shared),
    /// Dense edges.
    Dense(Shared),
    /// Exceptional divisors of the chosen canonical resolution.
    Resolution(Shared),
    /// Log canonical threshold.
    Lct(Shared),
    /// Candidate poles, archimedean and motivic.
    Candidates(Shared),
    /// Good tuple at the origin by exact LP, and the verdict for `--b`.
    GoodTuple(Shared),
    /// Local topological zeta function of a line arrangement.
    Topzeta(Shared),
    /// Residue of the archimedean zeta function at -2/d for a line arrangement.
    Residue(Shared),
    /// Vertex vanishing, negativity and convexity of the regularized constant.
    VerifySection4(Shared),
    /// End-to-end check that -n/d is a root of the b-function.
    VerifyNd(Shared),
}

#[derive(Clone, Copy, ValueEnum)]
enum ResolutionArg {
    Edges,
    Dense,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Combinatorial,
    Numeric2d,
    Both,
}

#[derive(Args)]
struct Shared {
    /// Arrangement file.
    file: PathBuf,
    /// Multiplicities, comma separated, in file order.
    #[arg(long, value_delimiter = ',')]
    b: Option<Vec<u64>>,
    /// Target absolute tolerance for quadrature.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Decreasing cut-off radii, comma separated.
    #[arg(long, value_delimiter = ',')]
    delta_schedule: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value = "edges")]
    resolution: ResolutionArg,
    #[arg(long, value_enum, default_value = "both")]
    mode: ModeArg,
    /// Seed for interior sampling.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of interior samples.
    #[arg(long, default_value_t = 10)]
    samples: usize,
    /// Largest beta in archimedean candidate lists.
    #[arg(long, default_value_t = 4)]
    beta_max: u32,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    threads: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Cmd {
    fn split(&self) -> (Command, &Shared) {
        match self {
            Cmd::Lattice(s) => (Command::Lattice, s),
            Cmd::Dense(s) => (Command::Dense, s),
            Cmd::Resolution(s) => (Command::Resolution, s),
            Cmd::Lct(s) => (Command::Lct, s),
            Cmd::Candidates(s) => (Command::Candidates, s),
            Cmd::GoodTuple(s) => (Command::GoodTuple, s),
            Cmd::Topzeta(s) => (Command::Topzeta, s),
            Cmd::Residue(s) => (Command::Residue, s),
            Cmd::VerifySection4(s) => (Command::VerifySection4, s),
            Cmd::VerifyNd(s) => (Command::VerifyNd, s),
        }
    }
}

fn options(s: &Shared) -> anyhow::Result<Options> {
    let quadrature = QuadratureConfig {
        target_abs_tol: s.tol,
        delta_schedule: s.delta_schedule.clone().unwrap_or_default(),
        precision: Precision::from_env()?,
        ..QuadratureConfig::default()
    };
    Ok(Options {
        b: s.b.clone(),
        resolution: match s.resolution {
            ResolutionArg::Edges => ResolutionChoice::Edges,
            ResolutionArg::Dense => ResolutionChoice::Dense,
        },
        mode: match s.mode {
            ModeArg::Combinatorial => Mode::Combinatorial,
            ModeArg::Numeric2d => Mode::Numeric2d,
            ModeArg::Both => Mode::Both,
        },
        quadrature,
        seed: s.seed,
        samples: s.samples,
        beta_max: s.beta_max,
    })
}

fn write_atomic(path: &Path, text: &str) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating a temporary file in {}", dir.display()))?;
    tmp.write_all(text.as_bytes())?;
    tmp.write_all(b"\n")?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn execute(cli: &Cli) -> anyhow::Result<i32> {
    let (command, shared) = cli.command.split();
    if let Some(n) = shared.threads {
        if n == 0 {
            bail!("--threads must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let opts = options(shared)?;
    let file = load_arrangement(&shared.file)?;
    let report = run(command, &file, &opts)?;
    let text = report.to_json();
    match &shared.out {
        Some(path) => write_atomic(path, &text)?,
        None => println!("{text}"),
    }
    if let Some(v) = &report.verdict {
        eprintln!("{v}");
    }
    Ok(report.exit_code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
