use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pptlattice::detection::TGrid;
use pptlattice::pauli::Site;
use pptlattice::report::{
    inspect, map_diag, orbit_table, run_sweep, ClassificationRecord, MapKind, NRange, OutputFormat, SweepConfig,
};
use pptlattice::states::{parse_grid, LatticeSubset};

const EXIT_USAGE: u8 = 1;
const EXIT_CONSISTENCY: u8 = 2;

#[derive(Parser)]
#[command(name = "pptlattice", version, about = "Classify Bell-diagonal lattice states on C4 x C4")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Comma-separated detection times
    #[arg(long, default_value = "0.001,0.01,0.05,0.1,0.2,0.3,0.4,0.5,0.52,0.549")]
    t_grid: TGrid,
    /// Negativity threshold
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Worker threads (default: all cores)
    #[arg(long)]
    jobs: Option<usize>,
    /// Restrict to N_I in a range such as 4..10
    #[arg(long)]
    n_range: Option<NRange>,
}

impl Common {
    fn config(&self, format: OutputFormat, orbits_only: bool) -> SweepConfig {
        SweepConfig {
            t_grid: self.t_grid.clone(),
            tolerance: self.tol,
            jobs: self.jobs,
            format,
            n_range: self.n_range.clone(),
            orbits_only,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Classify every nonempty subset and print per-N_I counts
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "json")]
        format: OutputFormat,
        /// One record per orbit instead of per subset
        #[arg(long)]
        orbits: bool,
        /// Where to write the records
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Detailed report for one subset
    Inspect {
        /// Sites as col,row pairs, e.g. 0,2 1,1 2,3
        sites: Vec<String>,
        /// Subset as a 16-bit mask (decimal or 0x-prefixed)
        #[arg(long, conflicts_with_all = ["sites", "grid"])]
        mask: Option<String>,
        /// File holding a rendered 4x4 grid
        #[arg(long, conflicts_with = "sites")]
        grid: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        json: bool,
    },
    /// Choi spectrum, CP flag and decomposition residual of a semigroup map
    MapDiag {
        /// gamma1, gamma2, gamma or gamma2-component
        #[arg(long)]
        kind: MapKind,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        json: bool,
    },
    /// List orbit representatives with size and verdict
    Orbits {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "csv")]
        format: OutputFormat,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Consistency(String),
    Io(io::Error),
    Engine(pptlattice::Error),
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Self::Io(e)
    }
}

impl From<pptlattice::Error> for Failure {
    fn from(e: pptlattice::Error) -> Self {
        match e {
            pptlattice::Error::Consistency(msg) => Self::Consistency(msg),
            other => Self::Engine(other),
        }
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Self::Io(io::Error::other(e))
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Self::Io(io::Error::other(e))
    }
}

fn parse_subset(sites: &[String], mask: Option<&str>, grid: Option<&PathBuf>) -> Result<LatticeSubset, Failure> {
    if let Some(m) = mask {
        let value = match m.strip_prefix("0x").or_else(|| m.strip_prefix("0X")) {
            Some(hex) => u16::from_str_radix(hex, 16),
            None => m.parse(),
        };
        return value
            .map(LatticeSubset::from_mask)
            .map_err(|_| Failure::Usage(format!("bad mask {m:?}")));
    }
    if let Some(path) = grid {
        let text = std::fs::read_to_string(path)?;
        return parse_grid(&text).map_err(|e| Failure::Usage(e.to_string()));
    }
    let parsed = sites
        .iter()
        .map(|s| {
            let (a, b) = s
                .trim_matches(|c| c == '(' || c == ')')
                .split_once(',')
                .ok_or_else(|| Failure::Usage(format!("site {s:?} is not col,row")))?;
            let num = |x: &str| x.trim().parse::<u8>().map_err(|_| Failure::Usage(format!("bad site {s:?}")));
            Site::new(num(a)?, num(b)?).map_err(|e| Failure::Usage(e.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(LatticeSubset::from_sites(parsed))
}

fn write_records(records: &[ClassificationRecord], format: OutputFormat, out: impl Write) -> Result<(), Failure> {
    match format {
        OutputFormat::Json => {
            let mut out = BufWriter::new(out);
            serde_json::to_writer(&mut out, records)?;
            out.flush()?;
        }
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(ClassificationRecord::CSV_HEADER)?;
            for r in records {
                w.write_record(r.csv_row())?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let stdout = io::stdout();
    match cli.command {
        Command::Sweep {
            common,
            format,
            orbits,
            output,
        } => {
            let cfg = common.config(format, orbits);
            let report = run_sweep(&cfg)?;
            if let Some(path) = output {
                write_records(&report.records, format, File::create(path)?)?;
            }
            print!("{}", report.summary);
            if !report.violations.is_empty() {
                return Err(Failure::Consistency(report.violations.join("\n")));
            }
        }
        Command::Inspect {
            sites,
            mask,
            grid,
            common,
            json,
        } => {
            let subset = parse_subset(&sites, mask.as_deref(), grid.as_ref())?;
            if subset.is_empty() {
                return Err(Failure::Usage("subset is empty".into()));
            }
            let report = inspect(subset, &common.config(OutputFormat::Json, false))?;
            if report.ppt_combinatorial != report.ppt_spectral {
                return Err(Failure::Consistency(format!("PPT routes disagree on {subset}")));
            }
            if json {
                serde_json::to_writer_pretty(stdout.lock(), &report)?;
                println!();
            } else {
                print!("{report}");
            }
        }
        Command::MapDiag { kind, t, json } => {
            if t < 0.0 {
                return Err(Failure::Usage(format!("t must be nonnegative, got {t}")));
            }
            let diag = map_diag(kind, t)?;
            if json {
                serde_json::to_writer_pretty(stdout.lock(), &diag)?;
                println!();
            } else {
                print!("{diag}");
            }
        }
        Command::Orbits { common, format } => {
            let rows = orbit_table(&common.config(format, true))?;
            match format {
                OutputFormat::Json => {
                    serde_json::to_writer(stdout.lock(), &rows)?;
                    println!();
                }
                OutputFormat::Csv => {
                    let mut w = csv::Writer::from_writer(stdout.lock());
                    w.write_record(["canonical_mask", "N_I", "orbit_size", "ppt", "verdict"])?;
                    for r in rows {
                        w.write_record([
                            format!("{:#06x}", r.canonical_mask),
                            r.n.to_string(),
                            r.orbit_size.to_string(),
                            r.ppt.to_string(),
                            r.verdict.to_string(),
                        ])?;
                    }
                    w.flush()?;
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Consistency(msg)) => {
            eprintln!("consistency check failed:\n{msg}");
            ExitCode::from(EXIT_CONSISTENCY)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
        Err(Failure::Engine(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
