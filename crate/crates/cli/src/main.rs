use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};
use rayon::prelude::*;

use pbd_core::catalog::Catalog;
use pbd_core::certificate::{Certificate, Route};
use pbd_core::design::{verify_gdd, verify_pbd, VerificationReport};
use pbd_core::flats::{dimension, flat_spectrum, ScanMode, DEFAULT_EXHAUSTIVE_CEILING};
use pbd_core::geometry::{build_affine_space, build_projective_space};
use pbd_core::inflation::construct_bounded_pbd_with;
use pbd_core::io::{parse, serialize, DesignFile, DesignKind};
use pbd_core::latin::{glue_latin, max_cycle_scan, CycleScan, LatinSquare};
use pbd_core::Error;

/// Exit statuses. Usage errors exit with 2 (reported by clap).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    NoDesign = 3,
    Build = 4,
    Verify = 5,
    Parse = 6,
    Io = 7,
}

struct Failure {
    status: Status,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::NoDesignExists(_) => Status::NoDesign,
            Error::Verification(_) => Status::Verify,
            Error::Parse { .. } | Error::Format(_) => Status::Parse,
            _ => Status::Build,
        };
        Failure { status, message: e.to_string() }
    }
}

type Outcome = Result<(), Failure>;

fn fail(status: Status, message: impl Into<String>) -> Failure {
    Failure { status, message: message.into() }
}

#[derive(Parser)]
#[command(name = "pbd", version, about = "Build and check pairwise balanced designs PBD(v,{3,4,5}) with bounded flats")]
struct Cli {
    /// Catalog bundle to use instead of the built-in one.
    #[arg(long, global = true, value_name = "FILE")]
    catalog: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a design and write it as a design file.
    Construct {
        #[command(subcommand)]
        what: Construct,
    },
    /// Check the PBD or GDD axioms of a design file.
    Verify {
        file: PathBuf,
        /// Allowed block sizes.
        #[arg(long, value_delimiter = ',', default_value = "3,4,5")]
        k: Vec<usize>,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Largest flat generated by d points.
    Flats {
        file: PathBuf,
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[command(flatten)]
        scan: ScanArgs,
        #[arg(long)]
        json: bool,
    },
    /// Largest d such that every d points generate a proper flat.
    Dimension {
        file: PathBuf,
        /// Maximum number of subsets one exhaustive pass may visit.
        #[arg(long, default_value_t = DEFAULT_EXHAUSTIVE_CEILING)]
        ceiling: u128,
    },
    /// Glue an idempotent latin square of order v from a bounded-flat PBD.
    Latin {
        #[arg(long)]
        v: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Longest two-colored cycle of a latin square (text or design file, or a
    /// PBD design file to glue first).
    Cycles {
        file: PathBuf,
        #[command(flatten)]
        scan: ScanArgs,
    },
    /// Construct and verify PBD(v,{3,4,5}) for every v in a range.
    Batch {
        #[arg(long)]
        from: usize,
        #[arg(long)]
        to: usize,
    },
    /// Inspect or regenerate the catalog bundle.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
}

#[derive(Subcommand)]
enum Construct {
    /// PBD(v,{3,4,5}) with a certified bound on three-point flats.
    Pbd {
        #[arg(long)]
        v: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Recorded in the file; constructions are deterministic.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// A projective or affine space.
    #[command(group(ArgGroup::new("space").required(true).args(["pg", "ag"])))]
    Geometry {
        /// Projective space PG_D(Q).
        #[arg(long, num_args = 2, value_names = ["D", "Q"])]
        pg: Option<Vec<u32>>,
        /// Affine space AG_D(Q).
        #[arg(long, num_args = 2, value_names = ["D", "Q"])]
        ag: Option<Vec<u32>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum CatalogAction {
    /// Rebuild the catalog from its recipes and write the bundle.
    Export {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Load and verify the active catalog, then list its entries.
    Check,
}

#[derive(Args)]
#[command(group(ArgGroup::new("mode").required(true).args(["exhaustive", "samples"])))]
struct ScanArgs {
    /// Scan every subset.
    #[arg(long)]
    exhaustive: bool,
    /// Scan this many seeded random subsets.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl ScanArgs {
    fn flat_mode(&self) -> ScanMode {
        match self.samples {
            Some(count) if !self.exhaustive => ScanMode::Sample { count, seed: self.seed },
            _ => ScanMode::Exhaustive,
        }
    }

    fn cycle_mode(&self) -> CycleScan {
        match self.flat_mode() {
            ScanMode::Sample { count, seed } => CycleScan::Sample { count, seed },
            ScanMode::Exhaustive => CycleScan::Exhaustive,
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| fail(Status::Io, format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Outcome {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| fail(Status::Io, format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| fail(Status::Io, e.to_string()))
        }
    }
}

fn catalog(cli_catalog: &Option<PathBuf>) -> Result<Catalog, Failure> {
    match cli_catalog {
        Some(path) => Ok(Catalog::load(path)?),
        None => Ok(Catalog::embedded()?.clone()),
    }
}

fn read_design(path: &Path) -> Result<DesignFile, Failure> {
    Ok(parse(&read(path)?)?)
}

fn report_text(report: &VerificationReport) -> String {
    let mut s = String::new();
    let sizes: Vec<String> = report.stats.block_sizes.iter().map(|(k, n)| format!("{k}:{n}")).collect();
    writeln!(s, "passed: {}", report.passed).unwrap();
    writeln!(s, "block_sizes: {}", sizes.join(" ")).unwrap();
    writeln!(s, "pairs_covered_once: {}", report.stats.pairs_covered_once).unwrap();
    writeln!(s, "pairs_uncovered: {}", report.stats.pairs_uncovered).unwrap();
    writeln!(s, "pairs_covered_repeatedly: {}", report.stats.pairs_covered_repeatedly).unwrap();
    for v in report.violations.iter().take(20) {
        writeln!(s, "violation: {v}").unwrap();
    }
    let hidden = report.violations.len().saturating_sub(20) + report.omitted;
    if hidden > 0 {
        writeln!(s, "violations_not_shown: {hidden}").unwrap();
    }
    s
}

fn construct(cli: &Cli, what: &Construct) -> Outcome {
    match what {
        Construct::Pbd { v, out, seed } => {
            let cat = catalog(&cli.catalog)?;
            let (design, cert) = construct_bounded_pbd_with(&cat, *v)?;
            let file = DesignFile::from_pbd(&design, cert.to_meta(*seed));
            let text = serialize(&file);
            let reparsed = parse(&text)?.to_pbd()?;
            verify_pbd(&reparsed, &[3, 4, 5]).into_result()?;
            eprintln!("v={v} route={} flat_bound={} verified=true", cert.route, cert.flat_bound);
            emit(out.as_deref(), &text)
        }
        Construct::Geometry { pg, ag, out } => {
            let (projective, args) = match (pg, ag) {
                (Some(a), _) => (true, a),
                (_, Some(a)) => (false, a),
                _ => unreachable!("clap requires one of --pg/--ag"),
            };
            let (d, q) = (args[0] as usize, args[1]);
            let design = if projective { build_projective_space(d, q)? } else { build_affine_space(d, q)? };
            let plane = if projective { q * q + q + 1 } else { q * q } as usize;
            let cert = Certificate::new(Route::Geometry, Some(d), plane.min(design.v()))
                .with("family", if projective { "PG" } else { "AG" })
                .with("q", q);
            emit(out.as_deref(), &serialize(&DesignFile::from_pbd(&design, cert.to_meta(0))))
        }
    }
}

fn verify(file: &Path, k: &[usize], json: bool) -> Outcome {
    let df = read_design(file)?;
    let report = match df.kind {
        DesignKind::Gdd => verify_gdd(&df.to_gdd()?, k),
        DesignKind::Pbd => verify_pbd(&df.to_pbd()?, k),
        DesignKind::Latin => {
            let square = LatinSquare::new(df.grid.clone().unwrap_or_default());
            println!("latin: {}", square.is_ok());
            return square.map(|_| ()).map_err(|e| fail(Status::Verify, e.to_string()));
        }
    };
    if json {
        println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    } else {
        print!("{}", report_text(&report));
    }
    if report.passed {
        Ok(())
    } else {
        Err(fail(Status::Verify, "verification failed"))
    }
}

fn flats(file: &Path, d: usize, scan: &ScanArgs, json: bool) -> Outcome {
    let design = read_design(file)?.to_pbd()?;
    let spectrum = flat_spectrum(&design, d, scan.flat_mode())?;
    if json {
        println!("{}", serde_json::to_string(&spectrum).expect("spectrum serializes"));
    } else {
        let w: Vec<String> = spectrum.witness.iter().map(usize::to_string).collect();
        println!("max_flat: {}", spectrum.max);
        println!("witness: {}", w.join(" "));
        println!("closures: {}", spectrum.closures);
    }
    Ok(())
}

fn load_square(path: &Path) -> Result<LatinSquare, Failure> {
    let text = read(path)?;
    if !text.trim_start().starts_with('{') {
        return Ok(LatinSquare::from_text(&text)?);
    }
    let df = parse(&text)?;
    match df.kind {
        DesignKind::Latin => Ok(LatinSquare::new(df.grid.unwrap_or_default())?),
        _ => Ok(glue_latin(&df.to_pbd()?)?.square),
    }
}

fn batch(cli: &Cli, from: usize, to: usize) -> Outcome {
    let cat = catalog(&cli.catalog)?;
    let results: Vec<(String, Option<Status>)> = (from..=to)
        .into_par_iter()
        .map(|v| match construct_bounded_pbd_with(&cat, v) {
            Ok((design, cert)) => {
                let ok = verify_pbd(&design, &[3, 4, 5]).passed;
                let line = format!("v={v} route={} flat_bound={} verified={ok}", cert.route, cert.flat_bound);
                (line, (!ok).then_some(Status::Verify))
            }
            Err(Error::NoDesignExists(_)) => (format!("v={v} error=no_design_exists"), None),
            Err(e) => (format!("v={v} error=\"{e}\""), Some(Failure::from(e).status)),
        })
        .collect();
    let mut out = String::new();
    for (line, _) in &results {
        out.push_str(line);
        out.push('\n');
    }
    emit(None, &out)?;
    match results.iter().find_map(|r| r.1) {
        Some(status) => Err(fail(status, "some values failed")),
        None => Ok(()),
    }
}

fn catalog_action(cli: &Cli, action: &CatalogAction) -> Outcome {
    match action {
        CatalogAction::Export { out } => {
            let cat = Catalog::generate()?;
            emit(out.as_deref(), &cat.to_bundle())
        }
        CatalogAction::Check => {
            let cat = catalog(&cli.catalog)?;
            let mut s = String::new();
            for t in cat.templates() {
                writeln!(s, "gdd {} k={:?} provenance=\"{}\"", t.ty(), t.k(), t.provenance()).unwrap();
            }
            for (v, entry) in cat.small_pbds() {
                writeln!(s, "pbd {v} provenance=\"{}\"", entry.provenance).unwrap();
            }
            emit(None, &s)
        }
    }
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Construct { what } => construct(cli, what),
        Command::Verify { file, k, json } => verify(file, k, *json),
        Command::Flats { file, d, scan, json } => flats(file, *d, scan, *json),
        Command::Dimension { file, ceiling } => {
            let design = read_design(file)?.to_pbd()?;
            println!("{}", dimension(&design, *ceiling)?);
            Ok(())
        }
        Command::Latin { v, out } => {
            let cat = catalog(&cli.catalog)?;
            let (design, cert) = construct_bounded_pbd_with(&cat, *v)?;
            let glued = glue_latin(&design)?;
            eprintln!("v={v} route={} flat_bound={}", cert.route, cert.flat_bound);
            emit(out.as_deref(), &glued.square.to_text())
        }
        Command::Cycles { file, scan } => {
            let square = load_square(file)?;
            let (max, (s, t)) = max_cycle_scan(&square, scan.cycle_mode())?;
            println!("max_cycle: {max}");
            println!("witness: {s} {t}");
            Ok(())
        }
        Command::Batch { from, to } => batch(cli, *from, *to),
        Command::Catalog { action } => catalog_action(cli, action),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.status as u8)
        }
    }
}
