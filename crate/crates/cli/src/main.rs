use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hexcover::covering::Normalization;
use hexcover::gamma::{ell_character, in_n, normal_form, psi_word, Word};
use hexcover::grid::{self, GridSpec};
use hexcover::registry::{format_complex, parse_complex, EvalOptions, FunctionRegistry};
use hexcover::sl3::ShiftLabeling;
use hexcover::suites::SuiteRegistry;
use hexcover::Error;

const EXIT_VERIFY: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(name = "hexcover", version, about = "Evaluate and verify the hexagonal covering map and its companions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a function at one point, e.g. `eval j 0.0+1.0i`
    Eval {
        /// wp, wp-prime, wp-direct, lambda, j, phi, phi-prime, wp-trace, wp-sym, lambda-rep
        function: String,
        /// complex literal such as 0.25+1.5i, or omega
        #[arg(allow_hyphen_values = true)]
        point: String,
        #[command(flatten)]
        opts: Options,
    },
    /// Run an invariant suite: group, elliptic, cover, sl3 or all
    Verify {
        suite: String,
        /// also write the report as JSON
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        opts: Options,
    },
    /// Show the affine image, normal form, character and kernel membership of a word in S, T, t
    Group { word: String },
    /// Sample a function on a rectangle and write CSV, optionally a PPM image
    Grid {
        function: String,
        #[arg(long, default_value_t = -0.5, allow_hyphen_values = true)]
        re_min: f64,
        #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
        re_max: f64,
        #[arg(long, default_value_t = 0.8, allow_hyphen_values = true)]
        im_min: f64,
        #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
        im_max: f64,
        #[arg(long, default_value_t = 64)]
        nx: usize,
        #[arg(long, default_value_t = 64)]
        ny: usize,
        /// CSV output path
        #[arg(long)]
        out: PathBuf,
        /// domain-coloured P6 image
        #[arg(long)]
        ppm: Option<PathBuf>,
        #[command(flatten)]
        opts: Options,
    },
}

#[derive(Args)]
struct Options {
    /// solver tolerance (series truncation for wp, Newton acceptance for phi)
    #[arg(long)]
    tol: Option<f64>,
    /// truncation for the lattice and weight sums
    #[arg(long)]
    cutoff: Option<u32>,
    /// normalisation of the covering map: boundary-matched or printed
    #[arg(long, default_value = "boundary-matched")]
    normalization: Normalization,
    /// half-shift labelling for the sl3 sums: omit-next, omit-same or omit-reflected
    #[arg(long, default_value = "omit-next")]
    labeling: ShiftLabeling,
}

impl Options {
    fn eval_options(&self) -> EvalOptions {
        EvalOptions {
            tol: self.tol,
            cutoff: self.cutoff,
            normalization: self.normalization,
            labeling: self.labeling,
        }
    }
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io(_) => EXIT_IO,
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path).map(BufWriter::new).map_err(|e| Failure {
        code: EXIT_IO,
        message: format!("cannot write {}: {e}", path.display()),
    })
}

fn io_failure(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure {
        code: EXIT_IO,
        message: format!("cannot write {}: {e}", path.display()),
    }
}

fn eval(function: &str, point: &str, opts: &Options) -> Result<(), Failure> {
    let z = parse_complex(point)?;
    let e = FunctionRegistry::default().build(function, &opts.eval_options())?;
    let out = e.eval(z)?;
    println!("value {}", format_complex(out.value));
    if let Some(r) = out.residual {
        println!("residual {}", grid::fmt_real(r));
    }
    Ok(())
}

fn verify(suite: &str, out: Option<&Path>, opts: &Options) -> Result<bool, Failure> {
    let report = SuiteRegistry::default().run(suite, &opts.eval_options())?;
    println!("{report}");
    if let Some(path) = out {
        let mut f = create(path)?;
        writeln!(f, "{}", report.to_json())
            .and_then(|_| f.flush())
            .map_err(|e| io_failure(path, e))?;
    }
    Ok(report.all_passed())
}

fn group(word: &str) -> Result<(), Failure> {
    let w: Word = word.parse()?;
    let g = w.to_gamma()?;
    let m = psi_word(&w)?;
    println!("word {w}");
    println!("matrix {g}");
    println!("map {m}");
    println!("normal-form {}", normal_form(&m)?);
    println!("ell-exponent {}", ell_character(&g)?);
    println!("in-N {}", in_n(&g)?);
    Ok(())
}

fn run_grid(function: &str, region: &GridSpec, out: &Path, ppm: Option<&Path>, opts: &Options) -> Result<(), Failure> {
    let e = FunctionRegistry::default().build(function, &opts.eval_options())?;
    region.validate(e.domain())?;
    // open outputs first so an unwritable path fails before the work
    let mut csv = create(out)?;
    let mut img = ppm.map(|p| create(p).map(|f| (p, f))).transpose()?;
    let rows = grid::evaluate(e.as_ref(), region)?;
    grid::write_csv(&rows, &mut csv)
        .map_err(Failure::from)
        .and_then(|_| csv.flush().map_err(|e| io_failure(out, e)))?;
    if let Some((p, f)) = img.as_mut() {
        grid::write_ppm(&rows, region, f)
            .map_err(Failure::from)
            .and_then(|_| f.flush().map_err(|e| io_failure(p, e)))?;
    }
    let failed: Vec<_> = rows.iter().filter(|r| r.error.is_some()).collect();
    eprintln!("wrote {} rows to {}", rows.len(), out.display());
    if let Some(first) = failed.first() {
        eprintln!(
            "{} nodes could not be evaluated (written as NaN); first at {}: {}",
            failed.len(),
            format_complex(first.z),
            first.error.as_deref().unwrap_or("")
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Eval { function, point, opts } => eval(function, point, opts).map(|_| true),
        Command::Verify { suite, out, opts } => verify(suite, out.as_deref(), opts),
        Command::Group { word } => group(word).map(|_| true),
        Command::Grid {
            function,
            re_min,
            re_max,
            im_min,
            im_max,
            nx,
            ny,
            out,
            ppm,
            opts,
        } => {
            let region = GridSpec {
                re_min: *re_min,
                re_max: *re_max,
                im_min: *im_min,
                im_max: *im_max,
                nx: *nx,
                ny: *ny,
            };
            run_grid(function, &region, out, ppm.as_deref(), opts).map(|_| true)
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_VERIFY),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
