use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use unilocal::experiments::{
    mixed_ghz_spec, render, run_hierarchy, run_ole, run_scaling, to_json, verify_suite, BGrid, OutputFormat,
    SweepConfig,
};
use unilocal::io::{bisym_spec_from_arg, cm_to_csv, fs_spec_from_arg, read_cm};
use unilocal::localization::{block_log_negativity, equivalent_two_mode_invariants, localize};
use unilocal::measures::{log_negativity, EntanglementReport, ModeBipartition};
use unilocal::oracle::reports_to_csv;
use unilocal::states::{bisymmetric_cm, fully_symmetric_cm, BisymmetricSpec, FullySymmetricSpec};
use unilocal::symplectic::{delta_invariant, determinant, is_bona_fide, purity, symplectic_eigenvalues};
use unilocal::{tol, CovarianceMatrix, Error, ErrorKind};

/// Entanglement of multimode Gaussian states: spectra, reports, localization
/// and parameter sweeps. Mode indices on the command line start at 1.
#[derive(Parser)]
#[command(name = "unilocal", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format
    #[arg(long, global = true, default_value = "csv", value_parser = parse_format)]
    format: OutputFormat,

    /// Write output here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Declare states separable when the smallest partially transposed
    /// symplectic eigenvalue is at least 1 - TOL
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Worker threads (0 = one per core)
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Symplectic spectrum and global invariants of a state
    Spectrum(StateArgs),
    /// Entanglement report for a bipartition, with localization when possible
    Report {
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        split: SplitArgs,
        /// Fail with exit code 4 unless the state localizes
        #[arg(long)]
        localize: bool,
        /// Include the localized covariance matrix and local symplectic map
        #[arg(long)]
        dump: bool,
    },
    /// Reduce a bisymmetric state to one correlated pair of modes
    Localize {
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        split: SplitArgs,
    },
    /// Block log-negativity of k x (M - k) splits over a b grid
    Hierarchy {
        /// Total number of modes (even)
        #[arg(long, default_value_t = 20)]
        modes: usize,
        /// Block sizes, comma separated (default 1..=M/2)
        #[arg(long, value_delimiter = ',')]
        k: Vec<usize>,
        #[command(flatten)]
        grid: GridArgs,
        /// Traced-out modes of the pure parent, comma separated
        #[arg(long, value_delimiter = ',', default_value = "0,4")]
        trace_out: Vec<usize>,
    },
    /// Pairwise and half-vs-half entanglement of formation versus size
    Scaling {
        /// Largest total number of modes (even)
        #[arg(long, default_value_t = 20)]
        modes: usize,
        #[arg(long, default_value_t = 1.5)]
        b: f64,
        #[arg(long, value_delimiter = ',', default_value = "0,4")]
        trace_out: Vec<usize>,
    },
    /// Optimal block size and its log-negativity over a b grid
    Ole {
        #[arg(long, default_value_t = 20)]
        modes: usize,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_delimiter = ',', default_value = "0,4")]
        trace_out: Vec<usize>,
    },
    /// Cross-check closed forms against brute-force references on random states
    Verify {
        #[arg(long, default_value_t = 0x5eed_2024)]
        seed: u64,
        #[arg(long, default_value_t = 500)]
        cases: usize,
    },
}

#[derive(Args)]
struct StateArgs {
    /// Covariance matrix file (.json or .csv)
    #[arg(long, group = "source")]
    cm: Option<PathBuf>,
    /// Fully symmetric spec, inline JSON or a file
    #[arg(long, group = "source")]
    fs_spec: Option<String>,
    /// Bisymmetric spec, inline JSON or a file
    #[arg(long, group = "source")]
    bisym_spec: Option<String>,
    /// GHZ-type state with this many modes (needs --b)
    #[arg(long, group = "source", requires = "b")]
    modes: Option<usize>,
    #[arg(long)]
    b: Option<f64>,
    /// Modes traced out of the pure GHZ-type parent
    #[arg(long, default_value_t = 0)]
    trace_out: usize,
}

#[derive(Args)]
struct SplitArgs {
    /// Leading m modes against the remaining n
    #[arg(long, num_args = 2, value_names = ["M", "N"], conflicts_with_all = ["k", "side_a"])]
    split: Option<Vec<usize>>,
    /// Leading k modes against the rest
    #[arg(long, conflicts_with = "side_a")]
    k: Option<usize>,
    /// Modes of the first party, comma separated; the rest form the second
    #[arg(long, value_delimiter = ',')]
    side_a: Option<Vec<usize>>,
}

#[derive(Args)]
struct GridArgs {
    /// Evenly spaced grid lo:hi:steps
    #[arg(long, value_parser = parse_grid, conflicts_with = "b")]
    b_grid: Option<BGrid>,
    /// Explicit b values, comma separated
    #[arg(long, value_delimiter = ',')]
    b: Vec<f64>,
}

impl GridArgs {
    fn values(&self) -> Vec<f64> {
        if !self.b.is_empty() {
            self.b.clone()
        } else {
            self.b_grid.unwrap_or_default().values()
        }
    }
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_grid(s: &str) -> Result<BGrid, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

enum Source {
    Cm,
    Fs(FullySymmetricSpec),
    Bisym(BisymmetricSpec),
}

fn load_state(args: &StateArgs) -> unilocal::Result<(CovarianceMatrix, Source)> {
    if let Some(path) = &args.cm {
        return Ok((read_cm(path)?, Source::Cm));
    }
    if let Some(arg) = &args.fs_spec {
        let spec = fs_spec_from_arg(arg)?;
        return Ok((fully_symmetric_cm(&spec)?, Source::Fs(spec)));
    }
    if let Some(arg) = &args.bisym_spec {
        let spec = bisym_spec_from_arg(arg)?;
        return Ok((bisymmetric_cm(&spec)?, Source::Bisym(spec)));
    }
    if let (Some(modes), Some(b)) = (args.modes, args.b) {
        let spec = mixed_ghz_spec(modes, args.trace_out, b)?;
        return Ok((fully_symmetric_cm(&spec)?, Source::Fs(spec)));
    }
    Err(invalid("give a state with --cm, --fs-spec, --bisym-spec or --modes with --b"))
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

/// Resolve the split flags against a state. The default is the spec's own
/// split for bisymmetric specs and the leading half otherwise.
fn bipartition(split: &SplitArgs, modes: usize, source: &Source) -> unilocal::Result<ModeBipartition> {
    if let Some(side_a) = &split.side_a {
        if let Some(&bad) = side_a.iter().find(|&&i| i == 0 || i > modes) {
            return Err(invalid(format!("mode {bad} outside 1..={modes}")));
        }
        let a: Vec<usize> = side_a.iter().map(|i| i - 1).collect();
        let b: Vec<usize> = (0..modes).filter(|i| !a.contains(i)).collect();
        return ModeBipartition::new(a, b);
    }
    let (m, n) = match (&split.split, split.k, source) {
        (Some(mn), _, _) => (mn[0], mn[1]),
        (None, Some(k), _) => (k, modes.saturating_sub(k)),
        (None, None, Source::Bisym(spec)) => (spec.m, spec.n),
        (None, None, _) => (modes / 2, modes - modes / 2),
    };
    if m + n != modes {
        return Err(invalid(format!("split {m} x {n} does not match a {modes}-mode state")));
    }
    ModeBipartition::split(m, n)
}

fn apply_tol(mut rep: EntanglementReport, tol: Option<f64>) -> EntanglementReport {
    if let Some(t) = tol {
        rep.separable = Some(rep.nu_tilde_min >= 1.0 - t);
    }
    rep
}

fn one_based(modes: &[usize]) -> Vec<usize> {
    modes.iter().map(|i| i + 1).collect()
}

fn check_tol(tol: Option<f64>) -> unilocal::Result<()> {
    match tol {
        Some(t) if t < 0.0 || !t.is_finite() => Err(invalid(format!("tolerance {t} must be finite and non-negative"))),
        _ => Ok(()),
    }
}

fn spectrum(cli: &Cli, state: &StateArgs) -> unilocal::Result<String> {
    let (cm, _) = load_state(state)?;
    let spec = symplectic_eigenvalues(&cm)?;
    match cli.format {
        OutputFormat::Csv => {
            let mut out = String::from("mode,nu\n");
            for (i, v) in spec.values.iter().enumerate() {
                out.push_str(&format!("{},{}\n", i + 1, v));
            }
            Ok(out)
        }
        OutputFormat::Json => {
            let value = json!({
                "modes": cm.modes(),
                "values": spec.values,
                "clusters": spec.clusters,
                "purity": purity(&cm)?,
                "determinant": determinant(&cm),
                "delta": delta_invariant(&cm),
                "bona_fide": is_bona_fide(&cm, cli.tol.unwrap_or(tol::PHYS))?,
            });
            Ok(pretty(&value))
        }
    }
}

fn report(cli: &Cli, state: &StateArgs, split: &SplitArgs, force: bool, dump: bool) -> unilocal::Result<String> {
    let (cm, source) = load_state(state)?;
    let part = bipartition(split, cm.modes(), &source)?;
    let rep = apply_tol(log_negativity(&cm, &part)?, cli.tol);

    let leading = part.is_leading_split();
    let (m, n) = (part.side_a.len(), part.side_b.len());
    let invariant = match (&source, leading) {
        (Source::Fs(spec), true) => Some(block_log_negativity(spec, m)?),
        (Source::Bisym(spec), true) if spec.m == m => Some(equivalent_two_mode_invariants(spec)?.report()?),
        _ => None,
    }
    .map(|r| apply_tol(r, cli.tol));

    let (localization, localization_error) = if leading {
        match localize(&cm, m, n) {
            Ok(loc) => {
                let mut v = json!({
                    "report": apply_tol(loc.equivalent.report()?, cli.tol),
                    "equivalent": loc.equivalent,
                    "residual": loc.residual,
                });
                if dump {
                    v["cm_final"] = serde_json::to_value(&loc.cm_final).expect("matrix serializes");
                    v["local_symplectic"] = serde_json::to_value(&loc.local_symplectic).expect("matrix serializes");
                }
                (Some(v), None)
            }
            Err(e) if force || e.kind() != ErrorKind::Localization => return Err(e),
            Err(e) => (None, Some(e.to_string())),
        }
    } else if force {
        return Err(invalid("localization needs a split of the leading modes against the rest"));
    } else {
        (None, Some("split is not leading modes against the rest".to_string()))
    };

    let value = json!({
        "modes": cm.modes(),
        "side_a": one_based(&part.side_a),
        "side_b": one_based(&part.side_b),
        "report": rep,
        "invariant": invariant,
        "localization": localization,
        "localization_error": localization_error,
    });
    Ok(pretty(&value))
}

fn localize_cmd(cli: &Cli, state: &StateArgs, split: &SplitArgs) -> unilocal::Result<String> {
    let (cm, source) = load_state(state)?;
    let part = bipartition(split, cm.modes(), &source)?;
    if !part.is_leading_split() {
        return Err(invalid("localization needs a split of the leading modes against the rest"));
    }
    let loc = localize(&cm, part.side_a.len(), part.side_b.len())?;
    match cli.format {
        OutputFormat::Csv => Ok(cm_to_csv(&loc.cm_final)),
        OutputFormat::Json => Ok(pretty(&serde_json::to_value(&loc).expect("result serializes"))),
    }
}

fn pretty(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON value serializes");
    s.push('\n');
    s
}

fn sweep_config(cli: &Cli, mut cfg: SweepConfig, qs: &[usize]) -> SweepConfig {
    cfg.qs = qs.to_vec();
    cfg.format = cli.format;
    cfg.tol = cli.tol;
    cfg.jobs = cli.jobs;
    cfg
}

fn even_half(modes: usize) -> unilocal::Result<usize> {
    if modes == 0 || !modes.is_multiple_of(2) {
        return Err(invalid(format!("--modes must be a positive even number, got {modes}")));
    }
    Ok(modes / 2)
}

fn run(cli: &Cli) -> Result<String, (Error, Option<String>)> {
    let plain = |e: Error| (e, None);
    check_tol(cli.tol).map_err(plain)?;
    match &cli.command {
        Command::Spectrum(state) => spectrum(cli, state).map_err(plain),
        Command::Report { state, split, localize, dump } => report(cli, state, split, *localize, *dump).map_err(plain),
        Command::Localize { state, split } => localize_cmd(cli, state, split).map_err(plain),
        Command::Hierarchy { modes, k, grid, trace_out } => {
            let n = even_half(*modes).map_err(plain)?;
            let mut cfg = sweep_config(cli, SweepConfig::hierarchy(n, grid.values()), trace_out);
            cfg.ks = k.clone();
            render(&run_hierarchy(&cfg).map_err(plain)?, cli.format).map_err(plain)
        }
        Command::Scaling { modes, b, trace_out } => {
            let n = even_half(*modes).map_err(plain)?;
            let cfg = sweep_config(cli, SweepConfig::scaling(n, *b), trace_out);
            render(&run_scaling(&cfg).map_err(plain)?, cli.format).map_err(plain)
        }
        Command::Ole { modes, grid, trace_out } => {
            let cfg = sweep_config(cli, SweepConfig::ole(*modes, grid.values()), trace_out);
            render(&run_ole(&cfg).map_err(plain)?, cli.format).map_err(plain)
        }
        Command::Verify { seed, cases } => {
            let (reports, summary) = verify_suite(*seed, *cases, cli.jobs).map_err(plain)?;
            let body = match cli.format {
                OutputFormat::Csv => reports_to_csv(&reports),
                OutputFormat::Json => to_json(&reports).map_err(plain)?,
            };
            eprintln!("{}", serde_json::to_string(&summary).expect("summary serializes"));
            if summary.passes < summary.cases {
                let failed = summary.cases - summary.passes;
                return Err((Error::NumericalDomain(format!("{failed} of {} comparisons failed", summary.cases)), Some(body)));
            }
            Ok(body)
        }
    }
}

fn emit(cli: &Cli, body: &str) -> Result<(), String> {
    match &cli.out {
        Some(path) => fs::write(path, body).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::InvalidArgument => 2,
        ErrorKind::Numerical => 3,
        ErrorKind::Localization => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(body) => match emit(&cli, &body) {
            Ok(()) => ExitCode::SUCCESS,
            Err(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(2)
            }
        },
        Err((err, body)) => {
            if let Some(body) = body {
                if let Err(msg) = emit(&cli, &body) {
                    eprintln!("error: {msg}");
                }
            }
            eprintln!("error: {err}");
            ExitCode::from(exit_code(err.kind()))
        }
    }
}
