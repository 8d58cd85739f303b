//! Command-line front-end for the `degdet` solvers.
//!
//! One subcommand per problem kind; instances are JSON documents with a
//! `"kind"` discriminator (see `degdet::apps`), except `smith`, which reads a
//! plain text matrix with one comma-separated row per line.
//!
//! Exit codes: 0 on success (including `-inf` answers and an exceeded DAE
//! index budget, which are answers), 1 for usage and parse errors, 2 when a
//! computation gives up for feasibility reasons (enumeration cap, field too
//! small, singular input).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use degdet::apps::{
    dae_index, instance_kind, int_vectors, mixed_poly_degdet, parse_matching_doc,
    parse_matroid_base_doc, parse_matroid_intersection_doc, parse_mixed_doc,
    solve_max_weight_base, solve_weighted_matching, solve_weighted_matroid_intersection,
    AnyMixed, AppsError, DaeOutcome, WeightedMatroidIntersectionInstance,
};
use degdet::field::{Field, GfP, Rationals};
use degdet::matrix::{smith_mcmillan, Mat};
use degdet::mvsp::{nc_rank, MvspError, MvspStrategy, DEFAULT_STATE_CAP};
use degdet::pencil::{
    commutative_degdet_oracle, leading, parse_pencil_doc, AnyPencil, FieldSpec, Pencil,
    PencilError,
};
use degdet::poly::{parse_ratfn, Deg, RatFn};
use degdet::solver::{
    combinatorial_relaxation, max_deg_subdet, result_to_report, sda_degdet, DegDetResult,
    SdaVariant, SolverError,
};

#[derive(Parser)]
#[command(
    name = "degdet",
    version,
    about = "Degrees of Dieudonné determinants of symbolic matrix pencils, \
             and the combinatorial problems they solve"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// deg Det of a pencil document via steepest descent or relaxation.
    Solve {
        /// Pencil document (kind "pencil").
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = AlgorithmArg::Sda)]
        algorithm: AlgorithmArg,
        #[arg(long, value_enum, default_value_t = MvspArg::Auto)]
        mvsp: MvspArg,
        /// Seed for the optional oracle cross-check (echoed in output).
        #[arg(long)]
        seed: Option<u64>,
        /// Also run the commutative substitution oracle with this many trials.
        #[arg(long)]
        trials: Option<u32>,
        /// Write a machine-readable run report to this path.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// nc-rank of the constant coefficient matrices of a pencil document.
    Ncrank {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = MvspArg::Auto)]
        mvsp: MvspArg,
    },
    /// Smith-McMillan exponents of a text matrix (comma-separated rows).
    Smith {
        file: PathBuf,
        /// Work over GF(p) instead of the rationals.
        #[arg(long)]
        prime: Option<u64>,
    },
    /// Maximum deg Det over subdeterminants of all orders (wide pencils).
    Subdet {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = MvspArg::Auto)]
        mvsp: MvspArg,
    },
    /// Maximum-weight perfect matching of a bipartite instance.
    Matching { file: PathBuf },
    /// Maximum-weight base of a linear matroid.
    MatroidBase { file: PathBuf },
    /// Maximum-weight common base of two linear matroids.
    MatroidIntersection { file: PathBuf },
    /// deg Det of a mixed polynomial matrix via the layered lift.
    Mixed { file: PathBuf },
    /// Index of a linear DAE system, decided up to a bound.
    DaeIndex {
        file: PathBuf,
        /// Largest index the run is willing to certify.
        #[arg(long)]
        delta: i64,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AlgorithmArg {
    /// Unit-step steepest descent.
    Sda,
    /// Longest-step steepest descent.
    SdaKappa,
    /// Combinatorial relaxation (assignment duals as steps).
    Relax,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MvspArg {
    Auto,
    Brute,
    Bipartite,
    Rank1,
    Layered,
}

impl MvspArg {
    fn to_strategy(self) -> MvspStrategy {
        match self {
            MvspArg::Auto => MvspStrategy::Auto,
            MvspArg::Brute => MvspStrategy::Brute { cap: DEFAULT_STATE_CAP },
            MvspArg::Bipartite => MvspStrategy::Bipartite,
            MvspArg::Rank1 => MvspStrategy::Rank1,
            MvspArg::Layered => MvspStrategy::Layered,
        }
    }
}

/// Dispatch failure, split by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Exit 1: bad arguments, unreadable files, malformed documents.
    Usage(String),
    /// Exit 2: the computation gave up (cap, field size, singular input).
    Infeasible(String),
}

/// Run the CLI and print the outcome; returns the process exit code.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let (code, out) = cli_run(args);
    if code == 0 {
        print!("{}", out);
    } else {
        eprint!("{}", out);
    }
    code
}

/// Pure variant of [`cli_main`]: `(exit code, rendered output)`.
pub fn cli_run<I, T>(args: I) -> (i32, String)
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv = std::iter::once(OsString::from("degdet")).chain(args.into_iter().map(Into::into));
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    (0, rendered)
                }
                _ => (1, rendered),
            };
        }
    };
    match dispatch(cli.cmd) {
        Ok(out) => (0, out),
        Err(CliError::Usage(m)) => (1, format!("error: {}\n", m)),
        Err(CliError::Infeasible(m)) => (2, format!("error: {}\n", m)),
    }
}

fn dispatch(cmd: Cmd) -> Result<String, CliError> {
    match cmd {
        Cmd::Solve { file, algorithm, mvsp, seed, trials, report } => {
            match parse_pencil_file(&file)? {
                AnyPencil::GfP(f, a) => {
                    solve_pencil(&f, &a, algorithm, mvsp.to_strategy(), seed, trials, report)
                }
                AnyPencil::Rational(f, a) => {
                    solve_pencil(&f, &a, algorithm, mvsp.to_strategy(), seed, trials, report)
                }
            }
        }
        Cmd::Ncrank { file, mvsp } => match parse_pencil_file(&file)? {
            AnyPencil::GfP(f, a) => ncrank_pencil(&f, &a, mvsp.to_strategy()),
            AnyPencil::Rational(f, a) => ncrank_pencil(&f, &a, mvsp.to_strategy()),
        },
        Cmd::Smith { file, prime } => {
            let text = read_text(&file)?;
            match prime {
                Some(p) => {
                    let f = GfP::new(p).map_err(|e| CliError::Usage(e.to_string()))?;
                    smith_text(&f, &text)
                }
                None => smith_text(&Rationals, &text),
            }
        }
        Cmd::Subdet { file, mvsp } => match parse_pencil_file(&file)? {
            AnyPencil::GfP(f, a) => subdet_pencil(&f, &a, mvsp.to_strategy()),
            AnyPencil::Rational(f, a) => subdet_pencil(&f, &a, mvsp.to_strategy()),
        },
        Cmd::Matching { file } => {
            let doc = read_doc(&file, "matching")?;
            let inst = parse_matching_doc(&doc)
                .map_err(|e| CliError::Usage(format!("{}: {}", file.display(), e)))?;
            // The optimum is combinatorial; any field works, GF(2) is cheapest.
            let f = GfP::new(2).expect("2 is prime");
            let v = solve_weighted_matching(&f, &inst).map_err(apps_error)?;
            Ok(format!("max weight perfect matching = {}\n", fmt_deg(v)))
        }
        Cmd::MatroidBase { file } => {
            let doc = read_doc(&file, "matroid-base")?;
            let d = parse_matroid_base_doc(&doc)
                .map_err(|e| CliError::Usage(format!("{}: {}", file.display(), e)))?;
            let v = match d.field {
                FieldSpec::GfP(p) => {
                    let f = GfP::new(p).map_err(|e| CliError::Usage(e.to_string()))?;
                    solve_max_weight_base(&f, &int_vectors(&f, &d.vectors), &d.weights)
                }
                FieldSpec::Rational => {
                    let f = Rationals;
                    solve_max_weight_base(&f, &int_vectors(&f, &d.vectors), &d.weights)
                }
            }
            .map_err(apps_error)?;
            Ok(format!("max weight base = {}\n", fmt_deg(v)))
        }
        Cmd::MatroidIntersection { file } => {
            let doc = read_doc(&file, "matroid-intersection")?;
            let d = parse_matroid_intersection_doc(&doc)
                .map_err(|e| CliError::Usage(format!("{}: {}", file.display(), e)))?;
            let v = match d.field {
                FieldSpec::GfP(p) => {
                    let f = GfP::new(p).map_err(|e| CliError::Usage(e.to_string()))?;
                    let inst = WeightedMatroidIntersectionInstance {
                        avectors: int_vectors(&f, &d.avectors),
                        bvectors: int_vectors(&f, &d.bvectors),
                        weights: d.weights,
                    };
                    solve_weighted_matroid_intersection(&f, &inst)
                }
                FieldSpec::Rational => {
                    let f = Rationals;
                    let inst = WeightedMatroidIntersectionInstance {
                        avectors: int_vectors(&f, &d.avectors),
                        bvectors: int_vectors(&f, &d.bvectors),
                        weights: d.weights,
                    };
                    solve_weighted_matroid_intersection(&f, &inst)
                }
            }
            .map_err(apps_error)?;
            Ok(format!("max weight common base = {}\n", fmt_deg(v)))
        }
        Cmd::Mixed { file } => {
            let doc = read_doc(&file, "mixed")?;
            let any = parse_mixed_doc(&doc)
                .map_err(|e| CliError::Usage(format!("{}: {}", file.display(), e)))?;
            let (value, iterations) = match any {
                AnyMixed::GfP(f, sys) => {
                    let res = mixed_poly_degdet(&f, &sys).map_err(apps_error)?;
                    (res.value, res.iterations)
                }
                AnyMixed::Rational(f, sys) => {
                    let res = mixed_poly_degdet(&f, &sys).map_err(apps_error)?;
                    (res.value, res.iterations)
                }
            };
            Ok(format!(
                "deg Det = {}\niterations = {}\n",
                fmt_deg(value),
                iterations
            ))
        }
        Cmd::DaeIndex { file, delta } => {
            let doc = read_doc(&file, "mixed")?;
            let any = parse_mixed_doc(&doc)
                .map_err(|e| CliError::Usage(format!("{}: {}", file.display(), e)))?;
            let outcome = match any {
                AnyMixed::GfP(f, sys) => dae_index(&f, &sys, delta),
                AnyMixed::Rational(f, sys) => dae_index(&f, &sys, delta),
            }
            .map_err(apps_error)?;
            match outcome {
                DaeOutcome::Index(i) => Ok(format!("index = {}\n", i)),
                DaeOutcome::Exceeds { delta } => Ok(format!("index exceeds {}\n", delta)),
            }
        }
    }
}

fn solve_pencil<F: Field>(
    f: &F,
    a: &Pencil<F>,
    algorithm: AlgorithmArg,
    strategy: MvspStrategy,
    seed: Option<u64>,
    trials: Option<u32>,
    report: Option<PathBuf>,
) -> Result<String, CliError> {
    let res: DegDetResult<F> = match algorithm {
        AlgorithmArg::Sda => sda_degdet(f, a, &strategy, SdaVariant::Plain),
        AlgorithmArg::SdaKappa => sda_degdet(f, a, &strategy, SdaVariant::Kappa),
        AlgorithmArg::Relax => combinatorial_relaxation(f, a, &strategy),
    }
    .map_err(solver_error)?;
    if !res.exact {
        return Err(CliError::Infeasible(format!(
            "enumeration cap hit; only the upper bound {} is certified",
            fmt_deg(res.value)
        )));
    }
    let mut out = String::new();
    let _ = writeln!(out, "deg Det = {}", fmt_deg(res.value));
    let _ = writeln!(out, "iterations = {}", res.iterations);
    if let Some(alpha) = &res.alpha_trace {
        let _ = writeln!(out, "alpha = {:?}", alpha);
    }
    if let Some(trials) = trials {
        let seed = seed.unwrap_or(0);
        let oracle = commutative_degdet_oracle(f, a, trials, seed).map_err(pencil_error)?;
        let _ = writeln!(
            out,
            "oracle = {} ({} trials, seed = {}, failure probability <= {:.3e})",
            fmt_deg(oracle.value),
            oracle.trials,
            seed,
            oracle.aggregate_failure
        );
    }
    if let Some(path) = report {
        let json = result_to_report(f, &res, seed);
        let rendered = serde_json::to_string_pretty(&json).expect("report is serializable");
        fs::write(&path, rendered)
            .map_err(|e| CliError::Usage(format!("{}: {}", path.display(), e)))?;
        let _ = writeln!(out, "report written to {}", path.display());
    }
    Ok(out)
}

fn ncrank_pencil<F: Field>(
    f: &F,
    a: &Pencil<F>,
    strategy: MvspStrategy,
) -> Result<String, CliError> {
    let lead = leading(f, a).map_err(pencil_error)?;
    let r = nc_rank(f, &lead, &strategy).map_err(mvsp_error)?;
    Ok(format!("nc-rank = {}\n", r))
}

fn subdet_pencil<F: Field>(
    f: &F,
    a: &Pencil<F>,
    strategy: MvspStrategy,
) -> Result<String, CliError> {
    if a.n > a.nprime {
        return Err(CliError::Usage(format!(
            "subdet wants a wide pencil (n <= n'), got {} x {}",
            a.n, a.nprime
        )));
    }
    let v = max_deg_subdet(f, a, &strategy).map_err(solver_error)?;
    Ok(format!("max deg subdet = {}\n", fmt_deg(v)))
}

fn smith_text<F: Field>(f: &F, text: &str) -> Result<String, CliError> {
    let mut rows: Vec<Vec<RatFn<F>>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for cell in line.split(',') {
            let r = parse_ratfn(f, cell.trim())
                .map_err(|e| CliError::Usage(format!("line {}: {}", lineno + 1, e)))?;
            row.push(r);
        }
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(CliError::Usage(format!(
                    "line {}: expected {} entries, found {}",
                    lineno + 1,
                    first.len(),
                    row.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::Usage("empty matrix".to_string()));
    }
    if rows.len() != rows[0].len() {
        return Err(CliError::Usage(format!(
            "expected a square matrix, got {} x {}",
            rows.len(),
            rows[0].len()
        )));
    }
    let m = Mat::from_rows(rows);
    let smith = smith_mcmillan(f, &m).map_err(|e| CliError::Infeasible(e.to_string()))?;
    Ok(format!("alpha = {:?}\n", smith.alpha))
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {}", path.display(), e)))
}

/// Load a JSON document and check its `"kind"` discriminator.
fn read_doc(path: &Path, expect: &str) -> Result<serde_json::Value, CliError> {
    let text = read_text(path)?;
    let doc: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{}: {}", path.display(), e)))?;
    let kind = instance_kind(&doc)
        .map_err(|e| CliError::Usage(format!("{}: {}", path.display(), e)))?;
    if kind != expect {
        return Err(CliError::Usage(format!(
            "{}: expected kind \"{}\", found \"{}\"",
            path.display(),
            expect,
            kind
        )));
    }
    Ok(doc)
}

fn parse_pencil_file(path: &Path) -> Result<AnyPencil, CliError> {
    let doc = read_doc(path, "pencil")?;
    parse_pencil_doc(&doc).map_err(|e| CliError::Usage(format!("{}: {}", path.display(), e)))
}

fn fmt_deg(d: Deg) -> String {
    match d {
        Deg::Fin(v) => v.to_string(),
        Deg::NegInf => "-inf".to_string(),
    }
}

/// Feasibility-flavored failures exit 2; everything else is usage.
fn apps_error(e: AppsError) -> CliError {
    match e {
        AppsError::SingularSystem => CliError::Infeasible(e.to_string()),
        AppsError::Solver(s) => solver_error(s),
        other => CliError::Usage(other.to_string()),
    }
}

fn solver_error(e: SolverError) -> CliError {
    match e {
        SolverError::Mvsp(m) => mvsp_error(m),
        SolverError::Pencil(p) => pencil_error(p),
        SolverError::Unbounded
        | SolverError::InexactOracle { .. }
        | SolverError::InvalidCertificate { .. } => CliError::Infeasible(e.to_string()),
    }
}

fn mvsp_error(e: MvspError) -> CliError {
    match e {
        MvspError::CapExceeded { .. } | MvspError::FieldNotEnumerable => {
            CliError::Infeasible(e.to_string())
        }
        other => CliError::Usage(other.to_string()),
    }
}

fn pencil_error(e: PencilError) -> CliError {
    match e {
        PencilError::FieldTooSmall { .. } | PencilError::FeasibilityUnbounded => {
            CliError::Infeasible(e.to_string())
        }
        other => CliError::Usage(other.to_string()),
    }
}
