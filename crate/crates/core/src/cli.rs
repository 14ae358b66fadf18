//! Command-line front end.
//!
//! Exit codes: 0 feasible or success, 1 infeasible, 2 out of theorem scope,
//! 3 other failures, 64 malformed input, 65 witness rejected by `realize`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::decider::{decide, decide_projection, decide_subsets, enumerate_witnesses, Decision, Verdict};
use crate::error::{Error, Result};
use crate::explorer::{emit_region, four_point_region, three_point_rows, three_point_spectra, RegionFormat, ThreePointSpectra};
use crate::io::{parse_scalar_list, parse_spectrum, parse_witness, SequenceFile};
use crate::majorization::{riemann_check, Witness, ZLayout};
use crate::scalar::Scalar;
use crate::sequence::{DiagonalSequence, SpectrumSpec};
use crate::synthesis::{realize_problem, truncated_problem, verify_realization, SymmetricMatrix};

pub const EXIT_FEASIBLE: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 1;
pub const EXIT_OUT_OF_SCOPE: i32 = 2;
pub const EXIT_FAILURE: i32 = 3;
pub const EXIT_BAD_INPUT: i32 = 64;
pub const EXIT_BAD_WITNESS: i32 = 65;

const AFTER_HELP: &str = concat!(
    "Input formats:\n",
    "  sequence file (--seq): ",
    r#"{"B": "p/q", "explicit": ["p/q", ...], "zero_count": <nat>|"inf", "b_count": <nat>|"inf", "zero_tail": null|{"kind":"geometric","first":"p/q","ratio":"p/q"}|{"kind":"divergent"}, "b_tail": <same as zero_tail>}"#,
    "\n",
    "  spectrum (--spectrum): comma-separated rationals 0,A_1,...,A_n,B, or a file holding that list or a JSON array\n",
    "  witness (--witness): ",
    r#"{"N": [<nat >= 1>, ...], "k": <int>}"#,
    ", inline or a file\n",
    "  matrix (--matrix): ",
    r#"{"dim": <nat>, "rows": [[<number>, ...], ...]}"#,
    "\n",
    "Rationals are strings \"p/q\" or integers; decimals are rejected.\n",
    "Exit codes: 0 feasible/success, 1 infeasible, 2 out of scope, 3 failure, 64 malformed input, 65 rejected witness."
);

#[derive(Debug, Parser)]
#[command(name = "fsdiag", version, about = "Diagonals of self-adjoint operators with finite spectrum", after_help = AFTER_HELP)]
pub struct Cli {
    /// Worker threads for the parallel searches (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Problem {
    /// Sequence JSON file.
    #[arg(long)]
    pub seq: PathBuf,
    /// Spectrum as `0,A_1,...,B` or a path to a file holding it.
    #[arg(long)]
    pub spectrum: String,
    /// Shift the spectrum and the sequence so the spectrum starts at 0.
    #[arg(long)]
    pub translate: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide feasibility; prints the decision as JSON.
    Decide {
        #[command(flatten)]
        problem: Problem,
        /// Attach partial-sum profiles for every witness.
        #[arg(long)]
        explain: bool,
        /// Decide every sub-spectrum that keeps 0 and B.
        #[arg(long)]
        subsets: bool,
    },
    /// List every witness (N, k).
    Witnesses {
        #[command(flatten)]
        problem: Problem,
    },
    /// Build a finite truncated realization and verify it.
    Realize {
        #[command(flatten)]
        problem: Problem,
        /// Witness JSON, inline or a file.
        #[arg(long)]
        witness: String,
        /// Number of leading entries kept from each tail.
        #[arg(long, default_value_t = 8)]
        trunc: usize,
        /// Print the matrix as an aligned text grid instead of JSON.
        #[arg(long)]
        grid: bool,
        /// Eigenvalue tolerance for the report.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Check a matrix against a spectrum and an expected diagonal.
    Verify {
        /// Matrix JSON file.
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        spectrum: String,
        /// Expected diagonal as a list or a file.
        #[arg(long)]
        diagonal: String,
        #[arg(long)]
        witness: Option<String>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Exact set of feasible 3-point spectra {0, A, B}.
    Explore3 {
        #[arg(long)]
        seq: PathBuf,
        /// Bound on N used for candidate generation.
        #[arg(long)]
        n_max: Option<u64>,
        /// Also write a scatter plot.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Grid sample of feasible 4-point spectra, as CSV.
    Explore4 {
        #[arg(long)]
        seq: PathBuf,
        /// Grid denominator q: A1, A2 range over multiples of B/q.
        #[arg(long)]
        grid: u64,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Decide the projection case {0, B}.
    Project {
        #[arg(long)]
        seq: PathBuf,
        #[arg(long)]
        explain: bool,
    },
}

fn input_error(e: Error) -> Error {
    match e {
        Error::Domain(m) => Error::Parse(m),
        other => other,
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::parse(format!("{}: {e}", path.display())))
}

/// An inline value, or the contents of the file it names.
fn inline_or_file(s: &str) -> Result<String> {
    let p = Path::new(s);
    if p.is_file() {
        read(p)
    } else {
        Ok(s.to_string())
    }
}

fn load_sequence(path: &Path, shift: &Scalar) -> Result<DiagonalSequence> {
    let text = read(path)?;
    SequenceFile::parse(&text)
        .and_then(|f| f.into_sequence(shift))
        .map_err(|e| input_error(e).prefixed(&path.display().to_string()))
}

fn load_problem(p: &Problem) -> Result<(DiagonalSequence, SpectrumSpec, Scalar)> {
    let (spec, shift) = parse_spectrum(&inline_or_file(&p.spectrum)?, p.translate)?;
    let seq = load_sequence(&p.seq, &shift)?;
    if seq.b() != spec.b() {
        return Err(Error::parse(format!("sequence B = {} but spectrum ends at {}", seq.b(), spec.b())));
    }
    Ok((seq, spec, shift))
}

impl Error {
    fn prefixed(self, what: &str) -> Error {
        match self {
            Error::Parse(m) => Error::Parse(format!("{what}: {m}")),
            other => other,
        }
    }
}

fn verdict_code(v: Verdict) -> i32 {
    match v {
        Verdict::FeasibleCaseI | Verdict::FeasibleCaseII => EXIT_FEASIBLE,
        Verdict::Infeasible => EXIT_INFEASIBLE,
        Verdict::OutOfTheoremScope => EXIT_OUT_OF_SCOPE,
    }
}

fn error_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_) => EXIT_BAD_INPUT,
        Error::InfeasibleWitness(_) => EXIT_BAD_WITNESS,
        _ => EXIT_FAILURE,
    }
}

fn explained(seq: &DiagonalSequence, spec: &SpectrumSpec, dec: &Decision) -> Result<Value> {
    let mut v = serde_json::to_value(dec).expect("decision serializes");
    let layout = ZLayout::for_spectrum(seq, spec)?;
    let profiles: Vec<Value> = dec
        .witnesses
        .iter()
        .map(|w| {
            let (ok, profile) = riemann_check(&layout, spec, w)?;
            Ok(json!({"witness": w, "riemann": ok, "delta": profile}))
        })
        .collect::<Result<_>>()?;
    v["delta_profiles"] = Value::Array(profiles);
    Ok(v)
}

fn to_line(v: &impl serde::Serialize) -> String {
    serde_json::to_string(v).expect("serializable")
}

struct Outcome {
    stdout: String,
    code: i32,
}

fn execute(cmd: &Command) -> Result<Outcome> {
    match cmd {
        Command::Decide { problem, explain, subsets } => {
            let (seq, spec, _) = load_problem(problem)?;
            if *subsets {
                let all = decide_subsets(&seq, &spec)?;
                let any = all.iter().any(|(_, d)| d.verdict.is_feasible());
                let rows: Vec<Value> = all
                    .iter()
                    .map(|(s, d)| json!({"spectrum": s.points(), "decision": d}))
                    .collect();
                let code = if any { EXIT_FEASIBLE } else { EXIT_INFEASIBLE };
                return Ok(Outcome { stdout: to_line(&rows), code });
            }
            let dec = decide(&seq, &spec)?;
            let out = if *explain && !dec.witnesses.is_empty() && spec.n() > 0 {
                to_line(&explained(&seq, &spec, &dec)?)
            } else {
                to_line(&dec)
            };
            Ok(Outcome { stdout: out, code: verdict_code(dec.verdict) })
        }
        Command::Witnesses { problem } => {
            let (seq, spec, _) = load_problem(problem)?;
            Ok(Outcome { stdout: to_line(&enumerate_witnesses(&seq, &spec)?), code: EXIT_FEASIBLE })
        }
        Command::Realize { problem, witness, trunc, grid, tol } => {
            let (seq, spec, shift) = load_problem(problem)?;
            let w = parse_witness(&inline_or_file(witness)?)?;
            let p = truncated_problem(&seq, &spec, &w, *trunc)?;
            let (m, case) = realize_problem(&p)?;
            // report in the caller's coordinates
            let (m, spec, diag) = if shift.is_zero() {
                (m, spec, p.diagonal.clone())
            } else {
                let back = SpectrumSpec::new(spec.points().iter().map(|x| x + &shift).collect()).map_err(input_error);
                let diag: Vec<Scalar> = p.diagonal.iter().map(|x| x + &shift).collect();
                (m.shifted(&shift), back?, diag)
            };
            let report = verify_realization(&m, &spec, &diag, Some(&w), *tol);
            let code = if report.passed() { EXIT_FEASIBLE } else { EXIT_FAILURE };
            if *grid {
                return Ok(Outcome { stdout: m.to_grid(), code });
            }
            let out = json!({
                "case": case,
                "truncation": p.truncation,
                "diagonal": diag,
                "matrix": m,
                "report": report,
            });
            Ok(Outcome { stdout: to_line(&out), code })
        }
        Command::Verify { matrix, spectrum, diagonal, witness, tol } => {
            let m: SymmetricMatrix = serde_json::from_str(&read(matrix)?)
                .map_err(|e| Error::parse(format!("{}: {e}", matrix.display())))?;
            let (spec, _) = parse_spectrum(&inline_or_file(spectrum)?, false)?;
            let diag = parse_scalar_list(&inline_or_file(diagonal)?)?;
            let w: Option<Witness> = witness.as_deref().map(|s| inline_or_file(s).and_then(|t| parse_witness(&t))).transpose()?;
            let report = verify_realization(&m, &spec, &diag, w.as_ref(), *tol);
            let ok = report.within_tolerance && report.witness_match != Some(false) && report.diagonal_max_error <= *tol;
            Ok(Outcome { stdout: to_line(&report), code: if ok { EXIT_FEASIBLE } else { EXIT_FAILURE } })
        }
        Command::Explore3 { seq, n_max, svg } => {
            let s = load_sequence(seq, &Scalar::zero())?;
            let res = three_point_spectra(&s, *n_max)?;
            if let (Some(path), ThreePointSpectra::Points { points, .. }) = (svg, &res) {
                write_file(path, &emit_region(&three_point_rows(points), s.b(), RegionFormat::Svg { grid: 8 }))?;
            }
            let out = match &res {
                ThreePointSpectra::Points { points, n_max, bounded: true } => {
                    to_line(&json!({"points": points, "n_max": n_max, "note": "bounded search"}))
                }
                other => to_line(&other.to_json()),
            };
            Ok(Outcome { stdout: out, code: EXIT_FEASIBLE })
        }
        Command::Explore4 { seq, grid, svg } => {
            let s = load_sequence(seq, &Scalar::zero())?;
            let rows = four_point_region(&s, *grid)?;
            if let Some(path) = svg {
                write_file(path, &emit_region(&rows, s.b(), RegionFormat::Svg { grid: *grid }))?;
            }
            let csv = String::from_utf8(emit_region(&rows, s.b(), RegionFormat::Csv)).expect("ascii");
            Ok(Outcome { stdout: csv, code: EXIT_FEASIBLE })
        }
        Command::Project { seq, explain } => {
            let s = load_sequence(seq, &Scalar::zero())?;
            let dec = decide_projection(&s, s.b())?;
            let mut v = serde_json::to_value(&dec).expect("decision serializes");
            if *explain {
                v["C_minus_D"] = json!(dec.c_minus_d_at(&(s.b() / Scalar::from_int(2))));
            }
            Ok(Outcome { stdout: to_line(&v), code: verdict_code(dec.verdict) })
        }
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::unsupported(format!("{}: {e}", path.display())))
}

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_BAD_INPUT } else { EXIT_FEASIBLE };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cli.workers {
        builder = builder.num_threads(w.max(1));
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: worker pool: {e}");
            return EXIT_FAILURE;
        }
    };
    match pool.install(|| execute(&cli.command)) {
        Ok(o) => {
            let _ = out.write_all(o.stdout.as_bytes());
            if !o.stdout.ends_with('\n') {
                let _ = out.write_all(b"\n");
            }
            o.code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            error_code(&e)
        }
    }
}
