//! Batch command-line front end: code construction, validation, syndrome
//! queries, Monte Carlo channel simulation, circuit synthesis and
//! discrete-code import.
//!
//! Exit codes: 0 success, 1 validation or decode failure, 2 input error.
//! `CVEAO_THREADS` caps simulation parallelism; identical command lines
//! (including `--seed`) produce byte-identical outputs apart from a
//! timestamp comment, which `--no-timestamp` suppresses.

use clap::{Parser, Subcommand};
use cveao_core::{
    barnes_lift, bloch_messiah, canonical_code, emit_circuit, example_code, extract_syndrome,
    io as fmt_io, run_trials, validate, zero_pattern, Code, DecoderConfig, Error as CoreError,
    ErrorVector, NoiseModel, PairingPattern, Scalar, SqueezingModel, SymplecticMatrix, TrialStats,
};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

#[derive(Parser)]
#[command(
    name = "cveao",
    about = "Continuous-variable entanglement-assisted operator code toolkit",
    version
)]
struct Cli {
    /// Comparison tolerance for float-mode checks.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Suppress the timestamp comment in written files.
    #[arg(long, global = true)]
    no_timestamp: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check every structural invariant of a code file.
    Validate { code_file: PathBuf },
    /// Write the canonical code for the given mode counts.
    Canonical {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        l: usize,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        c: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the built-in eight-mode example code.
    Example {
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the syndrome of a displacement error as `a | a1 | a2`.
    Syndrome {
        code_file: PathBuf,
        /// Error vector file (one flat row, or p and x rows).
        #[arg(long, conflicts_with = "error")]
        error_file: Option<PathBuf>,
        /// Inline error vector: 2n whitespace-separated entries.
        #[arg(long)]
        error: Option<String>,
    },
    /// Monte Carlo displacement-channel simulation; appends one CSV row.
    Simulate {
        code_file: PathBuf,
        /// gaussian:sigma=<f> | s0[:alpha=<file>,beta=<file>]
        /// | single:mode=<i>,p=<f>,x=<f> | fixed:<file|zero>
        #[arg(long)]
        noise: String,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Finite squeezing in dB; omit for ideal resources.
        #[arg(long)]
        squeezing_db: Option<f64>,
        /// CSV file to append to (header written when new).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Label for the `code` CSV column; defaults to the file stem.
        #[arg(long)]
        label: Option<String>,
    },
    /// Bloch-Messiah circuit synthesis from a symplectic matrix file.
    Synthesize {
        #[arg(long)]
        symplectic: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sign-lift a binary check matrix to prescribed row pairings.
    ImportDiscrete {
        matrix_file: PathBuf,
        /// `zero` (default) or a pattern matrix file over {0,+-1}.
        #[arg(long, default_value = "zero")]
        target: String,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Input problems exit 2, computational failures exit 1.
enum CliError {
    Input(String),
    Failure(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Failure(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Failure(m) => m,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::SignSearchExhausted
            | CoreError::DecompositionFailed { .. }
            | CoreError::Unsolvable(_)
            | CoreError::InvalidCode(_) => CliError::Failure(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.code())
        }
    }
}

fn configure_threads() {
    if let Ok(value) = std::env::var("CVEAO_THREADS") {
        if let Ok(threads) = value.parse::<usize>() {
            if threads >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
        }
    }
}

fn timestamp_comment(suppress: bool) -> String {
    if suppress {
        return String::new();
    }
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("# generated at unix:{secs}\n")
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Validate { code_file } => cmd_validate(&code_file, cli.tol),
        Command::Canonical { k, l, r, c, out } => {
            let code = canonical_code(k, l, r, c);
            write_code_file(&out, &code, cli.no_timestamp)?;
            println!(
                "wrote canonical code n={} ({} check rows, {} gauge rows) to {}",
                code.n(),
                code.checks.len(),
                code.gauge.rows().len(),
                out.display()
            );
            Ok(())
        }
        Command::Example { out } => {
            let code = example_code();
            write_code_file(&out, &code, cli.no_timestamp)?;
            println!("wrote example code to {}", out.display());
            Ok(())
        }
        Command::Syndrome {
            code_file,
            error_file,
            error,
        } => cmd_syndrome(&code_file, error_file.as_deref(), error.as_deref()),
        Command::Simulate {
            code_file,
            noise,
            trials,
            seed,
            squeezing_db,
            out,
            label,
        } => cmd_simulate(
            &code_file,
            &noise,
            trials,
            seed,
            squeezing_db,
            out.as_deref(),
            label.as_deref(),
            cli.no_timestamp,
        ),
        Command::Synthesize { symplectic, out } => cmd_synthesize(&symplectic, &out, cli.tol),
        Command::ImportDiscrete {
            matrix_file,
            target,
            out,
        } => cmd_import_discrete(&matrix_file, &target, &out, cli.no_timestamp),
    }
}

fn read_to_string(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_code(path: &Path) -> Result<Code, CliError> {
    Ok(fmt_io::parse_code(&read_to_string(path)?)?)
}

fn write_code_file(path: &Path, code: &Code, no_timestamp: bool) -> Result<(), CliError> {
    let mut text = timestamp_comment(no_timestamp);
    text.push_str(&fmt_io::format_code(code));
    std::fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn cmd_validate(code_file: &Path, tol: f64) -> Result<(), CliError> {
    let code = load_code(code_file)?;
    let report = validate(&code, tol);
    print!("{report}");
    if report.all_passed() {
        Ok(())
    } else {
        Err(CliError::Failure(format!(
            "{} of {} checks failed",
            report.failures().len(),
            report.checks.len()
        )))
    }
}

fn cmd_syndrome(
    code_file: &Path,
    error_file: Option<&Path>,
    inline: Option<&str>,
) -> Result<(), CliError> {
    let code = load_code(code_file)?;
    let vector = match (error_file, inline) {
        (Some(path), None) => fmt_io::parse_phase_vector(&read_to_string(path)?)?,
        (None, Some(text)) => fmt_io::parse_phase_vector(text)?,
        _ => {
            return Err(CliError::Input(
                "provide exactly one of --error-file or --error".into(),
            ))
        }
    };
    if vector.dim_modes() != code.n() {
        return Err(CliError::Input(format!(
            "error vector has {} modes, code has {}",
            vector.dim_modes(),
            code.n()
        )));
    }
    let syndrome = extract_syndrome(&code, &ErrorVector::new(vector))?;
    let group = |values: &[Scalar]| -> String {
        if values.is_empty() {
            "-".to_string()
        } else {
            values
                .iter()
                .map(|s| s.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        }
    };
    println!(
        "{} | {} | {}",
        group(&syndrome.a),
        group(&syndrome.a1),
        group(&syndrome.a2)
    );
    Ok(())
}

/// `gaussian:sigma=<f>` / `s0[:alpha=<file>,beta=<file>]` /
/// `single:mode=<i>,p=<f>,x=<f>` / `fixed:<file|zero>`.
fn parse_noise(spec: &str, code: &Code) -> Result<(NoiseModel, DecoderConfig), CliError> {
    let (family, rest) = match spec.split_once(':') {
        Some((f, r)) => (f, Some(r)),
        None => (spec, None),
    };
    let zero_cfg = DecoderConfig::zero(&code.params);
    match family {
        "gaussian" => {
            let args = parse_kv_list(rest.unwrap_or(""))?;
            let sigma = args
                .iter()
                .find(|(key, _)| key == "sigma")
                .ok_or_else(|| CliError::Input("gaussian noise needs sigma=<float>".into()))?
                .1
                .parse::<f64>()
                .map_err(|_| CliError::Input("bad sigma".into()))?;
            Ok((NoiseModel::GaussianIid { sigma }, zero_cfg))
        }
        "s0" => {
            let mut cfg = zero_cfg;
            if let Some(rest) = rest {
                let args = parse_kv_list(rest)?;
                let mut alpha = None;
                let mut beta = None;
                for (key, value) in &args {
                    match key.as_str() {
                        "alpha" => alpha = Some(load_matrix(Path::new(value))?),
                        "beta" => beta = Some(load_matrix(Path::new(value))?),
                        other => {
                            return Err(CliError::Input(format!("unknown s0 option `{other}`")))
                        }
                    }
                }
                match (alpha, beta) {
                    (Some(a), Some(b)) => cfg = DecoderConfig::new(a, b),
                    (None, None) => {}
                    _ => {
                        return Err(CliError::Input(
                            "s0 noise needs both alpha=<file> and beta=<file>".into(),
                        ))
                    }
                }
            }
            Ok((
                NoiseModel::StructuredS0 {
                    sigma: 1.0,
                    coeffs: cfg.clone(),
                },
                cfg,
            ))
        }
        "single" => {
            let args = parse_kv_list(rest.unwrap_or(""))?;
            let get = |key: &str| -> Result<f64, CliError> {
                args.iter()
                    .find(|(k, _)| k == key)
                    .ok_or_else(|| CliError::Input(format!("single noise needs {key}=<value>")))?
                    .1
                    .parse::<f64>()
                    .map_err(|_| CliError::Input(format!("bad {key}")))
            };
            let mode = get("mode")? as usize;
            if mode == 0 {
                return Err(CliError::Input("modes are 1-based".into()));
            }
            Ok((
                NoiseModel::SingleMode {
                    mode: mode - 1,
                    p_kick: get("p")?,
                    x_shift: get("x")?,
                },
                zero_cfg,
            ))
        }
        "fixed" => {
            let arg = rest.unwrap_or("zero");
            let error = if arg == "zero" {
                ErrorVector::zero(code.n())
            } else {
                let vector = fmt_io::parse_phase_vector(&read_to_string(Path::new(arg))?)?;
                ErrorVector::new(vector)
            };
            Ok((NoiseModel::Fixed(error), zero_cfg))
        }
        other => Err(CliError::Input(format!("unknown noise family `{other}`"))),
    }
}

fn parse_kv_list(text: &str) -> Result<Vec<(String, String)>, CliError> {
    if text.is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|pair| {
            pair.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| CliError::Input(format!("expected key=value, got `{pair}`")))
        })
        .collect()
}

fn load_matrix(path: &Path) -> Result<Vec<Vec<Scalar>>, CliError> {
    Ok(fmt_io::parse_single_matrix(&read_to_string(path)?)?)
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    code_file: &Path,
    noise_spec: &str,
    trials: u64,
    seed: u64,
    squeezing_db: Option<f64>,
    out: Option<&Path>,
    label: Option<&str>,
    no_timestamp: bool,
) -> Result<(), CliError> {
    let code = load_code(code_file)?;
    let (noise, cfg) = parse_noise(noise_spec, &code)?;
    let squeezing = match squeezing_db {
        Some(db) => SqueezingModel::finite_db(db)?,
        None => SqueezingModel::ideal(),
    };
    let stats = run_trials(&code, &noise, &cfg, &squeezing, trials, seed)?;
    let label = label
        .map(str::to_string)
        .or_else(|| {
            code_file
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
        })
        .unwrap_or_else(|| "code".into());
    let row = stats.csv_row(&label, &noise, &squeezing, seed);
    if let Some(path) = out {
        let existing = std::fs::read_to_string(path).unwrap_or_default();
        let mut text = String::new();
        if existing.trim().is_empty() {
            writeln!(text, "{}", TrialStats::CSV_HEADER).unwrap();
        }
        text.push_str(&timestamp_comment(no_timestamp));
        writeln!(text, "{row}").unwrap();
        use std::io::Write;
        let mut file = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        file.write_all(text.as_bytes())
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    }
    println!("{}", TrialStats::CSV_HEADER);
    println!("{row}");
    Ok(())
}

fn cmd_synthesize(symplectic: &Path, out: &Path, tol: f64) -> Result<(), CliError> {
    let rows = load_matrix(symplectic)?;
    // Circuit synthesis is float-only; lower exact entries before checking.
    let float_rows: Vec<Vec<Scalar>> = rows
        .iter()
        .map(|r| r.iter().map(|s| Scalar::from_f64(s.to_f64())).collect())
        .collect();
    let matrix = SymplecticMatrix::from_rows(float_rows)?;
    if !matrix.is_symplectic(tol.max(1e-12)) {
        return Err(CliError::Input(format!(
            "input matrix is not symplectic (residual {:.3e})",
            matrix.symplectic_residual()
        )));
    }
    let decomposition = bloch_messiah(&matrix, tol.max(1e-10))?;
    let residual = decomposition.reconstruction_residual_vs(&matrix);
    std::fs::write(out, emit_circuit(&decomposition))
        .map_err(|e| CliError::Input(format!("{}: {e}", out.display())))?;
    println!(
        "wrote circuit ({} modes, reconstruction residual {:.3e}) to {}",
        decomposition.squeeze.gains().len(),
        residual,
        out.display()
    );
    Ok(())
}

fn cmd_import_discrete(
    matrix_file: &Path,
    target_spec: &str,
    out: &Path,
    no_timestamp: bool,
) -> Result<(), CliError> {
    let rows = load_matrix(matrix_file)?;
    let binary: Vec<Vec<u8>> = rows
        .iter()
        .map(|row| {
            row.iter()
                .map(|s| {
                    if s.is_zero_within(0.0) {
                        Ok(0u8)
                    } else if *s == Scalar::one() {
                        Ok(1u8)
                    } else {
                        Err(CliError::Input(format!("entry `{s}` is not binary")))
                    }
                })
                .collect()
        })
        .collect::<Result<_, _>>()?;
    let target: PairingPattern = if target_spec == "zero" {
        zero_pattern(binary.len())
    } else {
        let pattern_rows = load_matrix(Path::new(target_spec))?;
        pattern_rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|s| {
                        let value = s.to_f64();
                        if value == 0.0 || value == 1.0 || value == -1.0 {
                            Ok(value as i8)
                        } else {
                            Err(CliError::Input(format!(
                                "pattern entry `{s}` not in {{0,+-1}}"
                            )))
                        }
                    })
                    .collect()
            })
            .collect::<Result<_, _>>()?
    };
    let lifted = barnes_lift(&binary, &target)?;
    let flat_rows: Vec<Vec<Scalar>> = lifted.iter().map(|v| v.to_flat()).collect();
    let mut text = timestamp_comment(no_timestamp);
    text.push_str(&fmt_io::format_matrix_block(&flat_rows));
    std::fs::write(out, text).map_err(|e| CliError::Input(format!("{}: {e}", out.display())))?;
    println!(
        "wrote signed matrix ({} rows) with verified pairings to {}",
        lifted.len(),
        out.display()
    );
    Ok(())
}
