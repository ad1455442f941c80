//! Command-line front end. All file I/O of the crate happens here.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::checks::{run_suites, SuiteOptions, VerifyReport};
use crate::dilation::{combined_unitary, default_assignment, initial_state, realize_extended, verify_dilation_with_tol};
use crate::error::Error;
use crate::formats::{gate_to_json, MatrixJson};
use crate::infomeasures::{coherent_information_measurement, InfoReport};
use crate::qmat::{ComplexMatrix, DensityMatrix, StateVector, TOL_EIG, TOL_PSD};
use crate::superop::{entangling_measurement, EntanglementMatrix};

/// Records with a larger dilation deviation fail the run.
pub const DILATION_GATE: f64 = 1e-8;

pub const CSV_HEADER: &str = "q_re,q_im,s_red_bits,s_d_bits,s_ab_bits,i_c_bits,cp_ok,dilation_max_dev";

const Q_HELP: &str = "Overlap q = <<1|2>> of the two microstates, |q| <= 1. \
Accepts a real number (0.5), a complex literal re+imi (0.3+0.4i, 0.3-0.4i) or a pure imaginary one (0.5i)";

#[derive(Debug, Parser)]
#[command(
    name = "entmeas",
    version,
    about = "Entangling measurements: gates, sweeps and self-checks",
    after_help = "Exit codes: 0 ok, 1 verification failure, 2 bad arguments, 3 I/O error or malformed file, 4 internal check failure."
)]
pub struct Cli {
    /// Numerical tolerance for the eigenvalue and dilation checks.
    #[arg(long, env = "ENTMEAS_TOL", global = true, value_parser = parse_tol)]
    pub tol: Option<f64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the three-qubit gate U_CD(q) as matrix JSON.
    Build {
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, help = Q_HELP)]
        q: Complex64,
        /// Output file; standard output if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Entropies and coherent information over a list or range of q.
    Sweep(SweepArgs),
    /// Apply the realized measurement to a qubit state and write rho_ABD and its marginals.
    Apply {
        /// Preset (plus, minus, zero, one, mixed) or path to a 2x2 matrix JSON file.
        #[arg(long)]
        state: String,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, help = Q_HELP)]
        q: Complex64,
        /// Output file; standard output if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the seeded invariant suites and print a JSON summary.
    Verify {
        /// Seed of the deterministic generator.
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Random cases per suite.
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Feed non-positive entanglement matrices to the CP suite.
        #[arg(long, hide = true)]
        corrupt_r: bool,
    },
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Comma-separated q values.
    #[arg(long, value_delimiter = ',', value_parser = parse_complex, allow_hyphen_values = true,
          conflicts_with_all = ["q_start", "q_stop", "q_steps"], help = Q_HELP)]
    pub q: Vec<Complex64>,
    /// Evenly spaced real q from --q-start to --q-stop.
    #[arg(long, requires_all = ["q_stop", "q_steps"], allow_hyphen_values = true)]
    pub q_start: Option<f64>,
    /// Last q of the range, included.
    #[arg(long, requires_all = ["q_start", "q_steps"], allow_hyphen_values = true)]
    pub q_stop: Option<f64>,
    /// Number of points in the range, at least 1.
    #[arg(long, requires_all = ["q_start", "q_stop"])]
    pub q_steps: Option<usize>,
    /// Preset (plus, minus, zero, one, mixed) or path to a 2x2 matrix JSON file.
    #[arg(long, default_value = "plus")]
    pub state: String,
    /// Output file; standard output if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    Verification(String),
    BadArgs(String),
    Io(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification(_) => 1,
            CliError::BadArgs(_) => 2,
            CliError::Io(_) => 3,
            CliError::Internal(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Verification(m) | CliError::BadArgs(m) | CliError::Io(m) | CliError::Internal(m) => m,
        }
    }
}

fn internal(e: Error) -> CliError {
    CliError::Internal(e.to_string())
}

/// Parses `re`, `re+imi`, `re-imi` or `imi`.
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("cannot parse {s:?} as a complex number (expected re, re+imi or imi)");
    let num = |x: &str| -> Result<f64, String> {
        match x {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => x.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(bad),
        }
    };
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix('i') else {
        return t.parse::<f64>().ok().filter(|v| v.is_finite()).map(|v| Complex64::new(v, 0.0)).ok_or_else(bad);
    };
    // Split at the last sign that is neither leading nor part of an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match split {
        Some(k) => {
            let re = &body[..k];
            if re.is_empty() || re == "+" || re == "-" {
                return Err(bad());
            }
            let re = re.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(bad)?;
            Ok(Complex64::new(re, num(&body[k..])?))
        }
        None => Ok(Complex64::new(0.0, num(body)?)),
    }
}

fn parse_tol(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
        _ => Err(format!("tolerance must be a positive number, got {s:?}")),
    }
}

/// Validates `|q| <= 1 + tol`; values just above one are pulled back to the unit circle.
pub fn checked_q(q: Complex64, tol: f64) -> Result<Complex64, CliError> {
    let m = q.norm();
    if m > 1.0 + tol {
        return Err(CliError::BadArgs(format!("|q| = {m} exceeds 1")));
    }
    Ok(if m > 1.0 { q / m } else { q })
}

/// Named preset or matrix JSON file, which must hold a qubit state.
pub fn load_state(source: &str) -> Result<DensityMatrix, CliError> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let ket = |a: f64, b: f64| {
        StateVector::single(vec![Complex64::new(a, 0.0), Complex64::new(b, 0.0)])
            .expect("normalized preset")
            .to_density()
    };
    let rho = match source {
        "plus" => ket(h, h),
        "minus" => ket(h, -h),
        "zero" => ket(1.0, 0.0),
        "one" => ket(0.0, 1.0),
        "mixed" => DensityMatrix::maximally_mixed(2),
        path => {
            let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read {path}: {e}")))?;
            let json: MatrixJson =
                serde_json::from_str(&text).map_err(|e| CliError::Io(format!("malformed matrix file {path}: {e}")))?;
            let m: ComplexMatrix = json
                .try_into()
                .map_err(|e: Error| CliError::Io(format!("malformed matrix file {path}: {e}")))?;
            DensityMatrix::single(m).map_err(|e| CliError::BadArgs(format!("{path} is not a density matrix: {e}")))?
        }
    };
    if rho.dim() != 2 {
        return Err(CliError::BadArgs(format!("expected a qubit state, got dimension {}", rho.dim())));
    }
    Ok(rho)
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    s
}

/// One sweep point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunRecord {
    pub q: [f64; 2],
    #[serde(flatten)]
    pub info: InfoReport,
    pub cp_ok: bool,
    pub dilation_max_dev: f64,
}

pub fn run_record(q: Complex64, rho_a: &DensityMatrix, tol: f64) -> crate::Result<RunRecord> {
    let r = EntanglementMatrix::from_overlap(q)?;
    let info = coherent_information_measurement(rho_a, &r)?;
    let m = entangling_measurement(&r);
    Ok(RunRecord {
        q: [q.re, q.im],
        info,
        cp_ok: m.is_completely_positive(TOL_PSD) && m.is_trace_preserving(tol),
        dilation_max_dev: verify_dilation_with_tol(&r, tol).max_dev(),
    })
}

/// Fixed-point text with negative zero folded into zero.
fn fixed(v: f64) -> String {
    let s = format!("{v:.12}");
    if s.trim_start_matches('-').bytes().all(|b| b == b'0' || b == b'.') {
        s.trim_start_matches('-').to_owned()
    } else {
        s
    }
}

pub fn records_to_csv(records: &[RunRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{:.3e}",
            fixed(r.q[0]),
            fixed(r.q[1]),
            fixed(r.info.s_red),
            fixed(r.info.s_d),
            fixed(r.info.s_ab),
            fixed(r.info.i_c_formula),
            r.cp_ok,
            r.dilation_max_dev
        )
        .expect("writing to a String");
    }
    out
}

fn sweep_values(args: &SweepArgs) -> Result<Vec<Complex64>, CliError> {
    if let (Some(start), Some(stop), Some(steps)) = (args.q_start, args.q_stop, args.q_steps) {
        if steps == 0 {
            return Err(CliError::BadArgs("--q-steps must be at least 1".into()));
        }
        if !start.is_finite() || !stop.is_finite() {
            return Err(CliError::BadArgs("q range must be finite".into()));
        }
        if steps == 1 {
            return Ok(vec![Complex64::new(start, 0.0)]);
        }
        let h = (stop - start) / (steps - 1) as f64;
        return Ok((0..steps)
            .map(|i| Complex64::new(if i + 1 == steps { stop } else { start + h * i as f64 }, 0.0))
            .collect());
    }
    Ok(args.q.clone())
}

fn cmd_build(q: Complex64, out: Option<&Path>, tol: f64) -> Result<(), CliError> {
    let q = checked_q(q, tol)?;
    let r = EntanglementMatrix::from_overlap(q).map_err(|e| CliError::BadArgs(e.to_string()))?;
    let gate = combined_unitary(&r, &default_assignment(2)).map_err(internal)?;
    let err = gate.unitarity_error();
    if err >= DILATION_GATE {
        return Err(CliError::Internal(format!("U_CD unitarity error {err:e}")));
    }
    let mut text = gate_to_json(&gate);
    text.push('\n');
    write_output(out, &text)
}

fn cmd_sweep(args: &SweepArgs, tol: f64) -> Result<(), CliError> {
    let qs = sweep_values(args)?
        .into_iter()
        .map(|q| checked_q(q, tol))
        .collect::<Result<Vec<_>, _>>()?;
    if qs.is_empty() {
        return Err(CliError::BadArgs("no q values given (use --q or --q-start/--q-stop/--q-steps)".into()));
    }
    let rho_a = load_state(&args.state)?;
    let records = qs
        .par_iter()
        .map(|&q| run_record(q, &rho_a, tol))
        .collect::<crate::Result<Vec<_>>>()
        .map_err(internal)?;
    for r in &records {
        if !r.cp_ok || r.dilation_max_dev.is_nan() || r.dilation_max_dev >= DILATION_GATE {
            return Err(CliError::Internal(format!(
                "check failed at q = {}{:+}i: cp_ok = {}, dilation_max_dev = {:e}",
                r.q[0], r.q[1], r.cp_ok, r.dilation_max_dev
            )));
        }
    }
    let text = match args.format {
        Format::Csv => records_to_csv(&records),
        Format::Json => to_json(&serde_json::json!({ "entropy_unit": "bits", "records": records })),
    };
    write_output(args.out.as_deref(), &text)
}

#[derive(Serialize)]
struct ApplyOutput {
    q: [f64; 2],
    dims: [usize; 3],
    rho_abd: MatrixJson,
    rho_a: MatrixJson,
    rho_b: MatrixJson,
    rho_d: MatrixJson,
}

pub fn apply_measurement(rho_a: &DensityMatrix, q: Complex64) -> crate::Result<[DensityMatrix; 4]> {
    let r = EntanglementMatrix::from_overlap(q)?;
    let gate = combined_unitary(&r, &default_assignment(2))?;
    let d_d = gate.dims()[2];
    let rho_abd = realize_extended(&gate, &initial_state(2, d_d))?.apply(rho_a)?;
    let a = rho_abd.partial_trace(&[0])?;
    let b = rho_abd.partial_trace(&[1])?;
    let d = rho_abd.partial_trace(&[2])?;
    Ok([rho_abd, a, b, d])
}

fn cmd_apply(state: &str, q: Complex64, out: Option<&Path>, tol: f64) -> Result<(), CliError> {
    let q = checked_q(q, tol)?;
    let rho_a = load_state(state)?;
    let [abd, a, b, d] = apply_measurement(&rho_a, q).map_err(internal)?;
    let output = ApplyOutput {
        q: [q.re, q.im],
        dims: [2, 2, d.dim()],
        rho_abd: abd.matrix().into(),
        rho_a: a.matrix().into(),
        rho_b: b.matrix().into(),
        rho_d: d.matrix().into(),
    };
    write_output(out, &to_json(&output))
}

fn cmd_verify(seed: u64, trials: usize, corrupt_r: bool, tol: f64) -> Result<VerifyReport, CliError> {
    if trials == 0 {
        return Err(CliError::BadArgs("--trials must be at least 1".into()));
    }
    let report = run_suites(seed, trials, &SuiteOptions { tol, corrupt_r });
    print!("{}", to_json(&report));
    if report.all_pass {
        Ok(report)
    } else {
        Err(CliError::Verification(format!("failed checks: {}", report.failures().join(", "))))
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let tol = cli.tol.unwrap_or(TOL_EIG);
    match cli.command {
        Command::Build { q, out } => cmd_build(q, out.as_deref(), tol),
        Command::Sweep(args) => cmd_sweep(&args, tol),
        Command::Apply { state, q, out } => cmd_apply(&state, q, out.as_deref(), tol),
        Command::Verify { seed, trials, corrupt_r } => cmd_verify(seed, trials, corrupt_r, tol).map(|_| ()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn complex_literals() {
        assert_eq!(parse_complex("0.5"), Ok(c(0.5, 0.0)));
        assert_eq!(parse_complex("-1"), Ok(c(-1.0, 0.0)));
        assert_eq!(parse_complex("0.3+0.4i"), Ok(c(0.3, 0.4)));
        assert_eq!(parse_complex("0.3-0.4i"), Ok(c(0.3, -0.4)));
        assert_eq!(parse_complex("-0.3-0.4i"), Ok(c(-0.3, -0.4)));
        assert_eq!(parse_complex("0.5i"), Ok(c(0.0, 0.5)));
        assert_eq!(parse_complex("-i"), Ok(c(0.0, -1.0)));
        assert!(parse_complex("-").is_err());
        assert_eq!(parse_complex("1e-3+2e-1i"), Ok(c(1e-3, 0.2)));
        assert_eq!(parse_complex(" 0.1 + 0.2i "), Ok(c(0.1, 0.2)));
        for bad in ["", "i+", "abc", "0.3+0.4", "+0.4i+", "nan", "0.1+-i", "inf"] {
            assert!(parse_complex(bad).is_err(), "{bad:?} parsed");
        }
    }

    #[test]
    fn q_bounds() {
        assert!(checked_q(c(1.5, 0.0), TOL_EIG).is_err());
        assert_eq!(checked_q(c(0.6, 0.8), TOL_EIG).unwrap(), c(0.6, 0.8));
        assert!((checked_q(c(1.0 + 1e-12, 0.0), TOL_EIG).unwrap().norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn csv_formatting() {
        let rho = load_state("plus").unwrap();
        let recs: Vec<_> = [0.0, 1.0].iter().map(|&q| run_record(c(q, 0.0), &rho, TOL_EIG).unwrap()).collect();
        let csv = records_to_csv(&recs);
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert!(lines[1].starts_with("0.000000000000,0.000000000000,1.000000000000,1.000000000000,"));
        assert!(!csv.contains("-0.000000000000"));
        assert_eq!(fixed(-1e-17), "0.000000000000");
        assert_eq!(fixed(-0.25), "-0.250000000000");
    }

    #[test]
    fn ranges() {
        let args = SweepArgs {
            q: vec![],
            q_start: Some(0.0),
            q_stop: Some(1.0),
            q_steps: Some(5),
            state: "plus".into(),
            out: None,
            format: Format::Csv,
        };
        let qs: Vec<f64> = sweep_values(&args).unwrap().iter().map(|q| q.re).collect();
        assert_eq!(qs, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let zero = SweepArgs { q_steps: Some(0), ..args };
        assert!(matches!(sweep_values(&zero), Err(CliError::BadArgs(_))));
    }

    #[test]
    fn presets() {
        for p in ["plus", "minus", "zero", "one", "mixed"] {
            assert_eq!(load_state(p).unwrap().dim(), 2);
        }
        assert!(matches!(load_state("/nonexistent/state.json"), Err(CliError::Io(_))));
    }

    #[test]
    fn apply_basis_state_is_pure_clone() {
        let [abd, a, b, _] = apply_measurement(&load_state("zero").unwrap(), c(0.5, 0.0)).unwrap();
        assert!((abd.matrix()[(0, 0)].re - 1.0).abs() < 1e-12);
        assert!((a.matrix()[(0, 0)].re - 1.0).abs() < 1e-12);
        assert!((b.matrix()[(0, 0)].re - 1.0).abs() < 1e-12);
    }
}
