//! Command-line front end.
//!
//! Data goes to stdout, diagnostics to stderr. Exit codes:
//!
//! * `0` — success / found;
//! * `1` — sound negative (no scale, no exact copy, density likely zero);
//! * `2` — invalid input;
//! * `3` — certificate refused or certification failed;
//! * `4` — internal capacity limit.
//!
//! Identical argument vectors produce byte-identical output streams.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use frieze_core::certificate::{build_certificate_with, ScalePattern};
use frieze_core::density::{
    default_oscillation_threshold, default_zero_threshold, estimate_beta,
    two_sided_partial_density, Verdict,
};
use frieze_core::experiment::{compare_report, exact_copy_exists, scan_rows, ReportRow};
use frieze_core::rat;
use frieze_core::scale_search::{find_scale, SearchMode, SearchOutcome};
use frieze_core::set_model::write_bitmap_file;
use frieze_core::{parse_spec, Error, Int, Rat, SetSpec};

const DEFAULT_HORIZON: u64 = 1_000_000;

#[derive(Parser)]
#[command(
    name = "frieze",
    about = "Approximate scaled copies of integer patterns in positive-density sets",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Estimate the forward density of a set and print the verdict.
    Density {
        /// Set expression, e.g. residue(2;0) or union(primes,explicit[4]).
        #[arg(long)]
        set: String,
        /// Diagnostic horizon (at least 1000).
        #[arg(long, default_value_t = DEFAULT_HORIZON)]
        horizon: u64,
        /// Also print the two-sided partial density at the horizon.
        #[arg(long)]
        two_sided: bool,
        /// Positivity threshold (exact rational, e.g. 0.1 or 1/10).
        #[arg(long)]
        zero_threshold: Option<String>,
        /// Tail-oscillation threshold (exact rational).
        #[arg(long)]
        oscillation_threshold: Option<String>,
    },
    /// Compute the certified threshold chain for (set, pattern, epsilon).
    Certify {
        #[arg(long)]
        set: String,
        /// Comma-separated strictly increasing integers, e.g. 0,1,2.
        #[arg(long)]
        pattern: String,
        /// Accuracy (exact rational, e.g. 0.1 or 1/10).
        #[arg(long)]
        epsilon: String,
        #[arg(long, default_value_t = DEFAULT_HORIZON)]
        horizon: u64,
        #[arg(long)]
        zero_threshold: Option<String>,
        #[arg(long)]
        oscillation_threshold: Option<String>,
    },
    /// Search one n for a scale of the pattern.
    Find {
        #[arg(long)]
        set: String,
        #[arg(long)]
        pattern: String,
        #[arg(long)]
        epsilon: String,
        #[arg(long)]
        n: u64,
        #[arg(long, value_enum, default_value_t = Mode::Loose)]
        mode: Mode,
        /// Horizon for the certificate in certified mode.
        #[arg(long, default_value_t = DEFAULT_HORIZON)]
        horizon: u64,
    },
    /// Loose-mode scale search for every n in [from, to], as CSV.
    Scan {
        #[arg(long)]
        set: String,
        #[arg(long)]
        pattern: String,
        #[arg(long)]
        epsilon: String,
        #[arg(long)]
        from: u64,
        #[arg(long)]
        to: u64,
    },
    /// Certified-versus-empirical threshold report, as CSV.
    Compare {
        #[arg(long)]
        set: String,
        #[arg(long)]
        pattern: String,
        #[arg(long)]
        epsilon: String,
        /// Width of the "for all n" proxy window.
        #[arg(long, default_value_t = 1_000)]
        window: u64,
        #[arg(long, default_value_t = DEFAULT_HORIZON)]
        horizon: u64,
    },
    /// First anchor in [from, to] whose exact translated pattern copy
    /// lies in the set, or "none".
    #[command(allow_negative_numbers = true)]
    Exact {
        #[arg(long)]
        set: String,
        #[arg(long)]
        pattern: String,
        #[arg(long)]
        from: i64,
        #[arg(long)]
        to: i64,
    },
    /// Materialize the membership bits of [offset, offset+n] into a
    /// bitmap file loadable with file("path").
    #[command(allow_negative_numbers = true)]
    Bitmap {
        #[arg(long)]
        set: String,
        /// Number of bits to write is n + 1.
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 0)]
        offset: i64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Certified,
    Loose,
}

/// Runs the CLI against explicit streams; returns the exit code.
pub fn run<O: Write, E: Write>(
    args: impl IntoIterator<Item = String>,
    out: &mut O,
    err: &mut E,
) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders its own help/version on stdout with code 0.
            if e.exit_code() == 0 {
                let _ = write!(out, "{e}");
                return 0;
            }
            let _ = write!(err, "{e}");
            return 2;
        }
    };
    match dispatch(cli.cmd, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code_for(&e)
        }
    }
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::InvalidInput(_) | Error::Parse { .. } | Error::Io(_) | Error::Bitmap(_) => 2,
        Error::Capacity { .. } => 4,
        Error::CertificateRefused { .. } | Error::CertificationFailed(_) => 3,
    }
}

fn parse_set(text: &str) -> Result<SetSpec, Error> {
    parse_spec(text)
}

fn parse_pattern(text: &str) -> Result<ScalePattern, Error> {
    text.parse()
}

fn parse_rational(text: &str, what: &str) -> Result<Rat, Error> {
    rat::parse::<Int>(text).map_err(|_| Error::invalid(format!("{what}: invalid rational `{text}`")))
}

fn threshold_or(opt: &Option<String>, what: &str, default: Rat) -> Result<Rat, Error> {
    match opt {
        Some(text) => parse_rational(text, what),
        None => Ok(default),
    }
}

fn dispatch(cmd: Cmd, out: &mut impl Write) -> Result<i32, Error> {
    match cmd {
        Cmd::Density {
            set,
            horizon,
            two_sided,
            zero_threshold,
            oscillation_threshold,
        } => {
            let spec = parse_set(&set)?;
            let zt = threshold_or(&zero_threshold, "zero threshold", default_zero_threshold())?;
            let ot = threshold_or(
                &oscillation_threshold,
                "oscillation threshold",
                default_oscillation_threshold(),
            )?;
            let est = estimate_beta::<Int>(&spec, horizon, &zt, &ot)?;
            writeln!(out, "set {set_text}", set_text = spec)?;
            writeln!(out, "beta {}", rat::render(&est.beta))?;
            writeln!(out, "exact {}", est.exact)?;
            writeln!(out, "horizon {}", est.horizon)?;
            writeln!(out, "tail_oscillation {}", rat::render(&est.tail_oscillation))?;
            writeln!(out, "verdict {}", est.verdict)?;
            if two_sided {
                let d = two_sided_partial_density::<Int>(&spec, horizon);
                writeln!(out, "two_sided {}", rat::render(&d))?;
            }
            Ok(if est.verdict == Verdict::LikelyZero { 1 } else { 0 })
        }
        Cmd::Certify {
            set,
            pattern,
            epsilon,
            horizon,
            zero_threshold,
            oscillation_threshold,
        } => {
            let spec = parse_set(&set)?;
            let pattern = parse_pattern(&pattern)?;
            let epsilon = parse_rational(&epsilon, "epsilon")?;
            let zt = threshold_or(&zero_threshold, "zero threshold", default_zero_threshold())?;
            let ot = threshold_or(
                &oscillation_threshold,
                "oscillation threshold",
                default_oscillation_threshold(),
            )?;
            let cert = build_certificate_with(&spec, &pattern, &epsilon, horizon, &zt, &ot)?;
            write!(out, "{}", cert.record(Some(&spec.to_string())))?;
            Ok(0)
        }
        Cmd::Find {
            set,
            pattern,
            epsilon,
            n,
            mode,
            horizon,
        } => {
            let spec = parse_set(&set)?;
            let pattern = parse_pattern(&pattern)?;
            let epsilon = parse_rational(&epsilon, "epsilon")?;
            let search_mode = match mode {
                Mode::Loose => SearchMode::Loose,
                Mode::Certified => {
                    let cert =
                        frieze_core::certificate::build_certificate(&spec, &pattern, &epsilon, horizon)?;
                    writeln!(out, "cert_N {}", cert.scale_floor)?;
                    writeln!(out, "eps_bar {}", rat::render(&cert.eps_bar))?;
                    SearchMode::Certified {
                        eps_bar: cert.eps_bar.clone(),
                    }
                }
            };
            let outcome = find_scale(&spec, &pattern, &epsilon, n, search_mode)?;
            writeln!(out, "n {n}")?;
            writeln!(
                out,
                "mode {}",
                match mode {
                    Mode::Loose => "loose",
                    Mode::Certified => "certified",
                }
            )?;
            match outcome {
                SearchOutcome::Found(result) => {
                    writeln!(out, "found true")?;
                    let r_list: Vec<String> = result.r.iter().map(u64::to_string).collect();
                    writeln!(out, "r {}", r_list.join(";"))?;
                    let residuals: Vec<String> =
                        result.residuals.iter().map(rat::render).collect();
                    writeln!(out, "residuals {}", residuals.join(";"))?;
                    writeln!(
                        out,
                        "max_residual {}",
                        rat::render(result.max_residual().expect("nonempty"))
                    )?;
                    writeln!(out, "verified {}", result.verified)?;
                    Ok(0)
                }
                SearchOutcome::NotFound { target_index } => {
                    writeln!(out, "found false")?;
                    writeln!(out, "failing_target {target_index}")?;
                    Ok(1)
                }
            }
        }
        Cmd::Scan {
            set,
            pattern,
            epsilon,
            from,
            to,
        } => {
            let spec = parse_set(&set)?;
            let pattern = parse_pattern(&pattern)?;
            let epsilon = parse_rational(&epsilon, "epsilon")?;
            let rows = scan_rows(&spec, &pattern, &epsilon, from, to)?;
            writeln!(out, "# set {spec}")?;
            writeln!(out, "# pattern {pattern}")?;
            writeln!(out, "# epsilon {}", rat::render(&epsilon))?;
            writeln!(out, "# from {from}")?;
            writeln!(out, "# to {to}")?;
            writeln!(out, "n,success,r_list,max_residual_num,max_residual_den")?;
            for row in &rows {
                write_row(out, row)?;
            }
            Ok(0)
        }
        Cmd::Compare {
            set,
            pattern,
            epsilon,
            window,
            horizon,
        } => {
            let spec = parse_set(&set)?;
            let pattern = parse_pattern(&pattern)?;
            let epsilon = parse_rational(&epsilon, "epsilon")?;
            let report = compare_report(&spec, &pattern, &epsilon, horizon, window)?;
            report.write_csv(out)?;
            Ok(0)
        }
        Cmd::Exact {
            set,
            pattern,
            from,
            to,
        } => {
            let spec = parse_set(&set)?;
            let pattern = parse_pattern(&pattern)?;
            match exact_copy_exists(&spec, &pattern, from, to) {
                Some(anchor) => {
                    writeln!(out, "{anchor}")?;
                    Ok(0)
                }
                None => {
                    writeln!(out, "none")?;
                    Ok(1)
                }
            }
        }
        Cmd::Bitmap { set, n, offset, out: path } => {
            let spec = parse_set(&set)?;
            let len = n
                .checked_add(1)
                .filter(|&len| len <= frieze_core::set_model::MAX_WINDOW_BITS)
                .ok_or(Error::Capacity {
                    what: "bitmap bits",
                    requested: n,
                    limit: frieze_core::set_model::MAX_WINDOW_BITS,
                })?;
            let mut bits = frieze_core::bits::BitWindow::zeros(len);
            for j in 0..len {
                let i = offset.checked_add_unsigned(j).ok_or_else(|| {
                    Error::invalid("offset + n overflows the integer range")
                })?;
                if spec.contains(i) {
                    bits.set(j, true);
                }
            }
            write_bitmap_file(&path, offset, &bits)?;
            writeln!(out, "path {}", path.display())?;
            writeln!(out, "offset {offset}")?;
            writeln!(out, "bits {len}")?;
            writeln!(out, "popcount {}", bits.count_ones())?;
            Ok(0)
        }
    }
}

fn write_row(out: &mut impl Write, row: &ReportRow<Int>) -> std::io::Result<()> {
    let r_list: Vec<String> = row.r.iter().map(u64::to_string).collect();
    let (num, den) = match &row.max_residual {
        Some(res) => (res.numer().to_string(), res.denom().to_string()),
        None => (String::new(), String::new()),
    };
    writeln!(
        out,
        "{},{},{},{},{}",
        row.n,
        row.success,
        r_list.join(";"),
        num,
        den
    )
}
