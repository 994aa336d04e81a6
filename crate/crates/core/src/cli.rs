//! Command-line front end.
//!
//! Structured artifacts (JSON, CSV) are written only to the files named on
//! the command line; human-readable summaries go to stdout and diagnostics
//! to stderr.
//!
//! Exit codes: 0 success, 1 verification failed, 2 usage error, 3 I/O
//! error, 4 time/z-domain inconsistency.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::codes::{gen_dft_set, gen_golay_pair, validate_ccm, Ccm, CodeSetFile};
use crate::doppler::{
    ambiguity_surface, build_ptm_train, equivalence_check, taylor_coeffs, zdomain_coeff_check,
    EquivalenceCheck, PulseTrain, TaylorReport, ZDomainReport,
};
use crate::error::Error;
use crate::numtheory::{esp_search, EspPartition, EspSearchConfig};
use crate::stagger::{composite_taylor, find_partition, plan_from_partition, DEFAULT_ANTENNA_CAP};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_INCONSISTENT: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "doppler-ccm",
    version,
    about = "Doppler-tolerant complementary pulse trains"
)]
pub struct RunConfig {
    /// Tolerance for CCM validation
    #[arg(long, global = true, default_value_t = crate::codes::DEFAULT_CCM_TOL)]
    pub tol: f64,

    /// Seed for randomized data; every command is deterministic
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CodeFamily {
    /// Binary Golay pair of length 2^SIZE
    Golay,
    /// SIZE x SIZE DFT matrix (SIZE-phase)
    Dft,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a complementary code set
    Gen {
        kind: CodeFamily,
        size: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build the PTM pulse train of order M over a code set
    Ptm {
        ccm: PathBuf,
        #[arg(value_name = "M")]
        order: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the Doppler nulls of a train up to order M in both domains
    Verify {
        train: PathBuf,
        #[arg(value_name = "M")]
        order: usize,
        #[arg(long, default_value_t = 64)]
        z_samples: usize,
        /// Write the full report as JSON
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample |g(k, theta)| on a grid and export CSV
    Surface {
        train: PathBuf,
        #[arg(long, allow_hyphen_values = true, default_value_t = -0.2)]
        theta_min: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.2)]
        theta_max: f64,
        #[arg(long, default_value_t = 101)]
        steps: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Search for partitions with equal sums of like powers
    Esp {
        /// Integer ranges, e.g. "0-2,4-6"
        universe: String,
        p: usize,
        #[arg(value_name = "M")]
        degree: usize,
        #[arg(long = "max", default_value_t = 16)]
        max_solutions: usize,
        /// Raise the universe size limit
        #[arg(long, default_value_t = EspSearchConfig::default().max_universe)]
        max_universe: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a staggered multi-antenna schedule with nulls of order M
    Stagger {
        ccm: PathBuf,
        #[arg(value_name = "M")]
        order: usize,
        /// ESP partition JSON; defaults to a built-in or searched partition
        #[arg(long)]
        partition: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_ANTENNA_CAP)]
        antenna_cap: usize,
        #[arg(long)]
        out: PathBuf,
        /// Write the composite Taylor report as JSON
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum Failure {
    Verify(String),
    Usage(String),
    Io(String),
    Inconsistent(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Verify(_) => EXIT_VERIFY_FAILED,
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Io(_) => EXIT_IO,
            Failure::Inconsistent(_) => EXIT_INCONSISTENT,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Verify(m) | Failure::Usage(m) | Failure::Io(m) | Failure::Inconsistent(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NotComplementary { .. }
            | Error::NoEspPartition { .. }
            | Error::NotEsp { .. } => Failure::Verify(e.to_string()),
            Error::DomainDisagreement { .. } => Failure::Inconsistent(e.to_string()),
            Error::Format(_) => Failure::Io(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type CmdResult = std::result::Result<i32, Failure>;

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with_output(args, &mut std::io::stdout(), &mut std::io::stderr())
}

/// Parses `args` and runs the command, writing the summary to `out` and
/// diagnostics to `err`. Returns the exit code.
pub fn run_with_output<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return code;
        }
    };
    match execute(&config, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message());
            f.code()
        }
    }
}

fn validate(config: &RunConfig) -> std::result::Result<(), Failure> {
    if !(config.tol > 0.0 && config.tol.is_finite()) {
        return Err(Failure::Usage(format!(
            "--tol must be positive, got {}",
            config.tol
        )));
    }
    let (inputs, outputs): (Vec<&Path>, Vec<&Path>) = match &config.command {
        Command::Gen { out, .. } => (vec![], vec![out]),
        Command::Ptm { ccm, out, .. } => (vec![ccm], vec![out]),
        Command::Verify { train, out, .. } => {
            (vec![train], out.iter().map(|p| p.as_path()).collect())
        }
        Command::Surface {
            train, out, steps, ..
        } => {
            if *steps < 2 {
                return Err(Failure::Usage(format!(
                    "--steps must be at least 2, got {steps}"
                )));
            }
            (vec![train], vec![out])
        }
        Command::Esp { out, .. } => (vec![], out.iter().map(|p| p.as_path()).collect()),
        Command::Stagger {
            ccm,
            partition,
            out,
            report,
            ..
        } => {
            let mut ins = vec![ccm.as_path()];
            ins.extend(partition.as_deref());
            let mut outs = vec![out.as_path()];
            outs.extend(report.as_deref());
            (ins, outs)
        }
    };
    for p in inputs {
        if !p.is_file() {
            return Err(Failure::Io(format!("input file {} not found", p.display())));
        }
    }
    for p in outputs {
        let parent = p
            .parent()
            .filter(|d| !d.as_os_str().is_empty())
            .unwrap_or(Path::new("."));
        if !parent.is_dir() {
            return Err(Failure::Io(format!(
                "output directory {} does not exist",
                parent.display()
            )));
        }
    }
    Ok(())
}

fn read_text(path: &Path) -> std::result::Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> std::result::Result<T, Failure> {
    serde_json::from_str(&read_text(path)?)
        .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> std::result::Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> std::result::Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Failure::Io(format!("serializing {}: {e}", path.display())))?;
    text.push('\n');
    write_text(path, &text)
}

/// Reads a code set and validates it at `tol`, naming the worst sidelobe
/// on failure.
fn read_ccm(path: &Path, tol: f64) -> std::result::Result<Ccm, Failure> {
    let file: CodeSetFile = read_json(path)?;
    let codes = file.to_codes()?;
    let check = validate_ccm(&codes, tol)?;
    if !check.is_ccm {
        return Err(Failure::Verify(format!(
            "{} is not a complementary code matrix: worst sidelobe sum {:e}, peak error {:e}",
            path.display(),
            check.worst_sidelobe,
            check.peak_error
        )));
    }
    Ok(Ccm::with_tolerance(codes, tol)?)
}

/// Parses `"0-2,4-6,9"` into a sorted list without duplicates.
pub fn parse_universe(ranges: &str) -> Result<Vec<u64>, Error> {
    let bad = |part: &str| Error::InvalidParameter(format!("bad universe range {part:?}"));
    let mut values = Vec::new();
    for part in ranges.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((lo, hi)) => {
                let lo: u64 = lo.trim().parse().map_err(|_| bad(part))?;
                let hi: u64 = hi.trim().parse().map_err(|_| bad(part))?;
                if hi < lo {
                    return Err(bad(part));
                }
                values.extend(lo..=hi);
            }
            None => values.push(part.parse().map_err(|_| bad(part))?),
        }
    }
    values.sort_unstable();
    values.dedup();
    Ok(values)
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    taylor: &'a TaylorReport,
    #[serde(rename = "zDomain")]
    z_domain: Option<&'a ZDomainReport>,
    equivalence: &'a [EquivalenceCheck],
}

fn execute(config: &RunConfig, out: &mut dyn Write) -> CmdResult {
    validate(config)?;
    let mut say = |line: String| {
        let _ = writeln!(out, "{line}");
    };
    match &config.command {
        Command::Gen {
            kind,
            size,
            out: path,
        } => {
            let ccm = match kind {
                CodeFamily::Golay => {
                    let exp = u32::try_from(*size)
                        .map_err(|_| Failure::Usage("size too large".into()))?;
                    gen_golay_pair(exp)?
                }
                CodeFamily::Dft => gen_dft_set(*size)?,
            };
            let check = validate_ccm(ccm.columns(), config.tol)?;
            if !check.is_ccm {
                return Err(Failure::Verify(format!(
                    "generated set failed validation (worst sidelobe {:e})",
                    check.worst_sidelobe
                )));
            }
            write_json(path, &ccm)?;
            say(format!(
                "{kind:?}: N={} K={} worst sidelobe sum {:e} -> {}",
                ccm.code_len(),
                ccm.code_count(),
                check.worst_sidelobe,
                path.display()
            ));
            Ok(EXIT_OK)
        }
        Command::Ptm {
            ccm,
            order,
            out: path,
        } => {
            let ccm = read_ccm(ccm, config.tol)?;
            let train = build_ptm_train(&ccm, *order)?;
            write_json(path, &train)?;
            say(format!(
                "L={} K={} M={} N={} -> {}",
                train.len(),
                ccm.code_count(),
                order,
                ccm.code_len(),
                path.display()
            ));
            Ok(EXIT_OK)
        }
        Command::Verify {
            train,
            order,
            z_samples,
            out: path,
        } => {
            let train: PulseTrain = read_json(train)?;
            let taylor = taylor_coeffs(&train, *order)?;
            let z_domain = match train.ptm_order() {
                Some(_) => Some(zdomain_coeff_check(&train, *order, *z_samples)?),
                None => None,
            };
            let equivalence = (0..=*order)
                .map(|m| equivalence_check(&train, m))
                .collect::<Result<Vec<_>, _>>()?;

            say(format!(
                "train: L={} K={} N={} delay={}",
                train.len(),
                train.ccm().code_count(),
                train.ccm().code_len(),
                train.delay()
            ));
            for m in 0..=*order {
                let z = z_domain
                    .as_ref()
                    .map(|z| format!(" z-residual {:.3e}", z.residuals[m]))
                    .unwrap_or_default();
                say(format!(
                    "m={m}: max sidelobe |c_m| {:.3e} (threshold {:.3e}) {}{}",
                    taylor.max_sidelobe_residual[m],
                    taylor.thresholds[m],
                    if taylor.vanishes(m) {
                        "null"
                    } else {
                        "NOT null"
                    },
                    z
                ));
            }
            match taylor.null_order {
                Some(o) => say(format!("null order {o}")),
                None => say("null order: none (zero-Doppler sidelobes do not cancel)".into()),
            }
            if let Some(path) = path {
                write_json(
                    path,
                    &VerifyReport {
                        taylor: &taylor,
                        z_domain: z_domain.as_ref(),
                        equivalence: &equivalence,
                    },
                )?;
            }
            Ok(if taylor.reaches(*order) {
                EXIT_OK
            } else {
                EXIT_VERIFY_FAILED
            })
        }
        Command::Surface {
            train,
            theta_min,
            theta_max,
            steps,
            out: path,
        } => {
            let train: PulseTrain = read_json(train)?;
            let surface = ambiguity_surface(&train, *theta_min, *theta_max, *steps)?;
            write_text(path, &surface.to_csv())?;
            let peak = surface.magnitudes.iter().copied().fold(0.0, f64::max);
            say(format!(
                "{}: {} rows ({} theta x {} lags), peak {peak} -> {}",
                surface.description,
                surface.magnitudes.len(),
                surface.thetas.len(),
                surface.lags.len(),
                path.display()
            ));
            Ok(EXIT_OK)
        }
        Command::Esp {
            universe,
            p,
            degree,
            max_solutions,
            max_universe,
            out: path,
        } => {
            let universe = parse_universe(universe)?;
            let found = esp_search(
                &universe,
                *p,
                *degree,
                *max_solutions,
                &EspSearchConfig {
                    max_universe: *max_universe,
                },
            )?;
            for part in &found {
                say(format!("{:?}", part.blocks()));
            }
            say(format!(
                "{} partition(s) of degree {degree} found",
                found.len()
            ));
            if let Some(path) = path {
                write_json(path, &found)?;
            }
            Ok(if found.is_empty() {
                EXIT_VERIFY_FAILED
            } else {
                EXIT_OK
            })
        }
        Command::Stagger {
            ccm,
            order,
            partition,
            antenna_cap,
            out: path,
            report,
        } => {
            let ccm = read_ccm(ccm, config.tol)?;
            let partition: EspPartition = match partition {
                Some(p) => read_json(p)?,
                None => find_partition(ccm.code_count(), *order)?,
            };
            if partition.degree() < *order {
                return Err(Failure::Verify(format!(
                    "partition has degree {} < requested order {order}",
                    partition.degree()
                )));
            }
            let plan = plan_from_partition(&partition, &ccm, *antenna_cap)?;
            let composite = composite_taylor(&plan, *order)?;
            write_json(path, &plan)?;
            if let Some(r) = report {
                write_json(r, &composite)?;
            }
            for lane in plan.lanes() {
                say(format!("lane delay {:>3}: {:?}", lane.delay, lane.indices));
            }
            say(format!(
                "span {} pulses {} lanes {} null order {}",
                composite.span,
                composite.total_pulses,
                plan.lanes().len(),
                composite
                    .taylor
                    .null_order
                    .map_or("none".into(), |o| o.to_string())
            ));
            if let Ok(len) = crate::numtheory::ptm_length(ccm.code_count(), *order) {
                say(format!("equivalent PTM train: span {len} pulses {len}"));
            }
            Ok(if composite.taylor.reaches(*order) {
                EXIT_OK
            } else {
                EXIT_VERIFY_FAILED
            })
        }
    }
}
