use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ospq_core::freefield::DeformationParams;
use ospq_core::hopf::SignConvention;
use ospq_core::relations::Mode;
use ospq_core::suite::{print_object, run, ObjectKind, PrintParams, RunConfig, SuiteName};
use ospq_core::Error;

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "ospq", version, about = "Identity checks for the elliptic free boson realization")]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    /// ope, relations, hopf, limits or all
    #[arg(long, env = "OSPQ_SUITE", default_value = "all")]
    suite: String,

    /// Series truncation order N
    #[arg(long, env = "OSPQ_ORDER", default_value_t = 30)]
    order: usize,

    /// Working precision in decimal digits
    #[arg(long, env = "OSPQ_DIGITS", default_value_t = 50)]
    digits: u32,

    /// Maximum relative residual
    #[arg(long, env = "OSPQ_TOLERANCE", default_value_t = 1e-20)]
    tolerance: f64,

    #[arg(long, env = "OSPQ_SEED", default_value_t = ospq_core::sampling::DEFAULT_SEED)]
    seed: u64,

    /// Sample points per relation
    #[arg(long, env = "OSPQ_SAMPLES", default_value_t = 100)]
    samples: usize,

    /// Restrict Hopf reports to sigma = +1 or -1
    #[arg(long, env = "OSPQ_CONVENTION", allow_hyphen_values = true)]
    convention: Option<String>,

    /// Use the relations exactly as displayed instead of the corrected catalog
    #[arg(long, env = "OSPQ_STRICT_TEXT")]
    strict_text: bool,

    /// Keep derivation traces in the report
    #[arg(long, env = "OSPQ_TRACE")]
    trace: bool,

    /// Report path; stdout when absent
    #[arg(long, env = "OSPQ_OUT")]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Render a kernel, structure function or coproduct
    Print {
        /// kernel, structure-function or coproduct
        kind: String,
        /// e.g. EE, HpE (kernel); HmE, EF (structure-function); E, Hp (coproduct)
        id: String,
        /// q as an exact rational
        #[arg(long, default_value = "2/5")]
        q: String,
        /// p as an exact rational, a perfect square
        #[arg(long, default_value = "1/4")]
        p: String,
        /// Level c
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        level: i64,
        /// Series coefficients shown
        #[arg(long, default_value_t = 6)]
        coeffs: usize,
        #[arg(long)]
        strict_text: bool,
        /// sigma for the coproduct
        #[arg(long, default_value = "+1", allow_hyphen_values = true)]
        convention: String,
    },
}

fn parse_sigma(s: &str) -> Result<i8, Error> {
    match s.trim() {
        "+1" | "1" | "+" => Ok(1),
        "-1" | "-" => Ok(-1),
        other => Err(Error::Usage(format!("convention must be +1 or -1, got {other:?}"))),
    }
}

fn parse_rational(s: &str) -> Result<num_rational::BigRational, Error> {
    s.trim().parse().map_err(|_| Error::Usage(format!("not a rational number: {s:?}")))
}

fn config(cli: &Cli) -> Result<RunConfig, Error> {
    let suite = SuiteName::parse(&cli.suite).ok_or_else(|| Error::Usage(format!("unknown suite {:?}", cli.suite)))?;
    let cfg = RunConfig {
        suite,
        order: cli.order,
        digits: cli.digits,
        tolerance: cli.tolerance,
        seed: cli.seed,
        samples: cli.samples,
        convention: cli.convention.as_deref().map(parse_sigma).transpose()?,
        strict_text: cli.strict_text,
        trace: cli.trace,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn usage(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(EXIT_USAGE)
}

fn run_print(cmd: &Command) -> ExitCode {
    let Command::Print { kind, id, q, p, level, coeffs, strict_text, convention } = cmd;
    let pp = (|| -> Result<PrintParams, Error> {
        let params = DeformationParams::new(parse_rational(q)?, parse_rational(p)?, *level).map_err(|e| Error::Usage(e.to_string()))?;
        Ok(PrintParams {
            params,
            coeffs: *coeffs,
            order: (*coeffs).max(4),
            mode: if *strict_text { Mode::StrictText } else { Mode::Corrected },
            convention: SignConvention::new(parse_sigma(convention)?, -parse_sigma(convention)?)?,
        })
    })();
    let pp = match pp {
        Ok(pp) => pp,
        Err(e) => return usage(&e),
    };
    let Some(kind) = ObjectKind::parse(kind) else {
        return usage(&Error::Usage(format!("unknown object kind {kind:?}")));
    };
    match print_object(kind, id, &pp) {
        Ok(text) => {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            ExitCode::SUCCESS
        }
        Err(e @ Error::Usage(_)) => usage(&e),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_FAIL)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(cmd) = &cli.command {
        return run_print(cmd);
    }
    let cfg = match config(&cli) {
        Ok(c) => c,
        Err(e) => return usage(&e),
    };
    let report = match run(&cfg) {
        Ok(r) => r,
        Err(e @ Error::Usage(_)) => return usage(&e),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_FAIL);
        }
    };
    let json = report.to_json() + "\n";
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &json) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(EXIT_FAIL);
            }
        }
        None => print!("{json}"),
    }
    for s in &report.suites {
        eprintln!("{:<10} {}", s.name, if s.verdict.passed() { "pass" } else { "FAIL" });
        for r in s.reports.iter().filter(|r| !r.passed()) {
            eprintln!("  failed: {}", r.name());
        }
    }
    if report.overall_verdict.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAIL)
    }
}
