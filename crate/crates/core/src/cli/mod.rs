//! The `heightlab` command line.
//!
//! Exit codes: 0 ok, 2 usage or parse error, 3 certification or cap failure,
//! 4 strict-input violation, 5 enumeration budget exceeded.

pub mod expr;
pub mod selftest;
pub mod sweep;

use std::ffi::OsString;
use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::arith::{format_rational, parse_rational, BigRational, ProjectivePointQ};
use crate::dynamics::FamilyParams;
use crate::error::Error;
use crate::generic::{generic_height_detail, verify_coprime_iterates, RationalMap1D};
use crate::heights::{global_canonical_height_detail, CertifiedValue};
use crate::limits::Limits;
use crate::preperiodic::{search_preperiodic_parameters, variation_bound};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CERT: i32 = 3;
pub const EXIT_STRICT: i32 = 4;
pub const EXIT_BUDGET: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "heightlab", version, about = "Certified canonical heights for f(z) = (z^d + lambda)/z over Q")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Global canonical height of a point with its per-place breakdown.
    Height(HeightArgs),
    /// Exact canonical height of c(t) on the generic fiber.
    Generic(GenericArgs),
    /// CSV sweep of hhat(c(lambda)) against hhat_f(c)*h(lambda).
    Sweep(SweepArgs),
    /// Search for lambda making alpha preperiodic.
    Search(SearchArgs),
    /// Run the built-in invariant suites.
    Selftest(SelftestArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Settings shared by every computation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub d: u32,
    pub eps: f64,
    pub orbit_cap: u64,
    pub bigint_cap_bytes: usize,
    pub jobs: usize,
    pub format: Format,
    pub seed: u64,
}

impl RunConfig {
    fn limits(&self) -> Limits {
        Limits {
            bigint_cap_bytes: self.bigint_cap_bytes,
            ..Limits::default()
        }
    }

    fn validate(&self) -> Result<(), Error> {
        if self.d < 2 {
            return Err(Error::InvalidInput(format!("--d must be at least 2, got {}", self.d)));
        }
        if !(self.eps > 0.0) || !self.eps.is_finite() {
            return Err(Error::InvalidInput(format!("--eps must be positive, got {}", self.eps)));
        }
        if self.orbit_cap == 0 || self.bigint_cap_bytes == 0 {
            return Err(Error::InvalidInput("caps must be positive".to_string()));
        }
        Ok(())
    }
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long, default_value_t = 2)]
    d: u32,
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    #[arg(long, default_value_t = 64)]
    orbit_cap: u64,
    /// Overrides HEIGHTLAB_BIGINT_CAP.
    #[arg(long)]
    bigint_cap: Option<usize>,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

impl Common {
    fn config(&self, format: Format) -> RunConfig {
        RunConfig {
            d: self.d,
            eps: self.eps,
            orbit_cap: self.orbit_cap,
            bigint_cap_bytes: self.bigint_cap.unwrap_or_else(|| Limits::from_env().bigint_cap_bytes),
            jobs: self.jobs,
            format,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Args)]
struct HeightArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, allow_hyphen_values = true)]
    lambda: String,
    /// A rational "a/b" or "inf".
    #[arg(long, allow_hyphen_values = true)]
    point: String,
}

#[derive(Debug, Args)]
struct GenericArgs {
    #[arg(long, default_value_t = 2)]
    d: u32,
    /// Rational function of t, e.g. "(t^2+1)/(2t-3)".
    #[arg(long, allow_hyphen_values = true)]
    map: String,
    /// Fail with exit code 4 if numerator and denominator share a factor.
    #[arg(long)]
    strict: bool,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, allow_hyphen_values = true)]
    map: String,
    /// Sample lambda with h(lambda) <= hmax.
    #[arg(long)]
    hmax: f64,
    #[arg(long)]
    samples: usize,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(Debug, Args)]
struct SearchArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, allow_hyphen_values = true)]
    alpha: String,
    /// Height cap on lambda actually searched.
    #[arg(long)]
    cap: f64,
}

#[derive(Debug, Args)]
struct SelftestArgs {
    /// Run only this suite.
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(selftest::SUITES))]
    suite: Option<String>,
    #[arg(long, hide = true, default_value_t = 1.0)]
    x_tail_scale: f64,
}

#[derive(Serialize)]
struct PlaceJson {
    place: String,
    value: f64,
    error: f64,
    reason: &'static str,
}

#[derive(Serialize)]
struct HeightJson {
    d: u32,
    lambda: String,
    point: String,
    hhat: CertifiedValue,
    places: Vec<PlaceJson>,
}

#[derive(Serialize)]
struct GenericJson {
    hhat_generic: String,
    deg_f1: usize,
    deg_f2: usize,
    coprime_check: bool,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_) | Error::InvalidInput(_) | Error::NotPrime(_) => EXIT_USAGE,
        Error::RegionTooLarge { .. } => EXIT_BUDGET,
        Error::DegenerateOrbit(_) | Error::CapExceeded(_) | Error::PrecisionExhausted { .. } | Error::Factorization(_) => {
            EXIT_CERT
        }
    }
}

struct Io<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Io<'_> {
    fn fail(&mut self, e: &Error) -> i32 {
        let _ = writeln!(self.err, "error: {e}");
        exit_code(e)
    }

    fn json<T: Serialize>(&mut self, v: &T) -> i32 {
        let s = serde_json::to_string(v).expect("serializable output");
        let _ = writeln!(self.out, "{s}");
        EXIT_OK
    }
}

/// Runs the CLI on explicit arguments, writing to the given streams, and
/// returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            if code == EXIT_OK {
                let _ = write!(out, "{rendered}");
            } else {
                let _ = write!(err, "{rendered}");
            }
            return code;
        }
    };
    let mut io = Io { out, err };
    match cli.cmd {
        Command::Height(a) => cmd_height(&a, &mut io),
        Command::Generic(a) => cmd_generic(&a, &mut io),
        Command::Sweep(a) => cmd_sweep(&a, &mut io),
        Command::Search(a) => cmd_search(&a, &mut io),
        Command::Selftest(a) => cmd_selftest(&a, &mut io),
    }
}

pub fn main_with_env() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let mut out = stdout.lock();
    let mut err = stderr.lock();
    run(std::env::args_os(), &mut out, &mut err)
}

fn with_jobs<R: Send>(jobs: usize, f: impl FnOnce() -> R + Send) -> Result<R, Error> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot start {jobs} worker threads: {e}")))?;
    Ok(pool.install(f))
}

fn cmd_height(a: &HeightArgs, io: &mut Io) -> i32 {
    let cfg = a.common.config(Format::Json);
    let run = || -> Result<HeightJson, Error> {
        cfg.validate()?;
        let lambda = parse_rational(&a.lambda)?;
        let point: ProjectivePointQ = a.point.parse()?;
        let params = FamilyParams::new(cfg.d, lambda)?;
        params.require_nonzero_lambda()?;
        let g = global_canonical_height_detail(&params, &point, cfg.eps, &cfg.limits())?;
        Ok(HeightJson {
            d: cfg.d,
            lambda: format_rational(params.lambda()),
            point: point.to_string(),
            hhat: g.total,
            places: g
                .places
                .iter()
                .map(|c| PlaceJson {
                    place: c.place.to_string(),
                    value: c.value.value,
                    error: c.value.error,
                    reason: c.reason.as_str(),
                })
                .collect(),
        })
    };
    match run() {
        Ok(doc) => io.json(&doc),
        Err(e) => io.fail(&e),
    }
}

fn parse_map_arg(s: &str, strict: bool, io: &mut Io) -> Result<RationalMap1D, i32> {
    let (num, den) = expr::parse_map(s).map_err(|e| io.fail(&e))?;
    let (c, removed) = RationalMap1D::from_polys(num, den).map_err(|e| io.fail(&e))?;
    if let Some(g) = removed {
        let _ = writeln!(io.err, "warning: numerator and denominator share the factor {g}; using c(t) = {c}");
        if strict {
            return Err(EXIT_STRICT);
        }
    }
    Ok(c)
}

fn cmd_generic(a: &GenericArgs, io: &mut Io) -> i32 {
    if a.d < 2 {
        return io.fail(&Error::InvalidInput(format!("--d must be at least 2, got {}", a.d)));
    }
    let c = match parse_map_arg(&a.map, a.strict, io) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let run = || -> Result<GenericJson, Error> {
        let g = generic_height_detail(&c, a.d)?;
        Ok(GenericJson {
            hhat_generic: format_rational(&g.hhat),
            deg_f1: g.deg_f1,
            deg_f2: g.deg_f2,
            coprime_check: verify_coprime_iterates(&c, a.d, 2)?,
        })
    };
    match run() {
        Ok(doc) => io.json(&doc),
        Err(e) => io.fail(&e),
    }
}

fn cmd_sweep(a: &SweepArgs, io: &mut Io) -> i32 {
    let cfg = a.common.config(Format::Csv);
    if let Err(e) = cfg.validate() {
        return io.fail(&e);
    }
    if !(a.hmax > 0.0) {
        return io.fail(&Error::InvalidInput(format!("--hmax must be positive, got {}", a.hmax)));
    }
    let c = match parse_map_arg(&a.map, false, io) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let rows = sweep::sample_parameters(a.hmax, a.samples, cfg.seed).and_then(|lams| {
        let limits = cfg.limits();
        with_jobs(cfg.jobs, || sweep::sweep_rows(&c, cfg.d, &lams, cfg.eps, &limits))?
    });
    let rows = match rows {
        Ok(r) => r,
        Err(e) => return io.fail(&e),
    };
    let written = match &a.out {
        Some(path) => std::fs::File::create(path)
            .map_err(|e| Error::InvalidInput(format!("cannot create {}: {e}", path.display())))
            .and_then(|f| sweep::write_csv(std::io::BufWriter::new(f), &rows)),
        None => sweep::write_csv(&mut *io.out, &rows),
    };
    if let Err(e) = written {
        return io.fail(&e);
    }
    let max_gap = sweep::max_gap(&rows);
    let _ = writeln!(
        io.err,
        "seed={} d={} map={} hmax={} samples={} max_gap={}",
        cfg.seed,
        cfg.d,
        c,
        a.hmax,
        rows.len(),
        max_gap
    );
    if let Some(r) = rows.iter().find(|r| !(r.hhat_err <= cfg.eps)) {
        let _ = writeln!(io.err, "error: lambda = {} not certified to eps (error {})", r.lambda, r.hhat_err);
        return EXIT_CERT;
    }
    if let Some(alpha) = sweep::constant_alpha(&c) {
        let bound = variation_bound(&alpha, cfg.d).expect("alpha is nonzero");
        let _ = writeln!(io.err, "bound={bound} (3d(1+l+2h(alpha)) for alpha={})", format_rational(&alpha));
        if !rows.is_empty() && max_gap >= bound {
            let _ = writeln!(io.err, "error: max gap {max_gap} reaches the bound {bound}");
            return EXIT_CERT;
        }
    }
    EXIT_OK
}

fn cmd_search(a: &SearchArgs, io: &mut Io) -> i32 {
    let cfg = a.common.config(Format::Json);
    let run = || -> Result<_, Error> {
        cfg.validate()?;
        let alpha: BigRational = parse_rational(&a.alpha)?;
        let limits = cfg.limits();
        with_jobs(cfg.jobs, || {
            search_preperiodic_parameters(&alpha, cfg.d, a.cap, cfg.eps, cfg.orbit_cap, &limits)
        })?
    };
    match run() {
        Ok(report) => io.json(&report),
        Err(e) => io.fail(&e),
    }
}

fn cmd_selftest(a: &SelftestArgs, io: &mut Io) -> i32 {
    let opts = selftest::SelftestOptions {
        tail_scale: a.x_tail_scale,
        ..selftest::SelftestOptions::default()
    };
    let names: Vec<&str> = match &a.suite {
        Some(s) => vec![s.as_str()],
        None => selftest::SUITES.to_vec(),
    };
    let mut failed = false;
    for name in names {
        match selftest::run_suite(name, &opts).expect("suite names are validated by clap") {
            Ok(n) => {
                let _ = writeln!(io.out, "{name}: ok ({n} checks)");
            }
            Err(msg) => {
                failed = true;
                let _ = writeln!(io.out, "{name}: FAILED: {msg}");
            }
        }
    }
    if failed {
        1
    } else {
        EXIT_OK
    }
}
