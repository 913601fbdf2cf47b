//! Command-line front end: admissibility queries, family construction and
//! export, verification runs, and shape-constant sweeps.
//!
//! The CLI is a thin shell over the library; every number it prints comes
//! from the same calls a library user would make. Exit codes: 0 pass,
//! 1 verification fail, 2 domain error, 3 integration failure, 64 usage.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pmclab::config::{OutputFormat, RunConfig};
use pmclab::report::{grid_to_csv, grid_to_json, report_to_json};
use pmclab::sweep::{run_sweep, sweep_to_csv};
use pmclab::{admissible_intervals, negative_control, run_residual_suite, Error};

#[derive(Parser)]
#[command(name = "pmclab", version, about = "Surfaces with parallel mean curvature vector: family construction and verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct CommonOpts {
    /// Half the mean-curvature norm (scale parameter)
    #[arg(long)]
    b: Option<f64>,
    /// Shape constant of the family
    #[arg(long)]
    c3: Option<f64>,
    /// Branch: low_pos | high_pos | neg (inferred from c3 when omitted)
    #[arg(long)]
    branch: Option<String>,
    /// Sign of Im a: plus | minus
    #[arg(long = "im-sign")]
    im_sign: Option<String>,
    /// Side of pi/2 for constructed angles: acute | obtuse
    #[arg(long = "alpha-side")]
    alpha_side: Option<String>,
    /// Initial Kaehler angle in radians (interval midpoint when omitted)
    #[arg(long)]
    alpha0: Option<f64>,
    /// Half-width of the symmetric u-interval
    #[arg(long = "u-span")]
    u_span: Option<f64>,
    /// Integration and difference step
    #[arg(long)]
    h: Option<f64>,
    /// Endpoint guard in sin^2(alpha) units
    #[arg(long)]
    delta: Option<f64>,
    /// Number of v-nodes
    #[arg(long = "v-count")]
    v_count: Option<usize>,
    /// Spacing of v-nodes (defaults to h)
    #[arg(long = "v-step")]
    v_step: Option<f64>,
    /// Ambient-curvature perturbation for negative controls (1 = family)
    #[arg(long = "rho-scale")]
    rho_scale: Option<f64>,
    /// Conditioning margin excluded from residual max-norms, as a fraction
    /// of the interval width
    #[arg(long = "margin-frac")]
    margin_frac: Option<f64>,
    /// Output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format: csv | json
    #[arg(long)]
    format: Option<String>,
    /// Config file (flat key = value); PMCLAB_CONFIG supplies the default
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the admissible interval of sin^2(alpha) for a shape constant
    #[command(allow_negative_numbers = true)]
    Interval {
        #[arg(long)]
        c3: Option<f64>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Integrate the family and export the sampled grid
    #[command(allow_negative_numbers = true)]
    Family {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Run the residual suite (or a negative control) and report
    #[command(allow_negative_numbers = true)]
    Verify {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Sweep the shape constant: curvature landscape and Hopf-ratio checks
    #[command(allow_negative_numbers = true)]
    Sweep {
        #[arg(long)]
        b: Option<f64>,
        #[arg(long = "c3-min")]
        c3_min: f64,
        #[arg(long = "c3-max")]
        c3_max: f64,
        #[arg(long, default_value_t = 8)]
        steps: usize,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

/// `--tol.<name> <value>` and `--tol.<name>=<value>` flags are extracted
/// before clap parsing (the flag name is dynamic).
fn extract_tol_flags(args: Vec<String>) -> Result<(Vec<String>, Vec<(String, String)>), Error> {
    let mut rest = Vec::with_capacity(args.len());
    let mut tols = Vec::new();
    let mut it = args.into_iter();
    while let Some(arg) = it.next() {
        if let Some(spec) = arg.strip_prefix("--tol.") {
            if let Some((name, value)) = spec.split_once('=') {
                tols.push((name.to_string(), value.to_string()));
            } else {
                let value = it
                    .next()
                    .ok_or_else(|| Error::Usage(format!("--tol.{spec} needs a value")))?;
                tols.push((spec.to_string(), value));
            }
        } else {
            rest.push(arg);
        }
    }
    Ok((rest, tols))
}

fn build_config(common: &CommonOpts, tols: &[(String, String)]) -> Result<RunConfig, Error> {
    let mut cfg = RunConfig::load(common.config.as_deref())?;
    if let Some(v) = common.b {
        cfg.b = v;
    }
    if let Some(v) = common.c3 {
        cfg.c3 = v;
    }
    if let Some(v) = &common.branch {
        cfg.set("branch", v)?;
    }
    if let Some(v) = &common.im_sign {
        cfg.set("im-sign", v)?;
    }
    if let Some(v) = &common.alpha_side {
        cfg.set("alpha-side", v)?;
    }
    if let Some(v) = common.alpha0 {
        cfg.alpha0 = Some(v);
    }
    if let Some(v) = common.u_span {
        cfg.u_span = v;
    }
    if let Some(v) = common.h {
        cfg.h = v;
    }
    if let Some(v) = common.delta {
        cfg.delta = v;
    }
    if let Some(v) = common.v_count {
        cfg.v_count = Some(v);
    }
    if let Some(v) = common.v_step {
        cfg.v_step = Some(v);
    }
    if let Some(v) = common.rho_scale {
        cfg.rho_scale = v;
    }
    if let Some(v) = common.margin_frac {
        cfg.margin_frac = v;
    }
    if let Some(v) = &common.out {
        cfg.out = Some(v.clone());
    }
    if let Some(v) = &common.format {
        cfg.set("format", v)?;
    }
    for (name, value) in tols {
        cfg.set(&format!("tol.{name}"), value)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_output(out: &Option<PathBuf>, content: &str) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| Error::Usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            std::io::stdout()
                .write_all(content.as_bytes())
                .map_err(|e| Error::Usage(format!("stdout: {e}")))?;
            Ok(())
        }
    }
}

fn fmt_short(x: f64) -> String {
    let s = format!("{x:.6}");
    let trimmed = s.trim_end_matches('0').trim_end_matches('.');
    trimmed.to_string()
}

fn cmd_interval(c3: Option<f64>, config: Option<PathBuf>) -> Result<(), Error> {
    let mut cfg = RunConfig::load(config.as_deref())?;
    if let Some(v) = c3 {
        cfg.c3 = v;
    }
    let intervals = admissible_intervals(cfg.c3)?;
    for iv in intervals {
        let close = if iv.hi_closed { "]" } else { ")" };
        println!("sin\u{b2}\u{3b1} \u{2208} ({}, {}{}", fmt_short(iv.lo), fmt_short(iv.hi), close);
    }
    Ok(())
}

fn cmd_family(common: CommonOpts, tols: Vec<(String, String)>) -> Result<(), Error> {
    let cfg = build_config(&common, &tols)?;
    let params = cfg.params()?;
    let spec = cfg.run_spec(1);
    let grid = spec.build_grid(&params)?;
    eprintln!(
        "integrated {} u-nodes, stop_reason: {} (forward {}, backward {})",
        grid.n_u(),
        grid.profile.stop_reason.as_str(),
        grid.profile.stop_forward.as_str(),
        grid.profile.stop_backward.as_str()
    );
    let content = match cfg.format {
        OutputFormat::Csv => grid_to_csv(&grid),
        OutputFormat::Json => grid_to_json(&grid),
    };
    write_output(&cfg.out, &content)
}

fn cmd_verify(common: CommonOpts, tols: Vec<(String, String)>) -> Result<bool, Error> {
    let cfg = build_config(&common, &tols)?;
    let base = {
        // negative_control scales rho itself; start from the unperturbed family
        let mut c = cfg.clone();
        c.rho_scale = 1.0;
        c.params()?
    };
    let spec = cfg.run_spec(5);
    let settings = cfg.verify_settings();
    let report = if cfg.rho_scale == 1.0 {
        let grid = spec.build_grid(&base)?;
        run_residual_suite(&grid, spec.h, &settings)?
    } else {
        negative_control(&base, cfg.rho_scale, &spec, &settings)?
    };
    write_output(&cfg.out, &report_to_json(&report))?;
    for e in &report.entries {
        eprintln!(
            "{:18} {:>12.4e} <= {:>12.4e}  {}",
            e.name,
            e.max_abs,
            e.tolerance,
            if e.pass { "pass" } else { "FAIL" }
        );
    }
    eprintln!("verdict: {}", if report.verdict { "pass" } else { "fail" });
    Ok(report.verdict)
}

fn cmd_sweep(
    b: Option<f64>,
    c3_min: f64,
    c3_max: f64,
    steps: usize,
    samples: usize,
    out: Option<PathBuf>,
    config: Option<PathBuf>,
) -> Result<(), Error> {
    let mut cfg = RunConfig::load(config.as_deref())?;
    if let Some(v) = b {
        cfg.b = v;
    }
    if let Some(p) = out {
        cfg.out = Some(p);
    }
    let rows = run_sweep(cfg.b, c3_min, c3_max, steps, samples)?;
    write_output(&cfg.out, &sweep_to_csv(&rows))
}

fn run() -> Result<bool, Error> {
    let (args, tols) = extract_tol_flags(std::env::args().collect())?;
    let cli = Cli::try_parse_from(args).map_err(|e| {
        // clap's own help/version output is not an error
        if e.kind() == clap::error::ErrorKind::DisplayHelp
            || e.kind() == clap::error::ErrorKind::DisplayVersion
        {
            let _ = e.print();
            std::process::exit(0);
        }
        Error::Usage(e.to_string())
    })?;
    match cli.command {
        Command::Interval { c3, config } => {
            cmd_interval(c3, config)?;
            Ok(true)
        }
        Command::Family { common } => {
            cmd_family(common, tols)?;
            Ok(true)
        }
        Command::Verify { common } => cmd_verify(common, tols),
        Command::Sweep {
            b,
            c3_min,
            c3_max,
            steps,
            samples,
            out,
            config,
        } => {
            cmd_sweep(b, c3_min, c3_max, steps, samples, out, config)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
