use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use belnet_labkit::*;
use clap::{Args, Parser, Subcommand};
use serde_json::json;

/// Processing tools for the ionizing-radiation lab works.
#[derive(Parser)]
#[command(name = "belnet-labkit", version)]
struct Cli {
    /// Emit JSON instead of `key: value` lines.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Summarize a spectrum file and optionally count a window.
    SpectrumSummary(SpectrumArgs),
    /// Fit N(d) = N0·exp(−μd) to `thickness counts [sigma]` lines.
    FitAttenuation {
        file: PathBuf,
        /// Declared thickness unit: cm or g/cm2.
        #[arg(long, default_value = "cm")]
        unit: ThicknessUnit,
    },
    /// Activity of a source relative to a reference source.
    RelativeActivity {
        #[arg(long)]
        a_ref: f64,
        #[arg(long, default_value_t = 0.0)]
        a_ref_sigma: f64,
        #[arg(long)]
        n_x: u64,
        #[arg(long)]
        t_x: f64,
        #[arg(long)]
        n_ref: u64,
        #[arg(long)]
        t_ref: f64,
    },
    /// Compare a computed value with a reference; exits 1 on failure.
    Check {
        #[arg(long, allow_negative_numbers = true)]
        given: f64,
        #[arg(long, allow_negative_numbers = true)]
        reference: f64,
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
        #[arg(long, default_value_t = DEFAULT_K_SIGMA)]
        k_sigma: f64,
        #[arg(long, default_value_t = DEFAULT_REL_TOL)]
        rel_tol: f64,
    },
}

#[derive(Args)]
struct SpectrumArgs {
    file: PathBuf,
    #[arg(long)]
    live_time: f64,
    #[arg(long)]
    label: Option<String>,
    /// Inclusive channel window `lo:hi`.
    #[arg(long, conflicts_with = "energy_window")]
    window: Option<String>,
    /// Inclusive energy window `lo:hi` in keV.
    #[arg(long)]
    energy_window: Option<String>,
    #[arg(long, requires = "background_live_time")]
    background: Option<PathBuf>,
    #[arg(long)]
    background_live_time: Option<f64>,
}

fn split_range<T: std::str::FromStr>(s: &str) -> Result<(T, T)> {
    let (lo, hi) = s.split_once(':').context("window must look like lo:hi")?;
    match (lo.trim().parse(), hi.trim().parse()) {
        (Ok(lo), Ok(hi)) => Ok((lo, hi)),
        _ => bail!("window bounds must be numbers: {s:?}"),
    }
}

fn read(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_spectrum(path: &PathBuf, live_time: f64, label: &str) -> Result<Spectrum> {
    parse_spectrum(&read(path)?, live_time, label).with_context(|| format!("parsing {}", path.display()))
}

/// A closed pipe (`| head`) ends output quietly.
fn emit(json_out: bool, value: serde_json::Value, lines: Vec<(&str, String)>) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = if json_out {
        writeln!(out, "{}", serde_json::to_string_pretty(&value).unwrap())
    } else {
        lines.iter().try_for_each(|(k, v)| writeln!(out, "{k}: {v}"))
    };
}

fn spectrum_summary(json_out: bool, args: SpectrumArgs) -> Result<()> {
    let label = args.label.clone().unwrap_or_else(|| args.file.display().to_string());
    let spectrum = load_spectrum(&args.file, args.live_time, &label)?;
    let summary = spectrum.summary();

    let window = match (&args.window, &args.energy_window) {
        (Some(w), _) => {
            let (lo, hi) = split_range(w)?;
            Some(CountWindow::Channel { lo, hi })
        }
        (None, Some(w)) => {
            let (lo, hi) = split_range(w)?;
            Some(CountWindow::Energy { lo, hi })
        }
        (None, None) => None,
    };
    let background = match &args.background {
        Some(path) => Some(load_spectrum(path, args.background_live_time.expect("clap enforces"), "background")?),
        None => None,
    };
    let net = match &window {
        Some(w) => Some(window_counts(&spectrum, w, background.as_ref())?),
        None => None,
    };

    let mut lines = vec![
        ("label", summary.label.clone()),
        ("channels", summary.channel_count.to_string()),
        ("total_counts", summary.total_counts.to_string()),
        ("live_time_s", summary.live_time_s.to_string()),
        ("count_rate_per_s", format!("{:.6}", summary.count_rate_per_s)),
    ];
    if let Some(ch) = summary.peak_channel {
        lines.push(("peak_channel", ch.to_string()));
    }
    if let Some((lo, hi)) = summary.energy_range_kev {
        lines.push(("energy_range_kev", format!("{lo}..{hi}")));
    }
    if let Some(n) = &net {
        lines.push(("window_net_counts", format!("{n:.3}")));
    }
    emit(json_out, json!({ "summary": summary, "window": window, "net_counts": net }), lines);
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::SpectrumSummary(args) => spectrum_summary(cli.json, args)?,
        Command::FitAttenuation { file, unit } => {
            let points =
                parse_attenuation_points(&read(&file)?).with_context(|| format!("parsing {}", file.display()))?;
            let fit = fit_attenuation(&points)?;
            if fit.status == FitStatus::NonPositiveMu {
                eprintln!("warning: fitted μ is not positive; counts do not fall with thickness");
            }
            emit(
                cli.json,
                json!({ "unit": unit, "fit": fit }),
                vec![
                    ("mu", format!("{:.6} per {unit}", fit.mu)),
                    ("n0", format!("{:.3}", fit.n0)),
                    ("half_value_layer", format!("{:.6} {unit}", fit.half_value_layer)),
                    ("residual_rms", format!("{:e}", fit.residual_rms)),
                    ("n_points", fit.n_points.to_string()),
                    ("status", format!("{:?}", fit.status)),
                ],
            );
        }
        Command::RelativeActivity { a_ref, a_ref_sigma, n_x, t_x, n_ref, t_ref } => {
            let a = relative_activity(&ActivityInput {
                a_ref: MeasuredValue::new(a_ref, a_ref_sigma),
                n_x,
                t_x,
                n_ref,
                t_ref,
            })?;
            emit(cli.json, json!({ "activity_bq": a }), vec![("activity_bq", format!("{a:.4}"))]);
        }
        Command::Check { given, reference, sigma, k_sigma, rel_tol } => {
            let out = check_result(given, &MeasuredValue::new(reference, sigma), k_sigma, rel_tol)?;
            emit(
                cli.json,
                serde_json::to_value(&out).unwrap(),
                vec![
                    ("verdict", format!("{:?}", out.verdict).to_lowercase()),
                    ("explanation", out.explanation.clone()),
                ],
            );
            if !out.passed() {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
