//! `jetx`: check, extend and verify 1-jets from the command line.
//!
//! Exit status is 0 on success, 1 on any error or failed verification and 2
//! when the jet admits no extension.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use jetx::envelope::NOT_EXTENDABLE_ABOVE;
use jetx::format::{fmt17, to_json_17};
use jetx::jet::{
    check_equivalences, check_mg, check_w, check_wells_w11, compute_a, m_omega_g, BISECTION_LO,
};
use jetx::verify::{golden_example_holder_half, verify_extension, VerificationReport};
use jetx::{extend, CheckReport, ExtendConfig, ExtensionResult, Jet, Modulus, SearchBox, Variant};
use serde::Serialize;

use config::{build_grid, load_jet, parse_modulus};

#[derive(Parser)]
#[command(
    name = "jetx",
    version,
    about = "C^{1,ω} extension of 1-jets on finite sets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Whitney-type conditions, A(f, G), M_ω(G) and their equivalences.
    Check(Common),
    /// Build an extension and write the grid CSV and diagnostics.
    Extend(Common),
    /// Build an extension and verify the bounds it must satisfy.
    Verify(Common),
    /// Table of ω, ω⁻¹, φ and φ* for a modulus.
    Conjugate(ConjugateArgs),
    /// The worked example f(x) = (2/3)|x|^{3/2} with ω(t) = t^{1/2}.
    Golden(GoldenArgs),
}

#[derive(Args)]
struct Common {
    /// Jet JSON file.
    #[arg(long)]
    jet: PathBuf,
    /// Modulus as JSON, e.g. '{"kind":"holder","alpha":0.5}'.
    #[arg(long, default_value = r#"{"kind":"holder","alpha":0.5}"#)]
    modulus: String,
    /// Constant M; defaults to A(f, G).
    #[arg(long = "M")]
    big_m: Option<f64>,
    #[arg(long, default_value = "general")]
    variant: Variant,
    /// Exponent of the lp variant.
    #[arg(long)]
    p: Option<f64>,
    /// Grid box "lo,hi;lo,hi;..."; defaults to the bounding box of E widened
    /// by its diameter on every side.
    #[arg(long = "box")]
    bx: Option<String>,
    /// Nodes per axis, "k" or "k,k,...".
    #[arg(long)]
    res: Option<String>,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for output files; reports also go to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConjugateArgs {
    #[arg(long, default_value = r#"{"kind":"holder","alpha":0.5}"#)]
    modulus: String,
    /// Largest t in the table.
    #[arg(long, default_value_t = 4.0)]
    t_max: f64,
    /// Rows in the table.
    #[arg(long, default_value_t = 257)]
    rows: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GoldenArgs {
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct CheckOutput {
    #[serde(rename = "M")]
    big_m: f64,
    #[serde(rename = "A")]
    a: CheckReport,
    #[serde(rename = "M_omega_G")]
    m_omega_g: CheckReport,
    #[serde(rename = "W")]
    w: CheckReport,
    mg: CheckReport,
    #[serde(rename = "W11", skip_serializing_if = "Option::is_none")]
    w11: Option<CheckReport>,
    equivalences: CheckReport,
}

#[derive(Serialize)]
struct Refusal<'a> {
    status: &'a str,
    reason: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match &cli.command {
        Command::Check(c) | Command::Extend(c) | Command::Verify(c) => c.out.clone(),
        Command::Conjugate(c) => c.out.clone(),
        Command::Golden(c) => c.out.clone(),
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            if let Some(jetx::Error::NotExtendable(reason)) = e.downcast_ref::<jetx::Error>() {
                let refusal = Refusal {
                    status: "not_extendable",
                    reason: reason.clone(),
                };
                if let Ok(text) = to_json_17(&refusal) {
                    print!("{text}");
                    if let Some(dir) = &out {
                        let _ = write_file(dir, "report.json", &text);
                    }
                }
                eprintln!("jetx: {e}");
                return ExitCode::from(2);
            }
            eprintln!("jetx: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    set_threads()?;
    match cli.command {
        Command::Check(c) => check(&c),
        Command::Extend(c) => {
            let (jet, m, ext) = build(&c)?;
            let rep = verify_extension(&jet, &m, &ext, c.samples, c.seed)?;
            let mut diag = ext.diagnostics();
            diag.sampled = rep.details.clone();
            let text = to_json_17(&diag)?;
            print!("{text}");
            match &c.out {
                Some(dir) => {
                    write_file(dir, "diagnostics.json", &text)?;
                    write_csv(dir, &ext)?;
                }
                None => eprintln!("jetx: no --out given, grid not written"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify(c) => {
            let (jet, m, ext) = build(&c)?;
            let rep = verify_extension(&jet, &m, &ext, c.samples, c.seed)?;
            report(&rep, c.out.as_deref(), "verification.json")
        }
        Command::Conjugate(c) => conjugate(&c),
        Command::Golden(c) => {
            let rep = golden_example_holder_half()?;
            report(&rep, c.out.as_deref(), "golden.json")
        }
    }
}

fn set_threads() -> Result<()> {
    if let Ok(v) = std::env::var("JETX_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .with_context(|| format!("JETX_THREADS={v:?} is not a count"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("cannot configure the worker pool")?;
    }
    Ok(())
}

fn check(c: &Common) -> Result<ExitCode> {
    let jet = load_jet(&c.jet)?;
    let m = parse_modulus(&c.modulus)?;
    let search = SearchBox::default();
    let a = compute_a(&jet, &m, &search)?;
    if !a.constant.is_finite() || a.constant > NOT_EXTENDABLE_ABOVE {
        return Err(jetx::Error::NotExtendable(format!(
            "A(f, G) = {} exceeds {}",
            fmt17(a.constant),
            fmt17(NOT_EXTENDABLE_ABOVE)
        ))
        .into());
    }
    // the conditions divide by M; an affine jet has A = 0
    let big_m = c.big_m.unwrap_or(a.constant.max(BISECTION_LO));
    let w11 = match m.linear_slope() {
        Some(slope) => Some(check_wells_w11(&jet, big_m * slope)?),
        None => None,
    };
    let output = CheckOutput {
        big_m,
        m_omega_g: m_omega_g(&jet, &m)?,
        w: check_w(&jet, &m, big_m)?,
        mg: check_mg(&jet, &m, big_m, &search)?,
        w11,
        equivalences: check_equivalences(&jet, &m, &search)?,
        a,
    };
    let text = to_json_17(&output)?;
    print!("{text}");
    if let Some(dir) = &c.out {
        write_file(dir, "check.json", &text)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn build(c: &Common) -> Result<(Jet, Modulus, ExtensionResult)> {
    let jet = load_jet(&c.jet)?;
    let m = parse_modulus(&c.modulus)?;
    let grid = build_grid(&jet, c.bx.as_deref(), c.res.as_deref())?;
    let mut cfg = ExtendConfig::new(grid);
    cfg.big_m = c.big_m;
    cfg.p = c.p;
    cfg.seed = c.seed;
    let ext = extend(&jet, &m, c.variant, &cfg)?;
    for w in &ext.warnings {
        eprintln!("jetx: warning: {w}");
    }
    Ok((jet, m, ext))
}

fn report(rep: &VerificationReport, out: Option<&Path>, name: &str) -> Result<ExitCode> {
    let text = to_json_17(rep)?;
    print!("{text}");
    if let Some(dir) = out {
        write_file(dir, name, &text)?;
    }
    if rep.passed() {
        Ok(ExitCode::SUCCESS)
    } else {
        for f in rep.failures() {
            eprintln!(
                "jetx: check {} failed: observed {} against {}",
                f.name,
                fmt17(f.value_observed),
                fmt17(f.bound_claimed)
            );
        }
        Ok(ExitCode::from(1))
    }
}

fn conjugate(c: &ConjugateArgs) -> Result<ExitCode> {
    let m = parse_modulus(&c.modulus)?;
    if !(c.t_max > 0.0 && c.t_max.is_finite()) || c.rows < 2 {
        anyhow::bail!("need t-max > 0 and at least two rows");
    }
    let mut text = String::from("t,omega,omega_inv,phi,phi_star\n");
    for k in 0..c.rows {
        let t = c.t_max * k as f64 / (c.rows - 1) as f64;
        let row = [t, m.omega(t), m.omega_inv(t), m.phi(t), m.phi_star(t)];
        let cells: Vec<String> = row.iter().map(|&v| fmt17(v)).collect();
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    match &c.out {
        Some(dir) => write_file(dir, "conjugate.csv", &text)?,
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn write_file(dir: &Path, name: &str, text: &str) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn write_csv(dir: &Path, ext: &ExtensionResult) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let path = dir.join("extension.csv");
    let file =
        std::fs::File::create(&path).with_context(|| format!("cannot write {}", path.display()))?;
    let mut w = std::io::BufWriter::new(file);
    ext.extension
        .write_csv(&ext.gradient, &mut w)
        .with_context(|| format!("cannot write {}", path.display()))?;
    use std::io::Write;
    w.flush()?;
    Ok(())
}
