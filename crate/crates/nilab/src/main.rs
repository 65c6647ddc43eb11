//! Command-line interface: `regime`, `resonance`, `inflate`, and `verify`
//! subcommands. Results go to stdout as JSON (or CSV for grids); numeric
//! failures are structured JSON on stderr with a nonzero exit code.

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use nilab::config::{parse_rat, ExperimentConfig, NumberOrText};
use nilab::experiment::run_inflation;
use nilab::verify::verify_lemma_suite;
use nilab_core::error::Result;
use nilab_core::norms::Space;
use nilab_core::regimes::{
    certificate_critical, certificate_infinite_loss, certificate_ni, classify_point, region_grid,
    RIndex, RegimePoint, Verdict,
};
use nilab_core::resonance::{resonant_1d, resonant_family};

#[derive(Parser)]
#[command(
    name = "nilab",
    about = "Norm-inflation laboratory for fractional Hartree / cubic NLS data on frequency lattices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a parameter point and construct exponent certificates.
    Regime(RegimeArgs),
    /// Emit a resonant frequency triple as JSON.
    Resonance(ResonanceArgs),
    /// Run an inflation experiment sweep from a JSON config.
    Inflate(InflateArgs),
    /// Run the standalone lemma-oracle suite.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct RegimeArgs {
    #[arg(long)]
    d: u32,
    /// γ, as a float or exact rational "a/b".
    #[arg(long)]
    gamma: String,
    #[arg(long)]
    alpha: String,
    /// FL or MOD.
    #[arg(long, default_value = "FL")]
    space: String,
    /// Lebesgue index p (FL) or q (MOD); "inf" for ∞.
    #[arg(long)]
    index: String,
    #[arg(long, allow_hyphen_values = true)]
    s: String,
    /// Tabulate a grid instead of a single verdict.
    #[arg(long)]
    grid: bool,
    /// α-range "lo:hi:step" for --grid.
    #[arg(long)]
    alpha_range: Option<String>,
    /// s-range "lo:hi:step" for --grid.
    #[arg(long)]
    s_range: Option<String>,
    /// CSV output path for --grid (breakpoints go to stdout as JSON).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ResonanceArgs {
    #[arg(long)]
    d: usize,
    #[arg(long)]
    alpha: f64,
    /// Family angle θ ∈ [0, π/2) for d ≥ 2.
    #[arg(long)]
    theta: Option<f64>,
    /// Interpolation parameter a ∈ [0,1] for d = 1.
    #[arg(long)]
    a_param: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    n: f64,
    /// Mirror sign of the planar family: +1 or -1.
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    sign: i8,
}

#[derive(Args)]
struct InflateArgs {
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Override the CSV output path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the sweep, comma separated.
    #[arg(long)]
    sweep: Option<String>,
    /// Override the truncation order K.
    #[arg(long)]
    k: Option<u32>,
    /// Override the time-node count.
    #[arg(long)]
    nt: Option<usize>,
    /// Override the deterministic seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

fn parse_range(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(nilab_core::error::Error::Config(format!(
            "range must be lo:hi:step, got '{text}'"
        )));
    }
    let lo: f64 = parts[0].parse().map_err(|_| bad_range(text))?;
    let hi: f64 = parts[1].parse().map_err(|_| bad_range(text))?;
    let step: f64 = parts[2].parse().map_err(|_| bad_range(text))?;
    if step <= 0.0 || hi < lo {
        return Err(bad_range(text));
    }
    let mut out = Vec::new();
    let mut x = lo;
    while x <= hi + 1e-12 {
        out.push(x);
        x += step;
    }
    Ok(out)
}

fn bad_range(text: &str) -> nilab_core::error::Error {
    nilab_core::error::Error::Config(format!("bad range '{text}'"))
}

fn parse_space(text: &str) -> Result<Space> {
    match text.to_ascii_uppercase().as_str() {
        "FL" => Ok(Space::FourierLebesgue),
        "MOD" => Ok(Space::Modulation),
        other => Err(nilab_core::error::Error::Config(format!(
            "space must be FL or MOD, got '{other}'"
        ))),
    }
}

fn run_regime(args: &RegimeArgs) -> Result<()> {
    let space = parse_space(&args.space)?;
    let index = NumberOrText::Text(args.index.clone()).as_index()?;
    if args.grid {
        let alphas = parse_range(args.alpha_range.as_deref().unwrap_or("0.25:5:0.25"))?;
        let ss = parse_range(args.s_range.as_deref().unwrap_or("-2:0.5:0.125"))?;
        let idx_exp = match &index {
            RIndex::Finite(p) => nilab_core::norms::Exponent::Finite(p.to_f64()),
            RIndex::Infinity => nilab_core::norms::Exponent::Infinity,
        };
        let grid = region_grid(
            args.d,
            parse_rat(&args.gamma)?.to_f64(),
            space,
            idx_exp,
            &alphas,
            &ss,
        )?;
        let mut csv = String::from("alpha,s,verdict,theorem,cert\n");
        for row in &grid.rows {
            let verdict = match row.verdict {
                Verdict::NormInflation => "NI",
                Verdict::NormInflationInfiniteLoss => "NI_infinite_loss",
                Verdict::OutsideKnownRegion => "outside_known_region",
            };
            csv.push_str(&format!(
                "{},{},{},{},{}\n",
                row.alpha, row.s, verdict, row.theorem, row.cert
            ));
        }
        match &args.out {
            Some(path) => std::fs::write(path, &csv)?,
            None => print!("{csv}"),
        }
        println!("{}", serde_json::to_string_pretty(&grid.breakpoints).unwrap());
        return Ok(());
    }
    let pt = RegimePoint::new_rational(
        args.d,
        parse_rat(&args.gamma)?,
        parse_rat(&args.alpha)?,
        space,
        index,
        parse_rat(&args.s)?,
    )?;
    let cls = classify_point(&pt);
    let cert = certificate_ni(&pt)
        .or_else(|_| certificate_critical(&pt))
        .or_else(|_| certificate_infinite_loss(&pt))
        .ok();
    let verdict = match cls.verdict {
        Verdict::NormInflation => "NI",
        Verdict::NormInflationInfiniteLoss => "NI_infinite_loss",
        Verdict::OutsideKnownRegion => "outside_known_region",
    };
    let payload = serde_json::json!({
        "point": &pt,
        "verdict": verdict,
        "theorem": cls.theorem,
        "threshold": cls.threshold,
        "schemes": cls.schemes,
        "near_boundary": cls.near_boundary,
        "certificate": cert,
    });
    println!("{}", serde_json::to_string_pretty(&payload).unwrap());
    Ok(())
}

fn run_resonance(args: &ResonanceArgs) -> Result<()> {
    let triple = if args.d >= 2 {
        let theta = args.theta.unwrap_or(std::f64::consts::FRAC_PI_4);
        let t = resonant_family(args.d, args.alpha, theta, args.sign)?;
        t.scaled(args.n)
    } else {
        let a = args.a_param.ok_or_else(|| {
            nilab_core::error::Error::Config("d = 1 needs --a-param".into())
        })?;
        resonant_1d(args.alpha, a, args.n)?
    };
    let payload = serde_json::json!({
        "alpha": triple.alpha,
        "theta": triple.theta,
        "v1": triple.v1,
        "v2": triple.v2,
        "v3": triple.v3,
        "margin": triple.margin(),
        "residual": triple.residual,
        "degenerate": triple.degenerate,
    });
    println!("{}", serde_json::to_string_pretty(&payload).unwrap());
    Ok(())
}

fn run_inflate(args: &InflateArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.config)?;
    let mut cfg = ExperimentConfig::from_json(&text)?;
    if let Some(out) = &args.out {
        cfg.out = Some(out.clone());
    }
    if let Some(sweep) = &args.sweep {
        cfg.sweep = sweep
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| nilab_core::error::Error::Config(format!("bad sweep: {e}")))?;
    }
    if let Some(k) = args.k {
        cfg.k_truncation = k;
    }
    if let Some(nt) = args.nt {
        cfg.nt = nt;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    let summary = run_inflation(&cfg)?;
    if cfg.out.is_none() {
        print!("{}", summary.csv);
    }
    println!("{}", serde_json::to_string_pretty(&summary).unwrap());
    Ok(())
}

fn run_verify(args: &VerifyArgs) -> Result<bool> {
    let report = verify_lemma_suite(args.seed)?;
    print!("{report}");
    Ok(report.all_passed())
}

fn main() -> ExitCode {
    nilab::init_thread_pool();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Regime(a) => run_regime(a).map(|_| true),
        Command::Resonance(a) => run_resonance(a).map(|_| true),
        Command::Inflate(a) => run_inflate(a).map(|_| true),
        Command::Verify(a) => run_verify(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            let payload = serde_json::json!({
                "error": format!("{e}"),
                "kind": error_kind(&e),
            });
            eprintln!("{payload}");
            ExitCode::FAILURE
        }
    }
}

fn error_kind(e: &nilab_core::error::Error) -> &'static str {
    use nilab_core::error::Error::*;
    match e {
        Config(_) => "configuration",
        Range(_) => "range",
        Domain(_) => "domain",
        OracleBudget { .. } => "oracle_budget",
        NotContractive { .. } => "not_contractive",
        ConeCheck { .. } => "cone_check",
        NonResonant { .. } => "non_resonant",
        Degenerate(_) => "degenerate",
        EmptyResonantSet { .. } => "empty_resonant_set",
        Infeasible(_) => "infeasible",
        Io(_) => "io",
    }
}
