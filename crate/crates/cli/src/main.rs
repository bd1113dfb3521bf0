use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use pstep::algorithm::run;
use pstep::models::{builtin, BoxRegion, ModelOptions, ModelSpec};
use pstep::sim::config::parse_run_file;
use pstep::sim::harness::{comparison_csv, write_outputs, SimOutcome};
use pstep::sim::reference::{reference_card, ReferenceCard, ReferenceOptions};
use pstep::sim::{compare, simulate, Emit, SimConfig, SimError, SimSummary};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "pstep",
    version,
    about = "Adaptive D-optimal designs for nonlinear regression"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Locally D-optimal design and reference quantities at a parameter value.
    Design(DesignArgs),
    /// Run one adaptive path and emit its record.
    Run(RunArgs),
    /// Monte Carlo run over many paths.
    Simulate(SimArgs),
    /// Compare two simulations on matching sample sizes.
    Compare(CompareArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
    Svg,
}

#[derive(Args)]
struct DesignArgs {
    /// Model name, e.g. logit, michaelis_menten, poisson2.
    #[arg(long)]
    model: String,
    /// Parameter value, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    theta: String,
    /// Design region as lower,upper per axis, e.g. -4,4 or 0,3,0,3.
    #[arg(long, allow_hyphen_values = true)]
    xbox: String,
    /// Parameter box as lower,upper per axis. Defaults to a small box around theta.
    #[arg(long, allow_hyphen_values = true)]
    theta_box: Option<String>,
    /// Skewed-logit exponent.
    #[arg(long)]
    m: Option<f64>,
    /// Degree of the linear model.
    #[arg(long)]
    degree: Option<usize>,
    /// Print the Kiefer–Wolfowitz check in detail.
    #[arg(long)]
    verify_kw: bool,
    /// Grid points per axis for the sensitivity scan.
    #[arg(long)]
    grid_n: Option<usize>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Write reference_card.json here instead of printing.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    steps: Option<usize>,
    /// Grid points for the Wynn sensitivity scan.
    #[arg(long)]
    grid_n: Option<usize>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Write path_record.json here instead of printing.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct SimOverrides {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    /// Grid points per axis for the reference check and the Wynn scan.
    #[arg(long)]
    grid_n: Option<usize>,
    /// Worker threads (default: PSTEP_WORKERS or all cores).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct SimArgs {
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    overrides: SimOverrides,
    /// Artifacts to write; repeatable. Defaults to the config's `emit`.
    #[arg(long, value_enum)]
    format: Vec<Format>,
    /// Output directory. Without one the summary is printed.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write every path record.
    #[arg(long)]
    keep_paths: bool,
}

#[derive(Args)]
struct CompareArgs {
    /// Simulation summary or simulation config.
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    #[command(flatten)]
    overrides: SimOverrides,
    #[arg(long, value_enum)]
    format: Vec<Format>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure classes mapped onto exit codes.
#[derive(Debug)]
enum Failure {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        if e.is_config() {
            Failure::Config(e.into())
        } else {
            Failure::Runtime(e.into())
        }
    }
}

fn config<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Config(e.into())
}

fn runtime<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Runtime(e.into())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Design(a) => cmd_design(a),
        Command::Run(a) => cmd_run(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Compare(a) => cmd_compare(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn parse_list(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .with_context(|| format!("{what}: `{t}` is not a number"))
        })
        .collect()
}

/// `lo1,hi1,lo2,hi2,...` into a box.
fn parse_box(s: &str, what: &str) -> Result<BoxRegion> {
    let v = parse_list(s, what)?;
    if v.is_empty() || v.len() % 2 != 0 {
        bail!(
            "{what}: expected lower,upper pairs, got {} numbers",
            v.len()
        );
    }
    let lower = v.iter().step_by(2).copied().collect();
    let upper = v.iter().skip(1).step_by(2).copied().collect();
    BoxRegion::new(lower, upper).with_context(|| format!("{what}: invalid box"))
}

/// A box around `theta` that respects each family's sign constraints.
fn default_theta_box(name: &str, theta: &[f64]) -> Result<BoxRegion> {
    let mut lower = Vec::with_capacity(theta.len());
    let mut upper = Vec::with_capacity(theta.len());
    for (j, &t) in theta.iter().enumerate() {
        let d = 0.5 * t.abs().max(1.0);
        let (mut lo, mut hi) = (t - d, t + d);
        match name {
            "michaelis_menten" | "exp_decay" | "exp_decay1" => lo = 0.5 * t,
            "poisson2" if j > 0 => hi = hi.min(0.0),
            _ => {}
        }
        if hi <= lo {
            hi = lo + d;
        }
        lower.push(lo);
        upper.push(hi);
    }
    Ok(BoxRegion::new(lower, upper)?)
}

fn build_model(a: &DesignArgs, theta: &[f64]) -> Result<ModelSpec> {
    let x_box = parse_box(&a.xbox, "--xbox")?;
    let theta_box = match &a.theta_box {
        Some(s) => parse_box(s, "--theta-box")?,
        None => default_theta_box(&a.model, theta)?,
    };
    let opts = ModelOptions {
        m: a.m,
        degree: a.degree,
    };
    Ok(builtin(&a.model, theta_box, x_box, &opts)?)
}

fn fmt_vec(v: &[f64]) -> String {
    v.iter()
        .map(|x| format!("{x:.6}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn card_text(card: &ReferenceCard, verify_kw: bool) -> String {
    let mut s = String::new();
    let mut line = |k: &str, v: String| s.push_str(&format!("{k:<14}{v}\n"));
    line("model", card.model.name.clone());
    line("theta", fmt_vec(&card.theta));
    let pts: Vec<String> = card
        .design
        .points()
        .iter()
        .map(|p| {
            if p.0.len() == 1 {
                format!("{:.6}", p.0[0])
            } else {
                format!("({})", fmt_vec(&p.0))
            }
        })
        .collect();
    line("support", pts.join(", "));
    line("weights", fmt_vec(card.design.weights()));
    if !card.sd_star {
        let sat: Vec<String> = card
            .saturated
            .points
            .points()
            .iter()
            .map(|p| format!("({})", fmt_vec(&p.0)))
            .collect();
        line("saturated", sat.join(", "));
    }
    let method = serde_json::to_value(card.saturated.method).expect("enum serializes");
    let case = card
        .saturated
        .case
        .as_deref()
        .map(|c| format!(", case {c}"))
        .unwrap_or_default();
    line(
        "method",
        format!("{}{case}", method.as_str().unwrap_or("?")),
    );
    for (i, r) in card.m_star.iter().enumerate() {
        line(if i == 0 { "M*" } else { "" }, fmt_vec(r));
    }
    for (i, r) in card.m_star_inv.iter().enumerate() {
        line(if i == 0 { "M*^-1" } else { "" }, fmt_vec(r));
    }
    line("det M*", format!("{:.10e}", card.det_star));
    line("det saturated", format!("{:.10e}", card.det_saturated));
    line("SD", card.sd.map_or("unknown".into(), |b| b.to_string()));
    line("SD*", card.sd_star.to_string());
    if verify_kw {
        line(
            "max sens.",
            format!(
                "{:.8} (bound {}, {} points per axis)",
                card.kw.max_sensitivity,
                card.m_star.len(),
                card.kw_grid_n
            ),
        );
        line("argmax", fmt_vec(&card.kw.argmax.0));
    }
    for n in &card.notes {
        line("note", n.clone());
    }
    s
}

fn write_file(dir: &Path, name: &str, text: &str) -> Result<PathBuf, Failure> {
    fs::create_dir_all(dir)
        .with_context(|| format!("creating {}", dir.display()))
        .map_err(runtime)?;
    let path = dir.join(name);
    fs::write(&path, text)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(runtime)?;
    Ok(path)
}

fn cmd_design(a: DesignArgs) -> Result<(), Failure> {
    let theta = parse_list(&a.theta, "--theta").map_err(config)?;
    let model = build_model(&a, &theta).map_err(config)?;
    if !matches!(a.format, Format::Text | Format::Json) {
        return Err(config(anyhow!("design supports --format text or json")));
    }
    let opts = ReferenceOptions {
        grid_n: a.grid_n,
        ..Default::default()
    };
    let card = reference_card(&model, &theta, &opts).map_err(|e| match e {
        SimError::Model(_) => config(e),
        other => runtime(other),
    })?;
    let json = serde_json::to_string_pretty(&card).expect("cards serialize");
    match (&a.out, a.format) {
        (Some(dir), _) => {
            let p = write_file(dir, "reference_card.json", &json)?;
            eprintln!("wrote {}", p.display());
            if a.format == Format::Text {
                print!("{}", card_text(&card, a.verify_kw));
            }
        }
        (None, Format::Json) => println!("{json}"),
        (None, _) => print!("{}", card_text(&card, a.verify_kw)),
    }
    Ok(())
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(config)
}

fn cmd_run(a: RunArgs) -> Result<(), Failure> {
    if a.format != Format::Json {
        return Err(config(anyhow!("run emits JSON only")));
    }
    let (mut cfg, algorithm) = parse_run_file(&read(&a.config)?)
        .map_err(Failure::from)
        .map_err(|f| with_file(f, &a.config))?;
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(k) = a.steps {
        cfg.steps = k;
    }
    if let Some(g) = a.grid_n {
        cfg.wynn_grid_n = g;
    }
    cfg.validate().map_err(config)?;
    let rec = run(&cfg, algorithm).map_err(runtime)?;
    let json = rec.to_json();
    match &a.out {
        Some(dir) => {
            let p = write_file(dir, "path_record.json", &json)?;
            eprintln!("wrote {}", p.display());
        }
        None => println!("{json}"),
    }
    if let Some(reason) = &rec.aborted {
        return Err(runtime(anyhow!("path aborted: {reason}")));
    }
    Ok(())
}

fn with_file(f: Failure, path: &Path) -> Failure {
    match f {
        Failure::Config(e) => Failure::Config(e.context(format!("in {}", path.display()))),
        Failure::Runtime(e) => Failure::Runtime(e.context(format!("in {}", path.display()))),
    }
}

fn load_sim(path: &Path, o: &SimOverrides) -> Result<SimConfig, Failure> {
    let mut cfg = SimConfig::from_json(&read(path)?)
        .map_err(Failure::from)
        .map_err(|f| with_file(f, path))?;
    if let Some(s) = o.seed {
        cfg.seed = s;
    }
    if let Some(r) = o.paths {
        cfg.paths = r;
    }
    if let Some(k) = o.steps {
        cfg.set_steps(k);
    }
    if let Some(g) = o.grid_n {
        cfg.reference_grid_n = Some(g);
        cfg.run.wynn_grid_n = g;
    }
    if o.workers.is_some() {
        cfg.workers = o.workers;
    }
    cfg.validate().map_err(Failure::from)?;
    Ok(cfg)
}

fn emits(formats: &[Format], default: &[Emit]) -> Result<Vec<Emit>, Failure> {
    if formats.is_empty() {
        return Ok(default.to_vec());
    }
    formats
        .iter()
        .map(|f| match f {
            Format::Csv => Ok(Emit::Csv),
            Format::Json => Ok(Emit::Json),
            Format::Svg => Ok(Emit::Svg),
            Format::Text => Err(config(anyhow!(
                "--format text is only available for design"
            ))),
        })
        .collect()
}

fn cmd_simulate(a: SimArgs) -> Result<(), Failure> {
    let mut cfg = load_sim(&a.config, &a.overrides)?;
    if a.keep_paths {
        cfg.keep_paths = true;
    }
    let emit = emits(&a.format, &cfg.emit)?;
    let out = a.out.clone().or_else(|| cfg.out.clone());
    let outcome = simulate(&cfg)?;
    report_aborts(&outcome);
    match out {
        Some(dir) => {
            let written = write_outputs(&outcome, &emit, &dir)?;
            let (records, files): (Vec<_>, Vec<_>) = written
                .iter()
                .partition(|p| p.starts_with(dir.join("paths")));
            for p in files {
                eprintln!("wrote {}", p.display());
            }
            if !records.is_empty() {
                eprintln!(
                    "wrote {} path records to {}",
                    records.len(),
                    dir.join("paths").display()
                );
            }
        }
        None => println!("{}", outcome.summary.to_json()),
    }
    Ok(())
}

fn report_aborts(o: &SimOutcome) {
    let s = &o.summary;
    if !s.aborted.is_empty() {
        eprintln!(
            "{} of {} paths aborted and were excluded",
            s.aborted.len(),
            s.paths
        );
    }
    eprintln!(
        "{} paths in {:.2} s on {} workers",
        s.paths, o.wall_clock_seconds, o.workers
    );
}

/// A summary file is used as is; a config file is simulated first.
fn summary_from(path: &Path, o: &SimOverrides) -> Result<(SimSummary, Option<f64>), Failure> {
    let text = read(path)?;
    let v: serde_json::Value = serde_json::from_str(&text)
        .with_context(|| format!("{} is not valid JSON", path.display()))
        .map_err(config)?;
    if v.get("kind").and_then(|k| k.as_str()) == Some("sim_summary") {
        let s = SimSummary::from_json(&text)
            .map_err(Failure::from)
            .map_err(|f| with_file(f, path))?;
        return Ok((s, None));
    }
    let cfg = load_sim(path, o)?;
    let outcome = simulate(&cfg)?;
    report_aborts(&outcome);
    Ok((outcome.summary, Some(outcome.wall_clock_seconds)))
}

fn cmd_compare(a: CompareArgs) -> Result<(), Failure> {
    let emit = emits(&a.format, &[Emit::Json, Emit::Csv])?;
    let (sa, ta) = summary_from(&a.a, &a.overrides)?;
    let (sb, tb) = summary_from(&a.b, &a.overrides)?;
    let mut report = compare(&sa, &sb)?;
    if let (Some(x), Some(y)) = (ta, tb) {
        report.wall_clock_seconds = Some([x, y]);
    }
    let json = serde_json::to_string_pretty(&report).expect("reports serialize");
    match &a.out {
        Some(dir) => {
            if emit.contains(&Emit::Json) {
                eprintln!(
                    "wrote {}",
                    write_file(dir, "comparison.json", &json)?.display()
                );
            }
            if emit.contains(&Emit::Csv) {
                let csv = comparison_csv(&report)?;
                eprintln!(
                    "wrote {}",
                    write_file(dir, "comparison.csv", &csv)?.display()
                );
            }
        }
        None => println!("{json}"),
    }
    if let Some(row) = report.rows.last() {
        eprintln!(
            "n = {}: median efficiency {:.4} vs {:.4}, KS distance {:.4}",
            row.n, row.efficiency_a.median, row.efficiency_b.median, row.efficiency_ks
        );
    }
    Ok(())
}
