use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qmem::mux::{parse_schedule, plan_conversion, Schedule};
use qmem::scenarios::{is_scenario, run_scenario, MetricValue, Report, ScenarioConfig, SCENARIOS};

const EXIT_VALIDATION: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(name = "qmem", version, about = "Multiplexed AFC quantum-memory simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write report.json plus artifacts.
    Run {
        /// Scenario name; falls back to `scenario` in the config file.
        scenario: Option<String>,
        /// TOML configuration file.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory [default: qmem-out/<scenario>].
        #[arg(long)]
        out: Option<PathBuf>,
        /// Conversion schedule file (fig4 only).
        #[arg(long)]
        schedule: Option<PathBuf>,
    },
    /// List the available scenarios.
    List {
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Parse and plan a conversion schedule without running it.
    Validate {
        schedule: PathBuf,
        /// Take timing parameters from this config.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn new(code: u8, msg: impl Into<String>) -> Self {
        Self { code, msg: msg.into() }
    }
}

impl From<qmem::Error> for Failure {
    fn from(e: qmem::Error) -> Self {
        Self::new(EXIT_VALIDATION, e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))
}

fn load_config(path: Option<&Path>) -> Result<ScenarioConfig, Failure> {
    let Some(path) = path else { return Ok(ScenarioConfig::default()) };
    let text = read(path)?;
    toml::from_str(&text).map_err(|e| Failure::new(EXIT_VALIDATION, format!("{}: {e}", path.display())))
}

fn load_schedule(path: &Path) -> Result<Schedule, Failure> {
    let text = read(path)?;
    parse_schedule(&text).map_err(|e| Failure::new(EXIT_VALIDATION, format!("{}: {e}", path.display())))
}

fn value_text(v: &MetricValue) -> String {
    match v {
        MetricValue::Number(x) => format!("{x:.4}"),
        MetricValue::Count(n) => n.to_string(),
        MetricValue::Flag(b) => b.to_string(),
        MetricValue::Text(s) => s.clone(),
    }
}

fn print_summary(report: &Report) {
    println!("{} (seed {})", report.scenario, report.seed);
    for m in &report.metrics {
        let mut line = format!("  {:<32} {}", m.name, value_text(&m.value));
        if let Some(u) = m.uncertainty {
            line += &format!(" ± {u:.4}");
        }
        if let Some(t) = m.target {
            line += &format!("  (target {t}");
            if let Some(tu) = m.target_uncertainty {
                line += &format!(" ± {tu}");
            }
            line += ")";
        } else if let Some([lo, hi]) = m.target_range {
            line += &format!("  (target {lo}..{hi})");
        }
        println!("{line}");
    }
}

fn run(
    scenario: Option<String>,
    config: Option<PathBuf>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    schedule: Option<PathBuf>,
) -> Result<(), Failure> {
    let mut cfg = load_config(config.as_deref())?;
    if let (Some(cfg_path), Some(rel)) = (&config, &cfg.schedule) {
        cfg.schedule = Some(cfg_path.parent().unwrap_or(Path::new(".")).join(rel));
    }
    let name = scenario
        .or_else(|| cfg.scenario.clone())
        .ok_or_else(|| Failure::new(EXIT_USAGE, "no scenario given (see `qmem list`)"))?;
    if !is_scenario(&name) {
        return Err(Failure::new(EXIT_USAGE, format!("unknown scenario '{name}' (see `qmem list`)")));
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let schedule = match schedule.or_else(|| cfg.schedule.clone()) {
        Some(path) => Some(load_schedule(&path)?),
        None => None,
    };
    let report = run_scenario(&name, &cfg, schedule.as_ref())?;

    let dir = out.unwrap_or_else(|| PathBuf::from("qmem-out").join(&name));
    fs::create_dir_all(&dir).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", dir.display())))?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| Failure::new(EXIT_IO, e.to_string()))?;
    write(&dir.join("report.json"), &(json + "\n"))?;
    for a in &report.artifacts {
        write(&dir.join(&a.name), &a.contents)?;
    }
    print_summary(&report);
    println!("wrote {}", dir.display());
    Ok(())
}

fn list(format: Format) -> Result<(), Failure> {
    match format {
        Format::Text => {
            for (name, about) in SCENARIOS {
                println!("{name:<10} {about}");
            }
        }
        Format::Json => {
            let items: Vec<_> =
                SCENARIOS.iter().map(|(n, d)| serde_json::json!({ "name": n, "description": d })).collect();
            let json = serde_json::to_string_pretty(&items).map_err(|e| Failure::new(EXIT_IO, e.to_string()))?;
            println!("{json}");
        }
    }
    Ok(())
}

fn validate(schedule: PathBuf, config: Option<PathBuf>) -> Result<(), Failure> {
    let cfg = load_config(config.as_deref())?;
    let s = load_schedule(&schedule)?;
    if s.is_empty() {
        eprintln!("warning: {}: no channels", schedule.display());
        return Ok(());
    }
    let plan = plan_conversion(&s, &cfg.timing).map_err(|e| Failure::new(EXIT_VALIDATION, format!("{}: {e}", schedule.display())))?;
    print!("{}", plan.summary());
    println!("ok: {} channels, {} outputs", plan.channels.len(), plan.output_count());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { scenario, config, seed, out, schedule } => run(scenario, config, seed, out, schedule),
        Command::List { format } => list(format),
        Command::Validate { schedule, config } => validate(schedule, config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
