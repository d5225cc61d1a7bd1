//! `fgql`: fit, simulate, and study adaptive fused group LASSO quantile
//! regression models from the command line.
//!
//! Subcommands:
//!
//! * `fit` — fit one dataset: pilot fit, adaptive weights, penalized fit,
//!   JSON report. Exit code 0 on a converged fit, 2 when the iteration
//!   budget ran out (the report is still written, flagged), 1 on any error.
//! * `simulate` — generate a dataset from a scenario config, with a truth
//!   sidecar and a group-spec sidecar.
//! * `study` — run a selection / normality / rate Monte Carlo study.
//! * `validate-schedule` — check a tuning schedule against the regime's
//!   admissibility conditions.
//!
//! Config files are flat `key=value` text mirroring the flags; flags win on
//! conflict. `FGQL_THREADS` caps study parallelism.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use fgql::design::{FitConfig, SolverControls};
use fgql::io::{
    design_from_table, direction_from_config, parse_config, parse_csv_bytes,
    parse_group_spec, parse_inline_groups, scenario_from_config, schedule_from_config,
    study_kind_from_config, sweep_from_config, to_json_string, ConfigMap, FitDocument,
    RunManifest, ScheduleDocument, StudyDocument, TruthDocument, SCHEMA_VERSION,
};
use fgql::schedule::validate_schedule;
use fgql::sim::{run_normality_study, run_rate_study, run_selection_study, StudyKind};
use fgql::weights::{compute_weights, DEFAULT_WEIGHT_CAP};
use fgql::{fit, pilot_fit, Error};

#[derive(Parser)]
#[command(name = "fgql", version, about = "Adaptive fused group LASSO quantile regression")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model to a CSV dataset.
    Fit(FitArgs),
    /// Generate a dataset from a scenario config.
    Simulate(SimulateArgs),
    /// Run a Monte Carlo study from a study config.
    Study(StudyArgs),
    /// Check a tuning schedule against its admissibility conditions.
    ValidateSchedule(ValidateScheduleArgs),
}

#[derive(Args)]
struct CommonTuning {
    /// Quantile level in (0, 1).
    #[arg(long)]
    tau: Option<f64>,
    /// Adaptive weight exponent.
    #[arg(long)]
    gamma: Option<f64>,
    /// Explicit group-penalty tuning parameter (overrides the schedule).
    #[arg(long)]
    mu1: Option<f64>,
    /// Explicit fusion-penalty tuning parameter (overrides the schedule).
    #[arg(long)]
    mu2: Option<f64>,
    /// Schedule regime: fixed | growing.
    #[arg(long)]
    schedule: Option<String>,
    /// Group-growth exponent for the growing regime.
    #[arg(long)]
    c: Option<f64>,
    /// Signal-floor exponent for the growing regime.
    #[arg(long)]
    alpha: Option<f64>,
}

impl CommonTuning {
    fn overlay(&self, cfg: &mut ConfigMap) {
        overlay_f64(cfg, "tau", self.tau);
        overlay_f64(cfg, "gamma", self.gamma);
        overlay_f64(cfg, "mu1", self.mu1);
        overlay_f64(cfg, "mu2", self.mu2);
        overlay_f64(cfg, "c", self.c);
        overlay_f64(cfg, "alpha", self.alpha);
        if let Some(s) = &self.schedule {
            cfg.set("schedule", s.clone());
        }
    }
}

#[derive(Args)]
struct FitArgs {
    /// CSV dataset: header row, response first, features after.
    #[arg(long)]
    data: PathBuf,
    /// Group-spec sidecar file (`column=group_id` lines).
    #[arg(long)]
    groups_file: Option<PathBuf>,
    /// Inline group spec (`a=1,b=1,c=2`).
    #[arg(long)]
    groups: Option<String>,
    /// Optional key=value config file; flags win on conflict.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    tuning: CommonTuning,
    /// Output JSON path.
    #[arg(long)]
    out: PathBuf,
    /// Record wall-clock time in the manifest (breaks bit-reproducibility).
    #[arg(long)]
    timings: bool,
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario config file.
    #[arg(long)]
    config: PathBuf,
    /// Sample size override.
    #[arg(long)]
    n: Option<usize>,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Replication index of the generated dataset.
    #[arg(long)]
    replication: Option<u64>,
    #[command(flatten)]
    tuning: CommonTuning,
    /// Output CSV path; truth and group sidecars are written next to it.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct StudyArgs {
    /// Study config file.
    #[arg(long)]
    config: PathBuf,
    /// Replications override.
    #[arg(long)]
    reps: Option<usize>,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    tuning: CommonTuning,
    /// Output JSON path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ValidateScheduleArgs {
    /// Optional config file with schedule keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Schedule exponent `e` in `mu_n = kappa * n^e`.
    #[arg(long)]
    exponent: Option<f64>,
    #[command(flatten)]
    tuning: CommonTuning,
    /// Optional output JSON path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    configure_thread_cap();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Fit(args) => cmd_fit(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Study(args) => cmd_study(args),
        Command::ValidateSchedule(args) => cmd_validate_schedule(args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

/// `FGQL_THREADS` caps the rayon pool used for study replications.
fn configure_thread_cap() {
    if let Ok(raw) = std::env::var("FGQL_THREADS") {
        if let Ok(threads) = raw.parse::<usize>() {
            if threads >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<ConfigMap, Error> {
    match path {
        Some(p) => parse_config(&std::fs::read_to_string(p)?),
        None => Ok(ConfigMap::new()),
    }
}

fn overlay_f64(cfg: &mut ConfigMap, key: &str, value: Option<f64>) {
    if let Some(v) = value {
        cfg.set(key, format!("{v}"));
    }
}

fn cmd_fit(args: FitArgs) -> Result<ExitCode, Error> {
    let started = Instant::now();
    let mut cfg = load_config(args.config.as_deref())?;
    args.tuning.overlay(&mut cfg);

    let table = parse_csv_bytes(&std::fs::read(&args.data)?)?;
    let groups = match (&args.groups_file, &args.groups) {
        (Some(path), None) => parse_group_spec(&std::fs::read_to_string(path)?)?,
        (None, Some(inline)) => parse_inline_groups(inline)?,
        (None, None) => match cfg.get("groups_file") {
            Some(path) => parse_group_spec(&std::fs::read_to_string(path)?)?,
            None => {
                return Err(Error::InvalidParameter(
                    "provide a group spec via --groups-file or --groups".into(),
                ))
            }
        },
        (Some(_), Some(_)) => {
            return Err(Error::InvalidParameter(
                "--groups-file and --groups are mutually exclusive".into(),
            ))
        }
    };
    let (design, feature_names) = design_from_table(&table, &groups)?;

    let tau = cfg.f64_or("tau", 0.5)?;
    let gamma = cfg.f64_or("gamma", 1.0)?;
    let controls = SolverControls::default();

    // Explicit tuning wins over the schedule; otherwise the schedule's
    // concrete values at this sample size are used.
    let explicit = (cfg.f64("mu1")?, cfg.f64("mu2")?);
    let (mu1, mu2, schedule_used) = match explicit {
        (Some(m1), Some(m2)) => (m1, m2, None),
        (Some(m1), None) => (m1, 0.0, None),
        (None, Some(m2)) => (0.0, m2, None),
        (None, None) => {
            let schedule = schedule_from_config(&cfg)?;
            let (m1, m2) = schedule.mu_at(design.n());
            (m1, m2, Some(schedule))
        }
    };
    let config = FitConfig {
        tau,
        mu1,
        mu2,
        gamma,
        solver: controls,
    };
    config.validate()?;

    let pilot = pilot_fit(&design, tau, controls)?;
    let weights = compute_weights(&pilot, gamma, DEFAULT_WEIGHT_CAP)?;
    let result = fit(&design, &weights, &config)?;

    let mut manifest = RunManifest::new("fit", vec![args.data.display().to_string()]);
    manifest.fit_config = Some(config);
    manifest.schedule = schedule_used;
    manifest.iterations = Some(result.iterations);
    if args.timings {
        manifest.wall_clock_ms = Some(started.elapsed().as_millis() as u64);
    }
    let document = FitDocument::new(&result, &feature_names, manifest);
    std::fs::write(&args.out, to_json_string(&document)?)?;

    if result.converged {
        eprintln!(
            "fit converged in {} iterations; active groups: {:?}",
            result.iterations, result.active_groups
        );
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!(
            "fit did NOT converge within {} iterations; best iterate written",
            result.iterations
        );
        Ok(ExitCode::from(2))
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<ExitCode, Error> {
    let mut cfg = load_config(Some(&args.config))?;
    args.tuning.overlay(&mut cfg);
    if let Some(n) = args.n {
        cfg.set("n", n.to_string());
    }
    if let Some(seed) = args.seed {
        cfg.set("seed", seed.to_string());
    }
    if let Some(rep) = args.replication {
        cfg.set("replication", rep.to_string());
    }

    let scenario = scenario_from_config(&cfg)?;
    let n = cfg
        .usize("n")?
        .ok_or_else(|| Error::Parse("simulate needs a sample size 'n'".into()))?;
    let replication = cfg.u64("replication")?.unwrap_or(0);
    let resolved = scenario.resolve(n)?;
    let data = resolved.generate(replication);

    // Dataset CSV.
    let r = data.num_coefficients();
    let mut header = Vec::with_capacity(r + 1);
    header.push("y".to_string());
    for k in 1..=r {
        header.push(format!("x{k}"));
    }
    let rows = (0..data.n()).map(|i| {
        let mut row = Vec::with_capacity(r + 1);
        row.push(data.y()[i]);
        row.extend(data.x().row(i).iter().copied());
        row
    });
    let csv_text = fgql::io::write_csv(&header, rows);
    std::fs::write(&args.out, csv_text)?;

    // Group-spec sidecar mapping x1.. to contiguous group ids.
    let mut spec = String::new();
    let mut column = 1;
    for (gid, &size) in data.partition().sizes().iter().enumerate() {
        for _ in 0..size {
            spec.push_str(&format!("x{column}={}\n", gid + 1));
            column += 1;
        }
    }
    std::fs::write(sidecar_path(&args.out, "groups"), spec)?;

    // Truth sidecar.
    let mut manifest =
        RunManifest::new("simulate", vec![args.config.display().to_string()]);
    manifest.scenario = Some(scenario.clone());
    let truth = TruthDocument {
        schema_version: SCHEMA_VERSION.to_string(),
        n,
        replication,
        group_sizes: data.partition().sizes().to_vec(),
        true_beta: resolved.true_beta.values().to_vec(),
        active_groups: resolved.active_groups.clone(),
        fused_pairs: resolved.fused_pairs.clone(),
        tau: scenario.tau,
        manifest,
    };
    std::fs::write(sidecar_path(&args.out, "truth.json"), to_json_string(&truth)?)?;

    eprintln!(
        "wrote {} rows, {} features to {}",
        data.n(),
        r,
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn sidecar_path(out: &Path, suffix: &str) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".");
    name.push(suffix);
    out.with_file_name(name)
}

fn cmd_study(args: StudyArgs) -> Result<ExitCode, Error> {
    let mut cfg = load_config(Some(&args.config))?;
    args.tuning.overlay(&mut cfg);
    if let Some(reps) = args.reps {
        cfg.set("reps", reps.to_string());
    }
    if let Some(seed) = args.seed {
        cfg.set("seed", seed.to_string());
    }

    let kind = study_kind_from_config(&cfg)?;
    let scenario = scenario_from_config(&cfg)?;
    let schedule = schedule_from_config(&cfg)?;
    let sweep = sweep_from_config(&cfg)?;
    let controls = SolverControls::default();

    let report = match kind {
        StudyKind::Selection => run_selection_study(&scenario, &schedule, &sweep, controls)?,
        StudyKind::Rate => run_rate_study(&scenario, &schedule, &sweep, controls)?,
        StudyKind::Normality => {
            let direction = direction_from_config(&cfg)?;
            run_normality_study(&scenario, &schedule, &sweep, controls, &direction)?
        }
    };

    let mut manifest = RunManifest::new("study", vec![args.config.display().to_string()]);
    manifest.scenario = Some(scenario);
    manifest.schedule = Some(schedule);
    let document = StudyDocument {
        schema_version: SCHEMA_VERSION.to_string(),
        report,
        manifest,
    };
    std::fs::write(&args.out, to_json_string(&document)?)?;
    eprintln!("study report written to {}", args.out.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_validate_schedule(args: ValidateScheduleArgs) -> Result<ExitCode, Error> {
    let mut cfg = load_config(args.config.as_deref())?;
    args.tuning.overlay(&mut cfg);
    overlay_f64(&mut cfg, "exponent", args.exponent);

    let schedule = schedule_from_config(&cfg)?;
    let conditions = validate_schedule(&schedule);
    let admissible = conditions.iter().all(|c| c.satisfied);

    let manifest = RunManifest::new(
        "validate-schedule",
        args.config
            .iter()
            .map(|p| p.display().to_string())
            .collect(),
    );
    let document = ScheduleDocument {
        schema_version: SCHEMA_VERSION.to_string(),
        schedule,
        conditions,
        admissible,
        manifest,
    };
    let json = to_json_string(&document)?;
    match &args.out {
        Some(path) => std::fs::write(path, json)?,
        None => print!("{json}"),
    }
    for record in &document.conditions {
        eprintln!(
            "[{}] {} ({})",
            if record.satisfied { "ok" } else { "VIOLATED" },
            record.condition,
            record.inequality
        );
    }
    Ok(ExitCode::SUCCESS)
}
