use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use ehtx::config::{ExperimentConfig, Scenario};
use ehtx::multichannel::solve_offline_mc;
use ehtx::online::{PolicyKind, Simulator};
use ehtx::{compute_p_ee, report, solve_offline, solve_staircase, Error, Policy, Result};
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
enum ScenarioArg {
    Pee,
    Offline,
    Staircase,
    Multichannel,
    Online,
    SweepLambda,
    SweepHorizon,
    Ofdma,
}

impl From<ScenarioArg> for Scenario {
    fn from(s: ScenarioArg) -> Self {
        match s {
            ScenarioArg::Pee => Scenario::Pee,
            ScenarioArg::Offline => Scenario::Offline,
            ScenarioArg::Staircase => Scenario::Staircase,
            ScenarioArg::Multichannel => Scenario::Multichannel,
            ScenarioArg::Online => Scenario::Online,
            ScenarioArg::SweepLambda => Scenario::SweepLambda,
            ScenarioArg::SweepHorizon => Scenario::SweepHorizon,
            ScenarioArg::Ofdma => Scenario::Ofdma,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PolicyArg {
    Proposed,
    Eep,
    Enp,
}

/// Power scheduling for energy-harvesting transmitters with circuit power.
///
/// Without --config the built-in example setup for the scenario is used.
#[derive(Debug, Parser)]
#[command(name = "ehtx", version)]
struct Cli {
    scenario: ScenarioArg,
    /// JSON experiment configuration
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for CSV and JSON files
    #[arg(long)]
    out: Option<PathBuf>,
    /// Base seed for generated arrivals and sweeps
    #[arg(long)]
    seed: Option<u64>,
    /// Trials per sweep point
    #[arg(long)]
    trials: Option<usize>,
    /// Simulator time step (s)
    #[arg(long)]
    step: Option<f64>,
    /// Online policy (online scenario)
    #[arg(long, value_enum)]
    policy: Option<PolicyArg>,
    /// Print the effective configuration and exit
    #[arg(long)]
    print_config: bool,
}

fn load(cli: &Cli, scenario: Scenario) -> Result<ExperimentConfig> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::from_path(path)?,
        None => ExperimentConfig::default_for(scenario),
    };
    config.apply_overrides(cli.seed, cli.trials, cli.step);
    if let Some(p) = cli.policy {
        let mut online = config.online();
        online.policy = match p {
            PolicyArg::Proposed => PolicyKind::Proposed,
            PolicyArg::Eep => PolicyKind::Eep,
            PolicyArg::Enp => PolicyKind::Enp,
        };
        config.online = Some(online);
    }
    config.validate_for(scenario)?;
    Ok(config)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_summary(out: Option<&Path>, summary: &Value) -> Result<()> {
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("summary.json"), report::to_json(summary))?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<Value> {
    let scenario: Scenario = cli.scenario.into();
    let config = load(cli, scenario)?;
    if cli.print_config {
        return serde_json::from_str(&config.to_json()).map_err(|e| Error::Config(e.to_string()));
    }
    let out = cli.out.as_deref();
    let summary = match scenario {
        Scenario::Pee => {
            let ee = compute_p_ee(&config.channel()?.rate_model()?, &config.circuit()?)?;
            json!({
                "p_ee_w": ee.p_ee,
                "ee_bits_per_joule": ee.ee_value,
                "iterations": ee.iterations,
                "bracket_width_w": ee.residual,
            })
        }
        Scenario::Offline => {
            let (model, circuit, profile) = (config.channel()?.rate_model()?, config.circuit()?, config.energy_profile()?);
            let sol = solve_offline(&profile, &model, &circuit)?;
            if let Some(dir) = out {
                report::write_schedule(&sol.schedule, &circuit, create(dir, "schedule.csv")?)?;
            }
            json!({
                "throughput_bits": sol.throughput,
                "p_ee_w": sol.p_ee,
                "i_ee": sol.i_ee,
                "ee_phase_end_s": profile.boundaries()[sol.i_ee],
                "ee_boundaries": sol.ee_boundaries,
                "ee_on_times_s": sol.ee_on_times,
                "staircase_powers_w": sol.staircase_powers,
                "energy_used_j": sol.schedule.total_energy(&circuit),
                "energy_harvested_j": profile.total_energy(),
            })
        }
        Scenario::Staircase => {
            let (model, circuit, profile) = (config.channel()?.rate_model()?, config.circuit()?, config.energy_profile()?);
            let st = solve_staircase(&profile, &circuit);
            if let Some(dir) = out {
                report::write_schedule(&st.schedule, &circuit, create(dir, "schedule.csv")?)?;
            }
            json!({
                "throughput_bits": st.schedule.throughput(&model),
                "powers_w": st.powers,
                "groups": st.groups.iter().map(|g| json!({
                    "first_epoch": g.first_epoch, "last_epoch": g.last_epoch, "level_w": g.level, "power_w": g.power,
                })).collect::<Vec<_>>(),
            })
        }
        Scenario::Multichannel => {
            let (model, circuit, profile) = (config.channel()?.multi_model()?, config.circuit()?, config.energy_profile()?);
            let sol = solve_offline_mc(&profile, &model, &circuit)?;
            if let Some(dir) = out {
                report::write_vector_schedule(&sol.schedule, &circuit, create(dir, "schedule.csv")?)?;
            }
            json!({
                "throughput_bits": sol.throughput,
                "channels": model.num_channels(),
                "p_ee_w": sol.p_ee.p_ee(),
                "q_ee_w": sol.p_ee.q_ee,
                "i_ee": sol.total.i_ee,
            })
        }
        Scenario::Online => {
            let (model, circuit, profile) = (config.channel()?.rate_model()?, config.circuit()?, config.energy_profile()?);
            let online = config.online();
            let stats = online.stats(config.generator.as_ref())?;
            let p_ee = compute_p_ee(&model, &circuit)?.p_ee;
            let trace = Simulator::new(&model, circuit, stats, p_ee, online.time_step_s)?.run(Policy::Online(online.policy), &profile);
            if let Some(dir) = out {
                report::write_trace(&trace, create(dir, "trace.csv")?)?;
            }
            json!({
                "policy": online.policy.name(),
                "time_step_s": online.time_step_s,
                "mean_power_w": stats.mean_power(),
                "throughput_bits": trace.throughput,
                "harvested_j": trace.harvested,
                "consumed_j": trace.consumed,
                "residual_energy_j": trace.residual_energy,
            })
        }
        Scenario::SweepLambda | Scenario::SweepHorizon | Scenario::Ofdma => {
            // emit writes its own summary.json
            let result = ehtx::run_sweep(scenario, &config)?;
            if let Some(dir) = out {
                report::emit(&result, dir)?;
            }
            return serde_json::to_value(report::Summary::of(&result)).map_err(|e| Error::Io(e.to_string()));
        }
    };
    let summary = json!({ "scenario": scenario.name(), "result": summary });
    write_summary(out, &summary)?;
    Ok(summary)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(summary) => {
            // a closed pipe downstream is not an error
            let _ = writeln!(std::io::stdout(), "{}", serde_json::to_string_pretty(&summary).expect("json"));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", json!({ "error": e.kind(), "message": e.to_string() }));
            ExitCode::from(2)
        }
    }
}
