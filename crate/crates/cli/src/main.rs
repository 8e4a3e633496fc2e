//! `cooler`: run, validate and inspect clinker cooler scenarios.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use cooler_core::output::export;
use cooler_core::run::{run, Mode};
use cooler_core::scenario::{Scenario, ScenarioError, ScenarioFile};
use cooler_core::species::{N_GAS, N_SOLID};
use cooler_core::thermo::{mixture_transport, P_REF};
use cooler_core::{Phase, SolverError, SpeciesId, SpeciesTable};

const EXIT_VALIDATION: u8 = 1;
const EXIT_SOLVER: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "cooler", version, about = "Dynamic grate belt clinker cooler simulator")]
struct Cli {
    /// Log level filter (error, warn, info, debug, trace).
    #[arg(long, global = true, default_value = "warn")]
    log: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a scenario and export time series, profiles and metadata.
    Simulate {
        /// Scenario JSON; the bundled scenario when omitted.
        scenario: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = ModeArg::Dynamic)]
        mode: ModeArg,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Simulated horizon, s.
        #[arg(long = "t-end", allow_negative_numbers = true)]
        t_end: Option<f64>,
        /// Initial step size, s.
        #[arg(long, allow_negative_numbers = true)]
        dt: Option<f64>,
    },
    /// Check a scenario and list every violation.
    Validate {
        /// Scenario JSON; the bundled scenario when omitted.
        scenario: Option<PathBuf>,
    },
    /// Print the bundled scenario as JSON.
    Scenario,
    /// Property tables for debugging.
    Properties {
        #[command(subcommand)]
        target: PropertyTarget,
    },
}

#[derive(Subcommand, Debug)]
enum PropertyTarget {
    /// Pure-species properties.
    Species {
        /// Species name, e.g. C3S or N2.
        name: String,
        /// Temperatures, K.
        #[arg(long = "T", num_args = 1.., required = true)]
        t: Vec<f64>,
    },
    /// Gas-mixture properties.
    Mixture {
        /// Mole fractions as NAME=VALUE; the bundled fan air when omitted.
        #[arg(long = "x", value_parser = parse_fraction)]
        x: Vec<(SpeciesId, f64)>,
        /// Temperatures, K.
        #[arg(long = "T", num_args = 1.., required = true)]
        t: Vec<f64>,
        /// Pressure, Pa.
        #[arg(long = "P", default_value_t = P_REF)]
        p: f64,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Dynamic,
    Steady,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Dynamic => Mode::Dynamic,
            ModeArg::Steady => Mode::Steady,
        }
    }
}

fn parse_fraction(s: &str) -> Result<(SpeciesId, f64), String> {
    let (name, value) = s.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got `{s}`"))?;
    let id: SpeciesId = name.trim().parse().map_err(|e| format!("{e}"))?;
    if id.phase() != Phase::Gas {
        return Err(format!("{id} is not a gas"));
    }
    let v: f64 = value.trim().parse().map_err(|e| format!("bad fraction `{value}`: {e}"))?;
    if !(v >= 0.0) {
        return Err(format!("fraction of {id} must be non-negative"));
    }
    Ok((id, v))
}

/// Failure with the process exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Failure {
        Failure { code, message: message.into() }
    }
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Failure {
        let code = match e {
            ScenarioError::Io { .. } => EXIT_IO,
            ScenarioError::Parse { .. } | ScenarioError::Validation(_) => EXIT_VALIDATION,
        };
        Failure::new(code, e.to_string())
    }
}

fn load(path: Option<&Path>) -> Result<ScenarioFile, Failure> {
    match path {
        Some(p) => Ok(ScenarioFile::load(p)?),
        None => Ok(ScenarioFile::bundled()),
    }
}

fn simulate(path: Option<&Path>, mode: Mode, out: &Path, t_end: Option<f64>, dt: Option<f64>) -> Result<(), Failure> {
    let mut file = load(path)?;
    if let Some(t) = t_end {
        file.integrator.t_end = t;
    }
    if let Some(dt) = dt {
        file.integrator.dt = dt;
        let a = &mut file.integrator.step_adaptation;
        a.dt_min = a.dt_min.min(dt);
        a.dt_max = a.dt_max.max(dt);
    }
    file.integrator.validate().map_err(|e| Failure::new(EXIT_VALIDATION, e.to_string()))?;
    let scenario = file.build()?;
    for w in &scenario.warnings {
        log::warn!("{w}");
    }
    fs::create_dir_all(out).map_err(|e| Failure::new(EXIT_IO, format!("cannot create {}: {e}", out.display())))?;
    let bundle = match run(&scenario, mode) {
        Ok(b) => b,
        Err(e) => {
            let diag = write_diagnostic(&scenario, mode, out, &e)?;
            return Err(Failure::new(EXIT_SOLVER, format!("{e}\ndiagnostics written to {}", diag.display())));
        }
    };
    let files = export(&bundle, &scenario.model, out).map_err(|e| Failure::new(EXIT_IO, e.to_string()))?;
    let m = &bundle.meta;
    println!(
        "{} ({}): {} samples to t = {} s, {} steps, {} Newton iterations",
        if m.scenario.is_empty() { "scenario" } else { &m.scenario },
        m.mode,
        m.n_samples,
        m.t_end,
        m.stats.steps,
        m.stats.newton_iterations
    );
    if let (Some(last), Some(ext)) = (m.outlet_temperature_last, m.outlet_temperature_extrapolated) {
        println!(
            "outlet clinker temperature: {:.1} C (last segment), {:.1} C (extrapolated)",
            last - 273.15,
            ext - 273.15
        );
    }
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn write_diagnostic(scenario: &Scenario, mode: Mode, out: &Path, err: &SolverError) -> Result<PathBuf, Failure> {
    let mut doc = json!({
        "scenario": scenario.file.name,
        "mode": mode.as_str(),
        "error": err.to_string(),
    });
    match err {
        SolverError::StiffFailure { time, dt_min, residual } => {
            doc["kind"] = json!("stiff_failure");
            doc["time"] = json!(time);
            doc["dt_min"] = json!(dt_min);
            doc["residual"] = json!(residual);
        }
        SolverError::SingularJacobian { time } => {
            doc["kind"] = json!("singular_jacobian");
            doc["time"] = json!(time);
        }
        SolverError::SteadyState { best_residual, history, best_x, best_y } => {
            doc["kind"] = json!("steady_state");
            doc["best_residual"] = json!(best_residual);
            doc["history"] = json!(history);
            doc["best_x"] = json!(best_x);
            doc["best_y"] = json!(best_y);
        }
        SolverError::Model(e) => {
            doc["kind"] = json!("model");
            doc["detail"] = json!(format!("{e:?}"));
        }
        SolverError::Config(_) => doc["kind"] = json!("config"),
    }
    let path = out.join("diagnostic.json");
    let text = serde_json::to_string_pretty(&doc).expect("diagnostic serializes");
    fs::write(&path, text + "\n")
        .map_err(|e| Failure::new(EXIT_IO, format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

fn validate(path: Option<&Path>) -> Result<(), Failure> {
    let scenario = load(path)?.build()?;
    let g = &scenario.model.grid;
    println!("valid: {} segments x {} layers ({} cells)", g.n_v, g.n_y, g.n_cells());
    for w in &scenario.warnings {
        println!("warning: {w}");
    }
    Ok(())
}

fn species_properties(name: &str, temps: &[f64]) -> Result<(), Failure> {
    let id: SpeciesId = name.parse().map_err(|e| Failure::new(EXIT_VALIDATION, format!("{e}")))?;
    let table = SpeciesTable::embedded();
    let d = table.get(id);
    let phase = id.phase();
    match phase {
        Phase::Solid => println!(
            "{id}: M = {} kg/mol, rho = {} kg/m3, dHf = {} J/mol",
            d.molar_mass, d.density, d.formation_enthalpy
        ),
        Phase::Gas => println!("{id}: M = {} kg/mol, dHf = {} J/mol", d.molar_mass, d.formation_enthalpy),
    }
    let mut unit = vec![0.0; if phase == Phase::Solid { N_SOLID } else { N_GAS }];
    unit[id.index()] = 1.0;
    match phase {
        Phase::Solid => println!("T[K],cp[J/(mol K)],h[J/mol],k[W/(m K)]"),
        Phase::Gas => println!("T[K],cp[J/(mol K)],h[J/mol],k[W/(m K)],mu[Pa s]"),
    }
    for &t in temps {
        let cp = table.cp_molar(id, t);
        let h = table.enthalpy(phase, t, P_REF, &unit);
        let k = d.conductivity(t);
        match phase {
            Phase::Solid => println!("{t},{cp:.6e},{h:.6e},{k:.6e}"),
            Phase::Gas => println!("{t},{cp:.6e},{h:.6e},{k:.6e},{:.6e}", table.sutherland_viscosity(id, t)),
        }
    }
    Ok(())
}

fn mixture_properties(fractions: &[(SpeciesId, f64)], temps: &[f64], p: f64) -> Result<(), Failure> {
    let table = SpeciesTable::embedded();
    let mut x = [0.0; N_GAS];
    if fractions.is_empty() {
        x = Scenario::bundled().model.boundary.air_composition;
    } else {
        for &(id, v) in fractions {
            x[id.index()] += v;
        }
    }
    let total: f64 = x.iter().sum();
    if !(total > 0.0) {
        return Err(Failure::new(EXIT_VALIDATION, "mole fractions sum to zero"));
    }
    x.iter_mut().for_each(|v| *v /= total);
    let names: Vec<String> =
        SpeciesId::GASES.iter().zip(&x).filter(|(_, &v)| v > 0.0).map(|(id, v)| format!("{id}={v:.6}")).collect();
    println!("mixture: {} at {p} Pa", names.join(" "));
    println!("T[K],cp[J/(mol K)],h[J/mol],rho[kg/m3],k[W/(m K)],mu[Pa s]");
    for &t in temps {
        let cp = table.heat_capacity(Phase::Gas, t, &x);
        let h = table.enthalpy(Phase::Gas, t, p, &x);
        let c: Vec<f64> = x.iter().map(|v| v * p / (cooler_core::thermo::R_GAS * t)).collect();
        let rho = table.mass(Phase::Gas, &c);
        let (mu, k) = mixture_transport(&table, &x, t);
        println!("{t},{cp:.6e},{h:.6e},{rho:.6e},{k:.6e},{mu:.6e}");
    }
    Ok(())
}

fn main() -> ExitCode {
    // usage errors share the validation exit code; 2 is reserved for the solver
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_VALIDATION) } else { ExitCode::SUCCESS };
        }
    };
    env_logger::Builder::new().parse_filters(&cli.log).format_timestamp(None).init();
    let result = match &cli.command {
        Command::Simulate { scenario, mode, out, t_end, dt } => {
            simulate(scenario.as_deref(), (*mode).into(), out, *t_end, *dt)
        }
        Command::Validate { scenario } => validate(scenario.as_deref()),
        Command::Scenario => {
            println!("{}", ScenarioFile::bundled().to_json());
            Ok(())
        }
        Command::Properties { target } => match target {
            PropertyTarget::Species { name, t } => species_properties(name, t),
            PropertyTarget::Mixture { x, t, p } => mixture_properties(x, t, *p),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
