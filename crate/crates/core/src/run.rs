//! Scenario orchestration: dynamic and steady runs.

use serde::{Deserialize, Serialize};

use crate::error::SolverError;
use crate::output::{outlet_temperature, scenario_hash, segment_profiles, OutputBundle, ProfileSource, RunMeta};
use crate::scenario::Scenario;
use crate::solver::{find_steady_state, integrate, Observer, SteadyState, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Dynamic,
    Steady,
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "dynamic" => Ok(Mode::Dynamic),
            "steady" => Ok(Mode::Steady),
            _ => Err(format!("unknown mode `{s}` (expected dynamic or steady)")),
        }
    }
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Dynamic => "dynamic",
            Mode::Steady => "steady",
        }
    }
}

/// Integrates the scenario from its initial state.
pub fn simulate(scenario: &Scenario, observers: &mut [Observer<'_>]) -> Result<Trajectory, SolverError> {
    let (x0, y0) = scenario.initial_state()?;
    integrate(&scenario.model, &x0, &y0, &scenario.file.integrator, observers)
}

/// Steady state started from the last sample of `traj`.
pub fn steady_from(scenario: &Scenario, traj: &Trajectory) -> Result<SteadyState, SolverError> {
    let n = traj.len();
    let (x, y) = if n == 0 { scenario.initial_state()? } else { (traj.x[n - 1].clone(), traj.y[n - 1].clone()) };
    find_steady_state(&scenario.model, &x, &y, &scenario.file.integrator)
}

/// Runs the scenario. In steady mode the dynamic run to `t_end` serves as the
/// starting guess of the steady-state search.
pub fn run(scenario: &Scenario, mode: Mode) -> Result<OutputBundle, SolverError> {
    let traj = simulate(scenario, &mut [])?;
    let mut stats = traj.stats;
    let (profiles, source, residual) = match mode {
        Mode::Dynamic => {
            let n = traj.len();
            (segment_profiles(&scenario.model, &traj.x[n - 1], &traj.y[n - 1]), ProfileSource::FinalSample, None)
        }
        Mode::Steady => {
            let ss = steady_from(scenario, &traj)?;
            stats.newton_iterations += ss.stats.newton_iterations;
            stats.jacobian_evaluations += ss.stats.jacobian_evaluations;
            stats.residual_evaluations += ss.stats.residual_evaluations;
            (segment_profiles(&scenario.model, &ss.x, &ss.y), ProfileSource::SteadyState, Some(ss.residual))
        }
    };
    let outlet = outlet_temperature(&profiles);
    let json = scenario.file.to_json();
    let meta = RunMeta {
        scenario: scenario.file.name.clone(),
        scenario_sha256: scenario_hash(&json),
        mode: mode.as_str().into(),
        n_cells: scenario.model.grid.n_cells(),
        n_samples: traj.len(),
        t_end: scenario.file.integrator.t_end,
        stats,
        profile_source: source,
        steady_residual: residual,
        outlet_temperature_last: outlet.map(|o| o.0),
        outlet_temperature_extrapolated: outlet.map(|o| o.1),
        warnings: scenario.warnings.clone(),
        version: env!("CARGO_PKG_VERSION").into(),
    };
    Ok(OutputBundle { meta, trajectory: traj, profiles })
}
