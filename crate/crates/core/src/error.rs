use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ThermoError {
    #[error("porosity {0} leaves no solid volume (requires 0 <= eta < 1)")]
    SingularPorosity(f64),
    #[error("unknown species `{0}`")]
    UnknownSpecies(String),
    #[error("species `{species}`: {reason}")]
    InvalidSpeciesData { species: String, reason: String },
    #[error("energy {energy:.6e} J/m3 outside the attainable range [{low:.6e}, {high:.6e}] for 200-2500 K")]
    Bracket { energy: f64, low: f64, high: f64 },
    #[error("temperature inversion did not converge: T = {temperature} K, residual {residual:.3e} J/m3 after {iterations} iterations")]
    Inversion { temperature: f64, residual: f64, iterations: usize },
    #[error("temperature inversion needs a non-empty phase")]
    EmptyPhase,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error(transparent)]
    Thermo(#[from] ThermoError),
    #[error("non-finite value in {equation} of cell {cell} (segment {segment}, layer {layer})")]
    NonFinite { cell: usize, segment: usize, layer: usize, equation: String },
    #[error("geometry: {0}")]
    Geometry(String),
    #[error("configuration: {0}")]
    Configuration(String),
    #[error("initialization of cell {cell} failed: {reason}")]
    Initialization { cell: usize, reason: String },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("step size fell below {dt_min} s at t = {time} s (last Newton residual {residual:.3e})")]
    StiffFailure { time: f64, dt_min: f64, residual: f64 },
    #[error("singular Newton matrix at t = {time} s")]
    SingularJacobian { time: f64 },
    #[error("steady-state search did not converge: best residual {best_residual:.3e}")]
    SteadyState { best_residual: f64, history: Vec<f64>, best_x: Vec<f64>, best_y: Vec<f64> },
    #[error("invalid solver configuration: {0}")]
    Config(String),
}
