//! Scenario files: a single JSON document describing geometry, boundary
//! conditions, calibration, initial state and integrator settings.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kinetics::{default_reactions, KineticsTable};
use crate::model::{
    BoundarySpec, ClinkerInflow, CoolerModel, ExternalPressures, FanInflow, GridSpec, ModelParams, PrandtlBasis,
    PressureId,
};
use crate::solver::IntegratorConfig;
use crate::species::{Phase, SpeciesId, SpeciesRecord, SpeciesTable, N_GAS, N_SOLID};
use crate::thermo::{porosity_lower_bound, WsggTable, P_REF, T_REF};

const BUNDLED: &str = include_str!("../data/scenario.json");

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid scenario:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompositionBasis {
    #[default]
    Mass,
    Mole,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Geometry {
    /// m
    pub length: f64,
    pub height: f64,
    pub width: f64,
    pub n_v: usize,
    #[serde(default = "default_n_y")]
    pub n_y: usize,
    #[serde(default = "default_bed_height")]
    pub bed_layer_height: f64,
    #[serde(default = "default_particle_diameter")]
    pub particle_diameter: f64,
    #[serde(default = "default_shape_factor")]
    pub shape_factor: f64,
    #[serde(default = "default_porosity")]
    pub porosity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClinkerSpec {
    /// t/h
    pub production: f64,
    #[serde(default)]
    pub basis: CompositionBasis,
    pub composition: BTreeMap<SpeciesId, f64>,
    /// K
    pub temperature: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FanSpec {
    /// kg/s per segment
    pub mass_flow: Vec<f64>,
    /// K
    pub temperature: f64,
    /// Mole fractions of the supplied air.
    pub composition: BTreeMap<SpeciesId, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Boundaries {
    pub clinker: ClinkerSpec,
    pub fans: FanSpec,
    /// Pa
    pub external_pressures: ExternalPressures,
    pub pressure_map: Vec<PressureId>,
    /// m/s, one value for all segments or one per segment.
    pub grate_speed: GrateSpeed,
    #[serde(default = "default_backflow_temperature")]
    pub backflow_temperature: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GrateSpeed {
    Uniform(f64),
    PerSegment(Vec<f64>),
}

/// Replacement Arrhenius parameters for one reaction (1-based id).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KineticsOverride {
    pub reaction: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prefactor: Option<f64>,
    /// J/mol
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub activation_energy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Calibration {
    #[serde(default = "default_friction_scale")]
    pub friction_scale: f64,
    #[serde(default = "default_emissivity")]
    pub emissivity_solid: f64,
    /// Radiation path length, m; half the height when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path_length: Option<f64>,
    #[serde(default)]
    pub prandtl_basis: PrandtlBasis,
    #[serde(default = "default_darcy_floor")]
    pub darcy_gradient_floor: f64,
}

impl Default for Calibration {
    fn default() -> Self {
        Calibration {
            friction_scale: default_friction_scale(),
            emissivity_solid: default_emissivity(),
            path_length: None,
            prandtl_basis: PrandtlBasis::default(),
            darcy_gradient_floor: default_darcy_floor(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialState {
    /// Total clinker per segment volume, mol/m3, with the inflow composition.
    pub solid_concentration: f64,
    pub solid_temperature: f64,
    pub air_temperature: f64,
    #[serde(default = "default_pressure")]
    pub pressure: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub name: String,
    pub geometry: Geometry,
    pub boundaries: Boundaries,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub kinetics: Vec<KineticsOverride>,
    /// Replacement records for individual species.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub species: BTreeMap<SpeciesId, SpeciesRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wsgg: Option<WsggTable>,
    #[serde(default)]
    pub calibration: Calibration,
    pub initial: InitialState,
    #[serde(default)]
    pub integrator: IntegratorConfig,
}

fn default_n_y() -> usize {
    1
}
fn default_bed_height() -> f64 {
    0.6
}
fn default_particle_diameter() -> f64 {
    0.04
}
fn default_shape_factor() -> f64 {
    0.25
}
fn default_porosity() -> f64 {
    0.4
}
fn default_backflow_temperature() -> f64 {
    T_REF
}
fn default_friction_scale() -> f64 {
    100.0
}
fn default_emissivity() -> f64 {
    0.9
}
fn default_darcy_floor() -> f64 {
    1.0
}
fn default_pressure() -> f64 {
    P_REF
}

/// A validated scenario with the derived model.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub file: ScenarioFile,
    pub model: CoolerModel,
    /// Non-fatal notices, e.g. property extrapolation.
    pub warnings: Vec<String>,
}

impl ScenarioFile {
    pub fn from_json(text: &str) -> Result<ScenarioFile, ScenarioError> {
        serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn bundled() -> ScenarioFile {
        ScenarioFile::from_json(BUNDLED).expect("bundled scenario parses")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// Every violated constraint, with field paths.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let mut positive = |path: &str, value: f64| {
            if !(value > 0.0 && value.is_finite()) {
                v.push(format!("{path}: must be positive (got {value})"));
            }
        };
        let g = &self.geometry;
        positive("geometry.length", g.length);
        positive("geometry.height", g.height);
        positive("geometry.width", g.width);
        positive("geometry.particle_diameter", g.particle_diameter);
        positive("geometry.shape_factor", g.shape_factor);
        let b = &self.boundaries;
        positive("boundaries.clinker.production", b.clinker.production);
        positive("boundaries.clinker.temperature", b.clinker.temperature);
        positive("boundaries.fans.temperature", b.fans.temperature);
        positive("boundaries.external_pressures.kiln", b.external_pressures.kiln);
        positive("boundaries.external_pressures.third_air", b.external_pressures.third_air);
        positive("boundaries.external_pressures.ambient", b.external_pressures.ambient);
        positive("boundaries.backflow_temperature", b.backflow_temperature);
        positive("calibration.friction_scale", self.calibration.friction_scale);
        positive("calibration.darcy_gradient_floor", self.calibration.darcy_gradient_floor);
        positive("initial.solid_temperature", self.initial.solid_temperature);
        positive("initial.air_temperature", self.initial.air_temperature);
        positive("initial.pressure", self.initial.pressure);

        if g.n_v == 0 {
            v.push("geometry.n_v: must be at least 1".into());
        }
        if g.n_y == 0 {
            v.push("geometry.n_y: must be at least 1".into());
        }
        if g.n_y > 1 && !(g.bed_layer_height > 0.0 && g.bed_layer_height < g.height) {
            v.push(format!("geometry.bed_layer_height: must lie in (0, height) (got {})", g.bed_layer_height));
        }
        if g.n_y > 0 {
            let bed = if g.n_y == 1 { g.height } else { g.bed_layer_height };
            if g.particle_diameter >= bed {
                v.push("geometry.particle_diameter: must be smaller than the bed layer".into());
            }
        }
        if !(g.porosity >= porosity_lower_bound() && g.porosity < 1.0) {
            v.push(format!("geometry.porosity: must lie in [{:.4}, 1) (got {})", porosity_lower_bound(), g.porosity));
        }
        let comp_check = |v: &mut Vec<String>, path: &str, comp: &BTreeMap<SpeciesId, f64>, phase: Phase| {
            for (id, &frac) in comp {
                if id.phase() != phase {
                    v.push(format!("{path}.{id}: not a {phase:?} species"));
                }
                if !(frac >= 0.0) {
                    v.push(format!("{path}.{id}: fraction must be non-negative (got {frac})"));
                }
            }
            let sum: f64 = comp.values().sum();
            if (sum - 1.0).abs() > 1e-9 {
                v.push(format!("{path}: fractions must sum to 1 (got {sum})"));
            }
        };
        comp_check(&mut v, "boundaries.clinker.composition", &b.clinker.composition, Phase::Solid);
        comp_check(&mut v, "boundaries.fans.composition", &b.fans.composition, Phase::Gas);
        if b.fans.mass_flow.len() != g.n_v {
            v.push(format!("boundaries.fans.mass_flow: needs {} entries (got {})", g.n_v, b.fans.mass_flow.len()));
        }
        for (i, &m) in b.fans.mass_flow.iter().enumerate() {
            if !(m >= 0.0) {
                v.push(format!("boundaries.fans.mass_flow[{i}]: must be non-negative (got {m})"));
            }
        }
        if b.pressure_map.len() != g.n_v {
            v.push(format!(
                "boundaries.pressure_map: must cover segments 1..{} (got {} entries)",
                g.n_v,
                b.pressure_map.len()
            ));
        }
        match &b.grate_speed {
            GrateSpeed::Uniform(s) if !(*s > 0.0) => {
                v.push(format!("boundaries.grate_speed: must be positive (got {s})"))
            }
            GrateSpeed::PerSegment(s) => {
                if s.len() != g.n_v {
                    v.push(format!("boundaries.grate_speed: needs {} entries (got {})", g.n_v, s.len()));
                }
                for (i, &s) in s.iter().enumerate() {
                    if !(s > 0.0) {
                        v.push(format!("boundaries.grate_speed[{i}]: must be positive (got {s})"));
                    }
                }
            }
            _ => {}
        }
        if !(0.0..=1.0).contains(&self.calibration.emissivity_solid) {
            v.push("calibration.emissivity_solid: must lie in [0, 1]".into());
        }
        if let Some(s) = self.calibration.path_length {
            if !(s >= 0.0) {
                v.push(format!("calibration.path_length: must be non-negative (got {s})"));
            }
        }
        if !(self.initial.solid_concentration >= 0.0) {
            v.push("initial.solid_concentration: must be non-negative".into());
        }
        for (i, k) in self.kinetics.iter().enumerate() {
            if !(1..=6).contains(&k.reaction) {
                v.push(format!("kinetics[{i}].reaction: must be 1..6 (got {})", k.reaction));
            }
            if k.prefactor.is_some_and(|p| !(p >= 0.0)) {
                v.push(format!("kinetics[{i}].prefactor: must be non-negative"));
            }
            if k.activation_energy.is_some_and(|e| !(e >= 0.0)) {
                v.push(format!("kinetics[{i}].activation_energy: must be non-negative"));
            }
        }
        if let Err(e) = self.integrator.validate() {
            v.push(format!("integrator: {e}"));
        }
        v
    }

    /// Clinker inflow, mol/s per solid species.
    pub fn clinker_molar_flow(&self, table: &SpeciesTable) -> [f64; N_SOLID] {
        let c = &self.boundaries.clinker;
        let mass_flow = c.production * 1000.0 / 3600.0;
        let mut n = [0.0; N_SOLID];
        match c.basis {
            CompositionBasis::Mass => {
                for (id, &w) in &c.composition {
                    n[id.index()] = w * mass_flow / table.get(*id).molar_mass;
                }
            }
            CompositionBasis::Mole => {
                let mean: f64 = c.composition.iter().map(|(id, &x)| x * table.get(*id).molar_mass).sum();
                for (id, &x) in &c.composition {
                    n[id.index()] = x * mass_flow / mean;
                }
            }
        }
        n
    }

    /// Mole fractions of the inflow clinker.
    pub fn clinker_mole_fractions(&self, table: &SpeciesTable) -> [f64; N_SOLID] {
        let n = self.clinker_molar_flow(table);
        let total: f64 = n.iter().sum();
        n.map(|v| v / total)
    }

    fn species_table(&self) -> Result<SpeciesTable, ScenarioError> {
        if self.species.is_empty() {
            return Ok(SpeciesTable::embedded());
        }
        let overrides: BTreeMap<String, SpeciesRecord> =
            self.species.iter().map(|(id, rec)| (id.name().to_string(), rec.clone())).collect();
        SpeciesTable::with_overrides(&SpeciesTable::embedded_file(), &overrides)
            .map_err(|e| ScenarioError::Validation(vec![format!("species: {e}")]))
    }

    fn kinetics_table(&self) -> KineticsTable {
        let mut reactions = default_reactions();
        for o in &self.kinetics {
            let r = &mut reactions[o.reaction - 1];
            if let Some(p) = o.prefactor {
                r.prefactor = p;
            }
            if let Some(e) = o.activation_energy {
                r.activation_energy = e;
            }
        }
        KineticsTable::new(reactions)
    }

    /// Validates and builds the model.
    pub fn build(self) -> Result<Scenario, ScenarioError> {
        let violations = self.violations();
        if !violations.is_empty() {
            return Err(ScenarioError::Validation(violations));
        }
        let species = self.species_table()?;
        let g = &self.geometry;
        let b = &self.boundaries;
        let mut air = [0.0; N_GAS];
        for (id, &x) in &b.fans.composition {
            air[id.index()] = x;
        }
        let grate_speed = match &b.grate_speed {
            GrateSpeed::Uniform(s) => vec![*s; g.n_v],
            GrateSpeed::PerSegment(s) => s.clone(),
        };
        let boundary = BoundarySpec {
            clinker: ClinkerInflow {
                molar_flow: self.clinker_molar_flow(&species),
                temperature: b.clinker.temperature,
            },
            fans: b
                .fans
                .mass_flow
                .iter()
                .map(|&m| FanInflow { mass_flow: m, temperature: b.fans.temperature })
                .collect(),
            air_composition: air,
            external_pressures: b.external_pressures,
            pressure_map: b.pressure_map.clone(),
            grate_speed,
            backflow_temperature: b.backflow_temperature,
        };
        let grid = GridSpec {
            length: g.length,
            height: g.height,
            width: g.width,
            n_v: g.n_v,
            n_y: g.n_y,
            bed_layer_height: g.bed_layer_height,
        };
        let c = &self.calibration;
        let params = ModelParams {
            particle_diameter: g.particle_diameter,
            shape_factor: g.shape_factor,
            porosity: g.porosity,
            friction_scale: c.friction_scale,
            emissivity_solid: c.emissivity_solid,
            path_length: c.path_length.unwrap_or(0.5 * g.height),
            prandtl_basis: c.prandtl_basis,
            darcy_gradient_floor: c.darcy_gradient_floor,
        };
        let wsgg = self.wsgg.clone().unwrap_or_default();
        let model = CoolerModel::new(species, self.kinetics_table(), wsgg, grid, boundary, params)
            .map_err(|e| ScenarioError::Validation(vec![e.to_string()]))?;
        let warnings = self.range_warnings(&model.species);
        Ok(Scenario { file: self, model, warnings })
    }

    /// Species whose heat-capacity fit does not cover the scenario's
    /// temperature span.
    fn range_warnings(&self, table: &SpeciesTable) -> Vec<String> {
        let b = &self.boundaries;
        let temps = [
            b.clinker.temperature,
            b.fans.temperature,
            b.backflow_temperature,
            self.initial.solid_temperature,
            self.initial.air_temperature,
        ];
        let lo = temps.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = temps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut out = Vec::new();
        let mut present: Vec<SpeciesId> = b.clinker.composition.keys().copied().collect();
        present.extend(b.fans.composition.keys().copied());
        for id in present {
            let cp = &table.get(id).cp;
            if !(cp.covers(lo) && cp.covers(hi)) {
                out.push(format!(
                    "heat capacity of {id} fitted on {}-{} K is extrapolated to {lo}-{hi} K",
                    cp.range[0], cp.range[1]
                ));
            }
        }
        out
    }

    pub fn load(path: &Path) -> Result<ScenarioFile, ScenarioError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ScenarioError::Io { path: path.display().to_string(), source })?;
        ScenarioFile::from_json(&text)
    }
}

/// Reads, validates and builds a scenario file.
pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    ScenarioFile::load(path)?.build()
}

impl Scenario {
    pub fn bundled() -> Scenario {
        ScenarioFile::bundled().build().expect("bundled scenario is valid")
    }

    /// Consistent initial `(x, y)` from the scenario's initial section.
    pub fn initial_state(&self) -> Result<(Vec<f64>, Vec<f64>), crate::error::ModelError> {
        let init = &self.file.initial;
        let x_s = self.file.clinker_mole_fractions(&self.model.species);
        let c_seg = x_s.map(|v| v * init.solid_concentration);
        let (c_s, c_a) =
            self.model.uniform_concentrations(&c_seg, init.solid_temperature, init.air_temperature, init.pressure)?;
        self.model.consistent_initialize(&c_s, &c_a, init.solid_temperature, init.air_temperature)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_loads_with_only_extrapolation_notices() {
        let s = Scenario::bundled();
        assert!(!s.warnings.is_empty());
        assert!(s.warnings.iter().all(|w| w.contains("extrapolated")), "{:?}", s.warnings);
        assert_eq!(s.model.grid.n_v, 10);
        assert_eq!(s.model.params.friction_scale, 100.0);
    }

    #[test]
    fn round_trip_is_identity() {
        let a = ScenarioFile::bundled();
        let b = ScenarioFile::from_json(&a.to_json()).unwrap();
        assert_eq!(a, b);
        let c = ScenarioFile::from_json(&b.to_json()).unwrap();
        assert_eq!(b, c);
    }

    #[test]
    fn composition_sum_is_checked() {
        let mut f = ScenarioFile::bundled();
        *f.boundaries.clinker.composition.get_mut(&SpeciesId::C3S).unwrap() -= 0.1;
        let v = f.violations();
        assert!(v.iter().any(|m| m.starts_with("boundaries.clinker.composition")), "{v:?}");
        assert!(matches!(f.build(), Err(ScenarioError::Validation(_))));
    }

    #[test]
    fn every_violation_is_listed() {
        let mut f = ScenarioFile::bundled();
        f.geometry.width = -1.0;
        f.boundaries.pressure_map.pop();
        f.calibration.emissivity_solid = 2.0;
        let v = f.violations();
        assert_eq!(v.len(), 3, "{v:?}");
    }

    #[test]
    fn missing_friction_scale_defaults() {
        let mut json: serde_json::Value = serde_json::from_str(BUNDLED).unwrap();
        json["calibration"].as_object_mut().unwrap().remove("friction_scale");
        let f: ScenarioFile = serde_json::from_value(json).unwrap();
        assert_eq!(f.calibration.friction_scale, 100.0);
    }

    #[test]
    fn parse_error_has_location() {
        match ScenarioFile::from_json("{\n  \"geometry\": ]") {
            Err(ScenarioError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn clinker_inflow_by_hand() {
        let f = ScenarioFile::bundled();
        let t = SpeciesTable::embedded();
        let n = f.clinker_molar_flow(&t);
        let m = 191.0e3 / 3600.0;
        assert!((n[SpeciesId::C3S.index()] - 0.7996 * m / 0.22832).abs() < 1e-9);
        assert!((n[SpeciesId::C3A.index()] - 0.0976 * m / 0.27019).abs() < 1e-9);
        assert!((n[SpeciesId::C4AF.index()] - 0.1028 * m / 0.48597).abs() < 1e-9);
        assert!((t.mass(Phase::Solid, &n) - m).abs() < 1e-9);
    }

    #[test]
    fn mole_basis_preserves_mass_flow() {
        let mut f = ScenarioFile::bundled();
        f.boundaries.clinker.basis = CompositionBasis::Mole;
        let t = SpeciesTable::embedded();
        let n = f.clinker_molar_flow(&t);
        assert!((t.mass(Phase::Solid, &n) - 191.0e3 / 3600.0).abs() < 1e-9);
        let x = f.clinker_mole_fractions(&t);
        assert!((x[SpeciesId::C3S.index()] - 0.7996).abs() < 1e-12);
    }

    #[test]
    fn overrides_apply() {
        let mut f = ScenarioFile::bundled();
        f.kinetics.push(KineticsOverride { reaction: 6, prefactor: Some(0.0), activation_energy: None });
        let s = f.build().unwrap();
        assert_eq!(s.model.kinetics.reactions()[5].prefactor, 0.0);
    }
}
