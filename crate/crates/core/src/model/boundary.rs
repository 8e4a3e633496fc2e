use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::species::{GasVec, Phase, SolidVec, SpeciesTable, N_GAS};

/// Named external pressure a segment's top face discharges to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PressureId {
    Kiln,
    ThirdAir,
    Ambient,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExternalPressures {
    pub kiln: f64,
    pub third_air: f64,
    pub ambient: f64,
}

impl ExternalPressures {
    pub fn get(&self, id: PressureId) -> f64 {
        match id {
            PressureId::Kiln => self.kiln,
            PressureId::ThirdAir => self.third_air,
            PressureId::Ambient => self.ambient,
        }
    }
}

/// Clinker entering the bed through the west face of the first segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClinkerInflow {
    /// mol/s per solid species.
    pub molar_flow: SolidVec,
    pub temperature: f64,
}

/// Air blown through the grate under one segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FanInflow {
    /// kg/s
    pub mass_flow: f64,
    pub temperature: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundarySpec {
    pub clinker: ClinkerInflow,
    /// One entry per segment.
    pub fans: Vec<FanInflow>,
    /// Mole fractions of the fan air; also used for backflow through a top face.
    pub air_composition: GasVec,
    pub external_pressures: ExternalPressures,
    /// Pressure each segment's top face discharges to.
    pub pressure_map: Vec<PressureId>,
    /// Grate speed per segment, m/s.
    pub grate_speed: Vec<f64>,
    /// Temperature of air drawn in through a top face, K.
    pub backflow_temperature: f64,
}

impl BoundarySpec {
    pub fn validate(&self, n_v: usize) -> Result<(), ModelError> {
        let cfg = |m: String| Err(ModelError::Configuration(m));
        if self.fans.len() != n_v {
            return cfg(format!("{} fan entries for {n_v} segments", self.fans.len()));
        }
        if self.pressure_map.len() != n_v {
            return cfg(format!("pressure map covers {} of {n_v} segments", self.pressure_map.len()));
        }
        if self.grate_speed.len() != n_v {
            return cfg(format!("{} grate speeds for {n_v} segments", self.grate_speed.len()));
        }
        if self.clinker.molar_flow.iter().any(|&f| !(f >= 0.0)) || !(self.clinker.temperature > 0.0) {
            return cfg("clinker inflow must be non-negative with positive temperature".into());
        }
        if self.fans.iter().any(|f| !(f.mass_flow >= 0.0) || !(f.temperature > 0.0)) {
            return cfg("fan inflows must be non-negative with positive temperature".into());
        }
        if self.grate_speed.iter().any(|&v| !(v >= 0.0)) {
            return cfg("grate speeds must be non-negative".into());
        }
        let p = &self.external_pressures;
        if [p.kiln, p.third_air, p.ambient].iter().any(|&v| !(v > 0.0)) {
            return cfg("external pressures must be positive".into());
        }
        let sum: f64 = self.air_composition.iter().sum();
        if self.air_composition.iter().any(|&v| !(v >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
            return cfg(format!("air mole fractions must be non-negative and sum to 1 (sum {sum})"));
        }
        if !(self.backflow_temperature > 0.0) {
            return cfg("backflow temperature must be positive".into());
        }
        Ok(())
    }

    /// Molar flow per gas species blown in by the fan of segment `k`, mol/s.
    pub fn fan_molar_flow(&self, table: &SpeciesTable, k: usize) -> GasVec {
        let molar_mass = table.mass(Phase::Gas, &self.air_composition);
        let total = self.fans[k].mass_flow / molar_mass;
        let mut out = [0.0; N_GAS];
        for (o, &x) in out.iter_mut().zip(&self.air_composition) {
            *o = x * total;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::species::SpeciesId;

    #[test]
    fn fan_molar_flow_by_hand() {
        let t = SpeciesTable::embedded();
        let mut x = [0.0; N_GAS];
        x[SpeciesId::N2.index()] = 0.79;
        x[SpeciesId::O2.index()] = 0.21;
        let spec = BoundarySpec {
            clinker: ClinkerInflow { molar_flow: [0.0; 9], temperature: 1723.15 },
            fans: vec![FanInflow { mass_flow: 16.24, temperature: 298.15 }],
            air_composition: x,
            external_pressures: ExternalPressures { kiln: 101150.0, third_air: 101125.0, ambient: 101325.0 },
            pressure_map: vec![PressureId::Ambient],
            grate_speed: vec![0.017],
            backflow_temperature: 298.15,
        };
        spec.validate(1).unwrap();
        let m = 0.79 * 0.028014 + 0.21 * 0.031998;
        let n = spec.fan_molar_flow(&t, 0);
        assert!((n[SpeciesId::N2.index()] - 0.79 * 16.24 / m).abs() < 1e-10);
        assert!((t.mass(Phase::Gas, &n) - 16.24).abs() < 1e-12);
        assert!(spec.validate(2).is_err());
    }
}
