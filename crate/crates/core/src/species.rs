//! Species identifiers and the immutable property database.
//!
//! Solids and gases are indexed separately; every per-phase vector in the
//! crate (concentrations, fluxes, production rates) uses the order given by
//! [`SpeciesId::SOLIDS`] and [`SpeciesId::GASES`].

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ThermoError;

pub const N_SOLID: usize = 9;
pub const N_GAS: usize = 7;

pub type SolidVec = [f64; N_SOLID];
pub type GasVec = [f64; N_GAS];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Solid,
    Gas,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SpeciesId {
    CaCO3,
    CaO,
    SiO2,
    Al2O3,
    Fe2O3,
    C2S,
    C3S,
    C3A,
    C4AF,
    CO2,
    N2,
    O2,
    Ar,
    CO,
    H2O,
    H2,
}

/// Elements tracked by the stoichiometry checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Element {
    Ca,
    Si,
    Al,
    Fe,
    C,
    O,
    N,
    H,
    Ar,
}

impl Element {
    pub const ALL: [Element; 9] = [
        Element::Ca,
        Element::Si,
        Element::Al,
        Element::Fe,
        Element::C,
        Element::O,
        Element::N,
        Element::H,
        Element::Ar,
    ];

    /// The six elements that take part in the clinker reactions.
    pub const REACTIVE: [Element; 6] = [Element::Ca, Element::Si, Element::Al, Element::Fe, Element::C, Element::O];
}

impl SpeciesId {
    pub const SOLIDS: [SpeciesId; N_SOLID] = [
        SpeciesId::CaCO3,
        SpeciesId::CaO,
        SpeciesId::SiO2,
        SpeciesId::Al2O3,
        SpeciesId::Fe2O3,
        SpeciesId::C2S,
        SpeciesId::C3S,
        SpeciesId::C3A,
        SpeciesId::C4AF,
    ];

    pub const GASES: [SpeciesId; N_GAS] =
        [SpeciesId::CO2, SpeciesId::N2, SpeciesId::O2, SpeciesId::Ar, SpeciesId::CO, SpeciesId::H2O, SpeciesId::H2];

    pub const ALL: [SpeciesId; N_SOLID + N_GAS] = [
        SpeciesId::CaCO3,
        SpeciesId::CaO,
        SpeciesId::SiO2,
        SpeciesId::Al2O3,
        SpeciesId::Fe2O3,
        SpeciesId::C2S,
        SpeciesId::C3S,
        SpeciesId::C3A,
        SpeciesId::C4AF,
        SpeciesId::CO2,
        SpeciesId::N2,
        SpeciesId::O2,
        SpeciesId::Ar,
        SpeciesId::CO,
        SpeciesId::H2O,
        SpeciesId::H2,
    ];

    pub fn phase(self) -> Phase {
        if (self as usize) < N_SOLID {
            Phase::Solid
        } else {
            Phase::Gas
        }
    }

    /// Position within the species' own phase vector.
    pub fn index(self) -> usize {
        let i = self as usize;
        if i < N_SOLID {
            i
        } else {
            i - N_SOLID
        }
    }

    /// Position in [`SpeciesId::ALL`].
    pub fn global_index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            SpeciesId::CaCO3 => "CaCO3",
            SpeciesId::CaO => "CaO",
            SpeciesId::SiO2 => "SiO2",
            SpeciesId::Al2O3 => "Al2O3",
            SpeciesId::Fe2O3 => "Fe2O3",
            SpeciesId::C2S => "C2S",
            SpeciesId::C3S => "C3S",
            SpeciesId::C3A => "C3A",
            SpeciesId::C4AF => "C4AF",
            SpeciesId::CO2 => "CO2",
            SpeciesId::N2 => "N2",
            SpeciesId::O2 => "O2",
            SpeciesId::Ar => "Ar",
            SpeciesId::CO => "CO",
            SpeciesId::H2O => "H2O",
            SpeciesId::H2 => "H2",
        }
    }

    /// Atoms per formula unit.
    pub fn elements(self) -> &'static [(Element, i64)] {
        use Element::*;
        match self {
            SpeciesId::CaCO3 => &[(Ca, 1), (C, 1), (O, 3)],
            SpeciesId::CaO => &[(Ca, 1), (O, 1)],
            SpeciesId::SiO2 => &[(Si, 1), (O, 2)],
            SpeciesId::Al2O3 => &[(Al, 2), (O, 3)],
            SpeciesId::Fe2O3 => &[(Fe, 2), (O, 3)],
            SpeciesId::C2S => &[(Ca, 2), (Si, 1), (O, 4)],
            SpeciesId::C3S => &[(Ca, 3), (Si, 1), (O, 5)],
            SpeciesId::C3A => &[(Ca, 3), (Al, 2), (O, 6)],
            SpeciesId::C4AF => &[(Ca, 4), (Al, 2), (Fe, 2), (O, 10)],
            SpeciesId::CO2 => &[(C, 1), (O, 2)],
            SpeciesId::N2 => &[(N, 2)],
            SpeciesId::O2 => &[(O, 2)],
            SpeciesId::Ar => &[(Ar, 1)],
            SpeciesId::CO => &[(C, 1), (O, 1)],
            SpeciesId::H2O => &[(H, 2), (O, 1)],
            SpeciesId::H2 => &[(H, 2)],
        }
    }

    pub fn atoms(self, element: Element) -> i64 {
        self.elements().iter().find(|(e, _)| *e == element).map_or(0, |(_, n)| *n)
    }
}

impl fmt::Display for SpeciesId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SpeciesId {
    type Err = ThermoError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SpeciesId::ALL
            .iter()
            .copied()
            .find(|id| id.name() == s)
            .ok_or_else(|| ThermoError::UnknownSpecies(s.to_string()))
    }
}

impl Serialize for SpeciesId {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for SpeciesId {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// How the heat-capacity polynomial behaves outside its tabulated range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Extrapolation {
    /// Evaluate the polynomial as is.
    #[default]
    Polynomial,
    /// Hold cp at its value at the nearest range end.
    Clamp,
}

/// `cp(T) = c0 + c1 T + c2 T^2` in J/(mol K).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CpPolynomial {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub range: [f64; 2],
    #[serde(default)]
    pub extrapolation: Extrapolation,
}

impl CpPolynomial {
    fn poly(&self, t: f64) -> f64 {
        self.c0 + t * (self.c1 + t * self.c2)
    }

    fn antiderivative(&self, t: f64) -> f64 {
        t * (self.c0 + t * (self.c1 / 2.0 + t * self.c2 / 3.0))
    }

    pub fn cp(&self, t: f64) -> f64 {
        match self.extrapolation {
            Extrapolation::Polynomial => self.poly(t),
            Extrapolation::Clamp => self.poly(t.clamp(self.range[0], self.range[1])),
        }
    }

    /// Integral of cp from `t0` to `t`.
    pub fn integral(&self, t0: f64, t: f64) -> f64 {
        match self.extrapolation {
            Extrapolation::Polynomial => self.antiderivative(t) - self.antiderivative(t0),
            Extrapolation::Clamp => self.clamped_primitive(t) - self.clamped_primitive(t0),
        }
    }

    // Primitive of the clamped cp, anchored at the lower range end.
    fn clamped_primitive(&self, t: f64) -> f64 {
        let [lo, hi] = self.range;
        if t < lo {
            self.poly(lo) * (t - lo)
        } else if t <= hi {
            self.antiderivative(t) - self.antiderivative(lo)
        } else {
            self.antiderivative(hi) - self.antiderivative(lo) + self.poly(hi) * (t - hi)
        }
    }

    pub fn covers(&self, t: f64) -> bool {
        t >= self.range[0] && t <= self.range[1]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeciesRecord {
    pub phase: Phase,
    pub molar_mass: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<f64>,
    pub cp: CpPolynomial,
    pub dhf: f64,
    pub k_points: Vec<[f64; 2]>,
    #[serde(default)]
    pub mu_points: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeciesFile {
    pub species: BTreeMap<String, SpeciesRecord>,
}

/// Validated per-species data with derived calibration constants.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeciesData {
    pub id: SpeciesId,
    pub molar_mass: f64,
    pub density: f64,
    pub cp: CpPolynomial,
    pub formation_enthalpy: f64,
    pub conductivity_points: Vec<[f64; 2]>,
    pub viscosity_points: Vec<[f64; 2]>,
    /// Sutherland constant fitted through the two viscosity points (gases).
    pub sutherland: Option<Sutherland>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sutherland {
    pub mu0: f64,
    pub t0: f64,
    pub s: f64,
}

impl Sutherland {
    /// Anchors `mu0` at the first point and solves the constant from the second.
    pub fn fit(p0: [f64; 2], p1: [f64; 2]) -> Sutherland {
        let [t0, mu0] = p0;
        let [t1, mu1] = p1;
        let r = (mu1 / mu0) / (t1 / t0).powf(1.5);
        let s = (t0 - r * t1) / (r - 1.0);
        Sutherland { mu0, t0, s }
    }

    pub fn viscosity(&self, t: f64) -> f64 {
        // A negative constant puts a pole at T = -S; stay on the calibrated
        // branch by not going below the anchor temperature.
        let t = if self.s < 0.0 { t.max(self.t0) } else { t };
        self.mu0 * (t / self.t0).powf(1.5) * (self.t0 + self.s) / (t + self.s)
    }
}

/// Lower and upper bound of the temperature range checked for cp > 0.
pub const CP_CHECK_RANGE: [f64; 2] = [200.0, 2500.0];

/// Immutable species database.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeciesTable {
    data: Vec<SpeciesData>,
}

const EMBEDDED_SPECIES: &str = include_str!("../data/species.json");

impl SpeciesTable {
    /// The database shipped with the crate.
    pub fn embedded() -> SpeciesTable {
        SpeciesTable::from_json(EMBEDDED_SPECIES).expect("embedded species database is valid")
    }

    pub fn embedded_file() -> SpeciesFile {
        serde_json::from_str(EMBEDDED_SPECIES).expect("embedded species database parses")
    }

    pub fn from_json(text: &str) -> Result<SpeciesTable, ThermoError> {
        let file: SpeciesFile = serde_json::from_str(text)
            .map_err(|e| ThermoError::InvalidSpeciesData { species: "<file>".into(), reason: e.to_string() })?;
        SpeciesTable::from_file(&file)
    }

    pub fn from_file(file: &SpeciesFile) -> Result<SpeciesTable, ThermoError> {
        for name in file.species.keys() {
            name.parse::<SpeciesId>()?;
        }
        let mut data = Vec::with_capacity(SpeciesId::ALL.len());
        for id in SpeciesId::ALL {
            let rec = file.species.get(id.name()).ok_or_else(|| ThermoError::InvalidSpeciesData {
                species: id.name().into(),
                reason: "missing from database".into(),
            })?;
            data.push(SpeciesData::from_record(id, rec)?);
        }
        Ok(SpeciesTable { data })
    }

    /// Copy of `base` with some records replaced.
    pub fn with_overrides(
        base: &SpeciesFile,
        overrides: &BTreeMap<String, SpeciesRecord>,
    ) -> Result<SpeciesTable, ThermoError> {
        let mut file = base.clone();
        for (k, v) in overrides {
            k.parse::<SpeciesId>()?;
            file.species.insert(k.clone(), v.clone());
        }
        SpeciesTable::from_file(&file)
    }

    pub fn get(&self, id: SpeciesId) -> &SpeciesData {
        &self.data[id.global_index()]
    }

    pub fn solid(&self, i: usize) -> &SpeciesData {
        &self.data[i]
    }

    pub fn gas(&self, i: usize) -> &SpeciesData {
        &self.data[N_SOLID + i]
    }

    pub fn phase_data(&self, phase: Phase) -> &[SpeciesData] {
        match phase {
            Phase::Solid => &self.data[..N_SOLID],
            Phase::Gas => &self.data[N_SOLID..],
        }
    }

    pub fn molar_masses(&self, phase: Phase) -> impl Iterator<Item = f64> + '_ {
        self.phase_data(phase).iter().map(|d| d.molar_mass)
    }
}

fn invalid(id: SpeciesId, reason: impl Into<String>) -> ThermoError {
    ThermoError::InvalidSpeciesData { species: id.name().into(), reason: reason.into() }
}

impl SpeciesData {
    fn from_record(id: SpeciesId, rec: &SpeciesRecord) -> Result<SpeciesData, ThermoError> {
        if rec.phase != id.phase() {
            return Err(invalid(id, format!("declared phase {:?}, expected {:?}", rec.phase, id.phase())));
        }
        if !(rec.molar_mass > 0.0) {
            return Err(invalid(id, "molar mass must be positive"));
        }
        let density = match id.phase() {
            Phase::Solid => match rec.density {
                Some(d) if d > 0.0 => d,
                _ => return Err(invalid(id, "solids need a positive density")),
            },
            Phase::Gas => 0.0,
        };
        let steps = 231;
        for k in 0..=steps {
            let t = CP_CHECK_RANGE[0] + (CP_CHECK_RANGE[1] - CP_CHECK_RANGE[0]) * k as f64 / steps as f64;
            if !(rec.cp.cp(t) > 0.0) {
                return Err(invalid(id, format!("cp is not positive at {t:.1} K")));
            }
        }
        if rec.k_points.is_empty() || rec.k_points.iter().any(|p| !(p[0] > 0.0 && p[1] > 0.0)) {
            return Err(invalid(id, "conductivity points must be positive and non-empty"));
        }
        let sutherland = match id.phase() {
            Phase::Gas => {
                if rec.mu_points.len() < 2 {
                    return Err(invalid(id, "gases need at least two viscosity points"));
                }
                let s = Sutherland::fit(rec.mu_points[0], rec.mu_points[1]);
                if !s.s.is_finite() {
                    return Err(invalid(id, "viscosity points do not determine a Sutherland constant"));
                }
                Some(s)
            }
            Phase::Solid => None,
        };
        let mut k_points = rec.k_points.clone();
        k_points.sort_by(|a, b| a[0].total_cmp(&b[0]));
        Ok(SpeciesData {
            id,
            molar_mass: rec.molar_mass,
            density,
            cp: rec.cp,
            formation_enthalpy: rec.dhf,
            conductivity_points: k_points,
            viscosity_points: rec.mu_points.clone(),
            sutherland,
        })
    }

    /// Thermal conductivity: linear between table points, constant outside.
    pub fn conductivity(&self, t: f64) -> f64 {
        let pts = &self.conductivity_points;
        if pts.len() == 1 || t <= pts[0][0] {
            return pts[0][1];
        }
        let last = pts[pts.len() - 1];
        if t >= last[0] {
            return last[1];
        }
        let i = pts.windows(2).position(|w| t <= w[1][0]).unwrap_or(pts.len() - 2);
        let [t0, k0] = pts[i];
        let [t1, k1] = pts[i + 1];
        k0 + (k1 - k0) * (t - t0) / (t1 - t0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_species_has_one_phase_and_round_trips_by_name() {
        for id in SpeciesId::ALL {
            let parsed: SpeciesId = id.name().parse().unwrap();
            assert_eq!(parsed, id);
            let phase_list: &[SpeciesId] = match id.phase() {
                Phase::Solid => &SpeciesId::SOLIDS,
                Phase::Gas => &SpeciesId::GASES,
            };
            assert_eq!(phase_list[id.index()], id);
        }
        assert!("C5S".parse::<SpeciesId>().is_err());
    }

    #[test]
    fn embedded_database_loads() {
        let t = SpeciesTable::embedded();
        assert_eq!(t.get(SpeciesId::CaO).molar_mass, 0.05608);
        assert_eq!(t.get(SpeciesId::CaO).density, 3340.0);
        for i in 0..N_GAS {
            assert!(t.gas(i).viscosity_points.len() >= 2);
        }
    }

    #[test]
    fn unknown_species_in_file_is_rejected() {
        let mut file = SpeciesTable::embedded_file();
        let rec = file.species["CaO"].clone();
        file.species.insert("Unobtainium".into(), rec);
        assert!(matches!(SpeciesTable::from_file(&file), Err(ThermoError::UnknownSpecies(_))));
    }

    #[test]
    fn negative_cp_is_rejected() {
        let mut file = SpeciesTable::embedded_file();
        file.species.get_mut("CaCO3").unwrap().cp.extrapolation = Extrapolation::Polynomial;
        let err = SpeciesTable::from_file(&file).unwrap_err();
        assert!(err.to_string().contains("CaCO3"), "{err}");
    }

    #[test]
    fn clamped_integral_matches_piecewise_quadrature() {
        let cp = SpeciesTable::embedded().get(SpeciesId::CaCO3).cp;
        let (a, b) = (250.0, 1500.0);
        let n = 200_000;
        let h = (b - a) / n as f64;
        let quad: f64 = (0..n).map(|i| cp.cp(a + (i as f64 + 0.5) * h) * h).sum();
        assert!((cp.integral(a, b) - quad).abs() < 1e-6 * quad.abs());
    }

    #[test]
    fn conductivity_interpolates_and_holds_ends() {
        let t = SpeciesTable::embedded();
        let n2 = t.get(SpeciesId::N2);
        assert_eq!(n2.conductivity(300.0), 25.97e-3);
        assert_eq!(n2.conductivity(250.0), 25.97e-3);
        assert_eq!(n2.conductivity(1500.0), 65.36e-3);
        let mid = n2.conductivity(650.0);
        assert!((mid - 0.5 * (25.97e-3 + 65.36e-3)).abs() < 1e-15);
    }
}
