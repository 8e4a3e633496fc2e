//! Clinker reaction kinetics.
//!
//! Six solid-phase reactions with Arrhenius rate laws:
//!
//! | # | reaction                         |
//! |---|----------------------------------|
//! | 1 | CaCO3 -> CO2 + CaO               |
//! | 2 | 2 CaO + SiO2 -> C2S              |
//! | 3 | CaO + C2S -> C3S                 |
//! | 4 | 3 CaO + Al2O3 -> C3A             |
//! | 5 | 4 CaO + Al2O3 + Fe2O3 -> C4AF    |
//! | 6 | C3S -> C2S + CaO                 |
//!
//! Rates 1-5 are tabulated as kg/(m3 s) of a basis species with
//! concentrations in mol/L; they are converted to mol/(m3 s) of reaction
//! extent through the basis species' molar mass. Rate 6 is first order in
//! s^-1 and acts on C3S in mol/m3 directly.

use serde::{Deserialize, Serialize};

use crate::species::{GasVec, Phase, SolidVec, SpeciesId, SpeciesTable, N_GAS, N_SOLID};
use crate::thermo::R_GAS;

pub const N_REACTIONS: usize = 6;

/// Unit convention of the tabulated rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RateUnits {
    /// kg of `basis` per m3 per s, concentrations in mol/L.
    MassPerVolume { basis: SpeciesId },
    /// s^-1 times concentrations in mol/m3.
    PerSecond,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reaction {
    pub id: usize,
    /// Signed integer coefficients, products positive.
    pub stoichiometry: Vec<(SpeciesId, i64)>,
    pub prefactor: f64,
    /// J/mol.
    pub activation_energy: f64,
    pub orders: Vec<(SpeciesId, f64)>,
    pub units: RateUnits,
}

fn concentration(id: SpeciesId, c_s: &[f64], c_a: &[f64]) -> f64 {
    match id.phase() {
        Phase::Solid => c_s[id.index()],
        Phase::Gas => c_a[id.index()],
    }
}

impl Reaction {
    /// Rate of reaction extent, mol/(m3 s). Negative concentrations count as zero.
    pub fn rate(&self, table: &SpeciesTable, t: f64, c_s: &[f64], c_a: &[f64]) -> f64 {
        if !(t > 0.0) {
            return 0.0;
        }
        let k = self.prefactor * (-self.activation_energy / (R_GAS * t)).exp();
        match self.units {
            RateUnits::MassPerVolume { basis } => {
                let prod: f64 =
                    self.orders.iter().map(|&(s, a)| (concentration(s, c_s, c_a).max(0.0) * 1e-3).powf(a)).product();
                k * prod / table.get(basis).molar_mass
            }
            RateUnits::PerSecond => {
                let prod: f64 = self.orders.iter().map(|&(s, a)| concentration(s, c_s, c_a).max(0.0).powf(a)).product();
                k * prod
            }
        }
    }

    pub fn coefficient(&self, s: SpeciesId) -> i64 {
        self.stoichiometry.iter().find(|(id, _)| *id == s).map_or(0, |(_, n)| *n)
    }
}

/// Ordered reactions and their stoichiometric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct KineticsTable {
    reactions: Vec<Reaction>,
    /// `nu[r][s]` over [`SpeciesId::ALL`].
    nu: Vec<[i64; N_SOLID + N_GAS]>,
}

/// Production rates of both phases, mol/(m3 s).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Production {
    pub rates: [f64; N_REACTIONS],
    pub solid: SolidVec,
    pub gas: GasVec,
}

impl KineticsTable {
    pub fn new(reactions: Vec<Reaction>) -> KineticsTable {
        let nu = reactions
            .iter()
            .map(|r| {
                let mut row = [0; N_SOLID + N_GAS];
                for &(s, n) in &r.stoichiometry {
                    row[s.global_index()] += n;
                }
                row
            })
            .collect();
        KineticsTable { reactions, nu }
    }

    pub fn reactions(&self) -> &[Reaction] {
        &self.reactions
    }

    pub fn stoichiometric_matrix(&self) -> &[[i64; N_SOLID + N_GAS]] {
        &self.nu
    }

    /// Per-reaction element imbalance (products minus reactants).
    pub fn element_imbalance(&self) -> Vec<[i64; 9]> {
        use crate::species::Element;
        self.nu
            .iter()
            .map(|row| {
                let mut out = [0; 9];
                for (e_idx, e) in Element::ALL.iter().enumerate() {
                    out[e_idx] = SpeciesId::ALL.iter().map(|s| row[s.global_index()] * s.atoms(*e)).sum();
                }
                out
            })
            .collect()
    }

    pub fn rates(&self, table: &SpeciesTable, t: f64, c_s: &[f64], c_a: &[f64]) -> [f64; N_REACTIONS] {
        let mut r = [0.0; N_REACTIONS];
        for (ri, rx) in r.iter_mut().zip(&self.reactions) {
            *ri = rx.rate(table, t, c_s, c_a);
        }
        r
    }

    /// Maps a rate vector through the transposed stoichiometric matrix.
    pub fn production_from_rates(&self, rates: &[f64; N_REACTIONS]) -> Production {
        let mut p = Production { rates: *rates, ..Default::default() };
        for (row, &r) in self.nu.iter().zip(rates) {
            if r == 0.0 {
                continue;
            }
            for s in SpeciesId::ALL {
                let n = row[s.global_index()];
                if n == 0 {
                    continue;
                }
                match s.phase() {
                    Phase::Solid => p.solid[s.index()] += n as f64 * r,
                    Phase::Gas => p.gas[s.index()] += n as f64 * r,
                }
            }
        }
        p
    }

    /// All six rates at the solid temperature mapped to species production.
    pub fn production_rates(&self, table: &SpeciesTable, t_s: f64, c_s: &[f64], c_a: &[f64]) -> Production {
        self.production_from_rates(&self.rates(table, t_s, c_s, c_a))
    }
}

/// Enthalpy carried from the solid to the gas by the CO2 released in
/// calcination at rate `r1`, W/m3.
pub fn phase_transition_enthalpy(table: &SpeciesTable, t_s: f64, p: f64, r1: f64) -> f64 {
    let mut n = [0.0; N_GAS];
    n[SpeciesId::CO2.index()] = r1;
    table.enthalpy(Phase::Gas, t_s, p, &n)
}

impl Default for KineticsTable {
    fn default() -> Self {
        KineticsTable::new(default_reactions())
    }
}

/// The six clinker reactions with literature Arrhenius parameters.
pub fn default_reactions() -> Vec<Reaction> {
    use SpeciesId::*;
    let mass = |basis| RateUnits::MassPerVolume { basis };
    vec![
        Reaction {
            id: 1,
            stoichiometry: vec![(CaCO3, -1), (CO2, 1), (CaO, 1)],
            prefactor: 1e8,
            activation_energy: 175.7e3,
            orders: vec![(CaCO3, 1.0)],
            units: mass(CO2),
        },
        Reaction {
            id: 2,
            stoichiometry: vec![(CaO, -2), (SiO2, -1), (C2S, 1)],
            prefactor: 1e7,
            activation_energy: 240e3,
            orders: vec![(CaO, 2.0), (SiO2, 1.0)],
            units: mass(C2S),
        },
        Reaction {
            id: 3,
            stoichiometry: vec![(CaO, -1), (C2S, -1), (C3S, 1)],
            prefactor: 1e9,
            activation_energy: 420e3,
            orders: vec![(CaO, 1.0), (C2S, 1.0)],
            units: mass(C3S),
        },
        Reaction {
            id: 4,
            stoichiometry: vec![(CaO, -3), (Al2O3, -1), (C3A, 1)],
            prefactor: 1e8,
            activation_energy: 310e3,
            orders: vec![(CaO, 3.0), (Al2O3, 1.0)],
            units: mass(C3A),
        },
        Reaction {
            id: 5,
            stoichiometry: vec![(CaO, -4), (Al2O3, -1), (Fe2O3, -1), (C4AF, 1)],
            prefactor: 1e8,
            activation_energy: 330e3,
            orders: vec![(CaO, 4.0), (Al2O3, 1.0), (Fe2O3, 1.0)],
            units: mass(C4AF),
        },
        Reaction {
            id: 6,
            stoichiometry: vec![(C3S, -1), (C2S, 1), (CaO, 1)],
            prefactor: 0.09,
            activation_energy: 96.58e3,
            orders: vec![(C3S, 1.0)],
            units: RateUnits::PerSecond,
        },
    ]
}
