//! Thermophysical property functions.
//!
//! Enthalpy and volume are homogeneous of order one in the amount vector,
//! so the same functions serve amounts (mol), concentrations (mol/m3) and
//! molar fluxes (mol/(m2 s)).

mod mixture;
pub mod wsgg;

pub use mixture::{mixture_conductivity, mixture_transport, mixture_viscosity, wilke_phi};
pub use wsgg::{gas_emissivity, WsggTable};

use crate::error::ThermoError;
use crate::species::{Phase, SpeciesId, SpeciesTable};

/// Reference temperature of the formation enthalpies, K.
pub const T_REF: f64 = 298.15;
/// Reference pressure, Pa.
pub const P_REF: f64 = 101_325.0;
/// Molar gas constant, J/(mol K).
pub const R_GAS: f64 = 8.314462618;
/// Stefan-Boltzmann constant, W/(m2 K4).
pub const SIGMA: f64 = 5.670374419e-8;
/// Porosity used when a scenario does not set one.
pub const DEFAULT_POROSITY: f64 = 0.4;

/// Temperature window of [`SpeciesTable::temperature_from_energy`].
pub const INVERSION_RANGE: [f64; 2] = [200.0, 2500.0];

/// Smallest porosity of a packing of equal spheres, `1 - pi/(3 sqrt 2)`.
pub fn porosity_lower_bound() -> f64 {
    1.0 - std::f64::consts::PI / (3.0 * std::f64::consts::SQRT_2)
}

impl SpeciesTable {
    pub fn cp_molar(&self, s: SpeciesId, t: f64) -> f64 {
        self.get(s).cp.cp(t)
    }

    /// `sum n_i (dHf_i + int_{T_REF}^{T} cp_i)`, J (or J/m3, W/m2 ...).
    pub fn enthalpy(&self, phase: Phase, t: f64, _p: f64, n: &[f64]) -> f64 {
        self.phase_data(phase)
            .iter()
            .zip(n)
            .filter(|(_, &ni)| ni != 0.0)
            .map(|(d, &ni)| ni * (d.formation_enthalpy + d.cp.integral(T_REF, t)))
            .sum()
    }

    /// `sum n_i cp_i(T)`, the temperature derivative of [`enthalpy`](Self::enthalpy).
    pub fn heat_capacity(&self, phase: Phase, t: f64, n: &[f64]) -> f64 {
        self.phase_data(phase).iter().zip(n).map(|(d, &ni)| ni * d.cp.cp(t)).sum()
    }

    /// Bulk volume for solids (voids included), ideal-gas volume for gases.
    pub fn volume(&self, phase: Phase, t: f64, p: f64, n: &[f64], porosity: f64) -> Result<f64, ThermoError> {
        match phase {
            Phase::Solid => {
                if !(0.0..1.0).contains(&porosity) {
                    return Err(ThermoError::SingularPorosity(porosity));
                }
                let dense: f64 =
                    self.phase_data(Phase::Solid).iter().zip(n).map(|(d, &ni)| ni * d.molar_mass / d.density).sum();
                Ok(dense / (1.0 - porosity))
            }
            Phase::Gas => Ok(n.iter().sum::<f64>() * R_GAS * t / p),
        }
    }

    /// `U = H - P V` for the gas, `U = H` for the solid.
    pub fn internal_energy_density(
        &self,
        phase: Phase,
        t: f64,
        p: f64,
        c: &[f64],
        porosity: f64,
    ) -> Result<f64, ThermoError> {
        let h = self.enthalpy(phase, t, p, c);
        match phase {
            Phase::Solid => Ok(h),
            Phase::Gas => Ok(h - p * self.volume(phase, t, p, c, porosity)?),
        }
    }

    fn energy_slope(&self, phase: Phase, t: f64, c: &[f64]) -> f64 {
        let cp = self.heat_capacity(phase, t, c);
        match phase {
            Phase::Solid => cp,
            Phase::Gas => cp - R_GAS * c.iter().sum::<f64>(),
        }
    }

    /// Inverts [`internal_energy_density`](Self::internal_energy_density) for T.
    ///
    /// Newton on the analytic slope, safeguarded by bisection on
    /// [`INVERSION_RANGE`].
    pub fn temperature_from_energy(
        &self,
        phase: Phase,
        u: f64,
        p: f64,
        c: &[f64],
        porosity: f64,
        t_guess: f64,
    ) -> Result<f64, ThermoError> {
        if !c.iter().any(|&ci| ci > 0.0) {
            return Err(ThermoError::EmptyPhase);
        }
        let resid =
            |t: f64| -> Result<f64, ThermoError> { Ok(self.internal_energy_density(phase, t, p, c, porosity)? - u) };
        let [mut lo, mut hi] = INVERSION_RANGE;
        let f_lo = resid(lo)?;
        let f_hi = resid(hi)?;
        if f_lo > 0.0 || f_hi < 0.0 {
            return Err(ThermoError::Bracket { energy: u, low: f_lo + u, high: f_hi + u });
        }
        let scale = u.abs() + 1.0;
        let mut t = if t_guess > lo && t_guess < hi { t_guess } else { 0.5 * (lo + hi) };
        let max_iter = 100;
        for iter in 0..max_iter {
            let f = resid(t)?;
            if f == 0.0 {
                return Ok(t);
            }
            if f < 0.0 {
                lo = t;
            } else {
                hi = t;
            }
            let slope = self.energy_slope(phase, t, c);
            let mut next = t - f / slope;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = 0.5 * (lo + hi);
            }
            let step = (next - t).abs();
            t = next;
            if step <= 1e-11 * t || (hi - lo) <= 1e-11 * t {
                let f = resid(t)?;
                if f.abs() <= 1e-6 * scale {
                    return Ok(t);
                }
                return Err(ThermoError::Inversion { temperature: t, residual: f, iterations: iter + 1 });
            }
        }
        Err(ThermoError::Inversion { temperature: t, residual: resid(t)?, iterations: max_iter })
    }

    /// Pure-gas viscosity from the Sutherland law calibrated on the table points, Pa s.
    ///
    /// Panics if `s` is not a gas.
    pub fn sutherland_viscosity(&self, s: SpeciesId, t: f64) -> f64 {
        self.get(s).sutherland.expect("viscosity is defined for gases only").viscosity(t)
    }

    /// Series ("layered") conductivity of the porous clinker bed, W/(m K).
    ///
    /// Volume fractions come from `M_i / rho_i`; species conductivities are
    /// evaluated at `t`.
    pub fn solid_conductivity(&self, c_s: &[f64], porosity: f64, k_air: f64, t: f64) -> f64 {
        let data = self.phase_data(Phase::Solid);
        let vol: f64 = data.iter().zip(c_s).map(|(d, &c)| c.max(0.0) * d.molar_mass / d.density).sum();
        let solid_resistance = if vol > 0.0 {
            data.iter()
                .zip(c_s)
                .map(|(d, &c)| (c.max(0.0) * d.molar_mass / d.density / vol) / d.conductivity(t))
                .sum::<f64>()
        } else {
            0.0
        };
        let air_resistance = if porosity > 0.0 { porosity / k_air } else { 0.0 };
        1.0 / (air_resistance + (1.0 - porosity) * solid_resistance)
    }

    /// Mass of an amount vector, kg (or kg/m3 ...).
    pub fn mass(&self, phase: Phase, n: &[f64]) -> f64 {
        self.molar_masses(phase).zip(n).map(|(m, &ni)| m * ni).sum()
    }
}

/// Mole fractions; all zeros for an empty vector.
pub fn mole_fractions<const N: usize>(n: &[f64; N]) -> [f64; N] {
    let total: f64 = n.iter().map(|v| v.max(0.0)).sum();
    let mut x = [0.0; N];
    if total > 0.0 {
        for (xi, ni) in x.iter_mut().zip(n) {
            *xi = ni.max(0.0) / total;
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::species::{GasVec, SolidVec, N_GAS, N_SOLID};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn table() -> SpeciesTable {
        SpeciesTable::embedded()
    }

    fn solid(id: SpeciesId, amount: f64) -> SolidVec {
        let mut v = [0.0; N_SOLID];
        v[id.index()] = amount;
        v
    }

    fn gas(id: SpeciesId, amount: f64) -> GasVec {
        let mut v = [0.0; N_GAS];
        v[id.index()] = amount;
        v
    }

    #[test]
    fn cp_table_values() {
        let t = table();
        assert_eq!(t.cp_molar(SpeciesId::Ar, 500.0), 20.79);
        assert_eq!(t.cp_molar(SpeciesId::Fe2O3, 800.0), 103.9);
        let expected = 71.69 - 3.08e-3 * 298.15 + 0.22e-5 * 298.15 * 298.15;
        assert_relative_eq!(t.cp_molar(SpeciesId::CaO, 298.15), expected, max_relative = 1e-15);
    }

    #[test]
    fn enthalpy_reference_points() {
        let t = table();
        assert_eq!(t.enthalpy(Phase::Gas, 900.0, 2e5, &[0.0; N_GAS]), 0.0);
        let cao = t.get(SpeciesId::CaO).formation_enthalpy;
        assert_eq!(t.enthalpy(Phase::Solid, T_REF, P_REF, &solid(SpeciesId::CaO, 1.0)), cao);
        let ar = t.enthalpy(Phase::Gas, 400.0, P_REF, &gas(SpeciesId::Ar, 1.0));
        assert_relative_eq!(ar, 20.79 * (400.0 - 298.15), max_relative = 1e-12);
    }

    #[test]
    fn enthalpy_matches_quadrature_of_cp() {
        let t = table();
        let n = 20_000;
        for id in SpeciesId::ALL {
            let (a, b) = (T_REF, 1650.0);
            let h = (b - a) / n as f64;
            // Simpson on cp as the independent route
            let mut s = t.cp_molar(id, a) + t.cp_molar(id, b);
            for i in 1..n {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                s += w * t.cp_molar(id, a + i as f64 * h);
            }
            let quad = s * h / 3.0;
            let mut v = vec![0.0; if id.phase() == Phase::Solid { N_SOLID } else { N_GAS }];
            v[id.index()] = 1.0;
            let sensible = t.enthalpy(id.phase(), b, P_REF, &v) - t.get(id).formation_enthalpy;
            assert!((sensible - quad).abs() < 1e-6 * quad.abs(), "{id}: {sensible} vs {quad}");
        }
    }

    #[test]
    fn volume_cases() {
        let t = table();
        let v = t.volume(Phase::Gas, 273.15, 101_325.0, &gas(SpeciesId::N2, 1.0), 0.4).unwrap();
        assert_relative_eq!(v, 0.022414, max_relative = 1e-4);
        let v = t.volume(Phase::Solid, 300.0, P_REF, &solid(SpeciesId::CaO, 1.0), 0.0).unwrap();
        assert_relative_eq!(v, 56.08e-3 / 3340.0, max_relative = 1e-12);
        assert_relative_eq!(v, 1.679e-5, max_relative = 1e-3);
        assert_eq!(t.volume(Phase::Solid, 300.0, P_REF, &[0.0; N_SOLID], 0.4).unwrap(), 0.0);
        assert_eq!(t.volume(Phase::Gas, 300.0, P_REF, &[0.0; N_GAS], 0.4).unwrap(), 0.0);
        assert!(matches!(
            t.volume(Phase::Solid, 300.0, P_REF, &solid(SpeciesId::CaO, 1.0), 1.0),
            Err(ThermoError::SingularPorosity(_))
        ));
    }

    #[test]
    fn internal_energy_cases() {
        let t = table();
        let c = solid(SpeciesId::C3S, 12.0);
        assert_eq!(
            t.internal_energy_density(Phase::Solid, 1100.0, 2e5, &c, 0.4).unwrap(),
            t.enthalpy(Phase::Solid, 1100.0, 2e5, &c)
        );
        assert_eq!(t.internal_energy_density(Phase::Gas, 700.0, P_REF, &[0.0; N_GAS], 0.4).unwrap(), 0.0);
        let ar = gas(SpeciesId::Ar, 1.0);
        let u = t.internal_energy_density(Phase::Gas, 300.0, 101_325.0, &ar, 0.4).unwrap();
        let h = t.enthalpy(Phase::Gas, 300.0, 101_325.0, &ar);
        assert_relative_eq!(u, h - R_GAS * 300.0, max_relative = 1e-12);
    }

    #[test]
    fn temperature_inversion_cases() {
        let t = table();
        let c: GasVec = [0.1, 30.0, 8.0, 0.4, 0.0, 0.3, 0.0];
        let u = t.internal_energy_density(Phase::Gas, 1000.0, 1.2e5, &c, 0.4).unwrap();
        let back = t.temperature_from_energy(Phase::Gas, u, 1.2e5, &c, 0.4, 600.0).unwrap();
        assert!((back - 1000.0).abs() < 1e-6);

        // argon only: U = 20.79 (T - T_REF) - R T, solved by hand
        let ar = gas(SpeciesId::Ar, 2.0);
        let u = 15_000.0;
        let closed = (u / 2.0 + 20.79 * T_REF) / (20.79 - R_GAS);
        let back = t.temperature_from_energy(Phase::Gas, u, P_REF, &ar, 0.4, 300.0).unwrap();
        assert_relative_eq!(back, closed, max_relative = 1e-12);

        let low = t.internal_energy_density(Phase::Gas, 200.0, P_REF, &ar, 0.4).unwrap();
        assert!(matches!(
            t.temperature_from_energy(Phase::Gas, low - 10.0, P_REF, &ar, 0.4, 300.0),
            Err(ThermoError::Bracket { .. })
        ));
        assert!(matches!(
            t.temperature_from_energy(Phase::Gas, 0.0, P_REF, &[0.0; N_GAS], 0.4, 300.0),
            Err(ThermoError::EmptyPhase)
        ));
    }

    #[test]
    fn sutherland_reproduces_table_points() {
        let t = table();
        assert!((t.sutherland_viscosity(SpeciesId::CO2, 300.0) - 15.0e-6).abs() < 1e-18);
        assert!((t.sutherland_viscosity(SpeciesId::CO2, 1000.0) - 41.18e-6).abs() < 1e-12);
        let mid = t.sutherland_viscosity(SpeciesId::N2, 650.0);
        assert!(mid > 17.89e-6 && mid < 41.54e-6);
        for id in SpeciesId::GASES {
            let d = t.get(id);
            for p in &d.viscosity_points[..2] {
                let mu = t.sutherland_viscosity(id, p[0]);
                assert!(((mu - p[1]) / p[1]).abs() < 1e-10, "{id} at {} K", p[0]);
            }
        }
    }

    #[test]
    fn solid_conductivity_cases() {
        let t = table();
        let k = t.solid_conductivity(&solid(SpeciesId::CaO, 5.0), 0.0, 0.05, 900.0);
        assert_relative_eq!(k, 30.1, max_relative = 1e-12);
        let k = t.solid_conductivity(&solid(SpeciesId::C3S, 5.0), 0.4, 0.05, 900.0);
        assert_relative_eq!(k, 1.0 / (0.4 / 0.05 + 0.6 / 3.35), max_relative = 1e-12);
        let k = t.solid_conductivity(&solid(SpeciesId::C3S, 5.0), 1.0 - 1e-12, 0.05, 900.0);
        assert_relative_eq!(k, 0.05, max_relative = 1e-9);
    }

    #[test]
    fn porosity_bound() {
        assert_relative_eq!(porosity_lower_bound(), 0.2595, max_relative = 1e-3);
    }

    fn gas_vec() -> impl Strategy<Value = GasVec> {
        prop::array::uniform7(0.0..50.0f64)
    }

    fn solid_vec() -> impl Strategy<Value = SolidVec> {
        prop::array::uniform9(0.0..5000.0f64)
    }

    proptest! {
        #[test]
        fn enthalpy_and_volume_are_homogeneous(c in solid_vec(), g in gas_vec(), a in 0.0..10.0f64, temp in 250.0..2000.0f64) {
            let t = table();
            let cs: Vec<f64> = c.iter().map(|v| a * v).collect();
            let gs: Vec<f64> = g.iter().map(|v| a * v).collect();
            let hs = t.enthalpy(Phase::Solid, temp, P_REF, &c);
            let hg = t.enthalpy(Phase::Gas, temp, P_REF, &g);
            prop_assert!((t.enthalpy(Phase::Solid, temp, P_REF, &cs) - a * hs).abs() <= 1e-12 * (a * hs).abs().max(1.0));
            prop_assert!((t.enthalpy(Phase::Gas, temp, P_REF, &gs) - a * hg).abs() <= 1e-12 * (a * hg).abs().max(1.0));
            let vs = t.volume(Phase::Solid, temp, P_REF, &c, 0.4).unwrap();
            prop_assert!((t.volume(Phase::Solid, temp, P_REF, &cs, 0.4).unwrap() - a * vs).abs() <= 1e-12 * (a * vs).max(1e-300));
        }

        #[test]
        fn ideal_gas_law_holds(g in gas_vec(), temp in 250.0..2000.0f64, p in 5e4..3e5f64) {
            let t = table();
            let v = t.volume(Phase::Gas, temp, p, &g, 0.4).unwrap();
            let n: f64 = g.iter().sum();
            prop_assert!((p * v - n * R_GAS * temp).abs() <= 1e-12 * (n * R_GAS * temp).max(1e-300));
        }

        #[test]
        fn enthalpy_increases_with_temperature(c in solid_vec(), t1 in 200.0..2400.0f64, dt in 0.1..100.0f64) {
            prop_assume!(c.iter().any(|&v| v > 1e-3));
            let t = table();
            prop_assert!(t.enthalpy(Phase::Solid, t1 + dt, P_REF, &c) > t.enthalpy(Phase::Solid, t1, P_REF, &c));
        }
    }
}
