//! Flux and interphase-exchange closures.

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::species::{Phase, SpeciesTable};
use crate::thermo::SIGMA;

/// Geometry of one finite volume plus the particle description.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellGeometry {
    pub dz: f64,
    pub dy: f64,
    pub width: f64,
    /// Mean clinker particle diameter, m.
    pub particle_diameter: f64,
    /// Clinker shape correction factor.
    pub shape_factor: f64,
}

impl CellGeometry {
    pub fn volume(&self) -> f64 {
        self.width * self.dy * self.dz
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let lengths = [self.dz, self.dy, self.width, self.particle_diameter];
        if lengths.iter().any(|&l| !(l > 0.0)) {
            return Err(ModelError::Geometry("cell lengths and particle diameter must be positive".into()));
        }
        if self.particle_diameter >= self.dy {
            return Err(ModelError::Geometry(format!(
                "particle diameter {} m does not fit in a {} m layer",
                self.particle_diameter, self.dy
            )));
        }
        Ok(())
    }
}

/// `N = v C`, componentwise.
pub fn advective_flux(v: f64, c: &[f64], out: &mut [f64]) {
    for (o, &ci) in out.iter_mut().zip(c) {
        *o = v * ci;
    }
}

/// Enthalpy carried by a molar flux, W/m2 (or W for a molar flow).
pub fn enthalpy_flux(table: &SpeciesTable, phase: Phase, t: f64, p: f64, n: &[f64]) -> f64 {
    table.enthalpy(phase, t, p, n)
}

/// Two-point Fourier flux from left to right, W/m2.
pub fn conduction_flux(k: f64, t_left: f64, t_right: f64, distance: f64) -> f64 {
    -k * (t_right - t_left) / distance
}

/// Interface conductivity between two cells of equal half-width.
pub fn harmonic_mean(a: f64, b: f64) -> f64 {
    if a <= 0.0 || b <= 0.0 {
        0.0
    } else {
        2.0 * a * b / (a + b)
    }
}

/// Density of the gas within its own volume fraction, kg/m3.
pub fn air_density(table: &SpeciesTable, c_a: &[f64], vhat_a: f64) -> Result<f64, ModelError> {
    if !(vhat_a > 0.0) {
        return Err(ModelError::Geometry(format!("gas volume fraction {vhat_a} must be positive")));
    }
    Ok(table.mass(Phase::Gas, c_a) / vhat_a)
}

/// Total surface of spherical particles filling `v_s`, m2 (`6 V_s / D_p`).
pub fn clinker_surface_area(v_s: f64, particle_diameter: f64) -> f64 {
    let d = particle_diameter;
    v_s / (std::f64::consts::PI / 6.0 * d * d * d) * (std::f64::consts::PI * d * d)
}

/// Vertical and axial hydraulic diameters of the gas channel in a cell, m.
pub fn hydraulic_diameters(geom: &CellGeometry, v_a: f64, v_s: f64) -> (f64, f64) {
    let a_yz = geom.dz * geom.dy;
    let a_wy = geom.width * geom.dy;
    let a_wz = geom.width * geom.dz;
    let a_c = clinker_surface_area(v_s.max(0.0), geom.particle_diameter);
    let d_y = 4.0 * v_a / (2.0 * a_yz + 2.0 * a_wy + a_c);
    let d_z = 4.0 * v_a / (2.0 * a_yz + 2.0 * a_wz + a_c);
    (d_y, d_z)
}

/// Turbulent Darcy-Weisbach velocity with the Blasius friction factor
/// `f_D = 0.316 Re^-1/4`, scaled by `friction_scale`. Positive along +i.
pub fn darcy_velocity(dp: f64, di: f64, d_h: f64, mu: f64, rho: f64, friction_scale: f64) -> f64 {
    let grad = dp / di;
    if grad == 0.0 {
        return 0.0;
    }
    let coef = 2.0 / (0.316 * friction_scale) * (d_h.powi(5) / (mu * rho.powi(3))).powf(0.25);
    -(coef * grad.abs()).powf(4.0 / 7.0) * grad.signum()
}

/// [`darcy_velocity`] with the singular slope at zero gradient removed:
/// `|g|^(4/7)` becomes `|g| (g^2 + floor^2)^(-3/14)`, which is odd,
/// monotone and identical to the original for `|g| >> floor`.
pub fn darcy_velocity_smoothed(
    dp: f64,
    di: f64,
    d_h: f64,
    mu: f64,
    rho: f64,
    friction_scale: f64,
    grad_floor: f64,
) -> f64 {
    let grad = dp / di;
    let coef = (2.0 / (0.316 * friction_scale) * (d_h.powi(5) / (mu * rho.powi(3))).powf(0.25)).powf(4.0 / 7.0);
    -coef * grad * (grad * grad + grad_floor * grad_floor).powf(-3.0 / 14.0)
}

/// Inputs to the solid-gas heat exchange of one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExchangeInputs {
    pub particle_diameter: f64,
    pub shape_factor: f64,
    pub vhat_a: f64,
    pub t_s: f64,
    pub t_a: f64,
    /// Bed conductivity, W/(m K).
    pub k_s: f64,
    /// Gas viscosity, Pa s.
    pub mu_a: f64,
    /// Gas conductivity, W/(m K).
    pub k_a: f64,
    /// Gas density, kg/m3.
    pub rho_a: f64,
    /// Vertical gas velocity through the cell, m/s (sign ignored).
    pub v_y: f64,
    /// Heat capacity entering the Prandtl number, J/(kg K).
    pub cp_prandtl: f64,
    pub emissivity_solid: f64,
    pub emissivity_gas: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Exchange {
    /// Specific surface, m2/m3.
    pub specific_area: f64,
    pub prandtl: f64,
    pub reynolds: f64,
    pub nusselt: f64,
    /// Heat transfer coefficient, W/(m2 K).
    pub beta: f64,
    /// Convective solid-to-gas heat, W/m3.
    pub convective: f64,
    /// Radiative solid-to-gas heat, W/m3.
    pub radiative: f64,
}

impl Exchange {
    pub fn total(&self) -> f64 {
        self.convective + self.radiative
    }
}

/// Convective (Newton) and radiative solid-to-gas heat per unit cell volume.
pub fn interphase_heat(inp: &ExchangeInputs) -> Exchange {
    let dp = inp.particle_diameter;
    let specific_area = 6.0 / dp * (1.0 - inp.vhat_a);
    let prandtl = inp.cp_prandtl * inp.mu_a / inp.k_a;
    let reynolds = inp.rho_a * inp.v_y.abs() * dp / inp.mu_a;
    let nusselt = 2.0 + 1.8 * prandtl.cbrt() * reynolds.sqrt();
    let beta = inp.k_s * nusselt / (dp + 0.5 * inp.shape_factor * dp * nusselt);
    let convective = specific_area * beta * (inp.t_s - inp.t_a);
    let radiative =
        specific_area * SIGMA * (inp.emissivity_solid * inp.t_s.powi(4) - inp.emissivity_gas * inp.t_a.powi(4));
    Exchange { specific_area, prandtl, reynolds, nusselt, beta, convective, radiative }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::species::{SpeciesId, N_GAS};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn advection_cases() {
        let mut out = [1.0; 2];
        advective_flux(0.0, &[5.0, 7.0], &mut out);
        assert_eq!(out, [0.0, 0.0]);
        advective_flux(0.017, &[100.0, 0.0], &mut out);
        assert_relative_eq!(out[0], 1.7, max_relative = 1e-14);
        advective_flux(-0.5, &[2.0, 1.0], &mut out);
        assert!(out[0] < 0.0);
    }

    #[test]
    fn enthalpy_flux_is_homogeneous() {
        let t = SpeciesTable::embedded();
        assert_eq!(enthalpy_flux(&t, Phase::Gas, 900.0, 1e5, &[0.0; N_GAS]), 0.0);
        let c = [0.0, 30.0, 8.0, 0.3, 0.0, 0.4, 0.0];
        let mut n = [0.0; N_GAS];
        advective_flux(2.5, &c, &mut n);
        let h = t.enthalpy(Phase::Gas, 900.0, 1e5, &c);
        assert_relative_eq!(enthalpy_flux(&t, Phase::Gas, 900.0, 1e5, &n), 2.5 * h, max_relative = 1e-13);
    }

    #[test]
    fn conduction_cases() {
        assert_eq!(conduction_flux(3.0, 500.0, 500.0, 0.2), 0.0);
        assert_eq!(conduction_flux(1.0, 300.0, 310.0, 1.0), -10.0);
        assert_relative_eq!(harmonic_mean(0.7, 0.7), 0.7, max_relative = 1e-15);
    }

    #[test]
    fn air_density_cases() {
        let t = SpeciesTable::embedded();
        assert_eq!(air_density(&t, &[0.0; N_GAS], 1.0).unwrap(), 0.0);
        let mut c = [0.0; N_GAS];
        c[SpeciesId::N2.index()] = 40.0;
        let rho = air_density(&t, &c, 1.0).unwrap();
        assert_relative_eq!(rho, 1.12056, max_relative = 1e-12);
        assert_relative_eq!(air_density(&t, &c, 0.5).unwrap(), 2.0 * rho, max_relative = 1e-15);
        assert!(air_density(&t, &c, 0.0).is_err());
    }

    fn geom() -> CellGeometry {
        CellGeometry { dz: 3.6, dy: 3.0, width: 4.0, particle_diameter: 0.04, shape_factor: 0.25 }
    }

    #[test]
    fn hydraulic_diameter_cases() {
        let g = geom();
        let (dy, dz) = hydraulic_diameters(&g, 10.0, 0.0);
        assert_relative_eq!(dy, 40.0 / (2.0 * 3.6 * 3.0 + 2.0 * 4.0 * 3.0), max_relative = 1e-14);
        assert_relative_eq!(dz, 40.0 / (2.0 * 3.6 * 3.0 + 2.0 * 4.0 * 3.6), max_relative = 1e-14);
        assert_relative_eq!(clinker_surface_area(1.0, 0.04), 150.0, max_relative = 1e-12);
        let (dy1, dz1) = hydraulic_diameters(&g, 5.0, 2.0);
        let (dy2, dz2) = hydraulic_diameters(&g, 10.0, 2.0);
        assert_relative_eq!(dy2, 2.0 * dy1, max_relative = 1e-14);
        assert_relative_eq!(dz2, 2.0 * dz1, max_relative = 1e-14);
    }

    #[test]
    fn darcy_anchor() {
        assert_eq!(darcy_velocity(0.0, 1.0, 0.1, 3e-5, 0.5, 100.0), 0.0);
        assert!(darcy_velocity(5.0, 1.0, 0.1, 3e-5, 0.5, 100.0) < 0.0);
        // |dP|/di = 10 Pa/m, flow toward lower pressure (dP < 0 along +i)
        let v = darcy_velocity(-10.0, 1.0, 0.1, 3e-5, 0.5, 100.0);
        let inner: f64 = 2.0 / 31.6 * (1e-5_f64 / (3e-5 * 0.125)).sqrt().sqrt() * 10.0;
        let expected = inner.powf(4.0 / 7.0);
        assert_relative_eq!(v, expected, max_relative = 1e-12);
    }

    #[test]
    fn smoothed_darcy_converges_to_exact_law() {
        for dp in [-300.0, -3.0, 0.5, 40.0] {
            let exact = darcy_velocity(dp, 1.5, 0.2, 4e-5, 0.4, 100.0);
            let smooth = darcy_velocity_smoothed(dp, 1.5, 0.2, 4e-5, 0.4, 100.0, 1e-4);
            assert_relative_eq!(smooth, exact, max_relative = 1e-6);
        }
        assert_eq!(darcy_velocity_smoothed(0.0, 1.5, 0.2, 4e-5, 0.4, 100.0, 1e-4), 0.0);
    }

    fn inputs() -> ExchangeInputs {
        ExchangeInputs {
            particle_diameter: 0.04,
            shape_factor: 0.25,
            vhat_a: 0.8,
            t_s: 1200.0,
            t_a: 900.0,
            k_s: 0.2,
            mu_a: 4e-5,
            k_a: 0.06,
            rho_a: 0.4,
            v_y: 2.0,
            cp_prandtl: 1300.0,
            emissivity_solid: 0.9,
            emissivity_gas: 0.1,
        }
    }

    #[test]
    fn exchange_cases() {
        let mut inp = inputs();
        inp.t_a = inp.t_s;
        let ex = interphase_heat(&inp);
        assert_eq!(ex.convective, 0.0);
        assert!(ex.radiative > 0.0);

        let mut inp = inputs();
        inp.v_y = 0.0;
        assert_eq!(interphase_heat(&inp).nusselt, 2.0);

        let mut inp = inputs();
        inp.vhat_a = 1.0;
        let ex = interphase_heat(&inp);
        assert_eq!((ex.specific_area, ex.convective, ex.radiative), (0.0, 0.0, 0.0));
    }

    #[test]
    fn exchange_by_hand() {
        let inp = inputs();
        let ex = interphase_heat(&inp);
        let a = 150.0 * 0.2;
        let pr: f64 = 1300.0 * 4e-5 / 0.06;
        let re: f64 = 0.4 * 2.0 * 0.04 / 4e-5;
        let nu = 2.0 + 1.8 * pr.powf(1.0 / 3.0) * re.sqrt();
        let beta = 0.2 * nu / (0.04 + 0.5 * 0.25 * 0.04 * nu);
        assert_relative_eq!(ex.convective, a * beta * 300.0, max_relative = 1e-12);
        let rad = a * 5.670374419e-8 * (0.9 * 1200f64.powi(4) - 0.1 * 900f64.powi(4));
        assert_relative_eq!(ex.radiative, rad, max_relative = 1e-12);
    }

    proptest! {
        #[test]
        fn darcy_is_odd_and_monotone(dp in 0.01..5000.0f64, d_h in 0.01..2.0f64, scale in 1.0..200.0f64) {
            let v = darcy_velocity(dp, 1.2, d_h, 4e-5, 0.5, scale);
            prop_assert_eq!(darcy_velocity(-dp, 1.2, d_h, 4e-5, 0.5, scale), -v);
            prop_assert!(darcy_velocity(dp * 1.1, 1.2, d_h, 4e-5, 0.5, scale).abs() > v.abs());
            prop_assert!(darcy_velocity(dp, 1.2, d_h * 1.1, 4e-5, 0.5, scale).abs() > v.abs());
        }

        #[test]
        fn nusselt_and_area_bounds(vhat in 0.0..=1.0f64, v in -20.0..20.0f64) {
            let mut inp = inputs();
            inp.vhat_a = vhat;
            inp.v_y = v;
            let ex = interphase_heat(&inp);
            prop_assert!(ex.nusselt >= 2.0);
            prop_assert!(ex.specific_area >= 0.0 && ex.specific_area <= 6.0 / 0.04 + 1e-12);
        }
    }
}
