//! Finite-volume assembly of the cooler DAE.
//!
//! Differential states per cell are the solid and gas concentrations and the
//! two internal-energy densities; algebraic states are `T_s`, `T_a` and `P`.
//! Cells are numbered segment-major, layer 0 being the bed.

mod boundary;
mod flux;
mod grid;
mod state;

pub use boundary::{BoundarySpec, ClinkerInflow, ExternalPressures, FanInflow, PressureId};
pub use flux::{BoundaryTotals, Face, FaceKind, FluxField};
pub use grid::*;
pub use state::{pack, unpack, AlgebraicState, CellState};

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, SolverError};
use crate::kinetics::{phase_transition_enthalpy, KineticsTable, N_REACTIONS};
use crate::solver::{BlockStructure, DaeSystem};
use crate::species::{GasVec, Phase, SolidVec, SpeciesId, SpeciesTable, N_GAS, N_SOLID};
use crate::thermo::{gas_emissivity, mixture_transport, mole_fractions, WsggTable, INVERSION_RANGE, R_GAS};
use crate::transport::{
    conduction_flux, darcy_velocity_smoothed, harmonic_mean, hydraulic_diameters, interphase_heat, CellGeometry,
    Exchange, ExchangeInputs,
};

/// Heat capacity used in the Prandtl number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrandtlBasis {
    /// Specific heat of the clinker mixture, J/(kg K).
    #[default]
    Clinker,
    /// Specific heat of the gas mixture, J/(kg K).
    Air,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub particle_diameter: f64,
    pub shape_factor: f64,
    pub porosity: f64,
    pub friction_scale: f64,
    pub emissivity_solid: f64,
    /// Radiation path length, m.
    pub path_length: f64,
    pub prandtl_basis: PrandtlBasis,
    /// Pressure gradient below which the Darcy law is smoothed, Pa/m.
    pub darcy_gradient_floor: f64,
}

impl ModelParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        let cfg = |m: &str| Err(ModelError::Configuration(m.into()));
        if !(self.particle_diameter > 0.0 && self.shape_factor >= 0.0) {
            return cfg("particle diameter must be positive and shape factor non-negative");
        }
        if !(0.0..1.0).contains(&self.porosity) {
            return cfg("porosity must lie in [0, 1)");
        }
        if !(self.friction_scale > 0.0) {
            return cfg("friction scale must be positive");
        }
        if !(0.0..=1.0).contains(&self.emissivity_solid) {
            return cfg("solid emissivity must lie in [0, 1]");
        }
        if !(self.path_length >= 0.0) || !(self.darcy_gradient_floor > 0.0) {
            return cfg("path length must be non-negative and the Darcy floor positive");
        }
        Ok(())
    }
}

/// Properties of one cell evaluated once per residual call.
#[derive(Debug, Clone, Copy, Default)]
struct CellProps {
    c_s: SolidVec,
    c_a: GasVec,
    t_s: f64,
    t_a: f64,
    p: f64,
    bed: bool,
    vhat_s: f64,
    vhat_a: f64,
    rho: f64,
    mu: f64,
    k_a: f64,
    k_s: f64,
    d_hy: f64,
    d_hz: f64,
    eps_a: f64,
    n_gas: f64,
}

/// Per-cell source terms and velocities, for diagnostics and output.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CellDiagnostics {
    pub exchange: Exchange,
    /// W/m3 carried from solid to gas with calcination CO2.
    pub j_sa: f64,
    pub rates: [f64; N_REACTIONS],
    pub v_y: f64,
    pub emissivity_gas: f64,
    pub k_s: f64,
    pub k_a: f64,
    pub mu_a: f64,
}

/// Energy source terms of the whole cooler, W. The exchange and phase
/// transition parts appear once per phase with opposite sign.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergySources {
    pub exchange_solid: f64,
    pub exchange_gas: f64,
    pub transition_solid: f64,
    pub transition_gas: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoolerModel {
    pub species: SpeciesTable,
    pub kinetics: KineticsTable,
    pub wsgg: WsggTable,
    pub grid: GridSpec,
    pub boundary: BoundarySpec,
    pub params: ModelParams,
}

/// Residual pieces for one state.
#[derive(Debug, Clone, PartialEq)]
pub struct Assembly {
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub fluxes: FluxField,
    pub cells: Vec<CellDiagnostics>,
    pub sources: EnergySources,
}

impl CoolerModel {
    pub fn new(
        species: SpeciesTable,
        kinetics: KineticsTable,
        wsgg: WsggTable,
        grid: GridSpec,
        boundary: BoundarySpec,
        params: ModelParams,
    ) -> Result<CoolerModel, ModelError> {
        grid.validate()?;
        boundary.validate(grid.n_v)?;
        params.validate()?;
        let model = CoolerModel { species, kinetics, wsgg, grid, boundary, params };
        for j in 0..model.grid.n_y {
            model.geometry(j).validate()?;
        }
        Ok(model)
    }

    pub fn n_x(&self) -> usize {
        self.grid.n_cells() * NX_CELL
    }

    pub fn n_y(&self) -> usize {
        self.grid.n_cells() * NY_CELL
    }

    pub fn geometry(&self, layer: usize) -> CellGeometry {
        CellGeometry {
            dz: self.grid.dz(),
            dy: self.grid.layer_heights()[layer],
            width: self.grid.width,
            particle_diameter: self.params.particle_diameter,
            shape_factor: self.params.shape_factor,
        }
    }

    fn props(&self, x: &[f64], y: &[f64], cell: usize) -> CellProps {
        let cs = CellState::read(x, cell);
        let al = AlgebraicState::read(y, cell);
        let (_, j) = self.grid.coords(cell);
        let mut p = CellProps {
            c_s: cs.c_s.map(|c| c.max(0.0)),
            c_a: cs.c_a.map(|c| c.max(0.0)),
            t_s: al.t_s,
            t_a: al.t_a,
            p: al.p,
            bed: j == 0,
            ..Default::default()
        };
        let t_prop = |t: f64| t.clamp(INVERSION_RANGE[0], INVERSION_RANGE[1]);
        let geom = self.geometry(j);
        let volume = geom.volume();
        p.vhat_s = if p.bed {
            self.species.volume(Phase::Solid, p.t_s, p.p, &p.c_s, self.params.porosity).unwrap_or(0.0)
        } else {
            0.0
        };
        p.vhat_a = (1.0 - p.vhat_s).max(1e-6);
        p.n_gas = p.c_a.iter().sum();
        if p.n_gas > 0.0 {
            let x_a = mole_fractions(&p.c_a);
            let (mu, k) = mixture_transport(&self.species, &x_a, t_prop(p.t_a));
            p.mu = mu;
            p.k_a = k;
            p.rho = self.species.mass(Phase::Gas, &p.c_a) / p.vhat_a;
            p.eps_a = gas_emissivity(
                &self.wsgg,
                x_a[SpeciesId::H2O.index()],
                x_a[SpeciesId::CO2.index()],
                t_prop(p.t_a),
                p.p.max(0.0),
                self.params.path_length,
            );
        }
        if p.bed {
            p.k_s = self.species.solid_conductivity(&p.c_s, self.params.porosity, p.k_a.max(1e-3), t_prop(p.t_s));
        }
        let (d_hy, d_hz) = hydraulic_diameters(&geom, p.vhat_a * volume, p.vhat_s * volume);
        p.d_hy = d_hy;
        p.d_hz = d_hz;
        p
    }

    /// Darcy velocity from `a` to `b` over distance `di`; zero if either side has no gas.
    fn face_velocity(&self, a: &CellProps, b: &CellProps, di: f64, d_h: f64) -> f64 {
        let mu = 0.5 * (a.mu + b.mu);
        let rho = 0.5 * (a.rho + b.rho);
        if !(mu > 0.0 && rho > 0.0 && d_h > 0.0) {
            return 0.0;
        }
        darcy_velocity_smoothed(
            b.p - a.p,
            di,
            d_h,
            mu,
            rho,
            self.params.friction_scale,
            self.params.darcy_gradient_floor,
        )
    }

    fn gas_face(&self, face: &mut Face, v: f64, up: &CellProps) {
        face.velocity = v;
        for i in 0..N_GAS {
            face.n_a[i] = v * up.c_a[i];
        }
        face.h_a = self.species.enthalpy(Phase::Gas, up.t_a, up.p, &face.n_a);
    }

    fn build_fluxes(&self, props: &[CellProps]) -> FluxField {
        let g = &self.grid;
        let heights = g.layer_heights();
        let dz = g.dz();
        let w = g.width;
        let mut faces = Vec::with_capacity(g.n_cells() * 3 + 2 * g.n_v + 2);

        // clinker inflow and grate transport along the bed
        let mut inflow = Face::new(FaceKind::ClinkerInflow, None, Some(g.cell(0, 0)), w * heights[0]);
        let t_in = self.boundary.clinker.temperature;
        for i in 0..N_SOLID {
            inflow.n_s[i] = self.boundary.clinker.molar_flow[i] / inflow.area;
        }
        inflow.h_s = self.species.enthalpy(Phase::Solid, t_in, props[0].p, &inflow.n_s);
        faces.push(inflow);
        for k in 0..g.n_v {
            let a = g.cell(k, 0);
            let last = k + 1 == g.n_v;
            let to = if last { None } else { Some(g.cell(k + 1, 0)) };
            let kind = if last { FaceKind::SolidOutflow } else { FaceKind::SolidAxial };
            let mut f = Face::new(kind, Some(a), to, w * heights[0]);
            let v = self.boundary.grate_speed[k];
            let pa = &props[a];
            f.velocity = v;
            for i in 0..N_SOLID {
                f.n_s[i] = v * pa.c_s[i];
            }
            f.h_s = self.species.enthalpy(Phase::Solid, pa.t_s, pa.p, &f.n_s);
            if let Some(b) = to {
                let kf = harmonic_mean(pa.k_s, props[b].k_s);
                f.q_s = conduction_flux(kf, pa.t_s, props[b].t_s, dz);
            }
            faces.push(f);
        }

        // gas between neighbouring segments
        for k in 0..g.n_v.saturating_sub(1) {
            for (j, &dy) in heights.iter().enumerate() {
                let (a, b) = (g.cell(k, j), g.cell(k + 1, j));
                let (pa, pb) = (&props[a], &props[b]);
                let mut f = Face::new(FaceKind::GasAxial, Some(a), Some(b), w * dy);
                let v = self.face_velocity(pa, pb, dz, harmonic_mean(pa.d_hz, pb.d_hz));
                self.gas_face(&mut f, v, if v >= 0.0 { pa } else { pb });
                f.q_a = conduction_flux(harmonic_mean(pa.k_a, pb.k_a), pa.t_a, pb.t_a, dz);
                faces.push(f);
            }
        }

        for k in 0..g.n_v {
            // fans under the bed
            let bed = g.cell(k, 0);
            let mut f = Face::new(FaceKind::FanInflow, None, Some(bed), w * dz);
            let n = self.boundary.fan_molar_flow(&self.species, k);
            for (fa, ni) in f.n_a.iter_mut().zip(n) {
                *fa = ni / f.area;
            }
            let pb = &props[bed];
            f.velocity = if pb.n_gas > 0.0 { f.n_a.iter().sum::<f64>() / pb.n_gas } else { 0.0 };
            f.h_a = self.species.enthalpy(Phase::Gas, self.boundary.fans[k].temperature, pb.p, &f.n_a);
            faces.push(f);

            // between layers
            for j in 0..g.n_y - 1 {
                let (a, b) = (g.cell(k, j), g.cell(k, j + 1));
                let (pa, pb) = (&props[a], &props[b]);
                let di = 0.5 * (heights[j] + heights[j + 1]);
                let mut f = Face::new(FaceKind::GasVertical, Some(a), Some(b), w * dz);
                let v = self.face_velocity(pa, pb, di, harmonic_mean(pa.d_hy, pb.d_hy));
                self.gas_face(&mut f, v, if v >= 0.0 { pa } else { pb });
                f.q_a = conduction_flux(harmonic_mean(pa.k_a, pb.k_a), pa.t_a, pb.t_a, di);
                faces.push(f);
            }

            // top face against the mapped external pressure
            let top = g.cell(k, g.n_y - 1);
            let pt = &props[top];
            let p_ext = self.boundary.external_pressures.get(self.boundary.pressure_map[k]);
            let t_back = self.boundary.backflow_temperature;
            let outside = CellProps {
                c_a: self.boundary.air_composition.map(|x| x * p_ext / (R_GAS * t_back)),
                t_a: t_back,
                p: p_ext,
                // the outlet law uses the cell's own gas properties
                mu: pt.mu,
                rho: pt.rho,
                ..Default::default()
            };
            let mut f = Face::new(FaceKind::TopOutlet, Some(top), None, w * dz);
            let v = self.face_velocity(pt, &outside, 0.5 * heights[g.n_y - 1], pt.d_hy);
            self.gas_face(&mut f, v, if v >= 0.0 { pt } else { &outside });
            faces.push(f);
        }
        FluxField { faces }
    }

    /// Face list for the state `(x, y)`.
    pub fn flux_field(&self, x: &[f64], y: &[f64]) -> FluxField {
        let props: Vec<CellProps> = (0..self.grid.n_cells()).map(|c| self.props(x, y, c)).collect();
        self.build_fluxes(&props)
    }

    /// Faces on the cooler boundary only.
    pub fn boundary_fluxes(&self, x: &[f64], y: &[f64]) -> FluxField {
        let mut field = self.flux_field(x, y);
        field.faces.retain(|f| f.is_boundary());
        field
    }

    /// Full residual evaluation with diagnostics.
    pub fn assemble(&self, x: &[f64], y: &[f64]) -> Result<Assembly, ModelError> {
        let n = self.grid.n_cells();
        if x.len() != n * NX_CELL || y.len() != n * NY_CELL {
            return Err(ModelError::Configuration(format!(
                "state sizes {}/{} do not match {} cells",
                x.len(),
                y.len(),
                n
            )));
        }
        let props: Vec<CellProps> = (0..n).map(|c| self.props(x, y, c)).collect();
        let fluxes = self.build_fluxes(&props);
        let mut f = vec![0.0; n * NX_CELL];
        let volumes: Vec<f64> = (0..n).map(|c| self.grid.cell_volume(self.grid.coords(c).1)).collect();

        let mut v_bottom = vec![0.0; n];
        let mut v_top = vec![0.0; n];
        for face in &fluxes.faces {
            match face.kind {
                FaceKind::FanInflow => v_bottom[face.to.unwrap()] = face.velocity,
                FaceKind::GasVertical => {
                    v_top[face.from.unwrap()] = face.velocity;
                    v_bottom[face.to.unwrap()] = face.velocity;
                }
                FaceKind::TopOutlet => v_top[face.from.unwrap()] = face.velocity,
                _ => {}
            }
            let mut apply = |cell: usize, sign: f64| {
                let s = sign * face.area / volumes[cell];
                let b = &mut f[cell * NX_CELL..(cell + 1) * NX_CELL];
                for i in 0..N_SOLID {
                    b[X_CS + i] += s * face.n_s[i];
                }
                for i in 0..N_GAS {
                    b[X_CA + i] += s * face.n_a[i];
                }
                b[X_US] += s * (face.h_s + face.q_s);
                b[X_UA] += s * (face.h_a + face.q_a);
            };
            if let Some(c) = face.from {
                apply(c, -1.0);
            }
            if let Some(c) = face.to {
                apply(c, 1.0);
            }
        }

        let mut cells = vec![CellDiagnostics::default(); n];
        let mut sources = EnergySources::default();
        for (c, p) in props.iter().enumerate() {
            let d = &mut cells[c];
            d.k_a = p.k_a;
            d.mu_a = p.mu;
            d.emissivity_gas = p.eps_a;
            d.v_y = 0.5 * (v_bottom[c] + v_top[c]);
            if !p.bed {
                continue;
            }
            d.k_s = p.k_s;
            let b = &mut f[c * NX_CELL..(c + 1) * NX_CELL];
            let rates = self.kinetics.rates(&self.species, p.t_s, &p.c_s, &p.c_a);
            let prod = self.kinetics.production_from_rates(&rates);
            for i in 0..N_SOLID {
                b[X_CS + i] += prod.solid[i];
            }
            for i in 0..N_GAS {
                b[X_CA + i] += prod.gas[i];
            }
            let j_sa = phase_transition_enthalpy(&self.species, p.t_s, p.p, rates[0]);
            let ex = if p.n_gas > 0.0 && p.k_a > 0.0 {
                let mass = self.species.mass(Phase::Solid, &p.c_s);
                let cp_prandtl = match self.params.prandtl_basis {
                    PrandtlBasis::Clinker if mass > 0.0 => {
                        self.species.heat_capacity(Phase::Solid, p.t_s, &p.c_s) / mass
                    }
                    PrandtlBasis::Clinker => 0.0,
                    PrandtlBasis::Air => {
                        self.species.heat_capacity(Phase::Gas, p.t_a, &p.c_a) / self.species.mass(Phase::Gas, &p.c_a)
                    }
                };
                interphase_heat(&ExchangeInputs {
                    particle_diameter: self.params.particle_diameter,
                    shape_factor: self.params.shape_factor,
                    vhat_a: p.vhat_a.min(1.0),
                    t_s: p.t_s,
                    t_a: p.t_a,
                    k_s: p.k_s,
                    mu_a: p.mu,
                    k_a: p.k_a,
                    rho_a: p.rho,
                    v_y: d.v_y,
                    cp_prandtl,
                    emissivity_solid: self.params.emissivity_solid,
                    emissivity_gas: p.eps_a,
                })
            } else {
                Exchange::default()
            };
            let q = ex.total();
            b[X_US] -= q + j_sa;
            b[X_UA] += q + j_sa;
            let vol = volumes[c];
            sources.exchange_solid -= q * vol;
            sources.exchange_gas += q * vol;
            sources.transition_solid -= j_sa * vol;
            sources.transition_gas += j_sa * vol;
            d.exchange = ex;
            d.j_sa = j_sa;
            d.rates = rates;
        }

        let g = self.algebraic_residual(x, y);
        self.check_finite(&f, NX_CELL, |i| match i {
            X_US => "solid energy balance".into(),
            X_UA => "gas energy balance".into(),
            i if i < X_CA => format!("{} balance", SpeciesId::SOLIDS[i].name()),
            i => format!("{} balance", SpeciesId::GASES[i - X_CA].name()),
        })?;
        self.check_finite(&g, NY_CELL, |i| {
            ["solid energy relation", "gas energy relation", "volume closure"][i].into()
        })?;
        Ok(Assembly { f, g, fluxes, cells, sources })
    }

    fn check_finite(&self, v: &[f64], stride: usize, name: impl Fn(usize) -> String) -> Result<(), ModelError> {
        if let Some(i) = v.iter().position(|e| !e.is_finite()) {
            let cell = i / stride;
            let (segment, layer) = self.grid.coords(cell);
            return Err(ModelError::NonFinite { cell, segment, layer, equation: name(i % stride) });
        }
        Ok(())
    }

    /// `dx/dt`.
    pub fn assemble_f(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>, ModelError> {
        Ok(self.assemble(x, y)?.f)
    }

    /// Scaled algebraic residuals; see [`algebraic_residual`](Self::algebraic_residual).
    pub fn assemble_g(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>, ModelError> {
        let g = self.algebraic_residual(x, y);
        self.check_finite(&g, NY_CELL, |i| {
            ["solid energy relation", "gas energy relation", "volume closure"][i].into()
        })?;
        Ok(g)
    }

    /// Per cell: `(U_s - H_s)/(|U_s| + 1)`, `(U_a - H_a + P V_a)/(|U_a| + 1)`
    /// and `V_a + V_s - 1`. Cells without solids replace the first relation
    /// with `(T_s - T_a)/1000` to keep the solid temperature defined.
    pub fn algebraic_residual(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let n = self.grid.n_cells();
        let mut g = vec![0.0; n * NY_CELL];
        for c in 0..n {
            let s = CellState::read(x, c);
            let a = AlgebraicState::read(y, c);
            let bed = self.grid.coords(c).1 == 0;
            let h_a = self.species.enthalpy(Phase::Gas, a.t_a, a.p, &s.c_a);
            let pv_a = s.c_a.iter().sum::<f64>() * R_GAS * a.t_a;
            let vhat_s = if bed {
                let dense: f64 =
                    self.species.solid_data().iter().zip(&s.c_s).map(|(d, &ci)| ci * d.molar_mass / d.density).sum();
                dense / (1.0 - self.params.porosity)
            } else {
                0.0
            };
            let b = &mut g[c * NY_CELL..(c + 1) * NY_CELL];
            b[Y_TS] = if bed && has_solids(&s.c_s) {
                (s.u_s - self.species.enthalpy(Phase::Solid, a.t_s, a.p, &s.c_s)) / (s.u_s.abs() + 1.0)
            } else {
                (a.t_s - a.t_a) / 1e3
            };
            b[Y_TA] = (s.u_a - (h_a - pv_a)) / (s.u_a.abs() + 1.0);
            b[Y_P] = pv_a / a.p + vhat_s - 1.0;
        }
        g
    }

    /// Solves `g = 0` for the algebraic states of every cell given `x`.
    /// The relations decouple per cell: each temperature follows from its
    /// energy and the pressure from the volume closure.
    pub fn solve_algebraic(&self, x: &[f64], y_guess: &[f64]) -> Result<Vec<f64>, ModelError> {
        let n = self.grid.n_cells();
        let mut y = vec![0.0; n * NY_CELL];
        let eta = self.params.porosity;
        for c in 0..n {
            let s = CellState::read(x, c);
            let guess = AlgebraicState::read(y_guess, c);
            let bed = self.grid.coords(c).1 == 0;
            let init_err = |e: crate::error::ThermoError| ModelError::Initialization { cell: c, reason: e.to_string() };
            let t_a = self
                .species
                .temperature_from_energy(Phase::Gas, s.u_a, guess.p, &s.c_a, eta, guess.t_a)
                .map_err(init_err)?;
            let (t_s, vhat_s) = if bed && has_solids(&s.c_s) {
                let t = self
                    .species
                    .temperature_from_energy(Phase::Solid, s.u_s, guess.p, &s.c_s, eta, guess.t_s)
                    .map_err(init_err)?;
                (t, self.species.volume(Phase::Solid, t, guess.p, &s.c_s, eta)?)
            } else {
                (t_a, 0.0)
            };
            if vhat_s >= 1.0 {
                return Err(ModelError::Initialization {
                    cell: c,
                    reason: format!("solids fill {vhat_s:.3} of the cell, leaving no gas volume"),
                });
            }
            let p = s.c_a.iter().sum::<f64>() * R_GAS * t_a / (1.0 - vhat_s);
            AlgebraicState { t_s, t_a, p }.write(&mut y, c);
        }
        Ok(y)
    }

    /// Builds a consistent `(x, y)` from concentrations and temperatures:
    /// energies are set from `(T, P, C)` and `g = 0` is then solved back.
    pub fn consistent_initialize(
        &self,
        c_s: &[SolidVec],
        c_a: &[GasVec],
        t_s0: f64,
        t_a0: f64,
    ) -> Result<(Vec<f64>, Vec<f64>), ModelError> {
        let n = self.grid.n_cells();
        if c_s.len() != n || c_a.len() != n {
            return Err(ModelError::Configuration(format!("initial state needs {n} cells")));
        }
        let eta = self.params.porosity;
        let mut cells = Vec::with_capacity(n);
        let mut alg = Vec::with_capacity(n);
        for c in 0..n {
            if c_s[c].iter().chain(&c_a[c]).any(|&v| !(v >= 0.0)) {
                return Err(ModelError::Initialization { cell: c, reason: "negative concentration".into() });
            }
            let bed = self.grid.coords(c).1 == 0;
            if !bed && c_s[c].iter().any(|&v| v > 0.0) {
                return Err(ModelError::Initialization { cell: c, reason: "solids above the bed layer".into() });
            }
            let vhat_s = self.species.volume(Phase::Solid, t_s0, 1.0, &c_s[c], eta)?;
            let n_gas: f64 = c_a[c].iter().sum();
            if n_gas <= 0.0 || vhat_s >= 1.0 {
                return Err(ModelError::Initialization {
                    cell: c,
                    reason: format!("volume closure infeasible (solid fraction {vhat_s:.3}, gas {n_gas} mol/m3)"),
                });
            }
            let p = n_gas * R_GAS * t_a0 / (1.0 - vhat_s);
            let u_s = self.species.internal_energy_density(Phase::Solid, t_s0, p, &c_s[c], eta)?;
            let u_a = self.species.internal_energy_density(Phase::Gas, t_a0, p, &c_a[c], eta)?;
            cells.push(CellState { c_s: c_s[c], c_a: c_a[c], u_s, u_a });
            alg.push(AlgebraicState { t_s: if bed { t_s0 } else { t_a0 }, t_a: t_a0, p });
        }
        let (x, y0) = pack(&cells, &alg);
        let y = self.solve_algebraic(&x, &y0)?;
        Ok((x, y))
    }

    /// Concentrations per cell for a uniform start: solids given per
    /// segment volume are placed in the bed layer; gas fills the remaining
    /// volume at pressure `p0` with the fan air composition.
    pub fn uniform_concentrations(
        &self,
        c_s_segment: &SolidVec,
        t_s0: f64,
        t_a0: f64,
        p0: f64,
    ) -> Result<(Vec<SolidVec>, Vec<GasVec>), ModelError> {
        let heights = self.grid.layer_heights();
        let n = self.grid.n_cells();
        let mut c_s = vec![[0.0; N_SOLID]; n];
        let mut c_a = vec![[0.0; N_GAS]; n];
        for c in 0..n {
            let (_, j) = self.grid.coords(c);
            if j == 0 {
                let factor = self.grid.height / heights[0];
                c_s[c] = c_s_segment.map(|v| v * factor);
            }
            let vhat_s = self.species.volume(Phase::Solid, t_s0, p0, &c_s[c], self.params.porosity)?;
            let total = p0 * (1.0 - vhat_s) / (R_GAS * t_a0);
            c_a[c] = self.boundary.air_composition.map(|v| v * total);
        }
        Ok((c_s, c_a))
    }

    /// Clips negative concentrations to zero and returns the clipped
    /// amount in mol (summed over cells, weighted by cell volume).
    pub fn clip_concentrations(&self, x: &mut [f64]) -> f64 {
        let mut clipped = 0.0;
        for c in 0..self.grid.n_cells() {
            let vol = self.grid.cell_volume(self.grid.coords(c).1);
            for v in &mut x[c * NX_CELL..c * NX_CELL + X_US] {
                if *v < 0.0 {
                    clipped -= *v * vol;
                    *v = 0.0;
                }
            }
        }
        clipped
    }

    /// Solid and gas amounts in the whole cooler, mol per species.
    pub fn inventory(&self, x: &[f64]) -> (SolidVec, GasVec) {
        let mut s = [0.0; N_SOLID];
        let mut a = [0.0; N_GAS];
        for c in 0..self.grid.n_cells() {
            let vol = self.grid.cell_volume(self.grid.coords(c).1);
            let st = CellState::read(x, c);
            s.iter_mut().zip(&st.c_s).for_each(|(acc, v)| *acc += vol * v);
            a.iter_mut().zip(&st.c_a).for_each(|(acc, v)| *acc += vol * v);
        }
        (s, a)
    }
}

impl DaeSystem for CoolerModel {
    fn n_x(&self) -> usize {
        CoolerModel::n_x(self)
    }

    fn n_y(&self) -> usize {
        CoolerModel::n_y(self)
    }

    fn residual(&self, x: &[f64], y: &[f64], f: &mut [f64], g: &mut [f64]) -> Result<(), ModelError> {
        let a = self.assemble(x, y)?;
        f.copy_from_slice(&a.f);
        g.copy_from_slice(&a.g);
        Ok(())
    }

    fn x_scale(&self) -> Vec<f64> {
        let mut cell = [1e2; NX_CELL];
        cell[X_US] = 1e9;
        cell[X_UA] = 1e9;
        cell.iter().copied().cycle().take(CoolerModel::n_x(self)).collect()
    }

    fn y_scale(&self) -> Vec<f64> {
        [1e3, 1e3, 1e5].iter().copied().cycle().take(CoolerModel::n_y(self)).collect()
    }

    fn structure(&self) -> Option<BlockStructure> {
        let n = self.grid.n_cells();
        Some(BlockStructure {
            x_blocks: (0..n).map(|c| c * NX_CELL..(c + 1) * NX_CELL).collect(),
            y_blocks: (0..n).map(|c| c * NY_CELL..(c + 1) * NY_CELL).collect(),
            neighbors: (0..n).map(|c| self.grid.neighbors(c)).collect(),
            colors: self.grid.colors(),
        })
    }

    fn project(&self, x: &mut [f64]) -> f64 {
        self.clip_concentrations(x)
    }

    fn solve_algebraic(&self, x: &[f64], y_guess: &[f64]) -> Result<Vec<f64>, SolverError> {
        Ok(CoolerModel::solve_algebraic(self, x, y_guess)?)
    }
}

fn has_solids(c_s: &SolidVec) -> bool {
    c_s.iter().any(|&v| v > 0.0)
}

impl SpeciesTable {
    fn solid_data(&self) -> &[crate::species::SpeciesData] {
        self.phase_data(Phase::Solid)
    }
}
