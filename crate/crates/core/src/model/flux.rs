use crate::species::{GasVec, SolidVec, N_GAS, N_SOLID};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceKind {
    /// Grate transport between two bed cells.
    SolidAxial,
    GasAxial,
    GasVertical,
    ClinkerInflow,
    SolidOutflow,
    FanInflow,
    /// Top face of the uppermost layer, open to an external pressure.
    TopOutlet,
}

/// One face with fluxes counted positive from `from` to `to`.
/// `None` on either side means the outside of the cooler.
#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    pub kind: FaceKind,
    pub from: Option<usize>,
    pub to: Option<usize>,
    /// m2
    pub area: f64,
    /// Normal velocity of the carrying phase, m/s.
    pub velocity: f64,
    /// mol/(m2 s)
    pub n_s: SolidVec,
    pub n_a: GasVec,
    /// Enthalpy fluxes, W/m2.
    pub h_s: f64,
    pub h_a: f64,
    /// Conductive fluxes, W/m2.
    pub q_s: f64,
    pub q_a: f64,
}

impl Face {
    pub fn new(kind: FaceKind, from: Option<usize>, to: Option<usize>, area: f64) -> Face {
        Face {
            kind,
            from,
            to,
            area,
            velocity: 0.0,
            n_s: [0.0; N_SOLID],
            n_a: [0.0; N_GAS],
            h_s: 0.0,
            h_a: 0.0,
            q_s: 0.0,
            q_a: 0.0,
        }
    }

    pub fn is_boundary(&self) -> bool {
        self.from.is_none() || self.to.is_none()
    }

    /// Sign of the face rate as seen by the interior, +1 into the cooler.
    fn inward(&self) -> f64 {
        match (self.from, self.to) {
            (None, Some(_)) => 1.0,
            (Some(_), None) => -1.0,
            _ => 0.0,
        }
    }
}

/// Net flows through the cooler boundary, positive into the cooler.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BoundaryTotals {
    /// mol/s
    pub solid: SolidVec,
    pub gas: GasVec,
    /// W, enthalpy plus conduction of both phases.
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FluxField {
    pub faces: Vec<Face>,
}

impl FluxField {
    pub fn boundary_faces(&self) -> impl Iterator<Item = &Face> {
        self.faces.iter().filter(|f| f.is_boundary())
    }

    pub fn boundary_totals(&self) -> BoundaryTotals {
        let mut t = BoundaryTotals::default();
        for f in self.boundary_faces() {
            let s = f.inward() * f.area;
            for i in 0..N_SOLID {
                t.solid[i] += s * f.n_s[i];
            }
            for i in 0..N_GAS {
                t.gas[i] += s * f.n_a[i];
            }
            t.energy += s * (f.h_s + f.q_s + f.h_a + f.q_a);
        }
        t
    }
}
