use serde::{Deserialize, Serialize};

use super::grid::*;
use crate::species::{GasVec, SolidVec, N_GAS, N_SOLID};

/// Differential state of one finite volume. Concentrations are moles per
/// cell volume, energies J per cell volume.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CellState {
    pub c_s: SolidVec,
    pub c_a: GasVec,
    pub u_s: f64,
    pub u_a: f64,
}

/// Algebraic state of one finite volume.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AlgebraicState {
    pub t_s: f64,
    pub t_a: f64,
    pub p: f64,
}

impl CellState {
    pub fn read(x: &[f64], cell: usize) -> CellState {
        let b = &x[cell * NX_CELL..(cell + 1) * NX_CELL];
        let mut c_s = [0.0; N_SOLID];
        let mut c_a = [0.0; N_GAS];
        c_s.copy_from_slice(&b[X_CS..X_CS + N_SOLID]);
        c_a.copy_from_slice(&b[X_CA..X_CA + N_GAS]);
        CellState { c_s, c_a, u_s: b[X_US], u_a: b[X_UA] }
    }

    pub fn write(&self, x: &mut [f64], cell: usize) {
        let b = &mut x[cell * NX_CELL..(cell + 1) * NX_CELL];
        b[X_CS..X_CS + N_SOLID].copy_from_slice(&self.c_s);
        b[X_CA..X_CA + N_GAS].copy_from_slice(&self.c_a);
        b[X_US] = self.u_s;
        b[X_UA] = self.u_a;
    }
}

impl AlgebraicState {
    pub fn read(y: &[f64], cell: usize) -> AlgebraicState {
        let b = &y[cell * NY_CELL..(cell + 1) * NY_CELL];
        AlgebraicState { t_s: b[Y_TS], t_a: b[Y_TA], p: b[Y_P] }
    }

    pub fn write(&self, y: &mut [f64], cell: usize) {
        let b = &mut y[cell * NY_CELL..(cell + 1) * NY_CELL];
        b[Y_TS] = self.t_s;
        b[Y_TA] = self.t_a;
        b[Y_P] = self.p;
    }
}

/// Packs per-cell states into the flat solver vectors.
pub fn pack(cells: &[CellState], alg: &[AlgebraicState]) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; cells.len() * NX_CELL];
    let mut y = vec![0.0; alg.len() * NY_CELL];
    for (i, c) in cells.iter().enumerate() {
        c.write(&mut x, i);
    }
    for (i, a) in alg.iter().enumerate() {
        a.write(&mut y, i);
    }
    (x, y)
}

pub fn unpack(x: &[f64], y: &[f64]) -> (Vec<CellState>, Vec<AlgebraicState>) {
    let cells = (0..x.len() / NX_CELL).map(|i| CellState::read(x, i)).collect();
    let alg = (0..y.len() / NY_CELL).map(|i| AlgebraicState::read(y, i)).collect();
    (cells, alg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pack_round_trip() {
        let mut a = CellState::default();
        a.c_s[3] = 1.5;
        a.c_a[6] = 2.5;
        a.u_s = -3.0;
        a.u_a = 4.0;
        let b = CellState { u_a: 9.0, ..a };
        let y0 = AlgebraicState { t_s: 1000.0, t_a: 900.0, p: 1e5 };
        let (x, y) = pack(&[a, b], &[y0, y0]);
        assert_eq!(x.len(), 2 * NX_CELL);
        assert_eq!(x[NX_CELL + X_UA], 9.0);
        let (cells, alg) = unpack(&x, &y);
        assert_eq!(cells, vec![a, b]);
        assert_eq!(alg, vec![y0, y0]);
    }
}
