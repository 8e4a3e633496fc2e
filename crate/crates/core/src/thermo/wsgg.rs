//! Weighted-sum-of-grey-gases emissivity with four grey gases whose
//! weights and absorption coefficients depend on the H2O/CO2 molar ratio.

use serde::{Deserialize, Serialize};

use super::P_REF;

const EMBEDDED_WSGG: &str = include_str!("../../data/wsgg.json");

/// Default upper bound of the H2O/CO2 ratio fed to the correlation.
pub const DEFAULT_RATIO_CLAMP: f64 = 2.0;

/// Coefficient table. Absorption coefficients are per (m atm).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WsggTable {
    pub t_ref: f64,
    pub k1: [f64; 4],
    pub k2: [f64; 4],
    pub c1: [[f64; 3]; 4],
    pub c2: [[f64; 3]; 4],
    pub c3: [[f64; 3]; 4],
    /// Upper bound applied to x_H2O / x_CO2.
    #[serde(default = "default_ratio_clamp")]
    pub ratio_clamp: f64,
}

fn default_ratio_clamp() -> f64 {
    DEFAULT_RATIO_CLAMP
}

impl Default for WsggTable {
    fn default() -> Self {
        serde_json::from_str(EMBEDDED_WSGG).expect("embedded WSGG table parses")
    }
}

impl WsggTable {
    /// Ratio x_H2O/x_CO2 as used by the fit; `ratio_clamp` when CO2 is absent.
    pub fn molar_ratio(&self, x_h2o: f64, x_co2: f64) -> f64 {
        if x_co2 > 0.0 {
            (x_h2o / x_co2).min(self.ratio_clamp)
        } else if x_h2o > 0.0 {
            self.ratio_clamp
        } else {
            0.0
        }
    }

    /// Grey-gas weights `a_j` and absorption coefficients `k_j`.
    pub fn grey_gases(&self, ratio: f64, t: f64) -> ([f64; 4], [f64; 4]) {
        let tau = t / self.t_ref;
        let mut a = [0.0; 4];
        let mut k = [0.0; 4];
        for j in 0..4 {
            k[j] = self.k1[j] + self.k2[j] * ratio;
            let mut pow = 1.0;
            for i in 0..3 {
                let c = self.c1[j][i] + self.c2[j][i] * ratio + self.c3[j][i] * ratio * ratio;
                a[j] += c * pow;
                pow *= tau;
            }
        }
        (a, k)
    }
}

/// Total emissivity of the gas, clamped to `[0, 1)`.
///
/// `p` is in Pa and `path_length` in m; the product with the participating
/// mole fraction is converted to atm m for the coefficient table.
pub fn gas_emissivity(table: &WsggTable, x_h2o: f64, x_co2: f64, t: f64, p: f64, path_length: f64) -> f64 {
    let x_h2o = x_h2o.max(0.0);
    let x_co2 = x_co2.max(0.0);
    let pl = (p / P_REF) * path_length.max(0.0) * (x_h2o + x_co2);
    if pl <= 0.0 {
        return 0.0;
    }
    let ratio = table.molar_ratio(x_h2o, x_co2);
    let (a, k) = table.grey_gases(ratio, t);
    let eps: f64 = a.iter().zip(&k).map(|(aj, kj)| aj * (1.0 - (-kj * pl).exp())).sum();
    eps.clamp(0.0, 1.0 - f64::EPSILON)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vanishing_path_or_absorbers_gives_zero() {
        let w = WsggTable::default();
        assert_eq!(gas_emissivity(&w, 0.1, 0.1, 1200.0, P_REF, 0.0), 0.0);
        assert_eq!(gas_emissivity(&w, 0.0, 0.0, 1200.0, P_REF, 1.5), 0.0);
    }

    #[test]
    fn ratio_clamp_handles_missing_co2() {
        let w = WsggTable::default();
        assert_eq!(w.molar_ratio(0.01, 0.0), w.ratio_clamp);
        assert_eq!(w.molar_ratio(0.01, 1e-9), w.ratio_clamp);
        assert_eq!(w.molar_ratio(0.01, 0.01), 1.0);
        let e = gas_emissivity(&w, 0.01, 0.0, 1200.0, P_REF, 1.5);
        assert!(e > 0.0 && e < 1.0);
    }

    #[test]
    fn scenario_gas_mix_anchor() {
        // 1 % H2O, 0.0396 % CO2 air at 1200 K over half the cooler height
        let w = WsggTable::default();
        let (x_h2o, x_co2, t, p, s) = (0.01, 0.000396, 1200.0, P_REF, 1.5);
        // independent evaluation of the correlation at the clamped ratio
        let mr = 2.0_f64;
        let pl = s * (x_h2o + x_co2);
        let mut expected = 0.0;
        for j in 0..4 {
            let kj = w.k1[j] + w.k2[j] * mr;
            let aj: f64 = (0..3)
                .map(|i| (w.c1[j][i] + w.c2[j][i] * mr + w.c3[j][i] * mr * mr) * (t / 1200.0_f64).powi(i as i32))
                .sum();
            expected += aj * (1.0 - f64::exp(-kj * pl));
        }
        let e = gas_emissivity(&w, x_h2o, x_co2, t, p, s);
        assert!((e - expected).abs() < 1e-14);
        assert!(e > 0.0 && e < 1.0, "{e}");
    }
}
