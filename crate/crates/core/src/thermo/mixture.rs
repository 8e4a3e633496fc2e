//! Gas-mixture viscosity (Wilke) and conductivity (Mason-Saxena form of
//! the Wassiljewa equation).

use crate::species::{GasVec, SpeciesTable, N_GAS};

/// Wilke interaction parameter between species with viscosities `mu_i`,
/// `mu_j` and molar masses `m_i`, `m_j`.
pub fn wilke_phi(mu_i: f64, mu_j: f64, m_i: f64, m_j: f64) -> f64 {
    let num = 1.0 + (mu_i / mu_j).sqrt() * (m_j / m_i).powf(0.25);
    num * num / (2.0 * std::f64::consts::SQRT_2 * (1.0 + m_i / m_j).sqrt())
}

/// Mixture viscosity (Pa s) and thermal conductivity (W/(m K)) at `t`
/// for mole fractions `x`.
pub fn mixture_transport(table: &SpeciesTable, x: &GasVec, t: f64) -> (f64, f64) {
    let mut mu = [0.0; N_GAS];
    let mut k = [0.0; N_GAS];
    let mut m = [0.0; N_GAS];
    for i in 0..N_GAS {
        let d = table.gas(i);
        mu[i] = d.sutherland.map_or(f64::NAN, |s| s.viscosity(t));
        k[i] = d.conductivity(t);
        m[i] = d.molar_mass;
    }
    let mut mu_mix = 0.0;
    let mut k_mix = 0.0;
    for i in 0..N_GAS {
        if x[i] <= 0.0 {
            continue;
        }
        let denom: f64 = (0..N_GAS)
            .filter(|&j| x[j] > 0.0)
            .map(|j| x[j] * if i == j { 1.0 } else { wilke_phi(mu[i], mu[j], m[i], m[j]) })
            .sum();
        mu_mix += x[i] * mu[i] / denom;
        k_mix += x[i] * k[i] / denom;
    }
    (mu_mix, k_mix)
}

pub fn mixture_viscosity(table: &SpeciesTable, x: &GasVec, t: f64) -> f64 {
    mixture_transport(table, x, t).0
}

pub fn mixture_conductivity(table: &SpeciesTable, x: &GasVec, t: f64) -> f64 {
    mixture_transport(table, x, t).1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::species::SpeciesId;
    use approx::assert_relative_eq;

    #[test]
    fn phi_is_one_for_identical_species() {
        assert_relative_eq!(wilke_phi(2e-5, 2e-5, 0.03, 0.03), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn pure_component_limits() {
        let t = SpeciesTable::embedded();
        for id in SpeciesId::GASES {
            let mut x = [0.0; N_GAS];
            x[id.index()] = 1.0;
            for temp in [300.0, 720.0, 1400.0] {
                let (mu, k) = mixture_transport(&t, &x, temp);
                assert_relative_eq!(mu, t.sutherland_viscosity(id, temp), max_relative = 1e-14);
                assert_relative_eq!(k, t.get(id).conductivity(temp), max_relative = 1e-14);
            }
        }
    }

    #[test]
    fn equimolar_n2_o2_by_hand() {
        let t = SpeciesTable::embedded();
        let mut x = [0.0; N_GAS];
        x[SpeciesId::N2.index()] = 0.5;
        x[SpeciesId::O2.index()] = 0.5;
        // hand evaluation at the 300 K table points
        let (mu1, mu2, m1, m2): (f64, f64, f64, f64) = (17.89e-6, 20.65e-6, 0.028014, 0.031998);
        let phi12 = (1.0 + (mu1 / mu2).sqrt() * (m2 / m1).powf(0.25)).powi(2) / (8.0 * (1.0 + m1 / m2)).sqrt();
        let phi21 = (1.0 + (mu2 / mu1).sqrt() * (m1 / m2).powf(0.25)).powi(2) / (8.0 * (1.0 + m2 / m1)).sqrt();
        let expected = 0.5 * mu1 / (0.5 + 0.5 * phi12) + 0.5 * mu2 / (0.5 + 0.5 * phi21);
        assert_relative_eq!(mixture_viscosity(&t, &x, 300.0), expected, max_relative = 1e-12);
    }
}
