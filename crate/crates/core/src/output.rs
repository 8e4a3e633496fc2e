//! Axial profiles, time-series tables and run metadata.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::model::{AlgebraicState, CellState, CoolerModel};
use crate::solver::{SolverStats, Trajectory};
use crate::species::{Phase, SolidVec, SpeciesId, N_GAS, N_SOLID};

/// Steady or final-state quantities of one segment.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentProfile {
    pub segment: usize,
    /// Segment centre, m from the inlet.
    pub position: f64,
    /// Solid mass flow leaving the segment on the grate, kg/s.
    pub solid_mass_flow: SolidVec,
    /// Solid concentration per segment volume, mol/m3.
    pub concentration: SolidVec,
    /// Bed solid temperature, K.
    pub solid_temperature: f64,
    /// Volume-weighted air temperature, K.
    pub air_temperature: f64,
    /// Volume-weighted pressure, Pa.
    pub pressure: f64,
}

/// Solid concentrations per segment volume (all layers lumped), mol/m3.
pub fn segment_concentrations(model: &CoolerModel, x: &[f64]) -> Vec<SolidVec> {
    let g = &model.grid;
    let v_seg = g.segment_volume();
    (0..g.n_v)
        .map(|k| {
            let mut c = [0.0; N_SOLID];
            for j in 0..g.n_y {
                let st = CellState::read(x, g.cell(k, j));
                let w = g.cell_volume(j) / v_seg;
                c.iter_mut().zip(&st.c_s).for_each(|(acc, v)| *acc += w * v);
            }
            c
        })
        .collect()
}

pub fn segment_profiles(model: &CoolerModel, x: &[f64], y: &[f64]) -> Vec<SegmentProfile> {
    let g = &model.grid;
    let v_seg = g.segment_volume();
    let bed_area = g.width * g.layer_heights()[0];
    let molar_mass: Vec<f64> = model.species.molar_masses(Phase::Solid).collect();
    let conc = segment_concentrations(model, x);
    (0..g.n_v)
        .map(|k| {
            let bed = g.cell(k, 0);
            let c_bed = CellState::read(x, bed).c_s;
            let v = model.boundary.grate_speed[k];
            let mut mdot = [0.0; N_SOLID];
            for i in 0..N_SOLID {
                mdot[i] = v * c_bed[i].max(0.0) * bed_area * molar_mass[i];
            }
            let (mut t_a, mut p) = (0.0, 0.0);
            for j in 0..g.n_y {
                let al = AlgebraicState::read(y, g.cell(k, j));
                let w = g.cell_volume(j) / v_seg;
                t_a += w * al.t_a;
                p += w * al.p;
            }
            SegmentProfile {
                segment: k,
                position: (k as f64 + 0.5) * g.dz(),
                solid_mass_flow: mdot,
                concentration: conc[k],
                solid_temperature: AlgebraicState::read(y, bed).t_s,
                air_temperature: t_a,
                pressure: p,
            }
        })
        .collect()
}

/// Outlet clinker temperature as `(last segment, linear extrapolation to
/// the outlet face)`.
pub fn outlet_temperature(profiles: &[SegmentProfile]) -> Option<(f64, f64)> {
    let n = profiles.len();
    let last = profiles.last()?.solid_temperature;
    if n < 2 {
        return Some((last, last));
    }
    let prev = profiles[n - 2].solid_temperature;
    Some((last, last + 0.5 * (last - prev)))
}

/// `(x indices, y indices)` of every state component of each segment, for
/// [`crate::solver::settling_time`].
pub fn segment_groups(model: &CoolerModel) -> Vec<(Vec<usize>, Vec<usize>)> {
    use crate::model::{NX_CELL, NY_CELL};
    let g = &model.grid;
    (0..g.n_v)
        .map(|k| {
            let mut xi = Vec::new();
            let mut yi = Vec::new();
            for j in 0..g.n_y {
                let c = g.cell(k, j);
                xi.extend(c * NX_CELL..(c + 1) * NX_CELL);
                yi.extend(c * NY_CELL..(c + 1) * NY_CELL);
            }
            (xi, yi)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileSource {
    FinalSample,
    SteadyState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub scenario: String,
    /// SHA-256 of the canonical scenario JSON.
    pub scenario_sha256: String,
    pub mode: String,
    pub n_cells: usize,
    pub n_samples: usize,
    pub t_end: f64,
    pub stats: SolverStats,
    pub profile_source: ProfileSource,
    pub steady_residual: Option<f64>,
    pub outlet_temperature_last: Option<f64>,
    pub outlet_temperature_extrapolated: Option<f64>,
    pub warnings: Vec<String>,
    pub version: String,
}

pub fn scenario_hash(json: &str) -> String {
    Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputBundle {
    pub meta: RunMeta,
    pub trajectory: Trajectory,
    pub profiles: Vec<SegmentProfile>,
}

/// Float formatting used in all tables (17 significant digits).
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn timeseries_header() -> Vec<String> {
    let mut h = vec![
        "time[s]".to_string(),
        "segment[-]".into(),
        "layer[-]".into(),
        "T_s[K]".into(),
        "T_a[K]".into(),
        "P[Pa]".into(),
    ];
    h.extend(SpeciesId::SOLIDS.iter().map(|s| format!("C_s_{}[mol/m3]", s.name())));
    h.extend(SpeciesId::GASES.iter().map(|s| format!("C_a_{}[mol/m3]", s.name())));
    h.push("U_s[J/m3]".into());
    h.push("U_a[J/m3]".into());
    h
}

/// One row per sample and cell.
pub fn write_timeseries<W: Write>(out: W, model: &CoolerModel, traj: &Trajectory) -> io::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(timeseries_header())?;
    let g = &model.grid;
    for (s, &t) in traj.times.iter().enumerate() {
        for c in 0..g.n_cells() {
            let (k, j) = g.coords(c);
            let st = CellState::read(&traj.x[s], c);
            let al = AlgebraicState::read(&traj.y[s], c);
            let mut row = vec![num(t), k.to_string(), j.to_string(), num(al.t_s), num(al.t_a), num(al.p)];
            row.extend(st.c_s.iter().map(|&v| num(v)));
            row.extend(st.c_a.iter().map(|&v| num(v)));
            row.push(num(st.u_s));
            row.push(num(st.u_a));
            w.write_record(&row)?;
        }
    }
    w.flush()
}

/// One row per segment; the outlet temperature columns repeat on each row.
pub fn write_profiles<W: Write>(out: W, profiles: &[SegmentProfile]) -> io::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let mut h = vec!["segment[-]".to_string(), "z[m]".into()];
    h.extend(SpeciesId::SOLIDS.iter().map(|s| format!("mdot_{}[kg/s]", s.name())));
    h.extend(SpeciesId::SOLIDS.iter().map(|s| format!("C_{}[mol/m3]", s.name())));
    h.extend(["T_s[K]", "T_a[K]", "P[Pa]", "T_out_last[K]", "T_out_extrapolated[K]"].map(String::from));
    w.write_record(&h)?;
    let outlet = outlet_temperature(profiles);
    for p in profiles {
        let mut row = vec![(p.segment + 1).to_string(), num(p.position)];
        row.extend(p.solid_mass_flow.iter().map(|&v| num(v)));
        row.extend(p.concentration.iter().map(|&v| num(v)));
        row.extend([p.solid_temperature, p.air_temperature, p.pressure].map(num));
        let (last, ext) = outlet.expect("non-empty profile list");
        row.push(num(last));
        row.push(num(ext));
        w.write_record(&row)?;
    }
    w.flush()
}

#[derive(Debug, thiserror::Error)]
#[error("{path}: {source}")]
pub struct ExportError {
    pub path: PathBuf,
    #[source]
    pub source: io::Error,
}

/// Writes `timeseries.csv`, `steady_profiles.csv` and `run_meta.json` into `dir`.
pub fn export(bundle: &OutputBundle, model: &CoolerModel, dir: &Path) -> Result<Vec<PathBuf>, ExportError> {
    let err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| ExportError { path, source }
    };
    fs::create_dir_all(dir).map_err(err(dir))?;
    let mut written = Vec::new();

    let path = dir.join("timeseries.csv");
    let mut buf = Vec::new();
    write_timeseries(&mut buf, model, &bundle.trajectory).map_err(err(&path))?;
    fs::write(&path, buf).map_err(err(&path))?;
    written.push(path);

    let path = dir.join("steady_profiles.csv");
    let mut buf = Vec::new();
    write_profiles(&mut buf, &bundle.profiles).map_err(err(&path))?;
    fs::write(&path, buf).map_err(err(&path))?;
    written.push(path);

    let path = dir.join("run_meta.json");
    let mut json = serde_json::to_string_pretty(&bundle.meta).expect("metadata serializes");
    json.push('\n');
    fs::write(&path, json).map_err(err(&path))?;
    written.push(path);
    Ok(written)
}

/// Number of columns in the time series.
pub const TIMESERIES_COLUMNS: usize = 6 + N_SOLID + N_GAS + 2;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Scenario;

    fn small() -> Scenario {
        let mut f = crate::scenario::ScenarioFile::bundled();
        f.geometry.n_v = 3;
        f.boundaries.fans.mass_flow.truncate(3);
        f.boundaries.pressure_map.truncate(3);
        f.build().unwrap()
    }

    #[test]
    fn empty_trajectory_gives_header_only() {
        let s = small();
        let mut buf = Vec::new();
        write_timeseries(&mut buf, &s.model, &Trajectory::default()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(text.ends_with('\n') && !text.contains('\r'));
        assert_eq!(text.trim_end().split(',').count(), TIMESERIES_COLUMNS);
        assert!(text.starts_with("time[s],segment[-],layer[-],T_s[K]"));
    }

    #[test]
    fn timeseries_reparses_exactly() {
        let s = small();
        let (x, y) = s.initial_state().unwrap();
        let traj = Trajectory {
            times: vec![0.0, 0.1],
            x: vec![x.clone(), x.clone()],
            y: vec![y.clone(), y.clone()],
            ..Default::default()
        };
        let mut buf = Vec::new();
        write_timeseries(&mut buf, &s.model, &traj).unwrap();
        let mut rd = csv::Reader::from_reader(buf.as_slice());
        let rows: Vec<csv::StringRecord> = rd.records().map(|r| r.unwrap()).collect();
        assert_eq!(rows.len(), 2 * s.model.grid.n_cells());
        for (r, row) in rows.iter().enumerate() {
            let c = r % s.model.grid.n_cells();
            let vals: Vec<f64> = row.iter().map(|v| v.parse().unwrap()).collect();
            let st = CellState::read(&x, c);
            let al = AlgebraicState::read(&y, c);
            assert_eq!(vals[3], al.t_s);
            assert_eq!(vals[5], al.p);
            assert_eq!(&vals[6..6 + N_SOLID], &st.c_s[..]);
            assert_eq!(vals[TIMESERIES_COLUMNS - 1], st.u_a);
        }
    }

    #[test]
    fn profiles_match_hand_mass_flow() {
        let s = small();
        let (x, y) = s.initial_state().unwrap();
        let prof = segment_profiles(&s.model, &x, &y);
        assert_eq!(prof.len(), 3);
        let g = &s.model.grid;
        let c = CellState::read(&x, g.cell(1, 0)).c_s;
        let i = SpeciesId::C3S.index();
        let m = s.model.species.get(SpeciesId::C3S).molar_mass;
        let hand = 0.017 * c[i] * g.width * g.layer_heights()[0] * m;
        assert!((prof[1].solid_mass_flow[i] - hand).abs() <= 1e-12 * hand);
        // lumped concentration recovers the per-segment initial value
        let x_c3s = s.file.clinker_mole_fractions(&s.model.species)[i];
        assert!((prof[1].concentration[i] - 10.0 * x_c3s).abs() < 1e-9);
    }

    #[test]
    fn outlet_extrapolation() {
        let mk = |t: f64| SegmentProfile {
            segment: 0,
            position: 0.0,
            solid_mass_flow: [0.0; N_SOLID],
            concentration: [0.0; N_SOLID],
            solid_temperature: t,
            air_temperature: 0.0,
            pressure: 0.0,
        };
        assert_eq!(outlet_temperature(&[]), None);
        assert_eq!(outlet_temperature(&[mk(400.0)]), Some((400.0, 400.0)));
        assert_eq!(outlet_temperature(&[mk(420.0), mk(400.0)]), Some((400.0, 390.0)));
    }

    #[test]
    fn hash_is_sha256() {
        assert_eq!(scenario_hash("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn export_is_byte_identical() {
        let s = small();
        let (x, y) = s.initial_state().unwrap();
        let traj = Trajectory { times: vec![0.0], x: vec![x.clone()], y: vec![y.clone()], ..Default::default() };
        let profiles = segment_profiles(&s.model, &x, &y);
        let meta = RunMeta {
            scenario: "t".into(),
            scenario_sha256: scenario_hash("t"),
            mode: "dynamic".into(),
            n_cells: s.model.grid.n_cells(),
            n_samples: 1,
            t_end: 0.0,
            stats: SolverStats::default(),
            profile_source: ProfileSource::FinalSample,
            steady_residual: None,
            outlet_temperature_last: None,
            outlet_temperature_extrapolated: None,
            warnings: vec![],
            version: "0".into(),
        };
        let bundle = OutputBundle { meta, trajectory: traj, profiles };
        let d = tempfile::tempdir().unwrap();
        let a = export(&bundle, &s.model, &d.path().join("a")).unwrap();
        let b = export(&bundle, &s.model, &d.path().join("b")).unwrap();
        for (pa, pb) in a.iter().zip(&b) {
            assert_eq!(fs::read(pa).unwrap(), fs::read(pb).unwrap());
        }
        let prof = fs::read_to_string(&a[1]).unwrap();
        assert_eq!(prof.lines().count(), 4);
    }
}
