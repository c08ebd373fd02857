//! CSV and manifest writers. Floats are written with 17 significant digits.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::Result;
use crate::integrate::{Control, RelaxedControl, SwitchingSignal};
use crate::setvalued::Radius;
use crate::trajectory::Trajectory;

/// Extra columns appended to a trajectory CSV.
#[derive(Debug, Clone, Copy)]
pub enum ControlColumns<'a> {
    None,
    /// `u`, the active vertex numbered from 1.
    Switching(&'a SwitchingSignal),
    /// `lambda_1..lambda_m`.
    Relaxed(&'a RelaxedControl),
}

pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_trajectory_csv(path: &Path, trajectory: &Trajectory, control: ControlColumns<'_>) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    let mut header = vec!["t".to_string()];
    header.extend((1..=trajectory.dimension()).map(|i| format!("x{i}")));
    match control {
        ControlColumns::None => {}
        ControlColumns::Switching(_) => header.push("u".into()),
        ControlColumns::Relaxed(c) => header.extend((1..=c.vertex_count()).map(|i| format!("lambda_{i}"))),
    }
    w.write_record(&header)?;
    for (t, x) in trajectory.times().iter().zip(trajectory.states()) {
        let mut row = vec![format_float(*t)];
        row.extend(x.iter().map(|v| format_float(*v)));
        match control {
            ControlColumns::None => {}
            ControlColumns::Switching(u) => row.push((u.indices()[u.piece_at(*t)] + 1).to_string()),
            ControlColumns::Relaxed(c) => row.extend(c.weights_at(*t).iter().map(|v| format_float(*v))),
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Rows `t, |z(t) - x(t)|, r(t)` on the grid of `trajectory`.
pub fn gap_rows(reference: &Trajectory, trajectory: &Trajectory, radius: &Radius) -> Result<Vec<[f64; 3]>> {
    trajectory
        .times()
        .iter()
        .zip(trajectory.states())
        .map(|(t, x)| Ok([*t, (reference.at(*t) - x).norm(), radius.at(*t)?]))
        .collect()
}

pub fn write_gaps_csv(path: &Path, rows: &[[f64; 3]]) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    w.write_record(["t", "gap", "r"])?;
    for row in rows {
        w.write_record(row.iter().map(|v| format_float(*v)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    #[test]
    fn trajectory_csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let tr = Trajectory::new(vec![0.0, 0.5, 1.0], vec![dvector![1.0, 0.0]; 3]).unwrap();
        let u = SwitchingSignal::new(vec![0.0, 0.5, 1.0], vec![1, 0]).unwrap();
        write_trajectory_csv(&path, &tr, ControlColumns::Switching(&u)).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,x1,x2,u");
        assert_eq!(lines[1], "0.0000000000000000e0,1.0000000000000000e0,0.0000000000000000e0,2");
        assert!(lines[2].ends_with(",1"));
        assert!(lines[3].ends_with(",1"));

        let lam = RelaxedControl::constant(vec![0.25, 0.75], (0.0, 1.0)).unwrap();
        write_trajectory_csv(&path, &tr, ControlColumns::Relaxed(&lam)).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("t,x1,x2,lambda_1,lambda_2\n"));
        assert!(text.lines().nth(1).unwrap().ends_with("2.5000000000000000e-1,7.5000000000000000e-1"));
    }

    #[test]
    fn gaps_against_radius() {
        let z = Trajectory::constant(vec![0.0, 1.0], dvector![0.0]).unwrap();
        let x = Trajectory::new(vec![0.0, 1.0], vec![dvector![0.5], dvector![-0.25]]).unwrap();
        let rows = gap_rows(&z, &x, &Radius::parse("exp(-t)").unwrap()).unwrap();
        assert_eq!(rows[0], [0.0, 0.5, 1.0]);
        assert_eq!(rows[1][1], 0.25);
        assert!((rows[1][2] - (-1f64).exp()).abs() < 1e-16);
    }
}
