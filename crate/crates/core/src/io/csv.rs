//! Trajectory CSV files.
//!
//! Every number is written as `{:.16e}` (17 significant digits), which
//! round-trips an `f64` exactly.

use std::fs::File;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::integrator::{PlasticEvent, Sample, Trajectory};
use crate::models::MaterialState;

pub const TRAJECTORY_HEADER: [&str; 14] = [
    "t",
    "eps",
    "v",
    "eps_p",
    "xi_i",
    "xi_k",
    "sigma",
    "beta_i",
    "beta_k",
    "E_tot",
    "D_cum",
    "S_e",
    "S_p",
    "gamma_cum",
];

pub const EVENTS_HEADER: [&str; 13] = [
    "t",
    "lambda",
    "d_eps_p",
    "d_xi_i",
    "d_xi_k",
    "d_S_e",
    "d_S_p",
    "dissipated",
    "sigma",
    "beta_i",
    "beta_k",
    "momentum_before",
    "momentum_after",
];

/// `dir/trajectory.csv` → `dir/trajectory.events.csv`.
pub fn events_path(path: &Path) -> PathBuf {
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("trajectory");
    path.with_file_name(format!("{stem}.events.csv"))
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_rows<const N: usize>(
    path: &Path,
    header: [&str; N],
    rows: impl Iterator<Item = [f64; N]>,
) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    let to_err = |e: csv::Error| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    w.write_record(header).map_err(to_err)?;
    for row in rows {
        w.write_record(row.map(fmt)).map_err(to_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_rows<const N: usize>(path: &Path, header: [&str; N]) -> Result<Vec<[f64; N]>> {
    let parse_err = |message: String| Error::Parse {
        path: path.to_path_buf(),
        message,
    };
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::Reader::from_reader(file);
    let found = r.headers().map_err(|e| parse_err(e.to_string()))?;
    if found.iter().ne(header.iter().copied()) {
        return Err(parse_err(format!(
            "unexpected header `{}`",
            found.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows = Vec::new();
    for (line, record) in r.records().enumerate() {
        let record = record.map_err(|e| parse_err(e.to_string()))?;
        let mut row = [0.0; N];
        for (i, field) in record.iter().enumerate() {
            row[i] = field
                .trim()
                .parse()
                .map_err(|_| parse_err(format!("row {}: `{field}` is not a number", line + 1)))?;
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Writes `path` and its sibling `.events.csv`.
pub fn write_trajectory(traj: &Trajectory, path: &Path) -> Result<()> {
    write_rows(
        path,
        TRAJECTORY_HEADER,
        traj.samples.iter().map(|s| {
            let st = &s.state;
            [
                st.t,
                st.eps,
                st.v,
                st.eps_p,
                st.xi_i,
                st.xi_k,
                s.sigma,
                s.beta_i,
                s.beta_k,
                s.e_tot,
                s.d_cum,
                st.s_e,
                st.s_p,
                s.gamma_cum,
            ]
        }),
    )?;
    write_rows(
        &events_path(path),
        EVENTS_HEADER,
        traj.events.iter().map(|e| {
            [
                e.t,
                e.lambda,
                e.d_eps_p,
                e.d_xi_i,
                e.d_xi_k,
                e.d_s_e,
                e.d_s_p,
                e.dissipated,
                e.sigma,
                e.beta_i,
                e.beta_k,
                e.momentum_before,
                e.momentum_after,
            ]
        }),
    )
}

/// Reads a trajectory written by [`write_trajectory`]. A missing events file
/// reads as no events.
pub fn read_trajectory(path: &Path) -> Result<Trajectory> {
    let samples = read_rows(path, TRAJECTORY_HEADER)?
        .into_iter()
        .map(|r| Sample {
            state: MaterialState {
                t: r[0],
                eps: r[1],
                v: r[2],
                eps_p: r[3],
                xi_i: r[4],
                xi_k: r[5],
                s_e: r[11],
                s_p: r[12],
            },
            sigma: r[6],
            beta_i: r[7],
            beta_k: r[8],
            e_tot: r[9],
            d_cum: r[10],
            gamma_cum: r[13],
        })
        .collect();
    let events_file = events_path(path);
    let events = if events_file.exists() {
        read_rows(&events_file, EVENTS_HEADER)?
            .into_iter()
            .map(|r| PlasticEvent {
                t: r[0],
                lambda: r[1],
                d_eps_p: r[2],
                d_xi_i: r[3],
                d_xi_k: r[4],
                d_s_e: r[5],
                d_s_p: r[6],
                dissipated: r[7],
                sigma: r[8],
                beta_i: r[9],
                beta_k: r[10],
                momentum_before: r[11],
                momentum_after: r[12],
            })
            .collect()
    } else {
        Vec::new()
    };
    Ok(Trajectory { samples, events })
}

/// Writes a headed table of numbers.
pub fn write_table(
    path: &Path,
    header: &[&str],
    rows: impl Iterator<Item = Vec<f64>>,
) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    let to_err = |e: csv::Error| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    w.write_record(header).map_err(to_err)?;
    for row in rows {
        w.write_record(row.into_iter().map(fmt)).map_err(to_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
