//! Trajectory serialization: one frozen CSV schema shared by the exact
//! ray engine and the wave-mechanics comparator, written deterministically
//! (fixed row order, shortest round-trip float formatting).

use crate::error::{Result, SimError};
use crate::scenarios::TrajectoryBundle;

use std::io::Write;
use std::path::Path;

/// Frozen column set; never reorder or rename.
pub const CSV_HEADER: &str = "t,ray_id,x,z,px,pz,R,Q,H,source";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Exact,
    Bohm,
}

impl Source {
    pub fn name(&self) -> &'static str {
        match self {
            Source::Exact => "exact",
            Source::Bohm => "bohm",
        }
    }

    pub fn parse(s: &str) -> Option<Source> {
        match s {
            "exact" => Some(Source::Exact),
            "bohm" => Some(Source::Bohm),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRow {
    pub t: f64,
    pub ray_id: usize,
    pub x: f64,
    pub z: f64,
    pub px: f64,
    pub pz: f64,
    pub r_amp: f64,
    pub q: f64,
    pub h: f64,
    pub source: Source,
}

/// Flattens a bundle into rows ordered by (t, ray_id).
pub fn bundle_rows(bundle: &TrajectoryBundle) -> Vec<TrajectoryRow> {
    let mut rows = Vec::with_capacity(bundle.snapshots.len() * bundle.n_rays());
    for front in &bundle.snapshots {
        for (i, ray) in front.rays.iter().enumerate() {
            rows.push(TrajectoryRow {
                t: front.t,
                ray_id: i,
                x: ray.x,
                z: ray.z,
                px: ray.px,
                pz: ray.pz,
                r_amp: ray.r_amp,
                q: ray.q,
                h: ray.h,
                source: Source::Exact,
            });
        }
    }
    rows
}

pub fn write_rows(rows: &[TrajectoryRow], path: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(SimError::DegenerateFront("no rows to write".into()));
    }
    let mut out = String::with_capacity(rows.len() * 64);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        // `{}` on f64 prints the shortest string that round-trips
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.t, r.ray_id, r.x, r.z, r.px, r.pz, r.r_amp, r.q, r.h,
            r.source.name()
        ));
    }
    let mut file = std::fs::File::create(path)?;
    file.write_all(out.as_bytes())?;
    Ok(())
}

/// Writes a bundle's trajectories; rows ordered by (t, ray_id).
pub fn write_trajectories(bundle: &TrajectoryBundle, path: &Path) -> Result<()> {
    write_rows(&bundle_rows(bundle), path)
}

pub fn read_rows(path: &Path) -> Result<Vec<TrajectoryRow>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        Some(h) => {
            return Err(SimError::Config(format!(
                "unexpected CSV header '{h}' (want '{CSV_HEADER}')"
            )))
        }
        None => return Err(SimError::Config("empty trajectory file".into())),
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 10 {
            return Err(SimError::Config(format!(
                "line {}: expected 10 fields, got {}",
                i + 2,
                parts.len()
            )));
        }
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| SimError::Config(format!("line {}: bad number '{s}'", i + 2)))
        };
        rows.push(TrajectoryRow {
            t: num(parts[0])?,
            ray_id: parts[1].parse().map_err(|_| {
                SimError::Config(format!("line {}: bad ray id '{}'", i + 2, parts[1]))
            })?,
            x: num(parts[2])?,
            z: num(parts[3])?,
            px: num(parts[4])?,
            pz: num(parts[5])?,
            r_amp: num(parts[6])?,
            q: num(parts[7])?,
            h: num(parts[8])?,
            source: Source::parse(parts[9]).ok_or_else(|| {
                SimError::Config(format!("line {}: bad source '{}'", i + 2, parts[9]))
            })?,
        });
    }
    Ok(rows)
}
