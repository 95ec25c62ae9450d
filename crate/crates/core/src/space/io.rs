//! Text serialization of spaces: a CSV table plus a JSON sidecar with the metadata.
//!
//! Spaces use `id,x1,...,xk,mass`; curves use `id,re,im,arc_mass`.

use std::fs::File;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{build_curve, CurveSpace, MetricMeasureSpace, SpaceKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceMeta {
    pub kind: SpaceKind,
    pub quasi_const: f64,
    pub dim_hint: f64,
    pub r_outer: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed: Option<bool>,
}

/// Sidecar path: `space.csv` → `space.meta.json`.
pub fn meta_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("meta.json")
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn write_meta(csv_path: &Path, meta: &SpaceMeta) -> Result<()> {
    let text = serde_json::to_string_pretty(meta).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(meta_path(csv_path), text + "\n")?;
    Ok(())
}

fn read_meta(csv_path: &Path) -> Result<SpaceMeta> {
    let text = std::fs::read_to_string(meta_path(csv_path))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", meta_path(csv_path).display())))
}

fn read_rows(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut rdr = csv::Reader::from_reader(File::open(path)?);
    let header: Vec<String> = rdr.headers().map_err(csv_err)?.iter().map(str::to_owned).collect();
    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let row = rec
            .iter()
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| Error::Parse(format!("{} row {}: {e}", path.display(), line + 1)))?;
        if row.len() != header.len() {
            return Err(Error::Parse(format!("{} row {}: wrong field count", path.display(), line + 1)));
        }
        rows.push(row);
    }
    Ok((header, rows))
}

pub fn save_space(space: &MetricMeasureSpace, csv_path: &Path) -> Result<()> {
    if !space.has_coords() {
        return Err(Error::Io("spaces given by a distance table have no coordinate file format".into()));
    }
    let dim = space.coords(0).len();
    let mut w = csv::Writer::from_path(csv_path).map_err(csv_err)?;
    let mut header = vec!["id".to_string()];
    header.extend((1..=dim).map(|k| format!("x{k}")));
    header.push("mass".into());
    w.write_record(&header).map_err(csv_err)?;
    for (i, p) in space.points().iter().enumerate() {
        let mut rec = vec![i.to_string()];
        rec.extend(p.coords.iter().map(|c| c.to_string()));
        rec.push(space.mass(i).to_string());
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    write_meta(
        csv_path,
        &SpaceMeta {
            kind: space.kind(),
            quasi_const: space.quasi_const(),
            dim_hint: space.dim_hint(),
            r_outer: space.r_outer(),
            closed: None,
        },
    )
}

pub fn load_space(csv_path: &Path) -> Result<MetricMeasureSpace> {
    let meta = read_meta(csv_path)?;
    let (header, rows) = read_rows(csv_path)?;
    if header.len() < 3 || header[0] != "id" || header[header.len() - 1] != "mass" {
        return Err(Error::Parse(format!("{}: expected header id,x1,...,mass", csv_path.display())));
    }
    let k = header.len() - 2;
    let coords = rows.iter().map(|r| r[1..=k].to_vec()).collect();
    let mass = rows.iter().map(|r| r[k + 1]).collect();
    let space = MetricMeasureSpace::from_points(coords, mass, meta.kind, meta.dim_hint)?;
    match meta.r_outer {
        Some(r) => space.with_outer_radius(r),
        None => Ok(space),
    }
}

pub fn save_curve(curve: &CurveSpace, csv_path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(csv_path).map_err(csv_err)?;
    w.write_record(["id", "re", "im", "arc_mass"]).map_err(csv_err)?;
    for (i, (z, m)) in curve.vertices().iter().zip(curve.arc_mass()).enumerate() {
        w.write_record([i.to_string(), z.re.to_string(), z.im.to_string(), m.to_string()]).map_err(csv_err)?;
    }
    w.flush()?;
    write_meta(
        csv_path,
        &SpaceMeta {
            kind: SpaceKind::CurvePolyline,
            quasi_const: 1.0,
            dim_hint: 1.0,
            r_outer: curve.space().r_outer(),
            closed: Some(curve.is_closed()),
        },
    )
}

/// Reads a curve; arc masses are recomputed from the vertices.
pub fn load_curve(csv_path: &Path) -> Result<CurveSpace> {
    let meta = read_meta(csv_path)?;
    let (header, rows) = read_rows(csv_path)?;
    if header != ["id", "re", "im", "arc_mass"] {
        return Err(Error::Parse(format!("{}: expected header id,re,im,arc_mass", csv_path.display())));
    }
    let verts = rows.iter().map(|r| Complex64::new(r[1], r[2])).collect();
    build_curve(verts, meta.closed.unwrap_or(false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::build_grid;

    #[test]
    fn space_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("grid.csv");
        let s = build_grid(&[(0.0, 1.0), (0.0, 2.0)], &[4, 3], None).unwrap().with_outer_radius(5.0).unwrap();
        save_space(&s, &path).unwrap();
        let back = load_space(&path).unwrap();
        assert_eq!(back.points(), s.points());
        assert_eq!(back.masses(), s.masses());
        assert_eq!(back.r_outer(), Some(5.0));
        assert_eq!(back.kind(), s.kind());
    }

    #[test]
    fn curve_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("circle.csv");
        let c = CurveSpace::circle(16, 1.0).unwrap();
        save_curve(&c, &path).unwrap();
        let back = load_curve(&path).unwrap();
        assert_eq!(back.vertices(), c.vertices());
        assert!(back.is_closed());
    }
}
