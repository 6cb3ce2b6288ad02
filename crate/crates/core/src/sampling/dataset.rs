//! Dataset CSV, format version 1.
//!
//! ```text
//! # cspace-belief dataset v1
//! j0,j1,j2,j3,j4,j5,j6,state,link_index,cx,cy,cz[,w0,...,w6]
//! ```
//!
//! One row per sample in model order (all free samples, then all obs
//! samples). `state` is `free` or `obs`; `link_index` and the centroid
//! columns are empty on free rows. The `w*` columns are present only when
//! importance weights were precomputed. Floats are written in shortest
//! round-trip form, so reading a file back reproduces every value exactly.

use std::io::{Read, Write};

use nalgebra::Vector3;

use super::training::{SampleClass, TrainingSet};
use crate::error::{Error, Result};
use crate::kinematics::CollisionReport;

pub const DATASET_MAGIC: &str = "# cspace-belief dataset v1";

pub fn dataset_header(dof: usize, with_weights: bool) -> Vec<String> {
    let mut cols: Vec<String> = (0..dof).map(|i| format!("j{i}")).collect();
    cols.extend(["state", "link_index", "cx", "cy", "cz"].map(String::from));
    if with_weights {
        cols.extend((0..dof).map(|i| format!("w{i}")));
    }
    cols
}

/// Write `set`, optionally with one importance-weight row per sample.
pub fn write_dataset<W: Write>(mut out: W, set: &TrainingSet, weights: Option<&[Vec<f64>]>) -> Result<()> {
    let dof = set.dof();
    if let Some(w) = weights {
        if w.len() != set.len() {
            return Err(Error::InvalidInput(format!(
                "{} weight rows for {} samples",
                w.len(),
                set.len()
            )));
        }
    }
    writeln!(out, "{DATASET_MAGIC}")?;
    let mut csv = csv::WriterBuilder::new().from_writer(out);
    csv.write_record(dataset_header(dof, weights.is_some()))?;
    for (i, (q, class)) in set.samples().enumerate() {
        let mut row: Vec<String> = q.iter().map(|v| v.to_string()).collect();
        row.push(class.as_str().to_string());
        match set.report(i) {
            Some(rep) => {
                row.push(rep.first_link_index.to_string());
                row.extend(rep.centroid.iter().map(|v| v.to_string()));
            }
            None => row.extend(std::iter::repeat(String::new()).take(4)),
        }
        if let Some(w) = weights {
            row.extend(w[i].iter().map(|v| v.to_string()));
        }
        csv.write_record(&row)?;
    }
    csv.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub set: TrainingSet,
    pub weights: Option<Vec<Vec<f64>>>,
}

fn parse_f64(field: &str, row: usize) -> Result<f64> {
    field
        .parse()
        .map_err(|_| Error::Parse(format!("row {row}: `{field}` is not a number")))
}

pub fn read_dataset<R: Read>(input: R) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    let header = reader.headers()?.clone();
    let cols: Vec<&str> = header.iter().collect();
    let dof = cols.iter().take_while(|c| c.starts_with('j')).count();
    let with_weights = cols.len() == 2 * dof + 5;
    if dof == 0 || cols != dataset_header(dof, with_weights) {
        return Err(Error::Parse(format!("unexpected dataset header: {}", cols.join(","))));
    }
    let mut set = TrainingSet {
        free: Vec::new(),
        obs: Vec::new(),
        reports: Vec::new(),
        checks: 0,
        self_collisions: 0,
    };
    let mut weights = with_weights.then(Vec::new);
    let mut seen_obs = false;
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let q: Vec<f64> = (0..dof).map(|i| parse_f64(&record[i], row)).collect::<Result<_>>()?;
        match &record[dof] {
            "free" => {
                if seen_obs {
                    return Err(Error::Parse(format!("row {row}: free sample after obs samples")));
                }
                set.free.push(q.into());
            }
            "obs" => {
                seen_obs = true;
                let link: usize = record[dof + 1]
                    .parse()
                    .map_err(|_| Error::Parse(format!("row {row}: bad link index")))?;
                let c: Vec<f64> = (0..3)
                    .map(|k| parse_f64(&record[dof + 2 + k], row))
                    .collect::<Result<_>>()?;
                set.obs.push(q.into());
                set.reports.push(CollisionReport {
                    first_link_index: link,
                    centroid: Vector3::new(c[0], c[1], c[2]),
                });
            }
            other => return Err(Error::Parse(format!("row {row}: unknown state `{other}`"))),
        }
        if let Some(w) = weights.as_mut() {
            w.push(
                (0..dof)
                    .map(|i| parse_f64(&record[dof + 5 + i], row))
                    .collect::<Result<_>>()?,
            );
        }
    }
    Ok(Dataset { set, weights })
}

/// Convenience for callers holding a `SampleClass` column.
pub fn class_counts(set: &TrainingSet) -> (usize, usize) {
    let free = set.samples().filter(|(_, c)| *c == SampleClass::Free).count();
    (free, set.len() - free)
}
