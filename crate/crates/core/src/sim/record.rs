//! Per-step simulation records and their CSV form.

use crate::geom::{Mat3, Rotation, Vec3};
use crate::observer::{RotationalEsoState, TranslationalEsoState};
use crate::plant::RigidBodyState;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("writing {path}: {source}")]
    Write { path: PathBuf, source: csv::Error },
    #[error("reading {path}: {source}")]
    Read { path: PathBuf, source: csv::Error },
    #[error("{path}: {msg}")]
    Format { path: PathBuf, msg: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// Errors of the comparison observers against the true disturbances.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BaselineRow {
    pub leso_phi: Vec3,
    pub leso_tau: Vec3,
    pub fxtsdo_phi: Vec3,
    pub fxtsdo_tau: Vec3,
    pub leso_euler_singularity: bool,
    pub leso_diverged: bool,
    pub fxtsdo_diverged: bool,
}

/// One sample of a closed-loop run.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SimRow {
    pub t: f64,
    pub truth: RigidBodyState,
    pub phi_d: Vec3,
    pub tau_d: Vec3,
    pub translational: TranslationalEsoState,
    pub rotational: RotationalEsoState,
    pub e_phi: Vec3,
    pub e_tau: Vec3,
    pub attitude_error: f64,
    pub thrust: f64,
    pub torque: Vec3,
    pub v_t: f64,
    pub v_a: f64,
    pub diverged: bool,
    pub baselines: Option<BaselineRow>,
}

/// A run's samples plus the column layout they were produced with.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimRecord {
    pub with_baselines: bool,
    pub rows: Vec<SimRow>,
}

impl SimRecord {
    pub fn new(with_baselines: bool) -> Self {
        Self { with_baselines, rows: Vec::new() }
    }

    /// Whether any sample was taken after the integrator reported a non-finite state.
    pub fn diverged(&self) -> bool {
        self.rows.iter().any(|r| r.diverged)
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(|r| r.t)
    }
}

/// Walks every field of a row in column order.
trait Visitor {
    fn scalar(&mut self, name: &str, unit: &str, x: &mut f64);
    fn flag(&mut self, name: &str, x: &mut bool);

    fn vec3(&mut self, name: &str, unit: &str, v: &mut Vec3) {
        for (i, axis) in ["x", "y", "z"].iter().enumerate() {
            self.scalar(&format!("{name}_{axis}"), unit, &mut v[i]);
        }
    }

    fn rotation(&mut self, name: &str, r: &mut Rotation) {
        let mut m: Mat3 = *r.matrix();
        for i in 0..3 {
            for j in 0..3 {
                self.scalar(&format!("{name}_{}{}", i + 1, j + 1), "1", &mut m[(i, j)]);
            }
        }
        *r = Rotation::from_matrix_unchecked(m);
    }
}

fn visit(row: &mut SimRow, with_baselines: bool, v: &mut impl Visitor) {
    v.scalar("t", "s", &mut row.t);
    v.vec3("b", "m", &mut row.truth.pose.position);
    v.vec3("v", "m/s", &mut row.truth.v);
    v.rotation("R", &mut row.truth.pose.rotation);
    v.vec3("omega", "rad/s", &mut row.truth.omega);
    v.vec3("phi_d", "N", &mut row.phi_d);
    v.vec3("tau_d", "N*m", &mut row.tau_d);
    v.vec3("b_hat", "m", &mut row.translational.b_hat);
    v.vec3("v_hat", "m/s", &mut row.translational.v_hat);
    v.vec3("phi_hat", "N", &mut row.translational.phi_hat);
    v.rotation("R_hat", &mut row.rotational.r_hat);
    v.vec3("omega_hat", "rad/s", &mut row.rotational.omega_hat);
    v.vec3("tau_hat", "N*m", &mut row.rotational.tau_hat);
    v.vec3("e_phi", "N", &mut row.e_phi);
    v.vec3("e_tau", "N*m", &mut row.e_tau);
    v.scalar("attitude_error", "rad", &mut row.attitude_error);
    v.scalar("thrust", "N", &mut row.thrust);
    v.vec3("torque", "N*m", &mut row.torque);
    v.scalar("V_t", "1", &mut row.v_t);
    v.scalar("V_a", "1", &mut row.v_a);
    v.flag("diverged", &mut row.diverged);
    if with_baselines {
        let b = row.baselines.get_or_insert_with(BaselineRow::default);
        v.vec3("leso_e_phi", "N", &mut b.leso_phi);
        v.vec3("leso_e_tau", "N*m", &mut b.leso_tau);
        v.vec3("fxtsdo_e_phi", "N", &mut b.fxtsdo_phi);
        v.vec3("fxtsdo_e_tau", "N*m", &mut b.fxtsdo_tau);
        v.flag("leso_euler_singularity", &mut b.leso_euler_singularity);
        v.flag("leso_diverged", &mut b.leso_diverged);
        v.flag("fxtsdo_diverged", &mut b.fxtsdo_diverged);
    }
}

struct Header(Vec<String>);

impl Visitor for Header {
    fn scalar(&mut self, name: &str, unit: &str, _: &mut f64) {
        self.0.push(format!("{name}[{unit}]"));
    }
    fn flag(&mut self, name: &str, _: &mut bool) {
        self.0.push(format!("{name}[flag]"));
    }
}

struct Writer(Vec<String>);

impl Visitor for Writer {
    fn scalar(&mut self, _: &str, _: &str, x: &mut f64) {
        // Debug formatting is the shortest text that parses back to the same bits.
        self.0.push(format!("{x:?}"));
    }
    fn flag(&mut self, _: &str, x: &mut bool) {
        self.0.push(if *x { "1" } else { "0" }.to_string());
    }
}

struct Reader<'a, I: Iterator<Item = &'a str>> {
    fields: I,
    error: Option<String>,
}

impl<'a, I: Iterator<Item = &'a str>> Reader<'a, I> {
    fn next(&mut self, name: &str) -> Option<&'a str> {
        let f = self.fields.next();
        if f.is_none() && self.error.is_none() {
            self.error = Some(format!("missing column {name}"));
        }
        f
    }
}

impl<'a, I: Iterator<Item = &'a str>> Visitor for Reader<'a, I> {
    fn scalar(&mut self, name: &str, _: &str, x: &mut f64) {
        if let Some(s) = self.next(name) {
            match s.parse() {
                Ok(v) => *x = v,
                Err(_) => {
                    self.error.get_or_insert_with(|| format!("column {name}: bad number '{s}'"));
                }
            }
        }
    }
    fn flag(&mut self, name: &str, x: &mut bool) {
        match self.next(name) {
            Some("1") => *x = true,
            Some("0") => *x = false,
            Some(s) => {
                self.error.get_or_insert_with(|| format!("column {name}: bad flag '{s}'"));
            }
            None => {}
        }
    }
}

/// Column names with units, in CSV order.
pub fn columns(with_baselines: bool) -> Vec<String> {
    let mut h = Header(Vec::new());
    visit(&mut SimRow::default(), with_baselines, &mut h);
    h.0
}

pub fn row_values(row: &SimRow, with_baselines: bool) -> Vec<String> {
    let mut w = Writer(Vec::new());
    visit(&mut row.clone(), with_baselines, &mut w);
    w.0
}

/// Writes `rec` as CSV: one header row, then one row per sample.
pub fn emit_csv(rec: &SimRecord, path: &Path) -> Result<(), RecordError> {
    let err = |source| RecordError::Write { path: path.to_owned(), source };
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    write_csv(rec, &mut w).map_err(err)?;
    w.flush().map_err(|source| RecordError::Io { path: path.to_owned(), source })
}

/// CSV text of `rec`.
pub fn csv_string(rec: &SimRecord) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    write_csv(rec, &mut w).expect("in-memory CSV write");
    String::from_utf8(w.into_inner().expect("in-memory CSV flush")).expect("CSV is UTF-8")
}

fn write_csv<W: std::io::Write>(rec: &SimRecord, w: &mut csv::Writer<W>) -> Result<(), csv::Error> {
    w.write_record(columns(rec.with_baselines))?;
    for row in &rec.rows {
        w.write_record(row_values(row, rec.with_baselines))?;
    }
    Ok(())
}

/// Parses a CSV produced by [`emit_csv`].
pub fn parse_csv(path: &Path) -> Result<SimRecord, RecordError> {
    let rd = csv::Reader::from_path(path)
        .map_err(|source| RecordError::Read { path: path.to_owned(), source })?;
    parse_reader(rd, path)
}

pub fn parse_csv_str(text: &str) -> Result<SimRecord, RecordError> {
    parse_reader(csv::Reader::from_reader(text.as_bytes()), Path::new("<memory>"))
}

fn parse_reader<R: std::io::Read>(mut rd: csv::Reader<R>, path: &Path) -> Result<SimRecord, RecordError> {
    let read_err = |source| RecordError::Read { path: path.to_owned(), source };
    let fmt_err = |msg: String| RecordError::Format { path: path.to_owned(), msg };
    let header: Vec<String> = rd.headers().map_err(read_err)?.iter().map(str::to_owned).collect();
    let with_baselines = if header == columns(true) {
        true
    } else if header == columns(false) {
        false
    } else {
        return Err(fmt_err("unrecognised header".into()));
    };
    let mut rec = SimRecord::new(with_baselines);
    for (i, result) in rd.records().enumerate() {
        let r = result.map_err(read_err)?;
        let mut row = SimRow::default();
        let mut reader = Reader { fields: r.iter(), error: None };
        visit(&mut row, with_baselines, &mut reader);
        if let Some(msg) = reader.error {
            return Err(fmt_err(format!("row {}: {msg}", i + 1)));
        }
        if !with_baselines {
            row.baselines = None;
        }
        rec.rows.push(row);
    }
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_record_is_header_only() {
        let text = csv_string(&SimRecord::new(false));
        assert_eq!(text.lines().count(), 1);
        assert_eq!(text.lines().next().unwrap().split(',').count(), columns(false).len());
    }

    #[test]
    fn column_counts() {
        // t + truth (3+3+9+3) + disturbances (6) + estimates (3+3+3+9+3+3)
        // + errors (3+3+1) + control (1+3) + monitors (2) + flag.
        assert_eq!(columns(false).len(), 1 + 18 + 6 + 24 + 7 + 4 + 2 + 1);
        assert_eq!(columns(true).len(), columns(false).len() + 12 + 3);
    }
}
