//! Surface displacement records `u_y(x, t)` and their CSV form.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::SolverError;
use crate::scalar::Scalar;

/// Vertical displacement sampled at uniformly spaced surface points and frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WavefieldRecord<T = f64> {
    /// x-coordinates, m, strictly increasing and uniform.
    pub positions: Vec<T>,
    /// s.
    pub frame_interval: T,
    /// `samples[position][frame]`, m.
    pub samples: Vec<Vec<T>>,
}

impl<T: Scalar> WavefieldRecord<T> {
    pub fn new(
        positions: Vec<T>,
        frame_interval: T,
        samples: Vec<Vec<T>>,
    ) -> Result<Self, SolverError> {
        let r = Self {
            positions,
            frame_interval,
            samples,
        };
        r.validate()?;
        Ok(r)
    }

    /// Builds a record by evaluating `f(x, t)` on the grid, frames starting at t = 0.
    pub fn from_fn(
        positions: Vec<T>,
        frame_interval: T,
        frames: usize,
        f: impl Fn(T, T) -> T,
    ) -> Self {
        let samples = positions
            .iter()
            .map(|&x| {
                (0..frames)
                    .map(|k| f(x, T::from_usize_lossy(k) * frame_interval))
                    .collect()
            })
            .collect();
        Self {
            positions,
            frame_interval,
            samples,
        }
    }

    pub fn frames(&self) -> usize {
        self.samples.first().map_or(0, Vec::len)
    }

    pub fn pitch(&self) -> T {
        if self.positions.len() < 2 {
            return T::zero();
        }
        self.positions[1] - self.positions[0]
    }

    pub fn times(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.frames()).map(|k| T::from_usize_lossy(k) * self.frame_interval)
    }

    /// Checks shape, finiteness and uniform sampling in x and t.
    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |m: &str| Err(SolverError::InvalidInput(format!("wavefield record: {m}")));
        if self.positions.is_empty() || self.samples.len() != self.positions.len() {
            return bad("one sample row per position required");
        }
        if !(self.frame_interval.is_finite() && self.frame_interval > T::zero()) {
            return bad("frame interval must be positive");
        }
        let n = self.frames();
        if self.samples.iter().any(|r| r.len() != n) {
            return bad("ragged sample rows");
        }
        if self.samples.iter().flatten().any(|v| !v.is_finite()) {
            return bad("non-finite sample");
        }
        if self.positions.len() >= 2 {
            let d = self.pitch();
            if d <= T::zero() {
                return bad("positions must increase");
            }
            for w in self.positions.windows(2) {
                if ((w[1] - w[0]) - d).abs() > T::lit(1e-6) * d {
                    return bad("positions not uniformly spaced");
                }
            }
        }
        Ok(())
    }

    pub fn scaled(&self, s: T) -> Self {
        Self {
            samples: self
                .samples
                .iter()
                .map(|r| r.iter().map(|&v| v * s).collect())
                .collect(),
            ..self.clone()
        }
    }
}

fn column_name(x_m: f64) -> String {
    let mm = (x_m * 1e3 * 1e6).round() / 1e6;
    format!("uy_x{mm}mm")
}

fn parse_column(name: &str) -> Option<f64> {
    let mm: f64 = name
        .strip_prefix("uy_x")?
        .strip_suffix("mm")?
        .parse()
        .ok()?;
    Some(mm * 1e-3)
}

fn csv_err(e: impl std::fmt::Display) -> SolverError {
    SolverError::Csv(e.to_string())
}

/// Writes `t_s,uy_x<mm>mm,...` with one row per frame.
pub fn write_record_csv<W: Write, T: Scalar>(
    writer: W,
    record: &WavefieldRecord<T>,
) -> Result<(), SolverError> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["t_s".to_string()];
    header.extend(
        record
            .positions
            .iter()
            .map(|x| column_name(x.to_f64_lossy())),
    );
    w.write_record(&header).map_err(csv_err)?;
    for (k, t) in record.times().enumerate() {
        let mut row = vec![format!("{:e}", t.to_f64_lossy())];
        row.extend(
            record
                .samples
                .iter()
                .map(|r| format!("{:e}", r[k].to_f64_lossy())),
        );
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(csv_err)
}

pub fn read_record_csv<R: Read>(reader: R) -> Result<WavefieldRecord<f64>, SolverError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    if headers.get(0) != Some("t_s") {
        return Err(csv_err("first column must be t_s"));
    }
    let positions: Vec<f64> = headers
        .iter()
        .skip(1)
        .map(|h| parse_column(h).ok_or_else(|| csv_err(format!("bad column name {h:?}"))))
        .collect::<Result<_, _>>()?;
    let mut times = Vec::new();
    let mut samples = vec![Vec::new(); positions.len()];
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let vals: Vec<f64> = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| csv_err(format!("{s:?}: {e}"))))
            .collect::<Result<_, _>>()?;
        if vals.len() != positions.len() + 1 {
            return Err(csv_err("row length does not match header"));
        }
        times.push(vals[0]);
        for (row, v) in samples.iter_mut().zip(&vals[1..]) {
            row.push(*v);
        }
    }
    if times.len() < 2 {
        return Err(csv_err("need at least two frames"));
    }
    let dt = times[1] - times[0];
    for w in times.windows(2) {
        if ((w[1] - w[0]) - dt).abs() > 1e-6 * dt {
            return Err(SolverError::InvalidInput("non-uniform frame times".into()));
        }
    }
    WavefieldRecord::new(positions, dt, samples)
}
