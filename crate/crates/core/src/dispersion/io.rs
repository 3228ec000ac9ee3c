//! CSV exchange for dispersion points and fit results.

use std::io::{Read, Write};

use super::{DispersionError, DispersionPoint, VoigtFit};

pub const POINTS_HEADER: [&str; 3] = ["frequency_hz", "speed_mps", "speed_sd_mps"];
pub const FIT_HEADER: [&str; 5] = [
    "mu1_pa",
    "mu2_pas",
    "rho_kgm3",
    "rms_residual_mps",
    "n_points",
];

fn csv_err(e: impl std::fmt::Display) -> DispersionError {
    DispersionError::Csv(e.to_string())
}

/// Reads `frequency_hz,speed_mps[,speed_sd_mps]` rows.
pub fn read_points<R: Read>(reader: R) -> Result<Vec<DispersionPoint<f64>>, DispersionError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let fi = col(POINTS_HEADER[0]).ok_or_else(|| csv_err("missing column frequency_hz"))?;
    let si = col(POINTS_HEADER[1]).ok_or_else(|| csv_err("missing column speed_mps"))?;
    let di = col(POINTS_HEADER[2]);

    let mut out = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let num = |i: usize| -> Result<f64, DispersionError> {
            let s = rec
                .get(i)
                .ok_or_else(|| csv_err(format!("row {}: missing field", line + 1)))?;
            s.parse::<f64>()
                .map_err(|e| csv_err(format!("row {}: {s:?}: {e}", line + 1)))
        };
        let speed_sd = match di.and_then(|i| rec.get(i)) {
            Some(s) if !s.is_empty() => Some(num(di.unwrap())?),
            _ => None,
        };
        let p = DispersionPoint {
            frequency: num(fi)?,
            speed: num(si)?,
            speed_sd,
        };
        p.validate()?;
        out.push(p);
    }
    Ok(out)
}

pub fn write_points<W: Write>(
    writer: W,
    points: &[DispersionPoint<f64>],
) -> Result<(), DispersionError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(POINTS_HEADER).map_err(csv_err)?;
    for p in points {
        let sd = p.speed_sd.map(|v| v.to_string()).unwrap_or_default();
        w.write_record([p.frequency.to_string(), p.speed.to_string(), sd])
            .map_err(csv_err)?;
    }
    w.flush().map_err(csv_err)
}

pub fn write_fit<W: Write>(writer: W, fit: &VoigtFit<f64>) -> Result<(), DispersionError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(FIT_HEADER).map_err(csv_err)?;
    let m = &fit.material;
    w.write_record([
        m.mu1.to_string(),
        m.mu2.to_string(),
        m.rho.to_string(),
        format!("{:e}", fit.rms_residual),
        fit.n_points.to_string(),
    ])
    .map_err(csv_err)?;
    w.flush().map_err(csv_err)
}
