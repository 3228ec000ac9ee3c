//! Wavenumber-frequency (k-space) spectrum and peak-based phase velocity.

use std::io::Write;

use num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::{AnalysisError, Diagnostics, Method, SpeedEstimate};
use crate::scalar::Scalar;
use crate::solver::WavefieldRecord;

/// Magnitude of the 2D spectrum; `magnitude[k_index][f_index]`.
#[derive(Debug, Clone, PartialEq)]
pub struct KSpaceMap<T = f64> {
    /// Spatial frequency, cycles per metre, increasing.
    pub k_axis: Vec<T>,
    /// Temporal frequency, Hz, increasing.
    pub f_axis: Vec<T>,
    pub magnitude: Vec<Vec<T>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct KSpaceOptions {
    /// Zero-padding factor applied to both dimensions before rounding up to a power of two.
    pub pad_factor: usize,
    /// Minimum padded length along x.
    pub min_k_len: usize,
}

impl Default for KSpaceOptions {
    fn default() -> Self {
        Self {
            pad_factor: 4,
            min_k_len: 512,
        }
    }
}

/// Hann window without the zero end points.
fn hann<T: Scalar>(n: usize) -> Vec<T> {
    let denom = T::from_usize_lossy(n + 1);
    (0..n)
        .map(|i| T::lit(0.5) * (T::one() - (T::TAU() * T::from_usize_lossy(i + 1) / denom).cos()))
        .collect()
}

fn centred_axis<T: Scalar>(n: usize, step: T) -> Vec<T> {
    (0..n)
        .map(|i| (T::from_usize_lossy(i) - T::from_usize_lossy(n / 2)) * step)
        .collect()
}

pub fn kspace_transform<T: Scalar>(
    record: &WavefieldRecord<T>,
) -> Result<KSpaceMap<T>, AnalysisError> {
    kspace_transform_with(record, &KSpaceOptions::default())
}

/// Hann-windowed, zero-padded 2D DFT magnitude, unitary scaling so that
/// the summed squared magnitude equals the windowed signal energy.
pub fn kspace_transform_with<T: Scalar>(
    record: &WavefieldRecord<T>,
    opts: &KSpaceOptions,
) -> Result<KSpaceMap<T>, AnalysisError> {
    record
        .validate()
        .map_err(|e| AnalysisError::Precondition(e.to_string()))?;
    let (nx, nt) = (record.positions.len(), record.frames());
    if nx < 2 || nt < 2 {
        return Err(AnalysisError::Precondition(
            "need at least 2 positions and 2 frames".into(),
        ));
    }
    let pad = opts.pad_factor.max(1);
    let px = (pad * nx)
        .next_power_of_two()
        .max(opts.min_k_len.next_power_of_two());
    let pt = (pad * nt).next_power_of_two();

    let wx = hann::<T>(nx);
    let wt = hann::<T>(nt);
    let zero = Complex::new(T::zero(), T::zero());
    // grid[x][t]
    let mut grid = vec![vec![zero; pt]; px];
    for (i, row) in record.samples.iter().enumerate() {
        for (n, &u) in row.iter().enumerate() {
            grid[i][n] = Complex::new(u * wx[i] * wt[n], T::zero());
        }
    }

    let mut planner = FftPlanner::<T>::new();
    // e^{-j 2 pi F t} in time, e^{+j 2 pi K x} in space: waves moving to +x land at K > 0.
    let fft_t = planner.plan_fft_forward(pt);
    for row in grid.iter_mut() {
        fft_t.process(row);
    }
    let fft_x = planner.plan_fft_inverse(px);
    let mut col = vec![zero; px];
    for n in 0..pt {
        for i in 0..px {
            col[i] = grid[i][n];
        }
        fft_x.process(&mut col);
        for i in 0..px {
            grid[i][n] = col[i];
        }
    }

    let scale = T::one() / (T::from_usize_lossy(px) * T::from_usize_lossy(pt)).sqrt();
    let magnitude = (0..px)
        .map(|ki| {
            let si = (ki + px - px / 2) % px;
            (0..pt)
                .map(|fi| {
                    let sn = (fi + pt - pt / 2) % pt;
                    grid[si][sn].norm() * scale
                })
                .collect()
        })
        .collect();

    let dk = T::one() / (T::from_usize_lossy(px) * record.pitch());
    let df = T::one() / (T::from_usize_lossy(pt) * record.frame_interval);
    Ok(KSpaceMap {
        k_axis: centred_axis(px, dk),
        f_axis: centred_axis(pt, df),
        magnitude,
    })
}

impl<T: Scalar> KSpaceMap<T> {
    pub fn k_step(&self) -> T {
        self.k_axis[1] - self.k_axis[0]
    }

    pub fn f_step(&self) -> T {
        self.f_axis[1] - self.f_axis[0]
    }

    pub fn energy(&self) -> T {
        self.magnitude.iter().flatten().map(|&m| m * m).sum()
    }

    /// Index of the f-axis sample nearest `f`.
    pub fn nearest_f(&self, f: T) -> usize {
        let mut best = 0;
        for (i, &v) in self.f_axis.iter().enumerate() {
            if (v - f).abs() < (self.f_axis[best] - f).abs() {
                best = i;
            }
        }
        best
    }
}

/// Phase velocity `f / k_p` from the peak of the row nearest the excitation frequency.
pub fn kspace_peak_speed<T: Scalar>(
    map: &KSpaceMap<T>,
    excitation_frequency: T,
) -> Result<SpeedEstimate<T>, AnalysisError> {
    let (fmin, fmax) = (map.f_axis[0], *map.f_axis.last().unwrap());
    if !(excitation_frequency > fmin && excitation_frequency <= fmax) {
        return Err(AnalysisError::Precondition(format!(
            "frequency {excitation_frequency} Hz outside the map"
        )));
    }
    let row = map.nearest_f(excitation_frequency);
    let first_pos = map
        .k_axis
        .iter()
        .position(|&k| k > T::zero())
        .unwrap_or(map.k_axis.len());
    let last = map.k_axis.len() - 1;

    let mut best = first_pos;
    for i in first_pos..=last {
        if map.magnitude[i][row] > map.magnitude[best][row] {
            best = i;
        }
    }
    let peak = map.magnitude[best][row];
    if !(peak > T::zero()) {
        return Err(AnalysisError::UnreliablePeak(
            "no energy at the excitation frequency".into(),
        ));
    }
    if best == last {
        return Err(AnalysisError::UnreliablePeak(
            "peak at the wavenumber boundary".into(),
        ));
    }
    let dk = map.k_step();
    if map.k_axis[best] < T::lit(2.0) * dk {
        return Err(AnalysisError::UnreliablePeak(format!(
            "peak at K = {} 1/m is within two bins of zero",
            map.k_axis[best]
        )));
    }
    let (ym, y0, yp) = (
        map.magnitude[best - 1][row],
        peak,
        map.magnitude[best + 1][row],
    );
    let denom = ym - T::lit(2.0) * y0 + yp;
    let delta = if denom < T::zero() {
        T::lit(0.5) * (ym - yp) / denom
    } else {
        T::zero()
    };
    let k_peak = map.k_axis[best] + delta * dk;
    Ok(SpeedEstimate {
        speed: excitation_frequency / k_peak,
        method: Method::Kspace,
        ci_halfwidth: None,
        diagnostics: Diagnostics::Kspace {
            f_peak: excitation_frequency,
            k_peak,
        },
    })
}

/// Grid CSV: first row holds the f axis, first column the k axis.
pub fn write_kspace_csv<W: Write, T: Scalar>(
    writer: W,
    map: &KSpaceMap<T>,
) -> Result<(), AnalysisError> {
    let err = |e: csv::Error| AnalysisError::Csv(e.to_string());
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["k_per_m\\f_hz".to_string()];
    header.extend(map.f_axis.iter().map(|f| format!("{}", f.to_f64_lossy())));
    w.write_record(&header).map_err(err)?;
    for (k, row) in map.k_axis.iter().zip(&map.magnitude) {
        let mut rec = vec![format!("{}", k.to_f64_lossy())];
        rec.extend(row.iter().map(|m| format!("{:e}", m.to_f64_lossy())));
        w.write_record(&rec).map_err(err)?;
    }
    w.flush().map_err(|e| AnalysisError::Csv(e.to_string()))
}
