//! Phase-delay-versus-distance speed estimate.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::{AnalysisError, Diagnostics, Method, SpeedEstimate};
use crate::scalar::{is_pos, Scalar};
use crate::solver::WavefieldRecord;
use crate::stats::special::student_t_quantile;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct PhaseOptions<T = f64> {
    /// Slowest speed the caller expects, m/s; bounds the admissible phase step.
    pub speed_bound: T,
    /// Frames earlier than this are ignored, s.
    pub settle_time: T,
}

impl<T: Scalar> Default for PhaseOptions<T> {
    fn default() -> Self {
        Self {
            speed_bound: T::one(),
            settle_time: T::zero(),
        }
    }
}

/// Complex amplitude at `frequency` for each position, projected over the
/// longest whole number of periods that ends at the last frame.
pub fn single_bin_phasors<T: Scalar>(
    record: &WavefieldRecord<T>,
    frequency: T,
    settle_time: T,
) -> Result<Vec<Complex<T>>, AnalysisError> {
    let dt = record.frame_interval;
    let first = (settle_time / dt).ceil().to_usize().unwrap_or(0);
    let n = record.frames().saturating_sub(first);
    let cycles_per_frame = frequency * dt;
    let cycles = (T::from_usize_lossy(n) * cycles_per_frame).floor();
    if cycles < T::one() {
        return Err(AnalysisError::Precondition(
            "record shorter than one excitation period".into(),
        ));
    }
    let m = (cycles / cycles_per_frame)
        .round()
        .to_usize()
        .unwrap_or(n)
        .min(n);
    let start = record.frames() - m;
    let omega = T::TAU() * frequency;
    // basis evaluated once, times measured from the window start
    let basis: Vec<Complex<T>> = (0..m)
        .map(|k| {
            let arg = -omega * T::from_usize_lossy(start + k) * dt;
            Complex::new(arg.cos(), arg.sin())
        })
        .collect();
    Ok(record
        .samples
        .iter()
        .map(|row| {
            row[start..]
                .iter()
                .zip(&basis)
                .fold(Complex::new(T::zero(), T::zero()), |acc, (&u, &b)| {
                    acc + b * u
                })
        })
        .collect())
}

/// Speed from the unwrapped-phase slope with default options.
pub fn phase_delay_speed<T: Scalar>(
    record: &WavefieldRecord<T>,
    frequency: T,
) -> Result<SpeedEstimate<T>, AnalysisError> {
    phase_delay_speed_with(record, frequency, &PhaseOptions::default())
}

pub fn phase_delay_speed_with<T: Scalar>(
    record: &WavefieldRecord<T>,
    frequency: T,
    opts: &PhaseOptions<T>,
) -> Result<SpeedEstimate<T>, AnalysisError> {
    record
        .validate()
        .map_err(|e| AnalysisError::Precondition(e.to_string()))?;
    if !is_pos(frequency) {
        return Err(AnalysisError::Precondition(
            "frequency must be positive".into(),
        ));
    }
    let n = record.positions.len();
    if n < 3 {
        return Err(AnalysisError::Precondition(format!(
            "phase regression needs at least 3 positions, got {n}"
        )));
    }
    let pitch = record.pitch();
    let max_step = T::TAU() * frequency * pitch / opts.speed_bound;
    if max_step >= T::PI() {
        return Err(AnalysisError::Precondition(format!(
            "position pitch {pitch} m is not below half the shortest expected wavelength"
        )));
    }

    let phasors = single_bin_phasors(record, frequency, opts.settle_time)?;
    let mut phase: Vec<T> = phasors.iter().map(|z| z.im.atan2(z.re)).collect();
    let tau = T::TAU();
    for i in 1..n {
        let d = phase[i] - phase[i - 1];
        phase[i] = phase[i] - tau * (d / tau).round();
        if (phase[i] - phase[i - 1]).abs() > max_step {
            return Err(AnalysisError::Aliasing { index: i - 1 });
        }
    }

    let nf = T::from_usize_lossy(n);
    let xm = record.positions.iter().copied().sum::<T>() / nf;
    let pm = phase.iter().copied().sum::<T>() / nf;
    let sxx: T = record.positions.iter().map(|&x| (x - xm) * (x - xm)).sum();
    let sxy: T = record
        .positions
        .iter()
        .zip(&phase)
        .map(|(&x, &p)| (x - xm) * (p - pm))
        .sum();
    let slope = sxy / sxx;
    if slope.abs() < T::lit(1e-6) {
        return Err(AnalysisError::DegenerateSlope {
            slope: slope.to_f64_lossy(),
        });
    }
    let intercept = pm - slope * xm;
    let sse: T = record
        .positions
        .iter()
        .zip(&phase)
        .map(|(&x, &p)| {
            let r = p - (intercept + slope * x);
            r * r
        })
        .sum();
    let syy: T = phase.iter().map(|&p| (p - pm) * (p - pm)).sum();
    let r_squared = if syy > T::zero() {
        T::one() - sse / syy
    } else {
        T::one()
    };
    let dof = nf - T::lit(2.0);
    let se = (sse / dof / sxx).sqrt();
    let speed = T::TAU() * frequency / slope.abs();
    let q = student_t_quantile(T::lit(0.975), dof);
    Ok(SpeedEstimate {
        speed,
        method: Method::PhaseGradient,
        ci_halfwidth: Some(speed * q * se / slope.abs()),
        diagnostics: Diagnostics::PhaseGradient { slope, r_squared },
    })
}
