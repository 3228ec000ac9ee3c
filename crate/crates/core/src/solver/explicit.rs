//! Central-difference time integration with lumped mass.
//!
//! Velocities live at half steps. Viscous (Voigt) forces use the lagged
//! velocity `v(n - 1/2)`, so the stable step accounts for damping as well as
//! stiffness: for a mode with frequency `w` and damping rate `c`,
//! `dt <= (sqrt(c^2 + 4 w^2) - c) / w^2`.

use serde::{Deserialize, Serialize};

use super::element::max_eigenvalue;
use super::material::RegionProps;
use super::model::{PhantomModel, Region};
use super::record::WavefieldRecord;
use super::SolverError;
use crate::scalar::{is_pos, Scalar};

/// Tone burst applied as vertical displacement on the driven segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct Excitation<T = f64> {
    /// Hz.
    pub frequency: T,
    /// s.
    pub duration: T,
    /// m.
    pub amplitude: T,
    /// m.
    pub contact_width: T,
}

impl<T: Scalar> Default for Excitation<T> {
    fn default() -> Self {
        Self {
            frequency: T::lit(100.0),
            duration: T::lit(0.1),
            amplitude: T::lit(1e-4),
            contact_width: T::lit(0.003),
        }
    }
}

impl<T: Scalar> Excitation<T> {
    pub fn at(frequency: T) -> Self {
        Self {
            frequency,
            ..Self::default()
        }
    }

    /// `A w(t) sin(2 pi f t)`, `w` a half-cosine ramp over the first period.
    pub fn displacement(&self, t: T) -> T {
        if t <= T::zero() || t > self.duration {
            return T::zero();
        }
        let phase = T::TAU() * self.frequency * t;
        let period = T::one() / self.frequency;
        let ramp = if t < period {
            T::lit(0.5) * (T::one() - (T::PI() * t / period).cos())
        } else {
            T::one()
        };
        self.amplitude * ramp * phase.sin()
    }
}

/// Surface sampling positions: `count` points from `start` at `pitch`, metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct RecordLayout<T = f64> {
    pub start: T,
    pub count: usize,
    pub pitch: T,
}

impl<T: Scalar> Default for RecordLayout<T> {
    fn default() -> Self {
        Self {
            start: T::lit(0.056),
            count: 9,
            pitch: T::lit(0.001),
        }
    }
}

impl<T: Scalar> RecordLayout<T> {
    pub fn positions(&self) -> Vec<T> {
        (0..self.count)
            .map(|i| self.start + T::from_usize_lossy(i) * self.pitch)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct SolverConfig<T = f64> {
    pub cfl: T,
    /// Recording frame interval, s.
    pub frame_interval: T,
    /// Recording length, s; defaults to the excitation duration.
    pub record_duration: Option<T>,
    pub record: RecordLayout<T>,
    /// Displacements above `bound_factor * amplitude` count as instability.
    pub bound_factor: T,
}

impl<T: Scalar> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            cfl: T::lit(0.5),
            frame_interval: T::lit(1.0 / 2000.0),
            record_duration: None,
            record: RecordLayout::default(),
            bound_factor: T::lit(100.0),
        }
    }
}

/// Stable step for a set of regions sharing element size `h`.
///
/// Elastic bound `cfl h / max c_p` over every region, tightened for damped
/// regions by the lagged-velocity limit with `w^2` the largest eigenvalue of
/// the element stiffness over its lumped mass and `c = tau w^2 + extra`.
pub fn time_step_bound<T: Scalar>(h: T, regions: &[(RegionProps<T>, T)], cfl: T) -> T {
    let mut dt = T::infinity();
    for (p, extra_damping) in regions {
        dt = dt.min(cfl * h / p.as_elastic().p_wave_speed());
        if p.retardation > T::zero() || *extra_damping > T::zero() {
            let k = super::element::stiffness(p.youngs, p.poisson, h);
            let w2 = max_eigenvalue(&k) / (p.rho * h * h * T::lit(0.25));
            let c = p.retardation * w2 + *extra_damping;
            dt = dt.min(cfl * ((c * c + T::lit(4.0) * w2).sqrt() - c) / w2);
        }
    }
    dt
}

/// Largest stable explicit time step for `model` scaled by `cfl`.
pub fn stable_time_step<T: Scalar>(model: &PhantomModel<T>, cfl: T) -> T {
    // largest mass-proportional and dashpot damping rates, 1/s
    let mut extra = T::zero();
    for (n, &c) in model.mass_damping.iter().enumerate() {
        extra = extra.max(c / model.mass[n]);
    }
    let mut dash = T::zero();
    for &(n, c) in &model.dashpots {
        dash = dash.max(c[0].max(c[1]) / model.mass[n as usize]);
    }
    let regions: Vec<_> = Region::ALL
        .iter()
        .filter(|&&r| model.elements_in(r) > 0)
        .filter_map(|&r| {
            model.props[r as usize].map(|p| {
                let e = match r {
                    Region::Sponge | Region::Absorber => extra + dash,
                    _ => T::zero(),
                };
                (p, e)
            })
        })
        .collect();
    time_step_bound(model.h, &regions, cfl)
}

/// Record plus diagnostics from one run.
#[derive(Debug, Clone)]
pub struct SimulationOutput<T = f64> {
    pub record: WavefieldRecord<T>,
    /// Kinetic plus strain energy at each frame, J per metre of thickness.
    pub energy: Vec<T>,
    pub dt: T,
    pub steps: usize,
    /// Largest |u| seen at any fixed node (always zero).
    pub max_fixed_displacement: T,
}

/// Runs the tone burst and returns the surface record.
pub fn simulate<T: Scalar>(
    model: &PhantomModel<T>,
    excitation: &Excitation<T>,
    config: &SolverConfig<T>,
) -> Result<WavefieldRecord<T>, SolverError> {
    simulate_detailed(model, excitation, config).map(|o| o.record)
}

pub fn simulate_detailed<T: Scalar>(
    model: &PhantomModel<T>,
    excitation: &Excitation<T>,
    config: &SolverConfig<T>,
) -> Result<SimulationOutput<T>, SolverError> {
    let ex = *excitation;
    if !is_pos(ex.frequency)
        || !is_pos(ex.duration)
        || !ex.amplitude.is_finite()
        || ex.amplitude < T::zero()
    {
        return Err(SolverError::InvalidInput(format!(
            "invalid excitation {ex:?}"
        )));
    }
    if !is_pos(config.frame_interval) || !is_pos(config.cfl) {
        return Err(SolverError::InvalidInput(
            "frame_interval and cfl must be positive".into(),
        ));
    }
    let nyquist = T::lit(0.5) / config.frame_interval;
    if ex.frequency >= nyquist {
        return Err(SolverError::InvalidInput(format!(
            "excitation {} Hz at or above recording Nyquist {} Hz",
            ex.frequency, nyquist
        )));
    }
    if (ex.contact_width - model.contact_width).abs() > model.h * T::lit(0.5) {
        return Err(SolverError::InvalidInput(format!(
            "excitation contact width {} m differs from the meshed driven segment {} m",
            ex.contact_width, model.contact_width
        )));
    }
    let amplitude = ex.amplitude;
    simulate_with_drive(
        model,
        &|t| ex.displacement(t),
        amplitude,
        ex.duration,
        config,
    )
}

/// Integrates with an arbitrary prescribed vertical drive `drive(t)` on the
/// driven nodes, active for `0 < t <= drive_duration`; afterwards the driven
/// nodes are released. `amplitude` scales the instability bound.
pub fn simulate_with_drive<T: Scalar>(
    model: &PhantomModel<T>,
    drive: &dyn Fn(T) -> T,
    amplitude: T,
    drive_duration: T,
    config: &SolverConfig<T>,
) -> Result<SimulationOutput<T>, SolverError> {
    let positions = config.record.positions();
    if positions.is_empty() {
        return Err(SolverError::InvalidInput(
            "record layout has no positions".into(),
        ));
    }
    let probe: Vec<usize> = positions
        .iter()
        .map(|&x| {
            model
                .surface_node_at(x)
                .map(|n| n as usize)
                .ok_or_else(|| SolverError::InvalidInput(format!("no surface node at x = {x} m")))
        })
        .collect::<Result<_, _>>()?;

    let duration = config.record_duration.unwrap_or(drive_duration);
    let frames = (duration / config.frame_interval)
        .round()
        .to_usize()
        .unwrap_or(0);
    let dt_max = stable_time_step(model, config.cfl);
    let substeps = (config.frame_interval / dt_max)
        .ceil()
        .to_usize()
        .unwrap_or(1)
        .max(1);
    let dt = config.frame_interval / T::from_usize_lossy(substeps);
    let bound = config.bound_factor * amplitude;

    let n = model.nodes.len();
    let mut u = vec![T::zero(); 2 * n];
    let mut v = vec![T::zero(); 2 * n];
    let mut force = vec![T::zero(); 2 * n];
    let inv_mass: Vec<T> = model.mass.iter().map(|&m| T::one() / m).collect();
    let damp_rate: Vec<T> = model
        .mass_damping
        .iter()
        .zip(&model.mass)
        .map(|(&c, &m)| c / m)
        .collect();

    let mut fixed = vec![false; n];
    for &f in &model.fixed {
        fixed[f as usize] = true;
    }

    let mut samples = vec![Vec::with_capacity(frames); probe.len()];
    let mut energy = Vec::with_capacity(frames);
    let mut max_fixed = T::zero();
    let mut step = 0usize;

    for frame in 0..frames {
        for (row, &p) in samples.iter_mut().zip(&probe) {
            row.push(u[2 * p + 1]);
        }
        energy.push(total_energy(model, &u, &v));
        if frame + 1 == frames {
            break;
        }
        for _ in 0..substeps {
            internal_force(model, &u, &v, &mut force);
            for &(node, c) in &model.dashpots {
                let j = 2 * node as usize;
                force[j] = force[j] - c[0] * v[j];
                force[j + 1] = force[j + 1] - c[1] * v[j + 1];
            }
            for i in 0..n {
                if fixed[i] {
                    continue;
                }
                let a = inv_mass[i];
                let d = damp_rate[i];
                for j in [2 * i, 2 * i + 1] {
                    v[j] = v[j] + dt * (force[j] * a - d * v[j]);
                }
            }
            step += 1;
            let t_next = T::from_usize_lossy(step) * dt;
            for j in 0..2 * n {
                u[j] = u[j] + dt * v[j];
            }
            for &f in &model.fixed {
                let i = f as usize;
                max_fixed = max_fixed.max(u[2 * i].abs()).max(u[2 * i + 1].abs());
            }
            if t_next <= drive_duration {
                let g = drive(t_next);
                for &d in &model.driven {
                    let j = 2 * d as usize + 1;
                    v[j] = (g - (u[j] - dt * v[j])) / dt;
                    u[j] = g;
                }
            }
        }
        if let Some(bad) = u.iter().position(|x| !x.is_finite() || x.abs() > bound) {
            if !(bound == T::zero() && u[bad] == T::zero()) {
                return Err(SolverError::Unstable {
                    step,
                    time: (T::from_usize_lossy(step) * dt).to_f64_lossy(),
                });
            }
        }
    }

    Ok(SimulationOutput {
        record: WavefieldRecord {
            positions: probe.iter().map(|&p| model.nodes[p][0]).collect(),
            frame_interval: config.frame_interval,
            samples,
        },
        energy,
        dt,
        steps: step,
        max_fixed_displacement: max_fixed,
    })
}

/// `force = -sum_e K_e (u_e + tau v_e)`, accumulated in element order.
fn internal_force<T: Scalar>(model: &PhantomModel<T>, u: &[T], v: &[T], force: &mut [T]) {
    force.iter_mut().for_each(|f| *f = T::zero());
    let taus = model.props.map(|p| p.map_or(T::zero(), |p| p.retardation));
    for (conn, &r) in model.elements.iter().zip(&model.element_region) {
        let k = model.stiffness[r as usize]
            .as_ref()
            .expect("region stiffness");
        let tau = taus[r as usize];
        let mut w = [T::zero(); 8];
        for (a, &node) in conn.iter().enumerate() {
            let j = 2 * node as usize;
            w[2 * a] = u[j] + tau * v[j];
            w[2 * a + 1] = u[j + 1] + tau * v[j + 1];
        }
        for (a, &node) in conn.iter().enumerate() {
            let j = 2 * node as usize;
            let (row_x, row_y) = (&k[2 * a], &k[2 * a + 1]);
            let mut fx = T::zero();
            let mut fy = T::zero();
            for b in 0..8 {
                fx = fx + row_x[b] * w[b];
                fy = fy + row_y[b] * w[b];
            }
            force[j] = force[j] - fx;
            force[j + 1] = force[j + 1] - fy;
        }
    }
}

fn total_energy<T: Scalar>(model: &PhantomModel<T>, u: &[T], v: &[T]) -> T {
    let half = T::lit(0.5);
    let kinetic: T = model
        .mass
        .iter()
        .enumerate()
        .map(|(i, &m)| half * m * (v[2 * i] * v[2 * i] + v[2 * i + 1] * v[2 * i + 1]))
        .sum();
    let mut strain = T::zero();
    for (conn, &r) in model.elements.iter().zip(&model.element_region) {
        let k = model.stiffness[r as usize]
            .as_ref()
            .expect("region stiffness");
        let mut ue = [T::zero(); 8];
        for (a, &node) in conn.iter().enumerate() {
            ue[2 * a] = u[2 * node as usize];
            ue[2 * a + 1] = u[2 * node as usize + 1];
        }
        for a in 0..8 {
            let ku: T = (0..8).map(|b| k[a][b] * ue[b]).sum();
            strain = strain + half * ue[a] * ku;
        }
    }
    kinetic + strain
}
