//! Gel thickness x frequency sweep: simulate, add repetition noise, estimate
//! speeds, compare against the gel-free base and write the study outputs.

mod output;
mod plot;

use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{
    add_measurement_noise, kspace_peak_speed, kspace_transform_with, phase_delay_speed_with,
    KSpaceOptions, Method, PhaseOptions, SpeedEstimate,
};
use crate::dispersion::VoigtMaterial;
use crate::solver::{
    build_model, simulate, ElasticMaterial, Excitation, PhantomGeometry, SolverConfig, SpongeSpec,
    WavefieldRecord,
};
use crate::stats::{describe, t_test_unpaired_with, SampleSummary, TTestResult, VarianceModel};

pub use output::{
    emit_outputs, read_sweep_csv, write_comparison_csv, write_summary_csv, write_sweep_csv,
    COMPARISON_HEADER, SWEEP_HEADER,
};
pub use plot::dispersion_svg;

/// Levels closer to zero than this count as the base level, m.
const BASE_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("no base (0 mm) gel level in the sweep result")]
    MissingBase,
}

/// Full study description. Every key has a default, so an empty TOML file
/// reproduces the reference study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    /// Gel thicknesses, m.
    pub gel_levels: Vec<f64>,
    /// Hz.
    pub frequencies: Vec<f64>,
    pub repetitions: usize,
    /// Standard deviation of the additive displacement noise, m.
    pub noise_sigma: f64,
    pub base_seed: u64,
    /// Worker threads; 0 lets the pool choose.
    pub threads: usize,
    /// Estimator behind the level comparison and the plot.
    pub comparison_method: Method,
    pub variance_model: VarianceModel,
    /// Write one k-space grid per (level, frequency) from the noiseless record.
    pub kspace_grids: bool,
    pub output_dir: PathBuf,
    pub geometry: PhantomGeometry,
    pub pad: ElasticMaterial,
    pub gel: VoigtMaterial,
    pub sponge: SpongeSpec,
    /// Template excitation; its frequency is replaced per cell.
    pub excitation: Excitation,
    pub solver: SolverConfig,
    pub phase: PhaseOptions,
    pub kspace: KSpaceOptions,
}

impl Default for SweepConfig {
    fn default() -> Self {
        let excitation = Excitation::default();
        Self {
            gel_levels: vec![0.0, 0.002, 0.007, 0.012],
            frequencies: vec![100.0, 150.0, 200.0, 250.0, 300.0],
            repetitions: 3,
            noise_sigma: 0.005 * excitation.amplitude,
            base_seed: 2019,
            threads: 0,
            comparison_method: Method::PhaseGradient,
            variance_model: VarianceModel::Welch,
            kspace_grids: false,
            output_dir: PathBuf::from("out"),
            geometry: PhantomGeometry::default(),
            pad: ElasticMaterial::standoff_pad(),
            gel: VoigtMaterial::gel(),
            sponge: SpongeSpec::default(),
            excitation,
            solver: SolverConfig::default(),
            phase: PhaseOptions::default(),
            kspace: KSpaceOptions::default(),
        }
    }
}

impl SweepConfig {
    pub fn from_toml(text: &str) -> Result<Self, ExperimentError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: &str| Err(ExperimentError::Config(m.into()));
        if self.gel_levels.is_empty() || self.frequencies.is_empty() {
            return bad("gel_levels and frequencies must be non-empty");
        }
        if self.repetitions == 0 {
            return bad("repetitions must be at least 1");
        }
        if self
            .gel_levels
            .iter()
            .any(|&g| !(g >= 0.0 && g.is_finite()))
        {
            return bad("gel levels must be finite and non-negative");
        }
        if self
            .frequencies
            .iter()
            .any(|&f| !(f > 0.0 && f.is_finite()))
        {
            return bad("frequencies must be finite and positive");
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return bad("noise_sigma must be finite and non-negative");
        }
        Ok(())
    }

    /// Seed for the noisy copy of repetition `rep` in cell `(level, freq)`,
    /// counting repetitions in output order.
    pub fn seed_for(&self, level: usize, freq: usize, rep: usize) -> u64 {
        let index = (level * self.frequencies.len() + freq) * self.repetitions + rep;
        self.base_seed.wrapping_add(index as u64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RowStatus {
    Ok,
    Failed(String),
}

impl RowStatus {
    pub fn label(&self) -> String {
        match self {
            RowStatus::Ok => "ok".into(),
            RowStatus::Failed(reason) => format!("failed: {reason}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// m.
    pub gel_level: f64,
    /// Hz.
    pub frequency: f64,
    pub rep: usize,
    pub method: Method,
    /// m/s; `None` on failure.
    pub speed: Option<f64>,
    pub ci: Option<f64>,
    pub status: RowStatus,
}

/// Noiseless surface record of one (level, frequency) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellRecord {
    pub gel_level: f64,
    pub frequency: f64,
    pub record: WavefieldRecord,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepResult {
    /// Ordered by level, frequency, repetition, method.
    pub rows: Vec<SweepRow>,
    pub records: Vec<CellRecord>,
}

impl SweepResult {
    /// Successful speeds for one cell and method, in repetition order.
    pub fn speeds(&self, gel_level: f64, frequency: f64, method: Method) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| {
                same(r.gel_level, gel_level) && same(r.frequency, frequency) && r.method == method
            })
            .filter_map(|r| r.speed)
            .collect()
    }

    pub fn gel_levels(&self) -> Vec<f64> {
        distinct(self.rows.iter().map(|r| r.gel_level))
    }

    pub fn frequencies(&self) -> Vec<f64> {
        distinct(self.rows.iter().map(|r| r.frequency))
    }

    pub fn failures(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| r.status != RowStatus::Ok)
            .count()
    }
}

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= BASE_TOL * (1.0 + a.abs().max(b.abs()))
}

fn distinct(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for v in values {
        if !out.iter().any(|&u| same(u, v)) {
            out.push(v);
        }
    }
    out
}

fn estimate(
    config: &SweepConfig,
    record: &WavefieldRecord,
    frequency: f64,
    method: Method,
) -> Result<SpeedEstimate, String> {
    let r = match method {
        Method::PhaseGradient => phase_delay_speed_with(record, frequency, &config.phase),
        Method::Kspace => kspace_transform_with(record, &config.kspace)
            .and_then(|m| kspace_peak_speed(&m, frequency)),
    };
    r.map_err(|e| e.to_string())
}

fn run_cell(config: &SweepConfig, li: usize, fi: usize) -> (Vec<SweepRow>, Option<CellRecord>) {
    let (level, frequency) = (config.gel_levels[li], config.frequencies[fi]);
    let simulated = (|| {
        let geometry = PhantomGeometry {
            gel_thickness: level,
            ..config.geometry
        };
        let model = build_model(&geometry, &config.pad, &config.gel, &config.sponge)
            .map_err(|e| e.to_string())?;
        let excitation = Excitation {
            frequency,
            ..config.excitation
        };
        simulate(&model, &excitation, &config.solver).map_err(|e| e.to_string())
    })();

    let mut rows = Vec::with_capacity(config.repetitions * Method::ALL.len());
    for rep in 0..config.repetitions {
        let noisy = simulated
            .as_ref()
            .map(|r| add_measurement_noise(r, config.noise_sigma, config.seed_for(li, fi, rep)));
        for method in Method::ALL {
            let est = match &noisy {
                Ok(r) => estimate(config, r, frequency, method),
                Err(e) => Err(e.to_string()),
            };
            let (speed, ci, status) = match est {
                Ok(e) => (Some(e.speed), e.ci_halfwidth, RowStatus::Ok),
                Err(reason) => (None, None, RowStatus::Failed(reason)),
            };
            rows.push(SweepRow {
                gel_level: level,
                frequency,
                rep,
                method,
                speed,
                ci,
                status,
            });
        }
    }
    let record = simulated.ok().map(|record| CellRecord {
        gel_level: level,
        frequency,
        record,
    });
    (rows, record)
}

/// Runs every (level, frequency) cell on a bounded worker pool. Output order
/// and contents do not depend on the thread count.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepResult, ExperimentError> {
    config.validate()?;
    let cells: Vec<(usize, usize)> = (0..config.gel_levels.len())
        .flat_map(|li| (0..config.frequencies.len()).map(move |fi| (li, fi)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| ExperimentError::Config(format!("worker pool: {e}")))?;
    let done: Vec<_> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(li, fi)| run_cell(config, li, fi))
            .collect()
    });
    let mut result = SweepResult::default();
    for (rows, record) in done {
        result.rows.extend(rows);
        result.records.extend(record);
    }
    Ok(result)
}

/// One non-base level against the base at one frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelComparison {
    pub frequency: f64,
    pub gel_level: f64,
    pub base: SampleSummary,
    pub level: SampleSummary,
    /// 100 (level mean / base mean - 1).
    pub percent_change: f64,
    /// `None` when either side has fewer than two successful repetitions.
    pub test: Option<TTestResult>,
}

/// Per-cell descriptive statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub gel_level: f64,
    pub frequency: f64,
    pub summary: SampleSummary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub method: Method,
    pub cells: Vec<CellSummary>,
    pub comparisons: Vec<LevelComparison>,
}

impl ComparisonReport {
    pub fn mean(&self, gel_level: f64, frequency: f64) -> Option<f64> {
        self.cells
            .iter()
            .find(|c| same(c.gel_level, gel_level) && same(c.frequency, frequency))
            .map(|c| c.summary.mean)
    }
}

pub fn compare_levels(
    result: &SweepResult,
    method: Method,
) -> Result<ComparisonReport, ExperimentError> {
    compare_levels_with(result, method, VarianceModel::Welch)
}

pub fn compare_levels_with(
    result: &SweepResult,
    method: Method,
    variance: VarianceModel,
) -> Result<ComparisonReport, ExperimentError> {
    let levels = result.gel_levels();
    let freqs = result.frequencies();
    if !result.rows.is_empty() && !levels.iter().any(|&l| l.abs() <= BASE_TOL) {
        return Err(ExperimentError::MissingBase);
    }
    let mut cells = Vec::new();
    for &l in &levels {
        for &f in &freqs {
            if let Ok(summary) = describe(&result.speeds(l, f, method)) {
                cells.push(CellSummary {
                    gel_level: l,
                    frequency: f,
                    summary,
                });
            }
        }
    }
    let mut comparisons = Vec::new();
    for &f in &freqs {
        let base = result.speeds(0.0, f, method);
        let Ok(base_summary) = describe(&base) else {
            continue;
        };
        for &l in levels.iter().filter(|l| l.abs() > BASE_TOL) {
            let other = result.speeds(l, f, method);
            let Ok(level_summary) = describe(&other) else {
                continue;
            };
            comparisons.push(LevelComparison {
                frequency: f,
                gel_level: l,
                base: base_summary,
                level: level_summary,
                percent_change: 100.0 * (level_summary.mean / base_summary.mean - 1.0),
                test: t_test_unpaired_with(&other, &base, variance).ok(),
            });
        }
    }
    Ok(ComparisonReport {
        method,
        cells,
        comparisons,
    })
}
