use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::{ComparisonReport, ExperimentError, RowStatus, SweepConfig, SweepResult, SweepRow};
use crate::analysis::{kspace_transform_with, write_kspace_csv, Method};

pub const SWEEP_HEADER: [&str; 7] = [
    "gel_thickness_mm",
    "frequency_hz",
    "rep",
    "method",
    "speed_mps",
    "ci_mps",
    "status",
];
pub const COMPARISON_HEADER: [&str; 6] = [
    "frequency_hz",
    "gel_level_mm",
    "t",
    "df",
    "p",
    "significant",
];
const SUMMARY_HEADER: [&str; 7] = [
    "gel_thickness_mm",
    "frequency_hz",
    "n",
    "mean_mps",
    "sd_mps",
    "sem_mps",
    "percent_change_vs_base",
];

/// Metres to millimetres, rounded to the nanometre so 0.007 prints as 7.
fn mm(level: f64) -> String {
    format!("{}", (level * 1e9).round() / 1e6)
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path, e: csv::Error) -> ExperimentError {
    ExperimentError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

pub fn write_sweep_csv<W: Write>(writer: W, result: &SweepResult) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(SWEEP_HEADER)?;
    for r in &result.rows {
        w.write_record([
            mm(r.gel_level),
            r.frequency.to_string(),
            r.rep.to_string(),
            r.method.tag().to_string(),
            opt(r.speed),
            opt(r.ci),
            r.status.label(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_comparison_csv<W: Write>(writer: W, report: &ComparisonReport) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(COMPARISON_HEADER)?;
    for c in &report.comparisons {
        let t = c.test.as_ref();
        w.write_record([
            c.frequency.to_string(),
            mm(c.gel_level),
            opt(t.map(|t| t.t_statistic)),
            opt(t.map(|t| t.degrees_of_freedom)),
            opt(t.map(|t| t.p_value)),
            t.map(|t| t.significant.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary_csv<W: Write>(writer: W, report: &ComparisonReport) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(SUMMARY_HEADER)?;
    for c in &report.cells {
        let change = report
            .comparisons
            .iter()
            .find(|k| k.gel_level == c.gel_level && k.frequency == c.frequency)
            .map(|k| k.percent_change)
            .or_else(|| (c.gel_level.abs() <= super::BASE_TOL).then_some(0.0));
        w.write_record([
            mm(c.gel_level),
            c.frequency.to_string(),
            c.summary.n.to_string(),
            c.summary.mean.to_string(),
            opt(c.summary.sd),
            opt(c.summary.sem),
            opt(change),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads rows written by [`write_sweep_csv`].
pub fn read_sweep_csv(path: &Path) -> Result<SweepResult, ExperimentError> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    let mut rdr = csv::Reader::from_reader(file);
    let headers = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    if headers.iter().ne(SWEEP_HEADER) {
        return Err(ExperimentError::Parse {
            path: path.to_path_buf(),
            message: format!("expected header {}", SWEEP_HEADER.join(",")),
        });
    }
    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let bad = |what: &str| ExperimentError::Parse {
            path: path.to_path_buf(),
            message: format!("data row {}: bad {what}", line + 1),
        };
        let num = |i: usize, what: &str| rec[i].parse::<f64>().map_err(|_| bad(what));
        let maybe = |i: usize, what: &str| {
            if rec[i].is_empty() {
                Ok(None)
            } else {
                num(i, what).map(Some)
            }
        };
        let status = match &rec[6] {
            "ok" => RowStatus::Ok,
            s => RowStatus::Failed(s.strip_prefix("failed: ").unwrap_or(s).to_string()),
        };
        rows.push(SweepRow {
            gel_level: num(0, "gel_thickness_mm")? / 1000.0,
            frequency: num(1, "frequency_hz")?,
            rep: rec[2].parse().map_err(|_| bad("rep"))?,
            method: Method::from_tag(&rec[3]).ok_or_else(|| bad("method"))?,
            speed: maybe(4, "speed_mps")?,
            ci: maybe(5, "ci_mps")?,
            status,
        });
    }
    Ok(SweepResult {
        rows,
        records: Vec::new(),
    })
}

fn write_file(
    path: &Path,
    f: impl FnOnce(&mut Vec<u8>) -> Result<(), String>,
) -> Result<PathBuf, ExperimentError> {
    let mut buf = Vec::new();
    f(&mut buf).map_err(|message| ExperimentError::Parse {
        path: path.to_path_buf(),
        message,
    })?;
    fs::write(path, buf).map_err(io_err(path))?;
    Ok(path.to_path_buf())
}

fn manifest(config: &SweepConfig) -> String {
    format!(
        "# surfwave {} sweep manifest\n\
         # noise seed for repetition k (counted in sweep.csv order, methods share a seed) = base_seed + k\n\
         # rerun with: surfwave sweep --config run_manifest.toml\n\n{}",
        env!("CARGO_PKG_VERSION"),
        config.to_toml()
    )
}

/// Writes the study outputs into `config.output_dir` and returns the paths written.
pub fn emit_outputs(
    result: &SweepResult,
    report: &ComparisonReport,
    config: &SweepConfig,
) -> Result<Vec<PathBuf>, ExperimentError> {
    let dir = &config.output_dir;
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let s = |e: csv::Error| e.to_string();
    let mut written = vec![
        write_file(&dir.join("sweep.csv"), |b| {
            write_sweep_csv(b, result).map_err(s)
        })?,
        write_file(&dir.join("comparison.csv"), |b| {
            write_comparison_csv(b, report).map_err(s)
        })?,
        write_file(&dir.join("summary.csv"), |b| {
            write_summary_csv(b, report).map_err(s)
        })?,
        write_file(&dir.join("dispersion.svg"), |b| {
            b.extend_from_slice(super::dispersion_svg(report).as_bytes());
            Ok(())
        })?,
    ];
    if config.kspace_grids {
        for cell in &result.records {
            let name = format!("kspace_{}_{}.csv", mm(cell.gel_level), cell.frequency);
            written.push(write_file(&dir.join(name), |b| {
                let map = kspace_transform_with(&cell.record, &config.kspace)
                    .map_err(|e| e.to_string())?;
                write_kspace_csv(b, &map).map_err(|e| e.to_string())
            })?);
        }
    }
    written.push(write_file(&dir.join("run_manifest.toml"), |b| {
        b.extend_from_slice(manifest(config).as_bytes());
        Ok(())
    })?);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::compare_levels;

    fn rows() -> SweepResult {
        let mut rows = Vec::new();
        for (level, f) in [(0.0, 100.0), (0.007, 100.0)] {
            for rep in 0..2 {
                for method in Method::ALL {
                    rows.push(SweepRow {
                        gel_level: level,
                        frequency: f,
                        rep,
                        method,
                        speed: Some(3.0 + rep as f64 * 0.25 + level),
                        ci: (method == Method::PhaseGradient).then_some(0.125),
                        status: RowStatus::Ok,
                    });
                }
            }
        }
        rows.push(SweepRow {
            gel_level: 0.012,
            frequency: 100.0,
            rep: 0,
            method: Method::Kspace,
            speed: None,
            ci: None,
            status: RowStatus::Failed("unreliable k-space peak: near K = 0, see log".into()),
        });
        SweepResult {
            rows,
            records: Vec::new(),
        }
    }

    #[test]
    fn millimetre_labels() {
        assert_eq!(mm(0.0), "0");
        assert_eq!(mm(0.002), "2");
        assert_eq!(mm(0.007), "7");
        assert_eq!(mm(0.012), "12");
        assert_eq!(mm(0.0005), "0.5");
    }

    #[test]
    fn sweep_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sweep.csv");
        let r = rows();
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &r).unwrap();
        fs::write(&path, &buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(
            text.starts_with("gel_thickness_mm,frequency_hz,rep,method,speed_mps,ci_mps,status\n")
        );
        assert!(text.contains("7,100,1,phase_gradient,3.257,0.125,ok\n"));
        assert_eq!(read_sweep_csv(&path).unwrap().rows, r.rows);
    }

    #[test]
    fn sweep_csv_rejects_foreign_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        fs::write(&path, "a,b\n1,2\n").unwrap();
        assert!(matches!(
            read_sweep_csv(&path),
            Err(ExperimentError::Parse { .. })
        ));
    }

    #[test]
    fn empty_result_writes_headers_only() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = SweepConfig {
            output_dir: dir.path().join("o"),
            ..SweepConfig::default()
        };
        let r = SweepResult::default();
        let rep = compare_levels(&r, Method::PhaseGradient).unwrap();
        let files = emit_outputs(&r, &rep, &cfg).unwrap();
        assert_eq!(files.len(), 5);
        let sweep = fs::read_to_string(cfg.output_dir.join("sweep.csv")).unwrap();
        assert_eq!(sweep, format!("{}\n", SWEEP_HEADER.join(",")));
        let cmp = fs::read_to_string(cfg.output_dir.join("comparison.csv")).unwrap();
        assert_eq!(cmp, "frequency_hz,gel_level_mm,t,df,p,significant\n");
        let svg = fs::read_to_string(cfg.output_dir.join("dispersion.svg")).unwrap();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn manifest_parses_back_to_the_config() {
        let cfg = SweepConfig {
            base_seed: 77,
            repetitions: 2,
            ..SweepConfig::default()
        };
        assert_eq!(SweepConfig::from_toml(&manifest(&cfg)).unwrap(), cfg);
    }

    #[test]
    fn unwritable_directory_names_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "x").unwrap();
        let cfg = SweepConfig {
            output_dir: blocker.join("sub"),
            ..SweepConfig::default()
        };
        let r = SweepResult::default();
        let rep = compare_levels(&r, Method::PhaseGradient).unwrap();
        let err = emit_outputs(&r, &rep, &cfg).unwrap_err();
        assert!(err.to_string().contains("sub"));
    }
}
