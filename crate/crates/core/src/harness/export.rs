use std::fs::{self, File};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use super::{ComparisonRow, ExperimentOutput, ExperimentSpec, HarnessError};
use crate::trace::save_trace;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path, e: csv::Error) -> HarnessError {
    HarnessError::Format {
        path: path.to_path_buf(),
        reason: e.to_string(),
    }
}

pub fn write_table<W: Write>(rows: &[ComparisonRow], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_table<R: Read>(input: R) -> Result<Vec<ComparisonRow>, csv::Error> {
    csv::Reader::from_reader(input).deserialize().collect()
}

/// Writes `rows` as CSV with a header line.
pub fn export_table(rows: &[ComparisonRow], path: &Path) -> Result<(), HarnessError> {
    if rows.is_empty() {
        return Err(HarnessError::Format {
            path: path.to_path_buf(),
            reason: "no rows to export".into(),
        });
    }
    let file = File::create(path).map_err(io_err(path))?;
    write_table(rows, file).map_err(|e| csv_err(path, e))
}

/// `<model>_<trial>_<alg>.csv` with path-hostile characters replaced.
pub fn trace_file_name(model: &str, trial: usize, alg: &str) -> String {
    let clean: String = model
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect();
    format!("{clean}_{trial}_{alg}.csv")
}

/// Writes both traces of every trial that produced them into `dir`.
pub fn export_traces(out: &ExperimentOutput, spec: &ExperimentSpec, dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();
    for t in &out.trials {
        let Some(o) = &t.outcome else { continue };
        for (alg, res) in [(spec.solver.variant.as_str(), &o.bdca), ("dca", &o.dca)] {
            let path = dir.join(trace_file_name(&t.model, t.trial, alg));
            save_trace(&res.trace, &path).map_err(|e| HarnessError::Format {
                path: path.clone(),
                reason: e.to_string(),
            })?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Writes `rows.csv`, `traces/` and the resolved `spec.json` under `dir`.
pub fn export_all(out: &ExperimentOutput, spec: &ExperimentSpec, dir: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    export_table(&out.rows, &dir.join("rows.csv"))?;
    export_traces(out, spec, &dir.join("traces"))?;
    let spec_path = dir.join("spec.json");
    let text = serde_json::to_string_pretty(&spec.resolved()).expect("spec serializes");
    fs::write(&spec_path, text).map_err(io_err(&spec_path))
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use super::*;

    fn small_output() -> (ExperimentSpec, ExperimentOutput) {
        let spec = ExperimentSpec {
            problems: vec![
                ProblemSource::Builtin { name: "quartic".into() },
                ProblemSource::Builtin { name: "expsys".into() },
            ],
            trials: 2,
            x0_box: (0.2, 1.5),
            bdca_iters: 20,
            ..ExperimentSpec::default()
        };
        let out = run_experiment(&spec).unwrap();
        (spec, out)
    }

    #[test]
    fn table_round_trip_and_ratios() {
        let (_, out) = small_output();
        let mut buf = Vec::new();
        write_table(&out.rows[..1], &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.starts_with("data_model,data_m,data_n,instances_trials"));
        let back = read_table(buf.as_slice()).unwrap();
        assert_eq!(back, out.rows[..1]);
        for r in &back {
            assert!((r.ratio_iters - r.dca_iters_avg / r.bdca_iters_avg).abs() <= 1e-9 * r.ratio_iters.abs());
            assert!((r.ratio_time - r.dca_time_avg_ms / r.bdca_time_avg_ms).abs() <= 1e-9 * r.ratio_time.abs());
        }
    }

    #[test]
    fn output_layout() {
        let (spec, out) = small_output();
        let dir = tempfile::tempdir().unwrap();
        export_all(&out, &spec, dir.path()).unwrap();
        let rows = read_table(File::open(dir.path().join("rows.csv")).unwrap()).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(dir.path().join("traces/quartic_0_bdca-qi.csv").exists());
        assert!(dir.path().join("traces/expsys_1_dca.csv").exists());
        let spec_back: ExperimentSpec =
            serde_json::from_str(&fs::read_to_string(dir.path().join("spec.json")).unwrap()).unwrap();
        assert_eq!(spec_back, spec.resolved());
        assert!(export_table(&[], &dir.path().join("empty.csv")).is_err());
    }
}
