use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::run::{run_experiment, ExperimentResults};
use crate::error::{Error, Result};

pub const ARTIFACT_NAME: &str = "qsnn";
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const MANIFEST_FILE: &str = "manifest.toml";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub artifact: String,
    pub version: String,
    pub config: ExperimentConfig,
}

impl Manifest {
    pub fn for_results(results: &ExperimentResults) -> Self {
        Self {
            artifact: ARTIFACT_NAME.to_string(),
            version: ARTIFACT_VERSION.to_string(),
            config: results.config.clone(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::config("manifest", format!("{}: {e}", path.display())))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config("manifest", e.to_string()))
    }
}

/// A named CSV table rendered in memory.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Table {
    pub name: &'static str,
    pub contents: String,
}

struct TableWriter {
    name: &'static str,
    inner: csv::Writer<Vec<u8>>,
}

impl TableWriter {
    fn new(name: &'static str, header: &[&str]) -> Result<Self> {
        let mut inner = csv::Writer::from_writer(Vec::new());
        inner.write_record(header).map_err(|e| csv_error(name, e))?;
        Ok(Self { name, inner })
    }

    fn row(&mut self, fields: Vec<String>) -> Result<()> {
        self.inner.write_record(&fields).map_err(|e| csv_error(self.name, e))
    }

    fn finish(self) -> Result<Table> {
        let bytes = self.inner.into_inner().map_err(|e| Error::InvalidArgument(format!("{}: {e}", self.name)))?;
        Ok(Table {
            name: self.name,
            contents: String::from_utf8(bytes).expect("csv output is utf-8"),
        })
    }
}

fn csv_error(name: &str, e: csv::Error) -> Error {
    Error::InvalidArgument(format!("writing {name}: {e}"))
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Every result table, in a fixed order. Werner-style runs add the
/// per-state report and confusion tables.
pub fn render_tables(results: &ExperimentResults) -> Result<Vec<Table>> {
    let mut tables = Vec::new();

    let mut trace = TableWriter::new("trace.csv", &["run", "group", "setting", "seed", "iteration", "loss", "success"])?;
    let mut samples = TableWriter::new("trace_samples.csv", &["run", "iteration", "sample", "label", "success"])?;
    for r in &results.runs {
        for rec in &r.trace.records {
            trace.row(vec![
                r.run.to_string(),
                r.group.clone(),
                r.setting.clone(),
                r.seed.to_string(),
                rec.iteration.to_string(),
                num(rec.loss),
                num(rec.average_success),
            ])?;
            for (k, p) in rec.sample_success.iter().enumerate() {
                samples.row(vec![
                    r.run.to_string(),
                    rec.iteration.to_string(),
                    k.to_string(),
                    r.labels[k].to_string(),
                    num(*p),
                ])?;
            }
        }
    }
    tables.push(trace.finish()?);
    tables.push(samples.finish()?);

    let mut summary = TableWriter::new(
        "summary.csv",
        &[
            "run",
            "group",
            "setting",
            "seed",
            "shape",
            "initial_success",
            "final_success",
            "best_success",
            "final_loss",
            "helstrom",
            "ratio_to_helstrom",
        ],
    )?;
    for r in &results.runs {
        let last = r.trace.final_record();
        summary.row(vec![
            r.run.to_string(),
            r.group.clone(),
            r.setting.clone(),
            r.seed.to_string(),
            r.topology.shape_name(),
            num(r.trace.records[0].average_success),
            num(last.average_success),
            num(r.trace.best_success()),
            num(last.loss),
            opt(r.helstrom),
            opt(r.helstrom.map(|h| last.average_success / h)),
        ])?;
    }
    tables.push(summary.finish()?);

    let mut agg = TableWriter::new(
        "aggregate.csv",
        &["group", "iteration", "count", "mean_success", "variance_success", "mean_helstrom"],
    )?;
    for row in results.aggregate() {
        agg.row(vec![
            row.group,
            row.iteration.to_string(),
            row.count.to_string(),
            num(row.mean_success),
            num(row.variance_success),
            opt(row.mean_helstrom),
        ])?;
    }
    tables.push(agg.finish()?);

    let mut params = TableWriter::new("params.csv", &["run", "kind", "index", "a", "b", "initial", "final"])?;
    for r in &results.runs {
        for (k, &(i, j)) in r.topology.hamiltonian_edges().iter().enumerate() {
            params.row(vec![
                r.run.to_string(),
                "h".into(),
                k.to_string(),
                i.to_string(),
                j.to_string(),
                num(r.trace.initial.h[k]),
                num(r.trace.final_params.h[k]),
            ])?;
        }
        for (k, e) in r.topology.lindblad_edges().iter().enumerate() {
            params.row(vec![
                r.run.to_string(),
                "gamma".into(),
                k.to_string(),
                e.from.to_string(),
                e.to.to_string(),
                num(r.trace.initial.gamma[k]),
                num(r.trace.final_params.gamma[k]),
            ])?;
        }
    }
    tables.push(params.finish()?);

    if results.runs.iter().any(|r| r.classifier.is_some()) {
        let mut per_state = TableWriter::new(
            "per_state.csv",
            &[
                "run",
                "group",
                "seed",
                "p",
                "raw_separable",
                "raw_entangled",
                "p_separable",
                "p_entangled",
                "true_label",
                "predicted_label",
            ],
        )?;
        let mut confusion = TableWriter::new(
            "confusion.csv",
            &["run", "group", "seed", "true_label", "count", "predict_separable", "predict_entangled"],
        )?;
        for r in &results.runs {
            let Some(report) = &r.classifier else { continue };
            for s in &report.states {
                per_state.row(vec![
                    r.run.to_string(),
                    r.group.clone(),
                    r.seed.to_string(),
                    num(s.p),
                    num(s.raw_separable),
                    num(s.raw_entangled),
                    num(s.p_separable),
                    num(s.p_entangled),
                    s.truth.as_str().into(),
                    s.predicted.as_str().into(),
                ])?;
            }
            for (row, label) in ["separable", "entangled"].iter().enumerate() {
                confusion.row(vec![
                    r.run.to_string(),
                    r.group.clone(),
                    r.seed.to_string(),
                    label.to_string(),
                    report.confusion.counts[row].to_string(),
                    num(report.confusion.rows[row][0]),
                    num(report.confusion.rows[row][1]),
                ])?;
            }
        }
        tables.push(per_state.finish()?);
        tables.push(confusion.finish()?);
    }
    Ok(tables)
}

/// Writes all tables and the manifest into `dir`, creating it if needed.
pub fn emit_outputs(results: &ExperimentResults, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    for table in render_tables(results)? {
        let path = dir.join(table.name);
        fs::write(&path, table.contents).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    let path = dir.join(MANIFEST_FILE);
    fs::write(&path, Manifest::for_results(results).to_toml_string()?).map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(written)
}

/// Output directory of a resolved config, unless `out` overrides it.
pub fn output_dir(config: &ExperimentConfig, out: Option<&Path>) -> PathBuf {
    out.map(Path::to_path_buf)
        .or_else(|| config.output.clone())
        .unwrap_or_else(|| PathBuf::from("results").join(config.kind.as_str()))
}

/// Re-runs the experiment recorded in a manifest.
pub fn replay(manifest_path: &Path) -> Result<ExperimentResults> {
    let manifest = Manifest::load(manifest_path)?;
    if manifest.artifact != ARTIFACT_NAME {
        return Err(Error::config(
            "artifact",
            format!("manifest was written by {:?}, not {ARTIFACT_NAME}", manifest.artifact),
        ));
    }
    run_experiment(&manifest.config).map_err(|e| e.context(format!("replaying {}", manifest_path.display())))
}
